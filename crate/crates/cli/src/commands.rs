use std::f64::consts::{PI, SQRT_2};
use std::path::Path;
use std::time::Instant;

use clap::Parser;
use ffpe_core::eigen::{EigenFunction, Parity};
use ffpe_core::evolve::{nearest_rate, propagate, relaxation_rate_ladder, StablePDFParams};
use ffpe_core::kernel::{apply_kernel_density, g_fresnel, kernel_real, zg, KernelId};
use ffpe_core::montecarlo::{ensemble_delta, quartiles, simulate_ensemble, trajectory_autocorr, Initial, SimConfig};
use ffpe_core::numerics::{fit_rate, Grid, RateFit};
use ffpe_core::observables::{builtin_observable, corr_series, delta_series, ObservableSpectrum, RelaxationSeries};
use ffpe_core::Error;
use serde::Serialize;

use crate::output::{read_manifest, OutputDir, Table, MANIFEST_FILE};
use crate::{
    ApplyFrom, Cli, CliError, Command, CorrArgs, EigenArgs, KernelArgs, KernelWhat, Method, ParityArg, RelaxArgs, RerunArgs,
    SimulateArgs, Space,
};

pub fn dispatch(command: Command, argv: Vec<String>) -> Result<(), CliError> {
    if let Command::Rerun(args) = command {
        return rerun(args);
    }
    let start = Instant::now();
    let config = serde_json::to_value(&command)?;
    let seed = command.seed();
    let mut out = match &command {
        Command::Eigen(a) => OutputDir::create(&a.out)?,
        Command::Kernel(a) => OutputDir::create(&a.out)?,
        Command::Relax(a) => OutputDir::create(&a.out)?,
        Command::Corr(a) => OutputDir::create(&a.out)?,
        Command::Simulate(a) => OutputDir::create(&a.out)?,
        Command::Rerun(_) => unreachable!(),
    };
    match &command {
        Command::Eigen(a) => eigen(a, &mut out)?,
        Command::Kernel(a) => kernel(a, &mut out)?,
        Command::Relax(a) => relax(a, &mut out)?,
        Command::Corr(a) => corr(a, &mut out)?,
        Command::Simulate(a) => simulate(a, &mut out)?,
        Command::Rerun(_) => unreachable!(),
    }
    out.finish(argv, config, seed, start.elapsed())?;
    Ok(())
}

fn eigen(a: &EigenArgs, out: &mut OutputDir) -> Result<(), CliError> {
    let parity = match a.parity {
        ParityArg::Even => Parity::Even,
        ParityArg::Odd => Parity::Odd,
    };
    let ef = EigenFunction::new(parity, a.lambda, a.mu)?;
    let table = match a.space {
        Space::Fourier => {
            let mut t = Table::new(&["k", "re", "im"]);
            for &k in &a.grid.0 {
                let v = ef.fourier(k)?;
                t.push(vec![k, v.re, v.im]);
            }
            t
        }
        Space::Real => {
            let mut t = Table::new(&["x", "value"]);
            for &x in &a.grid.0 {
                t.push(vec![x, ef.real(x)?]);
            }
            t
        }
    };
    out.write_table("eigen.csv", &table)
}

fn sweep(a: &KernelArgs) -> Result<Vec<f64>, CliError> {
    Ok(Grid::uniform_on(a.n, a.zmin, a.zmax)?.points().to_vec())
}

fn kernel(a: &KernelArgs, out: &mut OutputDir) -> Result<(), CliError> {
    match a.what {
        KernelWhat::Zg => {
            // |zg(z)| / (sqrt 2 |z|) = |g(z)| / sqrt 2, finite at z = 0
            let mut t = Table::new(&["z", "zg", "envelope", "envelope_ratio"]);
            for z in sweep(a)? {
                t.push(vec![z, zg(z), SQRT_2 * z.abs(), g_fresnel(z).abs() / SQRT_2]);
            }
            out.write_table("zg.csv", &t)
        }
        KernelWhat::T1half | KernelWhat::T22 => {
            let mut t = Table::new(&["chi", "value"]);
            for chi in sweep(a)? {
                let v = match a.what {
                    KernelWhat::T1half => kernel_real(KernelId::T1Half, chi, a.x)?,
                    _ => kernel_real(KernelId::T22, a.x, chi)?,
                };
                t.push(vec![chi, v]);
            }
            out.write_table(if a.what == KernelWhat::T1half { "t1half.csv" } else { "t22.csv" }, &t)
        }
        KernelWhat::Apply => {
            let grid = Grid::uniform_on(a.n, a.zmin, a.zmax)?;
            let cauchy = |x: f64| 1.0 / (PI * (1.0 + x * x));
            let normal = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
            let (result, reference): (_, &dyn Fn(f64) -> f64) = match a.from {
                ApplyFrom::Cauchy => (apply_kernel_density(KernelId::T1Half, cauchy, &grid, a.tol)?, &normal),
                ApplyFrom::Gauss => (apply_kernel_density(KernelId::T22, normal, &grid, a.tol)?, &cauchy),
            };
            let mut t = Table::new(&["x", "value", "error", "reference"]);
            for ((&x, &v), &e) in result.samples.xs().iter().zip(&result.samples.values).zip(&result.errors) {
                t.push(vec![x, v, e, reference(x)]);
            }
            out.write_table("apply.csv", &t)
        }
    }
}

fn initial_law(alpha: Option<f64>, x0: f64, scale: f64) -> Result<Initial, CliError> {
    Ok(match alpha {
        Some(alpha) => Initial::Stable(StablePDFParams::new(alpha, x0, scale)?),
        None => Initial::PointMass(x0),
    })
}

fn observables(list: &[ffpe_core::observables::Builtin]) -> Vec<ObservableSpectrum> {
    list.iter().map(|&b| builtin_observable(b)).collect()
}

/// Step count for a time that must be a whole number of steps.
fn steps_for(t: f64, dt: f64) -> Result<usize, CliError> {
    let n = (t / dt).round();
    if !(n >= 1.0) || (n * dt - t).abs() > 1e-9 * t.max(1.0) {
        return Err(CliError::Usage(format!("time {t} is not a positive multiple of dt = {dt}")));
    }
    Ok(n as usize)
}

#[derive(Serialize)]
struct ObservableRate {
    observable: String,
    fit: Option<RateFit>,
    fit_error: Option<String>,
    nearest_ladder_rate: Option<f64>,
    failures: Vec<(f64, String)>,
}

#[derive(Serialize)]
struct RatesReport {
    mu: f64,
    alpha: Option<f64>,
    method: Method,
    ladder: Vec<f64>,
    observables: Vec<ObservableRate>,
}

fn write_series(
    out: &mut OutputDir,
    prefix: &str,
    series: &[RelaxationSeries],
    window: (f64, f64),
    mu: f64,
    alpha: Option<f64>,
    method: Method,
) -> Result<(), CliError> {
    let mut fits = Vec::new();
    for s in series {
        let mut t = Table::new(&["tau", "value", "error"]);
        for i in 0..s.len() {
            t.push(vec![s.taus[i], s.values[i], s.errors[i]]);
        }
        out.write_table(&format!("{prefix}_{}.csv", s.meta.observable), &t)?;
        fits.push(fit_rate(s, window));
    }
    let top = fits.iter().filter_map(|f| f.as_ref().ok()).map(|f| f.rate).fold(0.0, f64::max);
    let ladder = relaxation_rate_ladder(mu, alpha, (1.5 * top).max(3.0))?;
    let observables = series
        .iter()
        .zip(fits)
        .map(|(s, fit)| {
            let failures = s.failures.iter().map(|(i, m)| (s.taus[*i], m.clone())).collect();
            match fit {
                Ok(f) => ObservableRate {
                    observable: s.meta.observable.clone(),
                    nearest_ladder_rate: nearest_rate(&ladder, f.rate),
                    fit: Some(f),
                    fit_error: None,
                    failures,
                },
                Err(e) => ObservableRate {
                    observable: s.meta.observable.clone(),
                    fit: None,
                    fit_error: Some(e.to_string()),
                    nearest_ladder_rate: None,
                    failures,
                },
            }
        })
        .collect();
    out.write_json("rates.json", &RatesReport { mu, alpha, method, ladder, observables })
}

fn relax(a: &RelaxArgs, out: &mut OutputDir) -> Result<(), CliError> {
    let initial = initial_law(a.alpha, a.x0, a.scale)?;
    let obs = observables(&a.observables);
    let taus = &a.taus.0;
    let series = match a.method {
        Method::Quadrature => {
            let p0 = initial.char_fn(a.mu);
            obs.iter()
                .map(|u| {
                    log::info!("relaxation of {} by quadrature at {} times", u.name, taus.len());
                    delta_series(u, &p0, a.mu, taus)
                })
                .collect::<Result<Vec<_>, Error>>()?
        }
        Method::Mc => {
            let last = taus.last().copied().unwrap_or(0.0);
            let cfg = SimConfig {
                mu: a.mu,
                dt: a.dt,
                steps: steps_for(last, a.dt)?,
                ensemble_size: a.n,
                seed: a.seed,
                initial,
            };
            log::info!("simulating {} trajectories for {} steps", a.n, cfg.steps);
            ensemble_delta(&cfg, &obs, taus)?
        }
    };
    let window = a.fit_window.map(|w| (w.0, w.1)).unwrap_or_else(|| (taus[0], taus[taus.len() - 1]));
    write_series(out, "relax", &series, window, a.mu, a.alpha, a.method)
}

fn corr(a: &CorrArgs, out: &mut OutputDir) -> Result<(), CliError> {
    let obs = observables(&a.observables);
    let taus = &a.taus.0;
    let series = match a.method {
        Method::Quadrature => obs
            .iter()
            .map(|u| {
                log::info!("autocorrelation of {} by quadrature at {} lags", u.name, taus.len());
                corr_series(u, a.mu, taus)
            })
            .collect::<Result<Vec<_>, Error>>()?,
        Method::Mc => {
            let max_lag = taus.last().copied().unwrap_or(0.0);
            let step = if taus.len() > 1 { taus[1] - taus[0] } else { a.dt };
            let cfg = SimConfig {
                mu: a.mu,
                dt: a.dt,
                steps: steps_for(a.t, a.dt)?,
                ensemble_size: 1,
                seed: a.seed,
                initial: Initial::Stationary,
            };
            log::info!("simulating one trajectory for {} steps", cfg.steps);
            trajectory_autocorr(&cfg, &obs, max_lag, step)?
        }
    };
    write_series(out, "corr", &series, (a.fit_window.0, a.fit_window.1), a.mu, None, a.method)
}

#[derive(Serialize)]
struct CfCheck {
    k: f64,
    empirical_re: f64,
    empirical_im: f64,
    exact_re: f64,
    exact_im: f64,
}

#[derive(Serialize)]
struct SimulationSummary {
    time: f64,
    ensemble_size: usize,
    quartiles: (f64, f64, f64),
    characteristic_function: Vec<CfCheck>,
}

fn simulate(a: &SimulateArgs, out: &mut OutputDir) -> Result<(), CliError> {
    let initial = initial_law(a.alpha, a.x0, a.scale)?;
    let cfg = SimConfig { mu: a.mu, dt: a.dt, steps: steps_for(a.t, a.dt)?, ensemble_size: a.n, seed: a.seed, initial };
    log::info!("simulating {} trajectories for {} steps", a.n, cfg.steps);
    let xs = simulate_ensemble(&cfg)?;
    let mut t = Table::new(&["index", "x"]);
    for (i, &x) in xs.iter().enumerate() {
        t.push(vec![i as f64, x]);
    }
    out.write_table("positions.csv", &t)?;

    let exact = propagate(&initial.char_fn(a.mu), cfg.total_time())?;
    let n = xs.len() as f64;
    let characteristic_function = [0.5, 1.0, 2.0]
        .into_iter()
        .map(|k| {
            let e = exact.eval(k)?;
            Ok(CfCheck {
                k,
                empirical_re: xs.iter().map(|x| (k * x).cos()).sum::<f64>() / n,
                empirical_im: xs.iter().map(|x| (k * x).sin()).sum::<f64>() / n,
                exact_re: e.re,
                exact_im: e.im,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mut sorted = xs;
    let summary = SimulationSummary {
        time: cfg.total_time(),
        ensemble_size: a.n,
        quartiles: quartiles(&mut sorted),
        characteristic_function,
    };
    out.write_json("summary.json", &summary)
}

fn rerun(a: RerunArgs) -> Result<(), CliError> {
    let recorded = read_manifest(&a.manifest)?;
    let mut cli = Cli::try_parse_from(&recorded.command_line)
        .map_err(|e| CliError::Usage(format!("recorded command line does not parse: {e}")))?;
    let dir = match cli.command.out_mut() {
        Some(dir) => {
            if let Some(o) = &a.out {
                dir.clone_from(o);
            }
            dir.clone()
        }
        None => return Err(CliError::Usage("a manifest cannot record a rerun".into())),
    };
    dispatch(cli.command, recorded.command_line.clone())?;
    let fresh = read_manifest(&dir.join(MANIFEST_FILE))?;
    compare_outputs(&recorded.outputs, &fresh.outputs, &dir)
}

fn compare_outputs(
    old: &[crate::output::OutputDigest],
    new: &[crate::output::OutputDigest],
    dir: &Path,
) -> Result<(), CliError> {
    if old == new {
        log::info!("all {} outputs in {} reproduced", new.len(), dir.display());
        return Ok(());
    }
    let differing: Vec<&str> = old
        .iter()
        .filter(|o| !new.contains(o))
        .map(|o| o.file.as_str())
        .chain(new.iter().filter(|n| !old.iter().any(|o| o.file == n.file)).map(|n| n.file.as_str()))
        .collect();
    Err(CliError::Mismatch(differing.join(", ")))
}
