//! Criterion benchmarks for the hot paths of `ffpe-core`; see `benches/`.
