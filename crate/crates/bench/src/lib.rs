//! Criterion benchmarks for gcantor-core; see `benches/`.
