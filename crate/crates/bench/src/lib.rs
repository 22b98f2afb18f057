//! Criterion benchmarks for hfl-core live in `benches/`.
