//! Criterion benchmarks for the derivation pipeline; see `benches/`.
