//! Criterion benchmarks for the qualgebra library; see `benches/core.rs`.
