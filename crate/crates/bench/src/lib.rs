//! Criterion benchmarks for janossy-core; see `benches/solvers.rs`.
