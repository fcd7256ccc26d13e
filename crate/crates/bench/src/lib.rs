//! Criterion benchmarks of the solver; see `benches/weyl.rs`.
