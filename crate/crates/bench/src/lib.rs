//! Criterion benchmarks for `wiretap-core`; see `benches/numerics.rs`.
