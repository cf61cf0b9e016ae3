//! Benchmarks for `hardylim-core`; see `benches/kernels.rs`.
