//! Criterion benchmarks for the core kernels; run with `cargo bench -p flatstrip-bench`.
