//! Criterion benchmarks for `gpj-core`; run with `cargo bench -p gpj-bench`.
