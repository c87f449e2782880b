//! Criterion benchmarks for `wignerlab-core`; run with `cargo bench -p wignerlab-bench`.
