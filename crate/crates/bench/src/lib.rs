//! Benchmark-only crate; see `benches/solver.rs`. Run with
//! `cargo bench -p ncuplink-bench`.
