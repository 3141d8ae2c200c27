// Benchmarks live under benches/; this crate exists to anchor them in the workspace.
