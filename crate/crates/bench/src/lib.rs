//! Criterion benchmarks for polyguard-core live in `benches/`.
