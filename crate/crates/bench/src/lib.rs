//! Criterion benchmarks for negfuse live in `benches/`.
