//! Benchmarks for `lrfhss-core`; see `benches/models.rs`.
