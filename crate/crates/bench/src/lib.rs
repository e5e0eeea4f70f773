//! Criterion benchmarks (`benches/`) and the acceptance suite (`tests/acceptance.rs`)
//! for the hypersq library.
