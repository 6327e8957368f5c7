//! Benchmark-only crate; the measurements live in `benches/equivalence.rs`.
//!
//! Run with `cargo bench -p dispset-bench`. For a quick scripted number use
//! `dispset bench` instead, which reports a fitted growth exponent.
