//! Criterion benchmarks for the combiners, Bayes factors and the simulation engine.
//! See `benches/`.
