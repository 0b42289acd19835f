//! Benchmark fixtures shared by the criterion harnesses in `benches/`.

/// Perturbation levels swept by the benchmarks.
pub const DELTAS: [f64; 3] = [0.1, 0.3, 0.5];

/// Player counts for the closed-form routes.
pub const FORMULA_SIZES: [usize; 4] = [64, 256, 1024, 4096];

/// Player counts small enough for the brute-force oracle.
pub const ORACLE_SIZES: [usize; 3] = [6, 10, 14];
