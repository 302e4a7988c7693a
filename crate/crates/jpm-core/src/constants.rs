//! Physical constants (CODATA 2018).

/// Magnetic flux quantum, Wb.
pub const FLUX_QUANTUM: f64 = 2.067833848e-15;

/// Reduced flux quantum Φ₀/2π, Wb.
pub const REDUCED_FLUX_QUANTUM: f64 = FLUX_QUANTUM / (2.0 * std::f64::consts::PI);

/// Elementary charge, C.
pub const ELEMENTARY_CHARGE: f64 = 1.602176634e-19;

/// Reduced Planck constant, J·s.
pub const HBAR: f64 = 1.054571817e-34;

/// Boltzmann constant, J/K.
pub const BOLTZMANN: f64 = 1.380649e-23;

/// 2π, for converting ordinary frequencies (Hz) to angular ones (rad/s).
pub const TWO_PI: f64 = 2.0 * std::f64::consts::PI;
