//! Static device quantities derived from raw circuit parameters.
//!
//! The junction sits in the washboard potential W(φ) = −W_J cos φ − W_J β φ.
//! Level positions come from the cubic expansion around the well minimum,
//! treated in second-order perturbation theory.
//!
//! Unit convention: configuration fields carry ordinary frequencies (Hz);
//! every derived quantity is angular (rad/s). Conversion happens only when
//! a config is read or a report is printed.

use crate::constants::{ELEMENTARY_CHARGE, HBAR, REDUCED_FLUX_QUANTUM, TWO_PI};
use crate::error::{Error, Result};

/// Raw circuit inputs for one bias point of the device.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceConfig {
    /// Junction capacitance, F.
    pub c: f64,
    /// Critical current, A.
    pub i0: f64,
    /// Bias ratio I/I₀, in (0, 1).
    pub beta: f64,
    /// Resonator capacitance, F.
    pub c_res: f64,
    /// Resonator inductance, H.
    pub l_res: f64,
    /// Coupling capacitance, F. `None` means the coupling strength is set
    /// through `lambda2` alone.
    pub c_coup: Option<f64>,
    /// Dimensionless design knob fixing g₂ = λ₂Δ.
    pub lambda2: f64,
    /// First-level relaxation rate, Hz (ordinary frequency).
    pub gamma10: f64,
    /// Second-level pure decoherence rate, Hz.
    pub gamma22: f64,
    /// First-level pure decoherence rate, Hz.
    pub gamma11: f64,
    /// Superconducting gap frequency, Hz; used only by validity checks.
    pub gap_frequency: f64,
}

/// Derived well quantities, all angular (rad/s) or SI.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelStructure {
    /// Josephson energy, J.
    pub wj: f64,
    /// Capacitive energy e²/2C, J.
    pub wc: f64,
    /// Plasma frequency, rad/s.
    pub omega_p: f64,
    /// Barrier height in units of ħω_p.
    pub n0: f64,
    /// 0→1 transition frequency, rad/s.
    pub omega10: f64,
    /// 0→2 transition frequency, rad/s.
    pub omega20: f64,
    /// Photon frequency ω = ω₂₀/2, rad/s.
    pub omega: f64,
    /// Detuning Δ = ω₁₀ − ω, rad/s.
    pub delta: f64,
    /// Phase of the well minimum, arcsin β.
    pub phi_min: f64,
    /// Barrier-top offset of the cubic expansion, 2 cot φ_min.
    pub delta_max: f64,
}

/// Couplings, Stark shifts and incoherent rates, all angular (rad/s).
///
/// Tunneling rates start at zero; `with_tunneling` injects the WKB values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingRates {
    pub lambda1: f64,
    pub lambda2: f64,
    pub g1: f64,
    pub g2: f64,
    pub g_tilde: f64,
    pub chi1: f64,
    pub chi2: f64,
    pub gamma0: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    pub gamma10: f64,
    pub gamma21: f64,
    pub gamma11: f64,
    pub gamma22: f64,
}

impl CouplingRates {
    /// Γ̃₁ = γ₁ + Γ₁₀
    pub fn gamma_tilde1(&self) -> f64 {
        self.gamma1 + self.gamma10
    }

    /// Γ̃₂ = γ₂ + Γ₂₁
    pub fn gamma_tilde2(&self) -> f64 {
        self.gamma2 + self.gamma21
    }

    /// Full decoherence rate of the 0→1 transition.
    pub fn d01(&self) -> f64 {
        self.gamma0 + self.gamma1 + self.gamma10 + self.gamma11
    }

    /// Full decoherence rate of the 1→2 transition.
    pub fn d12(&self) -> f64 {
        self.gamma1 + self.gamma2 + self.gamma10 + self.gamma21 + self.gamma22
    }

    /// Full decoherence rate of the 0→2 transition.
    pub fn d02(&self) -> f64 {
        self.gamma0 + self.gamma2 + self.gamma21 + self.gamma22
    }

    /// Copy with the tunneling rates set (angular, rad/s).
    pub fn with_tunneling(mut self, gamma0: f64, gamma1: f64, gamma2: f64) -> Self {
        self.gamma0 = gamma0;
        self.gamma1 = gamma1;
        self.gamma2 = gamma2;
        self
    }
}

/// Capacitances renormalized by the junction-resonator coupling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenormalizedCapacitances {
    pub c_t: f64,
    pub c_res_t: f64,
    pub c_coup_t: f64,
}

impl RenormalizedCapacitances {
    /// Renormalized resonator impedance √(L_res/C̃_res), Ω.
    pub fn impedance(&self, l_res: f64) -> f64 {
        (l_res / self.c_res_t).sqrt()
    }

    /// Renormalized resonator frequency 1/√(L_res C̃_res), rad/s.
    pub fn resonator_frequency(&self, l_res: f64) -> f64 {
        1.0 / (l_res * self.c_res_t).sqrt()
    }
}

impl DeviceConfig {
    pub fn validate(&self) -> Result<()> {
        let positive: [(&'static str, f64); 4] = [
            ("c", self.c),
            ("c_res", self.c_res),
            ("l_res", self.l_res),
            ("i0", self.i0),
        ];
        for (name, v) in positive {
            if !(v > 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    message: format!("must be positive, got {v}"),
                });
            }
        }
        let nonneg: [(&'static str, f64); 5] = [
            ("lambda2", self.lambda2),
            ("gamma10", self.gamma10),
            ("gamma22", self.gamma22),
            ("gamma11", self.gamma11),
            ("gap_frequency", self.gap_frequency),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) {
                return Err(Error::InvalidParameter {
                    name,
                    message: format!("must be non-negative, got {v}"),
                });
            }
        }
        if let Some(cc) = self.c_coup {
            if !(cc >= 0.0) {
                return Err(Error::InvalidParameter {
                    name: "c_coup",
                    message: format!("must be non-negative, got {cc}"),
                });
            }
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidParameter {
                name: "beta",
                message: format!("must lie in (0, 1), got {}", self.beta),
            });
        }
        Ok(())
    }

    /// Reference device of the three-level (two-photon) bias point.
    pub fn table1() -> Self {
        DeviceConfig {
            c: 2e-12,
            i0: 10e-6,
            beta: 0.97987,
            c_res: 1.8918e-13,
            l_res: 2e-9,
            c_coup: None,
            lambda2: 0.1,
            gamma10: 318e3,
            gamma22: 2.1e6,
            gamma11: 1e6,
            gap_frequency: 82e9,
        }
    }

    /// Copy of this config at a different bias ratio.
    pub fn with_beta(mut self, beta: f64) -> Self {
        self.beta = beta;
        self
    }
}

/// W_J = I₀Φ₀/2π, J.
pub fn josephson_energy(i0: f64) -> Result<f64> {
    if i0 < 0.0 {
        return Err(Error::InvalidParameter {
            name: "i0",
            message: format!("current must be non-negative, got {i0}"),
        });
    }
    Ok(i0 * REDUCED_FLUX_QUANTUM)
}

/// Exact washboard potential W(φ) = −W_J cos φ − W_J β φ, J.
pub fn washboard_potential(phi: f64, cfg: &DeviceConfig) -> f64 {
    let wj = cfg.i0 * REDUCED_FLUX_QUANTUM;
    -wj * phi.cos() - wj * cfg.beta * phi
}

/// Cubic expansion of the washboard around the well minimum, J.
/// `delta` is the phase offset from φ_min.
pub fn cubic_potential(delta: f64, cfg: &DeviceConfig) -> f64 {
    let wj = cfg.i0 * REDUCED_FLUX_QUANTUM;
    let sq = (1.0 - cfg.beta * cfg.beta).sqrt();
    wj * (sq / 2.0 * delta * delta - cfg.beta / 6.0 * delta * delta * delta)
}

/// Effective mass in phase coordinates, m = C (Φ₀/2π)².
pub fn effective_mass(cfg: &DeviceConfig) -> f64 {
    cfg.c * REDUCED_FLUX_QUANTUM * REDUCED_FLUX_QUANTUM
}

/// Well geometry and perturbative level frequencies.
pub fn derive_levels(cfg: &DeviceConfig) -> Result<LevelStructure> {
    cfg.validate()?;
    let beta = cfg.beta;
    let wj = josephson_energy(cfg.i0)?;
    let wc = ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (2.0 * cfg.c);
    let one_minus_b2 = 1.0 - beta * beta;
    let omega_p = (8.0 * wj * wc).sqrt() * one_minus_b2.powf(0.25) / HBAR;
    let n0 = one_minus_b2.powf(1.25) / (3.0 * beta * beta) * (wj / (2.0 * wc)).sqrt();
    let omega10 = omega_p * (1.0 - 5.0 / (36.0 * n0));
    let omega20 = omega_p * (2.0 - 5.0 / (12.0 * n0));
    let omega = omega20 / 2.0;
    let delta = omega10 - omega;
    let phi_min = beta.asin();
    let delta_max = 2.0 / phi_min.tan();
    Ok(LevelStructure {
        wj,
        wc,
        omega_p,
        n0,
        omega10,
        omega20,
        omega,
        delta,
        phi_min,
        delta_max,
    })
}

/// Couplings and Stark shifts from the λ₂ design knob; decay rates copied
/// from the config with Γ₂₁ = 2Γ₁₀. Tunneling rates are zero until injected.
pub fn derive_couplings(levels: &LevelStructure, cfg: &DeviceConfig) -> Result<CouplingRates> {
    if !(levels.delta > 0.0) {
        return Err(Error::InvalidParameter {
            name: "delta",
            message: format!("detuning must be positive, got {}", levels.delta),
        });
    }
    let g2 = cfg.lambda2 * levels.delta;
    let g1 = g2 / 2f64.sqrt();
    let lambda1 = g1 / levels.delta;
    let g_tilde = g1 * g2 / levels.delta;
    let chi1 = g1 * g1 / levels.delta;
    let chi2 = g2 * g2 / levels.delta;
    let gamma10 = TWO_PI * cfg.gamma10;
    Ok(CouplingRates {
        lambda1,
        lambda2: cfg.lambda2,
        g1,
        g2,
        g_tilde,
        chi1,
        chi2,
        gamma0: 0.0,
        gamma1: 0.0,
        gamma2: 0.0,
        gamma10,
        gamma21: 2.0 * gamma10,
        gamma11: TWO_PI * cfg.gamma11,
        gamma22: TWO_PI * cfg.gamma22,
    })
}

/// Coupling-renormalized capacitances; reduces to the bare values at
/// zero coupling capacitance.
pub fn renormalized_capacitances(
    c: f64,
    c_coup: f64,
    c_res: f64,
) -> Result<RenormalizedCapacitances> {
    if !(c > 0.0) || !(c_res > 0.0) {
        return Err(Error::InvalidParameter {
            name: "c",
            message: "junction and resonator capacitances must be positive".into(),
        });
    }
    if c_coup < 0.0 {
        return Err(Error::InvalidParameter {
            name: "c_coup",
            message: format!("must be non-negative, got {c_coup}"),
        });
    }
    if c_coup == 0.0 {
        return Ok(RenormalizedCapacitances {
            c_t: c,
            c_res_t: c_res,
            c_coup_t: 0.0,
        });
    }
    let c_t = (c + c_coup * (1.0 + c / c_res)) / (1.0 + c_coup / c_res);
    let c_res_t = (c_res + c_coup * (1.0 + c_res / c)) / (1.0 + c_coup / c);
    let c_coup_t = 1.0 / (1.0 / c_coup + 1.0 / c + 1.0 / c_res);
    Ok(RenormalizedCapacitances {
        c_t,
        c_res_t,
        c_coup_t,
    })
}

/// Largest distinguishable photon number: floor(margin·(Γ̃₂+Γ₂₂)/χ₂).
///
/// The default margin 0.65 is a calibration, not a derivation; margin 1 is
/// the strict reading of the underlying inequality.
pub fn n_max(rates: &CouplingRates, margin: f64) -> u32 {
    if rates.chi2 <= 0.0 {
        return 0;
    }
    let v = margin * (rates.gamma_tilde2() + rates.gamma22) / rates.chi2;
    if v < 0.0 {
        0
    } else {
        v.floor() as u32
    }
}

/// Default calibration of the `n_max` margin.
pub const DEFAULT_N_MAX_MARGIN: f64 = 0.65;

/// Coupling strength from the circuit matrix elements, as a consistency
/// check of the λ₂ route. Available only when the coupling capacitance is
/// given. Returns (g₁, g₂) in rad/s, in the harmonic approximation of the
/// junction well.
pub fn coupling_from_circuit(cfg: &DeviceConfig, levels: &LevelStructure) -> Option<(f64, f64)> {
    let c_coup = cfg.c_coup?;
    if c_coup == 0.0 {
        return None;
    }
    let caps = renormalized_capacitances(cfg.c, c_coup, cfg.c_res).ok()?;
    let rho = caps.impedance(cfg.l_res);
    // |<1|Q|0>| for a harmonic well of mass C̃ and frequency ω_p.
    let q10 = (HBAR * caps.c_t * levels.omega_p / 2.0).sqrt();
    let g1 = caps.c_coup_t / (cfg.c * cfg.c_res) * (HBAR / (2.0 * rho)).sqrt() * q10 / HBAR;
    Some((g1, 2f64.sqrt() * g1))
}
