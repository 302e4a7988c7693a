//! End-to-end reproduction runs: reference-table comparisons, detector
//! figure data, rate-model vs full-Lindblad cross-checks, and perturbative
//! scaling studies.

use crate::circuit::{
    self, derive_couplings, derive_levels, CouplingRates, DeviceConfig, LevelStructure,
};
use crate::constants::TWO_PI;
use crate::error::{Error, Result};
use crate::liouville::{
    build_effective_hamiltonian, build_hamiltonian_rotating, build_lindbladian, dagger,
    dressed_correction, evolve, max_abs, schrieffer_wolff_unitary, EvolveOptions, HilbertLayout,
    JointState, JumpOp,
};
use crate::rate_model::{
    self, absorption_rate, integrate_rate_equations, optimal_time, p_bright, p_false,
    RateSystemState,
};
use crate::semiclassics;

/// How a computed value is compared against its reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToleranceMode {
    /// deviation = |computed/reference − 1|.
    Relative,
    /// deviation = |computed − reference| (absolute, e.g. percentage points).
    Absolute,
    /// deviation = max(computed/reference, reference/computed); for
    /// order-of-magnitude quantities like WKB rates.
    Factor,
}

#[derive(Debug, Clone)]
pub struct ReproductionResult {
    pub quantity: &'static str,
    pub reference: f64,
    pub computed: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub mode: ToleranceMode,
    pub pass: bool,
}

impl ReproductionResult {
    fn new(
        quantity: &'static str,
        reference: f64,
        computed: f64,
        tolerance: f64,
        mode: ToleranceMode,
    ) -> Self {
        let deviation = match mode {
            ToleranceMode::Relative => (computed / reference - 1.0).abs(),
            ToleranceMode::Absolute => (computed - reference).abs(),
            ToleranceMode::Factor => {
                let r = computed / reference;
                r.max(1.0 / r)
            }
        };
        ReproductionResult {
            quantity,
            reference,
            computed,
            deviation,
            tolerance,
            mode,
            pass: deviation <= tolerance,
        }
    }
}

/// The published tunneling rates of the reference device (ordinary Hz).
/// The structural quantities are recomputed from the circuit; the
/// performance rows deliberately use these published rates so that rate
/// chain and timing are compared on the same footing, while our own WKB
/// rates are compared separately at order-of-magnitude tolerance.
pub const REFERENCE_GAMMA0_HZ: f64 = 37.0;
pub const REFERENCE_GAMMA1_HZ: f64 = 54e3;
pub const REFERENCE_GAMMA2_HZ: f64 = 41e6;

/// Couplings of the reference device with its published tunneling rates.
pub fn reference_rates(cfg: &DeviceConfig) -> Result<(LevelStructure, CouplingRates)> {
    let levels = derive_levels(cfg)?;
    let cr = derive_couplings(&levels, cfg)?.with_tunneling(
        TWO_PI * REFERENCE_GAMMA0_HZ,
        TWO_PI * REFERENCE_GAMMA1_HZ,
        TWO_PI * REFERENCE_GAMMA2_HZ,
    );
    Ok((levels, cr))
}

/// Compare every derived quantity against the reference table.
pub fn reproduce_table1(cfg: &DeviceConfig) -> Result<Vec<ReproductionResult>> {
    use ToleranceMode::{Absolute, Factor, Relative};
    let (levels, cr) = reference_rates(cfg)?;
    let mut rows = Vec::new();

    rows.push(ReproductionResult::new(
        "delta_over_2pi_hz",
        194e6,
        levels.delta / TWO_PI,
        0.01,
        Relative,
    ));
    rows.push(ReproductionResult::new(
        "omega_over_2pi_hz",
        8.2e9,
        levels.omega / TWO_PI,
        0.01,
        Relative,
    ));

    // WKB tunneling rates from the barrier action; prefactor convention
    // uncertainty makes these order-of-magnitude comparisons.
    let wkb = semiclassics::tunneling_rates(&levels, cfg, 3)?;
    for (row, (name, reference)) in wkb.iter().zip([
        ("gamma0_wkb_hz", REFERENCE_GAMMA0_HZ),
        ("gamma1_wkb_hz", REFERENCE_GAMMA1_HZ),
        ("gamma2_wkb_hz", REFERENCE_GAMMA2_HZ),
    ]) {
        rows.push(ReproductionResult::new(name, reference, row.rate / TWO_PI, 5.0, Factor));
    }

    let b20 = absorption_rate(2, &cr);
    rows.push(ReproductionResult::new("b20_over_2pi_hz", 0.35e6, b20 / TWO_PI, 0.05, Relative));

    let nmax_default = circuit::n_max(&cr, circuit::DEFAULT_N_MAX_MARGIN) as f64;
    rows.push(ReproductionResult::new("n_max", 14.0, nmax_default, 0.0, Absolute));
    let nmax_unity = circuit::n_max(&cr, 1.0) as f64;
    rows.push(ReproductionResult::new("n_max_margin_1", 22.0, nmax_unity, 0.0, Absolute));

    let (t_opt, _) = optimal_time(&cr)?;
    rows.push(ReproductionResult::new("t_opt_s", 4.2e-6, t_opt, 0.05, Relative));
    rows.push(ReproductionResult::new(
        "p_false",
        1e-3,
        p_false(t_opt, cr.gamma0),
        2e-4,
        Absolute,
    ));
    rows.push(ReproductionResult::new(
        "p_bright",
        0.986,
        p_bright(t_opt, &cr).0,
        2e-3,
        Absolute,
    ));
    Ok(rows)
}

/// Error-versus-time curve data for the detector figure.
#[derive(Debug, Clone)]
pub struct Fig4Data {
    pub times: Vec<f64>,
    /// 1 − P_bright(t): probability of missing a two-photon state.
    pub miss: Vec<f64>,
    /// Equal-prior discrimination error ε(t).
    pub eps: Vec<f64>,
    pub t_opt: f64,
}

pub fn reproduce_fig4(cfg: &DeviceConfig, t_grid: &[f64]) -> Result<Fig4Data> {
    let (_, cr) = reference_rates(cfg)?;
    let (t_opt, _) = optimal_time(&cr)?;
    let mut miss = Vec::with_capacity(t_grid.len());
    let mut eps = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        miss.push(1.0 - p_bright(t, &cr).0);
        eps.push(rate_model::discrimination_error(t, &cr, (0.5, 0.5))?);
    }
    Ok(Fig4Data { times: t_grid.to_vec(), miss, eps, t_opt })
}

#[derive(Debug, Clone)]
pub struct CrossCheckResult {
    /// max |P_lindblad − P_rate_ode| over the grid.
    pub max_dev_ode: f64,
    /// max |P_lindblad − closed-form bright probability| over the grid.
    pub max_dev_formula: f64,
    pub times: Vec<f64>,
    pub p_lindblad: Vec<f64>,
    pub p_rate: Vec<f64>,
}

/// Uniformly scale every incoherent rate by `s` and the two-photon coupling
/// so that all dimensionless ratios (B₂₀/Γ̃₂, branching fractions, γ₀·t_opt)
/// are preserved; probabilities on a correspondingly scaled time grid are
/// invariant.
fn scale_rates(cr: &CouplingRates, s: f64) -> CouplingRates {
    let mut c = cr.clone();
    c.gamma0 *= s;
    c.gamma1 *= s;
    c.gamma2 *= s;
    c.gamma10 *= s;
    c.gamma21 *= s;
    c.gamma11 *= s;
    c.gamma22 *= s;
    c.g_tilde *= s;
    c.chi1 *= s;
    c.chi2 *= s;
    c
}

/// Evolve the full joint master equation (effective Hamiltonian + bare
/// dissipators) from |2 photons, junction ground⟩ and compare its click
/// probability against the classical rate chain and the closed-form bright
/// probability on [0.1·t_opt, t_opt].
pub fn cross_check_rate_vs_lindblad(cfg: &DeviceConfig, scale: f64) -> Result<CrossCheckResult> {
    let (levels, cr0) = reference_rates(cfg)?;
    let cr = scale_rates(&cr0, scale);
    let (t_opt, _) = optimal_time(&cr)?;
    let n_points = 16;
    let times: Vec<f64> = (0..n_points)
        .map(|k| t_opt * (0.1 + 0.9 * k as f64 / (n_points - 1) as f64))
        .collect();

    let layout = HilbertLayout::new(6)?;
    let h = build_effective_hamiltonian(&layout, levels.delta, &cr);
    let lv = build_lindbladian(&cr, &layout, h);
    let start = JointState::pure(&layout, 0, 2);
    let opts = EvolveOptions { rtol: 1e-7, atol: 1e-10, ..EvolveOptions::default() };
    let traj = evolve(&start, &lv, &times, &opts)?;
    let p_lindblad = traj.click_probabilities();

    let rate_traj = integrate_rate_equations(&RateSystemState::fock_start(2), &cr, &times)?;
    let p_rate: Vec<f64> = rate_traj.iter().map(|s| s.p_click).collect();

    let mut max_dev_ode: f64 = 0.0;
    let mut max_dev_formula: f64 = 0.0;
    for (i, &t) in times.iter().enumerate() {
        max_dev_ode = max_dev_ode.max((p_lindblad[i] - p_rate[i]).abs());
        max_dev_formula = max_dev_formula.max((p_lindblad[i] - p_bright(t, &cr).0).abs());
    }
    Ok(CrossCheckResult { max_dev_ode, max_dev_formula, times, p_lindblad, p_rate })
}

/// Log-log regression slopes of (a) the dressed-Hamiltonian residual and
/// (b) the dressed-Lindbladian residual against λ₂; both must be ≈ 2 for a
/// correct first-order elimination.
pub fn lambda_scaling_study(cfg: &DeviceConfig, lambdas: &[f64]) -> Result<(f64, f64)> {
    if lambdas.len() < 2 {
        return Err(Error::InvalidParameter {
            name: "lambdas",
            message: "need at least 2 points for a slope".into(),
        });
    }
    for &l in lambdas {
        if !(0.0 < l && l <= 0.2) {
            return Err(Error::InvalidParameter {
                name: "lambdas",
                message: format!("lambda {l} outside (0, 0.2]"),
            });
        }
    }
    let levels = derive_levels(cfg)?;
    let layout = HilbertLayout::new(6)?;
    let mut log_l = Vec::new();
    let mut log_h = Vec::new();
    let mut log_d = Vec::new();

    // Fixed probe state: a maximally spread pure state, deterministic.
    let dim = layout.dim();
    let mut probe = crate::liouville::Matrix::zeros((dim, dim));
    for i in 0..dim {
        for j in 0..dim {
            let phase = (i as f64 - j as f64) * 0.37;
            probe[(i, j)] = num_complex::Complex64::from_polar(1.0 / dim as f64, phase);
        }
    }

    for &lam2 in lambdas {
        let mut cfg_l = cfg.clone();
        cfg_l.lambda2 = lam2;
        let cr = derive_couplings(&levels, &cfg_l)?.with_tunneling(
            TWO_PI * REFERENCE_GAMMA0_HZ,
            TWO_PI * REFERENCE_GAMMA1_HZ,
            TWO_PI * REFERENCE_GAMMA2_HZ,
        );
        let u = schrieffer_wolff_unitary(&layout, cr.lambda1, cr.lambda2);
        let ud = dagger(&u);

        // (a) Hamiltonian residual.
        let h = build_hamiltonian_rotating(&layout, levels.delta, &cr);
        let heff = build_effective_hamiltonian(&layout, levels.delta, &cr);
        let res_h = max_abs(&(&ud.dot(&h).dot(&u) - &heff)) / levels.delta;

        // (b) Lindbladian residual against the exact dressed dissipators.
        let mut exact = crate::liouville::Matrix::zeros((dim, dim));
        for jump in JumpOp::bare_channels(&cr) {
            let a = jump.matrix(&layout);
            let a_dressed = u.dot(&a).dot(&ud);
            for (op, sign) in [(&a_dressed, 1.0), (&a, -1.0)] {
                let opd = dagger(op);
                let oo = opd.dot(op);
                let d = op.dot(&probe).dot(&opd)
                    - (oo.dot(&probe) + probe.dot(&oo)).mapv(|v| v * 0.5);
                exact.zip_mut_with(&d, |e, &v| *e += v * sign);
            }
        }
        let l1 = dressed_correction(&cr, &layout).apply(&probe);
        let res_d = max_abs(&(&exact - &l1)) / cr.gamma2;

        if res_h <= 0.0 || res_d <= 0.0 {
            return Err(Error::InvalidState("vanishing residual in scaling study".into()));
        }
        log_l.push(lam2.ln());
        log_h.push(res_h.ln());
        log_d.push(res_d.ln());
    }
    Ok((regression_slope(&log_l, &log_h), regression_slope(&log_l, &log_d)))
}

fn regression_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Click probability of a decoupled junction (no photon exchange): pure
/// ground-state tunneling. Used by the g̃ → 0 limit check.
pub fn decoupled_click_probability(gamma0: f64, t: f64) -> f64 {
    1.0 - (-gamma0 * t).exp()
}
