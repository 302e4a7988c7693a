//! Trajectory integration of the master equation.

use super::{C64, HilbertLayout, JointState, Matrix, M_LEVEL};
use super::lindblad::Superoperator;
use crate::error::Result;
use crate::ode::{self, OdeOptions};

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
    /// Population threshold on the top Fock state above which the run is
    /// flagged as truncation-limited.
    pub edge_tolerance: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        EvolveOptions {
            rtol: 1e-8,
            atol: 1e-12,
            max_steps: 50_000_000,
            edge_tolerance: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub layout: HilbertLayout,
    pub times: Vec<f64>,
    pub states: Vec<JointState>,
    /// True if any sampled state put more than `edge_tolerance` population
    /// into the highest Fock state; results are then truncation-limited.
    pub edge_flagged: bool,
}

impl Trajectory {
    pub fn click_probabilities(&self) -> Vec<f64> {
        self.states
            .iter()
            .map(|s| click_probability(&self.layout, s))
            .collect()
    }
}

fn pack(rho: &Matrix, y: &mut [f64]) {
    for (k, v) in rho.iter().enumerate() {
        y[2 * k] = v.re;
        y[2 * k + 1] = v.im;
    }
}

fn unpack(y: &[f64], rho: &mut Matrix) {
    for (k, v) in rho.iter_mut().enumerate() {
        *v = C64::new(y[2 * k], y[2 * k + 1]);
    }
}

/// Integrate ρ̇ = Lρ from `state.time` across the sorted sample grid
/// (absolute times, seconds). Hermiticity is re-imposed after every
/// accepted step: ρ ← (ρ + ρ†)/2.
pub fn evolve(
    state: &JointState,
    liouvillian: &Superoperator,
    t_samples: &[f64],
    opts: &EvolveOptions,
) -> Result<Trajectory> {
    state.validate()?;
    let layout = liouvillian.layout;
    let d = layout.dim();
    let n = 2 * d * d;
    let mut y0 = vec![0.0; n];
    pack(&state.rho, &mut y0);

    let mut rho_buf = Matrix::zeros((d, d));
    let mut drho_buf = Matrix::zeros((d, d));
    let rhs = |_t: f64, y: &[f64], dy: &mut [f64]| {
        unpack(y, &mut rho_buf);
        drho_buf.fill(C64::new(0.0, 0.0));
        liouvillian.apply_into(&rho_buf, &mut drho_buf);
        for (k, v) in drho_buf.iter().enumerate() {
            dy[2 * k] = v.re;
            dy[2 * k + 1] = v.im;
        }
    };
    let resym = |y: &mut [f64]| {
        for i in 0..d {
            for j in (i + 1)..d {
                let ij = 2 * (i * d + j);
                let ji = 2 * (j * d + i);
                let re = 0.5 * (y[ij] + y[ji]);
                let im = 0.5 * (y[ij + 1] - y[ji + 1]);
                y[ij] = re;
                y[ij + 1] = im;
                y[ji] = re;
                y[ji + 1] = -im;
            }
            y[2 * (i * d + i) + 1] = 0.0;
        }
    };

    let ode_opts = OdeOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        max_steps: opts.max_steps,
    };
    let raw = ode::integrate(rhs, state.time, &y0, t_samples, &ode_opts, resym)?;

    let mut states = Vec::with_capacity(raw.len());
    let mut edge_flagged = false;
    for (y, &t) in raw.iter().zip(t_samples) {
        let mut rho = Matrix::zeros((d, d));
        unpack(y, &mut rho);
        for jpm in 0..super::JPM_LEVELS {
            let idx = layout.index(jpm, layout.n_fock - 1);
            if rho[(idx, idx)].re > opts.edge_tolerance {
                edge_flagged = true;
            }
        }
        states.push(JointState { rho, time: t });
    }
    Ok(Trajectory {
        layout,
        times: t_samples.to_vec(),
        states,
        edge_flagged,
    })
}

/// Total tunneled ("click") probability: Σ_N ρ_{(m,N),(m,N)}, clamped to
/// [0, 1] against numerical slack.
pub fn click_probability(layout: &HilbertLayout, state: &JointState) -> f64 {
    let p: f64 = (0..layout.n_fock)
        .map(|n| {
            let i = layout.index(M_LEVEL, n);
            state.rho[(i, i)].re
        })
        .sum();
    p.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use super::super::lindblad::{build_lindbladian, JumpOp};
    use super::super::operators::build_hamiltonian_rotating;
    use crate::circuit::{derive_couplings, derive_levels, CouplingRates, DeviceConfig};

    const TWO_PI: f64 = std::f64::consts::TAU;

    fn table1_couplings() -> (f64, CouplingRates) {
        let cfg = DeviceConfig::table1();
        let levels = derive_levels(&cfg).unwrap();
        let cr = derive_couplings(&levels, &cfg)
            .unwrap()
            .with_tunneling(TWO_PI * 37.0, TWO_PI * 54e3, TWO_PI * 41e6);
        (levels.delta, cr)
    }

    #[test]
    fn zero_time_returns_input() {
        let layout = HilbertLayout::new(4).unwrap();
        let (delta, cr) = table1_couplings();
        let h = build_hamiltonian_rotating(&layout, delta, &cr);
        let lv = build_lindbladian(&cr, &layout, h);
        let s = JointState::pure(&layout, 0, 2);
        let traj = evolve(&s, &lv, &[0.0], &EvolveOptions::default()).unwrap();
        let diff: f64 = (&traj.states[0].rho - &s.rho)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        assert_eq!(diff, 0.0);
    }

    #[test]
    fn click_probability_of_fresh_state_is_zero() {
        let layout = HilbertLayout::new(4).unwrap();
        let s = JointState::pure(&layout, 0, 0);
        assert_eq!(click_probability(&layout, &s), 0.0);
        let tunneled = JointState::pure(&layout, M_LEVEL, 0);
        assert_eq!(click_probability(&layout, &tunneled), 1.0);
    }

    #[test]
    fn vacuum_false_count_is_exponential() {
        let layout = HilbertLayout::new(3).unwrap();
        let gamma0 = TWO_PI * 3.0e4;
        let lv = Superoperator {
            layout,
            hamiltonian: None,
            jumps: vec![JumpOp { rate: gamma0, from: 0, to: M_LEVEL }],
            dressed: None,
        };
        let s = JointState::pure(&layout, 0, 0);
        let t = 1.0 / gamma0;
        let traj = evolve(&s, &lv, &[0.5 * t, t], &EvolveOptions::default()).unwrap();
        let p = traj.click_probabilities();
        assert!((p[0] - (1.0 - (-0.5f64).exp())).abs() < 1e-6);
        assert!((p[1] - (1.0 - (-1.0f64).exp())).abs() < 1e-6);
    }

    #[test]
    fn excited_level_decays_at_total_width() {
        let layout = HilbertLayout::new(3).unwrap();
        let (_, cr) = table1_couplings();
        // Dissipation only: the coherent exchange with the resonator would
        // otherwise mix in Rabi dynamics.
        let lv = Superoperator {
            layout,
            hamiltonian: None,
            jumps: JumpOp::bare_channels(&cr),
            dressed: None,
        };
        let s = JointState::pure(&layout, 1, 0);
        let width = cr.gamma_tilde1();
        let t = 1.0 / width;
        let traj = evolve(&s, &lv, &[t], &EvolveOptions::default()).unwrap();
        let i = layout.index(1, 0);
        let pop = traj.states[0].rho[(i, i)].re;
        assert!(
            ((pop.ln() + 1.0) / 1.0).abs() < 1e-6,
            "population {pop} vs e^-1"
        );
    }

    #[test]
    fn trace_and_positivity_hold_along_trajectory() {
        let layout = HilbertLayout::new(6).unwrap();
        let (delta, cr) = table1_couplings();
        let h = build_hamiltonian_rotating(&layout, delta, &cr);
        let lv = build_lindbladian(&cr, &layout, h);
        let s = JointState::pure(&layout, 0, 2);
        let t_end = 2.0 / cr.gamma_tilde2();
        let grid: Vec<f64> = (1..=8).map(|k| t_end * k as f64 / 8.0).collect();
        let traj = evolve(&s, &lv, &grid, &EvolveOptions::default()).unwrap();
        for st in &traj.states {
            st.validate().unwrap();
            assert!((st.trace().re - 1.0).abs() < 1e-7);
        }
        // Click probability is monotone for a decaying ladder.
        let p = traj.click_probabilities();
        for w in p.windows(2) {
            assert!(w[1] >= w[0] - 1e-10);
        }
    }
}
