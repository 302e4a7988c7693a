//! Joint density-matrix layer: Hilbert layout, Hamiltonians in the lab and
//! working frames, bare Lindbladian, first-order dressed correction, and
//! trajectory integration.

mod evolve;
mod lindblad;
mod operators;

pub use evolve::{click_probability, evolve, EvolveOptions, Trajectory};
pub use lindblad::{build_lindbladian, dressed_correction, DressedCorrection, JumpOp, Superoperator};
pub use operators::{
    annihilation, build_effective_hamiltonian, build_hamiltonian_rotating, commutator, embed,
    expm, fock_annihilation, interaction_frame_generator, jpm_projector,
    schrieffer_wolff_generator, schrieffer_wolff_unitary,
};

use ndarray::Array2;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type Matrix = Array2<C64>;

/// Number of retained junction states: |0⟩, |1⟩, |2⟩ and the absorber |m⟩.
pub const JPM_LEVELS: usize = 4;
/// Index of the absorber level.
pub const M_LEVEL: usize = 3;

/// Basis layout of the joint space. Ordering is (jpm, fock):
/// index = jpm·n_fock + fock.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HilbertLayout {
    pub n_fock: usize,
}

impl HilbertLayout {
    pub fn new(n_fock: usize) -> Result<Self> {
        if n_fock < 3 {
            return Err(Error::InvalidParameter {
                name: "n_fock",
                message: format!("need at least 3 Fock states for two-photon studies, got {n_fock}"),
            });
        }
        Ok(HilbertLayout { n_fock })
    }

    pub fn dim(&self) -> usize {
        JPM_LEVELS * self.n_fock
    }

    pub fn index(&self, jpm: usize, fock: usize) -> usize {
        debug_assert!(jpm < JPM_LEVELS && fock < self.n_fock);
        jpm * self.n_fock + fock
    }

    /// Human-readable basis label, e.g. `"1,N=2"` or `"m,N=0"`.
    pub fn label(&self, index: usize) -> String {
        let jpm = index / self.n_fock;
        let fock = index % self.n_fock;
        let j = match jpm {
            M_LEVEL => "m".to_string(),
            k => k.to_string(),
        };
        format!("{j},N={fock}")
    }
}

/// Joint density matrix on (resonator ⊗ junction).
#[derive(Debug, Clone)]
pub struct JointState {
    pub rho: Matrix,
    pub time: f64,
}

impl JointState {
    /// Pure basis state |jpm, fock⟩⟨jpm, fock|.
    pub fn pure(layout: &HilbertLayout, jpm: usize, fock: usize) -> Self {
        let d = layout.dim();
        let mut rho = Matrix::zeros((d, d));
        let i = layout.index(jpm, fock);
        rho[(i, i)] = C64::new(1.0, 0.0);
        JointState { rho, time: 0.0 }
    }

    pub fn trace(&self) -> C64 {
        self.rho.diag().sum()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let d = self.rho.nrows();
        let mut err: f64 = 0.0;
        for i in 0..d {
            for j in i..d {
                err = err.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        err
    }

    /// Smallest eigenvalue of the (Hermitian part of the) density matrix.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.rho)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        if self.hermiticity_error() > 1e-10 {
            return Err(Error::InvalidState(format!(
                "Hermiticity violation {:.3e}",
                self.hermiticity_error()
            )));
        }
        let tr = self.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::InvalidState(format!(
                "negative eigenvalue {min:.3e}"
            )));
        }
        Ok(())
    }
}

/// Eigenvalues of a Hermitian complex matrix via cyclic Jacobi sweeps on
/// the real symmetric embedding [[X, −Y], [Y, X]]; each eigenvalue of the
/// input appears twice in the embedding.
pub fn hermitian_eigenvalues(h: &Matrix) -> Vec<f64> {
    let d = h.nrows();
    let n = 2 * d;
    let mut a = vec![0.0f64; n * n];
    for i in 0..d {
        for j in 0..d {
            let v = h[(i, j)];
            a[i * n + j] = v.re;
            a[i * n + (d + j)] = -v.im;
            a[(d + i) * n + j] = v.im;
            a[(d + i) * n + (d + j)] = v.re;
        }
    }
    // Cyclic Jacobi.
    for _sweep in 0..60 {
        let mut off: f64 = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[p * n + q].abs());
            }
        }
        let scale = (0..n).map(|i| a[i * n + i].abs()).fold(1e-300, f64::max);
        if off < 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() < 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut evs: Vec<f64> = (0..n).map(|i| a[i * n + i]).collect();
    evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    // Keep one copy of each doubled eigenvalue.
    evs.into_iter().step_by(2).collect()
}

/// Conjugate-transpose of a complex matrix.
pub fn dagger(m: &Matrix) -> Matrix {
    let mut out = m.t().to_owned();
    out.mapv_inplace(|v| v.conj());
    out
}

/// Largest absolute entry.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0f64, |acc, v| acc.max(v.norm()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout_indexing_and_labels() {
        let l = HilbertLayout::new(6).unwrap();
        assert_eq!(l.dim(), 24);
        assert_eq!(l.index(0, 0), 0);
        assert_eq!(l.index(2, 3), 15);
        assert_eq!(l.label(l.index(M_LEVEL, 0)), "m,N=0");
        assert_eq!(l.label(l.index(1, 2)), "1,N=2");
        assert!(HilbertLayout::new(2).is_err());
    }

    #[test]
    fn pure_state_is_valid() {
        let l = HilbertLayout::new(6).unwrap();
        let s = JointState::pure(&l, 0, 2);
        s.validate().unwrap();
        assert!((s.min_eigenvalue()).abs() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_known_matrix() {
        let mut m = Matrix::zeros((2, 2));
        m[(0, 0)] = C64::new(1.0, 0.0);
        m[(1, 1)] = C64::new(3.0, 0.0);
        m[(0, 1)] = C64::new(0.0, 1.0);
        m[(1, 0)] = C64::new(0.0, -1.0);
        let ev = hermitian_eigenvalues(&m);
        // Exact: 2 ± √2.
        assert!((ev[0] - (2.0 - 2f64.sqrt())).abs() < 1e-10);
        assert!((ev[1] - (2.0 + 2f64.sqrt())).abs() < 1e-10);
    }
}
