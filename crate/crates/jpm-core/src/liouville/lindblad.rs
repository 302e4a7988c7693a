//! Bare Lindbladian on the joint space and the first-order dressed
//! correction induced by the one-photon elimination.

use ndarray::s;

use super::{C64, HilbertLayout, Matrix, JPM_LEVELS, M_LEVEL};
use crate::circuit::CouplingRates;

/// Dissipation channel √rate |to⟩⟨from| ⊗ I_fock. Diagonal channels
/// (from == to) are pure dephasing.
#[derive(Debug, Clone, Copy)]
pub struct JumpOp {
    pub rate: f64,
    pub from: usize,
    pub to: usize,
}

impl JumpOp {
    /// The seven junction channels: tunneling out of each level, relaxation
    /// down the ladder, and dephasing of |1⟩ and |2⟩.
    pub fn bare_channels(cr: &CouplingRates) -> Vec<JumpOp> {
        vec![
            JumpOp { rate: cr.gamma0, from: 0, to: M_LEVEL },
            JumpOp { rate: cr.gamma10, from: 1, to: 0 },
            JumpOp { rate: cr.gamma11, from: 1, to: 1 },
            JumpOp { rate: cr.gamma1, from: 1, to: M_LEVEL },
            JumpOp { rate: cr.gamma21, from: 2, to: 1 },
            JumpOp { rate: cr.gamma22, from: 2, to: 2 },
            JumpOp { rate: cr.gamma2, from: 2, to: M_LEVEL },
        ]
    }

    /// Dense matrix form (mostly for oracle tests).
    pub fn matrix(&self, layout: &HilbertLayout) -> Matrix {
        let mut m = Matrix::zeros((layout.dim(), layout.dim()));
        let s = C64::new(self.rate.sqrt(), 0.0);
        for n in 0..layout.n_fock {
            m[(layout.index(self.to, n), layout.index(self.from, n))] = s;
        }
        m
    }

    /// D[A]ρ = AρA† − ½{A†A, ρ} added into `drho`. Because every channel is
    /// a junction operator tensored with the identity, this is pure block
    /// bookkeeping: a copy of the (from, from) block and a scaling of the
    /// `from` row and column of blocks. O(dim²), no matrix products.
    pub fn apply(&self, layout: &HilbertLayout, rho: &Matrix, drho: &mut Matrix) {
        let nf = layout.n_fock;
        let g = self.rate;
        // Gain: ρ_{to,to} += γ ρ_{from,from}.
        for r in 0..nf {
            for c in 0..nf {
                let v = rho[(self.from * nf + r, self.from * nf + c)];
                drho[(self.to * nf + r, self.to * nf + c)] += v * g;
            }
        }
        // Loss: −(γ/2){P_from, ρ} scales the `from` block-row and block-column.
        for j in 0..JPM_LEVELS {
            for r in 0..nf {
                for c in 0..nf {
                    let v = rho[(self.from * nf + r, j * nf + c)];
                    drho[(self.from * nf + r, j * nf + c)] -= v * (0.5 * g);
                    let v = rho[(j * nf + r, self.from * nf + c)];
                    drho[(j * nf + r, self.from * nf + c)] -= v * (0.5 * g);
                }
            }
        }
    }
}

/// Linear map on density matrices: −i[H, ·] + Σ_k D[A_k] + optional L⁽¹⁾.
#[derive(Debug, Clone)]
pub struct Superoperator {
    pub layout: HilbertLayout,
    pub hamiltonian: Option<Matrix>,
    pub jumps: Vec<JumpOp>,
    pub dressed: Option<DressedCorrection>,
}

impl Superoperator {
    pub fn apply(&self, rho: &Matrix) -> Matrix {
        let mut drho = Matrix::zeros(rho.raw_dim());
        self.apply_into(rho, &mut drho);
        drho
    }

    pub fn apply_into(&self, rho: &Matrix, drho: &mut Matrix) {
        if let Some(h) = &self.hamiltonian {
            let comm = h.dot(rho) - rho.dot(h);
            let mi = C64::new(0.0, -1.0);
            drho.zip_mut_with(&comm, |d, &c| *d += mi * c);
        }
        for jump in &self.jumps {
            jump.apply(&self.layout, rho, drho);
        }
        if let Some(d) = &self.dressed {
            d.apply_into(&self.layout, rho, drho);
        }
    }

    /// Dense (dim², dim²) matrix of the map in the column-stacking basis,
    /// column k = vec(L E_k) for basis matrices E_k = |i⟩⟨j|.
    pub fn materialize(&self) -> Matrix {
        let d = self.layout.dim();
        let mut out = Matrix::zeros((d * d, d * d));
        let mut basis = Matrix::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                basis[(i, j)] = C64::new(1.0, 0.0);
                let image = self.apply(&basis);
                basis[(i, j)] = C64::new(0.0, 0.0);
                let col = i * d + j;
                for r in 0..d {
                    for c in 0..d {
                        out[(r * d + c, col)] = image[(r, c)];
                    }
                }
            }
        }
        out
    }
}

/// Assemble the bare Lindbladian with the seven junction channels around a
/// given Hamiltonian (rad/s).
pub fn build_lindbladian(
    cr: &CouplingRates,
    layout: &HilbertLayout,
    hamiltonian: Matrix,
) -> Superoperator {
    Superoperator {
        layout: *layout,
        hamiltonian: Some(hamiltonian),
        jumps: JumpOp::bare_channels(cr),
        dressed: None,
    }
}

/// Which side of a ρ block a ladder operator multiplies.
#[derive(Debug, Clone, Copy)]
enum FockMul {
    LeftA,
    LeftADag,
    RightA,
    RightADag,
}

/// First-order correction L⁽¹⁾ to the dissipators from dressing the jump
/// operators with the one-photon elimination. Stored as per-block term
/// lists (coefficient, ladder action, source block).
#[derive(Debug, Clone)]
pub struct DressedCorrection {
    lambda1: f64,
    lambda2: f64,
    rates: CouplingRates,
}

/// Build L⁽¹⁾ as a standalone superoperator (no Hamiltonian, no bare
/// dissipators); compose with `build_lindbladian` output by pushing it into
/// the `dressed` slot or applying both.
pub fn dressed_correction(cr: &CouplingRates, layout: &HilbertLayout) -> Superoperator {
    Superoperator {
        layout: *layout,
        hamiltonian: None,
        jumps: Vec::new(),
        dressed: Some(DressedCorrection::new(cr)),
    }
}

impl DressedCorrection {
    pub fn new(cr: &CouplingRates) -> Self {
        DressedCorrection {
            lambda1: cr.lambda1,
            lambda2: cr.lambda2,
            rates: cr.clone(),
        }
    }

    /// Term table: for each target junction block (i, j), the coefficient,
    /// ladder action, and source block. Diagonal targets are completed with
    /// the conjugate transpose; off-diagonal targets fix the mirror block
    /// (j, i) by Hermiticity.
    fn terms(&self) -> Vec<(usize, usize, Vec<(f64, FockMul, usize, usize)>)> {
        let l1 = self.lambda1;
        let l2 = self.lambda2;
        let r = &self.rates;
        let (g0, g1, g2) = (r.gamma0, r.gamma1, r.gamma2);
        let (t10, t21, t11, t22) = (r.gamma10, r.gamma21, r.gamma11, r.gamma22);
        let m = M_LEVEL;
        use FockMul::{LeftA, LeftADag, RightA, RightADag};
        vec![
            (0, 0, vec![
                (l2 * t10, LeftADag, 2, 1),
                (-0.5 * l1 * (g1 - g0 + t11 + t10), LeftADag, 1, 0),
                (l1 * t10, LeftA, 0, 1),
            ]),
            (1, 1, vec![
                (0.5 * l2 * (g2 - g1 + t22 + t21 + t11 - t10), LeftADag, 2, 1),
                (-l2 * t21, LeftA, 1, 2),
                (0.5 * l1 * (-g1 + g0 + t11 - t10), LeftA, 0, 1),
            ]),
            (2, 2, vec![
                (0.5 * l2 * (g2 - g1 - t22 + t21 - t11 - t10), LeftA, 1, 2),
            ]),
            (m, m, vec![
                (l2 * g1, LeftADag, 2, 1),
                (-l1 * g0, LeftADag, 1, 0),
                (-l2 * g2, LeftA, 1, 2),
                (l1 * g1, LeftA, 0, 1),
            ]),
            (0, 1, vec![
                (l1 * t21, LeftADag, 2, 2),
                (-0.5 * l1 * (g1 - g0 - t11 + t10), LeftADag, 1, 1),
                (-l1 * t10, RightADag, 1, 1),
                (0.5 * l1 * (-g1 + g0 - t11 - t10), RightADag, 0, 0),
                (0.5 * l2 * (g2 - g1 + t22 + t21 - t11 - t10), RightA, 0, 2),
            ]),
            (1, 2, vec![
                (0.5 * l2 * (g2 - g1 - t22 + t21 - t11 - t10), LeftADag, 2, 2),
                (-0.5 * l1 * (g1 - g0 + t11 + t10), LeftA, 0, 2),
                (l2 * t21, RightADag, 2, 2),
                (0.5 * l2 * (g2 - g1 + t22 + t21 + t11 - t10), RightADag, 1, 1),
            ]),
            (0, 2, vec![
                (0.5 * l2 * (g2 - g1 + t22 + t21 - t11 - t10), RightADag, 0, 1),
                (-0.5 * l1 * (g1 - g0 + t11 + t10), LeftADag, 1, 2),
            ]),
            (m, 0, vec![
                (0.5 * l1 * (-g1 + g0 - t11 - t10), RightA, m, 1),
            ]),
            (m, 1, vec![
                (0.5 * l2 * (g2 - g1 + t22 + t21 - t11 - t10), RightA, m, 2),
                (-0.5 * l1 * (g1 - g0 + t11 + t10), RightADag, m, 0),
            ]),
            (m, 2, vec![
                (0.5 * l2 * (g2 - g1 + t22 + t21 - t11 - t10), RightADag, m, 1),
            ]),
        ]
    }

    pub fn apply_into(&self, layout: &HilbertLayout, rho: &Matrix, drho: &mut Matrix) {
        if self.lambda1 == 0.0 && self.lambda2 == 0.0 {
            return;
        }
        let nf = layout.n_fock;
        for (ti, tj, terms) in self.terms() {
            let mut block = Matrix::zeros((nf, nf));
            for (coef, op, si, sj) in terms {
                if coef == 0.0 {
                    continue;
                }
                let src = rho.slice(s![si * nf..(si + 1) * nf, sj * nf..(sj + 1) * nf]);
                for rr in 0..nf {
                    for cc in 0..nf {
                        let v = match op {
                            FockMul::LeftADag => {
                                // (a†X)[r,c] = √r X[r−1,c]
                                if rr == 0 { continue; } else { src[(rr - 1, cc)] * (rr as f64).sqrt() }
                            }
                            FockMul::LeftA => {
                                // (aX)[r,c] = √(r+1) X[r+1,c]
                                if rr + 1 >= nf { continue; } else { src[(rr + 1, cc)] * ((rr + 1) as f64).sqrt() }
                            }
                            FockMul::RightA => {
                                // (Xa)[r,c] = √c X[r,c−1]
                                if cc == 0 { continue; } else { src[(rr, cc - 1)] * (cc as f64).sqrt() }
                            }
                            FockMul::RightADag => {
                                // (Xa†)[r,c] = √(c+1) X[r,c+1]
                                if cc + 1 >= nf { continue; } else { src[(rr, cc + 1)] * ((cc + 1) as f64).sqrt() }
                            }
                        };
                        block[(rr, cc)] += v * coef;
                    }
                }
            }
            if ti == tj {
                // Stated expression plus its conjugate transpose.
                for rr in 0..nf {
                    for cc in 0..nf {
                        drho[(ti * nf + rr, ti * nf + cc)] +=
                            block[(rr, cc)] + block[(cc, rr)].conj();
                    }
                }
            } else {
                // Written block as is; mirror block from Hermiticity.
                for rr in 0..nf {
                    for cc in 0..nf {
                        drho[(ti * nf + rr, tj * nf + cc)] += block[(rr, cc)];
                        drho[(tj * nf + cc, ti * nf + rr)] += block[(rr, cc)].conj();
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{derive_couplings, derive_levels, DeviceConfig};
    use crate::liouville::operators::{
        build_hamiltonian_rotating, schrieffer_wolff_unitary,
    };
    use crate::liouville::{dagger, max_abs};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn table1_couplings() -> (f64, CouplingRates) {
        let cfg = DeviceConfig::table1();
        let levels = derive_levels(&cfg).unwrap();
        let mut cr = derive_couplings(&levels, &cfg).unwrap();
        // Representative tunneling rates so all seven channels are active.
        cr = cr.with_tunneling(
            2.0 * std::f64::consts::PI * 37.0,
            2.0 * std::f64::consts::PI * 54e3,
            2.0 * std::f64::consts::PI * 41e6,
        );
        (levels.delta, cr)
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, d: usize) -> Matrix {
        let mut m = Matrix::zeros((d, d));
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let h = &m + &dagger(&m);
        h.mapv(|v| v * 0.5)
    }

    #[test]
    fn bare_lindbladian_is_traceless_on_random_inputs() {
        let layout = HilbertLayout::new(5).unwrap();
        let (delta, cr) = table1_couplings();
        let h = build_hamiltonian_rotating(&layout, delta, &cr);
        let lv = build_lindbladian(&cr, &layout, h);
        let scale = cr.gamma2.max(cr.g2);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let rho = random_hermitian(&mut rng, layout.dim());
            let drho = lv.apply(&rho);
            let tr: C64 = drho.diag().sum();
            assert!(tr.norm() < 1e-10 * scale, "trace leak {:.3e}", tr.norm());
        }
    }

    #[test]
    fn materialized_map_has_vanishing_trace_rows() {
        let layout = HilbertLayout::new(3).unwrap();
        let (delta, cr) = table1_couplings();
        let h = build_hamiltonian_rotating(&layout, delta, &cr);
        let lv = build_lindbladian(&cr, &layout, h);
        let m = lv.materialize();
        let d = layout.dim();
        let scale = cr.gamma2.max(cr.g2);
        // Trace preservation: the diagonal rows of each column sum to zero.
        for col in 0..d * d {
            let s: C64 = (0..d).map(|k| m[(k * d + k, col)]).sum();
            assert!(s.norm() < 1e-10 * scale);
        }
    }

    #[test]
    fn dissipator_block_apply_matches_dense_form() {
        let layout = HilbertLayout::new(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rho = random_hermitian(&mut rng, layout.dim());
        for jump in [
            JumpOp { rate: 3.0, from: 1, to: 0 },
            JumpOp { rate: 0.7, from: 2, to: 2 },
            JumpOp { rate: 1.9, from: 0, to: M_LEVEL },
        ] {
            let mut fast = Matrix::zeros(rho.raw_dim());
            jump.apply(&layout, &rho, &mut fast);
            let a = jump.matrix(&layout);
            let ad = dagger(&a);
            let ada = ad.dot(&a);
            let dense = a.dot(&rho).dot(&ad)
                - (ada.dot(&rho) + rho.dot(&ada)).mapv(|v| v * 0.5);
            assert!(max_abs(&(&fast - &dense)) < 1e-12 * jump.rate);
        }
    }

    #[test]
    fn dressed_correction_vanishes_without_coupling() {
        let layout = HilbertLayout::new(5).unwrap();
        let (_, mut cr) = table1_couplings();
        cr.lambda1 = 0.0;
        cr.lambda2 = 0.0;
        let l1 = dressed_correction(&cr, &layout);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_hermitian(&mut rng, layout.dim());
        assert_eq!(max_abs(&l1.apply(&rho)), 0.0);
    }

    #[test]
    fn dressed_correction_preserves_hermiticity() {
        let layout = HilbertLayout::new(5).unwrap();
        let (delta, cr) = table1_couplings();
        let h = build_hamiltonian_rotating(&layout, delta, &cr);
        let mut lv = build_lindbladian(&cr, &layout, h);
        lv.dressed = Some(DressedCorrection::new(&cr));
        let scale = cr.gamma2;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..100 {
            let rho = random_hermitian(&mut rng, layout.dim());
            let drho = lv.apply(&rho);
            let herm = max_abs(&(&drho - &dagger(&drho)));
            assert!(herm < 1e-9 * scale, "Hermiticity leak {herm:.3e}");
        }
    }

    /// Independent oracle: dress each bare jump operator with the full
    /// unitary and take the dissipator difference; L⁽¹⁾ must match this to
    /// second order in λ.
    #[test]
    fn dressed_correction_matches_transform_oracle_quadratically() {
        let layout = HilbertLayout::new(6).unwrap();
        let (_, cr0) = table1_couplings();
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let rho = random_hermitian(&mut rng, layout.dim());

        let mut residuals = Vec::new();
        let scales = [0.25, 0.5, 1.0];
        for s in scales {
            let mut cr = cr0.clone();
            cr.lambda1 *= s;
            cr.lambda2 *= s;
            let u = schrieffer_wolff_unitary(&layout, cr.lambda1, cr.lambda2);
            let ud = dagger(&u);

            let mut exact = Matrix::zeros(rho.raw_dim());
            for jump in JumpOp::bare_channels(&cr) {
                let a = jump.matrix(&layout);
                let ad_op = u.dot(&a).dot(&ud);
                for (op, sign) in [(&ad_op, 1.0), (&a, -1.0)] {
                    let opd = dagger(op);
                    let oo = opd.dot(op);
                    let d = op.dot(&rho).dot(&opd)
                        - (oo.dot(&rho) + rho.dot(&oo)).mapv(|v| v * 0.5);
                    exact.zip_mut_with(&d, |e, &v| *e += v * sign);
                }
            }
            let l1 = dressed_correction(&cr, &layout).apply(&rho);
            residuals.push(max_abs(&(&exact - &l1)));
        }
        let slope = (residuals[2] / residuals[0]).ln() / (scales[2] / scales[0]).ln();
        assert!((slope - 2.0).abs() < 0.2, "slope {slope}, residuals {residuals:?}");
    }
}
