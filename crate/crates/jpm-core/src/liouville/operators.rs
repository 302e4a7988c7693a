//! Operator builders on the joint (junction ⊗ resonator) space.

use super::{dagger, C64, HilbertLayout, Matrix, JPM_LEVELS};
use crate::circuit::CouplingRates;

/// Resonator annihilation operator restricted to the Fock factor.
pub fn fock_annihilation(n_fock: usize) -> Matrix {
    let mut a = Matrix::zeros((n_fock, n_fock));
    for n in 1..n_fock {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// Full-space annihilation operator: I_jpm ⊗ a.
pub fn annihilation(layout: &HilbertLayout) -> Matrix {
    let mut out = Matrix::zeros((layout.dim(), layout.dim()));
    let a = fock_annihilation(layout.n_fock);
    for j in 0..JPM_LEVELS {
        place_block(&mut out, layout, j, j, &a, C64::new(1.0, 0.0));
    }
    out
}

/// Full-space projector |i⟩⟨j|_jpm ⊗ I_fock.
pub fn jpm_projector(layout: &HilbertLayout, i: usize, j: usize) -> Matrix {
    let eye = Matrix::eye(layout.n_fock);
    embed(layout, i, j, &eye)
}

/// |i⟩⟨j|_jpm ⊗ fock_op as a full-space matrix.
pub fn embed(layout: &HilbertLayout, i: usize, j: usize, fock_op: &Matrix) -> Matrix {
    let mut out = Matrix::zeros((layout.dim(), layout.dim()));
    place_block(&mut out, layout, i, j, fock_op, C64::new(1.0, 0.0));
    out
}

/// out[block (i,j)] += scale * fock_op.
fn place_block(
    out: &mut Matrix,
    layout: &HilbertLayout,
    i: usize,
    j: usize,
    fock_op: &Matrix,
    scale: C64,
) {
    let nf = layout.n_fock;
    for r in 0..nf {
        for c in 0..nf {
            let v = fock_op[(r, c)];
            if v != C64::new(0.0, 0.0) {
                out[(i * nf + r, j * nf + c)] += scale * v;
            }
        }
    }
}

fn add_hc(m: &Matrix) -> Matrix {
    m + &dagger(m)
}

/// Working-frame Hamiltonian (units of rad/s, ħ = 1):
/// Δ|1⟩⟨1| + g₁(|1⟩⟨0|a + h.c.) + g₂(|2⟩⟨1|a + h.c.).
pub fn build_hamiltonian_rotating(
    layout: &HilbertLayout,
    delta: f64,
    cr: &CouplingRates,
) -> Matrix {
    let a = fock_annihilation(layout.n_fock);
    let mut h = Matrix::zeros((layout.dim(), layout.dim()));
    place_block(&mut h, layout, 1, 1, &Matrix::eye(layout.n_fock), C64::new(delta, 0.0));
    let mut v = Matrix::zeros((layout.dim(), layout.dim()));
    place_block(&mut v, layout, 1, 0, &a, C64::new(cr.g1, 0.0));
    place_block(&mut v, layout, 2, 1, &a, C64::new(cr.g2, 0.0));
    h + add_hc(&v)
}

/// Second-order effective Hamiltonian after eliminating the one-photon
/// couplings: (Δ+χ₁)|1⟩⟨1| − χ₂|2⟩⟨2| + g̃(|2⟩⟨0|a² + h.c.)
/// + (χ₁σᶻ₀₁ − χ₂σᶻ₁₂)a†a.
pub fn build_effective_hamiltonian(
    layout: &HilbertLayout,
    delta: f64,
    cr: &CouplingRates,
) -> Matrix {
    let nf = layout.n_fock;
    let a = fock_annihilation(nf);
    let a2 = a.dot(&a);
    let mut num = Matrix::zeros((nf, nf));
    for n in 0..nf {
        num[(n, n)] = C64::new(n as f64, 0.0);
    }

    let mut h = Matrix::zeros((layout.dim(), layout.dim()));
    let eye = Matrix::eye(nf);
    place_block(&mut h, layout, 1, 1, &eye, C64::new(delta + cr.chi1, 0.0));
    place_block(&mut h, layout, 2, 2, &eye, C64::new(-cr.chi2, 0.0));
    // Dispersive shifts: σᶻ₀₁ = |1⟩⟨1| − |0⟩⟨0|, σᶻ₁₂ = |2⟩⟨2| − |1⟩⟨1|.
    place_block(&mut h, layout, 0, 0, &num, C64::new(-cr.chi1, 0.0));
    place_block(&mut h, layout, 1, 1, &num, C64::new(cr.chi1 + cr.chi2, 0.0));
    place_block(&mut h, layout, 2, 2, &num, C64::new(-cr.chi2, 0.0));
    let mut v = Matrix::zeros((layout.dim(), layout.dim()));
    place_block(&mut v, layout, 2, 0, &a2, C64::new(cr.g_tilde, 0.0));
    h + add_hc(&v)
}

/// Anti-Hermitian generator of the dressing transformation:
/// G = −λ₁|1⟩⟨0|a + λ₂|2⟩⟨1|a − h.c.
pub fn schrieffer_wolff_generator(layout: &HilbertLayout, lambda1: f64, lambda2: f64) -> Matrix {
    let a = fock_annihilation(layout.n_fock);
    let mut g = Matrix::zeros((layout.dim(), layout.dim()));
    place_block(&mut g, layout, 1, 0, &a, C64::new(-lambda1, 0.0));
    place_block(&mut g, layout, 2, 1, &a, C64::new(lambda2, 0.0));
    &g - &dagger(&g)
}

/// U = exp(G); the Hamiltonian dresses as U†HU, jump operators as UAU†.
pub fn schrieffer_wolff_unitary(layout: &HilbertLayout, lambda1: f64, lambda2: f64) -> Matrix {
    expm(&schrieffer_wolff_generator(layout, lambda1, lambda2))
}

/// Dispersive-shift operator of the interaction frame,
/// r = χ₁(N − 2σᶻ₀₁) − χ₂(1 + N − 2σᶻ₁₂), diagonal in the product basis,
/// together with its junction-ground-state restriction
/// r₀(N) = χ₁(N + 2) − χ₂(1 + N) on the resonator alone.
pub fn interaction_frame_generator(layout: &HilbertLayout, cr: &CouplingRates) -> (Matrix, Vec<f64>) {
    let nf = layout.n_fock;
    let mut r = Matrix::zeros((layout.dim(), layout.dim()));
    for j in 0..JPM_LEVELS {
        // σᶻ₀₁ = |1⟩⟨1| − |0⟩⟨0|, σᶻ₁₂ = |2⟩⟨2| − |1⟩⟨1|; zero on |m⟩.
        let sz01 = match j {
            0 => -1.0,
            1 => 1.0,
            _ => 0.0,
        };
        let sz12 = match j {
            1 => -1.0,
            2 => 1.0,
            _ => 0.0,
        };
        for n in 0..nf {
            let nn = n as f64;
            let val = cr.chi1 * (nn - 2.0 * sz01) - cr.chi2 * (1.0 + nn - 2.0 * sz12);
            r[(layout.index(j, n), layout.index(j, n))] = C64::new(val, 0.0);
        }
    }
    let r0 = (0..nf)
        .map(|n| cr.chi1 * (n as f64 + 2.0) - cr.chi2 * (1.0 + n as f64))
        .collect();
    (r, r0)
}

/// Matrix exponential via scaling-and-squaring with a Taylor series.
pub fn expm(m: &Matrix) -> Matrix {
    let d = m.nrows();
    // Infinity norm sets the scaling power.
    let norm = (0..d)
        .map(|i| (0..d).map(|j| m[(i, j)].norm()).sum::<f64>())
        .fold(0.0f64, f64::max);
    let k = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scale = C64::new(0.5f64.powi(k as i32), 0.0);
    let ms = m.mapv(|v| v * scale);

    let mut result = Matrix::eye(d);
    let mut term = Matrix::eye(d);
    for n in 1..60 {
        term = term.dot(&ms).mapv(|v| v / n as f64);
        result = result + &term;
        let tnorm = term.iter().fold(0.0f64, |acc, v| acc.max(v.norm()));
        if tnorm < 1e-18 {
            break;
        }
    }
    for _ in 0..k {
        result = result.dot(&result);
    }
    result
}

/// Commutator [A, B].
pub fn commutator(a: &Matrix, b: &Matrix) -> Matrix {
    a.dot(b) - b.dot(a)
}
