//! Closed-form algebra for linear rate chains: sums of c·tᵏ·e^{−rt} are
//! closed under the convolution with an exponential propagator, which is all
//! the Laplace-domain inversion of a feed-forward rate network needs.

/// One term c·tᵏ·e^{−rt}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Term {
    pub c: f64,
    pub k: u32,
    pub r: f64,
}

/// Sum of exponential-polynomial terms.
#[derive(Debug, Clone, Default)]
pub struct ExpPoly {
    pub terms: Vec<Term>,
}

/// Two decay rates are treated as degenerate below this relative separation;
/// the convolution then takes the confluent (tᵏ⁺¹) branch instead of
/// dividing by a vanishing rate gap.
const DEGENERACY_TOL: f64 = 1e-12;

impl ExpPoly {
    pub fn zero() -> Self {
        ExpPoly { terms: Vec::new() }
    }

    /// A single exponential c·e^{−rt}.
    pub fn exponential(c: f64, r: f64) -> Self {
        ExpPoly { terms: vec![Term { c, k: 0, r }] }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.c * t.powi(term.k as i32) * (-term.r * t).exp())
            .sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        ExpPoly {
            terms: self.terms.iter().map(|t| Term { c: t.c * s, ..*t }).collect(),
        }
    }

    pub fn add_assign(&mut self, other: &ExpPoly) {
        for t in &other.terms {
            self.push(*t);
        }
    }

    fn push(&mut self, term: Term) {
        if term.c == 0.0 {
            return;
        }
        // Merge with an existing term of identical power and rate.
        for existing in &mut self.terms {
            if existing.k == term.k && existing.r == term.r {
                existing.c += term.c;
                return;
            }
        }
        self.terms.push(term);
    }

    /// Solve ẋ = −r_out·x + inflow(t), x(0) = x0, where `self` is the
    /// inflow. Each inflow term convolves against e^{−r_out(t−s)}:
    ///
    ///   ∫₀ᵗ e^{−r_out(t−s)} sᵏ e^{−a s} ds
    ///     = Σ_{j=0..k} (−1)ʲ k!/(k−j)! · t^{k−j}/b^{j+1} · e^{−at}
    ///       − (−1)ᵏ k!/b^{k+1} · e^{−r_out t},      b = r_out − a,
    ///
    /// falling back to tᵏ⁺¹/(k+1)·e^{−r_out t} when b ≈ 0.
    pub fn propagate(&self, r_out: f64, x0: f64) -> ExpPoly {
        let mut out = ExpPoly::zero();
        out.push(Term { c: x0, k: 0, r: r_out });
        for term in &self.terms {
            let b = r_out - term.r;
            let scale = r_out.abs().max(term.r.abs()).max(1.0);
            if b.abs() < DEGENERACY_TOL * scale {
                out.push(Term {
                    c: term.c / (term.k + 1) as f64,
                    k: term.k + 1,
                    r: r_out,
                });
                continue;
            }
            let mut fall = 1.0; // k!/(k−j)! accumulated
            let mut sign = 1.0;
            let mut bpow = b;
            for j in 0..=term.k {
                out.push(Term {
                    c: term.c * sign * fall / bpow,
                    k: term.k - j,
                    r: term.r,
                });
                sign = -sign;
                if j < term.k {
                    fall *= (term.k - j) as f64;
                    bpow *= b;
                }
            }
            // fall now holds k!, bpow holds b^{k+1}, sign = (−1)^{k+1}.
            out.push(Term {
                c: term.c * sign * fall / bpow,
                k: 0,
                r: r_out,
            });
        }
        out
    }

    /// Running integral ∫₀ᵗ self(s) ds (a propagator with no outflow).
    pub fn integral(&self) -> ExpPoly {
        let mut out = self.propagate(0.0, 0.0);
        // Drop the spurious zero-amplitude initial term if present.
        out.terms.retain(|t| t.c != 0.0);
        out
    }
}
