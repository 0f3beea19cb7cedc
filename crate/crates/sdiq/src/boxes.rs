//! Behavior boxes `p(a,b|x,y)`, POVM measurement families, and the box-level
//! witnesses: the conditional-determinant witness `Q`, the covariance Mermin
//! strength `Γ`, CHSH, and a two-setting steering functional.
//!
//! Boxes are validated at construction: nonnegative entries, normalisation
//! per setting pair, and no-signaling. Witnesses assume the dichotomic
//! valuation `A_x = M_{0|x} − M_{1|x}` (outcome 0 ↦ +1, outcome 1 ↦ −1).

use crate::error::Error;
use crate::qmath::{
    bloch_op, cr, eig_hermitian, hermiticity_deviation, identity, kron, max_abs_diff, CMatrix,
    CVector, DensityMatrix,
};
use crate::tol;
use crate::Result;

/// A bipartite no-signaling behavior: the table `p(a,b|x,y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Behavior {
    nx: usize,
    ny: usize,
    na: usize,
    nb: usize,
    p: Vec<f64>,
}

impl Behavior {
    fn idx(&self, a: usize, b: usize, x: usize, y: usize) -> usize {
        ((a * self.nb + b) * self.nx + x) * self.ny + y
    }

    /// Builds a box from a probability function `f(a, b, x, y)`.
    pub fn from_fn(
        nx: usize,
        ny: usize,
        na: usize,
        nb: usize,
        f: impl Fn(usize, usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut p = vec![0.0; na * nb * nx * ny];
        let mut k;
        for a in 0..na {
            for b in 0..nb {
                for x in 0..nx {
                    for y in 0..ny {
                        k = ((a * nb + b) * nx + x) * ny + y;
                        p[k] = f(a, b, x, y);
                    }
                }
            }
        }
        Self::from_table(nx, ny, na, nb, p)
    }

    /// Builds and validates a box from a flat table indexed `[a][b][x][y]`.
    pub fn from_table(nx: usize, ny: usize, na: usize, nb: usize, p: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 || na == 0 || nb == 0 || p.len() != na * nb * nx * ny {
            return Err(Error::InvalidBox(format!(
                "table length {} does not match shape ({na},{nb};{nx},{ny})",
                p.len()
            )));
        }
        let bx = Self { nx, ny, na, nb, p };
        bx.validate()?;
        Ok(bx)
    }

    fn validate(&self) -> Result<()> {
        for (k, &v) in self.p.iter().enumerate() {
            if !v.is_finite() || v < -tol::BOX_ENTRY {
                return Err(Error::InvalidBox(format!(
                    "entry {k} is {v}, below the nonnegativity tolerance"
                )));
            }
        }
        for x in 0..self.nx {
            for y in 0..self.ny {
                let mut sum = 0.0;
                for a in 0..self.na {
                    for b in 0..self.nb {
                        sum += self.prob(a, b, x, y);
                    }
                }
                if (sum - 1.0).abs() > tol::BOX_NORM {
                    return Err(Error::InvalidBox(format!(
                        "probabilities for setting pair ({x},{y}) sum to {sum}"
                    )));
                }
            }
        }
        // No-signaling: Alice's marginal must not depend on y, Bob's not on x.
        for x in 0..self.nx {
            for a in 0..self.na {
                let margs: Vec<f64> = (0..self.ny)
                    .map(|y| (0..self.nb).map(|b| self.prob(a, b, x, y)).sum())
                    .collect();
                for w in margs.windows(2) {
                    if (w[0] - w[1]).abs() > tol::NO_SIGNALING {
                        return Err(Error::InvalidBox(format!(
                            "Alice's marginal p({a}|{x}) depends on Bob's setting \
                             (deviation {:.3e})",
                            (w[0] - w[1]).abs()
                        )));
                    }
                }
            }
        }
        for y in 0..self.ny {
            for b in 0..self.nb {
                let margs: Vec<f64> = (0..self.nx)
                    .map(|x| (0..self.na).map(|a| self.prob(a, b, x, y)).sum())
                    .collect();
                for w in margs.windows(2) {
                    if (w[0] - w[1]).abs() > tol::NO_SIGNALING {
                        return Err(Error::InvalidBox(format!(
                            "Bob's marginal p({b}|{y}) depends on Alice's setting \
                             (deviation {:.3e})",
                            (w[0] - w[1]).abs()
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    /// The white-noise box `p(a,b|x,y) = 1/(na·nb)`.
    pub fn uniform(nx: usize, ny: usize, na: usize, nb: usize) -> Self {
        let v = 1.0 / (na * nb) as f64;
        Self::from_fn(nx, ny, na, nb, |_, _, _, _| v).expect("uniform box is valid")
    }

    pub fn n_settings(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn n_outcomes(&self) -> (usize, usize) {
        (self.na, self.nb)
    }

    /// `p(a,b|x,y)`.
    pub fn prob(&self, a: usize, b: usize, x: usize, y: usize) -> f64 {
        self.p[self.idx(a, b, x, y)]
    }

    /// `p_A(a|x)`, averaged over Bob's settings (they agree by no-signaling).
    pub fn alice_marginal(&self, a: usize, x: usize) -> f64 {
        let mut s = 0.0;
        for y in 0..self.ny {
            for b in 0..self.nb {
                s += self.prob(a, b, x, y);
            }
        }
        s / self.ny as f64
    }

    /// `p_B(b|y)`, averaged over Alice's settings.
    pub fn bob_marginal(&self, b: usize, y: usize) -> f64 {
        let mut s = 0.0;
        for x in 0..self.nx {
            for a in 0..self.na {
                s += self.prob(a, b, x, y);
            }
        }
        s / self.nx as f64
    }

    fn require_dichotomic(&self) -> Result<()> {
        if self.na != 2 || self.nb != 2 {
            return Err(Error::InvalidBox(format!(
                "dichotomic outcomes required, got ({}, {})",
                self.na, self.nb
            )));
        }
        Ok(())
    }

    fn require_two_settings(&self) -> Result<()> {
        self.require_dichotomic()?;
        if self.nx != 2 || self.ny != 2 {
            return Err(Error::InvalidBox(format!(
                "two settings per side required, got ({}, {})",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    /// `⟨A_x B_y⟩` under the ±1 valuation.
    pub fn correlator(&self, x: usize, y: usize) -> Result<f64> {
        self.require_dichotomic()?;
        let mut s = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                let sign = if (a + b) % 2 == 0 { 1.0 } else { -1.0 };
                s += sign * self.prob(a, b, x, y);
            }
        }
        Ok(s)
    }

    /// `⟨A_x⟩` under the ±1 valuation.
    pub fn alice_expect(&self, x: usize) -> Result<f64> {
        self.require_dichotomic()?;
        Ok(self.alice_marginal(0, x) - self.alice_marginal(1, x))
    }

    /// `⟨B_y⟩` under the ±1 valuation.
    pub fn bob_expect(&self, y: usize) -> Result<f64> {
        self.require_dichotomic()?;
        Ok(self.bob_marginal(0, y) - self.bob_marginal(1, y))
    }
}

/// Bloch parameterisation of a dichotomic qubit POVM setting:
/// `M₀ = γI + (η/2)û·σ`, `M₁ = I − M₀`.
///
/// Positivity of both effects is the constraint `0 ≤ γ ± η/2 ≤ 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochParam {
    pub gamma: f64,
    pub eta: f64,
    pub axis: [f64; 3],
}

impl BlochParam {
    /// Sharp projective setting along `axis`.
    pub fn projective(axis: [f64; 3]) -> Self {
        Self {
            gamma: 0.5,
            eta: 1.0,
            axis,
        }
    }

    fn validate(&self) -> Result<()> {
        let n: f64 = self.axis.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(n - 1.0).abs().is_finite() || (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "measurement axis must be a unit vector, |axis| = {n}"
            )));
        }
        let (g, h) = (self.gamma, self.eta);
        if h < 0.0 || g - h / 2.0 < -1e-12 || g + h / 2.0 > 1.0 + 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "POVM bounds 0 ≤ γ ± η/2 ≤ 1 violated by (γ, η) = ({g}, {h})"
            )));
        }
        Ok(())
    }

    /// The pair `(M₀, M₁)`.
    pub fn effects(&self) -> (CMatrix, CMatrix) {
        let m0 = identity(2) * cr(self.gamma) + bloch_op(self.axis) * cr(self.eta / 2.0);
        let m1 = identity(2) - &m0;
        (m0, m1)
    }
}

/// A finite family of POVMs — one list of effects per measurement setting.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementFamily {
    dim: usize,
    n_outcomes: usize,
    settings: Vec<Vec<CMatrix>>,
    bloch: Option<Vec<BlochParam>>,
}

impl MeasurementFamily {
    /// Validates effect positivity and per-setting completeness.
    pub fn from_effects(settings: Vec<Vec<CMatrix>>) -> Result<Self> {
        if settings.is_empty() || settings[0].is_empty() {
            return Err(Error::InvalidParameter(
                "measurement family needs at least one setting and outcome".into(),
            ));
        }
        let n_outcomes = settings[0].len();
        let dim = settings[0][0].nrows();
        for effects in &settings {
            if effects.len() != n_outcomes {
                return Err(Error::InvalidParameter(
                    "all settings must share one outcome count".into(),
                ));
            }
            let mut sum = CMatrix::zeros(dim, dim);
            for m in effects {
                if m.nrows() != dim || m.ncols() != dim {
                    return Err(Error::Dimension(format!(
                        "effect is {}×{}, expected {dim}×{dim}",
                        m.nrows(),
                        m.ncols()
                    )));
                }
                let herm = hermiticity_deviation(m);
                if herm > tol::HERMITIAN {
                    return Err(Error::NotHermitian { deviation: herm });
                }
                let (eigs, _) = eig_hermitian(m)?;
                if eigs[0] < -tol::PSD {
                    return Err(Error::NotPsd { min_eig: eigs[0] });
                }
                sum += m;
            }
            let dev = max_abs_diff(&sum, &identity(dim));
            if dev > tol::COMPLETENESS {
                return Err(Error::IncompleteMeasurement { deviation: dev });
            }
        }
        Ok(Self {
            dim,
            n_outcomes,
            settings,
            bloch: None,
        })
    }

    /// Dichotomic qubit POVMs from Bloch parameters, one per setting.
    pub fn qubit_bloch(params: Vec<BlochParam>) -> Result<Self> {
        for p in &params {
            p.validate()?;
        }
        let settings = params
            .iter()
            .map(|p| {
                let (m0, m1) = p.effects();
                vec![m0, m1]
            })
            .collect();
        let mut fam = Self::from_effects(settings)?;
        fam.bloch = Some(params);
        Ok(fam)
    }

    /// Sharp qubit measurements along the given Bloch axes.
    pub fn qubit_projective(axes: &[[f64; 3]]) -> Result<Self> {
        Self::qubit_bloch(axes.iter().map(|&a| BlochParam::projective(a)).collect())
    }

    /// Sharp qubit measurements from polar angles `(θ, φ)` per setting.
    pub fn qubit_angles(angles: &[[f64; 2]]) -> Result<Self> {
        let axes: Vec<[f64; 3]> = angles
            .iter()
            .map(|&[t, p]| [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()])
            .collect();
        Self::qubit_projective(&axes)
    }

    /// Dichotomic settings `{|v⟩⟨v|, I − |v⟩⟨v|}` from one ket per setting.
    pub fn qubit_kets(kets: &[CVector]) -> Result<Self> {
        let settings = kets
            .iter()
            .map(|v| {
                let p = v * v.adjoint();
                let q = identity(2) - &p;
                vec![p, q]
            })
            .collect();
        Self::from_effects(settings)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_settings(&self) -> usize {
        self.settings.len()
    }

    pub fn n_outcomes(&self) -> usize {
        self.n_outcomes
    }

    /// Effect `M_{a|x}`.
    pub fn effect(&self, x: usize, a: usize) -> &CMatrix {
        &self.settings[x][a]
    }

    /// Bloch parameters, when the family was built from them.
    pub fn bloch_params(&self) -> Option<&[BlochParam]> {
        self.bloch.as_deref()
    }
}

/// Born-rule box `p(a,b|x,y) = tr(ρ · M^A_{a|x} ⊗ M^B_{b|y})`.
pub fn born_box(
    rho: &DensityMatrix,
    alice: &MeasurementFamily,
    bob: &MeasurementFamily,
) -> Result<Behavior> {
    if alice.dim() != rho.dim_a() || bob.dim() != rho.dim_b() {
        return Err(Error::Dimension(format!(
            "state is {}⊗{} but measurements act on {} and {}",
            rho.dim_a(),
            rho.dim_b(),
            alice.dim(),
            bob.dim()
        )));
    }
    Behavior::from_fn(
        alice.n_settings(),
        bob.n_settings(),
        alice.n_outcomes(),
        bob.n_outcomes(),
        |a, b, x, y| {
            let op = kron(alice.effect(x, a), bob.effect(y, b));
            (rho.matrix() * op).trace().re
        },
    )
}

/// Bob-side conditionals `p(b|a; x, y)`, indexed `[x][y][a][b]`.
///
/// Errors if any Alice marginal needed for conditioning is numerically zero.
pub fn conditionals(bx: &Behavior) -> Result<Vec<Vec<Vec<Vec<f64>>>>> {
    let (nx, ny) = bx.n_settings();
    let (na, nb) = bx.n_outcomes();
    let mut out = vec![vec![vec![vec![0.0; nb]; na]; ny]; nx];
    for x in 0..nx {
        for a in 0..na {
            let pa = bx.alice_marginal(a, x);
            if pa <= tol::ZERO_MARGINAL {
                return Err(Error::ZeroMarginal { a, x, value: pa });
            }
            for y in 0..ny {
                for b in 0..nb {
                    out[x][y][a][b] = bx.prob(a, b, x, y) / pa;
                }
            }
        }
    }
    Ok(out)
}

/// The 2×2 matrix of conditional differences
/// `Δ(x,y) = p(0|0; x,y) − p(0|1; x,y)` with rows indexed by `y` and columns
/// by `x`.
pub fn q_difference_matrix(bx: &Behavior) -> Result<[[f64; 2]; 2]> {
    bx.require_two_settings()?;
    let cond = conditionals(bx)?;
    let mut d = [[0.0; 2]; 2];
    for y in 0..2 {
        for x in 0..2 {
            d[y][x] = cond[x][y][0][0] - cond[x][y][1][0];
        }
    }
    Ok(d)
}

/// Conditional-determinant steering witness `Q`.
///
/// Returns the magnitude of the determinant of [`q_difference_matrix`]: the
/// determinant's sign flips under relabeling either party's settings, so
/// only `|det|` is a label-independent quantity. `Q > 0` certifies that no
/// classical-quantum or quantum-classical two-qubit state reproduces the
/// box.
pub fn q_witness(bx: &Behavior) -> Result<f64> {
    let d = q_difference_matrix(bx)?;
    Ok((d[0][0] * d[1][1] - d[0][1] * d[1][0]).abs())
}

/// Covariance `cov(A_x, B_y) = ⟨A_x B_y⟩ − ⟨A_x⟩⟨B_y⟩`.
pub fn covariance(bx: &Behavior, x: usize, y: usize) -> Result<f64> {
    Ok(bx.correlator(x, y)? - bx.alice_expect(x)? * bx.bob_expect(y)?)
}

/// The four absolute covariance Mermin functions `(M₀, M₁, M₂, M₃)`.
pub fn mermin_functions(bx: &Behavior) -> Result<[f64; 4]> {
    bx.require_two_settings()?;
    let c00 = covariance(bx, 0, 0)?;
    let c01 = covariance(bx, 0, 1)?;
    let c10 = covariance(bx, 1, 0)?;
    let c11 = covariance(bx, 1, 1)?;
    Ok([
        (c00 + c11).abs(),
        (c00 - c11).abs(),
        (c01 + c10).abs(),
        (c01 - c10).abs(),
    ])
}

/// Mermin strength `Γ`: the minimum over the three triads
/// `Γ_i = ||M₀ − M_i| − |M_j − M_k||` of the absolute covariance Mermin
/// functions.
pub fn mermin_strength(bx: &Behavior) -> Result<f64> {
    let [m0, m1, m2, m3] = mermin_functions(bx)?;
    let tau = |p: f64, q: f64, r: f64, s: f64| ((p - q).abs() - (r - s).abs()).abs();
    let g1 = tau(m0, m1, m2, m3);
    let g2 = tau(m0, m2, m1, m3);
    let g3 = tau(m0, m3, m1, m2);
    Ok(g1.min(g2).min(g3))
}

/// CHSH value `S = ⟨A₀B₀⟩ + ⟨A₀B₁⟩ + ⟨A₁B₀⟩ − ⟨A₁B₁⟩`.
pub fn chsh(bx: &Behavior) -> Result<f64> {
    bx.require_two_settings()?;
    Ok(bx.correlator(0, 0)? + bx.correlator(0, 1)? + bx.correlator(1, 0)?
        - bx.correlator(1, 1)?)
}

/// Two-setting steering functional `F₂ = |⟨A₀B₀⟩ + ⟨A₁B₁⟩| / √2`; the
/// unsteerable bound is 1.
pub fn steering_f2(bx: &Behavior) -> Result<f64> {
    bx.require_two_settings()?;
    Ok((bx.correlator(0, 0)? + bx.correlator(1, 1)?).abs() / 2f64.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{basis_ket, qubit_from_bloch, DensityMatrix};
    use crate::sample;
    use crate::states::{cq_state, giorgi_state, ket_plus, phi_plus, werner};
    use rand::Rng;

    fn sigma_settings() -> MeasurementFamily {
        // Setting 0 along z, setting 1 along x.
        MeasurementFamily::qubit_projective(&[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap()
    }

    fn giorgi_settings() -> MeasurementFamily {
        MeasurementFamily::qubit_kets(&[basis_ket(2, 0), ket_plus()]).unwrap()
    }

    fn random_state_box(rng: &mut rand_chacha::ChaCha8Rng) -> Behavior {
        let rho = sample::random_density(rng, 2, 2);
        let a = MeasurementFamily::qubit_projective(&[
            sample::random_unit3(rng),
            sample::random_unit3(rng),
        ])
        .unwrap();
        let b = MeasurementFamily::qubit_projective(&[
            sample::random_unit3(rng),
            sample::random_unit3(rng),
        ])
        .unwrap();
        born_box(&rho, &a, &b).unwrap()
    }

    #[test]
    fn white_noise_box_from_maximally_mixed() {
        let rho = DensityMatrix::new(2, 2, identity(4) * cr(0.25)).unwrap();
        let bx = born_box(&rho, &sigma_settings(), &sigma_settings()).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for x in 0..2 {
                    for y in 0..2 {
                        assert!((bx.prob(a, b, x, y) - 0.25).abs() < 1e-12);
                    }
                }
            }
        }
        assert!(covariance(&bx, 0, 1).unwrap().abs() < 1e-12);
        assert!(chsh(&bx).unwrap().abs() < 1e-12);
        assert!(steering_f2(&bx).unwrap().abs() < 1e-12);
    }

    #[test]
    fn bell_box_correlations() {
        let rho = DensityMatrix::from_pure(&phi_plus(), 2, 2).unwrap();
        let bx = born_box(&rho, &sigma_settings(), &sigma_settings()).unwrap();
        // Matched settings: perfect correlation.
        for (x, y) in [(0, 0), (1, 1)] {
            assert!((bx.prob(0, 0, x, y) - 0.5).abs() < 1e-12);
            assert!((bx.prob(1, 1, x, y) - 0.5).abs() < 1e-12);
            assert!(bx.prob(0, 1, x, y).abs() < 1e-12);
            assert!((bx.correlator(x, y).unwrap() - 1.0).abs() < 1e-12);
        }
        // Crossed settings: uniform.
        for (x, y) in [(0, 1), (1, 0)] {
            for a in 0..2 {
                for b in 0..2 {
                    assert!((bx.prob(a, b, x, y) - 0.25).abs() < 1e-12);
                }
            }
        }
        // Conditional table of the matched block.
        let cond = conditionals(&bx).unwrap();
        assert!((cond[0][0][0][0] - 1.0).abs() < 1e-12);
        assert!(cond[0][0][1][0].abs() < 1e-12);
        assert!((q_witness(&bx).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn product_state_box_factorises() {
        let ra = qubit_from_bloch([0.3, 0.1, 0.5]);
        let rb = qubit_from_bloch([0.6, 0.0, -0.2]);
        let rho = DensityMatrix::new(2, 2, kron(&ra, &rb)).unwrap();
        let bx = born_box(&rho, &sigma_settings(), &sigma_settings()).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for x in 0..2 {
                    for y in 0..2 {
                        let product = bx.alice_marginal(a, x) * bx.bob_marginal(b, y);
                        assert!((bx.prob(a, b, x, y) - product).abs() < 1e-12);
                    }
                }
            }
        }
        for x in 0..2 {
            for y in 0..2 {
                assert!(covariance(&bx, x, y).unwrap().abs() < 1e-12);
            }
        }
        assert!(q_witness(&bx).unwrap().abs() < 1e-12);
        assert!(mermin_strength(&bx).unwrap().abs() < 1e-12);
    }

    #[test]
    fn box_validation_rejects_signaling_tables() {
        // Alice's marginal depends on y: deterministic a = y.
        let res = Behavior::from_fn(2, 2, 2, 2, |a, _, _, y| if a == y { 0.5 } else { 0.0 });
        assert!(matches!(res, Err(Error::InvalidBox(_))));
        // Negative entry.
        let res = Behavior::from_fn(1, 1, 2, 2, |a, b, _, _| {
            if a == 0 && b == 0 {
                1.1
            } else if a == 1 && b == 1 {
                -0.1
            } else {
                0.0
            }
        });
        assert!(matches!(res, Err(Error::InvalidBox(_))));
        // Bad normalisation.
        let res = Behavior::from_fn(1, 1, 2, 2, |_, _, _, _| 0.3);
        assert!(matches!(res, Err(Error::InvalidBox(_))));
    }

    #[test]
    fn conditionals_reject_zero_marginals() {
        // Alice deterministically outputs 0; conditioning on a = 1 is
        // undefined.
        let bx = Behavior::from_fn(2, 2, 2, 2, |a, _, _, _| if a == 0 { 0.5 } else { 0.0 })
            .unwrap();
        assert!(matches!(
            conditionals(&bx),
            Err(Error::ZeroMarginal { a: 1, .. })
        ));
    }

    #[test]
    fn giorgi_q_value_from_both_derivations() {
        let bx = born_box(&giorgi_state(), &giorgi_settings(), &giorgi_settings()).unwrap();
        // Hand-computed via Bloch algebra: joints (0.2, 0.35, 0.25, 0.45),
        // Alice marginals (0.5, 0.7), Bob marginals (0.3, 0.7).
        assert!((bx.prob(0, 0, 0, 0) - 0.2).abs() < 1e-12);
        assert!((bx.prob(0, 0, 0, 1) - 0.35).abs() < 1e-12);
        assert!((bx.prob(0, 0, 1, 0) - 0.25).abs() < 1e-12);
        assert!((bx.prob(0, 0, 1, 1) - 0.45).abs() < 1e-12);
        let d = q_difference_matrix(&bx).unwrap();
        let want = [[0.2, 4.0 / 21.0], [0.0, -4.0 / 21.0]];
        for y in 0..2 {
            for x in 0..2 {
                assert!((d[y][x] - want[y][x]).abs() < 1e-12);
            }
        }
        let q = q_witness(&bx).unwrap();
        assert!((q - 0.8 / 21.0).abs() < 1e-12);
        assert!((q - 0.0381).abs() < 5e-4);
    }

    #[test]
    fn werner_q_is_p_squared() {
        for p in [0.2, 0.5, 0.9] {
            let bx = born_box(&werner(p).unwrap(), &sigma_settings(), &sigma_settings()).unwrap();
            assert!((q_witness(&bx).unwrap() - p * p).abs() < 1e-12);
        }
    }

    #[test]
    fn q_magnitude_invariant_under_relabelings() {
        let mut rng = sample::rng(17, 0);
        for _ in 0..25 {
            let bx = random_state_box(&mut rng);
            let q = q_witness(&bx).unwrap();
            let (nx, ny) = bx.n_settings();

            // Relabel Alice's outcomes everywhere: every difference entry
            // flips sign, |Q| unchanged.
            let flipped =
                Behavior::from_fn(nx, ny, 2, 2, |a, b, x, y| bx.prob(1 - a, b, x, y)).unwrap();
            if let (Ok(d0), Ok(d1)) = (q_difference_matrix(&bx), q_difference_matrix(&flipped)) {
                for y in 0..2 {
                    for x in 0..2 {
                        assert!((d0[y][x] + d1[y][x]).abs() < 1e-10);
                    }
                }
                assert!((q_witness(&flipped).unwrap() - q).abs() < 1e-10);
            }

            // Relabel Bob's outcomes on one setting only.
            let partial = Behavior::from_fn(nx, ny, 2, 2, |a, b, x, y| {
                if y == 1 {
                    bx.prob(a, 1 - b, x, y)
                } else {
                    bx.prob(a, b, x, y)
                }
            })
            .unwrap();
            assert!((q_witness(&partial).unwrap() - q).abs() < 1e-10);
        }
    }

    #[test]
    fn mermin_strength_bell_diagonal_sorted_settings() {
        // Settings σ₁ for x=y=0 and σ₂ for x=y=1 leave only the covariances
        // (c₁, c₂) on matched settings, so every triad collapses to
        // |c₁+c₂| − |c₁−c₂| = 2|c₂| for |c₁| ≥ |c₂|.
        let axes = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]];
        let fam = MeasurementFamily::qubit_projective(&axes).unwrap();
        for c in [[0.5, 0.3, 0.1], [0.9, -0.4, 0.3], [0.6, 0.6, -0.2]] {
            let rho = crate::states::bell_diagonal(c).unwrap();
            let bx = born_box(&rho, &fam, &fam).unwrap();
            let g = mermin_strength(&bx).unwrap();
            assert!(
                (g - 2.0 * c[1].abs()).abs() < 1e-12,
                "c = {c:?} gave Γ = {g}"
            );
        }
    }

    #[test]
    fn mermin_strength_positive_on_a_cq_state() {
        // The covariance matrix of any CQ box is rank one, but a rank-one
        // covariance matrix does not force the triad minimum to vanish.
        // This fixed instance has covariances [[0.1, 0.2], [0.2, 0.4]] and
        // Γ = 0.2.
        let bob0 = DensityMatrix::single(qubit_from_bloch([0.0, 0.0, 0.4])).unwrap();
        let bob1 = DensityMatrix::single(qubit_from_bloch([0.0, 0.0, -0.4])).unwrap();
        let rho = cq_state(
            &[0.5, 0.5],
            &[basis_ket(2, 0), basis_ket(2, 1)],
            &[bob0, bob1],
        )
        .unwrap();
        let tilted = [3f64.sqrt() / 2.0, 0.0, 0.5];
        let alice = MeasurementFamily::qubit_projective(&[tilted, [0.0, 0.0, 1.0]]).unwrap();
        let bob = MeasurementFamily::qubit_projective(&[tilted, [0.0, 0.0, 1.0]]).unwrap();
        let bx = born_box(&rho, &alice, &bob).unwrap();
        let want = [[0.1, 0.2], [0.2, 0.4]];
        for x in 0..2 {
            for y in 0..2 {
                assert!((covariance(&bx, x, y).unwrap() - want[x][y]).abs() < 1e-12);
            }
        }
        assert!((mermin_strength(&bx).unwrap() - 0.2).abs() < 1e-12);
    }

    #[test]
    fn giorgi_box_mermin_strength_value() {
        // Covariances of the Q-witness box are [[0.2, 0], [0.16, -0.16]],
        // giving M = (0.04, 0.36, 0.16, 0.16) and triad values
        // (0.32, 0.08, 0.08).
        let bx = born_box(&giorgi_state(), &giorgi_settings(), &giorgi_settings()).unwrap();
        let want = [[0.2, 0.0], [0.16, -0.16]];
        for x in 0..2 {
            for y in 0..2 {
                assert!((covariance(&bx, x, y).unwrap() - want[x][y]).abs() < 1e-12);
            }
        }
        let m = mermin_functions(&bx).unwrap();
        let want_m = [0.04, 0.36, 0.16, 0.16];
        for i in 0..4 {
            assert!((m[i] - want_m[i]).abs() < 1e-12);
        }
        assert!((mermin_strength(&bx).unwrap() - 0.08).abs() < 1e-12);
    }

    #[test]
    fn mermin_strength_invariant_under_setting_swaps() {
        let mut rng = sample::rng(29, 0);
        for _ in 0..25 {
            let bx = random_state_box(&mut rng);
            let g = mermin_strength(&bx).unwrap();
            let swapped_a =
                Behavior::from_fn(2, 2, 2, 2, |a, b, x, y| bx.prob(a, b, 1 - x, y)).unwrap();
            let swapped_b =
                Behavior::from_fn(2, 2, 2, 2, |a, b, x, y| bx.prob(a, b, x, 1 - y)).unwrap();
            assert!((mermin_strength(&swapped_a).unwrap() - g).abs() < 1e-12);
            assert!((mermin_strength(&swapped_b).unwrap() - g).abs() < 1e-12);
        }
    }

    #[test]
    fn chsh_reference_points() {
        // Tsirelson configuration for |Φ⁺⟩ (T = diag(1, -1, 1)): Alice z/x,
        // Bob (z±x)/√2.
        let rho = DensityMatrix::from_pure(&phi_plus(), 2, 2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        let alice = sigma_settings();
        let bob =
            MeasurementFamily::qubit_projective(&[[s, 0.0, s], [-s, 0.0, s]]).unwrap();
        let bx = born_box(&rho, &alice, &bob).unwrap();
        assert!((chsh(&bx).unwrap() - 2.0 * 2f64.sqrt()).abs() < 1e-9);

        // All-zeros deterministic box sits on the local bound.
        let det = Behavior::from_fn(2, 2, 2, 2, |a, b, _, _| {
            if a == 0 && b == 0 {
                1.0
            } else {
                0.0
            }
        })
        .unwrap();
        assert!((chsh(&det).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn steering_functional_on_werner_line() {
        // A₀ = B₀ = σ₁, A₁ = σ₂, B₁ = −σ₂ turns T = diag(p, −p, p) into
        // ⟨A₀B₀⟩ = ⟨A₁B₁⟩ = p.
        let alice =
            MeasurementFamily::qubit_projective(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap();
        let bob =
            MeasurementFamily::qubit_projective(&[[1.0, 0.0, 0.0], [0.0, -1.0, 0.0]]).unwrap();
        for p in [0.0, 0.4, 1.0 / 2f64.sqrt(), 0.95] {
            let bx = born_box(&werner(p).unwrap(), &alice, &bob).unwrap();
            assert!((steering_f2(&bx).unwrap() - 2f64.sqrt() * p).abs() < 1e-12);
        }
        let bell = DensityMatrix::from_pure(&phi_plus(), 2, 2).unwrap();
        let bx = born_box(&bell, &alice, &bob).unwrap();
        assert!((steering_f2(&bx).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn povm_family_validation() {
        // Unsharp measurement keeps both effects positive.
        let fam = MeasurementFamily::qubit_bloch(vec![BlochParam {
            gamma: 0.5,
            eta: 0.6,
            axis: [0.0, 0.0, 1.0],
        }])
        .unwrap();
        let (eigs, _) = eig_hermitian(fam.effect(0, 0)).unwrap();
        assert!(eigs[0] > 0.0);

        // γ ± η/2 outside [0, 1] is rejected.
        assert!(MeasurementFamily::qubit_bloch(vec![BlochParam {
            gamma: 0.9,
            eta: 0.6,
            axis: [0.0, 0.0, 1.0],
        }])
        .is_err());

        // Effects that do not sum to identity are rejected.
        let bad = vec![vec![identity(2) * cr(0.5), identity(2) * cr(0.4)]];
        assert!(matches!(
            MeasurementFamily::from_effects(bad),
            Err(Error::IncompleteMeasurement { .. })
        ));
    }

    #[test]
    fn random_boxes_pass_invariants_and_ranges() {
        let mut rng = sample::rng(31, 0);
        for _ in 0..30 {
            let bx = random_state_box(&mut rng);
            // Constructor has already validated; spot-check witness ranges.
            assert!(chsh(&bx).unwrap().abs() <= 4.0 + 1e-9);
            assert!(q_witness(&bx).map(|q| q >= 0.0).unwrap_or(true));
            assert!(mermin_strength(&bx).unwrap() >= 0.0);
            let _ = rng.gen::<u64>();
        }
    }
}
