//! Named bipartite states, Bloch-form tools and the PPT separability test.
//!
//! The builders cover the state families the rest of the crate is exercised
//! on: Werner and Bell-diagonal mixtures, classically-correlated states in
//! chosen bases, classical-quantum hybrids, and a handful of fixed examples
//! (the 2⊗3 trine state, a separable state with full correlation rank, a
//! locally-created discordant state).

use crate::error::Error;
use crate::qmath::{
    angle_ket, basis_ket, check_orthonormal, cr, eig_hermitian, identity, kron, pauli, CMatrix,
    CVector, DensityMatrix, PureState, Subsystem,
};
use crate::tol;
use crate::Result;

/// `|+⟩ = (|0⟩ + |1⟩)/√2`.
pub fn ket_plus() -> CVector {
    angle_ket(std::f64::consts::FRAC_PI_2, 0.0)
}

/// Maximally entangled two-qubit state `(|00⟩ + |11⟩)/√2`.
pub fn phi_plus() -> PureState {
    PureState::from_amplitudes(&[cr(1.0), cr(0.0), cr(0.0), cr(1.0)])
        .expect("fixed amplitudes are nonzero")
}

/// Werner state `p|Φ⁺⟩⟨Φ⁺| + (1−p)I/4`.
pub fn werner(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!(
            "werner weight must lie in [0, 1], got {p}"
        )));
    }
    let m = phi_plus().projector() * cr(p) + identity(4) * cr((1.0 - p) / 4.0);
    DensityMatrix::new(2, 2, m)
}

/// Eigenvalues of the Bell-diagonal state with correlation vector `c`,
/// one per Bell basis vector.
pub fn bell_spectrum(c: [f64; 3]) -> [f64; 4] {
    [
        (1.0 + c[0] - c[1] + c[2]) / 4.0,
        (1.0 - c[0] + c[1] + c[2]) / 4.0,
        (1.0 + c[0] + c[1] - c[2]) / 4.0,
        (1.0 - c[0] - c[1] - c[2]) / 4.0,
    ]
}

/// Bell-diagonal state `¼(I⊗I + Σᵢ cᵢ σᵢ⊗σᵢ)`.
///
/// Rejects `c` outside the tetrahedron where the four Bell eigenvalues stay
/// nonnegative.
pub fn bell_diagonal(c: [f64; 3]) -> Result<DensityMatrix> {
    let spectrum = bell_spectrum(c);
    let min_eig = spectrum.iter().cloned().fold(f64::INFINITY, f64::min);
    if min_eig < -tol::PSD {
        return Err(Error::NotPsd { min_eig });
    }
    let mut m = identity(4);
    for i in 1..=3 {
        m += kron(&pauli(i), &pauli(i)) * cr(c[i - 1]);
    }
    DensityMatrix::new(2, 2, m * cr(0.25))
}

/// Classically-correlated state `Σᵢⱼ pᵢⱼ |aᵢ⟩⟨aᵢ| ⊗ |bⱼ⟩⟨bⱼ|` in the given
/// orthonormal product basis.
pub fn cc_state(
    p: &[Vec<f64>],
    basis_a: &[CVector],
    basis_b: &[CVector],
) -> Result<DensityMatrix> {
    if p.len() != basis_a.len() || p.iter().any(|row| row.len() != basis_b.len()) {
        return Err(Error::Dimension(
            "probability table shape must match the basis sizes".into(),
        ));
    }
    let mut sum = 0.0;
    for row in p {
        for &w in row {
            if w < -1e-12 {
                return Err(Error::InvalidDistribution { sum: w });
            }
            sum += w;
        }
    }
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution { sum });
    }
    check_orthonormal(basis_a)?;
    check_orthonormal(basis_b)?;
    let (da, db) = (basis_a[0].len(), basis_b[0].len());
    let mut m = CMatrix::zeros(da * db, da * db);
    for (i, row) in p.iter().enumerate() {
        let pa = &basis_a[i] * basis_a[i].adjoint();
        for (j, &w) in row.iter().enumerate() {
            let pb = &basis_b[j] * basis_b[j].adjoint();
            m += kron(&pa, &pb) * cr(w);
        }
    }
    DensityMatrix::new(da, db, m)
}

/// [`cc_state`] in the computational bases.
pub fn cc_computational(p: &[Vec<f64>]) -> Result<DensityMatrix> {
    let da = p.len();
    let db = p.first().map(|r| r.len()).unwrap_or(0);
    let basis_a: Vec<CVector> = (0..da).map(|i| basis_ket(da, i)).collect();
    let basis_b: Vec<CVector> = (0..db).map(|j| basis_ket(db, j)).collect();
    cc_state(p, &basis_a, &basis_b)
}

/// The two-qubit state `½(|00⟩⟨00| + |11⟩⟨11|)`.
pub fn cc_half_half() -> DensityMatrix {
    cc_computational(&[vec![0.5, 0.0], vec![0.0, 0.5]]).expect("fixed table is valid")
}

/// Classical-quantum state `Σᵢ wᵢ |aᵢ⟩⟨aᵢ| ⊗ ρᵢ` — classical flags on A,
/// arbitrary states on B.
pub fn cq_state(
    weights: &[f64],
    alice_basis: &[CVector],
    bob_states: &[DensityMatrix],
) -> Result<DensityMatrix> {
    if weights.len() != alice_basis.len() || weights.len() != bob_states.len() {
        return Err(Error::Dimension(
            "weights, basis and state list must have equal length".into(),
        ));
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < -1e-12) || (sum - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution { sum });
    }
    check_orthonormal(alice_basis)?;
    let da = alice_basis[0].len();
    let db = bob_states[0].dim();
    if bob_states.iter().any(|r| r.dim_b() != 1 || r.dim() != db) {
        return Err(Error::Dimension(
            "bob states must be single-system and share one dimension".into(),
        ));
    }
    let mut m = CMatrix::zeros(da * db, da * db);
    for ((w, a), rho) in weights.iter().zip(alice_basis).zip(bob_states) {
        let pa = a * a.adjoint();
        m += kron(&pa, rho.matrix()) * cr(*w);
    }
    DensityMatrix::new(da, db, m)
}

/// Quantum-classical state `Σᵢ wᵢ ρᵢ ⊗ |bᵢ⟩⟨bᵢ|` — mirror image of
/// [`cq_state`].
pub fn qc_state(
    weights: &[f64],
    alice_states: &[DensityMatrix],
    bob_basis: &[CVector],
) -> Result<DensityMatrix> {
    if weights.len() != bob_basis.len() || weights.len() != alice_states.len() {
        return Err(Error::Dimension(
            "weights, basis and state list must have equal length".into(),
        ));
    }
    let sum: f64 = weights.iter().sum();
    if weights.iter().any(|&w| w < -1e-12) || (sum - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution { sum });
    }
    check_orthonormal(bob_basis)?;
    let db = bob_basis[0].len();
    let da = alice_states[0].dim();
    if alice_states.iter().any(|r| r.dim_b() != 1 || r.dim() != da) {
        return Err(Error::Dimension(
            "alice states must be single-system and share one dimension".into(),
        ));
    }
    let mut m = CMatrix::zeros(da * db, da * db);
    for ((w, b), rho) in weights.iter().zip(bob_basis).zip(alice_states) {
        let pb = b * b.adjoint();
        m += kron(rho.matrix(), &pb) * cr(*w);
    }
    DensityMatrix::new(da, db, m)
}

/// The three trine kets `|0,0⟩, |2π/3,0⟩, |2π/3,π⟩` whose Bloch vectors sum
/// to zero.
pub fn trine_kets() -> [CVector; 3] {
    let t = 2.0 * std::f64::consts::FRAC_PI_3;
    [
        angle_ket(0.0, 0.0),
        angle_ket(t, 0.0),
        angle_ket(t, std::f64::consts::PI),
    ]
}

/// The 2⊗3 trine state: an equal mixture of trine projectors on A flagged by
/// the computational basis of B. Marginals are `I₂/2` and `I₃/3`.
pub fn trine_qc() -> DensityMatrix {
    let alice: Vec<DensityMatrix> = trine_kets()
        .iter()
        .map(|k| DensityMatrix::single(k * k.adjoint()).expect("trine projector is a state"))
        .collect();
    let bob: Vec<CVector> = (0..3).map(|j| basis_ket(3, j)).collect();
    qc_state(&[1.0 / 3.0; 3], &alice, &bob).expect("fixed construction is valid")
}

/// Separable two-qubit state with correlation rank 3 and vanishing
/// canonical `c₂, c₃`:
/// `¼(I⊗I + 0.4 σ₁⊗I + 0.4 I⊗σ₁ − 0.4 I⊗σ₃ + 0.2 σ₃⊗σ₃)`.
pub fn giorgi_state() -> DensityMatrix {
    let i2 = identity(2);
    let m = (kron(&i2, &i2)
        + kron(&pauli(1), &i2) * cr(0.4)
        + kron(&i2, &pauli(1)) * cr(0.4)
        - kron(&i2, &pauli(3)) * cr(0.4)
        + kron(&pauli(3), &pauli(3)) * cr(0.2))
        * cr(0.25);
    DensityMatrix::new(2, 2, m).expect("fixed construction is valid")
}

/// The locally-created discordant state `½(|00⟩⟨00| + |++⟩⟨++|)`.
pub fn local_coherent_example() -> DensityMatrix {
    let k00 = basis_ket(4, 0);
    let plus = ket_plus();
    let kpp = plus.kronecker(&plus);
    let m = (&k00 * k00.adjoint() + &kpp * kpp.adjoint()) * cr(0.5);
    DensityMatrix::new(2, 2, m).expect("fixed construction is valid")
}

/// Pauli expansion of a two-qubit state: local Bloch vectors and the 3×3
/// correlation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct BlochForm {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub t: [[f64; 3]; 3],
}

impl BlochForm {
    /// Rebuilds `¼(I⊗I + a·σ⊗I + I⊗b·σ + Σ tᵢⱼ σᵢ⊗σⱼ)`, validating the
    /// result.
    pub fn reconstruct(&self) -> Result<DensityMatrix> {
        let i2 = identity(2);
        let mut m = kron(&i2, &i2);
        for i in 1..=3 {
            m += kron(&pauli(i), &i2) * cr(self.a[i - 1]);
            m += kron(&i2, &pauli(i)) * cr(self.b[i - 1]);
            for j in 1..=3 {
                m += kron(&pauli(i), &pauli(j)) * cr(self.t[i - 1][j - 1]);
            }
        }
        DensityMatrix::new(2, 2, m * cr(0.25))
    }
}

/// Pauli coefficients of a two-qubit state.
pub fn bloch_decompose(rho: &DensityMatrix) -> Result<BlochForm> {
    if rho.dim_a() != 2 || rho.dim_b() != 2 {
        return Err(Error::Dimension(format!(
            "Bloch decomposition needs a 2⊗2 state, got {}⊗{}",
            rho.dim_a(),
            rho.dim_b()
        )));
    }
    let i2 = identity(2);
    let coeff = |op: &CMatrix| (rho.matrix() * op).trace().re;
    let mut form = BlochForm {
        a: [0.0; 3],
        b: [0.0; 3],
        t: [[0.0; 3]; 3],
    };
    for i in 1..=3 {
        form.a[i - 1] = coeff(&kron(&pauli(i), &i2));
        form.b[i - 1] = coeff(&kron(&i2, &pauli(i)));
        for j in 1..=3 {
            form.t[i - 1][j - 1] = coeff(&kron(&pauli(i), &pauli(j)));
        }
    }
    Ok(form)
}

/// Transpose of one subsystem; the result is generally not a state.
pub fn partial_transpose(rho: &DensityMatrix, side: Subsystem) -> CMatrix {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let m = rho.matrix();
    let d = da * db;
    let mut out = CMatrix::zeros(d, d);
    for i in 0..da {
        for j in 0..db {
            for k in 0..da {
                for l in 0..db {
                    let src = match side {
                        Subsystem::A => (k * db + j, i * db + l),
                        Subsystem::B => (i * db + l, k * db + j),
                    };
                    out[(i * db + j, k * db + l)] = m[src];
                }
            }
        }
    }
    out
}

/// PPT separability verdict with the smallest partial-transpose eigenvalue
/// as witness.
///
/// Only dimensions with `dimA·dimB ≤ 6` are accepted — exactly the range
/// where PPT is equivalent to separability — so a `true` here really means
/// separable.
pub fn is_ppt(rho: &DensityMatrix) -> Result<(bool, f64)> {
    if rho.dim() > 6 {
        return Err(Error::UnsupportedDimension(rho.dim()));
    }
    let pt = partial_transpose(rho, Subsystem::B);
    let (eigs, _) = eig_hermitian(&pt)?;
    let min_eig = eigs[0];
    Ok((min_eig >= -tol::PSD, min_eig))
}

/// Rank-one projector `|v⟩⟨v|`.
pub fn proj(v: &CVector) -> CMatrix {
    v * v.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{entropy, max_abs_diff, partial_trace, trace_distance};
    use crate::sample;

    #[test]
    fn werner_endpoints() {
        let w0 = werner(0.0).unwrap();
        assert!(max_abs_diff(w0.matrix(), &(identity(4) * cr(0.25))) < 1e-15);
        let w1 = werner(1.0).unwrap();
        assert!(max_abs_diff(w1.matrix(), &phi_plus().projector()) < 1e-15);
        assert!(werner(-0.1).is_err());
        assert!(werner(1.1).is_err());
    }

    #[test]
    fn werner_ppt_boundary_at_one_third() {
        let (_, min_eig) = is_ppt(&werner(1.0 / 3.0).unwrap()).unwrap();
        assert!(min_eig.abs() < 1e-10);
        let (sep, _) = is_ppt(&werner(1.0 / 3.0 - 1e-5).unwrap()).unwrap();
        assert!(sep);
        let (sep, _) = is_ppt(&werner(1.0 / 3.0 + 1e-5).unwrap()).unwrap();
        assert!(!sep);
    }

    #[test]
    fn bell_diagonal_corners_and_rejection() {
        let flat = bell_diagonal([0.0; 3]).unwrap();
        assert!(max_abs_diff(flat.matrix(), &(identity(4) * cr(0.25))) < 1e-15);
        let phi = bell_diagonal([1.0, -1.0, 1.0]).unwrap();
        assert!(max_abs_diff(phi.matrix(), &phi_plus().projector()) < 1e-12);
        assert!(matches!(
            bell_diagonal([0.8, 0.5, 0.3]),
            Err(Error::NotPsd { .. })
        ));
    }

    #[test]
    fn bell_spectrum_matches_eigensolver() {
        let mut rng = sample::rng(5, 0);
        let mut checked = 0;
        while checked < 25 {
            let c = sample::random_bloch(&mut rng, 1.0);
            let spec = bell_spectrum(c);
            if spec.iter().any(|&l| l < 0.0) {
                continue;
            }
            let rho = bell_diagonal(c).unwrap();
            let (eigs, _) = eig_hermitian(rho.matrix()).unwrap();
            let mut sorted = spec;
            sorted.sort_by(f64::total_cmp);
            for (a, b) in eigs.iter().zip(sorted.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
            checked += 1;
        }
    }

    #[test]
    fn cc_state_reference_points() {
        let half = cc_half_half();
        let mut expected = CMatrix::zeros(4, 4);
        expected[(0, 0)] = cr(0.5);
        expected[(3, 3)] = cr(0.5);
        assert!(max_abs_diff(half.matrix(), &expected) < 1e-15);

        let point = cc_computational(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let k00 = basis_ket(4, 0);
        assert!(max_abs_diff(point.matrix(), &(&k00 * k00.adjoint())) < 1e-15);

        let uniform = cc_computational(&[vec![0.25; 2], vec![0.25; 2]]).unwrap();
        assert!(max_abs_diff(uniform.matrix(), &(identity(4) * cr(0.25))) < 1e-15);

        assert!(cc_computational(&[vec![0.9, 0.0], vec![0.0, 0.0]]).is_err());
    }

    #[test]
    fn cq_single_term_is_product() {
        let bob = DensityMatrix::single(crate::qmath::qubit_from_bloch([0.2, 0.1, -0.3])).unwrap();
        let rho = cq_state(&[1.0], &[basis_ket(2, 0)], &[bob.clone()]).unwrap();
        let expected = kron(&proj(&basis_ket(2, 0)), bob.matrix());
        assert!(max_abs_diff(rho.matrix(), &expected) < 1e-15);
    }

    #[test]
    fn cq_rejects_bad_inputs() {
        let bob = DensityMatrix::single(identity(2) * cr(0.5)).unwrap();
        // Non-orthonormal flags.
        let res = cq_state(
            &[0.5, 0.5],
            &[basis_ket(2, 0), ket_plus()],
            &[bob.clone(), bob.clone()],
        );
        assert!(matches!(res, Err(Error::NotOrthonormal { .. })));
        // Bad weights.
        let res = cq_state(
            &[0.7, 0.7],
            &[basis_ket(2, 0), basis_ket(2, 1)],
            &[bob.clone(), bob],
        );
        assert!(matches!(res, Err(Error::InvalidDistribution { .. })));
    }

    #[test]
    fn trine_qc_marginals_and_separability() {
        let rho = trine_qc();
        assert_eq!((rho.dim_a(), rho.dim_b()), (2, 3));
        let ma = partial_trace(&rho, Subsystem::A);
        let mb = partial_trace(&rho, Subsystem::B);
        assert!(max_abs_diff(ma.matrix(), &(identity(2) * cr(0.5))) < 1e-12);
        assert!(max_abs_diff(mb.matrix(), &(identity(3) * cr(1.0 / 3.0))) < 1e-12);
        let (sep, _) = is_ppt(&rho).unwrap();
        assert!(sep);
    }

    #[test]
    fn trine_qc_equals_generic_qc_builder() {
        let alice: Vec<DensityMatrix> = trine_kets()
            .iter()
            .map(|k| DensityMatrix::single(proj(k)).unwrap())
            .collect();
        let bob: Vec<CVector> = (0..3).map(|j| basis_ket(3, j)).collect();
        let built = qc_state(&[1.0 / 3.0; 3], &alice, &bob).unwrap();
        assert!(max_abs_diff(built.matrix(), trine_qc().matrix()) < 1e-15);
    }

    #[test]
    fn giorgi_bloch_form() {
        let form = bloch_decompose(&giorgi_state()).unwrap();
        let want_a = [0.4, 0.0, 0.0];
        let want_b = [0.4, 0.0, -0.4];
        for i in 0..3 {
            assert!((form.a[i] - want_a[i]).abs() < 1e-12);
            assert!((form.b[i] - want_b[i]).abs() < 1e-12);
            for j in 0..3 {
                let want = if i == 2 && j == 2 { 0.2 } else { 0.0 };
                assert!((form.t[i][j] - want).abs() < 1e-12);
            }
        }
        let (sep, _) = is_ppt(&giorgi_state()).unwrap();
        assert!(sep);
    }

    #[test]
    fn werner_bloch_form_is_diagonal() {
        let form = bloch_decompose(&werner(0.6).unwrap()).unwrap();
        for i in 0..3 {
            assert!(form.a[i].abs() < 1e-12 && form.b[i].abs() < 1e-12);
            for j in 0..3 {
                let want = match (i, j) {
                    (0, 0) => 0.6,
                    (1, 1) => -0.6,
                    (2, 2) => 0.6,
                    _ => 0.0,
                };
                assert!((form.t[i][j] - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn bloch_roundtrip_on_random_states() {
        let mut rng = sample::rng(7, 0);
        for _ in 0..40 {
            let rho = sample::random_density(&mut rng, 2, 2);
            let rebuilt = bloch_decompose(&rho).unwrap().reconstruct().unwrap();
            assert!(max_abs_diff(rho.matrix(), rebuilt.matrix()) < 1e-12);
        }
    }

    #[test]
    fn bell_projector_partial_transpose_eigenvalue() {
        let bell = DensityMatrix::from_pure(&phi_plus(), 2, 2).unwrap();
        let (sep, min_eig) = is_ppt(&bell).unwrap();
        assert!(!sep);
        assert!((min_eig + 0.5).abs() < 1e-12);
    }

    #[test]
    fn partial_transpose_involution_and_sides() {
        let mut rng = sample::rng(9, 0);
        for _ in 0..20 {
            let rho = sample::random_density(&mut rng, 2, 3);
            let ptb = partial_transpose(&rho, Subsystem::B);
            // Transposing B twice restores the original matrix.
            let mut back = CMatrix::zeros(6, 6);
            for i in 0..2 {
                for j in 0..3 {
                    for k in 0..2 {
                        for l in 0..3 {
                            back[(i * 3 + j, k * 3 + l)] = ptb[(i * 3 + l, k * 3 + j)];
                        }
                    }
                }
            }
            assert!(max_abs_diff(&back, rho.matrix()) < 1e-12);
            // PT on A equals the global transpose of PT on B.
            let pta = partial_transpose(&rho, Subsystem::A);
            assert!(max_abs_diff(&pta, &ptb.transpose()) < 1e-12);
        }
    }

    #[test]
    fn is_ppt_rejects_large_dimensions() {
        let rho = sample::random_density(&mut sample::rng(3, 0), 3, 3);
        assert!(matches!(
            is_ppt(&rho),
            Err(Error::UnsupportedDimension(9))
        ));
    }

    #[test]
    fn local_coherent_example_is_separable_mixture() {
        let rho = local_coherent_example();
        let (sep, _) = is_ppt(&rho).unwrap();
        assert!(sep);
        // Equal mixture of two pure products: entropy is at most 1 bit.
        assert!(entropy(&rho).unwrap() <= 1.0 + 1e-12);
        // Distinct from the CC source state.
        assert!(trace_distance(&rho, &cc_half_half()).unwrap() > 0.1);
    }
}
