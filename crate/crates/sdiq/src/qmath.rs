//! Dense complex linear algebra and entropic primitives for small bipartite
//! systems.
//!
//! Everything here is tolerance-disciplined rather than exact: the validated
//! types ([`DensityMatrix`], [`PureState`]) check their defining invariants
//! against the thresholds in [`crate::tol`] at construction time, so the
//! higher layers can assume well-formed inputs.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Error;
use crate::tol;
use crate::Result;

/// Dense complex matrix used throughout the crate.
pub type CMatrix = DMatrix<Complex64>;

/// Dense complex vector.
pub type CVector = DVector<Complex64>;

/// Shorthand for a complex scalar.
#[inline]
pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Real number as a complex scalar.
#[inline]
pub fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// `d`-dimensional identity.
pub fn identity(d: usize) -> CMatrix {
    CMatrix::identity(d, d)
}

/// Pauli matrix `σ_i` for `i ∈ {1, 2, 3}` (x, y, z).
pub fn pauli(i: usize) -> CMatrix {
    match i {
        1 => CMatrix::from_row_slice(2, 2, &[cr(0.0), cr(1.0), cr(1.0), cr(0.0)]),
        2 => CMatrix::from_row_slice(2, 2, &[cr(0.0), c(0.0, -1.0), c(0.0, 1.0), cr(0.0)]),
        3 => CMatrix::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(-1.0)]),
        _ => panic!("pauli index must be 1, 2 or 3"),
    }
}

/// `v · σ` for a real 3-vector `v`.
pub fn bloch_op(v: [f64; 3]) -> CMatrix {
    pauli(1) * cr(v[0]) + pauli(2) * cr(v[1]) + pauli(3) * cr(v[2])
}

/// Single-qubit state `(I + r·σ)/2`; `|r| ≤ 1` is the caller's business.
pub fn qubit_from_bloch(r: [f64; 3]) -> CMatrix {
    (identity(2) + bloch_op(r)) * cr(0.5)
}

/// Computational basis vector `|i⟩` in dimension `d`.
pub fn basis_ket(d: usize, i: usize) -> CVector {
    let mut v = CVector::zeros(d);
    v[i] = cr(1.0);
    v
}

/// Qubit ket `|θ,φ⟩ = cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
pub fn angle_ket(theta: f64, phi: f64) -> CVector {
    let mut v = CVector::zeros(2);
    v[0] = cr((theta / 2.0).cos());
    v[1] = c(0.0, phi).exp() * cr((theta / 2.0).sin());
    v
}

/// Kronecker product.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Conjugate transpose.
pub fn dagger(m: &CMatrix) -> CMatrix {
    m.adjoint()
}

/// Largest entrywise absolute difference between two matrices.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    let mut worst = 0.0f64;
    for (x, y) in a.iter().zip(b.iter()) {
        worst = worst.max((x - y).norm());
    }
    worst
}

/// Deviation from Hermiticity, `max |m - m†|`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    max_abs_diff(m, &m.adjoint())
}

/// Real part of the trace.
pub fn trace_re(m: &CMatrix) -> f64 {
    m.trace().re
}

/// Which subsystem of a bipartite operator to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// A normalised pure state vector.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amps: CVector,
}

impl PureState {
    /// Validates `‖ψ‖ = 1` within [`tol::PURE_NORM`].
    pub fn new(amps: CVector) -> Result<Self> {
        let norm = amps.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > tol::PURE_NORM {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amps })
    }

    /// Builds and normalises from raw amplitudes; errors on the zero vector.
    pub fn from_amplitudes(amps: &[Complex64]) -> Result<Self> {
        let v = CVector::from_column_slice(amps);
        let norm = v.norm();
        if norm < 1e-12 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(Self { amps: v / cr(norm) })
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    /// Rank-one projector `|ψ⟩⟨ψ|`.
    pub fn projector(&self) -> CMatrix {
        &self.amps * self.amps.adjoint()
    }

    /// Tensor product `|ψ⟩ ⊗ |χ⟩`.
    pub fn tensor(&self, other: &PureState) -> PureState {
        PureState {
            amps: self.amps.kronecker(&other.amps),
        }
    }

    /// Overlap `⟨self|other⟩`.
    pub fn overlap(&self, other: &PureState) -> Complex64 {
        (self.amps.adjoint() * &other.amps)[(0, 0)]
    }
}

/// A validated density operator on `C^{dimA} ⊗ C^{dimB}`.
///
/// Single-system states use `dim_b = 1`, which keeps the partial-trace
/// outputs in the same type without a separate wrapper.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim_a: usize,
    dim_b: usize,
    mat: CMatrix,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positive semidefiniteness.
    pub fn new(dim_a: usize, dim_b: usize, mat: CMatrix) -> Result<Self> {
        let d = dim_a * dim_b;
        if d == 0 || mat.nrows() != d || mat.ncols() != d {
            return Err(Error::Dimension(format!(
                "expected a {d}×{d} matrix for dims {dim_a}⊗{dim_b}, got {}×{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        if mat.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Schema("matrix entries must be finite".into()));
        }
        let herm = hermiticity_deviation(&mat);
        if herm > tol::HERMITIAN {
            return Err(Error::NotHermitian { deviation: herm });
        }
        let trace = trace_re(&mat);
        if (trace - 1.0).abs() > tol::TRACE {
            return Err(Error::TraceNotOne { trace });
        }
        let (eigs, _) = eig_hermitian(&mat)?;
        let min_eig = eigs[0];
        if min_eig < -tol::PSD {
            return Err(Error::NotPsd { min_eig });
        }
        Ok(Self { dim_a, dim_b, mat })
    }

    /// Single-system state (`dim_b = 1`).
    pub fn single(mat: CMatrix) -> Result<Self> {
        let d = mat.nrows();
        Self::new(d, 1, mat)
    }

    /// `|ψ⟩⟨ψ|` viewed as a `dim_a ⊗ dim_b` state.
    pub fn from_pure(psi: &PureState, dim_a: usize, dim_b: usize) -> Result<Self> {
        Self::new(dim_a, dim_b, psi.projector())
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    /// Total Hilbert-space dimension.
    pub fn dim(&self) -> usize {
        self.dim_a * self.dim_b
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    /// Reinterprets the same operator with a different `A|B` split.
    pub fn with_dims(&self, dim_a: usize, dim_b: usize) -> Result<Self> {
        Self::new(dim_a, dim_b, self.mat.clone())
    }

    /// `u ρ u†` with the same dimensions; `u` must be unitary.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        let d = self.dim();
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::Dimension(format!(
                "unitary is {}×{}, state is {d}×{d}",
                u.nrows(),
                u.ncols()
            )));
        }
        let dev = max_abs_diff(&(u.adjoint() * u), &identity(d));
        if dev > 1e-9 {
            return Err(Error::InvalidParameter(format!(
                "matrix is not unitary (|u†u - I| = {dev:.3e})"
            )));
        }
        Self::new(self.dim_a, self.dim_b, u * &self.mat * u.adjoint())
    }
}

/// Partial trace of a bipartite state, keeping the requested subsystem.
///
/// The result is a single-system [`DensityMatrix`]; trace and Hermiticity
/// are preserved exactly up to rounding.
pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> DensityMatrix {
    let (da, db) = (rho.dim_a(), rho.dim_b());
    let m = rho.matrix();
    let mat = match keep {
        Subsystem::A => {
            let mut out = CMatrix::zeros(da, da);
            for i in 0..da {
                for k in 0..da {
                    let mut s = cr(0.0);
                    for j in 0..db {
                        s += m[(i * db + j, k * db + j)];
                    }
                    out[(i, k)] = s;
                }
            }
            out
        }
        Subsystem::B => {
            let mut out = CMatrix::zeros(db, db);
            for j in 0..db {
                for l in 0..db {
                    let mut s = cr(0.0);
                    for i in 0..da {
                        s += m[(i * db + j, i * db + l)];
                    }
                    out[(j, l)] = s;
                }
            }
            out
        }
    };
    DensityMatrix::single(mat).expect("partial trace of a valid state is a valid state")
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Returns eigenvalues in ascending order with matching orthonormal
/// eigenvector columns. Errors if the input is not Hermitian within
/// [`tol::HERMITIAN`].
pub fn eig_hermitian(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let dev = hermiticity_deviation(m);
    if dev > tol::HERMITIAN {
        return Err(Error::NotHermitian { deviation: dev });
    }
    // Symmetrise so the solver sees an exactly Hermitian input.
    let sym = (m + m.adjoint()) * cr(0.5);
    let se = nalgebra::SymmetricEigen::new(sym);
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| se.eigenvalues[i].total_cmp(&se.eigenvalues[j]));
    let vals: Vec<f64> = order.iter().map(|&i| se.eigenvalues[i]).collect();
    let mut vecs = CMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &se.eigenvectors.column(i));
    }
    Ok((vals, vecs))
}

/// Von Neumann entropy in bits.
///
/// Eigenvalues in `[-tol::PSD, 0]` are clamped to zero; anything below
/// `-tol::PSD` is rejected. Eigenvalues under [`tol::ENTROPY_SUPPORT`]
/// contribute nothing.
pub fn entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of(rho.matrix())
}

/// [`entropy`] for a raw Hermitian unit-trace matrix.
pub fn entropy_of(m: &CMatrix) -> Result<f64> {
    let (eigs, _) = eig_hermitian(m)?;
    let mut s = 0.0;
    for &lam in &eigs {
        if lam < -tol::PSD {
            return Err(Error::NotPsd { min_eig: lam });
        }
        if lam > tol::ENTROPY_SUPPORT {
            s -= lam * lam.log2();
        }
    }
    Ok(s)
}

/// Quantum relative entropy `S(ρ‖σ) = -tr(ρ log₂ σ) - S(ρ)` in bits.
///
/// If `ρ` has weight outside the support of `σ` the divergence is infinite
/// and `f64::INFINITY` is returned.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "states have dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let (svals, svecs) = eig_hermitian(sigma.matrix())?;
    let mut cross = 0.0; // -tr(ρ log₂ σ)
    for (j, &s) in svals.iter().enumerate() {
        let v = svecs.column(j);
        let w = (v.adjoint() * rho.matrix() * v)[(0, 0)].re;
        if s <= tol::ENTROPY_SUPPORT {
            if w > 1e-9 {
                return Ok(f64::INFINITY);
            }
            continue;
        }
        cross -= w * s.log2();
    }
    Ok(cross - entropy(rho)?)
}

/// Trace distance `½‖ρ - σ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::Dimension(format!(
            "states have dimensions {} and {}",
            rho.dim(),
            sigma.dim()
        )));
    }
    let diff = rho.matrix() - sigma.matrix();
    let (eigs, _) = eig_hermitian(&diff)?;
    Ok(eigs.iter().map(|l| l.abs()).sum::<f64>() / 2.0)
}

/// Fidelity `⟨ψ|ρ|ψ⟩` of a state with a pure target.
pub fn fidelity_with_pure(rho: &DensityMatrix, psi: &PureState) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::Dimension(format!(
            "state has dimension {}, target has {}",
            rho.dim(),
            psi.dim()
        )));
    }
    let v = psi.amplitudes();
    Ok((v.adjoint() * rho.matrix() * v)[(0, 0)].re)
}

/// Trace-orthonormal Hermitian operator basis for dimension `d`.
///
/// Element 0 is `I/√d`; the remaining `d² - 1` elements are traceless
/// (generalised Gell-Mann matrices). `tr(GᵢGⱼ) = δᵢⱼ`.
pub fn hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut basis = Vec::with_capacity(d * d);
    basis.push(identity(d) * cr(1.0 / (d as f64).sqrt()));
    for k in 0..d {
        for l in (k + 1)..d {
            let mut sym = CMatrix::zeros(d, d);
            sym[(k, l)] = cr(1.0 / 2f64.sqrt());
            sym[(l, k)] = cr(1.0 / 2f64.sqrt());
            basis.push(sym);
            let mut asym = CMatrix::zeros(d, d);
            asym[(k, l)] = c(0.0, -1.0 / 2f64.sqrt());
            asym[(l, k)] = c(0.0, 1.0 / 2f64.sqrt());
            basis.push(asym);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut diag = CMatrix::zeros(d, d);
        for i in 0..l {
            diag[(i, i)] = cr(norm);
        }
        diag[(l, l)] = cr(-(l as f64) * norm);
        basis.push(diag);
    }
    basis
}

/// Checks that the supplied kets form an orthonormal set.
pub fn check_orthonormal(vectors: &[CVector]) -> Result<()> {
    let mut worst = 0.0f64;
    for (i, u) in vectors.iter().enumerate() {
        for (j, v) in vectors.iter().enumerate() {
            let g = (u.adjoint() * v)[(0, 0)];
            let target = if i == j { cr(1.0) } else { cr(0.0) };
            worst = worst.max((g - target).norm());
        }
    }
    if worst > 1e-9 {
        return Err(Error::NotOrthonormal { deviation: worst });
    }
    Ok(())
}
