//! Remote-state-preparation resources for two-qubit states.
//!
//! Everything here works off the canonical local-unitary form of a two-qubit
//! state: the correlation matrix is diagonalised by a signed-orthogonal SVD,
//! both rotations are lifted to SU(2), and the diagonal `c` is ordered by
//! decreasing square. The RSP fidelity `½(c₂² + c₃²)` and the Bell-diagonal
//! Schrödinger strengths `|c₂|`, `|c₃|` read directly off that form, and the
//! maximal-entangled-fraction decomposition splits a state into a pure
//! entangled part plus a positive, PPT remainder.

use nalgebra::Matrix3;

use crate::error::Error;
use crate::optimize::{witness_max, MeasFamilyKind, SearchSpec, Witness};
use crate::qmath::{
    c, eig_hermitian, identity, kron, pauli, trace_distance, CMatrix, DensityMatrix, PureState,
};
use crate::states::bloch_decompose;
use crate::tol;
use crate::Result;

/// A two-qubit state rotated so its correlation matrix is diagonal.
///
/// `local_u_a ⊗ local_u_b` maps the input state to the canonical one; `a` and
/// `b` are the rotated local Bloch vectors and `c` the signed correlation
/// diagonal with `c₁² ≥ c₂² ≥ c₃²`.
#[derive(Debug, Clone)]
pub struct CanonicalForm {
    pub a: [f64; 3],
    pub b: [f64; 3],
    pub c: [f64; 3],
    pub local_u_a: CMatrix,
    pub local_u_b: CMatrix,
}

impl CanonicalForm {
    /// The canonical state itself, `(U_A ⊗ U_B) ρ (U_A ⊗ U_B)†`.
    pub fn apply_to(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        rho.conjugated(&kron(&self.local_u_a, &self.local_u_b))
    }
}

/// Lifts a proper rotation to the SU(2) element acting on Bloch vectors as
/// `U (v·σ) U† = (Rv)·σ`, via the quaternion of `R`.
fn su2_from_rotation(r: &Matrix3<f64>) -> CMatrix {
    let tr = r.trace();
    let (w, x, y, z);
    if tr > 0.0 {
        let s = (tr + 1.0).sqrt() * 2.0;
        w = 0.25 * s;
        x = (r[(2, 1)] - r[(1, 2)]) / s;
        y = (r[(0, 2)] - r[(2, 0)]) / s;
        z = (r[(1, 0)] - r[(0, 1)]) / s;
    } else if r[(0, 0)] >= r[(1, 1)] && r[(0, 0)] >= r[(2, 2)] {
        let s = (1.0 + r[(0, 0)] - r[(1, 1)] - r[(2, 2)]).sqrt() * 2.0;
        x = 0.25 * s;
        w = (r[(2, 1)] - r[(1, 2)]) / s;
        y = (r[(0, 1)] + r[(1, 0)]) / s;
        z = (r[(0, 2)] + r[(2, 0)]) / s;
    } else if r[(1, 1)] >= r[(2, 2)] {
        let s = (1.0 + r[(1, 1)] - r[(0, 0)] - r[(2, 2)]).sqrt() * 2.0;
        y = 0.25 * s;
        w = (r[(0, 2)] - r[(2, 0)]) / s;
        x = (r[(0, 1)] + r[(1, 0)]) / s;
        z = (r[(1, 2)] + r[(2, 1)]) / s;
    } else {
        let s = (1.0 + r[(2, 2)] - r[(0, 0)] - r[(1, 1)]).sqrt() * 2.0;
        z = 0.25 * s;
        w = (r[(1, 0)] - r[(0, 1)]) / s;
        x = (r[(0, 2)] + r[(2, 0)]) / s;
        y = (r[(1, 2)] + r[(2, 1)]) / s;
    }
    let mut u = identity(2) * c(w, 0.0);
    u += pauli(1) * c(0.0, -x);
    u += pauli(2) * c(0.0, -y);
    u += pauli(3) * c(0.0, -z);
    u
}

fn rotate(r: &Matrix3<f64>, v: [f64; 3]) -> [f64; 3] {
    let mut out = [0.0; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i] += r[(i, j)] * v[j];
        }
    }
    out
}

/// Diagonalises the correlation matrix of a two-qubit state by local
/// unitaries.
///
/// The SVD factors are pushed into SO(3) by flipping the column of the
/// smallest singular value, moving the sign onto `c₃`; the squared ordering
/// `c₁² ≥ c₂² ≥ c₃²` survives because only signs change.
pub fn canonical_form(rho: &DensityMatrix) -> Result<CanonicalForm> {
    let form = bloch_decompose(rho)?;
    let t = Matrix3::from_fn(|i, j| form.t[i][j]);
    let svd = t.svd(true, true);
    let mut r1 = svd.u.expect("3×3 SVD always produces factors");
    let mut r2 = svd.v_t.expect("3×3 SVD always produces factors").transpose();
    let mut cv = [
        svd.singular_values[0],
        svd.singular_values[1],
        svd.singular_values[2],
    ];
    if r1.determinant() < 0.0 {
        for i in 0..3 {
            r1[(i, 2)] = -r1[(i, 2)];
        }
        cv[2] = -cv[2];
    }
    if r2.determinant() < 0.0 {
        for i in 0..3 {
            r2[(i, 2)] = -r2[(i, 2)];
        }
        cv[2] = -cv[2];
    }
    let r1t = r1.transpose();
    let r2t = r2.transpose();
    let u_a = su2_from_rotation(&r1t);
    let u_b = su2_from_rotation(&r2t);
    Ok(CanonicalForm {
        a: rotate(&r1t, form.a),
        b: rotate(&r2t, form.b),
        c: cv,
        local_u_a: u_a,
        local_u_b: u_b,
    })
}

/// RSP fidelity `F = ½(c₂² + c₃²)` in the canonical ordering.
pub fn rsp_fidelity(rho: &DensityMatrix) -> Result<f64> {
    let cf = canonical_form(rho)?;
    Ok(0.5 * (cf.c[1] * cf.c[1] + cf.c[2] * cf.c[2]))
}

/// Schrödinger strength of a Bell-diagonal state: `|c₂|` for `n = 2`
/// measurements, `|c₃|` for `n = 3`.
pub fn schrodinger_strength_bd(tau: &DensityMatrix, n: usize) -> Result<f64> {
    let form = bloch_decompose(tau)?;
    let norm3 = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    let (a_norm, b_norm) = (norm3(form.a), norm3(form.b));
    if a_norm > tol::BELL_DIAGONAL || b_norm > tol::BELL_DIAGONAL {
        return Err(Error::NotBellDiagonal { a_norm, b_norm });
    }
    let cf = canonical_form(tau)?;
    match n {
        2 => Ok(cf.c[1].abs()),
        3 => Ok(cf.c[2].abs()),
        _ => Err(Error::InvalidParameter(
            "Schrödinger strength is defined for n = 2 or n = 3".into(),
        )),
    }
}

/// A state split as `p_max |ψ_e⟩⟨ψ_e| + (1 − p_max) σ`.
#[derive(Debug, Clone)]
pub struct DecompositionResult {
    pub p_max: f64,
    pub entangled_part: PureState,
    pub residual: DensityMatrix,
    /// Whether the residual is PPT (always true when a PPT-feasible fraction
    /// exists; the fall-back maximises over the positivity constraint only).
    pub residual_ppt: bool,
    /// Best-found covariance-witness maximum of the residual, when the
    /// measurement search was requested. A search result, not a proof.
    pub residual_gamma_sup: Option<f64>,
}

/// `ρ − p P`, left unscaled: positivity and PPT of the residual can be
/// tested on it directly, avoiding the `1/(1−p)` blow-up near `p = 1`.
fn shifted(rho: &DensityMatrix, proj: &CMatrix, p: f64) -> CMatrix {
    rho.matrix() - proj * c(p, 0.0)
}

fn min_eig(m: &CMatrix) -> f64 {
    let (evals, _) = eig_hermitian(m).expect("Hermitian by construction");
    evals.into_iter().fold(f64::INFINITY, f64::min)
}

/// Partial transpose on the first qubit of a raw 4×4 matrix.
fn pt_first(m: &CMatrix) -> CMatrix {
    CMatrix::from_fn(4, 4, |r, cidx| {
        let (i, k) = (r / 2, r % 2);
        let (j, l) = (cidx / 2, cidx % 2);
        m[(2 * j + k, 2 * i + l)]
    })
}

fn psd_feasible(rho: &DensityMatrix, proj: &CMatrix, p: f64) -> bool {
    min_eig(&shifted(rho, proj, p)) >= -1e-12
}

fn joint_feasible(rho: &DensityMatrix, proj: &CMatrix, p: f64) -> bool {
    let s = shifted(rho, proj, p);
    min_eig(&s) >= -1e-12 && min_eig(&pt_first(&s)) >= -1e-12
}

fn bisect(mut lo: f64, mut hi: f64, feasible: impl Fn(f64) -> bool) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if feasible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Rebuilds the scaled residual as a density matrix, clipping eigenvalue
/// noise at the feasibility boundary.
fn residual_state(rho: &DensityMatrix, proj: &CMatrix, p: f64) -> Result<DensityMatrix> {
    if p >= 1.0 {
        return DensityMatrix::new(2, 2, identity(4) * c(0.25, 0.0));
    }
    let raw = shifted(rho, proj, p) / c(1.0 - p, 0.0);
    let (evals, vecs) = eig_hermitian(&raw)?;
    let clipped: Vec<f64> = evals.iter().map(|&v| v.max(0.0)).collect();
    let total: f64 = clipped.iter().sum();
    let mut m = CMatrix::zeros(4, 4);
    for (k, &v) in clipped.iter().enumerate() {
        let col = vecs.column(k);
        m += (&col * col.adjoint()) * c(v / total, 0.0);
    }
    DensityMatrix::new(2, 2, m)
}

/// Finds the largest fraction `p` for which `σ = (ρ − p|ψ_e⟩⟨ψ_e|)/(1−p)`
/// stays a positive, PPT state.
///
/// The PSD-and-PPT feasible set is an interval in `p` (a line through the
/// positive cone) that need not reach down to `p = 0`, so the search probes
/// a 257-point grid first and bisects from the best feasible point. When no
/// fraction admits a PPT residual at all, the positivity-only maximum is
/// returned with `residual_ppt = false`. With `check_gamma`, a 128-restart
/// measurement search reports the residual's best-found covariance witness.
pub fn max_entangled_fraction(
    rho: &DensityMatrix,
    psi_e: &PureState,
    check_gamma: bool,
    seed: u64,
) -> Result<DecompositionResult> {
    if rho.dim_a() != 2 || rho.dim_b() != 2 {
        return Err(Error::Dimension(
            "the decomposition is defined for two-qubit states".into(),
        ));
    }
    if psi_e.dim() != 4 {
        return Err(Error::Dimension(
            "the entangled part must be a two-qubit pure state".into(),
        ));
    }
    let proj = psi_e.projector();
    if min_eig(&pt_first(&proj)) > -tol::PSD {
        return Err(Error::NotEntangled);
    }

    let pure_target = DensityMatrix::new(2, 2, proj.clone())?;
    let (p_max, residual_ppt) = if trace_distance(rho, &pure_target)? <= 1e-9 {
        (1.0, true)
    } else {
        let grid_best = (0..256)
            .rev()
            .map(|k| k as f64 / 256.0)
            .find(|&p| joint_feasible(rho, &proj, p));
        match grid_best {
            Some(p_lo) => {
                let hi = (p_lo + 1.0 / 256.0).min(1.0 - 1e-12);
                (
                    bisect(p_lo, hi, |p| joint_feasible(rho, &proj, p)),
                    true,
                )
            }
            None => {
                let p = bisect(0.0, 1.0 - 1e-12, |p| psd_feasible(rho, &proj, p));
                (p, false)
            }
        }
    };

    let residual = residual_state(rho, &proj, p_max)?;
    let residual_gamma_sup = if check_gamma {
        let spec = SearchSpec::new(MeasFamilyKind::Projective.bounds(), seed).with_restarts(128);
        let report = witness_max(&residual, Witness::Gamma, MeasFamilyKind::Projective, &spec)?;
        Some(report.value)
    } else {
        None
    };
    Ok(DecompositionResult {
        p_max,
        entangled_part: psi_e.clone(),
        residual,
        residual_ppt,
        residual_gamma_sup,
    })
}
