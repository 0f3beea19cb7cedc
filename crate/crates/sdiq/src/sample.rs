//! Seeded random generators for states, operators and boxes.
//!
//! Everything routes through [`rng`], a counter-seeded ChaCha stream, so any
//! test or search that draws randomness is reproducible from `(seed, stream)`
//! alone — no global RNG state anywhere in the crate.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::boxes::{BlochParam, MeasurementFamily};
use crate::qmath::{c, cr, eig_hermitian, kron, CMatrix, CVector, DensityMatrix, PureState};

/// Deterministic RNG for a `(seed, stream)` pair.
///
/// Separate streams of the same seed are independent, which lets restart `i`
/// of a multi-start search own stream `i` without coupling to its neighbours.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Standard complex Gaussian entry.
fn ginibre_entry<R: Rng>(rng: &mut R) -> Complex64 {
    // Box-Muller; two uniforms per component.
    let gauss = |rng: &mut R| -> f64 {
        let u: f64 = rng.gen_range(f64::EPSILON..1.0);
        let v: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        (-2.0 * u.ln()).sqrt() * v.cos()
    };
    c(gauss(rng), gauss(rng))
}

/// `d×d` matrix of i.i.d. complex Gaussians.
pub fn ginibre<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| ginibre_entry(rng))
}

/// Random Hermitian matrix `(G + G†)/2`.
pub fn random_hermitian<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d);
    (&g + g.adjoint()) * cr(0.5)
}

/// Haar-like random unitary via Gram-Schmidt on a Ginibre matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, d: usize) -> CMatrix {
    let g = ginibre(rng, d);
    let mut cols: Vec<CVector> = Vec::with_capacity(d);
    for j in 0..d {
        let mut v = g.column(j).clone_owned();
        for u in &cols {
            let proj = (u.adjoint() * &v)[(0, 0)];
            v -= u * proj;
        }
        let n = v.norm();
        cols.push(v / cr(n));
    }
    CMatrix::from_columns(&cols)
}

/// Random pure state, uniform on the sphere in `C^d`.
pub fn random_pure<R: Rng>(rng: &mut R, d: usize) -> PureState {
    let amps: Vec<Complex64> = (0..d).map(|_| ginibre_entry(rng)).collect();
    PureState::from_amplitudes(&amps).expect("Gaussian vector is nonzero almost surely")
}

/// Full-rank random density matrix `GG†/tr` on `C^{da} ⊗ C^{db}`.
pub fn random_density<R: Rng>(rng: &mut R, dim_a: usize, dim_b: usize) -> DensityMatrix {
    let d = dim_a * dim_b;
    let g = ginibre(rng, d);
    let p = &g * g.adjoint();
    let t = p.trace().re;
    DensityMatrix::new(dim_a, dim_b, p / cr(t)).expect("Wishart matrix is a valid state")
}

/// Random point in the closed Bloch ball of the given radius.
pub fn random_bloch<R: Rng>(rng: &mut R, radius: f64) -> [f64; 3] {
    loop {
        let v = [
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
            rng.gen_range(-1.0..=1.0),
        ];
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 <= 1.0 {
            return [v[0] * radius, v[1] * radius, v[2] * radius];
        }
    }
}

/// Random unit vector in `R³`.
pub fn random_unit3<R: Rng>(rng: &mut R) -> [f64; 3] {
    loop {
        let v = random_bloch(rng, 1.0);
        let n: f64 = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if n > 1e-3 {
            return [v[0] / n, v[1] / n, v[2] / n];
        }
    }
}

/// Random probability vector of length `n` (normalised uniforms).
pub fn random_simplex<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    let s: f64 = w.iter().sum();
    for x in &mut w {
        *x /= s;
    }
    w
}

/// Random separable two-qubit state: a mixture of a few product states.
pub fn random_separable<R: Rng>(rng: &mut R, terms: usize) -> DensityMatrix {
    let w = random_simplex(rng, terms);
    let mut m = CMatrix::zeros(4, 4);
    for &wk in &w {
        let a = random_pure(rng, 2).projector();
        let b = random_pure(rng, 2).projector();
        m += kron(&a, &b) * cr(wk);
    }
    DensityMatrix::new(2, 2, m).expect("mixture of product states is a valid state")
}

/// Random dichotomic qubit POVM setting with noise: draws `(γ, η, û)` inside
/// the positivity region `0 ≤ γ ± η/2 ≤ 1`, staying clear of the degenerate
/// η = 0 edge so both effects keep an informative part.
pub fn random_bloch_param<R: Rng>(rng: &mut R) -> BlochParam {
    let gamma: f64 = rng.gen_range(0.1..0.9);
    let eta_max = 2.0 * gamma.min(1.0 - gamma);
    let eta = rng.gen_range(0.2 * eta_max..eta_max);
    BlochParam {
        gamma,
        eta,
        axis: random_unit3(rng),
    }
}

/// Family of `n_settings` random dichotomic qubit POVMs.
pub fn random_qubit_povms<R: Rng>(rng: &mut R, n_settings: usize) -> MeasurementFamily {
    let params = (0..n_settings).map(|_| random_bloch_param(rng)).collect();
    MeasurementFamily::qubit_bloch(params).expect("sampled parameters satisfy POVM bounds")
}

/// One random POVM on `C^d`: Wishart blocks `A_a A_a†` whitened by the
/// inverse square root of their sum, so the effects are PSD and complete.
pub fn random_povm<R: Rng>(rng: &mut R, d: usize, n_outcomes: usize) -> Vec<CMatrix> {
    let blocks: Vec<CMatrix> = (0..n_outcomes)
        .map(|_| {
            let g = ginibre(rng, d);
            &g * g.adjoint()
        })
        .collect();
    let mut total = CMatrix::zeros(d, d);
    for b in &blocks {
        total += b;
    }
    let (eigs, vecs) = eig_hermitian(&total).expect("Wishart sum is Hermitian");
    let mut inv_sqrt = CMatrix::zeros(d, d);
    for (k, &lam) in eigs.iter().enumerate() {
        let col = vecs.column(k);
        inv_sqrt += (col * col.adjoint()) * cr(lam.sqrt().recip());
    }
    blocks.iter().map(|b| &inv_sqrt * b * &inv_sqrt).collect()
}

/// Family of random `n_outcomes`-outcome POVMs on `C^d`.
pub fn random_measurement_family<R: Rng>(
    rng: &mut R,
    d: usize,
    n_settings: usize,
    n_outcomes: usize,
) -> MeasurementFamily {
    let settings = (0..n_settings)
        .map(|_| random_povm(rng, d, n_outcomes))
        .collect();
    MeasurementFamily::from_effects(settings).expect("whitened Wishart blocks form a POVM")
}

/// Random classical-quantum state: computational flags on `A`, random mixed
/// states on `B`, random weights.
pub fn random_cq<R: Rng>(rng: &mut R, dim_a: usize, dim_b: usize) -> DensityMatrix {
    let w = random_simplex(rng, dim_a);
    let flags: Vec<CVector> = (0..dim_a).map(|i| crate::qmath::basis_ket(dim_a, i)).collect();
    let states: Vec<DensityMatrix> = (0..dim_a)
        .map(|_| random_density(rng, dim_b, 1))
        .collect();
    crate::states::cq_state(&w, &flags, &states).expect("sampled ensemble is valid")
}

/// Random quantum-classical state: random mixed states on `A`, computational
/// flags on `B`, random weights.
pub fn random_qc<R: Rng>(rng: &mut R, dim_a: usize, dim_b: usize) -> DensityMatrix {
    let w = random_simplex(rng, dim_b);
    let flags: Vec<CVector> = (0..dim_b).map(|i| crate::qmath::basis_ket(dim_b, i)).collect();
    let states: Vec<DensityMatrix> = (0..dim_b)
        .map(|_| random_density(rng, dim_a, 1))
        .collect();
    crate::states::qc_state(&w, &states, &flags).expect("sampled ensemble is valid")
}
