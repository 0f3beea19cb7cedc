//! Bounded-cardinality hidden-variable models and fits.
//!
//! A box is *superlocal* (resp. *superunsteerable*) when it is Bell-local
//! (unsteerable) yet no LHV (LHV-LHS) model with hidden-variable cardinality
//! `d_λ ≤ d_min` reproduces it. This module makes that operational: it fits
//! bounded-cardinality models by alternating exactly-solved block updates
//! from many seeded starts, tests membership in the unbounded local polytope
//! by nonnegative least squares over its 16 deterministic vertices, and
//! combines fits with the analytic witnesses into a verdict.
//!
//! A failed fit is never treated as proof of infeasibility — certification
//! always comes from a witness — while a successful fit is constructive and
//! checked by replaying the model's box.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::boxes::{
    born_box, chsh, mermin_strength, q_witness, steering_f2, Behavior, MeasurementFamily,
};
use crate::error::Error;
use crate::qmath::{partial_trace, pauli, qubit_from_bloch, CMatrix, DensityMatrix, Subsystem};
use crate::sample;
use crate::tol;
use crate::Result;

/// Weight of the hidden-state consistency penalty in LHV-LHS fits.
const LHS_PENALTY: f64 = 1e3;

/// Largest block size solved by exact active-pattern enumeration; larger
/// blocks fall back to projected gradient descent.
const ENUM_LIMIT: usize = 6;

fn check_dichotomic_two_settings(bx: &Behavior) -> Result<()> {
    if bx.n_settings() != (2, 2) || bx.n_outcomes() != (2, 2) {
        return Err(Error::InvalidBox(
            "model fitting supports two dichotomic settings per side".into(),
        ));
    }
    Ok(())
}

fn check_distribution(p: &[f64]) -> Result<()> {
    let sum: f64 = p.iter().sum();
    if p.iter().any(|&v| v < -1e-10) || (sum - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidDistribution { sum });
    }
    Ok(())
}

/// Local hidden-variable model with `d_λ` components: the box it generates
/// is `p(a,b|x,y) = Σ_λ p_λ p(a|x,λ) p(b|y,λ)`.
#[derive(Debug, Clone)]
pub struct LhvModel {
    pub d_lambda: usize,
    /// `p_λ`.
    pub weights: Vec<f64>,
    /// `p(a|x,λ)` indexed `[λ][x][a]`.
    pub alice_responses: Vec<Vec<Vec<f64>>>,
    /// `p(b|y,λ)` indexed `[λ][y][b]`.
    pub bob_responses: Vec<Vec<Vec<f64>>>,
}

impl LhvModel {
    pub fn new(
        weights: Vec<f64>,
        alice_responses: Vec<Vec<Vec<f64>>>,
        bob_responses: Vec<Vec<Vec<f64>>>,
    ) -> Result<Self> {
        let d = weights.len();
        if d == 0 || alice_responses.len() != d || bob_responses.len() != d {
            return Err(Error::Dimension(
                "weights and response tables must share the component count".into(),
            ));
        }
        check_distribution(&weights)?;
        for table in alice_responses.iter().chain(&bob_responses) {
            for col in table {
                check_distribution(col)?;
            }
        }
        Ok(Self {
            d_lambda: d,
            weights,
            alice_responses,
            bob_responses,
        })
    }

    /// The box this model generates.
    pub fn predicted_box(&self) -> Result<Behavior> {
        Behavior::from_fn(2, 2, 2, 2, |a, b, x, y| {
            (0..self.d_lambda)
                .map(|l| {
                    self.weights[l] * self.alice_responses[l][x][a] * self.bob_responses[l][y][b]
                })
                .sum()
        })
    }
}

/// LHV-LHS model: Alice's side stays a response table, Bob's side is a
/// hidden qubit state per `λ` measured by his trusted POVMs, so
/// `p(a,b|x,y) = Σ_λ p_λ p(a|x,λ) tr(M_{b|y} ρ_λ)`.
#[derive(Debug, Clone)]
pub struct LhvLhsModel {
    pub d_lambda: usize,
    pub weights: Vec<f64>,
    /// `p(a|x,λ)` indexed `[λ][x][a]`.
    pub alice_responses: Vec<Vec<Vec<f64>>>,
    /// Hidden qubit states `ρ_λ`.
    pub bob_hidden_states: Vec<DensityMatrix>,
    /// Bob's fixed trusted measurements.
    pub bob_povms: MeasurementFamily,
}

impl LhvLhsModel {
    pub fn new(
        weights: Vec<f64>,
        alice_responses: Vec<Vec<Vec<f64>>>,
        bob_hidden_states: Vec<DensityMatrix>,
        bob_povms: MeasurementFamily,
    ) -> Result<Self> {
        let d = weights.len();
        if d == 0 || alice_responses.len() != d || bob_hidden_states.len() != d {
            return Err(Error::Dimension(
                "weights, responses and hidden states must share the component count".into(),
            ));
        }
        check_distribution(&weights)?;
        for table in &alice_responses {
            for col in table {
                check_distribution(col)?;
            }
        }
        if bob_hidden_states.iter().any(|r| r.dim() != 2) {
            return Err(Error::Dimension("hidden states must be qubits".into()));
        }
        if bob_povms.dim() != 2 {
            return Err(Error::Dimension("trusted POVMs must act on a qubit".into()));
        }
        Ok(Self {
            d_lambda: d,
            weights,
            alice_responses,
            bob_hidden_states,
            bob_povms,
        })
    }

    /// The box this model generates.
    pub fn predicted_box(&self) -> Result<Behavior> {
        Behavior::from_fn(2, 2, 2, 2, |a, b, x, y| {
            (0..self.d_lambda)
                .map(|l| {
                    let born = (self.bob_povms.effect(y, b)
                        * self.bob_hidden_states[l].matrix())
                    .trace()
                    .re;
                    self.weights[l] * self.alice_responses[l][x][a] * born
                })
                .sum()
        })
    }

    /// Frobenius distance between `Σ_λ p_λ ρ_λ` and the target marginal.
    pub fn consistency_residual(&self, rho_b: &DensityMatrix) -> f64 {
        let mut avg = CMatrix::zeros(2, 2);
        for (w, rho) in self.weights.iter().zip(&self.bob_hidden_states) {
            avg += rho.matrix() * crate::qmath::cr(*w);
        }
        (avg - rho_b.matrix()).norm()
    }
}

/// Either model kind, as produced by the fitters.
#[derive(Debug, Clone)]
pub enum FitModel {
    Lhv(LhvModel),
    LhvLhs(LhvLhsModel),
}

/// Outcome of a model fit.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub model: FitModel,
    /// L2 distance between the target box and the model box.
    pub residual: f64,
    /// Hidden-state consistency gap, for LHV-LHS fits.
    pub lhs_residual: Option<f64>,
    /// Whether the residual clears the representability threshold.
    pub converged: bool,
    pub restarts_used: usize,
    pub seed: u64,
}

// ---------------------------------------------------------------------------
// Small exact least-squares blocks.

/// Flattened 16-entry box vector in a fixed `(a, b, x, y)` order.
fn box_vec(bx: &Behavior) -> DVector<f64> {
    DVector::from_fn(16, |i, _| {
        let (a, b, x, y) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
        bx.prob(a, b, x, y)
    })
}

fn flat_index(a: usize, b: usize, x: usize, y: usize) -> usize {
    (a << 3) | (b << 2) | (x << 1) | y
}

/// `min ‖Ax − t‖²` over the box `[0, 1]^k` by enumerating active-bound
/// patterns (exact for `k ≤ ENUM_LIMIT`).
fn box_ls(a: &DMatrix<f64>, t: &DVector<f64>) -> DVector<f64> {
    let k = a.ncols();
    if k > ENUM_LIMIT {
        return projected_gradient(a, t, |x| {
            for v in x.iter_mut() {
                *v = v.clamp(0.0, 1.0);
            }
        });
    }
    let mut best_x = DVector::from_element(k, 0.5);
    let mut best_val = (a * &best_x - t).norm_squared();
    let patterns = 3usize.pow(k as u32);
    for pat in 0..patterns {
        let mut code = pat;
        let mut fixed = vec![None; k];
        let mut free = Vec::new();
        for i in 0..k {
            match code % 3 {
                0 => free.push(i),
                1 => fixed[i] = Some(0.0),
                _ => fixed[i] = Some(1.0),
            }
            code /= 3;
        }
        let mut x = DVector::zeros(k);
        for (i, f) in fixed.iter().enumerate() {
            if let Some(v) = f {
                x[i] = *v;
            }
        }
        if !free.is_empty() {
            // Solve for the free block with the bound columns moved to the rhs.
            let af = a.select_columns(&free);
            let rhs = t - a * &x;
            match af.clone().svd(true, true).solve(&rhs, 1e-13) {
                Ok(sol) => {
                    for (j, &i) in free.iter().enumerate() {
                        x[i] = sol[j].clamp(0.0, 1.0);
                    }
                }
                Err(_) => continue,
            }
        }
        let val = (a * &x - t).norm_squared();
        if val < best_val {
            best_val = val;
            best_x = x;
        }
    }
    best_x
}

/// `min ‖Ax − t‖²` over the probability simplex by enumerating supports
/// (exact for `k ≤ ENUM_LIMIT`).
fn simplex_ls(a: &DMatrix<f64>, t: &DVector<f64>) -> DVector<f64> {
    let k = a.ncols();
    if k == 1 {
        return DVector::from_element(1, 1.0);
    }
    if k > ENUM_LIMIT {
        let x = nnls(&augment_sum_row(a, 8.0), &augment_rhs(t, 8.0), 6 * k);
        return normalise_simplex(x);
    }
    let mut best: Option<(f64, DVector<f64>)> = None;
    for support in 1..(1usize << k) {
        let idx: Vec<usize> = (0..k).filter(|i| support & (1 << i) != 0).collect();
        let m = idx.len();
        let asub = a.select_columns(&idx);
        // KKT system of the equality-constrained least squares on the support.
        let mut kkt = DMatrix::zeros(m + 1, m + 1);
        let gram = asub.transpose() * &asub * 2.0;
        kkt.view_mut((0, 0), (m, m)).copy_from(&gram);
        for i in 0..m {
            kkt[(i, m)] = 1.0;
            kkt[(m, i)] = 1.0;
        }
        let mut rhs = DVector::zeros(m + 1);
        rhs.rows_mut(0, m).copy_from(&(asub.transpose() * t * 2.0));
        rhs[m] = 1.0;
        let Some(sol) = kkt.lu().solve(&rhs) else {
            continue;
        };
        if (0..m).any(|i| sol[i] < -1e-12) {
            continue;
        }
        let mut x = DVector::zeros(k);
        for (j, &i) in idx.iter().enumerate() {
            x[i] = sol[j].max(0.0);
        }
        let x = normalise_simplex(x);
        let val = (a * &x - t).norm_squared();
        if best.as_ref().map_or(true, |(bv, _)| val < *bv) {
            best = Some((val, x));
        }
    }
    best.map(|(_, x)| x)
        .unwrap_or_else(|| DVector::from_element(k, 1.0 / k as f64))
}

fn normalise_simplex(mut x: DVector<f64>) -> DVector<f64> {
    for v in x.iter_mut() {
        *v = v.max(0.0);
    }
    let s: f64 = x.iter().sum();
    if s > 1e-12 {
        x /= s;
    } else {
        let k = x.len();
        x.fill(1.0 / k as f64);
    }
    x
}

fn augment_sum_row(a: &DMatrix<f64>, kappa: f64) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(a.nrows() + 1, a.ncols());
    out.view_mut((0, 0), (a.nrows(), a.ncols())).copy_from(a);
    for j in 0..a.ncols() {
        out[(a.nrows(), j)] = kappa;
    }
    out
}

fn augment_rhs(t: &DVector<f64>, kappa: f64) -> DVector<f64> {
    let mut out = DVector::zeros(t.len() + 1);
    out.rows_mut(0, t.len()).copy_from(t);
    out[t.len()] = kappa;
    out
}

/// Lawson-Hanson nonnegative least squares.
fn nnls(a: &DMatrix<f64>, b: &DVector<f64>, max_iters: usize) -> DVector<f64> {
    let n = a.ncols();
    let mut passive = vec![false; n];
    let mut x = DVector::<f64>::zeros(n);
    for _ in 0..max_iters {
        let grad = a.transpose() * (b - a * &x);
        let mut candidate: Option<(usize, f64)> = None;
        for j in 0..n {
            if !passive[j] && grad[j] > 1e-11 {
                if candidate.map_or(true, |(_, g)| grad[j] > g) {
                    candidate = Some((j, grad[j]));
                }
            }
        }
        let Some((enter, _)) = candidate else { break };
        passive[enter] = true;
        loop {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let asub = a.select_columns(&idx);
            let z = match asub.clone().svd(true, true).solve(b, 1e-13) {
                Ok(z) => z,
                Err(_) => {
                    passive[enter] = false;
                    break;
                }
            };
            if z.iter().all(|&v| v > 1e-13) {
                x.fill(0.0);
                for (j, &i) in idx.iter().enumerate() {
                    x[i] = z[j];
                }
                break;
            }
            // Step back along the segment to the first variable hitting zero.
            let mut alpha = f64::INFINITY;
            for (j, &i) in idx.iter().enumerate() {
                if z[j] <= 1e-13 {
                    let denom = x[i] - z[j];
                    if denom > 1e-15 {
                        alpha = alpha.min(x[i] / denom);
                    } else {
                        alpha = 0.0;
                    }
                }
            }
            let alpha = alpha.clamp(0.0, 1.0);
            for (j, &i) in idx.iter().enumerate() {
                x[i] += alpha * (z[j] - x[i]);
                if x[i] < 1e-12 {
                    x[i] = 0.0;
                    passive[i] = false;
                }
            }
        }
    }
    x
}

/// Projected gradient fallback for blocks too large to enumerate.
fn projected_gradient<P: Fn(&mut DVector<f64>)>(
    a: &DMatrix<f64>,
    t: &DVector<f64>,
    project: P,
) -> DVector<f64> {
    let k = a.ncols();
    let gram = a.transpose() * a;
    let lip = 2.0 * gram.norm() + 1e-12;
    let atb = a.transpose() * t;
    let mut x = DVector::from_element(k, 0.5);
    project(&mut x);
    for _ in 0..800 {
        let grad = (&gram * &x - &atb) * 2.0;
        x -= grad / lip;
        project(&mut x);
    }
    x
}

/// `min ‖Ar − c‖²` over the unit ball in `R³` (trust-region style: interior
/// solve first, else bisection on the norm multiplier).
fn ball_ls(a: &DMatrix<f64>, c: &DVector<f64>) -> DVector<f64> {
    let q = a.transpose() * a;
    let rhs = a.transpose() * c;
    if let Some(r) = q.clone().lu().solve(&rhs) {
        if r.norm() <= 1.0 {
            return r;
        }
    }
    let solve_mu = |mu: f64| -> Option<DVector<f64>> {
        let mut qm = q.clone();
        for i in 0..3 {
            qm[(i, i)] += mu;
        }
        qm.lu().solve(&rhs)
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while solve_mu(hi).map_or(true, |r| r.norm() > 1.0) {
        hi *= 4.0;
        if hi > 1e12 {
            break;
        }
    }
    for _ in 0..120 {
        let mid = 0.5 * (lo + hi);
        match solve_mu(mid) {
            Some(r) if r.norm() > 1.0 => lo = mid,
            _ => hi = mid,
        }
    }
    let r = solve_mu(hi).unwrap_or_else(|| DVector::zeros(3));
    if r.norm() > 1.0 {
        &r / r.norm()
    } else {
        r
    }
}

// ---------------------------------------------------------------------------
// Local polytope.

/// The 16 deterministic boxes of the two-setting dichotomic scenario,
/// flattened into columns. Strategy `k = 4·iA + iB` answers
/// `a = (iA >> x) & 1`, `b = (iB >> y) & 1`.
fn vertex_matrix() -> DMatrix<f64> {
    DMatrix::from_fn(16, 16, |row, k| {
        let (a, b, x, y) = ((row >> 3) & 1, (row >> 2) & 1, (row >> 1) & 1, row & 1);
        let (ia, ib) = (k / 4, k % 4);
        let hit = ((ia >> x) & 1 == a) && ((ib >> y) & 1 == b);
        if hit {
            1.0
        } else {
            0.0
        }
    })
}

/// Deterministic-strategy weights reproducing the box as closely as
/// possible, by nonnegative least squares with a soft normalisation row.
fn polytope_weights(bx: &Behavior) -> DVector<f64> {
    let v = augment_sum_row(&vertex_matrix(), 8.0);
    let t = augment_rhs(&box_vec(bx), 8.0);
    normalise_simplex(nnls(&v, &t, 200))
}

/// Membership of a two-setting dichotomic box in the local polytope.
///
/// Returns the verdict together with the L2 distance to the closest convex
/// combination of the 16 deterministic strategies.
pub fn local_polytope_member(bx: &Behavior) -> Result<(bool, f64)> {
    check_dichotomic_two_settings(bx)?;
    let w = polytope_weights(bx);
    let distance = (vertex_matrix() * w - box_vec(bx)).norm();
    Ok((distance <= tol::POLYTOPE, distance))
}

// ---------------------------------------------------------------------------
// LHV fitting.

#[derive(Clone)]
struct LhvParams {
    w: DVector<f64>,
    /// `p(0|x, λ)` as `(λ, x)`.
    va: DMatrix<f64>,
    /// `p(0|y, λ)` as `(λ, y)`.
    vb: DMatrix<f64>,
}

impl LhvParams {
    fn response(v: &DMatrix<f64>, l: usize, s: usize, o: usize) -> f64 {
        if o == 0 {
            v[(l, s)]
        } else {
            1.0 - v[(l, s)]
        }
    }

    fn residual2(&self, t: &DVector<f64>) -> f64 {
        let k = self.w.len();
        let mut sum = 0.0;
        for i in 0..16 {
            let (a, b, x, y) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
            let mut p = 0.0;
            for l in 0..k {
                p += self.w[l]
                    * Self::response(&self.va, l, x, a)
                    * Self::response(&self.vb, l, y, b);
            }
            let d = p - t[i];
            sum += d * d;
        }
        sum
    }
}

/// One full cycle of exact block updates: weights on the simplex, then each
/// side's response column under box constraints.
fn lhv_sweep(p: &mut LhvParams, t: &DVector<f64>) {
    let k = p.w.len();

    // Weights: the model is linear in w.
    let a = DMatrix::from_fn(16, k, |i, l| {
        let (a_, b, x, y) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
        LhvParams::response(&p.va, l, x, a_) * LhvParams::response(&p.vb, l, y, b)
    });
    p.w = simplex_ls(&a, t);

    // Alice block for each setting x: rows are the 8 entries touching x.
    for x in 0..2 {
        let mut a = DMatrix::zeros(8, k);
        let mut rhs = DVector::zeros(8);
        let mut row = 0;
        for aa in 0..2 {
            for b in 0..2 {
                for y in 0..2 {
                    let sign = if aa == 0 { 1.0 } else { -1.0 };
                    let mut base = 0.0;
                    for l in 0..k {
                        let cb = p.w[l] * LhvParams::response(&p.vb, l, y, b);
                        a[(row, l)] = sign * cb;
                        if aa == 1 {
                            base += cb;
                        }
                    }
                    rhs[row] = t[flat_index(aa, b, x, y)] - base;
                    row += 1;
                }
            }
        }
        let sol = box_ls(&a, &rhs);
        for l in 0..k {
            p.va[(l, x)] = sol[l];
        }
    }

    // Bob block, mirrored.
    for y in 0..2 {
        let mut a = DMatrix::zeros(8, k);
        let mut rhs = DVector::zeros(8);
        let mut row = 0;
        for aa in 0..2 {
            for b in 0..2 {
                for x in 0..2 {
                    let sign = if b == 0 { 1.0 } else { -1.0 };
                    let mut base = 0.0;
                    for l in 0..k {
                        let ca = p.w[l] * LhvParams::response(&p.va, l, x, aa);
                        a[(row, l)] = sign * ca;
                        if b == 1 {
                            base += ca;
                        }
                    }
                    rhs[row] = t[flat_index(aa, b, x, y)] - base;
                    row += 1;
                }
            }
        }
        let sol = box_ls(&a, &rhs);
        for l in 0..k {
            p.vb[(l, y)] = sol[l];
        }
    }
}

fn als_descend(p: &mut LhvParams, t: &DVector<f64>, max_sweeps: usize) -> f64 {
    let mut prev = p.residual2(t);
    for _ in 0..max_sweeps {
        lhv_sweep(p, t);
        let cur = p.residual2(t);
        if prev - cur < 1e-17 {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Start built from the polytope decomposition: merge the 16 deterministic
/// strategies by Alice's part (exact for any local box at `k = 4`), then
/// keep the `k` heaviest components.
fn polytope_start(bx: &Behavior, k: usize) -> LhvParams {
    let w16 = polytope_weights(bx);
    let mut merged: Vec<(f64, [f64; 2], [f64; 2])> = Vec::with_capacity(4);
    for ia in 0..4 {
        let wa: f64 = (0..4).map(|ib| w16[4 * ia + ib]).sum();
        let alice = [
            if (ia >> 0) & 1 == 0 { 1.0 } else { 0.0 },
            if (ia >> 1) & 1 == 0 { 1.0 } else { 0.0 },
        ];
        let mut bob = [0.5, 0.5];
        if wa > 1e-12 {
            for y in 0..2 {
                bob[y] = (0..4)
                    .map(|ib| w16[4 * ia + ib] * if (ib >> y) & 1 == 0 { 1.0 } else { 0.0 })
                    .sum::<f64>()
                    / wa;
            }
        }
        merged.push((wa, alice, bob));
    }
    merged.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    merged.truncate(k);
    let total: f64 = merged.iter().map(|m| m.0).sum();
    let mut w = DVector::from_element(k, 1.0 / k as f64);
    let mut va = DMatrix::from_element(k, 2, 0.5);
    let mut vb = DMatrix::from_element(k, 2, 0.5);
    for (l, (wl, alice, bob)) in merged.iter().enumerate() {
        if total > 1e-12 {
            w[l] = wl / total;
        }
        for s in 0..2 {
            va[(l, s)] = alice[s];
            vb[(l, s)] = bob[s];
        }
    }
    LhvParams {
        w: normalise_simplex(w),
        va,
        vb,
    }
}

/// Start from the target's own marginals — the exact optimum for product
/// boxes at `k = 1`.
fn marginal_start(bx: &Behavior, k: usize) -> LhvParams {
    LhvParams {
        w: DVector::from_element(k, 1.0 / k as f64),
        va: DMatrix::from_fn(k, 2, |_, x| bx.alice_marginal(0, x)),
        vb: DMatrix::from_fn(k, 2, |_, y| bx.bob_marginal(0, y)),
    }
}

fn random_lhv_start<R: rand::Rng>(rng: &mut R, k: usize) -> LhvParams {
    let w = DVector::from_vec(sample::random_simplex(rng, k));
    let va = DMatrix::from_fn(k, 2, |_, _| rng.gen_range(0.0..1.0));
    let vb = DMatrix::from_fn(k, 2, |_, _| rng.gen_range(0.0..1.0));
    LhvParams { w, va, vb }
}

/// Fits an LHV model with at most `d_lambda` components.
///
/// The bounded-cardinality model class is downward closed — dropping a
/// component weight to zero embeds every smaller class — so the fit explores
/// every cardinality `k ≤ d_λ`, zero-pads the winner, and is therefore
/// monotone in `d_λ` by construction.
pub fn lhv_fit(bx: &Behavior, d_lambda: usize, restarts: usize, seed: u64) -> Result<FitResult> {
    check_dichotomic_two_settings(bx)?;
    if d_lambda == 0 || d_lambda > 16 {
        return Err(Error::InvalidParameter(
            "component count must lie in 1..=16".into(),
        ));
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be ≥ 1".into()));
    }
    let t = box_vec(bx);
    let mut best: Option<(f64, LhvParams, usize)> = None;
    for k in 1..=d_lambda {
        let mut starts: Vec<LhvParams> = vec![marginal_start(bx, k), polytope_start(bx, k)];
        for i in 0..restarts {
            let mut r = sample::rng(seed, ((k as u64) << 32) | i as u64);
            starts.push(random_lhv_start(&mut r, k));
        }
        for mut p in starts {
            let val = als_descend(&mut p, &t, 160);
            if best.as_ref().map_or(true, |(bv, _, _)| val < *bv) {
                best = Some((val, p, k));
            }
        }
    }
    let (residual2, p, k) = best.expect("at least one start ran");

    let mut weights = vec![0.0; d_lambda];
    let mut alice = vec![vec![vec![0.5, 0.5]; 2]; d_lambda];
    let mut bob = vec![vec![vec![0.5, 0.5]; 2]; d_lambda];
    for l in 0..k {
        weights[l] = p.w[l].max(0.0);
        for s in 0..2 {
            let v = p.va[(l, s)].clamp(0.0, 1.0);
            alice[l][s] = vec![v, 1.0 - v];
            let v = p.vb[(l, s)].clamp(0.0, 1.0);
            bob[l][s] = vec![v, 1.0 - v];
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let model = LhvModel::new(weights, alice, bob)?;
    let residual = residual2.max(0.0).sqrt();
    Ok(FitResult {
        model: FitModel::Lhv(model),
        residual,
        lhs_residual: None,
        converged: residual <= tol::FIT_RESIDUAL,
        restarts_used: restarts,
        seed,
    })
}

// ---------------------------------------------------------------------------
// LHV-LHS fitting.

#[derive(Clone)]
struct LhsParams {
    w: DVector<f64>,
    va: DMatrix<f64>,
    /// Bloch vectors of the hidden states, one row per `λ`.
    r: DMatrix<f64>,
}

/// Bob's effects reduced to affine functions of a Bloch vector:
/// `tr(M ρ(r)) = m0 + m⃗·r`, stored per `(y, b)`.
struct EffectAffine {
    m0: [[f64; 2]; 2],
    mvec: [[[f64; 3]; 2]; 2],
}

impl EffectAffine {
    fn from_family(fam: &MeasurementFamily) -> Self {
        let mut m0 = [[0.0; 2]; 2];
        let mut mvec = [[[0.0; 3]; 2]; 2];
        for y in 0..2 {
            for b in 0..2 {
                let m = fam.effect(y, b);
                m0[y][b] = 0.5 * m.trace().re;
                for i in 0..3 {
                    mvec[y][b][i] = 0.5 * (m * pauli(i + 1)).trace().re;
                }
            }
        }
        Self { m0, mvec }
    }

    fn born(&self, y: usize, b: usize, r: &DMatrix<f64>, l: usize) -> f64 {
        self.m0[y][b]
            + (0..3)
                .map(|i| self.mvec[y][b][i] * r[(l, i)])
                .sum::<f64>()
    }
}

impl LhsParams {
    fn residual2(&self, t: &DVector<f64>, eff: &EffectAffine) -> f64 {
        let k = self.w.len();
        let mut sum = 0.0;
        for i in 0..16 {
            let (a, b, x, y) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
            let mut p = 0.0;
            for l in 0..k {
                p += self.w[l]
                    * LhvParams::response(&self.va, l, x, a)
                    * eff.born(y, b, &self.r, l);
            }
            let d = p - t[i];
            sum += d * d;
        }
        sum
    }

    /// Full objective: box residual plus the weighted consistency penalty
    /// `‖Σ w_λ r_λ − b⃗‖²/2` (the Frobenius gap of the qubit averages).
    fn objective(&self, t: &DVector<f64>, eff: &EffectAffine, b_target: &[f64; 3]) -> f64 {
        let k = self.w.len();
        let mut gap2 = 0.0;
        for i in 0..3 {
            let avg: f64 = (0..k).map(|l| self.w[l] * self.r[(l, i)]).sum();
            let d = avg - b_target[i];
            gap2 += d * d;
        }
        self.residual2(t, eff) + LHS_PENALTY * 0.5 * gap2
    }
}

fn lhs_sweep(p: &mut LhsParams, t: &DVector<f64>, eff: &EffectAffine, b_target: &[f64; 3]) {
    let k = p.w.len();
    let pen = (LHS_PENALTY * 0.5).sqrt();

    // Weights: linear in w through both the box and the penalty.
    let mut a = DMatrix::zeros(19, k);
    let mut rhs = DVector::zeros(19);
    for i in 0..16 {
        let (aa, b, x, y) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
        for l in 0..k {
            a[(i, l)] = LhvParams::response(&p.va, l, x, aa) * eff.born(y, b, &p.r, l);
        }
        rhs[i] = t[i];
    }
    for i in 0..3 {
        for l in 0..k {
            a[(16 + i, l)] = pen * p.r[(l, i)];
        }
        rhs[16 + i] = pen * b_target[i];
    }
    p.w = simplex_ls(&a, &rhs);

    // Alice blocks (the penalty does not involve them).
    for x in 0..2 {
        let mut a = DMatrix::zeros(8, k);
        let mut rhs = DVector::zeros(8);
        let mut row = 0;
        for aa in 0..2 {
            for b in 0..2 {
                for y in 0..2 {
                    let sign = if aa == 0 { 1.0 } else { -1.0 };
                    let mut base = 0.0;
                    for l in 0..k {
                        let cb = p.w[l] * eff.born(y, b, &p.r, l);
                        a[(row, l)] = sign * cb;
                        if aa == 1 {
                            base += cb;
                        }
                    }
                    rhs[row] = t[flat_index(aa, b, x, y)] - base;
                    row += 1;
                }
            }
        }
        let sol = box_ls(&a, &rhs);
        for l in 0..k {
            p.va[(l, x)] = sol[l];
        }
    }

    // Hidden states, one Bloch vector at a time (two passes tighten the
    // coupling through the shared penalty).
    for _ in 0..2 {
        for l0 in 0..k {
            let mut a = DMatrix::zeros(19, 3);
            let mut rhs = DVector::zeros(19);
            for i in 0..16 {
                let (aa, b, x, y) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
                let c = p.w[l0] * LhvParams::response(&p.va, l0, x, aa);
                let mut rest = 0.0;
                for l in 0..k {
                    if l != l0 {
                        rest += p.w[l]
                            * LhvParams::response(&p.va, l, x, aa)
                            * eff.born(y, b, &p.r, l);
                    }
                }
                for i3 in 0..3 {
                    a[(i, i3)] = c * eff.mvec[y][b][i3];
                }
                rhs[i] = t[i] - rest - c * eff.m0[y][b];
            }
            for i3 in 0..3 {
                let mut rest = 0.0;
                for l in 0..k {
                    if l != l0 {
                        rest += p.w[l] * p.r[(l, i3)];
                    }
                }
                a[(16 + i3, i3)] = pen * p.w[l0];
                rhs[16 + i3] = pen * (b_target[i3] - rest);
            }
            let sol = ball_ls(&a, &rhs);
            for i3 in 0..3 {
                p.r[(l0, i3)] = sol[i3];
            }
        }
    }
}

fn lhs_descend(
    p: &mut LhsParams,
    t: &DVector<f64>,
    eff: &EffectAffine,
    b_target: &[f64; 3],
    max_sweeps: usize,
) -> f64 {
    let mut prev = p.objective(t, eff, b_target);
    for _ in 0..max_sweeps {
        lhs_sweep(p, t, eff, b_target);
        let cur = p.objective(t, eff, b_target);
        if prev - cur < 1e-17 {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Converts a response pair `p(0|y)` for the two trusted settings into the
/// minimum-norm Bloch vector reproducing it, as a hidden-state start.
fn responses_to_bloch(eff: &EffectAffine, p0: [f64; 2]) -> [f64; 3] {
    let a = DMatrix::from_fn(2, 3, |y, i| eff.mvec[y][0][i]);
    let rhs = DVector::from_fn(2, |y, _| p0[y] - eff.m0[y][0]);
    let sol = a.svd(true, true).solve(&rhs, 1e-12).unwrap_or_else(|_| DVector::zeros(3));
    let n = sol.norm();
    let sol = if n > 1.0 { sol / n } else { sol };
    [sol[0], sol[1], sol[2]]
}

/// Fits an LHV-LHS model: Alice classical, Bob holding hidden qubit states
/// measured by his trusted POVMs, with the state-average consistency
/// `Σ_λ p_λ ρ_λ = ρ_B` enforced as a quadratic penalty and its remaining
/// gap reported separately.
///
/// Like [`lhv_fit`], all cardinalities up to the bound are explored, making
/// the reported residual monotone in `d_λ`.
pub fn lhvlhs_fit(
    bx: &Behavior,
    d_lambda: usize,
    bob_povms: &MeasurementFamily,
    rho_b: &DensityMatrix,
    restarts: usize,
    seed: u64,
) -> Result<FitResult> {
    check_dichotomic_two_settings(bx)?;
    if d_lambda == 0 || d_lambda > 16 {
        return Err(Error::InvalidParameter(
            "component count must lie in 1..=16".into(),
        ));
    }
    if restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be ≥ 1".into()));
    }
    if bob_povms.dim() != 2 || bob_povms.n_settings() != 2 || bob_povms.n_outcomes() != 2 {
        return Err(Error::Dimension(
            "trusted side needs two dichotomic qubit POVMs".into(),
        ));
    }
    if rho_b.dim() != 2 {
        return Err(Error::Dimension("trusted marginal must be a qubit".into()));
    }
    let eff = EffectAffine::from_family(bob_povms);
    let b_target = [
        (rho_b.matrix() * pauli(1)).trace().re,
        (rho_b.matrix() * pauli(2)).trace().re,
        (rho_b.matrix() * pauli(3)).trace().re,
    ];
    let t = box_vec(bx);

    let mut best: Option<(f64, LhsParams, usize)> = None;
    for k in 1..=d_lambda {
        let mut starts: Vec<LhsParams> = Vec::new();
        // Seed hidden states from the LHV polytope start's Bob responses.
        let lhv = polytope_start(bx, k);
        let mut r0 = DMatrix::zeros(k, 3);
        for l in 0..k {
            let bl = responses_to_bloch(&eff, [lhv.vb[(l, 0)], lhv.vb[(l, 1)]]);
            for i in 0..3 {
                r0[(l, i)] = bl[i];
            }
        }
        starts.push(LhsParams {
            w: lhv.w.clone(),
            va: lhv.va.clone(),
            r: r0,
        });
        // Marginal start: every hidden state at the trusted marginal.
        starts.push(LhsParams {
            w: DVector::from_element(k, 1.0 / k as f64),
            va: DMatrix::from_fn(k, 2, |_, x| bx.alice_marginal(0, x)),
            r: DMatrix::from_fn(k, 3, |_, i| b_target[i]),
        });
        for i in 0..restarts {
            let mut rng = sample::rng(seed, ((k as u64) << 32) | i as u64);
            let w = DVector::from_vec(sample::random_simplex(&mut rng, k));
            let va = DMatrix::from_fn(k, 2, |_, _| rng.gen_range(0.0..1.0));
            let blochs: Vec<[f64; 3]> =
                (0..k).map(|_| sample::random_bloch(&mut rng, 1.0)).collect();
            let r = DMatrix::from_fn(k, 3, |l, i| blochs[l][i]);
            starts.push(LhsParams { w, va, r });
        }
        for mut p in starts {
            let val = lhs_descend(&mut p, &t, &eff, &b_target, 160);
            if best.as_ref().map_or(true, |(bv, _, _)| val < *bv) {
                best = Some((val, p, k));
            }
        }
    }
    let (_, p, k) = best.expect("at least one start ran");

    let mut weights = vec![0.0; d_lambda];
    let mut alice = vec![vec![vec![0.5, 0.5]; 2]; d_lambda];
    let mut hidden = Vec::with_capacity(d_lambda);
    for l in 0..d_lambda {
        if l < k {
            weights[l] = p.w[l].max(0.0);
            for s in 0..2 {
                let v = p.va[(l, s)].clamp(0.0, 1.0);
                alice[l][s] = vec![v, 1.0 - v];
            }
            let mut r = [p.r[(l, 0)], p.r[(l, 1)], p.r[(l, 2)]];
            let n: f64 = r.iter().map(|v| v * v).sum::<f64>().sqrt();
            if n > 1.0 {
                for v in &mut r {
                    *v /= n;
                }
            }
            hidden.push(DensityMatrix::single(qubit_from_bloch(r))?);
        } else {
            hidden.push(DensityMatrix::single(qubit_from_bloch([0.0, 0.0, 0.0]))?);
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    let model = LhvLhsModel::new(weights, alice, hidden, bob_povms.clone())?;
    let lhs_residual = model.consistency_residual(rho_b);
    let predicted = model.predicted_box()?;
    let mut residual2 = 0.0;
    for i in 0..16 {
        let (a, b, x, y) = ((i >> 3) & 1, (i >> 2) & 1, (i >> 1) & 1, i & 1);
        let d = predicted.prob(a, b, x, y) - t[i];
        residual2 += d * d;
    }
    let residual = residual2.sqrt();
    Ok(FitResult {
        model: FitModel::LhvLhs(model),
        residual,
        lhs_residual: Some(lhs_residual),
        converged: residual <= tol::FIT_RESIDUAL,
        restarts_used: restarts,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Verdict.

/// The four analytic witnesses evaluated on one box.
#[derive(Debug, Clone, Copy)]
pub struct WitnessValues {
    pub q: f64,
    pub gamma: f64,
    pub chsh: f64,
    pub f2: f64,
}

/// Combined classification of a state-and-measurements experiment.
///
/// `superlocal`/`superunsteerable` are `Some(true)` only on a witness
/// certificate, `Some(false)` only on a constructed model, and `None` when
/// the search failed without a certificate either way.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub bell_local: bool,
    pub polytope_distance: f64,
    pub superlocal: Option<bool>,
    pub superunsteerable: Option<bool>,
    pub witnesses: WitnessValues,
    pub lhv2_residual: f64,
    pub lhvlhs2_residual: f64,
}

/// Runs the full pipeline on a two-qubit state with two dichotomic settings
/// per side: Born box, polytope membership, witness values, and both
/// cardinality-2 fits.
pub fn verdict(
    rho: &DensityMatrix,
    alice: &MeasurementFamily,
    bob: &MeasurementFamily,
) -> Result<Verdict> {
    if rho.dim_a() != 2 || rho.dim_b() != 2 {
        return Err(Error::Dimension("verdict expects a two-qubit state".into()));
    }
    let bx = born_box(rho, alice, bob)?;
    check_dichotomic_two_settings(&bx)?;
    let witnesses = WitnessValues {
        q: q_witness(&bx)?,
        gamma: mermin_strength(&bx)?,
        chsh: chsh(&bx)?,
        f2: steering_f2(&bx)?,
    };
    let (bell_local, polytope_distance) = local_polytope_member(&bx)?;

    let fit2 = lhv_fit(&bx, 2, 32, 17)?;
    let rho_b = partial_trace(rho, Subsystem::B);
    let lhs2 = lhvlhs_fit(&bx, 2, bob, &rho_b, 32, 17)?;

    let superlocal = if !bell_local {
        None
    } else if witnesses.q > tol::WITNESS {
        Some(true)
    } else if fit2.converged {
        Some(false)
    } else {
        None
    };
    let superunsteerable = if witnesses.q > tol::WITNESS || witnesses.gamma > tol::WITNESS {
        Some(true)
    } else if lhs2.converged {
        Some(false)
    } else {
        None
    };

    Ok(Verdict {
        bell_local,
        polytope_distance,
        superlocal,
        superunsteerable,
        witnesses,
        lhv2_residual: fit2.residual,
        lhvlhs2_residual: lhs2.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{kron, trace_distance};
    use crate::states;

    fn witness_settings() -> (MeasurementFamily, MeasurementFamily) {
        // |0⟩⟨0| picks out +z, |+⟩⟨+| picks out +x.
        let fam =
            MeasurementFamily::qubit_projective(&[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).unwrap();
        (fam.clone(), fam)
    }

    fn werner_box(p: f64) -> Behavior {
        let (a, b) = witness_settings();
        born_box(&states::werner(p).unwrap(), &a, &b).unwrap()
    }

    #[test]
    fn white_noise_fits_with_one_component() {
        let fit = lhv_fit(&Behavior::uniform(2, 2, 2, 2), 1, 8, 1).unwrap();
        assert!(fit.residual <= 1e-9);
        assert!(fit.converged);
    }

    #[test]
    fn locally_created_state_box_fits_with_two_components() {
        let (a, b) = witness_settings();
        let bx = born_box(&states::local_coherent_example(), &a, &b).unwrap();
        let fit = lhv_fit(&bx, 2, 24, 2).unwrap();
        assert!(fit.residual <= 1e-6, "residual {}", fit.residual);
    }

    #[test]
    fn witnessed_boxes_resist_two_components() {
        let (a, b) = witness_settings();
        let bx = born_box(&states::giorgi_state(), &a, &b).unwrap();
        assert!(q_witness(&bx).unwrap() > 1e-3);
        let fit = lhv_fit(&bx, 2, 24, 3).unwrap();
        assert!(fit.residual > 1e-4, "residual {}", fit.residual);

        for p in [0.3, 0.6, 0.9] {
            let bx = werner_box(p);
            assert!(q_witness(&bx).unwrap() > 1e-3);
            let fit = lhv_fit(&bx, 2, 24, 4).unwrap();
            assert!(fit.residual > 1e-4, "p = {p}: residual {}", fit.residual);
        }
    }

    #[test]
    fn residual_is_monotone_in_cardinality() {
        for trial in 0..3 {
            let mut r = sample::rng(61, trial);
            let rho = sample::random_density(&mut r, 2, 2);
            let alice = sample::random_qubit_povms(&mut r, 2);
            let bob = sample::random_qubit_povms(&mut r, 2);
            let bx = born_box(&rho, &alice, &bob).unwrap();
            let mut prev = f64::INFINITY;
            for d in 1..=4 {
                let fit = lhv_fit(&bx, d, 8, 71).unwrap();
                assert!(
                    fit.residual <= prev + 1e-12,
                    "trial {trial}: residual rose from {prev} to {} at d = {d}",
                    fit.residual
                );
                prev = fit.residual;
            }
        }
    }

    #[test]
    fn separable_state_boxes_fit_with_four_components() {
        for trial in 0..4 {
            let mut r = sample::rng(67, trial);
            let rho = sample::random_separable(&mut r, 3);
            let alice = sample::random_qubit_povms(&mut r, 2);
            let bob = sample::random_qubit_povms(&mut r, 2);
            let bx = born_box(&rho, &alice, &bob).unwrap();
            let fit = lhv_fit(&bx, 4, 12, 73).unwrap();
            assert!(
                fit.residual <= 1e-6,
                "trial {trial}: residual {}",
                fit.residual
            );
        }
    }

    #[test]
    fn fits_are_deterministic() {
        let bx = werner_box(0.4);
        let f1 = lhv_fit(&bx, 3, 16, 99).unwrap();
        let f2 = lhv_fit(&bx, 3, 16, 99).unwrap();
        assert_eq!(f1.residual.to_bits(), f2.residual.to_bits());
        let (FitModel::Lhv(m1), FitModel::Lhv(m2)) = (&f1.model, &f2.model) else {
            panic!("expected LHV models");
        };
        assert_eq!(m1.weights, m2.weights);
        assert_eq!(m1.alice_responses, m2.alice_responses);
    }

    #[test]
    fn model_validation_rejects_bad_distributions() {
        let bad = LhvModel::new(
            vec![0.7, 0.7],
            vec![vec![vec![0.5, 0.5]; 2]; 2],
            vec![vec![vec![0.5, 0.5]; 2]; 2],
        );
        assert!(matches!(bad, Err(Error::InvalidDistribution { .. })));

        let bad = LhvModel::new(
            vec![0.5, 0.5],
            vec![vec![vec![0.9, 0.5]; 2]; 2],
            vec![vec![vec![0.5, 0.5]; 2]; 2],
        );
        assert!(bad.is_err());
    }

    #[test]
    fn product_box_lhs_fit_recovers_the_marginal() {
        let mut r = sample::rng(79, 0);
        let rho_a = sample::random_density(&mut r, 2, 1);
        let rho_b = sample::random_density(&mut r, 2, 1);
        let rho = DensityMatrix::new(2, 2, kron(rho_a.matrix(), rho_b.matrix())).unwrap();
        let (alice, bob) = witness_settings();
        let bx = born_box(&rho, &alice, &bob).unwrap();
        let fit = lhvlhs_fit(&bx, 1, &bob, &rho_b, 8, 5).unwrap();
        assert!(fit.residual <= 1e-9, "residual {}", fit.residual);
        assert!(fit.lhs_residual.unwrap() <= 1e-4);
        let FitModel::LhvLhs(model) = &fit.model else {
            panic!("expected LHS model");
        };
        assert!(trace_distance(&model.bob_hidden_states[0], &rho_b).unwrap() <= 1e-4);
    }

    #[test]
    fn two_term_separable_state_admits_two_hidden_states() {
        let mut r = sample::rng(83, 0);
        let a1 = sample::random_density(&mut r, 2, 1);
        let b1 = sample::random_density(&mut r, 2, 1);
        let a2 = sample::random_density(&mut r, 2, 1);
        let b2 = sample::random_density(&mut r, 2, 1);
        let m = kron(a1.matrix(), b1.matrix()) * crate::qmath::cr(0.6)
            + kron(a2.matrix(), b2.matrix()) * crate::qmath::cr(0.4);
        let rho = DensityMatrix::new(2, 2, m).unwrap();
        let rho_b = partial_trace(&rho, Subsystem::B);
        let (alice, bob) = witness_settings();
        let bx = born_box(&rho, &alice, &bob).unwrap();
        let fit = lhvlhs_fit(&bx, 2, &bob, &rho_b, 24, 7).unwrap();
        assert!(fit.residual <= 1e-6, "residual {}", fit.residual);
        assert!(fit.lhs_residual.unwrap() <= 1e-3);
    }

    #[test]
    fn witnessed_box_resists_two_hidden_states() {
        let rho = states::giorgi_state();
        let (alice, bob) = witness_settings();
        let bx = born_box(&rho, &alice, &bob).unwrap();
        let rho_b = partial_trace(&rho, Subsystem::B);
        let fit = lhvlhs_fit(&bx, 2, &bob, &rho_b, 24, 11).unwrap();
        assert!(fit.residual > 1e-4, "residual {}", fit.residual);
    }

    #[test]
    fn polytope_reference_points() {
        let (member, dist) = local_polytope_member(&Behavior::uniform(2, 2, 2, 2)).unwrap();
        assert!(member, "white noise distance {dist}");

        let pr = Behavior::from_fn(2, 2, 2, 2, |a, b, x, y| {
            if (a ^ b) == (x & y) {
                0.5
            } else {
                0.0
            }
        })
        .unwrap();
        let (member, dist) = local_polytope_member(&pr).unwrap();
        assert!(!member);
        assert!(dist > 0.1);

        let rho = DensityMatrix::from_pure(&states::phi_plus(), 2, 2).unwrap();
        let alice = MeasurementFamily::qubit_projective(&[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
            .unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let bob = MeasurementFamily::qubit_projective(&[[s, 0.0, s], [-s, 0.0, s]]).unwrap();
        let bx = born_box(&rho, &alice, &bob).unwrap();
        assert!((chsh(&bx).unwrap().abs() - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-10);
        let (member, dist) = local_polytope_member(&bx).unwrap();
        assert!(!member);
        assert!(dist > 1e-3);
    }

    #[test]
    fn polytope_agrees_with_the_chsh_facets() {
        let mut checked = 0;
        for trial in 0..40 {
            let mut r = sample::rng(89, trial);
            let rho = sample::random_density(&mut r, 2, 2);
            let alice = sample::random_qubit_povms(&mut r, 2);
            let bob = sample::random_qubit_povms(&mut r, 2);
            let bx = born_box(&rho, &alice, &bob).unwrap();
            let mut max_facet: f64 = 0.0;
            for t in 0..4 {
                let mut v = 0.0;
                for x in 0..2 {
                    for y in 0..2 {
                        let sign = if 2 * x + y == t { -1.0 } else { 1.0 };
                        v += sign * bx.correlator(x, y).unwrap();
                    }
                }
                max_facet = max_facet.max(v.abs());
            }
            if (max_facet - 2.0).abs() < 1e-7 {
                continue; // too close to the boundary to call either way
            }
            let (member, dist) = local_polytope_member(&bx).unwrap();
            assert_eq!(
                member,
                max_facet <= 2.0,
                "trial {trial}: facet value {max_facet}, distance {dist}"
            );
            checked += 1;
        }
        assert!(checked > 20);
    }

    #[test]
    fn verdict_reference_points() {
        // Werner state at σ₁/σ₂ settings: a local box whose covariance
        // witness still fires.
        let fam = MeasurementFamily::qubit_projective(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
            .unwrap();
        let v = verdict(&states::werner(0.5).unwrap(), &fam, &fam).unwrap();
        assert!(v.bell_local);
        assert!(v.witnesses.chsh.abs() <= 2.0);
        assert!(v.witnesses.gamma > 0.5);
        assert_eq!(v.superunsteerable, Some(true));

        // Product state: nothing fires, models found at cardinality 2.
        let mut r = sample::rng(97, 0);
        let rho_a = sample::random_density(&mut r, 2, 1);
        let rho_b = sample::random_density(&mut r, 2, 1);
        let rho = DensityMatrix::new(2, 2, kron(rho_a.matrix(), rho_b.matrix())).unwrap();
        let (alice, bob) = witness_settings();
        let v = verdict(&rho, &alice, &bob).unwrap();
        assert!(v.bell_local);
        assert_eq!(v.superlocal, Some(false));
        assert_eq!(v.superunsteerable, Some(false));
        assert!(v.witnesses.q < 1e-9);

        // The Q-witnessed separable state: local but certified superlocal
        // and superunsteerable.
        let v = verdict(&states::giorgi_state(), &alice, &bob).unwrap();
        assert!(v.bell_local);
        assert_eq!(v.superlocal, Some(true));
        assert_eq!(v.superunsteerable, Some(true));
        assert!(v.lhv2_residual > 1e-4);
    }
}
