//! Seeded multi-start simplex search over bounded parameter boxes.
//!
//! One engine serves every optimization need in the crate: discord, witness
//! maximization and model fitting all reduce to maximizing some objective
//! over a rectangle in `R^n`. The engine runs Nelder-Mead from `restarts`
//! pseudo-random start points (stream `i` of the seed drives restart `i`, so
//! growing the restart budget only appends new starts) plus any caller-
//! supplied deterministic starts, and keeps the best vertex it ever
//! evaluated.

use rand::Rng;

use crate::boxes::{born_box, chsh, mermin_strength, q_witness, steering_f2, Behavior, BlochParam, MeasurementFamily};
use crate::error::Error;
use crate::qmath::DensityMatrix;
use crate::sample;
use crate::Result;

/// Bounded search problem description.
#[derive(Debug, Clone)]
pub struct SearchSpec {
    pub dim: usize,
    pub bounds: Vec<(f64, f64)>,
    pub restarts: usize,
    pub max_iters: usize,
    pub tol: f64,
    pub seed: u64,
}

impl SearchSpec {
    /// Spec with the crate-wide default budget (64 restarts, 600 iterations,
    /// simplex-spread tolerance 1e-12).
    pub fn new(bounds: Vec<(f64, f64)>, seed: u64) -> Self {
        Self {
            dim: bounds.len(),
            bounds,
            restarts: 64,
            max_iters: 600,
            tol: 1e-12,
            seed,
        }
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.dim != self.bounds.len() {
            return Err(Error::InvalidParameter(format!(
                "dim = {} but {} bounds were given",
                self.dim,
                self.bounds.len()
            )));
        }
        if self
            .bounds
            .iter()
            .any(|&(lo, hi)| !lo.is_finite() || !hi.is_finite() || lo > hi)
        {
            return Err(Error::InvalidParameter(
                "bounds must be finite ordered intervals".into(),
            ));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidParameter("restarts must be ≥ 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter("tol must be > 0".into()));
        }
        Ok(())
    }
}

/// What the search did: how many objective calls, how many starts died on a
/// non-finite value, and the best value per surviving start (in start order).
#[derive(Debug, Clone, Default)]
pub struct SearchTrace {
    pub evaluations: usize,
    pub discarded_starts: usize,
    pub restart_values: Vec<f64>,
}

/// Best value found, the point achieving it, and the run trace.
#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub value: f64,
    pub point: Vec<f64>,
    pub trace: SearchTrace,
}

fn clamp_to(bounds: &[(f64, f64)], x: &mut [f64]) {
    for (xi, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *xi = xi.clamp(lo, hi);
    }
}

/// One bounded Nelder-Mead descent of `-f` from `start`. Returns the best
/// vertex and value, or `None` if any evaluation was non-finite.
fn simplex_descent<F: Fn(&[f64]) -> f64>(
    f: &F,
    start: &[f64],
    spec: &SearchSpec,
    evals: &mut usize,
) -> Option<(f64, Vec<f64>)> {
    let n = spec.dim;
    let mut eval = |x: &[f64]| -> Option<f64> {
        *evals += 1;
        let v = f(x);
        v.is_finite().then_some(v)
    };

    // Simplex seeded with per-axis offsets of 5% of the box width.
    let mut verts: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    let mut vals: Vec<f64> = Vec::with_capacity(n + 1);
    verts.push(start.to_vec());
    vals.push(eval(start)?);
    for i in 0..n {
        let (lo, hi) = spec.bounds[i];
        let step = 0.05 * (hi - lo).max(1e-6);
        let mut v = start.to_vec();
        v[i] = if v[i] + step <= hi { v[i] + step } else { v[i] - step };
        clamp_to(&spec.bounds, &mut v);
        vals.push(eval(&v)?);
        verts.push(v);
    }

    for _ in 0..spec.max_iters {
        // Order so that vals[order[0]] is the best (largest).
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| vals[b].partial_cmp(&vals[a]).unwrap());
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];
        if vals[best] - vals[worst] < spec.tol {
            break;
        }

        let mut centroid = vec![0.0; n];
        for &k in &order[..n] {
            for i in 0..n {
                centroid[i] += verts[k][i] / n as f64;
            }
        }
        let blend = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = (0..n)
                .map(|i| centroid[i] + t * (centroid[i] - verts[worst][i]))
                .collect();
            clamp_to(&spec.bounds, &mut x);
            x
        };

        let refl = blend(1.0);
        let f_refl = eval(&refl)?;
        if f_refl > vals[best] {
            let expa = blend(2.0);
            let f_expa = eval(&expa)?;
            if f_expa > f_refl {
                verts[worst] = expa;
                vals[worst] = f_expa;
            } else {
                verts[worst] = refl;
                vals[worst] = f_refl;
            }
        } else if f_refl > vals[second_worst] {
            verts[worst] = refl;
            vals[worst] = f_refl;
        } else {
            let contr = blend(-0.5);
            let f_contr = eval(&contr)?;
            if f_contr > vals[worst] {
                verts[worst] = contr;
                vals[worst] = f_contr;
            } else {
                // Shrink everything toward the best vertex.
                let anchor = verts[best].clone();
                for k in 0..=n {
                    if k == best {
                        continue;
                    }
                    for i in 0..n {
                        verts[k][i] = anchor[i] + 0.5 * (verts[k][i] - anchor[i]);
                    }
                    clamp_to(&spec.bounds, &mut verts[k]);
                    vals[k] = eval(&verts[k].clone())?;
                }
            }
        }
    }

    let mut best = 0;
    for k in 1..=n {
        if vals[k] > vals[best] {
            best = k;
        }
    }
    Some((vals[best], verts[best].clone()))
}

/// Maximizes `f` over the box, trying the given deterministic starts first
/// and then `spec.restarts` seeded random starts.
pub fn maximize_with_starts<F: Fn(&[f64]) -> f64>(
    f: F,
    spec: &SearchSpec,
    extra_starts: &[Vec<f64>],
) -> Result<SearchOutcome> {
    spec.validate()?;
    let mut trace = SearchTrace::default();
    let mut best: Option<(f64, Vec<f64>)> = None;

    let try_start = |start: &[f64], trace: &mut SearchTrace, best: &mut Option<(f64, Vec<f64>)>| {
        match simplex_descent(&f, start, spec, &mut trace.evaluations) {
            Some((v, x)) => {
                trace.restart_values.push(v);
                if best.as_ref().map_or(true, |(bv, _)| v > *bv) {
                    *best = Some((v, x));
                }
            }
            None => trace.discarded_starts += 1,
        }
    };

    for s in extra_starts {
        let mut s = s.clone();
        clamp_to(&spec.bounds, &mut s);
        try_start(&s, &mut trace, &mut best);
    }
    for restart in 0..spec.restarts {
        let mut r = sample::rng(spec.seed, restart as u64);
        let start: Vec<f64> = spec
            .bounds
            .iter()
            .map(|&(lo, hi)| if hi > lo { r.gen_range(lo..hi) } else { lo })
            .collect();
        try_start(&start, &mut trace, &mut best);
    }

    let (value, point) = best.ok_or(Error::SearchFailed)?;
    Ok(SearchOutcome { value, point, trace })
}

/// Maximizes `f` over the box from seeded random starts only.
pub fn maximize<F: Fn(&[f64]) -> f64>(f: F, spec: &SearchSpec) -> Result<SearchOutcome> {
    maximize_with_starts(f, spec, &[])
}

/// Which box functional to maximize over measurement choices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Witness {
    /// Determinant witness on the conditional-difference matrix.
    Q,
    /// Covariance Mermin strength.
    Gamma,
    /// CHSH combination `⟨A₀B₀⟩ + ⟨A₀B₁⟩ + ⟨A₁B₀⟩ − ⟨A₁B₁⟩`.
    Chsh,
    /// Steering functional `|⟨A₀B₀⟩ + ⟨A₁B₁⟩|/√2`.
    F2,
}

/// The measurement class the search ranges over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasFamilyKind {
    /// Sharp qubit measurements — two angles per setting per side.
    Projective,
    /// Noisy dichotomic POVMs — angles plus `(γ, η)` per setting per side.
    Povm,
}

impl MeasFamilyKind {
    /// Parameter count for a two-setting two-party witness.
    pub fn dim(self) -> usize {
        match self {
            MeasFamilyKind::Projective => 8,
            MeasFamilyKind::Povm => 16,
        }
    }

    /// Search box: `θ ∈ [0, π]`, `φ ∈ [0, 2π]`, then `γ, u ∈ [0, 1]` with
    /// `η = u · 2 min(γ, 1−γ)` keeping the POVM positivity bounds built in.
    pub fn bounds(self) -> Vec<(f64, f64)> {
        let mut b = Vec::with_capacity(self.dim());
        for _ in 0..4 {
            b.push((0.0, std::f64::consts::PI));
            b.push((0.0, std::f64::consts::TAU));
        }
        if self == MeasFamilyKind::Povm {
            for _ in 0..8 {
                b.push((0.0, 1.0));
            }
        }
        b
    }
}

fn axis(theta: f64, phi: f64) -> [f64; 3] {
    [
        theta.sin() * phi.cos(),
        theta.sin() * phi.sin(),
        theta.cos(),
    ]
}

/// Decodes a parameter vector into (Alice, Bob) measurement families.
fn decode_families(kind: MeasFamilyKind, p: &[f64]) -> Result<(MeasurementFamily, MeasurementFamily)> {
    let mut families = Vec::with_capacity(2);
    for side in 0..2 {
        let mut params = Vec::with_capacity(2);
        for setting in 0..2 {
            let base = 4 * side + 2 * setting;
            let ax = axis(p[base], p[base + 1]);
            let bp = match kind {
                MeasFamilyKind::Projective => BlochParam::projective(ax),
                MeasFamilyKind::Povm => {
                    let gbase = 8 + 4 * side + 2 * setting;
                    let gamma = p[gbase];
                    let eta = p[gbase + 1] * 2.0 * gamma.min(1.0 - gamma);
                    BlochParam {
                        gamma,
                        eta,
                        axis: ax,
                    }
                }
            };
            params.push(bp);
        }
        families.push(MeasurementFamily::qubit_bloch(params)?);
    }
    let bob = families.pop().expect("two sides were pushed");
    let alice = families.pop().expect("two sides were pushed");
    Ok((alice, bob))
}

fn witness_value(w: Witness, bx: &Behavior) -> Result<f64> {
    match w {
        Witness::Q => q_witness(bx),
        Witness::Gamma => mermin_strength(bx),
        Witness::Chsh => chsh(bx),
        Witness::F2 => steering_f2(bx),
    }
}

/// Hand-picked start configurations that hit the known optima of all four
/// witnesses on reference states: the `z/x` pair on both sides, `σ₁/σ₂` on
/// both sides, the CHSH tilted pair, and the `σ₁/σ₂` vs `σ₁/−σ₂` steering
/// pair.
fn canonical_starts(kind: MeasFamilyKind) -> Vec<Vec<f64>> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    let half = FRAC_PI_2;
    let angle_sets: [[f64; 8]; 4] = [
        [0.0, 0.0, half, 0.0, 0.0, 0.0, half, 0.0],
        [half, 0.0, half, half, half, 0.0, half, half],
        [0.0, 0.0, half, 0.0, FRAC_PI_4, 0.0, FRAC_PI_4, PI],
        [half, 0.0, half, half, half, 0.0, half, 3.0 * half],
    ];
    angle_sets
        .iter()
        .map(|set| {
            let mut v = set.to_vec();
            if kind == MeasFamilyKind::Povm {
                // Sharp settings: γ = 1/2, η at its ceiling.
                v.extend(std::iter::repeat([0.5, 1.0]).take(4).flatten());
            }
            v
        })
        .collect()
}

/// A witness maximum together with the measurements that achieve it.
#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub value: f64,
    pub alice: MeasurementFamily,
    pub bob: MeasurementFamily,
    pub trace: SearchTrace,
}

/// Maximizes a box witness of a two-qubit state over measurement settings.
///
/// The returned value is re-derived from the reported measurements by a
/// direct Born-rule box computation, so `value` is exactly what the caller
/// would observe replaying `alice`/`bob` on the state.
pub fn witness_max(
    rho: &DensityMatrix,
    witness: Witness,
    family: MeasFamilyKind,
    spec: &SearchSpec,
) -> Result<WitnessReport> {
    if rho.dim_a() != 2 || rho.dim_b() != 2 {
        return Err(Error::Dimension(
            "witness maximization is defined for two-qubit states".into(),
        ));
    }
    if spec.dim != family.dim() {
        return Err(Error::InvalidParameter(format!(
            "spec has {} parameters but the {:?} family needs {}",
            spec.dim,
            family,
            family.dim()
        )));
    }
    let objective = |p: &[f64]| -> f64 {
        match decode_families(family, p) {
            Ok((alice, bob)) => born_box(rho, &alice, &bob)
                .and_then(|bx| witness_value(witness, &bx))
                .unwrap_or(f64::NEG_INFINITY),
            Err(_) => f64::NEG_INFINITY,
        }
    };
    let outcome = maximize_with_starts(objective, spec, &canonical_starts(family))?;
    let (alice, bob) = decode_families(family, &outcome.point)?;
    let bx = born_box(rho, &alice, &bob)?;
    let value = witness_value(witness, &bx)?;
    Ok(WitnessReport {
        value,
        alice,
        bob,
        trace: outcome.trace,
    })
}
