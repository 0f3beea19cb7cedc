//! Reproduction of the toolkit's pinned reference claims.
//!
//! Every claim the crate stands behind is recomputed from scratch here and
//! rendered as one row: claim id, what is being checked, the expected value,
//! the value obtained, the tolerance, and the verdict. The rows are grouped
//! into eleven numbered criteria; [`criterion_rows`] reruns a single group
//! and [`run`] the whole table. A `perturb` flag tightens every tolerance by
//! nine orders of magnitude as a harness self-test — with it set, rows must
//! start failing.
//!
//! Three rows are expected to fail (`3`, `4b`, `7`). They assert claimed
//! identities — the covariance Mermin strength vanishing on all one-way
//! classical states, and one-sided decoherence with conjugated effects
//! reproducing the original box — that counterexamples in this crate's test
//! suite show to be false as stated. The rows compute the honest values and
//! report them; see the README for the analysis.

use serde::Serialize;

use crate::boxes::{born_box, mermin_strength, q_witness, steering_f2, MeasurementFamily};
use crate::channels::{conjugate_measurements, decohering_map, local_apply, KrausChannel};
use crate::channels::{cnot_convert, discord_creating_phi};
use crate::info::{
    coherence_rel_entropy, correlation_rank, discord, mutual_information, Direction,
};
use crate::models::{lhv_fit, FitModel};
use crate::qmath::{
    basis_ket, fidelity_with_pure, kron, trace_distance, DensityMatrix, PureState,
};
use crate::rsp::{rsp_fidelity, schrodinger_strength_bd};
use crate::sample;
use crate::states;
use crate::Result;

/// One recomputed claim.
#[derive(Debug, Clone, Serialize)]
pub struct ClaimRow {
    pub id: String,
    pub description: String,
    pub expected: String,
    pub computed: String,
    pub tolerance: f64,
    pub pass: bool,
}

/// The full claim table.
#[derive(Debug, Clone, Serialize)]
pub struct ReproReport {
    pub rows: Vec<ClaimRow>,
}

impl ReproReport {
    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

fn eq_row(id: &str, description: &str, expected: f64, computed: f64, tolerance: f64) -> ClaimRow {
    ClaimRow {
        id: id.into(),
        description: description.into(),
        expected: format!("{expected:.9} ± {tolerance:.1e}"),
        computed: format!("{computed:.9}"),
        tolerance,
        pass: (computed - expected).abs() <= tolerance,
    }
}

fn bound_row(id: &str, description: &str, computed: f64, tolerance: f64) -> ClaimRow {
    ClaimRow {
        id: id.into(),
        description: description.into(),
        expected: format!("≤ {tolerance:.1e}"),
        computed: format!("{computed:.3e}"),
        tolerance,
        pass: computed <= tolerance,
    }
}

fn flag_row(id: &str, description: &str, expected: &str, computed: String, pass: bool) -> ClaimRow {
    ClaimRow {
        id: id.into(),
        description: description.into(),
        expected: expected.into(),
        computed,
        tolerance: 0.0,
        pass,
    }
}

/// The `|0⟩⟨0|` / `|+⟩⟨+|`-selecting projective settings used by the Q
/// witness anchor (the same family on both sides).
fn witness_settings() -> MeasurementFamily {
    MeasurementFamily::qubit_projective(&[[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]]).expect("unit axes")
}

fn random_sorted_c(rng: &mut impl rand::Rng) -> [f64; 3] {
    let lam = sample::random_simplex(rng, 4);
    let mut cv = [
        lam[0] - lam[1] + lam[2] - lam[3],
        -lam[0] + lam[1] + lam[2] - lam[3],
        lam[0] + lam[1] - lam[2] - lam[3],
    ];
    cv.sort_by(|x, y| (y * y).partial_cmp(&(x * x)).unwrap());
    cv
}

fn criterion_1(_seed: u64, ts: f64) -> Result<Vec<ClaimRow>> {
    let fam = witness_settings();
    let bx = born_box(&states::giorgi_state(), &fam, &fam)?;
    let q = q_witness(&bx)?;
    Ok(vec![eq_row(
        "1",
        "Q determinant of the reference separable state at |0⟩/|+⟩ settings",
        0.0381,
        q,
        5e-4 * ts,
    )])
}

fn criterion_2(seed: u64, _ts: f64) -> Result<Vec<ClaimRow>> {
    let mut rows = Vec::new();
    let giorgi = correlation_rank(&states::giorgi_state())?;
    rows.push(flag_row(
        "2a",
        "correlation rank of the reference single-axis polarized state",
        "3",
        giorgi.rank.to_string(),
        giorgi.rank == 3,
    ));

    let mut r = sample::rng(seed, 201);
    let mut product_ok = true;
    let mut ranks = Vec::new();
    for _ in 0..3 {
        let a = sample::random_density(&mut r, 2, 1);
        let b = sample::random_density(&mut r, 2, 1);
        let rho = DensityMatrix::new(2, 2, kron(a.matrix(), b.matrix()))?;
        let rank = correlation_rank(&rho)?.rank;
        product_ok &= rank == 1;
        ranks.push(rank.to_string());
    }
    rows.push(flag_row(
        "2b",
        "correlation rank of random product states",
        "1, 1, 1",
        ranks.join(", "),
        product_ok,
    ));

    let mut werner_ok = true;
    let mut ranks = Vec::new();
    for p in [0.1, 0.5, 0.9] {
        let rank = correlation_rank(&states::werner(p)?)?.rank;
        werner_ok &= rank == 4;
        ranks.push(rank.to_string());
    }
    rows.push(flag_row(
        "2c",
        "correlation rank of Werner states at p = 0.1, 0.5, 0.9",
        "4, 4, 4",
        ranks.join(", "),
        werner_ok,
    ));

    let trine = correlation_rank(&states::trine_qc())?;
    rows.push(flag_row(
        "2d",
        "trine ensemble state rank, identity-inclusive and traceless-block conventions",
        "3 / 2",
        format!("{} / {}", trine.rank, trine.traceless_rank),
        trine.rank == 3 && trine.traceless_rank == 2,
    ));
    Ok(rows)
}

fn criterion_3(seed: u64, ts: f64) -> Result<Vec<ClaimRow>> {
    let mut max_gamma: f64 = 0.0;
    for trial in 0..1000u64 {
        let mut r = sample::rng(seed, 300 + trial);
        let rho = if trial % 2 == 0 {
            sample::random_cq(&mut r, 2, 2)
        } else {
            sample::random_qc(&mut r, 2, 2)
        };
        let alice = sample::random_qubit_povms(&mut r, 2);
        let bob = sample::random_qubit_povms(&mut r, 2);
        let bx = born_box(&rho, &alice, &bob)?;
        max_gamma = max_gamma.max(mermin_strength(&bx)?);
    }
    Ok(vec![bound_row(
        "3",
        "max covariance Mermin strength over 1000 sampled one-way classical states",
        max_gamma,
        1e-9 * ts,
    )])
}

fn criterion_4(seed: u64, ts: f64) -> Result<Vec<ClaimRow>> {
    let fam = MeasurementFamily::qubit_projective(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])?;
    let mut max_dev: f64 = 0.0;
    for trial in 0..50u64 {
        let mut r = sample::rng(seed, 400 + trial);
        let cv = random_sorted_c(&mut r);
        let tau = states::bell_diagonal(cv)?;
        let bx = born_box(&tau, &fam, &fam)?;
        let gamma = mermin_strength(&bx)?;
        max_dev = max_dev.max((gamma - 2.0 * cv[1].abs()).abs());
    }
    let rows = vec![
        bound_row(
            "4a",
            "Bell-diagonal covariance witness at σ₁/σ₂ settings vs 2|c₂|, 50 draws",
            max_dev,
            1e-9 * ts,
        ),
        {
            let fam = witness_settings();
            let bx = born_box(&states::giorgi_state(), &fam, &fam)?;
            bound_row(
                "4b",
                "covariance Mermin strength of the reference state's Q-witness box",
                mermin_strength(&bx)?,
                1e-9 * ts,
            )
        },
    ];
    Ok(rows)
}

fn criterion_5(_seed: u64, ts: f64) -> Result<Vec<ClaimRow>> {
    let mut rows = Vec::new();

    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if states::is_ppt(&states::werner(mid)?)?.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    rows.push(eq_row(
        "5a",
        "Werner PPT/NPT boundary in p",
        1.0 / 3.0,
        0.5 * (lo + hi),
        1e-6 * ts,
    ));

    let alice = MeasurementFamily::qubit_projective(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])?;
    let bob = MeasurementFamily::qubit_projective(&[[1.0, 0.0, 0.0], [0.0, -1.0, 0.0]])?;
    let f2_at = |p: f64| -> Result<f64> {
        steering_f2(&born_box(&states::werner(p)?, &alice, &bob)?)
    };
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..50 {
        let mid = 0.5 * (lo + hi);
        if f2_at(mid)? < 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    rows.push(eq_row(
        "5b",
        "Werner steering-functional crossing F₂ = 1 in p",
        std::f64::consts::FRAC_1_SQRT_2,
        0.5 * (lo + hi),
        1e-6 * ts,
    ));

    let mut min_d = f64::INFINITY;
    for p in [0.05, 0.1] {
        let d = discord(&states::werner(p)?, Direction::AtoB)?;
        min_d = min_d.min(d.discord);
    }
    rows.push(flag_row(
        "5c",
        "Werner discord at p = 0.05, 0.1 stays above 1e-4 bits",
        "> 1.0e-4",
        format!("{min_d:.3e}"),
        min_d > 1e-4 / ts.max(1e-300),
    ));

    let mut max_dev: f64 = 0.0;
    for p in [0.3, 0.6, 0.9] {
        let ss2 = schrodinger_strength_bd(&states::werner(p)?, 2)?;
        max_dev = max_dev.max((ss2 - p).abs());
    }
    rows.push(bound_row(
        "5d",
        "Werner two-setting Schrödinger strength vs p",
        max_dev,
        1e-12 * ts,
    ));
    Ok(rows)
}

fn criterion_6(seed: u64, ts: f64) -> Result<Vec<ClaimRow>> {
    let mut rows = Vec::new();
    rows.push(eq_row(
        "6a",
        "RSP fidelity of the reference single-axis state",
        0.0,
        rsp_fidelity(&states::giorgi_state())?,
        1e-9 * ts,
    ));
    let mut max_dev: f64 = 0.0;
    for p in [0.3, 0.7] {
        max_dev = max_dev.max((rsp_fidelity(&states::werner(p)?)? - p * p).abs());
    }
    rows.push(bound_row(
        "6b",
        "RSP fidelity of Werner states vs p²",
        max_dev,
        1e-9 * ts,
    ));
    let phi = DensityMatrix::from_pure(&states::phi_plus(), 2, 2)?;
    rows.push(eq_row(
        "6c",
        "RSP fidelity of the maximally entangled state",
        1.0,
        rsp_fidelity(&phi)?,
        1e-9 * ts,
    ));

    let mut r = sample::rng(seed, 600);
    let rho = sample::random_density(&mut r, 2, 2);
    let base = rsp_fidelity(&rho)?;
    let mut max_dev: f64 = 0.0;
    for _ in 0..100 {
        let u = kron(
            &sample::random_unitary(&mut r, 2),
            &sample::random_unitary(&mut r, 2),
        );
        max_dev = max_dev.max((rsp_fidelity(&rho.conjugated(&u)?)? - base).abs());
    }
    rows.push(bound_row(
        "6d",
        "RSP fidelity drift under 100 random local unitaries",
        max_dev,
        1e-9 * ts,
    ));
    Ok(rows)
}

fn criterion_7(seed: u64, ts: f64) -> Result<Vec<ClaimRow>> {
    // Deviation between the original box and the box of the one-side
    // decohered state probed with conjugated effects.
    let dev_for = |rho: &DensityMatrix,
                   phi: &[crate::qmath::CVector],
                   rng: &mut rand_chacha::ChaCha8Rng|
     -> Result<f64> {
        let ch = decohering_map(phi, phi)?;
        let alice = MeasurementFamily::from_effects(vec![
            sample::random_povm(rng, rho.dim_a(), 2),
            sample::random_povm(rng, rho.dim_a(), 2),
        ])?;
        let bob = MeasurementFamily::from_effects(vec![
            sample::random_povm(rng, rho.dim_b(), 2),
            sample::random_povm(rng, rho.dim_b(), 2),
        ])?;
        let decohered = local_apply(&ch, &KrausChannel::identity_channel(rho.dim_b()), rho)?;
        let conj_alice = conjugate_measurements(&ch, &alice)?;
        let original = born_box(rho, &alice, &bob)?;
        let replayed = born_box(&decohered, &conj_alice, &bob)?;
        let mut dev: f64 = 0.0;
        for a in 0..2 {
            for b in 0..2 {
                for x in 0..2 {
                    for y in 0..2 {
                        dev = dev
                            .max((original.prob(a, b, x, y) - replayed.prob(a, b, x, y)).abs());
                    }
                }
            }
        }
        Ok(dev)
    };

    let mut r = sample::rng(seed, 700);
    let computational = [basis_ket(2, 0), basis_ket(2, 1)];
    let mut max_dev = dev_for(&states::trine_qc(), &computational, &mut r)?;
    for _ in 0..100 {
        let rho = sample::random_qc(&mut r, 2, 2);
        let u = sample::random_unitary(&mut r, 2);
        let phi = [u.column(0).into_owned(), u.column(1).into_owned()];
        max_dev = max_dev.max(dev_for(&rho, &phi, &mut r)?);
    }
    Ok(vec![bound_row(
        "7",
        "one-side decohered box with conjugated effects vs the original box",
        max_dev,
        1e-10 * ts,
    )])
}

fn criterion_8(seed: u64, ts: f64) -> Result<Vec<ClaimRow>> {
    let phi = discord_creating_phi();
    let created = local_apply(&phi, &phi, &states::cc_half_half())?;
    let target = states::local_coherent_example();
    let mut rows = vec![bound_row(
        "8a",
        "local channel pair maps the classically correlated state to the coherent one",
        trace_distance(&created, &target)?,
        1e-12 * ts,
    )];

    let fam = witness_settings();
    let bx = born_box(&created, &fam, &fam)?;
    let fit = lhv_fit(&bx, 2, 24, seed)?;
    rows.push(bound_row(
        "8b",
        "created state's box admits a two-component LHV model",
        fit.residual,
        1e-6 * ts,
    ));
    Ok(rows)
}

fn criterion_9(_seed: u64, ts: f64) -> Result<Vec<ClaimRow>> {
    let plus = PureState::new(states::ket_plus())?;
    let zero = PureState::new(basis_ket(2, 0))?;
    let out = cnot_convert(&plus.tensor(&zero))?;
    let f = fidelity_with_pure(&out, &states::phi_plus())?;
    Ok(vec![eq_row(
        "9",
        "cnot turns |+⟩⊗|0⟩ coherence into the maximally entangled state",
        1.0,
        f,
        1e-12 * ts,
    )])
}

fn criterion_10(seed: u64, ts: f64) -> Result<Vec<ClaimRow>> {
    let mut rows = Vec::new();

    let mut worst_rise: f64 = 0.0;
    for trial in 0..3u64 {
        let mut r = sample::rng(seed, 1000 + trial);
        let rho = sample::random_density(&mut r, 2, 2);
        let alice = sample::random_qubit_povms(&mut r, 2);
        let bob = sample::random_qubit_povms(&mut r, 2);
        let bx = born_box(&rho, &alice, &bob)?;
        let mut prev = f64::INFINITY;
        for d in 1..=4 {
            let fit = lhv_fit(&bx, d, 8, seed)?;
            worst_rise = worst_rise.max(fit.residual - prev);
            prev = fit.residual;
        }
    }
    rows.push(bound_row(
        "10a",
        "fit residual never rises with the hidden-variable count (d = 1..4)",
        worst_rise.max(0.0),
        1e-12 * ts,
    ));

    let mut worst: f64 = 0.0;
    for trial in 0..4u64 {
        let mut r = sample::rng(seed, 1100 + trial);
        let rho = sample::random_separable(&mut r, 3);
        let alice = sample::random_qubit_povms(&mut r, 2);
        let bob = sample::random_qubit_povms(&mut r, 2);
        let bx = born_box(&rho, &alice, &bob)?;
        worst = worst.max(lhv_fit(&bx, 4, 12, seed)?.residual);
    }
    rows.push(bound_row(
        "10b",
        "separable-state boxes fit four-component LHV models",
        worst,
        1e-6 * ts,
    ));

    let fam = witness_settings();
    let bx = born_box(&states::werner(0.4)?, &fam, &fam)?;
    let f1 = lhv_fit(&bx, 3, 16, seed)?;
    let f2 = lhv_fit(&bx, 3, 16, seed)?;
    let same = f1.residual.to_bits() == f2.residual.to_bits()
        && match (&f1.model, &f2.model) {
            (FitModel::Lhv(a), FitModel::Lhv(b)) => {
                a.weights == b.weights && a.alice_responses == b.alice_responses
            }
            _ => false,
        };
    rows.push(flag_row(
        "10c",
        "fit result is bit-for-bit deterministic under a fixed seed",
        "identical",
        if same { "identical" } else { "diverged" }.into(),
        same,
    ));
    Ok(rows)
}

fn criterion_11(seed: u64, ts: f64) -> Result<Vec<ClaimRow>> {
    let mut rows = Vec::new();
    let phi = DensityMatrix::from_pure(&states::phi_plus(), 2, 2)?;
    rows.push(eq_row(
        "11a",
        "mutual information of the maximally entangled state (bits)",
        2.0,
        mutual_information(&phi)?,
        1e-10 * ts,
    ));

    let plus_state = DensityMatrix::single(crate::qmath::qubit_from_bloch([1.0, 0.0, 0.0]))?;
    let basis = [basis_ket(2, 0), basis_ket(2, 1)];
    rows.push(eq_row(
        "11b",
        "relative-entropy coherence of |+⟩ in the computational basis (bits)",
        1.0,
        coherence_rel_entropy(&plus_state, &basis)?,
        1e-10 * ts,
    ));

    let mut min_d = f64::INFINITY;
    let mut identity_exact = true;
    for trial in 0..500u64 {
        let mut r = sample::rng(seed, 1200 + trial);
        let rho = sample::random_density(&mut r, 2, 2);
        let rep = discord(&rho, Direction::AtoB)?;
        identity_exact &= rep.discord == rep.mutual_information - rep.classical_correlation;
        min_d = min_d.min(rep.discord);
    }
    rows.push(flag_row(
        "11c",
        "discord identity D = I − C on 500 random states, D ≥ −1e-6",
        "exact identity, min D ≥ -1.0e-6",
        format!(
            "identity {}, min D = {min_d:.3e}",
            if identity_exact { "exact" } else { "broken" }
        ),
        identity_exact && min_d >= -1e-6 * ts,
    ));
    Ok(rows)
}

/// Recomputes one criterion's rows (`k` in `1..=11`).
pub fn criterion_rows(k: usize, seed: u64) -> Result<Vec<ClaimRow>> {
    criterion_scaled(k, seed, 1.0)
}

fn criterion_scaled(k: usize, seed: u64, ts: f64) -> Result<Vec<ClaimRow>> {
    match k {
        1 => criterion_1(seed, ts),
        2 => criterion_2(seed, ts),
        3 => criterion_3(seed, ts),
        4 => criterion_4(seed, ts),
        5 => criterion_5(seed, ts),
        6 => criterion_6(seed, ts),
        7 => criterion_7(seed, ts),
        8 => criterion_8(seed, ts),
        9 => criterion_9(seed, ts),
        10 => criterion_10(seed, ts),
        11 => criterion_11(seed, ts),
        _ => Err(crate::Error::InvalidParameter(format!(
            "criterion {k} does not exist (1..=11)"
        ))),
    }
}

/// Recomputes the full claim table. With `perturb`, every tolerance is
/// shrunk by 1e-9 so the harness demonstrably reports failures.
pub fn run(seed: u64, perturb: bool) -> Result<ReproReport> {
    let ts = if perturb { 1e-9 } else { 1.0 };
    let mut rows = Vec::new();
    for k in 1..=11 {
        rows.extend(criterion_scaled(k, seed, ts)?);
    }
    Ok(ReproReport { rows })
}
