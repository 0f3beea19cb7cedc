//! `sdiq` — command-line front end for the `sdiq` library.
//!
//! Every command reads and writes the JSON formats defined in `sdiq::json`
//! and prints numeric output rounded to 12 significant digits, so repeated
//! runs with the same seed are byte-identical and diffable.  `--pretty`
//! switches to a human-oriented rendering (indented JSON; a table for
//! `repro`), `--json` forces the machine format back on.
//!
//! Exit codes: 0 on success, 1 when `repro` finds a failing claim, 2 on
//! usage or schema errors.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::json;

use sdiq::boxes::{born_box, chsh, mermin_strength, q_witness, steering_f2, Behavior};
use sdiq::boxes::MeasurementFamily;
use sdiq::info::{self, Direction};
use sdiq::json as sj;
use sdiq::models;
use sdiq::optimize::{witness_max, MeasFamilyKind, SearchSpec, Witness};
use sdiq::qmath::{basis_ket, DensityMatrix};
use sdiq::repro::{self, ReproReport};
use sdiq::rsp;
use sdiq::states;
use sdiq::Error as LibError;

#[derive(Parser)]
#[command(name = "sdiq", version, about = "Discord, superlocality and steering toolkit")]
struct Cli {
    /// RNG seed for every stochastic step (searches, fits, sampling).
    #[arg(long, global = true, default_value_t = 7)]
    seed: u64,

    /// Restart budget for measurement searches and model fits.
    #[arg(long, global = true, default_value_t = 64)]
    restarts: usize,

    /// Convergence tolerance for measurement searches.
    #[arg(long, global = true, default_value_t = 1e-12)]
    tol: f64,

    /// Force compact machine-readable JSON output.
    #[arg(long, global = true)]
    json: bool,

    /// Human-oriented output: indented JSON, or a table for `repro`.
    #[arg(long, global = true)]
    pretty: bool,

    /// Write the result to a file instead of stdout.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Emit a named reference state as JSON.
    State {
        #[command(subcommand)]
        builder: Builder,
    },
    /// Born-rule behavior of a state under measurement files for each side.
    #[command(name = "box")]
    BoxCmd {
        /// State JSON file.
        #[arg(long)]
        state: PathBuf,
        /// Measurement JSON file for the first subsystem.
        #[arg(long)]
        alice: PathBuf,
        /// Measurement JSON file for the second subsystem.
        #[arg(long)]
        bob: PathBuf,
    },
    /// Evaluate a box witness on a stored box, fixed measurements, or via
    /// a seeded measurement search.
    Witness {
        /// Which witness to evaluate.
        #[arg(long, value_enum)]
        what: WitnessArg,
        /// Box JSON file (mutually exclusive with --state).
        #[arg(long = "box")]
        box_file: Option<PathBuf>,
        /// State JSON file; combine with fixed measurements or --optimize.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Measurement JSON file for the first subsystem.
        #[arg(long)]
        alice: Option<PathBuf>,
        /// Measurement JSON file for the second subsystem.
        #[arg(long)]
        bob: Option<PathBuf>,
        /// Search for the maximizing measurements instead of fixing them.
        #[arg(long)]
        optimize: bool,
        /// Measurement family for the search.
        #[arg(long, value_enum, default_value_t = FamilyArg::Projective)]
        family: FamilyArg,
    },
    /// Information measures of a bipartite state.
    Info {
        /// State JSON file.
        #[arg(long)]
        state: PathBuf,
        /// Quantity to compute.
        #[arg(long, value_enum)]
        what: InfoWhat,
        /// Measured side for discord.
        #[arg(long, value_enum, default_value_t = DirArg::AToB)]
        direction: DirArg,
    },
    /// Fit a bounded-cardinality hidden-variable model to a box.
    Fit {
        /// Box JSON file.
        #[arg(long = "box")]
        box_file: PathBuf,
        /// Model family.
        #[arg(long, value_enum)]
        model: ModelArg,
        /// Hidden-variable cardinality bound.
        #[arg(long)]
        dlambda: usize,
        /// Trusted-side measurement JSON file (lhvlhs only).
        #[arg(long)]
        bob_povms: Option<PathBuf>,
        /// Trusted-side reduced state file, `{"dimA":2,"dimB":1,...}` (lhvlhs only).
        #[arg(long)]
        rho_b: Option<PathBuf>,
    },
    /// Canonical form, remote-state-preparation fidelity, Schrödinger
    /// strengths and the maximal entangled-fraction decomposition.
    Rsp {
        /// State JSON file (two qubits).
        #[arg(long)]
        state: PathBuf,
        /// Entangled pure state to extract; defaults to the Bell state Φ⁺.
        #[arg(long)]
        psi_e: Option<PathBuf>,
        /// Also search the residual for its covariance-witness maximum.
        #[arg(long)]
        check_gamma: bool,
    },
    /// Place a state in the correlation hierarchy; with measurement files,
    /// also run the full box-level verdict.
    Classify {
        /// State JSON file.
        #[arg(long)]
        state: PathBuf,
        /// Measurement JSON file for the first subsystem (verdict mode).
        #[arg(long)]
        alice: Option<PathBuf>,
        /// Measurement JSON file for the second subsystem (verdict mode).
        #[arg(long)]
        bob: Option<PathBuf>,
    },
    /// Recompute every pinned claim and report pass/fail per row.
    Repro {
        /// Self-test mode: shrink tolerances so anchor rows must fail.
        #[arg(long)]
        perturb: bool,
    },
}

#[derive(Subcommand)]
enum Builder {
    /// Bell-state-weight mixture `p·|Φ⁺⟩⟨Φ⁺| + (1−p)·I/4`.
    Werner {
        #[arg(long)]
        p: f64,
    },
    /// Separable two-qubit state with zero covariance witness but Q ≈ 0.0381.
    Giorgi,
    /// Classical-on-B trine ensemble with a non-semiclassical box.
    TrineQc,
    /// Bell-diagonal state with correlation vector `(c1, c2, c3)`.
    BellDiagonal {
        #[arg(long, allow_negative_numbers = true)]
        c1: f64,
        #[arg(long, allow_negative_numbers = true)]
        c2: f64,
        #[arg(long, allow_negative_numbers = true)]
        c3: f64,
    },
    /// Uniform classical-classical two-bit mixture on `|00⟩, |11⟩`.
    CcHalfHalf,
    /// Output of the discord-creating local channel pair on that mixture.
    LocalCoherent,
    /// Maximally entangled state `(|00⟩ + |11⟩)/√2`.
    PhiPlus,
}

#[derive(Copy, Clone, ValueEnum)]
enum WitnessArg {
    Q,
    Gamma,
    Chsh,
    F2,
}

#[derive(Copy, Clone, ValueEnum)]
enum FamilyArg {
    Projective,
    Povm,
}

#[derive(Copy, Clone, ValueEnum)]
enum InfoWhat {
    Discord,
    Rank,
    Coherence,
    Classify,
}

#[derive(Copy, Clone, ValueEnum)]
enum DirArg {
    AToB,
    BToA,
}

#[derive(Copy, Clone, ValueEnum)]
enum ModelArg {
    Lhv,
    Lhvlhs,
}

/// Failure that terminates the process with a usage/schema exit code.
struct CliError(String);

type CliResult<T> = Result<T, CliError>;

impl From<LibError> for CliError {
    fn from(e: LibError) -> Self {
        CliError(e.to_string())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((output, code)) => {
            if let Some(path) = &cli.out {
                if let Err(e) = fs::write(path, output + "\n") {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::from(2);
                }
            } else if let Err(e) = writeln!(io::stdout().lock(), "{output}") {
                // A closed pipe downstream is not our failure.
                if e.kind() != io::ErrorKind::BrokenPipe {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            ExitCode::from(code)
        }
        Err(CliError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> CliResult<(String, u8)> {
    let pretty = cli.pretty && !cli.json;
    match &cli.cmd {
        Cmd::State { builder } => {
            let rho = build_state(builder)?;
            Ok((render(&sj::state_to_json(&rho), pretty)?, 0))
        }
        Cmd::BoxCmd { state, alice, bob } => {
            let rho = load_state(state)?;
            let (ma, mb) = (load_measurement(alice)?, load_measurement(bob)?);
            let bx = born_box(&rho, &ma, &mb)?;
            Ok((render(&sj::box_to_json(&bx), pretty)?, 0))
        }
        Cmd::Witness {
            what,
            box_file,
            state,
            alice,
            bob,
            optimize,
            family,
        } => {
            let record = cmd_witness(cli, *what, box_file, state, alice, bob, *optimize, *family)?;
            Ok((render(&record, pretty)?, 0))
        }
        Cmd::Info {
            state,
            what,
            direction,
        } => {
            let rho = load_state(state)?;
            let record = cmd_info(&rho, *what, *direction)?;
            Ok((render(&record, pretty)?, 0))
        }
        Cmd::Fit {
            box_file,
            model,
            dlambda,
            bob_povms,
            rho_b,
        } => {
            let record = cmd_fit(cli, box_file, *model, *dlambda, bob_povms, rho_b)?;
            Ok((render(&record, pretty)?, 0))
        }
        Cmd::Rsp {
            state,
            psi_e,
            check_gamma,
        } => {
            let record = cmd_rsp(cli, state, psi_e, *check_gamma)?;
            Ok((render(&record, pretty)?, 0))
        }
        Cmd::Classify { state, alice, bob } => {
            let record = cmd_classify(state, alice, bob)?;
            Ok((render(&record, pretty)?, 0))
        }
        Cmd::Repro { perturb } => cmd_repro(cli, *perturb),
    }
}

fn render<T: serde::Serialize>(value: &T, pretty: bool) -> CliResult<String> {
    Ok(sj::to_string_rounded(value, pretty)?)
}

fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_state(path: &Path) -> CliResult<DensityMatrix> {
    Ok(sj::state_from_json(&read_json(path)?)?)
}

fn load_measurement(path: &Path) -> CliResult<MeasurementFamily> {
    Ok(sj::measurement_from_json(&read_json(path)?)?)
}

fn load_box(path: &Path) -> CliResult<Behavior> {
    Ok(sj::box_from_json(&read_json(path)?)?)
}

fn build_state(builder: &Builder) -> CliResult<DensityMatrix> {
    Ok(match builder {
        Builder::Werner { p } => states::werner(*p)?,
        Builder::Giorgi => states::giorgi_state(),
        Builder::TrineQc => states::trine_qc(),
        Builder::BellDiagonal { c1, c2, c3 } => states::bell_diagonal([*c1, *c2, *c3])?,
        Builder::CcHalfHalf => states::cc_half_half(),
        Builder::LocalCoherent => states::local_coherent_example(),
        Builder::PhiPlus => DensityMatrix::from_pure(&states::phi_plus(), 2, 2)?,
    })
}

fn evaluate_witness(what: WitnessArg, bx: &Behavior) -> CliResult<f64> {
    Ok(match what {
        WitnessArg::Q => q_witness(bx)?,
        WitnessArg::Gamma => mermin_strength(bx)?,
        WitnessArg::Chsh => chsh(bx)?,
        WitnessArg::F2 => steering_f2(bx)?,
    })
}

fn witness_name(what: WitnessArg) -> &'static str {
    match what {
        WitnessArg::Q => "q",
        WitnessArg::Gamma => "gamma",
        WitnessArg::Chsh => "chsh",
        WitnessArg::F2 => "f2",
    }
}

#[allow(clippy::too_many_arguments)]
fn cmd_witness(
    cli: &Cli,
    what: WitnessArg,
    box_file: &Option<PathBuf>,
    state: &Option<PathBuf>,
    alice: &Option<PathBuf>,
    bob: &Option<PathBuf>,
    optimize: bool,
    family: FamilyArg,
) -> CliResult<serde_json::Value> {
    match (box_file, state) {
        (Some(path), None) => {
            let bx = load_box(path)?;
            Ok(json!({
                "witness": witness_name(what),
                "source": "box",
                "value": evaluate_witness(what, &bx)?,
            }))
        }
        (None, Some(path)) => {
            let rho = load_state(path)?;
            if optimize {
                let kind = match family {
                    FamilyArg::Projective => MeasFamilyKind::Projective,
                    FamilyArg::Povm => MeasFamilyKind::Povm,
                };
                let witness = match what {
                    WitnessArg::Q => Witness::Q,
                    WitnessArg::Gamma => Witness::Gamma,
                    WitnessArg::Chsh => Witness::Chsh,
                    WitnessArg::F2 => Witness::F2,
                };
                let mut spec = SearchSpec::new(kind.bounds(), cli.seed).with_restarts(cli.restarts);
                spec.tol = cli.tol;
                let report = witness_max(&rho, witness, kind, &spec)?;
                Ok(json!({
                    "witness": witness_name(what),
                    "source": "optimize",
                    "family": match family {
                        FamilyArg::Projective => "projective",
                        FamilyArg::Povm => "povm",
                    },
                    "value": report.value,
                    "alice": sj::measurement_to_json(&report.alice),
                    "bob": sj::measurement_to_json(&report.bob),
                    "restarts": cli.restarts,
                    "seed": cli.seed,
                }))
            } else {
                let (ma, mb) = match (alice, bob) {
                    (Some(a), Some(b)) => (load_measurement(a)?, load_measurement(b)?),
                    _ => {
                        return Err(usage(
                            "witness on a state needs --alice and --bob files, or --optimize",
                        ))
                    }
                };
                let bx = born_box(&rho, &ma, &mb)?;
                Ok(json!({
                    "witness": witness_name(what),
                    "source": "fixed",
                    "value": evaluate_witness(what, &bx)?,
                }))
            }
        }
        _ => Err(usage("pass exactly one of --box or --state")),
    }
}

fn cmd_info(rho: &DensityMatrix, what: InfoWhat, direction: DirArg) -> CliResult<serde_json::Value> {
    match what {
        InfoWhat::Discord => {
            let dir = match direction {
                DirArg::AToB => Direction::AtoB,
                DirArg::BToA => Direction::BtoA,
            };
            let r = info::discord(rho, dir)?;
            Ok(json!({
                "direction": match direction { DirArg::AToB => "a-to-b", DirArg::BToA => "b-to-a" },
                "mutual_information": r.mutual_information,
                "classical_correlation": r.classical_correlation,
                "discord": r.discord,
                "optimal_measurement": {
                    "gamma": r.optimal_measurement.gamma,
                    "eta": r.optimal_measurement.eta,
                    "axis": r.optimal_measurement.axis,
                },
            }))
        }
        InfoWhat::Rank => {
            let s = info::correlation_rank(rho)?;
            Ok(json!({
                "singular_values": s.singular_values,
                "rank": s.rank,
                "traceless_rank": s.traceless_rank,
            }))
        }
        InfoWhat::Coherence => {
            let d = rho.dim();
            let basis: Vec<_> = (0..d).map(|i| basis_ket(d, i)).collect();
            Ok(json!({
                "basis": "computational",
                "coherence_bits": info::coherence_rel_entropy(rho, &basis)?,
            }))
        }
        InfoWhat::Classify => Ok(json!({ "class": info::classify(rho)?.label() })),
    }
}

fn fit_result_json(fr: &models::FitResult) -> serde_json::Value {
    let model = match &fr.model {
        models::FitModel::Lhv(m) => json!({
            "kind": "lhv",
            "d_lambda": m.d_lambda,
            "weights": m.weights,
            "alice_responses": m.alice_responses,
            "bob_responses": m.bob_responses,
        }),
        models::FitModel::LhvLhs(m) => json!({
            "kind": "lhvlhs",
            "d_lambda": m.d_lambda,
            "weights": m.weights,
            "alice_responses": m.alice_responses,
            "bob_hidden_states": m
                .bob_hidden_states
                .iter()
                .map(sj::state_to_json)
                .collect::<Vec<_>>(),
            "bob_povms": sj::measurement_to_json(&m.bob_povms),
        }),
    };
    json!({
        "model": model,
        "residual": fr.residual,
        "lhs_residual": fr.lhs_residual,
        "converged": fr.converged,
        "restarts_used": fr.restarts_used,
        "seed": fr.seed,
    })
}

fn cmd_fit(
    cli: &Cli,
    box_file: &Path,
    model: ModelArg,
    dlambda: usize,
    bob_povms: &Option<PathBuf>,
    rho_b: &Option<PathBuf>,
) -> CliResult<serde_json::Value> {
    let bx = load_box(box_file)?;
    let fr = match model {
        ModelArg::Lhv => models::lhv_fit(&bx, dlambda, cli.restarts, cli.seed)?,
        ModelArg::Lhvlhs => {
            let (povms, rho) = match (bob_povms, rho_b) {
                (Some(p), Some(r)) => (load_measurement(p)?, load_state(r)?),
                _ => return Err(usage("lhvlhs fits need --bob-povms and --rho-b")),
            };
            models::lhvlhs_fit(&bx, dlambda, &povms, &rho, cli.restarts, cli.seed)?
        }
    };
    Ok(fit_result_json(&fr))
}

fn cmd_rsp(
    cli: &Cli,
    state: &Path,
    psi_e: &Option<PathBuf>,
    check_gamma: bool,
) -> CliResult<serde_json::Value> {
    let rho = load_state(state)?;
    let cf = rsp::canonical_form(&rho)?;
    let fidelity = rsp::rsp_fidelity(&rho)?;
    let ss2 = rsp::schrodinger_strength_bd(&rho, 2).ok();
    let ss3 = rsp::schrodinger_strength_bd(&rho, 3).ok();
    let psi = match psi_e {
        Some(path) => sj::pure_from_json(&read_json(path)?)?,
        None => states::phi_plus(),
    };
    let decomposition = match rsp::max_entangled_fraction(&rho, &psi, check_gamma, cli.seed) {
        Ok(d) => json!({
            "p_max": d.p_max,
            "entangled_part": sj::state_to_json(&DensityMatrix::from_pure(&d.entangled_part, 2, 2)?),
            "residual": sj::state_to_json(&d.residual),
            "residual_ppt": d.residual_ppt,
            "residual_gamma_sup": d.residual_gamma_sup,
        }),
        Err(LibError::NotEntangled) => serde_json::Value::Null,
        Err(e) => return Err(e.into()),
    };
    Ok(json!({
        "canonical": {
            "a": cf.a,
            "b": cf.b,
            "c": cf.c,
            "local_u_a": sj::MatrixJson::from_matrix(&cf.local_u_a),
            "local_u_b": sj::MatrixJson::from_matrix(&cf.local_u_b),
        },
        "fidelity": fidelity,
        "ss2": ss2,
        "ss3": ss3,
        "decomposition": decomposition,
    }))
}

fn cmd_classify(
    state: &Path,
    alice: &Option<PathBuf>,
    bob: &Option<PathBuf>,
) -> CliResult<serde_json::Value> {
    let rho = load_state(state)?;
    let class = info::classify(&rho)?;
    let ranks = info::correlation_rank(&rho)?;
    let (ppt, min_pt_eig) = states::is_ppt(&rho)?;
    let mut record = json!({
        "class": class.label(),
        "rank": ranks.rank,
        "traceless_rank": ranks.traceless_rank,
        "ppt": ppt,
        "min_pt_eigenvalue": min_pt_eig,
    });
    if let (Some(a), Some(b)) = (alice, bob) {
        let v = models::verdict(&rho, &load_measurement(a)?, &load_measurement(b)?)?;
        record["verdict"] = json!({
            "bell_local": v.bell_local,
            "polytope_distance": v.polytope_distance,
            "superlocal": v.superlocal,
            "superunsteerable": v.superunsteerable,
            "witnesses": {
                "q": v.witnesses.q,
                "gamma": v.witnesses.gamma,
                "chsh": v.witnesses.chsh,
                "f2": v.witnesses.f2,
            },
            "lhv2_residual": v.lhv2_residual,
            "lhvlhs2_residual": v.lhvlhs2_residual,
        });
    } else if alice.is_some() || bob.is_some() {
        return Err(usage("verdict mode needs both --alice and --bob"));
    }
    Ok(record)
}

fn repro_table(report: &ReproReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<5} {:<6} {:<28} {:<18} description",
        "claim", "status", "expected", "computed"
    );
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{:<5} {:<6} {:<28} {:<18} {}",
            row.id,
            if row.pass { "pass" } else { "FAIL" },
            row.expected,
            row.computed,
            row.description
        );
    }
    let passed = report.rows.iter().filter(|r| r.pass).count();
    let _ = write!(out, "{passed}/{} claims pass", report.rows.len());
    out
}

fn cmd_repro(cli: &Cli, perturb: bool) -> CliResult<(String, u8)> {
    let report = repro::run(cli.seed, perturb)?;
    let code = u8::from(!report.all_pass());
    let output = if cli.pretty && !cli.json {
        repro_table(&report)
    } else {
        render(&report, false)?
    };
    Ok((output, code))
}
