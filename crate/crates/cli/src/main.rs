//! `sqg`: batch CLI over the semi-quantum game library.
//!
//! Loads games, states, and LOSR maps from JSON, runs evaluations or
//! optimizations, and writes a JSON (or, for μ tables, CSV) report with a
//! provenance block. Exit codes: 0 success, 1 invalid input, 2 convergence
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use sqg_core::appendixlab::{
    entanglement_nonreproducibility_demo, mu_bar, teleport_reconstruct,
};
use sqg_core::games::{
    expected_payoff, joint_distribution, random_semi_quantum_game, ConditionalDistribution,
    SemiQuantumGame,
};
use sqg_core::losr::check_monotonicity;
use sqg_core::optimize::{seesaw_value, separable_value, SeesawOptions};
use sqg_core::qobjects::{
    bell_povm, ppt_entangled, random_povm, DensityMatrix, LosrMap, SeparableJointPovm,
};
use sqg_core::witness::{witness_gap, witness_game_for_state};
use sqg_core::{DimVector, Error, Tolerances};

#[derive(Parser)]
#[command(name = "sqg", version, about = "Semi-quantum nonlocal game toolbox")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Game definition JSON.
    #[arg(long, global = true)]
    game: Option<PathBuf>,

    /// Density matrix JSON.
    #[arg(long, global = true)]
    state: Option<PathBuf>,

    /// LOSR map JSON.
    #[arg(long, global = true)]
    losr: Option<PathBuf>,

    /// Seed for every stochastic step.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// See-saw restarts.
    #[arg(long, global = true)]
    restarts: Option<usize>,

    /// Output path; stdout if omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Copy, Clone, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Expected payoff of a seeded random strategy on a game and state.
    Payoff,
    /// Optimized game value for a shared state.
    Value,
    /// Separable value of a game (trivial shared system).
    SepValue,
    /// Tetrahedral-question, Bell-answer conditional table of a state.
    MuBar,
    /// Witness game for an NPT two-qubit state plus its gap report.
    Witness,
    /// Teleportation reconstruction demo for a state.
    ReconstructDemo,
    /// Game-value monotonicity report under an LOSR map.
    Monotonicity,
    /// Partial-transpose entanglement test.
    Ppt,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            let out = match &cli.out {
                Some(path) => std::fs::write(path, report).map_err(Error::Io),
                None => {
                    println!("{report}");
                    Ok(())
                }
            };
            match out {
                Ok(()) => ExitCode::SUCCESS,
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Convergence { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: &Cli) -> Result<String, Error> {
    let (tols, tol_override) = tolerances()?;
    if cli.format == Format::Csv && !matches!(cli.command, Command::MuBar) {
        return Err(Error::Argument(
            "CSV output is only available for mu-bar".into(),
        ));
    }

    let result: Value = match cli.command {
        Command::Payoff => {
            let g = load_game(cli, &tols)?;
            let rho = load_state(cli, &tols)?;
            let seed = need_seed(cli)?;
            let (p, q) = seeded_strategy(&g, &rho, seed)?;
            let mu = joint_distribution(&g, &rho, &p, &q, &tols)?;
            let payoff = expected_payoff(&g, &mu)?;
            json!({"payoff": payoff, "mu": mu, "strategy_seed": seed})
        }
        Command::Value => {
            let g = load_game(cli, &tols)?;
            let rho = load_state(cli, &tols)?;
            let opts = seesaw_opts(cli)?;
            let res = seesaw_value(&g, &rho, &opts, &tols)?;
            serde_json::to_value(&res)?
        }
        Command::SepValue => {
            let g = load_game(cli, &tols)?;
            let opts = seesaw_opts(cli)?;
            let res = separable_value(&g, &opts, &tols)?;
            serde_json::to_value(&res)?
        }
        Command::MuBar => {
            let rho = load_state(cli, &tols)?;
            let mu = mu_bar(&rho)?;
            if cli.format == Format::Csv {
                return Ok(mu_csv(&mu));
            }
            serde_json::to_value(&mu)?
        }
        Command::Witness => {
            let rho = load_state(cli, &tols)?;
            let opts = seesaw_opts(cli)?;
            let wg = witness_game_for_state(&rho, &tols)?;
            let report = witness_gap(&rho, &wg, &opts, &tols)?;
            json!({"witness_game": serde_json::to_value(&wg)?, "report": serde_json::to_value(&report)?})
        }
        Command::ReconstructDemo => {
            let rho = load_state(cli, &tols)?;
            let bell = SeparableJointPovm::new(
                vec![1.0],
                vec![(bell_povm(), bell_povm())],
                &tols,
            )?;
            let reconstructed = teleport_reconstruct(&rho, &bell, &tols)?;
            let residual = reconstructed.mat.max_abs_diff(&rho.mat);
            let mixed = DensityMatrix::new(
                sqg_core::CMatrix::identity(4).scale_re(0.25),
                DimVector(vec![2, 2]),
                &tols,
            )?;
            let demo = entanglement_nonreproducibility_demo(
                &rho,
                &mixed,
                &bell_povm(),
                &bell_povm(),
                &tols,
            )?;
            json!({
                "teleport_residual": residual,
                "demo_vs_white_noise": serde_json::to_value(&demo)?,
            })
        }
        Command::Monotonicity => {
            let rho = load_state(cli, &tols)?;
            let m = load_losr(cli, &tols)?;
            let seed = need_seed(cli)?;
            let opts = seesaw_opts(cli)?;
            let games: Vec<SemiQuantumGame> = match load_game_opt(cli, &tols)? {
                Some(g) => vec![g],
                None => (0..5)
                    .map(|k| random_semi_quantum_game(2, 2, seed.wrapping_add(k)))
                    .collect::<Result<_, _>>()?,
            };
            let report = check_monotonicity(&rho, &m, &games, &opts, &tols)?;
            serde_json::to_value(&report)?
        }
        Command::Ppt => {
            let rho = load_state(cli, &tols)?;
            let report = ppt_entangled(&rho, &tols)?;
            serde_json::to_value(&report)?
        }
    };

    let report = json!({
        "result": result,
        "provenance": provenance(cli, &tols, tol_override),
    });
    Ok(serde_json::to_string_pretty(&report)?)
}

fn tolerances() -> Result<(Tolerances, Option<f64>), Error> {
    match std::env::var("SQG_TOL_OVERRIDE") {
        Ok(raw) => {
            let tol: f64 = raw
                .parse()
                .map_err(|_| Error::Argument(format!("SQG_TOL_OVERRIDE is not a number: {raw}")))?;
            if !(tol.is_finite() && tol > 0.0) {
                return Err(Error::Argument(
                    "SQG_TOL_OVERRIDE must be a positive finite number".into(),
                ));
            }
            Ok((Tolerances::uniform(tol), Some(tol)))
        }
        Err(_) => Ok((Tolerances::default(), None)),
    }
}

fn provenance(cli: &Cli, tols: &Tolerances, tol_override: Option<f64>) -> Value {
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    json!({
        "seed": cli.seed,
        "restarts": cli.restarts,
        "tolerances": tols,
        "tol_override": tol_override,
        "version": env!("CARGO_PKG_VERSION"),
        "timestamp": timestamp,
    })
}

fn load_json<T: serde::de::DeserializeOwned>(path: &PathBuf) -> Result<T, Error> {
    let raw = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&raw)?)
}

fn load_game(cli: &Cli, tols: &Tolerances) -> Result<SemiQuantumGame, Error> {
    load_game_opt(cli, tols)?
        .ok_or_else(|| Error::Argument("this command requires --game".into()))
}

fn load_game_opt(cli: &Cli, tols: &Tolerances) -> Result<Option<SemiQuantumGame>, Error> {
    match &cli.game {
        None => Ok(None),
        Some(path) => {
            let g: SemiQuantumGame = load_json(path)?;
            g.validate(tols)?;
            Ok(Some(g))
        }
    }
}

fn load_state(cli: &Cli, tols: &Tolerances) -> Result<DensityMatrix, Error> {
    let path = cli
        .state
        .as_ref()
        .ok_or_else(|| Error::Argument("this command requires --state".into()))?;
    let rho: DensityMatrix = load_json(path)?;
    rho.validate(tols)?;
    Ok(rho)
}

fn load_losr(cli: &Cli, tols: &Tolerances) -> Result<LosrMap, Error> {
    let path = cli
        .losr
        .as_ref()
        .ok_or_else(|| Error::Argument("this command requires --losr".into()))?;
    let m: LosrMap = load_json(path)?;
    m.validate(tols)?;
    Ok(m)
}

fn need_seed(cli: &Cli) -> Result<u64, Error> {
    cli.seed
        .ok_or_else(|| Error::Argument("this command requires --seed".into()))
}

fn seesaw_opts(cli: &Cli) -> Result<SeesawOptions, Error> {
    let mut opts = SeesawOptions {
        seed: need_seed(cli)?,
        ..Default::default()
    };
    if let Some(r) = cli.restarts {
        opts.restarts = r;
    }
    opts.validate()?;
    Ok(opts)
}

/// Seeded random local POVMs with labels matching the game's answer sets.
fn seeded_strategy(
    g: &SemiQuantumGame,
    rho: &DensityMatrix,
    seed: u64,
) -> Result<(sqg_core::qobjects::Povm, sqg_core::qobjects::Povm), Error> {
    if rho.dims.len() != 2 {
        return Err(Error::Argument("shared state must be bipartite".into()));
    }
    let (da, db) = (rho.dims.dims()[0], rho.dims.dims()[1]);
    let mut p = random_povm(
        &DimVector(vec![g.dim_a0(), da]),
        g.n_x(),
        seed,
    )?;
    let mut q = random_povm(
        &DimVector(vec![db, g.dim_b0()]),
        g.n_y(),
        seed.wrapping_add(1),
    )?;
    p.labels = g.x_labels.clone();
    q.labels = g.y_labels.clone();
    Ok((p, q))
}

/// CSV with rows (s,t) and columns (x,y), both lexicographic.
fn mu_csv(mu: &ConditionalDistribution) -> String {
    let (nx, ny, ns, nt) = mu.shape();
    let mut out = String::from("s,t");
    for x in 0..nx {
        for y in 0..ny {
            out.push_str(&format!(",mu(x={x};y={y})"));
        }
    }
    out.push('\n');
    for s in 0..ns {
        for t in 0..nt {
            out.push_str(&format!("{s},{t}"));
            for x in 0..nx {
                for y in 0..ny {
                    out.push_str(&format!(",{}", mu.get(x, y, s, t)));
                }
            }
            out.push('\n');
        }
    }
    out
}
