use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use inls_lab::error::{category, LabError, LabResult, EXIT_VALIDATION};
use inls_lab::io::read_json;
use inls_lab::scenario::{Datum, Expect, Settings};
use inls_lab::sweep::{sweep, SweepDoc};
use inls_lab::{configure_threads, run_scenario, Kind, ScenarioDoc};
use serde_json::{json, Value};

/// Ground states, potential-well dynamics and normalized solutions of the
/// focusing inhomogeneous NLS `i u_t + Δu = −|x|^b |u|^{p−1} u`.
#[derive(Parser)]
#[command(name = "inls", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    /// Space dimension.
    #[arg(long = "N", value_name = "N")]
    dim: Option<u32>,
    /// Weight exponent, decimal or exact ratio `a/b`.
    #[arg(long, value_name = "B")]
    b: Option<String>,
    /// Nonlinearity exponent, decimal or exact ratio `a/b`.
    #[arg(long, value_name = "P")]
    p: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    omega: Option<f64>,
    /// Grid radius; needs --M.
    #[arg(long = "R", value_name = "R")]
    radius: Option<f64>,
    /// Grid node count; needs --R.
    #[arg(long = "M", value_name = "M")]
    nodes: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Scenario JSON; flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scenario name recorded in the report.
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args, Debug, Default)]
struct Time {
    /// Final time.
    #[arg(long = "T", value_name = "T")]
    t_final: Option<f64>,
    /// Interval between recorded samples.
    #[arg(long)]
    sample_dt: Option<f64>,
    /// Fixed time step (adaptive when absent).
    #[arg(long)]
    dt: Option<f64>,
    /// Largest adaptive step.
    #[arg(long)]
    dt_max: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for the ground state Q_ω and check the Pohozaev identities.
    #[command(name = "ground-state")]
    GroundState {
        #[command(flatten)]
        common: Common,
    },
    /// Functional identities on random fields and on Q_ω.
    Identities {
        #[command(flatten)]
        common: Common,
        /// Number of random fields.
        #[arg(long)]
        fields: Option<usize>,
    },
    /// d(ω) by rescaling against its closed form.
    #[command(name = "d-omega-sweep")]
    DOmegaSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        omegas: Option<Vec<f64>>,
    },
    /// Place a field from an r,re,im file in K⁺, K⁻ or above the threshold.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Evolve a datum and monitor conservation, the virial and blow-up.
    Evolve {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        time: Time,
        /// Initial field from an r,re,im file.
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        datum: Option<Datum>,
        /// Factor applied to the datum.
        #[arg(long)]
        amplitude: Option<f64>,
        /// λ for the instability datum.
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        /// Exit with status 4 when the outcome differs.
        #[arg(long, value_enum)]
        expect: Option<Expect>,
    },
    /// Evolve Q + ε·w for seeded perturbations w and track the distance to the orbit.
    Stability {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        time: Time,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, value_delimiter = ',')]
        seeds: Option<Vec<u64>>,
    },
    /// The dilation family φ^λ: classification, ∂_λ S_ω and optionally its evolution.
    Instability {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        time: Time,
        #[arg(long, allow_negative_numbers = true)]
        lambda: Option<f64>,
        /// Central-difference step in λ.
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, value_enum)]
        expect: Option<Expect>,
    },
    /// Scaling ratios of λ^{1+N/2} Q(λx) at the mass-critical exponent.
    #[command(name = "mass-critical")]
    MassCritical {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        lambdas: Option<Vec<f64>>,
    },
    /// Minimize the energy at fixed mass c and cross-check by scaling.
    Normalized {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        c: Option<f64>,
    },
    /// m(c) over a ladder of masses.
    #[command(name = "m-c-sweep")]
    MCSweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        c_ladder: Option<Vec<f64>>,
    },
    /// Run the scenarios of a sweep document.
    Sweep {
        /// JSON with `scenarios` and optional `defaults`.
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "inls-out")]
        out: PathBuf,
    },
}

impl Time {
    fn apply(self, s: &mut Settings) {
        s.t_final = self.t_final;
        s.sample_dt = self.sample_dt;
        s.dt = self.dt;
        s.dt_max = self.dt_max;
    }
}

fn flags_doc(kind: Kind, c: &Common, settings: Settings) -> ScenarioDoc {
    let mut d = ScenarioDoc { name: c.name.clone(), kind: Some(kind), settings, ..Default::default() };
    d.params.dim = c.dim;
    d.params.b = c.b.clone().map(Value::String);
    d.params.p = c.p.clone().map(Value::String);
    d.params.omega = c.omega;
    d.grid.radius = c.radius;
    d.grid.nodes = c.nodes;
    d.seed = c.seed;
    d.out = c.out.clone();
    d
}

fn single(kind: Kind, common: Common, settings: Settings) -> LabResult<i32> {
    let mut doc = match &common.config {
        Some(path) => read_json::<ScenarioDoc>(path)?,
        None => ScenarioDoc::default(),
    };
    if let Some(k) = doc.kind {
        if k != kind {
            return Err(LabError::Invalid(format!("config is a {k} scenario, not {kind}")));
        }
    }
    doc.merge(&flags_doc(kind, &common, settings));
    let scenario = doc.resolve()?;
    let report = run_scenario(&scenario)?;
    println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
    if let Some(msg) = &report.message {
        emit_error(report.exit_code, msg);
    }
    Ok(report.exit_code)
}

fn emit_error(code: i32, message: &str) {
    eprintln!("{}", json!({ "error": category(code), "exit_code": code, "message": message }));
}

fn dispatch(cmd: Command) -> LabResult<i32> {
    configure_threads()?;
    let mut s = Settings::default();
    match cmd {
        Command::GroundState { common } => single(Kind::GroundState, common, s),
        Command::Identities { common, fields } => {
            s.fields = fields;
            single(Kind::Identities, common, s)
        }
        Command::DOmegaSweep { common, omegas } => {
            s.omegas = omegas;
            single(Kind::DOmegaSweep, common, s)
        }
        Command::Classify { common, input } => {
            s.input = input;
            single(Kind::Classify, common, s)
        }
        Command::Evolve { common, time, input, datum, amplitude, lambda, expect } => {
            time.apply(&mut s);
            s.input = input;
            s.datum = datum;
            s.amplitude = amplitude;
            s.lambda = lambda;
            s.expect = expect;
            single(Kind::Evolve, common, s)
        }
        Command::Stability { common, time, epsilon, seeds } => {
            time.apply(&mut s);
            s.epsilon = epsilon;
            s.seeds = seeds;
            single(Kind::Stability, common, s)
        }
        Command::Instability { common, time, lambda, delta, expect } => {
            time.apply(&mut s);
            s.lambda = lambda;
            s.delta = delta;
            s.expect = expect;
            single(Kind::Instability, common, s)
        }
        Command::MassCritical { common, lambdas } => {
            s.lambdas = lambdas;
            single(Kind::MassCritical, common, s)
        }
        Command::Normalized { common, c } => {
            s.c = c;
            single(Kind::Normalized, common, s)
        }
        Command::MCSweep { common, c_ladder } => {
            s.c_ladder = c_ladder;
            single(Kind::MCSweep, common, s)
        }
        Command::Sweep { config, out } => {
            let doc: SweepDoc = read_json(&config)?;
            let report = sweep(&doc, &out)?;
            println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
            for row in report.rows.iter().filter(|r| r.exit_code != 0) {
                eprintln!(
                    "{}",
                    json!({ "error": row.status, "exit_code": row.exit_code, "scenario": row.name, "message": row.message })
                );
            }
            Ok(report.exit_code)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            emit_error(EXIT_VALIDATION, e.to_string().trim_end());
            return ExitCode::from(EXIT_VALIDATION as u8);
        }
    };
    let code = match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
