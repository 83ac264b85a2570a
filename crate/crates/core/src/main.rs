use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use masec::covering::{covering_theorem_run, CoveringOptions, OpenBall, RatioOptions};
use masec::instances::{catalog, InstanceSpec};
use masec::quasimetric::{global_height, quasi_distance};
use masec::runner::{self, catalog as checks, ExperimentConfig};
use masec::sections::{estimate_volume, SectionSpec};
use masec::Error;

#[derive(Parser)]
#[command(name = "masec", version, about = "Empirical geometry of sections of convex potentials")]
struct Cli {
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the checks enabled in a config and write the reports.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, env = "MASEC_OUT_DIR")]
        out: Option<PathBuf>,
    },
    /// Print the built-in instances with their constants.
    ListInstances,
    /// Describe a check and the statement it verifies.
    DescribeCheck { name: String },
    /// Quasi-distance max(b(x,y), b(y,x)).
    QuasiDistance {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        x: Coords,
        #[arg(long)]
        y: Coords,
    },
    /// Volume of the section S(x, t) with its standard error.
    Volume {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        center: Coords,
        #[arg(long)]
        height: f64,
        #[arg(long, default_value_t = 100_000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Density covering of an open ball by sections with ratio ε.
    Cover {
        #[command(flatten)]
        instance: InstanceArgs,
        #[arg(long)]
        eps: f64,
        /// Ball center; defaults to the inner point of the domain.
        #[arg(long)]
        center: Option<Coords>,
        #[arg(long, default_value_t = 0.1)]
        radius: f64,
        #[arg(long, default_value_t = 32)]
        centers: usize,
        /// Engulfing constant used for the selection.
        #[arg(long, default_value_t = 4.0)]
        theta: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(clap::Args)]
struct InstanceArgs {
    #[arg(long, default_value = "quadratic_ball")]
    instance: String,
    /// Affine tilt v of φ + v·x.
    #[arg(long)]
    tilt: Option<Coords>,
}

impl InstanceArgs {
    fn spec(&self) -> InstanceSpec {
        InstanceSpec { name: self.instance.clone(), tilt: self.tilt.clone().map(|c| c.0), eps: None }
    }
}

/// Comma-separated coordinates.
#[derive(Clone, Debug)]
struct Coords(Vec<f64>);

impl std::str::FromStr for Coords {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        s.split(',').map(|c| c.trim().parse::<f64>().map_err(|e| format!("`{c}`: {e}"))).collect::<Result<_, _>>().map(Coords)
    }
}

enum Failure {
    Usage(String),
    Check,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

fn dims(what: &str, v: &[f64], n: usize) -> Result<(), Failure> {
    if v.len() != n {
        return Err(Failure::Usage(format!("{what} has dimension {}, instance has {n}", v.len())));
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let outcome = runner::run(&cfg)?;
            let dir = runner::output_dir(out.as_deref(), &cfg);
            outcome.write(&dir)?;
            for c in &outcome.report.checks {
                let consts = c.constants.iter().map(|(k, v)| format!("{k}={v:.6}")).collect::<Vec<_>>().join(" ");
                println!("{:<18} {}  {consts}", c.name, if c.passed { "pass" } else { "FAIL" });
            }
            println!("report written to {}", dir.join("report.json").display());
            if !outcome.report.passed {
                return Err(Failure::Check);
            }
        }
        Command::ListInstances => {
            for line in catalog() {
                println!("{line}");
            }
        }
        Command::DescribeCheck { name } => {
            let info = checks::find(&name).ok_or_else(|| {
                Failure::Usage(format!("unknown check `{name}`; known: {}", checks::names().collect::<Vec<_>>().join(", ")))
            })?;
            println!("{}\n  statement: {}\n  {}", info.name, info.citation, info.description);
        }
        Command::QuasiDistance { instance, x, y } => {
            let inst = instance.spec().build()?;
            dims("x", &x.0, inst.dim())?;
            dims("y", &y.0, inst.dim())?;
            println!("{}", quasi_distance(inst.phi.as_ref(), &x.0, &y.0));
        }
        Command::Volume { instance, center, height, budget, seed } => {
            let inst = instance.spec().build()?;
            dims("center", &center.0, inst.dim())?;
            let spec = SectionSpec::new(center.0, height)?;
            let v = estimate_volume(inst.phi.as_ref(), inst.omega.as_ref(), &spec, budget, seed)?;
            println!("{}", serde_json::to_string_pretty(&v).map_err(Error::from)?);
        }
        Command::Cover { instance, eps, center, radius, centers, theta, seed } => {
            let inst = instance.spec().build()?;
            let c = center.map_or_else(|| inst.omega.inner_point().into_inner(), |c| c.0);
            dims("center", &c, inst.dim())?;
            if !(eps > 0.0 && eps < 1.0) {
                return Err(Failure::Usage(format!("--eps must lie in (0,1), got {eps}")));
            }
            let ball = OpenBall::new(c, radius)?;
            let m = global_height(inst.phi.as_ref(), inst.omega.as_ref(), 4096, seed)?.m_emp;
            let opts = CoveringOptions {
                centers,
                extra_centers: Vec::new(),
                ratio: RatioOptions { t_max: m, ..Default::default() },
                union_budget: 200_000,
                probe_budget: 20_000,
                theta,
            };
            let rep = covering_theorem_run(inst.phi.as_ref(), inst.omega.as_ref(), &ball, eps, &opts, seed)?;
            println!("{}", serde_json::to_string_pretty(&rep).map_err(Error::from)?);
            if !rep.passed {
                return Err(Failure::Check);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
