use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use holeburn::dump::{DumpFormat, StateDump};
use holeburn::entanglement::{linear_entropy_closed_form, linear_entropy_printed};
use holeburn::figures::{self, FigureId, FigureOptions};
use holeburn::par::Exec;
use holeburn::sweep::{parse_sweep, run_point, run_sweep, Measure, SweepConfig, Table, DEFAULT_PRECISION};
use holeburn::{Engineering, Error, Family, Result, StateSpec};

#[derive(Parser)]
#[command(
    name = "holeburn",
    version,
    about = "Hole-burnt engineered bosonic states: witnesses, entanglement potential and figure data"
)]
struct Cli {
    /// Evaluate grid points on a single thread.
    #[arg(long, global = true)]
    serial: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump a state's amplitudes and photon-number distribution.
    State(StateArgs),
    /// Evaluate a nonclassicality witness at a point or over a sweep.
    Witness {
        #[arg(value_enum)]
        kind: WitnessKind,
        #[command(flatten)]
        state: StateArgs,
    },
    /// Linear-entropy entanglement potential at a point or over a sweep.
    Entropy {
        #[command(flatten)]
        state: StateArgs,
        /// Also report the triple-sum closed form (single point only).
        #[arg(long)]
        closed_form: bool,
    },
    /// Regenerate the data behind a figure panel, or `all` of them.
    Reproduce(ReproduceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum WitnessKind {
    Hoa,
    Hos,
    Hosps,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Ecs,
    Bs,
    Ks,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum EngineeringArg {
    None,
    Vf,
    Pa,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Args)]
struct StateArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    /// Comma-separated list; `all` selects the parent and both variants.
    #[arg(long, value_enum, value_delimiter = ',', default_value = "none")]
    engineering: Vec<EngineeringArg>,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    theta: f64,
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    #[arg(long, default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 0.02)]
    chi: f64,
    /// NAME=START:STOP:COUNT with NAME one of alpha, theta, p, m, chi.
    #[arg(long)]
    sweep: Option<String>,
    /// Witness orders, comma-separated.
    #[arg(long, value_delimiter = ',')]
    order: Vec<usize>,
    /// Tail tolerance of the truncated Fock basis.
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Panel id such as fig3a, or `all`.
    figure: String,
    #[arg(long, default_value = "figures")]
    out: PathBuf,
    /// Points per curve.
    #[arg(long, default_value_t = 101)]
    points: usize,
    /// Points per contour axis.
    #[arg(long, default_value_t = 101)]
    contour_points: usize,
    /// START:STOP overrides for the axis ranges.
    #[arg(long)]
    alpha_range: Option<String>,
    #[arg(long)]
    p_range: Option<String>,
    #[arg(long)]
    chi_range: Option<String>,
    #[arg(long)]
    theta_range: Option<String>,
    #[arg(long, default_value_t = 1e-12)]
    tol: f64,
}

impl StateArgs {
    fn spec(&self) -> StateSpec {
        let mut s = match self.family {
            FamilyArg::Ecs => StateSpec::ecs(self.alpha),
            FamilyArg::Bs => StateSpec::bs(self.p, self.m),
            FamilyArg::Ks => StateSpec::ks(self.alpha, self.chi),
        };
        if s.family != Family::Bs {
            s = s.with_theta(self.theta);
        }
        s
    }

    fn engineerings(&self) -> Vec<Engineering> {
        if self.engineering.contains(&EngineeringArg::All) {
            return Engineering::ALL.to_vec();
        }
        let mut out: Vec<Engineering> = self
            .engineering
            .iter()
            .map(|e| match e {
                EngineeringArg::Vf => Engineering::VacuumFiltered,
                EngineeringArg::Pa => Engineering::PhotonAdded,
                _ => Engineering::None,
            })
            .collect();
        out.dedup();
        out
    }

    fn writer(&self) -> Result<Box<dyn Write>> {
        open_output(self.out.as_ref())
    }
}

fn open_output(path: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(io::stdout().lock()),
    })
}

fn write_table(table: &Table, args: &StateArgs) -> Result<()> {
    let w = args.writer()?;
    match args.format {
        FormatArg::Csv => table.write_csv(w, DEFAULT_PRECISION),
        FormatArg::Json => {
            let mut w = w;
            table.write_json(&mut w)?;
            writeln!(w)?;
            Ok(())
        }
    }
}

/// Runs `measures` either over the requested sweep or at the single point.
/// Returns the worst status code seen so a failing single point can set the
/// exit code.
fn measure_table(args: &StateArgs, measures: Vec<Measure>, exec: Exec) -> Result<(Table, u8)> {
    let template = args.spec();
    let engineerings = args.engineerings();
    let table = match &args.sweep {
        Some(s) => {
            let (param, grid) = parse_sweep(s)?;
            let cfg = SweepConfig::new(template, param, grid, measures)
                .with_engineerings(&engineerings)
                .with_tail_tol(args.tol);
            return Ok((run_sweep(&cfg, exec)?, 0));
        }
        None => run_point(&template, &engineerings, &measures, args.tol),
    };
    let status = table.values("status").and_then(|v| v[0]).unwrap_or(0.0) as u8;
    Ok((table, status))
}

fn witness(kind: WitnessKind, args: &StateArgs, exec: Exec) -> Result<u8> {
    let orders = if args.order.is_empty() {
        match kind {
            WitnessKind::Hoa => vec![1, 2, 3],
            WitnessKind::Hos => vec![2, 4],
            WitnessKind::Hosps => vec![2, 3, 4, 5],
        }
    } else {
        args.order.clone()
    };
    let measures = orders
        .into_iter()
        .map(|o| match kind {
            WitnessKind::Hoa => Measure::Hoa(o),
            WitnessKind::Hos => Measure::Hos(o),
            WitnessKind::Hosps => Measure::Hosps(o),
        })
        .collect();
    let (table, status) = measure_table(args, measures, exec)?;
    write_table(&table, args)?;
    Ok(status)
}

fn entropy(args: &StateArgs, closed_form: bool, exec: Exec) -> Result<u8> {
    let (mut table, status) = measure_table(args, vec![Measure::Entropy], exec)?;
    if closed_form {
        if args.sweep.is_some() {
            return Err(Error::InvalidParameter(
                "--closed-form applies to a single point only".into(),
            ));
        }
        for e in args.engineerings() {
            let spec = args.spec().with_engineering(e);
            for (suffix, value) in [
                ("closed_form", linear_entropy_closed_form(&spec)),
                ("printed", linear_entropy_printed(&spec)),
            ] {
                table.columns.push(format!("{}_entropy_{suffix}", spec.label()));
                table.rows[0].push(value.map_or(holeburn::sweep::Cell::Empty, holeburn::sweep::Cell::Num));
            }
        }
    }
    write_table(&table, args)?;
    Ok(status)
}

fn state(args: &StateArgs) -> Result<u8> {
    if args.sweep.is_some() {
        return Err(Error::InvalidParameter("`state` does not sweep".into()));
    }
    let engineerings = args.engineerings();
    let [engineering] = engineerings.as_slice() else {
        return Err(Error::InvalidParameter("`state` takes exactly one engineering".into()));
    };
    let dump = StateDump::build(&args.spec().with_engineering(*engineering), args.tol)?;
    let format = match args.format {
        FormatArg::Csv => DumpFormat::Csv,
        FormatArg::Json => DumpFormat::Json,
    };
    dump.write(args.writer()?, format)?;
    Ok(0)
}

fn parse_range(s: &Option<String>, default: (f64, f64)) -> Result<(f64, f64)> {
    let Some(s) = s else { return Ok(default) };
    let bad = || Error::InvalidParameter(format!("range `{s}` is not START:STOP"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let range: (f64, f64) = (
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    );
    if !(range.0.is_finite() && range.1.is_finite() && range.0 < range.1) {
        return Err(bad());
    }
    Ok(range)
}

fn reproduce(args: &ReproduceArgs, exec: Exec) -> Result<u8> {
    let d = FigureOptions::default();
    let opts = FigureOptions {
        curve_points: args.points,
        contour_points: args.contour_points,
        alpha: parse_range(&args.alpha_range, d.alpha)?,
        p: parse_range(&args.p_range, d.p)?,
        chi: parse_range(&args.chi_range, d.chi)?,
        theta: parse_range(&args.theta_range, d.theta)?,
        tail_tol: args.tol,
        exec,
    };
    let ids: Vec<FigureId> = if args.figure.eq_ignore_ascii_case("all") {
        FigureId::ALL.to_vec()
    } else {
        vec![args.figure.parse()?]
    };
    let mut out = io::stdout().lock();
    for id in ids {
        for path in figures::reproduce(id, &args.out, &opts)? {
            writeln!(out, "{}", path.display())?;
        }
    }
    Ok(0)
}

fn run(cli: &Cli) -> Result<u8> {
    let exec = if cli.serial { Exec::Serial } else { Exec::Parallel };
    match &cli.command {
        Command::State(args) => state(args),
        Command::Witness { kind, state } => witness(*kind, state, exec),
        Command::Entropy { state, closed_form } => entropy(state, *closed_form, exec),
        Command::Reproduce(args) => reproduce(args, exec),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.status_code())
        }
    }
}
