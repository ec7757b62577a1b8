//! Command-line front end. `cli_main` never exits the process; it returns
//! 0 on success, 1 for usage or validation errors and 2 for internal failures.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::beamformer::{solve, BeamformingSolution, Method, TargetSinrs};
use crate::channel::{make_channel_set, ChannelSet};
use crate::config::{db_to_linear, ChannelMode, ScenarioConfig};
use crate::error::{Error, Result};
use crate::sim::{run_sweep, verifier_self_check, Figure, Scale, SweepResult, SweepSpec};
use crate::verifier::{check_lmi_feasibility, MuSearch};

#[derive(Parser, Debug)]
#[command(name = "secbeam", version, about = "Robust secure beamforming: solve, verify and sweep")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one scenario and print the solution as JSON.
    Solve(SolveArgs),
    /// Check a solution against its channels and print the feasibility report.
    Verify(VerifyArgs),
    /// Run a sweep spec file and write CSV plus aggregate JSON.
    Sweep(SweepArgs),
    /// Run built-in figure presets (fig2..fig8, or `all`).
    Repro(ReproArgs),
}

/// Scenario fields; flags override values read from `--config`.
#[derive(Args, Debug, Default)]
struct ScenarioFlags {
    /// Flat JSON scenario file.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long = "n")]
    n_antennas: Option<usize>,
    #[arg(long = "k")]
    n_users: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    gamma_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    gamma_e_db: Option<f64>,
    #[arg(long)]
    g: Option<f64>,
    #[arg(long)]
    g_eve: Option<f64>,
    #[arg(long)]
    sigma2: Option<f64>,
    /// synthetic or physical
    #[arg(long, value_parser = parse_mode)]
    channel_mode: Option<ChannelMode>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    an_fraction: Option<f64>,
}

impl ScenarioFlags {
    fn resolve(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::from_json(&read(path)?)?,
            None => ScenarioConfig::default(),
        };
        macro_rules! apply {
            ($($flag:ident),*) => {$(
                if let Some(v) = self.$flag.clone() {
                    cfg.$flag = v;
                }
            )*};
        }
        apply!(n_antennas, n_users, gamma_db, gamma_e_db, g, sigma2, channel_mode, an_fraction);
        if let Some(v) = self.g_eve {
            cfg.g_eve = Some(v);
        }
        if let Some(v) = self.seed {
            cfg.base_seed = v;
        }
        if let Some(v) = self.trials {
            cfg.n_trials = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    scenario: ScenarioFlags,
    /// robust, non_robust or an_split
    #[arg(long, default_value = "robust", value_parser = parse_method)]
    method: Method,
    /// Also write the channel set used as JSON.
    #[arg(long)]
    channels_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Channel set JSON (as written by `solve --channels-out`).
    #[arg(long)]
    channels: PathBuf,
    /// Solution JSON (as printed by `solve`).
    #[arg(long)]
    solution: PathBuf,
    /// Target user SINR in dB.
    #[arg(long, default_value_t = 10.0, allow_hyphen_values = true)]
    gamma_db: f64,
    /// Eve SINR ceiling in dB.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma_e_db: f64,
    /// Evaluate at the solution's own multipliers instead of searching.
    #[arg(long)]
    fixed_mu: bool,
}

#[derive(Args, Debug)]
struct SweepArgs {
    /// Sweep spec JSON: {"swept_parameter": "g"|"N"|"K", "values": [...], "fixed": {...}}.
    #[arg(long)]
    spec: PathBuf,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Base name of the output files.
    #[arg(long, default_value = "sweep")]
    name: String,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args, Debug)]
struct ReproArgs {
    /// fig2..fig8 or all
    preset: String,
    #[arg(long, default_value = "desk", value_parser = parse_scale)]
    scale: Scale,
    /// Trial count override (desk default 2000, full 10000).
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
}

fn parse_method(s: &str) -> std::result::Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_scale(s: &str) -> std::result::Result<Scale, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_mode(s: &str) -> std::result::Result<ChannelMode, String> {
    match s {
        "synthetic" => Ok(ChannelMode::Synthetic),
        "physical" => Ok(ChannelMode::Physical),
        _ => Err(format!("unknown channel mode `{s}` (expected synthetic or physical)")),
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::invalid(path.display().to_string(), e.to_string()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, contents)?;
    Ok(())
}

fn solve_cmd(args: &SolveArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = args.scenario.resolve()?;
    let channels = make_channel_set(&cfg)?;
    let sol = solve(args.method, &channels, &cfg.targets()?, cfg.an_fraction)?;
    if let Some(path) = &args.channels_out {
        write(path, &channels.to_json()?)?;
    }
    writeln!(out, "{}", sol.to_json()?)?;
    Ok(())
}

fn verify_cmd(args: &VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let channels = ChannelSet::from_json(&read(&args.channels)?)?;
    let sol = BeamformingSolution::from_json(&read(&args.solution)?)?;
    let targets = TargetSinrs::uniform(
        channels.n_users(),
        db_to_linear(args.gamma_db),
        db_to_linear(args.gamma_e_db),
    )?;
    let search = if args.fixed_mu {
        MuSearch::from_solution(&sol)
    } else {
        MuSearch::Maximize
    };
    let report = check_lmi_feasibility(&channels, &sol, &targets, &search)?;
    writeln!(out, "{}", report.to_json()?)?;
    Ok(())
}

fn write_outputs(dir: &Path, name: &str, result: &SweepResult) -> Result<()> {
    write(&dir.join(format!("{name}.csv")), &result.to_csv_string()?)?;
    write(&dir.join(format!("{name}.json")), &result.to_json()?)
}

fn sweep_cmd(args: &SweepArgs, err: &mut dyn Write) -> Result<()> {
    let spec = SweepSpec::from_json(&read(&args.spec)?)?;
    let result = run_sweep(&spec, args.workers)?;
    write_outputs(&args.out, &args.name, &result)?;
    writeln!(err, "wrote {} rows to {}", result.rows.len(), args.out.join(format!("{}.csv", args.name)).display())?;
    Ok(())
}

fn repro_cmd(args: &ReproArgs, err: &mut dyn Write) -> Result<()> {
    let figures = if args.preset == "all" {
        Figure::ALL.to_vec()
    } else {
        vec![args.preset.parse::<Figure>()?]
    };
    for fig in figures {
        let spec = fig.spec(args.scale, args.trials, args.seed);
        verifier_self_check(&spec)?;
        let result = run_sweep(&spec, args.workers)?;
        // outputs are kept even when the trend check fails, for inspection
        write_outputs(&args.out, fig.name(), &result)?;
        fig.trend_check(&result)?;
        writeln!(err, "{fig}: self-checks passed, wrote {}", args.out.join(format!("{fig}.csv")).display())?;
    }
    Ok(())
}

/// Runs the CLI on `args` (including the program name).
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let (mut out, mut err) = (stdout.lock(), stderr.lock());
    let result = match &cli.command {
        Command::Solve(a) => solve_cmd(a, &mut out),
        Command::Verify(a) => verify_cmd(a, &mut out),
        Command::Sweep(a) => sweep_cmd(a, &mut err),
        Command::Repro(a) => repro_cmd(a, &mut err),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_validation() {
                1
            } else {
                2
            }
        }
    }
}
