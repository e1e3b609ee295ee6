use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use fivephoton::harness::{
    run_fig3, run_fig4a, run_fig4b, run_ghz, run_rates, run_table1, run_teleport, DelayScan, Fig3,
    RunReport,
};
use fivephoton::measurement::AnalysisBasis;
use fivephoton::protocols::Sign;
use fivephoton::{DeviceConfig, PolKet, SimError};

/// Five-photon entanglement and open-destination teleportation simulator.
#[derive(Parser, Debug)]
#[command(name = "fivephoton", version)]
struct Cli {
    /// TOML device configuration; the bundled fitted configuration if omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the RNG seed of the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Writes `<experiment>.<format>` here instead of printing to stdout.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// GHZ state of 3, 4 or 5 photons measured in one basis.
    Ghz {
        #[arg(long, default_value_t = 5)]
        n: usize,
        /// HV, PM or RL.
        #[arg(long, default_value = "HV")]
        basis: AnalysisBasis,
    },
    /// Teleports one input state to location 3, 4 or 5.
    Teleport {
        /// H, V, +, -, R or L.
        #[arg(long, default_value = "+", allow_hyphen_values = true)]
        input: String,
        #[arg(long, default_value_t = 5)]
        location: u8,
        /// Readout of the two other photons, e.g. `++` or `+-`.
        #[arg(long, default_value = "++", allow_hyphen_values = true)]
        outcomes: String,
    },
    /// Four-photon fringe against Delay 1.
    Fig3a(ScanArgs),
    /// Three-photon fringe against Delay 2.
    Fig3b(ScanArgs),
    /// Five-photon H/V table and signal-to-noise ratio.
    Fig4a,
    /// Five-photon fringe against Delay 1.
    Fig4b(ScanArgs),
    /// Teleportation fidelities of ±, R, L at locations 4 and 5.
    Table1,
    /// Two-, three- and five-fold coincidence rates.
    Rates,
}

#[derive(Args, Debug)]
struct ScanArgs {
    /// First delay position in micrometres.
    #[arg(long, default_value_t = -1200.0, allow_hyphen_values = true)]
    start: f64,
    #[arg(long, default_value_t = 1200.0, allow_hyphen_values = true)]
    stop: f64,
    #[arg(long, default_value_t = 41)]
    points: usize,
}

impl From<&ScanArgs> for DelayScan {
    fn from(a: &ScanArgs) -> Self {
        DelayScan {
            start_um: a.start,
            stop_um: a.stop,
            points: a.points,
        }
    }
}

fn parse_pol(s: &str) -> anyhow::Result<PolKet> {
    Ok(match s {
        "H" | "h" => PolKet::horizontal(),
        "V" | "v" => PolKet::vertical(),
        "+" | "plus" => PolKet::plus(),
        "-" | "minus" => PolKet::minus(),
        "R" | "r" => PolKet::right(),
        "L" | "l" => PolKet::left(),
        _ => return Err(SimError::InvalidArgument(format!("unknown input state {s:?}")).into()),
    })
}

fn parse_outcomes(s: &str) -> anyhow::Result<(Sign, Sign)> {
    let signs: Vec<Sign> = s
        .chars()
        .map(|c| c.to_string().parse::<Sign>())
        .collect::<Result<_, _>>()?;
    match signs[..] {
        [a, b] => Ok((a, b)),
        _ => Err(SimError::InvalidArgument(format!("expected two signs, got {s:?}")).into()),
    }
}

fn load_config(cli: &Cli) -> anyhow::Result<DeviceConfig> {
    let mut cfg = match &cli.config {
        Some(path) => DeviceConfig::load(path)?,
        None => DeviceConfig::fitted(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = load_config(cli)?;
    let report: RunReport = match &cli.command {
        Command::Ghz { n, basis } => {
            if !(3..=5).contains(n) {
                return Err(SimError::InvalidArgument(format!("GHZ size {n} not in 3..=5")).into());
            }
            run_ghz(*n, *basis, &cfg)?
        }
        Command::Teleport {
            input,
            location,
            outcomes,
        } => run_teleport(
            &parse_pol(input)?,
            *location,
            parse_outcomes(outcomes)?,
            &cfg,
        )?,
        Command::Fig3a(scan) => run_fig3(Fig3::A, scan.into(), &cfg)?,
        Command::Fig3b(scan) => run_fig3(Fig3::B, scan.into(), &cfg)?,
        Command::Fig4a => run_fig4a(&cfg)?,
        Command::Fig4b(scan) => run_fig4b(scan.into(), &cfg)?,
        Command::Table1 => run_table1(&cfg)?,
        Command::Rates => run_rates(&cfg)?,
    };
    let (text, ext) = match cli.format {
        Format::Json => (report.to_json()?, "json"),
        Format::Csv => (report.to_csv()?, "csv"),
    };
    match &cli.out_dir {
        Some(dir) => {
            if dir.exists() && !dir.is_dir() {
                bail!(SimError::Io(format!(
                    "{} is not a directory",
                    dir.display()
                )));
            }
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            let path = dir.join(format!("{}.{ext}", report.experiment));
            std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
            println!("{}", path.display());
        }
        None => {
            let mut out = std::io::stdout().lock();
            let nl = if text.ends_with('\n') { "" } else { "\n" };
            match write!(out, "{text}{nl}").and_then(|()| out.flush()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let kind = e.downcast_ref::<SimError>().map_or("io", SimError::kind);
            let msg = serde_json::json!({ "error": kind, "message": format!("{e:#}") });
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}
