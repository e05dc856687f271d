use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nilavg_cli::{run, Command, Format, Mode, Options};

#[derive(Parser)]
#[command(
    name = "nilavg",
    version,
    about = "Nilpotent multiple ergodic averages workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand)]
enum Sub {
    /// Search for the complexity of a polynomial system.
    Complexity(Common),
    /// Tabulate multiple ergodic averages along a grid of N.
    Average(Common),
    /// Build empirical couplings and run the invariance suite.
    Couple(Common),
    /// Run the randomized verification batteries.
    Verify(Common),
    /// Run whichever command the config names.
    Run(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
    Svg,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration (JSON).
    #[arg(long, short)]
    config: PathBuf,
    /// Output directory; overrides the config and NILAVG_OUT_DIR.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    max_depth: Option<usize>,
    /// Exact rational averages (finite systems only).
    #[arg(long, conflicts_with = "sampled")]
    exact: bool,
    /// Monte Carlo averages.
    #[arg(long)]
    sampled: bool,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

impl Common {
    fn options(self) -> Options {
        Options {
            config: self.config,
            out: self.out,
            seed: self.seed,
            max_depth: self.max_depth,
            mode: match (self.exact, self.sampled) {
                (true, _) => Some(Mode::Exact),
                (_, true) => Some(Mode::Sampled),
                _ => None,
            },
            format: self.format.map(|f| match f {
                FormatArg::Csv => Format::Csv,
                FormatArg::Json => Format::Json,
                FormatArg::Svg => Format::Svg,
            }),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, common) = match cli.command {
        Sub::Complexity(c) => (Some(Command::Complexity), c),
        Sub::Average(c) => (Some(Command::Average), c),
        Sub::Couple(c) => (Some(Command::Couple), c),
        Sub::Verify(c) => (Some(Command::Verify), c),
        Sub::Run(c) => (None, c),
    };
    match run(command, &common.options()) {
        Ok(outcome) => {
            println!("{}", outcome.summary);
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(outcome.code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
