use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{CommandFactory, Parser, Subcommand, ValueEnum};

use photorate::info_theory::Scheme;
use photorate::montecarlo::{self, DEFAULT_SEED, DEFAULT_TRIALS, SIGMA_LIMIT};
use photorate::optimize::SourceFamily;
use photorate::sweep::{self, CsvRow, DarkRule, Grid, Spacing};
use photorate::Error;

#[derive(Parser, Debug)]
#[command(name = "photorate", version, about = "OOK/PPM information rates with direct detection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Photon information efficiency against mean output photons per bin.
    PieCurve {
        #[arg(long, default_value_t = 1e-4)]
        eta_nbar_min: f64,
        #[arg(long, default_value_t = 1e-1)]
        eta_nbar_max: f64,
        #[arg(long, default_value_t = 61)]
        eta_nbar_points: usize,
        /// CSV output path; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also render an SVG line chart to this path.
        #[arg(long)]
        plot: Option<PathBuf>,
    },
    /// Fock-mixture over Poissonian rate ratio on an (eta, nbar) grid.
    RatioMap {
        #[arg(long, default_value_t = 0.01)]
        eta_min: f64,
        #[arg(long, default_value_t = 1.0)]
        eta_max: f64,
        #[arg(long, default_value_t = 50)]
        eta_points: usize,
        #[arg(long, default_value_t = 1e-3)]
        nbar_min: f64,
        #[arg(long, default_value_t = 0.2)]
        nbar_max: f64,
        #[arg(long, default_value_t = 50)]
        nbar_points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Optimize a single operating point.
    Optimize {
        #[arg(long, value_enum, default_value_t = SchemeArg::Ppm)]
        scheme: SchemeArg,
        #[arg(long, value_enum, default_value_t = FamilyArg::Poisson)]
        family: FamilyArg,
        #[arg(long)]
        nbar: f64,
        #[arg(long)]
        eta: f64,
        #[arg(long, value_enum, default_value_t = DarkArg::None)]
        dark: DarkArg,
        #[arg(long, value_enum, default_value_t = FormatArg::Text)]
        format: FormatArg,
    },
    /// Check the no-click probabilities against Monte-Carlo sampling.
    Validate {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: u64,
        /// Restrict the suite to these transmissions.
        #[arg(long, value_delimiter = ',')]
        eta: Vec<f64>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Ook,
    Ppm,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Poisson,
    Fock,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DarkArg {
    None,
    Quarter,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Csv,
    Text,
}

fn usage_error(kind: ErrorKind, message: impl std::fmt::Display) -> ! {
    Cli::command().error(kind, message).exit()
}

fn grid(min: f64, max: f64, points: usize, spacing: Spacing) -> Grid {
    Grid::new(min, max, points, spacing).unwrap_or_else(|e| usage_error(ErrorKind::ValueValidation, e))
}

fn emit<R: CsvRow>(rows: &[R], out: Option<&Path>) -> photorate::Result<()> {
    match out {
        Some(path) => sweep::write_csv_file(rows, path),
        None => sweep::write_csv(rows, io::stdout().lock()).map_err(|source| Error::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn run(command: Command) -> photorate::Result<bool> {
    match command {
        Command::PieCurve {
            eta_nbar_min,
            eta_nbar_max,
            eta_nbar_points,
            out,
            plot,
        } => {
            let g = grid(eta_nbar_min, eta_nbar_max, eta_nbar_points, Spacing::Log);
            let rows = sweep::pie_curve(&g)?;
            emit(&rows, out.as_deref())?;
            if let Some(path) = plot {
                std::fs::write(&path, sweep::pie_curve_svg(&rows)).map_err(|source| Error::Io { path, source })?;
            }
            Ok(true)
        }
        Command::RatioMap {
            eta_min,
            eta_max,
            eta_points,
            nbar_min,
            nbar_max,
            nbar_points,
            out,
        } => {
            let etas = grid(eta_min, eta_max, eta_points, Spacing::Linear);
            let nbars = grid(nbar_min, nbar_max, nbar_points, Spacing::Log);
            let rows = sweep::ratio_map(&etas, &nbars)?;
            emit(&rows, out.as_deref())?;
            Ok(true)
        }
        Command::Optimize {
            scheme,
            family,
            nbar,
            eta,
            dark,
            format,
        } => {
            let scheme = match scheme {
                SchemeArg::Ook => Scheme::Ook,
                SchemeArg::Ppm => Scheme::Ppm,
            };
            let family = match family {
                FamilyArg::Poisson => SourceFamily::Poisson,
                FamilyArg::Fock => SourceFamily::FockMixture,
            };
            let dark = match dark {
                DarkArg::None => DarkRule::None,
                DarkArg::Quarter => DarkRule::Quarter,
            };
            if scheme == Scheme::Ppm && dark != DarkRule::None {
                usage_error(ErrorKind::ArgumentConflict, "dark counts are only modeled for --scheme ook");
            }
            let row = sweep::optimize_point(scheme, family, nbar, eta, dark)?;
            match format {
                FormatArg::Csv => emit(std::slice::from_ref(&row), None)?,
                FormatArg::Text => println!("{}", row.to_text()),
            }
            Ok(true)
        }
        Command::Validate { seed, trials, eta } => {
            if trials == 0 {
                usage_error(ErrorKind::ValueValidation, "--trials must be at least 1");
            }
            let suite = if eta.is_empty() {
                montecarlo::default_suite()
            } else {
                if let Some(bad) = eta.iter().find(|e| !(0.0..=1.0).contains(*e)) {
                    usage_error(ErrorKind::ValueValidation, format!("--eta {bad} is outside [0, 1]"));
                }
                montecarlo::suite_for_etas(&eta)
            };
            let mut stdout = io::stdout().lock();
            let mut all_pass = true;
            for case in &suite {
                let o = montecarlo::run_case(case, trials, seed)?;
                all_pass &= o.pass;
                let _ = writeln!(
                    stdout,
                    "{} {:<32} eps_hat={:.6} eps={:.6} std_err={:.2e} sigma={:.2}",
                    if o.pass { "PASS" } else { "FAIL" },
                    o.name,
                    o.eps_hat,
                    o.eps,
                    o.std_err,
                    o.sigma
                );
            }
            let _ = writeln!(
                stdout,
                "{} ({} cases, {} trials each, seed {:#x}, limit {}σ)",
                if all_pass { "all passed" } else { "FAILED" },
                suite.len(),
                trials,
                seed,
                SIGMA_LIMIT
            );
            Ok(all_pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
