use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use quiverlax::dynkin::RootSystem;
use quiverlax::fuchsian::{sample_system, signature_distance, FuchsianSystem, Normalization, DEFAULT_TOL};
use quiverlax::io;
use quiverlax::sakai::sakai_orbit;
use quiverlax::weylops::{dp_orbit, WeylOp, WeylWord};
use quiverlax::{AffineType, Error};

#[derive(Parser)]
#[command(name = "quiverlax", version, about = "Weyl group actions on Fuchsian systems and point configurations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// List the roots of a diagram with their counts.
    Roots {
        #[arg(long = "type")]
        ty: AffineType,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Report which root hyperplanes a parameter file lies on.
    Regular {
        lambda: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Draw a seeded random system with generic parameters.
    Sample {
        #[arg(long = "type")]
        ty: AffineType,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Apply a word to a system file. The word is either a comma list of
    /// node indices (0 is the central reflection) or a JSON list of ops.
    Apply {
        system: PathBuf,
        #[arg(long)]
        word: String,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterate a translation on a system file.
    Orbit {
        system: PathBuf,
        /// Integral vector on the nodes, as JSON.
        #[arg(long)]
        mu: String,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        /// Longest word in the recorded signature.
        #[arg(long, default_value_t = 3)]
        sig_len: usize,
        #[arg(long, default_value_t = DEFAULT_TOL)]
        tol: f64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Iterate a translation on a point configuration file.
    Sakai {
        config: PathBuf,
        #[arg(long)]
        mu: String,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read(path: &PathBuf) -> Result<String, Error> {
    std::fs::read_to_string(path).map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), Error> {
    match out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| Error::Input(format!("{}: {e}", path.display())))?;
            eprintln!("wrote {}", path.display());
            Ok(())
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_mu(s: &str) -> Result<Vec<i64>, Error> {
    serde_json::from_str(s).map_err(|e| Error::Input(format!("--mu must be a JSON list of integers: {e}")))
}

fn parse_word(s: &str) -> Result<WeylWord, Error> {
    let s = s.trim();
    if s.starts_with('[') {
        return serde_json::from_str(s).map_err(|e| Error::Input(format!("malformed word: {e}")));
    }
    let ops = s
        .split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| match t.trim().parse::<usize>() {
            Ok(0) => Ok(WeylOp::Central),
            Ok(node) => Ok(WeylOp::Leg { node }),
            Err(_) => Err(Error::Input(format!("malformed word letter {t:?}"))),
        })
        .collect::<Result<_, _>>()?;
    Ok(WeylWord(ops))
}

fn det_zero_signature(sys: &FuchsianSystem) -> Vec<quiverlax::C64> {
    sys.normalize(Normalization::DetZero).signature(4)
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Roots { ty, format, out } => {
            let roots = io::roots_json(ty);
            eprintln!("{ty}: {} roots / {} hyperplanes", roots.count, roots.hyperplanes);
            eprintln!(
                "{} block-triangular + {} coincidence relations",
                roots.block_triangular, roots.coincidence
            );
            let text = match format {
                Format::Json => io::pretty(&roots),
                Format::Csv => io::roots_csv(ty),
            };
            emit(&text, out.as_ref())
        }
        Command::Regular { lambda, out } => {
            let (ty, lam) = io::lambda_from_json(&read(&lambda)?)?;
            let reg = RootSystem::new(ty).is_regular(&lam);
            eprintln!(
                "{ty}: {}",
                if reg.regular {
                    "regular".to_string()
                } else {
                    format!("on {} root hyperplane(s)", reg.violated.len())
                }
            );
            let report = serde_json::json!({
                "version": io::SCHEMA_VERSION,
                "type": ty.to_string(),
                "regular": reg.regular,
                "violated": reg.violated.iter().map(|b| b.0.clone()).collect::<Vec<_>>(),
            });
            emit(&io::pretty(&report), out.as_ref())
        }
        Command::Sample { ty, seed, out } => {
            let (sys, _) = sample_system(ty, seed)?;
            let n = sys.n();
            eprintln!("{ty}: {} residues of size {n}x{n}", sys.m());
            eprintln!("sum check: OK (defect {:.1e})", sys.sum_defect());
            emit(&io::system_to_json(&sys, None), out.as_ref())
        }
        Command::Apply { system, word, tol, out } => {
            let (sys, prior) = io::system_from_json(&read(&system)?)?;
            let word = parse_word(&word)?;
            word.apply_params(sys.ty, &sys.params()?)?;
            let image = word.apply(&sys, tol)?;
            let d = signature_distance(&det_zero_signature(&image), &det_zero_signature(&sys));
            eprintln!("signature distance to input: {d:.3e}");
            let mut full = prior.unwrap_or_default();
            full.0.extend(word.0);
            emit(&io::system_to_json(&image, Some(&full)), out.as_ref())
        }
        Command::Orbit { system, mu, steps, sig_len, tol, format, out } => {
            let (sys, _) = io::system_from_json(&read(&system)?)?;
            let mu = parse_mu(&mu)?;
            let rows = dp_orbit(&sys, &mu, steps, sig_len, tol)?;
            eprintln!("{}: {steps} steps", sys.ty);
            let text = match format {
                Format::Csv => io::orbit_csv(&rows),
                Format::Json => io::orbit_json(sys.ty, &mu, &rows),
            };
            emit(&text, out.as_ref())
        }
        Command::Sakai { config, mu, steps, format, out } => {
            let p = io::config_from_json(&read(&config)?)?;
            let mu = parse_mu(&mu)?;
            let rows = sakai_orbit(&p, &mu, steps)?;
            let hits = rows.iter().filter(|r| !r.walls.is_empty()).count();
            eprintln!("{} points: {steps} steps, {hits} on walls", p.points());
            if let Some(row) = rows.iter().find(|r| !r.walls.is_empty()) {
                let w = &row.walls[0];
                eprintln!("warning: step {} lies on {w}, root {}", row.step, w.root(&p.lattice()));
            }
            let text = match format {
                Format::Csv => io::sakai_csv(&rows),
                Format::Json => io::sakai_json(&mu, &rows),
            };
            emit(&text, out.as_ref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_degeneracy() { 3 } else { 2 })
        }
    }
}
