mod campaigns;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dyadic_grothendieck::constants::{constants, k_of_t, minimize_k, minimize_l};
use dyadic_grothendieck::multilinear::{alpha_lp, format_rational, standard_form, CoveringSequence, KszSigns};
use dyadic_grothendieck::phi::{Mode, PhiConfig, Scheme};
use serde::Serialize;

use report::{Format, Row};

const EXIT_CHECK_FAILED: u8 = 2;
const EXIT_CONFIG: u8 = 3;

const AFTER_HELP: &str = "\
Reports are CSV by default. The first line is a '#' comment holding the command
and a unix timestamp; the second is the header

  case_id,inputs_digest,value,expected,defect,budget,pass

inputs_digest is the first 16 hex digits of SHA-256 over the case inputs.
Complex cells are written as <re>+<im>i. With --format json the same rows are
written as a JSON array. Rows are ordered by case id and, apart from the
timestamp line, depend only on the command, its flags and --seed.

Exit codes: 0 every row passes, 2 some row fails, 3 bad configuration or a
library error (a JSON error record goes to stderr).
DG_THREADS (or --threads) caps the worker pool.";

#[derive(Parser, Debug)]
#[command(name = "dg", version, about = "Seeded verification campaigns for dyadic Grothendieck maps", after_help = AFTER_HELP)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Worker threads for the trial pool.
    #[arg(long, env = "DG_THREADS", global = true)]
    threads: Option<usize>,
}

#[derive(Args, Debug, Clone)]
struct Output {
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Expansion {
    /// Level cap J.
    #[arg(long, default_value_t = 10)]
    levels: usize,
    /// Truncate Riesz expansions (order cap and pruning) instead of expanding exactly.
    #[arg(long)]
    truncated: bool,
    /// Odd order cap of truncated expansions.
    #[arg(long, default_value_t = 9)]
    order_cap: usize,
    /// Coefficients below this are pruned in truncated mode.
    #[arg(long, default_value_t = 1e-10)]
    prune_eps: f64,
}

impl Expansion {
    fn config(&self) -> PhiConfig {
        let base = if self.truncated { PhiConfig::truncated(self.levels) } else { PhiConfig::exact(self.levels) };
        PhiConfig {
            order_cap: self.order_cap,
            prune_eps: if base.mode == Mode::Truncated { self.prune_eps } else { base.prune_eps },
            ..base
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SchemeArg {
    Phi,
    Phi2,
    PhiK,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SignsArg {
    Random,
    AllPlus,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Pair the series of random x and conj(y) and compare with the dot product.
    VerifyParseval {
        #[arg(long, default_value_t = 3)]
        dim: usize,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SchemeArg::Phi)]
        scheme: SchemeArg,
        /// Normalization parameter of phi2.
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[command(flatten)]
        expansion: Expansion,
        #[command(flatten)]
        output: Output,
    },
    /// Print delta, c, K(1) and the minimizers of K and L.
    Constants {
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Compare the convolution of level tables with the brute-force multilinear sum.
    VerifyMultilinear {
        /// Covering sequence, e.g. "1,2;2,3;1,3".
        #[arg(long, default_value = "1,2;2,3;1,3")]
        covering: String,
        #[arg(long, default_value_t = 2)]
        alphabet: usize,
        #[arg(long, default_value_t = 50)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        expansion: Expansion,
        #[command(flatten)]
        output: Output,
    },
    /// Fractional edge-cover number of a covering sequence, as an exact rational.
    Alpha { covering: String },
    /// Reduce a covering sequence to standard form.
    StandardForm { covering: String },
    /// Exhaustive Psi gauge of the 3/2-product over an alphabet of size k.
    Psi {
        #[arg(long, default_value_t = 2)]
        k: u64,
        /// Subset sizes; defaults to 1..=k^2.
        #[arg(long, value_delimiter = ',')]
        s: Vec<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Lower bounds on the projective norm of the random-sign trilinear form.
    Ksz {
        #[arg(long, value_delimiter = ',', default_value = "2,4,6,8")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 4)]
        trials: usize,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SignsArg::Random)]
        signs: SignsArg,
        #[command(flatten)]
        output: Output,
    },
    /// Pair the l^p series of x with the conjugate-exponent series of y.
    VerifyLpPairing {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Support of the partner y; defaults to 2 when p = 1, else to --dim.
        #[arg(long)]
        partner_dim: Option<usize>,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        expansion: Expansion,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    error: &'a str,
    message: String,
}

fn fail(kind: &str, message: impl ToString) -> ExitCode {
    let rec = ErrorRecord {
        error: kind,
        message: message.to_string(),
    };
    eprintln!("{}", serde_json::to_string(&rec).expect("error record serializes"));
    ExitCode::from(EXIT_CONFIG)
}

fn finish(command: &str, rows: &[Row], output: &Output) -> ExitCode {
    let text = report::render_rows(command, rows, output.format);
    if let Err(e) = report::emit(&text, output.out.as_deref()) {
        return fail("io", e);
    }
    let failed = rows.iter().filter(|r| !r.pass).count();
    let worst = rows.iter().map(|r| r.defect).fold(0.0, f64::max);
    eprintln!("{command}: {} rows, {} pass, {failed} fail, max defect {worst:e}", rows.len(), rows.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_CHECK_FAILED)
    }
}

fn print_constants(format: Format) {
    let k = constants();
    let (tk, kmin) = minimize_k();
    let (tl, lmin) = minimize_l();
    let entries = [
        ("delta", k.delta),
        ("c", k.c),
        ("K(1)", k_of_t(1.0)),
        ("t_min_K", tk),
        ("K_min", kmin),
        ("t_min_L", tl),
        ("L_min", lmin),
    ];
    match format {
        Format::Csv => {
            println!("name,value");
            for (name, v) in entries {
                println!("{name},{v:.6}");
            }
        }
        Format::Json => {
            let map: serde_json::Map<String, serde_json::Value> =
                entries.iter().map(|(n, v)| (n.to_string(), serde_json::json!(format!("{v:.6}")))).collect();
            println!("{}", serde_json::Value::Object(map));
        }
    }
}

fn parse_covering(text: &str) -> Result<CoveringSequence, ExitCode> {
    CoveringSequence::parse(text).map_err(|e| fail("config", e))
}

fn run(cli: Cli) -> ExitCode {
    if let Some(n) = cli.threads {
        if n == 0 {
            return fail("config", "DG_THREADS must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            return fail("config", e);
        }
    }
    match cli.command {
        Command::VerifyParseval {
            dim,
            trials,
            seed,
            scheme,
            t,
            expansion,
            output,
        } => {
            let scheme = match scheme {
                SchemeArg::Phi => Scheme::Phi,
                SchemeArg::Phi2 => Scheme::Phi2 { t },
                SchemeArg::PhiK => Scheme::PhiK { k: 2 },
            };
            match campaigns::verify_parseval(scheme, dim, trials, seed, &expansion.config()) {
                Ok(rows) => finish("verify-parseval", &rows, &output),
                Err(e) => fail("library", e),
            }
        }
        Command::Constants { format } => {
            print_constants(format);
            ExitCode::SUCCESS
        }
        Command::VerifyMultilinear {
            covering,
            alphabet,
            trials,
            seed,
            expansion,
            output,
        } => {
            let u = match parse_covering(&covering) {
                Ok(u) => u,
                Err(code) => return code,
            };
            if alphabet == 0 {
                return fail("config", "alphabet must be non-empty");
            }
            match campaigns::verify_multilinear_cases(&u, alphabet, trials, seed, &expansion.config()) {
                Ok(rows) => finish("verify-multilinear", &rows, &output),
                Err(e) => fail("library", e),
            }
        }
        Command::Alpha { covering } => match parse_covering(&covering).map(|u| alpha_lp(&u)) {
            Ok(Ok(a)) => {
                println!("{}", format_rational(&a));
                ExitCode::SUCCESS
            }
            Ok(Err(e)) => fail("library", e),
            Err(code) => code,
        },
        Command::StandardForm { covering } => match parse_covering(&covering) {
            Ok(u) => {
                println!("{}", standard_form(&u));
                ExitCode::SUCCESS
            }
            Err(code) => code,
        },
        Command::Psi { k, s, output } => {
            if k == 0 {
                return fail("config", "k must be positive");
            }
            let sizes: Vec<usize> = if s.is_empty() { (1..=(k * k) as usize).collect() } else { s };
            match campaigns::psi_cases(k, &sizes) {
                Ok(rows) => finish("psi", &rows, &output),
                Err(e) => fail("library", e),
            }
        }
        Command::Ksz {
            n,
            trials,
            samples,
            seed,
            signs,
            output,
        } => {
            let signs = match signs {
                SignsArg::Random => KszSigns::Random,
                SignsArg::AllPlus => KszSigns::AllPlus,
            };
            match campaigns::ksz_cases(&n, trials, samples, seed, signs) {
                Ok(rows) => finish("ksz", &rows, &output),
                Err(e) => fail("library", e),
            }
        }
        Command::VerifyLpPairing {
            p,
            dim,
            partner_dim,
            trials,
            seed,
            expansion,
            output,
        } => {
            if !(p >= 1.0) {
                return fail("config", format!("p must be in [1, inf], got {p}"));
            }
            let partner_dim = partner_dim.unwrap_or(if p == 1.0 { dim.min(2) } else { dim });
            match campaigns::verify_lp_pairing(p, dim, partner_dim, trials, seed, &expansion.config()) {
                Ok(rows) => finish("verify-lp-pairing", &rows, &output),
                Err(e) => fail("library", e),
            }
        }
    }
}

fn main() -> ExitCode {
    match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) => {
            print!("{e}");
            ExitCode::SUCCESS
        }
        Err(e) => fail("config", e.render().to_string().trim_end()),
    }
}
