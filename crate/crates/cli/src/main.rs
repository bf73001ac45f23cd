//! Command-line front end for divergence computations and partition
//! certificates.
//!
//! Every numeric datum is printed with 17 significant digits so reported
//! values round-trip bit-exactly; infinities print as `inf` in text/CSV
//! and as `{"inf": true}` in JSON. Exit codes: 0 success, 1 domain or
//! validation error, 2 accuracy or guard error.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` rejects NaN

use clap::{Parser, Subcommand, ValueEnum};
use divcert::divergence::{divergence, renyi, tsallis, DivergenceValue};
use divcert::generator::Generator;
use divcert::gyp::{convergence_sweep, detect_infinite, gyp_approximate};
use divcert::io::{load_pair, PairSpec};
use divcert::measure::MeasurePair;
use divcert::partition::{
    brute_force_search, partition_divergence, renyi_partition_bound, Partition,
};
use divcert::{Error, ErrorClass};
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

const QUAD_TOL_ENV: &str = "DIVCERT_QUAD_TOL";

#[derive(Parser)]
#[command(
    name = "divcert",
    about = "f-divergences with certified partition lower bounds",
    after_help = "Pair files are JSON: {\"model\":\"discrete\",\"p\":[..],\"r\":[..]}, \
                  {\"model\":\"gaussian\",\"p\":{\"mean\":..,\"sd\":..},\"r\":{..}}, \
                  {\"model\":\"grid\",\"edges\":[..],\"p_mass\":[..],\"r_mass\":[..]}, \
                  {\"model\":\"countable\",\"name\":\"..\",\"cap\":..}. \
                  Generators: kl, tv, chi2, hellinger, tsallis:<alpha>. \
                  DIVCERT_QUAD_TOL overrides the Gaussian quadrature tolerance."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the report to a file instead of standard output.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Reference divergence of a pair: D_f, Tsallis, or Rényi.
    Div {
        /// JSON pair file.
        #[arg(long)]
        pair: PathBuf,
        /// Generator name (kl, tv, chi2, hellinger, tsallis:<alpha>).
        #[arg(long)]
        generator: Option<String>,
        /// Compute the Tsallis divergence T_alpha instead.
        #[arg(long, value_name = "ALPHA", conflicts_with = "generator")]
        tsallis: Option<f64>,
        /// Compute the Rényi divergence I_alpha instead.
        #[arg(long, value_name = "ALPHA", conflicts_with_all = ["generator", "tsallis"])]
        renyi: Option<f64>,
    },
    /// Coarsened divergence of an explicit cut-point partition.
    Bound {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        generator: Option<String>,
        /// Rényi partition bound of this order instead of an f-divergence.
        #[arg(long, value_name = "ALPHA", conflicts_with = "generator")]
        renyi: Option<f64>,
        /// Comma-separated interior cut points; empty for the trivial
        /// partition.
        #[arg(long, default_value = "")]
        cuts: String,
    },
    /// ε-tight lower-bound certificate for a finite divergence.
    Gyp {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        generator: String,
        #[arg(long)]
        epsilon: f64,
    },
    /// Certificate sweep over decreasing tolerances (CSV-friendly).
    Sweep {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        generator: String,
        /// Comma-separated, strictly decreasing tolerances.
        #[arg(long)]
        epsilons: String,
    },
    /// Brute-force partition supremum on a small discrete pair.
    Brute {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        generator: String,
    },
    /// Partial-sum exceedance evidence for an infinite divergence.
    Detect {
        #[arg(long)]
        pair: PathBuf,
        #[arg(long)]
        generator: String,
        /// Exceedance target M.
        #[arg(long, value_name = "M")]
        target: f64,
        /// Cell budget.
        #[arg(long, default_value_t = 10_000)]
        n_max: u64,
    },
}

/// 17 significant digits: enough for exact f64 round-trips.
fn fmt17(x: f64) -> String {
    if x.is_infinite() {
        "inf".to_string()
    } else {
        format!("{x:.16e}")
    }
}

fn quad_tol_from_env() -> Result<Option<f64>, Error> {
    match std::env::var(QUAD_TOL_ENV) {
        Err(_) => Ok(None),
        Ok(raw) => {
            let tol: f64 = raw.parse().map_err(|_| {
                Error::Domain(format!("{QUAD_TOL_ENV} must be a number, got `{raw}`"))
            })?;
            if !(tol > 0.0) || !tol.is_finite() {
                return Err(Error::Domain(format!(
                    "{QUAD_TOL_ENV} must be positive and finite, got {tol}"
                )));
            }
            Ok(Some(tol))
        }
    }
}

fn parse_number_list(raw: &str, what: &str) -> Result<Vec<f64>, Error> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| Error::Domain(format!("invalid {what} entry `{s}`")))
        })
        .collect()
}

fn load_built_pair(path: &PathBuf) -> Result<MeasurePair, Error> {
    let spec: PairSpec = load_pair(path)?;
    spec.build(quad_tol_from_env()?)
}

fn divergence_report(v: &DivergenceValue, format: Format) -> Result<String, Error> {
    Ok(match format {
        Format::Text => format!(
            "value = {}\nerror_bound = {}\nfinite = {}\n",
            fmt17(v.value.as_f64()),
            fmt17(v.error_bound),
            v.finite
        ),
        Format::Csv => format!(
            "value,error_bound,finite\n{},{},{}\n",
            fmt17(v.value.as_f64()),
            fmt17(v.error_bound),
            v.finite
        ),
        Format::Json => serde_json::to_string_pretty(v)? + "\n",
    })
}

fn run(cli: &Cli) -> Result<String, Error> {
    match &cli.command {
        Command::Div {
            pair,
            generator,
            tsallis: t_alpha,
            renyi: r_alpha,
        } => {
            let pair = load_built_pair(pair)?;
            let value = match (generator, t_alpha, r_alpha) {
                (Some(name), None, None) => divergence(&Generator::by_name(name)?, &pair)?,
                (None, Some(alpha), None) => tsallis(*alpha, &pair)?,
                (None, None, Some(alpha)) => renyi(*alpha, &pair)?,
                _ => {
                    return Err(Error::Domain(
                        "pass exactly one of --generator, --tsallis, --renyi".into(),
                    ));
                }
            };
            divergence_report(&value, cli.format)
        }
        Command::Bound {
            pair,
            generator,
            renyi: r_alpha,
            cuts,
        } => {
            let pair = load_built_pair(pair)?;
            let part = Partition::from_cuts(&parse_number_list(cuts, "cut")?)?;
            let value = match (generator, r_alpha) {
                (Some(name), None) => {
                    partition_divergence(&Generator::by_name(name)?, &pair, &part)?
                }
                (None, Some(alpha)) => renyi_partition_bound(*alpha, &pair, &part)?,
                _ => {
                    return Err(Error::Domain(
                        "pass exactly one of --generator, --renyi".into(),
                    ));
                }
            };
            divergence_report(&value, cli.format)
        }
        Command::Gyp {
            pair,
            generator,
            epsilon,
        } => {
            let pair = load_built_pair(pair)?;
            let res = gyp_approximate(&Generator::by_name(generator)?, &pair, *epsilon)?;
            Ok(match cli.format {
                Format::Text => format!(
                    "lower_bound = {}\nreference = {}\nreference_error = {}\ngap = {}\n\
                     epsilon = {}\nh0 = {}\nk0 = {}\ndelta = {}\nm_cells = {}\n\
                     tail_gap_low = {}\ntail_gap_high = {}\nslope = {}\n",
                    fmt17(res.lower_bound),
                    fmt17(res.reference.value.as_f64()),
                    fmt17(res.reference.error_bound),
                    fmt17(res.gap()),
                    fmt17(res.epsilon),
                    fmt17(res.h0),
                    fmt17(res.k0),
                    fmt17(res.delta),
                    res.interior_cells(),
                    fmt17(res.tail_gap_low),
                    fmt17(res.tail_gap_high),
                    fmt17(res.slope),
                ),
                Format::Csv => format!(
                    "lower_bound,reference,reference_error,gap,epsilon,h0,k0,delta,m_cells,tail_gap_low,tail_gap_high,slope\n\
                     {},{},{},{},{},{},{},{},{},{},{},{}\n",
                    fmt17(res.lower_bound),
                    fmt17(res.reference.value.as_f64()),
                    fmt17(res.reference.error_bound),
                    fmt17(res.gap()),
                    fmt17(res.epsilon),
                    fmt17(res.h0),
                    fmt17(res.k0),
                    fmt17(res.delta),
                    res.interior_cells(),
                    fmt17(res.tail_gap_low),
                    fmt17(res.tail_gap_high),
                    fmt17(res.slope),
                ),
                Format::Json => serde_json::to_string_pretty(&res)? + "\n",
            })
        }
        Command::Sweep {
            pair,
            generator,
            epsilons,
        } => {
            let pair = load_built_pair(pair)?;
            let eps = parse_number_list(epsilons, "epsilon")?;
            let rows = convergence_sweep(&Generator::by_name(generator)?, &pair, &eps)?;
            Ok(match cli.format {
                Format::Json => serde_json::to_string_pretty(&rows)? + "\n",
                // Text and CSV share the plot-ready table.
                _ => {
                    let mut out = String::from("epsilon,m_cells,lower_bound,gap\n");
                    for row in &rows {
                        out.push_str(&format!(
                            "{},{},{},{}\n",
                            fmt17(row.epsilon),
                            row.m_cells,
                            fmt17(row.lower_bound),
                            fmt17(row.gap)
                        ));
                    }
                    out
                }
            })
        }
        Command::Brute { pair, generator } => {
            let pair = load_built_pair(pair)?;
            let MeasurePair::Discrete(discrete) = &pair else {
                return Err(Error::Domain(
                    "brute-force search needs a discrete pair".into(),
                ));
            };
            let out = brute_force_search(&Generator::by_name(generator)?, discrete)?;
            Ok(match cli.format {
                Format::Text => format!(
                    "supremum = {}\npartitions_checked = {}\nargmax_blocks = {:?}\n",
                    fmt17(out.value.value.as_f64()),
                    out.partitions_checked,
                    out.best_blocks
                ),
                Format::Csv => format!(
                    "supremum,partitions_checked\n{},{}\n",
                    fmt17(out.value.value.as_f64()),
                    out.partitions_checked
                ),
                Format::Json => serde_json::to_string_pretty(&out)? + "\n",
            })
        }
        Command::Detect {
            pair,
            generator,
            target,
            n_max,
        } => {
            let pair = load_built_pair(pair)?;
            let ev = detect_infinite(&Generator::by_name(generator)?, &pair, *target, *n_max)?;
            Ok(match cli.format {
                Format::Text => format!(
                    "exceeded = {}\ntarget = {}\nn_used = {}\ntotal = {}\n",
                    ev.exceeded,
                    fmt17(ev.target),
                    ev.n_used,
                    fmt17(ev.total().as_f64())
                ),
                Format::Csv => {
                    let mut out =
                        String::from("index,level,lo,hi,p_mass,r_mass,term,partial_sum\n");
                    for (i, cell) in ev.cells.iter().enumerate() {
                        out.push_str(&format!(
                            "{},{},{},{},{},{},{},{}\n",
                            i,
                            fmt17(cell.level),
                            fmt17(cell.cell.lo()),
                            fmt17(cell.cell.hi()),
                            fmt17(cell.p_mass),
                            fmt17(cell.r_mass),
                            fmt17(cell.term.as_f64()),
                            fmt17(ev.partial_sums[i].as_f64())
                        ));
                    }
                    out
                }
                Format::Json => serde_json::to_string_pretty(&ev)? + "\n",
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            if e.use_stderr() {
                eprintln!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match run(&cli) {
        Ok(report) => {
            let wrote = match &cli.output {
                Some(path) => std::fs::write(path, &report).map_err(Error::Io),
                None => std::io::stdout()
                    .write_all(report.as_bytes())
                    .map_err(Error::Io),
            };
            if let Err(e) = wrote {
                eprintln!("error: {e}");
                return ExitCode::from(1);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            match e.exit_class() {
                ErrorClass::Domain => ExitCode::from(1),
                ErrorClass::Accuracy => ExitCode::from(2),
            }
        }
    }
}
