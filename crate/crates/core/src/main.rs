use std::collections::BTreeSet;
use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use plumbcalc::appendix::{appendix_rows, entries_from_rows, parse_rows, write_rows};
use plumbcalc::asympt::{default_ts, order_check_with};
use plumbcalc::contour::z_series_contour;
use plumbcalc::gauss::ellsum_sweep;
use plumbcalc::plumbing::{canonicalize, det_closed_form, enumerate_pu, is_pu};
use plumbcalc::theta::{z_series, zhat_series};
use plumbcalc::verify::{verify_appendix, VerifyOptions};
use plumbcalc::{load_appendix, AppendixEntry, Error, HLabels, QSeries, Rational};

// Like `println!`/`print!`, but a closed stdout (e.g. piping into `head`)
// is not an error worth a panic.
macro_rules! outln {
    ($($t:tt)*) => {{
        let _ = writeln!(io::stdout().lock(), $($t)*);
    }};
}

macro_rules! out {
    ($($t:tt)*) => {{
        let _ = write!(io::stdout().lock(), $($t)*);
    }};
}

#[derive(Parser)]
#[command(name = "plumbcalc", version, about = "H-graph plumbings, their false theta q-series and radial asymptotics")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Decimal digits for the asymptotics.
    #[arg(long, global = true, env = "PLUMBCALC_PRECISION", default_value_t = plumbcalc::real::DEFAULT_DIGITS)]
    precision: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Route {
    Closed,
    Contour,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Dataset {
    Appendix,
    Census,
}

#[derive(Subcommand)]
enum Cmd {
    /// Enumerate the positive unimodular labelings and their classes.
    Classify {
        /// List every labeling instead of one row per class.
        #[arg(long)]
        labelings: bool,
    },
    /// Expand Z(q) for an appendix entry or a comma-separated labeling.
    Series {
        target: String,
        #[arg(long, default_value = "30")]
        cutoff: Rational,
        #[arg(long, value_enum, default_value_t = Route::Closed)]
        route: Route,
        /// Substitute q^2 -> q; the cutoff applies after the substitution.
        #[arg(long)]
        zhat: bool,
    },
    /// Quantum-set sweep over all reduced h/k with k <= kmax.
    QuantumSet {
        entry: usize,
        #[arg(long, default_value_t = 12)]
        kmax: i64,
    },
    /// Residual table of the radial expansion at h/k.
    Asympt {
        entry: usize,
        #[arg(long, default_value_t = 0)]
        h: i64,
        #[arg(long, default_value_t = 1)]
        k: i64,
        #[arg(long, default_value_t = 0)]
        order: usize,
    },
    /// Check every appendix entry against the library.
    VerifyAppendix {
        /// Comma-separated entry indices.
        #[arg(long, value_delimiter = ',')]
        entries: Option<Vec<usize>>,
        #[arg(long, default_value_t = 12)]
        kmax: i64,
        /// Exponent window above the leading term for the dual-route check.
        #[arg(long, default_value = "20")]
        window: Rational,
        /// Read the table from a CSV file instead of the embedded copy.
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Write the appendix table or the labeling census.
    Export {
        #[arg(value_enum)]
        what: Dataset,
    },
}

/// Exit status: 0 pass, 1 mismatch, 2 invalid input.
enum Outcome {
    Pass,
    Mismatch,
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    plumbcalc::real::set_precision_digits(cli.precision);
    match run(&cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Mismatch) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn verdict(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Mismatch
    }
}

fn print_json(v: &Value) -> plumbcalc::Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::Invalid(e.to_string()))?;
    outln!("{s}");
    Ok(())
}

fn entry(index: usize) -> plumbcalc::Result<AppendixEntry> {
    load_appendix()?
        .into_iter()
        .find(|e| e.index == index)
        .ok_or_else(|| Error::Invalid(format!("no appendix entry {index}")))
}

/// An entry index or six comma-separated labels.
fn parse_target(s: &str) -> plumbcalc::Result<HLabels> {
    if let Ok(i) = s.parse::<usize>() {
        return Ok(entry(i)?.labels);
    }
    let parts: Vec<i64> = s
        .split(',')
        .map(|p| p.trim().parse::<i64>().map_err(|_| Error::Invalid(format!("bad label {p:?}"))))
        .collect::<plumbcalc::Result<_>>()?;
    let b: [i64; 6] = parts.try_into().map_err(|_| Error::Invalid("expected six labels".into()))?;
    let h = HLabels::new(b)?;
    if !is_pu(&h) {
        return Err(Error::Invalid(format!("{h} is not positive unimodular (det {})", det_closed_form(&h))));
    }
    Ok(h)
}

fn run(cli: &Cli) -> plumbcalc::Result<Outcome> {
    match &cli.cmd {
        Cmd::Classify { labelings } => classify(cli.format, *labelings),
        Cmd::Series { target, cutoff, route, zhat } => series(cli.format, target, cutoff, *route, *zhat),
        Cmd::QuantumSet { entry: i, kmax } => {
            let e = entry(*i)?;
            let rows = ellsum_sweep(&e.params, &e.q, *kmax)?;
            let ok = rows.iter().all(|r| r.2);
            match cli.format {
                Format::Csv => {
                    outln!("h,k,vanishes");
                    for (k, h, z) in &rows {
                        outln!("{h},{k},{z}");
                    }
                }
                Format::Json => {
                    let pts: Vec<Value> = rows.iter().map(|(k, h, z)| json!({"h": h, "k": k, "vanishes": z})).collect();
                    print_json(&json!({"entry": i, "kmax": kmax, "all_vanish": ok, "points": pts}))?;
                }
            }
            Ok(verdict(ok))
        }
        Cmd::Asympt { entry: i, h, k, order } => {
            let e = entry(*i)?;
            let set = e.params.signed_set()?;
            let zero = Rational::from_integer(0.into());
            let r = order_check_with(&set, &e.q, &e.params.l(), *h, *k, *order, &default_ts(), &zero, cli.precision)?;
            match cli.format {
                Format::Csv => out!("{}", r.to_csv()),
                Format::Json => {
                    let rows: Vec<Value> = r
                        .to_csv()
                        .lines()
                        .skip(1)
                        .map(|l| {
                            let f: Vec<&str> = l.split(',').collect();
                            json!({"t": f[0], "radial": f[1], "partial_sum": f[2], "residual": f[3], "ratio": f[4]})
                        })
                        .collect();
                    print_json(&json!({
                        "entry": i, "h": h, "k": k, "order": order, "digits": r.digits,
                        "expected_ratio": r.expected_ratio(), "passes": r.passes(), "rows": rows,
                    }))?;
                }
            }
            Ok(verdict(r.passes()))
        }
        Cmd::VerifyAppendix { entries, kmax, window, dataset } => {
            let rows = match dataset {
                Some(p) => parse_rows(File::open(p).map_err(|e| Error::Invalid(format!("{}: {e}", p.display())))?)?,
                None => appendix_rows()?,
            };
            let table = entries_from_rows(&rows)?;
            if let Some(sel) = entries {
                if let Some(bad) = sel.iter().find(|i| !table.iter().any(|e| e.index == **i)) {
                    return Err(Error::Invalid(format!("no appendix entry {bad}")));
                }
            }
            let opts = VerifyOptions { kmax: *kmax, series_window: window.clone(), entries: entries.clone() };
            let report = verify_appendix(&table, &opts);
            match cli.format {
                Format::Csv => out!("{}", report.summary()),
                Format::Json => print_json(&serde_json::to_value(&report).map_err(|e| Error::Invalid(e.to_string()))?)?,
            }
            Ok(verdict(report.passed()))
        }
        Cmd::Export { what } => {
            match (what, cli.format) {
                (Dataset::Appendix, Format::Csv) => write_rows(io::stdout().lock(), &appendix_rows()?)?,
                (Dataset::Appendix, Format::Json) => {
                    print_json(&serde_json::to_value(appendix_rows()?).map_err(|e| Error::Invalid(e.to_string()))?)?
                }
                (Dataset::Census, _) => return classify(cli.format, true),
            }
            Ok(Outcome::Pass)
        }
    }
}

fn classify(format: Format, labelings: bool) -> plumbcalc::Result<Outcome> {
    let mut census = enumerate_pu();
    let table = load_appendix()?;
    let order: Vec<HLabels> = table.iter().map(|e| e.labels).collect();
    census.reorder_classes(&order);
    let expected: BTreeSet<HLabels> = order.iter().map(canonicalize).collect();
    let found: BTreeSet<HLabels> = census.classes.iter().copied().collect();
    let ok = census.labelings.len() == 312 && census.classes.len() == 39 && expected == found;
    let rows = if labelings { &census.labelings } else { &census.classes };
    match format {
        Format::Csv => census.write_csv(io::stdout().lock(), rows)?,
        Format::Json => {
            let docs: Vec<Value> = rows
                .iter()
                .map(|h| {
                    json!({
                        "labels": h.0,
                        "det": det_closed_form(h).to_string(),
                        "canonical": canonicalize(h).0,
                        "class_index": census.class_index(h),
                    })
                })
                .collect();
            print_json(&json!({
                "labelings": census.labelings.len(),
                "oriented_labelings": census.oriented_count,
                "classes": census.classes.len(),
                "matches_appendix": expected == found,
                "rows": docs,
            }))?;
        }
    }
    io::stdout().flush().map_err(|e| Error::Invalid(e.to_string()))?;
    Ok(verdict(ok))
}

fn series(format: Format, target: &str, cutoff: &Rational, route: Route, zhat: bool) -> plumbcalc::Result<Outcome> {
    let h = parse_target(target)?;
    let two = Rational::from_integer(2.into());
    let closed = || if zhat { zhat_series(&h, cutoff) } else { z_series(&h, cutoff) };
    let contour = || -> plumbcalc::Result<QSeries> {
        if zhat {
            Ok(z_series_contour(&h, &(cutoff * &two))?.halve_exponents())
        } else {
            z_series_contour(&h, cutoff)
        }
    };
    let mut out: Vec<(&str, QSeries)> = Vec::new();
    if route != Route::Contour {
        out.push(("closed", closed()?));
    }
    if route != Route::Closed {
        out.push(("contour", contour()?));
    }
    let equal = out.windows(2).all(|w| w[0].1 == w[1].1);
    match format {
        Format::Csv => {
            outln!("route,exponent,coefficient");
            for (name, s) in &out {
                for (e, c) in s.absolute() {
                    outln!("{name},{e},{c}");
                }
            }
        }
        Format::Json => {
            let mut doc = serde_json::Map::new();
            doc.insert("labels".into(), json!(h.0));
            for (name, s) in &out {
                doc.insert((*name).into(), s.to_json());
            }
            if out.len() == 2 {
                doc.insert("equal".into(), json!(equal));
            }
            print_json(&Value::Object(doc))?;
        }
    }
    Ok(verdict(equal))
}
