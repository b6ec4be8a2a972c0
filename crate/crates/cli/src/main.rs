//! `isrs-egn`: evaluate ISRS EGN nonlinear interference, compare FWM
//! kernels, benchmark the island scheduler and emit plot data.

mod output;
mod plotdata;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use isrs_egn::config::{parse_config, to_document};
use isrs_egn::experiment::compare;
use isrs_egn::parallel::benchmark;
use isrs_egn::{Config, ConfigError, EngineError, MuMethod, NliClass, NliEngine, NumericError};
use serde_json::{json, Value};

use output::{num, opt_num, pretty, Manifest, Sink, Table};

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "isrs-egn", version, about = "ISRS EGN nonlinear interference for C+L-band WDM links")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Global {
    /// System configuration document (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// FWM efficiency kernel: integral, maclaurin or segment.
    #[arg(long, global = true)]
    method: Option<MuMethod>,
    /// Segment length / integral step cap, km.
    #[arg(long, global = true)]
    delta_z: Option<f64>,
    /// Channel-local quadrature step, Hz.
    #[arg(long, global = true)]
    resolution: Option<f64>,
    /// Worker threads.
    #[arg(long, global = true, env = "ISRS_EGN_WORKERS")]
    workers: Option<usize>,
    /// Islands per scheduled batch.
    #[arg(long, global = true)]
    chunk_size: Option<usize>,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Per-channel NLI variance and eta.
    #[command(visible_alias = "eval")]
    Evaluate {
        /// Comma-separated channel indices or `all`.
        #[arg(long, default_value = "all", allow_hyphen_values = true)]
        coi: String,
    },
    /// Per-channel eta error of one kernel against another.
    #[command(visible_alias = "cmp")]
    Compare {
        #[arg(long, default_value = "segment")]
        method_a: MuMethod,
        #[arg(long, default_value = "integral")]
        method_b: MuMethod,
        /// Comma-separated segment lengths, km; defaults to the configured one.
        #[arg(long)]
        delta_z_sweep: Option<String>,
        /// Comma-separated span counts (first span repeated); defaults to the configured link.
        #[arg(long)]
        spans: Option<String>,
    },
    /// Median wall time and speedup per worker count.
    Bench {
        /// Comma-separated worker counts.
        #[arg(long, default_value = "1,2,4,8")]
        workers_list: String,
        #[arg(long, default_value_t = 3)]
        repeats: usize,
        /// Comma-separated channel indices or `all`.
        #[arg(long, default_value = "all", allow_hyphen_values = true)]
        coi: String,
    },
    /// Datasets behind the diagnostic figures.
    #[command(visible_alias = "plot")]
    Plotdata {
        #[command(subcommand)]
        figure: Figure,
    },
}

#[derive(Subcommand, Debug)]
enum Figure {
    /// SRS gain and power profile per channel along the first span.
    Raman {
        #[arg(long, default_value_t = 11)]
        points: usize,
    },
    /// FWM efficiency over the (f1, f2) plane for one channel.
    FwmMap {
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        coi: i32,
    },
    /// Factors of the mu integrand along the first span.
    Trace {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        f1: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        f2: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        f: f64,
        #[arg(long, default_value_t = 201)]
        points: usize,
    },
    /// Islands of one channel.
    Islands {
        #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
        coi: i32,
        /// Grid half-width; taken from the config when omitted.
        #[arg(long)]
        m: Option<i32>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<ConfigError>() {
            return EXIT_CONFIG;
        }
        if cause.is::<NumericError>() {
            return EXIT_NUMERIC;
        }
        if let Some(e) = cause.downcast_ref::<EngineError>() {
            return match e {
                EngineError::Config(_) | EngineError::InvalidCoi { .. } => EXIT_CONFIG,
                EngineError::Island { .. } | EngineError::Numeric(_) => EXIT_NUMERIC,
                EngineError::Pool(_) => EXIT_FAILURE,
            };
        }
    }
    EXIT_FAILURE
}

fn run(cli: Cli) -> Result<()> {
    let g = cli.global;
    let sink = Sink::new(g.out.as_deref());
    match cli.command {
        Command::Evaluate { coi } => {
            let cfg = load_config(&g)?;
            cmd_evaluate(&cfg, &coi, g.format, &sink)
        }
        Command::Compare {
            method_a,
            method_b,
            delta_z_sweep,
            spans,
        } => {
            let cfg = load_config(&g)?;
            let dzs = match delta_z_sweep {
                Some(s) => parse_list::<f64>(&s, "--delta-z-sweep")?,
                None => vec![cfg.numerics.delta_z],
            };
            let spans = match spans {
                Some(s) => parse_list::<usize>(&s, "--spans")?,
                None => Vec::new(),
            };
            cmd_compare(&cfg, method_a, method_b, &dzs, &spans, g.format, &sink)
        }
        Command::Bench {
            workers_list,
            repeats,
            coi,
        } => {
            let cfg = load_config(&g)?;
            let workers = parse_list::<usize>(&workers_list, "--workers-list")?;
            cmd_bench(&cfg, &workers, repeats, &coi, g.format, &sink)
        }
        Command::Plotdata { figure } => cmd_plotdata(&g, figure, &sink),
    }
}

/// Reads the config and applies the command-line overrides.
fn load_config(g: &Global) -> Result<Config> {
    let path = g
        .config
        .as_deref()
        .ok_or_else(|| ConfigError::Invariant("--config is required for this command".into()))?;
    let mut cfg = read_config(path)?;
    if let Some(m) = g.method {
        cfg.numerics.mu_method = m;
    }
    if let Some(dz) = g.delta_z {
        cfg.numerics.delta_z = dz;
    }
    if let Some(r) = g.resolution {
        cfg.numerics.resolution = r;
    }
    if let Some(w) = g.workers {
        cfg.numerics.workers = w;
    }
    if let Some(c) = g.chunk_size {
        cfg.numerics.chunk_size = Some(c);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn read_config(path: &Path) -> Result<Config> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        anyhow::Error::new(ConfigError::Invariant(format!("cannot read {}: {e}", path.display())))
    })?;
    let cfg = parse_config(&text).with_context(|| format!("in {}", path.display()))?;
    Ok(cfg)
}

fn parse_list<T: FromStr>(s: &str, flag: &str) -> Result<Vec<T>> {
    let items: Result<Vec<T>, _> = s.split(',').map(|p| p.trim().parse::<T>()).collect();
    match items {
        Ok(v) if !v.is_empty() => Ok(v),
        _ => Err(anyhow::Error::new(ConfigError::Invariant(format!("{flag}: cannot parse `{s}`")))),
    }
}

fn parse_cois(s: &str, cfg: &Config) -> Result<Vec<i32>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(cfg.grid.indices().collect());
    }
    parse_list::<i32>(s, "--coi")
}

fn config_json(cfg: &Config) -> Value {
    to_document(cfg)
}

fn render(table: &Table, manifest: &Manifest, format: Format, extra: Value) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => {
            let mut doc = json!({ "manifest": manifest.to_json(), "rows": table.to_json_rows() });
            if let (Value::Object(d), Value::Object(e)) = (&mut doc, extra) {
                d.extend(e);
            }
            pretty(&doc)
        }
    }
}

fn cmd_evaluate(cfg: &Config, coi: &str, format: Format, sink: &Sink) -> Result<()> {
    let cois = parse_cois(coi, cfg)?;
    let method = cfg.numerics.mu_method;
    let manifest = Manifest::new(
        "evaluate",
        method.as_str(),
        config_json(cfg),
        json!({ "coi": cois }),
    );
    let engine = NliEngine::new(cfg.clone())?;
    let reports = engine.evaluate(&cois)?;

    let mut table = Table::new(
        &manifest,
        &[
            "coi_index",
            "f_center_hz",
            "method",
            "sigma2_nli",
            "eta_db",
            "sci_db",
            "xci_db",
            "mci_db",
            "wall_time_s",
        ],
    );
    table.comment("eta_db = 10*log10(eta * 1 W^2), eta = sigma2_nli / P_coi^3 in 1/W^2; empty class cells have no islands");
    let mut json_reports = Vec::with_capacity(reports.len());
    for r in &reports {
        let p = cfg.grid.power(r.coi);
        let class = |c: NliClass| r.class_eta_db(c, p);
        table.push(vec![
            r.coi.to_string(),
            num(r.f_center),
            r.method.as_str().to_string(),
            num(r.sigma2_nli),
            num(r.eta_db),
            opt_num(class(NliClass::Sci)),
            opt_num(class(NliClass::Xci)),
            opt_num(class(NliClass::Mci)),
            num(r.wall_time_s),
        ]);
        json_reports.push(json!({
            "coi": r.coi,
            "f_center_hz": r.f_center,
            "method": r.method.as_str(),
            "sigma2_nli": r.sigma2_nli,
            "imag_residue": r.imag_residue,
            "eta": r.eta,
            "eta_db": r.eta_db,
            "terms": { "d": r.terms.d, "e": r.terms.e, "f": r.terms.f, "g": r.terms.g, "h": r.terms.h },
            "classes": NliClass::ALL.iter().map(|&c| json!({
                "class": c.as_str(),
                "islands": r.class_islands[c.index()],
                "sigma2": r.class_sigma2[c.index()],
                "eta_db": class(c),
            })).collect::<Vec<_>>(),
            "island_count": r.island_count,
            "wall_time_s": r.wall_time_s,
        }));
    }
    let mut report_doc = manifest.to_json();
    report_doc["reports"] = Value::Array(json_reports);
    let report_json = pretty(&report_doc);
    match format {
        Format::Csv => sink.emit(&table.to_csv(), &[(".json", report_json)]),
        Format::Json => sink.emit(&report_json, &[]),
    }
}

fn cmd_compare(
    cfg: &Config,
    method_a: MuMethod,
    method_b: MuMethod,
    dzs: &[f64],
    spans: &[usize],
    format: Format,
    sink: &Sink,
) -> Result<()> {
    let manifest = Manifest::new(
        "compare",
        &format!("{method_a}-vs-{method_b}"),
        config_json(cfg),
        json!({ "method_a": method_a.as_str(), "method_b": method_b.as_str(), "delta_z_km": dzs, "spans": spans }),
    );
    let cmp = compare(cfg, method_a, method_b, dzs, spans)?;
    let mut table = Table::new(&manifest, &["coi", "delta_z_km", "spans", "err_db"]);
    table.comment(format!("err_db = eta_db({method_a}) - eta_db({method_b})"));
    for r in &cmp.rows {
        table.push(vec![r.coi.to_string(), num(r.delta_z_km), r.spans.to_string(), num(r.err_db)]);
    }
    let summary: Vec<Value> = cmp
        .summary
        .iter()
        .map(|s| {
            json!({
                "delta_z_km": s.delta_z_km,
                "spans": s.spans,
                "mae_db": s.mae_db,
                "time_a_s": s.time_a_s,
                "time_b_s": s.time_b_s,
            })
        })
        .collect();
    let mut summary_doc = manifest.to_json();
    summary_doc["summary"] = Value::Array(summary.clone());
    match format {
        Format::Csv => {
            if matches!(sink, Sink::Stdout) {
                eprint!("{}", pretty(&json!({ "summary": summary })));
            }
            sink.emit(&table.to_csv(), &[(".summary.json", pretty(&summary_doc))])
        }
        Format::Json => sink.emit(&render(&table, &manifest, format, json!({ "summary": summary })), &[]),
    }
}

fn cmd_bench(cfg: &Config, workers: &[usize], repeats: usize, coi: &str, format: Format, sink: &Sink) -> Result<()> {
    let cois = parse_cois(coi, cfg)?;
    let manifest = Manifest::new(
        "bench",
        cfg.numerics.mu_method.as_str(),
        config_json(cfg),
        json!({ "workers": workers, "repeats": repeats, "coi": cois }),
    );
    let rows = benchmark(cfg, workers, &cois, repeats)?;
    let mut table = Table::new(&manifest, &["method", "workers", "median_s", "speedup"]);
    table.comment(format!("available_parallelism={}", std::thread::available_parallelism().map_or(1, |n| n.get())));
    for r in &rows {
        table.push(vec![r.method.as_str().into(), r.workers.to_string(), num(r.median_s), num(r.speedup)]);
    }
    sink.emit(&render(&table, &manifest, format, json!({})), &[])
}

fn cmd_plotdata(g: &Global, figure: Figure, sink: &Sink) -> Result<()> {
    let (table, manifest) = match figure {
        Figure::Islands { coi, m } => {
            let (m, config) = match (m, &g.config) {
                (Some(m), _) => (m, Value::Null),
                (None, Some(_)) => {
                    let cfg = load_config(g)?;
                    (cfg.grid.m(), config_json(&cfg))
                }
                (None, None) => bail!("plotdata islands needs --m or --config"),
            };
            let manifest = Manifest::new("plotdata islands", "", config, json!({ "m": m, "coi": coi }));
            (plotdata::islands(&manifest, m, coi)?, manifest)
        }
        Figure::Raman { points } => {
            let cfg = load_config(g)?;
            let manifest = Manifest::new("plotdata raman", "", config_json(&cfg), json!({ "points": points }));
            (plotdata::raman(&cfg, &manifest, points)?, manifest)
        }
        Figure::FwmMap { coi } => {
            let cfg = load_config(g)?;
            let manifest = Manifest::new(
                "plotdata fwm-map",
                cfg.numerics.mu_method.as_str(),
                config_json(&cfg),
                json!({ "coi": coi }),
            );
            (plotdata::fwm_map(&cfg, &manifest, coi)?, manifest)
        }
        Figure::Trace { f1, f2, f, points } => {
            let cfg = load_config(g)?;
            let manifest = Manifest::new(
                "plotdata trace",
                "",
                config_json(&cfg),
                json!({ "f1_hz": f1, "f2_hz": f2, "f_hz": f, "points": points }),
            );
            (plotdata::trace(&cfg, &manifest, (f1, f2, f), points)?, manifest)
        }
    };
    sink.emit(&render(&table, &manifest, g.format, json!({})), &[])
}
