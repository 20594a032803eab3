//! Command-line front end: `generate` writes a warehouse with a digest
//! manifest, `run` drives the benchmark protocol against a backend, and
//! `report` summarizes saved run reports.
//!
//! Exit codes: 0 success, 1 parameter error, 2 runtime/driver error,
//! 3 verification mismatch.

mod manifest;

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use xweb::bench::{load_test, performance_test, read_json, to_flat_csv, verify_backend};
use xweb::codec::WarehouseDocuments;
use xweb::datagen::{DatagenError, GenParams};
use xweb::taxonomy::CategoryTaxonomy;
use xweb::workload::WorkloadConfig;

use manifest::{document_digests, GenerationManifest, RunManifest, GEN_MANIFEST, RUN_MANIFEST};

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let ok = matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            return if ok { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Param(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Mismatch(n)) => {
            eprintln!("error: verification found {n} mismatched quer{}", plural_y(n));
            ExitCode::from(3)
        }
    }
}

fn plural_y(n: usize) -> &'static str {
    if n == 1 {
        "y"
    } else {
        "ies"
    }
}

enum CliError {
    /// Invalid parameters or configuration (exit 1).
    Param(String),
    /// Filesystem, driver, or backend failure (exit 2).
    Runtime(String),
    /// Verification found mismatching queries (exit 3).
    Mismatch(usize),
}

#[derive(Parser)]
#[command(name = "xweb", version, about = "XML data warehouse benchmark toolkit")]
struct Cli {
    /// Defaults file with `key = value` lines; explicit flags win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate the six warehouse documents plus a digest manifest.
    Generate(GenerateArgs),
    /// Load a generated warehouse into a driver and run the workload.
    Run(RunArgs),
    /// Summarize saved run reports.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Output directory.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Scale factor over the base dimension cardinalities.
    #[arg(long)]
    sf: Option<f64>,
    /// Fact density over the dimension cross product, in (0, 1].
    #[arg(long)]
    density: Option<f64>,
    /// Probability that any single fact slot is nulled.
    #[arg(long)]
    pm: Option<f64>,
    /// Probability that a fact's slot order is shuffled.
    #[arg(long)]
    po: Option<f64>,
    /// Generation seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Desk-scale divisor applied to the base cardinalities.
    #[arg(long)]
    divisor: Option<u64>,
    /// Category taxonomy override file (`CHILD -> PARENT` lines).
    #[arg(long, value_name = "FILE")]
    taxonomy: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// Directory holding a generated warehouse.
    #[arg(long, value_name = "DIR")]
    warehouse: Option<PathBuf>,
    /// Backend driver: `reference` or `http`.
    #[arg(long)]
    driver: Option<String>,
    /// HTTP driver configuration file (`key = value` lines).
    #[arg(long, value_name = "FILE")]
    driver_config: Option<PathBuf>,
    /// Comma-separated blocks to run, out of RE,1D,2D,3D,CH.
    #[arg(long)]
    blocks: Option<String>,
    /// Warm runs per query after the cold one.
    #[arg(long)]
    nrun: Option<u32>,
    /// Per-query timeout in milliseconds.
    #[arg(long, value_name = "MS")]
    timeout: Option<u64>,
    /// Compare backend rows against the reference engine after the run.
    #[arg(long)]
    verify: bool,
    /// Where to write run-report.json, run-report.csv and run-manifest.json.
    #[arg(long, value_name = "DIR")]
    report_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Report files; when omitted, every non-manifest *.json in --report-dir.
    #[arg(value_name = "FILE")]
    files: Vec<PathBuf>,
    #[arg(long, value_name = "DIR")]
    report_dir: Option<PathBuf>,
    /// Also write a response-time-versus-fact-count series to plot.csv.
    #[arg(long)]
    plot: bool,
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let defaults = Defaults::load(cli.config.as_deref())?;
    match cli.cmd {
        Cmd::Generate(args) => cmd_generate(args, &defaults),
        Cmd::Run(args) => cmd_run(args, &defaults),
        Cmd::Report(args) => cmd_report(args, &defaults),
    }
}

/// Values from the optional `--config` file, consulted when a flag is absent.
struct Defaults(HashMap<String, String>);

const KNOWN_KEYS: &[&str] = &[
    "out", "sf", "density", "pm", "po", "seed", "divisor", "taxonomy", "warehouse", "driver",
    "driver-config", "blocks", "nrun", "timeout", "verify", "report-dir", "plot",
];

impl Defaults {
    fn load(path: Option<&Path>) -> Result<Self, CliError> {
        let Some(path) = path else { return Ok(Defaults(HashMap::new())) };
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Param(format!("config file {}: {e}", path.display())))?;
        let mut map = HashMap::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Param(format!(
                    "config line is not `key = value`: {raw:?}"
                )));
            };
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Param(format!("config file has unknown key {key:?}")));
            }
            map.insert(key, value.trim().to_string());
        }
        Ok(Defaults(map))
    }

    fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.0.get(key) {
            None => Ok(None),
            Some(text) => text.parse::<T>().map(Some).map_err(|_| {
                CliError::Param(format!("config value for {key:?} is invalid: {text:?}"))
            }),
        }
    }

    fn flag(&self, key: &str) -> Result<bool, CliError> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}

fn cmd_generate(args: GenerateArgs, defaults: &Defaults) -> Result<(), CliError> {
    let base = GenParams::default();
    let gp = GenParams {
        sf: args.sf.or(defaults.get("sf")?).unwrap_or(base.sf),
        density: args.density.or(defaults.get("density")?).unwrap_or(base.density),
        p_missing: args.pm.or(defaults.get("pm")?).unwrap_or(base.p_missing),
        p_reorder: args.po.or(defaults.get("po")?).unwrap_or(base.p_reorder),
        seed: args.seed.or(defaults.get("seed")?).unwrap_or(base.seed),
        scale_divisor: args.divisor.or(defaults.get("divisor")?).unwrap_or(base.scale_divisor),
    };
    let out = args
        .out
        .or(defaults.get("out")?)
        .unwrap_or_else(|| PathBuf::from("."));
    let taxonomy = match args.taxonomy.or(defaults.get("taxonomy")?) {
        None => CategoryTaxonomy::default_taxonomy(),
        Some(path) => {
            let text = std::fs::read_to_string(&path).map_err(|e| {
                CliError::Runtime(format!("taxonomy file {}: {e}", path.display()))
            })?;
            CategoryTaxonomy::parse(&text)
                .map_err(|e| CliError::Param(format!("taxonomy file {}: {e}", path.display())))?
        }
    };

    let (w, stats) = xweb::warehouse::generate_warehouse(&gp, taxonomy).map_err(|e| match e {
        DatagenError::Param { .. } => CliError::Param(e.to_string()),
        other => CliError::Runtime(other.to_string()),
    })?;
    let docs = xweb::codec::emit_warehouse(&w.model, &w.dims, &w.catsets, &w.taxonomy, &w.facts)
        .map_err(|e| CliError::Runtime(format!("emitting documents: {e}")))?;

    std::fs::create_dir_all(&out)
        .map_err(|e| CliError::Runtime(format!("output directory {}: {e}", out.display())))?;
    docs.write_dir(&out)
        .map_err(|e| CliError::Runtime(format!("writing documents to {}: {e}", out.display())))?;

    let man = GenerationManifest {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        params: gp,
        facts_emitted: stats.facts_emitted,
        digests: document_digests(&docs),
    };
    write_pretty_json(&out.join(GEN_MANIFEST), &man)?;

    println!(
        "wrote {} documents and {GEN_MANIFEST} to {} ({} facts)",
        man.digests.len(),
        out.display(),
        stats.facts_emitted
    );
    for doc in docs.in_load_order() {
        println!("  {:<14} {:>9} B  sha256:{}", doc.name, doc.bytes.len(), &man.digests[&doc.name][..12]);
    }
    Ok(())
}

fn cmd_run(args: RunArgs, defaults: &Defaults) -> Result<(), CliError> {
    let dir = args
        .warehouse
        .or(defaults.get("warehouse")?)
        .unwrap_or_else(|| PathBuf::from("."));
    let docs = WarehouseDocuments::read_dir(&dir).map_err(|e| {
        CliError::Runtime(format!("warehouse directory {}: {e}", dir.display()))
    })?;

    // The manifest, when present, must still describe these exact bytes.
    let digests = document_digests(&docs);
    let gen_manifest = read_gen_manifest(&dir)?;
    if let Some(man) = &gen_manifest {
        for (name, digest) in &man.digests {
            if digests.get(name) != Some(digest) {
                return Err(CliError::Runtime(format!(
                    "document {name:?} does not match {GEN_MANIFEST}; regenerate the warehouse"
                )));
            }
        }
    }

    let blocks = args.blocks.or(defaults.get("blocks")?);
    let nrun = args.nrun.or(defaults.get("nrun")?).unwrap_or(0);
    let timeout_ms = args.timeout.or(defaults.get("timeout")?).unwrap_or(60_000);
    let wc = workload_config(blocks.as_deref(), nrun, Duration::from_millis(timeout_ms))?;
    wc.validate().map_err(|e| CliError::Param(e.to_string()))?;

    let driver_name = args
        .driver
        .or(defaults.get("driver")?)
        .unwrap_or_else(|| "reference".to_string());
    let mut drv: Box<dyn xweb::bench::Driver> = match driver_name.as_str() {
        "reference" => Box::new(xweb::bench::ReferenceDriver::new()),
        "http" => {
            let path = args
                .driver_config
                .or(defaults.get("driver-config")?)
                .ok_or_else(|| {
                    CliError::Param("--driver http requires --driver-config".to_string())
                })?;
            let cfg = xweb::bench::HttpDriverConfig::from_file(&path).map_err(|e| {
                if e.kind() == std::io::ErrorKind::InvalidData {
                    CliError::Param(format!("driver config {}: {e}", path.display()))
                } else {
                    CliError::Runtime(format!("driver config {}: {e}", path.display()))
                }
            })?;
            Box::new(xweb::bench::HttpDriver::new(cfg))
        }
        other => {
            return Err(CliError::Param(format!(
                "unknown driver {other:?}; expected `reference` or `http`"
            )))
        }
    };

    let load = load_test(drv.as_mut(), &docs).map_err(|e| {
        CliError::Runtime(format!(
            "{e} ({} of 6 documents were loaded)",
            e.partial.docs.len()
        ))
    })?;
    let mut report =
        performance_test(drv.as_mut(), &wc, &docs_model(&docs)?, xweb::bench::EnvInfo::capture())
            .map_err(|e| CliError::Param(e.to_string()))?;
    report.load = Some(load);
    report.warehouse_facts = gen_manifest.as_ref().map(|m| m.facts_emitted);

    let mut mismatches = 0usize;
    if args.verify || defaults.flag("verify")? {
        let (w, _warnings) = xweb::codec::parse_warehouse(&docs)
            .map_err(|e| CliError::Runtime(format!("assembling warehouse for verify: {e}")))?;
        let verdicts = verify_backend(drv.as_mut(), &w, &wc)
            .map_err(|e| CliError::Param(e.to_string()))?;
        mismatches = verdicts
            .iter()
            .filter(|v| matches!(v.verdict, xweb::bench::Verdict::Mismatch(_)))
            .count();
        report.verdicts = Some(verdicts);
    }

    let report_dir = args
        .report_dir
        .or(defaults.get("report-dir")?)
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&report_dir).map_err(|e| {
        CliError::Runtime(format!("report directory {}: {e}", report_dir.display()))
    })?;
    let report_path = report_dir.join("run-report.json");
    xweb::bench::write_json(&report, &report_path)
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let csv_path = report_dir.join("run-report.csv");
    std::fs::write(&csv_path, to_flat_csv(&report))
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", csv_path.display())))?;
    let run_manifest = RunManifest {
        toolkit_version: env!("CARGO_PKG_VERSION").to_string(),
        driver: report.driver.clone(),
        workload: wc,
        digests,
    };
    write_pretty_json(&report_dir.join(RUN_MANIFEST), &run_manifest)?;

    print_run_summary(&report);
    println!("report written to {}", report_path.display());

    if mismatches > 0 {
        return Err(CliError::Mismatch(mismatches));
    }
    Ok(())
}

fn cmd_report(args: ReportArgs, defaults: &Defaults) -> Result<(), CliError> {
    let dir = args
        .report_dir
        .or(defaults.get("report-dir")?)
        .unwrap_or_else(|| PathBuf::from("."));
    let files = if args.files.is_empty() { scan_report_dir(&dir)? } else { args.files };
    if files.is_empty() {
        return Err(CliError::Param(format!(
            "no report files found in {}",
            dir.display()
        )));
    }

    let mut reports = Vec::new();
    for path in &files {
        let report = read_json(path)
            .map_err(|e| CliError::Runtime(format!("report {}: {e}", path.display())))?;
        reports.push((path.clone(), report));
    }

    for (path, report) in &reports {
        println!("{}", path.display());
        print_run_summary(report);
        println!();
    }

    if args.plot || defaults.flag("plot")? {
        let plot_path = dir.join("plot.csv");
        let mut series: Vec<(String, u64, f64)> = Vec::new();
        for (path, report) in &reports {
            let Some(facts) = report.warehouse_facts else {
                eprintln!(
                    "note: {} has no fact count and is left out of the plot",
                    path.display()
                );
                continue;
            };
            for bs in &report.block_stats {
                series.push((bs.block.clone(), facts, ms(bs.stats.avg)));
            }
        }
        series.sort_by(|a, b| (a.0.as_str(), a.1).cmp(&(b.0.as_str(), b.1)));
        let mut text = String::from("block,facts,avg_ms\n");
        for (block, facts, avg) in &series {
            text.push_str(&format!("{block},{facts},{avg:.3}\n"));
        }
        std::fs::write(&plot_path, text)
            .map_err(|e| CliError::Runtime(format!("writing {}: {e}", plot_path.display())))?;
        println!("plot series written to {}", plot_path.display());
    }
    Ok(())
}

/// Non-manifest JSON files in `dir`, sorted by name.
fn scan_report_dir(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let entries = std::fs::read_dir(dir)
        .map_err(|e| CliError::Runtime(format!("report directory {}: {e}", dir.display())))?;
    let mut files = Vec::new();
    for entry in entries {
        let entry =
            entry.map_err(|e| CliError::Runtime(format!("reading {}: {e}", dir.display())))?;
        let path = entry.path();
        let name = entry.file_name().to_string_lossy().into_owned();
        if name.ends_with(".json") && !name.contains("manifest") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

fn read_gen_manifest(dir: &Path) -> Result<Option<GenerationManifest>, CliError> {
    let path = dir.join(GEN_MANIFEST);
    if !path.exists() {
        return Ok(None);
    }
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Runtime(format!("manifest {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| CliError::Runtime(format!("manifest {}: {e}", path.display())))
}

fn docs_model(docs: &WarehouseDocuments) -> Result<xweb::model::WarehouseModel, CliError> {
    xweb::codec::parse_model(&docs.model.bytes)
        .map_err(|e| CliError::Runtime(format!("model document: {e}")))
}

fn workload_config(
    blocks: Option<&str>,
    nrun: u32,
    timeout: Duration,
) -> Result<WorkloadConfig, CliError> {
    let mut wc = WorkloadConfig { nrun, timeout, ..WorkloadConfig::default() };
    let Some(blocks) = blocks else { return Ok(wc) };
    wc.reporting = false;
    wc.cube_1d = false;
    wc.cube_2d = false;
    wc.cube_3d = false;
    wc.complex_hierarchy = false;
    for token in blocks.split(',') {
        match token.trim().to_ascii_uppercase().as_str() {
            "RE" => wc.reporting = true,
            "1D" => wc.cube_1d = true,
            "2D" => wc.cube_2d = true,
            "3D" => wc.cube_3d = true,
            "CH" => wc.complex_hierarchy = true,
            other => {
                return Err(CliError::Param(format!(
                    "unknown block {other:?}; expected RE, 1D, 2D, 3D or CH"
                )))
            }
        }
    }
    Ok(wc)
}

fn write_pretty_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serializing {}: {e}", path.display())))?;
    std::fs::write(path, text)
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn print_run_summary(report: &xweb::bench::RunReport) {
    println!(
        "driver {} | blocks {} | nrun {} | {} queries",
        report.driver,
        report.blocks.join(","),
        report.nrun,
        report.queries.len()
    );
    if let Some(load) = &report.load {
        println!("load: {} documents in {:.3} ms", load.docs.len(), ms(load.total));
    }
    println!(
        "{:<8} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "block", "global_ms", "avg_ms", "min_ms", "max_ms", "stddev_ms"
    );
    for bs in &report.block_stats {
        print_stats_row(&bs.block, &bs.stats);
    }
    if let Some(overall) = &report.overall {
        print_stats_row("all", overall);
    } else {
        println!("(no completed executions)");
    }
    let timed_out =
        report.queries.iter().flat_map(|q| &q.executions).filter(|e| !e.status.is_ok()).count();
    if timed_out > 0 {
        println!("{timed_out} executions did not complete (timed out or errored)");
    }
    if let Some(verdicts) = &report.verdicts {
        use xweb::bench::Verdict;
        let count = |f: fn(&Verdict) -> bool| verdicts.iter().filter(|v| f(&v.verdict)).count();
        println!(
            "verify: {} match, {} mismatch, {} incomparable",
            count(|v| matches!(v, Verdict::Match)),
            count(|v| matches!(v, Verdict::Mismatch(_))),
            count(|v| matches!(v, Verdict::Incomparable(_)))
        );
        for v in verdicts {
            match &v.verdict {
                Verdict::Match => {}
                Verdict::Mismatch(m) => println!("  {} mismatch: {m}", v.query),
                Verdict::Incomparable(m) => println!("  {} incomparable: {m}", v.query),
            }
        }
    }
}

fn print_stats_row(name: &str, s: &xweb::bench::Stats) {
    println!(
        "{:<8} {:>12.3} {:>12.3} {:>12.3} {:>12.3} {:>12.3}",
        name,
        ms(s.global),
        ms(s.avg),
        ms(s.min),
        ms(s.max),
        ms(s.stddev)
    );
}
