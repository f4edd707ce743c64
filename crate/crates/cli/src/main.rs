//! `fpslab`: experiment orchestration for the lattice GFF local-set
//! laboratory. Loads a JSON experiment config, runs the selected Monte Carlo
//! campaigns, and persists plot-ready CSV series plus a JSON report under
//! `out_dir/{config_hash}/`. All writes are write-then-rename so an
//! interrupted run leaves no partial artifacts.

use std::collections::BTreeMap;
use std::error::Error;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use fpslab_core::domain::{build_lattice, BoundaryData, DomainSpec};
use fpslab_core::experiments::{
    find_campaign, run_campaign, shared_calibration, RunParams, TestReport, ACCEPTANCE,
};
use fpslab_core::local_sets::{extract_fps, extract_tvs, LocalSetSample};
use fpslab_core::potential::{Calibration, GreenOracle};
use fpslab_core::sampler::{crossings_at_level, sample_edge_uniforms, sample_gff};

#[derive(Parser)]
#[command(
    name = "fpslab",
    version,
    about = "Monte Carlo laboratory for GFF first passage sets and two-valued local sets"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Fit the lattice Green normalization constants and persist the profile
    Calibrate {
        /// Experiment config (JSON); out_dir receives calibration.json
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the selected campaigns; exit 0 iff every selected test passes
    Run {
        /// Experiment config (JSON)
        #[arg(long)]
        config: PathBuf,
        /// Override the config seed
        #[arg(long)]
        seed: Option<u64>,
        /// Override the per-case sample count for every selected test
        #[arg(long)]
        samples: Option<usize>,
        /// Worker threads (default: config, then FPSLAB_WORKERS, then all cores)
        #[arg(long)]
        workers: Option<usize>,
        /// Override the config output directory
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pretty-print a persisted report.json (pass the artifact directory)
    Report { dir: PathBuf },
    /// Extract one local set and export it for external visualization
    Extract {
        /// Lattice mesh on the unit disk
        #[arg(long, default_value_t = 0.02)]
        mesh: f64,
        /// FPS level a (the set at level −a)
        #[arg(long, default_value_t = 1.0)]
        level: f64,
        /// Upper level b: extracts the two-valued set A_{−a,b} instead
        #[arg(long)]
        upper: Option<f64>,
        #[arg(long, default_value_t = 177)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = ExportFormat::Json)]
        format: ExportFormat,
        /// Output file
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    /// {"kind", "a", "b", "mesh", "vertices": [interior indices]}
    Json,
    /// ASCII PGM raster mask (set = white)
    Pgm,
}

/// Experiment configuration (JSON). Unknown fields are rejected.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    /// Campaign selection; an explicit empty list runs nothing. Defaults to
    /// the full acceptance manifest.
    #[serde(default = "default_tests")]
    tests: Vec<String>,
    #[serde(default = "default_seed")]
    seed: u64,
    /// Per-case sample override; each campaign uses its stated defaults when
    /// absent.
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default = "default_out_dir")]
    out_dir: PathBuf,
    #[serde(default)]
    workers: Option<usize>,
    /// Domain under study for ad-hoc extraction tooling; the acceptance
    /// campaigns fix their own domains.
    #[serde(default)]
    domain: Option<DomainSpec>,
    /// Mesh ladder, sorted descending (coarse to fine).
    #[serde(default)]
    meshes: Vec<f64>,
    #[serde(default)]
    levels: Levels,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Levels {
    #[serde(default)]
    a: Vec<f64>,
    #[serde(default)]
    b: Vec<f64>,
    #[serde(default)]
    gamma: Vec<f64>,
}

fn default_tests() -> Vec<String> {
    ACCEPTANCE.iter().map(|c| c.name.to_string()).collect()
}

fn default_seed() -> u64 {
    177
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), String> {
        for name in &self.tests {
            if find_campaign(name).is_none() {
                return Err(format!(
                    "unknown test '{name}'; known tests: {}",
                    default_tests().join(", ")
                ));
            }
        }
        if self.meshes.windows(2).any(|w| w[0] <= w[1]) {
            return Err("meshes must be sorted descending (coarse to fine)".into());
        }
        if let Some(d) = &self.domain {
            d.validate().map_err(|e| e.to_string())?;
        }
        Ok(())
    }
}

/// Entry for one test in the persisted report.
#[derive(Debug, Serialize, Deserialize)]
struct TestEntry {
    name: String,
    passed: bool,
    /// Present when the campaign errored instead of completing.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(default)]
    details: Vec<String>,
    #[serde(default)]
    metrics: BTreeMap<String, f64>,
    #[serde(default)]
    wall_secs: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct ExperimentReport {
    config_hash: String,
    artifact_version: String,
    calibration: Calibration,
    config: ExperimentConfig,
    tests: Vec<TestEntry>,
    total_wall_secs: f64,
}

fn main() -> ExitCode {
    match dispatch(Cli::parse().cmd) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cmd: Cmd) -> Result<ExitCode, Box<dyn Error>> {
    match cmd {
        Cmd::Calibrate { config } => cmd_calibrate(&config),
        Cmd::Run {
            config,
            seed,
            samples,
            workers,
            out,
        } => cmd_run(&config, seed, samples, workers, out),
        Cmd::Report { dir } => cmd_report(&dir),
        Cmd::Extract {
            mesh,
            level,
            upper,
            seed,
            format,
            out,
        } => cmd_extract(mesh, level, upper, seed, format, &out),
    }
}

fn load_config(path: &Path) -> Result<ExperimentConfig, Box<dyn Error>> {
    let text = fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let cfg: ExperimentConfig = serde_json::from_str(&text)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Short content hash of the effective (post-override) configuration.
fn config_hash(cfg: &ExperimentConfig) -> String {
    let bytes = serde_json::to_vec(cfg).expect("config serializes");
    hex::encode(&Sha256::digest(&bytes)[..6])
}

fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

fn cmd_calibrate(config: &Path) -> Result<ExitCode, Box<dyn Error>> {
    let cfg = load_config(config)?;
    let calib = shared_calibration()?;
    let json = serde_json::to_string_pretty(&calib)?;
    fs::create_dir_all(&cfg.out_dir)?;
    write_atomic(&cfg.out_dir.join("calibration.json"), json.as_bytes())?;
    println!("{json}");
    Ok(ExitCode::SUCCESS)
}

fn cmd_run(
    config: &Path,
    seed: Option<u64>,
    samples: Option<usize>,
    workers: Option<usize>,
    out: Option<PathBuf>,
) -> Result<ExitCode, Box<dyn Error>> {
    let mut cfg = load_config(config)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(m) = samples {
        cfg.samples = Some(m);
    }
    if let Some(w) = workers {
        cfg.workers = Some(w);
    }
    if let Some(o) = out {
        cfg.out_dir = o;
    }
    let workers = cfg.workers.or_else(|| {
        std::env::var("FPSLAB_WORKERS")
            .ok()
            .and_then(|s| s.parse().ok())
    });
    if let Some(w) = workers {
        // per-sample RNG streams are keyed by sample index, so results do
        // not depend on the pool size
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .ok();
    }

    let hash = config_hash(&cfg);
    let dir = cfg.out_dir.join(&hash);
    fs::create_dir_all(&dir)?;
    let params = RunParams {
        seed: cfg.seed,
        samples: cfg.samples,
    };
    let t0 = Instant::now();
    let mut entries = Vec::new();
    let mut all_passed = true;
    for name in &cfg.tests {
        let campaign = find_campaign(name).expect("validated");
        eprintln!("running {name}…");
        match run_campaign(campaign, &params) {
            Ok(rep) => {
                println!(
                    "{:<28} {} ({:.1}s)",
                    rep.name,
                    if rep.passed { "PASS" } else { "FAIL" },
                    rep.wall_secs
                );
                for d in &rep.details {
                    println!("    {d}");
                }
                all_passed &= rep.passed;
                write_series_csv(&dir, &rep)?;
                entries.push(TestEntry {
                    name: rep.name,
                    passed: rep.passed,
                    error: None,
                    details: rep.details,
                    metrics: rep.metrics,
                    wall_secs: rep.wall_secs,
                });
            }
            Err(e) => {
                println!("{name:<28} FAIL (error: {e})");
                all_passed = false;
                entries.push(TestEntry {
                    name: name.clone(),
                    passed: false,
                    error: Some(e.to_string()),
                    details: Vec::new(),
                    metrics: BTreeMap::new(),
                    wall_secs: 0.0,
                });
            }
        }
    }
    let report = ExperimentReport {
        config_hash: hash.clone(),
        artifact_version: format!("fpslab-{}+{hash}", env!("CARGO_PKG_VERSION")),
        calibration: shared_calibration()?,
        config: cfg,
        tests: entries,
        total_wall_secs: t0.elapsed().as_secs_f64(),
    };
    write_atomic(
        &dir.join("report.json"),
        serde_json::to_string_pretty(&report)?.as_bytes(),
    )?;
    println!("report: {}", dir.join("report.json").display());
    Ok(if all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

/// One CSV per test: columns series,sample_index,seed,value. Written even
/// when the test has no per-sample series (header only), then renamed into
/// place.
fn write_series_csv(dir: &Path, rep: &TestReport) -> std::io::Result<()> {
    let path = dir.join(format!("{}.csv", rep.name));
    let tmp = path.with_extension("csv.tmp");
    {
        let mut f = BufWriter::new(fs::File::create(&tmp)?);
        writeln!(f, "series,sample_index,seed,value")?;
        for s in &rep.series {
            for (i, v) in s.values.iter().enumerate() {
                writeln!(f, "{},{i},{},{v}", s.name, s.seed)?;
            }
        }
        f.flush()?;
    }
    fs::rename(&tmp, path)
}

fn cmd_report(dir: &Path) -> Result<ExitCode, Box<dyn Error>> {
    let path = if dir.is_dir() {
        dir.join("report.json")
    } else {
        dir.to_path_buf()
    };
    let report: ExperimentReport = serde_json::from_str(&fs::read_to_string(&path)?)?;
    println!(
        "config {} ({}), {} test(s), {:.1}s total",
        report.config_hash,
        report.artifact_version,
        report.tests.len(),
        report.total_wall_secs
    );
    println!(
        "calibration: kappa = {:.6}, self-singularity = {:.6}",
        report.calibration.kappa, report.calibration.self_singularity
    );
    for t in &report.tests {
        let verdict = match (&t.error, t.passed) {
            (Some(e), _) => format!("ERROR ({e})"),
            (None, true) => "PASS".to_string(),
            (None, false) => "FAIL".to_string(),
        };
        println!("{:<28} {} ({:.1}s)", t.name, verdict, t.wall_secs);
        for d in &t.details {
            println!("    {d}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_extract(
    mesh: f64,
    level: f64,
    upper: Option<f64>,
    seed: u64,
    format: ExportFormat,
    out: &Path,
) -> Result<ExitCode, Box<dyn Error>> {
    let calib = shared_calibration()?;
    let o = GreenOracle::calibrated(build_lattice(&DomainSpec::disk(1.0), mesh)?, calib.clone())?;
    let dom = o.dom();
    let u = BoundaryData::zero(dom);
    let s = sample_gff(&o, seed, 0)?;
    let uni_dn = sample_edge_uniforms(dom, seed, 1);
    let c_dn = crossings_at_level(
        dom,
        |id| s.total(dom, &u, id),
        -level,
        calib.kappa_edge,
        &uni_dn,
    );
    let ls: LocalSetSample = match upper {
        None => extract_fps(dom, &s, &u, &c_dn, level, calib.kappa_cell),
        Some(b) => {
            let uni_up = sample_edge_uniforms(dom, seed, 2);
            let c_up = crossings_at_level(
                dom,
                |id| -s.total(dom, &u, id),
                -b,
                calib.kappa_edge,
                &uni_up,
            );
            extract_tvs(dom, &s, &u, &c_dn, &c_up, level, b, calib.kappa_cell)
        }
    };
    let bytes = match format {
        ExportFormat::Json => {
            let vertices: Vec<usize> = (0..dom.interior_count()).filter(|&v| ls.in_set[v]).collect();
            let value = serde_json::json!({
                "kind": if upper.is_some() { "tvs" } else { "fps_down" },
                "a": level,
                "b": upper,
                "mesh": mesh,
                "seed": seed,
                "vertices": vertices,
            });
            serde_json::to_vec_pretty(&value)?
        }
        ExportFormat::Pgm => render_pgm(dom, &ls),
    };
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    write_atomic(out, &bytes)?;
    println!(
        "wrote {} ({} set vertices of {})",
        out.display(),
        ls.interior_size(),
        dom.interior_count()
    );
    Ok(ExitCode::SUCCESS)
}

/// ASCII PGM mask: set vertices white (255), complement gray (96),
/// boundary white, outside black.
fn render_pgm(dom: &fpslab_core::domain::LatticeDomain, ls: &LocalSetSample) -> Vec<u8> {
    use fpslab_core::domain::Cell;
    let (nx, ny) = dom.grid_dims();
    let (ix0, iy0) = dom.grid_origin();
    let mut out = format!("P2\n{nx} {ny}\n255\n").into_bytes();
    for row in (0..ny).rev() {
        let mut line = String::with_capacity(nx * 4);
        for col in 0..nx {
            let px = match dom.cell(ix0 + col as i64, iy0 + row as i64) {
                Cell::Interior(v) => {
                    if ls.in_set[v as usize] {
                        255
                    } else {
                        96
                    }
                }
                Cell::Boundary(_) => 255,
                Cell::Outside => 0,
            };
            if col > 0 {
                line.push(' ');
            }
            line.push_str(&px.to_string());
        }
        line.push('\n');
        out.extend_from_slice(line.as_bytes());
    }
    out
}
