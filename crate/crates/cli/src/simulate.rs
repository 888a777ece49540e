use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::Deserialize;

use erw_core::experiments::{
    csv_rows, fit_returns, growth_in_half_widths, returns_table, run_ensemble, summarize,
    write_csv, write_hist_csv, EnsembleConfig, Mode, Model, RunOptions,
};
use erw_core::Site;

use crate::manifest::{digest, now, tool_version, RunManifest};
use crate::{parse, resolve_seed, CmdResult, Failure};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Horizons: `1024,4096`, `2^10..2^24` or `geom:START:END:RATIO`.
    #[arg(long)]
    t_schedule: Option<String>,
    /// Walks per horizon.
    #[arg(long)]
    replicas: Option<u64>,
    /// Master seed (default: ERW_SEED, then 0).
    #[arg(long)]
    seed: Option<u64>,
    /// `erw`, `symmetric` or `drift:p`.
    #[arg(long)]
    mode: Option<String>,
    /// Extra watched sites, `x,y,z;x,y,z`. The origin is always watched.
    #[arg(long)]
    targets: Option<String>,
    /// Radius of the cylinder for the entry count `l`.
    #[arg(long)]
    cylinder: Option<u32>,
    /// Output directory; without it the CSV goes to standard output.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    threads: Option<usize>,
    /// TOML file with the same keys as the flags; flags take precedence.
    #[arg(long, conflicts_with = "from_manifest")]
    config: Option<PathBuf>,
    /// Re-run exactly the configuration recorded in a manifest.
    #[arg(long, conflicts_with_all = ["t_schedule", "replicas", "seed", "mode", "targets", "cylinder"])]
    from_manifest: Option<PathBuf>,
    /// Fail unless mean returns keep growing and the sqrt(log t) model fits best.
    #[arg(long)]
    assert_lower: bool,
    /// No progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Deserialize, Default, Debug)]
#[serde(untagged)]
enum Text<T> {
    Str(String),
    List(T),
    #[default]
    Missing,
}

#[derive(Deserialize, Default, Debug)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    t_schedule: Text<Vec<u64>>,
    replicas: Option<u64>,
    seed: Option<u64>,
    mode: Option<String>,
    #[serde(default)]
    targets: Text<Vec<[i32; 3]>>,
    cylinder: Option<u32>,
    threads: Option<usize>,
    out: Option<PathBuf>,
    assert_lower: Option<bool>,
}

struct Resolved {
    config: EnsembleConfig,
    seed_source: String,
    threads: Option<usize>,
    out: Option<PathBuf>,
    assert_lower: bool,
}

const DRIFT_REFUSAL: &str = "--assert-lower is refused in drift mode: for a walk that descends from new \
vertices only with probability p < 1, lower bounds on returns to a point (and recurrence) are an open \
problem, because the coupling argument needs downward-closed configurations, which a probabilistic drift \
does not produce";

fn resolve(a: &Args) -> Result<Resolved, Failure> {
    if let Some(path) = &a.from_manifest {
        let text = fs::read_to_string(path)?;
        let m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        return Ok(Resolved {
            config: m.config,
            seed_source: "manifest".into(),
            threads: a.threads,
            out: a.out.clone(),
            assert_lower: a.assert_lower,
        });
    }
    let file: FileConfig = match &a.config {
        Some(path) => {
            let text = fs::read_to_string(path)?;
            toml::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let t_schedule = match (a.t_schedule.clone(), file.t_schedule) {
        (Some(s), _) | (None, Text::Str(s)) => parse::schedule(&s)?,
        (None, Text::List(v)) => v,
        (None, Text::Missing) => return Err(Failure::Usage("--t-schedule is required".into())),
    };
    let replicas = a
        .replicas
        .or(file.replicas)
        .ok_or_else(|| Failure::Usage("--replicas is required".into()))?;
    let (master_seed, seed_source) = resolve_seed(a.seed, file.seed)?;
    let mode: Mode = a
        .mode
        .as_deref()
        .or(file.mode.as_deref())
        .unwrap_or("erw")
        .parse()?;
    let targets = match (a.targets.clone(), file.targets) {
        (Some(s), _) | (None, Text::Str(s)) => parse::sites(&s)?,
        (None, Text::List(v)) => v.into_iter().map(|[x, y, z]| Site::new(x, y, z)).collect(),
        (None, Text::Missing) => vec![],
    };
    let config = EnsembleConfig {
        t_schedule,
        replicas,
        master_seed,
        mode,
        targets,
        cylinder_radius: a.cylinder.or(file.cylinder),
    };
    config.validate()?;
    Ok(Resolved {
        config,
        seed_source: seed_source.into(),
        threads: a.threads.or(file.threads),
        out: a.out.clone().or(file.out),
        assert_lower: a.assert_lower || file.assert_lower.unwrap_or(false),
    })
}

fn write_file(
    dir: &Path,
    name: &str,
    f: impl FnOnce(&mut Vec<u8>) -> Result<(), Failure>,
) -> CmdResult {
    let mut buf = Vec::new();
    f(&mut buf)?;
    fs::write(dir.join(name), buf)?;
    Ok(())
}

pub fn run(a: Args) -> CmdResult {
    let r = resolve(&a)?;
    if r.assert_lower {
        if let Mode::Drift(_) = r.config.mode {
            return Err(Failure::Usage(DRIFT_REFUSAL.into()));
        }
    }
    let started = now();
    let cfg = &r.config;
    if !a.quiet {
        eprintln!(
            "simulate: mode {} seed {} ({}), {} replicas, horizons {:?}",
            cfg.mode, cfg.master_seed, r.seed_source, cfg.replicas, cfg.t_schedule
        );
    }
    let step = (cfg.replicas / 20).max(1);
    let next = AtomicU64::new(step);
    let report = |done: u64, total: u64| {
        let mark = next.load(Ordering::Relaxed);
        if done >= mark
            && next
                .compare_exchange(mark, mark + step, Ordering::Relaxed, Ordering::Relaxed)
                .is_ok()
        {
            eprintln!("simulate: {done}/{total} replicas");
        }
    };
    let opts = RunOptions {
        threads: r.threads,
        progress: if a.quiet { None } else { Some(&report) },
    };
    let stats = run_ensemble(cfg, opts)?;
    let rows = csv_rows(&stats);

    match &r.out {
        None => {
            let mut buf = Vec::new();
            write_csv(&rows, &mut buf)?;
            std::io::stdout().write_all(&buf)?;
        }
        Some(dir) => {
            fs::create_dir_all(dir)?;
            write_file(dir, "stats.csv", |b| Ok(write_csv(&rows, b)?))?;
            write_file(dir, "vhist.csv", |b| Ok(write_hist_csv(&stats, b)?))?;
            let summary = summarize(cfg, &stats);
            write_file(dir, "summary.json", |b| {
                serde_json::to_writer_pretty(&mut *b, &summary)
                    .map_err(|e| Failure::Usage(e.to_string()))?;
                b.push(b'\n');
                Ok(())
            })?;
            let outputs = ["stats.csv", "vhist.csv", "summary.json"]
                .iter()
                .map(|f| digest(dir, f))
                .collect::<std::io::Result<Vec<_>>>()?;
            let manifest = RunManifest {
                command: "simulate".into(),
                argv: std::env::args().collect(),
                tool_version: tool_version(),
                config: cfg.clone(),
                master_seed: cfg.master_seed,
                seed_source: r.seed_source.clone(),
                threads: r.threads,
                started,
                finished: now(),
                outputs,
            };
            write_file(dir, "manifest.json", |b| {
                serde_json::to_writer_pretty(&mut *b, &manifest)
                    .map_err(|e| Failure::Usage(e.to_string()))?;
                b.push(b'\n');
                Ok(())
            })?;
            if !a.quiet {
                eprintln!("simulate: wrote {}", dir.display());
            }
        }
    }

    if r.assert_lower {
        let table = returns_table(&stats);
        let growth = growth_in_half_widths(&table).unwrap_or(0.0);
        if !(growth > 5.0) {
            return Err(Failure::Assertion(format!(
                "mean V(t;0) grew by only {growth:.2} CI half-widths between the first and last horizon"
            )));
        }
        if table.len() >= 5 {
            let fit = fit_returns(&table)?;
            if !fit.strictly_best(Model::SqrtLog) {
                return Err(Failure::Assertion(format!(
                    "best scaling model is {:?}, not sqrt-log",
                    fit.winner
                )));
            }
        }
    }
    Ok(())
}
