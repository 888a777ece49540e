use std::fs;
use std::path::PathBuf;

use erw_core::coupling::{
    dominance_ensemble, independent_dominance, replay_transcript, CouplingParams,
};
use erw_core::Site;

use crate::{parse, resolve_seed, CmdResult, Failure};

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Real steps of each walk.
    #[arg(long)]
    t: u64,
    /// Coupled runs.
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Visited configuration of the walk S (file, one site per line).
    #[arg(long)]
    vis_s: Option<PathBuf>,
    /// Visited configuration of the walk R; must be contained in that of S.
    #[arg(long)]
    vis_r: Option<PathBuf>,
    /// Common starting vertex `x,y,z`.
    #[arg(long, default_value = "0,0,0", value_parser = parse_site)]
    start: Site,
    /// Floor vertex whose visits are counted.
    #[arg(long, default_value = "0,0,0", value_parser = parse_site)]
    target: Site,
    /// Verify every coupling invariant after every step.
    #[arg(long)]
    checked: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Also compare two independent (uncoupled) ensembles.
    #[arg(long)]
    independent: bool,
    /// Write the step transcript of the first failing run here.
    #[arg(long)]
    transcript: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    /// Write the JSON report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_site(s: &str) -> Result<Site, String> {
    parse::site(s).map_err(|e| e.to_string())
}

fn load(path: &Option<PathBuf>) -> Result<Vec<Site>, Failure> {
    match path {
        None => Ok(vec![]),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            Ok(parse::site_file(&text)
                .map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?)
        }
    }
}

pub fn run(a: Args) -> CmdResult {
    if a.runs == 0 {
        return Err(Failure::Usage("--runs must be positive".into()));
    }
    let (seed, _) = resolve_seed(a.seed, None)?;
    let params = CouplingParams {
        start: a.start,
        vis_r: load(&a.vis_r)?,
        vis_s: load(&a.vis_s)?,
        t: a.t,
        target: a.target,
        checked: a.checked,
    };
    let go = || -> Result<_, Failure> {
        let report = dominance_ensemble(&params, a.runs, seed)?;
        let indep = if a.independent {
            Some(independent_dominance(&params, a.runs, seed)?)
        } else {
            None
        };
        Ok((report, indep))
    };
    eprintln!(
        "couple: {} runs of {} steps, seed {seed}{}",
        a.runs,
        a.t,
        if a.checked { ", checked" } else { "" }
    );
    let (report, indep) = match a.threads {
        None => go()?,
        Some(n) => rayon_pool(n)?.install(go)?,
    };
    let mut json = serde_json::to_value(&report).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some((tail, min_z)) = &indep {
        json["independent"] = serde_json::json!({ "tail": tail, "min_tail_z": min_z });
    }
    let text =
        serde_json::to_string_pretty(&json).map_err(|e| Failure::Usage(e.to_string()))? + "\n";
    match &a.out {
        Some(p) => fs::write(p, &text)?,
        None => print!("{text}"),
    }
    if let (Some(path), Some(run)) = (&a.transcript, report.first_failed_run) {
        let (steps, err) = replay_transcript(&params, seed, run)?;
        let doc =
            serde_json::json!({ "run": run, "error": err.map(|e| e.to_string()), "steps": steps });
        fs::write(
            path,
            serde_json::to_string_pretty(&doc).map_err(|e| Failure::Usage(e.to_string()))?,
        )?;
    }
    eprintln!(
        "couple: mean V_R {:.4}, mean V_S {:.4}, {} runs with V_R = V_S, {} path violations, {} invariant violations",
        report.mean_v_r,
        report.mean_v_s,
        report.equal_runs,
        report.path_violations,
        report.claim_violations.len()
    );
    if let Some((_, z)) = indep {
        if z < -3.0 {
            eprintln!("couple: warning: independent ensembles differ by {z:.2} standard errors");
        }
    }
    if !report.claim_violations.is_empty() {
        return Err(Failure::Assertion(report.claim_violations[0].clone()));
    }
    if report.path_violations > 0 {
        return Err(Failure::Assertion(format!(
            "{} runs with V_R < V_S",
            report.path_violations
        )));
    }
    Ok(())
}

fn rayon_pool(n: usize) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n.max(1))
        .build()
        .map_err(|e| Failure::Usage(e.to_string()))
}
