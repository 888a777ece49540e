use std::fs::File;
use std::path::PathBuf;

use clap::ValueEnum;

use erw_core::experiments::{
    fit_returns, read_csv, read_hist_csv, returns_from_csv, tail_estimator, Model,
};

use crate::{CmdResult, Failure};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Expect {
    SqrtLog,
    Log,
    Constant,
}

#[derive(clap::Args, Debug)]
pub struct Args {
    /// Statistics CSV written by `simulate`.
    #[arg(long = "in")]
    input: PathBuf,
    /// Histogram CSV written by `simulate`, for the tail fit.
    #[arg(long)]
    hist: Option<PathBuf>,
    /// Horizon for the tail fit (default: the last one in the histogram).
    #[arg(long)]
    t: Option<u64>,
    /// Fail unless this model has the smallest residual sum.
    #[arg(long, value_enum)]
    expect: Option<Expect>,
}

fn open(p: &PathBuf) -> Result<File, Failure> {
    File::open(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))
}

pub fn run(a: Args) -> CmdResult {
    let rows = read_csv(open(&a.input)?)?;
    let returns = returns_from_csv(&rows);
    let fit = fit_returns(&returns)?;
    let mut doc = serde_json::json!({ "returns": returns, "scaling_fit": fit });
    if let Some(h) = &a.hist {
        let hists = read_hist_csv(open(h)?)?;
        let (t, hist) = match a.t {
            Some(t) => hists
                .iter()
                .find(|(ht, _)| *ht == t)
                .ok_or_else(|| Failure::Usage(format!("no histogram for t = {t}")))?,
            None => hists
                .last()
                .ok_or_else(|| Failure::Usage("empty histogram file".into()))?,
        };
        let tail = tail_estimator(*t, hist)?;
        doc["tail"] = serde_json::to_value(&tail).map_err(|e| Failure::Usage(e.to_string()))?;
        doc["tail_lambda_slope_negative"] = tail.lambda_slope_negative().into();
    }
    println!(
        "{}",
        serde_json::to_string_pretty(&doc).map_err(|e| Failure::Usage(e.to_string()))?
    );
    eprintln!("fit: best model {:?}", fit.winner);
    if let Some(e) = a.expect {
        let want = match e {
            Expect::SqrtLog => Model::SqrtLog,
            Expect::Log => Model::Log,
            Expect::Constant => Model::Constant,
        };
        if !fit.strictly_best(want) {
            return Err(Failure::Assertion(format!(
                "expected {want:?} to fit best, got {:?}",
                fit.winner
            )));
        }
    }
    Ok(())
}
