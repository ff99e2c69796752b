//! Reference external compressor: answers adapter requests with native AVC
//! costs.
//!
//! ```text
//! mdlad-avc-tool [--arities 2,3,2] [REQUEST RESPONSE]
//! ```
//!
//! Paths default to `$MDLAD_REQUEST` / `$MDLAD_RESPONSE`. Without
//! `--arities` each column's arity is one more than its largest code in the
//! request, which can differ from the dataset's true arity.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use mdlad::extern_adapter::{protocol, ENV_REQUEST, ENV_RESPONSE};
use mdlad_core::{AvcLearner, Hypothesis, Learner};

#[derive(Parser)]
#[command(version, about = "AVC compressor speaking the mdlad adapter protocol")]
struct Args {
    /// Comma-separated column arities.
    #[arg(long, value_delimiter = ',')]
    arities: Option<Vec<u32>>,
    #[arg(env = ENV_REQUEST)]
    request: PathBuf,
    #[arg(env = ENV_RESPONSE)]
    response: PathBuf,
}

fn run(args: Args) -> Result<()> {
    let text = std::fs::read_to_string(&args.request)
        .with_context(|| format!("reading {}", args.request.display()))?;
    let req = protocol::parse_request(&text)?;
    let arities = match args.arities {
        Some(a) => a,
        None => (0..req.m)
            .map(|j| {
                req.fit.iter().chain(&req.score).map(|r| r[j] + 1).max().unwrap_or(1)
            })
            .collect(),
    };
    let fit: Vec<&[u32]> = req.fit.iter().map(Vec::as_slice).collect();
    let score: Vec<&[u32]> = req.score.iter().map(Vec::as_slice).collect();
    let model = AvcLearner::new(arities).fit(&fit)?;
    let mut costs = model.item_costs(&fit)?;
    costs.extend(model.item_costs(&score)?);

    let mut body = String::new();
    protocol::write_response(&mut body, model.hypothesis_cost(), &costs);
    std::fs::write(&args.response, body)
        .with_context(|| format!("writing {}", args.response.display()))?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("mdlad-avc-tool: {e:#}");
            ExitCode::FAILURE
        }
    }
}
