//! Full protocol on a synthetic population: blow, face and fused channels
//! for every mode, printed as a table.
//!
//!     cargo run --release --example evaluate_synthetic [seed]

use blowmatch::dataset::{synth_dataset, SynthParams};
use blowmatch::face::synth_embeddings;
use blowmatch::{Channel, DecisionConfig, EvalReport, Evaluator, ModeFilter, TargetRecall};

fn main() -> blowmatch::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(Ok(0), |s| s.parse())
        .expect("seed must be an integer");
    let params = SynthParams {
        seed,
        ..SynthParams::default()
    };
    let mut ds = synth_dataset(&params)?;
    ds.attach_embeddings(synth_embeddings(
        params.n_users,
        params.sessions_per_user,
        0.05,
        seed + 1,
    )?)?;

    let mut ev = Evaluator::new(&ds);
    let mut rows = Vec::new();
    for channel in Channel::all() {
        for mode in ModeFilter::all() {
            let n = ds.session_counts(mode).values().copied().min().unwrap_or(0);
            for q in [TargetRecall::AllBut(0), TargetRecall::AllBut(1)] {
                let cfg = DecisionConfig {
                    q: q.resolve(n)?,
                    ..DecisionConfig::default()
                };
                rows.push(ev.run(&cfg, mode, channel)?.row);
            }
        }
    }
    print!("{}", EvalReport::new(rows).to_text());
    Ok(())
}
