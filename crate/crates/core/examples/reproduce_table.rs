//! Six kernels by three modes by three target recalls on a session CSV,
//! written as an aligned table. Without an argument a synthetic 50 user
//! population stands in for the published recordings.
//!
//!     cargo run --release --example reproduce_table [sessions.csv [schema.toml]]

use blowmatch::dataset::{load_sessions_csv_with, synth_dataset, SessionSchema, SynthParams};
use blowmatch::{
    Channel, DecisionConfig, EvalReport, Evaluator, Kernel, ModeFilter, PreprocessConfig,
    TargetRecall,
};

fn main() -> blowmatch::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let ds = match args.first() {
        Some(path) => {
            let schema = match args.get(1) {
                Some(s) => toml::from_str(&std::fs::read_to_string(s).expect("readable schema"))
                    .expect("valid schema TOML"),
                None => SessionSchema::default(),
            };
            load_sessions_csv_with(path.as_ref(), &PreprocessConfig::default(), &schema)?
        }
        None => synth_dataset(&SynthParams {
            n_users: 50,
            ..SynthParams::default()
        })?,
    };
    let mut ev = Evaluator::new(&ds);
    let mut rows = Vec::new();
    for kernel in Kernel::all_defaults() {
        let start = std::time::Instant::now();
        for mode in ModeFilter::all() {
            let n = ds.session_counts(mode).values().copied().min().unwrap_or(0);
            for q in [
                TargetRecall::AllBut(0),
                TargetRecall::AllBut(1),
                TargetRecall::AllBut(2),
            ] {
                let cfg = DecisionConfig {
                    kernel: kernel.clone(),
                    q: q.resolve(n)?,
                    ..DecisionConfig::default()
                };
                rows.push(ev.run(&cfg, mode, Channel::Blow)?.row);
            }
        }
        eprintln!("{}: {:.1} s", kernel.label(), start.elapsed().as_secs_f64());
    }
    print!("{}", EvalReport::new(rows).to_text());
    Ok(())
}
