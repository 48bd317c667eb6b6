//! Averages each user's sessions into a DTW barycentre and shows how far
//! every session sits from its own and from other signatures.
//!
//!     cargo run --release --example dba_signature

use blowmatch::dataset::{synth_dataset, SynthParams};
use blowmatch::dba::{dba_signature, DEFAULT_DBA_ITERATIONS};
use blowmatch::{BlowSeries, Kernel};

fn main() -> blowmatch::Result<()> {
    let ds = synth_dataset(&SynthParams {
        n_users: 3,
        length: 150,
        ..SynthParams::default()
    })?;
    let mut signatures = Vec::new();
    for user in ds.users() {
        let sessions: Vec<BlowSeries> = ds
            .records
            .iter()
            .filter(|r| r.user_id == user)
            .map(|r| r.series.clone())
            .collect();
        signatures.push((user, dba_signature(&sessions, DEFAULT_DBA_ITERATIONS)?));
    }
    let dtw = Kernel::default();
    print!("{:<8}", "session");
    for (u, _) in &signatures {
        print!(" {u:>9}");
    }
    println!();
    for r in ds.records.iter().step_by(3) {
        print!("{:<8}", r.key().replace("user", "u"));
        for (_, sig) in &signatures {
            print!(" {:>9.3}", dtw.distance(&r.series, sig)?);
        }
        println!();
    }
    Ok(())
}
