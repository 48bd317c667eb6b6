//! Compares one user's two sessions and another user's session under all
//! six distance kernels.
//!
//!     cargo run --example kernels

use blowmatch::dataset::{synth_dataset, SynthParams};
use blowmatch::Kernel;

fn main() -> blowmatch::Result<()> {
    let ds = synth_dataset(&SynthParams {
        n_users: 2,
        sessions_per_user: 2,
        ..SynthParams::default()
    })?;
    let [a, b, c, _] = &ds.records[..] else {
        unreachable!()
    };
    println!("{:<24} {:>12} {:>12}", "kernel", "same user", "other user");
    for k in Kernel::all_defaults() {
        println!(
            "{:<24} {:>12.4} {:>12.4}",
            k.label(),
            k.distance(&a.series, &b.series)?,
            k.distance(&a.series, &c.series)?
        );
    }
    let twed: Kernel = "twed(nu=0.1,lambda=0.5)".parse()?;
    println!(
        "{:<24} {:>12.4} {:>12.4}",
        twed.to_string(),
        twed.distance(&a.series, &b.series)?,
        twed.distance(&a.series, &c.series)?
    );
    Ok(())
}
