//! Enrols a user from nine sessions, calibrates a threshold for a target
//! recall, then decides on a held-out genuine session and on impostors.
//!
//!     cargo run --example enroll_and_authenticate

use blowmatch::dataset::{synth_dataset, SynthParams};
use blowmatch::fusion::{calibrate_threshold, knn_score, ChannelBounds};
use blowmatch::kernels::pairwise_series;
use blowmatch::{authenticate, BlowSeries, DecisionConfig};

fn main() -> blowmatch::Result<()> {
    let ds = synth_dataset(&SynthParams {
        n_users: 4,
        ..SynthParams::default()
    })?;
    let cfg = DecisionConfig {
        q: 8,
        ..DecisionConfig::default()
    };
    let user = "user00";
    let mine: Vec<&BlowSeries> = ds
        .records
        .iter()
        .filter(|r| r.user_id == user)
        .map(|r| &r.series)
        .collect();
    let (held_out, enrolled) = mine.split_last().expect("ten sessions");

    // leave-one-out scores over the enrolment set
    let ids = (0..enrolled.len()).map(|i| i.to_string()).collect();
    let m = pairwise_series(ids, enrolled, &cfg.kernel)?;
    let members: Vec<usize> = (0..enrolled.len()).collect();
    let genuine = blowmatch::evaluation::genuine_scores(&m, &members, cfg.k, cfg.aggregation)?;
    let threshold = calibrate_threshold(user, &genuine, &cfg, ChannelBounds::default())?;
    println!(
        "{user}: tau = {:.4} accepts {} of {} enrolment sessions",
        threshold.tau,
        cfg.q,
        enrolled.len()
    );

    let score = |query: &BlowSeries| -> blowmatch::Result<f64> {
        let d: Vec<f64> = enrolled
            .iter()
            .map(|e| cfg.kernel.distance(query, e))
            .collect::<Result<_, _>>()?;
        knn_score(&d, cfg.k, cfg.aggregation)
    };
    let s = score(held_out)?;
    println!(
        "held-out genuine session: score {s:.4} -> {:?}",
        authenticate(s, &threshold)
    );
    for r in ds.records.iter().filter(|r| r.user_id != user).step_by(5) {
        let s = score(&r.series)?;
        println!(
            "impostor {}: score {s:.4} -> {:?}",
            r.key(),
            authenticate(s, &threshold)
        );
    }
    Ok(())
}
