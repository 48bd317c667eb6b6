use blowmatch::dataset::{load_sessions_csv, synth_dataset, Dataset, SynthParams};
use blowmatch::evaluation::{eer, run_protocol};
use blowmatch::face::cosine_distance_vectors;
use blowmatch::fusion::{calibrate_threshold, fuse, knn_score, min_max_normalize, ChannelBounds};
use blowmatch::kernels::{
    dtw, dtw_banded, euclidean, pairwise_series, sbd, shape_dtw, twed, ShapeDtwParams, TwedParams,
};
use blowmatch::signal::{preprocess_session, rms_windows, sma_values, PreprocessConfig};
use blowmatch::{
    authenticate, BlowSeries, Channel, DecisionConfig, Kernel, KnnAggregation, ModeFilter, RawAudio,
};
use proptest::prelude::*;

fn series(min: usize, max: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0..10.0f64, min..=max)
}

fn pair_same_len(min: usize, max: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (min..=max).prop_flat_map(|n| {
        (
            prop::collection::vec(0.0..10.0f64, n),
            prop::collection::vec(0.0..10.0f64, n),
        )
    })
}

fn bs(v: &[f64]) -> BlowSeries {
    BlowSeries::new(v.to_vec(), 0.02).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rms_ignores_sign(samples in prop::collection::vec(-1.0..1.0f64, 8..200), w in 1usize..8) {
        let a = RawAudio::new(samples.clone(), 48_000).unwrap();
        let b = RawAudio::new(samples.iter().map(|v| -v).collect(), 48_000).unwrap();
        prop_assert_eq!(rms_windows(&a, w).unwrap(), rms_windows(&b, w).unwrap());
    }

    #[test]
    fn sma_stays_within_input_range(v in series(1, 100), w in 1usize..12) {
        let out = sma_values(&v, w).unwrap();
        let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        for o in out {
            prop_assert!(o >= lo - 1e-12 && o <= hi + 1e-12);
        }
    }

    #[test]
    fn preprocessing_is_deterministic_and_scales(
        samples in prop::collection::vec(-1.0..1.0f64, 40..400),
        c in 0.01..100.0f64,
        e in -4i32..4,
    ) {
        let cfg = PreprocessConfig { window_size: 8, sma_window: 3, sample_rate: 48_000 };
        let a = RawAudio::new(samples.clone(), 48_000).unwrap();
        let base = preprocess_session(&a, &cfg).unwrap();
        prop_assert_eq!(&base, &preprocess_session(&a, &cfg).unwrap());

        let scaled = RawAudio::new(samples.iter().map(|v| v * c).collect(), 48_000).unwrap();
        let s = preprocess_session(&scaled, &cfg).unwrap();
        for (p, q) in base.values().iter().zip(s.values()) {
            prop_assert!((p * c - q).abs() <= 1e-12 * (1.0 + q.abs()));
        }
        // powers of two scale without rounding
        let p2 = 2f64.powi(e);
        let exact = RawAudio::new(samples.iter().map(|v| v * p2).collect(), 48_000).unwrap();
        let s = preprocess_session(&exact, &cfg).unwrap();
        for (p, q) in base.values().iter().zip(s.values()) {
            prop_assert_eq!(p * p2, *q);
        }
    }

    #[test]
    fn kernel_axioms(x in series(5, 30), y in series(5, 30)) {
        let (a, b) = (bs(&x), bs(&y));
        for k in Kernel::all_defaults() {
            let (a, b) = if matches!(k, Kernel::Euclidean) {
                let n = x.len().min(y.len());
                (bs(&x[..n]), bs(&y[..n]))
            } else {
                (a.clone(), b.clone())
            };
            let self_d = k.distance(&a, &a).unwrap();
            prop_assert!(self_d.abs() <= 1e-9, "{} self {}", k, self_d);
            let ab = k.distance(&a, &b).unwrap();
            let ba = k.distance(&b, &a).unwrap();
            prop_assert!(ab >= 0.0);
            prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab.abs()), "{} {} {}", k, ab, ba);
        }
    }

    #[test]
    fn dtw_bounded_by_diagonal((x, y) in pair_same_len(1, 40)) {
        let l1: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        prop_assert!(dtw(&x, &y).unwrap() <= l1 + 1e-9);
        prop_assert!(dtw(&x, &y).unwrap() <= euclidean(&x, &y).unwrap() * (x.len() as f64).sqrt() + 1e-9);
    }

    #[test]
    fn band_only_restricts(x in series(1, 30), y in series(1, 30), w in 0usize..35) {
        let full = dtw(&x, &y).unwrap();
        let banded = dtw_banded(&x, &y, Some(w)).unwrap();
        prop_assert!(banded >= full);
        prop_assert!(banded.is_finite());
        if w + 1 >= x.len().max(y.len()) {
            prop_assert_eq!(banded, full);
        }
    }

    #[test]
    fn shape_dtw_width_one_is_dtw(x in series(1, 40), y in series(1, 40)) {
        let p = ShapeDtwParams { width: 1, derivative: false, band: None };
        prop_assert_eq!(shape_dtw(&x, &y, &p).unwrap(), dtw(&x, &y).unwrap());
    }

    #[test]
    fn sbd_range_and_scale(x in series(1, 40), y in series(1, 40), c in 0.001..1000.0f64) {
        prop_assume!(x.iter().any(|&v| v > 0.0));
        let d = sbd(&x, &y).unwrap();
        prop_assert!((0.0..=2.0).contains(&d));
        let cx: Vec<f64> = x.iter().map(|v| v * c).collect();
        prop_assert!(sbd(&x, &cx).unwrap() <= 1e-9);
    }

    #[test]
    fn twed_triangle(x in series(1, 15), y in series(1, 15), z in series(1, 15),
                     nu in 0.0001..1.0f64, lambda in 0.0..2.0f64) {
        let p = TwedParams { stiffness: nu, gap_penalty: lambda };
        let d = |a: &[f64], b: &[f64]| twed(a, b, 0.02, &p).unwrap();
        prop_assert!(d(&x, &z) <= d(&x, &y) + d(&y, &z) + 1e-9);
        prop_assert!(d(&x, &x).abs() <= 1e-12);
        prop_assert!((d(&x, &y) - d(&y, &x)).abs() <= 1e-9);
    }

    #[test]
    fn score_matrix_symmetric_zero_diagonal(set in prop::collection::vec(series(5, 20), 1..6)) {
        let s: Vec<BlowSeries> = set.iter().map(|v| bs(v)).collect();
        let refs: Vec<&BlowSeries> = s.iter().collect();
        let ids = (0..s.len()).map(|i| format!("u/{i}")).collect();
        let m = pairwise_series(ids, &refs, &Kernel::default()).unwrap();
        for i in 0..s.len() {
            prop_assert_eq!(m.get(i, i), 0.0);
            for j in 0..s.len() {
                prop_assert_eq!(m.get(i, j), m.get(j, i));
                prop_assert!(m.get(i, j) >= 0.0);
            }
        }
    }

    #[test]
    fn cosine_properties(a in prop::collection::vec(-1.0..1.0f64, 512), b in prop::collection::vec(-1.0..1.0f64, 512),
                         s in 0.01..100.0f64) {
        let d = cosine_distance_vectors(&a, &b).unwrap();
        prop_assert!((-1e-12..=2.0 + 1e-12).contains(&d));
        prop_assert_eq!(d, cosine_distance_vectors(&b, &a).unwrap());
        let sa: Vec<f64> = a.iter().map(|v| v * s).collect();
        prop_assert!((cosine_distance_vectors(&sa, &b).unwrap() - d).abs() <= 1e-12);
    }

    #[test]
    fn normalisation_keeps_order(v in prop::collection::vec(-1e3..1e3f64, 1..50)) {
        let n = min_max_normalize(&v).unwrap();
        for i in 0..v.len() {
            prop_assert!((0.0..=1.0).contains(&n[i]));
            for j in 0..v.len() {
                if v[i] <= v[j] {
                    prop_assert!(n[i] <= n[j]);
                }
            }
        }
        let argmin = |s: &[f64]| s.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let argmax = |s: &[f64]| s.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        prop_assert_eq!(argmin(&v), argmin(&n));
        prop_assert_eq!(argmax(&v), argmax(&n));
    }

    #[test]
    fn equal_weight_fusion_symmetric(a in 0.0..1.0f64, b in 0.0..1.0f64) {
        let w = blowmatch::FusionWeights::EQUAL;
        prop_assert_eq!(fuse(a, b, &w).unwrap(), fuse(b, a, &w).unwrap());
    }

    #[test]
    fn knn_is_monotone(d in prop::collection::vec(0.0..10.0f64, 1..12), idx in 0usize..12, bump in 0.0..5.0f64, k in 1usize..12) {
        let k = k.min(d.len());
        let idx = idx % d.len();
        let mut up = d.clone();
        up[idx] += bump;
        for agg in [KnnAggregation::Mean, KnnAggregation::Max] {
            prop_assert!(knn_score(&up, k, agg).unwrap() >= knn_score(&d, k, agg).unwrap());
        }
    }

    #[test]
    fn calibration_accepts_exactly_q(mut g in prop::collection::vec(0.0..100.0f64, 2..20), q in 1usize..20) {
        g.sort_by(f64::total_cmp);
        g.dedup();
        let q = q.min(g.len());
        let cfg = DecisionConfig { q, ..DecisionConfig::default() };
        let t = calibrate_threshold("u", &g, &cfg, ChannelBounds::default()).unwrap();
        let accepted = g.iter().filter(|&&s| authenticate(s, &t).is_accept()).count();
        prop_assert_eq!(accepted, q);
    }

    #[test]
    fn decisions_survive_increasing_transforms(
        g in prop::collection::vec(0.0..50.0f64, 2..15),
        queries in prop::collection::vec(0.0..50.0f64, 1..30),
        q in 1usize..15,
        a in 0.1..5.0f64, p in 0.3..3.0f64, c in -10.0..10.0f64,
    ) {
        let q = q.min(g.len());
        let f = |x: f64| a * x.powf(p) + x.atan() + c;
        let cfg = DecisionConfig { q, ..DecisionConfig::default() };
        let t = calibrate_threshold("u", &g, &cfg, ChannelBounds::default()).unwrap();
        let fg: Vec<f64> = g.iter().map(|&x| f(x)).collect();
        let ft = calibrate_threshold("u", &fg, &cfg, ChannelBounds::default()).unwrap();
        for &s in g.iter().chain(&queries) {
            prop_assert_eq!(authenticate(s, &t), authenticate(f(s), &ft));
        }
    }

    #[test]
    fn eer_in_unit_interval(g in prop::collection::vec(0.0..10.0f64, 1..20), i in prop::collection::vec(0.0..10.0f64, 1..20)) {
        let e = eer(&g, &i).unwrap();
        prop_assert!((0.0..=1.0).contains(&e));
    }
}

fn small_synth(seed: u64) -> Dataset {
    synth_dataset(&SynthParams {
        n_users: 4,
        sessions_per_user: 4,
        length: 60,
        dt: 0.05,
        seed,
        ..SynthParams::default()
    })
    .unwrap()
}

#[test]
fn protocol_ignores_user_labels() {
    let ds = small_synth(3);
    let cfg = DecisionConfig {
        q: 3,
        ..DecisionConfig::default()
    };
    let base = run_protocol(&ds, &cfg, ModeFilter::Both, Channel::Blow).unwrap();
    // reversed names also reverse the sort order of records
    let mut relabelled = ds.clone();
    for r in &mut relabelled.records {
        r.user_id = format!("zz-{}", 100 - r.user_id[4..].parse::<i32>().unwrap());
    }
    let relabelled = Dataset::new(relabelled.records, ds.provenance, ds.preprocess).unwrap();
    let other = run_protocol(&relabelled, &cfg, ModeFilter::Both, Channel::Blow).unwrap();
    assert_eq!(
        (base.eer, base.accuracy, base.far, base.frr),
        (other.eer, other.accuracy, other.far, other.frr)
    );
    assert_eq!(base.counts, other.counts);
}

#[test]
fn protocol_is_reproducible() {
    let ds = small_synth(4);
    let cfg = DecisionConfig {
        q: 2,
        ..DecisionConfig::default()
    };
    let a = run_protocol(&ds, &cfg, ModeFilter::Both, Channel::Blow).unwrap();
    let b = run_protocol(&ds, &cfg, ModeFilter::Both, Channel::Blow).unwrap();
    assert_eq!(a, b);
}

#[test]
fn synthesis_is_reproducible() {
    assert_eq!(small_synth(9), small_synth(9));
    assert_ne!(small_synth(9), small_synth(10));
}

#[test]
fn loading_ignores_row_order() {
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    let dir = tempfile::tempdir().unwrap();
    let ds = small_synth(5);
    let path = dir.path().join("a.csv");
    blowmatch::dataset::save_sessions_csv(&path, &ds.records).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    let (head, body) = lines.split_at_mut(2);
    body.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(1));
    let shuffled = [head.join("\n"), body.join("\n")].join("\n") + "\n";
    let other = dir.path().join("b.csv");
    std::fs::write(&other, shuffled).unwrap();
    let cfg = PreprocessConfig {
        sma_window: 8,
        ..PreprocessConfig::default()
    };
    assert_eq!(
        load_sessions_csv(&path, &cfg).unwrap(),
        load_sessions_csv(&other, &cfg).unwrap()
    );
}
