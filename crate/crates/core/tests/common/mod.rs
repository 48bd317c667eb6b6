//! Independent reference implementations used by the integration and
//! acceptance tests. Everything here is written out longhand and shares no
//! code with the library.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_series(rng: &mut ChaCha8Rng, min_len: usize, max_len: usize, hi: f64) -> Vec<f64> {
    let n = rng.gen_range(min_len..=max_len);
    (0..n).map(|_| rng.gen_range(0.0..hi)).collect()
}

/// Minimum over every monotone warping path from (0,0) to (n-1,m-1) with
/// steps (1,0), (0,1), (1,1), summing `cost(i, j)` along the path.
pub fn brute_force_paths(n: usize, m: usize, cost: &dyn Fn(usize, usize) -> f64) -> f64 {
    fn walk(
        i: usize,
        j: usize,
        n: usize,
        m: usize,
        acc: f64,
        cost: &dyn Fn(usize, usize) -> f64,
        best: &mut f64,
    ) {
        let acc = acc + cost(i, j);
        if i == n - 1 && j == m - 1 {
            if acc < *best {
                *best = acc;
            }
            return;
        }
        if i + 1 < n {
            walk(i + 1, j, n, m, acc, cost, best);
        }
        if j + 1 < m {
            walk(i, j + 1, n, m, acc, cost, best);
        }
        if i + 1 < n && j + 1 < m {
            walk(i + 1, j + 1, n, m, acc, cost, best);
        }
    }
    let mut best = f64::INFINITY;
    walk(0, 0, n, m, 0.0, cost, &mut best);
    best
}

pub fn brute_dtw(x: &[f64], y: &[f64]) -> f64 {
    brute_force_paths(x.len(), y.len(), &|i, j| (x[i] - y[j]).abs())
}

/// Descriptor of point `i`: the centred length-`width` window with replicated
/// edges, then its first differences when `derivative` is set.
pub fn naive_descriptor(x: &[f64], i: usize, width: usize, derivative: bool) -> Vec<f64> {
    let half = width as i64 / 2;
    let mut d = Vec::new();
    for k in -half..=half {
        let p = i as i64 + k;
        let p = if p < 0 {
            0
        } else if p >= x.len() as i64 {
            x.len() - 1
        } else {
            p as usize
        };
        d.push(x[p]);
    }
    if derivative {
        for k in 1..width {
            d.push(d[k] - d[k - 1]);
        }
    }
    d
}

pub fn brute_shape_dtw(x: &[f64], y: &[f64], width: usize, derivative: bool) -> f64 {
    let dx: Vec<Vec<f64>> = (0..x.len())
        .map(|i| naive_descriptor(x, i, width, derivative))
        .collect();
    let dy: Vec<Vec<f64>> = (0..y.len())
        .map(|j| naive_descriptor(y, j, width, derivative))
        .collect();
    brute_force_paths(x.len(), y.len(), &|i, j| {
        let mut s = 0.0;
        for k in 0..dx[i].len() {
            s += (dx[i][k] - dy[j][k]).powi(2);
        }
        s.sqrt()
    })
}

/// Shapelet representation written out straight: five patterns (up, down,
/// peak, valley, flat) over each length-`w` window.
pub fn straight_shapelet_matrix(x: &[f64], w: usize, eps: f64) -> Vec<Vec<f64>> {
    let mut patterns: Vec<Vec<f64>> = Vec::new();
    let up: Vec<f64> = (0..w)
        .map(|k| -1.0 + 2.0 * k as f64 / (w as f64 - 1.0))
        .collect();
    let down: Vec<f64> = up.iter().rev().cloned().collect();
    let peak: Vec<f64> = up.iter().map(|u| 1.0 - u.abs()).collect();
    let valley: Vec<f64> = peak.iter().map(|p| -p).collect();
    for p in [up, down, peak, valley] {
        let mean: f64 = p.iter().sum::<f64>() / w as f64;
        let c: Vec<f64> = p.iter().map(|v| v - mean).collect();
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        patterns.push(c.iter().map(|v| v / norm).collect());
    }
    let mut columns = Vec::new();
    for t in 0..=(x.len() - w) {
        let win = &x[t..t + w];
        let mean: f64 = win.iter().sum::<f64>() / w as f64;
        let c: Vec<f64> = win.iter().map(|v| v - mean).collect();
        let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut col = Vec::new();
        for p in &patterns {
            let dot: f64 = c.iter().zip(p).map(|(a, b)| a * b).sum();
            col.push(dot / (norm + eps));
        }
        col.push(eps / (norm + eps));
        columns.push(col);
    }
    columns
}

/// Full-matrix DTW over shapelet columns.
pub fn straight_dtw_plus_s(x: &[f64], y: &[f64], w: usize, eps: f64) -> f64 {
    let a = straight_shapelet_matrix(x, w, eps);
    let b = straight_shapelet_matrix(y, w, eps);
    let (n, m) = (a.len(), b.len());
    let mut d = vec![vec![f64::INFINITY; m + 1]; n + 1];
    d[0][0] = 0.0;
    for i in 1..=n {
        for j in 1..=m {
            let c: f64 = a[i - 1]
                .iter()
                .zip(&b[j - 1])
                .map(|(p, q)| (p - q).powi(2))
                .sum::<f64>()
                .sqrt();
            d[i][j] = c + d[i - 1][j].min(d[i][j - 1]).min(d[i - 1][j - 1]);
        }
    }
    d[n][m]
}

/// Exhaustive TWED: recursion over every edit sequence (delete in x, delete
/// in y, match), no memoisation. Series get a leading 0 at time 0 and point
/// `i` sits at `i * dt`.
pub fn brute_twed(x: &[f64], y: &[f64], dt: f64, nu: f64, lambda: f64) -> f64 {
    let mut xp = vec![0.0];
    xp.extend_from_slice(x);
    let mut yp = vec![0.0];
    yp.extend_from_slice(y);
    fn go(i: usize, j: usize, x: &[f64], y: &[f64], dt: f64, nu: f64, lambda: f64) -> f64 {
        if i == 0 && j == 0 {
            return 0.0;
        }
        if i == 0 || j == 0 {
            return f64::INFINITY;
        }
        let t = |k: usize| k as f64 * dt;
        let del_x = go(i - 1, j, x, y, dt, nu, lambda) + (x[i] - x[i - 1]).abs() + nu * dt + lambda;
        let del_y = go(i, j - 1, x, y, dt, nu, lambda) + (y[j] - y[j - 1]).abs() + nu * dt + lambda;
        let mat = go(i - 1, j - 1, x, y, dt, nu, lambda)
            + (x[i] - y[j]).abs()
            + (x[i - 1] - y[j - 1]).abs()
            + nu * ((t(i) - t(j)).abs() + (t(i - 1) - t(j - 1)).abs());
        del_x.min(del_y).min(mat)
    }
    go(x.len(), y.len(), &xp, &yp, dt, nu, lambda)
}

/// SBD by materialising each zero-padded shifted copy of `y`.
pub fn brute_sbd(x: &[f64], y: &[f64]) -> f64 {
    let nx = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let ny = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    let len = x.len().max(y.len());
    let mut xs = x.to_vec();
    xs.resize(len, 0.0);
    let mut best = f64::NEG_INFINITY;
    for s in -(y.len() as i64 - 1)..=(x.len() as i64 - 1) {
        let mut shifted = vec![0.0; len];
        for (k, v) in y.iter().enumerate() {
            let p = k as i64 + s;
            if p >= 0 && (p as usize) < len {
                shifted[p as usize] = *v;
            }
        }
        let cc: f64 = xs.iter().zip(&shifted).map(|(a, b)| a * b).sum();
        best = best.max(cc / (nx * ny));
    }
    (1.0 - best).clamp(0.0, 2.0)
}

/// EER by trying every threshold in {-inf} and the observed scores; a score
/// is accepted when it is at most the threshold.
pub fn brute_eer(genuine: &[f64], impostor: &[f64]) -> f64 {
    let mut candidates = vec![f64::NEG_INFINITY];
    candidates.extend_from_slice(genuine);
    candidates.extend_from_slice(impostor);
    let mut best = f64::INFINITY;
    for t in candidates {
        let fa = impostor.iter().filter(|&&s| s <= t).count() as f64 / impostor.len() as f64;
        let fr = genuine.iter().filter(|&&s| s > t).count() as f64 / genuine.len() as f64;
        best = best.min(fa.max(fr));
    }
    best
}
