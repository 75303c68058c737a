//! Exhaustive zoom search for the Wasserstein median of 2x2 covariance
//! matrices over the (a, b, c) parameterization of [[a, c], [c, b]].
//!
//! The search relies only on the 2x2 closed form
//! tr((A^1/2 B A^1/2)^1/2) = sqrt(tr(AB) + 2 sqrt(det A det B)),
//! so it shares nothing with an eigendecomposition-based implementation.

/// W2 between centered Gaussians with 2x2 covariances given as (a, b, c).
pub fn w2_2x2(s: [f64; 3], t: [f64; 3]) -> f64 {
    let tr_s = s[0] + s[1];
    let tr_t = t[0] + t[1];
    let tr_st = s[0] * t[0] + s[1] * t[1] + 2.0 * s[2] * t[2];
    let det_s = s[0] * s[1] - s[2] * s[2];
    let det_t = t[0] * t[1] - t[2] * t[2];
    let cross = (tr_st + 2.0 * (det_s * det_t).max(0.0).sqrt()).max(0.0).sqrt();
    (tr_s + tr_t - 2.0 * cross).max(0.0).sqrt()
}

fn objective(s: [f64; 3], inputs: &[[f64; 3]], weights: &[f64]) -> f64 {
    if s[0] <= 0.0 || s[1] <= 0.0 || s[0] * s[1] - s[2] * s[2] <= 0.0 {
        return f64::INFINITY;
    }
    inputs
        .iter()
        .zip(weights)
        .map(|(t, &w)| w * w2_2x2(s, *t))
        .sum()
}

const POINTS: usize = 21;

/// Weighted Wasserstein median of 2x2 covariances by grid search with
/// iterative zoom: 21 points per axis, the box shrinks around the argmin
/// and expands when the argmin sits on its boundary. Resolves the
/// minimizer to about 1e-7 per entry.
pub fn gaussian_median_2x2(inputs: &[[f64; 3]], weights: &[f64]) -> [f64; 3] {
    assert!(!inputs.is_empty() && inputs.len() == weights.len());
    let diag_min = inputs
        .iter()
        .fold(f64::INFINITY, |m, t| m.min(t[0]).min(t[1]));
    let diag_max = inputs.iter().fold(0.0_f64, |m, t| m.max(t[0]).max(t[1]));
    let c_bound = 1.2 * diag_max;
    let mut lo = [0.4 * diag_min, 0.4 * diag_min, -c_bound];
    let mut hi = [1.6 * diag_max, 1.6 * diag_max, c_bound];

    let mut expansions = 0;
    loop {
        let steps = [
            (hi[0] - lo[0]) / (POINTS - 1) as f64,
            (hi[1] - lo[1]) / (POINTS - 1) as f64,
            (hi[2] - lo[2]) / (POINTS - 1) as f64,
        ];
        let mut best = f64::INFINITY;
        let mut arg = [0usize; 3];
        for ia in 0..POINTS {
            for ib in 0..POINTS {
                for ic in 0..POINTS {
                    let s = [
                        lo[0] + steps[0] * ia as f64,
                        lo[1] + steps[1] * ib as f64,
                        lo[2] + steps[2] * ic as f64,
                    ];
                    let f = objective(s, inputs, weights);
                    if f < best {
                        best = f;
                        arg = [ia, ib, ic];
                    }
                }
            }
        }
        assert!(best.is_finite(), "no positive definite point in the box");

        let mut on_boundary = false;
        for axis in 0..3 {
            if arg[axis] == 0 || arg[axis] == POINTS - 1 {
                on_boundary = true;
                let width = hi[axis] - lo[axis];
                lo[axis] -= 0.5 * width;
                hi[axis] += 0.5 * width;
            }
        }
        if on_boundary {
            expansions += 1;
            assert!(expansions <= 60, "zoom search keeps hitting the boundary");
            continue;
        }

        let center = [
            lo[0] + steps[0] * arg[0] as f64,
            lo[1] + steps[1] * arg[1] as f64,
            lo[2] + steps[2] * arg[2] as f64,
        ];
        if steps.iter().all(|&s| s <= 2e-8) {
            return center;
        }
        for axis in 0..3 {
            lo[axis] = center[axis] - 2.0 * steps[axis];
            hi[axis] = center[axis] + 2.0 * steps[axis];
        }
    }
}
