//! Dense Weiszfeld iteration for the geometric median of quantile
//! vectors under d(x, y) = sqrt(mean_j (x_j - y_j)^2), which is the 1-D
//! 2-Wasserstein distance of the measures the vectors encode.

fn dist(x: &[f64], y: &[f64]) -> f64 {
    let k = x.len() as f64;
    let sum: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    (sum / k).sqrt()
}

/// Weighted geometric median of `points`. Plain Weiszfeld with a vertex
/// optimality check when the iterate lands on an input point.
pub fn weiszfeld_median(points: &[Vec<f64>], weights: &[f64]) -> Vec<f64> {
    assert!(!points.is_empty() && points.len() == weights.len());
    let k = points[0].len();
    assert!(points.iter().all(|p| p.len() == k));

    let mut scale = 0.0_f64;
    for i in 0..points.len() {
        for j in (i + 1)..points.len() {
            scale = scale.max(dist(&points[i], &points[j]));
        }
    }
    if scale == 0.0 {
        return points[0].clone();
    }

    // Start at the weighted mean.
    let wsum: f64 = weights.iter().sum();
    let mut x = vec![0.0; k];
    for (p, &w) in points.iter().zip(weights) {
        for (xi, &pi) in x.iter_mut().zip(p) {
            *xi += w / wsum * pi;
        }
    }

    for _ in 0..1_000_000 {
        let ds: Vec<f64> = points.iter().map(|p| dist(&x, p)).collect();
        if let Some(hit) = ds.iter().position(|&d| d <= 1e-13 * scale) {
            // Vertex rule: the point is the median when the pull of the
            // others does not exceed its own weight.
            let mut pull = vec![0.0; k];
            for (n, p) in points.iter().enumerate() {
                if n == hit {
                    continue;
                }
                for (g, (&pi, &xi)) in pull.iter_mut().zip(p.iter().zip(&points[hit])) {
                    *g += weights[n] * (pi - xi) / ds[n];
                }
            }
            let pull_norm = dist(&pull, &vec![0.0; k]);
            if pull_norm <= weights[hit] {
                return points[hit].clone();
            }
            // Step off the vertex along the pull and keep iterating.
            for (xi, g) in x.iter_mut().zip(&pull) {
                *xi += 1e-9 * scale * g / pull_norm;
            }
            continue;
        }
        let mut numer = vec![0.0; k];
        let mut denom = 0.0;
        for ((p, &w), &d) in points.iter().zip(weights).zip(&ds) {
            let c = w / d;
            denom += c;
            for (ni, &pi) in numer.iter_mut().zip(p) {
                *ni += c * pi;
            }
        }
        for ni in numer.iter_mut() {
            *ni /= denom;
        }
        let step = dist(&numer, &x);
        x = numer;
        if step <= 1e-12 * scale {
            break;
        }
    }
    x
}
