//! Exact transportation LP between small-support grid measures, solved by
//! successive shortest paths on the bipartite support graph (Dijkstra with
//! Johnson potentials). Independent of the entropic solver on purpose: the
//! two validate each other in the test suites.

use crate::measures::GridMeasure;
use crate::{Error, Result};

/// Support-size guard per side; the LP is a test and benchmark oracle, not
/// a large-scale solver.
const MAX_SUPPORT: usize = 64;

/// Exact W2 between grid measures with small supports.
pub fn exact_lp_w2(a: &GridMeasure, b: &GridMeasure) -> Result<f64> {
    if a.rank() != b.rank() {
        return Err(Error::invalid(format!(
            "exact_lp_w2: grid ranks differ ({} vs {})",
            a.rank(),
            b.rank()
        )));
    }
    let (pa, xa) = support_points(a);
    let (pb, xb) = support_points(b);
    for (name, len) in [("first", pa.len()), ("second", pb.len())] {
        if len > MAX_SUPPORT {
            return Err(Error::invalid(format!(
                "exact_lp_w2: support of {name} measure has {len} bins, guard is {MAX_SUPPORT}"
            )));
        }
    }
    let m = pa.len();
    let n = pb.len();
    let mut cost = vec![0.0; m * n];
    for i in 0..m {
        for j in 0..n {
            let dx = xa[i][0] - xb[j][0];
            let dy = xa[i][1] - xb[j][1];
            cost[i * n + j] = dx * dx + dy * dy;
        }
    }
    let total = min_cost_transport(&pa, &pb, &cost)?;
    Ok(total.max(0.0).sqrt())
}

/// Positive-mass cells with their coordinates, padded to 2-D.
fn support_points(m: &GridMeasure) -> (Vec<f64>, Vec<[f64; 2]>) {
    let mut mass = Vec::new();
    let mut pts = Vec::new();
    match m.rank() {
        1 => {
            let xs = &m.coordinates()[0];
            for (i, &p) in m.mass().iter().enumerate() {
                if p > 0.0 {
                    mass.push(p);
                    pts.push([xs[i], 0.0]);
                }
            }
        }
        _ => {
            let rows = &m.coordinates()[0];
            let cols = &m.coordinates()[1];
            let w = cols.len();
            for (idx, &p) in m.mass().iter().enumerate() {
                if p > 0.0 {
                    mass.push(p);
                    pts.push([rows[idx / w], cols[idx % w]]);
                }
            }
        }
    }
    (mass, pts)
}

/// Minimum-cost transport between supply and demand (both summing to the
/// same total) over a dense cost matrix `cost[i * n + j]`. Exact up to
/// floating-point rounding.
pub(crate) fn min_cost_transport(supply: &[f64], demand: &[f64], cost: &[f64]) -> Result<f64> {
    let m = supply.len();
    let n = demand.len();
    if m == 0 || n == 0 {
        return Err(Error::invalid("transport: empty support"));
    }
    let mut s = supply.to_vec();
    let mut d = demand.to_vec();
    let total_s: f64 = s.iter().sum();
    let total_d: f64 = d.iter().sum();
    if total_s <= 0.0 || total_d <= 0.0 {
        return Err(Error::invalid("transport: zero total mass"));
    }
    // Balance rounding-level mismatch between the two totals.
    let scale = total_s / total_d;
    for v in d.iter_mut() {
        *v *= scale;
    }

    let nodes = m + n;
    let mut flow = vec![0.0; m * n];
    let mut pot = vec![0.0; nodes]; // sources 0..m, sinks m..m+n
    let mut dist = vec![0.0; nodes];
    let mut parent = vec![usize::MAX; nodes];
    let mut done = vec![false; nodes];

    let max_augmentations = 64 * (m + n) * (m + n);
    let mut augmentations = 0;
    loop {
        let remaining: f64 = s.iter().sum();
        if remaining <= 1e-13 * total_s.max(1.0) {
            break;
        }
        augmentations += 1;
        if augmentations > max_augmentations {
            return Err(Error::Convergence {
                what: "transport LP",
                iterations: augmentations,
                residual: remaining,
                tolerance: 1e-13,
            });
        }

        // Multi-source Dijkstra over the residual graph.
        for u in 0..nodes {
            dist[u] = f64::INFINITY;
            parent[u] = usize::MAX;
            done[u] = false;
        }
        for (i, &si) in s.iter().enumerate() {
            if si > 0.0 {
                dist[i] = 0.0;
            }
        }
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..nodes {
                if !done[v] && dist[v] < best {
                    best = dist[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u < m {
                // forward arcs i -> j
                for j in 0..n {
                    let v = m + j;
                    if done[v] {
                        continue;
                    }
                    let rc = (cost[u * n + j] + pot[u] - pot[v]).max(0.0);
                    if dist[u] + rc < dist[v] {
                        dist[v] = dist[u] + rc;
                        parent[v] = u;
                    }
                }
            } else {
                // residual arcs j -> i along existing flow
                let j = u - m;
                for i in 0..m {
                    if done[i] || flow[i * n + j] <= 0.0 {
                        continue;
                    }
                    let rc = (pot[u] - pot[i] - cost[i * n + j]).max(0.0);
                    if dist[u] + rc < dist[i] {
                        dist[i] = dist[u] + rc;
                        parent[i] = u;
                    }
                }
            }
        }

        let mut target = usize::MAX;
        let mut best = f64::INFINITY;
        for (j, &dj) in d.iter().enumerate() {
            if dj > 0.0 && dist[m + j] < best {
                best = dist[m + j];
                target = m + j;
            }
        }
        if target == usize::MAX {
            return Err(Error::Convergence {
                what: "transport LP",
                iterations: augmentations,
                residual: remaining,
                tolerance: 1e-13,
            });
        }

        let reach = dist[target];
        for u in 0..nodes {
            pot[u] += dist[u].min(reach);
        }

        // Walk back to the source, collecting the bottleneck.
        let mut bottleneck = d[target - m];
        let mut u = target;
        while parent[u] != usize::MAX {
            let p = parent[u];
            if u >= m {
                // arc p(source) -> u(sink): uncapacitated
            } else {
                // residual arc p(sink) -> u(source), capacity = flow[u][p-m]
                bottleneck = bottleneck.min(flow[u * n + (p - m)]);
            }
            u = p;
        }
        let src = u;
        bottleneck = bottleneck.min(s[src]);

        let delta = bottleneck;
        let mut v = target;
        while parent[v] != usize::MAX {
            let p = parent[v];
            if v >= m {
                flow[p * n + (v - m)] += delta;
            } else {
                flow[v * n + (p - m)] -= delta;
            }
            v = p;
        }
        s[src] -= delta;
        d[target - m] -= delta;
    }

    let mut total = 0.0;
    for i in 0..m {
        for j in 0..n {
            total += flow[i * n + j] * cost[i * n + j];
        }
    }
    Ok(total)
}
