//! Euclidean projections onto the probability simplex and onto the simplex
//! cut by one linear cost constraint, plus linear maximization over the
//! latter.

/// Projection onto `{p >= 0, sum p = 1}` by the sort-and-threshold rule.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &s) in sorted.iter().enumerate() {
        cumulative += s;
        let t = (cumulative - 1.0) / (k + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    let mut p: Vec<f64> = v.iter().map(|&x| (x - theta).max(0.0)).collect();
    let sum: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= sum);
    p
}

/// In-place simplex projection of every `width`-sized row of `v`.
pub fn project_rows(v: &mut [f64], width: usize) {
    for row in v.chunks_mut(width) {
        let p = project_simplex(row);
        row.copy_from_slice(&p);
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Projection onto `{p in simplex : cost·p <= budget}`.
///
/// The projection is `project_simplex(v - mu * cost)` for the smallest
/// `mu >= 0` that makes it feasible; `mu` is found by bisection. Returns
/// `None` when the set is empty.
pub fn project_polytope(v: &[f64], cost: &[f64], budget: f64) -> Option<Vec<f64>> {
    let slack = crate::sensing::FEASIBILITY_SLACK;
    let min_cost = cost.iter().copied().fold(f64::INFINITY, f64::min);
    if budget < min_cost - slack {
        return None;
    }
    let p = project_simplex(v);
    if dot(&p, cost) <= budget + slack {
        return Some(p);
    }
    if budget <= min_cost + slack {
        // Only the cheapest symbols remain.
        let keep: Vec<usize> = (0..cost.len()).filter(|&i| cost[i] <= min_cost + slack).collect();
        let sub: Vec<f64> = keep.iter().map(|&i| v[i]).collect();
        let q = project_simplex(&sub);
        let mut out = vec![0.0; v.len()];
        for (&i, &x) in keep.iter().zip(&q) {
            out[i] = x;
        }
        return Some(out);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while dot(&project_simplex(&shifted(v, cost, hi)), cost) > budget {
        hi *= 2.0;
        if hi > 1e15 {
            break;
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if dot(&project_simplex(&shifted(v, cost, mid)), cost) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(project_simplex(&shifted(v, cost, hi)))
}

fn shifted(v: &[f64], cost: &[f64], mu: f64) -> Vec<f64> {
    v.iter().zip(cost).map(|(a, c)| a - mu * c).collect()
}

/// Vertices of `{p in simplex : cost·p <= budget}`: feasible unit vectors
/// and the budget-spending mixtures of a cheap and an expensive symbol.
pub fn polytope_vertices(cost: &[f64], budget: f64) -> Vec<Vec<f64>> {
    let n = cost.len();
    let mut out = Vec::new();
    for i in 0..n {
        if cost[i] <= budget + crate::sensing::FEASIBILITY_SLACK {
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            out.push(e);
        }
    }
    for i in 0..n {
        for j in 0..n {
            if cost[i] < budget && cost[j] > budget {
                let t = (cost[j] - budget) / (cost[j] - cost[i]);
                let mut v = vec![0.0; n];
                v[i] = t;
                v[j] = 1.0 - t;
                out.push(v);
            }
        }
    }
    out
}

/// `max g·p` over the cost-cut simplex, `None` if it is empty.
pub fn maximize_linear(g: &[f64], cost: &[f64], budget: f64) -> Option<f64> {
    polytope_vertices(cost, budget)
        .iter()
        .map(|v| dot(g, v))
        .max_by(|a, b| a.total_cmp(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simplex_projection_fixes_points_of_the_simplex() {
        let p = vec![0.2, 0.3, 0.5];
        let q = project_simplex(&p);
        for (a, b) in p.iter().zip(&q) {
            assert!((a - b).abs() < 1e-15);
        }
        let r = project_simplex(&[2.0, 0.0, -1.0]);
        assert_eq!(r, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn polytope_projection_spends_budget() {
        let p = project_polytope(&[0.5, 0.5], &[0.2, 0.1], 0.12).unwrap();
        assert!((dot(&p, &[0.2, 0.1]) - 0.12).abs() < 1e-12);
        assert!((p[0] - 0.2).abs() < 1e-9);
        assert!(project_polytope(&[0.5, 0.5], &[0.2, 0.1], 0.05).is_none());
        let corner = project_polytope(&[0.9, 0.1], &[0.2, 0.1], 0.1).unwrap();
        assert_eq!(corner, vec![0.0, 1.0]);
    }

    #[test]
    fn vertices_and_linear_max() {
        let v = polytope_vertices(&[0.2, 0.1], 0.15);
        assert_eq!(v.len(), 2);
        let best = maximize_linear(&[1.0, 0.0], &[0.2, 0.1], 0.15).unwrap();
        assert!((best - 0.5).abs() < 1e-12);
    }
}
