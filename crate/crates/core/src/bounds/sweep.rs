//! All four bounds and both time-sharing curves over a distortion grid.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::{BoundContext, BoundKind, BoundResult, SolverConfig, TsCurve};
use crate::error::{Error, Result};
use crate::prob::Pmf;
use crate::sensing::{dstar_dist, feasible_symbols, FEASIBILITY_SLACK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub d: f64,
    pub rif_lower: f64,
    pub rif_upper: f64,
    pub dif_lower: f64,
    pub dif_upper: f64,
    pub ts_lower: f64,
    pub ts_upper: f64,
    pub feasible: bool,
    /// True when either lower-bound solve carried the suboptimality flag.
    pub possibly_suboptimal: bool,
}

/// Full sweep output: table rows, per-point results and the TS curves.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Sweep {
    pub rows: Vec<SweepRow>,
    pub results: Vec<[BoundResult; 4]>,
    pub ts_lower: TsCurve,
    pub ts_upper: TsCurve,
}

fn at_budget(r: &BoundResult, d: f64) -> BoundResult {
    BoundResult { budget: d, ..r.clone() }
}

/// Keeps the previous witness when a fresh solve is worse; feasible sets
/// only grow along an ascending grid, so it remains admissible.
fn monotone(fresh: BoundResult, prev: Option<&BoundResult>) -> BoundResult {
    match prev {
        Some(p) if p.feasible && p.value > fresh.value => BoundResult {
            budget: fresh.budget,
            gate: fresh.gate,
            ..p.clone()
        },
        _ => fresh,
    }
}

/// The identification witness mixed with the sensing symbol so that the
/// expected distortion equals `d`.
fn ts_seed(ctx: &BoundContext, ident: &BoundResult, d: f64) -> Option<BoundResult> {
    let px = ident.witness_px.as_ref()?;
    let est = ctx.estimator();
    let sense = est.min_dstar();
    let d_id = dstar_dist(est, px);
    if !(d_id > sense) || d >= d_id {
        return None;
    }
    let alpha = ((d - sense) / (d_id - sense)).clamp(0.0, 1.0);
    let delta = Pmf::point_mass(px.support().clone(), est.sensing_symbol()).ok()?;
    Some(BoundResult {
        witness_px: Some(px.mix(&delta, alpha).ok()?),
        ..ident.clone()
    })
}

/// Evaluates every bound at each grid point in ascending order.
///
/// Lower bounds are warm-started from the previous grid point and from the
/// saturated solution, identical feasible symbol sets share one DIF solve,
/// and every budget at or above `max_x d*(x)` shares one saturated solve.
pub fn sweep_bounds(ctx: &BoundContext, grid: &[f64], cfg: &SolverConfig) -> Result<Sweep> {
    if grid.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::InvalidParameter("distortion grid must be sorted ascending".into()));
    }
    cfg.validate()?;
    let full = ctx.estimator().max_dstar();
    let (id_lower, id_upper) = (ctx.rif_lower(full, cfg)?, ctx.rif_upper(full, cfg)?);
    let id_dist = id_lower.witness_px.as_ref().map(|p| dstar_dist(ctx.estimator(), p));
    let mut dif_cache: HashMap<Vec<usize>, (BoundResult, BoundResult)> = HashMap::new();
    let mut prev: Option<[BoundResult; 4]> = None;
    let mut results = Vec::with_capacity(grid.len());
    for &d in grid {
        let xs = feasible_symbols(ctx.estimator(), d);
        let (dl, du) = match dif_cache.get(&xs) {
            Some((l, u)) => (at_budget(l, d), at_budget(u, d)),
            None => {
                let warm = prev.as_ref().map(|p| &p[0]);
                let l = ctx.dif_lower_warm(d, cfg, warm)?;
                let u = ctx.dif_upper(d, cfg)?;
                dif_cache.insert(xs, (l.clone(), u.clone()));
                (l, u)
            }
        };
        let (rl, ru) = if d >= full {
            (at_budget(&id_lower, d), at_budget(&id_upper, d))
        } else {
            let seed = ts_seed(ctx, &id_lower, d);
            let mut warm: Vec<&BoundResult> = prev.iter().map(|p| &p[2]).collect();
            warm.extend(seed.as_ref());
            if id_dist.is_some_and(|di| di <= d + FEASIBILITY_SLACK) {
                warm.push(&id_lower);
            }
            (ctx.rif_lower_warm(d, cfg, &warm)?, ctx.rif_upper(d, cfg)?)
        };
        let row = [
            monotone(dl, prev.as_ref().map(|p| &p[0])),
            du,
            monotone(rl, prev.as_ref().map(|p| &p[2])),
            ru,
        ];
        prev = Some(row.clone());
        results.push(row);
    }
    let ts_lower = ctx.time_sharing_from(BoundKind::RifLower, &id_lower, grid);
    let ts_upper = ctx.time_sharing_from(BoundKind::RifUpper, &id_upper, grid);
    let rows = results
        .iter()
        .zip(ts_lower.points.iter().zip(&ts_upper.points))
        .map(|(r, (tl, tu))| SweepRow {
            d: r[0].budget,
            dif_lower: r[0].value,
            dif_upper: r[1].value,
            rif_lower: r[2].value,
            rif_upper: r[3].value,
            ts_lower: tl.rate,
            ts_upper: tu.rate,
            feasible: r[3].feasible,
            possibly_suboptimal: r[0].possibly_suboptimal || r[2].possibly_suboptimal,
        })
        .collect();
    Ok(Sweep {
        rows,
        results,
        ts_lower,
        ts_upper,
    })
}
