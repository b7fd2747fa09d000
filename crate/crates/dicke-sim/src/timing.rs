//! Extremal-time extraction and analysis: when each tracked quantity
//! first peaks (or dips), how those times order, how the coherence peak
//! time scales with system size, and where in coupling strength the
//! witness first turns negative.

use std::collections::BTreeMap;

use crate::backend::{run_trajectory, Backend};
use crate::error::{Error, ExtremumKind, Result};
use crate::liouvillian::ModelParams;
use crate::observables::Quantity;
use crate::propagator::{EvolveOptions, TimeGrid, TrajectoryResult};

/// First interior extremum of one series, refined off-grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremumRecord {
    pub quantity: Quantity,
    pub kind: ExtremumKind,
    /// Refined extremum time.
    pub tau: f64,
    /// Parabolically interpolated value at `tau`.
    pub value: f64,
    /// Grid index of the discrete extremum the refinement started from.
    pub grid_index: usize,
}

/// The extremum kind each quantity is tracked at: coherence and emission
/// peak, the witness and correlated dephasing dip.
pub fn extremum_kind_for(q: Quantity) -> Option<ExtremumKind> {
    match q {
        Quantity::CRel | Quantity::C0Re => Some(ExtremumKind::Max),
        Quantity::W | Quantity::Czz => Some(ExtremumKind::Min),
        Quantity::C0Im | Quantity::S => None,
    }
}

/// Quantities whose extremal times the experiments track, in the
/// conjectured temporal order.
pub const HIERARCHY: [Quantity; 3] = [Quantity::CRel, Quantity::C0Re, Quantity::W];

/// Locate the first interior extremum of the requested kind and refine
/// its position by a parabola through the three bracketing points.
pub fn find_extremum(
    times: &[f64],
    values: &[f64],
    kind: ExtremumKind,
    quantity: Quantity,
) -> Result<ExtremumRecord> {
    if times.len() != values.len() || times.len() < 3 {
        return Err(Error::Domain(format!(
            "find_extremum needs >= 3 aligned points, got {} times / {} values",
            times.len(),
            values.len()
        )));
    }
    let better = |a: f64, b: f64| match kind {
        ExtremumKind::Max => a > b,
        ExtremumKind::Min => a < b,
    };
    let better_eq = |a: f64, b: f64| match kind {
        ExtremumKind::Max => a >= b,
        ExtremumKind::Min => a <= b,
    };

    for i in 1..values.len() - 1 {
        let (v0, v1, v2) = (values[i - 1], values[i], values[i + 1]);
        let hit = (better(v1, v0) && better_eq(v1, v2)) || (better_eq(v1, v0) && better(v1, v2));
        if !hit {
            continue;
        }
        let dt = times[i] - times[i - 1];
        let denom = v2 - 2.0 * v1 + v0;
        let (tau, value) = if denom == 0.0 {
            (times[i], v1)
        } else {
            let x = ((v0 - v2) / (2.0 * denom)).clamp(-1.0, 1.0);
            (times[i] + x * dt, v1 - (v2 - v0).powi(2) / (8.0 * denom))
        };
        return Ok(ExtremumRecord {
            quantity,
            kind,
            tau,
            value,
            grid_index: i,
        });
    }

    if values.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::DegenerateExtremum {
            quantity: quantity.to_string(),
        });
    }
    let last = values.len() - 1;
    let boundary_index = if better(values[0], values[last]) { 0 } else { last };
    Err(Error::NoExtremum {
        quantity: quantity.to_string(),
        kind,
        boundary_index,
    })
}

/// One adjacent pair of the conjectured chain τ_Crel ≤ τ_C0 ≤ τ_W (≤ τ_Czz).
#[derive(Debug, Clone, Copy)]
pub struct ChainCheck {
    pub earlier: Quantity,
    pub later: Quantity,
    pub tau_earlier: f64,
    pub tau_later: f64,
    /// Whether τ_earlier ≤ τ_later within the tie tolerance.
    pub holds: bool,
}

/// Extremal times sorted by τ plus the per-pair hierarchy verdicts.
#[derive(Debug, Clone)]
pub struct OrderingReport {
    pub sorted: Vec<ExtremumRecord>,
    pub chain: Vec<ChainCheck>,
    pub tie_tolerance: f64,
}

impl OrderingReport {
    pub fn all_hold(&self) -> bool {
        self.chain.iter().all(|c| c.holds)
    }
}

/// Sort records by τ and check the conjectured chain with a tie tolerance
/// of two grid steps (equality cannot be asserted tighter than the grid).
pub fn extremum_ordering(
    records: &BTreeMap<Quantity, ExtremumRecord>,
    grid_step: f64,
) -> Result<OrderingReport> {
    for q in HIERARCHY {
        if !records.contains_key(&q) {
            return Err(Error::Domain(format!("extremum_ordering: missing record for {q}")));
        }
    }
    let tie_tolerance = 2.0 * grid_step;

    let mut sorted: Vec<ExtremumRecord> = records.values().copied().collect();
    sorted.sort_by(|a, b| a.tau.total_cmp(&b.tau));

    let chain_quantities: Vec<Quantity> = HIERARCHY
        .into_iter()
        .chain(records.contains_key(&Quantity::Czz).then_some(Quantity::Czz))
        .collect();
    let chain = chain_quantities
        .windows(2)
        .map(|w| {
            let a = records[&w[0]];
            let b = records[&w[1]];
            ChainCheck {
                earlier: w[0],
                later: w[1],
                tau_earlier: a.tau,
                tau_later: b.tau,
                holds: a.tau <= b.tau + tie_tolerance,
            }
        })
        .collect();

    Ok(OrderingReport {
        sorted,
        chain,
        tie_tolerance,
    })
}

/// Least-squares fit of τ(N) = prefactor · ln(N) / N^α, linear in log
/// space: ln τ − ln ln N = ln(prefactor) − α ln N.
#[derive(Debug, Clone)]
pub struct ScalingFit {
    pub alpha: f64,
    pub prefactor: f64,
    /// RMS residual in log space.
    pub residual: f64,
    pub n_values: Vec<usize>,
}

pub fn fit_alpha(ns: &[usize], taus: &[f64]) -> Result<ScalingFit> {
    if ns.len() != taus.len() {
        return Err(Error::Domain("fit_alpha: ns and taus differ in length".into()));
    }
    if ns.len() < 3 {
        return Err(Error::Domain(format!(
            "fit_alpha needs >= 3 points, got {}",
            ns.len()
        )));
    }
    for &n in ns {
        if n < 2 {
            return Err(Error::Domain(format!(
                "fit_alpha: ln ln N undefined for N = {n}; need N >= 2"
            )));
        }
    }
    for &tau in taus {
        if !(tau > 0.0) {
            return Err(Error::Domain(format!("fit_alpha: tau must be > 0, got {tau}")));
        }
    }

    let pts: Vec<(f64, f64)> = ns
        .iter()
        .zip(taus)
        .map(|(&n, &tau)| {
            let x = (n as f64).ln();
            (x, tau.ln() - x.ln())
        })
        .collect();
    let m = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let det = m * sxx - sx * sx;
    if det.abs() < 1e-12 {
        return Err(Error::Domain("fit_alpha: degenerate N values".into()));
    }
    let slope = (m * sxy - sx * sy) / det;
    let intercept = (sy * sxx - sx * sxy) / det;
    let residual = (pts
        .iter()
        .map(|&(x, y)| (y - (intercept + slope * x)).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();

    Ok(ScalingFit {
        alpha: -slope,
        prefactor: intercept.exp(),
        residual,
        n_values: ns.to_vec(),
    })
}

/// Time gaps of the emission peak and witness dip behind the coherence
/// peak, per coupling strength.
#[derive(Debug, Clone, Copy)]
pub struct GapRecord {
    pub g: f64,
    /// τ_C0 − τ_Crel.
    pub tau_cw: f64,
    /// τ_W − τ_Crel.
    pub tau_ew: f64,
}

/// One sweep point: gaps, or the reason they could not be extracted.
#[derive(Debug, Clone)]
pub enum GapOutcome {
    Ok(GapRecord),
    Missing { g: f64, reason: String },
}

/// How far the horizon may be stretched hunting for extrema: doubling the
/// configured t_max up to this factor.
pub const MAX_HORIZON_DOUBLINGS: u32 = 3;

/// Run a trajectory and extract the requested extrema, doubling the time
/// horizon (at fixed grid spacing) when a series is still monotone at the
/// end of the window.
pub fn evolve_until_extrema(
    params: &ModelParams,
    grid: &TimeGrid,
    backend: Backend,
    opts: &EvolveOptions,
    quantities: &[Quantity],
) -> Result<(TrajectoryResult, BTreeMap<Quantity, ExtremumRecord>, TimeGrid)> {
    let mut current = *grid;
    for attempt in 0..=MAX_HORIZON_DOUBLINGS {
        let result = run_trajectory(params, &current, backend, opts)?;
        let mut records = BTreeMap::new();
        let mut missing: Option<Error> = None;
        for &q in quantities {
            let kind = extremum_kind_for(q).ok_or_else(|| {
                Error::Domain(format!("{q} has no designated extremum kind"))
            })?;
            let series = result
                .get(q)
                .ok_or_else(|| Error::Domain(format!("trajectory has no series for {q}")))?;
            match find_extremum(&result.times, series, kind, q) {
                Ok(rec) => {
                    records.insert(q, rec);
                }
                Err(e @ Error::NoExtremum { .. }) => {
                    missing = Some(e);
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        match missing {
            None => return Ok((result, records, current)),
            Some(e) => {
                if attempt == MAX_HORIZON_DOUBLINGS {
                    return Err(e);
                }
                // double the horizon at fixed spacing
                current = TimeGrid {
                    t_max: current.t_max * 2.0,
                    n_points: (current.n_points - 1) * 2 + 1,
                };
            }
        }
    }
    unreachable!("loop returns or errors before exhausting attempts");
}

/// Result of the coupling-threshold bisection.
#[derive(Debug, Clone, Copy)]
pub struct ThresholdResult {
    pub g_w: f64,
    pub bracket: (f64, f64),
    /// Midpoint trajectory evaluations spent by the bisection.
    pub evaluations: usize,
}

/// Bisection tolerance on g for the witness-negativity threshold.
pub const GW_TOL: f64 = 1e-3;

/// Smallest coupling at which min_t ⟨W⟩(t; g) dips below zero, located by
/// bisection over [g_lo, g_hi].
pub fn find_gw(
    params_template: &ModelParams,
    g_lo: f64,
    g_hi: f64,
    grid: &TimeGrid,
    backend: Backend,
    opts: &EvolveOptions,
) -> Result<ThresholdResult> {
    if !(g_lo > 0.0) || !(g_hi > g_lo) {
        return Err(Error::Domain(format!(
            "find_gw: need 0 < g_lo < g_hi, got [{g_lo}, {g_hi}]"
        )));
    }
    let detects = |g: f64| -> Result<bool> {
        let params = ModelParams {
            g,
            ..params_template.clone()
        };
        // A negative sample anywhere settles the predicate; otherwise the
        // witness minimum must be interior to count as covered.
        let mut current = *grid;
        for attempt in 0..=MAX_HORIZON_DOUBLINGS {
            let result = run_trajectory(&params, &current, backend, opts)?;
            let w = result
                .get(Quantity::W)
                .ok_or_else(|| Error::Domain("trajectory has no witness series".into()))?;
            let min = w.iter().copied().fold(f64::INFINITY, f64::min);
            if min < 0.0 {
                return Ok(true);
            }
            match find_extremum(&result.times, w, ExtremumKind::Min, Quantity::W) {
                Ok(_) => return Ok(false),
                Err(Error::NoExtremum { boundary_index, .. })
                    if boundary_index + 1 == result.times.len() && attempt < MAX_HORIZON_DOUBLINGS =>
                {
                    current = TimeGrid {
                        t_max: current.t_max * 2.0,
                        n_points: (current.n_points - 1) * 2 + 1,
                    };
                }
                Err(e) => return Err(e),
            }
        }
        unreachable!("horizon loop returns or errors");
    };

    let lo_detects = detects(g_lo)?;
    let hi_detects = detects(g_hi)?;
    if lo_detects {
        return Err(Error::NoThreshold {
            lo: g_lo,
            hi: g_hi,
            reason: "witness already negative at the low end".into(),
        });
    }
    if !hi_detects {
        return Err(Error::NoThreshold {
            lo: g_lo,
            hi: g_hi,
            reason: "witness never negative at the high end".into(),
        });
    }

    let mut lo = g_lo;
    let mut hi = g_hi;
    let mut evaluations = 0;
    while hi - lo > GW_TOL {
        let mid = 0.5 * (lo + hi);
        evaluations += 1;
        if detects(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdResult {
        g_w: 0.5 * (lo + hi),
        bracket: (lo, hi),
        evaluations,
    })
}

/// Evolve once per coupling value and record both time gaps; points whose
/// extrema cannot be bracketed become `Missing` rows rather than errors.
pub fn gap_sweep(
    params_template: &ModelParams,
    g_values: &[f64],
    grid: &TimeGrid,
    backend: Backend,
    opts: &EvolveOptions,
) -> Vec<GapOutcome> {
    use rayon::prelude::*;
    g_values
        .par_iter()
        .map(|&g| {
            let params = ModelParams {
                g,
                ..params_template.clone()
            };
            match evolve_until_extrema(&params, grid, backend, opts, &HIERARCHY) {
                Ok((_, records, _)) => {
                    let crel = records[&Quantity::CRel].tau;
                    GapOutcome::Ok(GapRecord {
                        g,
                        tau_cw: records[&Quantity::C0Re].tau - crel,
                        tau_ew: records[&Quantity::W].tau - crel,
                    })
                }
                Err(e) => GapOutcome::Missing {
                    g,
                    reason: e.to_string(),
                },
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn parabola_minimum_recovered_exactly() {
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = times.iter().map(|t| (t - 2.0).powi(2)).collect();
        let rec = find_extremum(&times, &values, ExtremumKind::Min, Quantity::W).unwrap();
        assert_abs_diff_eq!(rec.tau, 2.0, epsilon = 1e-9);
        assert_abs_diff_eq!(rec.value, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn off_grid_parabola_vertex() {
        let times: Vec<f64> = (0..=40).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = times.iter().map(|t| -(t - 1.234).powi(2)).collect();
        let rec = find_extremum(&times, &values, ExtremumKind::Max, Quantity::CRel).unwrap();
        assert_abs_diff_eq!(rec.tau, 1.234, epsilon = 1e-9);
        // refinement stays within one grid step of the discrete extremum
        assert!((rec.tau - times[rec.grid_index]).abs() <= 0.1 + 1e-12);
    }

    #[test]
    fn monotone_series_has_no_extremum() {
        let times: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let values: Vec<f64> = times.clone();
        let err = find_extremum(&times, &values, ExtremumKind::Max, Quantity::C0Re).unwrap_err();
        match err {
            Error::NoExtremum { boundary_index, .. } => assert_eq!(boundary_index, 9),
            other => panic!("expected NoExtremum, got {other}"),
        }
    }

    #[test]
    fn flat_series_is_degenerate() {
        let times: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let values = vec![1.0; 10];
        assert!(matches!(
            find_extremum(&times, &values, ExtremumKind::Max, Quantity::CRel),
            Err(Error::DegenerateExtremum { .. })
        ));
    }

    #[test]
    fn first_interior_extremum_wins() {
        // two maxima; the earlier one is reported even though the later is higher
        let times: Vec<f64> = (0..=100).map(|i| i as f64 * 0.1).collect();
        let values: Vec<f64> = times
            .iter()
            .map(|t| (-((t - 2.0) / 0.5).powi(2)).exp() + 2.0 * (-((t - 7.0) / 0.5).powi(2)).exp())
            .collect();
        let rec = find_extremum(&times, &values, ExtremumKind::Max, Quantity::CRel).unwrap();
        assert!((rec.tau - 2.0).abs() < 0.05, "tau = {}", rec.tau);
    }

    fn record(q: Quantity, tau: f64) -> ExtremumRecord {
        ExtremumRecord {
            quantity: q,
            kind: extremum_kind_for(q).unwrap(),
            tau,
            value: 0.0,
            grid_index: 0,
        }
    }

    #[test]
    fn ordering_with_tie() {
        let mut records = BTreeMap::new();
        records.insert(Quantity::CRel, record(Quantity::CRel, 0.8));
        records.insert(Quantity::C0Re, record(Quantity::C0Re, 1.2));
        records.insert(Quantity::W, record(Quantity::W, 1.2005));
        let report = extremum_ordering(&records, 0.005).unwrap();
        assert!(report.all_hold());
        assert_eq!(report.sorted[0].quantity, Quantity::CRel);
        assert_eq!(report.chain.len(), 2);
    }

    #[test]
    fn ordering_flags_violation() {
        let mut records = BTreeMap::new();
        records.insert(Quantity::CRel, record(Quantity::CRel, 1.5));
        records.insert(Quantity::C0Re, record(Quantity::C0Re, 1.0));
        records.insert(Quantity::W, record(Quantity::W, 1.6));
        let report = extremum_ordering(&records, 0.005).unwrap();
        assert!(!report.all_hold());
        assert!(!report.chain[0].holds);
        assert!(report.chain[1].holds);
    }

    #[test]
    fn ordering_all_equal_taus_no_violation() {
        let mut records = BTreeMap::new();
        for q in HIERARCHY {
            records.insert(q, record(q, 1.0));
        }
        records.insert(Quantity::Czz, record(Quantity::Czz, 1.0));
        let report = extremum_ordering(&records, 0.005).unwrap();
        assert!(report.all_hold());
        assert_eq!(report.chain.len(), 3);
    }

    #[test]
    fn ordering_scale_invariance() {
        let mut records = BTreeMap::new();
        records.insert(Quantity::CRel, record(Quantity::CRel, 0.3));
        records.insert(Quantity::C0Re, record(Quantity::C0Re, 0.5));
        records.insert(Quantity::W, record(Quantity::W, 0.9));
        let base = extremum_ordering(&records, 0.01).unwrap();
        let scale = 7.5;
        let mut scaled = BTreeMap::new();
        for (q, r) in &records {
            scaled.insert(*q, record(*q, r.tau * scale));
        }
        let rescaled = extremum_ordering(&scaled, 0.01 * scale).unwrap();
        for (a, b) in base.chain.iter().zip(&rescaled.chain) {
            assert_eq!(a.holds, b.holds);
        }
        let order_a: Vec<Quantity> = base.sorted.iter().map(|r| r.quantity).collect();
        let order_b: Vec<Quantity> = rescaled.sorted.iter().map(|r| r.quantity).collect();
        assert_eq!(order_a, order_b);
    }

    #[test]
    fn fit_alpha_exact_log_over_n() {
        let ns: Vec<usize> = (2..=8).collect();
        let taus: Vec<f64> = ns.iter().map(|&n| (n as f64).ln() / n as f64).collect();
        let fit = fit_alpha(&ns, &taus).unwrap();
        assert_abs_diff_eq!(fit.alpha, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.prefactor, 1.0, epsilon = 1e-12);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_alpha_exact_scaled_model() {
        let ns: Vec<usize> = vec![2, 4, 6, 8, 12, 16];
        let taus: Vec<f64> = ns
            .iter()
            .map(|&n| 3.0 * (n as f64).ln() / (n as f64).powf(1.2))
            .collect();
        let fit = fit_alpha(&ns, &taus).unwrap();
        assert_abs_diff_eq!(fit.alpha, 1.2, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.prefactor, 3.0, epsilon = 1e-10);
        assert!(fit.residual < 1e-12);
    }

    #[test]
    fn fit_alpha_rejects_n_below_two() {
        assert!(matches!(
            fit_alpha(&[1, 2, 3], &[0.5, 0.4, 0.3]),
            Err(Error::Domain(_))
        ));
    }
}
