//! The experiment engines behind the CLI subcommands. Presets (fig2–fig5)
//! run the same engines with pinned parameter sets.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::backend::{run_trajectory, Backend};
use crate::error::{Error, Result};
use crate::liouvillian::ModelParams;
use crate::observables::Quantity;
use crate::propagator::{EvolveOptions, TimeGrid, TrajectoryResult};
use crate::timing::{
    evolve_until_extrema, extremum_kind_for, extremum_ordering, find_extremum, find_gw, fit_alpha,
    gap_sweep, ExtremumRecord, GapOutcome, HIERARCHY,
};

use super::config::{Experiment, RunConfig};
use super::output::{
    series_path, write_fits, write_gaps, write_series, write_threshold, write_validation,
    DeviationRow, ExtremaWriter, FitRow,
};

/// Equivalence threshold for the backend cross-check.
pub const BACKEND_AGREEMENT_TOL: f64 = 1e-6;

fn evolve_opts(cfg: &RunConfig) -> EvolveOptions {
    EvolveOptions {
        scope: cfg.scope,
        ..Default::default()
    }
}

/// Extremal quantities tracked by the sweep experiments: the conjectured
/// chain plus the correlated-dephasing dip (reported, never gating).
fn tracked_quantities() -> Vec<Quantity> {
    let mut v = HIERARCHY.to_vec();
    v.push(Quantity::Czz);
    v
}

/// Single trajectory: time series plus best-effort extremum records.
pub fn run_evolve(cfg: &RunConfig) -> Result<()> {
    let opts = evolve_opts(cfg);
    let result = run_trajectory(&cfg.params, &cfg.grid, cfg.backend, &opts)?;
    let path = series_path(&cfg.out_dir, cfg.experiment.stem());
    write_series(&path, &cfg.comment_line(), &result)?;
    println!(
        "wrote {} ({} rows, {} columns)",
        path.display(),
        result.times.len(),
        1 + super::output::SERIES_COLUMNS.len()
    );

    let mut records = BTreeMap::new();
    if cfg.params.n_emitters >= 2 {
        for q in tracked_quantities() {
            let kind = extremum_kind_for(q).expect("tracked quantities have kinds");
            if let Some(series) = result.get(q) {
                if let Ok(rec) = find_extremum(&result.times, series, kind, q) {
                    records.insert(q, rec);
                }
            }
        }
        let extrema = cfg.out_dir.join(format!("{}_extrema.csv", cfg.experiment.stem()));
        let mut writer = ExtremaWriter::create(&extrema, &cfg.comment_line())?;
        for rec in records.values() {
            writer.record(cfg.experiment.as_str(), rec)?;
        }
        writer.finish()?;
        println!("wrote {} ({} records)", extrema.display(), records.len());
    }
    print_diagnostics(&result);

    if records.len() >= HIERARCHY.len() && HIERARCHY.iter().all(|q| records.contains_key(q)) {
        let report = extremum_ordering(&records, cfg.grid.spacing())?;
        print_ordering(&report);
    }
    Ok(())
}

fn print_diagnostics(result: &TrajectoryResult) {
    let d = &result.diagnostics;
    println!(
        "diagnostics: evolving dim {}, trace drift {:.2e}, hermiticity correction {:.2e}, min eigenvalue {}",
        d.support_dim,
        d.max_trace_drift,
        d.max_herm_correction,
        d.min_eigenvalue
            .map(|m| format!("{m:+.2e}"))
            .unwrap_or_else(|| "unchecked".into()),
    );
}

fn print_ordering(report: &crate::timing::OrderingReport) {
    let order: Vec<String> = report
        .sorted
        .iter()
        .map(|r| format!("{}@{:.4}", r.quantity, r.tau))
        .collect();
    println!("extremal order: {}", order.join(" <= "));
    for check in &report.chain {
        println!(
            "  tau_{} <= tau_{} (+{:.0e}): {}",
            check.earlier,
            check.later,
            report.tie_tolerance,
            if check.holds { "holds" } else { "VIOLATED" }
        );
    }
}

/// Per-size sweep: one trajectory per N, extrema table, ordering per N.
pub fn run_sweep_n(cfg: &RunConfig) -> Result<()> {
    let opts = evolve_opts(cfg);
    let quantities = tracked_quantities();
    let runs: Vec<(usize, Result<_>)> = cfg
        .n_list
        .par_iter()
        .map(|&n| {
            let params = ModelParams {
                n_emitters: n,
                ..cfg.params.clone()
            };
            (
                n,
                evolve_until_extrema(&params, &cfg.grid, cfg.backend, &opts, &HIERARCHY).map(
                    |(result, mut records, used)| {
                        // correlated dephasing is reported when present
                        if let (Some(series), Some(kind)) =
                            (result.get(Quantity::Czz), extremum_kind_for(Quantity::Czz))
                        {
                            if let Ok(rec) =
                                find_extremum(&result.times, series, kind, Quantity::Czz)
                            {
                                records.insert(Quantity::Czz, rec);
                            }
                        }
                        (result, records, used)
                    },
                ),
            )
        })
        .collect();

    let extrema_path = cfg.out_dir.join(format!("{}_extrema.csv", cfg.experiment.stem()));
    let mut writer = ExtremaWriter::create(&extrema_path, &cfg.comment_line())?;
    let mut tau_by_quantity: BTreeMap<Quantity, Vec<(usize, f64)>> = BTreeMap::new();
    for (n, outcome) in runs {
        let (result, records, used) = outcome?;
        let series_file = cfg
            .out_dir
            .join(format!("{}_series_n{}.csv", cfg.experiment.stem(), n));
        write_series(&series_file, &cfg.comment_line(), &result)?;
        let id = format!("{}[n={}]", cfg.experiment.as_str(), n);
        for rec in records.values() {
            writer.record(&id, rec)?;
        }
        for (q, rec) in &records {
            tau_by_quantity.entry(*q).or_default().push((n, rec.tau));
        }
        println!("N = {n} (horizon {}):", used.t_max);
        let report = extremum_ordering(&records, used.spacing())?;
        print_ordering(&report);
        let _ = quantities.len();
    }
    writer.finish()?;
    println!("wrote {}", extrema_path.display());

    for (q, taus) in &tau_by_quantity {
        let decreasing = taus.windows(2).all(|w| w[1].1 < w[0].1);
        println!(
            "tau_{q} strictly decreasing in N: {}",
            if decreasing { "yes" } else { "NO" }
        );
    }
    Ok(())
}

/// τ(N) sweep for one γ; extrema plus ln(N)/N^α fits per quantity.
pub fn run_fit_alpha(cfg: &RunConfig) -> Result<()> {
    let fits = size_scaling(cfg, cfg.params.gamma)?;
    let extrema_path = cfg.out_dir.join(format!("{}_extrema.csv", cfg.experiment.stem()));
    let mut writer = ExtremaWriter::create(&extrema_path, &cfg.comment_line())?;
    let mut rows = Vec::new();
    for (q, per_n) in &fits.taus {
        for (n, rec) in per_n {
            writer.record(&format!("{}[n={}]", cfg.experiment.as_str(), n), rec)?;
            let _ = q;
        }
    }
    writer.finish()?;
    for (q, fit) in fits.fits {
        println!(
            "gamma={}: alpha[{q}] = {:.4} (prefactor {:.4}, residual {:.2e})",
            cfg.params.gamma, fit.alpha, fit.prefactor, fit.residual
        );
        rows.push(FitRow {
            gamma: cfg.params.gamma,
            quantity: q,
            fit,
        });
    }
    let fits_path = cfg.out_dir.join(format!("{}_fits.csv", cfg.experiment.stem()));
    write_fits(&fits_path, &cfg.comment_line(), &rows)?;
    println!("wrote {} and {}", extrema_path.display(), fits_path.display());
    Ok(())
}

pub struct SizeScaling {
    pub taus: BTreeMap<Quantity, Vec<(usize, ExtremumRecord)>>,
    pub fits: Vec<(Quantity, crate::timing::ScalingFit)>,
}

/// Evolve over the N list at fixed γ and fit τ(N) for each hierarchy
/// quantity.
pub fn size_scaling(cfg: &RunConfig, gamma: f64) -> Result<SizeScaling> {
    let opts = evolve_opts(cfg);
    let runs: Vec<(usize, Result<_>)> = cfg
        .n_list
        .par_iter()
        .map(|&n| {
            let params = ModelParams {
                n_emitters: n,
                gamma,
                n_photons: None, // N/2 per the initial condition
                ..cfg.params.clone()
            };
            (
                n,
                evolve_until_extrema(&params, &cfg.grid, cfg.backend, &opts, &HIERARCHY)
                    .map(|(_, records, _)| records),
            )
        })
        .collect();

    let mut taus: BTreeMap<Quantity, Vec<(usize, ExtremumRecord)>> = BTreeMap::new();
    for (n, outcome) in runs {
        let records = outcome?;
        for (q, rec) in records {
            taus.entry(q).or_default().push((n, rec));
        }
    }
    let mut fits = Vec::new();
    for q in HIERARCHY {
        let per_n = taus.get(&q).ok_or_else(|| {
            Error::Domain(format!("size scaling: no extrema collected for {q}"))
        })?;
        let ns: Vec<usize> = per_n.iter().map(|(n, _)| *n).collect();
        let t: Vec<f64> = per_n.iter().map(|(_, r)| r.tau).collect();
        fits.push((q, fit_alpha(&ns, &t)?));
    }
    Ok(SizeScaling { taus, fits })
}

/// γ × N grid with per-γ fits (fig4).
pub fn run_fig4(cfg: &RunConfig) -> Result<()> {
    let extrema_path = cfg.out_dir.join(format!("{}_extrema.csv", cfg.experiment.stem()));
    let mut writer = ExtremaWriter::create(&extrema_path, &cfg.comment_line())?;
    let mut rows = Vec::new();
    for &gamma in &cfg.gamma_list {
        let scaling = size_scaling(cfg, gamma)?;
        for (q, per_n) in &scaling.taus {
            let _ = q;
            for (n, rec) in per_n {
                writer.record(&format!("{}[gamma={},n={}]", cfg.experiment.as_str(), gamma, n), rec)?;
            }
        }
        for (q, fit) in scaling.fits {
            println!(
                "gamma={gamma}: alpha[{q}] = {:.4} (prefactor {:.4}, residual {:.2e})",
                fit.alpha, fit.prefactor, fit.residual
            );
            rows.push(FitRow {
                gamma,
                quantity: q,
                fit,
            });
        }
    }
    writer.finish()?;
    let fits_path = cfg.out_dir.join(format!("{}_fits.csv", cfg.experiment.stem()));
    write_fits(&fits_path, &cfg.comment_line(), &rows)?;
    println!("wrote {} and {}", extrema_path.display(), fits_path.display());
    Ok(())
}

/// Coupling sweep of the two time gaps (sweep-g / part of fig5).
pub fn run_sweep_g(cfg: &RunConfig) -> Result<Vec<GapOutcome>> {
    let opts = evolve_opts(cfg);
    let outcomes = gap_sweep(&cfg.params, &cfg.g_list, &cfg.grid, cfg.backend, &opts);
    let path = cfg.out_dir.join(format!("{}_gaps.csv", cfg.experiment.stem()));
    write_gaps(&path, &cfg.comment_line(), &outcomes)?;
    let ok = outcomes.iter().filter(|o| matches!(o, GapOutcome::Ok(_))).count();
    println!(
        "wrote {} ({} of {} points with extrema)",
        path.display(),
        ok,
        outcomes.len()
    );
    for outcome in &outcomes {
        if let GapOutcome::Missing { g, reason } = outcome {
            println!("  g={g}: gaps missing ({reason})");
        }
    }
    Ok(outcomes)
}

/// Witness-negativity threshold by bisection (find-gw / part of fig5).
pub fn run_find_gw(cfg: &RunConfig) -> Result<()> {
    let opts = evolve_opts(cfg);
    let th = find_gw(&cfg.params, cfg.g_lo, cfg.g_hi, &cfg.grid, cfg.backend, &opts)?;
    let path = cfg
        .out_dir
        .join(format!("{}_threshold.csv", cfg.experiment.stem()));
    write_threshold(&path, &cfg.comment_line(), &th, cfg.g_lo, cfg.g_hi)?;
    println!(
        "g_W = {:.4} (bracket [{:.4}, {:.4}] after {} bisection evaluations)",
        th.g_w, th.bracket.0, th.bracket.1, th.evaluations
    );
    println!("wrote {}", path.display());
    Ok(())
}

/// fig5 = gap sweep plus threshold on the same parameter set.
pub fn run_fig5(cfg: &RunConfig) -> Result<()> {
    run_sweep_g(cfg)?;
    run_find_gw(cfg)
}

/// Run both backends on the identical configuration and compare every
/// observable pointwise.
pub fn run_validate_backends(cfg: &RunConfig) -> Result<()> {
    let opts = evolve_opts(cfg);
    let exact = run_trajectory(&cfg.params, &cfg.grid, Backend::Exact, &opts)?;
    let dicke = run_trajectory(&cfg.params, &cfg.grid, Backend::Dicke, &opts)?;
    let mut rows = Vec::new();
    let mut all_pass = true;
    for q in super::output::SERIES_COLUMNS {
        let a = exact
            .get(q)
            .ok_or_else(|| Error::Domain(format!("exact backend lacks series {q}")))?;
        let b = dicke
            .get(q)
            .ok_or_else(|| Error::Domain(format!("dicke backend lacks series {q}")))?;
        let (mut worst, mut at) = (0.0f64, 0usize);
        for (i, (x, y)) in a.iter().zip(b).enumerate() {
            let d = (x - y).abs();
            if d > worst {
                worst = d;
                at = i;
            }
        }
        let pass = worst < BACKEND_AGREEMENT_TOL;
        all_pass &= pass;
        println!(
            "{q}: max deviation {worst:.3e} at t = {:.4} -> {}",
            exact.times[at],
            if pass { "ok" } else { "FAIL" }
        );
        rows.push(DeviationRow {
            quantity: q,
            max_abs_deviation: worst,
            t_worst: exact.times[at],
            pass,
        });
    }
    let path = cfg
        .out_dir
        .join(format!("{}.csv", cfg.experiment.stem()));
    write_validation(&path, &cfg.comment_line(), &rows)?;
    println!("wrote {}", path.display());
    if cfg.params.n_emitters == 9 {
        println!("note: N = 9 is the upper edge of the exact cross-check region");
    }
    if !all_pass {
        return Err(Error::Domain(format!(
            "backend deviation above {BACKEND_AGREEMENT_TOL:.0e}; see {}",
            path.display()
        )));
    }
    Ok(())
}

/// fig3 is the size sweep at the reference rates.
pub fn run_fig3(cfg: &RunConfig) -> Result<()> {
    run_sweep_n(cfg)
}

/// fig2 is a single reference-parameter trajectory with the ordering report.
pub fn run_fig2(cfg: &RunConfig) -> Result<()> {
    let opts = evolve_opts(cfg);
    let quantities = tracked_quantities();
    let (result, mut records, used) =
        evolve_until_extrema(&cfg.params, &cfg.grid, cfg.backend, &opts, &HIERARCHY)?;
    for q in &quantities {
        if records.contains_key(q) {
            continue;
        }
        if let (Some(series), Some(kind)) = (result.get(*q), extremum_kind_for(*q)) {
            if let Ok(rec) = find_extremum(&result.times, series, kind, *q) {
                records.insert(*q, rec);
            }
        }
    }
    let series_file = series_path(&cfg.out_dir, cfg.experiment.stem());
    write_series(&series_file, &cfg.comment_line(), &result)?;
    let extrema_path = cfg.out_dir.join(format!("{}_extrema.csv", cfg.experiment.stem()));
    let mut writer = ExtremaWriter::create(&extrema_path, &cfg.comment_line())?;
    for rec in records.values() {
        writer.record(cfg.experiment.as_str(), rec)?;
    }
    writer.finish()?;
    println!("wrote {} and {}", series_file.display(), extrema_path.display());
    print_diagnostics(&result);
    let report = extremum_ordering(&records, used.spacing())?;
    print_ordering(&report);
    Ok(())
}

/// Dispatch one experiment.
pub fn run(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    let workers = if cfg.workers == 0 {
        std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
    } else {
        cfg.workers
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    pool.install(|| match cfg.experiment {
        Experiment::Evolve => run_evolve(cfg),
        Experiment::SweepG => run_sweep_g(cfg).map(|_| ()),
        Experiment::SweepN => run_sweep_n(cfg),
        Experiment::FitAlpha => run_fit_alpha(cfg),
        Experiment::FindGw => run_find_gw(cfg),
        Experiment::Fig2 => run_fig2(cfg),
        Experiment::Fig3 => run_fig3(cfg),
        Experiment::Fig4 => run_fig4(cfg),
        Experiment::Fig5 => run_fig5(cfg),
        Experiment::ValidateBackends => run_validate_backends(cfg),
    })
}
