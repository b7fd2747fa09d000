//! Deterministic CSV writers. Numbers go out with 12 significant digits
//! in scientific notation so reruns are byte-identical and downstream
//! plotting never loses precision against the acceptance tolerances.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::observables::Quantity;
use crate::propagator::TrajectoryResult;
use crate::timing::{ExtremumRecord, GapOutcome, ScalingFit, ThresholdResult};

/// 12 significant digits, scientific.
pub fn fmt_sci(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x }; // normalize −0.0
    format!("{x:.11e}")
}

/// Fixed column order of the time-series files.
pub const SERIES_COLUMNS: [Quantity; 6] = [
    Quantity::CRel,
    Quantity::C0Re,
    Quantity::C0Im,
    Quantity::Czz,
    Quantity::W,
    Quantity::S,
];

pub fn series_path(dir: &Path, stem: &str) -> PathBuf {
    dir.join(format!("{stem}_series.csv"))
}

pub fn write_series(path: &Path, comment: &str, result: &TrajectoryResult) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{comment}")?;
    writeln!(w, "t,c_rel,c0_re,c0_im,czz,W,S")?;
    for (i, t) in result.times.iter().enumerate() {
        write!(w, "{}", fmt_sci(*t))?;
        for q in SERIES_COLUMNS {
            let v = result
                .get(q)
                .map(|s| s[i])
                .unwrap_or(f64::NAN);
            write!(w, ",{}", fmt_sci(v))?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

/// One extremum record per line under a shared header.
pub struct ExtremaWriter {
    w: BufWriter<File>,
}

impl ExtremaWriter {
    pub fn create(path: &Path, comment: &str) -> Result<Self> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "{comment}")?;
        writeln!(w, "experiment,quantity,kind,tau,value")?;
        Ok(Self { w })
    }

    pub fn record(&mut self, experiment_id: &str, rec: &ExtremumRecord) -> Result<()> {
        writeln!(
            self.w,
            "{experiment_id},{},{},{},{}",
            rec.quantity,
            rec.kind,
            fmt_sci(rec.tau),
            fmt_sci(rec.value)
        )?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.w.flush()?;
        Ok(())
    }
}

pub fn write_gaps(path: &Path, comment: &str, outcomes: &[GapOutcome]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{comment}")?;
    writeln!(w, "g,tau_cw,tau_ew,status")?;
    for outcome in outcomes {
        match outcome {
            GapOutcome::Ok(rec) => writeln!(
                w,
                "{},{},{},ok",
                fmt_sci(rec.g),
                fmt_sci(rec.tau_cw),
                fmt_sci(rec.tau_ew)
            )?,
            GapOutcome::Missing { g, reason } => {
                let clean = reason.replace(',', ";");
                writeln!(w, "{},,,{clean}", fmt_sci(*g))?
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub struct FitRow {
    pub gamma: f64,
    pub quantity: Quantity,
    pub fit: ScalingFit,
}

pub fn write_fits(path: &Path, comment: &str, rows: &[FitRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{comment}")?;
    writeln!(w, "gamma,quantity,alpha,prefactor,residual,n_points")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            fmt_sci(row.gamma),
            row.quantity,
            fmt_sci(row.fit.alpha),
            fmt_sci(row.fit.prefactor),
            fmt_sci(row.fit.residual),
            row.fit.n_values.len()
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_threshold(path: &Path, comment: &str, th: &ThresholdResult, g_lo: f64, g_hi: f64) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{comment}")?;
    writeln!(w, "g_lo,g_hi,g_w,evaluations")?;
    writeln!(
        w,
        "{},{},{},{}",
        fmt_sci(g_lo),
        fmt_sci(g_hi),
        fmt_sci(th.g_w),
        th.evaluations
    )?;
    w.flush()?;
    Ok(())
}

pub struct DeviationRow {
    pub quantity: Quantity,
    pub max_abs_deviation: f64,
    pub t_worst: f64,
    pub pass: bool,
}

pub fn write_validation(path: &Path, comment: &str, rows: &[DeviationRow]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{comment}")?;
    writeln!(w, "quantity,max_abs_deviation,t_worst,pass")?;
    for row in rows {
        writeln!(
            w,
            "{},{},{},{}",
            row.quantity,
            fmt_sci(row.max_abs_deviation),
            fmt_sci(row.t_worst),
            row.pass
        )?;
    }
    w.flush()?;
    Ok(())
}
