//! Backend selection: exact dense evolution for small N, the collective
//! (permutation-invariant) representation beyond that.

use crate::dicke::{build_dicke_generator, enumerate_blocks, evolve_dicke, initial_dicke_state};
use crate::error::{Error, Result};
use crate::liouvillian::{Generator, ModelParams};
use crate::propagator::{evolve, initial_state, EvolveOptions, TimeGrid, TrajectoryResult};

/// Largest N the automatic choice still runs exactly.
pub const AUTO_EXACT_MAX_N: usize = 9;
/// Hard memory guard for the exact backend.
pub const EXACT_GUARD_MAX_N: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    Exact,
    Dicke,
    #[default]
    Auto,
}

impl Backend {
    pub fn as_str(&self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Dicke => "dicke",
            Backend::Auto => "auto",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(Backend::Exact),
            "dicke" => Ok(Backend::Dicke),
            "auto" => Ok(Backend::Auto),
            other => Err(Error::Config(format!(
                "unknown backend `{other}` (expected exact | dicke | auto)"
            ))),
        }
    }

    /// Concrete backend for a given system size.
    pub fn resolve(&self, n_emitters: usize) -> Resolved {
        match self {
            Backend::Exact => Resolved::Exact,
            Backend::Dicke => Resolved::Dicke,
            Backend::Auto => {
                if n_emitters <= AUTO_EXACT_MAX_N {
                    Resolved::Exact
                } else {
                    Resolved::Dicke
                }
            }
        }
    }
}

impl std::fmt::Display for Backend {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Resolved {
    Exact,
    Dicke,
}

impl Resolved {
    pub fn as_str(&self) -> &'static str {
        match self {
            Resolved::Exact => "exact",
            Resolved::Dicke => "dicke",
        }
    }
}

/// Evolve the model's initial state over `grid` on the chosen backend.
pub fn run_trajectory(
    params: &ModelParams,
    grid: &TimeGrid,
    backend: Backend,
    opts: &EvolveOptions,
) -> Result<TrajectoryResult> {
    match backend.resolve(params.n_emitters) {
        Resolved::Exact => {
            if params.n_emitters > EXACT_GUARD_MAX_N {
                return Err(Error::Config(format!(
                    "exact backend rejects N = {} > {EXACT_GUARD_MAX_N} (memory guard); use backend=dicke",
                    params.n_emitters
                )));
            }
            let dims = params.dims()?;
            let gen = Generator::from_params(params, dims)?;
            let rho0 = initial_state(params, dims)?;
            evolve(&gen, &rho0, grid, opts, |_, _, _| {})
        }
        Resolved::Dicke => {
            let np = params.n_photons_resolved()?;
            let blocks = enumerate_blocks(params.n_emitters, np + 1)?;
            let gen = build_dicke_generator(params, &blocks)?;
            let state0 = initial_dicke_state(params, &blocks)?;
            evolve_dicke(&gen, &state0, grid, opts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn auto_switches_at_nine() {
        assert_eq!(Backend::Auto.resolve(9), Resolved::Exact);
        assert_eq!(Backend::Auto.resolve(10), Resolved::Dicke);
        assert_eq!(Backend::Exact.resolve(40), Resolved::Exact);
        assert_eq!(Backend::Dicke.resolve(2), Resolved::Dicke);
    }

    #[test]
    fn exact_memory_guard() {
        let params = ModelParams {
            n_emitters: 13,
            n_photons: Some(1),
            ..Default::default()
        };
        let grid = TimeGrid::new(1.0, 11).unwrap();
        let err = run_trajectory(&params, &grid, Backend::Exact, &EvolveOptions::default());
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn backend_parsing() {
        assert_eq!(Backend::parse("exact").unwrap(), Backend::Exact);
        assert_eq!(Backend::parse("dicke").unwrap(), Backend::Dicke);
        assert_eq!(Backend::parse("auto").unwrap(), Backend::Auto);
        assert!(Backend::parse("magic").is_err());
    }
}
