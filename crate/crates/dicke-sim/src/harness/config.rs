//! Run configuration: built-in defaults, experiment presets, a flat
//! key=value config file, and explicit overrides (CLI flags or
//! environment), in that order of increasing precedence.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::liouvillian::ModelParams;
use crate::propagator::{ObservableScope, TimeGrid};

/// The experiment recipes the harness can run. The fig presets are named
/// parameter sets over the generic engines, not separate code paths.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Experiment {
    Evolve,
    SweepG,
    SweepN,
    FitAlpha,
    FindGw,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    ValidateBackends,
}

impl Experiment {
    pub fn as_str(&self) -> &'static str {
        match self {
            Experiment::Evolve => "evolve",
            Experiment::SweepG => "sweep-g",
            Experiment::SweepN => "sweep-n",
            Experiment::FitAlpha => "fit-alpha",
            Experiment::FindGw => "find-gw",
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::ValidateBackends => "validate-backends",
        }
    }

    /// File-name stem for artifacts of this experiment.
    pub fn stem(&self) -> &'static str {
        match self {
            Experiment::Evolve => "evolve",
            Experiment::SweepG => "sweep_g",
            Experiment::SweepN => "sweep_n",
            Experiment::FitAlpha => "fit_alpha",
            Experiment::FindGw => "find_gw",
            Experiment::Fig2 => "fig2",
            Experiment::Fig3 => "fig3",
            Experiment::Fig4 => "fig4",
            Experiment::Fig5 => "fig5",
            Experiment::ValidateBackends => "validate_backends",
        }
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: Experiment,
    pub params: ModelParams,
    pub grid: TimeGrid,
    pub backend: Backend,
    pub scope: ObservableScope,
    pub out_dir: PathBuf,
    /// Sweep worker threads; 0 means machine parallelism.
    pub workers: usize,
    pub g_lo: f64,
    pub g_hi: f64,
    pub g_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub gamma_list: Vec<f64>,
}

/// Optional overrides collected from CLI flags or environment variables.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub config: Option<PathBuf>,
    pub n_emitters: Option<usize>,
    pub n_photons: Option<usize>,
    pub omega_q: Option<f64>,
    pub omega_c: Option<f64>,
    pub g: Option<f64>,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub gamma_phi: Option<f64>,
    pub t_max: Option<f64>,
    pub n_points: Option<usize>,
    pub backend: Option<String>,
    pub observable_scope: Option<String>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
    pub g_lo: Option<f64>,
    pub g_hi: Option<f64>,
    pub g_list: Option<Vec<f64>>,
    pub n_list: Option<Vec<usize>>,
    pub gamma_list: Option<Vec<f64>>,
}

fn default_g_sweep() -> Vec<f64> {
    (1..=20).map(|i| i as f64 * 0.05).collect()
}

impl RunConfig {
    /// Built-in defaults: the two-emitter reference parameter set
    /// (g = 1, γ = 0.1, κ = 0.1, γφ = 0.0225, n_p = N/2) on the default
    /// grid, automatic backend choice.
    fn defaults(experiment: Experiment) -> Self {
        Self {
            experiment,
            params: ModelParams::default(),
            grid: TimeGrid::default(),
            backend: Backend::Auto,
            scope: ObservableScope::Reduced,
            out_dir: PathBuf::from("."),
            workers: 0,
            g_lo: 0.05,
            g_hi: 1.0,
            g_list: default_g_sweep(),
            n_list: vec![2, 4, 6, 8],
            gamma_list: vec![0.0, 0.1, 1.0, 2.0],
        }
    }

    /// Experiment presets layered over the defaults.
    fn apply_preset(&mut self) {
        match self.experiment {
            Experiment::Fig4 | Experiment::FitAlpha => {
                // extrema sit early; a shorter, finer window keeps the
                // size sweep affordable
                self.grid = TimeGrid {
                    t_max: 4.0,
                    n_points: 1601,
                };
                self.n_list = (2..=20).step_by(2).collect();
            }
            Experiment::Fig5 => {
                self.params.n_photons = Some(1);
            }
            _ => {}
        }
    }

    /// Resolve an experiment run from preset + optional config file +
    /// explicit overrides (overrides win).
    pub fn resolve(experiment: Experiment, overrides: &Overrides) -> Result<Self> {
        let mut cfg = Self::defaults(experiment);
        cfg.apply_preset();
        if let Some(path) = &overrides.config {
            let file = ConfigFile::parse(path)?;
            cfg.apply_file(&file)?;
        }
        cfg.apply_overrides(overrides)?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_file(&mut self, file: &ConfigFile) -> Result<()> {
        for (key, (value, line)) in &file.entries {
            self.apply_key(key, value).map_err(|e| {
                Error::Config(format!("{}:{line}: key `{key}`: {e}", file.path.display()))
            })?;
        }
        Ok(())
    }

    fn apply_key(&mut self, key: &str, value: &str) -> std::result::Result<(), String> {
        fn parse<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String>
        where
            T::Err: std::fmt::Display,
        {
            v.parse::<T>().map_err(|e| format!("invalid value `{v}`: {e}"))
        }
        fn parse_list<T: std::str::FromStr>(v: &str) -> std::result::Result<Vec<T>, String>
        where
            T::Err: std::fmt::Display,
        {
            v.split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(parse::<T>)
                .collect()
        }
        match key {
            "n-emitters" => self.params.n_emitters = parse(value)?,
            "n-photons" => self.params.n_photons = Some(parse(value)?),
            "omega-q" => self.params.omega_q = parse(value)?,
            "omega-c" => self.params.omega_c = parse(value)?,
            "g" => self.params.g = parse(value)?,
            "gamma" => self.params.gamma = parse(value)?,
            "kappa" => self.params.kappa = parse(value)?,
            "gamma-phi" => self.params.gamma_phi = parse(value)?,
            "t-max" => self.grid.t_max = parse(value)?,
            "n-points" => self.grid.n_points = parse(value)?,
            "backend" => self.backend = Backend::parse(value).map_err(|e| e.to_string())?,
            "observable-scope" => self.scope = parse_scope(value)?,
            "out" => self.out_dir = PathBuf::from(value),
            "workers" => self.workers = parse(value)?,
            "g-lo" => self.g_lo = parse(value)?,
            "g-hi" => self.g_hi = parse(value)?,
            "g-list" => self.g_list = parse_list(value)?,
            "n-list" => self.n_list = parse_list(value)?,
            "gamma-list" => self.gamma_list = parse_list(value)?,
            other => return Err(format!("unknown key `{other}`")),
        }
        Ok(())
    }

    fn apply_overrides(&mut self, o: &Overrides) -> Result<()> {
        if let Some(v) = o.n_emitters {
            self.params.n_emitters = v;
        }
        if let Some(v) = o.n_photons {
            self.params.n_photons = Some(v);
        }
        if let Some(v) = o.omega_q {
            self.params.omega_q = v;
        }
        if let Some(v) = o.omega_c {
            self.params.omega_c = v;
        }
        if let Some(v) = o.g {
            self.params.g = v;
        }
        if let Some(v) = o.gamma {
            self.params.gamma = v;
        }
        if let Some(v) = o.kappa {
            self.params.kappa = v;
        }
        if let Some(v) = o.gamma_phi {
            self.params.gamma_phi = v;
        }
        if let Some(v) = o.t_max {
            self.grid.t_max = v;
        }
        if let Some(v) = o.n_points {
            self.grid.n_points = v;
        }
        if let Some(v) = &o.backend {
            self.backend = Backend::parse(v)?;
        }
        if let Some(v) = &o.observable_scope {
            self.scope = parse_scope(v).map_err(Error::Config)?;
        }
        if let Some(v) = &o.out {
            self.out_dir = v.clone();
        }
        if let Some(v) = o.workers {
            self.workers = v;
        }
        if let Some(v) = o.g_lo {
            self.g_lo = v;
        }
        if let Some(v) = o.g_hi {
            self.g_hi = v;
        }
        if let Some(v) = &o.g_list {
            self.g_list = v.clone();
        }
        if let Some(v) = &o.n_list {
            self.n_list = v.clone();
        }
        if let Some(v) = &o.gamma_list {
            self.gamma_list = v.clone();
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.params.g > 0.0) {
            return Err(Error::Config(format!(
                "g must be > 0 for a run (it sets the time unit), got {}",
                self.params.g
            )));
        }
        TimeGrid::new(self.grid.t_max, self.grid.n_points)?;
        if matches!(self.experiment, Experiment::ValidateBackends) && self.params.n_emitters > 9 {
            return Err(Error::Config(format!(
                "validate-backends requires N <= 9 (exact reference), got {}",
                self.params.n_emitters
            )));
        }
        match self.experiment {
            Experiment::SweepG | Experiment::Fig5 => {
                if self.g_list.is_empty() {
                    return Err(Error::Config("g-list must not be empty".into()));
                }
                if self.g_list.iter().any(|g| !(*g > 0.0)) {
                    return Err(Error::Config("g-list entries must be > 0".into()));
                }
            }
            Experiment::SweepN | Experiment::FitAlpha | Experiment::Fig3 | Experiment::Fig4 => {
                if self.n_list.is_empty() {
                    return Err(Error::Config("n-list must not be empty".into()));
                }
            }
            _ => {}
        }
        if matches!(self.experiment, Experiment::FindGw | Experiment::Fig5)
            && !(self.g_lo > 0.0 && self.g_hi > self.g_lo)
        {
            return Err(Error::Config(format!(
                "need 0 < g-lo < g-hi, got [{}, {}]",
                self.g_lo, self.g_hi
            )));
        }
        Ok(())
    }

    /// Parameter-record line embedded as a comment in every output file.
    pub fn comment_line(&self) -> String {
        let np = match self.params.n_photons {
            Some(n) => n.to_string(),
            None => format!("{}", self.params.n_emitters / 2),
        };
        format!(
            "# experiment={} backend={} n-emitters={} n-photons={} omega-q={} omega-c={} g={} gamma={} kappa={} gamma-phi={} t-max={} n-points={} observable-scope={}",
            self.experiment,
            self.backend.as_str(),
            self.params.n_emitters,
            np,
            self.params.omega_q,
            self.params.omega_c,
            self.params.g,
            self.params.gamma,
            self.params.kappa,
            self.params.gamma_phi,
            self.grid.t_max,
            self.grid.n_points,
            scope_str(self.scope),
        )
    }
}

fn parse_scope(s: &str) -> std::result::Result<ObservableScope, String> {
    match s {
        "reduced" => Ok(ObservableScope::Reduced),
        "global" => Ok(ObservableScope::Global),
        other => Err(format!("unknown observable-scope `{other}` (expected reduced | global)")),
    }
}

pub fn scope_str(s: ObservableScope) -> &'static str {
    match s {
        ObservableScope::Reduced => "reduced",
        ObservableScope::Global => "global",
    }
}

/// Flat key=value file with `#` comments.
struct ConfigFile {
    path: PathBuf,
    entries: BTreeMap<String, (String, usize)>,
}

impl ConfigFile {
    fn parse(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| {
            Error::Config(format!("cannot read config {}: {e}", path.display()))
        })?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "{}:{}: expected key=value, got `{line}`",
                    path.display(),
                    lineno + 1
                )));
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if entries.insert(key.clone(), (value, lineno + 1)).is_some() {
                return Err(Error::Config(format!(
                    "{}:{}: duplicate key `{key}`",
                    path.display(),
                    lineno + 1
                )));
            }
        }
        Ok(Self {
            path: path.to_path_buf(),
            entries,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> PathBuf {
        let dir = std::env::temp_dir().join(format!("dicke-sim-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join(format!(
            "cfg-{}.txt",
            std::time::SystemTime::now()
                .duration_since(std::time::UNIX_EPOCH)
                .unwrap()
                .as_nanos()
        ));
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn defaults_encode_reference_parameters() {
        let cfg = RunConfig::resolve(Experiment::Evolve, &Overrides::default()).unwrap();
        assert_eq!(cfg.params.n_emitters, 2);
        assert_eq!(cfg.params.g, 1.0);
        assert_eq!(cfg.params.gamma, 0.1);
        assert_eq!(cfg.params.kappa, 0.1);
        assert_eq!(cfg.params.gamma_phi, 0.0225);
        assert_eq!(cfg.grid.n_points, 2001);
        assert_eq!(cfg.grid.t_max, 10.0);
    }

    #[test]
    fn file_overrides_defaults_and_flags_override_file() {
        let path = write_temp("# comment\nn-emitters = 4\ngamma=0.3\n\nt-max=5\n");
        let overrides = Overrides {
            config: Some(path),
            gamma: Some(0.7),
            ..Default::default()
        };
        let cfg = RunConfig::resolve(Experiment::Evolve, &overrides).unwrap();
        assert_eq!(cfg.params.n_emitters, 4); // from file
        assert_eq!(cfg.params.gamma, 0.7); // flag wins over file
        assert_eq!(cfg.grid.t_max, 5.0);
    }

    #[test]
    fn unknown_key_reports_line() {
        let path = write_temp("n-emitters=2\nno-such-key=1\n");
        let overrides = Overrides {
            config: Some(path),
            ..Default::default()
        };
        let err = RunConfig::resolve(Experiment::Evolve, &overrides).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains(":2:"), "{msg}");
        assert!(msg.contains("no-such-key"), "{msg}");
    }

    #[test]
    fn malformed_line_reports_line() {
        let path = write_temp("this is not a pair\n");
        let overrides = Overrides {
            config: Some(path),
            ..Default::default()
        };
        let err = RunConfig::resolve(Experiment::Evolve, &overrides).unwrap_err();
        assert!(err.to_string().contains(":1:"));
    }

    #[test]
    fn zero_g_rejected_at_run_boundary() {
        let overrides = Overrides {
            g: Some(0.0),
            ..Default::default()
        };
        let err = RunConfig::resolve(Experiment::Evolve, &overrides).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn fig4_preset_sets_size_sweep() {
        let cfg = RunConfig::resolve(Experiment::Fig4, &Overrides::default()).unwrap();
        assert_eq!(cfg.n_list, vec![2, 4, 6, 8, 10, 12, 14, 16, 18, 20]);
        assert_eq!(cfg.gamma_list, vec![0.0, 0.1, 1.0, 2.0]);
        assert_eq!(cfg.grid.t_max, 4.0);
    }

    #[test]
    fn fig5_preset_pins_one_photon() {
        let cfg = RunConfig::resolve(Experiment::Fig5, &Overrides::default()).unwrap();
        assert_eq!(cfg.params.n_photons, Some(1));
        assert_eq!(cfg.g_list.len(), 20);
    }
}
