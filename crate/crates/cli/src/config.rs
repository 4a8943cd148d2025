use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use embedconst_core::params::{make_grid, tau_delta};
use embedconst_core::{Error, ExponentPair, Format, GroupGeometry, KeyValueConfig, ParameterGrid, Result};

const GEOMETRY_KEYS: [&str; 7] = ["d", "D", "b", "c", "c_delta", "c_chi", "c_delta_chi_inv"];
const GRID_KEYS: [&str; 3] = ["p_values", "alpha_fractions", "d_values"];

/// Named tolerances with their defaults. Config files may override any of
/// them as `tol.<name> = value`.
pub const DEFAULT_TOLERANCES: [(&str, f64); 15] = [
    ("b1", 1e-10),
    ("contraction", 1e-9),
    ("convexity", 1e-10),
    ("duality", 1e-12),
    ("embed_stability", 0.10),
    ("golden", 1e-6),
    ("kernel_stability", 0.02),
    ("quadrature", 1e-8),
    ("refinement", 0.05),
    ("resolution", 0.01),
    ("series_radius", 0.02),
    ("small_gamma", 0.01),
    ("spectral", 1e-10),
    ("weak_sup", 1e-6),
    ("weak_sup_excess", 1e-12),
];

/// Exponent selection from the command line. With `p` set, commands work on
/// that single pair instead of the grid.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairArgs {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub d: Option<u32>,
    pub alpha: Option<f64>,
}

impl PairArgs {
    pub fn is_empty(&self) -> bool {
        *self == Self::default()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub geometry: GroupGeometry,
    pub grid: ParameterGrid,
    pub tau_override: Option<f64>,
    pub tolerances: BTreeMap<String, f64>,
    pub output_dir: PathBuf,
    pub format: Format,
    pub jobs: Option<usize>,
    pub bless: bool,
    pub golden_dir: PathBuf,
    pub pair_args: PairArgs,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            geometry: GroupGeometry::default(),
            grid: ParameterGrid::default(),
            tau_override: None,
            tolerances: DEFAULT_TOLERANCES.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            output_dir: PathBuf::from("embedconst-out"),
            format: Format::Csv,
            jobs: None,
            bless: false,
            golden_dir: default_golden_dir(),
            pair_args: PairArgs::default(),
        }
    }
}

/// The `golden/` directory at the workspace root.
pub fn default_golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("..").join("..").join("golden")
}

impl RunConfig {
    /// Applies a key-value config file on top of the defaults.
    pub fn from_config_text(text: &str) -> Result<Self> {
        let kv = KeyValueConfig::parse(text)?;
        for key in kv.keys() {
            let known = GEOMETRY_KEYS.contains(&key)
                || GRID_KEYS.contains(&key)
                || key == "tau"
                || key.strip_prefix("tol.").is_some_and(|n| DEFAULT_TOLERANCES.iter().any(|(k, _)| *k == n));
            if !known {
                return Err(Error::Config(format!("unknown config key `{key}`")));
            }
        }
        let mut cfg = Self {
            geometry: GroupGeometry::from_config(&kv)?,
            grid: ParameterGrid::from_config(&kv)?,
            tau_override: kv.get_f64("tau")?,
            ..Self::default()
        };
        for (name, _) in DEFAULT_TOLERANCES {
            if let Some(v) = kv.get_f64(&format!("tol.{name}"))? {
                cfg.tolerances.insert(name.to_string(), v);
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.grid.validate()?;
        if let Some(t) = self.tau_override {
            if !(t >= 1.0 && t.is_finite()) {
                return Err(Error::Config(format!("tau must be finite and >= 1, got {t}")));
            }
        }
        if let Some((k, v)) = self.tolerances.iter().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Config(format!("tolerance {k} must be positive, got {v}")));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        Ok(())
    }

    pub fn tol(&self, name: &str) -> f64 {
        match self.tolerances.get(name) {
            Some(v) => *v,
            None => panic!("no tolerance named {name}"),
        }
    }

    /// `tau` for every Sobolev norm: the override, else `tau_delta`.
    pub fn tau(&self) -> f64 {
        self.tau_override.unwrap_or_else(|| tau_delta(&self.geometry))
    }

    /// True when the command line picked a single pair.
    pub fn single_pair(&self) -> bool {
        self.pair_args.p.is_some()
    }

    /// The configured grid, or its refinement, restricted to `--d`.
    pub fn active_grid(&self, refined: bool) -> ParameterGrid {
        let mut grid = if refined { self.grid.refined() } else { self.grid.clone() };
        if let Some(d) = self.pair_args.d {
            grid.d_values = vec![d];
        }
        grid
    }

    /// The pairs a command works on: the one given by `--p` with `--q` or
    /// `--alpha`, else the grid, restricted to `--d` when given.
    pub fn pairs(&self) -> Result<Vec<ExponentPair>> {
        let a = &self.pair_args;
        match a.p {
            Some(p) => {
                let d = a.d.unwrap_or(self.geometry.d);
                let pair = match (a.q, a.alpha) {
                    (Some(q), None) => ExponentPair::from_pq(p, q, d)?,
                    (None, Some(alpha)) => ExponentPair::new(p, alpha, d)?,
                    (Some(q), Some(alpha)) => {
                        let pair = ExponentPair::new(p, alpha, d)?;
                        if (1.0 / pair.q() - 1.0 / q).abs() > 1e-12 {
                            return Err(Error::Config(format!("--q {q} does not match --p {p} --alpha {alpha} --d {d}")));
                        }
                        pair
                    }
                    (None, None) => return Err(Error::Config("--p needs --q or --alpha".into())),
                };
                Ok(vec![pair])
            }
            None => {
                if a.q.is_some() {
                    return Err(Error::Config("--q needs --p".into()));
                }
                make_grid(&self.active_grid(false))
            }
        }
    }
}
