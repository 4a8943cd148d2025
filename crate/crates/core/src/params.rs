//! Exponent algebra and group-geometry parameters.
//!
//! Every other module consumes the validated types defined here:
//! [`ExponentPair`] locks `(p, q, alpha, d)` to the scaling relation
//! `1/q = 1/p - alpha/d`, and [`GroupGeometry`] carries the volume-growth and
//! heat-kernel constants from which the spectral shifts are derived.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on the scaling relation, relative to `1/p`.
pub const SCALING_TOL: f64 = 1e-12;

/// Hölder conjugate `p / (p - 1)`.
pub fn conjugate_exponent(p: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::domain(format!("conjugate exponent needs p > 1, got {p}")));
    }
    Ok(p / (p - 1.0))
}

/// A Sobolev exponent quadruple with `1/q = 1/p - alpha/d` and `q >= p`.
///
/// `q` is always recomputed from `(p, alpha, d)`. The conjugates are cached so
/// that [`ExponentPair::dual`] is an exact involution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    p: f64,
    q: f64,
    alpha: f64,
    d: u32,
    p_conj: f64,
    q_conj: f64,
}

impl ExponentPair {
    pub fn new(p: f64, alpha: f64, d: u32) -> Result<Self> {
        if d == 0 {
            return Err(Error::domain("dimension d must be at least 1"));
        }
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::domain(format!("p must lie in (1, inf), got {p}")));
        }
        let df = d as f64;
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(Error::domain(format!("alpha must be >= 0, got {alpha}")));
        }
        if alpha >= df / p {
            return Err(Error::domain(format!(
                "alpha = {alpha} must be below d/p = {}; q would not be finite",
                df / p
            )));
        }
        let q = if alpha == 0.0 { p } else { 1.0 / (1.0 / p - alpha / df) };
        if !(q.is_finite() && q >= p) {
            return Err(Error::domain(format!("derived q = {q} is not admissible")));
        }
        let pair = Self {
            p,
            q,
            alpha,
            d,
            p_conj: p / (p - 1.0),
            q_conj: q / (q - 1.0),
        };
        debug_assert!(pair.scaling_residual() <= SCALING_TOL);
        Ok(pair)
    }

    /// Builds the pair from `(p, q, d)`, deriving `alpha = d (1/p - 1/q)`.
    pub fn from_pq(p: f64, q: f64, d: u32) -> Result<Self> {
        if !(q.is_finite() && p.is_finite() && q >= p) {
            return Err(Error::domain(format!("need 1 < p <= q < inf, got p={p}, q={q}")));
        }
        let alpha = if q == p { 0.0 } else { d as f64 * (1.0 / p - 1.0 / q) };
        Self::new(p, alpha, d)
    }

    pub fn p(&self) -> f64 {
        self.p
    }
    pub fn q(&self) -> f64 {
        self.q
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn d(&self) -> u32 {
        self.d
    }
    /// `p'`
    pub fn p_conj(&self) -> f64 {
        self.p_conj
    }
    /// `q'`
    pub fn q_conj(&self) -> f64 {
        self.q_conj
    }

    /// `alpha / d`
    pub fn alpha_ratio(&self) -> f64 {
        self.alpha / self.d as f64
    }

    /// `|1/q - 1/p + alpha/d|` relative to `1/p`.
    pub fn scaling_residual(&self) -> f64 {
        let inv_p = 1.0 / self.p;
        (1.0 / self.q - inv_p + self.alpha_ratio()).abs() / inv_p
    }

    /// The pair `(q', p', alpha, d)`.
    pub fn dual(&self) -> Self {
        Self {
            p: self.q_conj,
            q: self.p_conj,
            alpha: self.alpha,
            d: self.d,
            p_conj: self.q,
            q_conj: self.p,
        }
    }
}

/// Geometric constants of the group and its sub-Riemannian structure.
///
/// The defaults (`b = 1`, `D = 1`, `c = 1`, all drift constants zero) are
/// placeholders: the true values are group dependent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroupGeometry {
    /// Local dimension.
    pub d: u32,
    /// Exponential volume growth rate `D`.
    pub growth_rate: f64,
    /// Gaussian decay `b` of the heat kernel.
    pub b: f64,
    /// Heat-kernel prefactor `c`.
    pub c_heat: f64,
    /// Drift norm of the modular function.
    pub c_delta: f64,
    /// Drift norm of the character.
    pub c_chi: f64,
    /// Drift norm of `delta / chi`.
    pub c_delta_chi_inv: f64,
}

impl Default for GroupGeometry {
    fn default() -> Self {
        Self {
            d: 3,
            growth_rate: 1.0,
            b: 1.0,
            c_heat: 1.0,
            c_delta: 0.0,
            c_chi: 0.0,
            c_delta_chi_inv: 0.0,
        }
    }
}

impl GroupGeometry {
    pub fn with_dim(mut self, d: u32) -> Self {
        self.d = d;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::domain("geometry: d must be >= 1"));
        }
        let nonneg = [
            ("D", self.growth_rate),
            ("c_delta", self.c_delta),
            ("c_chi", self.c_chi),
            ("c_delta_chi_inv", self.c_delta_chi_inv),
        ];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!("geometry: {name} must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("b", self.b), ("c", self.c_heat)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("geometry: {name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// `b_0 = sqrt(b) / 2`
    pub fn b0(&self) -> f64 {
        self.b.sqrt() / 2.0
    }

    /// Global decay rate `2D + b_0` of the left-measure kernel envelope.
    pub fn decay_rate(&self) -> f64 {
        2.0 * self.growth_rate + self.b0()
    }

    /// Builds a geometry from `d`, `D`, `b`, `c`, `c_delta`, `c_chi`,
    /// `c_delta_chi_inv` keys; absent keys keep their default.
    pub fn from_config(cfg: &KeyValueConfig) -> Result<Self> {
        let mut g = Self::default();
        if let Some(d) = cfg.get_u32("d")? {
            g.d = d;
        }
        let fields: [(&str, &mut f64); 6] = [
            ("D", &mut g.growth_rate),
            ("b", &mut g.b),
            ("c", &mut g.c_heat),
            ("c_delta", &mut g.c_delta),
            ("c_chi", &mut g.c_chi),
            ("c_delta_chi_inv", &mut g.c_delta_chi_inv),
        ];
        for (key, slot) in fields {
            if let Some(v) = cfg.get_f64(key)? {
                *slot = v;
            }
        }
        g.validate()?;
        Ok(g)
    }
}

/// `max{(2/b)(2D + b_0)^2 - c_delta^2/4, 1}`
pub fn tau_delta(g: &GroupGeometry) -> f64 {
    let lead = 2.0 / g.b * g.decay_rate().powi(2);
    (lead - g.c_delta * g.c_delta / 4.0).max(1.0)
}

/// `max{(2/b)(c_delta_chi_inv + 2D + b_0)^2 - c_chi^2/4, 1}`
pub fn tau_chi(g: &GroupGeometry) -> f64 {
    let lead = 2.0 / g.b * (g.c_delta_chi_inv + g.decay_rate()).powi(2);
    (lead - g.c_chi * g.c_chi / 4.0).max(1.0)
}

/// `s(chi) = e^{c(chi delta^-1)}`, the maximum of `chi/delta` on the unit ball.
pub fn s_chi(c_chi_delta_inv: f64) -> Result<f64> {
    if !(c_chi_delta_inv.is_finite() && c_chi_delta_inv >= 0.0) {
        return Err(Error::domain(format!("s_chi needs a finite argument >= 0, got {c_chi_delta_inv}")));
    }
    Ok(c_chi_delta_inv.exp())
}

/// Cartesian parameter grid. `alpha_fractions` are values of `alpha p / d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub p_values: Vec<f64>,
    pub alpha_fractions: Vec<f64>,
    pub d_values: Vec<u32>,
}

impl Default for ParameterGrid {
    /// 13 values of `p` with `p - 1` geometric in `[0.05, 15]`, fractions
    /// `0.1, ..., 0.9`, and `d = 1..=4`.
    fn default() -> Self {
        let p_values = crate::numeric::log_space(0.05, 15.0, 13).into_iter().map(|x| 1.0 + x).collect();
        let alpha_fractions = (1..=9).map(|i| i as f64 / 10.0).collect();
        Self {
            p_values,
            alpha_fractions,
            d_values: vec![1, 2, 3, 4],
        }
    }
}

impl ParameterGrid {
    /// Doubles the resolution: geometric midpoints in `p - 1`, arithmetic
    /// midpoints in the fractions. Existing nodes are kept.
    pub fn refined(&self) -> Self {
        fn interleave(v: &[f64], mid: impl Fn(f64, f64) -> f64) -> Vec<f64> {
            let mut out = Vec::with_capacity(2 * v.len());
            for w in v.windows(2) {
                out.push(w[0]);
                out.push(mid(w[0], w[1]));
            }
            out.extend(v.last());
            out
        }
        Self {
            p_values: interleave(&self.p_values, |a, b| 1.0 + ((a - 1.0) * (b - 1.0)).sqrt()),
            alpha_fractions: interleave(&self.alpha_fractions, |a, b| 0.5 * (a + b)),
            d_values: self.d_values.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(p) = self.p_values.iter().find(|p| !(p.is_finite() && **p > 1.0)) {
            return Err(Error::domain(format!("grid: p values must lie in (1, inf), got {p}")));
        }
        if let Some(f) = self.alpha_fractions.iter().find(|f| !(**f > 0.0 && **f < 1.0)) {
            return Err(Error::domain(format!("grid: alpha fractions must lie in (0, 1), got {f}")));
        }
        if self.d_values.contains(&0) {
            return Err(Error::domain("grid: d values must be >= 1"));
        }
        Ok(())
    }

    /// Reads `p_values`, `alpha_fractions` and `d_values`; absent keys keep
    /// the default grid's values.
    pub fn from_config(cfg: &KeyValueConfig) -> Result<Self> {
        let mut grid = Self::default();
        if let Some(v) = cfg.get_f64_list("p_values")? {
            grid.p_values = v;
        }
        if let Some(v) = cfg.get_f64_list("alpha_fractions")? {
            grid.alpha_fractions = v;
        }
        if let Some(v) = cfg.get_f64_list("d_values")? {
            grid.d_values = v
                .into_iter()
                .map(|x| {
                    if x.fract() == 0.0 && x >= 1.0 && x <= u32::MAX as f64 {
                        Ok(x as u32)
                    } else {
                        Err(Error::Config(format!("d_values: {x} is not a positive integer")))
                    }
                })
                .collect::<Result<_>>()?;
        }
        grid.validate()?;
        Ok(grid)
    }
}

/// All valid pairs of the grid, ordered lexicographically in `(d, p, alpha)`.
pub fn make_grid(spec: &ParameterGrid) -> Result<Vec<ExponentPair>> {
    spec.validate()?;
    let sorted = |v: &[f64]| {
        let mut v = v.to_vec();
        v.sort_by(f64::total_cmp);
        v.dedup();
        v
    };
    let ps = sorted(&spec.p_values);
    let fracs = sorted(&spec.alpha_fractions);
    let mut ds = spec.d_values.clone();
    ds.sort_unstable();
    ds.dedup();

    let mut out = Vec::with_capacity(ps.len() * fracs.len() * ds.len());
    for &d in &ds {
        for &p in &ps {
            for &f in &fracs {
                if let Ok(pair) = ExponentPair::new(p, f * d as f64 / p, d) {
                    out.push(pair);
                }
            }
        }
    }
    if out.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(out)
}

/// Plain-text `key = value` configuration; `#` starts a comment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KeyValueConfig {
    entries: BTreeMap<String, String>,
}

impl KeyValueConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(':'))
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(Error::Config(format!("line {}: empty key", lineno + 1)));
            }
            if entries.insert(key.to_string(), value.trim().to_string()).is_some() {
                return Err(Error::Config(format!("line {}: duplicate key `{key}`", lineno + 1)));
            }
        }
        Ok(Self { entries })
    }

    pub fn keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("{key}: `{v}` is not a number")))
            })
            .transpose()
    }

    pub fn get_u32(&self, key: &str) -> Result<Option<u32>> {
        self.get(key)
            .map(|v| {
                v.parse::<u32>()
                    .map_err(|_| Error::Config(format!("{key}: `{v}` is not a non-negative integer")))
            })
            .transpose()
    }

    pub fn get_f64_list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        let Some(v) = self.get(key) else { return Ok(None) };
        let items = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| {
                s.parse::<f64>()
                    .map_err(|_| Error::Config(format!("{key}: `{s}` is not a number")))
            })
            .collect::<Result<Vec<_>>>()?;
        if items.is_empty() {
            return Err(Error::Config(format!("{key}: empty list")));
        }
        Ok(Some(items))
    }
}
