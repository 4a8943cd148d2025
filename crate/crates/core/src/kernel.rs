//! Upper envelope of the Bessel-Green kernel, its local and global
//! normalisations, and the norm computations behind the weak-type bounds,
//! all under a radial volume model.
//!
//! The envelope is
//! `G(r) = Gamma(alpha/2)^{-1} int_0^inf t^{alpha/2-1} (1 ^ t)^{-d/2} e^{-a t} e^{-b r^2/t} dt`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{log_space, NeumaierSum};
use crate::params::{tau_chi, tau_delta, GroupGeometry};
use crate::quad::{integrate, integrate_to_infinity};
use crate::special::ln_gamma_pos;

/// Default relative tolerance of the envelope quadrature.
pub const KERNEL_REL_TOL: f64 = 1e-8;

/// Radii of the local sup.
pub const LOCAL_GRID: (f64, f64, usize) = (1e-6, 1.0, 200);
/// Radii of the global sup.
pub const GLOBAL_GRID: (f64, f64, usize) = (1.0, 30.0, 120);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenKernelParams {
    pub alpha: f64,
    pub d: u32,
    /// Total exponential damping `tau + c^2/4`.
    pub a: f64,
    pub b: f64,
}

impl GreenKernelParams {
    pub fn new(alpha: f64, d: u32, a: f64, b: f64) -> Result<Self> {
        let kp = Self { alpha, d, a, b };
        kp.validate()?;
        Ok(kp)
    }

    /// Parameters for the modular-function measure: `a = tau_delta + c_delta^2/4`.
    pub fn for_delta(alpha: f64, g: &GroupGeometry) -> Result<Self> {
        g.validate()?;
        Self::new(alpha, g.d, tau_delta(g) + g.c_delta * g.c_delta / 4.0, g.b)
    }

    /// Parameters for a character measure: `a = tau_chi + c_chi^2/4`.
    pub fn for_chi(alpha: f64, g: &GroupGeometry) -> Result<Self> {
        g.validate()?;
        Self::new(alpha, g.d, tau_chi(g) + g.c_chi * g.c_chi / 4.0, g.b)
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.d as f64;
        if self.d == 0 || !(self.alpha > 0.0 && self.alpha < d) {
            return Err(Error::domain(format!("kernel needs 0 < alpha < d, got alpha = {}, d = {}", self.alpha, self.d)));
        }
        if !(self.a >= 1.0 && self.a.is_finite()) {
            return Err(Error::domain(format!("kernel needs a >= 1, got {}", self.a)));
        }
        if !(self.b > 0.0 && self.b.is_finite()) {
            return Err(Error::domain(format!("kernel needs b > 0, got {}", self.b)));
        }
        Ok(())
    }
}

/// Log of `t * integrand` at `t = e^u`.
fn log_integrand(u: f64, kp: &GreenKernelParams, br2: f64) -> f64 {
    0.5 * kp.alpha * u - 0.5 * kp.d as f64 * u.min(0.0) - kp.a * u.exp() - br2 * (-u).exp()
}

/// Positive root of `a x^2 - c x - m = 0`.
fn stationary_point(a: f64, c: f64, m: f64) -> f64 {
    let disc = (c * c + 4.0 * a * m).sqrt();
    if c >= 0.0 {
        (c + disc) / (2.0 * a)
    } else {
        2.0 * m / (disc - c)
    }
}

pub fn green_kernel_upper(r: f64, kp: &GreenKernelParams) -> Result<f64> {
    green_kernel_upper_tol(r, kp, KERNEL_REL_TOL)
}

/// [`green_kernel_upper`] at a chosen relative tolerance.
pub fn green_kernel_upper_tol(r: f64, kp: &GreenKernelParams, rel_tol: f64) -> Result<f64> {
    kp.validate()?;
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::domain(format!("kernel envelope diverges at r = {r}")));
    }
    let br2 = kp.b * r * r;
    let f = |u: f64| log_integrand(u, kp, br2);
    // log-integrand is concave on each side of u = 0
    let u_left = stationary_point(kp.a, 0.5 * (kp.alpha - kp.d as f64), br2).ln().min(0.0);
    let u_right = stationary_point(kp.a, 0.5 * kp.alpha, br2).ln().max(0.0);
    let peak = f(u_left).max(f(u_right));
    let drop = peak - 60.0;

    let mut lo = u_left - 1.0;
    let mut step = 1.0;
    while f(lo) > drop {
        step *= 2.0;
        lo = u_left - step;
    }
    let mut hi = u_right + 1.0;
    step = 1.0;
    while f(hi) > drop {
        step *= 2.0;
        hi = u_right + step;
    }

    let mut cuts = vec![lo, u_left, br2.min(1.0).ln(), 0.0, u_right, hi];
    cuts.retain(|c| *c >= lo && *c <= hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let g = |u: f64| (f(u) - peak).exp();
    let mut total = NeumaierSum::new();
    for w in cuts.windows(2) {
        if w[1] > w[0] {
            total.add(integrate(g, w[0], w[1], rel_tol, rel_tol * 1e-3)?.value);
        }
    }
    let value = (peak - ln_gamma_pos(0.5 * kp.alpha)).exp() * total.value();
    if !(value > 0.0 && value.is_finite()) {
        return Err(Error::Quadrature(format!("kernel envelope at r = {r} is {value}")));
    }
    Ok(value)
}

/// `sup_{r <= 1} G(r) r^{d-alpha} (d-alpha)/alpha` over a 200-point log grid.
pub fn local_bound_constant(kp: &GreenKernelParams) -> Result<f64> {
    local_bound_constant_tol(kp, KERNEL_REL_TOL)
}

pub fn local_bound_constant_tol(kp: &GreenKernelParams, rel_tol: f64) -> Result<f64> {
    let (lo, hi, n) = LOCAL_GRID;
    let vals: Vec<f64> = log_space(lo, hi, n)
        .into_par_iter()
        .map(|r| normalized_local(r, kp, rel_tol))
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

fn normalized_local(r: f64, kp: &GreenKernelParams, rel_tol: f64) -> Result<f64> {
    let d = kp.d as f64;
    Ok(green_kernel_upper_tol(r, kp, rel_tol)? * r.powf(d - kp.alpha) * (d - kp.alpha) / kp.alpha)
}

fn check_global_precondition(kp: &GreenKernelParams, rate: f64, shift: &str) -> Result<()> {
    let threshold = 2.0 / kp.b * rate * rate;
    if kp.a < threshold * (1.0 - 1e-12) {
        return Err(Error::domain(format!(
            "a = {} is below the {shift} threshold (2/b)(decay rate)^2 = {threshold}",
            kp.a
        )));
    }
    Ok(())
}

fn global_sup(kp: &GreenKernelParams, rate: f64) -> Result<f64> {
    let (lo, hi, n) = GLOBAL_GRID;
    let vals: Vec<f64> = log_space(lo, hi, n)
        .into_par_iter()
        .map(|r| Ok(green_kernel_upper(r, kp)? * (rate * r).exp()))
        .collect::<Result<_>>()?;
    Ok(vals.into_iter().fold(0.0, f64::max))
}

/// `sup_{1 <= r <= 30} G(r) e^{(2D + b0) r}`. Requires `a >= (2/b)(2D + b0)^2`,
/// which holds when `a = tau_delta + c_delta^2/4`.
pub fn global_bound_constant(kp: &GreenKernelParams, g: &GroupGeometry) -> Result<f64> {
    kp.validate()?;
    let rate = g.decay_rate();
    check_global_precondition(kp, rate, "tau_delta")?;
    global_sup(kp, rate)
}

/// Character version: the decay rate is `2D + c(delta/chi) + b0` and the
/// threshold uses `tau_chi`.
pub fn global_bound_constant_chi(kp: &GreenKernelParams, g: &GroupGeometry) -> Result<f64> {
    kp.validate()?;
    let rate = g.decay_rate() + g.c_delta_chi_inv;
    check_global_precondition(kp, rate, "tau_chi")?;
    global_sup(kp, rate)
}

/// One row of the envelope table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeRow {
    pub r: f64,
    pub green: f64,
    pub normalized_local: f64,
    pub normalized_global: f64,
}

pub fn envelope_table(kp: &GreenKernelParams, g: &GroupGeometry, radii: &[f64]) -> Result<Vec<EnvelopeRow>> {
    let d = kp.d as f64;
    radii
        .par_iter()
        .map(|&r| {
            let green = green_kernel_upper(r, kp)?;
            Ok(EnvelopeRow {
                r,
                green,
                normalized_local: green * r.powf(d - kp.alpha) * (d - kp.alpha) / kp.alpha,
                normalized_global: green * (g.decay_rate() * r).exp(),
            })
        })
        .collect()
}

/// Stand-in for the group measure: density `c_local r^{d-1}` on the unit
/// ball and shell masses at most `c_local e^{D 2^{k+1}}` on `2^k <= r < 2^{k+1}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialVolumeModel {
    pub d: u32,
    pub growth_rate: f64,
    pub c_local: f64,
}

impl Default for RadialVolumeModel {
    fn default() -> Self {
        Self { d: 3, growth_rate: 1.0, c_local: 1.0 }
    }
}

impl RadialVolumeModel {
    pub fn from_geometry(g: &GroupGeometry) -> Self {
        Self { d: g.d, growth_rate: g.growth_rate, c_local: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || !(self.c_local > 0.0) || !(self.growth_rate >= 0.0) {
            return Err(Error::domain("volume model needs d >= 1, c_local > 0, D >= 0"));
        }
        Ok(())
    }

    pub fn density(&self, r: f64) -> f64 {
        assert!((0.0..=1.0).contains(&r), "local density is defined on the unit ball");
        self.c_local * r.powi(self.d as i32 - 1)
    }

    /// Mass of the ball of radius `r <= 1`.
    pub fn ball_volume(&self, r: f64) -> f64 {
        self.c_local * r.powi(self.d as i32) / self.d as f64
    }

    pub fn shell_mass_bound(&self, k: u32) -> f64 {
        self.c_local * (self.growth_rate * 2f64.powi(k as i32 + 1)).exp()
    }
}

/// Norms of the kernel `|x|^{alpha - d}` split at radius `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KAlphaNorms {
    /// `L^1` norm of the piece on `B_s`.
    pub l1_inner: f64,
    /// `r_exp`-th power of the `L^{r_exp}` norm of the piece on `B_1 \ B_s`.
    pub lr_outer_pow: f64,
}

fn check_kalpha(alpha: f64, d: u32, s: f64, r_exp: f64, model: &RadialVolumeModel) -> Result<f64> {
    model.validate()?;
    let df = d as f64;
    if d != model.d {
        return Err(Error::domain("kalpha_norms: dimension differs from the volume model"));
    }
    if !(alpha > 0.0 && alpha < df) || !(s > 0.0 && s <= 1.0) || !(r_exp >= 1.0) {
        return Err(Error::domain(format!("kalpha_norms needs 0 < alpha < d, 0 < s <= 1, r >= 1; got {alpha}, {s}, {r_exp}")));
    }
    let expo = (alpha - df) * r_exp + df;
    if s < 1.0 && expo.abs() < 1e-12 {
        return Err(Error::domain("kalpha_norms: degenerate exponent (alpha - d) r + d = 0"));
    }
    Ok(expo)
}

/// Closed forms `c s^alpha/alpha` and `c (s^E - 1)/((d - alpha) r - d)` with
/// `E = (alpha - d) r + d`.
pub fn kalpha_norms(alpha: f64, d: u32, s: f64, r_exp: f64, model: &RadialVolumeModel) -> Result<KAlphaNorms> {
    let expo = check_kalpha(alpha, d, s, r_exp, model)?;
    let c = model.c_local;
    let outer = if s == 1.0 { 0.0 } else { c * (-(expo * s.ln()).exp_m1()) / expo };
    Ok(KAlphaNorms { l1_inner: c * s.powf(alpha) / alpha, lr_outer_pow: outer })
}

/// The same norms by quadrature in `u = -ln r`.
pub fn kalpha_norms_quadrature(alpha: f64, d: u32, s: f64, r_exp: f64, model: &RadialVolumeModel) -> Result<KAlphaNorms> {
    let expo = check_kalpha(alpha, d, s, r_exp, model)?;
    let c = model.c_local;
    let u_s = -s.ln();
    let inner = integrate_to_infinity(|u| c * (-alpha * u).exp(), u_s, 1e-13, 0.0)?.value;
    let outer = if s == 1.0 { 0.0 } else { integrate(|u| c * (-expo * u).exp(), 0.0, u_s, 1e-13, 0.0)?.value };
    Ok(KAlphaNorms { l1_inner: inner, lr_outer_pow: outer })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CutoffMode {
    /// `p~ > 1`.
    Integrable,
    /// `p~ = 1`.
    Endpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSchedule {
    pub mode: CutoffMode,
    pub p_t: f64,
    pub q_t: f64,
    pub alpha: f64,
    pub d: u32,
}

impl CutoffSchedule {
    pub fn integrable(p_t: f64, alpha: f64, d: u32) -> Result<Self> {
        let df = d as f64;
        if !(p_t > 1.0 && alpha > 0.0 && alpha * p_t < df) {
            return Err(Error::domain("integrable cutoff needs p > 1 and 0 < alpha < d/p"));
        }
        let q_t = 1.0 / (1.0 / p_t - alpha / df);
        Ok(Self { mode: CutoffMode::Integrable, p_t, q_t, alpha, d })
    }

    pub fn endpoint(alpha: f64, d: u32) -> Result<Self> {
        let df = d as f64;
        if !(alpha > 0.0 && alpha < df) {
            return Err(Error::domain("endpoint cutoff needs 0 < alpha < d"));
        }
        Ok(Self { mode: CutoffMode::Endpoint, p_t: 1.0, q_t: df / (df - alpha), alpha, d })
    }

    fn outer_exponent(&self) -> f64 {
        let df = self.d as f64;
        let pc = self.p_t / (self.p_t - 1.0);
        (self.alpha - df) * pc + df
    }
}

/// The splitting radius `s(t) <= 1`.
pub fn cutoff_s(t: f64, sched: &CutoffSchedule) -> f64 {
    cutoff_ln_s(t, sched).exp()
}

/// `ln s(t) <= 0`.
pub fn cutoff_ln_s(t: f64, sched: &CutoffSchedule) -> f64 {
    assert!(t > 0.0, "cutoff_s needs t > 0");
    let df = sched.d as f64;
    match sched.mode {
        CutoffMode::Integrable => {
            let pc = sched.p_t / (sched.p_t - 1.0);
            let ln_bracket = (df * pc / sched.q_t * (pc * (0.5 * t).ln()).exp()).ln_1p();
            (ln_bracket / sched.outer_exponent()).min(0.0)
        }
        CutoffMode::Endpoint => {
            if t < 2.0 {
                0.0
            } else {
                ((0.5 * t).ln_1p() / (sched.alpha - df)).min(0.0)
            }
        }
    }
}

/// Bound on `||f * K^{(2)}_{alpha, s(t)}||_inf / ||f||_p` with unit volume
/// constant: `||K^{(2)}||_{p'}` in the integrable mode, `sup K^{(2)}` at the
/// endpoint. At most `t/2` resp. `t`, so the second super-level set is empty.
pub fn outer_sup_bound(t: f64, sched: &CutoffSchedule) -> f64 {
    let ln_s = cutoff_ln_s(t, sched);
    if ln_s >= 0.0 {
        return 0.0;
    }
    let df = sched.d as f64;
    match sched.mode {
        CutoffMode::Integrable => {
            let pc = sched.p_t / (sched.p_t - 1.0);
            let e = sched.outer_exponent();
            ((-(e * ln_s).exp_m1() / e).ln() / pc).exp()
        }
        CutoffMode::Endpoint => ((sched.alpha - df) * ln_s).exp(),
    }
}

/// Weak-type constant with unit volume constant:
/// `alpha^{p alpha/d - 1} (q/(d p'))^{(p-1) alpha/d}` for `p > 1`,
/// `alpha^{-1/q}` for `p = 1`.
pub fn weak_type_constant(p_t: f64, q_t: f64, alpha: f64, d: u32) -> Result<f64> {
    let df = d as f64;
    if !(p_t >= 1.0 && alpha > 0.0 && alpha < df && q_t.is_finite()) {
        return Err(Error::domain(format!("weak_type_constant needs p >= 1, 0 < alpha < d; got {p_t}, {alpha}, {d}")));
    }
    let residual = (1.0 / q_t - (1.0 / p_t - alpha / df)).abs();
    if residual > 1e-12 {
        return Err(Error::domain(format!("weak_type_constant: 1/q != 1/p - alpha/d (residual {residual:e})")));
    }
    if p_t == 1.0 {
        return Ok((-alpha.ln() / q_t).exp());
    }
    let pc = p_t / (p_t - 1.0);
    let ln_val = (p_t * alpha / df - 1.0) * alpha.ln() + (p_t - 1.0) * alpha / df * (q_t / (df * pc)).ln();
    Ok(ln_val.exp())
}

/// `sum_{k >= 0} exp(-r (2D + b0) 2^k + D 2^{k+1})`, stopped once terms drop
/// below `1e-18`.
pub fn tilde_k_norm(r_exp: f64, g: &GroupGeometry) -> Result<f64> {
    g.validate()?;
    if !(r_exp >= 1.0 && r_exp.is_finite()) {
        return Err(Error::domain(format!("tilde_k_norm needs r >= 1, got {r_exp}")));
    }
    let slope = -r_exp * g.decay_rate() + 2.0 * g.growth_rate;
    debug_assert!(slope < 0.0);
    let mut sum = NeumaierSum::new();
    for k in 0..64 {
        let term = (slope * 2f64.powi(k)).exp();
        sum.add(term);
        if term < 1e-18 {
            break;
        }
    }
    Ok(sum.value())
}

/// `L^r` norm over the unit ball of `s_factor (chi/delta)^{1/p} G^{d/p, loc}`
/// with `r = 1/(1/q + 1/p')`: `(s_factor/(p - 1)) (c_local q/(d r))^{1/r}`.
pub fn chi_weighted_local_norm(p: f64, q: f64, d: u32, s_factor: f64, model: &RadialVolumeModel) -> Result<f64> {
    let r = check_chi_local(p, q, d, s_factor, model)?;
    let df = d as f64;
    Ok(s_factor / (p - 1.0) * (model.c_local * q / (df * r)).powf(1.0 / r))
}

/// [`chi_weighted_local_norm`] with the radial integral done by quadrature.
pub fn chi_weighted_local_norm_quadrature(p: f64, q: f64, d: u32, s_factor: f64, model: &RadialVolumeModel) -> Result<f64> {
    let r = check_chi_local(p, q, d, s_factor, model)?;
    let df = d as f64;
    let alpha = df / p;
    // int_0^1 (x^{alpha-d})^r c x^{d-1} dx with x = e^{-u}
    let expo = (alpha - df) * r + df;
    let c = model.c_local;
    let integral = integrate_to_infinity(|u| c * (-expo * u).exp(), 0.0, 1e-13, 0.0)?.value;
    Ok(s_factor * alpha / (df - alpha) * integral.powf(1.0 / r))
}

fn check_chi_local(p: f64, q: f64, d: u32, s_factor: f64, model: &RadialVolumeModel) -> Result<f64> {
    model.validate()?;
    if !(p > 1.0 && q >= p && q.is_finite()) || !(s_factor >= 1.0) || d == 0 {
        return Err(Error::domain(format!("chi_weighted_local_norm needs 1 < p <= q, s >= 1; got {p}, {q}, {s_factor}")));
    }
    Ok(1.0 / (1.0 / q + (p - 1.0) / p))
}

/// The weight `e^{c(chi/delta)(1/p - 1/2) r}` is absorbed by the extra decay
/// `e^{-c(delta/chi) r}` of the character kernel, leaving [`tilde_k_norm`].
pub fn chi_global_norm(r_exp: f64, g: &GroupGeometry) -> Result<f64> {
    tilde_k_norm(r_exp, g)
}
