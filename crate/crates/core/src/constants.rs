//! Closed-form constants: `S`, `Q`, `F`, the Lieb-type upper bound for the
//! homogeneous embedding constant, the Moser-Trudinger thresholds and the
//! multiplier bound for `Delta^{a/2} (I + Delta)^{-a/2}`.
//!
//! Products of powers are evaluated in log space and exponentiated once.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::params::ExponentPair;
pub use crate::special::log_gamma;
use crate::special::ln_gamma_pos;

fn check_pq(p: f64, q: f64) -> Result<()> {
    if !(p.is_finite() && q.is_finite() && p > 1.0 && q >= p) {
        return Err(Error::domain(format!("need 1 < p <= q < inf, got p = {p}, q = {q}")));
    }
    Ok(())
}

/// `Q(p, q) = q^{1 - 1/p} / (p - 1)`.
pub fn q_constant(p: f64, q: f64) -> Result<f64> {
    check_pq(p, q)?;
    Ok(q.powf((p - 1.0) / p) / (p - 1.0))
}

/// `Q(q', p') = p'^{1/q} / (q' - 1)`, using `1/(q' - 1) = q - 1`.
pub fn q_dual_constant(p: f64, q: f64) -> Result<f64> {
    check_pq(p, q)?;
    let p_conj = p / (p - 1.0);
    Ok(p_conj.powf(1.0 / q) * (q - 1.0))
}

/// `S(p, q) = min(q^{1/p'}/(p - 1), p'^{1/q}/(q' - 1))` for arbitrary
/// `1 < p <= q`.
pub fn s_constant_pq(p: f64, q: f64) -> Result<f64> {
    Ok(q_constant(p, q)?.min(q_dual_constant(p, q)?))
}

/// `S(p, q)` of an exponent pair.
pub fn s_constant(pair: &ExponentPair) -> f64 {
    s_constant_pq(pair.p(), pair.q()).expect("exponent pairs satisfy 1 < p <= q")
}

/// `F(p, q) = [1/(1/p' + 1/q)] [1/(p q')] (p'^{1/q} + q^{1/p'})`.
pub fn f_constant(p: f64, q: f64) -> Result<f64> {
    check_pq(p, q)?;
    let inv_p_conj = (p - 1.0) / p;
    let p_conj = p / (p - 1.0);
    let inv_q_conj = (q - 1.0) / q;
    let lead = 1.0 / (inv_p_conj + 1.0 / q) * inv_q_conj / p;
    Ok(lead * (p_conj.powf(1.0 / q) + q.powf(inv_p_conj)))
}

/// Lieb's bound for the homogeneous embedding constant,
///
/// `(2 pi)^{-a} Gamma((d-a)/2)/Gamma(a/2) (d/a) (w/d)^{1-a/d} (1-a/d)^{1-a/d}
///  (1/(p q')) (p'^{1/p'+1/q} + q^{1/p'+1/q})`
///
/// with `w = 2 pi^{d/2} / Gamma(d/2)` the area of the unit sphere.
pub fn lieb_upper_bound(pair: &ExponentPair) -> Result<f64> {
    let a = pair.alpha();
    if a <= 0.0 {
        return Err(Error::domain("lieb_upper_bound needs alpha > 0 (the bound carries 1/alpha)"));
    }
    let d = pair.d() as f64;
    let (p, q) = (pair.p(), pair.q());
    let ratio = a / d;
    let ln_sphere = std::f64::consts::LN_2 + 0.5 * d * std::f64::consts::PI.ln() - ln_gamma_pos(0.5 * d);
    let expo = (p - 1.0) / p + 1.0 / q;
    let p_conj = p / (p - 1.0);
    let (x, y) = (expo * p_conj.ln(), expo * q.ln());
    let ln_sum = x.max(y) + (-(x - y).abs()).exp().ln_1p();

    let ln_val = -a * (2.0 * std::f64::consts::PI).ln() + ln_gamma_pos(0.5 * (d - a)) - ln_gamma_pos(0.5 * a)
        + (d / a).ln()
        + (1.0 - ratio) * (ln_sphere - d.ln())
        + (1.0 - ratio) * (1.0 - ratio).ln()
        - p.ln()
        + ((q - 1.0) / q).ln()
        + ln_sum;
    let v = ln_val.exp();
    if !(v.is_finite() && v > 0.0) {
        return Err(Error::Overflow(format!("lieb_upper_bound at p = {p}, q = {q}, d = {d}")));
    }
    Ok(v)
}

/// Global Moser-Trudinger threshold `[e (cp a1 (p'-1))^{p'} p']^{-1}`.
pub fn gamma_one(p: f64, cp: f64, a1: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) || !(cp >= 1.0) || !(a1 > 0.0) {
        return Err(Error::domain(format!("gamma_one needs p > 1, cp >= 1, a1 > 0; got {p}, {cp}, {a1}")));
    }
    let p_conj = p / (p - 1.0);
    let ln_inv = 1.0 + p_conj * (cp * a1 / (p - 1.0)).ln() + p_conj.ln();
    Ok((-ln_inv).exp())
}

/// Local threshold `[e (a2 s^2 / (p - 1))^{p'}]^{-1}`.
pub fn gamma_two(p: f64, a2: f64, s: f64) -> Result<f64> {
    if !(p > 1.0 && p.is_finite()) || !(a2 > 0.0) || !(s >= 1.0) {
        return Err(Error::domain(format!("gamma_two needs p > 1, a2 > 0, s >= 1; got {p}, {a2}, {s}")));
    }
    let p_conj = p / (p - 1.0);
    let ln_inv = 1.0 + p_conj * (a2 * s * s / (p - 1.0)).ln();
    Ok((-ln_inv).exp())
}

/// `(s / (p - 1)) (1 + q/p')^{1/q + 1/p'}`
pub fn a2_bound_factor(p: f64, q: f64, s: f64) -> Result<f64> {
    check_pq(p, q)?;
    if !(s >= 1.0 && s.is_finite()) {
        return Err(Error::domain(format!("a2_bound_factor needs s >= 1, got {s}")));
    }
    let inv_p_conj = (p - 1.0) / p;
    let base = 1.0 + q * inv_p_conj;
    Ok(s / (p - 1.0) * base.powf(1.0 / q + inv_p_conj))
}

/// Total-variation bound `1 + sum_{j>=1} |A_j|` for the Taylor coefficients of
/// `(1 - t)^{alpha/2}`.
///
/// The first `terms` coefficients are summed explicitly. Past index
/// `1 + alpha/2` the coefficients keep one sign, so the remaining tail equals
/// `|-1 - sum_{j<=terms} A_j|`: the full series vanishes at `t = 1`.
pub fn b1_multiplier_bound(alpha: f64, terms: usize) -> Result<f64> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::domain(format!("b1_multiplier_bound needs alpha > 0, got {alpha}")));
    }
    if terms < 10 {
        return Err(Error::domain(format!("b1_multiplier_bound needs at least 10 terms, got {terms}")));
    }
    let half = 0.5 * alpha;
    let sign_stable_from = (1.0 + half).floor() as usize + 1;
    if terms < sign_stable_from {
        return Err(Error::Convergence(format!(
            "coefficients only keep a constant sign from j = {sign_stable_from}; {terms} terms cannot bound the tail"
        )));
    }
    let mut coef = 1.0f64;
    let mut abs_sum = NeumaierSum::new();
    let mut signed_sum = NeumaierSum::new();
    for j in 0..terms {
        coef *= (j as f64 - half) / (j as f64 + 1.0);
        abs_sum.add(coef.abs());
        signed_sum.add(coef);
    }
    let tail = -1.0 - signed_sum.value();
    // the tail must share the sign of the last coefficient (or vanish)
    let scale = abs_sum.value().max(1.0) * 64.0 * f64::EPSILON;
    if coef != 0.0 && tail.abs() > scale && tail.signum() != coef.signum() {
        return Err(Error::Convergence(format!(
            "tail {tail:e} disagrees in sign with the last coefficient {coef:e}"
        )));
    }
    let total = 1.0 + abs_sum.value() + tail.abs();
    if !total.is_finite() {
        return Err(Error::Convergence("multiplier bound is not finite".into()));
    }
    Ok(total)
}

/// The named constants attached to one exponent pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantReport {
    pub pair: ExponentPair,
    pub s: f64,
    pub q: f64,
    pub q_dual: f64,
    pub f: f64,
    /// Lieb-type bound; absent when `alpha = 0`.
    pub e_h_tilde: Option<f64>,
    pub ratio_eh_over_s: Option<f64>,
}

impl ConstantReport {
    pub fn new(pair: &ExponentPair) -> Result<Self> {
        let (p, q) = (pair.p(), pair.q());
        let qc = q_constant(p, q)?;
        let qd = q_dual_constant(p, q)?;
        let s = qc.min(qd);
        let e_h_tilde = if pair.alpha() > 0.0 { Some(lieb_upper_bound(pair)?) } else { None };
        Ok(Self {
            pair: *pair,
            s,
            q: qc,
            q_dual: qd,
            f: f_constant(p, q)?,
            e_h_tilde,
            ratio_eh_over_s: e_h_tilde.map(|e| e / s),
        })
    }
}

/// An empirical constant fitted over a parameter grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedConstant {
    pub name: String,
    pub value: f64,
    pub grid_hash: String,
    /// Relative tolerance for regression comparison.
    pub tolerance: f64,
}

impl FittedConstant {
    pub fn new(name: impl Into<String>, value: f64, grid_hash: impl Into<String>, tolerance: f64) -> Self {
        Self { name: name.into(), value, grid_hash: grid_hash.into(), tolerance }
    }
}

/// Pointwise checks of the comparison between `F`, `Q` and `S`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonCheck {
    pub pair: ExponentPair,
    /// `q >= p'`, the regime where the two-sided `F ~ Q` claim is made.
    pub conjugate_regime: bool,
    pub f_over_q: f64,
    pub q_over_q_dual: f64,
    pub f_over_s: f64,
}

/// Relative slack allowed on the comparison inequalities for rounding.
pub const COMPARISON_SLACK: f64 = 1e-12;

impl ComparisonCheck {
    pub fn new(pair: &ExponentPair) -> Result<Self> {
        let r = ConstantReport::new(pair)?;
        Ok(Self {
            pair: *pair,
            conjugate_regime: pair.q() >= pair.p_conj(),
            f_over_q: r.f / r.q,
            q_over_q_dual: r.q / r.q_dual,
            f_over_s: r.f / r.s,
        })
    }

    /// Names of the violated claims; empty when all hold.
    pub fn violations(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        let lo = 1.0 - COMPARISON_SLACK;
        let hi = 1.0 + COMPARISON_SLACK;
        if self.conjugate_regime {
            if self.f_over_q < 0.25 * lo {
                v.push("F >= Q/4");
            }
            if self.f_over_q > 4.0 * hi {
                v.push("F <= 4Q");
            }
            if self.q_over_q_dual > hi {
                v.push("Q(p,q) <= Q(q',p')");
            }
        }
        if self.f_over_s < 0.25 * lo {
            v.push("F >= S/4");
        }
        v
    }
}

/// Range of `E_H~ / S` over the pairs of one dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparabilityBand {
    pub d: u32,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Smallest `B` with `S/B <= E_H~ <= B S` on the grid.
    pub b3: f64,
    pub count: usize,
}

/// One band per dimension present in `pairs`, ascending in `d`. Pairs with
/// `alpha = 0` are skipped.
pub fn comparability_bands(pairs: &[ExponentPair]) -> Result<Vec<ComparabilityBand>> {
    let mut bands: Vec<ComparabilityBand> = Vec::new();
    let mut dims: Vec<u32> = pairs.iter().map(|p| p.d()).collect();
    dims.sort_unstable();
    dims.dedup();
    for d in dims {
        let mut min_ratio = f64::INFINITY;
        let mut max_ratio = 0.0f64;
        let mut count = 0;
        for pair in pairs.iter().filter(|p| p.d() == d && p.alpha() > 0.0) {
            let ratio = lieb_upper_bound(pair)? / s_constant(pair);
            min_ratio = min_ratio.min(ratio);
            max_ratio = max_ratio.max(ratio);
            count += 1;
        }
        if count == 0 {
            continue;
        }
        bands.push(ComparabilityBand { d, min_ratio, max_ratio, b3: max_ratio.max(1.0 / min_ratio), count });
    }
    if bands.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(bands)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1e-300)
    }

    fn pair(p: f64, q: f64, d: u32) -> ExponentPair {
        ExponentPair::from_pq(p, q, d).unwrap()
    }

    #[test]
    fn s_examples() {
        assert!(close(s_constant(&pair(2.0, 2.0, 3)), 2f64.sqrt(), 1e-15));
        assert!(close(s_constant(&pair(2.0, 4.0, 4)), 2.0, 1e-15));
        assert!(close(s_constant(&pair(4.0 / 3.0, 2.0, 4)), 2.0, 1e-14));
    }

    #[test]
    fn q_examples() {
        assert!(close(q_constant(2.0, 2.0).unwrap(), 2f64.sqrt(), 1e-15));
        assert!(close(q_constant(2.0, 4.0).unwrap(), 2.0, 1e-15));
        assert!(close(q_constant(4.0 / 3.0, 2.0).unwrap(), 3.0 * 2f64.powf(0.25), 1e-14));
        assert!(q_constant(2.0, 1.5).is_err());
        assert!(q_constant(1.0, 2.0).is_err());
    }

    #[test]
    fn q_dual_matches_swapped_q() {
        for (p, q) in [(2.0, 4.0), (1.3, 7.0), (3.0, 3.5)] {
            let (pc, qc) = (p / (p - 1.0), q / (q - 1.0));
            let swapped = q_constant(qc, pc).unwrap();
            assert!(close(q_dual_constant(p, q).unwrap(), swapped, 1e-13));
        }
    }

    #[test]
    fn f_examples() {
        assert!(close(f_constant(2.0, 2.0).unwrap(), 2f64.sqrt() / 2.0, 1e-15));
        let expect = 0.5 * (2f64.powf(0.25) + 2.0);
        assert!(close(f_constant(2.0, 4.0).unwrap(), expect, 1e-15));
        assert!(close(f_constant(4.0 / 3.0, 2.0).unwrap(), expect, 1e-14));
        assert!((expect - 1.594_604).abs() < 1e-6);
    }

    #[test]
    fn lieb_example() {
        let pr = pair(2.0, 4.0, 4);
        let v = lieb_upper_bound(&pr).unwrap();
        // hand evaluation: (1/2pi)(1/2)(4)(2 pi^2 / 4)^{3/4}(3/4)^{3/4}(3/8)(2^{3/4} + 4^{3/4})
        let pi = std::f64::consts::PI;
        let hand = 1.0 / (2.0 * pi) * 0.5 * 4.0 * (pi * pi / 2.0).powf(0.75) * 0.75f64.powf(0.75) * 0.375
            * (2f64.powf(0.75) + 4f64.powf(0.75));
        assert!(close(v, hand, 1e-13));
        assert!((v - 1.4366).abs() < 1e-3);
        assert!((v / s_constant(&pr) - 0.718).abs() < 1e-3);
    }

    #[test]
    fn lieb_rejects_alpha_zero() {
        assert!(matches!(lieb_upper_bound(&pair(2.0, 2.0, 3)), Err(Error::Domain(_))));
    }

    #[test]
    fn lieb_survives_extremes() {
        let pr = ExponentPair::new(1.0001, 0.999 * 40.0 / 1.0001, 40).unwrap();
        let v = lieb_upper_bound(&pr).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn gamma_one_examples() {
        let e = std::f64::consts::E;
        assert!(close(gamma_one(2.0, 1.0, 1.0).unwrap(), 1.0 / (2.0 * e), 1e-15));
        assert!(close(gamma_one(2.0, 2.0, 1.0).unwrap(), 1.0 / (8.0 * e), 1e-15));
        let mut last = f64::INFINITY;
        for a1 in [0.1, 0.5, 1.0, 2.0, 10.0] {
            let g = gamma_one(3.0, 1.5, a1).unwrap();
            assert!(g < last);
            last = g;
        }
        assert!(gamma_one(2.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn gamma_two_examples() {
        let e = std::f64::consts::E;
        assert!(close(gamma_two(2.0, 1.0, 1.0).unwrap(), 1.0 / e, 1e-15));
        assert!(close(gamma_two(2.0, 1.0, 2f64.sqrt()).unwrap(), 1.0 / (4.0 * e), 1e-14));
        assert!(gamma_two(2.0, 1.0, 1.5).unwrap() < gamma_two(2.0, 1.0, 1.2).unwrap());
        assert!(gamma_two(2.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn b1_examples() {
        for alpha in [0.5, 1.0, 2.0] {
            assert!((b1_multiplier_bound(alpha, 10).unwrap() - 2.0).abs() < 1e-10, "alpha {alpha}");
            assert!((b1_multiplier_bound(alpha, 1000).unwrap() - 2.0).abs() < 1e-10);
        }
        // for 2 < alpha < 4 the sum telescopes to alpha
        assert!((b1_multiplier_bound(3.0, 50).unwrap() - 3.0).abs() < 1e-10);
        assert!((b1_multiplier_bound(3.5, 50).unwrap() - 3.5).abs() < 1e-10);
        assert!(b1_multiplier_bound(0.0, 50).is_err());
        assert!(b1_multiplier_bound(1.0, 5).is_err());
        assert!(matches!(b1_multiplier_bound(30.0, 10), Err(Error::Convergence(_))));
    }

    #[test]
    fn a2_examples() {
        assert!(close(a2_bound_factor(2.0, 2.0, 1.0).unwrap(), 2.0, 1e-15));
        assert!(close(a2_bound_factor(2.0, 4.0, 1.0).unwrap(), 3f64.powf(0.75), 1e-15));
        assert!((a2_bound_factor(2.0, 4.0, 1.0).unwrap() - 2.279_507).abs() < 1e-6);
        let base = a2_bound_factor(1.7, 5.0, 1.0).unwrap();
        assert!(close(a2_bound_factor(1.7, 5.0, 3.0).unwrap(), 3.0 * base, 1e-15));
    }

    #[test]
    fn report_s_is_min_of_q_values() {
        let r = ConstantReport::new(&pair(2.0, 4.0, 4)).unwrap();
        assert_eq!(r.s, r.q.min(r.q_dual));
        assert!(r.e_h_tilde.is_some());
        let r = ConstantReport::new(&pair(2.0, 2.0, 4)).unwrap();
        assert!(r.e_h_tilde.is_none());
    }

    #[test]
    fn comparison_on_sample() {
        let c = ComparisonCheck::new(&pair(2.0, 4.0, 4)).unwrap();
        assert!(c.conjugate_regime);
        assert!(c.violations().is_empty());
    }
}
