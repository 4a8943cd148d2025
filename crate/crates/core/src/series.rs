//! The Moser-Trudinger power series
//! `sum_{k >= ceil(p-1)} g^k/k! c^{p'k} (p'k)^k`, its radius of convergence,
//! and the scaling inequality that rules out a global inequality for
//! non-invariant measures.

use serde::{Deserialize, Serialize};

use crate::constants::s_constant_pq;
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::special::ln_gamma_pos;

pub const MAX_TERMS: u32 = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MTSeriesSpec {
    pub p: f64,
    pub c: f64,
    pub k_max: u32,
}

impl MTSeriesSpec {
    pub fn new(p: f64, c: f64, k_max: u32) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) || !(c > 0.0 && c.is_finite()) {
            return Err(Error::domain(format!("series needs p > 1 and c > 0, got p = {p}, c = {c}")));
        }
        if !(20..=MAX_TERMS).contains(&k_max) {
            return Err(Error::domain(format!("k_max must lie in [20, {MAX_TERMS}], got {k_max}")));
        }
        Ok(Self { p, c, k_max })
    }

    pub fn p_conj(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// First summed index, `ceil(p - 1)`.
    pub fn first_index(&self) -> u32 {
        ((self.p - 1.0).ceil() as u32).max(1)
    }

    /// `ln(term_k / g^k) = -ln k! + p'k ln c + k ln(p'k)`.
    pub fn log_coefficient(&self, k: u32) -> f64 {
        let kf = k as f64;
        let pc = self.p_conj();
        -ln_gamma_pos(kf + 1.0) + pc * kf * self.c.ln() + kf * (pc * kf).ln()
    }

    /// `term_{k+1}/term_k = g c^{p'} p' (1 + 1/k)^k`.
    pub fn term_ratio(&self, gamma: f64, k: u32) -> f64 {
        let kf = k as f64;
        let pc = self.p_conj();
        gamma * self.c.powf(pc) * pc * (kf * (1.0 / kf).ln_1p()).exp()
    }
}

/// `sum_{k = ceil(p-1)}^{K}` of the series terms.
pub fn mt_series_partial(spec: &MTSeriesSpec, gamma: f64, k_upper: u32) -> Result<f64> {
    if k_upper > spec.k_max {
        return Err(Error::domain(format!("K = {k_upper} exceeds k_max = {}", spec.k_max)));
    }
    if !(gamma >= 0.0) {
        return Err(Error::domain("series needs gamma >= 0"));
    }
    if gamma == 0.0 {
        return Ok(0.0);
    }
    let mut sum = NeumaierSum::new();
    for k in spec.first_index()..=k_upper {
        let lt = k as f64 * gamma.ln() + spec.log_coefficient(k);
        if lt > 709.0 {
            return Err(Error::Overflow(format!("series term k = {k} overflows at gamma = {gamma}")));
        }
        sum.add(lt.exp());
    }
    Ok(sum.value())
}

/// Radius `1/L` of the series, with `ln L` extrapolated from the log term
/// ratios at `k_max/2` and `k_max`, whose leading error is `-1/(2k)`.
pub fn mt_series_radius(spec: &MTSeriesSpec) -> Result<f64> {
    let ratio = |k: u32| spec.term_ratio(1.0, k).ln();
    let (hi, lo) = (ratio(spec.k_max), ratio(spec.k_max / 2));
    let ln_l = 2.0 * hi - lo;
    if !ln_l.is_finite() || (hi - lo).abs() > 0.1 {
        return Err(Error::Convergence(format!("radius extrapolation did not settle: {lo} -> {hi}")));
    }
    Ok((-ln_l).exp())
}

/// Closed form `1/(e c^{p'} p')`.
pub fn mt_series_radius_exact(spec: &MTSeriesSpec) -> f64 {
    let pc = spec.p_conj();
    1.0 / (std::f64::consts::E * spec.c.powf(pc) * pc)
}

/// How often the term ratio crosses 1 for `k` in `[ceil(p-1), k_max]`.
pub fn ratio_crossings(spec: &MTSeriesSpec, gamma: f64) -> usize {
    let above: Vec<bool> = (spec.first_index()..=spec.k_max).map(|k| spec.term_ratio(gamma, k) > 1.0).collect();
    above.windows(2).filter(|w| w[0] != w[1]).count()
}

/// `(ln S(p, p'k)^{p'k}, ln (p'k)^k/(p-1)^{p'k})` for `k >= p - 1`.
pub fn s_majorant_logs(p: f64, k: u32) -> Result<(f64, f64)> {
    let pc = p / (p - 1.0);
    let kf = k as f64;
    if kf < p - 1.0 {
        return Err(Error::domain(format!("majorant needs k >= p - 1, got k = {k}, p = {p}")));
    }
    let q = pc * kf;
    let lhs = q * s_constant_pq(p, q)?.ln();
    let rhs = kf * q.ln() - q * (p - 1.0).ln();
    Ok((lhs, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingDivergence {
    pub lhs: f64,
    pub rhs: f64,
}

/// `lhs = sum g^k s^{p'k} m_k/k!` and `rhs = s^{pp'} sum g^k m_k/k!`, with
/// `moments[i]` the moment of index `k = ceil(p) + i`. Terms are compared one
/// by one, so `lhs >= rhs` holds in floating point whenever `s >= 1`.
pub fn mt_scaling_divergence(p: f64, gamma: f64, moments: &[f64], sigma: f64) -> Result<ScalingDivergence> {
    if !(p > 1.0) || !(gamma > 0.0) || !(sigma >= 1.0) || moments.iter().any(|m| !(*m >= 0.0)) {
        return Err(Error::domain("scaling check needs p > 1, gamma > 0, sigma >= 1, moments >= 0"));
    }
    let pc = p / (p - 1.0);
    let k0 = p.ceil() as u32;
    let boundary = sigma.powf(p * pc);
    let (mut lhs, mut rhs) = (0.0, 0.0);
    for (i, &m) in moments.iter().enumerate() {
        if m == 0.0 {
            continue;
        }
        let k = k0 + i as u32;
        let base = m * if k <= 170 {
            gamma.powi(k as i32) / (1..=k).map(f64::from).product::<f64>()
        } else {
            (k as f64 * gamma.ln() - ln_gamma_pos(k as f64 + 1.0)).exp()
        };
        let k = k as f64;
        lhs += base * sigma.powf(pc * k);
        rhs += base * boundary;
    }
    Ok(ScalingDivergence { lhs, rhs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rel_diff;

    #[test]
    fn partial_examples() {
        let s = MTSeriesSpec::new(2.0, 1.0, 200).unwrap();
        assert_eq!(mt_series_partial(&s, 0.0, 50).unwrap(), 0.0);
        let v = mt_series_partial(&s, 0.1, 50).unwrap();
        // direct: sum_{k>=1} 0.1^k (2k)^k / k!
        let mut direct = 0.0;
        let mut fact = 1.0;
        for k in 1..=50 {
            fact *= k as f64;
            direct += 0.1f64.powi(k) * (2.0 * k as f64).powi(k) / fact;
        }
        assert!(rel_diff(v, direct) < 1e-12);
        assert!(mt_series_partial(&s, 0.1, 60).unwrap() >= v);
        assert!(mt_series_partial(&s, 0.11, 50).unwrap() >= v);
        assert!(s.term_ratio(0.25, 150) > 1.0);
        assert!(mt_series_partial(&s, 0.1, 201).is_err());
    }

    #[test]
    fn radius_examples() {
        let s = MTSeriesSpec::new(2.0, 1.0, 2000).unwrap();
        let r = mt_series_radius(&s).unwrap();
        assert!(rel_diff(r, 1.0 / (2.0 * std::f64::consts::E)) < 0.02);
        assert!((r - 0.18394).abs() < 0.02 * 0.18394);
        let s2 = MTSeriesSpec::new(2.0, 2.0, 2000).unwrap();
        assert!(rel_diff(mt_series_radius(&s2).unwrap(), 0.04598) < 0.02);
    }

    #[test]
    fn radius_matches_gamma_one() {
        // gamma_1 = 1/(e (cp a1 (p'-1))^{p'} p') with c = cp a1 (p'-1)
        let (cp, a1) = (1.3, 0.8);
        let p = 2.0;
        let c = cp * a1 * (p / (p - 1.0) - 1.0);
        let s = MTSeriesSpec::new(p, c, 2000).unwrap();
        let g1 = crate::constants::gamma_one(p, cp, a1).unwrap();
        assert!(rel_diff(mt_series_radius(&s).unwrap(), g1) < 1e-6);
    }

    #[test]
    fn crossings() {
        let s = MTSeriesSpec::new(3.0, 0.5, 2000).unwrap();
        let r = mt_series_radius_exact(&s);
        assert_eq!(ratio_crossings(&s, 1.1 * r), 1);
        assert_eq!(ratio_crossings(&s, 0.9 * r), 0);
    }

    #[test]
    fn majorant_holds() {
        for p in [1.2, 2.0, 3.5] {
            for k in ((p - 1.0f64).ceil() as u32).max(1)..=200 {
                let (l, r) = s_majorant_logs(p, k).unwrap();
                assert!(l <= r + 1e-12 * r.abs().max(1.0));
            }
        }
    }

    #[test]
    fn scaling_examples() {
        let eq = mt_scaling_divergence(2.0, 1.0, &[1.0], 2.0).unwrap();
        assert_eq!(eq.lhs, 8.0);
        assert_eq!(eq.rhs, 8.0);
        let st = mt_scaling_divergence(2.0, 1.0, &[0.0, 1.0], 2.0).unwrap();
        assert!(rel_diff(st.lhs, 64.0 / 6.0) < 1e-14);
        assert!(rel_diff(st.rhs, 16.0 / 6.0) < 1e-14);
        let one = mt_scaling_divergence(2.7, 0.3, &[1.0, 0.5, 2.0], 1.0).unwrap();
        assert_eq!(one.lhs, one.rhs);
    }
}
