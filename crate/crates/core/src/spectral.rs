//! Periodic-box proxy: Bessel operators `(tau + |xi|^2)^{alpha/2}` as Fourier
//! multipliers, `L^p` norms by Riemann sums, and the embedding, Moser-Trudinger
//! and interpolation functionals built on them.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::constants::s_constant;
use crate::error::{Error, Result};
use crate::numeric::NeumaierSum;
use crate::params::ExponentPair;
use crate::special::ln_gamma_pos;

/// Largest grid, in points.
pub const MAX_POINTS: usize = 1 << 22;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TorusGrid {
    dim: u32,
    n: usize,
    box_length: f64,
}

impl TorusGrid {
    pub fn new(dim: u32, n: usize, box_length: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::domain(format!("grid dimension must be 1, 2 or 3, got {dim}")));
        }
        if !n.is_power_of_two() || !(2..=256).contains(&n) {
            return Err(Error::domain(format!("points per axis must be a power of two in [2, 256], got {n}")));
        }
        if n.pow(dim) > MAX_POINTS {
            return Err(Error::domain("grid exceeds 2^22 points"));
        }
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(Error::domain(format!("box length must be positive, got {box_length}")));
        }
        Ok(Self { dim, n, box_length })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.box_length / self.n as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Per-axis indices of a flat index; the last axis varies fastest.
    fn axes(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in (0..self.dim as usize).rev() {
            out[a] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    /// Coordinates of a point, centred so that index `n/2` sits at the origin.
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let h = self.spacing();
        let half = (self.n / 2) as f64;
        let ax = self.axes(idx);
        let mut out = [0.0; 3];
        for a in 0..self.dim as usize {
            out[a] = (ax[a] as f64 - half) * h;
        }
        out
    }

    /// `|2 pi k / L|^2` for the frequency at a flat index.
    pub fn freq_sq(&self, idx: usize) -> f64 {
        let n = self.n as i64;
        let scale = 2.0 * PI / self.box_length;
        self.axes(idx)[..self.dim as usize]
            .iter()
            .map(|&j| {
                let k = if (j as i64) < n / 2 { j as i64 } else { j as i64 - n };
                let w = scale * k as f64;
                w * w
            })
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    pub grid: TorusGrid,
    pub values: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(grid: TorusGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::domain(format!("field has {} values for {} grid points", values.len(), grid.len())));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: TorusGrid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let values = (0..grid.len()).map(|i| Complex64::new(f(grid.point(i)), 0.0)).collect();
        Self { grid, values }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| v * c).collect() }
    }

    /// Unnormalised forward transform.
    pub fn fft(&self) -> Vec<Complex64> {
        let mut data = self.values.clone();
        transform(&self.grid, &mut data, FftDirection::Forward);
        data
    }

    /// Inverse of [`SpectralField::fft`], including the `1/N` factor.
    pub fn ifft(grid: TorusGrid, coeffs: &[Complex64]) -> Self {
        let mut data = coeffs.to_vec();
        transform(&grid, &mut data, FftDirection::Inverse);
        let scale = 1.0 / grid.len() as f64;
        for v in &mut data {
            *v *= scale;
        }
        Self { grid, values: data }
    }

    /// `sum |f|^2` on the grid and `(1/N) sum |F|^2` over the coefficients.
    pub fn parseval(&self) -> (f64, f64) {
        let space: NeumaierSum = self.values.iter().map(|v| v.norm_sqr()).collect();
        let freq: NeumaierSum = self.fft().iter().map(|v| v.norm_sqr()).collect();
        (space.value(), freq.value() / self.grid.len() as f64)
    }

    /// Largest imaginary part, relative to the largest modulus.
    pub fn imag_fraction(&self) -> f64 {
        let m = self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let i = self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
        if m == 0.0 {
            0.0
        } else {
            i / m
        }
    }
}

fn transform(grid: &TorusGrid, data: &mut [Complex64], dir: FftDirection) {
    let n = grid.n;
    let fft = FftPlanner::new().plan_fft(n, dir);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // last axis: contiguous lines
    fft.process_with_scratch(data, &mut scratch);
    let total = grid.len();
    let mut lines = vec![Complex64::new(0.0, 0.0); total];
    for axis in 0..grid.dim as usize - 1 {
        let stride = n.pow(grid.dim - 1 - axis as u32);
        let block = stride * n;
        // gather every line along `axis` into contiguous storage
        let mut pos = 0;
        for base in (0..total).step_by(block) {
            for offset in 0..stride {
                for j in 0..n {
                    lines[pos + j] = data[base + offset + j * stride];
                }
                pos += n;
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        pos = 0;
        for base in (0..total).step_by(block) {
            for offset in 0..stride {
                for j in 0..n {
                    data[base + offset + j * stride] = lines[pos + j];
                }
                pos += n;
            }
        }
    }
}

/// Multiplies each Fourier coefficient by `(tau + |2 pi k/L|^2)^{alpha/2}`.
pub fn bessel_apply(f: &SpectralField, tau: f64, alpha: f64) -> SpectralField {
    assert!(tau >= 1.0, "bessel_apply needs tau >= 1");
    if alpha == 0.0 {
        return f.clone();
    }
    let coeffs = f.fft();
    SpectralField::ifft(f.grid, &apply_multiplier(&f.grid, &coeffs, tau, alpha))
}

fn apply_multiplier(grid: &TorusGrid, coeffs: &[Complex64], tau: f64, alpha: f64) -> Vec<Complex64> {
    apply_log_multiplier(coeffs, &log_symbol(grid, tau), alpha)
}

/// `ln(tau + |2 pi k/L|^2)` at every frequency.
fn log_symbol(grid: &TorusGrid, tau: f64) -> Vec<f64> {
    (0..grid.len()).map(|i| (tau + grid.freq_sq(i)).ln()).collect()
}

fn apply_log_multiplier(coeffs: &[Complex64], ln_symbol: &[f64], alpha: f64) -> Vec<Complex64> {
    coeffs.iter().zip(ln_symbol).map(|(c, l)| c * (0.5 * alpha * l).exp()).collect()
}

/// `(sum |f|^p h^dim)^{1/p}`.
pub fn lp_norm(f: &SpectralField, p: f64) -> f64 {
    assert!(p >= 1.0, "lp_norm needs p >= 1");
    let m2 = f.values.iter().map(|v| v.norm_sqr()).fold(0.0, f64::max);
    if m2 == 0.0 {
        return 0.0;
    }
    let half = 0.5 * p;
    let s: NeumaierSum = f.values.iter().map(|v| (v.norm_sqr() / m2).powf(half)).collect();
    m2.sqrt() * (s.value() * f.grid.cell_volume()).powf(1.0 / p)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TrialKind {
    Gaussian,
    Bump,
    PlaneWaveModulated,
}

impl TrialKind {
    pub fn name(&self) -> &'static str {
        match self {
            TrialKind::Gaussian => "gaussian",
            TrialKind::Bump => "bump",
            TrialKind::PlaneWaveModulated => "plane_wave_modulated",
        }
    }

    /// Box length as a multiple of the width.
    pub fn box_factor(&self) -> f64 {
        match self {
            TrialKind::Bump => 4.0,
            _ => 16.0,
        }
    }

    /// Profile of width `w` at `x`.
    pub fn eval(&self, x: [f64; 3], w: f64) -> f64 {
        let r2 = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]) / (w * w);
        match self {
            TrialKind::Gaussian => (-r2).exp(),
            TrialKind::Bump => {
                if r2 < 1.0 {
                    (1.0 - 1.0 / (1.0 - r2)).exp()
                } else {
                    0.0
                }
            }
            TrialKind::PlaneWaveModulated => (-r2).exp() * (2.0 * x[0] / w).cos(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFamily {
    pub kind: TrialKind,
    pub widths: Vec<f64>,
}

impl TrialFamily {
    pub fn new(kind: TrialKind, widths: Vec<f64>) -> Result<Self> {
        if widths.is_empty() || widths.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::domain("trial family needs a nonempty list of positive widths"));
        }
        Ok(Self { kind, widths })
    }

    /// Member of width `w` on an `n`-point box of length `box_factor * w`.
    pub fn member(&self, w: f64, dim: u32, n: usize) -> Result<SpectralField> {
        let grid = TorusGrid::new(dim, n, self.kind.box_factor() * w)?;
        Ok(SpectralField::from_fn(grid, |x| self.kind.eval(x, w)))
    }
}

fn check_dim(f: &SpectralField, pair: &ExponentPair) -> Result<()> {
    if f.grid.dim() != pair.d() {
        return Err(Error::domain(format!("pair has d = {} but the grid has dimension {}", pair.d(), f.grid.dim())));
    }
    Ok(())
}

/// `||f||_q / ||(tau + Delta)^{alpha/2} f||_p`.
pub fn embedding_ratio(f: &SpectralField, pair: &ExponentPair, tau: f64) -> Result<f64> {
    check_dim(f, pair)?;
    let den = lp_norm(&bessel_apply(f, tau, pair.alpha()), pair.p());
    if den == 0.0 {
        return Err(Error::domain("embedding_ratio of a zero field"));
    }
    Ok(lp_norm(f, pair.q()) / den)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRow {
    pub kind: TrialKind,
    pub width: f64,
    pub pair: ExponentPair,
    pub ratio: f64,
    pub ratio_over_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingSweep {
    pub rows: Vec<EmbeddingRow>,
    /// `max ratio / S(p, q)` over the sweep.
    pub fitted_a: f64,
}

/// Embedding ratios for every (member, pair) with `pair.d()` in `1..=3`, on
/// `n` points per axis. Rows are ordered by member, then by pair.
pub fn embedding_sweep(family: &TrialFamily, pairs: &[ExponentPair], tau: f64, n: usize) -> Result<EmbeddingSweep> {
    if pairs.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut dims: Vec<u32> = pairs.iter().map(|p| p.d()).collect();
    dims.sort_unstable();
    dims.dedup();
    let mut jobs = Vec::new();
    for &w in &family.widths {
        for &d in &dims {
            jobs.push((w, d));
        }
    }
    let blocks: Vec<Vec<EmbeddingRow>> = jobs
        .par_iter()
        .map(|&(w, d)| {
            let f = family.member(w, d, n)?;
            let coeffs = f.fft();
            let symbol = log_symbol(&f.grid, tau);
            let mine: Vec<&ExponentPair> = pairs.iter().filter(|p| p.d() == d).collect();
            mine.par_iter()
                .map(|pair| {
                    let g = SpectralField::ifft(f.grid, &apply_log_multiplier(&coeffs, &symbol, pair.alpha()));
                    let den = lp_norm(&g, pair.p());
                    if den == 0.0 {
                        return Err(Error::domain("embedding_ratio of a zero field"));
                    }
                    let ratio = lp_norm(&f, pair.q()) / den;
                    Ok(EmbeddingRow { kind: family.kind, width: w, pair: **pair, ratio, ratio_over_s: ratio / s_constant(pair) })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    let rows: Vec<EmbeddingRow> = blocks.into_iter().flatten().collect();
    let fitted_a = rows.iter().map(|r| r.ratio_over_s).fold(0.0, f64::max);
    Ok(EmbeddingSweep { rows, fitted_a })
}

/// Number of subtracted Taylor terms `#{k integer : 0 <= k < p - 1}`.
pub fn mt_cut_index(p: f64) -> u32 {
    (p - 1.0).ceil().max(0.0) as u32
}

/// `sum_{k >= m} x^k/k!`
fn exp_tail(x: f64, m: u32) -> Result<f64> {
    if x > 709.0 {
        return Err(Error::Overflow(format!(
            "exp({x}) overflows in mt_functional; use a smaller gamma"
        )));
    }
    if x == 0.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    let mf = m as f64;
    if x > 2.0 * mf + 10.0 {
        let mut head = NeumaierSum::new();
        let mut term = 1.0;
        for k in 0..m {
            head.add(term);
            term *= x / (k + 1) as f64;
        }
        return Ok(x.exp() - head.value());
    }
    let mut term = (mf * x.ln() - ln_gamma_pos(mf + 1.0)).exp();
    let mut sum = NeumaierSum::new();
    let mut k = mf;
    loop {
        sum.add(term);
        k += 1.0;
        term *= x / k;
        if term <= 1e-17 * sum.value() {
            break;
        }
    }
    Ok(sum.value())
}

/// Riemann sum of `exp(g |f|^{p'}) - sum_{0 <= k < p-1} (g |f|^{p'})^k/k!`.
pub fn mt_functional(f: &SpectralField, gamma: f64, p: f64) -> Result<f64> {
    if !(gamma >= 0.0) || !(p > 1.0) {
        return Err(Error::domain(format!("mt_functional needs gamma >= 0 and p > 1, got {gamma}, {p}")));
    }
    let pc = p / (p - 1.0);
    let m = mt_cut_index(p);
    let mut sum = NeumaierSum::new();
    for v in &f.values {
        sum.add(exp_tail(gamma * v.norm().powf(pc), m)?);
    }
    Ok(sum.value() * f.grid.cell_volume())
}

/// `int |f|^s` by Riemann sum.
pub fn moment(f: &SpectralField, s: f64) -> f64 {
    let sum: NeumaierSum = f.values.iter().map(|v| v.norm().powf(s)).collect();
    sum.value() * f.grid.cell_volume()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterpolationCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
}

/// `||B^{theta alpha} f||_p` against `||f||_p^{1-theta} ||B^alpha f||_p^theta`
/// with `B = (tau + Delta)^{1/2}`. Both sides coincide at `theta` = 0 and 1.
pub fn interpolation_check(f: &SpectralField, p: f64, alpha: f64, theta: f64, tau: f64) -> Result<InterpolationCheck> {
    if !(0.0..=1.0).contains(&theta) || !(p >= 1.0) {
        return Err(Error::domain(format!("interpolation_check needs theta in [0, 1] and p >= 1, got {theta}, {p}")));
    }
    let base = lp_norm(f, p);
    let top = lp_norm(&bessel_apply(f, tau, alpha), p);
    let lhs = if theta == 1.0 { top } else { lp_norm(&bessel_apply(f, tau, theta * alpha), p) };
    let rhs = base.powf(1.0 - theta) * top.powf(theta);
    if rhs == 0.0 {
        return Err(Error::domain("interpolation_check of a zero field"));
    }
    Ok(InterpolationCheck { lhs, rhs, ratio: lhs / rhs })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GagliardoCheck {
    pub lhs: f64,
    pub rhs_shape: f64,
}

/// `||f||_q` against `S(p, q) ||B^{d/p} f||_p^{1-p/q} ||f||_p^{p/q}`.
pub fn gagliardo_interp_check(f: &SpectralField, pair: &ExponentPair, tau: f64) -> Result<GagliardoCheck> {
    check_dim(f, pair)?;
    let (p, q) = (pair.p(), pair.q());
    if q <= p {
        return Err(Error::domain("gagliardo_interp_check needs q > p"));
    }
    let d = pair.d() as f64;
    let top = lp_norm(&bessel_apply(f, tau, d / p), p);
    let base = lp_norm(f, p);
    let rhs_shape = s_constant(pair) * top.powf(1.0 - p / q) * base.powf(p / q);
    Ok(GagliardoCheck { lhs: lp_norm(f, q), rhs_shape })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::rel_diff;

    fn gaussian(dim: u32, n: usize, w: f64) -> SpectralField {
        TrialFamily::new(TrialKind::Gaussian, vec![w]).unwrap().member(w, dim, n).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TorusGrid::new(4, 8, 1.0).is_err());
        assert!(TorusGrid::new(1, 12, 1.0).is_err());
        assert!(TorusGrid::new(1, 512, 1.0).is_err());
        assert!(TorusGrid::new(3, 128, 1.0).is_ok());
        assert!(TorusGrid::new(3, 256, 1.0).is_err());
        assert!(TorusGrid::new(2, 8, 0.0).is_err());
    }

    #[test]
    fn round_trip_and_parseval() {
        for dim in 1..=3 {
            let f = SpectralField::from_fn(TorusGrid::new(dim, 16, 5.0).unwrap(), |x| {
                (x[0] * 1.3).sin() + x[1] * x[1] - 0.2 * x[2]
            });
            let back = SpectralField::ifft(f.grid, &f.fft());
            let err = f.values.iter().zip(&back.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let scale = f.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            assert!(err <= 1e-10 * scale);
            let (s, c) = f.parseval();
            assert!(rel_diff(s, c) < 1e-10);
        }
    }

    #[test]
    fn transform_matches_direct_dft() {
        let grid = TorusGrid::new(2, 4, 1.0).unwrap();
        let f = SpectralField::from_fn(grid, |x| x[0] + 2.0 * x[1] * x[1] + 0.1);
        let c = f.fft();
        for (idx, ci) in c.iter().enumerate() {
            let (k0, k1) = (idx / 4, idx % 4);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, v) in f.values.iter().enumerate() {
                let (j0, j1) = (j / 4, j % 4);
                let phase = -2.0 * PI * ((k0 * j0 + k1 * j1) as f64) / 4.0;
                acc += v * Complex64::from_polar(1.0, phase);
            }
            assert!((acc - ci).norm() < 1e-12);
        }
    }

    #[test]
    fn bessel_examples() {
        let f = gaussian(1, 64, 1.0);
        assert_eq!(bessel_apply(&f, 1.0, 0.0), f);
        let one = SpectralField::from_fn(TorusGrid::new(2, 8, 3.0).unwrap(), |_| 1.0);
        let g = bessel_apply(&one, 1.0, 2.0);
        assert!(g.values.iter().all(|v| (v - Complex64::new(1.0, 0.0)).norm() < 1e-12));
        let h = bessel_apply(&bessel_apply(&f, 2.0, 1.3), 2.0, -1.3);
        let err = f.values.iter().zip(&h.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-10);
        assert!(h.imag_fraction() < 1e-12);
    }

    #[test]
    fn lp_norm_examples() {
        let one = SpectralField::from_fn(TorusGrid::new(1, 32, 7.0).unwrap(), |_| 1.0);
        assert!(rel_diff(lp_norm(&one, 2.0), 7f64.sqrt()) < 1e-14);
        let f = gaussian(2, 64, 0.7);
        assert!(rel_diff(lp_norm(&f.scaled(-3.0), 3.0), 3.0 * lp_norm(&f, 3.0)) < 1e-14);
        // int exp(-p r^2/w^2) over R^2 = pi w^2 / p
        let w: f64 = 0.7;
        let exact = (PI * w * w / 2.0).sqrt();
        assert!(rel_diff(lp_norm(&f, 2.0), exact) < 1e-4);
    }

    #[test]
    fn embedding_examples() {
        let f = gaussian(2, 64, 1.0);
        let flat = ExponentPair::new(2.0, 0.0, 2).unwrap();
        assert!(embedding_ratio(&f, &flat, 1.0).unwrap() <= 1.0 + 1e-9);
        let pr = ExponentPair::from_pq(2.0, 4.0, 2).unwrap();
        let a = embedding_ratio(&f, &pr, 1.0).unwrap();
        let b = embedding_ratio(&gaussian(2, 128, 1.0), &pr, 1.0).unwrap();
        assert!(a.is_finite() && rel_diff(a, b) < 0.01);
        assert!(rel_diff(embedding_ratio(&f.scaled(4.0), &pr, 1.0).unwrap(), a) < 1e-12);
        let wrong = ExponentPair::new(2.0, 1.0, 3).unwrap();
        assert!(embedding_ratio(&f, &wrong, 1.0).is_err());
    }

    #[test]
    fn sweep_rows_positive() {
        let fam = TrialFamily::new(TrialKind::Bump, vec![0.5, 2.0]).unwrap();
        let pairs: Vec<ExponentPair> = [(1.5, 0.3, 1), (3.0, 0.2, 1), (2.0, 0.5, 2)]
            .iter()
            .map(|&(p, a, d)| ExponentPair::new(p, a, d).unwrap())
            .collect();
        let sw = embedding_sweep(&fam, &pairs, 1.0, 32).unwrap();
        assert_eq!(sw.rows.len(), 6);
        assert!(sw.rows.iter().all(|r| r.ratio > 0.0 && r.ratio.is_finite()));
        assert!(sw.fitted_a > 0.0);
    }

    #[test]
    fn mt_examples() {
        let f = gaussian(1, 64, 1.0);
        assert_eq!(mt_functional(&f, 0.0, 2.0).unwrap(), 0.0);
        assert_eq!(mt_functional(&f.scaled(0.0), 1.0, 2.0).unwrap(), 0.0);
        for p in [2.0, 3.0] {
            let m = mt_cut_index(p);
            let pc = p / (p - 1.0);
            let lim = moment(&f, pc * m as f64) / (1..=m).product::<u32>() as f64;
            let g: f64 = 1e-4;
            let v = mt_functional(&f, g, p).unwrap() / g.powi(m as i32);
            assert!(rel_diff(v, lim) < 0.01, "{p}: {v} {lim}");
        }
        let mut last = 0.0;
        for g in [0.0, 0.1, 0.5, 1.0, 3.0] {
            let v = mt_functional(&f, g, 1.5).unwrap();
            assert!(v >= last);
            last = v;
        }
        assert!(matches!(mt_functional(&f.scaled(30.0), 1.0, 2.0), Err(Error::Overflow(_))));
    }

    #[test]
    fn exp_tail_branches_agree() {
        for m in [1u32, 2, 5] {
            for x in [1e-8f64, 0.3, 2.0, 11.9, 12.1, 15.0, 40.0] {
                let direct = x.exp() - (0..m).map(|k| x.powi(k as i32) / (1..=k).product::<u32>().max(1) as f64).sum::<f64>();
                let t = exp_tail(x, m).unwrap();
                if x > 1.0 {
                    assert!(rel_diff(t, direct) < 1e-12, "{m} {x}");
                }
                assert!(t >= 0.0);
            }
        }
    }

    #[test]
    fn interpolation_examples() {
        let f = gaussian(1, 128, 1.0);
        assert_eq!(interpolation_check(&f, 3.0, 1.0, 0.0, 1.0).unwrap().ratio, 1.0);
        assert_eq!(interpolation_check(&f, 3.0, 1.0, 1.0, 1.0).unwrap().ratio, 1.0);
        let c = interpolation_check(&f, 2.0, 1.0, 0.5, 1.0).unwrap();
        assert!(c.ratio <= 1.0 + 1e-9);
    }

    #[test]
    fn gagliardo_homogeneous() {
        let f = gaussian(2, 64, 1.0);
        let pr = ExponentPair::new(2.0, 0.5, 2).unwrap();
        let a = gagliardo_interp_check(&f, &pr, 1.0).unwrap();
        let b = gagliardo_interp_check(&f.scaled(5.0), &pr, 1.0).unwrap();
        assert!(rel_diff(a.lhs / a.rhs_shape, b.lhs / b.rhs_shape) < 1e-12);
    }
}
