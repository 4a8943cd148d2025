use embedconst_core::report::Measured;
use embedconst_core::spectral::{
    embedding_ratio, embedding_sweep, gagliardo_interp_check, interpolation_check, moment, mt_cut_index, mt_functional,
    EmbeddingSweep, SpectralField, TrialFamily, TrialKind,
};
use embedconst_core::{Error, ExponentPair, Result, ResultTable};
use rayon::prelude::*;

use super::Outcome;
use crate::checks::{Checks, Key};
use crate::config::RunConfig;

pub const KINDS: [TrialKind; 3] = [TrialKind::Gaussian, TrialKind::Bump, TrialKind::PlaneWaveModulated];

/// Points per axis of the coarse resolution; the fine one doubles it.
pub fn base_n(dim: u32) -> usize {
    match dim {
        1 => 128,
        2 => 64,
        _ => 32,
    }
}

/// Widths `2^k`, `k = -3..=3`.
pub fn widths() -> Vec<f64> {
    (-3..=3).map(|k| 2f64.powi(k)).collect()
}

/// Widths `2^{k/2}`, `k = -6..=6`.
pub fn refined_widths() -> Vec<f64> {
    (-6..=6).map(|k| 2f64.powf(k as f64 / 2.0)).collect()
}

/// Grid pairs with `d <= 3`. In three dimensions only every other `p` of the
/// grid is swept to keep the run short.
fn sweep_pairs(cfg: &RunConfig) -> Result<Vec<ExponentPair>> {
    let pairs = cfg.pairs()?;
    if cfg.single_pair() {
        if pairs[0].d() > 3 {
            return Err(Error::Config(format!("embed works in d <= 3, got d = {}", pairs[0].d())));
        }
        return Ok(pairs);
    }
    let mut ps = cfg.grid.p_values.clone();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let kept: Vec<f64> = ps.iter().step_by(2).copied().collect();
    let out: Vec<ExponentPair> = pairs
        .into_iter()
        .filter(|p| p.d() <= 2 || (p.d() == 3 && kept.contains(&p.p())))
        .collect();
    if out.is_empty() {
        return Err(Error::Config("embed needs grid pairs with d <= 3".into()));
    }
    Ok(out)
}

struct FitCase {
    kind: TrialKind,
    d: u32,
    coarse: EmbeddingSweep,
    fine_a: f64,
    refined_a: f64,
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let tau = cfg.tau();
    let pairs = sweep_pairs(cfg)?;
    let mut dims: Vec<u32> = pairs.iter().map(|p| p.d()).collect();
    dims.dedup();

    let mut fits = Vec::new();
    for kind in KINDS {
        for &d in &dims {
            let mine: Vec<ExponentPair> = pairs.iter().filter(|p| p.d() == d).copied().collect();
            let n = base_n(d);
            let family = TrialFamily::new(kind, widths())?;
            let coarse = embedding_sweep(&family, &mine, tau, n)?;
            let fine_a = embedding_sweep(&family, &mine, tau, 2 * n)?.fitted_a;
            let refined_a = embedding_sweep(&TrialFamily::new(kind, refined_widths())?, &mine, tau, n)?.fitted_a;
            fits.push(FitCase { kind, d, coarse, fine_a, refined_a });
        }
    }

    let mut rows = ResultTable::new("embed", &["kind", "width", "p", "q", "alpha", "d", "ratio", "ratio_over_s"]);
    let mut fit_table = ResultTable::new("embed_fit", &["kind", "d", "n", "fitted_a", "fitted_a_2n", "fitted_a_refined_widths"]);
    let mut checks = Checks::new("embed_checks");
    let mut out = Outcome::default();
    let stab = cfg.tol("embed_stability");
    for f in &fits {
        let mut bad = 0;
        for r in &f.coarse.rows {
            let p = &r.pair;
            rows.push(vec![
                r.kind.name().into(),
                r.width.into(),
                p.p().into(),
                p.q().into(),
                p.alpha().into(),
                p.d().into(),
                r.ratio.into(),
                r.ratio_over_s.into(),
            ]);
            if !(r.ratio.is_finite() && r.ratio > 0.0) {
                bad += 1;
            }
        }
        let a = f.coarse.fitted_a;
        fit_table.push(vec![f.kind.name().into(), f.d.into(), base_n(f.d).into(), a.into(), f.fine_a.into(), f.refined_a.into()]);
        let key = Key::d(f.d);
        checks.count(&format!("{} ratios finite and positive", f.kind.name()), key, bad);
        checks.close(&format!("{} fitted A stable under resolution doubling", f.kind.name()), key, a, f.fine_a, stab);
        checks.close(&format!("{} fitted A stable under width refinement", f.kind.name()), key, a, f.refined_a, stab);
        out.measured.push(Measured::new(format!("embed.fitted_a.{}.d{}", f.kind.name(), f.d), a, cfg.tol("golden")));
    }
    out.tables.push(rows);
    out.tables.push(fit_table);

    transform_rows(cfg, &dims, &mut checks)?;
    contraction_rows(cfg, &dims, tau, &mut checks)?;
    small_gamma_rows(cfg, &mut checks)?;
    if !cfg.single_pair() {
        golden_ratio_rows(cfg, tau, &mut checks, &mut out)?;
        interpolation_rows(cfg, tau, &mut checks, &mut out)?;
        gagliardo_rows(cfg, tau, &mut checks, &mut out)?;
    }
    out.tables.push(checks.into_table());
    Ok(out)
}

fn transform_rows(cfg: &RunConfig, dims: &[u32], checks: &mut Checks) -> Result<()> {
    let tol = cfg.tol("spectral");
    for kind in KINDS {
        for &d in dims {
            let f = TrialFamily::new(kind, vec![1.0])?.member(1.0, d, base_n(d))?;
            let back = SpectralField::ifft(f.grid, &f.fft());
            let scale = f.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
            let err = f.values.iter().zip(&back.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale;
            let (grid_sum, coeff_sum) = f.parseval();
            let key = Key::d(d);
            checks.le(&format!("{} transform round trip", kind.name()), key, err, tol);
            checks.close(&format!("{} Parseval", kind.name()), key, grid_sum, coeff_sum, tol);
        }
    }
    Ok(())
}

fn contraction_rows(cfg: &RunConfig, dims: &[u32], tau: f64, checks: &mut Checks) -> Result<()> {
    let bound = 1.0 + cfg.tol("contraction");
    for kind in KINDS {
        for &d in dims {
            let pair = ExponentPair::new(2.0, 0.0, d)?;
            let worst = widths()
                .par_iter()
                .map(|&w| embedding_ratio(&TrialFamily::new(kind, vec![w])?.member(w, d, base_n(d))?, &pair, tau))
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            checks.le(&format!("{} ratio at p = q = 2, alpha = 0", kind.name()), Key::pair(&pair), worst, bound);
        }
    }
    Ok(())
}

/// `mt_functional / gamma^m` against `int |f|^{p' m} / m!` at small `gamma`
/// for integer `p`.
fn small_gamma_rows(cfg: &RunConfig, checks: &mut Checks) -> Result<()> {
    for p in [2.0, 3.0] {
        for d in [1u32, 2] {
            let f = TrialFamily::new(TrialKind::Gaussian, vec![1.0])?.member(1.0, d, base_n(d))?;
            let m = mt_cut_index(p);
            let pc = p / (p - 1.0);
            let fact: f64 = (1..=m).map(f64::from).product();
            let limit = moment(&f, pc * m as f64) / fact;
            for gamma in [1e-3, 1e-4] {
                let scaled = mt_functional(&f, gamma, p)? / gamma.powi(m as i32);
                let key = Key { p: Some(p), d: Some(d), ..Key::none() };
                checks.close(&format!("small-gamma limit at gamma = {gamma:e}"), key, scaled, limit, cfg.tol("small_gamma"));
            }
        }
    }
    Ok(())
}

fn gaussian(w: f64, dim: u32, n: usize) -> Result<SpectralField> {
    TrialFamily::new(TrialKind::Gaussian, vec![w])?.member(w, dim, n)
}

fn golden_ratio_rows(cfg: &RunConfig, tau: f64, checks: &mut Checks, out: &mut Outcome) -> Result<()> {
    let pair = ExponentPair::from_pq(2.0, 4.0, 2)?;
    let coarse = embedding_ratio(&gaussian(1.0, 2, 64)?, &pair, tau)?;
    let fine = embedding_ratio(&gaussian(1.0, 2, 128)?, &pair, tau)?;
    checks.close("gaussian w = 1 ratio stable under resolution doubling", Key::pair(&pair), coarse, fine, cfg.tol("resolution"));
    out.measured.push(Measured::new("embed.ratio.gaussian_w1_p2_q4_d2", coarse, cfg.tol("golden")));
    Ok(())
}

/// Interpolation inequality: at `p = 2` the ratio is at most 1; at `p = 4`
/// its maximum over the trial families is the empirical constant.
fn interpolation_rows(cfg: &RunConfig, tau: f64, checks: &mut Checks, out: &mut Outcome) -> Result<()> {
    let bound = 1.0 + cfg.tol("contraction");
    for d in 1..=3u32 {
        let worst = widths()
            .par_iter()
            .map(|&w| Ok(interpolation_check(&gaussian(w, d, base_n(d))?, 2.0, 1.0, 0.5, tau)?.ratio))
            .collect::<Result<Vec<f64>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        let key = Key { p: Some(2.0), alpha: Some(1.0), d: Some(d), ..Key::none() };
        checks.le("interpolation ratio at p = 2, theta = 1/2", key, worst, bound);
    }
    let f = gaussian(1.0, 1, base_n(1))?;
    for theta in [0.0, 1.0] {
        let r = interpolation_check(&f, 4.0, 1.0, theta, tau)?.ratio;
        checks.close(&format!("interpolation ratio at theta = {theta}"), Key { p: Some(4.0), ..Key::d(1) }, r, 1.0, 1e-12);
    }

    let c4 = |scale: usize| -> Result<f64> {
        let mut jobs = Vec::new();
        for kind in KINDS {
            for d in [1u32, 2] {
                for w in widths() {
                    jobs.push((kind, d, w));
                }
            }
        }
        let vals = jobs
            .par_iter()
            .map(|&(kind, d, w)| {
                let f = TrialFamily::new(kind, vec![w])?.member(w, d, scale * base_n(d))?;
                let mut best = 0.0f64;
                for alpha in [0.5, 1.0, 2.0] {
                    for theta in [0.25, 0.5, 0.75] {
                        best = best.max(interpolation_check(&f, 4.0, alpha, theta, tau)?.ratio);
                    }
                }
                Ok(best)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(vals.into_iter().fold(0.0, f64::max))
    };
    let (coarse, fine) = (c4(1)?, c4(2)?);
    let key = Key::p(4.0);
    checks.le("empirical interpolation constant at p = 4 finite", key, coarse, f64::MAX);
    checks.close("empirical interpolation constant stable under resolution doubling", key, coarse, fine, cfg.tol("resolution"));
    out.measured.push(Measured::new("embed.interp_c.p4", coarse, cfg.tol("golden")));
    Ok(())
}

fn gagliardo_rows(cfg: &RunConfig, tau: f64, checks: &mut Checks, out: &mut Outcome) -> Result<()> {
    let pair = ExponentPair::from_pq(2.0, 4.0, 2)?;
    let max_ratio = |n: usize| -> Result<f64> {
        let vals = widths()
            .par_iter()
            .map(|&w| {
                let c = gagliardo_interp_check(&gaussian(w, 2, n)?, &pair, tau)?;
                Ok(c.lhs / c.rhs_shape)
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(vals.into_iter().fold(0.0, f64::max))
    };
    let (coarse, fine) = (max_ratio(64)?, max_ratio(128)?);
    let key = Key::pair(&pair);
    checks.le("Gagliardo ratio finite over widths 1/8..8", key, coarse, f64::MAX);
    checks.close("Gagliardo ratio stable under resolution doubling", key, coarse, fine, cfg.tol("resolution"));
    out.measured.push(Measured::new("embed.gagliardo_max.p2_q4_d2", coarse, cfg.tol("golden")));
    Ok(())
}
