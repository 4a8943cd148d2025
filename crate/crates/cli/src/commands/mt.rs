use embedconst_core::report::Measured;
use embedconst_core::series::{
    mt_scaling_divergence, mt_series_partial, mt_series_radius, mt_series_radius_exact, ratio_crossings, s_majorant_logs,
    MTSeriesSpec, MAX_TERMS,
};
use embedconst_core::{Result, ResultTable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Outcome;
use crate::checks::{Checks, Key};
use crate::config::RunConfig;

pub const RADIUS_P: [f64; 4] = [1.5, 2.0, 3.0, 4.0];
pub const RADIUS_C: [f64; 3] = [0.5, 1.0, 2.0];
pub const MAJORANT_K_MAX: u32 = 200;
pub const SCALING_INSTANCES: usize = 1000;
const SCALING_SEED: u64 = 0x5eed_6a11;

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let mut checks = Checks::new("mt_checks");
    let mut out = Outcome::default();
    out.tables.push(radius_rows(cfg, &mut checks)?);
    majorant_rows(cfg, &mut checks)?;
    partial_rows(cfg, &mut checks, &mut out)?;
    scaling_rows(&mut checks)?;
    out.tables.push(checks.into_table());
    Ok(out)
}

fn radius_rows(cfg: &RunConfig, checks: &mut Checks) -> Result<ResultTable> {
    let mut t = ResultTable::new(
        "mt_radius",
        &["p", "c", "k_max", "radius", "radius_exact", "scaled", "crossings_at_1.1r", "crossings_at_0.9r"],
    );
    let tol = cfg.tol("series_radius");
    for p in RADIUS_P {
        for c in RADIUS_C {
            let spec = MTSeriesSpec::new(p, c, MAX_TERMS)?;
            let r = mt_series_radius(&spec)?;
            let exact = mt_series_radius_exact(&spec);
            let scaled = r / exact;
            let above = ratio_crossings(&spec, 1.1 * r);
            let below = ratio_crossings(&spec, 0.9 * r);
            t.push(vec![p.into(), c.into(), MAX_TERMS.into(), r.into(), exact.into(), scaled.into(), above.into(), below.into()]);
            let key = Key::p(p);
            let name = |s: &str| format!("{s} (c = {c})");
            checks.le(&name("|radius e c^p' p' - 1|"), key, (scaled - 1.0).abs(), tol);
            checks.count(&name("term ratio crosses 1 once above the radius"), key, above.abs_diff(1));
            checks.count(&name("term ratio stays below 1 under the radius"), key, below);
            if p == 2.0 && c == 1.0 {
                checks.close("radius at p = 2, c = 1 vs 0.18394", key, r, 0.18394, tol);
            }
        }
    }
    Ok(t)
}

/// `S(p, p'k)^{p'k} <= (p'k)^k/(p-1)^{p'k}` for every grid `p` and `k <= 200`.
fn majorant_rows(cfg: &RunConfig, checks: &mut Checks) -> Result<()> {
    let mut ps = cfg.grid.p_values.clone();
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    for p in ps {
        let first = ((p - 1.0).ceil() as u32).max(1);
        let mut worst = f64::NEG_INFINITY;
        for k in first..=MAJORANT_K_MAX {
            let (lhs, rhs) = s_majorant_logs(p, k)?;
            worst = worst.max((lhs - rhs) / rhs.abs().max(1.0));
        }
        checks.le("S(p,p'k)^(p'k) majorant, log excess", Key::p(p), worst, 1e-12);
    }
    Ok(())
}

fn partial_rows(cfg: &RunConfig, checks: &mut Checks, out: &mut Outcome) -> Result<()> {
    let spec = MTSeriesSpec::new(2.0, 1.0, 200)?;
    let v = mt_series_partial(&spec, 0.1, 50)?;
    let key = Key::p(2.0);
    checks.le("partial sum finite (c = 1, gamma = 0.1, K = 50)", key, v, f64::MAX);
    checks.ge("partial sum nondecreasing in K", key, mt_series_partial(&spec, 0.1, 60)?, v);
    checks.ge("partial sum nondecreasing in gamma", key, mt_series_partial(&spec, 0.11, 50)?, v);
    checks.le("term ratio at K = 50 below 1", key, spec.term_ratio(0.1, 50), 1.0);
    out.measured.push(Measured::new("mt.partial.p2_c1_g0.1_k50", v, cfg.tol("golden")));
    Ok(())
}

/// The scaling inequality on seeded random instances, with the equality cases.
fn scaling_rows(checks: &mut Checks) -> Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(SCALING_SEED);
    let mut below = 0;
    let mut unequal_at_one = 0;
    for _ in 0..SCALING_INSTANCES {
        let p = rng.gen_range(1.05..8.0);
        let gamma = rng.gen_range(0.01..2.0);
        let sigma = rng.gen_range(1.0..4.0);
        let len = rng.gen_range(1..=12);
        let moments: Vec<f64> = (0..len)
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..10.0) })
            .collect();
        let s = mt_scaling_divergence(p, gamma, &moments, sigma)?;
        if !(s.lhs >= s.rhs) {
            below += 1;
        }
        let one = mt_scaling_divergence(p, gamma, &moments, 1.0)?;
        if one.lhs != one.rhs {
            unequal_at_one += 1;
        }
    }
    let n = SCALING_INSTANCES as u32;
    checks.count(&format!("scaling lhs < rhs on {n} random instances"), Key::none(), below);
    checks.count(&format!("scaling lhs != rhs at sigma = 1 on {n} random instances"), Key::none(), unequal_at_one);
    for p in [2.0, 3.0, 4.0, 5.0] {
        let s = mt_scaling_divergence(p, 0.7, &[1.3], 2.5)?;
        checks.count("scaling lhs != rhs for the single term k = p", Key::p(p), usize::from(s.lhs != s.rhs));
    }
    Ok(())
}
