use embedconst_core::constants::{
    b1_multiplier_bound, comparability_bands, f_constant, s_constant, ComparisonCheck, ConstantReport,
    COMPARISON_SLACK,
};
use embedconst_core::params::make_grid;
use embedconst_core::report::Measured;
use embedconst_core::{Cell, ExponentPair, Result, ResultTable};

use super::Outcome;
use crate::checks::{Checks, Key};
use crate::config::RunConfig;

const B1_TERMS: usize = 200;

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let pairs = cfg.pairs()?;
    let mut table = ResultTable::new(
        "constants",
        &["p", "q", "alpha", "d", "s", "q_pq", "q_dual", "f", "e_h_tilde", "eh_over_s"],
    );
    let mut checks = Checks::new("constants_checks");
    for pair in &pairs {
        let r = ConstantReport::new(pair)?;
        let opt = |x: Option<f64>| x.map_or_else(|| Cell::from("-"), Cell::from);
        table.push(vec![
            pair.p().into(),
            pair.q().into(),
            pair.alpha().into(),
            pair.d().into(),
            r.s.into(),
            r.q.into(),
            r.q_dual.into(),
            r.f.into(),
            opt(r.e_h_tilde),
            opt(r.ratio_eh_over_s),
        ]);
        comparison_rows(&mut checks, pair)?;
        duality_rows(&mut checks, pair, cfg.tol("duality"))?;
    }

    let mut out = Outcome::default();
    out.tables.push(table);
    if !cfg.single_pair() {
        let bands = comparability_bands(&pairs)?;
        let refined = comparability_bands(&make_grid(&cfg.active_grid(true))?)?;
        let mut bt = ResultTable::new("constants_bands", &["d", "count", "min_ratio", "max_ratio", "b3"]);
        for band in &bands {
            bt.push(vec![band.d.into(), band.count.into(), band.min_ratio.into(), band.max_ratio.into(), band.b3.into()]);
            checks.le("B3 finite", Key::d(band.d), band.b3, f64::MAX);
            if let Some(r) = refined.iter().find(|r| r.d == band.d) {
                checks.close("B3 stable under grid refinement", Key::d(band.d), band.b3, r.b3, cfg.tol("refinement"));
            }
            out.measured.push(Measured::new(format!("constants.b3.d{}", band.d), band.b3, cfg.tol("golden")));
        }
        out.tables.push(bt);
        b1_rows(&mut checks, cfg.tol("b1"))?;
    }
    out.tables.push(checks.into_table());
    Ok(out)
}

fn comparison_rows(checks: &mut Checks, pair: &ExponentPair) -> Result<()> {
    let c = ComparisonCheck::new(pair)?;
    let key = Key::pair(pair);
    let (lo, hi) = (1.0 - COMPARISON_SLACK, 1.0 + COMPARISON_SLACK);
    if c.conjugate_regime {
        checks.ge("F/Q >= 1/4", key, c.f_over_q, 0.25 * lo);
        checks.le("F/Q <= 4", key, c.f_over_q, 4.0 * hi);
        checks.le("Q(p,q)/Q(q',p') <= 1", key, c.q_over_q_dual, hi);
    }
    checks.ge("F/S >= 1/4", key, c.f_over_s, 0.25 * lo);
    Ok(())
}

fn duality_rows(checks: &mut Checks, pair: &ExponentPair, tol: f64) -> Result<()> {
    let dual = pair.dual();
    let key = Key::pair(pair);
    checks.close("S(p,q) = S(q',p')", key, s_constant(pair), s_constant(&dual), tol);
    let f = f_constant(pair.p(), pair.q())?;
    let fd = f_constant(dual.p(), dual.q())?;
    checks.close("F(p,q) = F(q',p')", key, f, fd, tol);
    Ok(())
}

fn b1_rows(checks: &mut Checks, tol: f64) -> Result<()> {
    for alpha in [0.5, 1.0, 2.0] {
        let key = Key { alpha: Some(alpha), ..Key::none() };
        checks.le("|b1 - 2|", key, (b1_multiplier_bound(alpha, B1_TERMS)? - 2.0).abs(), tol);
    }
    for alpha in [2.5, 3.0, 3.5] {
        let key = Key { alpha: Some(alpha), ..Key::none() };
        checks.le("b1 finite", key, b1_multiplier_bound(alpha, B1_TERMS)?, f64::MAX);
    }
    Ok(())
}
