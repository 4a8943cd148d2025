use embedconst_core::interpolation::{assemble, ipq_fit, weak_sup_factor, MarcinkiewiczData};
use embedconst_core::params::make_grid;
use embedconst_core::report::Measured;
use embedconst_core::{ExponentPair, Result, ResultTable};
use rayon::prelude::*;

use super::Outcome;
use crate::checks::{Checks, Key};
use crate::config::RunConfig;

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    let pairs: Vec<ExponentPair> = cfg.pairs()?.into_iter().filter(|p| p.alpha() > 0.0).collect();
    let data = assemble_all(&pairs)?;
    let sups: Vec<f64> = pairs.par_iter().map(|p| weak_sup_factor(p.p(), p.q())).collect::<Result<_>>()?;

    let mut table = ResultTable::new(
        "interp",
        &["p", "q", "alpha", "d", "theta", "p1", "q1", "p2", "q2", "m0", "m1", "m2", "assembled", "ipq_rhs", "ratio"],
    );
    let mut checks = Checks::new("interp_checks");
    for (m, sup) in data.iter().zip(&sups) {
        let pr = &m.pair;
        table.push(vec![
            pr.p().into(),
            pr.q().into(),
            pr.alpha().into(),
            pr.d().into(),
            m.theta.into(),
            m.p1.into(),
            m.q1.into(),
            m.p2.into(),
            m.q2.into(),
            m.m0.into(),
            m.m1.into(),
            m.m2.into(),
            m.assembled.into(),
            m.ipq_rhs_shape.into(),
            m.ratio.into(),
        ]);
        let key = Key::pair(pr);
        let (rp, rq) = m.convexity_residuals();
        checks.le("convex combination residual", key, rp.max(rq), cfg.tol("convexity"));
        for b in m.proof_bounds() {
            checks.push(b.name, key, b.value, b.bound, b.bound - b.value, b.holds());
        }
        checks.le("1 - weak_sup", key, 1.0 - sup, cfg.tol("weak_sup"));
        checks.le("weak_sup - 1", key, sup - 1.0, cfg.tol("weak_sup_excess"));
    }

    let mut out = Outcome::default();
    out.tables.push(table);
    if !cfg.single_pair() {
        let fit = ipq_fit(&data)?;
        let refined = ipq_fit(&assemble_all(&make_grid(&cfg.active_grid(true))?)?)?;
        let mut ft = ResultTable::new("interp_fit", &["d", "c_fit", "c_fit_refined"]);
        for (&(d, c), &(_, cr)) in fit.per_d.iter().zip(&refined.per_d) {
            ft.push(vec![d.into(), c.into(), cr.into()]);
            checks.close("Ipq constant stable under grid refinement", Key::d(d), c, cr, cfg.tol("refinement"));
            out.measured.push(Measured::new(format!("interp.ipq_c.d{d}"), c, cfg.tol("golden")));
        }
        ft.push(vec!["all".into(), fit.global.into(), refined.global.into()]);
        checks.close("Ipq constant stable under grid refinement", Key::none(), fit.global, refined.global, cfg.tol("refinement"));
        out.measured.push(Measured::new("interp.ipq_c.global", fit.global, cfg.tol("golden")));
        out.tables.push(ft);
    }
    out.tables.push(checks.into_table());
    Ok(out)
}

fn assemble_all(pairs: &[ExponentPair]) -> Result<Vec<MarcinkiewiczData>> {
    pairs.par_iter().map(assemble).collect()
}
