use embedconst_core::kernel::{
    envelope_table, global_bound_constant, global_bound_constant_chi, green_kernel_upper, kalpha_norms,
    kalpha_norms_quadrature, local_bound_constant, local_bound_constant_tol, outer_sup_bound, tilde_k_norm,
    CutoffSchedule, GreenKernelParams, RadialVolumeModel, KERNEL_REL_TOL,
};
use embedconst_core::numeric::{log_space, rel_diff};
use embedconst_core::report::Measured;
use embedconst_core::{Error, GroupGeometry, Result, ResultTable};
use rayon::prelude::*;

use super::Outcome;
use crate::checks::{Checks, Key};
use crate::config::RunConfig;

const SPLIT_RADII: [f64; 3] = [0.1, 0.5, 0.9];
const NORM_EXPONENTS: [f64; 3] = [1.0, 1.5, 3.0];

struct CaseResult {
    alpha: f64,
    d: u32,
    kp: GreenKernelParams,
    local: f64,
    local_fine: f64,
    global: Result<f64>,
    rejected_low: Option<bool>,
    norm_err: f64,
    cutoff_violations: usize,
}

/// `(alpha, d)` cases: the command-line pair if given, else every grid
/// fraction `alpha/d` for each grid dimension.
fn cases(cfg: &RunConfig) -> Vec<(f64, u32)> {
    let a = &cfg.pair_args;
    if let Some(alpha) = a.alpha {
        return vec![(alpha, a.d.unwrap_or(cfg.geometry.d))];
    }
    let mut out = Vec::new();
    for d in cfg.active_grid(false).d_values {
        for f in &cfg.grid.alpha_fractions {
            out.push((f * d as f64, d));
        }
    }
    out
}

pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.pair_args.p.is_some() || cfg.pair_args.q.is_some() {
        return Err(Error::Config("kernel takes --alpha and --d, not --p or --q".into()));
    }
    let fine_tol = KERNEL_REL_TOL / 10.0;
    let results: Vec<CaseResult> = cases(cfg)
        .into_par_iter()
        .map(|(alpha, d)| evaluate(cfg, alpha, d, fine_tol))
        .collect::<Result<_>>()?;

    let mut table = ResultTable::new("kernel_bounds", &["alpha", "d", "a", "b", "local", "local_fine", "global"]);
    let mut checks = Checks::new("kernel_checks");
    for c in &results {
        let key = Key::alpha_d(c.alpha, c.d);
        let global = c.global.as_ref().map_or(f64::NAN, |g| *g);
        table.push(vec![c.alpha.into(), c.d.into(), c.kp.a.into(), c.kp.b.into(), c.local.into(), c.local_fine.into(), global.into()]);
        checks.le("local sup finite", key, c.local, f64::MAX);
        checks.close("local sup stable under 10x tighter quadrature", key, c.local, c.local_fine, cfg.tol("kernel_stability"));
        match &c.global {
            Ok(g) => checks.le("global sup finite", key, *g, f64::MAX),
            Err(Error::Domain(_)) => checks.count("global precondition holds", key, 1),
            Err(e) => return Err(e.clone()),
        }
        if let Some(rejected) = c.rejected_low {
            checks.count("precondition rejects a below threshold", key, usize::from(!rejected));
        }
        checks.le("k_alpha closed form vs quadrature", key, c.norm_err, cfg.tol("quadrature"));
        checks.count("outer sup above t/2 (integrable) or t (endpoint)", key, c.cutoff_violations);
    }

    let mut out = Outcome::default();
    out.tables.push(table);
    out.tables.push(envelope(cfg, &mut checks)?);
    tilde_rows(cfg, &mut checks)?;
    out.measured = golden_values(cfg.tol("golden"))?;
    out.tables.push(checks.into_table());
    Ok(out)
}

fn evaluate(cfg: &RunConfig, alpha: f64, d: u32, fine_tol: f64) -> Result<CaseResult> {
    let g = cfg.geometry.with_dim(d);
    let kp = GreenKernelParams::for_delta(alpha, &g)?;
    let local = local_bound_constant(&kp)?;
    let local_fine = local_bound_constant_tol(&kp, fine_tol)?;
    let global = global_bound_constant(&kp, &g);

    let rate = g.decay_rate();
    let threshold = 2.0 / g.b * rate * rate;
    let rejected_low = if 0.5 * threshold >= 1.0 {
        let low = GreenKernelParams::new(alpha, d, 0.5 * threshold, g.b)?;
        Some(matches!(global_bound_constant(&low, &g), Err(Error::Domain(_))))
    } else {
        None
    };

    let model = RadialVolumeModel::from_geometry(&g);
    let mut norm_err = 0.0f64;
    for s in SPLIT_RADII {
        for r in NORM_EXPONENTS {
            if ((alpha - d as f64) * r + d as f64).abs() < 1e-9 {
                continue;
            }
            let exact = kalpha_norms(alpha, d, s, r, &model)?;
            let quad = kalpha_norms_quadrature(alpha, d, s, r, &model)?;
            norm_err = norm_err.max(rel_diff(exact.l1_inner, quad.l1_inner)).max(rel_diff(exact.lr_outer_pow, quad.lr_outer_pow));
        }
    }

    let df = d as f64;
    let integrable = CutoffSchedule::integrable(0.5 * (1.0 + df / alpha), alpha, d)?;
    let endpoint = CutoffSchedule::endpoint(alpha, d)?;
    let slack = 1.0 + 1e-12;
    let cutoff_violations = log_space(1e-3, 1e6, 46)
        .into_iter()
        .filter(|&t| outer_sup_bound(t, &integrable) > 0.5 * t * slack || outer_sup_bound(t, &endpoint) > t * slack)
        .count();

    Ok(CaseResult { alpha, d, kp, local, local_fine, global, rejected_low, norm_err, cutoff_violations })
}

/// Envelope profile for the command-line `(alpha, d)`, default `(1, 3)`.
fn envelope(cfg: &RunConfig, checks: &mut Checks) -> Result<ResultTable> {
    let alpha = cfg.pair_args.alpha.unwrap_or(1.0);
    let d = cfg.pair_args.d.unwrap_or(3);
    let g = cfg.geometry.with_dim(d);
    let kp = GreenKernelParams::for_delta(alpha, &g)?;
    let rows = envelope_table(&kp, &g, &log_space(1e-3, 30.0, 61))?;
    let mut t = ResultTable::new("kernel_envelope", &["alpha", "d", "r", "green", "normalized_local", "normalized_global"]);
    for r in &rows {
        t.push(vec![alpha.into(), d.into(), r.r.into(), r.green.into(), r.normalized_local.into(), r.normalized_global.into()]);
    }
    let increases = rows.windows(2).filter(|w| w[1].green > w[0].green).count();
    checks.count("envelope nonincreasing in r", Key::alpha_d(alpha, d), increases);

    let mut chi_geom = g;
    chi_geom.c_chi = g.c_delta;
    chi_geom.c_delta_chi_inv = 0.0;
    if let (Ok(gd), Ok(gc)) = (
        global_bound_constant(&kp, &g),
        GreenKernelParams::for_chi(alpha, &chi_geom).and_then(|k| global_bound_constant_chi(&k, &chi_geom)),
    ) {
        checks.close("character bound equals modular bound when chi = delta", Key::alpha_d(alpha, d), gd, gc, 1e-12);
    }
    Ok(t)
}

fn tilde_rows(cfg: &RunConfig, checks: &mut Checks) -> Result<()> {
    for r in [1.0, 2.0, 4.0] {
        let name = format!("global kernel L^{r} norm finite");
        checks.le(&name, Key::d(cfg.geometry.d), tilde_k_norm(r, &cfg.geometry)?, f64::MAX);
    }
    Ok(())
}

/// Reference values that do not depend on the configured geometry.
fn golden_values(tol: f64) -> Result<Vec<Measured>> {
    let unit = GreenKernelParams::new(1.0, 3, 1.0, 1.0)?;
    let g = GroupGeometry { d: 3, growth_rate: 0.0, b: 4.0, ..GroupGeometry::default() };
    let kp = GreenKernelParams::for_delta(1.0, &g)?;
    Ok(vec![
        Measured::new("kernel.green.r1_a1_d3_a1_b1", green_kernel_upper(1.0, &unit)?, tol),
        Measured::new("kernel.local.a1_d3_a1_b1", local_bound_constant(&unit)?, tol),
        Measured::new("kernel.global.a1_d3_b4_D0", global_bound_constant(&kp, &g)?, tol),
    ])
}
