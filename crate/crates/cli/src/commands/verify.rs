use std::path::PathBuf;

use embedconst_core::kernel::KERNEL_REL_TOL;
use embedconst_core::report::{compare_golden, format_num, grid_hash, snapshot_from};
use embedconst_core::{Error, GoldenSnapshot, Result, ResultTable};

use super::{constants, embed, interp, kernel, mt, Outcome};
use crate::config::RunConfig;

pub const GOLDEN_NAME: &str = "verify_all";

pub fn golden_path(cfg: &RunConfig) -> PathBuf {
    cfg.golden_dir.join(format!("{GOLDEN_NAME}.json"))
}

/// Hash of everything that shapes the pinned values: grid, geometry, `tau`
/// and the spectral resolutions.
pub fn run_hash(cfg: &RunConfig) -> String {
    let extra = format!(
        "tau={};n={},{},{};widths={};kernel_tol={}",
        format_num(cfg.tau()),
        embed::base_n(1),
        embed::base_n(2),
        embed::base_n(3),
        embed::widths().len(),
        format_num(KERNEL_REL_TOL),
    );
    grid_hash(&cfg.grid, &cfg.geometry, &extra)
}

/// Every subcommand on the configured grid, then the golden comparison. With
/// `bless` the snapshot is rewritten instead of compared.
pub fn run(cfg: &RunConfig) -> Result<Outcome> {
    if !cfg.pair_args.is_empty() {
        return Err(Error::Config("verify-all runs on the grid; drop --p, --q, --d and --alpha".into()));
    }
    let mut out = Outcome::default();
    for step in [constants::run, interp::run, kernel::run, embed::run, mt::run] {
        out.merge(step(cfg)?);
    }
    let hash = run_hash(cfg);
    let path = golden_path(cfg);
    if cfg.bless {
        std::fs::create_dir_all(&cfg.golden_dir)?;
        snapshot_from(GOLDEN_NAME, &hash, &out.measured).save(&path)?;
        return Ok(out);
    }
    let mut table = ResultTable::new("golden", &["key", "value", "golden", "tolerance", "rel_error", "pass"]);
    let fail_row = |msg: String| vec![msg.into(), f64::NAN.into(), f64::NAN.into(), f64::NAN.into(), f64::NAN.into(), false.into()];
    match GoldenSnapshot::load(&path) {
        Ok(golden) => {
            let report = compare_golden(&out.measured, &hash, &golden);
            if golden.grid_hash != hash {
                for miss in report.misses {
                    table.push(fail_row(miss));
                }
            } else {
                for m in &out.measured {
                    let row = match golden.values.get(&m.key) {
                        Some(e) => {
                            let err = if e.value == 0.0 { m.value.abs() } else { ((m.value - e.value) / e.value).abs() };
                            vec![m.key.as_str().into(), m.value.into(), e.value.into(), e.tolerance.into(), err.into(), (err <= e.tolerance).into()]
                        }
                        None => fail_row(format!("unknown key {}", m.key)),
                    };
                    table.push(row);
                }
                for key in golden.values.keys().filter(|k| !out.measured.iter().any(|m| &m.key == *k)) {
                    table.push(fail_row(format!("missing key {key}")));
                }
                debug_assert_eq!(table.failing_rows().len(), report.misses.len());
            }
        }
        Err(e) => {
            let msg = format!("cannot read golden snapshot {}: {e}; rerun with --bless to create it", path.display());
            table.push(fail_row(msg));
        }
    }
    out.tables.push(table);
    Ok(out)
}
