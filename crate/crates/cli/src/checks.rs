use embedconst_core::numeric::rel_diff;
use embedconst_core::{Cell, ExponentPair, ResultTable};

pub const CHECK_COLUMNS: [&str; 9] = ["check", "p", "q", "alpha", "d", "value", "bound", "margin", "pass"];

/// Input columns `(p, q, alpha, d)` of a check row; unused inputs print as `-`.
#[derive(Debug, Clone, Copy, Default)]
pub struct Key {
    pub p: Option<f64>,
    pub q: Option<f64>,
    pub alpha: Option<f64>,
    pub d: Option<u32>,
}

impl Key {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn pair(pair: &ExponentPair) -> Self {
        Self { p: Some(pair.p()), q: Some(pair.q()), alpha: Some(pair.alpha()), d: Some(pair.d()) }
    }

    pub fn alpha_d(alpha: f64, d: u32) -> Self {
        Self { alpha: Some(alpha), d: Some(d), ..Self::default() }
    }

    pub fn p(p: f64) -> Self {
        Self { p: Some(p), ..Self::default() }
    }

    pub fn d(d: u32) -> Self {
        Self { d: Some(d), ..Self::default() }
    }

    pub fn with_d(mut self, d: u32) -> Self {
        self.d = Some(d);
        self
    }

    fn cells(&self) -> [Cell; 4] {
        let opt = |x: Option<f64>| x.map_or_else(|| Cell::from("-"), Cell::from);
        [opt(self.p), opt(self.q), opt(self.alpha), self.d.map_or_else(|| Cell::from("-"), Cell::from)]
    }
}

/// A table of named `value` vs `bound` verdicts.
#[derive(Debug, Clone)]
pub struct Checks {
    table: ResultTable,
}

impl Checks {
    pub fn new(name: &str) -> Self {
        Self { table: ResultTable::new(name, &CHECK_COLUMNS) }
    }

    pub fn push(&mut self, check: &str, key: Key, value: f64, bound: f64, margin: f64, pass: bool) {
        let [p, q, a, d] = key.cells();
        self.table.push(vec![check.into(), p, q, a, d, value.into(), bound.into(), margin.into(), pass.into()]);
    }

    /// `value <= bound`
    pub fn le(&mut self, check: &str, key: Key, value: f64, bound: f64) {
        self.push(check, key, value, bound, bound - value, value <= bound);
    }

    /// `value >= bound`
    pub fn ge(&mut self, check: &str, key: Key, value: f64, bound: f64) {
        self.push(check, key, value, bound, value - bound, value >= bound);
    }

    /// Relative difference of `a` and `b` at most `tol`.
    pub fn close(&mut self, check: &str, key: Key, a: f64, b: f64, tol: f64) {
        self.le(check, key, rel_diff(a, b), tol);
    }

    /// Number of violations found by a scan; passes at zero.
    pub fn count(&mut self, check: &str, key: Key, violations: usize) {
        self.le(check, key, violations as f64, 0.0);
    }

    pub fn is_empty(&self) -> bool {
        self.table.rows.is_empty()
    }

    pub fn into_table(self) -> ResultTable {
        self.table
    }
}
