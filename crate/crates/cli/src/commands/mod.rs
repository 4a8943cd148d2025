//! One module per subcommand. Each returns its tables and the values that
//! are pinned by the golden snapshot.

use embedconst_core::report::Measured;
use embedconst_core::{Cell, ResultTable};

pub mod constants;
pub mod embed;
pub mod interp;
pub mod kernel;
pub mod mt;
pub mod verify;

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub tables: Vec<ResultTable>,
    pub measured: Vec<Measured>,
}

impl Outcome {
    pub fn merge(&mut self, other: Outcome) {
        self.tables.extend(other.tables);
        self.measured.extend(other.measured);
    }

    pub fn check_count(&self) -> usize {
        self.tables.iter().filter(|t| t.column("pass").is_some()).map(|t| t.rows.len()).sum()
    }

    /// Failing rows as `table: col=value, ...` lines.
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for t in &self.tables {
            for row in t.failing_rows() {
                let cells: Vec<String> = t.columns.iter().zip(row).map(|(c, v)| format!("{c}={}", show(v))).collect();
                out.push(format!("{}: {}", t.name, cells.join(", ")));
            }
        }
        out
    }

    pub fn table(&self, name: &str) -> Option<&ResultTable> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn measured(&self, key: &str) -> Option<f64> {
        self.measured.iter().find(|m| m.key == key).map(|m| m.value)
    }
}

fn show(c: &Cell) -> String {
    match c {
        Cell::Num(x) => embedconst_core::report::format_num(*x),
        Cell::Int(i) => i.to_string(),
        Cell::Bool(b) => b.to_string(),
        Cell::Text(s) => s.clone(),
    }
}
