//! Number formatting and CSV tables.

use std::io;
use std::path::Path;

use rankone_core::Measure;

/// Significant digits of every printed float.
pub const SIGNIFICANT_DIGITS: usize = 12;

/// `x` with [`SIGNIFICANT_DIGITS`] significant digits: positional notation
/// for moderate exponents, scientific otherwise.
pub fn fmt_float(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let exp: i32 = sci[sci.find('e').expect("exponent") + 1..].parse().expect("integer exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        sci
    }
}

/// `x` rounded to [`SIGNIFICANT_DIGITS`], for JSON numbers.
pub fn round_float(x: f64) -> f64 {
    if x.is_finite() {
        format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x).parse().unwrap_or(x)
    } else {
        x
    }
}

pub fn fmt_measure(m: &Measure) -> String {
    format!("{}/{}", m.count, m.total)
}

/// One CSV output: header plus string cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    pub file: String,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(file: String, header: &[&'static str]) -> Self {
        Table {
            file,
            header: header.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: io::Write>(&self, w: W) -> csv::Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_in(&self, dir: &Path) -> csv::Result<()> {
        let file = std::fs::File::create(dir.join(&self.file))?;
        self.write_to(io::BufWriter::new(file))
    }
}

pub const CORRELATION_COLUMNS: &[&str] = &["j", "J", "m", "pair_id", "value_num", "value_den", "error_bound"];

pub const FIT_COLUMNS: &[&str] = &[
    "j",
    "J",
    "m",
    "pair_id",
    "value_num",
    "value_den",
    "error_bound",
    "basis_element",
    "coefficient",
    "residual",
    "relative_residual",
    "pairs",
];

pub const MIXING_COLUMNS: &[&str] = &["j", "J", "m", "pairs", "sup_deviation", "min_ratio", "error_bound"];

pub const TENSOR_COLUMNS: &[&str] = &["j", "J", "m", "exponents", "value", "factors", "error_bound"];

pub const PROBE_COLUMNS: &[&str] = &["J", "p", "q", "gram"];

pub const STAGE_COLUMNS: &[&str] = &["j", "r_j", "h_j", "spacer_sum", "spacer_fraction", "m_j"];
