use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Refinement axis of a convergence study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StudyAxis {
    /// Number of elements `N` (mesh size `h`).
    Space,
    /// Number of time steps `M_t` (`Δt = T/M_t`).
    Time,
    /// Number of order-quadrature nodes `M_q` (`p = 1/M_q`).
    Order,
}

impl StudyAxis {
    pub fn as_str(&self) -> &'static str {
        match self {
            StudyAxis::Space => "h",
            StudyAxis::Time => "dt",
            StudyAxis::Order => "p",
        }
    }

    fn label(&self) -> &'static str {
        match self {
            StudyAxis::Space => "N",
            StudyAxis::Time => "Δt",
            StudyAxis::Order => "p",
        }
    }

    fn cell(&self, resolution: usize) -> String {
        match self {
            StudyAxis::Space => resolution.to_string(),
            StudyAxis::Time => format!("T/{resolution}"),
            StudyAxis::Order => format!("1/{resolution}"),
        }
    }
}

impl FromStr for StudyAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "h" | "space" => Ok(StudyAxis::Space),
            "dt" | "time" => Ok(StudyAxis::Time),
            "p" | "order" => Ok(StudyAxis::Order),
            other => Err(Error::Parse(format!("unknown study axis '{other}' (expected h, dt or p)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableRow {
    pub resolution: usize,
    pub error: f64,
    /// Observed rate against the previous (coarser) row.
    pub order: Option<f64>,
}

/// Errors and observed orders along one refinement axis.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub axis: StudyAxis,
    pub rows: Vec<TableRow>,
    /// `(key, value)` pairs describing the fixed parameters.
    pub metadata: Vec<(String, String)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Markdown,
    /// Two columns `log10(resolution) log10(error)`.
    Gnuplot,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "csv" => Ok(TableFormat::Csv),
            "markdown" | "md" => Ok(TableFormat::Markdown),
            "gnuplot" => Ok(TableFormat::Gnuplot),
            other => Err(Error::Parse(format!("unknown table format '{other}'"))),
        }
    }
}

/// `(log E_a − log E_b)/log(n_b/n_a)`.
pub fn observed_order(coarse: (usize, f64), fine: (usize, f64)) -> f64 {
    (coarse.1.ln() - fine.1.ln()) / (fine.0 as f64 / coarse.0 as f64).ln()
}

impl ConvergenceTable {
    pub fn new(axis: StudyAxis) -> Self {
        Self { axis, rows: Vec::new(), metadata: Vec::new() }
    }

    /// Builds rows from `(resolution, error)` pairs, filling the orders.
    pub fn from_errors(axis: StudyAxis, data: &[(usize, f64)], metadata: Vec<(String, String)>) -> Self {
        let rows = data
            .iter()
            .enumerate()
            .map(|(i, &(resolution, error))| TableRow {
                resolution,
                error,
                order: (i > 0).then(|| observed_order(data[i - 1], (resolution, error))),
            })
            .collect();
        Self { axis, rows, metadata }
    }

    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order).collect()
    }

    /// Errors strictly decrease along the refinement.
    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].error < w[0].error)
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    /// Parses the CSV produced by [`emit_table`].
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut axis = StudyAxis::Space;
        let mut metadata = Vec::new();
        let mut rows = Vec::new();
        let mut seen_header = false;
        for (no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let (k, v) = rest
                    .split_once('=')
                    .ok_or_else(|| Error::Parse(format!("line {}: expected '# key = value'", no + 1)))?;
                let (k, v) = (k.trim(), v.trim());
                if k == "axis" {
                    axis = v.parse()?;
                } else {
                    metadata.push((k.to_string(), v.to_string()));
                }
                continue;
            }
            if !seen_header {
                if line != "resolution,error,order" {
                    return Err(Error::Parse(format!("line {}: expected header 'resolution,error,order'", no + 1)));
                }
                seen_header = true;
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 {
                return Err(Error::Parse(format!("line {}: expected 3 fields, found {}", no + 1, fields.len())));
            }
            let bad = |what: &str| Error::Parse(format!("line {}: invalid {what}", no + 1));
            let resolution = fields[0].trim().parse().map_err(|_| bad("resolution"))?;
            let error = fields[1].trim().parse().map_err(|_| bad("error"))?;
            let order = match fields[2].trim() {
                "" => None,
                s => Some(s.parse().map_err(|_| bad("order"))?),
            };
            rows.push(TableRow { resolution, error, order });
        }
        if !seen_header {
            return Err(Error::Parse("missing header 'resolution,error,order'".into()));
        }
        Ok(Self { axis, rows, metadata })
    }
}

/// Scientific notation with three significant digits and a two-digit
/// exponent, e.g. `1.03e-03`.
pub fn format_error(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{x:.2e}");
    let (mant, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", exp.abs())
}

fn format_order(o: Option<f64>) -> String {
    o.map(|v| format!("{v:.2}")).unwrap_or_default()
}

/// Renders a table as CSV (`resolution,error,order`, preceded by `# key = value`
/// metadata lines), a Markdown table in the layout of the published tables,
/// or gnuplot-ready log–log data.
pub fn emit_table(table: &ConvergenceTable, format: TableFormat) -> String {
    let mut out = String::new();
    match format {
        TableFormat::Csv => {
            writeln!(out, "# axis = {}", table.axis.as_str()).unwrap();
            for (k, v) in &table.metadata {
                writeln!(out, "# {k} = {v}").unwrap();
            }
            out.push_str("resolution,error,order\n");
            for r in &table.rows {
                writeln!(out, "{},{},{}", r.resolution, format_error(r.error), format_order(r.order)).unwrap();
            }
        }
        TableFormat::Markdown => {
            if !table.metadata.is_empty() {
                let meta: Vec<String> = table.metadata.iter().map(|(k, v)| format!("{k} = {v}")).collect();
                writeln!(out, "{}\n", meta.join(", ")).unwrap();
            }
            writeln!(out, "| {} | E_h | Λ_order |", table.axis.label()).unwrap();
            out.push_str("|---|---|---|\n");
            for r in &table.rows {
                let order = r.order.map(|o| format!("{o:.2}")).unwrap_or_else(|| "-".into());
                writeln!(out, "| {} | {} | {} |", table.axis.cell(r.resolution), format_error(r.error), order).unwrap();
            }
        }
        TableFormat::Gnuplot => {
            writeln!(out, "# log10({}) log10(E_h)", table.axis.as_str()).unwrap();
            for r in &table.rows {
                writeln!(out, "{:.6} {:.6}", (r.resolution as f64).log10(), r.error.log10()).unwrap();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn formatting() {
        assert_eq!(format_error(1.03e-3), "1.03e-03");
        assert_eq!(format_error(5.97e-9), "5.97e-09");
        assert_eq!(format_error(0.0), "0.00e+00");
        assert_eq!(format_error(123456.0), "1.23e+05");
        assert_eq!(format_error(9.996e-5), "1.00e-04");
    }

    #[test]
    fn csv_examples() {
        let empty = ConvergenceTable::new(StudyAxis::Space);
        let text = emit_table(&empty, TableFormat::Csv);
        assert_eq!(text.lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>(), vec!["resolution,error,order"]);
        let one = ConvergenceTable::from_errors(StudyAxis::Space, &[(10, 1.03e-3)], vec![]);
        let text = emit_table(&one, TableFormat::Csv);
        assert_eq!(text.lines().last().unwrap(), "10,1.03e-03,");
    }

    #[test]
    fn orders_and_markdown() {
        let t = ConvergenceTable::from_errors(
            StudyAxis::Time,
            &[(100, 4e-4), (200, 2e-4), (400, 1e-4)],
            vec![("beta".into(), "1.8".into())],
        );
        assert_eq!(t.rows[0].order, None);
        assert!(t.orders().iter().all(|o| (o - 1.0).abs() < 1e-12));
        assert!(t.is_monotone());
        let md = emit_table(&t, TableFormat::Markdown);
        assert!(md.contains("| T/200 | 2.00e-04 | 1.00 |"));
        assert!(md.contains("| T/100 | 4.00e-04 | - |"));
        let p = ConvergenceTable::from_errors(StudyAxis::Order, &[(10, 3.0e-4), (20, 3.1e-4)], vec![]);
        assert!(!p.is_monotone());
        assert!(emit_table(&p, TableFormat::Markdown).contains("| 1/10 |"));
        let gp = emit_table(&t, TableFormat::Gnuplot);
        assert_eq!(gp.lines().nth(1).unwrap(), "2.000000 -3.397940");
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(ConvergenceTable::parse_csv("").is_err());
        assert!(ConvergenceTable::parse_csv("resolution,error,order\n10,abc,\n").is_err());
        assert!(ConvergenceTable::parse_csv("res,err\n").is_err());
        assert!(ConvergenceTable::parse_csv("# axis = q\nresolution,error,order\n").is_err());
    }

    proptest! {
        #[test]
        fn round_trip(
            axis in prop_oneof![Just(StudyAxis::Space), Just(StudyAxis::Time), Just(StudyAxis::Order)],
            raw in prop::collection::vec((1usize..5000, 100u32..999, 1i32..12, prop::option::of(-300i32..900)), 0..6),
        ) {
            // values already at table precision survive the text form exactly
            let rows: Vec<TableRow> = raw
                .iter()
                .map(|&(n, m, e, o)| TableRow {
                    resolution: n,
                    error: format!("{}.{:02}e-{:02}", m / 100, m % 100, e).parse().unwrap(),
                    order: o.map(|o| format!("{:.2}", o as f64 / 100.0).parse().unwrap()),
                })
                .collect();
            let t = ConvergenceTable {
                axis,
                rows,
                metadata: vec![("case".into(), "example2".into()), ("beta".into(), "1.6".into())],
            };
            let back = ConvergenceTable::parse_csv(&emit_table(&t, TableFormat::Csv)).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
