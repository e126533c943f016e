use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::eval::DensityMap;

/// Formats a float with 6 significant digits, trailing zeros dropped.
/// Exponent form is used outside `1e-5 ..= 1e6`.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..6).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

/// File-name-safe form of an identifier: runs of other characters become `_`.
pub fn slugify(s: &str) -> String {
    let mut out = String::new();
    for c in s.chars() {
        match c {
            'a'..='z' | 'A'..='Z' | '0'..='9' | '.' | '-' => out.push(c),
            _ if !out.ends_with('_') => out.push('_'),
            _ => {}
        }
    }
    out.trim_end_matches('_').to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Empty,
    Int(i64),
    Float(f64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(f) => Some(*f),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    fn render(&self) -> String {
        match self {
            Value::Empty => String::new(),
            Value::Int(i) => i.to_string(),
            Value::Float(f) => fmt_num(*f),
            Value::Text(s) => s.clone(),
        }
    }

    fn parse(field: &str) -> Value {
        if field.is_empty() {
            Value::Empty
        } else if let Ok(i) = field.parse::<i64>() {
            Value::Int(i)
        } else if let Ok(f) = field.parse::<f64>() {
            Value::Float(f)
        } else {
            Value::Text(field.to_string())
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<u64> for Value {
    fn from(x: u64) -> Self {
        Value::Int(x as i64)
    }
}

impl From<usize> for Value {
    fn from(x: usize) -> Self {
        Value::Int(x as i64)
    }
}

impl From<i32> for Value {
    fn from(x: i32) -> Self {
        Value::Int(x as i64)
    }
}

impl From<u32> for Value {
    fn from(x: u32) -> Self {
        Value::Int(x as i64)
    }
}

impl From<bool> for Value {
    fn from(x: bool) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<&str> for Value {
    fn from(x: &str) -> Self {
        Value::Text(x.to_string())
    }
}

impl From<String> for Value {
    fn from(x: String) -> Self {
        Value::Text(x)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(x: Option<T>) -> Self {
        x.map_or(Value::Empty, Into::into)
    }
}

/// Column-ordered result table.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        assert_eq!(row.len(), self.columns.len(), "row width does not match the header");
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn get<'a>(&'a self, row: &'a [Value], name: &str) -> &'a Value {
        self.column(name).map_or(&Value::Empty, |i| &row[i])
    }

    pub fn f64(&self, row: &[Value], name: &str) -> Option<f64> {
        self.get(row, name).as_f64()
    }

    pub fn text<'a>(&'a self, row: &'a [Value], name: &str) -> Option<&'a str> {
        self.get(row, name).as_str()
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Value::render)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let csv_err = |e: csv::Error| Error::Csv {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        };
        let columns: Vec<String> = r.headers().map_err(csv_err)?.iter().map(str::to_string).collect();
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec.map_err(csv_err)?;
            rows.push(rec.iter().map(Value::parse).collect());
        }
        Ok(Table { columns, rows })
    }
}

/// Linear gray-scale heatmap, one rect per cell, top row first.
/// Darker means more visits; an all-zero map is a uniform white background.
pub fn density_svg(map: &DensityMap) -> String {
    const CELL: usize = 24;
    let max = map.max();
    let mut out = String::new();
    let (w, h) = (map.width * CELL, map.height * CELL);
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#).unwrap();
    for row in 0..map.height {
        let y = map.height - 1 - row;
        for x in 0..map.width {
            let level = (255 * map.get(x, y)).checked_div(max).map_or(255, |v| 255 - v as u8);
            writeln!(
                out,
                r#"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="rgb({level},{level},{level})"/>"#,
                x * CELL,
                row * CELL
            )
            .unwrap();
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Inverse of [`DensityMap::to_csv`].
pub fn density_from_csv(text: &str) -> Result<DensityMap> {
    let mut rows: Vec<Vec<u64>> = Vec::new();
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<u64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Csv { line: i + 1, message: e.to_string() })?;
        if rows.first().is_some_and(|r| r.len() != row.len()) {
            return Err(Error::Csv { line: i + 1, message: "ragged density row".into() });
        }
        rows.push(row);
    }
    let height = rows.len();
    let width = rows.first().map_or(0, Vec::len);
    let mut counts = vec![0; width * height];
    for (r, row) in rows.iter().enumerate() {
        let y = height - 1 - r;
        counts[y * width..(y + 1) * width].copy_from_slice(row);
    }
    Ok(DensityMap { width, height, counts })
}

/// Modal-policy summary of 1D population rows at each environment's final checkpoint.
pub fn table1(results: &Table) -> Table {
    let mut out = Table::new(&["T", "policy_name", "pct_right_x0", "pct_right_x0m1", "pct_right_x0m2"]);
    let final_rows = final_checkpoint_rows(results);
    for row in final_rows {
        let Some(policy) = results.text(row, "modal_policy") else { continue };
        out.push(vec![
            results.get(row, "temperature").clone(),
            policy.into(),
            results.get(row, "pct_right_x0").clone(),
            results.get(row, "pct_right_x0m1").clone(),
            results.get(row, "pct_right_x0m2").clone(),
        ]);
    }
    out
}

/// Rows whose checkpoint is the largest seen for the same grid point and run.
fn final_checkpoint_rows(results: &Table) -> Vec<&Vec<Value>> {
    let key_cols = ["environment", "algorithm", "alpha", "epsilon", "run"];
    let key = |row: &[Value]| key_cols.map(|c| results.get(row, c).render());
    let Some(_) = results.column("checkpoint") else { return results.rows.iter().collect() };
    results
        .rows
        .iter()
        .filter(|row| {
            let cp = results.f64(row, "checkpoint").unwrap_or(0.0);
            !results.rows.iter().any(|o| key(o) == key(row) && results.f64(o, "checkpoint").unwrap_or(0.0) > cp)
        })
        .collect()
}

/// Regenerates derived artifacts of a finished run directory: `table1.csv`
/// when the results carry 1D modal policies, and an SVG next to every
/// `path_density_*.csv`.
pub fn emit_report(dir: &Path) -> Result<Vec<PathBuf>> {
    let results_path = dir.join("results.csv");
    let text = fs::read_to_string(&results_path)
        .map_err(|e| Error::InvalidConfig { path: results_path.display().to_string(), message: e.to_string() })?;
    let results = Table::from_csv(&text)?;
    let mut written = Vec::new();
    if results.column("modal_policy").is_some() {
        let t1 = table1(&results);
        if !t1.rows.is_empty() {
            let p = dir.join("table1.csv");
            fs::write(&p, t1.to_csv())?;
            written.push(p);
        }
    }
    let mut densities: Vec<PathBuf> = fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| {
            p.extension().is_some_and(|x| x == "csv")
                && p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("path_density_"))
        })
        .collect();
    densities.sort();
    for p in densities {
        let map = density_from_csv(&fs::read_to_string(&p)?)?;
        let svg = p.with_extension("svg");
        fs::write(&svg, density_svg(&map))?;
        written.push(svg);
    }
    Ok(written)
}
