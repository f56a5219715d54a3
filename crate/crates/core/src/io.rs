//! File formats: trade and series CSV input, matrix artifacts, and the
//! metadata-headed CSV/JSON outputs written by the CLI.

use std::collections::BTreeMap;
use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::empirics::{CountrySeries, ProductAttributeMap};
use crate::error::{Error, Result};
use crate::matrix::{BipartiteMatrix, ExportVolumeTable, MatrixSummary};

pub const TRADE_HEADER: [&str; 4] = ["year", "country", "product", "value"];
pub const SERIES_HEADER: [&str; 2] = ["country", "value"];
pub const ATTRIBUTE_HEADER: [&str; 2] = ["product", "attribute"];
pub const EDGE_HEADER: [&str; 2] = ["country", "product"];

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r)
}

/// Returns `Ok(false)` for an empty file (no header at all).
fn check_header<R: Read>(rdr: &mut csv::Reader<R>, expected: &[&str]) -> Result<bool> {
    let headers = rdr.headers()?.clone();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Ok(false);
    }
    if headers.iter().ne(expected.iter().copied()) {
        return Err(Error::BadHeader {
            found: headers.iter().collect::<Vec<_>>().join(","),
            expected: expected.join(","),
        });
    }
    Ok(true)
}

fn line_of(rec: &csv::StringRecord) -> u64 {
    rec.position().map_or(0, |p| p.line())
}

fn open(path: &Path) -> Result<fs::File> {
    fs::File::open(path).map_err(|e| Error::io(path, e))
}

/// Parses `year,country,product,value` rows into one table per year.
/// Negative, non-numeric or duplicate rows are rejected with their line
/// number (the header is line 1).
pub fn parse_trade_csv<R: Read>(input: R) -> Result<BTreeMap<i32, ExportVolumeTable>> {
    let mut rdr = reader(input);
    if !check_header(&mut rdr, &TRADE_HEADER)? {
        return Err(Error::NoData);
    }
    let mut tables: BTreeMap<i32, ExportVolumeTable> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let bad = |message: String| Error::BadRow { line, message };
        let year: i32 = rec[0]
            .parse()
            .map_err(|_| bad(format!("year {:?} is not an integer", &rec[0])))?;
        let value: f64 = rec[3]
            .parse()
            .map_err(|_| bad(format!("value {:?} is not a number", &rec[3])))?;
        if !value.is_finite() {
            return Err(bad(format!("value {value} is not finite")));
        }
        if value < 0.0 {
            return Err(bad(format!("negative value {value}")));
        }
        if rec[1].is_empty() || rec[2].is_empty() {
            return Err(bad("empty country or product code".into()));
        }
        tables
            .entry(year)
            .or_insert_with(|| ExportVolumeTable::new(year))
            .insert(&rec[1], &rec[2], value)
            .map_err(|e| bad(e.to_string()))?;
    }
    if tables.is_empty() {
        return Err(Error::NoData);
    }
    Ok(tables)
}

pub fn read_trade_csv(path: &Path) -> Result<BTreeMap<i32, ExportVolumeTable>> {
    parse_trade_csv(open(path)?)
}

/// Picks the table for `year`, or the only table when `year` is `None`.
pub fn select_year(
    mut tables: BTreeMap<i32, ExportVolumeTable>,
    year: Option<i32>,
) -> Result<ExportVolumeTable> {
    match year {
        Some(y) => tables
            .remove(&y)
            .ok_or_else(|| Error::InvalidArgument(format!("no rows for year {y}"))),
        None if tables.len() == 1 => Ok(tables.into_values().next().unwrap()),
        None => Err(Error::InvalidArgument(format!(
            "file holds years {:?}; pick one",
            tables.keys().collect::<Vec<_>>()
        ))),
    }
}

/// Parses a `country,value` file.
pub fn parse_series_csv<R: Read>(
    input: R,
    label: &str,
    year: Option<i32>,
) -> Result<CountrySeries> {
    let mut rdr = reader(input);
    if !check_header(&mut rdr, &SERIES_HEADER)? {
        return Err(Error::NoData);
    }
    let mut values = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let v: f64 = rec[1].parse().map_err(|_| Error::BadRow {
            line,
            message: format!("value {:?} is not a number", &rec[1]),
        })?;
        if values.insert(rec[0].to_owned(), v).is_some() {
            return Err(Error::BadRow {
                line,
                message: format!("duplicate country {:?}", &rec[0]),
            });
        }
    }
    CountrySeries::new(label, year, values)
}

pub fn read_series_csv(path: &Path, label: &str) -> Result<CountrySeries> {
    parse_series_csv(open(path)?, label, None)
}

/// Parses a `product,attribute` file; one row per pair.
pub fn parse_attributes_csv<R: Read>(input: R) -> Result<ProductAttributeMap> {
    let mut rdr = reader(input);
    if !check_header(&mut rdr, &ATTRIBUTE_HEADER)? {
        return Err(Error::NoData);
    }
    let mut map = ProductAttributeMap::new();
    for rec in rdr.records() {
        let rec = rec?;
        map.insert(&rec[0], &rec[1]);
    }
    Ok(map)
}

pub fn read_attributes_csv(path: &Path) -> Result<ProductAttributeMap> {
    parse_attributes_csv(open(path)?)
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(Sha256::digest(&bytes)
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance written at the top of every output file. Contains no
/// timestamps, so identical runs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub params: serde_json::Value,
    pub seed: Option<u64>,
    pub inputs: Vec<InputDigest>,
}

impl RunMeta {
    pub fn new(command: &str, params: serde_json::Value, seed: Option<u64>) -> Self {
        Self {
            tool: "ecomplex".into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            params,
            seed,
            inputs: Vec::new(),
        }
    }

    pub fn with_input(mut self, path: &Path) -> Result<Self> {
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: file_digest(path)?,
        });
        Ok(self)
    }

    fn csv_header(&self) -> String {
        let mut s = format!(
            "# tool: {} {}\n# command: {}\n",
            self.tool, self.version, self.command
        );
        s += &format!("# params: {}\n", self.params);
        if let Some(seed) = self.seed {
            s += &format!("# seed: {seed}\n");
        }
        for i in &self.inputs {
            s += &format!("# input: {} sha256={}\n", i.path, i.sha256);
        }
        s
    }
}

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Int(i64),
    Float(f64),
    Empty,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_owned())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<i32> for Cell {
    fn from(v: i32) -> Self {
        Cell::Int(v.into())
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v as i64)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

impl Cell {
    fn to_csv(&self) -> String {
        match self {
            Cell::Str(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Float(f) => f.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn to_json(&self) -> serde_json::Value {
        match self {
            Cell::Str(s) => s.clone().into(),
            Cell::Int(i) => (*i).into(),
            Cell::Float(f) => {
                serde_json::Number::from_f64(*f).map_or(serde_json::Value::Null, Into::into)
            }
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

/// A rectangular output table.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width");
        self.rows.push(row);
    }

    /// CSV with a `#` metadata header.
    pub fn to_csv(&self, meta: &RunMeta) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::to_csv))?;
        }
        let body = String::from_utf8(
            w.into_inner()
                .map_err(|e| Error::io("<memory>", e.into_error()))?,
        )
        .expect("csv output is utf-8");
        Ok(meta.csv_header() + &body)
    }

    /// `{"meta": ..., "rows": [{column: value, ...}, ...]}`.
    pub fn to_json(&self, meta: &RunMeta) -> Result<String> {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|row| {
                let obj: serde_json::Map<String, serde_json::Value> = self
                    .columns
                    .iter()
                    .cloned()
                    .zip(row.iter().map(Cell::to_json))
                    .collect();
                obj.into()
            })
            .collect();
        let doc = serde_json::json!({ "meta": meta, "columns": self.columns, "rows": rows });
        Ok(serde_json::to_string_pretty(&doc)? + "\n")
    }

    /// Writes `dir/stem.{csv|json}` and returns the path.
    pub fn write(
        &self,
        dir: &Path,
        stem: &str,
        format: OutputFormat,
        meta: &RunMeta,
    ) -> Result<PathBuf> {
        let path = dir.join(format!("{stem}.{}", format.extension()));
        let text = match format {
            OutputFormat::Csv => self.to_csv(meta)?,
            OutputFormat::Json => self.to_json(meta)?,
        };
        write_file(&path, &text)?;
        Ok(path)
    }
}

pub fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes a JSON document `{"meta": ..., <fields of body>}`.
pub fn write_json_summary<T: Serialize>(path: &Path, meta: &RunMeta, body: &T) -> Result<()> {
    let mut doc = serde_json::Map::new();
    doc.insert("meta".into(), serde_json::to_value(meta)?);
    match serde_json::to_value(body)? {
        serde_json::Value::Object(fields) => doc.extend(fields),
        other => {
            doc.insert("result".into(), other);
        }
    }
    write_file(path, &(serde_json::to_string_pretty(&doc)? + "\n"))
}

/// Sidecar describing a matrix artifact. The edge list lives next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixSidecar {
    pub meta: RunMeta,
    pub edge_file: String,
    pub year: Option<i32>,
    pub threshold: Option<f64>,
    #[serde(flatten)]
    pub summary: MatrixSummary,
    pub countries: Vec<String>,
    pub products: Vec<String>,
}

/// Writes `dir/stem.edges.csv` and `dir/stem.json`; returns the sidecar path.
pub fn write_matrix_artifact(
    dir: &Path,
    stem: &str,
    m: &BipartiteMatrix,
    year: Option<i32>,
    threshold: Option<f64>,
    meta: &RunMeta,
) -> Result<PathBuf> {
    let edge_file = format!("{stem}.edges.csv");
    let mut table = Table::new(&EDGE_HEADER);
    for (c, p) in m.edges() {
        table.push(vec![
            m.countries()[c].as_str().into(),
            m.products()[p].as_str().into(),
        ]);
    }
    write_file(&dir.join(&edge_file), &table.to_csv(meta)?)?;
    let sidecar = MatrixSidecar {
        meta: meta.clone(),
        edge_file,
        year,
        threshold,
        summary: MatrixSummary::from(m),
        countries: m.countries().to_vec(),
        products: m.products().to_vec(),
    };
    let path = dir.join(format!("{stem}.json"));
    write_file(&path, &(serde_json::to_string_pretty(&sidecar)? + "\n"))?;
    Ok(path)
}

/// Loads a matrix from its sidecar JSON.
pub fn read_matrix_artifact(sidecar_path: &Path) -> Result<(BipartiteMatrix, MatrixSidecar)> {
    let text = fs::read_to_string(sidecar_path).map_err(|e| Error::io(sidecar_path, e))?;
    let sidecar: MatrixSidecar = serde_json::from_str(&text)?;
    let edge_path = sidecar_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .join(&sidecar.edge_file);
    let mut rdr = reader(open(&edge_path)?);
    if !check_header(&mut rdr, &EDGE_HEADER)? {
        return Err(Error::NoData);
    }
    let cidx: BTreeMap<&str, usize> = sidecar
        .countries
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_str(), i))
        .collect();
    let pidx: BTreeMap<&str, usize> = sidecar
        .products
        .iter()
        .enumerate()
        .map(|(i, p)| (p.as_str(), i))
        .collect();
    let mut edges = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = line_of(&rec);
        let c = cidx.get(&rec[0]).ok_or_else(|| Error::BadRow {
            line,
            message: format!("unknown country {:?}", &rec[0]),
        })?;
        let p = pidx.get(&rec[1]).ok_or_else(|| Error::BadRow {
            line,
            message: format!("unknown product {:?}", &rec[1]),
        })?;
        edges.push((*c, *p));
    }
    let m = BipartiteMatrix::new(sidecar.countries.clone(), sidecar.products.clone(), edges)?;
    if m.n_edges() != sidecar.summary.n_edges {
        return Err(Error::InvalidMatrix(format!(
            "sidecar records {} edges, edge list has {}",
            sidecar.summary.n_edges,
            m.n_edges()
        )));
    }
    Ok((m, sidecar))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trade_csv_happy_path() {
        let text =
            "year,country,product,value\n2000,A,p1,10\n2000,A,p2,10\n2000,B,p1,20\n2001,A,p1,1\n";
        let t = parse_trade_csv(text.as_bytes()).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t[&2000].get("B", "p1"), Some(20.0));
        let only = select_year(t.clone(), Some(2001)).unwrap();
        assert_eq!(only.len(), 1);
        assert!(select_year(t, None).is_err());
    }

    #[test]
    fn trade_csv_rejections_carry_line_numbers() {
        let neg = "year,country,product,value\n2000,A,p1,-5\n";
        assert!(matches!(
            parse_trade_csv(neg.as_bytes()),
            Err(Error::BadRow { line: 2, .. })
        ));
        let nan = "year,country,product,value\n2000,A,p1,10\n2000,A,p2,abc\n";
        assert!(matches!(
            parse_trade_csv(nan.as_bytes()),
            Err(Error::BadRow { line: 3, .. })
        ));
        let dup = "year,country,product,value\n2000,A,p1,1\n2000,A,p1,2\n";
        assert!(matches!(
            parse_trade_csv(dup.as_bytes()),
            Err(Error::BadRow { line: 3, .. })
        ));
    }

    #[test]
    fn trade_csv_empty_and_bad_header() {
        assert!(matches!(parse_trade_csv("".as_bytes()), Err(Error::NoData)));
        assert!(matches!(
            parse_trade_csv("year,country,product,value\n".as_bytes()),
            Err(Error::NoData)
        ));
        assert!(matches!(
            parse_trade_csv("a,b\n1,2\n".as_bytes()),
            Err(Error::BadHeader { .. })
        ));
    }

    #[test]
    fn series_and_attributes() {
        let s = parse_series_csv("country,value\nA,1.5\nB,2\n".as_bytes(), "gdp", None).unwrap();
        assert_eq!(s.values["B"], 2.0);
        assert!(parse_series_csv("country,value\nA,1\nA,2\n".as_bytes(), "gdp", None).is_err());
        let a = parse_attributes_csv("product,attribute\np1,x\np1,y\np2,x\n".as_bytes()).unwrap();
        assert_eq!(a.get("p1").unwrap().len(), 2);
    }

    #[test]
    fn table_formats() {
        let meta = RunMeta::new("test", serde_json::json!({"k": 1}), Some(3));
        let mut t = Table::new(&["a", "b"]);
        t.push(vec!["x".into(), 1.5.into()]);
        t.push(vec!["y".into(), Cell::Empty]);
        let csv = t.to_csv(&meta).unwrap();
        assert!(csv.starts_with("# tool: ecomplex"));
        assert!(csv.contains("# seed: 3\n"));
        assert!(csv.ends_with("a,b\nx,1.5\ny,\n"));
        let json: serde_json::Value = serde_json::from_str(&t.to_json(&meta).unwrap()).unwrap();
        assert_eq!(json["rows"][0]["b"], 1.5);
        assert!(json["rows"][1]["b"].is_null());
    }

    #[test]
    fn matrix_artifact_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let m = BipartiteMatrix::from_dense(&[vec![true, false, false], vec![true, true, false]])
            .unwrap();
        let meta = RunMeta::new("ingest", serde_json::json!({}), None);
        let path =
            write_matrix_artifact(dir.path(), "m", &m, Some(2000), Some(1.0), &meta).unwrap();
        let (back, side) = read_matrix_artifact(&path).unwrap();
        assert_eq!(back, m);
        assert_eq!(side.summary.isolated_products, vec!["p2".to_string()]);
        assert_eq!(side.threshold, Some(1.0));
    }
}
