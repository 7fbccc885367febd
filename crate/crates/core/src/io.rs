//! JSON and CSV encodings. Floats are written with 17 significant digits
//! and object keys keep insertion order, so equal inputs give byte-identical
//! files. Non-finite numbers and missing entries become `null`.

use std::path::Path;
use std::str::FromStr;

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};
use crate::grid::{Grid, Window};
use crate::laxpair::WaveTable;
use crate::linalg::Matrix;
use crate::moments::{MomentPair, MomentSequence, MomentSource};
use crate::mop_table::PolyTable;
use crate::operators::LatticeOperator;
use crate::recurrence::CoeffField;
use crate::scalar::Real;

/// `v` in scientific notation with 17 significant digits and a signed
/// exponent, the same spelling JSON numbers get.
pub fn format_float(v: f64) -> String {
    let s = format!("{v:.16e}");
    match s.split_once('e') {
        Some((mantissa, exp)) if !exp.starts_with('-') => format!("{mantissa}e+{exp}"),
        _ => s,
    }
}

/// JSON number for a finite `v`, `null` otherwise.
pub fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::Number(Number::from_str(&format_float(v)).expect("formatted float parses"))
    } else {
        Value::Null
    }
}

pub fn opt_num(v: Option<f64>) -> Value {
    v.map_or(Value::Null, num)
}

fn nums<T: Real>(vs: &[T]) -> Value {
    Value::Array(vs.iter().map(|v| num(v.to_f64())).collect())
}

/// `[[g(0,0), g(0,1), ...], [g(1,0), ...], ...]`, outer index `n`.
pub fn grid_value<T>(g: &Grid<T>, f: impl Fn(&T) -> Value) -> Value {
    Value::Array(
        g.rows()
            .into_iter()
            .map(|row| Value::Array(row.iter().map(&f).collect()))
            .collect(),
    )
}

fn window_value(w: Window) -> Value {
    Value::Array(vec![w.n.into(), w.m.into()])
}

pub fn to_pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn poly_table_json<T: Real>(t: &PolyTable<T>) -> Value {
    let mut obj = Map::new();
    obj.insert("window".into(), window_value(t.window()));
    obj.insert("coeffs".into(), grid_value(t.grid(), |p| nums(p)));
    Value::Object(obj)
}

/// Rows `n,m,k,coeff` with the coefficient of `x^k` in `P_{n,m}`.
pub fn poly_table_csv<T: Real>(t: &PolyTable<T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "m", "k", "coeff"])?;
    for ((n, m), p) in t.grid().iter() {
        for (k, c) in p.iter().enumerate() {
            w.write_record([n.to_string(), m.to_string(), k.to_string(), format_float(c.to_f64())])?;
        }
    }
    finish_csv(w)
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

pub fn field_json<T: Real>(f: &CoeffField<T>) -> Value {
    let mut obj = Map::new();
    obj.insert("window".into(), window_value(f.window()));
    for (k, g) in [("a", f.a()), ("b", f.b()), ("c", f.c()), ("d", f.d())] {
        obj.insert(k.into(), grid_value(g, |v| num(v.to_f64())));
    }
    Value::Object(obj)
}

/// Rows `n,m,a,b,c,d`.
pub fn field_csv<T: Real>(f: &CoeffField<T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["n", "m", "a", "b", "c", "d"])?;
    for (n, m) in f.window().indices() {
        let (a, b, c, d) = f.at(n, m);
        let mut rec = vec![n.to_string(), m.to_string()];
        rec.extend([a, b, c, d].iter().map(|v| format_float(v.to_f64())));
        w.write_record(&rec)?;
    }
    finish_csv(w)
}

/// A rectangular `[[...]]` array indexed `[n][m]`, with `null` allowed when
/// `allow_null` is set.
fn parse_grid(v: &Value, name: &str, allow_null: bool) -> Result<Grid<Option<f64>>> {
    let rows = v
        .as_array()
        .ok_or_else(|| Error::Parse(format!("`{name}` must be an array of rows")))?;
    let mut out = Vec::with_capacity(rows.len());
    for row in rows {
        let row = row
            .as_array()
            .ok_or_else(|| Error::Parse(format!("`{name}` rows must be arrays")))?;
        let mut vals = Vec::with_capacity(row.len());
        for x in row {
            match x {
                Value::Null if allow_null => vals.push(None),
                Value::Number(n) => vals.push(Some(
                    n.as_f64()
                        .ok_or_else(|| Error::Parse(format!("bad number in `{name}`")))?,
                )),
                _ => return Err(Error::Parse(format!("`{name}` entries must be numbers"))),
            }
        }
        out.push(vals);
    }
    Grid::from_rows(out).ok_or_else(|| Error::Parse(format!("`{name}` must be a non-empty rectangular array")))
}

fn dense(g: Grid<Option<f64>>, name: &str) -> Result<Grid<f64>> {
    if let Some(((n, m), _)) = g.iter().find(|(_, v)| v.is_none()) {
        return Err(Error::Parse(format!("`{name}` is missing entry ({n}, {m})")));
    }
    Ok(g.map(|v| v.expect("checked")))
}

fn parse_object(text: &str) -> Result<Map<String, Value>> {
    match serde_json::from_str::<Value>(text)? {
        Value::Object(o) => Ok(o),
        _ => Err(Error::Parse("expected a JSON object".into())),
    }
}

fn required<'a>(obj: &'a Map<String, Value>, key: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Parse(format!("missing key `{key}`")))
}

/// Reads a field written by [`field_json`]; the boundary conditions are
/// validated.
pub fn read_field_json(text: &str) -> Result<CoeffField<f64>> {
    let obj = parse_object(text)?;
    let g = |k: &str| -> Result<Grid<f64>> { dense(parse_grid(required(&obj, k)?, k, false)?, k) };
    CoeffField::new(g("a")?, g("b")?, g("c")?, g("d")?)
}

/// Reads a field written by [`field_csv`].
pub fn read_field_csv(text: &str) -> Result<CoeffField<f64>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut rows: Vec<(usize, usize, [f64; 4])> = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 6 {
            return Err(Error::Parse("field CSV rows need n,m,a,b,c,d".into()));
        }
        let idx = |i: usize| rec[i].trim().parse::<usize>().map_err(|e| Error::Parse(e.to_string()));
        let val = |i: usize| rec[i].trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()));
        rows.push((idx(0)?, idx(1)?, [val(2)?, val(3)?, val(4)?, val(5)?]));
    }
    let n_max = rows
        .iter()
        .map(|r| r.0)
        .max()
        .ok_or_else(|| Error::Parse("empty field CSV".into()))?;
    let m_max = rows.iter().map(|r| r.1).max().expect("non-empty");
    let w = Window::new(n_max, m_max);
    let mut vals: Grid<Option<[f64; 4]>> = Grid::filled(w, None);
    for (n, m, v) in rows {
        vals[(n, m)] = Some(v);
    }
    if let Some(((n, m), _)) = vals.iter().find(|(_, v)| v.is_none()) {
        return Err(Error::Parse(format!("field CSV is missing site ({n}, {m})")));
    }
    let pick = |k: usize| vals.map(|v| v.expect("checked")[k]);
    CoeffField::new(pick(0), pick(1), pick(2), pick(3))
}

/// `(q, a, b)` grids for reconstruction: `{"q": [[...]], "a": ..., "b": ...}`.
/// A field file (with `c`, `d`) is accepted too and projected to `q`.
pub fn read_qab_json(text: &str) -> Result<(Grid<f64>, Grid<f64>, Grid<f64>)> {
    let obj = parse_object(text)?;
    let g = |k: &str| -> Result<Grid<f64>> { dense(parse_grid(required(&obj, k)?, k, false)?, k) };
    let q = if obj.contains_key("q") {
        g("q")?
    } else {
        let c = g("c")?;
        let d = g("d")?;
        if c.window() != d.window() {
            return Err(Error::Parse("`c` and `d` differ in shape".into()));
        }
        Grid::from_fn(c.window(), |n, m| (c[(n, m)] + d[(n, m)]) / 2.0)
    };
    Ok((q, g("a")?, g("b")?))
}

pub fn qab_json(q: &Grid<f64>, a: &Grid<f64>, b: &Grid<f64>) -> Value {
    let mut obj = Map::new();
    obj.insert("window".into(), window_value(q.window()));
    for (k, g) in [("q", q), ("a", a), ("b", b)] {
        obj.insert(k.into(), grid_value(g, |v| num(*v)));
    }
    Value::Object(obj)
}

/// Reconstructed `c, d` with `null` at unreached sites.
pub fn partial_field_json(c: &Grid<Option<f64>>, d: &Grid<Option<f64>>, a: &Grid<f64>, b: &Grid<f64>) -> Value {
    let mut obj = Map::new();
    obj.insert("window".into(), window_value(c.window()));
    obj.insert("a".into(), grid_value(a, |v| num(*v)));
    obj.insert("b".into(), grid_value(b, |v| num(*v)));
    obj.insert("c".into(), grid_value(c, |v| opt_num(*v)));
    obj.insert("d".into(), grid_value(d, |v| opt_num(*v)));
    Value::Object(obj)
}

pub fn matrix_csv<T: Real>(a: &Matrix<T>) -> Result<String> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    for i in 0..a.rows() {
        w.write_record((0..a.cols()).map(|j| format_float(a.get(i, j).to_f64())))?;
    }
    finish_csv(w)
}

/// `{"rows": R, "cols": R, "entries": [[i, j, v], ...]}`.
pub fn operator_triplets_json<T: Real>(op: &LatticeOperator<T>) -> Value {
    let size = op.window().sites();
    let entries = op
        .triplets()
        .into_iter()
        .map(|(i, j, v)| Value::Array(vec![i.into(), j.into(), num(v.to_f64())]))
        .collect();
    let mut obj = Map::new();
    obj.insert("rows".into(), size.into());
    obj.insert("cols".into(), size.into());
    obj.insert("entries".into(), Value::Array(entries));
    Value::Object(obj)
}

/// `{"z": v, "psi": [[[p, q, r], ...], ...]}`.
pub fn wave_json<T: Real>(w: &WaveTable<T>) -> Value {
    let mut obj = Map::new();
    obj.insert("z".into(), num(w.z.to_f64()));
    obj.insert("psi".into(), grid_value(&w.psi, |v| nums(v)));
    Value::Object(obj)
}

pub fn moments_json<T: Real>(pair: &MomentPair<T>) -> Value {
    let mut obj = Map::new();
    obj.insert("mu1".into(), nums(pair.mu1.values()));
    obj.insert("mu2".into(), nums(pair.mu2.values()));
    Value::Object(obj)
}

/// Rows `j,s` for one sequence.
pub fn moments_csv<T: Real>(seq: &MomentSequence<T>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["j", "s"])?;
    for (j, s) in seq.values().iter().enumerate() {
        w.write_record([j.to_string(), format_float(s.to_f64())])?;
    }
    finish_csv(w)
}

/// Reads `{"mu1": [...], "mu2": [...]}` and normalizes both lists.
pub fn read_moments_json(text: &str) -> Result<MomentPair<f64>> {
    let obj = parse_object(text)?;
    let list = |k: &str| -> Result<Vec<f64>> {
        required(&obj, k)?
            .as_array()
            .ok_or_else(|| Error::Parse(format!("`{k}` must be an array")))?
            .iter()
            .map(|v| {
                v.as_f64()
                    .ok_or_else(|| Error::Parse(format!("`{k}` entries must be numbers")))
            })
            .collect()
    };
    crate::moments::raw_moments(&list("mu1")?, &list("mu2")?)
}

/// Reads one `j,s` sequence; orders must be `0, 1, ...` without gaps.
pub fn read_moments_csv(text: &str) -> Result<MomentSequence<f64>> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut values = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        if rec.len() != 2 {
            return Err(Error::Parse("moment CSV rows need j,s".into()));
        }
        let j: usize = rec[0]
            .trim()
            .parse()
            .map_err(|e: std::num::ParseIntError| Error::Parse(e.to_string()))?;
        if j != values.len() {
            return Err(Error::Parse(format!("moment CSV order {j} out of sequence")));
        }
        values.push(rec[1].trim().parse::<f64>().map_err(|e| Error::Parse(e.to_string()))?);
    }
    MomentSequence::new(values, MomentSource::Raw)?.normalize()
}

/// Machine-readable outcome of a CLI command.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: String,
    pub pass: bool,
    pub max_residuals: Map<String, Value>,
    pub artifacts: Vec<String>,
    pub details: Map<String, Value>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report {
            command: command.into(),
            pass: true,
            max_residuals: Map::new(),
            artifacts: Vec::new(),
            details: Map::new(),
        }
    }

    pub fn residual(&mut self, key: &str, v: f64) -> &mut Self {
        self.max_residuals.insert(key.into(), num(v));
        self
    }

    pub fn detail(&mut self, key: &str, v: Value) -> &mut Self {
        self.details.insert(key.into(), v);
        self
    }

    pub fn to_json(&self) -> Value {
        let mut obj = Map::new();
        obj.insert("command".into(), self.command.clone().into());
        obj.insert("pass".into(), self.pass.into());
        obj.insert("max_residuals".into(), Value::Object(self.max_residuals.clone()));
        obj.insert(
            "artifacts".into(),
            Value::Array(self.artifacts.iter().map(|a| a.clone().into()).collect()),
        );
        for (k, v) in &self.details {
            obj.insert(k.clone(), v.clone());
        }
        Value::Object(obj)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::hermite_moments;

    #[test]
    fn floats_have_seventeen_digits() {
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
        assert_eq!(format_float(12.0), "1.2000000000000000e+1");
        assert_eq!(format_float(0.0), "0.0000000000000000e+0");
        assert_eq!(num(0.5).to_string(), "5.0000000000000000e-1");
        assert_eq!(num(f64::NAN), Value::Null);
        let back: f64 = format_float(1.0 / 3.0).parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }

    #[test]
    fn field_round_trips() {
        let w = Window::new(2, 1);
        let f = CoeffField::from_fn(w, |n, m| (n as f64 / 3.0, m as f64 * 0.7, 0.1, -2.5));
        let back = read_field_json(&field_json(&f).to_string()).unwrap();
        assert_eq!(back, f);
        let back = read_field_csv(&field_csv(&f).unwrap()).unwrap();
        assert_eq!(back, f);
    }

    #[test]
    fn field_reader_rejects_bad_input() {
        assert!(read_field_json("[]").is_err());
        assert!(read_field_json(r#"{"a": [[0]], "b": [[0]], "c": [[1]]}"#).is_err());
        assert!(read_field_json(r#"{"a": [[1]], "b": [[0]], "c": [[1]], "d": [[0]]}"#).is_err());
        assert!(read_field_json(r#"{"a": [[0], [1, 2]], "b": [[0]], "c": [[1]], "d": [[0]]}"#).is_err());
        assert!(read_field_csv("n,m,a,b,c,d\n").is_err());
        assert!(read_field_csv("n,m,a,b,c,d\n1,0,1,0,0,0\n").is_err());
    }

    #[test]
    fn qab_accepts_projected_fields() {
        let w = Window::new(1, 1);
        let f = CoeffField::from_fn(w, |_, _| (1.0, 1.0, 3.0, 1.0));
        let (q, a, _) = read_qab_json(&field_json(&f).to_string()).unwrap();
        assert_eq!(q[(1, 1)], 2.0);
        assert_eq!(a[(1, 1)], 1.0);
        let (q2, _, _) = read_qab_json(&qab_json(&q, &a, &a).to_string()).unwrap();
        assert_eq!(q2, q);
    }

    #[test]
    fn moments_round_trip() {
        let pair: MomentPair = MomentPair::new(hermite_moments(0.0, 4), hermite_moments(1.0, 4)).unwrap();
        let back = read_moments_json(&moments_json(&pair).to_string()).unwrap();
        assert_eq!(back.mu1.values(), pair.mu1.values());
        let seq = read_moments_csv(&moments_csv(&pair.mu2).unwrap()).unwrap();
        assert_eq!(seq.values(), pair.mu2.values());
        assert!(read_moments_csv("j,s\n1,2\n").is_err());
    }

    #[test]
    fn report_layout() {
        let mut r = Report::new("verify");
        r.residual("curvature", 0.0);
        r.artifacts.push("out.json".into());
        let text = r.to_json().to_string();
        assert!(
            text.starts_with(r#"{"command":"verify","pass":true,"max_residuals":{"curvature":0.0000000000000000e+0}"#)
        );
    }
}
