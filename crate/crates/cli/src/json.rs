//! JSON formats for series, symbols, parameters, systems and interpolation
//! data. Complex scalars are `[re, im]` pairs, matrices are row-major nested
//! arrays, and words are arrays of letters in `1..=N`.

use std::fmt;

use ncschur::realization::SystemBsn;
use ncschur::schur::SchurData;
use ncschur::series::NcSeries;
use ncschur::toeplitz::MultiToeplitzSymbol;
use ncschur::{Matrix, Series, Symbol, System, Word, C};
use serde_json::{json, Value};

/// Schema violation located by a JSON pointer.
#[derive(Debug, Clone, PartialEq)]
pub struct InputError {
    pub pointer: String,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let at = if self.pointer.is_empty() { "/" } else { &self.pointer };
        write!(f, "{at}: {}", self.message)
    }
}

impl std::error::Error for InputError {}

pub type JsonResult<T> = Result<T, InputError>;

pub fn error(pointer: &str, message: impl Into<String>) -> InputError {
    InputError {
        pointer: pointer.to_string(),
        message: message.into(),
    }
}

fn child(pointer: &str, key: impl fmt::Display) -> String {
    format!("{pointer}/{key}")
}

pub fn parse_text(text: &str) -> JsonResult<Value> {
    serde_json::from_str(text).map_err(|e| error("", format!("invalid JSON: {e}")))
}

fn field<'a>(v: &'a Value, pointer: &str, key: &str) -> JsonResult<&'a Value> {
    v.as_object()
        .ok_or_else(|| error(pointer, "expected an object"))?
        .get(key)
        .ok_or_else(|| error(&child(pointer, key), "missing field"))
}

fn array<'a>(v: &'a Value, pointer: &str) -> JsonResult<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| error(pointer, "expected an array"))
}

fn usize_field(v: &Value, pointer: &str, key: &str) -> JsonResult<usize> {
    let p = child(pointer, key);
    field(v, pointer, key)?
        .as_u64()
        .map(|x| x as usize)
        .ok_or_else(|| error(&p, "expected a nonnegative integer"))
}

fn positive_field(v: &Value, pointer: &str, key: &str) -> JsonResult<usize> {
    let x = usize_field(v, pointer, key)?;
    if x == 0 {
        return Err(error(&child(pointer, key), "must be at least 1"));
    }
    Ok(x)
}

pub fn parse_complex(v: &Value, pointer: &str) -> JsonResult<C<f64>> {
    let parts = array(v, pointer)?;
    if parts.len() != 2 {
        return Err(error(pointer, "complex scalar must be [re, im]"));
    }
    let part = |i: usize| {
        parts[i]
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| error(&child(pointer, i), "expected a finite number"))
    };
    Ok(C::new(part(0)?, part(1)?))
}

pub fn complex_json(z: C<f64>) -> Value {
    json!([z.re, z.im])
}

/// Matrix with a known shape; a matrix without rows is `[]`.
pub fn parse_matrix(v: &Value, pointer: &str, rows: usize, cols: usize) -> JsonResult<Matrix> {
    let rs = array(v, pointer)?;
    if rs.len() != rows {
        return Err(error(pointer, format!("expected {rows} rows, found {}", rs.len())));
    }
    let mut m = Matrix::zeros(rows, cols);
    for (i, r) in rs.iter().enumerate() {
        let rp = child(pointer, i);
        let entries = array(r, &rp)?;
        if entries.len() != cols {
            return Err(error(&rp, format!("expected {cols} entries, found {}", entries.len())));
        }
        for (j, z) in entries.iter().enumerate() {
            m[(i, j)] = parse_complex(z, &child(&rp, j))?;
        }
    }
    Ok(m)
}

/// Matrix whose shape is read from the data; it must be nonempty.
pub fn parse_matrix_any(v: &Value, pointer: &str) -> JsonResult<Matrix> {
    let rs = array(v, pointer)?;
    let first = rs.first().ok_or_else(|| error(pointer, "matrix must have at least one row"))?;
    let cols = array(first, &child(pointer, 0))?.len();
    if cols == 0 {
        return Err(error(&child(pointer, 0), "matrix must have at least one column"));
    }
    parse_matrix(v, pointer, rs.len(), cols)
}

pub fn matrix_json(m: &Matrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect()))
            .collect(),
    )
}

pub fn parse_word(v: &Value, pointer: &str, letters: usize) -> JsonResult<Word> {
    let items = array(v, pointer)?;
    let mut out = Vec::with_capacity(items.len());
    for (i, x) in items.iter().enumerate() {
        match x.as_u64() {
            Some(l) if l >= 1 && (l as usize) <= letters => out.push(l as usize),
            _ => {
                return Err(error(
                    &child(pointer, i),
                    format!("letter must be an integer in 1..={letters}"),
                ))
            }
        }
    }
    Ok(Word::from_letters(&out))
}

pub fn word_json(w: &Word) -> Value {
    json!(w.letters())
}

fn check_dims(pointer: &str, expected: usize, found: usize, what: &str) -> JsonResult<()> {
    if expected != found {
        return Err(error(pointer, format!("{what} is {found}, expected {expected}")));
    }
    Ok(())
}

pub fn series_to_json(s: &Series) -> Value {
    let coeffs: Vec<Value> = s
        .iter()
        .filter(|(_, c)| c.iter().any(|z| z.re != 0.0 || z.im != 0.0))
        .map(|(w, c)| json!({"word": word_json(w), "value": matrix_json(c)}))
        .collect();
    json!({
        "N": s.letters(),
        "in_dim": s.in_dim(),
        "out_dim": s.out_dim(),
        "max_degree": s.max_degree(),
        "coeffs": coeffs,
    })
}

pub fn series_from_json(v: &Value) -> JsonResult<Series> {
    let n = positive_field(v, "", "N")?;
    let in_dim = positive_field(v, "", "in_dim")?;
    let out_dim = positive_field(v, "", "out_dim")?;
    let degree = usize_field(v, "", "max_degree")?;
    let mut s = NcSeries::zero(n, out_dim, in_dim, degree);
    let mut seen = std::collections::BTreeSet::new();
    for (i, entry) in array(field(v, "", "coeffs")?, "/coeffs")?.iter().enumerate() {
        let p = format!("/coeffs/{i}");
        let w = parse_word(field(entry, &p, "word")?, &child(&p, "word"), n)?;
        if w.len() > degree {
            return Err(error(&child(&p, "word"), format!("word longer than max_degree {degree}")));
        }
        if !seen.insert(w.clone()) {
            return Err(error(&child(&p, "word"), "duplicate word"));
        }
        let m = parse_matrix(field(entry, &p, "value")?, &child(&p, "value"), out_dim, in_dim)?;
        s.set(w, m).map_err(|e| error(&p, e.to_string()))?;
    }
    Ok(s)
}

pub fn symbol_to_json(s: &Symbol) -> Value {
    let entries: Vec<Value> = s
        .iter()
        .map(|(w, c)| json!({"word": word_json(w), "value": matrix_json(c)}))
        .collect();
    json!({"N": s.letters(), "e_dim": s.e_dim(), "entries": entries})
}

pub fn symbol_from_json(v: &Value) -> JsonResult<Symbol> {
    let n = positive_field(v, "", "N")?;
    let e = positive_field(v, "", "e_dim")?;
    let mut s = MultiToeplitzSymbol::identity(n, e);
    let mut seen = std::collections::BTreeSet::new();
    for (i, entry) in array(field(v, "", "entries")?, "/entries")?.iter().enumerate() {
        let p = format!("/entries/{i}");
        let w = parse_word(field(entry, &p, "word")?, &child(&p, "word"), n)?;
        if w.is_empty() {
            return Err(error(&child(&p, "word"), "the empty-word entry is fixed to the identity"));
        }
        if !seen.insert(w.clone()) {
            return Err(error(&child(&p, "word"), "duplicate word"));
        }
        let m = parse_matrix(field(entry, &p, "value")?, &child(&p, "value"), e, e)?;
        s.set(w, m).map_err(|e| error(&p, e.to_string()))?;
    }
    Ok(s)
}

pub fn params_to_json(d: &SchurData<f64>) -> Value {
    let tree: Vec<Value> = d
        .tree
        .iter()
        .map(|(w, m)| {
            json!({"word": word_json(w), "rows": m.nrows(), "cols": m.ncols(), "value": matrix_json(m)})
        })
        .collect();
    json!({
        "N": d.letters,
        "e1": d.e1,
        "e2": d.e2,
        "depth": d.depth(),
        "rows": d.rows.iter().map(matrix_json).collect::<Vec<_>>(),
        "tree": tree,
    })
}

/// Parameters are rebuilt from the rows; a stored tree must agree with the
/// rebuilt one.
pub fn params_from_json(v: &Value) -> JsonResult<SchurData<f64>> {
    let n = positive_field(v, "", "N")?;
    let e1 = positive_field(v, "", "e1")?;
    let e2 = positive_field(v, "", "e2")?;
    let depth = usize_field(v, "", "depth")?;
    let rows_v = array(field(v, "", "rows")?, "/rows")?;
    check_dims("/rows", depth + 1, rows_v.len(), "number of rows")?;
    let mut rows = Vec::with_capacity(rows_v.len());
    for (k, r) in rows_v.iter().enumerate() {
        rows.push(parse_matrix(r, &format!("/rows/{k}"), e2, n.pow(k as u32) * e1)?);
    }
    let data = SchurData::from_rows(n, e1, e2, rows).map_err(|e| error("/rows", e.to_string()))?;
    if let Some(tree) = v.get("tree") {
        for (i, entry) in array(tree, "/tree")?.iter().enumerate() {
            let p = format!("/tree/{i}");
            let w = parse_word(field(entry, &p, "word")?, &child(&p, "word"), n)?;
            let r = usize_field(entry, &p, "rows")?;
            let c = usize_field(entry, &p, "cols")?;
            let m = parse_matrix(field(entry, &p, "value")?, &child(&p, "value"), r, c)?;
            let rebuilt = data
                .tree
                .get(&w)
                .ok_or_else(|| error(&child(&p, "word"), "word deeper than the parameter rows"))?;
            if rebuilt.shape() != m.shape() || (rebuilt - &m).norm() > 1e-9 {
                return Err(error(&p, "does not match the parameters derived from the rows"));
            }
        }
    }
    Ok(data)
}

pub fn system_to_json(s: &System) -> Value {
    json!({
        "N": s.letters,
        "e1": s.e1,
        "e2": s.e2,
        "f_dim": s.f_dim,
        "f_next_dim": s.f_next_dim,
        "A0": matrix_json(&s.a0),
        "B0": matrix_json(&s.b0),
        "C0": matrix_json(&s.c0),
        "D0": matrix_json(&s.d0),
    })
}

pub fn system_from_json(v: &Value) -> JsonResult<System> {
    let n = positive_field(v, "", "N")?;
    let e1 = positive_field(v, "", "e1")?;
    let e2 = positive_field(v, "", "e2")?;
    let f = usize_field(v, "", "f_dim")?;
    let fp = usize_field(v, "", "f_next_dim")?;
    if fp > f {
        return Err(error("/f_next_dim", "must not exceed f_dim"));
    }
    let a0 = parse_matrix(field(v, "", "A0")?, "/A0", n * fp, f)?;
    let b0 = parse_matrix(field(v, "", "B0")?, "/B0", n * fp, e2)?;
    let c0 = parse_matrix(field(v, "", "C0")?, "/C0", e1, f)?;
    let d0 = parse_matrix(field(v, "", "D0")?, "/D0", e1, e2)?;
    let sys = SystemBsn::new(n, a0, b0, c0, d0).map_err(|e| error("", e.to_string()))?;
    check_dims("/f_next_dim", fp, sys.f_next_dim, "f_next_dim")?;
    Ok(sys)
}

pub fn parse_points(v: &Value, pointer: &str) -> JsonResult<Vec<Vec<C<f64>>>> {
    let pts = array(v, pointer)?;
    let mut out = Vec::with_capacity(pts.len());
    for (i, p) in pts.iter().enumerate() {
        let pp = child(pointer, i);
        let coords = array(p, &pp)?;
        out.push(
            coords
                .iter()
                .enumerate()
                .map(|(j, z)| parse_complex(z, &child(&pp, j)))
                .collect::<JsonResult<Vec<_>>>()?,
        );
    }
    Ok(out)
}

pub fn parse_values(v: &Value, pointer: &str) -> JsonResult<Vec<C<f64>>> {
    array(v, pointer)?
        .iter()
        .enumerate()
        .map(|(i, z)| parse_complex(z, &child(pointer, i)))
        .collect()
}

/// Interpolation points in `C^N` and the prescribed values.
pub type PickData = (Vec<Vec<C<f64>>>, Vec<C<f64>>);

/// `{"points": […], "values": […]}`.
pub fn pick_from_json(v: &Value) -> JsonResult<PickData> {
    let points = parse_points(field(v, "", "points")?, "/points")?;
    let values = parse_values(field(v, "", "values")?, "/values")?;
    Ok((points, values))
}

/// `{"F": [F_1, …, F_N], "U": U, "V": V}`.
pub fn scattering_from_json(v: &Value) -> JsonResult<ncschur::Scattering> {
    let fs = array(field(v, "", "F")?, "/F")?;
    if fs.is_empty() {
        return Err(error("/F", "at least one operator is required"));
    }
    let u = parse_matrix_any(field(v, "", "U")?, "/U")?;
    let g = u.nrows();
    let vv = field(v, "", "V")?;
    let v_cols = array(vv, "/V")?
        .first()
        .and_then(Value::as_array)
        .map_or(0, Vec::len);
    let vm = parse_matrix(vv, "/V", g, v_cols)?;
    let f = fs
        .iter()
        .enumerate()
        .map(|(k, m)| parse_matrix(m, &format!("/F/{k}"), g, g))
        .collect::<JsonResult<Vec<_>>>()?;
    ncschur::scattering::ScatteringData::new(f, u, vm).map_err(|e| error("", e.to_string()))
}

pub fn to_text(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("serializable value");
    s.push('\n');
    s
}
