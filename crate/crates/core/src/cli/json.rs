//! Matrix files and JSON output.
//!
//! A matrix file is `{"n": int, "entries": [[[re, im], ...], ...]}` with rows
//! in order. A prepared-matrix file adds `"b": [re, im]`, `"s_original"` and
//! `"c"`. Floats are written with 17 significant digits.

use std::io;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::ser::Formatter;
use serde_json::{json, Map, Value};

use crate::complexmat::{pad_to_square, ComplexMatrix, PreparedMatrix};
use crate::error::Error;

/// A parsed matrix file.
#[derive(Clone, Debug, PartialEq)]
pub enum MatrixFile {
    Raw(ComplexMatrix),
    Prepared(PreparedMatrix),
}

impl MatrixFile {
    pub fn n(&self) -> usize {
        match self {
            MatrixFile::Raw(m) => m.n(),
            MatrixFile::Prepared(p) => p.n(),
        }
    }
}

/// Problems with the content of an input file.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("invalid JSON: {0}")]
    Syntax(String),
    #[error("field \"{field}\": {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Matrix(#[from] Error),
}

fn field_error(field: impl Into<String>, message: impl Into<String>) -> FormatError {
    FormatError::Field {
        field: field.into(),
        message: message.into(),
    }
}

fn parse_complex(v: &Value, field: &str) -> Result<Complex64, FormatError> {
    let pair = v
        .as_array()
        .filter(|a| a.len() == 2)
        .ok_or_else(|| field_error(field, "expected [re, im]"))?;
    let part = |x: &Value| {
        x.as_f64()
            .filter(|f| f.is_finite())
            .ok_or_else(|| field_error(field, "expected two finite numbers"))
    };
    Ok(Complex64::new(part(&pair[0])?, part(&pair[1])?))
}

fn parse_real(obj: &Map<String, Value>, field: &str) -> Result<f64, FormatError> {
    obj.get(field)
        .ok_or_else(|| field_error(field, "missing"))?
        .as_f64()
        .ok_or_else(|| field_error(field, "expected a number"))
}

fn parse_rows(v: &Value) -> Result<Vec<Vec<Complex64>>, FormatError> {
    let rows = v
        .as_array()
        .ok_or_else(|| field_error("entries", "expected an array of rows"))?;
    if rows.is_empty() {
        return Err(field_error("entries", "no rows"));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (j, row) in rows.iter().enumerate() {
        let name = format!("entries[{j}]");
        let row = row.as_array().ok_or_else(|| field_error(&name, "expected an array"))?;
        if row.is_empty() {
            return Err(field_error(&name, "empty row"));
        }
        if let Some(first) = out.first().map(|r: &Vec<Complex64>| r.len()) {
            if row.len() != first {
                return Err(field_error(&name, format!("has {} entries, row 0 has {first}", row.len())));
            }
        }
        out.push(
            row.iter()
                .enumerate()
                .map(|(k, z)| parse_complex(z, &format!("entries[{j}][{k}]")))
                .collect::<Result<_, _>>()?,
        );
    }
    Ok(out)
}

/// Parses a raw or prepared matrix file.
///
/// Raw rectangular data is padded to the next power-of-two square, and `n`
/// must describe the padded size. Prepared files must already be square.
pub fn parse_matrix_file(text: &str) -> Result<MatrixFile, FormatError> {
    let value: Value = serde_json::from_str(text).map_err(|e| FormatError::Syntax(e.to_string()))?;
    let obj = value
        .as_object()
        .ok_or_else(|| FormatError::Syntax("top level must be an object".into()))?;
    let n = obj
        .get("n")
        .ok_or_else(|| field_error("n", "missing"))?
        .as_u64()
        .ok_or_else(|| field_error("n", "expected a nonnegative integer"))? as usize;
    let rows = parse_rows(obj.get("entries").ok_or_else(|| field_error("entries", "missing"))?)?;
    let matrix = pad_to_square(&rows)?;
    if matrix.n() != n {
        return Err(field_error(
            "n",
            format!("is {n} but the entries fill a {0}x{0} matrix (n = {1})", matrix.dim(), matrix.n()),
        ));
    }
    let prepared_keys = ["b", "s_original", "c"];
    if !prepared_keys.iter().any(|k| obj.contains_key(*k)) {
        return Ok(MatrixFile::Raw(matrix));
    }
    if rows.len() != matrix.dim() || rows[0].len() != matrix.dim() {
        return Err(field_error("entries", "a prepared matrix must be square with side 2^n"));
    }
    let b = parse_complex(obj.get("b").ok_or_else(|| field_error("b", "missing"))?, "b")?;
    let s_original = parse_real(obj, "s_original")?;
    let c = parse_real(obj, "c")?;
    Ok(MatrixFile::Prepared(PreparedMatrix::from_parts(matrix, b, s_original, c)?))
}

pub fn complex_value(z: Complex64) -> Value {
    json!([z.re, z.im])
}

pub fn matrix_value(m: &ComplexMatrix) -> Value {
    Value::Array(
        m.rows()
            .map(|row| Value::Array(row.iter().map(|&z| complex_value(z)).collect()))
            .collect(),
    )
}

/// `{"n", "entries"}`.
pub fn raw_file_value(m: &ComplexMatrix) -> Value {
    json!({ "n": m.n(), "entries": matrix_value(m) })
}

/// `{"n", "entries", "b", "s_original", "c"}`.
pub fn prepared_file_value(pm: &PreparedMatrix) -> Value {
    json!({
        "n": pm.n(),
        "entries": matrix_value(pm.matrix()),
        "b": complex_value(pm.b()),
        "s_original": pm.s_original(),
        "c": pm.c(),
    })
}

/// `x` with 17 significant digits, trailing zeros dropped, in the shortest
/// of positional or exponent notation (like C's `%.17g`).
pub fn format_g17(x: f64) -> String {
    if !x.is_finite() {
        return "null".into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    let (sign, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => ("-", m),
        None => ("", mantissa),
    };
    let digits: String = mantissa.chars().filter(|c| *c != '.').collect();
    let digits = digits.trim_end_matches('0');
    let digits = if digits.is_empty() { "0" } else { digits };
    if !(-5..17).contains(&exp) {
        let (head, tail) = digits.split_at(1);
        return if tail.is_empty() {
            format!("{sign}{head}e{exp}")
        } else {
            format!("{sign}{head}.{tail}e{exp}")
        };
    }
    if exp < 0 {
        let zeros = "0".repeat((-exp - 1) as usize);
        return format!("{sign}0.{zeros}{digits}");
    }
    let point = exp as usize + 1;
    if digits.len() <= point {
        format!("{sign}{digits}{}", "0".repeat(point - digits.len()))
    } else {
        format!("{sign}{}.{}", &digits[..point], &digits[point..])
    }
}

/// Compact JSON (the trait defaults) with every float written by [`format_g17`].
struct G17;

impl Formatter for G17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(format_g17(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

/// Serializes `value` as one line of JSON followed by a newline.
pub fn to_json_line<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, G17);
    value.serialize(&mut ser).expect("in-memory JSON serialization");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}
