//! Line-delimited JSON records for graphs and datasets.
//!
//! One record per line:
//!
//! ```text
//! {"kind":"discrete","n":2,"d":1,"features":[[0.5],[1]],"adjacency":[[0,1],[1,0]]}
//! {"kind":"continuous","n":2,"d":1,"features":[[0.5],[1]],"adjacency":[[0,0.25],[0.25,0]],"mask":[1,0.5]}
//! ```
//!
//! Floats are written with 17 significant digits so that reading back is
//! exact. Dataset records may carry an extra `"input"` object with the task
//! input, which is passed through untouched.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use ndarray::{Array1, Array2};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::graph::{ContinuousGraph, DiscreteGraph};

#[derive(Debug, Clone, PartialEq)]
pub enum Graph {
    Discrete(DiscreteGraph),
    Continuous(ContinuousGraph),
}

impl From<DiscreteGraph> for Graph {
    fn from(g: DiscreteGraph) -> Self {
        Graph::Discrete(g)
    }
}

impl From<ContinuousGraph> for Graph {
    fn from(g: ContinuousGraph) -> Self {
        Graph::Continuous(g)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub graph: Graph,
    pub input: Option<Value>,
}

impl Record {
    pub fn new(graph: impl Into<Graph>) -> Self {
        Self {
            graph: graph.into(),
            input: None,
        }
    }

    pub fn with_input(mut self, input: Value) -> Self {
        self.input = Some(input);
        self
    }
}

/// `%.17g`-style formatting: shortest of fixed or scientific notation with
/// 17 significant digits and trailing zeros removed.
pub fn format_float(x: f64) -> String {
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.16e}", x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };

    if !(-5..17).contains(&exp) {
        let frac = digits[1..].trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{}e{exp}", &digits[..1])
        } else {
            format!("{sign}{}.{frac}e{exp}", &digits[..1])
        }
    } else if exp >= 0 {
        let split = exp as usize + 1;
        let (int, frac) = digits.split_at(split);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("{sign}0.{zeros}{}", digits.trim_end_matches('0'))
    }
}

fn write_floats(out: &mut String, xs: impl Iterator<Item = f64>) -> Result<()> {
    out.push('[');
    for (k, x) in xs.enumerate() {
        if !x.is_finite() {
            return Err(Error::InvalidGraph(format!("cannot serialize non-finite value {x}")));
        }
        if k > 0 {
            out.push(',');
        }
        out.push_str(&format_float(x));
    }
    out.push(']');
    Ok(())
}

fn write_matrix(out: &mut String, m: &Array2<f64>) -> Result<()> {
    out.push('[');
    for (k, row) in m.rows().into_iter().enumerate() {
        if k > 0 {
            out.push(',');
        }
        write_floats(out, row.iter().copied())?;
    }
    out.push(']');
    Ok(())
}

/// Serializes one record to a single line (without the newline).
pub fn record_to_line(record: &Record) -> Result<String> {
    let mut out = String::new();
    match &record.graph {
        Graph::Discrete(g) => {
            out.push_str(&format!(
                "{{\"kind\":\"discrete\",\"n\":{},\"d\":{},\"features\":",
                g.num_nodes(),
                g.feature_dim()
            ));
            write_matrix(&mut out, g.features())?;
            out.push_str(",\"adjacency\":");
            write_matrix(&mut out, g.adjacency())?;
        }
        Graph::Continuous(g) => {
            out.push_str(&format!(
                "{{\"kind\":\"continuous\",\"n\":{},\"d\":{},\"features\":",
                g.size(),
                g.feature_dim()
            ));
            write_matrix(&mut out, g.features())?;
            out.push_str(",\"adjacency\":");
            write_matrix(&mut out, g.edges())?;
            out.push_str(",\"mask\":");
            write_floats(&mut out, g.mask().iter().copied())?;
        }
    }
    if let Some(input) = &record.input {
        out.push_str(",\"input\":");
        out.push_str(&serde_json::to_string(input).map_err(|e| Error::InvalidGraph(e.to_string()))?);
    }
    out.push('}');
    Ok(out)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, line: usize) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::Parse {
        line,
        message: format!("missing \"{key}\""),
    })
}

fn as_usize(v: &Value, key: &str, line: usize) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| Error::Parse {
        line,
        message: format!("\"{key}\" must be a nonnegative integer"),
    })
}

fn as_vector(v: &Value, len: usize, key: &str, line: usize) -> Result<Vec<f64>> {
    let arr = v.as_array().ok_or_else(|| Error::Parse {
        line,
        message: format!("\"{key}\" must be an array"),
    })?;
    if arr.len() != len {
        return Err(Error::Parse {
            line,
            message: format!("\"{key}\" has length {}, expected {len}", arr.len()),
        });
    }
    arr.iter()
        .map(|x| {
            x.as_f64().ok_or_else(|| Error::Parse {
                line,
                message: format!("non-numeric entry in \"{key}\""),
            })
        })
        .collect()
}

fn as_matrix(v: &Value, rows: usize, cols: usize, key: &str, line: usize) -> Result<Array2<f64>> {
    let arr = v.as_array().ok_or_else(|| Error::Parse {
        line,
        message: format!("\"{key}\" must be an array of rows"),
    })?;
    if arr.len() != rows {
        return Err(Error::Parse {
            line,
            message: format!("\"{key}\" has {} rows, expected {rows}", arr.len()),
        });
    }
    let mut data = Vec::with_capacity(rows * cols);
    for row in arr {
        data.extend(as_vector(row, cols, key, line)?);
    }
    Ok(Array2::from_shape_vec((rows, cols), data).expect("shape checked"))
}

/// Parses one record; `line` is used in error messages.
pub fn parse_record(text: &str, line: usize) -> Result<Record> {
    let value: Value = serde_json::from_str(text).map_err(|e| Error::Parse {
        line,
        message: e.to_string(),
    })?;
    let obj = value.as_object().ok_or_else(|| Error::Parse {
        line,
        message: "record must be a JSON object".into(),
    })?;
    let kind = field(obj, "kind", line)?.as_str().ok_or_else(|| Error::Parse {
        line,
        message: "\"kind\" must be a string".into(),
    })?;
    let n = as_usize(field(obj, "n", line)?, "n", line)?;
    let d = as_usize(field(obj, "d", line)?, "d", line)?;
    let features = as_matrix(field(obj, "features", line)?, n, d, "features", line)?;
    let adjacency = as_matrix(field(obj, "adjacency", line)?, n, n, "adjacency", line)?;
    let wrap = |e: Error| Error::Parse {
        line,
        message: e.to_string(),
    };
    let graph = match kind {
        "discrete" => Graph::Discrete(DiscreteGraph::new(features, adjacency).map_err(wrap)?),
        "continuous" => {
            let mask = Array1::from(as_vector(field(obj, "mask", line)?, n, "mask", line)?);
            Graph::Continuous(ContinuousGraph::new(mask, features, adjacency).map_err(wrap)?)
        }
        other => {
            return Err(Error::Parse {
                line,
                message: format!("unknown kind \"{other}\""),
            })
        }
    };
    Ok(Record {
        graph,
        input: obj.get("input").cloned(),
    })
}

/// Streams records from a reader, skipping blank lines. Line numbers in
/// errors are 1-based.
pub struct RecordReader<R> {
    inner: R,
    line: usize,
    buf: String,
}

impl<R: BufRead> RecordReader<R> {
    pub fn new(inner: R) -> Self {
        Self {
            inner,
            line: 0,
            buf: String::new(),
        }
    }
}

impl<R: BufRead> Iterator for RecordReader<R> {
    type Item = Result<Record>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            self.buf.clear();
            match self.inner.read_line(&mut self.buf) {
                Ok(0) => return None,
                Ok(_) => {
                    self.line += 1;
                    let text = self.buf.trim();
                    if text.is_empty() {
                        continue;
                    }
                    return Some(parse_record(text, self.line));
                }
                Err(e) => return Some(Err(e.into())),
            }
        }
    }
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<Vec<Record>> {
    RecordReader::new(BufReader::new(File::open(path)?)).collect()
}

pub fn write_records<W: Write>(mut w: W, records: &[Record]) -> Result<()> {
    for r in records {
        writeln!(w, "{}", record_to_line(r)?)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dataset(path: impl AsRef<Path>, records: &[Record]) -> Result<()> {
    write_records(BufWriter::new(File::create(path)?), records)
}

/// Reads a single-graph file (its first record).
pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let mut records = RecordReader::new(BufReader::new(File::open(path)?));
    match records.next() {
        Some(r) => Ok(r?.graph),
        None => Err(Error::Parse {
            line: 0,
            message: "file contains no record".into(),
        }),
    }
}

pub fn write_graph(path: impl AsRef<Path>, graph: &Graph) -> Result<()> {
    write_dataset(path, &[Record::new(graph.clone())])
}
