//! CSV tables with a `# key=value` metadata block.
//!
//! Layout: metadata lines first, then a header row naming every column, then
//! data rows. Floats use the shortest representation that parses back to the
//! same value, so emitting is deterministic and parsing is lossless.

use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::error::{config, Result};
use crate::optimizers::{Method, RunTrace, TraceHeader, TraceRow};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn get_meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    pub fn write_to(&self, w: impl Write) -> Result<()> {
        let mut w = w;
        for (k, v) in &self.meta {
            writeln!(w, "# {k}={v}")?;
        }
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.columns)?;
        for row in &self.rows {
            out.write_record(row)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("utf-8 output")
    }

    pub fn read_from(r: impl Read) -> Result<Self> {
        let mut reader = BufReader::new(r);
        let mut meta = Vec::new();
        let mut rest = String::new();
        let mut line = String::new();
        loop {
            line.clear();
            if reader.read_line(&mut line)? == 0 {
                break;
            }
            if let Some(body) = line.strip_prefix("# ") {
                let body = body.trim_end_matches(['\n', '\r']);
                let (k, v) = body
                    .split_once('=')
                    .ok_or_else(|| config(format!("metadata line without '=': {body}")))?;
                meta.push((k.to_string(), v.to_string()));
            } else {
                rest.push_str(&line);
                reader.read_to_string(&mut rest)?;
                break;
            }
        }
        let mut rd = csv::Reader::from_reader(rest.as_bytes());
        let columns = rd.headers()?.iter().map(str::to_string).collect();
        let rows = rd
            .records()
            .map(|r| r.map(|rec| rec.iter().map(str::to_string).collect()))
            .collect::<std::result::Result<Vec<Vec<String>>, _>>()?;
        Ok(Self {
            meta,
            columns,
            rows,
        })
    }
}

/// Write `table` to `path`.
pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    table.write_to(std::io::BufWriter::new(file))
}

pub fn parse_csv(path: &Path) -> Result<Table> {
    Table::read_from(std::fs::File::open(path)?)
}

pub fn fmt_f64(x: f64) -> String {
    format!("{x}")
}

pub fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| config(format!("not a number: '{s}'")))
}

fn parse_opt(s: &str) -> Result<Option<f64>> {
    if s.is_empty() {
        Ok(None)
    } else {
        parse_f64(s).map(Some)
    }
}

fn parse_int<T: std::str::FromStr>(s: &str) -> Result<T> {
    s.parse()
        .map_err(|_| config(format!("not an integer: '{s}'")))
}

const TRACE_COLUMNS: [&str; 7] = [
    "t",
    "grad_norm",
    "momentum_norm",
    "grad_clip",
    "hvp_clip",
    "q_t",
    "samples_used",
];

/// Trace as a table; the header goes to the metadata block.
pub fn trace_table(trace: &RunTrace) -> Table {
    let h = &trace.header;
    let mut t = Table::new(&TRACE_COLUMNS);
    t.meta("method", h.method)
        .meta("seed", h.seed)
        .meta("gamma", fmt_f64(h.gamma))
        .meta("alpha", fmt_f64(h.alpha))
        .meta("lambda", fmt_opt(h.lambda))
        .meta("lambda_h_bar", fmt_opt(h.lambda_h_bar))
        .meta("b_init", h.b_init)
        .meta("provenance", &h.provenance)
        .meta("config_hash", h.config_hash.clone().unwrap_or_default());
    for r in &trace.rows {
        t.push(vec![
            r.t.to_string(),
            fmt_f64(r.grad_norm),
            fmt_f64(r.momentum_norm),
            (r.grad_clip as u8).to_string(),
            (r.hvp_clip as u8).to_string(),
            fmt_opt(r.q_t),
            r.samples_used.to_string(),
        ]);
    }
    t
}

/// Inverse of [`trace_table`].
pub fn trace_from_table(t: &Table) -> Result<RunTrace> {
    if t.columns != TRACE_COLUMNS {
        return Err(config(format!("unexpected trace columns {:?}", t.columns)));
    }
    let meta = |k: &str| {
        t.get_meta(k)
            .ok_or_else(|| config(format!("trace metadata lacks '{k}'")))
    };
    let flag = |s: &str| match s {
        "0" => Ok(false),
        "1" => Ok(true),
        _ => Err(config(format!("not a flag: '{s}'"))),
    };
    let hash = meta("config_hash")?;
    let header = TraceHeader {
        method: meta("method")?.parse::<Method>()?,
        seed: parse_int(meta("seed")?)?,
        gamma: parse_f64(meta("gamma")?)?,
        alpha: parse_f64(meta("alpha")?)?,
        lambda: parse_opt(meta("lambda")?)?,
        lambda_h_bar: parse_opt(meta("lambda_h_bar")?)?,
        b_init: parse_int(meta("b_init")?)?,
        provenance: meta("provenance")?.to_string(),
        config_hash: (!hash.is_empty()).then(|| hash.to_string()),
    };
    let rows = t
        .rows
        .iter()
        .map(|r| {
            Ok(TraceRow {
                t: parse_int(&r[0])?,
                grad_norm: parse_f64(&r[1])?,
                momentum_norm: parse_f64(&r[2])?,
                grad_clip: flag(&r[3])?,
                hvp_clip: flag(&r[4])?,
                q_t: parse_opt(&r[5])?,
                samples_used: parse_int(&r[6])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RunTrace { header, rows })
}
