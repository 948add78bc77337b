//! File formats: one-column series, order-event tables, fluctuation curves,
//! and multifractal tables, all CSV with a `# key = value` metadata preamble.
//!
//! Floats are written in Rust's shortest round-trip decimal form, so a file
//! read back yields bit-identical values. All writes go through a temp file
//! and rename, so a crashed run never leaves a half-written artifact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::dma::FluctuationCurve;
use crate::error::{Error, Result};
use crate::mfdma::MultifractalResult;
use crate::orderflow::{EventKind, OrderEvent, Side};

/// Ordered `# key = value` metadata lines at the top of every artifact.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Preamble {
    pub entries: Vec<(String, String)>,
}

impl Preamble {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            writeln!(out, "# {k} = {v}").expect("writing to String cannot fail");
        }
        out
    }

    /// Reads the leading `#` lines of `text`.
    pub fn parse(text: &str) -> Preamble {
        let mut preamble = Preamble::new();
        for line in text.lines() {
            let Some(rest) = line.strip_prefix('#') else {
                break;
            };
            if let Some((k, v)) = rest.split_once('=') {
                preamble.push(k.trim(), v.trim());
            }
        }
        preamble
    }
}

/// Lowercase hex SHA-256 of `bytes`.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let digest = hasher.finalize();
    let mut out = String::with_capacity(64);
    for b in digest {
        write!(out, "{b:02x}").expect("writing to String cannot fail");
    }
    out
}

/// SHA-256 of a file's raw bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Writes via a temp file in the destination directory plus an atomic
/// rename.
pub fn atomic_write(path: &Path, contents: &str) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    fs::write(tmp.path(), contents)?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn parse_err(path: &Path, line: u64, message: impl ToString) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        line,
        message: message.to_string(),
    }
}

/// One-column series file: preamble, `value` header, one number per line.
pub fn write_series(path: &Path, values: &[f64], preamble: &Preamble) -> Result<()> {
    let mut out = preamble.render();
    out.push_str("value\n");
    for v in values {
        writeln!(out, "{v}").expect("writing to String cannot fail");
    }
    atomic_write(path, &out)
}

/// Reads a one-column numeric CSV with optional preamble and header.
pub fn read_series(path: &Path) -> Result<(Vec<f64>, Preamble)> {
    let text = fs::read_to_string(path)?;
    let preamble = Preamble::parse(&text);
    let mut values = Vec::new();
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = raw.trim();
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        match line.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => return Err(parse_err(path, line_no, format!("non-finite value {v}"))),
            Err(_) if !seen_header && values.is_empty() => seen_header = true,
            Err(e) => {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("bad number {line:?}: {e}"),
                ))
            }
        }
    }
    if values.is_empty() {
        return Err(parse_err(path, 1, "file contains no data rows"));
    }
    Ok((values, preamble))
}

const EVENT_HEADER: &str = "seq,side,price_ticks,quantity,kind,order_id,phase";

/// Order-event table; the `phase` column is written as `continuous`.
pub fn write_events(path: &Path, events: &[OrderEvent], preamble: &Preamble) -> Result<()> {
    let mut out = preamble.render();
    out.push_str(EVENT_HEADER);
    out.push('\n');
    for e in events {
        let side = match e.side {
            Side::Buy => "buy",
            Side::Sell => "sell",
        };
        let kind = match e.kind {
            EventKind::Submit => "submit",
            EventKind::Cancel => "cancel",
        };
        let id = e.order_id.map(|v| v.to_string()).unwrap_or_default();
        writeln!(
            out,
            "{},{},{},{},{},{},continuous",
            e.seq, side, e.price, e.quantity, kind, id
        )
        .expect("writing to String cannot fail");
    }
    atomic_write(path, &out)
}

/// Parsed event file. Rows whose `phase` is not `continuous` are dropped (the
/// analysis covers only the continuous double auction); the count is kept so
/// callers can record it.
#[derive(Debug, Clone)]
pub struct EventsFile {
    pub events: Vec<OrderEvent>,
    pub dropped_non_continuous: usize,
    pub preamble: Preamble,
}

pub fn read_events(path: &Path) -> Result<EventsFile> {
    let text = fs::read_to_string(path)?;
    let preamble = Preamble::parse(&text);
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let need = |name: &str| {
        col(name).ok_or_else(|| parse_err(path, 1, format!("missing required column {name:?}")))
    };
    let c_seq = need("seq")?;
    let c_side = need("side")?;
    let c_price = need("price_ticks")?;
    let c_qty = need("quantity")?;
    let c_kind = need("kind")?;
    let c_id = col("order_id");
    let c_phase = col("phase");

    let mut events = Vec::new();
    let mut dropped = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, e.to_string())
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        let field = |i: usize| -> Result<&str> {
            record.get(i).ok_or_else(|| {
                parse_err(path, line, format!("row has only {} fields", record.len()))
            })
        };

        if let Some(ci) = c_phase {
            let phase = field(ci)?;
            if !phase.is_empty() && phase != "continuous" {
                dropped += 1;
                continue;
            }
        }

        let parse_u64 = |i: usize, what: &str| -> Result<u64> {
            let raw = field(i)?;
            raw.parse::<u64>()
                .map_err(|e| parse_err(path, line, format!("bad {what} {raw:?}: {e}")))
        };
        let side = match field(c_side)? {
            "buy" => Side::Buy,
            "sell" => Side::Sell,
            other => return Err(parse_err(path, line, format!("bad side {other:?}"))),
        };
        let kind = match field(c_kind)? {
            "submit" => EventKind::Submit,
            "cancel" => EventKind::Cancel,
            other => return Err(parse_err(path, line, format!("bad kind {other:?}"))),
        };
        let order_id =
            match c_id {
                Some(ci) => {
                    let raw = field(ci)?;
                    if raw.is_empty() {
                        None
                    } else {
                        Some(raw.parse::<u64>().map_err(|e| {
                            parse_err(path, line, format!("bad order_id {raw:?}: {e}"))
                        })?)
                    }
                }
                None => None,
            };
        events.push(OrderEvent {
            seq: parse_u64(c_seq, "seq")?,
            side,
            price: parse_u64(c_price, "price_ticks")?,
            quantity: parse_u64(c_qty, "quantity")?,
            kind,
            order_id,
        });
    }
    Ok(EventsFile {
        events,
        dropped_non_continuous: dropped,
        preamble,
    })
}

/// Fluctuation curve as `s,F` rows; q and theta ride in the preamble so the
/// curve can be reconstructed on read.
pub fn write_curve(path: &Path, curve: &FluctuationCurve, preamble: &Preamble) -> Result<()> {
    let mut full = preamble.clone();
    if full.get("q").is_none() {
        full.push("q", curve.q);
    }
    if full.get("theta").is_none() {
        full.push("theta", curve.theta);
    }
    let mut out = full.render();
    out.push_str("s,F\n");
    for &(s, f) in &curve.points {
        writeln!(out, "{s},{f}").expect("writing to String cannot fail");
    }
    atomic_write(path, &out)
}

pub fn read_curve(path: &Path) -> Result<(FluctuationCurve, Preamble)> {
    let text = fs::read_to_string(path)?;
    let preamble = Preamble::parse(&text);
    let meta_f64 = |key: &str| -> Result<f64> {
        let raw = preamble
            .get(key)
            .ok_or_else(|| parse_err(path, 1, format!("preamble lacks {key:?}")))?;
        raw.parse::<f64>()
            .map_err(|e| parse_err(path, 1, format!("bad preamble {key} {raw:?}: {e}")))
    };
    let q = meta_f64("q")?;
    let theta = meta_f64("theta")?;

    let mut points = Vec::new();
    let mut seen_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx as u64 + 1;
        let line = raw.trim();
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        if !seen_header {
            seen_header = true;
            if line != "s,F" {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("expected header s,F, got {line:?}"),
                ));
            }
            continue;
        }
        let (s_raw, f_raw) = line
            .split_once(',')
            .ok_or_else(|| parse_err(path, line_no, "expected two comma-separated fields"))?;
        let s = s_raw
            .trim()
            .parse::<usize>()
            .map_err(|e| parse_err(path, line_no, format!("bad scale {s_raw:?}: {e}")))?;
        let f = f_raw
            .trim()
            .parse::<f64>()
            .map_err(|e| parse_err(path, line_no, format!("bad fluctuation {f_raw:?}: {e}")))?;
        points.push((s, f));
    }
    if points.is_empty() {
        return Err(parse_err(path, 1, "curve file contains no data rows"));
    }
    Ok((FluctuationCurve { q, theta, points }, preamble))
}

/// Multifractal table as `q,h,tau,alpha,f,r2` rows.
pub fn write_mf_table(path: &Path, res: &MultifractalResult, preamble: &Preamble) -> Result<()> {
    let mut out = preamble.render();
    out.push_str("q,h,tau,alpha,f,r2\n");
    for i in 0..res.q.len() {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            res.q[i], res.h[i], res.tau[i], res.alpha[i], res.f[i], res.per_q_r2[i]
        )
        .expect("writing to String cannot fail");
    }
    atomic_write(path, &out)
}
