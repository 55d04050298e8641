//! CSV control-trace files.
//!
//! ```text
//! sample_rate,48000
//! sample_index,rpm,torque
//! 0,812.5,-3.25
//! 1,812.6,-3.25
//! ```
//!
//! The `sample_index` column is optional on input (a `rpm,torque` header is
//! accepted as well); when present it must count up from zero. Lines starting
//! with `#` are ignored.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};
use crate::signal::ControlTrace;

pub fn read_trace_csv(path: impl AsRef<Path>) -> Result<ControlTrace> {
    let file = std::fs::File::open(path.as_ref())?;
    parse_trace_csv(BufReader::new(file))
}

pub fn parse_trace_csv<R: Read>(reader: R) -> Result<ControlTrace> {
    let mut lines = BufReader::new(reader)
        .lines()
        .enumerate()
        .filter(|(_, l)| l.as_ref().map_or(true, |s| !s.trim().is_empty() && !s.starts_with('#')));

    let mut next_line = || -> Result<Option<(usize, String)>> {
        match lines.next() {
            Some((n, line)) => Ok(Some((n + 1, line?))),
            None => Ok(None),
        }
    };

    let (_, first) = next_line()?.ok_or_else(|| Error::format("empty trace file"))?;
    let sample_rate = match split(&first).as_slice() {
        ["sample_rate", rate] => {
            rate.parse::<u32>().map_err(|_| Error::format(format!("bad sample_rate value {rate:?}")))?
        }
        _ => return Err(Error::format("first line must be `sample_rate,<hz>`")),
    };
    let (_, header) = next_line()?.ok_or_else(|| Error::format("missing column header"))?;
    let indexed = match split(&header).as_slice() {
        ["sample_index", "rpm", "torque"] => true,
        ["rpm", "torque"] => false,
        other => return Err(Error::format(format!("unexpected columns {other:?}"))),
    };

    let mut rpm = Vec::new();
    let mut torque = Vec::new();
    while let Some((line_no, line)) = next_line()? {
        let fields = split(&line);
        let values = if indexed {
            match fields.as_slice() {
                [idx, r, t] => {
                    let idx: usize =
                        idx.parse().map_err(|_| Error::format(format!("line {line_no}: bad sample index")))?;
                    if idx != rpm.len() {
                        return Err(Error::format(format!("line {line_no}: sample index {idx} out of sequence")));
                    }
                    (*r, *t)
                }
                _ => return Err(Error::format(format!("line {line_no}: expected 3 fields"))),
            }
        } else {
            match fields.as_slice() {
                [r, t] => (*r, *t),
                _ => return Err(Error::format(format!("line {line_no}: expected 2 fields"))),
            }
        };
        let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::format(format!("line {line_no}: bad number {s:?}")));
        rpm.push(parse(values.0)?);
        torque.push(parse(values.1)?);
    }
    ControlTrace::new(sample_rate, rpm, torque).map_err(|e| Error::format(e.to_string()))
}

fn split(line: &str) -> Vec<&str> {
    line.trim().split(',').map(str::trim).collect()
}

pub fn format_trace_csv(trace: &ControlTrace) -> String {
    let mut out = String::with_capacity(trace.len() * 24 + 48);
    let _ = writeln!(out, "sample_rate,{}", trace.sample_rate());
    out.push_str("sample_index,rpm,torque\n");
    for (i, (r, t)) in trace.rpm().iter().zip(trace.torque()).enumerate() {
        let _ = writeln!(out, "{i},{r},{t}");
    }
    out
}

pub fn write_trace_csv(path: impl AsRef<Path>, trace: &ControlTrace) -> Result<()> {
    std::fs::write(path.as_ref(), format_trace_csv(trace))?;
    Ok(())
}
