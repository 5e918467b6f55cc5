//! CSV formats for traces, PDPs, events and state labels.
//!
//! Files are UTF-8 with LF line endings. Floats are written in Rust's
//! shortest round-trip form, so reading a file this module wrote gives back
//! bit-identical values.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::segmentation::BlockageEvent;
use crate::state::{State, StateSequence};
use crate::trace::{PowerDelayProfile, PowerTrace, TraceOrigin, DEFAULT_SAMPLE_INTERVAL};

pub const TRACE_HEADER: [&str; 2] = ["time_s", "atten_db"];
pub const PDP_HEADER: [&str; 2] = ["delay_ns", "power_mw"];
pub const LABELS_HEADER: [&str; 2] = ["time_s", "state"];
pub const EVENT_HEADER: [&str; 8] = [
    "t_start_s",
    "t_end_s",
    "t_d_ms",
    "t_decay_ms",
    "t_rise_ms",
    "se_mean_db",
    "r_decay_db_per_ms",
    "r_rise_db_per_ms",
];

/// Largest tolerated deviation of one time step from the mean step.
const MAX_JITTER: f64 = 0.01;

pub fn write_trace(trace: &PowerTrace, path: &Path) -> Result<()> {
    write_file(path, |w| write_trace_to(trace, w))
}

pub fn write_trace_to(trace: &PowerTrace, w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "{}", TRACE_HEADER.join(","))?;
    for (i, x) in trace.samples().iter().enumerate() {
        writeln!(w, "{},{}", trace.time_of(i), x)?;
    }
    Ok(())
}

/// Reads a trace. The file carries no origin or HPBW, so the result is
/// marked as measured with no HPBW.
///
/// The sample interval is taken as `t1 - t0` when every timestamp equals
/// `t0 + i (t1 - t0)` exactly; otherwise it is the mean spacing, provided no
/// step deviates from it by more than 1%. A single-row file gets the default
/// interval.
pub fn read_trace(path: &Path) -> Result<PowerTrace> {
    let rows = read_pairs(path, &TRACE_HEADER)?;
    let lines: Vec<usize> = rows.iter().map(|r| r.0).collect();
    let times: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let interval = infer_interval(path, &lines, &times)?;
    let samples = rows.iter().map(|r| r.2).collect();
    PowerTrace::new(interval, samples, TraceOrigin::Measured)
}

fn infer_interval(path: &Path, lines: &[usize], times: &[f64]) -> Result<f64> {
    for (k, w) in times.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::parse(path, lines[k + 1], format!("time {} does not increase", w[1])));
        }
    }
    if times.len() < 2 {
        return Ok(DEFAULT_SAMPLE_INTERVAL);
    }
    let (t0, step) = (times[0], times[1] - times[0]);
    if times.iter().enumerate().all(|(i, &t)| t == t0 + i as f64 * step) {
        return Ok(step);
    }
    let mean = (times[times.len() - 1] - t0) / (times.len() - 1) as f64;
    for (k, w) in times.windows(2).enumerate() {
        if ((w[1] - w[0]) - mean).abs() > MAX_JITTER * mean * (1.0 + 1e-9) {
            return Err(Error::parse(
                path,
                lines[k + 1],
                format!("time step {} deviates more than 1% from mean interval {mean}", w[1] - w[0]),
            ));
        }
    }
    Ok(mean)
}

pub fn read_pdp(path: &Path) -> Result<PowerDelayProfile> {
    let rows = read_pairs(path, &PDP_HEADER)?;
    PowerDelayProfile::new(rows.iter().map(|r| r.1).collect(), rows.iter().map(|r| r.2).collect())
}

pub fn write_pdp(pdp: &PowerDelayProfile, path: &Path) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "{}", PDP_HEADER.join(","))?;
        for (d, p) in pdp.delays_ns().iter().zip(pdp.powers_mw()) {
            writeln!(w, "{d},{p}")?;
        }
        Ok(())
    })
}

pub fn write_events(events: &[BlockageEvent], path: &Path) -> Result<()> {
    write_file(path, |w| write_events_to(events, w))
}

pub fn write_events_to(events: &[BlockageEvent], w: &mut dyn Write) -> std::io::Result<()> {
    writeln!(w, "{}", EVENT_HEADER.join(","))?;
    for e in events {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            e.t_start_s, e.t_end_s, e.t_d_ms, e.t_decay_ms, e.t_rise_ms, e.se_mean_db, e.r_decay_db_per_ms, e.r_rise_db_per_ms
        )?;
    }
    Ok(())
}

/// Reads an event file; an empty file (header only) yields no events.
pub fn read_events(path: &Path) -> Result<Vec<BlockageEvent>> {
    let mut reader = open_csv(path, &EVENT_HEADER)?;
    let mut events = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = line_of(&record);
        if record.len() != EVENT_HEADER.len() {
            return Err(Error::parse(path, line, format!("expected {} fields, found {}", EVENT_HEADER.len(), record.len())));
        }
        let v: Vec<f64> = record
            .iter()
            .enumerate()
            .map(|(i, f)| parse_f64(path, line, EVENT_HEADER[i], f))
            .collect::<Result<_>>()?;
        events.push(BlockageEvent {
            t_start_s: v[0],
            t_end_s: v[1],
            t_d_ms: v[2],
            t_decay_ms: v[3],
            t_rise_ms: v[4],
            se_mean_db: v[5],
            r_decay_db_per_ms: v[6],
            r_rise_db_per_ms: v[7],
        });
    }
    Ok(events)
}

pub fn write_labels(seq: &StateSequence, path: &Path) -> Result<()> {
    write_file(path, |w| {
        writeln!(w, "{}", LABELS_HEADER.join(","))?;
        for (i, s) in seq.labels.iter().enumerate() {
            writeln!(w, "{},{}", i as f64 * seq.sample_interval, s)?;
        }
        Ok(())
    })
}

/// Reads a labels file; the interval follows the same rules as
/// [`read_trace`].
pub fn read_labels(path: &Path) -> Result<(Vec<State>, f64)> {
    let mut reader = open_csv(path, &LABELS_HEADER)?;
    let (mut lines, mut times, mut labels) = (Vec::new(), Vec::new(), Vec::new());
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = line_of(&record);
        if record.len() != 2 {
            return Err(Error::parse(path, line, format!("expected 2 fields, found {}", record.len())));
        }
        times.push(parse_f64(path, line, "time_s", &record[0])?);
        let state = record[1]
            .trim()
            .parse::<State>()
            .map_err(|_| Error::parse(path, line, format!("unknown state {:?}", &record[1])))?;
        labels.push(state);
        lines.push(line);
    }
    if labels.is_empty() {
        return Err(Error::NoSamples { path: path.to_path_buf() });
    }
    let interval = infer_interval(path, &lines, &times)?;
    Ok((labels, interval))
}

fn write_file(path: &Path, body: impl FnOnce(&mut dyn Write) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

fn open_csv(path: &Path, header: &[&str]) -> Result<csv::Reader<Box<dyn Read>>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(Box::new(file) as Box<dyn Read>);
    let found = reader.headers().map_err(|e| csv_error(path, e))?;
    if found.is_empty() {
        return Err(Error::parse(path, 1, format!("missing header, expected `{}`", header.join(","))));
    }
    if !found.iter().map(str::trim).eq(header.iter().copied()) {
        return Err(Error::parse(
            path,
            1,
            format!("header `{}` does not match `{}`", found.iter().collect::<Vec<_>>().join(","), header.join(",")),
        ));
    }
    Ok(reader)
}

/// Rows of a two-column numeric file as (line, a, b); errors on an empty body.
fn read_pairs(path: &Path, header: &[&str; 2]) -> Result<Vec<(usize, f64, f64)>> {
    let mut reader = open_csv(path, header)?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = line_of(&record);
        if record.len() != 2 {
            return Err(Error::parse(path, line, format!("expected 2 fields, found {}", record.len())));
        }
        let a = parse_f64(path, line, header[0], &record[0])?;
        let b = parse_f64(path, line, header[1], &record[1])?;
        rows.push((line, a, b));
    }
    if rows.is_empty() {
        return Err(Error::NoSamples { path: path.to_path_buf() });
    }
    Ok(rows)
}

fn parse_f64(path: &Path, line: usize, column: &str, field: &str) -> Result<f64> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| Error::parse(path, line, format!("{column}: cannot parse {field:?} as a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(path, line, format!("{column}: value {field} is not finite")));
    }
    Ok(v)
}

fn line_of(record: &csv::StringRecord) -> usize {
    record.position().map_or(0, |p| p.line() as usize)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        kind => Error::parse(path, line, format!("{kind:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::state::StateModel;
    use std::fs;

    fn tmp() -> tempfile::TempDir {
        tempfile::tempdir().unwrap()
    }

    #[test]
    fn trace_round_trip_is_bit_exact() {
        let dir = tmp();
        let p = dir.path().join("t.csv");
        let samples = vec![0.0, 0.1, -0.2, 15.123456789012345, 1e-300, 3.0, 2.5, 0.7, 0.0, 1.0 / 3.0];
        for dt in [DEFAULT_SAMPLE_INTERVAL, 0.001, 1.0 / 3.0] {
            let t = PowerTrace::new(dt, samples.clone(), TraceOrigin::Measured).unwrap();
            write_trace(&t, &p).unwrap();
            let back = read_trace(&p).unwrap();
            assert_eq!(back, t);
            assert_eq!(back.sample_interval().to_bits(), dt.to_bits());
        }
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("time_s,atten_db\n") && !text.contains('\r'));
    }

    #[test]
    fn header_only_has_no_samples() {
        let dir = tmp();
        let p = dir.path().join("t.csv");
        fs::write(&p, "time_s,atten_db\n").unwrap();
        let err = read_trace(&p).unwrap_err();
        assert!(matches!(err, Error::NoSamples { .. }));
        assert!(err.to_string().contains("no samples"));
    }

    #[test]
    fn jittered_timestamps_give_mean_spacing() {
        let dir = tmp();
        let p = dir.path().join("t.csv");
        // every step within 0.9% of 10 ms
        let steps = [1.009, 0.991, 1.005, 1.0, 0.996, 1.009, 1.0, 0.991, 1.0, 1.0].map(|f| 0.01 * f);
        let mut body = String::from("time_s,atten_db\n0,0\n");
        let mut t = 0.0;
        for (i, s) in steps.iter().enumerate() {
            t += s;
            body.push_str(&format!("{t},{}\n", i + 1));
        }
        fs::write(&p, &body).unwrap();
        let trace = read_trace(&p).unwrap();
        assert!((trace.sample_interval() - t / 10.0).abs() < 1e-15);
        assert_eq!(trace.len(), 11);
    }

    #[test]
    fn bad_files_name_the_line() {
        let dir = tmp();
        let p = dir.path().join("t.csv");
        let cases = [
            ("time_s,atten_db\n0,1\n0.0033,abc\n", 3, "atten_db"),
            ("time_s,atten_db\n0,1\n0.0033,2\n0.002,3\n", 4, "does not increase"),
            ("time_s,atten_db\n0,1\n0.01,2\n0.025,3\n", 3, "deviates"),
            ("time_s,atten_db\n0,1\n0.01\n", 3, "expected 2 fields"),
            ("time,atten\n0,1\n", 1, "header"),
            ("time_s,atten_db\n0,NaN\n", 2, "not finite"),
        ];
        for (body, line, needle) in cases {
            fs::write(&p, body).unwrap();
            let err = read_trace(&p).unwrap_err();
            let msg = err.to_string();
            assert!(matches!(err, Error::Parse { line: l, .. } if l == line), "{body:?}: {msg}");
            assert!(msg.contains(needle), "{msg}");
        }
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = read_trace(Path::new("/nonexistent/trace.csv")).unwrap_err();
        assert!(err.is_io());
    }

    #[test]
    fn pdp_round_trip() {
        let dir = tmp();
        let p = dir.path().join("pdp.csv");
        let pdp = PowerDelayProfile::on_grid(2.0, vec![0.0, 1.0, 0.001, 0.5]).unwrap();
        write_pdp(&pdp, &p).unwrap();
        assert_eq!(read_pdp(&p).unwrap(), pdp);
    }

    #[test]
    fn events_round_trip() {
        let dir = tmp();
        let p = dir.path().join("ev.csv");
        let ev = vec![
            BlockageEvent::from_shape(1.25, 330.0, 100.0, 80.0, 12.0),
            BlockageEvent::from_shape(7.5, 401.7, 23.1, 33.0, 15.77),
        ];
        write_events(&ev, &p).unwrap();
        let text = fs::read_to_string(&p).unwrap();
        assert!(text.starts_with("t_start_s,t_end_s,t_d_ms,t_decay_ms,t_rise_ms,se_mean_db,r_decay_db_per_ms,r_rise_db_per_ms\n"));
        assert_eq!(read_events(&p).unwrap(), ev);
        write_events(&[], &p).unwrap();
        assert!(read_events(&p).unwrap().is_empty());
    }

    #[test]
    fn labels_round_trip() {
        let dir = tmp();
        let p = dir.path().join("labels.csv");
        let seq = StateSequence {
            model: StateModel::FourState,
            labels: vec![State::Unshadowed, State::Decaying, State::Shadowed, State::Rising, State::Unshadowed],
            sample_interval: DEFAULT_SAMPLE_INTERVAL,
        };
        write_labels(&seq, &p).unwrap();
        let (labels, interval) = read_labels(&p).unwrap();
        assert_eq!(labels, seq.labels);
        assert_eq!(interval, DEFAULT_SAMPLE_INTERVAL);
    }
}
