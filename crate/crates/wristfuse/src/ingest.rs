//! Canonical per-subject CSV layout.
//!
//! A subject directory `S<k>/` holds `ACC.csv` (`t,x,y,z`), `BVP.csv`,
//! `EDA.csv` and `TEMP.csv` (`t,v`) and `labels.csv` (`t,label`). Times are
//! seconds; label ids are 0 baseline, 1 stress, 2 amusement and -1 for
//! spans to ignore. Labels are change points: each row holds until the next.

use std::fs;
use std::path::{Path, PathBuf};

use wristfuse_core::{LabelTimeline, Modality, SensorStream, SubjectRecord};

use crate::error::{AppError, Result};

pub const LABELS_FILE: &str = "labels.csv";

/// Relative tolerance on the sample rate implied by the time column.
const RATE_TOLERANCE: f64 = 1e-3;

pub fn modality_file(m: Modality) -> String {
    format!("{}.csv", m.name())
}

fn header(m: Modality) -> &'static [&'static str] {
    match m {
        Modality::Acc => &["t", "x", "y", "z"],
        _ => &["t", "v"],
    }
}

fn reader(path: &Path) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(AppError::io(path))?;
    Ok(csv::ReaderBuilder::new().has_headers(true).from_reader(file))
}

fn check_header(path: &Path, rdr: &mut csv::Reader<fs::File>, expected: &[&str]) -> Result<()> {
    let got = rdr.headers().map_err(|e| csv_error(path, e))?;
    if got.iter().map(str::trim).ne(expected.iter().copied()) {
        return Err(AppError::Parse {
            path: path.into(),
            line: 1,
            message: format!("expected header '{}', found '{}'", expected.join(","), got.iter().collect::<Vec<_>>().join(",")),
        });
    }
    Ok(())
}

fn csv_error(path: &Path, e: csv::Error) -> AppError {
    let line = e.position().map_or(0, |p| p.line());
    AppError::Parse {
        path: path.into(),
        line,
        message: e.to_string(),
    }
}

fn parse_f64(path: &Path, line: u64, field: &str) -> Result<f64> {
    let v: f64 = field.trim().parse().map_err(|_| AppError::Parse {
        path: path.into(),
        line,
        message: format!("'{field}' is not a number"),
    })?;
    if !v.is_finite() {
        return Err(AppError::Parse {
            path: path.into(),
            line,
            message: format!("'{field}' is not finite"),
        });
    }
    Ok(v)
}

/// Reads one modality file and checks its timing against the standard rate.
pub fn read_stream(path: &Path, m: Modality) -> Result<SensorStream> {
    let mut rdr = reader(path)?;
    check_header(path, &mut rdr, header(m))?;
    let mut times = Vec::new();
    let mut channels = vec![Vec::new(); m.channels()];
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        times.push(parse_f64(path, line, &rec[0])?);
        for (c, ch) in channels.iter_mut().enumerate() {
            ch.push(parse_f64(path, line, &rec[c + 1])?);
        }
    }
    if times.len() < 2 {
        return Err(AppError::Format {
            path: path.into(),
            message: "fewer than two samples".into(),
        });
    }
    if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
        return Err(AppError::Parse {
            path: path.into(),
            line: i as u64 + 3,
            message: "time stamps must increase strictly".into(),
        });
    }
    let rate = (times.len() - 1) as f64 / (times[times.len() - 1] - times[0]);
    let expected = m.sample_rate();
    if ((rate - expected) / expected).abs() > RATE_TOLERANCE {
        return Err(wristfuse_core::Error::InvalidStream {
            modality: m,
            reason: format!("{} implies {rate:.4} Hz, expected {expected} Hz", path.display()),
        }
        .into());
    }
    Ok(SensorStream::new(m, expected, times[0], channels)?)
}

pub fn read_labels(path: &Path) -> Result<LabelTimeline> {
    let mut rdr = reader(path)?;
    check_header(path, &mut rdr, &["t", "label"])?;
    let mut points = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let t = parse_f64(path, line, &rec[0])?;
        let id: i64 = rec[1].trim().parse().map_err(|_| AppError::Parse {
            path: path.into(),
            line,
            message: format!("'{}' is not an integer label", &rec[1]),
        })?;
        if !(-1..=2).contains(&id) {
            return Err(wristfuse_core::Error::InvalidLabel(id).into());
        }
        points.push((t, id as i8));
    }
    Ok(LabelTimeline::new(points)?)
}

/// Loads `dir`; the subject id is the directory name.
pub fn load_subject(dir: &Path) -> Result<SubjectRecord> {
    let id = dir
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| AppError::Usage(format!("{} is not a subject directory", dir.display())))?;
    let mut streams = Vec::with_capacity(4);
    for m in Modality::ALL {
        let path = dir.join(modality_file(m));
        if !path.is_file() {
            return Err(AppError::missing(dir, m));
        }
        streams.push(read_stream(&path, m)?);
    }
    let labels_path = dir.join(LABELS_FILE);
    if !labels_path.is_file() {
        return Err(AppError::Format {
            path: labels_path,
            message: "missing label file".into(),
        });
    }
    let labels = read_labels(&labels_path)?;
    let streams: [SensorStream; 4] = streams.try_into().expect("four modalities");
    Ok(SubjectRecord::new(id, streams, labels)?)
}

/// Subject directories `S<k>` under `root`, ordered by `k`.
pub fn subject_dirs(root: &Path) -> Result<Vec<PathBuf>> {
    let mut dirs: Vec<(u64, PathBuf)> = Vec::new();
    for entry in fs::read_dir(root).map_err(AppError::io(root))? {
        let entry = entry.map_err(AppError::io(root))?;
        let path = entry.path();
        let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
            continue;
        };
        if let Some(k) = name.strip_prefix('S').and_then(|k| k.parse().ok()) {
            if path.is_dir() {
                dirs.push((k, path));
            }
        }
    }
    dirs.sort();
    Ok(dirs.into_iter().map(|(_, p)| p).collect())
}

pub fn load_dataset(root: &Path) -> Result<Vec<SubjectRecord>> {
    let dirs = subject_dirs(root)?;
    if dirs.is_empty() {
        return Err(AppError::Usage(format!("no S<k> subject directories under {}", root.display())));
    }
    dirs.iter().map(|d| load_subject(d)).collect()
}

fn create(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(AppError::io(path))?;
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(file))
}

fn flush(path: &Path, mut w: csv::Writer<fs::File>) -> Result<()> {
    w.flush().map_err(AppError::io(path))
}

fn write_err(path: &Path) -> impl Fn(csv::Error) -> AppError + '_ {
    move |e| AppError::Format {
        path: path.into(),
        message: e.to_string(),
    }
}

/// Writes a subject in the canonical layout under `dir` (created if needed).
/// Values use the shortest representation that reads back exactly.
pub fn write_subject(record: &SubjectRecord, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(AppError::io(dir))?;
    for m in Modality::ALL {
        let path = dir.join(modality_file(m));
        let mut w = create(&path)?;
        w.write_record(header(m)).map_err(write_err(&path))?;
        let s = record.stream(m);
        let mut row = Vec::with_capacity(1 + m.channels());
        for i in 0..s.len() {
            row.clear();
            row.push(s.time_at(i).to_string());
            row.extend(s.channels().iter().map(|c| c[i].to_string()));
            w.write_record(&row).map_err(write_err(&path))?;
        }
        flush(&path, w)?;
    }
    let path = dir.join(LABELS_FILE);
    let mut w = create(&path)?;
    w.write_record(["t", "label"]).map_err(write_err(&path))?;
    for &(t, label) in record.labels().points() {
        w.write_record([t.to_string(), label.to_string()]).map_err(write_err(&path))?;
    }
    flush(&path, w)
}

pub fn write_dataset(records: &[SubjectRecord], root: &Path) -> Result<()> {
    for r in records {
        write_subject(r, &root.join(r.subject_id()))?;
    }
    Ok(())
}
