//! CSV and JSON artifacts. Numbers are printed in shortest round-trip form.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use lindblad_relax::generator::Liouvillian;
use lindblad_relax::otto::OttoEngine;
use lindblad_relax::propagator::{ConvergenceSummary, TrajectoryRecord};
use serde::Serialize;

use crate::RunError;

fn write_err(path: &Path) -> impl Fn(std::io::Error) -> RunError + '_ {
    move |source| RunError::Write {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> RunError + '_ {
    move |e| RunError::Write {
        path: path.to_path_buf(),
        source: e.into(),
    }
}

fn write_csv(path: &Path, header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(&header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(write_err(path))
}

pub fn write_trajectories(path: &Path, gen: &impl Liouvillian, records: &[TrajectoryRecord]) -> Result<(), RunError> {
    let d = gen.dim();
    let mut header: Vec<String> = ["t", "state_index", "trace_err", "min_eig"].map(String::from).to_vec();
    header.extend((1..d * d).map(|k| format!("c{k}")));
    let rows = records.iter().enumerate().flat_map(|(i, r)| {
        (0..r.times.len()).map(move |k| {
            let mut row = vec![
                r.times[k].to_string(),
                i.to_string(),
                r.trace_err[k].to_string(),
                r.min_eig[k].to_string(),
            ];
            row.extend(r.states[k].tilde.iter().map(f64::to_string));
            row
        })
    });
    write_csv(path, header, rows)
}

pub fn write_convergence(path: &Path, s: &ConvergenceSummary) -> Result<(), RunError> {
    let header = ["t", "max_pair_dist", "gronwall_envelope"].map(String::from).to_vec();
    let rows = (0..s.times.len()).map(|k| {
        vec![
            s.times[k].to_string(),
            s.max_pair_dist[k].to_string(),
            s.gronwall_envelope[k].to_string(),
        ]
    });
    write_csv(path, header, rows)
}

pub fn write_schedule(path: &Path, engine: &OttoEngine, times: &[f64]) -> Result<(), RunError> {
    let header = ["t", "h", "lambda_h", "lambda_c"].map(String::from).to_vec();
    let rows = times.iter().map(|&t| {
        let s = engine.schedule(t);
        vec![
            t.to_string(),
            s.h.to_string(),
            s.lambda_h.to_string(),
            s.lambda_c.to_string(),
        ]
    });
    write_csv(path, header, rows)
}

pub fn write_json(path: &Path, value: &impl Serialize) -> Result<(), RunError> {
    let file = File::create(path).map_err(write_err(path))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| RunError::Write {
        path: path.to_path_buf(),
        source: e.into(),
    })?;
    w.write_all(b"\n").map_err(write_err(path))?;
    w.flush().map_err(write_err(path))
}
