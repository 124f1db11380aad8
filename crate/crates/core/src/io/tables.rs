//! CSV readers and writers: trajectories, sweep maps and observations.

use std::io::{self, Read, Write};

use thiserror::Error;

use super::fmt_num;
use crate::analysis::SweepMap;
use crate::calibration::{FitError, Observation, ObservationSet};
use crate::integrator::Sample;
use crate::model::{portfolio_at_risk, ModelParams};

/// Default cap on trajectory rows written to disk.
pub const MAX_ROWS: usize = 10_001;

#[derive(Debug, Error)]
pub enum ObservationFileError {
    #[error("header must be `t,s,i` or `t,s,i,w`, found `{0}`")]
    Header(String),
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error(transparent)]
    Invalid(#[from] FitError),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// Picks at most `max_rows` samples at evenly spaced indices, always keeping
/// the first and last.
pub fn thin(samples: &[Sample], max_rows: usize) -> Vec<Sample> {
    let n = samples.len();
    if n <= max_rows || max_rows == 0 {
        return samples.to_vec();
    }
    if max_rows == 1 {
        return vec![samples[n - 1]];
    }
    let last = n - 1;
    let slots = (max_rows - 1) as u128;
    (0..max_rows)
        .map(|j| {
            // round(j·last/slots) in exact integer arithmetic
            let idx = ((j as u128 * last as u128 * 2 + slots) / (2 * slots)) as usize;
            samples[idx]
        })
        .collect()
}

/// Columns `t,s,i,p,par`: time, counts, zone population, portfolio at risk.
pub fn write_trajectory_csv<W: Write>(mut w: W, params: &ModelParams, samples: &[Sample]) -> io::Result<()> {
    writeln!(w, "t,s,i,p,par")?;
    for sample in samples {
        let x = sample.state;
        let par = portfolio_at_risk(x).map_or_else(|_| "NaN".to_owned(), fmt_num);
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_num(sample.t),
            fmt_num(x.s),
            fmt_num(x.i),
            fmt_num(params.population(x)),
            par
        )?;
    }
    Ok(())
}

/// Columns `axis1,axis2,outcome,endpoint_s,endpoint_i`, axis1-major.
pub fn write_sweep_csv<W: Write>(mut w: W, map: &SweepMap) -> io::Result<()> {
    writeln!(w, "axis1,axis2,outcome,endpoint_s,endpoint_i")?;
    for (v1, v2, cell) in map.iter() {
        let (es, ei) = cell
            .endpoint
            .map_or((String::new(), String::new()), |x| (fmt_num(x.s), fmt_num(x.i)));
        writeln!(w, "{},{},{},{},{}", fmt_num(v1), fmt_num(v2), cell.tag, es, ei)?;
    }
    Ok(())
}

pub fn write_observations_csv<W: Write>(mut w: W, obs: &ObservationSet) -> io::Result<()> {
    writeln!(w, "t,s,i,w")?;
    for r in obs.rows() {
        writeln!(w, "{},{},{},{}", fmt_num(r.t), fmt_num(r.s), fmt_num(r.i), fmt_num(r.w))?;
    }
    Ok(())
}

/// Reads `t,s,i[,w]` rows; a missing weight column means unit weights.
pub fn read_observations<R: Read>(reader: R) -> Result<ObservationSet, ObservationFileError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    let weighted = match header.iter().map(String::as_str).collect::<Vec<_>>().as_slice() {
        ["t", "s", "i"] => false,
        ["t", "s", "i", "w"] => true,
        _ => return Err(ObservationFileError::Header(header.join(","))),
    };
    let mut rows = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |k: usize| -> Result<f64, ObservationFileError> {
            record
                .get(k)
                .ok_or_else(|| ObservationFileError::Row {
                    line,
                    message: format!("missing column {}", header[k]),
                })?
                .parse::<f64>()
                .map_err(|e| ObservationFileError::Row {
                    line,
                    message: format!("column {}: {e}", header[k]),
                })
        };
        let w = if weighted { field(3)? } else { 1.0 };
        rows.push(Observation::weighted(field(0)?, field(1)?, field(2)?, w));
    }
    Ok(ObservationSet::new(rows)?)
}
