//! CSV rows. Column order is fixed by field order.

use std::io::Write;
use std::path::Path;

use lora_maxmin::units::per_m2_to_per_km2;
use lora_maxmin::{ThroughputReport, ZoneReport};
use serde::Serialize;

use crate::error::Failure;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub experiment: String,
    pub sf: u8,
    pub boundary_m: f64,
    pub area_m2: f64,
    pub duty: f64,
    pub active: bool,
    pub success_analytic: Option<f64>,
    pub success_mc: Option<f64>,
    pub success_mc_stderr: Option<f64>,
    pub throughput_bps: f64,
    pub spatial_throughput_bps_km2: f64,
}

impl ReportRow {
    fn new(experiment: &str, z: &ZoneReport, spatial_bps_m2: f64) -> Self {
        ReportRow {
            experiment: experiment.to_string(),
            sf: z.sf.value(),
            boundary_m: z.outer_m,
            area_m2: z.area_m2,
            duty: z.duty,
            active: z.active,
            success_analytic: z.success_analytic,
            success_mc: z.success_mc.map(|e| e.mean),
            success_mc_stderr: z.success_mc.map(|e| e.std_error),
            throughput_bps: z.throughput_bps,
            spatial_throughput_bps_km2: per_m2_to_per_km2(spatial_bps_m2),
        }
    }
}

/// Which spatial throughput fills the last column.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spatial {
    Analytic,
    MonteCarlo,
}

pub fn report_rows(
    experiment: &str,
    report: &ThroughputReport,
    spatial: Spatial,
) -> Vec<ReportRow> {
    let theta = match spatial {
        Spatial::Analytic => report.spatial_throughput_analytic,
        Spatial::MonteCarlo => report.spatial_throughput_mc.map(|e| e.mean),
    }
    .unwrap_or(f64::NAN);
    report
        .zones
        .iter()
        .map(|z| ReportRow::new(experiment, z, theta))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RangeRow {
    pub sf: u8,
    pub bit_rate_bps: f64,
    pub snr_threshold_db: f64,
    pub max_range_m: f64,
    pub equal_area_range_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileRow {
    pub experiment: String,
    pub bin_inner_m: f64,
    pub bin_outer_m: f64,
    pub sf: Option<u8>,
    pub throughput_bps: f64,
    pub throughput_stderr: f64,
}

pub fn profile_rows(experiment: &str, report: &ThroughputReport) -> Vec<ProfileRow> {
    report
        .bins
        .iter()
        .map(|b| ProfileRow {
            experiment: experiment.to_string(),
            bin_inner_m: b.inner_m,
            bin_outer_m: b.outer_m,
            sf: b.sf.map(|s| s.value()),
            throughput_bps: b.throughput.mean,
            throughput_stderr: b.throughput.std_error,
        })
        .collect()
}

/// Writes `rows` as CSV to `path`, or to stdout when `path` is `None`.
pub fn write_csv<T: Serialize>(rows: &[T], path: Option<&Path>) -> Result<(), Failure> {
    let sink: Box<dyn Write> = match path {
        Some(p) => Box::new(
            std::fs::File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        ),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(sink);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}
