//! Partition and duty selections, and plan files.
//!
//! A plan file holds an operating point written by `optimize --plan-out`:
//!
//! ```toml
//! [partition]
//! cell_radius_m = 1000.0
//! boundaries_m = [408.2, 577.3, 707.1, 816.5, 912.9]
//!
//! [duty]
//! duties = [0.002, 0.003, 0.005, 0.008, 0.01, 0.01]
//! ```

use std::path::{Path, PathBuf};
use std::str::FromStr;

use lora_maxmin::{DutyPlan, NetworkConfig, Partition, NUM_BOUNDARIES, NUM_SF};
use serde::{Deserialize, Serialize};

use crate::error::Failure;

#[derive(Debug, Clone, PartialEq)]
pub enum PartitionChoice {
    EqualArea,
    MaxRange,
    File(PathBuf),
}

impl FromStr for PartitionChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "equal-area" => Ok(PartitionChoice::EqualArea),
            "max-range" => Ok(PartitionChoice::MaxRange),
            _ => match s.strip_prefix("file:") {
                Some(p) if !p.is_empty() => Ok(PartitionChoice::File(PathBuf::from(p))),
                _ => Err(format!(
                    "expected equal-area, max-range or file:<path>, got `{s}`"
                )),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DutyChoice {
    /// Closed-form optimum per zone.
    Optimal,
    Fixed(f64),
    File(PathBuf),
    /// `n` uniform duties Δ_max·k/n, k = 1..=n, one experiment each.
    Sweep(usize),
}

impl FromStr for DutyChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "optimal" {
            return Ok(DutyChoice::Optimal);
        }
        if let Some(v) = s.strip_prefix("fixed:") {
            return match v.parse::<f64>() {
                Ok(d) if (0.0..1.0).contains(&d) => Ok(DutyChoice::Fixed(d)),
                _ => Err(format!("fixed duty must be a number in [0, 1), got `{v}`")),
            };
        }
        if let Some(v) = s.strip_prefix("sweep:") {
            return match v.parse::<usize>() {
                Ok(n) if n > 0 => Ok(DutyChoice::Sweep(n)),
                _ => Err(format!("sweep needs a positive point count, got `{v}`")),
            };
        }
        match s.strip_prefix("file:") {
            Some(p) if !p.is_empty() => Ok(DutyChoice::File(PathBuf::from(p))),
            _ => Err(format!(
                "expected optimal, fixed:<duty>, sweep:<points> or file:<path>, got `{s}`"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartitionSection {
    pub cell_radius_m: f64,
    pub boundaries_m: [f64; NUM_BOUNDARIES],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DutySection {
    pub duties: [f64; NUM_SF],
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub partition: Option<PartitionSection>,
    pub duty: Option<DutySection>,
}

impl PlanFile {
    pub fn new(partition: &Partition, duties: &DutyPlan) -> Self {
        PlanFile {
            partition: Some(PartitionSection {
                cell_radius_m: partition.cell_radius(),
                boundaries_m: *partition.boundaries(),
            }),
            duty: Some(DutySection {
                duties: *duties.duties(),
            }),
        }
    }

    pub fn read(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| {
            let line = e.span().map(|s| text[..s.start].matches('\n').count() + 1);
            let msg = e.message().trim().to_string();
            Failure::Usage(match line {
                Some(l) => format!("{}:{l}: {msg}", path.display()),
                None => format!("{}: {msg}", path.display()),
            })
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), Failure> {
        let text = toml::to_string(self).map_err(|e| Failure::Io(e.to_string()))?;
        std::fs::write(path, text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
    }

    pub fn partition(&self, path: &Path) -> Result<Partition, Failure> {
        let p = self
            .partition
            .as_ref()
            .ok_or_else(|| Failure::Usage(format!("{}: no [partition] section", path.display())))?;
        Partition::new(p.boundaries_m, p.cell_radius_m).map_err(Failure::from)
    }

    pub fn duties(&self, path: &Path, cap: f64) -> Result<DutyPlan, Failure> {
        let d = self
            .duty
            .as_ref()
            .ok_or_else(|| Failure::Usage(format!("{}: no [duty] section", path.display())))?;
        DutyPlan::new(d.duties, cap).map_err(Failure::from)
    }
}

pub fn resolve_partition(
    choice: &PartitionChoice,
    cfg: &NetworkConfig,
    table: &lora_maxmin::SfTable,
) -> Result<Partition, Failure> {
    let partition = match choice {
        PartitionChoice::EqualArea => Partition::equal_area(cfg.cell_radius_m)?,
        PartitionChoice::MaxRange => Partition::max_range(cfg, table)?,
        PartitionChoice::File(path) => PlanFile::read(path)?.partition(path)?,
    };
    if partition.cell_radius() != cfg.cell_radius_m {
        return Err(Failure::Usage(format!(
            "partition cell radius {} m differs from configured {} m",
            partition.cell_radius(),
            cfg.cell_radius_m
        )));
    }
    Ok(partition)
}
