//! Per-zone and per-bin results assembled for reporting.

use crate::analytic::{self, ZoneScenario};
use crate::model::{DutyPlan, NetworkConfig, Partition, PowerPolicy, SfTable, SpreadingFactor};
use crate::simulate::{self, BinEstimate, FullScenario, McEstimate, PopulationProfile};

#[derive(Debug, Clone, PartialEq)]
pub struct ZoneReport {
    pub sf: SpreadingFactor,
    pub inner_m: f64,
    pub outer_m: f64,
    pub area_m2: f64,
    pub duty: f64,
    /// False for empty zones.
    pub active: bool,
    pub success_analytic: Option<f64>,
    pub success_mc: Option<McEstimate>,
    /// Closed-form throughput when available, otherwise the MC one (bps).
    pub throughput_bps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThroughputReport {
    pub zones: Vec<ZoneReport>,
    pub bins: Vec<BinEstimate>,
    /// bps/m²
    pub spatial_throughput_analytic: Option<f64>,
    /// bps/m²
    pub spatial_throughput_mc: Option<McEstimate>,
}

impl ThroughputReport {
    /// Closed-form report for a channel-inversion operating point.
    pub fn analytic(
        partition: &Partition,
        duties: &DutyPlan,
        policy: &PowerPolicy,
        cfg: &NetworkConfig,
        table: &SfTable,
    ) -> Self {
        let zones = SpreadingFactor::ALL
            .iter()
            .map(|&sf| {
                let zone = ZoneScenario::from_plan(sf, partition, policy, duties, cfg, table);
                let active = !partition.is_empty_zone(sf);
                let res = analytic::evaluate_zone(&zone);
                ZoneReport {
                    sf,
                    inner_m: zone.inner_radius_m,
                    outer_m: zone.outer_radius_m,
                    area_m2: zone.area(),
                    duty: zone.duty,
                    active,
                    success_analytic: active.then_some(res.success_probability),
                    success_mc: None,
                    throughput_bps: if active { res.throughput } else { 0.0 },
                }
            })
            .collect();
        ThroughputReport {
            zones,
            bins: Vec::new(),
            spatial_throughput_analytic: Some(analytic::spatial_throughput_analytic(
                partition, duties, policy, cfg, table,
            )),
            spatial_throughput_mc: None,
        }
    }

    /// Adds per-zone Monte-Carlo success estimates (reference anywhere in
    /// the zone; channel inversion makes the position irrelevant) and the
    /// spatial throughput they imply.
    #[allow(clippy::too_many_arguments)]
    pub fn with_zone_mc(
        mut self,
        partition: &Partition,
        duties: &DutyPlan,
        policy: &PowerPolicy,
        cfg: &NetworkConfig,
        table: &SfTable,
        trials: u64,
        seed: u64,
    ) -> Self {
        let mut total = 0.0;
        let mut var = 0.0;
        for (i, z) in self.zones.iter_mut().enumerate() {
            if !z.active || z.duty == 0.0 {
                continue;
            }
            let zone = ZoneScenario::from_plan(z.sf, partition, policy, duties, cfg, table);
            let est = simulate::estimate_success_prob(
                &zone,
                zone.outer_radius_m,
                trials,
                seed.wrapping_add(i as u64),
            );
            let w = zone.mean_population() * zone.bit_rate * zone.duty;
            total += w * est.mean;
            var += (w * est.std_error).powi(2);
            z.success_mc = Some(est);
        }
        let area = std::f64::consts::PI * partition.cell_radius().powi(2);
        self.spatial_throughput_mc = Some(McEstimate {
            mean: total / area,
            std_error: var.sqrt() / area,
            trials,
            seed,
        });
        self
    }

    pub fn from_profile(scenario: &FullScenario, profile: PopulationProfile) -> Self {
        let zones = SpreadingFactor::ALL
            .iter()
            .map(|&sf| {
                let zone = scenario.zone(sf);
                let i = sf.index();
                ZoneReport {
                    sf,
                    inner_m: zone.inner_radius_m,
                    outer_m: zone.outer_radius_m,
                    area_m2: zone.area(),
                    duty: zone.duty,
                    active: !scenario.partition.is_empty_zone(sf),
                    success_analytic: None,
                    success_mc: profile.zone_success[i],
                    throughput_bps: profile.zone_throughput[i],
                }
            })
            .collect();
        ThroughputReport {
            zones,
            bins: profile.bins,
            spatial_throughput_analytic: None,
            spatial_throughput_mc: Some(profile.spatial_throughput),
        }
    }

    /// Smallest throughput over active zones.
    pub fn min_throughput(&self) -> Option<f64> {
        self.zones
            .iter()
            .filter(|z| z.active)
            .map(|z| z.throughput_bps)
            .reduce(f64::min)
    }
}
