//! Fixtures shared by the criterion benches.

use lora_maxmin::{
    DutyPlan, FullScenario, NetworkConfig, Partition, PowerControl, PowerPolicy, SfTable,
    SpreadingFactor, ZoneScenario,
};

/// Equal-area zone `sf` of the default 1 km cell under channel inversion.
pub fn reference_zone(sf: u8, duty: f64) -> ZoneScenario {
    let cfg = NetworkConfig::default();
    let table = SfTable::default();
    let p = Partition::equal_area(cfg.cell_radius_m).expect("default cell");
    let policy = PowerPolicy::max_power(&p, &cfg);
    let sf = SpreadingFactor::new(sf).expect("valid SF");
    ZoneScenario::with_duty(sf, &p, &policy, duty, &cfg, &table)
}

/// Fixed-power, 1% duty, equal-area cell of radius `cell_radius_m`.
pub fn benchmark_scenario(cell_radius_m: f64) -> FullScenario {
    let cfg = NetworkConfig {
        cell_radius_m,
        ..NetworkConfig::default()
    };
    FullScenario {
        table: SfTable::default(),
        partition: Partition::equal_area(cell_radius_m).expect("positive radius"),
        duties: DutyPlan::uniform(0.01, cfg.max_duty).expect("duty within cap"),
        power: PowerControl::Fixed {
            tx_power_w: cfg.max_power_w,
        },
        bin_width_m: 25.0,
        cfg,
    }
}
