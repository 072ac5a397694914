//! Max-min throughput planning.
//!
//! Per-zone duty cycles come from the closed-form optimum. Zone boundaries
//! are then tuned by iterative balancing: repeatedly pick the neighbouring
//! pair of non-empty zones with the largest throughput gap and move their
//! shared boundary, by bisection, to where the two throughputs meet. Zone
//! throughput falls with its outer radius and rises with its inner radius,
//! so each gap is monotone in the boundary being moved.

use crate::analytic::{self, ZoneScenario};
use crate::error::{Error, Result};
use crate::model::{
    DutyPlan, NetworkConfig, Partition, PowerPolicy, SfTable, SpreadingFactor, NUM_BOUNDARIES,
    NUM_SF,
};
use crate::report::ThroughputReport;
use crate::simulate::{simulate_finite_population, FullScenario, PowerControl};

/// Boundary resolution of the balancing bisection (m).
pub const BOUNDARY_TOLERANCE_M: f64 = 1e-3;

/// Default cap on balancing iterations.
pub const MAX_ITERATIONS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DutyMode {
    /// Closed-form throughput-maximising duty, capped at Δ_max.
    Optimal,
    /// The same duty in every zone.
    Fixed(f64),
}

/// Closed-form outcome for one zone. Empty zones do not take part in the
/// max-min objective.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ZoneOutcome {
    Inactive,
    Active { throughput: f64, duty: f64 },
}

impl ZoneOutcome {
    pub fn throughput(&self) -> Option<f64> {
        match *self {
            ZoneOutcome::Active { throughput, .. } => Some(throughput),
            ZoneOutcome::Inactive => None,
        }
    }
}

/// Zone scenario at `P_s^edge = P_max` with the duty chosen by `mode`.
/// Always defined, including for empty zones (continuous limit A_s → 0).
pub fn zone_scenario(
    sf: SpreadingFactor,
    partition: &Partition,
    cfg: &NetworkConfig,
    table: &SfTable,
    mode: DutyMode,
) -> ZoneScenario {
    let policy = PowerPolicy::max_power(partition, cfg);
    let mut zone = ZoneScenario::with_duty(sf, partition, &policy, 0.0, cfg, table);
    zone.duty = match mode {
        DutyMode::Optimal => analytic::optimal_duty_cycle(&zone, cfg.max_duty),
        DutyMode::Fixed(d) => d,
    };
    zone
}

fn raw_throughput(
    sf: SpreadingFactor,
    partition: &Partition,
    cfg: &NetworkConfig,
    table: &SfTable,
    mode: DutyMode,
) -> f64 {
    analytic::zone_throughput(&zone_scenario(sf, partition, cfg, table, mode))
}

/// Closed-form throughput and duty of zone `sf`, or [`ZoneOutcome::Inactive`]
/// when the zone is empty.
pub fn zone_optimal_throughput(
    sf: SpreadingFactor,
    partition: &Partition,
    cfg: &NetworkConfig,
    table: &SfTable,
    mode: DutyMode,
) -> ZoneOutcome {
    if partition.is_empty_zone(sf) {
        return ZoneOutcome::Inactive;
    }
    let zone = zone_scenario(sf, partition, cfg, table, mode);
    ZoneOutcome::Active {
        throughput: analytic::zone_throughput(&zone),
        duty: zone.duty,
    }
}

/// θ̄_s − θ̄_{s+1} as a function of r_s.
fn boundary_gap(
    sf: SpreadingFactor,
    radius: f64,
    partition: &Partition,
    cfg: &NetworkConfig,
    table: &SfTable,
    mode: DutyMode,
) -> f64 {
    let moved = partition
        .with_boundary(sf, radius)
        .expect("radius stays between its neighbours");
    let next = SpreadingFactor::from_index(sf.index() + 1);
    raw_throughput(sf, &moved, cfg, table, mode) - raw_throughput(next, &moved, cfg, table, mode)
}

/// New position of r_s (s in 7..=11) that equalises the throughputs of
/// zones s and s+1, searched on `[r_{s−1}, r_{s+1}]`. When the gap keeps one
/// sign over the whole interval, the endpoint with the smaller gap is
/// returned.
pub fn balance_boundary(
    sf: SpreadingFactor,
    partition: &Partition,
    cfg: &NetworkConfig,
    table: &SfTable,
    mode: DutyMode,
) -> Result<f64> {
    if sf.index() >= NUM_BOUNDARIES {
        return Err(Error::InvalidPartition(format!(
            "{sf} has no movable boundary"
        )));
    }
    let next = SpreadingFactor::from_index(sf.index() + 1);
    let mut lo = partition.inner(sf);
    let mut hi = partition.outer(next);
    let gap = |r: f64| boundary_gap(sf, r, partition, cfg, table, mode);
    if gap(lo) <= 0.0 {
        return Ok(lo);
    }
    if gap(hi) >= 0.0 {
        return Ok(hi);
    }
    while hi - lo > BOUNDARY_TOLERANCE_M {
        let mid = 0.5 * (lo + hi);
        if gap(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IbOptions {
    /// Balanced once all non-empty zone throughputs lie within this band (bps).
    pub tolerance_bps: f64,
    pub max_iterations: usize,
}

impl IbOptions {
    pub fn from_config(cfg: &NetworkConfig) -> Self {
        IbOptions {
            tolerance_bps: cfg.ib_tolerance_bps,
            max_iterations: MAX_ITERATIONS,
        }
    }
}

/// Why balancing stopped.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    /// Non-empty zone throughputs agree to within the tolerance.
    Balanced,
    /// No remaining neighbour gap can be reduced by moving its boundary.
    /// Lists the remaining gaps as (lower SF of the pair, gap in bps).
    Unreducible(Vec<(SpreadingFactor, f64)>),
    /// Iteration cap reached; the solution is the best found so far.
    IterationCap,
}

/// Result of iterative balancing.
#[derive(Debug, Clone, PartialEq)]
pub struct MaxMinSolution {
    pub partition: Partition,
    pub duties: DutyPlan,
    pub zones: [ZoneOutcome; NUM_SF],
    /// min over non-empty zones of θ̄_s (bps).
    pub min_throughput: f64,
    /// Number of boundary moves made.
    pub iterations: usize,
    pub termination: Termination,
    /// Largest neighbour gap before each move and at the end.
    pub max_gap_history: Vec<f64>,
}

impl MaxMinSolution {
    pub fn converged(&self) -> bool {
        !matches!(self.termination, Termination::IterationCap)
    }

    pub fn power_policy(&self, cfg: &NetworkConfig) -> PowerPolicy {
        PowerPolicy::max_power(&self.partition, cfg)
    }

    /// Analytic spatial throughput of the operating point (bps/m²).
    pub fn spatial_throughput(&self, cfg: &NetworkConfig, table: &SfTable) -> f64 {
        analytic::spatial_throughput_analytic(
            &self.partition,
            &self.duties,
            &self.power_policy(cfg),
            cfg,
            table,
        )
    }
}

fn outcomes(
    partition: &Partition,
    cfg: &NetworkConfig,
    table: &SfTable,
    mode: DutyMode,
) -> [ZoneOutcome; NUM_SF] {
    std::array::from_fn(|i| {
        zone_optimal_throughput(SpreadingFactor::from_index(i), partition, cfg, table, mode)
    })
}

/// Gaps between neighbouring non-empty zones, largest first, lowest SF
/// first among ties.
fn neighbour_gaps(zones: &[ZoneOutcome; NUM_SF]) -> Vec<(SpreadingFactor, f64)> {
    let mut gaps: Vec<(SpreadingFactor, f64)> = (0..NUM_BOUNDARIES)
        .filter_map(
            |i| match (zones[i].throughput(), zones[i + 1].throughput()) {
                (Some(a), Some(b)) => Some((SpreadingFactor::from_index(i), (a - b).abs())),
                _ => None,
            },
        )
        .collect();
    gaps.sort_by(|a, b| b.1.total_cmp(&a.1));
    gaps
}

fn spread(zones: &[ZoneOutcome; NUM_SF]) -> f64 {
    let vals = zones.iter().filter_map(ZoneOutcome::throughput);
    let (lo, hi) = vals.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    });
    if lo.is_finite() {
        hi - lo
    } else {
        0.0
    }
}

fn bottleneck(zones: &[ZoneOutcome; NUM_SF]) -> f64 {
    zones
        .iter()
        .filter_map(ZoneOutcome::throughput)
        .fold(f64::INFINITY, f64::min)
}

fn duty_plan(
    zones: &[ZoneOutcome; NUM_SF],
    partition: &Partition,
    cfg: &NetworkConfig,
    table: &SfTable,
    mode: DutyMode,
) -> Result<DutyPlan> {
    let duties = std::array::from_fn(|i| match zones[i] {
        ZoneOutcome::Active { duty, .. } => duty,
        ZoneOutcome::Inactive => {
            zone_scenario(SpreadingFactor::from_index(i), partition, cfg, table, mode).duty
        }
    });
    DutyPlan::new(
        duties,
        cfg.max_duty.max(match mode {
            DutyMode::Fixed(d) => d,
            DutyMode::Optimal => 0.0,
        }),
    )
}

/// Iterative balancing of the zone boundaries for max-min throughput.
pub fn iterative_balancing(
    cfg: &NetworkConfig,
    table: &SfTable,
    initial: &Partition,
    mode: DutyMode,
    options: IbOptions,
) -> Result<MaxMinSolution> {
    cfg.validate()?;
    if let DutyMode::Fixed(d) = mode {
        if !(0.0..1.0).contains(&d) {
            return Err(Error::InvalidDuty(d));
        }
    }
    let mut partition = initial.clone();
    let mut zones = outcomes(&partition, cfg, table, mode);
    let mut iterations = 0;
    let mut history = Vec::new();

    let termination = loop {
        let gaps = neighbour_gaps(&zones);
        history.push(gaps.first().map_or(0.0, |g| g.1));
        if spread(&zones) <= options.tolerance_bps {
            break Termination::Balanced;
        }
        if iterations >= options.max_iterations {
            break Termination::IterationCap;
        }
        let mut moved = false;
        for &(sf, gap) in &gaps {
            let current = partition.outer(sf);
            let target = balance_boundary(sf, &partition, cfg, table, mode)?;
            if (target - current).abs() <= BOUNDARY_TOLERANCE_M {
                continue;
            }
            let candidate = partition.with_boundary(sf, target)?;
            let new_gap = boundary_gap(sf, target, &partition, cfg, table, mode).abs();
            if new_gap < gap {
                partition = candidate;
                zones = outcomes(&partition, cfg, table, mode);
                iterations += 1;
                moved = true;
                break;
            }
        }
        if !moved {
            break Termination::Unreducible(gaps);
        }
    };

    Ok(MaxMinSolution {
        duties: duty_plan(&zones, &partition, cfg, table, mode)?,
        min_throughput: bottleneck(&zones),
        partition,
        zones,
        iterations,
        termination,
        max_gap_history: history,
    })
}

/// Fixed-power, fixed-duty reference schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchmarkScheme {
    /// Equal-area partition.
    EqualArea = 1,
    /// Boundaries at each SF's path-loss-only reach.
    MaxRange = 2,
}

impl BenchmarkScheme {
    pub fn from_id(id: u8) -> Result<Self> {
        match id {
            1 => Ok(BenchmarkScheme::EqualArea),
            2 => Ok(BenchmarkScheme::MaxRange),
            other => Err(Error::InvalidConfig(format!(
                "unknown benchmark scheme {other}"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkSpec {
    pub scheme: BenchmarkScheme,
    pub tx_power_w: f64,
    pub duty: f64,
}

impl BenchmarkSpec {
    /// Every UE at `P_max` with a 1% duty cycle.
    pub fn standard(scheme: BenchmarkScheme, cfg: &NetworkConfig) -> Self {
        BenchmarkSpec {
            scheme,
            tx_power_w: cfg.max_power_w,
            duty: 0.01,
        }
    }

    pub fn partition(&self, cfg: &NetworkConfig, table: &SfTable) -> Result<Partition> {
        match self.scheme {
            BenchmarkScheme::EqualArea => Partition::equal_area(cfg.cell_radius_m),
            BenchmarkScheme::MaxRange => Partition::max_range(cfg, table),
        }
    }
}

/// Monte-Carlo evaluation of a benchmark scheme over a finite population.
pub fn evaluate_benchmark(
    spec: &BenchmarkSpec,
    cfg: &NetworkConfig,
    table: &SfTable,
    bin_width_m: f64,
    trials: u64,
    seed: u64,
) -> Result<ThroughputReport> {
    let partition = spec.partition(cfg, table)?;
    let scenario = FullScenario {
        cfg: cfg.clone(),
        table: table.clone(),
        duties: DutyPlan::uniform(spec.duty, spec.duty.max(cfg.max_duty))?,
        power: PowerControl::Fixed {
            tx_power_w: spec.tx_power_w,
        },
        partition,
        bin_width_m,
    };
    let profile = simulate_finite_population(&scenario, trials, seed);
    Ok(ThroughputReport::from_profile(&scenario, profile))
}
