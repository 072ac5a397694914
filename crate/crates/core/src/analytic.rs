//! Closed-form per-zone performance under channel-inversion power control.
//!
//! With every UE of zone s received at the common mean power Q̄_s, the
//! duration-averaged co-SF interference is a shot noise over a space-time
//! Poisson rain of density λρ_s. Its Laplace transform has the closed form
//!
//! ```text
//! L(z) = exp{ -2λ A_s Δ_s/(1-Δ_s) · φ(Q̄_s z/μ) },   φ(x) = 1 - ln(1+x)/x
//! ```
//!
//! which gives the packet success probability (a lower bound on the exact
//! joint SNR/SIR event), the zone throughput and its maximising duty cycle.

use std::f64::consts::PI;

use crate::model::{
    DutyPlan, NetworkConfig, Partition, PathGain, PowerMode, PowerPolicy, SfTable, SpreadingFactor,
};

/// Everything needed to evaluate one SF zone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneScenario {
    pub sf: SpreadingFactor,
    /// r_{s-1}
    pub inner_radius_m: f64,
    /// r_s
    pub outer_radius_m: f64,
    /// Q̄_s (W)
    pub received_power_w: f64,
    pub duty: f64,
    pub density_per_m2: f64,
    pub noise_w: f64,
    pub fading_rate: f64,
    pub snr_threshold: f64,
    pub sir_threshold: f64,
    pub bit_rate: f64,
    pub packet_duration: f64,
    /// Used by the simulator for fixed-power interferers and references.
    pub path_gain: PathGain,
    pub power_mode: PowerMode,
}

impl ZoneScenario {
    /// Zone `sf` of a partition under channel inversion with `policy`.
    pub fn from_plan(
        sf: SpreadingFactor,
        partition: &Partition,
        policy: &PowerPolicy,
        duties: &DutyPlan,
        cfg: &NetworkConfig,
        table: &SfTable,
    ) -> Self {
        Self::with_duty(sf, partition, policy, duties.duty(sf), cfg, table)
    }

    pub fn with_duty(
        sf: SpreadingFactor,
        partition: &Partition,
        policy: &PowerPolicy,
        duty: f64,
        cfg: &NetworkConfig,
        table: &SfTable,
    ) -> Self {
        let p = table.get(sf);
        ZoneScenario {
            sf,
            inner_radius_m: partition.inner(sf),
            outer_radius_m: partition.outer(sf),
            received_power_w: policy.received_power(sf),
            duty,
            density_per_m2: cfg.active_density_per_m2,
            noise_w: cfg.noise_w,
            fading_rate: cfg.fading_rate,
            snr_threshold: p.snr_threshold,
            sir_threshold: p.sir_threshold,
            bit_rate: p.bit_rate(),
            packet_duration: p.packet_duration(),
            path_gain: cfg.path_gain(),
            power_mode: PowerMode::ChannelInversion,
        }
    }

    /// A_s
    pub fn area(&self) -> f64 {
        let (a, b) = (self.inner_radius_m, self.outer_radius_m);
        PI * (b * b - a * a)
    }

    /// λ A_s, the mean number of UEs in the zone.
    pub fn mean_population(&self) -> f64 {
        self.density_per_m2 * self.area()
    }

    /// ρ_s, packet initiations per UE per second.
    pub fn access_rate(&self) -> f64 {
        self.duty / ((1.0 - self.duty) * self.packet_duration)
    }

    /// Mean number of co-SF packets overlapping a reference packet,
    /// 2λA_sΔ_s/(1−Δ_s).
    pub fn mean_overlapping(&self) -> f64 {
        2.0 * self.mean_population() * self.duty / (1.0 - self.duty)
    }
}

/// Per-zone closed-form result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZoneResult {
    pub success_probability: f64,
    /// θ̄_s in bps
    pub throughput: f64,
    pub duty: f64,
    pub sir_constant: f64,
}

/// φ(x) = 1 − ln(1+x)/x on x ≥ 0, with φ(0) = 0.
fn overlap_shape(x: f64) -> f64 {
    if x < 1e-5 {
        // series: x/2 - x²/3 + x³/4
        x * (0.5 - x * (1.0 / 3.0 - x * 0.25))
    } else if x.is_infinite() {
        1.0
    } else {
        1.0 - x.ln_1p() / x
    }
}

/// `C_s = 1 + ln(1/(1+γ̄_s))/γ̄_s`.
pub fn sir_constant(sir_threshold: f64) -> f64 {
    overlap_shape(sir_threshold)
}

/// Laplace transform `E[exp(-z Ī_s)]` of the duration-averaged interference.
pub fn interference_laplace(z: f64, zone: &ZoneScenario) -> f64 {
    debug_assert!(z >= 0.0);
    if zone.duty == 0.0 || z == 0.0 {
        return 1.0;
    }
    let x = zone.received_power_w * z / zone.fading_rate;
    (-zone.mean_overlapping() * overlap_shape(x)).exp()
}

/// `exp(−σ²μη̄_s/Q̄_s)`: probability the reference clears the SNR threshold.
pub fn noise_factor(zone: &ZoneScenario) -> f64 {
    (-zone.noise_w * zone.fading_rate * zone.snr_threshold / zone.received_power_w).exp()
}

/// Closed-form packet success probability: the SNR factor times the
/// interference Laplace transform at μγ̄_s/Q̄_s.
pub fn packet_success_prob(zone: &ZoneScenario) -> f64 {
    let interference = zone.mean_overlapping() * sir_constant(zone.sir_threshold);
    (-zone.noise_w * zone.fading_rate * zone.snr_threshold / zone.received_power_w - interference)
        .exp()
}

/// θ̄_s = R_s Δ_s P_suc in bps.
pub fn zone_throughput(zone: &ZoneScenario) -> f64 {
    zone.bit_rate * zone.duty * packet_success_prob(zone)
}

pub fn evaluate_zone(zone: &ZoneScenario) -> ZoneResult {
    let success_probability = packet_success_prob(zone);
    ZoneResult {
        success_probability,
        throughput: zone.bit_rate * zone.duty * success_probability,
        duty: zone.duty,
        sir_constant: sir_constant(zone.sir_threshold),
    }
}

/// Throughput-maximising duty cycle for a zone whose load `λ A_s C_s` is
/// `load`, capped at `cap`.
pub fn optimal_duty(load: f64, cap: f64) -> f64 {
    if load <= 0.0 {
        return cap.min(1.0);
    }
    let unconstrained = 1.0 / (1.0 + load + (load * (2.0 + load)).sqrt());
    cap.min(unconstrained)
}

pub fn optimal_duty_cycle(zone: &ZoneScenario, cap: f64) -> f64 {
    optimal_duty(
        zone.mean_population() * sir_constant(zone.sir_threshold),
        cap,
    )
}

/// Σ_s λ A_s θ̄_s / (π r_c²), in bps/m².
pub fn spatial_throughput_analytic(
    partition: &Partition,
    duties: &DutyPlan,
    policy: &PowerPolicy,
    cfg: &NetworkConfig,
    table: &SfTable,
) -> f64 {
    let total: f64 = SpreadingFactor::ALL
        .iter()
        .map(|&sf| {
            let zone = ZoneScenario::from_plan(sf, partition, policy, duties, cfg, table);
            zone.mean_population() * zone_throughput(&zone)
        })
        .sum();
    total / (PI * partition.cell_radius().powi(2))
}
