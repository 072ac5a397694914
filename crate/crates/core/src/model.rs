//! Radio and geometry primitives: bit rates, path gain, SF zone partitions,
//! channel access rates and the distance-based channel-inversion power policy.
//!
//! All quantities are linear SI (W, Hz, m, s, UEs/m²).

use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};
use crate::units::{db_to_linear, dbm_to_watts, per_km2_to_per_m2};

/// Number of spreading factors (7 through 12).
pub const NUM_SF: usize = 6;

/// Number of movable zone boundaries r_7..r_11.
pub const NUM_BOUNDARIES: usize = NUM_SF - 1;

/// A LoRa spreading factor in `7..=12`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SpreadingFactor(u8);

impl SpreadingFactor {
    pub const MIN: u8 = 7;
    pub const MAX: u8 = 12;

    pub const ALL: [SpreadingFactor; NUM_SF] = [
        SpreadingFactor(7),
        SpreadingFactor(8),
        SpreadingFactor(9),
        SpreadingFactor(10),
        SpreadingFactor(11),
        SpreadingFactor(12),
    ];

    pub fn new(value: u8) -> Result<Self> {
        if (Self::MIN..=Self::MAX).contains(&value) {
            Ok(SpreadingFactor(value))
        } else {
            Err(Error::InvalidSpreadingFactor(value))
        }
    }

    pub fn value(self) -> u8 {
        self.0
    }

    /// Position in per-SF arrays (SF7 -> 0).
    pub fn index(self) -> usize {
        (self.0 - Self::MIN) as usize
    }

    /// Panics if `index >= NUM_SF`.
    pub fn from_index(index: usize) -> Self {
        Self::ALL[index]
    }
}

impl fmt::Display for SpreadingFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SF{}", self.0)
    }
}

/// Global physical and regulatory parameters of the cell.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    pub gateway_height_m: f64,
    pub cell_radius_m: f64,
    /// Density of active UEs (per m²).
    pub active_density_per_m2: f64,
    /// Density of all UEs, active or not (per m²). Only the finite-population
    /// simulator uses it.
    pub all_density_per_m2: f64,
    pub pathloss_exponent: f64,
    pub carrier_hz: f64,
    pub lightspeed_m_s: f64,
    pub noise_w: f64,
    /// Rate of the exponential fading marks (mean 1/μ).
    pub fading_rate: f64,
    pub max_power_w: f64,
    pub max_duty: f64,
    /// Throughput gap (bps) below which neighbouring zones count as balanced.
    pub ib_tolerance_bps: f64,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        let active = per_km2_to_per_m2(700.0);
        NetworkConfig {
            gateway_height_m: 25.0,
            cell_radius_m: 1000.0,
            active_density_per_m2: active,
            all_density_per_m2: 2.0 * active,
            pathloss_exponent: 3.5,
            carrier_hz: 868e6,
            lightspeed_m_s: 3e8,
            noise_w: dbm_to_watts(-117.0),
            fading_rate: 1.0,
            max_power_w: dbm_to_watts(14.0),
            max_duty: 0.01,
            ib_tolerance_bps: 0.02,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gateway_height_m", self.gateway_height_m),
            ("cell_radius_m", self.cell_radius_m),
            ("active_density_per_m2", self.active_density_per_m2),
            ("all_density_per_m2", self.all_density_per_m2),
            ("pathloss_exponent", self.pathloss_exponent),
            ("carrier_hz", self.carrier_hz),
            ("lightspeed_m_s", self.lightspeed_m_s),
            ("noise_w", self.noise_w),
            ("fading_rate", self.fading_rate),
            ("max_power_w", self.max_power_w),
            ("max_duty", self.max_duty),
            ("ib_tolerance_bps", self.ib_tolerance_bps),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "{name} must be finite and positive, got {v}"
                )));
            }
        }
        if self.max_duty >= 1.0 {
            return Err(Error::InvalidConfig(format!(
                "max_duty must be < 1, got {}",
                self.max_duty
            )));
        }
        if self.pathloss_exponent < 2.0 {
            return Err(Error::InvalidConfig(format!(
                "pathloss_exponent must be >= 2, got {}",
                self.pathloss_exponent
            )));
        }
        if self.all_density_per_m2 < self.active_density_per_m2 {
            return Err(Error::InvalidConfig(
                "all_density_per_m2 must be >= active_density_per_m2".into(),
            ));
        }
        Ok(())
    }

    /// α_0 = (4π f_c / c)^-2, the mean gain at 1 m.
    pub fn reference_gain(&self) -> f64 {
        (4.0 * PI * self.carrier_hz / self.lightspeed_m_s).powi(-2)
    }

    pub fn path_gain(&self) -> PathGain {
        PathGain {
            reference_gain: self.reference_gain(),
            gateway_height_m: self.gateway_height_m,
            exponent: self.pathloss_exponent,
        }
    }

    pub fn cell_area(&self) -> f64 {
        PI * self.cell_radius_m * self.cell_radius_m
    }
}

/// Mean channel gain model `α_0 (H_G² + d²)^(-n/2)`, detached from the
/// rest of the config so it can be carried by value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathGain {
    pub reference_gain: f64,
    pub gateway_height_m: f64,
    pub exponent: f64,
}

impl PathGain {
    pub fn mean_gain(&self, distance_m: f64) -> f64 {
        let h2 = self.gateway_height_m * self.gateway_height_m;
        self.reference_gain * (h2 + distance_m * distance_m).powf(-self.exponent / 2.0)
    }
}

/// Average channel power gain between the gateway and a UE at horizontal
/// distance `distance_m`.
pub fn mean_path_gain(distance_m: f64, cfg: &NetworkConfig) -> f64 {
    cfg.path_gain().mean_gain(distance_m)
}

/// Per-SF radio parameters. Thresholds are linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SfParams {
    pub sf: SpreadingFactor,
    pub bandwidth_hz: f64,
    pub code_rate: f64,
    pub payload_bits: f64,
    pub snr_threshold: f64,
    pub sir_threshold: f64,
}

impl SfParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidSfParams {
            sf: self.sf.value(),
            reason,
        };
        for (name, v) in [
            ("bandwidth_hz", self.bandwidth_hz),
            ("code_rate", self.code_rate),
            ("payload_bits", self.payload_bits),
            ("snr_threshold", self.snr_threshold),
            ("sir_threshold", self.sir_threshold),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(bad(format!("{name} must be finite and positive, got {v}")));
            }
        }
        Ok(())
    }

    /// `R_s = s / 2^s · B · C` in bit/s.
    pub fn bit_rate(&self) -> f64 {
        let s = self.sf.value() as f64;
        s / 2f64.powi(self.sf.value() as i32) * self.bandwidth_hz * self.code_rate
    }

    /// `T_s = L_s / R_s` in seconds.
    pub fn packet_duration(&self) -> f64 {
        self.payload_bits / self.bit_rate()
    }
}

/// SNR thresholds (dB) for SF7..SF12 used by default.
pub const DEFAULT_SNR_THRESHOLDS_DB: [f64; NUM_SF] = [-6.0, -9.0, -12.0, -15.0, -17.5, -20.0];

/// One [`SfParams`] per spreading factor, SF7 first.
#[derive(Debug, Clone, PartialEq)]
pub struct SfTable {
    params: [SfParams; NUM_SF],
}

impl SfTable {
    pub fn new(params: [SfParams; NUM_SF]) -> Result<Self> {
        for (i, p) in params.iter().enumerate() {
            if p.sf.index() != i {
                return Err(Error::InvalidSfParams {
                    sf: p.sf.value(),
                    reason: format!("entry {i} must describe {}", SpreadingFactor::from_index(i)),
                });
            }
            p.validate()?;
        }
        Ok(SfTable { params })
    }

    pub fn get(&self, sf: SpreadingFactor) -> &SfParams {
        &self.params[sf.index()]
    }

    pub fn get_mut(&mut self, sf: SpreadingFactor) -> &mut SfParams {
        &mut self.params[sf.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = &SfParams> {
        self.params.iter()
    }
}

impl Default for SfTable {
    /// B = 125 kHz, C = 4/5, 25-byte payloads, 6 dB SIR threshold.
    fn default() -> Self {
        let params = std::array::from_fn(|i| SfParams {
            sf: SpreadingFactor::from_index(i),
            bandwidth_hz: 125e3,
            code_rate: 0.8,
            payload_bits: 25.0 * 8.0,
            snr_threshold: db_to_linear(DEFAULT_SNR_THRESHOLDS_DB[i]),
            sir_threshold: db_to_linear(6.0),
        });
        SfTable { params }
    }
}

/// Largest distance at which SF `params.sf` closes the link at `P_max` on
/// mean path loss alone.
pub fn max_range(params: &SfParams, cfg: &NetworkConfig) -> Result<f64> {
    let gain = cfg.path_gain();
    let best_snr = cfg.max_power_w * gain.mean_gain(0.0) / cfg.noise_w;
    if best_snr < params.snr_threshold {
        return Err(Error::UnreachableSf {
            sf: params.sf,
            best_snr,
            threshold: params.snr_threshold,
        });
    }
    let ratio = cfg.max_power_w * gain.reference_gain / (params.snr_threshold * cfg.noise_w);
    let h2 = cfg.gateway_height_m * cfg.gateway_height_m;
    Ok((ratio.powf(2.0 / cfg.pathloss_exponent) - h2)
        .max(0.0)
        .sqrt())
}

/// Ring partition of the cell into one zone per SF.
///
/// Stores r_7..r_11; r_6 = 0 and r_12 = cell radius are implied. Equal
/// neighbouring boundaries describe an empty zone.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    boundaries: [f64; NUM_BOUNDARIES],
    cell_radius: f64,
}

impl Partition {
    pub fn new(boundaries: [f64; NUM_BOUNDARIES], cell_radius: f64) -> Result<Self> {
        if !(cell_radius.is_finite() && cell_radius > 0.0) {
            return Err(Error::InvalidPartition(format!(
                "cell radius must be positive, got {cell_radius}"
            )));
        }
        let mut prev = 0.0;
        for (i, &r) in boundaries.iter().enumerate() {
            if !r.is_finite() || r < prev || r > cell_radius {
                return Err(Error::InvalidPartition(format!(
                    "boundary r_{} = {r} breaks 0 <= r_7 <= ... <= r_11 <= {cell_radius}",
                    i + 7
                )));
            }
            prev = r;
        }
        Ok(Partition {
            boundaries,
            cell_radius,
        })
    }

    /// Six rings of equal area: r_s = r_c·sqrt((s-6)/6).
    pub fn equal_area(cell_radius: f64) -> Result<Self> {
        let boundaries =
            std::array::from_fn(|i| cell_radius * ((i + 1) as f64 / NUM_SF as f64).sqrt());
        Self::new(boundaries, cell_radius)
    }

    /// Boundaries at each SF's path-loss-only reach, clipped to the cell.
    pub fn max_range(cfg: &NetworkConfig, table: &SfTable) -> Result<Self> {
        let mut boundaries = [0.0; NUM_BOUNDARIES];
        let mut prev: f64 = 0.0;
        for (i, b) in boundaries.iter_mut().enumerate() {
            let r = max_range(table.get(SpreadingFactor::from_index(i)), cfg)?;
            *b = r.min(cfg.cell_radius_m).max(prev);
            prev = *b;
        }
        Self::new(boundaries, cfg.cell_radius_m)
    }

    pub fn boundaries(&self) -> &[f64; NUM_BOUNDARIES] {
        &self.boundaries
    }

    pub fn cell_radius(&self) -> f64 {
        self.cell_radius
    }

    /// r_{s-1}
    pub fn inner(&self, sf: SpreadingFactor) -> f64 {
        match sf.index() {
            0 => 0.0,
            i => self.boundaries[i - 1],
        }
    }

    /// r_s
    pub fn outer(&self, sf: SpreadingFactor) -> f64 {
        match sf.index() {
            i if i == NUM_SF - 1 => self.cell_radius,
            i => self.boundaries[i],
        }
    }

    pub fn area(&self, sf: SpreadingFactor) -> f64 {
        let (a, b) = (self.inner(sf), self.outer(sf));
        PI * (b * b - a * a)
    }

    pub fn is_empty_zone(&self, sf: SpreadingFactor) -> bool {
        self.outer(sf) <= self.inner(sf)
    }

    /// The non-empty zone containing `distance_m`, or `None` outside the cell.
    pub fn zone_of(&self, distance_m: f64) -> Option<SpreadingFactor> {
        if !(0.0..=self.cell_radius).contains(&distance_m) {
            return None;
        }
        SpreadingFactor::ALL
            .into_iter()
            .find(|&sf| !self.is_empty_zone(sf) && distance_m <= self.outer(sf))
    }

    /// Copy with boundary r_{sf} replaced. `sf` must be SF7..SF11.
    pub fn with_boundary(&self, sf: SpreadingFactor, radius: f64) -> Result<Self> {
        let i = sf.index();
        if i >= NUM_BOUNDARIES {
            return Err(Error::InvalidPartition(format!(
                "{sf} has no movable boundary"
            )));
        }
        let mut b = self.boundaries;
        b[i] = radius;
        Self::new(b, self.cell_radius)
    }
}

/// Ring areas A_s = π(r_s² − r_{s−1}²), SF7 first.
pub fn zone_areas(partition: &Partition) -> [f64; NUM_SF] {
    std::array::from_fn(|i| partition.area(SpreadingFactor::from_index(i)))
}

/// Packet initiations per UE per second, `Δ / ((1 − Δ) T_s)`.
pub fn channel_access_rate(duty: f64, params: &SfParams) -> Result<f64> {
    if !(0.0..1.0).contains(&duty) {
        return Err(Error::InvalidDuty(duty));
    }
    Ok(duty / ((1.0 - duty) * params.packet_duration()))
}

/// Per-SF duty cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct DutyPlan {
    duties: [f64; NUM_SF],
}

impl DutyPlan {
    /// Every duty must lie in `[0, cap]` and `cap < 1`.
    pub fn new(duties: [f64; NUM_SF], cap: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&cap) {
            return Err(Error::InvalidDuty(cap));
        }
        for &d in &duties {
            if !(d.is_finite() && (0.0..=cap).contains(&d)) {
                return Err(Error::InvalidDuty(d));
            }
        }
        Ok(DutyPlan { duties })
    }

    pub fn uniform(duty: f64, cap: f64) -> Result<Self> {
        Self::new([duty; NUM_SF], cap)
    }

    pub fn duty(&self, sf: SpreadingFactor) -> f64 {
        self.duties[sf.index()]
    }

    pub fn duties(&self) -> &[f64; NUM_SF] {
        &self.duties
    }

    pub fn access_rate(&self, sf: SpreadingFactor, table: &SfTable) -> f64 {
        // duties are validated < 1 at construction
        channel_access_rate(self.duty(sf), table.get(sf)).unwrap_or(f64::INFINITY)
    }
}

/// Slow channel-inversion power control: UEs in zone s are received at the
/// common mean power Q̄_s that the zone-edge UE achieves at `P_s^edge`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerPolicy {
    edge_power: [f64; NUM_SF],
    received_power: [f64; NUM_SF],
}

impl PowerPolicy {
    pub fn channel_inversion(
        partition: &Partition,
        cfg: &NetworkConfig,
        edge_power: [f64; NUM_SF],
    ) -> Result<Self> {
        let gain = cfg.path_gain();
        for (i, &p) in edge_power.iter().enumerate() {
            if !(p.is_finite() && p > 0.0 && p <= cfg.max_power_w) {
                return Err(Error::InvalidConfig(format!(
                    "edge power of {} must lie in (0, {}] W, got {p}",
                    SpreadingFactor::from_index(i),
                    cfg.max_power_w
                )));
            }
        }
        let received_power = std::array::from_fn(|i| {
            edge_power[i] * gain.mean_gain(partition.outer(SpreadingFactor::from_index(i)))
        });
        Ok(PowerPolicy {
            edge_power,
            received_power,
        })
    }

    /// Zone-edge UEs transmit at `P_max`.
    pub fn max_power(partition: &Partition, cfg: &NetworkConfig) -> Self {
        Self::channel_inversion(partition, cfg, [cfg.max_power_w; NUM_SF])
            .expect("P_max is a valid edge power")
    }

    pub fn edge_power(&self, sf: SpreadingFactor) -> f64 {
        self.edge_power[sf.index()]
    }

    /// Q̄_s
    pub fn received_power(&self, sf: SpreadingFactor) -> f64 {
        self.received_power[sf.index()]
    }
}

/// How interferers set their transmit power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PowerMode {
    /// Channel inversion towards the zone's Q̄_s.
    ChannelInversion,
    /// Every UE transmits at the same power regardless of distance.
    Fixed { tx_power_w: f64 },
}

/// Transmit power of an SF-`sf` UE at `distance_m` under channel inversion:
/// `P_s^edge ((H_G² + r²)/(H_G² + r_s²))^(n/2)`.
pub fn transmit_power(
    sf: SpreadingFactor,
    distance_m: f64,
    partition: &Partition,
    policy: &PowerPolicy,
    cfg: &NetworkConfig,
) -> Result<f64> {
    let (inner, outer) = (partition.inner(sf), partition.outer(sf));
    let slack = 1e-9 * partition.cell_radius();
    if !(distance_m >= inner - slack && distance_m <= outer + slack) {
        return Err(Error::OutOfZone {
            sf,
            distance: distance_m,
            inner,
            outer,
        });
    }
    let h2 = cfg.gateway_height_m * cfg.gateway_height_m;
    let ratio = (h2 + distance_m * distance_m) / (h2 + outer * outer);
    Ok(policy.edge_power(sf) * ratio.powf(cfg.pathloss_exponent / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn sf(v: u8) -> SpreadingFactor {
        SpreadingFactor::new(v).unwrap()
    }

    #[test]
    fn bit_rates_match_lora_table() {
        let table = SfTable::default();
        assert_eq!(table.get(sf(7)).bit_rate(), 5468.75);
        assert_eq!(table.get(sf(12)).bit_rate().round(), 293.0);
        assert_eq!(table.get(sf(9)).bit_rate().round(), 1758.0);
    }

    #[test]
    fn packet_durations() {
        let table = SfTable::default();
        assert_relative_eq!(table.get(sf(7)).packet_duration(), 200.0 / 5468.75);
        assert_relative_eq!(
            table.get(sf(7)).packet_duration(),
            0.036_571_4,
            max_relative = 1e-5
        );
        assert_relative_eq!(
            table.get(sf(12)).packet_duration(),
            0.682_666_7,
            max_relative = 1e-6
        );
    }

    #[test]
    fn zero_payload_is_rejected() {
        let mut p = *SfTable::default().get(sf(7));
        p.payload_bits = 0.0;
        assert!(p.validate().is_err());
    }

    #[test]
    fn rejects_bad_sf() {
        assert!(SpreadingFactor::new(6).is_err());
        assert!(SpreadingFactor::new(13).is_err());
        assert_eq!(sf(12).index(), 5);
    }

    #[test]
    fn reference_gain_value() {
        let cfg = NetworkConfig::default();
        let a0 = cfg.reference_gain();
        // (4π·868e6/3e8)^-2
        assert_relative_eq!(a0, 7.564_55e-4, max_relative = 1e-5);
        assert_relative_eq!(crate::units::linear_to_db(a0), -31.21, epsilon = 0.01);
        assert_relative_eq!(
            mean_path_gain(0.0, &cfg),
            a0 * 625f64.powf(-1.75),
            max_relative = 1e-14
        );
    }

    #[test]
    fn max_range_edge_snr_is_threshold() {
        let cfg = NetworkConfig::default();
        let table = SfTable::default();
        let p = table.get(sf(7));
        let d = max_range(p, &cfg).unwrap();
        assert!((d - 1053.0).abs() <= 1.0, "{d}");
        let snr = cfg.max_power_w * mean_path_gain(d, &cfg) / cfg.noise_w;
        assert_relative_eq!(snr, p.snr_threshold, max_relative = 1e-10);
        assert!((max_range(table.get(sf(12)), &cfg).unwrap() - 2645.0).abs() <= 1.0);
        assert!((max_range(table.get(sf(10)), &cfg).unwrap() - 1904.0).abs() <= 1.0);
    }

    #[test]
    fn unreachable_sf_is_an_error() {
        let cfg = NetworkConfig {
            max_power_w: 1e-15,
            ..NetworkConfig::default()
        };
        let err = max_range(SfTable::default().get(sf(7)), &cfg).unwrap_err();
        assert!(matches!(err, Error::UnreachableSf { .. }));
    }

    #[test]
    fn equal_area_boundaries() {
        let p = Partition::equal_area(1000.0).unwrap();
        assert_eq!(p.boundaries()[0].round(), 408.0);
        assert_eq!(p.boundaries()[2].round(), 707.0);
        assert_eq!(p.outer(sf(12)), 1000.0);
        for a in zone_areas(&p) {
            assert_relative_eq!(a, PI * 1e6 / 6.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn degenerate_and_max_range_areas() {
        let p = Partition::new([400.0, 400.0, 600.0, 800.0, 900.0], 1000.0).unwrap();
        assert_eq!(p.area(sf(8)), 0.0);
        assert!(p.is_empty_zone(sf(8)));
        assert_eq!(p.zone_of(400.0), Some(sf(7)));
        assert_eq!(p.zone_of(400.5), Some(sf(9)));
        assert_eq!(p.zone_of(1000.5), None);

        let cfg = NetworkConfig {
            cell_radius_m: 2645.0,
            ..NetworkConfig::default()
        };
        let mr = Partition::max_range(&cfg, &SfTable::default()).unwrap();
        let a8 = mr.area(sf(8));
        let expected = PI * (mr.outer(sf(8)).powi(2) - mr.inner(sf(8)).powi(2));
        assert_eq!(a8, expected);
        assert_relative_eq!(a8, 1.688e6, max_relative = 2e-3);
    }

    #[test]
    fn partition_rejects_misordered() {
        assert!(Partition::new([500.0, 400.0, 600.0, 800.0, 900.0], 1000.0).is_err());
        assert!(Partition::new([100.0, 200.0, 300.0, 400.0, 1100.0], 1000.0).is_err());
        assert!(Partition::new([-1.0, 200.0, 300.0, 400.0, 500.0], 1000.0).is_err());
    }

    #[test]
    fn access_rate_examples() {
        let p = SfTable::default().get(sf(7)).to_owned();
        assert_eq!(channel_access_rate(0.0, &p).unwrap(), 0.0);
        assert_relative_eq!(
            channel_access_rate(0.5, &p).unwrap(),
            1.0 / p.packet_duration()
        );
        assert_relative_eq!(
            channel_access_rate(0.01, &p).unwrap(),
            0.276_2,
            max_relative = 1e-3
        );
        assert!(channel_access_rate(1.0, &p).is_err());
    }

    #[test]
    fn transmit_power_examples() {
        let cfg = NetworkConfig::default();
        let part = Partition::new([408.0, 577.0, 707.0, 816.0, 913.0], 1000.0).unwrap();
        let policy = PowerPolicy::max_power(&part, &cfg);
        let edge = transmit_power(sf(7), 408.0, &part, &policy, &cfg).unwrap();
        assert_relative_eq!(edge, cfg.max_power_w, max_relative = 1e-15);
        let at_foot = transmit_power(sf(7), 0.0, &part, &policy, &cfg).unwrap();
        assert_relative_eq!(
            at_foot,
            cfg.max_power_w * (625.0f64 / 167_089.0).powf(1.75),
            max_relative = 1e-12
        );
        assert_relative_eq!(
            at_foot * mean_path_gain(0.0, &cfg),
            policy.received_power(sf(7)),
            max_relative = 1e-12
        );
        assert!(matches!(
            transmit_power(sf(8), 100.0, &part, &policy, &cfg),
            Err(Error::OutOfZone { .. })
        ));
    }

    #[test]
    fn default_config_is_valid() {
        NetworkConfig::default().validate().unwrap();
        let bad = NetworkConfig {
            max_duty: 1.0,
            ..NetworkConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = NetworkConfig {
            pathloss_exponent: 1.5,
            ..NetworkConfig::default()
        };
        assert!(bad.validate().is_err());
    }

    fn arb_partition() -> impl Strategy<Value = Partition> {
        (1.0f64..5000.0, prop::array::uniform5(0.0f64..1.0)).prop_map(|(rc, mut u)| {
            u.sort_by(|a, b| a.partial_cmp(b).unwrap());
            Partition::new(u.map(|x| x * rc), rc).unwrap()
        })
    }

    proptest! {
        #[test]
        fn areas_sum_to_disk(p in arb_partition()) {
            let total: f64 = zone_areas(&p).iter().sum();
            let disk = PI * p.cell_radius() * p.cell_radius();
            prop_assert!(((total - disk) / disk).abs() < 1e-9);
            prop_assert!(zone_areas(&p).iter().all(|&a| a >= 0.0));
        }

        #[test]
        fn channel_inversion_is_exact(p in arb_partition(), u in 0.0f64..=1.0, s in 0usize..6) {
            let cfg = NetworkConfig { cell_radius_m: p.cell_radius(), ..NetworkConfig::default() };
            let policy = PowerPolicy::max_power(&p, &cfg);
            let sf = SpreadingFactor::from_index(s);
            let d = p.inner(sf) + u * (p.outer(sf) - p.inner(sf));
            let tx = transmit_power(sf, d, &p, &policy, &cfg).unwrap();
            prop_assert!(tx <= cfg.max_power_w * (1.0 + 1e-12));
            let rx = tx * mean_path_gain(d, &cfg);
            prop_assert!(((rx - policy.received_power(sf)) / policy.received_power(sf)).abs() < 1e-12);
        }

        #[test]
        fn transmit_power_monotone_in_distance(p in arb_partition(), a in 0.0f64..=1.0, b in 0.0f64..=1.0, s in 0usize..6) {
            let cfg = NetworkConfig { cell_radius_m: p.cell_radius(), ..NetworkConfig::default() };
            let policy = PowerPolicy::max_power(&p, &cfg);
            let sf = SpreadingFactor::from_index(s);
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let w = p.outer(sf) - p.inner(sf);
            let p_lo = transmit_power(sf, p.inner(sf) + lo * w, &p, &policy, &cfg).unwrap();
            let p_hi = transmit_power(sf, p.inner(sf) + hi * w, &p, &policy, &cfg).unwrap();
            prop_assert!(p_lo <= p_hi);
        }

        #[test]
        fn access_rate_round_trip(duty in 0.0f64..0.999, s in 0usize..6) {
            let table = SfTable::default();
            let p = table.get(SpreadingFactor::from_index(s));
            let rho = channel_access_rate(duty, p).unwrap();
            let t = p.packet_duration();
            prop_assert!((rho * t / (1.0 + rho * t) - duty).abs() < 1e-12);
        }

        #[test]
        fn gain_strictly_decreasing(d in 0.0f64..1e4, step in 1e-3f64..100.0) {
            let cfg = NetworkConfig::default();
            prop_assert!(mean_path_gain(d + step, &cfg) < mean_path_gain(d, &cfg));
        }

        #[test]
        fn max_range_decreases_with_threshold(db in -25.0f64..-5.0, delta in 0.01f64..3.0) {
            let cfg = NetworkConfig::default();
            let mut p = *SfTable::default().get(SpreadingFactor::from_index(0));
            p.snr_threshold = db_to_linear(db);
            let lower = max_range(&p, &cfg).unwrap();
            p.snr_threshold = db_to_linear(db + delta);
            prop_assert!(max_range(&p, &cfg).unwrap() < lower);
        }
    }

    #[test]
    fn rates_and_durations_are_monotone() {
        let table = SfTable::default();
        let rates: Vec<f64> = table.iter().map(SfParams::bit_rate).collect();
        let durs: Vec<f64> = table.iter().map(SfParams::packet_duration).collect();
        assert!(rates.windows(2).all(|w| w[1] < w[0]));
        assert!(durs.windows(2).all(|w| w[1] > w[0]));
    }
}
