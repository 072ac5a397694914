//! Monte-Carlo evaluation of the exact joint SNR/SIR success event.
//!
//! Each trial draws from its own ChaCha8 stream selected by `(seed, trial)`,
//! and trials are reduced in fixed-size chunks whose partial sums are
//! combined in index order. Estimates are therefore bit-identical for any
//! rayon thread count.

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Exp, Poisson};
use rayon::prelude::*;

use crate::analytic::ZoneScenario;
use crate::model::{
    DutyPlan, NetworkConfig, Partition, PathGain, PowerMode, PowerPolicy, SfTable, SpreadingFactor,
    NUM_SF,
};

/// Trials per reduction chunk. Part of the determinism contract: changing
/// it changes the floating-point summation order.
const CHUNK: u64 = 1024;

/// Fraction of the reference packet `[0, T)` covered by a packet of the
/// same duration starting at `start`: `max(T − |t|, 0) / T`.
pub fn overlap_fraction(start: f64, duration: f64) -> f64 {
    (duration - start.abs()).max(0.0) / duration
}

/// One co-SF packet of the space-time Poisson rain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacketEvent {
    /// Start time relative to the reference packet (s).
    pub start_s: f64,
    pub distance_m: f64,
    pub fading: f64,
    pub tx_power_w: f64,
}

/// How an event's transmit power maps to mean received power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReceivedPower {
    /// Channel inversion: every interferer arrives at Q̄_s.
    Equalized(f64),
    /// Received power is `P_k ḡ(d_k)`.
    PathLoss(PathGain),
}

impl ReceivedPower {
    pub fn for_zone(zone: &ZoneScenario) -> Self {
        match zone.power_mode {
            PowerMode::ChannelInversion => ReceivedPower::Equalized(zone.received_power_w),
            PowerMode::Fixed { .. } => ReceivedPower::PathLoss(zone.path_gain),
        }
    }

    fn of(&self, ev: &PacketEvent) -> f64 {
        match *self {
            ReceivedPower::Equalized(q) => q,
            ReceivedPower::PathLoss(gain) => ev.tx_power_w * gain.mean_gain(ev.distance_m),
        }
    }
}

/// Monte-Carlo point estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
    pub seed: u64,
}

impl McEstimate {
    /// Bernoulli mean with `sqrt(p(1−p)/N)` standard error.
    pub fn bernoulli(successes: u64, trials: u64, seed: u64) -> Self {
        let p = successes as f64 / trials as f64;
        McEstimate {
            mean: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
            seed,
        }
    }

    fn from_moments(m: Moments, seed: u64) -> Self {
        McEstimate {
            mean: m.mean(),
            std_error: m.std_error(),
            trials: m.n,
            seed,
        }
    }

    /// Whether `value` lies within `k` standard errors of the estimate.
    pub fn covers(&self, value: f64, k: f64) -> bool {
        (self.mean - value).abs() <= k * self.std_error
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    fn std_error(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        (var / n).sqrt()
    }
}

/// Independent RNG for trial `stream` of a run seeded with `seed`.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Runs `trials` trials in chunks and folds the per-chunk accumulators in
/// chunk order.
fn run_chunked<A, F>(trials: u64, seed: u64, init: impl Fn() -> A + Sync, trial: F) -> A
where
    A: Send + Merge,
    F: Fn(&mut ChaCha8Rng, &mut A) + Sync,
{
    let chunks = trials.div_ceil(CHUNK);
    let partials: Vec<A> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = init();
            let end = ((c + 1) * CHUNK).min(trials);
            for t in c * CHUNK..end {
                let mut rng = trial_rng(seed, t);
                trial(&mut rng, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = init();
    for p in &partials {
        total.merge_from(p);
    }
    total
}

trait Merge {
    fn merge_from(&mut self, other: &Self);
}

impl Merge for Moments {
    fn merge_from(&mut self, other: &Self) {
        self.merge(other);
    }
}

impl Merge for u64 {
    fn merge_from(&mut self, other: &Self) {
        *self += *other;
    }
}

fn uniform_in_ring<R: Rng + ?Sized>(rng: &mut R, inner: f64, outer: f64) -> f64 {
    let u: f64 = rng.random();
    (inner * inner + u * (outer * outer - inner * inner)).sqrt()
}

fn tx_power_for(zone: &ZoneScenario, distance: f64) -> f64 {
    match zone.power_mode {
        PowerMode::ChannelInversion => zone.received_power_w / zone.path_gain.mean_gain(distance),
        PowerMode::Fixed { tx_power_w } => tx_power_w,
    }
}

/// Draws the co-SF packets that can overlap a reference packet sent over
/// `[0, T_s)`: starts on `(−T_s, T_s)`, positions uniform over the ring,
/// Exp(μ) fading marks.
fn for_each_rain_event<R: Rng + ?Sized>(
    zone: &ZoneScenario,
    rng: &mut R,
    mut f: impl FnMut(PacketEvent),
) {
    let mean = zone.mean_overlapping();
    if mean.is_nan() || mean <= 0.0 {
        return;
    }
    let count = Poisson::new(mean).expect("positive mean").sample(rng) as u64;
    let fading = Exp::new(zone.fading_rate).expect("positive fading rate");
    let t = zone.packet_duration;
    for _ in 0..count {
        let start_s = rng.random_range(-t..t);
        let distance_m = uniform_in_ring(rng, zone.inner_radius_m, zone.outer_radius_m);
        let fading = fading.sample(rng);
        f(PacketEvent {
            start_s,
            distance_m,
            fading,
            tx_power_w: tx_power_for(zone, distance_m),
        });
    }
}

pub fn sample_poisson_rain_with<R: Rng + ?Sized>(
    zone: &ZoneScenario,
    rng: &mut R,
) -> Vec<PacketEvent> {
    let mut events = Vec::new();
    for_each_rain_event(zone, rng, |ev| events.push(ev));
    events
}

/// One realisation of the Poisson rain around a reference packet.
pub fn sample_poisson_rain(zone: &ZoneScenario, seed: u64) -> Vec<PacketEvent> {
    sample_poisson_rain_with(zone, &mut trial_rng(seed, 0))
}

/// Interference averaged over the reference packet,
/// `Σ_k (received power)_k ζ_k h(t_k)`.
pub fn average_interference(
    events: &[PacketEvent],
    packet_duration: f64,
    power: ReceivedPower,
) -> f64 {
    events
        .iter()
        .map(|ev| power.of(ev) * ev.fading * overlap_fraction(ev.start_s, packet_duration))
        .sum()
}

fn sampled_interference<R: Rng + ?Sized>(zone: &ZoneScenario, rng: &mut R) -> f64 {
    let power = ReceivedPower::for_zone(zone);
    let mut total = 0.0;
    for_each_rain_event(zone, rng, |ev| {
        total += power.of(&ev) * ev.fading * overlap_fraction(ev.start_s, zone.packet_duration);
    });
    total
}

fn reference_mean_power(zone: &ZoneScenario, distance: f64) -> f64 {
    match zone.power_mode {
        PowerMode::ChannelInversion => zone.received_power_w,
        PowerMode::Fixed { tx_power_w } => tx_power_w * zone.path_gain.mean_gain(distance),
    }
}

/// The exact success event: SNR ≥ η̄ and SIR ≥ γ̄ on the same fading draw.
fn joint_success(signal: f64, interference: f64, zone: &ZoneScenario) -> bool {
    signal >= zone.snr_threshold * zone.noise_w && signal >= zone.sir_threshold * interference
}

/// Monte-Carlo success probability of a reference packet sent from
/// `ref_distance_m` in the zone.
pub fn estimate_success_prob(
    zone: &ZoneScenario,
    ref_distance_m: f64,
    trials: u64,
    seed: u64,
) -> McEstimate {
    assert!(trials >= 1, "at least one trial");
    let fading = Exp::new(zone.fading_rate).expect("positive fading rate");
    let mean_power = reference_mean_power(zone, ref_distance_m);
    let successes = run_chunked(
        trials,
        seed,
        || 0u64,
        |rng, acc| {
            let signal = mean_power * fading.sample(rng);
            let interference = sampled_interference(zone, rng);
            if joint_success(signal, interference, zone) {
                *acc += 1;
            }
        },
    );
    McEstimate::bernoulli(successes, trials, seed)
}

/// Sample mean of `exp(−z Ī_s)`.
pub fn estimate_laplace(z: f64, zone: &ZoneScenario, trials: u64, seed: u64) -> McEstimate {
    assert!(trials >= 1, "at least one trial");
    let m = run_chunked(trials, seed, Moments::default, |rng, acc| {
        acc.push((-z * sampled_interference(zone, rng)).exp());
    });
    McEstimate::from_moments(m, seed)
}

/// Transmit power rule for a whole cell.
#[derive(Debug, Clone, PartialEq)]
pub enum PowerControl {
    ChannelInversion(PowerPolicy),
    Fixed { tx_power_w: f64 },
}

/// A whole cell: partition, duty plan, power rule and profile binning.
#[derive(Debug, Clone, PartialEq)]
pub struct FullScenario {
    pub cfg: NetworkConfig,
    pub table: SfTable,
    pub partition: Partition,
    pub duties: DutyPlan,
    pub power: PowerControl,
    pub bin_width_m: f64,
}

impl FullScenario {
    /// Zone `sf` as a [`ZoneScenario`]. Under fixed power, `received_power_w`
    /// is the zone-edge mean received power.
    pub fn zone(&self, sf: SpreadingFactor) -> ZoneScenario {
        let p = self.table.get(sf);
        let gain = self.cfg.path_gain();
        let outer = self.partition.outer(sf);
        let (received_power_w, power_mode) = match &self.power {
            PowerControl::ChannelInversion(policy) => {
                (policy.received_power(sf), PowerMode::ChannelInversion)
            }
            PowerControl::Fixed { tx_power_w } => (
                tx_power_w * gain.mean_gain(outer),
                PowerMode::Fixed {
                    tx_power_w: *tx_power_w,
                },
            ),
        };
        ZoneScenario {
            sf,
            inner_radius_m: self.partition.inner(sf),
            outer_radius_m: outer,
            received_power_w,
            duty: self.duties.duty(sf),
            density_per_m2: self.cfg.active_density_per_m2,
            noise_w: self.cfg.noise_w,
            fading_rate: self.cfg.fading_rate,
            snr_threshold: p.snr_threshold,
            sir_threshold: p.sir_threshold,
            bit_rate: p.bit_rate(),
            packet_duration: p.packet_duration(),
            path_gain: gain,
            power_mode,
        }
    }

    fn bins(&self) -> Vec<(f64, f64)> {
        let rc = self.partition.cell_radius();
        let w = self.bin_width_m;
        let n = (rc / w).ceil().max(1.0) as usize;
        (0..n)
            .map(|i| (i as f64 * w, ((i + 1) as f64 * w).min(rc)))
            .filter(|(a, b)| b > a)
            .collect()
    }
}

/// Mean per-UE throughput of references placed uniformly over one annulus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BinEstimate {
    pub inner_m: f64,
    pub outer_m: f64,
    /// Zone of the bin midpoint.
    pub sf: Option<SpreadingFactor>,
    pub throughput: McEstimate,
}

/// Output of [`simulate_finite_population`].
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationProfile {
    pub bins: Vec<BinEstimate>,
    /// Zone-level success probability (reference anywhere in the zone under
    /// channel inversion, at the zone edge under fixed power). `None` for
    /// empty or silent zones.
    pub zone_success: [Option<McEstimate>; NUM_SF],
    /// Zone-level throughput R_s Δ_s p̂ (bps).
    pub zone_throughput: [f64; NUM_SF],
    /// Spatial throughput in bps/m².
    pub spatial_throughput: McEstimate,
}

#[derive(Debug, Clone, Default)]
struct ProfileAcc {
    bins: Vec<Moments>,
    zone_successes: [u64; NUM_SF],
    zone_trials: [u64; NUM_SF],
    spatial: Moments,
}

impl Merge for ProfileAcc {
    fn merge_from(&mut self, other: &Self) {
        for (a, b) in self.bins.iter_mut().zip(&other.bins) {
            a.merge(b);
        }
        for i in 0..NUM_SF {
            self.zone_successes[i] += other.zone_successes[i];
            self.zone_trials[i] += other.zone_trials[i];
        }
        self.spatial.merge(&other.spatial);
    }
}

/// Interference seen in one realisation of a finite UE population.
///
/// UE locations are an HPPP of density λ_all thinned to the active density;
/// each active UE starts packets as a Poisson process of rate ρ_s. Given the
/// active count, the initiations overlapping the reference window are
/// Poisson(K_s ρ_s 2T_s) and each belongs to a uniformly chosen active UE,
/// so a UE with several packets keeps a single location.
fn finite_population_interference<R: Rng + ?Sized>(
    zone: &ZoneScenario,
    all_density: f64,
    owners: &mut Vec<(u64, f64)>,
    rng: &mut R,
) -> f64 {
    if zone.duty <= 0.0 || zone.area() <= 0.0 {
        return 0.0;
    }
    let all_mean = all_density * zone.area();
    let n_all = Poisson::new(all_mean).expect("positive mean").sample(rng) as u64;
    let keep = (zone.density_per_m2 / all_density).min(1.0);
    let n_active = if n_all == 0 {
        0
    } else {
        Binomial::new(n_all, keep)
            .expect("valid thinning")
            .sample(rng)
    };
    if n_active == 0 {
        return 0.0;
    }
    let window_mean = n_active as f64 * zone.access_rate() * 2.0 * zone.packet_duration;
    let count = Poisson::new(window_mean)
        .expect("positive mean")
        .sample(rng) as usize;
    if count == 0 {
        return 0.0;
    }
    owners.clear();
    owners.extend((0..count).map(|_| (rng.random_range(0..n_active), 0.0)));
    owners.sort_unstable_by_key(|o| o.0);
    let mut last = u64::MAX;
    let mut radius = 0.0;
    for o in owners.iter_mut() {
        if o.0 != last {
            last = o.0;
            radius = uniform_in_ring(rng, zone.inner_radius_m, zone.outer_radius_m);
        }
        o.1 = radius;
    }
    let fading = Exp::new(zone.fading_rate).expect("positive fading rate");
    let power = ReceivedPower::for_zone(zone);
    let t = zone.packet_duration;
    owners
        .iter()
        .map(|&(_, distance_m)| {
            let ev = PacketEvent {
                start_s: rng.random_range(-t..t),
                distance_m,
                fading: fading.sample(rng),
                tx_power_w: tx_power_for(zone, distance_m),
            };
            power.of(&ev) * ev.fading * overlap_fraction(ev.start_s, t)
        })
        .sum()
}

/// Finite-population Monte Carlo over the whole cell, returning the radial
/// throughput profile, zone-level estimates and the spatial throughput.
pub fn simulate_finite_population(
    scenario: &FullScenario,
    trials: u64,
    seed: u64,
) -> PopulationProfile {
    assert!(trials >= 1, "at least one trial");
    assert!(scenario.bin_width_m > 0.0, "bin width must be positive");
    let zones: [ZoneScenario; NUM_SF] =
        std::array::from_fn(|i| scenario.zone(SpreadingFactor::from_index(i)));
    let bins = scenario.bins();
    let cell_area = PI * scenario.partition.cell_radius().powi(2);
    let density = scenario.cfg.active_density_per_m2;
    let bin_weight: Vec<f64> = bins
        .iter()
        .map(|&(a, b)| density * PI * (b * b - a * a) / cell_area)
        .collect();
    let fading = Exp::new(scenario.cfg.fading_rate).expect("positive fading rate");
    let active: [bool; NUM_SF] =
        std::array::from_fn(|i| zones[i].area() > 0.0 && zones[i].duty > 0.0);

    let acc = run_chunked(
        trials,
        seed,
        || ProfileAcc {
            bins: vec![Moments::default(); bins.len()],
            ..ProfileAcc::default()
        },
        |rng, acc| {
            let mut owners = Vec::new();
            let mut interference = [0.0; NUM_SF];
            for (i, zone) in zones.iter().enumerate() {
                interference[i] = finite_population_interference(
                    zone,
                    scenario.cfg.all_density_per_m2,
                    &mut owners,
                    rng,
                );
            }
            for (i, zone) in zones.iter().enumerate() {
                if !active[i] {
                    continue;
                }
                let d = match zone.power_mode {
                    PowerMode::ChannelInversion => {
                        uniform_in_ring(rng, zone.inner_radius_m, zone.outer_radius_m)
                    }
                    PowerMode::Fixed { .. } => zone.outer_radius_m,
                };
                let signal = reference_mean_power(zone, d) * fading.sample(rng);
                acc.zone_trials[i] += 1;
                if joint_success(signal, interference[i], zone) {
                    acc.zone_successes[i] += 1;
                }
            }
            let mut spatial = 0.0;
            for (b, &(lo, hi)) in bins.iter().enumerate() {
                let d = uniform_in_ring(rng, lo, hi);
                let signal_fading = fading.sample(rng);
                let value = match scenario.partition.zone_of(d) {
                    Some(sf) if active[sf.index()] => {
                        let zone = &zones[sf.index()];
                        let signal = reference_mean_power(zone, d) * signal_fading;
                        if joint_success(signal, interference[sf.index()], zone) {
                            zone.bit_rate * zone.duty
                        } else {
                            0.0
                        }
                    }
                    _ => 0.0,
                };
                acc.bins[b].push(value);
                spatial += bin_weight[b] * value;
            }
            acc.spatial.push(spatial);
        },
    );

    let bins = bins
        .iter()
        .zip(&acc.bins)
        .map(|(&(lo, hi), m)| BinEstimate {
            inner_m: lo,
            outer_m: hi,
            sf: scenario.partition.zone_of(0.5 * (lo + hi)),
            throughput: McEstimate::from_moments(*m, seed),
        })
        .collect();
    let zone_success: [Option<McEstimate>; NUM_SF] = std::array::from_fn(|i| {
        (acc.zone_trials[i] > 0)
            .then(|| McEstimate::bernoulli(acc.zone_successes[i], acc.zone_trials[i], seed))
    });
    let zone_throughput = std::array::from_fn(|i| {
        zone_success[i].map_or(0.0, |e| zones[i].bit_rate * zones[i].duty * e.mean)
    });
    PopulationProfile {
        bins,
        zone_success,
        zone_throughput,
        spatial_throughput: McEstimate::from_moments(acc.spatial, seed),
    }
}

/// Monte-Carlo spatial throughput (bps/m²).
pub fn spatial_throughput_mc(scenario: &FullScenario, trials: u64, seed: u64) -> McEstimate {
    simulate_finite_population(scenario, trials, seed).spatial_throughput
}
