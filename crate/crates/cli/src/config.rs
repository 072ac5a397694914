//! Scenario files.
//!
//! ```toml
//! [network]
//! gateway_height_m = 25
//! cell_radius_m = 1000
//! active_density_per_km2 = 700
//! max_power_dbm = 14
//! noise_dbm = -117
//!
//! [sf]
//! payload_bytes = 25
//! sir_threshold_db = 6
//! snr_threshold_db_sf12 = -20
//!
//! [sf.sf9]
//! bandwidth_hz = 250e3
//!
//! [run]
//! trials = 100000
//! seed = 7
//! duty = "fixed:0.005"
//! ```
//!
//! Quantities with a conventional logarithmic form accept either spelling
//! (`max_power_dbm` or `max_power_w`), never both.

use std::fmt;
use std::path::{Path, PathBuf};

use lora_maxmin::units::{db_to_linear, dbm_to_watts, per_km2_to_per_m2};
use lora_maxmin::{NetworkConfig, SfTable, SpreadingFactor, NUM_SF};
use serde::Deserialize;
use toml::Spanned;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub path: PathBuf,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.path.display(), line, self.message),
            None => write!(f, "{}: {}", self.path.display(), self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

type Value = Option<Spanned<f64>>;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    network: RawNetwork,
    #[serde(default)]
    sf: RawSf,
    #[serde(default)]
    run: RawRun,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNetwork {
    gateway_height_m: Value,
    cell_radius_m: Value,
    active_density_per_m2: Value,
    active_density_per_km2: Value,
    all_density_per_m2: Value,
    all_density_per_km2: Value,
    pathloss_exponent: Value,
    carrier_hz: Value,
    lightspeed_m_s: Value,
    noise_w: Value,
    noise_dbm: Value,
    fading_rate: Value,
    max_power_w: Value,
    max_power_dbm: Value,
    max_duty: Value,
    ib_tolerance_bps: Value,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSfCommon {
    bandwidth_hz: Value,
    code_rate: Value,
    payload_bits: Value,
    payload_bytes: Value,
    snr_threshold: Value,
    snr_threshold_db: Value,
    sir_threshold: Value,
    sir_threshold_db: Value,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSf {
    bandwidth_hz: Value,
    code_rate: Value,
    payload_bits: Value,
    payload_bytes: Value,
    sir_threshold: Value,
    sir_threshold_db: Value,
    snr_threshold_db_sf7: Value,
    snr_threshold_db_sf8: Value,
    snr_threshold_db_sf9: Value,
    snr_threshold_db_sf10: Value,
    snr_threshold_db_sf11: Value,
    snr_threshold_db_sf12: Value,
    snr_threshold_sf7: Value,
    snr_threshold_sf8: Value,
    snr_threshold_sf9: Value,
    snr_threshold_sf10: Value,
    snr_threshold_sf11: Value,
    snr_threshold_sf12: Value,
    sf7: Option<RawSfCommon>,
    sf8: Option<RawSfCommon>,
    sf9: Option<RawSfCommon>,
    sf10: Option<RawSfCommon>,
    sf11: Option<RawSfCommon>,
    sf12: Option<RawSfCommon>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRun {
    trials: Option<Spanned<u64>>,
    seed: Option<u64>,
    duty: Option<Spanned<String>>,
    partition: Option<Spanned<String>>,
    scheme: Option<Spanned<u8>>,
    bin_width_m: Value,
    out: Option<String>,
    ib_max_iterations: Option<usize>,
}

/// Run parameters from the `[run]` section. Command-line flags win.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunSection {
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub duty: Option<String>,
    pub partition: Option<String>,
    pub scheme: Option<u8>,
    pub bin_width_m: Option<f64>,
    pub out: Option<PathBuf>,
    pub ib_max_iterations: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Scenario {
    pub network: NetworkConfig,
    pub table: SfTable,
    pub run: RunSection,
}

struct Ctx<'a> {
    path: &'a Path,
    text: &'a str,
}

impl Ctx<'_> {
    fn line_of(&self, offset: usize) -> usize {
        self.text[..offset.min(self.text.len())]
            .matches('\n')
            .count()
            + 1
    }

    fn err_at(&self, offset: Option<usize>, message: impl Into<String>) -> ConfigError {
        ConfigError {
            path: self.path.to_path_buf(),
            line: offset.map(|o| self.line_of(o)),
            message: message.into(),
        }
    }

    fn check(
        &self,
        name: &str,
        v: &Spanned<f64>,
        ok: impl Fn(f64) -> bool,
        want: &str,
    ) -> Result<f64, ConfigError> {
        let x = *v.get_ref();
        if x.is_finite() && ok(x) {
            Ok(x)
        } else {
            Err(self.err_at(
                Some(v.span().start),
                format!("{name} must be {want}, got {x}"),
            ))
        }
    }

    fn positive(&self, name: &str, v: &Value) -> Result<Option<f64>, ConfigError> {
        v.as_ref()
            .map(|v| self.check(name, v, |x| x > 0.0, "positive"))
            .transpose()
    }

    /// One of a linear key and its alternative spelling, converted by `conv`.
    fn either(
        &self,
        (lin_name, lin): (&str, &Value),
        (alt_name, alt): (&str, &Value),
        conv: impl Fn(f64) -> f64,
    ) -> Result<Option<f64>, ConfigError> {
        match (lin, alt) {
            (Some(_), Some(b)) => Err(self.err_at(
                Some(b.span().start),
                format!("{lin_name} and {alt_name} both given"),
            )),
            (Some(_), None) => self.positive(lin_name, lin),
            (None, Some(b)) => Ok(Some(conv(self.check(alt_name, b, |_| true, "finite")?))),
            (None, None) => Ok(None),
        }
    }
}

fn bytes_to_bits(b: f64) -> f64 {
    8.0 * b
}

pub fn load(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        path: path.to_path_buf(),
        line: None,
        message: e.to_string(),
    })?;
    parse(&text, path)
}

pub fn parse(text: &str, path: &Path) -> Result<Scenario, ConfigError> {
    let ctx = Ctx { path, text };
    let raw: RawFile = toml::from_str(text).map_err(|e| {
        let offset = e.span().map(|s| s.start);
        ctx.err_at(offset, e.message().trim().to_string())
    })?;
    let network = network(&ctx, &raw.network)?;
    let table = table(&ctx, &raw.sf)?;
    let run = run(&ctx, &raw.run)?;
    network
        .validate()
        .map_err(|e| ctx.err_at(None, e.to_string()))?;
    Ok(Scenario {
        network,
        table,
        run,
    })
}

fn network(ctx: &Ctx, raw: &RawNetwork) -> Result<NetworkConfig, ConfigError> {
    let mut cfg = NetworkConfig::default();
    let set = |slot: &mut f64, v: Option<f64>| {
        if let Some(v) = v {
            *slot = v;
        }
    };
    set(
        &mut cfg.gateway_height_m,
        ctx.positive("gateway_height_m", &raw.gateway_height_m)?,
    );
    set(
        &mut cfg.cell_radius_m,
        ctx.positive("cell_radius_m", &raw.cell_radius_m)?,
    );
    set(
        &mut cfg.carrier_hz,
        ctx.positive("carrier_hz", &raw.carrier_hz)?,
    );
    set(
        &mut cfg.lightspeed_m_s,
        ctx.positive("lightspeed_m_s", &raw.lightspeed_m_s)?,
    );
    set(
        &mut cfg.fading_rate,
        ctx.positive("fading_rate", &raw.fading_rate)?,
    );
    set(
        &mut cfg.ib_tolerance_bps,
        ctx.positive("ib_tolerance_bps", &raw.ib_tolerance_bps)?,
    );
    if let Some(v) = &raw.pathloss_exponent {
        cfg.pathloss_exponent = ctx.check("pathloss_exponent", v, |x| x >= 2.0, "at least 2")?;
    }
    if let Some(v) = &raw.max_duty {
        cfg.max_duty = ctx.check("max_duty", v, |x| (0.0..1.0).contains(&x), "in [0, 1)")?;
    }
    set(
        &mut cfg.noise_w,
        ctx.either(
            ("noise_w", &raw.noise_w),
            ("noise_dbm", &raw.noise_dbm),
            dbm_to_watts,
        )?,
    );
    set(
        &mut cfg.max_power_w,
        ctx.either(
            ("max_power_w", &raw.max_power_w),
            ("max_power_dbm", &raw.max_power_dbm),
            dbm_to_watts,
        )?,
    );
    let active = ctx.either(
        ("active_density_per_m2", &raw.active_density_per_m2),
        ("active_density_per_km2", &raw.active_density_per_km2),
        per_km2_to_per_m2,
    )?;
    let all = ctx.either(
        ("all_density_per_m2", &raw.all_density_per_m2),
        ("all_density_per_km2", &raw.all_density_per_km2),
        per_km2_to_per_m2,
    )?;
    if let Some(a) = active {
        cfg.active_density_per_m2 = a;
        // keep the default ratio unless told otherwise
        cfg.all_density_per_m2 = 2.0 * a;
    }
    if let Some(a) = all {
        cfg.all_density_per_m2 = a;
    }
    if cfg.all_density_per_m2 < cfg.active_density_per_m2 {
        let at = raw
            .all_density_per_m2
            .as_ref()
            .or(raw.all_density_per_km2.as_ref())
            .map(|v| v.span().start);
        return Err(ctx.err_at(at, "all-UE density below active density"));
    }
    Ok(cfg)
}

struct SfValues<'a> {
    bandwidth_hz: &'a Value,
    code_rate: &'a Value,
    payload_bits: &'a Value,
    payload_bytes: &'a Value,
    sir_threshold: &'a Value,
    sir_threshold_db: &'a Value,
}

fn apply_common(ctx: &Ctx, p: &mut lora_maxmin::SfParams, v: &SfValues) -> Result<(), ConfigError> {
    if let Some(x) = ctx.positive("bandwidth_hz", v.bandwidth_hz)? {
        p.bandwidth_hz = x;
    }
    if let Some(c) = v.code_rate {
        p.code_rate = ctx.check("code_rate", c, |x| x > 0.0 && x <= 1.0, "in (0, 1]")?;
    }
    let payload = ctx.either(
        ("payload_bits", v.payload_bits),
        ("payload_bytes", v.payload_bytes),
        bytes_to_bits,
    )?;
    if let Some(x) = payload {
        if x <= 0.0 {
            let at = v.payload_bytes.as_ref().map(|s| s.span().start);
            return Err(ctx.err_at(at, format!("payload must be positive, got {x} bits")));
        }
        p.payload_bits = x;
    }
    if let Some(x) = ctx.either(
        ("sir_threshold", v.sir_threshold),
        ("sir_threshold_db", v.sir_threshold_db),
        db_to_linear,
    )? {
        p.sir_threshold = x;
    }
    Ok(())
}

fn table(ctx: &Ctx, raw: &RawSf) -> Result<SfTable, ConfigError> {
    let mut table = SfTable::default();
    let snr_db = [
        &raw.snr_threshold_db_sf7,
        &raw.snr_threshold_db_sf8,
        &raw.snr_threshold_db_sf9,
        &raw.snr_threshold_db_sf10,
        &raw.snr_threshold_db_sf11,
        &raw.snr_threshold_db_sf12,
    ];
    let snr_lin = [
        &raw.snr_threshold_sf7,
        &raw.snr_threshold_sf8,
        &raw.snr_threshold_sf9,
        &raw.snr_threshold_sf10,
        &raw.snr_threshold_sf11,
        &raw.snr_threshold_sf12,
    ];
    let overrides = [
        &raw.sf7, &raw.sf8, &raw.sf9, &raw.sf10, &raw.sf11, &raw.sf12,
    ];
    let common = SfValues {
        bandwidth_hz: &raw.bandwidth_hz,
        code_rate: &raw.code_rate,
        payload_bits: &raw.payload_bits,
        payload_bytes: &raw.payload_bytes,
        sir_threshold: &raw.sir_threshold,
        sir_threshold_db: &raw.sir_threshold_db,
    };
    for i in 0..NUM_SF {
        let sf = SpreadingFactor::from_index(i);
        let p = table.get_mut(sf);
        apply_common(ctx, p, &common)?;
        let lin_name = format!("snr_threshold_{}", sf.to_string().to_lowercase());
        let db_name = format!("snr_threshold_db_{}", sf.to_string().to_lowercase());
        let mut snr = ctx.either((&lin_name, snr_lin[i]), (&db_name, snr_db[i]), db_to_linear)?;
        if let Some(o) = overrides[i] {
            apply_common(
                ctx,
                p,
                &SfValues {
                    bandwidth_hz: &o.bandwidth_hz,
                    code_rate: &o.code_rate,
                    payload_bits: &o.payload_bits,
                    payload_bytes: &o.payload_bytes,
                    sir_threshold: &o.sir_threshold,
                    sir_threshold_db: &o.sir_threshold_db,
                },
            )?;
            let inner = ctx.either(
                ("snr_threshold", &o.snr_threshold),
                ("snr_threshold_db", &o.snr_threshold_db),
                db_to_linear,
            )?;
            if let Some(x) = inner {
                if snr.is_some() {
                    let at = o
                        .snr_threshold
                        .as_ref()
                        .or(o.snr_threshold_db.as_ref())
                        .map(|v| v.span().start);
                    return Err(ctx.err_at(at, format!("SNR threshold of {sf} given twice")));
                }
                snr = Some(x);
            }
        }
        if let Some(x) = snr {
            p.snr_threshold = x;
        }
    }
    let params = std::array::from_fn(|i| *table.get(SpreadingFactor::from_index(i)));
    SfTable::new(params).map_err(|e| ctx.err_at(None, e.to_string()))
}

fn run(ctx: &Ctx, raw: &RawRun) -> Result<RunSection, ConfigError> {
    if let Some(t) = &raw.trials {
        if *t.get_ref() == 0 {
            return Err(ctx.err_at(Some(t.span().start), "trials must be at least 1"));
        }
    }
    if let Some(s) = &raw.scheme {
        if !matches!(s.get_ref(), 1 | 2) {
            return Err(ctx.err_at(
                Some(s.span().start),
                format!("unknown scheme {}", s.get_ref()),
            ));
        }
    }
    Ok(RunSection {
        trials: raw.trials.as_ref().map(|t| *t.get_ref()),
        seed: raw.seed,
        duty: raw.duty.as_ref().map(|d| d.get_ref().clone()),
        partition: raw.partition.as_ref().map(|p| p.get_ref().clone()),
        scheme: raw.scheme.as_ref().map(|s| *s.get_ref()),
        bin_width_m: ctx.positive("bin_width_m", &raw.bin_width_m)?,
        out: raw.out.as_ref().map(PathBuf::from),
        ib_max_iterations: raw.ib_max_iterations,
    })
}
