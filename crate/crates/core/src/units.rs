//! dB / dBm conversions. Everything past config loading is linear SI.

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(w: f64) -> f64 {
    linear_to_db(w) + 30.0
}

/// Densities are configured per km² and stored per m².
pub fn per_km2_to_per_m2(x: f64) -> f64 {
    x * 1e-6
}

pub fn per_m2_to_per_km2(x: f64) -> f64 {
    x * 1e6
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_points() {
        assert!((dbm_to_watts(14.0) - 0.025_118_864_315_095_8).abs() < 1e-15);
        assert!((dbm_to_watts(-117.0) - 1.995_262_314_968_88e-15).abs() < 1e-27);
        assert!((db_to_linear(6.0) - 3.981_071_705_534_972).abs() < 1e-12);
        assert!((watts_to_dbm(dbm_to_watts(-3.25)) + 3.25).abs() < 1e-12);
    }
}
