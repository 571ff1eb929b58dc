//! Physical constants and dB conversions. dB only appears at the edges;
//! everything inside the crate is SI.

/// Planck constant, J·s.
pub const PLANCK: f64 = 6.626_070_15e-34;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub const GHZ: f64 = 1e9;
pub const MHZ: f64 = 1e6;

#[inline]
pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[inline]
pub fn lin_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

#[inline]
pub fn dbm_to_watt(dbm: f64) -> f64 {
    1e-3 * db_to_lin(dbm)
}

#[inline]
pub fn watt_to_dbm(w: f64) -> f64 {
    lin_to_db(w / 1e-3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dbm_round_trip() {
        assert!((dbm_to_watt(0.0) - 1e-3).abs() < 1e-18);
        assert!((dbm_to_watt(30.0) - 1.0).abs() < 1e-12);
        assert!((watt_to_dbm(dbm_to_watt(2.0)) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_dbm_is_1p585_mw() {
        // 10^(0.2) = 1.584893...
        assert!((dbm_to_watt(2.0) - 1.584_893_192_461_113_5e-3).abs() < 1e-15);
    }
}
