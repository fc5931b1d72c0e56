//! dB / linear conversions. Everything inside the crate is linear SI; these
//! are only used at the I/O boundary.

use crate::error::ModelError;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(ratio: f64) -> Result<f64, ModelError> {
    if ratio > 0.0 && ratio.is_finite() {
        Ok(10.0 * ratio.log10())
    } else {
        Err(ModelError::Domain(format!(
            "linear_to_db needs a positive finite ratio, got {ratio}"
        )))
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    db_to_linear(dbm - 30.0)
}

pub fn watts_to_dbm(watts: f64) -> Result<f64, ModelError> {
    Ok(linear_to_db(watts)? + 30.0)
}
