use crate::error::{Error, Result};

/// Attenuation of standard telecom fibre.
pub const FIBRE_LOSS_DB_PER_KM: f64 = 0.2;

/// `eta = 10^(-loss * L / 10)`.
pub fn eta_from_distance(distance_km: f64, loss_db_per_km: f64) -> Result<f64> {
    if !(distance_km >= 0.0 && distance_km.is_finite()) {
        return Err(Error::InvalidParameter {
            key: "distance_km",
            value: distance_km,
            reason: "must be finite and non-negative",
        });
    }
    check_loss(loss_db_per_km)?;
    Ok(10f64.powf(-loss_db_per_km * distance_km / 10.0))
}

pub fn distance_from_eta(eta: f64, loss_db_per_km: f64) -> Result<f64> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(Error::InvalidParameter {
            key: "eta",
            value: eta,
            reason: "must lie in (0, 1]",
        });
    }
    check_loss(loss_db_per_km)?;
    Ok((-10.0 * eta.log10() / loss_db_per_km).max(0.0))
}

fn check_loss(loss_db_per_km: f64) -> Result<()> {
    if !(loss_db_per_km > 0.0 && loss_db_per_km.is_finite()) {
        return Err(Error::InvalidParameter {
            key: "loss_db_per_km",
            value: loss_db_per_km,
            reason: "must be positive",
        });
    }
    Ok(())
}
