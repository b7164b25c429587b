//! Minimum prediction horizon for emergency braking.
//!
//! Braking with constant friction deceleration `μg` from speed `v0` takes
//! `v0 / (μ g)` seconds; the vehicle mass cancels.

use crate::error::{Error, Result};

pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BrakingQuery {
    /// Initial speed, m/s.
    pub v0: f64,
    /// Tyre-road friction coefficient.
    pub mu: f64,
    /// Gravitational acceleration, m/s².
    pub g: f64,
}

impl BrakingQuery {
    pub fn new(v0: f64, mu: f64) -> Self {
        BrakingQuery {
            v0,
            mu,
            g: STANDARD_GRAVITY,
        }
    }

    pub fn from_kmh(speed_kmh: f64, mu: f64) -> Self {
        Self::new(speed_kmh / 3.6, mu)
    }
}

/// Seconds needed to brake to a standstill.
pub fn min_horizon(q: &BrakingQuery) -> Result<f64> {
    if !(q.v0 >= 0.0 && q.v0.is_finite()) {
        return Err(Error::invalid(format!(
            "initial speed must be finite and >= 0, got {}",
            q.v0
        )));
    }
    if !(q.mu > 0.0) {
        return Err(Error::invalid(format!(
            "friction coefficient must be > 0, got {}",
            q.mu
        )));
    }
    if !(q.g > 0.0) {
        return Err(Error::invalid(format!("gravity must be > 0, got {}", q.g)));
    }
    Ok(q.v0 / (q.mu * q.g))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn city_speeds() {
        let h = |kmh, mu| min_horizon(&BrakingQuery::from_kmh(kmh, mu)).unwrap();
        assert!((h(30.0, 0.8) - 1.06).abs() <= 0.01);
        assert!((h(50.0, 0.8) - 1.77).abs() <= 0.01);
        assert!((h(30.0, 0.5) - 1.70).abs() <= 0.01);
        assert!((h(50.0, 0.5) - 2.83).abs() <= 0.01);
        assert_eq!(h(0.0, 0.5), 0.0);
    }

    #[test]
    fn scaling_laws() {
        let base = min_horizon(&BrakingQuery::new(7.0, 0.4)).unwrap();
        assert_eq!(min_horizon(&BrakingQuery::new(14.0, 0.4)).unwrap(), 2.0 * base);
        assert_eq!(min_horizon(&BrakingQuery::new(7.0, 0.8)).unwrap(), base / 2.0);
    }

    #[test]
    fn invalid_inputs() {
        assert!(min_horizon(&BrakingQuery::new(10.0, 0.0)).is_err());
        assert!(min_horizon(&BrakingQuery {
            v0: 10.0,
            mu: 0.5,
            g: -1.0
        })
        .is_err());
        assert!(min_horizon(&BrakingQuery::new(-1.0, 0.5)).is_err());
    }
}
