//! Fiber wiretap channel: a beam splitter of transmissivity `η = 10^{-κd/10}`
//! whose second port carries either vacuum (pure loss) or one arm of Eve's
//! two-mode squeezed vacuum (thermal loss with excess noise `ε`).
//!
//! All quantities are in shot-noise units (vacuum quadrature variance 1).

use crate::error::{domain, Error, Result};

/// Attenuation of standard fiber, dB/km.
pub const DEFAULT_KAPPA_DB_PER_KM: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    distance_km: f64,
    kappa_db_per_km: f64,
    epsilon: f64,
}

impl ChannelParams {
    pub fn from_distance(distance_km: f64, kappa_db_per_km: f64, epsilon: f64) -> Result<Self> {
        if !(distance_km >= 0.0) || !distance_km.is_finite() {
            return domain(format!("distance must be nonnegative, got {distance_km}"));
        }
        if !(kappa_db_per_km > 0.0) || !kappa_db_per_km.is_finite() {
            return domain(format!("loss rate must be positive, got {kappa_db_per_km}"));
        }
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return domain(format!("excess noise must be nonnegative, got {epsilon}"));
        }
        if distance_km == 0.0 && epsilon > 0.0 {
            return Err(Error::Singularity(
                "excess noise needs eta < 1 (distance 0 given)".into(),
            ));
        }
        Ok(Self {
            distance_km,
            kappa_db_per_km,
            epsilon,
        })
    }

    /// Pure-loss channel at the default fiber attenuation.
    pub fn pure_loss(distance_km: f64) -> Result<Self> {
        Self::from_distance(distance_km, DEFAULT_KAPPA_DB_PER_KM, 0.0)
    }

    /// Channel with the given transmissivity, expressed as the equivalent
    /// fiber length at the default attenuation.
    pub fn from_transmissivity(eta: f64, epsilon: f64) -> Result<Self> {
        if !(eta > 0.0 && eta <= 1.0) {
            return domain(format!("transmissivity must lie in (0, 1], got {eta}"));
        }
        let d = -10.0 * eta.log10() / DEFAULT_KAPPA_DB_PER_KM;
        Self::from_distance(d.max(0.0), DEFAULT_KAPPA_DB_PER_KM, epsilon)
    }

    pub fn with_distance(&self, distance_km: f64) -> Result<Self> {
        Self::from_distance(distance_km, self.kappa_db_per_km, self.epsilon)
    }

    pub fn distance_km(&self) -> f64 {
        self.distance_km
    }

    pub fn kappa_db_per_km(&self) -> f64 {
        self.kappa_db_per_km
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn eta(&self) -> f64 {
        10f64.powf(-0.1 * self.kappa_db_per_km * self.distance_km)
    }

    pub fn is_pure_loss(&self) -> bool {
        self.epsilon == 0.0
    }

    /// Mean photon number of the thermal state Eve injects.
    pub fn nbar_eps(&self) -> f64 {
        let eta = self.eta();
        if self.epsilon == 0.0 {
            0.0
        } else {
            eta * self.epsilon / (2.0 * (1.0 - eta))
        }
    }

    /// Quadrature variance of Eve's injected thermal mode, `1 + 2 n̄_ε`.
    pub fn v_eps(&self) -> f64 {
        1.0 + 2.0 * self.nbar_eps()
    }

    /// Bob's conditional homodyne variance, `1 + η ε`.
    pub fn sigma_eps_sq(&self) -> f64 {
        1.0 + self.eta() * self.epsilon
    }
}
