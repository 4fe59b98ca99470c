use crate::error::{Error, Result};

/// Model constants of the fluid-particle system.
///
/// The pressure law is `p(rho) = a rho^gamma + delta rho^6`; `delta = 0`
/// recovers the physical law and `delta > 0` is the artificial-pressure
/// regularization used during continuation runs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysParams {
    pub a: f64,
    pub gamma: f64,
    pub mu: f64,
    pub lambda: f64,
    pub beta: f64,
    pub delta: f64,
    pub h: f64,
}

impl PhysParams {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, bool, &str); 7] = [
            ("a", self.a > 0.0, "a > 0"),
            ("gamma", self.gamma > 1.0, "gamma > 1"),
            ("mu", self.mu > 0.0, "mu > 0"),
            (
                "lambda",
                self.lambda + 2.0 / 3.0 * self.mu >= 0.0,
                "lambda + (2/3) mu >= 0",
            ),
            ("beta", self.beta != 0.0, "beta != 0"),
            ("delta", self.delta >= 0.0, "delta >= 0"),
            ("h", self.h > 0.0, "h > 0"),
        ];
        for (name, ok, rule) in checks {
            let v = self.get(name);
            if !ok || !v.is_finite() {
                return Err(Error::Domain(format!("{name} = {v} violates {rule}")));
            }
        }
        Ok(())
    }

    fn get(&self, name: &str) -> f64 {
        match name {
            "a" => self.a,
            "gamma" => self.gamma,
            "mu" => self.mu,
            "lambda" => self.lambda,
            "beta" => self.beta,
            "delta" => self.delta,
            _ => self.h,
        }
    }

    pub fn with_delta(self, delta: f64) -> Self {
        PhysParams { delta, ..self }
    }

    pub fn with_h(self, h: f64) -> Self {
        PhysParams { h, ..self }
    }

    /// `a rho^gamma + delta rho^6`. Negative densities are a domain error.
    pub fn pressure(&self, rho: f64) -> Result<f64> {
        if rho < 0.0 || rho.is_nan() {
            return Err(Error::Domain(format!("pressure of negative density {rho}")));
        }
        Ok(self.pressure_unchecked(rho))
    }

    pub(crate) fn pressure_unchecked(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        self.a * rho.powf(self.gamma) + self.delta * rho.powi(6)
    }

    /// Pressure potential `a/(gamma-1) rho^gamma + delta/5 rho^6`, whose
    /// integral is the internal part of the total energy.
    pub fn pressure_potential(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        self.a / (self.gamma - 1.0) * rho.powf(self.gamma) + self.delta / 5.0 * rho.powi(6)
    }

    /// Enthalpy, the derivative of [`Self::pressure_potential`]. Satisfies
    /// `rho * d(enthalpy) = d(pressure)`.
    pub fn enthalpy(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        self.a * self.gamma / (self.gamma - 1.0) * rho.powf(self.gamma - 1.0)
            + 1.2 * self.delta * rho.powi(5)
    }

    /// `dp/drho`, the squared sound speed.
    pub fn sound_speed_sq(&self, rho: f64) -> f64 {
        if rho <= 0.0 {
            return 0.0;
        }
        self.a * self.gamma * rho.powf(self.gamma - 1.0) + 6.0 * self.delta * rho.powi(5)
    }

    /// Exponent gain of the higher-integrability estimate,
    /// `min(2 gamma / 3 - 1, 1/4)`.
    pub fn theta(&self) -> f64 {
        theta(self.gamma)
    }
}

pub fn theta(gamma: f64) -> f64 {
    (2.0 * gamma / 3.0 - 1.0).min(0.25)
}
