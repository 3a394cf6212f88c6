//! Boundary tension protocol: a C^2 ramp from `tau0` to `tau1` that is
//! exactly constant from `t_star` on.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Smooth tension path tau_bar(t). The ramp follows the quintic smoothstep
/// s(u) = u^3 (10 - 15 u + 6 u^2), whose first and second derivatives
/// vanish at both ends, so tau_bar' is continuous and identically zero for
/// t >= t_star.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TensionProtocol {
    pub tau0: f64,
    pub tau1: f64,
    pub t_star: f64,
}

impl TensionProtocol {
    pub fn new(tau0: f64, tau1: f64, t_star: f64) -> Result<Self> {
        if !(t_star > 0.0) || !t_star.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "t_star must be positive, got {t_star}"
            )));
        }
        if !tau0.is_finite() || !tau1.is_finite() {
            return Err(Error::InvalidParameter("tensions must be finite".into()));
        }
        Ok(TensionProtocol { tau0, tau1, t_star })
    }

    /// Constant protocol pinned at `tau`.
    pub fn constant(tau: f64) -> Self {
        TensionProtocol { tau0: tau, tau1: tau, t_star: 1.0 }
    }

    pub fn is_constant(&self) -> bool {
        self.tau0 == self.tau1
    }

    pub fn tau(&self, t: f64) -> f64 {
        if t >= self.t_star {
            return self.tau1;
        }
        let u = (t / self.t_star).clamp(0.0, 1.0);
        let s = u * u * u * (10.0 - 15.0 * u + 6.0 * u * u);
        self.tau0 + (self.tau1 - self.tau0) * s
    }

    /// d tau_bar / dt; zero for t >= t_star.
    pub fn tau_dot(&self, t: f64) -> f64 {
        if t >= self.t_star || t < 0.0 {
            return 0.0;
        }
        let u = t / self.t_star;
        let ds = 30.0 * u * u * (1.0 - u) * (1.0 - u);
        (self.tau1 - self.tau0) * ds / self.t_star
    }
}
