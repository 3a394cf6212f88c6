//! Interaction potentials for the chain springs.
//!
//! Every potential is smooth and strongly convex: its second derivative is
//! pinched between two positive constants. That bound is what makes the
//! tension–elongation map invertible and the rejection sampler exact.

use serde::{Deserialize, Serialize};

use crate::Error;

/// A spring potential with analytic first and second derivatives and
/// explicit convexity bounds `c_minus <= V'' <= c_plus`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Potential {
    /// V(r) = r^2 / 2. Gaussian closed forms for every thermodynamic
    /// quantity; the exactly solvable reference case.
    Harmonic,
    /// V(r) = r^2 / 2 + a (1 - cos r), 0 < a < 1. Genuinely anharmonic
    /// while keeping V'' in [1 - a, 1 + a].
    CosinePerturbed { amplitude: f64 },
}

impl Potential {
    pub fn v(&self, r: f64) -> f64 {
        match self {
            Potential::Harmonic => 0.5 * r * r,
            Potential::CosinePerturbed { amplitude } => 0.5 * r * r + amplitude * (1.0 - r.cos()),
        }
    }

    pub fn dv(&self, r: f64) -> f64 {
        match self {
            Potential::Harmonic => r,
            Potential::CosinePerturbed { amplitude } => r + amplitude * r.sin(),
        }
    }

    pub fn d2v(&self, r: f64) -> f64 {
        match self {
            Potential::Harmonic => 1.0,
            Potential::CosinePerturbed { amplitude } => 1.0 + amplitude * r.cos(),
        }
    }

    /// Lower convexity bound.
    pub fn c_minus(&self) -> f64 {
        match self {
            Potential::Harmonic => 1.0,
            Potential::CosinePerturbed { amplitude } => 1.0 - amplitude,
        }
    }

    /// Upper convexity bound.
    pub fn c_plus(&self) -> f64 {
        match self {
            Potential::Harmonic => 1.0,
            Potential::CosinePerturbed { amplitude } => 1.0 + amplitude,
        }
    }

    pub fn name(&self) -> String {
        match self {
            Potential::Harmonic => "harmonic".to_string(),
            Potential::CosinePerturbed { amplitude } => format!("cosine:a={amplitude}"),
        }
    }

    /// Parse a potential spec such as `harmonic` or `cosine:a=0.5`.
    pub fn parse(spec: &str) -> Result<Self, Error> {
        let spec = spec.trim();
        if spec == "harmonic" {
            return Ok(Potential::Harmonic);
        }
        if spec == "cosine" {
            return Ok(Potential::CosinePerturbed { amplitude: 0.5 });
        }
        if let Some(rest) = spec.strip_prefix("cosine:") {
            let amplitude = rest
                .strip_prefix("a=")
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| {
                    Error::InvalidParameter(format!("bad cosine potential spec `{spec}`"))
                })?;
            if !(0.0..1.0).contains(&amplitude) {
                return Err(Error::InvalidParameter(format!(
                    "cosine amplitude must lie in [0, 1) to stay strongly convex, got {amplitude}"
                )));
            }
            return Ok(Potential::CosinePerturbed { amplitude });
        }
        Err(Error::InvalidParameter(format!("unknown potential `{spec}`")))
    }
}

impl TryFrom<String> for Potential {
    type Error = Error;
    fn try_from(s: String) -> Result<Self, Error> {
        Potential::parse(&s)
    }
}

impl From<Potential> for String {
    fn from(p: Potential) -> String {
        p.name()
    }
}

impl std::fmt::Display for Potential {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.name())
    }
}
