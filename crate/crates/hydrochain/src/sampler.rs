//! Exact sampling from the one-site Gibbs measure and product initial
//! states for the chain.
//!
//! Momenta are Gaussian. Stretches follow the log-concave density
//! `~ exp(beta*(tau*r - V(r)))` and are drawn by rejection from a Gaussian
//! proposal centred at the mode with variance `1/(beta*c_minus)`; strong
//! convexity makes the envelope exact with acceptance at least
//! `sqrt(c_minus/c_plus)`.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::micro::ChainState;
use crate::potential::Potential;
use crate::thermo::Thermo;
use crate::{Error, Result};

/// Hard cap on rejection iterations; hitting it means the convexity bounds
/// advertised by the potential are wrong.
const MAX_REJECTIONS: u64 = 1_000_000;

/// One-site Gibbs distribution at fixed tension, mean momentum and
/// temperature. The mode of the stretch density is cached at construction.
#[derive(Debug, Clone, Copy)]
pub struct SiteDistribution {
    pub tau: f64,
    pub pbar: f64,
    pub beta: f64,
    pub potential: Potential,
    mode: f64,
    /// log-density value at the mode, beta*(tau*m - V(m)).
    log_peak: f64,
}

impl SiteDistribution {
    pub fn new(tau: f64, pbar: f64, beta: f64, potential: Potential) -> Result<Self> {
        let thermo = Thermo::new(potential, beta)?;
        let mode = thermo.mode(tau)?;
        debug_assert!((potential.dv(mode) - tau).abs() < 1e-10 * (1.0 + tau.abs()));
        Ok(SiteDistribution {
            tau,
            pbar,
            beta,
            potential,
            mode,
            log_peak: beta * (tau * mode - potential.v(mode)),
        })
    }

    pub fn mode(&self) -> f64 {
        self.mode
    }

    /// Momentum draw: Gaussian with mean pbar and variance 1/beta.
    pub fn sample_p(&self, rng: &mut impl Rng) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        self.pbar + z / self.beta.sqrt()
    }

    /// Exact stretch draw by rejection. The acceptance test only evaluates
    /// V and the cached mode: accept z with probability
    /// exp(beta*(tau*r - V(r)) - log_peak + beta*c_minus*(r - m)^2 / 2),
    /// which is <= 1 by strong convexity.
    pub fn sample_r(&self, rng: &mut impl Rng) -> Result<f64> {
        Ok(self.sample_r_counted(rng)?.0)
    }

    /// Stretch draw returning the number of proposals used, for acceptance
    /// rate checks.
    pub fn sample_r_counted(&self, rng: &mut impl Rng) -> Result<(f64, u64)> {
        let c_minus = self.potential.c_minus();
        let sigma = 1.0 / (self.beta * c_minus).sqrt();
        for trial in 1..=MAX_REJECTIONS {
            let z: f64 = rng.sample(StandardNormal);
            let r = self.mode + sigma * z;
            let log_target = self.beta * (self.tau * r - self.potential.v(r));
            let log_accept = log_target - self.log_peak + 0.5 * z * z;
            debug_assert!(log_accept < 1e-12);
            let u: f64 = rng.random();
            if u.ln() < log_accept {
                return Ok((r, trial));
            }
        }
        Err(Error::RejectionOverrun(MAX_REJECTIONS))
    }
}

/// Macroscopic profile used to parameterize site distributions.
#[derive(Debug, Clone)]
pub enum Profile {
    Constant(f64),
    /// Piecewise-linear table of (x, value) pairs with x ascending in [0, 1].
    Table(Vec<(f64, f64)>),
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Constant(v) => *v,
            Profile::Table(points) => {
                if points.is_empty() {
                    return 0.0;
                }
                if x <= points[0].0 {
                    return points[0].1;
                }
                if x >= points[points.len() - 1].0 {
                    return points[points.len() - 1].1;
                }
                let idx = points.partition_point(|(px, _)| *px <= x).max(1);
                let (x0, y0) = points[idx - 1];
                let (x1, y1) = points[idx];
                y0 + (y1 - y0) * (x - x0) / (x1 - x0)
            }
        }
    }
}

/// Draw a product (local Gibbs) chain state: site i of n gets tension
/// tau_profile(i/n) and mean momentum p_profile(i/n).
pub fn sample_chain(
    n: usize,
    tau_profile: &Profile,
    p_profile: &Profile,
    beta: f64,
    potential: Potential,
    rng: &mut impl Rng,
) -> Result<ChainState> {
    if n < 3 {
        return Err(Error::Precondition(format!(
            "chain needs at least 3 sites (boundary rows plus one interior), got {n}"
        )));
    }
    let mut r = Vec::with_capacity(n);
    let mut p = Vec::with_capacity(n);
    // Constant profiles reuse one cached distribution; that is the common
    // case for equilibrium starts.
    let constant = matches!(tau_profile, Profile::Constant(_))
        && matches!(p_profile, Profile::Constant(_));
    let cached = if constant {
        Some(SiteDistribution::new(tau_profile.eval(0.0), p_profile.eval(0.0), beta, potential)?)
    } else {
        None
    };
    for i in 1..=n {
        let x = i as f64 / n as f64;
        let dist = match &cached {
            Some(d) => *d,
            None => SiteDistribution::new(tau_profile.eval(x), p_profile.eval(x), beta, potential)?,
        };
        r.push(dist.sample_r(rng)?);
        p.push(dist.sample_p(rng));
    }
    ChainState::new(r, p, 0.0)
}

/// Inverse-CDF sampler built from quadrature of the stretch density; test
/// oracle for the rejection path, never used in production.
#[derive(Debug, Clone)]
pub struct QuadratureCdf {
    grid: Vec<f64>,
    cdf: Vec<f64>,
}

impl QuadratureCdf {
    pub fn new(tau: f64, beta: f64, potential: Potential) -> Result<Self> {
        let thermo = Thermo::new(potential, beta)?;
        let mode = thermo.mode(tau)?;
        let half_width = 12.0 / (beta * potential.c_minus()).sqrt();
        let n = 4001;
        let lo = mode - half_width;
        let step = 2.0 * half_width / (n - 1) as f64;
        let log_peak = beta * (tau * mode - potential.v(mode));
        let dens =
            |r: f64| -> f64 { (beta * (tau * r - potential.v(r)) - log_peak).exp() };
        let mut grid = Vec::with_capacity(n);
        let mut cdf = Vec::with_capacity(n);
        let mut acc = 0.0;
        grid.push(lo);
        cdf.push(0.0);
        for k in 1..n {
            let a = lo + (k - 1) as f64 * step;
            let b = a + step;
            // Simpson per panel is plenty at this resolution.
            acc += (dens(a) + 4.0 * dens(0.5 * (a + b)) + dens(b)) * step / 6.0;
            grid.push(b);
            cdf.push(acc);
        }
        let total = acc;
        for c in cdf.iter_mut() {
            *c /= total;
        }
        Ok(QuadratureCdf { grid, cdf })
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let u: f64 = rng.random();
        let idx = self.cdf.partition_point(|c| *c < u).clamp(1, self.cdf.len() - 1);
        let (c0, c1) = (self.cdf[idx - 1], self.cdf[idx]);
        let (x0, x1) = (self.grid[idx - 1], self.grid[idx]);
        if c1 > c0 {
            x0 + (x1 - x0) * (u - c0) / (c1 - c0)
        } else {
            x0
        }
    }
}

/// Two-sample Kolmogorov–Smirnov statistic.
pub fn ks_statistic(a: &mut [f64], b: &mut [f64]) -> f64 {
    a.sort_by(|x, y| x.total_cmp(y));
    b.sort_by(|x, y| x.total_cmp(y));
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut ia, mut ib) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while ia < a.len() && ib < b.len() {
        if a[ia] <= b[ib] {
            ia += 1;
        } else {
            ib += 1;
        }
        d = d.max((ia as f64 / na - ib as f64 / nb).abs());
    }
    d
}
