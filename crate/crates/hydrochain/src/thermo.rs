//! Equilibrium statistical mechanics of a single spring.
//!
//! All quantities derive from the tilted one-site density
//! `exp(beta*(tau*r - V(r)))`: its normalization gives the Gibbs potential,
//! the tilted mean of `r` is the elongation `ell(tau)`, and the inverse map
//! `tension(r)` closes the duality. Strong convexity of `V` makes the
//! density log-concave, so one mode-centred quadrature window of width
//! `12 / sqrt(beta*c_minus)` on each side captures the full mass to double
//! precision.

use crate::numerics::{integrate_adaptive, integrate_panels};
use crate::potential::Potential;
use crate::{Error, Result};

/// Half-width of the quadrature window in units of the convexity length
/// `1/sqrt(beta*c_minus)`; the neglected tail mass is below `exp(-72)`.
const WINDOW_SIGMAS: f64 = 12.0;

/// Relative tolerance for the adaptive quadratures.
const QUAD_TOL: f64 = 1e-13;

/// Inverse temperature wrapper; kept separate so configs can validate it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermoParams {
    pub beta: f64,
}

impl ThermoParams {
    pub fn new(beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
        }
        Ok(ThermoParams { beta })
    }
}

/// Moments of the tilted density at a fixed tension.
#[derive(Debug, Clone, Copy)]
pub struct TiltedMoments {
    /// log of the normalization Z(tau, beta).
    pub log_z: f64,
    /// Tilted mean of r, i.e. the elongation.
    pub mean_r: f64,
    /// Tilted variance of r.
    pub var_r: f64,
    /// Tilted mean of V(r).
    pub mean_v: f64,
}

/// One-spring thermodynamics at fixed potential and temperature.
#[derive(Debug, Clone, Copy)]
pub struct Thermo {
    pub potential: Potential,
    pub beta: f64,
}

impl Thermo {
    pub fn new(potential: Potential, beta: f64) -> Result<Self> {
        ThermoParams::new(beta)?;
        Ok(Thermo { potential, beta })
    }

    /// Argmax of `tau*r - V(r)`, i.e. the solution of `V'(m) = tau`. Newton
    /// converges globally here because `V'` is strictly increasing with a
    /// bounded slope.
    pub fn mode(&self, tau: f64) -> Result<f64> {
        let pot = &self.potential;
        let mut m = tau / pot.c_plus().max(1.0);
        for _ in 0..200 {
            let step = (pot.dv(m) - tau) / pot.d2v(m);
            m -= step;
            if step.abs() < 1e-13 * (1.0 + m.abs()) {
                return Ok(m);
            }
        }
        Err(Error::ModeSearch { tau })
    }

    /// Quadrature in one pass: normalization, mean, variance and mean
    /// potential energy of the tilted density.
    pub fn moments(&self, tau: f64) -> Result<TiltedMoments> {
        let pot = self.potential;
        let beta = self.beta;
        let m = self.mode(tau)?;
        let phi_m = tau * m - pot.v(m);
        let half_width = WINDOW_SIGMAS / (beta * pot.c_minus()).sqrt();
        let mut f = |r: f64, out: &mut [f64; 4]| {
            let w = (beta * (tau * r - pot.v(r) - phi_m)).exp();
            out[0] = w;
            out[1] = w * r;
            out[2] = w * r * r;
            out[3] = w * pot.v(r);
        };
        let ints = integrate_adaptive(&mut f, m - half_width, m + half_width, QUAD_TOL)?;
        let mean_r = ints[1] / ints[0];
        Ok(TiltedMoments {
            log_z: beta * phi_m + ints[0].ln(),
            mean_r,
            var_r: ints[2] / ints[0] - mean_r * mean_r,
            mean_v: ints[3] / ints[0],
        })
    }

    /// Z(tau, beta) = integral of exp(beta*(tau*r - V(r))).
    pub fn partition_function(&self, tau: f64) -> Result<f64> {
        Ok(self.log_partition(tau)?.exp())
    }

    pub fn log_partition(&self, tau: f64) -> Result<f64> {
        Ok(self.moments(tau)?.log_z)
    }

    /// Gibbs potential G(tau, pbar, beta). The momentum integral is a plain
    /// Gaussian and contributes `0.5*ln(2*pi/beta) + beta*pbar^2/2`.
    pub fn gibbs_potential(&self, tau: f64, pbar: f64) -> Result<f64> {
        Ok(0.5 * (2.0 * std::f64::consts::PI / self.beta).ln()
            + 0.5 * self.beta * pbar * pbar
            + self.log_partition(tau)?)
    }

    /// Mean elongation ell(tau, beta), the tilted expectation of r.
    pub fn elongation(&self, tau: f64) -> Result<f64> {
        Ok(self.moments(tau)?.mean_r)
    }

    /// ell'(tau, beta) = beta * Var(r) > 0.
    pub fn elongation_prime(&self, tau: f64) -> Result<f64> {
        Ok(self.beta * self.moments(tau)?.var_r)
    }

    /// Inverse of the elongation map: the tension tau(r, beta) with
    /// ell(tension(r)) = r. Bracketing bisection narrows to 1e-3, then
    /// Newton with ell' polishes to 1e-12.
    pub fn tension(&self, r: f64) -> Result<f64> {
        // ell(tau) - tau is bounded, so dv(r) is a good centre for the
        // bracket; for the harmonic potential it is already exact.
        let centre = self.potential.dv(r);
        let mut width = 1.0;
        let (mut lo, mut hi) = (centre - width, centre + width);
        let mut expansions = 0;
        while self.elongation(lo)? > r {
            width *= 2.0;
            lo = centre - width;
            expansions += 1;
            if expansions > 200 {
                return Err(Error::BracketExpansion { r });
            }
        }
        while self.elongation(hi)? < r {
            width *= 2.0;
            hi = centre + width;
            expansions += 1;
            if expansions > 200 {
                return Err(Error::BracketExpansion { r });
            }
        }
        while hi - lo > 1e-3 {
            let mid = 0.5 * (lo + hi);
            if self.elongation(mid)? < r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut tau = 0.5 * (lo + hi);
        for _ in 0..60 {
            let m = self.moments(tau)?;
            let step = (m.mean_r - r) / (self.beta * m.var_r);
            tau -= step;
            if step.abs() < 1e-12 * (1.0 + tau.abs()) {
                break;
            }
        }
        Ok(tau)
    }

    /// tau'(r) = 1 / ell'(tension(r)); sandwiched between the convexity
    /// bounds of the potential.
    pub fn tension_prime(&self, r: f64) -> Result<f64> {
        Ok(1.0 / self.elongation_prime(self.tension(r)?)?)
    }

    /// Equilibrium free energy F(r, beta) = integral of tension from 0 to r,
    /// by composite Gauss–Legendre quadrature.
    pub fn free_energy(&self, r: f64) -> Result<f64> {
        if r == 0.0 {
            return Ok(0.0);
        }
        let panels = (r.abs() * 4.0).ceil().max(2.0) as usize;
        let mut err: Option<Error> = None;
        let mut f = |xi: f64, out: &mut [f64; 1]| match self.tension(xi) {
            Ok(t) => out[0] = t,
            Err(e) => {
                out[0] = f64::NAN;
                err.get_or_insert(e);
            }
        };
        let val = integrate_panels(&mut f, 0.0, r, panels)[0];
        match err {
            Some(e) => Err(e),
            None => Ok(val),
        }
    }

    /// Legendre transform of the free energy:
    /// Ghat(tau) = tau*ell(tau) - F(ell(tau)), with Ghat' = ell.
    pub fn free_energy_dual(&self, tau: f64) -> Result<f64> {
        let ell = self.elongation(tau)?;
        Ok(tau * ell - self.free_energy(ell)?)
    }

    /// Internal energy U(tau, beta) = 1/(2 beta) + <V(r)> at pbar = 0.
    pub fn internal_energy(&self, tau: f64) -> Result<f64> {
        Ok(0.5 / self.beta + self.moments(tau)?.mean_v)
    }

    /// Thermodynamic entropy S(tau, beta) = beta * (U - F(ell(tau))).
    pub fn entropy(&self, tau: f64) -> Result<f64> {
        let u = self.internal_energy(tau)?;
        let f = self.free_energy(self.elongation(tau)?)?;
        Ok(self.beta * (u - f))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn harmonic(beta: f64) -> Thermo {
        Thermo::new(Potential::Harmonic, beta).unwrap()
    }

    fn cosine(beta: f64) -> Thermo {
        Thermo::new(Potential::CosinePerturbed { amplitude: 0.5 }, beta).unwrap()
    }

    #[test]
    fn partition_function_gaussian_closed_forms() {
        let th = harmonic(1.0);
        let sqrt_2pi = (2.0 * std::f64::consts::PI).sqrt();
        // tau = 0: plain Gaussian normalization.
        assert!((th.partition_function(0.0).unwrap() - sqrt_2pi).abs() / sqrt_2pi < 1e-10);
        // tau = 1: complete the square, Z = sqrt(2*pi) * exp(1/2).
        let want = sqrt_2pi * 0.5_f64.exp();
        assert!((th.partition_function(1.0).unwrap() - want).abs() / want < 1e-10);
    }

    #[test]
    fn partition_function_positive_for_even_potential() {
        for th in [harmonic(0.5), cosine(2.0)] {
            let z = th.partition_function(0.0).unwrap();
            assert!(z.is_finite() && z > 0.0);
        }
    }

    #[test]
    fn gibbs_potential_values_and_gradients() {
        let th = harmonic(1.0);
        let log_2pi = (2.0 * std::f64::consts::PI).ln();
        assert!((th.gibbs_potential(0.0, 0.0).unwrap() - log_2pi).abs() < 1e-10);
        assert!((th.gibbs_potential(0.0, 1.0).unwrap() - (log_2pi + 0.5)).abs() < 1e-10);

        // beta^-1 dG/dpbar = pbar and beta^-1 dG/dtau = ell, by central
        // differences at a generic point.
        for th in [harmonic(2.0), cosine(1.0)] {
            let (tau, pbar, h) = (0.7, -0.3, 1e-5);
            let dp = (th.gibbs_potential(tau, pbar + h).unwrap()
                - th.gibbs_potential(tau, pbar - h).unwrap())
                / (2.0 * h);
            assert!((dp / th.beta - pbar).abs() < 1e-8);
            let dt = (th.gibbs_potential(tau + h, pbar).unwrap()
                - th.gibbs_potential(tau - h, pbar).unwrap())
                / (2.0 * h);
            assert!((dt / th.beta - th.elongation(tau).unwrap()).abs() < 1e-8);
        }
    }

    #[test]
    fn elongation_matches_gaussian_mean() {
        // Even potential at tau = 0 has zero mean by symmetry.
        assert!(harmonic(1.0).elongation(0.0).unwrap().abs() < 1e-12);
        assert!(cosine(1.0).elongation(0.0).unwrap().abs() < 1e-12);
        // Harmonic: ell(tau) = tau for every beta.
        assert!((harmonic(1.0).elongation(0.5).unwrap() - 0.5).abs() < 1e-9);
        assert!((harmonic(4.0).elongation(0.5).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn elongation_prime_is_beta_variance() {
        assert!((harmonic(1.0).elongation_prime(0.3).unwrap() - 1.0).abs() < 1e-9);
        assert!((harmonic(2.0).elongation_prime(-1.0).unwrap() - 1.0).abs() < 1e-9);
        // Brascamp-Lieb style sandwich for any valid potential.
        let th = cosine(1.0);
        for tau in [-2.0, -0.5, 0.0, 1.0, 2.0] {
            let lp = th.elongation_prime(tau).unwrap();
            let (cm, cp) = (th.potential.c_minus(), th.potential.c_plus());
            assert!(lp >= 1.0 / cp - 1e-9 && lp <= 1.0 / cm + 1e-9);
        }
    }

    #[test]
    fn tension_inverts_elongation() {
        assert!((harmonic(1.0).tension(0.5).unwrap() - 0.5).abs() < 1e-9);
        assert!(cosine(1.0).tension(0.0).unwrap().abs() < 1e-10);
        for th in [harmonic(1.0), cosine(0.5), cosine(2.0)] {
            for tau in [-2.0, -1.0, 0.0, 1.0, 2.0] {
                let r = th.elongation(tau).unwrap();
                assert!(
                    (th.tension(r).unwrap() - tau).abs() < 1e-8,
                    "round trip failed for {} at tau={tau}",
                    th.potential.name()
                );
            }
        }
    }

    #[test]
    fn tension_prime_sandwich_and_consistency() {
        assert!((harmonic(1.0).tension_prime(0.7).unwrap() - 1.0).abs() < 1e-9);
        let th = cosine(1.0);
        for r in [-3.0, -1.0, 0.0, 0.5, 2.0, 3.0] {
            let tp = th.tension_prime(r).unwrap();
            assert!((0.5..=1.5).contains(&tp), "tension' out of [c-, c+] at r={r}");
            let h = 1e-4;
            let fd = (th.tension(r + h).unwrap() - th.tension(r - h).unwrap()) / (2.0 * h);
            assert!((fd - tp).abs() < 1e-6);
        }
    }

    #[test]
    fn free_energy_values() {
        let th = harmonic(1.0);
        assert!((th.free_energy(1.0).unwrap() - 0.5).abs() < 1e-9);
        assert_eq!(cosine(1.0).free_energy(0.0).unwrap(), 0.0);
        // F(r) >= tau(0)*r = 0 with equality only at r = 0 for even V.
        let thc = cosine(1.0);
        for r in [-1.5, -0.2, 0.4, 2.0] {
            assert!(thc.free_energy(r).unwrap() > 0.0);
        }
        // F' = tau by central differences.
        for r in [-1.0, 0.3, 1.7] {
            let h = 1e-4;
            let fd = (thc.free_energy(r + h).unwrap() - thc.free_energy(r - h).unwrap()) / (2.0 * h);
            assert!((fd - thc.tension(r).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn dual_free_energy_and_young_inequality() {
        let th = harmonic(1.0);
        assert!((th.free_energy_dual(1.0).unwrap() - 0.5).abs() < 1e-8);
        assert!(cosine(1.0).free_energy_dual(0.0).unwrap().abs() < 1e-10);
        // Ghat' = ell by central differences.
        let thc = cosine(1.0);
        let h = 1e-4;
        let fd = (thc.free_energy_dual(0.8 + h).unwrap() - thc.free_energy_dual(0.8 - h).unwrap())
            / (2.0 * h);
        assert!((fd - thc.elongation(0.8).unwrap()).abs() < 1e-6);

        // Young inequality F(r) - tau*r + Ghat(tau) >= 0 on a 20x20 grid,
        // vanishing on the graph r = ell(tau).
        for th in [harmonic(1.0), cosine(1.0)] {
            for i in 0..20 {
                let r = -2.0 + 4.0 * i as f64 / 19.0;
                let f = th.free_energy(r).unwrap();
                for j in 0..20 {
                    let tau = -2.0 + 4.0 * j as f64 / 19.0;
                    let young = f - tau * r + th.free_energy_dual(tau).unwrap();
                    assert!(young >= -1e-10, "Young violated at r={r}, tau={tau}: {young}");
                }
            }
            let tau = 0.9;
            let r = th.elongation(tau).unwrap();
            let gap = th.free_energy(r).unwrap() - tau * r + th.free_energy_dual(tau).unwrap();
            assert!(gap.abs() < 1e-8);
        }
    }

    #[test]
    fn internal_energy_values() {
        let th = harmonic(1.0);
        assert!((th.internal_energy(1.0).unwrap() - 1.5).abs() < 1e-9);
        assert!((th.internal_energy(0.0).unwrap() - 1.0).abs() < 1e-9);
        let thc = cosine(1.0);
        assert!(
            (thc.internal_energy(0.8).unwrap() - thc.internal_energy(-0.8).unwrap()).abs() < 1e-9
        );
    }

    #[test]
    fn entropy_values() {
        let th = harmonic(1.0);
        assert!((th.entropy(0.0).unwrap() - 1.0).abs() < 1e-8);
        // Harmonic entropy is independent of tension.
        assert!((th.entropy(2.0).unwrap() - 1.0).abs() < 1e-8);
        let thc = cosine(1.0);
        for tau in [-2.0, -1.0, 0.0, 1.0, 2.0] {
            assert!(thc.entropy(tau).unwrap().is_finite());
        }
    }

    #[test]
    fn dual_route_free_energy_agrees_with_log_partition() {
        // Independent route: for even potentials,
        // Ghat(tau) = (log Z(tau) - log Z(0)) / beta.
        for th in [harmonic(0.5), cosine(1.0), cosine(2.0)] {
            let z0 = th.log_partition(0.0).unwrap();
            for tau in [-1.5, -0.4, 0.9, 2.0] {
                let via_log_z = (th.log_partition(tau).unwrap() - z0) / th.beta;
                let via_legendre = th.free_energy_dual(tau).unwrap();
                assert!(
                    (via_log_z - via_legendre).abs() < 1e-8,
                    "dual-route mismatch for {} at tau={tau}",
                    th.potential.name()
                );
            }
        }
    }
}
