//! Cached tension–elongation duality.
//!
//! The PDE solver evaluates `tension(r)` once per cell per Runge–Kutta
//! stage, so the direct quadrature route is far too slow there. The table
//! samples the elongation map on Chebyshev nodes over a tension window and
//! the inverse map on a uniform stretch grid, both with local cubic
//! interpolation; construction-time quadrature keeps the interpolation
//! error near 1e-10, well below any scheme error it feeds into.

use crate::potential::Potential;
use crate::thermo::Thermo;
use crate::{Error, Result};

/// Number of Chebyshev nodes for `ell` and of uniform nodes for the
/// inverse map.
const NODES: usize = 2048;

/// Tabulated one-spring thermodynamics over a tension window. Immutable
/// after construction and safe to share across workers.
#[derive(Debug, Clone)]
pub struct ThermoTable {
    thermo: Thermo,
    tau_lo: f64,
    tau_hi: f64,
    /// Chebyshev tension nodes, ascending.
    tau_nodes: Vec<f64>,
    /// ell(tau) at the tension nodes.
    ell_vals: Vec<f64>,
    /// Legendre dual Ghat(tau) at the tension nodes.
    ghat_vals: Vec<f64>,
    /// Internal energy at the tension nodes (for export).
    u_vals: Vec<f64>,
    /// Uniform stretch grid for the inverse map.
    r_lo: f64,
    r_step: f64,
    /// tau(r) at the uniform stretch nodes.
    tau_of_r: Vec<f64>,
    /// Uniform-tension fast path, resampled from the Chebyshev interpolants
    /// at construction; cubic on an equispaced grid needs no index search.
    utau_step: f64,
    u_ell: Vec<f64>,
    u_ellprime: Vec<f64>,
    u_ghat: Vec<f64>,
    u_energy: Vec<f64>,
}

/// One row of the exported tabulation.
#[derive(Debug, Clone, Copy)]
pub struct TableRow {
    pub tau: f64,
    pub ell: f64,
    pub free_energy: f64,
    pub ghat: f64,
    pub internal_energy: f64,
    pub entropy: f64,
}

impl ThermoTable {
    /// Build the table on the default tension window [-4, 4].
    pub fn new(potential: Potential, beta: f64) -> Result<Self> {
        Self::with_window(potential, beta, -4.0, 4.0)
    }

    pub fn with_window(potential: Potential, beta: f64, tau_lo: f64, tau_hi: f64) -> Result<Self> {
        if !(tau_lo < tau_hi) {
            return Err(Error::InvalidParameter(format!(
                "tension window [{tau_lo}, {tau_hi}] is empty"
            )));
        }
        let thermo = Thermo::new(potential, beta)?;
        let centre = 0.5 * (tau_lo + tau_hi);
        let half = 0.5 * (tau_hi - tau_lo);

        // Chebyshev points of the second kind, endpoints included, ascending.
        let mut tau_nodes = Vec::with_capacity(NODES);
        for k in 0..NODES {
            let theta = std::f64::consts::PI * k as f64 / (NODES - 1) as f64;
            tau_nodes.push(centre - half * theta.cos());
        }
        tau_nodes[0] = tau_lo;
        tau_nodes[NODES - 1] = tau_hi;

        // Ghat(tau) = Ghat(0-ref) + (log Z(tau) - log Z(ref)) / beta with the
        // additive constant fixed so that Ghat(tau) = tau*ell - F(ell). Using
        // tau_ref = 0 the constant is -F(ell(0)).
        let log_z0 = thermo.log_partition(0.0)?;
        let ghat0 = -thermo.free_energy(thermo.elongation(0.0)?)?;

        let mut ell_vals = Vec::with_capacity(NODES);
        let mut ghat_vals = Vec::with_capacity(NODES);
        let mut u_vals = Vec::with_capacity(NODES);
        for &tau in &tau_nodes {
            let m = thermo.moments(tau)?;
            ell_vals.push(m.mean_r);
            ghat_vals.push(ghat0 + (m.log_z - log_z0) / beta);
            u_vals.push(0.5 / beta + m.mean_v);
        }

        let r_lo = ell_vals[0];
        let r_hi = ell_vals[NODES - 1];
        let r_step = (r_hi - r_lo) / (NODES - 1) as f64;

        let mut table = ThermoTable {
            thermo,
            tau_lo,
            tau_hi,
            tau_nodes,
            ell_vals,
            ghat_vals,
            u_vals,
            r_lo,
            r_step,
            tau_of_r: Vec::new(),
            utau_step: 0.0,
            u_ell: Vec::new(),
            u_ellprime: Vec::new(),
            u_ghat: Vec::new(),
            u_energy: Vec::new(),
        };

        // Fill the inverse map by inverting the ell interpolant on a uniform
        // stretch grid.
        let mut tau_of_r = Vec::with_capacity(NODES);
        for k in 0..NODES {
            let r = r_lo + r_step * k as f64;
            tau_of_r.push(table.invert_interpolant(r)?);
        }
        table.tau_of_r = tau_of_r;

        // Resample the Chebyshev interpolants onto an equispaced tension
        // grid; at this node count the resampling error sits near 1e-12,
        // far below anything the PDE layer can see.
        let un = 2 * NODES;
        table.utau_step = (tau_hi - tau_lo) / (un - 1) as f64;
        for k in 0..un {
            let tau = tau_lo + table.utau_step * k as f64;
            table.u_ell.push(table.interp_tau(&table.ell_vals, tau));
            table.u_ellprime.push(table.interp_tau_deriv(&table.ell_vals, tau));
            table.u_ghat.push(table.interp_tau(&table.ghat_vals, tau));
            table.u_energy.push(table.interp_tau(&table.u_vals, tau));
        }
        Ok(table)
    }

    pub fn thermo(&self) -> &Thermo {
        &self.thermo
    }

    pub fn beta(&self) -> f64 {
        self.thermo.beta
    }

    pub fn potential(&self) -> Potential {
        self.thermo.potential
    }

    /// Index of the left neighbour node for a tension inside the window.
    /// Chebyshev spacing admits a closed-form inverse through acos, so no
    /// search is needed.
    fn tau_bracket(&self, tau: f64) -> usize {
        let centre = 0.5 * (self.tau_lo + self.tau_hi);
        let half = 0.5 * (self.tau_hi - self.tau_lo);
        let c = ((tau - centre) / half).clamp(-1.0, 1.0);
        let theta = (-c).acos();
        let k = (theta * (NODES - 1) as f64 / std::f64::consts::PI) as usize;
        let mut k = k.min(NODES - 2);
        // acos rounding can land one cell off; nudge to the true bracket.
        while k > 0 && self.tau_nodes[k] > tau {
            k -= 1;
        }
        while k < NODES - 2 && self.tau_nodes[k + 1] < tau {
            k += 1;
        }
        k
    }

    /// Local cubic Lagrange interpolation of `vals` at `tau`.
    fn interp_tau(&self, vals: &[f64], tau: f64) -> f64 {
        let k = self.tau_bracket(tau);
        let i0 = k.saturating_sub(1).min(NODES - 4);
        lagrange4(&self.tau_nodes[i0..i0 + 4], &vals[i0..i0 + 4], tau)
    }

    /// Derivative of the local cubic interpolant of `vals` at `tau`.
    fn interp_tau_deriv(&self, vals: &[f64], tau: f64) -> f64 {
        let k = self.tau_bracket(tau);
        let i0 = k.saturating_sub(1).min(NODES - 4);
        lagrange4_deriv(&self.tau_nodes[i0..i0 + 4], &vals[i0..i0 + 4], tau)
    }

    /// Elongation ell(tau); interpolated inside the window, direct
    /// quadrature outside.
    pub fn elongation(&self, tau: f64) -> f64 {
        match uniform_cubic(&self.u_ell, self.tau_lo, self.utau_step, tau) {
            Some(v) => v,
            None => self.thermo.elongation(tau).expect("quadrature fallback"),
        }
    }

    pub fn elongation_prime(&self, tau: f64) -> f64 {
        match uniform_cubic(&self.u_ellprime, self.tau_lo, self.utau_step, tau) {
            Some(v) => v,
            None => self.thermo.elongation_prime(tau).expect("quadrature fallback"),
        }
    }

    /// Legendre dual Ghat(tau).
    pub fn free_energy_dual(&self, tau: f64) -> f64 {
        match uniform_cubic(&self.u_ghat, self.tau_lo, self.utau_step, tau) {
            Some(v) => v,
            None => self.thermo.free_energy_dual(tau).expect("quadrature fallback"),
        }
    }

    /// Invert the ell interpolant: bisection on the bracketing node interval
    /// followed by Newton on the local cubic.
    fn invert_interpolant(&self, r: f64) -> Result<f64> {
        let n = NODES;
        if r <= self.ell_vals[0] || r >= self.ell_vals[n - 1] {
            return self.thermo.tension(r);
        }
        let mut lo = 0;
        let mut hi = n - 1;
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if self.ell_vals[mid] <= r {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut tau = self.tau_nodes[lo]
            + (r - self.ell_vals[lo]) / (self.ell_vals[hi] - self.ell_vals[lo])
                * (self.tau_nodes[hi] - self.tau_nodes[lo]);
        for _ in 0..50 {
            let val = self.interp_tau(&self.ell_vals, tau);
            let slope = self.interp_tau_deriv(&self.ell_vals, tau);
            let step = (val - r) / slope;
            tau = (tau - step).clamp(self.tau_lo, self.tau_hi);
            if step.abs() < 1e-13 * (1.0 + tau.abs()) {
                break;
            }
        }
        Ok(tau)
    }

    /// Tension tau(r): uniform-grid cubic interpolation inside the tabulated
    /// stretch range, direct root finding outside.
    pub fn tension(&self, r: f64) -> f64 {
        match uniform_cubic(&self.tau_of_r, self.r_lo, self.r_step, r) {
            Some(v) => v,
            None => self.thermo.tension(r).expect("root-find fallback"),
        }
    }

    pub fn tension_prime(&self, r: f64) -> f64 {
        1.0 / self.elongation_prime(self.tension(r))
    }

    /// Free energy F(r) through the Legendre identity
    /// F(r) = tau(r)*r - Ghat(tau(r)); two table lookups per call.
    pub fn free_energy(&self, r: f64) -> f64 {
        let tau = self.tension(r);
        tau * r - self.free_energy_dual(tau)
    }

    pub fn internal_energy(&self, tau: f64) -> f64 {
        match uniform_cubic(&self.u_energy, self.tau_lo, self.utau_step, tau) {
            Some(v) => v,
            None => self.thermo.internal_energy(tau).expect("quadrature fallback"),
        }
    }

    pub fn entropy(&self, tau: f64) -> f64 {
        let f = tau * self.elongation(tau) - self.free_energy_dual(tau);
        self.beta() * (self.internal_energy(tau) - f)
    }

    /// Tabulation rows for CSV export at caller-chosen tensions.
    pub fn rows(&self, taus: impl IntoIterator<Item = f64>) -> Vec<TableRow> {
        taus.into_iter()
            .map(|tau| {
                let ell = self.elongation(tau);
                let ghat = self.free_energy_dual(tau);
                let free_energy = tau * ell - ghat;
                let internal_energy = self.internal_energy(tau);
                TableRow {
                    tau,
                    ell,
                    free_energy,
                    ghat,
                    internal_energy,
                    entropy: self.beta() * (internal_energy - free_energy),
                }
            })
            .collect()
    }
}

/// Cubic Lagrange interpolation on an equispaced grid: four nodes at
/// offsets 0..3 from the window start, closed-form weights, no search.
#[inline]
fn uniform_cubic(vals: &[f64], lo: f64, step: f64, x: f64) -> Option<f64> {
    let n = vals.len();
    let pos = (x - lo) / step;
    if !(0.0..=(n - 1) as f64).contains(&pos) {
        return None;
    }
    let i0 = (pos as usize).saturating_sub(1).min(n - 4);
    let u = pos - i0 as f64;
    let (u1, u2, u3) = (u - 1.0, u - 2.0, u - 3.0);
    let w0 = -u1 * u2 * u3 / 6.0;
    let w1 = 0.5 * u * u2 * u3;
    let w2 = -0.5 * u * u1 * u3;
    let w3 = u * u1 * u2 / 6.0;
    Some(w0 * vals[i0] + w1 * vals[i0 + 1] + w2 * vals[i0 + 2] + w3 * vals[i0 + 3])
}

/// Cubic Lagrange interpolation through four points.
fn lagrange4(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let mut term = ys[i];
        for j in 0..4 {
            if i != j {
                term *= (x - xs[j]) / (xs[i] - xs[j]);
            }
        }
        acc += term;
    }
    acc
}

/// Derivative of the cubic Lagrange interpolant.
fn lagrange4_deriv(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let mut acc = 0.0;
    for i in 0..4 {
        let mut sum = 0.0;
        for k in 0..4 {
            if k == i {
                continue;
            }
            let mut prod = 1.0;
            for j in 0..4 {
                if j != i && j != k {
                    prod *= (x - xs[j]) / (xs[i] - xs[j]);
                }
            }
            sum += prod / (xs[i] - xs[k]);
        }
        acc += ys[i] * sum;
    }
    acc
}
