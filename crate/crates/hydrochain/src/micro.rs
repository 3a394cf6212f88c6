//! Euler–Maruyama integration of the microscopic chain dynamics.
//!
//! State is the vector of interparticle stretches `r_1..r_N` and momenta
//! `p_1..p_N` (particle 0 pinned at the origin, tension applied at the free
//! end). The drift carries the hyperbolically scaled Hamiltonian flow plus
//! `N^2`-scaled viscous terms; the noise rows reuse shared Brownian
//! increments across adjacent equations so that length and momentum are
//! conserved away from the boundary. The same increments feed the heat
//! ledger, which makes the energy balance `E(t) - E(0) = W + Q` hold
//! pathwise up to the integrator's discretization error.
//!
//! Array index `i` holds site `i+1` of the 1-based physical numbering.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::potential::Potential;
use crate::protocol::TensionProtocol;
use crate::sampler::{sample_chain, Profile};
use crate::table::ThermoTable;
use crate::{Error, Result};

/// Microscopic configuration: stretches, momenta, macroscopic time.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainState {
    pub r: Vec<f64>,
    pub p: Vec<f64>,
    pub t: f64,
}

impl ChainState {
    pub fn new(r: Vec<f64>, p: Vec<f64>, t: f64) -> Result<Self> {
        if r.len() != p.len() {
            return Err(Error::Precondition("r and p must have equal length".into()));
        }
        if r.len() < 3 {
            return Err(Error::Precondition(format!(
                "chain needs at least 3 sites, got {}",
                r.len()
            )));
        }
        if !r.iter().chain(&p).all(|v| v.is_finite()) {
            return Err(Error::NonFiniteState { t });
        }
        Ok(ChainState { r, p, t })
    }

    pub fn n(&self) -> usize {
        self.r.len()
    }
}

/// Integration parameters for one chain.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n: usize,
    pub beta: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub dt: f64,
    pub protocol: TensionProtocol,
    pub potential: Potential,
}

impl SimConfig {
    /// Largest stable step: the `N^2`-scaled viscous terms dominate the
    /// stiffness, with the `1/n` floor covering the purely hyperbolic case.
    pub fn stability_limit(n: usize, delta1: f64, delta2: f64, potential: Potential) -> f64 {
        let nf = n as f64;
        0.2 / (nf * nf * (delta1 * potential.c_plus()).max(delta2).max(1.0 / nf))
    }

    /// Config with the default timestep at the stability limit.
    pub fn new(
        n: usize,
        beta: f64,
        delta1: f64,
        delta2: f64,
        protocol: TensionProtocol,
        potential: Potential,
    ) -> Result<Self> {
        let dt = Self::stability_limit(n, delta1, delta2, potential);
        Self::with_dt(n, beta, delta1, delta2, dt, protocol, potential)
    }

    pub fn with_dt(
        n: usize,
        beta: f64,
        delta1: f64,
        delta2: f64,
        dt: f64,
        protocol: TensionProtocol,
        potential: Potential,
    ) -> Result<Self> {
        if n < 3 {
            return Err(Error::Precondition(format!("n must be >= 3, got {n}")));
        }
        if !(beta > 0.0) || delta1 < 0.0 || delta2 < 0.0 {
            return Err(Error::InvalidParameter(
                "beta must be positive and viscosities nonnegative".into(),
            ));
        }
        let limit = Self::stability_limit(n, delta1, delta2, potential);
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::StabilityBound { dt, limit });
        }
        Ok(SimConfig { n, beta, delta1, delta2, dt, protocol, potential })
    }
}

/// Pathwise thermodynamic bookkeeping for one trajectory.
#[derive(Debug, Clone, Copy, Default)]
pub struct ThermoLedger {
    /// Mean energy at t = 0.
    pub energy0: f64,
    /// Boundary work accumulator, midpoint Stieltjes sum of tau_bar dL.
    pub work: f64,
    /// Direct accumulation of the microscopic heat exchanged with the bath.
    pub heat_direct: f64,
    /// Current mean stretch L = (1/N) sum r_i.
    pub length: f64,
}

impl ThermoLedger {
    pub fn open(state: &ChainState, potential: Potential) -> Self {
        ThermoLedger {
            energy0: energy_n(state, potential),
            work: 0.0,
            heat_direct: 0.0,
            length: length_n(state),
        }
    }

    /// First-law residual E(t) - E(0) - W - Q for the given current state.
    pub fn first_law_residual(&self, state: &ChainState, potential: Potential) -> f64 {
        energy_n(state, potential) - self.energy0 - self.work - self.heat_direct
    }
}

/// Mean energy E_N = (1/N) sum (p_i^2/2 + V(r_i)).
pub fn energy_n(state: &ChainState, potential: Potential) -> f64 {
    let n = state.n() as f64;
    state
        .r
        .iter()
        .zip(&state.p)
        .map(|(&r, &p)| 0.5 * p * p + potential.v(r))
        .sum::<f64>()
        / n
}

/// Mean stretch L_N = (1/N) sum r_i.
pub fn length_n(state: &ChainState) -> f64 {
    state.r.iter().sum::<f64>() / state.n() as f64
}

/// Empirical pairing ((1/N) sum J(i/N) r_i, (1/N) sum J(i/N) p_i).
pub fn empirical_pairing(state: &ChainState, j: impl Fn(f64) -> f64) -> (f64, f64) {
    let n = state.n();
    let mut sr = 0.0;
    let mut sp = 0.0;
    for i in 0..n {
        let w = j((i + 1) as f64 / n as f64);
        sr += w * state.r[i];
        sp += w * state.p[i];
    }
    (sr / n as f64, sp / n as f64)
}

/// All six drift rows of the evolution equations, without noise. Returned
/// freshly allocated; the integrator uses an in-place variant.
pub fn drift(state: &ChainState, t: f64, cfg: &SimConfig) -> (Vec<f64>, Vec<f64>) {
    let n = state.n();
    let mut dr = vec![0.0; n];
    let mut dp = vec![0.0; n];
    let vp: Vec<f64> = state.r.iter().map(|&r| cfg.potential.dv(r)).collect();
    drift_into(state, &vp, cfg.protocol.tau(t), cfg, &mut dr, &mut dp);
    (dr, dp)
}

fn drift_into(
    state: &ChainState,
    vp: &[f64],
    tau_bar: f64,
    cfg: &SimConfig,
    dr: &mut [f64],
    dp: &mut [f64],
) {
    let n = state.n();
    let nf = n as f64;
    let a = cfg.delta1 * nf * nf;
    let b = cfg.delta2 * nf * nf;
    let p = &state.p;

    // Stretch rows: discrete momentum gradient plus viscous Laplacian of
    // V'; the free end sees the applied tension as its Neumann ghost.
    dr[0] = nf * p[0] + a * (vp[1] - vp[0]);
    for i in 1..n - 1 {
        dr[i] = nf * (p[i] - p[i - 1]) + a * (vp[i + 1] + vp[i - 1] - 2.0 * vp[i]);
    }
    dr[n - 1] = nf * (p[n - 1] - p[n - 2]) + a * (tau_bar + vp[n - 2] - 2.0 * vp[n - 1]);

    // Momentum rows: force gradient plus viscous Laplacian of p; the pinned
    // end acts as p_0 = 0, the free end feels tau_bar - V'(r_N).
    dp[0] = nf * (vp[1] - vp[0]) + b * (p[1] - 2.0 * p[0]);
    for i in 1..n - 1 {
        dp[i] = nf * (vp[i + 1] - vp[i]) + b * (p[i + 1] + p[i - 1] - 2.0 * p[i]);
    }
    dp[n - 1] = nf * (tau_bar - vp[n - 1]) - b * (p[n - 1] - p[n - 2]);
}

/// Reusable buffers for the stepping loop.
#[derive(Debug, Default)]
pub struct StepScratch {
    vp: Vec<f64>,
    vpp: Vec<f64>,
    dr: Vec<f64>,
    dp: Vec<f64>,
    wr: Vec<f64>,
    wp: Vec<f64>,
}

impl StepScratch {
    fn resize(&mut self, n: usize) {
        self.vp.resize(n, 0.0);
        self.vpp.resize(n, 0.0);
        self.dr.resize(n, 0.0);
        self.dp.resize(n, 0.0);
        self.wr.resize(n, 0.0);
        self.wp.resize(n, 0.0);
    }
}

/// One Euler–Maruyama step with caller-supplied Brownian increments, both
/// distributed N(0, dt): `wr` are the stretch-noise increments (index i
/// holds d w~_{i+1}), `wp` the momentum-noise increments (index i holds
/// d w_i). Exposed so refinement tests can couple paths across dt levels.
pub fn step_with_increments(
    state: &mut ChainState,
    ledger: &mut ThermoLedger,
    cfg: &SimConfig,
    dt: f64,
    wr: &[f64],
    wp: &[f64],
    scratch: &mut StepScratch,
) -> Result<()> {
    let n = state.n();
    assert_eq!(wr.len(), n);
    assert_eq!(wp.len(), n);
    scratch.resize(n);
    let nf = n as f64;
    let t = state.t;
    let tau_bar = cfg.protocol.tau(t);
    let (beta, d1, d2) = (cfg.beta, cfg.delta1, cfg.delta2);

    for i in 0..n {
        scratch.vp[i] = cfg.potential.dv(state.r[i]);
        scratch.vpp[i] = cfg.potential.d2v(state.r[i]);
    }
    let vp = &scratch.vp;
    let vpp = &scratch.vpp;

    // Heat exchanged over this step, from the pre-step state (Ito
    // convention) and the same increments that drive the state update.
    let mut heat = 0.0;
    if d2 > 0.0 {
        let mut grad_p_sq = state.p[0] * state.p[0]; // (p_1 - p_0)^2 with p_0 = 0
        for i in 0..n - 1 {
            let g = state.p[i + 1] - state.p[i];
            grad_p_sq += g * g;
        }
        heat += dt * d2 * nf * ((2.0 * nf - 1.0) / beta - grad_p_sq);
        let s2 = (2.0 * d2 / beta).sqrt();
        let mut sto = state.p[0] * wp[0];
        for i in 0..n - 1 {
            sto += (state.p[i + 1] - state.p[i]) * wp[i + 1];
        }
        heat += s2 * sto;
    }
    if d1 > 0.0 {
        let mut curv = vpp[n - 1];
        let mut grad_vp_sq = {
            let g = tau_bar - vp[n - 1];
            g * g
        };
        for i in 0..n - 1 {
            curv += vpp[i + 1] + vpp[i];
            let g = vp[i + 1] - vp[i];
            grad_vp_sq += g * g;
        }
        heat += dt * d1 * nf * (curv / beta - grad_vp_sq);
        let s1 = (2.0 * d1 / beta).sqrt();
        let mut sto = (tau_bar - vp[n - 1]) * wr[n - 1];
        for i in 0..n - 1 {
            sto += (vp[i + 1] - vp[i]) * wr[i];
        }
        heat += s1 * sto;
    }

    drift_into(state, vp, tau_bar, cfg, &mut scratch.dr, &mut scratch.dp);

    let length_before = length_n(state);
    let s1n = (2.0 * d1 / beta).sqrt() * nf;
    let s2n = (2.0 * d2 / beta).sqrt() * nf;

    state.r[0] += scratch.dr[0] * dt - s1n * wr[0];
    for i in 1..n {
        state.r[i] += scratch.dr[i] * dt - s1n * (wr[i] - wr[i - 1]);
    }
    state.p[0] += scratch.dp[0] * dt - s2n * (wp[1] - wp[0]);
    for i in 1..n - 1 {
        state.p[i] += scratch.dp[i] * dt - s2n * (wp[i + 1] - wp[i]);
    }
    state.p[n - 1] += scratch.dp[n - 1] * dt + s2n * wp[n - 1];

    let length_after = length_n(state);
    if !length_after.is_finite() {
        return Err(Error::NonFiniteState { t });
    }
    ledger.work += cfg.protocol.tau(t + 0.5 * dt) * (length_after - length_before);
    ledger.heat_direct += heat;
    ledger.length = length_after;
    state.t = t + dt;
    Ok(())
}

/// One step drawing fresh increments from `rng`: per step the stretch and
/// momentum families each get n independent N(0, dt) increments, consumed
/// in site order.
pub fn step(
    state: &mut ChainState,
    ledger: &mut ThermoLedger,
    cfg: &SimConfig,
    dt: f64,
    rng: &mut impl Rng,
    scratch: &mut StepScratch,
) -> Result<()> {
    let n = state.n();
    scratch.resize(n);
    let sqrt_dt = dt.sqrt();
    for i in 0..n {
        let zr: f64 = rng.sample(StandardNormal);
        scratch.wr[i] = sqrt_dt * zr;
        let zp: f64 = rng.sample(StandardNormal);
        scratch.wp[i] = sqrt_dt * zp;
    }
    let wr = std::mem::take(&mut scratch.wr);
    let wp = std::mem::take(&mut scratch.wp);
    let out = step_with_increments(state, ledger, cfg, dt, &wr, &wp, scratch);
    scratch.wr = wr;
    scratch.wp = wp;
    out
}

/// Observation schedule for a trajectory.
#[derive(Debug, Clone, Default)]
pub struct SamplePlan {
    /// Times at which (E, L, W, Q) are recorded; 0 and the final time are
    /// always included.
    pub series_times: Vec<f64>,
    /// Times at which full state snapshots are kept.
    pub snapshot_times: Vec<f64>,
}

impl SamplePlan {
    /// Uniform series of `samples` points over (0, t_end].
    pub fn uniform(t_end: f64, samples: usize) -> Self {
        let series_times =
            (1..=samples).map(|k| t_end * k as f64 / samples as f64).collect();
        SamplePlan { series_times, snapshot_times: Vec::new() }
    }

    pub fn with_snapshots(mut self, times: Vec<f64>) -> Self {
        self.snapshot_times = times;
        self
    }

    fn horizon(&self) -> f64 {
        self.series_times
            .iter()
            .chain(&self.snapshot_times)
            .fold(0.0_f64, |acc, &t| acc.max(t))
    }
}

/// Ledger time series plus requested snapshots for one realization.
#[derive(Debug, Clone)]
pub struct TrajectorySummary {
    pub times: Vec<f64>,
    pub energy: Vec<f64>,
    pub length: Vec<f64>,
    pub work: Vec<f64>,
    pub heat: Vec<f64>,
    pub snapshots: Vec<(f64, ChainState)>,
    pub final_state: ChainState,
    pub ledger: ThermoLedger,
}

/// Integrate from an exact Gibbs start at the protocol's initial tension
/// (equilibrium initial data: constant stretch profile, zero momentum).
pub fn run(cfg: &SimConfig, rng: &mut impl Rng, plan: &SamplePlan) -> Result<TrajectorySummary> {
    let state = sample_chain(
        cfg.n,
        &Profile::Constant(cfg.protocol.tau(0.0)),
        &Profile::Constant(0.0),
        cfg.beta,
        cfg.potential,
        rng,
    )?;
    run_from(state, cfg, rng, plan)
}

/// Integrate a given initial state through the sample plan.
pub fn run_from(
    mut state: ChainState,
    cfg: &SimConfig,
    rng: &mut impl Rng,
    plan: &SamplePlan,
) -> Result<TrajectorySummary> {
    let ledger = ThermoLedger::open(&state, cfg.potential);
    let mut scratch = StepScratch::default();

    // Merge and sort all observation times; integrate segment by segment so
    // every observation lands exactly on a step boundary.
    let mut events: Vec<f64> = Vec::with_capacity(plan.series_times.len() + 2);
    events.extend(&plan.series_times);
    events.extend(&plan.snapshot_times);
    events.push(plan.horizon());
    events.retain(|&t| t > state.t);
    events.sort_by(|a, b| a.total_cmp(b));
    events.dedup();

    let mut out = TrajectorySummary {
        times: vec![state.t],
        energy: vec![ledger.energy0],
        length: vec![ledger.length],
        work: vec![0.0],
        heat: vec![0.0],
        snapshots: Vec::new(),
        final_state: state.clone(),
        ledger,
    };
    let record_series = |t: f64| plan.series_times.iter().any(|&s| s == t);
    let record_snapshot = |t: f64| plan.snapshot_times.iter().any(|&s| s == t);
    if record_snapshot(state.t) {
        out.snapshots.push((state.t, state.clone()));
    }

    for &target in &events {
        let span = target - state.t;
        let steps = (span / cfg.dt).ceil().max(1.0) as u64;
        let dt = span / steps as f64;
        for _ in 0..steps {
            step(&mut state, &mut out.ledger, cfg, dt, rng, &mut scratch)?;
        }
        state.t = target; // absorb accumulated rounding in t
        if record_series(target) {
            out.times.push(target);
            out.energy.push(energy_n(&state, cfg.potential));
            out.length.push(out.ledger.length);
            out.work.push(out.ledger.work);
            out.heat.push(out.ledger.heat_direct);
        }
        if record_snapshot(target) {
            out.snapshots.push((target, state.clone()));
        }
    }
    out.final_state = state;
    Ok(out)
}

/// Time-averaged one-block residual: blocks of half-width `k` around sites
/// in the bulk window `[floor(N l), N - floor(N l)]`, comparing the block
/// average of V' with the tension of the block-averaged stretch.
pub fn one_block_residual(
    states: &[ChainState],
    table: &ThermoTable,
    k: usize,
    l: f64,
) -> Result<f64> {
    let series = one_block_residual_series(states, table, k, l)?;
    Ok(series.iter().sum::<f64>() / series.len().max(1) as f64)
}

/// Per-state residuals, for Monte Carlo error bands.
pub fn one_block_residual_series(
    states: &[ChainState],
    table: &ThermoTable,
    k: usize,
    l: f64,
) -> Result<Vec<f64>> {
    if states.is_empty() {
        return Err(Error::Precondition("one-block residual needs at least one state".into()));
    }
    let n = states[0].n();
    let b = (n as f64 * l).floor() as usize;
    if k < 1 || b < k + 1 {
        return Err(Error::Precondition(format!(
            "block half-width k={k} needs floor(N*l)={b} >= k+1"
        )));
    }
    let pot = table.potential();
    let width = (2 * k + 1) as f64;
    let mut out = Vec::with_capacity(states.len());
    let mut prefix_vp = vec![0.0; n + 1];
    let mut prefix_r = vec![0.0; n + 1];
    for state in states {
        for i in 0..n {
            prefix_vp[i + 1] = prefix_vp[i] + pot.dv(state.r[i]);
            prefix_r[i + 1] = prefix_r[i] + state.r[i];
        }
        let mut acc = 0.0;
        // 1-based site range [b, n-b]; array index i0 = site - 1.
        for site in b..=(n - b) {
            let i0 = site - 1;
            let (lo, hi) = (i0 - k, i0 + k + 1);
            let vbar = (prefix_vp[hi] - prefix_vp[lo]) / width;
            let rbar = (prefix_r[hi] - prefix_r[lo]) / width;
            let d = vbar - table.tension(rbar);
            acc += d * d;
        }
        out.push(acc / n as f64);
    }
    Ok(out)
}
