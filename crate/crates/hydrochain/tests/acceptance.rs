//! Acceptance suite: one test per verification criterion, each printing a
//! PASS/FAIL line with its headline numbers and runtime.
//!
//! The suite is fully deterministic: fixed seeds, ordered reductions, and
//! results independent of worker count.

use std::time::Instant;

use hydrochain::experiments::*;
use hydrochain::micro::{self, SimConfig};
use hydrochain::pde::{self, equilibrium_state, PdeConfig};
use hydrochain::rng::StreamFactory;
use hydrochain::sampler::{ks_statistic, QuadratureCdf, SiteDistribution};
use hydrochain::thermo::Thermo;
use hydrochain::{Potential, TensionProtocol, ThermoTable};

const COSINE: Potential = Potential::CosinePerturbed { amplitude: 0.5 };

fn tau_grid_41() -> Vec<f64> {
    (0..41).map(|i| -2.0 + 0.1 * i as f64).collect()
}

fn report(criterion: &str, pass: bool, detail: &str, t0: Instant) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("criterion {criterion}: {verdict} [{detail}] ({:.2?})", t0.elapsed());
    assert!(pass, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_01_thermo_duality() {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for pot in [Potential::Harmonic, COSINE] {
        for beta in [0.5, 1.0, 2.0] {
            let th = Thermo::new(pot, beta).unwrap();
            for tau in tau_grid_41() {
                let ell = th.elongation(tau).unwrap();
                worst = worst.max((th.tension(ell).unwrap() - tau).abs());
            }
        }
    }
    report("01 thermo duality", worst < 1e-8, &format!("max |tension(ell)-tau| = {worst:.2e}"), t0);
}

#[test]
fn criterion_02_harmonic_closed_forms() {
    let t0 = Instant::now();
    let th = Thermo::new(Potential::Harmonic, 1.0).unwrap();
    let mut worst: f64 = 0.0;
    for tau in tau_grid_41() {
        worst = worst.max((th.elongation(tau).unwrap() - tau).abs());
        worst = worst.max((th.tension_prime(tau).unwrap() - 1.0).abs());
        worst = worst.max((th.free_energy(tau).unwrap() - 0.5 * tau * tau).abs());
        worst = worst.max((th.free_energy_dual(tau).unwrap() - 0.5 * tau * tau).abs());
        worst = worst.max((th.internal_energy(tau).unwrap() - (1.0 + 0.5 * tau * tau)).abs());
        worst = worst.max((th.entropy(tau).unwrap() - 1.0).abs());
    }
    report("02 harmonic closed forms", worst < 1e-6, &format!("max deviation = {worst:.2e}"), t0);
}

#[test]
fn criterion_03_sampler_exactness() {
    let t0 = Instant::now();
    let streams = StreamFactory::new(303);
    let n = 100_000;
    let crit = 1.628 * (2.0 / n as f64).sqrt(); // two-sample KS, 1% level
    let mut detail = String::new();
    let mut pass = true;
    for (idx, (pot, tau)) in [(Potential::Harmonic, 0.7), (COSINE, 0.5)].into_iter().enumerate() {
        let dist = SiteDistribution::new(tau, 0.0, 1.0, pot).unwrap();
        let oracle = QuadratureCdf::new(tau, 1.0, pot).unwrap();
        let mut rng_a = streams.stream(idx as u32, 0);
        let mut rng_b = streams.stream(idx as u32, 1);
        let mut trials = 0u64;
        let mut a = Vec::with_capacity(n);
        for _ in 0..n {
            let (r, t) = dist.sample_r_counted(&mut rng_a).unwrap();
            a.push(r);
            trials += t;
        }
        let mut b: Vec<f64> = (0..n).map(|_| oracle.sample(&mut rng_b)).collect();
        let d = ks_statistic(&mut a, &mut b);
        let rate = n as f64 / trials as f64;
        let bound = (pot.c_minus() / pot.c_plus()).sqrt() * 0.98;
        pass &= d < crit && rate >= bound;
        detail.push_str(&format!("{}: KS={d:.4} (<{crit:.4}), accept={rate:.3} (>={bound:.3}); ", pot.name()));
    }
    report("03 sampler exactness", pass, &detail, t0);
}

#[test]
fn criterion_04_drift_telescoping() {
    use hydrochain::micro::{drift, ChainState};
    use rand::Rng;
    let t0 = Instant::now();
    let streams = StreamFactory::new(404);
    let mut rng = streams.stream(0, 0);
    let protocol = TensionProtocol::new(0.0, 1.0, 1.0).unwrap();
    let mut worst_rel: f64 = 0.0;
    for n in [3usize, 17, 256] {
        let cfg = SimConfig::new(n, 1.0, 0.7, 1.3, protocol, COSINE).unwrap();
        for _ in 0..100 {
            let r: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let p: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
            let state = ChainState::new(r, p, 0.0).unwrap();
            let t = rng.random_range(0.0..2.0);
            let tau = protocol.tau(t);
            let (dr, dp) = drift(&state, t, &cfg);
            let nf = n as f64;
            let sum_dr = hydrochain::numerics::compensated_sum(dr.iter().copied());
            let want_dr =
                nf * state.p[n - 1] + cfg.delta1 * nf * nf * (tau - COSINE.dv(state.r[n - 1]));
            let scale_dr = dr.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            worst_rel = worst_rel.max((sum_dr - want_dr).abs() / scale_dr);
            let sum_dp = hydrochain::numerics::compensated_sum(dp.iter().copied());
            let want_dp =
                nf * (tau - COSINE.dv(state.r[0])) - cfg.delta2 * nf * nf * state.p[0];
            let scale_dp = dp.iter().map(|v| v.abs()).sum::<f64>().max(1.0);
            worst_rel = worst_rel.max((sum_dp - want_dp).abs() / scale_dp);
        }
    }
    report(
        "04 drift telescoping",
        worst_rel < 1e-12,
        &format!("worst relative defect = {worst_rel:.2e}"),
        t0,
    );
}

#[test]
fn criterion_05_pathwise_first_law_order() {
    let t0 = Instant::now();
    let cfg = DtOrderConfig {
        n: 64,
        beta: 1.0,
        delta1: 1.0,
        delta2: 1.0,
        potential: Potential::Harmonic,
        tau0: 0.0,
        tau1: 1.0,
        t_star: 1.0,
        t_end: 0.5,
        paths: 16,
        rungs: 3,
        seed: 505,
    };
    let rep = first_law_dt_order(&cfg).unwrap();
    report(
        "05 pathwise first law",
        rep.passed && rep.fitted_order >= 0.5,
        &format!("residuals {:?} order {:.2}", rep.mean_abs_residual, rep.fitted_order),
        t0,
    );
}

#[test]
fn criterion_06_gibbs_stationarity() {
    let t0 = Instant::now();
    let cfg = StationarityConfig {
        n: 128,
        beta: 1.0,
        delta1: 1.0,
        delta2: 1.0,
        potential: Potential::Harmonic,
        tau: 1.0,
        times: vec![0.1, 0.5, 1.0],
        realizations: 100,
        dt_factor: 1.0 / 16.0,
        seed: 7777,
    };
    let rep = stationarity(&cfg).unwrap();
    let worst = rep
        .entries
        .iter()
        .map(|e| e.mean_diff.abs() / e.se_diff)
        .fold(0.0_f64, f64::max);
    report(
        "06 gibbs stationarity",
        rep.passed,
        &format!("worst observable deviation = {worst:.2} sigma (band 4)"),
        t0,
    );
}

#[test]
fn criterion_07_pde_fixed_point() {
    let t0 = Instant::now();
    let table = ThermoTable::new(Potential::Harmonic, 1.0).unwrap();
    let protocol = TensionProtocol::constant(1.0);
    let cfg = PdeConfig::new(64, 1.0, 1.0, protocol);
    let state = equilibrium_state(64, &protocol, &table);
    let r0 = state.r.clone();
    let dt = cfg.stable_dt(1.0);
    let traj = pde::integrate(state, &cfg, &table, 1000.0 * dt, &[]).unwrap();
    let drift = traj
        .final_state
        .r
        .iter()
        .zip(&r0)
        .map(|(r, r0)| (r - r0).abs())
        .chain(traj.final_state.p.iter().map(|p| p.abs()))
        .fold(0.0_f64, f64::max);
    report("07 pde fixed point", drift < 1e-12, &format!("max field drift = {drift:.2e}"), t0);
}

#[test]
fn criterion_08_pde_self_convergence() {
    let t0 = Instant::now();
    let rep = pde_self_convergence(
        &[64, 128, 256, 512],
        1.0,
        1.0,
        1.0,
        Potential::Harmonic,
        TensionProtocol::new(0.0, 1.0, 1.0).unwrap(),
        1.0,
    )
    .unwrap();
    report(
        "08 pde self-convergence",
        rep.passed,
        &format!("errors {:?} order {:.2} (band [1.7, 2.3])", rep.errors, rep.fitted_order),
        t0,
    );
}

#[test]
fn criterion_09_conjugate_equivalence() {
    let t0 = Instant::now();
    let rep = conjugate_equivalence(
        &[64, 128, 256],
        1.0,
        1.0,
        1.0,
        COSINE,
        TensionProtocol::new(0.0, 1.0, 1.0).unwrap(),
        1.0,
    )
    .unwrap();
    report(
        "09 conjugate equivalence",
        rep.passed,
        &format!("gaps {:?} order {:.2} (band [1.7, 2.3])", rep.errors, rep.fitted_order),
        t0,
    );
}

#[test]
fn criterion_10_energy_identity() {
    let t0 = Instant::now();
    let rep = energy_identity_ladder(
        &[64, 128, 256],
        1.0,
        1.0,
        1.0,
        Potential::Harmonic,
        TensionProtocol::new(0.0, 1.0, 1.0).unwrap(),
        1.5,
    )
    .unwrap();
    let final_resid = *rep.errors.last().unwrap();
    let pass = final_resid < 1e-6 && rep.fitted_order >= 2.0;
    report(
        "10 energy identity",
        pass,
        &format!("residuals {:?} order {:.2}, m=256 residual {final_resid:.2e} < 1e-6", rep.errors, rep.fitted_order),
        t0,
    );
}

#[test]
fn criterion_11_clausius_inequality() {
    let t0 = Instant::now();
    let base = ClausiusConfig {
        m: 256,
        beta: 1.0,
        delta1: 1.0,
        delta2: 1.0,
        potential: Potential::Harmonic,
        tau0: 0.0,
        tau1: 1.0,
        t_star: 1.0,
        t_end: None,
    };
    let rep = clausius_ladder(&base, &[1.0, 2.0, 4.0, 8.0]).unwrap();
    let gaps: Vec<f64> = rep.rungs.iter().map(|r| r.gap).collect();
    let identity_ok = rep
        .rungs
        .iter()
        .all(|r| r.identity_residual <= 1e-6 * r.identity_scale);
    let pass = gaps[0] > 0.0 && rep.gaps_decreasing && identity_ok;
    report(
        "11 clausius inequality",
        pass,
        &format!(
            "gaps {:?} decreasing={} identity residuals {:?}",
            gaps,
            rep.gaps_decreasing,
            rep.rungs.iter().map(|r| r.identity_residual).collect::<Vec<_>>()
        ),
        t0,
    );
}

#[test]
fn criterion_12_relaxation() {
    let t0 = Instant::now();
    let cfg = RelaxationConfig {
        m: 128,
        beta: 1.0,
        delta1: 1.0,
        delta2: 1.0,
        potential: Potential::Harmonic,
        tau0: 0.0,
        tau1: 1.0,
        t_star: 1.0,
        t_end: 11.0,
    };
    let rep = relaxation(&cfg).unwrap();
    report(
        "12 relaxation",
        rep.passed && rep.slope < 0.0 && rep.r_squared > 0.99,
        &format!("slope {:.3}, R^2 {:.6}, {} points", rep.slope, rep.r_squared, rep.points_used),
        t0,
    );
}

#[test]
fn criteria_13_14_hydrodynamic_limit_and_work() {
    let t0 = Instant::now();
    let cfg = LimitCheckConfig {
        ns: vec![64, 128, 256],
        realizations: 200,
        times: vec![0.5],
        beta: 1.0,
        delta1: 1.0,
        delta2: 1.0,
        protocol: TensionProtocol::new(0.0, 1.0, 1.0).unwrap(),
        potential: Potential::Harmonic,
        macro_m: 512,
        seed: 20240521,
    };
    let rep = limit_check(&cfg).unwrap();
    let pass13 = rep.monotone_ok && rep.strict_decrease && rep.final_within_bands;
    report(
        "13 hydrodynamic limit",
        pass13,
        &format!(
            "max err by N {:?}, strict decrease {}, final bands {}",
            rep.max_err_by_n, rep.strict_decrease, rep.final_within_bands
        ),
        t0,
    );
    let w = &rep.work;
    report(
        "14 micro work convergence",
        w.within_bands,
        &format!(
            "W_N = {:.6} +- {:.6} vs macro {:.6} at N={}",
            w.micro_work_mean, w.micro_work_se, w.macro_work, w.n
        ),
        t0,
    );
}

#[test]
fn criterion_15_one_block() {
    let t0 = Instant::now();
    let cfg = OneBlockConfig {
        n: 256,
        beta: 1.0,
        delta1: 1.0,
        delta2: 1.0,
        potential: COSINE,
        tau: 1.0,
        ks: vec![1, 2, 4, 8],
        l: 0.05,
        t_end: 0.5,
        samples: 100,
        seed: 31,
    };
    let rep = one_block(&cfg).unwrap();
    report(
        "15 one-block diagnostic",
        rep.passed,
        &format!(
            "residuals {:?}",
            rep.entries.iter().map(|e| e.mean).collect::<Vec<_>>()
        ),
        t0,
    );
}

#[test]
fn criterion_16_determinism() {
    let t0 = Instant::now();
    // Same experiment, different worker counts: serialized reports must be
    // byte-identical.
    let cfg = LimitCheckConfig {
        ns: vec![16, 32],
        realizations: 12,
        times: vec![0.1],
        beta: 1.0,
        delta1: 1.0,
        delta2: 1.0,
        protocol: TensionProtocol::new(0.0, 1.0, 0.5).unwrap(),
        potential: COSINE,
        macro_m: 64,
        seed: 1616,
    };
    let run = || serde_json::to_string(&limit_check(&cfg).unwrap()).unwrap();
    let one = hydrochain::par::with_workers(Some(1), run);
    let two = hydrochain::par::with_workers(Some(2), run);
    let four = hydrochain::par::with_workers(Some(4), run);

    let base = ClausiusConfig {
        m: 32,
        beta: 1.0,
        delta1: 1.0,
        delta2: 1.0,
        potential: Potential::Harmonic,
        tau0: 0.0,
        tau1: 0.5,
        t_star: 0.5,
        t_end: Some(1.0),
    };
    let crun = || {
        serde_json::to_string(&clausius_ladder(&base, &[0.5, 1.0]).unwrap()).unwrap()
    };
    let c_one = hydrochain::par::with_workers(Some(1), crun);
    let c_three = hydrochain::par::with_workers(Some(3), crun);

    let pass = one == two && two == four && c_one == c_three;
    report(
        "16 determinism",
        pass,
        &format!("limit-check bytes {} / clausius bytes {}", one.len(), c_one.len()),
        t0,
    );
}

// Shared-run consistency for the micro/macro pair used throughout: the
// ensemble runner must agree with its serial twin bit for bit.
#[test]
fn ensemble_parallel_serial_bitwise() {
    let streams = StreamFactory::new(161616);
    let protocol = TensionProtocol::new(0.0, 1.0, 1.0).unwrap();
    let cfg = SimConfig::new(24, 1.0, 1.0, 1.0, protocol, COSINE).unwrap();
    let plan = micro::SamplePlan::uniform(0.05, 3);
    let a = run_ensemble(&cfg, &streams, 2, 8, &plan).unwrap();
    let b = run_ensemble_serial(&cfg, &streams, 2, 8, &plan).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.final_state.r, y.final_state.r);
        assert_eq!(x.final_state.p, y.final_state.p);
        assert_eq!(x.work, y.work);
        assert_eq!(x.heat, y.heat);
    }
}
