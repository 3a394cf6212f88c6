//! Ad-hoc measurement probes (ignored by default).

use hydrochain::experiments::*;
use hydrochain::{Potential, TensionProtocol};
use std::time::Instant;

#[test]
#[ignore]
fn probe_energy_identity() {
    for m in [64usize, 128, 256] {
        let t0 = Instant::now();
        let rep = energy_identity_ladder(
            &[m],
            1.0,
            1.0,
            1.0,
            Potential::Harmonic,
            TensionProtocol::new(0.0, 1.0, 1.0).unwrap(),
            1.5,
        )
        .unwrap();
        println!("m={m}: residual={:.3e}  ({:.2?})", rep.errors[0], t0.elapsed());
    }
}

#[test]
#[ignore]
fn probe_self_convergence() {
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
    println!("errors={:?} order={:.3} ({:.2?})", rep.errors, rep.fitted_order, t0.elapsed());
}

#[test]
#[ignore]
fn probe_conjugate() {
    let t0 = Instant::now();
    let rep = conjugate_equivalence(
        &[64, 128, 256, 512],
        1.0,
        1.0,
        1.0,
        Potential::CosinePerturbed { amplitude: 0.5 },
        TensionProtocol::new(0.0, 1.0, 1.0).unwrap(),
        1.0,
    )
    .unwrap();
    println!("gaps={:?} order={:.3} ({:.2?})", rep.errors, rep.fitted_order, t0.elapsed());
}

#[test]
#[ignore]
fn probe_clausius() {
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
    let t0 = Instant::now();
    let rep = clausius_ladder(&base, &[1.0, 2.0, 4.0, 8.0]).unwrap();
    for r in &rep.rungs {
        println!(
            "T*={}: W={:.8} dF={:.8} gap={:.3e} D={:.3e} |gap-D|={:.3e} relax={} passed={}",
            r.t_star, r.work, r.delta_f, r.gap, r.dissipation_integral, r.identity_residual,
            r.relaxation_reached, r.passed
        );
    }
    println!("decreasing={} ({:.2?})", rep.gaps_decreasing, t0.elapsed());
}

#[test]
#[ignore]
fn probe_relaxation() {
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
    let t0 = Instant::now();
    let rep = relaxation(&cfg).unwrap();
    println!(
        "slope={:.4} R2={:.6} pts={} floor={:.2e} ({:.2?})",
        rep.slope, rep.r_squared, rep.points_used, rep.floor, t0.elapsed()
    );
}

#[test]
#[ignore]
fn probe_micro_speed() {
    use hydrochain::micro::{SamplePlan, SimConfig};
    use hydrochain::rng::StreamFactory;
    let protocol = TensionProtocol::new(0.0, 1.0, 1.0).unwrap();
    let cfg = SimConfig::new(256, 1.0, 1.0, 1.0, protocol, Potential::Harmonic).unwrap();
    let streams = StreamFactory::new(1);
    let plan = SamplePlan { series_times: vec![0.5], snapshot_times: vec![0.5] };
    let t0 = Instant::now();
    let out = run_ensemble(&cfg, &streams, 0, 4, &plan).unwrap();
    println!(
        "4 realizations N=256 to t=0.5: {:.2?} (per real {:.2?}), W mean={:.4}",
        t0.elapsed(),
        t0.elapsed() / 4,
        out.iter().map(|o| o.ledger.work).sum::<f64>() / 4.0
    );
}

#[test]
#[ignore]
fn probe_dt_order() {
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
        seed: 42,
    };
    let t0 = Instant::now();
    let rep = first_law_dt_order(&cfg).unwrap();
    println!(
        "dts={:?}\nresiduals={:?}\norder={:.3} ({:.2?})",
        rep.dts, rep.mean_abs_residual, rep.fitted_order, t0.elapsed()
    );
}

#[test]
#[ignore]
fn probe_limit_check_full() {
    use hydrochain::experiments::{limit_check, LimitCheckConfig};
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
    for e in &rep.entries {
        println!(
            "N={:3} J={:8} t={}: err={:.5e} se={:.3e} budget={:.3e} (micro r {:.6}±{:.6} vs {:.6})",
            e.n, e.j, e.t, e.err, e.se, e.grid_budget, e.micro_mean_r, e.micro_se_r, e.macro_r
        );
    }
    println!(
        "monotone={} work: {:.6}±{:.6} vs {:.6} in-band={} ({:.2?})",
        rep.monotone_ok,
        rep.work.micro_work_mean,
        rep.work.micro_work_se,
        rep.work.macro_work,
        rep.work.within_bands,
        t0.elapsed()
    );
    // Criterion-style gates.
    for (jname, _) in hydrochain::experiments::test_functions() {
        let at = |n: usize| rep.entries.iter().find(|e| e.n == n && e.j == jname).unwrap();
        let (e64, e256) = (at(64), at(256));
        println!(
            "J={jname}: err(256) < err(64)? {} | err(256) < 3(se+budget)? {}",
            e256.err < e64.err,
            e256.err < 3.0 * (e256.se + e256.grid_budget)
        );
    }
}

#[test]
#[ignore]
fn probe_stationarity_full() {
    use hydrochain::experiments::{stationarity, StationarityConfig};
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
    for e in &rep.entries {
        println!(
            "{} t={}: diff={:+.5e} se={:.3e} in-band={} ({:.1} sigmas)",
            e.observable,
            e.t,
            e.mean_diff,
            e.se_diff,
            e.within_bands,
            e.mean_diff.abs() / e.se_diff
        );
    }
    println!("passed={} ({:.2?})", rep.passed, t0.elapsed());
}

#[test]
#[ignore]
fn probe_one_block_full() {
    use hydrochain::experiments::{one_block, OneBlockConfig};
    let t0 = Instant::now();
    let cfg = OneBlockConfig {
        n: 256,
        beta: 1.0,
        delta1: 1.0,
        delta2: 1.0,
        potential: Potential::CosinePerturbed { amplitude: 0.5 },
        tau: 1.0,
        ks: vec![1, 2, 4, 8],
        l: 0.05,
        t_end: 0.5,
        samples: 100,
        seed: 31,
    };
    let rep = one_block(&cfg).unwrap();
    for e in &rep.entries {
        println!("k={}: {:.6e} ± {:.2e}", e.k, e.mean, e.se);
    }
    println!("monotone={} ({:.2?})", rep.monotone_within_bands, t0.elapsed());
}

#[test]
#[ignore]
fn probe_first_law_full() {
    use hydrochain::experiments::{first_law, FirstLawConfig};
    let t0 = Instant::now();
    let cfg = FirstLawConfig {
        n: 64,
        beta: 1.0,
        delta1: 1.0,
        delta2: 1.0,
        potential: Potential::Harmonic,
        tau0: 0.0,
        tau1: 1.0,
        t_star: 1.0,
        t_end: 5.0,
        realizations: 100,
        dt_factor: 1.0 / 16.0,
        macro_m: 256,
        seed: 99,
    };
    let rep = first_law(&cfg).unwrap();
    println!(
        "dE={:.4}±{:.4} W={:.4}±{:.4} Q={:.4}±{:.4}\nDU={:.4} DS={:.4} DF={:.4} macroW={:.4}\npathwise_resid={:.2e} gap={:.4} bands: work={} 2nd-law={} E-gap={:.1}σ",
        rep.energy_mean, rep.energy_se, rep.work_mean, rep.work_se, rep.heat_mean, rep.heat_se,
        rep.delta_u, rep.delta_s, rep.delta_f, rep.macro_work,
        rep.pathwise_residual_mean, rep.gap, rep.work_within_bands, rep.second_law_ok,
        rep.energy_gap_sigmas
    );
    println!("({:.2?})", t0.elapsed());
}
