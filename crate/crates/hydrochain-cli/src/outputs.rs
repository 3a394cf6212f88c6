//! Experiment dispatch and output management: CSV/JSON files plus the
//! manifest that makes every run reproducible.

use std::path::Path;

use serde::Serialize;

use hydrochain::experiments::{
    clausius, clausius_ladder, first_law, limit_check, one_block, relaxation, run_ensemble,
    ClausiusConfig, FirstLawConfig, LimitCheckConfig, OneBlockConfig, RelaxationConfig,
};
use hydrochain::micro::{SamplePlan, SimConfig};
use hydrochain::numerics::mean_se;
use hydrochain::output::{csv_document, fmt_f64};
use hydrochain::pde::{self, equilibrium_state, PdeConfig};
use hydrochain::rng::StreamFactory;
use hydrochain::{TensionProtocol, ThermoTable};

use crate::config::Resolved;
use crate::Failure;

#[derive(Serialize)]
struct Manifest<'a> {
    version: &'static str,
    command: &'a str,
    seed: u64,
    config: &'a crate::config::FlatConfig,
    outputs: Vec<String>,
}

struct OutDir<'a> {
    dir: &'a Path,
    written: Vec<String>,
}

impl<'a> OutDir<'a> {
    fn create(dir: &'a Path) -> Result<Self, Failure> {
        std::fs::create_dir_all(dir).map_err(|e| {
            Failure::Io(format!("cannot create output directory {}: {e}", dir.display()))
        })?;
        Ok(OutDir { dir, written: Vec::new() })
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), Failure> {
        let path = self.dir.join(name);
        std::fs::write(&path, contents)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))?;
        self.written.push(name.to_string());
        Ok(())
    }

    fn write_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), Failure> {
        let mut text = serde_json::to_string_pretty(value)
            .map_err(|e| Failure::Runtime(format!("serialization failed: {e}")))?;
        text.push('\n');
        self.write(name, &text)
    }

    fn finish(mut self, resolved: &Resolved) -> Result<(), Failure> {
        self.written.push("manifest.json".to_string());
        let manifest = Manifest {
            version: env!("CARGO_PKG_VERSION"),
            command: &resolved.command,
            seed: resolved.seed,
            config: &resolved.flat,
            outputs: self.written.clone(),
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Failure::Runtime(format!("serialization failed: {e}")))?;
        text.push('\n');
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
    }
}

pub fn dispatch(resolved: &Resolved) -> Result<(), Failure> {
    match resolved.command.as_str() {
        "thermo" => run_thermo(resolved),
        "micro-run" => run_micro(resolved),
        "pde-run" => run_pde(resolved),
        "limit-check" => run_limit_check(resolved),
        "clausius" => run_clausius(resolved),
        "relaxation" => run_relaxation(resolved),
        "first-law" => run_first_law(resolved),
        "one-block" => run_one_block(resolved),
        other => Err(Failure::Runtime(format!("unknown command {other}"))),
    }
}

fn table(resolved: &Resolved) -> Result<ThermoTable, Failure> {
    Ok(ThermoTable::new(resolved.potential, resolved.beta)?)
}

fn protocol(resolved: &Resolved) -> Result<TensionProtocol, Failure> {
    Ok(TensionProtocol::new(resolved.tau0, resolved.tau1, resolved.tstar)?)
}

fn run_thermo(resolved: &Resolved) -> Result<(), Failure> {
    let table = table(resolved)?;
    let (lo, hi, step) = resolved.tau_range;
    let count = ((hi - lo) / step).round() as usize;
    let taus = (0..=count).map(|k| lo + step * k as f64);
    let mut doc = String::from("tau,ell,F,Ghat,U,S\n");
    for row in table.rows(taus) {
        doc.push_str(&format!(
            "{},{},{},{},{},{}\n",
            fmt_f64(row.tau),
            fmt_f64(row.ell),
            fmt_f64(row.free_energy),
            fmt_f64(row.ghat),
            fmt_f64(row.internal_energy),
            fmt_f64(row.entropy)
        ));
    }
    print!("{doc}");
    Ok(())
}

fn run_micro(resolved: &Resolved) -> Result<(), Failure> {
    let protocol = protocol(resolved)?;
    let dt = resolved.dt.unwrap_or_else(|| {
        SimConfig::stability_limit(resolved.n, resolved.delta1, resolved.delta2, resolved.potential)
            * resolved.dt_factor
    });
    let cfg = SimConfig::with_dt(
        resolved.n,
        resolved.beta,
        resolved.delta1,
        resolved.delta2,
        dt,
        protocol,
        resolved.potential,
    )?;
    let plan = SamplePlan::uniform(resolved.t_end, 200);
    let streams = StreamFactory::new(resolved.seed);
    let runs = run_ensemble(&cfg, &streams, 0, resolved.realizations, &plan)?;

    let mut out = OutDir::create(&resolved.out)?;
    for (k, traj) in runs.iter().enumerate() {
        let rows = (0..traj.times.len()).map(|i| {
            vec![traj.times[i], traj.energy[i], traj.length[i], traj.work[i], traj.heat[i]]
        });
        out.write(&format!("trajectory_r{k:03}.csv"), &csv_document("t,E_N,L_N,W_N,Q_N", rows))?;
        let snap = (0..traj.final_state.n()).map(|i| {
            vec![(i + 1) as f64, traj.final_state.r[i], traj.final_state.p[i]]
        });
        out.write(&format!("snapshot_r{k:03}.csv"), &csv_document("i,r,p", snap))?;
    }
    // Ensemble aggregate: all realizations share the sample grid.
    let nt = runs[0].times.len();
    let agg = (0..nt).map(|i| {
        let col = |f: &dyn Fn(&hydrochain::micro::TrajectorySummary) -> f64| {
            let vals: Vec<f64> = runs.iter().map(|r| f(r)).collect();
            mean_se(&vals)
        };
        let (e, ese) = col(&|r| r.energy[i]);
        let (l, lse) = col(&|r| r.length[i]);
        let (w, wse) = col(&|r| r.work[i]);
        let (q, qse) = col(&|r| r.heat[i]);
        vec![runs[0].times[i], e, ese, l, lse, w, wse, q, qse]
    });
    out.write(
        "ensemble.csv",
        &csv_document("t,E_mean,E_se,L_mean,L_se,W_mean,W_se,Q_mean,Q_se", agg),
    )?;
    out.finish(resolved)
}

fn run_pde(resolved: &Resolved) -> Result<(), Failure> {
    let protocol = protocol(resolved)?;
    let table = table(resolved)?;
    let cfg = PdeConfig::new(resolved.m, resolved.delta1, resolved.delta2, protocol);
    let init = equilibrium_state(resolved.m, &protocol, &table);
    let traj = pde::integrate(init, &cfg, &table, resolved.t_end, &[])?;

    let mut out = OutDir::create(&resolved.out)?;
    let h = 1.0 / resolved.m as f64;
    let fields = (0..resolved.m).map(|j| {
        let r = traj.final_state.r[j];
        vec![(j as f64 + 0.5) * h, r, traj.final_state.p[j], table.tension(r)]
    });
    out.write("fields.csv", &csv_document("x,r,p,tau_of_r", fields))?;
    let series = (0..traj.times.len()).map(|i| {
        vec![
            traj.times[i],
            traj.free_energy[i],
            traj.length[i],
            traj.work[i],
            traj.dissipation_rate[i],
            traj.residual[i],
        ]
    });
    out.write("series.csv", &csv_document("t,F,L,W,dissipation,residual", series))?;
    out.finish(resolved)
}

fn run_limit_check(resolved: &Resolved) -> Result<(), Failure> {
    let cfg = LimitCheckConfig {
        ns: resolved.n_ladder.clone(),
        realizations: resolved.realizations,
        times: resolved.times.clone(),
        beta: resolved.beta,
        delta1: resolved.delta1,
        delta2: resolved.delta2,
        protocol: protocol(resolved)?,
        potential: resolved.potential,
        macro_m: resolved.m,
        seed: resolved.seed,
    };
    let report = limit_check(&cfg)?;
    let mut out = OutDir::create(&resolved.out)?;
    out.write_json("limit_check.json", &report)?;
    let rows = report.entries.iter().map(|e| {
        vec![
            e.n as f64,
            e.t,
            e.micro_mean_r,
            e.micro_se_r,
            e.micro_mean_p,
            e.micro_se_p,
            e.macro_r,
            e.macro_p,
            e.err,
            e.se,
            e.grid_budget,
        ]
    });
    // The J label rides along in the JSON; the CSV keeps numeric columns.
    out.write(
        "limit_entries.csv",
        &csv_document(
            "n,t,micro_mean_r,micro_se_r,micro_mean_p,micro_se_p,macro_r,macro_p,err,se,grid_budget",
            rows,
        ),
    )?;
    out.finish(resolved)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Bands("limit-check invariant bands violated".into()))
    }
}

fn run_clausius(resolved: &Resolved) -> Result<(), Failure> {
    let base = ClausiusConfig {
        m: resolved.m,
        beta: resolved.beta,
        delta1: resolved.delta1,
        delta2: resolved.delta2,
        potential: resolved.potential,
        tau0: resolved.tau0,
        tau1: resolved.tau1,
        t_star: resolved.tstar,
        t_end: Some(resolved.t_end),
    };
    let mut out = OutDir::create(&resolved.out)?;
    let passed = if resolved.tstar_ladder.len() > 1 {
        let report = clausius_ladder(&base, &resolved.tstar_ladder)?;
        out.write_json("clausius.json", &report)?;
        report.passed
    } else {
        let table = table(resolved)?;
        let report = clausius(&base, &table)?;
        out.write_json("clausius.json", &report)?;
        report.passed
    };
    out.finish(resolved)?;
    if passed {
        Ok(())
    } else {
        Err(Failure::Bands("clausius invariant bands violated".into()))
    }
}

fn run_relaxation(resolved: &Resolved) -> Result<(), Failure> {
    let cfg = RelaxationConfig {
        m: resolved.m,
        beta: resolved.beta,
        delta1: resolved.delta1,
        delta2: resolved.delta2,
        potential: resolved.potential,
        tau0: resolved.tau0,
        tau1: resolved.tau1,
        t_star: resolved.tstar,
        t_end: resolved.t_end,
    };
    let report = relaxation(&cfg)?;
    let mut out = OutDir::create(&resolved.out)?;
    out.write_json("relaxation.json", &report)?;
    out.finish(resolved)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Bands("relaxation fit bands violated".into()))
    }
}

fn run_first_law(resolved: &Resolved) -> Result<(), Failure> {
    let cfg = FirstLawConfig {
        n: resolved.n,
        beta: resolved.beta,
        delta1: resolved.delta1,
        delta2: resolved.delta2,
        potential: resolved.potential,
        tau0: resolved.tau0,
        tau1: resolved.tau1,
        t_star: resolved.tstar,
        t_end: resolved.t_end,
        realizations: resolved.realizations,
        dt_factor: resolved.dt_factor,
        macro_m: resolved.m,
        seed: resolved.seed,
    };
    let report = first_law(&cfg)?;
    let mut out = OutDir::create(&resolved.out)?;
    out.write_json("first_law.json", &report)?;
    out.finish(resolved)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Bands("first-law invariant bands violated".into()))
    }
}

fn run_one_block(resolved: &Resolved) -> Result<(), Failure> {
    let cfg = OneBlockConfig {
        n: resolved.n,
        beta: resolved.beta,
        delta1: resolved.delta1,
        delta2: resolved.delta2,
        potential: resolved.potential,
        tau: resolved.tau,
        ks: resolved.k_list.clone(),
        l: resolved.l,
        t_end: resolved.t_end,
        samples: resolved.samples,
        seed: resolved.seed,
    };
    let report = one_block(&cfg)?;
    let mut out = OutDir::create(&resolved.out)?;
    out.write_json("one_block.json", &report)?;
    out.finish(resolved)?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Bands("one-block monotonicity bands violated".into()))
    }
}
