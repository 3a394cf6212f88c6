//! Configuration resolution: defaults <- config file <- flags <- env seed.
//!
//! The config file is a flat key-value JSON object whose keys mirror the
//! command-line flags 1:1; a manifest written by a previous run is also
//! accepted (its `config` object is extracted). Unknown keys and type
//! mismatches are rejected with the offending key named.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use hydrochain::Potential;

use crate::Failure;

/// Command-line arguments shared by all subcommands; every field mirrors a
/// config-file key of the same name.
#[derive(Debug, Clone, clap::Args)]
pub struct CliArgs {
    /// Flat key-value JSON config file (or a manifest from a previous run);
    /// flags given on the command line override file values
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Interaction potential: `harmonic` or `cosine:a=<0..1>`
    #[arg(long)]
    pub potential: Option<String>,
    /// Inverse temperature
    #[arg(long)]
    pub beta: Option<f64>,
    /// Stretch-noise viscosity
    #[arg(long)]
    pub delta1: Option<f64>,
    /// Momentum-noise viscosity
    #[arg(long)]
    pub delta2: Option<f64>,
    /// Initial boundary tension
    #[arg(long, allow_negative_numbers = true)]
    pub tau0: Option<f64>,
    /// Final boundary tension
    #[arg(long, allow_negative_numbers = true)]
    pub tau1: Option<f64>,
    /// Switching time after which the tension is constant
    #[arg(long)]
    pub tstar: Option<f64>,
    /// Final integration time
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Chain size
    #[arg(long)]
    pub n: Option<usize>,
    /// Comma-separated chain sizes for the limit check, e.g. `64,128,256`
    #[arg(long)]
    pub n_ladder: Option<String>,
    /// Macro grid cells
    #[arg(long)]
    pub m: Option<usize>,
    /// Monte Carlo ensemble size
    #[arg(long)]
    pub realizations: Option<usize>,
    /// Micro timestep override (validated against the stability bound)
    #[arg(long)]
    pub dt: Option<f64>,
    /// Micro timestep as a fraction of the stability bound
    #[arg(long)]
    pub dt_factor: Option<f64>,
    /// Tension tabulation range `lo:hi:step` for the thermo command
    #[arg(long, allow_hyphen_values = true)]
    pub tau_range: Option<String>,
    /// Constant tension for stationary runs
    #[arg(long, allow_negative_numbers = true)]
    pub tau: Option<f64>,
    /// Comma-separated block half-widths for the one-block diagnostic
    #[arg(long)]
    pub k_list: Option<String>,
    /// Bulk cutoff fraction for the one-block diagnostic
    #[arg(long)]
    pub l: Option<f64>,
    /// Number of state samples along a stationary run
    #[arg(long)]
    pub samples: Option<usize>,
    /// Comma-separated probe times
    #[arg(long)]
    pub times: Option<String>,
    /// Comma-separated switching times for the Clausius ladder
    #[arg(long)]
    pub tstar_ladder: Option<String>,
    /// RNG seed (HYDROCHAIN_SEED environment variable overrides this)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker pool size; results are independent of this value
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output directory (created if missing)
    #[arg(long)]
    pub out: Option<String>,
    /// Print the resolved configuration and exit
    #[arg(long)]
    pub dry_run: bool,
}

/// The flat config schema: exactly the file keys, all optional.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub potential: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau0: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tstar: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_ladder: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dt_factor: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau_range: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_list: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub times: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tstar_ladder: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<String>,
}

/// Fully resolved run parameters, plus the flat config that reproduces them.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub command: String,
    pub flat: FlatConfig,
    pub potential: Potential,
    pub beta: f64,
    pub delta1: f64,
    pub delta2: f64,
    pub tau0: f64,
    pub tau1: f64,
    pub tstar: f64,
    pub t_end: f64,
    pub n: usize,
    pub n_ladder: Vec<usize>,
    pub m: usize,
    pub realizations: usize,
    pub dt: Option<f64>,
    pub dt_factor: f64,
    pub tau_range: (f64, f64, f64),
    pub tau: f64,
    pub k_list: Vec<usize>,
    pub l: f64,
    pub samples: usize,
    pub times: Vec<f64>,
    pub tstar_ladder: Vec<f64>,
    pub seed: u64,
    pub out: PathBuf,
    pub workers: Option<usize>,
    pub dry_run: bool,
}

fn bad(key: &str, detail: impl std::fmt::Display) -> Failure {
    Failure::Config(format!("invalid value for key `{key}`: {detail}"))
}

fn parse_f64_list(key: &str, s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(|tok| tok.trim().parse::<f64>().map_err(|e| bad(key, e)))
        .collect()
}

fn parse_usize_list(key: &str, s: &str) -> Result<Vec<usize>, Failure> {
    s.split(',')
        .map(|tok| tok.trim().parse::<usize>().map_err(|e| bad(key, e)))
        .collect()
}

fn parse_range(key: &str, s: &str) -> Result<(f64, f64, f64), Failure> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad(key, "expected `lo:hi:step`"));
    }
    let lo = parts[0].trim().parse::<f64>().map_err(|e| bad(key, e))?;
    let hi = parts[1].trim().parse::<f64>().map_err(|e| bad(key, e))?;
    let step = parts[2].trim().parse::<f64>().map_err(|e| bad(key, e))?;
    if !(step > 0.0) || hi < lo {
        return Err(bad(key, "need lo <= hi and step > 0"));
    }
    Ok((lo, hi, step))
}

fn load_file(path: &PathBuf) -> Result<FlatConfig, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("cannot read config {}: {e}", path.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Config(format!("config {} is not valid JSON: {e}", path.display())))?;
    // A manifest from a previous run nests the flat config under `config`.
    if let Some(inner) = value.get_mut("config") {
        value = inner.take();
    }
    let text = value.to_string();
    let mut de = serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let key = e.path().to_string();
        if key == "." {
            Failure::Config(format!("config {}: {}", path.display(), e.inner()))
        } else {
            Failure::Config(format!(
                "config {}: bad key `{key}`: {}",
                path.display(),
                e.inner()
            ))
        }
    })
}

impl Resolved {
    pub fn build(command: &str, args: &CliArgs) -> Result<Resolved, Failure> {
        let file = match &args.config {
            Some(path) => load_file(path)?,
            None => FlatConfig::default(),
        };

        // Command-specific defaults, desk-scale.
        let default_t_end = |tstar: f64| match command {
            "clausius" | "relaxation" => tstar + 10.0,
            "first-law" => tstar + 4.0,
            "one-block" | "limit-check" => 0.5,
            _ => 1.0,
        };
        let default_realizations: usize = match command {
            "limit-check" => 200,
            "first-law" => 50,
            _ => 8,
        };

        let potential_spec = args
            .potential
            .clone()
            .or(file.potential.clone())
            .unwrap_or_else(|| "harmonic".to_string());
        let potential = Potential::parse(&potential_spec)
            .map_err(|e| bad("potential", e))?;

        let beta = args.beta.or(file.beta).unwrap_or(1.0);
        let delta1 = args.delta1.or(file.delta1).unwrap_or(1.0);
        let delta2 = args.delta2.or(file.delta2).unwrap_or(1.0);
        let tau0 = args.tau0.or(file.tau0).unwrap_or(0.0);
        let tau1 = args.tau1.or(file.tau1).unwrap_or(1.0);
        let tstar = args.tstar.or(file.tstar).unwrap_or(1.0);
        let t_end = args.t_end.or(file.t_end).unwrap_or_else(|| default_t_end(tstar));
        let n = args.n.or(file.n).unwrap_or(match command {
            "one-block" => 256,
            _ => 64,
        });
        let n_ladder_spec = args
            .n_ladder
            .clone()
            .or(file.n_ladder.clone())
            .unwrap_or_else(|| "64,128,256".to_string());
        let n_ladder = parse_usize_list("n_ladder", &n_ladder_spec)?;
        let m = args.m.or(file.m).unwrap_or(match command {
            "limit-check" => 2 * n_ladder.iter().copied().max().unwrap_or(256),
            _ => 256,
        });
        let realizations =
            args.realizations.or(file.realizations).unwrap_or(default_realizations);
        let dt = args.dt.or(file.dt);
        // Quadratic observables carry an O(dt) weak bias, so the first-law
        // ensemble defaults to a timestep well inside the stability limit.
        let dt_factor = args.dt_factor.or(file.dt_factor).unwrap_or(match command {
            "first-law" => 1.0 / 16.0,
            _ => 1.0,
        });
        let tau_range_spec = args
            .tau_range
            .clone()
            .or(file.tau_range.clone())
            .unwrap_or_else(|| "-2:2:0.1".to_string());
        let tau_range = parse_range("tau_range", &tau_range_spec)?;
        let tau = args.tau.or(file.tau).unwrap_or(1.0);
        let k_list_spec =
            args.k_list.clone().or(file.k_list.clone()).unwrap_or_else(|| "1,2,4,8".to_string());
        let k_list = parse_usize_list("k_list", &k_list_spec)?;
        let l = args.l.or(file.l).unwrap_or(0.05);
        let samples = args.samples.or(file.samples).unwrap_or(100);
        let times_spec =
            args.times.clone().or(file.times.clone()).unwrap_or_else(|| "0.5".to_string());
        let times = parse_f64_list("times", &times_spec)?;
        let tstar_ladder_spec = args
            .tstar_ladder
            .clone()
            .or(file.tstar_ladder.clone())
            .unwrap_or_else(|| tstar.to_string());
        let tstar_ladder = parse_f64_list("tstar_ladder", &tstar_ladder_spec)?;

        // Environment override takes precedence over the flag, which in turn
        // overrides the file.
        let seed = match std::env::var("HYDROCHAIN_SEED") {
            Ok(v) => v.parse::<u64>().map_err(|e| bad("HYDROCHAIN_SEED", e))?,
            Err(_) => args.seed.or(file.seed).unwrap_or(12345),
        };
        let out = PathBuf::from(
            args.out.clone().or(file.out.clone()).unwrap_or_else(|| "hydrochain_out".to_string()),
        );

        // Validation with named keys.
        if !(beta > 0.0) {
            return Err(bad("beta", "must be positive"));
        }
        if delta1 < 0.0 || delta2 < 0.0 {
            return Err(bad("delta1/delta2", "viscosities must be nonnegative"));
        }
        if !(tstar > 0.0) {
            return Err(bad("tstar", "must be positive"));
        }
        if n < 3 {
            return Err(bad("n", "chain needs at least 3 sites"));
        }
        if m < 8 {
            return Err(bad("m", "macro grid needs at least 8 cells"));
        }
        if !(0.0 < dt_factor && dt_factor <= 1.0) {
            return Err(bad("dt_factor", "must lie in (0, 1]"));
        }
        if let Some(dt) = dt {
            let limit =
                hydrochain::micro::SimConfig::stability_limit(n, delta1, delta2, potential);
            if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
                return Err(bad(
                    "dt",
                    format!("{dt:e} violates the stability bound {limit:e} for n={n}"),
                ));
            }
        }

        // The flat config that reproduces this resolution (env folded into
        // the seed field; every relevant key made explicit).
        let flat = FlatConfig {
            potential: Some(potential.name()),
            beta: Some(beta),
            delta1: Some(delta1),
            delta2: Some(delta2),
            tau0: Some(tau0),
            tau1: Some(tau1),
            tstar: Some(tstar),
            t_end: Some(t_end),
            n: Some(n),
            n_ladder: Some(n_ladder.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")),
            m: Some(m),
            realizations: Some(realizations),
            dt,
            dt_factor: Some(dt_factor),
            tau_range: Some(tau_range_spec),
            tau: Some(tau),
            k_list: Some(k_list.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")),
            l: Some(l),
            samples: Some(samples),
            times: Some(times.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")),
            tstar_ladder: Some(
                tstar_ladder.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
            ),
            seed: Some(seed),
            out: Some(out.display().to_string()),
        };

        Ok(Resolved {
            command: command.to_string(),
            flat,
            potential,
            beta,
            delta1,
            delta2,
            tau0,
            tau1,
            tstar,
            t_end,
            n,
            n_ladder,
            m,
            realizations,
            dt,
            dt_factor,
            tau_range,
            tau,
            k_list,
            l,
            samples,
            times,
            tstar_ladder,
            seed,
            out,
            workers: args.workers,
            dry_run: args.dry_run,
        })
    }

    pub fn config_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.flat).expect("serializable config")
    }
}
