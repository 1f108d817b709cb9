//! Subcommand implementations.

use std::fmt::Write as _;
use std::time::Instant;

use fockfade_core::channel::Cutoffs;
use fockfade_core::experiments::{
    memory_threshold, optimize_t, single_photon_ratio, Averaging, Metric, Objective, Setting, StateSource, Sweep,
    SweepConfig, SweepRow, TChoice, TGrid, DEFAULT_CHI, THRESHOLD_SCAN_POINTS,
};
use fockfade_core::fading::{mean_intensity_transmittance, mean_loss_db, solve_sigma_for_loss, FadingChannel};
use fockfade_core::fockstate::{Family, Squeezing, StateRecipe};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::Resolved;
use crate::format::{parse_grid, sig9};
use crate::output::{pretty, with_suffix, write_atomic, Manifest, TOOL};
use crate::{CliError, Invocation};

pub const THREADS_ENV: &str = "FOCKFADE_THREADS";

pub const CSV_HEADER: &str = "loss_db,state,E_LN,P_c,R_E,trace_deficit";

enum Primary {
    Csv(String),
    Json(Value),
}

struct Output {
    primary: Primary,
    details: Value,
}

fn thread_pool() -> Result<rayon::ThreadPool, CliError> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'"))),
        },
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))
}

/// Runs one invocation and writes its outputs.
pub fn execute(inv: &Invocation) -> Result<(), CliError> {
    let start = Instant::now();
    let pool = thread_pool()?;
    let r = &inv.resolved;
    let out = match inv.subcommand.as_str() {
        "sweep" => sweep(r, &pool)?,
        "optimize-t" => optimize(r)?,
        "threshold" => threshold(r)?,
        "compare-bell" => compare_bell(r, &pool)?,
        "channel-info" => channel_info(r)?,
        other => return Err(CliError::Usage(format!("unknown subcommand '{other}'"))),
    };
    let mut outputs = Vec::new();
    match &out.primary {
        Primary::Csv(csv) => {
            let stem = inv.out.as_deref().ok_or_else(|| CliError::Usage("--out is required".into()))?;
            let path = with_suffix(stem, ".csv");
            write_atomic(&path, csv.as_bytes())?;
            outputs.push(path.display().to_string());
        }
        Primary::Json(v) => {
            let bytes = pretty(v);
            if let Some(stem) = &inv.out {
                let path = with_suffix(stem, ".json");
                write_atomic(&path, &bytes)?;
                outputs.push(path.display().to_string());
            }
            print!("{}", String::from_utf8_lossy(&bytes));
        }
    }
    if let Some(stem) = &inv.out {
        let path = with_suffix(stem, ".manifest.json");
        let manifest = Manifest {
            tool: TOOL.into(),
            version: env!("CARGO_PKG_VERSION").into(),
            subcommand: inv.subcommand.clone(),
            out: stem.clone(),
            config: r.values(),
            sources: r.sources(),
            config_file: inv.config_file.clone(),
            outputs,
            threads: pool.current_num_threads(),
            wall_clock_s: start.elapsed().as_secs_f64(),
            details: out.details,
        };
        write_atomic(&path, &pretty(&manifest))?;
        eprintln!("wrote {}", manifest.outputs.join(", "));
    }
    Ok(())
}

fn squeezing(r: &Resolved, key: &str) -> Result<(f64, Squeezing), CliError> {
    let db: f64 = r.require(key)?;
    Ok((db, Squeezing::from_db(db)?))
}

fn t_choice(r: &Resolved) -> Result<TChoice, CliError> {
    let raw: String = r.require("t")?;
    Ok(match raw.trim() {
        "rate" => TChoice::MaxInitialRate,
        "eln" => TChoice::MaxInitialEln,
        v => TChoice::Fixed(
            v.parse()
                .map_err(|_| CliError::Usage(format!("invalid value '{v}' for t: expected rate, eln or a number")))?,
        ),
    })
}

fn cutoffs(r: &Resolved, db: f64) -> Result<Cutoffs, CliError> {
    Ok(r.get::<usize>("cutoff")?.map_or_else(|| Cutoffs::for_squeezing_db(db), Cutoffs::uniform))
}

/// `(chi1, chi2)`: `chi` sets both, `chi1`/`chi2` override, otherwise the setting's defaults.
fn noise(r: &Resolved, setting: Setting) -> Result<(f64, f64), CliError> {
    let both: Option<f64> = r.get("chi")?;
    let chi1_default = match setting {
        Setting::Asymmetric => 0.0,
        Setting::Symmetric => DEFAULT_CHI,
    };
    let chi1 = r.get("chi1")?.or(both).unwrap_or(chi1_default);
    let chi2 = r.get("chi2")?.or(both).unwrap_or(DEFAULT_CHI);
    Ok((chi1, chi2))
}

fn check_losses(losses: &[f64], spot_ratio: f64) -> Result<(), CliError> {
    let floor = FadingChannel::new(1.0, 1.0, spot_ratio)?.minimum_loss_db();
    if let Some(bad) = losses.iter().find(|&&l| l <= floor) {
        return Err(CliError::Usage(format!(
            "mean loss {bad} dB is not above the minimum {floor:.4} dB reachable with spot ratio {spot_ratio}"
        )));
    }
    Ok(())
}

/// `tmsv`, `pss_b`, …, `noon` (two photons) or `noon_N`.
fn parse_state(label: &str) -> Result<(Family, u32), CliError> {
    let label = label.trim().to_ascii_lowercase();
    if let Some(n) = label.strip_prefix("noon_") {
        let n = n.parse().map_err(|_| CliError::Usage(format!("invalid NOON state '{label}'")))?;
        return Ok((Family::Noon, n));
    }
    Ok((label.parse::<Family>()?, 2))
}

fn sweep_config(r: &Resolved) -> Result<SweepConfig, CliError> {
    let setting: Setting = r.require("setting")?;
    let averaging: Averaging = r.require("mode")?;
    let (_, sq) = squeezing(r, "squeezing-db")?;
    let t = t_choice(r)?;
    let calibrate: Option<f64> = r.get("calibrate-eln")?;
    let calibration_t: f64 = r.require("calibration-t")?;
    let states_raw: String = r.require("states")?;
    let mut states = Vec::new();
    let mut labels: Vec<String> = Vec::new();
    for item in states_raw.split(',').filter(|s| !s.trim().is_empty()) {
        let (family, n) = parse_state(item)?;
        let source = match (calibrate, family) {
            (Some(target_eln), _) => StateSource::Calibrated {
                family,
                transmissivity: calibration_t,
                target_eln,
                noon_n: n,
            },
            (None, Family::Noon) => StateSource::Recipe(StateRecipe::noon(n)?),
            (None, _) => StateSource::Derived { family, squeezing: sq, t },
        };
        let label = if family == Family::Noon { format!("noon_{n}") } else { family.label().to_string() };
        if labels.contains(&label) {
            return Err(CliError::Usage(format!("state '{label}' is listed twice")));
        }
        labels.push(label);
        states.push(source);
    }
    let losses = parse_grid("losses", &r.require::<String>("losses")?)?;
    let spot_ratio: f64 = r.require("spot-ratio")?;
    check_losses(&losses, spot_ratio)?;
    let mut cfg = SweepConfig::new(setting, averaging, states, losses);
    (cfg.chi1, cfg.chi2) = noise(r, setting)?;
    cfg.metric = r.require::<Metric>("metric")?;
    cfg.n_max = r.require("n-max")?;
    cfg.spot_ratio = spot_ratio;
    cfg.quadrature_order = r.get("quadrature-order")?;
    cfg.epsilon = r.require("epsilon")?;
    cfg.cutoffs = r.get::<usize>("cutoff")?.map(|f| Cutoffs::uniform(f).with_epsilon(cfg.epsilon));
    cfg.validate()?;
    Ok(cfg)
}

fn opt(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_default()
}

pub fn render_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for row in rows {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{}",
            sig9(row.loss_db),
            row.state,
            opt(row.eln),
            sig9(row.p_c),
            opt(row.rate),
            sig9(row.trace_deficit)
        );
    }
    s
}

fn sweep(r: &Resolved, pool: &rayon::ThreadPool) -> Result<Output, CliError> {
    let cfg = sweep_config(r)?;
    let sweep = Sweep::prepare(cfg)?;
    let points: Vec<_> = pool.install(|| (0..sweep.len()).into_par_iter().map(|i| sweep.run_point(i)).collect());
    let points = points.into_iter().collect::<Result<Vec<_>, _>>()?;
    let result = sweep.assemble(points);
    let cfg = sweep.config();
    let c = result.cutoffs;
    let mut orders: Vec<usize> = result.rows.iter().map(|row| row.quadrature_order).collect();
    orders.sort_unstable();
    orders.dedup();
    let details = json!({
        "setting": cfg.setting.label(),
        "mode": cfg.averaging.label(),
        "chi1": cfg.chi1,
        "chi2": cfg.chi2,
        "loss_grid_db": cfg.loss_grid_db,
        "cutoffs": {"f_max": c.f_max, "ell_max": c.ell_max, "ellp_max": c.ellp_max, "epsilon": c.epsilon},
        "quadrature_orders": orders,
        "states": result.states.iter().map(|s| json!({
            "label": s.label,
            "family": s.recipe.family().label(),
            "squeezing_db": s.recipe.squeezing().map(|q| q.db()),
            "lambda": s.recipe.squeezing().map(|q| q.lambda()),
            "transmissivity": s.recipe.transmissivity(),
            "noon_n": s.recipe.noon_n(),
            "p_c": s.p_c,
            "initial_eln": s.initial_eln,
        })).collect::<Vec<_>>(),
        "rows": result.rows.iter().map(|row| json!({
            "loss_db": row.loss_db,
            "state": row.state,
            "sigma_b": row.sigma_b,
            "quadrature_order": row.quadrature_order,
            "trace_deficit": row.trace_deficit,
        })).collect::<Vec<_>>(),
    });
    Ok(Output {
        primary: Primary::Csv(render_csv(&result.rows)),
        details,
    })
}

fn photon_family(r: &Resolved) -> Result<Family, CliError> {
    let family: Family = r.require("family")?;
    if !family.needs_transmissivity() {
        return Err(CliError::Usage(format!("--family must be a photon-operation family, got {family}")));
    }
    Ok(family)
}

fn optimize(r: &Resolved) -> Result<Output, CliError> {
    let family = photon_family(r)?;
    let (db, sq) = squeezing(r, "squeezing-db")?;
    let objective_name: String = r.require("objective")?;
    let loss: Option<f64> = r.get("loss-db")?;
    let objective = match (objective_name.trim(), loss) {
        ("eln", None) => Objective::InitialEln,
        ("eln", Some(_)) => return Err(CliError::Usage("--loss-db only applies to --objective rate".into())),
        ("rate", None) => Objective::InitialRate,
        ("rate", Some(loss_db)) => {
            check_losses(&[loss_db], fockfade_core::fading::DEFAULT_SPOT_RATIO)?;
            let setting: Setting = r.require("setting")?;
            let (chi1, chi2) = noise(r, setting)?;
            Objective::RateAtLoss {
                loss_db,
                setting,
                averaging: r.require("mode")?,
                chi1,
                chi2,
            }
        }
        (other, _) => return Err(CliError::Usage(format!("invalid value '{other}' for objective: expected eln or rate"))),
    };
    let grid = TGrid {
        t_min: r.require("t-min")?,
        coarse: r.require("t-step")?,
        fine: r.require("t-fine")?,
    };
    let o = optimize_t(family, sq, &objective, &grid, r.require("n-max")?)?;
    let result = json!({
        "family": family.label(),
        "squeezing_db": db,
        "objective": objective_name.trim(),
        "loss_db": loss,
        "t": o.t,
        "value": o.value,
        "p_c": o.p_c,
        "degenerate": o.degenerate,
    });
    let details = match objective {
        Objective::RateAtLoss { setting, averaging, chi1, chi2, .. } => json!({
            "setting": setting.label(), "mode": averaging.label(), "chi1": chi1, "chi2": chi2,
            "cutoffs_f_max": Cutoffs::for_squeezing_db(sq.db()).f_max,
        }),
        _ => json!({}),
    };
    Ok(Output {
        primary: Primary::Json(result),
        details,
    })
}

fn threshold(r: &Resolved) -> Result<Output, CliError> {
    let family = photon_family(r)?;
    let (db, sq) = squeezing(r, "squeezing-db")?;
    let loss: f64 = r.require("loss-db")?;
    let chi: f64 = r.require("chi")?;
    let n_max: usize = r.require("n-max")?;
    let spot_ratio: f64 = r.require("spot-ratio")?;
    check_losses(&[loss], spot_ratio)?;
    let t = match t_choice(r)? {
        TChoice::Fixed(t) => t,
        TChoice::MaxInitialRate => optimize_t(family, sq, &Objective::InitialRate, &TGrid::default(), n_max)?.t,
        TChoice::MaxInitialEln => optimize_t(family, sq, &Objective::InitialEln, &TGrid::default(), n_max)?.t,
    };
    let ng = StateRecipe::photon_operation(family, sq, t)?;
    let ch = solve_sigma_for_loss(loss, 1.0, spot_ratio)?;
    let cut = cutoffs(r, sq.db())?;
    let th = memory_threshold(&ng, &StateRecipe::tmsv(sq), &ch, chi, cut, n_max)?;
    let result = json!({
        "family": family.label(),
        "squeezing_db": db,
        "loss_db": loss,
        "chi": chi,
        "t": t,
        "p_c": th.p_c,
        "sigma_b": ch.sigma_b(),
        "eta_th": th.eta_th,
        "mu": th.mu,
        "timescale_factor": th.timescale_factor,
        "interior_roots": th.interior_roots,
        "boundary_root": th.boundary_root,
        "full_ratio": th.full_ratio,
    });
    Ok(Output {
        primary: Primary::Json(result),
        details: json!({"cutoffs_f_max": cut.f_max, "scan_points": THRESHOLD_SCAN_POINTS}),
    })
}

fn compare_bell(r: &Resolved, pool: &rayon::ThreadPool) -> Result<Output, CliError> {
    let squeezings = parse_grid("squeezing-db", &r.require::<String>("squeezing-db")?)?;
    let losses = parse_grid("losses", &r.require::<String>("losses")?)?;
    let chi: f64 = r.require("chi")?;
    let spot_ratio: f64 = r.require("spot-ratio")?;
    check_losses(&losses, spot_ratio)?;
    let sqs = squeezings.iter().map(|&db| Ok((db, Squeezing::from_db(db)?))).collect::<Result<Vec<_>, fockfade_core::Error>>()?;
    let rows: Vec<_> = pool.install(|| {
        losses
            .par_iter()
            .map(|&loss| -> Result<Vec<Value>, fockfade_core::Error> {
                let ch = solve_sigma_for_loss(loss, 1.0, spot_ratio)?;
                sqs.iter()
                    .map(|&(db, sq)| {
                        let c = single_photon_ratio(sq, &ch, chi).map_err(|e| e.context(format!("{db} dB source at {loss} dB")))?;
                        Ok(json!({
                            "squeezing_db": db,
                            "loss_db": loss,
                            "sigma_b": ch.sigma_b(),
                            "ratio": c.ratio,
                            "tmsv_rate": c.tmsv_rate,
                            "bell_rate": c.bell_rate,
                        }))
                    })
                    .collect()
            })
            .collect()
    });
    let rows: Vec<Value> = rows.into_iter().collect::<Result<Vec<_>, _>>()?.into_iter().flatten().collect();
    Ok(Output {
        primary: Primary::Json(json!({"chi": chi, "rows": rows})),
        details: json!({}),
    })
}

fn channel_info(r: &Resolved) -> Result<Output, CliError> {
    let spot_ratio: f64 = r.require("spot-ratio")?;
    let ch = match (r.get::<f64>("target-loss-db")?, r.get::<f64>("sigma-b")?) {
        (Some(loss), None) => {
            check_losses(&[loss], spot_ratio)?;
            solve_sigma_for_loss(loss, 1.0, spot_ratio)?
        }
        (None, Some(sigma)) => FadingChannel::new(sigma, 1.0, spot_ratio)?,
        _ => return Err(CliError::Usage("give exactly one of --target-loss-db and --sigma-b".into())),
    };
    let result = json!({
        "sigma_b": ch.sigma_b(),
        "beta": ch.beta(),
        "spot_ratio": ch.spot_ratio(),
        "h": ch.h(),
        "eta0": ch.eta0(),
        "gamma_s": ch.gamma_s(),
        "L": ch.l_scale(),
        "mean_T": mean_intensity_transmittance(&ch),
        "mean_loss_db": mean_loss_db(&ch),
        "minimum_loss_db": ch.minimum_loss_db(),
    });
    Ok(Output {
        primary: Primary::Json(result),
        details: json!({}),
    })
}
