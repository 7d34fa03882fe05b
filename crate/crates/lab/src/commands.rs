//! The subcommands. Each reads its keys from a [`Config`], writes into a
//! [`RunDir`] and maps failures to exit codes through [`CliError`].

use std::f64::consts::{FRAC_PI_2, PI};
use std::path::{Path, PathBuf};

use flatbeam_core::closed_forms::{
    flat_solution_1d, free_boundary_solution_1d, power_solution_nonautonomous, residual_1d, subcritical_solution_1d,
    ClosedForm1D, Kind, Profile, J_FLAT,
};
use flatbeam_core::elliptic2d::{wings_experiment, WingsRow, WingsSpec};
use flatbeam_core::polar_matching::{
    assemble_subsolution_with, build_supersolution, robin_margin, subsolution_field, SubParams, SubsolutionField,
};
use flatbeam_core::timemap::{classify, gamma_flat, lambda_one, lambda_star, Regime};
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::{CliError, CliResult};
use crate::output::{fmt_f64, RunDir};
use crate::pipeline::{
    self, choose_subsolution, grid_from, model_for, super_json, ParabolicParams, Solve2dParams, PARABOLIC_KEYS,
    SOLVE2D_KEYS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve1d,
    Bifurcation,
    Solve2d,
    Wings,
    Parabolic,
    VerifySub,
    VerifySuper,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::Solve1d,
        Command::Bifurcation,
        Command::Solve2d,
        Command::Wings,
        Command::Parabolic,
        Command::VerifySub,
        Command::VerifySuper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Solve1d => "solve1d",
            Command::Bifurcation => "bifurcation",
            Command::Solve2d => "solve2d",
            Command::Wings => "wings",
            Command::Parabolic => "parabolic",
            Command::VerifySub => "verify-sub",
            Command::VerifySuper => "verify-super",
        }
    }

    pub fn from_name(name: &str) -> Option<Command> {
        Command::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn about(self) -> &'static str {
        match self {
            Command::Solve1d => "1D profile for constant current j, or for j = lambda y^q",
            Command::Bifurcation => "Regimes and sup-norms of the angular problem over a lambda grid",
            Command::Solve2d => "Sub/supersolution iteration on the rectangle with verification report",
            Command::Wings => "Cathode edge flux under refinement for several beta",
            Command::Parabolic => "IMEX evolution towards the steady state and comparison decay",
            Command::VerifySub => "Assemble and check the angular subsolution",
            Command::VerifySuper => "Build and check the three-region supersolution",
        }
    }

    pub fn keys(self) -> &'static [&'static str] {
        match self {
            Command::Solve1d => &["j", "q", "lambda", "n", "tol"],
            Command::Bifurcation => &["V0", "R", "lambda_min", "lambda_max", "n_lambda", "tol"],
            Command::Solve2d => SOLVE2D_KEYS,
            Command::Wings => &["a", "b", "A", "betas", "Nx", "Ny", "levels", "tol", "max_iter", "fit_rows"],
            Command::Parabolic => PARABOLIC_KEYS,
            Command::VerifySub => &["a", "b", "A", "beta", "Nx", "Ny", "eps", "slack", "h", "n_theta", "margin"],
            Command::VerifySuper => &["a", "b", "A", "beta", "V0", "Nx", "Ny", "n_theta"],
        }
    }
}

/// Creates the run directory, runs `cmd` and writes `config.echo`, also on
/// failure. Returns the run directory with the outcome.
pub fn execute(cmd: Command, cfg: &Config, outdir: &Path, run: Option<&str>) -> (Option<PathBuf>, CliResult<()>) {
    let dir = match RunDir::create(outdir, cmd.name(), run) {
        Ok(d) => d,
        Err(e) => return (None, Err(e)),
    };
    let result = match cmd {
        Command::Solve1d => solve1d(cfg, &dir),
        Command::Bifurcation => bifurcation(cfg, &dir),
        Command::Solve2d => solve2d(cfg, &dir),
        Command::Wings => wings(cfg, &dir),
        Command::Parabolic => parabolic(cfg, &dir),
        Command::VerifySub => verify_sub(cfg, &dir),
        Command::VerifySuper => verify_super(cfg, &dir),
    };
    let result = match result {
        Err(e) => {
            // Keep an explanation next to the echo; the first error wins.
            let _ = dir.json("error.json", &json!({"exit_code": e.code(), "message": e.to_string()}));
            Err(e)
        }
        ok => ok,
    };
    let echoed = dir.text("config.echo", &cfg.echo());
    (Some(dir.path.clone()), result.and(echoed))
}

fn num(v: f64) -> String {
    fmt_f64(v)
}

fn opt_num(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

pub fn solve1d(cfg: &Config, dir: &RunDir) -> CliResult<()> {
    let n = cfg.usize("n", 1000)?.max(2);
    let tol = cfg.f64("tol", 1e-12)?;
    let (sol, j_label): (ClosedForm1D, Value) = match cfg.opt_f64("lambda")? {
        Some(lambda) => {
            let q = cfg.f64("q", 0.0)?;
            (power_solution_nonautonomous(q, lambda)?, json!({"lambda": lambda, "q": q}))
        }
        None => {
            if cfg.raw("q").is_some() {
                return Err(CliError::Validation("q needs lambda".into()));
            }
            let j = cfg.f64("j", J_FLAT)?;
            let sol = if !(j > 0.0) {
                return Err(CliError::Validation(format!("j = {j} selects no regime; j must be positive")));
            } else if (j - J_FLAT).abs() <= 1e-12 {
                flat_solution_1d()
            } else if j > J_FLAT {
                free_boundary_solution_1d(j)?
            } else {
                subcritical_solution_1d(j, tol)?
            };
            (sol, json!({"j": j}))
        }
    };
    dir.csv(
        "profile.csv",
        &["y", "u", "u_prime"],
        (0..=n).map(|i| {
            let y = i as f64 / n as f64;
            vec![num(y), num(sol.eval(y)), num(sol.derivative(y))]
        }),
    )?;
    let coefficient = |y: f64| sol.coefficient(y);
    let residual = residual_1d(Profile::Analytic(&sol), &coefficient, n, 1e-3);
    let kind = match sol.kind {
        Kind::Solution => "solution",
        Kind::Subsolution { .. } => "subsolution",
    };
    dir.json(
        "summary.json",
        &json!({
            "input": j_label,
            "regime": sol.regime.name(),
            "kind": kind,
            "xi": sol.xi,
            "amp": sol.amp,
            "K0": sol.slope_at_zero(),
            "exponent": sol.exponent(),
            "residual_max": residual.max,
            "residual_argmax": residual.argmax,
        }),
    )
}

pub fn bifurcation(cfg: &Config, dir: &RunDir) -> CliResult<()> {
    let v0 = cfg.f64("V0", 1.0)?;
    let r = cfg.f64("R", FRAC_PI_2)?;
    if !(v0 > 0.0 && r > 0.0) {
        return Err(CliError::Validation(format!("V0 = {v0} and R = {r} must be positive")));
    }
    let l1 = lambda_one(r);
    let star = lambda_star(r)?;
    let lo = cfg.f64("lambda_min", 0.5 * l1)?;
    let hi = cfg.f64("lambda_max", 2.0 * star)?;
    let n = cfg.usize("n_lambda", 200)?;
    let tol = cfg.f64("tol", 1e-12)?;
    if !(lo > 0.0 && hi > lo && n >= 2) {
        return Err(CliError::Validation(format!("need 0 < lambda_min < lambda_max and n_lambda >= 2 (got {lo}, {hi}, {n})")));
    }
    let mut grid: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    grid.extend([l1, star].into_iter().filter(|&l| l >= lo && l <= hi));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let points = grid.iter().map(|&l| classify(l, v0, r)).collect::<Result<Vec<_>, _>>()?;
    dir.csv(
        "bifurcation.csv",
        &["lambda", "sup_norm", "regime", "mu"],
        grid.iter().zip(&points).map(|(&l, p)| vec![num(l), opt_num(p.sup_norm), p.regime.name().into(), opt_num(p.mu)]),
    )?;
    let count = |reg: Regime| points.iter().filter(|p| p.regime == reg).count();
    dir.json(
        "summary.json",
        &json!({
            "V0": v0,
            "R": r,
            "lambda1": l1,
            "lambda_star": star,
            "gamma_rF": gamma_flat(tol)?,
            "flat_sup_norm": (4.0 * v0 / star).powf(2.0 / 3.0),
            "rows": {
                "NoSolution": count(Regime::NoSolution),
                "UniquePositive": count(Regime::UniquePositive),
                "Flat": count(Regime::Flat),
                "CompactSupportFamily": count(Regime::CompactSupportFamily),
            },
        }),
    )
}

pub fn solve2d(cfg: &Config, dir: &RunDir) -> CliResult<()> {
    let params = Solve2dParams::from_config(cfg)?;
    let out = match pipeline::solve2d(&params) {
        Ok(o) => o,
        Err(e) => {
            if let CliError::Infeasible(m) = &e {
                dir.json("summary.json", &json!({"status": "infeasible", "feasibility_report": m}))?;
            }
            return Err(e);
        }
    };
    dir.field("sub.csv", &out.sub_field)?;
    dir.field("u_min.csv", &out.u_min)?;
    dir.field("u_max.csv", &out.u_max)?;
    dir.csv(
        "exponent_fits.csv",
        &["x_fraction", "x", "exponent", "rows_used"],
        out.fits.iter().map(|(x, f)| {
            let g = params.grid;
            let xc = g.x(g.column_of(if *x < 0.0 { x * g.a } else { x * g.b }));
            vec![num(*x), num(xc), num(f.exponent), f.rows_used.to_string()]
        }),
    )?;
    dir.csv("flux.csv", &["x", "flux"], out.flux.iter().map(|(x, f)| vec![num(*x), num(*f)]))?;
    let verification = out.verification();
    dir.json("verification.json", &verification)?;
    dir.json("summary.json", &verification)?;
    if !out.converged() {
        return Err(CliError::Numeric(format!(
            "monotone iteration did not converge in {} iterations",
            params.max_iter
        )));
    }
    Ok(())
}

fn wings_row(r: &WingsRow) -> Vec<String> {
    vec![
        num(r.beta),
        (r.nx + 1).to_string(),
        (r.ny + 1).to_string(),
        num(r.min_cathode_flux),
        num(r.flux_at_minus_half),
        num(r.fit_at_minus_half),
        num(r.fit_at_half),
        num(r.column_j_slope),
        r.report.iterations.to_string(),
        r.report.converged.to_string(),
        r.report.floor_activations.to_string(),
    ]
}

pub fn wings_spec(cfg: &Config) -> CliResult<WingsSpec> {
    let grid = grid_from(cfg, 65, 33)?;
    Ok(WingsSpec {
        a: grid.a,
        b: grid.b,
        nx: grid.nx,
        ny: grid.ny,
        levels: cfg.usize("levels", 3)?,
        amplitude: cfg.f64("A", 0.35)?,
        betas: cfg.f64_list("betas", &[0.0, 0.25])?,
        tol: cfg.f64("tol", 1e-10)?,
        max_iter: cfg.usize("max_iter", 20000)?,
        fit_rows: cfg.usize("fit_rows", 8)?,
    })
}

/// Per-β ratios of consecutive levels of the flux at `x = -a/2`.
pub fn flux_ratios(rows: &[WingsRow], beta: f64) -> Vec<f64> {
    let f: Vec<f64> = rows.iter().filter(|r| r.beta == beta).map(|r| r.flux_at_minus_half).collect();
    f.windows(2).map(|w| w[0] / w[1]).collect()
}

pub fn wings(cfg: &Config, dir: &RunDir) -> CliResult<()> {
    let spec = wings_spec(cfg)?;
    let rows = wings_experiment(&spec)?;
    dir.csv(
        "wings.csv",
        &[
            "beta",
            "Nx",
            "Ny",
            "min_cathode_flux",
            "flux_at_minus_half",
            "fit_at_minus_half",
            "fit_at_half",
            "column_j_slope",
            "iterations",
            "converged",
            "floor_activations",
        ],
        rows.iter().map(wings_row),
    )?;
    let per_beta: Vec<Value> = spec
        .betas
        .iter()
        .map(|&b| {
            let mine: Vec<&WingsRow> = rows.iter().filter(|r| r.beta == b).collect();
            json!({
                "beta": b,
                "min_cathode_flux": mine.iter().map(|r| r.min_cathode_flux).collect::<Vec<_>>(),
                "flux_at_minus_half": mine.iter().map(|r| r.flux_at_minus_half).collect::<Vec<_>>(),
                "flux_ratio_per_level": flux_ratios(&rows, b),
                "column_j_slope": mine.first().map(|r| r.column_j_slope),
                "floor_activations": mine.iter().map(|r| r.report.floor_activations).collect::<Vec<_>>(),
                "clamped": mine.iter().any(|r| r.report.floor_activations > 0),
            })
        })
        .collect();
    dir.json("summary.json", &json!({"amplitude": spec.amplitude, "levels": spec.levels, "betas": per_beta}))?;
    if let Some(r) = rows.iter().find(|r| !r.report.converged) {
        return Err(CliError::Numeric(format!("beta = {} on {}x{} did not converge", r.beta, r.nx + 1, r.ny + 1)));
    }
    Ok(())
}

pub fn parabolic(cfg: &Config, dir: &RunDir) -> CliResult<()> {
    let params = ParabolicParams::from_config(cfg)?;
    let out = pipeline::parabolic(&params)?;
    dir.csv(
        "trajectory.csv",
        &["t", "distance_to_reference", "weighted_positive_part_norm"],
        out.rows().into_iter().map(|(t, d, w)| vec![num(t), num(d), num(w)]),
    )?;
    let d = &out.decay;
    let w0 = d.reverse_part.first().copied().unwrap_or(0.0);
    dir.csv(
        "decay.csv",
        &["t", "positive_part", "reverse_part", "weighted_series"],
        d.times.iter().zip(&d.positive_part).zip(&d.reverse_part).map(|((&t, &p), &r)| {
            let s = if w0 > 0.0 { r * t.powf(d.rate) / w0 } else { 0.0 };
            vec![num(t), num(p), num(r), num(s)]
        }),
    )?;
    if let Some((_, last)) = out.trajectory.snapshots.last() {
        dir.field("u_final.csv", last)?;
    }
    dir.json("summary.json", &out.summary())
}

fn sub_summary(s: &SubsolutionField) -> Value {
    let p = &s.profile;
    let r = &s.report;
    json!({
        "amplitude": p.amplitude,
        "beta": p.beta,
        "alpha": p.alpha,
        "eps": p.eps,
        "model": p.model.name(),
        "k_scale": p.k_scale,
        "v_eps": p.v_eps,
        "junctions": p.junctions.iter().map(|j| json!({
            "theta": j.theta, "value_jump": j.value_jump, "slope_jump": j.slope_jump,
        })).collect::<Vec<_>>(),
        "max_residual": p.max_residual,
        "exponent_at_pi": p.exponent_at_pi,
        "field": {
            "discrete_ok": r.discrete.ok,
            "discrete_worst": r.discrete.worst,
            "discrete_at": [r.discrete.at.0, r.discrete.at.1],
            "boundary_excess": r.discrete.boundary_excess,
            "x0_jump_ok": r.x0_jump.ok,
            "x0_jump_worst_margin": r.x0_jump.worst_margin,
            "ray_jumps_ok": r.ray_jumps.iter().map(|j| j.ok).collect::<Vec<_>>(),
            "ray_jumps_worst_margin": r.ray_jumps.iter().map(|j| j.worst_margin).collect::<Vec<_>>(),
            "min_interior": r.min_interior,
        },
    })
}

pub fn verify_sub(cfg: &Config, dir: &RunDir) -> CliResult<()> {
    let grid = grid_from(cfg, 257, 129)?;
    let beta = cfg.f64("beta", 0.25)?;
    let n_theta = cfg.usize("n_theta", 2000)?.max(2);
    let amplitude = cfg.opt_f64("A")?;
    let eps = cfg.opt_f64("eps")?;
    let slack = cfg.opt_f64("slack")?;
    let h = cfg.opt_f64("h")?;
    let params = match (amplitude, eps) {
        (Some(a), Some(e)) => SubParams { amplitude: a, beta, h, eps: e, model: model_for(slack) },
        _ => {
            let margin = cfg.f64("margin", 0.9)?;
            match choose_subsolution(beta, &grid, amplitude, eps, slack, margin) {
                Ok(c) => SubParams { amplitude: c.amplitude, beta, h, eps: c.eps, model: c.model },
                Err(e) => {
                    dir.json("summary.json", &json!({"status": "infeasible", "feasibility_report": e.to_string()}))?;
                    return Err(e);
                }
            }
        }
    };
    let profile = match assemble_subsolution_with(params, 4000) {
        Ok(p) => p,
        Err(e) => {
            dir.json("summary.json", &json!({"status": "infeasible", "feasibility_report": e.to_string()}))?;
            return Err(e.into());
        }
    };
    dir.csv(
        "angular.csv",
        &["theta", "U", "U_prime", "piece_id"],
        (0..=n_theta).map(|k| {
            let th = FRAC_PI_2 + (PI - FRAC_PI_2) * k as f64 / n_theta as f64;
            let (u, du, _) = profile.eval(th);
            vec![num(th), num(u), num(du), profile.piece_id(th).to_string()]
        }),
    )?;
    let field = subsolution_field(&profile, &grid)?;
    dir.field("sub_field.csv", &field.field)?;
    let r = &field.report;
    let ok = r.discrete.ok && r.x0_jump.ok && r.ray_jumps.iter().all(|j| j.ok) && r.min_interior > 0.0;
    let mut summary = sub_summary(&field);
    summary["status"] = json!(if ok { "ok" } else { "failed" });
    dir.json("summary.json", &summary)?;
    if !ok {
        return Err(CliError::Infeasible("the assembled subsolution fails its grid checks".into()));
    }
    Ok(())
}

pub fn verify_super(cfg: &Config, dir: &RunDir) -> CliResult<()> {
    let grid = grid_from(cfg, 257, 129)?;
    let beta = cfg.f64("beta", 0.25)?;
    let amplitude = cfg.f64("A", 0.01)?;
    let v0 = cfg.f64("V0", amplitude)?;
    let n_theta = cfg.usize("n_theta", 2000)?.max(2);
    if !(amplitude > 0.0 && v0 > 0.0) {
        return Err(CliError::Validation(format!("A = {amplitude} and V0 = {v0} must be positive")));
    }
    let margin = robin_margin(beta)?;
    let sup = build_supersolution(amplitude, beta, &grid, v0)?;
    let lo = sup.profile.theta_lo().max(FRAC_PI_2);
    dir.csv(
        "super_profile.csv",
        &["theta", "U", "U_prime"],
        (0..=n_theta).map(|k| {
            let th = lo + (PI - lo) * k as f64 / n_theta as f64;
            let (u, du, _) = sup.profile.eval(th);
            vec![num(th), num(u), num(du)]
        }),
    )?;
    dir.field("super_field.csv", &sup.field)?;
    let mut summary = super_json(&sup);
    let ok = margin >= 0.0;
    summary["status"] = json!(if ok { "ok" } else { "robin_failure" });
    dir.json("summary.json", &summary)?;
    if !ok {
        return Err(CliError::Infeasible(format!("Robin inequality fails at beta = {beta}: margin {margin}")));
    }
    Ok(())
}
