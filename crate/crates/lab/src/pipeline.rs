//! End-to-end workflows shared by the subcommands and the acceptance suite.

use flatbeam_core::elliptic2d::{
    edge_flux_profile, flat_exponent_fit, nondegeneracy_check, poisson_solve, residual_norm, solve_between,
    BetweenReport, CurrentDensity, ExponentFit, Field2D, Grid2D,
};
use flatbeam_core::parabolic::{comparison_decay, evolve, stable_dt, DecayReport, Trajectory};
use flatbeam_core::polar_matching::{
    assemble_subsolution_with, build_supersolution, check_amplitude, default_candidates, feasibility_search,
    robin_margin, subsolution_field, SearchOutcome, SubParams, SubsolutionField, SupersolutionField, V2Model,
};
use serde_json::{json, Value};

use crate::config::Config;
use crate::error::{CliError, CliResult};

pub fn model_for(slack: Option<f64>) -> V2Model {
    match slack {
        Some(slack) => V2Model::Stiffened { slack },
        None => V2Model::Original,
    }
}

/// Amplitude and angular construction the subsolution is built from.
#[derive(Debug, Clone)]
pub struct SubChoice {
    pub amplitude: f64,
    pub eps: f64,
    pub model: V2Model,
    pub search: Option<SearchOutcome>,
}

impl SubChoice {
    pub fn to_json(&self) -> Value {
        let slack = match self.model {
            V2Model::Stiffened { slack } => Some(slack),
            V2Model::Original => None,
        };
        let search = self.search.as_ref().map(|s| {
            json!({
                "coarse": s.coarse.iter().map(|r| json!({
                    "eps": r.eps,
                    "model": r.model.name(),
                    "slack": match r.model { V2Model::Stiffened { slack } => Some(slack), V2Model::Original => None },
                    "amplitude": r.amplitude,
                })).collect::<Vec<_>>(),
                "fine_amplitude": s.fine.as_ref().and_then(|f| f.amplitude),
            })
        });
        json!({"amplitude": self.amplitude, "eps": self.eps, "model": self.model.name(), "slack": slack, "search": search})
    }
}

fn search_text(s: &SearchOutcome) -> String {
    let mut out = format!("no verified subsolution for beta = {}", s.beta);
    for r in &s.coarse {
        let why = r.trials.last().map(|t| t.2.as_str()).unwrap_or("");
        out.push_str(&format!("\n  eps {} {:?}: {:?} ({why})", r.eps, r.model, r.amplitude));
    }
    out
}

/// Picks the subsolution. Without an amplitude the feasibility search runs
/// and `margin` times the largest verified amplitude is used; with one, the
/// first candidate construction that verifies at that amplitude is taken.
pub fn choose_subsolution(
    beta: f64,
    grid: &Grid2D,
    amplitude: Option<f64>,
    eps: Option<f64>,
    slack: Option<f64>,
    margin: f64,
) -> CliResult<SubChoice> {
    let candidates = match eps {
        Some(e) => vec![(e, model_for(slack))],
        None => default_candidates(),
    };
    match amplitude {
        None => {
            let search = feasibility_search(beta, grid, &candidates);
            let (a, eps, model) = search.best().ok_or_else(|| CliError::Infeasible(search_text(&search)))?;
            let amplitude = margin * a;
            let (ok, why) = check_amplitude(beta, eps, model, grid, amplitude);
            if !ok {
                return Err(CliError::Infeasible(format!("A = {amplitude} failed after the search: {why}")));
            }
            Ok(SubChoice { amplitude, eps, model, search: Some(search) })
        }
        Some(a) => {
            let mut reasons = Vec::new();
            for (eps, model) in candidates {
                let (ok, why) = check_amplitude(beta, eps, model, grid, a);
                if ok {
                    return Ok(SubChoice { amplitude: a, eps, model, search: None });
                }
                reasons.push(format!("eps {eps} {model:?}: {why}"));
            }
            Err(CliError::Infeasible(format!(
                "no verified subsolution at A = {a}, beta = {beta}:\n  {}",
                reasons.join("\n  ")
            )))
        }
    }
}

pub fn grid_from(cfg: &Config, nx: usize, ny: usize) -> CliResult<Grid2D> {
    let a = cfg.f64("a", 1.0)?;
    let b = cfg.f64("b", 1.0)?;
    Ok(Grid2D::from_nodes(a, b, cfg.usize("Nx", nx)?, cfg.usize("Ny", ny)?)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solve2dParams {
    pub grid: Grid2D,
    pub beta: f64,
    /// `None` runs the feasibility search.
    pub amplitude: Option<f64>,
    pub eps: Option<f64>,
    pub slack: Option<f64>,
    /// Fraction of the largest verified amplitude actually used.
    pub margin: f64,
    /// `V0` of the reported three-region supersolution; defaults to `A`.
    pub v0: Option<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub fit_rows: usize,
}

pub const SOLVE2D_KEYS: &[&str] =
    &["a", "b", "A", "beta", "Nx", "Ny", "tol", "max_iter", "eps", "slack", "V0", "margin", "fit_rows"];

impl Solve2dParams {
    pub fn new(grid: Grid2D, beta: f64) -> Self {
        Solve2dParams {
            grid,
            beta,
            amplitude: None,
            eps: None,
            slack: None,
            margin: 0.9,
            v0: None,
            tol: 1e-10,
            max_iter: 5000,
            fit_rows: 8,
        }
    }

    pub fn from_config(cfg: &Config) -> CliResult<Self> {
        let mut p = Solve2dParams::new(grid_from(cfg, 257, 129)?, cfg.f64("beta", 0.25)?);
        p.amplitude = cfg.opt_f64("A")?;
        p.eps = cfg.opt_f64("eps")?;
        p.slack = cfg.opt_f64("slack")?;
        p.margin = cfg.f64("margin", p.margin)?;
        p.v0 = cfg.opt_f64("V0")?;
        p.tol = cfg.f64("tol", p.tol)?;
        p.max_iter = cfg.usize("max_iter", p.max_iter)?;
        p.fit_rows = cfg.usize("fit_rows", p.fit_rows)?;
        if !(p.margin > 0.0 && p.margin <= 1.0) {
            return Err(CliError::Validation(format!("margin = {} is outside (0, 1]", p.margin)));
        }
        if p.amplitude.is_some_and(|a| !(a >= 0.0)) {
            return Err(CliError::Validation("A must be nonnegative".into()));
        }
        Ok(p)
    }
}

/// Columns at which the flat exponent is fitted, as fractions of `a` (negative) or `b`.
pub const FIT_COLUMNS: [f64; 6] = [-0.75, -0.5, -0.25, 0.25, 0.5, 0.75];

#[derive(Debug, Clone)]
pub struct Solve2dOutcome {
    pub params: Solve2dParams,
    pub density: CurrentDensity,
    pub robin_margin: Option<f64>,
    /// `None` when `A = 0`.
    pub choice: Option<SubChoice>,
    pub sub: Option<SubsolutionField>,
    pub sub_field: Field2D,
    /// The three-region supersolution, reported only; the iteration starts from `y`.
    pub theory_super: Option<SupersolutionField>,
    pub super_field: Field2D,
    pub u_min: Field2D,
    pub u_max: Field2D,
    pub between: BetweenReport,
    pub residual_band2: f64,
    pub fits: Vec<(f64, ExponentFit)>,
    pub flux: Vec<(f64, f64)>,
    pub nondegeneracy: (f64, (f64, f64)),
}

impl Solve2dOutcome {
    pub fn converged(&self) -> bool {
        self.between.descending.converged && self.between.ascending.converged
    }

    pub fn fit_at(&self, x: f64) -> Option<f64> {
        self.fits.iter().find(|(c, _)| *c == x).map(|(_, f)| f.exponent)
    }

    pub fn sub_checks_ok(&self) -> bool {
        match &self.sub {
            Some(s) => {
                let r = &s.report;
                r.discrete.ok && r.x0_jump.ok && r.ray_jumps.iter().all(|j| j.ok) && r.min_interior > 0.0
            }
            None => true,
        }
    }

    pub fn verification(&self) -> Value {
        let p = &self.params;
        let ordering_ok = self.between.ordering_violation <= 1e-9;
        let residual_ok = self.residual_band2 < 1e-3;
        let nondeg_ok = self.nondegeneracy.0 > 0.0;
        let gap_ok = self.between.gap < 1e-5;
        let sub = self.sub.as_ref().map(|s| {
            let r = &s.report;
            json!({
                "discrete_ok": r.discrete.ok,
                "discrete_worst": r.discrete.worst,
                "discrete_at": [r.discrete.at.0, r.discrete.at.1],
                "boundary_excess": r.discrete.boundary_excess,
                "x0_jump_ok": r.x0_jump.ok,
                "x0_jump_worst_margin": r.x0_jump.worst_margin,
                "ray_jumps_ok": r.ray_jumps.iter().map(|j| j.ok).collect::<Vec<_>>(),
                "ray_jumps_worst_margin": r.ray_jumps.iter().map(|j| j.worst_margin).collect::<Vec<_>>(),
                "junction_slope_jumps": s.profile.junctions.iter().map(|j| j.slope_jump).collect::<Vec<_>>(),
                "angular_max_residual": s.profile.max_residual,
                "exponent_at_pi": s.profile.exponent_at_pi,
                "min_interior": r.min_interior,
            })
        });
        let sup = self.theory_super.as_ref().map(super_json);
        let fits: Vec<Value> =
            self.fits.iter().map(|(x, f)| json!({"x": x, "exponent": f.exponent, "rows_used": f.rows_used})).collect();
        json!({
            "status": if self.converged() { "ok" } else { "not_converged" },
            "beta": p.beta,
            "amplitude": self.density.amplitude,
            "nx": p.grid.nx + 1,
            "ny": p.grid.ny + 1,
            "subsolution_choice": self.choice.as_ref().map(SubChoice::to_json),
            "robin_margin": self.robin_margin,
            "super_used": "y",
            "ordering": {"ok": ordering_ok, "worst_violation": self.between.ordering_violation},
            "gap": {"ok": gap_ok, "sup_norm": self.between.gap},
            "residual": {"ok": residual_ok, "band": 2, "value": self.residual_band2},
            "nondegeneracy": {
                "ok": nondeg_ok, "nu": 4.0 / 3.0, "ratio": self.nondegeneracy.0,
                "at": [self.nondegeneracy.1 .0, self.nondegeneracy.1 .1],
            },
            "iterations": {
                "descending": self.between.descending.iterations,
                "ascending": self.between.ascending.iterations,
                "converged": self.converged(),
                "floor_activations": self.between.descending.floor_activations + self.between.ascending.floor_activations,
            },
            "subsolution": sub,
            "sub_checks_ok": self.sub_checks_ok(),
            "supersolution_report": sup,
            "exponent_fits": fits,
            "all_pass": ordering_ok && residual_ok && nondeg_ok && gap_ok && self.converged() && self.sub_checks_ok(),
        })
    }
}

pub fn super_json(s: &SupersolutionField) -> Value {
    let r = &s.report;
    json!({
        "alpha": r.alpha,
        "V0": r.v0,
        "robin_margin": r.robin_margin,
        "K": r.k,
        "C3": r.c3,
        "C3_hat": r.c3_hat,
        "theta_b": r.theta_b,
        "cathode_margin": r.cathode_margin,
        "value_jump_theta_b": r.value_jump_theta_b,
        "theta_b_jump_ok": r.theta_b_jump.ok,
        "theta_b_jump_worst_margin": r.theta_b_jump.worst_margin,
        "x0_jump_ok": r.x0_jump.ok,
        "x0_jump_worst_margin": r.x0_jump.worst_margin,
        "omega3_min_neg_laplacian": r.omega3_min_neg_laplacian,
        "omega2_min_discrete": r.omega2_min_discrete,
        "boundary": r.boundary.iter().map(|b| json!({
            "side": b.side, "worst_deficit": b.worst_deficit, "at": [b.at.0, b.at.1], "bump": b.bump,
        })).collect::<Vec<_>>(),
        "discrete_ok": r.discrete.ok,
        "discrete_worst": r.discrete.worst,
        "discrete_at": [r.discrete.at.0, r.discrete.at.1],
    })
}

/// Discrete harmonic field with the problem's boundary data.
pub fn harmonic(grid: &Grid2D) -> CliResult<Field2D> {
    let mut data = Field2D::from_fn(*grid, |_, _| 0.0);
    data.impose_problem_boundary();
    Ok(poisson_solve(grid, &vec![0.0; grid.len()], &data)?)
}

/// Subsolution field for `choice`, or the harmonic field when `A = 0`.
pub fn sub_for(choice: Option<&SubChoice>, beta: f64, grid: &Grid2D) -> CliResult<(Option<SubsolutionField>, Field2D)> {
    match choice {
        None => Ok((None, harmonic(grid)?)),
        Some(c) => {
            let params = SubParams { amplitude: c.amplitude, beta, h: None, eps: c.eps, model: c.model };
            let profile = assemble_subsolution_with(params, 4000)?;
            let s = subsolution_field(&profile, grid)?;
            let f = s.field.clone();
            Ok((Some(s), f))
        }
    }
}

/// Robin check, subsolution, reported supersolution, then the minimal and
/// maximal solutions between the subsolution and `y`.
pub fn solve2d(p: &Solve2dParams) -> CliResult<Solve2dOutcome> {
    let g = p.grid;
    let zero = p.amplitude == Some(0.0);
    let robin = if zero { None } else { Some(robin_margin(p.beta)?) };
    if let Some(m) = robin {
        if m < 0.0 {
            return Err(CliError::Infeasible(format!(
                "Robin inequality fails at beta = {}: margin {m} < 0, no partially flat supersolution",
                p.beta
            )));
        }
    }
    let choice = if zero { None } else { Some(choose_subsolution(p.beta, &g, p.amplitude, p.eps, p.slack, p.margin)?) };
    let amplitude = choice.as_ref().map_or(0.0, |c| c.amplitude);
    let density = CurrentDensity::new(amplitude, p.beta, g.a)?;
    let (sub, sub_field) = sub_for(choice.as_ref(), p.beta, &g)?;
    let theory_super = match &choice {
        Some(c) => Some(build_supersolution(c.amplitude, p.beta, &g, p.v0.unwrap_or(c.amplitude))?),
        None => None,
    };
    let super_field = Field2D::linear(g);
    let (u_min, u_max, between) = solve_between(&g, &density, &sub_field, &super_field, p.tol, p.max_iter)?;
    let residual_band2 = residual_norm(&u_min, &density, 2);
    let fits = FIT_COLUMNS
        .iter()
        .map(|&x| {
            let xc = if x < 0.0 { x * g.a } else { x * g.b };
            Ok((x, flat_exponent_fit(&u_min, g.column_of(xc), p.fit_rows)?))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let flux = edge_flux_profile(&u_min);
    let nondegeneracy = nondegeneracy_check(&u_min, 4.0 / 3.0)?;
    Ok(Solve2dOutcome {
        params: p.clone(),
        density,
        robin_margin: robin,
        choice,
        sub,
        sub_field,
        theory_super,
        super_field,
        u_min,
        u_max,
        between,
        residual_band2,
        fits,
        flux,
        nondegeneracy,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParabolicParams {
    pub grid: Grid2D,
    pub beta: f64,
    pub amplitude: Option<f64>,
    pub eps: Option<f64>,
    pub slack: Option<f64>,
    pub margin: f64,
    /// `None` takes the safe step.
    pub dt: Option<f64>,
    /// `None` runs 10⁴ steps.
    pub t_end: Option<f64>,
    pub nu: f64,
    pub t_min: f64,
    pub stamps: usize,
    pub tol: f64,
    pub max_iter: usize,
}

pub const PARABOLIC_KEYS: &[&str] = &[
    "a", "b", "A", "beta", "Nx", "Ny", "dt", "T", "nu", "t_min", "stamps", "tol", "max_iter", "eps", "slack", "margin",
];

impl ParabolicParams {
    pub fn new(grid: Grid2D, beta: f64) -> Self {
        ParabolicParams {
            grid,
            beta,
            amplitude: None,
            eps: None,
            slack: None,
            margin: 0.9,
            dt: None,
            t_end: None,
            nu: 4.0 / 3.0,
            t_min: 0.1,
            stamps: 200,
            tol: 1e-12,
            max_iter: 20000,
        }
    }

    pub fn from_config(cfg: &Config) -> CliResult<Self> {
        let mut p = ParabolicParams::new(grid_from(cfg, 65, 33)?, cfg.f64("beta", 0.25)?);
        p.amplitude = cfg.opt_f64("A")?;
        p.eps = cfg.opt_f64("eps")?;
        p.slack = cfg.opt_f64("slack")?;
        p.margin = cfg.f64("margin", p.margin)?;
        p.dt = cfg.opt_f64("dt")?;
        p.t_end = cfg.opt_f64("T")?;
        p.nu = cfg.f64("nu", p.nu)?;
        p.t_min = cfg.f64("t_min", p.t_min)?;
        p.stamps = cfg.usize("stamps", p.stamps)?;
        p.tol = cfg.f64("tol", p.tol)?;
        p.max_iter = cfg.usize("max_iter", p.max_iter)?;
        Ok(p)
    }
}

#[derive(Debug, Clone)]
pub struct ParabolicOutcome {
    pub params: ParabolicParams,
    pub choice: Option<SubChoice>,
    pub u_min: Field2D,
    pub trajectory: Trajectory,
    pub decay: DecayReport,
    pub t_end: f64,
}

impl ParabolicOutcome {
    /// `(t, distance to u_min, weighted norm of (v-u)₊)`; the decay series
    /// is stamped on the same grid of times.
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        let tr = &self.trajectory;
        tr.times
            .iter()
            .zip(&tr.distance)
            .map(|(&t, &d)| {
                let k = self.decay.times.iter().position(|&s| s == t);
                (t, d, k.map_or(f64::NAN, |k| self.decay.reverse_part[k]))
            })
            .collect()
    }

    pub fn summary(&self) -> Value {
        let tr = &self.trajectory;
        let d = &self.decay;
        let nonincreasing = tr.distance.windows(2).all(|w| w[1] <= w[0] + 1e-14);
        json!({
            "beta": self.params.beta,
            "amplitude": self.choice.as_ref().map_or(0.0, |c| c.amplitude),
            "subsolution_choice": self.choice.as_ref().map(SubChoice::to_json),
            "dt": tr.dt,
            "safe_dt": {"diffusion": tr.bounds.diffusion, "source": tr.bounds.source},
            "T": self.t_end,
            "steps": tr.steps,
            "clamped_nodes": tr.clamped_nodes,
            "final_distance": tr.distance.last().copied(),
            "distance_nonincreasing": nonincreasing,
            "decay": {
                "nu": self.params.nu,
                "gamma": d.gamma,
                "rate": d.rate,
                "t_min": d.t_min,
                "C": d.c,
                "bounded": d.bounded,
                "worst_order": d.worst_order,
                "order_tolerance": flatbeam_core::parabolic::ORDER_ROUNDOFF,
                "roundoff_crossings": d.roundoff_crossings,
                "positive_part_max": d.positive_part.iter().copied().fold(0.0, f64::max),
                "reverse_part_initial": d.reverse_part.first().copied(),
                "reverse_part_final": d.reverse_part.last().copied(),
            },
        })
    }
}

/// Evolves `y` towards the elliptic `u_min`, and the ordered pair
/// (subsolution, `y`) side by side for the weighted decay.
pub fn parabolic(p: &ParabolicParams) -> CliResult<ParabolicOutcome> {
    let g = p.grid;
    let choice = if p.amplitude == Some(0.0) {
        None
    } else {
        Some(choose_subsolution(p.beta, &g, p.amplitude, p.eps, p.slack, p.margin)?)
    };
    let amplitude = choice.as_ref().map_or(0.0, |c| c.amplitude);
    let density = CurrentDensity::new(amplitude, p.beta, g.a)?;
    let (_, sub) = sub_for(choice.as_ref(), p.beta, &g)?;
    let y = Field2D::linear(g);
    let (u_min, _, _) = solve_between(&g, &density, &sub, &y, p.tol, p.max_iter)?;
    let dt = match p.dt {
        Some(dt) => dt,
        None => stable_dt(&g, &density, &sub).safe(),
    };
    let t_end = p.t_end.unwrap_or(1e4 * dt);
    let trajectory = evolve(&y, t_end, dt, &density, &sub, Some(&u_min), p.stamps, 2)?;
    let decay = comparison_decay(&sub, &y, p.nu, t_end, dt, &density, &sub, p.t_min, p.stamps)?;
    Ok(ParabolicOutcome { params: p.clone(), choice, u_min, trajectory, decay, t_end })
}
