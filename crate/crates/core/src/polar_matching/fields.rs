use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;
#[allow(unused_imports)]
use num_traits::Float;

use super::angular::{assemble_subsolution_with, shoot_v2, AngularPiece, AngularProfile, SubParams, V2Model};
use super::exponent_for;
use super::jump::{curve_jump, vertical_jump, JumpReport, Sense};
use crate::elliptic2d::{boundary_value, cell_averaged_j, CurrentDensity, Field2D, Grid2D, PoissonSolver};
use crate::{Error, Result};

/// Nodewise check of `-Δ_h u + j̄/√u` against zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiscreteCheck {
    /// Largest violation of the required sign (≤ 0 when it holds).
    pub worst: f64,
    pub at: (f64, f64),
    /// Largest amount by which boundary values sit on the wrong side of the data.
    pub boundary_excess: f64,
    pub boundary_at: (f64, f64),
    pub ok: bool,
}

/// Checks a sub (`-Δ_h u + j̄/√u ≤ 0`, `u ≤ data`) or super field.
pub fn discrete_check(field: &Field2D, density: &CurrentDensity, sense: Sense, tol: f64) -> DiscreteCheck {
    let g = field.grid;
    let jbar = cell_averaged_j(density, &g);
    let sign = match sense {
        Sense::Sub => 1.0,
        Sense::Super => -1.0,
    };
    let mut out = DiscreteCheck {
        worst: f64::NEG_INFINITY,
        at: (f64::NAN, f64::NAN),
        boundary_excess: f64::NEG_INFINITY,
        boundary_at: (f64::NAN, f64::NAN),
        ok: false,
    };
    for i in 0..=g.nx {
        for j in 0..=g.ny {
            let u = field.at(i, j);
            if g.is_boundary(i, j) {
                let e = sign * (u - boundary_value(&g, i, j));
                if e > out.boundary_excess {
                    out.boundary_excess = e;
                    out.boundary_at = (g.x(i), g.y(j));
                }
                continue;
            }
            let s = if jbar[i] == 0.0 { 0.0 } else { jbar[i] / u.max(0.0).sqrt() };
            let r = sign * (field.neg_laplacian(i, j) + s);
            if r > out.worst || r.is_nan() {
                out.worst = if r.is_nan() { f64::INFINITY } else { r };
                out.at = (g.x(i), g.y(j));
            }
        }
    }
    out.ok = out.worst <= tol && out.boundary_excess <= tol;
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubFieldReport {
    pub discrete: DiscreteCheck,
    /// Kink of the grid field across `x = 0`.
    pub x0_jump: JumpReport,
    /// Kinks along the rays through the angular junctions.
    pub ray_jumps: Vec<JumpReport>,
    pub min_interior: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubsolutionField {
    pub field: Field2D,
    pub profile: AngularProfile,
    pub report: SubFieldReport,
}

/// `r^α U(θ)` on the cathode side, the discrete harmonic extension on
/// `(0, b) × (0, 1)` with data `y^α U(π/2)`, `y`, `0`, `1`.
pub fn subsolution_field(profile: &AngularProfile, grid: &Grid2D) -> Result<SubsolutionField> {
    let g = *grid;
    let alpha = profile.alpha;
    let i0 = g.i_zero();
    let polar = |x: f64, y: f64| -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let r = x.hypot(y);
        r.powf(alpha) * profile.eval(y.atan2(x)).0
    };
    let mut field = Field2D::from_fn(g, |x, y| if x <= 0.0 { polar(x, y) } else { 0.0 });
    let right = Grid2D { a: 0.0, b: g.b, nx: g.nx - i0, ny: g.ny };
    let mut data = Field2D::from_fn(right, |_, _| 0.0);
    for j in 0..=g.ny {
        data.set(0, j, field.at(i0, j));
        data.set(right.nx, j, g.y(j));
    }
    for i in 1..right.nx {
        data.set(i, g.ny, 1.0);
    }
    let ext = PoissonSolver::new(right, 0.0).solve(&vec![0.0; right.len()], &data)?;
    for i in 1..=right.nx {
        for j in 0..=g.ny {
            field.set(i0 + i, j, ext.at(i, j));
        }
    }
    let density = CurrentDensity::new(profile.amplitude, profile.beta, g.a)?;
    let discrete = discrete_check(&field, &density, Sense::Sub, 1e-9);
    let x0_jump = vertical_jump(&field, i0, Sense::Sub, 1e-9);
    let ray_jumps = profile
        .junctions
        .iter()
        .enumerate()
        .map(|(k, jn)| {
            let (s, c) = jn.theta.sin_cos();
            let normal = (-s, c);
            let rmax = (g.a / -c).min(1.0 / s);
            let pts: Vec<_> = (1..=20).map(|m| {
                let r = rmax * m as f64 / 21.0;
                ((r * c, r * s), normal)
            }).collect();
            let lower = &profile.pieces[k];
            let upper = &profile.pieces[k + 1];
            let f_minus = |x: f64, y: f64| x.hypot(y).powf(alpha) * lower.eval(y.atan2(x)).0;
            let f_plus = |x: f64, y: f64| x.hypot(y).powf(alpha) * upper.eval(y.atan2(x)).0;
            curve_jump(&pts, 1e-5 * profile.eps, &f_minus, &f_plus, Sense::Sub, 1e-8)
        })
        .collect();
    let min_interior = field.min_interior();
    Ok(SubsolutionField {
        field,
        profile: profile.clone(),
        report: SubFieldReport { discrete, x0_jump, ray_jumps, min_interior },
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityReport {
    pub beta: f64,
    pub eps: f64,
    pub model: V2Model,
    /// Largest amplitude whose grid subsolution passed every check.
    pub amplitude: Option<f64>,
    /// `(A, passed, reason)` for every trial.
    pub trials: Vec<(f64, bool, String)>,
}

/// Assembles the subsolution for one amplitude and runs every grid check;
/// returns whether it passed and why not.
pub fn check_amplitude(beta: f64, eps: f64, model: V2Model, grid: &Grid2D, amplitude: f64) -> (bool, String) {
    let params = SubParams { amplitude, beta, h: None, eps, model };
    let profile = match assemble_subsolution_with(params, 4000) {
        Ok(p) => p,
        Err(e) => return (false, format!("{e}")),
    };
    match subsolution_field(&profile, grid) {
        Ok(s) => {
            let r = &s.report;
            if !r.discrete.ok {
                (false, format!(
                    "discrete check: interior {:e} at {:?}, boundary {:e} at {:?}",
                    r.discrete.worst, r.discrete.at, r.discrete.boundary_excess, r.discrete.boundary_at
                ))
            } else if !(r.min_interior > 0.0) {
                (false, "field not positive".into())
            } else {
                (true, "ok".into())
            }
        }
        Err(e) => (false, format!("{e}")),
    }
}

/// Bisection in `log A` for the largest amplitude whose grid subsolution
/// passes every check (the angular construction is scale free, so only the
/// boundary data and the anode side depend on `A`).
pub fn largest_feasible_amplitude(
    beta: f64,
    eps: f64,
    model: V2Model,
    grid: &Grid2D,
    lo: f64,
    hi: f64,
    steps: usize,
) -> FeasibilityReport {
    let mut rep = FeasibilityReport { beta, eps, model, amplitude: None, trials: Vec::new() };
    let probe = |a: f64, rep: &mut FeasibilityReport| {
        let (ok, why) = check_amplitude(beta, eps, model, grid, a);
        rep.trials.push((a, ok, why));
        ok
    };
    if probe(hi, &mut rep) {
        rep.amplitude = Some(hi);
        return rep;
    }
    if !probe(lo, &mut rep) {
        return rep;
    }
    let (mut l, mut h) = (lo.ln(), hi.ln());
    for _ in 0..steps {
        let m = 0.5 * (l + h);
        if probe(m.exp(), &mut rep) {
            l = m;
        } else {
            h = m;
        }
    }
    rep.amplitude = Some(l.exp());
    rep
}

/// Outcome of [`feasibility_search`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub beta: f64,
    /// One report per candidate `(ε, model)` on the coarse grid.
    pub coarse: Vec<FeasibilityReport>,
    /// Bisection of the best candidate on the requested grid.
    pub fine: Option<FeasibilityReport>,
}

impl SearchOutcome {
    /// `(A, ε, model)` verified on the requested grid.
    pub fn best(&self) -> Option<(f64, f64, V2Model)> {
        let f = self.fine.as_ref()?;
        Some((f.amplitude?, f.eps, f.model))
    }
}

/// Default candidates: the original construction at `ε = 0.05` and stiffened
/// variants on a small `(ε, slack)` lattice.
pub fn default_candidates() -> Vec<(f64, V2Model)> {
    let mut out = vec![(0.05, V2Model::Original)];
    for eps in [0.001, 0.002, 0.003, 0.005, 0.007] {
        for slack in [0.003, 0.01, 0.03] {
            out.push((eps, V2Model::Stiffened { slack }));
        }
    }
    out
}

/// Largest verified amplitude over `candidates`: every candidate is bisected
/// on a 4× coarser grid, the winner again on `grid`.
pub fn feasibility_search(beta: f64, grid: &Grid2D, candidates: &[(f64, V2Model)]) -> SearchOutcome {
    let coarse_grid = Grid2D::new(grid.a, grid.b, grid.nx / 4, grid.ny / 4)
        .ok()
        .filter(|g| g.nx >= 16)
        .unwrap_or(*grid);
    let coarse: Vec<_> = candidates
        .iter()
        .map(|&(eps, model)| largest_feasible_amplitude(beta, eps, model, &coarse_grid, 1e-8, 4.0 / 9.0, 16))
        .collect();
    let best = coarse
        .iter()
        .filter(|r| r.amplitude.is_some())
        .max_by(|p, q| p.amplitude.partial_cmp(&q.amplitude).unwrap_or(core::cmp::Ordering::Equal));
    let fine = best.map(|b| {
        let a = b.amplitude.unwrap_or(1e-8);
        let r = largest_feasible_amplitude(beta, b.eps, b.model, grid, a / 8.0, (2.0 * a).min(4.0 / 9.0), 20);
        if r.amplitude.is_some() {
            r
        } else {
            largest_feasible_amplitude(beta, b.eps, b.model, grid, 1e-8, a / 8.0, 24)
        }
    });
    SearchOutcome { beta, coarse, fine }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryCheck {
    pub side: &'static str,
    /// Largest `data - u` (positive is a violation).
    pub worst_deficit: f64,
    pub at: (f64, f64),
    /// Factor `max(data/u)` by which the field would have to be raised.
    pub bump: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperReport {
    pub alpha: f64,
    pub v0: f64,
    /// `α(-cot(απ/2)) + Ū'(π/2)/Ū(π/2)`.
    pub robin_margin: f64,
    /// Amplitude of `K r^α sin(αθ)` on the anode side.
    pub k: f64,
    pub c3: f64,
    pub c3_hat: f64,
    pub theta_b: f64,
    /// `A - V0`; the cathode piece is a supersolution iff this is ≥ 0.
    pub cathode_margin: f64,
    /// Largest `|u₃ - u₂|` along the ray `θ = θ_b`.
    pub value_jump_theta_b: f64,
    pub theta_b_jump: JumpReport,
    pub x0_jump: JumpReport,
    /// Smallest `-Δu₃` over the sector below `θ_b`.
    pub omega3_min_neg_laplacian: f64,
    /// Smallest `-Δ_h` of the grid field over nodes whose stencil lies in `θ_b < θ < π/2`.
    pub omega2_min_discrete: f64,
    pub boundary: [BoundaryCheck; 3],
    pub discrete: DiscreteCheck,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SupersolutionField {
    pub field: Field2D,
    pub profile: AngularPiece,
    pub report: SuperReport,
}

fn robin_from(alpha: f64, u_half: f64, du_half: f64) -> f64 {
    let half = alpha * FRAC_PI_2;
    alpha * (-half.cos() / half.sin()) + du_half / u_half
}

/// `α(-cot(απ/2)) + Ū'(π/2)/Ū(π/2)` for the cathode profile `Ū`. The
/// anode piece `K r^α sin(αθ)` meets `r^α Ū` with a supersolution kink
/// across `x = 0` only when this is nonnegative. It does not depend on `V0`,
/// since rescaling `V0` rescales `Ū`.
pub fn robin_margin(beta: f64) -> Result<f64> {
    if !(beta >= 0.0 && beta < 0.5) {
        return Err(Error::Domain { name: "beta", value: beta, expected: "[0, 1/2)" });
    }
    let alpha = exponent_for(beta);
    let bar = shoot_v2(1.0, alpha * alpha, FRAC_PI_2 - 0.01, 1e-4)?;
    let (u, du, _) = bar.eval(FRAC_PI_2);
    Ok(robin_from(alpha, u, du))
}

/// Supersolution `r^α Ū(θ)` on the cathode side (Ū the flat shot with `V0`
/// and `λ = α²`), `K r^α sin(αθ)` for `θ_b < θ < π/2` and
/// `C3 r sin(αθ) + Ĉ3 r^α sin(αθ_b)` below `θ_b`, where `tan θ_b = b`.
///
/// `Ĉ3 = K`, and `C3` is the smaller of what the data `y` at `x = b` and the
/// kink sense at `θ_b` require. The value jump at `θ_b` is reported, not
/// repaired.
pub fn build_supersolution(
    amplitude: f64,
    beta: f64,
    grid: &Grid2D,
    v0: f64,
) -> Result<SupersolutionField> {
    if !(beta >= 0.0 && beta < 0.5) {
        return Err(Error::Domain { name: "beta", value: beta, expected: "[0, 1/2)" });
    }
    let g = *grid;
    let alpha = exponent_for(beta);
    let bar = shoot_v2(v0, alpha * alpha, FRAC_PI_2 - 0.01, 1e-4)?;
    let (u_half, du_half, _) = bar.eval(FRAC_PI_2);
    let half = alpha * FRAC_PI_2;
    let robin_margin = robin_from(alpha, u_half, du_half);
    let k = u_half / half.sin();
    let theta_b = g.b.atan();
    let sb = (alpha * theta_b).sin();
    let y_hit = (g.b * theta_b.tan()).min(1.0);
    let r_max = g.b.hypot(y_hit);
    let c3_kink = k * r_max.powf(alpha - 1.0);
    let mut c3_data: f64 = 0.0;
    for m in 1..=200 {
        let y = y_hit * m as f64 / 200.0;
        let r = g.b.hypot(y);
        let th = y.atan2(g.b);
        c3_data = c3_data.max((y - k * r.powf(alpha) * sb) / (r * (alpha * th).sin()));
    }
    let c3 = c3_kink.max(c3_data).max(0.0);
    let c3_hat = k;
    let cathode = |x: f64, y: f64| x.hypot(y).powf(alpha) * bar.eval(y.atan2(x)).0;
    let u2 = |x: f64, y: f64| k * x.hypot(y).powf(alpha) * (alpha * y.atan2(x)).sin();
    let u3 = |x: f64, y: f64| {
        let r = x.hypot(y);
        c3 * r * (alpha * y.atan2(x)).sin() + c3_hat * r.powf(alpha) * sb
    };
    let eval = |x: f64, y: f64| -> f64 {
        if y <= 0.0 {
            0.0
        } else if x < 0.0 {
            cathode(x, y)
        } else if y.atan2(x) >= theta_b {
            u2(x, y)
        } else {
            u3(x, y)
        }
    };
    let field = Field2D::from_fn(g, eval);
    let (st, ct) = theta_b.sin_cos();
    let ray: Vec<_> = (1..=40).map(|m| {
        let r = r_max * m as f64 / 41.0;
        ((r * ct, r * st), (-st, ct))
    }).collect();
    let value_jump_theta_b = ray.iter().map(|&((x, y), _)| (u3(x, y) - u2(x, y)).abs()).fold(0.0, f64::max);
    let theta_b_jump = curve_jump(&ray, 1e-6, &u3, &u2, Sense::Super, 1e-8);
    let column: Vec<_> = (1..g.ny).map(|j| ((0.0, g.y(j)), (1.0, 0.0))).collect();
    let x0_jump = curve_jump(&column, 1e-6, &cathode, &u2, Sense::Super, 1e-8);
    let mut omega3_min_neg_laplacian = f64::INFINITY;
    for m in 1..=40 {
        for n in 1..40 {
            let r = r_max * m as f64 / 40.0;
            let th = theta_b * n as f64 / 40.0;
            let v = c3 * (alpha * alpha - 1.0) * (alpha * th).sin() / r
                - c3_hat * alpha * alpha * sb * r.powf(alpha - 2.0);
            omega3_min_neg_laplacian = omega3_min_neg_laplacian.min(v);
        }
    }
    let side = |name: &'static str, pts: &mut dyn Iterator<Item = (f64, f64, f64)>| {
        let mut c = BoundaryCheck { side: name, worst_deficit: f64::NEG_INFINITY, at: (f64::NAN, f64::NAN), bump: 0.0 };
        for (x, y, d) in pts {
            let u = eval(x, y);
            if d - u > c.worst_deficit {
                c.worst_deficit = d - u;
                c.at = (x, y);
            }
            c.bump = c.bump.max(d / u);
        }
        c
    };
    let n = 400;
    let boundary = [
        side("x = -a", &mut (1..=n).map(|m| {
            let y = m as f64 / n as f64;
            (-g.a, y, y.powf(4.0 / 3.0))
        })),
        side("x = b", &mut (1..=n).map(|m| {
            let y = m as f64 / n as f64;
            (g.b, y, y)
        })),
        side("y = 1", &mut (0..=n).map(|m| (-g.a + (g.a + g.b) * m as f64 / n as f64, 1.0, 1.0))),
    ];
    let in_omega2 = |i: usize, j: usize| {
        let (x, y) = (g.x(i), g.y(j));
        x > 0.0 && y > 0.0 && y.atan2(x) > theta_b
    };
    let mut omega2_min_discrete = f64::INFINITY;
    for i in 1..g.nx {
        for j in 1..g.ny {
            if in_omega2(i, j) && in_omega2(i - 1, j) && in_omega2(i + 1, j) && in_omega2(i, j - 1) && in_omega2(i, j + 1) {
                omega2_min_discrete = omega2_min_discrete.min(field.neg_laplacian(i, j));
            }
        }
    }
    let density = CurrentDensity::new(amplitude, beta, g.a)?;
    let discrete = discrete_check(&field, &density, Sense::Super, 1e-9);
    Ok(SupersolutionField {
        field,
        profile: bar,
        report: SuperReport {
            alpha,
            v0,
            robin_margin,
            k,
            c3,
            c3_hat,
            theta_b,
            cathode_margin: amplitude - v0,
            value_jump_theta_b,
            theta_b_jump,
            x0_jump,
            omega3_min_neg_laplacian,
            omega2_min_discrete,
            boundary,
            discrete,
        },
    })
}
