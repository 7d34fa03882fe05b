use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};
#[allow(unused_imports)]
use num_traits::Float;

use super::{exponent_for, potential};
use crate::closed_forms::c_q;
use crate::ode::{self, Tolerance};
use crate::{timemap, Error, Result};

/// Spacing of the stored samples of a shot piece.
const SHOT_SPACING: f64 = 1e-3;

/// Solution of `-v'' + V/√v = λv` that is flat at `θ = π`, stored as Hermite
/// samples on `[θ_lo, π - s0]` plus the local series `c (π-θ)^{4/3}` beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularPiece {
    pub v: f64,
    pub lambda: f64,
    /// Offset of the series seed from `π`.
    pub s0: f64,
    /// Series coefficient `(9V/4)^{2/3}`.
    pub c: f64,
    pub theta: Vec<f64>,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
}

impl AngularPiece {
    pub fn theta_lo(&self) -> f64 {
        self.theta[0]
    }

    /// `(v, v', v'')` by cubic Hermite interpolation (series near `π`).
    pub fn eval(&self, th: f64) -> (f64, f64, f64) {
        let top = *self.theta.last().unwrap_or(&PI);
        let (u, du) = if th >= top {
            let s = (PI - th).max(0.0);
            (self.c * s.powf(4.0 / 3.0), -(4.0 / 3.0) * self.c * s.cbrt())
        } else {
            let n = self.theta.len();
            let k = self.theta.partition_point(|&t| t <= th).clamp(1, n - 1);
            let (t0, t1) = (self.theta[k - 1], self.theta[k]);
            let h = t1 - t0;
            let s = (th - t0) / h;
            let (s2, s3) = (s * s, s * s * s);
            let (h00, h10, h01, h11) = (2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2);
            let (d00, d10, d01, d11) = (6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s);
            let (y0, y1, m0, m1) = (self.u[k - 1], self.u[k], self.du[k - 1], self.du[k]);
            (
                h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1,
                (d00 * y0 + d01 * y1) / h + d10 * m0 + d11 * m1,
            )
        };
        let upp = if u > 0.0 { self.v / u.sqrt() - self.lambda * u } else { f64::INFINITY };
        (u, du, upp)
    }

    /// Largest stored value and its angle.
    pub fn max(&self) -> (f64, f64) {
        self.theta
            .iter()
            .zip(&self.u)
            .fold((f64::NEG_INFINITY, f64::NAN), |m, (&t, &u)| if u > m.0 { (u, t) } else { m })
    }

    /// Max of `|-v'' + V/√v - λv|` with `v''` from fourth-order differences of
    /// the interpolant, over samples at least `0.1` away from `π`.
    pub fn fd_residual(&self) -> f64 {
        let h = 1e-3;
        let lo = self.theta_lo() + 2.0 * h;
        let hi = PI - 0.1;
        let mut worst: f64 = 0.0;
        let mut th = lo;
        while th <= hi {
            let f = |t: f64| self.eval(t).0;
            let d2 = (-f(th + 2.0 * h) + 16.0 * f(th + h) - 30.0 * f(th) + 16.0 * f(th - h) - f(th - 2.0 * h))
                / (12.0 * h * h);
            let u = f(th);
            worst = worst.max((-d2 + self.v / u.sqrt() - self.lambda * u).abs());
            th += 0.01;
        }
        worst
    }
}

/// Integrates `-v'' + V/√v = λv` backwards from `π - s0`, seeded by the local
/// series `v ≈ (9V/4)^{2/3}(π-θ)^{4/3}`. `s0` is halved until the seed's
/// residual `λ c s0^{4/3}` is below `10⁻⁶`.
pub fn shoot_v2(v_eps: f64, lam: f64, theta_lo: f64, s0: f64) -> Result<AngularPiece> {
    for (name, value) in [("V_eps", v_eps), ("lambda", lam), ("s0", s0)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Domain { name, value, expected: "(0, inf)" });
        }
    }
    if !(theta_lo < PI - s0 && theta_lo >= 0.0) {
        return Err(Error::Domain { name: "theta_lo", value: theta_lo, expected: "[0, pi - s0)" });
    }
    let c = (9.0 * v_eps / 4.0).powf(2.0 / 3.0);
    let mut s0 = s0;
    while lam * c * s0.powf(4.0 / 3.0) >= 1e-6 {
        s0 *= 0.5;
    }
    let top = PI - s0;
    let n = (((top - theta_lo) / SHOT_SPACING).ceil() as usize).max(16);
    let stops: Vec<f64> = (1..=n).map(|k| top - (top - theta_lo) * k as f64 / n as f64).collect();
    let seed = [c * s0.powf(4.0 / 3.0), -(4.0 / 3.0) * c * s0.cbrt()];
    let tol = Tolerance { rtol: 1e-12, atol: 1e-15 * c.max(1e-300) };
    let states = ode::integrate(
        |_, y: &[f64; 2]| [y[1], v_eps / y[0].max(1e-300).sqrt() - lam * y[0]],
        top,
        seed,
        &stops,
        tol,
        |_, y| y[0] > 0.0,
    )
    .map_err(|e| match e {
        Error::Integration { at, .. } => Error::Integration {
            at,
            detail: format!("v2 reached zero at theta = {at} before theta_lo = {theta_lo}"),
        },
        other => other,
    })?;
    let mut theta = Vec::with_capacity(n + 1);
    let mut u = Vec::with_capacity(n + 1);
    let mut du = Vec::with_capacity(n + 1);
    for (t, y) in stops.iter().zip(&states).rev() {
        theta.push(*t);
        u.push(y[0]);
        du.push(y[1]);
    }
    theta.push(top);
    u.push(seed[0]);
    du.push(seed[1]);
    Ok(AngularPiece { v: v_eps, lambda: lam, s0, c, theta, u, du })
}

/// `v₁(θ) = C_q (θ - π/2)^α + h`, the flat power profile for the coefficient
/// `C (θ-π/2)^{-β}` with `C = A(π/2)^β`, shifted up by `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerPiece {
    pub cq: f64,
    pub exponent: f64,
    pub h: f64,
    /// `C = A π^β / 2^β`.
    pub c: f64,
}

impl PowerPiece {
    pub fn eval(&self, th: f64) -> (f64, f64, f64) {
        let t = (th - FRAC_PI_2).max(0.0);
        let p = self.exponent;
        if t == 0.0 {
            return (self.h, 0.0, if self.cq == 0.0 { 0.0 } else { f64::INFINITY });
        }
        (self.cq * t.powf(p) + self.h, self.cq * p * t.powf(p - 1.0), self.cq * p * (p - 1.0) * t.powf(p - 2.0))
    }
}

/// Builds `v₁` and checks `-v₁'' + V(θ)/√v₁ ≤ 0` on 1000 points of `(π/2, π]`.
pub fn build_v1(amplitude: f64, beta: f64, h: f64) -> Result<PowerPiece> {
    if !(amplitude >= 0.0) {
        return Err(Error::Domain { name: "A", value: amplitude, expected: "[0, inf)" });
    }
    if !(beta >= 0.0 && beta < 0.5) {
        return Err(Error::Domain { name: "beta", value: beta, expected: "[0, 1/2)" });
    }
    if !(h > 0.0) {
        return Err(Error::Domain { name: "h", value: h, expected: "(0, inf)" });
    }
    let c = amplitude * (PI / 2.0).powf(beta);
    let piece = PowerPiece { cq: c_q(-beta, c)?, exponent: exponent_for(beta), h, c };
    let (mut worst, mut at) = (f64::NEG_INFINITY, f64::NAN);
    for k in 1..=1000 {
        let th = FRAC_PI_2 + FRAC_PI_2 * k as f64 / 1000.0;
        let (v, _, vpp) = piece.eval(th);
        let m = -vpp + potential(amplitude, beta, th) / v.sqrt();
        if m > worst {
            worst = m;
            at = th;
        }
    }
    if worst > 1e-12 * (1.0 + piece.cq) {
        return Err(Error::Infeasible {
            detail: format!("v1 inequality fails: margin {worst:e} at theta = {at}"),
        });
    }
    Ok(piece)
}

/// `w(θ) = k0 + k1(θ-R0) - k2(θ-R0)²` on `(R0 - ε/2, R0 + ε/2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendCoefficients {
    pub k0: f64,
    pub k1: f64,
    pub k2: f64,
    pub epsilon: f64,
    pub k2_min: f64,
    /// `B = (v1L + v2R)/2 - |k1|ε/2`, the lower bound of `w`.
    pub b: f64,
    /// `C = V_ε/√B - λB`; the concavity condition is `2k2 + C ≤ 0`.
    pub c: f64,
}

impl BlendCoefficients {
    /// `(w, w', w'')` at offset `t = θ - R0`.
    pub fn eval_offset(&self, t: f64) -> (f64, f64, f64) {
        (self.k0 + self.k1 * t - self.k2 * t * t, self.k1 - 2.0 * self.k2 * t, -2.0 * self.k2)
    }
}

/// Blend coefficients from the endpoint data `v₁(L), v₂(R), v₁'(L), v₂'(R)`.
///
/// `k2 = k2_min + min(η, -C/4)` with `η = ε³/10`; when that overshoots
/// `-C/2` (possible only if `k2_min > -C/4`) the left end `k2_min` is used.
pub fn blend_w(
    v1l: f64,
    v2r: f64,
    d1l: f64,
    d2r: f64,
    eps: f64,
    v_eps: f64,
    lam: f64,
) -> Result<BlendCoefficients> {
    if !(eps > 0.0) {
        return Err(Error::Domain { name: "eps", value: eps, expected: "(0, inf)" });
    }
    let k1 = (v2r - v1l) / eps;
    let b = 0.5 * (v1l + v2r) - 0.5 * k1.abs() * eps;
    if !(b > 0.0) {
        return Err(Error::Infeasible { detail: format!("blend lower bound B = {b} is not positive") });
    }
    let c = v_eps / b.sqrt() - lam * b;
    let k2_min = 0.0f64.max((d1l - k1) / eps).max((k1 - d2r) / eps);
    if !(c < 0.0) || k2_min > -0.5 * c {
        return Err(Error::Infeasible {
            detail: format!(
                "blend interval [k2_min, -C/2] is empty: C = {c}, k2_min = {k2_min}, -C/2 = {}",
                -0.5 * c
            ),
        });
    }
    let eta = eps * eps * eps / 10.0;
    let mut k2 = k2_min + eta.min(-0.25 * c);
    if k2 > -0.5 * c {
        k2 = k2_min;
    }
    if !(k2 > 0.0) {
        return Err(Error::Infeasible { detail: format!("blend needs k2 > 0, got {k2}") });
    }
    let k0 = 0.5 * (v1l + v2r) + 0.25 * k2 * eps * eps;
    let out = BlendCoefficients { k0, k1, k2, epsilon: eps, k2_min, b, c };
    // Re-verify the five conditions on the computed numbers.
    let (wl, dwl, _) = out.eval_offset(-0.5 * eps);
    let (wr, dwr, _) = out.eval_offset(0.5 * eps);
    let scale = v1l.abs().max(v2r.abs()).max(1.0);
    let checks = [
        ("w(L) = v1L", (wl - v1l).abs() <= 1e-12 * scale),
        ("w(R) = v2R", (wr - v2r).abs() <= 1e-12 * scale),
        ("w'(L) >= v1'(L)", dwl >= d1l - 1e-12 * scale),
        ("w'(R) <= v2'(R)", dwr <= d2r + 1e-12 * scale),
        ("2 k2 + C <= 0", 2.0 * k2 + c <= 0.0),
    ];
    if let Some((name, _)) = checks.iter().find(|c| !c.1) {
        return Err(Error::Infeasible { detail: format!("blend postcondition {name} fails") });
    }
    Ok(out)
}

/// Which problem the outer piece `v₂` solves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum V2Model {
    /// `-v'' + V_ε/√v = α² v`, as in the original three-piece construction.
    Original,
    /// `-v'' + V₂/√v = λ₂ v` with `λ₂ = 4α²/(3 + slack)` and
    /// `V₂ = 1.01 V_ε / slack`. Then `(λ₂ - α²) v^{3/2} ≤ V₂ - V_ε` along the
    /// whole profile, so `v₂` is a subsolution of the `α²` problem, and its
    /// peak moves right of the blend as `slack → 0`.
    Stiffened { slack: f64 },
}

impl V2Model {
    pub fn name(self) -> &'static str {
        match self {
            V2Model::Original => "original",
            V2Model::Stiffened { .. } => "stiffened",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubParams {
    pub amplitude: f64,
    pub beta: f64,
    /// Level of `v₁` at `π/2`; `None` picks the `h` minimizing `k2_min`,
    /// i.e. `k1 = (v₁'(L) + v₂'(R))/2`.
    pub h: Option<f64>,
    pub eps: f64,
    pub model: V2Model,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PieceKind {
    Power(PowerPiece),
    /// Blend centred at `R0`.
    Blend { coeffs: BlendCoefficients, r0: f64 },
    Shot(AngularPiece),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Piece {
    pub id: u8,
    pub lo: f64,
    pub hi: f64,
    pub kind: PieceKind,
}

impl Piece {
    /// `(U, U', U'')` from this piece's own formula (also slightly outside
    /// its interval, which the one-sided jump checks rely on).
    pub fn eval(&self, th: f64) -> (f64, f64, f64) {
        match &self.kind {
            PieceKind::Power(p) => p.eval(th),
            PieceKind::Blend { coeffs, r0 } => coeffs.eval_offset(th - r0),
            PieceKind::Shot(s) => s.eval(th),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Junction {
    pub theta: f64,
    pub value_jump: f64,
    /// `U'(θ+) - U'(θ-)`; nonnegative for a subsolution.
    pub slope_jump: f64,
}

/// Angular profile `U(θ)` on `[π/2, π]` of a subsolution `r^α U(θ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngularProfile {
    pub pieces: Vec<Piece>,
    pub alpha: f64,
    pub k_scale: f64,
    pub beta: f64,
    pub amplitude: f64,
    pub eps: f64,
    pub v_eps: f64,
    pub model: V2Model,
    pub junctions: Vec<Junction>,
    /// Largest `-U'' + V/√U - α²U` over samples off the junctions.
    pub max_residual: f64,
    /// Fitted exponent of `U` in `π - θ` over the last samples.
    pub exponent_at_pi: f64,
}

impl AngularProfile {
    fn piece_at(&self, th: f64) -> &Piece {
        self.pieces.iter().find(|p| th <= p.hi).unwrap_or_else(|| &self.pieces[self.pieces.len() - 1])
    }

    pub fn eval(&self, th: f64) -> (f64, f64, f64) {
        let (u, du, upp) = self.piece_at(th).eval(th);
        (self.k_scale * u, self.k_scale * du, self.k_scale * upp)
    }

    pub fn piece_id(&self, th: f64) -> u8 {
        self.piece_at(th).id
    }

    /// `-U'' + V(θ)/√U - α²U`.
    pub fn residual(&self, th: f64) -> f64 {
        let (u, _, upp) = self.eval(th);
        -upp + potential(self.amplitude, self.beta, th) / u.sqrt() - self.alpha * self.alpha * u
    }

    /// `(θ, U, U', piece id)` on `n + 1` equispaced angles of `[π/2, π]`.
    pub fn samples(&self, n: usize) -> Vec<(f64, f64, f64, u8)> {
        (0..=n)
            .map(|k| {
                let th = FRAC_PI_2 + FRAC_PI_2 * k as f64 / n as f64;
                let (u, du, _) = self.eval(th);
                (th, u, du, self.piece_id(th))
            })
            .collect()
    }
}

/// Assembles `U = {v₁, w, v₂}` with the original `v₂` and a given `h`.
pub fn assemble_subsolution(amplitude: f64, beta: f64, h: f64, eps: f64, n_theta: usize) -> Result<AngularProfile> {
    assemble_subsolution_with(SubParams { amplitude, beta, h: Some(h), eps, model: V2Model::Original }, n_theta)
}

/// Assembles and verifies an angular subsolution. For `β = 0` the profile is
/// the single flat piece with `λ = 16/9` on `[π/2, π]`.
pub fn assemble_subsolution_with(params: SubParams, n_theta: usize) -> Result<AngularProfile> {
    let SubParams { amplitude, beta, eps, model, .. } = params;
    if !(amplitude > 0.0) {
        return Err(Error::Domain { name: "A", value: amplitude, expected: "(0, inf)" });
    }
    if !(beta >= 0.0 && beta < 0.5) {
        return Err(Error::Domain { name: "beta", value: beta, expected: "[0, 1/2)" });
    }
    if !(eps > 0.0 && eps < 0.25) {
        return Err(Error::Domain { name: "eps", value: eps, expected: "(0, 1/4)" });
    }
    let alpha = exponent_for(beta);
    let lam = alpha * alpha;
    let s0 = 1e-4;
    let (pieces, v_eps) = if beta == 0.0 {
        let v2 = shoot_v2(amplitude, lam, FRAC_PI_2 - 0.01, s0)?;
        (alloc::vec![Piece { id: 2, lo: FRAC_PI_2, hi: PI, kind: PieceKind::Shot(v2) }], amplitude)
    } else {
        let v_eps = amplitude / eps.sin().powf(beta);
        let (l, r) = (FRAC_PI_2 + eps, FRAC_PI_2 + 2.0 * eps);
        let v2 = match model {
            V2Model::Original => shoot_v2(v_eps, lam, l - 0.01, s0)?,
            V2Model::Stiffened { slack } => {
                if !(slack > 0.0 && slack < 1.0) {
                    return Err(Error::Domain { name: "slack", value: slack, expected: "(0, 1)" });
                }
                let lam2 = 4.0 * lam / (3.0 + slack);
                let peak = PI - timemap::gamma_flat(1e-14)? / lam2.sqrt();
                if peak < r {
                    return Err(Error::Infeasible {
                        detail: format!("stiffened v2 peaks at {peak}, left of the blend end {r}"),
                    });
                }
                shoot_v2(1.01 * v_eps / slack, lam2, l - 0.01, s0)?
            }
        };
        let (v2r, d2r, _) = v2.eval(r);
        let probe = build_v1(amplitude, beta, 1.0)?;
        let (u_eps, d1l, _) = probe.eval(l);
        let h = params.h.unwrap_or(v2r - 0.5 * eps * (d1l + d2r) - (u_eps - 1.0));
        if !(h > 0.0) {
            return Err(Error::Infeasible { detail: format!("v1 level h = {h} is not positive") });
        }
        let v1 = build_v1(amplitude, beta, h)?;
        let v1l = v1.eval(l).0;
        let coeffs = blend_w(v1l, v2r, d1l, d2r, eps, v_eps, lam)?;
        let r0 = FRAC_PI_2 + 1.5 * eps;
        (
            alloc::vec![
                Piece { id: 0, lo: FRAC_PI_2, hi: l, kind: PieceKind::Power(v1) },
                Piece { id: 1, lo: l, hi: r, kind: PieceKind::Blend { coeffs, r0 } },
                Piece { id: 2, lo: r, hi: PI, kind: PieceKind::Shot(v2) },
            ],
            v_eps,
        )
    };
    let mut profile = AngularProfile {
        pieces,
        alpha,
        k_scale: 1.0,
        beta,
        amplitude,
        eps,
        v_eps,
        model,
        junctions: Vec::new(),
        max_residual: f64::NEG_INFINITY,
        exponent_at_pi: f64::NAN,
    };
    verify_profile(&mut profile, n_theta)?;
    Ok(profile)
}

fn verify_profile(p: &mut AngularProfile, n_theta: usize) -> Result<()> {
    let scale = p.eval(FRAC_PI_2).0.max(1e-300);
    for w in p.pieces.windows(2) {
        let th = w[0].hi;
        let (ul, dl, _) = w[0].eval(th);
        let (ur, dr, _) = w[1].eval(th);
        let j = Junction { theta: th, value_jump: ur - ul, slope_jump: dr - dl };
        p.junctions.push(j);
        if j.value_jump.abs() > 1e-10 * scale.max(1.0) {
            return Err(Error::Infeasible {
                detail: format!("junction at theta = {th}: value jump {:e}", j.value_jump),
            });
        }
        if j.slope_jump < -1e-10 * scale.max(1.0) {
            return Err(Error::Infeasible {
                detail: format!("junction at theta = {th}: slope jump {:e} has the wrong sign", j.slope_jump),
            });
        }
    }
    let (_, d0, _) = p.eval(FRAC_PI_2);
    if d0 < -1e-7 * scale {
        return Err(Error::Infeasible { detail: format!("U'(pi/2) = {d0:e} is negative") });
    }
    let n = n_theta.max(100);
    let band = 1e-9;
    let mut worst = f64::NEG_INFINITY;
    let mut at = f64::NAN;
    for k in 1..n {
        let th = FRAC_PI_2 + FRAC_PI_2 * k as f64 / n as f64;
        if p.junctions.iter().any(|j| (th - j.theta).abs() < band) {
            continue;
        }
        let r = p.residual(th);
        if r > worst {
            worst = r;
            at = th;
        }
    }
    p.max_residual = worst;
    if worst > 1e-8 * scale.max(1.0) {
        return Err(Error::Infeasible {
            detail: format!("angular subsolution inequality fails: {worst:e} at theta = {at}"),
        });
    }
    // Local exponent at π from the last ten samples.
    let pts: Vec<(f64, f64)> = (n - 10..n)
        .map(|k| {
            let th = FRAC_PI_2 + FRAC_PI_2 * k as f64 / n as f64;
            ((PI - th).ln(), p.eval(th).0.ln())
        })
        .collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|q| q.0).sum::<f64>() / m;
    let my = pts.iter().map(|q| q.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|q| (q.0 - mx) * (q.0 - mx)).sum();
    p.exponent_at_pi = sxy / sxx;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seed_coefficient_and_residual() {
        let p = shoot_v2(0.4, (7.0f64 / 6.0).powi(2), 1.5, 1e-4).unwrap();
        assert!((p.c - 0.9f64.powf(2.0 / 3.0)).abs() < 1e-15);
        assert!(p.lambda * p.c * p.s0.powf(4.0 / 3.0) < 1e-6);
        assert!(p.fd_residual() < 1e-8, "{}", p.fd_residual());
    }

    #[test]
    fn flat_shot_matches_time_map() {
        // V = 4/9, λ = 16/9: the profile peaks at distance π/2 from π with
        // value (4V/λ)^{2/3} = 1.
        let p = shoot_v2(4.0 / 9.0, 16.0 / 9.0, 1.0, 1e-4).unwrap();
        let (m, at) = p.max();
        assert!((m - 1.0).abs() < 1e-6, "{m}");
        assert!((at - FRAC_PI_2).abs() < 2e-3, "{at}");
        // Same profile from the time map: U(θ) = u(√λ(θ - π/2)) for V/λ = 1/4 → (1/4)^{2/3} r_F = 1.
        let ev = timemap::ProfileEval::new(timemap::R_F, 1e-13).unwrap();
        let amp = (0.25f64).powf(2.0 / 3.0);
        for th in [1.7, 2.2, 2.9] {
            let x = (4.0 / 3.0) * (th - FRAC_PI_2);
            assert!((p.eval(th).0 - amp * ev.value(x).unwrap()).abs() < 1e-7);
        }
    }

    #[test]
    fn beta_zero_profile_is_sine_power() {
        let a = 0.3;
        let p = assemble_subsolution_with(
            SubParams { amplitude: a, beta: 0.0, h: None, eps: 0.05, model: V2Model::Original },
            1000,
        )
        .unwrap();
        assert_eq!(p.pieces.len(), 1);
        assert!((p.alpha - 4.0 / 3.0).abs() < 1e-15);
        let c = (9.0 * a / 4.0).powf(2.0 / 3.0);
        for th in [1.6, 2.0, 2.5, 3.0] {
            assert!((p.eval(th).0 - c * th.sin().powf(4.0 / 3.0)).abs() < 1e-8);
        }
        assert!((p.exponent_at_pi - 4.0 / 3.0).abs() < 0.02);
    }

    #[test]
    fn v1_is_flat_and_subsolution() {
        let v = build_v1(0.1, 0.25, 0.5).unwrap();
        let (u, du, _) = v.eval(FRAC_PI_2);
        assert_eq!((u, du), (0.5, 0.0));
        let one = build_v1(0.0, 0.25, 1.0).unwrap();
        assert!((one.eval(2.5).0 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn symmetric_blend_is_a_cap() {
        let b = blend_w(1.0, 1.0, 0.0, 0.0, 0.05, 0.4, 16.0 / 9.0).unwrap();
        assert_eq!(b.k1, 0.0);
        assert!(b.k2 > 0.0);
        let (wl, _, _) = b.eval_offset(-0.025);
        let (wr, _, _) = b.eval_offset(0.025);
        assert!((wl - wr).abs() < 1e-15 && (wl - 1.0).abs() < 1e-14);
    }

    #[test]
    fn steep_endpoint_data_are_infeasible() {
        // k1 = 0.4 gives k2_min = 8.2 while -C/2 ≈ 0.64.
        match blend_w(0.95, 0.97, 0.01, -0.01, 0.05, 0.4, 16.0 / 9.0) {
            Err(Error::Infeasible { detail }) => assert!(detail.contains("k2_min = 8.2")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn original_blend_is_infeasible_for_positive_beta() {
        for beta in [0.05, 0.25, 0.4] {
            let r = assemble_subsolution_with(
                SubParams { amplitude: 0.1, beta, h: None, eps: 0.05, model: V2Model::Original },
                1000,
            );
            assert!(matches!(r, Err(Error::Infeasible { .. })), "{beta}: {r:?}");
        }
    }

    #[test]
    fn stiffened_profile_assembles() {
        let p = assemble_subsolution_with(
            SubParams { amplitude: 0.01, beta: 0.25, h: None, eps: 0.006, model: V2Model::Stiffened { slack: 0.002 } },
            2000,
        )
        .unwrap();
        assert_eq!(p.pieces.len(), 3);
        assert!(p.junctions.iter().all(|j| j.value_jump.abs() < 1e-10 && j.slope_jump >= -1e-12));
        assert_eq!(p.eval(FRAC_PI_2).1, 0.0);
        assert!((p.exponent_at_pi - 4.0 / 3.0).abs() < 0.02);
        assert!(p.max_residual <= 0.0);
    }
}
