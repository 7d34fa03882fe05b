//! Time map of `-U'' + V0/√U = λU` on `(-R, R)` with `U(±R) = 0`.
//!
//! After the scaling `U(x) = (V0/λ)^{2/3} u(√λ x)` the problem becomes
//! `u'' = -f(u)` with `f(u) = u - u^{-1/2}` on `(-L, L)`, `L = √λ R`. A
//! positive solution with maximum `μ` exists iff `L = γ(μ)`, where
//!
//! ```text
//! γ(μ) = (1/√2) ∫₀^μ dr / √(F(μ) - F(r)),   F(r) = r²/2 - 2√r.
//! ```
//!
//! `F(μ) - F(r)` is evaluated as `(μ - r) · N / (2(√μ + √r))` with
//! `N = (μ√μ - 4) + μ√r + r√μ + r√r`, which has no cancellation for
//! `μ ≥ r_F`. Two substitutions remove the endpoint singularities: `r = t⁴`
//! on `[0, μ/2]` and `r = μ - s²` on `[μ/2, μ]`.

use alloc::vec::Vec;
use core::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
#[allow(unused_imports)]
use num_traits::Float;

use crate::{quad, roots, Error, Result};

/// Positive zero of `F`, `r_F = 2^{4/3}`.
pub const R_F: f64 = 2.519_842_099_789_746_3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    NoSolution,
    UniquePositive,
    Flat,
    CompactSupportFamily,
}

impl Regime {
    pub fn name(self) -> &'static str {
        match self {
            Regime::NoSolution => "NoSolution",
            Regime::UniquePositive => "UniquePositive",
            Regime::Flat => "Flat",
            Regime::CompactSupportFamily => "CompactSupportFamily",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeMapPoint {
    /// Maximum of the renormalized solution; `None` when there is no positive
    /// solution or the solution set is a family.
    pub mu: Option<f64>,
    /// Renormalized half-length `√λ R`.
    pub l: f64,
    pub regime: Regime,
    /// Sup-norm of the physical solution (of any member, for the family).
    pub sup_norm: Option<f64>,
}

/// Samples `(x, u)` of a profile on `[-L, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RenormProfile {
    pub mu: f64,
    pub l: f64,
    pub samples: Vec<(f64, f64)>,
}

pub fn big_f(r: f64) -> f64 {
    0.5 * r * r - 2.0 * r.sqrt()
}

pub fn small_f(u: f64) -> f64 {
    u - 1.0 / u.sqrt()
}

/// `(F(μ) - F(r)) / (μ - r)`, accurate for `μ ≥ r_F`, `0 ≤ r ≤ μ`.
fn slope_ratio(mu: f64, r: f64) -> f64 {
    let (sm, sr) = (mu.sqrt(), r.sqrt());
    let n = (mu * sm - 4.0).max(0.0) + mu * sr + r * sm + r * sr;
    n / (2.0 * (sm + sr))
}

fn check_mu(mu: f64) -> Result<()> {
    if mu >= R_F * (1.0 - 1e-15) && mu.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { name: "mu", value: mu, expected: "[r_F, inf)" })
    }
}

/// `(1/√2) ∫₀^u dr/√(F(μ)-F(r))` for `u ≤ μ/2`, via `r = t⁴`.
fn time_from_zero(mu: f64, u: f64, tol: f64) -> Result<f64> {
    let integrand = |t: f64| {
        if t == 0.0 {
            return 0.0;
        }
        let r = t * t * t * t;
        4.0 * t * t * t / ((mu - r) * slope_ratio(mu, r)).sqrt()
    };
    let e = quad::integrate(integrand, 0.0, u.powf(0.25), 0.0, tol)?;
    Ok(FRAC_1_SQRT_2 * e.value)
}

/// `(1/√2) ∫_u^μ dr/√(F(μ)-F(r))` for `u ≥ μ/2`, via `r = μ - s²`.
fn time_to_top(mu: f64, u: f64, tol: f64) -> Result<f64> {
    let e = quad::integrate(
        |s: f64| 2.0 / slope_ratio(mu, mu - s * s).sqrt(),
        0.0,
        (mu - u).max(0.0).sqrt(),
        0.0,
        tol,
    )?;
    Ok(FRAC_1_SQRT_2 * e.value)
}

/// The time map `γ(μ)` for `μ ≥ r_F`.
pub fn gamma(mu: f64, tol: f64) -> Result<f64> {
    check_mu(mu)?;
    let mu = mu.max(R_F);
    Ok(time_from_zero(mu, 0.5 * mu, tol)? + time_to_top(mu, 0.5 * mu, tol)?)
}

/// `γ(r_F)`, the largest half-length carrying a positive solution.
pub fn gamma_flat(tol: f64) -> Result<f64> {
    gamma(R_F, tol)
}

/// The unique `μ ≥ r_F` with `γ(μ) = L`.
pub fn gamma_inverse(l: f64, tol: f64) -> Result<f64> {
    let top = gamma_flat(1e-14)?;
    if !(l > PI / 2.0) {
        return Err(Error::RegimeMismatch {
            value: l,
            detail: alloc::format!("NoSolution: L = {l} <= pi/2"),
        });
    }
    if l > top * (1.0 + 1e-13) {
        return Err(Error::RegimeMismatch {
            value: l,
            detail: alloc::format!("CompactSupportFamily: L = {l} > gamma(r_F) = {top}"),
        });
    }
    if l >= top {
        return Ok(R_F);
    }
    let g = |mu: f64| gamma(mu, 1e-14).map_or(f64::NAN, |v| v - l);
    let (lo, hi) = roots::expand_upward(g, R_F, 2.0 * R_F)?;
    roots::bisect(g, lo, hi, tol.max(1e-15))
}

/// `λ*(R) = γ(r_F)² / R²`.
pub fn lambda_star(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::Domain { name: "R", value: r, expected: "(0, inf)" });
    }
    let g = gamma_flat(1e-14)?;
    Ok(g * g / (r * r))
}

/// First eigenvalue `(π/(2R))²` of `-d²/dx²` on `(-R, R)`.
pub fn lambda_one(r: f64) -> f64 {
    let k = PI / (2.0 * r);
    k * k
}

/// Regime and sup-norm of `-U'' + V0/√U = λU` on `(-R, R)`.
pub fn classify(lambda: f64, v0: f64, r: f64) -> Result<TimeMapPoint> {
    for (name, value) in [("lambda", lambda), ("V0", v0), ("R", r)] {
        if !(value > 0.0) {
            return Err(Error::Domain { name, value, expected: "(0, inf)" });
        }
    }
    let star = lambda_star(r)?;
    let l = lambda.sqrt() * r;
    let flat_norm = (4.0 * v0 / star).powf(2.0 / 3.0);
    let point = if lambda <= lambda_one(r) {
        TimeMapPoint { mu: None, l, regime: Regime::NoSolution, sup_norm: None }
    } else if (lambda - star).abs() <= 1e-12 * star {
        TimeMapPoint { mu: Some(R_F), l, regime: Regime::Flat, sup_norm: Some(flat_norm) }
    } else if lambda < star {
        let mu = gamma_inverse(l, 1e-13)?;
        TimeMapPoint {
            mu: Some(mu),
            l,
            regime: Regime::UniquePositive,
            sup_norm: Some((v0 / lambda).powf(2.0 / 3.0) * mu),
        }
    } else {
        let omega = lambda / star;
        TimeMapPoint {
            mu: None,
            l,
            regime: Regime::CompactSupportFamily,
            sup_norm: Some(omega.powf(-2.0 / 3.0) * flat_norm),
        }
    };
    Ok(point)
}

/// Pointwise evaluator of the renormalized profile with maximum `μ`.
#[derive(Debug, Clone, Copy)]
pub struct ProfileEval {
    pub mu: f64,
    pub l: f64,
    tol: f64,
    /// Time spent on `[0, μ/2]`.
    t_half: f64,
}

impl ProfileEval {
    pub fn new(mu: f64, tol: f64) -> Result<Self> {
        check_mu(mu)?;
        let mu = mu.max(R_F);
        let t_half = time_from_zero(mu, 0.5 * mu, tol)?;
        let l = t_half + time_to_top(mu, 0.5 * mu, tol)?;
        Ok(ProfileEval { mu, l, tol, t_half })
    }

    /// `u` at distance `w ∈ [0, L]` from the nearest endpoint.
    pub fn from_edge(&self, w: f64) -> Result<f64> {
        if w <= 0.0 {
            return Ok(0.0);
        }
        if w >= self.l {
            return Ok(self.mu);
        }
        let (mu, tol) = (self.mu, self.tol);
        if w <= self.t_half {
            roots::bisect(
                |u| time_from_zero(mu, u, tol).map_or(f64::NAN, |t| t - w),
                0.0,
                0.5 * mu,
                1e-16,
            )
        } else {
            let x = self.l - w;
            roots::bisect(
                |u| time_to_top(mu, u, tol).map_or(f64::NAN, |t| x - t),
                0.5 * mu,
                mu,
                1e-16,
            )
        }
    }

    /// `u(x)` for `x ∈ [-L, L]`.
    pub fn value(&self, x: f64) -> Result<f64> {
        self.from_edge(self.l - x.abs())
    }
}

/// Symmetric samples of the profile with maximum `μ` on `n` points of `[-L, L]`.
pub fn profile(mu: f64, n: usize, tol: f64) -> Result<RenormProfile> {
    if n < 3 {
        return Err(Error::Domain { name: "n", value: n as f64, expected: "[3, inf)" });
    }
    let ev = ProfileEval::new(mu, tol)?;
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let x = -ev.l + 2.0 * ev.l * i as f64 / (n - 1) as f64;
        let u = if i == 0 || i == n - 1 { 0.0 } else { ev.value(x)? };
        samples.push((x, u));
    }
    Ok(RenormProfile { mu: ev.mu, l: ev.l, samples })
}

/// Slope `|u'(±L)|` from one-sided quotients `u(w)/w`, `w → 0`, with
/// Richardson elimination in powers of `w^{1/2}` (or `w^{1/3}` when the
/// profile is flat at the edge).
pub fn boundary_slope(ev: &ProfileEval) -> Result<f64> {
    let flat = big_f(ev.mu) <= 1e-12;
    let (ratio, levels) = if flat { (8.0, 8) } else { (4.0, 8) };
    let root = if flat { 1.0 / 3.0 } else { 0.5 };
    let base = ratio.powf(root);
    let mut w = 1e-3 * ev.l;
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    for k in 0..levels {
        let mut row = Vec::with_capacity(k + 1);
        row.push(ev.from_edge(w)? / w);
        for m in 1..=k {
            let f = base.powi(m as i32);
            let prev: &Vec<f64> = &table[k - 1];
            let v = (f * row[m - 1] - prev[m - 1]) / (f - 1.0);
            row.push(v);
        }
        table.push(row);
        w /= ratio;
    }
    let last = &table[levels - 1];
    Ok(last[levels - 1].max(0.0))
}

/// Maximum of `|(1/2)u'² - F(μ) + F(u)|` over interior samples, with `u'`
/// from Richardson-extrapolated central differences on a step that shrinks
/// near the edges.
pub fn first_integral_violation(ev: &ProfileEval, n: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for i in 1..n - 1 {
        let x = -ev.l + 2.0 * ev.l * i as f64 / (n - 1) as f64;
        let w = ev.l - x.abs();
        let d = 1e-2 * w.min(1e-1 * ev.l);
        let cd = |d: f64| -> Result<f64> { Ok((ev.value(x + d)? - ev.value(x - d)?) / (2.0 * d)) };
        let du = (4.0 * cd(0.5 * d)? - cd(d)?) / 3.0;
        let u = ev.value(x)?;
        worst = worst.max((0.5 * du * du - big_f(ev.mu) + big_f(u)).abs());
    }
    Ok(worst)
}

/// `U(x) = (V0/λ)^{2/3} u(√λ x)` on `(-L/√λ, L/√λ)`.
pub fn rescale_to_physical(prof: &RenormProfile, lambda: f64, v0: f64) -> RenormProfile {
    let amp = (v0 / lambda).powf(2.0 / 3.0);
    let s = lambda.sqrt();
    RenormProfile {
        mu: amp * prof.mu,
        l: prof.l / s,
        samples: prof.samples.iter().map(|&(x, u)| (x / s, amp * u)).collect(),
    }
}

/// One member of the compact-support family for `λ > λ*(R)`:
/// `u(x) = ω^{-2/3} u_flat(√ω x - z)` with `ω = λ/λ*`, sampled on `n` points
/// of `[-R, R]`. The support has width `2R/√ω`.
pub fn compact_support_solution(lambda: f64, v0: f64, r: f64, z: f64, n: usize) -> Result<RenormProfile> {
    let star = lambda_star(r)?;
    if !(lambda >= star * (1.0 - 1e-12)) {
        return Err(Error::RegimeMismatch {
            value: lambda,
            detail: alloc::format!("compact support needs lambda >= lambda* = {star}"),
        });
    }
    let omega = (lambda / star).max(1.0);
    let zmax = r * (omega.sqrt() - 1.0);
    if z.abs() > zmax * (1.0 + 1e-12) + 1e-15 {
        return Err(Error::ShiftRange { z, lo: -zmax, hi: zmax });
    }
    let ev = ProfileEval::new(R_F, 1e-14)?;
    let amp = omega.powf(-2.0 / 3.0) * (v0 / star).powf(2.0 / 3.0);
    let k = star.sqrt();
    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let x = -r + 2.0 * r * i as f64 / (n - 1) as f64;
        // Argument of the flat physical profile on (-R, R).
        let xf = omega.sqrt() * x - z;
        let u = if xf.abs() >= r { 0.0 } else { amp * ev.value(k * xf)? };
        samples.push((x, u));
    }
    Ok(RenormProfile { mu: amp * R_F, l: r, samples })
}

/// Largest central-difference slope of a sampled profile.
pub fn max_abs_gradient(prof: &RenormProfile) -> f64 {
    prof.samples
        .windows(2)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).abs())
        .fold(0.0, f64::max)
}

/// The exact boundary slope `√2 √F(μ)`.
pub fn exact_boundary_slope(mu: f64) -> f64 {
    SQRT_2 * big_f(mu).max(0.0).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute-force γ: composite Simpson on both substituted panels.
    fn gamma_simpson(mu: f64, n: usize) -> f64 {
        let d = |r: f64| big_f(mu) - big_f(r);
        let left = quad::simpson(
            |t: f64| if t == 0.0 { 0.0 } else { 4.0 * t.powi(3) / d(t.powi(4)).sqrt() },
            0.0,
            (0.5 * mu).powf(0.25),
            n,
        );
        let right = quad::simpson(
            |s: f64| {
                if s == 0.0 {
                    2.0 / small_f(mu).sqrt()
                } else {
                    2.0 * s / d(mu - s * s).sqrt()
                }
            },
            0.0,
            (0.5 * mu).sqrt(),
            n,
        );
        (left + right) / 2f64.sqrt()
    }

    #[test]
    fn big_f_values() {
        assert_eq!(big_f(0.0), 0.0);
        assert_eq!(big_f(1.0), -1.5);
        assert!(big_f(R_F).abs() < 1e-15);
        assert!((R_F - 2f64.powf(4.0 / 3.0)).abs() < 1e-15);
    }

    #[test]
    fn gamma_at_flat_threshold() {
        let g = gamma_flat(1e-14).unwrap();
        assert!((g - 2.0 * PI / 3.0).abs() < 1e-12, "{g}");
    }

    #[test]
    fn gamma_matches_simpson_oracle() {
        let g = gamma(3.0, 1e-14).unwrap();
        assert!((g - gamma_simpson(3.0, 1_000_000)).abs() < 1e-6);
        assert!((g - 1.896_074_804_378_085_3).abs() < 1e-12);
        assert!((gamma(5.0, 1e-14).unwrap() - 1.693_170_888_846_906_9).abs() < 1e-12);
    }

    #[test]
    fn gamma_limit() {
        assert!((gamma(1e6, 1e-14).unwrap() - PI / 2.0).abs() < 1e-2);
    }

    #[test]
    fn inverse_round_trip_and_scan() {
        let l = gamma(5.0, 1e-14).unwrap();
        assert!((gamma_inverse(l, 1e-13).unwrap() - 5.0).abs() < 1e-9);
        assert_eq!(gamma_inverse(gamma_flat(1e-14).unwrap(), 1e-12).unwrap(), R_F);
        // Dense scan oracle for L = 1.8.
        let mu = gamma_inverse(1.8, 1e-13).unwrap();
        let grid: Vec<f64> = (0..10_000).map(|k| R_F * (1e3f64).powf(k as f64 / 9999.0)).collect();
        let best = grid
            .iter()
            .min_by(|a, b| {
                let ga = (gamma(**a, 1e-12).unwrap() - 1.8).abs();
                let gb = (gamma(**b, 1e-12).unwrap() - 1.8).abs();
                ga.total_cmp(&gb)
            })
            .unwrap();
        let spacing = best * ((1e3f64).ln() / 9999.0);
        assert!((mu - best).abs() <= spacing, "{mu} vs {best}");
        assert!(matches!(gamma_inverse(1.5, 1e-12), Err(Error::RegimeMismatch { .. })));
        assert!(matches!(gamma_inverse(2.2, 1e-12), Err(Error::RegimeMismatch { .. })));
    }

    #[test]
    fn lambda_star_values() {
        assert!((lambda_star(PI / 2.0).unwrap() - 16.0 / 9.0).abs() < 1e-12);
        let a = lambda_star(1.3).unwrap();
        assert!((lambda_star(2.6).unwrap() - a / 4.0).abs() < 1e-14);
        let g = gamma_flat(1e-14).unwrap();
        assert!((lambda_star(1.0).unwrap() - g * g).abs() < 1e-14);
        assert!((lambda_star(1.0).unwrap() - 4.386).abs() < 1e-3);
    }

    #[test]
    fn classify_regimes() {
        let r = 2.0;
        let star = lambda_star(r).unwrap();
        let p = classify(star, 1.0, r).unwrap();
        assert_eq!(p.regime, Regime::Flat);
        let n = p.sup_norm.unwrap();
        assert!((n - (4.0 / star).powf(2.0 / 3.0)).abs() < 1e-14);
        assert!((n - (1.0 / star).powf(2.0 / 3.0) * R_F).abs() < 1e-12);
        assert_eq!(classify(0.5 * lambda_one(r), 1.0, r).unwrap().regime, Regime::NoSolution);
        let p = classify(1.1 * lambda_one(r), 1.0, r).unwrap();
        assert_eq!(p.regime, Regime::UniquePositive);
        let p = classify(3.0 * star, 1.0, r).unwrap();
        assert_eq!(p.regime, Regime::CompactSupportFamily);
        assert!((p.sup_norm.unwrap() - 3f64.powf(-2.0 / 3.0) * n).abs() < 1e-14);
    }

    #[test]
    fn unique_positive_norm_matches_shooting() {
        let (r, v0) = (2.0, 1.0);
        let lambda = 1.1 * lambda_one(r);
        let p = classify(lambda, v0, r).unwrap();
        let top = p.sup_norm.unwrap();
        // Shoot U'' = V0/√U - λU from the midpoint and find where U reaches 0.
        let ys = crate::ode::integrate(
            |_, y: &[f64; 2]| [y[1], v0 / y[0].max(1e-300).sqrt() - lambda * y[0]],
            0.0,
            [top, 0.0],
            &[r * (1.0 - 1e-3)],
            crate::ode::Tolerance::default(),
            |_, y| y[0] > 0.0,
        )
        .unwrap();
        let near_edge = ys[0][0];
        assert!(near_edge > 0.0 && near_edge < 0.05 * top, "{near_edge} of {top}");
    }

    #[test]
    fn profile_endpoints_and_center() {
        let p = profile(3.0, 41, 1e-14).unwrap();
        assert_eq!(p.samples[20].1, 3.0);
        assert!((p.samples[20].0).abs() < 1e-15);
        assert_eq!(p.samples[0].1, 0.0);
        for i in 0..20 {
            assert!((p.samples[i].1 - p.samples[40 - i].1).abs() < 1e-13);
        }
    }

    #[test]
    fn boundary_slopes() {
        for mu in [3.0, 10.0] {
            let ev = ProfileEval::new(mu, 1e-14).unwrap();
            let s = boundary_slope(&ev).unwrap();
            assert!((s - exact_boundary_slope(mu)).abs() < 1e-6, "{mu}: {s}");
        }
        let ev = ProfileEval::new(R_F, 1e-14).unwrap();
        assert!(boundary_slope(&ev).unwrap() < 1e-6);
    }

    #[test]
    fn first_integral_on_profiles() {
        for mu in [R_F, 3.0, 10.0] {
            let ev = ProfileEval::new(mu, 1e-14).unwrap();
            let v = first_integral_violation(&ev, 41).unwrap();
            assert!(v < 1e-6, "{mu}: {v}");
        }
    }

    #[test]
    fn physical_rescaling() {
        let p = profile(R_F, 21, 1e-14).unwrap();
        let same = rescale_to_physical(&p, 2.0, 2.0);
        assert!((same.mu - p.mu).abs() < 1e-15);
        let star = lambda_star(PI / 2.0).unwrap();
        let phys = rescale_to_physical(&p, star, 4.0 / 9.0);
        assert!((phys.mu - 1.0).abs() < 1e-12);
        assert!((phys.l - PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn compact_support_family() {
        let r = 1.0;
        let star = lambda_star(r).unwrap();
        let flat = compact_support_solution(star, 1.0, r, 0.0, 101).unwrap();
        assert!((flat.mu - (4.0 / star).powf(2.0 / 3.0)).abs() < 1e-12);
        let eighth = compact_support_solution(8.0 * star, 1.0, r, 0.0, 101).unwrap();
        assert!((eighth.mu - 0.25 * flat.mu).abs() < 1e-12);
        let zmax = r * (8f64.sqrt() - 1.0);
        assert!(compact_support_solution(8.0 * star, 1.0, r, 1.01 * zmax, 11).is_err());
        let edge = compact_support_solution(8.0 * star, 1.0, r, zmax, 2001).unwrap();
        let first_positive = edge.samples.iter().find(|s| s.1 > 0.0).unwrap().0;
        let width = 2.0 * r / 8f64.sqrt();
        assert!((first_positive - (r - width)).abs() <= 2.0 * r / 2000.0 + 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn gamma_is_decreasing_and_bounded(a in 0.0f64..12.0, d in 0.01f64..1.0) {
            let m1 = R_F * a.exp();
            let m2 = m1 * (1.0 + d);
            let g1 = gamma(m1, 1e-14).unwrap();
            let g2 = gamma(m2, 1e-14).unwrap();
            prop_assert!(g1 > g2);
            prop_assert!(g2 > PI / 2.0 && g1 <= 2.0 * PI / 3.0 + 1e-12);
        }

        #[test]
        fn inverse_round_trip(t in 0.001f64..0.999) {
            let l = PI / 2.0 + t * (2.0 * PI / 3.0 - PI / 2.0);
            let mu = gamma_inverse(l, 1e-13).unwrap();
            prop_assert!((gamma(mu, 1e-14).unwrap() - l).abs() <= 2e-10);
        }
    }
}
