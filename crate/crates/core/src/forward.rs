//! Shooting for `y'' + k²η(r)y = 0`, `y(0) = 0`, `y'(0) = 1`, and the characteristic
//! function `d(k) = y'(1,k) sin k / k − y(1,k) cos k` with its `k`-derivative.
//!
//! Values are carried as `stored × exp(scale_log)` so that large `|Im k|` never
//! overflows. The root finder samples the scaled characteristic
//! `D(k) = d(k) · k · exp(−(1 + a)|Im k|)`.

use num_complex::Complex64;
use thiserror::Error;

use crate::ode::{Dop853, OdeError, OdeOptions};
use crate::profile::{travel_time, ProfileError, RefractiveProfile};

pub const MIN_TOL: f64 = 1e-13;
pub const MAX_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ForwardError {
    #[error("tolerance {0:e} outside [1e-13, 1e-6]")]
    InvalidTolerance(f64),
    #[error("integration failed at k = {k}: {source}")]
    StepUnderflow { k: Complex64, source: OdeError },
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// `y(1,k)`, `y'(1,k)` as stored values; true values are `stored × exp(scale_log)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryValues {
    pub y1: Complex64,
    pub dy1: Complex64,
    pub scale_log: f64,
}

impl BoundaryValues {
    pub fn y1_true(&self) -> Complex64 {
        self.y1 * self.scale_log.exp()
    }

    pub fn dy1_true(&self) -> Complex64 {
        self.dy1 * self.scale_log.exp()
    }
}

/// `d(k)` and `∂d/∂k` as stored values sharing `scale_log`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CharacteristicValue {
    pub d: Complex64,
    pub d_prime: Complex64,
    pub scale_log: f64,
}

impl CharacteristicValue {
    pub fn d_true(&self) -> Complex64 {
        self.d * self.scale_log.exp()
    }

    pub fn d_prime_true(&self) -> Complex64 {
        self.d_prime * self.scale_log.exp()
    }

    /// `d'/d`, independent of scaling.
    pub fn log_derivative(&self) -> Complex64 {
        self.d_prime / self.d
    }

    /// `D(k) = d(k) · k · exp(−(1 + a)|Im k|)`.
    pub fn scaled(&self, k: Complex64, a: f64) -> Complex64 {
        self.d * k * (self.scale_log - (1.0 + a) * k.im.abs()).exp()
    }
}

fn check_tol(tol: f64) -> Result<(), ForwardError> {
    if (MIN_TOL..=MAX_TOL).contains(&tol) {
        Ok(())
    } else {
        Err(ForwardError::InvalidTolerance(tol))
    }
}

/// `(sin k, cos k) · exp(−|Im k|)`, never overflowing.
pub fn scaled_sin_cos(k: Complex64) -> (Complex64, Complex64) {
    let t = k.im;
    let (s, c) = k.re.sin_cos();
    let e1 = Complex64::new(c, s) * (-t - t.abs()).exp();
    let e2 = Complex64::new(c, -s) * (t - t.abs()).exp();
    let i2 = Complex64::new(0.0, 2.0);
    ((e1 - e2) / i2, (e1 + e2) * 0.5)
}

/// `(sin k / k, d/dk (sin k / k)) · exp(−|Im k|)` with a series near the origin.
fn scaled_sinc(k: Complex64, sin_s: Complex64, cos_s: Complex64) -> (Complex64, Complex64) {
    if k.norm() < 1e-2 {
        let k2 = k * k;
        let damp = (-k.im.abs()).exp();
        let sinc = Complex64::new(1.0, 0.0) - k2 / 6.0 + k2 * k2 / 120.0 - k2 * k2 * k2 / 5040.0;
        let dsinc = k * (-1.0 / 3.0) + k * k2 / 30.0 - k * k2 * k2 / 840.0;
        (sinc * damp, dsinc * damp)
    } else {
        (sin_s / k, (cos_s * k - sin_s) / (k * k))
    }
}

struct Shot {
    y: Complex64,
    dy: Complex64,
    v: Complex64,
    dv: Complex64,
    scale_log: f64,
}

fn shoot(profile: &RefractiveProfile, k: Complex64, tol: f64, variational: bool) -> Result<Shot, ForwardError> {
    check_tol(tol)?;
    let k2 = k * k;
    let two_k = k * 2.0;
    let wk = k.norm().max(1.0);
    let mut opts = OdeOptions::<4>::new(tol);
    opts.h_max = 0.5 / wk;
    opts.renormalize = true;
    opts.weights = if variational { [wk, 1.0, wk, 1.0] } else { [wk, 1.0, 0.0, 0.0] };
    let zero = Complex64::new(0.0, 0.0);
    let rhs = |r: f64, s: &[Complex64; 4], ds: &mut [Complex64; 4]| {
        let eta = profile.eta(r);
        ds[0] = s[1];
        ds[1] = -k2 * eta * s[0];
        if variational {
            ds[2] = s[3];
            ds[3] = -(k2 * s[2] + two_k * s[0]) * eta;
        } else {
            ds[2] = zero;
            ds[3] = zero;
        }
    };
    let mut stepper = Dop853::new(rhs, 0.0, [zero, Complex64::new(1.0, 0.0), zero, zero], opts);
    stepper.advance_to(1.0).map_err(|source| ForwardError::StepUnderflow { k, source })?;
    let s = *stepper.state();
    let mag = s[0].norm().max(s[1].norm());
    let norm = if mag > 0.0 && mag.is_finite() { mag } else { 1.0 };
    Ok(Shot {
        y: s[0] / norm,
        dy: s[1] / norm,
        v: s[2] / norm,
        dv: s[3] / norm,
        scale_log: stepper.scale_log() + norm.ln(),
    })
}

/// Boundary values `y(1,k)`, `y'(1,k)`.
pub fn solve_ivp(profile: &RefractiveProfile, k: Complex64, tol: f64) -> Result<BoundaryValues, ForwardError> {
    let s = shoot(profile, k, tol, false)?;
    Ok(BoundaryValues { y1: s.y, dy1: s.dy, scale_log: s.scale_log })
}

/// `d(k)` and `∂d/∂k` via the variational system `v'' + k²ηv = −2kηy`.
pub fn characteristic(
    profile: &RefractiveProfile,
    k: Complex64,
    tol: f64,
) -> Result<CharacteristicValue, ForwardError> {
    let s = shoot(profile, k, tol, true)?;
    let (sin_s, cos_s) = scaled_sin_cos(k);
    let (sinc, dsinc) = scaled_sinc(k, sin_s, cos_s);
    let d = s.dy * sinc - s.y * cos_s;
    let d_prime = s.dv * sinc + s.dy * dsinc - s.v * cos_s + s.y * sin_s;
    Ok(CharacteristicValue { d, d_prime, scale_log: s.scale_log + k.im.abs() })
}

/// Solution of `y'' + k²ηy = 0` from arbitrary data at `r = 0`, sampled at the sorted
/// points `rs` (true values, no scaling; intended for moderate `k`).
pub fn solve_from(
    profile: &RefractiveProfile,
    k: Complex64,
    init: [Complex64; 2],
    rs: &[f64],
    tol: f64,
) -> Result<Vec<[Complex64; 2]>, ForwardError> {
    check_tol(tol)?;
    let k2 = k * k;
    let wk = k.norm().max(1.0);
    let mut opts = OdeOptions::<2>::new(tol);
    opts.h_max = 0.5 / wk;
    opts.weights = [wk, 1.0];
    let rhs = |r: f64, s: &[Complex64; 2], ds: &mut [Complex64; 2]| {
        ds[0] = s[1];
        ds[1] = -k2 * profile.eta(r) * s[0];
    };
    let mut stepper = Dop853::new(rhs, 0.0, init, opts);
    let mut out = Vec::with_capacity(rs.len());
    for &r in rs {
        stepper.advance_to(r).map_err(|source| ForwardError::StepUnderflow { k, source })?;
        out.push(*stepper.state());
    }
    Ok(out)
}

/// A profile bundled with its travel time, for repeated evaluation of `D(k)`.
#[derive(Debug, Clone)]
pub struct ForwardModel {
    profile: RefractiveProfile,
    a: f64,
}

impl ForwardModel {
    pub fn new(profile: &RefractiveProfile) -> Result<Self, ForwardError> {
        Ok(Self { profile: profile.clone(), a: travel_time(profile)? })
    }

    pub fn profile(&self) -> &RefractiveProfile {
        &self.profile
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn characteristic(&self, k: Complex64, tol: f64) -> Result<CharacteristicValue, ForwardError> {
        characteristic(&self.profile, k, tol)
    }

    /// `D(k)`.
    pub fn scaled(&self, k: Complex64, tol: f64) -> Result<Complex64, ForwardError> {
        Ok(self.characteristic(k, tol)?.scaled(k, self.a))
    }
}

/// `D(k) = d(k) · k · exp(−(1 + a)|Im k|)`.
pub fn scaled_characteristic(
    profile: &RefractiveProfile,
    a: f64,
    k: Complex64,
    tol: f64,
) -> Result<Complex64, ForwardError> {
    Ok(characteristic(profile, k, tol)?.scaled(k, a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    // Closed form for the example profile: q ≡ 1/4, φ'(0) = √3/2, a = ln 3, so
    // d(k) = (√3/2)[cos(μa) sin k / k − sin(μa) cos k / μ] with μ = √(k² − 1/4).
    fn example_d(k: Complex64) -> Complex64 {
        let a = 3f64.ln();
        let mu = (k * k - 0.25).sqrt();
        let pref = 3f64.sqrt() / 2.0;
        (((mu * a).cos() * k.sin() / k) - ((mu * a).sin() * k.cos() / mu)) * pref
    }

    #[test]
    fn constant_profiles_match_closed_forms() {
        let one = RefractiveProfile::constant(1.0).unwrap();
        let b = solve_ivp(&one, c(std::f64::consts::PI, 0.0), 1e-12).unwrap();
        assert!(b.y1_true().norm() < 1e-12);
        assert!((b.dy1_true() + 1.0).norm() < 1e-12);
        let four = RefractiveProfile::constant(4.0).unwrap();
        for k in [c(0.7, 0.0), c(3.0, 1.5), c(12.0, -4.0)] {
            let b = solve_ivp(&four, k, 1e-12).unwrap();
            let y = (k * 2.0).sin() / (k * 2.0);
            let dy = (k * 2.0).cos();
            assert!((b.y1_true() - y).norm() < 1e-10 * dy.norm().max(1.0));
            assert!((b.dy1_true() - dy).norm() < 1e-10 * dy.norm().max(1.0));
            let cv = characteristic(&four, k, 1e-12).unwrap();
            let exact = -k.sin().powi(3) / k;
            assert!((cv.d_true() - exact).norm() < 1e-9 * exact.norm().max(1.0), "k={k}");
        }
    }

    #[test]
    fn example_profile_matches_closed_form() {
        let p = RefractiveProfile::rational_example();
        for k in [c(1.0, 0.0), c(7.3, 0.0), c(10.0, 2.0), c(25.0, 3.0), c(4.0, -1.0)] {
            let cv = characteristic(&p, k, 1e-12).unwrap();
            let exact = example_d(k);
            let scale = (k.sin().norm() / k.norm()).max(k.cos().norm()) * (3f64.ln() * k.im.abs()).exp();
            assert!((cv.d_true() - exact).norm() < 1e-9 * scale, "k={k}: {} vs {exact}", cv.d_true());
        }
    }

    #[test]
    fn origin_value() {
        // At k = 0: y = r, so d(0) = 1·1 − 1·1 = 0 for every profile.
        let p = RefractiveProfile::rational_example();
        let cv = characteristic(&p, c(0.0, 0.0), 1e-12).unwrap();
        assert!(cv.d_true().norm() < 1e-14);
        assert!(cv.d_prime_true().norm() < 1e-14);
    }

    #[test]
    fn no_overflow_far_from_real_axis() {
        let p = RefractiveProfile::rational_example();
        let a = 3f64.ln();
        let k = c(50.0, 400.0);
        let cv = characteristic(&p, k, 1e-10).unwrap();
        assert!(cv.d.is_finite() && cv.scale_log.is_finite());
        // Leading terms cancel above the axis: |D| ~ (√3/2) / (32 |k|²).
        let d = cv.scaled(k, a).norm() * 32.0 * k.norm_sqr() / (3f64.sqrt() / 2.0);
        assert!((d - 1.0).abs() < 0.05, "{d}");
        let k = c(50.0, 200.0);
        let got = characteristic(&p, k, 1e-12).unwrap().scaled(k, a);
        let exact = example_d(k) * k * (-(1.0 + a) * k.im).exp();
        assert!((got - exact).norm() < 1e-4 * exact.norm(), "{got} vs {exact}");
    }

    #[test]
    fn tolerance_range_is_enforced() {
        let p = RefractiveProfile::rational_example();
        assert!(matches!(solve_ivp(&p, c(1.0, 0.0), 1e-15), Err(ForwardError::InvalidTolerance(_))));
        assert!(matches!(solve_ivp(&p, c(1.0, 0.0), 1e-3), Err(ForwardError::InvalidTolerance(_))));
    }
}
