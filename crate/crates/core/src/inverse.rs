//! Computable ingredients of the uniqueness results: subinterval endpoints, the
//! Wronskian function `g(k)` evaluated two independent ways, the density threshold
//! `a + 1 − 2b`, and finite-radius density estimates.
//!
//! Everything here works on the potential side. `φ(x, k)` solves
//! `φ'' + (k² − q)φ = 0` on `[0, a]` with `φ(0) = 0`, `φ'(0) = η(0)^{−1/4}`; when `q̃ = q`
//! on `[x₀, a]`,
//!
//! ```text
//! g(k) = ∫₀^{x₀} (q̃ − q) φ φ̃ dx = φ̃'(a) φ(a) − φ̃(a) φ'(a).
//! ```

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ode::{Dop853, OdeError, OdeOptions};
use crate::profile::{LiouvilleData, ProfileError, RefractiveProfile};
use crate::quadrature::{self, gauss_legendre};
use crate::zeros::{SpectralZero, ZeroClass};

/// Agreement of `q` and `q̃` on `[x₀, a]`, and of the travel times.
pub const AGREEMENT_TOL: f64 = 1e-10;
/// ODE tolerance for `φ`, `φ̃`.
pub const WRONSKIAN_ODE_TOL: f64 = 1e-13;
const AGREEMENT_GRID: usize = 401;
const GAUSS_NODES: usize = 16;

#[derive(Debug, Error)]
pub enum InverseError {
    #[error("a = {a} must exceed 1")]
    RegimeError { a: f64 },
    #[error("b = {b} must be at least (a − 1)/2 = {min} and give a threshold in [0, 2]")]
    InvalidB { b: f64, min: f64 },
    #[error("potentials differ by {sup:e} on [{x0}, a]")]
    AgreementViolated { x0: f64, sup: f64 },
    #[error("travel times differ: {a} vs {a_tilde}")]
    TravelTimeMismatch { a: f64, a_tilde: f64 },
    #[error("agreement point x0 = {x0} outside (0, {a}]")]
    InvalidAgreementPoint { x0: f64, a: f64 },
    #[error("invalid bump: {0}")]
    InvalidBump(String),
    #[error("integration failed at k = {k}: {source}")]
    Integration { k: Complex64, source: OdeError },
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

/// `ε` with `∫_ε¹ √η = (a−1)/2`, and the reference boundary `ε₁` with mass `(a+1)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubintervalData {
    pub a: f64,
    pub epsilon: f64,
    pub epsilon1: f64,
    /// Left end of the potential-side interval where `q` is known: `(a + 1)/2`.
    pub x0: f64,
}

pub fn subinterval_data(liouville: &LiouvilleData) -> Result<SubintervalData, InverseError> {
    let a = liouville.a();
    if a <= 1.0 {
        return Err(InverseError::RegimeError { a });
    }
    Ok(SubintervalData {
        a,
        epsilon: liouville.subinterval_boundary(0.5 * (a - 1.0))?,
        epsilon1: liouville.subinterval_boundary(0.5 * (a + 1.0))?,
        x0: 0.5 * (a + 1.0),
    })
}

/// `∫_lo^hi √η`.
pub fn optical_length(profile: &RefractiveProfile, lo: f64, hi: f64) -> Result<f64, InverseError> {
    let (v, _) = quadrature::integrate(|r| profile.eta(r).sqrt(), lo, hi, 1e-14).map_err(ProfileError::from)?;
    Ok(v)
}

/// `a + 1 − 2b`, for `a > 1` and `(a−1)/2 ≤ b ≤ (a+1)/2`. The lower end of `b` is the
/// boundary value 2, which the strict hypothesis `b > (a−1)/2` excludes; see
/// [`threshold_is_strict`].
pub fn density_threshold(a: f64, b: f64) -> Result<f64, InverseError> {
    if !(a > 1.0) {
        return Err(InverseError::RegimeError { a });
    }
    // (a − 2b) + 1 is exact at b = (a−1)/2, where a − 2b = 1 is representable.
    let t = (a - 2.0 * b) + 1.0;
    let slack = 8.0 * f64::EPSILON * (1.0 + a);
    if !(t >= -slack && t <= 2.0 + slack) || !b.is_finite() {
        return Err(InverseError::InvalidB { b, min: 0.5 * (a - 1.0) });
    }
    Ok(t.clamp(0.0, 2.0))
}

/// True when `b > (a−1)/2`, so the threshold lies in `[0, 2)`.
pub fn threshold_is_strict(a: f64, b: f64) -> bool {
    b > 0.5 * (a - 1.0)
}

/// Smooth bump `A exp(1 − 1/(1 − u²))`, `u = (x − center)/half_width`, zero for `|u| ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: f64,
    pub half_width: f64,
    pub amplitude: f64,
}

impl Bump {
    pub fn new(center: f64, half_width: f64, amplitude: f64) -> Result<Self, InverseError> {
        let b = Self { center, half_width, amplitude };
        b.validate()?;
        Ok(b)
    }

    fn validate(&self) -> Result<(), InverseError> {
        if !(self.half_width > 0.0 && self.center.is_finite() && self.amplitude.is_finite()) {
            return Err(InverseError::InvalidBump(format!("{self:?}")));
        }
        Ok(())
    }

    pub fn support(&self) -> (f64, f64) {
        (self.center - self.half_width, self.center + self.half_width)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = (x - self.center) / self.half_width;
        let s = 1.0 - u * u;
        if s <= 0.0 {
            0.0
        } else {
            self.amplitude * (1.0 - 1.0 / s).exp()
        }
    }
}

/// A Liouville potential, optionally perturbed by a bump.
#[derive(Debug, Clone)]
pub struct Potential {
    liouville: Arc<LiouvilleData>,
    bump: Option<Bump>,
}

impl Potential {
    pub fn from_profile(profile: &RefractiveProfile) -> Result<Self, InverseError> {
        Ok(Self { liouville: Arc::new(LiouvilleData::new(profile)?), bump: None })
    }

    pub fn from_liouville(liouville: Arc<LiouvilleData>) -> Self {
        Self { liouville, bump: None }
    }

    pub fn with_bump(mut self, bump: Bump) -> Result<Self, InverseError> {
        bump.validate()?;
        self.bump = Some(bump);
        Ok(self)
    }

    pub fn liouville(&self) -> &LiouvilleData {
        &self.liouville
    }

    pub fn bump(&self) -> Option<&Bump> {
        self.bump.as_ref()
    }

    pub fn a(&self) -> f64 {
        self.liouville.a()
    }

    /// `φ'(0) = η(0)^{−1/4}` of the underlying profile.
    pub fn initial_slope(&self) -> f64 {
        self.liouville.eta0().powf(-0.25)
    }

    pub fn q(&self, x: f64) -> f64 {
        self.liouville.q(x) + self.bump.map_or(0.0, |b| b.eval(x))
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.bump.map(|b| vec![b.support().0, b.support().1]).unwrap_or_default()
    }
}

/// A pair `q`, `q̃` agreeing on `[x₀, a]`, with the optional density parameters `b`, `α`.
#[derive(Debug, Clone)]
pub struct UniquenessScenario {
    pub q: Potential,
    pub q_tilde: Potential,
    pub agree_from: f64,
    pub b: Option<f64>,
    pub alpha: Option<f64>,
    /// Certified `sup |q − q̃|` on `[x₀, a]`.
    pub agreement_sup: f64,
}

impl UniquenessScenario {
    pub fn new(
        q: Potential,
        q_tilde: Potential,
        agree_from: f64,
        b: Option<f64>,
        alpha: Option<f64>,
    ) -> Result<Self, InverseError> {
        let (a, a_tilde) = (q.a(), q_tilde.a());
        if (a - a_tilde).abs() > AGREEMENT_TOL {
            return Err(InverseError::TravelTimeMismatch { a, a_tilde });
        }
        if !(agree_from > 0.0 && agree_from <= a) {
            return Err(InverseError::InvalidAgreementPoint { x0: agree_from, a });
        }
        let sup = (0..AGREEMENT_GRID)
            .map(|i| agree_from + (a - agree_from) * i as f64 / (AGREEMENT_GRID - 1) as f64)
            .map(|x| (q.q(x) - q_tilde.q(x)).abs())
            .fold(0.0, f64::max);
        if !(sup <= AGREEMENT_TOL) {
            return Err(InverseError::AgreementViolated { x0: agree_from, sup });
        }
        Ok(Self { q, q_tilde, agree_from, b, alpha, agreement_sup: sup })
    }

    /// `q̃ = q + bump` and `q` known on `[x₀, a]`, `x₀ = (a+1)/2`.
    pub fn bumped(profile: &RefractiveProfile, bump: Bump) -> Result<Self, InverseError> {
        let q = Potential::from_profile(profile)?;
        let q_tilde = q.clone().with_bump(bump)?;
        let a = q.a();
        Self::new(q, q_tilde, (0.5 * (a + 1.0)).min(a), None, None)
    }

    pub fn a(&self) -> f64 {
        self.q.a()
    }

    pub fn from_json(text: &str) -> Result<Self, InverseError> {
        let spec: ScenarioSpec = serde_json::from_str(text).map_err(|e| InverseError::Scenario(e.to_string()))?;
        spec.build()
    }

    pub fn from_path(path: &Path) -> Result<Self, InverseError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| InverseError::Scenario(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }
}

/// A potential reference in scenario files: a profile argument (name or path), or a
/// profile with a bump added to its potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialRef {
    Profile(String),
    Bumped { profile: String, bump: Bump },
}

impl PotentialRef {
    pub fn build(&self) -> Result<Potential, InverseError> {
        match self {
            PotentialRef::Profile(p) => Potential::from_profile(&RefractiveProfile::from_arg(p)?),
            PotentialRef::Bumped { profile, bump } => {
                Potential::from_profile(&RefractiveProfile::from_arg(profile)?)?.with_bump(*bump)
            }
        }
    }
}

/// Scenario file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub q: PotentialRef,
    pub q_tilde: PotentialRef,
    pub agree_from: f64,
    #[serde(default)]
    pub b: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
}

impl ScenarioSpec {
    pub fn build(&self) -> Result<UniquenessScenario, InverseError> {
        UniquenessScenario::new(self.q.build()?, self.q_tilde.build()?, self.agree_from, self.b, self.alpha)
    }
}

/// `g(k)` from the integral over `[0, x₀]` and from the boundary Wronskian at `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WronskianValue {
    pub k: Complex64,
    pub integral: Complex64,
    pub wronskian: Complex64,
}

impl WronskianValue {
    pub fn gap(&self) -> f64 {
        (self.integral - self.wronskian).norm()
    }

    /// `max(1, |g|)`, the scale for relative agreement.
    pub fn scale(&self) -> f64 {
        self.integral.norm().max(self.wronskian.norm()).max(1.0)
    }

    pub fn relative_gap(&self) -> f64 {
        self.gap() / self.scale()
    }
}

/// Evaluates `g(k)` both ways. The two solutions are integrated together; the integral
/// form uses composite Gauss–Legendre samples of `(q̃ − q) φ φ̃` on `[0, x₀]`, the
/// Wronskian form only the boundary values at `a`.
pub fn wronskian_g(scenario: &UniquenessScenario, k: Complex64) -> Result<WronskianValue, InverseError> {
    let a = scenario.a();
    let x0 = scenario.agree_from;
    let mut breaks = vec![0.0, x0];
    breaks.extend(scenario.q.breakpoints().into_iter().chain(scenario.q_tilde.breakpoints()));
    breaks.retain(|&b| (0.0..=x0).contains(&b));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup_by(|p, q| (*p - *q).abs() < 1e-14);

    let panels_per_unit = (2.0 * k.norm()).max(8.0).ceil();
    let (gx, gw) = gauss_legendre(GAUSS_NODES);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    for seg in breaks.windows(2) {
        let (lo, hi) = (seg[0], seg[1]);
        let panels = ((hi - lo) * panels_per_unit).ceil().max(4.0) as usize;
        let h = (hi - lo) / panels as f64;
        for p in 0..panels {
            let mid = lo + (p as f64 + 0.5) * h;
            for (x, w) in gx.iter().zip(&gw) {
                nodes.push(mid + 0.5 * h * x);
                weights.push(0.5 * h * w);
            }
        }
    }

    let (q, qt) = (&scenario.q, &scenario.q_tilde);
    let k2 = k * k;
    let wk = k.norm().max(1.0);
    let mut opts = OdeOptions::<4>::new(WRONSKIAN_ODE_TOL);
    opts.h_max = 0.25 / wk;
    opts.weights = [wk, 1.0, wk, 1.0];
    let rhs = |x: f64, s: &[Complex64; 4], ds: &mut [Complex64; 4]| {
        ds[0] = s[1];
        ds[1] = (q.q(x) - k2) * s[0];
        ds[2] = s[3];
        ds[3] = (qt.q(x) - k2) * s[2];
    };
    let zero = Complex64::new(0.0, 0.0);
    let init = [zero, Complex64::new(q.initial_slope(), 0.0), zero, Complex64::new(qt.initial_slope(), 0.0)];
    let mut stepper = Dop853::new(rhs, 0.0, init, opts);
    let fail = |source| InverseError::Integration { k, source };
    let mut integral = zero;
    for (&x, &w) in nodes.iter().zip(&weights) {
        stepper.advance_to(x).map_err(fail)?;
        let s = stepper.state();
        integral += w * (qt.q(x) - q.q(x)) * s[0] * s[2];
    }
    stepper.advance_to(a).map_err(fail)?;
    let s = stepper.state();
    let wronskian = s[3] * s[0] - s[2] * s[1];
    Ok(WronskianValue { k, integral, wronskian })
}

/// Which non-real zeros enter `N_D(r)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subset {
    All,
    /// Zeros whose ordinal (by real part, from 0) is `offset` modulo `step`.
    Every {
        step: usize,
        offset: usize,
    },
}

impl Subset {
    fn contains(&self, ordinal: usize) -> bool {
        match *self {
            Subset::All => true,
            Subset::Every { step, offset } => step > 0 && ordinal % step == offset % step,
        }
    }
}

/// `α̂ = N_D(r) π / (2r)`, a finite-radius estimate of the density parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DensityEstimate {
    pub r: f64,
    /// Zeros of `D` in `|k| ≤ r`, all symmetric copies, with multiplicity.
    pub count: u64,
    pub alpha_hat: f64,
}

impl DensityEstimate {
    /// Whether the estimate exceeds the threshold at this radius. This is a finite-`r`
    /// indication only; the hypothesis concerns the limit `r → ∞`.
    pub fn exceeds(&self, threshold: f64) -> bool {
        self.alpha_hat > threshold
    }
}

pub fn density_estimate(zeros: &[SpectralZero], r: f64, subset: Subset) -> DensityEstimate {
    let mut nonreal: Vec<&SpectralZero> = zeros.iter().filter(|z| z.class == ZeroClass::Nonreal).collect();
    nonreal.sort_by(|p, q| p.k.re.total_cmp(&q.k.re).then(p.k.im.total_cmp(&q.k.im)));
    let count: u64 = nonreal
        .iter()
        .enumerate()
        .filter(|(j, z)| subset.contains(*j) && z.k.norm() <= r)
        .map(|(_, z)| z.multiplicity as u64 * if z.k.re == 0.0 { 2 } else { 4 })
        .sum();
    let alpha_hat = if r > 0.0 { count as f64 * PI / (2.0 * r) } else { 0.0 };
    DensityEstimate { r, count, alpha_hat }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example() -> RefractiveProfile {
        RefractiveProfile::rational_example()
    }

    #[test]
    fn epsilon_for_the_example() {
        let l = LiouvilleData::new(&example()).unwrap();
        let s = subinterval_data(&l).unwrap();
        let a = 3f64.ln();
        // ln((3 − ε)/(1 + ε)) = (a − 1)/2 has the closed form ε = (3 − t)/(1 + t), t = e^{(a−1)/2}.
        let t = (0.5 * (a - 1.0)).exp();
        assert!((s.epsilon - (3.0 - t) / (1.0 + t)).abs() < 1e-11, "{s:?}");
        assert!(s.epsilon > s.epsilon1);
        assert!((l.x_of_r(s.epsilon).unwrap() - s.x0).abs() < 1e-10);
        assert!((optical_length(&example(), s.epsilon1, s.epsilon).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn epsilon_needs_a_above_one() {
        let l = LiouvilleData::new(&RefractiveProfile::raised_cosine(-0.5).unwrap()).unwrap();
        assert!(matches!(subinterval_data(&l), Err(InverseError::RegimeError { .. })));
    }

    #[test]
    fn threshold_arithmetic() {
        let a = 3f64.ln();
        assert_eq!(density_threshold(a, 0.5 * (a - 1.0)).unwrap(), 2.0);
        assert!(!threshold_is_strict(a, 0.5 * (a - 1.0)));
        assert!(density_threshold(a, 0.5 * (a + 1.0)).unwrap().abs() < 1e-15);
        assert!((density_threshold(a, 0.6).unwrap() - (a + 1.0 - 1.2)).abs() < 1e-15);
        assert!(density_threshold(a, 0.0).is_err());
        assert!(density_threshold(0.9, 0.5).is_err());
    }

    #[test]
    fn identical_potentials_give_zero() {
        let q = Potential::from_profile(&example()).unwrap();
        let s = UniquenessScenario::new(q.clone(), q, 0.5, None, None).unwrap();
        for k in [Complex64::new(0.0, 0.0), Complex64::new(3.7, 0.0), Complex64::new(12.0, 2.5)] {
            let g = wronskian_g(&s, k).unwrap();
            assert_eq!(g.integral, Complex64::new(0.0, 0.0));
            assert!(g.wronskian.norm() < 1e-12, "{g:?}");
        }
    }

    #[test]
    fn bump_scenario_two_way_agreement() {
        let a = 3f64.ln();
        let x0 = 0.5 * (a + 1.0);
        let s = UniquenessScenario::bumped(&example(), Bump::new(x0 / 4.0, x0 / 4.0, 0.8).unwrap()).unwrap();
        for k in [Complex64::new(0.0, 0.0), Complex64::new(3.7, 0.0), Complex64::new(25.0, 3.0)] {
            let g = wronskian_g(&s, k).unwrap();
            assert!(g.relative_gap() <= 1e-8, "{g:?}");
            assert!(g.integral.norm() > 1e-6, "{g:?}");
        }
    }

    #[test]
    fn disagreement_is_rejected() {
        let q = Potential::from_profile(&example()).unwrap();
        let qt = q.clone().with_bump(Bump::new(0.9, 0.2, 1.0).unwrap()).unwrap();
        assert!(matches!(UniquenessScenario::new(q, qt, 0.8, None, None), Err(InverseError::AgreementViolated { .. })));
    }

    #[test]
    fn scenario_json() {
        let text = r#"{"q":"rational_example","q_tilde":{"profile":"rational_example","bump":{"center":0.2,"half_width":0.2,"amplitude":0.5}},"agree_from":1.0,"b":0.6}"#;
        let s = UniquenessScenario::from_json(text).unwrap();
        assert_eq!(s.b, Some(0.6));
        assert!(s.q_tilde.bump().is_some());
        assert!(UniquenessScenario::from_json(r#"{"q":"rational_example"}"#).is_err());
    }

    #[test]
    fn density_of_empty_and_thinned_sets() {
        assert_eq!(density_estimate(&[], 10.0, Subset::All).alpha_hat, 0.0);
        let zeros: Vec<SpectralZero> =
            (1..=10).map(|j| SpectralZero::canonical(Complex64::new(j as f64 * PI, 1.0), 1, 0.0)).collect();
        let all = density_estimate(&zeros, 100.0, Subset::All);
        assert_eq!(all.count, 40);
        let half = density_estimate(&zeros, 100.0, Subset::Every { step: 2, offset: 0 });
        assert_eq!(half.count, 20);
        assert!((all.alpha_hat - 2.0 * half.alpha_hat).abs() < 1e-15);
    }
}
