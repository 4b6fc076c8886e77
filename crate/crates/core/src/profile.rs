//! Refractive profiles `η(r)` on `[0, 1]` and their Liouville transformation.
//!
//! The transformation `x(r) = ∫₀ʳ √η` maps `y'' + k²η y = 0` to Schrödinger form
//! `φ'' + (k² − q)φ = 0` on `[0, a]`, with
//! `q = η''/(4η²) − 5η'²/(16η³)` composed with `r(x)`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::chebyshev::Chebyshev;
use crate::jet::Jet;
use crate::quadrature::{self, QuadratureError};

/// Absolute tolerance used for `x(r)` and the travel time.
pub const TRAVEL_TIME_TOL: f64 = 1e-13;
/// Residual bound for [`subinterval_boundary`].
pub const BOUNDARY_RESIDUAL: f64 = 1e-11;

const BASE_GRID: usize = 100;
const REFINE: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProfileError {
    #[error("profile is not certified positive: lower bound {lower_bound:e} near r = {at}")]
    NonPositive { at: f64, lower_bound: f64 },
    #[error("profile value is not finite at r = {at}")]
    NotFinite { at: f64 },
    #[error("tail is not normalized: η(1) = {eta1}, η'(1) = {deta1}")]
    TailNotNormalized { eta1: f64, deta1: f64 },
    #[error("derivative of order {requested} requested, profile supplies {available}")]
    DerivativeUnavailable { requested: usize, available: usize },
    #[error("mass {mass} outside (0, a] with a = {a}")]
    MassOutOfRange { mass: f64, a: f64 },
    #[error("boundary search stalled with residual {residual:e}")]
    BoundaryNotConverged { residual: f64 },
    #[error("quadrature failure: {0}")]
    QuadratureFailure(#[from] QuadratureError),
    #[error("unknown profile `{0}`")]
    UnknownProfile(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("cannot parse profile: {0}")]
    Parse(String),
    #[error("cannot read profile file: {0}")]
    Io(String),
}

/// Closed-form profiles with exact derivatives.
#[derive(Debug, Clone, PartialEq)]
pub enum NamedProfile {
    /// `η ≡ value`.
    Constant { value: f64 },
    /// `η = 16 / ((r + 1)² (r − 3)²)`, travel time `ln 3`.
    RationalExample,
    /// `η = 1 + A (1 + cos πr) / 2`; normalized tail, `η''(1) = Aπ²/2`.
    RaisedCosine { amplitude: f64 },
}

impl NamedProfile {
    pub fn identifier(&self) -> &'static str {
        match self {
            NamedProfile::Constant { .. } => "constant",
            NamedProfile::RationalExample => "rational_example",
            NamedProfile::RaisedCosine { .. } => "raised_cosine",
        }
    }

    pub fn parameters(&self) -> Vec<f64> {
        match self {
            NamedProfile::Constant { value } => vec![*value],
            NamedProfile::RationalExample => vec![],
            NamedProfile::RaisedCosine { amplitude } => vec![*amplitude],
        }
    }

    /// Looks up a profile by name. Accepts `constN` shorthands such as `const4`.
    pub fn from_name(name: &str, params: &[f64]) -> Result<Self, ProfileError> {
        let bad = |msg: &str| Err(ProfileError::InvalidParameters(format!("{name}: {msg}")));
        match name {
            "rational_example" | "example" => {
                if !params.is_empty() {
                    return bad("takes no parameters");
                }
                Ok(NamedProfile::RationalExample)
            }
            "constant" | "const" => match params {
                [] => Ok(NamedProfile::Constant { value: 1.0 }),
                [v] => Ok(NamedProfile::Constant { value: *v }),
                _ => bad("takes one parameter (the value of η)"),
            },
            "raised_cosine" => match params {
                [] => Ok(NamedProfile::RaisedCosine { amplitude: 1.0 }),
                [amp] => Ok(NamedProfile::RaisedCosine { amplitude: *amp }),
                _ => bad("takes one parameter (the amplitude)"),
            },
            other => {
                if let Some(v) = other.strip_prefix("const") {
                    if let Ok(value) = v.parse::<f64>() {
                        if params.is_empty() {
                            return Ok(NamedProfile::Constant { value });
                        }
                        return bad("shorthand takes no parameters");
                    }
                }
                Err(ProfileError::UnknownProfile(other.to_string()))
            }
        }
    }

    fn eta012(&self, r: f64) -> [f64; 3] {
        match *self {
            NamedProfile::Constant { value } => [value, 0.0, 0.0],
            NamedProfile::RationalExample => {
                let p = (1.0 + r) * (3.0 - r);
                let dp = 2.0 - 2.0 * r;
                let p2 = p * p;
                let eta = 16.0 / p2;
                let d1 = -32.0 * dp / (p2 * p);
                let d2 = 32.0 * (2.0 * p + 3.0 * dp * dp) / (p2 * p2);
                [eta, d1, d2]
            }
            NamedProfile::RaisedCosine { amplitude } => {
                let (s, c) = (std::f64::consts::PI * r).sin_cos();
                let pi = std::f64::consts::PI;
                [1.0 + 0.5 * amplitude * (1.0 + c), -0.5 * amplitude * pi * s, -0.5 * amplitude * pi * pi * c]
            }
        }
    }

    fn eta(&self, r: f64) -> f64 {
        match *self {
            NamedProfile::Constant { value } => value,
            NamedProfile::RationalExample => {
                let p = (1.0 + r) * (3.0 - r);
                16.0 / (p * p)
            }
            NamedProfile::RaisedCosine { amplitude } => {
                1.0 + 0.5 * amplitude * (1.0 + (std::f64::consts::PI * r).cos())
            }
        }
    }

    fn jet(&self, r: f64, order: usize) -> Jet {
        match *self {
            NamedProfile::Constant { value } => Jet::constant(value, order),
            NamedProfile::RationalExample => {
                let x = Jet::variable(r, order);
                let p = x.add_const(1.0).mul(&x.scale(-1.0).add_const(3.0));
                Jet::constant(16.0, order).div(&p.mul(&p))
            }
            NamedProfile::RaisedCosine { amplitude } => {
                let (c, _) = Jet::variable(r, order).scale(std::f64::consts::PI).cos_sin();
                c.scale(0.5 * amplitude).add_const(1.0 + 0.5 * amplitude)
            }
        }
    }

    /// Exact `m` with `η^{(u)}(1) = 0` for `u = 1..m+1` and `η^{(m+2)}(1) ≠ 0`.
    fn smoothness_m(&self) -> Option<u32> {
        match *self {
            NamedProfile::Constant { .. } => None,
            NamedProfile::RationalExample => Some(0),
            NamedProfile::RaisedCosine { amplitude } => (amplitude != 0.0).then_some(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChebyshevProfile {
    /// `η, η', …` as series in `T_j(2r − 1)`.
    series: Vec<Chebyshev>,
    max_deriv_order: usize,
}

impl ChebyshevProfile {
    pub fn coeffs(&self) -> &[f64] {
        self.series[0].coeffs()
    }

    pub fn max_deriv_order(&self) -> usize {
        self.max_deriv_order
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileKind {
    NamedAnalytic(NamedProfile),
    ChebyshevSeries(ChebyshevProfile),
}

/// Squared refractive index on `[0, 1]`, certified positive.
#[derive(Debug, Clone, PartialEq)]
pub struct RefractiveProfile {
    kind: ProfileKind,
    eta_min: f64,
    smoothness_m: Option<u32>,
    normalized_tail: bool,
}

impl RefractiveProfile {
    pub fn named(profile: NamedProfile) -> Result<Self, ProfileError> {
        let m = profile.smoothness_m();
        let mut p =
            Self { kind: ProfileKind::NamedAnalytic(profile), eta_min: 0.0, smoothness_m: m, normalized_tail: false };
        p.eta_min = p.certify_positive()?;
        p.normalized_tail = p.tail_is_normalized();
        Ok(p)
    }

    pub fn rational_example() -> Self {
        Self::named(NamedProfile::RationalExample).expect("example profile is positive")
    }

    pub fn constant(value: f64) -> Result<Self, ProfileError> {
        Self::named(NamedProfile::Constant { value })
    }

    pub fn raised_cosine(amplitude: f64) -> Result<Self, ProfileError> {
        Self::named(NamedProfile::RaisedCosine { amplitude })
    }

    /// `η(r) = Σ_j coeffs[j] T_j(2r − 1)`, trusted up to `deriv_order` derivatives.
    pub fn chebyshev(coeffs: Vec<f64>, deriv_order: usize) -> Result<Self, ProfileError> {
        if coeffs.is_empty() {
            return Err(ProfileError::InvalidParameters("empty coefficient list".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(ProfileError::InvalidParameters("non-finite coefficient".into()));
        }
        let mut series = vec![Chebyshev::new(coeffs, 0.0, 1.0)];
        // One derivative is always built so positivity can be certified.
        for _ in 0..deriv_order.max(2) {
            let next = series.last().expect("non-empty").derivative();
            series.push(next);
        }
        let kind = ProfileKind::ChebyshevSeries(ChebyshevProfile { series, max_deriv_order: deriv_order });
        let mut p = Self { kind, eta_min: 0.0, smoothness_m: None, normalized_tail: false };
        p.eta_min = p.certify_positive()?;
        Ok(p)
    }

    /// Declares (`true`) or clears the normalized-tail hypothesis. Declaring it verifies
    /// `η(1) = 1` and `η'(1) = 0` to evaluation precision.
    pub fn with_normalized_tail(mut self, flag: bool) -> Result<Self, ProfileError> {
        if flag && !self.tail_is_normalized() {
            let [eta1, deta1, _] = self.eta012(1.0);
            return Err(ProfileError::TailNotNormalized { eta1, deta1 });
        }
        self.normalized_tail = flag;
        Ok(self)
    }

    /// Declares the smoothness index `m` (user metadata; not verified).
    pub fn with_smoothness_m(mut self, m: Option<u32>) -> Self {
        self.smoothness_m = m;
        self
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn eta_min(&self) -> f64 {
        self.eta_min
    }

    pub fn smoothness_m(&self) -> Option<u32> {
        self.smoothness_m
    }

    pub fn normalized_tail(&self) -> bool {
        self.normalized_tail
    }

    /// Short human-readable label.
    pub fn label(&self) -> String {
        match &self.kind {
            ProfileKind::NamedAnalytic(n) => {
                let params = n.parameters();
                if params.is_empty() {
                    n.identifier().to_string()
                } else {
                    let p: Vec<String> = params.iter().map(|v| format!("{v}")).collect();
                    format!("{}:{}", n.identifier(), p.join(","))
                }
            }
            ProfileKind::ChebyshevSeries(c) => format!("chebyshev[{}]", c.coeffs().len()),
        }
    }

    /// Maximum derivative order the representation can supply (`None` = unlimited).
    pub fn max_derivative_order(&self) -> Option<usize> {
        match &self.kind {
            ProfileKind::NamedAnalytic(_) => None,
            ProfileKind::ChebyshevSeries(c) => Some(c.max_deriv_order),
        }
    }

    /// Whether the profile is constant (all derivatives vanish identically).
    pub fn is_constant(&self) -> bool {
        match &self.kind {
            ProfileKind::NamedAnalytic(NamedProfile::Constant { .. }) => true,
            ProfileKind::NamedAnalytic(_) => false,
            ProfileKind::ChebyshevSeries(c) => c.coeffs().iter().skip(1).all(|v| *v == 0.0),
        }
    }

    #[inline]
    pub fn eta(&self, r: f64) -> f64 {
        match &self.kind {
            ProfileKind::NamedAnalytic(n) => n.eta(r),
            ProfileKind::ChebyshevSeries(c) => c.series[0].eval(r),
        }
    }

    /// `[η, η', η'']` at `r`. Chebyshev profiles always return the series derivatives;
    /// use [`Self::derivatives`] for order-checked access.
    pub fn eta012(&self, r: f64) -> [f64; 3] {
        match &self.kind {
            ProfileKind::NamedAnalytic(n) => n.eta012(r),
            ProfileKind::ChebyshevSeries(c) => [c.series[0].eval(r), c.series[1].eval(r), c.series[2].eval(r)],
        }
    }

    /// `η^{(j)}(r)` for `j = 0..=order`.
    pub fn derivatives(&self, r: f64, order: usize) -> Result<Vec<f64>, ProfileError> {
        match &self.kind {
            ProfileKind::NamedAnalytic(n) => Ok(n.jet(r, order).derivatives()),
            ProfileKind::ChebyshevSeries(c) => {
                if order > c.max_deriv_order {
                    return Err(ProfileError::DerivativeUnavailable { requested: order, available: c.max_deriv_order });
                }
                Ok(c.series[..=order].iter().map(|s| s.eval(r)).collect())
            }
        }
    }

    fn tail_is_normalized(&self) -> bool {
        let [eta1, deta1, _] = self.eta012(1.0);
        let scale = match &self.kind {
            ProfileKind::NamedAnalytic(_) => 1.0,
            ProfileKind::ChebyshevSeries(c) => c.series[0].abs_bound().max(1.0),
        };
        (eta1 - 1.0).abs() <= 1e-12 * scale && deta1.abs() <= 1e-10 * scale
    }

    /// Lower bound for `η` from a refined grid and a first-order Taylor margin on each
    /// subinterval, with `|η'|` bounded by its endpoint values plus an `η''` correction.
    fn certify_positive(&self) -> Result<f64, ProfileError> {
        let n = BASE_GRID * REFINE;
        let h = 1.0 / n as f64;
        let mut lower = f64::INFINITY;
        let mut prev = self.eta012(0.0);
        if prev.iter().any(|v| !v.is_finite()) {
            return Err(ProfileError::NotFinite { at: 0.0 });
        }
        for i in 1..=n {
            let r = i as f64 * h;
            let cur = self.eta012(r);
            if cur.iter().any(|v| !v.is_finite()) {
                return Err(ProfileError::NotFinite { at: r });
            }
            let slope = prev[1].abs().max(cur[1].abs()) + h * prev[2].abs().max(cur[2].abs());
            let bound = prev[0].min(cur[0]) - 0.5 * h * slope;
            if bound <= 0.0 {
                return Err(ProfileError::NonPositive { at: r - 0.5 * h, lower_bound: bound });
            }
            lower = lower.min(bound);
            prev = cur;
        }
        Ok(lower)
    }

    /// `x(r) = ∫₀ʳ √η` by adaptive Gauss–Kronrod quadrature.
    pub fn x_of_r(&self, r: f64) -> Result<f64, ProfileError> {
        let (v, _) = quadrature::integrate(|s| self.eta(s).sqrt(), 0.0, r, TRAVEL_TIME_TOL)?;
        Ok(v)
    }

    /// Liouville potential at the physical coordinate `r`.
    pub fn q_at_r(&self, r: f64) -> f64 {
        let [e, d1, d2] = self.eta012(r);
        d2 / (4.0 * e * e) - 5.0 * d1 * d1 / (16.0 * e * e * e)
    }

    pub fn from_json(text: &str) -> Result<Self, ProfileError> {
        let spec: ProfileSpec = serde_json::from_str(text).map_err(|e| ProfileError::Parse(e.to_string()))?;
        spec.build()
    }

    pub fn from_path(path: &Path) -> Result<Self, ProfileError> {
        let text = std::fs::read_to_string(path).map_err(|e| ProfileError::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Resolves a command-line profile argument: an existing JSON file, or `name`,
    /// or `name:p1,p2,...`.
    pub fn from_arg(arg: &str) -> Result<Self, ProfileError> {
        let path = Path::new(arg);
        if path.is_file() {
            return Self::from_path(path);
        }
        let (name, params) = match arg.split_once(':') {
            Some((n, p)) => {
                let params = p
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| ProfileError::Parse(format!("{arg}: {e}")))?;
                (n, params)
            }
            None => (arg, vec![]),
        };
        Self::named(NamedProfile::from_name(name, &params)?)
    }

    /// Serializable description of this profile.
    pub fn to_spec(&self) -> ProfileSpec {
        match &self.kind {
            ProfileKind::NamedAnalytic(n) => ProfileSpec::Named {
                name: n.identifier().to_string(),
                params: n.parameters(),
                normalized_tail: Some(self.normalized_tail),
                smoothness_m: self.smoothness_m,
            },
            ProfileKind::ChebyshevSeries(c) => ProfileSpec::Chebyshev {
                coeffs: c.coeffs().to_vec(),
                deriv_order: c.max_deriv_order,
                normalized_tail: Some(self.normalized_tail),
                smoothness_m: self.smoothness_m,
            },
        }
    }
}

/// JSON profile description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ProfileSpec {
    Named {
        name: String,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        params: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        normalized_tail: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        smoothness_m: Option<u32>,
    },
    Chebyshev {
        coeffs: Vec<f64>,
        deriv_order: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        normalized_tail: Option<bool>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        smoothness_m: Option<u32>,
    },
}

impl ProfileSpec {
    pub fn build(&self) -> Result<RefractiveProfile, ProfileError> {
        let (mut p, tail, m) = match self {
            ProfileSpec::Named { name, params, normalized_tail, smoothness_m } => {
                (RefractiveProfile::named(NamedProfile::from_name(name, params)?)?, normalized_tail, smoothness_m)
            }
            ProfileSpec::Chebyshev { coeffs, deriv_order, normalized_tail, smoothness_m } => {
                (RefractiveProfile::chebyshev(coeffs.clone(), *deriv_order)?, normalized_tail, smoothness_m)
            }
        };
        if let Some(flag) = tail {
            p = p.with_normalized_tail(*flag)?;
        }
        if m.is_some() {
            p = p.with_smoothness_m(*m);
        }
        Ok(p)
    }
}

/// `a = ∫₀¹ √η`.
pub fn travel_time(profile: &RefractiveProfile) -> Result<f64, ProfileError> {
    profile.x_of_r(1.0)
}

/// Liouville-transformed data: travel time, coordinate maps and potential.
#[derive(Debug, Clone)]
pub struct LiouvilleData {
    profile: RefractiveProfile,
    a: f64,
    q_mean: f64,
    x_series: Chebyshev,
    r_series: Chebyshev,
}

pub fn liouville_transform(profile: &RefractiveProfile) -> Result<LiouvilleData, ProfileError> {
    LiouvilleData::new(profile)
}

impl LiouvilleData {
    pub fn new(profile: &RefractiveProfile) -> Result<Self, ProfileError> {
        if let Some(avail) = profile.max_derivative_order() {
            if avail < 2 {
                return Err(ProfileError::DerivativeUnavailable { requested: 2, available: avail });
            }
        }
        let a = travel_time(profile)?;
        let sqrt_eta = Chebyshev::fit_adaptive(|r| profile.eta(r).sqrt(), 0.0, 1.0, 1e-16, 4096);
        let x_series = sqrt_eta.integral();
        let invert = |x: f64| {
            // Bisection on the monotone cumulative map.
            let (mut lo, mut hi) = (0.0f64, 1.0f64);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if x_series.eval(mid) < x {
                    lo = mid;
                } else {
                    hi = mid;
                }
                if hi - lo <= 1e-15 {
                    break;
                }
            }
            0.5 * (lo + hi)
        };
        let r_series = Chebyshev::fit_adaptive(invert, 0.0, a, 1e-15, 4096);
        let (q_mean, _) = quadrature::integrate(|r| profile.q_at_r(r) * profile.eta(r).sqrt(), 0.0, 1.0, 1e-12)?;
        Ok(Self { profile: profile.clone(), a, q_mean, x_series, r_series })
    }

    pub fn profile(&self) -> &RefractiveProfile {
        &self.profile
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    /// `∫₀ᵃ q(x) dx`.
    pub fn q_mean(&self) -> f64 {
        self.q_mean
    }

    /// `η(0)`, which fixes the normalization `φ'(0) = η(0)^{−1/4}`.
    pub fn eta0(&self) -> f64 {
        self.profile.eta(0.0)
    }

    /// Accurate `x(r)` by adaptive quadrature.
    pub fn x_of_r(&self, r: f64) -> Result<f64, ProfileError> {
        self.profile.x_of_r(r)
    }

    /// Fast `x(r)` from the integrated Chebyshev series of `√η`.
    pub fn x_of_r_fast(&self, r: f64) -> f64 {
        self.x_series.eval(r)
    }

    /// Inverse map `r(x)`: interpolated, then one Newton step on the series `x(r)`.
    pub fn r_of_x(&self, x: f64) -> f64 {
        let r = self.r_series.eval(x).clamp(0.0, 1.0);
        let r = r - (self.x_series.eval(r) - x) / self.profile.eta(r).sqrt();
        r.clamp(0.0, 1.0)
    }

    /// Potential `q(x)`.
    pub fn q(&self, x: f64) -> f64 {
        self.profile.q_at_r(self.r_of_x(x))
    }

    /// `∫₀ˣ q(s) ds`, integrated in the physical variable.
    pub fn q_integral(&self, x: f64) -> Result<f64, ProfileError> {
        let r = self.r_of_x(x);
        let (v, _) = quadrature::integrate(|s| self.profile.q_at_r(s) * self.profile.eta(s).sqrt(), 0.0, r, 1e-13)?;
        Ok(v)
    }

    /// Left endpoint `ε` with `∫_ε¹ √η = mass`.
    pub fn subinterval_boundary(&self, mass: f64) -> Result<f64, ProfileError> {
        if !(mass > 0.0 && mass <= self.a) {
            return Err(ProfileError::MassOutOfRange { mass, a: self.a });
        }
        let target = self.a - mass;
        if target <= 0.0 {
            return Ok(0.0);
        }
        let mut eps = self.r_of_x(target);
        let mut residual = f64::INFINITY;
        for _ in 0..8 {
            let (tail, _) = quadrature::integrate(|s| self.profile.eta(s).sqrt(), eps, 1.0, TRAVEL_TIME_TOL)?;
            let g = tail - mass;
            residual = g.abs();
            if residual <= 1e-14 {
                break;
            }
            eps = (eps + g / self.profile.eta(eps).sqrt()).clamp(0.0, 1.0);
        }
        if residual > BOUNDARY_RESIDUAL {
            return Err(ProfileError::BoundaryNotConverged { residual });
        }
        Ok(eps)
    }
}

/// Left endpoint `ε ∈ [0, 1]` with `∫_ε¹ √η = mass`.
pub fn subinterval_boundary(profile: &RefractiveProfile, mass: f64) -> Result<f64, ProfileError> {
    LiouvilleData::new(profile)?.subinterval_boundary(mass)
}
