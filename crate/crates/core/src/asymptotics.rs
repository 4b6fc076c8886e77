//! Leading-order asymptotics of the zeros of `d(k)`, the equation `z − λ log z = w`,
//! matching of computed zeros to predicted sequences, and counting-law ratios.
//!
//! Non-real zeros in the right half-plane form two sequences `k_n^±`. With `p = m + 2`
//! and `c = η^{(m+2)}(1)`:
//!
//! ```text
//! a > 1:  k_n^± = nπ   ± (i/2)  Log( 4 (2nπi)^p / ((±1)^m c))
//! a < 1:  k_n^± = nπ/a ± (i/2a) Log(−4 (2nπi)^p / ((±1)^m c))
//! a = 1:  k_n^± = nπ   ± (i/2)  Log(−8 (2nπi)^{m+1} Q / ((±1)^{m+1} c)),  Q = ∫₀ᵃ q
//! ```
//!
//! Real zeros for `a ≠ 1` satisfy `k'_n² ≈ n²π²/(a−1)² + Q/(a−1)`.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::{LiouvilleData, ProfileError};
use crate::zeros::{SearchReport, SpectralZero, ZeroClass};

/// `|a − 1|` below this is treated as `a = 1`.
pub const REGIME_TOL: f64 = 1e-6;
pub const TRANSCENDENTAL_TOL: f64 = 1e-12;
pub const MAX_FIXED_POINT_ITERATIONS: usize = 100;
/// Largest index shift tried by the matcher in either direction.
pub const MAX_SHIFT: i64 = 2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AsymptoticsError {
    #[error("invalid asymptotic case: {0}")]
    InvalidCase(String),
    #[error("regime {regime} is inconsistent with a = {a}")]
    CaseMismatch { regime: Regime, a: f64 },
    #[error("a = {a} is too close to 1 for this formula")]
    RegimeError { a: f64 },
    #[error("no real prediction for n = {n}: k'² = {square}")]
    NegativeSquare { n: i64, square: f64 },
    #[error("|w| = {abs_w} is below the asymptotic threshold {threshold}")]
    OutsideAsymptoticRegime { abs_w: f64, threshold: f64 },
    #[error("fixed-point iteration diverged (residual {residual:e} after {iterations} iterations)")]
    IterationDiverged { residual: f64, iterations: usize },
    #[error("index must be at least 1, got {0}")]
    InvalidIndex(i64),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Regime {
    #[serde(rename = "a_gt_1")]
    AGreaterThanOne,
    #[serde(rename = "a_lt_1")]
    ALessThanOne,
    #[serde(rename = "a_eq_1")]
    AEqualsOne,
}

impl Regime {
    pub fn classify(a: f64) -> Self {
        if (a - 1.0).abs() < REGIME_TOL {
            Regime::AEqualsOne
        } else if a > 1.0 {
            Regime::AGreaterThanOne
        } else {
            Regime::ALessThanOne
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::AGreaterThanOne => "a_gt_1",
            Regime::ALessThanOne => "a_lt_1",
            Regime::AEqualsOne => "a_eq_1",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "a_gt_1" => Some(Regime::AGreaterThanOne),
            "a_lt_1" => Some(Regime::ALessThanOne),
            "a_eq_1" => Some(Regime::AEqualsOne),
            _ => None,
        }
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Branch {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Plus, Branch::Minus];

    pub fn sign(&self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Branch::Plus => "+",
            Branch::Minus => "-",
        }
    }
}

/// Data entering the leading-order formulas.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticCase {
    pub regime: Regime,
    pub m: u32,
    /// `η^{(m+2)}(1)`.
    pub eta_deriv: f64,
    /// `∫₀ᵃ q`; only used when `a = 1`.
    pub q_mean: f64,
    pub a: f64,
}

impl AsymptoticCase {
    pub fn new(regime: Regime, m: u32, eta_deriv: f64, q_mean: f64, a: f64) -> Result<Self, AsymptoticsError> {
        let case = Self { regime, m, eta_deriv, q_mean, a };
        case.validate()?;
        Ok(case)
    }

    /// Reads `a`, `∫q`, `m` and `η^{(m+2)}(1)` from the profile.
    pub fn from_liouville(liouville: &LiouvilleData) -> Result<Self, AsymptoticsError> {
        let profile = liouville.profile();
        let m = profile.smoothness_m().ok_or_else(|| {
            AsymptoticsError::InvalidCase(format!("profile {} has no finite smoothness index m", profile.label()))
        })?;
        let order = m as usize + 2;
        let eta_deriv = profile.derivatives(1.0, order)?[order];
        let a = liouville.a();
        Self::new(Regime::classify(a), m, eta_deriv, liouville.q_mean(), a)
    }

    pub fn validate(&self) -> Result<(), AsymptoticsError> {
        if !(self.eta_deriv.is_finite() && self.eta_deriv != 0.0) {
            return Err(AsymptoticsError::InvalidCase(format!(
                "η^(m+2)(1) = {} must be finite and nonzero",
                self.eta_deriv
            )));
        }
        if !(self.a.is_finite() && self.a > 0.0) {
            return Err(AsymptoticsError::InvalidCase(format!("travel time {} must be positive", self.a)));
        }
        if Regime::classify(self.a) != self.regime {
            return Err(AsymptoticsError::CaseMismatch { regime: self.regime, a: self.a });
        }
        if self.regime == Regime::AEqualsOne && !(self.q_mean.is_finite() && self.q_mean != 0.0) {
            return Err(AsymptoticsError::InvalidCase("a = 1 requires ∫q ≠ 0".into()));
        }
        Ok(())
    }

    /// Real-part spacing of consecutive predictions.
    pub fn spacing(&self) -> f64 {
        match self.regime {
            Regime::ALessThanOne => PI / self.a,
            _ => PI,
        }
    }

    /// `(c, p, A)` with `k_n^± = nπ/c ± (i/2c) Log(A (2nπi)^p)`.
    fn coefficients(&self, branch: Branch) -> (f64, i32, Complex64) {
        let s = branch.sign();
        let m = self.m as i32;
        let sm = s.powi(m);
        match self.regime {
            Regime::AGreaterThanOne => (1.0, m + 2, Complex64::new(4.0 / (sm * self.eta_deriv), 0.0)),
            Regime::ALessThanOne => (self.a, m + 2, Complex64::new(-4.0 / (sm * self.eta_deriv), 0.0)),
            Regime::AEqualsOne => {
                let sm1 = s.powi(m + 1);
                (1.0, m + 1, Complex64::new(-8.0 * self.q_mean / (sm1 * self.eta_deriv), 0.0))
            }
        }
    }
}

fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}

/// `Log(A (2nπi)^p)` with the product formed before the principal logarithm.
fn log_argument(amp: Complex64, p: i32, n: i64) -> Complex64 {
    let base = Complex64::new(0.0, 2.0 * n as f64 * PI);
    (amp * base.powi(p)).ln()
}

/// Leading-order prediction of `k_n^±` (residual term dropped, principal logarithm).
pub fn predict_nonreal(case: &AsymptoticCase, n: i64, branch: Branch) -> Result<Complex64, AsymptoticsError> {
    case.validate()?;
    if n < 1 {
        return Err(AsymptoticsError::InvalidIndex(n));
    }
    let (c, p, amp) = case.coefficients(branch);
    let s = branch.sign();
    Ok(n as f64 * PI / c + i() * (s / (2.0 * c)) * log_argument(amp, p, n))
}

/// Prediction refined through `z − λ log z = w`: the factor `(2nπi)^p` is replaced by
/// `(2cki)^p`, which adds the `O(log n / n)` correction. Uses `z = −2isck`, `λ = p`.
pub fn predict_nonreal_refined(case: &AsymptoticCase, n: i64, branch: Branch) -> Result<Complex64, AsymptoticsError> {
    case.validate()?;
    if n < 1 {
        return Err(AsymptoticsError::InvalidIndex(n));
    }
    let (c, p, amp) = case.coefficients(branch);
    let s = branch.sign();
    let npi = n as f64 * PI;
    let lambda = p as f64;
    let w = log_argument(amp, p, n) - i() * (2.0 * s * npi) + lambda * ((i() * (0.5 * s)).ln() - npi.ln());
    let z = solve_transcendental(lambda, w, TRANSCENDENTAL_TOL)?;
    Ok(z * i() * (s / (2.0 * c)))
}

/// Solves `z − λ Log z = w` by the fixed point `z ← w + λ Log z`, seeded with
/// `w + λ Log w`. Requires `|w| ≥ 10(1 + |λ|)`.
///
/// Near the negative real axis with `λ < 0` there may be no root at all (for real
/// `w < 0` the imaginary part of any candidate contradicts the branch of `Log z`); the
/// iteration then oscillates across the cut and `IterationDiverged` is returned.
pub fn solve_transcendental(lambda: f64, w: Complex64, tol: f64) -> Result<Complex64, AsymptoticsError> {
    let threshold = 10.0 * (1.0 + lambda.abs());
    if !(w.norm() >= threshold) {
        return Err(AsymptoticsError::OutsideAsymptoticRegime { abs_w: w.norm(), threshold });
    }
    if lambda == 0.0 {
        return Ok(w);
    }
    let residual = |z: Complex64| (z - lambda * z.ln() - w).norm();
    let mut z = w + lambda * w.ln();
    let mut r = residual(z);
    let mut best = r;
    let mut stale = 0;
    let mut iterations = 0;
    while iterations < MAX_FIXED_POINT_ITERATIONS {
        if r <= tol {
            return Ok(z);
        }
        iterations += 1;
        z = w + lambda * z.ln();
        r = residual(z);
        if r < best {
            best = r;
            stale = 0;
        } else {
            stale += 1;
            // Roundoff floor: accept if already within tolerance, otherwise give up.
            if stale >= 3 {
                break;
            }
        }
    }
    if r <= tol {
        Ok(z)
    } else {
        Err(AsymptoticsError::IterationDiverged { residual: r, iterations })
    }
}

/// `k'_n = sqrt(n²π²/(a−1)² + Q/(a−1))` for `a ≠ 1`.
pub fn predict_real(liouville: &LiouvilleData, n: i64) -> Result<f64, AsymptoticsError> {
    predict_real_from(liouville.a(), liouville.q_mean(), n)
}

/// [`predict_real`] from the travel time and `Q = ∫₀ᵃ q`.
pub fn predict_real_from(a: f64, q_integral: f64, n: i64) -> Result<f64, AsymptoticsError> {
    if (a - 1.0).abs() < REGIME_TOL {
        return Err(AsymptoticsError::RegimeError { a });
    }
    if n < 1 {
        return Err(AsymptoticsError::InvalidIndex(n));
    }
    let g = a - 1.0;
    let square = (n as f64 * PI / g).powi(2) + q_integral / g;
    if square < 0.0 {
        return Err(AsymptoticsError::NegativeSquare { n, square });
    }
    Ok(square.sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MatchedPair {
    pub n: i64,
    pub branch: Branch,
    pub computed: Complex64,
    pub predicted: Complex64,
}

impl MatchedPair {
    /// `computed − predicted`, the finite-n value of the residual sequence.
    pub fn residual(&self) -> Complex64 {
        self.computed - self.predicted
    }

    pub fn abs_residual(&self) -> f64 {
        self.residual().norm()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MatchReport {
    pub case: AsymptoticCase,
    pub window: (i64, i64),
    /// Index shifts applied per branch: the computed zero with ordinal `j` (by real
    /// part, from 1) is compared with prediction `n = j + shift`.
    pub shift_plus: i64,
    pub shift_minus: i64,
    pub pairs: Vec<MatchedPair>,
    /// Zeros whose ordinal falls in the window but whose residual exceeds half the spacing.
    pub unmatched_zeros: Vec<(Branch, Complex64)>,
    pub unmatched_indices: Vec<(i64, Branch)>,
    /// Zero copies (per branch) whose ordinal falls outside the window.
    pub outside_window: usize,
    /// Median residual above a quarter of the spacing: the signature of misindexing.
    pub systematic_offset: bool,
}

impl MatchReport {
    pub fn max_residual_in(&self, lo: i64, hi: i64) -> Option<f64> {
        self.pairs.iter().filter(|p| p.n >= lo && p.n <= hi).map(MatchedPair::abs_residual).reduce(f64::max)
    }

    /// Partial sums of `|residual|²` in index order (both branches pooled per index).
    pub fn partial_square_sums(&self) -> Vec<(i64, f64)> {
        let mut by_n: Vec<(i64, f64)> = Vec::new();
        let mut pairs = self.pairs.clone();
        pairs.sort_by_key(|p| (p.n, p.branch));
        let mut acc = 0.0;
        for p in pairs {
            acc += p.abs_residual().powi(2);
            match by_n.last_mut() {
                Some(last) if last.0 == p.n => last.1 = acc,
                _ => by_n.push((p.n, acc)),
            }
        }
        by_n
    }

    /// Decay proxy: the largest residual over `late` does not exceed that over `early`.
    pub fn decay_trend(&self, early: (i64, i64), late: (i64, i64)) -> Option<bool> {
        let e = self.max_residual_in(early.0, early.1)?;
        let l = self.max_residual_in(late.0, late.1)?;
        Some(l <= e)
    }

    pub fn all_matched(&self) -> bool {
        self.unmatched_zeros.is_empty() && self.unmatched_indices.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,branch,re_pred,im_pred,re_comp,im_comp,abs_residual\n");
        for p in &self.pairs {
            out.push_str(&format!(
                "{},{},{:.15e},{:.15e},{:.15e},{:.15e},{:.15e}\n",
                p.n,
                p.branch.as_str(),
                p.predicted.re,
                p.predicted.im,
                p.computed.re,
                p.computed.im,
                p.abs_residual()
            ));
        }
        out
    }
}

/// Pairs non-real computed zeros with the predictions for `n ∈ window` on both branches.
/// `shift = None` picks, per branch, the shift in `−2..=2` with the smallest total
/// gated residual.
pub fn match_zeros(
    report: &SearchReport,
    case: &AsymptoticCase,
    window: (i64, i64),
    shift: Option<i64>,
) -> Result<MatchReport, AsymptoticsError> {
    match_zero_set(&report.zeros, case, window, shift)
}

/// [`match_zeros`] on a bare zero list.
pub fn match_zero_set(
    zeros: &[SpectralZero],
    case: &AsymptoticCase,
    window: (i64, i64),
    shift: Option<i64>,
) -> Result<MatchReport, AsymptoticsError> {
    case.validate()?;
    let (n1, n2) = window;
    let mut report = MatchReport {
        case: *case,
        window,
        shift_plus: shift.unwrap_or(0),
        shift_minus: shift.unwrap_or(0),
        pairs: Vec::new(),
        unmatched_zeros: Vec::new(),
        unmatched_indices: Vec::new(),
        outside_window: 0,
        systematic_offset: false,
    };
    if n2 < n1 {
        return Ok(report);
    }
    if n1 < 1 {
        return Err(AsymptoticsError::InvalidIndex(n1));
    }
    let mut nonreal: Vec<Complex64> = zeros
        .iter()
        .filter(|z| z.class == ZeroClass::Nonreal)
        .flat_map(|z| std::iter::repeat_n(z.k, z.multiplicity as usize))
        .collect();
    nonreal.sort_by(|p, q| p.re.total_cmp(&q.re).then(p.im.total_cmp(&q.im)));
    let shifts: Vec<i64> = match shift {
        Some(s) => vec![s],
        None => (-MAX_SHIFT..=MAX_SHIFT).collect(),
    };
    let mut raw = Vec::new();
    for branch in Branch::BOTH {
        let mut best: Option<BranchMatch> = None;
        for &s in &shifts {
            let candidate = match_branch(&nonreal, case, window, branch, s)?;
            let better = match &best {
                None => true,
                Some(b) => {
                    candidate.cost < b.cost - 1e-12
                        || ((candidate.cost - b.cost).abs() <= 1e-12 && s.abs() < b.shift.abs())
                }
            };
            if better {
                best = Some(candidate);
            }
        }
        let b = best.expect("at least one shift is tried");
        match branch {
            Branch::Plus => report.shift_plus = b.shift,
            Branch::Minus => report.shift_minus = b.shift,
        }
        report.pairs.extend(b.pairs);
        report.unmatched_zeros.extend(b.unmatched_zeros.into_iter().map(|k| (branch, k)));
        report.unmatched_indices.extend(b.unmatched_indices.into_iter().map(|n| (n, branch)));
        report.outside_window += b.outside;
        raw.extend(b.raw_residuals);
    }
    report.pairs.sort_by_key(|p| (p.n, p.branch));
    raw.sort_by(f64::total_cmp);
    report.systematic_offset = !raw.is_empty() && raw[raw.len() / 2] > 0.25 * case.spacing();
    Ok(report)
}

struct BranchMatch {
    shift: i64,
    pairs: Vec<MatchedPair>,
    unmatched_zeros: Vec<Complex64>,
    unmatched_indices: Vec<i64>,
    outside: usize,
    raw_residuals: Vec<f64>,
    cost: f64,
}

/// Pairs the zero with ordinal `j` (1-based, by real part) with prediction `n = j + shift`.
fn match_branch(
    sorted: &[Complex64],
    case: &AsymptoticCase,
    window: (i64, i64),
    branch: Branch,
    shift: i64,
) -> Result<BranchMatch, AsymptoticsError> {
    let (n1, n2) = window;
    let gate = 0.5 * case.spacing();
    // The branch's half-plane, read off the prediction in the middle of the window.
    let upper = predict_nonreal(case, (n1 + n2) / 2, branch)?.im >= 0.0;
    let targets: Vec<Complex64> = sorted.iter().map(|&k| if upper { k } else { k.conj() }).collect();
    let mut m = BranchMatch {
        shift,
        pairs: Vec::new(),
        unmatched_zeros: Vec::new(),
        unmatched_indices: Vec::new(),
        outside: 0,
        raw_residuals: Vec::new(),
        cost: 0.0,
    };
    let ordinal_range = (n1 - shift)..=(n2 - shift);
    m.outside = (1..=targets.len() as i64).filter(|j| !ordinal_range.contains(j)).count();
    for n in n1..=n2 {
        let j = n - shift;
        let predicted = predict_nonreal(case, n, branch)?;
        if j < 1 || j as usize > targets.len() {
            m.unmatched_indices.push(n);
            m.cost += gate;
            continue;
        }
        let computed = targets[j as usize - 1];
        let d = (computed - predicted).norm();
        m.raw_residuals.push(d);
        m.cost += d.min(gate);
        if d <= gate {
            m.pairs.push(MatchedPair { n, branch, computed, predicted });
        } else {
            m.unmatched_indices.push(n);
            m.unmatched_zeros.push(computed);
        }
    }
    Ok(m)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CountingRow {
    pub r: f64,
    /// Non-real zeros in `|k| ≤ r`, all four symmetric copies, with multiplicity.
    pub count: u64,
    /// `N(r) π / (4r)`.
    pub ratio: f64,
}

/// Counting-law table from first-quadrant zeros. Zeros on the imaginary axis contribute
/// two copies, all others four. The caller is responsible for the zero set covering
/// the quarter disk of each radius.
pub fn counting_check(zeros: &[SpectralZero], radii: &[f64]) -> Vec<CountingRow> {
    radii
        .iter()
        .map(|&r| {
            let count: u64 = zeros
                .iter()
                .filter(|z| z.class == ZeroClass::Nonreal && z.k.norm() <= r)
                .map(|z| z.multiplicity as u64 * if z.k.re == 0.0 { 2 } else { 4 })
                .sum();
            let ratio = if r > 0.0 { count as f64 * PI / (4.0 * r) } else { 0.0 };
            CountingRow { r, count, ratio }
        })
        .collect()
}

/// True if the last ratio is the closest to 1, with `1e-12` slack for ties.
pub fn ratios_approach_one(rows: &[CountingRow]) -> bool {
    let Some(last) = rows.last() else { return false };
    let d_last = (last.ratio - 1.0).abs();
    rows.iter().all(|r| d_last <= (r.ratio - 1.0).abs() + 1e-12)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example_case() -> AsymptoticCase {
        AsymptoticCase::new(Regime::AGreaterThanOne, 0, 1.0, 3f64.ln() / 4.0, 3f64.ln()).unwrap()
    }

    #[test]
    fn leading_prediction_for_the_example() {
        // 4 (10πi)² = −400π², principal Log = ln(400π²) + iπ.
        let k = predict_nonreal(&example_case(), 5, Branch::Plus).unwrap();
        let expected = Complex64::new(4.5 * PI, 0.5 * (400.0 * PI * PI).ln());
        assert!((k - expected).norm() < 1e-13, "{k}");
        let km = predict_nonreal(&example_case(), 5, Branch::Minus).unwrap();
        assert!((km - Complex64::new(5.5 * PI, -0.5 * (400.0 * PI * PI).ln())).norm() < 1e-13);
    }

    #[test]
    fn predictions_are_continuous_in_n() {
        let case = example_case();
        for branch in Branch::BOTH {
            let mut prev = predict_nonreal(&case, 1, branch).unwrap();
            for n in 2..=1000 {
                let k = predict_nonreal(&case, n, branch).unwrap();
                assert!((k - prev - PI).norm() <= 2.0, "jump at n = {n}");
                prev = k;
            }
        }
    }

    #[test]
    fn transcendental_examples() {
        let w = Complex64::new(100.0, 0.0);
        assert_eq!(solve_transcendental(0.0, Complex64::new(37.0, -95.0), 1e-12).unwrap(), Complex64::new(37.0, -95.0));
        let z = solve_transcendental(1.0, w, 1e-12).unwrap();
        assert!((z - w - z.ln()).norm() <= 1e-12);
        assert!((z - (w + w.ln())).norm() < 0.1);
        assert!(matches!(
            solve_transcendental(1.0, Complex64::new(5.0, 0.0), 1e-12),
            Err(AsymptoticsError::OutsideAsymptoticRegime { .. })
        ));
    }

    #[test]
    fn proof_convention_reproduces_leading_prediction() {
        // z + log z = nπi − ½ Log(16/η''), k = −iz: the + branch for m = 0.
        let case = example_case();
        for n in [20_i64, 50, 200] {
            let w = Complex64::new(-0.5 * (16.0f64 / case.eta_deriv).ln(), n as f64 * PI);
            let z = solve_transcendental(-1.0, w, 1e-12).unwrap();
            let k = -i() * z;
            let lead = predict_nonreal(&case, n, Branch::Plus).unwrap();
            let refined = predict_nonreal_refined(&case, n, Branch::Plus).unwrap();
            assert!((k - lead).norm() < 3.0 * (n as f64).ln() / n as f64, "n = {n}: {k} vs {lead}");
            assert!((k - refined).norm() < 1e-9, "n = {n}: {k} vs {refined}");
        }
    }

    #[test]
    fn real_predictions() {
        for n in 1..10 {
            assert!((predict_real_from(2.0, 0.0, n).unwrap() - n as f64 * PI).abs() < 1e-12);
        }
        assert!(matches!(predict_real_from(1.0 + 1e-8, 1.0, 1), Err(AsymptoticsError::RegimeError { .. })));
    }

    #[test]
    fn case_validation() {
        assert!(AsymptoticCase::new(Regime::AGreaterThanOne, 0, 0.0, 0.0, 2.0).is_err());
        assert!(matches!(
            AsymptoticCase::new(Regime::ALessThanOne, 0, 1.0, 0.0, 2.0),
            Err(AsymptoticsError::CaseMismatch { .. })
        ));
        assert!(AsymptoticCase::new(Regime::AEqualsOne, 0, 1.0, 0.0, 1.0).is_err());
        assert!(AsymptoticCase::new(Regime::AEqualsOne, 0, 1.0, 0.3, 1.0).is_ok());
    }

    #[test]
    fn empty_zero_set_gives_empty_report() {
        let r = match_zero_set(&[], &example_case(), (5, 10), None).unwrap();
        assert!(r.pairs.is_empty());
        assert!(r.unmatched_zeros.is_empty());
        assert_eq!(r.unmatched_indices.len(), 12);
        let r = match_zero_set(&[], &example_case(), (5, 4), None).unwrap();
        assert!(r.pairs.is_empty() && r.unmatched_indices.is_empty());
    }

    fn synthetic_zeros(case: &AsymptoticCase, range: std::ops::RangeInclusive<i64>) -> Vec<SpectralZero> {
        range
            .map(|n| {
                let k = predict_nonreal(case, n, Branch::Plus).unwrap() + Complex64::new(0.05, -0.03) / n as f64;
                SpectralZero::canonical(k, 1, 0.0)
            })
            .collect()
    }

    #[test]
    fn misindexed_predictions_are_flagged() {
        let case = example_case();
        // Ordinal 1 is the n = 2 zero; the minus sequence is the conjugate of plus shifted by one.
        let zeros = synthetic_zeros(&case, 2..=40);
        let free = match_zero_set(&zeros, &case, (5, 30), None).unwrap();
        assert_eq!((free.shift_plus, free.shift_minus), (1, 0));
        assert!(!free.systematic_offset);
        assert!(free.all_matched(), "{free:?}");
        for p in &free.pairs {
            // k_n^- and conj(k_{n+1}^+) differ by ln((n+1)/n) in the imaginary part.
            let bound = if p.branch == Branch::Plus { 0.02 } else { 1.2 / p.n as f64 };
            assert!(p.abs_residual() < bound, "{p:?}");
        }
        let forced = match_zero_set(&zeros, &case, (5, 30), Some(-1)).unwrap();
        assert!(forced.systematic_offset);
        assert!(forced.pairs.is_empty());
        assert_eq!(forced.unmatched_indices.len(), 52);
    }

    #[test]
    fn counting_table() {
        let zeros = vec![
            SpectralZero::canonical(Complex64::new(3.0, 4.0), 1, 0.0),
            SpectralZero::canonical(Complex64::new(0.0, 2.0), 1, 0.0),
            SpectralZero::canonical(Complex64::new(7.0, 0.0), 3, 0.0),
        ];
        let rows = counting_check(&zeros, &[1.0, 2.0, 5.0, 10.0]);
        assert_eq!(rows.iter().map(|r| r.count).collect::<Vec<_>>(), vec![0, 2, 6, 6]);
        assert_eq!(rows[0].ratio, 0.0);
        assert!((rows[2].ratio - 6.0 * PI / 20.0).abs() < 1e-15);
    }
}
