//! Transformation-operator kernel `K(x, t)` on the triangle `0 ≤ t ≤ x ≤ a`.
//!
//! `K` solves
//!
//! ```text
//! 2K(x,t) = ∫_{(x−t)/2}^{(x+t)/2} q
//!         + ∫_{x−t}^{x}       q(τ) ∫_{τ+t−x}^{τ} K(τ,s) ds dτ
//!         + ∫_{(x−t)/2}^{x−t} q(τ) ∫_{x−t−τ}^{τ} K(τ,s) ds dτ
//!         − ∫_{(x+t)/2}^{x}   q(τ) ∫_{x+t−τ}^{τ} K(τ,s) ds dτ
//! ```
//!
//! and represents `η(0)^{1/4} φ(x,k) = sin(kx)/k + ∫₀ˣ K(x,t) sin(kt)/k dt`. It is used
//! here as an independent oracle for the shooting code, not as a production path.
//!
//! The solver is Picard iteration with the composite trapezoid rule. On the uniform grid
//! every kernel argument in the outer integrals lands on a grid node; the only
//! half-step points are the lower limits `(x ± t)/2`, where the inner integral vanishes.

use std::io::Write;

use num_complex::Complex64;
use thiserror::Error;

use crate::forward::{self, ForwardError};
use crate::profile::{LiouvilleData, ProfileError, RefractiveProfile};

pub const DEFAULT_STEPS: usize = 400;
pub const PICARD_TOL: f64 = 1e-12;
pub const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Error)]
pub enum KernelError {
    #[error("grid step {h} too coarse: need h ≤ a/50 = {max}")]
    StepTooLarge { h: f64, max: f64 },
    #[error("Picard iteration did not converge: last difference {last_difference:e} after {iterations} iterations")]
    NoConvergence { iterations: usize, last_difference: f64 },
    #[error("representation formulas need a normalized tail (η(1) = 1, η'(1) = 0)")]
    TailNotNormalized,
    #[error("representation check is limited to |Im k| ≤ 5, got k = {0}")]
    KOutOfRange(Complex64),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Forward(#[from] ForwardError),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[inline]
fn tri(i: usize, j: usize) -> usize {
    i * (i + 1) / 2 + j
}

/// Samples of `K(x_i, t_j)`, `x_i = i h`, `t_j = j h`, `0 ≤ j ≤ i ≤ n`.
#[derive(Debug, Clone)]
pub struct KernelGrid {
    a: f64,
    h: f64,
    n: usize,
    values: Vec<f64>,
    /// `q` at the half-step nodes `m h / 2`, `m = 0..=2n`.
    q_half: Vec<f64>,
    differences: Vec<f64>,
}

impl KernelGrid {
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn steps(&self) -> usize {
        self.n
    }

    /// `K(x_i, t_j)`.
    pub fn value(&self, i: usize, j: usize) -> f64 {
        assert!(j <= i && i <= self.n, "({i}, {j}) outside the triangle");
        self.values[tri(i, j)]
    }

    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.h
    }

    /// Sup-norm differences between successive Picard iterates.
    pub fn picard_differences(&self) -> &[f64] {
        &self.differences
    }

    pub fn iterations(&self) -> usize {
        self.differences.len()
    }

    /// `q(x_l)`.
    fn q(&self, l: usize) -> f64 {
        self.q_half[2 * l]
    }

    /// `K(τ, τ)` at `τ = m h / 2`, averaging neighbours at half steps.
    fn diagonal_half(&self, m: usize) -> f64 {
        if m % 2 == 0 {
            self.value(m / 2, m / 2)
        } else {
            let l = m / 2;
            0.5 * (self.value(l, l) + self.value(l + 1, l + 1))
        }
    }

    /// `max_i |2K(x_i, x_i) − ∫₀^{x_i} q|` against a supplied antiderivative of `q`.
    pub fn diagonal_residual<F: FnMut(f64) -> f64>(&self, mut q_integral: F) -> f64 {
        (0..=self.n).map(|i| (2.0 * self.value(i, i) - q_integral(self.x(i))).abs()).fold(0.0, f64::max)
    }

    /// Writes the triangle as CSV with columns `x,t,K`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,t,K")?;
        for i in 0..=self.n {
            for j in 0..=i {
                writeln!(w, "{:.17e},{:.17e},{:.17e}", self.x(i), self.x(j), self.value(i, j))?;
            }
        }
        Ok(())
    }
}

/// Solves the kernel equation for the Liouville potential with step `h ≤ a/50`.
/// The step is shrunk so that `a/h` is an integer.
pub fn solve_kernel(liouville: &LiouvilleData, h: f64) -> Result<KernelGrid, KernelError> {
    let a = liouville.a();
    if !(h > 0.0 && h <= a / 50.0 * (1.0 + 1e-12)) {
        return Err(KernelError::StepTooLarge { h, max: a / 50.0 });
    }
    let n = (a / h - 1e-9).ceil() as usize;
    solve_kernel_for_potential(|x| liouville.q(x), a, n)
}

/// Solves the kernel equation for an arbitrary potential on `[0, a]` with `n` steps.
pub fn solve_kernel_for_potential<Q: Fn(f64) -> f64>(q: Q, a: f64, n: usize) -> Result<KernelGrid, KernelError> {
    assert!(n >= 2, "need at least two steps");
    let h = a / n as f64;
    let q_half: Vec<f64> = (0..=2 * n).map(|m| q(m as f64 * 0.5 * h)).collect();
    // Cumulative trapezoid of q on the half-step grid.
    let mut q_cum = vec![0.0; 2 * n + 1];
    for m in 1..=2 * n {
        q_cum[m] = q_cum[m - 1] + 0.25 * h * (q_half[m - 1] + q_half[m]);
    }
    let size = tri(n, n) + 1;
    let mut forcing = vec![0.0; size];
    for i in 0..=n {
        for j in 0..=i {
            forcing[tri(i, j)] = q_cum[i + j] - q_cum[i - j];
        }
    }
    let mut grid =
        KernelGrid { a, h, n, values: forcing.iter().map(|f| 0.5 * f).collect(), q_half, differences: Vec::new() };
    let mut row_cum = vec![0.0; size];
    let mut anti = vec![0.0; size];
    let mut next = vec![0.0; size];
    for _ in 0..MAX_ITERATIONS {
        picard_step(&grid, &forcing, &mut row_cum, &mut anti, &mut next);
        let diff = grid.values.iter().zip(&next).map(|(o, n)| (o - n).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut grid.values, &mut next);
        grid.differences.push(diff);
        if !diff.is_finite() {
            break;
        }
        if diff <= PICARD_TOL {
            return Ok(grid);
        }
    }
    Err(KernelError::NoConvergence {
        iterations: grid.differences.len(),
        last_difference: grid.differences.last().copied().unwrap_or(f64::NAN),
    })
}

fn picard_step(grid: &KernelGrid, forcing: &[f64], row_cum: &mut [f64], anti: &mut [f64], next: &mut [f64]) {
    let n = grid.n;
    let h = grid.h;
    let k = &grid.values;
    for l in 0..=n {
        row_cum[tri(l, 0)] = 0.0;
        for m in 1..=l {
            row_cum[tri(l, m)] = row_cum[tri(l, m - 1)] + 0.5 * h * (k[tri(l, m - 1)] + k[tri(l, m)]);
        }
    }
    // ∫_α^{x_l} K(x_l, s) ds for grid α.
    let upper = |l: usize, alpha: usize| row_cum[tri(l, l)] - row_cum[tri(l, alpha)];
    let g = |l: usize, alpha: usize| grid.q(l) * upper(l, alpha);

    // Anti-diagonals w = i + j carry the last integral; its lower limit is w h / 2.
    for w in 0..=2 * n {
        let i0 = w.div_ceil(2);
        let i_end = w.min(n);
        if i0 > i_end {
            continue;
        }
        let mut acc = if w % 2 == 0 { 0.0 } else { 0.25 * h * g(i0, w - i0) };
        anti[tri(i0, w - i0)] = acc;
        let mut prev = g(i0, w - i0);
        for i in i0 + 1..=i_end {
            let cur = g(i, w - i);
            acc += 0.5 * h * (prev + cur);
            anti[tri(i, w - i)] = acc;
            prev = cur;
        }
    }
    // Diagonals p = i − j carry the second integral, which starts at τ = p h.
    for p in 0..=n {
        let middle = anti[tri(p, 0)];
        let mut acc = 0.0;
        let mut prev = g(p, 0);
        for i in p..=n {
            let j = i - p;
            if i > p {
                let cur = g(i, j);
                acc += 0.5 * h * (prev + cur);
                prev = cur;
            }
            let idx = tri(i, j);
            next[idx] = 0.5 * (forcing[idx] + acc + middle - anti[idx]);
        }
    }
}

/// Boundary traces `K1(t) = K_x(a, t)` and `K2(t) = K_t(a, t)` at the grid nodes.
#[derive(Debug, Clone)]
pub struct BoundaryTraces {
    h: f64,
    /// From the explicit trace formulas.
    pub k1: Vec<f64>,
    pub k2: Vec<f64>,
    /// Right-hand side of `K1 + K2 = ½ q((a+t)/2) + ∫_{(a+t)/2}^{a} q(τ) K(τ, a+t−τ) dτ`.
    pub sum_formula: Vec<f64>,
    /// Finite-difference traces of the grid (`None` where the stencil leaves the triangle).
    pub fd_k1: Vec<Option<f64>>,
    pub fd_k2: Vec<f64>,
}

impl BoundaryTraces {
    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.h
    }

    fn interp(values: &[f64], h: f64, t: f64) -> f64 {
        let n = values.len() - 1;
        let s = (t / h).clamp(0.0, n as f64);
        let j = (s.floor() as usize).min(n.saturating_sub(1));
        let f = s - j as f64;
        values[j] * (1.0 - f) + values[j + 1] * f
    }

    /// `K1(t)` by linear interpolation.
    pub fn k1_at(&self, t: f64) -> f64 {
        Self::interp(&self.k1, self.h, t)
    }

    /// `K2(t)` by linear interpolation.
    pub fn k2_at(&self, t: f64) -> f64 {
        Self::interp(&self.k2, self.h, t)
    }

    /// `max_j |K1 + K2 − sum_formula|`.
    pub fn sum_identity_residual(&self) -> f64 {
        self.k1.iter().zip(&self.k2).zip(&self.sum_formula).map(|((a, b), s)| (a + b - s).abs()).fold(0.0, f64::max)
    }

    /// Largest gap between formula traces and finite-difference traces.
    pub fn finite_difference_gap(&self) -> f64 {
        let g1 = self.k1.iter().zip(&self.fd_k1).filter_map(|(a, b)| b.map(|b| (a - b).abs())).fold(0.0, f64::max);
        let g2 = self.k2.iter().zip(&self.fd_k2).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        g1.max(g2)
    }

    /// `K1(a) + K2(a)`.
    pub fn endpoint_sum(&self) -> f64 {
        self.k1[self.k1.len() - 1] + self.k2[self.k2.len() - 1]
    }
}

/// Evaluates the explicit trace formulas with the solved kernel under the integrals.
pub fn boundary_traces(grid: &KernelGrid) -> BoundaryTraces {
    let n = grid.n;
    let h = grid.h;
    let trap = |vals: &[f64]| -> f64 {
        if vals.len() < 2 {
            return 0.0;
        }
        let inner: f64 = vals[1..vals.len() - 1].iter().sum();
        h * (inner + 0.5 * (vals[0] + vals[vals.len() - 1]))
    };
    // ∫_{m h/2}^{end h} q(τ) K(τ, s h − τ) dτ where the lower limit sits on the diagonal.
    let from_half = |s: usize, end: usize| -> f64 {
        let l0 = s.div_ceil(2);
        let pts: Vec<f64> = (l0..=end).map(|l| grid.q(l) * grid.value(l, s - l)).collect();
        let mut v = trap(&pts);
        if s % 2 == 1 {
            let at_half = grid.q_half[s] * grid.diagonal_half(s);
            v += 0.25 * h * (at_half + pts[0]);
        }
        v
    };
    let mut k1 = Vec::with_capacity(n + 1);
    let mut k2 = Vec::with_capacity(n + 1);
    let mut sum_formula = Vec::with_capacity(n + 1);
    for j in 0..=n {
        let b1 = {
            let pts: Vec<f64> = (n - j..=n).map(|l| grid.q(l) * grid.value(l, l + j - n)).collect();
            trap(&pts)
        };
        let b2 = from_half(n - j, n - j);
        let b3 = from_half(n + j, n);
        let qp = grid.q_half[n + j];
        let qm = grid.q_half[n - j];
        k1.push(0.25 * (qp - qm) + 0.5 * (b1 - b2 + b3));
        k2.push(0.25 * (qp + qm) + 0.5 * (-b1 + b2 + b3));
        sum_formula.push(0.5 * qp + b3);
    }
    let kv = |i: usize, j: usize| grid.value(i, j);
    let fd_k1 = (0..=n)
        .map(|j| (j + 2 <= n).then(|| (3.0 * kv(n, j) - 4.0 * kv(n - 1, j) + kv(n - 2, j)) / (2.0 * h)))
        .collect();
    let fd_k2 = (0..=n)
        .map(|j| {
            if j == 0 {
                (-3.0 * kv(n, 0) + 4.0 * kv(n, 1) - kv(n, 2)) / (2.0 * h)
            } else if j == n {
                (3.0 * kv(n, n) - 4.0 * kv(n, n - 1) + kv(n, n - 2)) / (2.0 * h)
            } else {
                (kv(n, j + 1) - kv(n, j - 1)) / (2.0 * h)
            }
        })
        .collect();
    BoundaryTraces { h, k1, k2, sum_formula, fd_k1, fd_k2 }
}

/// `y(1,k)` and `y'(1,k)` from the representation formulas with trapezoid quadrature.
pub fn representation_values(liouville: &LiouvilleData, grid: &KernelGrid, k: Complex64) -> (Complex64, Complex64) {
    let traces = boundary_traces(grid);
    let a = grid.a;
    let h = grid.h;
    let n = grid.n;
    let qm = liouville.q_mean();
    let norm = liouville.eta0().powf(-0.25);
    let mut int_cos = Complex64::new(0.0, 0.0);
    let mut int_sin = Complex64::new(0.0, 0.0);
    for j in 0..=n {
        let w = if j == 0 || j == n { 0.5 * h } else { h };
        let kt = k * (j as f64 * h);
        int_cos += kt.cos() * (w * traces.k2[j]);
        int_sin += kt.sin() * (w * traces.k1[j]);
    }
    let ka = k * a;
    let y = ((ka.sin() / k) - ka.cos() / (k * k * 2.0) * qm + int_cos / (k * k)) * norm;
    let dy = (ka.cos() + ka.sin() / (k * 2.0) * qm + int_sin / k) * norm;
    (y, dy)
}

#[derive(Debug, Clone, Copy)]
pub struct RepresentationReport {
    pub k: Complex64,
    pub y1_ivp: Complex64,
    pub dy1_ivp: Complex64,
    /// Richardson-extrapolated values from grids `h` and `h/2`.
    pub y1_repr: Complex64,
    pub dy1_repr: Complex64,
    /// Unextrapolated values on the coarse grid.
    pub y1_coarse: Complex64,
    pub dy1_coarse: Complex64,
    pub residual_y1: f64,
    pub residual_dy1: f64,
}

/// Compares the direct shooting values with the kernel representation (Richardson
/// extrapolated from `grid` and a grid with half its step).
pub fn representation_check(
    profile: &RefractiveProfile,
    liouville: &LiouvilleData,
    grid: &KernelGrid,
    k: Complex64,
) -> Result<RepresentationReport, KernelError> {
    if !profile.normalized_tail() {
        return Err(KernelError::TailNotNormalized);
    }
    if k.im.abs() > 5.0 {
        return Err(KernelError::KOutOfRange(k));
    }
    let fine = solve_kernel_for_potential(|x| liouville.q(x), grid.a, 2 * grid.n)?;
    let (yc, dyc) = representation_values(liouville, grid, k);
    let (yf, dyf) = representation_values(liouville, &fine, k);
    let y1_repr = (yf * 4.0 - yc) / 3.0;
    let dy1_repr = (dyf * 4.0 - dyc) / 3.0;
    let bv = forward::solve_ivp(profile, k, 1e-12)?;
    let (y1_ivp, dy1_ivp) = (bv.y1_true(), bv.dy1_true());
    Ok(RepresentationReport {
        k,
        y1_ivp,
        dy1_ivp,
        y1_repr,
        dy1_repr,
        y1_coarse: yc,
        dy1_coarse: dyc,
        residual_y1: (y1_repr - y1_ivp).norm(),
        residual_dy1: (dy1_repr - dy1_ivp).norm(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profile::liouville_transform;

    // For constant q = c: K(x,t) = c t I₁(z)/z, z = √(c(x² − t²)), as a power series.
    fn bessel_kernel(c: f64, x: f64, t: f64) -> f64 {
        let s = c * (x * x - t * t) / 4.0;
        let mut term = 0.5;
        let mut sum = term;
        for j in 1..40 {
            term *= s / (j as f64 * (j + 1) as f64);
            sum += term;
        }
        c * t * sum
    }

    #[test]
    fn zero_potential_gives_zero_kernel() {
        let g = solve_kernel_for_potential(|_| 0.0, 1.5, 60).unwrap();
        assert!(g.values.iter().all(|v| *v == 0.0));
        let tr = boundary_traces(&g);
        assert!(tr.k1.iter().chain(&tr.k2).all(|v| *v == 0.0));
    }

    #[test]
    fn constant_potential_matches_bessel_series() {
        let c = 0.8;
        let a = 1.3;
        let mut errs = vec![];
        for n in [100usize, 200] {
            let g = solve_kernel_for_potential(|_| c, a, n).unwrap();
            let mut e = 0.0f64;
            for i in 0..=n {
                for j in 0..=i {
                    e = e.max((g.value(i, j) - bessel_kernel(c, g.x(i), g.x(j))).abs());
                }
            }
            errs.push(e);
        }
        assert!(errs[0] < 1e-4, "{errs:?}");
        let ratio = errs[0] / errs[1];
        assert!((3.0..=5.0).contains(&ratio), "{errs:?}");
    }

    #[test]
    fn origin_column_is_exactly_zero() {
        let g = solve_kernel_for_potential(|x| 1.0 + x.sin(), 1.2, 80).unwrap();
        for i in 0..=80 {
            assert_eq!(g.value(i, 0), 0.0);
        }
    }

    #[test]
    fn diagonal_identity_is_second_order_for_varying_q() {
        let q = |x: f64| (3.0 * x).cos();
        let exact = |x: f64| (3.0 * x).sin() / 3.0;
        let r1 = solve_kernel_for_potential(q, 1.0, 100).unwrap().diagonal_residual(exact);
        let r2 = solve_kernel_for_potential(q, 1.0, 200).unwrap().diagonal_residual(exact);
        let ratio = r1 / r2;
        assert!((3.0..=5.0).contains(&ratio), "{r1} {r2}");
    }

    #[test]
    fn picard_differences_decay_geometrically() {
        let g = solve_kernel_for_potential(|x| 2.0 + x, 1.4, 100).unwrap();
        let d = g.picard_differences();
        assert!(d.len() >= 3);
        for w in d.windows(2).skip(1) {
            assert!(w[1] <= 0.9 * w[0], "{d:?}");
        }
    }

    #[test]
    fn traces_agree_with_finite_differences() {
        let p = RefractiveProfile::raised_cosine(0.9).unwrap();
        let l = liouville_transform(&p).unwrap();
        let g = solve_kernel(&l, l.a() / 400.0).unwrap();
        let tr = boundary_traces(&g);
        assert!(tr.finite_difference_gap() < 5e-3, "{}", tr.finite_difference_gap());
        assert!(tr.sum_identity_residual() < 1e-12);
        assert!(tr.k1[0].abs() < 1e-15);
        // At t = 0 the two formulas reduce to K2(0) = ½ q(a/2) + ∫_{a/2}^{a} q(τ) K(τ, a − τ) dτ.
        assert!((tr.k2[0] - tr.sum_formula[0]).abs() < 1e-15);
        let q_end = p.q_at_r(1.0);
        assert!((tr.endpoint_sum() - 0.5 * q_end).abs() < 1e-12);
    }

    #[test]
    fn odd_extension_second_difference() {
        let q = |x: f64| 1.0 + x * x;
        let mut prev = None;
        for n in [100usize, 200] {
            let g = solve_kernel_for_potential(q, 1.0, n).unwrap();
            let worst =
                (2..=n).map(|i| (g.value(i, 0) - 2.0 * g.value(i, 1) + g.value(i, 2)).abs()).fold(0.0, f64::max);
            assert!(worst <= 2.0 * g.h().powi(3), "n={n}: {worst}");
            if let Some(p) = prev {
                assert!(worst < p);
            }
            prev = Some(worst);
        }
    }

    #[test]
    fn representation_matches_shooting_for_example() {
        let p = RefractiveProfile::rational_example();
        let l = liouville_transform(&p).unwrap();
        let g = solve_kernel(&l, l.a() / DEFAULT_STEPS as f64).unwrap();
        for k in [1.0, std::f64::consts::PI, 7.3, 15.0] {
            let r = representation_check(&p, &l, &g, Complex64::new(k, 0.0)).unwrap();
            assert!(r.residual_y1 < 1e-5 && r.residual_dy1 < 1e-5, "k={k}: {r:?}");
        }
        let r = representation_check(&p, &l, &g, Complex64::new(4.0, 1.5)).unwrap();
        assert!(r.residual_y1 < 1e-5 && r.residual_dy1 < 1e-5, "{r:?}");
    }

    #[test]
    fn representation_preconditions() {
        let p = RefractiveProfile::constant(4.0).unwrap();
        let l = liouville_transform(&p).unwrap();
        let g = solve_kernel(&l, l.a() / 60.0).unwrap();
        assert!(matches!(
            representation_check(&p, &l, &g, Complex64::new(1.0, 0.0)),
            Err(KernelError::TailNotNormalized)
        ));
        let e = RefractiveProfile::rational_example();
        let le = liouville_transform(&e).unwrap();
        let ge = solve_kernel(&le, le.a() / 60.0).unwrap();
        assert!(matches!(
            representation_check(&e, &le, &ge, Complex64::new(1.0, 6.0)),
            Err(KernelError::KOutOfRange(_))
        ));
    }

    #[test]
    fn step_bound_is_enforced() {
        let l = liouville_transform(&RefractiveProfile::rational_example()).unwrap();
        assert!(matches!(solve_kernel(&l, l.a() / 10.0), Err(KernelError::StepTooLarge { .. })));
    }

    #[test]
    fn csv_has_header_and_triangle() {
        let g = solve_kernel_for_potential(|_| 0.5, 1.0, 4).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("x,t,K\n"));
        assert_eq!(text.lines().count(), 1 + 15);
    }
}
