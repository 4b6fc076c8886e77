//! Chebyshev series on an interval `[lo, hi]`.
//!
//! A series stores `c_j` with `f(x) = Σ_j c_j T_j(s)`, `s = (2x - lo - hi) / (hi - lo)`.
//! The leading coefficient is not halved.

#[derive(Debug, Clone, PartialEq)]
pub struct Chebyshev {
    coeffs: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl Chebyshev {
    pub fn new(coeffs: Vec<f64>, lo: f64, hi: f64) -> Self {
        assert!(hi > lo, "empty interval");
        let coeffs = if coeffs.is_empty() { vec![0.0] } else { coeffs };
        Self { coeffs, lo, hi }
    }

    /// Interpolates `f` at `n` Chebyshev points of the first kind.
    pub fn fit<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, n: usize) -> Self {
        let n = n.max(1);
        let values: Vec<f64> = (0..n)
            .map(|k| {
                let theta = std::f64::consts::PI * (k as f64 + 0.5) / n as f64;
                f(0.5 * (lo + hi) + 0.5 * (hi - lo) * theta.cos())
            })
            .collect();
        let mut coeffs = vec![0.0; n];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let mut s = 0.0;
            for (k, v) in values.iter().enumerate() {
                s += v * (std::f64::consts::PI * j as f64 * (k as f64 + 0.5) / n as f64).cos();
            }
            *c = 2.0 * s / n as f64;
        }
        coeffs[0] *= 0.5;
        Self { coeffs, lo, hi }
    }

    /// Doubles the degree until the trailing coefficients fall below `tol` relative to
    /// the largest one, or `max_n` points are reached. The result is truncated.
    pub fn fit_adaptive<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64, max_n: usize) -> Self {
        let mut n = 16;
        loop {
            let mut fit = Self::fit(&f, lo, hi, n);
            let scale = fit.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(f64::MIN_POSITIVE);
            let tail = fit.coeffs[n - 4..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
            // Rounding in the cosine sums puts a floor of roughly n·ε under the tail.
            let floor = tol.max(2.0 * n as f64 * f64::EPSILON) * scale;
            if tail <= floor || n >= max_n {
                fit.chop(0.01 * floor);
                return fit;
            }
            n *= 2;
        }
    }

    fn chop(&mut self, below: f64) {
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(|c| c.abs() <= below) {
            self.coeffs.pop();
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Clenshaw evaluation.
    pub fn eval(&self, x: f64) -> f64 {
        let s = (2.0 * x - self.lo - self.hi) / (self.hi - self.lo);
        let mut b1 = 0.0;
        let mut b2 = 0.0;
        for &c in self.coeffs.iter().skip(1).rev() {
            let b0 = 2.0 * s * b1 - b2 + c;
            b2 = b1;
            b1 = b0;
        }
        s * b1 - b2 + self.coeffs[0]
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n <= 1 {
            return Self::new(vec![0.0], self.lo, self.hi);
        }
        let mut d = vec![0.0; n + 1];
        for j in (1..n).rev() {
            d[j - 1] = d[j + 1] + 2.0 * j as f64 * self.coeffs[j];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let scale = 2.0 / (self.hi - self.lo);
        for c in &mut d {
            *c *= scale;
        }
        Self::new(d, self.lo, self.hi)
    }

    /// Antiderivative vanishing at `lo`.
    pub fn integral(&self) -> Self {
        let n = self.coeffs.len();
        let c = |j: usize| if j < n { self.coeffs[j] } else { 0.0 };
        let half_width = 0.5 * (self.hi - self.lo);
        let mut out = vec![0.0; n + 1];
        out[1] = c(0) - 0.5 * c(2);
        for (j, o) in out.iter_mut().enumerate().skip(2) {
            *o = (c(j - 1) - c(j + 1)) / (2.0 * j as f64);
        }
        for o in &mut out {
            *o *= half_width;
        }
        // Fix the constant so the value at s = -1 is zero.
        let at_lo: f64 = out.iter().enumerate().skip(1).map(|(j, v)| if j % 2 == 0 { *v } else { -*v }).sum();
        out[0] = -at_lo;
        Self::new(out, self.lo, self.hi)
    }

    /// Bound on `sup |f|` over the interval from `Σ |c_j|`.
    pub fn abs_bound(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_reproduces_exp() {
        let f = Chebyshev::fit_adaptive(f64::exp, 0.0, 2.0, 1e-15, 256);
        for i in 0..=20 {
            let x = 0.1 * i as f64;
            assert!((f.eval(x) - x.exp()).abs() < 4e-14 * x.exp().max(1.0));
        }
    }

    #[test]
    fn derivative_and_integral_of_sin() {
        let f = Chebyshev::fit_adaptive(f64::sin, -1.0, 3.0, 1e-15, 256);
        let d = f.derivative();
        let i = f.integral();
        for k in 0..=40 {
            let x = -1.0 + 0.1 * k as f64;
            assert!((d.eval(x) - x.cos()).abs() < 1e-12);
            assert!((i.eval(x) - ((-1f64).cos() - x.cos())).abs() < 1e-13);
        }
    }

    #[test]
    fn explicit_series_matches_polynomial() {
        // T_0 + 2 T_1 + 3 T_2 on [0,1]: s = 2r-1.
        let f = Chebyshev::new(vec![1.0, 2.0, 3.0], 0.0, 1.0);
        for k in 0..=10 {
            let r = 0.1 * k as f64;
            let s = 2.0 * r - 1.0;
            let exact = 1.0 + 2.0 * s + 3.0 * (2.0 * s * s - 1.0);
            assert!((f.eval(r) - exact).abs() < 1e-14);
        }
        assert_eq!(f.abs_bound(), 6.0);
    }
}
