//! Explicit Dormand–Prince 8(5,3) integrator for small complex systems.
//!
//! Step control follows Hairer's DOP853 (PI controller, combined 5th/3rd order error
//! estimate). The error is measured against a weighted max-norm of the whole state,
//! which suits the oscillatory linear systems solved here: a componentwise relative
//! test would stall at every zero crossing.

// Coefficient tables are quoted at full published precision.
#![allow(clippy::excessive_precision)]

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OdeError {
    #[error("step size underflow at x = {x} (h = {h:e})")]
    StepUnderflow { x: f64, h: f64 },
    #[error("step budget of {max_steps} exhausted at x = {x}")]
    TooManySteps { x: f64, max_steps: usize },
    #[error("non-finite state at x = {x}")]
    NonFinite { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions<const N: usize> {
    pub tol: f64,
    pub h_max: f64,
    pub max_steps: usize,
    /// Component weights for the error norm.
    pub weights: [f64; N],
    /// Rescale the state when it grows or shrinks by more than `1e100`.
    /// Only valid for linear homogeneous right-hand sides.
    pub renormalize: bool,
}

impl<const N: usize> OdeOptions<N> {
    pub fn new(tol: f64) -> Self {
        Self { tol, h_max: f64::INFINITY, max_steps: 2_000_000, weights: [1.0; N], renormalize: false }
    }
}

const C: [f64; 12] = [
    0.0,
    0.526001519587677318785587544488E-01,
    0.789002279381515978178381316732E-01,
    0.118350341907227396726757197510E+00,
    0.281649658092772603273242802490E+00,
    0.333333333333333333333333333333E+00,
    0.25E+00,
    0.307692307692307692307692307692E+00,
    0.651282051282051282051282051282E+00,
    0.6E+00,
    0.857142857142857142857142857142E+00,
    1.0,
];

// Lower-triangular coupling coefficients; row i gives stage i+2.
const A: [&[f64]; 11] = [
    &[5.26001519587677318785587544488E-2],
    &[1.97250569845378994544595329183E-2, 5.91751709536136983633785987549E-2],
    &[2.95875854768068491816892993775E-2, 0.0, 8.87627564304205475450678981324E-2],
    &[2.41365134159266685502369798665E-1, 0.0, -8.84549479328286085344864962717E-1, 9.24834003261792003115737966543E-1],
    &[
        3.7037037037037037037037037037E-2,
        0.0,
        0.0,
        1.70828608729473871279604482173E-1,
        1.25467687566822425016691814123E-1,
    ],
    &[3.7109375E-2, 0.0, 0.0, 1.70252211019544039314978060272E-1, 6.02165389804559606850219397283E-2, -1.7578125E-2],
    &[
        3.70920001185047927108779319836E-2,
        0.0,
        0.0,
        1.70383925712239993810214054705E-1,
        1.07262030446373284651809199168E-1,
        -1.53194377486244017527936158236E-2,
        8.27378916381402288758473766002E-3,
    ],
    &[
        6.24110958716075717114429577812E-1,
        0.0,
        0.0,
        -3.36089262944694129406857109825E0,
        -8.68219346841726006818189891453E-1,
        2.75920996994467083049415600797E1,
        2.01540675504778934086186788979E1,
        -4.34898841810699588477366255144E1,
    ],
    &[
        4.77662536438264365890433908527E-1,
        0.0,
        0.0,
        -2.48811461997166764192642586468E0,
        -5.90290826836842996371446475743E-1,
        2.12300514481811942347288949897E1,
        1.52792336328824235832596922938E1,
        -3.32882109689848629194453265587E1,
        -2.03312017085086261358222928593E-2,
    ],
    &[
        -9.3714243008598732571704021658E-1,
        0.0,
        0.0,
        5.18637242884406370830023853209E0,
        1.09143734899672957818500254654E0,
        -8.14978701074692612513997267357E0,
        -1.85200656599969598641566180701E1,
        2.27394870993505042818970056734E1,
        2.49360555267965238987089396762E0,
        -3.0467644718982195003823669022E0,
    ],
    &[
        2.27331014751653820792359768449E0,
        0.0,
        0.0,
        -1.05344954667372501984066689879E1,
        -2.00087205822486249909675718444E0,
        -1.79589318631187989172765950534E1,
        2.79488845294199600508499808837E1,
        -2.85899827713502369474065508674E0,
        -8.87285693353062954433549289258E0,
        1.23605671757943030647266201528E1,
        6.43392746015763530355970484046E-1,
    ],
];

const B: [f64; 12] = [
    5.42937341165687622380535766363E-2,
    0.0,
    0.0,
    0.0,
    0.0,
    4.45031289275240888144113950566E0,
    1.89151789931450038304281599044E0,
    -5.8012039600105847814672114227E0,
    3.1116436695781989440891606237E-1,
    -1.52160949662516078556178806805E-1,
    2.01365400804030348374776537501E-1,
    4.47106157277725905176885569043E-2,
];

const BHH: [f64; 3] =
    [0.244094488188976377952755905512E+00, 0.733846688281611857341361741547E+00, 0.220588235294117647058823529412E-01];

const E: [f64; 12] = [
    0.1312004499419488073250102996E-01,
    0.0,
    0.0,
    0.0,
    0.0,
    -0.1225156446376204440720569753E+01,
    -0.4957589496572501915214079952E+00,
    0.1664377182454986536961530415E+01,
    -0.3503288487499736816886487290E+00,
    0.3341791187130174790297318841E+00,
    0.8192320648511571246570742613E-01,
    -0.2235530786388629525884427845E-01,
];

const SAFE: f64 = 0.9;
const FAC_MIN: f64 = 0.333;
const FAC_MAX: f64 = 6.0;
const BETA: f64 = 0.04;
const RESCALE_ABOVE: f64 = 1e100;

/// Stepper state for `y' = f(x, y)` with `y ∈ C^N`.
pub struct Dop853<const N: usize, F>
where
    F: FnMut(f64, &[Complex64; N], &mut [Complex64; N]),
{
    rhs: F,
    opts: OdeOptions<N>,
    x: f64,
    y: [Complex64; N],
    f0: [Complex64; N],
    h: f64,
    facold: f64,
    scale_log: f64,
    steps: usize,
    rejected: usize,
}

impl<const N: usize, F> Dop853<N, F>
where
    F: FnMut(f64, &[Complex64; N], &mut [Complex64; N]),
{
    pub fn new(mut rhs: F, x0: f64, y0: [Complex64; N], opts: OdeOptions<N>) -> Self {
        let mut f0 = [Complex64::new(0.0, 0.0); N];
        rhs(x0, &y0, &mut f0);
        let h = opts.h_max.clamp(1e-6, 0.05);
        Self { rhs, opts, x: x0, y: y0, f0, h, facold: 1e-4, scale_log: 0.0, steps: 0, rejected: 0 }
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    /// Current state; the true solution is `state * exp(scale_log)`.
    pub fn state(&self) -> &[Complex64; N] {
        &self.y
    }

    pub fn scale_log(&self) -> f64 {
        self.scale_log
    }

    pub fn steps(&self) -> (usize, usize) {
        (self.steps, self.rejected)
    }

    fn norm_scale(&self, a: &[Complex64; N], b: &[Complex64; N]) -> f64 {
        let mut m = 0.0f64;
        for i in 0..N {
            m = m.max(self.opts.weights[i] * a[i].norm().max(b[i].norm()));
        }
        m.max(1e-300)
    }

    /// Integrates forward to `x_end`.
    pub fn advance_to(&mut self, x_end: f64) -> Result<(), OdeError> {
        assert!(x_end >= self.x, "only forward integration is supported");
        let zero = Complex64::new(0.0, 0.0);
        let mut k = [[zero; N]; 12];
        let mut tmp = [zero; N];
        let mut last = false;
        while self.x < x_end && !last {
            if self.steps + self.rejected >= self.opts.max_steps {
                return Err(OdeError::TooManySteps { x: self.x, max_steps: self.opts.max_steps });
            }
            let mut h = self.h.min(self.opts.h_max);
            if self.x + 1.01 * h >= x_end {
                h = x_end - self.x;
                last = true;
            }
            if h <= 1e-14 * self.x.abs().max(1.0) && !last {
                return Err(OdeError::StepUnderflow { x: self.x, h });
            }
            k[0] = self.f0;
            for s in 1..12 {
                for i in 0..N {
                    let mut acc = zero;
                    for (j, a) in A[s - 1].iter().enumerate() {
                        if *a != 0.0 {
                            acc += k[j][i] * *a;
                        }
                    }
                    tmp[i] = self.y[i] + acc * h;
                }
                (self.rhs)(self.x + C[s] * h, &tmp, &mut k[s]);
            }
            let mut y_new = [zero; N];
            let mut bk = [zero; N];
            for i in 0..N {
                let mut acc = zero;
                for s in 0..12 {
                    if B[s] != 0.0 {
                        acc += k[s][i] * B[s];
                    }
                }
                bk[i] = acc;
                y_new[i] = self.y[i] + acc * h;
            }
            let m = self.norm_scale(&self.y, &y_new);
            let mut err5 = 0.0;
            let mut err3 = 0.0;
            for i in 0..N {
                let sc = self.opts.tol * m / self.opts.weights[i];
                let e3 = bk[i] - k[0][i] * BHH[0] - k[8][i] * BHH[1] - k[11][i] * BHH[2];
                let mut e5 = zero;
                for s in 0..12 {
                    if E[s] != 0.0 {
                        e5 += k[s][i] * E[s];
                    }
                }
                err5 += (e5.norm() / sc).powi(2);
                err3 += (e3.norm() / sc).powi(2);
            }
            let deno = {
                let d = err5 + 0.01 * err3;
                if d <= 0.0 {
                    1.0
                } else {
                    d
                }
            };
            let err = h.abs() * err5 * (1.0 / (N as f64 * deno)).sqrt();
            if !err.is_finite() {
                if h <= 1e-14 * self.x.abs().max(1.0) {
                    return Err(OdeError::NonFinite { x: self.x });
                }
                self.h = 0.1 * h;
                self.rejected += 1;
                last = false;
                continue;
            }
            let expo1 = 0.125 - BETA * 0.2;
            let fac11 = err.powf(expo1);
            if err <= 1.0 {
                let fac = fac11 / self.facold.powf(BETA);
                let fac = (1.0 / FAC_MAX).max((1.0 / FAC_MIN).min(fac / SAFE));
                self.facold = err.max(1e-4);
                self.x = if last { x_end } else { self.x + h };
                self.y = y_new;
                (self.rhs)(self.x, &self.y, &mut self.f0);
                self.steps += 1;
                self.h = h / fac;
                if self.opts.renormalize {
                    let mag = self.norm_scale(&self.y, &self.y);
                    if !(1.0 / RESCALE_ABOVE..=RESCALE_ABOVE).contains(&mag) {
                        for i in 0..N {
                            self.y[i] /= mag;
                            self.f0[i] /= mag;
                        }
                        self.scale_log += mag.ln();
                    }
                }
            } else {
                self.h = h / (1.0 / FAC_MIN).min(fac11 / SAFE);
                self.rejected += 1;
                last = false;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn harmonic_oscillator_to_tolerance() {
        let opts = OdeOptions::new(1e-12);
        let mut s = Dop853::new(
            |_x, y: &[Complex64; 2], dy: &mut [Complex64; 2]| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            [c(0.0), c(1.0)],
            opts,
        );
        s.advance_to(10.0).unwrap();
        assert!((s.state()[0] - c(10f64.sin())).norm() < 1e-10);
        assert!((s.state()[1] - c(10f64.cos())).norm() < 1e-10);
    }

    #[test]
    fn eighth_order_convergence_with_fixed_steps() {
        // Forcing many steps via h_max with a loose tolerance exposes the order.
        let run = |h: f64| {
            let mut opts = OdeOptions::new(1.0);
            opts.h_max = h;
            let mut s = Dop853::new(
                |x, y: &[Complex64; 1], dy: &mut [Complex64; 1]| dy[0] = y[0] * x.cos(),
                0.0,
                [c(1.0)],
                opts,
            );
            s.advance_to(2.0).unwrap();
            (s.state()[0] - c(2f64.sin().exp())).norm()
        };
        let e1 = run(0.4);
        let e2 = run(0.2);
        let order = (e1 / e2).log2();
        assert!(order > 7.0, "observed order {order}");
    }

    #[test]
    fn complex_growth_with_renormalization() {
        let lam = Complex64::new(300.0, 50.0);
        let mut opts = OdeOptions::new(1e-12);
        opts.renormalize = true;
        let mut s =
            Dop853::new(move |_x, y: &[Complex64; 1], dy: &mut [Complex64; 1]| dy[0] = y[0] * lam, 0.0, [c(1.0)], opts);
        s.advance_to(3.0).unwrap();
        let logv = s.state()[0].ln() + s.scale_log();
        assert!((logv.re - 900.0).abs() < 1e-8);
        let ph = (logv.im - 150.0).rem_euclid(2.0 * std::f64::consts::PI);
        assert!(ph.min(2.0 * std::f64::consts::PI - ph) < 1e-8);
    }

    #[test]
    fn resumes_across_calls() {
        let opts = OdeOptions::new(1e-12);
        let mut s = Dop853::new(
            |_x, y: &[Complex64; 2], dy: &mut [Complex64; 2]| {
                dy[0] = y[1];
                dy[1] = -y[0];
            },
            0.0,
            [c(0.0), c(1.0)],
            opts,
        );
        for j in 1..=10 {
            s.advance_to(j as f64 * 0.5).unwrap();
            assert_eq!(s.x(), j as f64 * 0.5);
            assert!((s.state()[0].re - (j as f64 * 0.5).sin()).abs() < 1e-10);
        }
    }
}
