//! Truncated Taylor series ("jets") for exact derivatives of closed-form profiles.
//!
//! A jet stores normalized Taylor coefficients `f^{(j)}(r0) / j!`.

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    c: Vec<f64>,
}

impl Jet {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = value;
        Self { c }
    }

    /// The independent variable expanded around `at`.
    pub fn variable(at: f64, order: usize) -> Self {
        let mut c = vec![0.0; order + 1];
        c[0] = at;
        if order >= 1 {
            c[1] = 1.0;
        }
        Self { c }
    }

    pub fn order(&self) -> usize {
        self.c.len() - 1
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Derivatives `f, f', ..., f^{(order)}`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.c
            .iter()
            .enumerate()
            .map(|(j, v)| {
                if j > 0 {
                    fact *= j as f64;
                }
                v * fact
            })
            .collect()
    }

    pub fn add(&self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, o: &Jet) -> Jet {
        Jet { c: self.c.iter().zip(&o.c).map(|(a, b)| a - b).collect() }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet { c: self.c.iter().map(|a| a * s).collect() }
    }

    pub fn add_const(&self, s: f64) -> Jet {
        let mut c = self.c.clone();
        c[0] += s;
        Jet { c }
    }

    pub fn mul(&self, o: &Jet) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for (i, ci) in c.iter_mut().enumerate() {
            *ci = (0..=i).map(|j| self.c[j] * o.c[i - j]).sum();
        }
        Jet { c }
    }

    pub fn div(&self, o: &Jet) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        for i in 0..n {
            let s: f64 = (1..=i).map(|j| o.c[j] * c[i - j]).sum();
            c[i] = (self.c[i] - s) / o.c[0];
        }
        Jet { c }
    }

    pub fn sqrt(&self) -> Jet {
        let n = self.c.len();
        let mut c = vec![0.0; n];
        c[0] = self.c[0].sqrt();
        for i in 1..n {
            let s: f64 = (1..i).map(|j| c[j] * c[i - j]).sum();
            c[i] = (self.c[i] - s) / (2.0 * c[0]);
        }
        Jet { c }
    }

    /// `(cos f, sin f)`.
    pub fn cos_sin(&self) -> (Jet, Jet) {
        let n = self.c.len();
        let mut co = vec![0.0; n];
        let mut si = vec![0.0; n];
        co[0] = self.c[0].cos();
        si[0] = self.c[0].sin();
        for i in 1..n {
            let mut sc = 0.0;
            let mut ss = 0.0;
            for j in 1..=i {
                let w = j as f64 * self.c[j];
                sc += w * si[i - j];
                ss += w * co[i - j];
            }
            co[i] = -sc / i as f64;
            si[i] = ss / i as f64;
        }
        (Jet { c: co }, Jet { c: si })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_derivatives() {
        // f = 1/(1+r)^2 at r=0.5: f^{(j)} = (-1)^j (j+1)! / 1.5^{j+2}
        let r = Jet::variable(0.5, 6);
        let one = Jet::constant(1.0, 6);
        let p = r.add_const(1.0);
        let f = one.div(&p.mul(&p));
        let d = f.derivatives();
        let mut fact = 1.0;
        for (j, v) in d.iter().enumerate() {
            fact *= (j + 1) as f64;
            let exact = if j % 2 == 0 { 1.0 } else { -1.0 } * fact / 1.5f64.powi(j as i32 + 2);
            assert!((v - exact).abs() < 1e-12 * exact.abs(), "j={j}");
        }
    }

    #[test]
    fn trig_and_sqrt() {
        let r = Jet::variable(0.3, 4);
        let (c, s) = r.scale(2.0).cos_sin();
        let d = c.derivatives();
        assert!((d[1] + 2.0 * 0.6f64.sin()).abs() < 1e-14);
        assert!((d[4] - 16.0 * 0.6f64.cos()).abs() < 1e-12);
        let one = c.mul(&c).add(&s.mul(&s));
        assert!((one.value() - 1.0).abs() < 1e-15);
        assert!(one.derivatives()[1..].iter().all(|v| v.abs() < 1e-12));
        let q = r.mul(&r).sqrt();
        let dq = q.derivatives();
        assert!((dq[0] - 0.3).abs() < 1e-15 && (dq[1] - 1.0).abs() < 1e-14);
        assert!(dq[2..].iter().all(|v| v.abs() < 1e-10));
    }
}
