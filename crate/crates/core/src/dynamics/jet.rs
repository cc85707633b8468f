use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value with its first and second derivative with respect to one scalar
/// (time, in the synthetic generator). Arithmetic propagates both derivatives
/// exactly by the chain rule.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub const fn constant(v: f64) -> Self {
        Jet { v, d1: 0.0, d2: 0.0 }
    }

    /// The independent variable itself.
    pub const fn variable(v: f64) -> Self {
        Jet { v, d1: 1.0, d2: 0.0 }
    }

    pub const fn new(v: f64, d1: f64, d2: f64) -> Self {
        Jet { v, d1, d2 }
    }

    /// Compose with a scalar function given its value and first two derivatives at `self.v`.
    fn chain(self, f: f64, df: f64, ddf: f64) -> Jet {
        Jet {
            v: f,
            d1: df * self.d1,
            d2: ddf * self.d1 * self.d1 + df * self.d2,
        }
    }

    pub fn sin(self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Jet {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn sqrt(self) -> Jet {
        let r = self.v.sqrt();
        self.chain(r, 0.5 / r, -0.25 / (r * self.v))
    }

    pub fn acos(self) -> Jet {
        let q = 1.0 - self.v * self.v;
        let sq = q.sqrt();
        self.chain(self.v.acos(), -1.0 / sq, -self.v / (q * sq))
    }

    pub fn powi(self, n: i32) -> Jet {
        let x = self.v;
        let nf = n as f64;
        self.chain(x.powi(n), nf * x.powi(n - 1), nf * (nf - 1.0) * x.powi(n - 2))
    }

    /// Four-quadrant arctangent of `y / x`.
    pub fn atan2(y: Jet, x: Jet) -> Jet {
        let d = x.v * x.v + y.v * y.v;
        let n = x.v * y.d1 - y.v * x.d1;
        let dn = x.v * y.d2 - y.v * x.d2;
        let dd = 2.0 * (x.v * x.d1 + y.v * y.d1);
        Jet {
            v: y.v.atan2(x.v),
            d1: n / d,
            d2: (dn * d - n * dd) / (d * d),
        }
    }
}

impl From<f64> for Jet {
    fn from(v: f64) -> Self {
        Jet::constant(v)
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d1, -self.d2)
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet::new(
            self.v * o.v,
            self.d1 * o.v + self.v * o.d1,
            self.d2 * o.v + 2.0 * self.d1 * o.d1 + self.v * o.d2,
        )
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let w = self.v / o.v;
        let w1 = (self.d1 - w * o.d1) / o.v;
        let w2 = (self.d2 - 2.0 * w1 * o.d1 - w * o.d2) / o.v;
        Jet::new(w, w1, w2)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, o: f64) -> Jet {
        Jet::new(self.v + o, self.d1, self.d2)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, o: f64) -> Jet {
        Jet::new(self.v - o, self.d1, self.d2)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        Jet::new(self.v * o, self.d1 * o, self.d2 * o)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        o * self
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, o: f64) -> Jet {
        Jet::new(self.v / o, self.d1 / o, self.d2 / o)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Central-difference derivatives of `f` at `t` for comparison.
    fn numeric(f: impl Fn(f64) -> f64, t: f64) -> (f64, f64) {
        let h = 1e-4;
        ((f(t + h) - f(t - h)) / (2.0 * h), (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h))
    }

    fn check(jet: impl Fn(Jet) -> Jet, plain: impl Fn(f64) -> f64, t: f64) {
        let j = jet(Jet::variable(t));
        let (d1, d2) = numeric(&plain, t);
        assert!((j.v - plain(t)).abs() < 1e-12);
        assert!((j.d1 - d1).abs() < 1e-6 * (1.0 + d1.abs()), "d1 {} vs {d1}", j.d1);
        assert!((j.d2 - d2).abs() < 1e-4 * (1.0 + d2.abs()), "d2 {} vs {d2}", j.d2);
    }

    #[test]
    fn elementary_functions() {
        let t = 0.37;
        check(|x| x.sin() * x.cos() + x * x, |x| x.sin() * x.cos() + x * x, t);
        check(|x| (x * 3.0 + 1.0).sqrt() / (x + 2.0), |x| (3.0 * x + 1.0).sqrt() / (x + 2.0), t);
        check(|x| (x * 0.5).acos(), |x| (0.5 * x).acos(), t);
        check(|x| Jet::atan2(x.sin(), x - 2.0), |x| x.sin().atan2(x - 2.0), t);
        check(|x| (x - 0.1).powi(5), |x| (x - 0.1).powi(5), t);
        check(|x| -(2.0 * x) - x.cos() * 4.0, |x| -2.0 * x - 4.0 * x.cos(), t);
    }
}
