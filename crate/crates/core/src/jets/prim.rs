use serde::{Deserialize, Serialize};

use crate::error::JetError;

/// Univariate smooth primitives that can be composed with jets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Prim {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Log,
    Tanh,
    Recip,
    /// `x^p` for a constant real exponent.
    Pow(f64),
    /// `d`-th derivative (in `t`) of the smooth cutoff `bump(t, a, b)`:
    /// identically 1 for `t ≤ a`, identically 0 for `t ≥ b`.
    Bump { a: f64, b: f64, deriv: u8 },
}

impl Prim {
    pub fn name(&self) -> &'static str {
        match self {
            Prim::Exp => "exp",
            Prim::Sin => "sin",
            Prim::Cos => "cos",
            Prim::Sqrt => "sqrt",
            Prim::Log => "log",
            Prim::Tanh => "tanh",
            Prim::Recip => "recip",
            Prim::Pow(_) => "pow",
            Prim::Bump { .. } => "bump",
        }
    }

    /// Plain evaluation.
    pub fn eval(&self, x: f64) -> Result<f64, JetError> {
        match *self {
            Prim::Exp => Ok(x.exp()),
            Prim::Sin => Ok(x.sin()),
            Prim::Cos => Ok(x.cos()),
            Prim::Tanh => Ok(x.tanh()),
            Prim::Sqrt if x > 0.0 => Ok(x.sqrt()),
            Prim::Log if x > 0.0 => Ok(x.ln()),
            Prim::Recip if x != 0.0 => Ok(1.0 / x),
            Prim::Recip => Err(JetError::DivisionByZero),
            Prim::Pow(p) => pow_value(x, p),
            Prim::Bump { deriv: 0, a, b } => Ok(smooth_step((b - x) / (b - a))),
            Prim::Bump { .. } => Ok(self.taylor(x, 0)?[0]),
            _ => Err(JetError::Domain {
                func: self.name(),
                value: x,
            }),
        }
    }

    /// Normalized Taylor coefficients `f^{(k)}(x0) / k!` for `k = 0..=order`.
    pub fn taylor(&self, x0: f64, order: usize) -> Result<Vec<f64>, JetError> {
        let k_max = order;
        let mut c = vec![0.0; k_max + 1];
        match *self {
            Prim::Exp => {
                let e = x0.exp();
                let mut fact = 1.0;
                for (k, ck) in c.iter_mut().enumerate() {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    *ck = e / fact;
                }
            }
            Prim::Sin | Prim::Cos => {
                let (s, co) = x0.sin_cos();
                // derivatives cycle through sin, cos, -sin, -cos
                let cycle = if matches!(self, Prim::Sin) {
                    [s, co, -s, -co]
                } else {
                    [co, -s, -co, s]
                };
                let mut fact = 1.0;
                for (k, ck) in c.iter_mut().enumerate() {
                    if k > 0 {
                        fact *= k as f64;
                    }
                    *ck = cycle[k % 4] / fact;
                }
            }
            Prim::Log => {
                if x0 <= 0.0 {
                    return Err(JetError::Domain {
                        func: "log",
                        value: x0,
                    });
                }
                c[0] = x0.ln();
                let mut p = 1.0;
                for (k, ck) in c.iter_mut().enumerate().skip(1) {
                    p *= x0;
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    *ck = sign / (k as f64 * p);
                }
            }
            Prim::Sqrt => {
                if x0 <= 0.0 {
                    return Err(JetError::Domain {
                        func: "sqrt",
                        value: x0,
                    });
                }
                return Prim::Pow(0.5).taylor(x0, order);
            }
            Prim::Recip => {
                if x0 == 0.0 {
                    return Err(JetError::DivisionByZero);
                }
                return Prim::Pow(-1.0).taylor(x0, order);
            }
            Prim::Pow(p) => {
                let is_int = p.fract() == 0.0 && p.abs() < 1e9;
                if is_int && p >= 0.0 {
                    // polynomial case: exact binomial coefficients
                    let pk = p as i64;
                    let mut binom = 1.0;
                    for (k, ck) in c.iter_mut().enumerate() {
                        let k = k as i64;
                        if k > pk {
                            break;
                        }
                        if k > 0 {
                            binom = binom * (pk - k + 1) as f64 / k as f64;
                        }
                        *ck = binom * x0.powi((pk - k) as i32);
                    }
                } else {
                    if x0 == 0.0 || (!is_int && x0 < 0.0) {
                        return Err(JetError::Domain {
                            func: "pow",
                            value: x0,
                        });
                    }
                    c[0] = pow_value(x0, p)?;
                    for k in 1..=k_max {
                        c[k] = c[k - 1] * (p - (k as f64 - 1.0)) / (k as f64 * x0);
                    }
                }
            }
            Prim::Tanh => {
                let id = super::Taylor1::identity(x0, order);
                let t = tanh_series(&id)?;
                return Ok(t.coeffs().to_vec());
            }
            Prim::Bump { a, b, deriv } => {
                if !(b > a) {
                    return Err(JetError::Domain {
                        func: "bump",
                        value: x0,
                    });
                }
                let d = deriv as usize;
                let id = super::Taylor1::identity(x0, order + d);
                let full = bump_series(&id, a, b)?;
                let fc = full.coeffs();
                // shift by d derivatives: coefficient k of f^{(d)} is fc[k+d] (k+d)!/k!
                for (k, ck) in c.iter_mut().enumerate() {
                    let mut ratio = 1.0;
                    for i in 1..=d {
                        ratio *= (k + i) as f64;
                    }
                    *ck = fc[k + d] * ratio;
                }
            }
        }
        Ok(c)
    }

    /// Derivatives `f^{(k)}(x0)` for `k = 0..=order`.
    pub fn derivatives(&self, x0: f64, order: usize) -> Result<Vec<f64>, JetError> {
        let mut c = self.taylor(x0, order)?;
        let mut fact = 1.0;
        for (k, ck) in c.iter_mut().enumerate() {
            if k > 0 {
                fact *= k as f64;
            }
            *ck *= fact;
        }
        Ok(c)
    }
}

fn pow_value(x: f64, p: f64) -> Result<f64, JetError> {
    let is_int = p.fract() == 0.0 && p.abs() < 1e9;
    if is_int {
        if x == 0.0 && p < 0.0 {
            return Err(JetError::DivisionByZero);
        }
        Ok(x.powi(p as i32))
    } else if x > 0.0 || (x == 0.0 && p > 0.0) {
        Ok(x.powf(p))
    } else {
        Err(JetError::Domain {
            func: "pow",
            value: x,
        })
    }
}

fn flat_exp(s: f64) -> f64 {
    if s > 0.0 {
        (-1.0 / s).exp()
    } else {
        0.0
    }
}

/// `g(s) / (g(s) + g(1 - s))` with `g(s) = exp(-1/s)` for `s > 0` and 0 otherwise.
pub(crate) fn smooth_step(s: f64) -> f64 {
    let (p, q) = (flat_exp(s), flat_exp(1.0 - s));
    p / (p + q)
}

fn flat_exp_series(s: &super::Taylor1) -> Result<super::Taylor1, JetError> {
    // below this the flat factor underflows and its series is identically zero
    if s.value() > 1.0 / 700.0 {
        let inv = s.lift(1.0).div(s)?;
        Ok(inv.neg().apply_coeffs(&Prim::Exp.taylor(-1.0 / s.value(), s.order())?))
    } else {
        Ok(s.lift(0.0))
    }
}

fn bump_series(x: &super::Taylor1, a: f64, b: f64) -> Result<super::Taylor1, JetError> {
    let s = x.lift(b).sub(x).scale(1.0 / (b - a));
    let p = flat_exp_series(&s)?;
    let q = flat_exp_series(&s.lift(1.0).sub(&s))?;
    p.div(&p.add(&q))
}

fn tanh_series(x: &super::Taylor1) -> Result<super::Taylor1, JetError> {
    let one = x.lift(1.0);
    if x.value() >= 0.0 {
        let m = x.scale(-2.0);
        let e = m.apply_coeffs(&Prim::Exp.taylor(m.value(), x.order())?);
        one.sub(&e).div(&one.add(&e))
    } else {
        let m = x.scale(2.0);
        let e = m.apply_coeffs(&Prim::Exp.taylor(m.value(), x.order())?);
        e.sub(&one).div(&e.add(&one))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_derivs(f: impl Fn(f64) -> f64, x: f64) -> [f64; 3] {
        let h = 1e-3;
        let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        let d2 = (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
        let d3 = (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h);
        [d1, d2, d3]
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let prims = [
            (Prim::Exp, 0.3),
            (Prim::Sin, 1.1),
            (Prim::Cos, -0.4),
            (Prim::Sqrt, 2.0),
            (Prim::Log, 1.7),
            (Prim::Tanh, 0.6),
            (Prim::Tanh, -0.9),
            (Prim::Recip, -1.3),
            (Prim::Pow(2.5), 1.2),
            (Prim::Pow(-3.0), -0.8),
            (Prim::Bump { a: 0.0, b: 1.0, deriv: 0 }, 0.35),
            (Prim::Bump { a: -1.0, b: 2.0, deriv: 1 }, 0.2),
        ];
        for (p, x) in prims {
            let d = p.derivatives(x, 3).unwrap();
            let fd = fd_derivs(|y| p.eval(y).unwrap(), x);
            assert!((d[0] - p.eval(x).unwrap()).abs() < 1e-14, "{p:?}");
            for k in 0..3 {
                let tol = 1e-4 * (1.0 + d[k + 1].abs());
                assert!((d[k + 1] - fd[k]).abs() < tol, "{p:?} order {} : {} vs {}", k + 1, d[k + 1], fd[k]);
            }
        }
    }

    #[test]
    fn bump_is_flat_outside_transition() {
        let b = Prim::Bump { a: 0.0, b: 1.0, deriv: 0 };
        for x in [-1.0, 0.0, 1.0, 2.0] {
            let d = b.derivatives(x, 6).unwrap();
            let expected = if x <= 0.0 { 1.0 } else { 0.0 };
            assert_eq!(d[0], expected);
            assert!(d[1..].iter().all(|v| v.abs() <= 1e-10));
        }
        let mid = b.eval(0.5).unwrap();
        assert!((mid - 0.5).abs() < 1e-15);
    }

    #[test]
    fn domain_errors() {
        assert!(Prim::Log.taylor(-1.0, 2).is_err());
        assert!(Prim::Sqrt.taylor(0.0, 2).is_err());
        assert_eq!(Prim::Recip.taylor(0.0, 1), Err(JetError::DivisionByZero));
        assert!(Prim::Pow(0.5).taylor(-2.0, 1).is_err());
        assert_eq!(Prim::Pow(3.0).derivatives(0.0, 3).unwrap(), vec![0.0, 0.0, 0.0, 6.0]);
    }
}
