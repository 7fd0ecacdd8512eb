use crate::error::JetError;
use crate::jets::{Jet, Prim, Scalar, Taylor1};

use super::{BinOp, Expr, ExprKind};

/// Values bound to the free variables during evaluation.
pub struct Bindings<'a, S> {
    pub x: &'a [S],
    pub h: f64,
    pub t: Option<&'a S>,
    /// Any value of the scalar type, used to build constants of the right shape.
    pub unit: &'a S,
}

impl Expr {
    pub fn eval<S: Scalar>(&self, b: &Bindings<'_, S>) -> Result<S, JetError> {
        Ok(match &self.kind {
            ExprKind::Num(v) => b.unit.lift(*v),
            ExprKind::H => b.unit.lift(b.h),
            ExprKind::X(i) => b.x.get(*i).cloned().ok_or(JetError::Unbound("x"))?,
            ExprKind::T => b.t.cloned().ok_or(JetError::Unbound("t"))?,
            ExprKind::Neg(e) => e.eval(b)?.neg(),
            ExprKind::Bin(op, l, r) => {
                let (l, r) = (l.eval(b)?, r.eval(b)?);
                match op {
                    BinOp::Add => l.add(&r),
                    BinOp::Sub => l.sub(&r),
                    BinOp::Mul => l.mul(&r),
                    BinOp::Div => l.div(&r)?,
                }
            }
            ExprKind::Pow(e, p) => e.eval(b)?.apply(&Prim::Pow(*p))?,
            ExprKind::Call(f, e) => e.eval(b)?.apply(&f.prim())?,
            ExprKind::Bump { arg, a, b: hi, deriv } => arg.eval(b)?.apply(&Prim::Bump {
                a: *a,
                b: *hi,
                deriv: *deriv,
            })?,
        })
    }

    pub fn eval_f64(&self, x: &[f64], h: f64, t: Option<f64>) -> Result<f64, JetError> {
        let t = t.unwrap_or(f64::NAN);
        let b = Bindings {
            x,
            h,
            t: if t.is_nan() { None } else { Some(&t) },
            unit: &0.0,
        };
        self.eval(&b)
    }

    /// Jet of an x-context expression at `x`.
    pub fn eval_jet(&self, x: &[f64], h: f64, order: usize) -> Result<Jet, JetError> {
        if order > crate::jets::MAX_ORDER {
            return Err(JetError::Order(order));
        }
        let vars: Vec<Jet> = (0..x.len()).map(|i| Jet::variable(x, i, order)).collect();
        let unit = Jet::constant(x.len(), order, 0.0);
        self.eval(&Bindings {
            x: &vars,
            h,
            t: None,
            unit: &unit,
        })
    }

    /// A t-context expression evaluated on a jet (composition `α ∘ u`).
    pub fn eval_on_jet(&self, t: &Jet, h: f64) -> Result<Jet, JetError> {
        self.eval(&Bindings {
            x: &[],
            h,
            t: Some(t),
            unit: t,
        })
    }

    /// Taylor series of a t-context expression around `t0`.
    pub fn eval_taylor(&self, t0: f64, h: f64, order: usize) -> Result<Taylor1, JetError> {
        let t = Taylor1::identity(t0, order);
        self.eval(&Bindings {
            x: &[],
            h,
            t: Some(&t),
            unit: &t,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::{parse, Context};

    #[test]
    fn gradient_and_hessian_of_sum_of_squares() {
        let e = parse("x1^2+x2^2", Context::X { n: 2 }).unwrap();
        let j = e.eval_jet(&[1.0, 2.0], 0.1, 2).unwrap();
        assert_eq!(j.value(), 5.0);
        assert_eq!(j.grad(), &[2.0, 4.0]);
        assert_eq!(j.hess(), &[2.0, 0.0, 0.0, 2.0]);
    }

    #[test]
    fn parameter_h() {
        let e = parse("h*x1", Context::X { n: 2 }).unwrap();
        let j = e.eval_jet(&[3.0, 0.0], 0.1, 2).unwrap();
        assert!((j.value() - 0.3).abs() < 1e-15);
        assert_eq!(j.grad(), &[0.1, 0.0]);
    }

    #[test]
    fn gaussian_in_h() {
        let e = parse("exp(-(x1^2)/h)", Context::X { n: 2 }).unwrap();
        let j = e.eval_jet(&[1.0, 0.0], 0.5, 2).unwrap();
        assert!((j.value() - (-2.0f64).exp()).abs() < 1e-15);
        let f = |a: f64| e.eval_f64(&[a, 0.0], 0.5, None).unwrap();
        let fd = (f(1.0 + 1e-5) - f(1.0 - 1e-5)) / 2e-5;
        assert!((j.d1(0) - fd).abs() < 1e-8);
    }

    #[test]
    fn taylor_of_profile() {
        let a = parse("t^3/6", Context::T).unwrap();
        let s = a.eval_taylor(2.0, 0.1, 4).unwrap();
        let d = s.derivatives();
        assert!((d[0] - 8.0 / 6.0).abs() < 1e-15);
        assert!((d[1] - 2.0).abs() < 1e-15);
        assert!((d[2] - 2.0).abs() < 1e-15);
        assert!((d[3] - 1.0).abs() < 1e-15);
        assert_eq!(d[4], 0.0);
    }

    #[test]
    fn evaluation_is_pure() {
        let e = parse("sin(x1*x2)/(1+x1^2) + bump(x2, -1, 1)", Context::X { n: 2 }).unwrap();
        let a = e.eval_jet(&[0.4, 0.3], 0.2, 3).unwrap();
        let b = e.eval_jet(&[0.4, 0.3], 0.2, 3).unwrap();
        assert_eq!(a, b);
    }
}
