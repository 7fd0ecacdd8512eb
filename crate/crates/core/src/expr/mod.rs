//! Expression language for coefficients, phases, profiles and bivector entries.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          exponent must fold to a constant
//! atom    := number | ident | ident '(' args ')' | '(' sum ')'
//! ```
//!
//! Identifiers are `x1..xn` and `h` in the x-context, `t` and `h` in the t-context,
//! and the constant `pi`. Functions: `exp sin cos sqrt log tanh` and `bump(t, a, b)`.

mod bundle;
mod eval;
mod parse;

use std::fmt;

pub use bundle::FieldBundle;
pub use eval::Bindings;
pub use parse::{parse, ParseError, ParseErrorKind};

use crate::jets::Prim;

/// Which free variables an expression may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Context {
    X { n: usize },
    T,
}

/// 1-based source location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: usize,
    pub col: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Sin,
    Cos,
    Sqrt,
    Log,
    Tanh,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Log => "log",
            Func::Tanh => "tanh",
        }
    }

    pub fn prim(self) -> Prim {
        match self {
            Func::Exp => Prim::Exp,
            Func::Sin => Prim::Sin,
            Func::Cos => Prim::Cos,
            Func::Sqrt => Prim::Sqrt,
            Func::Log => Prim::Log,
            Func::Tanh => Prim::Tanh,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Num(f64),
    /// Coordinate `x_{i+1}`.
    X(usize),
    H,
    T,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, f64),
    Call(Func, Box<Expr>),
    Bump { arg: Box<Expr>, a: f64, b: f64, deriv: u8 },
}

/// Expression tree. Equality ignores source spans.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl From<f64> for Expr {
    fn from(v: f64) -> Self {
        Expr::num(v)
    }
}

fn fmt_num(v: f64) -> String {
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        format!("({v:?})")
    } else {
        format!("{v:?}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            ExprKind::Num(v) => write!(f, "{}", fmt_num(*v)),
            ExprKind::X(i) => write!(f, "x{}", i + 1),
            ExprKind::H => write!(f, "h"),
            ExprKind::T => write!(f, "t"),
            ExprKind::Neg(e) => write!(f, "(-{e})"),
            ExprKind::Bin(op, a, b) => {
                let c = match op {
                    BinOp::Add => '+',
                    BinOp::Sub => '-',
                    BinOp::Mul => '*',
                    BinOp::Div => '/',
                };
                write!(f, "({a} {c} {b})")
            }
            ExprKind::Pow(b, p) => write!(f, "({b})^{}", fmt_num(*p)),
            ExprKind::Call(func, a) => write!(f, "{}({a})", func.name()),
            ExprKind::Bump { arg, a, b, deriv } => {
                if *deriv == 0 {
                    write!(f, "bump({arg}, {}, {})", fmt_num(*a), fmt_num(*b))
                } else {
                    write!(f, "bump_d{deriv}({arg}, {}, {})", fmt_num(*a), fmt_num(*b))
                }
            }
        }
    }
}

impl Expr {
    pub(crate) fn at(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    fn new(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }

    pub fn num(v: f64) -> Self {
        Expr::new(ExprKind::Num(v))
    }

    pub fn x(i: usize) -> Self {
        Expr::new(ExprKind::X(i))
    }

    pub fn t() -> Self {
        Expr::new(ExprKind::T)
    }

    pub fn h() -> Self {
        Expr::new(ExprKind::H)
    }

    pub fn as_num(&self) -> Option<f64> {
        match self.kind {
            ExprKind::Num(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num() == Some(0.0)
    }

    /// Node depth, leaves count as 1.
    pub fn depth(&self) -> usize {
        1 + match &self.kind {
            ExprKind::Num(_) | ExprKind::X(_) | ExprKind::H | ExprKind::T => 0,
            ExprKind::Neg(e) | ExprKind::Pow(e, _) | ExprKind::Call(_, e) => e.depth(),
            ExprKind::Bump { arg, .. } => arg.depth(),
            ExprKind::Bin(_, a, b) => a.depth().max(b.depth()),
        }
    }

    fn any(&self, pred: &dyn Fn(&ExprKind) -> bool) -> bool {
        if pred(&self.kind) {
            return true;
        }
        match &self.kind {
            ExprKind::Neg(e) | ExprKind::Pow(e, _) | ExprKind::Call(_, e) => e.any(pred),
            ExprKind::Bump { arg, .. } => arg.any(pred),
            ExprKind::Bin(_, a, b) => a.any(pred) || b.any(pred),
            _ => false,
        }
    }

    pub fn uses_h(&self) -> bool {
        self.any(&|k| matches!(k, ExprKind::H))
    }

    pub fn uses_t(&self) -> bool {
        self.any(&|k| matches!(k, ExprKind::T))
    }

    /// Largest coordinate index used plus one (0 if none).
    pub fn var_count(&self) -> usize {
        match &self.kind {
            ExprKind::X(i) => i + 1,
            ExprKind::Neg(e) | ExprKind::Pow(e, _) | ExprKind::Call(_, e) => e.var_count(),
            ExprKind::Bump { arg, .. } => arg.var_count(),
            ExprKind::Bin(_, a, b) => a.var_count().max(b.var_count()),
            _ => 0,
        }
    }

    /// Value of a variable-free expression.
    pub fn const_value(&self) -> Option<f64> {
        if self.any(&|k| matches!(k, ExprKind::X(_) | ExprKind::H | ExprKind::T)) {
            return None;
        }
        self.eval_f64(&[], 0.0, None).ok()
    }

    // smart constructors with light folding

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::num(x + y),
            (Some(x), _) if x == 0.0 => b,
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::new(ExprKind::Bin(BinOp::Add, Box::new(a), Box::new(b))),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::num(x - y),
            (Some(x), _) if x == 0.0 => Expr::neg(b),
            (_, Some(y)) if y == 0.0 => a,
            _ => Expr::new(ExprKind::Bin(BinOp::Sub, Box::new(a), Box::new(b))),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), Some(y)) => Expr::num(x * y),
            (Some(x), _) | (_, Some(x)) if x == 0.0 => Expr::num(0.0),
            (Some(x), _) if x == 1.0 => b,
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::new(ExprKind::Bin(BinOp::Mul, Box::new(a), Box::new(b))),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_num(), b.as_num()) {
            (Some(x), _) if x == 0.0 => Expr::num(0.0),
            (_, Some(y)) if y == 1.0 => a,
            _ => Expr::new(ExprKind::Bin(BinOp::Div, Box::new(a), Box::new(b))),
        }
    }

    pub fn neg(a: Expr) -> Expr {
        match a.kind {
            ExprKind::Num(v) => Expr::num(-v),
            ExprKind::Neg(inner) => *inner,
            _ => Expr::new(ExprKind::Neg(Box::new(a))),
        }
    }

    pub fn pow(a: Expr, p: f64) -> Expr {
        if p == 0.0 {
            return Expr::num(1.0);
        }
        if p == 1.0 {
            return a;
        }
        Expr::new(ExprKind::Pow(Box::new(a), p))
    }

    pub fn call(f: Func, a: Expr) -> Expr {
        Expr::new(ExprKind::Call(f, Box::new(a)))
    }

    pub fn bump(arg: Expr, a: f64, b: f64, deriv: u8) -> Expr {
        Expr::new(ExprKind::Bump {
            arg: Box::new(arg),
            a,
            b,
            deriv,
        })
    }

    /// Sum of a list, folding constants.
    pub fn sum(items: impl IntoIterator<Item = Expr>) -> Expr {
        items.into_iter().fold(Expr::num(0.0), Expr::add)
    }

    /// Symbolic derivative with respect to `x_{i+1}`.
    pub fn diff_x(&self, i: usize) -> Expr {
        self.diff(&|k| matches!(k, ExprKind::X(j) if *j == i))
    }

    /// Symbolic derivative with respect to `t`.
    pub fn diff_t(&self) -> Expr {
        self.diff(&|k| matches!(k, ExprKind::T))
    }

    fn diff(&self, is_var: &dyn Fn(&ExprKind) -> bool) -> Expr {
        match &self.kind {
            ExprKind::Num(_) | ExprKind::H | ExprKind::X(_) | ExprKind::T => {
                Expr::num(if is_var(&self.kind) { 1.0 } else { 0.0 })
            }
            ExprKind::Neg(e) => Expr::neg(e.diff(is_var)),
            ExprKind::Bin(op, a, b) => {
                let (da, db) = (a.diff(is_var), b.diff(is_var));
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinOp::Add => Expr::add(da, db),
                    BinOp::Sub => Expr::sub(da, db),
                    BinOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                    BinOp::Div => Expr::sub(
                        Expr::div(da, b.clone()),
                        Expr::div(Expr::mul(a, db), Expr::pow(b, 2.0)),
                    ),
                }
            }
            ExprKind::Pow(b, p) => {
                let db = b.diff(is_var);
                if db.is_zero() {
                    return Expr::num(0.0);
                }
                Expr::mul(Expr::mul(Expr::num(*p), Expr::pow((**b).clone(), p - 1.0)), db)
            }
            ExprKind::Call(f, a) => {
                let da = a.diff(is_var);
                if da.is_zero() {
                    return Expr::num(0.0);
                }
                let a = (**a).clone();
                let outer = match f {
                    Func::Exp => self.clone(),
                    Func::Sin => Expr::call(Func::Cos, a),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, a)),
                    Func::Sqrt => Expr::div(Expr::num(0.5), self.clone()),
                    Func::Log => Expr::div(Expr::num(1.0), a),
                    Func::Tanh => Expr::sub(Expr::num(1.0), Expr::pow(self.clone(), 2.0)),
                };
                Expr::mul(outer, da)
            }
            ExprKind::Bump { arg, a, b, deriv } => {
                let da = arg.diff(is_var);
                if da.is_zero() {
                    return Expr::num(0.0);
                }
                Expr::mul(Expr::bump((**arg).clone(), *a, *b, deriv + 1), da)
            }
        }
    }

    fn map(&self, leaf: &dyn Fn(&ExprKind) -> Option<Expr>) -> Expr {
        if let Some(e) = leaf(&self.kind) {
            return e;
        }
        let kind = match &self.kind {
            ExprKind::Neg(e) => ExprKind::Neg(Box::new(e.map(leaf))),
            ExprKind::Bin(op, a, b) => ExprKind::Bin(*op, Box::new(a.map(leaf)), Box::new(b.map(leaf))),
            ExprKind::Pow(e, p) => ExprKind::Pow(Box::new(e.map(leaf)), *p),
            ExprKind::Call(f, e) => ExprKind::Call(*f, Box::new(e.map(leaf))),
            ExprKind::Bump { arg, a, b, deriv } => ExprKind::Bump {
                arg: Box::new(arg.map(leaf)),
                a: *a,
                b: *b,
                deriv: *deriv,
            },
            k => k.clone(),
        };
        Expr { kind, span: self.span }
    }

    /// Replaces `t` by `e`.
    pub fn subst_t(&self, e: &Expr) -> Expr {
        self.map(&|k| matches!(k, ExprKind::T).then(|| e.clone()))
    }

    /// Replaces `x_{i+1}` by `x_{i+1+offset}`.
    pub fn shift_vars(&self, offset: usize) -> Expr {
        self.map(&|k| match k {
            ExprKind::X(i) => Some(Expr::x(i + offset)),
            _ => None,
        })
    }
}
