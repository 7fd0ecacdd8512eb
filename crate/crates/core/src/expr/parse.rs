use thiserror::Error;

use super::{BinOp, Context, Expr, ExprKind, Func, Span};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("line {line}, column {col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unexpected {found}, expected {expected}")]
    UnexpectedToken { found: String, expected: String },
    #[error("unexpected end of input")]
    UnexpectedEnd,
    #[error("unknown identifier '{0}'")]
    UnknownIdentifier(String),
    #[error("unknown function '{0}'")]
    UnknownFunction(String),
    #[error("{func} expects {expected} argument(s), found {found}")]
    Arity {
        func: String,
        expected: usize,
        found: usize,
    },
    #[error("'{0}' is not available in this context")]
    WrongContext(String),
    #[error("exponent must be a constant")]
    NonConstantExponent,
    #[error("invalid bump parameters: {0}")]
    InvalidBump(String),
    #[error("invalid number literal '{0}'")]
    BadNumber(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    End,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    span: Span,
}

fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
    while i < chars.len() {
        let c = chars[i];
        let span = Span { line, col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v: f64 = text.parse().map_err(|_| ParseError {
                line,
                col,
                kind: ParseErrorKind::BadNumber(text.clone()),
            })?;
            col += i - start;
            out.push(Token { tok: Tok::Num(v), span });
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                span,
            });
            continue;
        }
        if "+-*/^(),".contains(c) {
            out.push(Token { tok: Tok::Op(c), span });
            i += 1;
            col += 1;
            continue;
        }
        return Err(ParseError {
            line,
            col,
            kind: ParseErrorKind::UnexpectedChar(c),
        });
    }
    out.push(Token {
        tok: Tok::End,
        span: Span { line, col },
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    ctx: Context,
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("identifier '{s}'"),
        Tok::Op(c) => format!("'{c}'"),
        Tok::End => "end of input".into(),
    }
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err(span: Span, kind: ParseErrorKind) -> ParseError {
        ParseError {
            line: span.line,
            col: span.col,
            kind,
        }
    }

    fn unexpected(t: &Token, expected: &str) -> ParseError {
        if t.tok == Tok::End {
            return Self::err(t.span, ParseErrorKind::UnexpectedEnd);
        }
        Self::err(
            t.span,
            ParseErrorKind::UnexpectedToken {
                found: describe(&t.tok),
                expected: expected.into(),
            },
        )
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        let t = self.next();
        if t.tok == Tok::Op(c) {
            Ok(())
        } else {
            Err(Self::unexpected(&t, &format!("'{c}'")))
        }
    }

    // sum := product (('+' | '-') product)*
    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('+') => BinOp::Add,
                Tok::Op('-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.next().span;
            let rhs = self.product()?;
            lhs = Expr::at(ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    // product := unary (('*' | '/') unary)*
    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek().tok {
                Tok::Op('*') => BinOp::Mul,
                Tok::Op('/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            let span = self.next().span;
            let rhs = self.unary()?;
            lhs = Expr::at(ExprKind::Bin(op, Box::new(lhs), Box::new(rhs)), span);
        }
    }

    // unary := '-' unary | power
    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek().tok == Tok::Op('-') {
            let span = self.next().span;
            let inner = self.unary()?;
            return Ok(match inner.kind {
                ExprKind::Num(v) => Expr::at(ExprKind::Num(-v), span),
                _ => Expr::at(ExprKind::Neg(Box::new(inner)), span),
            });
        }
        self.power()
    }

    // power := atom ('^' unary)?   (right associative through unary)
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek().tok != Tok::Op('^') {
            return Ok(base);
        }
        let span = self.next().span;
        let exp_span = self.peek().span;
        let exp = self.unary()?;
        let p = exp
            .const_value()
            .ok_or_else(|| Self::err(exp_span, ParseErrorKind::NonConstantExponent))?;
        Ok(Expr::at(ExprKind::Pow(Box::new(base), p), span))
    }

    fn args(&mut self) -> Result<Vec<(Expr, Span)>, ParseError> {
        self.expect('(')?;
        let mut out = Vec::new();
        loop {
            let span = self.peek().span;
            out.push((self.sum()?, span));
            let t = self.next();
            match t.tok {
                Tok::Op(',') => continue,
                Tok::Op(')') => return Ok(out),
                _ => return Err(Self::unexpected(&t, "',' or ')'")),
            }
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let t = self.next();
        let span = t.span;
        match t.tok {
            Tok::Num(v) => Ok(Expr::at(ExprKind::Num(v), span)),
            Tok::Op('(') => {
                let e = self.sum()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if self.peek().tok == Tok::Op('(') {
                    return self.call(&name, span);
                }
                self.ident(&name, span)
            }
            _ => Err(Self::unexpected(&t, "an expression")),
        }
    }

    fn ident(&self, name: &str, span: Span) -> Result<Expr, ParseError> {
        match name {
            "pi" => return Ok(Expr::at(ExprKind::Num(std::f64::consts::PI), span)),
            "h" => return Ok(Expr::at(ExprKind::H, span)),
            "t" => {
                return match self.ctx {
                    Context::T => Ok(Expr::at(ExprKind::T, span)),
                    Context::X { .. } => Err(Self::err(span, ParseErrorKind::WrongContext("t".into()))),
                }
            }
            _ => {}
        }
        if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
            return match self.ctx {
                Context::X { n } if idx >= 1 && idx <= n && !name[1..].starts_with('0') => {
                    Ok(Expr::at(ExprKind::X(idx - 1), span))
                }
                Context::X { .. } => Err(Self::err(span, ParseErrorKind::UnknownIdentifier(name.into()))),
                Context::T => Err(Self::err(span, ParseErrorKind::WrongContext(name.into()))),
            };
        }
        Err(Self::err(span, ParseErrorKind::UnknownIdentifier(name.into())))
    }

    fn call(&mut self, name: &str, span: Span) -> Result<Expr, ParseError> {
        let func = match name {
            "exp" => Some(Func::Exp),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "sqrt" => Some(Func::Sqrt),
            "log" => Some(Func::Log),
            "tanh" => Some(Func::Tanh),
            _ => None,
        };
        if let Some(f) = func {
            let mut args = self.args()?;
            if args.len() != 1 {
                return Err(Self::err(
                    span,
                    ParseErrorKind::Arity {
                        func: name.into(),
                        expected: 1,
                        found: args.len(),
                    },
                ));
            }
            let (a, _) = args.pop().unwrap();
            return Ok(Expr::at(ExprKind::Call(f, Box::new(a)), span));
        }
        let deriv = if name == "bump" {
            Some(0)
        } else {
            name.strip_prefix("bump_d").and_then(|d| d.parse::<u8>().ok())
        };
        let Some(deriv) = deriv else {
            return Err(Self::err(span, ParseErrorKind::UnknownFunction(name.into())));
        };
        let args = self.args()?;
        if args.len() != 3 {
            return Err(Self::err(
                span,
                ParseErrorKind::Arity {
                    func: name.into(),
                    expected: 3,
                    found: args.len(),
                },
            ));
        }
        let mut it = args.into_iter();
        let (arg, _) = it.next().unwrap();
        let mut lim = [0.0; 2];
        for (slot, (e, sp)) in lim.iter_mut().zip(it) {
            *slot = e
                .const_value()
                .ok_or_else(|| Self::err(sp, ParseErrorKind::InvalidBump("limits must be constants".into())))?;
        }
        if !(lim[0] < lim[1]) {
            return Err(Self::err(
                span,
                ParseErrorKind::InvalidBump(format!("need a < b, got a = {}, b = {}", lim[0], lim[1])),
            ));
        }
        Ok(Expr::at(
            ExprKind::Bump {
                arg: Box::new(arg),
                a: lim[0],
                b: lim[1],
                deriv,
            },
            span,
        ))
    }
}

pub fn parse(src: &str, ctx: Context) -> Result<Expr, ParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, ctx };
    let e = p.sum()?;
    let t = p.next();
    if t.tok != Tok::End {
        return Err(Parser::unexpected(&t, "an operator or end of input"));
    }
    Ok(e)
}
