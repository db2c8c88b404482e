//! Expression language for the command line: a recursive-descent parser producing [`Expr`] and
//! an evaluator producing exact rational functions.
//!
//! ```text
//! expr   := comp
//! comp   := sum ('@' sum)*              left-assoc, a @ b is a ∘ b
//! sum    := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' '-'? int)?
//! atom   := 'x' | int | 'i' | 'zeta(' int ')' | 'sqrt(' '-'? int ')'
//!         | 'D(' int [',' expr] ')' | 'E(' int ')' | '(' expr ')'
//! ```

use laurent_ritt::dickson::{dickson, dickson_second};
use laurent_ritt::{CycloScalar, RatFunc};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Call {
    /// `D(n)` or `D(n, alpha)`.
    D(u32, Option<Box<Expr>>),
    E(u32),
    Zeta(u32),
    Sqrt(i64),
    I,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expr {
    Var,
    /// Non-negative decimal literal, kept as text so that it may exceed machine integers.
    Int(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i64),
    Call(Call),
    Compose(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ExprError {
    #[error("parse error at {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("arity error at {pos}: {name} takes {expected} argument(s), got {got}")]
    Arity {
        pos: usize,
        name: String,
        expected: &'static str,
        got: usize,
    },
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("limit exceeded: {0}")]
    Limit(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Num(String),
    Ident(String),
    Sym(char),
    End,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let chars: Vec<(usize, char)> = text.char_indices().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        let (pos, c) = chars[k];
        if c.is_whitespace() {
            k += 1;
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while k < chars.len() && chars[k].1.is_ascii_digit() {
                s.push(chars[k].1);
                k += 1;
            }
            out.push((pos, Tok::Num(s)));
        } else if c.is_ascii_alphabetic() {
            let mut s = String::new();
            while k < chars.len() && chars[k].1.is_ascii_alphanumeric() {
                s.push(chars[k].1);
                k += 1;
            }
            out.push((pos, Tok::Ident(s)));
        } else if "+-*/^(),@".contains(c) {
            out.push((pos, Tok::Sym(c)));
            k += 1;
        } else {
            return Err(ExprError::Parse {
                pos,
                msg: format!("unexpected character {c:?}"),
            });
        }
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if t != Tok::End {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == &Tok::Sym(c) {
            self.at += 1;
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, msg: impl Into<String>) -> Result<T, ExprError> {
        Err(ExprError::Parse {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.fail(format!("expected '{c}'"))
        }
    }

    fn comp(&mut self) -> Result<Expr, ExprError> {
        let mut e = self.sum()?;
        while self.eat('@') {
            e = Expr::Compose(Box::new(e), Box::new(self.sum()?));
        }
        Ok(e)
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let mut e = self.term()?;
        loop {
            if self.eat('+') {
                e = Expr::Add(Box::new(e), Box::new(self.term()?));
            } else if self.eat('-') {
                e = Expr::Sub(Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut e = self.unary()?;
        loop {
            if self.eat('*') {
                e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
            } else if self.eat('/') {
                e = Expr::Div(Box::new(e), Box::new(self.unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat('^') {
            let k = self.signed_int("exponent")?;
            return Ok(Expr::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn signed_int(&mut self, what: &str) -> Result<i64, ExprError> {
        let neg = self.eat('-');
        let pos = self.pos();
        match self.bump() {
            Tok::Num(s) => {
                let v: i64 = s.parse().map_err(|_| ExprError::Parse {
                    pos,
                    msg: format!("{what} {s} is too large"),
                })?;
                Ok(if neg { -v } else { v })
            }
            _ => Err(ExprError::Parse {
                pos,
                msg: format!("expected an integer {what}"),
            }),
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(s) => Ok(Expr::Int(s)),
            Tok::Sym('(') => {
                let e = self.comp()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => match name.as_str() {
                "x" => Ok(Expr::Var),
                "i" => Ok(Expr::Call(Call::I)),
                "D" | "E" | "zeta" | "sqrt" => self.call(&name, pos),
                _ => Err(ExprError::Parse {
                    pos,
                    msg: format!("unknown name {name:?}"),
                }),
            },
            Tok::End => Err(ExprError::Parse {
                pos,
                msg: "unexpected end of input".into(),
            }),
            Tok::Sym(c) => Err(ExprError::Parse {
                pos,
                msg: format!("unexpected '{c}'"),
            }),
        }
    }

    fn call(&mut self, name: &str, pos: usize) -> Result<Expr, ExprError> {
        self.expect('(')?;
        let mut args: Vec<(usize, Expr)> = Vec::new();
        if !self.eat(')') {
            loop {
                let p = self.pos();
                args.push((p, self.comp()?));
                if self.eat(')') {
                    break;
                }
                self.expect(',')?;
            }
        }
        let arity = |expected: &'static str| ExprError::Arity {
            pos,
            name: name.to_string(),
            expected,
            got: args.len(),
        };
        let small = |(p, e): &(usize, Expr)| -> Result<u32, ExprError> {
            match e {
                Expr::Int(s) => s.parse().map_err(|_| ExprError::Parse {
                    pos: *p,
                    msg: format!("{name} index {s} is too large"),
                }),
                _ => Err(ExprError::Parse {
                    pos: *p,
                    msg: format!("{name} expects an integer literal"),
                }),
            }
        };
        let call = match name {
            "D" => {
                if args.is_empty() || args.len() > 2 {
                    return Err(arity("1 or 2"));
                }
                let n = small(&args[0])?;
                Call::D(n, args.get(1).map(|(_, e)| Box::new(e.clone())))
            }
            "E" | "zeta" => {
                if args.len() != 1 {
                    return Err(arity("1"));
                }
                let n = small(&args[0])?;
                if name == "E" {
                    Call::E(n)
                } else {
                    Call::Zeta(n)
                }
            }
            _ => {
                if args.len() != 1 {
                    return Err(arity("1"));
                }
                let (p, e) = &args[0];
                let v = match e {
                    Expr::Neg(inner) => small(&(*p, (**inner).clone())).map(|v| -(v as i64)),
                    _ => small(&args[0]).map(i64::from),
                }?;
                Call::Sqrt(v)
            }
        };
        Ok(Expr::Call(call))
    }
}

pub fn parse_expr(text: &str) -> Result<Expr, ExprError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        at: 0,
    };
    let e = p.comp()?;
    if p.peek() != &Tok::End {
        return p.fail("trailing input");
    }
    Ok(e)
}

/// Bounds applied while evaluating, so that a short expression cannot demand a huge result.
#[derive(Clone, Copy, Debug)]
pub struct EvalLimits {
    pub max_degree: u64,
    pub max_conductor: u32,
}

impl Default for EvalLimits {
    fn default() -> Self {
        EvalLimits {
            max_degree: 64,
            max_conductor: 240,
        }
    }
}

fn scalar_of_digits(s: &str) -> CycloScalar {
    // Chunks of 18 digits fit in an i64.
    let base = CycloScalar::from_int(1_000_000_000_000_000_000);
    let head = s.len() % 18;
    let mut chunks: Vec<&str> = Vec::new();
    if head > 0 {
        chunks.push(&s[..head]);
    }
    chunks.extend((head..s.len()).step_by(18).map(|k| &s[k..k + 18]));
    chunks.iter().fold(CycloScalar::zero(), |acc, c| {
        &(&acc * &base) + &CycloScalar::from_int(c.parse().unwrap())
    })
}

fn squarefree_part(d: u64) -> Option<u64> {
    if d > 1_000_000_000_000 {
        return None;
    }
    let (mut d, mut out, mut p) = (d, 1u64, 2u64);
    while p * p <= d {
        let mut e = 0;
        while d % p == 0 {
            d /= p;
            e += 1;
        }
        if e % 2 == 1 {
            out *= p;
        }
        p += 1;
    }
    Some(out * d)
}

impl Expr {
    pub fn eval(&self, lim: &EvalLimits) -> Result<RatFunc, ExprError> {
        let check = |f: RatFunc| -> Result<RatFunc, ExprError> {
            if f.degree() > lim.max_degree {
                return Err(ExprError::Limit(format!(
                    "degree {} above {}",
                    f.degree(),
                    lim.max_degree
                )));
            }
            Ok(f)
        };
        let div_zero = |_| ExprError::Eval("division by zero".into());
        match self {
            Expr::Var => Ok(RatFunc::x()),
            Expr::Int(s) => Ok(RatFunc::constant(scalar_of_digits(s))),
            Expr::Neg(a) => Ok(a.eval(lim)?.scale(&CycloScalar::from_int(-1))),
            Expr::Add(a, b) => Ok(&a.eval(lim)? + &b.eval(lim)?),
            Expr::Sub(a, b) => Ok(&a.eval(lim)? - &b.eval(lim)?),
            Expr::Mul(a, b) => check(&a.eval(lim)? * &b.eval(lim)?),
            Expr::Div(a, b) => check(a.eval(lim)?.checked_div(&b.eval(lim)?).map_err(div_zero)?),
            Expr::Pow(a, k) => {
                let base = a.eval(lim)?;
                if base.degree().saturating_mul(k.unsigned_abs()) > lim.max_degree {
                    return Err(ExprError::Limit(format!(
                        "degree {} above {}",
                        base.degree().saturating_mul(k.unsigned_abs()),
                        lim.max_degree
                    )));
                }
                base.pow(*k).map_err(div_zero)
            }
            Expr::Compose(a, b) => {
                let (outer, inner) = (a.eval(lim)?, b.eval(lim)?);
                let d = outer.degree().saturating_mul(inner.degree().max(1));
                if d > lim.max_degree {
                    return Err(ExprError::Limit(format!(
                        "degree {d} above {}",
                        lim.max_degree
                    )));
                }
                Ok(outer.compose(&inner))
            }
            Expr::Call(c) => c.eval(lim),
        }
    }
}

impl Call {
    fn eval(&self, lim: &EvalLimits) -> Result<RatFunc, ExprError> {
        let degree_ok = |n: u32| {
            if n as u64 > lim.max_degree {
                Err(ExprError::Limit(format!(
                    "degree {n} above {}",
                    lim.max_degree
                )))
            } else {
                Ok(())
            }
        };
        match self {
            Call::I => Ok(RatFunc::constant(CycloScalar::i())),
            Call::Zeta(n) => {
                if *n == 0 {
                    return Err(ExprError::Eval("zeta(0) is undefined".into()));
                }
                if *n > lim.max_conductor {
                    return Err(ExprError::Limit(format!(
                        "conductor {n} above {}",
                        lim.max_conductor
                    )));
                }
                Ok(RatFunc::constant(CycloScalar::root_of_unity(*n, 1)))
            }
            Call::Sqrt(0) => Ok(RatFunc::constant(CycloScalar::zero())),
            Call::Sqrt(d) => {
                let sf = squarefree_part(d.unsigned_abs())
                    .ok_or_else(|| ExprError::Limit(format!("sqrt({d}) argument too large")))?;
                // Q(sqrt(m)) for squarefree m has conductor |m| when m = 1 mod 4, else 4|m|.
                let m = if *d < 0 { -(sf as i64) } else { sf as i64 };
                let conductor = if m.rem_euclid(4) == 1 { sf } else { 4 * sf };
                if conductor > lim.max_conductor as u64 {
                    return Err(ExprError::Limit(format!(
                        "sqrt({d}) needs conductor {conductor}, above {}",
                        lim.max_conductor
                    )));
                }
                Ok(RatFunc::constant(CycloScalar::sqrt_integer(*d)))
            }
            Call::E(n) => {
                degree_ok(*n)?;
                Ok(dickson_second(*n).into())
            }
            Call::D(n, alpha) => {
                degree_ok(*n)?;
                let a = match alpha {
                    None => CycloScalar::one(),
                    Some(e) => e.eval(lim)?.as_constant().ok_or_else(|| {
                        ExprError::Eval("the parameter of D must be a constant".into())
                    })?,
                };
                Ok(dickson(*n, &a).into())
            }
        }
    }
}

/// Parses and evaluates in one step.
pub fn eval_str(text: &str, lim: &EvalLimits) -> Result<RatFunc, ExprError> {
    parse_expr(text)?.eval(lim)
}

#[cfg(test)]
mod tests {
    use super::*;
    use laurent_ritt::LaurentPoly;

    fn ev(s: &str) -> RatFunc {
        eval_str(s, &EvalLimits::default()).unwrap()
    }

    #[test]
    fn parses_sum_and_quotient() {
        let e = parse_expr("x + 1/x").unwrap();
        assert_eq!(
            e,
            Expr::Add(
                Box::new(Expr::Var),
                Box::new(Expr::Div(
                    Box::new(Expr::Int("1".into())),
                    Box::new(Expr::Var)
                ))
            )
        );
    }

    #[test]
    fn composition_is_lowest_precedence() {
        let e = parse_expr("D(3) @ (x + 1/x)").unwrap();
        assert!(
            matches!(e, Expr::Compose(ref a, _) if matches!(**a, Expr::Call(Call::D(3, None))))
        );
        assert_eq!(ev("D(3) @ (x + 1/x)"), ev("x^3 + x^-3"));
        assert_eq!(ev("x^2 @ x + 1 @ x^3"), ev("(x^3 + 1)^2"));
    }

    #[test]
    fn scalar_calls() {
        let s = ev("zeta(8) + zeta(8)^-1");
        assert_eq!(&s * &s, ev("2"));
        assert_eq!(ev("sqrt(-1)"), ev("i"));
        assert_eq!(ev("sqrt(12)"), ev("2*sqrt(3)"));
        assert_eq!(ev("i^2"), ev("-1"));
        assert_eq!(ev("D(2, 3)"), ev("x^2 - 6"));
        assert_eq!(ev("E(2)"), ev("x^2 - 1"));
    }

    #[test]
    fn big_literals() {
        let a = ev("123456789012345678901234567890");
        let b = ev("123456789012345678 * 1000000000000 + 901234567890");
        assert_eq!(a, b);
    }

    #[test]
    fn whitespace_is_ignored() {
        assert_eq!(ev(" x^ -2+ 3 * x "), ev("x^-2+3*x"));
    }

    #[test]
    fn errors_carry_positions() {
        assert!(matches!(
            parse_expr("x +"),
            Err(ExprError::Parse { pos: 3, .. })
        ));
        assert!(matches!(
            parse_expr("x $ 1"),
            Err(ExprError::Parse { pos: 2, .. })
        ));
        assert!(matches!(
            parse_expr("y"),
            Err(ExprError::Parse { pos: 0, .. })
        ));
        assert!(matches!(parse_expr("(x"), Err(ExprError::Parse { .. })));
        assert!(matches!(
            parse_expr("x^x"),
            Err(ExprError::Parse { pos: 2, .. })
        ));
        assert!(matches!(
            parse_expr("D()"),
            Err(ExprError::Arity { got: 0, .. })
        ));
        assert!(matches!(
            parse_expr("E(2, 3)"),
            Err(ExprError::Arity { got: 2, .. })
        ));
        assert!(matches!(
            parse_expr("zeta(x)"),
            Err(ExprError::Parse { pos: 5, .. })
        ));
    }

    #[test]
    fn evaluation_errors() {
        let lim = EvalLimits::default();
        assert!(matches!(
            eval_str("1/(x - x)", &lim),
            Err(ExprError::Eval(_))
        ));
        assert!(matches!(eval_str("D(2, x)", &lim), Err(ExprError::Eval(_))));
        assert!(matches!(eval_str("x^65", &lim), Err(ExprError::Limit(_))));
        assert!(matches!(
            eval_str("x^9 @ x^9", &lim),
            Err(ExprError::Limit(_))
        ));
        assert!(matches!(
            eval_str("zeta(1000)", &lim),
            Err(ExprError::Limit(_))
        ));
    }

    #[test]
    fn printed_forms_parse_back() {
        let lim = EvalLimits::default();
        let samples = [
            "x^4 + x^-4",
            "(x^2/3 - 1)^3 @ (x^2 + 2*x + 1/x - 1/(4*x^2))",
            "-x^3 + 3/2*x - 7*x^-1",
            "(x + zeta(8)^3)^2 @ (x - sqrt(2)/x)",
            "(x^2 + 1)/(x - i)",
            "D(6, zeta(3))",
            "-zeta(5) * x^2 - zeta(12)^5",
        ];
        for s in samples {
            let f = ev(s);
            let back = eval_str(&f.to_string(), &lim).unwrap();
            assert_eq!(back, f, "{s} printed as {f}");
            if let Some(l) = f.as_laurent() {
                assert_eq!(
                    eval_str(&l.to_string(), &lim).unwrap(),
                    LaurentPoly::to_ratfunc(&l)
                );
            }
        }
    }
}
