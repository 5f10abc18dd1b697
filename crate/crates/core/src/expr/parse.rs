//! Minimal infix parser for strain-energy expressions.
//!
//! Grammar (usual precedence, `^` right-associative):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?
//! atom    := number | ident | ident '(' expr (',' expr)* ')' | '(' expr ')'
//! ```
//!
//! Values are scalars or matrices. `*` is scalar product, scaling, or matrix
//! product depending on operand shapes. Functions: `ln exp tr det inv
//! transpose dot inner`.

use std::collections::HashMap;

use super::node::Expr;
use super::tensor::TensorExpr;
use super::ParseError;

#[derive(Clone, Debug)]
pub enum Value {
    Scalar(Expr),
    Tensor(TensorExpr),
}

impl Value {
    pub fn into_scalar(self) -> Result<Expr, ParseError> {
        match self {
            Value::Scalar(e) => Ok(e),
            Value::Tensor(t) if t.rows() == 1 && t.cols() == 1 => {
                Ok(t.into_entries().pop().expect("1x1"))
            }
            Value::Tensor(t) => Err(ParseError::Type(format!(
                "expected a scalar, found a {} tensor",
                t.shape()
            ))),
        }
    }
}

/// Symbols visible to the parser.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    symbols: HashMap<String, Value>,
}

impl Scope {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: &str, v: Value) {
        self.symbols.insert(name.to_string(), v);
    }

    pub fn with(mut self, name: &str, v: Value) -> Self {
        self.insert(name, v);
        self
    }

    pub fn get(&self, name: &str) -> Option<&Value> {
        self.symbols.get(name)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(src: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
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
            let v = text
                .parse::<f64>()
                .map_err(|_| ParseError::Syntax { pos: start, msg: format!("bad number '{text}'") })?;
            out.push((start, Tok::Num(v)));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((start, Tok::Ident(chars[start..i].iter().collect())));
        } else if c == '*' && chars.get(i + 1) == Some(&'*') {
            out.push((i, Tok::Sym('^')));
            i += 2;
        } else if "+-*/^(),".contains(c) {
            out.push((i, Tok::Sym(c)));
            i += 1;
        } else {
            return Err(ParseError::Syntax {
                pos: i,
                msg: format!("unexpected character '{c}'"),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    scope: &'a Scope,
    end: usize,
}

/// Parses `src` against `scope`.
pub fn parse(src: &str, scope: &Scope) -> Result<Value, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser {
        toks,
        pos: 0,
        scope,
        end: src.len(),
    };
    let v = p.expr()?;
    if let Some((at, t)) = p.toks.get(p.pos) {
        return Err(ParseError::Syntax {
            pos: *at,
            msg: format!("unexpected trailing token {t:?}"),
        });
    }
    Ok(v)
}

/// Parses a scalar-valued expression.
pub fn parse_scalar(src: &str, scope: &Scope) -> Result<Expr, ParseError> {
    parse(src, scope)?.into_scalar()
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(ParseError::Syntax {
                pos: self.here(),
                msg: format!("expected '{c}'"),
            })
        }
    }

    fn expr(&mut self) -> Result<Value, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                let rhs = self.term()?;
                lhs = add_values(lhs, rhs, false)?;
            } else if self.eat('-') {
                let rhs = self.term()?;
                lhs = add_values(lhs, rhs, true)?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Value, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                let rhs = self.unary()?;
                lhs = mul_values(lhs, rhs)?;
            } else if self.eat('/') {
                let rhs = self.unary()?.into_scalar()?;
                lhs = match lhs {
                    Value::Scalar(a) => Value::Scalar(a / rhs),
                    Value::Tensor(t) => Value::Tensor(t.map(|e| e / &rhs)),
                };
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Value, ParseError> {
        if self.eat('-') {
            return Ok(match self.unary()? {
                Value::Scalar(e) => Value::Scalar(-e),
                Value::Tensor(t) => Value::Tensor(t.neg()),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Value, ParseError> {
        let base = self.atom()?;
        if self.eat('^') {
            let at = self.here();
            let exp = self.unary()?.into_scalar()?;
            let p = exp.as_const().ok_or(ParseError::Syntax {
                pos: at,
                msg: "exponent must be a numeric constant".into(),
            })?;
            return Ok(Value::Scalar(base.into_scalar()?.powf(p)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Value, ParseError> {
        let at = self.here();
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(Value::Scalar(Expr::constant(v)))
            }
            Some(Tok::Sym('(')) => {
                self.pos += 1;
                let v = self.expr()?;
                self.expect(')')?;
                Ok(v)
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                if self.eat('(') {
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    call(&name, args, at)
                } else {
                    self.scope
                        .get(&name)
                        .cloned()
                        .ok_or(ParseError::UnknownSymbol(name))
                }
            }
            _ => Err(ParseError::Syntax {
                pos: at,
                msg: "expected a value".into(),
            }),
        }
    }
}

fn tensor(v: Value, what: &str) -> Result<TensorExpr, ParseError> {
    match v {
        Value::Tensor(t) => Ok(t),
        Value::Scalar(_) => Err(ParseError::Type(format!("{what} expects a tensor argument"))),
    }
}

fn call(name: &str, mut args: Vec<Value>, pos: usize) -> Result<Value, ParseError> {
    let arity = match name {
        "ln" | "exp" | "tr" | "det" | "inv" | "transpose" => 1,
        "dot" | "inner" => 2,
        _ => return Err(ParseError::UnknownFunction(name.to_string())),
    };
    if args.len() != arity {
        return Err(ParseError::Syntax {
            pos,
            msg: format!("{name} takes {arity} argument(s), got {}", args.len()),
        });
    }
    let b = if arity == 2 { args.pop() } else { None };
    let a = args.pop().expect("arity checked");
    Ok(match name {
        "ln" => Value::Scalar(a.into_scalar()?.ln()),
        "exp" => Value::Scalar(a.into_scalar()?.exp()),
        "tr" => Value::Scalar(tensor(a, name)?.trace()?),
        "det" => Value::Scalar(tensor(a, name)?.det3()?),
        "inv" => Value::Tensor(tensor(a, name)?.inv3()?),
        "transpose" => Value::Tensor(tensor(a, name)?.transpose()),
        "dot" => {
            let (a, b) = (tensor(a, name)?, tensor(b.expect("arity"), name)?);
            if a.cols() == 1 && b.cols() == 1 && a.rows() == b.rows() {
                Value::Scalar(a.transpose().matmul(&b)?.as_scalar()?.clone())
            } else {
                let m = a.matmul(&b)?;
                if m.rows() == 1 && m.cols() == 1 {
                    Value::Scalar(m.as_scalar()?.clone())
                } else {
                    Value::Tensor(m)
                }
            }
        }
        "inner" => Value::Scalar(tensor(a, name)?.ddot(&tensor(b.expect("arity"), name)?)?),
        _ => unreachable!(),
    })
}

fn add_values(a: Value, b: Value, subtract: bool) -> Result<Value, ParseError> {
    Ok(match (a, b) {
        (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(if subtract { a - b } else { a + b }),
        (Value::Tensor(a), Value::Tensor(b)) => Value::Tensor(if subtract { a.sub(&b)? } else { a.add(&b)? }),
        _ => return Err(ParseError::Type("cannot add a scalar and a tensor".into())),
    })
}

fn mul_values(a: Value, b: Value) -> Result<Value, ParseError> {
    Ok(match (a, b) {
        (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a * b),
        (Value::Scalar(s), Value::Tensor(t)) | (Value::Tensor(t), Value::Scalar(s)) => Value::Tensor(t.scale(&s)),
        (Value::Tensor(a), Value::Tensor(b)) => {
            let m = a.matmul(&b)?;
            if m.rows() == 1 && m.cols() == 1 {
                Value::Scalar(m.as_scalar()?.clone())
            } else {
                Value::Tensor(m)
            }
        }
    })
}
