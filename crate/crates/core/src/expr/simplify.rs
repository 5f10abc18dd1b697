//! Rule-based constructors and the bottom-up `simplify` pass.
//!
//! Every rule here is exact in IEEE double arithmetic wherever both sides are
//! defined: constant folding evaluates the same operation the tape would, and
//! the identity rules (`x + 0`, `x * 1`, `x * 0`, `x^1`, ...) never reassociate.

use std::collections::HashMap;
use std::ops;

use super::node::{apply, Expr, Op};

fn fold(op: Op, args: &[Expr]) -> Option<Expr> {
    let a = args.first()?.as_const()?;
    let b = match args.get(1) {
        Some(e) => e.as_const()?,
        None => 0.0,
    };
    // undefined constant operations (ln of a negative, x/0) stay symbolic
    apply(&op, a, b).ok().map(Expr::constant)
}

pub fn add(a: Expr, b: Expr) -> Expr {
    if let Some(c) = fold(Op::Add, &[a.clone(), b.clone()]) {
        return c;
    }
    if a.is_const(0.0) {
        return b;
    }
    if b.is_const(0.0) {
        return a;
    }
    Expr::node(Op::Add, vec![a, b])
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    if let Some(c) = fold(Op::Sub, &[a.clone(), b.clone()]) {
        return c;
    }
    if b.is_const(0.0) {
        return a;
    }
    if a.is_const(0.0) {
        return neg(b);
    }
    Expr::node(Op::Sub, vec![a, b])
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    if let Some(c) = fold(Op::Mul, &[a.clone(), b.clone()]) {
        return c;
    }
    if a.is_const(0.0) || b.is_const(0.0) {
        return Expr::zero();
    }
    if a.is_const(1.0) {
        return b;
    }
    if b.is_const(1.0) {
        return a;
    }
    if a.is_const(-1.0) {
        return neg(b);
    }
    if b.is_const(-1.0) {
        return neg(a);
    }
    Expr::node(Op::Mul, vec![a, b])
}

pub fn div(a: Expr, b: Expr) -> Expr {
    if let Some(c) = fold(Op::Div, &[a.clone(), b.clone()]) {
        return c;
    }
    if b.is_const(1.0) {
        return a;
    }
    if a.is_const(0.0) && !b.is_const(0.0) {
        return Expr::zero();
    }
    Expr::node(Op::Div, vec![a, b])
}

pub fn neg(a: Expr) -> Expr {
    if let Some(c) = fold(Op::Neg, &[a.clone()]) {
        return c;
    }
    if let Op::Neg = a.op() {
        return a.arg(0).clone();
    }
    Expr::node(Op::Neg, vec![a])
}

pub fn ln(a: Expr) -> Expr {
    if let Some(c) = fold(Op::Ln, &[a.clone()]) {
        return c;
    }
    Expr::node(Op::Ln, vec![a])
}

pub fn exp(a: Expr) -> Expr {
    if let Some(c) = fold(Op::Exp, &[a.clone()]) {
        return c;
    }
    Expr::node(Op::Exp, vec![a])
}

pub fn powi(a: Expr, n: i32) -> Expr {
    if n == 0 {
        return Expr::one();
    }
    if n == 1 {
        return a;
    }
    if let Some(c) = fold(Op::Pow(n), &[a.clone()]) {
        return c;
    }
    Expr::node(Op::Pow(n), vec![a])
}

/// Rebuilds `e` through the rule-based constructors above.
pub fn simplify(e: &Expr) -> Expr {
    let mut memo: HashMap<usize, Expr> = HashMap::new();
    for n in e.post_order() {
        let args: Vec<Expr> = n.args().iter().map(|a| memo[&a.id()].clone()).collect();
        let s = rebuild(n.op(), args).unwrap_or_else(|| n.clone());
        memo.insert(n.id(), s);
    }
    memo.remove(&e.id()).expect("root visited")
}

/// Applies the constructor for `op`; `None` for leaves.
pub(crate) fn rebuild(op: &Op, mut args: Vec<Expr>) -> Option<Expr> {
    let mut take = || args.remove(0);
    Some(match op {
        Op::Const(_) | Op::Param(_) | Op::Var(..) => return None,
        Op::Add => {
            let a = take();
            add(a, take())
        }
        Op::Sub => {
            let a = take();
            sub(a, take())
        }
        Op::Mul => {
            let a = take();
            mul(a, take())
        }
        Op::Div => {
            let a = take();
            div(a, take())
        }
        Op::Neg => neg(take()),
        Op::Ln => ln(take()),
        Op::Exp => exp(take()),
        Op::Pow(n) => powi(take(), *n),
    })
}

/// Real power `a^p` lowered to `exp(p * ln a)`; integer exponents stay polynomial.
pub fn powf(a: Expr, p: f64) -> Expr {
    if p.fract() == 0.0 && p.abs() < i32::MAX as f64 {
        return powi(a, p as i32);
    }
    exp(mul(Expr::constant(p), ln(a)))
}

macro_rules! binop {
    ($tr:ident, $method:ident, $f:ident) => {
        impl ops::$tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(self, rhs)
            }
        }
        impl ops::$tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(self.clone(), rhs.clone())
            }
        }
        impl ops::$tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(self, rhs.clone())
            }
        }
        impl ops::$tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(self.clone(), rhs)
            }
        }
        impl ops::$tr<f64> for Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $f(self, Expr::constant(rhs))
            }
        }
        impl ops::$tr<f64> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: f64) -> Expr {
                $f(self.clone(), Expr::constant(rhs))
            }
        }
        impl ops::$tr<Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $f(Expr::constant(self), rhs)
            }
        }
        impl ops::$tr<&Expr> for f64 {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $f(Expr::constant(self), rhs.clone())
            }
        }
    };
}

binop!(Add, add, add);
binop!(Sub, sub, sub);
binop!(Mul, mul, mul);
binop!(Div, div, div);

impl ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self)
    }
}

impl ops::Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(self.clone())
    }
}

impl Expr {
    pub fn ln(&self) -> Expr {
        ln(self.clone())
    }

    pub fn exp(&self) -> Expr {
        exp(self.clone())
    }

    pub fn powi(&self, n: i32) -> Expr {
        powi(self.clone(), n)
    }

    pub fn powf(&self, p: f64) -> Expr {
        powf(self.clone(), p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Env;

    #[test]
    fn identity_rules_collapse() {
        let x = Expr::var("x", 0);
        let raw = Expr::node(
            Op::Add,
            vec![
                Expr::node(Op::Mul, vec![x.clone(), Expr::one()]),
                Expr::zero(),
            ],
        );
        assert_eq!(simplify(&raw), x);
    }

    #[test]
    fn constants_fold() {
        let raw = Expr::node(Op::Mul, vec![Expr::constant(2.0), Expr::constant(3.0)]);
        let s = simplify(&raw);
        assert_eq!(s.as_const(), Some(6.0));
    }

    #[test]
    fn no_all_constant_nodes_after_simplify() {
        let x = Expr::var("x", 0);
        let raw = Expr::node(
            Op::Add,
            vec![
                Expr::node(Op::Exp, vec![Expr::node(Op::Neg, vec![Expr::constant(1.5)])]),
                Expr::node(Op::Pow(1), vec![x.clone()]),
            ],
        );
        let s = simplify(&raw);
        for n in s.post_order() {
            if !n.op().is_leaf() {
                assert!(n.args().iter().any(|a| a.as_const().is_none()), "{n}");
            }
        }
        let env = Env::new().with_var("x", &[0.25]);
        assert_eq!(s.eval(&env).unwrap(), raw.eval(&env).unwrap());
    }

    #[test]
    fn ln_of_negative_constant_stays_symbolic() {
        let e = ln(Expr::constant(-1.0));
        assert!(e.as_const().is_none());
        assert!(e.eval(&Env::new()).is_err());
    }

    #[test]
    fn double_negation_cancels() {
        let x = Expr::param("a");
        assert_eq!(-(-x.clone()), x);
    }
}
