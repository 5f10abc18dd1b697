use std::collections::HashMap;

use super::node::{Expr, Op};
use super::simplify::{add, div, mul, neg, powi, sub};

/// Identifies a differentiation variable: component `index` of variable `name`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VarRef {
    pub name: String,
    pub index: u16,
}

impl VarRef {
    pub fn new(name: &str, index: u16) -> Self {
        Self {
            name: name.to_string(),
            index,
        }
    }

    pub fn matches(&self, op: &Op) -> bool {
        matches!(op, Op::Var(n, i) if **n == *self.name && *i == self.index)
    }

    pub fn leaf(&self) -> Expr {
        Expr::var(&self.name, self.index)
    }
}

/// Symbolic differentiation with respect to one variable leaf.
///
/// Results are memoized per source node, so repeated calls over expressions
/// that share subgraphs (every `P_ij` shares most of `psi`) reuse derivative
/// nodes and the resulting DAG stays compact.
pub struct Differentiator {
    var: VarRef,
    // source node kept alive next to its derivative so ids stay unique
    memo: HashMap<usize, (Expr, Expr)>,
}

impl Differentiator {
    pub fn new(var: VarRef) -> Self {
        Self {
            var,
            memo: HashMap::new(),
        }
    }

    pub fn var(&self) -> &VarRef {
        &self.var
    }

    pub fn diff(&mut self, e: &Expr) -> Expr {
        for n in e.post_order() {
            if self.memo.contains_key(&n.id()) {
                continue;
            }
            let d = self.rule(&n);
            self.memo.insert(n.id(), (n, d));
        }
        self.memo[&e.id()].1.clone()
    }

    fn d(&self, e: &Expr) -> Expr {
        self.memo[&e.id()].1.clone()
    }

    fn rule(&self, e: &Expr) -> Expr {
        match e.op() {
            Op::Const(_) | Op::Param(_) => Expr::zero(),
            op @ Op::Var(..) => {
                if self.var.matches(op) {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Op::Add => add(self.d(e.arg(0)), self.d(e.arg(1))),
            Op::Sub => sub(self.d(e.arg(0)), self.d(e.arg(1))),
            Op::Mul => {
                let (a, b) = (e.arg(0), e.arg(1));
                add(mul(self.d(a), b.clone()), mul(a.clone(), self.d(b)))
            }
            Op::Div => {
                // d(a/b) = (da - (a/b) db) / b
                let b = e.arg(1);
                let db = self.d(b);
                let num = sub(self.d(e.arg(0)), mul(e.clone(), db));
                div(num, b.clone())
            }
            Op::Neg => neg(self.d(e.arg(0))),
            Op::Ln => div(self.d(e.arg(0)), e.arg(0).clone()),
            Op::Exp => mul(e.clone(), self.d(e.arg(0))),
            Op::Pow(n) => {
                let a = e.arg(0);
                let da = self.d(a);
                if da.is_const(0.0) {
                    return Expr::zero();
                }
                mul(mul(Expr::constant(*n as f64), powi(a.clone(), n - 1)), da)
            }
        }
    }
}

/// Exact partial derivative of `e` with respect to `v`.
pub fn differentiate(e: &Expr, v: &VarRef) -> Expr {
    Differentiator::new(v.clone()).diff(e)
}

/// Partial derivatives of each expression in `exprs` with respect to each of `vars`,
/// returned as `result[i][j] = d exprs[i] / d vars[j]`.
pub fn jacobian(exprs: &[Expr], vars: &[VarRef]) -> Vec<Vec<Expr>> {
    let mut ds: Vec<Differentiator> = vars.iter().cloned().map(Differentiator::new).collect();
    exprs
        .iter()
        .map(|e| ds.iter_mut().map(|d| d.diff(e)).collect())
        .collect()
}

/// Replaces variable leaves according to `map`, rebuilding through the rule constructors.
pub fn substitute(e: &Expr, map: &HashMap<VarRef, Expr>) -> Expr {
    let mut memo: HashMap<usize, Expr> = HashMap::new();
    for n in e.post_order() {
        let out = match n.op() {
            Op::Var(name, i) => map
                .get(&VarRef::new(name, *i))
                .cloned()
                .unwrap_or_else(|| n.clone()),
            Op::Const(_) | Op::Param(_) => n.clone(),
            op => {
                let args: Vec<Expr> = n.args().iter().map(|a| memo[&a.id()].clone()).collect();
                super::simplify::rebuild(op, args).expect("non-leaf")
            }
        };
        memo.insert(n.id(), out);
    }
    memo.remove(&e.id()).expect("root visited")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::simplify::simplify;
    use crate::expr::Env;

    #[test]
    fn product_rule_base_case() {
        let x = Expr::var("x", 0);
        let y = Expr::var("y", 0);
        let d = differentiate(&(&x * &y), &VarRef::new("x", 0));
        assert_eq!(d, y);
    }

    #[test]
    fn absent_variable_gives_zero() {
        let x = Expr::var("x", 0);
        let e = x.exp() * 3.0;
        assert!(differentiate(&e, &VarRef::new("z", 0)).is_const(0.0));
    }

    #[test]
    fn linear_in_constant_combinations() {
        let x = Expr::var("x", 0);
        let y = Expr::var("x", 1);
        let e1 = (&x * &y).ln();
        let e2 = (x.powi(3) - &y).exp();
        let (a, b) = (Expr::constant(2.5), Expr::constant(-0.75));
        let v = VarRef::new("x", 0);
        let lhs = simplify(&differentiate(&(&a * &e1 + &b * &e2), &v));
        let mut d = Differentiator::new(v);
        let rhs = simplify(&(&a * d.diff(&e1) + &b * d.diff(&e2)));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn quotient_and_log_rules_match_finite_differences() {
        let x = Expr::var("x", 0);
        let e = (x.powi(2) + 1.0).ln() / (x.exp() + &x);
        let d = differentiate(&e, &VarRef::new("x", 0));
        let f = |t: f64| e.eval(&Env::new().with_var("x", &[t])).unwrap();
        let h = 1e-6;
        let x0 = 0.7;
        let fd = (f(x0 + h) - f(x0 - h)) / (2.0 * h);
        let an = d.eval(&Env::new().with_var("x", &[x0])).unwrap();
        assert!((fd - an).abs() < 1e-8, "{fd} vs {an}");
    }

    #[test]
    fn substitute_replaces_leaves() {
        let x = Expr::var("x", 0);
        let e = &x * &x + 1.0;
        let mut map = HashMap::new();
        map.insert(VarRef::new("x", 0), Expr::var("t", 0) * 2.0);
        let s = substitute(&e, &map);
        let v = s.eval(&Env::new().with_var("t", &[3.0])).unwrap();
        assert_eq!(v, 37.0);
    }
}
