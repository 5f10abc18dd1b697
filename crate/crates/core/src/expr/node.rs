use std::collections::HashMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use super::EvalError;

/// Operation carried by an expression node.
#[derive(Clone, Debug)]
pub enum Op {
    Const(f64),
    /// Named material or model parameter, bound at evaluation time.
    Param(Arc<str>),
    /// Component `index` of a named variable (for example `F`, 0..9 row-major).
    Var(Arc<str>, u16),
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Ln,
    Exp,
    /// Integer power.
    Pow(i32),
}

impl Op {
    pub fn arity(&self) -> usize {
        match self {
            Op::Const(_) | Op::Param(_) | Op::Var(..) => 0,
            Op::Neg | Op::Ln | Op::Exp | Op::Pow(_) => 1,
            Op::Add | Op::Sub | Op::Mul | Op::Div => 2,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.arity() == 0
    }

    pub fn name(&self) -> &'static str {
        match self {
            Op::Const(_) => "const",
            Op::Param(_) => "param",
            Op::Var(..) => "var",
            Op::Add => "add",
            Op::Sub => "sub",
            Op::Mul => "mul",
            Op::Div => "div",
            Op::Neg => "neg",
            Op::Ln => "ln",
            Op::Exp => "exp",
            Op::Pow(_) => "pow",
        }
    }
}

impl PartialEq for Op {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Op::Const(a), Op::Const(b)) => a.to_bits() == b.to_bits(),
            (Op::Param(a), Op::Param(b)) => a == b,
            (Op::Var(a, i), Op::Var(b, j)) => a == b && i == j,
            (Op::Pow(a), Op::Pow(b)) => a == b,
            (a, b) => std::mem::discriminant(a) == std::mem::discriminant(b),
        }
    }
}

impl Eq for Op {}

impl Hash for Op {
    fn hash<H: Hasher>(&self, state: &mut H) {
        std::mem::discriminant(self).hash(state);
        match self {
            Op::Const(v) => v.to_bits().hash(state),
            Op::Param(p) => p.hash(state),
            Op::Var(n, i) => {
                n.hash(state);
                i.hash(state);
            }
            Op::Pow(n) => n.hash(state),
            _ => {}
        }
    }
}

#[derive(Debug)]
pub struct Node {
    op: Op,
    args: Vec<Expr>,
    hash: u64,
}

/// Handle to an immutable node of a scalar expression DAG.
///
/// Cloning is cheap; subexpressions are shared between parents. Equality is
/// structural, with a pointer fast path.
#[derive(Clone)]
pub struct Expr(Arc<Node>);

impl Expr {
    /// Builds a node without applying any simplification rule.
    ///
    /// # Panics
    /// Panics if `args.len()` does not match the arity of `op`.
    pub fn node(op: Op, args: Vec<Expr>) -> Expr {
        assert_eq!(op.arity(), args.len(), "wrong arity for {}", op.name());
        let mut h = std::collections::hash_map::DefaultHasher::new();
        op.hash(&mut h);
        for a in &args {
            a.0.hash.hash(&mut h);
        }
        Expr(Arc::new(Node {
            op,
            args,
            hash: h.finish(),
        }))
    }

    pub fn constant(v: f64) -> Expr {
        Expr::node(Op::Const(v), Vec::new())
    }

    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }

    pub fn one() -> Expr {
        Expr::constant(1.0)
    }

    pub fn param(name: &str) -> Expr {
        Expr::node(Op::Param(name.into()), Vec::new())
    }

    pub fn var(name: &str, index: u16) -> Expr {
        Expr::node(Op::Var(name.into(), index), Vec::new())
    }

    pub fn op(&self) -> &Op {
        &self.0.op
    }

    pub fn args(&self) -> &[Expr] {
        &self.0.args
    }

    pub fn arg(&self, i: usize) -> &Expr {
        &self.0.args[i]
    }

    pub fn structural_hash(&self) -> u64 {
        self.0.hash
    }

    /// Address of the shared node, usable as a memoization key while `self` is alive.
    pub fn id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn ptr_eq(&self, other: &Expr) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self.0.op {
            Op::Const(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_const(&self, v: f64) -> bool {
        self.as_const() == Some(v)
    }

    /// Visits every distinct node once, children before parents.
    pub fn post_order(&self) -> Vec<Expr> {
        let mut seen = std::collections::HashSet::new();
        let mut out = Vec::new();
        // explicit stack: (node, children_pushed)
        let mut stack = vec![(self.clone(), false)];
        while let Some((e, expanded)) = stack.pop() {
            if expanded {
                out.push(e);
                continue;
            }
            if !seen.insert(e.id()) {
                continue;
            }
            stack.push((e.clone(), true));
            for a in e.args().iter().rev() {
                if !seen.contains(&a.id()) {
                    stack.push((a.clone(), false));
                }
            }
        }
        out
    }

    /// Number of distinct nodes reachable from this one.
    pub fn dag_size(&self) -> usize {
        self.post_order().len()
    }

    /// Collects every `Param` and `Var` leaf, deduplicated, in first-seen order.
    pub fn leaves(&self) -> Vec<Op> {
        let mut out: Vec<Op> = Vec::new();
        for e in self.post_order() {
            match e.op() {
                Op::Param(_) | Op::Var(..) if !out.contains(e.op()) => out.push(e.op().clone()),
                _ => {}
            }
        }
        out
    }

    /// Recursive evaluation with memoization on shared nodes.
    ///
    /// This is the reference semantics that compiled tapes must reproduce bitwise.
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        let mut memo: HashMap<usize, f64> = HashMap::new();
        self.eval_memo(env, &mut memo)
    }

    pub fn eval_memo(&self, env: &Env, memo: &mut HashMap<usize, f64>) -> Result<f64, EvalError> {
        if let Some(v) = memo.get(&self.id()) {
            return Ok(*v);
        }
        let v = match self.op() {
            Op::Const(c) => *c,
            Op::Param(name) => env.param(name)?,
            Op::Var(name, i) => env.var(name, *i)?,
            op => {
                let a = self.arg(0).eval_memo(env, memo)?;
                let b = if op.arity() == 2 {
                    self.arg(1).eval_memo(env, memo)?
                } else {
                    0.0
                };
                apply(op, a, b)?
            }
        };
        memo.insert(self.id(), v);
        Ok(v)
    }
}

/// Applies a non-leaf operation. Shared by DAG evaluation and tape execution.
#[inline]
pub(crate) fn apply(op: &Op, a: f64, b: f64) -> Result<f64, EvalError> {
    Ok(match op {
        Op::Add => a + b,
        Op::Sub => a - b,
        Op::Mul => a * b,
        Op::Div => {
            if b == 0.0 {
                return Err(EvalError::Domain("division by zero"));
            }
            a / b
        }
        Op::Neg => -a,
        Op::Ln => {
            if !(a > 0.0) {
                return Err(EvalError::Domain("logarithm of non-positive value"));
            }
            a.ln()
        }
        Op::Exp => a.exp(),
        Op::Pow(n) => int_pow(a, *n),
        Op::Const(_) | Op::Param(_) | Op::Var(..) => unreachable!("leaf op applied"),
    })
}

/// Integer power by binary exponentiation; used identically everywhere so results agree bitwise.
#[inline]
pub fn int_pow(x: f64, n: i32) -> f64 {
    let mut base = x;
    let mut e = n.unsigned_abs();
    let mut acc = 1.0;
    while e > 0 {
        if e & 1 == 1 {
            acc *= base;
        }
        base *= base;
        e >>= 1;
    }
    if n < 0 {
        1.0 / acc
    } else {
        acc
    }
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        if self.ptr_eq(other) {
            return true;
        }
        self.0.hash == other.0.hash
            && self.0.op == other.0.op
            && self.0.args.iter().zip(&other.0.args).all(|(a, b)| a == b)
    }
}

impl Eq for Expr {}

impl Hash for Expr {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.0.hash.hash(state);
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.op() {
            Op::Const(v) => write!(f, "{v}"),
            Op::Param(p) => write!(f, "{p}"),
            Op::Var(n, i) => write!(f, "{n}[{i}]"),
            Op::Add => write!(f, "({} + {})", self.arg(0), self.arg(1)),
            Op::Sub => write!(f, "({} - {})", self.arg(0), self.arg(1)),
            Op::Mul => write!(f, "({} * {})", self.arg(0), self.arg(1)),
            Op::Div => write!(f, "({} / {})", self.arg(0), self.arg(1)),
            Op::Neg => write!(f, "-{}", self.arg(0)),
            Op::Ln => write!(f, "ln({})", self.arg(0)),
            Op::Exp => write!(f, "exp({})", self.arg(0)),
            Op::Pow(n) => write!(f, "{}^{n}", self.arg(0)),
        }
    }
}

/// Bindings for leaves during reference evaluation.
#[derive(Clone, Debug, Default)]
pub struct Env {
    params: HashMap<String, f64>,
    vars: HashMap<String, Vec<f64>>,
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.insert(name.to_string(), value);
        self
    }

    pub fn with_var(mut self, name: &str, values: &[f64]) -> Self {
        self.vars.insert(name.to_string(), values.to_vec());
        self
    }

    pub fn set_param(&mut self, name: &str, value: f64) {
        self.params.insert(name.to_string(), value);
    }

    pub fn set_var(&mut self, name: &str, values: &[f64]) {
        self.vars.insert(name.to_string(), values.to_vec());
    }

    fn param(&self, name: &str) -> Result<f64, EvalError> {
        self.params
            .get(name)
            .copied()
            .ok_or_else(|| EvalError::Unbound(name.to_string()))
    }

    fn var(&self, name: &str, i: u16) -> Result<f64, EvalError> {
        self.vars
            .get(name)
            .and_then(|v| v.get(i as usize))
            .copied()
            .ok_or_else(|| EvalError::Unbound(format!("{name}[{i}]")))
    }
}
