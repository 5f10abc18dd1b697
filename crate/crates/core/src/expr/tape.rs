//! Lowering of expression DAGs to a flat single-assignment instruction tape.
//!
//! Slots are laid out as `[inputs | constants | instruction results]`. Value
//! numbering over `(opcode, operand slots)` merges structurally equal
//! subtrees, so each distinct subexpression is computed once.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use super::node::{apply, Expr, Op};
use super::{CompileError, EvalError};

/// One named input slot of a tape.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Input {
    Var(String, u16),
    Param(String),
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Input::Var(n, i) => write!(f, "{n}[{i}]"),
            Input::Param(p) => write!(f, "{p}"),
        }
    }
}

/// Ordered list of tape inputs.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct InputLayout {
    inputs: Vec<Input>,
}

impl InputLayout {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `count` components of variable `name`.
    pub fn var(mut self, name: &str, count: u16) -> Self {
        for i in 0..count {
            self.inputs.push(Input::Var(name.to_string(), i));
        }
        self
    }

    pub fn param(mut self, name: &str) -> Self {
        self.inputs.push(Input::Param(name.to_string()));
        self
    }

    pub fn params<'a>(mut self, names: impl IntoIterator<Item = &'a str>) -> Self {
        for n in names {
            self = self.param(n);
        }
        self
    }

    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn inputs(&self) -> &[Input] {
        &self.inputs
    }

    fn position(&self, op: &Op) -> Option<usize> {
        self.inputs.iter().position(|inp| match (inp, op) {
            (Input::Var(n, i), Op::Var(m, j)) => **m == **n && i == j,
            (Input::Param(n), Op::Param(m)) => **m == **n,
            _ => false,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpCode {
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Ln,
    Exp,
    Pow(i32),
}

impl OpCode {
    fn from_op(op: &Op) -> Option<Self> {
        Some(match op {
            Op::Add => OpCode::Add,
            Op::Sub => OpCode::Sub,
            Op::Mul => OpCode::Mul,
            Op::Div => OpCode::Div,
            Op::Neg => OpCode::Neg,
            Op::Ln => OpCode::Ln,
            Op::Exp => OpCode::Exp,
            Op::Pow(n) => OpCode::Pow(*n),
            _ => return None,
        })
    }

    fn to_op(self) -> Op {
        match self {
            OpCode::Add => Op::Add,
            OpCode::Sub => Op::Sub,
            OpCode::Mul => Op::Mul,
            OpCode::Div => Op::Div,
            OpCode::Neg => Op::Neg,
            OpCode::Ln => Op::Ln,
            OpCode::Exp => Op::Exp,
            OpCode::Pow(n) => Op::Pow(n),
        }
    }

    fn is_binary(self) -> bool {
        matches!(self, OpCode::Add | OpCode::Sub | OpCode::Mul | OpCode::Div)
    }
}

impl fmt::Display for OpCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpCode::Pow(n) => write!(f, "pow{n}"),
            other => write!(f, "{}", other.to_op().name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Instr {
    pub op: OpCode,
    pub a: u32,
    pub b: u32,
    pub out: u32,
}

/// Compiled, immutable instruction tape.
#[derive(Clone, Debug)]
pub struct Kernel {
    layout: InputLayout,
    constants: Vec<f64>,
    instrs: Vec<Instr>,
    outputs: Vec<u32>,
    slot_count: usize,
}

#[derive(Hash, PartialEq, Eq)]
enum Key {
    Const(u64),
    Instr(OpCode, u32, u32),
}

/// Lowers `outputs` to a tape over `layout`, merging structurally equal subtrees.
pub fn compile_tape(outputs: &[Expr], layout: &InputLayout) -> Result<Kernel, CompileError> {
    let n_in = layout.len();
    let mut constants: Vec<f64> = Vec::new();
    let mut numbering: HashMap<Key, u32> = HashMap::new();
    // pending instructions carry slot ids relative to the computed block; constants
    // are placed after inputs once their count is known
    let mut pending: Vec<(OpCode, Slot, Slot)> = Vec::new();
    let mut slot_of: HashMap<usize, Slot> = HashMap::new();
    let mut keep_alive: Vec<Expr> = Vec::new();

    #[derive(Clone, Copy)]
    enum Slot {
        Input(u32),
        Const(u32),
        Computed(u32),
    }
    fn raw(s: Slot) -> (u8, u32) {
        match s {
            Slot::Input(i) => (0, i),
            Slot::Const(i) => (1, i),
            Slot::Computed(i) => (2, i),
        }
    }
    // value-numbering keys need a total order over slot kinds; encode kind in the high bits
    fn key_id(s: Slot) -> u32 {
        let (k, i) = raw(s);
        ((k as u32) << 30) | i
    }

    for root in outputs {
        for n in root.post_order() {
            if slot_of.contains_key(&n.id()) {
                continue;
            }
            let slot = match n.op() {
                Op::Const(v) => {
                    let key = Key::Const(v.to_bits());
                    let idx = *numbering.entry(key).or_insert_with(|| {
                        constants.push(*v);
                        (constants.len() - 1) as u32
                    });
                    Slot::Const(idx)
                }
                leaf @ (Op::Param(_) | Op::Var(..)) => match layout.position(leaf) {
                    Some(i) => Slot::Input(i as u32),
                    None => {
                        let name = match leaf {
                            Op::Param(p) => p.to_string(),
                            Op::Var(v, i) => format!("{v}[{i}]"),
                            _ => unreachable!(),
                        };
                        return Err(CompileError::UnboundLeaf(name));
                    }
                },
                op => {
                    let code = OpCode::from_op(op).expect("non-leaf");
                    let a = slot_of[&n.arg(0).id()];
                    let b = if code.is_binary() {
                        slot_of[&n.arg(1).id()]
                    } else {
                        a
                    };
                    let key = Key::Instr(code, key_id(a), if code.is_binary() { key_id(b) } else { 0 });
                    let idx = *numbering.entry(key).or_insert_with(|| {
                        pending.push((code, a, b));
                        (pending.len() - 1) as u32
                    });
                    Slot::Computed(idx)
                }
            };
            slot_of.insert(n.id(), slot);
            keep_alive.push(n);
        }
    }

    let n_const = constants.len();
    let resolve = |s: Slot| -> u32 {
        match s {
            Slot::Input(i) => i,
            Slot::Const(i) => (n_in as u32) + i,
            Slot::Computed(i) => (n_in + n_const) as u32 + i,
        }
    };
    let base = (n_in + n_const) as u32;
    let instrs = pending
        .iter()
        .enumerate()
        .map(|(k, &(op, a, b))| Instr {
            op,
            a: resolve(a),
            b: resolve(b),
            out: base + k as u32,
        })
        .collect::<Vec<_>>();
    let outs = outputs.iter().map(|o| resolve(slot_of[&o.id()])).collect();
    drop(keep_alive);
    Ok(Kernel {
        layout: layout.clone(),
        constants,
        slot_count: n_in + n_const + instrs.len(),
        instrs,
        outputs: outs,
    })
}

impl Kernel {
    pub fn layout(&self) -> &InputLayout {
        &self.layout
    }

    pub fn instructions(&self) -> &[Instr] {
        &self.instrs
    }

    pub fn output_count(&self) -> usize {
        self.outputs.len()
    }

    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    /// True if the tape contains a logarithm or a division.
    pub fn has_guarded_ops(&self) -> bool {
        self.instrs
            .iter()
            .any(|i| matches!(i.op, OpCode::Ln | OpCode::Div))
    }

    /// Allocates a scratch buffer sized for this tape, constants preloaded.
    pub fn scratch(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.slot_count];
        self.prepare(&mut s);
        s
    }

    fn prepare(&self, scratch: &mut [f64]) {
        let n_in = self.layout.len();
        scratch[n_in..n_in + self.constants.len()].copy_from_slice(&self.constants);
    }

    /// Runs the tape. `scratch` must come from [`Kernel::scratch`] (or be at least
    /// `slot_count` long with constants loaded).
    pub fn eval_into(
        &self,
        inputs: &[f64],
        scratch: &mut [f64],
        out: &mut [f64],
    ) -> Result<(), EvalError> {
        let n_in = self.layout.len();
        if inputs.len() != n_in {
            return Err(EvalError::InputCount {
                expected: n_in,
                got: inputs.len(),
            });
        }
        if scratch.len() < self.slot_count {
            return Err(EvalError::Scratch);
        }
        scratch[..n_in].copy_from_slice(inputs);
        for ins in &self.instrs {
            let a = scratch[ins.a as usize];
            let b = scratch[ins.b as usize];
            let v = match ins.op {
                OpCode::Add => a + b,
                OpCode::Sub => a - b,
                OpCode::Mul => a * b,
                op => apply(&op.to_op(), a, b)?,
            };
            scratch[ins.out as usize] = v;
        }
        for (o, &s) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[s as usize];
        }
        Ok(())
    }

    pub fn eval(&self, inputs: &[f64]) -> Result<Vec<f64>, EvalError> {
        let mut scratch = self.scratch();
        let mut out = vec![0.0; self.outputs.len()];
        self.eval_into(inputs, &mut scratch, &mut out)?;
        Ok(out)
    }

    /// Plain-text listing, one instruction per line: `slot_k = op slot_i slot_j`.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let n_in = self.layout.len();
        for (i, inp) in self.layout.inputs().iter().enumerate() {
            let _ = writeln!(s, "slot_{i} = input {inp}");
        }
        for (i, c) in self.constants.iter().enumerate() {
            let _ = writeln!(s, "slot_{} = const {c:?}", n_in + i);
        }
        for ins in &self.instrs {
            if ins.op.is_binary() {
                let _ = writeln!(s, "slot_{} = {} slot_{} slot_{}", ins.out, ins.op, ins.a, ins.b);
            } else {
                let _ = writeln!(s, "slot_{} = {} slot_{}", ins.out, ins.op, ins.a);
            }
        }
        for (k, o) in self.outputs.iter().enumerate() {
            let _ = writeln!(s, "out_{k} = slot_{o}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_sum_is_computed_once() {
        let x = Expr::var("x", 0);
        let y = Expr::var("y", 0);
        let z = Expr::var("z", 0);
        // build the sum twice so the nodes are distinct but structurally equal
        let s1 = &x + &y;
        let s2 = &x + &y;
        assert!(!s1.ptr_eq(&s2));
        let layout = InputLayout::new().var("x", 1).var("y", 1).var("z", 1);
        let k = compile_tape(&[s1, s2 * &z], &layout).unwrap();
        assert_eq!(k.instructions().len(), 2);
        assert_eq!(k.eval(&[1.0, 2.0, 4.0]).unwrap(), vec![3.0, 12.0]);
    }

    #[test]
    fn unbound_leaf_is_named() {
        let e = Expr::var("x", 0) * Expr::param("q");
        let err = compile_tape(&[e], &InputLayout::new().var("x", 1)).unwrap_err();
        assert!(err.to_string().contains('q'), "{err}");
    }

    #[test]
    fn dump_format() {
        let x = Expr::var("x", 0);
        let k = compile_tape(&[(&x * 2.0).ln()], &InputLayout::new().var("x", 1)).unwrap();
        let text = k.dump();
        assert!(text.contains("slot_2 = mul slot_0 slot_1"), "{text}");
        assert!(text.contains("slot_3 = ln slot_2"), "{text}");
        assert!(k.has_guarded_ops());
    }

    #[test]
    fn domain_errors_surface() {
        let x = Expr::var("x", 0);
        let k = compile_tape(&[x.ln()], &InputLayout::new().var("x", 1)).unwrap();
        assert!(k.eval(&[-1.0]).is_err());
        assert!(k.eval(&[1.0, 2.0]).is_err());
    }
}
