//! Compilation of expression trees to flat slot programs with shared
//! subexpressions, evaluated many times per quadrature.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::C64;

use super::expr::{bump_eval, pow_value, Expr};

#[derive(Clone, Copy, Debug, PartialEq)]
enum Op {
    Const(C64),
    Z(u32),
    Zb(u32),
    NormSq,
    Neg(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    PowI(u32, i32),
    PowC(u32, C64),
    Exp(u32),
    Bump { r0: f64, r1: f64, order: u8, arg: u32 },
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Key {
    Const(u64, u64),
    Z(u32),
    Zb(u32),
    NormSq,
    Neg(u32),
    Add(u32, u32),
    Sub(u32, u32),
    Mul(u32, u32),
    Div(u32, u32),
    PowI(u32, i32),
    PowC(u32, u64, u64),
    Exp(u32),
    Bump(u64, u64, u8, u32),
}

impl Op {
    fn key(&self) -> Key {
        match *self {
            Op::Const(c) => Key::Const(c.re.to_bits(), c.im.to_bits()),
            Op::Z(k) => Key::Z(k),
            Op::Zb(k) => Key::Zb(k),
            Op::NormSq => Key::NormSq,
            Op::Neg(a) => Key::Neg(a),
            Op::Add(a, b) => Key::Add(a.min(b), a.max(b)),
            Op::Sub(a, b) => Key::Sub(a, b),
            Op::Mul(a, b) => Key::Mul(a.min(b), a.max(b)),
            Op::Div(a, b) => Key::Div(a, b),
            Op::PowI(a, e) => Key::PowI(a, e),
            Op::PowC(a, c) => Key::PowC(a, c.re.to_bits(), c.im.to_bits()),
            Op::Exp(a) => Key::Exp(a),
            Op::Bump { r0, r1, order, arg } => Key::Bump(r0.to_bits(), r1.to_bits(), order, arg),
        }
    }
}

/// A straight-line program computing several expressions at once.
#[derive(Clone, Debug, Default)]
pub struct Program {
    ops: Vec<Op>,
    outputs: Vec<u32>,
}

struct Builder {
    ops: Vec<Op>,
    seen: HashMap<Key, u32>,
}

impl Builder {
    fn push(&mut self, op: Op) -> u32 {
        let key = op.key();
        if let Some(&slot) = self.seen.get(&key) {
            return slot;
        }
        let slot = self.ops.len() as u32;
        self.ops.push(op);
        self.seen.insert(key, slot);
        slot
    }

    fn emit(&mut self, e: &Expr) -> u32 {
        let op = match e {
            Expr::Const(c) => Op::Const(*c),
            Expr::Z(k) => Op::Z(*k as u32),
            Expr::Zb(k) => Op::Zb(*k as u32),
            Expr::NormSq => Op::NormSq,
            Expr::Neg(a) => Op::Neg(self.emit(a)),
            Expr::Add(a, b) => Op::Add(self.emit(a), self.emit(b)),
            Expr::Sub(a, b) => Op::Sub(self.emit(a), self.emit(b)),
            Expr::Mul(a, b) => Op::Mul(self.emit(a), self.emit(b)),
            Expr::Div(a, b) => Op::Div(self.emit(a), self.emit(b)),
            Expr::Pow(a, c) => {
                let a = self.emit(a);
                if c.im == 0.0 && c.re.fract() == 0.0 && c.re.abs() < 1e9 {
                    Op::PowI(a, c.re as i32)
                } else {
                    Op::PowC(a, *c)
                }
            }
            Expr::Exp(a) => Op::Exp(self.emit(a)),
            Expr::Bump { r0, r1, order, arg } => Op::Bump {
                r0: *r0,
                r1: *r1,
                order: *order,
                arg: self.emit(arg),
            },
        };
        self.push(op)
    }
}

thread_local! {
    static SCRATCH: RefCell<Vec<C64>> = const { RefCell::new(Vec::new()) };
}

impl Program {
    pub fn compile(exprs: &[&Expr]) -> Program {
        let mut b = Builder {
            ops: Vec::new(),
            seen: HashMap::new(),
        };
        let outputs = exprs.iter().map(|e| b.emit(e)).collect();
        Program { ops: b.ops, outputs }
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.len()
    }

    pub fn num_ops(&self) -> usize {
        self.ops.len()
    }

    /// Evaluates every output at `z` into `out`.
    pub fn eval(&self, z: &[C64], out: &mut [C64]) {
        SCRATCH.with(|cell| match cell.try_borrow_mut() {
            Ok(mut buf) => self.eval_with(z, &mut buf, out),
            Err(_) => self.eval_with(z, &mut Vec::new(), out),
        })
    }

    fn eval_with(&self, z: &[C64], buf: &mut Vec<C64>, out: &mut [C64]) {
        buf.clear();
        buf.reserve(self.ops.len());
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => c,
                Op::Z(k) => z[k as usize],
                Op::Zb(k) => z[k as usize].conj(),
                Op::NormSq => C64::new(z.iter().map(|v| v.norm_sqr()).sum(), 0.0),
                Op::Neg(a) => -buf[a as usize],
                Op::Add(a, b) => buf[a as usize] + buf[b as usize],
                Op::Sub(a, b) => buf[a as usize] - buf[b as usize],
                Op::Mul(a, b) => buf[a as usize] * buf[b as usize],
                Op::Div(a, b) => buf[a as usize] / buf[b as usize],
                Op::PowI(a, e) => buf[a as usize].powi(e),
                Op::PowC(a, c) => pow_value(buf[a as usize], c),
                Op::Exp(a) => buf[a as usize].exp(),
                Op::Bump { r0, r1, order, arg } => C64::new(bump_eval(r0, r1, order, buf[arg as usize].re), 0.0),
            };
            buf.push(v);
        }
        for (o, &slot) in out.iter_mut().zip(&self.outputs) {
            *o = buf[slot as usize];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forms::expr::parse_expr;

    #[test]
    fn matches_tree_evaluation_and_shares_work() {
        let a = parse_expr("bump(0.2, 1) * z1 * zb2 + exp(-normsq)", 2).unwrap();
        let b = parse_expr("bump(0.2, 1) * (z1 * zb2 - 1)^2 / (2 + z1)", 2).unwrap();
        let prog = Program::compile(&[&a, &b]);
        let separate = Program::compile(&[&a]).num_ops() + Program::compile(&[&b]).num_ops();
        assert!(prog.num_ops() < separate);
        let z = [C64::new(0.3, 0.1), C64::new(-0.2, 0.4)];
        let mut out = [C64::new(0.0, 0.0); 2];
        prog.eval(&z, &mut out);
        assert!((out[0] - a.eval(&z)).norm() < 1e-15);
        assert!((out[1] - b.eval(&z)).norm() < 1e-15);
    }
}
