// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use num_traits::ToPrimitive;

use crate::sygus::{mask, Builtin, BvConst, Literal, Sort};

/// A concrete value. Integers are machine integers; arithmetic that leaves
/// the `i64` range has no value (see [`apply`]).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Bool(bool),
    Int(i64),
    BitVec(BvConst),
}

impl Value {
    pub fn bv(width: u32, bits: u64) -> Value {
        Value::BitVec(BvConst::new(width, bits))
    }

    pub fn sort(self) -> Sort {
        match self {
            Value::Bool(_) => Sort::Bool,
            Value::Int(_) => Sort::Int,
            Value::BitVec(c) => Sort::BitVec(c.width()),
        }
    }

    /// `None` for integers outside the `i64` range.
    pub fn from_literal(l: &Literal) -> Option<Value> {
        match l {
            Literal::Bool(b) => Some(Value::Bool(*b)),
            Literal::Int(n) => n.to_i64().map(Value::Int),
            Literal::BitVec(c) => Some(Value::BitVec(*c)),
        }
    }

    pub fn to_literal(self) -> Literal {
        match self {
            Value::Bool(b) => Literal::Bool(b),
            Value::Int(n) => Literal::int(n),
            Value::BitVec(c) => Literal::BitVec(c),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_literal())
    }
}

fn fold_int(args: &[Value], init: Option<i64>, f: fn(i64, i64) -> Option<i64>) -> Option<Value> {
    let mut it = args.iter();
    let mut acc = match init {
        Some(v) => v,
        None => int(it.next()?)?,
    };
    for a in it {
        acc = f(acc, int(a)?)?;
    }
    Some(Value::Int(acc))
}

fn int(v: &Value) -> Option<i64> {
    match v {
        Value::Int(n) => Some(*n),
        _ => None,
    }
}

fn boolean(v: &Value) -> Option<bool> {
    match v {
        Value::Bool(b) => Some(*b),
        _ => None,
    }
}

fn bv(v: &Value) -> Option<BvConst> {
    match v {
        Value::BitVec(c) => Some(*c),
        _ => None,
    }
}

fn ashr(x: u64, shift: u64, w: u32) -> u64 {
    let sign = (x >> (w - 1)) & 1 == 1;
    if shift >= w as u64 {
        return if sign { mask(w) } else { 0 };
    }
    let ext = ((x << (64 - w)) as i64) >> (64 - w);
    ((ext >> shift) as u64) & mask(w)
}

/// SMT-LIB semantics of a builtin on well-sorted arguments. Division and
/// remainder are total (`bvudiv x 0` is all ones, `bvurem x 0` is `x`),
/// shifts by the width or more give 0 (sign fill for `bvashr`). Returns
/// `None` when integer arithmetic overflows `i64` or the arguments are
/// ill-sorted.
pub fn apply(op: Builtin, args: &[Value]) -> Option<Value> {
    use Builtin::*;
    let cmp_int = |f: fn(i64, i64) -> bool| Some(Value::Bool(f(int(&args[0])?, int(&args[1])?)));
    let cmp_bv = |f: fn(u64, u64) -> bool| Some(Value::Bool(f(bv(&args[0])?.bits(), bv(&args[1])?.bits())));
    let bin_bv = |f: &dyn Fn(u64, u64, u32) -> u64| {
        let (a, b) = (bv(&args[0])?, bv(&args[1])?);
        Some(Value::bv(a.width(), f(a.bits(), b.bits(), a.width())))
    };
    match op {
        Not => Some(Value::Bool(!boolean(&args[0])?)),
        And => args.iter().try_fold(true, |acc, a| Some(acc & boolean(a)?)).map(Value::Bool),
        Or => args.iter().try_fold(false, |acc, a| Some(acc | boolean(a)?)).map(Value::Bool),
        Implies => Some(Value::Bool(!boolean(&args[0])? || boolean(&args[1])?)),
        Eq => Some(Value::Bool(args.windows(2).all(|w| w[0] == w[1]))),
        Ite => Some(if boolean(&args[0])? { args[1] } else { args[2] }),
        Add => fold_int(args, Some(0), i64::checked_add),
        Sub if args.len() == 1 => int(&args[0])?.checked_neg().map(Value::Int),
        Sub => fold_int(args, None, i64::checked_sub),
        Ge => cmp_int(|a, b| a >= b),
        Le => cmp_int(|a, b| a <= b),
        Gt => cmp_int(|a, b| a > b),
        Lt => cmp_int(|a, b| a < b),
        BvNot => bv(&args[0]).map(|a| Value::bv(a.width(), !a.bits())),
        BvNeg => bv(&args[0]).map(|a| Value::bv(a.width(), a.bits().wrapping_neg())),
        BvAdd => bin_bv(&|a, b, _| a.wrapping_add(b)),
        BvSub => bin_bv(&|a, b, _| a.wrapping_sub(b)),
        BvMul => bin_bv(&|a, b, _| a.wrapping_mul(b)),
        BvUdiv => bin_bv(&|a, b, w| if b == 0 { mask(w) } else { a / b }),
        BvUrem => bin_bv(&|a, b, _| if b == 0 { a } else { a % b }),
        BvAnd => bin_bv(&|a, b, _| a & b),
        BvOr => bin_bv(&|a, b, _| a | b),
        BvXor => bin_bv(&|a, b, _| a ^ b),
        BvShl => bin_bv(&|a, b, w| if b >= w as u64 { 0 } else { a << b }),
        BvLshr => bin_bv(&|a, b, w| if b >= w as u64 { 0 } else { a >> b }),
        BvAshr => bin_bv(&|a, b, w| ashr(a, b, w)),
        BvUle => cmp_bv(|a, b| a <= b),
        BvUlt => cmp_bv(|a, b| a < b),
        BvUge => cmp_bv(|a, b| a >= b),
        BvUgt => cmp_bv(|a, b| a > b),
    }
}

/// An assignment of values to named variables.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Valuation(Vec<(String, Value)>);

impl Valuation {
    pub fn new(pairs: Vec<(String, Value)>) -> Self {
        Valuation(pairs)
    }

    pub fn get(&self, name: &str) -> Option<Value> {
        self.0.iter().rev().find(|(n, _)| n == name).map(|(_, v)| *v)
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, Value)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("{}");
        }
        let parts: Vec<String> = self.0.iter().map(|(n, v)| format!("{n}={v}")).collect();
        f.write_str(&parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b4(v: u64) -> Value {
        Value::bv(4, v)
    }

    #[test]
    fn bitvector_wraparound() {
        assert_eq!(apply(Builtin::BvAdd, &[b4(0b1111), b4(0b0001)]), Some(b4(0)));
        assert_eq!(apply(Builtin::BvNeg, &[b4(1)]), Some(b4(0b1111)));
        assert_eq!(apply(Builtin::BvMul, &[b4(5), b4(7)]), Some(b4(35 % 16)));
    }

    #[test]
    fn total_division() {
        assert_eq!(apply(Builtin::BvUdiv, &[b4(9), b4(0)]), Some(b4(15)));
        assert_eq!(apply(Builtin::BvUrem, &[b4(9), b4(0)]), Some(b4(9)));
        assert_eq!(apply(Builtin::BvUdiv, &[b4(9), b4(2)]), Some(b4(4)));
    }

    #[test]
    fn shifts() {
        assert_eq!(apply(Builtin::BvShl, &[b4(0b0011), b4(2)]), Some(b4(0b1100)));
        assert_eq!(apply(Builtin::BvShl, &[b4(0b0011), b4(4)]), Some(b4(0)));
        assert_eq!(apply(Builtin::BvLshr, &[b4(0b1000), b4(3)]), Some(b4(1)));
        assert_eq!(apply(Builtin::BvAshr, &[b4(0b1000), b4(2)]), Some(b4(0b1110)));
        assert_eq!(apply(Builtin::BvAshr, &[b4(0b1000), b4(9)]), Some(b4(0b1111)));
        assert_eq!(apply(Builtin::BvAshr, &[b4(0b0100), b4(9)]), Some(b4(0)));
        let w64 = |v: u64| Value::bv(64, v);
        assert_eq!(apply(Builtin::BvAshr, &[w64(1 << 63), w64(63)]), Some(w64(u64::MAX)));
    }

    #[test]
    fn integer_ops() {
        let i = Value::Int;
        assert_eq!(apply(Builtin::Add, &[i(1), i(1)]), Some(i(2)));
        assert_eq!(apply(Builtin::Sub, &[i(3)]), Some(i(-3)));
        assert_eq!(apply(Builtin::Sub, &[i(3), i(5), i(1)]), Some(i(-3)));
        assert_eq!(apply(Builtin::Add, &[i(i64::MAX), i(1)]), None);
        assert_eq!(apply(Builtin::Ite, &[Value::Bool(false), i(3), i(7)]), Some(i(7)));
        assert_eq!(apply(Builtin::Ge, &[i(3), i(7)]), Some(Value::Bool(false)));
    }

    #[test]
    fn unsigned_comparisons() {
        assert_eq!(apply(Builtin::BvUlt, &[b4(0b1000), b4(1)]), Some(Value::Bool(false)));
        assert_eq!(apply(Builtin::BvUge, &[b4(0b1000), b4(1)]), Some(Value::Bool(true)));
    }
}
