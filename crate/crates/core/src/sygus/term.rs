// SPDX-License-Identifier: Apache-2.0

use std::fmt;

use num_bigint::BigInt;

use super::sort::Sort;

/// A bitvector constant. `bits` is always truncated to `width`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BvConst {
    width: u32,
    bits: u64,
}

impl BvConst {
    pub fn new(width: u32, bits: u64) -> Self {
        assert!((1..=64).contains(&width), "bitvector width {width} out of range");
        BvConst { width, bits: bits & mask(width) }
    }

    pub fn width(self) -> u32 {
        self.width
    }

    pub fn bits(self) -> u64 {
        self.bits
    }
}

/// All-ones mask for a width in `1..=64`.
pub fn mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

impl fmt::Display for BvConst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.width.is_multiple_of(4) {
            write!(f, "#x{:0w$x}", self.bits, w = (self.width / 4) as usize)
        } else {
            write!(f, "#b{:0w$b}", self.bits, w = self.width as usize)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Literal {
    Bool(bool),
    Int(BigInt),
    BitVec(BvConst),
}

impl Literal {
    pub fn int(v: i64) -> Self {
        Literal::Int(BigInt::from(v))
    }

    pub fn bv(width: u32, bits: u64) -> Self {
        Literal::BitVec(BvConst::new(width, bits))
    }

    pub fn sort(&self) -> Sort {
        match self {
            Literal::Bool(_) => Sort::Bool,
            Literal::Int(_) => Sort::Int,
            Literal::BitVec(c) => Sort::BitVec(c.width()),
        }
    }

    /// The "0" constant of a sort (`false` for Bool).
    pub fn zero(sort: Sort) -> Self {
        match sort {
            Sort::Bool => Literal::Bool(false),
            Sort::Int => Literal::int(0),
            Sort::BitVec(w) => Literal::bv(w, 0),
        }
    }

    /// The "1" constant of a sort (`true` for Bool).
    pub fn one(sort: Sort) -> Self {
        match sort {
            Sort::Bool => Literal::Bool(true),
            Sort::Int => Literal::int(1),
            Sort::BitVec(w) => Literal::bv(w, 1),
        }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Bool(b) => write!(f, "{b}"),
            Literal::Int(n) if n.sign() == num_bigint::Sign::Minus => write!(f, "(- {})", -n),
            Literal::Int(n) => write!(f, "{n}"),
            Literal::BitVec(c) => write!(f, "{c}"),
        }
    }
}

/// Which theory table an operator belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Theory {
    Core,
    Lia,
    Bv,
}

/// Interpreted operators of the supported theories.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Builtin {
    // Core
    Not,
    And,
    Or,
    Implies,
    Eq,
    Ite,
    // LIA
    Add,
    Sub,
    Ge,
    Le,
    Gt,
    Lt,
    // BV
    BvNot,
    BvNeg,
    BvAdd,
    BvSub,
    BvMul,
    BvUdiv,
    BvUrem,
    BvAnd,
    BvOr,
    BvXor,
    BvShl,
    BvLshr,
    BvAshr,
    BvUle,
    BvUlt,
    BvUge,
    BvUgt,
}

impl Builtin {
    pub const ALL: [Builtin; 29] = [
        Builtin::Not,
        Builtin::And,
        Builtin::Or,
        Builtin::Implies,
        Builtin::Eq,
        Builtin::Ite,
        Builtin::Add,
        Builtin::Sub,
        Builtin::Ge,
        Builtin::Le,
        Builtin::Gt,
        Builtin::Lt,
        Builtin::BvNot,
        Builtin::BvNeg,
        Builtin::BvAdd,
        Builtin::BvSub,
        Builtin::BvMul,
        Builtin::BvUdiv,
        Builtin::BvUrem,
        Builtin::BvAnd,
        Builtin::BvOr,
        Builtin::BvXor,
        Builtin::BvShl,
        Builtin::BvLshr,
        Builtin::BvAshr,
        Builtin::BvUle,
        Builtin::BvUlt,
        Builtin::BvUge,
        Builtin::BvUgt,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Not => "not",
            Builtin::And => "and",
            Builtin::Or => "or",
            Builtin::Implies => "=>",
            Builtin::Eq => "=",
            Builtin::Ite => "ite",
            Builtin::Add => "+",
            Builtin::Sub => "-",
            Builtin::Ge => ">=",
            Builtin::Le => "<=",
            Builtin::Gt => ">",
            Builtin::Lt => "<",
            Builtin::BvNot => "bvnot",
            Builtin::BvNeg => "bvneg",
            Builtin::BvAdd => "bvadd",
            Builtin::BvSub => "bvsub",
            Builtin::BvMul => "bvmul",
            Builtin::BvUdiv => "bvudiv",
            Builtin::BvUrem => "bvurem",
            Builtin::BvAnd => "bvand",
            Builtin::BvOr => "bvor",
            Builtin::BvXor => "bvxor",
            Builtin::BvShl => "bvshl",
            Builtin::BvLshr => "bvlshr",
            Builtin::BvAshr => "bvashr",
            Builtin::BvUle => "bvule",
            Builtin::BvUlt => "bvult",
            Builtin::BvUge => "bvuge",
            Builtin::BvUgt => "bvugt",
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.iter().copied().find(|b| b.name() == name)
    }

    pub fn theory(self) -> Theory {
        use Builtin::*;
        match self {
            Not | And | Or | Implies | Eq | Ite => Theory::Core,
            Add | Sub | Ge | Le | Gt | Lt => Theory::Lia,
            _ => Theory::Bv,
        }
    }
}

impl fmt::Display for Builtin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Head of an application: an interpreted operator or a call to a
/// user-defined function (helper or the synth-fun).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Builtin(Builtin),
    Call(String),
}

impl Op {
    pub fn name(&self) -> &str {
        match self {
            Op::Builtin(b) => b.name(),
            Op::Call(n) => n,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Const(Literal),
    Var(String, Sort),
    App(Op, Vec<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>, sort: Sort) -> Term {
        Term::Var(name.into(), sort)
    }

    pub fn int(v: i64) -> Term {
        Term::Const(Literal::int(v))
    }

    pub fn bool(v: bool) -> Term {
        Term::Const(Literal::Bool(v))
    }

    pub fn bv(width: u32, bits: u64) -> Term {
        Term::Const(Literal::bv(width, bits))
    }

    pub fn app(op: Builtin, args: Vec<Term>) -> Term {
        Term::App(Op::Builtin(op), args)
    }

    pub fn call(name: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(Op::Call(name.into()), args)
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Const(_) | Term::Var(..) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::size).sum::<usize>(),
        }
    }

    /// Visit every subterm in pre-order.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        if let Term::App(_, args) = self {
            for a in args {
                a.walk(f);
            }
        }
    }

    /// Replace variables by name.
    pub fn substitute(&self, subst: &dyn Fn(&str) -> Option<Term>) -> Term {
        match self {
            Term::Var(name, _) => subst(name).unwrap_or_else(|| self.clone()),
            Term::Const(_) => self.clone(),
            Term::App(op, args) => Term::App(op.clone(), args.iter().map(|a| a.substitute(subst)).collect()),
        }
    }

    /// True if some subterm calls `name`.
    pub fn calls(&self, name: &str) -> bool {
        let mut found = false;
        self.walk(&mut |t| {
            if let Term::App(Op::Call(n), _) = t {
                found |= n == name;
            }
        });
        found
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Const(l) => write!(f, "{l}"),
            Term::Var(name, _) => f.write_str(name),
            Term::App(op, args) if args.is_empty() => f.write_str(op.name()),
            Term::App(op, args) => {
                write!(f, "({}", op.name())?;
                for a in args {
                    write!(f, " {a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bv_constants_truncate_and_print() {
        assert_eq!(BvConst::new(4, 0x1f).bits(), 0xf);
        assert_eq!(BvConst::new(4, 1).to_string(), "#x1");
        assert_eq!(BvConst::new(3, 5).to_string(), "#b101");
        assert_eq!(BvConst::new(8, 0xa).to_string(), "#x0a");
        assert_eq!(BvConst::new(64, u64::MAX).bits(), u64::MAX);
    }

    #[test]
    fn negative_ints_print_as_negation() {
        assert_eq!(Term::int(-3).to_string(), "(- 3)");
        assert_eq!(Term::int(0).to_string(), "0");
    }

    #[test]
    fn size_counts_nodes() {
        let t = Term::app(
            Builtin::Ite,
            vec![
                Term::app(Builtin::Ge, vec![Term::var("x", Sort::Int), Term::var("y", Sort::Int)]),
                Term::var("x", Sort::Int),
                Term::var("y", Sort::Int),
            ],
        );
        assert_eq!(t.size(), 6);
        assert_eq!(t.to_string(), "(ite (>= x y) x y)");
    }

    #[test]
    fn builtin_names_are_unique() {
        for b in Builtin::ALL {
            assert_eq!(Builtin::from_name(b.name()), Some(b));
        }
    }
}
