// SPDX-License-Identifier: Apache-2.0

//! A small enumerative CEGIS solver.
//!
//! Candidates are enumerated bottom-up by size from a grammar. Each stored
//! term carries its values at the synth-fun argument tuples induced by the
//! current example set, so checking a candidate against the examples and
//! (optionally) discarding observationally equivalent terms is cheap.
//! Verification is bounded: integers range over a small interval and wide
//! bitvectors are sampled.

mod compile;
mod enumerate;
mod synth;
mod value;
mod verify;

use crate::sygus::{Benchmark, Term};

pub use compile::EvalError;
pub use enumerate::EnumerationState;
pub use synth::{synthesize, BuiltinLimits, Clock, DEFAULT_NANOS_PER_UNIT};
pub use value::{apply, Valuation, Value};
pub use verify::{validate_solution, Verdict, VerifyBound};

/// Evaluate a closed term (helpers inlined) under a valuation.
pub fn evaluate(t: &Term, v: &Valuation, b: &Benchmark) -> Result<Value, EvalError> {
    let c = compile::Compiler { helpers: &b.helpers, synth: None };
    let vars = |n: &str| v.get(n).map(|x| compile::CExpr::Const(Some(x)));
    let e = c.compile(t, &vars, &mut |_| Err(EvalError::UnknownFunction(b.synth_fun.name.clone())))?;
    e.eval(&[]).ok_or(EvalError::Overflow)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sygus::{parse_benchmark, Builtin, Sort};

    #[test]
    fn evaluation_examples() {
        let b = parse_benchmark("(set-logic LIA)(define-fun inc ((x Int)) Int (+ x 1))(synth-fun f ((x Int)) Int)")
            .unwrap();
        let none = Valuation::default();
        assert_eq!(evaluate(&Term::app(Builtin::Add, vec![Term::int(1), Term::int(1)]), &none, &b), Ok(Value::Int(2)));
        let bv = Term::app(Builtin::BvAdd, vec![Term::bv(4, 0b1111), Term::bv(4, 0b0001)]);
        assert_eq!(evaluate(&bv, &none, &b), Ok(Value::bv(4, 0)));
        let (x, y) = (Term::var("x", Sort::Int), Term::var("y", Sort::Int));
        let max = Term::app(Builtin::Ite, vec![Term::app(Builtin::Ge, vec![x.clone(), y.clone()]), x, y]);
        let v = Valuation::new(vec![("x".into(), Value::Int(3)), ("y".into(), Value::Int(7))]);
        assert_eq!(evaluate(&max, &v, &b), Ok(Value::Int(7)));
        assert_eq!(evaluate(&Term::call("inc", vec![Term::int(4)]), &none, &b), Ok(Value::Int(5)));
        assert_eq!(evaluate(&Term::var("z", Sort::Int), &none, &b), Err(EvalError::Unbound("z".into())));
    }
}
