// SPDX-License-Identifier: Apache-2.0

use crate::cegis::{synthesize, BuiltinLimits, Clock};
use crate::grammar::Grammar;
use crate::sygus::Benchmark;

use super::{BackendError, SolveContext, SolveResult, SolverBackend};

/// The in-process enumerative CEGIS solver.
#[derive(Debug, Clone, Default)]
pub struct BuiltinBackend {
    pub limits: BuiltinLimits,
}

impl BuiltinBackend {
    pub fn new(limits: BuiltinLimits) -> Self {
        BuiltinBackend { limits }
    }
}

impl SolverBackend for BuiltinBackend {
    fn name(&self) -> String {
        "builtin".into()
    }

    fn solve(&self, b: &Benchmark, g: &Grammar, ctx: &SolveContext) -> Result<SolveResult, BackendError> {
        Ok(synthesize(b, g, &self.limits, ctx.timeout))
    }

    fn deterministic(&self) -> bool {
        matches!(self.limits.clock, Clock::Virtual { .. })
    }
}
