// SPDX-License-Identifier: Apache-2.0

//! The metagrammar matrix: structures, instances, instantiation and files.

mod bind;
mod build;
mod format;
mod instance;
mod structure;

pub use bind::{instantiate, BindError, Binding};
pub use build::{build_shared_structure, build_structure};
pub use format::{deserialize_matrix, serialize_matrix, MatrixFormatError};
pub use instance::{full_instance, random_instance, random_instance_with_density, MatrixInstance};
pub use structure::{MatrixSort, MatrixStructure, NonTerminal, ProductionRule, RuleKind, StructureError, WiringPolicy};

#[cfg(test)]
pub(crate) use instance::tests::block_structure;
