//! Exact GF(2) treatment of Clifford encoders.
//!
//! Pauli operators are bit-vectors with a phase modulo 4. Chain and ring
//! states built from a Clifford encoder are stabilizer states, so entropies
//! are ranks and correctable algebras are spans of logical Paulis.

mod analysis;
mod clifford;
pub mod gf2;
mod isometry;
mod pauli;
mod state;

pub use analysis::{
    algebra_table, algebra_table_on, builtin, logical_pauli_enumeration, spt_detect,
    stabilizer_cmi, stabilizer_cmi_formula, stabilizer_entropy, stabilizer_saturation,
    AlgebraTable, LogicalEnumeration, LogicalPauli, SptVerdict, StabilizerSaturation,
    TableColumn, BUILTIN_NAMES,
};
pub use clifford::Clifford;
pub use isometry::StabilizerIsometry;
pub use pauli::{Bits, PauliOperator};
pub use state::{chain_state, ring_state, StabilizerState};

#[cfg(test)]
mod tests;
