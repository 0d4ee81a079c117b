//! Generic homological algebra over dg algebras with F2 coefficients:
//! chain complexes, type D structures (and DD structures, as D structures
//! over an outer product algebra), morphisms and mapping cones, A∞ modules
//! and bimodules, type DA bimodules, box tensor products, cancellation, and
//! homotopy transfer.
//!
//! Filtrations are carried as per-generator cube labels (`u64` bit masks);
//! label `a` precedes `b` when every coordinate of `a` is at most that of `b`.

pub mod ainf;
pub mod complex;
pub mod da;
pub mod dstructure;
pub mod retract;

use thiserror::Error;

pub use ainf::{box_aa_dd, box_ad, AABimodule, AABoxD, AInfModule, DgAA, TransferredAA};
pub use complex::{gf2_rank, label_string, ChainComplex};
pub use da::{box_da_d, box_da_da, identity_da, DABimodule, DAGen};
pub use dstructure::{mapping_cone, DGen, DMorphism, DStructure};
pub use retract::Retraction;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomalgError {
    #[error("structure equation fails: {0}")]
    Structure(String),
    #[error("iterated structure maps exceed depth {0}; the object is not bounded")]
    Unbounded(usize),
    #[error("mismatched objects: {0}")]
    Mismatch(String),
    #[error("morphism is not a cycle: {0}")]
    NotACycle(String),
}

/// Partial order on cube labels.
pub fn label_le(a: u64, b: u64) -> bool {
    a & !b == 0
}

/// Outcome of a structure-equation check, listing each failing
/// generator/input tuple.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CheckReport {
    pub violations: Vec<String>,
}

impl CheckReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, s: String) {
        self.violations.push(s);
    }

    pub fn into_result(self) -> Result<(), HomalgError> {
        if self.ok() {
            Ok(())
        } else {
            let shown: Vec<&str> = self.violations.iter().take(5).map(|s| s.as_str()).collect();
            Err(HomalgError::Structure(format!(
                "{} violation(s): {}",
                self.violations.len(),
                shown.join("; ")
            )))
        }
    }
}

/// Shift a label of a right-hand factor past the coordinates of the left.
pub fn combine_labels(left: u64, left_dim: usize, right: u64) -> u64 {
    left | (right << left_dim)
}
