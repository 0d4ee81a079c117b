//! Bordered bimodules of the identity cobordism, of zero surgery along a
//! distinguished curve, the surgery morphisms between them, and the Dehn
//! twist bimodules obtained as their mapping cones.

pub mod modules;
pub mod mor;
pub mod nearchord;

pub use nearchord::{
    diagonal_idempotents, identity_near_chords, CurveAlgebra, FactorError, IdemType, NearChord, NearChordKind, Sign,
    Subalgebra,
};
pub use modules::{
    cfd_plat, cfd_plat_mirrored, cfdd_dehn_twist, cfdd_identity, cfdd_zero_surgery, skein_morphism,
    verify_structure_constants, EquationCheck, StructureConstants, StructureReport,
};
pub use mor::{cfa_plat, cfaa_identity, mor_dd_to_alg, MorBimodule, MorGen};
