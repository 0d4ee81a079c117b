//! Bordered Floer computation of the spectral sequence from reduced Khovanov
//! homology to the Floer homology of branched double covers of plat
//! closures, together with an independent Khovanov homology oracle.

pub mod pmc;
pub mod strands;
pub mod homalg;
pub mod bordered;
pub mod sscube;
pub mod khovanov;
pub mod cli;
