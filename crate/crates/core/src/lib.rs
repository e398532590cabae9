//! Noncommutative residues of graded pseudodifferential operators, computed
//! from the symbol (Wodzicki, Ponge) and from the kernel's dilation cocycle
//! (groupoidal), with the numerical machinery they share.

pub mod error;

pub mod graded;
pub mod quadrature;
pub mod special;

pub mod homog_dist;
pub mod osculating;
pub mod symbols;

pub mod catalog;
pub mod residue;

pub mod config;
pub mod report;
pub mod verify;
