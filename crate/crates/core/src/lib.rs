//! Proof terms, type checkers and normalization engines for the
//! in-left-right family of calculi.

pub mod syntax;
pub mod typing;
pub mod rewrite;
pub mod iplus;
pub mod quantum;
pub mod cc;
pub mod qencode;
pub mod gen;
pub mod suites;
