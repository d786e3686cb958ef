//! Symbolic calculation and bounded checking of stateful reactive contracts.

pub mod expr;
pub mod rel;
pub mod state;
pub mod subst;
pub mod value;
pub mod contract;
pub mod parallel;
pub mod dsl;
pub mod oracle;
pub mod refine;
pub mod gen;
pub mod report;
