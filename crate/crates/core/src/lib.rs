//! Checker for termination certificates of first-order term rewrite
//! systems, plus a small XSD-to-datatype analyzer.
//!
//! The pipeline is [`cpf::parse_cpf`] followed by
//! [`checker::check_certificate`]; [`xsd`] orders the type definitions of
//! a schema into groups of mutually recursive types.

#![allow(clippy::result_large_err)]

pub mod checker;
pub mod cli;
pub mod cpf;
pub mod dp;
pub mod poly;
pub mod term;
pub mod xsd;

pub use checker::{check_certificate, CheckResult};
pub use cpf::{parse_cpf, Certificate};
