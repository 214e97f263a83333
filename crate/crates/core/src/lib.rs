//! Black-box unsupervised domain adaptation by iterative learning with noisy
//! labels.
//!
//! A source classifier is reachable only through its prediction API
//! ([`blackbox::BlackBoxHandle`]). Its argmax predictions on unlabeled target
//! data serve as noisy labels; a fresh target model is trained on them with
//! per-class small-loss selection ([`lnl`]), and the result is sealed as the
//! next black box ([`iterative`]).

pub mod blackbox;
pub mod cli;
pub mod data;
pub mod error;
pub mod eval;
pub mod iterative;
pub mod lnl;
pub mod model;
pub mod report;

pub use error::{Error, Result};
