//! Distilling first-order soft-logic rules into neural predictors.
//!
//! A teacher distribution is obtained by projecting the student's output onto
//! a rule-regularized subspace; the student is then trained to imitate both
//! the teacher's soft predictions and the true labels.

pub mod corpus;
pub mod inference;
pub mod logspace;
pub mod predictors;
pub mod projection;
pub mod rulelib;
pub mod softlogic;
pub mod trainer;
