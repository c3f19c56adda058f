#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attention;
pub mod beliefs;
pub mod decide;
pub mod learn;
pub mod lp;
pub mod rlhf;
pub mod risk;
pub mod scenario;
pub mod selftest;
pub mod simplex;
