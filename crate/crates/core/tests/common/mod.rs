//! Reference implementations and checkers shared by the integration tests
//! and the acceptance runner.
#![allow(dead_code, clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod gradcheck;
pub mod invariants;
pub mod oracles;
