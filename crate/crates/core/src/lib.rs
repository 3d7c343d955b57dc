//! Bearing fault identification from vibration images.
//!
//! The pipeline cuts vibration records into fixed-length segments
//! ([`signal`]), reads CWRU-style data files and assembles balanced splits
//! ([`ingest`]), turns each segment into an image ([`encoders`]), classifies
//! images with a small CNN ([`nn`]), and reports accuracy together with the
//! encode/inference latency split ([`eval`]).

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod encoders;
pub mod eval;
pub mod ingest;
pub mod nn;
pub mod signal;
