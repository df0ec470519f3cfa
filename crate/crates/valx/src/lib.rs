//! Exact construction and analysis of valuation-transcendental extensions
//! of a valuation on `K` to the rational function field `K(x)`.
//!
//! The pieces, bottom up:
//!
//! * [`valgroup`] — exact ordered-group arithmetic for `(Q^r, lex)` plus one
//!   distinguished element `gamma` and the formal value of zero;
//! * [`tower`] — base valued fields and totally ramified extension towers
//!   with certified monomial valuations;
//! * [`poly`] — dense polynomials over tower levels, Taylor expansion by
//!   synthetic division, Q-expansion;
//! * [`newton`] — Newton polygons, conjugate-difference multisets, Krasner
//!   constants;
//! * [`extension`] — the extended valuation from a pair of definition,
//!   classification, delta, key-polynomial values, structure reports;
//! * [`structure`] — distinguished chains, minimal-pair reduction, the
//!   conjugate count, and the implicit-constant-field classifier;
//! * [`pcs`] — pseudo-Cauchy prefix analysis;
//! * [`cli`] — the session-file front end behind the `valx` binary.

pub mod cli;
pub mod extension;
pub mod hull;
pub mod newton;
pub mod pcs;
pub mod poly;
pub mod structure;
pub mod tower;
pub mod valgroup;
