//! N-band wavelet filter banks with exact rational construction.
//!
//! * [`laurent`]: Laurent polynomials, polyphase splitting and loop
//!   factorization of polynomial matrices.
//! * [`scaling_filters`]: Haar, Shannon and B-spline scaling filters.
//! * [`wavelet_construct`]: complete analysis/synthesis banks and their
//!   perfect-reconstruction and orthonormality checks.
//! * [`transform`]: multi-level analysis and synthesis of signals.
//! * [`cascade`]: rendering of scaling functions and wavelets.

pub mod cascade;
pub mod laurent;
pub mod scaling_filters;
pub mod transform;
pub mod wavelet_construct;
