//! Linear reconstruction attacks on noisy statistical releases.
//!
//! A database is a nonsensitive matrix `U` plus one secret bit column `s`. The
//! [`release`] module simulates mechanisms that publish noisy statistics of
//! `(U, s)`; [`attack`] turns each release into a noisy linear system in `s`;
//! [`decode`] solves it by least squares or ℓ1 minimization and rounds to bits.
//! [`boolfunc`] and [`randmat`] hold the algebra and the random-matrix probes.

pub mod attack;
pub mod boolfunc;
pub mod cli;
pub mod decode;
pub mod randmat;
pub mod release;
pub mod rng;
