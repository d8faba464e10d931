//! Numerical toolkit for singular-value dynamics on flag manifolds, Hilbert
//! geometry of convex projective domains, combinatorial horoballs, marked-box
//! orbits, and projective ping-pong certificates.

pub mod cuspgraph;
pub mod flagdyn;
pub mod hilbert;
pub mod matgeo;
pub mod pappus;
pub mod par;
pub mod pingpong;
pub mod reps;
pub mod sample;
