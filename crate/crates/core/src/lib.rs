//! Dynamics of quadratic rational maps, specialized to the slice of maps
//! `f_a(z) = (z - 1)(z - a/(2 - a)) / z^2` with a superattracting 3-cycle
//! `0 -> ∞ -> 1 -> 0`.
//!
//! Points live on the Riemann sphere ([`SpherePoint`]); maps are coefficient
//! lists ([`RationalMap`]). On top of these sit orbit classification,
//! periodic-point solving, the parameter algebra of the slice, the
//! Sierpiński-curve verdict and a deterministic parallel renderer.

pub mod classify;
pub mod doubling;
pub mod families;
pub mod orbit;
pub mod params;
pub mod periodic;
pub mod poly;
pub mod rational;
pub mod render;
pub mod serde_complex;
pub mod sphere;

pub use families::{per3_map, preset, FamilyError, MapPreset, Per3Parameter, PresetName};
pub use rational::{MapError, RationalMap};
pub use sphere::{chordal_distance, format_complex, mobius_conjugate, Complex, Mobius, SpherePoint};
