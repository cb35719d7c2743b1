//! Closed-form passage laws: the finite-level triple law, its limits as the
//! level grows, and the stable triple law.

mod asymptotic;
mod finite;
mod stable;

pub use asymptotic::{AsymptoticLaws, Decomposition, MassAccounting};
pub use finite::{pollaczek_khintchine, PassageLaw};
pub use stable::{stable_norm_const, stable_triple_mass, triple_law_stable};

use crate::error::Result;
use crate::quad::{self, Tolerance};

/// A density on `(0, ∞)` whose total mass may be below one.
pub struct DefectiveLaw<'a> {
    pub coordinates: &'static [&'static str],
    pub mass: f64,
    density: Box<dyn Fn(f64) -> f64 + Send + Sync + 'a>,
}

impl<'a> DefectiveLaw<'a> {
    pub fn new(
        coordinates: &'static [&'static str],
        mass: f64,
        density: impl Fn(f64) -> f64 + Send + Sync + 'a,
    ) -> Self {
        Self {
            coordinates,
            mass,
            density: Box::new(density),
        }
    }

    pub fn density(&self, u: f64) -> f64 {
        (self.density)(u)
    }

    /// Mass obtained by integrating the density.
    pub fn integrated_mass(&self) -> Result<f64> {
        quad::integrate_to_infinity(|u| self.density(u), 0.0, Tolerance::new(1e-13, 1e-10))
    }
}

impl std::fmt::Debug for DefectiveLaw<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DefectiveLaw")
            .field("coordinates", &self.coordinates)
            .field("mass", &self.mass)
            .finish()
    }
}
