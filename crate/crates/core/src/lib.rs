//! Independence and influence in symmetric n-player games.
//!
//! Each of `n` players flips a fair cause coin; a player's effect occurs with
//! probability `x_k`, where `k` is the number of players (itself included)
//! whose cause agrees with its own. The set of effect vectors `x ∈ [0,1]^n`
//! for which effects are pairwise independent given any single cause, while
//! every cause still influences every effect, is studied here through
//!
//! * [`model`]: probability semantics and brute-force enumeration oracles,
//! * [`quadratic`]: the exact independence quadratic form, its restriction to
//!   palindromic vectors, exact inertia and kernels,
//! * [`spectral`]: the floating eigenstructure and the image of the
//!   palindromic collision space,
//! * [`geometry`]: sampling, component counting and witness paths.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod expectations;
pub mod geometry;
pub mod model;
pub mod quadratic;
pub mod spectral;

pub use model::{GamePoint, Rational};
pub use quadratic::{build_form, ExactInertia, QuadraticForm, RestrictedForm};
pub use spectral::{eigendecompose, Spectrum};

use quadratic::QuadraticError;
use spectral::{CollisionSpace, SpectralError};

/// Every derived object for one player count, built once.
#[derive(Debug, Clone)]
pub struct GstModel {
    pub form: QuadraticForm,
    pub restricted: RestrictedForm,
    pub spectrum: Spectrum,
    pub collision: CollisionSpace,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelBuildError {
    #[error(transparent)]
    Quadratic(#[from] QuadraticError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl GstModel {
    pub fn new(n: usize) -> Result<Self, ModelBuildError> {
        let form = build_form(n)?;
        let restricted = quadratic::restrict_to_symmetric(&form);
        let spectrum = eigendecompose(&form, spectral::DEFAULT_ZERO_TOL)?;
        let kernel = restricted.lifted_kernel();
        let collision = spectral::collision_space(&spectrum, &kernel);
        Ok(Self {
            form,
            restricted,
            spectrum,
            collision,
        })
    }

    pub fn n(&self) -> usize {
        self.form.n()
    }
}
