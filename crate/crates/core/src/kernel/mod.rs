//! Kernel model, difference-lattice samples and the config schema.

pub mod config;
pub mod model;
pub mod samples;

pub use config::{Family, GridConfig, KernelDocument, KernelSpec, SeparableFactor};
pub use model::{KernelModel, NormalizedSurface, Profile, ProfileSpec, ScaledProfile, Surface, SurfaceSpec};
pub use samples::{sample_kernel, KernelSamples, SampleArray};

use crate::error::Result;
use crate::grid::GridSpec;

/// Spec → model → samples in one step, normalized if the spec asks for it.
pub fn samples_for(spec: &KernelSpec, grid: &GridSpec) -> Result<KernelSamples> {
    let s = sample_kernel(&spec.model(), grid)?;
    Ok(if spec.normalize { s.normalized() } else { s })
}
