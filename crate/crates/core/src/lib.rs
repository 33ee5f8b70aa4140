//! Spherical panorama toolkit built around the equirectangular and cubemap
//! projections. Feature maps are plain `f64` arrays; precomputed grids move
//! them between the two layouts.

pub mod error;
pub mod feature;
pub mod fusion;
pub mod metrics;
pub mod padding;
pub mod resample;
pub mod sphere;
pub mod tangent;
pub mod tensor_io;

pub use error::{PanoError, Result};
pub use feature::{CubeFeatureMap, FeatureMap};
pub use sphere::{AngularCoord, FaceId, FacePixel, Mat3, Vec3};
