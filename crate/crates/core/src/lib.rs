//! Evaluation toolkit for resource-aware webpage generation.
//!
//! * [`resource`]: resource lists, URL normalization, link classification.
//! * [`raster`] and [`color`]: screenshot metrics (MAE, PSNR, SSIM, NEMD,
//!   embedding cosine) and CIELAB / CIEDE2000.
//! * [`eval`]: resource matching, RER, fine-grained per-element metrics.
//! * [`iqa`]: agreement between metrics and human ratings.
//! * [`html`]: HTML simplification, link/image synthesis, resource extraction.

pub mod color;
pub mod error;
pub mod eval;
pub mod html;
pub mod iqa;
pub mod raster;
pub mod resource;

pub use error::{Error, Result};
