//! Image ingestion and reduction of each image to a single scalar along the
//! leading principal direction.

mod idx;
mod pca;
mod synthetic;

pub use idx::{encode_idx_images, encode_idx_labels, parse_idx_images, parse_idx_labels, read_idx_file, ImageSet};
pub use pca::{center, leading_eigenvector, project_rescale, PcaProjection, PowerIterOptions};
pub use synthetic::two_blobs;
