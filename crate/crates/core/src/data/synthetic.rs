use ndarray::Array2;

use super::ImageSet;
use crate::rng::GaussianSampler;

/// Offline stand-in for MNIST: `n` images of `pixels` values drawn from two
/// well-separated Gaussian blobs, labelled 0 and 1 by blob. Pixels are
/// quantised to multiples of 1/255 so the set survives an IDX round trip.
pub fn two_blobs(n: usize, pixels: usize, seed: u64) -> ImageSet {
    let mut rng = GaussianSampler::new(seed);
    let mut images = Array2::zeros((pixels, n));
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label = (rng.uniform() < 0.5) as u8;
        let centre = if label == 0 { 0.3 } else { 0.7 };
        for p in 0..pixels {
            let v = rng.normal(centre, 0.08).clamp(0.0, 1.0);
            images[[p, i]] = (v * 255.0).round() / 255.0;
        }
        labels.push(label);
    }
    ImageSet::new(images, labels).expect("labels are 0 or 1")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_in_range() {
        let a = two_blobs(50, 16, 9);
        let b = two_blobs(50, 16, 9);
        assert_eq!(a.images, b.images);
        assert_eq!(a.labels, b.labels);
        assert!(a.images.iter().all(|v| (0.0..=1.0).contains(v)));
        assert!(a.labels.contains(&0) && a.labels.contains(&1));
    }
}
