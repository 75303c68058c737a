//! Synthetic two-blob digit images in IDX byte format. Each digit class
//! is a pair of Gaussian blobs at class-specific positions; most images
//! jitter tightly around that layout and one in five is displaced well
//! off it, so robust and non-robust centroids separate visibly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub const SIDE: usize = 28;

/// Raw IDX byte images (magic 2051) and labels (magic 2049).
pub struct BlobDataset {
    pub images: Vec<u8>,
    pub labels: Vec<u8>,
}

fn splitmix64(state: u64) -> u64 {
    let mut z = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Generates `10 * per_digit` images, digit-major. One in five images of
/// a class (rounded down) is an outlier: both blobs translated by half a
/// dozen pixels and spread wider.
pub fn two_blob_idx(per_digit: usize, seed: u64) -> BlobDataset {
    let count = (10 * per_digit) as u32;
    let mut images = Vec::with_capacity(16 + count as usize * SIDE * SIDE);
    images.extend_from_slice(&2051u32.to_be_bytes());
    images.extend_from_slice(&count.to_be_bytes());
    images.extend_from_slice(&(SIDE as u32).to_be_bytes());
    images.extend_from_slice(&(SIDE as u32).to_be_bytes());
    let mut labels = Vec::with_capacity(8 + count as usize);
    labels.extend_from_slice(&2049u32.to_be_bytes());
    labels.extend_from_slice(&count.to_be_bytes());
    for digit in 0..10u8 {
        for index in 0..per_digit {
            images.extend_from_slice(&render(digit, index, per_digit, seed));
            labels.push(digit);
        }
    }
    BlobDataset { images, labels }
}

fn render(digit: u8, index: usize, per_digit: usize, seed: u64) -> Vec<u8> {
    let mut h = splitmix64(seed ^ 0xb10b);
    for v in [digit as u64, index as u64] {
        h = splitmix64(h ^ v);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(h);

    let angle = std::f64::consts::TAU * digit as f64 / 10.0;
    let (cx, cy) = (13.5, 13.5);
    let radius = 5.5;
    let base_a = (cx + radius * angle.cos(), cy + radius * angle.sin());
    let base_b = (cx - radius * angle.cos(), cy - radius * angle.sin());

    let outliers = per_digit / 5;
    let tight = per_digit - outliers;
    let mut sigma = 1.8;
    let mut shift = (0.0, 0.0);
    if index >= tight {
        let signs = [(1.0, 1.0), (-1.0, 1.0), (1.0, -1.0), (-1.0, -1.0)];
        let (sx, sy) = signs[(index - tight) % signs.len()];
        shift = (4.5 * sx, 4.5 * sy);
        sigma *= 1.5;
    }

    let amp_b = rng.random_range(0.75..1.0);
    let jitter = Normal::new(0.0, 0.35).expect("finite std");
    let a = (
        base_a.0 + shift.0 + jitter.sample(&mut rng),
        base_a.1 + shift.1 + jitter.sample(&mut rng),
    );
    let b = (
        base_b.0 + shift.0 + jitter.sample(&mut rng),
        base_b.1 + shift.1 + jitter.sample(&mut rng),
    );

    let mut field = vec![0.0f64; SIDE * SIDE];
    let mut peak = 0.0f64;
    for row in 0..SIDE {
        for col in 0..SIDE {
            let (x, y) = (col as f64, row as f64);
            let bump = |c: (f64, f64)| {
                let d2 = (x - c.0) * (x - c.0) + (y - c.1) * (y - c.1);
                (-d2 / (2.0 * sigma * sigma)).exp()
            };
            let v = bump(a) + amp_b * bump(b);
            field[row * SIDE + col] = v;
            peak = peak.max(v);
        }
    }
    field
        .iter()
        .map(|&v| {
            let scaled = 255.0 * v / peak;
            if scaled < 1.0 {
                0
            } else {
                scaled.round() as u8
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn idx_headers_are_well_formed() {
        let d = two_blob_idx(3, 7);
        assert_eq!(&d.images[0..4], &[0, 0, 8, 3]);
        assert_eq!(u32::from_be_bytes(d.images[4..8].try_into().unwrap()), 30);
        assert_eq!(u32::from_be_bytes(d.images[8..12].try_into().unwrap()), 28);
        assert_eq!(d.images.len(), 16 + 30 * SIDE * SIDE);
        assert_eq!(&d.labels[0..4], &[0, 0, 8, 1]);
        assert_eq!(d.labels.len(), 8 + 30);
        for digit in 0..10 {
            let n = d.labels[8..].iter().filter(|&&l| l == digit).count();
            assert_eq!(n, 3);
        }
    }

    #[test]
    fn generation_is_deterministic_in_the_seed() {
        let a = two_blob_idx(2, 11);
        let b = two_blob_idx(2, 11);
        let c = two_blob_idx(2, 12);
        assert_eq!(a.images, b.images);
        assert_ne!(a.images, c.images);
    }

    #[test]
    fn outliers_sit_away_from_the_tight_pack() {
        // With per_digit = 20, images 0..16 are tight and 16..20 shifted.
        // Compare mass centers within digit 0.
        let centroid = |img: &[u8]| {
            let total: f64 = img.iter().map(|&v| v as f64).sum();
            let mut cx = 0.0;
            let mut cy = 0.0;
            for r in 0..SIDE {
                for c in 0..SIDE {
                    let m = img[r * SIDE + c] as f64 / total;
                    cx += m * c as f64;
                    cy += m * r as f64;
                }
            }
            (cx, cy)
        };
        let d = two_blob_idx(20, 5);
        let image = |i: usize| &d.images[16 + i * SIDE * SIDE..16 + (i + 1) * SIDE * SIDE];
        let (tx, ty) = centroid(image(0));
        for i in 1..16 {
            let (x, y) = centroid(image(i));
            assert!((x - tx).abs() < 1.5 && (y - ty).abs() < 1.5, "tight {i}");
        }
        for i in 16..20 {
            let (x, y) = centroid(image(i));
            let off = ((x - tx).powi(2) + (y - ty).powi(2)).sqrt();
            assert!(off > 3.0, "outlier {i} drifted only {off}");
        }
    }

    #[test]
    fn every_image_peaks_at_255_and_zeroes_the_far_field() {
        let d = two_blob_idx(1, 3);
        for i in 0..10 {
            let img = &d.images[16 + i * SIDE * SIDE..16 + (i + 1) * SIDE * SIDE];
            assert_eq!(*img.iter().max().unwrap(), 255);
            let zeros = img.iter().filter(|&&v| v == 0).count();
            assert!(zeros > SIDE * SIDE / 2, "image {i} has {zeros} zeros");
        }
    }
}
