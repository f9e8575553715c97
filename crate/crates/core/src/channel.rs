//! Rayleigh channel tensors, path loss and receiver noise.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::linalg::CMatrix;
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Link {
    Ir,
    Eh,
    Eve,
}

/// Per-subband channel matrices, each `n_rx x n_t`.
#[derive(Debug, Clone)]
pub struct ChannelTensor {
    pub link: Link,
    pub gains: Vec<CMatrix>,
    /// `None` means a unit-average-gain link with no path loss applied.
    pub distance_m: Option<f64>,
}

impl ChannelTensor {
    pub fn n_rx(&self) -> usize {
        self.gains[0].nrows()
    }

    pub fn n_t(&self) -> usize {
        self.gains[0].ncols()
    }

    pub fn n_subbands(&self) -> usize {
        self.gains.len()
    }

    pub fn subband(&self, n: usize) -> &CMatrix {
        &self.gains[n]
    }
}

/// `35.3 + 37.6 log10(d)` in dB.
pub fn path_loss_db(d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(invalid(format!("distance {d} m must be positive")));
    }
    Ok(35.3 + 37.6 * d.log10())
}

/// Linear power gain for an optional distance (1 when `None`).
pub fn path_gain(distance_m: Option<f64>) -> Result<f64> {
    match distance_m {
        Some(d) => Ok(10f64.powf(-path_loss_db(d)? / 10.0)),
        None => Ok(1.0),
    }
}

/// One `CN(0, 1)` sample.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn draw_channel<R: Rng + ?Sized>(
    rng: &mut R,
    link: Link,
    n_rx: usize,
    n_t: usize,
    n_subbands: usize,
    flat_subbands: bool,
    distance_m: Option<f64>,
) -> Result<ChannelTensor> {
    if n_rx == 0 || n_t == 0 || n_subbands == 0 {
        return Err(invalid("channel dimensions must be at least 1"));
    }
    let amp = path_gain(distance_m)?.sqrt();
    let draw = |rng: &mut R| CMatrix::from_fn(n_rx, n_t, |_, _| complex_normal(rng) * amp);
    let gains = if flat_subbands {
        let g = draw(rng);
        vec![g; n_subbands]
    } else {
        (0..n_subbands).map(|_| draw(rng)).collect()
    };
    Ok(ChannelTensor { link, gains, distance_m })
}

/// Receiver noise: one `CN(0, sigma2 I)` vector of length `n_rx` per subband.
#[derive(Debug, Clone)]
pub struct NoiseDraw {
    pub samples: Vec<DVector<C64>>,
    pub sigma2: f64,
}

pub fn draw_noise<R: Rng + ?Sized>(rng: &mut R, n_rx: usize, n_subbands: usize, sigma2: f64) -> Result<NoiseDraw> {
    if !(sigma2 > 0.0) || !sigma2.is_finite() {
        return Err(invalid(format!("noise variance {sigma2} must be positive")));
    }
    let sd = sigma2.sqrt();
    let samples = (0..n_subbands)
        .map(|_| DVector::from_fn(n_rx, |_, _| complex_normal(rng) * sd))
        .collect();
    Ok(NoiseDraw { samples, sigma2 })
}

impl NoiseDraw {
    /// All-zero noise, for noiseless runs.
    pub fn zeros(n_rx: usize, n_subbands: usize) -> Self {
        Self { samples: vec![DVector::zeros(n_rx); n_subbands], sigma2: 0.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn path_loss_values() {
        assert!((path_loss_db(1.0).unwrap() - 35.3).abs() < 1e-12);
        assert!((path_loss_db(10.0).unwrap() - 72.9).abs() < 1e-12);
        let expect = 35.3 + 37.6 * 1.5f64.log10();
        assert!((path_loss_db(1.5).unwrap() - expect).abs() < 1e-12);
        assert!((path_loss_db(1.5).unwrap() - 41.9210).abs() < 1e-4);
        assert!(path_loss_db(0.0).is_err());
        assert!(path_loss_db(-2.0).is_err());
    }

    #[test]
    fn flat_subbands_are_replicated() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = draw_channel(&mut rng, Link::Ir, 2, 4, 3, true, None).unwrap();
        assert_eq!(h.gains[0], h.gains[1]);
        assert_eq!(h.gains[1], h.gains[2]);
        let h = draw_channel(&mut rng, Link::Ir, 2, 4, 3, false, None).unwrap();
        assert_ne!(h.gains[0], h.gains[1]);
    }

    #[test]
    fn shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = draw_channel(&mut rng, Link::Eh, 2, 4, 1, true, Some(1.0)).unwrap();
        assert_eq!((h.n_rx(), h.n_t(), h.n_subbands()), (2, 4, 1));
    }

    #[test]
    fn deterministic_for_equal_seeds() {
        let a = draw_channel(&mut ChaCha8Rng::seed_from_u64(9), Link::Eve, 2, 3, 2, false, None).unwrap();
        let b = draw_channel(&mut ChaCha8Rng::seed_from_u64(9), Link::Eve, 2, 3, 2, false, None).unwrap();
        assert_eq!(a.gains, b.gains);
    }

    #[test]
    fn noise_rejects_non_positive_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(draw_noise(&mut rng, 2, 1, 0.0).is_err());
        assert!(draw_noise(&mut rng, 2, 1, -1.0).is_err());
    }
}
