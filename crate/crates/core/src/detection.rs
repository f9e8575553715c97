//! Exhaustive maximum-likelihood detection.
//!
//! Every scheme reduces to the same search,
//! `argmin_x sum_n |y_n - scale * H_n x|^2`, because the codebook's transmit
//! vectors already carry the active-antenna pattern, the quadrature split and
//! the QAM symbol.

use nalgebra::DVector;

use crate::channel::ChannelTensor;
use crate::codebook::Codebook;
use crate::error::{invalid, Result};
use crate::linalg::CMatrix;
use crate::C64;

/// Noiseless received points `scale * M_n x_l`, concatenated over subbands.
#[derive(Debug, Clone)]
pub struct EffectiveConstellation {
    dim: usize,
    points: Vec<C64>,
}

impl EffectiveConstellation {
    pub fn new(codebook: &Codebook, mats: &[CMatrix], scale: f64) -> Self {
        let n_rx = mats[0].nrows();
        let dim = n_rx * mats.len();
        let flat = mats.windows(2).all(|p| p[0] == p[1]);
        let s = C64::new(scale, 0.0);
        let mut points = vec![C64::new(0.0, 0.0); dim * codebook.len()];
        for (w, chunk) in codebook.words.iter().zip(points.chunks_mut(dim)) {
            if flat {
                w.project_into(&mats[0], s, &mut chunk[..n_rx]);
                for n in 1..mats.len() {
                    chunk.copy_within(0..n_rx, n * n_rx);
                }
            } else {
                for (n, m) in mats.iter().enumerate() {
                    w.project_into(m, s, &mut chunk[n * n_rx..(n + 1) * n_rx]);
                }
            }
        }
        Self { dim, points }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn point(&self, label: usize) -> &[C64] {
        &self.points[label * self.dim..(label + 1) * self.dim]
    }

    /// Minimum-distance search; ties resolve to the smallest label.
    pub fn detect(&self, y: &[C64]) -> DetectionResult {
        let mut best = (0usize, f64::INFINITY);
        let mut evaluations = 0;
        for (label, p) in self.points.chunks(self.dim).enumerate() {
            let metric: f64 = y.iter().zip(p).map(|(a, b)| (a - b).norm_sqr()).sum();
            evaluations += 1;
            if metric < best.1 {
                best = (label, metric);
            }
        }
        DetectionResult { label_hat: best.0, metric: best.1, evaluations }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionResult {
    pub label_hat: usize,
    /// Accumulated squared distance of the winning hypothesis.
    pub metric: f64,
    /// Number of hypotheses scored.
    pub evaluations: usize,
}

fn concat(y: &[DVector<C64>]) -> Vec<C64> {
    y.iter().flat_map(|v| v.iter().copied()).collect()
}

pub fn ml_detect(codebook: &Codebook, h: &ChannelTensor, y: &[DVector<C64>], scale: f64) -> Result<DetectionResult> {
    check_shapes(codebook, h, y)?;
    Ok(EffectiveConstellation::new(codebook, &h.gains, scale).detect(&concat(y)))
}

/// Detection at the eavesdropper. With `whiten` (one `sigma C^{-1/2}` per
/// subband) both the observation and the hypotheses are whitened; without it
/// the AN is treated as unmodelled interference.
pub fn ml_detect_eve(
    codebook: &Codebook,
    g: &ChannelTensor,
    y: &[DVector<C64>],
    scale: f64,
    whiten: Option<&[CMatrix]>,
) -> Result<DetectionResult> {
    check_shapes(codebook, g, y)?;
    match whiten {
        None => ml_detect(codebook, g, y, scale),
        Some(psi) => {
            if psi.len() != g.n_subbands() {
                return Err(invalid("one whitening matrix per subband required"));
            }
            let mats: Vec<CMatrix> = psi.iter().zip(&g.gains).map(|(p, gn)| p * gn).collect();
            let yw: Vec<DVector<C64>> = psi.iter().zip(y).map(|(p, yn)| p * yn).collect();
            Ok(EffectiveConstellation::new(codebook, &mats, scale).detect(&concat(&yw)))
        }
    }
}

fn check_shapes(codebook: &Codebook, h: &ChannelTensor, y: &[DVector<C64>]) -> Result<()> {
    if codebook.is_empty() {
        return Err(invalid("empty codebook"));
    }
    if h.n_t() != codebook.spec.n_t {
        return Err(invalid(format!("channel has {} transmit antennas, codebook {}", h.n_t(), codebook.spec.n_t)));
    }
    if y.len() != h.n_subbands() || y.iter().any(|v| v.len() != h.n_rx()) {
        return Err(invalid("observation shape does not match the channel"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channel, Link};
    use crate::codebook::{SchemeKind, SchemeSpec};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ssk(n_t: usize) -> Codebook {
        Codebook::build(SchemeSpec::new(SchemeKind::Ssk, n_t, 1, 1).unwrap()).unwrap()
    }

    #[test]
    fn zero_observation_ties_to_label_zero() {
        let cb = ssk(4);
        let h = ChannelTensor { link: Link::Ir, gains: vec![CMatrix::zeros(2, 4)], distance_m: None };
        let r = ml_detect(&cb, &h, &[DVector::zeros(2)], 1.0).unwrap();
        assert_eq!(r.label_hat, 0);
        assert_eq!(r.evaluations, 4);
    }

    #[test]
    fn nearest_column() {
        let cb = ssk(2);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = draw_channel(&mut rng, Link::Ir, 2, 2, 1, true, None).unwrap();
        let scale = 2.0;
        let mut y = h.gains[0].column(0) * C64::new(scale, 0.0);
        y[0] += C64::new(1e-3, -1e-3);
        let r = ml_detect(&cb, &h, &[y], scale).unwrap();
        assert_eq!(r.label_hat, 0);
    }

    #[test]
    fn eve_identity_whitening_matches_plain() {
        let cb = Codebook::build(SchemeSpec::new(SchemeKind::Gsm, 4, 2, 4).unwrap()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = draw_channel(&mut rng, Link::Eve, 2, 4, 2, false, None).unwrap();
        let y: Vec<DVector<C64>> = (0..2).map(|_| DVector::from_fn(2, |i, _| C64::new(i as f64 * 0.3, 0.1))).collect();
        let eye = vec![CMatrix::identity(2, 2); 2];
        let a = ml_detect_eve(&cb, &g, &y, 0.7, Some(&eye)).unwrap();
        let b = ml_detect(&cb, &g, &y, 0.7).unwrap();
        assert_eq!(a.label_hat, b.label_hat);
        assert!((a.metric - b.metric).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let cb = ssk(4);
        let h = ChannelTensor { link: Link::Ir, gains: vec![CMatrix::zeros(2, 3)], distance_m: None };
        assert!(ml_detect(&cb, &h, &[DVector::zeros(2)], 1.0).is_err());
    }
}
