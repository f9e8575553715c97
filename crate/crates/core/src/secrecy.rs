//! Discrete-input mutual information and ergodic secrecy rate.
//!
//! The mutual information of a finite codebook observed through
//! `y = s_l + z`, `z ~ CN(0, noise_var I)`, is estimated as
//!
//! ```text
//! I = log2 L - 1/L sum_l E_z[ log2 sum_k exp(-(|s_l - s_k + z|^2 - |z|^2) / noise_var) ]
//! ```
//!
//! with the expectation replaced by an average over `n_noise` draws. The
//! points `s_l` are the noiseless received constellation concatenated over
//! subbands; the eavesdropper's points are whitened first.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{complex_normal, draw_channel, ChannelTensor, Link};
use crate::codebook::Codebook;
use crate::detection::EffectiveConstellation;
use crate::error::{invalid, Result};
use crate::error_rate::{eve_covariance, subband_noise_variance, whitening_matrix};
use crate::linalg::CMatrix;
use crate::stream::trial_rng;
use crate::waveform::{nullspace_bases, NullspaceBasis, PowerSplit};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    /// Clamped to `[0, log2 L]`.
    pub value: f64,
    /// Unclamped estimator output.
    pub raw: f64,
    pub std_err: f64,
    pub n_noise_samples: usize,
    pub n_channel_draws: usize,
    /// Two codewords share a received point, so `log2 L` is unreachable.
    pub degenerate: bool,
}

/// Monte Carlo mutual information of the constellation `points`.
pub fn mutual_information<R: Rng + ?Sized>(
    points: &EffectiveConstellation,
    noise_var: f64,
    n_noise: usize,
    rng: &mut R,
) -> Result<MiEstimate> {
    if !(noise_var > 0.0) {
        return Err(invalid(format!("noise variance {noise_var} must be positive")));
    }
    if n_noise < 100 {
        return Err(invalid(format!("n_noise = {n_noise} (need at least 100)")));
    }
    let l = points.len();
    let dim = points.dim();
    let mut dist = vec![0.0; l * l];
    let mut degenerate = false;
    for a in 0..l {
        for b in 0..l {
            let d: f64 = points.point(a).iter().zip(points.point(b)).map(|(x, y)| (x - y).norm_sqr()).sum();
            dist[a * l + b] = d;
            if a != b && d == 0.0 {
                degenerate = true;
            }
        }
    }

    let log2_l = (l as f64).log2();
    let mut z = vec![C64::new(0.0, 0.0); dim];
    let mut proj = vec![0.0; l];
    let mut exps = vec![0.0; l];
    let sd = noise_var.sqrt();
    let mut samples = Vec::with_capacity(n_noise);
    for _ in 0..n_noise {
        z.iter_mut().for_each(|v| *v = complex_normal(rng) * sd);
        for (k, p) in proj.iter_mut().enumerate() {
            *p = points.point(k).iter().zip(&z).map(|(s, zz)| (s.conj() * zz).re).sum();
        }
        let mut acc = 0.0;
        for t in 0..l {
            let row = &dist[t * l..(t + 1) * l];
            let mut max = f64::NEG_INFINITY;
            for k in 0..l {
                let e = -(row[k] + 2.0 * (proj[t] - proj[k])) / noise_var;
                exps[k] = e;
                max = max.max(e);
            }
            let s: f64 = exps.iter().map(|e| (e - max).exp()).sum();
            acc += (max + s.ln()) / std::f64::consts::LN_2;
        }
        samples.push(acc / l as f64);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let raw = log2_l - mean;
    Ok(MiEstimate {
        value: raw.clamp(0.0, log2_l),
        raw,
        std_err: (var / n).sqrt(),
        n_noise_samples: n_noise,
        n_channel_draws: 1,
        degenerate,
    })
}

/// Mutual information of a codebook seen through `scale * M_n` per subband.
pub fn mutual_info<R: Rng + ?Sized>(
    codebook: &Codebook,
    mats: &[CMatrix],
    scale: f64,
    noise_var: f64,
    n_noise: usize,
    rng: &mut R,
) -> Result<MiEstimate> {
    if mats.is_empty() {
        return Err(invalid("no subbands"));
    }
    mutual_information(&EffectiveConstellation::new(codebook, mats, scale), noise_var, n_noise, rng)
}

/// `max(0, I_IR - I_Eve)`.
pub fn secrecy_rate(mi_ir: &MiEstimate, mi_eve: &MiEstimate) -> f64 {
    (mi_ir.value - mi_eve.value).max(0.0)
}

/// Whitened eavesdropper channels `sqrt(noise_var) C_n^{-1/2} G_n`.
pub fn whitened_eve_channels(
    g: &ChannelTensor,
    bases: &[NullspaceBasis],
    lambda_u2: f64,
    noise_var: f64,
) -> Result<Vec<CMatrix>> {
    let n = g.n_subbands();
    g.gains
        .iter()
        .zip(bases)
        .map(|(gn, b)| {
            let c = eve_covariance(gn, b, lambda_u2, noise_var, n);
            Ok(whitening_matrix(&c, noise_var)? * gn)
        })
        .collect()
}

/// IR and eavesdropper mutual information for one channel realization. Both
/// estimates use the same noise stream.
pub fn link_mutual_information<R: Rng + Clone>(
    codebook: &Codebook,
    h_ir: &ChannelTensor,
    g_eve: &ChannelTensor,
    split: &PowerSplit,
    sigma2: f64,
    n_noise: usize,
    rng: &mut R,
) -> Result<(MiEstimate, MiEstimate)> {
    let n = h_ir.n_subbands();
    let noise_var = subband_noise_variance(sigma2, n);
    let scale = split.scale(n);
    let bases = nullspace_bases(h_ir);
    let eve_mats = whitened_eve_channels(g_eve, &bases, split.lambda_u2, noise_var)?;
    let mut rng_eve = rng.clone();
    let ir = mutual_info(codebook, &h_ir.gains, scale, noise_var, n_noise, rng)?;
    let eve = mutual_info(codebook, &eve_mats, scale, noise_var, n_noise, &mut rng_eve)?;
    Ok((ir, eve))
}

#[derive(Debug, Clone)]
pub struct EsrSetup<'a> {
    pub codebook: &'a Codebook,
    pub n_ir: usize,
    pub n_eve: usize,
    pub n_subbands: usize,
    pub flat_subbands: bool,
    pub split: PowerSplit,
    /// Reference noise variance `P_T / 10^(snr_db/10)`.
    pub sigma2: f64,
    pub d_ir: Option<f64>,
    pub d_eve: Option<f64>,
    pub n_channels: usize,
    pub n_noise: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsrPoint {
    pub esr: f64,
    pub std_err: f64,
    pub mean_mi_ir: f64,
    pub mean_mi_eve: f64,
    pub n_channels: usize,
}

/// Mean secrecy rate over independent IR/eavesdropper channel realizations.
/// Realization `c` draws from stream `trial_rng(seed, "esr", point_key, c)`.
pub fn ergodic_secrecy_rate(setup: &EsrSetup<'_>, seed: u64, point_key: u64) -> Result<EsrPoint> {
    if setup.n_channels < 100 {
        return Err(invalid(format!("n_channels = {} (need at least 100)", setup.n_channels)));
    }
    let n_t = setup.codebook.spec.n_t;
    let per_channel = (0..setup.n_channels as u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = trial_rng(seed, "esr", point_key, c);
            let h = draw_channel(&mut rng, Link::Ir, setup.n_ir, n_t, setup.n_subbands, setup.flat_subbands, setup.d_ir)?;
            let g = draw_channel(&mut rng, Link::Eve, setup.n_eve, n_t, setup.n_subbands, setup.flat_subbands, setup.d_eve)?;
            let (ir, eve) = link_mutual_information(setup.codebook, &h, &g, &setup.split, setup.sigma2, setup.n_noise, &mut rng)?;
            Ok((secrecy_rate(&ir, &eve), ir.value, eve.value))
        })
        .collect::<Result<Vec<_>>>()?;

    let n = per_channel.len() as f64;
    let esr = per_channel.iter().map(|r| r.0).sum::<f64>() / n;
    let var = per_channel.iter().map(|r| (r.0 - esr).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(EsrPoint {
        esr,
        std_err: (var / n).sqrt(),
        mean_mi_ir: per_channel.iter().map(|r| r.1).sum::<f64>() / n,
        mean_mi_eve: per_channel.iter().map(|r| r.2).sum::<f64>() / n,
        n_channels: per_channel.len(),
    })
}
