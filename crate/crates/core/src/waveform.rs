//! Power split, artificial noise and waveform composition.
//!
//! Baseband quantities are stored per subband: `w[n]` is the IM waveform and
//! `eps[n]` the artificial noise (AN) on subband `n`. At baseband every
//! subband carries its own AN draw; the energy-harvester passband view places
//! the AN on the first carrier.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;

use crate::channel::{complex_normal, ChannelTensor, NoiseDraw};
use crate::codebook::Codeword;
use crate::error::{invalid, Result};
use crate::linalg::{self, CMatrix};
use crate::C64;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Total power `p_t` split into IM power `(1 - rho) p_t` and AN power `rho p_t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSplit {
    pub p_t: f64,
    pub rho: f64,
    pub lambda_s2: f64,
    pub lambda_u2: f64,
}

impl PowerSplit {
    pub fn new(p_t: f64, rho: f64) -> Result<Self> {
        if !(p_t > 0.0) || !p_t.is_finite() {
            return Err(invalid(format!("total power {p_t} W must be positive")));
        }
        if !(0.0..=1.0).contains(&rho) {
            return Err(invalid(format!("power allocation factor {rho} outside [0, 1]")));
        }
        let lambda_u2 = rho * p_t;
        Ok(Self { p_t, rho, lambda_s2: p_t - lambda_u2, lambda_u2 })
    }

    /// Per-subband amplitude scaling of a unit-power codeword, `sqrt(lambda_s2 / N)`.
    pub fn scale(&self, n_subbands: usize) -> f64 {
        (self.lambda_s2 / n_subbands as f64).sqrt()
    }
}

/// IM waveform and AN for every subband of one channel use.
#[derive(Debug, Clone)]
pub struct SubbandFrame {
    pub w: Vec<DVector<C64>>,
    pub eps: Vec<DVector<C64>>,
}

impl SubbandFrame {
    /// `sum_n |w_n|^2 + |eps_n|^2`.
    pub fn power(&self) -> f64 {
        self.w.iter().chain(&self.eps).map(|v| v.norm_squared()).sum()
    }
}

/// Orthonormal nullspace of one IR subband matrix and the matrix rank.
#[derive(Debug, Clone)]
pub struct NullspaceBasis {
    pub basis: CMatrix,
    pub rank: usize,
}

impl NullspaceBasis {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.basis.ncols() == 0
    }

    /// Projector onto the nullspace, `sum_i v_i v_i^H`.
    pub fn projector(&self) -> CMatrix {
        &self.basis * self.basis.adjoint()
    }
}

/// Right-singular vectors spanning the nullspace of `h` (`n_ir x n_t`).
/// The basis is empty when `h` has full column rank.
pub fn nullspace_basis(h: &CMatrix) -> NullspaceBasis {
    let (basis, rank) = linalg::nullspace_basis(h);
    NullspaceBasis { basis, rank }
}

/// Nullspace bases for every subband of the IR channel.
pub fn nullspace_bases(h_ir: &ChannelTensor) -> Vec<NullspaceBasis> {
    if h_ir.gains.windows(2).all(|p| p[0] == p[1]) {
        let b = nullspace_basis(&h_ir.gains[0]);
        vec![b; h_ir.n_subbands()]
    } else {
        h_ir.gains.iter().map(nullspace_basis).collect()
    }
}

/// AN with equal weights `delta_i = 1/sqrt(n_t - r)` and an independent
/// `u ~ CN(0, lambda_u2 / N)` draw on every subband.
pub fn generate_an<R: Rng + ?Sized>(rng: &mut R, bases: &[NullspaceBasis], lambda_u2: f64) -> Result<Vec<DVector<C64>>> {
    generate_an_weighted(rng, bases, lambda_u2, None)
}

/// As [`generate_an`] with explicit nullspace weights. `None` selects equal weights.
pub fn generate_an_weighted<R: Rng + ?Sized>(
    rng: &mut R,
    bases: &[NullspaceBasis],
    lambda_u2: f64,
    weights: Option<&[f64]>,
) -> Result<Vec<DVector<C64>>> {
    let n = bases.len();
    bases
        .iter()
        .map(|b| {
            let u = draw_an_coefficients(rng, b, lambda_u2 / n as f64, weights)?;
            Ok(&b.basis * u)
        })
        .collect()
}

/// AN as a single realization shared by all subband slots: the same
/// coefficient draw is mapped through each subband's nullspace.
pub fn generate_an_coherent<R: Rng + ?Sized>(rng: &mut R, bases: &[NullspaceBasis], lambda_u2: f64) -> Result<Vec<DVector<C64>>> {
    let n = bases.len();
    let first = bases.first().ok_or_else(|| invalid("no subbands"))?;
    let u = draw_an_coefficients(rng, first, lambda_u2 / n as f64, None)?;
    bases
        .iter()
        .map(|b| {
            if b.dim() != first.dim() {
                return Err(invalid("nullspace dimension differs across subbands"));
            }
            Ok(&b.basis * &u)
        })
        .collect()
}

fn draw_an_coefficients<R: Rng + ?Sized>(
    rng: &mut R,
    basis: &NullspaceBasis,
    power: f64,
    weights: Option<&[f64]>,
) -> Result<DVector<C64>> {
    let dim = basis.dim();
    if dim == 0 {
        return Err(invalid("empty nullspace: AN requires n_ir < n_t"));
    }
    if let Some(w) = weights {
        if w.len() != dim {
            return Err(invalid(format!("{} AN weights for a {dim}-dimensional nullspace", w.len())));
        }
    }
    let sd = power.sqrt();
    let equal = 1.0 / (dim as f64).sqrt();
    Ok(DVector::from_fn(dim, |i, _| {
        let delta = weights.map_or(equal, |w| w[i]);
        complex_normal(rng) * (sd * delta)
    }))
}

/// `w_n = sqrt(lambda_s2 / N) * x` on every subband.
pub fn compose_transmit(codeword: &Codeword, split: &PowerSplit, n_subbands: usize) -> Vec<DVector<C64>> {
    let scale = split.scale(n_subbands);
    let w = codeword.tx_vector.map(|v| v * scale);
    vec![w; n_subbands]
}

/// `y_n = H_n (w_n + eps_n) + z_n`.
pub fn receive_baseband(
    h: &ChannelTensor,
    w: &[DVector<C64>],
    eps: &[DVector<C64>],
    noise: &NoiseDraw,
) -> Result<Vec<DVector<C64>>> {
    let n = h.n_subbands();
    if w.len() != n || eps.len() != n || noise.samples.len() != n {
        return Err(invalid("subband count mismatch"));
    }
    (0..n)
        .map(|i| {
            let x = &w[i] + &eps[i];
            if x.len() != h.n_t() || noise.samples[i].len() != h.n_rx() {
                return Err(invalid("antenna count mismatch"));
            }
            Ok(h.subband(i) * x + &noise.samples[i])
        })
        .collect()
}

/// Uniform time grid over an integer number of periods of every tone.
#[derive(Debug, Clone)]
pub struct PassbandGrid {
    pub f1_hz: f64,
    pub delta_f_hz: f64,
    pub n_subbands: usize,
    pub sample_rate: f64,
    pub duration: f64,
    /// `phasors[n][k] = exp(j 2 pi f_n t_k)`.
    phasors: Vec<Vec<C64>>,
}

impl PassbandGrid {
    pub fn new(f1_hz: f64, delta_f_hz: f64, n_subbands: usize, sample_rate: f64, duration: f64) -> Result<Self> {
        if n_subbands == 0 || !(f1_hz > 0.0) || !(delta_f_hz > 0.0) || !(duration > 0.0) {
            return Err(invalid("passband grid needs positive frequencies, duration and N >= 1"));
        }
        let f_max = f1_hz + (n_subbands - 1) as f64 * delta_f_hz;
        if sample_rate < 10.0 * f_max * (1.0 - 1e-12) {
            return Err(invalid(format!(
                "sample rate {sample_rate} Hz is below 10x the highest carrier {f_max} Hz"
            )));
        }
        if n_subbands > 1 && duration * delta_f_hz < 1.0 - 1e-9 {
            return Err(invalid("window shorter than one beat period 1/delta_f"));
        }
        let freqs: Vec<f64> = (0..n_subbands).map(|n| f1_hz + n as f64 * delta_f_hz).collect();
        for f in &freqs {
            let cycles = f * duration;
            if (cycles - cycles.round()).abs() > 1e-6 {
                return Err(invalid(format!("window holds {cycles} periods of {f} Hz, not an integer")));
            }
        }
        let samples = (sample_rate * duration).round() as usize;
        let phasors = freqs
            .iter()
            .map(|&f| {
                let cycles = (f * duration).round();
                (0..samples)
                    .map(|k| C64::from_polar(1.0, 2.0 * PI * cycles * k as f64 / samples as f64))
                    .collect()
            })
            .collect();
        Ok(Self { f1_hz, delta_f_hz, n_subbands, sample_rate, duration, phasors })
    }

    /// 10x oversampling of the highest carrier; one beat period for `N > 1`,
    /// ten carrier periods for a single tone.
    pub fn standard(f1_hz: f64, delta_f_hz: f64, n_subbands: usize) -> Result<Self> {
        let f_max = f1_hz + (n_subbands.max(1) - 1) as f64 * delta_f_hz;
        let duration = if n_subbands > 1 { 1.0 / delta_f_hz } else { 10.0 / f1_hz };
        Self::new(f1_hz, delta_f_hz, n_subbands, 10.0 * f_max, duration)
    }

    pub fn len(&self) -> usize {
        self.phasors.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn frequency(&self, n: usize) -> f64 {
        self.f1_hz + n as f64 * self.delta_f_hz
    }

    /// `Re{ sum_n c_n exp(j 2 pi f_n t) }` on the grid.
    pub fn synthesize(&self, tones: &[C64]) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for (c, ph) in tones.iter().zip(&self.phasors) {
            for (o, p) in out.iter_mut().zip(ph) {
                *o += c.re * p.re - c.im * p.im;
            }
        }
        out
    }

    /// Complex analytic samples `sum_n c_n exp(j 2 pi f_n t)`.
    pub fn synthesize_analytic(&self, tones: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.len()];
        for (c, ph) in tones.iter().zip(&self.phasors) {
            for (o, p) in out.iter_mut().zip(ph) {
                *o += c * p;
            }
        }
        out
    }
}

/// Tone coefficients seen at each EH antenna: `G_n w_n` on carrier `n`, and
/// `sum_n G_n eps_n` added on the first carrier.
fn eh_tones(g: &ChannelTensor, w: &[DVector<C64>], eps: &[DVector<C64>]) -> Result<Vec<Vec<C64>>> {
    let n = g.n_subbands();
    if w.len() != n || eps.len() != n {
        return Err(invalid("subband count mismatch"));
    }
    let mut tones = vec![vec![C64::new(0.0, 0.0); n]; g.n_rx()];
    for i in 0..n {
        let sig = g.subband(i) * &w[i];
        let an = g.subband(i) * &eps[i];
        for q in 0..g.n_rx() {
            tones[q][i] += sig[q];
            tones[q][0] += an[q];
        }
    }
    Ok(tones)
}

/// Real passband samples at every EH antenna for one channel use.
pub fn passband_samples_eh(
    g: &ChannelTensor,
    w: &[DVector<C64>],
    eps: &[DVector<C64>],
    grid: &PassbandGrid,
) -> Result<Vec<Vec<f64>>> {
    if grid.n_subbands != g.n_subbands() {
        return Err(invalid("grid and channel disagree on the number of subbands"));
    }
    Ok(eh_tones(g, w, eps)?.iter().map(|t| grid.synthesize(t)).collect())
}

/// Time-averaged `sum_antennas |s(t)|^2` of the complex transmit waveform, with
/// `w_n` on carrier `n` and all AN on the first carrier.
pub fn mean_transmit_power(frame: &SubbandFrame, grid: &PassbandGrid) -> f64 {
    let n_t = frame.w[0].len();
    let n = frame.w.len();
    let mut total = 0.0;
    for a in 0..n_t {
        let mut tones = vec![C64::new(0.0, 0.0); n];
        for i in 0..n {
            tones[i] += frame.w[i][a];
            tones[0] += frame.eps[i][a];
        }
        total += grid.synthesize_analytic(&tones).iter().map(|s| s.norm_sqr()).sum::<f64>();
    }
    total / grid.len() as f64
}
