//! Seeded Monte Carlo sweeps over SNR, power split and subband count.
//!
//! Trial `t` of every sweep point draws from `trial_rng(seed, tag, key, t)`.
//! The key leaves out the swept SNR (and, for `z_DC`, the power split), so
//! neighbouring points reuse the same channels and noise shapes.

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{draw_channel, draw_noise, ChannelTensor, Link, NoiseDraw};
use crate::codebook::{Codebook, SchemeSpec};
use crate::detection::{ml_detect, ml_detect_eve};
use crate::error::Result;
use crate::error_rate::{aber_eve_conditional, aber_ir_analytic, eve_covariance, subband_noise_variance, whitening_matrix};
use crate::harness::config::ExperimentConfig;
use crate::harvester::{signal_moments, total_dc_power, z_dc};
use crate::linalg::CMatrix;
use crate::secrecy::{ergodic_secrecy_rate, EsrSetup};
use crate::stream::trial_rng;
use crate::waveform::{
    compose_transmit, generate_an, generate_an_coherent, nullspace_bases, passband_samples_eh, receive_baseband,
    NullspaceBasis, PassbandGrid, PowerSplit,
};
use crate::C64;
use nalgebra::DVector;

/// CSV-safe scheme label, `KIND:n_t:n_a:m`.
pub fn scheme_label(spec: &SchemeSpec) -> String {
    format!("{}:{}:{}:{}", spec.kind, spec.n_t, spec.n_a, spec.m)
}

fn point_key(scheme: usize, n_idx: usize, rho_idx: usize) -> u64 {
    ((scheme as u64) << 32) | ((n_idx as u64) << 16) | rho_idx as u64
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerRow {
    pub scheme: String,
    pub n_subbands: usize,
    pub rho: f64,
    pub snr_db: f64,
    pub ber_ir: f64,
    pub ber_ir_std_err: f64,
    pub aber_ir_analytic: f64,
    pub ber_eve: Option<f64>,
    pub ber_eve_std_err: Option<f64>,
    pub aber_eve_analytic: Option<f64>,
    pub n_trials: usize,
    /// Fewer than `100 / BER` trials (or no errors observed at all).
    pub low_confidence: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZdcRow {
    pub scheme: String,
    pub n_subbands: usize,
    pub rho: f64,
    /// Mean of the per-realization `z_DC` summed over the EH rectennas.
    pub z_dc: f64,
    pub std_err: f64,
    /// Mean DC-combined output power `sum_q vout_q^2 / R_L`.
    pub p_dc_w: f64,
    pub n_trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EsrRow {
    pub scheme: String,
    pub rho: f64,
    pub n_subbands: usize,
    pub snr_db: f64,
    pub esr_bits: f64,
    pub std_err: f64,
    pub mean_mi_ir: f64,
    pub mean_mi_eve: f64,
    pub n_channels: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRow {
    pub scheme: String,
    pub snr_db: f64,
    pub aber_analytic: f64,
    pub aber_simulated: f64,
    pub aber_eve_analytic: f64,
    pub aber_eve_simulated: f64,
}

/// Bit-error sums over a block of trials. Integer sums keep the aggregate
/// independent of how trials are split across workers.
#[derive(Debug, Clone, Copy, Default)]
struct BitTally {
    n: u64,
    ir: u64,
    ir_sq: u64,
    eve: u64,
    eve_sq: u64,
}

impl BitTally {
    fn merge(self, o: Self) -> Self {
        Self { n: self.n + o.n, ir: self.ir + o.ir, ir_sq: self.ir_sq + o.ir_sq, eve: self.eve + o.eve, eve_sq: self.eve_sq + o.eve_sq }
    }

    fn rate(sum: u64, sum_sq: u64, n: u64, eta: usize) -> (f64, f64) {
        let n_f = n as f64;
        let eta = eta as f64;
        let mean = sum as f64 / n_f;
        let var = if n > 1 { ((sum_sq as f64) - n_f * mean * mean).max(0.0) / (n_f - 1.0) } else { 0.0 };
        (mean / eta, (var / n_f).sqrt() / eta)
    }
}

/// Everything one BER trial needs besides its random stream.
pub struct BerContext<'a> {
    pub codebook: &'a Codebook,
    pub n_ir: usize,
    pub n_eve: Option<usize>,
    pub n_subbands: usize,
    pub flat_subbands: bool,
    pub split: PowerSplit,
    pub sigma2: f64,
    pub d_ir: Option<f64>,
    pub d_eve: Option<f64>,
    pub whiten: bool,
    pub noiseless: bool,
}

/// Bit errors at the IR and (when configured) the eavesdropper for one
/// channel use.
pub fn ber_trial<R: Rng + ?Sized>(ctx: &BerContext<'_>, rng: &mut R) -> Result<(u32, u32)> {
    let cb = ctx.codebook;
    let n = ctx.n_subbands;
    let n_t = cb.spec.n_t;
    let label = rng.random_range(0..cb.len());
    let h = draw_channel(rng, Link::Ir, ctx.n_ir, n_t, n, ctx.flat_subbands, ctx.d_ir)?;
    let g = match ctx.n_eve {
        Some(n_eve) => Some(draw_channel(rng, Link::Eve, n_eve, n_t, n, ctx.flat_subbands, ctx.d_eve)?),
        None => None,
    };
    let noise_var = subband_noise_variance(ctx.sigma2, n);
    let noise = |rx: usize, rng: &mut R| {
        if ctx.noiseless {
            Ok(NoiseDraw::zeros(rx, n))
        } else {
            draw_noise(rng, rx, n, noise_var)
        }
    };
    let z_ir = noise(ctx.n_ir, rng)?;
    let z_eve = match &g {
        Some(g) => Some(noise(g.n_rx(), rng)?),
        None => None,
    };
    let bases = if ctx.split.lambda_u2 > 0.0 { Some(nullspace_bases(&h)) } else { None };
    let eps = match &bases {
        Some(b) => generate_an(rng, b, ctx.split.lambda_u2)?,
        None => vec![DVector::zeros(n_t); n],
    };

    let w = compose_transmit(&cb.words[label], &ctx.split, n);
    let scale = ctx.split.scale(n);
    let y = receive_baseband(&h, &w, &eps, &z_ir)?;
    let ir_errors = cb.bit_errors(label, ml_detect(cb, &h, &y, scale)?.label_hat);

    let eve_errors = match (&g, &z_eve) {
        (Some(g), Some(z)) => {
            let y = receive_baseband(g, &w, &eps, z)?;
            let psi = if ctx.whiten { Some(whiteners(g, bases.as_deref(), &ctx.split, noise_var)?) } else { None };
            cb.bit_errors(label, ml_detect_eve(cb, g, &y, scale, psi.as_deref())?.label_hat)
        }
        _ => 0,
    };
    Ok((ir_errors, eve_errors))
}

fn whiteners(g: &ChannelTensor, bases: Option<&[NullspaceBasis]>, split: &PowerSplit, noise_var: f64) -> Result<Vec<CMatrix>> {
    let n = g.n_subbands();
    (0..n)
        .map(|i| {
            let c = match bases {
                Some(b) => eve_covariance(g.subband(i), &b[i], split.lambda_u2, noise_var, n),
                None => CMatrix::identity(g.n_rx(), g.n_rx()) * C64::new(noise_var, 0.0),
            };
            whitening_matrix(&c, noise_var)
        })
        .collect()
}

const BLOCK: u64 = 1024;

fn run_ber_point(ctx: &BerContext<'_>, seed: u64, key: u64, trials: usize) -> Result<BitTally> {
    let trials = trials as u64;
    let blocks = trials.div_ceil(BLOCK);
    (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut tally = BitTally::default();
            for t in b * BLOCK..((b + 1) * BLOCK).min(trials) {
                let (ir, eve) = ber_trial(ctx, &mut trial_rng(seed, "ber", key, t))?;
                let (ir, eve) = (ir as u64, eve as u64);
                tally = tally.merge(BitTally { n: 1, ir, ir_sq: ir * ir, eve, eve_sq: eve * eve });
            }
            Ok(tally)
        })
        .try_reduce(BitTally::default, |a, b| Ok(a.merge(b)))
}

/// Channel-averaged conditional union bound at the eavesdropper.
pub fn aber_eve_analytic(cfg: &ExperimentConfig, codebook: &Codebook, n: usize, split: &PowerSplit, sigma2: f64, key: u64) -> Result<f64> {
    let n_t = codebook.spec.n_t;
    let values = (0..cfg.analytic_channels as u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = trial_rng(cfg.seed, "ber-eve-analytic", key, c);
            let h = draw_channel(&mut rng, Link::Ir, cfg.n_ir, n_t, n, cfg.flat_subbands, cfg.d_ir)?;
            let g = draw_channel(&mut rng, Link::Eve, cfg.n_eve, n_t, n, cfg.flat_subbands, cfg.d_eve)?;
            let bases = nullspace_bases(&h);
            aber_eve_conditional(codebook, &g, &bases, split.lambda_s2, split.lambda_u2, sigma2)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Simulated and union-bound ABER at the IR (and the eavesdropper when
/// `eve` is set) for every scheme, subband count, power split and SNR.
pub fn run_ber_sweep(cfg: &ExperimentConfig) -> Result<Vec<BerRow>> {
    cfg.validate()?;
    let specs = cfg.specs()?;
    let codebooks = specs.iter().map(|s| Codebook::build(*s)).collect::<Result<Vec<_>>>()?;
    let ir_gain = crate::channel::path_gain(cfg.d_ir)?;
    let mut rows = Vec::new();
    for (s, cb) in codebooks.iter().enumerate() {
        for (ni, &n) in cfg.n_subbands.iter().enumerate() {
            for (ri, &rho) in cfg.rho.iter().enumerate() {
                let split = PowerSplit::new(cfg.p_t(), rho)?;
                let key = point_key(s, ni, ri);
                for &snr_db in &cfg.snr_db {
                    let sigma2 = cfg.sigma2(snr_db);
                    let ctx = BerContext {
                        codebook: cb,
                        n_ir: cfg.n_ir,
                        n_eve: cfg.eve.then_some(cfg.n_eve),
                        n_subbands: n,
                        flat_subbands: cfg.flat_subbands,
                        split,
                        sigma2,
                        d_ir: cfg.d_ir,
                        d_eve: cfg.d_eve,
                        whiten: cfg.whiten,
                        noiseless: cfg.noiseless,
                    };
                    let tally = run_ber_point(&ctx, cfg.seed, key, cfg.trials)?;
                    let (ber_ir, ber_ir_se) = BitTally::rate(tally.ir, tally.ir_sq, tally.n, cb.eta);
                    let (eve, eve_se, eve_an) = if cfg.eve {
                        let (b, se) = BitTally::rate(tally.eve, tally.eve_sq, tally.n, cb.eta);
                        (Some(b), Some(se), Some(aber_eve_analytic(cfg, cb, n, &split, sigma2, key)?))
                    } else {
                        (None, None, None)
                    };
                    rows.push(BerRow {
                        scheme: scheme_label(&cb.spec),
                        n_subbands: n,
                        rho,
                        snr_db,
                        ber_ir,
                        ber_ir_std_err: ber_ir_se,
                        aber_ir_analytic: aber_ir_analytic(cb, split.lambda_s2, ir_gain, sigma2, n, cfg.n_ir),
                        ber_eve: eve,
                        ber_eve_std_err: eve_se,
                        aber_eve_analytic: eve_an,
                        n_trials: cfg.trials,
                        low_confidence: ber_ir == 0.0 || (cfg.trials as f64) < 100.0 / ber_ir,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// IR and eavesdropper ABER next to their union bounds. Requires a single
/// subband count and power split.
pub fn run_analysis(cfg: &ExperimentConfig) -> Result<Vec<AnalysisRow>> {
    if cfg.n_subbands.len() != 1 || cfg.rho.len() != 1 {
        return Err(crate::error::invalid("analysis needs exactly one n_subbands and one rho value"));
    }
    let cfg = ExperimentConfig { eve: true, ..cfg.clone() };
    Ok(run_ber_sweep(&cfg)?
        .into_iter()
        .map(|r| AnalysisRow {
            scheme: r.scheme,
            snr_db: r.snr_db,
            aber_analytic: r.aber_ir_analytic,
            aber_simulated: r.ber_ir,
            aber_eve_analytic: r.aber_eve_analytic.unwrap_or(f64::NAN),
            aber_eve_simulated: r.ber_eve.unwrap_or(f64::NAN),
        })
        .collect())
}

/// Harvesting metrics of one realization: `(sum_q z_DC,q, sum_q vout_q^2 / R_L)`.
pub fn zdc_trial<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    codebook: &Codebook,
    split: &PowerSplit,
    grid: &PassbandGrid,
    rng: &mut R,
) -> Result<(f64, f64)> {
    let n = grid.n_subbands;
    let n_t = codebook.spec.n_t;
    let label = rng.random_range(0..codebook.len());
    let h = draw_channel(rng, Link::Ir, cfg.n_ir, n_t, n, cfg.flat_subbands, cfg.d_ir)?;
    let g = draw_channel(rng, Link::Eh, cfg.rectenna.n_eh, n_t, n, cfg.flat_subbands, cfg.d_eh)?;
    let eps = if split.lambda_u2 > 0.0 {
        generate_an_coherent(rng, &nullspace_bases(&h), split.lambda_u2)?
    } else {
        vec![DVector::zeros(n_t); n]
    };
    let w = compose_transmit(&codebook.words[label], split, n);
    let mut z = 0.0;
    let mut powers = Vec::with_capacity(g.n_rx());
    for y in passband_samples_eh(&g, &w, &eps, grid)? {
        let m = signal_moments(&y)?;
        z += z_dc(&m, &cfg.rectenna);
        powers.push(m.m2);
    }
    Ok((z, total_dc_power(&powers, &cfg.rectenna)?))
}

/// Per-realization `z_DC` samples for one operating point. Realization `t`
/// uses the same stream for every power split and subband count, so samples
/// at different points are paired.
pub fn zdc_samples(cfg: &ExperimentConfig, codebook: &Codebook, scheme_idx: usize, n: usize, rho: f64) -> Result<Vec<(f64, f64)>> {
    let split = PowerSplit::new(cfg.p_t(), rho)?;
    let grid = PassbandGrid::standard(cfg.f1_hz, cfg.delta_f_hz, n)?;
    (0..cfg.zdc_trials as u64)
        .into_par_iter()
        .map(|t| zdc_trial(cfg, codebook, &split, &grid, &mut trial_rng(cfg.seed, "zdc", scheme_idx as u64, t)))
        .collect()
}

pub fn mean_and_std_err(samples: &[f64]) -> (f64, f64) {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    if samples.len() < 2 {
        return (mean, 0.0);
    }
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

pub fn run_zdc_sweep(cfg: &ExperimentConfig) -> Result<Vec<ZdcRow>> {
    cfg.validate()?;
    let specs = cfg.specs()?;
    let mut rows = Vec::new();
    for (s, spec) in specs.iter().enumerate() {
        let cb = Codebook::build(*spec)?;
        for &n in &cfg.n_subbands {
            for &rho in &cfg.rho {
                let samples = zdc_samples(cfg, &cb, s, n, rho)?;
                let z: Vec<f64> = samples.iter().map(|p| p.0).collect();
                let (mean, se) = mean_and_std_err(&z);
                rows.push(ZdcRow {
                    scheme: scheme_label(spec),
                    n_subbands: n,
                    rho,
                    z_dc: mean,
                    std_err: se,
                    p_dc_w: samples.iter().map(|p| p.1).sum::<f64>() / samples.len() as f64,
                    n_trials: samples.len(),
                });
            }
        }
    }
    Ok(rows)
}

pub fn run_esr_sweep(cfg: &ExperimentConfig) -> Result<Vec<EsrRow>> {
    cfg.validate()?;
    let specs = cfg.specs()?;
    let mut rows = Vec::new();
    for (s, spec) in specs.iter().enumerate() {
        let cb = Codebook::build(*spec)?;
        for &rho in &cfg.rho {
            let split = PowerSplit::new(cfg.p_t(), rho)?;
            for &n in &cfg.n_subbands {
                for &snr_db in &cfg.snr_db {
                    let setup = EsrSetup {
                        codebook: &cb,
                        n_ir: cfg.n_ir,
                        n_eve: cfg.n_eve,
                        n_subbands: n,
                        flat_subbands: cfg.flat_subbands,
                        split,
                        sigma2: cfg.sigma2(snr_db),
                        d_ir: cfg.d_ir,
                        d_eve: cfg.d_eve,
                        n_channels: cfg.n_channels,
                        n_noise: cfg.n_noise,
                    };
                    let p = ergodic_secrecy_rate(&setup, cfg.seed, s as u64)?;
                    rows.push(EsrRow {
                        scheme: scheme_label(spec),
                        rho,
                        n_subbands: n,
                        snr_db,
                        esr_bits: p.esr,
                        std_err: p.std_err,
                        mean_mi_ir: p.mean_mi_ir,
                        mean_mi_eve: p.mean_mi_eve,
                        n_channels: p.n_channels,
                    });
                }
            }
        }
    }
    Ok(rows)
}
