//! Closed-form error analysis: conditional and channel-averaged pairwise error
//! probabilities and the union bound on the average bit error rate.
//!
//! Noise convention: `sigma2` is the reference noise variance
//! `P_T / 10^(snr_db/10)`. Each subband receiver sees `N * sigma2`, so the
//! conditional pairwise error of the subband-combining ML detector is
//! `Q(sqrt(sum_n |scale * Phi_n|^2 / (2 N sigma2)))` exactly.

use nalgebra::DVector;
use statrs::function::erf::erfc;

use crate::channel::ChannelTensor;
use crate::codebook::Codebook;
use crate::detection::EffectiveConstellation;
use crate::error::{invalid, Result};
use crate::linalg::{hermitian_inv_sqrt, CMatrix};
use crate::waveform::NullspaceBasis;
use crate::C64;

/// Gaussian tail probability.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Per-subband receiver noise variance for reference variance `sigma2`.
pub fn subband_noise_variance(sigma2: f64, n_subbands: usize) -> f64 {
    sigma2 * n_subbands as f64
}

/// `Phi = H_n (x_j - x_k)` on one subband.
pub fn phi_vector(codebook: &Codebook, h: &CMatrix, j: usize, k: usize) -> DVector<C64> {
    let diff = &codebook.words[j].tx_vector - &codebook.words[k].tx_vector;
    h * diff
}

/// [`phi_vector`] for every subband of a channel tensor.
pub fn phi_subbands(codebook: &Codebook, h: &ChannelTensor, j: usize, k: usize) -> Vec<DVector<C64>> {
    h.gains.iter().map(|hn| phi_vector(codebook, hn, j, k)).collect()
}

/// `gamma = sum_n |scale * Phi_n|^2 / (2 N sigma2)` with `N = phi.len()`.
pub fn gamma_ir(phi: &[DVector<C64>], scale: f64, sigma2: f64) -> f64 {
    let n = phi.len() as f64;
    let energy: f64 = phi.iter().map(|p| p.norm_squared()).sum();
    scale * scale * energy / (2.0 * n * sigma2)
}

/// Conditional pairwise error probability at the IR.
pub fn cpep(phi: &[DVector<C64>], scale: f64, sigma2: f64) -> f64 {
    q_function(gamma_ir(phi, scale, sigma2).sqrt())
}

fn xi(nu_bar: f64) -> f64 {
    let h = nu_bar / 2.0;
    (1.0 - (h / (1.0 + h)).sqrt()) / 2.0
}

/// Pairwise error averaged over `n_rx` i.i.d. Rayleigh branches with mean
/// per-branch SNR `nu_bar`.
pub fn average_pep(nu_bar: f64, n_rx: usize) -> f64 {
    let x = xi(nu_bar.max(0.0));
    let mut sum = 0.0;
    let mut binom = 1.0; // C(n_rx - 1 + i, i)
    for i in 0..n_rx {
        if i > 0 {
            binom *= (n_rx - 1 + i) as f64 / i as f64;
        }
        sum += binom * (1.0 - x).powi(i as i32);
    }
    x.powi(n_rx as i32) * sum
}

/// Mean per-branch SNR of a codeword pair under i.i.d. `CN(0, path_gain)`
/// channel entries that are flat across subbands:
/// `lambda_s2 |x_j - x_k|^2 path_gain / (2 N sigma2)`.
pub fn nu_bar(lambda_s2: f64, diff_norm2: f64, path_gain: f64, sigma2: f64, n_subbands: usize) -> f64 {
    lambda_s2 * diff_norm2 * path_gain / (2.0 * n_subbands as f64 * sigma2)
}

/// Union bound `(1/eta)(1/L) sum_j sum_{k != j} e(j,k) P(j -> k)` for an
/// arbitrary pairwise error function.
pub fn union_bound(codebook: &Codebook, pep: impl Fn(usize, usize) -> f64) -> f64 {
    let l = codebook.len();
    let mut total = 0.0;
    for j in 0..l {
        for k in 0..l {
            if j != k {
                total += codebook.bit_errors(j, k) as f64 * pep(j, k);
            }
        }
    }
    total / (codebook.eta as f64 * l as f64)
}

/// Union-bound ABER with the Rayleigh-averaged pairwise error.
pub fn aber_union_bound(codebook: &Codebook, nu_bar_fn: impl Fn(usize, usize) -> f64, n_rx: usize) -> f64 {
    union_bound(codebook, |j, k| average_pep(nu_bar_fn(j, k), n_rx))
}

/// Closed-form IR ABER for flat Rayleigh subbands.
pub fn aber_ir_analytic(codebook: &Codebook, lambda_s2: f64, path_gain: f64, sigma2: f64, n_subbands: usize, n_rx: usize) -> f64 {
    aber_union_bound(
        codebook,
        |j, k| {
            let d = (&codebook.words[j].tx_vector - &codebook.words[k].tx_vector).norm_squared();
            nu_bar(lambda_s2, d, path_gain, sigma2, n_subbands)
        },
        n_rx,
    )
}

/// Interference-plus-noise covariance at the eavesdropper on one subband:
/// `lambda_u2 / (N (n_t - r)) G P G^H + noise_var I`, with `P` the
/// projector onto the IR nullspace and `noise_var` the subband receiver noise.
pub fn eve_covariance(g: &CMatrix, basis: &NullspaceBasis, lambda_u2: f64, noise_var: f64, n_subbands: usize) -> CMatrix {
    let n_eve = g.nrows();
    let mut c = CMatrix::identity(n_eve, n_eve) * C64::new(noise_var, 0.0);
    if lambda_u2 > 0.0 && !basis.is_empty() {
        let gv = g * &basis.basis;
        let w = lambda_u2 / (n_subbands as f64 * basis.dim() as f64);
        c += (&gv * gv.adjoint()) * C64::new(w, 0.0);
    }
    c
}

/// Whitening matrix `sqrt(noise_var) C^{-1/2}`, the identity when there is no AN.
pub fn whitening_matrix(c: &CMatrix, noise_var: f64) -> Result<CMatrix> {
    Ok(hermitian_inv_sqrt(c)? * C64::new(noise_var.sqrt(), 0.0))
}

/// Conditional pairwise error at the eavesdropper after whitening each
/// subband by `Psi_n = sqrt(N sigma2) C_n^{-1/2}`.
pub fn cpep_eve(phi: &[DVector<C64>], covs: &[CMatrix], scale: f64, sigma2: f64) -> Result<f64> {
    if phi.len() != covs.len() {
        return Err(invalid("one covariance per subband required"));
    }
    let noise_var = subband_noise_variance(sigma2, phi.len());
    let whitened = phi
        .iter()
        .zip(covs)
        .map(|(p, c)| Ok(whitening_matrix(c, noise_var)? * p))
        .collect::<Result<Vec<_>>>()?;
    Ok(cpep(&whitened, scale, sigma2))
}

/// Union bound at the eavesdropper for one channel realization, using the
/// whitened conditional pairwise errors.
pub fn aber_eve_conditional(
    codebook: &Codebook,
    g: &ChannelTensor,
    bases: &[NullspaceBasis],
    lambda_s2: f64,
    lambda_u2: f64,
    sigma2: f64,
) -> Result<f64> {
    let n = g.n_subbands();
    let noise_var = subband_noise_variance(sigma2, n);
    let mats = g
        .gains
        .iter()
        .zip(bases)
        .map(|(gn, b)| {
            let c = eve_covariance(gn, b, lambda_u2, noise_var, n);
            Ok(whitening_matrix(&c, noise_var)? * gn)
        })
        .collect::<Result<Vec<_>>>()?;
    let scale = (lambda_s2 / n as f64).sqrt();
    let pts = EffectiveConstellation::new(codebook, &mats, scale);
    let denom = 2.0 * noise_var;
    Ok(union_bound(codebook, |j, k| {
        let d: f64 = pts.point(j).iter().zip(pts.point(k)).map(|(a, b)| (a - b).norm_sqr()).sum();
        q_function((d / denom).sqrt())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_channel, Link};
    use crate::codebook::{SchemeKind, SchemeSpec};
    use crate::waveform::nullspace_basis;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cb(kind: SchemeKind, n_t: usize, n_a: usize, m: usize) -> Codebook {
        Codebook::build(SchemeSpec::new(kind, n_t, n_a, m).unwrap()).unwrap()
    }

    #[test]
    fn q_limits() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-15);
        assert!(q_function(40.0) < 1e-300);
        let q1 = q_function(1.0);
        assert!((q1 - 0.158_655_253_931_457_05).abs() < 1e-10, "{q1}");
    }

    #[test]
    fn phi_zero_on_diagonal_and_column_difference_for_ssk() {
        let c = cb(SchemeKind::Ssk, 4, 1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let h = draw_channel(&mut rng, Link::Ir, 2, 4, 1, true, None).unwrap();
        assert_eq!(phi_vector(&c, &h.gains[0], 2, 2).norm(), 0.0);
        let phi = phi_vector(&c, &h.gains[0], 1, 3);
        let expect = h.gains[0].column(1) - h.gains[0].column(3);
        assert!((phi - expect).norm() < 1e-14);
    }

    #[test]
    fn gssk_shared_column_cancels() {
        let c = cb(SchemeKind::Gssk, 4, 2, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = draw_channel(&mut rng, Link::Ir, 2, 4, 1, true, None).unwrap();
        // labels 0 -> {0,1} and 1 -> {0,2} share antenna 0
        let phi = phi_vector(&c, &h.gains[0], 0, 1);
        let expect = (h.gains[0].column(1) - h.gains[0].column(2)) * C64::new(1.0 / 2f64.sqrt(), 0.0);
        assert!((phi - expect).norm() < 1e-14);
    }

    #[test]
    fn cpep_limits() {
        let zero = vec![DVector::<C64>::zeros(2)];
        assert!((cpep(&zero, 1.0, 1.0) - 0.5).abs() < 1e-15);
        let big = vec![DVector::from_element(2, C64::new(1e4, 0.0))];
        assert!(cpep(&big, 1.0, 1e-3) < 1e-300);
    }

    #[test]
    fn gamma_is_unchanged_by_replicating_subbands() {
        let phi = vec![DVector::from_vec(vec![C64::new(0.3, -1.0), C64::new(2.0, 0.5)])];
        let g1 = gamma_ir(&phi, 0.8, 0.2);
        let g2 = gamma_ir(&[phi[0].clone(), phi[0].clone()], 0.8, 0.2);
        assert!((g1 - g2).abs() < 1e-14 * g1);
    }

    #[test]
    fn average_pep_limits() {
        assert!((average_pep(0.0, 1) - 0.5).abs() < 1e-15);
        assert!((average_pep(0.0, 3) - 0.5).abs() < 1e-12);
        assert!(average_pep(1e12, 2) < 1e-20);
    }

    #[test]
    fn union_bound_for_a_binary_codebook_is_the_pep() {
        let c = cb(SchemeKind::Ssk, 2, 1, 1);
        let p = aber_union_bound(&c, |_, _| 3.0, 2);
        assert!((p - average_pep(3.0, 2)).abs() < 1e-15);
    }

    #[test]
    fn eve_covariance_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = draw_channel(&mut rng, Link::Ir, 2, 4, 1, true, None).unwrap();
        let g = draw_channel(&mut rng, Link::Eve, 2, 4, 1, true, None).unwrap();
        let b = nullspace_basis(&h.gains[0]);
        let c0 = eve_covariance(&g.gains[0], &b, 0.0, 0.3, 1);
        assert!((c0 - CMatrix::identity(2, 2) * C64::new(0.3, 0.0)).norm() < 1e-15);
        let c = eve_covariance(&g.gains[0], &b, 2.0, 0.3, 1);
        assert!((&c - c.adjoint()).norm() < 1e-12);
        let eig = c.symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l >= 0.3 - 1e-12));
    }

    #[test]
    fn cpep_eve_reduces_to_cpep_without_an() {
        let c = cb(SchemeKind::Qssk, 4, 1, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = draw_channel(&mut rng, Link::Eve, 2, 4, 3, false, None).unwrap();
        let sigma2 = 0.05;
        let noise_var = subband_noise_variance(sigma2, 3);
        let covs = vec![CMatrix::identity(2, 2) * C64::new(noise_var, 0.0); 3];
        let phi = phi_subbands(&c, &g, 3, 9);
        let a = cpep_eve(&phi, &covs, 0.6, sigma2).unwrap();
        let b = cpep(&phi, 0.6, sigma2);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn cpep_eve_grows_with_an_power() {
        let c = cb(SchemeKind::Gsm, 4, 2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = draw_channel(&mut rng, Link::Ir, 2, 4, 1, true, None).unwrap();
        let g = draw_channel(&mut rng, Link::Eve, 2, 4, 1, true, None).unwrap();
        let b = nullspace_basis(&h.gains[0]);
        let phi = phi_subbands(&c, &g, 0, 5);
        let mut last = 0.0;
        for lu in [0.0, 0.1, 1.0, 10.0, 100.0] {
            let cov = eve_covariance(&g.gains[0], &b, lu, 0.1, 1);
            let p = cpep_eve(&phi, &[cov], 1.0, 0.1).unwrap();
            assert!(p >= last, "lambda_u2 = {lu}");
            assert!(p <= 0.5);
            last = p;
        }
    }
}
