//! Built-in invariant suite behind `simlab validate`.

use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{complex_normal, draw_channel, Link};
use crate::codebook::{Codebook, SchemeKind, SchemeSpec};
use crate::detection::ml_detect;
use crate::error::Result;
use crate::error_rate::{cpep, eve_covariance, phi_subbands};
use crate::harvester::signal_moments;
use crate::secrecy::mutual_info;
use crate::waveform::{
    compose_transmit, generate_an, generate_an_weighted, mean_transmit_power, nullspace_bases, nullspace_basis,
    PassbandGrid, PowerSplit, SubbandFrame,
};
use crate::C64;
use nalgebra::DVector;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {:<28} {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Nullspace weights for the AN power check; `None` uses the equal weights.
    pub an_weights: Option<Vec<f64>>,
}

fn small_specs() -> Vec<SchemeSpec> {
    use SchemeKind::*;
    [(Ssk, 4, 1, 1), (Gssk, 5, 2, 1), (Sm, 4, 1, 4), (Gsm, 4, 2, 4), (Qssk, 4, 1, 1), (Gqssk, 4, 2, 1), (Qsm, 4, 1, 4), (Gqsm, 4, 2, 4)]
        .into_iter()
        .map(|(k, n_t, n_a, m)| SchemeSpec::new(k, n_t, n_a, m).expect("static spec"))
        .collect()
}

fn check_codebooks() -> Result<Check> {
    let mut worst_power = 0.0f64;
    let mut ok = true;
    for spec in small_specs() {
        let cb = Codebook::build(spec)?;
        worst_power = worst_power.max((cb.mean_power() - 1.0).abs());
        ok &= cb.words.iter().enumerate().all(|(l, w)| w.label == l && cb.label_of(&w.tx_vector) == Some(l));
    }
    Ok(Check {
        name: "codebook_bijective_unit_power",
        passed: ok && worst_power < 1e-12,
        detail: format!("max |mean power - 1| = {worst_power:.2e}"),
    })
}

fn check_nullspace(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let h = draw_channel(rng, Link::Ir, 2, 4, 1, true, None)?;
        let eps = generate_an(rng, &nullspace_bases(&h), 1.0)?;
        worst = worst.max((h.subband(0) * &eps[0]).norm() / eps[0].norm());
    }
    Ok(Check { name: "an_nullspace_residual", passed: worst <= 1e-10, detail: format!("max |H eps|/|eps| = {worst:.2e}") })
}

/// Empirical `E|eps_n|^2` against `lambda_u2 / N` over 1e5 draws.
pub fn an_power_check(rng: &mut ChaCha8Rng, weights: Option<&[f64]>) -> Result<Check> {
    let n = 3;
    let lambda_u2 = 2.0;
    let h = draw_channel(rng, Link::Ir, 2, 4, n, false, None)?;
    let bases = nullspace_bases(&h);
    let draws = 100_000;
    let mut acc = 0.0;
    for _ in 0..draws {
        acc += generate_an_weighted(rng, &bases, lambda_u2, weights)?[0].norm_squared();
    }
    let measured = acc / draws as f64;
    let target = lambda_u2 / n as f64;
    let rel = (measured - target).abs() / target;
    Ok(Check { name: "an_power", passed: rel <= 0.01, detail: format!("E|eps|^2 = {measured:.5}, target {target:.5}") })
}

fn check_detector(rng: &mut ChaCha8Rng) -> Result<Check> {
    let mut errors = 0usize;
    let mut count = 0usize;
    for spec in small_specs() {
        let cb = Codebook::build(spec)?;
        for _ in 0..50 {
            let h = draw_channel(rng, Link::Ir, 2, spec.n_t, 2, false, None)?;
            for w in &cb.words {
                let y: Vec<DVector<C64>> = h.gains.iter().map(|g| g * &w.tx_vector).collect();
                errors += usize::from(ml_detect(&cb, &h, &y, 1.0)?.label_hat != w.label);
                count += 1;
            }
        }
    }
    Ok(Check { name: "ml_noiseless_round_trip", passed: errors == 0, detail: format!("{errors} errors in {count} detections") })
}

fn check_moments() -> Result<Check> {
    let grid = PassbandGrid::standard(1e5, 1e3, 1)?;
    let a = 0.7;
    let m = signal_moments(&grid.synthesize(&[C64::new(a, 0.0)]))?;
    let e2 = (m.m2 - a * a / 2.0).abs() / (a * a / 2.0);
    let e4 = (m.m4 - 3.0 * a.powi(4) / 8.0).abs() / (3.0 * a.powi(4) / 8.0);
    Ok(Check { name: "sinusoid_moments", passed: e2 < 1e-6 && e4 < 1e-6, detail: format!("rel err m2 {e2:.1e}, m4 {e4:.1e}") })
}

fn check_transmit_power(rng: &mut ChaCha8Rng) -> Result<Check> {
    let cb = Codebook::build(SchemeSpec::new(SchemeKind::Ssk, 4, 1, 1)?)?;
    let split = PowerSplit::new(1.0, 0.4)?;
    let n = 3;
    let grid = PassbandGrid::standard(1e5, 1e3, n)?;
    let mut acc = 0.0;
    let draws = 2000;
    for t in 0..draws {
        let h = draw_channel(rng, Link::Ir, 2, 4, n, true, None)?;
        let w = compose_transmit(&cb.words[t % cb.len()], &split, n);
        let eps = generate_an(rng, &nullspace_bases(&h), split.lambda_u2)?;
        acc += mean_transmit_power(&SubbandFrame { w, eps }, &grid);
    }
    let p = acc / draws as f64;
    Ok(Check { name: "transmit_power", passed: (p - 1.0).abs() < 0.05, detail: format!("mean radiated power {p:.4} (P_T = 1)") })
}

fn check_cpep(rng: &mut ChaCha8Rng) -> Result<Check> {
    let cb = Codebook::build(SchemeSpec::new(SchemeKind::Ssk, 4, 1, 1)?)?;
    let h = draw_channel(rng, Link::Ir, 2, 4, 1, true, None)?;
    let sigma2 = 1.5;
    let (j, k) = (0, 1);
    let phi = phi_subbands(&cb, &h, j, k);
    let p = cpep(&phi, 1.0, sigma2);
    let d = &phi[0];
    let draws = 200_000;
    let sd = sigma2.sqrt();
    let mut errors = 0u64;
    for _ in 0..draws {
        let z = DVector::from_fn(d.len(), |_, _| complex_normal(rng) * sd);
        // Decide k over j when |d + z| < |z|.
        errors += u64::from((d + &z).norm_squared() < z.norm_squared());
    }
    let est = errors as f64 / draws as f64;
    let se = (p * (1.0 - p) / draws as f64).sqrt();
    Ok(Check {
        name: "cpep_oracle",
        passed: (est - p).abs() <= 3.0 * se,
        detail: format!("empirical {est:.5} vs Q(sqrt(gamma)) {p:.5}"),
    })
}

fn check_eve_covariance(rng: &mut ChaCha8Rng) -> Result<Check> {
    let h = draw_channel(rng, Link::Ir, 2, 4, 1, true, None)?;
    let g = draw_channel(rng, Link::Eve, 2, 4, 1, true, None)?;
    let noise_var = 0.3;
    let c = eve_covariance(g.subband(0), &nullspace_basis(h.subband(0)), 2.0, noise_var, 1);
    let eig = c.clone().symmetric_eigen().eigenvalues;
    let min = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    let herm = (&c - c.adjoint()).norm();
    Ok(Check {
        name: "eve_covariance_pd",
        passed: min >= noise_var * (1.0 - 1e-9) && herm < 1e-12,
        detail: format!("min eigenvalue {min:.4} >= noise {noise_var}"),
    })
}

fn check_mi_bounds(rng: &mut ChaCha8Rng) -> Result<Check> {
    let cb = Codebook::build(SchemeSpec::new(SchemeKind::Qssk, 4, 1, 1)?)?;
    let h = draw_channel(rng, Link::Ir, 2, 4, 1, true, None)?;
    let eta = cb.eta as f64;
    let mut ok = true;
    let mut worst = String::new();
    for noise in [1e-4, 1e-1, 1.0, 10.0, 1e4] {
        let mi = mutual_info(&cb, &h.gains, 1.0, noise, 500, rng)?;
        let inside = mi.raw >= -3.0 * mi.std_err - 1e-9 && mi.raw <= eta + 3.0 * mi.std_err + 1e-9;
        if !inside {
            worst = format!("raw {:.4} at noise {noise}", mi.raw);
        }
        ok &= inside;
    }
    Ok(Check { name: "mi_bounds", passed: ok, detail: if ok { format!("within [0, {eta}] at 5 noise levels") } else { worst } })
}

/// Runs every check. Failures are recorded in the report, not returned as errors.
pub fn validate(opts: &ValidateOptions) -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let checks = vec![
        check_codebooks()?,
        check_nullspace(&mut rng)?,
        an_power_check(&mut rng, opts.an_weights.as_deref())?,
        check_detector(&mut rng)?,
        check_moments()?,
        check_transmit_power(&mut rng)?,
        check_cpep(&mut rng)?,
        check_eve_covariance(&mut rng)?,
        check_mi_bounds(&mut rng)?,
    ];
    Ok(ValidationReport { checks })
}
