use nalgebra::DVector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use simlab::channel::{draw_channel, Link};
use simlab::codebook::{bit_errors, spectral_efficiency, Codebook, SchemeKind, SchemeSpec};
use simlab::detection::EffectiveConstellation;
use simlab::error_rate::{average_pep, cpep, gamma_ir, phi_subbands};
use simlab::harvester::{vout, z_dc, RectennaParams, SignalMoments};
use simlab::C64;

fn scheme_kind() -> impl Strategy<Value = SchemeKind> {
    prop::sample::select(SchemeKind::ALL.to_vec())
}

/// Valid specs with at most 8 antennas.
fn small_spec() -> impl Strategy<Value = SchemeSpec> {
    (scheme_kind(), 2usize..=8, 1usize..=4, prop::sample::select(vec![2usize, 4, 8, 16]))
        .prop_filter_map("invalid spec", |(kind, n_t, n_a, m)| {
            let n_a = if kind.is_generalized() { n_a.max(2).min(n_t) } else { 1 };
            let spec = SchemeSpec::new(kind, n_t, n_a, m).ok()?;
            (spectral_efficiency(&spec).ok()? <= 10).then_some(spec)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn codebook_is_unit_power_and_bijective(spec in small_spec()) {
        let cb = Codebook::build(spec).unwrap();
        prop_assert_eq!(cb.len(), 1 << cb.eta);
        prop_assert!((cb.mean_power() - 1.0).abs() < 1e-12);
        for (l, w) in cb.words.iter().enumerate() {
            prop_assert_eq!(w.label, l);
            prop_assert_eq!(cb.label_of(&w.tx_vector), Some(l));
        }
    }

    #[test]
    fn quadrature_parts_sit_on_their_activations(spec in small_spec()) {
        prop_assume!(spec.kind.is_quadrature());
        let cb = Codebook::build(spec).unwrap();
        for w in &cb.words {
            for (a, v) in w.tx_vector.iter().enumerate() {
                prop_assert_eq!(v.re != 0.0, w.active_re.contains(&a) && w.symbol.re != 0.0);
                prop_assert_eq!(v.im != 0.0, w.active_im.contains(&a) && w.symbol.im != 0.0);
            }
        }
    }

    #[test]
    fn nonzero_count_matches_activation_union(spec in small_spec()) {
        let cb = Codebook::build(spec).unwrap();
        for w in &cb.words {
            let mut union = w.active_re.clone();
            union.extend(&w.active_im);
            union.sort_unstable();
            union.dedup();
            prop_assert_eq!(w.support().len(), union.len());
        }
    }

    #[test]
    fn bit_errors_is_a_metric(j in 0usize..256, k in 0usize..256, l in 0usize..256) {
        prop_assert_eq!(bit_errors(j, k), bit_errors(k, j));
        prop_assert_eq!(bit_errors(j, j), 0);
        prop_assert!(bit_errors(j, l) <= bit_errors(j, k) + bit_errors(k, l));
        prop_assert!(bit_errors(j, k) <= 8);
    }

    #[test]
    fn ml_argmin_is_scale_invariant(spec in small_spec(), seed in any::<u64>(), c in 0.01f64..100.0) {
        let cb = Codebook::build(spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = draw_channel(&mut rng, Link::Ir, 2, spec.n_t, 2, false, None).unwrap();
        let y: Vec<C64> = (0..4).map(|_| simlab::channel::complex_normal(&mut rng)).collect();
        let base = EffectiveConstellation::new(&cb, &h.gains, 0.8).detect(&y);
        let yc: Vec<C64> = y.iter().map(|v| v * c).collect();
        let scaled = EffectiveConstellation::new(&cb, &h.gains, 0.8 * c).detect(&yc);
        prop_assert_eq!(base.label_hat, scaled.label_hat);
        prop_assert_eq!(base.evaluations, cb.len());
    }

    #[test]
    fn cpep_is_symmetric(spec in small_spec(), seed in any::<u64>(), sigma2 in 0.01f64..10.0) {
        let cb = Codebook::build(spec).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = draw_channel(&mut rng, Link::Ir, 2, spec.n_t, 3, false, None).unwrap();
        let (j, k) = (0, cb.len() - 1);
        let a = cpep(&phi_subbands(&cb, &h, j, k), 0.7, sigma2);
        let b = cpep(&phi_subbands(&cb, &h, k, j), 0.7, sigma2);
        prop_assert!((a - b).abs() <= 1e-15 * a.max(1e-300));
        prop_assert!((0.0..=0.5).contains(&a));
        prop_assert_eq!(cpep(&phi_subbands(&cb, &h, j, j), 0.7, sigma2), 0.5);
    }

    #[test]
    fn gamma_unchanged_by_replicating_subbands(re in -3.0f64..3.0, im in -3.0f64..3.0, reps in 1usize..6) {
        let phi = DVector::from_vec(vec![C64::new(re, im), C64::new(im, -re)]);
        let one = gamma_ir(&[phi.clone()], 1.0, 0.5);
        let many = gamma_ir(&vec![phi; reps], 1.0, 0.5);
        prop_assert!((one - many).abs() <= 1e-12 * one.max(1.0));
    }

    #[test]
    fn average_pep_decreases_in_snr_and_diversity(nu in 0.0f64..1e4, dnu in 0.001f64..10.0, n_rx in 1usize..5) {
        let p = average_pep(nu, n_rx);
        prop_assert!((0.0..=0.5).contains(&p));
        prop_assert!(average_pep(nu + dnu, n_rx) <= p);
        prop_assert!(average_pep(nu, n_rx + 1) <= p + 1e-15);
    }

    #[test]
    fn z_dc_strictly_increasing(m2 in 0.0f64..1.0, m4 in 0.0f64..1.0, d in 1e-6f64..1.0) {
        let p = RectennaParams::default();
        let base = z_dc(&SignalMoments { m2, m4 }, &p);
        let more_m2 = z_dc(&SignalMoments { m2: m2 + d, m4 }, &p);
        let more_m4 = z_dc(&SignalMoments { m2, m4: m4 + d }, &p);
        prop_assert!(more_m2 > base);
        prop_assert!(more_m4 > base);
    }

    #[test]
    fn vout_is_monotone(a in 0.0f64..0.1, b in 0.0f64..0.1) {
        let p = RectennaParams::default();
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(vout(lo, &p).unwrap() <= vout(hi, &p).unwrap());
    }
}
