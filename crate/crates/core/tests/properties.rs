use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use wiretap_core::additivity::{f_qcc, QccChannel};
use wiretap_core::channels::InputDistribution;
use wiretap_core::entropy::{f_w, g_w, von_neumann_entropy, BinaryObjective};
use wiretap_core::linalg::{eigh, fidelity, hermitian_eigenvalues, tensor};
use wiretap_core::preprocessing::{parse_dat, write_dat, CurvePoint};
use wiretap_core::private_info::{lower_convex_hull, p1_binary_with, upper_bound};
use wiretap_core::random::{random_binary_wiretap, random_density_matrix};
use wiretap_core::{ChannelConfig, DensityMatrix, C64};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn entropy_is_concave_on_random_qubit_pairs() {
    let mut r = rng(100);
    for _ in 0..100 {
        let a = random_density_matrix(&mut r, 2, 2);
        let b = random_density_matrix(&mut r, 2, 2);
        for lambda in [0.1, 0.35, 0.5, 0.8] {
            let mix = DensityMatrix::mixture(&[lambda, 1.0 - lambda], &[&a, &b]).unwrap();
            let lhs = von_neumann_entropy(&mix);
            let rhs = lambda * von_neumann_entropy(&a) + (1.0 - lambda) * von_neumann_entropy(&b);
            assert!(lhs >= rhs - 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn objective_vanishes_on_point_masses(seed in any::<u64>()) {
        let w = random_binary_wiretap(&mut rng(seed));
        for x in 0..2 {
            let v = f_w(&w, &InputDistribution::point_mass(2, x)).unwrap();
            prop_assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn objective_is_g_minus_average_letter_g(seed in any::<u64>(), q in 0.0f64..=1.0) {
        let w = random_binary_wiretap(&mut rng(seed));
        let px = InputDistribution::binary(q).unwrap();
        let letters: f64 = (0..2)
            .map(|x| px.probabilities()[x] * g_w(&w, &InputDistribution::point_mass(2, x)).unwrap())
            .sum();
        prop_assert!((f_w(&w, &px).unwrap() - (g_w(&w, &px).unwrap() - letters)).abs() < 1e-10);
    }

    #[test]
    fn envelope_lies_between_zero_and_upper_bound(seed in any::<u64>()) {
        let w = random_binary_wiretap(&mut rng(seed));
        let env = p1_binary_with(&w, 513).unwrap();
        prop_assert!(env.p1 >= 0.0);
        prop_assert!(env.p1 <= upper_bound(&w).unwrap() + 1e-9);
        // The envelope never exceeds the sampled function.
        for ((_, f), e) in env.grid.iter().zip(&env.envelope) {
            prop_assert!(*e <= *f + 1e-12);
        }
    }

    #[test]
    fn ensemble_achieves_reported_rate(seed in any::<u64>()) {
        let w = random_binary_wiretap(&mut rng(seed));
        let env = p1_binary_with(&w, 513).unwrap();
        prop_assert!((env.ensemble.rate(&w).unwrap() - env.p1).abs() < 1e-9);
        prop_assert!((env.ensemble.mean() - 0.5).abs() <= 0.5);
    }

    #[test]
    fn objective_is_linear_when_charlie_copies_bob(seed in any::<u64>(), q in 0.0f64..=1.0) {
        let w = random_binary_wiretap(&mut rng(seed));
        let same = wiretap_core::WiretapChannel::new(w.bob().clone(), w.bob().clone()).unwrap();
        prop_assert!(BinaryObjective::new(&same).unwrap().value(q).abs() < 1e-12);
    }

    #[test]
    fn tensor_spectrum_is_product_of_spectra(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_density_matrix(&mut r, 2, 2);
        let b = random_density_matrix(&mut r, 3, 2);
        let ab = tensor(a.as_hermitian(), b.as_hermitian()).unwrap();
        let mut expected: Vec<f64> = a
            .eigenvalues()
            .iter()
            .flat_map(|x| b.eigenvalues().into_iter().map(move |y| x * y))
            .collect();
        expected.sort_by(|x, y| y.total_cmp(x));
        let got = hermitian_eigenvalues(&ab);
        for (g, e) in got.iter().zip(&expected) {
            prop_assert!((g - e).abs() < 1e-12);
        }
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = random_density_matrix(&mut r, 3, 3);
        let b = random_density_matrix(&mut r, 3, 1);
        let ab = fidelity(&a, &b).unwrap();
        let ba = fidelity(&b, &a).unwrap();
        prop_assert!((ab - ba).abs() < 1e-9);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&ab));
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn f_qcc_is_unitarily_invariant(seed in any::<u64>()) {
        let mut r = rng(seed);
        let ch = QccChannel::random(&mut r, 2);
        let rho = random_density_matrix(&mut r, 2, 2);
        let basis = eigh(random_density_matrix(&mut r, 2, 2).as_hermitian());
        let u: Vec<C64> = (0..4).map(|k| basis.vectors[k % 2][k / 2]).collect();
        let rotated = DensityMatrix::new(rho.as_hermitian().conjugated_by(&u).unwrap()).unwrap();
        let a = f_qcc(&ch, &rho).unwrap();
        let b = f_qcc(&ch.conjugated_by(&u).unwrap(), &rotated).unwrap();
        prop_assert!((a - b).abs() < 1e-10);
    }

    #[test]
    fn dat_round_trips_exactly(xs in prop::collection::vec((-1e3f64..1e3, -1.0f64..1.0), 1..40)) {
        let points: Vec<CurvePoint> = xs.iter().map(|&(x, rate)| CurvePoint { x, rate, q_star: None }).collect();
        let mut buf = Vec::new();
        write_dat(&mut buf, &points).unwrap();
        let parsed = parse_dat(std::str::from_utf8(&buf).unwrap()).unwrap();
        for (p, (x, y)) in points.iter().zip(parsed) {
            prop_assert_eq!(p.x.to_bits(), x.to_bits());
            prop_assert_eq!(p.rate.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn channel_config_round_trips(seed in any::<u64>()) {
        let w = random_binary_wiretap(&mut rng(seed));
        let text = ChannelConfig::explicit(&w).to_json();
        let back = ChannelConfig::from_json(&text).unwrap().build().unwrap();
        for x in 0..2 {
            let (b0, c0) = w.evaluate(x);
            let (b1, c1) = back.evaluate(x);
            prop_assert!(b0.as_hermitian().max_abs_diff(b1.as_hermitian()) == 0.0);
            prop_assert!(c0.as_hermitian().max_abs_diff(c1.as_hermitian()) == 0.0);
        }
    }

    #[test]
    fn hull_contains_endpoints_and_is_convex(ys in prop::collection::vec(-1.0f64..1.0, 3..60)) {
        let n = ys.len();
        let pts: Vec<(f64, f64)> = ys.iter().enumerate().map(|(i, &y)| (i as f64 / (n - 1) as f64, y)).collect();
        let hull = lower_convex_hull(&pts);
        prop_assert_eq!(hull[0], 0);
        prop_assert_eq!(*hull.last().unwrap(), n - 1);
        for w in hull.windows(3) {
            let (a, b, c) = (pts[w[0]], pts[w[1]], pts[w[2]]);
            let cross = (b.0 - a.0) * (c.1 - a.1) - (b.1 - a.1) * (c.0 - a.0);
            prop_assert!(cross > -1e-12);
        }
    }
}
