use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varsep::linalg::{sym_eigen_descending, DenseMatrix};
use varsep::quadrature::gauss_legendre;

fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut g = DenseMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let v = rng.gen_range(-1.0..1.0);
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    g
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_rules_integrate_monomials(n in 1usize..=10, d_frac in 0.0..1.0f64) {
        let d = ((2 * n) as f64 * d_frac) as usize;
        let rule = gauss_legendre(n).unwrap();
        let exact = if d % 2 == 1 { 0.0 } else { 2.0 / (d as f64 + 1.0) };
        let q = rule.integrate(|x| x.powi(d as i32));
        prop_assert!((q - exact).abs() <= 1e-12, "n={} d={} q={} exact={}", n, d, q, exact);
    }

    #[test]
    fn gauss_nodes_symmetric_and_weights_sum_to_two(n in 1usize..=10) {
        let rule = gauss_legendre(n).unwrap();
        prop_assert!((rule.weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        for (a, b) in rule.nodes.iter().zip(rule.nodes.iter().rev()) {
            prop_assert!((a + b).abs() < 1e-14);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn eigen_reconstruction(n in 1usize..80, seed in any::<u64>()) {
        let g = random_symmetric(n, seed);
        let e = sym_eigen_descending(&g).unwrap();
        let mut r = g.clone();
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    r[(i, j)] -= e.values[k] * e.vectors[(i, k)] * e.vectors[(j, k)];
                }
            }
        }
        prop_assert!(r.frobenius_norm() <= 1e-9 * g.frobenius_norm());
        prop_assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        let mut vtv = e.vectors.transpose().matmul(&e.vectors);
        vtv.add_scaled(-1.0, &DenseMatrix::identity(n));
        prop_assert!(vtv.max_abs() < 1e-10);
    }
}
