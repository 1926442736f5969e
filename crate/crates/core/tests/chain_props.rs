use gwforest::chain::{classify, period, power_limit, stationary, stationary_linear, stationary_power, subdominant_modulus};
use gwforest::stochmat::{Matrix, StochasticMatrix};
use gwforest::verify::random_stochastic;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Second-largest eigenvalue modulus from a full Schur decomposition.
fn eigen_oracle(t: &Matrix) -> f64 {
    let n = t.dim();
    let mut moduli: Vec<f64> = DMatrix::from_row_slice(n, n, t.as_slice()).complex_eigenvalues().iter().map(|z| z.norm()).collect();
    moduli.sort_by(|a, b| b.total_cmp(a));
    moduli.get(1).copied().unwrap_or(0.0)
}

fn permuted(t: &Matrix, perm: &[usize]) -> Matrix {
    let n = t.dim();
    let data = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).map(|(i, j)| t.get(perm[i], perm[j])).collect();
    Matrix::new(n, data).unwrap()
}

fn regular_instance(seed: u64, n: usize) -> StochasticMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let t = random_stochastic(&mut rng, n, 0.5);
        if classify(&t).regular {
            return t;
        }
    }
}

#[test]
fn three_node_modulus_matches_closed_form() {
    let p = StochasticMatrix::from_rows(&[[0.0, 5.0 / 8.0, 3.0 / 8.0], [5.0 / 13.0, 0.0, 8.0 / 13.0], [3.0 / 11.0, 8.0 / 11.0, 0.0]]).unwrap();
    let expected = (1.0 + (23.0f64 / 143.0).sqrt()) / 2.0;
    let got = subdominant_modulus(&p).unwrap().subdominant_modulus;
    assert!((got - expected).abs() <= 1e-9, "{got} vs {expected}");
    assert!((eigen_oracle(&p) - expected).abs() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn subdominant_modulus_matches_eigenvalues(seed in any::<u64>(), n in 2usize..8) {
        let t = regular_instance(seed, n);
        let got = subdominant_modulus(&t).unwrap().subdominant_modulus;
        prop_assert!((got - eigen_oracle(&t)).abs() <= 1e-6, "{} vs {}", got, eigen_oracle(&t));
    }

    #[test]
    fn subdominant_modulus_is_permutation_invariant(seed in any::<u64>(), n in 2usize..8) {
        let t = regular_instance(seed, n);
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed ^ 1));
        let a = subdominant_modulus(&t).unwrap().subdominant_modulus;
        let b = subdominant_modulus(&permuted(&t, &perm)).unwrap().subdominant_modulus;
        prop_assert!((a - b).abs() <= 1e-8, "{} vs {}", a, b);
    }

    #[test]
    fn regularity_index_is_minimal(seed in any::<u64>(), n in 1usize..8) {
        let t = random_stochastic(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.6);
        let c = classify(&t);
        if let Some(k) = c.regularity_index {
            prop_assert!(t.power(k).as_slice().iter().all(|v| *v > 0.0));
            if k > 1 {
                prop_assert!(t.power(k - 1).as_slice().contains(&0.0));
            }
            prop_assert!(c.irreducible && c.period == Some(1));
        }
    }

    #[test]
    fn positive_diagonal_makes_irreducible_chain_aperiodic(seed in any::<u64>(), n in 1usize..8) {
        let t = random_stochastic(&mut ChaCha8Rng::seed_from_u64(seed), n, 0.6);
        let mut data = t.as_slice().to_vec();
        data[0] += 1.0;
        let lazy = gwforest::stochmat::normalize_rows(&Matrix::new(n, data).unwrap()).unwrap();
        if classify(&lazy).irreducible {
            prop_assert_eq!(period(&lazy), Ok(1));
        }
    }

    #[test]
    fn stationary_routes_agree(seed in any::<u64>(), n in 1usize..8) {
        let t = regular_instance(seed, n);
        let s = stationary(&t).unwrap();
        let (power, linear) = (stationary_power(&t).unwrap(), stationary_linear(&t).unwrap());
        let gap = power.pi.iter().zip(&linear.pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(gap <= 1e-10);
        let moved = t.left_mul_vec(&s.pi);
        let residual = moved.iter().zip(&s.pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(residual <= 1e-12, "residual {}", residual);
    }

    #[test]
    fn power_limit_rows_agree(seed in any::<u64>(), n in 1usize..8) {
        let t = regular_instance(seed, n);
        let tol = 1e-10;
        let lim = power_limit(&t, tol).unwrap().limit;
        let first = lim.row(0).to_vec();
        for r in lim.rows() {
            let gap = r.iter().zip(&first).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(gap <= 10.0 * tol);
        }
    }
}

#[test]
fn reducible_chain_has_no_stationary_answer() {
    let t = Matrix::from_rows(&[[1.0, 0.0], [0.5, 0.5]]).unwrap();
    assert!(stationary(&t).is_err());
    assert_eq!(classify(&t).classes, vec![vec![0], vec![1]]);
}
