use gwforest::chain::{power_limit, stationary};
use gwforest::evolution::{
    detect_cycle, run_alternating_diffusion, run_diffusion, run_pagerank, ConvergenceCriterion, Convention, CycleVerdict,
    Mode, TwoPhaseScheme, UpdateForm, Variant,
};
use gwforest::fixtures;
use gwforest::stochmat::{validate_stochastic, Matrix, MatrixNorm, StochasticMatrix};
use gwforest::verify::random_stochastic;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pair(seed: u64, n: usize) -> (StochasticMatrix, StochasticMatrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (random_stochastic(&mut rng, n, 0.3), random_stochastic(&mut rng, n, 0.3))
}

fn max_gap(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).unwrap().max_abs()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn iterates_stay_stochastic_without_renormalization(seed in any::<u64>(), n in 1usize..8, alpha in 0.05f64..1.0, lambda in 0.05f64..1.0) {
        let (p, y) = pair(seed, n);
        let j = random_stochastic(&mut ChaCha8Rng::seed_from_u64(!seed), n, 0.3);
        let steps = 60;
        let tol = 8.0 * (steps * n) as f64 * f64::EPSILON;
        let schemes = [
            TwoPhaseScheme::diffusion(&p),
            TwoPhaseScheme::pagerank(&p, &y, alpha).unwrap(),
            TwoPhaseScheme::alternating_diffusion(&p, lambda, Convention::FirstStepOdd).unwrap(),
            TwoPhaseScheme::alternating_pagerank(&p, &y, &j, lambda, alpha, Variant::Both, Convention::FirstStepEven).unwrap(),
        ];
        for scheme in &schemes {
            for form in [UpdateForm::Standard, UpdateForm::Block] {
                for f in scheme.trajectory(steps, form).unwrap() {
                    prop_assert!(validate_stochastic(&f, tol).passed);
                }
            }
        }
    }

    #[test]
    fn pagerank_fixed_point_residual(seed in any::<u64>(), n in 1usize..8, alpha in 0.05f64..0.95) {
        let (p, y) = pair(seed, n);
        let crit = ConvergenceCriterion::with_epsilon(1e-9);
        let r = run_pagerank(&p, &y, alpha, &crit).unwrap();
        prop_assert_eq!(r.mode, Mode::FixedPoint);
        let f = r.final_state();
        let next = f.matmul(&p).unwrap().blend(alpha, &y).unwrap();
        prop_assert!(MatrixNorm::Frobenius.of(&f.sub(&next).unwrap()) <= 10.0 * crit.epsilon);
    }
}

#[test]
fn diffusion_fixed_point_is_the_power_limit() {
    let p = fixtures::p();
    let crit = ConvergenceCriterion::default();
    let r = run_diffusion(&p, &crit).unwrap();
    let lim = power_limit(&p, 1e-12).unwrap().limit;
    assert!(max_gap(r.final_state(), &lim) <= 10.0 * crit.epsilon);
    let pi = stationary(&p).unwrap().pi;
    for row in r.final_state().rows() {
        let gap = row.iter().zip(&pi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(gap <= 10.0 * crit.epsilon);
    }
}

#[test]
fn alternating_diffusion_shares_the_fixed_point() {
    let p = fixtures::p();
    let crit = ConvergenceCriterion::default();
    let plain = run_diffusion(&p, &crit).unwrap();
    for convention in Convention::ALL {
        for lambda in [1.0 / 3.0, 0.5, 2.0 / 3.0] {
            let alt = run_alternating_diffusion(&p, lambda, &crit, convention).unwrap();
            assert_eq!(alt.mode, Mode::FixedPoint);
            assert!(max_gap(alt.final_state(), plain.final_state()) <= 10.0 * crit.epsilon);
        }
    }
}

#[test]
fn pagerank_converges_faster_than_diffusion() {
    let crit = ConvergenceCriterion::default();
    let pr = run_pagerank(&fixtures::p(), &fixtures::y(), 0.9, &crit).unwrap();
    let diff = run_diffusion(&fixtures::p(), &crit).unwrap();
    assert!(pr.iterations < diff.iterations, "{} vs {}", pr.iterations, diff.iterations);
}

#[test]
fn alternating_pagerank_ends_in_a_two_cycle() {
    let crit = ConvergenceCriterion::default().cycle_detection(true);
    let scheme = TwoPhaseScheme::alternating_pagerank(
        &fixtures::p(),
        &fixtures::y(),
        &fixtures::j(),
        0.6,
        0.9,
        Variant::Both,
        Convention::FirstStepOdd,
    )
    .unwrap();
    let r = scheme.run(&crit).unwrap();
    assert_eq!(r.mode, Mode::Period2);
    assert_eq!(r.final_states.len(), 2);
    let states: Vec<Matrix> = scheme.trajectory(r.iterations, UpdateForm::Standard).unwrap().into_iter().map(|s| s.into_matrix()).collect();
    assert!(matches!(detect_cycle(&states, &crit), CycleVerdict::Period2(..)));
    // The two states are distinct, and one more step returns to the other.
    let (a, b) = (&r.final_states[0], &r.final_states[1]);
    assert!(max_gap(a, b) > 10.0 * crit.epsilon);
    let next = scheme.step(b, r.iterations + 1, UpdateForm::Standard).unwrap();
    assert!(MatrixNorm::Frobenius.of(&next.sub(a).unwrap()) < 1e-7);
}

#[test]
fn exhaustion_is_reported_not_raised() {
    let swap = StochasticMatrix::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
    let r = run_diffusion(&swap, &ConvergenceCriterion::default().max_iterations(25)).unwrap();
    assert_eq!(r.mode, Mode::Exhausted);
    assert_eq!(r.iterations, 25);
    assert!(!r.warnings.is_empty());
    let r = run_diffusion(&swap, &ConvergenceCriterion::default().cycle_detection(true)).unwrap();
    assert_eq!(r.mode, Mode::Period2);
}
