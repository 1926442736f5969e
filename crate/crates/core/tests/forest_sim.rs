use gwforest::evolution::{generation_law, TwoPhaseScheme, UpdateForm};
use gwforest::fixtures;
use gwforest::forest_sim::{estimate_law, estimate_pagerank_law, Mechanism, SimConfig};

#[test]
fn empirical_laws_are_within_tolerance_in_99_of_100_seeds() {
    let p = fixtures::p();
    let analytic = generation_law(&p, &p, 2).unwrap();
    let mut good = 0;
    for seed in 0..100 {
        let cfg = SimConfig::new(2, 100_000, seed, Mechanism::PureMutation { p: p.clone(), t: p.clone() }).unwrap();
        if estimate_law(&cfg, 2).unwrap().max_row_tv(&analytic) < 0.01 {
            good += 1;
        }
    }
    assert!(good >= 99, "{good}/100 runs within 0.01");
}

#[test]
fn immigration_laws_are_within_tolerance_in_99_of_100_seeds() {
    let (p, y) = (fixtures::p(), fixtures::y());
    let states = TwoPhaseScheme::pagerank(&p, &y, 0.9).unwrap().trajectory(5, UpdateForm::Standard).unwrap();
    let mut good = 0;
    for seed in 0..100 {
        let cfg = SimConfig::new(5, 100_000, 1000 + seed, Mechanism::Immigration { p: p.clone(), y: y.clone(), alpha: 0.9 }).unwrap();
        if estimate_pagerank_law(&cfg, 5).unwrap().max_row_tv(&states[5]) < 0.01 {
            good += 1;
        }
    }
    assert!(good >= 99, "{good}/100 runs within 0.01");
}

#[test]
fn same_seed_same_counts_and_rows_sum_to_replicates() {
    let p = fixtures::p();
    let cfg = SimConfig::new(3, 20_000, 42, Mechanism::PureMutation { p: p.clone(), t: p.clone() }).unwrap();
    let a = estimate_law(&cfg, 3).unwrap();
    let b = estimate_law(&cfg, 3).unwrap();
    assert_eq!(a.counts, b.counts);
    assert!(a.counts.iter().all(|r| r.iter().sum::<u64>() == 20_000));
    let other = SimConfig { seed: 43, ..cfg };
    assert_ne!(estimate_law(&other, 3).unwrap().counts, a.counts);
}
