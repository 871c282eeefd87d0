mod common;

use std::collections::BTreeMap;

use num_traits::One;
use proptest::prelude::*;

use recwalk::chain::{hitting_by_horizon, law_after, return_prob_estimate, sample_path_indexed, verify_equivalences, SparseDist};
use recwalk::space::{apply_z, CounterexampleSpace, DiagonalLattice, Generator, StepMeasure, ZState};
use recwalk::weight::{q, q_to_f64, Q};
use recwalk::Exec;

fn z_state() -> impl Strategy<Value = ZState> {
    prop_oneof![
        (-20i64..20).prop_map(ZState::Tail),
        (-20i64..=0).prop_map(ZState::Inlet),
        (-20i64..20, -20i64..20).prop_map(|(i, j)| ZState::Lattice { i, j: if (i + j) % 2 == 0 { j } else { j + 1 } }),
    ]
}

fn diag_measure() -> impl Strategy<Value = StepMeasure> {
    prop::collection::vec(1i64..6, 4).prop_map(|w| {
        let total: i64 = w.iter().sum();
        let gens = [Generator::B, Generator::Binv, Generator::C, Generator::Cinv];
        StepMeasure::new(gens.iter().zip(&w).map(|(g, x)| (*g, q(*x, total))).collect()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_law_keeps_mass(start in z_state(), n in 0usize..8) {
        let d: SparseDist<ZState, Q> = law_after(&CounterexampleSpace, &StepMeasure::mu_prime(), start, n, 0.0).unwrap();
        prop_assert!(d.total().is_one());
        prop_assert_eq!(d.leaked(), 0.0);
    }

    #[test]
    fn diagonal_law_has_parity(m in diag_measure(), n in 0usize..10) {
        let d: SparseDist<(i64, i64), Q> = law_after(&DiagonalLattice, &m, (0, 0), n, 0.0).unwrap();
        prop_assert!(d.total().is_one());
        for ((s, t), _) in d.iter() {
            prop_assert_eq!((s + t).rem_euclid(2), 0);
            prop_assert_eq!(s.rem_euclid(2), (n % 2) as i64);
            prop_assert!(s.unsigned_abs() as usize <= n && t.unsigned_abs() as usize <= n);
        }
    }

    #[test]
    fn inverse_pairs_cancel(s in z_state()) {
        for (g, h) in [(Generator::B, Generator::Binv), (Generator::C, Generator::Cinv)] {
            prop_assert_eq!(apply_z(h, apply_z(g, s).unwrap()).unwrap(), s);
            prop_assert_eq!(apply_z(g, apply_z(h, s).unwrap()).unwrap(), s);
        }
    }

    #[test]
    fn random_chains_satisfy_equivalences(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let chain = common::random_chain(&mut rng, 6);
        let n = chain.n();
        let z = (seed % n as u64) as usize;
        let y = ((seed >> 8) % n as u64) as usize;
        let r = verify_equivalences(&chain, z, y, 4).unwrap();
        prop_assert!(r.consistent, "{:?}", r);
        prop_assert!(r.statements.iter().all(|s| *s == r.statements[0]), "{:?}", r);
        prop_assert_eq!(&r.at_least_product, &r.at_least_augmented);
    }
}

#[test]
fn sampled_endpoints_match_exact_law() {
    let m = StepMeasure::diagonal();
    let steps = 10;
    let nsamples = 100_000u64;
    let exact: SparseDist<(i64, i64), f64> = law_after(&DiagonalLattice, &m, (0, 0), steps, 0.0).unwrap();
    let mut counts: BTreeMap<(i64, i64), u64> = BTreeMap::new();
    for k in 0..nsamples {
        let path = sample_path_indexed(&DiagonalLattice, &m, (0, 0), steps, 11, k).unwrap();
        *counts.entry(*path.states(&DiagonalLattice).unwrap().last().unwrap()).or_default() += 1;
    }
    let empirical = SparseDist::from_entries(counts.into_iter().map(|(s, c)| (s, c as f64 / nsamples as f64)), 0.0).unwrap();
    let tv = exact.total_variation(&empirical);
    let bound = 3.0 * (exact.len() as f64 / nsamples as f64).sqrt();
    assert!(tv < bound, "tv {tv} bound {bound}");
}

#[test]
fn generator_frequencies() {
    let m = StepMeasure::mu_prime();
    let mut rng = common::rng(5);
    let n = 200_000u64;
    let mut counts: BTreeMap<Generator, u64> = BTreeMap::new();
    for _ in 0..n {
        *counts.entry(m.sample(&mut rng)).or_default() += 1;
    }
    let sigma = (0.2f64 * 0.8 / n as f64).sqrt();
    for g in Generator::ALL {
        let f = counts[&g] as f64 / n as f64;
        assert!((f - 0.2).abs() < 4.0 * sigma, "{g:?}: {f}");
    }
}

#[test]
fn first_vertical_return_at_two() {
    // The first coordinate of the diagonal walk returns to 0 at time 2 with probability 1/2.
    let m = StepMeasure::diagonal();
    let n = 100_000u64;
    let hits = (0..n)
        .filter(|&k| {
            let s = sample_path_indexed(&DiagonalLattice, &m, (0, 0), 2, 3, k).unwrap().states(&DiagonalLattice).unwrap();
            s[2].0 == 0
        })
        .count();
    let p = hits as f64 / n as f64;
    assert!((p - 0.5).abs() < 0.005, "{p}");
}

#[test]
fn return_to_pi_matches_taboo_oracle() {
    let horizon = 16;
    let exact: Vec<Q> = hitting_by_horizon(&CounterexampleSpace, &StepMeasure::mu_prime(), ZState::PI, |s| *s == ZState::PI, horizon, 0.0).unwrap();
    let p = q_to_f64(&exact[horizon - 1]);
    let est = return_prob_estimate(
        &CounterexampleSpace,
        &StepMeasure::mu_prime(),
        &ZState::PI,
        |s| *s == ZState::PI,
        horizon as u64,
        100_000,
        17,
        Exec::default(),
    )
    .unwrap();
    let z = (est.estimate - p) / est.sigma_at(p);
    assert!(z.abs() < 4.0, "exact {p} estimate {} z {z}", est.estimate);
    // First return after two steps: one of the four diagonal moves then its inverse.
    assert_eq!(exact[1], q(4, 25));
}
