//! First-run properties, monotonicity, generator independence and coordinate
//! invariance of Boardman symbols on random germs.

mod common;

use common::*;
use germkit_core::boardman::{
    boardman_symbol, certified_prefix_equal, symbol_of_polys, SymbolOptions, SymbolStatus,
};
use germkit_core::{MapGerm, Polynomial};
use proptest::prelude::*;

fn opts() -> SymbolOptions {
    SymbolOptions::default()
}

fn small_germ() -> impl Strategy<Value = MapGerm> {
    germ(3, 2, 4).prop_filter("zero map", |f| !f.is_zero())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn first_value_is_corank(f in small_germ()) {
        let s = boardman_symbol(&f, opts()).unwrap();
        prop_assert_eq!(s.expand(1), vec![f.nvars() - f.rank()]);
    }

    #[test]
    fn rank_zero_first_run_is_order_minus_one(f in small_germ().prop_filter("rank 0", |f| f.rank() == 0)) {
        let s = boardman_symbol(&f, opts()).unwrap();
        let run = s.first_run().unwrap();
        prop_assert_eq!(run.count, Some(f.order().unwrap() as usize - 1), "{}", s);
    }

    #[test]
    fn expanded_symbol_is_monotone_and_bounded(f in small_germ()) {
        let s = boardman_symbol(&f, opts()).unwrap();
        let seq = s.expand(opts().max_steps);
        prop_assert!(seq.iter().all(|&v| v <= f.nvars()));
        prop_assert!(seq.windows(2).all(|w| w[1] <= w[0]), "{:?}", seq);
        if s.status() != SymbolStatus::Truncated {
            prop_assert_eq!(seq.len(), opts().max_steps);
        }
    }

    #[test]
    fn redundant_generators_change_nothing(
        (f, hs) in small_germ().prop_flat_map(|f| {
            let (n, p) = (f.nvars(), f.ncomps());
            (Just(f), prop::collection::vec(prop::collection::vec(poly(n, 0, 2, 3, 3, 1), p), 1..=3))
        })
    ) {
        let mut polys = f.components().to_vec();
        for h in &hs {
            let combo = h
                .iter()
                .zip(f.components())
                .fold(Polynomial::zero(f.nvars()), |acc, (a, c)| &acc + &(a * c));
            polys.push(combo);
        }
        let a = boardman_symbol(&f, opts()).unwrap();
        let b = symbol_of_polys(f.nvars(), &polys, opts()).unwrap();
        let (agree, _) = certified_prefix_equal(&a, &b, opts().max_steps);
        prop_assert!(agree, "{} vs {}", a, b);
    }

    #[test]
    fn linear_coordinate_changes_change_nothing(
        (f, l) in small_germ().prop_flat_map(|f| { let n = f.nvars(); (Just(f), invertible(n)) })
    ) {
        let g = f.compose(&linear_germ(&l)).unwrap();
        let a = boardman_symbol(&f, opts()).unwrap();
        let b = boardman_symbol(&g, opts()).unwrap();
        let (agree, _) = certified_prefix_equal(&a, &b, opts().max_steps);
        prop_assert!(agree, "{} vs {}", a, b);
    }
}
