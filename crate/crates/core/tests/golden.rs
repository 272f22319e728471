//! Golden values for the worked examples: exact symbols, JSON encodings, and
//! the hand-executed iteration trace for `x^2` in two variables.

use germkit_core::boardman::{boardman_symbol, GeneratorSet, Pruning, SymbolOptions, SymbolStatus};
use germkit_core::parse::parse_polynomial;
use germkit_core::{MapGerm, Polynomial};

fn germ(text: &str) -> MapGerm {
    let vars = vec!["x".to_string(), "y".to_string()];
    MapGerm::new(2, vec![parse_polynomial(text, &vars).unwrap()]).unwrap()
}

fn symbol_json(text: &str) -> String {
    boardman_symbol(&germ(text), SymbolOptions::default())
        .unwrap()
        .to_json_string()
}

#[test]
fn f0_symbol() {
    assert_eq!(
        symbol_json("x^4 + y^9"),
        r#"{"runs": [[2,3],[1,5],[0,null]], "status": "stabilized_zero"}"#
    );
}

#[test]
fn f1_symbol() {
    assert_eq!(
        symbol_json("x^4 + x^2*y^6 + y^9"),
        r#"{"runs": [[2,3],[1,4],[0,null]], "status": "stabilized_zero"}"#
    );
}

#[test]
fn f_and_g_share_a_symbol() {
    let expected = r#"{"runs": [[2,3],[1,1],[0,null]], "status": "stabilized_zero"}"#;
    assert_eq!(symbol_json("x^4 + y^5"), expected);
    assert_eq!(
        symbol_json("x^4 - 2*x^2*y^3 - 4*x*y^5 + y^6 + y^7"),
        expected
    );
}

#[test]
fn expanded_notation() {
    let s = boardman_symbol(&germ("x^4 + y^9"), SymbolOptions::default()).unwrap();
    assert_eq!(s.expand(10), vec![2, 2, 2, 1, 1, 1, 1, 1, 0, 0]);
    assert_eq!(s.to_string(), "(2, 2, 2, 1, 1, 1, 1, 1, 0, ...)");
}

#[test]
fn f0_and_f1_differ_at_position_eight() {
    let a = boardman_symbol(&germ("x^4 + y^9"), SymbolOptions::default()).unwrap();
    let b = boardman_symbol(&germ("x^4 + x^2*y^6 + y^9"), SymbolOptions::default()).unwrap();
    assert!(germkit_core::boardman::symbol_prefix_equal(&a, &b, 7));
    assert!(!germkit_core::boardman::symbol_prefix_equal(&a, &b, 8));
    assert!(!germkit_core::boardman::symbol_prefix_equal(&a, &b, 9));
}

/// Hand-executed trace for `x^2` in two variables, with generators kept
/// verbatim (rational-multiple pruning only):
/// step 1: {x^2}, J(0) = 0, rank 0, i = 2, s = 1: add 2x.
/// step 2: {x^2, 2x}, rank 1, i = 1, s = 2: minors of [[2x,0],[2,0]] vanish, nothing added.
/// step 3: rank 1 again with nothing added: steady tail (2, 1, 1, ...).
#[test]
fn x_squared_steady_tail_trace() {
    let f = germ("x^2");
    let g0 = GeneratorSet::from_germ_with(&f, Pruning::RationalMultiples);
    assert_eq!(g0.critical_index(), 2);
    let g1 = g0.jacobian_extension(1).unwrap();
    assert_eq!(g1.gens()[1], Polynomial::from_int_terms(2, &[(&[1, 0], 2)]));
    assert_eq!(g1.critical_index(), 1);
    let g2 = g1.jacobian_extension(2).unwrap();
    assert_eq!(g2.len(), 2);
    assert_eq!(g2.critical_index(), 1);

    for pruning in [
        Pruning::RationalMultiples,
        Pruning::MonomialMultiples,
        Pruning::Eliminate,
    ] {
        let opts = SymbolOptions {
            pruning,
            ..SymbolOptions::default()
        };
        let s = boardman_symbol(&f, opts).unwrap();
        assert_eq!(s.status(), SymbolStatus::SteadyTail);
        assert_eq!(s.expand(5), vec![2, 1, 1, 1, 1]);
    }
    let s = boardman_symbol(&f, SymbolOptions::default()).unwrap();
    assert_eq!(s.expand(5), vec![2, 1, 1, 1, 1]);
    assert_eq!(
        s.to_json_string(),
        r#"{"runs": [[2,1],[1,null]], "status": "steady_tail"}"#
    );
}

#[test]
fn swapped_coordinates_give_the_same_symbol() {
    let a = boardman_symbol(&germ("x^4 + y^5"), SymbolOptions::default()).unwrap();
    let b = boardman_symbol(&germ("y^4 + x^5"), SymbolOptions::default()).unwrap();
    assert_eq!(a, b);
}
