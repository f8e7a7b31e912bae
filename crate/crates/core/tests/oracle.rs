mod common;

use cantor_measure::borel::{evaluate, BorelCode};
use cantor_measure::corpus::{Corpus, Shape};
use cantor_measure::dyadic::Dyadic;
use cantor_measure::l1::StepFunction;
use cantor_measure::measure::{build_decomposition, code_set, measure_of_code, verify_decomposition};
use proptest::prelude::*;

use common::{counted_measure, l1, point_of, prefixes, truth};

fn shape() -> Shape {
    Shape { depth: 6, height: 4, nodes: 30, complements: true }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn measure_matches_counting(seed in any::<u64>()) {
        let c = Corpus::new(seed).code(shape());
        prop_assert_eq!(measure_of_code(&c), counted_measure(&c));
    }

    #[test]
    fn evaluation_matches_truth(seed in any::<u64>()) {
        let c = Corpus::new(seed).code(shape()).normalize_demorgan();
        for p in prefixes(c.support_depth()) {
            let x = point_of(&p);
            let m = evaluate(&c, &x).unwrap();
            prop_assert_eq!(m.root(), truth(&c, &p));
            prop_assert_eq!(c.contains(&x), m.root());
            prop_assert!(m.check_clauses(&c, &x).is_none());
        }
    }

    #[test]
    fn complement_measures_add_to_one(seed in any::<u64>()) {
        let c = Corpus::new(seed).code(shape());
        let total = &measure_of_code(&c) + &measure_of_code(&BorelCode::compl(c));
        prop_assert_eq!(total, Dyadic::one());
    }

    #[test]
    fn decompositions_verify_and_integrate(seed in any::<u64>()) {
        let c = Corpus::new(seed).code(Shape { complements: false, ..shape() });
        let d = build_decomposition(&c).unwrap();
        prop_assert!(verify_decomposition(&c, &d).is_ok());
        let root = d.root().unwrap();
        prop_assert_eq!(root.integral().lo().clone(), counted_measure(&c));
        let chi = StepFunction::indicator(&code_set(&c).unwrap());
        prop_assert!(l1(root.best_approximation().0, &chi).is_zero());
    }

    #[test]
    fn clopen_measure_is_additive(seed in any::<u64>()) {
        let mut corpus = Corpus::new(seed);
        let a = corpus.clopen(6);
        let b = corpus.clopen(6).difference(&a);
        let sum = &a.measure() + &b.measure();
        prop_assert_eq!(a.union(&b).measure(), sum);
        prop_assert_eq!(counted_measure(&BorelCode::leaf(a.union(&b))), a.union(&b).measure());
    }
}
