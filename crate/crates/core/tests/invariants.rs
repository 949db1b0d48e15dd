use proptest::prelude::*;
use vdg_core::engine::{classify_values, PROB_TOL};
use vdg_core::{
    build_model, check, export_model, import_model, parse_property, verify_bellman, BuildOptions,
    GameParams, TransitionModel,
};

fn small_params() -> impl Strategy<Value = GameParams> {
    (
        prop::sample::subsequence(vec![0.0, 0.5, 1.0], 1..=3),
        1u32..=3,
        50u32..=200,
        100u32..=400,
    )
        .prop_map(|(fractions, k_max, r_init, r_needed)| GameParams {
            fractions,
            k_max,
            r_init,
            r_needed,
            ..GameParams::default()
        })
}

const PREDICATES: [&str; 4] = ["c1<c2", "\"good\"", "c1+c2+c3<200", "k=kmax+1 & c3>c1"];

fn model(p: &GameParams) -> TransitionModel {
    build_model(p, BuildOptions::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn probability_values_are_ordered_and_bounded(p in small_params()) {
        let m = model(&p);
        for pred in PREDICATES {
            let run = |q: &str| {
                let prop = parse_property(&format!("<<p1,p2,p3>> {q} [ F {pred} ]"), &p).unwrap();
                let r = check(&m, &prop).unwrap();
                prop_assert_eq!(verify_bellman(&m, &prop, &r.valuation, 1e-9).unwrap(), None);
                Ok(r.valuation.values)
            };
            let hi = run("Pmax=?")?;
            let lo = run("Pmin=?")?;
            for (a, b) in hi.iter().zip(&lo) {
                prop_assert!(*a >= *b - PROB_TOL);
                prop_assert!((-PROB_TOL..=1.0 + PROB_TOL).contains(a));
                prop_assert!((-PROB_TOL..=1.0 + PROB_TOL).contains(b));
            }
            let c = classify_values(&hi);
            prop_assert_eq!(c.yes.len() + c.no.len() + c.maybe.len(), m.len());
            for &s in &c.yes {
                prop_assert!((hi[s] - 1.0).abs() <= PROB_TOL);
            }
            for &s in &c.no {
                prop_assert!(hi[s].abs() <= PROB_TOL);
            }
        }
    }

    #[test]
    fn cooperation_dominates_maximin(p in small_params(), label in prop::sample::select(vec!["r1", "done123", "done12"])) {
        let m = model(&p);
        let coop = parse_property(&format!("<<p1,p2,p3>> R{{\"{label}\"}}max=? [ F k=kmax+1 ]"), &p).unwrap();
        let versus = parse_property(&format!("<<p1:p2,p3>> R{{\"{label}\"}}max=? [ F k=kmax+1 ]"), &p).unwrap();
        let a = check(&m, &coop).unwrap();
        let b = check(&m, &versus).unwrap();
        prop_assert_eq!(verify_bellman(&m, &versus, &b.valuation, 1e-9).unwrap(), None);
        for (x, y) in a.valuation.values.iter().zip(&b.valuation.values) {
            prop_assert!(*x + 1e-9 >= *y);
        }
    }

    #[test]
    fn export_import_round_trip(p in small_params()) {
        let m = model(&p);
        let mut buf = Vec::new();
        export_model(&m, &mut buf).unwrap();
        let back = import_model(&buf[..]).unwrap();
        let mut again = Vec::new();
        export_model(&back, &mut again).unwrap();
        prop_assert_eq!(buf, again);
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let p = GameParams {
        k_max: 3,
        ..GameParams::default()
    };
    let prop = parse_property("<<p1:p2,p3>> R{\"r1\"}max=? [ F k=kmax+1 ]", &p).unwrap();
    let run = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let m = model(&p);
            let mut buf = Vec::new();
            export_model(&m, &mut buf).unwrap();
            let values = check(&m, &prop).unwrap().valuation.values;
            (buf, values.iter().map(|v| v.to_bits()).collect::<Vec<_>>())
        })
    };
    assert_eq!(run(1), run(4));
}
