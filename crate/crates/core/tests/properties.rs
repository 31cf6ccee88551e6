use num_complex::Complex64;
use proptest::prelude::*;
use shearbasin::dynamics::{torus_act, PointMap};
use shearbasin::jets::{Jet, JetMap};
use shearbasin::maps::{build_f, eval_g_exact, project_pi, Params};

const ORDER: u32 = 5;

fn gaussian_jet(nvars: usize, min_degree: u32) -> impl Strategy<Value = Jet> {
    let term = (prop::collection::vec(0u32..4, nvars), -3i32..=3, -3i32..=3);
    prop::collection::vec(term, 0..6).prop_map(move |terms| {
        let kept = terms.into_iter().filter_map(|(e, re, im)| {
            let d: u32 = e.iter().sum();
            (d >= min_degree && d <= ORDER).then(|| (e, Complex64::new(re as f64, im as f64)))
        });
        Jet::from_terms(nvars, ORDER, kept).unwrap()
    })
}

fn tangent_map(nvars: usize) -> impl Strategy<Value = JetMap> {
    prop::collection::vec(gaussian_jet(nvars, 2), nvars).prop_map(move |highs| {
        let id = JetMap::identity(nvars, ORDER);
        let comps = id
            .components()
            .iter()
            .zip(highs)
            .map(|(x, h)| x.add(&h).unwrap())
            .collect();
        JetMap::new(comps).unwrap()
    })
}

fn small_point(k: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        (-0.3f64..0.3, -0.3f64..0.3).prop_map(|(r, i)| Complex64::new(r, i)),
        k,
    )
}

proptest! {
    #[test]
    fn ring_axioms_exact(a in gaussian_jet(3, 0), b in gaussian_jet(3, 0), c in gaussian_jet(3, 0)) {
        prop_assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        prop_assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        prop_assert_eq!(
            a.mul(&b.add(&c).unwrap()).unwrap(),
            a.mul(&b).unwrap().add(&a.mul(&c).unwrap()).unwrap()
        );
        prop_assert!(a.sub(&a).unwrap().is_zero());
    }

    #[test]
    fn composition_associative(f in tangent_map(2), g in tangent_map(2), h in tangent_map(2)) {
        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap();
        prop_assert!(left.max_diff(&right) < 1e-9);
    }

    #[test]
    fn identity_is_neutral(f in tangent_map(3)) {
        let id = JetMap::identity(3, ORDER);
        prop_assert!(f.compose(&id).unwrap().max_diff(&f) == 0.0);
        prop_assert!(id.compose(&f).unwrap().max_diff(&f) == 0.0);
    }

    #[test]
    fn jet_json_round_trip(f in tangent_map(3)) {
        let text = serde_json::to_string(&f).unwrap();
        let back: JetMap = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(back, f);
    }

    #[test]
    fn f_is_invertible(p in small_point(3), a in 0.2f64..3.0, c in 0.2f64..5.0) {
        let f = build_f(Params::new(a, a, c).unwrap()).unwrap();
        let back = f.inverse().apply(&f.apply(&p));
        for (x, y) in back.iter().zip(&p) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn f_commutes_with_torus(p in small_point(3), theta in 0.0f64..std::f64::consts::TAU, s in 0.5f64..2.0) {
        let f = build_f(Params::default()).unwrap();
        let lambda = Complex64::from_polar(s, theta);
        let lhs = f.apply(&torus_act(&p, lambda));
        let rhs = torus_act(&f.apply(&p), lambda);
        for (x, y) in lhs.iter().zip(&rhs) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }

    #[test]
    fn projection_semiconjugates(p in small_point(3)) {
        let f = build_f(Params::default()).unwrap();
        let direct = project_pi(&f.apply(&p));
        let via_g = eval_g_exact(project_pi(&p), &f);
        for (x, y) in direct.iter().zip(&via_g) {
            prop_assert!((x - y).norm() < 1e-12);
        }
    }
}
