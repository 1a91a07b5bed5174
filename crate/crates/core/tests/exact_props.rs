use proptest::prelude::*;
use quiverlax::dynkin::{apply_word, cartan_matrix, coxeter_exponent, reflect_param, ParamVector};
use quiverlax::quiver::AlmostAffineQuiver;
use quiverlax::sakai::{
    act, act_word, cartan, chi, params, reflect_config, reflect_pic, sakai_orbit, wall_check, PicElem, PicardLattice, PointConfig,
};
use quiverlax::scalar::q;
use quiverlax::{AffineType, Q};

fn rational() -> impl Strategy<Value = Q> {
    (-60i64..60, 1i64..10).prop_map(|(n, d)| q(n, d))
}

fn lambda_for(ty: AffineType) -> impl Strategy<Value = ParamVector<Q>> {
    proptest::collection::vec(rational(), ty.graph().num_nodes()).prop_map(ParamVector)
}

fn any_type() -> impl Strategy<Value = AffineType> {
    prop_oneof![
        Just(AffineType::D4),
        Just(AffineType::E6),
        Just(AffineType::E7),
        Just(AffineType::E8)
    ]
}

fn config(r: usize) -> impl Strategy<Value = PointConfig> {
    proptest::collection::vec(rational(), r).prop_map(|u| PointConfig::new(u).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reflections_are_involutions((ty, l) in any_type().prop_flat_map(|t| (Just(t), lambda_for(t)))) {
        let c = cartan_matrix(&ty.graph());
        for i in 0..l.len() {
            prop_assert_eq!(reflect_param(&c, i, &reflect_param(&c, i, &l)), l.clone());
        }
    }

    #[test]
    fn coxeter_relations((ty, l) in any_type().prop_flat_map(|t| (Just(t), lambda_for(t)))) {
        let g = ty.graph();
        let c = cartan_matrix(&g);
        for i in 0..l.len() {
            for j in i + 1..l.len() {
                let m = coxeter_exponent(&g, i, j);
                let word: Vec<usize> = (0..m).flat_map(|_| [i, j]).collect();
                prop_assert_eq!(apply_word(&c, &word, &l), l.clone());
            }
        }
    }

    #[test]
    fn central_reflection_through_the_incremented_quiver(
        (ty, raw) in any_type().prop_flat_map(|t| {
            let n = AlmostAffineQuiver::affine(t).increment().graph.num_nodes();
            (Just(t), proptest::collection::vec(rational(), n))
        })
    ) {
        let inc = AlmostAffineQuiver::affine(ty).increment();
        let mut l = ParamVector(raw);
        let last = inc.graph.node(inc.full_leg, inc.graph.legs()[inc.full_leg]);
        let lvl = inc.level(&l);
        l.0[last] = l.0[last].clone() - lvl;
        let c = cartan_matrix(&ty.graph());
        let lhs = reflect_param(&c, 0, &inc.project_params(&l));
        let rhs = inc.project_params(&inc.permute_params(&l));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn reflections_preserve_the_form(r in 6usize..=9, coeffs in proptest::collection::vec(-5i64..5, 10), k in 0usize..6) {
        let lat = PicardLattice::new(r).unwrap();
        let f = PicElem::from_ints(&coeffs[..=r]);
        let g = PicElem::from_ints(&coeffs.iter().rev().take(r + 1).copied().collect::<Vec<_>>());
        let a = lat.alpha(k);
        let (sf, sg) = (reflect_pic(&lat, &f, &a), reflect_pic(&lat, &g, &a));
        prop_assert_eq!(lat.dot(&sf, &sg), lat.dot(&f, &g));
        prop_assert_eq!(reflect_pic(&lat, &lat.delta(), &a), lat.delta());
    }

    #[test]
    fn configuration_action_is_equivariant(p in (6usize..=9).prop_flat_map(config), k in 0usize..6) {
        let lat = p.lattice();
        let moved = act(&p, k).unwrap();
        for l in lat.simple_roots() {
            prop_assert_eq!(chi(&moved, &l).unwrap(), chi(&p, &reflect_pic(&lat, &l, &lat.alpha(k))).unwrap());
        }
        prop_assert_eq!(params(&moved), reflect_param(&cartan(&lat), lat.node_of(k), &params(&p)));
    }

    #[test]
    fn walls_map_to_walls(p in (6usize..=8).prop_flat_map(config), k in 0usize..6, i in 0usize..5) {
        // force a coincidence, then move it around
        let mut on = p.clone();
        on.u[i + 1] = on.u[i].clone();
        prop_assert!(!wall_check(&on).is_empty());
        prop_assert!(!wall_check(&act(&on, k).unwrap()).is_empty());
        // and generic stays generic
        if wall_check(&p).is_empty() {
            prop_assert!(wall_check(&act(&p, k).unwrap()).is_empty());
        }
    }
}

#[test]
fn configuration_generators_satisfy_coxeter_relations() {
    for r in 6..=9 {
        let p = PointConfig::new((0..r).map(|i| q(i as i64 * 7 - 11, (i % 4) as i64 + 2)).collect()).unwrap();
        let lat = p.lattice();
        let g = lat.star_graph();
        for i in 0..r {
            for j in i + 1..r {
                let m = coxeter_exponent(&g, lat.node_of(i), lat.node_of(j));
                let word: Vec<usize> = (0..m).flat_map(|_| [i, j]).collect();
                assert_eq!(act_word(&p, &word).unwrap(), p, "r = {r}, ({i}, {j})");
            }
        }
    }
}

#[test]
fn nine_point_translation_is_a_product_of_two_reflections() {
    let p = PointConfig::new((0..8).map(|i| q(3 * i - 7, 5)).chain([q(1, 1) - q(3 * 28 - 56, 5)]).collect()).unwrap();
    assert_eq!(p.sum(), q(1, 1));
    let lat = p.lattice();
    let alpha = lat.alpha(4);
    let image = lat.delta().sub(&alpha);
    let twice = reflect_config(&reflect_config(&p, &alpha).unwrap(), &image).unwrap();
    // chi_p o s_alpha o s_{delta - alpha} moves every u by a fixed vector
    let d: Vec<Q> = twice.u.iter().zip(&p.u).map(|(a, b)| a - b).collect();
    for i in 1..=9 {
        assert_eq!(d[i - 1], lat.dot(&lat.beta(i), &alpha) * p.sum());
    }
    assert_eq!(twice.sum(), p.sum());
    // the same step as a parameter translation
    let mu: Vec<i64> = params(&twice)
        .0
        .iter()
        .zip(&params(&p).0)
        .map(|(a, b)| (a - b).to_integer().try_into().unwrap())
        .collect();
    let rows = sakai_orbit(&p, &mu, 3).unwrap();
    assert_eq!(rows[1].config, twice);
}
