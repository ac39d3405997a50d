use berkcrucial::crucial::{ordres_direct, ordres_via_formula};
use berkcrucial::maps::RationalMap;
use berkcrucial::points::BerkPoint;
use berkcrucial::profile;
use berkcrucial::rat::{q, ExtValue, Q};
use berkcrucial::sample;
use berkcrucial::tree::{laplacian, nu_f_gamma_dual, TreePlf};
use berkcrucial::TowerElem;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn prime() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 5, 7])
}

fn rational() -> impl Strategy<Value = Q> {
    (-60i64..=60, 1i64..=40).prop_map(|(n, d)| Q::new(n.into(), d.into()))
}

fn point(p: u64) -> impl Strategy<Value = BerkPoint> {
    (rational(), -6i64..=8).prop_map(move |(c, t)| BerkPoint::zeta_q(p, &c, &Q::new(t.into(), 2.into())))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn valuation_is_multiplicative_and_ultrametric(p in prime(), a in rational(), b in rational(), e in 1u32..=3) {
        let x = TowerElem::from_q(p, e, a);
        let y = TowerElem::from_q(p, e, b);
        prop_assert_eq!((&x * &y).val(), x.val().add(&y.val()));
        let s = (&x + &y).val();
        prop_assert!(s >= x.val().min(y.val()));
    }

    #[test]
    fn uniformizer_has_valuation_one_over_e(p in prime(), e in 1u32..=4) {
        prop_assert_eq!(TowerElem::pi(p, e).val(), ExtValue::Fin(Q::new(1.into(), (e as i64).into())));
    }

    #[test]
    fn hyperbolic_distance_is_a_metric(p in prime(), (a, b, c) in prime().prop_flat_map(|p| (point(p), point(p), point(p)))) {
        let _ = p;
        let ab = a.rho_fin(&b);
        prop_assert_eq!(ab.clone(), b.rho_fin(&a));
        prop_assert!(ab <= a.rho_fin(&c) + c.rho_fin(&b));
        prop_assert_eq!(a.rho_fin(&a), q(0));
    }

    #[test]
    fn ordres_routes_agree(seed in any::<u64>(), d in 2usize..=3, p in prime()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let f = sample::random_map(&mut r, p, d);
        let s = sample::random_point(&mut r, p);
        prop_assert_eq!(ordres_direct(&f, &s).unwrap(), ordres_via_formula(&f, &s).unwrap());
    }

    #[test]
    fn tree_measures_have_unit_mass(seed in any::<u64>(), d in 2usize..=3, p in prime()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let f = sample::random_map(&mut r, p, d);
        let tree = sample::random_tree(&mut r, p, 3);
        let nu = nu_f_gamma_dual(&f, &tree).unwrap();
        prop_assert_eq!(nu.total(), q(1));
        let phi = TreePlf::from_rays(&tree, &|c| Ok(profile::crucial(&f, c))).unwrap();
        prop_assert_eq!(laplacian(&phi).total(), q(0));
    }

    #[test]
    fn conjugation_by_translation_preserves_the_resultant_minimum(seed in any::<u64>(), p in prime()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let f = sample::random_map(&mut r, p, 2);
        let s = sample::random_point(&mut r, p);
        let a = TowerElem::from_int(p, 1, 1);
        let h = berkcrucial::maps::Mobius::affine(&a, &TowerElem::one(p, 1));
        let g: RationalMap = f.conjugate(&h);
        let moved = s.affine_preimage(&a, &TowerElem::one(p, 1));
        prop_assert_eq!(ordres_direct(&f, &s).unwrap(), ordres_direct(&g, &moved).unwrap());
    }
}
