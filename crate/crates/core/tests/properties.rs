use conekit::bundle::{
    aut_dimension, common_apartment, face_lattice_basis, inf_matrix, klyachko_filtration, parabolic_intersection_dimension,
    payne_compatibility, restrict_along, restrict_multichar, split_flags, weyl_hull, Fan, LatticeChain, Mat2,
    MultiCharacter, Scalar, Uniformizer,
};
use conekit::complex::PoGroup;
use conekit::cone::Cone;
use conekit::lattice::{smith_normal_form, IVec, Int, IntegerMatrix};
use conekit::linalg::{solve, to_rat, Rat};
use conekit::monoid::FineMonoid;
use conekit::Error;
use conekit::morphism::{self, InfResult, MonoidMap};
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn ivec(v: &[i64]) -> IVec {
    v.iter().map(|&x| Int::from(x)).collect()
}

fn vecs(n: usize, k: std::ops::RangeInclusive<usize>, b: i64) -> impl Strategy<Value = Vec<IVec>> {
    prop::collection::vec(prop::collection::vec(-b..=b, n), k).prop_map(|v| v.iter().map(|x| ivec(x)).collect())
}

/// A pointed, nonzero cone of rank 1 to 3 from a few small generators.
fn pointed_cone() -> impl Strategy<Value = Cone> {
    (1usize..=3)
        .prop_flat_map(|n| (Just(n), vecs(n, 1..=4, 3)))
        .prop_map(|(n, g)| Cone::from_generators(n, &g))
        .prop_filter("pointed and nonzero", |c| c.is_pointed() && !c.is_zero())
}

fn cone_and_chars() -> impl Strategy<Value = (Cone, MultiCharacter)> {
    (1usize..=3).prop_flat_map(|n| (vecs(n, 1..=4, 2), vecs(n, 1..=4, 2))).prop_map(|(g, l)| {
        let n = g[0].len();
        (Cone::from_generators(n, &g), MultiCharacter::new(n, l).unwrap())
    })
}

fn sub(a: &[Int], b: &[Int]) -> IVec {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn hilbert_basis_generates_and_is_irreducible(c in pointed_cone()) {
        let hb = c.hilbert_basis().unwrap();
        for h in &hb {
            prop_assert!(c.contains(h));
            for g in &hb {
                prop_assert!(g == h || !c.contains(&sub(h, g)), "{h:?} - {g:?} lies in the cone");
            }
        }
        for r in c.rays() {
            prop_assert!(hb.contains(r), "primitive ray {r:?} missing");
        }
    }

    #[test]
    fn smith_form_is_diagonal_with_divisibility(rows in 1usize..=3, cols in 1usize..=3, seed in prop::collection::vec(-6i64..=6, 9)) {
        let m = IntegerMatrix::from_i64(rows, cols, &seed[..rows * cols]);
        let (u, d, v) = smith_normal_form(&m);
        prop_assert_eq!(u.mul(&m).mul(&v), d.clone());
        prop_assert!(u.det().abs() == Int::from(1) && v.det().abs() == Int::from(1));
        let diag: Vec<Int> = (0..rows.min(cols)).map(|i| d.get(i, i).clone()).collect();
        for i in 0..rows {
            for j in 0..cols {
                prop_assert!(i == j || d.get(i, j).is_zero());
            }
        }
        for w in diag.windows(2) {
            let divides = if w[0].is_zero() { w[1].is_zero() } else { (&w[1] % &w[0]).is_zero() };
            prop_assert!(divides, "{:?}", diag);
        }
    }

    #[test]
    fn saturation_is_saturated_and_contains(n in 1usize..=3, g in vecs(3, 1..=4, 3)) {
        let gens: Vec<IVec> = g.into_iter().map(|v| v[..n].to_vec()).collect();
        prop_assume!(Cone::from_generators(n, &gens).is_pointed());
        let p = FineMonoid::new(n, gens.clone()).unwrap();
        let s = p.saturation().unwrap();
        prop_assert!(s.is_saturated());
        for x in &gens {
            prop_assert!(s.contains(x));
        }
        prop_assert_eq!(p.is_saturated(), p == s);
    }

    #[test]
    fn restriction_is_functorial((c, u) in cone_and_chars()) {
        for face in c.faces() {
            if face.cone.is_zero() {
                continue;
            }
            let basis = face_lattice_basis(&face.cone);
            let ut = restrict_multichar(&u, &face.cone).unwrap();
            prop_assert_eq!(ut.len(), u.len());
            let cols = IntegerMatrix::from_cols(&basis, c.ambient_rank());
            let rows: Vec<_> = (0..cols.rows()).map(|i| to_rat(&cols.row(i))).collect();
            for r in face.cone.rays() {
                let primitive = face_lattice_basis(&Cone::from_generators(c.ambient_rank(), &[r.clone()]));
                let coords = solve(&rows, &to_rat(&primitive[0]), basis.len()).expect("ray lies in the span of its face");
                prop_assert!(coords.iter().all(|x| x.is_integer()));
                let coords: IVec = coords.iter().map(|x| x.to_integer()).collect();
                let direct = restrict_multichar(&u, &Cone::from_generators(c.ambient_rank(), &[r.clone()])).unwrap();
                prop_assert_eq!(restrict_along(&ut, &[coords]), direct);
            }
        }
    }

    #[test]
    fn klyachko_dims_count_characters(u in prop::collection::vec(-4i64..=4, 1..=6)) {
        let u = ivec(&u);
        let f = klyachko_filtration(&u);
        let mut sorted = u.clone();
        sorted.sort();
        let mut ms = f.multiset();
        ms.sort();
        prop_assert_eq!(ms, sorted);
        for (w, d) in f.weights().iter().zip(f.dims()) {
            prop_assert_eq!(d, u.iter().filter(|x| *x >= w).count());
        }
        prop_assert_eq!(*f.dims().last().unwrap(), u.len());
    }

    #[test]
    fn aut_dimension_is_parabolic_dimension((c, u) in cone_and_chars()) {
        prop_assert_eq!(aut_dimension(&c, &u), parabolic_intersection_dimension(&c, &u));
    }

    #[test]
    fn weyl_hull_contains_sigma_and_is_idempotent(
        n in 2usize..=3,
        rays in vecs(3, 1..=4, 2),
        l in vecs(3, 1..=3, 2),
    ) {
        // realizations over N at nonnegative height in the last coordinate
        let rays: Vec<IVec> = rays.into_iter().map(|mut r| { r.truncate(n); r[n - 1] = r[n - 1].abs(); r }).collect();
        let l: Vec<IVec> = l.into_iter().map(|mut x| { x.truncate(n); x }).collect();
        let mut bm = vec![0i64; n];
        bm[n - 1] = 1;
        let sigma = PoGroup::from_realization(n, &rays, FineMonoid::free(1), IntegerMatrix::from_i64(n, 1, &bm));
        prop_assume!(sigma.is_ok());
        let sigma = sigma.unwrap();
        // infima need an exact base morphism
        prop_assume!(morphism::is_exact(&sigma.base_morphism().unwrap()).unwrap().holds);
        let lambda = MultiCharacter::new(n, l).unwrap();
        let hull = match weyl_hull(&sigma, &lambda) {
            Err(Error::InfUndefined(..)) => return Ok(()),
            r => r.unwrap(),
        };
        prop_assert!(hull.realization().contains_cone(&sigma.realization()));
        prop_assert_eq!(weyl_hull(&hull, &lambda).unwrap().realization(), hull.realization());
        let a = inf_matrix(&sigma, &lambda).unwrap();
        let b = inf_matrix(&hull, &lambda).unwrap();
        for (ra, rb) in a.entries.iter().zip(&b.entries) {
            for (x, y) in ra.iter().zip(rb) {
                if let InfResult::Max(_) = x {
                    prop_assert_eq!(x, y);
                }
            }
        }
    }

    #[test]
    fn payne_accepts_split_models(u in vecs(2, 1..=4, 3)) {
        let u = MultiCharacter::new(2, u).unwrap();
        let fan = Fan { dim: 2, rays: vec![ivec(&[1, 0]), ivec(&[0, 1])], cones: vec![vec![0, 1], vec![0], vec![1]] };
        let project = |keep: usize| {
            let chars = u.chars().iter().map(|x| (0..2).map(|i| if i == keep { x[i].clone() } else { Int::zero() }).collect()).collect();
            MultiCharacter::new(2, chars).unwrap()
        };
        let psi = vec![u.clone(), project(0), project(1)];
        let flags = split_flags(&fan, &psi);
        prop_assert_eq!(payne_compatibility(&fan, &flags, &psi).unwrap(), None);
    }

    #[test]
    fn infimum_is_the_maximum_of_lower_bounds(
        r in 1usize..=2,
        s in 1usize..=3,
        m in prop::collection::vec(0i64..=2, 6),
        q in prop::collection::vec(-4i64..=4, 3),
    ) {
        prop_assume!(s >= r);
        let mat = IntegerMatrix::from_i64(s, r, &m[..r * s]);
        let Ok(h) = MonoidMap::new(FineMonoid::free(r), FineMonoid::free(s), mat.clone()) else { return Ok(()) };
        prop_assume!(morphism::is_exact(&h).unwrap().holds);
        let q = ivec(&q[..s]);
        let below = |x: &IVec| mat.mul_vec(x).iter().zip(&q).all(|(a, b)| a <= b);
        let mut lower = Vec::new();
        for a in -6i64..=6 {
            for b in if r == 2 { -6i64..=6 } else { 0..=0 } {
                let x = ivec(&[a, b][..r]);
                if below(&x) {
                    lower.push(x);
                }
            }
        }
        let geq = |a: &IVec, b: &IVec| a.iter().zip(b).all(|(x, y)| x >= y);
        match morphism::infimum(&h, &q).unwrap() {
            InfResult::Max(x) => {
                prop_assert!(below(&x));
                prop_assert!(lower.iter().all(|y| geq(&x, y)));
            }
            InfResult::NoMax(xs) => {
                prop_assert!(xs.len() > 1);
                for a in &xs {
                    prop_assert!(below(a));
                    prop_assert!(xs.iter().all(|b| a == b || !geq(a, b)));
                }
            }
            InfResult::NoLowerBound => prop_assert!(lower.is_empty()),
        }
    }

    #[test]
    fn apartment_of_a_geodesic(
        g in prop::collection::vec(-3i64..=3, 4),
        exps in prop::collection::vec((-2i64..=2, -2i64..=2), 1..=4),
        prime in prop::bool::ANY,
    ) {
        let det = g[0] * g[3] - g[1] * g[2];
        prop_assume!(det != 0);
        let pi = if prime { Uniformizer::Prime(Int::from(3)) } else { Uniformizer::Formal };
        let k = |x: i64| Scalar::rational(Rat::from_integer(x.into()));
        // columns g e_1 π^a and g e_2 π^b
        let lattices: Vec<Mat2> = exps
            .iter()
            .map(|&(a, b)| {
                let (pa, pb) = (pi.pi_pow(a), pi.pi_pow(b));
                [[k(g[0]).mul(&pa), k(g[1]).mul(&pb)], [k(g[2]).mul(&pa), k(g[3]).mul(&pb)]]
            })
            .collect();
        let chain = LatticeChain { uniformizer: pi.clone(), lattices };
        for i in 0..exps.len() {
            for j in 0..exps.len() {
                let want = ((exps[i].0 - exps[i].1) - (exps[j].0 - exps[j].1)).abs();
                prop_assert_eq!(chain.distance(i, j), want);
            }
        }
        let a = common_apartment(&chain).unwrap();
        prop_assert!(a.is_some(), "lattices on one line have an apartment");
        let a = a.unwrap();
        prop_assert_eq!(chain.expand_in(&a.basis), Some(a.exponents.clone()));
    }
}
