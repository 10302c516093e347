//! Property tests over the public API. Every runner uses a fixed seed so
//! failures reproduce without a persistence file.

use std::sync::Arc;

use confcoh::celie::{lie_action, lie_basis, normalize, LieWord};
use confcoh::cfcd::{cf_complex, total_cohomology};
use confcoh::exactalg::{cohomology, smith_normal_form, ExactMatrix, Ring, Q};
use confcoh::partitions::{SetPartition, UpSet};
use confcoh::perm::{integer_partitions, Perm};
use confcoh::symfunc::{plethysm, Laurent, SymFunc};
use confcoh::tcdga::{formal_tcdga, GradedModuleInput};
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed};

fn config(seed: u64, cases: u32) -> Config {
    Config { cases, rng_seed: RngSeed::Fixed(seed), failure_persistence: None, ..Config::default() }
}

fn rgs(raw: Vec<u8>) -> SetPartition {
    let mut out = Vec::with_capacity(raw.len());
    let mut next = 0u8;
    for r in raw {
        let b = r.min(next);
        if b == next {
            next += 1;
        }
        out.push(b);
    }
    SetPartition::from_rgs(out).expect("restricted growth string")
}

fn partition_triple() -> impl Strategy<Value = (SetPartition, SetPartition, SetPartition, Perm)> {
    (1usize..=8).prop_flat_map(|n| {
        let part = proptest::collection::vec(0u8..8, n).prop_map(rgs);
        let perm = Just((0..n).collect::<Vec<_>>()).prop_shuffle().prop_map(|v| Perm::from_images(v).unwrap());
        (part.clone(), part.clone(), part, perm)
    })
}

fn int_matrix() -> impl Strategy<Value = ExactMatrix> {
    (1usize..=6, 1usize..=6).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(-5i64..=5, c), r)
            .prop_map(|rows| ExactMatrix::from_int_rows(&rows))
    })
}

/// A sum of a few scaled power sums of arity ≥ `min_arity`.
fn symfunc(max_arity: usize, min_arity: usize) -> impl Strategy<Value = SymFunc> {
    proptest::collection::vec((min_arity..=3usize, 0usize..8, -3i64..=3, 1i64..=3, -1i32..=2), 1..4).prop_map(
        move |terms| {
            let mut f = SymFunc::zero(max_arity);
            for (n, pick, num, den, exp) in terms {
                let parts = integer_partitions(n);
                let mu = &parts[pick % parts.len()];
                let c = Laurent::monomial(Q::new(num.into(), den.into()), exp);
                f = f.add(&SymFunc::p(mu, max_arity).scale(&c)).unwrap();
            }
            f
        },
    )
}

fn lie_word(labels: Vec<usize>, cuts: Vec<usize>) -> LieWord {
    fn build(labels: &[usize], cuts: &mut impl Iterator<Item = usize>) -> LieWord {
        if labels.len() == 1 {
            return LieWord::Leaf(labels[0]);
        }
        let c = 1 + cuts.next().unwrap_or(0) % (labels.len() - 1);
        let left = build(&labels[..c], cuts);
        LieWord::bracket(left, build(&labels[c..], cuts))
    }
    build(&labels, &mut cuts.into_iter())
}

fn lie_triple() -> impl Strategy<Value = (LieWord, LieWord, LieWord)> {
    (3usize..=6)
        .prop_flat_map(|n| {
            (
                Just((1..=n).collect::<Vec<_>>()).prop_shuffle(),
                1..n - 1,
                0..n,
                proptest::collection::vec(0usize..6, 12),
            )
        })
        .prop_map(|(labels, c1, c2, cuts)| {
            let n = labels.len();
            let c2 = c1 + 1 + c2 % (n - c1 - 1);
            (
                lie_word(labels[..c1].to_vec(), cuts.clone()),
                lie_word(labels[c1..c2].to_vec(), cuts[4..].to_vec()),
                lie_word(labels[c2..].to_vec(), cuts[8..].to_vec()),
            )
        })
}

proptest! {
    #![proptest_config(config(11, 256))]

    #[test]
    fn lattice_laws((x, y, z, g) in partition_triple()) {
        let j = |a: &SetPartition, b: &SetPartition| a.join(b).unwrap();
        let m = |a: &SetPartition, b: &SetPartition| a.meet(b).unwrap();
        prop_assert_eq!(j(&x, &y), j(&y, &x));
        prop_assert_eq!(m(&x, &y), m(&y, &x));
        prop_assert_eq!(j(&j(&x, &y), &z), j(&x, &j(&y, &z)));
        prop_assert_eq!(m(&m(&x, &y), &z), m(&x, &m(&y, &z)));
        prop_assert_eq!(j(&x, &m(&x, &y)), x.clone());
        prop_assert_eq!(m(&x, &j(&x, &y)), x.clone());
        prop_assert_eq!(x.refines(&y), j(&x, &y) == y);
        // the action is a lattice automorphism
        prop_assert_eq!(j(&x, &y).act(&g).unwrap(), j(&x.act(&g).unwrap(), &y.act(&g).unwrap()));
        prop_assert_eq!(x.act(&g).unwrap().act(&g.inverse()).unwrap(), x.clone());
        prop_assert_eq!(x.act(&g).unwrap().block_sizes().len(), x.num_blocks());
    }
}

proptest! {
    #![proptest_config(config(12, 128))]

    #[test]
    fn smith_form_contract(m in int_matrix()) {
        let s = smith_normal_form(&m).unwrap();
        let usv = s.u.mul(&m).unwrap().mul(&s.v).unwrap();
        prop_assert!(usv.sub(&s.s).unwrap().is_zero());
        let d = s.diagonal();
        prop_assert_eq!(d.len(), m.rank());
        prop_assert!(d.iter().all(|x| x.is_positive()));
        prop_assert!(d.windows(2).all(|w| (&w[1] % &w[0]).is_zero()));
        prop_assert!(s.u.determinant().unwrap().abs().is_one());
        prop_assert!(s.v.determinant().unwrap().abs().is_one());
    }
}

proptest! {
    #![proptest_config(config(13, 64))]

    #[test]
    fn plethysm_laws(f in symfunc(5, 0), g in symfunc(5, 0), h in symfunc(5, 1), k in symfunc(5, 1), m in 1usize..=3) {
        let c = |a: &SymFunc, b: &SymFunc| plethysm(a, b).unwrap();
        prop_assert_eq!(c(&f.mul(&g).unwrap(), &h), c(&f, &h).mul(&c(&g, &h)).unwrap());
        prop_assert_eq!(c(&f.add(&g).unwrap(), &h), c(&f, &h).add(&c(&g, &h)).unwrap());
        let pm = SymFunc::p(&[m], 5);
        prop_assert_eq!(c(&pm, &h.mul(&k).unwrap()), c(&pm, &h).mul(&c(&pm, &k)).unwrap());
        prop_assert_eq!(c(&c(&f, &h), &SymFunc::p(&[1], 5)), c(&f, &h));
        prop_assert_eq!(SymFunc::from_schur(&f.to_schur(), 5), f);
    }

    #[test]
    fn lie_identities((x, y, z) in lie_triple()) {
        let br = |a: &LieWord, b: &LieWord| LieWord::bracket(a.clone(), b.clone());
        let nz = |w: &LieWord| normalize(w).unwrap().coords;
        let mut anti = nz(&br(&x, &y));
        confcoh::exactalg::axpy(&mut anti, &Q::one(), &nz(&br(&y, &x)));
        prop_assert!(anti.is_empty());
        let mut jac = nz(&br(&x, &br(&y, &z)));
        confcoh::exactalg::axpy(&mut jac, &Q::one(), &nz(&br(&y, &br(&z, &x))));
        confcoh::exactalg::axpy(&mut jac, &Q::one(), &nz(&br(&z, &br(&x, &y))));
        prop_assert!(jac.is_empty());
    }

    #[test]
    fn lie_action_is_a_representation(n in 2usize..=5, a in any::<u64>(), b in any::<u64>()) {
        let all = Perm::all(n);
        let (g, h) = (&all[a as usize % all.len()], &all[b as usize % all.len()]);
        let dim = lie_basis(n).dim();
        let mat = |p: &Perm| ExactMatrix::from_columns(Ring::Rationals, dim, (*lie_action(p)).clone()).unwrap();
        let lhs = mat(&g.compose(h));
        let rhs = mat(g).mul(&mat(h)).unwrap();
        let alt = mat(h).mul(&mat(g)).unwrap();
        // one of the two composition orders must match
        prop_assert!(lhs.sub(&rhs).unwrap().is_zero() || lhs.sub(&alt).unwrap().is_zero());
        // characters are class functions
        let t = mat(g).trace();
        let conj = h.inverse().compose(g).compose(h);
        prop_assert_eq!(mat(&conj).trace(), t);
    }
}

proptest! {
    #![proptest_config(config(14, 24))]

    /// Integral cohomology rationalizes to rational cohomology and both keep
    /// the Euler characteristic of the chains.
    #[test]
    fn cf_euler_and_rationalization(n in 2usize..=4, k in 2usize..=4, deg in 0i32..=3, rank in 1usize..=2) {
        prop_assume!(k <= n);
        let u = UpSet::k_equals(n, k).unwrap();
        let hz = GradedModuleInput::new(Ring::Integers, [(deg, rank)]);
        let hq = GradedModuleInput::new(Ring::Rationals, [(deg, rank)]);
        let cz = cf_complex(&u, Arc::new(formal_tcdga(&hz, n).unwrap()), Ring::Integers).unwrap();
        let cq = cf_complex(&u, Arc::new(formal_tcdga(&hq, n).unwrap()), Ring::Rationals).unwrap();
        let z = total_cohomology(&cz);
        let q = total_cohomology(&cq);
        prop_assert_eq!(z.rationalize().rank_map(), q.rank_map());
        prop_assert_eq!(z.euler_characteristic(), cz.bar.complex.euler_characteristic());
        prop_assert_eq!(cohomology(&cq.bar.complex).rank_map(), q.rank_map());
    }
}
