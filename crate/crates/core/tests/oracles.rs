//! Integration checks against values computed independently in this file.

use confcoh::celie::{lie_action, lie_basis};
use confcoh::exactalg::{cohomology, smith_normal_form, ExactMatrix, Ring};
use confcoh::partitions::{enumerate, DEFAULT_MAX_N};
use confcoh::perm::{factorial, integer_partitions, Perm};
use confcoh::posetcx::{order_complex, Poset, Variant};
use num_bigint::BigInt;

fn stirling2(n: usize, k: usize) -> u64 {
    let mut t = vec![vec![0u64; n + 1]; n + 1];
    t[0][0] = 1;
    for i in 1..=n {
        for j in 1..=i {
            t[i][j] = j as u64 * t[i - 1][j] + t[i - 1][j - 1];
        }
    }
    t[n][k]
}

#[test]
fn partition_counts_are_stirling_numbers() {
    for n in 1..=8 {
        let all = enumerate(n, DEFAULT_MAX_N).unwrap();
        let bell: u64 = (0..=n).map(|k| stirling2(n, k)).sum();
        assert_eq!(all.len() as u64, bell, "n={n}");
        for k in 1..=n {
            let count = all.iter().filter(|p| p.num_blocks() == k).count() as u64;
            assert_eq!(count, stirling2(n, k), "n={n} k={k}");
        }
    }
}

fn mobius(n: usize) -> i64 {
    let (mut m, mut x, mut p) = (1i64, n, 2usize);
    while p * p <= x {
        if x % p == 0 {
            x /= p;
            if x % p == 0 {
                return 0;
            }
            m = -m;
        }
        p += 1;
    }
    if x > 1 {
        m = -m;
    }
    m
}

/// Lie(n) has character μ(d)·d^{m-1}·(m-1)! on cycle type (d^m), n = dm,
/// and 0 on every other class.
#[test]
fn lie_characters_follow_the_mobius_formula() {
    for n in 1..=6 {
        assert_eq!(lie_basis(n).dim() as u64, factorial(n - 1));
        for mu in integer_partitions(n) {
            let g = Perm::class_representative(&mu);
            let trace: BigInt = lie_action(&g)
                .iter()
                .enumerate()
                .filter_map(|(i, col)| col.get(&i))
                .map(|x| x.to_integer())
                .sum();
            let expect = if mu.iter().all(|&p| p == mu[0]) {
                let (d, m) = (mu[0], mu.len());
                mobius(d) * (d as i64).pow(m as u32 - 1) * factorial(m - 1) as i64
            } else {
                0
            };
            assert_eq!(trace, BigInt::from(expect), "n={n} cycle type {mu:?}");
        }
    }
}

#[test]
fn smith_form_of_a_textbook_matrix() {
    let m = ExactMatrix::from_int_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
    let d = smith_normal_form(&m).unwrap().diagonal();
    assert_eq!(d, vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
}

/// The barycentric subdivision of the boundary of a tetrahedron is a 2-sphere.
#[test]
fn face_poset_of_a_tetrahedron_boundary() {
    let faces: Vec<u8> = (1u8..15).collect(); // nonempty proper subsets of 4 vertices
    let labels = faces.iter().map(|f| format!("{f:04b}")).collect();
    let p = Poset::new(labels, |i, j| faces[i] & faces[j] == faces[i]);
    let oc = order_complex(&p, Variant::Plain, Ring::Integers).unwrap();
    let h = cohomology(&oc.complex);
    assert_eq!(h.rank_map(), [(2, 1)].into());
    assert!(h.is_torsion_free());
    assert_eq!(oc.complex.rank(0), 14);
}

/// A triangulated projective plane (6 vertices, 10 triangles): integral
/// cohomology Z/2 in degree 2 and rationally acyclic.
#[test]
fn face_poset_of_the_projective_plane() {
    let tris: [[u8; 3]; 10] = [
        [0, 1, 2], [0, 2, 3], [0, 3, 4], [0, 4, 5], [0, 1, 5],
        [1, 2, 4], [2, 3, 5], [1, 3, 4], [2, 4, 5], [1, 3, 5],
    ];
    let mut faces: Vec<u8> = Vec::new();
    for t in tris {
        for sub in 1u8..8 {
            let f = (0..3).filter(|b| sub >> b & 1 == 1).fold(0u8, |m, b| m | 1 << t[b]);
            faces.push(f);
        }
    }
    faces.sort_unstable();
    faces.dedup();
    assert_eq!(faces.len(), 6 + 15 + 10);
    let labels = faces.iter().map(|f| format!("{f:06b}")).collect();
    let p = Poset::new(labels, |i, j| faces[i] & faces[j] == faces[i]);
    let h = cohomology(&order_complex(&p, Variant::Plain, Ring::Integers).unwrap().complex);
    assert_eq!(h.total_rank(), 0);
    assert_eq!(h.torsion(2), &[BigInt::from(2)]);
    let hq = cohomology(&order_complex(&p, Variant::Plain, Ring::Rationals).unwrap().complex);
    assert!(hq.is_zero());
}
