//! A∞ morphisms H(I) → A with vanishing higher operations on H(I), for an
//! ideal I of a finite dg algebra whose cohomology maps to zero in H(A).
//!
//! With f a choice of cocycle representatives and g solving d∘g = -f, the maps
//! f_n(x₁,…,x_n) = (-1)^{Σ_{l<n} (n-l)|x_l|} f(x₁)·g(x₂)⋯g(x_n) satisfy
//! d f_n = Σ_{i+j=n} (-1)^i (-1)^{(1-j)(|x₁|+…+|x_i|)} f_i(x₁…x_i)·f_j(x_{i+1}…x_n).

use std::collections::{BTreeMap, HashMap};

use num_traits::One;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{
    add_entry, axpy, cohomology, AlgebraError, CohomologyBasis, ExactMatrix, GradedComplex, Ring, SparseVec, Q,
};
use crate::tcdga::{check_ring, d_to_json, index_of, lookup, parse_d, BasisJson, Coeff, FiniteCdga, TcdgaError};

#[derive(Debug, Error)]
pub enum AinftyError {
    #[error("invalid dg algebra: {0}")]
    Invalid(String),
    #[error("hypotheses fail: {0}")]
    Hypothesis(String),
    #[error("no solution of d∘g = -f for class {0}")]
    Infeasible(usize),
    #[error(transparent)]
    Tcdga(#[from] TcdgaError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

fn sign(odd: bool) -> Q {
    if odd {
        -Q::one()
    } else {
        Q::one()
    }
}

fn odd(d: i32) -> bool {
    d.rem_euclid(2) == 1
}

/// Finite dg algebra, associative but not necessarily commutative or unital.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteDga {
    pub ring: Ring,
    pub names: Vec<String>,
    pub degrees: Vec<i32>,
    pub d: Vec<SparseVec>,
    /// `mult[a][b]` = a·b
    pub mult: Vec<Vec<SparseVec>>,
}

impl From<&FiniteCdga> for FiniteDga {
    fn from(c: &FiniteCdga) -> Self {
        FiniteDga {
            ring: c.ring,
            names: c.names.clone(),
            degrees: c.degrees.clone(),
            d: c.d.clone(),
            mult: c.mult.clone(),
        }
    }
}

impl FiniteDga {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn product(&self, a: &SparseVec, b: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, x) in a {
            for (j, y) in b {
                axpy(&mut out, &(x * y), &self.mult[*i][*j]);
            }
        }
        out
    }

    pub fn apply_d(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (i, x) in v {
            axpy(&mut out, x, &self.d[*i]);
        }
        out
    }

    /// d of degree 1, d² = 0, homogeneous products, Leibniz, associativity.
    pub fn validate(&self) -> Result<(), AinftyError> {
        let n = self.dim();
        let bad = |m: String| Err(AinftyError::Invalid(m));
        if self.degrees.len() != n || self.d.len() != n || self.mult.len() != n || self.mult.iter().any(|r| r.len() != n) {
            return bad("table shapes disagree with the basis".into());
        }
        let e = |i: usize| SparseVec::from([(i, Q::one())]);
        let homogeneous = |v: &SparseVec, deg: i32| v.keys().all(|&k| k < n && self.degrees[k] == deg);
        for i in 0..n {
            if !homogeneous(&self.d[i], self.degrees[i] + 1) {
                return bad(format!("d({}) is not of degree +1", self.names[i]));
            }
            if !self.apply_d(&self.d[i]).is_empty() {
                return bad(format!("d²({}) ≠ 0", self.names[i]));
            }
            for c in self.d[i].values() {
                check_ring(self.ring, c)?;
            }
        }
        for i in 0..n {
            for j in 0..n {
                let ab = &self.mult[i][j];
                if !homogeneous(ab, self.degrees[i] + self.degrees[j]) {
                    return bad(format!("{}·{} has the wrong degree", self.names[i], self.names[j]));
                }
                let mut rhs = self.product(&self.d[i], &e(j));
                axpy(&mut rhs, &sign(odd(self.degrees[i])), &self.product(&e(i), &self.d[j]));
                if self.apply_d(ab) != rhs {
                    return bad(format!("Leibniz fails on {}, {}", self.names[i], self.names[j]));
                }
                for l in 0..n {
                    if self.product(ab, &e(l)) != self.product(&e(i), &self.mult[j][l]) {
                        return bad(format!("associativity fails on {}, {}, {}", self.names[i], self.names[j], self.names[l]));
                    }
                }
            }
        }
        Ok(())
    }

    /// `A ⊗ B` with `d(a⊗b) = da⊗b + (-1)^{|a|} a⊗db` and
    /// `(a⊗b)(a'⊗b') = (-1)^{|b||a'|} aa'⊗bb'`; basis index `a·dim B + b`.
    pub fn tensor(&self, other: &FiniteDga) -> FiniteDga {
        let (m, k) = (self.dim(), other.dim());
        let idx = |a: usize, b: usize| a * k + b;
        let mut names = Vec::with_capacity(m * k);
        let mut degrees = Vec::with_capacity(m * k);
        let mut d = Vec::with_capacity(m * k);
        for a in 0..m {
            for b in 0..k {
                names.push(format!("{}⊗{}", self.names[a], other.names[b]));
                degrees.push(self.degrees[a] + other.degrees[b]);
                let mut v = SparseVec::new();
                for (x, c) in &self.d[a] {
                    add_entry(&mut v, idx(*x, b), c.clone());
                }
                let s = sign(odd(self.degrees[a]));
                for (y, c) in &other.d[b] {
                    add_entry(&mut v, idx(a, *y), &s * c);
                }
                d.push(v);
            }
        }
        let mut mult = vec![vec![SparseVec::new(); m * k]; m * k];
        for a in 0..m {
            for b in 0..k {
                for a2 in 0..m {
                    for b2 in 0..k {
                        let s = sign(odd(other.degrees[b] * self.degrees[a2]));
                        let v = &mut mult[idx(a, b)][idx(a2, b2)];
                        for (x, c) in &self.mult[a][a2] {
                            for (y, e) in &other.mult[b][b2] {
                                add_entry(v, idx(*x, *y), &s * c * e);
                            }
                        }
                    }
                }
            }
        }
        FiniteDga {
            ring: self.ring,
            names,
            degrees,
            d,
            mult,
        }
    }

    /// Cochain complex of the span of `keep` (a d-stable set of basis
    /// indices), with the global index of each local basis element.
    fn complex_on(&self, keep: &[usize]) -> Result<(GradedComplex, BTreeMap<i32, Vec<usize>>), AinftyError> {
        let mut by_deg: BTreeMap<i32, Vec<usize>> = BTreeMap::new();
        for &i in keep {
            by_deg.entry(self.degrees[i]).or_default().push(i);
        }
        let (Some(&lo), Some(&hi)) = (by_deg.keys().next(), by_deg.keys().last()) else {
            return Ok((GradedComplex::empty(self.ring), by_deg));
        };
        for k in lo..=hi {
            by_deg.entry(k).or_default();
        }
        let local: HashMap<usize, usize> = by_deg.values().flat_map(|v| v.iter().enumerate().map(|(p, &g)| (g, p))).collect();
        let mut diffs = Vec::new();
        for k in lo..hi {
            let (src, tgt) = (&by_deg[&k], &by_deg[&(k + 1)]);
            let mut trips = Vec::new();
            for (c, &g) in src.iter().enumerate() {
                for (t, x) in &self.d[g] {
                    let row = *local.get(t).ok_or_else(|| AinftyError::Invalid(format!("d leaves the span at {}", self.names[g])))?;
                    trips.push((row, c, x.clone()));
                }
            }
            diffs.push(ExactMatrix::from_triplets(self.ring, tgt.len(), src.len(), trips)?);
        }
        let labels = by_deg.values().map(|v| v.iter().map(|&g| self.names[g].clone()).collect()).collect();
        let ranks = by_deg.values().map(Vec::len).collect();
        Ok((GradedComplex::new(self.ring, lo, ranks, diffs, labels)?, by_deg))
    }

    /// `span{1, c, w}` with `dc = w` and all products of c, w zero.
    pub fn three_dim_example() -> FiniteDga {
        FiniteDga::from(&FiniteCdga::three_dim_example())
    }

    /// Non-commutative fixture with nonzero f·g products: c (0), w (1),
    /// b (1), v (2), `dc = w`, `db = v`, `w·w = v`, `c·w = b`, `w·c = -b`.
    pub fn four_dim_example() -> FiniteDga {
        let e = |i: usize, x: i64| SparseVec::from([(i, Q::from_integer(x.into()))]);
        let z = SparseVec::new;
        let (c, w, b, v) = (0, 1, 2, 3);
        let mut mult = vec![vec![z(); 4]; 4];
        mult[w][w] = e(v, 1);
        mult[c][w] = e(b, 1);
        mult[w][c] = e(b, -1);
        FiniteDga {
            ring: Ring::Rationals,
            names: vec!["c".into(), "w".into(), "b".into(), "v".into()],
            degrees: vec![0, 1, 1, 2],
            d: vec![e(w, 1), z(), e(v, 1), z()],
            mult,
        }
    }

    /// `four_dim_example` with a unit adjoined at index 0.
    pub fn unital_four_dim_example() -> FiniteDga {
        let base = FiniteDga::four_dim_example();
        let shift = |v: &SparseVec| -> SparseVec { v.iter().map(|(i, x)| (i + 1, x.clone())).collect() };
        let n = base.dim() + 1;
        let mut mult = vec![vec![SparseVec::new(); n]; n];
        for i in 0..n {
            mult[0][i] = SparseVec::from([(i, Q::one())]);
            mult[i][0] = SparseVec::from([(i, Q::one())]);
        }
        for i in 1..n {
            for j in 1..n {
                mult[i][j] = shift(&base.mult[i - 1][j - 1]);
            }
        }
        FiniteDga {
            ring: base.ring,
            names: std::iter::once("1".to_string()).chain(base.names.iter().cloned()).collect(),
            degrees: std::iter::once(0).chain(base.degrees.iter().copied()).collect(),
            d: std::iter::once(SparseVec::new()).chain(base.d.iter().map(shift)).collect(),
            mult,
        }
    }
}

/// An ideal spanned by a subset of the basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IdealData {
    pub basis: Vec<usize>,
}

impl IdealData {
    pub fn validate(&self, a: &FiniteDga) -> Result<(), AinftyError> {
        let inside: Vec<bool> = (0..a.dim()).map(|i| self.basis.contains(&i)).collect();
        if self.basis.iter().any(|&i| i >= a.dim()) {
            return Err(AinftyError::Invalid("ideal basis index out of range".into()));
        }
        let within = |v: &SparseVec| v.keys().all(|&k| inside[k]);
        for &i in &self.basis {
            if !within(&a.d[i]) {
                return Err(AinftyError::Invalid(format!("d({}) leaves the ideal", a.names[i])));
            }
            for j in 0..a.dim() {
                if !within(&a.mult[i][j]) || !within(&a.mult[j][i]) {
                    return Err(AinftyError::Invalid(format!("{} times {} leaves the ideal", a.names[i], a.names[j])));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HypothesisReport {
    /// degree -> dim H(I)
    pub ideal_cohomology: BTreeMap<i32, usize>,
    pub algebra_cohomology: BTreeMap<i32, usize>,
    /// H(I) is free (always over ℚ)
    pub ideal_free: bool,
    pub induced_map_zero: bool,
    pub failures: Vec<String>,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Representatives of a basis of H(I), with degree, in global coordinates.
fn ideal_classes(a: &FiniteDga, ideal: &IdealData) -> Result<Vec<(i32, SparseVec)>, AinftyError> {
    let (ci, by_deg) = a.complex_on(&ideal.basis)?;
    let basis = CohomologyBasis::new(&ci.clone().with_ring(Ring::Rationals)?);
    let mut out = Vec::new();
    if ci.is_empty() {
        return Ok(out);
    }
    for k in ci.degrees() {
        for z in basis.representatives(k) {
            out.push((k, z.iter().map(|(p, x)| (by_deg[&k][*p], x.clone())).collect()));
        }
    }
    Ok(out)
}

/// Solve d y = target in A for a homogeneous target of degree `k`.
fn solve_boundary(a: &FiniteDga, target: &SparseVec, k: i32) -> Option<SparseVec> {
    let src: Vec<usize> = (0..a.dim()).filter(|&i| a.degrees[i] == k - 1).collect();
    let tgt: Vec<usize> = (0..a.dim()).filter(|&i| a.degrees[i] == k).collect();
    let row: HashMap<usize, usize> = tgt.iter().enumerate().map(|(p, &g)| (g, p)).collect();
    let row = &row;
    let trips = src.iter().enumerate().flat_map(|(c, &g)| a.d[g].iter().map(move |(t, x)| (row[t], c, x.clone())));
    let m = ExactMatrix::from_triplets(Ring::Rationals, tgt.len(), src.len(), trips).ok()?;
    let b: SparseVec = target.iter().map(|(g, x)| (row[g], x.clone())).collect();
    m.solve(&b).map(|y| y.into_iter().map(|(p, x)| (src[p], x)).collect())
}

pub fn hypothesis_check(a: &FiniteDga, ideal: &IdealData) -> Result<HypothesisReport, AinftyError> {
    a.validate()?;
    ideal.validate(a)?;
    let (ci, _) = a.complex_on(&ideal.basis)?;
    let (ca, _) = a.complex_on(&(0..a.dim()).collect::<Vec<_>>())?;
    let hi = cohomology(&ci);
    let mut failures = Vec::new();
    let ideal_free = hi.is_torsion_free();
    if !ideal_free {
        failures.push("H(I) has torsion".to_string());
    }
    let classes = ideal_classes(a, ideal)?;
    let mut induced_map_zero = true;
    for (i, (k, z)) in classes.iter().enumerate() {
        if solve_boundary(a, z, *k).is_none() {
            induced_map_zero = false;
            failures.push(format!("class {i} of H^{k}(I) survives in H(A)"));
        }
    }
    Ok(HypothesisReport {
        ideal_cohomology: hi.rank_map(),
        algebra_cohomology: cohomology(&ca).rank_map(),
        ideal_free,
        induced_map_zero,
        failures,
    })
}

/// f on a basis of H(I) together with g, d∘g = -f.
#[derive(Clone, Debug)]
pub struct AInftyMorphism {
    pub algebra: FiniteDga,
    /// degree of each basis class of H(I)
    pub class_degrees: Vec<i32>,
    pub f: Vec<SparseVec>,
    pub g: Vec<SparseVec>,
}

impl AInftyMorphism {
    /// `f_n(x_{i₁}, …, x_{i_n})` on basis classes.
    pub fn f_n(&self, classes: &[usize]) -> SparseVec {
        let n = classes.len();
        let mut v = self.f[classes[0]].clone();
        for &c in &classes[1..] {
            v = self.algebra.product(&v, &self.g[c]);
        }
        let exponent: i32 = (0..n - 1).map(|l| (n - 1 - l) as i32 * self.class_degrees[classes[l]]).sum();
        if odd(exponent) {
            v.values_mut().for_each(|x| *x = -x.clone());
        }
        v
    }

    /// Replace g by -g: the negative control.
    pub fn with_flipped_g(mut self) -> Self {
        for v in &mut self.g {
            v.values_mut().for_each(|x| *x = -x.clone());
        }
        self
    }
}

pub fn build_morphism(a: &FiniteDga, ideal: &IdealData) -> Result<AInftyMorphism, AinftyError> {
    let report = hypothesis_check(a, ideal)?;
    if !report.passed() {
        return Err(AinftyError::Hypothesis(report.failures.join("; ")));
    }
    let classes = ideal_classes(a, ideal)?;
    let mut g = Vec::with_capacity(classes.len());
    for (i, (k, z)) in classes.iter().enumerate() {
        let minus: SparseVec = z.iter().map(|(p, x)| (*p, -x.clone())).collect();
        g.push(solve_boundary(a, &minus, *k).ok_or(AinftyError::Infeasible(i))?);
    }
    Ok(AInftyMorphism {
        algebra: a.clone(),
        class_degrees: classes.iter().map(|c| c.0).collect(),
        f: classes.into_iter().map(|c| c.1).collect(),
        g,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub max_n: usize,
    pub tuples_checked: usize,
    /// `(n, classes)` of the first violation in (n, lexicographic) order
    pub first_failure: Option<(usize, Vec<usize>)>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.first_failure.is_none()
    }
}

fn tuples(count: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..count).map(move |c| {
                    let mut t2 = t.clone();
                    t2.push(c);
                    t2
                })
            })
            .collect();
    }
    out
}

/// Checks the relation family for every n ≤ max_n on all basis tuples.
pub fn verify(m: &AInftyMorphism, max_n: usize) -> VerifyReport {
    let count = m.f.len();
    let mut checked = 0;
    for n in 1..=max_n {
        let all = tuples(count, n);
        checked += all.len();
        let bad = all.par_iter().find_first(|xs| {
            let lhs = m.algebra.apply_d(&m.f_n(xs));
            let mut rhs = SparseVec::new();
            for i in 1..n {
                let j = n - i;
                let prefix: i32 = xs[..i].iter().map(|&c| m.class_degrees[c]).sum();
                let s = sign(odd(i as i32) ^ odd((1 - j as i32) * prefix));
                let prod = m.algebra.product(&m.f_n(&xs[..i]), &m.f_n(&xs[i..]));
                axpy(&mut rhs, &s, &prod);
            }
            lhs != rhs
        });
        if let Some(xs) = bad {
            return VerifyReport {
                max_n,
                tuples_checked: checked,
                first_failure: Some((n, xs.clone())),
            };
        }
    }
    VerifyReport {
        max_n,
        tuples_checked: checked,
        first_failure: None,
    }
}

/// Random fixture `R ⊗ F` with ideal `R ⊗ J`, after a random unitriangular
/// change of basis that keeps the ideal's span coordinate.
///
/// R: truncated polynomials, an exterior algebra, or upper triangular 2×2
/// matrices, all with zero differential. F: the unital 3- or 4-dimensional
/// fixture, J the ideal away from the unit. H(R⊗J) → H(R⊗F) vanishes by
/// Künneth.
pub fn random_fixture(rng: &mut ChaCha8Rng) -> (FiniteDga, IdealData) {
    let r = match rng.gen_range(0..3) {
        0 => truncated_polynomial(rng.gen_range(1..=3), *[0, 2].choose(rng).expect("nonempty")),
        1 => exterior(*[1, 3].choose(rng).expect("nonempty")),
        _ => upper_triangular(),
    };
    let (f, j): (FiniteDga, Vec<usize>) = if rng.gen_bool(0.5) {
        (FiniteDga::three_dim_example(), vec![2])
    } else {
        (FiniteDga::unital_four_dim_example(), vec![2, 3, 4])
    };
    let a = r.tensor(&f);
    let fd = f.dim();
    let ideal: Vec<usize> = (0..r.dim()).flat_map(|x| j.iter().map(move |y| x * fd + y)).collect();
    change_basis(&a, &ideal, rng)
}

fn truncated_polynomial(k: usize, deg: i32) -> FiniteDga {
    let mut mult = vec![vec![SparseVec::new(); k]; k];
    for (i, row) in mult.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            if i + j < k {
                *v = SparseVec::from([(i + j, Q::one())]);
            }
        }
    }
    FiniteDga {
        ring: Ring::Rationals,
        names: (0..k).map(|i| format!("x^{i}")).collect(),
        degrees: (0..k).map(|i| i as i32 * deg).collect(),
        d: vec![SparseVec::new(); k],
        mult,
    }
}

fn exterior(deg: i32) -> FiniteDga {
    let e = |i: usize| SparseVec::from([(i, Q::one())]);
    FiniteDga {
        ring: Ring::Rationals,
        names: vec!["1".into(), "y".into()],
        degrees: vec![0, deg],
        d: vec![SparseVec::new(); 2],
        mult: vec![vec![e(0), e(1)], vec![e(1), SparseVec::new()]],
    }
}

fn upper_triangular() -> FiniteDga {
    // e11, e12, e22
    let e = |i: usize| SparseVec::from([(i, Q::one())]);
    let z = SparseVec::new;
    FiniteDga {
        ring: Ring::Rationals,
        names: vec!["e11".into(), "e12".into(), "e22".into()],
        degrees: vec![0, 0, 0],
        d: vec![z(), z(), z()],
        mult: vec![vec![e(0), e(1), z()], vec![z(), z(), e(1)], vec![z(), z(), e(2)]],
    }
}

/// Reorder so the ideal comes first, then apply a random unitriangular P
/// (entries only between equal degrees): new basis vector j is P e_j.
fn change_basis(a: &FiniteDga, ideal: &[usize], rng: &mut ChaCha8Rng) -> (FiniteDga, IdealData) {
    let order: Vec<usize> = ideal.iter().copied().chain((0..a.dim()).filter(|i| !ideal.contains(i))).collect();
    let n = a.dim();
    let pos: HashMap<usize, usize> = order.iter().enumerate().map(|(p, &g)| (g, p)).collect();
    let to_new = |v: &SparseVec| -> SparseVec { v.iter().map(|(g, x)| (pos[g], x.clone())).collect() };
    let degrees: Vec<i32> = order.iter().map(|&g| a.degrees[g]).collect();
    let mut p_cols: Vec<SparseVec> = Vec::with_capacity(n);
    for j in 0..n {
        let mut col = SparseVec::from([(j, Q::one())]);
        for i in 0..j {
            if degrees[i] == degrees[j] {
                let x: i64 = rng.gen_range(-2..=2);
                if x != 0 {
                    col.insert(i, Q::from_integer(x.into()));
                }
            }
        }
        p_cols.push(col);
    }
    let p = ExactMatrix::from_columns(Ring::Rationals, n, p_cols.clone()).expect("square");
    let p_inv = |v: &SparseVec| p.solve(v).expect("unitriangular");
    let old_of = |v: &SparseVec| -> SparseVec {
        // new-order coordinates -> original algebra coordinates
        v.iter().map(|(p, x)| (order[*p], x.clone())).collect()
    };
    let names = (0..n).map(|j| format!("u{j}")).collect();
    let d = (0..n).map(|j| p_inv(&to_new(&a.apply_d(&old_of(&p_cols[j]))))).collect();
    let mult = (0..n)
        .map(|i| (0..n).map(|j| p_inv(&to_new(&a.product(&old_of(&p_cols[i]), &old_of(&p_cols[j]))))).collect())
        .collect();
    (
        FiniteDga {
            ring: Ring::Rationals,
            names,
            degrees,
            d,
            mult,
        },
        IdealData {
            basis: (0..ideal.len()).collect(),
        },
    )
}

pub fn random_fixtures(seed: u64, count: usize) -> Vec<(FiniteDga, IdealData)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_fixture(&mut rng)).collect()
}

/// JSON input: a dg algebra (ordered multiplication table) and an ideal.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DgaJson {
    pub ring: Ring,
    pub basis: Vec<BasisJson>,
    #[serde(default)]
    pub d: Vec<(String, String, Coeff)>,
    /// `[a, b, [[c, coeff], ...]]` meaning a·b; each ordered pair separately
    #[serde(default)]
    pub mult: Vec<(String, String, Vec<(String, Coeff)>)>,
    /// basis names spanning the ideal
    #[serde(default)]
    pub ideal: Vec<String>,
}

impl DgaJson {
    pub fn to_parts(&self) -> Result<(FiniteDga, IdealData), AinftyError> {
        let j = self;
        let names: Vec<String> = j.basis.iter().map(|b| b.name.clone()).collect();
        let idx = index_of(&names)?;
        let d = parse_d(j.ring, &names, &j.d)?;
        let mut mult = vec![vec![SparseVec::new(); names.len()]; names.len()];
        for (a, b, terms) in &j.mult {
            let (x, y) = (lookup(&idx, a)?, lookup(&idx, b)?);
            for (c, coeff) in terms {
                check_ring(j.ring, &coeff.0)?;
                add_entry(&mut mult[x][y], lookup(&idx, c)?, coeff.0.clone());
            }
        }
        let ideal = IdealData {
            basis: j.ideal.iter().map(|n| lookup(&idx, n)).collect::<Result<_, _>>()?,
        };
        let a = FiniteDga {
            ring: j.ring,
            degrees: j.basis.iter().map(|b| b.degree).collect(),
            names,
            d,
            mult,
        };
        Ok((a, ideal))
    }

    pub fn from_parts(a: &FiniteDga, ideal: &IdealData) -> Self {
        let mut mult = Vec::new();
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                if !a.mult[i][j].is_empty() {
                    let terms = a.mult[i][j].iter().map(|(k, x)| (a.names[*k].clone(), Coeff(x.clone()))).collect();
                    mult.push((a.names[i].clone(), a.names[j].clone(), terms));
                }
            }
        }
        DgaJson {
            ring: a.ring,
            basis: a
                .names
                .iter()
                .zip(&a.degrees)
                .map(|(n, d)| BasisJson {
                    name: n.clone(),
                    degree: *d,
                })
                .collect(),
            d: d_to_json(&a.names, &a.d),
            mult,
            ideal: ideal.basis.iter().map(|&i| a.names[i].clone()).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(i: usize) -> SparseVec {
        SparseVec::from([(i, Q::one())])
    }

    #[test]
    fn three_dim_fixture() {
        let a = FiniteDga::three_dim_example();
        let ideal = IdealData { basis: vec![2] };
        let rep = hypothesis_check(&a, &ideal).unwrap();
        assert!(rep.passed());
        assert_eq!(rep.ideal_cohomology, [(1, 1)].into());
        let m = build_morphism(&a, &ideal).unwrap();
        assert_eq!(m.f, vec![unit(2)]);
        assert_eq!(m.g, vec![SparseVec::from([(1, -Q::one())])]);
        assert!(m.f_n(&[0, 0]).is_empty());
        assert!(verify(&m, 6).passed());
        // all of A: H(A) = ℚ·1, which survives
        let all = IdealData { basis: vec![0, 1, 2] };
        assert!(!hypothesis_check(&a, &all).unwrap().passed());
    }

    #[test]
    fn hypothesis_failures_and_vacuous_pass() {
        let mut a = FiniteDga::three_dim_example();
        a.d[1] = SparseVec::new();
        let rep = hypothesis_check(&a, &IdealData { basis: vec![2] }).unwrap();
        assert!(!rep.induced_map_zero);
        assert!(matches!(build_morphism(&a, &IdealData { basis: vec![2] }), Err(AinftyError::Hypothesis(_))));
        // I = A with H(A) = 0
        let acyclic = FiniteDga::four_dim_example();
        let rep = hypothesis_check(&acyclic, &IdealData { basis: vec![0, 1, 2, 3] }).unwrap();
        assert!(rep.passed());
        assert!(rep.ideal_cohomology.is_empty());
        assert!(IdealData { basis: vec![0] }.validate(&acyclic).is_err());
    }

    #[test]
    fn negative_fixture_fails_at_two() {
        let a = FiniteDga::four_dim_example();
        let ideal = IdealData { basis: vec![1, 2, 3] };
        let m = build_morphism(&a, &ideal).unwrap();
        assert!(verify(&m, 6).passed());
        let bad = verify(&m.with_flipped_g(), 6);
        assert_eq!(bad.first_failure.map(|f| f.0), Some(2));
    }

    #[test]
    fn random_fixtures_pass() {
        let mut nontrivial = 0;
        for (a, ideal) in random_fixtures(7, 25) {
            a.validate().unwrap();
            let m = build_morphism(&a, &ideal).unwrap();
            assert!(verify(&m, 5).passed());
            if tuples(m.f.len(), 3).iter().any(|xs| !m.f_n(xs).is_empty()) {
                nontrivial += 1;
            }
        }
        assert!(nontrivial >= 5, "only {nontrivial} fixtures have nonzero f_3");
    }

    #[test]
    fn tensor_and_json() {
        let a = FiniteDga::unital_four_dim_example();
        a.validate().unwrap();
        let t = exterior(1).tensor(&a);
        t.validate().unwrap();
        let ideal = IdealData { basis: vec![2, 3] };
        let j = DgaJson::from_parts(&a, &ideal);
        let s = serde_json::to_string(&j).unwrap();
        let back: DgaJson = serde_json::from_str(&s).unwrap();
        let (a2, i2) = back.to_parts().unwrap();
        assert_eq!((a2, i2), (a, ideal));
    }
}
