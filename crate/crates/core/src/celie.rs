//! The Lie operad in small arities, the twisted Lie algebra 𝖲A ⊗_H Lie, its
//! Chevalley–Eilenberg cochains, and the comparison with CF(Πₙ∖{0̂}, A).

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, OnceLock, RwLock};

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::cfcd::{
    cf_complex, characters, invariants_dims, koszul_odd, signed, total_cohomology, CfcdError, CharacterDegreeJson,
    CharacterTableResult,
};
use crate::exactalg::{
    add_entry, cohomology, AlgebraError, ChainMap, CohomologyBasis, ExactMatrix, GradedComplex, Ring, SparseVec, Q,
};
use crate::partitions::{enumerate, PartitionError, SetPartition, UpSet, DEFAULT_MAX_N};
use crate::perm::{factorial, integer_partitions, Perm};
use crate::tcdga::{suspension, FiniteTcdga, Mode, MultKey, TcdgaError};

/// Largest arity for which CE complexes are built unless raised explicitly.
pub const DEFAULT_CE_BOUND: usize = 5;

#[derive(Debug, Error)]
pub enum CeError {
    #[error("label {0} used twice in a Lie word")]
    DuplicateLabel(usize),
    #[error("arity {n} exceeds the algebra's maximum arity {max}")]
    ArityOverflow { n: usize, max: usize },
    #[error("arity {n} exceeds the CE scale bound {bound}")]
    ScaleBound { n: usize, bound: usize },
    #[error("twisted Lie algebra needs a twisted-mode algebra")]
    NeedsTwisted,
    #[error("twisted Lie algebra fails {0}")]
    Invalid(String),
    #[error(transparent)]
    Tcdga(#[from] TcdgaError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Cfcd(#[from] CfcdError),
}

/// Binary bracket tree with labelled leaves.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LieWord {
    Leaf(usize),
    Bracket(Box<LieWord>, Box<LieWord>),
}

impl LieWord {
    pub fn bracket(a: LieWord, b: LieWord) -> Self {
        LieWord::Bracket(Box::new(a), Box::new(b))
    }

    /// `[[…[l₀, l₁], …], l_k]`
    pub fn left_normed(labels: &[usize]) -> Self {
        let mut w = LieWord::Leaf(labels[0]);
        for &l in &labels[1..] {
            w = LieWord::bracket(w, LieWord::Leaf(l));
        }
        w
    }

    pub fn labels(&self) -> Vec<usize> {
        match self {
            LieWord::Leaf(l) => vec![*l],
            LieWord::Bracket(a, b) => {
                let mut v = a.labels();
                v.extend(b.labels());
                v
            }
        }
    }

    fn expand(&self) -> HashMap<Vec<usize>, i64> {
        match self {
            LieWord::Leaf(l) => HashMap::from([(vec![*l], 1)]),
            LieWord::Bracket(a, b) => commutator(&a.expand(), &b.expand()),
        }
    }
}

impl fmt::Display for LieWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LieWord::Leaf(l) => write!(f, "{l}"),
            LieWord::Bracket(a, b) => write!(f, "[{a},{b}]"),
        }
    }
}

/// `uv - vu` in the free associative algebra.
fn commutator<T: Clone + Eq + std::hash::Hash>(u: &HashMap<Vec<T>, i64>, v: &HashMap<Vec<T>, i64>) -> HashMap<Vec<T>, i64> {
    let mut out: HashMap<Vec<T>, i64> = HashMap::new();
    for (a, x) in u {
        for (b, y) in v {
            let mut ab = a.clone();
            ab.extend(b.iter().cloned());
            *out.entry(ab).or_default() += x * y;
            let mut ba = b.clone();
            ba.extend(a.iter().cloned());
            *out.entry(ba).or_default() -= x * y;
        }
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Left-normed basis of Lie(n) on labels 0..n: words `0 σ(1) … σ(n-1)` in
/// lexicographic order. The coordinate of an element on `[[0,w₁],…]` is the
/// coefficient of the associative word `0 w₁ …` in its expansion.
pub struct LieBasis {
    pub n: usize,
    pub words: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    expansions: Vec<HashMap<Vec<usize>, i64>>,
}

impl LieBasis {
    pub fn dim(&self) -> usize {
        self.words.len()
    }

    pub fn index_of(&self, word: &[usize]) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Coordinates of an associative polynomial on labels 0..n that lies in Lie(n).
    fn coordinates(&self, poly: &HashMap<Vec<usize>, i64>) -> SparseVec {
        let mut out = SparseVec::new();
        for (w, c) in poly {
            if w[0] == 0 {
                add_entry(&mut out, self.index[w], Q::from_integer((*c).into()));
            }
        }
        out
    }
}

fn permutations_of(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations_of(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

type Memo<K, V> = OnceLock<RwLock<HashMap<K, Arc<V>>>>;

fn memoized<K: Eq + std::hash::Hash + Clone, V>(memo: &'static Memo<K, V>, key: K, build: impl FnOnce() -> V) -> Arc<V> {
    let lock = memo.get_or_init(|| RwLock::new(HashMap::new()));
    if let Some(v) = lock.read().expect("memo lock").get(&key) {
        return v.clone();
    }
    let v = Arc::new(build());
    lock.write().expect("memo lock").entry(key).or_insert(v).clone()
}

pub fn lie_basis(n: usize) -> Arc<LieBasis> {
    static MEMO: Memo<usize, LieBasis> = OnceLock::new();
    memoized(&MEMO, n, || {
        let tails = permutations_of(&(1..n).collect::<Vec<_>>());
        let words: Vec<Vec<usize>> = tails
            .into_iter()
            .map(|t| std::iter::once(0).chain(t).collect())
            .collect();
        let index = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let expansions = words.iter().map(|w| LieWord::left_normed(w).expand()).collect();
        LieBasis {
            n,
            words,
            index,
            expansions,
        }
    })
}

/// A Lie element on a set of labels, in the left-normed basis anchored at the
/// smallest label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LieElement {
    /// sorted labels
    pub labels: Vec<usize>,
    /// coordinates in `lie_basis(labels.len())`, letters read as ranks
    pub coords: SparseVec,
}

impl LieElement {
    /// `(basis word with actual labels, coefficient)` pairs.
    pub fn terms(&self) -> Vec<(LieWord, Q)> {
        let basis = lie_basis(self.labels.len());
        self.coords
            .iter()
            .map(|(i, c)| {
                let w: Vec<usize> = basis.words[*i].iter().map(|&r| self.labels[r]).collect();
                (LieWord::left_normed(&w), c.clone())
            })
            .collect()
    }
}

/// Unique expansion of a Lie word in the left-normed basis.
pub fn normalize(w: &LieWord) -> Result<LieElement, CeError> {
    let mut labels = w.labels();
    labels.sort_unstable();
    if let Some(d) = labels.windows(2).find(|p| p[0] == p[1]) {
        return Err(CeError::DuplicateLabel(d[0]));
    }
    let rank: HashMap<usize, usize> = labels.iter().enumerate().map(|(i, &l)| (l, i)).collect();
    let ranked: HashMap<Vec<usize>, i64> = w.expand().into_iter().map(|(word, c)| (word.iter().map(|l| rank[l]).collect(), c)).collect();
    let coords = lie_basis(labels.len()).coordinates(&ranked);
    Ok(LieElement { labels, coords })
}

/// Columns of the relabelling `i ↦ g(i)` on Lie(n).
pub fn lie_action(g: &Perm) -> Arc<Vec<SparseVec>> {
    static MEMO: Memo<Vec<usize>, Vec<SparseVec>> = OnceLock::new();
    memoized(&MEMO, g.images().to_vec(), || {
        let basis = lie_basis(g.len());
        basis
            .expansions
            .iter()
            .map(|poly| {
                let moved = poly.iter().map(|(w, c)| (w.iter().map(|&l| g.apply(l)).collect(), *c)).collect();
                basis.coordinates(&moved)
            })
            .collect()
    })
}

/// `table[u][v]`: bracket of Lie(n) ∋ u and Lie(m) ∋ v, with u's labels
/// placed on the set bits of `mask` and v's on the clear bits.
pub fn lie_bracket_table(key: MultKey) -> Arc<Vec<Vec<SparseVec>>> {
    static MEMO: Memo<MultKey, Vec<Vec<SparseVec>>> = OnceLock::new();
    memoized(&MEMO, key, || {
        let (left, right): (Vec<usize>, Vec<usize>) = (0..key.n + key.m).partition(|p| key.mask >> p & 1 == 1);
        let relabel = |poly: &HashMap<Vec<usize>, i64>, to: &[usize]| -> HashMap<Vec<usize>, i64> {
            poly.iter().map(|(w, c)| (w.iter().map(|&l| to[l]).collect(), *c)).collect()
        };
        let (bu, bv, bt) = (lie_basis(key.n), lie_basis(key.m), lie_basis(key.n + key.m));
        bu.expansions
            .iter()
            .map(|u| {
                let u = relabel(u, &left);
                bv.expansions.iter().map(|v| bt.coordinates(&commutator(&u, &relabel(v, &right)))).collect()
            })
            .collect()
    })
}

/// g = 𝖲A ⊗_H Lie: g(n) = 𝖲A(n) ⊗ Lie(n) with diagonal action, bracket from
/// the product of 𝖲A and the Lie operad composition.
pub struct TwistedLie {
    sa: Arc<FiniteTcdga>,
}

impl TwistedLie {
    pub fn max_arity(&self) -> usize {
        self.sa.max_arity
    }

    pub fn suspended_algebra(&self) -> &FiniteTcdga {
        &self.sa
    }

    fn lie_dim(n: usize) -> usize {
        factorial(n.saturating_sub(1)) as usize
    }

    pub fn dim(&self, n: usize) -> usize {
        self.sa.component(n).dim() * Self::lie_dim(n)
    }

    pub fn degree(&self, n: usize, i: usize) -> i32 {
        self.sa.degree(n, i / Self::lie_dim(n))
    }

    pub fn is_abelian(&self) -> bool {
        self.sa.has_zero_products()
    }

    fn tensor(n: usize, a: &SparseVec, l: &SparseVec) -> SparseVec {
        let ld = Self::lie_dim(n);
        let mut out = SparseVec::new();
        for (i, x) in a {
            for (j, y) in l {
                add_entry(&mut out, i * ld + j, x * y);
            }
        }
        out
    }

    fn unit(i: usize) -> SparseVec {
        SparseVec::from([(i, Q::one())])
    }

    pub fn d(&self, n: usize, i: usize) -> SparseVec {
        let ld = Self::lie_dim(n);
        let da = self.sa.component(n).apply_d(&Self::unit(i / ld));
        Self::tensor(n, &da, &Self::unit(i % ld))
    }

    /// Columns of the action of `g` on g(n).
    pub fn action(&self, g: &Perm) -> Result<Vec<SparseVec>, CeError> {
        let n = g.len();
        let a = self.sa.perm_action(g)?;
        let l = lie_action(g);
        let ld = Self::lie_dim(n);
        Ok((0..self.dim(n)).map(|i| Self::tensor(n, &a[i / ld], &l[i % ld])).collect())
    }

    pub fn bracket(&self, key: MultKey, i: usize, j: usize) -> Result<SparseVec, CeError> {
        let (ln, lm) = (Self::lie_dim(key.n), Self::lie_dim(key.m));
        let a = self.sa.product(key, i / ln, j / lm)?;
        if a.is_empty() {
            return Ok(a);
        }
        let table = lie_bracket_table(key);
        Ok(Self::tensor(key.n + key.m, &a, &table[i % ln][j % lm]))
    }

    /// Bracket of x ∈ g(S) and y ∈ g(T) for disjoint label sets, landing in
    /// g(S ∪ T).
    pub fn bracket_labeled(&self, s: &[usize], x: &SparseVec, t: &[usize], y: &SparseVec) -> Result<(Vec<usize>, SparseVec), CeError> {
        let mut union: Vec<usize> = s.iter().chain(t).copied().collect();
        union.sort_unstable();
        let mask = union.iter().enumerate().filter(|(_, l)| s.contains(l)).fold(0u32, |m, (p, _)| m | 1 << p);
        let key = MultKey { n: s.len(), m: t.len(), mask };
        let mut out = SparseVec::new();
        for (i, a) in x {
            for (j, b) in y {
                let z = self.bracket(key, *i, *j)?;
                for (k, c) in z {
                    add_entry(&mut out, k, a * b * c);
                }
            }
        }
        Ok((union, out))
    }

    /// Antisymmetry and the Leibniz rule up to `max_arity`, Jacobi up to
    /// `jacobi_arity`, on basis elements.
    pub fn validate(&self, jacobi_arity: usize) -> Result<(), CeError> {
        let top = self.max_arity();
        let parity = |d: i32| if d.rem_euclid(2) == 0 { Q::one() } else { -Q::one() };
        let neg = |v: &SparseVec| -> SparseVec { v.iter().map(|(k, c)| (*k, -c)).collect() };
        let sum = |a: &SparseVec, b: &SparseVec, s: &Q| -> SparseVec {
            let mut out = a.clone();
            for (k, c) in b {
                add_entry(&mut out, *k, c * s);
            }
            out
        };
        for n in 1..top {
            for m in 1..=top - n {
                for mask in crate::tcdga::patterns(n, m) {
                    let key = MultKey { n, m, mask };
                    let flip = MultKey {
                        n: m,
                        m: n,
                        mask: !mask & ((1u32 << (n + m)) - 1),
                    };
                    for i in 0..self.dim(n) {
                        for j in 0..self.dim(m) {
                            let xy = self.bracket(key, i, j)?;
                            let yx = self.bracket(flip, j, i)?;
                            let s = parity(self.degree(n, i) * self.degree(m, j));
                            if sum(&yx, &xy, &s) != SparseVec::new() {
                                return Err(CeError::Invalid(format!("antisymmetry at {key:?} ({i},{j})")));
                            }
                            // d[x,y] = [dx,y] + (-1)^{|x|}[x,dy]
                            let lhs = crate::tcdga::apply_columns(
                                &(0..self.dim(n + m)).map(|k| self.d(n + m, k)).collect::<Vec<_>>(),
                                &xy,
                            );
                            let dx = self.d(n, i);
                            let dy = self.d(m, j);
                            let mut rhs = SparseVec::new();
                            for (k, c) in &dx {
                                rhs = sum(&rhs, &self.bracket(key, *k, j)?, c);
                            }
                            for (k, c) in &dy {
                                rhs = sum(&rhs, &self.bracket(key, i, *k)?, &(c * parity(self.degree(n, i))));
                            }
                            if sum(&lhs, &neg(&rhs), &Q::one()) != SparseVec::new() {
                                return Err(CeError::Invalid(format!("Leibniz at {key:?} ({i},{j})")));
                            }
                        }
                    }
                }
            }
        }
        // [x,[y,z]] = [[x,y],z] + (-1)^{|x||y|} [y,[x,z]]
        for total in 3..=jacobi_arity.min(top) {
            for assign in 0..3usize.pow(total as u32) {
                let mut parts: [Vec<usize>; 3] = Default::default();
                let mut a = assign;
                for l in 0..total {
                    parts[a % 3].push(l);
                    a /= 3;
                }
                if parts.iter().any(|p| p.is_empty()) {
                    continue;
                }
                let [s, t, r] = &parts;
                for i in 0..self.dim(s.len()) {
                    for j in 0..self.dim(t.len()) {
                        for k in 0..self.dim(r.len()) {
                            let (x, y, z) = (Self::unit(i), Self::unit(j), Self::unit(k));
                            let (yz_l, yz) = self.bracket_labeled(t, &y, r, &z)?;
                            let (_, lhs) = self.bracket_labeled(s, &x, &yz_l, &yz)?;
                            let (xy_l, xy) = self.bracket_labeled(s, &x, t, &y)?;
                            let (_, first) = self.bracket_labeled(&xy_l, &xy, r, &z)?;
                            let (xz_l, xz) = self.bracket_labeled(s, &x, r, &z)?;
                            let (_, second) = self.bracket_labeled(t, &y, &xz_l, &xz)?;
                            let sgn = parity(self.degree(s.len(), i) * self.degree(t.len(), j));
                            let rhs = sum(&first, &second, &sgn);
                            if sum(&lhs, &neg(&rhs), &Q::one()) != SparseVec::new() {
                                return Err(CeError::Invalid(format!("Jacobi at {s:?},{t:?},{r:?} ({i},{j},{k})")));
                            }
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// 𝖲A ⊗_H Lie for a twisted-mode algebra.
pub fn twisted_lie(a: &FiniteTcdga) -> Result<TwistedLie, CeError> {
    if a.mode != Mode::Twisted {
        return Err(CeError::NeedsTwisted);
    }
    Ok(TwistedLie {
        sa: Arc::new(suspension(a)?),
    })
}

/// One basis element of Sym(g[1])(n): a set partition and one basis element
/// of g(B) per block, blocks ordered by minimum.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CeCell {
    pub partition: SetPartition,
    pub factors: Vec<usize>,
}

/// Cohomologically graded CE cochains: s x has degree |x| - 1, and the
/// differential is the coderivation of δ(sx) = -s dx and
/// b(sx, sy) = (-1)^{|x|} s[x, y].
pub struct CeComplex {
    pub n: usize,
    pub complex: GradedComplex,
    /// cells[t - min_degree] = basis of degree t
    pub cells: Vec<Vec<CeCell>>,
    positions: HashMap<CeCell, usize>,
}

fn shifted_degrees(gl: &TwistedLie, blocks: &[Vec<usize>], factors: &[usize]) -> Vec<i32> {
    blocks.iter().zip(factors).map(|(b, &x)| gl.degree(b.len(), x) - 1).collect()
}

fn odd(d: i32) -> bool {
    d.rem_euclid(2) == 1
}

pub fn ce_complex(gl: &TwistedLie, n: usize) -> Result<CeComplex, CeError> {
    ce_complex_bounded(gl, n, DEFAULT_CE_BOUND)
}

pub fn ce_complex_bounded(gl: &TwistedLie, n: usize, bound: usize) -> Result<CeComplex, CeError> {
    if n > bound {
        return Err(CeError::ScaleBound { n, bound });
    }
    if n == 0 || n > gl.max_arity() {
        return Err(CeError::ArityOverflow { n, max: gl.max_arity() });
    }
    let mut flat: Vec<(i32, CeCell)> = Vec::new();
    for t in enumerate(n, DEFAULT_MAX_N)? {
        let blocks = t.blocks0();
        let dims: Vec<usize> = blocks.iter().map(|b| gl.dim(b.len())).collect();
        let total: usize = dims.iter().product();
        for mut idx in 0..total {
            let mut factors = vec![0; dims.len()];
            for (f, d) in factors.iter_mut().zip(&dims).rev() {
                *f = idx % d;
                idx /= d;
            }
            let deg = shifted_degrees(gl, &blocks, &factors).iter().sum();
            flat.push((
                deg,
                CeCell {
                    partition: t.clone(),
                    factors,
                },
            ));
        }
    }
    if flat.is_empty() {
        return Ok(CeComplex {
            n,
            complex: GradedComplex::empty(Ring::Rationals),
            cells: Vec::new(),
            positions: HashMap::new(),
        });
    }
    let lo = flat.iter().map(|c| c.0).min().expect("nonempty");
    let hi = flat.iter().map(|c| c.0).max().expect("nonempty");
    let mut cells: Vec<Vec<CeCell>> = vec![Vec::new(); (hi - lo + 1) as usize];
    let mut positions = HashMap::new();
    for (d, c) in flat {
        let level = &mut cells[(d - lo) as usize];
        positions.insert(c.clone(), level.len());
        level.push(c);
    }
    let diffs = (0..cells.len().saturating_sub(1))
        .into_par_iter()
        .map(|k| -> Result<ExactMatrix, CeError> {
            let mut trips = Vec::new();
            for (col, cell) in cells[k].iter().enumerate() {
                for (target, c) in ce_differential(gl, cell)? {
                    trips.push((positions[&target], col, c));
                }
            }
            Ok(ExactMatrix::from_triplets(Ring::Rationals, cells[k + 1].len(), cells[k].len(), trips)?)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let labels = cells
        .iter()
        .map(|level| level.iter().map(|c| format!("{}:{:?}", c.partition, c.factors)).collect())
        .collect();
    let complex = GradedComplex::new(Ring::Rationals, lo, cells.iter().map(Vec::len).collect(), diffs, labels)?;
    Ok(CeComplex {
        n,
        complex,
        cells,
        positions,
    })
}

fn ce_differential(gl: &TwistedLie, cell: &CeCell) -> Result<Vec<(CeCell, Q)>, CeError> {
    let blocks = cell.partition.blocks0();
    let v = shifted_degrees(gl, &blocks, &cell.factors);
    let k = blocks.len();
    let mut out: HashMap<CeCell, Q> = HashMap::new();
    let mut push = |c: CeCell, x: Q| {
        let e = out.entry(c).or_insert_with(Q::zero);
        *e += x;
    };
    let before = |i: usize| -> i32 { v[..i].iter().sum() };
    for i in 0..k {
        let d = gl.d(blocks[i].len(), cell.factors[i]);
        let s = -signed(odd(before(i)));
        for (y, c) in d {
            let mut factors = cell.factors.clone();
            factors[i] = y;
            push(
                CeCell {
                    partition: cell.partition.clone(),
                    factors,
                },
                &s * c,
            );
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            let x_deg = v[i] + 1;
            let front = v[i] * before(i) + v[j] * (before(j) - v[i]);
            let w_deg = v[i] + v[j] + 1;
            let s = signed(odd(front) ^ odd(x_deg) ^ odd(w_deg * before(i)));
            let (_, z) = gl.bracket_labeled(&blocks[i], &SparseVec::from([(cell.factors[i], Q::one())]), &blocks[j], &SparseVec::from([(cell.factors[j], Q::one())]))?;
            if z.is_empty() {
                continue;
            }
            let mut merged = blocks.clone();
            let bj = merged.remove(j);
            merged[i].extend(bj);
            merged[i].sort_unstable();
            let one_indexed: Vec<Vec<usize>> = merged.iter().map(|b| b.iter().map(|x| x + 1).collect()).collect();
            let partition = SetPartition::from_blocks(cell.partition.n(), &one_indexed)?;
            for (y, c) in z {
                let mut factors = cell.factors.clone();
                factors.remove(j);
                factors[i] = y;
                push(
                    CeCell {
                        partition: partition.clone(),
                        factors,
                    },
                    &s * c,
                );
            }
        }
    }
    Ok(out.into_iter().filter(|(_, c)| !c.is_zero()).collect())
}

impl CeComplex {
    /// Chain map of `g` (cells move blocks and reorder with Koszul signs on
    /// shifted degrees).
    pub fn action(&self, gl: &TwistedLie, g: &Perm) -> Result<ChainMap, CeError> {
        let mut cache: HashMap<Vec<usize>, Vec<SparseVec>> = HashMap::new();
        let mut maps = Vec::with_capacity(self.cells.len());
        for level in &self.cells {
            let mut trips = Vec::new();
            for (col, cell) in level.iter().enumerate() {
                let blocks = cell.partition.blocks0();
                let gt = cell.partition.act(g)?;
                let target_blocks = gt.blocks0();
                let k = blocks.len();
                let mut order = vec![0usize; k];
                let mut images: Vec<SparseVec> = vec![SparseVec::new(); k];
                for (j, b) in blocks.iter().enumerate() {
                    let img: Vec<usize> = b.iter().map(|&p| g.apply(p)).collect();
                    let mut sorted = img.clone();
                    sorted.sort_unstable();
                    let pos = target_blocks.iter().position(|tb| *tb == sorted).expect("g maps blocks to blocks");
                    order[pos] = j;
                    let sigma: Vec<usize> = img.iter().map(|x| sorted.binary_search(x).expect("member")).collect();
                    if !cache.contains_key(&sigma) {
                        let cols = gl.action(&Perm::from_images(sigma.clone()).expect("bijection"))?;
                        cache.insert(sigma.clone(), cols);
                    }
                    images[j] = cache[&sigma][cell.factors[j]].clone();
                }
                let v = shifted_degrees(gl, &blocks, &cell.factors);
                let mut acc: Vec<(Vec<usize>, Q)> = vec![(Vec::with_capacity(k), signed(koszul_odd(&v, &order)))];
                for &j in &order {
                    let mut next = Vec::new();
                    for (t, c) in &acc {
                        for (b, y) in &images[j] {
                            let mut t2 = t.clone();
                            t2.push(*b);
                            next.push((t2, c * y));
                        }
                    }
                    acc = next;
                }
                for (factors, c) in acc {
                    let target = CeCell {
                        partition: gt.clone(),
                        factors,
                    };
                    trips.push((self.positions[&target], col, c));
                }
            }
            maps.push(ExactMatrix::from_triplets(Ring::Rationals, level.len(), level.len(), trips)?);
        }
        Ok(ChainMap {
            min_degree: self.complex.min_degree(),
            maps,
        })
    }

    pub fn characters(&self, gl: &TwistedLie) -> Result<CharacterTableResult, CeError> {
        let basis = CohomologyBasis::new(&self.complex);
        let lambdas = integer_partitions(self.n);
        let traces = lambdas
            .par_iter()
            .map(|l| -> Result<Vec<(i32, Q)>, CeError> {
                if self.complex.is_empty() {
                    return Ok(Vec::new());
                }
                let f = self.action(gl, &Perm::class_representative(l))?;
                self.complex.degrees().map(|k| Ok((k, basis.trace(&f, k)?))).collect()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let mut out = CharacterTableResult {
            n: self.n,
            ..Default::default()
        };
        for (l, tr) in lambdas.iter().zip(traces) {
            for (k, x) in tr {
                out.insert(k, l, x);
            }
        }
        Ok(out.prune())
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DegreeComparison {
    pub degree: i32,
    pub cf: usize,
    pub ce: usize,
    pub matches: bool,
}

#[derive(Serialize)]
pub struct CompareReport {
    pub n: usize,
    pub degrees: Vec<DegreeComparison>,
    pub dims_match: bool,
    pub characters_match: bool,
    pub invariants_match: bool,
    pub cf_characters: Vec<CharacterDegreeJson>,
    pub ce_characters: Vec<CharacterDegreeJson>,
}

impl CompareReport {
    pub fn passed(&self) -> bool {
        self.dims_match && self.characters_match && self.invariants_match
    }
}

/// H(CF(Πₙ∖{0̂}, A)) against H(C^CE(𝖲A ⊗_H Lie)(n)) over ℚ.
pub fn compare_cf_ce(a: Arc<FiniteTcdga>, n: usize) -> Result<CompareReport, CeError> {
    compare_cf_ce_bounded(a, n, DEFAULT_CE_BOUND)
}

pub fn compare_cf_ce_bounded(a: Arc<FiniteTcdga>, n: usize, bound: usize) -> Result<CompareReport, CeError> {
    let gl = twisted_lie(&a)?;
    let ce = ce_complex_bounded(&gl, n, bound)?;
    let ce_dims = cohomology(&ce.complex).rank_map();
    let ce_chars = ce.characters(&gl)?;
    let cx = cf_complex(&UpSet::full(n)?, a, Ring::Rationals)?;
    let cf_dims = total_cohomology(&cx).rank_map();
    let cf_chars = characters(&cx)?;
    let mut all: Vec<i32> = cf_dims.keys().chain(ce_dims.keys()).copied().collect();
    all.sort_unstable();
    all.dedup();
    let degrees: Vec<DegreeComparison> = all
        .into_iter()
        .map(|d| {
            let (x, y) = (cf_dims.get(&d).copied().unwrap_or(0), ce_dims.get(&d).copied().unwrap_or(0));
            DegreeComparison {
                degree: d,
                cf: x,
                ce: y,
                matches: x == y,
            }
        })
        .collect();
    let inv = |c: &CharacterTableResult| invariants_dims(c).ok().map(|m| m.into_iter().filter(|(_, v)| *v > 0).collect::<BTreeMap<_, _>>());
    Ok(CompareReport {
        n,
        dims_match: degrees.iter().all(|d| d.matches),
        characters_match: cf_chars == ce_chars,
        invariants_match: inv(&cf_chars) == inv(&ce_chars),
        cf_characters: cf_chars.to_json(),
        ce_characters: ce_chars.to_json(),
        degrees,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::q;
    use crate::tcdga::{constant_tcdga, formal_tcdga, FiniteCdga, GradedModuleInput};

    fn leaf(l: usize) -> LieWord {
        LieWord::Leaf(l)
    }

    fn lw(labels: &[usize]) -> LieWord {
        LieWord::left_normed(labels)
    }

    fn as_terms(e: &LieElement) -> Vec<(String, Q)> {
        let mut v: Vec<(String, Q)> = e.terms().into_iter().map(|(w, c)| (w.to_string(), c)).collect();
        v.sort();
        v
    }

    #[test]
    fn normalize_examples() {
        let e = normalize(&LieWord::bracket(leaf(2), leaf(1))).unwrap();
        assert_eq!(as_terms(&e), vec![("[1,2]".to_string(), q(-1))]);
        let e = normalize(&LieWord::bracket(leaf(1), LieWord::bracket(leaf(2), leaf(3)))).unwrap();
        assert_eq!(as_terms(&e), vec![("[[1,2],3]".to_string(), q(1)), ("[[1,3],2]".to_string(), q(-1))]);
        assert!(matches!(normalize(&LieWord::bracket(leaf(1), leaf(1))), Err(CeError::DuplicateLabel(1))));
        for n in 1..=6 {
            assert_eq!(lie_basis(n).dim(), factorial(n - 1) as usize);
        }
    }

    #[test]
    fn lie_characters() {
        let tr = |g: &Perm| -> Q { lie_action(g).iter().enumerate().map(|(i, c)| c.get(&i).cloned().unwrap_or_else(Q::zero)).sum() };
        assert_eq!(tr(&Perm::transposition(2, 0, 1)), q(-1));
        assert_eq!(tr(&Perm::identity(3)), q(2));
        assert_eq!(tr(&Perm::class_representative(&[2, 1])), q(0));
        assert_eq!(tr(&Perm::class_representative(&[3])), q(-1));
    }

    #[test]
    fn bracket_table_matches_normalize() {
        // [[0,2],[1,3]] in Lie(4) via the table and via normalize
        let key = MultKey { n: 2, m: 2, mask: 0b0101 };
        let t = lie_bracket_table(key);
        let direct = normalize(&LieWord::bracket(lw(&[0, 2]), lw(&[1, 3]))).unwrap();
        assert_eq!(t[0][0], direct.coords);
    }

    #[test]
    fn twisted_lie_validates() {
        let three = constant_tcdga(&FiniteCdga::three_dim_example(), 4).unwrap();
        let gl = twisted_lie(&three).unwrap();
        gl.validate(4).unwrap();
        let h = GradedModuleInput::new(Ring::Rationals, [(1, 1), (2, 1)]);
        let gl = twisted_lie(&formal_tcdga(&h, 3).unwrap()).unwrap();
        assert!(gl.is_abelian());
        gl.validate(3).unwrap();
    }

    #[test]
    fn abelian_homology_is_chains() {
        let h = GradedModuleInput::new(Ring::Rationals, [(2, 1)]);
        let gl = twisted_lie(&formal_tcdga(&h, 4).unwrap()).unwrap();
        for n in 1..=4 {
            let ce = ce_complex(&gl, n).unwrap();
            let chains: BTreeMap<i32, usize> = ce.complex.degrees().map(|k| (k, ce.complex.rank(k))).filter(|x| x.1 > 0).collect();
            assert_eq!(cohomology(&ce.complex).rank_map(), chains);
        }
        let ce = ce_complex(&gl, 1).unwrap();
        assert_eq!(cohomology(&ce.complex).rank_map(), [(2, 1)].into());
        assert!(matches!(ce_complex_bounded(&gl, 4, 3), Err(CeError::ScaleBound { .. })));
    }

    #[test]
    fn compare_small_cases() {
        let h = GradedModuleInput::new(Ring::Rationals, [(2, 1)]);
        let a = Arc::new(formal_tcdga(&h, 3).unwrap());
        for n in 2..=3 {
            let r = compare_cf_ce(a.clone(), n).unwrap();
            assert!(r.passed(), "formal n={n}: {:?}", r.degrees);
        }
        let three = Arc::new(constant_tcdga(&FiniteCdga::three_dim_example(), 3).unwrap());
        let r = compare_cf_ce(three, 3).unwrap();
        assert!(r.passed(), "{:?}", r.degrees);
        let pt = Arc::new(constant_tcdga(&FiniteCdga::point(), 2).unwrap());
        let r = compare_cf_ce(pt, 2).unwrap();
        assert!(r.passed());
        assert!(r.degrees.is_empty());
    }
}
