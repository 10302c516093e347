//! Order complexes of finite posets (with the quotient variants collapsing
//! chains that miss the top and/or bottom) and bar complexes of functors on
//! posets.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::One;
use serde::Serialize;
use thiserror::Error;

use crate::exactalg::{add_entry, cohomology, AlgebraError, ChainMap, ExactMatrix, GradedComplex, Ring, SparseVec, Q};
use crate::partitions::SetPartition;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PosetError {
    #[error("poset has no top element")]
    NoTop,
    #[error("poset has no bottom element")]
    NoBottom,
    #[error("subset is not upward closed: {0} lies below a member")]
    NotUpwardClosed(String),
    #[error("functoriality fails for {0} <= {1} <= {2}")]
    NotFunctorial(String, String, String),
    #[error("coefficient map for {0} <= {1} is not a chain map")]
    MapNotChain(String, String),
    #[error("coefficients carry no group action")]
    NoAction,
    #[error("group element does not preserve the chosen subset")]
    NotPreserved,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Finite poset on indices `0..len`, listed in a fixed reference order
/// (chains are compared lexicographically by these indices).
#[derive(Clone, Debug)]
pub struct Poset {
    labels: Vec<String>,
    above: Vec<Vec<usize>>, // strictly greater elements, increasing index
    less: Vec<Vec<bool>>,
}

impl Poset {
    /// `leq(i, j)` must be a partial order.
    pub fn new(labels: Vec<String>, leq: impl Fn(usize, usize) -> bool) -> Self {
        let n = labels.len();
        let less: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| i != j && leq(i, j)).collect()).collect();
        let above = less
            .iter()
            .map(|row| row.iter().enumerate().filter(|(_, &b)| b).map(|(j, _)| j).collect())
            .collect();
        Poset { labels, above, less }
    }

    pub fn from_partitions(elements: &[SetPartition]) -> Self {
        Poset::new(elements.iter().map(|x| x.to_string()).collect(), |i, j| elements[i].refines(&elements[j]))
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
    pub fn label(&self, i: usize) -> &str {
        &self.labels[i]
    }
    pub fn less(&self, i: usize, j: usize) -> bool {
        self.less[i][j]
    }
    pub fn leq(&self, i: usize, j: usize) -> bool {
        i == j || self.less[i][j]
    }
    pub fn above(&self, i: usize) -> &[usize] {
        &self.above[i]
    }

    pub fn top(&self) -> Option<usize> {
        (0..self.len()).find(|&t| (0..self.len()).all(|x| self.leq(x, t)))
    }

    pub fn bottom(&self) -> Option<usize> {
        (0..self.len()).find(|&b| (0..self.len()).all(|x| self.leq(b, x)))
    }

    /// Induced subposet on `keep` (in the given order).
    pub fn subposet(&self, keep: &[usize]) -> Poset {
        Poset::new(keep.iter().map(|&i| self.labels[i].clone()).collect(), |a, b| self.leq(keep[a], keep[b]))
    }

    /// Cartesian product, pairs listed lexicographically.
    pub fn product(&self, other: &Poset) -> Poset {
        let m = other.len();
        let labels = (0..self.len() * m)
            .map(|k| format!("({},{})", self.labels[k / m], other.labels[k % m]))
            .collect();
        Poset::new(labels, |a, b| self.leq(a / m, b / m) && other.leq(a % m, b % m))
    }

    /// All chains (strictly increasing sequences) with elements from `allowed`,
    /// sorted by length then lexicographically; the empty chain is omitted.
    pub fn chains(&self, allowed: &[bool]) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut cur = Vec::new();
        fn rec(p: &Poset, allowed: &[bool], cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
            let last = *cur.last().expect("nonempty") as usize;
            for &y in &p.above[last] {
                if allowed[y] {
                    cur.push(y as u32);
                    out.push(cur.clone());
                    rec(p, allowed, cur, out);
                    cur.pop();
                }
            }
        }
        for x in 0..self.len() {
            if allowed[x] {
                cur.push(x as u32);
                out.push(cur.clone());
                rec(self, allowed, &mut cur, &mut out);
                cur.pop();
            }
        }
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Variant {
    /// all chains, plus the empty chain in degree -1
    Plain,
    /// chains containing the top
    Hat,
    /// chains containing the bottom
    Check,
    /// chains containing both
    HatCheck,
}

/// Reduced cochains of an order complex variant with its chain basis.
pub struct OrderComplex {
    pub variant: Variant,
    pub complex: GradedComplex,
    /// chains[p - min_degree] lists the basis of degree p.
    pub chains: Vec<Vec<Vec<u32>>>,
    index: HashMap<Vec<u32>, usize>,
}

pub fn order_complex(p: &Poset, variant: Variant, ring: Ring) -> Result<OrderComplex, PosetError> {
    let required: Vec<usize> = match variant {
        Variant::Plain => vec![],
        Variant::Hat => vec![p.top().ok_or(PosetError::NoTop)?],
        Variant::Check => vec![p.bottom().ok_or(PosetError::NoBottom)?],
        Variant::HatCheck => {
            let t = p.top().ok_or(PosetError::NoTop)?;
            let b = p.bottom().ok_or(PosetError::NoBottom)?;
            if t == b {
                vec![t]
            } else {
                vec![b, t]
            }
        }
    };
    let all = p.chains(&vec![true; p.len()]);
    let mut chains: Vec<Vec<u32>> = all
        .into_iter()
        .filter(|c| required.iter().all(|r| c.contains(&(*r as u32))))
        .collect();
    let min_degree = if variant == Variant::Plain {
        chains.insert(0, Vec::new());
        -1
    } else {
        required.len() as i32 - 1
    };
    let max_len = chains.iter().map(Vec::len).max().unwrap_or(0) as i32;
    let ndeg = if chains.is_empty() { 0 } else { (max_len - 1 - min_degree + 1) as usize };
    let mut by_degree: Vec<Vec<Vec<u32>>> = vec![Vec::new(); ndeg];
    for c in chains {
        by_degree[(c.len() as i32 - 1 - min_degree) as usize].push(c);
    }
    let mut index = HashMap::new();
    for level in &by_degree {
        for (i, c) in level.iter().enumerate() {
            index.insert(c.clone(), i);
        }
    }
    let mut diffs = Vec::new();
    for k in 0..ndeg.saturating_sub(1) {
        let mut trip = Vec::new();
        for (row, c) in by_degree[k + 1].iter().enumerate() {
            for pos in 0..c.len() {
                let mut face = c.clone();
                face.remove(pos);
                if let Some(&col) = index.get(&face) {
                    if by_degree[k].get(col) == Some(&face) {
                        let s = if pos % 2 == 0 { Q::one() } else { -Q::one() };
                        trip.push((row, col, s));
                    }
                }
            }
        }
        diffs.push(ExactMatrix::from_triplets(ring, by_degree[k + 1].len(), by_degree[k].len(), trip)?);
    }
    let labels = by_degree
        .iter()
        .map(|level| level.iter().map(|c| chain_label(p, c)).collect())
        .collect();
    let ranks = by_degree.iter().map(Vec::len).collect();
    let complex = GradedComplex::new(ring, min_degree, ranks, diffs, labels)?;
    Ok(OrderComplex {
        variant,
        complex,
        chains: by_degree,
        index,
    })
}

fn chain_label(p: &Poset, c: &[u32]) -> String {
    if c.is_empty() {
        return "∅".into();
    }
    c.iter().map(|&x| p.label(x as usize)).collect::<Vec<_>>().join("<")
}

impl OrderComplex {
    /// Chain map induced by an order automorphism `sigma` (element i -> sigma[i]).
    pub fn automorphism(&self, sigma: &[usize]) -> Result<ChainMap, PosetError> {
        let c = &self.complex;
        let mut maps = Vec::new();
        for level in &self.chains {
            let mut trip = Vec::with_capacity(level.len());
            for (col, ch) in level.iter().enumerate() {
                let img: Vec<u32> = ch.iter().map(|&x| sigma[x as usize] as u32).collect();
                let row = *self.index.get(&img).ok_or(PosetError::NotPreserved)?;
                trip.push((row, col, Q::one()));
            }
            maps.push(ExactMatrix::from_triplets(c.ring(), level.len(), level.len(), trip)?);
        }
        Ok(ChainMap {
            min_degree: c.min_degree(),
            maps,
        })
    }
}

/// Restrict a degree-preserving map to the cells kept by `positions` (as
/// returned by `BarComplex::graded_piece_with_positions`); entries leaving
/// the kept set are dropped.
pub fn restrict_chain_map(f: &ChainMap, positions: &[Vec<Option<usize>>], ring: Ring) -> Result<ChainMap, AlgebraError> {
    let mut maps = Vec::with_capacity(positions.len());
    for (t, pos) in positions.iter().enumerate() {
        let size = pos.iter().flatten().count();
        let m = f.maps.get(t);
        let mut trip = Vec::new();
        if let Some(m) = m {
            for (r, c, x) in m.entries() {
                if let (Some(nr), Some(nc)) = (pos[r], pos[c]) {
                    trip.push((nr, nc, x.clone()));
                }
            }
        }
        maps.push(ExactMatrix::from_triplets(ring, size, size, trip)?);
    }
    Ok(ChainMap {
        min_degree: f.min_degree,
        maps,
    })
}

/// Cohomology ranks of ∇̂∇̌(P×Q) and of the tensor product of the factors'
/// reduced complexes (Künneth over ℚ) agree.
pub fn smash_check(p: &Poset, q: &Poset) -> Result<bool, PosetError> {
    let left = cohomology(&order_complex(&p.product(q), Variant::HatCheck, Ring::Rationals)?.complex);
    let hp = cohomology(&order_complex(p, Variant::HatCheck, Ring::Rationals)?.complex);
    let hq = cohomology(&order_complex(q, Variant::HatCheck, Ring::Rationals)?.complex);
    let mut right: std::collections::BTreeMap<i32, usize> = Default::default();
    for (a, ra) in hp.rank_map() {
        for (b, rb) in hq.rank_map() {
            *right.entry(a + b).or_default() += ra * rb;
        }
    }
    Ok(left.rank_map() == right)
}

/// Graded free module with a differential, used as coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffModule {
    pub degrees: Vec<i32>,
    pub labels: Vec<String>,
    /// `d[i]` is the image of basis vector `i` (degree one higher).
    pub d: Vec<SparseVec>,
}

impl CoeffModule {
    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    /// One basis vector in degree 0, zero differential.
    pub fn unit() -> Self {
        CoeffModule {
            degrees: vec![0],
            labels: vec!["1".into()],
            d: vec![SparseVec::new()],
        }
    }

    /// The module as a cochain complex on its own.
    pub fn to_complex(&self, ring: Ring) -> Result<GradedComplex, AlgebraError> {
        if self.degrees.is_empty() {
            return Ok(GradedComplex::empty(ring));
        }
        let lo = *self.degrees.iter().min().expect("nonempty");
        let hi = *self.degrees.iter().max().expect("nonempty");
        let mut pos = vec![0usize; self.dim()];
        let mut levels: Vec<Vec<usize>> = vec![Vec::new(); (hi - lo + 1) as usize];
        for (i, &d) in self.degrees.iter().enumerate() {
            let l = &mut levels[(d - lo) as usize];
            pos[i] = l.len();
            l.push(i);
        }
        let mut diffs = Vec::new();
        for k in 0..levels.len().saturating_sub(1) {
            let mut trip = Vec::new();
            for &i in &levels[k] {
                for (j, x) in &self.d[i] {
                    trip.push((pos[*j], pos[i], x.clone()));
                }
            }
            diffs.push(ExactMatrix::from_triplets(ring, levels[k + 1].len(), levels[k].len(), trip)?);
        }
        let labels = levels.iter().map(|l| l.iter().map(|&i| self.labels[i].clone()).collect()).collect();
        GradedComplex::new(ring, lo, levels.iter().map(Vec::len).collect(), diffs, labels)
    }
}

/// Columns of a linear map between coefficient modules.
pub type MapColumns = Vec<SparseVec>;

/// A functor from a poset to cochain complexes, optionally with a compatible
/// group action on the poset and on the values.
pub trait PosetFunctor: Sync {
    fn carrier(&self) -> &Poset;
    fn at(&self, x: usize) -> &CoeffModule;
    /// The map for `x ⪯ y`; column `i` is the image of basis vector `i`.
    fn map(&self, x: usize, y: usize) -> MapColumns;
    /// Element permutation induced by a group element, with the value maps
    /// `at(x) -> at(sigma[x])`.
    fn action(&self, _g: &crate::perm::Perm) -> Option<(Vec<usize>, Vec<MapColumns>)> {
        None
    }
}

fn compose(second: &MapColumns, first: &MapColumns) -> MapColumns {
    first
        .iter()
        .map(|col| {
            let mut out = SparseVec::new();
            for (j, x) in col {
                for (k, y) in &second[*j] {
                    add_entry(&mut out, *k, x * y);
                }
            }
            out
        })
        .collect()
}

fn apply_d(m: &CoeffModule, v: &SparseVec) -> SparseVec {
    let mut out = SparseVec::new();
    for (i, x) in v {
        for (j, y) in &m.d[*i] {
            add_entry(&mut out, *j, x * y);
        }
    }
    out
}

/// Each cover map is a chain map and `map(y,z)∘map(x,y) = map(x,z)` whenever
/// `y` covers `x`; together these give functoriality on all composable pairs.
pub fn validate_functor<F: PosetFunctor + ?Sized>(f: &F, within: &[usize]) -> Result<(), PosetError> {
    let p = f.carrier();
    let inside: Vec<bool> = {
        let mut v = vec![false; p.len()];
        for &x in within {
            v[x] = true;
        }
        v
    };
    for &x in within {
        for &y in p.above(x) {
            if !inside[y] {
                continue;
            }
            let mxy = f.map(x, y);
            let (ax, ay) = (f.at(x), f.at(y));
            for i in 0..ax.dim() {
                let lhs = apply_cols(&mxy, &apply_d(ax, &single(i)));
                let rhs = apply_d(ay, &mxy[i]);
                if lhs != rhs {
                    return Err(PosetError::MapNotChain(p.label(x).into(), p.label(y).into()));
                }
            }
            let covers = !p.above(x).iter().any(|&m| p.less(m, y));
            if !covers {
                continue;
            }
            for &z in p.above(y) {
                if !inside[z] {
                    continue;
                }
                if compose(&f.map(y, z), &mxy) != f.map(x, z) {
                    return Err(PosetError::NotFunctorial(
                        p.label(x).into(),
                        p.label(y).into(),
                        p.label(z).into(),
                    ));
                }
            }
        }
    }
    Ok(())
}

fn single(i: usize) -> SparseVec {
    let mut v = SparseVec::new();
    v.insert(i, Q::one());
    v
}

fn apply_cols(m: &MapColumns, v: &SparseVec) -> SparseVec {
    let mut out = SparseVec::new();
    for (i, x) in v {
        for (j, y) in &m[*i] {
            add_entry(&mut out, *j, x * y);
        }
    }
    out
}

/// Constant functor with identity maps; an element permutation may be
/// supplied to act by identity on values.
pub struct ConstantFunctor {
    pub poset: Poset,
    pub module: CoeffModule,
}

impl PosetFunctor for ConstantFunctor {
    fn carrier(&self) -> &Poset {
        &self.poset
    }
    fn at(&self, _x: usize) -> &CoeffModule {
        &self.module
    }
    fn map(&self, _x: usize, _y: usize) -> MapColumns {
        (0..self.module.dim()).map(single).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Flavor {
    /// nonempty chains, horizontal degree |C| - 1
    B,
    /// also the empty chain (coefficients at the bottom), horizontal degree |C|
    Btilde,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BarCell {
    pub chain: Vec<u32>,
    /// carrier index of the chain's maximum (the bottom for the empty chain)
    pub max: usize,
    pub coeff: usize,
    pub horizontal: i32,
    pub vertical: i32,
}

/// Total complex of the bar double complex, with its cell basis.
pub struct BarComplex {
    pub flavor: Flavor,
    pub complex: GradedComplex,
    /// cells[t - min_degree] = basis of total degree t, in basis order.
    pub cells: Vec<Vec<BarCell>>,
    positions: HashMap<(Vec<u32>, usize), usize>,
}

/// Build 𝔅(U,Φ) or 𝔅̃(U,Φ). `upset` lists carrier indices of U.
pub fn bar_complex<F: PosetFunctor + ?Sized>(
    upset: &[usize],
    phi: &F,
    flavor: Flavor,
    ring: Ring,
) -> Result<BarComplex, PosetError> {
    let p = phi.carrier();
    let mut inside = vec![false; p.len()];
    for &x in upset {
        inside[x] = true;
    }
    for &x in upset {
        if let Some(&y) = p.above(x).iter().find(|&&y| !inside[y]) {
            return Err(PosetError::NotUpwardClosed(p.label(y).into()));
        }
    }
    let bottom = match flavor {
        Flavor::Btilde => Some(p.bottom().ok_or(PosetError::NoBottom)?),
        Flavor::B => None,
    };
    let mut support: Vec<usize> = upset.to_vec();
    if let Some(b) = bottom {
        if !inside[b] {
            support.push(b);
        }
    }
    validate_functor(phi, &support)?;

    let mut chains = p.chains(&inside);
    if flavor == Flavor::Btilde {
        chains.insert(0, Vec::new());
    }
    let max_of = |c: &[u32]| -> usize { c.last().map_or_else(|| bottom.expect("Btilde"), |&m| m as usize) };
    let hshift = if flavor == Flavor::B { -1 } else { 0 };

    let mut cells_flat: Vec<BarCell> = Vec::new();
    for c in &chains {
        let m = max_of(c);
        for (i, &q) in phi.at(m).degrees.iter().enumerate() {
            cells_flat.push(BarCell {
                chain: c.clone(),
                max: m,
                coeff: i,
                horizontal: c.len() as i32 + hshift,
                vertical: q,
            });
        }
    }
    if cells_flat.is_empty() {
        return Ok(BarComplex {
            flavor,
            complex: GradedComplex::empty(ring),
            cells: Vec::new(),
            positions: HashMap::new(),
        });
    }
    let lo = cells_flat.iter().map(|c| c.horizontal + c.vertical).min().expect("nonempty");
    let hi = cells_flat.iter().map(|c| c.horizontal + c.vertical).max().expect("nonempty");
    let mut cells: Vec<Vec<BarCell>> = vec![Vec::new(); (hi - lo + 1) as usize];
    let mut positions = HashMap::new();
    for cell in cells_flat {
        let level = &mut cells[(cell.horizontal + cell.vertical - lo) as usize];
        positions.insert((cell.chain.clone(), cell.coeff), level.len());
        level.push(cell);
    }

    let mut map_cache: HashMap<(usize, usize), Arc<MapColumns>> = HashMap::new();
    let mut trips: Vec<Vec<(usize, usize, Q)>> = vec![Vec::new(); cells.len()];
    for (t, level) in cells.iter().enumerate() {
        for (col, cell) in level.iter().enumerate() {
            let m = cell.max;
            let hsign = if cell.horizontal.rem_euclid(2) == 0 { Q::one() } else { -Q::one() };
            // vertical part
            for (j, x) in &phi.at(m).d[cell.coeff] {
                let row = positions[&(cell.chain.clone(), *j)];
                trips[t + 1].push((row, col, &hsign * x));
            }
            // horizontal part: insert one element of U
            let c = &cell.chain;
            for pos in 0..=c.len() {
                let lower = if pos == 0 { None } else { Some(c[pos - 1] as usize) };
                let upper = c.get(pos).map(|&u| u as usize);
                let s = if pos % 2 == 0 { Q::one() } else { -Q::one() };
                let candidates: Box<dyn Iterator<Item = usize>> = match lower {
                    Some(l) => Box::new(p.above(l).iter().copied()),
                    None => Box::new(0..p.len()),
                };
                for x in candidates {
                    if !inside[x] || upper.is_some_and(|u| !p.less(x, u)) {
                        continue;
                    }
                    let mut nc = c.clone();
                    nc.insert(pos, x as u32);
                    if upper.is_none() {
                        let mcols = map_cache.entry((m, x)).or_insert_with(|| Arc::new(phi.map(m, x))).clone();
                        for (j, y) in &mcols[cell.coeff] {
                            let row = positions[&(nc.clone(), *j)];
                            trips[t + 1].push((row, col, &s * y));
                        }
                    } else {
                        let row = positions[&(nc, cell.coeff)];
                        trips[t + 1].push((row, col, s.clone()));
                    }
                }
            }
        }
    }
    let mut diffs = Vec::new();
    for t in 0..cells.len() - 1 {
        let trip = std::mem::take(&mut trips[t + 1]);
        diffs.push(ExactMatrix::from_triplets(ring, cells[t + 1].len(), cells[t].len(), trip)?);
    }
    let labels = cells
        .iter()
        .map(|level| {
            level
                .iter()
                .map(|c| format!("{}|{}", chain_label(p, &c.chain), phi.at(c.max).labels[c.coeff]))
                .collect()
        })
        .collect();
    let ranks = cells.iter().map(Vec::len).collect();
    let complex = GradedComplex::new(ring, lo, ranks, diffs, labels)?;
    Ok(BarComplex {
        flavor,
        complex,
        cells,
        positions,
    })
}

#[derive(Serialize)]
struct DumpDegree<'a> {
    degree: i32,
    basis: &'a [String],
    /// (row, col, value) of the outgoing differential
    differential: Vec<(usize, usize, String)>,
}

impl BarComplex {
    pub fn min_degree(&self) -> i32 {
        self.complex.min_degree()
    }

    /// Chain map of a group element: permute chains, act on coefficients.
    pub fn action<F: PosetFunctor + ?Sized>(&self, phi: &F, g: &crate::perm::Perm) -> Result<ChainMap, PosetError> {
        let (sigma, value_maps) = phi.action(g).ok_or(PosetError::NoAction)?;
        let ring = self.complex.ring();
        let mut maps = Vec::new();
        for level in &self.cells {
            let mut trip = Vec::new();
            for (col, cell) in level.iter().enumerate() {
                let img: Vec<u32> = cell.chain.iter().map(|&x| sigma[x as usize] as u32).collect();
                for (j, y) in &value_maps[cell.max][cell.coeff] {
                    let row = *self.positions.get(&(img.clone(), *j)).ok_or(PosetError::NotPreserved)?;
                    trip.push((row, col, y.clone()));
                }
            }
            maps.push(ExactMatrix::from_triplets(ring, level.len(), level.len(), trip)?);
        }
        Ok(ChainMap {
            min_degree: self.complex.min_degree(),
            maps,
        })
    }

    /// Subcomplex of the associated graded spanned by cells whose chain
    /// maximum satisfies `keep`; only differential entries between such cells
    /// are kept (those that preserve the maximum).
    pub fn graded_piece(&self, keep: impl Fn(usize) -> bool) -> Result<GradedComplex, AlgebraError> {
        Ok(self.graded_piece_with_positions(keep)?.0)
    }

    /// As `graded_piece`, also returning for each degree the new position of
    /// every old cell (None when dropped).
    pub fn graded_piece_with_positions(
        &self,
        keep: impl Fn(usize) -> bool,
    ) -> Result<(GradedComplex, Vec<Vec<Option<usize>>>), AlgebraError> {
        let ring = self.complex.ring();
        let lo = self.complex.min_degree();
        let mut new_pos: Vec<Vec<Option<usize>>> = Vec::new();
        let mut ranks = Vec::new();
        let mut labels = Vec::new();
        for (t, level) in self.cells.iter().enumerate() {
            let mut pos = Vec::with_capacity(level.len());
            let mut lab = Vec::new();
            for (i, cell) in level.iter().enumerate() {
                if keep(cell.max) {
                    pos.push(Some(lab.len()));
                    lab.push(self.complex.labels(lo + t as i32)[i].clone());
                } else {
                    pos.push(None);
                }
            }
            new_pos.push(pos);
            ranks.push(lab.len());
            labels.push(lab);
        }
        if ranks.is_empty() {
            return Ok((GradedComplex::empty(ring), new_pos));
        }
        let mut diffs = Vec::new();
        for t in 0..self.cells.len() - 1 {
            let d = self.complex.differential(lo + t as i32);
            let mut trip = Vec::new();
            for (r, c, x) in d.entries() {
                if self.cells[t][c].max != self.cells[t + 1][r].max {
                    continue;
                }
                if let (Some(nr), Some(nc)) = (new_pos[t + 1][r], new_pos[t][c]) {
                    trip.push((nr, nc, x.clone()));
                }
            }
            diffs.push(ExactMatrix::from_triplets(ring, ranks[t + 1], ranks[t], trip)?);
        }
        Ok((GradedComplex::new(ring, lo, ranks, diffs, labels)?, new_pos))
    }

    /// JSON with per-degree basis labels and sparse differential triples.
    pub fn debug_json(&self) -> serde_json::Value {
        let lo = self.complex.min_degree();
        let degrees: Vec<DumpDegree> = (0..self.cells.len())
            .map(|t| {
                let k = lo + t as i32;
                let d = self.complex.differential(k);
                DumpDegree {
                    degree: k,
                    basis: self.complex.labels(k),
                    differential: d.entries().map(|(r, c, x)| (r, c, x.to_string())).collect(),
                }
            })
            .collect();
        serde_json::json!({ "flavor": self.flavor, "degrees": degrees })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{enumerate, SetPartition};

    fn pi(n: usize) -> Poset {
        Poset::from_partitions(&enumerate(n, 9).unwrap())
    }

    fn point() -> Poset {
        Poset::new(vec!["*".into()], |_, _| true)
    }

    #[test]
    fn point_hatcheck_is_s0() {
        let h = cohomology(&order_complex(&point(), Variant::HatCheck, Ring::Integers).unwrap().complex);
        assert_eq!(h.rank_map(), [(0, 1)].into());
    }

    #[test]
    fn partition_lattices_hatcheck() {
        let h = cohomology(&order_complex(&pi(2), Variant::HatCheck, Ring::Integers).unwrap().complex);
        assert_eq!(h.rank_map(), [(1, 1)].into());
        let h = cohomology(&order_complex(&pi(4), Variant::HatCheck, Ring::Integers).unwrap().complex);
        assert_eq!(h.rank_map(), [(3, 6)].into());
        assert!(h.is_torsion_free());
    }

    #[test]
    fn cone_is_acyclic() {
        for n in 2..=4 {
            let all = enumerate(n, 9).unwrap();
            let keep: Vec<usize> = (0..all.len()).filter(|&i| !all[i].is_bottom()).collect();
            let p = pi(n).subposet(&keep);
            let h = cohomology(&order_complex(&p, Variant::Plain, Ring::Integers).unwrap().complex);
            assert!(h.is_zero(), "n={n}");
        }
    }

    #[test]
    fn missing_extremes_are_errors() {
        let anti = Poset::new(vec!["a".into(), "b".into()], |i, j| i == j);
        assert!(matches!(order_complex(&anti, Variant::Hat, Ring::Integers), Err(PosetError::NoTop)));
        assert!(matches!(order_complex(&anti, Variant::Check, Ring::Integers), Err(PosetError::NoBottom)));
    }

    #[test]
    fn double_suspension_of_open_interval() {
        for n in 2..=5 {
            let all = enumerate(n, 9).unwrap();
            let p = pi(n);
            let inner: Vec<usize> = (0..all.len()).filter(|&i| !all[i].is_bottom() && !all[i].is_top()).collect();
            let hc = cohomology(&order_complex(&p, Variant::HatCheck, Ring::Integers).unwrap().complex);
            let hi = cohomology(&order_complex(&p.subposet(&inner), Variant::Plain, Ring::Integers).unwrap().complex);
            let shifted: std::collections::BTreeMap<i32, usize> = hi.rank_map().into_iter().map(|(k, r)| (k + 2, r)).collect();
            assert_eq!(hc.rank_map(), shifted, "n={n}");
        }
    }

    #[test]
    fn smash_products() {
        assert!(smash_check(&point(), &point()).unwrap());
        assert!(smash_check(&pi(2), &pi(2)).unwrap());
        assert!(smash_check(&pi(3), &pi(2)).unwrap());
        let h = cohomology(&order_complex(&pi(2).product(&pi(2)), Variant::HatCheck, Ring::Rationals).unwrap().complex);
        assert_eq!(h.rank_map(), [(2, 1)].into());
    }

    fn constant_bar(n: usize, flavor: Flavor) -> BarComplex {
        let all = enumerate(n, 9).unwrap();
        let u: Vec<usize> = (0..all.len()).filter(|&i| !all[i].is_bottom()).collect();
        let f = ConstantFunctor {
            poset: pi(n),
            module: CoeffModule::unit(),
        };
        bar_complex(&u, &f, flavor, Ring::Rationals).unwrap()
    }

    #[test]
    fn constant_coefficients() {
        for n in 2..=4 {
            let h = cohomology(&constant_bar(n, Flavor::B).complex);
            assert_eq!(h.rank_map(), [(0, 1)].into());
            assert!(cohomology(&constant_bar(n, Flavor::Btilde).complex).is_zero());
        }
    }

    #[test]
    fn bar_matches_order_complex_of_upset() {
        // U = k-equals upset, constant coefficients: H(𝔅) = H(∇U)
        let all = enumerate(5, 9).unwrap();
        let u = crate::partitions::UpSet::k_equals(5, 3).unwrap();
        let idx: Vec<usize> = (0..all.len()).filter(|&i| u.contains(&all[i])).collect();
        let f = ConstantFunctor {
            poset: pi(5),
            module: CoeffModule::unit(),
        };
        let bar = bar_complex(&idx, &f, Flavor::B, Ring::Integers).unwrap();
        let sub = pi(5).subposet(&idx);
        let oc = order_complex(&sub, Variant::Plain, Ring::Integers).unwrap();
        let mut expected = cohomology(&oc.complex);
        // unreduce: the empty chain contributes to degree -1/0 only
        let hb = cohomology(&bar.complex);
        let mut reduced = hb.rank_map();
        *reduced.entry(0).or_default() -= 1;
        reduced.retain(|_, r| *r > 0);
        expected.degrees.retain(|d| d.degree >= 0);
        assert_eq!(reduced, expected.rank_map());
    }

    #[test]
    fn chains_are_ordered_by_length_then_lexicographically() {
        let p = pi(3);
        let ch = p.chains(&vec![true; p.len()]);
        for w in ch.windows(2) {
            assert!(w[0].len() < w[1].len() || (w[0].len() == w[1].len() && w[0] < w[1]));
        }
        let _ = SetPartition::top(3);
    }
}
