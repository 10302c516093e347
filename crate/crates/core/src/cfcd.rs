//! The coefficient functor Φ_A on Πₙ built from a tcdga, the complexes CF and
//! CD, their ρ-filtration E1 pages, equivariant characters, and the closed
//! form for formal (zero product, zero differential) inputs.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exactalg::{
    add_entry, cohomology, normalize_invariant_factors, AlgebraError, ChainMap, CohomologyBasis, CohomologySummary,
    DegreeCohomology, Ring, SparseVec, Q,
};
use crate::partitions::{enumerate, join_closure, PartitionError, SetPartition, UpSet, UpSetSpec, DEFAULT_MAX_N};
use crate::perm::{centralizer_size, factorial, integer_partitions, Perm};
use crate::posetcx::{
    bar_complex, order_complex, restrict_chain_map, BarComplex, CoeffModule, Flavor, MapColumns, Poset, PosetError,
    PosetFunctor, Variant,
};
use crate::tcdga::{Coeff, FiniteTcdga, GradedModuleInput, Mode, MultKey, TcdgaError};

#[derive(Debug, Error)]
pub enum CfcdError {
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error(transparent)]
    Tcdga(#[from] TcdgaError),
    #[error("arity {n} exceeds the algebra's max arity {max}")]
    ArityOverflow { n: usize, max: usize },
    #[error("upset lives in Π_{0}, expected Π_{1}")]
    SizeMismatch(usize, usize),
    #[error("characters need a twisted algebra and an S_n-invariant upset")]
    NotEquivariant,
    #[error("the upset contains 0̂; E1 pages and the closed form need 0̂ ∉ U")]
    BottomInUpset,
}

/// Which of the two complexes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Which {
    CF,
    CD,
}

struct ElementData {
    /// blocks ordered by minimum, 0-indexed points
    blocks: Vec<Vec<usize>>,
    /// arity of each block's component
    sizes: Vec<usize>,
    /// mixed-radix strides, first factor most significant
    strides: Vec<usize>,
    module: CoeffModule,
}

/// Φ_A on Πₙ: `Φ(T) = A(T₁) ⊗ … ⊗ A(T_k)` with tuple bases ordered
/// lexicographically (blocks by minimum).
pub struct PhiA {
    algebra: Arc<FiniteTcdga>,
    n: usize,
    partitions: Vec<SetPartition>,
    index: HashMap<SetPartition, usize>,
    poset: Poset,
    data: Vec<ElementData>,
    cache: RwLock<HashMap<(usize, usize), Arc<MapColumns>>>,
}

pub(crate) fn koszul_odd(degrees: &[i32], order: &[usize]) -> bool {
    // sign of bringing factors into `order` (order[new] = old)
    let mut odd = false;
    for a in 0..order.len() {
        for b in a + 1..order.len() {
            if order[a] > order[b] && degrees[order[a]] % 2 != 0 && degrees[order[b]] % 2 != 0 {
                odd = !odd;
            }
        }
    }
    odd
}

pub(crate) fn signed(odd: bool) -> Q {
    if odd {
        -Q::one()
    } else {
        Q::one()
    }
}

impl PhiA {
    pub fn new(algebra: Arc<FiniteTcdga>, n: usize) -> Result<Self, CfcdError> {
        if n == 0 || n > algebra.max_arity {
            return Err(CfcdError::ArityOverflow {
                n,
                max: algebra.max_arity,
            });
        }
        let partitions = enumerate(n, DEFAULT_MAX_N)?;
        let index = partitions.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let poset = Poset::from_partitions(&partitions);
        let data = partitions
            .iter()
            .map(|t| {
                let blocks = t.blocks0();
                let sizes: Vec<usize> = blocks.iter().map(Vec::len).collect();
                let dims: Vec<usize> = sizes.iter().map(|&s| algebra.component(s).dim()).collect();
                let mut strides = vec![1usize; dims.len()];
                for i in (0..dims.len().saturating_sub(1)).rev() {
                    strides[i] = strides[i + 1] * dims[i + 1];
                }
                let total: usize = dims.iter().product();
                let mut degrees = Vec::with_capacity(total);
                let mut labels = Vec::with_capacity(total);
                let mut d = Vec::with_capacity(total);
                for idx in 0..total {
                    let tuple: Vec<usize> = (0..dims.len()).map(|i| idx / strides[i] % dims[i]).collect();
                    let comps: Vec<_> = sizes.iter().map(|&s| algebra.component(s)).collect();
                    degrees.push(tuple.iter().zip(&comps).map(|(&a, c)| c.degrees[a]).sum());
                    labels.push(tuple.iter().zip(&comps).map(|(&a, c)| c.names[a].as_str()).collect::<Vec<_>>().join("⊗"));
                    // Koszul-signed Leibniz sum over factors
                    let mut image = SparseVec::new();
                    let mut before = 0i32;
                    for (i, (&a, c)) in tuple.iter().zip(&comps).enumerate() {
                        let s = signed(before % 2 != 0);
                        for (b, x) in &c.d[a] {
                            let new_idx = idx - a * strides[i] + b * strides[i];
                            add_entry(&mut image, new_idx, &s * x);
                        }
                        before += c.degrees[a];
                    }
                    d.push(image);
                }
                ElementData {
                    blocks,
                    sizes,
                    strides,
                    module: CoeffModule { degrees, labels, d },
                }
            })
            .collect();
        Ok(PhiA {
            algebra,
            n,
            partitions,
            index,
            poset,
            data,
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn algebra(&self) -> &FiniteTcdga {
        &self.algebra
    }

    pub fn partitions(&self) -> &[SetPartition] {
        &self.partitions
    }

    pub fn index_of(&self, t: &SetPartition) -> Option<usize> {
        self.index.get(t).copied()
    }

    fn tuple(&self, x: usize, idx: usize) -> Vec<usize> {
        let e = &self.data[x];
        e.strides
            .iter()
            .zip(&e.sizes)
            .map(|(&s, &k)| idx / s % self.algebra.component(k).dim())
            .collect()
    }

    fn encode(&self, x: usize, tuple: &[usize]) -> usize {
        tuple.iter().zip(&self.data[x].strides).map(|(a, s)| a * s).sum()
    }

    /// Element obtained from `x` by merging its blocks `i < j`.
    fn merged(&self, x: usize, i: usize, j: usize) -> usize {
        let mut blocks: Vec<Vec<usize>> = self.data[x].blocks.iter().map(|b| b.iter().map(|p| p + 1).collect()).collect();
        let bj = blocks.remove(j);
        blocks[i].extend(bj);
        self.index[&SetPartition::from_blocks(self.n, &blocks).expect("valid merge")]
    }

    /// Merge blocks `i < j` of element `x` on one basis tuple: move factor j
    /// next to factor i (Koszul sign), then multiply along the interleaving
    /// of the two blocks. The result lives in `Φ(y)`.
    fn merge(&self, x: usize, y: usize, i: usize, j: usize, tuple: &[usize]) -> SparseVec {
        let e = &self.data[x];
        let degs: Vec<i32> = tuple.iter().zip(&e.sizes).map(|(&a, &s)| self.algebra.degree(s, a)).collect();
        let between: i32 = degs[i + 1..j].iter().sum();
        let s = signed(degs[j] * between % 2 != 0);
        let (bi, bj) = (&e.blocks[i], &e.blocks[j]);
        let mut union: Vec<usize> = bi.iter().chain(bj).copied().collect();
        union.sort_unstable();
        let mask = union.iter().enumerate().filter(|(_, p)| bi.contains(p)).fold(0u32, |m, (q, _)| m | 1 << q);
        let key = MultKey {
            n: bi.len(),
            m: bj.len(),
            mask,
        };
        let prod = self.algebra.product(key, tuple[i], tuple[j]).expect("arity within range");
        let mut out = SparseVec::new();
        let mut new_tuple: Vec<usize> = tuple.to_vec();
        new_tuple.remove(j);
        for (c, coeff) in prod {
            new_tuple[i] = c;
            add_entry(&mut out, self.encode(y, &new_tuple), &s * coeff);
        }
        out
    }

    fn compute_map(&self, x: usize, y: usize) -> MapColumns {
        let dim = self.data[x].module.degrees.len();
        let mut cur = x;
        let mut cols: Vec<SparseVec> = (0..dim).map(|i| SparseVec::from([(i, Q::one())])).collect();
        let target = &self.partitions[y];
        while cur != y {
            let blocks = &self.data[cur].blocks;
            let (i, j) = (0..blocks.len())
                .flat_map(|i| (i + 1..blocks.len()).map(move |j| (i, j)))
                .find(|&(i, j)| target.block_of(blocks[i][0]) == target.block_of(blocks[j][0]))
                .expect("x refines y");
            let next = self.merged(cur, i, j);
            let mut memo: HashMap<usize, SparseVec> = HashMap::new();
            cols = cols
                .iter()
                .map(|v| {
                    let mut out = SparseVec::new();
                    for (b, x) in v {
                        let img = memo.entry(*b).or_insert_with(|| self.merge(cur, next, i, j, &self.tuple(cur, *b)));
                        for (c, y) in img.iter() {
                            add_entry(&mut out, *c, x * y);
                        }
                    }
                    out
                })
                .collect();
            cur = next;
        }
        cols
    }

    /// Image of one basis tuple of Φ(x) under `g`, in Φ(g·x).
    fn act_basis(&self, g: &Perm, x: usize, gx: usize, idx: usize) -> Result<SparseVec, CfcdError> {
        let e = &self.data[x];
        let tuple = self.tuple(x, idx);
        let target = &self.data[gx];
        let k = e.blocks.len();
        // position of g(T_j) among the blocks of g·x, and the relabelling inside
        let mut order = vec![0usize; k]; // order[new position] = old block
        let mut factor_images: Vec<Arc<Vec<SparseVec>>> = Vec::with_capacity(k);
        for (j, b) in e.blocks.iter().enumerate() {
            let img: Vec<usize> = b.iter().map(|&p| g.apply(p)).collect();
            let mut sorted = img.clone();
            sorted.sort_unstable();
            let pos = target.blocks.iter().position(|tb| *tb == sorted).expect("g maps blocks to blocks");
            order[pos] = j;
            let sigma: Vec<usize> = img.iter().map(|v| sorted.binary_search(v).expect("member")).collect();
            factor_images.push(self.algebra.perm_action(&Perm::from_images(sigma).expect("bijection"))?);
        }
        let degs: Vec<i32> = tuple.iter().zip(&e.sizes).map(|(&a, &s)| self.algebra.degree(s, a)).collect();
        let s = signed(koszul_odd(&degs, &order));
        let mut acc: Vec<(Vec<usize>, Q)> = vec![(Vec::with_capacity(k), s)];
        for &j in &order {
            let col = &factor_images[j][tuple[j]];
            let mut next = Vec::with_capacity(acc.len() * col.len());
            for (t, c) in &acc {
                for (b, y) in col {
                    let mut t2 = t.clone();
                    t2.push(*b);
                    next.push((t2, c * y));
                }
            }
            acc = next;
        }
        let mut out = SparseVec::new();
        for (t, c) in acc {
            add_entry(&mut out, self.encode(gx, &t), c);
        }
        Ok(out)
    }

    /// Element permutation of `g` on Πₙ.
    pub fn element_permutation(&self, g: &Perm) -> Vec<usize> {
        self.partitions.iter().map(|t| self.index[&t.act(g).expect("same n")]).collect()
    }
}

impl PosetFunctor for PhiA {
    fn carrier(&self) -> &Poset {
        &self.poset
    }

    fn at(&self, x: usize) -> &CoeffModule {
        &self.data[x].module
    }

    fn map(&self, x: usize, y: usize) -> MapColumns {
        if let Some(m) = self.cache.read().expect("cache lock").get(&(x, y)) {
            return (**m).clone();
        }
        let m = Arc::new(self.compute_map(x, y));
        self.cache.write().expect("cache lock").insert((x, y), m.clone());
        (*m).clone()
    }

    fn action(&self, g: &Perm) -> Option<(Vec<usize>, Vec<MapColumns>)> {
        if self.algebra.mode != Mode::Twisted || g.len() != self.n {
            return None;
        }
        let sigma = self.element_permutation(g);
        let maps = (0..self.partitions.len())
            .map(|x| {
                (0..self.data[x].module.degrees.len())
                    .map(|i| self.act_basis(g, x, sigma[x], i))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()
            .ok()?;
        Some((sigma, maps))
    }
}

pub fn phi_functor(a: Arc<FiniteTcdga>, n: usize) -> Result<PhiA, CfcdError> {
    PhiA::new(a, n)
}

/// A CF or CD complex with the data needed for filtrations and characters.
pub struct CfcdComplex {
    pub which: Which,
    pub upset: UpSet,
    pub phi: PhiA,
    pub bar: BarComplex,
    /// carrier indices of U
    pub members: Vec<usize>,
}

fn build(which: Which, u: &UpSet, a: Arc<FiniteTcdga>, ring: Ring) -> Result<CfcdComplex, CfcdError> {
    let phi = PhiA::new(a, u.n())?;
    let members: Vec<usize> = (0..phi.partitions.len()).filter(|&i| u.contains(&phi.partitions[i])).collect();
    let flavor = match which {
        Which::CF => Flavor::Btilde,
        Which::CD => Flavor::B,
    };
    let bar = bar_complex(&members, &phi, flavor, ring)?;
    Ok(CfcdComplex {
        which,
        upset: u.clone(),
        phi,
        bar,
        members,
    })
}

/// CF(U,A) = 𝔅̃(U, Φ_A).
pub fn cf_complex(u: &UpSet, a: Arc<FiniteTcdga>, ring: Ring) -> Result<CfcdComplex, CfcdError> {
    build(Which::CF, u, a, ring)
}

/// CD(U,A) = 𝔅(U, Φ_A).
pub fn cd_complex(u: &UpSet, a: Arc<FiniteTcdga>, ring: Ring) -> Result<CfcdComplex, CfcdError> {
    build(Which::CD, u, a, ring)
}

pub fn total_cohomology(cx: &CfcdComplex) -> CohomologySummary {
    cohomology(&cx.bar.complex)
}

/// Per degree, cycle type (weakly decreasing) -> trace over ℚ.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CharacterTableResult {
    pub n: usize,
    pub degrees: BTreeMap<i32, BTreeMap<Vec<usize>, Q>>,
}

#[derive(Serialize)]
pub struct CharacterDegreeJson {
    pub degree: i32,
    pub by_cycle_type: BTreeMap<String, Coeff>,
}

impl CharacterTableResult {
    pub(crate) fn insert(&mut self, k: i32, lambda: &[usize], x: Q) {
        self.degrees.entry(k).or_default().insert(lambda.to_vec(), x);
    }

    /// Canonical form: zero traces are not stored.
    pub(crate) fn prune(mut self) -> Self {
        for m in self.degrees.values_mut() {
            m.retain(|_, x| !x.is_zero());
        }
        self.degrees.retain(|_, m| !m.is_empty());
        self
    }

    pub fn value(&self, k: i32, lambda: &[usize]) -> Q {
        self.degrees.get(&k).and_then(|m| m.get(lambda)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn to_json(&self) -> Vec<CharacterDegreeJson> {
        self.degrees
            .iter()
            .map(|(&k, m)| CharacterDegreeJson {
                degree: k,
                by_cycle_type: integer_partitions(self.n)
                    .into_iter()
                    .map(|l| {
                        let x = m.get(&l).cloned().unwrap_or_else(Q::zero);
                        (format!("{l:?}").replace(' ', ""), Coeff(x))
                    })
                    .collect(),
            })
            .collect()
    }
}

/// Dimensions of the S_n-invariants per degree; errors if an average is not
/// a nonnegative integer.
pub fn invariants_dims(r: &CharacterTableResult) -> Result<BTreeMap<i32, usize>, String> {
    let nf = Q::from_integer(BigInt::from(factorial(r.n)));
    let mut out = BTreeMap::new();
    for (&k, m) in &r.degrees {
        let mut s = Q::zero();
        for (l, x) in m {
            let class = Q::from_integer(BigInt::from(factorial(r.n) / centralizer_size(l)));
            s += class * x;
        }
        let avg = s / &nf;
        if !avg.is_integer() || avg < Q::zero() {
            return Err(format!("degree {k}: invariant dimension {avg} is not a nonnegative integer"));
        }
        let v = avg.to_integer().to_usize().expect("small");
        if v > 0 {
            out.insert(k, v);
        }
    }
    Ok(out)
}

fn check_equivariant(cx: &CfcdComplex) -> Result<(), CfcdError> {
    if cx.phi.algebra.mode != Mode::Twisted || !cx.upset.is_symmetric() {
        return Err(CfcdError::NotEquivariant);
    }
    Ok(())
}

/// Traces of one representative per cycle type on total cohomology over ℚ.
pub fn characters(cx: &CfcdComplex) -> Result<CharacterTableResult, CfcdError> {
    check_equivariant(cx)?;
    let complex = cx.bar.complex.clone().with_ring(Ring::Rationals)?;
    let basis = CohomologyBasis::new(&complex);
    let n = cx.phi.n;
    let lambdas = integer_partitions(n);
    let traces: Vec<Vec<(i32, Q)>> = lambdas
        .par_iter()
        .map(|l| -> Result<Vec<(i32, Q)>, CfcdError> {
            let g = Perm::class_representative(l);
            let f = cx.bar.action(&cx.phi, &g)?;
            let f = ChainMap {
                min_degree: f.min_degree,
                maps: f.maps.into_iter().map(|m| m.with_ring(Ring::Rationals)).collect::<Result<_, _>>()?,
            };
            if complex.is_empty() {
                return Ok(Vec::new());
            }
            complex.degrees().map(|k| Ok((k, basis.trace(&f, k)?))).collect()
        })
        .collect::<Result<_, _>>()?;
    let mut out = CharacterTableResult {
        n,
        ..Default::default()
    };
    for (l, tr) in lambdas.iter().zip(traces) {
        for (k, x) in tr {
            out.insert(k, l, x);
        }
    }
    Ok(out.prune())
}

/// One E1 entry: the associated-graded piece with chain maximum T.
#[derive(Clone, Debug, Serialize)]
pub struct E1Entry {
    #[serde(rename = "T")]
    pub t: SetPartition,
    pub p: usize,
    /// cohomology of the graded piece (authoritative)
    pub entries: Vec<DegreeCohomology>,
    /// closed form H̃(interval) ⊗ H(Φ(T)) over ℚ, degree -> rank
    pub closed_form: BTreeMap<i32, usize>,
    pub agrees: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct E1Page {
    pub which: Which,
    pub entries: Vec<E1Entry>,
    /// elements of U outside the join closure whose graded piece is not
    /// acyclic (must be empty)
    pub off_closure_nonzero: Vec<SetPartition>,
    /// per filtration degree p, the S_n character of E1^{p,•} (twisted
    /// inputs with symmetric U only)
    #[serde(skip)]
    pub characters_by_p: BTreeMap<usize, CharacterTableResult>,
}

impl E1Page {
    /// Σ_p rank E1^{p, q-p} per total degree q.
    pub fn total_ranks(&self) -> BTreeMap<i32, usize> {
        let mut out = BTreeMap::new();
        for e in &self.entries {
            for d in &e.entries {
                *out.entry(d.degree).or_default() += d.free_rank;
            }
        }
        out.retain(|_, r| *r > 0);
        out
    }

    pub fn closed_form_agrees(&self) -> bool {
        self.entries.iter().all(|e| e.agrees) && self.off_closure_nonzero.is_empty()
    }
}

fn convolve(a: &BTreeMap<i32, usize>, b: &BTreeMap<i32, usize>) -> BTreeMap<i32, usize> {
    let mut out = BTreeMap::new();
    for (i, x) in a {
        for (j, y) in b {
            *out.entry(i + j).or_default() += x * y;
        }
    }
    out.retain(|_, r| *r > 0);
    out
}

/// The interval poset for the closed form: a fresh bottom below the members
/// of `closure` that are ⪯ `t` (CF), or just those members (CD). Returns the
/// poset and the partition behind each non-bottom index.
fn interval(closure: &[SetPartition], t: &SetPartition, which: Which) -> (Poset, Vec<Option<SetPartition>>) {
    let mut elems: Vec<Option<SetPartition>> = Vec::new();
    if which == Which::CF {
        elems.push(None);
    }
    elems.extend(closure.iter().filter(|x| x.refines(t)).cloned().map(Some));
    let labels = elems.iter().map(|e| e.as_ref().map_or("⊥".to_string(), |x| x.to_string())).collect();
    let p = Poset::new(labels, |i, j| match (&elems[i], &elems[j]) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(a), Some(b)) => a.refines(b),
    });
    (p, elems)
}

fn interval_variant(which: Which) -> Variant {
    match which {
        Which::CF => Variant::HatCheck,
        Which::CD => Variant::Hat,
    }
}

/// The indexing set: J_U, plus 0̂ for CF.
fn e1_index(u: &UpSet, which: Which) -> Result<Vec<SetPartition>, CfcdError> {
    if u.contains(&SetPartition::bottom(u.n())) {
        return Err(CfcdError::BottomInUpset);
    }
    Ok(join_closure(u, which == Which::CF).elements)
}

/// ρ(T) = n − |T|.
pub fn rho(t: &SetPartition) -> usize {
    t.n() - t.num_blocks()
}

pub fn e1_page(cx: &CfcdComplex) -> Result<E1Page, CfcdError> {
    let closure = e1_index(&cx.upset, cx.which)?;
    let ring = cx.bar.complex.ring();
    let in_closure: Vec<bool> = cx.phi.partitions.iter().map(|x| closure.binary_search(x).is_ok()).collect();
    let mut support: Vec<usize> = cx.members.clone();
    if cx.which == Which::CF {
        support.insert(0, cx.phi.index[&SetPartition::bottom(cx.phi.n)]);
    }
    let closure_no_bottom: Vec<SetPartition> = join_closure(&cx.upset, false).elements;
    let pieces: Vec<(usize, CohomologySummary)> = support
        .par_iter()
        .map(|&x| Ok((x, cohomology(&cx.bar.graded_piece(|m| m == x)?))))
        .collect::<Result<_, AlgebraError>>()?;
    let mut entries = Vec::new();
    let mut off = Vec::new();
    for (x, h) in pieces {
        let t = cx.phi.partitions[x].clone();
        if !in_closure[x] {
            if !h.is_zero() {
                off.push(t);
            }
            continue;
        }
        let (p, _) = interval(&closure_no_bottom, &t, cx.which);
        let hi = cohomology(&order_complex(&p, interval_variant(cx.which), Ring::Rationals)?.complex);
        let hphi = cohomology(&cx.phi.data[x].module.to_complex(Ring::Rationals)?);
        let closed = convolve(&hi.rank_map(), &hphi.rank_map());
        let agrees = closed == h.rank_map();
        entries.push(E1Entry {
            p: rho(&t),
            t,
            entries: h.degrees,
            closed_form: closed,
            agrees,
        });
    }
    entries.sort_by(|a, b| a.p.cmp(&b.p).then_with(|| a.t.cmp(&b.t)));
    let characters_by_p = if ring == Ring::Rationals && check_equivariant(cx).is_ok() {
        e1_characters(cx)?
    } else {
        BTreeMap::new()
    };
    Ok(E1Page {
        which: cx.which,
        entries,
        off_closure_nonzero: off,
        characters_by_p,
    })
}

fn e1_characters(cx: &CfcdComplex) -> Result<BTreeMap<usize, CharacterTableResult>, CfcdError> {
    let n = cx.phi.n;
    let rhos: Vec<usize> = cx.phi.partitions.iter().map(rho).collect();
    let mut out = BTreeMap::new();
    let lambdas = integer_partitions(n);
    let actions: Vec<ChainMap> =
        lambdas.iter().map(|l| cx.bar.action(&cx.phi, &Perm::class_representative(l))).collect::<Result<_, _>>()?;
    for p in 0..n {
        let (piece, pos) = cx.bar.graded_piece_with_positions(|m| rhos[m] == p)?;
        if piece.is_empty() {
            continue;
        }
        let basis = CohomologyBasis::new(&piece);
        let mut table = CharacterTableResult {
            n,
            ..Default::default()
        };
        for (l, f) in lambdas.iter().zip(&actions) {
            let r = restrict_chain_map(f, &pos, Ring::Rationals)?;
            for k in piece.degrees() {
                table.insert(k, l, basis.trace(&r, k)?);
            }
        }
        let table = table.prune();
        if !table.degrees.is_empty() {
            out.insert(p, table);
        }
    }
    Ok(out)
}

/// Result of the closed form for formal inputs.
#[derive(Clone, Debug)]
pub struct ClosedForm {
    pub cohomology: CohomologySummary,
    pub characters: Option<CharacterTableResult>,
}

/// Graded trace of a permutation of `k` tensor factors of `h` (trivial
/// internal action), Koszul signs included: degree -> trace.
fn tensor_power_trace(h: &GradedModuleInput, block_cycles: &[usize]) -> BTreeMap<i32, i64> {
    let mut acc: BTreeMap<i32, i64> = BTreeMap::from([(0, 1)]);
    for &l in block_cycles {
        let mut factor: BTreeMap<i32, i64> = BTreeMap::new();
        for (&d, &r) in &h.ranks {
            let s = if d.rem_euclid(2) == 1 && l % 2 == 0 { -1 } else { 1 };
            *factor.entry(l as i32 * d).or_default() += s * r as i64;
        }
        let mut next = BTreeMap::new();
        for (i, x) in &acc {
            for (j, y) in &factor {
                *next.entry(i + j).or_default() += x * y;
            }
        }
        acc = next;
    }
    acc.retain(|_, v| *v != 0);
    acc
}

/// CF cohomology of a formal algebra on `h` with upset `u`, as the direct sum
/// over T ∈ J_{U₀} of H^{⊗|T|} ⊗ H̃(∇̂∇̌ of the interval below T), without
/// building the CF complex. Over ℤ, interval torsion is tensored with the
/// free module H^{⊗|T|}.
pub fn iacyclic_closed_form(h: &GradedModuleInput, u: &UpSet, with_characters: bool) -> Result<ClosedForm, CfcdError> {
    let closure_b = e1_index(u, Which::CF)?;
    let closure = join_closure(u, false).elements;
    let n = u.n();
    let ring = h.ring;
    let mut free: BTreeMap<i32, usize> = BTreeMap::new();
    let mut tors: BTreeMap<i32, Vec<BigInt>> = BTreeMap::new();
    let lambdas = integer_partitions(n);
    let reps: Vec<Perm> = lambdas.iter().map(|l| Perm::class_representative(l)).collect();
    let mut chars = CharacterTableResult {
        n,
        ..Default::default()
    };
    if with_characters && !u.is_symmetric() {
        return Err(CfcdError::NotEquivariant);
    }
    for t in &closure_b {
        let (poset, elems) = interval(&closure, t, Which::CF);
        let oc = order_complex(&poset, Variant::HatCheck, ring)?;
        let hi = cohomology(&oc.complex);
        let k = t.num_blocks();
        // ranks of H^{⊗k}
        let hk = tensor_power_trace(h, &vec![1; k]);
        for d in &hi.degrees {
            for (&i, &r) in &hk {
                let r = r as usize;
                *free.entry(d.degree + i).or_default() += d.free_rank * r;
                for f in &d.torsion {
                    tors.entry(d.degree + i).or_default().extend(std::iter::repeat_n(f.clone(), r));
                }
            }
        }
        if !with_characters {
            continue;
        }
        let oc_q = order_complex(&poset, Variant::HatCheck, Ring::Rationals)?;
        let basis = CohomologyBasis::new(&oc_q.complex);
        for (l, g) in lambdas.iter().zip(&reps) {
            if &t.act(g)? != t {
                continue;
            }
            let sigma: Vec<usize> = elems
                .iter()
                .map(|e| match e {
                    None => 0,
                    Some(x) => {
                        let gx = Some(x.act(g).expect("same n"));
                        elems.iter().position(|y| *y == gx).expect("interval is g-stable")
                    }
                })
                .collect();
            let f = oc_q.automorphism(&sigma)?;
            // cycle type of g on the blocks of T
            let blocks = t.blocks0();
            let block_perm: Vec<usize> = blocks.iter().map(|b| t.block_of(g.apply(b[0]))).collect();
            let cycles = Perm::from_images(block_perm).expect("block permutation").cycle_type();
            let tp = tensor_power_trace(h, &cycles);
            for kk in oc_q.complex.degrees() {
                let x = basis.trace(&f, kk)?;
                if x.is_zero() {
                    continue;
                }
                for (&i, &y) in &tp {
                    let cur = chars.value(kk + i, l);
                    chars.insert(kk + i, l, cur + &x * Q::from_integer(BigInt::from(y)));
                }
            }
        }
    }
    let mut degrees: Vec<i32> = free.keys().chain(tors.keys()).copied().collect();
    degrees.sort_unstable();
    degrees.dedup();
    let summary = CohomologySummary::new(
        ring,
        degrees
            .into_iter()
            .map(|k| DegreeCohomology {
                degree: k,
                free_rank: free.get(&k).copied().unwrap_or(0),
                torsion: normalize_invariant_factors(tors.remove(&k).unwrap_or_default())
                    .into_iter()
                    .filter(|x| !x.is_one())
                    .collect(),
            })
            .collect(),
    );
    Ok(ClosedForm {
        cohomology: summary,
        characters: with_characters.then(|| chars.prune()),
    })
}

/// ℚ characters of H̃(∇̂∇̌ Π_{(k,1^{n-k})}), the join closure of the
/// k-equals atoms together with 0̂. Zero for 1 < n < k, where the poset has
/// no top.
pub fn pi_k_direct(k: usize, n: usize) -> Result<CharacterTableResult, CfcdError> {
    let mut out = CharacterTableResult {
        n,
        ..Default::default()
    };
    let elements = match n {
        0 => return Ok(out),
        1 => vec![SetPartition::bottom(1)],
        _ if n < k => return Ok(out),
        _ => join_closure(&UpSet::k_equals(n, k)?, true).elements,
    };
    let poset = Poset::from_partitions(&elements);
    let oc = order_complex(&poset, Variant::HatCheck, Ring::Rationals)?;
    let basis = CohomologyBasis::new(&oc.complex);
    for l in integer_partitions(n) {
        let g = Perm::class_representative(&l);
        let sigma: Vec<usize> = elements
            .iter()
            .map(|x| {
                let gx = x.act(&g).expect("same n");
                elements.binary_search(&gx).expect("poset is symmetric")
            })
            .collect();
        let f = oc.automorphism(&sigma)?;
        for d in oc.complex.degrees() {
            out.insert(d, &l, basis.trace(&f, d)?);
        }
    }
    Ok(out.prune())
}

/// Output document for one CF/CD computation.
#[derive(Serialize)]
pub struct CfcdReport {
    pub n: usize,
    pub upset: UpSetSpec,
    pub mode: Which,
    pub ring: Ring,
    pub cohomology: Vec<DegreeCohomology>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub characters: Option<Vec<CharacterDegreeJson>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub invariants: Option<BTreeMap<i32, usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub e1: Option<Vec<E1Entry>>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tcdga::{constant_tcdga, formal_tcdga, shuffle_forget, FiniteCdga};

    fn formal(d: i32, n: usize) -> Arc<FiniteTcdga> {
        Arc::new(formal_tcdga(&GradedModuleInput::new(Ring::Rationals, [(d, 1)]), n).unwrap())
    }

    fn top_only(n: usize) -> UpSet {
        UpSet::new(n, vec![SetPartition::top(n)]).unwrap()
    }

    #[test]
    fn phi_dimensions_and_zero_maps() {
        let phi = PhiA::new(formal(2, 2), 2).unwrap();
        let b = phi.index_of(&SetPartition::bottom(2)).unwrap();
        let t = phi.index_of(&SetPartition::top(2)).unwrap();
        assert_eq!(phi.at(b).degrees, vec![4]);
        assert_eq!(phi.map(b, t), vec![SparseVec::new()]);
        let three = Arc::new(constant_tcdga(&FiniteCdga::three_dim_example(), 3).unwrap());
        let phi = PhiA::new(three, 3).unwrap();
        for (x, p) in phi.partitions().iter().enumerate() {
            assert_eq!(phi.at(x).degrees.len(), 3usize.pow(p.num_blocks() as u32));
        }
        let all: Vec<usize> = (0..phi.partitions().len()).collect();
        crate::posetcx::validate_functor(&phi, &all).unwrap();
    }

    #[test]
    fn constant_cdga_products_in_pi2() {
        let three = Arc::new(constant_tcdga(&FiniteCdga::three_dim_example(), 2).unwrap());
        let phi = PhiA::new(three, 2).unwrap();
        let b = phi.index_of(&SetPartition::bottom(2)).unwrap();
        let t = phi.index_of(&SetPartition::top(2)).unwrap();
        let m = phi.map(b, t);
        // basis order 1,c,w; tuples (a1,a2) -> 3*a1 + a2
        assert!(m[3 + 2].is_empty()); // c⊗w -> 0
        assert!(m[3 + 1].is_empty()); // c⊗c -> 0
        assert_eq!(m[1], SparseVec::from([(1, Q::one())])); // 1⊗c -> c
        assert_eq!(m[3 * 2], SparseVec::from([(2, Q::one())])); // w⊗1 -> w
    }

    #[test]
    fn small_cf_examples() {
        let cx = cf_complex(&top_only(2), formal(2, 2), Ring::Rationals).unwrap();
        assert_eq!(total_cohomology(&cx).rank_map(), [(3, 1), (4, 1)].into());
        let ch = characters(&cx).unwrap();
        assert_eq!(ch.value(3, &[2]), Q::one());
        assert_eq!(ch.value(4, &[2]), Q::one());
        assert_eq!(invariants_dims(&ch).unwrap(), [(3, 1), (4, 1)].into());
        let e1 = e1_page(&cx).unwrap();
        assert!(e1.closed_form_agrees());
        assert_eq!(e1.entries.len(), 2);
        assert_eq!((e1.entries[0].p, e1.entries[0].entries[0].degree), (0, 4));
        assert_eq!((e1.entries[1].p, e1.entries[1].entries[0].degree), (1, 3));
        let cd = cd_complex(&top_only(2), formal(2, 2), Ring::Rationals).unwrap();
        assert_eq!(e1_page(&cd).unwrap().entries.len(), 1);
    }

    #[test]
    fn odd_swap_sign() {
        let cx = cf_complex(&top_only(2), formal(1, 2), Ring::Rationals).unwrap();
        let f = cx.bar.action(&cx.phi, &Perm::transposition(2, 0, 1)).unwrap();
        // the empty chain sits alone in total degree 2
        assert_eq!(f.at(2, 1, 1, Ring::Rationals).get(0, 0), -Q::one());
    }

    #[test]
    fn point_algebra() {
        let pt = Arc::new(constant_tcdga(&FiniteCdga::point(), 4).unwrap());
        for n in 2..=4 {
            let u = UpSet::full(n).unwrap();
            assert!(total_cohomology(&cf_complex(&u, pt.clone(), Ring::Rationals).unwrap()).is_zero());
            let cd = cd_complex(&u, pt.clone(), Ring::Rationals).unwrap();
            assert_eq!(total_cohomology(&cd).rank_map(), [(0, 1)].into());
        }
    }

    #[test]
    fn arnold_n3() {
        let cx = cf_complex(&UpSet::full(3).unwrap(), formal(2, 3), Ring::Integers).unwrap();
        let h = total_cohomology(&cx);
        assert_eq!(h.rank_map(), [(4, 2), (5, 3), (6, 1)].into());
        let cf = iacyclic_closed_form(&GradedModuleInput::new(Ring::Integers, [(2, 1)]), &UpSet::full(3).unwrap(), false).unwrap();
        assert_eq!(cf.cohomology, h);
    }

    #[test]
    fn closed_form_characters_match() {
        let h = GradedModuleInput::new(Ring::Rationals, [(1, 1), (2, 1)]);
        let u = UpSet::k_equals(4, 3).unwrap();
        let a = Arc::new(formal_tcdga(&h, 4).unwrap());
        let cx = cf_complex(&u, a, Ring::Rationals).unwrap();
        let cf = iacyclic_closed_form(&h, &u, true).unwrap();
        assert_eq!(cf.cohomology, total_cohomology(&cx));
        assert_eq!(cf.characters.unwrap(), characters(&cx).unwrap());
        let e1 = e1_page(&cx).unwrap();
        assert!(e1.closed_form_agrees());
        assert_eq!(e1.total_ranks(), total_cohomology(&cx).rank_map());
    }

    #[test]
    fn shuffle_mode_matches_twisted() {
        let a = constant_tcdga(&FiniteCdga::three_dim_example(), 3).unwrap();
        let s = Arc::new(shuffle_forget(&a).unwrap());
        let u = UpSet::full(3).unwrap();
        let t = total_cohomology(&cf_complex(&u, Arc::new(a), Ring::Rationals).unwrap());
        let sh = cf_complex(&u, s, Ring::Rationals).unwrap();
        assert_eq!(total_cohomology(&sh), t);
        assert!(matches!(characters(&sh), Err(CfcdError::NotEquivariant)));
    }

    #[test]
    fn euler_short_exact_sequence() {
        let a = Arc::new(constant_tcdga(&FiniteCdga::three_dim_example(), 3).unwrap());
        let u = UpSet::k_equals(3, 2).unwrap();
        let cf = cf_complex(&u, a.clone(), Ring::Rationals).unwrap();
        let cd = cd_complex(&u, a.clone(), Ring::Rationals).unwrap();
        let phi0 = cf.phi.at(cf.phi.index_of(&SetPartition::bottom(3)).unwrap()).to_complex(Ring::Rationals).unwrap();
        assert_eq!(
            cf.bar.complex.euler_characteristic(),
            phi0.euler_characteristic() - cd.bar.complex.euler_characteristic()
        );
    }
}
