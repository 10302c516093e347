//! Finite twisted commutative dg algebras (and their shuffle-mode shadows),
//! finite commutative dg algebras, and the standard constructors.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exactalg::{add_entry, axpy, Ring, SparseVec, Q};
use crate::perm::Perm;

/// Hard ceiling on arity: shuffle patterns are stored as `u32` bitmasks.
pub const MAX_SUPPORTED_ARITY: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TcdgaError {
    #[error("unknown basis element {0:?}")]
    UnknownBasis(String),
    #[error("duplicate basis name {0:?}")]
    DuplicateBasis(String),
    #[error("arity {0} is out of range (max {1})")]
    Arity(usize, usize),
    #[error("bad coefficient {0:?}")]
    BadCoeff(String),
    #[error("non-integral coefficient {0} over Z")]
    NonIntegral(String),
    #[error("malformed input: {0}")]
    Malformed(String),
    #[error("ring mismatch")]
    RingMismatch,
    #[error("operation needs a twisted (equivariant) algebra")]
    NeedsTwisted,
    #[error("validation failed: {0}")]
    Invalid(String),
}

/// A scalar in JSON: an integer or a string such as "-3/4".
#[derive(Clone, Debug, PartialEq)]
pub struct Coeff(pub Q);

impl Serialize for Coeff {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match (self.0.is_integer(), self.0.numer().to_i64()) {
            (true, Some(i)) => s.serialize_i64(i),
            _ => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Coeff {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Int(i) => Ok(Coeff(Q::from_integer(BigInt::from(i)))),
            Raw::Str(s) => parse_q(&s).map(Coeff).map_err(serde::de::Error::custom),
        }
    }
}

pub fn parse_q(s: &str) -> Result<Q, TcdgaError> {
    let s = s.trim();
    let bad = || TcdgaError::BadCoeff(s.to_string());
    match s.split_once('/') {
        Some((a, b)) => {
            let n: BigInt = a.trim().parse().map_err(|_| bad())?;
            let d: BigInt = b.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub(crate) fn check_ring(ring: Ring, x: &Q) -> Result<(), TcdgaError> {
    if ring == Ring::Integers && !x.is_integer() {
        return Err(TcdgaError::NonIntegral(x.to_string()));
    }
    Ok(())
}

fn sign(odd: bool) -> Q {
    if odd {
        -Q::one()
    } else {
        Q::one()
    }
}

fn scaled(v: &SparseVec, c: &Q) -> SparseVec {
    let mut out = SparseVec::new();
    axpy(&mut out, c, v);
    out
}

fn single(i: usize) -> SparseVec {
    SparseVec::from([(i, Q::one())])
}

/// Apply a linear map given by its columns.
pub fn apply_columns(cols: &[SparseVec], v: &SparseVec) -> SparseVec {
    let mut out = SparseVec::new();
    for (i, x) in v {
        axpy(&mut out, x, &cols[*i]);
    }
    out
}

/// Graded module with a differential: the data of one arity.
#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub names: Vec<String>,
    pub degrees: Vec<i32>,
    /// image of each basis vector under d
    pub d: Vec<SparseVec>,
    /// `action[i]` holds the columns of the adjacent transposition swapping
    /// labels i and i+1 (0-indexed)
    pub action: Vec<Vec<SparseVec>>,
}

impl Component {
    pub fn dim(&self) -> usize {
        self.names.len()
    }

    fn trivial_action(dim: usize, arity: usize) -> Vec<Vec<SparseVec>> {
        (0..arity.saturating_sub(1)).map(|_| (0..dim).map(single).collect()).collect()
    }

    pub fn apply_d(&self, v: &SparseVec) -> SparseVec {
        apply_columns(&self.d, v)
    }

    pub fn to_coeff_module(&self) -> crate::posetcx::CoeffModule {
        crate::posetcx::CoeffModule {
            degrees: self.degrees.clone(),
            labels: self.names.clone(),
            d: self.d.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Twisted,
    Shuffle,
}

/// Products `A(n) ⊗ A(m) -> A(n+m)`: `table[a][b]` is the product of basis
/// vectors `a`, `b`.
pub type MultTable = Vec<Vec<SparseVec>>;

/// Identifies an ordered decomposition of `{0..n+m-1}`: bit `p` of `mask` is
/// set when position `p` belongs to the left factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultKey {
    pub n: usize,
    pub m: usize,
    pub mask: u32,
}

impl MultKey {
    pub fn concatenation(n: usize, m: usize) -> Self {
        MultKey {
            n,
            m,
            mask: (1u32 << n) - 1,
        }
    }
}

/// All masks with `n` bits set among `n + m`, increasing.
pub fn patterns(n: usize, m: usize) -> Vec<u32> {
    (0u32..(1u32 << (n + m))).filter(|x| x.count_ones() as usize == n).collect()
}

/// The permutation placing labels `0..n` on the set bits and `n..n+m` on the
/// clear bits of `mask`, each in increasing order.
pub fn pattern_perm(n: usize, m: usize, mask: u32) -> Perm {
    let (mut left, mut right) = (Vec::new(), Vec::new());
    for p in 0..n + m {
        if mask >> p & 1 == 1 {
            left.push(p);
        } else {
            right.push(p);
        }
    }
    left.extend(right);
    Perm::from_images(left).expect("pattern is a bijection")
}

type PermCache = RwLock<HashMap<Vec<usize>, Arc<Vec<SparseVec>>>>;

/// A finite tcdga truncated at `max_arity`, or a shuffle algebra when
/// `mode == Shuffle` (no action; one table per decomposition pattern).
pub struct FiniteTcdga {
    pub ring: Ring,
    pub max_arity: usize,
    pub mode: Mode,
    /// components[n-1] = A(n)
    pub components: Vec<Component>,
    /// twisted: concatenation keys only; shuffle: every pattern
    pub mult: BTreeMap<MultKey, MultTable>,
    perm_cache: Vec<PermCache>,
}

impl Clone for FiniteTcdga {
    fn clone(&self) -> Self {
        FiniteTcdga::from_parts(self.ring, self.mode, self.components.clone(), self.mult.clone())
    }
}

impl fmt::Debug for FiniteTcdga {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FiniteTcdga")
            .field("ring", &self.ring)
            .field("max_arity", &self.max_arity)
            .field("mode", &self.mode)
            .field("dims", &self.components.iter().map(Component::dim).collect::<Vec<_>>())
            .finish()
    }
}

impl FiniteTcdga {
    /// Missing tables are zero products.
    pub fn from_parts(ring: Ring, mode: Mode, components: Vec<Component>, mult: BTreeMap<MultKey, MultTable>) -> Self {
        let max_arity = components.len();
        FiniteTcdga {
            ring,
            max_arity,
            mode,
            perm_cache: (0..max_arity).map(|_| RwLock::new(HashMap::new())).collect(),
            components,
            mult,
        }
    }

    pub fn component(&self, n: usize) -> &Component {
        &self.components[n - 1]
    }

    pub fn degree(&self, n: usize, a: usize) -> i32 {
        self.components[n - 1].degrees[a]
    }

    /// Columns of the action of `g` on `A(g.len())`, composed from the
    /// generators and memoized.
    pub fn perm_action(&self, g: &Perm) -> Result<Arc<Vec<SparseVec>>, TcdgaError> {
        if self.mode != Mode::Twisted {
            return Err(TcdgaError::NeedsTwisted);
        }
        let n = g.len();
        if n == 0 || n > self.max_arity {
            return Err(TcdgaError::Arity(n, self.max_arity));
        }
        let cache = &self.perm_cache[n - 1];
        if let Some(m) = cache.read().expect("cache lock").get(g.images()) {
            return Ok(m.clone());
        }
        let comp = &self.components[n - 1];
        let mut cols: Vec<SparseVec> = (0..comp.dim()).map(single).collect();
        for &j in &g.adjacent_word() {
            cols = cols.iter().map(|c| apply_columns(&comp.action[j], c)).collect();
        }
        let cols = Arc::new(cols);
        cache.write().expect("cache lock").entry(g.images().to_vec()).or_insert_with(|| cols.clone());
        Ok(cols)
    }

    /// Product of basis vectors `a ∈ A(n)`, `b ∈ A(m)` along `mask`.
    pub fn product(&self, key: MultKey, a: usize, b: usize) -> Result<SparseVec, TcdgaError> {
        let (n, m) = (key.n, key.m);
        if n == 0 || m == 0 || n + m > self.max_arity {
            return Err(TcdgaError::Arity(n + m, self.max_arity));
        }
        match self.mode {
            Mode::Shuffle => Ok(self.mult.get(&key).map(|t| t[a][b].clone()).unwrap_or_default()),
            Mode::Twisted => {
                let base = match self.mult.get(&MultKey::concatenation(n, m)) {
                    Some(t) => t[a][b].clone(),
                    None => return Ok(SparseVec::new()),
                };
                if key.mask == MultKey::concatenation(n, m).mask || base.is_empty() {
                    return Ok(base);
                }
                let act = self.perm_action(&pattern_perm(n, m, key.mask))?;
                Ok(apply_columns(&act, &base))
            }
        }
    }

    /// Bilinear extension of `product`.
    pub fn product_vec(&self, key: MultKey, a: &SparseVec, b: &SparseVec) -> Result<SparseVec, TcdgaError> {
        let mut out = SparseVec::new();
        for (i, x) in a {
            for (j, y) in b {
                axpy(&mut out, &(x * y), &self.product(key, *i, *j)?);
            }
        }
        Ok(out)
    }

    /// Every product table is zero.
    pub fn has_zero_products(&self) -> bool {
        self.mult.values().all(|t| t.iter().all(|row| row.iter().all(SparseVec::is_empty)))
    }

    pub fn validate(&self) -> ValidationReport {
        validate(self)
    }
}

/// One violated identity with a witness.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub identity: String,
    pub witness: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    pub failures: Vec<Failure>,
}

const MAX_REPORTED: usize = 32;

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.failures.is_empty()
    }

    fn fail(&mut self, identity: &str, witness: String) {
        if self.failures.len() < MAX_REPORTED {
            self.failures.push(Failure {
                identity: identity.into(),
                witness,
            });
        }
    }

    fn full(&self) -> bool {
        self.failures.len() >= MAX_REPORTED
    }

    pub fn into_result(self) -> Result<(), TcdgaError> {
        match self.failures.first() {
            None => Ok(()),
            Some(f) => Err(TcdgaError::Invalid(format!("{} at {}", f.identity, f.witness))),
        }
    }
}

fn validate_component(n: usize, c: &Component, ring: Ring, mode: Mode, rep: &mut ValidationReport) {
    let dim = c.dim();
    let in_range = |v: &SparseVec| v.keys().all(|&i| i < dim);
    let integral = |v: &SparseVec| ring == Ring::Rationals || v.values().all(|x| x.is_integer());
    if c.degrees.len() != dim || c.d.len() != dim {
        rep.fail("shape", format!("arity {n}: basis, degrees and d disagree"));
        return;
    }
    for (i, v) in c.d.iter().enumerate() {
        if !in_range(v) || !integral(v) {
            rep.fail("shape", format!("arity {n}: d({})", c.names[i]));
            return;
        }
        if v.keys().any(|&j| c.degrees[j] != c.degrees[i] + 1) {
            rep.fail("d has degree 1", format!("arity {n}: d({})", c.names[i]));
        }
        if !c.apply_d(v).is_empty() {
            rep.fail("d² = 0", format!("arity {n}: {}", c.names[i]));
        }
    }
    if mode == Mode::Shuffle {
        return;
    }
    if c.action.len() != n.saturating_sub(1) || c.action.iter().any(|g| g.len() != dim || !g.iter().all(|v| in_range(v) && integral(v))) {
        rep.fail("shape", format!("arity {n}: action needs {} generators on {dim} basis vectors", n.saturating_sub(1)));
        return;
    }
    let act = |g: usize, v: &SparseVec| apply_columns(&c.action[g], v);
    for i in 0..dim {
        let e = single(i);
        for g in 0..c.action.len() {
            let img = act(g, &e);
            if img.keys().any(|&j| c.degrees[j] != c.degrees[i]) {
                rep.fail("action preserves degree", format!("arity {n}: s{} on {}", g + 1, c.names[i]));
            }
            if act(g, &img) != e {
                rep.fail("s_i² = 1", format!("arity {n}: s{} on {}", g + 1, c.names[i]));
            }
            if c.apply_d(&img) != act(g, &c.d[i]) {
                rep.fail("action commutes with d", format!("arity {n}: s{} on {}", g + 1, c.names[i]));
            }
            for h in g + 1..c.action.len() {
                let lhs;
                let rhs;
                if h == g + 1 {
                    lhs = act(g, &act(h, &img));
                    rhs = act(h, &act(g, &act(h, &e)));
                } else {
                    lhs = act(h, &img);
                    rhs = act(g, &act(h, &e));
                }
                if lhs != rhs {
                    rep.fail("braid relation", format!("arity {n}: s{} s{} on {}", g + 1, h + 1, c.names[i]));
                }
            }
        }
    }
}

fn describe(a: &FiniteTcdga, n: usize, i: usize) -> String {
    format!("{}∈A({n})", a.components[n - 1].names[i])
}

/// Check every axiom on all basis tuples.
pub fn validate(a: &FiniteTcdga) -> ValidationReport {
    let mut rep = ValidationReport::default();
    if a.max_arity > MAX_SUPPORTED_ARITY {
        rep.fail("shape", format!("arity {} exceeds {}", a.max_arity, MAX_SUPPORTED_ARITY));
        return rep;
    }
    for (k, c) in a.components.iter().enumerate() {
        validate_component(k + 1, c, a.ring, a.mode, &mut rep);
    }
    if !rep.is_ok() {
        return rep;
    }
    for (key, t) in &a.mult {
        let ok = key.n >= 1
            && key.m >= 1
            && key.n + key.m <= a.max_arity
            && key.mask.count_ones() as usize == key.n
            && key.mask >> (key.n + key.m) == 0
            && (a.mode == Mode::Shuffle || *key == MultKey::concatenation(key.n, key.m));
        if !ok {
            rep.fail("shape", format!("product key {key:?}"));
            continue;
        }
        let (dn, dm, dnm) = (a.component(key.n).dim(), a.component(key.m).dim(), a.component(key.n + key.m));
        if t.len() != dn || t.iter().any(|r| r.len() != dm) {
            rep.fail("shape", format!("product table {key:?}"));
            continue;
        }
        for (i, row) in t.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let want = a.degree(key.n, i) + a.degree(key.m, j);
                if v.keys().any(|&r| r >= dnm.dim() || dnm.degrees[r] != want) {
                    rep.fail("product has degree 0", format!("{key:?} on {},{}", describe(a, key.n, i), describe(a, key.m, j)));
                }
                if a.ring == Ring::Integers && v.values().any(|x| !x.is_integer()) {
                    rep.fail("shape", format!("non-integral product {key:?}"));
                }
            }
        }
    }
    if !rep.is_ok() {
        return rep;
    }
    let keys = |n: usize, m: usize| -> Vec<MultKey> {
        match a.mode {
            Mode::Twisted => vec![MultKey::concatenation(n, m)],
            Mode::Shuffle => patterns(n, m).into_iter().map(|mask| MultKey { n, m, mask }).collect(),
        }
    };
    let prod = |k: MultKey, x: &SparseVec, y: &SparseVec| a.product_vec(k, x, y).expect("checked arity");
    for n in 1..a.max_arity {
        for m in 1..=a.max_arity - n {
            let (cn, cm) = (a.component(n), a.component(m));
            for key in keys(n, m) {
                let swapped = MultKey {
                    n: m,
                    m: n,
                    mask: !key.mask & ((1u32 << (n + m)) - 1),
                };
                for i in 0..cn.dim() {
                    for j in 0..cm.dim() {
                        if rep.full() {
                            return rep;
                        }
                        let (ei, ej) = (single(i), single(j));
                        let ab = prod(key, &ei, &ej);
                        let (di, dj) = (cn.degrees[i], cm.degrees[j]);
                        let w = || format!("{key:?} on {}, {}", describe(a, n, i), describe(a, m, j));
                        // Leibniz
                        let lhs = a.component(n + m).apply_d(&ab);
                        let mut rhs = prod(key, &cn.d[i], &ej);
                        axpy(&mut rhs, &sign(di % 2 != 0), &prod(key, &ei, &cm.d[j]));
                        if lhs != rhs {
                            rep.fail("Leibniz", w());
                        }
                        // commutativity
                        let ba = prod(swapped, &ej, &ei);
                        // twisted mode: the swapped pattern applies the box permutation
                        let expected = scaled(&ab, &sign(di * dj % 2 != 0));
                        if ba != expected {
                            rep.fail("twisted commutativity", w());
                        }
                        // equivariance in each factor
                        if a.mode == Mode::Twisted {
                            let cnm = a.component(n + m);
                            for g in 0..n.saturating_sub(1) {
                                if prod(key, &cn.action[g][i], &ej) != apply_columns(&cnm.action[g], &ab) {
                                    rep.fail("equivariance (left factor)", format!("s{} with {}", g + 1, w()));
                                }
                            }
                            for g in 0..m.saturating_sub(1) {
                                if prod(key, &ei, &cm.action[g][j]) != apply_columns(&cnm.action[n + g], &ab) {
                                    rep.fail("equivariance (right factor)", format!("s{} with {}", g + 1, w()));
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    for n in 1..a.max_arity {
        for m in 1..a.max_arity - n {
            for p in 1..=a.max_arity - n - m {
                for (k1, k2, k3, k4) in associativity_keys(a.mode, n, m, p) {
                    for i in 0..a.component(n).dim() {
                        for j in 0..a.component(m).dim() {
                            let ab = prod(k1, &single(i), &single(j));
                            for l in 0..a.component(p).dim() {
                                if rep.full() {
                                    return rep;
                                }
                                let lhs = prod(k2, &ab, &single(l));
                                let rhs = prod(k4, &single(i), &prod(k3, &single(j), &single(l)));
                                if lhs != rhs {
                                    rep.fail(
                                        "associativity",
                                        format!(
                                            "{}, {}, {} ({:b}|{:b})",
                                            describe(a, n, i),
                                            describe(a, m, j),
                                            describe(a, p, l),
                                            k1.mask,
                                            k2.mask
                                        ),
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    rep
}

/// `β(i) = m + i` for `i < n`, `β(n + j) = j`: moves the left factor's labels
/// after the right factor's.
pub fn box_permutation(n: usize, m: usize) -> Perm {
    let images = (0..n).map(|i| m + i).chain(0..m).collect();
    Perm::from_images(images).expect("bijection")
}

/// Keys for `(ab)c` and `a(bc)` over every ordered three-part decomposition
/// (only the concatenation in twisted mode).
fn associativity_keys(mode: Mode, n: usize, m: usize, p: usize) -> Vec<(MultKey, MultKey, MultKey, MultKey)> {
    let total = n + m + p;
    let mut words: Vec<Vec<u8>> = Vec::new();
    match mode {
        Mode::Twisted => {
            let mut w = vec![0u8; n];
            w.extend(vec![1u8; m]);
            w.extend(vec![2u8; p]);
            words.push(w);
        }
        Mode::Shuffle => {
            for left in patterns(n, m + p) {
                for mid in patterns(m, p) {
                    let mut w = Vec::with_capacity(total);
                    let mut rest = (0..m + p).map(|q| if mid >> q & 1 == 1 { 1u8 } else { 2u8 });
                    for pos in 0..total {
                        w.push(if left >> pos & 1 == 1 { 0 } else { rest.next().expect("count") });
                    }
                    words.push(w);
                }
            }
        }
    }
    let mask_of = |w: &[u8], pred: &dyn Fn(u8) -> bool| -> u32 {
        w.iter().enumerate().filter(|(_, &x)| pred(x)).fold(0u32, |acc, (i, _)| acc | 1 << i)
    };
    words
        .into_iter()
        .map(|w| {
            let ab: Vec<u8> = w.iter().copied().filter(|&x| x < 2).collect();
            let bc: Vec<u8> = w.iter().copied().filter(|&x| x > 0).collect();
            (
                MultKey { n, m, mask: mask_of(&ab, &|x| x == 0) },
                MultKey { n: n + m, m: p, mask: mask_of(&w, &|x| x < 2) },
                MultKey { n: m, m: p, mask: mask_of(&bc, &|x| x == 1) },
                MultKey { n, m: m + p, mask: mask_of(&w, &|x| x == 0) },
            )
        })
        .collect()
}

/// A finite (possibly non-unital) commutative dg algebra.
#[derive(Clone, Debug, PartialEq)]
pub struct FiniteCdga {
    pub ring: Ring,
    pub names: Vec<String>,
    pub degrees: Vec<i32>,
    pub d: Vec<SparseVec>,
    pub mult: MultTable,
}

impl FiniteCdga {
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

    pub fn validate(&self) -> ValidationReport {
        let mut rep = ValidationReport::default();
        let dim = self.dim();
        let comp = Component {
            names: self.names.clone(),
            degrees: self.degrees.clone(),
            d: self.d.clone(),
            action: Vec::new(),
        };
        validate_component(1, &comp, self.ring, Mode::Shuffle, &mut rep);
        if self.mult.len() != dim || self.mult.iter().any(|r| r.len() != dim) {
            rep.fail("shape", "multiplication table".into());
        }
        if !rep.is_ok() {
            return rep;
        }
        for i in 0..dim {
            for j in 0..dim {
                let (ei, ej) = (single(i), single(j));
                let ab = self.product(&ei, &ej);
                let w = || format!("{}, {}", self.names[i], self.names[j]);
                if ab.keys().any(|&k| k >= dim || self.degrees[k] != self.degrees[i] + self.degrees[j]) {
                    rep.fail("product has degree 0", w());
                    continue;
                }
                let mut rhs = self.product(&self.d[i], &ej);
                axpy(&mut rhs, &sign(self.degrees[i] % 2 != 0), &self.product(&ei, &self.d[j]));
                if comp.apply_d(&ab) != rhs {
                    rep.fail("Leibniz", w());
                }
                if self.product(&ej, &ei) != scaled(&ab, &sign(self.degrees[i] * self.degrees[j] % 2 != 0)) {
                    rep.fail("graded commutativity", w());
                }
                for l in 0..dim {
                    if self.product(&ab, &single(l)) != self.product(&ei, &self.product(&ej, &single(l))) {
                        rep.fail("associativity", format!("{}, {}", w(), self.names[l]));
                    }
                }
            }
        }
        rep
    }

    /// `span{1, c, w}` with `c` in degree 0, `w` in degree 1, `dc = w`, unit
    /// `1`, and all products of `c`, `w` zero.
    pub fn three_dim_example() -> Self {
        let z = SparseVec::new;
        let one = |i: usize| single(i);
        FiniteCdga {
            ring: Ring::Rationals,
            names: vec!["1".into(), "c".into(), "w".into()],
            degrees: vec![0, 0, 1],
            d: vec![z(), one(2), z()],
            mult: vec![vec![one(0), one(1), one(2)], vec![one(1), z(), z()], vec![one(2), z(), z()]],
        }
    }

    /// One basis vector `e` in degree 0 with `e·e = e`: cochains of a point.
    pub fn point() -> Self {
        FiniteCdga {
            ring: Ring::Rationals,
            names: vec!["e".into()],
            degrees: vec![0],
            d: vec![SparseVec::new()],
            mult: vec![vec![single(0)]],
        }
    }
}

pub fn constant_tcdga(omega: &FiniteCdga, max_arity: usize) -> Result<FiniteTcdga, TcdgaError> {
    omega.validate().into_result()?;
    if max_arity == 0 || max_arity > MAX_SUPPORTED_ARITY {
        return Err(TcdgaError::Arity(max_arity, MAX_SUPPORTED_ARITY));
    }
    let comps = (1..=max_arity)
        .map(|n| Component {
            names: omega.names.clone(),
            degrees: omega.degrees.clone(),
            d: omega.d.clone(),
            action: Component::trivial_action(omega.dim(), n),
        })
        .collect();
    let mut mult = BTreeMap::new();
    for n in 1..max_arity {
        for m in 1..=max_arity - n {
            mult.insert(MultKey::concatenation(n, m), omega.mult.clone());
        }
    }
    Ok(FiniteTcdga::from_parts(omega.ring, Mode::Twisted, comps, mult))
}

/// Graded free module given by ranks per degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradedModuleInput {
    pub ring: Ring,
    pub ranks: BTreeMap<i32, usize>,
}

impl GradedModuleInput {
    pub fn new(ring: Ring, ranks: impl IntoIterator<Item = (i32, usize)>) -> Self {
        GradedModuleInput {
            ring,
            ranks: ranks.into_iter().filter(|(_, r)| *r > 0).collect(),
        }
    }

    pub fn total_rank(&self) -> usize {
        self.ranks.values().sum()
    }

    /// Basis degrees in order: increasing degree.
    pub fn basis_degrees(&self) -> Vec<i32> {
        self.ranks.iter().flat_map(|(&d, &r)| std::iter::repeat_n(d, r)).collect()
    }

    /// Basis names `x{degree}_{i}` (`x{degree}` when the rank is one).
    pub fn basis_names(&self) -> Vec<String> {
        self.ranks
            .iter()
            .flat_map(|(&d, &r)| (0..r).map(move |i| if r == 1 { format!("x{d}") } else { format!("x{d}_{i}") }))
            .collect()
    }
}

/// Zero differential, zero products, trivial action.
pub fn formal_tcdga(h: &GradedModuleInput, max_arity: usize) -> Result<FiniteTcdga, TcdgaError> {
    if max_arity == 0 || max_arity > MAX_SUPPORTED_ARITY {
        return Err(TcdgaError::Arity(max_arity, MAX_SUPPORTED_ARITY));
    }
    let degrees = h.basis_degrees();
    let names = h.basis_names();
    let comps = (1..=max_arity)
        .map(|n| Component {
            names: names.clone(),
            degrees: degrees.clone(),
            d: vec![SparseVec::new(); degrees.len()],
            action: Component::trivial_action(degrees.len(), n),
        })
        .collect();
    Ok(FiniteTcdga::from_parts(h.ring, Mode::Twisted, comps, BTreeMap::new()))
}

/// `SA(n) = A(n)` raised by `n` degrees, action twisted by the sign
/// character, `d ↦ (-1)^n d`, and `μ(a,b) ↦ (-1)^{m|a|} μ(a,b)` for
/// `b ∈ A(m)`.
pub fn suspension(a: &FiniteTcdga) -> Result<FiniteTcdga, TcdgaError> {
    if a.mode != Mode::Twisted {
        return Err(TcdgaError::NeedsTwisted);
    }
    a.validate().into_result()?;
    let comps: Vec<Component> = a
        .components
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let n = k + 1;
            let dsign = sign(n % 2 == 1);
            Component {
                names: c.names.clone(),
                degrees: c.degrees.iter().map(|d| d + n as i32).collect(),
                d: c.d.iter().map(|v| scaled(v, &dsign)).collect(),
                action: c.action.iter().map(|g| g.iter().map(|v| scaled(v, &-Q::one())).collect()).collect(),
            }
        })
        .collect();
    let mult = a
        .mult
        .iter()
        .map(|(key, t)| {
            let t2 = t
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let s = sign(key.m as i32 * a.degree(key.n, i) % 2 != 0);
                    row.iter().map(|v| scaled(v, &s)).collect()
                })
                .collect();
            (*key, t2)
        })
        .collect();
    let out = FiniteTcdga::from_parts(a.ring, Mode::Twisted, comps, mult);
    out.validate().into_result()?;
    Ok(out)
}

/// Forget the action: one product table per decomposition pattern.
pub fn shuffle_forget(a: &FiniteTcdga) -> Result<FiniteTcdga, TcdgaError> {
    if a.mode == Mode::Shuffle {
        return Ok(a.clone());
    }
    let comps: Vec<Component> = a
        .components
        .iter()
        .map(|c| Component {
            action: Vec::new(),
            ..c.clone()
        })
        .collect();
    let mut mult = BTreeMap::new();
    for key in a.mult.keys() {
        for mask in patterns(key.n, key.m) {
            let k = MultKey { n: key.n, m: key.m, mask };
            let table = (0..a.component(key.n).dim())
                .map(|i| (0..a.component(key.m).dim()).map(|j| a.product(k, i, j)).collect::<Result<Vec<_>, _>>())
                .collect::<Result<Vec<_>, _>>()?;
            mult.insert(k, table);
        }
    }
    Ok(FiniteTcdga::from_parts(a.ring, Mode::Shuffle, comps, mult))
}

// ---- JSON ----

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BasisJson {
    pub name: String,
    pub degree: i32,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ComponentJson {
    pub arity: usize,
    pub basis: Vec<BasisJson>,
    /// `[source, target, coeff]`: `d(source)` has `coeff` on `target`
    #[serde(default)]
    pub d: Vec<(String, String, Coeff)>,
    /// `"s1"` swaps labels 1 and 2; dense matrix, `rows[r][c]` is the
    /// coefficient of basis `r` in the image of basis `c`. Missing
    /// generators act trivially.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub action: BTreeMap<String, Vec<Vec<Coeff>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MultJson {
    pub n: usize,
    pub m: usize,
    /// shuffle mode only: 0/1 string, `1` at positions of the left factor
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pattern: Option<String>,
    pub table: Vec<(String, String, Vec<(String, Coeff)>)>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TcdgaJson {
    pub ring: Ring,
    pub max_arity: usize,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    pub components: Vec<ComponentJson>,
    #[serde(default)]
    pub mult: Vec<MultJson>,
}

fn default_mode() -> Mode {
    Mode::Twisted
}

pub(crate) fn index_of(names: &[String]) -> Result<HashMap<&str, usize>, TcdgaError> {
    let mut idx = HashMap::new();
    for (i, n) in names.iter().enumerate() {
        if idx.insert(n.as_str(), i).is_some() {
            return Err(TcdgaError::DuplicateBasis(n.clone()));
        }
    }
    Ok(idx)
}

pub(crate) fn lookup(idx: &HashMap<&str, usize>, name: &str) -> Result<usize, TcdgaError> {
    idx.get(name).copied().ok_or_else(|| TcdgaError::UnknownBasis(name.to_string()))
}

pub(crate) fn parse_d(ring: Ring, names: &[String], entries: &[(String, String, Coeff)]) -> Result<Vec<SparseVec>, TcdgaError> {
    let idx = index_of(names)?;
    let mut d = vec![SparseVec::new(); names.len()];
    for (s, t, c) in entries {
        check_ring(ring, &c.0)?;
        add_entry(&mut d[lookup(&idx, s)?], lookup(&idx, t)?, c.0.clone());
    }
    Ok(d)
}

pub(crate) fn d_to_json(names: &[String], d: &[SparseVec]) -> Vec<(String, String, Coeff)> {
    d.iter()
        .enumerate()
        .flat_map(|(s, v)| v.iter().map(move |(t, x)| (names[s].clone(), names[*t].clone(), Coeff(x.clone()))))
        .collect()
}

fn mask_to_string(n: usize, m: usize, mask: u32) -> String {
    (0..n + m).map(|p| if mask >> p & 1 == 1 { '1' } else { '0' }).collect()
}

fn mask_from_string(s: &str) -> Result<u32, TcdgaError> {
    s.chars().enumerate().try_fold(0u32, |acc, (p, ch)| match ch {
        '1' => Ok(acc | 1 << p),
        '0' => Ok(acc),
        _ => Err(TcdgaError::Malformed(format!("pattern {s:?}"))),
    })
}

impl TryFrom<&TcdgaJson> for FiniteTcdga {
    type Error = TcdgaError;

    fn try_from(j: &TcdgaJson) -> Result<Self, TcdgaError> {
        if j.max_arity == 0 || j.max_arity > MAX_SUPPORTED_ARITY {
            return Err(TcdgaError::Arity(j.max_arity, MAX_SUPPORTED_ARITY));
        }
        let mut comps: Vec<Option<Component>> = vec![None; j.max_arity];
        for cj in &j.components {
            if cj.arity == 0 || cj.arity > j.max_arity {
                return Err(TcdgaError::Arity(cj.arity, j.max_arity));
            }
            let names: Vec<String> = cj.basis.iter().map(|b| b.name.clone()).collect();
            let dim = names.len();
            let d = parse_d(j.ring, &names, &cj.d)?;
            let mut action = Component::trivial_action(dim, cj.arity);
            for (g, rows) in &cj.action {
                let k: usize = g
                    .strip_prefix('s')
                    .and_then(|x| x.parse().ok())
                    .filter(|&k| k >= 1 && k < cj.arity)
                    .ok_or_else(|| TcdgaError::Malformed(format!("generator {g:?} in arity {}", cj.arity)))?;
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(TcdgaError::Malformed(format!("action {g} must be {dim}x{dim}")));
                }
                let mut cols = vec![SparseVec::new(); dim];
                for (r, row) in rows.iter().enumerate() {
                    for (c, x) in row.iter().enumerate() {
                        check_ring(j.ring, &x.0)?;
                        add_entry(&mut cols[c], r, x.0.clone());
                    }
                }
                action[k - 1] = cols;
            }
            if j.mode == Mode::Shuffle {
                action.clear();
            }
            if comps[cj.arity - 1].is_some() {
                return Err(TcdgaError::Malformed(format!("arity {} given twice", cj.arity)));
            }
            comps[cj.arity - 1] = Some(Component {
                names,
                degrees: cj.basis.iter().map(|b| b.degree).collect(),
                d,
                action,
            });
        }
        let comps: Vec<Component> = comps
            .into_iter()
            .enumerate()
            .map(|(k, c)| c.ok_or_else(|| TcdgaError::Malformed(format!("missing arity {}", k + 1))))
            .collect::<Result<_, _>>()?;
        let mut mult = BTreeMap::new();
        for mj in &j.mult {
            if mj.n == 0 || mj.m == 0 || mj.n + mj.m > j.max_arity {
                return Err(TcdgaError::Arity(mj.n + mj.m, j.max_arity));
            }
            let key = match (&mj.pattern, j.mode) {
                (None, _) => MultKey::concatenation(mj.n, mj.m),
                (Some(p), Mode::Shuffle) if p.len() == mj.n + mj.m => MultKey {
                    n: mj.n,
                    m: mj.m,
                    mask: mask_from_string(p)?,
                },
                (Some(p), _) => return Err(TcdgaError::Malformed(format!("pattern {p:?} for n={}, m={}", mj.n, mj.m))),
            };
            let (ia, ib, ic) = (
                index_of(&comps[mj.n - 1].names)?,
                index_of(&comps[mj.m - 1].names)?,
                index_of(&comps[mj.n + mj.m - 1].names)?,
            );
            let table: &mut MultTable = mult
                .entry(key)
                .or_insert_with(|| vec![vec![SparseVec::new(); comps[mj.m - 1].dim()]; comps[mj.n - 1].dim()]);
            for (a, b, terms) in &mj.table {
                let (x, y) = (lookup(&ia, a)?, lookup(&ib, b)?);
                for (c, coeff) in terms {
                    check_ring(j.ring, &coeff.0)?;
                    add_entry(&mut table[x][y], lookup(&ic, c)?, coeff.0.clone());
                }
            }
        }
        Ok(FiniteTcdga::from_parts(j.ring, j.mode, comps, mult))
    }
}

impl From<&FiniteTcdga> for TcdgaJson {
    fn from(a: &FiniteTcdga) -> Self {
        let components = a
            .components
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let dim = c.dim();
                let mut action = BTreeMap::new();
                for (g, cols) in c.action.iter().enumerate() {
                    if cols.iter().enumerate().all(|(i, v)| *v == single(i)) {
                        continue;
                    }
                    let rows = (0..dim)
                        .map(|r| (0..dim).map(|col| Coeff(cols[col].get(&r).cloned().unwrap_or_else(Q::zero))).collect())
                        .collect();
                    action.insert(format!("s{}", g + 1), rows);
                }
                ComponentJson {
                    arity: k + 1,
                    basis: c
                        .names
                        .iter()
                        .zip(&c.degrees)
                        .map(|(n, d)| BasisJson {
                            name: n.clone(),
                            degree: *d,
                        })
                        .collect(),
                    d: d_to_json(&c.names, &c.d),
                    action,
                }
            })
            .collect();
        let mult = a
            .mult
            .iter()
            .map(|(key, t)| {
                let (ca, cb, cc) = (a.component(key.n), a.component(key.m), a.component(key.n + key.m));
                let table = t
                    .iter()
                    .enumerate()
                    .flat_map(|(i, row)| {
                        row.iter().enumerate().filter(|(_, v)| !v.is_empty()).map(move |(j, v)| {
                            (
                                ca.names[i].clone(),
                                cb.names[j].clone(),
                                v.iter().map(|(r, x)| (cc.names[*r].clone(), Coeff(x.clone()))).collect(),
                            )
                        })
                    })
                    .collect();
                MultJson {
                    n: key.n,
                    m: key.m,
                    pattern: (a.mode == Mode::Shuffle).then(|| mask_to_string(key.n, key.m, key.mask)),
                    table,
                }
            })
            .collect();
        TcdgaJson {
            ring: a.ring,
            max_arity: a.max_arity,
            mode: a.mode,
            components,
            mult,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CdgaJson {
    pub ring: Ring,
    pub basis: Vec<BasisJson>,
    #[serde(default)]
    pub d: Vec<(String, String, Coeff)>,
    /// `[a, b, [[c, coeff], ...]]`; both orders must be listed
    #[serde(default)]
    pub mult: Vec<(String, String, Vec<(String, Coeff)>)>,
}

impl TryFrom<&CdgaJson> for FiniteCdga {
    type Error = TcdgaError;

    fn try_from(j: &CdgaJson) -> Result<Self, TcdgaError> {
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
        Ok(FiniteCdga {
            ring: j.ring,
            degrees: j.basis.iter().map(|b| b.degree).collect(),
            names,
            d,
            mult,
        })
    }
}

impl From<&FiniteCdga> for CdgaJson {
    fn from(a: &FiniteCdga) -> Self {
        CdgaJson {
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
            mult: a
                .mult
                .iter()
                .enumerate()
                .flat_map(|(i, row)| {
                    row.iter().enumerate().filter(|(_, v)| !v.is_empty()).map(move |(j, v)| {
                        (
                            a.names[i].clone(),
                            a.names[j].clone(),
                            v.iter().map(|(r, x)| (a.names[*r].clone(), Coeff(x.clone()))).collect(),
                        )
                    })
                })
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactalg::q;

    fn rational_deg(d: i32) -> GradedModuleInput {
        GradedModuleInput::new(Ring::Rationals, [(d, 1)])
    }

    #[test]
    fn constructors_validate() {
        assert!(formal_tcdga(&rational_deg(2), 4).unwrap().validate().is_ok());
        let two = GradedModuleInput::new(Ring::Integers, [(1, 1), (2, 1)]);
        assert!(formal_tcdga(&two, 4).unwrap().validate().is_ok());
        assert!(formal_tcdga(&GradedModuleInput::new(Ring::Rationals, []), 3).unwrap().validate().is_ok());
        let three = constant_tcdga(&FiniteCdga::three_dim_example(), 4).unwrap();
        assert!(three.validate().is_ok());
        let pt = constant_tcdga(&FiniteCdga::point(), 4).unwrap();
        assert_eq!(pt.product(MultKey::concatenation(1, 2), 0, 0).unwrap(), single(0));
        let odd = FiniteCdga {
            ring: Ring::Rationals,
            names: vec!["y".into()],
            degrees: vec![1],
            d: vec![SparseVec::new()],
            mult: vec![vec![SparseVec::new()]],
        };
        let a = constant_tcdga(&odd, 3).unwrap();
        assert!(a.validate().is_ok());
        assert_eq!(*a.perm_action(&Perm::transposition(2, 0, 1)).unwrap(), vec![single(0)]);
    }

    #[test]
    fn corrupted_sign_breaks_commutativity() {
        // two odd generators x, y in arity 1 with x·y = z = -y·x in arity 2;
        // flipping one sign must be caught
        let mk = |yx: i64| {
            let comps = vec![
                Component {
                    names: vec!["x".into(), "y".into()],
                    degrees: vec![1, 1],
                    d: vec![SparseVec::new(); 2],
                    action: vec![],
                },
                Component {
                    names: vec!["z".into(), "z'".into()],
                    degrees: vec![2, 2],
                    d: vec![SparseVec::new(); 2],
                    action: vec![vec![SparseVec::from([(1, q(-1))]), SparseVec::from([(0, q(-1))])]],
                },
            ];
            // s1 maps z to -z', so y·x = -s1(x·y) = z'
            let table = vec![
                vec![SparseVec::new(), SparseVec::from([(0, q(1))])],
                vec![SparseVec::from([(1, q(yx))]), SparseVec::new()],
            ];
            FiniteTcdga::from_parts(Ring::Rationals, Mode::Twisted, comps, BTreeMap::from([(MultKey::concatenation(1, 1), table)]))
        };
        assert!(mk(1).validate().is_ok(), "{:?}", mk(1).validate());
        let bad = mk(-1).validate();
        assert!(!bad.is_ok());
        assert_eq!(bad.failures[0].identity, "twisted commutativity");
        assert!(bad.failures[0].witness.contains('y') || bad.failures[0].witness.contains('x'));
    }

    #[test]
    fn suspension_shifts_and_twists() {
        let s = suspension(&formal_tcdga(&rational_deg(2), 3).unwrap()).unwrap();
        assert_eq!(s.component(2).degrees, vec![4]);
        assert_eq!(*s.perm_action(&Perm::transposition(2, 0, 1)).unwrap(), vec![SparseVec::from([(0, q(-1))])]);
        let pt = suspension(&constant_tcdga(&FiniteCdga::point(), 4).unwrap()).unwrap();
        for n in 1..=4 {
            assert_eq!(pt.component(n).degrees, vec![n as i32]);
            for g in Perm::all(n) {
                assert_eq!(*pt.perm_action(&g).unwrap(), vec![SparseVec::from([(0, q(g.sign()))])]);
            }
        }
        assert!(suspension(&constant_tcdga(&FiniteCdga::three_dim_example(), 4).unwrap()).is_ok());
    }

    #[test]
    fn double_suspension_has_trivial_twist() {
        let a = constant_tcdga(&FiniteCdga::three_dim_example(), 4).unwrap();
        let ss = suspension(&suspension(&a).unwrap()).unwrap();
        for n in 1..=4 {
            let (c, c2) = (a.component(n), ss.component(n));
            assert_eq!(c2.degrees, c.degrees.iter().map(|d| d + 2 * n as i32).collect::<Vec<_>>());
            assert_eq!(c2.action, c.action);
        }
    }

    #[test]
    fn shuffle_forget_validates() {
        let a = constant_tcdga(&FiniteCdga::three_dim_example(), 4).unwrap();
        let s = shuffle_forget(&a).unwrap();
        assert_eq!(s.mode, Mode::Shuffle);
        assert!(s.validate().is_ok(), "{:?}", s.validate());
        let f = shuffle_forget(&formal_tcdga(&rational_deg(2), 3).unwrap()).unwrap();
        assert!(f.has_zero_products() && f.validate().is_ok());
    }

    #[test]
    fn json_round_trip() {
        let a = suspension(&constant_tcdga(&FiniteCdga::three_dim_example(), 3).unwrap()).unwrap();
        let j = serde_json::to_string(&TcdgaJson::from(&a)).unwrap();
        let back = FiniteTcdga::try_from(&serde_json::from_str::<TcdgaJson>(&j).unwrap()).unwrap();
        assert_eq!(back.components, a.components);
        assert_eq!(back.mult, a.mult);
        let s = shuffle_forget(&a).unwrap();
        let j = serde_json::to_string(&TcdgaJson::from(&s)).unwrap();
        let back = FiniteTcdga::try_from(&serde_json::from_str::<TcdgaJson>(&j).unwrap()).unwrap();
        assert_eq!(back.mult, s.mult);
        let c = FiniteCdga::three_dim_example();
        let j = serde_json::to_string(&CdgaJson::from(&c)).unwrap();
        assert_eq!(FiniteCdga::try_from(&serde_json::from_str::<CdgaJson>(&j).unwrap()).unwrap(), c);
        assert_eq!(parse_q(" -3/6 ").unwrap(), crate::exactalg::qfrac(-1, 2));
        assert!(parse_q("1/0").is_err());
    }

    #[test]
    fn invalid_cdga_rejected() {
        let mut c = FiniteCdga::three_dim_example();
        c.mult[1][1] = single(1); // c² = c breaks Leibniz: d(c²)=w but 2cw = 0
        assert!(constant_tcdga(&c, 2).is_err());
    }
}
