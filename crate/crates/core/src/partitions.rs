//! Set partitions of {1..n} in restricted-growth encoding, the partition
//! lattice, upward-closed subsets and their join closures.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::perm::Perm;

/// Bell(9) = 21147 partitions; beyond this enumeration is refused unless the
/// caller raises the bound.
pub const DEFAULT_MAX_N: usize = 9;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PartitionError {
    #[error("ground sets differ: {0} vs {1}")]
    SizeMismatch(usize, usize),
    #[error("not a restricted-growth string: {0:?}")]
    InvalidRgs(Vec<u8>),
    #[error("blocks do not partition 1..{n}: {detail}")]
    InvalidBlocks { n: usize, detail: String },
    #[error("n = {n} exceeds the configured bound {max}")]
    TooLarge { n: usize, max: usize },
    #[error("k = {k} out of range for n = {n}")]
    KOutOfRange { n: usize, k: usize },
    #[error("element {0} is not in the given set")]
    NotInSet(String),
    #[error("permutation acts on {0} points, partition has {1}")]
    BadPermutation(usize, usize),
    #[error("unknown named upset {0:?}")]
    UnknownName(String),
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SetPartition {
    rgs: Vec<u8>,
}

impl SetPartition {
    pub fn from_rgs(rgs: Vec<u8>) -> Result<Self, PartitionError> {
        let mut max: i32 = -1;
        for &b in &rgs {
            if b as i32 > max + 1 {
                return Err(PartitionError::InvalidRgs(rgs));
            }
            max = max.max(b as i32);
        }
        Ok(SetPartition { rgs })
    }

    /// Canonicalize arbitrary block labels.
    fn from_labels<T: Eq + std::hash::Hash + Copy>(labels: &[T]) -> Self {
        let mut ids: HashMap<T, u8> = HashMap::new();
        let rgs = labels
            .iter()
            .map(|l| {
                let next = ids.len() as u8;
                *ids.entry(*l).or_insert(next)
            })
            .collect();
        SetPartition { rgs }
    }

    /// Blocks with 1-indexed elements.
    pub fn from_blocks(n: usize, blocks: &[Vec<usize>]) -> Result<Self, PartitionError> {
        let mut label = vec![usize::MAX; n];
        for (b, block) in blocks.iter().enumerate() {
            if block.is_empty() {
                return Err(PartitionError::InvalidBlocks { n, detail: "empty block".into() });
            }
            for &x in block {
                if x == 0 || x > n {
                    return Err(PartitionError::InvalidBlocks { n, detail: format!("element {x}") });
                }
                if label[x - 1] != usize::MAX {
                    return Err(PartitionError::InvalidBlocks { n, detail: format!("{x} repeated") });
                }
                label[x - 1] = b;
            }
        }
        if let Some(i) = label.iter().position(|&l| l == usize::MAX) {
            return Err(PartitionError::InvalidBlocks { n, detail: format!("{} missing", i + 1) });
        }
        Ok(Self::from_labels(&label))
    }

    /// All singletons.
    pub fn bottom(n: usize) -> Self {
        SetPartition { rgs: (0..n as u8).collect() }
    }

    /// One block.
    pub fn top(n: usize) -> Self {
        SetPartition { rgs: vec![0; n] }
    }

    pub fn n(&self) -> usize {
        self.rgs.len()
    }

    pub fn rgs(&self) -> &[u8] {
        &self.rgs
    }

    pub fn num_blocks(&self) -> usize {
        self.rgs.iter().map(|&b| b as usize + 1).max().unwrap_or(0)
    }

    /// Block index of the 0-indexed element `i`; blocks are numbered by minimum.
    pub fn block_of(&self, i: usize) -> usize {
        self.rgs[i] as usize
    }

    /// 0-indexed blocks ordered by minimum, each increasing.
    pub fn blocks0(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.num_blocks()];
        for (i, &b) in self.rgs.iter().enumerate() {
            out[b as usize].push(i);
        }
        out
    }

    /// 1-indexed blocks ordered by minimum.
    pub fn blocks(&self) -> Vec<Vec<usize>> {
        self.blocks0().into_iter().map(|b| b.into_iter().map(|i| i + 1).collect()).collect()
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks0().iter().map(Vec::len).collect()
    }

    pub fn is_bottom(&self) -> bool {
        self.num_blocks() == self.n()
    }

    pub fn is_top(&self) -> bool {
        self.num_blocks() <= 1
    }

    fn same_n(&self, other: &Self) -> Result<(), PartitionError> {
        if self.n() == other.n() {
            Ok(())
        } else {
            Err(PartitionError::SizeMismatch(self.n(), other.n()))
        }
    }

    /// Finest common coarsening.
    pub fn join(&self, other: &Self) -> Result<Self, PartitionError> {
        self.same_n(other)?;
        let n = self.n();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for part in [self, other] {
            let mut first: Vec<Option<usize>> = vec![None; n];
            for i in 0..n {
                let b = part.rgs[i] as usize;
                match first[b] {
                    None => first[b] = Some(i),
                    Some(f) => {
                        let (a, c) = (find(&mut parent, f), find(&mut parent, i));
                        if a != c {
                            parent[a.max(c)] = a.min(c);
                        }
                    }
                }
            }
        }
        let roots: Vec<usize> = (0..n).map(|i| find(&mut parent, i)).collect();
        Ok(Self::from_labels(&roots))
    }

    /// Common refinement.
    pub fn meet(&self, other: &Self) -> Result<Self, PartitionError> {
        self.same_n(other)?;
        let pairs: Vec<(u8, u8)> = self.rgs.iter().copied().zip(other.rgs.iter().copied()).collect();
        Ok(Self::from_labels(&pairs))
    }

    /// Refinement order: every block of `self` lies in a block of `other`.
    pub fn leq(&self, other: &Self) -> Result<bool, PartitionError> {
        self.same_n(other)?;
        Ok(self.refines(other))
    }

    /// `leq` without the size check; callers guarantee equal n.
    pub fn refines(&self, other: &Self) -> bool {
        let mut image: [u8; 256] = [u8::MAX; 256];
        for (&a, &b) in self.rgs.iter().zip(&other.rgs) {
            let slot = &mut image[a as usize];
            if *slot == u8::MAX {
                *slot = b;
            } else if *slot != b {
                return false;
            }
        }
        true
    }

    /// Relabel points by `g` and recanonicalize: `i ~ j` iff `g⁻¹i ~ g⁻¹j` here.
    pub fn act(&self, g: &Perm) -> Result<Self, PartitionError> {
        if g.len() != self.n() {
            return Err(PartitionError::BadPermutation(g.len(), self.n()));
        }
        let mut labels = vec![0u8; self.n()];
        for i in 0..self.n() {
            labels[g.apply(i)] = self.rgs[i];
        }
        Ok(Self::from_labels(&labels))
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = if self.n() >= 10 { "," } else { "" };
        let parts: Vec<String> = self
            .blocks()
            .iter()
            .map(|b| b.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(sep))
            .collect();
        write!(f, "{{{}}}", parts.join("|"))
    }
}

impl fmt::Debug for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for SetPartition {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.blocks().serialize(s)
    }
}

impl<'de> Deserialize<'de> for SetPartition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let blocks: Vec<Vec<usize>> = Vec::deserialize(d)?;
        let n = blocks.iter().map(Vec::len).sum();
        SetPartition::from_blocks(n, &blocks).map_err(serde::de::Error::custom)
    }
}

pub fn check_bound(n: usize, max_n: usize) -> Result<(), PartitionError> {
    if n > max_n {
        Err(PartitionError::TooLarge { n, max: max_n })
    } else {
        Ok(())
    }
}

/// All of Πₙ in lexicographic rgs order.
pub fn enumerate(n: usize, max_n: usize) -> Result<Vec<SetPartition>, PartitionError> {
    check_bound(n, max_n)?;
    let mut out = Vec::new();
    if n == 0 {
        out.push(SetPartition { rgs: Vec::new() });
        return Ok(out);
    }
    fn rec(n: usize, rgs: &mut Vec<u8>, max: u8, out: &mut Vec<SetPartition>) {
        if rgs.len() == n {
            out.push(SetPartition { rgs: rgs.clone() });
            return;
        }
        for b in 0..=max + 1 {
            rgs.push(b);
            rec(n, rgs, max.max(b), out);
            rgs.pop();
        }
    }
    let mut rgs = vec![0u8];
    rec(n, &mut rgs, 0, &mut out);
    Ok(out)
}

/// Partitions with exactly one pair merged.
pub fn atoms(n: usize) -> Vec<SetPartition> {
    let mut out = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            let mut blocks: Vec<Vec<usize>> = (1..=n).filter(|&x| x != j).map(|x| vec![x]).collect();
            blocks.iter_mut().find(|b| b[0] == i).expect("i present").push(j);
            out.push(SetPartition::from_blocks(n, &blocks).expect("valid"));
        }
    }
    out.sort();
    out
}

/// Upward-closed subset of Πₙ, stored by its minimal elements.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct UpSet {
    n: usize,
    generators: Vec<SetPartition>,
}

impl UpSet {
    /// Generators are reduced to an antichain and sorted.
    pub fn new(n: usize, generators: Vec<SetPartition>) -> Result<Self, PartitionError> {
        for g in &generators {
            if g.n() != n {
                return Err(PartitionError::SizeMismatch(n, g.n()));
            }
        }
        let uniq: BTreeSet<SetPartition> = generators.into_iter().collect();
        let uniq: Vec<SetPartition> = uniq.into_iter().collect();
        let minimal = uniq
            .iter()
            .filter(|g| !uniq.iter().any(|h| h != *g && h.refines(g)))
            .cloned()
            .collect();
        Ok(UpSet { n, generators: minimal })
    }

    /// Generated by the atoms: everything except 0̂.
    pub fn full(n: usize) -> Result<Self, PartitionError> {
        Self::k_equals(n, 2)
    }

    /// Generated by the partitions with one block of size `k`, rest singletons.
    pub fn k_equals(n: usize, k: usize) -> Result<Self, PartitionError> {
        if k < 2 || k > n {
            return Err(PartitionError::KOutOfRange { n, k });
        }
        let mut gens = Vec::new();
        for mask in 0u32..(1 << n) {
            if mask.count_ones() as usize != k {
                continue;
            }
            let big: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| i + 1).collect();
            let mut blocks = vec![big];
            blocks.extend((0..n).filter(|i| mask & (1 << i) == 0).map(|i| vec![i + 1]));
            gens.push(SetPartition::from_blocks(n, &blocks)?);
        }
        Self::new(n, gens)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn minimal_elements(&self) -> &[SetPartition] {
        &self.generators
    }

    pub fn contains(&self, x: &SetPartition) -> bool {
        x.n() == self.n && self.generators.iter().any(|g| g.refines(x))
    }

    pub fn members(&self, max_n: usize) -> Result<Vec<SetPartition>, PartitionError> {
        Ok(enumerate(self.n, max_n)?.into_iter().filter(|x| self.contains(x)).collect())
    }

    pub fn act(&self, g: &Perm) -> Result<UpSet, PartitionError> {
        let gens = self.generators.iter().map(|x| x.act(g)).collect::<Result<Vec<_>, _>>()?;
        UpSet::new(self.n, gens)
    }

    pub fn is_preserved_by(&self, g: &Perm) -> bool {
        self.act(g).map(|u| &u == self).unwrap_or(false)
    }

    /// The symmetric upset generated by all partitions whose block sizes,
    /// sorted decreasingly, are one of `types`.
    pub fn from_block_types(n: usize, types: &[Vec<usize>]) -> Result<Self, PartitionError> {
        let gens = enumerate(n, DEFAULT_MAX_N)?
            .into_iter()
            .filter(|x| {
                let mut s = x.block_sizes();
                s.sort_unstable_by(|a, b| b.cmp(a));
                types.contains(&s)
            })
            .collect();
        Self::new(n, gens)
    }

    /// Invariant under every permutation of the ground set.
    pub fn is_symmetric(&self) -> bool {
        (0..self.n.saturating_sub(1)).all(|j| self.is_preserved_by(&Perm::transposition(self.n, j, j + 1)))
    }
}

/// JSON form of an upset: explicit generators or a named family.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UpSetSpec {
    Named { named: String, n: usize, k: Option<usize> },
    Explicit { n: usize, generators: Vec<SetPartition> },
}

impl UpSetSpec {
    pub fn build(&self) -> Result<UpSet, PartitionError> {
        match self {
            UpSetSpec::Named { named, n, k } => match (named.as_str(), k) {
                ("full", _) => UpSet::full(*n),
                ("k_equals", Some(k)) => UpSet::k_equals(*n, *k),
                ("k_equals", None) => Err(PartitionError::KOutOfRange { n: *n, k: 0 }),
                (other, _) => Err(PartitionError::UnknownName(other.to_string())),
            },
            UpSetSpec::Explicit { n, generators } => UpSet::new(*n, generators.clone()),
        }
    }
}

impl From<&UpSet> for UpSetSpec {
    fn from(u: &UpSet) -> Self {
        UpSetSpec::Explicit {
            n: u.n,
            generators: u.generators.clone(),
        }
    }
}

/// Joins of nonempty sets of minimal elements, optionally with 0̂.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JoinClosure {
    pub n: usize,
    pub with_bottom: bool,
    /// Sorted in rgs order.
    pub elements: Vec<SetPartition>,
}

pub fn join_closure(u: &UpSet, with_bottom: bool) -> JoinClosure {
    let mut set: BTreeSet<SetPartition> = u.generators.iter().cloned().collect();
    let mut frontier: Vec<SetPartition> = set.iter().cloned().collect();
    while let Some(x) = frontier.pop() {
        for g in &u.generators {
            let j = x.join(g).expect("same n");
            if set.insert(j.clone()) {
                frontier.push(j);
            }
        }
    }
    if with_bottom {
        set.insert(SetPartition::bottom(u.n));
    }
    JoinClosure {
        n: u.n,
        with_bottom,
        elements: set.into_iter().collect(),
    }
}

/// `{x ∈ set : x ⪯ top}` in the order given.
pub fn lower_interval(set: &[SetPartition], top: &SetPartition) -> Result<Vec<SetPartition>, PartitionError> {
    if !set.contains(top) {
        return Err(PartitionError::NotInSet(top.to_string()));
    }
    Ok(set.iter().filter(|x| x.refines(top)).cloned().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: usize, blocks: &[&[usize]]) -> SetPartition {
        let b: Vec<Vec<usize>> = blocks.iter().map(|b| b.to_vec()).collect();
        SetPartition::from_blocks(n, &b).unwrap()
    }

    #[test]
    fn join_and_meet_examples() {
        assert_eq!(p(3, &[&[1, 2], &[3]]).join(&p(3, &[&[1, 3], &[2]])).unwrap(), SetPartition::top(3));
        let x = p(4, &[&[1, 3], &[2, 4]]);
        assert_eq!(SetPartition::bottom(4).join(&x).unwrap(), x);
        assert_eq!(
            p(4, &[&[1, 2], &[3], &[4]]).join(&p(4, &[&[3, 4], &[1], &[2]])).unwrap(),
            p(4, &[&[1, 2], &[3, 4]])
        );
        assert_eq!(SetPartition::top(4).meet(&x).unwrap(), x);
        assert_eq!(p(4, &[&[1, 2], &[3, 4]]).meet(&x).unwrap(), SetPartition::bottom(4));
        assert_eq!(
            p(4, &[&[1, 2, 3], &[4]]).meet(&p(4, &[&[1, 2], &[3, 4]])).unwrap(),
            p(4, &[&[1, 2], &[3], &[4]])
        );
        assert!(matches!(x.join(&SetPartition::top(3)), Err(PartitionError::SizeMismatch(4, 3))));
    }

    #[test]
    fn counts() {
        assert_eq!(enumerate(3, 9).unwrap().len(), 5);
        assert_eq!(atoms(4).len(), 6);
        assert!(enumerate(10, 9).is_err());
        assert_eq!(enumerate(9, 9).unwrap().len(), 21147);
    }

    #[test]
    fn bell_five_by_independent_recurrence() {
        // Bell numbers from the Bell triangle
        let mut row = vec![1u64];
        let mut bell = vec![1u64];
        for _ in 0..7 {
            let mut next = vec![*row.last().unwrap()];
            for x in &row {
                let v = next.last().unwrap() + x;
                next.push(v);
            }
            bell.push(next[0]);
            row = next;
        }
        for n in 1..=7 {
            assert_eq!(enumerate(n, 9).unwrap().len() as u64, bell[n], "n={n}");
        }
        assert_eq!(bell[5], 52);
    }

    #[test]
    fn named_upsets() {
        assert_eq!(UpSet::full(2).unwrap().members(9).unwrap(), vec![SetPartition::top(2)]);
        let k = UpSet::k_equals(4, 3).unwrap();
        assert_eq!(k.minimal_elements().len(), 4);
        assert_eq!(k.members(9).unwrap().len(), 5);
        assert_eq!(UpSet::k_equals(5, 5).unwrap().minimal_elements(), &[SetPartition::top(5)]);
        assert!(UpSet::k_equals(4, 5).is_err());
        assert!(UpSet::k_equals(4, 1).is_err());
        let full = UpSet::full(4).unwrap().members(9).unwrap();
        assert_eq!(full.len(), 14);
        assert!(!full.contains(&SetPartition::bottom(4)));
    }

    #[test]
    fn join_closures() {
        for n in 1..=6 {
            if n >= 2 {
                let j = join_closure(&UpSet::full(n).unwrap(), true);
                assert_eq!(j.elements, enumerate(n, 9).unwrap());
            }
        }
        let j = join_closure(&UpSet::k_equals(4, 3).unwrap(), true);
        assert_eq!(j.elements.len(), 6);
        for n in 3..=7 {
            for k in 2..=n {
                let j = join_closure(&UpSet::k_equals(n, k).unwrap(), true);
                let expected: Vec<SetPartition> = enumerate(n, 9)
                    .unwrap()
                    .into_iter()
                    .filter(|x| x.block_sizes().iter().all(|&s| s == 1 || s >= k))
                    .collect();
                assert_eq!(j.elements, expected, "n={n} k={k}");
            }
        }
    }

    #[test]
    fn action_and_intervals() {
        let g = Perm::transposition(3, 0, 1);
        assert_eq!(p(3, &[&[1, 3], &[2]]).act(&g).unwrap(), p(3, &[&[2, 3], &[1]]));
        let all = enumerate(4, 9).unwrap();
        assert_eq!(lower_interval(&all, &SetPartition::top(4)).unwrap(), all);
        let j = join_closure(&UpSet::k_equals(6, 3).unwrap(), true).elements;
        let t = p(6, &[&[1, 2, 3], &[4, 5, 6]]);
        let iv = lower_interval(&j, &t).unwrap();
        // two independent copies of {0̂, 1̂} on three points
        assert_eq!(iv.len(), 4);
        assert!(lower_interval(&atoms(3), &SetPartition::top(3)).is_err());
    }

    #[test]
    fn upset_json_forms() {
        let s: UpSetSpec = serde_json::from_str(r#"{"named":"k_equals","k":3,"n":4}"#).unwrap();
        assert_eq!(s.build().unwrap(), UpSet::k_equals(4, 3).unwrap());
        let s: UpSetSpec = serde_json::from_str(r#"{"n":4,"generators":[[[1,2,3],[4]],[[1,2,4],[3]]]}"#).unwrap();
        assert_eq!(s.build().unwrap().minimal_elements().len(), 2);
        let x: SetPartition = serde_json::from_str("[[1,2],[3]]").unwrap();
        assert_eq!(serde_json::to_string(&x).unwrap(), "[[1,2],[3]]");
    }
}
