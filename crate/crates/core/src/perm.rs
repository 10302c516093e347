//! Permutations of {0..n-1} in one-line notation.

use std::fmt;

/// `images[i]` is the image of `i`. Composition `(a * b)(i) = a(b(i))`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm { images: (0..n).collect() }
    }

    /// None unless `images` is a bijection of {0..n-1}.
    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return None;
            }
            seen[i] = true;
        }
        Some(Perm { images })
    }

    /// Swap `i` and `j` (0-indexed).
    pub fn transposition(n: usize, i: usize, j: usize) -> Self {
        let mut images: Vec<usize> = (0..n).collect();
        images.swap(i, j);
        Perm { images }
    }

    /// Cycles given with 1-indexed entries, as in (1 2)(3 4 5).
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Option<Self> {
        let mut images: Vec<usize> = (0..n).collect();
        for cyc in cycles {
            for (k, &a) in cyc.iter().enumerate() {
                let b = cyc[(k + 1) % cyc.len()];
                if a == 0 || b == 0 || a > n || b > n {
                    return None;
                }
                images[a - 1] = b - 1;
            }
        }
        Perm::from_images(images)
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn compose(&self, other: &Perm) -> Perm {
        Perm {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.len()];
        for (i, &j) in self.images.iter().enumerate() {
            inv[j] = i;
        }
        Perm { images: inv }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for s in 0..self.len() {
            if seen[s] {
                continue;
            }
            let mut cyc = Vec::new();
            let mut i = s;
            while !seen[i] {
                seen[i] = true;
                cyc.push(i);
                i = self.images[i];
            }
            out.push(cyc);
        }
        out
    }

    /// Cycle lengths, weakly decreasing.
    pub fn cycle_type(&self) -> Vec<usize> {
        let mut t: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        t.sort_unstable_by(|a, b| b.cmp(a));
        t
    }

    /// +1 or -1.
    pub fn sign(&self) -> i64 {
        let even_cycles = self.cycles().iter().filter(|c| c.len() % 2 == 0).count();
        if even_cycles % 2 == 0 {
            1
        } else {
            -1
        }
    }

    /// Word `w` in adjacent transpositions (`j` swaps positions j, j+1) with
    /// `self = s_{w[last]} ⋯ s_{w[0]}`, i.e. apply `s_{w[0]}` first.
    pub fn adjacent_word(&self) -> Vec<usize> {
        let mut cur = self.images.clone();
        let mut word = Vec::new();
        loop {
            let Some(j) = (0..cur.len().saturating_sub(1)).find(|&j| cur[j] > cur[j + 1]) else {
                break;
            };
            cur.swap(j, j + 1);
            word.push(j);
        }
        word
    }

    /// All permutations of {0..n-1} in lexicographic order of one-line notation.
    pub fn all(n: usize) -> Vec<Perm> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Perm { images: cur.clone() });
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
                break;
            };
            let j = (i + 1..n).rev().find(|&j| cur[j] > cur[i]).expect("successor exists");
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        out
    }

    /// The lexicographically least permutation (one-line notation) of the
    /// given cycle type.
    pub fn class_representative(cycle_type: &[usize]) -> Perm {
        // Lexicographic minimality puts fixed points first, then longer
        // cycles on consecutive labels ordered by increasing length.
        let n: usize = cycle_type.iter().sum();
        let mut lengths: Vec<usize> = cycle_type.to_vec();
        lengths.sort_unstable();
        let mut images: Vec<usize> = (0..n).collect();
        let mut start = 0;
        for len in lengths {
            for k in 0..len {
                images[start + k] = start + (k + 1) % len;
            }
            start += len;
        }
        Perm { images }
    }
}

impl fmt::Display for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles: Vec<Vec<usize>> = self.cycles().into_iter().filter(|c| c.len() > 1).collect();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            let s: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
            write!(f, "({})", s.join(" "))?;
        }
        Ok(())
    }
}

/// Integer partitions of `n`, each weakly decreasing, in reverse lexicographic
/// order (so `[n]` first).
pub fn integer_partitions(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, max: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if n == 0 {
            out.push(prefix.clone());
            return;
        }
        for part in (1..=n.min(max)).rev() {
            prefix.push(part);
            rec(n - part, part, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, n, &mut Vec::new(), &mut out);
    out
}

/// Size of the centralizer of a permutation with the given cycle type.
pub fn centralizer_size(cycle_type: &[usize]) -> u64 {
    let mut z: u64 = 1;
    let mut counts = std::collections::BTreeMap::new();
    for &l in cycle_type {
        *counts.entry(l).or_insert(0u64) += 1;
        z *= l as u64;
    }
    for (_, m) in counts {
        z *= (1..=m).product::<u64>();
    }
    z
}

pub fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_representative_is_lexicographically_least() {
        for n in 1..=6 {
            let all = Perm::all(n);
            for lambda in integer_partitions(n) {
                let least = all.iter().find(|p| p.cycle_type() == lambda).unwrap();
                assert_eq!(&Perm::class_representative(&lambda), least, "{lambda:?}");
            }
        }
    }

    #[test]
    fn adjacent_word_reconstructs() {
        for p in Perm::all(5) {
            let mut acc = Perm::identity(5);
            for &j in &p.adjacent_word() {
                acc = Perm::transposition(5, j, j + 1).compose(&acc);
            }
            assert_eq!(acc, p);
        }
    }

    #[test]
    fn class_sizes_sum_to_factorial() {
        for n in 1..=7 {
            let total: u64 = integer_partitions(n).iter().map(|l| factorial(n) / centralizer_size(l)).sum();
            assert_eq!(total, factorial(n));
        }
    }
}
