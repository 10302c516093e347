//! Exact sparse linear algebra over ℤ and ℚ: Smith normal form, ranks,
//! cohomology of cochain complexes, and induced maps on cohomology.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize, Serializer};
use thiserror::Error;

/// Scalars are always stored as reduced fractions; integer matrices keep
/// denominator 1.
pub type Q = BigRational;

/// A sparse vector: index -> nonzero scalar.
pub type SparseVec = BTreeMap<usize, Q>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ring {
    #[serde(rename = "Z")]
    Integers,
    #[serde(rename = "Q")]
    Rationals,
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Integers => write!(f, "Z"),
            Ring::Rationals => write!(f, "Q"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("entry ({row}, {col}) outside a {rows}x{cols} matrix")]
    OutOfBounds {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    #[error("non-integral entry {0} in a matrix over Z")]
    NonIntegral(String),
    #[error("d∘d is nonzero starting at degree {0}")]
    NotAComplex(i32),
    #[error("map does not commute with the differentials at degree {0}")]
    NotAChainMap(i32),
    #[error("vector is not a cocycle in degree {0}")]
    NotACocycle(i32),
    #[error("ring mismatch: {0} vs {1}")]
    RingMismatch(Ring, Ring),
}

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qfrac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `acc += factor * v`, dropping cancelled entries.
pub fn axpy(acc: &mut SparseVec, factor: &Q, v: &SparseVec) {
    for (i, x) in v {
        add_entry(acc, *i, factor * x);
    }
}

pub fn add_entry(acc: &mut SparseVec, i: usize, x: Q) {
    if x.is_zero() {
        return;
    }
    match acc.entry(i) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(x);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            *e.get_mut() += x;
            if e.get().is_zero() {
                e.remove();
            }
        }
    }
}

/// Sparse matrix stored column-major; every column is sorted by row and holds
/// no zeros.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactMatrix {
    ring: Ring,
    rows: usize,
    columns: Vec<Vec<(usize, Q)>>,
}

impl ExactMatrix {
    pub fn zero(ring: Ring, rows: usize, cols: usize) -> Self {
        ExactMatrix {
            ring,
            rows,
            columns: vec![Vec::new(); cols],
        }
    }

    pub fn identity(ring: Ring, n: usize) -> Self {
        ExactMatrix {
            ring,
            rows: n,
            columns: (0..n).map(|i| vec![(i, Q::one())]).collect(),
        }
    }

    /// Duplicated positions are summed.
    pub fn from_triplets<I>(ring: Ring, rows: usize, cols: usize, triplets: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (usize, usize, Q)>,
    {
        let mut acc: Vec<SparseVec> = vec![SparseVec::new(); cols];
        for (r, c, x) in triplets {
            if r >= rows || c >= cols {
                return Err(AlgebraError::OutOfBounds { row: r, col: c, rows, cols });
            }
            if ring == Ring::Integers && !x.is_integer() {
                return Err(AlgebraError::NonIntegral(x.to_string()));
            }
            add_entry(&mut acc[c], r, x);
        }
        Ok(ExactMatrix {
            ring,
            rows,
            columns: acc.into_iter().map(|c| c.into_iter().collect()).collect(),
        })
    }

    pub fn from_columns(ring: Ring, rows: usize, columns: Vec<SparseVec>) -> Result<Self, AlgebraError> {
        let cols = columns.len();
        let triplets = columns
            .into_iter()
            .enumerate()
            .flat_map(|(c, col)| col.into_iter().map(move |(r, x)| (r, c, x)));
        Self::from_triplets(ring, rows, cols, triplets)
    }

    /// Dense integer rows, mostly for tests and fixtures.
    pub fn from_int_rows(rows: &[Vec<i64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let trip = rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, &x)| (r, c, q(x))));
        Self::from_triplets(Ring::Integers, nrows, ncols, trip).expect("dense rows are in bounds")
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }
    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.columns.len()
    }
    pub fn nnz(&self) -> usize {
        self.columns.iter().map(Vec::len).sum()
    }
    pub fn is_zero(&self) -> bool {
        self.columns.iter().all(Vec::is_empty)
    }

    pub fn with_ring(mut self, ring: Ring) -> Result<Self, AlgebraError> {
        if ring == Ring::Integers {
            for (_, _, x) in self.entries() {
                if !x.is_integer() {
                    return Err(AlgebraError::NonIntegral(x.to_string()));
                }
            }
        }
        self.ring = ring;
        Ok(self)
    }

    pub fn get(&self, r: usize, c: usize) -> Q {
        match self.columns[c].binary_search_by_key(&r, |(i, _)| *i) {
            Ok(pos) => self.columns[c][pos].1.clone(),
            Err(_) => Q::zero(),
        }
    }

    pub fn column(&self, c: usize) -> &[(usize, Q)] {
        &self.columns[c]
    }

    pub fn column_vec(&self, c: usize) -> SparseVec {
        self.columns[c].iter().cloned().collect()
    }

    /// Entries in column-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Q)> + '_ {
        self.columns
            .iter()
            .enumerate()
            .flat_map(|(c, col)| col.iter().map(move |(r, x)| (*r, c, x)))
    }

    pub fn transpose(&self) -> Self {
        let mut cols: Vec<Vec<(usize, Q)>> = vec![Vec::new(); self.rows];
        for (r, c, x) in self.entries() {
            cols[r].push((c, x.clone()));
        }
        ExactMatrix {
            ring: self.ring,
            rows: self.cols(),
            columns: cols,
        }
    }

    pub fn apply(&self, v: &SparseVec) -> SparseVec {
        let mut out = SparseVec::new();
        for (c, x) in v {
            for (r, y) in &self.columns[*c] {
                add_entry(&mut out, *r, x * y);
            }
        }
        out
    }

    pub fn mul(&self, other: &ExactMatrix) -> Result<ExactMatrix, AlgebraError> {
        if self.cols() != other.rows {
            return Err(AlgebraError::Shape(format!(
                "{}x{} times {}x{}",
                self.rows,
                self.cols(),
                other.rows,
                other.cols()
            )));
        }
        if self.ring != other.ring {
            return Err(AlgebraError::RingMismatch(self.ring, other.ring));
        }
        let columns = other
            .columns
            .iter()
            .map(|col| {
                let v: SparseVec = col.iter().cloned().collect();
                self.apply(&v).into_iter().collect()
            })
            .collect();
        Ok(ExactMatrix {
            ring: self.ring,
            rows: self.rows,
            columns,
        })
    }

    pub fn sub(&self, other: &ExactMatrix) -> Result<ExactMatrix, AlgebraError> {
        if self.rows != other.rows || self.cols() != other.cols() {
            return Err(AlgebraError::Shape("difference of unequal shapes".into()));
        }
        let columns = self
            .columns
            .iter()
            .zip(&other.columns)
            .map(|(a, b)| {
                let mut v: SparseVec = a.iter().cloned().collect();
                for (r, x) in b {
                    add_entry(&mut v, *r, -x.clone());
                }
                v.into_iter().collect()
            })
            .collect();
        Ok(ExactMatrix {
            ring: self.ring,
            rows: self.rows,
            columns,
        })
    }

    pub fn trace(&self) -> Q {
        (0..self.rows.min(self.cols())).map(|i| self.get(i, i)).sum()
    }

    /// Rank over ℚ.
    pub fn rank(&self) -> usize {
        let mut pivots: HashMap<usize, SparseVec> = HashMap::new();
        for col in &self.columns {
            let v: SparseVec = col.iter().cloned().collect();
            reduce_against(v, &mut pivots, None);
        }
        pivots.len()
    }

    /// Some `x` over ℚ with `self · x = b`, built from reduced columns in index
    /// order (deterministic); `None` when `b` is not in the column span.
    pub fn solve(&self, b: &SparseVec) -> Option<SparseVec> {
        let mut pivots: HashMap<usize, SparseVec> = HashMap::new();
        let mut track: HashMap<usize, SparseVec> = HashMap::new();
        for (j, col) in self.columns.iter().enumerate() {
            reduce_tracked(col.iter().cloned().collect(), &mut pivots, &mut track, SparseVec::from([(j, Q::one())]));
        }
        let mut rest = b.clone();
        let mut x = SparseVec::new();
        while let Some((&low, v)) = rest.last_key_value() {
            let p = pivots.get(&low)?;
            let f = v.clone();
            axpy(&mut rest, &-f.clone(), p);
            axpy(&mut x, &f, &track[&low]);
        }
        Some(x)
    }

    /// Determinant over ℚ of a square matrix (dense Gaussian elimination).
    pub fn determinant(&self) -> Result<Q, AlgebraError> {
        let n = self.rows;
        if n != self.cols() {
            return Err(AlgebraError::Shape("determinant of a non-square matrix".into()));
        }
        let mut a = vec![vec![Q::zero(); n]; n];
        for (r, c, x) in self.entries() {
            a[r][c] = x.clone();
        }
        let mut det = Q::one();
        for k in 0..n {
            let Some(p) = (k..n).find(|&i| !a[i][k].is_zero()) else {
                return Ok(Q::zero());
            };
            if p != k {
                a.swap(p, k);
                det = -det;
            }
            det *= a[k][k].clone();
            for i in k + 1..n {
                if a[i][k].is_zero() {
                    continue;
                }
                let f = &a[i][k] / &a[k][k];
                for j in k..n {
                    let t = &f * &a[k][j];
                    a[i][j] -= t;
                }
            }
        }
        Ok(det)
    }
}

/// Reduce `v` against normalized pivot columns keyed by their lowest (largest)
/// index. A nonzero remainder is normalized and stored as a new pivot; returns
/// whether that happened. `track` carries a companion vector updated in lockstep.
fn reduce_against(
    mut v: SparseVec,
    pivots: &mut HashMap<usize, SparseVec>,
    track: Option<(&mut SparseVec, &HashMap<usize, SparseVec>)>,
) -> Option<usize> {
    let mut track = track;
    while let Some((&low, x)) = v.last_key_value() {
        match pivots.get(&low) {
            Some(p) => {
                let f = -x.clone();
                axpy(&mut v, &f, p);
                if let Some((t, comp)) = track.as_mut() {
                    if let Some(cv) = comp.get(&low) {
                        axpy(t, &f, cv);
                    }
                }
            }
            None => {
                let lead = x.clone();
                for y in v.values_mut() {
                    *y /= &lead;
                }
                if let Some((t, _)) = track.as_mut() {
                    for y in t.values_mut() {
                        *y /= &lead;
                    }
                }
                pivots.insert(low, v);
                return Some(low);
            }
        }
    }
    None
}

/// Smith normal form `U·M·V = S`.
#[derive(Clone, Debug)]
pub struct SmithForm {
    pub s: ExactMatrix,
    pub u: ExactMatrix,
    pub v: ExactMatrix,
}

impl SmithForm {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.s.rows().min(self.s.cols()))
            .map(|i| self.s.get(i, i).to_integer())
            .filter(|x| !x.is_zero())
            .collect()
    }
}

fn min_abs_position(a: &[Vec<BigInt>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, x) in row.iter().enumerate().skip(t) {
            if x.is_zero() {
                continue;
            }
            if best.is_none_or(|(bi, bj)| x.abs() < a[bi][bj].abs()) {
                best = Some((i, j));
            }
        }
    }
    best
}

/// Dense Smith normal form with transforms. The pivot is always the nonzero
/// entry of least absolute value in the remaining block.
pub fn smith_normal_form(m: &ExactMatrix) -> Result<SmithForm, AlgebraError> {
    if m.ring() != Ring::Integers {
        return Err(AlgebraError::RingMismatch(m.ring(), Ring::Integers));
    }
    let (nr, nc) = (m.rows(), m.cols());
    let mut a = vec![vec![BigInt::zero(); nc]; nr];
    for (r, c, x) in m.entries() {
        a[r][c] = x.to_integer();
    }
    let ident = |n: usize| -> Vec<Vec<BigInt>> {
        (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect()
    };
    let mut u = ident(nr);
    let mut v = ident(nc);

    let row_axpy = |mat: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, f: &BigInt| {
        let srow = mat[src].clone();
        for (d, s) in mat[dst].iter_mut().zip(srow.iter()) {
            *d -= f * s;
        }
    };
    let col_axpy = |mat: &mut Vec<Vec<BigInt>>, dst: usize, src: usize, f: &BigInt| {
        for row in mat.iter_mut() {
            let s = row[src].clone();
            row[dst] -= f * s;
        }
    };

    let mut t = 0;
    while t < nr.min(nc) {
        let Some((pi, pj)) = min_abs_position(&a, t) else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = a[t][t].clone();
            let mut clean = true;
            for i in t + 1..nr {
                if !a[i][t].is_zero() {
                    let f = a[i][t].div_floor(&p);
                    row_axpy(&mut a, i, t, &f);
                    row_axpy(&mut u, i, t, &f);
                    clean &= a[i][t].is_zero();
                }
            }
            for j in t + 1..nc {
                if !a[t][j].is_zero() {
                    let f = a[t][j].div_floor(&p);
                    col_axpy(&mut a, j, t, &f);
                    col_axpy(&mut v, j, t, &f);
                    clean &= a[t][j].is_zero();
                }
            }
            if !clean {
                // a smaller remainder appeared in the pivot row or column
                let (bi, bj) = min_abs_position(&a, t).expect("nonzero block");
                a.swap(t, bi);
                u.swap(t, bi);
                for row in a.iter_mut() {
                    row.swap(t, bj);
                }
                for row in v.iter_mut() {
                    row.swap(t, bj);
                }
                continue;
            }
            let bad = (t + 1..nr).find(|&i| (t + 1..nc).any(|j| !(&a[i][j] % &p).is_zero()));
            match bad {
                Some(i) => {
                    let m1 = BigInt::from(-1);
                    row_axpy(&mut a, t, i, &m1);
                    row_axpy(&mut u, t, i, &m1);
                }
                None => break,
            }
        }
        if a[t][t].is_negative() {
            for x in a[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        t += 1;
    }

    let to_matrix = |d: &Vec<Vec<BigInt>>, rows: usize, cols: usize| {
        let trip = d
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().enumerate().map(move |(c, x)| (r, c, Q::from_integer(x.clone()))));
        ExactMatrix::from_triplets(Ring::Integers, rows, cols, trip).expect("in bounds")
    };
    Ok(SmithForm {
        s: to_matrix(&a, nr, nc),
        u: to_matrix(&u, nr, nr),
        v: to_matrix(&v, nc, nc),
    })
}

/// Rearrange nonzero diagonal entries into a divisibility chain, all positive.
pub fn normalize_invariant_factors(mut d: Vec<BigInt>) -> Vec<BigInt> {
    d.retain(|x| !x.is_zero());
    for x in d.iter_mut() {
        *x = x.abs();
    }
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            let g = d[i].gcd(&d[j]);
            let l = d[i].lcm(&d[j]);
            d[i] = g;
            d[j] = l;
        }
    }
    d
}

/// Invariant factors (the nonzero SNF diagonal, ones included) of an integer
/// matrix, computed by sparse elimination. Unit pivots are taken first since
/// they have least absolute value; the leftover block is finished with the
/// general least-absolute-value pivot rule.
pub fn invariant_factors(m: &ExactMatrix) -> Vec<BigInt> {
    let nr = m.rows();
    let mut rows: Vec<BTreeMap<usize, BigInt>> = vec![BTreeMap::new(); nr];
    let mut col_rows: Vec<HashSet<usize>> = vec![HashSet::new(); m.cols()];
    for (r, c, x) in m.entries() {
        rows[r].insert(c, x.to_integer());
        col_rows[c].insert(r);
    }
    let mut diag: Vec<BigInt> = Vec::new();

    // Eliminate row `pr` and column `pc` using an exact-divisor pivot.
    let eliminate = |rows: &mut Vec<BTreeMap<usize, BigInt>>,
                     col_rows: &mut Vec<HashSet<usize>>,
                     pr: usize,
                     pc: usize| {
        let prow = std::mem::take(&mut rows[pr]);
        let pv = prow[&pc].clone();
        for c in prow.keys() {
            col_rows[*c].remove(&pr);
        }
        let mut others: Vec<usize> = col_rows[pc].iter().copied().collect();
        others.sort_unstable();
        for r in others {
            let f = &rows[r][&pc] / &pv;
            for (c, x) in &prow {
                let delta = &f * x;
                let e = rows[r].entry(*c).or_insert_with(BigInt::zero);
                *e -= delta;
                if e.is_zero() {
                    rows[r].remove(c);
                    col_rows[*c].remove(&r);
                } else {
                    col_rows[*c].insert(r);
                }
            }
        }
        debug_assert!(col_rows[pc].is_empty());
    };

    let mut progress = true;
    while progress {
        progress = false;
        for c in 0..col_rows.len() {
            if col_rows[c].is_empty() {
                continue;
            }
            let best = col_rows[c]
                .iter()
                .filter(|&&r| rows[r][&c].abs().is_one())
                .min_by_key(|&&r| (rows[r].len(), r))
                .copied();
            if let Some(r) = best {
                eliminate(&mut rows, &mut col_rows, r, c);
                diag.push(BigInt::one());
                progress = true;
            }
        }
    }

    // General phase on whatever is left.
    loop {
        let mut best: Option<(usize, usize)> = None;
        for (r, row) in rows.iter().enumerate() {
            for (c, x) in row {
                let better = match best {
                    None => true,
                    Some((br, bc)) => {
                        let bx = rows[br][&bc].abs();
                        let ax = x.abs();
                        ax < bx || (ax == bx && rows[r].len() + col_rows[*c].len() < rows[br].len() + col_rows[bc].len())
                    }
                };
                if better {
                    best = Some((r, *c));
                }
            }
        }
        let Some((pr, pc)) = best else { break };
        let pv = rows[pr][&pc].clone();
        let divides_col = col_rows[pc].iter().all(|&r| (&rows[r][&pc] % &pv).is_zero());
        let divides_row = rows[pr].values().all(|x| (x % &pv).is_zero());
        if divides_col && divides_row {
            // exact row operations clear the column, then the pivot row is
            // cleared by column operations that touch no other row
            eliminate(&mut rows, &mut col_rows, pr, pc);
            diag.push(pv);
            continue;
        }
        if !divides_col {
            let others: Vec<usize> = {
                let mut v: Vec<usize> = col_rows[pc].iter().copied().filter(|&r| r != pr).collect();
                v.sort_unstable();
                v
            };
            let prow = rows[pr].clone();
            for r in others {
                let f = rows[r][&pc].div_floor(&pv);
                if f.is_zero() {
                    continue;
                }
                for (c, x) in &prow {
                    let delta = &f * x;
                    let e = rows[r].entry(*c).or_insert_with(BigInt::zero);
                    *e -= delta;
                    if e.is_zero() {
                        rows[r].remove(c);
                        col_rows[*c].remove(&r);
                    } else {
                        col_rows[*c].insert(r);
                    }
                }
            }
        } else {
            // Column operations: col c -= floor(a/p) * col pc, for c in the pivot row.
            let targets: Vec<usize> = rows[pr].keys().copied().filter(|&c| c != pc).collect();
            let pcol: Vec<(usize, BigInt)> = {
                let mut v: Vec<usize> = col_rows[pc].iter().copied().collect();
                v.sort_unstable();
                v.into_iter().map(|r| (r, rows[r][&pc].clone())).collect()
            };
            for c in targets {
                let f = rows[pr][&c].div_floor(&pv);
                if f.is_zero() {
                    continue;
                }
                for (r, x) in &pcol {
                    let delta = &f * x;
                    let e = rows[*r].entry(c).or_insert_with(BigInt::zero);
                    *e -= delta;
                    if e.is_zero() {
                        rows[*r].remove(&c);
                        col_rows[c].remove(r);
                    } else {
                        col_rows[c].insert(*r);
                    }
                }
            }
        }
    }
    normalize_invariant_factors(diag)
}

/// Cochain complex with `d_k : C^k -> C^{k+1}` over a contiguous degree range.
#[derive(Clone, Debug)]
pub struct GradedComplex {
    ring: Ring,
    min_degree: i32,
    ranks: Vec<usize>,
    // differentials[i] : C^{min+i} -> C^{min+i+1}; one fewer than ranks
    differentials: Vec<ExactMatrix>,
    labels: Vec<Vec<String>>,
}

impl GradedComplex {
    /// `differentials[i]` maps degree `min_degree + i` to the next degree; the
    /// last degree has no outgoing map. Shapes and d∘d = 0 are checked.
    pub fn new(
        ring: Ring,
        min_degree: i32,
        ranks: Vec<usize>,
        differentials: Vec<ExactMatrix>,
        labels: Vec<Vec<String>>,
    ) -> Result<Self, AlgebraError> {
        if differentials.len() + 1 != ranks.len().max(1) {
            return Err(AlgebraError::Shape(format!(
                "{} degrees need {} differentials, got {}",
                ranks.len(),
                ranks.len().saturating_sub(1),
                differentials.len()
            )));
        }
        if labels.len() != ranks.len() || labels.iter().zip(&ranks).any(|(l, r)| l.len() != *r) {
            return Err(AlgebraError::Shape("basis labels disagree with ranks".into()));
        }
        for (i, d) in differentials.iter().enumerate() {
            if d.cols() != ranks[i] || d.rows() != ranks[i + 1] {
                return Err(AlgebraError::Shape(format!(
                    "d at degree {} is {}x{}, expected {}x{}",
                    min_degree + i as i32,
                    d.rows(),
                    d.cols(),
                    ranks[i + 1],
                    ranks[i]
                )));
            }
            if d.ring() != ring {
                return Err(AlgebraError::RingMismatch(d.ring(), ring));
            }
        }
        let c = GradedComplex {
            ring,
            min_degree,
            ranks,
            differentials,
            labels,
        };
        c.check_square_zero()?;
        Ok(c)
    }

    pub fn empty(ring: Ring) -> Self {
        GradedComplex {
            ring,
            min_degree: 0,
            ranks: Vec::new(),
            differentials: Vec::new(),
            labels: Vec::new(),
        }
    }

    fn check_square_zero(&self) -> Result<(), AlgebraError> {
        let bad = self
            .differentials
            .par_windows(2)
            .enumerate()
            .find_first(|(_, w)| !w[1].mul(&w[0]).map(|m| m.is_zero()).unwrap_or(false));
        match bad {
            Some((i, _)) => Err(AlgebraError::NotAComplex(self.min_degree + i as i32)),
            None => Ok(()),
        }
    }

    pub fn ring(&self) -> Ring {
        self.ring
    }
    pub fn min_degree(&self) -> i32 {
        self.min_degree
    }
    pub fn max_degree(&self) -> i32 {
        self.min_degree + self.ranks.len() as i32 - 1
    }
    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.min_degree..=self.max_degree()
    }
    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    pub fn rank(&self, k: i32) -> usize {
        self.index(k).map_or(0, |i| self.ranks[i])
    }

    fn index(&self, k: i32) -> Option<usize> {
        let i = k - self.min_degree;
        (i >= 0 && (i as usize) < self.ranks.len()).then_some(i as usize)
    }

    /// `d_k`, or a zero matrix of the right shape outside the stored range.
    pub fn differential(&self, k: i32) -> ExactMatrix {
        match self.index(k) {
            Some(i) if i < self.differentials.len() => self.differentials[i].clone(),
            _ => ExactMatrix::zero(self.ring, self.rank(k + 1), self.rank(k)),
        }
    }

    fn differential_ref(&self, k: i32) -> Option<&ExactMatrix> {
        self.index(k).and_then(|i| self.differentials.get(i))
    }

    pub fn labels(&self, k: i32) -> &[String] {
        self.index(k).map_or(&[], |i| &self.labels[i])
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees()
            .map(|k| if k.rem_euclid(2) == 0 { self.rank(k) as i64 } else { -(self.rank(k) as i64) })
            .sum()
    }

    pub fn with_ring(self, ring: Ring) -> Result<Self, AlgebraError> {
        let differentials = self
            .differentials
            .into_iter()
            .map(|d| d.with_ring(ring))
            .collect::<Result<_, _>>()?;
        Ok(GradedComplex {
            ring,
            differentials,
            ..self
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeCohomology {
    pub degree: i32,
    pub free_rank: usize,
    #[serde(serialize_with = "serialize_bigints")]
    pub torsion: Vec<BigInt>,
}

fn serialize_bigints<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for x in v {
        match x.to_u64() {
            Some(u) => seq.serialize_element(&u)?,
            None => seq.serialize_element(&x.to_string())?,
        }
    }
    seq.end()
}

/// Per-degree cohomology; degrees with zero group are omitted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologySummary {
    pub ring: Ring,
    pub degrees: Vec<DegreeCohomology>,
}

impl CohomologySummary {
    pub fn new(ring: Ring, mut degrees: Vec<DegreeCohomology>) -> Self {
        degrees.retain(|d| d.free_rank > 0 || !d.torsion.is_empty());
        degrees.sort_by_key(|d| d.degree);
        CohomologySummary { ring, degrees }
    }

    pub fn free_rank(&self, k: i32) -> usize {
        self.degrees.iter().find(|d| d.degree == k).map_or(0, |d| d.free_rank)
    }

    pub fn torsion(&self, k: i32) -> &[BigInt] {
        self.degrees.iter().find(|d| d.degree == k).map_or(&[], |d| &d.torsion)
    }

    pub fn is_zero(&self) -> bool {
        self.degrees.is_empty()
    }

    pub fn is_torsion_free(&self) -> bool {
        self.degrees.iter().all(|d| d.torsion.is_empty())
    }

    pub fn total_rank(&self) -> usize {
        self.degrees.iter().map(|d| d.free_rank).sum()
    }

    /// degree -> free rank, zero ranks omitted.
    pub fn rank_map(&self) -> BTreeMap<i32, usize> {
        self.degrees.iter().filter(|d| d.free_rank > 0).map(|d| (d.degree, d.free_rank)).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees
            .iter()
            .map(|d| if d.degree.rem_euclid(2) == 0 { d.free_rank as i64 } else { -(d.free_rank as i64) })
            .sum()
    }

    /// Drop torsion, giving the rational cohomology of the same complex.
    pub fn rationalize(&self) -> CohomologySummary {
        CohomologySummary::new(
            Ring::Rationals,
            self.degrees
                .iter()
                .map(|d| DegreeCohomology {
                    degree: d.degree,
                    free_rank: d.free_rank,
                    torsion: Vec::new(),
                })
                .collect(),
        )
    }
}

/// Cohomology of a complex over its own ring.
pub fn cohomology(c: &GradedComplex) -> CohomologySummary {
    let degrees: Vec<i32> = if c.is_empty() { Vec::new() } else { c.degrees().collect() };
    // per outgoing differential: (rank, invariant factors > 1)
    let data: Vec<(usize, Vec<BigInt>)> = degrees
        .par_iter()
        .map(|&k| match c.differential_ref(k) {
            None => (0, Vec::new()),
            Some(d) => match c.ring {
                Ring::Rationals => (d.rank(), Vec::new()),
                Ring::Integers => {
                    let f = invariant_factors(d);
                    let rank = f.len();
                    (rank, f.into_iter().filter(|x| !x.is_one()).collect())
                }
            },
        })
        .collect();
    let out = degrees
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            let rk_out = data[i].0;
            let (rk_in, tors) = if i == 0 { (0, Vec::new()) } else { data[i - 1].clone() };
            DegreeCohomology {
                degree: k,
                free_rank: c.rank(k) - rk_out - rk_in,
                torsion: tors,
            }
        })
        .collect();
    CohomologySummary::new(c.ring, out)
}

/// Degreewise linear maps between two complexes.
#[derive(Clone, Debug)]
pub struct ChainMap {
    pub min_degree: i32,
    pub maps: Vec<ExactMatrix>,
}

impl ChainMap {
    pub fn identity(c: &GradedComplex) -> Self {
        ChainMap {
            min_degree: c.min_degree,
            maps: c.ranks.iter().map(|&r| ExactMatrix::identity(c.ring, r)).collect(),
        }
    }

    pub fn at(&self, k: i32, rows: usize, cols: usize, ring: Ring) -> ExactMatrix {
        let i = k - self.min_degree;
        if i >= 0 && (i as usize) < self.maps.len() {
            self.maps[i as usize].clone()
        } else {
            ExactMatrix::zero(ring, rows, cols)
        }
    }

    fn at_ref(&self, k: i32) -> Option<&ExactMatrix> {
        let i = k - self.min_degree;
        (i >= 0).then(|| self.maps.get(i as usize)).flatten()
    }

    /// Shapes match and `f∘d = d∘f` everywhere.
    pub fn validate(&self, src: &GradedComplex, tgt: &GradedComplex) -> Result<(), AlgebraError> {
        let lo = src.min_degree.min(tgt.min_degree) - 1;
        let hi = src.max_degree().max(tgt.max_degree()) + 1;
        for k in lo..=hi {
            let f = self.at(k, tgt.rank(k), src.rank(k), src.ring);
            if f.rows() != tgt.rank(k) || f.cols() != src.rank(k) {
                return Err(AlgebraError::Shape(format!("chain map at degree {k}")));
            }
        }
        for k in lo..=hi {
            let f0 = self.at(k, tgt.rank(k), src.rank(k), src.ring);
            let f1 = self.at(k + 1, tgt.rank(k + 1), src.rank(k + 1), src.ring);
            let left = f1.mul(&src.differential(k))?;
            let right = tgt.differential(k).mul(&f0)?;
            if !left.sub(&right)?.is_zero() {
                return Err(AlgebraError::NotAChainMap(k));
            }
        }
        Ok(())
    }
}

struct DegreeBasis {
    // lowest index of each reduced coboundary -> normalized vector
    boundaries: HashMap<usize, SparseVec>,
    reps: Vec<SparseVec>,
    rep_of_low: HashMap<usize, usize>,
}

/// Chosen cocycle representatives for a basis of rational cohomology, plus
/// the data to express any cocycle in that basis.
pub struct CohomologyBasis {
    min_degree: i32,
    degrees: Vec<DegreeBasis>,
}

impl CohomologyBasis {
    pub fn new(c: &GradedComplex) -> Self {
        let n = c.ranks.len();
        // Reduce each d_k, tracking the column operations (for kernel vectors).
        // Columns that are lows of the previous reduction are already known to
        // reduce to zero and are skipped.
        let mut prev_lows: HashSet<usize> = HashSet::new();
        let mut prev_pivots: HashMap<usize, SparseVec> = HashMap::new();
        let mut degrees = Vec::with_capacity(n);
        for i in 0..n {
            let k = c.min_degree + i as i32;
            let mut pivots: HashMap<usize, SparseVec> = HashMap::new();
            let mut pivot_track: HashMap<usize, SparseVec> = HashMap::new();
            let mut kernel: Vec<(usize, SparseVec)> = Vec::new();
            let d = c.differential_ref(k);
            for j in 0..c.ranks[i] {
                if prev_lows.contains(&j) {
                    continue;
                }
                let col: SparseVec = d.map(|d| d.column_vec(j)).unwrap_or_default();
                let mut track = SparseVec::new();
                track.insert(j, Q::one());
                match reduce_tracked(col, &mut pivots, &mut pivot_track, track) {
                    None => {}
                    Some(t) => kernel.push((j, t)),
                }
            }
            let mut reps = Vec::new();
            let mut rep_of_low = HashMap::new();
            for (j, t) in kernel {
                rep_of_low.insert(j, reps.len());
                reps.push(t);
            }
            degrees.push(DegreeBasis {
                boundaries: std::mem::take(&mut prev_pivots),
                reps,
                rep_of_low,
            });
            prev_lows = pivots.keys().copied().collect();
            prev_pivots = pivots;
        }
        CohomologyBasis {
            min_degree: c.min_degree,
            degrees,
        }
    }

    pub fn dimension(&self, k: i32) -> usize {
        self.degree(k).map_or(0, |d| d.reps.len())
    }

    fn degree(&self, k: i32) -> Option<&DegreeBasis> {
        let i = k - self.min_degree;
        (i >= 0).then(|| self.degrees.get(i as usize)).flatten()
    }

    pub fn representatives(&self, k: i32) -> &[SparseVec] {
        self.degree(k).map_or(&[], |d| &d.reps)
    }

    /// Coordinates of the class of cocycle `v` in degree `k`.
    pub fn coordinates(&self, k: i32, mut v: SparseVec) -> Result<Vec<Q>, AlgebraError> {
        let Some(db) = self.degree(k) else {
            return if v.is_empty() { Ok(Vec::new()) } else { Err(AlgebraError::NotACocycle(k)) };
        };
        let mut out = vec![Q::zero(); db.reps.len()];
        while let Some((&low, x)) = v.last_key_value() {
            let f = -x.clone();
            if let Some(b) = db.boundaries.get(&low) {
                axpy(&mut v, &f, b);
            } else if let Some(&r) = db.rep_of_low.get(&low) {
                out[r] -= &f;
                axpy(&mut v, &f, &db.reps[r]);
            } else {
                return Err(AlgebraError::NotACocycle(k));
            }
        }
        Ok(out)
    }

    /// Matrix of the induced map `H^k(src) -> H^k(tgt)` (columns = source classes).
    pub fn induced(&self, tgt: &CohomologyBasis, f: &ChainMap, k: i32) -> Result<ExactMatrix, AlgebraError> {
        let reps = self.representatives(k);
        let rows = tgt.dimension(k);
        let mut cols = Vec::with_capacity(reps.len());
        for z in reps {
            let image = match f.at_ref(k) {
                Some(m) => m.apply(z),
                None => SparseVec::new(),
            };
            let coords = tgt.coordinates(k, image)?;
            cols.push(coords.into_iter().enumerate().filter(|(_, x)| !x.is_zero()).collect());
        }
        ExactMatrix::from_columns(Ring::Rationals, rows, cols)
    }

    /// Trace of an endomorphism on `H^k`; only diagonal coordinates are read.
    pub fn trace(&self, f: &ChainMap, k: i32) -> Result<Q, AlgebraError> {
        let mut t = Q::zero();
        for (i, z) in self.representatives(k).iter().enumerate() {
            let image = match f.at_ref(k) {
                Some(m) => m.apply(z),
                None => SparseVec::new(),
            };
            t += &self.coordinates(k, image)?[i];
        }
        Ok(t)
    }
}

// Column reduction that records the combination of original columns; a zero
// result returns the kernel vector.
fn reduce_tracked(
    mut col: SparseVec,
    pivots: &mut HashMap<usize, SparseVec>,
    pivot_track: &mut HashMap<usize, SparseVec>,
    mut track: SparseVec,
) -> Option<SparseVec> {
    while let Some((&low, x)) = col.last_key_value() {
        match pivots.get(&low) {
            Some(p) => {
                let f = -x.clone();
                axpy(&mut col, &f, p);
                axpy(&mut track, &f, &pivot_track[&low]);
            }
            None => {
                let lead = x.clone();
                for y in col.values_mut() {
                    *y /= &lead;
                }
                for y in track.values_mut() {
                    *y /= &lead;
                }
                pivots.insert(low, col);
                pivot_track.insert(low, track);
                return None;
            }
        }
    }
    Some(track)
}

/// Induced maps on rational cohomology, one matrix per degree of the source.
pub fn induced_map_on_cohomology(
    src: &GradedComplex,
    tgt: &GradedComplex,
    f: &ChainMap,
) -> Result<Vec<(i32, ExactMatrix)>, AlgebraError> {
    f.validate(src, tgt)?;
    let bs = CohomologyBasis::new(src);
    let bt = CohomologyBasis::new(tgt);
    if src.is_empty() {
        return Ok(Vec::new());
    }
    src.degrees().map(|k| Ok((k, bs.induced(&bt, f, k)?))).collect()
}

/// Per-degree trace of a chain endomorphism on rational cohomology.
pub fn trace_on_cohomology(c: &GradedComplex, f: &ChainMap) -> Result<Vec<(i32, Q)>, AlgebraError> {
    f.validate(c, c)?;
    if c.is_empty() {
        return Ok(Vec::new());
    }
    let b = CohomologyBasis::new(c);
    c.degrees().map(|k| Ok((k, b.trace(f, k)?))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    fn check_snf(m: &ExactMatrix) -> SmithForm {
        let f = smith_normal_form(m).unwrap();
        assert_eq!(f.u.mul(m).unwrap().mul(&f.v).unwrap(), f.s);
        assert!(f.u.determinant().unwrap().abs().is_one());
        assert!(f.v.determinant().unwrap().abs().is_one());
        for (r, c, _) in f.s.entries() {
            assert_eq!(r, c);
        }
        let d = f.diagonal();
        for w in d.windows(2) {
            assert!((&w[1] % &w[0]).is_zero());
        }
        f
    }

    #[test]
    fn snf_small_cases() {
        let f = check_snf(&ExactMatrix::identity(Ring::Integers, 2));
        assert_eq!(f.diagonal(), ints(&[1, 1]));
        let f = check_snf(&ExactMatrix::zero(Ring::Integers, 2, 3));
        assert!(f.s.is_zero());
        let f = check_snf(&ExactMatrix::from_int_rows(&[vec![2, 4], vec![6, 8]]));
        assert_eq!(f.diagonal(), ints(&[2, 4]));
    }

    #[test]
    fn sparse_factors_agree_with_dense() {
        let m = ExactMatrix::from_int_rows(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let f = check_snf(&m);
        assert_eq!(invariant_factors(&m), f.diagonal());
        assert_eq!(f.diagonal(), ints(&[2, 6, 12]));
    }

    fn two_term(x: i64) -> GradedComplex {
        GradedComplex::new(
            Ring::Integers,
            0,
            vec![1, 1],
            vec![ExactMatrix::from_int_rows(&[vec![x]])],
            vec![vec!["a".into()], vec!["b".into()]],
        )
        .unwrap()
    }

    #[test]
    fn multiplication_by_two() {
        let h = cohomology(&two_term(2));
        assert_eq!(h.free_rank(0), 0);
        assert_eq!(h.free_rank(1), 0);
        assert_eq!(h.torsion(1), &ints(&[2])[..]);
        assert!(cohomology(&two_term(1)).is_zero());
        let h = cohomology(&two_term(0));
        assert_eq!((h.free_rank(0), h.free_rank(1)), (1, 1));
    }

    #[test]
    fn rejects_nonzero_square() {
        let d = ExactMatrix::from_int_rows(&[vec![1]]);
        let r = GradedComplex::new(
            Ring::Integers,
            0,
            vec![1, 1, 1],
            vec![d.clone(), d],
            vec![vec!["a".into()], vec!["b".into()], vec!["c".into()]],
        );
        assert_eq!(r.unwrap_err(), AlgebraError::NotAComplex(0));
    }

    #[test]
    fn traces_of_swap_and_identity() {
        let c = GradedComplex::new(
            Ring::Rationals,
            0,
            vec![2],
            vec![],
            vec![vec!["x".into(), "y".into()]],
        )
        .unwrap();
        let swap = ChainMap {
            min_degree: 0,
            maps: vec![ExactMatrix::from_int_rows(&[vec![0, 1], vec![1, 0]]).with_ring(Ring::Rationals).unwrap()],
        };
        assert_eq!(trace_on_cohomology(&c, &swap).unwrap(), vec![(0, q(0))]);
        assert_eq!(trace_on_cohomology(&c, &ChainMap::identity(&c)).unwrap(), vec![(0, q(2))]);
    }

    #[test]
    fn non_chain_map_rejected() {
        let c = two_term(1).with_ring(Ring::Rationals).unwrap();
        let f = ChainMap {
            min_degree: 0,
            maps: vec![ExactMatrix::identity(Ring::Rationals, 1), ExactMatrix::zero(Ring::Rationals, 1, 1)],
        };
        assert_eq!(trace_on_cohomology(&c, &f).unwrap_err(), AlgebraError::NotAChainMap(0));
    }
}
