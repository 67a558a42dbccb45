//! Sparse square matrices with nonnegative arbitrary-precision integer entries.
//!
//! Storage is CSR with sorted column indices and strictly positive stored
//! values. Entries are kept as `u128` while every value fits and promoted to
//! [`BigUint`] otherwise; the public surface always speaks `BigUint`, and
//! equality compares values, not storage.

use std::fmt::Write as _;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Result, SftError};

#[derive(Debug, Clone)]
enum Values {
    Small(Vec<u128>),
    Big(Vec<BigUint>),
}

impl Values {
    fn big(&self, k: usize) -> BigUint {
        match self {
            Values::Small(v) => BigUint::from(v[k]),
            Values::Big(v) => v[k].clone(),
        }
    }

    fn to_big_vec(&self) -> Vec<BigUint> {
        match self {
            Values::Small(v) => v.iter().map(|&x| BigUint::from(x)).collect(),
            Values::Big(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SparseCountMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Values,
}

impl PartialEq for SparseCountMatrix {
    fn eq(&self, other: &Self) -> bool {
        if self.dim != other.dim || self.row_ptr != other.row_ptr || self.cols != other.cols {
            return false;
        }
        match (&self.vals, &other.vals) {
            (Values::Small(a), Values::Small(b)) => a == b,
            _ => self.vals.to_big_vec() == other.vals.to_big_vec(),
        }
    }
}

impl Eq for SparseCountMatrix {}

impl SparseCountMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            cols: Vec::new(),
            vals: Values::Small(Vec::new()),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            cols: (0..dim as u32).collect(),
            vals: Values::Small(vec![1; dim]),
        }
    }

    /// `E_N`: every entry equal to one.
    pub fn ones(dim: usize) -> Self {
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::with_capacity(dim * dim);
        row_ptr.push(0);
        for _ in 0..dim {
            cols.extend(0..dim as u32);
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            vals: Values::Small(vec![1; cols.len()]),
            cols,
        }
    }

    /// Build from dense rows of small integers (test fixtures, literals).
    pub fn from_dense(rows: &[Vec<u64>]) -> Result<Self> {
        let dim = rows.len();
        let mut trip = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(SftError::DimensionMismatch {
                    left: dim,
                    right: row.len(),
                });
            }
            for (j, &v) in row.iter().enumerate() {
                if v != 0 {
                    trip.push((i, j, v as u128));
                }
            }
        }
        Ok(Self::from_triplets_0(dim, trip))
    }

    /// Build from 1-based `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets<I>(dim: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, BigUint)>,
    {
        let mut small = Vec::new();
        let mut big = Vec::new();
        for (i, j, v) in triplets {
            for idx in [i, j] {
                if idx < 1 || idx > dim {
                    return Err(SftError::IndexOutOfRange {
                        index: idx,
                        max: dim,
                    });
                }
            }
            match v.to_u128() {
                Some(x) => small.push((i - 1, j - 1, x)),
                None => big.push((i - 1, j - 1, v)),
            }
        }
        if big.is_empty() {
            return Ok(Self::from_triplets_0(dim, small));
        }
        big.extend(small.into_iter().map(|(i, j, v)| (i, j, BigUint::from(v))));
        Ok(Self::from_big_triplets_0(dim, big))
    }

    /// 0-based triplets with `u128` values; duplicates are summed, zeros dropped.
    pub(crate) fn from_triplets_0(dim: usize, mut trip: Vec<(usize, usize, u128)>) -> Self {
        trip.sort_unstable_by_key(|&(i, j, _)| (i, j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols: Vec<u32> = Vec::with_capacity(trip.len());
        let mut vals: Vec<u128> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        let mut overflow = false;
        for (i, j, v) in &trip {
            debug_assert!(*i < dim && *j < dim);
            if last == Some((*i, *j)) {
                let slot = vals.last_mut().expect("previous entry");
                match slot.checked_add(*v) {
                    Some(s) => *slot = s,
                    None => overflow = true,
                }
            } else {
                cols.push(*j as u32);
                vals.push(*v);
                row_ptr[*i + 1] += 1;
                last = Some((*i, *j));
            }
        }
        if overflow {
            let big = trip
                .into_iter()
                .map(|(i, j, v)| (i, j, BigUint::from(v)))
                .collect();
            return Self::from_big_triplets_0(dim, big);
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = Self {
            dim,
            row_ptr,
            cols,
            vals: Values::Small(vals),
        };
        m.drop_zeros();
        m
    }

    /// 0/1 matrix from per-row sorted, duplicate-free 0-based column lists.
    pub(crate) fn from_rows_01(dim: usize, rows: Vec<Vec<u32>>) -> Self {
        debug_assert_eq!(rows.len(), dim);
        let total = rows.iter().map(Vec::len).sum();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::with_capacity(total);
        row_ptr.push(0);
        for r in rows {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]));
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        Self {
            dim,
            row_ptr,
            vals: Values::Small(vec![1; total]),
            cols,
        }
    }

    fn from_big_triplets_0(dim: usize, mut trip: Vec<(usize, usize, BigUint)>) -> Self {
        trip.sort_by_key(|(i, j, _)| (*i, *j));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols: Vec<u32> = Vec::new();
        let mut vals: Vec<BigUint> = Vec::new();
        let mut last = None;
        for (i, j, v) in trip {
            if last == Some((i, j)) {
                *vals.last_mut().expect("previous entry") += v;
            } else {
                cols.push(j as u32);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..dim {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut m = Self {
            dim,
            row_ptr,
            cols,
            vals: Values::Big(vals),
        };
        m.drop_zeros();
        m.normalize();
        m
    }

    fn drop_zeros(&mut self) {
        let has_zero = match &self.vals {
            Values::Small(v) => v.contains(&0),
            Values::Big(v) => v.iter().any(Zero::is_zero),
        };
        if !has_zero {
            return;
        }
        let mut row_ptr = vec![0usize; self.dim + 1];
        let mut cols = Vec::new();
        let mut small = Vec::new();
        let mut big = Vec::new();
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let keep = match &self.vals {
                    Values::Small(v) => {
                        if v[k] != 0 {
                            small.push(v[k]);
                        }
                        v[k] != 0
                    }
                    Values::Big(v) => {
                        if !v[k].is_zero() {
                            big.push(v[k].clone());
                        }
                        !v[k].is_zero()
                    }
                };
                if keep {
                    cols.push(self.cols[k]);
                }
            }
            row_ptr[i + 1] = cols.len();
        }
        self.row_ptr = row_ptr;
        self.cols = cols;
        self.vals = match self.vals {
            Values::Small(_) => Values::Small(small),
            Values::Big(_) => Values::Big(big),
        };
    }

    /// Demote big storage back to `u128` when every value fits.
    fn normalize(&mut self) {
        if let Values::Big(v) = &self.vals {
            let small: Option<Vec<u128>> = v.iter().map(ToPrimitive::to_u128).collect();
            if let Some(s) = small {
                self.vals = Values::Small(s);
            }
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored (strictly positive) entries.
    #[inline]
    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.is_empty()
    }

    /// Entry at 1-based `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> BigUint {
        assert!(i >= 1 && i <= self.dim && j >= 1 && j <= self.dim, "index out of range");
        match self.find_0(i - 1, j - 1) {
            Some(k) => self.vals.big(k),
            None => BigUint::zero(),
        }
    }

    #[inline]
    fn find_0(&self, i: usize, j: usize) -> Option<usize> {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.cols[lo..hi]
            .binary_search(&(j as u32))
            .ok()
            .map(|off| lo + off)
    }

    #[inline]
    pub(crate) fn has_0(&self, i: usize, j: usize) -> bool {
        self.find_0(i, j).is_some()
    }

    /// Column indices (0-based) of the stored entries of row `i` (0-based).
    #[inline]
    pub(crate) fn row_cols_0(&self, i: usize) -> &[u32] {
        &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Sorted row-major iteration over stored entries, 1-based.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, BigUint)> + '_ {
        (0..self.dim).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(move |k| (i + 1, self.cols[k] as usize + 1, self.vals.big(k)))
        })
    }

    /// True when every stored entry equals one.
    pub fn is_zero_one(&self) -> bool {
        match &self.vals {
            Values::Small(v) => v.iter().all(|&x| x == 1),
            Values::Big(_) => false,
        }
    }

    /// The 0/1 matrix with the same nonzero pattern.
    pub fn support(&self) -> Self {
        Self {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals: Values::Small(vec![1; self.cols.len()]),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut trip_small = Vec::with_capacity(self.nnz());
        let mut trip_big = Vec::new();
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.cols[k] as usize;
                match &self.vals {
                    Values::Small(v) => trip_small.push((j, i, v[k])),
                    Values::Big(v) => trip_big.push((j, i, v[k].clone())),
                }
            }
        }
        match self.vals {
            Values::Small(_) => Self::from_triplets_0(self.dim, trip_small),
            Values::Big(_) => Self::from_big_triplets_0(self.dim, trip_big),
        }
    }

    /// Principal submatrix on the given 0-based indices (in the given order).
    pub fn principal_submatrix(&self, indices: &[usize]) -> Self {
        let mut pos = vec![usize::MAX; self.dim];
        for (new, &old) in indices.iter().enumerate() {
            pos[old] = new;
        }
        let mut small = Vec::new();
        let mut big = Vec::new();
        for (new_i, &old_i) in indices.iter().enumerate() {
            for k in self.row_ptr[old_i]..self.row_ptr[old_i + 1] {
                let new_j = pos[self.cols[k] as usize];
                if new_j == usize::MAX {
                    continue;
                }
                match &self.vals {
                    Values::Small(v) => small.push((new_i, new_j, v[k])),
                    Values::Big(v) => big.push((new_i, new_j, v[k].clone())),
                }
            }
        }
        match self.vals {
            Values::Small(_) => Self::from_triplets_0(indices.len(), small),
            Values::Big(_) => Self::from_big_triplets_0(indices.len(), big),
        }
    }

    /// `A·P` for the permutation matrix `P` with `P[s][π(s)] = 1`.
    pub fn mul_permutation(&self, p: &PermutationMatrix) -> Result<Self> {
        check_dims(self.dim, p.dim())?;
        let mut small = Vec::new();
        let mut big = Vec::new();
        for i in 0..self.dim {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = p.map_0[self.cols[k] as usize];
                match &self.vals {
                    Values::Small(v) => small.push((i, j, v[k])),
                    Values::Big(v) => big.push((i, j, v[k].clone())),
                }
            }
        }
        Ok(match self.vals {
            Values::Small(_) => Self::from_triplets_0(self.dim, small),
            Values::Big(_) => Self::from_big_triplets_0(self.dim, big),
        })
    }

    pub fn entry_sum(&self) -> BigUint {
        match &self.vals {
            Values::Small(v) => sum_u128(v.iter().copied()),
            Values::Big(v) => v.iter().sum(),
        }
    }

    pub fn trace(&self) -> BigUint {
        let mut small: Vec<u128> = Vec::new();
        let mut big = BigUint::zero();
        for i in 0..self.dim {
            if let Some(k) = self.find_0(i, i) {
                match &self.vals {
                    Values::Small(v) => small.push(v[k]),
                    Values::Big(v) => big += &v[k],
                }
            }
        }
        big + sum_u128(small.into_iter())
    }

    /// Row sums as exact integers (0-based rows).
    pub fn row_sums(&self) -> Vec<BigUint> {
        (0..self.dim)
            .map(|i| match &self.vals {
                Values::Small(v) => sum_u128(v[self.row_ptr[i]..self.row_ptr[i + 1]].iter().copied()),
                Values::Big(v) => v[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum(),
            })
            .collect()
    }

    /// Matrix debug dump: header `dim=<N>` then `i j v` lines, row-major, 1-based.
    pub fn debug_dump(&self) -> String {
        let mut out = format!("dim={}\n", self.dim);
        for (i, j, v) in self.iter() {
            let _ = writeln!(out, "{i} {j} {v}");
        }
        out
    }

    pub fn parse_dump(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| SftError::Parse("empty matrix dump".into()))?;
        let dim: usize = header
            .strip_prefix("dim=")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| SftError::Parse(format!("bad header `{header}`")))?;
        let mut trip = Vec::new();
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(SftError::Parse(format!("bad triplet `{line}`")));
            }
            let i = parts[0].parse().map_err(|_| SftError::Parse(line.into()))?;
            let j = parts[1].parse().map_err(|_| SftError::Parse(line.into()))?;
            let v: BigUint = parts[2].parse().map_err(|_| SftError::Parse(line.into()))?;
            trip.push((i, j, v));
        }
        Self::from_triplets(dim, trip)
    }

    /// Double-precision snapshot with every entry divided by `scale`.
    pub fn float_view(&self, scale: f64) -> Result<FloatMatrix> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(SftError::Overflow(format!("invalid scale {scale}")));
        }
        let vals: Vec<f64> = match &self.vals {
            Values::Small(v) => v.iter().map(|&x| x as f64 / scale).collect(),
            Values::Big(v) => v
                .iter()
                .map(|x| x.to_f64().unwrap_or(f64::INFINITY) / scale)
                .collect(),
        };
        if vals.iter().any(|x| !x.is_finite()) {
            return Err(SftError::Overflow("entry not representable as f64".into()));
        }
        Ok(FloatMatrix {
            dim: self.dim,
            row_ptr: self.row_ptr.clone(),
            cols: self.cols.clone(),
            vals,
        })
    }

    /// `Σᵢⱼ (A^k)ᵢⱼ` by propagating the all-ones vector; never forms `A^k`.
    pub fn power_entry_sum(&self, k: u32) -> BigUint {
        if let Values::Small(v) = &self.vals {
            if let Some(s) = self.power_entry_sum_small(v, k) {
                return s;
            }
        }
        let vals = self.vals.to_big_vec();
        let mut x = vec![BigUint::one(); self.dim];
        for _ in 0..k {
            x = (0..self.dim)
                .into_par_iter()
                .map(|i| {
                    (self.row_ptr[i]..self.row_ptr[i + 1])
                        .map(|p| &vals[p] * &x[self.cols[p] as usize])
                        .sum()
                })
                .collect();
        }
        x.into_iter().sum()
    }

    fn power_entry_sum_small(&self, vals: &[u128], k: u32) -> Option<BigUint> {
        let mut x = vec![1u128; self.dim];
        for _ in 0..k {
            let next: Option<Vec<u128>> = (0..self.dim)
                .into_par_iter()
                .map(|i| {
                    let mut acc: u128 = 0;
                    for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                        acc = acc.checked_add(vals[p].checked_mul(x[self.cols[p] as usize])?)?;
                    }
                    Some(acc)
                })
                .collect();
            x = next?;
        }
        Some(sum_u128(x.into_iter()))
    }

    /// `tr(A^k)` via `tr(A^⌈k/2⌉ · A^⌊k/2⌋)`, avoiding the full `k`-th power.
    pub fn power_trace(&self, k: u32) -> BigUint {
        match k {
            0 => BigUint::from(self.dim),
            1 => self.trace(),
            _ => {
                let half = matpow(self, k / 2);
                let other = if k % 2 == 0 {
                    half.clone()
                } else {
                    multiply(&half, self).expect("same dimension")
                };
                trace_product(&other, &half).expect("same dimension")
            }
        }
    }
}

fn sum_u128<I: Iterator<Item = u128>>(it: I) -> BigUint {
    let mut acc: u128 = 0;
    let mut big = BigUint::zero();
    for x in it {
        match acc.checked_add(x) {
            Some(s) => acc = s,
            None => {
                big += BigUint::from(acc);
                acc = x;
            }
        }
    }
    big + BigUint::from(acc)
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a == b {
        Ok(())
    } else {
        Err(SftError::DimensionMismatch { left: a, right: b })
    }
}

/// Entrywise product.
pub fn hadamard(a: &SparseCountMatrix, b: &SparseCountMatrix) -> Result<SparseCountMatrix> {
    check_dims(a.dim, b.dim)?;
    let mut small = Vec::new();
    let mut big = Vec::new();
    let mut any_big = false;
    for i in 0..a.dim {
        for ka in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.cols[ka] as usize;
            if let Some(kb) = b.find_0(i, j) {
                match (&a.vals, &b.vals) {
                    (Values::Small(x), Values::Small(y)) if !any_big => {
                        match x[ka].checked_mul(y[kb]) {
                            Some(p) => small.push((i, j, p)),
                            None => {
                                any_big = true;
                                big.push((i, j, a.vals.big(ka) * b.vals.big(kb)));
                            }
                        }
                    }
                    _ => {
                        any_big = true;
                        big.push((i, j, a.vals.big(ka) * b.vals.big(kb)));
                    }
                }
            }
        }
    }
    if !any_big {
        return Ok(SparseCountMatrix::from_triplets_0(a.dim, small));
    }
    big.extend(small.into_iter().map(|(i, j, v)| (i, j, BigUint::from(v))));
    Ok(SparseCountMatrix::from_big_triplets_0(a.dim, big))
}

/// Kronecker product; the result has dimension `dim(a)·dim(b)`.
pub fn kronecker(a: &SparseCountMatrix, b: &SparseCountMatrix) -> SparseCountMatrix {
    let n = a.dim * b.dim;
    let mut small = Vec::with_capacity(a.nnz() * b.nnz());
    let mut big = Vec::new();
    let mut any_big = !matches!((&a.vals, &b.vals), (Values::Small(_), Values::Small(_)));
    for ia in 0..a.dim {
        for ka in a.row_ptr[ia]..a.row_ptr[ia + 1] {
            let ja = a.cols[ka] as usize;
            for ib in 0..b.dim {
                for kb in b.row_ptr[ib]..b.row_ptr[ib + 1] {
                    let jb = b.cols[kb] as usize;
                    let (i, j) = (ia * b.dim + ib, ja * b.dim + jb);
                    if !any_big {
                        if let (Values::Small(x), Values::Small(y)) = (&a.vals, &b.vals) {
                            if let Some(p) = x[ka].checked_mul(y[kb]) {
                                small.push((i, j, p));
                                continue;
                            }
                        }
                        any_big = true;
                    }
                    big.push((i, j, a.vals.big(ka) * b.vals.big(kb)));
                }
            }
        }
    }
    if !any_big {
        return SparseCountMatrix::from_triplets_0(n, small);
    }
    big.extend(small.into_iter().map(|(i, j, v)| (i, j, BigUint::from(v))));
    SparseCountMatrix::from_big_triplets_0(n, big)
}

/// Exact product `A·B`.
pub fn multiply(a: &SparseCountMatrix, b: &SparseCountMatrix) -> Result<SparseCountMatrix> {
    check_dims(a.dim, b.dim)?;
    if let (Values::Small(x), Values::Small(y)) = (&a.vals, &b.vals) {
        if let Some(m) = multiply_small(a, x, b, y) {
            return Ok(m);
        }
    }
    Ok(multiply_big(a, b))
}

fn multiply_small(
    a: &SparseCountMatrix,
    av: &[u128],
    b: &SparseCountMatrix,
    bv: &[u128],
) -> Option<SparseCountMatrix> {
    let n = a.dim;
    let rows: Option<Vec<(Vec<u32>, Vec<u128>)>> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![0u128; n], vec![false; n], Vec::<u32>::new()),
            |(acc, seen, touched), i| {
                touched.clear();
                for ka in a.row_ptr[i]..a.row_ptr[i + 1] {
                    let s = a.cols[ka] as usize;
                    let x = av[ka];
                    for kb in b.row_ptr[s]..b.row_ptr[s + 1] {
                        let j = b.cols[kb] as usize;
                        let p = x.checked_mul(bv[kb])?;
                        acc[j] = acc[j].checked_add(p)?;
                        if !seen[j] {
                            seen[j] = true;
                            touched.push(j as u32);
                        }
                    }
                }
                touched.sort_unstable();
                let mut vals = Vec::with_capacity(touched.len());
                for &j in touched.iter() {
                    vals.push(acc[j as usize]);
                    acc[j as usize] = 0;
                    seen[j as usize] = false;
                }
                Some((touched.clone(), vals))
            },
        )
        .collect();
    Some(assemble(n, rows?, Values::Small))
}

fn multiply_big(a: &SparseCountMatrix, b: &SparseCountMatrix) -> SparseCountMatrix {
    let n = a.dim;
    let av = a.vals.to_big_vec();
    let bv = b.vals.to_big_vec();
    let rows: Vec<(Vec<u32>, Vec<BigUint>)> = (0..n)
        .into_par_iter()
        .map_init(
            || (vec![BigUint::zero(); n], vec![false; n], Vec::<u32>::new()),
            |(acc, seen, touched), i| {
                touched.clear();
                for ka in a.row_ptr[i]..a.row_ptr[i + 1] {
                    let s = a.cols[ka] as usize;
                    for kb in b.row_ptr[s]..b.row_ptr[s + 1] {
                        let j = b.cols[kb] as usize;
                        acc[j] += &av[ka] * &bv[kb];
                        if !seen[j] {
                            seen[j] = true;
                            touched.push(j as u32);
                        }
                    }
                }
                touched.sort_unstable();
                let mut vals = Vec::with_capacity(touched.len());
                for &j in touched.iter() {
                    vals.push(std::mem::take(&mut acc[j as usize]));
                    seen[j as usize] = false;
                }
                (touched.clone(), vals)
            },
        )
        .collect();
    let mut m = assemble(n, rows, Values::Big);
    m.normalize();
    m
}

fn assemble<T>(
    n: usize,
    rows: Vec<(Vec<u32>, Vec<T>)>,
    wrap: impl FnOnce(Vec<T>) -> Values,
) -> SparseCountMatrix {
    let total: usize = rows.iter().map(|r| r.0.len()).sum();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(total);
    let mut vals = Vec::with_capacity(total);
    row_ptr.push(0);
    for (c, v) in rows {
        cols.extend(c);
        vals.extend(v);
        row_ptr.push(cols.len());
    }
    SparseCountMatrix {
        dim: n,
        row_ptr,
        cols,
        vals: wrap(vals),
    }
}

/// `A^k` by repeated squaring; `A⁰ = I`.
pub fn matpow(a: &SparseCountMatrix, k: u32) -> SparseCountMatrix {
    let mut result: Option<SparseCountMatrix> = None;
    let mut base = a.clone();
    let mut e = k;
    while e > 0 {
        if e & 1 == 1 {
            result = Some(match result {
                None => base.clone(),
                Some(r) => multiply(&r, &base).expect("same dimension"),
            });
        }
        e >>= 1;
        if e > 0 {
            base = multiply(&base, &base).expect("same dimension");
        }
    }
    result.unwrap_or_else(|| SparseCountMatrix::identity(a.dim))
}

/// `tr(A·B) = Σᵢⱼ Aᵢⱼ Bⱼᵢ`.
pub fn trace_product(a: &SparseCountMatrix, b: &SparseCountMatrix) -> Result<BigUint> {
    check_dims(a.dim, b.dim)?;
    if let (Values::Small(x), Values::Small(y)) = (&a.vals, &b.vals) {
        let partial: Option<Vec<u128>> = (0..a.dim)
            .into_par_iter()
            .map(|i| {
                let mut acc: u128 = 0;
                for ka in a.row_ptr[i]..a.row_ptr[i + 1] {
                    let j = a.cols[ka] as usize;
                    if let Some(kb) = b.find_0(j, i) {
                        acc = acc.checked_add(x[ka].checked_mul(y[kb])?)?;
                    }
                }
                Some(acc)
            })
            .collect();
        if let Some(p) = partial {
            return Ok(sum_u128(p.into_iter()));
        }
    }
    let mut total = BigUint::zero();
    for i in 0..a.dim {
        for ka in a.row_ptr[i]..a.row_ptr[i + 1] {
            let j = a.cols[ka] as usize;
            if let Some(kb) = b.find_0(j, i) {
                total += a.vals.big(ka) * b.vals.big(kb);
            }
        }
    }
    Ok(total)
}

/// Natural logarithm of a (possibly huge) positive integer; `-inf` for zero.
pub fn big_ln(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("finite below 2^1000").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_u64().expect("64 leading bits") as f64;
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// A permutation matrix `P` with `P[i][π(i)] = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermutationMatrix {
    map_0: Vec<usize>,
}

impl PermutationMatrix {
    /// From a 1-based mapping `π: [1,N] → [1,N]`.
    pub fn new(mapping: Vec<usize>) -> Result<Self> {
        let n = mapping.len();
        let mut seen = vec![false; n];
        let mut map_0 = Vec::with_capacity(n);
        for &j in &mapping {
            if j < 1 || j > n {
                return Err(SftError::IndexOutOfRange { index: j, max: n });
            }
            if std::mem::replace(&mut seen[j - 1], true) {
                return Err(SftError::InvalidSize(format!("{j} appears twice; not a bijection")));
            }
            map_0.push(j - 1);
        }
        Ok(Self { map_0 })
    }

    pub(crate) fn from_map_0(map_0: Vec<usize>) -> Self {
        debug_assert!({
            let mut s = map_0.clone();
            s.sort_unstable();
            s.iter().enumerate().all(|(i, &v)| i == v)
        });
        Self { map_0 }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            map_0: (0..dim).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.map_0.len()
    }

    /// `π(i)`, 1-based.
    pub fn image(&self, i: usize) -> usize {
        self.map_0[i - 1] + 1
    }

    pub fn is_identity(&self) -> bool {
        self.map_0.iter().enumerate().all(|(i, &j)| i == j)
    }

    /// `P·Q`: row `i` of `P` picks row `π(i)` of `Q`, so the product maps `i ↦ τ(π(i))`.
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            map_0: self.map_0.iter().map(|&j| other.map_0[j]).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut result = Self::identity(self.dim());
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = result.compose(&base);
            }
            base = base.compose(&base);
            e >>= 1;
        }
        result
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.dim()];
        for (i, &j) in self.map_0.iter().enumerate() {
            inv[j] = i;
        }
        Self { map_0: inv }
    }

    pub fn to_matrix(&self) -> SparseCountMatrix {
        SparseCountMatrix::from_triplets_0(
            self.dim(),
            self.map_0.iter().enumerate().map(|(i, &j)| (i, j, 1)).collect(),
        )
    }
}

/// Read-only `f64` CSR copy of a count matrix.
#[derive(Debug, Clone)]
pub struct FloatMatrix {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl FloatMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let lo = self.row_ptr[i - 1];
        let hi = self.row_ptr[i];
        match self.cols[lo..hi].binary_search(&((j - 1) as u32)) {
            Ok(off) => self.vals[lo + off],
            Err(_) => 0.0,
        }
    }

    /// `y = A·x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (self.row_ptr[i]..self.row_ptr[i + 1])
                .map(|k| self.vals[k] * x[self.cols[k] as usize])
                .sum();
        }
    }
}
