//! Brute-force ground truth.
//!
//! Nothing here touches the transfer builders: configurations are plain
//! grids, windows are checked one at a time against the basic set, and the
//! staircase matrix uses its own state encoding.

use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Result, SftError};
use crate::matrix::SparseCountMatrix;
use crate::patterns::BasicSet;

/// Default budget of visited search nodes.
pub const DEFAULT_NODE_CAP: u64 = 1 << 30;

/// `[[n, ℓ], [0, k]]`-periodic torus: `U(i + n, j) = U(i, j)` and
/// `U(i + ℓ, j + k) = U(i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusSpec {
    pub n: usize,
    pub k: usize,
    pub ell: usize,
}

impl TorusSpec {
    pub fn new(n: usize, k: usize, ell: usize) -> Result<Self> {
        if n < 1 || k < 1 {
            return Err(SftError::InvalidSize(format!("torus {n}x{k} must be at least 1x1")));
        }
        if ell >= n {
            return Err(SftError::InvalidSize(format!("shear {ell} must be below width {n}")));
        }
        Ok(Self { n, k, ell })
    }

    /// Fundamental-domain cell of an arbitrary lattice point.
    pub fn reduce(&self, i: i64, j: i64) -> (usize, usize) {
        let (n, k, ell) = (self.n as i64, self.k as i64, self.ell as i64);
        let s = j.div_euclid(k);
        let jr = j - s * k;
        let ir = (i - s * ell).rem_euclid(n);
        (ir as usize, jr as usize)
    }
}

/// Depth-first filler shared by the strip and torus counters.
///
/// Cells are assigned in a fixed order; `checks[c]` lists the windows (as
/// `[bl, br, tl, tr]` cell ids) whose last-assigned cell is `c`.
struct Search<'a> {
    bs: &'a BasicSet,
    cells: usize,
    checks: Vec<Vec<[usize; 4]>>,
    cap: u64,
    visited: &'a AtomicU64,
}

impl Search<'_> {
    fn count_from(&self, grid: &mut [usize], c: usize) -> Result<BigUint> {
        if c == self.cells {
            return Ok(BigUint::one());
        }
        let mut total = BigUint::zero();
        let mut local = 0u64;
        for s in 0..self.bs.r() {
            grid[c] = s;
            local += 1;
            let ok = self.checks[c]
                .iter()
                .all(|w| self.bs.allows(grid[w[0]], grid[w[1]], grid[w[2]], grid[w[3]]));
            if ok {
                total += self.count_from(grid, c + 1)?;
            }
        }
        if self.visited.fetch_add(local, Ordering::Relaxed) + local > self.cap {
            return Err(SftError::CapExceeded(format!("search visited more than {} nodes", self.cap)));
        }
        Ok(total)
    }

    /// Splits on the first `split` cells and searches the rest in parallel.
    fn count(&self, split: usize) -> Result<BigUint> {
        let split = split.min(self.cells);
        let r = self.bs.r();
        let prefixes = r.pow(split as u32);
        let parts: Result<Vec<BigUint>> = (0..prefixes)
            .into_par_iter()
            .map(|mut p| {
                let mut grid = vec![0usize; self.cells];
                for c in (0..split).rev() {
                    grid[c] = p % r;
                    p /= r;
                }
                for c in 0..split {
                    let ok = self.checks[c]
                        .iter()
                        .all(|w| self.bs.allows(grid[w[0]], grid[w[1]], grid[w[2]], grid[w[3]]));
                    if !ok {
                        return Ok(BigUint::zero());
                    }
                }
                self.count_from(&mut grid, split)
            })
            .collect();
        Ok(parts?.into_iter().sum())
    }
}

fn split_depth(r: usize, cells: usize) -> usize {
    // Enough prefixes to keep the thread pool busy.
    let mut d = 0;
    while d < cells && r.pow(d as u32) < 256 {
        d += 1;
    }
    d
}

fn pow_big(r: usize, e: usize) -> BigUint {
    BigUint::from(r).pow(e as u32)
}

/// Admissible patterns on the strip of `n_rows` rows and `k_cols` columns.
pub fn count_strip(bs: &BasicSet, n_rows: usize, k_cols: usize) -> Result<BigUint> {
    count_strip_capped(bs, n_rows, k_cols, DEFAULT_NODE_CAP)
}

pub fn count_strip_capped(bs: &BasicSet, n_rows: usize, k_cols: usize, cap: u64) -> Result<BigUint> {
    if n_rows < 1 || k_cols < 1 {
        return Err(SftError::InvalidSize(format!("strip {n_rows}x{k_cols} must be at least 1x1")));
    }
    if n_rows == 1 || k_cols == 1 {
        return Ok(pow_big(bs.r(), n_rows * k_cols));
    }
    // Column by column, bottom to top: cell (x, y) has id x·n + y.
    let id = |x: usize, y: usize| x * n_rows + y;
    let cells = n_rows * k_cols;
    let mut checks = vec![Vec::new(); cells];
    for x in 1..k_cols {
        for y in 1..n_rows {
            checks[id(x, y)].push([id(x - 1, y - 1), id(x, y - 1), id(x - 1, y), id(x, y)]);
        }
    }
    let visited = AtomicU64::new(0);
    let search = Search {
        bs,
        cells,
        checks,
        cap,
        visited: &visited,
    };
    search.count(split_depth(bs.r(), cells))
}

/// Enumerates every assignment of the strip and checks all windows.
pub fn count_strip_naive(bs: &BasicSet, n_rows: usize, k_cols: usize) -> Result<BigUint> {
    let r = bs.r();
    let cells = n_rows * k_cols;
    let total = r
        .checked_pow(cells as u32)
        .filter(|&t| t <= 1 << 24)
        .ok_or_else(|| SftError::CapExceeded(format!("{r}^{cells} assignments")))?;
    let mut grid = vec![vec![0usize; k_cols]; n_rows];
    let mut count = 0u64;
    for code in 0..total {
        let mut c = code;
        for row in grid.iter_mut() {
            for v in row.iter_mut() {
                *v = c % r;
                c /= r;
            }
        }
        let ok = (0..n_rows.saturating_sub(1)).all(|y| {
            (0..k_cols.saturating_sub(1))
                .all(|x| bs.allows(grid[y][x], grid[y][x + 1], grid[y + 1][x], grid[y + 1][x + 1]))
        });
        count += ok as u64;
    }
    Ok(BigUint::from(count))
}

/// Admissible configurations that are periodic under the torus lattice.
pub fn count_torus(bs: &BasicSet, spec: TorusSpec) -> Result<BigUint> {
    count_torus_capped(bs, spec, DEFAULT_NODE_CAP)
}

pub fn count_torus_capped(bs: &BasicSet, spec: TorusSpec, cap: u64) -> Result<BigUint> {
    let TorusSpec { n, k, .. } = spec;
    // Row-major fill order: cell (x, y) has id y·n + x.
    let cells = n * k;
    let id = |(x, y): (usize, usize)| y * n + x;
    let mut checks = vec![Vec::new(); cells];
    for y in 0..k {
        for x in 0..n {
            let (xi, yi) = (x as i64, y as i64);
            let w = [
                id(spec.reduce(xi, yi)),
                id(spec.reduce(xi + 1, yi)),
                id(spec.reduce(xi, yi + 1)),
                id(spec.reduce(xi + 1, yi + 1)),
            ];
            let last = *w.iter().max().expect("four cells");
            checks[last].push(w);
        }
    }
    let visited = AtomicU64::new(0);
    let search = Search {
        bs,
        cells,
        checks,
        cap,
        visited: &visited,
    };
    search.count(split_depth(bs.r(), cells))
}

/// Transfer matrix on staircase states for the shear direction `(1, q)`.
///
/// A configuration periodic under `(1, q)` is determined by one column
/// `U(0, ·)`, and the column at `x + 1` is the column at `x` shifted down by
/// `q`. The state at height `y` is `(U(y−q), …, U(y))`; stepping up to `y+1`
/// is allowed iff the window with left column `(U(y), U(y+1))` and right
/// column `(U(y−q), U(y−q+1))` is admissible.
pub fn staircase_transfer(bs: &BasicSet, q: usize) -> Result<SparseCountMatrix> {
    if q < 1 {
        return Err(SftError::InvalidSize("q must be at least 1".into()));
    }
    let r = bs.r();
    let len = q + 1;
    let dim = r
        .checked_pow(len as u32)
        .ok_or_else(|| SftError::CapExceeded(format!("{r}^{len} states")))?;
    // State symbols oldest first, little-endian digits: symbol t at digit t.
    let symbol = |state: usize, t: usize| (state / r.pow(t as u32)) % r;
    let mut trip = Vec::new();
    for state in 0..dim {
        let oldest = symbol(state, 0);
        let second = symbol(state, 1);
        let newest = symbol(state, q);
        let shifted = state / r;
        for next in 0..r {
            if bs.allows(newest, oldest, next, second) {
                trip.push((state, shifted + next * r.pow(q as u32), 1u128));
            }
        }
    }
    let triplets = trip.into_iter().map(|(i, j, v)| (i + 1, j + 1, BigUint::from(v)));
    SparseCountMatrix::from_triplets(dim, triplets)
}

/// Real eigenvalue bracket `[lo, hi]` of width at most `1e−12`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenBracket {
    pub lo: f64,
    pub hi: f64,
}

impl EigenBracket {
    pub fn contains(&self, x: f64, slack: f64) -> bool {
        self.lo - slack <= x && x <= self.hi + slack
    }
}

type Poly = Vec<BigRational>;

fn det(m: &[Vec<BigInt>]) -> BigInt {
    match m.len() {
        0 => BigInt::one(),
        1 => m[0][0].clone(),
        n => (0..n)
            .map(|c| {
                let minor: Vec<Vec<BigInt>> = m[1..]
                    .iter()
                    .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| v.clone()).collect())
                    .collect();
                let term = &m[0][c] * det(&minor);
                if c % 2 == 0 {
                    term
                } else {
                    -term
                }
            })
            .sum(),
    }
}

/// Characteristic polynomial `det(λI − A)`, coefficients low degree first.
pub fn characteristic_polynomial(a: &SparseCountMatrix) -> Result<Vec<BigInt>> {
    let n = a.dim();
    if n > 4 {
        return Err(SftError::InvalidSize(format!("exact eigen check supports dim ≤ 4, got {n}")));
    }
    let dense: Vec<Vec<BigInt>> = (1..=n)
        .map(|i| (1..=n).map(|j| BigInt::from(a.get(i, j))).collect())
        .collect();
    // Coefficient of λ^{n−s} is (−1)^s times the sum of s×s principal minors.
    let mut coeffs = vec![BigInt::zero(); n + 1];
    for mask in 0u32..(1 << n) {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let s = idx.len();
        let sub: Vec<Vec<BigInt>> = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| dense[i][j].clone()).collect())
            .collect();
        let d = det(&sub);
        coeffs[n - s] += if s % 2 == 0 { d } else { -d };
    }
    Ok(coeffs)
}

fn trim(p: &mut Poly) {
    while p.len() > 1 && p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

fn eval(p: &Poly, x: &BigRational) -> BigRational {
    p.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
}

fn derivative(p: &Poly) -> Poly {
    let mut d: Poly = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
        .collect();
    if d.is_empty() {
        d.push(BigRational::zero());
    }
    d
}

fn rem(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.clone();
    let db = b.len() - 1;
    while r.len() > db && !is_zero_poly(&r) {
        let shift = r.len() - 1 - db;
        let f = r.last().expect("nonempty") / &b[db];
        for (i, c) in b.iter().enumerate() {
            r[i + shift] -= &f * c;
        }
        r.pop();
        if r.is_empty() {
            r.push(BigRational::zero());
        }
        trim(&mut r);
    }
    trim(&mut r);
    r
}

fn is_zero_poly(p: &Poly) -> bool {
    p.iter().all(Zero::is_zero)
}

fn gcd_poly(a: &Poly, b: &Poly) -> Poly {
    let (mut x, mut y) = (a.clone(), b.clone());
    while !is_zero_poly(&y) {
        let r = rem(&x, &y);
        x = y;
        y = r;
    }
    x
}

fn divide_exact(a: &Poly, b: &Poly) -> Poly {
    let db = b.len() - 1;
    if a.len() <= db {
        return vec![BigRational::zero()];
    }
    let mut r = a.clone();
    let mut q = vec![BigRational::zero(); a.len() - db];
    for shift in (0..q.len()).rev() {
        let f = &r[shift + db] / &b[db];
        for (i, c) in b.iter().enumerate() {
            r[i + shift] -= &f * c;
        }
        q[shift] = f;
    }
    q
}

fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![p.clone(), derivative(p)];
    loop {
        let n = chain.len();
        let r = rem(&chain[n - 2], &chain[n - 1]);
        if is_zero_poly(&r) {
            break;
        }
        chain.push(r.into_iter().map(|c| -c).collect());
    }
    chain
}

fn sign_changes(chain: &[Poly], x: &BigRational) -> usize {
    let signs: Vec<i8> = chain
        .iter()
        .map(|p| {
            let v = eval(p, x);
            if v.is_positive() {
                1
            } else if v.is_negative() {
                -1
            } else {
                0
            }
        })
        .filter(|&s| s != 0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Brackets every distinct real eigenvalue of a matrix of dimension at most 4.
pub fn exact_eigen_check(a: &SparseCountMatrix) -> Result<Vec<EigenBracket>> {
    let coeffs = characteristic_polynomial(a)?;
    let p: Poly = coeffs.into_iter().map(BigRational::from_integer).collect();
    if p.len() == 1 {
        return Ok(Vec::new());
    }
    let g = gcd_poly(&p, &derivative(&p));
    let sq = if g.len() > 1 { divide_exact(&p, &g) } else { p.clone() };
    let chain = sturm_chain(&sq);
    let lead = sq.last().expect("nonempty").abs();
    let bound = BigRational::one()
        + sq[..sq.len() - 1]
            .iter()
            .map(|c| c.abs() / &lead)
            .fold(BigRational::zero(), |m, c| if c > m { c } else { m });
    let width = BigRational::new(BigInt::one(), BigInt::from(10u64).pow(13));
    let mut out = Vec::new();
    let mut stack = vec![(-bound.clone(), bound)];
    // Sturm counts roots in (lo, hi].
    while let Some((lo, hi)) = stack.pop() {
        let count = sign_changes(&chain, &lo) - sign_changes(&chain, &hi);
        if count == 0 {
            continue;
        }
        let two = BigRational::from_integer(BigInt::from(2));
        if count > 1 {
            let mid = (&lo + &hi) / &two;
            stack.push((lo, mid.clone()));
            stack.push((mid, hi));
            continue;
        }
        let (mut a, mut b) = (lo, hi);
        while &b - &a > width {
            let mid = (&a + &b) / &two;
            if sign_changes(&chain, &a) - sign_changes(&chain, &mid) == 1 {
                b = mid;
            } else {
                a = mid;
            }
        }
        out.push(EigenBracket {
            lo: to_f64(&a),
            hi: to_f64(&b),
        });
    }
    out.sort_by(|x, y| x.lo.total_cmp(&y.lo));
    Ok(out)
}
