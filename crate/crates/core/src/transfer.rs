//! Transition matrices built from a basic set.
//!
//! * `H₂[i][j] = 1` iff the pattern with left column `unchi(i)` and right
//!   column `unchi(j)` is admissible (columns read bottom to top).
//! * `V₂[i][j] = 1` iff the pattern with bottom row `unchi(i)` and top row
//!   `unchi(j)` is admissible.
//! * `Hₙ`, `Vₘ` extend these to two-column strips of height `n` and two-row
//!   strips of width `m`; `Tₘ` adds the wrap-around window of a cylinder of
//!   circumference `m`.
//! * `T_{γ_q,1}` is the skew transfer matrix for the shear direction `(1, q)`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rayon::prelude::*;

use crate::error::{Result, SftError};
use crate::matrix::{PermutationMatrix, SparseCountMatrix};
use crate::patterns::{checked_pow, digits_0, sigma_0, BasicSet};

/// Default refusal threshold on matrix dimension.
pub const DEFAULT_DIM_CAP: usize = 1 << 16;

fn dim_for(r: usize, n: usize) -> Result<usize> {
    let d = checked_pow(r, n)?;
    if d > u32::MAX as usize {
        return Err(SftError::CapExceeded(format!("dimension {r}^{n} exceeds u32 indexing")));
    }
    Ok(d)
}

pub fn build_h2(bs: &BasicSet) -> SparseCountMatrix {
    let r = bs.r();
    let rows = (0..r * r)
        .map(|i| {
            let (bl, tl) = (i / r, i % r);
            (0..r * r)
                .filter(|j| bs.allows(bl, j / r, tl, j % r))
                .map(|j| j as u32)
                .collect()
        })
        .collect();
    SparseCountMatrix::from_rows_01(r * r, rows)
}

pub fn build_v2(bs: &BasicSet) -> SparseCountMatrix {
    let r = bs.r();
    let rows = (0..r * r)
        .map(|i| {
            let (bl, br) = (i / r, i % r);
            (0..r * r)
                .filter(|j| bs.allows(bl, br, j / r, j % r))
                .map(|j| j as u32)
                .collect()
        })
        .collect();
    SparseCountMatrix::from_rows_01(r * r, rows)
}

/// Applies one recursion step `A_{n+1} = (A_n ⊗ E_r) ∘ (E_{r^{n−1}} ⊗ A₂)`.
///
/// The Hadamard product is evaluated only on the support of the first factor:
/// entry `(i·r+a, j·r+b)` survives iff `A_n[i][j] = 1` and
/// `A₂[(i mod r)·r + a][(j mod r)·r + b] = 1`.
fn extend_step(prev: &SparseCountMatrix, base2: &SparseCountMatrix, r: usize) -> SparseCountMatrix {
    let n = prev.dim();
    let rows = (0..n * r)
        .into_par_iter()
        .map(|row| {
            let (i, a) = (row / r, row % r);
            let b_row = (i % r) * r + a;
            let mut out = Vec::new();
            for &j in prev.row_cols_0(i) {
                let j = j as usize;
                for &c in base2.row_cols_0(b_row) {
                    let c = c as usize;
                    if c / r == j % r {
                        out.push((j * r + c % r) as u32);
                    }
                }
            }
            out
        })
        .collect();
    SparseCountMatrix::from_rows_01(n * r, rows)
}

fn recursive(bs: &BasicSet, n: usize, base2: SparseCountMatrix) -> Result<SparseCountMatrix> {
    if n < 2 {
        return Err(SftError::InvalidSize(format!("strip height must be at least 2, got {n}")));
    }
    dim_for(bs.r(), n)?;
    let mut m = base2.clone();
    for _ in 2..n {
        m = extend_step(&m, &base2, bs.r());
    }
    Ok(m)
}

/// `Hₙ` by the Kronecker/Hadamard recursion from `H₂`.
pub fn build_hn(bs: &BasicSet, n: usize) -> Result<SparseCountMatrix> {
    recursive(bs, n, build_h2(bs))
}

/// `Vₘ` by the Kronecker/Hadamard recursion from `V₂`.
pub fn build_vm(bs: &BasicSet, m: usize) -> Result<SparseCountMatrix> {
    recursive(bs, m, build_v2(bs))
}

/// Enumerates, for each row word `a`, the column words `b` with every
/// window `f(a_t, b_t, a_{t+1}, b_{t+1})` admissible (plus the wrap window
/// when `wrap` is set).
fn strip_matrix<F>(r: usize, n: usize, wrap: bool, f: F) -> Result<SparseCountMatrix>
where
    F: Fn(usize, usize, usize, usize) -> bool + Sync,
{
    let dim = dim_for(r, n)?;
    let rows = (0..dim)
        .into_par_iter()
        .map(|i| {
            let a = digits_0(i, n, r);
            let mut out = Vec::new();
            let mut b = vec![0usize; n];
            extend_word(&a, &mut b, 0, r, wrap, &f, &mut out);
            out
        })
        .collect();
    Ok(SparseCountMatrix::from_rows_01(dim, rows))
}

fn extend_word<F>(a: &[usize], b: &mut [usize], t: usize, r: usize, wrap: bool, f: &F, out: &mut Vec<u32>)
where
    F: Fn(usize, usize, usize, usize) -> bool,
{
    let n = a.len();
    if t == n {
        if wrap && !f(a[n - 1], b[n - 1], a[0], b[0]) {
            return;
        }
        out.push(b.iter().fold(0, |acc, &d| acc * r + d) as u32);
        return;
    }
    for s in 0..r {
        b[t] = s;
        if t > 0 && !f(a[t - 1], b[t - 1], a[t], s) {
            continue;
        }
        extend_word(a, b, t + 1, r, wrap, f, out);
    }
}

/// `Hₙ` by checking every window of the two-column strip directly.
pub fn build_hn_direct(bs: &BasicSet, n: usize) -> Result<SparseCountMatrix> {
    if n < 2 {
        return Err(SftError::InvalidSize(format!("strip height must be at least 2, got {n}")));
    }
    strip_matrix(bs.r(), n, false, |l0, r0, l1, r1| bs.allows(l0, r0, l1, r1))
}

/// `Vₘ` by checking every window of the two-row strip directly.
pub fn build_vm_direct(bs: &BasicSet, m: usize) -> Result<SparseCountMatrix> {
    if m < 2 {
        return Err(SftError::InvalidSize(format!("strip width must be at least 2, got {m}")));
    }
    strip_matrix(bs.r(), m, false, |b0, t0, b1, t1| bs.allows(b0, b1, t0, t1))
}

/// Cylinder matrix `Tₘ` by direct window checks, wrapping columns mod `m`.
pub fn build_tm_direct(bs: &BasicSet, m: usize) -> Result<SparseCountMatrix> {
    if m < 1 {
        return Err(SftError::InvalidSize("circumference must be at least 1".into()));
    }
    strip_matrix(bs.r(), m, true, |b0, t0, b1, t1| bs.allows(b0, b1, t0, t1))
}

/// Cylinder matrix `Tₘ = Vₘ ∘ Wₘ`, where `Wₘ` carries the wrap-around window.
///
/// `Wₘ` has `r × r` outer blocks indexed by the first symbols `(u₁, w₁)` of
/// the bottom and top rows; each block is `E_{r^{m−2}} ⊗ H̃` with
/// `H̃[u_m][w_m] = H₂[χ(u_m, w_m)][χ(u₁, w₁)]`. For `m = 1` the single column
/// wraps onto itself.
pub fn build_tm(bs: &BasicSet, m: usize) -> Result<SparseCountMatrix> {
    match m {
        0 => Err(SftError::InvalidSize("circumference must be at least 1".into())),
        1 => build_tm_direct(bs, 1),
        _ => {
            let r = bs.r();
            let v = build_vm(bs, m)?;
            let h2 = build_h2(bs);
            let dim = v.dim();
            let lead = dim / r;
            let rows = (0..dim)
                .into_par_iter()
                .map(|i| {
                    let (u1, um) = (i / lead, i % r);
                    v.row_cols_0(i)
                        .iter()
                        .copied()
                        .filter(|&j| {
                            let j = j as usize;
                            h2.has_0(um * r + j % r, u1 * r + j / lead)
                        })
                        .collect()
                })
                .collect();
            Ok(SparseCountMatrix::from_rows_01(dim, rows))
        }
    }
}

/// `T̂ₘ`: the cylinder matrix of the reflected basic set.
pub fn build_hat_tm(bs: &BasicSet, m: usize) -> Result<SparseCountMatrix> {
    build_tm(&bs.reflect(), m)
}

/// Rotation `Rₘ` with `Rₘ[i][σ(i)] = 1`.
pub fn build_rm(m: usize, r: usize) -> Result<PermutationMatrix> {
    if m < 1 {
        return Err(SftError::InvalidSize("rotation length must be at least 1".into()));
    }
    let dim = dim_for(r, m)?;
    let lead = dim / r;
    Ok(PermutationMatrix::from_map_0(
        (0..dim).map(|i| sigma_0(i, r, lead)).collect(),
    ))
}

/// Transfer matrix along the shear direction `(1, q)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkewTransfer {
    pub q: usize,
    pub matrix: SparseCountMatrix,
}

/// `T_{γ_q,1}` from its block layout.
///
/// Rows are split into `r²` block rows `b = χ(u₁, u₂)` of height `r^{q−1}`.
/// Block row `b` holds `I_{r^{q−2}} ⊗ A_b` in block column `u₂` (width `r^q`),
/// where `A_b` is `r × r²` with `A_b[s][s·r + t] = [x_{χ(s,t), b} ∈ ℬ]`.
/// For `q = 1`, row `b` has `x_{χ(u₂,t), b}` at column `χ(u₂, t)`.
pub fn build_t_gamma_q_1(bs: &BasicSet, q: usize) -> Result<SkewTransfer> {
    if q < 1 {
        return Err(SftError::InvalidSize("q must be at least 1".into()));
    }
    let r = bs.r();
    let dim = dim_for(r, q + 1)?;
    // x_{i1,i2}: left column unchi(i1), right column unchi(i2).
    let x = |i1: usize, i2: usize| bs.allows(i1 / r, i2 / r, i1 % r, i2 % r);
    let mut rows: Vec<Vec<u32>> = vec![Vec::new(); dim];
    if q == 1 {
        for (b, row) in rows.iter_mut().enumerate() {
            let s = b % r;
            for t in 0..r {
                if x(s * r + t, b) {
                    row.push((s * r + t) as u32);
                }
            }
        }
    } else {
        let block_h = dim / (r * r);
        let block_w = dim / r;
        let ident = block_h / r;
        for b in 0..r * r {
            let col_off = (b % r) * block_w;
            for p in 0..ident {
                for s in 0..r {
                    let row = &mut rows[b * block_h + p * r + s];
                    for t in 0..r {
                        if x(s * r + t, b) {
                            row.push((col_off + p * r * r + s * r + t) as u32);
                        }
                    }
                }
            }
        }
    }
    Ok(SkewTransfer {
        q,
        matrix: SparseCountMatrix::from_rows_01(dim, rows),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransferKind {
    Horizontal,
    Vertical,
    CylinderH,
    CylinderV,
}

/// Lazily built `Hₙ`, `Vₘ`, `Tₘ` or `T̂ₘ` for one basic set, cached by size.
#[derive(Debug)]
pub struct TransferFamily {
    bs: BasicSet,
    kind: TransferKind,
    dim_cap: usize,
    cache: RwLock<HashMap<usize, Arc<SparseCountMatrix>>>,
}

impl TransferFamily {
    pub fn new(bs: BasicSet, kind: TransferKind) -> Self {
        Self::with_dim_cap(bs, kind, DEFAULT_DIM_CAP)
    }

    pub fn with_dim_cap(bs: BasicSet, kind: TransferKind, dim_cap: usize) -> Self {
        Self {
            bs,
            kind,
            dim_cap,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn basic_set(&self) -> &BasicSet {
        &self.bs
    }

    pub fn kind(&self) -> TransferKind {
        self.kind
    }

    pub fn dim_cap(&self) -> usize {
        self.dim_cap
    }

    /// Matrix of size `n`; concurrent callers may build it twice, the first
    /// insert wins.
    pub fn get(&self, n: usize) -> Result<Arc<SparseCountMatrix>> {
        if let Some(m) = self.cache.read().expect("cache lock").get(&n) {
            return Ok(Arc::clone(m));
        }
        check_cap(self.bs.r(), n, self.dim_cap)?;
        let built = Arc::new(match self.kind {
            TransferKind::Horizontal => build_hn(&self.bs, n)?,
            TransferKind::Vertical => build_vm(&self.bs, n)?,
            TransferKind::CylinderH => build_tm(&self.bs, n)?,
            TransferKind::CylinderV => build_hat_tm(&self.bs, n)?,
        });
        let mut cache = self.cache.write().expect("cache lock");
        Ok(Arc::clone(cache.entry(n).or_insert(built)))
    }
}

/// Errors with `CapExceeded` when `r^n` rows would exceed `cap`.
pub fn check_cap(r: usize, n: usize, cap: usize) -> Result<()> {
    match checked_pow(r, n) {
        Ok(d) if d <= cap => Ok(()),
        _ => Err(SftError::CapExceeded(format!("{r}^{n} rows exceed dimension cap {cap}"))),
    }
}
