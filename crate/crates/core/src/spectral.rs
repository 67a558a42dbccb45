//! Perron roots, strongly connected structure and mixing diagnostics.

use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SftError};
use crate::matrix::{big_ln, SparseCountMatrix};
use crate::patterns::BasicSet;
use crate::transfer::{build_tm, check_cap, DEFAULT_DIM_CAP};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 1_000_000;

/// Power-iteration result with Collatz–Wielandt bounds `lower ≤ ρ ≤ upper`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralEstimate {
    pub rho: f64,
    pub iterations: usize,
    pub residual: f64,
    pub lower: f64,
    pub upper: f64,
    /// `upper − lower ≤ tol·max(1, ρ)` was reached within the iteration cap.
    pub certified: bool,
}

impl SpectralEstimate {
    fn exact(rho: f64) -> Self {
        Self {
            rho,
            iterations: 0,
            residual: 0.0,
            lower: rho,
            upper: rho,
            certified: true,
        }
    }
}

/// Strongly connected components of `G(A)`, 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComponentDecomposition {
    /// Components in condensation order: every edge between components goes
    /// from an earlier to a later one. Each component is sorted.
    pub components: Vec<Vec<usize>>,
    pub zero_rows: Vec<usize>,
    pub zero_cols: Vec<usize>,
}

/// Tarjan's algorithm, iterative. Returns 0-based components in reverse
/// topological order.
fn tarjan(a: &SparseCountMatrix) -> Vec<Vec<usize>> {
    let n = a.dim();
    const UNSEEN: usize = usize::MAX;
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut out = Vec::new();
    let mut next = 0usize;
    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let succ = a.row_cols_0(v);
            if *pos < succ.len() {
                let w = succ[*pos] as usize;
                *pos += 1;
                if index[w] == UNSEEN {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                out.push(comp);
            }
        }
    }
    out
}

pub fn scc(a: &SparseCountMatrix) -> ComponentDecomposition {
    let mut comps = tarjan(a);
    comps.reverse();
    let n = a.dim();
    let mut has_col = vec![false; n];
    for i in 0..n {
        for &j in a.row_cols_0(i) {
            has_col[j as usize] = true;
        }
    }
    ComponentDecomposition {
        components: comps
            .into_iter()
            .map(|c| c.into_iter().map(|i| i + 1).collect())
            .collect(),
        zero_rows: (0..n).filter(|&i| a.row_cols_0(i).is_empty()).map(|i| i + 1).collect(),
        zero_cols: (0..n).filter(|&j| !has_col[j]).map(|j| j + 1).collect(),
    }
}

fn has_cycle(a: &SparseCountMatrix, comp0: &[usize]) -> bool {
    comp0.len() > 1 || a.has_0(comp0[0], comp0[0])
}

/// True when `G(A)` is strongly connected and carries at least one edge.
pub fn is_irreducible(a: &SparseCountMatrix) -> bool {
    let comps = tarjan(a);
    comps.len() == 1 && has_cycle(a, &comps[0])
}

/// Deletes zero rows and zero columns once; returns the submatrix and the
/// kept 1-based indices.
pub fn weakly_reduced(a: &SparseCountMatrix) -> (SparseCountMatrix, Vec<usize>) {
    let d = scc(a);
    let mut drop = vec![false; a.dim()];
    for &i in d.zero_rows.iter().chain(&d.zero_cols) {
        drop[i - 1] = true;
    }
    let keep: Vec<usize> = (0..a.dim()).filter(|&i| !drop[i]).collect();
    let sub = a.principal_submatrix(&keep);
    (sub, keep.into_iter().map(|i| i + 1).collect())
}

/// Power iteration on `A + I` for an irreducible matrix; returns the
/// estimate and the positive Perron vector normalised to max 1.
fn perron_irreducible(a: &SparseCountMatrix, tol: f64, max_iter: usize) -> Result<(SpectralEstimate, Vec<f64>)> {
    let n = a.dim();
    let f = a.float_view(1.0)?;
    let mut x = vec![1.0f64; n];
    let mut y = vec![0.0f64; n];
    let mut est = SpectralEstimate {
        rho: 0.0,
        iterations: 0,
        residual: f64::INFINITY,
        lower: 0.0,
        upper: f64::INFINITY,
        certified: false,
    };
    for it in 1..=max_iter {
        f.mul_vec(&x, &mut y);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        let mut top = 0.0f64;
        for i in 0..n {
            y[i] += x[i];
            let q = y[i] / x[i];
            lo = lo.min(q);
            hi = hi.max(q);
            top = top.max(y[i]);
        }
        for v in y.iter_mut() {
            *v /= top;
        }
        std::mem::swap(&mut x, &mut y);
        est.iterations = it;
        est.lower = (lo - 1.0).max(0.0);
        est.upper = hi - 1.0;
        est.rho = 0.5 * (est.lower + est.upper);
        est.residual = est.upper - est.lower;
        if est.residual <= tol * est.rho.max(1.0) {
            est.certified = true;
            break;
        }
        if x.iter().any(|&v| v <= 0.0 || !v.is_finite()) {
            break;
        }
    }
    Ok((est, x))
}

/// `ρ(A)` as the largest Perron root over the strongly connected components.
pub fn spectral_radius(a: &SparseCountMatrix, tol: f64) -> Result<SpectralEstimate> {
    spectral_radius_capped(a, tol, DEFAULT_MAX_ITER)
}

pub fn spectral_radius_capped(a: &SparseCountMatrix, tol: f64, max_iter: usize) -> Result<SpectralEstimate> {
    if a.is_zero() {
        return Ok(SpectralEstimate::exact(0.0));
    }
    let comps = tarjan(a);
    let ests: Vec<SpectralEstimate> = comps
        .par_iter()
        .filter(|c| has_cycle(a, c))
        .map(|c| {
            if c.len() == 1 {
                let v = a.get(c[0] + 1, c[0] + 1);
                return Ok(SpectralEstimate::exact(v.to_f64().unwrap_or(f64::INFINITY)));
            }
            perron_irreducible(&a.principal_submatrix(c), tol, max_iter).map(|(e, _)| e)
        })
        .collect::<Result<_>>()?;
    if ests.is_empty() {
        // Nilpotent.
        return Ok(SpectralEstimate::exact(0.0));
    }
    let lower = ests.iter().map(|e| e.lower).fold(0.0, f64::max);
    let upper = ests.iter().map(|e| e.upper).fold(0.0, f64::max);
    let best = ests
        .iter()
        .max_by(|x, y| x.rho.total_cmp(&y.rho))
        .expect("nonempty");
    let rho = best.rho.clamp(lower, upper);
    Ok(SpectralEstimate {
        rho,
        iterations: ests.iter().map(|e| e.iterations).max().unwrap_or(0),
        residual: upper - lower,
        lower,
        upper,
        certified: ests.iter().all(|e| e.certified) && upper - lower <= tol * rho.max(1.0),
    })
}

/// Perron vector of an irreducible matrix, normalised to maximum 1.
pub fn perron_vector(a: &SparseCountMatrix, tol: f64) -> Result<(SpectralEstimate, Vec<f64>)> {
    if !is_irreducible(a) {
        return Err(SftError::NotIrreducible);
    }
    perron_irreducible(a, tol, DEFAULT_MAX_ITER)
}

/// The strongly connected component with the largest Perron root (ties go to
/// the lexicographically smallest index set); empty for a matrix without cycles.
pub fn max_irreducible_component(a: &SparseCountMatrix, tol: f64) -> Result<(SparseCountMatrix, Vec<usize>)> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut comps = tarjan(a);
    comps.sort();
    for c in comps.into_iter().filter(|c| has_cycle(a, c)) {
        let rho = spectral_radius(&a.principal_submatrix(&c), tol)?.rho;
        let better = match &best {
            None => true,
            Some((r, _)) => rho > r + tol * r.max(1.0),
        };
        if better {
            best = Some((rho, c));
        }
    }
    let idx = best.map(|(_, c)| c).unwrap_or_default();
    Ok((a.principal_submatrix(&idx), idx.into_iter().map(|i| i + 1).collect()))
}

/// `D(G) = max d(i, j)` with `d(i, j)` the least `k ≥ 1` with `(Aᵏ)ᵢⱼ ≥ 1`;
/// `None` when some pair is unreachable (or the matrix is empty).
pub fn diameter(a: &SparseCountMatrix) -> Option<usize> {
    let n = a.dim();
    if n == 0 {
        return None;
    }
    (0..n)
        .into_par_iter()
        .map(|s| {
            let mut dist = vec![usize::MAX; n];
            let mut frontier: Vec<usize> = a.row_cols_0(s).iter().map(|&j| j as usize).collect();
            for &j in &frontier {
                dist[j] = 1;
            }
            let mut level = 1;
            let mut far = 1;
            while !frontier.is_empty() {
                level += 1;
                let mut next = Vec::new();
                for &v in &frontier {
                    for &w in a.row_cols_0(v) {
                        let w = w as usize;
                        if dist[w] == usize::MAX {
                            dist[w] = level;
                            far = level;
                            next.push(w);
                        }
                    }
                }
                frontier = next;
            }
            if dist.contains(&usize::MAX) {
                None
            } else {
                Some(far)
            }
        })
        .collect::<Option<Vec<usize>>>()
        .map(|v| v.into_iter().max().unwrap_or(0))
}

/// Which matrix the mixing checks look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Reduction {
    /// `Tₘ` as built.
    Full,
    /// `Tₘ` with zero rows and zero columns deleted.
    WeaklyReduced,
    /// The maximum irreducible component `T̄ₘ`.
    MaxIrreducible,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixingOptions {
    pub reduction: Reduction,
    pub dim_cap: usize,
    pub tol: f64,
    /// Extra powers that must stay positive past the first positive one.
    pub k_window: usize,
    /// Give up searching for a positive power beyond this exponent.
    pub k_cap: usize,
}

impl Default for MixingOptions {
    fn default() -> Self {
        Self {
            reduction: Reduction::WeaklyReduced,
            dim_cap: DEFAULT_DIM_CAP,
            tol: DEFAULT_TOL,
            k_window: 8,
            k_cap: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectivityRow {
    pub m: usize,
    /// Dimension of `Tₘ` before reduction.
    pub full_dim: usize,
    /// Dimension of the analysed matrix.
    pub dim: usize,
    pub all_zero: bool,
    pub irreducible: bool,
    pub diameter: Option<usize>,
    /// Smallest 1-based index of `Tₘ` with `Tₘ[i][i] = 1`.
    pub self_loop: Option<usize>,
    pub gluing_k: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConnectivityReport {
    pub rows: Vec<ConnectivityRow>,
    /// Largest diameter when every diameter is finite.
    pub k_bound: Option<usize>,
    /// Largest gluing exponent when every row found one.
    pub gluing_bound: Option<usize>,
}

fn analysed(t: &SparseCountMatrix, reduction: Reduction, tol: f64) -> Result<SparseCountMatrix> {
    Ok(match reduction {
        Reduction::Full => t.clone(),
        Reduction::WeaklyReduced => weakly_reduced(t).0,
        Reduction::MaxIrreducible => max_irreducible_component(t, tol)?.0,
    })
}

fn cylinder_matrices(bs: &BasicSet, m_max: usize, opts: &MixingOptions) -> Result<Vec<SparseCountMatrix>> {
    if m_max < 1 {
        return Err(SftError::InvalidSize("m_max must be at least 1".into()));
    }
    for m in 1..=m_max {
        check_cap(bs.r(), m, opts.dim_cap)?;
    }
    (1..=m_max).into_par_iter().map(|m| build_tm(bs, m)).collect()
}

/// Diameters, irreducibility and self-loops of `Tₘ` for `m = 1..=m_max`.
pub fn uniform_connectedness(bs: &BasicSet, m_max: usize, opts: &MixingOptions) -> Result<ConnectivityReport> {
    let ts = cylinder_matrices(bs, m_max, opts)?;
    let rows = ts
        .par_iter()
        .enumerate()
        .map(|(idx, t)| {
            let a = analysed(t, opts.reduction, opts.tol)?;
            Ok(ConnectivityRow {
                m: idx + 1,
                full_dim: t.dim(),
                dim: a.dim(),
                all_zero: t.is_zero(),
                irreducible: a.dim() > 0 && is_irreducible(&a),
                diameter: diameter(&a),
                self_loop: (0..t.dim()).find(|&i| t.has_0(i, i)).map(|i| i + 1),
                gluing_k: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let k_bound = rows
        .iter()
        .map(|r| r.diameter)
        .collect::<Option<Vec<_>>>()
        .and_then(|d| d.into_iter().max());
    Ok(ConnectivityReport {
        rows,
        k_bound,
        gluing_bound: None,
    })
}

fn bit_rows(a: &SparseCountMatrix) -> Vec<Vec<u64>> {
    let words = a.dim().div_ceil(64);
    (0..a.dim())
        .map(|i| {
            let mut row = vec![0u64; words];
            for &j in a.row_cols_0(i) {
                row[j as usize / 64] |= 1 << (j % 64);
            }
            row
        })
        .collect()
}

/// Least `K` with `Aᵏ` entrywise positive for every `K ≤ k ≤ K + window`,
/// searching exponents up to `k_cap`.
pub fn least_positive_power(a: &SparseCountMatrix, window: usize, k_cap: usize) -> Option<usize> {
    let n = a.dim();
    if n == 0 {
        return None;
    }
    let words = n.div_ceil(64);
    let full: Vec<u64> = (0..words)
        .map(|w| {
            let bits = (n - w * 64).min(64);
            if bits == 64 {
                u64::MAX
            } else {
                (1u64 << bits) - 1
            }
        })
        .collect();
    let base = bit_rows(a);
    let mut power = base.clone();
    let mut start: Option<usize> = None;
    for k in 1..=k_cap + window {
        let positive = power.iter().all(|row| row == &full);
        match (positive, start) {
            (true, None) => start = Some(k),
            (false, Some(_)) => start = None,
            _ => {}
        }
        if let Some(s) = start {
            if k == s + window {
                return Some(s);
            }
        } else if k >= k_cap {
            return None;
        }
        power = power
            .par_iter()
            .map(|row| {
                let mut out = vec![0u64; words];
                for (w, &bits) in row.iter().enumerate() {
                    let mut b = bits;
                    while b != 0 {
                        let j = w * 64 + b.trailing_zeros() as usize;
                        b &= b - 1;
                        for (o, x) in out.iter_mut().zip(&base[j]) {
                            *o |= x;
                        }
                    }
                }
                out
            })
            .collect();
    }
    None
}

/// Fills `gluing_k` for each row: the least positive power of the analysed
/// `Tₘ` that stays positive over the window.
pub fn block_gluing_check(bs: &BasicSet, report: &mut ConnectivityReport, opts: &MixingOptions) -> Result<()> {
    let m_max = report.rows.iter().map(|r| r.m).max().unwrap_or(0);
    let ts = cylinder_matrices(bs, m_max, opts)?;
    let ks = ts
        .par_iter()
        .map(|t| Ok(least_positive_power(&analysed(t, opts.reduction, opts.tol)?, opts.k_window, opts.k_cap)))
        .collect::<Result<Vec<_>>>()?;
    for row in report.rows.iter_mut() {
        row.gluing_k = ks[row.m - 1];
    }
    report.gluing_bound = report
        .rows
        .iter()
        .map(|r| r.gluing_k)
        .collect::<Option<Vec<_>>>()
        .and_then(|k| k.into_iter().max());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationCell {
    pub m: usize,
    pub k: usize,
    /// `|Tₘᵏ|`, exact.
    pub count: BigUint,
    pub rho: f64,
    /// `ln c(m, k) = ln |Tₘᵏ| − k·ln ρ(Tₘ)`.
    pub ln_c: f64,
    /// `ln c(m, k) / (mk)`.
    pub normalized: f64,
    /// `c(m, k) ≤ (r^{K+1})^m`, when a connectivity bound `K` is known.
    pub bound_holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationTable {
    pub cells: Vec<DominationCell>,
    pub k_bound: Option<usize>,
    /// Sizes whose spectral radius did not certify.
    pub uncertified: Vec<usize>,
}

impl DominationTable {
    pub fn cell(&self, m: usize, k: usize) -> Option<&DominationCell> {
        self.cells.iter().find(|c| c.m == m && c.k == k)
    }
}

/// `c(m, k)` cells for one matrix `A` standing in for `Tₘ`.
pub fn domination_cells(a: &SparseCountMatrix, m: usize, k_max: usize, tol: f64) -> Result<(Vec<DominationCell>, bool)> {
    let est = spectral_radius(a, tol)?;
    let cells = (1..=k_max)
        .into_par_iter()
        .map(|k| {
            let count = a.power_entry_sum(k as u32);
            let ln_c = big_ln(&count) - k as f64 * est.rho.ln();
            DominationCell {
                m,
                k,
                count,
                rho: est.rho,
                ln_c,
                normalized: ln_c / (m * k) as f64,
                bound_holds: None,
            }
        })
        .collect();
    Ok((cells, est.certified))
}

/// `c(m, k) = |Tₘᵏ| / ρ(Tₘ)ᵏ` for `m ≤ m_max`, `k ≤ k_max`, with the bound
/// `(r^{K+1})^m` checked when the weakly reduced `Tₘ` have bounded diameter.
pub fn domination_table(bs: &BasicSet, m_max: usize, k_max: usize, opts: &MixingOptions) -> Result<DominationTable> {
    let report = uniform_connectedness(bs, m_max, opts)?;
    let k_bound = report.k_bound;
    let ts = cylinder_matrices(bs, m_max, opts)?;
    let mut cells = Vec::new();
    let mut uncertified = Vec::new();
    for (idx, t) in ts.iter().enumerate() {
        let m = idx + 1;
        let (mut row, certified) = domination_cells(t, m, k_max, opts.tol)?;
        if !certified {
            uncertified.push(m);
        }
        if let Some(kb) = k_bound {
            let limit = (m * (kb + 1)) as f64 * (bs.r() as f64).ln();
            for c in row.iter_mut() {
                c.bound_holds = Some(c.ln_c <= limit + 1e-9 * limit.abs().max(1.0));
            }
        }
        cells.extend(row);
    }
    Ok(DominationTable {
        cells,
        k_bound,
        uncertified,
    })
}

/// `max vᵢ / min vᵢ ≤ ρ^K` for the Perron vector `v`, up to relative `1e−6`.
pub fn ratio_bound_check(a: &SparseCountMatrix, k: usize) -> Result<bool> {
    let (est, v) = perron_vector(a, DEFAULT_TOL)?;
    let max = v.iter().copied().fold(0.0, f64::max);
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let bound = est.rho.powi(k as i32);
    Ok(max / min <= bound * (1.0 + 1e-6))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{matpow, PermutationMatrix};
    use crate::patterns::Alphabet;

    fn dense(rows: &[&[u64]]) -> SparseCountMatrix {
        SparseCountMatrix::from_dense(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn gm_h2() -> SparseCountMatrix {
        dense(&[&[1, 1, 1, 0], &[1, 0, 1, 0], &[1, 1, 0, 0], &[0, 0, 0, 0]])
    }

    fn reducible_v2() -> SparseCountMatrix {
        dense(&[&[1, 0, 0, 1], &[1, 1, 1, 1], &[1, 1, 1, 1], &[1, 0, 0, 1]])
    }

    fn gm() -> BasicSet {
        BasicSet::from_predicate(Alphabet::new(2).unwrap(), |bl, br, tl, tr| {
            bl * br == 0 && tl * tr == 0 && bl * tl == 0 && br * tr == 0
        })
    }

    fn cycle(n: usize) -> SparseCountMatrix {
        PermutationMatrix::new((1..=n).map(|i| i % n + 1).collect()).unwrap().to_matrix()
    }

    #[test]
    fn radius_examples() {
        let e = spectral_radius(&SparseCountMatrix::ones(4), DEFAULT_TOL).unwrap();
        assert!((e.rho - 4.0).abs() < 1e-9 && e.certified);
        let v = spectral_radius(&reducible_v2(), DEFAULT_TOL).unwrap();
        assert!((v.rho - 2.0).abs() < 1e-8);
        let p = spectral_radius(&cycle(7), DEFAULT_TOL).unwrap();
        assert!((p.rho - 1.0).abs() < 1e-9);
        let g = spectral_radius(&gm_h2(), DEFAULT_TOL).unwrap();
        assert!(g.lower <= 1.0 + 2f64.sqrt() && 1.0 + 2f64.sqrt() <= g.upper);
        assert_eq!(spectral_radius(&SparseCountMatrix::zeros(3), DEFAULT_TOL).unwrap().rho, 0.0);
    }

    #[test]
    fn scc_examples() {
        let d = scc(&gm_h2());
        let mut sizes: Vec<usize> = d.components.iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, vec![1, 3]);
        assert_eq!(d.zero_rows, vec![4]);
        assert_eq!(d.zero_cols, vec![4]);
        assert_eq!(scc(&SparseCountMatrix::identity(5)).components.len(), 5);
        assert_eq!(scc(&SparseCountMatrix::ones(5)).components.len(), 1);
        // Condensation order: edges go forward.
        let chain = dense(&[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        assert_eq!(scc(&chain).components, vec![vec![1], vec![2], vec![3]]);
    }

    #[test]
    fn max_component_examples() {
        let (sub, idx) = max_irreducible_component(&SparseCountMatrix::ones(3), DEFAULT_TOL).unwrap();
        assert_eq!((sub.dim(), idx), (3, vec![1, 2, 3]));
        let (_, idx) = max_irreducible_component(&dense(&[&[2, 0], &[0, 3]]), DEFAULT_TOL).unwrap();
        assert_eq!(idx, vec![2]);
        let (sub, idx) = max_irreducible_component(&reducible_v2(), DEFAULT_TOL).unwrap();
        assert_eq!(idx, vec![1, 4]);
        assert!((spectral_radius(&sub, DEFAULT_TOL).unwrap().rho - 2.0).abs() < 1e-9);
        assert_eq!(max_irreducible_component(&SparseCountMatrix::zeros(2), DEFAULT_TOL).unwrap().1, Vec::<usize>::new());
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(diameter(&SparseCountMatrix::ones(5)), Some(1));
        assert_eq!(diameter(&SparseCountMatrix::identity(3)), None);
        assert_eq!(diameter(&SparseCountMatrix::identity(1)), Some(1));
        assert_eq!(diameter(&cycle(6)), Some(6));
    }

    #[test]
    fn connectedness_examples() {
        let opts = MixingOptions::default();
        let full = BasicSet::full(Alphabet::new(2).unwrap());
        let rep = uniform_connectedness(&full, 5, &opts).unwrap();
        assert_eq!(rep.k_bound, Some(1));
        let rep = uniform_connectedness(&gm(), 6, &opts).unwrap();
        assert_eq!(rep.k_bound, Some(2));
        assert!(rep.rows.iter().all(|r| r.self_loop == Some(1) && r.irreducible));
        let empty = BasicSet::empty(Alphabet::new(2).unwrap());
        let rep = uniform_connectedness(&empty, 3, &opts).unwrap();
        assert!(rep.rows.iter().all(|r| r.all_zero && r.diameter.is_none()));
        assert_eq!(rep.k_bound, None);
    }

    #[test]
    fn gluing_examples() {
        let opts = MixingOptions::default();
        let full = BasicSet::full(Alphabet::new(2).unwrap());
        let mut rep = uniform_connectedness(&full, 4, &opts).unwrap();
        block_gluing_check(&full, &mut rep, &opts).unwrap();
        assert_eq!(rep.gluing_bound, Some(1));
        let mut rep = uniform_connectedness(&gm(), 6, &opts).unwrap();
        block_gluing_check(&gm(), &mut rep, &opts).unwrap();
        assert!(rep.gluing_bound.is_some_and(|k| k <= 4));
        // Checkerboard rows alternate, so Tₘ is a permutation.
        let checker = BasicSet::from_predicate(Alphabet::new(2).unwrap(), |bl, br, tl, tr| {
            bl == tr && br == tl && bl != br
        });
        assert_eq!(least_positive_power(&build_tm(&checker, 2).unwrap(), 8, 64), None);
        assert_eq!(least_positive_power(&cycle(4), 8, 64), None);
    }

    #[test]
    fn domination_examples() {
        let opts = MixingOptions::default();
        let full = BasicSet::full(Alphabet::new(2).unwrap());
        let table = domination_table(&full, 4, 4, &opts).unwrap();
        for c in &table.cells {
            assert!((c.ln_c - (c.m as f64) * 2f64.ln()).abs() < 1e-9);
            assert_eq!(c.bound_holds, Some(true));
        }
        let table = domination_table(&gm(), 5, 5, &opts).unwrap();
        assert!(table.cells.iter().all(|c| c.bound_holds == Some(true)));
        // Reducible example: |V_mᵏ| = (k+2)^{m−1}·2^{k+1}.
        let v = crate::transfer::build_vm(&reducible_set(), 3).unwrap();
        let (cells, _) = domination_cells(&v, 3, 6, DEFAULT_TOL).unwrap();
        for c in cells {
            let expect = ((c.k + 2) as f64).powi(2) * 2.0;
            assert!((c.ln_c - expect.ln()).abs() < 1e-8);
        }
    }

    fn reducible_set() -> BasicSet {
        let v2 = reducible_v2();
        BasicSet::from_predicate(Alphabet::new(2).unwrap(), |bl, br, tl, tr| {
            v2.has_0(bl * 2 + br, tl * 2 + tr)
        })
    }

    #[test]
    fn ratio_examples() {
        assert!(ratio_bound_check(&SparseCountMatrix::ones(4), 1).unwrap());
        let circulant = dense(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        assert!(ratio_bound_check(&circulant, 1).unwrap());
        let t2 = weakly_reduced(&build_tm(&gm(), 2).unwrap()).0;
        assert!(ratio_bound_check(&t2, diameter(&t2).unwrap()).unwrap());
        assert_eq!(ratio_bound_check(&gm_h2(), 1), Err(SftError::NotIrreducible));
    }

    #[test]
    fn log_growth_tracks_radius() {
        let core = max_irreducible_component(&gm_h2(), DEFAULT_TOL).unwrap().0;
        let t2 = weakly_reduced(&build_tm(&gm(), 2).unwrap()).0;
        for a in [core, t2, SparseCountMatrix::ones(2)] {
            let rho = spectral_radius(&a, DEFAULT_TOL).unwrap().rho;
            let growth = big_ln(&matpow(&a, 64).entry_sum()) / 64.0;
            assert!((growth - rho.ln()).abs() <= 0.02);
        }
    }
}
