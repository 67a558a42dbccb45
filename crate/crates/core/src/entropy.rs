//! Finite-size entropy sequences.
//!
//! Every estimator returns the values it could compute at each size together
//! with a Richardson-style trend `Rₙ = n·aₙ − (n−1)·aₙ₋₁`. Nothing here
//! claims a limit. Logarithms are natural; an empty shift gives `-inf`.

use num_bigint::BigUint;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Result, SftError};
use crate::matrix::{big_ln, multiply, PermutationMatrix, SparseCountMatrix};
use crate::patterns::BasicSet;
use crate::spectral::{spectral_radius, SpectralEstimate, DEFAULT_TOL};
use crate::transfer::{build_hn, build_rm, build_t_gamma_q_1, build_tm, build_vm, check_cap, DEFAULT_DIM_CAP};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyOptions {
    pub dim_cap: usize,
    pub tol: f64,
    /// Stop at the first size over the cap and keep what was computed,
    /// instead of failing.
    pub partial: bool,
}

impl Default for EntropyOptions {
    fn default() -> Self {
        Self {
            dim_cap: DEFAULT_DIM_CAP,
            tol: DEFAULT_TOL,
            partial: false,
        }
    }
}

/// `(1/scale)·ln ρ` at one size, with the certified bracket carried through.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyPoint {
    pub size: usize,
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub certified: bool,
}

impl EntropyPoint {
    fn from_estimate(size: usize, scale: f64, est: &SpectralEstimate) -> Self {
        let ln = |x: f64| if x > 0.0 { x.ln() / scale } else { f64::NEG_INFINITY };
        Self {
            size,
            value: ln(est.rho),
            lower: ln(est.lower),
            upper: ln(est.upper),
            certified: est.certified,
        }
    }

    pub fn is_empty_shift(&self) -> bool {
        self.value == f64::NEG_INFINITY
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropySequence {
    pub points: Vec<EntropyPoint>,
    /// `trend[i]` pairs with `points[i + 1]`.
    pub trend: Vec<f64>,
    /// Set when `partial` stopped the sequence early.
    pub truncated: Option<String>,
}

impl EntropySequence {
    fn new(points: Vec<EntropyPoint>, truncated: Option<String>) -> Self {
        let trend = points
            .windows(2)
            .map(|w| richardson(w[0].size, w[0].value, w[1].size, w[1].value))
            .collect();
        Self {
            points,
            trend,
            truncated,
        }
    }

    pub fn at(&self, size: usize) -> Option<&EntropyPoint> {
        self.points.iter().find(|p| p.size == size)
    }

    pub fn last(&self) -> Option<&EntropyPoint> {
        self.points.last()
    }
}

fn richardson(n0: usize, a0: f64, n1: usize, a1: f64) -> f64 {
    if a0 == f64::NEG_INFINITY || a1 == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if n1 != n0 + 1 {
        return f64::NAN;
    }
    n1 as f64 * a1 - n0 as f64 * a0
}

/// One cell of a periodic-count grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridCell {
    pub n: usize,
    pub k: usize,
    /// Shift attaining the count.
    pub ell: usize,
    pub count: BigUint,
    /// `(1/(nk))·ln count`.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyGrid {
    pub cells: Vec<GridCell>,
    pub truncated: Option<String>,
}

impl EntropyGrid {
    pub fn cell(&self, n: usize, k: usize) -> Option<&GridCell> {
        self.cells.iter().find(|c| c.n == n && c.k == k)
    }
}

/// All sequences for one basic set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyReport {
    pub horizontal: EntropySequence,
    pub vertical: EntropySequence,
    pub cylinder: EntropySequence,
    pub skew: EntropySequence,
}

/// `Σᵢ Aᵢ,π⁻¹(i)`, the trace of `A·P`.
fn trace_times_perm(a: &SparseCountMatrix, p_inv: &PermutationMatrix) -> BigUint {
    a.iter()
        .filter(|(i, j, _)| p_inv.image(*i) == *j)
        .map(|(_, _, v)| v)
        .sum()
}

/// Number of configurations periodic under `[[n, ℓ], [0, k]]`, computed as
/// `tr(Tₙᵏ Rₙˡ)`.
pub fn gamma_count(bs: &BasicSet, n: usize, ell: usize, k: usize) -> Result<BigUint> {
    gamma_count_capped(bs, n, ell, k, DEFAULT_DIM_CAP)
}

pub fn gamma_count_capped(bs: &BasicSet, n: usize, ell: usize, k: usize, dim_cap: usize) -> Result<BigUint> {
    if n < 1 || k < 1 || ell >= n {
        return Err(SftError::InvalidSize(format!("need n, k ≥ 1 and ℓ < n, got n={n} ℓ={ell} k={k}")));
    }
    check_cap(bs.r(), n, dim_cap)?;
    let t = build_tm(bs, n)?;
    let tk = t_power(&t, k)?;
    let p = build_rm(n, bs.r())?.pow(ell as u32).inverse();
    Ok(trace_times_perm(&tk, &p))
}

fn t_power(t: &SparseCountMatrix, k: usize) -> Result<SparseCountMatrix> {
    let k = u32::try_from(k).map_err(|_| SftError::InvalidSize(format!("k={k}")))?;
    Ok(crate::matrix::matpow(t, k))
}

fn estimate(a: &SparseCountMatrix, size: usize, scale: f64, tol: f64) -> Result<EntropyPoint> {
    let est = spectral_radius(a, tol)?;
    Ok(EntropyPoint::from_estimate(size, scale, &est))
}

/// Runs `f` over `sizes` in parallel. Sizes over the cap fail the call, or
/// truncate the sequence when `partial` is set.
fn sequence<F>(bs: &BasicSet, sizes: Vec<usize>, dim_exp: impl Fn(usize) -> usize, opts: &EntropyOptions, f: F) -> Result<EntropySequence>
where
    F: Fn(usize) -> Result<EntropyPoint> + Sync,
{
    let mut ok = Vec::new();
    let mut truncated = None;
    for &s in &sizes {
        match check_cap(bs.r(), dim_exp(s), opts.dim_cap) {
            Ok(()) => ok.push(s),
            Err(e) if opts.partial => {
                truncated = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let points = ok.par_iter().map(|&s| f(s)).collect::<Result<Vec<_>>>()?;
    Ok(EntropySequence::new(points, truncated))
}

/// `(1/n)·ln ρ(Hₙ)` and `(1/n)·ln ρ(Vₙ)` for `n = 2..=n_max`.
pub fn h_estimates(bs: &BasicSet, n_max: usize, opts: &EntropyOptions) -> Result<(EntropySequence, EntropySequence)> {
    let sizes: Vec<usize> = (2..=n_max).collect();
    let h = sequence(bs, sizes.clone(), |n| n, opts, |n| estimate(&build_hn(bs, n)?, n, n as f64, opts.tol))?;
    let v = sequence(bs, sizes, |n| n, opts, |n| estimate(&build_vm(bs, n)?, n, n as f64, opts.tol))?;
    Ok((h, v))
}

/// `(1/m)·ln ρ(Tₘ)` for `m = 1..=m_max`.
pub fn h_star_estimates(bs: &BasicSet, m_max: usize, opts: &EntropyOptions) -> Result<EntropySequence> {
    sequence(bs, (1..=m_max).collect(), |m| m, opts, |m| estimate(&build_tm(bs, m)?, m, m as f64, opts.tol))
}

/// `ln ρ(T_{γ_q,1})` for `q = 1..=q_max`.
pub fn h1_gamma_estimates(bs: &BasicSet, q_max: usize, opts: &EntropyOptions) -> Result<EntropySequence> {
    sequence(bs, (1..=q_max).collect(), |q| q + 1, opts, |q| {
        estimate(&build_t_gamma_q_1(bs, q)?.matrix, q, 1.0, opts.tol)
    })
}

/// The four sequences at once.
pub fn entropy_report(bs: &BasicSet, n_max: usize, m_max: usize, q_max: usize, opts: &EntropyOptions) -> Result<EntropyReport> {
    let (horizontal, vertical) = h_estimates(bs, n_max, opts)?;
    Ok(EntropyReport {
        horizontal,
        vertical,
        cylinder: h_star_estimates(bs, m_max, opts)?,
        skew: h1_gamma_estimates(bs, q_max, opts)?,
    })
}

/// Grid over `1 ≤ n ≤ n_max`, `1 ≤ k ≤ k_max`; `shifts(n)` lists the `ℓ`
/// values whose counts are maximised.
fn periodic_grid<S>(bs: &BasicSet, n_max: usize, k_max: usize, opts: &EntropyOptions, shifts: S) -> Result<EntropyGrid>
where
    S: Fn(usize) -> Vec<usize> + Sync,
{
    let mut ns = Vec::new();
    let mut truncated = None;
    for n in 1..=n_max {
        match check_cap(bs.r(), n, opts.dim_cap) {
            Ok(()) => ns.push(n),
            Err(e) if opts.partial => {
                truncated = Some(e.to_string());
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let rows = ns
        .par_iter()
        .map(|&n| -> Result<Vec<GridCell>> {
            let t = build_tm(bs, n)?;
            let rm = build_rm(n, bs.r())?;
            let perms: Vec<(usize, PermutationMatrix)> =
                shifts(n).into_iter().map(|l| (l, rm.pow(l as u32).inverse())).collect();
            let mut cells = Vec::with_capacity(k_max);
            let mut tk = t.clone();
            for k in 1..=k_max {
                if k > 1 {
                    tk = multiply(&tk, &t)?;
                }
                let (ell, count) = perms
                    .iter()
                    .map(|(l, p)| (*l, trace_times_perm(&tk, p)))
                    .fold(None::<(usize, BigUint)>, |best, cur| match best {
                        Some(b) if b.1 >= cur.1 => Some(b),
                        _ => Some(cur),
                    })
                    .expect("at least one shift");
                let value = big_ln(&count) / (n * k) as f64;
                cells.push(GridCell { n, k, ell, count, value });
            }
            Ok(cells)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EntropyGrid {
        cells: rows.into_iter().flatten().collect(),
        truncated,
    })
}

/// `sup_ℓ (1/(nk))·ln Γ([[n, ℓ], [0, k]])` over the grid.
pub fn h_p_grid(bs: &BasicSet, n_max: usize, k_max: usize, opts: &EntropyOptions) -> Result<EntropyGrid> {
    periodic_grid(bs, n_max, k_max, opts, |n| (0..n).collect())
}

/// `(1/(nk))·ln Γ([[n, ℓ mod n], [0, k]])` for a fixed shift.
pub fn h_ell_sequence(bs: &BasicSet, ell: usize, n_max: usize, k_max: usize, opts: &EntropyOptions) -> Result<EntropyGrid> {
    periodic_grid(bs, n_max, k_max, opts, move |n| vec![ell % n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matpow;
    use crate::oracle::{count_torus, TorusSpec};
    use crate::patterns::Alphabet;

    fn gm() -> BasicSet {
        BasicSet::from_predicate(Alphabet::new(2).unwrap(), |bl, br, tl, tr| {
            bl * br == 0 && tl * tr == 0 && bl * tl == 0 && br * tr == 0
        })
    }

    #[test]
    fn gamma_full_and_empty() {
        let full = BasicSet::full(Alphabet::new(2).unwrap());
        let empty = BasicSet::empty(Alphabet::new(2).unwrap());
        for n in 1..=3 {
            for k in 1..=3 {
                for l in 0..n {
                    assert_eq!(gamma_count(&full, n, l, k).unwrap(), BigUint::from(1u64 << (n * k)));
                    assert_eq!(gamma_count(&empty, n, l, k).unwrap(), BigUint::from(0u32));
                }
            }
        }
        assert!(gamma_count(&full, 2, 2, 1).is_err());
    }

    #[test]
    fn gamma_matches_torus_on_gm() {
        let bs = gm();
        for n in 1..=4 {
            for k in 1..=3 {
                for l in 0..n {
                    let spec = TorusSpec::new(n, k, l).unwrap();
                    assert_eq!(gamma_count(&bs, n, l, k).unwrap(), count_torus(&bs, spec).unwrap(), "{n} {l} {k}");
                }
            }
        }
    }

    #[test]
    fn full_set_is_log_r() {
        let bs = BasicSet::full(Alphabet::new(3).unwrap());
        let opts = EntropyOptions::default();
        let r = h_star_estimates(&bs, 4, &opts).unwrap();
        let (h, v) = h_estimates(&bs, 4, &opts).unwrap();
        let s = h1_gamma_estimates(&bs, 3, &opts).unwrap();
        for p in r.points.iter().chain(&h.points).chain(&v.points).chain(&s.points) {
            assert!((p.value - 3f64.ln()).abs() < 1e-9, "{p:?}");
        }
        for c in h_p_grid(&bs, 3, 3, &opts).unwrap().cells {
            assert!((c.value - 3f64.ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_set_flags_neg_inf() {
        let bs = BasicSet::empty(Alphabet::new(2).unwrap());
        let opts = EntropyOptions::default();
        let (h, _) = h_estimates(&bs, 4, &opts).unwrap();
        assert!(h.points.iter().all(EntropyPoint::is_empty_shift));
        assert!(h.trend.iter().all(|t| *t == f64::NEG_INFINITY));
        assert!(h1_gamma_estimates(&bs, 3, &opts).unwrap().points.iter().all(EntropyPoint::is_empty_shift));
        assert!(h_p_grid(&bs, 3, 2, &opts).unwrap().cells.iter().all(|c| c.value == f64::NEG_INFINITY));
    }

    #[test]
    fn periodic_grid_below_rectangle_counts() {
        let bs = gm();
        let grid = h_p_grid(&bs, 5, 4, &EntropyOptions::default()).unwrap();
        for c in &grid.cells {
            let h = build_hn(&bs, c.k.max(2)).unwrap();
            // k × n rectangles: columns of height k, n of them side by side.
            let all = if c.k == 1 {
                BigUint::from(1u32) << c.n
            } else {
                matpow(&h, (c.n - 1) as u32).entry_sum()
            };
            assert!(c.count <= all, "{c:?}");
        }
        let ell1 = h_ell_sequence(&bs, 1, 5, 4, &EntropyOptions::default()).unwrap();
        for c in &ell1.cells {
            assert!(c.value <= grid.cell(c.n, c.k).unwrap().value);
        }
        let ell0 = h_ell_sequence(&bs, 0, 5, 4, &EntropyOptions::default()).unwrap();
        for c in &ell0.cells {
            assert_eq!(c.count, build_tm(&bs, c.n).unwrap().power_trace(c.k as u32));
        }
    }

    #[test]
    fn partial_truncates_at_cap() {
        let bs = gm();
        let opts = EntropyOptions {
            dim_cap: 16,
            partial: true,
            ..Default::default()
        };
        let s = h_star_estimates(&bs, 6, &opts).unwrap();
        assert_eq!(s.points.len(), 4);
        assert!(s.truncated.is_some());
        let strict = EntropyOptions { partial: false, ..opts };
        assert!(matches!(h_star_estimates(&bs, 6, &strict), Err(SftError::CapExceeded(_))));
    }

    #[test]
    fn richardson_trend() {
        assert_eq!(richardson(2, 1.0, 3, 1.5), 2.5);
        assert!(richardson(2, 1.0, 4, 1.5).is_nan());
    }
}
