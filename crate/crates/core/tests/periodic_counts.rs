use num_bigint::BigUint;

use sft_core::entropy::{
    entropy_report, gamma_count, h1_gamma_estimates, h_ell_sequence, h_estimates, h_p_grid, h_star_estimates,
    EntropyOptions,
};
use sft_core::fixtures;
use sft_core::matrix::big_ln;
use sft_core::oracle::{count_strip, count_torus, TorusSpec};
use sft_core::transfer::{build_hn, build_tm};

fn opts() -> EntropyOptions {
    EntropyOptions::default()
}

#[test]
fn interleaved_parity() {
    let bs = fixtures::interleaved();
    for n in 1..=6usize {
        for k in 1..=3usize {
            for l in 0..n {
                let g = gamma_count(&bs, n, l, k).unwrap();
                if n % 2 == 0 && l % 2 == 0 {
                    // Two phases for the free columns, then n/2 free columns of height k.
                    assert_eq!(g, BigUint::from(2u32).pow((n / 2 * k + 1) as u32), "n={n} l={l} k={k}");
                } else {
                    assert_eq!(g, BigUint::from(0u32), "n={n} l={l} k={k}");
                }
                if n * k <= 12 {
                    assert_eq!(g, count_torus(&bs, TorusSpec::new(n, k, l).unwrap()).unwrap());
                }
            }
        }
    }
}

#[test]
fn checkerboard_has_two_points_on_even_tori() {
    let bs = fixtures::checkerboard();
    for n in 1..=6usize {
        for k in 1..=4usize {
            for l in 0..n {
                // (n, 0) and (l, k) must both preserve the colouring.
                let expect = if n % 2 == 0 && (l + k) % 2 == 0 { 2u32 } else { 0 };
                assert_eq!(gamma_count(&bs, n, l, k).unwrap(), BigUint::from(expect), "n={n} l={l} k={k}");
            }
        }
    }
}

#[test]
fn zero_only_counts_one() {
    let bs = fixtures::zero_only();
    for n in 1..=4 {
        for l in 0..n {
            assert_eq!(gamma_count(&bs, n, l, 3).unwrap(), BigUint::from(1u32));
        }
    }
    let (h, _) = h_estimates(&bs, 5, &opts()).unwrap();
    assert!(h.points.iter().all(|p| p.value.abs() < 1e-12));
}

#[test]
fn rectangular_and_all_pattern_bounds() {
    for f in fixtures::standard() {
        for n in 1..=4usize {
            let t = build_tm(&f.bs, n).unwrap();
            for k in 1..=3usize {
                assert_eq!(gamma_count(&f.bs, n, 0, k).unwrap(), t.power_trace(k as u32), "{}", f.name);
                // k rows of width n.
                let all = count_strip(&f.bs, k, n).unwrap();
                for l in 0..n {
                    assert!(gamma_count(&f.bs, n, l, k).unwrap() <= all, "{} n={n} l={l} k={k}", f.name);
                }
            }
        }
    }
}

#[test]
fn golden_mean_directions_agree() {
    let (h, v) = h_estimates(&fixtures::golden_mean(), 8, &opts()).unwrap();
    let (a, b) = (h.at(8).unwrap(), v.at(8).unwrap());
    assert!((a.value - b.value).abs() <= 0.05);
    assert!(a.certified && b.certified);
    assert!(a.lower <= a.value && a.value <= a.upper);
    assert_eq!(h.trend.len(), 6);
}

#[test]
fn golden_mean_cylinder_and_shear_sequences() {
    let bs = fixtures::golden_mean();
    let (h, _) = h_estimates(&bs, 8, &opts()).unwrap();
    let h8 = h.at(8).unwrap().value;
    let star = h_star_estimates(&bs, 8, &opts()).unwrap();
    assert!((star.at(8).unwrap().value - h8).abs() <= 0.05);
    let skew = h1_gamma_estimates(&bs, 6, &opts()).unwrap();
    assert!((skew.at(6).unwrap().value - h8).abs() <= 0.05);
    // Regression anchors.
    assert!((h8 - 0.415877).abs() < 1e-6, "{h8}");
    assert!((star.at(8).unwrap().value - 0.407541).abs() < 1e-6);
}

#[test]
fn reducible_cylinder_entropy_decays() {
    let star = h_star_estimates(&fixtures::reducible(), 8, &opts()).unwrap();
    for p in &star.points {
        assert!((p.value - 2f64.ln() / p.size as f64).abs() < 1e-8, "{p:?}");
    }
}

#[test]
fn periodic_grid_bounded_by_strips() {
    for f in fixtures::standard().into_iter().filter(|f| f.bs.r() == 2) {
        let grid = h_p_grid(&f.bs, 5, 4, &opts()).unwrap();
        let shift1 = h_ell_sequence(&f.bs, 1, 5, 4, &opts()).unwrap();
        for c in &grid.cells {
            let h = build_hn(&f.bs, c.n.max(2)).unwrap();
            let bound = big_ln(&h.power_entry_sum(c.k as u32)) / (c.n * c.k) as f64;
            if c.n >= 2 {
                assert!(c.value <= bound + 1e-12, "{} {c:?}", f.name);
            }
            let s = shift1.cell(c.n, c.k).unwrap();
            assert!(s.value <= c.value, "{} {s:?}", f.name);
        }
    }
}

#[test]
fn report_bundles_all_sequences() {
    let r = entropy_report(&fixtures::full(2), 5, 5, 4, &opts()).unwrap();
    assert_eq!(r.horizontal.points.len(), 4);
    assert_eq!(r.vertical.points.len(), 4);
    assert_eq!(r.cylinder.points.len(), 5);
    assert_eq!(r.skew.points.len(), 4);
    for t in r.horizontal.trend.iter().chain(&r.cylinder.trend) {
        assert!((t - 2f64.ln()).abs() < 1e-9);
    }
}
