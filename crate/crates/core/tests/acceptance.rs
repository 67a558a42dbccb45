//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use sft_core::entropy::{gamma_count, h_p_grid, EntropyOptions};
use sft_core::fixtures::{self, Fixture};
use sft_core::lattice::{
    ext_gcd, hnf_reduce, lattice_points, to_gamma0, to_gamma0_closed, to_gamma0_generic, IntMat2, Unimodular,
};
use sft_core::matrix::SparseCountMatrix;
use sft_core::oracle::{count_strip, count_torus, exact_eigen_check, staircase_transfer, TorusSpec};
use sft_core::spectral::{block_gluing_check, domination_table, spectral_radius, uniform_connectedness, MixingOptions, DEFAULT_TOL};
use sft_core::transfer::{build_h2, build_hn, build_rm, build_t_gamma_q_1, build_tm, build_v2, build_vm};

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Runs `f` on every fixture in parallel, returning the first failure.
fn each_fixture<F>(fx: &[Fixture], f: F) -> std::result::Result<(), String>
where
    F: Fn(&Fixture) -> std::result::Result<(), String> + Sync,
{
    fx.par_iter().map(|x| f(x).map_err(|e| format!("{}: {e}", x.name))).collect()
}

fn trace_formula(fx: &[Fixture]) -> Check {
    each_fixture(fx, |x| {
        for n in 1..=4 {
            for k in 1..=3 {
                for l in 0..n {
                    let g = gamma_count(&x.bs, n, l, k).map_err(e2s)?;
                    let t = count_torus(&x.bs, TorusSpec::new(n, k, l).map_err(e2s)?).map_err(e2s)?;
                    ensure(g == t, || format!("n={n} l={l} k={k}: trace {g} vs torus {t}"))?;
                }
            }
        }
        Ok(())
    })?;
    Ok(format!("{} fixtures, 20 (n, l, k) each", fx.len()))
}

fn cylinder_counts(fx: &[Fixture]) -> Check {
    each_fixture(fx, |x| {
        let hs: Vec<SparseCountMatrix> = (2..=7).map(|n| build_hn(&x.bs, n)).collect::<Result<_, _>>().map_err(e2s)?;
        let ts: Vec<SparseCountMatrix> = (1..=6).map(|m| build_tm(&x.bs, m)).collect::<Result<_, _>>().map_err(e2s)?;
        for m in 1..=6 {
            for n in 1..=6 {
                let lhs = hs[n - 1].power_trace(m as u32);
                let rhs = ts[m - 1].power_entry_sum(n as u32);
                ensure(lhs == rhs, || format!("m={m} n={n}: tr H^m = {lhs}, |T^n| = {rhs}"))?;
            }
        }
        Ok(())
    })?;
    Ok("1 <= m, n <= 6".into())
}

fn strip_counts(fx: &[Fixture]) -> Check {
    each_fixture(fx, |x| {
        for n in 2..=5 {
            let h = build_hn(&x.bs, n).map_err(e2s)?;
            for k in 2..=5 {
                let brute = count_strip(&x.bs, n, k).map_err(e2s)?;
                let via = h.power_entry_sum((k - 1) as u32);
                ensure(brute == via, || format!("n={n} k={k}: enumerated {brute}, matrix {via}"))?;
            }
        }
        Ok(())
    })?;
    Ok("2 <= n, k <= 5".into())
}

fn reducible_example() -> Check {
    let bs = fixtures::reducible();
    let mut worst: f64 = 0.0;
    for m in 2..=5 {
        let v = build_vm(&bs, m).map_err(e2s)?;
        for k in 1..=8u32 {
            let expect = BigUint::from(k + 2).pow(m as u32 - 1) * BigUint::from(2u32).pow(k + 1);
            let got = v.power_entry_sum(k);
            ensure(got == expect, || format!("m={m} k={k}: {got} != {expect}"))?;
        }
        let rho = spectral_radius(&v, DEFAULT_TOL).map_err(e2s)?.rho;
        worst = worst.max((rho - 2.0).abs());
        ensure((rho - 2.0).abs() <= 1e-8, || format!("m={m}: rho = {rho}"))?;
    }
    Ok(format!("max |rho - 2| = {worst:.2e}"))
}

fn rotation(fx: &[Fixture]) -> Check {
    each_fixture(fx, |x| {
        for m in 1..=8 {
            let rm = build_rm(m, x.bs.r()).map_err(e2s)?;
            ensure(rm.pow(m as u32).is_identity(), || format!("R_{m}^{m} != I"))?;
            let t = build_tm(&x.bs, m).map_err(e2s)?;
            let entries: Vec<(usize, usize, BigUint)> = t.iter().collect();
            for l in 1..m as u32 {
                let p = rm.pow(l);
                for (i, j, v) in &entries {
                    let w = t.get(p.image(*i), p.image(*j));
                    ensure(&w == v, || format!("m={m} l={l}: T[{i}][{j}] not shift invariant"))?;
                }
            }
        }
        Ok(())
    })?;
    Ok("m <= 8, every shift".into())
}

fn random_unimodular(rng: &mut ChaCha8Rng) -> Unimodular {
    loop {
        let a = rng.gen_range(-9i64..=9);
        let b = rng.gen_range(-9i64..=9);
        if b == 0 {
            continue;
        }
        let (g, s, t) = ext_gcd(a, b);
        if g != 1 {
            continue;
        }
        // a·s + b·t = 1, so [[a, b], [−t, s]] has determinant 1.
        let shift = rng.gen_range(-2i64..=2);
        let (c, d) = (-t + shift * a, s + shift * b);
        let (c, d) = if rng.gen_bool(0.5) { (c, d) } else { (-c, -d) };
        return Unimodular::new(a, b, c, d).expect("determinant ±1");
    }
}

fn hnf_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4e4f);
    let mut reduced = 0;
    while reduced < 200 {
        let a = IntMat2::new(
            rng.gen_range(-9..=9),
            rng.gen_range(-9..=9),
            rng.gen_range(-9..=9),
            rng.gen_range(-9..=9),
        );
        if a.det().map_err(e2s)? == 0 {
            continue;
        }
        let (h, u) = hnf_reduce(&a).map_err(e2s)?;
        ensure(a.mul(&u.as_mat()).map_err(e2s)? == h.matrix(), || format!("{a:?}: A·U is not the form"))?;
        let lhs = lattice_points(&a, 60).map_err(e2s)?;
        let rhs = lattice_points(&h.matrix(), 60).map_err(e2s)?;
        ensure(lhs == rhs, || format!("{a:?}: lattice differs from {h}"))?;
        reduced += 1;
    }
    for _ in 0..200 {
        let g = random_unimodular(&mut rng);
        let m = rng.gen_range(1..=12);
        let l = rng.gen_range(0..m);
        let k = rng.gen_range(1..=12);
        let closed = to_gamma0_closed(&g, m, l, k).map_err(e2s)?;
        let generic = to_gamma0_generic(&g, m, l, k).map_err(e2s)?;
        ensure(closed == generic, || format!("{g} [[{m},{l}],[0,{k}]]: closed {closed} vs generic {generic}"))?;
    }
    for q in 1..=4 {
        for m in 1..=4 {
            let f = to_gamma0(&Unimodular::gamma_q(q), 1, 0, m * q).map_err(e2s)?;
            ensure((f.n, f.ell, f.k) == (m, 1 % m, q), || format!("q={q} m={m}: got {f}"))?;
        }
    }
    Ok("200 reductions, 200 closed forms, 16 shear instances".into())
}

fn skew_transfer(fx: &[Fixture]) -> Check {
    each_fixture(fx, |x| {
        for q in 1..=3usize {
            let t = build_t_gamma_q_1(&x.bs, q).map_err(e2s)?.matrix;
            let s = staircase_transfer(&x.bs, q).map_err(e2s)?;
            for kk in 1..=6u32 {
                let f = to_gamma0(&Unimodular::gamma_q(q as i64), 1, 0, kk as i64).map_err(e2s)?;
                let spec = TorusSpec::new(f.n as usize, f.k as usize, f.ell as usize).map_err(e2s)?;
                let torus = count_torus(&x.bs, spec).map_err(e2s)?;
                let tr = t.power_trace(kk);
                ensure(tr == torus, || format!("q={q} K={kk}: trace {tr} vs torus {torus} on {f}"))?;
                let st = s.power_trace(kk);
                ensure(st == tr, || format!("q={q} K={kk}: staircase trace {st} vs block trace {tr}"))?;
            }
        }
        Ok(())
    })?;
    Ok("q <= 3, K <= 6".into())
}

fn mixing_on_gm() -> Check {
    let bs = fixtures::golden_mean();
    let opts = MixingOptions::default();
    let mut report = uniform_connectedness(&bs, 8, &opts).map_err(e2s)?;
    block_gluing_check(&bs, &mut report, &opts).map_err(e2s)?;
    for row in report.rows.iter().filter(|r| r.m >= 2) {
        ensure(row.diameter.is_some_and(|d| d <= 2), || format!("m={}: diameter {:?}", row.m, row.diameter))?;
        ensure(row.self_loop.is_some(), || format!("m={}: no self-loop", row.m))?;
        ensure(row.gluing_k.is_some_and(|k| k <= 4), || format!("m={}: gluing {:?}", row.m, row.gluing_k))?;
    }
    let dmax = report.rows.iter().filter(|r| r.m >= 2).filter_map(|r| r.diameter).max();
    let gmax = report.rows.iter().filter(|r| r.m >= 2).filter_map(|r| r.gluing_k).max();
    Ok(format!("max diameter {dmax:?}, max gluing K {gmax:?}"))
}

fn estimator_coherence() -> Check {
    let bs = fixtures::golden_mean();
    let h8 = spectral_radius(&build_hn(&bs, 8).map_err(e2s)?, DEFAULT_TOL).map_err(e2s)?;
    let t8 = spectral_radius(&build_tm(&bs, 8).map_err(e2s)?, DEFAULT_TOL).map_err(e2s)?;
    let g6 = spectral_radius(&build_t_gamma_q_1(&bs, 6).map_err(e2s)?.matrix, DEFAULT_TOL).map_err(e2s)?;
    let h = h8.rho.ln() / 8.0;
    let hs = t8.rho.ln() / 8.0;
    let h1 = g6.rho.ln();
    let grid = h_p_grid(&bs, 8, 8, &EntropyOptions::default()).map_err(e2s)?;
    let hp = grid.cell(8, 8).ok_or("missing grid cell (8, 8)")?.value;
    ensure((h - hs).abs() <= 0.05, || format!("|h_H - h_T| = {}", (h - hs).abs()))?;
    ensure((h1 - h).abs() <= 0.05, || format!("|h_gamma - h_H| = {}", (h1 - h).abs()))?;
    ensure((hp - hs).abs() <= 0.05, || format!("|h_p - h_T| = {}", (hp - hs).abs()))?;
    Ok(format!("h_H={h:.6} h_T={hs:.6} h_gamma={h1:.6} h_p={hp:.6}"))
}

fn domination() -> Check {
    let opts = MixingOptions::default();
    let table = domination_table(&fixtures::golden_mean(), 6, 6, &opts).map_err(e2s)?;
    let at = |m: usize, k: usize| table.cell(m, k).map(|c| c.normalized).ok_or(format!("missing cell ({m}, {k})"));
    let base = at(2, 2)?;
    for m in [4, 6] {
        for k in [4, 6] {
            let v = at(m, k)?;
            ensure(v <= base, || format!("({m}, {k}) = {v} above (2, 2) = {base}"))?;
        }
    }
    let last = at(6, 6)?;
    ensure(last <= 0.15, || format!("(6, 6) = {last}"))?;
    ensure(last <= at(4, 4)?, || "(6, 6) above (4, 4)".into())?;

    let full = domination_table(&fixtures::full(2), 6, 6, &opts).map_err(e2s)?;
    for c in &full.cells {
        let expect = BigUint::from(2u32).pow((c.m * (c.k + 1)) as u32);
        ensure(c.count == expect, || format!("full ({}, {}): |T^k| = {}", c.m, c.k, c.count))?;
        let want = c.m as f64 * 2f64.ln();
        ensure((c.ln_c - want).abs() <= 1e-9 * want.max(1.0), || format!("full ({}, {}): ln c = {}", c.m, c.k, c.ln_c))?;
    }
    Ok(format!("GM normalized ln c: (2,2)={base:.4} (6,6)={last:.4}"))
}

fn spectral_certification(fx: &[Fixture]) -> Check {
    let mut checked = 0usize;
    let mut worst: f64 = 0.0;
    for x in fx {
        let mut mats = vec![build_h2(&x.bs), build_v2(&x.bs)];
        for m in 1..=4 {
            let t = build_tm(&x.bs, m).map_err(e2s)?;
            if t.dim() <= 4 {
                mats.push(t);
            }
        }
        let skew = build_t_gamma_q_1(&x.bs, 1).map_err(e2s)?.matrix;
        if skew.dim() <= 4 {
            mats.push(skew);
        }
        for a in mats.iter().filter(|a| a.dim() <= 4) {
            let est = spectral_radius(a, DEFAULT_TOL).map_err(e2s)?;
            let exact = exact_eigen_check(a).map_err(e2s)?;
            let top = exact.last().map_or(0.0, |b| (b.lo + b.hi) / 2.0);
            let err = (est.rho - top).abs();
            worst = worst.max(err);
            ensure(err <= 1e-8, || format!("{}: dim {} rho {} vs exact {}", x.name, a.dim(), est.rho, top))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} matrices, max error {worst:.2e}"))
}

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Option<Duration>,
    run: Box<dyn FnOnce() -> Check>,
}

fn main() {
    let standard = fixtures::standard();
    let fx = |v: &Vec<Fixture>| v.clone();
    let secs = |s: u64| Some(Duration::from_secs(s));
    let criteria = vec![
        Criterion { id: 1, name: "periodic count equals torus enumeration", budget: secs(30), run: Box::new({ let f = fx(&standard); move || trace_formula(&f) }) },
        Criterion { id: 2, name: "tr(H_{n+1}^m) equals |T_m^n|", budget: secs(30), run: Box::new({ let f = fx(&standard); move || cylinder_counts(&f) }) },
        Criterion { id: 3, name: "strip enumeration equals |H_n^{k-1}|", budget: None, run: Box::new({ let f = fx(&standard); move || strip_counts(&f) }) },
        Criterion { id: 4, name: "reducible set counts and radius 2", budget: None, run: Box::new(reducible_example) },
        Criterion { id: 5, name: "rotation order and shift invariance of T_m", budget: None, run: Box::new({ let f = fx(&standard); move || rotation(&f) }) },
        Criterion { id: 6, name: "Hermite reduction and closed forms", budget: secs(10), run: Box::new(hnf_checks) },
        Criterion { id: 7, name: "skew transfer traces equal torus counts", budget: None, run: Box::new({ let f = fx(&standard); move || skew_transfer(&f) }) },
        Criterion { id: 8, name: "golden mean connectivity and gluing", budget: None, run: Box::new(mixing_on_gm) },
        Criterion { id: 9, name: "golden mean estimator coherence", budget: secs(120), run: Box::new(estimator_coherence) },
        Criterion { id: 10, name: "domination constants", budget: None, run: Box::new(domination) },
        Criterion { id: 11, name: "power iteration matches exact roots", budget: None, run: Box::new({ let f = fx(&standard); move || spectral_certification(&f) }) },
    ];

    let mut failed = 0;
    for c in criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let outcome = match (outcome, c.budget) {
            (Ok(_), Some(b)) if took > b => Err(format!("took {took:.2?}, budget {b:?}")),
            (o, _) => o,
        };
        match outcome {
            Ok(detail) => println!("PASS [{:>2}] {} ({took:.2?}) {detail}", c.id, c.name),
            Err(why) => {
                failed += 1;
                println!("FAIL [{:>2}] {} ({took:.2?}) {why}", c.id, c.name);
            }
        }
    }
    println!("{} criteria failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
