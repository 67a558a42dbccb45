use std::path::Path;

use sha2::{Digest, Sha256};
use sft_core::entropy::{entropy_report, gamma_count_capped, h_p_grid, EntropyOptions, EntropySequence};
use sft_core::lattice::{hnf_reduce, to_gamma0, transform, IntMat2, Unimodular};
use sft_core::oracle::{count_strip_capped, count_torus_capped, TorusSpec};
use sft_core::patterns::BasicSet;
use sft_core::spectral::{
    block_gluing_check, domination_cells, domination_table, uniform_connectedness, MixingOptions,
};
use sft_core::transfer::{build_tm, check_cap, DEFAULT_DIM_CAP};
use sft_core::SftError;

use crate::report::{Cell, Report, Table};
use crate::{Cli, CliError, Command};

pub const DIM_CAP_ENV: &str = "SFT_DIM_CAP";

/// Everything a run depends on besides the basic set itself.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub dim_cap: usize,
    pub tol: f64,
    pub log2: bool,
    pub partial: bool,
}

impl RunConfig {
    fn from_cli(cli: &Cli) -> Result<Self, CliError> {
        let dim_cap = match std::env::var(DIM_CAP_ENV) {
            Ok(v) => v
                .trim()
                .parse::<usize>()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| CliError::Usage(format!("{DIM_CAP_ENV} must be a positive integer, got `{v}`")))?,
            Err(_) => DEFAULT_DIM_CAP,
        };
        if !(cli.tol > 0.0 && cli.tol < 1.0) {
            return Err(CliError::Usage(format!("--tol must lie in (0, 1), got {}", cli.tol)));
        }
        Ok(Self {
            dim_cap,
            tol: cli.tol,
            log2: cli.log2,
            partial: cli.partial,
        })
    }

    fn log(&self, x: f64) -> f64 {
        if self.log2 {
            x / std::f64::consts::LN_2
        } else {
            x
        }
    }

    fn base_caps(&self) -> Vec<(&'static str, String)> {
        vec![
            ("dim_cap", self.dim_cap.to_string()),
            ("tol", self.tol.to_string()),
            ("log", if self.log2 { "2" } else { "e" }.to_string()),
        ]
    }

    fn mixing(&self) -> MixingOptions {
        MixingOptions {
            dim_cap: self.dim_cap,
            tol: self.tol,
            ..MixingOptions::default()
        }
    }
}

fn positive(name: &str, v: usize) -> Result<(), CliError> {
    if v == 0 {
        Err(CliError::Usage(format!("--{name} must be positive")))
    } else {
        Ok(())
    }
}

fn load(path: &Path) -> Result<(BasicSet, (String, String)), CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let digest: String = Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect();
    let text = String::from_utf8(bytes).map_err(|_| SftError::Parse("input is not UTF-8".into()))?;
    let bs = BasicSet::parse(&text)?;
    Ok((bs, (path.display().to_string(), digest)))
}

/// Largest size `≤ want` whose `r^size` rows fit the cap; an error unless
/// `partial` when that is below `want`.
fn clip(bs: &BasicSet, want: usize, cfg: &RunConfig, notes: &mut Vec<String>) -> Result<usize, CliError> {
    let mut m = want;
    while m > 0 && check_cap(bs.r(), m, cfg.dim_cap).is_err() {
        m -= 1;
    }
    if m < want {
        if !cfg.partial {
            check_cap(bs.r(), want, cfg.dim_cap)?;
        }
        notes.push(format!("partial: stopped at m={m}, {}^{} rows exceed dim_cap", bs.r(), m + 1));
    }
    Ok(m)
}

pub fn run(cli: &Cli) -> Result<String, CliError> {
    let cfg = RunConfig::from_cli(cli)?;
    let report = match &cli.command {
        Command::Entropy {
            input,
            n_max,
            m_max,
            q_max,
            k_max,
        } => entropy(input, *n_max, *m_max, *q_max, *k_max, &cfg)?,
        Command::PeriodicCount { input, n, ell, k } => periodic(input, *n, *ell, *k, &cfg)?,
        Command::OracleCount {
            input,
            n,
            ell,
            k,
            strip,
            node_cap,
        } => oracle(input, *n, *ell, *k, *strip, *node_cap)?,
        Command::MixingCheck { input, m_max, reduction } => mixing(input, *m_max, (*reduction).into(), &cfg)?,
        Command::Domination { input, m_max, k_max } => domination(input, *m_max, *k_max, &cfg)?,
        Command::Hnf {
            gamma,
            hnf,
            target,
            matrix,
        } => return hnf_cmd(gamma.as_deref(), hnf.as_deref(), target.as_deref(), matrix.as_deref()),
    };
    Ok(report.render(cli.format))
}

fn entropy(input: &Path, n_max: usize, m_max: usize, q_max: usize, k_max: Option<usize>, cfg: &RunConfig) -> Result<Report, CliError> {
    positive("n-max", n_max)?;
    positive("m-max", m_max)?;
    positive("q-max", q_max)?;
    let (bs, digest) = load(input)?;
    let opts = EntropyOptions {
        dim_cap: cfg.dim_cap,
        tol: cfg.tol,
        partial: cfg.partial,
    };
    let rep = entropy_report(&bs, n_max, m_max, q_max, &opts)?;
    let mut notes = Vec::new();
    for (label, s) in [("h_H", &rep.horizontal), ("h_V", &rep.vertical), ("h_T", &rep.cylinder), ("h_gamma", &rep.skew)] {
        if let Some(t) = &s.truncated {
            notes.push(format!("partial {label}: {t}"));
        }
        let bad: Vec<String> = s.points.iter().filter(|p| !p.certified).map(|p| p.size.to_string()).collect();
        if !bad.is_empty() {
            notes.push(format!("uncertified {label} at sizes {}", bad.join(",")));
        }
    }

    let value = |s: &EntropySequence, i: usize| s.points.get(i).map_or(Cell::Empty, |p| Cell::Float(cfg.log(p.value)));
    let trend = |s: &EntropySequence, i: usize| {
        i.checked_sub(1)
            .and_then(|j| s.trend.get(j))
            .map_or(Cell::Empty, |t| Cell::Float(cfg.log(*t)))
    };
    let size = |s: &EntropySequence, i: usize| s.points.get(i).map_or(Cell::Empty, |p| Cell::int(p.size));
    let mut table = Table::new("entropy", vec!["n", "h_H", "h_V", "trend_H", "m", "h_T", "trend_T", "q", "h_gamma"]);
    let rows = rep.horizontal.points.len().max(rep.cylinder.points.len()).max(rep.skew.points.len());
    for i in 0..rows {
        table.push(vec![
            size(&rep.horizontal, i),
            value(&rep.horizontal, i),
            value(&rep.vertical, i),
            trend(&rep.horizontal, i),
            size(&rep.cylinder, i),
            value(&rep.cylinder, i),
            trend(&rep.cylinder, i),
            size(&rep.skew, i),
            value(&rep.skew, i),
        ]);
    }
    let mut tables = vec![table];
    let mut caps = vec![("n_max", n_max.to_string()), ("m_max", m_max.to_string()), ("q_max", q_max.to_string())];
    if let Some(k_max) = k_max {
        positive("k-max", k_max)?;
        caps.push(("k_max", k_max.to_string()));
        let grid = h_p_grid(&bs, m_max, k_max, &opts)?;
        if let Some(t) = &grid.truncated {
            notes.push(format!("partial h_p: {t}"));
        }
        let mut t = Table::new("periodic", vec!["n", "k", "ell", "count", "h_p"]);
        for c in grid.cells {
            t.push(vec![Cell::int(c.n), Cell::int(c.k), Cell::int(c.ell), Cell::int(&c.count), Cell::Float(cfg.log(c.value))]);
        }
        tables.push(t);
    }
    caps.extend(cfg.base_caps());
    Ok(Report {
        command: "entropy",
        input: Some(digest),
        caps,
        notes,
        tables,
    })
}

fn periodic(input: &Path, n: usize, ell: usize, k: usize, cfg: &RunConfig) -> Result<Report, CliError> {
    let (bs, digest) = load(input)?;
    let count = gamma_count_capped(&bs, n, ell, k, cfg.dim_cap)?;
    let mut t = Table::new("periodic", vec!["n", "ell", "k", "count"]);
    t.push(vec![Cell::int(n), Cell::int(ell), Cell::int(k), Cell::int(&count)]);
    let caps = vec![("dim_cap", cfg.dim_cap.to_string())];
    Ok(Report {
        command: "periodic-count",
        input: Some(digest),
        caps,
        notes: vec![],
        tables: vec![t],
    })
}

fn oracle(input: &Path, n: usize, ell: usize, k: usize, strip: bool, node_cap: u64) -> Result<Report, CliError> {
    let (bs, digest) = load(input)?;
    let caps = vec![("node_cap", node_cap.to_string())];
    let t = if strip {
        let count = count_strip_capped(&bs, n, k, node_cap)?;
        let mut t = Table::new("strip", vec!["rows", "cols", "count"]);
        t.push(vec![Cell::int(n), Cell::int(k), Cell::int(&count)]);
        t
    } else {
        let count = count_torus_capped(&bs, TorusSpec::new(n, k, ell)?, node_cap)?;
        let mut t = Table::new("torus", vec!["n", "ell", "k", "count"]);
        t.push(vec![Cell::int(n), Cell::int(ell), Cell::int(k), Cell::int(&count)]);
        t
    };
    Ok(Report {
        command: "oracle-count",
        input: Some(digest),
        caps,
        notes: vec![],
        tables: vec![t],
    })
}

fn mixing(input: &Path, m_max: usize, reduction: sft_core::spectral::Reduction, cfg: &RunConfig) -> Result<Report, CliError> {
    positive("m-max", m_max)?;
    let (bs, digest) = load(input)?;
    let mut notes = vec![format!("evidence up to m_max={m_max}, not a certificate")];
    let m_run = clip(&bs, m_max, cfg, &mut notes)?;
    let opts = MixingOptions {
        reduction,
        ..cfg.mixing()
    };
    let mut table = Table::new(
        "mixing",
        vec!["m", "dim", "irreducible", "diameter", "self_loop", "gluing_K", "rho", "c_diag"],
    );
    if m_run > 0 {
        let mut rep = uniform_connectedness(&bs, m_run, &opts)?;
        block_gluing_check(&bs, &mut rep, &opts)?;
        notes.push(format!(
            "reduction={reduction:?} diameter_bound={} gluing_bound={}",
            rep.k_bound.map_or("none".into(), |k| k.to_string()),
            rep.gluing_bound.map_or("none".into(), |k| k.to_string()),
        ));
        for row in &rep.rows {
            let t = build_tm(&bs, row.m)?;
            let (cells, _) = domination_cells(&t, row.m, row.m, cfg.tol)?;
            let last = cells.last().expect("k_max = m ≥ 1");
            let (rho, c) = if last.rho > 0.0 {
                (Cell::Float(last.rho), Cell::Float(last.ln_c.exp()))
            } else {
                (Cell::Float(0.0), Cell::Empty)
            };
            table.push(vec![
                Cell::int(row.m),
                Cell::int(row.dim),
                Cell::Bool(row.irreducible),
                Cell::opt_int(row.diameter),
                Cell::opt_int(row.self_loop),
                Cell::opt_int(row.gluing_k),
                rho,
                c,
            ]);
        }
    }
    let mut caps = vec![
        ("m_max", m_max.to_string()),
        ("k_window", opts.k_window.to_string()),
        ("k_cap", opts.k_cap.to_string()),
    ];
    caps.extend(cfg.base_caps());
    Ok(Report {
        command: "mixing-check",
        input: Some(digest),
        caps,
        notes,
        tables: vec![table],
    })
}

fn domination(input: &Path, m_max: usize, k_max: usize, cfg: &RunConfig) -> Result<Report, CliError> {
    positive("m-max", m_max)?;
    positive("k-max", k_max)?;
    let (bs, digest) = load(input)?;
    let mut notes = Vec::new();
    let m_run = clip(&bs, m_max, cfg, &mut notes)?;
    let mut table = Table::new("domination", vec!["m", "k", "count", "rho", "ln_c", "normalized", "bound_holds"]);
    if m_run > 0 {
        let dt = domination_table(&bs, m_run, k_max, &cfg.mixing())?;
        notes.push(format!("diameter_bound={}", dt.k_bound.map_or("none".into(), |k| k.to_string())));
        if !dt.uncertified.is_empty() {
            let s: Vec<String> = dt.uncertified.iter().map(|m| m.to_string()).collect();
            notes.push(format!("uncertified rho at m={}", s.join(",")));
        }
        for c in dt.cells {
            table.push(vec![
                Cell::int(c.m),
                Cell::int(c.k),
                Cell::int(&c.count),
                Cell::Float(c.rho),
                Cell::Float(cfg.log(c.ln_c)),
                Cell::Float(cfg.log(c.normalized)),
                c.bound_holds.map_or(Cell::Empty, Cell::Bool),
            ]);
        }
    }
    let mut caps = vec![("m_max", m_max.to_string()), ("k_max", k_max.to_string())];
    caps.extend(cfg.base_caps());
    Ok(Report {
        command: "domination",
        input: Some(digest),
        caps,
        notes,
        tables: vec![table],
    })
}

fn system(v: &[i64]) -> Result<Unimodular, CliError> {
    Ok(Unimodular::new(v[0], v[1], v[2], v[3])?)
}

fn hnf_cmd(gamma: Option<&[i64]>, hnf: Option<&[i64]>, target: Option<&[i64]>, matrix: Option<&[i64]>) -> Result<String, CliError> {
    if let Some(a) = matrix {
        let m = IntMat2::new(a[0], a[1], a[2], a[3]);
        if m.det()? == 0 {
            return Err(SftError::Singular.into());
        }
        let (form, _) = hnf_reduce(&m)?;
        return Ok(format!("{form}\n"));
    }
    let triple = hnf.ok_or_else(|| CliError::Usage("hnf needs --hnf M L K or --matrix".into()))?;
    let (m, l, k) = (triple[0], triple[1], triple[2]);
    if m == 0 || k == 0 {
        return Err(SftError::Singular.into());
    }
    let g = match gamma {
        Some(v) => system(v)?,
        None => Unimodular::standard(),
    };
    let form = match target {
        Some(t) => transform(&g, &system(t)?, m, l, k)?,
        None => to_gamma0(&g, m, l, k)?,
    };
    Ok(format!("{form}\n"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hnf_line(g: &[i64], t: &[i64]) -> String {
        hnf_cmd(Some(g), Some(t), None, None).unwrap()
    }

    #[test]
    fn hnf_examples() {
        assert_eq!(hnf_line(&[1, 2, 0, 1], &[1, 0, 6]), "3 1 2\n");
        assert_eq!(hnf_line(&[1, 0, 0, 1], &[4, 1, 3]), "4 1 3\n");
        assert_eq!(hnf_cmd(None, None, None, Some(&[2, 0, 0, 3])).unwrap(), "2 0 3\n");
        assert!(matches!(hnf_cmd(None, None, None, Some(&[1, 2, 2, 4])), Err(CliError::Core(SftError::Singular))));
        assert!(hnf_cmd(Some(&[1, 1, 1, 1]), Some(&[1, 0, 1]), None, None).is_err());
    }
}
