//! Tables with a provenance header, rendered as TSV or JSON.

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Tsv,
    Json,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// Exact integer, kept as decimal text.
    Int(String),
    Float(f64),
    Bool(bool),
    Empty,
}

impl Cell {
    pub fn int(x: impl ToString) -> Self {
        Cell::Int(x.to_string())
    }

    pub fn opt_int<T: ToString>(x: Option<T>) -> Self {
        x.map_or(Cell::Empty, Cell::int)
    }

    fn tsv(&self) -> String {
        match self {
            Cell::Int(s) => s.clone(),
            Cell::Float(x) => fmt_g(*x),
            Cell::Bool(b) => b.to_string(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Int(s) => s.parse::<u64>().map_or_else(|_| json!(s), |v| json!(v)),
            Cell::Float(x) if x.is_finite() => fmt_g(*x).parse::<f64>().map_or(Value::Null, |v| json!(v)),
            Cell::Float(x) => json!(fmt_g(*x)),
            Cell::Bool(b) => json!(b),
            Cell::Empty => Value::Null,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: Vec<&'static str>) -> Self {
        Self {
            name,
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub command: &'static str,
    pub input: Option<(String, String)>,
    pub caps: Vec<(&'static str, String)>,
    pub notes: Vec<String>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Tsv => self.tsv(),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json()).expect("json values serialize");
                s.push('\n');
                s
            }
        }
    }

    fn tsv(&self) -> String {
        let mut out = format!("# sft {}\n# command {}\n", env!("CARGO_PKG_VERSION"), self.command);
        if let Some((path, digest)) = &self.input {
            out.push_str(&format!("# input {path} sha256:{digest}\n"));
        }
        if !self.caps.is_empty() {
            let caps: Vec<String> = self.caps.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out.push_str(&format!("# caps {}\n", caps.join(" ")));
        }
        for n in &self.notes {
            out.push_str(&format!("# {n}\n"));
        }
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                out.push('\n');
            }
            if self.tables.len() > 1 {
                out.push_str(&format!("# table {}\n", t.name));
            }
            out.push_str(&t.columns.join("\t"));
            out.push('\n');
            for row in &t.rows {
                let cells: Vec<String> = row.iter().map(Cell::tsv).collect();
                out.push_str(&cells.join("\t"));
                out.push('\n');
            }
        }
        out
    }

    fn json(&self) -> Value {
        let mut caps = Map::new();
        for (k, v) in &self.caps {
            caps.insert((*k).to_string(), json!(v));
        }
        let mut tables = Map::new();
        for t in &self.tables {
            let rows: Vec<Value> = t
                .rows
                .iter()
                .map(|row| {
                    let obj: Map<String, Value> =
                        t.columns.iter().zip(row).map(|(c, v)| ((*c).to_string(), v.json())).collect();
                    Value::Object(obj)
                })
                .collect();
            tables.insert(t.name.to_string(), json!({ "columns": t.columns, "rows": rows }));
        }
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "command": self.command,
            "input": self.input.as_ref().map(|(p, d)| json!({ "path": p, "sha256": d })),
            "caps": caps,
            "notes": self.notes,
            "tables": tables,
        })
    }
}

/// C's `%.12g`: 12 significant digits, trailing zeros dropped, exponent
/// form outside `1e-4 ≤ |x| < 1e12`.
pub fn fmt_g(x: f64) -> String {
    const P: i32 = 12;
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{:.*e}", (P - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..P).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        trim_zeros(&format!("{:.*}", (P - 1 - exp) as usize, x)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (1.0, "1"),
            (-2.5, "-2.5"),
            (std::f64::consts::LN_2, "0.69314718056"),
            (0.4812118250596034, "0.48121182506"),
            (1e-5, "1e-05"),
            (0.0001234, "0.0001234"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (1.0 / 3.0, "0.333333333333"),
            (99999999999.99999, "100000000000"),
            (f64::NEG_INFINITY, "-inf"),
        ];
        for (x, want) in cases {
            assert_eq!(fmt_g(x), want, "{x}");
        }
    }

    #[test]
    fn tsv_layout() {
        let mut t = Table::new("t", vec!["a", "b"]);
        t.push(vec![Cell::int(3), Cell::Float(0.5)]);
        t.push(vec![Cell::Empty, Cell::Float(f64::NEG_INFINITY)]);
        let r = Report {
            command: "x",
            input: Some(("f.txt".into(), "ab".into())),
            caps: vec![("n_max", "4".into())],
            notes: vec![],
            tables: vec![t],
        };
        let s = r.render(Format::Tsv);
        assert!(s.ends_with("a\tb\n3\t0.5\n\t-inf\n"), "{s}");
        assert!(s.contains("# caps n_max=4\n"));
        let j: Value = serde_json::from_str(&r.render(Format::Json)).unwrap();
        assert_eq!(j["tables"]["t"]["rows"][1]["b"], json!("-inf"));
        assert_eq!(j["tables"]["t"]["rows"][0]["a"], json!(3));
    }
}
