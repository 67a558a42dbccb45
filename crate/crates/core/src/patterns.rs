//! Alphabets, 2×2 patterns, basic sets and the integer encoding of words.
//!
//! Conventions used throughout the crate:
//!
//! * A pattern cell is addressed by `(x, y)` with the origin at the bottom-left,
//!   `x` growing to the right and `y` growing upward.
//! * A **row word** lists the symbols of a row left to right.
//! * A **column word** lists the symbols of a column bottom to top.
//! * `chi` maps a word `u₁…uₙ` to `1 + Σ uⱼ r^(n−j)`, so `u₁` is the most
//!   significant digit. Public indices are 1-based; the `*_0` helpers used by
//!   the matrix builders are 0-based.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Result, SftError};

/// Symbols `0..r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Alphabet {
    r: usize,
}

impl Alphabet {
    pub fn new(r: usize) -> Result<Self> {
        if r < 2 {
            return Err(SftError::InvalidAlphabet(r));
        }
        Ok(Self { r })
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.r
    }

    pub fn check(&self, symbol: usize) -> Result<()> {
        if symbol < self.r {
            Ok(())
        } else {
            Err(SftError::InvalidSymbol { symbol, r: self.r })
        }
    }

    /// `r^n`, or an overflow error.
    pub fn word_count(&self, n: usize) -> Result<usize> {
        checked_pow(self.r, n)
    }
}

pub(crate) fn checked_pow(base: usize, exp: usize) -> Result<usize> {
    let mut acc: usize = 1;
    for _ in 0..exp {
        acc = acc
            .checked_mul(base)
            .ok_or_else(|| SftError::Overflow(format!("{base}^{exp}")))?;
    }
    Ok(acc)
}

/// A 2×2 pattern. Cell `(x, y)`: `(0,0)` bottom-left, `(1,0)` bottom-right,
/// `(0,1)` top-left, `(1,1)` top-right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pattern2x2 {
    pub bl: usize,
    pub br: usize,
    pub tl: usize,
    pub tr: usize,
}

impl Pattern2x2 {
    pub fn new(bl: usize, br: usize, tl: usize, tr: usize) -> Self {
        Self { bl, br, tl, tr }
    }

    /// Built from the file order `tl tr / bl br`.
    pub fn from_rows(tl: usize, tr: usize, bl: usize, br: usize) -> Self {
        Self { bl, br, tl, tr }
    }

    pub fn at(&self, x: usize, y: usize) -> usize {
        match (x, y) {
            (0, 0) => self.bl,
            (1, 0) => self.br,
            (0, 1) => self.tl,
            (1, 1) => self.tr,
            _ => panic!("cell ({x},{y}) outside a 2x2 pattern"),
        }
    }

    /// Mirror across the diagonal: cell `(x, y)` moves to `(y, x)`.
    pub fn transpose(&self) -> Self {
        Self {
            bl: self.bl,
            br: self.tl,
            tl: self.br,
            tr: self.tr,
        }
    }

    pub fn validate(&self, alphabet: Alphabet) -> Result<()> {
        for s in [self.bl, self.br, self.tl, self.tr] {
            alphabet.check(s)?;
        }
        Ok(())
    }

    #[inline]
    fn code(&self, r: usize) -> usize {
        ((self.bl * r + self.br) * r + self.tl) * r + self.tr
    }
}

impl fmt::Display for Pattern2x2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} / {} {}", self.tl, self.tr, self.bl, self.br)
    }
}

/// A set of admissible 2×2 patterns over a fixed alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasicSet {
    alphabet: Alphabet,
    patterns: BTreeSet<Pattern2x2>,
    lookup: Vec<bool>,
}

impl BasicSet {
    pub fn new<I>(alphabet: Alphabet, patterns: I) -> Result<Self>
    where
        I: IntoIterator<Item = Pattern2x2>,
    {
        let r = alphabet.size();
        let table = checked_pow(r, 4)?;
        let mut lookup = vec![false; table];
        let mut set = BTreeSet::new();
        for p in patterns {
            p.validate(alphabet)?;
            lookup[p.code(r)] = true;
            set.insert(p);
        }
        Ok(Self {
            alphabet,
            patterns: set,
            lookup,
        })
    }

    pub fn empty(alphabet: Alphabet) -> Self {
        Self::new(alphabet, std::iter::empty()).expect("empty set is valid")
    }

    /// All `r⁴` patterns.
    pub fn full(alphabet: Alphabet) -> Self {
        let r = alphabet.size();
        let all = (0..r).flat_map(move |bl| {
            (0..r).flat_map(move |br| {
                (0..r).flat_map(move |tl| (0..r).map(move |tr| Pattern2x2::new(bl, br, tl, tr)))
            })
        });
        Self::new(alphabet, all).expect("full set is valid")
    }

    /// Keep exactly the patterns accepted by `pred(bl, br, tl, tr)`.
    pub fn from_predicate<F>(alphabet: Alphabet, mut pred: F) -> Self
    where
        F: FnMut(usize, usize, usize, usize) -> bool,
    {
        let kept: Vec<_> = Self::full(alphabet)
            .patterns
            .into_iter()
            .filter(|p| pred(p.bl, p.br, p.tl, p.tr))
            .collect();
        Self::new(alphabet, kept).expect("subset of the full set is valid")
    }

    #[inline]
    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    #[inline]
    pub fn r(&self) -> usize {
        self.alphabet.size()
    }

    pub fn patterns(&self) -> impl Iterator<Item = &Pattern2x2> {
        self.patterns.iter()
    }

    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    pub fn contains(&self, p: &Pattern2x2) -> bool {
        p.validate(self.alphabet).is_ok() && self.lookup[p.code(self.r())]
    }

    /// Membership test on raw cells; all symbols must be `< r`.
    #[inline]
    pub fn allows(&self, bl: usize, br: usize, tl: usize, tr: usize) -> bool {
        let r = self.r();
        self.lookup[((bl * r + br) * r + tl) * r + tr]
    }

    /// Swap the roles of `x` and `y` in every pattern.
    pub fn reflect(&self) -> Self {
        Self::new(self.alphabet, self.patterns.iter().map(Pattern2x2::transpose))
            .expect("transposed patterns stay valid")
    }

    /// Text form: `r=<r>` then one `tl tr / bl br` line per pattern.
    pub fn to_text(&self) -> String {
        let mut out = format!("r={}\n", self.r());
        for p in &self.patterns {
            out.push_str(&p.to_string());
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let doc = BasicSetDoc {
            r: self.r(),
            patterns: self
                .patterns
                .iter()
                .map(|p| [p.tl, p.tr, p.bl, p.br])
                .collect(),
        };
        serde_json::to_string(&doc).expect("plain data serializes")
    }

    /// Parse either the text form or the JSON form (`{"r":..,"patterns":[[tl,tr,bl,br],..]}`).
    pub fn parse(input: &str) -> Result<Self> {
        if input.trim_start().starts_with('{') {
            Self::parse_json(input)
        } else {
            Self::parse_text(input)
        }
    }

    fn parse_json(input: &str) -> Result<Self> {
        let doc: BasicSetDoc =
            serde_json::from_str(input).map_err(|e| SftError::Parse(e.to_string()))?;
        let alphabet = Alphabet::new(doc.r)?;
        let pats = doc
            .patterns
            .iter()
            .map(|&[tl, tr, bl, br]| Pattern2x2::from_rows(tl, tr, bl, br));
        Self::new(alphabet, pats)
    }

    fn parse_text(input: &str) -> Result<Self> {
        let mut lines = input
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (lineno, header) = lines
            .next()
            .ok_or_else(|| SftError::Parse("missing `r=<int>` header".into()))?;
        let r_text = header
            .strip_prefix("r=")
            .ok_or_else(|| SftError::Parse(format!("line {lineno}: expected `r=<int>`")))?;
        let r: usize = r_text
            .trim()
            .parse()
            .map_err(|_| SftError::Parse(format!("line {lineno}: bad alphabet size `{r_text}`")))?;
        let alphabet = Alphabet::new(r)?;

        let mut pats = Vec::new();
        for (lineno, line) in lines {
            let (top, bottom) = line
                .split_once('/')
                .ok_or_else(|| SftError::Parse(format!("line {lineno}: expected `tl tr / bl br`")))?;
            let top = parse_pair(top, lineno)?;
            let bottom = parse_pair(bottom, lineno)?;
            let p = Pattern2x2::from_rows(top.0, top.1, bottom.0, bottom.1);
            p.validate(alphabet)
                .map_err(|e| SftError::Parse(format!("line {lineno}: {e}")))?;
            pats.push(p);
        }
        Self::new(alphabet, pats)
    }
}

fn parse_pair(text: &str, lineno: usize) -> Result<(usize, usize)> {
    let nums: Vec<usize> = text
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| SftError::Parse(format!("line {lineno}: bad symbol `{t}`")))
        })
        .collect::<Result<_>>()?;
    match nums.as_slice() {
        [a, b] => Ok((*a, *b)),
        _ => Err(SftError::Parse(format!(
            "line {lineno}: expected two symbols on each side of `/`"
        ))),
    }
}

#[derive(Serialize, Deserialize)]
struct BasicSetDoc {
    r: usize,
    patterns: Vec<[usize; 4]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Bottom to top.
    Column,
    /// Left to right.
    Row,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Word {
    symbols: Vec<usize>,
    orientation: Orientation,
}

impl Word {
    pub fn new(symbols: Vec<usize>, orientation: Orientation) -> Result<Self> {
        if symbols.is_empty() {
            return Err(SftError::InvalidSize("words have length at least 1".into()));
        }
        Ok(Self {
            symbols,
            orientation,
        })
    }

    pub fn row(symbols: Vec<usize>) -> Result<Self> {
        Self::new(symbols, Orientation::Row)
    }

    pub fn column(symbols: Vec<usize>) -> Result<Self> {
        Self::new(symbols, Orientation::Column)
    }

    pub fn symbols(&self) -> &[usize] {
        &self.symbols
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// `u₂…uₙu₁`.
    pub fn rotate_left(&self) -> Self {
        let mut symbols = self.symbols.clone();
        symbols.rotate_left(1);
        Self {
            symbols,
            orientation: self.orientation,
        }
    }
}

/// `1 + Σ uⱼ r^(n−j)`.
pub fn chi(word: &Word, r: usize) -> Result<usize> {
    let alphabet = Alphabet::new(r)?;
    let mut acc: usize = 0;
    for &u in word.symbols() {
        alphabet.check(u)?;
        acc = acc
            .checked_mul(r)
            .and_then(|v| v.checked_add(u))
            .ok_or_else(|| SftError::Overflow("word index".into()))?;
    }
    acc.checked_add(1)
        .ok_or_else(|| SftError::Overflow("word index".into()))
}

/// Inverse of [`chi`] for words of length `n`.
pub fn unchi(index: usize, n: usize, r: usize, orientation: Orientation) -> Result<Word> {
    let alphabet = Alphabet::new(r)?;
    let max = alphabet.word_count(n)?;
    if index < 1 || index > max {
        return Err(SftError::IndexOutOfRange { index, max });
    }
    Word::new(digits_0(index - 1, n, r), orientation)
}

/// Index of the left rotation of the word encoded by `index`.
pub fn sigma(index: usize, n: usize, r: usize) -> Result<usize> {
    let w = unchi(index, n, r, Orientation::Row)?;
    chi(&w.rotate_left(), r)
}

/// Base-`r` digits of a 0-based index, most significant first.
#[inline]
pub(crate) fn digits_0(mut idx: usize, n: usize, r: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for slot in out.iter_mut().rev() {
        *slot = idx % r;
        idx /= r;
    }
    out
}

/// 0-based left rotation on `n`-digit base-`r` indices, given `rn_1 = r^(n−1)`.
#[inline]
pub(crate) fn sigma_0(idx: usize, r: usize, rn_1: usize) -> usize {
    let lead = idx / rn_1;
    (idx % rn_1) * r + lead
}
