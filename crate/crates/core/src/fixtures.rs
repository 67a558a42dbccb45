//! Named basic sets used by the tests and the command-line tool.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::patterns::{Alphabet, BasicSet, Pattern2x2};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fixture {
    pub name: String,
    pub bs: BasicSet,
}

impl Fixture {
    fn new(name: impl Into<String>, bs: BasicSet) -> Self {
        Self { name: name.into(), bs }
    }
}

fn binary() -> Alphabet {
    Alphabet::new(2).expect("r = 2")
}

/// The basic set whose horizontal matrix is `h2`: `h2[i][j] = 1` admits the
/// pattern with left column `i` and right column `j` (bottom digit first).
pub fn from_h2(r: usize, h2: &[&[u8]]) -> BasicSet {
    let alphabet = Alphabet::new(r).expect("r ≥ 2");
    BasicSet::from_predicate(alphabet, |bl, br, tl, tr| h2[bl * r + tl][br * r + tr] == 1)
}

/// The basic set whose vertical matrix is `v2`: `v2[i][j] = 1` admits the
/// pattern with bottom row `i` and top row `j` (left digit first).
pub fn from_v2(r: usize, v2: &[&[u8]]) -> BasicSet {
    let alphabet = Alphabet::new(r).expect("r ≥ 2");
    BasicSet::from_predicate(alphabet, |bl, br, tl, tr| v2[bl * r + br][tl * r + tr] == 1)
}

/// Golden mean: no two adjacent ones.
pub fn golden_mean() -> BasicSet {
    from_h2(2, &[&[1, 1, 1, 0], &[1, 0, 1, 0], &[1, 1, 0, 0], &[0, 0, 0, 0]])
}

/// Hard hexagon: golden mean that also forbids ones on the anti-diagonal.
pub fn hard_hexagon() -> BasicSet {
    from_h2(2, &[&[1, 1, 1, 0], &[1, 0, 1, 0], &[1, 0, 0, 0], &[0, 0, 0, 0]])
}

/// Golden mean that also forbids ones on both diagonals.
pub fn strict_golden_mean() -> BasicSet {
    from_h2(2, &[&[1, 1, 1, 0], &[1, 0, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, 0]])
}

/// A reducible set with `|Vₘᵏ| = (k+2)^{m−1}·2^{k+1}`.
pub fn reducible() -> BasicSet {
    from_v2(2, &[&[1, 0, 0, 1], &[1, 1, 1, 1], &[1, 1, 1, 1], &[1, 0, 0, 1]])
}

pub fn full(r: usize) -> BasicSet {
    BasicSet::full(Alphabet::new(r).expect("r ≥ 2"))
}

pub fn empty(r: usize) -> BasicSet {
    BasicSet::empty(Alphabet::new(r).expect("r ≥ 2"))
}

/// Neighbours always differ: exactly two configurations.
pub fn checkerboard() -> BasicSet {
    BasicSet::from_predicate(binary(), |bl, br, tl, tr| bl != br && tl != tr && bl != tl && br != tr)
}

/// Only the all-zero pattern.
pub fn zero_only() -> BasicSet {
    BasicSet::new(binary(), [Pattern2x2::new(0, 0, 0, 0)]).expect("valid pattern")
}

/// Three symbols: even columns carry any word over `{0, 1}`, odd columns are
/// all `2`.
pub fn interleaved() -> BasicSet {
    let alphabet = Alphabet::new(3).expect("r = 3");
    BasicSet::from_predicate(alphabet, |bl, br, tl, tr| {
        let free = |a: usize, b: usize| a < 2 && b < 2;
        let rigid = |a: usize, b: usize| a == 2 && b == 2;
        (free(bl, tl) && rigid(br, tr)) || (rigid(bl, tl) && free(br, tr))
    })
}

/// Seeded random set: alternating `r = 2` (density 0.6) and `r = 3`
/// (density 0.35), never empty.
pub fn random(index: u64) -> BasicSet {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5f7_0000 + index);
    let (r, p) = if index % 2 == 0 { (2, 0.6) } else { (3, 0.35) };
    let alphabet = Alphabet::new(r).expect("r ≥ 2");
    loop {
        let bs = BasicSet::from_predicate(alphabet, |_, _, _, _| rng.gen_bool(p));
        if !bs.is_empty() {
            return bs;
        }
    }
}

/// Golden mean, hard hexagon, strict golden mean, the reducible set, the full
/// and empty binary sets and twenty random sets.
pub fn standard() -> Vec<Fixture> {
    let mut v = vec![
        Fixture::new("golden-mean", golden_mean()),
        Fixture::new("hard-hexagon", hard_hexagon()),
        Fixture::new("strict-golden-mean", strict_golden_mean()),
        Fixture::new("reducible", reducible()),
        Fixture::new("full-2", full(2)),
        Fixture::new("empty-2", empty(2)),
    ];
    v.extend((0..20).map(|i| Fixture::new(format!("random-{i:02}"), random(i))));
    v
}

/// `standard()` plus the checkerboard, zero-only, interleaved and full
/// ternary sets.
pub fn extended() -> Vec<Fixture> {
    let mut v = standard();
    v.push(Fixture::new("checkerboard", checkerboard()));
    v.push(Fixture::new("zero-only", zero_only()));
    v.push(Fixture::new("interleaved", interleaved()));
    v.push(Fixture::new("full-3", full(3)));
    v
}
