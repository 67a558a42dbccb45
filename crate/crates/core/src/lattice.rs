//! Skew coordinate systems on ℤ² and Hermite normal forms of sublattices.
//!
//! A system `γ = [[a, b], [c, d]] ∈ GL₂(ℤ)` has unit vectors `γ⃗₁ = (a, b)`
//! and `γ⃗₂ = (c, d)`. The form `[[M, L], [0, K]]_γ` is the lattice spanned by
//! `M·γ⃗₁` and `L·γ⃗₁ + K·γ⃗₂`, i.e. by the columns of `γᵗ·[[M, L], [0, K]]`.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SftError};

fn overflow() -> SftError {
    SftError::Overflow("64-bit lattice arithmetic".into())
}

fn mul(x: i64, y: i64) -> Result<i64> {
    x.checked_mul(y).ok_or_else(overflow)
}

fn add(x: i64, y: i64) -> Result<i64> {
    x.checked_add(y).ok_or_else(overflow)
}

/// Integer 2×2 matrix `[[a11, a12], [a21, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntMat2 {
    pub a11: i64,
    pub a12: i64,
    pub a21: i64,
    pub a22: i64,
}

impl IntMat2 {
    pub const fn new(a11: i64, a12: i64, a21: i64, a22: i64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn det(&self) -> Result<i64> {
        mul(self.a11, self.a22)?
            .checked_sub(mul(self.a12, self.a21)?)
            .ok_or_else(overflow)
    }

    pub fn transpose(&self) -> Self {
        Self::new(self.a11, self.a21, self.a12, self.a22)
    }

    pub fn mul(&self, o: &Self) -> Result<Self> {
        Ok(Self::new(
            add(mul(self.a11, o.a11)?, mul(self.a12, o.a21)?)?,
            add(mul(self.a11, o.a12)?, mul(self.a12, o.a22)?)?,
            add(mul(self.a21, o.a11)?, mul(self.a22, o.a21)?)?,
            add(mul(self.a21, o.a12)?, mul(self.a22, o.a22)?)?,
        ))
    }

    /// Image of `(s, t)`.
    pub fn apply(&self, s: i64, t: i64) -> (i64, i64) {
        (self.a11 * s + self.a12 * t, self.a21 * s + self.a22 * t)
    }
}

impl fmt::Display for IntMat2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a11, self.a12, self.a21, self.a22)
    }
}

/// Element of GL₂(ℤ).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Unimodular {
    a: i64,
    b: i64,
    c: i64,
    d: i64,
}

impl Unimodular {
    pub fn new(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        let det = IntMat2::new(a, b, c, d).det()?;
        if det.abs() != 1 {
            return Err(SftError::NotUnimodular(det));
        }
        Ok(Self { a, b, c, d })
    }

    /// `γ₀`, the standard system.
    pub const fn standard() -> Self {
        Self { a: 1, b: 0, c: 0, d: 1 }
    }

    /// `γ̂₀ = [[0, 1], [1, 0]]`, the conjugate system.
    pub const fn conjugate() -> Self {
        Self { a: 0, b: 1, c: 1, d: 0 }
    }

    /// `γ_q = [[1, q], [0, 1]]`.
    pub const fn gamma_q(q: i64) -> Self {
        Self { a: 1, b: q, c: 0, d: 1 }
    }

    pub fn entries(&self) -> (i64, i64, i64, i64) {
        (self.a, self.b, self.c, self.d)
    }

    pub fn det(&self) -> i64 {
        self.a * self.d - self.b * self.c
    }

    pub fn as_mat(&self) -> IntMat2 {
        IntMat2::new(self.a, self.b, self.c, self.d)
    }

    pub fn inverse(&self) -> Self {
        let det = self.det();
        Self {
            a: self.d * det,
            b: -self.b * det,
            c: -self.c * det,
            d: self.a * det,
        }
    }
}

impl fmt::Display for Unimodular {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[[{}, {}], [{}, {}]]", self.a, self.b, self.c, self.d)
    }
}

/// Canonical generator `[[n, ℓ], [0, k]]` in the given system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HermiteForm {
    pub n: i64,
    pub ell: i64,
    pub k: i64,
    pub system: Unimodular,
}

impl HermiteForm {
    pub fn new(n: i64, ell: i64, k: i64, system: Unimodular) -> Result<Self> {
        if n < 1 || k < 1 {
            return Err(SftError::InvalidHermite(format!("n = {n} and k = {k} must be positive")));
        }
        if !(0..n).contains(&ell) {
            return Err(SftError::InvalidHermite(format!("shift {ell} outside 0..{n}")));
        }
        Ok(Self { n, ell, k, system })
    }

    pub fn matrix(&self) -> IntMat2 {
        IntMat2::new(self.n, self.ell, 0, self.k)
    }

    /// Generators in standard coordinates: `γᵗ·[[n, ℓ], [0, k]]`.
    pub fn standard_generators(&self) -> Result<IntMat2> {
        self.system.as_mat().transpose().mul(&self.matrix())
    }
}

impl fmt::Display for HermiteForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {} {}", self.n, self.ell, self.k)
    }
}

/// `(g, b₁, b₂)` with `g = gcd(x, y) = b₁x + b₂y ≥ 0`; `gcd(x, 0) = |x|` with
/// `b₁ = sign(x)`.
pub fn ext_gcd(x: i64, y: i64) -> (i64, i64, i64) {
    if y == 0 {
        return (x.abs(), if x < 0 { -1 } else { 1 }, 0);
    }
    let e = x.extended_gcd(&y);
    if e.gcd < 0 {
        (-e.gcd, -e.x, -e.y)
    } else {
        (e.gcd, e.x, e.y)
    }
}

/// Column-reduces `A` to `[[m, ℓ], [0, k]]` with `m, k > 0` and `0 ≤ ℓ < m`.
///
/// Returns the form (tagged `γ₀`) and `U` with `A·U = [[m, ℓ], [0, k]]`.
pub fn hnf_reduce(a: &IntMat2) -> Result<(HermiteForm, Unimodular)> {
    let det = a.det()?;
    if det == 0 {
        return Err(SftError::Singular);
    }
    let (k, b1, b2) = ext_gcd(a.a21, a.a22);
    // First column of U kills the bottom row, the second produces k.
    let (mut u11, mut u21) = (a.a22 / k, -a.a21 / k);
    let (mut u12, mut u22) = (b1, b2);
    let mut m = det / k;
    let mut ell = add(mul(b1, a.a11)?, mul(b2, a.a12)?)?;
    if m < 0 {
        m = -m;
        u11 = -u11;
        u21 = -u21;
    }
    let t = ell.div_euclid(m);
    ell -= t * m;
    u12 = add(u12, -mul(t, u11)?)?;
    u22 = add(u22, -mul(t, u21)?)?;
    let u = Unimodular::new(u11, u12, u21, u22)?;
    Ok((HermiteForm::new(m, ell, k, Unimodular::standard())?, u))
}

fn validate_hnf(m: i64, l: i64, k: i64) -> Result<()> {
    HermiteForm::new(m, l, k, Unimodular::standard()).map(|_| ())
}

/// Generators `γᵗ·[[M, L], [0, K]]` without validating the form.
pub fn gamma_generators(gamma: &Unimodular, m: i64, l: i64, k: i64) -> Result<IntMat2> {
    gamma.as_mat().transpose().mul(&IntMat2::new(m, l, 0, k))
}

/// Hermite form in `γ₀` of `[[M, L], [0, K]]_γ` by direct reduction.
pub fn to_gamma0_generic(gamma: &Unimodular, m: i64, l: i64, k: i64) -> Result<HermiteForm> {
    validate_hnf(m, l, k)?;
    Ok(hnf_reduce(&gamma_generators(gamma, m, l, k)?)?.0)
}

/// Closed form for `b ≠ 0`: `k = gcd(bM, bL + dK)`, `m = MK/k`,
/// `ℓ = b₁(aM) + b₂(aL + cK)` reduced mod `m`.
pub fn to_gamma0_closed(gamma: &Unimodular, m: i64, l: i64, k: i64) -> Result<HermiteForm> {
    validate_hnf(m, l, k)?;
    let (a, b, c, d) = gamma.entries();
    if b == 0 {
        return Err(SftError::InvalidSize("closed form needs b ≠ 0".into()));
    }
    let (kk, b1, b2) = ext_gcd(mul(b, m)?, add(mul(b, l)?, mul(d, k)?)?);
    let mm = mul(m, k)? / kk;
    let ell = add(mul(b1, mul(a, m)?)?, mul(b2, add(mul(a, l)?, mul(c, k)?)?)?)?;
    HermiteForm::new(mm, ell.rem_euclid(mm), kk, Unimodular::standard())
}

/// Hermite form in `γ₀` equivalent to `[[M, L], [0, K]]_γ`.
pub fn to_gamma0(gamma: &Unimodular, m: i64, l: i64, k: i64) -> Result<HermiteForm> {
    if gamma.entries().1 != 0 {
        to_gamma0_closed(gamma, m, l, k)
    } else {
        to_gamma0_generic(gamma, m, l, k)
    }
}

/// Reference path: `hnf_reduce((γ′ᵗ)⁻¹·γᵗ·[[M, L], [0, K]])`, tagged `γ′`.
pub fn transform_generic(gamma: &Unimodular, gamma_p: &Unimodular, m: i64, l: i64, k: i64) -> Result<HermiteForm> {
    validate_hnf(m, l, k)?;
    let back = gamma_p.inverse().as_mat().transpose();
    let a = back.mul(&gamma_generators(gamma, m, l, k)?)?;
    let (h, _) = hnf_reduce(&a)?;
    HermiteForm::new(h.n, h.ell, h.k, *gamma_p)
}

fn normalize(mut m: i64, mut l: i64, mut k: i64, system: Unimodular) -> Result<HermiteForm> {
    if m == 0 || k == 0 {
        return Err(SftError::Singular);
    }
    if k < 0 {
        k = -k;
        l = -l;
    }
    if m < 0 {
        m = -m;
    }
    HermiteForm::new(m, l.rem_euclid(m), k, system)
}

/// Closed-form change of system `γ → γ′`.
///
/// With `D = a′b − ab′ ≠ 0`: `K′ = gcd(DM, DL + (a′d − b′c)K)`,
/// `M′ = ΔΔ′·MK/K′` and `L′ = b₁(ad′ − bc′)M + b₂[(ad′ − bc′)L + (cd′ − c′d)K]`.
/// When `D = 0` the systems share `γ⃗₁` up to sign and the map is triangular.
pub fn transform_closed(gamma: &Unimodular, gamma_p: &Unimodular, m: i64, l: i64, k: i64) -> Result<HermiteForm> {
    validate_hnf(m, l, k)?;
    let (a, b, c, d) = gamma.entries();
    let (ap, bp, cp, dp) = gamma_p.entries();
    let dd = ap * b - a * bp;
    let p = a * dp - b * cp;
    let q = c * dp - cp * d;
    let s = ap * d - bp * c;
    let top = mul(p, m)?;
    let top_right = add(mul(p, l)?, mul(q, k)?)?;
    if dd == 0 {
        let kp = mul(s, k)?;
        return normalize(top, top_right, kp, *gamma_p);
    }
    let (kp, b1, b2) = ext_gcd(mul(dd, m)?, add(mul(dd, l)?, mul(s, k)?)?);
    let mp = mul(gamma.det() * gamma_p.det(), mul(m, k)?)? / kp;
    let lp = add(mul(b1, top)?, mul(b2, top_right)?)?;
    normalize(mp, lp, kp, *gamma_p)
}

/// `[[M, L], [0, K]]_γ` rewritten in `γ′`; the closed form is used when it
/// reproduces the same lattice, otherwise the generic reduction.
pub fn transform(gamma: &Unimodular, gamma_p: &Unimodular, m: i64, l: i64, k: i64) -> Result<HermiteForm> {
    let generic = transform_generic(gamma, gamma_p, m, l, k)?;
    match transform_closed(gamma, gamma_p, m, l, k) {
        Ok(fast) if fast == generic => Ok(fast),
        _ => Ok(generic),
    }
}

/// Whether `A·ℤ² = B·ℤ²`.
pub fn equivalent(a: &IntMat2, b: &IntMat2) -> Result<bool> {
    Ok(hnf_reduce(a)?.0 == hnf_reduce(b)?.0)
}

/// `{A·(s, t)} ∩ [−radius, radius]²`, found by testing each box point for
/// integrality of `A⁻¹·p`.
pub fn lattice_points(a: &IntMat2, radius: i64) -> Result<BTreeSet<(i64, i64)>> {
    if radius < 1 {
        return Err(SftError::InvalidSize(format!("radius {radius} must be positive")));
    }
    let det = a.det()?;
    if det == 0 {
        return Err(SftError::Singular);
    }
    let mut out = BTreeSet::new();
    for x in -radius..=radius {
        for y in -radius..=radius {
            let s = a.a22 * x - a.a12 * y;
            let t = -a.a21 * x + a.a11 * y;
            if s % det == 0 && t % det == 0 {
                out.insert((x, y));
            }
        }
    }
    Ok(out)
}
