use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Grid;

/// Serializes exponents with `∞` written as the string `"inf"`.
pub mod exponent {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_infinite() && *x > 0.0 {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => super::parse_exponent(&t).map_err(de::Error::custom),
        }
    }
}

/// Parses an exponent; accepts `inf`, `infinity` and `∞`.
pub fn parse_exponent(text: &str) -> std::result::Result<f64, String> {
    match text.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
        t => t.parse::<f64>().map_err(|e| format!("bad exponent `{text}`: {e}")),
    }
}

pub(crate) fn fmt_exponent(x: f64) -> String {
    if x.is_infinite() {
        "inf".into()
    } else {
        format!("{x}")
    }
}

/// Morrey exponents `1 <= q <= p <= ∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorreyParams {
    #[serde(with = "exponent")]
    pub p: f64,
    #[serde(with = "exponent")]
    pub q: f64,
}

impl MorreyParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(q >= 1.0 && q <= p) || p.is_nan() {
            return Err(Error::InvalidParams(format!(
                "Morrey exponents must satisfy 1 ≤ q ≤ p ≤ ∞ (got p = {}, q = {})",
                fmt_exponent(p),
                fmt_exponent(q)
            )));
        }
        Ok(Self { p, q })
    }

    pub fn lebesgue(p: f64) -> Result<Self> {
        Self::new(p, p)
    }

    pub fn sup() -> Self {
        Self {
            p: f64::INFINITY,
            q: f64::INFINITY,
        }
    }

    pub(crate) fn inv_p(&self) -> f64 {
        1.0 / self.p
    }

    pub(crate) fn inv_q(&self) -> f64 {
        1.0 / self.q
    }
}

/// Besov-Morrey parameters `N^s_{p,q,r}` (or the homogeneous `Ṅ^s_{p,q,r}`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BMParams {
    pub s: f64,
    pub morrey: MorreyParams,
    #[serde(with = "exponent")]
    pub r: f64,
    pub homogeneous: bool,
}

impl BMParams {
    pub fn new(s: f64, p: f64, q: f64, r: f64, homogeneous: bool) -> Result<Self> {
        let morrey = MorreyParams::new(p, q)?;
        if !s.is_finite() {
            return Err(Error::InvalidParams(format!("smoothness s must be finite, got {s}")));
        }
        if !(r >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "summability r must satisfy 1 ≤ r ≤ ∞, got {}",
                fmt_exponent(r)
            )));
        }
        Ok(Self {
            s,
            morrey,
            r,
            homogeneous,
        })
    }

    pub fn p(&self) -> f64 {
        self.morrey.p
    }

    pub fn q(&self) -> f64 {
        self.morrey.q
    }

    pub fn with_s(&self, s: f64) -> Self {
        Self { s, ..*self }
    }

    pub fn with_morrey(&self, morrey: MorreyParams) -> Self {
        Self { morrey, ..*self }
    }

    pub fn with_r(&self, r: f64) -> Self {
        Self { r, ..*self }
    }

    pub fn homogeneous(&self, homogeneous: bool) -> Self {
        Self {
            homogeneous,
            ..*self
        }
    }

    /// `s > n/p`, or `s = n/p` with `r = 1`.
    pub fn is_algebra(&self, dim: usize) -> bool {
        let crit = dim as f64 / self.p();
        self.s > crit || (self.s == crit && self.r == 1.0)
    }

    /// Local well-posedness range for the flow solvers: `1 < q <= p < ∞`
    /// and `s > 1 + n/p` (or `s = 1 + n/p` with `r = 1`).
    pub fn check_solver_range(&self, dim: usize) -> Result<()> {
        if !(self.q() > 1.0 && self.p().is_finite()) {
            return Err(Error::InvalidParams(format!(
                "solver norms need 1 < q ≤ p < ∞ (got p = {}, q = {})",
                fmt_exponent(self.p()),
                fmt_exponent(self.q())
            )));
        }
        let crit = 1.0 + dim as f64 / self.p();
        if !(self.s > crit || (self.s == crit && self.r == 1.0)) {
            return Err(Error::InvalidParams(format!(
                "solver norms need s > 1 + n/p = {crit} (or equality with r = 1), got s = {}",
                self.s
            )));
        }
        Ok(())
    }
}

/// Windows of half-width `L·2^{-k}`, `k = 1..=kmax`, with lower corners on
/// every `stride`-th grid node per axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowSet {
    pub kmax: u32,
    pub stride: usize,
}

impl WindowSet {
    /// Every dyadic radius down to the grid spacing, every centre.
    pub fn full(grid: &Grid) -> Self {
        Self {
            kmax: grid.log2_size(),
            stride: 1,
        }
    }

    pub fn new(grid: &Grid, kmax: u32, stride: usize) -> Result<Self> {
        let ws = Self { kmax, stride };
        ws.validate(grid)?;
        Ok(ws)
    }

    pub fn validate(&self, grid: &Grid) -> Result<()> {
        if self.kmax < 1 || self.kmax > grid.log2_size() {
            return Err(Error::InvalidParams(format!(
                "kmax must lie in [1, log2(size) = {}], got {}",
                grid.log2_size(),
                self.kmax
            )));
        }
        if self.stride == 0 || grid.size % self.stride != 0 {
            return Err(Error::InvalidParams(format!(
                "stride {} must divide size {}",
                self.stride, grid.size
            )));
        }
        Ok(())
    }

    /// Half-widths, largest first.
    pub fn radii(&self, grid: &Grid) -> Vec<f64> {
        (1..=self.kmax)
            .map(|k| grid.length * 2f64.powi(-(k as i32)))
            .collect()
    }

    /// Window sides in grid cells, matching [`WindowSet::radii`].
    pub fn sides(&self, grid: &Grid) -> Vec<usize> {
        (1..=self.kmax).map(|k| grid.size >> (k - 1)).collect()
    }
}
