//! Problem parameters, critical exponents and regime classification.

use alloc::format;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

/// Smallest supported dimension.
pub const MIN_DIM: u32 = 2;
/// Largest supported dimension.
pub const MAX_DIM: u32 = 12;

/// Relative tolerance for detecting `p` on a critical exponent when it is
/// not given as an exact ratio.
pub const CRITICAL_RTOL: f64 = 1e-12;

/// A real parameter that may also be known as an exact ratio of integers.
///
/// Ratios let the mass-critical case be detected exactly, e.g. `p = 3`
/// with `N = 3`, `b = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(untagged))]
pub enum Scalar {
    Real(f64),
    Ratio { num: i64, den: i64 },
}

impl Scalar {
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        if den < 0 {
            Scalar::Ratio { num: -num, den: -den }
        } else {
            Scalar::Ratio { num, den }
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Scalar::Real(v) => v,
            Scalar::Ratio { num, den } => num as f64 / den as f64,
        }
    }

    fn exact(self) -> Option<(i128, i128)> {
        match self {
            Scalar::Real(_) => None,
            Scalar::Ratio { num, den } => Some((num as i128, den as i128)),
        }
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Real(v)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Real(v) => write!(f, "{v}"),
            Scalar::Ratio { num, den: 1 } => write!(f, "{num}"),
            Scalar::Ratio { num, den } => write!(f, "{num}/{den}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// Parses `"2.5"` as a real and `"5/2"` (or an integer literal) as an
    /// exact ratio.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::ParameterDomain(format!("cannot parse number {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let num: i64 = n.trim().parse().map_err(|_| bad())?;
            let den: i64 = d.trim().parse().map_err(|_| bad())?;
            if den == 0 {
                return Err(bad());
            }
            return Ok(Scalar::ratio(num, den));
        }
        if let Ok(num) = s.parse::<i64>() {
            return Ok(Scalar::ratio(num, 1));
        }
        s.parse::<f64>().map(Scalar::Real).map_err(|_| bad())
    }
}

/// The quadruple `(N, b, p, ω)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ModelParams {
    pub dim: u32,
    pub b: Scalar,
    pub p: Scalar,
    /// Frequency; absent for mass-constrained problems.
    pub omega: Option<f64>,
}

impl ModelParams {
    pub fn new(dim: u32, b: impl Into<Scalar>, p: impl Into<Scalar>) -> Self {
        ModelParams { dim, b: b.into(), p: p.into(), omega: None }
    }

    pub fn with_omega(mut self, omega: f64) -> Self {
        self.omega = Some(omega);
        self
    }

    pub fn without_omega(mut self) -> Self {
        self.omega = None;
        self
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b.value()
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p.value()
    }

    #[inline]
    pub fn n(&self) -> f64 {
        self.dim as f64
    }

    /// Checks `2 ≤ N ≤ 12`, `b > 0`, `p > 1` and finiteness.
    pub fn validate(&self) -> Result<()> {
        if !(MIN_DIM..=MAX_DIM).contains(&self.dim) {
            return Err(Error::ParameterDomain(format!("dimension N = {} outside {MIN_DIM}..={MAX_DIM}", self.dim)));
        }
        let (b, p) = (self.b(), self.p());
        if !b.is_finite() || b <= 0.0 {
            return Err(Error::ParameterDomain(format!("weight exponent b = {b} must be > 0")));
        }
        if !p.is_finite() || p <= 1.0 {
            return Err(Error::ParameterDomain(format!("nonlinearity p = {p} must be > 1")));
        }
        if let Some(w) = self.omega {
            if !w.is_finite() {
                return Err(Error::ParameterDomain(format!("omega = {w} is not finite")));
            }
        }
        Ok(())
    }

    /// The frequency, or a parameter-domain error when it is absent.
    pub fn omega(&self) -> Result<f64> {
        self.omega.ok_or_else(|| Error::ParameterDomain("omega is required".into()))
    }

    /// `p > 1 + 2b/(N−1)` and, for `N ≥ 3`, `p < 1 + (4+2b)/(N−2)`.
    pub fn admissible(&self) -> bool {
        self.validate().is_ok()
            && !matches!(
                classify_regime(self),
                Regime::BelowAdmissible | Regime::EnergyCritical | Regime::AboveEnergyCritical
            )
    }

    /// Validation plus admissibility, as a `Result`.
    pub fn require_admissible(&self) -> Result<()> {
        self.validate()?;
        if !self.admissible() {
            return Err(Error::Regime(format!(
                "parameters (N={}, b={}, p={}) are not admissible: regime {:?}",
                self.dim,
                self.b,
                self.p,
                classify_regime(self)
            )));
        }
        Ok(())
    }

    pub fn exponents(&self) -> Result<Exponents> {
        critical_exponents(self)
    }

    /// `B = (N(p−1) − 2b)/2`.
    pub fn virial_exponent(&self) -> f64 {
        (self.n() * (self.p() - 1.0) - 2.0 * self.b()) / 2.0
    }

    /// Whether `p` sits on the mass-critical exponent (exactly for ratios,
    /// to [`CRITICAL_RTOL`] otherwise).
    pub fn is_mass_critical(&self) -> bool {
        // p N = N + 4 + 2b
        self.on_line(self.dim as i128, (self.dim + 4) as i128, 2)
    }

    pub fn is_mass_subcritical(&self) -> bool {
        classify_regime(self) == Regime::MassSubcritical
    }

    /// Exact or toleranced test of `p·α = β + γ·b`.
    fn on_line(&self, alpha: i128, beta: i128, gamma: i128) -> bool {
        match (self.p.exact(), self.b.exact()) {
            (Some((pn, pd)), Some((bn, bd))) => {
                // pn/pd·α = β + γ bn/bd  <=>  pn·α·bd = β·pd·bd + γ·bn·pd
                pn * alpha * bd == beta * pd * bd + gamma * bn * pd
            }
            _ => {
                let target = (beta as f64 + gamma as f64 * self.b()) / alpha as f64;
                (self.p() - target).abs() <= CRITICAL_RTOL * target.abs()
            }
        }
    }
}

/// Exponents derived from `(N, b, p)`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Exponents {
    /// `1 + 2b/(N−1)`.
    pub p_lower: f64,
    /// `p_c = 1 + (4+2b)/N`.
    pub p_mass_critical: f64,
    /// `p^c = 1 + (4+2b)/(N−2)` for `N ≥ 3`, `+∞` for `N = 2`.
    pub p_energy_critical: f64,
    /// `s_c = N/2 − (2+b)/(p−1)`.
    pub s_c: f64,
    /// `B = (N(p−1) − 2b)/2`.
    pub big_b: f64,
}

impl Exponents {
    pub fn energy_critical_is_finite(&self) -> bool {
        self.p_energy_critical.is_finite()
    }
}

pub fn critical_exponents(params: &ModelParams) -> Result<Exponents> {
    params.validate()?;
    let (n, b, p) = (params.n(), params.b(), params.p());
    Ok(Exponents {
        p_lower: 1.0 + 2.0 * b / (n - 1.0),
        p_mass_critical: 1.0 + (4.0 + 2.0 * b) / n,
        p_energy_critical: if params.dim <= 2 { f64::INFINITY } else { 1.0 + (4.0 + 2.0 * b) / (n - 2.0) },
        s_c: n / 2.0 - (2.0 + b) / (p - 1.0),
        big_b: params.virial_exponent(),
    })
}

/// Position of `p` on the exponent axis for fixed `(N, b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Regime {
    /// `p ≤ 1 + 2b/(N−1)`.
    BelowAdmissible,
    /// `1 + 2b/(N−1) < p < p_c`.
    MassSubcritical,
    /// `p = p_c`.
    MassCritical,
    /// `p_c < p < p^c`.
    Intercritical,
    /// `p = p^c` (`N ≥ 3` only).
    EnergyCritical,
    /// `p > p^c` (`N ≥ 3` only).
    AboveEnergyCritical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// Classifies `p` against `p_lower`, `p_c` and `p^c`.
///
/// Boundary points are detected exactly when `p` and `b` are ratios and to
/// [`CRITICAL_RTOL`] otherwise. `p = p_lower` maps to
/// [`Regime::BelowAdmissible`].
pub fn classify_regime(params: &ModelParams) -> Regime {
    let n = params.dim as i128;
    let p = params.p();
    let b = params.b();
    let nf = params.n();

    // p (N−1) = (N−1) + 2b
    let p_lower = 1.0 + 2.0 * b / (nf - 1.0);
    if params.on_line(n - 1, n - 1, 2) || p < p_lower {
        return Regime::BelowAdmissible;
    }
    if params.is_mass_critical() {
        return Regime::MassCritical;
    }
    let p_c = 1.0 + (4.0 + 2.0 * b) / nf;
    if p < p_c {
        return Regime::MassSubcritical;
    }
    if params.dim >= 3 {
        // p (N−2) = (N+2) + 2b
        if params.on_line(n - 2, n + 2, 2) {
            return Regime::EnergyCritical;
        }
        let p_upper = 1.0 + (4.0 + 2.0 * b) / (nf - 2.0);
        if p > p_upper {
            return Regime::AboveEnergyCritical;
        }
    }
    Regime::Intercritical
}
