//! Quadratic energy forms, parameter classification and the degree formula.
//!
//! For a nonempty index set `J` and a scale `s`,
//!
//! ```text
//!     Λ_J(v) = s · Σ_{i∈J} v_i − Σ_{i,j∈J} a_ij v_i v_j
//! ```
//!
//! with `s = 4` for masses of entire solutions ([`ENTIRE`]) and `s = 8π`
//! for mean-field parameters ([`MEANFIELD`]).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{check_hypotheses, CoefficientMatrix, MatrixError};

/// Scale of `Λ_J` on masses `σ` of entire solutions.
pub const ENTIRE: f64 = 4.0;
/// Scale of `Λ_J` on mean-field parameters `ρ`.
pub const MEANFIELD: f64 = 8.0 * PI;

/// Exhaustive subset loops are limited to this many components.
pub const MAX_SUBSET_N: usize = 20;

/// Default relative tolerance for detecting `ρ ∈ Γ_N`.
pub const GAMMA_REL_TOL: f64 = 1e-9;

/// `|ξ_i| ≤ XI_ZERO_REL · max|ξ|` counts as `ξ_i = 0`.
pub const XI_ZERO_REL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnergyError {
    #[error("index set is empty")]
    EmptySubset,
    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("rho[{0}] = {1} is not positive")]
    NonpositiveRho(usize, f64),
    #[error("rho[{0}] = {1} is negative")]
    NegativeRho(usize, f64),
    #[error("sigma[{0}] = {1} is negative")]
    NegativeMass(usize, f64),
    #[error("total mass is zero")]
    ZeroMass,
    #[error("n = {0} exceeds the subset enumeration limit {MAX_SUBSET_N}")]
    TooLarge(usize),
    #[error("degree overflows for chi = {chi}, N = {n}")]
    DegreeOverflow { chi: i64, n: u32 },
    #[error("matrix does not satisfy (H1) and (H2)")]
    HypothesesNotSatisfied,
    #[error("all row sums of the inverse vanish")]
    AllXiZero,
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

fn check_len(a: &CoefficientMatrix, v: &[f64]) -> Result<(), EnergyError> {
    if v.len() != a.n() {
        return Err(EnergyError::LengthMismatch {
            expected: a.n(),
            got: v.len(),
        });
    }
    Ok(())
}

/// `Λ_J(v)` for the index set `subset` at the given scale.
pub fn lambda_j(
    a: &CoefficientMatrix,
    v: &[f64],
    subset: &[usize],
    scale: f64,
) -> Result<f64, EnergyError> {
    check_len(a, v)?;
    if subset.is_empty() {
        return Err(EnergyError::EmptySubset);
    }
    if let Some(&index) = subset.iter().find(|&&i| i >= a.n()) {
        return Err(EnergyError::IndexOutOfRange { index, n: a.n() });
    }
    let linear: f64 = subset.iter().map(|&i| v[i]).sum();
    let quad: f64 = subset
        .iter()
        .map(|&i| subset.iter().map(|&j| a.get(i, j) * v[i] * v[j]).sum::<f64>())
        .sum();
    Ok(scale * linear - quad)
}

/// `Λ_J(v)` with `J` given as a bit mask over `0..n`.
pub(crate) fn lambda_mask(a: &CoefficientMatrix, v: &[f64], mask: u64, scale: f64) -> f64 {
    let n = a.n();
    let mut linear = 0.0;
    let mut quad = 0.0;
    for i in (0..n).filter(|i| mask >> i & 1 == 1) {
        linear += v[i];
        for j in (0..n).filter(|j| mask >> j & 1 == 1) {
            quad += a.get(i, j) * v[i] * v[j];
        }
    }
    scale * linear - quad
}

/// Members of a bit mask, ascending.
pub fn mask_members(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

fn full_mask(n: usize) -> u64 {
    (1u64 << n) - 1
}

/// `Σ_{i,j} a_ij v_i v_j`.
pub fn quadratic_form(a: &CoefficientMatrix, v: &[f64]) -> f64 {
    a.mul_vec(v).iter().zip(v).map(|(x, y)| x * y).sum()
}

/// True iff `Λ_J(ρ) > 0` at scale `8π` for every nonempty `J ⊆ I`,
/// the full index set included.
pub fn in_gamma(a: &CoefficientMatrix, rho: &[f64]) -> Result<bool, EnergyError> {
    check_len(a, rho)?;
    let n = a.n();
    if n > MAX_SUBSET_N {
        return Err(EnergyError::TooLarge(n));
    }
    if let Some((i, &r)) = rho.iter().enumerate().find(|(_, &r)| !(r > 0.0)) {
        return Err(EnergyError::NonpositiveRho(i, r));
    }
    Ok((1..=full_mask(n)).all(|mask| lambda_mask(a, rho, mask, MEANFIELD) > 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "classification", content = "N")]
pub enum Classification {
    /// Strictly between `Γ_N` and `Γ_{N+1}` (`Γ_0` meaning `q = 0`).
    #[serde(rename = "InteriorO")]
    InteriorO(u32),
    /// On the critical hypersurface `Γ_N`, `N ≥ 1`.
    #[serde(rename = "OnGamma")]
    OnGamma(u32),
    /// `q < 0`; cannot happen for nonnegative `A`.
    #[serde(rename = "OutsideDomain")]
    OutsideDomain,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Degree {
    Value { degree: i128 },
    Undefined { reason: String },
}

impl Degree {
    pub fn value(&self) -> Option<i128> {
        match self {
            Degree::Value { degree } => Some(*degree),
            Degree::Undefined { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhoPoint {
    pub rho: Vec<f64>,
    /// `Σ a_ij ρ_i ρ_j / (8π Σ ρ_i)`.
    pub q: f64,
    pub classification: Classification,
    pub degree: Option<Degree>,
}

/// Locates `ρ` among the shells `O_N` and hypersurfaces `Γ_N`.
pub fn classify_rho(
    a: &CoefficientMatrix,
    rho: &[f64],
    rel_tol: f64,
) -> Result<RhoPoint, EnergyError> {
    check_len(a, rho)?;
    if let Some((i, &r)) = rho.iter().enumerate().find(|(_, &r)| !(r >= 0.0)) {
        return Err(EnergyError::NegativeRho(i, r));
    }
    let total: f64 = rho.iter().sum();
    if !(total > 0.0) {
        return Err(EnergyError::ZeroMass);
    }
    let q = quadratic_form(a, rho) / (MEANFIELD * total);
    let nearest = q.round();
    let classification = if q < 0.0 {
        Classification::OutsideDomain
    } else if nearest >= 1.0 && (q - nearest).abs() <= rel_tol {
        Classification::OnGamma(nearest as u32)
    } else {
        Classification::InteriorO(q.floor() as u32)
    };
    Ok(RhoPoint {
        rho: rho.to_vec(),
        q,
        classification,
        degree: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SurfaceKind {
    /// Compact surface without boundary, `χ = 2 − 2g`.
    ClosedSurface { genus: u32 },
    /// Bounded planar domain with holes, `χ = 1 − g_e`.
    PlanarDomain { holes: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    pub kind: SurfaceKind,
    pub chi: i64,
}

impl SurfaceSpec {
    pub fn closed(genus: u32) -> Self {
        Self {
            kind: SurfaceKind::ClosedSurface { genus },
            chi: 2 - 2 * genus as i64,
        }
    }

    pub fn planar(holes: u32) -> Self {
        Self {
            kind: SurfaceKind::PlanarDomain { holes },
            chi: 1 - holes as i64,
        }
    }

    pub fn torus() -> Self {
        Self::closed(1)
    }

    pub fn sphere() -> Self {
        Self::closed(0)
    }
}

/// Leray–Schauder degree on `O_N`: `1` for `N = 0`, otherwise
/// `(−χ+1)(−χ+2)…(−χ+N) / N!`.
///
/// Evaluated as the integer recurrence `c_k = c_{k−1} · (k − χ) / k`; every
/// `c_k` is the binomial `C(k − χ, k)`, so each division is exact.
pub fn degree_from_chi(chi: i64, n: u32) -> Result<i128, EnergyError> {
    let overflow = EnergyError::DegreeOverflow { chi, n };
    let mut c: i128 = 1;
    for k in 1..=n as i128 {
        let factor = k - chi as i128;
        c = c.checked_mul(factor).ok_or_else(|| overflow.clone())?;
        debug_assert_eq!(c % k, 0);
        c /= k;
    }
    Ok(c)
}

pub fn degree(surface: &SurfaceSpec, n: u32) -> Result<i128, EnergyError> {
    degree_from_chi(surface.chi, n)
}

/// [`classify_rho`] followed by the degree on the resulting shell.
pub fn degree_for_rho(
    a: &CoefficientMatrix,
    rho: &[f64],
    surface: &SurfaceSpec,
    rel_tol: f64,
) -> Result<RhoPoint, EnergyError> {
    let mut point = classify_rho(a, rho, rel_tol)?;
    point.degree = Some(match point.classification {
        Classification::InteriorO(n) => Degree::Value {
            degree: degree(surface, n)?,
        },
        Classification::OnGamma(n) => Degree::Undefined {
            reason: format!("rho lies on the critical hypersurface Gamma_{n}"),
        },
        Classification::OutsideDomain => Degree::Undefined {
            reason: "quadratic form is negative".to_string(),
        },
    });
    Ok(point)
}

/// Masses `σ` with their decay exponents `m = A σ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MassVector {
    sigma: Vec<f64>,
    m: Vec<f64>,
}

impl MassVector {
    pub fn new(a: &CoefficientMatrix, sigma: Vec<f64>) -> Result<Self, EnergyError> {
        check_len(a, &sigma)?;
        if let Some((i, &s)) = sigma.iter().enumerate().find(|(_, &s)| !(s >= 0.0)) {
            return Err(EnergyError::NegativeMass(i, s));
        }
        let m = a.mul_vec(&sigma);
        Ok(Self { sigma, m })
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    /// Decay exponents `m_i = Σ_j a_ij σ_j`.
    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn total(&self) -> f64 {
        self.sigma.iter().sum()
    }

    pub fn m_min(&self) -> f64 {
        self.m.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Λ_I(σ)` at scale 4.
    pub fn pohozaev_defect(&self, a: &CoefficientMatrix) -> f64 {
        lambda_mask(a, &self.sigma, full_mask(a.n()), ENTIRE)
    }
}

/// Membership in `E`: all `σ_i > 0`, `|Λ_I(σ)| ≤ tol · 4Σσ_i`, and
/// `Λ_J(σ) > 0` for every proper nonempty `J`.
pub fn in_e(a: &CoefficientMatrix, sigma: &MassVector, tol: f64) -> bool {
    let n = a.n();
    assert!(n <= MAX_SUBSET_N, "subset enumeration limited to n <= {MAX_SUBSET_N}");
    let s = sigma.sigma();
    if s.len() != n || s.iter().any(|&x| !(x > 0.0)) {
        return false;
    }
    let full = full_mask(n);
    if lambda_mask(a, s, full, ENTIRE).abs() > tol * ENTIRE * sigma.total() {
        return false;
    }
    (1..full).all(|mask| lambda_mask(a, s, mask, ENTIRE) > 0.0)
}

/// Scales `σ₀` along its ray onto `Λ_I = 0`: `t = 4Σσ₀ / Σ a_ij σ₀_i σ₀_j`.
pub fn project_to_pohozaev(a: &CoefficientMatrix, sigma0: &[f64]) -> Option<Vec<f64>> {
    let q = quadratic_form(a, sigma0);
    if !(q > 0.0) {
        return None;
    }
    let t = ENTIRE * sigma0.iter().sum::<f64>() / q;
    Some(sigma0.iter().map(|x| x * t).collect())
}

/// Explicit point built from `ξ = A⁻¹ (1, …, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EPoint {
    /// All `ξ_i > 0`: `σ = 4ξ ∈ E`.
    Full { sigma: MassVector, xi: Vec<f64> },
    /// Some `ξ_i = 0`: `σ_J = 4ξ_J` on `J = {i : ξ_i > 0}` with
    /// `Λ_J(σ) = 0` and `Λ_{J₁}(σ) > 0` for proper `J₁ ⊊ J`.
    Partial {
        subset: Vec<usize>,
        sigma_subset: Vec<f64>,
        xi: Vec<f64>,
    },
}

/// Requires (H1) and (H2). For `n = 1` only (H1) is required: the scalar
/// inverse `1/a` is positive, yet `σ = 4/a` is the scalar Liouville mass.
pub fn construct_e_point(a: &CoefficientMatrix) -> Result<EPoint, EnergyError> {
    let report = check_hypotheses(a, a.default_zero_tol());
    let admissible = if a.n() == 1 {
        report.h1_pass == Some(true)
    } else {
        report.h1_and_h2()
    };
    if !admissible {
        return Err(EnergyError::HypothesesNotSatisfied);
    }
    let a = a.invert()?;
    let n = a.n();
    let xi = a
        .inv_mul_vec(&vec![1.0; n])
        .expect("inverted above");
    let scale = xi.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let positive: Vec<usize> = (0..n)
        .filter(|&i| xi[i] > XI_ZERO_REL * scale)
        .collect();
    if positive.is_empty() {
        return Err(EnergyError::AllXiZero);
    }
    if positive.len() == n {
        let sigma = MassVector::new(&a, xi.iter().map(|x| ENTIRE * x).collect())?;
        Ok(EPoint::Full { sigma, xi })
    } else {
        let sigma_subset = positive.iter().map(|&i| ENTIRE * xi[i]).collect();
        Ok(EPoint::Partial {
            subset: positive,
            sigma_subset,
            xi,
        })
    }
}
