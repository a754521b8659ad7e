//! Radial entire solutions of `Δu_i + Σ_j a_ij e^{u_j} = 0` on the plane.
//!
//! With `t = log r` and `w_i = r u_i'(r)` the radial system becomes
//!
//! ```text
//!     du_i/dt = w_i
//!     dw_i/dt = −Σ_j a_ij e^{u_j + 2t}
//!     dσ_i/dt = e^{u_i + 2t}          σ_i(r) = ∫_0^r e^{u_i(s)} s ds
//! ```
//!
//! so the running masses are integrated alongside the profile and
//! `w_i = −m_i(r)` with `m_i(r) = Σ_j a_ij σ_j(r)`. Integration starts at a
//! small radius `r0` from a Taylor expansion about the origin and stops once
//! every decay exponent exceeds `2 + δ` and the remaining tail mass is
//! negligible. Total masses are then obtained by fitting the power-law tail
//! `e^{u_i(R)} (r/R)^{−m_i}`.

pub mod ode;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{in_e, EnergyError, MassVector, ENTIRE};
use crate::matrix::{check_h1, CoefficientMatrix};
use crate::par::{self, Execution};

use ode::{Control, OdeError, Tolerances};

/// Largest admissible initial height; `e^u` is evaluated with `u` clamped here.
pub const MAX_HEIGHT: f64 = 40.0;

/// Two sweep points whose masses differ by less than this are flagged.
pub const INJECTIVITY_TOL: f64 = 1e-6;

const EXTRAPOLATION_TOL: f64 = 1e-12;
const EXTRAPOLATION_MAX_ITER: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadialError {
    #[error("initial height {height} exceeds the maximum safe height {max_safe}")]
    OverflowInExponential { height: f64, max_safe: f64 },
    #[error("step size underflow at r = {r:e}")]
    StepUnderflow { r: f64 },
    #[error("integration failed: {0}")]
    Integration(OdeError),
    #[error("matrix does not satisfy (H1)")]
    NotH1,
    #[error("expected {expected} initial heights, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("non-finite initial height at index {0}")]
    NonFiniteHeight(usize),
    #[error("invalid option: {0}")]
    InvalidOption(&'static str),
    #[error("tail extrapolation needs min m_i(R) > 2 + delta = {required}, got {m_min}")]
    ExponentTooSmall { m_min: f64, required: f64 },
    #[error("tail extrapolation did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("solution has no finite total mass")]
    NoMass,
    #[error("epsilon family needs 1 <= l < n and 0 < eps <= 1 (l = {l}, n = {n}, eps = {eps})")]
    BadEpsilonFamily { l: usize, n: usize, eps: f64 },
    #[error(transparent)]
    Energy(#[from] EnergyError),
}

/// Radial initial heights `u_i(0) = α_i`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InitialHeights {
    pub alpha: Vec<f64>,
}

impl InitialHeights {
    pub fn new(alpha: Vec<f64>) -> Result<Self, RadialError> {
        if let Some(i) = alpha.iter().position(|a| !a.is_finite()) {
            return Err(RadialError::NonFiniteHeight(i));
        }
        Ok(Self { alpha })
    }

    /// Heights `(head, 0)` with the last component pinned at zero.
    pub fn from_head(head: &[f64]) -> Result<Self, RadialError> {
        let mut alpha = head.to_vec();
        alpha.push(0.0);
        Self::new(alpha)
    }

    pub fn is_normalized(&self) -> bool {
        self.alpha.last() == Some(&0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadialOptions {
    /// Starting radius of the integration.
    pub r0: f64,
    pub r_max: f64,
    pub atol: f64,
    pub rtol: f64,
    /// Integration stops only once `min_i m_i(r) ≥ 2 + delta`.
    pub delta: f64,
    /// Initial step in `t = log r`.
    pub h0: f64,
    pub max_steps: usize,
}

impl Default for RadialOptions {
    fn default() -> Self {
        Self {
            r0: 1e-4,
            r_max: 1e8,
            atol: 1e-12,
            rtol: 1e-9,
            delta: 0.05,
            h0: 1e-3,
            max_steps: 2_000_000,
        }
    }
}

impl RadialOptions {
    fn validate(&self) -> Result<(), RadialError> {
        if !(self.r0 > 0.0) {
            return Err(RadialError::InvalidOption("r0 must be positive"));
        }
        if !(self.r_max > self.r0) {
            return Err(RadialError::InvalidOption("r_max must exceed r0"));
        }
        if !(self.atol > 0.0 && self.rtol > 0.0) {
            return Err(RadialError::InvalidOption("tolerances must be positive"));
        }
        if !(self.delta > 0.0) {
            return Err(RadialError::InvalidOption("delta must be positive"));
        }
        if !(self.h0 > 0.0) {
            return Err(RadialError::InvalidOption("h0 must be positive"));
        }
        Ok(())
    }
}

/// Why integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// All exponents above `2 + δ` and relative tails below `rtol`.
    TailConverged,
    /// Reached `r_max` with all exponents above `2 + δ`; masses extrapolated.
    RadiusLimitExtrapolated,
    /// Reached `r_max` with some exponent still below `2 + δ`.
    RadiusLimitDivergent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum TotalMass {
    Converged { masses: MassVector },
    Divergent,
}

impl TotalMass {
    pub fn masses(&self) -> Option<&MassVector> {
        match self {
            TotalMass::Converged { masses } => Some(masses),
            TotalMass::Divergent => None,
        }
    }
}

/// Grid-sampled radial solution. Profiles are stored per component.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialSolution {
    pub alpha: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    /// `r u_i'(r)`.
    pub w: Vec<Vec<f64>>,
    pub sigma_running: Vec<Vec<f64>>,
    pub m_running: Vec<Vec<f64>>,
    pub sigma_infinity: TotalMass,
    /// `c_i` in `u_i(r) ≈ −m_i log r + c_i` at the last grid point.
    pub tail_constants: Vec<f64>,
    pub stop_reason: StopReason,
    pub options: RadialOptions,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
}

impl RadialSolution {
    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn len(&self) -> usize {
        self.r_grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_grid.is_empty()
    }

    pub fn r_last(&self) -> f64 {
        *self.r_grid.last().expect("grid is never empty")
    }

    /// Index of the last grid point with `r ≤ radius`.
    pub fn index_at(&self, radius: f64) -> usize {
        match self.r_grid.partition_point(|&r| r <= radius) {
            0 => 0,
            k => k - 1,
        }
    }
}

/// `(u_i(r0), u_i'(r0))` from `u_i(r) = α_i − c_i r²/4 + O(r⁴)`,
/// `c_i = Σ_j a_ij e^{α_j}`.
pub fn taylor_start(a: &CoefficientMatrix, alpha: &[f64], r0: f64) -> (Vec<f64>, Vec<f64>) {
    let c = source(a, alpha);
    let u = alpha
        .iter()
        .zip(&c)
        .map(|(al, ci)| al - ci * r0 * r0 / 4.0)
        .collect();
    let du = c.iter().map(|ci| -ci * r0 / 2.0).collect();
    (u, du)
}

fn source(a: &CoefficientMatrix, alpha: &[f64]) -> Vec<f64> {
    let e: Vec<f64> = alpha.iter().map(|x| x.min(MAX_HEIGHT).exp()).collect();
    a.mul_vec(&e)
}

fn tail_mass(u: f64, r: f64, m: f64) -> f64 {
    (u.min(MAX_HEIGHT)).exp() * r * r / (m - 2.0)
}

/// Shoots the radial solution with `u_i(0) = α_i`.
pub fn integrate_radial(
    a: &CoefficientMatrix,
    alpha: &[f64],
    opts: &RadialOptions,
) -> Result<RadialSolution, RadialError> {
    opts.validate()?;
    let n = a.n();
    if alpha.len() != n {
        return Err(RadialError::LengthMismatch {
            expected: n,
            got: alpha.len(),
        });
    }
    if let Some(i) = alpha.iter().position(|x| !x.is_finite()) {
        return Err(RadialError::NonFiniteHeight(i));
    }
    if let Some(&height) = alpha.iter().find(|&&x| x > MAX_HEIGHT) {
        return Err(RadialError::OverflowInExponential {
            height,
            max_safe: MAX_HEIGHT,
        });
    }
    if check_h1(a, a.default_zero_tol()).h1_pass != Some(true) {
        return Err(RadialError::NotH1);
    }

    let r0 = opts.r0;
    let (u0, du0) = taylor_start(a, alpha, r0);
    let c = source(a, alpha);
    // σ_i(r0) = ∫_0^{r0} e^{u_i} s ds with e^{u_i} ≈ e^{α_i}(1 − c_i s²/4).
    let sigma0: Vec<f64> = (0..n)
        .map(|i| alpha[i].exp() * (r0 * r0 / 2.0 - c[i] * r0.powi(4) / 16.0))
        .collect();
    let mut y0 = Vec::with_capacity(3 * n);
    y0.extend_from_slice(&u0);
    y0.extend(du0.iter().map(|d| d * r0));
    y0.extend_from_slice(&sigma0);

    let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
        let (u, rest) = y.split_at(n);
        let w = &rest[..n];
        let two_t = 2.0 * t;
        let mut e = [0.0_f64; 32];
        let mut e_heap;
        let e: &mut [f64] = if n <= 32 {
            &mut e[..n]
        } else {
            e_heap = vec![0.0; n];
            &mut e_heap
        };
        for j in 0..n {
            e[j] = (u[j].min(MAX_HEIGHT) + two_t).exp();
        }
        for i in 0..n {
            dy[i] = w[i];
            let mut s = 0.0;
            for j in 0..n {
                s += a.get(i, j) * e[j];
            }
            dy[n + i] = -s;
            dy[2 * n + i] = e[i];
        }
    };

    let threshold = 2.0 + opts.delta;
    let mut r_grid = Vec::new();
    let mut u = vec![Vec::new(); n];
    let mut w = vec![Vec::new(); n];
    let mut sigma_running = vec![Vec::new(); n];
    let mut m_running = vec![Vec::new(); n];
    let mut tail_converged = false;

    let observe = |t: f64, y: &[f64]| {
        let r = t.exp();
        r_grid.push(r);
        let sig = &y[2 * n..];
        let m = a.mul_vec(sig);
        for i in 0..n {
            u[i].push(y[i]);
            w[i].push(y[n + i]);
            sigma_running[i].push(sig[i]);
            m_running[i].push(m[i]);
        }
        let m_min = m.iter().copied().fold(f64::INFINITY, f64::min);
        if m_min >= threshold {
            let small = (0..n).all(|i| {
                let tail = tail_mass(y[i], r, m[i]);
                tail < opts.rtol * sig[i]
            });
            if small {
                tail_converged = true;
                return Control::Stop;
            }
        }
        Control::Continue
    };

    let stats = ode::integrate(
        rhs,
        r0.ln(),
        &y0,
        opts.r_max.ln(),
        opts.h0,
        Tolerances {
            atol: opts.atol,
            rtol: opts.rtol,
        },
        opts.max_steps,
        observe,
    )
    .map_err(|e| match e {
        OdeError::StepUnderflow { t, .. } => RadialError::StepUnderflow { r: t.exp() },
        other => RadialError::Integration(other),
    })?;

    let last = r_grid.len() - 1;
    let m_last: Vec<f64> = (0..n).map(|i| m_running[i][last]).collect();
    let m_min = m_last.iter().copied().fold(f64::INFINITY, f64::min);
    let stop_reason = if tail_converged {
        StopReason::TailConverged
    } else if m_min >= threshold {
        StopReason::RadiusLimitExtrapolated
    } else {
        StopReason::RadiusLimitDivergent
    };

    let r_last = r_grid[last];
    let tail_constants = (0..n)
        .map(|i| u[i][last] + m_last[i] * r_last.ln())
        .collect();

    let mut sol = RadialSolution {
        alpha: alpha.to_vec(),
        r_grid,
        u,
        w,
        sigma_running,
        m_running,
        sigma_infinity: TotalMass::Divergent,
        tail_constants,
        stop_reason,
        options: *opts,
        steps_accepted: stats.accepted,
        steps_rejected: stats.rejected,
    };
    if stop_reason != StopReason::RadiusLimitDivergent {
        let masses = extrapolate_masses_with(a, &sol, r_last)?;
        // Refresh the tail model with the converged exponents.
        for i in 0..n {
            sol.tail_constants[i] = sol.u[i][last] + masses.m()[i] * r_last.ln();
        }
        sol.sigma_infinity = TotalMass::Converged { masses };
    }
    Ok(sol)
}

/// Total masses from the running masses at `radius` plus the power-law tail.
///
/// Fixed point: `σ_i = σ_i(R) + e^{u_i(R)} R² / (m_i − 2)` with `m = A σ`.
pub fn extrapolate_masses(
    a: &CoefficientMatrix,
    sol: &RadialSolution,
    radius: f64,
) -> Result<MassVector, RadialError> {
    extrapolate_masses_with(a, sol, radius)
}

fn extrapolate_masses_with(
    a: &CoefficientMatrix,
    sol: &RadialSolution,
    radius: f64,
) -> Result<MassVector, RadialError> {
    let n = sol.n();
    let k = sol.index_at(radius);
    let r = sol.r_grid[k];
    let required = 2.0 + sol.options.delta;
    let m_r: Vec<f64> = (0..n).map(|i| sol.m_running[i][k]).collect();
    let m_min = m_r.iter().copied().fold(f64::INFINITY, f64::min);
    if !(m_min > required) {
        return Err(RadialError::ExponentTooSmall { m_min, required });
    }
    let sigma_r: Vec<f64> = (0..n).map(|i| sol.sigma_running[i][k]).collect();
    let edge: Vec<f64> = (0..n)
        .map(|i| sol.u[i][k].min(MAX_HEIGHT).exp() * r * r)
        .collect();

    let mut m = m_r;
    let mut sigma = sigma_r.clone();
    for _ in 0..EXTRAPOLATION_MAX_ITER {
        let next: Vec<f64> = (0..n).map(|i| sigma_r[i] + edge[i] / (m[i] - 2.0)).collect();
        let change = next
            .iter()
            .zip(&sigma)
            .map(|(x, y)| (x - y).abs() / x.abs().max(1.0))
            .fold(0.0, f64::max);
        sigma = next;
        m = a.mul_vec(&sigma);
        if m.iter().any(|&x| !(x > 2.0)) {
            return Err(RadialError::NoConvergence(EXTRAPOLATION_MAX_ITER));
        }
        if change < EXTRAPOLATION_TOL {
            return Ok(MassVector::new(a, sigma)?);
        }
    }
    Err(RadialError::NoConvergence(EXTRAPOLATION_MAX_ITER))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntireSolutionReport {
    /// `|Λ_I(σ∞)|` at scale 4.
    pub pohozaev_residual: f64,
    /// `|Λ_I(σ∞)| / (4 Σσ∞)`.
    pub pohozaev_relative: f64,
    pub m_min: f64,
    /// `σ∞ ∈ E` at the given tolerance (subset positivity).
    pub subset_positivity: bool,
    pub passed: bool,
}

/// Checks the Pohozaev identity, the decay floor `m_i > 2` and membership
/// in `E` for the extrapolated masses.
pub fn verify_entire_solution(
    a: &CoefficientMatrix,
    sol: &RadialSolution,
    tol: f64,
) -> Result<EntireSolutionReport, RadialError> {
    let masses = sol.sigma_infinity.masses().ok_or(RadialError::NoMass)?;
    let residual = masses.pohozaev_defect(a).abs();
    let relative = residual / (ENTIRE * masses.total());
    let m_min = masses.m_min();
    let subset_positivity = in_e(a, masses, tol);
    Ok(EntireSolutionReport {
        pohozaev_residual: residual,
        pohozaev_relative: relative,
        m_min,
        subset_positivity,
        passed: relative <= tol && m_min > 2.0 && subset_positivity,
    })
}

/// One row of an initial-value sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub alpha: Vec<f64>,
    pub outcome: Result<SweepOutcome, RadialError>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepOutcome {
    pub total: TotalMass,
    /// Relative Pohozaev defect `|Λ_I(σ∞)| / (4Σσ∞)`; `None` when divergent.
    pub pohozaev_residual: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Pairs of row indices whose masses agree to [`INJECTIVITY_TOL`].
    pub non_injective: Vec<(usize, usize)>,
}

/// Solves one sweep point; errors are kept as data.
pub fn sweep_point(a: &CoefficientMatrix, alpha: &[f64], opts: &RadialOptions) -> SweepRow {
    let outcome = integrate_radial(a, alpha, opts).map(|sol| {
        let residual = sol
            .sigma_infinity
            .masses()
            .map(|m| m.pohozaev_defect(a).abs() / (ENTIRE * m.total()));
        SweepOutcome {
            total: sol.sigma_infinity,
            pohozaev_residual: residual,
        }
    });
    SweepRow {
        alpha: alpha.to_vec(),
        outcome,
    }
}

/// Maps each initial-height vector to its total masses. Rows come back in
/// input order regardless of `exec`.
pub fn sweep_initial_values(
    a: &CoefficientMatrix,
    grid: &[Vec<f64>],
    opts: &RadialOptions,
    exec: Execution,
) -> SweepTable {
    let rows = par::map(exec, grid, |alpha| sweep_point(a, alpha, opts));
    let non_injective = find_collisions(&rows);
    SweepTable {
        rows,
        non_injective,
    }
}

/// Index pairs of converged rows whose masses agree to [`INJECTIVITY_TOL`].
pub fn find_collisions(rows: &[SweepRow]) -> Vec<(usize, usize)> {
    let sig: Vec<Option<&[f64]>> = rows
        .iter()
        .map(|r| match &r.outcome {
            Ok(SweepOutcome {
                total: TotalMass::Converged { masses },
                ..
            }) => Some(masses.sigma()),
            _ => None,
        })
        .collect();
    let mut out = Vec::new();
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            if let (Some(x), Some(y)) = (sig[i], sig[j]) {
                let d = x
                    .iter()
                    .zip(y)
                    .map(|(p, q)| (p - q).abs())
                    .fold(0.0, f64::max);
                if d < INJECTIVITY_TOL {
                    out.push((i, j));
                }
            }
        }
    }
    out
}

/// Heights `(α_head, log ε, …, log ε)` with `l = α_head.len()` free components.
pub fn epsilon_alpha(n: usize, alpha_head: &[f64], eps: f64) -> Result<Vec<f64>, RadialError> {
    let l = alpha_head.len();
    if !(l >= 1 && l < n && eps > 0.0 && eps <= 1.0) {
        return Err(RadialError::BadEpsilonFamily { l, n, eps });
    }
    let mut alpha = alpha_head.to_vec();
    alpha.resize(n, eps.ln());
    Ok(alpha)
}

/// Member of the family that switches the trailing `n − l` components on
/// from height `log ε`.
pub fn epsilon_family(
    a: &CoefficientMatrix,
    alpha_head: &[f64],
    eps: f64,
    opts: &RadialOptions,
) -> Result<RadialSolution, RadialError> {
    let alpha = epsilon_alpha(a.n(), alpha_head, eps)?;
    integrate_radial(a, &alpha, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one() -> CoefficientMatrix {
        CoefficientMatrix::symmetric(&[vec![1.0]]).unwrap()
    }

    fn involution() -> CoefficientMatrix {
        CoefficientMatrix::symmetric(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn closed_form(r: f64) -> f64 {
        -2.0 * (1.0 + r * r / 8.0).ln()
    }

    #[test]
    fn taylor_examples() {
        let (u, du) = taylor_start(&one(), &[0.0], 1e-4);
        assert_abs_diff_eq!(u[0], -2.5e-9, epsilon = 1e-22);
        assert_abs_diff_eq!(du[0], -5e-5, epsilon = 1e-20);
        let (u, du) = taylor_start(&involution(), &[0.0, 0.0], 1e-4);
        assert_eq!(u[0], u[1]);
        assert_eq!(du[0], du[1]);
    }

    #[test]
    fn scalar_closed_form() {
        let sol = integrate_radial(&one(), &[0.0], &RadialOptions::default()).unwrap();
        let err = sol
            .r_grid
            .iter()
            .zip(&sol.u[0])
            .filter(|(r, _)| **r <= 1e3)
            .map(|(r, u)| (u - closed_form(*r)).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-7, "sup error {err:e}");
        let s = sol.sigma_infinity.masses().unwrap();
        assert_abs_diff_eq!(s.sigma()[0], 4.0, epsilon = 1e-5);
        assert_eq!(sol.stop_reason, StopReason::TailConverged);
        // w = r u' = −m(r) along the whole grid.
        for k in (0..sol.len()).step_by(50) {
            assert_abs_diff_eq!(sol.w[0][k], -sol.m_running[0][k], epsilon = 1e-7);
        }
    }

    #[test]
    fn profiles_monotone_and_masses_nondecreasing() {
        let a = involution();
        let sol = integrate_radial(&a, &[1.0, 0.0], &RadialOptions::default()).unwrap();
        for i in 0..2 {
            assert!(sol.u[i].windows(2).all(|p| p[1] <= p[0]));
            assert!(sol.sigma_running[i].windows(2).all(|p| p[1] >= p[0]));
        }
    }

    #[test]
    fn symmetric_pair_reduces_to_scalar() {
        let a = involution();
        let sol = integrate_radial(&a, &[0.0, 0.0], &RadialOptions::default()).unwrap();
        assert_eq!(sol.u[0], sol.u[1]);
        let s = sol.sigma_infinity.masses().unwrap();
        assert_abs_diff_eq!(s.sigma()[0], 4.0, epsilon = 1e-4);
        assert_abs_diff_eq!(s.sigma()[1], 4.0, epsilon = 1e-4);
        let rep = verify_entire_solution(&a, &sol, 1e-4).unwrap();
        assert!(rep.pohozaev_residual <= 1e-4, "{rep:?}");
        assert!(rep.passed);
    }

    #[test]
    fn extrapolation_guard() {
        let sol = integrate_radial(&one(), &[0.0], &RadialOptions::default()).unwrap();
        // Early on m(r) is still far below 2 + δ.
        let k = sol
            .m_running[0]
            .iter()
            .position(|&m| m > 2.01)
            .unwrap();
        let radius = sol.r_grid[k];
        let m = sol.m_running[0][k];
        assert!(m < 2.05);
        assert!(matches!(
            extrapolate_masses(&one(), &sol, radius),
            Err(RadialError::ExponentTooSmall { .. })
        ));
    }

    #[test]
    fn extrapolation_from_truncated_closed_form() {
        let sol = integrate_radial(&one(), &[0.0], &RadialOptions::default()).unwrap();
        let s = extrapolate_masses(&one(), &sol, 1e3).unwrap();
        assert_abs_diff_eq!(s.sigma()[0], 4.0, epsilon = 1e-5);
        let k = sol.index_at(1e3);
        let r = sol.r_grid[k];
        assert_abs_diff_eq!(
            sol.sigma_running[0][k],
            4.0 * (1.0 - 8.0 / (8.0 + r * r)),
            epsilon = 1e-7
        );
    }

    #[test]
    fn input_guards() {
        let opts = RadialOptions::default();
        assert!(matches!(
            integrate_radial(&one(), &[41.0], &opts),
            Err(RadialError::OverflowInExponential { .. })
        ));
        assert!(matches!(
            integrate_radial(&one(), &[0.0, 0.0], &opts),
            Err(RadialError::LengthMismatch { .. })
        ));
        let neg = CoefficientMatrix::symmetric(&[vec![0.0, -1.0], vec![-1.0, 0.0]]).unwrap();
        assert_eq!(
            integrate_radial(&neg, &[0.0, 0.0], &opts),
            Err(RadialError::NotH1)
        );
    }

    #[test]
    fn epsilon_guards() {
        let a = involution();
        let opts = RadialOptions::default();
        assert!(matches!(
            epsilon_family(&a, &[0.0], 0.0, &opts),
            Err(RadialError::BadEpsilonFamily { .. })
        ));
        assert!(matches!(
            epsilon_family(&a, &[0.0, 0.0], 0.5, &opts),
            Err(RadialError::BadEpsilonFamily { .. })
        ));
        let e1 = epsilon_family(&a, &[0.3], 1.0, &opts).unwrap();
        let plain = integrate_radial(&a, &[0.3, 0.0], &opts).unwrap();
        assert_eq!(e1, plain);
    }

    #[test]
    fn sweep_of_empty_grid() {
        let t = sweep_initial_values(&one(), &[], &RadialOptions::default(), Execution::Parallel);
        assert!(t.rows.is_empty());
        assert!(t.non_injective.is_empty());
    }
}
