//! Mean-field Liouville system on the unit flat torus (volume 1, χ = 0):
//!
//! ```text
//!     Δu_i + Σ_j a_ij ρ_j (h_j e^{u_j} / ∫ h_j e^{u_j} − 1) = 0,    ∫ u_i = 0.
//! ```
//!
//! Fields live on a uniform `K × K` grid; `Δ` is the Fourier multiplier
//! `−4π²|k|²`. Solutions are fixed points of
//! `T^i(u) = −Δ⁻¹ Σ_j a_ij ρ_j (h_j e^{u_j}/Q_j − 1)` and are found by damped
//! Picard iteration.
//!
//! An optional zero-mean forcing `g_i` is added to equation `i`; it exists
//! for manufactured-solution tests and is zero in normal use.

pub mod torus;

use log::{debug, warn};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::energy::{classify_rho, Classification, GAMMA_REL_TOL};
use crate::matrix::{CoefficientMatrix, MatrixError};
use crate::par::{self, Execution};

pub use torus::{
    inverse_laplacian, laplacian, CosTerm, Spectral, TorusField, TorusGrid, WeightSpec,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeanFieldError {
    #[error("grid size {0} must be a power of two >= 2")]
    BadGrid(usize),
    #[error("field has nonzero mean {mean:e}")]
    NonzeroMean { mean: f64 },
    #[error("weight h_{index} has nonpositive minimum {min}")]
    NonPositiveWeight { index: usize, min: f64 },
    #[error("quadrature of h_{index} e^u_{index} is not positive ({value})")]
    QuadratureUnderflow { index: usize, value: f64 },
    #[error("expected {expected} components, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("rho[{0}] = {1} is negative")]
    NegativeRho(usize, f64),
    #[error("matrix is singular: {0}")]
    SingularMatrix(MatrixError),
    #[error("invalid option: {0}")]
    InvalidOption(&'static str),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    MaxIterExceeded {
        iterations: usize,
        residual: f64,
        best: Box<MeanFieldSolution>,
    },
    #[error("non-finite iterate after {0} iterations")]
    Diverged(usize),
}

#[derive(Debug, Clone)]
pub struct MeanFieldProblem {
    a: CoefficientMatrix,
    rho: Vec<f64>,
    h: Vec<TorusField>,
    forcing: Option<Vec<TorusField>>,
    spectral: Spectral,
}

impl MeanFieldProblem {
    pub fn new(
        a: CoefficientMatrix,
        rho: Vec<f64>,
        h: Vec<TorusField>,
        grid: TorusGrid,
    ) -> Result<Self, MeanFieldError> {
        let n = a.n();
        if rho.len() != n {
            return Err(MeanFieldError::LengthMismatch {
                expected: n,
                got: rho.len(),
            });
        }
        if h.len() != n {
            return Err(MeanFieldError::LengthMismatch {
                expected: n,
                got: h.len(),
            });
        }
        if let Some((i, &r)) = rho.iter().enumerate().find(|(_, &r)| !(r >= 0.0)) {
            return Err(MeanFieldError::NegativeRho(i, r));
        }
        for (index, hi) in h.iter().enumerate() {
            assert_eq!(hi.grid(), grid, "weight grid does not match problem grid");
            let min = hi.min();
            if !(min > 0.0) {
                return Err(MeanFieldError::NonPositiveWeight { index, min });
            }
        }
        Ok(Self {
            a,
            rho,
            h,
            forcing: None,
            spectral: Spectral::new(grid, Execution::default()),
        })
    }

    /// Builds the weights from closed-form specs.
    pub fn from_specs(
        a: CoefficientMatrix,
        rho: Vec<f64>,
        h: &[WeightSpec],
        grid: TorusGrid,
    ) -> Result<Self, MeanFieldError> {
        let h = h.iter().map(|s| s.sample(&grid)).collect();
        Self::new(a, rho, h, grid)
    }

    /// Adds a zero-mean forcing `g_i` to every equation.
    pub fn with_forcing(mut self, g: Vec<TorusField>) -> Result<Self, MeanFieldError> {
        if g.len() != self.n() {
            return Err(MeanFieldError::LengthMismatch {
                expected: self.n(),
                got: g.len(),
            });
        }
        if let Some(gi) = g.iter().find(|gi| !gi.is_zero_mean()) {
            return Err(MeanFieldError::NonzeroMean {
                mean: gi.integral(),
            });
        }
        self.forcing = Some(g);
        Ok(self)
    }

    /// Chooses how grid transforms are executed.
    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.spectral = Spectral::new(self.grid(), exec);
        self
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn a(&self) -> &CoefficientMatrix {
        &self.a
    }

    pub fn rho(&self) -> &[f64] {
        &self.rho
    }

    pub fn h(&self) -> &[TorusField] {
        &self.h
    }

    pub fn grid(&self) -> TorusGrid {
        self.spectral.grid()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// Same problem at a different `ρ`.
    pub fn with_rho(&self, rho: Vec<f64>) -> Result<Self, MeanFieldError> {
        let mut p = Self::new(self.a.clone(), rho, self.h.clone(), self.grid())?;
        p.forcing = self.forcing.clone();
        p.spectral = self.spectral.clone();
        Ok(p)
    }

    fn check_u(&self, u: &[TorusField]) -> Result<(), MeanFieldError> {
        if u.len() != self.n() {
            return Err(MeanFieldError::LengthMismatch {
                expected: self.n(),
                got: u.len(),
            });
        }
        Ok(())
    }

    /// `h_j e^{u_j} / Q_j` for every component, evaluated with a shift by
    /// `max u_j` so large heights do not overflow.
    fn densities(&self, u: &[TorusField]) -> Result<Vec<TorusField>, MeanFieldError> {
        par::map_range(Execution::Sequential, self.n(), |j| {
            let shift = u[j].max();
            let w = self.h[j].zip_map(&u[j], |h, x| h * (x - shift).exp());
            let q = w.integral();
            if !(q > 0.0 && q.is_finite()) {
                return Err(MeanFieldError::QuadratureUnderflow { index: j, value: q });
            }
            Ok(w.map(|x| x / q))
        })
        .into_iter()
        .collect()
    }

    /// `log Q_j = log ∫ h_j e^{u_j}`.
    fn log_quadratures(&self, u: &[TorusField]) -> Result<Vec<f64>, MeanFieldError> {
        (0..self.n())
            .map(|j| {
                let shift = u[j].max();
                let q = self.h[j]
                    .zip_map(&u[j], |h, x| h * (x - shift).exp())
                    .integral();
                if !(q > 0.0 && q.is_finite()) {
                    return Err(MeanFieldError::QuadratureUnderflow { index: j, value: q });
                }
                Ok(shift + q.ln())
            })
            .collect()
    }

    /// Nonlinear term `Σ_j a_ij ρ_j (h_j e^{u_j}/Q_j − 1) + g_i`, projected
    /// to zero mean.
    fn source(&self, u: &[TorusField]) -> Result<Vec<TorusField>, MeanFieldError> {
        let dens = self.densities(u)?;
        let n = self.n();
        let grid = self.grid();
        let out = (0..n)
            .map(|i| {
                let mut values = vec![0.0; grid.len()];
                for j in 0..n {
                    let c = self.a.get(i, j) * self.rho[j];
                    if c == 0.0 {
                        continue;
                    }
                    for (v, d) in values.iter_mut().zip(dens[j].values()) {
                        *v += c * (d - 1.0);
                    }
                }
                if let Some(g) = &self.forcing {
                    for (v, gv) in values.iter_mut().zip(g[i].values()) {
                        *v += gv;
                    }
                }
                TorusField::new(grid, values).project_zero_mean()
            })
            .collect();
        Ok(out)
    }

    /// `r_i = Δu_i + Σ_j a_ij ρ_j (h_j e^{u_j}/Q_j − 1) (+ g_i)`.
    pub fn residual(&self, u: &[TorusField]) -> Result<Vec<TorusField>, MeanFieldError> {
        self.check_u(u)?;
        let dens = self.densities(u)?;
        let n = self.n();
        let grid = self.grid();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let lap = self.spectral.laplacian(&u[i]);
            let mut values = lap.into_values();
            for j in 0..n {
                let c = self.a.get(i, j) * self.rho[j];
                for (v, d) in values.iter_mut().zip(dens[j].values()) {
                    *v += c * (d - 1.0);
                }
            }
            if let Some(g) = &self.forcing {
                for (v, gv) in values.iter_mut().zip(g[i].values()) {
                    *v += gv;
                }
            }
            let r = TorusField::new(grid, values);
            let scale = 1.0 + r.max_abs() + self.rho.iter().sum::<f64>() * self.a.max_abs();
            debug_assert!(
                r.integral().abs() <= 1e-10 * scale,
                "residual mean {} is not zero",
                r.integral()
            );
            out.push(r);
        }
        Ok(out)
    }

    pub fn residual_norm(&self, u: &[TorusField]) -> Result<f64, MeanFieldError> {
        Ok(self
            .residual(u)?
            .iter()
            .map(TorusField::max_abs)
            .fold(0.0, f64::max))
    }

    /// `Φ_ρ(u) = ½ Σ a^{ij} ∫ ∇u_i·∇u_j − Σ_j ρ_j log ∫ h_j e^{u_j} (− Σ a^{ij} ∫ g_j u_i)`.
    ///
    /// The Dirichlet term is `−∫ u_i Δu_j` with the spectral Laplacian,
    /// which equals the Parseval sum `Σ_k 4π²|k|² û_i conj(û_j)`.
    pub fn phi_functional(&self, u: &[TorusField]) -> Result<f64, MeanFieldError> {
        self.check_u(u)?;
        let a = self.inverted()?;
        for ui in u {
            // The Σ ρ_i ∫ u_i term vanishes identically on zero-mean fields.
            let scale = ui.max_abs().max(1.0);
            if ui.integral().abs() > 1e-10 * scale {
                return Err(MeanFieldError::NonzeroMean {
                    mean: ui.integral(),
                });
            }
        }
        let n = self.n();
        let laps: Vec<TorusField> = u.iter().map(|ui| self.spectral.laplacian(ui)).collect();
        let mut dirichlet = 0.0;
        for i in 0..n {
            for j in 0..n {
                let aij = a.inv(i, j).expect("inverted");
                if aij != 0.0 {
                    dirichlet -= aij * u[i].dot(&laps[j]);
                }
            }
        }
        let logs = self.log_quadratures(u)?;
        let entropy: f64 = self.rho.iter().zip(&logs).map(|(r, l)| r * l).sum();
        let mut forcing = 0.0;
        if let Some(g) = &self.forcing {
            for i in 0..n {
                for j in 0..n {
                    forcing += a.inv(i, j).expect("inverted") * g[j].dot(&u[i]);
                }
            }
        }
        Ok(0.5 * dirichlet - entropy - forcing)
    }

    /// Nodal `L²` gradient of [`Self::phi_functional`]: the directional
    /// derivative along `w` is `Σ_i ∫ G_i w_i`.
    pub fn phi_gradient(&self, u: &[TorusField]) -> Result<Vec<TorusField>, MeanFieldError> {
        self.check_u(u)?;
        let a = self.inverted()?;
        let n = self.n();
        let grid = self.grid();
        let dens = self.densities(u)?;
        let laps: Vec<TorusField> = u.iter().map(|ui| self.spectral.laplacian(ui)).collect();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let mut values = vec![0.0; grid.len()];
            for j in 0..n {
                let aij = a.inv(i, j).expect("inverted");
                for (v, l) in values.iter_mut().zip(laps[j].values()) {
                    *v -= aij * l;
                }
                if let Some(g) = &self.forcing {
                    for (v, gv) in values.iter_mut().zip(g[j].values()) {
                        *v -= aij * gv;
                    }
                }
            }
            for (v, d) in values.iter_mut().zip(dens[i].values()) {
                *v -= self.rho[i] * d;
            }
            out.push(TorusField::new(grid, values));
        }
        Ok(out)
    }

    fn inverted(&self) -> Result<CoefficientMatrix, MeanFieldError> {
        self.a.invert().map_err(MeanFieldError::SingularMatrix)
    }

    /// `v_i = u_i − log ∫ h_i e^{u_i}`, so that `∫ h_i e^{v_i} = 1`.
    pub fn normalize_v(&self, u: &[TorusField]) -> Result<Vec<TorusField>, MeanFieldError> {
        self.check_u(u)?;
        let logs = self.log_quadratures(u)?;
        Ok(u.iter().zip(logs).map(|(ui, l)| ui.map(|x| x - l)).collect())
    }

    /// `−Δ⁻¹` of the nonlinear term: one application of `T_ρ`.
    pub fn fixed_point_map(&self, u: &[TorusField]) -> Result<Vec<TorusField>, MeanFieldError> {
        self.check_u(u)?;
        self.source(u)?
            .iter()
            .map(|s| {
                self.spectral
                    .inverse_laplacian(s)
                    .map(|v| v.map(|x| -x).project_zero_mean())
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveOptions {
    /// Damping `θ` in `u ← (1−θ) u + θ T(u)`.
    pub theta: f64,
    pub max_iter: usize,
    /// Success when `max_i ‖r_i‖_∞ ≤ tol`.
    pub tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            theta: 0.5,
            max_iter: 5000,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanFieldSolution {
    pub u: Vec<TorusField>,
    pub residual_norm: f64,
    pub phi_value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Accepted iterates along which `Φ_ρ` increased.
    pub descent_violations: usize,
}

impl MeanFieldSolution {
    /// `max_i ‖u_i‖_∞`.
    pub fn sup_norm(&self) -> f64 {
        self.u.iter().map(TorusField::max_abs).fold(0.0, f64::max)
    }
}

/// Damped Picard iteration from `u ≡ 0`.
pub fn solve_mean_field(
    p: &MeanFieldProblem,
    opts: &SolveOptions,
) -> Result<MeanFieldSolution, MeanFieldError> {
    let start = vec![p.grid().zeros(); p.n()];
    solve_mean_field_from(p, opts, start)
}

/// Damped Picard iteration from a given zero-mean start (e.g. continuation).
pub fn solve_mean_field_from(
    p: &MeanFieldProblem,
    opts: &SolveOptions,
    start: Vec<TorusField>,
) -> Result<MeanFieldSolution, MeanFieldError> {
    if !(opts.theta > 0.0 && opts.theta <= 1.0) {
        return Err(MeanFieldError::InvalidOption("theta must lie in (0, 1]"));
    }
    if !(opts.tol > 0.0) {
        return Err(MeanFieldError::InvalidOption("tol must be positive"));
    }
    p.check_u(&start)?;
    if let Ok(point) = classify_rho(p.a(), p.rho(), GAMMA_REL_TOL) {
        if point.classification != Classification::InteriorO(0) {
            warn!(
                "rho = {:?} is classified {:?}; the Picard iteration targets O_0",
                p.rho(),
                point.classification
            );
        }
    }

    let theta = opts.theta;
    let mut u: Vec<TorusField> = start.into_iter().map(|f| f.project_zero_mean()).collect();
    let mut phi = p.phi_functional(&u)?;
    let mut violations = 0;
    let mut best: Option<(f64, Vec<TorusField>, f64)> = None;
    let mut residual = f64::INFINITY;

    for it in 1..=opts.max_iter {
        let t = p.fixed_point_map(&u)?;
        u = u
            .iter()
            .zip(&t)
            .map(|(ui, ti)| ui.zip_map(ti, |a, b| (1.0 - theta) * a + theta * b).project_zero_mean())
            .collect();
        if u.iter().any(|ui| ui.values().iter().any(|x| !x.is_finite())) {
            return Err(MeanFieldError::Diverged(it));
        }
        residual = p.residual_norm(&u)?;
        let next_phi = p.phi_functional(&u)?;
        if theta <= 0.5 && next_phi > phi + 1e-12 * phi.abs().max(1.0) {
            violations += 1;
            debug!("Phi increased at iteration {it}: {phi} -> {next_phi}");
        }
        phi = next_phi;
        if best.as_ref().is_none_or(|(r, _, _)| residual < *r) {
            best = Some((residual, u.clone(), phi));
        }
        if residual <= opts.tol {
            if violations > 0 {
                warn!("Phi increased along {violations} Picard iterates");
            }
            return Ok(MeanFieldSolution {
                u,
                residual_norm: residual,
                phi_value: phi,
                iterations: it,
                converged: true,
                descent_violations: violations,
            });
        }
    }

    let (best_res, best_u, best_phi) = best.unwrap_or((residual, u, phi));
    Err(MeanFieldError::MaxIterExceeded {
        iterations: opts.max_iter,
        residual: best_res,
        best: Box::new(MeanFieldSolution {
            u: best_u,
            residual_norm: best_res,
            phi_value: best_phi,
            iterations: opts.max_iter,
            converged: false,
            descent_violations: violations,
        }),
    })
}

/// One point of a `ρ`-continuation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuationStep {
    pub rho: Vec<f64>,
    pub sup_norm: f64,
    pub residual_norm: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Solves along a path of `ρ` values, seeding each solve with the previous
/// solution. Stops at the first failure, which is returned with the steps
/// completed so far.
pub fn continuation(
    p: &MeanFieldProblem,
    path: &[Vec<f64>],
    opts: &SolveOptions,
) -> (Vec<ContinuationStep>, Option<MeanFieldError>) {
    let mut steps = Vec::with_capacity(path.len());
    let mut seed = vec![p.grid().zeros(); p.n()];
    for rho in path {
        let result = p
            .with_rho(rho.clone())
            .and_then(|q| solve_mean_field_from(&q, opts, seed.clone()));
        match result {
            Ok(sol) => {
                steps.push(ContinuationStep {
                    rho: rho.clone(),
                    sup_norm: sol.sup_norm(),
                    residual_norm: sol.residual_norm,
                    iterations: sol.iterations,
                    converged: true,
                });
                seed = sol.u;
            }
            Err(e) => return (steps, Some(e)),
        }
    }
    (steps, None)
}
