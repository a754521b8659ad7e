//! Uniform periodic grids on the unit flat torus and spectral differentiation.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::MeanFieldError;
use crate::par::{self, Execution};

/// Relative zero-mean threshold for fields entering `Δ⁻¹`.
pub const ZERO_MEAN_REL: f64 = 1e-12;

/// `K × K` nodes on `[0,1)²`, spacing `1/K`, quadrature weight `1/K²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    k: usize,
}

impl TorusGrid {
    pub fn new(k: usize) -> Result<Self, MeanFieldError> {
        if k < 2 || !k.is_power_of_two() {
            return Err(MeanFieldError::BadGrid(k));
        }
        Ok(Self { k })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.k * self.k
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn weight(&self) -> f64 {
        1.0 / (self.k * self.k) as f64
    }

    /// Coordinates of node `(ix, iy)`.
    pub fn point(&self, ix: usize, iy: usize) -> (f64, f64) {
        (ix as f64 * self.spacing(), iy as f64 * self.spacing())
    }

    /// Samples `f(x, y)`; storage is row-major with `x` fastest.
    pub fn sample<F: Fn(f64, f64) -> f64>(&self, f: F) -> TorusField {
        let mut values = Vec::with_capacity(self.len());
        for iy in 0..self.k {
            for ix in 0..self.k {
                let (x, y) = self.point(ix, iy);
                values.push(f(x, y));
            }
        }
        TorusField::new(*self, values)
    }

    pub fn zeros(&self) -> TorusField {
        TorusField {
            grid: *self,
            values: vec![0.0; self.len()],
            zero_mean: true,
        }
    }
}

/// Scalar field sampled on a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct TorusField {
    grid: TorusGrid,
    values: Vec<f64>,
    zero_mean: bool,
}

impl TorusField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Self {
        assert_eq!(values.len(), grid.len(), "field size does not match grid");
        let zero_mean = has_zero_mean(&values);
        Self {
            grid,
            values,
            zero_mean,
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn is_zero_mean(&self) -> bool {
        self.zero_mean
    }

    /// Grid quadrature `∫ f`, i.e. the mean over nodes.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.weight()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Subtracts the mean and tags the field zero-mean.
    pub fn project_zero_mean(mut self) -> Self {
        let mean = self.integral();
        for v in &mut self.values {
            *v -= mean;
        }
        self.zero_mean = true;
        self
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        Self::new(self.grid, self.values.iter().map(|&x| f(x)).collect())
    }

    pub fn zip_map<F: Fn(f64, f64) -> f64>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.grid, other.grid);
        Self::new(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    /// `max |f − g|`.
    pub fn max_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Grid inner product `∫ f g`.
    pub fn dot(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            * self.grid.weight()
    }
}

fn has_zero_mean(values: &[f64]) -> bool {
    let max = values.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    mean.abs() <= ZERO_MEAN_REL * max
}

/// Planned 2-D transforms and the symbol `−4π²|k|²` for one grid size.
#[derive(Clone)]
pub struct Spectral {
    grid: TorusGrid,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    /// `4π²(k_x² + k_y²)` in storage order.
    symbol: Vec<f64>,
    exec: Execution,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .field("exec", &self.exec)
            .finish()
    }
}

fn wavenumber(i: usize, k: usize) -> f64 {
    if i < k / 2 {
        i as f64
    } else {
        i as f64 - k as f64
    }
}

impl Spectral {
    pub fn new(grid: TorusGrid, exec: Execution) -> Self {
        let k = grid.k();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(k);
        let inverse = planner.plan_fft_inverse(k);
        let mut symbol = Vec::with_capacity(grid.len());
        for iy in 0..k {
            let ky = wavenumber(iy, k);
            for ix in 0..k {
                let kx = wavenumber(ix, k);
                symbol.push(4.0 * PI * PI * (kx * kx + ky * ky));
            }
        }
        Self {
            grid,
            forward,
            inverse,
            symbol,
            exec,
        }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    fn fft2(&self, data: &mut [Complex64], inverse: bool) {
        let k = self.grid.k();
        let plan = if inverse { &self.inverse } else { &self.forward };
        par::for_each_chunk_mut(self.exec, data, k, |row| plan.process(row));
        let mut t = transpose(data, k);
        par::for_each_chunk_mut(self.exec, &mut t, k, |row| plan.process(row));
        let back = transpose(&t, k);
        data.copy_from_slice(&back);
    }

    /// Applies the Fourier multiplier `m(|k|²)` to a real field.
    fn apply<F: Fn(f64) -> f64>(&self, f: &TorusField, multiplier: F) -> Vec<f64> {
        assert_eq!(f.grid(), self.grid, "field grid does not match transform");
        let mut data: Vec<Complex64> = f.values().iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.fft2(&mut data, false);
        for (c, &s) in data.iter_mut().zip(&self.symbol) {
            *c *= multiplier(s);
        }
        self.fft2(&mut data, true);
        let norm = 1.0 / self.grid.len() as f64;
        data.iter().map(|c| c.re * norm).collect()
    }

    /// Spectral Laplacian, multiplier `−4π²|k|²`.
    pub fn laplacian(&self, f: &TorusField) -> TorusField {
        let values = self.apply(f, |s| -s);
        let mut out = TorusField::new(self.grid, values);
        if f.is_zero_mean() {
            out.zero_mean = true;
        }
        out
    }

    /// Zero-mean solution of `Δv = f`; the zero mode is set to 0.
    pub fn inverse_laplacian(&self, f: &TorusField) -> Result<TorusField, MeanFieldError> {
        if !has_zero_mean(f.values()) {
            return Err(MeanFieldError::NonzeroMean {
                mean: f.integral(),
            });
        }
        let values = self.apply(f, |s| if s == 0.0 { 0.0 } else { -1.0 / s });
        Ok(TorusField::new(self.grid, values).project_zero_mean())
    }
}

fn transpose(data: &[Complex64], k: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); data.len()];
    for r in 0..k {
        for c in 0..k {
            out[c * k + r] = data[r * k + c];
        }
    }
    out
}

/// Spectral Laplacian of `f` on its own grid.
pub fn laplacian(f: &TorusField) -> TorusField {
    Spectral::new(f.grid(), Execution::default()).laplacian(f)
}

/// `Δ⁻¹ f` for zero-mean `f`.
pub fn inverse_laplacian(f: &TorusField) -> Result<TorusField, MeanFieldError> {
    Spectral::new(f.grid(), Execution::default()).inverse_laplacian(f)
}

/// Weight `h = constant + Σ amp · cos(2π(k_x x + k_y y))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightSpec {
    #[serde(rename = "const")]
    pub constant: f64,
    #[serde(default)]
    pub cos_terms: Vec<CosTerm>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosTerm {
    pub kx: i32,
    pub ky: i32,
    pub amp: f64,
}

impl WeightSpec {
    pub fn constant(c: f64) -> Self {
        Self {
            constant: c,
            cos_terms: Vec::new(),
        }
    }

    pub fn with_cos(mut self, kx: i32, ky: i32, amp: f64) -> Self {
        self.cos_terms.push(CosTerm { kx, ky, amp });
        self
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.constant
            + self
                .cos_terms
                .iter()
                .map(|t| t.amp * (2.0 * PI * (t.kx as f64 * x + t.ky as f64 * y)).cos())
                .sum::<f64>()
    }

    pub fn sample(&self, grid: &TorusGrid) -> TorusField {
        grid.sample(|x, y| self.eval(x, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(k: usize) -> TorusGrid {
        TorusGrid::new(k).unwrap()
    }

    #[test]
    fn grid_rejects_non_powers_of_two() {
        assert!(TorusGrid::new(12).is_err());
        assert!(TorusGrid::new(1).is_err());
        let g = grid(16);
        assert_eq!(g.weight() * g.len() as f64, 1.0);
    }

    #[test]
    fn laplacian_eigenfunctions() {
        let g = grid(32);
        let f = g.sample(|x, _| (2.0 * PI * x).cos());
        let lf = laplacian(&f);
        let want = f.map(|v| -4.0 * PI * PI * v);
        assert!(lf.max_diff(&want) <= 1e-10);

        let f = g.sample(|x, y| (2.0 * PI * x).cos() * (4.0 * PI * y).cos());
        let want = f.map(|v| -20.0 * PI * PI * v);
        assert!(laplacian(&f).max_diff(&want) <= 1e-9);

        let ones = g.sample(|_, _| 1.0);
        assert!(laplacian(&ones).max_abs() <= 1e-12);
    }

    #[test]
    fn inverse_laplacian_examples() {
        let g = grid(32);
        let f = g.sample(|x, _| (2.0 * PI * x).cos());
        let v = inverse_laplacian(&f).unwrap();
        let want = f.map(|x| -x / (4.0 * PI * PI));
        assert!(v.max_diff(&want) <= 1e-14);
        assert_eq!(inverse_laplacian(&g.zeros()).unwrap().max_abs(), 0.0);
        let ones = g.sample(|_, _| 1.0);
        assert!(matches!(
            inverse_laplacian(&ones),
            Err(MeanFieldError::NonzeroMean { .. })
        ));
    }

    #[test]
    fn sequential_and_parallel_transforms_agree_bitwise() {
        let g = grid(16);
        let f = g.sample(|x, y| (2.0 * PI * x).sin() + 0.3 * (6.0 * PI * (x + y)).cos());
        let a = Spectral::new(g, Execution::Sequential).laplacian(&f);
        let b = Spectral::new(g, Execution::Parallel).laplacian(&f);
        assert_eq!(a, b);
    }

    #[test]
    fn weight_sampling() {
        let g = grid(8);
        let h = WeightSpec::constant(1.0).with_cos(1, 0, 0.1).sample(&g);
        assert!((h.values()[0] - 1.1).abs() < 1e-15);
        assert!((h.integral() - 1.0).abs() < 1e-15);
    }
}
