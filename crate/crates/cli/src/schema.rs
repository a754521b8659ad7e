//! Input and output documents for every subcommand.
//!
//! Field order in the output structs is the order written to disk.

use liouville_core::energy::{Classification, SurfaceSpec};
use liouville_core::matrix::{CoefficientMatrix, Failure};
use liouville_core::mean_field::{SolveOptions, WeightSpec};
use liouville_core::radial::{RadialOptions, StopReason};
use serde::{Deserialize, Serialize};

use crate::output::{fmt_f64, fmt_opt, parse_f64, parse_opt};
use crate::CliError;

pub const DEFAULT_SYM_TOL: f64 = 1e-12;

// ---------------------------------------------------------------- inputs

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixObject {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(rename = "A", alias = "a")]
    pub a: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sym_tol: Option<f64>,
}

/// Either `{"A": [[…]]}` or a bare array of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixInput {
    Raw(Vec<Vec<f64>>),
    Object(MatrixObject),
}

impl MatrixInput {
    pub fn build(&self) -> Result<CoefficientMatrix, CliError> {
        match self {
            MatrixInput::Raw(rows) => build_matrix(rows, None),
            MatrixInput::Object(o) => {
                if let Some(n) = o.n {
                    if n != o.a.len() {
                        return Err(CliError::Usage(format!(
                            "n = {n} but A has {} rows",
                            o.a.len()
                        )));
                    }
                }
                build_matrix(&o.a, o.sym_tol)
            }
        }
    }
}

pub fn build_matrix(rows: &[Vec<f64>], sym_tol: Option<f64>) -> Result<CoefficientMatrix, CliError> {
    CoefficientMatrix::new(rows, sym_tol.unwrap_or(DEFAULT_SYM_TOL))
        .map_err(|e| CliError::Usage(format!("invalid matrix: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyInput {
    #[serde(rename = "A", alias = "a")]
    pub a: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
}

/// Exactly one of the three fields.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurfaceInput {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub genus: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub holes: Option<u32>,
}

impl SurfaceInput {
    pub fn is_empty(&self) -> bool {
        self.chi.is_none() && self.genus.is_none() && self.holes.is_none()
    }

    pub fn spec(&self) -> Result<SurfaceSpec, CliError> {
        match (self.chi, self.genus, self.holes) {
            (None, Some(g), None) => Ok(SurfaceSpec::closed(g)),
            (None, None, Some(h)) => Ok(SurfaceSpec::planar(h)),
            // The degree depends on χ only; pick a surface realising it.
            (Some(chi), None, None) if chi <= 2 && chi % 2 == 0 => {
                Ok(SurfaceSpec::closed(((2 - chi) / 2) as u32))
            }
            (Some(chi), None, None) if chi <= 1 => Ok(SurfaceSpec::planar((1 - chi) as u32)),
            (Some(chi), None, None) => Err(CliError::Usage(format!(
                "no closed surface or planar domain has chi = {chi}"
            ))),
            _ => Err(CliError::Usage(
                "give exactly one of chi, genus, holes".to_string(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeInput {
    #[serde(rename = "A", alias = "a")]
    pub a: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
    #[serde(default)]
    pub surface: SurfaceInput,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rel_tol: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialInput {
    #[serde(rename = "A", alias = "a")]
    pub a: Vec<Vec<f64>>,
    pub alpha: Vec<f64>,
    #[serde(default)]
    pub options: RadialOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGrid {
    pub count: usize,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepInput {
    #[serde(rename = "A", alias = "a")]
    pub a: Vec<Vec<f64>>,
    /// Explicit heights; each row has length n (with α_n = 0 by convention)
    /// or n − 1 (then α_n = 0 is appended).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<Vec<f64>>>,
    /// Heads drawn uniformly from `[lo, hi)` with `--seed`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub random: Option<RandomGrid>,
    #[serde(default)]
    pub options: RadialOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OneOrMany {
    One(f64),
    Many(Vec<f64>),
}

impl OneOrMany {
    pub fn to_vec(&self) -> Vec<f64> {
        match self {
            OneOrMany::One(x) => vec![*x],
            OneOrMany::Many(v) => v.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonInput {
    #[serde(rename = "A", alias = "a")]
    pub a: Vec<Vec<f64>>,
    pub alpha_head: Vec<f64>,
    pub eps: OneOrMany,
    #[serde(default)]
    pub options: RadialOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MfInput {
    #[serde(rename = "A", alias = "a")]
    pub a: Vec<Vec<f64>>,
    pub rho: Vec<f64>,
    #[serde(rename = "K", alias = "k")]
    pub k: usize,
    pub h: Vec<WeightSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iter: Option<usize>,
}

impl MfInput {
    pub fn options(&self) -> SolveOptions {
        let d = SolveOptions::default();
        SolveOptions {
            theta: self.theta.unwrap_or(d.theta),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            tol: self.tol.unwrap_or(d.tol),
        }
    }
}

// --------------------------------------------------------------- outputs

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckMatrixOutput {
    pub n: usize,
    pub h1: Option<bool>,
    pub h2: Option<bool>,
    pub lemma21: Option<bool>,
    pub irreducible: bool,
    pub blocks: Vec<Vec<usize>>,
    pub inverse: Option<Vec<Vec<f64>>>,
    pub cond_estimate: Option<f64>,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegreeOutput {
    pub q: f64,
    pub shell: Classification,
    pub chi: i64,
    /// `None` when `ρ` lies on a critical hypersurface.
    pub degree: Option<i128>,
    pub undefined_reason: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EPointKind {
    Full,
    Partial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EPointOutput {
    pub kind: EPointKind,
    /// Indices carrying mass; all of them for a full point.
    pub subset: Vec<usize>,
    /// Length n, zero outside `subset`.
    pub sigma: Vec<f64>,
    pub xi: Vec<f64>,
    /// Membership of `sigma` in E (full points only).
    pub in_e: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MassStatus {
    Converged,
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    pub r: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub w: Vec<Vec<f64>>,
    pub sigma: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialOutput {
    pub alpha: Vec<f64>,
    pub status: MassStatus,
    pub stop_reason: StopReason,
    pub sigma: Option<Vec<f64>>,
    pub m: Option<Vec<f64>>,
    /// `|Λ_I(σ)| / (4 Σσ)`.
    pub pohozaev_residual: Option<f64>,
    pub in_e: Option<bool>,
    pub r_last: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub profile: Option<Profile>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowStatus {
    Converged,
    Divergent,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub alpha: Vec<f64>,
    pub status: RowStatus,
    pub sigma: Option<Vec<f64>>,
    pub m: Option<Vec<f64>>,
    pub pohozaev_residual: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepOutput {
    pub rows: Vec<SweepRecord>,
    /// Row index pairs whose masses coincide to 1e-6.
    pub non_injective: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonRecord {
    pub eps: f64,
    pub alpha: Vec<f64>,
    pub status: MassStatus,
    pub stop_reason: StopReason,
    pub sigma: Option<Vec<f64>>,
    /// Running masses at the last radius reached.
    pub sigma_end: Vec<f64>,
    pub m_end: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MfOutput {
    #[serde(rename = "K")]
    pub k: usize,
    pub converged: bool,
    pub iterations: usize,
    pub residual_norm: f64,
    pub phi_value: f64,
    pub descent_violations: usize,
    /// Row-major samples, x fastest.
    pub u: Vec<Vec<f64>>,
}

// ------------------------------------------------------------ CSV tables

fn numbered(prefix: &str, count: usize) -> impl Iterator<Item = String> + '_ {
    (1..=count).map(move |i| format!("{prefix}_{i}"))
}

fn count_prefix(header: &csv::StringRecord, prefix: &str) -> usize {
    header
        .iter()
        .filter(|h| {
            h.strip_prefix(prefix)
                .and_then(|s| s.strip_prefix('_'))
                .is_some_and(|s| s.parse::<usize>().is_ok())
        })
        .count()
}

fn cells<'r>(rec: &'r csv::StringRecord, at: &mut usize, len: usize) -> Result<Vec<&'r str>, String> {
    let out: Option<Vec<&str>> = (*at..*at + len).map(|i| rec.get(i)).collect();
    *at += len;
    out.ok_or_else(|| "short CSV row".to_string())
}

fn opt_block(cells: &[&str]) -> Result<Option<Vec<f64>>, String> {
    if cells.iter().all(|c| c.is_empty()) {
        return Ok(None);
    }
    cells.iter().map(|c| parse_f64(c)).collect::<Result<_, _>>().map(Some)
}

fn block(cells: &[&str]) -> Result<Vec<f64>, String> {
    cells.iter().map(|c| parse_f64(c)).collect()
}

fn push_opt(rec: &mut Vec<String>, v: &Option<Vec<f64>>, n: usize) {
    match v {
        Some(v) => rec.extend(v.iter().map(|x| fmt_f64(*x))),
        None => rec.extend(std::iter::repeat_n(String::new(), n)),
    }
}

/// Sweep table layout. The trailing height is omitted when it is zero in
/// every row (the usual normalisation).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepShape {
    pub n: usize,
    pub alpha_cols: usize,
}

impl SweepShape {
    pub fn for_grid(n: usize, grid: &[Vec<f64>]) -> Self {
        let pinned = grid.iter().all(|a| a.last() == Some(&0.0));
        let alpha_cols = if pinned && n > 1 { n - 1 } else { n };
        Self { n, alpha_cols }
    }

    pub fn header(&self) -> Vec<String> {
        numbered("alpha", self.alpha_cols)
            .chain(numbered("sigma", self.n))
            .chain(numbered("m", self.n))
            .chain(["pohozaev_residual".to_string(), "status".to_string()])
            .collect()
    }

    pub fn from_header(header: &csv::StringRecord) -> Self {
        Self {
            n: count_prefix(header, "sigma"),
            alpha_cols: count_prefix(header, "alpha"),
        }
    }
}

impl SweepRecord {
    pub fn to_csv(&self, shape: SweepShape) -> Vec<String> {
        let mut rec: Vec<String> = self.alpha[..shape.alpha_cols]
            .iter()
            .map(|x| fmt_f64(*x))
            .collect();
        push_opt(&mut rec, &self.sigma, shape.n);
        push_opt(&mut rec, &self.m, shape.n);
        rec.push(fmt_opt(self.pohozaev_residual));
        rec.push(match (&self.status, &self.error) {
            (RowStatus::Converged, _) => "converged".to_string(),
            (RowStatus::Divergent, _) => "divergent".to_string(),
            (RowStatus::Error, Some(msg)) => format!("error: {msg}"),
            (RowStatus::Error, None) => "error".to_string(),
        });
        rec
    }

    pub fn from_csv(rec: &csv::StringRecord, shape: SweepShape) -> Result<Self, String> {
        let mut at = 0;
        let mut alpha = block(&cells(rec, &mut at, shape.alpha_cols)?)?;
        if alpha.len() < shape.n {
            alpha.push(0.0);
        }
        let sigma = opt_block(&cells(rec, &mut at, shape.n)?)?;
        let m = opt_block(&cells(rec, &mut at, shape.n)?)?;
        let pohozaev_residual = parse_opt(cells(rec, &mut at, 1)?[0])?;
        let status = cells(rec, &mut at, 1)?[0];
        let (status, error) = match status {
            "converged" => (RowStatus::Converged, None),
            "divergent" => (RowStatus::Divergent, None),
            "error" => (RowStatus::Error, None),
            s => match s.strip_prefix("error: ") {
                Some(msg) => (RowStatus::Error, Some(msg.to_string())),
                None => return Err(format!("unknown status {s:?}")),
            },
        };
        Ok(Self {
            alpha,
            status,
            sigma,
            m,
            pohozaev_residual,
            error,
        })
    }
}

pub fn epsilon_header(n: usize) -> Vec<String> {
    ["eps".to_string(), "status".to_string(), "stop_reason".to_string()]
        .into_iter()
        .chain(numbered("alpha", n))
        .chain(numbered("sigma", n))
        .chain(numbered("sigma_end", n))
        .chain(numbered("m_end", n))
        .collect()
}

fn stop_reason_str(s: StopReason) -> &'static str {
    match s {
        StopReason::TailConverged => "tail_converged",
        StopReason::RadiusLimitExtrapolated => "radius_limit_extrapolated",
        StopReason::RadiusLimitDivergent => "radius_limit_divergent",
    }
}

fn parse_stop_reason(s: &str) -> Result<StopReason, String> {
    match s {
        "tail_converged" => Ok(StopReason::TailConverged),
        "radius_limit_extrapolated" => Ok(StopReason::RadiusLimitExtrapolated),
        "radius_limit_divergent" => Ok(StopReason::RadiusLimitDivergent),
        _ => Err(format!("unknown stop reason {s:?}")),
    }
}

impl EpsilonRecord {
    pub fn to_csv(&self) -> Vec<String> {
        let n = self.sigma_end.len();
        let mut rec = vec![
            fmt_f64(self.eps),
            match self.status {
                MassStatus::Converged => "converged",
                MassStatus::Divergent => "divergent",
            }
            .to_string(),
            stop_reason_str(self.stop_reason).to_string(),
        ];
        rec.extend(self.alpha.iter().map(|x| fmt_f64(*x)));
        push_opt(&mut rec, &self.sigma, n);
        rec.extend(self.sigma_end.iter().map(|x| fmt_f64(*x)));
        rec.extend(self.m_end.iter().map(|x| fmt_f64(*x)));
        rec
    }

    pub fn from_csv(rec: &csv::StringRecord, n: usize) -> Result<Self, String> {
        let mut at = 0;
        let eps = parse_f64(cells(rec, &mut at, 1)?[0])?;
        let status = match cells(rec, &mut at, 1)?[0] {
            "converged" => MassStatus::Converged,
            "divergent" => MassStatus::Divergent,
            s => return Err(format!("unknown status {s:?}")),
        };
        let stop_reason = parse_stop_reason(cells(rec, &mut at, 1)?[0])?;
        Ok(Self {
            eps,
            status,
            stop_reason,
            alpha: block(&cells(rec, &mut at, n)?)?,
            sigma: opt_block(&cells(rec, &mut at, n)?)?,
            sigma_end: block(&cells(rec, &mut at, n)?)?,
            m_end: block(&cells(rec, &mut at, n)?)?,
        })
    }

    pub fn n_from_header(header: &csv::StringRecord) -> usize {
        count_prefix(header, "alpha")
    }
}

/// Radial profile: one row per accepted step.
pub fn profile_header(n: usize) -> Vec<String> {
    std::iter::once("r".to_string())
        .chain(numbered("u", n))
        .chain(numbered("w", n))
        .chain(numbered("sigma", n))
        .collect()
}

impl Profile {
    pub fn to_csv_rows(&self) -> impl Iterator<Item = Vec<String>> + '_ {
        (0..self.r.len()).map(move |k| {
            std::iter::once(self.r[k])
                .chain(self.u.iter().map(|c| c[k]))
                .chain(self.w.iter().map(|c| c[k]))
                .chain(self.sigma.iter().map(|c| c[k]))
                .map(fmt_f64)
                .collect()
        })
    }

    pub fn from_csv(
        header: &csv::StringRecord,
        rows: &[csv::StringRecord],
    ) -> Result<Self, String> {
        let n = count_prefix(header, "u");
        let mut p = Profile {
            r: Vec::with_capacity(rows.len()),
            u: vec![Vec::new(); n],
            w: vec![Vec::new(); n],
            sigma: vec![Vec::new(); n],
        };
        for rec in rows {
            let mut at = 0;
            p.r.push(parse_f64(cells(rec, &mut at, 1)?[0])?);
            for target in [&mut p.u, &mut p.w, &mut p.sigma] {
                for (col, v) in target.iter_mut().zip(block(&cells(rec, &mut at, n)?)?) {
                    col.push(v);
                }
            }
        }
        Ok(p)
    }
}

pub fn field_header(n: usize) -> Vec<String> {
    ["x".to_string(), "y".to_string()]
        .into_iter()
        .chain(numbered("u", n))
        .collect()
}

impl MfOutput {
    /// One row per grid node: `x, y, u_1, …, u_n`.
    pub fn field_rows(&self) -> impl Iterator<Item = Vec<String>> + '_ {
        let k = self.k;
        let h = 1.0 / k as f64;
        (0..k * k).map(move |idx| {
            let (ix, iy) = (idx % k, idx / k);
            [ix as f64 * h, iy as f64 * h]
                .into_iter()
                .chain(self.u.iter().map(|c| c[idx]))
                .map(fmt_f64)
                .collect()
        })
    }
}

/// Field samples back from `x, y, u_1, …` rows.
pub fn fields_from_csv(
    header: &csv::StringRecord,
    rows: &[csv::StringRecord],
) -> Result<Vec<Vec<f64>>, String> {
    let n = count_prefix(header, "u");
    let mut u = vec![Vec::with_capacity(rows.len()); n];
    for rec in rows {
        let mut at = 2;
        for (col, v) in u.iter_mut().zip(block(&cells(rec, &mut at, n)?)?) {
            col.push(v);
        }
    }
    Ok(u)
}
