use std::io::Write;

use liouville_core::energy::{
    classify_rho, construct_e_point, degree_for_rho, degree_from_chi, in_e, Degree, EPoint,
    EnergyError, MassVector, GAMMA_REL_TOL,
};
use liouville_core::matrix::{check_hypotheses, decompose_blocks, CoefficientMatrix};
use liouville_core::mean_field::{
    solve_mean_field, MeanFieldError, MeanFieldProblem, MeanFieldSolution, TorusGrid,
};
use liouville_core::radial::{
    epsilon_family, find_collisions, integrate_radial, sweep_initial_values, RadialError,
    RadialSolution, SweepRow, TotalMass,
};
use liouville_core::sampling::{rng, uniform_vec};
use liouville_core::Execution;
use serde::de::DeserializeOwned;

use crate::output::{csv_writer, write_json};
use crate::schema::*;
use crate::{Cli, CliError, Command, Format, Sink};

fn parse<T: DeserializeOwned>(input: &[u8]) -> Result<T, CliError> {
    serde_json::from_slice(input).map_err(|e| CliError::Usage(format!("malformed input: {e}")))
}

fn json_only(format: Format, what: &str) -> Result<(), CliError> {
    match format {
        Format::Json => Ok(()),
        Format::Csv => Err(CliError::Usage(format!("{what} has no CSV output"))),
    }
}

fn energy_err(e: EnergyError) -> CliError {
    match e {
        EnergyError::LengthMismatch { .. }
        | EnergyError::IndexOutOfRange { .. }
        | EnergyError::NonpositiveRho(..)
        | EnergyError::NegativeRho(..)
        | EnergyError::NegativeMass(..)
        | EnergyError::EmptySubset
        | EnergyError::TooLarge(_) => CliError::Usage(e.to_string()),
        _ => CliError::Math(e.to_string()),
    }
}

fn radial_err(e: RadialError) -> CliError {
    match e {
        RadialError::LengthMismatch { .. }
        | RadialError::NonFiniteHeight(_)
        | RadialError::InvalidOption(_)
        | RadialError::BadEpsilonFamily { .. } => CliError::Usage(e.to_string()),
        _ => CliError::Math(e.to_string()),
    }
}

fn mean_field_err(e: MeanFieldError) -> CliError {
    match e {
        MeanFieldError::BadGrid(_)
        | MeanFieldError::NonzeroMean { .. }
        | MeanFieldError::NonPositiveWeight { .. }
        | MeanFieldError::LengthMismatch { .. }
        | MeanFieldError::NegativeRho(..)
        | MeanFieldError::InvalidOption(_) => CliError::Usage(e.to_string()),
        _ => CliError::Math(e.to_string()),
    }
}

pub fn dispatch(cli: &Cli, input: &[u8], mut out: Sink) -> Result<i32, CliError> {
    match &cli.command {
        Command::CheckMatrix(io) => {
            json_only(io.format, "check-matrix")?;
            let a = parse::<MatrixInput>(input)?.build()?;
            write_json(&mut out, &check_matrix(&a))?;
            Ok(0)
        }
        Command::Classify(io) => {
            json_only(io.format, "classify")?;
            let doc: ClassifyInput = parse(input)?;
            let a = build_matrix(&doc.a, None)?;
            let point = classify_rho(&a, &doc.rho, doc.rel_tol.unwrap_or(GAMMA_REL_TOL))
                .map_err(energy_err)?;
            write_json(&mut out, &point.classification)?;
            Ok(0)
        }
        Command::Degree {
            io,
            chi,
            genus,
            holes,
            shell,
        } => {
            let flags = SurfaceInput {
                chi: *chi,
                genus: *genus,
                holes: *holes,
            };
            match shell {
                Some(n) => {
                    let chi = flags.spec()?.chi;
                    let d = degree_from_chi(chi, *n).map_err(energy_err)?;
                    writeln!(out, "{d}")?;
                    out.flush()?;
                    Ok(0)
                }
                None => {
                    json_only(io.format, "degree")?;
                    let doc: DegreeInput = parse(input)?;
                    let surface = if flags.is_empty() { doc.surface } else { flags };
                    let (o, ok) = degree_doc(&doc, surface)?;
                    write_json(&mut out, &o)?;
                    Ok(if ok { 0 } else { 1 })
                }
            }
        }
        Command::EPoint(io) => {
            json_only(io.format, "e-point")?;
            let a = parse::<MatrixInput>(input)?.build()?;
            let o = e_point(&a)?;
            write_json(&mut out, &o)?;
            Ok(0)
        }
        Command::Radial { io, profile } => {
            let doc: RadialInput = parse(input)?;
            let a = build_matrix(&doc.a, None)?;
            let sol = integrate_radial(&a, &doc.alpha, &doc.options).map_err(radial_err)?;
            let o = radial_doc(&a, sol, *profile || io.format == Format::Csv);
            match io.format {
                Format::Json => write_json(&mut out, &o)?,
                Format::Csv => {
                    let p = o.profile.as_ref().expect("profile requested");
                    let mut w = csv_writer(&mut out);
                    w.write_record(profile_header(a.n()))?;
                    for row in p.to_csv_rows() {
                        w.write_record(row)?;
                    }
                    w.flush()?;
                }
            }
            Ok(0)
        }
        Command::Sweep { io, chunk } => {
            let doc: SweepInput = parse(input)?;
            let a = build_matrix(&doc.a, None)?;
            let grid = sweep_grid(&doc, a.n(), cli.seed)?;
            sweep(&a, &grid, &doc, io.format, (*chunk).max(1), out)?;
            Ok(0)
        }
        Command::EpsilonFamily(io) => {
            let doc: EpsilonInput = parse(input)?;
            let a = build_matrix(&doc.a, None)?;
            let mut rows = Vec::new();
            for eps in doc.eps.to_vec() {
                let sol =
                    epsilon_family(&a, &doc.alpha_head, eps, &doc.options).map_err(radial_err)?;
                rows.push(epsilon_record(eps, &sol));
            }
            match io.format {
                Format::Json => write_json(&mut out, &rows)?,
                Format::Csv => {
                    let mut w = csv_writer(&mut out);
                    w.write_record(epsilon_header(a.n()))?;
                    for r in &rows {
                        w.write_record(r.to_csv())?;
                    }
                    w.flush()?;
                }
            }
            Ok(0)
        }
        Command::MfSolve(io) => {
            let doc: MfInput = parse(input)?;
            let (o, converged) = mf_solve(&doc)?;
            match io.format {
                Format::Json => write_json(&mut out, &o)?,
                Format::Csv => {
                    let mut w = csv_writer(&mut out);
                    w.write_record(field_header(o.u.len()))?;
                    for row in o.field_rows() {
                        w.write_record(row)?;
                    }
                    w.flush()?;
                    eprintln!(
                        "liouville: converged={} iterations={} residual_norm={:e} phi_value={}",
                        o.converged,
                        o.iterations,
                        o.residual_norm,
                        o.phi_value
                    );
                }
            }
            Ok(if converged { 0 } else { 1 })
        }
    }
}

pub fn check_matrix(a: &CoefficientMatrix) -> CheckMatrixOutput {
    let tol = a.default_zero_tol();
    let report = check_hypotheses(a, tol);
    let blocks = decompose_blocks(a, tol);
    let inverted = a.invert().ok();
    CheckMatrixOutput {
        n: a.n(),
        h1: report.h1_pass,
        h2: report.h2_pass,
        lemma21: report.lemma21_pass,
        irreducible: blocks.len() == 1,
        blocks: blocks.blocks,
        inverse: inverted.as_ref().and_then(|m| m.inverse_rows()),
        cond_estimate: inverted.as_ref().and_then(|m| m.cond_estimate()),
        failures: report.failures,
    }
}

/// Returns the document and whether the degree is defined.
pub fn degree_doc(doc: &DegreeInput, surface: SurfaceInput) -> Result<(DegreeOutput, bool), CliError> {
    if surface.is_empty() {
        return Err(CliError::Usage(
            "degree needs a surface (chi, genus or holes)".to_string(),
        ));
    }
    let spec = surface.spec()?;
    let a = build_matrix(&doc.a, None)?;
    let point = degree_for_rho(&a, &doc.rho, &spec, doc.rel_tol.unwrap_or(GAMMA_REL_TOL))
        .map_err(energy_err)?;
    let degree = point.degree.expect("degree_for_rho fills the degree");
    let (value, reason) = match degree {
        Degree::Value { degree } => (Some(degree), None),
        Degree::Undefined { reason } => (None, Some(reason)),
    };
    Ok((
        DegreeOutput {
            q: point.q,
            shell: point.classification,
            chi: spec.chi,
            degree: value,
            undefined_reason: reason,
        },
        value.is_some(),
    ))
}

pub fn e_point(a: &CoefficientMatrix) -> Result<EPointOutput, CliError> {
    let n = a.n();
    Ok(match construct_e_point(a).map_err(energy_err)? {
        EPoint::Full { sigma, xi } => EPointOutput {
            kind: EPointKind::Full,
            subset: (0..n).collect(),
            in_e: Some(in_e(a, &sigma, 1e-10)),
            sigma: sigma.sigma().to_vec(),
            xi,
        },
        EPoint::Partial {
            subset,
            sigma_subset,
            xi,
        } => {
            let mut sigma = vec![0.0; n];
            for (&i, &s) in subset.iter().zip(&sigma_subset) {
                sigma[i] = s;
            }
            EPointOutput {
                kind: EPointKind::Partial,
                subset,
                sigma,
                xi,
                in_e: None,
            }
        }
    })
}

fn mass_fields(a: &CoefficientMatrix, masses: Option<&MassVector>) -> (Option<Vec<f64>>, Option<Vec<f64>>, Option<f64>) {
    match masses {
        Some(m) => (
            Some(m.sigma().to_vec()),
            Some(m.m().to_vec()),
            Some(m.pohozaev_defect(a).abs() / (liouville_core::ENTIRE * m.total())),
        ),
        None => (None, None, None),
    }
}

pub fn radial_doc(a: &CoefficientMatrix, sol: RadialSolution, with_profile: bool) -> RadialOutput {
    let masses = sol.sigma_infinity.masses();
    let (sigma, m, pohozaev_residual) = mass_fields(a, masses);
    RadialOutput {
        alpha: sol.alpha.clone(),
        status: match sol.sigma_infinity {
            TotalMass::Converged { .. } => MassStatus::Converged,
            TotalMass::Divergent => MassStatus::Divergent,
        },
        stop_reason: sol.stop_reason,
        sigma,
        m,
        pohozaev_residual,
        in_e: masses.map(|ms| in_e(a, ms, 1e-3)),
        r_last: sol.r_last(),
        steps_accepted: sol.steps_accepted,
        steps_rejected: sol.steps_rejected,
        profile: with_profile.then_some(Profile {
            r: sol.r_grid,
            u: sol.u,
            w: sol.w,
            sigma: sol.sigma_running,
        }),
    }
}

fn sweep_grid(doc: &SweepInput, n: usize, seed: u64) -> Result<Vec<Vec<f64>>, CliError> {
    match (&doc.grid, &doc.random) {
        (Some(grid), None) => grid
            .iter()
            .map(|row| match row.len() {
                l if l == n => Ok(row.clone()),
                l if l + 1 == n => {
                    let mut r = row.clone();
                    r.push(0.0);
                    Ok(r)
                }
                l => Err(CliError::Usage(format!(
                    "grid row of length {l} for n = {n}"
                ))),
            })
            .collect(),
        (None, Some(spec)) => {
            if spec.lo.partial_cmp(&spec.hi) != Some(std::cmp::Ordering::Less) {
                return Err(CliError::Usage("random grid needs lo < hi".to_string()));
            }
            let mut r = rng(seed);
            Ok((0..spec.count)
                .map(|_| {
                    let mut alpha = uniform_vec(&mut r, n - 1, spec.lo, spec.hi);
                    alpha.push(0.0);
                    alpha
                })
                .collect())
        }
        _ => Err(CliError::Usage(
            "sweep needs exactly one of grid, random".to_string(),
        )),
    }
}

pub fn sweep_record(a: &CoefficientMatrix, row: &SweepRow) -> SweepRecord {
    match &row.outcome {
        Ok(o) => {
            let (sigma, m, _) = mass_fields(a, o.total.masses());
            SweepRecord {
                alpha: row.alpha.clone(),
                status: match o.total {
                    TotalMass::Converged { .. } => RowStatus::Converged,
                    TotalMass::Divergent => RowStatus::Divergent,
                },
                sigma,
                m,
                pohozaev_residual: o.pohozaev_residual,
                error: None,
            }
        }
        Err(e) => SweepRecord {
            alpha: row.alpha.clone(),
            status: RowStatus::Error,
            sigma: None,
            m: None,
            pohozaev_residual: None,
            error: Some(e.to_string()),
        },
    }
}

fn sweep(
    a: &CoefficientMatrix,
    grid: &[Vec<f64>],
    doc: &SweepInput,
    format: Format,
    chunk: usize,
    mut out: Sink,
) -> Result<(), CliError> {
    let shape = SweepShape::for_grid(a.n(), grid);
    let mut all: Vec<SweepRow> = Vec::with_capacity(grid.len());
    let mut w = csv_writer(&mut out);
    if format == Format::Csv {
        w.write_record(shape.header())?;
        w.flush()?;
    }
    for batch in grid.chunks(chunk) {
        let table = sweep_initial_values(a, batch, &doc.options, Execution::Parallel);
        if format == Format::Csv {
            for row in &table.rows {
                w.write_record(sweep_record(a, row).to_csv(shape))?;
            }
            w.flush()?;
        }
        all.extend(table.rows);
    }
    drop(w);
    let pairs = find_collisions(&all);
    match format {
        Format::Json => write_json(
            &mut out,
            &SweepOutput {
                rows: all.iter().map(|r| sweep_record(a, r)).collect(),
                non_injective: pairs.iter().map(|&(i, j)| [i, j]).collect(),
            },
        )?,
        Format::Csv => {
            if !pairs.is_empty() {
                eprintln!(
                    "liouville: note: {} grid point pairs map to the same masses",
                    pairs.len()
                );
            }
        }
    }
    Ok(())
}

pub fn epsilon_record(eps: f64, sol: &RadialSolution) -> EpsilonRecord {
    let last = sol.len() - 1;
    EpsilonRecord {
        eps,
        alpha: sol.alpha.clone(),
        status: match sol.sigma_infinity {
            TotalMass::Converged { .. } => MassStatus::Converged,
            TotalMass::Divergent => MassStatus::Divergent,
        },
        stop_reason: sol.stop_reason,
        sigma: sol.sigma_infinity.masses().map(|m| m.sigma().to_vec()),
        sigma_end: sol.sigma_running.iter().map(|c| c[last]).collect(),
        m_end: sol.m_running.iter().map(|c| c[last]).collect(),
    }
}

fn mf_doc(k: usize, sol: MeanFieldSolution) -> MfOutput {
    MfOutput {
        k,
        converged: sol.converged,
        iterations: sol.iterations,
        residual_norm: sol.residual_norm,
        phi_value: sol.phi_value,
        descent_violations: sol.descent_violations,
        u: sol.u.into_iter().map(|f| f.into_values()).collect(),
    }
}

/// Returns the document and whether the iteration converged. A run that
/// exhausts its budget still reports its best iterate.
pub fn mf_solve(doc: &MfInput) -> Result<(MfOutput, bool), CliError> {
    let a = build_matrix(&doc.a, None)?;
    let grid = TorusGrid::new(doc.k).map_err(mean_field_err)?;
    if doc.h.len() != a.n() {
        return Err(CliError::Usage(format!(
            "expected {} weights, got {}",
            a.n(),
            doc.h.len()
        )));
    }
    let problem = MeanFieldProblem::from_specs(a, doc.rho.clone(), &doc.h, grid)
        .map_err(mean_field_err)?
        .with_execution(Execution::Sequential);
    match solve_mean_field(&problem, &doc.options()) {
        Ok(sol) => Ok((mf_doc(doc.k, sol), true)),
        Err(MeanFieldError::MaxIterExceeded { best, .. }) => Ok((mf_doc(doc.k, *best), false)),
        Err(e) => Err(mean_field_err(e)),
    }
}
