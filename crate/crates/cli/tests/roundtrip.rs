//! emit → parse → emit is the identity for every document and table.

use liouville_cli::commands::*;
use liouville_cli::output::{csv_writer, to_json};
use liouville_cli::schema::*;
use liouville_core::energy::{classify_rho, GAMMA_REL_TOL};
use liouville_core::mean_field::WeightSpec;
use liouville_core::radial::{epsilon_family, integrate_radial, sweep_initial_values, RadialOptions};
use liouville_core::Execution;
use serde::de::DeserializeOwned;
use serde::Serialize;

fn json_roundtrip<T: Serialize + DeserializeOwned + PartialEq + std::fmt::Debug>(value: &T) {
    let first = to_json(value);
    let parsed: T = serde_json::from_slice(&first).unwrap();
    assert_eq!(&parsed, value);
    assert_eq!(to_json(&parsed), first);
}

fn csv_bytes(header: Vec<String>, rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut buf = Vec::new();
    {
        let mut w = csv_writer(&mut buf);
        w.write_record(header).unwrap();
        for r in rows {
            w.write_record(r).unwrap();
        }
        w.flush().unwrap();
    }
    buf
}

fn csv_parse(bytes: &[u8]) -> (csv::StringRecord, Vec<csv::StringRecord>) {
    let mut r = csv::ReaderBuilder::new().from_reader(bytes);
    let header = r.headers().unwrap().clone();
    let rows = r.records().collect::<Result<Vec<_>, _>>().unwrap();
    (header, rows)
}

fn m(rows: &[&[f64]]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| r.to_vec()).collect()
}

fn asym() -> Vec<Vec<f64>> {
    m(&[&[0.5, 1.0], &[1.0, 0.2]])
}

#[test]
fn input_documents() {
    json_roundtrip(&MatrixInput::Raw(asym()));
    json_roundtrip(&MatrixInput::Object(MatrixObject {
        n: Some(2),
        a: asym(),
        sym_tol: Some(1e-9),
    }));
    json_roundtrip(&ClassifyInput {
        a: asym(),
        rho: vec![0.1, 1.0 / 3.0],
        rel_tol: None,
    });
    json_roundtrip(&DegreeInput {
        a: asym(),
        rho: vec![1.0, 2.0],
        surface: SurfaceInput {
            chi: Some(-4),
            ..Default::default()
        },
        rel_tol: Some(1e-6),
    });
    json_roundtrip(&RadialInput {
        a: asym(),
        alpha: vec![1.0, 0.0],
        options: RadialOptions::default(),
    });
    json_roundtrip(&SweepInput {
        a: asym(),
        grid: None,
        random: Some(RandomGrid {
            count: 3,
            lo: -1.0,
            hi: 1.0,
        }),
        options: RadialOptions::default(),
    });
    json_roundtrip(&EpsilonInput {
        a: asym(),
        alpha_head: vec![0.0],
        eps: OneOrMany::Many(vec![1e-3, 1e-6]),
        options: RadialOptions::default(),
    });
    json_roundtrip(&MfInput {
        a: m(&[&[1.0]]),
        rho: vec![4.0],
        k: 16,
        h: vec![WeightSpec::constant(1.0).with_cos(1, 0, 0.1)],
        theta: Some(0.5),
        tol: None,
        max_iter: Some(100),
    });
}

#[test]
fn check_matrix_document() {
    for rows in [asym(), m(&[&[2.0, 1.0], &[1.0, 2.0]]), m(&[&[1.0, 0.0], &[0.0, 1.0]])] {
        json_roundtrip(&check_matrix(&build_matrix(&rows, None).unwrap()));
    }
}

#[test]
fn classification_and_degree_documents() {
    let a = build_matrix(&m(&[&[0.0, 1.0], &[1.0, 0.0]]), None).unwrap();
    let r = 8.0 * std::f64::consts::PI;
    for rho in [vec![r, r], vec![1.0, 2.0], vec![40.0, 80.0]] {
        json_roundtrip(&classify_rho(&a, &rho, GAMMA_REL_TOL).unwrap().classification);
        let doc = DegreeInput {
            a: m(&[&[0.0, 1.0], &[1.0, 0.0]]),
            rho,
            surface: SurfaceInput::default(),
            rel_tol: None,
        };
        let surface = SurfaceInput {
            genus: Some(3),
            ..Default::default()
        };
        json_roundtrip(&degree_doc(&doc, surface).unwrap().0);
    }
}

#[test]
fn e_point_documents() {
    for rows in [m(&[&[0.0, 1.0], &[1.0, 0.0]]), m(&[&[1.0, 1.0], &[1.0, 0.5]])] {
        json_roundtrip(&e_point(&build_matrix(&rows, None).unwrap()).unwrap());
    }
}

#[test]
fn radial_document_and_profile_table() {
    let a = build_matrix(&asym(), None).unwrap();
    let sol = integrate_radial(&a, &[1.0, 0.0], &RadialOptions::default()).unwrap();
    let doc = radial_doc(&a, sol, true);
    json_roundtrip(&doc);

    let p = doc.profile.as_ref().unwrap();
    let bytes = csv_bytes(profile_header(2), p.to_csv_rows());
    let (header, rows) = csv_parse(&bytes);
    let back = Profile::from_csv(&header, &rows).unwrap();
    assert_eq!(&back, p);
    assert_eq!(csv_bytes(profile_header(2), back.to_csv_rows()), bytes);
}

#[test]
fn sweep_document_and_table() {
    let a = build_matrix(&m(&[&[0.0, 1.0], &[1.0, 0.0]]), None).unwrap();
    let grid = vec![vec![-1.0, 0.0], vec![0.0, 0.0], vec![0.2, 0.0], vec![50.0, 0.0]];
    let table = sweep_initial_values(&a, &grid, &RadialOptions::default(), Execution::Parallel);
    let records: Vec<SweepRecord> = table.rows.iter().map(|r| sweep_record(&a, r)).collect();
    assert_eq!(records[3].status, RowStatus::Error);
    json_roundtrip(&SweepOutput {
        rows: records.clone(),
        non_injective: vec![[0, 1]],
    });

    for shape in [SweepShape::for_grid(2, &grid), SweepShape { n: 2, alpha_cols: 2 }] {
        let bytes = csv_bytes(shape.header(), records.iter().map(|r| r.to_csv(shape)));
        let (header, rows) = csv_parse(&bytes);
        let shape_back = SweepShape::from_header(&header);
        assert_eq!(shape_back, shape);
        let back: Vec<SweepRecord> = rows
            .iter()
            .map(|r| SweepRecord::from_csv(r, shape_back).unwrap())
            .collect();
        assert_eq!(back, records);
        assert_eq!(
            csv_bytes(shape.header(), back.iter().map(|r| r.to_csv(shape))),
            bytes
        );
    }
}

#[test]
fn epsilon_document_and_table() {
    let a = build_matrix(&m(&[&[1.0, 1.0], &[1.0, 0.5]]), None).unwrap();
    let inv = build_matrix(&m(&[&[0.0, 1.0], &[1.0, 0.0]]), None).unwrap();
    let mut records = Vec::new();
    for (mat, eps) in [(&a, 1e-3), (&a, 1e-6), (&inv, 1e-3)] {
        let sol = epsilon_family(mat, &[0.0], eps, &RadialOptions::default()).unwrap();
        records.push(epsilon_record(eps, &sol));
    }
    json_roundtrip(&records);
    let bytes = csv_bytes(epsilon_header(2), records.iter().map(|r| r.to_csv()));
    let (header, rows) = csv_parse(&bytes);
    let n = EpsilonRecord::n_from_header(&header);
    let back: Vec<EpsilonRecord> = rows
        .iter()
        .map(|r| EpsilonRecord::from_csv(r, n).unwrap())
        .collect();
    assert_eq!(back, records);
    assert_eq!(csv_bytes(epsilon_header(2), back.iter().map(|r| r.to_csv())), bytes);
}

#[test]
fn mean_field_document_and_field_table() {
    let doc = MfInput {
        a: m(&[&[2.0, 1.0], &[1.0, 2.0]]),
        rho: vec![3.0, 5.0],
        k: 16,
        h: vec![
            WeightSpec::constant(1.0),
            WeightSpec::constant(1.0).with_cos(1, 1, 0.2),
        ],
        theta: None,
        tol: None,
        max_iter: None,
    };
    let (out, converged) = mf_solve(&doc).unwrap();
    assert!(converged);
    json_roundtrip(&out);

    let bytes = csv_bytes(field_header(2), out.field_rows());
    let (header, rows) = csv_parse(&bytes);
    let u = fields_from_csv(&header, &rows).unwrap();
    assert_eq!(u, out.u);
    let again = MfOutput { u, ..out.clone() };
    assert_eq!(csv_bytes(field_header(2), again.field_rows()), bytes);
}
