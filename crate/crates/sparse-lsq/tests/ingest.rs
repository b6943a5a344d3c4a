use std::fs;

use proptest::prelude::*;

use sparse_lsq::core::DenseMatrix;
use sparse_lsq::io::{ingest, read_matrix, read_vector, write_matrix, write_vector};
use sparse_lsq::Error;

#[test]
fn matrix_market_identity_and_vector() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.mtx");
    let b = dir.path().join("b.txt");
    fs::write(&a, "%%MatrixMarket matrix array real general\n2 2\n1\n0\n0\n1\n").unwrap();
    fs::write(&b, "1\n2").unwrap();
    let (a, b) = ingest(&a, &b).unwrap();
    assert_eq!(a, DenseMatrix::identity(2));
    assert_eq!(b.as_slice(), &[1.0, 2.0]);
}

#[test]
fn csv_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    fs::write(&a, "1,2\n3,4").unwrap();
    assert_eq!(read_matrix(&a).unwrap(), DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap());
}

#[test]
fn coordinate_duplicates_are_summed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.mtx");
    fs::write(
        &a,
        "%%MatrixMarket matrix coordinate real general\n% duplicates add up\n3 2 4\n1 1 1\n3 2 2\n1 1 0.5\n3 2 -4\n",
    )
    .unwrap();
    let m = read_matrix(&a).unwrap();
    assert_eq!(m, DenseMatrix::from_rows(&[[1.5, 0.0], [0.0, 0.0], [0.0, -2.0]]).unwrap());
}

#[test]
fn dimension_mismatch_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.txt");
    fs::write(&a, "1,2\n3,4\n").unwrap();
    fs::write(&b, "1\n2\n3\n").unwrap();
    let err = ingest(&a, &b).unwrap_err();
    assert!(matches!(err, Error::Usage(_)));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn vector_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let b = dir.path().join("b.txt");
    fs::write(&b, "1\n\n2\nNaN\n").unwrap();
    assert!(matches!(read_vector(&b).unwrap_err(), Error::Parse { line: 4, .. }));
}

#[test]
fn writers_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.mtx");
    let b = dir.path().join("b.txt");
    let m = DenseMatrix::from_rows(&[[0.1, 0.2, 1e-300], [-3.5, 1.0 / 7.0, 2.0]]).unwrap();
    write_matrix(&a, &m).unwrap();
    write_vector(&b, &[0.1, -1.0 / 3.0]).unwrap();
    assert_eq!(read_matrix(&a).unwrap(), m);
    assert_eq!(read_vector(&b).unwrap().as_slice(), &[0.1, -1.0 / 3.0]);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn finite_matrices_survive_both_formats(
        (rows, cols, data) in (1usize..6, 1usize..6).prop_flat_map(|(r, c)| {
            (Just(r), Just(c), prop::collection::vec(-1e12f64..1e12, r * c))
        })
    ) {
        let m = DenseMatrix::new(rows, cols, data).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mtx = dir.path().join("m.mtx");
        write_matrix(&mtx, &m).unwrap();
        prop_assert_eq!(read_matrix(&mtx).unwrap(), m.clone());

        let csv = dir.path().join("m.csv");
        let text: Vec<String> = (0..rows)
            .map(|i| m.row(i).iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","))
            .collect();
        fs::write(&csv, text.join("\n")).unwrap();
        prop_assert_eq!(read_matrix(&csv).unwrap(), m);
    }
}
