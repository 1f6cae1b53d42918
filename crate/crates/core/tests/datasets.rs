use std::io::Write;

use duelsim::datasets::{arithmetic_matrix, builtin, load_matrix_csv, write_matrix_csv, DatasetError, BUILTIN};
use duelsim::env::MatrixError;

#[test]
fn arithmetic_round_trips_bit_exactly() {
    for k in 2..=21 {
        let m = arithmetic_matrix::<f64>(k).unwrap();
        let mut file = tempfile::NamedTempFile::new().unwrap();
        write_matrix_csv(&m, &mut file).unwrap();
        file.flush().unwrap();
        let back = load_matrix_csv::<f64>(file.path()).unwrap();
        assert_eq!(back, m, "k = {k}");
    }
}

#[test]
fn shipped_arithmetic_file_matches() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/arithmetic10.csv");
    assert_eq!(load_matrix_csv::<f64>(path).unwrap(), arithmetic_matrix(10).unwrap());
}

#[test]
fn builtins_have_registry_sizes_and_winners() {
    let expected = [("six-rankers", 6), ("mslr", 5), ("tennis", 8), ("arithmetic", 10), ("car", 10), ("sushi", 16)];
    for (name, k) in expected {
        let info = BUILTIN.iter().find(|d| d.name == name).unwrap();
        assert_eq!(info.k, k);
        let m = builtin::<f64>(name).unwrap();
        assert_eq!(m.k(), k);
        let w = m.winner();
        assert!((0..k).all(|j| j == w || m.get(w, j) > 0.5));
    }
}

#[test]
fn loader_errors() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "0.5,0.6\n0.6,0.5").unwrap();
    let err = load_matrix_csv::<f64>(file.path()).unwrap_err();
    assert!(matches!(err, DatasetError::Matrix(MatrixError::ComplementViolation { .. })));
    assert!(matches!(load_matrix_csv::<f64>("/nonexistent/m.csv"), Err(DatasetError::Io { .. })));
}
