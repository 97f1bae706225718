use std::fs;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use hybrid_tsac::combiners::{read_matrix, write_matrix};
use hybrid_tsac::config::parse_config;
use hybrid_tsac::linalg::complex_gaussian_matrix;
use hybrid_tsac::report::{emit_csv, CSV_HEADER};
use hybrid_tsac::run_sweep;

#[test]
fn csv_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = parse_config(
        "n_r = 16\nn_u = 2\nn_rf = 4\nbits = 3\nsnr_db = 0, 5\nmean_paths = 2\ntrials = 10\nseed = 9\ndesigns = ARV_TSAC, SVD",
    )
    .unwrap();
    let res = run_sweep(&cfg).unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    emit_csv(&res, &a).unwrap();
    emit_csv(&run_sweep(&cfg).unwrap(), &b).unwrap();
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], CSV_HEADER);
    assert_eq!(lines.len(), 1 + 4);
    assert!(lines[1].starts_with("ARV_TSAC,16,4,0,3,10,"));
    assert!(lines[4].starts_with("SVD,16,4,5,3,10,"));
}

#[test]
fn matrix_dump_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let m = complex_gaussian_matrix(5, 3, &mut rng);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.txt");
    let mut f = fs::File::create(&path).unwrap();
    write_matrix(&mut f, &m).unwrap();
    drop(f);
    let back = read_matrix(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(back, m);
}
