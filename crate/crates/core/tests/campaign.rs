use accredo::bits::BitString;
use accredo::experiment::{parse_config, run_experiment, RUNS_CSV};
use accredo::pauli::PauliString;

const CONFIG: &str = r#"{
    "schema": "accredo/1",
    "target": {"ansatz": {"n": 3, "layers": 7}},
    "observable": "ZXZ",
    "runs": 300,
    "traps": 12,
    "acceptance": {"kind": "trap_cutoff", "cutoff": 9},
    "behaviours": [
        {"label": 1, "global_p_err": 0.05},
        {"label": 2, "local": {"p": 0.3, "dist": "depolarizing"}, "meas": {"p": 0.2, "dist": [{"pauli": "XII", "weight": 1.0}]}}
    ],
    "seed": 99
}"#;

#[test]
fn csv_rows_are_self_consistent() {
    let cfg = parse_config(CONFIG).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let (_, report) = run_experiment(&cfg, dir.path()).unwrap();
    let mut reader = csv::Reader::from_path(dir.path().join(RUNS_CSV)).unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 300);
    let mut accepted = 0;
    let mut lambda_sum = 0i64;
    for (j, row) in rows.iter().enumerate() {
        assert_eq!(row[0].parse::<usize>().unwrap(), j);
        let nu: usize = row[2].parse().unwrap();
        let n_inc: usize = row[3].parse().unwrap();
        assert!(nu <= 12 && n_inc <= 12);
        let ok: bool = row[5].parse().unwrap();
        assert_eq!(ok, 12 - n_inc > 9);
        let bits: BitString = row[6].parse().unwrap();
        let lambda: i64 = row[7].parse().unwrap();
        assert_eq!(lambda, cfg.observable.eigenvalue(&bits).unwrap() as i64);
        let frame: PauliString = row[8].parse().unwrap();
        assert_eq!(frame.z_mask(), 0, "readout pad is X-type");
        if ok {
            accepted += 1;
            lambda_sum += lambda;
        }
    }
    assert_eq!(accepted, report.accepted);
    assert_eq!(lambda_sum, report.accepted_lambda_sum);
    assert!(accepted > 0 && accepted < 300);
}
