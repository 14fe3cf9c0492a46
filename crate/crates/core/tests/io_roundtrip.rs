mod common;

use pmfgw::io::{format_float, parse_record, read_dataset, record_to_line, write_dataset, Graph, Record};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn floats_survive_text(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let back: f64 = format_float(x).parse().unwrap();
        prop_assert_eq!(back.to_bits(), x.to_bits());
    }

    #[test]
    fn records_survive_a_line(seed in any::<u64>(), m in 0usize..7, size in 1usize..7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let discrete = Record::new(common::random_graph(m, 2, 0.5, &mut rng)).with_input(serde_json::json!({"k": [1, 2]}));
        let continuous = Record::new(common::random_prediction(size, 3, 0.0, 1.0, &mut rng));
        for r in [discrete, continuous] {
            let line = record_to_line(&r).unwrap();
            prop_assert!(!line.contains('\n'));
            prop_assert_eq!(parse_record(&line, 1).unwrap(), r);
        }
    }
}

#[test]
fn dataset_file_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let records: Vec<Record> = (0..5).map(|k| Record::new(common::random_graph(k, 1, 0.5, &mut rng))).collect();
    let dir = tempfile_dir();
    let path = dir.join("graphs.jsonl");
    write_dataset(&path, &records).unwrap();
    assert_eq!(read_dataset(&path).unwrap(), records);
    std::fs::remove_dir_all(dir).ok();
}

#[test]
fn malformed_lines_name_their_position() {
    let err = parse_record("{\"kind\":\"discrete\"", 7).unwrap_err();
    assert!(err.to_string().contains('7'), "{err}");
    assert!(parse_record("{\"kind\":\"bogus\"}", 1).is_err());
    assert!(matches!(Graph::from(common::random_graph(0, 1, 0.5, &mut ChaCha8Rng::seed_from_u64(0))), Graph::Discrete(_)));
}

fn tempfile_dir() -> std::path::PathBuf {
    let dir = std::env::temp_dir().join(format!("pmfgw-io-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}
