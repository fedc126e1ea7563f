use std::path::PathBuf;

use gapfair::dataset::{
    cohort_summary, encode_features, filter_cohort, filter_cohort_staged, load_records, split,
    stratified_partition, ChargeDegree, CohortPolicy, FeatureSchema, GroupAttribute, RecordTable,
    Sex,
};
use gapfair::synthetic;
use gapfair::Error;
use proptest::prelude::*;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn open_policy() -> CohortPolicy {
    CohortPolicy {
        allowed_races: vec![],
        age_min: 0,
        age_max: 200,
        group_attribute: GroupAttribute::Sex,
        apply_screening_window: false,
    }
}

#[test]
fn three_row_fixture_fields() {
    let table = load_records(fixture("three_rows.csv")).unwrap();
    assert_eq!(table.len(), 3);
    assert_eq!(table.dropped, 0);
    let r = &table.records[0];
    assert_eq!(r.id, "1");
    assert_eq!(
        (r.age, r.sex, r.race.as_str()),
        (34, Sex::Male, "African-American")
    );
    assert_eq!((r.priors_count, r.charge_degree), (2, ChargeDegree::Felony));
    assert_eq!(
        (r.days_b_screening_arrest, r.outcome, r.decile_score),
        (Some(-1), 1, Some(3))
    );
    let r = &table.records[1];
    assert_eq!(
        (r.sex, r.charge_degree, r.juv_other_count),
        (Sex::Female, ChargeDegree::Misdemeanor, 1)
    );
    assert_eq!(table.records[2].juv_fel_count, 1);

    let summary = cohort_summary(&table);
    assert_eq!(summary.by_sex.get("Male"), Some(&2));
    assert_eq!(summary.by_sex.get("Female"), Some(&1));
    assert_eq!(summary.total, 3);
}

#[test]
fn three_race_fixture_keeps_two_races() {
    let table = load_records(fixture("three_races.csv")).unwrap();
    assert_eq!(table.len(), 10);
    let (cohort, stages) = filter_cohort_staged(&table, &CohortPolicy::default()).unwrap();
    assert_eq!(cohort.len(), 7);
    assert!(cohort
        .records
        .iter()
        .all(|r| r.race == "African-American" || r.race == "Caucasian"));
    let counts: Vec<usize> = stages.iter().map(|s| s.remaining).collect();
    assert_eq!(counts, vec![10, 7, 7, 7]);
    let ids: Vec<&str> = cohort.records.iter().map(|r| r.id.as_str()).collect();
    assert_eq!(ids, ["1", "2", "3", "5", "6", "8", "9"]);
}

#[test]
fn missing_file_names_the_path() {
    let err = load_records(fixture("absent.csv")).unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
    assert!(err.to_string().contains("absent.csv"));
}

#[test]
fn header_only_is_empty_and_empty_file_is_an_error() {
    let dir = std::env::temp_dir().join(format!("gapfair-ds-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let header = dir.join("header.csv");
    std::fs::write(
        &header,
        "age,sex,race,priors_count,c_charge_degree,days_b_screening_arrest,two_year_recid,decile_score\n",
    )
    .unwrap();
    assert_eq!(load_records(&header).unwrap().len(), 0);
    let empty = dir.join("empty.csv");
    std::fs::write(&empty, "").unwrap();
    assert!(matches!(load_records(&empty), Err(Error::Format(_))));
    let partial = dir.join("partial.csv");
    std::fs::write(&partial, "age,sex\n30,Male\n").unwrap();
    match load_records(&partial) {
        Err(Error::Schema(cols)) => assert!(cols.contains(&"two_year_recid".to_string())),
        other => panic!("expected schema error, got {other:?}"),
    }
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn training_statistics_standardize_training_rows() {
    let table = filter_cohort(&synthetic::compas_like(600, 8), &CohortPolicy::default()).unwrap();
    let schema = FeatureSchema::default_for(&CohortPolicy::default());
    let enc = encode_features(&table, &schema, None).unwrap();
    let m = &enc.matrix;
    assert!(!m.column_names.iter().any(|c| c.starts_with("race")));
    for (j, stat) in enc.stats.numeric.iter().enumerate() {
        let col: Vec<f64> = (0..m.rows).map(|i| m.row(i)[j]).collect();
        let mean = col.iter().sum::<f64>() / m.rows as f64;
        let sd = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / m.rows as f64).sqrt();
        assert!(mean.abs() < 1e-9, "{}", stat.name);
        if sd > 0.0 {
            assert!((sd - 1.0).abs() < 1e-9, "{}", stat.name);
        }
    }
}

fn small_table(n: usize, seed: u64) -> RecordTable {
    filter_cohort(&synthetic::compas_like(n, seed), &CohortPolicy::default()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn identity_policy_is_a_no_op(seed in 0u64..1000) {
        let table = synthetic::compas_like(50, seed);
        prop_assert_eq!(filter_cohort(&table, &open_policy()).unwrap(), table);
    }

    #[test]
    fn split_partitions_rows(seed in 0u64..1000, fraction in 0.1f64..0.5) {
        let table = small_table(400, 3);
        let schema = FeatureSchema::default_for(&CohortPolicy::default());
        let m = encode_features(&table, &schema, None).unwrap().matrix;
        let (a_train, a_test) = stratified_partition(&m.group_ids, &m.labels, fraction, seed).unwrap();
        let (b_train, b_test) = stratified_partition(&m.group_ids, &m.labels, fraction, seed).unwrap();
        prop_assert_eq!(&a_train, &b_train);
        prop_assert_eq!(&a_test, &b_test);
        let mut all: Vec<usize> = a_train.iter().chain(&a_test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..m.rows).collect::<Vec<_>>());
        let (train, test) = split(&m, fraction, seed).unwrap();
        prop_assert_eq!(train.rows + test.rows, m.rows);
    }
}
