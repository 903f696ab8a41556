use std::io::Write;
use std::path::PathBuf;

use meterlink::{load_series, LoadError, LoadOptions, TimeColumn};

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn temp_csv(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::Builder::new().suffix(".csv").tempfile().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

#[test]
fn bundled_fixture_is_a_day_of_quarter_hours() {
    let s = load_series(&fixture("bursty_household.csv"), &LoadOptions::default()).unwrap();
    assert_eq!(s.len(), 96);
    assert_eq!(s.tau(), 0.25);
    assert_eq!(s.label(), "bursty_household");
    assert_eq!(s.samples()[0], 140.0);
    let peak = s.samples().iter().copied().fold(0.0, f64::max);
    assert!(peak > 10.0 * s.samples()[0]);
}

#[test]
fn toy_fixture_is_index_based() {
    let s = load_series(&fixture("toy12.csv"), &LoadOptions::default()).unwrap();
    assert_eq!(s.len(), 12);
    assert_eq!(s.samples()[3], 2400.0);
    assert_eq!(s.tau(), 0.25);
    let opts = LoadOptions {
        tau_hours: Some(1.0),
        label: Some("toy".into()),
        ..Default::default()
    };
    let s = load_series(&fixture("toy12.csv"), &opts).unwrap();
    assert_eq!((s.tau(), s.label()), (1.0, "toy"));
}

#[test]
fn two_row_file_is_the_smallest_series() {
    let f = temp_csv("timestamp,watts\n2011-04-18T00:00:00Z,5\n2011-04-18T00:15:00Z,7\n");
    let s = load_series(f.path(), &LoadOptions::default()).unwrap();
    assert_eq!(s.samples(), &[5.0, 7.0]);
    let f = temp_csv("timestamp,watts\n2011-04-18T00:00:00Z,5\n");
    assert!(matches!(load_series(f.path(), &LoadOptions::default()), Err(LoadError::Validation { .. })));
}

#[test]
fn one_second_data_resamples_to_quarter_hours() {
    // one hour at 1 s resolution, with a deterministic sawtooth-plus-burst load
    let watts = |t: u64| 100.0 + (t % 37) as f64 * 2.5 + if t % 600 < 30 { 1500.0 } else { 0.0 };
    let start = 1_303_132_929u64;
    let mut text = String::from("unix_time,watts\n");
    for t in 0..3600 {
        text += &format!("{},{}\n", start + t, watts(t));
    }
    let f = temp_csv(&text);
    let opts = LoadOptions {
        time: TimeColumn::Unix,
        resample_hours: Some(0.25),
        ..Default::default()
    };
    let s = load_series(f.path(), &opts).unwrap();
    assert_eq!(s.len(), 4);
    assert_eq!(s.tau(), 0.25);
    for (bin, got) in s.samples().iter().enumerate() {
        let rows: Vec<f64> = (bin as u64 * 900..(bin as u64 + 1) * 900).map(watts).collect();
        assert_eq!(rows.len(), 900);
        let mean = rows.iter().sum::<f64>() / 900.0;
        assert!((got - mean).abs() < 1e-9, "bin {bin}: {got} vs {mean}");
    }
}

#[test]
fn iso_seconds_resample_the_same_way() {
    let mut text = String::from("timestamp,watts\n");
    for t in 0..1800u32 {
        text += &format!("2011-04-18T00:{:02}:{:02}Z,{}\n", t / 60, t % 60, t % 2);
    }
    let f = temp_csv(&text);
    let opts = LoadOptions {
        resample_hours: Some(0.25),
        ..Default::default()
    };
    assert_eq!(load_series(f.path(), &opts).unwrap().samples(), &[0.5, 0.5]);
}

#[test]
fn errors_name_file_and_line() {
    let f = temp_csv("timestamp,watts\n2011-04-18T00:00:00Z,5\n2011-04-18T00:15:00Z,-1\n");
    let err = load_series(f.path(), &LoadOptions::default()).unwrap_err();
    assert!(matches!(err, LoadError::Validation { line: 3, .. }));
    let msg = err.to_string();
    assert!(msg.starts_with(&format!("{}:3:", f.path().display())), "{msg}");
    assert!(msg.contains("negative"));

    let f = temp_csv("timestamp,watts\n2011-04-18T00:00:00Z,5\nnot-a-time,6\n");
    let err = load_series(f.path(), &LoadOptions::default()).unwrap_err();
    assert!(matches!(err, LoadError::Parse { line: 3, .. }));

    let f = temp_csv("timestamp,watts\n2011-04-18T00:15:00Z,5\n2011-04-18T00:00:00Z,6\n");
    assert!(matches!(
        load_series(f.path(), &LoadOptions::default()),
        Err(LoadError::Validation { line: 3, .. })
    ));

    let f = temp_csv("timestamp,watts\n2011-04-18T00:00:00Z,5\n2011-04-18T00:15:00Z,6\n2011-04-18T00:45:00Z,6\n");
    assert!(matches!(
        load_series(f.path(), &LoadOptions::default()),
        Err(LoadError::Gap { line: 4, .. })
    ));

    let opts = LoadOptions {
        time: TimeColumn::Unix,
        resample_hours: Some(0.25),
        ..Default::default()
    };
    let f = temp_csv("t,w\n0,1\n10,1\n2000,1\n");
    assert!(matches!(load_series(f.path(), &opts), Err(LoadError::Gap { line: 4, .. })));

    let missing = fixture("does_not_exist.csv");
    let err = load_series(&missing, &LoadOptions::default()).unwrap_err();
    assert!(matches!(err, LoadError::Io { .. }));
    assert!(err.to_string().contains("does_not_exist.csv"));
}
