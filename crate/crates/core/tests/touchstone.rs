mod common;

use common::{c, malformed_corpus, max_rel_err, rand_network, rng};
use proptest::prelude::*;
use twpacal::network::{NetworkData, TwoPortS};
use twpacal::touchstone::{
    export_csv, parse_touchstone, parse_touchstone_with_header, write_touchstone, write_touchstone_with, FreqUnit,
    Quantity, ValueFormat, WriteOptions,
};

const FORMATS: [ValueFormat; 3] = [ValueFormat::RI, ValueFormat::MA, ValueFormat::DB];

fn freq_rel_err(a: &NetworkData, b: &NetworkData) -> f64 {
    a.frequencies().iter().zip(b.frequencies()).map(|(x, y)| ((x - y) / y).abs()).fold(0.0, f64::max)
}

proptest! {
    #[test]
    fn write_then_parse_is_identity(seed in any::<u64>(), n in 1usize..40, fmt in 0usize..3) {
        let net = rand_network(&mut rng(seed), n);
        let back = parse_touchstone(&write_touchstone(&net, FORMATS[fmt])).unwrap();
        prop_assert_eq!(back.len(), n);
        prop_assert!(freq_rel_err(&back, &net) <= 1e-12);
        prop_assert!(max_rel_err(&back, &net) <= 1e-12);
        prop_assert_eq!(back.z_ref(), net.z_ref());
    }

    #[test]
    fn db_and_ma_agree(seed in any::<u64>(), n in 1usize..20) {
        let net = rand_network(&mut rng(seed), n);
        let ma = parse_touchstone(&write_touchstone(&net, ValueFormat::MA)).unwrap();
        let db = parse_touchstone(&write_touchstone(&net, ValueFormat::DB)).unwrap();
        prop_assert!(max_rel_err(&ma, &db) <= 1e-12);
    }

    #[test]
    fn other_frequency_units_roundtrip(seed in any::<u64>(), unit in 0usize..4) {
        let unit = [FreqUnit::Hz, FreqUnit::KHz, FreqUnit::MHz, FreqUnit::GHz][unit];
        let net = rand_network(&mut rng(seed), 7);
        let text = write_touchstone_with(&net, &WriteOptions { freq_unit: unit, ..WriteOptions::default() });
        let (back, header) = parse_touchstone_with_header(&text).unwrap();
        prop_assert_eq!(header.freq_unit, unit);
        prop_assert!(freq_rel_err(&back, &net) <= 1e-12);
    }

    #[test]
    fn shuffled_rows_rejected(seed in any::<u64>(), n in 2usize..20) {
        let text = write_touchstone(&rand_network(&mut rng(seed), n), ValueFormat::RI);
        let mut lines: Vec<&str> = text.lines().collect();
        let last = lines.len() - 1;
        lines.swap(last, last - 1);
        prop_assert!(parse_touchstone(&lines.join("\n")).is_err());
    }
}

#[test]
fn malformed_corpus_yields_designated_errors() {
    let corpus = malformed_corpus();
    assert!(corpus.len() >= 10);
    for (name, text, check) in corpus {
        match parse_touchstone(text) {
            Ok(_) => panic!("{name}: accepted"),
            Err(e) => assert!(check(&e), "{name}: unexpected error {e:?}"),
        }
    }
}

#[test]
fn comments_case_and_token_order() {
    let text = "! header\n!\n#  r 75   ma s  mhz ! trailing\n100 0.5 90 1 0 1 0 0.5 -90 ! row\n\n200 0.5 90 1 0 1 0 0.5 -90\n";
    let net = parse_touchstone(text).unwrap();
    assert_eq!(net.frequencies(), &[1e8, 2e8]);
    assert_eq!(net.z_ref(), c(75.0, 0.0));
    assert!((net.s()[0].s11 - c(0.0, 0.5)).norm() < 1e-15);
}

#[test]
fn defaults_when_tokens_missing() {
    let net = parse_touchstone("#\n1 1 0 1 0 1 0 1 0\n").unwrap();
    assert_eq!(net.frequencies(), &[1e9]);
    assert_eq!(net.z_ref(), c(50.0, 0.0));
}

#[test]
fn minus_inf_db_decodes_to_zero() {
    let net = parse_touchstone("# GHz S DB R 50\n1 -inf 0 0 0 0 0 -inf 0\n").unwrap();
    assert_eq!(net.s()[0].s11, c(0.0, 0.0));
    assert_eq!(net.s()[0].s21.norm(), 1.0);
}

#[test]
fn csv_sentinel_and_columns() {
    let net = NetworkData::new(vec![4e9], vec![TwoPortS::new(c(0.0, 0.0), c(0.668, 0.0), c(0.0, 1.0), c(0.0, 0.0))], c(50.0, 0.0))
        .unwrap();
    let q: Vec<Quantity> = ["s11:db", "s21:db", "s12:deg"].iter().map(|s| s.parse().unwrap()).collect();
    let csv = export_csv(&net, &q);
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "freq_hz,s11_db,s21_db,s12_deg");
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[1], "-inf");
    assert!((row[2].parse::<f64>().unwrap() - 20.0 * 0.668f64.log10()).abs() < 1e-12);
    assert!((row[2].parse::<f64>().unwrap() + 3.50).abs() < 0.005);
    assert_eq!(row[3].parse::<f64>().unwrap(), 90.0);
}
