use fivephoton::harness::*;
use fivephoton::measurement::{sample_counts, CountModel, OutcomeTable, Snr};
use fivephoton::protocols::{critical_visibility, Sign};
use fivephoton::{DeviceConfig, PolKet};

fn short_scan() -> DelayScan {
    DelayScan {
        start_um: -600.0,
        stop_um: 600.0,
        points: 5,
    }
}

#[test]
fn ideal_fringes_have_unit_visibility() {
    let ideal = DeviceConfig::ideal();
    for r in [
        run_fig3(Fig3::A, short_scan(), &ideal).unwrap(),
        run_fig3(Fig3::B, short_scan(), &ideal).unwrap(),
        run_fig4b(short_scan(), &ideal).unwrap(),
    ] {
        let v = r.summary.visibility.unwrap();
        assert!((v - 1.0).abs() < 1e-12, "{}: {v}", r.experiment);
        assert_eq!(r.scan.len(), 5);
    }
}

#[test]
fn scan_envelope_peaks_at_zero_delay() {
    let r = run_fig3(Fig3::A, short_scan(), &DeviceConfig::ideal()).unwrap();
    let centre = r.scan.iter().find(|p| p.delay_um == 0.0).unwrap();
    for p in &r.scan {
        assert!(p.visibility <= centre.visibility + 1e-12);
    }
    let edge = &r.scan[0];
    assert!(edge.visibility < centre.visibility);
}

#[test]
fn ideal_hv_table_has_infinite_snr() {
    let r = run_fig4a(&DeviceConfig::ideal()).unwrap();
    assert_eq!(r.summary.snr, Some(Snr::Infinite));
    assert_eq!(r.tables[0].entries.len(), 32);
    assert!((r.summary.herald_prob.unwrap() - 0.25).abs() < 1e-12);
}

#[test]
fn fitted_hv_table_snr_near_forty() {
    let r = run_fig4a(&DeviceConfig::fitted()).unwrap();
    let s = r.summary.snr.unwrap().value();
    assert!((20.0..=80.0).contains(&s), "snr {s}");
}

#[test]
fn ideal_teleportation_table_is_perfect() {
    let r = run_table1(&DeviceConfig::ideal()).unwrap();
    assert_eq!(r.fidelities.len(), 8);
    for c in &r.fidelities {
        assert!(
            (c.fidelity - 1.0).abs() < 1e-12,
            "{} at {}",
            c.input,
            c.location
        );
        assert_eq!(c.count_orthogonal, 0);
        assert!(c.above_classical);
    }
}

#[test]
fn no_sources_no_coincidences() {
    let mut cfg = DeviceConfig::ideal();
    cfg.pair_prob = 0.0;
    cfg.mu = 0.0;
    let r = rate_model(&cfg).unwrap();
    assert_eq!((r.twofold, r.threefold, r.fivefold), (0.0, 0.0, 0.0));
}

#[test]
fn fitted_rates_match_reported_scale() {
    let r = rate_model(&DeviceConfig::fitted()).unwrap();
    assert!(
        (r.twofold / 2.4e4 - 1.0).abs() <= 0.3,
        "twofold {}",
        r.twofold
    );
    assert!(
        (r.threefold / 500.0 - 1.0).abs() <= 0.5,
        "threefold {}",
        r.threefold
    );
}

#[test]
fn five_fold_counts_per_ten_hours() {
    let cfg = DeviceConfig::fitted();
    let r = run_fig4b(short_scan(), &cfg).unwrap();
    let max = r.summary.max_count_per_integration.unwrap();
    let min = r.summary.min_count_per_integration.unwrap();
    assert!((100.0 / 3.0..=300.0).contains(&max), "max {max}");
    assert!((20.0 / 3.0..=60.0).contains(&min), "min {min}");
    // sampled counts scatter around the expectation
    let table = OutcomeTable {
        modes: vec![],
        bases: vec![],
        entries: vec![fivephoton::measurement::OutcomeEntry {
            outcome: "+".into(),
            probability: 1.0,
            count: None,
        }],
    };
    let mean = (0..200)
        .map(|seed| {
            sample_counts(
                &table,
                &CountModel {
                    expected_total: max,
                    rng_seed: seed,
                },
            )
            .unwrap()
            .entries[0]
                .count
                .unwrap() as f64
        })
        .sum::<f64>()
        / 200.0;
    assert!(
        (mean - max).abs() < 3.0 * (max / 200.0).sqrt() + 1e-9,
        "mean {mean}"
    );
}

#[test]
fn five_fold_visibility_violates_local_realism() {
    let r = run_fig4b(short_scan(), &DeviceConfig::fitted()).unwrap();
    let v = r.summary.visibility.unwrap();
    assert!((v - 0.59).abs() <= 0.07, "visibility {v}");
    assert_eq!(
        r.summary.critical_visibility,
        Some(critical_visibility(5).unwrap())
    );
    assert_eq!(r.summary.violation, Some(true));
}

#[test]
fn report_round_trips() {
    let r = run_fig3(Fig3::B, short_scan(), &DeviceConfig::fitted()).unwrap();
    assert_eq!(RunReport::from_json(&r.to_json().unwrap()).unwrap(), r);
    assert_eq!(scan_from_csv(&r.to_csv().unwrap()).unwrap(), r.scan);
    let t = run_table1(&DeviceConfig::ideal()).unwrap();
    assert_eq!(
        fidelities_from_csv(&t.to_csv().unwrap()).unwrap(),
        t.fidelities
    );
}

#[test]
fn rerun_is_bit_identical() {
    let cfg = DeviceConfig::fitted();
    let r = run_fig4a(&cfg).unwrap();
    let again = RunReport::from_json(&r.to_json().unwrap())
        .unwrap()
        .rerun(DelayScan::default())
        .unwrap();
    assert_eq!(again.to_json().unwrap(), r.to_json().unwrap());
    let rates = run_rates(&cfg).unwrap();
    assert_eq!(rates.rerun(DelayScan::default()).unwrap(), rates);
}

#[test]
fn different_seeds_change_counts() {
    let mut cfg = DeviceConfig::fitted();
    let a = run_ghz(3, fivephoton::measurement::AnalysisBasis::PM, &cfg).unwrap();
    cfg.seed += 1;
    let b = run_ghz(3, fivephoton::measurement::AnalysisBasis::PM, &cfg).unwrap();
    assert_ne!(a.tables[0], b.tables[0]);
    assert_eq!(a.summary.herald_prob, b.summary.herald_prob);
}

#[test]
fn single_teleport_report() {
    let r = run_teleport(
        &PolKet::right(),
        4,
        (Sign::Minus, Sign::Minus),
        &DeviceConfig::ideal(),
    )
    .unwrap();
    assert!((r.summary.fidelity.unwrap() - 1.0).abs() < 1e-12);
    assert_eq!(r.tables.len(), 3);
    assert!(run_teleport(
        &PolKet::right(),
        2,
        (Sign::Plus, Sign::Plus),
        &DeviceConfig::ideal()
    )
    .is_err());
}

#[test]
fn experiment_names() {
    for e in [
        "fig3a", "fig3b", "fig4a", "fig4b", "table1", "ghz", "teleport", "rates",
    ] {
        assert_eq!(e.parse::<Experiment>().unwrap().to_string(), e);
    }
    assert!("fig5".parse::<Experiment>().is_err());
}

#[test]
fn invalid_scan_rejected() {
    let bad = DelayScan {
        start_um: 0.0,
        stop_um: 1.0,
        points: 0,
    };
    assert!(run_fig3(Fig3::A, bad, &DeviceConfig::ideal()).is_err());
}
