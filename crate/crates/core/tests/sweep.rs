use szilard_battery::channels::SweepParams;

#[test]
#[ignore = "0.99-crossing time grows with n in the Landau-Zener model"]
fn sweep_crossing_time_is_uniform() {
    let params = SweepParams::default();
    let times: Vec<f64> = (0..=10).map(|n| params.crossing_time(n, 0.99).unwrap()).collect();
    let lo = times.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = times.iter().cloned().fold(0.0, f64::max);
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    assert!((hi - lo) / mean < 0.05, "crossing times {times:?}");
}

#[test]
fn every_level_crosses_before_the_pulse_ends() {
    let params = SweepParams::default();
    for n in 0..=10 {
        let t = params.crossing_time(n, 0.99).unwrap();
        assert!(t < params.pulse_duration_us, "n={n}: {t}");
    }
}
