use nnmod::channel::{awgn, ber_sweep, compare_paths, demodulate, evm_rms, q_function, theoretical_ber};
use nnmod::rng::{random_bits, seeded};
use nnmod::Scheme;

#[test]
fn pam2_and_ofdm_track_theory() {
    for id in ["pam2-rect", "ofdm64"] {
        let s = Scheme::from_id(id).unwrap();
        for p in ber_sweep(&s, &[2.0, 6.0], 400_000, 1).unwrap() {
            let z = (p.ber - p.theory).abs() / p.theory_sigma();
            assert!(z < 3.5, "{id} @ {}: {} vs {} ({z:.2} sigma)", p.ebn0_db, p.ber, p.theory);
        }
    }
}

#[test]
fn qpsk_theory_is_antipodal_bound() {
    let c = Scheme::from_id("qpsk-halfsine").unwrap();
    for db in [0.0, 5.0, 9.6] {
        let expect = q_function((2.0 * 10f64.powf(db / 10.0)).sqrt());
        assert!((theoretical_ber(c.constellation(), db) - expect).abs() < 1e-15);
    }
}

#[test]
fn sweep_is_identical_across_thread_pools() {
    let s = Scheme::from_id("qam16-rrc").unwrap();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| compare_paths(&s, &s.graph(), &[3.0, 7.0], 200_000, 9).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(1));
    for c in &one {
        assert!(c.differing_decisions == 0);
        assert_eq!(c.graph.bits_tested, c.reference.bits_tested);
    }
}

#[test]
fn evm_falls_with_snr() {
    let s = Scheme::from_id("qpsk-halfsine").unwrap();
    let frame = s.map_bits(&random_bits(&mut seeded(4), 10_000)).unwrap();
    let y = s.graph().modulate(&frame).unwrap();
    let p = y.mean_power();
    let evm = |snr: f64| evm_rms(&demodulate(&s, &awgn(&y, p / 10f64.powf(snr / 10.0), 5).unwrap()).unwrap(), &frame).unwrap();
    assert!(evm_rms(&demodulate(&s, &y).unwrap(), &frame).unwrap() < 1e-12);
    let (a, b, c) = (evm(0.0), evm(10.0), evm(20.0));
    assert!(a > b && b > c);
    // unit-energy pulse: the matched-filter noise variance equals the
    // per-sample variance p / 10, against unit symbol energy
    let expected = 100.0 * (p / 10.0).sqrt();
    assert!((b - expected).abs() / expected < 0.05, "{b} vs {expected}");
}
