use nnmod::channel::{awgn, qam_symbol_error_rate};
use nnmod::protocols::wifi::{build_wifi_frame, demod_wifi_frame, WifiFrameConfig, NUM_SUBCARRIERS};
use nnmod::protocols::zigbee::{build_oqpsk_zigbee, crc16, ppdu, ZigbeeModulator};
use nnmod::protocols::{remove_cyclic_prefix, PostOp};
use nnmod::rng::{random_bits, seeded};
use nnmod::{ComplexSample as C, Error, IqBuffer};
use proptest::prelude::*;

#[test]
fn wifi_symbol_error_rate_at_10_db() {
    let config = WifiFrameConfig::default();
    let c = &config.data_constellation;
    let bps = c.bits_per_symbol();
    let ebn0 = 10.0f64;
    let var = NUM_SUBCARRIERS as f64 / (bps as f64 * 10f64.powf(ebn0 / 10.0));
    let (mut errors, mut total) = (0usize, 0usize);
    for frame in 0..60u64 {
        let bits = random_bits(&mut seeded(frame), 20 * 48 * bps);
        let data = c.map_bits_to_symbols(&bits).unwrap();
        let tx = build_wifi_frame(&config, &[0; 48], &data).unwrap();
        let rx = awgn(&tx, var, 1000 + frame).unwrap();
        let (_, got) = demod_wifi_frame(&rx, &config).unwrap();
        assert_eq!(got.len(), data.len());
        errors += got.iter().zip(&data).filter(|(g, d)| c.decide(**g) != c.decide(**d)).count();
        total += data.len();
    }
    let ser = errors as f64 / total as f64;
    let theory = qam_symbol_error_rate(16, bps as f64 * 10f64.powf(ebn0 / 10.0));
    let sigma = (theory * (1.0 - theory) / total as f64).sqrt();
    assert!((ser - theory).abs() < 3.0 * sigma, "SER {ser:e} vs {theory:e} ± {sigma:e}");
}

#[test]
fn wifi_rejects_silence() {
    let config = WifiFrameConfig::default();
    let silence = IqBuffer::from_samples(vec![C::new(0.0, 0.0); 2000]).unwrap();
    assert!(matches!(demod_wifi_frame(&silence, &config), Err(Error::NoFrame { .. })));
}

#[test]
fn zigbee_frame_round_trip() {
    let m = build_oqpsk_zigbee();
    let payload = b"hello, 802.15.4";
    let frame = ppdu(payload).unwrap();
    let y = m.modulate_bytes(&frame).unwrap();
    assert_eq!(m.demodulate_bytes(&y).unwrap(), frame);
    let psdu = &frame[6..];
    assert_eq!(crc16(psdu), 0, "appending the FCS zeroes the running CRC");
}

#[test]
fn zigbee_survives_moderate_noise() {
    let m = ZigbeeModulator::new(4).unwrap();
    let bytes: Vec<u8> = (0..64).collect();
    let y = m.modulate_bytes(&bytes).unwrap();
    let rx = awgn(&y, 0.5, 3).unwrap();
    assert_eq!(m.demodulate_bytes(&rx).unwrap(), bytes);
}

#[test]
fn oversized_psdu_is_rejected() {
    assert!(ppdu(&[0u8; 126]).is_err());
    assert!(ppdu(&[0u8; 125]).is_ok());
}

proptest! {
    #[test]
    fn cyclic_prefix_removal_inverts_insertion(
        (block, cp, blocks) in (1usize..32).prop_flat_map(|b| (Just(b), 1..=b, 1usize..6)),
        seed in 0u64..1000,
    ) {
        let bits = random_bits(&mut seeded(seed), 2 * block * blocks);
        let x: Vec<C> = bits.chunks(2).map(|p| C::new(p[0] as f64, p[1] as f64 - 0.5)).collect();
        let buf = IqBuffer::from_samples(x.clone()).unwrap();
        let y = PostOp::CyclicPrefix { cp_len: cp, block_len: block }.apply(&buf).unwrap();
        prop_assert_eq!(y.len(), blocks * (block + cp));
        prop_assert_eq!(remove_cyclic_prefix(y.samples(), cp, block).unwrap(), x);
    }

    #[test]
    fn quadrature_delay_preserves_rails(values in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64), 1..50), d in 1usize..8) {
        let x: Vec<C> = values.iter().map(|&(a, b)| C::new(a, b)).collect();
        let y = PostOp::QuadratureDelay { samples: d }.apply(&IqBuffer::from_samples(x.clone()).unwrap()).unwrap();
        prop_assert_eq!(y.len(), x.len() + d);
        for (n, z) in x.iter().enumerate() {
            prop_assert_eq!(y.samples()[n].re, z.re);
            prop_assert_eq!(y.samples()[n + d].im, z.im);
        }
    }

    #[test]
    fn zigbee_bytes_round_trip(bytes in prop::collection::vec(any::<u8>(), 1..20)) {
        let m = build_oqpsk_zigbee();
        prop_assert_eq!(m.demodulate_bytes(&m.modulate_bytes(&bytes).unwrap()).unwrap(), bytes);
    }
}
