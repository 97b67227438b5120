use nnmod::channel::reference_modulate;
use nnmod::iq::{merge_re_im, split_re_im};
use nnmod::schemes::{build_linear_modulator, Constellation, PulseShape};
use nnmod::{ComplexSample as C, IqBuffer, Scheme, SymbolFrame, SynthGraph};
use proptest::prelude::*;

fn complex(range: f64) -> impl Strategy<Value = C> {
    (-range..range, -range..range).prop_map(|(a, b)| C::new(a, b))
}

fn kernels(n: usize, k: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<Vec<f64>>)> {
    let one = prop::collection::vec(prop::collection::vec(-1.0..1.0f64, k), n);
    (one.clone(), one)
}

fn graph_and_frame() -> impl Strategy<Value = (SynthGraph, SymbolFrame, SymbolFrame)> {
    (1usize..4, 1usize..6, 1usize..12, 1usize..20).prop_flat_map(|(n, l, k, t)| {
        (
            kernels(n, k),
            prop::collection::vec(complex(2.0), n * t),
            prop::collection::vec(complex(2.0), n * t),
        )
            .prop_map(move |((re, im), a, b)| {
                (
                    SynthGraph::template(l, &re, &im).unwrap(),
                    SymbolFrame::from_flat(n, a).unwrap(),
                    SymbolFrame::from_flat(n, b).unwrap(),
                )
            })
    })
}

/// Direct evaluation of `y[tL + k] = Σ_j s_tj φ_j[k]`.
fn direct(graph: &SynthGraph, frame: &SymbolFrame) -> Vec<C> {
    let basis = graph.basis().unwrap();
    let (l, k) = (graph.samples_per_symbol(), graph.kernel_len());
    let mut y = vec![C::new(0.0, 0.0); (frame.num_vectors() - 1) * l + k];
    for (t, s) in frame.vectors().enumerate() {
        for (j, phi) in basis.iter().enumerate() {
            for (kk, p) in phi.iter().enumerate() {
                y[t * l + kk] += s[j] * p;
            }
        }
    }
    y
}

proptest! {
    #[test]
    fn output_length_follows_stride_rule((g, a, _) in graph_and_frame()) {
        let y = g.modulate(&a).unwrap();
        prop_assert_eq!(y.len(), (a.num_vectors() - 1) * g.samples_per_symbol() + g.kernel_len());
    }

    #[test]
    fn engine_is_linear((g, a, b) in graph_and_frame(), alpha in -2.0..2.0f64, beta in -2.0..2.0f64) {
        let mix = a.linear_combination(alpha, &b, beta).unwrap();
        let (ya, yb, ym) = (g.modulate(&a).unwrap(), g.modulate(&b).unwrap(), g.modulate(&mix).unwrap());
        for i in 0..ym.len() {
            let expect = ya.samples()[i] * alpha + yb.samples()[i] * beta;
            prop_assert!((ym.samples()[i] - expect).norm() < 1e-9);
        }
    }

    #[test]
    fn engine_matches_direct_sum((g, a, _) in graph_and_frame()) {
        let y = g.modulate(&a).unwrap();
        for (p, q) in y.samples().iter().zip(direct(&g, &a)) {
            prop_assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn split_merge_is_exact(values in prop::collection::vec(complex(1e6), 1..64)) {
        let frame = SymbolFrame::scalar(values.clone()).unwrap();
        let back = merge_re_im(&split_re_im(&frame)).unwrap();
        prop_assert_eq!(back.samples(), &values[..]);
    }

    #[test]
    fn simplified_graph_agrees_on_real_pulses(
        l in 1usize..8,
        taps in prop::collection::vec(-1.0..1.0f64, 1..24),
        symbols in prop::collection::vec(complex(1.0), 1..40),
    ) {
        let re = vec![taps.clone()];
        let im = vec![vec![0.0; taps.len()]];
        let g = SynthGraph::template(l, &re, &im).unwrap();
        let s = g.simplify();
        prop_assert!(s.is_simplified());
        let frame = SymbolFrame::scalar(symbols).unwrap();
        let (a, b) = (g.modulate(&frame).unwrap(), s.modulate(&frame).unwrap());
        for (p, q) in a.samples().iter().zip(b.samples()) {
            prop_assert!((p - q).norm() < 1e-12);
        }
    }

    #[test]
    fn demap_inverts_map(order_bits in prop::sample::select(vec![2usize, 4, 6]), words in prop::collection::vec(0u8..64, 1..50)) {
        let c = Constellation::qam(1 << order_bits).unwrap();
        let bits: Vec<u8> = words.iter().flat_map(|w| (0..order_bits).map(move |i| (w >> i) & 1)).collect();
        let symbols = c.map_bits_to_symbols(&bits).unwrap();
        prop_assert_eq!(c.demap_to_bits(&symbols), bits);
    }
}

#[test]
fn registry_schemes_match_direct_form() {
    for id in ["pam2-rect", "qpsk-halfsine", "qpsk-rrc", "qam16-rrc", "qam64-rrc", "ofdm16", "ofdm64"] {
        let s = Scheme::from_id(id).unwrap();
        let bits: Vec<u8> = (0..s.bits_per_vector() * 37).map(|i| ((i * 7 + i / 3) % 2) as u8).collect();
        let frame = s.map_bits(&bits).unwrap();
        let (y, r) = (s.graph().modulate(&frame).unwrap(), reference_modulate(&s, &frame).unwrap());
        let err = y.samples().iter().zip(r.samples()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err < 1e-9, "{id}: {err:e}");
        assert_eq!(s.demap(&frame), bits);
    }
}

#[test]
fn unit_energy_pulses() {
    for p in [
        PulseShape::rectangular(8).unwrap(),
        PulseShape::half_sine(8).unwrap(),
        PulseShape::root_raised_cosine(0.35, 8, 8).unwrap(),
    ] {
        assert!((p.energy() - 1.0).abs() < 1e-12);
        let g = build_linear_modulator(&p);
        // A single unit symbol reproduces the taps.
        let y = g.modulate(&SymbolFrame::scalar(vec![C::new(1.0, 0.0)]).unwrap()).unwrap();
        let taps: Vec<f64> = y.samples().iter().map(|z| z.re).collect();
        assert_eq!(taps, p.taps());
    }
}

#[test]
fn rrc_kernel_shape() {
    let p = PulseShape::root_raised_cosine(0.35, 8, 8).unwrap();
    assert_eq!(p.len(), 65);
    let t = p.taps();
    for n in 0..65 {
        assert!((t[n] - t[64 - n]).abs() < 1e-12);
    }
    // centre tap of the unnormalised pulse is 1 − β + 4β/π
    let beta = 0.35;
    let raw_centre = 1.0 - beta + 4.0 * beta / std::f64::consts::PI;
    let ratio = t[32] / t[31];
    let raw_neighbour = {
        let x: f64 = 1.0 / 8.0;
        let pi = std::f64::consts::PI;
        ((pi * x * (1.0 - beta)).sin() + 4.0 * beta * x * (pi * x * (1.0 + beta)).cos()) / (pi * x * (1.0 - (4.0 * beta * x).powi(2)))
    };
    assert!((ratio - raw_centre / raw_neighbour).abs() < 1e-12);
}

#[test]
fn empty_frame_is_empty_output() {
    let g = Scheme::from_id("qpsk-halfsine").unwrap().graph();
    let y = g.modulate(&SymbolFrame::scalar(vec![]).unwrap());
    match y {
        Ok(buf) => assert_eq!(buf, IqBuffer::empty()),
        Err(e) => panic!("{e}"),
    }
}
