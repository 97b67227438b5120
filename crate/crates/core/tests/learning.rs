use nnmod::learning::{fit_gradient, fit_least_squares, GradientConfig, TrainingSet};
use nnmod::model_io::{read_training_set, write_training_set};
use nnmod::schemes::Constellation;
use nnmod::{Scheme, SynthGraph};
use proptest::prelude::*;

fn distance(a: &SynthGraph, b: &SynthGraph) -> f64 {
    let (a, b) = (a.basis().unwrap(), b.basis().unwrap());
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

#[test]
fn rrc_kernel_is_recovered_with_zero_imaginary_part() {
    let s = Scheme::from_id("qam16-rrc").unwrap();
    let data = TrainingSet::generate(&s.graph(), s.constellation(), 64, 64, 1).unwrap();
    let fit = fit_least_squares(&data).unwrap();
    assert!(distance(&fit, &s.graph()) < 1e-6);
    let im: f64 = fit.basis().unwrap()[0].iter().map(|z| z.im * z.im).sum::<f64>().sqrt();
    assert!(im < 1e-6);
}

#[test]
fn ofdm_training_generalizes() {
    let s = Scheme::from_id("ofdm16").unwrap();
    let all = TrainingSet::generate(&s.graph(), s.constellation(), 40, 32, 2).unwrap();
    let (train, held) = all.split_tail(8).unwrap();
    let fit = fit_least_squares(&train).unwrap();
    assert!(held.mse(&fit).unwrap() < 1e-20);
}

#[test]
fn gradient_descent_approaches_least_squares() {
    let s = Scheme::from_id("qpsk-halfsine").unwrap();
    let data = TrainingSet::generate(&s.graph(), s.constellation(), 16, 64, 3).unwrap();
    let ls = fit_least_squares(&data).unwrap();
    let config = GradientConfig {
        learning_rate: 0.05,
        epochs: 300,
        batch_size: 0,
        seed: 4,
    };
    let (gd, report) = fit_gradient(&data, &config).unwrap();
    assert!(distance(&gd, &ls) < 1e-4);
    assert_eq!(report.mse_history.len(), 301);
    assert_eq!(report.epochs_run, 300);
    assert!(report.mse_history.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-12)));
}

#[test]
fn dataset_directory_round_trip_preserves_fit() {
    let s = Scheme::from_id("qpsk-halfsine").unwrap();
    let data = TrainingSet::generate(&s.graph(), s.constellation(), 6, 20, 5).unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_training_set(dir.path(), &data).unwrap();
    let back = read_training_set(dir.path()).unwrap();
    assert_eq!(fit_least_squares(&back).unwrap(), fit_least_squares(&data).unwrap());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn least_squares_reproduces_any_generator(
        (l, re, im) in (1usize..5, 1usize..10).prop_flat_map(|(l, k)| (
            Just(l),
            prop::collection::vec(-1.0..1.0f64, k),
            prop::collection::vec(-1.0..1.0f64, k),
        )),
        seed in 0u64..1000,
    ) {
        let g = SynthGraph::template(l, &[re], &[im]).unwrap();
        let data = TrainingSet::generate(&g, &Constellation::qam(16).unwrap(), 4, 24, seed).unwrap();
        let fit = fit_least_squares(&data).unwrap();
        prop_assert!(distance(&fit, &g) < 1e-9);
    }
}
