//! Learning template kernels from (symbol, waveform) examples.

mod dataset;
mod gradient;
mod least_squares;

pub use dataset::{default_kernel_len, TrainingSet};
pub use gradient::{fit_gradient, loss_and_gradient, GradientConfig, TrainReport};
pub use least_squares::fit_least_squares;
#[cfg(test)]
use gradient::random_basis;
pub(crate) use least_squares::graph_from_basis;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::iq::{IqBuffer, SymbolFrame};
    use crate::rng::{seeded, uniform_range};
    use crate::schemes::{build_linear_modulator, Constellation, PulseShape};
    use crate::synth::SynthGraph;
    use num_complex::Complex64;

    fn random_graph(n: usize, l: usize, k: usize, seed: u64) -> SynthGraph {
        let mut rng = seeded(seed);
        let mut draw = || (0..n).map(|_| (0..k).map(|_| uniform_range(&mut rng, -1.0, 1.0)).collect()).collect::<Vec<Vec<f64>>>();
        let re = draw();
        let im = draw();
        SynthGraph::template(l, &re, &im).unwrap()
    }

    fn kernel_distance(a: &SynthGraph, b: &SynthGraph) -> f64 {
        let (a, b) = (a.basis().unwrap(), b.basis().unwrap());
        a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
    }

    #[test]
    fn recovers_random_complex_kernels() {
        // K not a multiple of L exercises the uneven phase systems.
        let g = random_graph(3, 4, 10, 1);
        let data = TrainingSet::generate(&g, &Constellation::qpsk(), 8, 40, 2).unwrap();
        let fit = fit_least_squares(&data).unwrap();
        assert!(kernel_distance(&fit, &g) < 1e-10);
    }

    #[test]
    fn recovers_short_kernel() {
        let g = random_graph(2, 8, 5, 3);
        let data = TrainingSet::generate(&g, &Constellation::qam(16).unwrap(), 4, 30, 4).unwrap();
        let fit = fit_least_squares(&data).unwrap();
        assert!(kernel_distance(&fit, &g) < 1e-10);
    }

    #[test]
    fn zero_symbols_are_degenerate() {
        let frame = SymbolFrame::scalar(vec![Complex64::new(0.0, 0.0); 50]).unwrap();
        let signal = IqBuffer::from_samples(vec![Complex64::new(0.0, 0.0); 49 * 4 + 8]).unwrap();
        let data = TrainingSet::new(vec![(frame, signal)], 1, 4, 8).unwrap();
        match fit_least_squares(&data) {
            Err(Error::DegenerateDataset { null_space_dim }) => assert_eq!(null_space_dim, 16),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn too_few_symbols_are_degenerate() {
        let g = random_graph(2, 4, 8, 5);
        let data = TrainingSet::generate(&g, &Constellation::qpsk(), 1, 2, 6).unwrap();
        assert!(matches!(fit_least_squares(&data), Err(Error::DegenerateDataset { .. })));
    }

    /// Real design matrix over (Re φ, Im φ): row per output real component.
    fn design_residual_check(data: &TrainingSet, fit: &SynthGraph) -> f64 {
        let (n, l, k) = (data.symbol_dimension(), data.samples_per_symbol(), data.kernel_len());
        let mut correlation = vec![0.0; 2 * n * k];
        let mut norm = 0.0f64;
        for (frame, target) in data.examples() {
            let y = fit.modulate_core(frame).unwrap();
            for m in 0..target.len() {
                let r = target.samples()[m] - y.samples()[m];
                norm = norm.max(r.norm());
                for (t, s) in frame.vectors().enumerate() {
                    if m < t * l || m - t * l >= k {
                        continue;
                    }
                    let kk = m - t * l;
                    for (j, sj) in s.iter().enumerate() {
                        // d out / d Re φ = s, d out / d Im φ = i s
                        let dre = *sj;
                        let dim = Complex64::new(0.0, 1.0) * sj;
                        correlation[j * k + kk] += dre.re * r.re + dre.im * r.im;
                        correlation[n * k + j * k + kk] += dim.re * r.re + dim.im * r.im;
                    }
                }
            }
        }
        let max = correlation.iter().fold(0.0f64, |a, &c| a.max(c.abs()));
        max / (norm * data.total_vectors() as f64).max(f64::MIN_POSITIVE)
    }

    #[test]
    fn residual_is_orthogonal_to_design_columns() {
        let g = random_graph(2, 4, 6, 7);
        let mut data = TrainingSet::generate(&g, &Constellation::qpsk(), 4, 30, 8).unwrap();
        // Perturb the targets so the fit is not exact.
        let mut rng = seeded(9);
        let noisy: Vec<_> = data
            .examples()
            .iter()
            .map(|(f, s)| {
                let y = s.samples().iter().map(|z| z + Complex64::new(uniform_range(&mut rng, -0.1, 0.1), uniform_range(&mut rng, -0.1, 0.1))).collect();
                (f.clone(), IqBuffer::from_samples(y).unwrap())
            })
            .collect();
        data = TrainingSet::new(noisy, 2, 4, 6).unwrap();
        let fit = fit_least_squares(&data).unwrap();
        assert!(design_residual_check(&data, &fit) < 1e-8);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let g = random_graph(2, 2, 3, 10);
        let truth = TrainingSet::generate(&g, &Constellation::qpsk(), 1, 8, 11).unwrap();
        let basis: Vec<Vec<Complex64>> = (0..2)
            .map(|j| (0..3).map(|k| Complex64::new(0.1 * (j + k) as f64, -0.2 * k as f64)).collect())
            .collect();
        let (_, grad) = loss_and_gradient(&truth, &basis).unwrap();
        let h = 1e-6;
        let mut worst = 0.0f64;
        for j in 0..2 {
            for k in 0..3 {
                for dir in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
                    let mut plus = basis.clone();
                    let mut minus = basis.clone();
                    plus[j][k] += dir * h;
                    minus[j][k] -= dir * h;
                    let fd = (loss_and_gradient(&truth, &plus).unwrap().0 - loss_and_gradient(&truth, &minus).unwrap().0) / (2.0 * h);
                    let analytic = if dir.re == 1.0 { grad[j][k].re } else { grad[j][k].im };
                    worst = worst.max((fd - analytic).abs() / analytic.abs().max(1e-3));
                }
            }
        }
        assert!(worst < 1e-5, "{worst}");
    }

    #[test]
    fn zero_learning_rate_is_a_no_op() {
        let pulse = PulseShape::half_sine(4).unwrap();
        let g = build_linear_modulator(&pulse);
        let data = TrainingSet::generate(&g, &Constellation::qpsk(), 4, 16, 1).unwrap();
        let config = GradientConfig {
            learning_rate: 0.0,
            epochs: 5,
            batch_size: 0,
            seed: 3,
        };
        let (fit, report) = fit_gradient(&data, &config).unwrap();
        let init = random_basis(1, 4, 3);
        assert_eq!(fit.basis().unwrap()[0], init);
        assert_eq!(report.mse_history.len(), 6);
        assert!(report.mse_history.iter().all(|&m| m == report.mse_history[0]));
        assert_eq!(report.final_mse, report.mse_history[0]);
    }

    #[test]
    fn gradient_descent_converges_on_small_problem() {
        let g = random_graph(1, 4, 8, 12);
        let data = TrainingSet::generate(&g, &Constellation::qpsk(), 8, 64, 13).unwrap();
        let config = GradientConfig {
            learning_rate: 0.2,
            epochs: 200,
            batch_size: 0,
            seed: 1,
        };
        let (fit, report) = fit_gradient(&data, &config).unwrap();
        assert!(report.final_mse < 1e-12, "{}", report.final_mse);
        assert!(kernel_distance(&fit, &g) < 1e-6);
    }

    #[test]
    fn mini_batch_is_deterministic_and_improves() {
        let g = random_graph(1, 4, 8, 14);
        let data = TrainingSet::generate(&g, &Constellation::qpsk(), 16, 32, 15).unwrap();
        let config = GradientConfig {
            learning_rate: 0.1,
            epochs: 20,
            batch_size: 4,
            seed: 2,
        };
        let (a, ra) = fit_gradient(&data, &config).unwrap();
        let (b, rb) = fit_gradient(&data, &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(ra, rb);
        assert!(ra.final_mse < 1e-3 * ra.mse_history[0]);
    }

    #[test]
    fn huge_learning_rate_diverges_with_epoch() {
        let g = random_graph(1, 4, 8, 16);
        let data = TrainingSet::generate(&g, &Constellation::qpsk(), 4, 32, 17).unwrap();
        let config = GradientConfig {
            learning_rate: 50.0,
            epochs: 1000,
            batch_size: 0,
            seed: 0,
        };
        match fit_gradient(&data, &config) {
            Err(Error::Diverged { epoch }) => assert!(epoch > 1 && epoch < 1000),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn training_set_rejects_bad_lengths() {
        let frame = SymbolFrame::scalar(vec![Complex64::new(1.0, 0.0); 3]).unwrap();
        let signal = IqBuffer::from_samples(vec![Complex64::new(0.0, 0.0); 5]).unwrap();
        assert!(TrainingSet::new(vec![(frame, signal)], 1, 4, 8).is_err());
    }

    #[test]
    fn kernel_length_heuristic() {
        assert_eq!(default_kernel_len(1, 8), 16);
        assert_eq!(default_kernel_len(64, 64), 64);
    }
}
