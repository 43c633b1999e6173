use sigmabench_core::data::Dataset;
use sigmabench_core::data::{relabel_signed, synth_dataset, SynthKind};
use sigmabench_core::kernel::GaussianKernelParams;
use sigmabench_core::svm::{svm_train, SvmConfig, SvmKernel};

/// Best training accuracy of any line `w.x + b`, by sweeping 7200 directions
/// and every threshold between consecutive projections.
fn best_linear_accuracy(points: &[[f64; 2]], labels: &[f64]) -> f64 {
    let n = points.len() as f64;
    let mut best: f64 = 0.0;
    for a in 0..7200 {
        let t = a as f64 * std::f64::consts::PI / 3600.0;
        let (c, s) = (t.cos(), t.sin());
        let mut proj: Vec<(f64, f64)> = points
            .iter()
            .zip(labels)
            .map(|(p, &y)| (c * p[0] + s * p[1], y))
            .collect();
        proj.sort_by(|x, y| x.0.total_cmp(&y.0));
        // Everything above the threshold is predicted positive.
        let mut correct = proj.iter().filter(|p| p.1 > 0.0).count() as f64;
        best = best.max(correct / n);
        for p in &proj {
            correct += if p.1 > 0.0 { -1.0 } else { 1.0 };
            best = best.max(correct / n);
        }
    }
    best
}

fn training_accuracy(d: &Dataset, cfg: &SvmConfig) -> f64 {
    let m = svm_train(d, cfg).unwrap();
    let ok = (0..d.len())
        .filter(|&i| m.classify(d.row(i)).unwrap() == d.target(i))
        .count();
    ok as f64 / d.len() as f64
}

#[test]
fn linear_svm_bounded_by_best_separator_on_xor() {
    for seed in 0..5 {
        let d = relabel_signed(&synth_dataset(SynthKind::Xor, 400, seed).unwrap()).unwrap();
        let pts: Vec<[f64; 2]> = (0..d.len()).map(|i| [d.row(i)[0], d.row(i)[1]]).collect();
        let oracle = best_linear_accuracy(&pts, &d.classes());
        // Near the population optimum for a line on Xor, well short of a kernel machine.
        assert!(oracle > 0.6 && oracle < 0.75, "seed {seed}: {oracle}");
        for c in [0.1, 1.0, 10.0] {
            let acc = training_accuracy(
                &d,
                &SvmConfig {
                    c,
                    ..Default::default()
                },
            );
            assert!(acc <= oracle + 1e-12, "seed {seed}, C = {c}: {acc} > {oracle}");
        }
        let rbf = SvmConfig {
            c: 10.0,
            kernel: SvmKernel::Gaussian(GaussianKernelParams::new(0.5).unwrap()),
            ..Default::default()
        };
        let acc = training_accuracy(&d, &rbf);
        assert!(acc > oracle + 0.2, "seed {seed}: gaussian {acc} vs line {oracle}");
    }
}
