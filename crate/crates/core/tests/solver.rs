//! End-to-end solver behavior on synthetic MISR problems.

use misr_core::metrics::{interp_fuse, psnr};
use misr_core::objective::{DataNorm, ObjectiveParams, Patch};
use misr_core::scg::{reconstruct, Execution, ReconstructOptions};
use misr_core::system::{BlurKernel, DegradationSpec, SystemModel};
use misr_core::{pattern, ImageGrid};

fn standard_spec(hr: usize, noise: f64) -> DegradationSpec<f64> {
    DegradationSpec {
        scale: 2,
        blur: BlurKernel::gaussian(3, 0.5).unwrap(),
        shifts: DegradationSpec::default_shifts(2),
        noise_sigma: noise,
        hr_width: hr,
        hr_height: hr,
    }
}

fn standard_params() -> ObjectiveParams<f64> {
    ObjectiveParams::new(DataNorm::L1)
}

#[test]
fn consensus_matches_centralized_objective_every_iteration() {
    let gt = pattern::test_card::<f64>(64, 64, 42);
    let model = SystemModel::build(standard_spec(64, 1.0 / 255.0)).unwrap();
    let y = model.degrade(&gt, 7).unwrap();
    let params = standard_params();
    let full = Patch::full(&model);

    for workers in [1usize, 2, 4] {
        let options = ReconstructOptions {
            workers,
            iterations: 20,
            record_iterates: true,
            ..Default::default()
        };
        let rec = reconstruct(&y, &model, &params, &options).unwrap();
        assert_eq!(rec.trace.len(), rec.iterates.len());
        for (record, iterate) in rec.trace.iter().zip(&rec.iterates) {
            let (f_central, _) =
                misr_core::objective::objective_eval(&model, &full, iterate.values(), &y, &params)
                    .unwrap();
            let err = (record.f - f_central).abs();
            assert!(
                err <= 1e-6 * f_central.abs(),
                "workers {workers} iter {}: sum of local objectives {} vs centralized {}",
                record.iter,
                record.f,
                f_central
            );
        }
    }
}

#[test]
fn objective_non_increasing_over_accepted_steps() {
    let gt = pattern::test_card::<f64>(64, 64, 5);
    let model = SystemModel::build(standard_spec(64, 1.0 / 255.0)).unwrap();
    let y = model.degrade(&gt, 3).unwrap();
    let options = ReconstructOptions {
        workers: 2,
        iterations: 20,
        ..Default::default()
    };
    let rec = reconstruct(&y, &model, &standard_params(), &options).unwrap();
    let mut last = f64::INFINITY;
    let mut accepted = 0;
    for record in &rec.trace {
        if record.accepted {
            assert!(
                record.f <= last + 1e-12 * last.abs(),
                "accepted step raised the objective: {} -> {}",
                last,
                record.f
            );
            last = record.f;
            accepted += 1;
        }
    }
    assert!(accepted >= 5, "too few accepted steps: {accepted}");
}

#[test]
fn worker_counts_agree_on_the_final_image() {
    let gt = pattern::test_card::<f64>(64, 64, 11);
    let model = SystemModel::build(standard_spec(64, 1.0 / 255.0)).unwrap();
    let y = model.degrade(&gt, 9).unwrap();
    let params = standard_params();
    let images: Vec<ImageGrid<f64>> = [1usize, 2, 4]
        .iter()
        .map(|&workers| {
            let options = ReconstructOptions {
                workers,
                iterations: 20,
                ..Default::default()
            };
            reconstruct(&y, &model, &params, &options).unwrap().image
        })
        .collect();
    for pair in images.windows(2) {
        let diff = pair[0].max_abs_diff(&pair[1]);
        assert!(diff <= 1e-5, "worker counts disagree by {diff}");
    }
}

#[test]
fn reconstruction_beats_interpolation_fusion() {
    let gt = pattern::test_card::<f64>(64, 64, 23);
    let model = SystemModel::build(standard_spec(64, 0.0)).unwrap();
    let y = model.degrade(&gt, 0).unwrap();
    let params = standard_params();
    let options = ReconstructOptions {
        workers: 1,
        iterations: 20,
        ..Default::default()
    };
    let sr = reconstruct(&y, &model, &params, &options).unwrap().image;
    let baseline = interp_fuse(&y, &model.spec().shifts, 2).unwrap();
    let psnr_sr = psnr(&sr, &gt, 1.0).unwrap();
    let psnr_interp = psnr(&baseline, &gt, 1.0).unwrap();
    assert!(
        psnr_sr > psnr_interp,
        "SR {psnr_sr:.2} dB must beat interpolation {psnr_interp:.2} dB"
    );
}

#[test]
fn early_iterations_capture_most_of_the_descent() {
    let gt = pattern::test_card::<f64>(64, 64, 42);
    let model = SystemModel::build(standard_spec(64, 1.0 / 255.0)).unwrap();
    let y = model.degrade(&gt, 7).unwrap();
    let options = ReconstructOptions {
        workers: 4,
        iterations: 20,
        ..Default::default()
    };
    let rec = reconstruct(&y, &model, &standard_params(), &options).unwrap();
    let f_at = |iter: usize| rec.trace[iter - 1].f;
    let tail = (f_at(5) - f_at(20)).abs();
    let span = (f_at(1) - f_at(20)).abs();
    assert!(
        tail <= 0.05 * span,
        "decline after iteration 5 too large: {tail} vs span {span}"
    );
}

#[test]
fn seams_leave_no_border_artifact() {
    let gt = pattern::smooth_field::<f64>(128, 128, 77);
    let model = SystemModel::build(DegradationSpec {
        hr_width: 128,
        hr_height: 128,
        ..standard_spec(128, 1.0 / 255.0)
    })
    .unwrap();
    let y = model.degrade(&gt, 5).unwrap();
    let params = standard_params();
    let options = ReconstructOptions {
        workers: 4,
        iterations: 20,
        ..Default::default()
    };
    let mut solver = misr_core::Solver::new(&model, &y, &params, options).unwrap();
    solver.run().unwrap();
    let seams: Vec<usize> = (0..3).map(|h| solver.plan().band(h).owned.end).collect();
    let img = solver.fuse().unwrap();

    let row_diff = |r: usize| {
        let (a, b) = (img.row(r - 1), img.row(r));
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64
    };
    let seam_stat: f64 = seams.iter().map(|&r| row_diff(r)).sum::<f64>() / seams.len() as f64;
    let interior: Vec<usize> = (1..128).filter(|r| !seams.contains(r)).collect();
    let interior_stat: f64 =
        interior.iter().map(|&r| row_diff(r)).sum::<f64>() / interior.len() as f64;
    assert!(
        (seam_stat - interior_stat).abs() <= 0.10 * interior_stat,
        "seam stat {seam_stat} vs interior {interior_stat}"
    );
}

#[test]
fn determinism_across_runs_and_modes() {
    let gt = pattern::test_card::<f64>(48, 48, 2);
    let model = SystemModel::build(DegradationSpec {
        hr_width: 48,
        hr_height: 48,
        ..standard_spec(48, 1.0 / 255.0)
    })
    .unwrap();
    let y = model.degrade(&gt, 13).unwrap();
    let params = standard_params();
    let run = |execution: Execution| {
        let options = ReconstructOptions {
            workers: 4,
            iterations: 10,
            execution,
            ..Default::default()
        };
        reconstruct(&y, &model, &params, &options).unwrap().image
    };
    let a = run(Execution::Threaded);
    let b = run(Execution::Threaded);
    let c = run(Execution::Sequential);
    assert_eq!(a, b, "repeated threaded runs must be bit-identical");
    assert_eq!(a, c, "threaded and sequential runs must be bit-identical");
}
