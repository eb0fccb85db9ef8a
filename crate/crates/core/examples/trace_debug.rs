use misr_core::metrics::{interp_fuse, psnr};
use misr_core::objective::{self, DataNorm, ObjectiveParams, Patch};
use misr_core::scg::{ReconstructOptions, Solver};
use misr_core::system::{BlurKernel, DegradationSpec, SystemModel};
use misr_core::pattern;

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let eps: f64 = args.get(1).map(|s| s.parse().unwrap()).unwrap_or(1e-3);
    let content: &str = args.get(2).map(|s| s.as_str()).unwrap_or("card");
    let init: &str = args.get(3).map(|s| s.as_str()).unwrap_or("bilinear");
    let gt = match content {
        "smooth" => pattern::smooth_field::<f64>(64, 64, 42),
        "disk" => pattern::disk::<f64>(64, 64, 32.0, 32.0, 20.0, 1.0, 0.8, 0.2),
        _ => pattern::test_card::<f64>(64, 64, 42),
    };
    let model = SystemModel::build(DegradationSpec {
        scale: 2,
        blur: BlurKernel::gaussian(3, 0.5).unwrap(),
        shifts: DegradationSpec::default_shifts(2),
        noise_sigma: 1.0 / 255.0,
        hr_width: 64,
        hr_height: 64,
    }).unwrap();
    let y = model.degrade(&gt, 7).unwrap();
    let params = ObjectiveParams {
        l1_epsilon: eps,
        ..ObjectiveParams::new(DataNorm::L1)
    };
    let options = ReconstructOptions { workers: 1, iterations: 25, record_iterates: true, ..Default::default() };
    let mut solver = if init == "interp" {
        let x0 = interp_fuse(&y, &model.spec().shifts, 2).unwrap();
        Solver::with_initial(&model, &y, &params, options, &x0).unwrap()
    } else {
        Solver::new(&model, &y, &params, options).unwrap()
    };
    solver.run().unwrap();
    let full = Patch::full(&model);
    for (r, it) in solver.trace().iter().zip(solver.iterates()).take(25) {
        let (dv, _) = objective::data_term(&model, &full, it.values(), &y, &params).unwrap();
        let (bv, _) = objective::btv_term(&full, it.values(), &params).unwrap();
        if r.iter <= 7 || r.iter % 5 == 0 {
            println!("{:2} f={:.4e} data={:.4e} btv*l={:.4e} a={:+.2e} l={:.2e} {}",
                r.iter, r.f, dv, 0.05 * bv, r.alpha, r.lambda_scg, r.accepted as u8);
        }
    }
    let rec = solver.trace();
    let f = |i: usize| rec[i - 1].f;
    let sr = solver.fuse().unwrap();
    println!("eps={eps} content={content} init={init} tail/span={:.4} psnr={:.2}",
        (f(5) - f(20)).abs() / (f(1) - f(20)).abs(), psnr(&sr, &gt, 1.0).unwrap());
}
