//! Temporary calibration probe; not part of the suite.

use mmdbo_core::problems::BenchmarkProblem;
use nalgebra::DVector;

#[test]
fn probe_surfaces() {
    let dp = BenchmarkProblem::by_name("double_peak_1d").unwrap();
    println!("double_peak robust value = {:?}", dp.robust_optimum_value());
    for x in [0.30, 0.34, 0.36, 0.37, 0.38, 0.3889, 0.40, 0.42, 0.4228, 0.44, 0.4514, 0.47, 0.50, 0.52, 0.55] {
        let r = dp
            .robust_regret(&DVector::from_element(1, x), 400_000, 99)
            .unwrap();
        println!("dp  x={x:.4}  regret={r:.5}  E={:.5}", 4.9228595397 - r);
    }

    let rk = BenchmarkProblem::by_name("rkhs_1d").unwrap();
    println!("rkhs robust value = {:?}", rk.robust_optimum_value());
    for x in [0.04, 0.06, 0.08, 0.10, 0.12, 0.892] {
        let r = rk
            .robust_regret(&DVector::from_element(1, x), 400_000, 99)
            .unwrap();
        println!("rk  x={x:.4}  regret={r:.5}");
    }
}
