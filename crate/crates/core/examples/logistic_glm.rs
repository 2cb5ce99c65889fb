//! Fit a logistic GLM by IRLS on simulated data, check collinearity and run
//! a paired signed-rank test.

use neoscope::infer::{fit_logistic_irls, vif, wilcoxon_signed_rank, Design, IrlsOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let n = 400;
    let density: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..60.0)).collect();
    let growth: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal) * 0.3).collect();
    let y: Vec<f64> = density
        .iter()
        .zip(&growth)
        .map(|(d, g)| {
            let eta = 0.8 - 0.03 * d + 2.5 * g;
            f64::from(u8::from(rng.random_bool(1.0 / (1.0 + (-eta).exp()))))
        })
        .collect();

    let design = Design::with_intercept(&[("density", &density), ("growth", &growth)]);
    let fit = fit_logistic_irls(&design, &y, IrlsOptions::default())?;
    println!("converged {} after {} iterations, log-likelihood {:.3}", fit.converged, fit.iterations, fit.log_likelihood);
    println!("{:<10} {:>9} {:>9} {:>8} {:>10}", "term", "beta", "se", "z", "p");
    for j in 0..fit.names.len() {
        println!(
            "{:<10} {:>9.4} {:>9.4} {:>8.2} {:>10.2e}",
            fit.names[j], fit.coefficients[j], fit.std_errors[j], fit.z[j], fit.p_values[j]
        );
    }
    println!("VIF: {:?}", vif(&design)?);

    let diffs: Vec<f64> = (0..15).map(|i| f64::from(i % 5) - 1.0).collect();
    let w = wilcoxon_signed_rank(&diffs)?;
    println!("signed-rank on {} non-zero diffs: W+ = {}, p = {:.4} (exact: {})", w.n, w.w_plus, w.p_value, w.exact);
    Ok(())
}
