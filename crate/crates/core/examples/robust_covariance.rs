//! How the tolerance `c` inflates a covariance: solve `γ(P, θ) = c` and
//! compare the eigenvalues of `P` with those of `(P⁻¹ − θI)⁻¹`.

use nalgebra::DMatrix;
use robust_nav::filter::{gamma, solve_theta, spd_eigenvalues, FilterConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // position-like, velocity-like and bias-like scales
    let p = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![0.5, 0.5, 0.8, 0.05, 0.05, 0.08, 1e-4, 1e-7]));
    let lambda = spd_eigenvalues(&p)?;
    let lambda_max = lambda.last().copied().unwrap_or(0.0);

    println!("     c        θ         θ·λmax    γ(P,θ) − c   inflation of λmax");
    for c in [1e-6, 1e-3, 0.01, 0.1, 0.5, 1.0] {
        let theta = solve_theta(&p, c, &FilterConfig::default())?;
        let residual = gamma(&p, theta)? - c;
        let inflation = 1.0 / (1.0 - theta * lambda_max);
        println!("{c:9.1e}  {theta:9.3e}  {:8.5}  {residual:+10.1e}  {inflation:8.3}×", theta * lambda_max);
    }

    let theta = solve_theta(&p, 0.5, &FilterConfig::default())?;
    println!("\nc = 0.5: λ → λ / (1 − θλ)");
    for l in &lambda {
        println!("  {l:9.3e} → {:9.3e}", l / (1.0 - theta * l));
    }
    Ok(())
}
