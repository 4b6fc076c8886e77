//! Transformation-operator kernel: identities, boundary traces and the representation.

use num_complex::Complex64;
use transmission_core::kernel::{boundary_traces, representation_check, solve_kernel};
use transmission_core::profile::{liouville_transform, RefractiveProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = RefractiveProfile::raised_cosine(0.5)?;
    let l = liouville_transform(&profile)?;
    let a = l.a();
    let integral = |x: f64| l.q_integral(x).unwrap();
    for steps in [100, 200, 400] {
        let grid = solve_kernel(&l, a / steps as f64)?;
        println!(
            "steps {steps:>3}: diagonal residual {:.3e}, Picard iterations {}",
            grid.diagonal_residual(integral),
            grid.iterations()
        );
    }
    let grid = solve_kernel(&l, a / 400.0)?;
    let traces = boundary_traces(&grid);
    println!("K1(a) + K2(a) = {:.8}, q(a)/2 = {:.8}", traces.endpoint_sum(), 0.5 * l.q(a));
    println!("trace identity residual {:.2e}", traces.sum_identity_residual());
    for k in [1.0, std::f64::consts::PI, 7.3, 15.0] {
        let r = representation_check(&profile, &l, &grid, Complex64::new(k, 0.0))?;
        println!("k = {k:<8.4} |Δy(1)| = {:.1e}  |Δy'(1)| = {:.1e}", r.residual_y1, r.residual_dy1);
    }
    Ok(())
}
