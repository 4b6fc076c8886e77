//! Shooting for d(k) against the closed forms for η ≡ 4 and the rational example.

use num_complex::Complex64;
use transmission_core::forward::{characteristic, ForwardModel};
use transmission_core::profile::RefractiveProfile;

/// For the rational example: d = (√3/2)[cos(μa) sin k / k − sin(μa) cos k / μ], μ = √(k² − 1/4).
fn example_closed_form(k: Complex64) -> Complex64 {
    let a = 3f64.ln();
    let mu = (k * k - 0.25).sqrt();
    (3f64.sqrt() / 2.0) * ((mu * a).cos() * k.sin() / k - (mu * a).sin() * k.cos() / mu)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let four = RefractiveProfile::constant(4.0)?;
    let example = RefractiveProfile::rational_example();
    println!("{:>18} {:>26} {:>10}", "k", "d (η ≡ 4)", "error");
    for k in [Complex64::new(1.3, 0.0), Complex64::new(5.0, 1.0), Complex64::new(20.0, 4.0)] {
        let d = characteristic(&four, k, 1e-12)?.d_true();
        let exact = -k.sin().powi(3) / k;
        println!("{k:>18.3} {d:>26.6e} {:>10.1e}", (d - exact).norm() / exact.norm());
    }
    let model = ForwardModel::new(&example)?;
    println!("\n{:>18} {:>26} {:>10}", "k", "d (example)", "error");
    for k in [Complex64::new(2.0, 0.5), Complex64::new(4.4134, 2.9042), Complex64::new(31.9, 0.0)] {
        let d = model.characteristic(k, 1e-12)?.d_true();
        let exact = example_closed_form(k);
        println!("{k:>18.4} {d:>26.6e} {:>10.1e}", (d - exact).norm() / exact.norm().max(1.0));
    }
    // Large |Im k| stays finite through the scaled characteristic.
    let k = Complex64::new(10.0, 400.0);
    println!("\nD({k}) = {:.6e}", model.scaled(k, 1e-10)?);
    Ok(())
}
