//! The Wronskian identity for a potential perturbed by a compactly supported bump.

use num_complex::Complex64;
use transmission_core::inverse::{density_estimate, wronskian_g, Bump, Subset, UniquenessScenario};
use transmission_core::profile::RefractiveProfile;
use transmission_core::zeros::{find_zeros, Rect};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = RefractiveProfile::rational_example();
    let scenario = UniquenessScenario::bumped(&profile, Bump::new(0.3, 0.25, 0.5)?)?;
    println!("a = {:.6}, q = q̃ on [{:.6}, a]", scenario.a(), scenario.agree_from);
    for k in [Complex64::new(0.7, 0.0), Complex64::new(5.0, 1.0), Complex64::new(-12.0, 2.5), Complex64::new(29.0, 0.3)]
    {
        let g = wronskian_g(&scenario, k)?;
        println!("k = {k:<12}  g = {:<40.10e} relative gap {:.1e}", g.wronskian, g.relative_gap());
    }
    // Finite-radius density of the full non-real spectrum and of every other zero.
    let zeros = find_zeros(&profile, Rect::new(0.0, 80.0, 0.0, 80.0), 1e-10)?.zeros;
    for subset in [Subset::All, Subset::Every { step: 2, offset: 0 }] {
        let d = density_estimate(&zeros, 80.0, subset);
        println!("{subset:?}: N_D(80) = {}, α̂ = {:.4}", d.count, d.alpha_hat);
    }
    Ok(())
}
