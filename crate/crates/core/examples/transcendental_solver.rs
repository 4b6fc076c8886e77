//! Roots of z − λ Log z = w, including the sector where none exists.

use num_complex::Complex64;
use transmission_core::asymptotics::{solve_transcendental, TRANSCENDENTAL_TOL};

fn main() {
    for lambda in [-2.0, -0.5, 0.0, 1.0, 3.0] {
        for angle in [0.0, 1.5, 3.0, std::f64::consts::PI] {
            let w = Complex64::from_polar(100.0, angle);
            match solve_transcendental(lambda, w, TRANSCENDENTAL_TOL) {
                Ok(z) => println!(
                    "λ = {lambda:>4}, arg w = {angle:.3}: z = {z:.10}, residual {:.1e}",
                    (z - lambda * z.ln() - w).norm()
                ),
                Err(e) => println!("λ = {lambda:>4}, arg w = {angle:.3}: {e}"),
            }
        }
    }
}
