//! Travel time, Liouville potential and subinterval endpoints of the rational example.

use transmission_core::inverse::{density_threshold, subinterval_data};
use transmission_core::profile::{liouville_transform, RefractiveProfile};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = RefractiveProfile::rational_example();
    let l = liouville_transform(&profile)?;
    println!("a = {:.12} (ln 3 = {:.12})", l.a(), 3f64.ln());
    println!("∫q = {:.12}", l.q_mean());
    for x in [0.0, 0.25 * l.a(), 0.5 * l.a(), l.a()] {
        println!("x = {x:.4}  r = {:.6}  q = {:.10}", l.r_of_x(x), l.q(x));
    }
    let s = subinterval_data(&l)?;
    println!("ε = {:.10}, ε₁ = {:.10}, x₀ = {:.6}", s.epsilon, s.epsilon1, s.x0);
    for b in [0.5 * (s.a - 1.0), 0.5, 0.5 * (s.a + 1.0)] {
        println!("b = {b:.4}: density threshold {:.6}", density_threshold(s.a, b)?);
    }
    Ok(())
}
