//! Zeros of d(k) in a rectangle, with multiplicities and the argument-principle count.

use transmission_core::profile::RefractiveProfile;
use transmission_core::zeros::{count_zeros, find_zeros, real_zeros, Rect};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = RefractiveProfile::rational_example();
    let rect = Rect::new(0.0, 40.0, 0.0, 6.0);
    let report = find_zeros(&profile, rect, 1e-10)?;
    println!("{} zeros, total multiplicity {}", report.zeros.len(), report.total_count);
    for z in &report.zeros {
        println!("{:>14.10} {:>+14.10}i  m = {}  {}", z.k.re, z.k.im, z.multiplicity, z.class.as_str());
    }
    for z in real_zeros(&profile, 70.0, 1e-10)? {
        println!("real zero {:.10}", z.k.re);
    }
    let triple = RefractiveProfile::constant(4.0)?;
    let n = count_zeros(&triple, Rect::new(0.5, 10.0, -1.0, 1.0), 1e-10)?;
    println!("η ≡ 4: {n} zeros in [0.5, 10] × [−1, 1] (three triple zeros)");
    Ok(())
}
