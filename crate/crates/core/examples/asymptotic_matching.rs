//! Computed zeros against the leading-order predictions and the counting law.

use transmission_core::asymptotics::{counting_check, match_zeros, predict_real, AsymptoticCase};
use transmission_core::profile::{liouville_transform, RefractiveProfile};
use transmission_core::zeros::{find_zeros, Rect};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let profile = RefractiveProfile::rational_example();
    let l = liouville_transform(&profile)?;
    let case = AsymptoticCase::from_liouville(&l)?;
    println!("regime {}, m = {}, η^(m+2)(1) = {}", case.regime, case.m, case.eta_deriv);

    let report = find_zeros(&profile, Rect::new(0.0, 100.0, 0.0, 8.0), 1e-10)?;
    let m = match_zeros(&report, &case, (5, 30), None)?;
    println!(
        "shifts +{} / −{}, {} pairs, all matched: {}",
        m.shift_plus,
        m.shift_minus,
        m.pairs.len(),
        m.all_matched()
    );
    for p in m.pairs.iter().filter(|p| p.n % 5 == 0) {
        println!(
            "n = {:>2} {:<5} computed {:.6} predicted {:.6} |α| = {:.4}",
            p.n,
            p.branch.as_str(),
            p.computed,
            p.predicted,
            p.abs_residual()
        );
    }
    println!("max |α| on [5,15]: {:.4}", m.max_residual_in(5, 15).unwrap_or(f64::NAN));
    println!("max |α| on [20,30]: {:.4}", m.max_residual_in(20, 30).unwrap_or(f64::NAN));

    for n in 1..=3 {
        println!("predicted real zero k'_{n} = {:.6}", predict_real(&l, n)?);
    }
    // Only radii whose quarter disk lies inside the searched rectangle are meaningful.
    let wide = find_zeros(&profile, Rect::new(0.0, 60.0, 0.0, 60.0), 1e-10)?;
    for row in counting_check(&wide.zeros, &[20.0, 40.0, 60.0]) {
        println!("N({}) = {}, N π / 4r = {:.4}", row.r, row.count, row.ratio);
    }
    Ok(())
}
