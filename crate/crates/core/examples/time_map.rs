//! The time map, its limits, the partial map and its inverse.
use radbif::model::ProblemParams;
use radbif::timemap::{limits, phi, phi_inverse, phi_partial};

fn main() -> radbif::Result<()> {
    let lambda = 1.0;
    let p = ProblemParams::new(lambda, 1.0)?;
    let lim = limits(lambda);
    println!(
        "limits: 0+ {:.10}  +inf {:.10}  0- {:.10}  floor {}",
        lim.zero_plus, lim.plus_infinity, lim.zero_minus, lim.floor
    );
    for h in [1e-6, 1e-2, 1.0, 1e2, 1e6, -1e-6, -0.5, -0.99, -0.999999] {
        let s = phi(&p, h)?;
        println!(
            "h = {h:>10.3e}  Phi = {:+.12}  (err {:.1e})",
            s.phi, s.quadrature_error_estimate
        );
    }
    let h = 2.0;
    let half = phi_partial(&p, h, 1.0)?;
    println!("Phi_h(1) for h = 2: {half:.12}");
    println!("inverse: {:.12}", phi_inverse(&p, h, half)?);
    Ok(())
}
