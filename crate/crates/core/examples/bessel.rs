use radbif::specfun::{bessel_j0, bessel_j0_prime, bessel_j1, j0_zero, j1_zero, neumann_eigen};

fn main() -> radbif::Result<()> {
    for x in [0.0, 0.5, 2.404825557695773, 10.0, 30.0, 250.0] {
        println!(
            "x = {x:>8}  J0 = {:+.16e}  J1 = {:+.16e}",
            bessel_j0(x)?,
            bessel_j1(x)?
        );
    }
    for k in 1..=3 {
        let (z, y) = (j0_zero(k)?, j1_zero(k)?);
        println!(
            "k = {k}: J0(z_k) = {:+.1e}, J0'(y_k) = {:+.1e}",
            bessel_j0(z)?,
            bessel_j0_prime(y)?
        );
    }
    let m = neumann_eigen(2, 1.0)?;
    println!(
        "w_2(rho) = J0(y_2 rho): w_2(1) = {:.12}, w_2'(1) = {:.1e}",
        m.eval(1.0),
        m.derivative(1.0)
    );
    Ok(())
}
