//! The nonlinearity, its potential, the C² truncation and the energy of a profile.
use radbif::model::{
    f_lambda, potential_lambda, quadratic_form, radial_energy, to_u, to_w, truncate_h,
    ProblemParams, Profile,
};
use radbif::specfun::neumann_eigen;

fn main() -> radbif::Result<()> {
    let p = ProblemParams::new(4.0, 1.0)?;
    println!("floor -1/sqrt(lambda) = {}", p.admissible_floor());
    for s in [-0.49, -0.25, 0.0, 0.5, 3.0] {
        println!(
            "s = {s:>5}: f = {:+.10}  F = {:+.10}",
            f_lambda(&p, s)?,
            potential_lambda(&p, s)?
        );
    }
    println!("f at the floor: {:?}", f_lambda(&p, -0.5).unwrap_err());

    let t = truncate_h(-0.5)?;
    for s in [-2.0, -0.5, 0.0, 1.0] {
        println!(
            "h~(s = {s:>4}) = {:.6}  h~' = {:.6}  h~'' = {:.6}",
            t.eval(s),
            t.derivative(s),
            t.second_derivative(s)
        );
    }

    let u = to_u(&p, 0.1)?;
    println!("w = 0.1 <-> u = {u}, back to w = {}", to_w(&p, u)?);

    // small multiple of the first Neumann mode
    let m = neumann_eigen(1, 1.0)?;
    let eps = 1e-3;
    let prof = Profile::from_fn(1.0, 2001, |r| eps * m.eval(r), |r| eps * m.derivative(r));
    println!(
        "Q(w) = {:.6e}, I(w) = {:.6e}",
        quadratic_form(&p, &prof),
        radial_energy(&p, &prof)?
    );
    Ok(())
}
