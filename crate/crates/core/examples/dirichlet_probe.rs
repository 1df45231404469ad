use radbif::branch::{default_probe_grid, dirichlet_probe};
use radbif::numeric::ode::Tolerances;

fn main() -> radbif::Result<()> {
    let (lambdas, u0s) = default_probe_grid(20);
    let rep = dirichlet_probe(&lambdas, &u0s, 1.0, 1e-6, Tolerances::default())?;
    let closest = rep
        .rows
        .iter()
        .filter(|r| !r.singular)
        .min_by(|a, b| a.u_at_r.abs().total_cmp(&b.u_at_r.abs()))
        .unwrap();
    println!(
        "{} shots, {} hits, {} singular",
        rep.rows.len(),
        rep.hits,
        rep.singular
    );
    println!(
        "smallest |u(R)|: {:.3e} at lambda = {:.3}, u0 = {:.3e}",
        closest.u_at_r.abs(),
        closest.lambda,
        closest.u0
    );
    Ok(())
}
