//! One shot, its nodes and the integrated energy identity.
use radbif::model::ProblemParams;
use radbif::numeric::ode::Tolerances;
use radbif::shooting::integrate;
use radbif::specfun::neumann_eigen;

fn main() -> radbif::Result<()> {
    let mu1 = neumann_eigen(1, 1.0)?.mu;
    for (lambda, h0) in [
        (0.5 * mu1, 1e-6),
        (0.5 * mu1, 0.0),
        (20.0, 3.0),
        (20.0, -0.2),
    ] {
        let p = ProblemParams::new(lambda, 1.0)?;
        let sol = integrate(&p, h0, Tolerances::default())?;
        println!(
            "lambda = {lambda:.6}, h0 = {h0}: {:?}, {} steps",
            sol.termination,
            sol.accepted_steps()
        );
        println!(
            "  nodes {:?}",
            sol.nodes.iter().map(|n| n.rho).collect::<Vec<_>>()
        );
        println!(
            "  w'(R) = {:.3e}  sup w = {:.6}  min(1 + sqrt(lambda) w) = {:.3e}",
            sol.boundary_residual,
            sol.sup_w,
            sol.min_admissibility()
        );
        for e in sol.energy_identity() {
            println!(
                "  energy on [{:.6}, {:.6}]: relative residual {:.1e}",
                e.r1,
                e.r2,
                e.relative()
            );
        }
    }
    Ok(())
}
