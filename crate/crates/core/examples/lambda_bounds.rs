//! Outer λ-bounds of the k-th branch from mixed eigenvalues on subintervals.
use radbif::branch::{first_mixed_eigenvalue, lambda_bounds, MixedKind};

fn main() -> radbif::Result<()> {
    println!(
        "ND on [0, 1]: {:.10}",
        first_mixed_eigenvalue(MixedKind::NeumannDirichlet, 0.0, 1.0)?
    );
    println!(
        "DN on [0.5, 1]: {:.10}",
        first_mixed_eigenvalue(MixedKind::DirichletNeumann, 0.5, 1.0)?
    );
    for k in 1..=3 {
        let b = lambda_bounds(k, 1.0)?;
        println!(
            "k = {k}: [{:.6}, {:.6}]  sup attained by {:?} on [{:.4}, {:.4}]",
            b.lower,
            b.upper,
            b.sup.kind,
            b.sup.a,
            b.sup.a + b.sub_length
        );
    }
    Ok(())
}
