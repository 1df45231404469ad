use radbif::branch::{geometric_schedule, trace_branch, BranchOptions, Sign};

fn main() -> radbif::Result<()> {
    let opts = BranchOptions::default();
    let schedule = geometric_schedule(1e-5, 1e3, 33)?;
    for k in 1..=3 {
        let b = trace_branch(k, Sign::Plus, &schedule, &opts)?;
        println!(
            "k = {k}  bounds [{:.4}, {:.4}]",
            b.bounds.lower, b.bounds.upper
        );
        for p in &b.points {
            println!(
                "  h0 {:>10.3e}  lambda {:.10}  nodes {}  bc {:.2e}  mismatch {:.1e}  odd {:.4}  adm {:.2e}  ok {}",
                p.h0,
                p.lambda,
                p.node_count,
                p.relative_boundary_residual(),
                p.radius_mismatch,
                p.max_odd_hump_width,
                p.min_admissibility,
                p.certified
            );
        }
        println!("  folds {:?}", b.folds);
        println!("  asymptote {:?}", b.asymptote);
        println!("  breakdown {:?}", b.breakdown);
    }
    Ok(())
}
