//! Where the k = 1 branch leaves the sets 𝒪_ε, and the λ-windows of the branch limits.
use radbif::branch::{
    admissibility_region, existence_window, geometric_schedule, trace_branch, BranchOptions, Sign,
};

fn main() -> radbif::Result<()> {
    let sched = geometric_schedule(1e-5, 1e3, 33)?;
    let b = trace_branch(1, Sign::Plus, &sched, &BranchOptions::default())?;
    for eps in [1e-1, 1e-2, 1e-3] {
        let region = admissibility_region(eps)?;
        match region.first_exit(&b) {
            Some((i, faces)) => println!(
                "eps = {eps}: leaves at h0 = {:.3e} through {faces:?}",
                b.points[i].h0
            ),
            None => println!("eps = {eps}: stays inside"),
        }
    }
    let last = b.points.last().unwrap();
    println!(
        "tail: sup w {:.1}, min(1 + sqrt(lambda) w) {:.1e}, odd hump {:.2e}",
        last.sup_w, last.min_admissibility, last.max_odd_hump_width
    );
    for h in 1..=2 {
        for odd in [true, false] {
            let w = existence_window(h, odd, 1.0)?;
            println!(
                "k = {}: window ]{:.4}, {:.4}[ empty {}",
                w.k,
                w.lower,
                w.upper,
                w.is_empty()
            );
        }
    }
    let w = existence_window(1, true, 1.0)?.with_branch(&b);
    println!(
        "k = 1 branch covers {:.3} of its window",
        w.coverage().unwrap()
    );
    Ok(())
}
