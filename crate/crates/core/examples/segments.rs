//! Monotone pieces of a shot and the slack of every inequality on them.
use radbif::model::ProblemParams;
use radbif::numeric::ode::Tolerances;
use radbif::shooting::{hump_widths, integrate, log_inequality, verify_segment_inequalities};

fn main() -> radbif::Result<()> {
    let p = ProblemParams::new(30.0, 1.0)?;
    let sol = integrate(&p, 0.8, Tolerances::default())?;
    for seg in &sol.segments {
        let rep = verify_segment_inequalities(&sol, seg, 8)?;
        let worst = rep
            .checks
            .iter()
            .min_by(|a, b| a.relative().total_cmp(&b.relative()))
            .unwrap();
        println!(
            "{} [{:.5}, {:.5}] complete {:5}  {} checks, tightest {} at {:.2e}",
            seg.case_tag,
            seg.r1,
            seg.r2,
            seg.complete,
            rep.checks.len(),
            worst.name,
            worst.relative()
        );
    }
    for h in hump_widths(&sol) {
        let c = h.bound_check(p.lambda);
        println!(
            "hump {} width {:.5} (bound {:.5}) positive {}",
            h.index,
            h.width(),
            c.scale,
            h.positive
        );
    }
    println!("log inequality on (1, 2): {:?}", log_inequality(1.0, 2.0));
    Ok(())
}
