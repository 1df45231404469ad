use radbif::verify::{run, VerifyConfig};

fn main() -> radbif::Result<()> {
    let rep = run(&VerifyConfig::default())?;
    for c in &rep.checks {
        println!(
            "{} [{}] {}  value {:e} limit {:e}",
            if c.passed { "ok  " } else { "FAIL" },
            c.suite,
            c.name,
            c.value,
            c.limit
        );
    }
    println!("failures: {}", rep.failures);
    Ok(())
}
