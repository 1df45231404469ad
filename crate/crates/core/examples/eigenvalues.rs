//! Radial Neumann and Dirichlet spectra of the disk and their interlacing.
use radbif::specfun::SpectralData;

fn main() -> radbif::Result<()> {
    for radius in [1.0, 2.0] {
        println!("R = {radius}");
        println!(
            "{:>3} {:>14} {:>14} {:>16} {:>16}",
            "k", "y_k", "z_k", "mu_k", "nu_k"
        );
        for k in 1..=6 {
            let s = SpectralData::new(k, radius)?;
            println!(
                "{:>3} {:>14.10} {:>14.10} {:>16.10} {:>16.10}",
                k, s.y_k, s.z_k, s.mu_k, s.nu_k
            );
        }
    }
    // nu_k < mu_k < nu_{k+1}
    let ok = (1..=10).all(|k| {
        let a = SpectralData::new(k, 1.0).unwrap();
        let b = SpectralData::new(k + 1, 1.0).unwrap();
        a.nu_k < a.mu_k && a.mu_k < b.nu_k
    });
    println!("interlacing for k <= 10: {ok}");
    Ok(())
}
