fn main() {
    use singdim::arith::*;
    use singdim::dimension_lab::*;
    use singdim::rational_geometry::PrimitiveVector;
    use singdim::exponents::{upper_gamma, upper_bound_dim};
    let x = PrimitiveVector::new(1, 0, 50).unwrap();
    // mu = 0.75: gamma = 0, s = 2(1-mu) + 0.1 = 0.6
    for (mu, gamma, s) in [
        (rat(3, 4), rat(0, 1), rat(3, 5)),
        (rat(3, 5), upper_gamma(&rat(3, 5)).unwrap().0, upper_bound_dim(&rat(3, 5)).unwrap() + rat(1, 20)),
    ] {
        for cutoff in [1000i64, 10_000, 100_000, 1_000_000] {
            let t0 = std::time::Instant::now();
            match upper_covering_audit(&x, &mu, &s, &gamma, &rat(1, 1), &Int::from(cutoff)) {
                Ok(rep) => {
                    eprintln!(
                        "mu={} cutoff=10^{} members={} ratio_log2=({:.2},{:.2}) below1={} in {:?}",
                        mu, (cutoff as f64).log10() as u32, rep.n_members,
                        rep.ratio_log2.0, rep.ratio_log2.1, rep.ratio_below_one, t0.elapsed()
                    );
                    if cutoff == 1_000_000 {
                        for sh in rep.shells.iter() {
                            eprintln!("  shell 2^{}: n={} sum_log2=({:.2},{:.2})", sh.k, sh.count, sh.sum_log2.0, sh.sum_log2.1);
                        }
                    }
                }
                Err(e) => eprintln!("mu={} cutoff={}: ERR {}", mu, cutoff, e),
            }
        }
    }
}
