fn main() {
    use singdim::arith::*;
    use singdim::cantor_tree::*;
    use singdim::exponents::b0;
    use singdim::rational_geometry::FareyLattice;
    let b_enc = b0(&rat(3, 5), 40).unwrap();
    let b = rational_approx(&b_enc.mid(), 64);
    let root = default_root(8);
    let lat = FareyLattice::new(&root);

    let t0 = std::time::Instant::now();
    let params = TreeParams::derive(rat(3, 5), b.clone(), &root, 4, 6).unwrap();
    eprintln!("derive total: {:?}", t0.elapsed());

    let t = std::time::Instant::now();
    let wits = enumerate_e1(&root, &lat, &params, Some(8)).unwrap();
    eprintln!("enumerate_e1(8): {:?} ({} witnesses)", t.elapsed(), wits.len());

    let t = std::time::Instant::now();
    let rho = rho_min_sq(&root, &lat, &params).unwrap();
    eprintln!("rho: {:?} (val ~2^{})", t.elapsed(), rho.numer().bits() as i64 - rho.denom().bits() as i64);

    let t = std::time::Instant::now();
    let kids = children(&root, &lat, &params).unwrap();
    eprintln!("children: {:?} ({})", t.elapsed(), kids.len());

    let t = std::time::Instant::now();
    let rep = verify_separation(&root, &lat, &kids, &params).unwrap();
    eprintln!("separation: {:?} {:?}", t.elapsed(), rep);
}
