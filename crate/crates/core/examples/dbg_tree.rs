fn main() {
    use singdim::arith::*;
    use singdim::cantor_tree::*;
    use singdim::exponents::b0;
    let b_enc = b0(&rat(3, 5), 40).unwrap();
    let b = rational_approx(&b_enc.mid(), 64);
    let root = default_root(8);
    let mut params = TreeParams::derive(rat(3, 5), b, &root, 4, 6).unwrap();
    params.witness_cap = 2;
    params.child_cap = 2;
    for depth in [3usize, 4, 5] {
        let t0 = std::time::Instant::now();
        match build_tree(&root, &params, depth, 200) {
            Ok(tree) => {
                let max_h = tree.nodes.iter().map(|n| n.x.q.bits()).max().unwrap();
                eprintln!("depth {}: {} nodes, max height ~2^{}, {:?}", depth, tree.nodes.len(), max_h, t0.elapsed());
                if depth == 5 {
                    let leaf = *tree.leaves().iter().max_by_key(|&&i| tree.nodes[i].depth).unwrap();
                    let path = tree.path_to(leaf);
                    let t1 = std::time::Instant::now();
                    let target = extract_point(&tree, &path).unwrap();
                    eprintln!("extract: radius ~2^{} in {:?}", target.radius.numer().bits() as i64 - target.radius.denom().bits() as i64, t1.elapsed());
                }
            }
            Err(e) => eprintln!("depth {}: ERR {} after {:?}", depth, e, t0.elapsed()),
        }
    }
}
