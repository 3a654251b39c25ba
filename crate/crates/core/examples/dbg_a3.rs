fn main() {
    use singdim::arith::*;
    use singdim::best_approx::*;
    use singdim::cantor_tree::*;
    use singdim::exponents::b0;
    let t_all = std::time::Instant::now();
    let b_enc = b0(&rat(3, 5), 40).unwrap();
    let b = rational_approx(&b_enc.mid(), 64);
    let root = default_root(8);
    let mut params = TreeParams::derive(rat(3, 5), b, &root, 4, 6).unwrap();
    params.witness_cap = 1;
    params.child_cap = 1;
    let tree = build_tree(&root, &params, 5, 100).unwrap();
    eprintln!("tree: {} nodes in {:?}", tree.nodes.len(), t_all.elapsed());
    let leaf = *tree.leaves().iter().max_by_key(|&&i| tree.nodes[i].depth).unwrap();
    let path = tree.path_to(leaf);
    let theta = extract_point(&tree, &path).unwrap();
    let qmax = tree.nodes[path[4]].x.q.clone();
    let q2 = tree.nodes[path[2]].x.q.clone();
    eprintln!("qmax = |x4| ~ 2^{}, |x2| ~ 2^{}", qmax.bits(), q2.bits());
    let t0 = std::time::Instant::now();
    let seq = best_sequence_solver(&theta, &qmax).unwrap();
    eprintln!("solver: {} records in {:?}", seq.records.len(), t0.elapsed());
    let t0 = std::time::Instant::now();
    let rows = singular_witness(&seq, &rat(3, 5), 2..seq.records.len()).unwrap();
    let bad: Vec<_> = rows.iter().filter(|r| r.lambda_bound != CheckStatus::Pass).collect();
    eprintln!("witness rows: {} ({} lambda fails) in {:?}", rows.len(), bad.len(), t0.elapsed());
    for r in bad.iter().take(5) {
        eprintln!("  fail n={} q bits={}", r.n, r.q.bits());
    }
    let sandwich_bad = rows.iter().filter(|r| r.sandwich == CheckStatus::Fail).count();
    eprintln!("sandwich fails: {}", sandwich_bad);
    let t0 = std::time::Instant::now();
    let ok = uniform_decay_check(&seq, &rat(3, 5), &q2, &qmax).unwrap();
    eprintln!("decay D(Q) <= Q^-0.6 on [|x2|, |x4|]: {} in {:?}", ok, t0.elapsed());
    eprintln!("TOTAL {:?}", t_all.elapsed());
}
