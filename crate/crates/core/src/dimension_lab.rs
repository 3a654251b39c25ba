//! Empirical dimension machinery: the counting-lemma profiler, box-counting
//! and local-dimension estimators, and the truncated upper-covering audit.
//!
//! Estimator outputs are certified where the spec demands it (profile bound
//! comparisons, local-dimension enclosures); the box-count slope is a plain
//! least-squares diagnostic on exact box counts.

use crate::arith::*;
use crate::cantor_tree::{BallTree, CylinderMeasure};
use crate::error::{Error, Result};
use crate::interval::{ln_enclosure, QInterval};
use crate::power::PowerProduct;
use crate::rational_geometry::{FareyLattice, PrimitiveVector, QVec2};
use num_traits::{One, Signed};
use std::cmp::Ordering;
use std::collections::BTreeSet;

// ---------------------------------------------------------------------------
// Counting-lemma profiler
// ---------------------------------------------------------------------------

/// Scene extracted from a verified tree node: the E-points with their
/// D-point families, the scale ladder R0 > R1 > R2 > R3 and the tiling
/// parameters H, V with distortion C0.
#[derive(Clone, Debug)]
pub struct CountingScene {
    pub r0: PowerProduct,
    pub r1: PowerProduct,
    pub r2: PowerProduct,
    pub r3: PowerProduct,
    pub h: PowerProduct,
    pub v: PowerProduct,
    pub c0: Rat,
    pub e_points: Vec<QVec2>,
    /// D-points grouped per E-point
    pub d_points: Vec<Vec<QVec2>>,
}

impl CountingScene {
    /// Scale ladder and hypothesis checks: R0/C0 >= H, V >= R1/C0,
    /// card D(y) <= floor(2 R1/R2) for every family.
    pub fn check_hypotheses(&self) -> Result<bool> {
        let c0 = PowerProduct::from_rat(self.c0.clone());
        let ladder = self.r1.lt(&self.r0)?
            && self.r2.lt(&self.r1)?
            && self.r3.lt(&self.r2)?;
        let h_ok = self.h.le(&self.r0.mul(&c0.recip()))?;
        let v_ok = self.r1.mul(&c0.recip()).le(&self.v)?;
        // k_y <= floor(2 R1 / R2)
        let ratio = self.r1.scale(&rat(2, 1)).div(&self.r2);
        let mut k_ok = true;
        for fam in &self.d_points {
            let k = PowerProduct::from_rat(rat(fam.len() as i64, 1));
            if !k.le(&ratio)? {
                k_ok = false;
            }
        }
        Ok(ladder && h_ok && v_ok && k_ok)
    }

    pub fn all_points(&self) -> Vec<QVec2> {
        self.d_points.iter().flatten().cloned().collect()
    }
}

#[derive(Clone, Debug)]
pub struct ProfilePoint {
    pub r: Rat,
    pub max_count: usize,
    pub bound_ok: bool,
}

/// Empirical max over candidate centers of card(S cap B(a, r)) / r^s against
/// the counting-lemma bound.  Candidate centers are the S-points and their
/// pairwise midpoints: this lower-bounds the true max over the plane, so a
/// reported violation is sound evidence of error while a pass is heuristic.
pub fn counting_profile(
    scene: &CountingScene,
    s: &Rat,
    r_grid: &[Rat],
    midpoint_cap: usize,
) -> Result<Vec<ProfilePoint>> {
    let pts = scene.all_points();
    let mut centers: Vec<QVec2> = pts.clone();
    'mid: for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            centers.push(QVec2::new(
                (&pts[i].x + &pts[j].x) / rat(2, 1),
                (&pts[i].y + &pts[j].y) / rat(2, 1),
            ));
            if centers.len() >= pts.len() + midpoint_cap {
                break 'mid;
            }
        }
    }
    // bound terms
    let c0_4 = pow_rat_i(&scene.c0, 4) * rat(72, 1);
    let term_a = PowerProduct::from_rat(c0_4.clone()).mul(&scene.r3.pow(&-s.clone()));
    let term_c = PowerProduct::from_rat(c0_4.clone())
        .mul(&scene.r1)
        .mul(&scene.r0.square())
        .div(&scene.v)
        .div(&scene.h)
        .div(&scene.r2)
        .mul(&scene.r0.pow(&-s.clone()));
    let mut bound = if term_a.try_cmp(&term_c)? == Ordering::Greater {
        term_a.clone()
    } else {
        term_c.clone()
    };
    if *s < Rat::one() {
        // extra middle term R1/(R2 R1^s)
        let term_b = PowerProduct::from_rat(c0_4)
            .mul(&scene.r1)
            .div(&scene.r2)
            .mul(&scene.r1.pow(&-s.clone()));
        if term_b.try_cmp(&bound)? == Ordering::Greater {
            bound = term_b;
        }
    }
    let mut out = Vec::new();
    for r in r_grid {
        let rr = r * r;
        let mut max_count = 0usize;
        for c in &centers {
            let count = pts.iter().filter(|p| p.dist_sq(c) <= rr).count();
            if count > max_count {
                max_count = count;
            }
        }
        // max_count / r^s <= bound  <=>  max_count <= bound * r^s
        let lhs = PowerProduct::from_rat(rat(max_count as i64, 1));
        let rhs = bound.mul(&PowerProduct::from_pow(r.clone(), s.clone()));
        let bound_ok = lhs.le(&rhs)?;
        out.push(ProfilePoint { r: r.clone(), max_count, bound_ok });
    }
    Ok(out)
}

/// Geometric grid of rationals inside the certified range [R3, R0].
pub fn scale_grid(scene: &CountingScene, n: usize) -> Result<Vec<Rat>> {
    let lo = scene.r3.enclosure(64);
    let hi = scene.r0.enclosure(64);
    let l_lo = ln_enclosure(&lo.hi, 64).mid();
    let l_hi = ln_enclosure(&hi.lo, 64).mid();
    let mut out = Vec::new();
    for i in 0..n {
        let t = rat(i as i64, (n.max(2) - 1) as i64);
        let l = &l_lo + (&l_hi - &l_lo) * &t;
        // exp via interval machinery, take the midpoint, then clamp by
        // certified comparison against the true endpoints
        let e = crate::interval::exp_enclosure(&l, 64).mid();
        let cand = PowerProduct::from_rat(e.clone());
        if scene.r3.le(&cand)? && cand.le(&scene.r0)? {
            out.push(e);
        }
    }
    if out.is_empty() {
        return Err(Error::Domain("empty certified scale grid".into()));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Box counting
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct BoxCount {
    /// (k, N) for dyadic scale 2^-k
    pub counts: Vec<(u32, usize)>,
    pub slope: f64,
    /// half-width of a crude confidence band from the residuals
    pub band: f64,
}

/// Exact dyadic box counting (grid anchored at 0, membership by floor) and a
/// least-squares slope of log N against log(1/delta).
pub fn boxcount(points: &[QVec2], scales: &[u32]) -> Result<BoxCount> {
    if scales.len() < 2 {
        return Err(Error::DegenerateScales);
    }
    let mut counts = Vec::new();
    for &k in scales {
        let mut boxes: BTreeSet<(Int, Int)> = BTreeSet::new();
        let scale = Int::one() << k;
        for p in points {
            let bx = (&p.x * rat_int(scale.clone())).floor().to_integer();
            let by = (&p.y * rat_int(scale.clone())).floor().to_integer();
            boxes.insert((bx, by));
        }
        counts.push((k, boxes.len()));
    }
    // least squares on (k ln 2, ln N)
    let ln2 = std::f64::consts::LN_2;
    let xs: Vec<f64> = counts.iter().map(|(k, _)| *k as f64 * ln2).collect();
    let ys: Vec<f64> = counts.iter().map(|(_, n)| (*n as f64).ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let var: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if var == 0.0 {
        return Err(Error::DegenerateScales);
    }
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = cov / var;
    let resid: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - (my + slope * (x - mx));
            e * e
        })
        .sum();
    let band = (resid / (n - 1.0)).sqrt() / var.sqrt();
    Ok(BoxCount { counts, slope, band })
}

// ---------------------------------------------------------------------------
// Local dimension
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct LocalDim {
    pub node: usize,
    /// log mu(B) / log r as a certified enclosure
    pub ratio: QInterval,
}

/// Per-leaf local-dimension enclosures log(weight)/log(radius) and summary
/// quantiles of the midpoints.
pub fn local_dimension(
    measure: &CylinderMeasure,
    bt: &BallTree,
    sample: &[usize],
) -> Result<(Vec<LocalDim>, Vec<(f64, f64)>)> {
    if sample.is_empty() {
        return Err(Error::DepthInsufficient("empty leaf sample".into()));
    }
    let mut rows = Vec::new();
    for &leaf in sample {
        let w = &measure.weights[leaf];
        if !w.lo.is_positive() {
            return Err(Error::DepthInsufficient(format!(
                "leaf {} weight not strictly positive",
                leaf
            )));
        }
        let ln_w = QInterval::new(ln_enclosure(&w.lo, 96).lo, ln_enclosure(&w.hi, 96).hi);
        // radius = diam / 2
        let r = bt.diam[leaf].scale(&rat(1, 2));
        let ln_r = r.ln_enclosure(96);
        if !ln_r.hi.is_negative() {
            return Err(Error::Domain("leaf ball radius not < 1".into()));
        }
        let ratio = ln_w.div(&ln_r)?;
        rows.push(LocalDim { node: leaf, ratio });
    }
    let mut mids: Vec<f64> = rows
        .iter()
        .map(|r| {
            let m = r.ratio.mid();
            // display only
            rat_to_f64(&m)
        })
        .collect();
    mids.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let q = |p: f64| -> (f64, f64) {
        let idx = ((mids.len() - 1) as f64 * p).round() as usize;
        (p, mids[idx])
    };
    let quantiles = vec![q(0.0), q(0.1), q(0.5), q(0.9), q(1.0)];
    Ok((rows, quantiles))
}

pub fn rat_to_f64(x: &Rat) -> f64 {
    // scale-aware conversion; fine for reporting
    let bits = bit_len(x.numer()) as i64 - bit_len(x.denom()) as i64;
    if bits.abs() < 500 {
        let n = x.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
        let d = x.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
        n / d
    } else {
        // fall back through a shift
        let shift = bits - 40;
        let y = if shift > 0 {
            x / pow_rat_i(&rat(2, 1), shift)
        } else {
            x * pow_rat_i(&rat(2, 1), -shift)
        };
        let n = y.numer().to_string().parse::<f64>().unwrap_or(f64::NAN);
        let d = y.denom().to_string().parse::<f64>().unwrap_or(f64::NAN);
        (n / d) * 2f64.powi(shift as i32)
    }
}

// ---------------------------------------------------------------------------
// Truncated upper-covering audit
// ---------------------------------------------------------------------------

/// Certified log2 bracket of a positive integer.  The mantissa truncation
/// and f64 log error are covered by a 2^-40 outward margin (f64 log2 of an
/// exactly representable 53-bit integer is correctly rounded to ~1 ulp).
fn log2_bracket(n: &Int) -> (f64, f64) {
    debug_assert!(n.is_positive());
    use num_traits::ToPrimitive;
    let bits = bit_len(n);
    const MARGIN: f64 = 1e-11;
    if bits <= 53 {
        let v = n.to_u64().unwrap() as f64;
        let l = v.log2();
        return (l - MARGIN, l + MARGIN);
    }
    let shift = bits - 53;
    let top: Int = n >> shift;
    let m = top.to_u64().unwrap() as f64;
    let l_lo = m.log2() + shift as f64;
    // n < (top + 1) * 2^shift
    let l_hi = (m + 1.0).log2() + shift as f64;
    (l_lo - MARGIN, l_hi + MARGIN)
}

fn log2_rat_bracket(x: &Rat) -> (f64, f64) {
    let (nl, nh) = log2_bracket(x.numer());
    let (dl, dh) = log2_bracket(x.denom());
    (nl - dh, nh - dl)
}

#[derive(Clone, Debug)]
pub struct AuditShell {
    /// z heights in [2^k, 2^(k+1))
    pub k: u32,
    pub count: u64,
    /// bracket of the shell sum of diam^s in log2
    pub sum_log2: (f64, f64),
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub cutoff: Int,
    pub n_members: u64,
    /// bracket of sum diam(z)^s / diam(x)^s in log2 (certified floats)
    pub ratio_log2: (f64, f64),
    pub ratio_below_one: bool,
    pub shells: Vec<AuditShell>,
    /// Lemma 4.3 reference exponents for the tail diagnostic
    pub a_exp: Rat,
    pub b_exp: Rat,
}

/// Truncated enumeration of the accelerated covering family and the partial
/// sum of ball diameters to the power s, compared against diam B(x)^s.
///
/// The family is treated as a multiset over (y, z) incidences: the union over
/// y can only be smaller, so a partial-sum ratio below 1 is sound evidence.
pub fn upper_covering_audit(
    x: &PrimitiveVector,
    mu: &Rat,
    s: &Rat,
    gamma: &Rat,
    ball_c: &Rat,
    cutoff: &Int,
) -> Result<AuditReport> {
    use num_traits::ToPrimitive;
    let lat = FareyLattice::new(x);
    // precondition: lam1(x) <= |x|^-mu, certified exactly
    let q_mu = PowerProduct::sqrt_of(lat.lam1_sq.clone())
        .le(&x.height_pow(&-mu.clone()))?;
    if !q_mu {
        return Err(Error::Domain(format!("{} is not in Q_mu", x)));
    }
    let q = x.q.to_i64().ok_or_else(|| {
        Error::Domain("audit roots must have machine-sized heights".into())
    })?;
    let cutoff_i = cutoff
        .to_i64()
        .ok_or_else(|| Error::Domain("audit cutoff must be machine-sized".into()))?;
    let one = Rat::one();
    let om = &one - mu;
    // diam B(z)^s with B = B_{mu,gamma}: radius = c / (lam2^((1-g) mu) |z|^((mu-1) mu g + 1))^(1/(1-mu));
    // log2 diam^s = s [log2(2c) - (((1-g) mu)/2 log2(lam2_sq) + ((mu-1) mu g + 1) log2 |z|) / (1-mu)]
    let s_f = rat_to_f64(s);
    let e_lam = rat_to_f64(&((&one - gamma) * mu / &om)) / 2.0; // applied to log2(lam2_sq)
    let e_h = rat_to_f64(&(((mu - &one) * mu * gamma + &one) / &om));
    let log2c = log2_rat_bracket(&(rat(2, 1) * ball_c));
    // tail-lemma reference exponents with a = (1-gamma) mu t and
    // b = (1 + gamma (mu-1) mu) t at t = s/(1-mu):
    // A = (b-1)/(1-mu) - a - 2,  B = mu (b-1)/(1-mu) - a - 1 + b
    let t = s / &om;
    let a_small = (&one - gamma) * mu * &t;
    let b_small = (&one + gamma * (mu - &one) * mu) * &t;
    let a_exp = (&b_small - &one) / &om - &a_small - rat(2, 1);
    let b_exp = mu * (&b_small - &one) / &om - &a_small - &one + &b_small;

    // enumerate E(x) via alpha = a u1 + b u2 (b != 0), then y = lift + k x
    let scaled_u1 = [lat.v1[0].to_i64().unwrap(), lat.v1[1].to_i64().unwrap()];
    let scaled_u2 = [lat.v2[0].to_i64().unwrap(), lat.v2[1].to_i64().unwrap()];
    let w1: [i64; 3] = [
        lat.w1[0].to_i64().unwrap(),
        lat.w1[1].to_i64().unwrap(),
        lat.w1[2].to_i64().unwrap(),
    ];
    let w2: [i64; 3] = [
        lat.w2[0].to_i64().unwrap(),
        lat.w2[1].to_i64().unwrap(),
        lat.w2[2].to_i64().unwrap(),
    ];
    let x3 = [
        x.p1.to_i64().unwrap(),
        x.p2.to_i64().unwrap(),
        q,
    ];
    // |alpha|^2 q^2 <= cutoff^(2(1-mu)) bounds the coefficient box
    let md: u32 = mu.denom().to_i64().unwrap() as u32;
    let mn: i64 = mu.numer().to_i64().unwrap();
    // cap_alpha_sq_q2 = cutoff^(2(1-mu)): exact integer ceiling via roots
    let cap_pow = Int::from(cutoff_i).pow(2 * (md as u32) - 2 * mn as u32);
    // alpha_sq * q^2 <= cap ^(1/md) scaled: compare (alpha_sq q^2)^md <= cutoff^(2(md-mn))
    let cap = cap_pow;

    let mut shells: Vec<(u64, f64, f64)> = vec![(0, f64::NEG_INFINITY, f64::NEG_INFINITY); 64];
    let mut n_members: u64 = 0;
    // iterate coefficient pairs (ca, cb) of alpha in the reduced basis
    let max_cb = 64i64; // |alpha| grows with |cb|; window emptiness prunes
    'outer_b: for cb in 1..=max_cb {
        let mut any_b = false;
        for sign_b in [1i64, -1] {
            let cbv = cb * sign_b;
            let mut ca = 0i64;
            let mut dir_done = [false, false];
            loop {
                // expand ca = 0, 1, -1, 2, -2, ... until window empty both dirs
                let cav = if ca >= 0 { (ca + 1) / 2 } else { 0 } * 0 + ca_seq(ca);
                let scaled_alpha = [
                    cav * scaled_u1[0] + cbv * scaled_u2[0],
                    cav * scaled_u1[1] + cbv * scaled_u2[1],
                ];
                let aq2 = (scaled_alpha[0] as i128) * (scaled_alpha[0] as i128)
                    + (scaled_alpha[1] as i128) * (scaled_alpha[1] as i128);
                // alpha_sq q^2 = aq2 (scaled basis is q * alpha)
                let window_empty = Int::from(aq2).pow(md) > cap;
                if gcd_i64(cav.unsigned_abs(), cbv.unsigned_abs()) == 1 && !window_empty {
                    any_b = true;
                    audit_ray(
                        &x3, &w1, &w2, cav, cbv, aq2, q, cutoff_i, mu, md, mn, s_f, e_lam,
                        e_h, log2c, &mut shells, &mut n_members,
                    );
                }
                if window_empty {
                    if ca >= 0 {
                        dir_done[0] = true;
                    } else {
                        dir_done[1] = true;
                    }
                }
                if dir_done[0] && dir_done[1] {
                    break;
                }
                ca = next_ca(ca, &dir_done);
            }
        }
        if !any_b {
            break 'outer_b;
        }
    }
    // diam B(x)^s in log2
    let lam2_lb = log2_rat_bracket(&lat.lam2_sq);
    let own_lo = s_f * (log2c.0 - (e_lam * lam2_lb.1 + e_h * (q as f64).log2()) - 1e-9);
    let own_hi = s_f * (log2c.1 - (e_lam * lam2_lb.0 + e_h * (q as f64).log2()) + 1e-9);
    // total
    let mut total_lo = f64::NEG_INFINITY;
    let mut total_hi = f64::NEG_INFINITY;
    let mut shell_rows = Vec::new();
    for (k, row) in shells.iter().enumerate() {
        if row.0 == 0 {
            continue;
        }
        shell_rows.push(AuditShell {
            k: k as u32,
            count: row.0,
            sum_log2: (row.1, row.2),
        });
        total_lo = log2_add(total_lo, row.1);
        total_hi = log2_add(total_hi, row.2);
    }
    let ratio = (total_lo - own_hi, total_hi - own_lo);
    Ok(AuditReport {
        cutoff: cutoff.clone(),
        n_members,
        ratio_log2: ratio,
        ratio_below_one: ratio.1 < 0.0,
        shells: shell_rows,
        a_exp,
        b_exp,
    })
}

fn ca_seq(ca: i64) -> i64 {
    ca
}

fn next_ca(ca: i64, done: &[bool; 2]) -> i64 {
    // 0, 1, -1, 2, -2 ... skipping exhausted directions
    let next = if ca >= 0 { -(ca + 1) } else { -ca };
    if next >= 0 && done[0] {
        return -(next + 1);
    }
    if next < 0 && done[1] {
        return -next;
    }
    next
}

fn gcd_i64(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd_i64(b, a % b)
    }
}

fn log2_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (1.0 + 2f64.powf(lo - hi)).log2()
}

#[allow(clippy::too_many_arguments)]
fn audit_ray(
    x3: &[i64; 3],
    w1: &[i64; 3],
    w2: &[i64; 3],
    ca: i64,
    cb: i64,
    aq2: i128,
    q: i64,
    cutoff: i64,
    mu: &Rat,
    md: u32,
    mn: i64,
    s_f: f64,
    e_lam: f64,
    e_h: f64,
    log2c: (f64, f64),
    shells: &mut [(u64, f64, f64)],
    n_members: &mut u64,
) {
    // y window: v >= (|alpha| q)^(1/(1-mu)): v^(2(md-mn)) >= aq2^md
    let rexp = 2 * (md as i64 - mn) as u32;
    let w = Int::from(aq2).pow(md);
    let mut v_lo = nth_root_floor(&w, rexp);
    while pow_int(&v_lo, rexp) < w {
        v_lo += 1;
    }
    use num_traits::ToPrimitive;
    let v_lo = match v_lo.to_i64() {
        Some(v) => v.max(q + 1),
        None => return,
    };
    if v_lo > cutoff {
        return;
    }
    // lift of alpha: y0 = ca w1 + cb w2, third coordinate reduced mod q
    let mut y0 = [
        ca * w1[0] + cb * w2[0],
        ca * w1[1] + cb * w2[1],
        ca * w1[2] + cb * w2[2],
    ];
    let kk = y0[2].div_euclid(q);
    for i in 0..3 {
        y0[i] -= kk * x3[i];
    }
    // first admissible v >= v_lo congruent to y0[2] mod q
    let mut v = y0[2] + ((v_lo - y0[2]).div_euclid(q)) * q;
    while v < v_lo {
        v += q;
    }
    while v <= cutoff {
        let k = (v - y0[2]) / q;
        let y = [y0[0] + k * x3[0], y0[1] + k * x3[1], v];
        if gcd3_i64(y[0], y[1], y[2]) == 1 {
            // y in E(x) with lam1(y) = |alpha| q / v exactly; enumerate D(y):
            // z = a' x + k' y with |a'| <= 4 v_z / v, v <= v_z <= cutoff,
            // z primitive, z in Q_mu (checked via its own lattice).
            audit_d_family(x3, &y, aq2, q, cutoff, mu, md, mn, s_f, e_lam, e_h, log2c, shells, n_members);
        }
        v += q;
    }
}

fn gcd3_i64(a: i64, b: i64, c: i64) -> u64 {
    gcd_i64(gcd_i64(a.unsigned_abs(), b.unsigned_abs()), c.unsigned_abs())
}

#[allow(clippy::too_many_arguments)]
fn audit_d_family(
    x3: &[i64; 3],
    y: &[i64; 3],
    aq2: i128,
    q: i64,
    cutoff: i64,
    _mu: &Rat,
    md: u32,
    mn: i64,
    s_f: f64,
    e_lam: f64,
    e_h: f64,
    log2c: (f64, f64),
    shells: &mut [(u64, f64, f64)],
    n_members: &mut u64,
) {
    let v_y = y[2];
    // lam1(y)^2 = aq2 / v_y^2 (exact; valid since v_y >= (|alpha| q)^2 by the
    // window exponent 1/(1-mu) >= 2 and |alpha| q >= 1)
    let _ = aq2;
    let a_max = 4 * (cutoff / v_y).max(1);
    for a in -a_max..=a_max {
        // v_z = a q + k v_y in [max(v_y, |a| v_y / 4), cutoff]
        let vz_min_dist = (a.unsigned_abs() as i64).saturating_mul(v_y) / 4;
        let vz_lo = v_y.max(vz_min_dist);
        let base = vz_lo - a * q;
        let mut k = base.div_euclid(v_y);
        while a * q + k * v_y < vz_lo {
            k += 1;
        }
        loop {
            let v_z = a * q + k * v_y;
            if v_z > cutoff {
                break;
            }
            if v_z >= v_y && gcd_i64(a.unsigned_abs(), k.unsigned_abs()) == 1 {
                let z = [
                    a * x3[0] + k * y[0],
                    a * x3[1] + k * y[1],
                    v_z,
                ];
                if gcd3_i64(z[0], z[1], z[2]) == 1 {
                    // distance bound: |a| <= 4 v_z / v_y (f64-free exact)
                    if (a.unsigned_abs() as i128) * (v_y as i128) <= 4 * (v_z as i128) {
                        // z in Q_mu: lam1(z)^2 v_z^(2 mu) <= 1, exact
                        let zpv = PrimitiveVector::new(z[0], z[1], z[2]).expect("nonzero");
                        let zlat = FareyLattice::new(&zpv);
                        let l1 = &zlat.lam1_sq;
                        // (lam1_sq)^md * v_z^(2 mn) <= 1
                        let lhs = pow_rat_i(l1, md as i64)
                            * rat_int(Int::from(v_z).pow(2 * mn as u32));
                        if lhs <= Rat::one() {
                            // diam^s bracket via certified float logs
                            let l2 = log2_rat_bracket(&zlat.lam2_sq);
                            let hz = (v_z as f64).log2();
                            let term_lo =
                                s_f * (log2c.0 - (e_lam * l2.1 + e_h * hz) - 2e-9);
                            let term_hi =
                                s_f * (log2c.1 - (e_lam * l2.0 + e_h * hz) + 2e-9);
                            let shell = 63 - (v_z as u64).leading_zeros() as usize;
                            let row = &mut shells[shell];
                            row.1 = log2_add(row.1, term_lo);
                            row.2 = log2_add(row.2, term_hi);
                            row.0 += 1;
                            *n_members += 1;
                        }
                    }
                }
            }
            k += 1;
        }
    }
}

