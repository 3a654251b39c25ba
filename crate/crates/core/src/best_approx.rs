//! Best simultaneous approximation of a planar target: record sequences,
//! the Legendre-type membership test, inequality verifiers and finite-scale
//! singularity diagnostics.
//!
//! Two record engines share one semantics:
//!   * `best_sequence` — the incremental q-scan (the reference algorithm and
//!     the desk-scale default);
//!   * `best_sequence_solver` — a lattice-era solver (heuristically reduced
//!     basis + exact Fincke-Pohst sweeps) that reaches the tower-of-exponents
//!     heights produced by the self-similar tree.  Oracle-equivalent to the
//!     scan wherever both run.
//!
//! Enclosure targets are handled worst-case: every comparison must be decided
//! identically for all points of the ball, otherwise `EnclosureTooCoarse`.

use crate::arith::*;
use crate::error::{Error, Result};
use crate::interval::{ln_enclosure, QInterval};
use crate::power::PowerProduct;
use crate::rational_geometry::{FareyLattice, PrimitiveVector, QVec2};
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

/// Approximation target: an exact rational pair (radius 0) or a certified
/// closed Euclidean ball around a rational center.
#[derive(Clone, Debug)]
pub struct TargetPoint {
    pub center: QVec2,
    pub radius: Rat,
}

impl TargetPoint {
    pub fn exact(x: Rat, y: Rat) -> Self {
        TargetPoint { center: QVec2::new(x, y), radius: Rat::zero() }
    }

    pub fn enclosure(center: QVec2, radius: Rat) -> Self {
        assert!(!radius.is_negative());
        TargetPoint { center, radius }
    }

    pub fn is_exact(&self) -> bool {
        self.radius.is_zero()
    }
}

/// Rational upper bound for sqrt(x), x >= 0.
pub fn sqrt_upper(x: &Rat) -> Rat {
    assert!(!x.is_negative());
    if x.is_zero() {
        return Rat::zero();
    }
    let s = sqrt_floor(&(x.numer() * x.denom()));
    Rat::new(s + 1, x.denom().clone())
}

/// Rational lower bound for sqrt(x), x >= 0.
pub fn sqrt_lower(x: &Rat) -> Rat {
    assert!(!x.is_negative());
    if x.is_zero() {
        return Rat::zero();
    }
    let s = sqrt_floor(&(x.numer() * x.denom()));
    Rat::new(s, x.denom().clone())
}

/// Interval for (d +- s)^2 given t = d^2 exactly and a slack s >= 0.
fn dist2_slack_interval(t: &Rat, s: &Rat) -> QInterval {
    if s.is_zero() {
        return QInterval::point(t.clone());
    }
    let su = sqrt_upper(t);
    let hi = t + s * s + rat(2, 1) * s * &su;
    let lo_raw = t + s * s - rat(2, 1) * s * &su;
    let lo = if lo_raw.is_negative() { Rat::zero() } else { lo_raw };
    QInterval::new(lo, hi)
}

#[derive(Clone, Debug)]
pub struct BestApproxRecord {
    pub x: PrimitiveVector,
    /// dist(q theta, Z^2)^2; an exact point for exact targets
    pub dist2: QInterval,
}

#[derive(Clone, Debug)]
pub struct BestApproxSequence {
    pub theta: TargetPoint,
    pub records: Vec<BestApproxRecord>,
    pub qmax: Int,
    /// the target is rational and the distance reached exactly zero
    pub terminal: bool,
}

impl BestApproxSequence {
    pub fn denominators(&self) -> Vec<Int> {
        self.records.iter().map(|r| r.x.q.clone()).collect()
    }

    /// D(Q)^2 = min_{q <= Q} dist(q theta, Z^2)^2, from the records.
    pub fn best_dist2_at(&self, q: &Int) -> Option<QInterval> {
        let mut cur: Option<QInterval> = None;
        for r in &self.records {
            if r.x.q <= *q {
                cur = Some(r.dist2.clone());
            } else {
                break;
            }
        }
        cur
    }
}

/// dist(q*theta, Z^2)^2 at the center, together with the lexicographically
/// smallest nearest integer point.
fn center_dist2(theta: &QVec2, q: &Int) -> (Rat, [Int; 2]) {
    let mut p = [Int::zero(), Int::zero()];
    let mut d2 = Rat::zero();
    for (i, c) in [&theta.x, &theta.y].into_iter().enumerate() {
        let m = c * rat_int(q.clone());
        let fl = m.floor().to_integer();
        let rem = &m - rat_int(fl.clone());
        // tie |rem - 1/2| -> floor (lexicographically smaller p)
        let (pi, di) = if rem <= rat(1, 2) { (fl.clone(), rem.clone()) } else { (&fl + 1, Rat::one() - &rem) };
        p[i] = pi;
        d2 = d2 + &di * &di;
    }
    (d2, p)
}

/// Candidate distance-squared interval over the target ball for given (p, q).
fn dist2_interval_for(theta: &TargetPoint, q: &Int, p: &[Int; 2]) -> QInterval {
    let qx = &theta.center.x * rat_int(q.clone()) - rat_int(p[0].clone());
    let qy = &theta.center.y * rat_int(q.clone()) - rat_int(p[1].clone());
    let t = &qx * &qx + &qy * &qy;
    let s = &theta.radius * rat_int(q.clone());
    dist2_slack_interval(&t, &s)
}

/// Uniform-over-the-ball strict comparison new < cur; None when undecided.
fn record_beats(new: &QInterval, cur: &QInterval) -> Option<bool> {
    if new.hi < cur.lo {
        return Some(true);
    }
    if new.lo >= cur.hi {
        return Some(false);
    }
    if new.is_point() && cur.is_point() {
        return Some(new.lo < cur.lo);
    }
    None
}

fn push_record(records: &mut Vec<BestApproxRecord>, q: &Int, p: &[Int; 2], d2: QInterval) -> Result<()> {
    let x = PrimitiveVector::from_ints(p[0].clone(), p[1].clone(), q.clone())?;
    // best approximations are automatically primitive
    debug_assert_eq!(&x.q, q);
    records.push(BestApproxRecord { x, dist2: d2 });
    Ok(())
}

/// Incremental q-scan with early per-coordinate rejection.  The reference
/// record engine; exact targets run on integers over the common denominator.
pub fn best_sequence(theta: &TargetPoint, qmax: &Int) -> Result<BestApproxSequence> {
    if *qmax < Int::one() {
        return Err(Error::Domain("qmax must be >= 1".into()));
    }
    if theta.is_exact() {
        best_sequence_scan_exact(theta, qmax)
    } else {
        best_sequence_scan_ball(theta, qmax)
    }
}

fn best_sequence_scan_exact(theta: &TargetPoint, qmax: &Int) -> Result<BestApproxSequence> {
    // common denominator D: coordinates a1/D, a2/D
    let d = num_integer::lcm(theta.center.x.denom().clone(), theta.center.y.denom().clone());
    let a1 = (&theta.center.x * rat_int(d.clone())).to_integer().mod_floor_pos(&d);
    let a2 = (&theta.center.y * rat_int(d.clone())).to_integer().mod_floor_pos(&d);
    let mut records: Vec<BestApproxRecord> = Vec::new();
    let mut terminal = false;
    let mut r1 = Int::zero();
    let mut r2 = Int::zero();
    let dd = &d * &d;
    let mut best_num: Option<Int> = None; // dist^2 numerator over D^2
    let mut q = Int::zero();
    while q < *qmax {
        q += 1;
        r1 += &a1;
        if r1 >= d {
            r1 -= &d;
        }
        r2 += &a2;
        if r2 >= d {
            r2 -= &d;
        }
        let m1 = (&r1).min(&(&d - &r1)).clone();
        if let Some(b) = &best_num {
            if &m1 * &m1 >= *b {
                continue;
            }
        }
        let m2 = (&r2).min(&(&d - &r2)).clone();
        let num = &m1 * &m1 + &m2 * &m2;
        if best_num.as_ref().map_or(true, |b| num < *b) {
            let (_, p) = center_dist2(&theta.center, &q);
            let d2 = Rat::new(num.clone(), dd.clone());
            push_record(&mut records, &q, &p, QInterval::point(d2))?;
            let zero = num.is_zero();
            best_num = Some(num);
            if zero {
                terminal = true;
                break;
            }
        }
    }
    Ok(BestApproxSequence { theta: theta.clone(), records, qmax: qmax.clone(), terminal })
}

trait ModFloorPos {
    fn mod_floor_pos(&self, m: &Int) -> Int;
}

impl ModFloorPos for Int {
    fn mod_floor_pos(&self, m: &Int) -> Int {
        use num_integer::Integer;
        self.mod_floor(m)
    }
}

fn best_sequence_scan_ball(theta: &TargetPoint, qmax: &Int) -> Result<BestApproxSequence> {
    let mut records: Vec<BestApproxRecord> = Vec::new();
    let mut cur: Option<QInterval> = None;
    let mut q = Int::zero();
    while q < *qmax {
        q += 1;
        let (t, p) = center_dist2(&theta.center, &q);
        let s = &theta.radius * rat_int(q.clone());
        let d2 = dist2_slack_interval(&t, &s);
        let beats = match &cur {
            None => true,
            Some(c) => record_beats(&d2, c).ok_or_else(|| {
                Error::EnclosureTooCoarse(format!(
                    "record comparison at q = {} undecided over the enclosure",
                    q
                ))
            })?,
        };
        if beats {
            ensure_unique_nearest(theta, &q, &p, &d2)?;
            push_record(&mut records, &q, &p, d2.clone())?;
            cur = Some(d2);
        }
    }
    Ok(BestApproxSequence { theta: theta.clone(), records, qmax: qmax.clone(), terminal: false })
}

/// All integer points that could compete with p over the ball must be
/// distinguishable, else the recorded p (and r_n) is ill-defined.
fn ensure_unique_nearest(theta: &TargetPoint, q: &Int, p: &[Int; 2], d2: &QInterval) -> Result<()> {
    if theta.is_exact() {
        return Ok(());
    }
    for dx in -1i64..=1 {
        for dy in -1i64..=1 {
            if dx == 0 && dy == 0 {
                continue;
            }
            let alt = [&p[0] + Int::from(dx), &p[1] + Int::from(dy)];
            let ad2 = dist2_interval_for(theta, q, &alt);
            if ad2.lo <= d2.hi {
                return Err(Error::EnclosureTooCoarse(format!(
                    "nearest lattice point at q = {} not unique over the enclosure",
                    q
                )));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Lattice-era record solver
// ---------------------------------------------------------------------------

/// Quadratic form F(v) = |(v1, v2) - v3*theta|^2 + w*v3^2 on Z^3.
struct RecordForm {
    c1: Rat,
    c2: Rat,
    w: Rat,
}

impl RecordForm {
    fn bilinear(&self, u: &[Int; 3], v: &[Int; 3]) -> Rat {
        let ux = rat_int(u[0].clone()) - rat_int(u[2].clone()) * &self.c1;
        let uy = rat_int(u[1].clone()) - rat_int(u[2].clone()) * &self.c2;
        let vx = rat_int(v[0].clone()) - rat_int(v[2].clone()) * &self.c1;
        let vy = rat_int(v[1].clone()) - rat_int(v[2].clone()) * &self.c2;
        ux * vx + uy * vy + &self.w * rat_int(&u[2] * &v[2])
    }
}

fn add3(a: &[Int; 3], b: &[Int; 3], k: &Int) -> [Int; 3] {
    [&a[0] + k * &b[0], &a[1] + k * &b[1], &a[2] + k * &b[2]]
}

/// Heuristic LLL on a dyadically rounded Gram.  The returned basis is
/// unimodular-equivalent to the input; reducedness is best-effort and the
/// enumeration never relies on it for soundness.
fn heuristic_lll(basis: &mut [[Int; 3]; 3], form: &RecordForm) {
    const BITS: u32 = 192;
    for _ in 0..96 {
        let norm = |v: &[Int; 3]| form.bilinear(v, v);
        // size-reduce with rounded Gram-Schmidt coefficients
        let g00 = norm(&basis[0]);
        if g00.is_zero() {
            break;
        }
        let mut changed = false;
        let mu = (form.bilinear(&basis[1], &basis[0]) / &g00).round_out_bits(BITS);
        let r = round_nearest(&mu);
        if !r.is_zero() {
            basis[1] = add3(&basis[1], &basis[0], &-r);
            changed = true;
        }
        let g11 = norm(&basis[1]);
        if !g11.is_zero() {
            let mu = (form.bilinear(&basis[2], &basis[1]) / &g11).round_out_bits(BITS);
            let r = round_nearest(&mu);
            if !r.is_zero() {
                basis[2] = add3(&basis[2], &basis[1], &-r);
                changed = true;
            }
        }
        let mu = (form.bilinear(&basis[2], &basis[0]) / &g00).round_out_bits(BITS);
        let r = round_nearest(&mu);
        if !r.is_zero() {
            basis[2] = add3(&basis[2], &basis[0], &-r);
            changed = true;
        }
        // order by norm
        if norm(&basis[1]) < norm(&basis[0]) {
            basis.swap(0, 1);
            changed = true;
        }
        if norm(&basis[2]) < norm(&basis[1]) {
            basis.swap(1, 2);
            changed = true;
        }
        if !changed {
            break;
        }
    }
}

trait RoundOutBits {
    fn round_out_bits(&self, bits: u32) -> Rat;
}

impl RoundOutBits for Rat {
    /// Nearest dyadic with `bits` fractional bits (rounding direction
    /// irrelevant here: only used for heuristic reduction).
    fn round_out_bits(&self, bits: u32) -> Rat {
        dyadic_floor(self, bits)
    }
}

/// All nonzero v with F(v) <= bound, by exact Fincke-Pohst over the basis.
fn enumerate_form(
    basis: &[[Int; 3]; 3],
    form: &RecordForm,
    bound: &Rat,
    budget: usize,
) -> Result<Vec<[Int; 3]>> {
    let mut g = [
        [Rat::zero(), Rat::zero(), Rat::zero()],
        [Rat::zero(), Rat::zero(), Rat::zero()],
        [Rat::zero(), Rat::zero(), Rat::zero()],
    ];
    for i in 0..3 {
        for j in 0..=i {
            let v = form.bilinear(&basis[i], &basis[j]);
            g[i][j] = v.clone();
            g[j][i] = v;
        }
    }
    let b1 = g[0][0].clone();
    assert!(b1.is_positive(), "degenerate form");
    let mu21 = &g[1][0] / &b1;
    let b2 = &g[1][1] - &mu21 * &g[1][0];
    assert!(b2.is_positive(), "degenerate form");
    let mu31 = &g[2][0] / &b1;
    let mu32 = (&g[2][1] - &mu31 * &g[1][0]) / &b2;
    let b3 = &g[2][2] - &mu31 * &mu31 * &b1 - &mu32 * &mu32 * &b2;
    assert!(b3.is_positive(), "degenerate form");

    let mut out = Vec::new();
    let m3 = nth_root_floor_rat(&(bound / &b3), 2);
    let mut x3 = -m3.clone();
    while x3 <= m3 {
        let t2 = bound - rat_int(&x3 * &x3) * &b3;
        if !t2.is_negative() {
            let c2 = -(&mu32 * rat_int(x3.clone()));
            let s2 = sqrt_upper(&(&t2 / &b2));
            let lo2 = (&c2 - &s2).ceil().to_integer();
            let hi2 = (&c2 + &s2).floor().to_integer();
            let mut x2 = lo2.clone();
            while x2 <= hi2 {
                let off2 = rat_int(x2.clone()) - &c2;
                let t1 = &t2 - &off2 * &off2 * &b2;
                if !t1.is_negative() {
                    let c1 = -(&mu21 * rat_int(x2.clone())) - (&mu31 * rat_int(x3.clone()));
                    let s1 = sqrt_upper(&(&t1 / &b1));
                    let lo1 = (&c1 - &s1).ceil().to_integer();
                    let hi1 = (&c1 + &s1).floor().to_integer();
                    let mut x1 = lo1.clone();
                    while x1 <= hi1 {
                        if !(x1.is_zero() && x2.is_zero() && x3.is_zero()) {
                            let v = [
                                &x1 * &basis[0][0] + &x2 * &basis[1][0] + &x3 * &basis[2][0],
                                &x1 * &basis[0][1] + &x2 * &basis[1][1] + &x3 * &basis[2][1],
                                &x1 * &basis[0][2] + &x2 * &basis[1][2] + &x3 * &basis[2][2],
                            ];
                            if form.bilinear(&v, &v) <= *bound {
                                out.push(v);
                                if out.len() > budget {
                                    return Err(Error::BudgetExceeded(format!(
                                        "form enumeration exceeded {} candidates",
                                        budget
                                    )));
                                }
                            }
                        }
                        x1 += 1;
                    }
                }
                x2 += 1;
            }
        }
        x3 += 1;
    }
    Ok(out)
}

/// Record engine for huge qmax: per era, one reduced-basis enumeration finds
/// every (p, q) that can still beat the current record inside the window.
///
/// Ball targets with very deep rational centers are first rounded to a dyadic
/// center with a correspondingly enlarged radius: the rounded ball contains
/// the original one, so a record sequence decided uniformly over it is also
/// uniform over the original target.  On `EnclosureTooCoarse` the rounding is
/// refined, falling back to the exact center.
pub fn best_sequence_solver(theta: &TargetPoint, qmax: &Int) -> Result<BestApproxSequence> {
    if !theta.radius.is_zero() {
        let qb = bit_len(qmax) as u32;
        let mut bits = 3 * qb + 384;
        for _ in 0..3 {
            let cx = dyadic_floor(&theta.center.x, bits);
            let cy = dyadic_floor(&theta.center.y, bits);
            let slop = Rat::new(Int::from(2), Int::one() << bits);
            let rounded = TargetPoint::enclosure(
                QVec2::new(cx, cy),
                &theta.radius + slop,
            );
            match best_sequence_solver_raw(&rounded, qmax) {
                Ok(mut seq) => {
                    seq.theta = theta.clone();
                    return Ok(seq);
                }
                Err(Error::EnclosureTooCoarse(_)) => {
                    bits *= 2;
                    continue;
                }
                Err(e) => return Err(e),
            }
        }
    }
    best_sequence_solver_raw(theta, qmax)
}

fn best_sequence_solver_raw(theta: &TargetPoint, qmax: &Int) -> Result<BestApproxSequence> {
    if *qmax < Int::one() {
        return Err(Error::Domain("qmax must be >= 1".into()));
    }
    let mut records: Vec<BestApproxRecord> = Vec::new();
    let mut terminal = false;

    let one = Int::one();
    let (t0, p0) = center_dist2(&theta.center, &one);
    let d0 = dist2_slack_interval(&t0, &theta.radius);
    ensure_unique_nearest(theta, &one, &p0, &d0)?;
    push_record(&mut records, &one, &p0, d0.clone())?;
    if theta.is_exact() && d0.lo.is_zero() {
        return Ok(BestApproxSequence { theta: theta.clone(), records, qmax: qmax.clone(), terminal: true });
    }
    let mut q_done = one.clone();
    let mut cur = d0;
    // warm-started across eras: each era's form differs only in the weight
    let mut basis = [
        [Int::one(), Int::zero(), Int::zero()],
        [Int::zero(), Int::one(), Int::zero()],
        [Int::zero(), Int::zero(), Int::one()],
    ];

    while q_done < *qmax && !terminal {
        let mut window = (&q_done * Int::from(16)).min(qmax.clone());
        loop {
            let r_up = sqrt_upper(&cur.hi);
            let slack = &theta.radius * rat_int(window.clone());
            let reach = &r_up + rat(2, 1) * &slack;
            let w = (&reach / rat_int(window.clone())) * (&reach / rat_int(window.clone()));
            let bound = rat(2, 1) * &reach * &reach;
            let form = RecordForm { c1: theta.center.x.clone(), c2: theta.center.y.clone(), w };
            heuristic_lll(&mut basis, &form);
            let cands = enumerate_form(&basis, &form, &bound, 2_000_000)?;

            let mut by_q: Vec<([Int; 2], Int)> = Vec::new();
            for v in cands {
                let (p, q) = if v[2].is_positive() {
                    ([v[0].clone(), v[1].clone()], v[2].clone())
                } else if v[2].is_negative() {
                    ([-v[0].clone(), -v[1].clone()], -v[2].clone())
                } else {
                    continue;
                };
                if q > q_done && q <= window {
                    by_q.push((p, q));
                }
            }
            by_q.sort_by(|a, b| (&a.1, &a.0[0], &a.0[1]).cmp(&(&b.1, &b.0[0], &b.0[1])));
            by_q.dedup();

            let mut advanced = false;
            let mut i = 0;
            while i < by_q.len() {
                let q = by_q[i].1.clone();
                let mut best: Option<([Int; 2], QInterval)> = None;
                while i < by_q.len() && by_q[i].1 == q {
                    let p = by_q[i].0.clone();
                    let d2 = dist2_interval_for(theta, &q, &p);
                    match &best {
                        None => best = Some((p, d2)),
                        Some((bp, bd)) => match record_beats(&d2, bd) {
                            Some(true) => best = Some((p, d2)),
                            Some(false) => {
                                if theta.is_exact() && d2.lo == bd.lo && (&p[0], &p[1]) < (&bp[0], &bp[1]) {
                                    best = Some((p, d2));
                                }
                            }
                            None => {
                                return Err(Error::EnclosureTooCoarse(format!(
                                    "nearest point at q = {} ambiguous over enclosure",
                                    q
                                )))
                            }
                        },
                    }
                    i += 1;
                }
                let (p, d2) = best.unwrap();
                let beats = record_beats(&d2, &cur).ok_or_else(|| {
                    Error::EnclosureTooCoarse(format!(
                        "record comparison at q = {} undecided over the enclosure",
                        q
                    ))
                })?;
                if beats {
                    ensure_unique_nearest(theta, &q, &p, &d2)?;
                    let zero = theta.is_exact() && d2.lo.is_zero();
                    push_record(&mut records, &q, &p, d2.clone())?;
                    cur = d2;
                    advanced = true;
                    if zero {
                        terminal = true;
                        break;
                    }
                }
            }
            q_done = window.clone();
            if terminal || q_done == *qmax || advanced {
                break;
            }
            window = (&window * Int::from(64)).min(qmax.clone());
        }
    }
    Ok(BestApproxSequence { theta: theta.clone(), records, qmax: qmax.clone(), terminal })
}

// ---------------------------------------------------------------------------
// Classifiers and verifiers
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    /// theta in the closed ball B(xhat, lam1/(2|x|)): x is a best approximation
    Inner,
    /// theta outside B(xhat, 2 lam1/|x|): x is not a best approximation
    Outer,
    Between,
}

/// Legendre-type classification, decided on squared distances.
pub fn legendre_classify(x: &PrimitiveVector, theta: &TargetPoint) -> Result<Classification> {
    let lat = FareyLattice::new(x);
    let qq = rat_int(&x.q * &x.q);
    let inner = &lat.lam1_sq / (rat(4, 1) * &qq);
    let outer = rat(4, 1) * &lat.lam1_sq / &qq;
    let t = x.hat().dist_sq(&theta.center);
    let d2 = dist2_slack_interval(&t, &theta.radius);
    if d2.hi <= inner {
        return Ok(Classification::Inner);
    }
    if d2.lo >= outer {
        return Ok(Classification::Outer);
    }
    if d2.lo > inner && d2.hi < outer {
        return Ok(Classification::Between);
    }
    Err(Error::EnclosureTooCoarse(
        "legendre classification straddles a ball boundary".into(),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckStatus {
    Pass,
    Fail,
    Undecided,
}

#[derive(Clone, Debug)]
pub struct Bai3Report {
    /// (n, status) for |xhat_n - xhat_{n+1}| < 4 lam1(x_{n+1})/|x_n|
    pub consecutive: Vec<(usize, CheckStatus)>,
    /// (n, k, status) for |xhat_n - xhat_{n+k}| < 4 lam1(x_n)/|x_n|
    pub forward: Vec<(usize, usize, CheckStatus)>,
    /// (m, n, status) for |p - q theta| within factor 2 of |p - q xhat_n|,
    /// sampled over earlier records (p, q) = x_m, m < n
    pub comparability: Vec<(usize, usize, CheckStatus)>,
}

impl Bai3Report {
    pub fn violations(&self) -> usize {
        self.consecutive.iter().filter(|(_, s)| *s == CheckStatus::Fail).count()
            + self.forward.iter().filter(|(_, _, s)| *s == CheckStatus::Fail).count()
            + self.comparability.iter().filter(|(_, _, s)| *s == CheckStatus::Fail).count()
    }

    pub fn undecided(&self) -> usize {
        self.consecutive.iter().filter(|(_, s)| *s == CheckStatus::Undecided).count()
            + self.forward.iter().filter(|(_, _, s)| *s == CheckStatus::Undecided).count()
            + self.comparability.iter().filter(|(_, _, s)| *s == CheckStatus::Undecided).count()
    }
}

/// Checks the three best-approximation inequalities on a computed sequence.
pub fn verify_bai3(seq: &BestApproxSequence) -> Bai3Report {
    let recs = &seq.records;
    let mut report = Bai3Report { consecutive: Vec::new(), forward: Vec::new(), comparability: Vec::new() };
    let lam1: Vec<Rat> = recs.iter().map(|r| FareyLattice::new(&r.x).lam1_sq).collect();
    for n in 0..recs.len() {
        for m in (n + 1)..recs.len() {
            let d2 = recs[n].x.hat().dist_sq(&recs[m].x.hat());
            let qn = &recs[n].x.q;
            if m == n + 1 {
                let bound = rat(16, 1) * &lam1[m] / rat_int(qn * qn);
                let st = if d2 < bound { CheckStatus::Pass } else { CheckStatus::Fail };
                report.consecutive.push((n, st));
            }
            let bound = rat(16, 1) * &lam1[n] / rat_int(qn * qn);
            let st = if d2 < bound { CheckStatus::Pass } else { CheckStatus::Fail };
            report.forward.push((n, m - n, st));
        }
    }
    for n in 1..recs.len() {
        let xn_hat = recs[n].x.hat();
        for m in 0..n {
            let p = [recs[m].x.p1.clone(), recs[m].x.p2.clone()];
            let q = recs[m].x.q.clone();
            let bx = rat_int(p[0].clone()) - rat_int(q.clone()) * &xn_hat.x;
            let by = rat_int(p[1].clone()) - rat_int(q.clone()) * &xn_hat.y;
            let b2 = &bx * &bx + &by * &by;
            let a2 = dist2_interval_for(&seq.theta, &q, &p);
            // (1/2) b <= a <= 2 b, on squares: b2/4 <= a2 <= 4 b2
            let lo_ok = a2.lo >= &b2 / rat(4, 1);
            let hi_ok = a2.hi <= rat(4, 1) * &b2;
            let lo_bad = a2.hi < &b2 / rat(4, 1);
            let hi_bad = a2.lo > rat(4, 1) * &b2;
            let st = if lo_ok && hi_ok {
                CheckStatus::Pass
            } else if lo_bad || hi_bad {
                CheckStatus::Fail
            } else {
                CheckStatus::Undecided
            };
            report.comparability.push((m, n, st));
        }
    }
    report
}

/// One row of the uniform-exponent profile.
#[derive(Clone, Debug)]
pub struct ProfileRow {
    pub q: Int,
    pub best_dist2: Option<QInterval>,
    /// -log D(Q) / log Q as a certified enclosure; None when D = 0 (rational
    /// target beyond its terminal denominator: the estimate is infinite)
    pub omega_hat: Option<QInterval>,
}

/// D(Q) and local uniform-exponent estimates over a grid, with the
/// monotone-envelope summary inf over the tail.
pub fn exponent_profile(
    seq: &BestApproxSequence,
    grid: &[Int],
) -> Result<(Vec<ProfileRow>, Option<QInterval>)> {
    let mut rows = Vec::new();
    for q in grid {
        if *q < Int::one() || q > &seq.qmax {
            return Err(Error::Domain(format!("grid point {} outside [1, qmax]", q)));
        }
        let d2 = seq.best_dist2_at(q);
        let omega = match &d2 {
            None => None,
            Some(iv) => {
                if iv.lo.is_zero() || *q == Int::one() {
                    None
                } else {
                    let ln_d2 = QInterval::new(ln_enclosure(&iv.lo, 96).lo, ln_enclosure(&iv.hi, 96).hi);
                    let ln_q = ln_enclosure(&rat_int(q.clone()), 96);
                    Some(ln_d2.scale(&rat(-1, 2)).div(&ln_q).expect("ln q > 0 for q >= 2"))
                }
            }
        };
        rows.push(ProfileRow { q: q.clone(), best_dist2: d2, omega_hat: omega });
    }
    // monotone envelope: inf over the tail of the estimates
    let mut envelope: Option<QInterval> = None;
    for row in rows.iter().rev() {
        if let Some(o) = &row.omega_hat {
            envelope = Some(match envelope {
                None => o.clone(),
                Some(e) => QInterval::new(
                    if o.lo < e.lo { o.lo.clone() } else { e.lo },
                    if o.hi < e.hi { o.hi.clone() } else { e.hi },
                ),
            });
        }
    }
    Ok((rows, envelope))
}

#[derive(Clone, Debug)]
pub struct WitnessRow {
    pub n: usize,
    pub q: Int,
    /// lam1(x_n) <= |x_n|^(-mu), certified exact
    pub lambda_bound: CheckStatus,
    /// lam1(x_n) <= |q_{n-1} xhat_n - p_{n-1}| <= |x_n|^(-mu)
    pub sandwich: CheckStatus,
}

/// Certified per-record singularity check at exponent mu.
pub fn singular_witness(
    seq: &BestApproxSequence,
    mu: &Rat,
    n_range: std::ops::Range<usize>,
) -> Result<Vec<WitnessRow>> {
    if n_range.end > seq.records.len() {
        return Err(Error::Domain(format!(
            "witness range ..{} exceeds {} records",
            n_range.end,
            seq.records.len()
        )));
    }
    let mut rows = Vec::new();
    for n in n_range {
        let rec = &seq.records[n];
        let lat = FareyLattice::new(&rec.x);
        let q = rec.x.q.clone();
        let lhs = PowerProduct::from_rat(lat.lam1_sq.clone());
        let rhs = PowerProduct::from_pow(rat_int(q.clone()), rat(-2, 1) * mu);
        let lambda_bound = match lhs.try_cmp(&rhs) {
            Ok(Ordering::Greater) => CheckStatus::Fail,
            Ok(_) => CheckStatus::Pass,
            Err(_) => CheckStatus::Undecided,
        };
        let sandwich = if n == 0 {
            CheckStatus::Undecided
        } else {
            let prev = &seq.records[n - 1].x;
            let hat = rec.x.hat();
            let mx = rat_int(prev.p1.clone()) - rat_int(prev.q.clone()) * &hat.x;
            let my = rat_int(prev.p2.clone()) - rat_int(prev.q.clone()) * &hat.y;
            let m2 = &mx * &mx + &my * &my;
            let left = lat.lam1_sq <= m2;
            match PowerProduct::from_rat(m2.clone()).try_cmp(&rhs) {
                Ok(Ordering::Greater) => CheckStatus::Fail,
                Ok(_) => {
                    if left {
                        CheckStatus::Pass
                    } else {
                        CheckStatus::Fail
                    }
                }
                Err(_) => CheckStatus::Undecided,
            }
        };
        rows.push(WitnessRow { n, q, lambda_bound, sandwich });
    }
    Ok(rows)
}

/// Certified check that D(Q) <= Q^(-mu) for every integer Q in [q_lo, q_hi]:
/// on each record-constancy interval the bound is tested at the right end.
pub fn uniform_decay_check(
    seq: &BestApproxSequence,
    mu: &Rat,
    q_lo: &Int,
    q_hi: &Int,
) -> Result<bool> {
    if q_hi > &seq.qmax {
        return Err(Error::Domain("q_hi beyond computed qmax".into()));
    }
    let recs = &seq.records;
    for (i, r) in recs.iter().enumerate() {
        let next_q = if i + 1 < recs.len() {
            recs[i + 1].x.q.clone() - 1
        } else {
            seq.qmax.clone()
        };
        let lo = (&r.x.q).max(q_lo).clone();
        let hi = next_q.min(q_hi.clone());
        if lo > hi {
            continue;
        }
        if r.dist2.hi.is_zero() {
            continue;
        }
        let lhs = PowerProduct::from_rat(r.dist2.hi.clone());
        let rhs = PowerProduct::from_pow(rat_int(hi), rat(-2, 1) * mu);
        if lhs.try_cmp(&rhs)? == Ordering::Greater {
            return Ok(false);
        }
    }
    // the range must start at or after the first record
    Ok(recs.first().map_or(false, |r| &r.x.q <= q_lo))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(a: (i64, i64), b: (i64, i64)) -> TargetPoint {
        TargetPoint::exact(rat(a.0, a.1), rat(b.0, b.1))
    }

    #[test]
    fn half_half_terminates() {
        let seq = best_sequence(&exact((1, 2), (1, 2)), &Int::from(10)).unwrap();
        assert_eq!(seq.denominators(), vec![Int::from(1), Int::from(2)]);
        assert!(seq.terminal);
        assert!(seq.records[1].dist2.lo.is_zero());
    }

    #[test]
    fn five_eighths_records() {
        let seq = best_sequence(&exact((5, 8), (0, 1)), &Int::from(10)).unwrap();
        assert_eq!(seq.denominators(), vec![Int::from(1), Int::from(2), Int::from(3), Int::from(8)]);
        let r2: Vec<Rat> = seq.records.iter().map(|r| r.dist2.lo.clone()).collect();
        assert_eq!(r2, vec![rat(9, 64), rat(4, 64), rat(1, 64), rat(0, 64)]);
        assert!(seq.terminal);
    }

    #[test]
    fn solver_equals_scan_on_rationals() {
        for (a, b) in [((3, 7), (2, 7)), ((5, 8), (0, 1)), ((13, 29), (7, 31))] {
            let t = exact(a, b);
            let scan = best_sequence(&t, &Int::from(500)).unwrap();
            let solved = best_sequence_solver(&t, &Int::from(500)).unwrap();
            assert_eq!(scan.denominators(), solved.denominators(), "target {:?}", (a, b));
            for (r, s) in scan.records.iter().zip(solved.records.iter()) {
                assert_eq!(r.x, s.x);
                assert_eq!(r.dist2.lo, s.dist2.lo);
            }
            assert_eq!(scan.terminal, solved.terminal);
        }
    }

    #[test]
    fn monotonicity() {
        let seq = best_sequence(&exact((355, 1130), (113, 997)), &Int::from(2000)).unwrap();
        for w in seq.records.windows(2) {
            assert!(w[0].x.q < w[1].x.q);
            assert!(w[0].dist2.lo > w[1].dist2.lo);
        }
    }

    #[test]
    fn legendre_examples() {
        let x = PrimitiveVector::new(1, 0, 2).unwrap();
        assert_eq!(legendre_classify(&x, &exact((1, 2), (0, 1))).unwrap(), Classification::Inner);
        // distance 1 >= 2 lam1/|x| = 1/2: outer
        assert_eq!(legendre_classify(&x, &exact((3, 2), (0, 1))).unwrap(), Classification::Outer);
        // boundary of the closed inner ball: lam1/(2|x|) = 1/8
        assert_eq!(legendre_classify(&x, &exact((5, 8), (0, 1))).unwrap(), Classification::Inner);
    }

    #[test]
    fn bai3_clean_on_rational_targets() {
        let seq = best_sequence(&exact((5, 8), (0, 1)), &Int::from(100)).unwrap();
        let rep = verify_bai3(&seq);
        assert_eq!(rep.violations(), 0);
        assert_eq!(rep.undecided(), 0);
        let seq1 = best_sequence(&exact((0, 1), (0, 1)), &Int::from(5)).unwrap();
        let rep1 = verify_bai3(&seq1);
        assert_eq!(rep1.violations(), 0);
        assert!(rep1.consecutive.is_empty());
    }

    #[test]
    fn profile_five_eighths() {
        let seq = best_sequence(&exact((5, 8), (0, 1)), &Int::from(10)).unwrap();
        let grid = vec![Int::from(4), Int::from(9)];
        let (rows, _) = exponent_profile(&seq, &grid).unwrap();
        assert_eq!(rows[0].best_dist2.as_ref().unwrap().lo, rat(1, 64));
        // beyond the terminal denominator D = 0: infinite estimate flag
        assert!(rows[1].omega_hat.is_none());
        assert!(rows[1].best_dist2.as_ref().unwrap().lo.is_zero());
    }

    #[test]
    fn witness_rational_degenerates() {
        // rational targets cannot witness singularity for all large n: the
        // record sequence terminates (distance exactly zero) and no records
        // exist past the denominator
        let seq = best_sequence(&exact((5, 8), (0, 1)), &Int::from(10_000)).unwrap();
        assert!(seq.terminal);
        assert_eq!(seq.records.last().unwrap().x.q, Int::from(8));
        let rows = singular_witness(&seq, &rat(3, 5), 0..seq.records.len()).unwrap();
        assert_eq!(rows.len(), 4);
        // a generic rational target does fail the lambda bound on an early
        // record: x_1 = (1,1,2) for theta = (3/7, 2/7) has lam1^2 = 1/2
        let seq2 = best_sequence(&exact((3, 7), (2, 7)), &Int::from(10)).unwrap();
        let rows2 = singular_witness(&seq2, &rat(3, 5), 0..seq2.records.len()).unwrap();
        assert!(rows2.iter().any(|r| r.lambda_bound == CheckStatus::Fail));
    }

    #[test]
    fn golden_ratio_fibonacci() {
        // theta = (phi - 1, 0): enclosure from consecutive Fibonacci ratios,
        // phi - 1 lies between F22/F23 and F21/F22
        let lo = rat(17711, 28657);
        let hi = rat(10946, 17711);
        let center = (&lo + &hi) / rat(2, 1);
        let radius = (&hi - &lo) / rat(2, 1);
        let t = TargetPoint::enclosure(QVec2::new(center, rat(0, 1)), radius);
        let seq = best_sequence(&t, &Int::from(500)).unwrap();
        let expect = [1i64, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144, 233, 377];
        let got = seq.denominators();
        assert_eq!(got.len(), expect.len());
        for (g, e) in got.iter().zip(expect.iter()) {
            assert_eq!(g, &Int::from(*e));
        }
        // solver agrees on the enclosure target as well
        let solved = best_sequence_solver(&t, &Int::from(500)).unwrap();
        assert_eq!(solved.denominators(), got);
        // the (c, 0) embedding is 1-dimensional: D(Q) ~ Q^-1/sqrt(5), so the
        // decay bound holds even at mu = 0.95
        assert!(uniform_decay_check(&seq, &rat(19, 20), &Int::from(10), &Int::from(400)).unwrap());
    }

    #[test]
    fn nondegenerate_bad_pair_decay_fails() {
        // (sqrt(2)-1, sqrt(3)-1): a nondegenerate pair with D(Q) ~ Q^(-1/2);
        // the uniform bound at mu = 0.7 must fail well before Q = 10^3
        let s2 = crate::interval::sqrt_enclosure(&rat(2, 1), 140);
        let s3 = crate::interval::sqrt_enclosure(&rat(3, 1), 140);
        let center = QVec2::new(s2.mid() - rat(1, 1), s3.mid() - rat(1, 1));
        let radius = s2.width() + s3.width();
        let t = TargetPoint::enclosure(center, radius);
        let seq = best_sequence(&t, &Int::from(2000)).unwrap();
        assert!(!uniform_decay_check(&seq, &rat(7, 10), &Int::from(10), &Int::from(1500)).unwrap());
        // while a sub-Dirichlet exponent passes
        assert!(uniform_decay_check(&seq, &rat(1, 4), &Int::from(10), &Int::from(1500)).unwrap());
    }

    #[test]
    fn coarse_enclosure_errors() {
        let t = TargetPoint::enclosure(QVec2::new(rat(1, 3), rat(1, 7)), rat(1, 20));
        let r = best_sequence(&t, &Int::from(100));
        assert!(matches!(r, Err(Error::EnclosureTooCoarse(_))));
    }
}
