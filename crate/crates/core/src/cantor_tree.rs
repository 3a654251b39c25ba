//! The strictly nested self-similar structure of prescribed uniform exponent:
//! first-level points E1(x), line families D1(y), certified node verification,
//! the distorted tiling of B(x), breadth-limited tree building, extraction of
//! certified singular targets, mass distribution on cylinders, and exact
//! cardinality counting for the scaling audits.
//!
//! Every "for |x| large enough" of the underlying lemmas is replaced by a
//! per-node certified check; a failed check is a typed error or an explicit
//! report entry, never a silent pass.

use crate::arith::*;
use crate::best_approx::TargetPoint;
use crate::error::{Error, Result};
use crate::exponents::{node_exponents, NodeExponents};
use crate::interval::QInterval;
use crate::power::{sum_le, PowerProduct};
use crate::rational_geometry::*;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

/// Frozen parameter pack.  c0 = 32^(1/(1-mu)) is never materialized as a
/// number: the E1 window tests fold it into exact integer power comparisons.
/// c1..c4 are adaptive dyadics frozen from the root generation.
#[derive(Clone, Debug)]
pub struct TreeParams {
    pub mu: Rat,
    pub b: Rat,
    pub exps: NodeExponents,
    pub c1: Rat,
    pub c2: Rat,
    pub c3: Rat,
    pub c4: Rat,
    pub min_height: Int,
    pub witness_cap: usize,
    pub child_cap: usize,
    /// lambda-band constant is 2^band_bits (default 6)
    pub band_bits: u32,
    /// packing-containment constant k < 1
    pub packing_k: Rat,
}

impl TreeParams {
    /// c0 as an exact power quantity.
    pub fn c0(&self) -> PowerProduct {
        let one_minus_mu = Rat::one() - &self.mu;
        PowerProduct::from_pow(rat(32, 1), one_minus_mu.recip())
    }

    /// Ball radius of B(x): c2 |x|^r0.
    pub fn ball_radius(&self, x: &PrimitiveVector) -> PowerProduct {
        x.height_pow(&self.exps.r0).scale(&self.c2)
    }

    /// Packing ball radius of B'(x): c4 |x|^(-(mu+1+2b)/(1+b)).
    pub fn packing_radius(&self, x: &PrimitiveVector) -> PowerProduct {
        let e = -(&self.mu + Rat::one() + rat(2, 1) * &self.b) / (Rat::one() + &self.b);
        x.height_pow(&e).scale(&self.c4)
    }
}

/// One first-level witness y in E1(x) with its lattice data.
#[derive(Clone, Debug)]
pub struct Witness {
    pub m: Int,
    pub alpha: QVec2,
    pub alpha_sq: Rat,
    pub y: PrimitiveVector,
    pub lat: FareyLattice,
    /// generator of Lambda'_y and its short lift (third coordinate <= |y|/2)
    pub u_y: QVec2,
    pub y_lift: Vec3,
}

/// Witness data kept on a tree edge (compact form of the E1 intermediate).
#[derive(Clone, Debug)]
pub struct WitnessInfo {
    pub y: PrimitiveVector,
    pub m: Int,
    pub alpha_sq: Rat,
    pub y_lam1_sq: Rat,
    pub y_lam2_sq: Rat,
    /// coefficients of z = a y' + k y in D1(y)
    pub a: Int,
    pub k: Int,
}

#[derive(Clone, Debug)]
pub struct TreeNode {
    pub id: usize,
    pub parent: Option<usize>,
    pub depth: usize,
    pub x: PrimitiveVector,
    pub lat: FareyLattice,
    pub witness: Option<WitnessInfo>,
    pub children: Vec<usize>,
    /// first generation after the bootstrap root: band checks exempt
    pub bootstrap: bool,
}

#[derive(Clone, Debug)]
pub struct Tree {
    pub params: TreeParams,
    pub nodes: Vec<TreeNode>,
    pub root: usize,
}

// ---------------------------------------------------------------------------
// E1 windows and enumeration
// ---------------------------------------------------------------------------

/// mu = mn/md; the E1 height window is
///   (32 |alpha| |x|)^(1/(1-mu)) <= v <= 2 (32 |alpha| |x|)^(1/(1-mu)),
/// i.e. with P/R = md/(md-mn):  v^(2R) >= W and v^(2R) <= 2^(2R) W,
/// where W = (1024 alpha_sq q^2)^P is exact.
fn e1_window(alpha_sq: &Rat, q: &Int, mu: &Rat) -> (Int, Int) {
    let md = mu.denom().clone();
    let mn = mu.numer().clone();
    let r_den = &md - &mn; // md - mn > 0
    let p: u32 = (&md).try_into().expect("mu denominator too large");
    let r: u32 = (&r_den).try_into().expect("mu exponent denominator too large");
    let g = num_integer::gcd(p, r);
    let (p, r) = (p / g, r / g);
    let w = pow_rat_i(&(rat(1024, 1) * alpha_sq * rat_int(q * q)), p as i64);
    // lo: smallest v with v^(2r) >= w
    let t = nth_root_floor_rat(&w, 2 * r);
    let lo = if pow_rat_i(&rat_int(t.clone()), (2 * r) as i64) >= w { t.clone() } else { &t + 1 };
    // hi: largest v with v^(2r) <= 2^(2r) w
    let w_hi = pow_rat_i(&rat(2, 1), (2 * r) as i64) * &w;
    let hi = nth_root_floor_rat(&w_hi, 2 * r);
    (lo, hi)
}

/// Exact membership check of a height v in the E1 window.
fn e1_window_contains(alpha_sq: &Rat, q: &Int, mu: &Rat, v: &Int) -> bool {
    let (lo, hi) = e1_window(alpha_sq, q, mu);
    *v >= lo && *v <= hi
}

/// The m-range of first-level rays: |m u1| <= lam2, i.e. m^2 lam1_sq <= lam2_sq.
pub fn e1_m_limit(lat: &FareyLattice) -> Int {
    let ratio = &lat.lam2_sq / &lat.lam1_sq;
    nth_root_floor_rat(&ratio, 2)
}

/// Deterministic ray order: m = 0, 1, -1, 2, -2, ... (lazy; limits can be huge).
fn ray_order(limit: &Int) -> impl Iterator<Item = Int> {
    let limit = limit.clone();
    let mut next = Int::zero();
    let mut positive_side = true;
    std::iter::from_fn(move || {
        if next.is_zero() && positive_side {
            positive_side = false;
            return Some(Int::zero());
        }
        if !positive_side {
            next += 1;
            positive_side = true;
            if next > limit {
                return None;
            }
            return Some(next.clone());
        }
        positive_side = false;
        Some(-next.clone())
    })
}

/// Ray data: direction alpha = m u1 + u2, its integer lift, and the window.
struct RayData {
    m: Int,
    alpha: QVec2,
    alpha_sq: Rat,
    y0: Vec3,
    v_lo: Int,
    v_hi: Int,
}

fn ray_data(x: &PrimitiveVector, lat: &FareyLattice, mu: &Rat, m: &Int) -> Option<RayData> {
    // exact filter |m u1| <= lam2
    if rat_int(m * m) * &lat.lam1_sq > lat.lam2_sq {
        return None;
    }
    let alpha = lat.u1.scale(&rat_int(m.clone())).add(&lat.u2);
    let alpha_sq = alpha.norm_sq();
    let mut y0 = vec3_add(&vec3_scale(&lat.w1, m), &lat.w2);
    let k0 = y0[2].div_floor(&x.q);
    if !k0.is_zero() {
        y0 = vec3_sub(&y0, &vec3_scale(&x.as_vec3(), &k0));
    }
    let (v_lo, v_hi) = e1_window(&alpha_sq, &x.q, mu);
    if v_lo > v_hi {
        return None;
    }
    Some(RayData { m: m.clone(), alpha, alpha_sq, y0, v_lo, v_hi })
}

/// Admissible heights of a ray (primitive lifts), ascending from the window
/// bottom, up to `take` of them.
fn ray_heights_from_bottom(x: &PrimitiveVector, r: &RayData, take: usize) -> Vec<Int> {
    let mut out = Vec::new();
    let mut v = {
        let mut v = &r.y0[2] + (&r.v_lo - &r.y0[2]).div_floor(&x.q) * &x.q;
        while v < r.v_lo {
            v += &x.q;
        }
        v
    };
    while v <= r.v_hi && out.len() < take {
        let k = (&v - &r.y0[2]) / &x.q;
        let y3 = vec3_add(&r.y0, &vec3_scale(&x.as_vec3(), &k));
        if v.is_positive() && gcd3(&y3[0], &y3[1], &y3[2]).is_one() {
            out.push(v.clone());
        }
        v += &x.q;
    }
    out
}

/// Admissible heights descending from the window top, up to `take`.
fn ray_heights_from_top(x: &PrimitiveVector, r: &RayData, take: usize) -> Vec<Int> {
    let mut out = Vec::new();
    let mut v = {
        let mut v = &r.y0[2] + (&r.v_hi - &r.y0[2]).div_floor(&x.q) * &x.q;
        while v > r.v_hi {
            v -= &x.q;
        }
        v
    };
    while v >= r.v_lo && out.len() < take {
        if v.is_positive() {
            let k = (&v - &r.y0[2]) / &x.q;
            let y3 = vec3_add(&r.y0, &vec3_scale(&x.as_vec3(), &k));
            if gcd3(&y3[0], &y3[1], &y3[2]).is_one() {
                out.push(v.clone());
            }
        }
        v -= &x.q;
    }
    out
}

fn make_witness(
    x: &PrimitiveVector,
    r: &RayData,
    v: &Int,
) -> Result<Witness> {
    let k = (v - &r.y0[2]) / &x.q;
    let y3 = vec3_add(&r.y0, &vec3_scale(&x.as_vec3(), &k));
    debug_assert_eq!(&y3[2], v);
    let y = PrimitiveVector::from_ints(y3[0].clone(), y3[1].clone(), y3[2].clone())?;
    debug_assert_eq!(project_along(x, &y.as_vec3()), r.alpha);
    let y_lat = FareyLattice::new(&y);
    // certified lambda_1(y) = |x ^ y| / |y|: the short-vector criterion holds
    // once |y| >= (|alpha| |x|)^2, which the E1 window implies
    let wsq = wedge_sq(x, &y);
    if &y_lat.lam1_sq * rat_int(&y.q * &y.q) != wsq {
        return Err(Error::HeightTooSmall(format!(
            "lambda_1(y) != |x^y|/|y| at |y| = {}: window too low",
            y.q
        )));
    }
    let (u_y, y_lift) = y_lat.sublattice_h();
    Ok(Witness {
        m: r.m.clone(),
        alpha: r.alpha.clone(),
        alpha_sq: r.alpha_sq.clone(),
        y,
        lat: y_lat,
        u_y,
        y_lift,
    })
}

/// Enumerate E1(x) witnesses.  With a limit, picks are spread across rays
/// round-robin (m = 0, 1, -1, ...; one admissible height per ray per round,
/// ascending from each window bottom).  Without a limit the enumeration is
/// exhaustive (shallow heights only).
pub fn enumerate_e1(
    x: &PrimitiveVector,
    lat: &FareyLattice,
    params: &TreeParams,
    limit: Option<usize>,
) -> Result<Vec<Witness>> {
    if x.q < params.min_height {
        return Err(Error::HeightTooSmall(format!(
            "|x| = {} below min_height {}",
            x.q, params.min_height
        )));
    }
    let m_limit = e1_m_limit(lat);
    let mut out: Vec<Witness> = Vec::new();
    match limit {
        None => {
            for m in ray_order(&m_limit) {
                if let Some(r) = ray_data(x, lat, &params.mu, &m) {
                    let heights = ray_heights_from_bottom(x, &r, usize::MAX);
                    for v in &heights {
                        debug_assert!(e1_window_contains(&r.alpha_sq, &x.q, &params.mu, v));
                        out.push(make_witness(x, &r, v)?);
                    }
                }
            }
        }
        Some(cap) => {
            // collect ray data for the first few rays only
            let mut rays = Vec::new();
            for m in ray_order(&m_limit).take(2 * cap + 1) {
                if let Some(r) = ray_data(x, lat, &params.mu, &m) {
                    rays.push(r);
                }
            }
            let per_ray = cap; // enough heights per ray to fill the cap
            let mut heights: Vec<Vec<Int>> = rays
                .iter()
                .map(|r| ray_heights_from_bottom(x, r, per_ray))
                .collect();
            'fill: for round in 0..per_ray {
                for (ri, r) in rays.iter().enumerate() {
                    if let Some(v) = heights[ri].get(round) {
                        out.push(make_witness(x, r, v)?);
                        if out.len() >= cap {
                            break 'fill;
                        }
                    }
                }
                if heights.iter().all(|h| h.len() <= round + 1) && out.is_empty() {
                    break;
                }
            }
            let _ = &mut heights;
        }
    }
    if out.is_empty() {
        return Err(Error::HeightTooSmall(format!(
            "E1({}) is empty: no admissible heights in any ray window",
            x
        )));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// D1 enumeration
// ---------------------------------------------------------------------------

/// D1 height window: v_y^(1+b)/2 <= v_z <= v_y^(1+b) (and v_z >= v_y).
fn d1_window(v_y: &Int, b: &Rat) -> (Int, Int) {
    let bn: u32 = (b.numer()).try_into().expect("b numerator too large");
    let bd: u32 = (b.denom()).try_into().expect("b denominator too large");
    let v_pow = pow_int(v_y, bn + bd);
    let hi = nth_root_floor(&v_pow, bd);
    // lo: smallest v with (2v)^bd >= v_pow
    let t = nth_root_floor(&v_pow, bd);
    let two_v_min = if pow_int(&t, bd) == v_pow { t } else { &t + 1 };
    let lo_raw: Int = (&two_v_min + Int::one()) / Int::from(2); // ceil(two_v_min / 2)
    let lo = lo_raw.max(v_y.clone());
    (lo, hi)
}

fn d1_window_contains(v_y: &Int, b: &Rat, v_z: &Int) -> bool {
    let bn: u32 = (b.numer()).try_into().unwrap();
    let bd: u32 = (b.denom()).try_into().unwrap();
    let v_pow = pow_int(v_y, bn + bd);
    if v_z < v_y {
        return false;
    }
    pow_int(&(rat(2, 1) * rat_int(v_z.clone())).to_integer(), bd) >= v_pow
        && pow_int(v_z, bd) <= v_pow
}

/// One candidate child z = a y' + k y.
#[derive(Clone, Debug)]
pub struct ChildCandidate {
    pub z: PrimitiveVector,
    pub a: Int,
    pub k: Int,
}

/// Lazy, deterministic D1(y) enumeration.
///
/// Children z = a y' + k y are drawn line-first: a = 1, -1, 2, -2, ...
/// (a = 0 only contributes z = y itself, which the height window excludes),
/// and within a line k ascends from the window bottom.  Candidates are merged
/// by (|z|, p1, p2).  The merge is exact across the open lines; the cap keeps
/// the set of opened lines small, which is what makes depth >= 2 tractable.
pub struct D1Iter<'a> {
    w: &'a Witness,
    params: &'a TreeParams,
    /// open line states: (a, next k)
    streams: Vec<(Int, Int)>,
    /// buffered next candidate per open line
    buffered: Vec<Option<(Int, Vec3, Int)>>, // (v_z, z, k)
    next_a: Int,
    a_max: Int,
    z_lo: Int,
    z_hi: Int,
}

impl<'a> D1Iter<'a> {
    pub fn new(w: &'a Witness, params: &'a TreeParams) -> Result<Self> {
        let v_y = &w.y.q;
        let (z_lo, z_hi) = d1_window(v_y, &params.b);
        if z_lo > z_hi {
            return Err(Error::HeightTooSmall(format!(
                "empty D1 window at |y| = {}",
                v_y
            )));
        }
        let a_max = (&params.c1 * rat_int(z_hi.clone()) / rat_int(v_y.clone()))
            .floor()
            .to_integer();
        Ok(D1Iter {
            w,
            params,
            streams: Vec::new(),
            buffered: Vec::new(),
            next_a: Int::one(),
            a_max,
            z_lo,
            z_hi,
        })
    }

    /// Open the next line a in the order 1, -1, 2, -2, ...
    fn open_next_line(&mut self) -> bool {
        loop {
            if self.next_a.is_zero() || self.next_a.abs() > self.a_max {
                return false;
            }
            let a = self.next_a.clone();
            // advance: 1 -> -1 -> 2 -> -2 -> ...
            self.next_a = if self.next_a.is_positive() {
                -self.next_a.clone()
            } else {
                -self.next_a.clone() + 1
            };
            if self.next_a.abs() > self.a_max && self.next_a.is_positive() {
                self.next_a = Int::zero(); // exhausted marker
            }
            let n_lift = &self.w.y_lift[2];
            let v_y = &self.w.y.q;
            // smallest k with v_z = a n' + k v_y >= z_lo
            let base = &self.z_lo - &a * n_lift;
            let mut k = base.div_floor(v_y);
            while &a * n_lift + &k * v_y < self.z_lo {
                k += 1;
            }
            self.streams.push((a, k));
            self.buffered.push(None);
            let idx = self.streams.len() - 1;
            self.refill(idx);
            if self.buffered[idx].is_some() {
                return true;
            }
            // line empty; try the next one
            self.streams.pop();
            self.buffered.pop();
        }
    }

    fn refill(&mut self, idx: usize) {
        let v_y = self.w.y.q.clone();
        let n_lift = self.w.y_lift[2].clone();
        loop {
            let (a, k) = {
                let s = &self.streams[idx];
                (s.0.clone(), s.1.clone())
            };
            let v_z = &a * &n_lift + &k * &v_y;
            if v_z > self.z_hi {
                self.buffered[idx] = None;
                return;
            }
            self.streams[idx].1 += 1;
            if !v_z.is_positive() || !a.gcd(&k).is_one() {
                continue;
            }
            let z = vec3_add(
                &vec3_scale(&self.w.y_lift, &a),
                &vec3_scale(&self.w.y.as_vec3(), &k),
            );
            debug_assert_eq!(z[2], v_z);
            self.buffered[idx] = Some((v_z, z, k));
            return;
        }
    }

    /// Exact membership filter for a candidate.
    fn accept(&self, a: &Int, k: &Int, z3: &Vec3) -> Result<Option<ChildCandidate>> {
        let w = self.w;
        if !gcd3(&z3[0], &z3[1], &z3[2]).is_one() {
            return Ok(None);
        }
        let z = PrimitiveVector::from_ints(z3[0].clone(), z3[1].clone(), z3[2].clone())?;
        if !d1_window_contains(&w.y.q, &self.params.b, &z.q) {
            return Ok(None);
        }
        // z in H_y: zhat - yhat collinear with u_y
        let d = z.hat().sub(&w.y.hat());
        if !d.det(&w.u_y).is_zero() {
            return Ok(None);
        }
        // distance bound d(yhat, zhat) <= c1 lam1(y)/|y| on squares
        let d2 = d.norm_sq();
        let bound = &self.params.c1 * &self.params.c1 * &w.lat.lam1_sq
            / rat_int(&w.y.q * &w.y.q);
        if d2 > bound {
            return Ok(None);
        }
        Ok(Some(ChildCandidate { z, a: a.clone(), k: k.clone() }))
    }

    /// Keep up to `line_cap` lines open; pop the smallest (|z|, p1, p2)
    /// among the open lines.  The resulting order is deterministic
    /// (line-first selection, then height order within the open set).
    pub fn next_candidate_capped(&mut self, line_cap: usize) -> Result<Option<ChildCandidate>> {
        loop {
            while self.streams.len() < line_cap && !self.next_a.is_zero() {
                if !self.open_next_line() {
                    break;
                }
            }
            let mut best: Option<usize> = None;
            for (i, b) in self.buffered.iter().enumerate() {
                if let Some((v, z, _)) = b {
                    let better = match best {
                        None => true,
                        Some(j) => {
                            let (bv, bz, _) = self.buffered[j].as_ref().unwrap();
                            (v, &z[0], &z[1]) < (bv, &bz[0], &bz[1])
                        }
                    };
                    if better {
                        best = Some(i);
                    }
                }
            }
            let idx = match best {
                Some(i) => i,
                None => {
                    if self.open_next_line() {
                        continue;
                    }
                    return Ok(None);
                }
            };
            let (_, z3, k) = self.buffered[idx].take().unwrap();
            let a = self.streams[idx].0.clone();
            self.refill(idx);
            if let Some(c) = self.accept(&a, &k, &z3)? {
                return Ok(Some(c));
            }
        }
    }

    pub fn next_candidate(&mut self) -> Result<Option<ChildCandidate>> {
        self.next_candidate_capped(usize::MAX)
    }
}

/// D1(y) as a list, up to `limit` candidates (None = exhaustive; only sane
/// when the window and c1-cone are small).
pub fn enumerate_d1(w: &Witness, params: &TreeParams, limit: Option<usize>) -> Result<Vec<ChildCandidate>> {
    let mut it = D1Iter::new(w, params)?;
    let mut out = Vec::new();
    let line_cap = limit.map_or(usize::MAX, |l| l.max(8));
    while let Some(c) = it.next_candidate_capped(line_cap)? {
        out.push(c);
        if let Some(l) = limit {
            if out.len() >= l {
                break;
            }
        }
    }
    if out.is_empty() {
        return Err(Error::HeightTooSmall(format!("D1 empty at |y| = {}", w.y.q)));
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Node verification
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifyLevel {
    /// inclusion and set-membership checks only (first generation)
    Bootstrap,
    Full,
}

#[derive(Clone, Debug)]
pub struct NodeReport {
    pub legendre_inclusion: bool,
    pub q_mu_member: bool,
    /// granted on the root; enforced from generation 1 on
    pub packing_contained: Option<bool>,
    pub lambda1_band: Option<bool>,
    pub lambda2_band: Option<bool>,
}

impl NodeReport {
    pub fn all_pass(&self) -> bool {
        self.legendre_inclusion
            && self.q_mu_member
            && self.packing_contained.unwrap_or(true)
            && self.lambda1_band.unwrap_or(true)
            && self.lambda2_band.unwrap_or(true)
    }
}

/// Certified per-node checks: B(x) inside the Legendre inner ball, the
/// Q_mu bound lam1 <= |x|^-mu, packing-ball containment, and (non-bootstrap)
/// constant-factor bands around the lemma exponents.
pub fn verify_node(
    x: &PrimitiveVector,
    lat: &FareyLattice,
    params: &TreeParams,
    level: VerifyLevel,
) -> Result<NodeReport> {
    let radius = params.ball_radius(x);
    // (a) B(x) inside closed B(xhat, lam1/(2|x|))
    let legendre_rhs = PowerProduct::sqrt_of(lat.lam1_sq.clone())
        .scale(&rat(1, 2))
        .mul(&PowerProduct::from_pow(rat_int(x.q.clone()), rat(-1, 1)));
    let legendre_inclusion = radius.le(&legendre_rhs)?;
    // Q_mu: lam1 <= |x|^-mu
    let q_mu_member = PowerProduct::sqrt_of(lat.lam1_sq.clone())
        .le(&x.height_pow(&-params.mu.clone()))?;
    // packing: B(x) inside B(xhat, k r'(x)), k < 1
    let packing_contained = Some(radius.le(&params.packing_radius(x).scale(&params.packing_k))?);

    let (lambda1_band, lambda2_band) = match level {
        VerifyLevel::Bootstrap => (None, None),
        VerifyLevel::Full => {
            let band = pow_rat_i(&rat(2, 1), params.band_bits as i64);
            // lam1 ~ |x|^(-(mu+b)/(1+b))
            let e1 = -(&params.mu + &params.b) / (Rat::one() + &params.b);
            let t1 = PowerProduct::sqrt_of(lat.lam1_sq.clone()).mul(&x.height_pow(&-e1));
            let ok1 = t1.le(&PowerProduct::from_rat(band.clone()))?
                && PowerProduct::from_rat(band.recip()).le(&t1)?;
            // lam2 ~ |x|^((mu-1)/(1+b))
            let e2 = (&params.mu - Rat::one()) / (Rat::one() + &params.b);
            let t2 = PowerProduct::sqrt_of(lat.lam2_sq.clone()).mul(&x.height_pow(&-e2));
            let ok2 = t2.le(&PowerProduct::from_rat(band.clone()))?
                && PowerProduct::from_rat(band.recip()).le(&t2)?;
            (Some(ok1), Some(ok2))
        }
    };
    Ok(NodeReport {
        legendre_inclusion,
        q_mu_member,
        packing_contained,
        lambda1_band,
        lambda2_band,
    })
}

/// Certified nestedness chain for an edge x -> z through the witness y:
/// B(z) inside B(yhat, lam1(y)/(2|y|)) inside B(yhat, 2lam1(y)/|y|) inside B(x).
pub fn verify_nestedness(
    x: &PrimitiveVector,
    w: &Witness,
    z: &PrimitiveVector,
    params: &TreeParams,
) -> Result<bool> {
    let r_z = params.ball_radius(z);
    let r_x = params.ball_radius(x);
    let lam1_y = PowerProduct::sqrt_of(w.lat.lam1_sq.clone());
    let inv_vy = PowerProduct::from_pow(rat_int(w.y.q.clone()), rat(-1, 1));
    let half_ball = lam1_y.scale(&rat(1, 2)).mul(&inv_vy);
    let two_ball = lam1_y.scale(&rat(2, 1)).mul(&inv_vy);
    // d(yhat, zhat) + r_z <= lam1(y)/(2|y|)
    let d_yz = PowerProduct::sqrt_of_or_zero(w.y.hat().dist_sq(&z.hat()));
    let c1 = match d_yz {
        None => r_z.le(&half_ball)?,
        Some(d) => sum_le(&[d, r_z.clone()], &[half_ball])?,
    };
    // d(xhat, yhat) + 2 lam1(y)/|y| <= r_x
    let d_xy = PowerProduct::sqrt_of(x.hat().dist_sq(&w.y.hat()));
    let c2 = sum_le(&[d_xy, two_ball], &[r_x.clone()])?;
    // direct: d(xhat, zhat) + r_z <= r_x
    let d_xz = PowerProduct::sqrt_of(x.hat().dist_sq(&z.hat()));
    let c3 = sum_le(&[d_xz, r_z], &[r_x])?;
    Ok(c1 && c2 && c3)
}

impl PowerProduct {
    /// sqrt of a nonnegative rational; None for zero.
    pub fn sqrt_of_or_zero(x: Rat) -> Option<PowerProduct> {
        if x.is_zero() {
            None
        } else {
            Some(PowerProduct::sqrt_of(x))
        }
    }
}

// ---------------------------------------------------------------------------
// Adaptive constants and parameter derivation
// ---------------------------------------------------------------------------

/// Best rational approximation of the enclosure midpoint with denominator
/// bounded by `max_den`, via continued-fraction convergents.
pub fn rational_approx(x: &Rat, max_den: i64) -> Rat {
    let mut a = x.clone();
    let mut h0 = Int::zero();
    let mut h1 = Int::one();
    let mut k0 = Int::one();
    let mut k1 = Int::zero();
    let mut best = x.clone();
    loop {
        let fl = a.floor().to_integer();
        let h = &fl * &h1 + &h0;
        let k = &fl * &k1 + &k0;
        if k > Int::from(max_den) {
            break;
        }
        best = Rat::new(h.clone(), k.clone());
        if a.is_integer() {
            break;
        }
        h0 = h1;
        h1 = h;
        k0 = k1;
        k1 = k;
        a = (a - rat_int(fl)).recip();
    }
    best
}

/// Default bootstrap root (1, 0, n).
pub fn default_root(n: i64) -> PrimitiveVector {
    PrimitiveVector::new(1, 0, n).expect("valid root")
}

/// Largest dyadic with ~20 significant bits that is <= x (0 for x <= 0).
fn dyadic_cap(x: &Rat) -> Rat {
    if !x.is_positive() {
        return Rat::zero();
    }
    let mag = bit_len(x.numer()) as i64 - bit_len(x.denom()) as i64;
    let frac = (20 - mag).max(1) as u32;
    dyadic_floor(x, frac)
}

/// Smallest dyadic with ~20 significant bits that is >= x > 0.
fn dyadic_lift(x: &Rat) -> Rat {
    assert!(x.is_positive());
    let mag = bit_len(x.numer()) as i64 - bit_len(x.denom()) as i64;
    let frac = (20 - mag).max(1) as u32;
    dyadic_ceil(x, frac)
}

impl TreeParams {
    /// Freeze the adaptive constants from the root generation:
    ///   c2: largest dyadic with the Legendre inclusion at the root AND the
    ///       witness-ball chain inclusions for the first generation;
    ///   c1: min(1/4, rho(x) |y| / (4 lam1(y)) over first-generation y);
    ///   c3: largest dyadic with c3 |x|^r2 <= min_y lam1(y)/(2 |y|^(1+2b));
    ///   c4: frozen so packing balls of the first generation are disjoint and
    ///       B(x) sits inside B(xhat, k c4 |x|^(...)).
    pub fn derive(
        mu: Rat,
        b: Rat,
        root: &PrimitiveVector,
        witness_cap: usize,
        child_cap: usize,
    ) -> Result<TreeParams> {
        let exps = node_exponents(&mu, &b)?;
        let mut params = TreeParams {
            mu: mu.clone(),
            b: b.clone(),
            exps,
            c1: rat(1, 4),
            c2: rat(1, 1),
            c3: rat(1, 1),
            c4: rat(1, 1),
            min_height: Int::from(2),
            witness_cap,
            child_cap,
            band_bits: 6,
            packing_k: rat(1, 2),
        };
        let lat = FareyLattice::new(root);
        // sample the first generation (bounded) to freeze constants
        let wits = enumerate_e1(root, &lat, &params, Some(witness_cap.max(8)))?;

        // rho(x): exact min distance over E1 points (structural)
        let rho_sq = rho_min_sq(root, &lat, &params)?;

        // c1 = min(1/4, sqrt(min_y rho^2 |y|^2 / (16 lam1_sq(y))))
        let mut c1 = rat(1, 4);
        for w in &wits {
            let bound_sq = &rho_sq * rat_int(&w.y.q * &w.y.q) / (rat(16, 1) * &w.lat.lam1_sq);
            // dyadic floor of sqrt(bound_sq)
            let s = crate::best_approx::sqrt_lower(&bound_sq);
            let s = dyadic_cap(&s);
            if s < c1 {
                c1 = s;
            }
        }
        if !c1.is_positive() {
            return Err(Error::HeightTooSmall(
                "adaptive c1 collapsed to zero at the root generation".into(),
            ));
        }
        params.c1 = c1;

        // c2 upper constraint: c2 |x|^r0 <= lam1(x)/(2|x|) at the root; and for
        // each witness, c2 |z_min|^r0 <= (1/4) lam1(y)/|y| with z_min the least
        // admissible child height; lower constraint: B(yhat, 2lam1/|y|) in B(x).
        let mut c2_hi: Option<Rat>;
        {
            // root constraint on squares: c2^2 <= lam1_sq/(4 q^2 |x|^(2 r0))
            let e = rat(-2, 1) * &params.exps.r0;
            let bound = PowerProduct::from_rat(lat.lam1_sq.clone())
                .scale(&rat(1, 4))
                .mul(&PowerProduct::from_pow(rat_int(&root.q * &root.q), rat(1, 1)).recip())
                .mul(&root.height_pow(&e));
            let enc = bound.enclosure(96);
            let s = crate::best_approx::sqrt_lower(&enc.lo.max(Rat::zero()));
            c2_hi = Some(dyadic_cap(&s));
        }
        for w in &wits {
            let (z_lo, _) = d1_window(&w.y.q, &params.b);
            let e = rat(-2, 1) * &params.exps.r0;
            let bound = PowerProduct::from_rat(w.lat.lam1_sq.clone())
                .scale(&rat(1, 16))
                .mul(&PowerProduct::from_rat(rat_int(&w.y.q * &w.y.q)).recip())
                .mul(&PowerProduct::from_pow(rat_int(z_lo), e));
            let enc = bound.enclosure(96);
            let s = dyadic_cap(&crate::best_approx::sqrt_lower(&enc.lo.max(Rat::zero())));
            c2_hi = Some(match c2_hi {
                None => s,
                Some(c) => c.min(s),
            });
        }
        let c2 = c2_hi.expect("nonempty");
        if !c2.is_positive() {
            return Err(Error::HeightTooSmall("adaptive c2 collapsed to zero".into()));
        }
        // lower resolvability: d(xhat, yhat) + 2 lam1(y)/|y| <= c2 |x|^r0
        params.c2 = c2;
        for w in &wits {
            let d_xy = PowerProduct::sqrt_of(root.hat().dist_sq(&w.y.hat()));
            let two_ball = PowerProduct::sqrt_of(w.lat.lam1_sq.clone())
                .scale(&rat(2, 1))
                .mul(&PowerProduct::from_pow(rat_int(w.y.q.clone()), rat(-1, 1)));
            if !sum_le(&[d_xy, two_ball], &[params.ball_radius(root)])? {
                return Err(Error::HeightTooSmall(format!(
                    "no admissible c2: witness ball at |y| = {} does not fit in B(x)",
                    w.y.q
                )));
            }
        }

        // c3: largest dyadic with c3 |x|^r2 <= min_y lam1(y)/(2 |y|^(1+2b))
        let mut c3: Option<Rat> = None;
        for w in &wits {
            // on squares: c3^2 <= lam1_sq(y) / (4 |y|^(2+4b) |x|^(2 r2))
            let e_y_pow = rat(-2, 1) - rat(4, 1) * &params.b;
            let bound = PowerProduct::from_rat(w.lat.lam1_sq.clone())
                .scale(&rat(1, 4))
                .mul(&PowerProduct::from_pow(rat_int(w.y.q.clone()), e_y_pow))
                .mul(&root.height_pow(&(rat(-2, 1) * &params.exps.r2)));
            let enc = bound.enclosure(96);
            let s = dyadic_cap(&crate::best_approx::sqrt_lower(&enc.lo.max(Rat::zero())));
            c3 = Some(match c3 {
                None => s,
                Some(c) => c.min(s),
            });
        }
        params.c3 = c3.unwrap_or(rat(1, 1)).min(rat(1, 1));
        if !params.c3.is_positive() {
            return Err(Error::HeightTooSmall("adaptive c3 collapsed to zero".into()));
        }

        // c4: B(x) in B(xhat, k c4 |x|^(-(mu+1+2b)/(1+b))) needs c4 large
        // enough at the root; sibling packing-ball disjointness needs
        // 2 c4 |z|^(...) <= separation, frozen against the worst first-
        // generation data (min child height, R2-scale gap).
        let pack_e = -(&params.mu + Rat::one() + rat(2, 1) * &params.b) / (Rat::one() + &params.b);
        // the packing containment is enforced from the first generation on
        // (the bootstrap root is granted), so the lower constraint uses the
        // smallest admissible child height
        let z_min = wits
            .iter()
            .map(|w| d1_window(&w.y.q, &params.b).0)
            .min()
            .expect("nonempty");
        let c4_lo = {
            let z_pv = PowerProduct::from_pow(rat_int(z_min.clone()), params.exps.r0.clone())
                .scale(&params.c2)
                .mul(&PowerProduct::from_pow(rat_int(z_min.clone()), pack_e.clone()).recip())
                .scale(&params.packing_k.recip());
            let enc = z_pv.enclosure(96);
            dyadic_lift(&enc.hi)
        };
        // global gap floor over the first generation vs the largest packing
        // radius (attained at the globally smallest child height)
        let mut c4_hi: Option<Rat> = None;
        for w in &wits {
            // S(w) = lam1(y)/(2 |y|^(1+2b)); c4 <= S(w) / (4 z_min^pack_e)
            let bound = PowerProduct::sqrt_of(w.lat.lam1_sq.clone())
                .scale(&rat(1, 8))
                .mul(&PowerProduct::from_pow(
                    rat_int(w.y.q.clone()),
                    -(Rat::one() + rat(2, 1) * &params.b),
                ))
                .mul(&PowerProduct::from_pow(rat_int(z_min.clone()), pack_e.clone()).recip());
            let enc = bound.enclosure(96);
            let s = dyadic_cap(&enc.lo.max(Rat::zero()));
            c4_hi = Some(match c4_hi {
                None => s,
                Some(c) => c.min(s),
            });
        }
        let c4_hi = c4_hi.expect("nonempty");
        if c4_lo > c4_hi {
            return Err(Error::HeightTooSmall(format!(
                "no admissible c4 window at the root: need [{}, {}]",
                c4_lo, c4_hi
            )));
        }
        params.c4 = c4_hi;
        params.min_height = root.q.clone().min(Int::from(2));
        Ok(params)
    }
}

// ---------------------------------------------------------------------------
// rho(x): exact minimal distance between E1 points
// ---------------------------------------------------------------------------

/// Exact squared minimal distance between distinct E1 points.
///
/// Within a ray the points are collinear, so the minimum sits on consecutive
/// admissible heights near the window top; across rays the angular separation
/// gives exact floors.  Only extreme rays (largest |m|) are examined
/// explicitly when the ray count is huge; exact power-product certificates
/// cover the remaining rays.  The returned value may undershoot the true
/// minimum by a bounded factor (tail floors), never overshoot.
pub fn rho_min_sq(
    x: &PrimitiveVector,
    lat: &FareyLattice,
    params: &TreeParams,
) -> Result<Rat> {
    for take in [12usize, 48, 192] {
        match rho_attempt(x, lat, params, take) {
            Ok(v) => return Ok(v),
            Err(Error::BudgetExceeded(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::HeightTooSmall(
        "rho certificates failed at every examination depth".into(),
    ))
}

fn rho_attempt(
    x: &PrimitiveVector,
    lat: &FareyLattice,
    params: &TreeParams,
    take: usize,
) -> Result<Rat> {
    let m_limit = e1_m_limit(lat);
    const K: i64 = 6;
    let explicit_all = m_limit <= Int::from(2 * K);
    let mut explicit_ms: Vec<Int> = Vec::new();
    if explicit_all {
        for m in ray_order(&m_limit) {
            explicit_ms.push(m);
        }
    } else {
        let mut m = m_limit.clone() - Int::from(K - 1);
        while m <= m_limit {
            explicit_ms.push(m.clone());
            explicit_ms.push(-m.clone());
            m += 1;
        }
    }
    struct ExRay {
        alpha_sq: Rat,
        alpha: QVec2,
        m: Int,
        tops: Vec<Int>, // descending admissible heights
        exhausted: bool,
    }
    let mut rays: Vec<ExRay> = Vec::new();
    for m in &explicit_ms {
        if let Some(r) = ray_data(x, lat, &params.mu, m) {
            let tops = ray_heights_from_top(x, &r, take);
            let exhausted = tops.len() < take;
            if !tops.is_empty() {
                rays.push(ExRay { alpha_sq: r.alpha_sq, alpha: r.alpha, m: r.m, tops, exhausted });
            }
        }
    }
    let total: usize = rays.iter().map(|r| r.tops.len()).sum();
    if total < 2 && explicit_all {
        return Err(Error::HeightTooSmall("fewer than two E1 points".into()));
    }
    let mut best: Option<Rat> = None;
    fn upd(best: &mut Option<Rat>, d2: Rat) {
        if best.as_ref().map_or(true, |b| d2 < *b) {
            *best = Some(d2);
        }
    }
    // within-ray: consecutive top pairs, plus a conservative floor for the
    // unexamined tail (alpha^2 q^2 / v_cut^4, valid for any deeper pair)
    for r in &rays {
        for w in r.tops.windows(2) {
            let (v2, v1) = (&w[0], &w[1]); // descending
            let diff = Rat::new(Int::one(), v1.clone()) - Rat::new(Int::one(), v2.clone());
            upd(&mut best, &r.alpha_sq * &diff * &diff);
        }
        if !r.exhausted {
            let v_cut = r.tops.last().unwrap();
            let floor = &r.alpha_sq * rat_int(&x.q * &x.q) / rat_int(pow_int(v_cut, 4));
            upd(&mut best, floor);
        }
    }
    // cross-ray: exact pair distances among the top points; exact floors
    // prune pairs with a point below the examined heights
    const CROSS_TOP: usize = 4;
    for i in 0..rays.len() {
        for j in (i + 1)..rays.len() {
            for vi in rays[i].tops.iter().take(CROSS_TOP) {
                for vj in rays[j].tops.iter().take(CROSS_TOP) {
                    let pi_sq = &rays[i].alpha_sq / rat_int(vi * vi);
                    let pj_sq = &rays[j].alpha_sq / rat_int(vj * vj);
                    let cross = rays[i].alpha.dot(&rays[j].alpha) * rat(2, 1) / rat_int(vi * vj);
                    upd(&mut best, pi_sq + pj_sq - cross);
                }
            }
        }
    }
    let best0 = best.clone().ok_or_else(|| Error::HeightTooSmall("no E1 points".into()))?;
    // prune/certify cross pairs with an unexamined endpoint: a point on ray i
    // at height v < v_ex(i) has d(P, line_j)^2 >= dm^2/(q^2 alpha_j^2 v_ex^2)
    for i in 0..rays.len() {
        for j in 0..rays.len() {
            if i == j {
                continue;
            }
            let deeper_exists = !rays[i].exhausted || rays[i].tops.len() > CROSS_TOP;
            if !deeper_exists {
                continue;
            }
            let v_ex = rays[i].tops.iter().take(CROSS_TOP).last().unwrap();
            let dm = (&rays[i].m - &rays[j].m).abs();
            let floor = rat_int(&dm * &dm)
                / (rat_int(&x.q * &x.q) * &rays[j].alpha_sq * rat_int(v_ex * v_ex));
            if best0 > floor {
                return Err(Error::BudgetExceeded("cross floor below candidate".into()));
            }
        }
    }
    if !explicit_all {
        let candidate = PowerProduct::from_rat(best0.clone());
        let inv_1m = (Rat::one() - &params.mu).recip();
        // (i) within-ray tail over non-explicit rays: bound decreasing in
        // |alpha|, evaluated at alpha_cut (|m| = m_limit - K)
        let m_cut = m_limit.clone() - Int::from(K);
        let alpha_cut = lat.u1.scale(&rat_int(m_cut)).add(&lat.u2);
        let ac_sq = alpha_cut.norm_sq();
        let hi4 = PowerProduct::from_pow(
            rat(1024, 1) * &ac_sq * rat_int(&x.q * &x.q),
            rat(2, 1) * &inv_1m,
        )
        .scale(&rat(16, 1));
        let bound_sq = PowerProduct::from_rat(&ac_sq * rat_int(&x.q * &x.q)).div(&hi4);
        if !candidate.le(&bound_sq)? {
            return Err(Error::BudgetExceeded("rho within-ray tail certificate failed".into()));
        }
        // (ii) every cross pair involving any ray: d >= t_min |dm| / (q alpha_max)
        // with t_min = 1/hi(alpha_max) and |dm| >= 1
        let alpha_max = lat.u1.scale(&rat_int(m_limit.clone())).add(&lat.u2);
        let am_sq = alpha_max.norm_sq();
        let hi_sq = PowerProduct::from_pow(
            rat(1024, 1) * &am_sq * rat_int(&x.q * &x.q),
            inv_1m,
        )
        .scale(&rat(4, 1));
        let cross_bound_sq = hi_sq
            .mul(&PowerProduct::from_rat(&am_sq * rat_int(&x.q * &x.q)))
            .recip();
        if !candidate.le(&cross_bound_sq)? {
            return Err(Error::BudgetExceeded("rho cross-ray certificate failed".into()));
        }
    }
    Ok(best0)
}

// ---------------------------------------------------------------------------
// children / build / extract
// ---------------------------------------------------------------------------

/// Enumerate the capped child set of a node: witnesses first (deterministic
/// ray order), then round-robin across witnesses by (|z|, p1, p2).
pub fn children(
    x: &PrimitiveVector,
    lat: &FareyLattice,
    params: &TreeParams,
) -> Result<Vec<(Witness, ChildCandidate)>> {
    let wits = enumerate_e1(x, lat, params, Some(params.witness_cap))?;
    let mut iters: Vec<D1Iter> = Vec::new();
    for w in &wits {
        iters.push(D1Iter::new(w, params)?);
    }
    let mut picked: Vec<(usize, ChildCandidate)> = Vec::new();
    let mut exhausted = vec![false; iters.len()];
    'outer: loop {
        let mut progressed = false;
        for (i, it) in iters.iter_mut().enumerate() {
            if exhausted[i] {
                continue;
            }
            match it.next_candidate_capped(params.child_cap.max(4))? {
                Some(c) => {
                    picked.push((i, c));
                    progressed = true;
                    if picked.len() >= params.child_cap {
                        break 'outer;
                    }
                }
                None => exhausted[i] = true,
            }
        }
        if !progressed {
            break;
        }
    }
    if picked.is_empty() {
        return Err(Error::HeightTooSmall(format!("sigma({}) empty under caps", x)));
    }
    // deterministic global order: (|z|, p1, p2)
    picked.sort_by(|a, b| {
        (&a.1.z.q, &a.1.z.p1, &a.1.z.p2).cmp(&(&b.1.z.q, &b.1.z.p1, &b.1.z.p2))
    });
    Ok(picked
        .into_iter()
        .map(|(i, c)| (wits[i].clone(), c))
        .collect())
}

/// Breadth-limited expansion to the requested depth with certified edges.
pub fn build_tree(
    root: &PrimitiveVector,
    params: &TreeParams,
    depth: usize,
    node_budget: usize,
) -> Result<Tree> {
    let root_lat = FareyLattice::new(root);
    // the bootstrap root is granted: only the Q_mu bound is insisted on
    let root_report = verify_node(root, &root_lat, params, VerifyLevel::Bootstrap)?;
    if !root_report.q_mu_member {
        return Err(Error::HeightTooSmall(format!(
            "root {} is not in Q_mu: lam1 > |x|^-mu",
            root
        )));
    }
    let mut nodes = vec![TreeNode {
        id: 0,
        parent: None,
        depth: 0,
        x: root.clone(),
        lat: root_lat,
        witness: None,
        children: Vec::new(),
        bootstrap: true,
    }];
    let mut frontier = vec![0usize];
    for d in 1..=depth {
        let mut next = Vec::new();
        for &idx in &frontier {
            let (x, lat) = (nodes[idx].x.clone(), nodes[idx].lat.clone());
            let kids = children(&x, &lat, params)?;
            for (w, c) in kids {
                if nodes.len() >= node_budget {
                    return Err(Error::BudgetExceeded(format!(
                        "node budget {} reached at depth {}",
                        node_budget, d
                    )));
                }
                let z_lat = FareyLattice::new(&c.z);
                let level = if d == 1 { VerifyLevel::Bootstrap } else { VerifyLevel::Full };
                let rep = verify_node(&c.z, &z_lat, params, level)?;
                if !rep.all_pass() {
                    return Err(Error::HeightTooSmall(format!(
                        "child {} failed certified checks: {:?}",
                        c.z, rep
                    )));
                }
                if !verify_nestedness(&x, &w, &c.z, params)? {
                    return Err(Error::HeightTooSmall(format!(
                        "nestedness chain failed for child {}",
                        c.z
                    )));
                }
                let id = nodes.len();
                nodes.push(TreeNode {
                    id,
                    parent: Some(idx),
                    depth: d,
                    x: c.z.clone(),
                    lat: z_lat,
                    witness: Some(WitnessInfo {
                        y: w.y.clone(),
                        m: w.m.clone(),
                        alpha_sq: w.alpha_sq.clone(),
                        y_lam1_sq: w.lat.lam1_sq.clone(),
                        y_lam2_sq: w.lat.lam2_sq.clone(),
                        a: c.a.clone(),
                        k: c.k.clone(),
                    }),
                    children: Vec::new(),
                    bootstrap: d == 1,
                });
                nodes[idx].children.push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    Ok(Tree { params: params.clone(), nodes, root: 0 })
}

impl Tree {
    pub fn leaves(&self) -> Vec<usize> {
        self.nodes
            .iter()
            .filter(|n| n.children.is_empty())
            .map(|n| n.id)
            .collect()
    }

    /// Path from the root to a node (inclusive).
    pub fn path_to(&self, id: usize) -> Vec<usize> {
        let mut path = vec![id];
        let mut cur = id;
        while let Some(p) = self.nodes[cur].parent {
            path.push(p);
            cur = p;
        }
        path.reverse();
        path
    }
}

/// Certified enclosure of the unique point of a nested path: center at the
/// deepest rational point, radius a dyadic upper bound of the deepest ball
/// radius; containment in every ancestor ball is re-verified.
pub fn extract_point(tree: &Tree, path: &[usize]) -> Result<TargetPoint> {
    if path.is_empty() {
        return Err(Error::EmptyPath);
    }
    for w in path.windows(2) {
        if tree.nodes[w[1]].parent != Some(w[0]) {
            return Err(Error::Domain("path is not a parent/child chain".into()));
        }
    }
    let deep = &tree.nodes[*path.last().unwrap()];
    let radius_pp = tree.params.ball_radius(&deep.x);
    let radius = QInterval::point(radius_pp.enclosure(128).hi)
        .round_out_rel(128)
        .hi;
    let center = deep.x.hat();
    // containment in every ancestor ball
    for &aid in &path[..path.len() - 1] {
        let anc = &tree.nodes[aid];
        let d2 = anc.x.hat().dist_sq(&center);
        let r_anc = tree.params.ball_radius(&anc.x);
        let lhs: Vec<PowerProduct> = match PowerProduct::sqrt_of_or_zero(d2) {
            Some(d) => vec![d, PowerProduct::from_rat(radius.clone())],
            None => vec![PowerProduct::from_rat(radius.clone())],
        };
        if !sum_le(&lhs, &[r_anc])? {
            return Err(Error::HeightTooSmall(format!(
                "extracted enclosure not inside ancestor ball at node {}",
                aid
            )));
        }
    }
    Ok(TargetPoint::enclosure(center, radius))
}

// ---------------------------------------------------------------------------
// Sibling separation (certified family-level checks)
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct SeparationReport {
    /// pairwise within-witness separations d(z, z') >= lam1(y)/(2|y|^(1+2b))
    pub within_ok: bool,
    /// witness balls stay rho(x)/4 apart so cross-witness children separate
    pub cross_ok: bool,
    /// all sibling balls B(z) pairwise disjoint (certified chain)
    pub balls_disjoint: bool,
    /// all packing balls B'(z) pairwise disjoint and inside B'(x)
    pub packing_disjoint: bool,
    pub n_children: usize,
}

/// Certified disjointness for a full sibling family without quadratic pair
/// enumeration: within a witness the children are collinear (consecutive
/// pairs suffice); across witnesses the c1-freeze guarantees a rho(x)/2 gap;
/// ball radii are then compared against the worst-case gaps.
pub fn verify_separation(
    x: &PrimitiveVector,
    lat: &FareyLattice,
    fam: &[(Witness, ChildCandidate)],
    params: &TreeParams,
) -> Result<SeparationReport> {
    let mut within_ok = true;
    // group by witness (same y)
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, (w, _)) in fam.iter().enumerate() {
        match groups.iter_mut().find(|(gi, _)| fam[*gi].0.y == w.y) {
            Some((_, v)) => v.push(i),
            None => groups.push((i, vec![i])),
        }
    }
    let one = Rat::one();
    for (gi, members) in &groups {
        let w = &fam[*gi].0;
        // separation bound on squares: lam1_sq(y) / (4 |y|^(2+4b))
        let sep_bound = PowerProduct::from_rat(w.lat.lam1_sq.clone())
            .scale(&rat(1, 4))
            .mul(&PowerProduct::from_pow(
                rat_int(w.y.q.clone()),
                rat(-2, 1) * (&one + rat(2, 1) * &params.b),
            ));
        // children on the line: sort by position along u_y, check consecutive
        let mut pts: Vec<(Rat, usize)> = members
            .iter()
            .map(|&i| {
                let z = &fam[i].1.z;
                let d = z.hat().sub(&w.y.hat());
                // position = signed coefficient along u_y
                let t = if !w.u_y.x.is_zero() { &d.x / &w.u_y.x } else { &d.y / &w.u_y.y };
                // collinearity is part of D1 acceptance
                (t, i)
            })
            .collect();
        pts.sort_by(|a, b| a.0.cmp(&b.0));
        for pr in pts.windows(2) {
            let zi = &fam[pr[0].1].1.z;
            let zj = &fam[pr[1].1].1.z;
            let d2 = zi.hat().dist_sq(&zj.hat());
            if !sep_bound.le(&PowerProduct::from_rat(d2))? {
                within_ok = false;
            }
        }
    }
    // cross-witness: every child sits within c1 lam1(y)/|y| <= rho/4 of its
    // witness; witnesses are >= rho apart, so cross-children are >= rho/2 apart
    let rho_sq = rho_min_sq(x, lat, params)?;
    let mut cross_ok = true;
    for (w, c) in fam {
        let d2 = w.y.hat().dist_sq(&c.z.hat());
        // d <= rho/4 on squares
        if rat(16, 1) * &d2 > rho_sq {
            cross_ok = false;
        }
    }
    // ball disjointness: radii must be below half the worst-case gaps
    // within-line gap >= lam1(y)/(2|y|^(1+2b)); cross gap >= rho/2
    let mut max_radius: Option<PowerProduct> = None;
    for (_, c) in fam {
        let r = params.ball_radius(&c.z);
        max_radius = Some(match max_radius {
            None => r,
            Some(m) => {
                if r.try_cmp(&m)? == Ordering::Greater {
                    r
                } else {
                    m
                }
            }
        });
    }
    let max_radius = max_radius.expect("nonempty family");
    let mut balls_disjoint = within_ok && cross_ok;
    for (w, _) in fam {
        let gap = PowerProduct::sqrt_of(w.lat.lam1_sq.clone())
            .scale(&rat(1, 2))
            .mul(&PowerProduct::from_pow(
                rat_int(w.y.q.clone()),
                -(&one + rat(2, 1) * &params.b),
            ));
        // 2 max_radius < gap  =>  balls on the line are disjoint
        if !max_radius.scale(&rat(2, 1)).lt(&gap)? {
            balls_disjoint = false;
            break;
        }
    }
    if balls_disjoint {
        // cross gap: 2 max_radius < rho/2
        let rho = PowerProduct::sqrt_of(rho_sq.clone());
        if !max_radius.scale(&rat(4, 1)).lt(&rho)? {
            balls_disjoint = false;
        }
    }
    // packing balls: same gaps against c4 |z|^(pack) radii, plus containment
    let mut max_pack: Option<PowerProduct> = None;
    for (_, c) in fam {
        let r = params.packing_radius(&c.z);
        max_pack = Some(match max_pack {
            None => r,
            Some(m) => {
                if r.try_cmp(&m)? == Ordering::Greater {
                    r
                } else {
                    m
                }
            }
        });
    }
    let max_pack = max_pack.expect("nonempty family");
    let mut packing_disjoint = within_ok && cross_ok;
    for (w, _) in fam {
        let gap = PowerProduct::sqrt_of(w.lat.lam1_sq.clone())
            .scale(&rat(1, 2))
            .mul(&PowerProduct::from_pow(
                rat_int(w.y.q.clone()),
                -(&one + rat(2, 1) * &params.b),
            ));
        if !max_pack.scale(&rat(2, 1)).lt(&gap)? {
            packing_disjoint = false;
            break;
        }
    }
    if packing_disjoint {
        let rho = PowerProduct::sqrt_of(rho_sq);
        if !max_pack.scale(&rat(4, 1)).lt(&rho)? {
            packing_disjoint = false;
        }
    }
    if packing_disjoint {
        // containment: d(xhat, zhat) + r'(z) <= r'(x)
        let rx = params.packing_radius(x);
        for (_, c) in fam {
            let d2 = x.hat().dist_sq(&c.z.hat());
            let lhs = match PowerProduct::sqrt_of_or_zero(d2) {
                Some(d) => vec![d, params.packing_radius(&c.z)],
                None => vec![params.packing_radius(&c.z)],
            };
            if !sum_le(&lhs, &[rx.clone()])? {
                packing_disjoint = false;
                break;
            }
        }
    }
    Ok(SeparationReport {
        within_ok,
        cross_ok,
        balls_disjoint,
        packing_disjoint,
        n_children: fam.len(),
    })
}

// ---------------------------------------------------------------------------
// Distorted tiling of B(x)
// ---------------------------------------------------------------------------

/// Trapezoid cell T(m, a) with exact rational extreme points
/// xhat + (m' u1 + u2)/(l |x|), m' in {m, m+1}, l in {a, a+1}.
#[derive(Clone, Debug)]
pub struct TilingCell {
    pub m: Int,
    pub a: Int,
    pub vertices: [QVec2; 4],
}

#[derive(Clone, Debug)]
pub struct TilingReport {
    pub cells: Vec<TilingCell>,
    /// smallest power-of-two C0 for which the inner/outer rectangle axioms
    /// certify on every cell (None if none <= 2^14 works)
    pub c0_fit: Option<u32>,
    pub contained_in_ball: bool,
    pub overlaps_zero: bool,
    pub witness_on_vertical_side: bool,
    /// rho(x)^2 (exact), and the band rho vs V within factor 16
    pub rho_sq: Rat,
    pub rho_band_ok: bool,
}

/// Exact area of the intersection of two convex quadrilaterals
/// (Sutherland-Hodgman clip in rational arithmetic, then the shoelace).
fn convex_clip_area(a: &[QVec2], b: &[QVec2]) -> Rat {
    let mut poly: Vec<QVec2> = a.to_vec();
    let n = b.len();
    for i in 0..n {
        if poly.is_empty() {
            break;
        }
        let p1 = &b[i];
        let p2 = &b[(i + 1) % n];
        let edge = p2.sub(p1);
        let side = |pt: &QVec2| -> Rat { edge.det(&pt.sub(p1)) };
        let mut out: Vec<QVec2> = Vec::new();
        let m = poly.len();
        for j in 0..m {
            let cur = &poly[j];
            let nxt = &poly[(j + 1) % m];
            let sc = side(cur);
            let sn = side(nxt);
            if !sc.is_negative() {
                out.push(cur.clone());
            }
            if (sc.is_negative() && sn.is_positive()) || (sc.is_positive() && sn.is_negative()) {
                // intersection point
                let t = &sc / (&sc - &sn);
                out.push(QVec2::new(
                    &cur.x + (&nxt.x - &cur.x) * &t,
                    &cur.y + (&nxt.y - &cur.y) * &t,
                ));
            }
        }
        poly = out;
    }
    if poly.len() < 3 {
        return Rat::zero();
    }
    let mut area2 = Rat::zero();
    for j in 0..poly.len() {
        let p1 = &poly[j];
        let p2 = &poly[(j + 1) % poly.len()];
        area2 = area2 + p1.det(p2);
    }
    area2.abs() / rat(2, 1)
}

/// Build and verify the distorted tiling cells for a witness family of x.
/// Counter-clockwise orientation is normalized per cell before clipping.
pub fn tiling(
    x: &PrimitiveVector,
    lat: &FareyLattice,
    wits: &[Witness],
    params: &TreeParams,
) -> Result<TilingReport> {
    let one = Rat::one();
    let q = &x.q;
    let hat = x.hat();
    // frame: u1 the horizontal direction, n = u2 - c u1 its normal component
    let u1_sq = lat.u1.norm_sq();
    let c = lat.u1.dot(&lat.u2) / &u1_sq;
    let nvec = lat.u2.sub(&lat.u1.scale(&c));
    let n_sq = nvec.norm_sq();
    let h_pow = x.height_pow(&params.exps.h);
    let v_pow = x.height_pow(&params.exps.v);
    let radius = params.ball_radius(x);

    let mut cells = Vec::new();
    let mut contained = true;
    let mut on_side = true;
    struct CellGeom {
        s1: Rat,
        s2: Rat,
        eta_a: Rat,
        eta_a1: Rat,
    }
    let mut geoms = Vec::new();
    for w in wits {
        let a = w.y.q.div_floor(q);
        let vertex = |mm: &Rat, l: &Int| -> QVec2 {
            let denom = rat_int(l * q);
            hat.add(
                &lat.u1
                    .scale(mm)
                    .add(&lat.u2)
                    .scale(&denom.recip()),
            )
        };
        let m_r = rat_int(w.m.clone());
        let m1_r = &m_r + &one;
        let a1 = &a + Int::one();
        let vs = [
            vertex(&m_r, &a),
            vertex(&m1_r, &a),
            vertex(&m1_r, &a1),
            vertex(&m_r, &a1),
        ];
        // containment: all vertices inside B(x) (convexity extends to the cell)
        for v in &vs {
            let d2 = v.dist_sq(&hat);
            if let Some(d) = PowerProduct::sqrt_of_or_zero(d2) {
                if !d.le(&radius)? {
                    contained = false;
                }
            }
        }
        // witness on the left vertical side: yhat = xhat + alpha/|y| with
        // alpha = m u1 + u2 means xi = (m + c) eta exactly; check the height
        // band a q <= |y| <= (a+1) q
        if !(&a * q <= w.y.q && w.y.q <= &a1 * q) {
            on_side = false;
        }
        let eta_a = Rat::new(Int::one(), (&a * q).clone());
        let eta_a1 = Rat::new(Int::one(), (&a1 * q).clone());
        geoms.push(CellGeom {
            s1: &m_r + &c,
            s2: &m1_r + &c,
            eta_a,
            eta_a1,
        });
        cells.push(TilingCell { m: w.m.clone(), a, vertices: vs });
    }
    // pairwise overlaps: exact polygon intersection area must vanish
    let mut overlaps_zero = true;
    for i in 0..cells.len() {
        for j in (i + 1)..cells.len() {
            if cells[i].m == cells[j].m && cells[i].a == cells[j].a {
                continue; // identical cell from two witnesses in the same box
            }
            let ar = convex_clip_area(&cells[i].vertices, &cells[j].vertices);
            if !ar.is_zero() {
                overlaps_zero = false;
            }
        }
    }
    // inner/outer rectangle axioms: find the smallest power-of-two C0
    let mut c0_fit: Option<u32> = None;
    'c0: for k in 0..=14u32 {
        let c0 = pow_rat_i(&rat(2, 1), k as i64);
        let mut all_ok = true;
        for g in &geoms {
            // V0_eta = (V/C0)/|n|, H0_xi = (H/C0)/|u1|
            let v0 = v_pow
                .scale(&c0.recip())
                .mul(&PowerProduct::sqrt_of(n_sq.clone()).recip());
            let h0 = h_pow
                .scale(&c0.recip())
                .mul(&PowerProduct::sqrt_of(u1_sq.clone()).recip());
            let d_eta = &g.eta_a - &g.eta_a1;
            // feasibility: V0 <= eta_a - eta_a1
            if !v0.le(&PowerProduct::from_rat(d_eta.clone()))? {
                all_ok = false;
                break;
            }
            // inner width at the top strip [eta_a - V0, eta_a]:
            // eta_a >= H0 + wcoef * V0 with wcoef by slope signs
            let (lhs_extra, ok) = if !g.s1.is_negative() {
                (g.s2.clone(), true)
            } else if !g.s2.is_positive() {
                (g.s1.abs(), true)
            } else {
                (Rat::one(), true)
            };
            let _ = ok;
            let mut lhs = vec![h0.clone()];
            if lhs_extra.is_positive() {
                lhs.push(v0.scale(&lhs_extra));
            }
            if !sum_le(&lhs, &[PowerProduct::from_rat(g.eta_a.clone())])? {
                all_ok = false;
                break;
            }
            // outer: xi-span and eta-extent inside C0 H x C0 V
            let xi_candidates = [
                &g.s1 * &g.eta_a,
                &g.s1 * &g.eta_a1,
                &g.s2 * &g.eta_a,
                &g.s2 * &g.eta_a1,
            ];
            let xi_min = xi_candidates.iter().min().unwrap();
            let xi_max = xi_candidates.iter().max().unwrap();
            let span = xi_max - xi_min;
            // span * |u1| <= C0 H  (on squares)
            let span_pp = PowerProduct::from_rat(&span * &span).mul(&PowerProduct::from_rat(u1_sq.clone()));
            if !span_pp.le(&h_pow.scale(&c0).square())? {
                all_ok = false;
                break;
            }
            let d_eta_pp = PowerProduct::from_rat(&d_eta * &d_eta).mul(&PowerProduct::from_rat(n_sq.clone()));
            if !d_eta_pp.le(&v_pow.scale(&c0).square())? {
                all_ok = false;
                break;
            }
        }
        if all_ok {
            c0_fit = Some(k);
            break 'c0;
        }
    }
    // rho(x) and its band against V (factor 16 both ways)
    let rho_sq = rho_min_sq(x, lat, params)?;
    let rho = PowerProduct::sqrt_of(rho_sq.clone());
    let rho_band_ok = v_pow.scale(&rat(1, 16)).le(&rho)? && rho.le(&v_pow.scale(&rat(16, 1)))?;
    Ok(TilingReport {
        cells,
        c0_fit,
        contained_in_ball: contained,
        overlaps_zero,
        witness_on_vertical_side: on_side,
        rho_sq,
        rho_band_ok,
    })
}

// ---------------------------------------------------------------------------
// Mass distribution on cylinders
// ---------------------------------------------------------------------------

/// A ball-tree view: enough structure to carry the cylinder measure, either
/// from a built Tree or from a hand-made fixture.
#[derive(Clone, Debug)]
pub struct BallTree {
    pub parent: Vec<Option<usize>>,
    pub children: Vec<Vec<usize>>,
    pub diam: Vec<PowerProduct>,
    pub root: usize,
}

impl BallTree {
    pub fn from_tree(tree: &Tree) -> BallTree {
        let n = tree.nodes.len();
        let mut parent = vec![None; n];
        let mut children = vec![Vec::new(); n];
        let mut diam = Vec::with_capacity(n);
        for node in &tree.nodes {
            parent[node.id] = node.parent;
            children[node.id] = node.children.clone();
            diam.push(tree.params.ball_radius(&node.x).scale(&rat(2, 1)));
        }
        BallTree { parent, children, diam, root: tree.root }
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.parent.len()).filter(|&i| self.children[i].is_empty()).collect()
    }
}

/// Cylinder measure with exponent s: weights follow the recursion
/// w(child) = (diam child)^s / M(parent) * w(parent), M(x) = sum over
/// children of (diam)^s.  Weights are certified intervals; they collapse to
/// exact rationals in symmetric cases (all children of equal diameter).
#[derive(Clone, Debug)]
pub struct CylinderMeasure {
    pub s: Rat,
    pub weights: Vec<QInterval>,
    pub msums: Vec<Option<QInterval>>,
    /// interior nodes where M(x) >= (diam x)^s holds / fails / is undecided
    pub hypothesis_holds: Vec<(usize, Option<bool>)>,
    /// set when the tree was capped: weights renormalize over the present
    /// children rather than the full sigma(x)
    pub renormalized_over_present: bool,
}

pub fn mass_measure(bt: &BallTree, s: &Rat, bits: u32, capped: bool) -> Result<CylinderMeasure> {
    let n = bt.parent.len();
    let mut weights = vec![QInterval::point(Rat::zero()); n];
    let mut msums: Vec<Option<QInterval>> = vec![None; n];
    let mut hypothesis = Vec::new();
    weights[bt.root] = QInterval::point(Rat::one());
    // BFS order
    let mut order = vec![bt.root];
    let mut i = 0;
    while i < order.len() {
        let u = order[i];
        i += 1;
        for &c in &bt.children[u] {
            order.push(c);
        }
    }
    for &u in &order {
        if bt.children[u].is_empty() {
            continue;
        }
        let kids = &bt.children[u];
        let diam_s: Vec<PowerProduct> = kids.iter().map(|&c| bt.diam[c].pow(s)).collect();
        // equal-diameter fast path: exact weights 1/k
        let all_equal = diam_s
            .windows(2)
            .all(|w| matches!(w[0].try_cmp(&w[1]), Ok(Ordering::Equal)));
        let msum = if all_equal {
            let single = diam_s[0].enclosure(bits);
            single.scale(&rat(kids.len() as i64, 1))
        } else {
            let mut acc = QInterval::point(Rat::zero());
            for d in &diam_s {
                acc = acc.add(&d.enclosure(bits));
            }
            acc
        };
        // hypothesis (i): M(x) >= (diam x)^s
        let own = bt.diam[u].pow(s).enclosure(bits);
        let hyp = if msum.lo >= own.hi {
            Some(true)
        } else if msum.hi < own.lo {
            Some(false)
        } else {
            None
        };
        hypothesis.push((u, hyp));
        msums[u] = Some(msum.clone());
        let wu = weights[u].clone();
        for (j, &c) in kids.iter().enumerate() {
            if all_equal {
                weights[c] = wu.scale(&Rat::new(Int::one(), Int::from(kids.len())));
            } else {
                let ratio = diam_s[j].enclosure(bits).div(&msum)?;
                weights[c] = wu.mul(&ratio);
            }
        }
    }
    // additivity: children weights must sum to the node weight (exact in the
    // symmetric case, interval-consistent otherwise)
    for &u in &order {
        if bt.children[u].is_empty() {
            continue;
        }
        let mut acc = QInterval::point(Rat::zero());
        for &c in &bt.children[u] {
            acc = acc.add(&weights[c]);
        }
        if acc.intersect(&weights[u]).is_none() {
            return Err(Error::Domain(format!(
                "cylinder additivity violated at node {}",
                u
            )));
        }
    }
    Ok(CylinderMeasure {
        s: s.clone(),
        weights,
        msums,
        hypothesis_holds: hypothesis,
        renormalized_over_present: capped,
    })
}

// ---------------------------------------------------------------------------
// Exact cardinalities (no enumeration)
// ---------------------------------------------------------------------------

/// Distinct prime factors by trial division + Pollard rho for the leftovers.
fn prime_factors(n: &Int) -> Vec<Int> {
    let mut out = Vec::new();
    let mut n = n.abs();
    if n <= Int::one() {
        return out;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47] {
        let pp = Int::from(p);
        if (&n % &pp).is_zero() {
            out.push(pp.clone());
            while (&n % &pp).is_zero() {
                n /= &pp;
            }
        }
    }
    let mut p = Int::from(49u64);
    // continue trial division to 10^6
    while &p * &p <= n && p < Int::from(1_000_000u64) {
        if (&n % &p).is_zero() {
            out.push(p.clone());
            while (&n % &p).is_zero() {
                n /= &p;
            }
        }
        p += 2;
    }
    if n > Int::one() {
        if &p * &p > n {
            out.push(n);
        } else {
            // Pollard rho on the remaining (rare at audit scales)
            let mut stack = vec![n];
            while let Some(m) = stack.pop() {
                if m <= Int::one() {
                    continue;
                }
                if is_probable_prime(&m) {
                    if !out.contains(&m) {
                        out.push(m);
                    }
                    continue;
                }
                let d = pollard_rho(&m);
                stack.push(m.clone() / &d);
                stack.push(d);
            }
        }
    }
    out.sort();
    out
}

fn is_probable_prime(n: &Int) -> bool {
    use num_traits::ToPrimitive;
    if let Some(small) = n.to_u64() {
        if small < 2 {
            return false;
        }
        for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
            if small == p {
                return true;
            }
            if small % p == 0 {
                return false;
            }
        }
    }
    // Miller-Rabin with fixed bases (deterministic for < 3.3 * 10^24)
    let one = Int::one();
    let two = Int::from(2);
    let nm1 = n - &one;
    let mut d = nm1.clone();
    let mut r = 0u32;
    while (&d % &two).is_zero() {
        d /= &two;
        r += 1;
    }
    'bases: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let a = Int::from(a);
        if a >= *n {
            continue;
        }
        let mut x = a.modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 0..r.saturating_sub(1) {
            x = x.modpow(&two, n);
            if x == nm1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

fn pollard_rho(n: &Int) -> Int {
    use num_integer::Integer as _;
    let one = Int::one();
    if (n % Int::from(2)).is_zero() {
        return Int::from(2);
    }
    let mut c = Int::one();
    loop {
        let f = |x: &Int| (x * x + &c) % n;
        let mut x = Int::from(2);
        let mut y = Int::from(2);
        let mut d = Int::one();
        while d == one {
            x = f(&x);
            y = f(&f(&y));
            d = (&x - &y).abs().gcd(n);
        }
        if &d != n {
            return d;
        }
        c += 1;
    }
}

/// Exact count of k in [k_lo, k_hi] with gcd(a, k) = 1 (Moebius over the
/// distinct primes of a).
fn coprime_count_in_range(a: &Int, k_lo: &Int, k_hi: &Int) -> Int {
    if k_lo > k_hi {
        return Int::zero();
    }
    if a.is_zero() {
        // gcd(0, k) = |k|: coprime iff k = +-1
        let mut c = Int::zero();
        for t in [-1i64, 1] {
            let t = Int::from(t);
            if *k_lo <= t && t <= *k_hi {
                c += 1;
            }
        }
        return c;
    }
    let primes = prime_factors(a);
    let total: Int = k_hi - k_lo + Int::one();
    let mut count = total.clone();
    let np = primes.len();
    // inclusion-exclusion over squarefree divisors
    for mask in 1u32..(1 << np) {
        let mut d = Int::one();
        for (i, p) in primes.iter().enumerate() {
            if mask & (1 << i) != 0 {
                d *= p;
            }
        }
        let cnt = k_hi.div_floor(&d) - (k_lo - Int::one()).div_floor(&d);
        if mask.count_ones() % 2 == 1 {
            count -= cnt;
        } else {
            count += cnt;
        }
    }
    count
}

/// card D1(y): exact count of primitive (a, k) with z = a y' + k y satisfying
/// the D1 constraints, summed over the a-range with exact k-intervals.
pub fn card_d1(w: &Witness, params: &TreeParams) -> Result<Int> {
    let v_y = &w.y.q;
    let (z_lo, z_hi) = d1_window(v_y, &params.b);
    if z_lo > z_hi {
        return Ok(Int::zero());
    }
    let n_lift = &w.y_lift[2];
    let a_max: Int = (&params.c1 * rat_int(z_hi.clone()) / rat_int(v_y.clone()))
        .floor()
        .to_integer();
    // distance constraint: |a| |u_y| <= c1 lam1(y) v_z / v_y and |u_y| = lam1:
    // |a| <= c1 v_z / v_y, i.e. v_z >= |a| v_y / c1.
    let mut total = Int::zero();
    let mut a = -a_max.clone();
    while a <= a_max {
        if a.is_zero() {
            // only z = y itself, excluded by the height window (z >= z_lo > y)
            a += 1;
            continue;
        }
        // v_z >= max(z_lo, |a| v_y / c1), v_z <= z_hi, v_z = a n' + k v_y
        let min_vz_dist = (rat_int(a.abs() * v_y) / &params.c1).ceil().to_integer();
        let vz_lo = (&z_lo).max(&min_vz_dist).clone();
        if vz_lo > z_hi {
            a += 1;
            continue;
        }
        let base_lo = &vz_lo - &a * n_lift;
        let mut k_lo = base_lo.div_floor(v_y);
        while &a * n_lift + &k_lo * v_y < vz_lo {
            k_lo += 1;
        }
        let base_hi = &z_hi - &a * n_lift;
        let k_hi = base_hi.div_floor(v_y);
        if k_lo > k_hi {
            a += 1;
            continue;
        }
        total += coprime_count_in_range(&a, &k_lo, &k_hi);
        a += 1;
    }
    Ok(total)
}

/// card E1(x): exact count of primitive y in the ray windows.
pub fn card_e1(x: &PrimitiveVector, lat: &FareyLattice, params: &TreeParams) -> Result<Int> {
    let m_limit = e1_m_limit(lat);
    let mut total = Int::zero();
    for m in ray_order(&m_limit) {
        let r = match ray_data(x, lat, &params.mu, &m) {
            Some(r) => r,
            None => continue,
        };
        // heights v = y0[2] + k q in [v_lo, v_hi]; y = y0 + k x primitive.
        // bad primes p divide all coords of y0 + k x only if p | g where g is
        // the gcd of the 2x2 minors of (x, y0); each such p excludes one
        // residue class of k mod p.
        let x3 = x.as_vec3();
        let minors = [
            &r.y0[0] * &x3[1] - &r.y0[1] * &x3[0],
            &r.y0[0] * &x3[2] - &r.y0[2] * &x3[0],
            &r.y0[1] * &x3[2] - &r.y0[2] * &x3[1],
        ];
        let g = minors[0].gcd(&minors[1]).gcd(&minors[2]);
        let mut k_lo = (&r.v_lo - &r.y0[2]).div_floor(&x.q);
        while &r.y0[2] + &k_lo * &x.q < r.v_lo {
            k_lo += 1;
        }
        let k_hi = (&r.v_hi - &r.y0[2]).div_floor(&x.q);
        if k_lo > k_hi {
            continue;
        }
        let len: Int = &k_hi - &k_lo + Int::one();
        let mut count = len.clone();
        if !g.is_one() && !g.is_zero() {
            let primes = prime_factors(&g);
            // find, per prime, the excluded residue class (if any)
            let mut residues: Vec<(Int, Int)> = Vec::new();
            for p in primes {
                // solve y0 + k x == 0 mod p on a coordinate where x != 0 mod p
                let mut found: Option<Int> = None;
                for i in 0..3 {
                    let xi = x3[i].mod_floor(&p);
                    if !xi.is_zero() {
                        let inv =mod_inverse(&xi, &p);
                        let k0 = ((-r.y0[i].clone()).mod_floor(&p) * inv).mod_floor(&p);
                        found = Some(k0);
                        break;
                    }
                }
                if let Some(k0) = found {
                    // verify all three coordinates vanish for this class
                    let probe = vec3_add(&r.y0, &vec3_scale(&x3, &k0));
                    if probe.iter().all(|c| c.mod_floor(&p).is_zero()) {
                        residues.push((p, k0));
                    }
                }
            }
            // inclusion-exclusion over the residue classes (distinct primes)
            let np = residues.len();
            for mask in 1u32..(1 << np) {
                let mut modulus = Int::one();
                for (i, (p, _)) in residues.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        modulus *= p;
                    }
                }
                // CRT residue
                let mut rem = Int::zero();
                let mut mm = Int::one();
                for (i, (p, k0)) in residues.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        // combine rem mod mm with k0 mod p
                        let inv = mod_inverse(&mm.mod_floor(p), p);
                        let t = ((k0 - &rem).mod_floor(p) * inv).mod_floor(p);
                        rem = &rem + &mm * t;
                        mm *= p;
                    }
                }
                let cnt = (k_hi.clone() - &rem).div_floor(&modulus)
                    - (k_lo.clone() - Int::one() - &rem).div_floor(&modulus);
                if mask.count_ones() % 2 == 1 {
                    count -= cnt;
                } else {
                    count += cnt;
                }
            }
        }
        total += count;
    }
    Ok(total)
}

fn mod_inverse(a: &Int, m: &Int) -> Int {
    // extended euclid; m prime in our uses
    let e = a.extended_gcd(m);
    e.x.mod_floor(m)
}

/// card sigma(x) = sum over E1 witnesses of card D1(y).  Exact but requires
/// materializing every witness lattice: shallow-height audits only.
pub fn card_sigma(
    x: &PrimitiveVector,
    lat: &FareyLattice,
    params: &TreeParams,
) -> Result<Int> {
    let wits = enumerate_e1(x, lat, params, None)?;
    let mut total = Int::zero();
    for w in &wits {
        total += card_d1(w, params)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exponents::b0;

    fn params_06_b0(root: &PrimitiveVector) -> TreeParams {
        let b_enc = b0(&rat(3, 5), 40).unwrap();
        let b = rational_approx(&b_enc.mid(), 64);
        TreeParams::derive(rat(3, 5), b, root, 4, 6).unwrap()
    }

    #[test]
    fn b_auto_is_small_denominator() {
        let b_enc = b0(&rat(3, 5), 40).unwrap();
        let b = rational_approx(&b_enc.mid(), 64);
        assert!(b.denom() <= &Int::from(64));
        assert!((b - b_enc.mid()).abs() < rat(1, 100));
    }

    #[test]
    fn e1_window_exact_bounds() {
        // alpha_sq = 1, q = 2, mu = 3/5: window = [(64)^2.5, 2*(64)^2.5]
        let (lo, hi) = e1_window(&rat(1, 1), &Int::from(2), &rat(3, 5));
        // (64)^(5/2) = 32768
        assert_eq!(lo, Int::from(32768));
        assert_eq!(hi, Int::from(65536));
    }

    #[test]
    fn d1_window_exact_bounds() {
        // b = 1: [v^2/2, v^2]
        let (lo, hi) = d1_window(&Int::from(10), &rat(1, 1));
        assert_eq!(lo, Int::from(50));
        assert_eq!(hi, Int::from(100));
        // b = 1/2: [v^1.5/2, v^1.5]
        let (lo, hi) = d1_window(&Int::from(100), &rat(1, 2));
        assert_eq!(hi, Int::from(1000));
        assert_eq!(lo, Int::from(500));
    }

    #[test]
    fn first_generation_builds() {
        let root = default_root(8);
        let params = params_06_b0(&root);
        let lat = FareyLattice::new(&root);
        let wits = enumerate_e1(&root, &lat, &params, Some(3)).unwrap();
        assert!(!wits.is_empty());
        for w in &wits {
            // lambda_1(y) band: within [1/64, 1/32] of |y|^-mu by the window
            let lam1 = PowerProduct::sqrt_of(w.lat.lam1_sq.clone());
            let bound = w.y.height_pow(&rat(-3, 5));
            assert!(lam1.le(&bound).unwrap());
            assert!(bound.scale(&rat(1, 128)).le(&lam1).unwrap());
        }
        let kids = children(&root, &lat, &params).unwrap();
        assert!(!kids.is_empty());
        let rep = verify_separation(&root, &lat, &kids, &params).unwrap();
        assert!(rep.within_ok && rep.cross_ok, "{:?}", rep);
        assert!(rep.balls_disjoint, "{:?}", rep);
        assert!(rep.packing_disjoint, "{:?}", rep);
    }

    #[test]
    fn depth2_tree_and_extraction() {
        let root = default_root(8);
        let mut params = params_06_b0(&root);
        params.witness_cap = 2;
        params.child_cap = 2;
        let tree = build_tree(&root, &params, 2, 64).unwrap();
        assert!(tree.nodes.len() >= 3);
        // depth 0: root only
        let t0 = build_tree(&root, &params, 0, 8).unwrap();
        assert_eq!(t0.nodes.len(), 1);
        // extract from the deepest path and check ancestor containment
        let leaf = *tree.leaves().iter().max_by_key(|&&i| tree.nodes[i].depth).unwrap();
        let path = tree.path_to(leaf);
        let target = extract_point(&tree, &path).unwrap();
        assert!(target.radius.is_positive());
        // single-node path returns the root ball
        let t1 = extract_point(&tree, &path[..1]).unwrap();
        assert!(t1.radius > target.radius);
    }

    #[test]
    fn corrupted_radius_fails_inclusion() {
        let root = default_root(8);
        let params = params_06_b0(&root);
        let lat = FareyLattice::new(&root);
        let mut bad = params.clone();
        // doubling c2 far beyond the adaptive bound must break (a)
        bad.c2 = &params.c2 * rat(1 << 12, 1);
        let rep = verify_node(&root, &lat, &bad, VerifyLevel::Bootstrap).unwrap();
        assert!(!rep.legendre_inclusion);
        let good = verify_node(&root, &lat, &params, VerifyLevel::Bootstrap).unwrap();
        assert!(good.legendre_inclusion);
    }
}
