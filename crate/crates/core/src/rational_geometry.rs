//! Exact geometry kernel: primitive integer vectors, the planar lattices
//! Lambda_x = Z^2 + Z*(p/q) they generate, Gauss-reduced bases with exact
//! squared successive minima, wedge products, the distinguished line H_x and
//! projected-lattice minima.
//!
//! All lattice work happens in the scaled integer lattice q*Lambda_x inside
//! Z^2; dividing by q at the end keeps HNF and Gauss reduction integral.

use crate::arith::*;
use crate::error::{Error, Result};
use crate::power::PowerProduct;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use std::fmt;

/// Element of Q: (p1, p2, q) with gcd 1 and q > 0; |x| = q, xhat = p/q.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PrimitiveVector {
    pub p1: Int,
    pub p2: Int,
    pub q: Int,
}

pub type Vec3 = [Int; 3];

/// Exact rational point/vector in the plane.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QVec2 {
    pub x: Rat,
    pub y: Rat,
}

impl QVec2 {
    pub fn new(x: Rat, y: Rat) -> Self {
        QVec2 { x, y }
    }

    pub fn zero() -> Self {
        QVec2 { x: Rat::zero(), y: Rat::zero() }
    }

    pub fn norm_sq(&self) -> Rat {
        &self.x * &self.x + &self.y * &self.y
    }

    pub fn dot(&self, o: &QVec2) -> Rat {
        &self.x * &o.x + &self.y * &o.y
    }

    pub fn det(&self, o: &QVec2) -> Rat {
        &self.x * &o.y - &self.y * &o.x
    }

    pub fn sub(&self, o: &QVec2) -> QVec2 {
        QVec2::new(&self.x - &o.x, &self.y - &o.y)
    }

    pub fn add(&self, o: &QVec2) -> QVec2 {
        QVec2::new(&self.x + &o.x, &self.y + &o.y)
    }

    pub fn scale(&self, k: &Rat) -> QVec2 {
        QVec2::new(&self.x * k, &self.y * k)
    }

    pub fn dist_sq(&self, o: &QVec2) -> Rat {
        self.sub(o).norm_sq()
    }
}

impl fmt::Display for QVec2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

impl PrimitiveVector {
    /// Unique Q-representative of the integer line through (p1, p2, q).
    pub fn new<T: Into<Int>>(p1: T, p2: T, q: T) -> Result<Self> {
        Self::from_ints(p1.into(), p2.into(), q.into())
    }

    pub fn from_ints(mut p1: Int, mut p2: Int, mut q: Int) -> Result<Self> {
        if p1.is_zero() && p2.is_zero() && q.is_zero() {
            return Err(Error::ZeroVector);
        }
        let g = gcd3(&p1, &p2, &q);
        p1 /= &g;
        p2 /= &g;
        q /= &g;
        // sign convention: q > 0; for q == 0 the element is not in Q
        if q.is_negative() {
            p1 = -p1;
            p2 = -p2;
            q = -q;
        }
        if q.is_zero() {
            return Err(Error::Domain(
                "last coordinate is zero: not a rational point of the plane".into(),
            ));
        }
        Ok(PrimitiveVector { p1, p2, q })
    }

    pub fn height(&self) -> &Int {
        &self.q
    }

    /// xhat = p/q.
    pub fn hat(&self) -> QVec2 {
        QVec2::new(
            Rat::new(self.p1.clone(), self.q.clone()),
            Rat::new(self.p2.clone(), self.q.clone()),
        )
    }

    pub fn as_vec3(&self) -> Vec3 {
        [self.p1.clone(), self.p2.clone(), self.q.clone()]
    }

    /// |x|^e as an exact power quantity.
    pub fn height_pow(&self, e: &Rat) -> PowerProduct {
        PowerProduct::from_pow(rat_int(self.q.clone()), e.clone())
    }
}

impl fmt::Display for PrimitiveVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.p1, self.p2, self.q)
    }
}

pub fn vec3_add(a: &Vec3, b: &Vec3) -> Vec3 {
    [&a[0] + &b[0], &a[1] + &b[1], &a[2] + &b[2]]
}

pub fn vec3_sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [&a[0] - &b[0], &a[1] - &b[1], &a[2] - &b[2]]
}

pub fn vec3_scale(a: &Vec3, k: &Int) -> Vec3 {
    [&a[0] * k, &a[1] * k, &a[2] * k]
}

pub fn vec3_neg(a: &Vec3) -> Vec3 {
    [-a[0].clone(), -a[1].clone(), -a[2].clone()]
}

pub fn vec3_is_zero(a: &Vec3) -> bool {
    a[0].is_zero() && a[1].is_zero() && a[2].is_zero()
}

/// pi_x(m, n) = m - n*xhat, the projection of Z^3 along the line R*x.
pub fn project_along(x: &PrimitiveVector, z: &Vec3) -> QVec2 {
    let hat = x.hat();
    QVec2::new(
        rat_int(z[0].clone()) - rat_int(z[2].clone()) * hat.x,
        rat_int(z[1].clone()) - rat_int(z[2].clone()) * hat.y,
    )
}

/// Squared wedge |x ^ y|^2: the cross components of the 2x3 matrix (x; y)
/// restricted to the e_i ^ e_3 plane.  |x ^ y| = |x||y| d(xhat, yhat).
pub fn wedge_sq(x: &PrimitiveVector, y: &PrimitiveVector) -> Rat {
    let c1 = &x.p1 * &y.q - &y.p1 * &x.q;
    let c2 = &x.p2 * &y.q - &y.p2 * &x.q;
    rat_int(&c1 * &c1 + &c2 * &c2)
}

/// |x ^ y| as an exact power quantity (sqrt of the exact square).
pub fn wedge(x: &PrimitiveVector, y: &PrimitiveVector) -> PowerProduct {
    PowerProduct::sqrt_of(wedge_sq(x, y))
}

/// Farey lattice Lambda_x with a canonical Gauss-reduced basis.
///
/// Invariants (all exact): |u1|^2 <= |u2|^2, 2|<u1,u2>| <= |u1|^2,
/// det(u1,u2) = 1/q, lam1_sq/lam2_sq are the squared successive minima,
/// pi_x(w_i) = u_i with the third coordinate of w_i in [0, q).
#[derive(Clone, Debug)]
pub struct FareyLattice {
    pub owner: PrimitiveVector,
    pub u1: QVec2,
    pub u2: QVec2,
    /// scaled integer basis: q*u1, q*u2
    pub v1: [Int; 2],
    pub v2: [Int; 2],
    pub w1: Vec3,
    pub w2: Vec3,
    pub lam1_sq: Rat,
    pub lam2_sq: Rat,
}

#[derive(Clone)]
struct Tracked {
    v: [Int; 2],
    w: Vec3,
}

impl Tracked {
    fn norm_sq(&self) -> Int {
        &self.v[0] * &self.v[0] + &self.v[1] * &self.v[1]
    }

    fn dot(&self, o: &Tracked) -> Int {
        &self.v[0] * &o.v[0] + &self.v[1] * &o.v[1]
    }

    fn sub_mul(&mut self, o: &Tracked, k: &Int) {
        self.v[0] -= k * &o.v[0];
        self.v[1] -= k * &o.v[1];
        self.w = vec3_sub(&self.w, &vec3_scale(&o.w, k));
    }

    fn is_zero(&self) -> bool {
        self.v[0].is_zero() && self.v[1].is_zero()
    }
}

/// Reduce three generators of a rank-2 sublattice of Z^2 to a basis,
/// carrying Z^3 preimages through every row operation.
fn basis_from_generators(mut rows: Vec<Tracked>) -> (Tracked, Tracked) {
    // Euclid on first coordinates until at most one row has v[0] != 0
    loop {
        let mut nz: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i].v[0].is_zero()).collect();
        if nz.len() <= 1 {
            break;
        }
        nz.sort_by_key(|&i| rows[i].v[0].abs());
        let pivot = rows[nz[0]].clone();
        for &i in &nz[1..] {
            let k = rows[i].v[0].div_floor(&pivot.v[0]);
            rows[i].sub_mul(&pivot, &k);
        }
    }
    let i0 = (0..rows.len())
        .find(|&i| !rows[i].v[0].is_zero())
        .expect("rank-2 lattice: some generator has nonzero first coordinate");
    let r1 = rows[i0].clone();
    // gcd of second coordinates among remaining rows
    loop {
        let mut nz: Vec<usize> = (0..rows.len())
            .filter(|&i| i != i0 && !rows[i].v[1].is_zero())
            .collect();
        if nz.len() <= 1 {
            break;
        }
        nz.sort_by_key(|&i| rows[i].v[1].abs());
        let pivot = rows[nz[0]].clone();
        for &i in &nz[1..] {
            let k = rows[i].v[1].div_floor(&pivot.v[1]);
            rows[i].sub_mul(&pivot, &k);
        }
    }
    let i1 = (0..rows.len())
        .find(|&i| i != i0 && !rows[i].v[1].is_zero())
        .expect("rank-2 lattice: independent second generator");
    (r1, rows[i1].clone())
}

/// Lagrange (Gauss) reduction; terminates with |v1| <= |v2|, 2|<v1,v2>| <= |v1|^2.
fn gauss_reduce(mut a: Tracked, mut b: Tracked) -> (Tracked, Tracked) {
    loop {
        if a.norm_sq() > b.norm_sq() {
            std::mem::swap(&mut a, &mut b);
        }
        let na = a.norm_sq();
        let r = round_nearest(&Rat::new(a.dot(&b), na));
        if r.is_zero() {
            break;
        }
        b.sub_mul(&a, &r);
        if b.norm_sq() >= a.norm_sq() {
            break;
        }
    }
    if a.norm_sq() > b.norm_sq() {
        std::mem::swap(&mut a, &mut b);
    }
    (a, b)
}

/// Deterministic choice among coefficient pairs: sign-normalize (leading
/// nonzero positive), then take the lexicographic max of (a^2, a, b).
/// Reproduces u1 = (1, 0) on the unit lattice.
fn canonical_pick(cands: &[(i64, i64)]) -> (i64, i64) {
    let mut best: Option<(i64, i64)> = None;
    for &(a, b) in cands {
        let (a, b) = if a < 0 || (a == 0 && b < 0) { (-a, -b) } else { (a, b) };
        let key = (a * a, a, b);
        match best {
            None => best = Some((a, b)),
            Some((ba, bb)) => {
                let bkey = (ba * ba, ba, bb);
                if key > bkey {
                    best = Some((a, b));
                }
            }
        }
    }
    best.expect("nonempty candidate set")
}

impl FareyLattice {
    /// Lambda_x = Z^2 + Z*xhat via HNF of {(q,0), (0,q), (p1,p2)} scaled by
    /// 1/q, then Gauss reduction, then deterministic tie canonicalization.
    pub fn new(x: &PrimitiveVector) -> FareyLattice {
        let q = x.q.clone();
        let rows = vec![
            Tracked { v: [q.clone(), Int::zero()], w: [Int::one(), Int::zero(), Int::zero()] },
            Tracked { v: [Int::zero(), q.clone()], w: [Int::zero(), Int::one(), Int::zero()] },
            Tracked {
                v: [x.p1.clone(), x.p2.clone()],
                w: [Int::zero(), Int::zero(), -Int::one()],
            },
        ];
        let rows: Vec<Tracked> = rows.into_iter().filter(|r| !r.is_zero()).collect();
        let (b1, b2) = basis_from_generators(rows);
        let (g1, g2) = gauss_reduce(b1, b2);

        // canonical shortest vector s among +-g1, +-g2, +-(g1 +- g2)
        let lam1 = g1.norm_sq();
        let lam2 = g2.norm_sq();
        let combos: Vec<(i64, i64)> = vec![(1, 0), (0, 1), (1, 1), (1, -1), (-1, 1), (-1, -1), (2, 1), (1, 2), (2, -1), (-1, 2)];
        let eval = |a: i64, b: i64| -> Tracked {
            let mut t = Tracked {
                v: [Int::zero(), Int::zero()],
                w: [Int::zero(), Int::zero(), Int::zero()],
            };
            t.sub_mul(&g1, &Int::from(-a));
            t.sub_mul(&g2, &Int::from(-b));
            t
        };
        let short_cands: Vec<(i64, i64)> = combos
            .iter()
            .copied()
            .filter(|&(a, b)| eval(a, b).norm_sq() == lam1)
            .collect();
        let (sa, sb) = canonical_pick(&short_cands);
        let mut s = eval(sa, sb);
        // vector-level sign normalization: leading nonzero coordinate positive
        if s.v[0].is_negative() || (s.v[0].is_zero() && s.v[1].is_negative()) {
            s.v[0] = -s.v[0].clone();
            s.v[1] = -s.v[1].clone();
            s.w = vec3_neg(&s.w);
        }
        let (sa, sb) = {
            // recompute s's coefficients after the sign flip for the det test
            let d = &g1.v[0] * &g2.v[1] - &g1.v[1] * &g2.v[0];
            let a = (&s.v[0] * &g2.v[1] - &s.v[1] * &g2.v[0]) / &d;
            let b = (&g1.v[0] * &s.v[1] - &g1.v[1] * &s.v[0]) / &d;
            let a: i64 = (&a).try_into().unwrap();
            let b: i64 = (&b).try_into().unwrap();
            (a, b)
        };

        // canonical second vector: norm lam2, unimodular with s
        let second_cands: Vec<(i64, i64)> = combos
            .iter()
            .copied()
            .flat_map(|(a, b)| [(a, b), (-a, -b)])
            .filter(|&(a, b)| {
                eval(a, b).norm_sq() == lam2 && (sa * b - sb * a).abs() == 1
            })
            .collect();
        let (ta, tb) = canonical_pick(&second_cands);
        let mut t = eval(ta, tb);
        // orientation: det(s, t) = +q
        if (&s.v[0] * &t.v[1] - &s.v[1] * &t.v[0]).is_negative() {
            t.v[0] = -t.v[0].clone();
            t.v[1] = -t.v[1].clone();
            t.w = vec3_neg(&t.w);
        }
        // size-reduce t against s (keeps norm minimal, restores Gauss bound)
        let r = round_nearest(&Rat::new(s.dot(&t), s.norm_sq()));
        let mut t = t;
        t.sub_mul(&s, &r);
        debug_assert!(t.norm_sq() == lam2);

        let mut lat = FareyLattice {
            owner: x.clone(),
            u1: QVec2::new(Rat::new(s.v[0].clone(), q.clone()), Rat::new(s.v[1].clone(), q.clone())),
            u2: QVec2::new(Rat::new(t.v[0].clone(), q.clone()), Rat::new(t.v[1].clone(), q.clone())),
            v1: s.v.clone(),
            v2: t.v.clone(),
            w1: s.w.clone(),
            w2: t.w.clone(),
            lam1_sq: Rat::new(lam1, &q * &q),
            lam2_sq: Rat::new(lam2, &q * &q),
        };
        lat.normalize_preimages();
        lat.debug_validate();
        lat
    }

    /// Shift preimages by multiples of x so the third coordinate is in [0, q).
    fn normalize_preimages(&mut self) {
        let x3 = self.owner.as_vec3();
        let q = &self.owner.q;
        for w in [&mut self.w1, &mut self.w2] {
            let k = w[2].div_floor(q);
            if !k.is_zero() {
                *w = vec3_sub(w, &vec3_scale(&x3, &k));
            }
            debug_assert!(!w[2].is_negative() && w[2] < *q);
        }
    }

    fn debug_validate(&self) {
        debug_assert!(self.lam1_sq <= self.lam2_sq);
        let d = self.u1.det(&self.u2);
        debug_assert_eq!(d.abs(), Rat::new(Int::one(), self.owner.q.clone()));
        let ip = self.u1.dot(&self.u2);
        debug_assert!(rat(2, 1) * ip.abs() <= self.u1.norm_sq());
        debug_assert_eq!(project_along(&self.owner, &self.w1), self.u1);
        debug_assert_eq!(project_along(&self.owner, &self.w2), self.u2);
        // Minkowski window on (lam1*lam2/covol)^2: within [1, 4/3]
        let qq = rat_int(&self.owner.q * &self.owner.q);
        let prod = &self.lam1_sq * &self.lam2_sq * &qq;
        debug_assert!(prod >= Rat::one());
        debug_assert!(prod <= rat(4, 3));
    }

    /// covolume = |det(u1, u2)| = 1/q.
    pub fn covolume(&self) -> Rat {
        Rat::new(Int::one(), self.owner.q.clone())
    }

    pub fn lambda1(&self) -> PowerProduct {
        PowerProduct::sqrt_of(self.lam1_sq.clone())
    }

    pub fn lambda2(&self) -> PowerProduct {
        PowerProduct::sqrt_of(self.lam2_sq.clone())
    }

    /// Generator of the minimal-covolume line Lambda'_x (the canonical
    /// shortest vector) together with an integer lift y' with pi_x(y') = u1
    /// and |third coordinate| <= q/2.
    pub fn sublattice_h(&self) -> (QVec2, Vec3) {
        let q = &self.owner.q;
        let x3 = self.owner.as_vec3();
        let mut w = self.w1.clone();
        // third coordinate currently in [0, q); fold into (-q/2, q/2]
        let two_n = rat(2, 1) * rat_int(w[2].clone());
        if two_n > rat_int(q.clone()) {
            w = vec3_sub(&w, &x3);
        }
        debug_assert!(rat(2, 1) * rat_int(w[2].abs()) <= rat_int(q.clone()));
        debug_assert_eq!(project_along(&self.owner, &w), self.u1);
        (self.u1.clone(), w)
    }

    /// Exact membership test for the plane H_x: y in H_x iff
    /// det(yhat - xhat, u1) = 0 (Lemma: yhat in xhat + H'_x).
    pub fn member_h(&self, y: &PrimitiveVector) -> bool {
        let d = y.hat().sub(&self.owner.hat());
        d.det(&self.u1).is_zero()
    }

    /// Coordinates of a lattice vector alpha in the basis (u1, u2); None if
    /// alpha is not in Lambda_x.
    pub fn coords(&self, alpha: &QVec2) -> Option<(Int, Int)> {
        let det = self.u1.det(&self.u2);
        let a = alpha.det(&self.u2) / det.clone();
        let b = self.u1.det(alpha) / det;
        if a.is_integer() && b.is_integer() {
            Some((a.to_integer(), b.to_integer()))
        } else {
            None
        }
    }

    /// lambda_1(alpha)^2 = 1/(|alpha|^2 q^2): the squared first minimum of the
    /// projection of Lambda_x onto the line orthogonal to the primitive
    /// lattice element alpha.
    pub fn lambda1_alpha_sq(&self, alpha: &QVec2) -> Result<Rat> {
        let (a, b) = self
            .coords(alpha)
            .ok_or_else(|| Error::NotPrimitive(format!("{} is not in the lattice", alpha)))?;
        if a.is_zero() && b.is_zero() {
            return Err(Error::NotPrimitive("alpha = 0".into()));
        }
        if a.gcd(&b) != Int::one() {
            return Err(Error::NotPrimitive(format!(
                "basis coordinates ({}, {}) are not coprime",
                a, b
            )));
        }
        let n = alpha.norm_sq();
        let qq = rat_int(&self.owner.q * &self.owner.q);
        Ok((n * qq).recip())
    }
}

/// Brute-force squared shortest vector over a coefficient box (test oracle).
pub fn brute_force_min_sq(lat: &FareyLattice, box_radius: i64) -> Rat {
    let mut best: Option<Rat> = None;
    for a in -box_radius..=box_radius {
        for b in -box_radius..=box_radius {
            if a == 0 && b == 0 {
                continue;
            }
            let v = lat.u1.scale(&rat(a, 1)).add(&lat.u2.scale(&rat(b, 1)));
            let n = v.norm_sq();
            if best.as_ref().map_or(true, |m| n < *m) {
                best = Some(n);
            }
        }
    }
    best.unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pv(p1: i64, p2: i64, q: i64) -> PrimitiveVector {
        PrimitiveVector::new(p1, p2, q).unwrap()
    }

    #[test]
    fn make_primitive_normalizes() {
        assert_eq!(pv(2, 0, 4), pv(1, 0, 2));
        assert_eq!(pv(1, 1, 3), PrimitiveVector::new(1, 1, 3).unwrap());
        assert_eq!(pv(-1, 0, -2), pv(1, 0, 2));
        assert_eq!(PrimitiveVector::new(0, 0, 0).unwrap_err(), Error::ZeroVector);
    }

    #[test]
    fn unit_lattice() {
        let x = pv(0, 0, 1);
        let lat = FareyLattice::new(&x);
        assert_eq!(lat.lam1_sq, rat(1, 1));
        assert_eq!(lat.lam2_sq, rat(1, 1));
        // canonical tie-break picks u1 = (1, 0) on the square lattice
        assert_eq!(lat.u1, QVec2::new(rat(1, 1), rat(0, 1)));
    }

    #[test]
    fn lattice_102() {
        let x = pv(1, 0, 2);
        let lat = FareyLattice::new(&x);
        assert_eq!(lat.lam1_sq, rat(1, 4));
        assert_eq!(lat.lam2_sq, rat(1, 1));
        assert_eq!(brute_force_min_sq(&lat, 4), rat(1, 4));
        assert_eq!(lat.u1, QVec2::new(rat(1, 2), rat(0, 1)));
    }

    #[test]
    fn lattice_113() {
        let x = pv(1, 1, 3);
        let lat = FareyLattice::new(&x);
        assert_eq!(lat.lam1_sq, rat(2, 9));
        assert_eq!(lat.lam2_sq, rat(5, 9));
        // covolume and Minkowski: 1/9 <= (2/9)(5/9)^... checked in validate
        assert_eq!(brute_force_min_sq(&lat, 4), rat(2, 9));
    }

    #[test]
    fn wedge_identity_and_values() {
        let x = pv(1, 0, 2);
        let y = pv(1, 1, 3);
        assert_eq!(wedge_sq(&x, &y), rat(5, 1));
        // |x|^2 |y|^2 d(xhat, yhat)^2 = 36 * (5/36) = 5
        let d2 = x.hat().dist_sq(&y.hat());
        assert_eq!(rat(36, 1) * d2, rat(5, 1));
        assert_eq!(wedge_sq(&x, &x), rat(0, 1));
        assert_eq!(wedge_sq(&pv(0, 0, 1), &pv(1, 0, 2)), rat(1, 1));
    }

    #[test]
    fn projection_examples() {
        let x = pv(1, 0, 2);
        assert_eq!(
            project_along(&x, &[Int::one(), Int::zero(), Int::zero()]),
            QVec2::new(rat(1, 1), rat(0, 1))
        );
        assert_eq!(
            project_along(&x, &[Int::zero(), Int::zero(), Int::one()]),
            QVec2::new(rat(-1, 2), rat(0, 1))
        );
        let x = pv(1, 1, 3);
        assert_eq!(
            project_along(&x, &[Int::one(), Int::zero(), Int::one()]),
            QVec2::new(rat(2, 3), rat(-1, 3))
        );
    }

    #[test]
    fn sublattice_h_examples() {
        let x = pv(0, 0, 1);
        let lat = FareyLattice::new(&x);
        let (u1, _) = lat.sublattice_h();
        assert_eq!(u1, QVec2::new(rat(1, 1), rat(0, 1)));

        let x = pv(1, 0, 2);
        let lat = FareyLattice::new(&x);
        let (u1, lift) = lat.sublattice_h();
        assert_eq!(u1, QVec2::new(rat(1, 2), rat(0, 1)));
        assert_eq!(project_along(&x, &lift), u1);
        assert!(rat(2, 1) * rat_int(lift[2].abs()) <= rat_int(x.q.clone()));

        let x = pv(1, 1, 3);
        let lat = FareyLattice::new(&x);
        let (u1, lift) = lat.sublattice_h();
        // shortest vector is +-(1/3, 1/3); canonical sign has positive lead
        assert_eq!(u1, QVec2::new(rat(1, 3), rat(1, 3)));
        assert_eq!(project_along(&x, &lift), u1);
        assert!(rat(2, 1) * rat_int(lift[2].abs()) <= rat_int(x.q.clone()));
    }

    #[test]
    fn member_h_examples() {
        let x = pv(1, 0, 2);
        let lat = FareyLattice::new(&x);
        assert!(lat.member_h(&x));
        // u1 = (1/2, 0): yhat - xhat must be collinear with (1, 0)
        assert!(lat.member_h(&pv(1, 0, 3)));
        assert!(!lat.member_h(&pv(1, 1, 3)));
    }

    #[test]
    fn lambda1_alpha_examples() {
        let x = pv(0, 0, 1);
        let lat = FareyLattice::new(&x);
        let a = QVec2::new(rat(1, 1), rat(0, 1));
        assert_eq!(lat.lambda1_alpha_sq(&a).unwrap(), rat(1, 1));

        let x = pv(1, 0, 2);
        let lat = FareyLattice::new(&x);
        let a = QVec2::new(rat(1, 2), rat(0, 1));
        // 1/(|alpha|^2 q^2) = 1/((1/4)*4) = 1
        assert_eq!(lat.lambda1_alpha_sq(&a).unwrap(), rat(1, 1));
        let bad = QVec2::new(rat(1, 1), rat(0, 1)); // 2*(1/2, 0): imprimitive
        assert!(matches!(lat.lambda1_alpha_sq(&bad), Err(Error::NotPrimitive(_))));
    }
}
