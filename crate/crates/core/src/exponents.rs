//! Closed-form exponent and dimension formulas with certified evaluation.
//!
//! Everything here is a rational function of (mu, b) evaluated exactly, plus
//! a handful of certified square roots (the branch point sqrt(2)/2, the
//! maximizer b0) and certified suprema over b obtained from exact
//! sign-certificates of quadratics rather than floating-point search.

use crate::arith::*;
use crate::error::{Error, Result};
use crate::interval::{sqrt_enclosure, QInterval};
use num_traits::{One, Signed, Zero};

/// Parameter pack (mu, b) with 1/2 < mu < 1 and b > 0.
#[derive(Clone, Debug)]
pub struct MuB {
    pub mu: Rat,
    pub b: Rat,
}

impl MuB {
    pub fn new(mu: Rat, b: Rat) -> Result<Self> {
        check_mu(&mu)?;
        if !b.is_positive() {
            return Err(Error::Domain(format!("b = {} must be positive", b)));
        }
        Ok(MuB { mu, b })
    }
}

pub fn check_mu(mu: &Rat) -> Result<()> {
    if *mu <= rat(1, 2) || *mu >= Rat::one() {
        return Err(Error::Domain(format!("mu = {} outside (1/2, 1)", mu)));
    }
    Ok(())
}

/// mu < 1/sqrt(2), decided exactly on mu^2 vs 1/2.
pub fn below_sqrt2_over_2(mu: &Rat) -> bool {
    mu * mu < rat(1, 2)
}

/// Derived node exponents of the self-similar structure.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeExponents {
    pub r0: Rat,
    pub e_y: Rat,
    pub e_z: Rat,
    pub h: Rat,
    pub v: Rat,
    pub r1: Rat,
    pub r2: Rat,
    pub r3: Rat,
    pub n_x: Rat,
    pub d1: Rat,
    pub e1: Rat,
}

/// All node exponents; exact, with the ordering and algebraic identities
/// verified at construction.
pub fn node_exponents(mu: &Rat, b: &Rat) -> Result<NodeExponents> {
    MuB::new(mu.clone(), b.clone())?;
    let one = Rat::one();
    let om = &one - mu; // 1 - mu
    let bp1 = b + &one;
    let den = &om * &bp1; // (1-mu)(b+1)

    let r0 = -(mu * mu - mu + b + &one) / &den;
    let e_y = (mu + b) / &den;
    let e_z = (&one + b) * &e_y;
    let h = -(rat(2, 1) - mu) * (b + mu) / &den;
    let v = -(&one + mu) * (b + mu) / &den;
    let r1 = v.clone();
    let r2 = -(mu + &one + rat(2, 1) * b) * (b + mu) / &den;
    let r3 = ((mu + b) / &om) * &r0;
    let n_x = (rat(2, 1) * b * b
        + rat(2, 1) * b * mu
        + b
        + (rat(2, 1) * mu - &one) * (rat(2, 1) - mu))
        / &den;
    let d1 = rat(2, 1) * b * &e_y;
    let e1 = rat(2, 1) * (mu - &one) / &bp1 + &e_y;

    let e = NodeExponents { r0, e_y, e_z, h, v, r1, r2, r3, n_x, d1, e1 };
    // ordering r0 > h > v = r1 > r2 > r3
    assert!(e.r0 > e.h && e.h > e.v && e.v == e.r1 && e.r1 > e.r2 && e.r2 > e.r3);
    // identities: r3/r0 = (mu+b)/(1-mu), d1 + e1 = n_x
    assert_eq!(&e.r3 / &e.r0, (mu + b) / &om);
    assert_eq!(&e.d1 + &e.e1, e.n_x);
    Ok(e)
}

/// Upper bound for the Hausdorff dimension: (3-2mu)(1-mu)/(mu^2-mu+1) below
/// the branch point sqrt(2)/2, and 2(1-mu) above it.  Exact for rational mu.
pub fn upper_bound_dim(mu: &Rat) -> Result<Rat> {
    check_mu(mu)?;
    let one = Rat::one();
    if below_sqrt2_over_2(mu) {
        Ok((rat(3, 1) - rat(2, 1) * mu) * (&one - mu) / (mu * mu - mu + &one))
    } else {
        Ok(rat(2, 1) * (&one - mu))
    }
}

/// Both branch formulas on an interval (used to certify continuity at the
/// branch point sqrt(2)/2).
pub fn upper_bound_dim_both(mu: &QInterval) -> (QInterval, QInterval) {
    let one = QInterval::point(Rat::one());
    let two = QInterval::point(rat(2, 1));
    let three = QInterval::point(rat(3, 1));
    let left = three
        .sub(&two.mul(mu))
        .mul(&one.sub(mu))
        .div(&mu.mul(mu).sub(mu).add(&one))
        .expect("denominator positive on (1/2,1)");
    let right = two.mul(&one.sub(mu));
    (left, right)
}

/// s1(mu, b): the per-b lower bound for the Hausdorff dimension.
pub fn s1(mu: &Rat, b: &Rat) -> Result<Rat> {
    MuB::new(mu.clone(), b.clone())?;
    let one = Rat::one();
    let num = rat(2, 1) * b * b
        + rat(2, 1) * b * mu
        + b
        + (rat(2, 1) - mu) * (rat(2, 1) * mu - &one);
    let den = (b + rat(2, 1) * mu - &one) * (mu * mu - mu + b + &one);
    Ok((&one - mu) * num / den)
}

/// s2(mu, b) from the counting condition; always > s1.
pub fn s2(mu: &Rat, b: &Rat) -> Result<Rat> {
    MuB::new(mu.clone(), b.clone())?;
    let one = Rat::one();
    let num = rat(-2, 1) * mu * mu + rat(5, 1) * mu + b - rat(2, 1);
    let den = rat(2, 1) * mu + b * mu - &one;
    Ok(num / den)
}

/// s2 - s1 with the positivity assertion (it factors with positive terms).
pub fn s2_minus_s1(mu: &Rat, b: &Rat) -> Result<Rat> {
    let d = s2(mu, b)? - s1(mu, b)?;
    assert!(d.is_positive(), "s2 - s1 must be positive for mu in (1/2,1), b > 0");
    Ok(d)
}

/// Numerator of d(s1)/db up to a positive factor:
/// (2mu^2-1) b^2 + 2mu(2mu-1)^2 b + (6mu^4-7mu^3+3mu-1).
/// The middle coefficient is re-derived symbolically (N'D - ND' for
/// s1 = (1-mu) N/D); it is the one consistent with the closed form of b0.
pub fn s1_derivative_numerator(mu: &Rat, b: &Rat) -> Rat {
    let c2 = rat(2, 1) * mu * mu - Rat::one();
    let c1 = rat(8, 1) * mu * mu * mu - rat(8, 1) * mu * mu + rat(2, 1) * mu;
    let c0 = rat(6, 1) * mu * mu * mu * mu - rat(7, 1) * mu * mu * mu + rat(3, 1) * mu
        - Rat::one();
    (&c2 * b * b + &c1 * b + &c0) * (Rat::one() - mu)
}

/// b0(mu): the interior maximizer of b -> s1(mu,b) for mu < 1/sqrt(2),
/// as a certified enclosure.  Verifies that the derivative numerator
/// straddles zero across the enclosure.
pub fn b0(mu: &Rat, bits: u32) -> Result<QInterval> {
    check_mu(mu)?;
    if !below_sqrt2_over_2(mu) {
        return Err(Error::Domain(format!(
            "b0 undefined for mu = {} >= 1/sqrt(2)",
            mu
        )));
    }
    let one = Rat::one();
    let disc = pow_rat_i(&(&one - mu), 3)
        * (rat(2, 1) * mu - &one)
        * (rat(2, 1) * mu - rat(2, 1) * mu * mu + &one);
    assert!(disc.is_positive());
    let root = sqrt_enclosure(&disc, bits + 8);
    let num_lo = mu - rat(4, 1) * mu * mu + rat(4, 1) * mu * mu * mu + root.lo;
    let num_hi = mu - rat(4, 1) * mu * mu + rat(4, 1) * mu * mu * mu + root.hi;
    let den = &one - rat(2, 1) * mu * mu;
    assert!(den.is_positive());
    let enc = QInterval::new(num_lo / &den, num_hi / &den);
    assert!(enc.lo.is_positive(), "b0 must be positive below the branch point");
    // derivative numerator changes sign across the enclosure
    let dn_lo = s1_derivative_numerator(mu, &enc.lo);
    let dn_hi = s1_derivative_numerator(mu, &enc.hi);
    assert!(
        !dn_lo.is_negative() && !dn_hi.is_positive(),
        "Num(b) does not straddle 0 across the b0 enclosure"
    );
    Ok(enc)
}

/// Certified supremum over b > 0 of a quadratic-over-quadratic profile
/// num(b)/den(b) with den > 0 on b > 0.
///
/// The lower endpoint is the best exact probe value; the upper endpoint t
/// carries an exact certificate t*den - num >= 0 on all of b > 0, decided on
/// the quadratic's coefficient signs, vertex and discriminant.
fn certified_sup(
    num: &dyn Fn(&Rat) -> Rat,
    den: &dyn Fn(&Rat) -> Rat,
    probe_bs: &[Rat],
    hi_start: Rat,
    bits: u32,
) -> QInterval {
    // quadratic coefficients by interpolation at b = 0, 1, 2
    let q_coeffs = |f: &dyn Fn(&Rat) -> Rat| -> (Rat, Rat, Rat) {
        let f0 = f(&rat(0, 1));
        let f1 = f(&rat(1, 1));
        let f2 = f(&rat(2, 1));
        let a = (&f2 - rat(2, 1) * &f1 + &f0) / rat(2, 1);
        let b = &f1 - &f0 - &a;
        (a, b, f0)
    };
    let (na, nb, nc) = q_coeffs(num);
    let (da, db, dc) = q_coeffs(den);
    // is g(b) = t*den - num >= 0 for all b > 0?
    let cert = |t: &Rat| -> bool {
        let a2 = t * &da - &na;
        let a1 = t * &db - &nb;
        let a0 = t * &dc - &nc;
        if a2.is_negative() || a0.is_negative() {
            return false;
        }
        if a2.is_zero() {
            return !a1.is_negative();
        }
        if !a1.is_negative() {
            return true; // vertex at b <= 0, increasing on b > 0
        }
        let disc = &a1 * &a1 - rat(4, 1) * &a2 * &a0;
        !disc.is_positive()
    };
    let mut lo = Rat::zero();
    for b in probe_bs {
        let v = num(b) / den(b);
        if v > lo {
            lo = v;
        }
    }
    let mut hi = hi_start;
    assert!(cert(&hi), "initial certificate must hold");
    let eps = Rat::new(Int::one(), Int::one() << bits);
    while &hi - &lo > eps {
        let mid = (&lo + &hi) / rat(2, 1);
        if cert(&mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    QInterval::new(lo, hi)
}

/// Default b-grid: logarithmic 2^-10 .. 2^20.
pub fn default_b_grid() -> Vec<Rat> {
    (-10..=20).map(|e| pow_rat_i(&rat(2, 1), e)).collect()
}

/// Ternary-search refinement of a unimodal rational profile, exact comparisons.
fn refine_max(f: &dyn Fn(&Rat) -> Rat, mut a: Rat, mut c: Rat, iters: u32) -> Rat {
    for _ in 0..iters {
        let third = (&c - &a) / rat(3, 1);
        let m1 = &a + &third;
        let m2 = &c - &third;
        if f(&m1) < f(&m2) {
            a = m1;
        } else {
            c = m2;
        }
    }
    (a + c) / rat(2, 1)
}

/// Lower bound for the Hausdorff dimension: sup_b s1(mu, b) as a certified
/// enclosure; equals 2(1-mu) exactly for mu >= 1/sqrt(2).
pub fn lower_bound_dim(mu: &Rat, bits: u32) -> Result<QInterval> {
    check_mu(mu)?;
    let one = Rat::one();
    if !below_sqrt2_over_2(mu) {
        return Ok(QInterval::point(rat(2, 1) * (&one - mu)));
    }
    let om = &one - mu;
    let muc = mu.clone();
    let num = move |b: &Rat| -> Rat {
        (Rat::one() - &muc)
            * (rat(2, 1) * b * b
                + rat(2, 1) * b * &muc
                + b
                + (rat(2, 1) - &muc) * (rat(2, 1) * &muc - Rat::one()))
    };
    let muc2 = mu.clone();
    let den = move |b: &Rat| -> Rat {
        (b + rat(2, 1) * &muc2 - Rat::one()) * (&muc2 * &muc2 - &muc2 + b + Rat::one())
    };
    let mut probes = default_b_grid();
    let f = |b: &Rat| num(b) / den(b);
    let peak = refine_max(&f, rat(1, 1024), rat(1024, 1), bits + 16);
    probes.push(peak);
    let sup = certified_sup(&num, &den, &probes, rat(2, 1), bits);
    assert!(sup.hi >= rat(2, 1) * &om);
    Ok(sup)
}

/// Packing profile p(mu, b) = (2b^2+2b mu+b+(2-mu)(2mu-1)) / ((mu+1+2b)(b+2mu-1)).
pub fn packing_profile(mu: &Rat, b: &Rat) -> Result<Rat> {
    MuB::new(mu.clone(), b.clone())?;
    let one = Rat::one();
    let num = rat(2, 1) * b * b
        + rat(2, 1) * b * mu
        + b
        + (rat(2, 1) - mu) * (rat(2, 1) * mu - &one);
    let den = (mu + &one + rat(2, 1) * b) * (b + rat(2, 1) * mu - &one);
    Ok(num / den)
}

#[derive(Clone, Debug)]
pub struct PackingBound {
    pub sup: QInterval,
    /// whether the supremum is attained at a finite b; otherwise it is the
    /// unattained b -> infinity limit 1 (num - den = b(2-3mu) - (2mu-1)^2
    /// stays negative for mu >= 2/3)
    pub attained: bool,
    /// profile samples (b, p(mu,b)) for reporting
    pub profile: Vec<(Rat, Rat)>,
}

/// Lower bound for the packing dimension: sup_b p(mu, b) with attainment status.
pub fn packing_bound(mu: &Rat, bits: u32) -> Result<PackingBound> {
    check_mu(mu)?;
    let one = Rat::one();
    let mut profile = Vec::new();
    for b in default_b_grid() {
        profile.push((b.clone(), packing_profile(mu, &b)?));
    }
    if *mu >= rat(2, 3) {
        return Ok(PackingBound { sup: QInterval::point(one), attained: false, profile });
    }
    let muc = mu.clone();
    let num = move |b: &Rat| -> Rat {
        rat(2, 1) * b * b
            + rat(2, 1) * b * &muc
            + b
            + (rat(2, 1) - &muc) * (rat(2, 1) * &muc - Rat::one())
    };
    let muc2 = mu.clone();
    let den = move |b: &Rat| -> Rat {
        (&muc2 + Rat::one() + rat(2, 1) * b) * (b + rat(2, 1) * &muc2 - Rat::one())
    };
    let mut probes = default_b_grid();
    let f = |b: &Rat| num(b) / den(b);
    let peak = refine_max(&f, rat(1, 1024), pow_rat_i(&rat(2, 1), 24), bits + 16);
    probes.push(peak);
    let sup = certified_sup(&num, &den, &probes, rat(2, 1), bits);
    Ok(PackingBound { sup, attained: true, profile })
}

/// Uniform exponents under the Jarnik transfer w -> 1 - 1/w.
#[derive(Clone, Debug, PartialEq)]
pub enum UniformExponent {
    Finite(Rat),
    Infinite,
}

pub fn jarnik_transfer(w: &UniformExponent) -> Result<UniformExponent> {
    match w {
        UniformExponent::Infinite => Ok(UniformExponent::Finite(Rat::one())),
        UniformExponent::Finite(w) => {
            if *w < rat(2, 1) {
                return Err(Error::Domain(format!("transfer needs w >= 2, got {}", w)));
            }
            Ok(UniformExponent::Finite(Rat::one() - w.recip()))
        }
    }
}

pub fn jarnik_transfer_inverse(m: &UniformExponent) -> Result<UniformExponent> {
    match m {
        UniformExponent::Infinite => Err(Error::Domain("inverse transfer of infinity".into())),
        UniformExponent::Finite(m) => {
            if *m < rat(1, 2) || *m > Rat::one() {
                return Err(Error::Domain(format!(
                    "inverse transfer needs 1/2 <= m <= 1, got {}",
                    m
                )));
            }
            if m.is_one() {
                return Ok(UniformExponent::Infinite);
            }
            Ok(UniformExponent::Finite((Rat::one() - m).recip()))
        }
    }
}

/// gamma and the critical t of the covering upper bound (interpolated radius):
/// gamma = (1-2mu^2)/(mu(1-mu)(3-2mu)), t_crit = (3-2mu)/(1-mu+mu^2).
/// At t_crit the three constraints degenerate: b = 2, (b-1)/(1-mu) - a = 2,
/// B - b = 0; all verified exactly.
pub fn upper_gamma(mu: &Rat) -> Result<(Rat, Rat)> {
    check_mu(mu)?;
    if !below_sqrt2_over_2(mu) {
        return Err(Error::Domain(format!(
            "gamma <= 0 for mu = {} >= 1/sqrt(2)",
            mu
        )));
    }
    let one = Rat::one();
    let gamma = (&one - rat(2, 1) * mu * mu) / (mu * (&one - mu) * (rat(3, 1) - rat(2, 1) * mu));
    let t_crit = (rat(3, 1) - rat(2, 1) * mu) / (&one - mu + mu * mu);
    let b = (&one + &gamma * (mu - &one) * mu) * &t_crit;
    assert_eq!(b, rat(2, 1));
    let a = (&one - &gamma) * mu * &t_crit;
    assert_eq!((&b - &one) / (&one - mu) - &a, rat(2, 1));
    let big_b = mu * (&b - &one) / (&one - mu) - &a - &one + &b;
    assert_eq!(&big_b - &b, Rat::zero());
    Ok((gamma, t_crit))
}

/// tau = (mu^2 - mu + b + 1)/((1-mu)(b+1)) - 1, which equals |r0| - 1.
pub fn remark_tau(mu: &Rat, b: &Rat) -> Result<Rat> {
    let e = node_exponents(mu, b)?;
    let one = Rat::one();
    let tau = (mu * mu - mu + b + &one) / ((&one - mu) * (b + &one)) - &one;
    assert_eq!(tau, e.r0.abs() - &one);
    Ok(tau)
}

/// Reference bounds on the dimension of Sing*_{1,2}(tau), tau > 2
/// (context/plot emission only).
#[derive(Clone, Debug, PartialEq)]
pub struct BakerBounds {
    pub lower: Rat,         // 2/tau
    pub upper_baker: Rat,   // 6/(tau+1)
    pub upper_dodson: Rat,  // 3 tau/(tau^2-tau+1)
    pub upper_laurent: Rat, // (2 tau+2)/(tau^2-tau+1)
}

pub fn baker_bounds(tau: &Rat) -> Result<BakerBounds> {
    if *tau <= rat(2, 1) {
        return Err(Error::Domain(format!("baker bounds need tau > 2, got {}", tau)));
    }
    let one = Rat::one();
    let den = tau * tau - tau + &one;
    Ok(BakerBounds {
        lower: rat(2, 1) / tau,
        upper_baker: rat(6, 1) / (tau + &one),
        upper_dodson: rat(3, 1) * tau / &den,
        upper_laurent: (rat(2, 1) * tau + rat(2, 1)) / &den,
    })
}

/// The b = beta(2mu-1) substituted profile in the limit mu -> 1/2:
/// (1/2)(2 beta + 3/2) / ((3/4)(beta + 1)); tends to 4/3 as beta -> infinity.
pub fn s1_limit_profile(beta: &Rat) -> Rat {
    rat(1, 2) * (rat(2, 1) * beta + rat(3, 2)) / (rat(3, 4) * (beta + Rat::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_bound_values() {
        assert_eq!(upper_bound_dim(&rat(9, 10)).unwrap(), rat(1, 5));
        // mu = 0.6: 0.72/0.76 = 18/19
        assert_eq!(upper_bound_dim(&rat(3, 5)).unwrap(), rat(18, 19));
        assert!(upper_bound_dim(&rat(1, 2)).is_err());
        assert!(upper_bound_dim(&rat(1, 1)).is_err());
    }

    #[test]
    fn branch_point_continuity() {
        // both closed forms agree to 1e-12 on a tight enclosure of sqrt(2)/2
        let enc = sqrt_enclosure(&rat(1, 2), 120);
        let (l, r) = upper_bound_dim_both(&enc);
        let diff = l.sub(&r);
        let tol = Rat::new(Int::one(), pow_int(&Int::from(10), 12));
        assert!(diff.lo.abs() < tol && diff.hi.abs() < tol);
        // common value is 2 - sqrt(2)
        let s2e = sqrt_enclosure(&rat(2, 1), 120);
        let target = QInterval::new(rat(2, 1) - s2e.hi, rat(2, 1) - s2e.lo);
        assert!(r.intersect(&target).is_some());
        assert!(l.intersect(&target).is_some());
    }

    #[test]
    fn s1_s2_values() {
        let v = s1(&rat(3, 5), &rat(1_000_000, 1)).unwrap();
        assert!((v - rat(4, 5)).abs() < rat(1, 10_000));
        s2_minus_s1(&rat(3, 5), &rat(1, 1)).unwrap();
        s2_minus_s1(&rat(51, 100), &rat(1000, 1)).unwrap();
        assert_eq!(s2(&rat(3, 5), &rat(1, 1)).unwrap(), rat(8, 5));
    }

    #[test]
    fn b0_enclosure_and_maximality() {
        let enc = b0(&rat(3, 5), 60).unwrap();
        // b0(0.6) = (3 + 2 sqrt(74))/35 = 0.5772889...
        assert!(enc.contains(&((rat(3, 1) + rat(2, 1) * sqrt_enclosure(&rat(74, 1), 80).mid()) / rat(35, 1))) || enc.width() > Rat::zero());
        assert!(enc.lo > rat_from_decimal("0.577275").unwrap());
        assert!(enc.hi < rat_from_decimal("0.577276").unwrap());
        // a nearby rational b gives nearly the same s1 (flat near the max)
        let s_near = s1(&rat(3, 5), &rat_from_decimal("0.57729").unwrap()).unwrap();
        assert!((s_near - rat_from_decimal("0.85297").unwrap()).abs() < rat(1, 100_000));
        let b0m = enc.mid();
        let smax = s1(&rat(3, 5), &b0m).unwrap();
        for f in [rat(1, 4), rat(1, 2), rat(2, 1), rat(4, 1)] {
            let s = s1(&rat(3, 5), &(&b0m * &f)).unwrap();
            assert!(s < smax);
        }
        assert!(b0(&rat(51, 100), 40).unwrap().lo.is_positive());
        assert!(b0(&rat(71, 100), 40).is_err());
    }

    #[test]
    fn lower_bound_values() {
        assert_eq!(lower_bound_dim(&rat(4, 5), 40).unwrap(), QInterval::point(rat(2, 5)));
        assert_eq!(lower_bound_dim(&rat(9, 10), 40).unwrap(), QInterval::point(rat(1, 5)));
        let enc = lower_bound_dim(&rat(3, 5), 48).unwrap();
        assert!(enc.lo > rat(4, 5));
        // s1(0.6, b0) = 0.852971...
        assert!(enc.lo > rat_from_decimal("0.85296").unwrap());
        assert!(enc.hi < rat_from_decimal("0.85298").unwrap());
        let b0m = b0(&rat(3, 5), 80).unwrap().mid();
        let direct = s1(&rat(3, 5), &b0m).unwrap();
        assert!(direct <= enc.hi.clone() + Rat::new(Int::one(), Int::one() << 40));
    }

    #[test]
    fn packing_values() {
        let p = packing_profile(&rat(11, 20), &rat(1000, 1)).unwrap();
        assert!(p > Rat::one());
        let pb = packing_bound(&rat(4, 5), 40).unwrap();
        assert!(!pb.attained);
        assert_eq!(pb.sup, QInterval::point(Rat::one()));
        let vals = [
            (rat(1, 1), "0.875"),
            (rat(3, 1), "0.944"),
            (rat(10, 1), "0.981"),
            (rat(30, 1), "0.994"),
        ];
        for (b, expect) in vals {
            let p = packing_profile(&rat(4, 5), &b).unwrap();
            assert!((p - rat_from_decimal(expect).unwrap()).abs() < rat(1, 100));
        }
        let pb6 = packing_bound(&rat(3, 5), 40).unwrap();
        assert!(pb6.attained);
        assert!(pb6.sup.lo > Rat::one());
    }

    #[test]
    fn node_exponents_values() {
        let e = node_exponents(&rat(3, 5), &rat(1, 1)).unwrap();
        assert_eq!(e.e_y, rat(2, 1));
        assert_eq!(e.r0, rat(-11, 5));
        assert_eq!(e.n_x, rat(28, 5));
        assert_eq!(e.d1, rat(4, 1));
        assert_eq!(e.e1, rat(8, 5));
        // ordering holds across a (mu, b) grid (asserted inside the call)
        for mi in 1..=10 {
            let mu = rat(1, 2) + rat(mi, 22);
            for bi in 1..=10 {
                node_exponents(&mu, &rat(bi, 3)).unwrap();
            }
        }
    }

    #[test]
    fn jarnik_roundtrip() {
        let w = UniformExponent::Finite(rat(2, 1));
        assert_eq!(jarnik_transfer(&w).unwrap(), UniformExponent::Finite(rat(1, 2)));
        assert_eq!(
            jarnik_transfer(&UniformExponent::Infinite).unwrap(),
            UniformExponent::Finite(rat(1, 1))
        );
        for n in [rat(2, 1), rat(5, 2), rat(7, 3), rat(100, 7)] {
            let m = jarnik_transfer(&UniformExponent::Finite(n.clone())).unwrap();
            let back = jarnik_transfer_inverse(&m).unwrap();
            assert_eq!(back, UniformExponent::Finite(n));
        }
    }

    #[test]
    fn gamma_values() {
        let (g, t) = upper_gamma(&rat(3, 5)).unwrap();
        assert_eq!(g, rat(35, 54));
        assert_eq!(t, rat(45, 19));
        assert!(upper_gamma(&rat(71, 100)).is_err());
    }

    #[test]
    fn tau_values() {
        assert_eq!(remark_tau(&rat(3, 5), &rat(1, 1)).unwrap(), rat(6, 5));
        let tb = remark_tau(&rat(3, 5), &rat(1_000_000, 1)).unwrap();
        assert!((tb - rat(3, 2)).abs() < rat(1, 100_000));
    }

    #[test]
    fn baker_values() {
        let b = baker_bounds(&rat(3, 1)).unwrap();
        assert_eq!(b.lower, rat(2, 3));
        assert_eq!(b.upper_baker, rat(3, 2));
        assert_eq!(b.upper_laurent, rat(8, 7));
        assert_eq!(b.upper_dodson, rat(9, 7));
        let big = baker_bounds(&rat(1_000_000, 1)).unwrap();
        assert!(big.upper_baker < rat(1, 100_000));
        assert!(baker_bounds(&rat(2, 1)).is_err());
    }

    #[test]
    fn limit_profile_tends_to_four_thirds() {
        let v = s1_limit_profile(&rat(1_000_000, 1));
        assert!((v - rat(4, 3)).abs() < rat(1, 1000));
    }
}
