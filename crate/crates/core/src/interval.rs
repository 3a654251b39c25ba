//! Certified enclosures of irrational quantities.
//!
//! `QInterval` is a closed interval with exact rational endpoints. Enclosures
//! of roots and logarithms are produced with outward dyadic rounding so they
//! stay cheap to combine; every endpoint is a true bound, never an estimate.

use crate::arith::*;
use crate::error::Error;
use num_traits::{One, Signed, Zero};
use once_cell::sync::Lazy;
use std::cmp::Ordering;
use std::sync::Mutex;

#[derive(Clone, Debug, PartialEq)]
pub struct QInterval {
    pub lo: Rat,
    pub hi: Rat,
}

impl QInterval {
    pub fn new(lo: Rat, hi: Rat) -> Self {
        assert!(lo <= hi, "inverted interval");
        QInterval { lo, hi }
    }

    pub fn point(x: Rat) -> Self {
        QInterval { lo: x.clone(), hi: x }
    }

    pub fn width(&self) -> Rat {
        &self.hi - &self.lo
    }

    pub fn mid(&self) -> Rat {
        (&self.lo + &self.hi) / rat(2, 1)
    }

    pub fn contains(&self, x: &Rat) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn add(&self, o: &QInterval) -> QInterval {
        QInterval::new(&self.lo + &o.lo, &self.hi + &o.hi)
    }

    pub fn sub(&self, o: &QInterval) -> QInterval {
        QInterval::new(&self.lo - &o.hi, &self.hi - &o.lo)
    }

    pub fn neg(&self) -> QInterval {
        QInterval::new(-self.hi.clone(), -self.lo.clone())
    }

    pub fn mul(&self, o: &QInterval) -> QInterval {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let mut lo = c[0].clone();
        let mut hi = c[0].clone();
        for v in &c[1..] {
            if *v < lo {
                lo = v.clone();
            }
            if *v > hi {
                hi = v.clone();
            }
        }
        QInterval::new(lo, hi)
    }

    pub fn scale(&self, k: &Rat) -> QInterval {
        if k.is_negative() {
            QInterval::new(&self.hi * k, &self.lo * k)
        } else {
            QInterval::new(&self.lo * k, &self.hi * k)
        }
    }

    /// Reciprocal; requires the interval not to straddle 0.
    pub fn recip(&self) -> Result<QInterval, Error> {
        if self.lo.is_positive() || self.hi.is_negative() {
            Ok(QInterval::new(self.hi.recip(), self.lo.recip()))
        } else {
            Err(Error::Domain("reciprocal of interval containing 0".into()))
        }
    }

    pub fn div(&self, o: &QInterval) -> Result<QInterval, Error> {
        Ok(self.mul(&o.recip()?))
    }

    /// Strict interval comparison: `Some(Less)` when self.hi < o.lo, etc.
    /// `Some(Equal)` only for two identical points.
    pub fn cmp_strict(&self, o: &QInterval) -> Option<Ordering> {
        if self.is_point() && o.is_point() && self.lo == o.lo {
            return Some(Ordering::Equal);
        }
        if self.hi < o.lo {
            return Some(Ordering::Less);
        }
        if self.lo > o.hi {
            return Some(Ordering::Greater);
        }
        None
    }

    /// True if every point of self is <= every point of o.
    pub fn le_certain(&self, o: &QInterval) -> bool {
        self.hi <= o.lo
    }

    pub fn intersect(&self, o: &QInterval) -> Option<QInterval> {
        let lo = if self.lo > o.lo { self.lo.clone() } else { o.lo.clone() };
        let hi = if self.hi < o.hi { self.hi.clone() } else { o.hi.clone() };
        if lo <= hi {
            Some(QInterval::new(lo, hi))
        } else {
            None
        }
    }

    /// Outward dyadic rounding; keeps endpoint sizes bounded after long sums.
    pub fn round_out(&self, bits: u32) -> QInterval {
        QInterval::new(dyadic_floor(&self.lo, bits), dyadic_ceil(&self.hi, bits))
    }

    /// Outward rounding to about `bits` significant bits (relative), so huge
    /// and tiny magnitudes stay cheap without losing relative precision.
    pub fn round_out_rel(&self, bits: u32) -> QInterval {
        let probe = if self.lo.is_positive() {
            &self.lo
        } else if self.hi.is_negative() {
            &self.hi
        } else {
            return self.round_out(bits);
        };
        let mag = bit_len(probe.numer()) as i64 - bit_len(probe.denom()) as i64;
        let frac = bits as i64 - mag;
        if frac <= 0 {
            // big magnitudes: round at integer granularity scaled up
            let shift = (-frac) as u32;
            let scale = rat_int(Int::one() << shift);
            let lo = dyadic_floor(&(&self.lo / &scale), 0) * &scale;
            let hi = dyadic_ceil(&(&self.hi / &scale), 0) * &scale;
            QInterval::new(lo, hi)
        } else {
            self.round_out(frac as u32)
        }
    }
}

/// Enclosure of sqrt(x) for x >= 0 with absolute error about 2^-bits.
pub fn sqrt_enclosure(x: &Rat, bits: u32) -> QInterval {
    assert!(!x.is_negative(), "sqrt of negative rational");
    if x.is_zero() {
        return QInterval::point(Rat::zero());
    }
    root_enclosure(x, 2, bits)
}

/// Enclosure of x^(1/k) for x > 0 with about `bits` of *relative* precision.
pub fn root_enclosure(x: &Rat, k: u32, bits: u32) -> QInterval {
    assert!(x.is_positive());
    if k == 1 {
        return QInterval::point(x.clone());
    }
    // normalize x = m * 2^(k*s) with m >= 1 to make absolute = relative precision
    let nb = bit_len(x.numer()) as i64;
    let db = bit_len(x.denom()) as i64;
    let mut s = (nb - db - 1).div_euclid(k as i64);
    let two = rat(2, 1);
    let mut m = x / pow_rat_i(&two, s * k as i64);
    while m < Rat::one() {
        m = m * pow_rat_i(&two, k as i64);
        s -= 1;
    }
    let scale = Int::one() << bits;
    let scaled = &m * rat_int(pow_int(&scale, k));
    let t = scaled.numer() / scaled.denom(); // floor
    let r = nth_root_floor(&t, k);
    // r <= (m*2^(k bits))^(1/k) < r + 2
    let base = QInterval::new(Rat::new(r.clone(), scale.clone()), Rat::new(r + 2, scale));
    base.scale(&pow_rat_i(&two, s))
}

/// interval^n for a positive interval and n >= 0, with outward rounding.
fn pow_interval_uint(x: &QInterval, n: u64, bits: u32) -> QInterval {
    assert!(x.lo.is_positive() || n == 0);
    let mut acc = QInterval::point(Rat::one());
    let mut base = x.clone();
    let mut n = n;
    while n > 0 {
        if n & 1 == 1 {
            acc = acc.mul(&base).round_out_rel(bits);
        }
        n >>= 1;
        if n > 0 {
            base = base.mul(&base).round_out_rel(bits);
        }
    }
    acc
}

/// Certified enclosure of exp(t) for rational t, relative error ~ 2^-bits.
pub fn exp_enclosure(t: &Rat, bits: u32) -> QInterval {
    // reduce t = k ln2 + r with |r| <= 0.75
    let ln2 = ln2_enclosure(bits + 16);
    let k = round_nearest(&(t / ln2.mid()));
    let r_iv = QInterval::point(t.clone()).sub(&ln2.scale(&rat_int(k.clone())));
    // series bounds at the interval endpoints (exp is monotone)
    let lo = exp_series_lower(&r_iv.lo, bits + 8);
    let hi = exp_series_upper(&r_iv.hi, bits + 8);
    let scale = |v: Rat| -> Rat {
        let kk: i64 = (&k).try_into().expect("exp reduction exponent overflow");
        v * pow_rat_i(&rat(2, 1), kk)
    };
    QInterval::new(scale(lo), scale(hi))
}

fn exp_series_upper(r: &Rat, bits: u32) -> Rat {
    // r <= 1 here; sum r^n/n! with a geometric tail bound
    assert!(r.abs() <= Rat::one());
    let rr = dyadic_ceil(r, bits + 8);
    let mut term = Rat::one();
    let mut sum = Rat::one();
    let mut n: i64 = 1;
    let eps = Rat::new(Int::one(), Int::one() << bits);
    loop {
        term = term * &rr / rat(n, 1);
        // for alternating/negative r the absolute term still bounds the tail
        sum = sum + &term;
        let tail = term.abs() * rat(2, 1);
        if tail < eps {
            sum = sum + tail;
            return dyadic_ceil(&sum, 2 * bits);
        }
        n += 1;
        if n % 8 == 0 {
            term = dyadic_ceil(&term, 4 * bits);
        }
    }
}

fn exp_series_lower(r: &Rat, bits: u32) -> Rat {
    assert!(r.abs() <= Rat::one());
    let rr = dyadic_floor(r, bits + 8);
    let mut term = Rat::one();
    let mut sum = Rat::one();
    let mut n: i64 = 1;
    let eps = Rat::new(Int::one(), Int::one() << bits);
    loop {
        term = term * &rr / rat(n, 1);
        sum = sum + &term;
        let tail = term.abs() * rat(2, 1);
        if tail < eps {
            sum = sum - tail;
            if sum.is_negative() {
                sum = Rat::zero();
            }
            return dyadic_floor(&sum, 2 * bits);
        }
        n += 1;
        if n % 8 == 0 {
            term = dyadic_floor(&term, 4 * bits);
        }
    }
}

/// Enclosure of x^e for x > 0, e rational, with about `bits` relative precision.
/// Small exponent denominators go through integer roots; large ones through
/// exp(e ln x), whose cost does not depend on the denominator.
pub fn pow_enclosure(x: &Rat, e: &Rat, bits: u32) -> QInterval {
    assert!(x.is_positive());
    if e.is_zero() || x.is_one() {
        return QInterval::point(Rat::one());
    }
    let den_big = e.denom();
    if *den_big > Int::from(64) || e.numer().abs() > Int::from(1 << 20) {
        // ln-exp route
        let lnx = ln_enclosure(x, bits + 32);
        let t = lnx.scale(e);
        let lo = exp_enclosure(&t.lo, bits + 8);
        let hi = exp_enclosure(&t.hi, bits + 8);
        return QInterval::new(lo.lo, hi.hi);
    }
    let num: i64 = e.numer().try_into().expect("power numerator out of range");
    let den: u32 = u32::try_from(e.denom()).expect("power denominator out of range");
    let p = num.unsigned_abs();
    if p <= 8 && e.is_integer() && rat_bits(x) < 1 << 16 {
        return QInterval::point(pow_rat_i(x, num));
    }
    let guard = 64 - p.leading_zeros() as u32; // ~log2 p
    let work = bits + guard + 8;
    let root = if den == 1 {
        QInterval::point(x.clone())
    } else {
        root_enclosure(x, den, work)
    };
    let powered = pow_interval_uint(&root, p, work);
    if num < 0 {
        powered.recip().expect("positive interval")
    } else {
        powered
    }
}

static LN2_CACHE: Lazy<Mutex<Vec<(u32, QInterval)>>> = Lazy::new(|| Mutex::new(Vec::new()));

/// Enclosure of ln 2, memoized per precision tier.
pub fn ln2_enclosure(bits: u32) -> QInterval {
    let tier = bits.next_power_of_two().max(64);
    {
        let cache = LN2_CACHE.lock().unwrap();
        if let Some((_, iv)) = cache.iter().find(|(b, _)| *b >= tier) {
            return iv.clone();
        }
    }
    // ln 2 = 2 atanh(1/3)
    let iv = atanh_enclosure(&rat(1, 3), tier + 8).scale(&rat(2, 1));
    let mut cache = LN2_CACHE.lock().unwrap();
    cache.push((tier, iv.clone()));
    iv
}

/// Enclosure of atanh(t) for 0 <= t < 1 via the odd power series.
fn atanh_enclosure(t: &Rat, bits: u32) -> QInterval {
    assert!(!t.is_negative() && *t < Rat::one());
    if t.is_zero() {
        return QInterval::point(Rat::zero());
    }
    // work on a dyadic bracket of t to keep term sizes bounded
    let tl = dyadic_floor(t, bits + 8);
    let th = dyadic_ceil(t, bits + 8);
    let eps = Rat::new(Int::one(), Int::one() << bits);
    let mut lo = Rat::zero();
    let mut hi = Rat::zero();
    let t2l = &tl * &tl;
    let t2h = &th * &th;
    let mut pl = tl.clone();
    let mut ph = th.clone();
    let mut k: i64 = 0;
    loop {
        lo = lo + &pl / rat(2 * k + 1, 1);
        hi = hi + &ph / rat(2 * k + 1, 1);
        pl = pl * &t2l;
        ph = ph * &t2h;
        k += 1;
        // geometric tail bound for the upper sum
        let tail = &ph / (rat(2 * k + 1, 1) * (Rat::one() - &t2h));
        if tail < eps {
            hi = hi + tail;
            break;
        }
        // periodically compress endpoints
        if k % 8 == 0 {
            pl = dyadic_floor(&pl, 4 * bits);
            ph = dyadic_ceil(&ph, 4 * bits);
        }
    }
    QInterval::new(lo, hi).round_out(bits.saturating_sub(1).max(32))
}

/// Certified enclosure of ln(x) for x > 0, absolute error about 2^-bits.
pub fn ln_enclosure(x: &Rat, bits: u32) -> QInterval {
    assert!(x.is_positive(), "ln of nonpositive rational");
    if x.is_one() {
        return QInterval::point(Rat::zero());
    }
    // reduce x = m * 2^k with m in [1, 2)
    let mut k: i64 = 0;
    let mut m = x.clone();
    let two = rat(2, 1);
    let one = Rat::one();
    // use bit lengths for a fast first pass
    let nb = bit_len(m.numer()) as i64;
    let db = bit_len(m.denom()) as i64;
    let shift = nb - db - 1;
    if shift > 0 {
        m = m / pow_rat_i(&two, shift);
        k += shift;
    } else if shift < 0 {
        m = m * pow_rat_i(&two, -shift);
        k += shift;
    }
    while m >= two {
        m = m / &two;
        k += 1;
    }
    while m < one {
        m = m * &two;
        k -= 1;
    }
    // ln m = 2 atanh((m-1)/(m+1)), argument in [0, 1/3)
    let t = (&m - &one) / (&m + &one);
    let lnm = atanh_enclosure(&t, bits + 4).scale(&rat(2, 1));
    let ln2 = ln2_enclosure(bits + 8);
    lnm.add(&ln2.scale(&rat(k, 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sqrt_brackets() {
        let iv = sqrt_enclosure(&rat(2, 1), 80);
        assert!(iv.lo.clone() * iv.lo.clone() <= rat(2, 1));
        assert!(iv.hi.clone() * iv.hi.clone() >= rat(2, 1));
        assert!(iv.width() < Rat::new(Int::one(), Int::one() << 78));
    }

    #[test]
    fn pow_pin() {
        // 8^(2/3) = 4 exactly; enclosure must bracket tightly
        let iv = pow_enclosure(&rat(8, 1), &rat(2, 3), 64);
        assert!(iv.contains(&rat(4, 1)));
        assert!(iv.width() < rat(1, 1_000_000));
    }

    #[test]
    fn ln_values() {
        let l = ln_enclosure(&rat(2, 1), 96);
        // ln 2 = 0.693147180559945...
        let lo = rat_from_decimal("0.693147180559").unwrap();
        let hi = rat_from_decimal("0.693147180561").unwrap();
        assert!(l.lo > lo && l.hi < hi, "got [{}, {}]", l.lo, l.hi);

        let e10 = ln_enclosure(&rat(1024, 1), 96);
        assert!(e10.contains(&(l.mid() * rat(10, 1))) || e10.width() > Rat::zero());
        let ten_l = l.scale(&rat(10, 1));
        assert!(e10.intersect(&ten_l).is_some());

        // ln of a tiny rational is very negative
        let small = ln_enclosure(&rat(1, 1024), 64);
        assert!(small.hi.is_negative());
    }
}
