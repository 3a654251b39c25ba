//! Positive quantities of the form  coef * prod_i base_i^(e_i)  with rational
//! coef, bases and exponents.
//!
//! Heights, radii (c2*|x|^r0), lattice minima (sqrt of a rational) and the
//! lemma bounds are all of this shape, so single comparisons can be decided
//! exactly by cross-powering when the exponent denominators are small, and by
//! certified ln-intervals otherwise.  Indistinguishable-after-refinement pairs
//! raise `TieBreak` instead of guessing.

use crate::arith::*;
use crate::error::{Error, Result};
use crate::interval::{ln_enclosure, pow_enclosure, QInterval};
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;

#[derive(Clone, Debug)]
pub struct PowerProduct {
    pub coef: Rat,
    /// (base, exponent) pairs; bases > 0, != 1; exponents != 0; sorted by base.
    pub factors: Vec<(Rat, Rat)>,
}

impl PowerProduct {
    pub fn one() -> Self {
        PowerProduct { coef: Rat::one(), factors: vec![] }
    }

    pub fn from_rat(x: Rat) -> Self {
        assert!(x.is_positive(), "PowerProduct must be positive");
        PowerProduct { coef: x, factors: vec![] }
    }

    /// sqrt of a positive rational, kept exact as x^(1/2).
    pub fn sqrt_of(x: Rat) -> Self {
        assert!(x.is_positive());
        PowerProduct::from_pow(x, rat(1, 2))
    }

    pub fn from_pow(base: Rat, exp: Rat) -> Self {
        assert!(base.is_positive());
        let mut p = PowerProduct::one();
        p.push(base, exp);
        p
    }

    fn push(&mut self, base: Rat, exp: Rat) {
        if base.is_one() || exp.is_zero() {
            return;
        }
        if exp.is_integer() {
            let e: i64 = exp.to_integer().try_into().expect("exponent overflow");
            if e.unsigned_abs() <= 64 && rat_bits(&base) * e.unsigned_abs() <= 1 << 16 {
                self.coef = &self.coef * pow_rat_i(&base, e);
                return;
            }
        }
        match self.factors.binary_search_by(|(b, _)| b.cmp(&base)) {
            Ok(i) => {
                let ne = &self.factors[i].1 + &exp;
                if ne.is_zero() {
                    self.factors.remove(i);
                } else {
                    self.factors[i].1 = ne;
                }
            }
            Err(i) => self.factors.insert(i, (base, exp)),
        }
    }

    pub fn mul(&self, o: &PowerProduct) -> PowerProduct {
        let mut r = self.clone();
        r.coef = &r.coef * &o.coef;
        for (b, e) in &o.factors {
            r.push(b.clone(), e.clone());
        }
        r
    }

    pub fn div(&self, o: &PowerProduct) -> PowerProduct {
        let mut r = self.clone();
        r.coef = &r.coef / &o.coef;
        for (b, e) in &o.factors {
            r.push(b.clone(), -e.clone());
        }
        r
    }

    pub fn scale(&self, k: &Rat) -> PowerProduct {
        assert!(k.is_positive());
        let mut r = self.clone();
        r.coef = &r.coef * k;
        r
    }

    pub fn pow(&self, e: &Rat) -> PowerProduct {
        let mut r = PowerProduct::one();
        if !self.coef.is_one() {
            r.push(self.coef.clone(), e.clone());
        }
        for (b, ee) in &self.factors {
            r.push(b.clone(), ee * e);
        }
        r
    }

    pub fn square(&self) -> PowerProduct {
        self.pow(&rat(2, 1))
    }

    pub fn recip(&self) -> PowerProduct {
        PowerProduct::one().div(self)
    }

    /// Exact rational value when all exponents happen to be integral (small).
    pub fn as_exact(&self) -> Option<Rat> {
        if self.factors.is_empty() {
            Some(self.coef.clone())
        } else {
            None
        }
    }

    /// lcm of exponent denominators.
    fn exp_lcm(&self) -> Int {
        let mut l = Int::one();
        for (_, e) in &self.factors {
            l = num_integer::lcm(l, e.denom().clone());
        }
        l
    }

    /// Estimated bit size of the fully cross-powered comparison.
    fn crosspower_bits(&self, l: &Int) -> u64 {
        let lb: u64 = l.try_into().unwrap_or(u64::MAX / 4);
        let mut total = rat_bits(&self.coef).saturating_mul(lb.min(1 << 20));
        for (b, e) in &self.factors {
            let scaled = (e * rat_int(l.clone())).to_integer();
            let m: u64 = scaled.abs().try_into().unwrap_or(u64::MAX / 4);
            total = total.saturating_add(rat_bits(b).saturating_mul(m));
        }
        total
    }

    /// Exact value of self^l as a rational (l integer multiple of all denominators).
    fn crosspower(&self, l: &Int) -> Rat {
        let lb: i64 = l.try_into().expect("crosspower exponent too large");
        let mut acc = pow_rat_i(&self.coef, lb);
        for (b, e) in &self.factors {
            let m = (e * rat_int(l.clone())).to_integer();
            let mi: i64 = (&m).try_into().expect("crosspower exponent too large");
            acc = acc * pow_rat_i(b, mi);
        }
        acc
    }

    /// Certified enclosure at roughly `bits` of relative precision.
    pub fn enclosure(&self, bits: u32) -> QInterval {
        let mut acc = QInterval::point(self.coef.clone());
        for (b, e) in &self.factors {
            let f = pow_enclosure(b, e, bits + 8);
            acc = acc.mul(&f).round_out_rel(bits + 16);
        }
        acc.round_out_rel(bits)
    }

    /// Certified enclosure of ln(self).
    pub fn ln_enclosure(&self, bits: u32) -> QInterval {
        let mut acc = ln_enclosure(&self.coef, bits + 8);
        for (b, e) in &self.factors {
            let lb = ln_enclosure(b, bits + 8);
            acc = acc.add(&lb.scale(e));
        }
        acc
    }

    /// Exact comparison. ln-interval refinement first, exact cross-powering as
    /// fallback, `TieBreak` when neither separates the values.
    pub fn try_cmp(&self, o: &PowerProduct) -> Result<Ordering> {
        let q = self.div(o); // compare against 1
        if let Some(x) = q.as_exact() {
            return Ok(x.cmp(&Rat::one()));
        }
        // ln-interval refinement
        let mut bits = 96u32;
        while bits <= 6144 {
            let l = q.ln_enclosure(bits);
            if l.lo.is_positive() {
                return Ok(Ordering::Greater);
            }
            if l.hi.is_negative() {
                return Ok(Ordering::Less);
            }
            // zero inside: maybe exactly equal; try exact route if affordable
            let lcm = q.exp_lcm();
            if q.crosspower_bits(&lcm) <= 1 << 24 {
                let v = q.crosspower(&lcm);
                return Ok(v.cmp(&Rat::one()));
            }
            bits *= 2;
        }
        let lcm = q.exp_lcm();
        if q.crosspower_bits(&lcm) <= 1 << 27 {
            let v = q.crosspower(&lcm);
            return Ok(v.cmp(&Rat::one()));
        }
        Err(Error::TieBreak(format!(
            "power comparison undecided after refinement: {:?} vs {:?}",
            self, o
        )))
    }

    pub fn le(&self, o: &PowerProduct) -> Result<bool> {
        Ok(self.try_cmp(o)? != Ordering::Greater)
    }

    pub fn lt(&self, o: &PowerProduct) -> Result<bool> {
        Ok(self.try_cmp(o)? == Ordering::Less)
    }
}

/// Certified comparison of sums of positive power products:
/// decides sum(lhs) <= sum(rhs) by interval refinement.  Single-term sides
/// fall back to the exact comparison; ties across genuinely equal sums of
/// different shapes surface as `TieBreak`.
pub fn sum_le(lhs: &[PowerProduct], rhs: &[PowerProduct]) -> Result<bool> {
    if lhs.len() == 1 && rhs.len() == 1 {
        return lhs[0].le(&rhs[0]);
    }
    let mut bits = 96u32;
    while bits <= 4096 {
        let enc = |side: &[PowerProduct]| -> QInterval {
            let mut acc = QInterval::point(Rat::zero());
            for t in side {
                acc = acc.add(&t.enclosure(bits));
            }
            acc
        };
        let l = enc(lhs);
        let r = enc(rhs);
        if l.hi <= r.lo {
            return Ok(true);
        }
        if l.lo > r.hi {
            return Ok(false);
        }
        bits *= 2;
    }
    Err(Error::TieBreak(
        "sum comparison undecided after refinement".into(),
    ))
}

/// Strict variant: sum(lhs) < sum(rhs).
pub fn sum_lt(lhs: &[PowerProduct], rhs: &[PowerProduct]) -> Result<bool> {
    if lhs.len() == 1 && rhs.len() == 1 {
        return lhs[0].lt(&rhs[0]);
    }
    let mut bits = 96u32;
    while bits <= 4096 {
        let enc = |side: &[PowerProduct]| -> QInterval {
            let mut acc = QInterval::point(Rat::zero());
            for t in side {
                acc = acc.add(&t.enclosure(bits));
            }
            acc
        };
        let l = enc(lhs);
        let r = enc(rhs);
        if l.hi < r.lo {
            return Ok(true);
        }
        if l.lo >= r.hi {
            return Ok(false);
        }
        bits *= 2;
    }
    Err(Error::TieBreak(
        "strict sum comparison undecided after refinement".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_cmp_small_exponents() {
        // 2^(3/2) vs e = 2.828 vs 2.827: compare with 2827/1000
        let a = PowerProduct::from_pow(rat(2, 1), rat(3, 2));
        let b = PowerProduct::from_rat(rat(2829, 1000));
        assert_eq!(a.try_cmp(&b).unwrap(), Ordering::Less);
        let c = PowerProduct::from_rat(rat(2828, 1000));
        assert_eq!(a.try_cmp(&c).unwrap(), Ordering::Greater);
    }

    #[test]
    fn equal_products_detected() {
        // 4^(1/2) == 2 via cancellation: 4^(1/2) / 2 has factor 4^(1/2), coef 1/2
        let a = PowerProduct::from_pow(rat(4, 1), rat(1, 2));
        let b = PowerProduct::from_rat(rat(2, 1));
        assert_eq!(a.try_cmp(&b).unwrap(), Ordering::Equal);
        // 8^(2/3) == 4
        let c = PowerProduct::from_pow(rat(8, 1), rat(2, 3));
        let d = PowerProduct::from_rat(rat(4, 1));
        assert_eq!(c.try_cmp(&d).unwrap(), Ordering::Equal);
    }

    #[test]
    fn huge_base_comparison_uses_ln() {
        // (10^40)^(-11/5) vs (10^40)^(-12/5): trivial by ln route
        let base = pow_rat_i(&rat(10, 1), 40);
        let a = PowerProduct::from_pow(base.clone(), rat(-11, 5));
        let b = PowerProduct::from_pow(base, rat(-12, 5));
        assert_eq!(a.try_cmp(&b).unwrap(), Ordering::Greater);
    }

    #[test]
    fn enclosure_brackets_value() {
        let p = PowerProduct::from_pow(rat(2, 1), rat(1, 2)).scale(&rat(3, 1));
        let iv = p.enclosure(64);
        // (3*sqrt(2))^2 = 18: endpoints must bracket the true value
        assert!(&iv.lo * &iv.lo <= rat(18, 1));
        assert!(&iv.hi * &iv.hi >= rat(18, 1));
        assert!(iv.width() < rat(1, 1 << 40));
    }
}
