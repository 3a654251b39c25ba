//! Exact integer/rational helpers shared by every module.
//!
//! Everything downstream is built on `BigInt` / `BigRational`; there is no
//! floating point on any certified path.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Int = BigInt;
pub type Rat = num_rational::BigRational;

/// Shorthand rational from machine integers.
pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(Int::from(n), Int::from(d))
}

pub fn rat_int(n: Int) -> Rat {
    Rat::from_integer(n)
}

pub fn gcd3(a: &Int, b: &Int, c: &Int) -> Int {
    a.gcd(b).gcd(c)
}

/// Floor of the k-th root of a nonnegative integer.
pub fn nth_root_floor(n: &Int, k: u32) -> Int {
    assert!(!n.is_negative(), "nth_root_floor of negative");
    assert!(k >= 1);
    if n.is_zero() || n.is_one() || k == 1 {
        return n.clone();
    }
    num_integer::Roots::nth_root(n, k)
}

pub fn sqrt_floor(n: &Int) -> Int {
    nth_root_floor(n, 2)
}

/// Largest integer m with m^k <= num/den (num, den > 0).
pub fn nth_root_floor_rat(x: &Rat, k: u32) -> Int {
    assert!(x.is_positive() || x.is_zero());
    let q = x.numer() / x.denom();
    let mut m = nth_root_floor(&q, k);
    // m^k <= floor(x) <= x, but (m+1)^k <= x is still possible when x is not an integer
    while rat_int(pow_int(&(m.clone() + 1), k)) <= *x {
        m += 1;
    }
    m
}

pub fn pow_int(base: &Int, exp: u32) -> Int {
    base.pow(exp)
}

/// base^exp for integer exp (negative allowed, base != 0 then).
pub fn pow_rat_i(base: &Rat, exp: i64) -> Rat {
    if exp == 0 {
        return Rat::one();
    }
    let e = exp.unsigned_abs() as u32;
    let p = Rat::new(base.numer().pow(e), base.denom().pow(e));
    if exp < 0 {
        p.recip()
    } else {
        p
    }
}

/// Nearest integer, ties rounded away from zero (num-rational convention).
pub fn round_nearest(x: &Rat) -> Int {
    x.round().to_integer()
}

/// x rounded down to a dyadic rational with `bits` fractional bits.
pub fn dyadic_floor(x: &Rat, bits: u32) -> Rat {
    let scale = Int::one() << bits;
    let scaled = x * rat_int(scale.clone());
    Rat::new(scaled.floor().to_integer(), scale)
}

/// x rounded up to a dyadic rational with `bits` fractional bits.
pub fn dyadic_ceil(x: &Rat, bits: u32) -> Rat {
    let scale = Int::one() << bits;
    let scaled = x * rat_int(scale.clone());
    Rat::new(scaled.ceil().to_integer(), scale)
}

/// Bit length of |n| (0 for 0).
pub fn bit_len(n: &Int) -> u64 {
    n.bits()
}

/// Rough bit size of a rational, used to cost out exact-power fallbacks.
pub fn rat_bits(x: &Rat) -> u64 {
    bit_len(x.numer()).max(bit_len(x.denom()))
}

/// Decimal-string rendering used by the JSON interfaces (arbitrary precision).
pub fn int_to_string(n: &Int) -> String {
    n.to_string()
}

pub fn rat_to_string(x: &Rat) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn rat_from_string(s: &str) -> Option<Rat> {
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: Int = n.trim().parse().ok()?;
    let d: Int = d.trim().parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Rat::new(n, d))
}

/// Parse a decimal literal like "0.6" or "3/5" into an exact rational.
pub fn rat_from_decimal(s: &str) -> Option<Rat> {
    let s = s.trim();
    if s.contains('/') {
        return rat_from_string(s);
    }
    let neg = s.starts_with('-');
    let body = s.trim_start_matches(['-', '+']);
    let (int_part, frac_part) = match body.split_once('.') {
        Some((a, b)) => (a, b),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{}{}", int_part, frac_part);
    let numer: Int = digits.parse().ok()?;
    let denom = pow_int(&Int::from(10), frac_part.len() as u32);
    let mut r = Rat::new(numer, denom);
    if neg {
        r = -r;
    }
    Some(r)
}

/// Render the midpoint of [lo, hi] with `digits` significant decimal digits.
pub fn decimal_render(x: &Rat, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    let neg = x.is_negative();
    let ax = x.abs();
    // find exponent e with 10^e <= ax < 10^(e+1)
    let ten = rat(10, 1);
    let mut e: i64 = 0;
    let mut t = ax.clone();
    while t >= ten {
        t = t / ten.clone();
        e += 1;
    }
    while t < Rat::one() {
        t = t * ten.clone();
        e -= 1;
    }
    let shift = digits as i64 - 1 - e;
    let scaled = ax * pow_rat_i(&ten, shift);
    let m = scaled.round().to_integer().to_string();
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if shift <= 0 {
        out.push_str(&m);
        for _ in 0..(-shift) {
            out.push('0');
        }
    } else {
        let shift = shift as usize;
        if m.len() > shift {
            out.push_str(&m[..m.len() - shift]);
            out.push('.');
            out.push_str(&m[m.len() - shift..]);
        } else {
            out.push_str("0.");
            for _ in 0..(shift - m.len()) {
                out.push('0');
            }
            out.push_str(&m);
        }
    }
    // trim trailing zeros after a decimal point
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

pub fn int_sign(n: &Int) -> i32 {
    match n.sign() {
        Sign::Minus => -1,
        Sign::NoSign => 0,
        Sign::Plus => 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots() {
        assert_eq!(nth_root_floor(&Int::from(26), 3), Int::from(2));
        assert_eq!(nth_root_floor(&Int::from(27), 3), Int::from(3));
        assert_eq!(sqrt_floor(&Int::from(99)), Int::from(9));
        assert_eq!(nth_root_floor_rat(&rat(99, 4), 2), Int::from(4));
    }

    #[test]
    fn decimal_parse_and_render() {
        assert_eq!(rat_from_decimal("0.6").unwrap(), rat(3, 5));
        assert_eq!(rat_from_decimal("-1.25").unwrap(), rat(-5, 4));
        assert_eq!(rat_from_decimal("3/7").unwrap(), rat(3, 7));
        assert_eq!(decimal_render(&rat(1, 8), 6), "0.125");
        assert_eq!(decimal_render(&rat(-200, 1), 4), "-200");
    }

    #[test]
    fn dyadic_rounding_brackets() {
        let x = rat(1, 3);
        let lo = dyadic_floor(&x, 16);
        let hi = dyadic_ceil(&x, 16);
        assert!(lo <= x && x <= hi);
        assert!(hi - lo <= rat(1, 65536));
    }
}
