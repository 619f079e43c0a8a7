use num_integer::Roots;
use num_traits::{Signed, Zero};

/// Exact rational constant, always kept in lowest terms.
pub type Rational = num_rational::Ratio<i64>;

/// `base^exponent` when the result is again rational, `None` otherwise.
///
/// Integer exponents are always exact (except `0^-n`); a fractional exponent
/// `p/q` is exact only for a positive base whose numerator and denominator are
/// perfect `q`-th powers.
pub fn rational_pow(base: Rational, exponent: Rational) -> Option<Rational> {
    if exponent.is_integer() {
        let e = *exponent.numer();
        if base.is_zero() {
            return if e > 0 {
                Some(Rational::zero())
            } else if e == 0 {
                Some(Rational::from_integer(1))
            } else {
                None
            };
        }
        let e32 = i32::try_from(e).ok()?;
        return checked_powi(base, e32);
    }
    if !base.is_positive() {
        return None;
    }
    let q = u32::try_from(*exponent.denom()).ok()?;
    let root = |v: i64| -> Option<i64> {
        let r = v.nth_root(q);
        (r.checked_pow(q)? == v).then_some(r)
    };
    let rooted = Rational::new(root(*base.numer())?, root(*base.denom())?);
    let p = i32::try_from(*exponent.numer()).ok()?;
    checked_powi(rooted, p)
}

fn checked_powi(base: Rational, e: i32) -> Option<Rational> {
    let (b, e) = if e < 0 {
        (base.recip(), e.unsigned_abs())
    } else {
        (base, e as u32)
    };
    let n = b.numer().checked_pow(e)?;
    let d = b.denom().checked_pow(e)?;
    Some(Rational::new(n, d))
}

/// Best rational approximation with denominator at most `max_denom`.
pub(crate) fn rationalize(x: f64, max_denom: i64) -> Option<Rational> {
    if !x.is_finite() || x.abs() > 1e12 {
        return None;
    }
    let (mut h0, mut h1) = (0i64, 1i64);
    let (mut k0, mut k1) = (1i64, 0i64);
    let mut v = x;
    for _ in 0..64 {
        let a = v.floor();
        let ai = a as i64;
        let h2 = ai.checked_mul(h1)?.checked_add(h0)?;
        let k2 = ai.checked_mul(k1)?.checked_add(k0)?;
        if k2 > max_denom {
            break;
        }
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        let frac = v - a;
        if frac.abs() < 1e-12 {
            break;
        }
        v = 1.0 / frac;
    }
    (k1 != 0).then(|| Rational::new(h1, k1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integer_and_root_powers() {
        let r = |n, d| Rational::new(n, d);
        assert_eq!(rational_pow(r(2, 3), r(2, 1)), Some(r(4, 9)));
        assert_eq!(rational_pow(r(2, 3), r(-1, 1)), Some(r(3, 2)));
        assert_eq!(rational_pow(r(4, 9), r(1, 2)), Some(r(2, 3)));
        assert_eq!(rational_pow(r(8, 1), r(2, 3)), Some(r(4, 1)));
        assert_eq!(rational_pow(r(2, 1), r(1, 2)), None);
        assert_eq!(rational_pow(r(-4, 1), r(1, 2)), None);
        assert_eq!(rational_pow(r(0, 1), r(-1, 1)), None);
    }

    #[test]
    fn rationalize_recovers_small_fractions() {
        assert_eq!(
            rationalize(13.0 / 75.0, 1_000_000),
            Some(Rational::new(13, 75))
        );
        assert_eq!(
            rationalize(-5.0 / 21.0, 1_000_000),
            Some(Rational::new(-5, 21))
        );
        assert_eq!(rationalize(3.0, 10), Some(Rational::from_integer(3)));
    }
}
