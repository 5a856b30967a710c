//! Outward-rounded enclosures of logarithms and square roots.
//!
//! Every function returns a closed interval with dyadic endpoints that is
//! guaranteed to contain the true value. Decisions that hinge on a
//! transcendental number go through [`refine`], which doubles the working
//! precision until the decision is unambiguous.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub const PRECISION_ENV: &str = "LIARWALK_PRECISION_BITS";
const DEFAULT_PRECISION: u32 = 64;
const MAX_PRECISION: u32 = 1 << 17;

/// Starting precision in bits, overridable through `LIARWALK_PRECISION_BITS`.
pub fn default_precision() -> u32 {
    std::env::var(PRECISION_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<u32>().ok())
        .filter(|&p| p >= 8)
        .unwrap_or(DEFAULT_PRECISION)
        .min(MAX_PRECISION)
}

/// Runs `attempt` at increasing precision until it returns `Some`.
pub fn refine<T>(mut attempt: impl FnMut(u32) -> Result<Option<T>>) -> Result<T> {
    let mut prec = default_precision();
    loop {
        if let Some(v) = attempt(prec)? {
            return Ok(v);
        }
        if prec >= MAX_PRECISION {
            return Err(Error::Resource(format!(
                "certified evaluation still ambiguous at {prec} bits"
            )));
        }
        prec = (prec * 2).min(MAX_PRECISION);
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl Interval {
    pub fn point(x: BigRational) -> Self {
        Interval {
            lo: x.clone(),
            hi: x,
        }
    }

    pub fn from_int(x: i64) -> Self {
        Self::point(BigRational::from_integer(x.into()))
    }

    pub fn add(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo + &o.lo,
            hi: &self.hi + &o.hi,
        }
    }

    pub fn sub(&self, o: &Interval) -> Interval {
        Interval {
            lo: &self.lo - &o.hi,
            hi: &self.hi - &o.lo,
        }
    }

    pub fn mul(&self, o: &Interval) -> Interval {
        let c = [
            &self.lo * &o.lo,
            &self.lo * &o.hi,
            &self.hi * &o.lo,
            &self.hi * &o.hi,
        ];
        let lo = c.iter().min().unwrap().clone();
        let hi = c.iter().max().unwrap().clone();
        Interval { lo, hi }
    }

    pub fn scale(&self, k: &BigRational) -> Interval {
        let a = &self.lo * k;
        let b = &self.hi * k;
        if a <= b {
            Interval { lo: a, hi: b }
        } else {
            Interval { lo: b, hi: a }
        }
    }

    pub fn min(&self, o: &Interval) -> Interval {
        Interval {
            lo: (&self.lo).min(&o.lo).clone(),
            hi: (&self.hi).min(&o.hi).clone(),
        }
    }

    pub fn max(&self, o: &Interval) -> Interval {
        Interval {
            lo: (&self.lo).max(&o.lo).clone(),
            hi: (&self.hi).max(&o.hi).clone(),
        }
    }

    /// The common floor of both endpoints, if they agree.
    pub fn floor(&self) -> Option<BigInt> {
        let a = self.lo.floor().to_integer();
        let b = self.hi.floor().to_integer();
        (a == b).then_some(a)
    }

    /// The common ceiling of both endpoints, if they agree.
    pub fn ceil(&self) -> Option<BigInt> {
        let a = self.lo.ceil().to_integer();
        let b = self.hi.ceil().to_integer();
        (a == b).then_some(a)
    }

    /// Position of the enclosed value relative to `x`, when decidable.
    pub fn cmp_rational(&self, x: &BigRational) -> Option<Ordering> {
        if &self.hi < x {
            Some(Ordering::Less)
        } else if &self.lo > x {
            Some(Ordering::Greater)
        } else if self.lo == self.hi {
            Some(Ordering::Equal)
        } else {
            None
        }
    }

    pub fn midpoint_f64(&self) -> f64 {
        let m = (&self.lo + &self.hi) / BigRational::from_integer(2.into());
        m.to_f64().unwrap_or(f64::NAN)
    }
}

fn pow2(bits: u64) -> BigInt {
    BigInt::one() << bits
}

fn dyadic(num: BigInt, prec: u32) -> BigRational {
    BigRational::new(num, pow2(prec as u64))
}

/// Floor and ceiling of `x * 2^prec`.
fn scaled_bounds(x: &BigRational, prec: u32) -> (BigInt, BigInt) {
    let s = x * BigRational::from_integer(pow2(prec as u64));
    (s.floor().to_integer(), s.ceil().to_integer())
}

/// Bounds on `atanh(z) * 2^prec` for `0 <= z <= 1/3`, from the odd power series.
fn atanh_fixed(z: &BigRational, prec: u32) -> (BigInt, BigInt) {
    let guard = 16 + (64 - (prec as u64).leading_zeros());
    let p = prec + guard;
    let one = pow2(p as u64);
    let (zl, zh) = scaled_bounds(z, p);
    let zl2 = (&zl * &zl) >> p;
    let zh2 = (&zh * &zh + &one - 1u32) >> p;

    let mut lo = BigInt::zero();
    let mut pow = zl.clone();
    let mut k = 1u64;
    while !pow.is_zero() {
        lo += &pow / k;
        pow = (&pow * &zl2) >> p;
        k += 2;
    }

    let mut hi = BigInt::zero();
    let mut pow = zh.clone();
    let mut k = 1u64;
    while pow > BigInt::one() {
        hi += (&pow + k - 1u64) / k;
        pow = (&pow * &zh2 + &one - 1u32) >> p;
        k += 2;
    }
    // Tail: sum_{i>=n} z^(2i+1)/(2i+1) <= pow/(2n+1) * 1/(1 - z^2) <= pow * 9/8 / k.
    hi += (&pow * 9u32 + 8u64 * k - 1u64) / (8u64 * k) + 1u32;

    let lo = lo >> guard;
    let hi = (hi + (BigInt::one() << guard) - 1u32) >> guard;
    (lo, hi)
}

/// Bounds on `ln 2 * 2^prec`.
fn ln2_fixed(prec: u32) -> (BigInt, BigInt) {
    let third = BigRational::new(1.into(), 3.into());
    let (lo, hi) = atanh_fixed(&third, prec);
    (lo * 2, hi * 2)
}

/// Enclosure of `ln x` for rational `x > 0`.
pub fn ln(x: &BigRational, prec: u32) -> Result<Interval> {
    if !x.is_positive() {
        return Err(Error::Input(format!("logarithm of non-positive value {x}")));
    }
    let n = x.numer().magnitude();
    let d = x.denom().magnitude();
    let k = n.bits() as i64 - d.bits() as i64;
    // y = x / 2^k lies in (1/2, 2), so z = (y-1)/(y+1) has |z| < 1/3.
    let (yn, yd): (BigUint, BigUint) = if k >= 0 {
        (n.clone(), d << (k as u64))
    } else {
        (n << ((-k) as u64), d.clone())
    };
    let yn = BigInt::from(yn);
    let yd = BigInt::from(yd);
    let z = BigRational::new(&yn - &yd, &yn + &yd);
    let (al, ah) = atanh_fixed(&z.abs(), prec);
    let (atl, ath) = if z.is_negative() {
        (-ah, -al)
    } else {
        (al, ah)
    };
    let (l2l, l2h) = ln2_fixed(prec);
    let kk = BigInt::from(k);
    let (kl, kh) = if k >= 0 {
        (&kk * l2l, &kk * l2h)
    } else {
        (&kk * l2h, &kk * l2l)
    };
    Ok(Interval {
        lo: dyadic(kl + atl * 2, prec),
        hi: dyadic(kh + ath * 2, prec),
    })
}

pub fn ln_u64(x: u64, prec: u32) -> Result<Interval> {
    ln(&BigRational::from_integer(x.into()), prec)
}

/// Enclosure of `ln` over an interval with positive lower end.
pub fn ln_interval(x: &Interval, prec: u32) -> Result<Interval> {
    let a = ln(&x.lo, prec)?;
    let b = ln(&x.hi, prec)?;
    Ok(Interval { lo: a.lo, hi: b.hi })
}

/// Enclosure of `sqrt x` for rational `x >= 0`.
pub fn sqrt(x: &BigRational, prec: u32) -> Result<Interval> {
    if x.is_negative() {
        return Err(Error::Input(format!("square root of negative value {x}")));
    }
    let (fl, ce) = scaled_bounds(x, 2 * prec);
    let lo = fl.magnitude().sqrt();
    let mut hi = ce.magnitude().sqrt();
    if &hi * &hi < *ce.magnitude() {
        hi += 1u32;
    }
    Ok(Interval {
        lo: dyadic(BigInt::from_biguint(Sign::Plus, lo), prec),
        hi: dyadic(BigInt::from_biguint(Sign::Plus, hi), prec),
    })
}

pub fn sqrt_interval(x: &Interval, prec: u32) -> Result<Interval> {
    let a = sqrt(&x.lo.clone().max(BigRational::zero()), prec)?;
    let b = sqrt(&x.hi, prec)?;
    Ok(Interval { lo: a.lo, hi: b.hi })
}

/// True iff `num / 2^exp < coeff * ln(arg)`, decided exactly.
pub fn dyadic_below_ln(num: &BigUint, exp: u64, coeff: u64, arg: u64) -> Result<bool> {
    let value = BigRational::new(BigInt::from(num.clone()), pow2(exp));
    let c = BigRational::from_integer(coeff.into());
    refine(|prec| {
        let bound = ln_u64(arg, prec)?.scale(&c);
        Ok(match bound.cmp_rational(&value) {
            Some(Ordering::Greater) => Some(true),
            Some(_) => Some(false),
            None => None,
        })
    })
}

/// Floor of an enclosed quantity, refining until it is unambiguous.
pub fn certified_floor(f: impl Fn(u32) -> Result<Interval>) -> Result<BigInt> {
    refine(|prec| Ok(f(prec)?.floor()))
}

pub fn certified_ceil(f: impl Fn(u32) -> Result<Interval>) -> Result<BigInt> {
    refine(|prec| Ok(f(prec)?.ceil()))
}

/// Exact rational value of a finite float, for feeding user constants into exact code.
pub fn rational_from_f64(x: f64) -> Result<BigRational> {
    BigRational::from_float(x).ok_or_else(|| Error::Input(format!("not a finite number: {x}")))
}
