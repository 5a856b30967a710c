//! Exact combinatorial quantities: binomials and their partial sums, the
//! sphere bound, the two-stage round split, threshold sizes, and the
//! hypergeometric law.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::certified::{self, Interval};
use crate::error::{input, Error, Result};

/// `binom(n, k)`, zero unless `0 <= k <= n`.
pub fn binom(n: i64, k: i64) -> BigUint {
    if n < 0 || k < 0 || k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k) as u64;
    let n = n as u64;
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// The full row `binom(n, 0..=n)`.
pub fn binom_row(n: u64) -> Vec<BigUint> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = BigUint::one();
    row.push(c.clone());
    for k in 0..n {
        c *= n - k;
        c /= k + 1;
        row.push(c.clone());
    }
    row
}

/// `sum_{k=0}^{f} binom(n, k)`; zero for negative `f`.
pub fn binom_le(n: i64, f: i64) -> BigUint {
    if n < 0 || f < 0 {
        return BigUint::zero();
    }
    let top = f.min(n) as u64;
    let n = n as u64;
    let mut sum = BigUint::one();
    let mut c = BigUint::one();
    for k in 0..top {
        c *= n - k;
        c /= k + 1;
        sum += &c;
    }
    sum
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn pow2(n: u64) -> BigUint {
    BigUint::one() << n
}

fn check_fraction(f: &BigRational) -> Result<()> {
    if *f <= BigRational::zero() || *f >= rat(1, 2) {
        return input(format!("lie fraction {f} must lie strictly between 0 and 1/2"));
    }
    Ok(())
}

fn floor_times(f: &BigRational, n: u64) -> u64 {
    (f * BigRational::from_integer(n.into()))
        .floor()
        .to_integer()
        .to_u64()
        .unwrap_or(0)
}

/// `2^n / binom(n, <= floor(f n))`.
pub fn sphere_bound(n: u64, f: &BigRational) -> Result<BigRational> {
    check_fraction(f)?;
    let big_f = floor_times(f, n);
    Ok(BigRational::new(
        pow2(n).into(),
        binom_le(n as i64, big_f as i64).into(),
    ))
}

/// Round and lie budgets of the two-stage strategy.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageSplit {
    pub n: u64,
    pub f: BigRational,
    pub n1: u64,
    pub n2: u64,
    pub big_f: u64,
    pub f1: u64,
    pub f2: u64,
}

fn lnln(n: u64, prec: u32) -> Result<Interval> {
    let l = certified::ln_u64(n, prec)?;
    certified::ln_interval(&l, prec)
}

fn lnln_coeff(f: &BigRational) -> BigRational {
    let d = BigRational::one() - f * BigRational::from_integer(2.into());
    BigRational::from_integer(4.into()) / (&d * &d)
}

/// `n1 = n - floor(4/(1-2f)^2 ln ln n)`, with the floor certified.
pub fn stage_split(n: u64, f: &BigRational) -> Result<StageSplit> {
    check_fraction(f)?;
    if n < 3 {
        return input(format!("ln ln n is not positive for n = {n}"));
    }
    let coeff = lnln_coeff(f);
    let drop = certified::certified_floor(|p| Ok(lnln(n, p)?.scale(&coeff)))?;
    let drop = drop
        .to_u64()
        .ok_or_else(|| Error::Invariant("negative stage length".into()))?;
    if drop >= n {
        return input(format!("first stage would be empty for n = {n}, f = {f}"));
    }
    let n1 = n - drop;
    let big_f = floor_times(f, n);
    let f1 = floor_times(f, n1);
    Ok(StageSplit {
        n,
        f: f.clone(),
        n1,
        n2: n - n1,
        big_f,
        f1,
        f2: big_f - f1,
    })
}

fn ceil_to_biguint(v: BigInt) -> Result<BigUint> {
    v.to_biguint()
        .ok_or_else(|| Error::Invariant("negative threshold".into()))
}

fn check_cprime(c: &BigRational) -> Result<()> {
    if *c <= BigRational::zero() {
        return input(format!("constant c' must be positive, got {c}"));
    }
    Ok(())
}

/// `ceil(sphere_bound * 2 c' sqrt(n2))`; the vanishing term is taken as 0.
pub fn m_threshold_machine(n: u64, f: &BigRational, c_prime: &BigRational) -> Result<BigUint> {
    check_cprime(c_prime)?;
    let split = stage_split(n, f)?;
    let factor = sphere_bound(n, f)? * c_prime * BigRational::from_integer(2.into());
    let n2 = BigRational::from_integer(split.n2.into());
    let v = certified::certified_ceil(|p| Ok(certified::sqrt(&n2, p)?.scale(&factor)))?;
    ceil_to_biguint(v)
}

/// `ceil(sphere_bound * 4/(1-2f) * c' * sqrt(ln ln n))`.
pub fn m_threshold_game(n: u64, f: &BigRational, c_prime: &BigRational) -> Result<BigUint> {
    check_cprime(c_prime)?;
    stage_split(n, f)?;
    let d = BigRational::one() - f * BigRational::from_integer(2.into());
    let factor = sphere_bound(n, f)? * c_prime * BigRational::from_integer(4.into()) / d;
    let v = certified::certified_ceil(|p| {
        Ok(certified::sqrt_interval(&lnln(n, p)?, p)?.scale(&factor))
    })?;
    ceil_to_biguint(v)
}

/// `ceil(sphere_bound * n ln 2)`, the classical comparison value.
pub fn delsarte_piret(n: u64, f: &BigRational) -> Result<BigUint> {
    let factor = sphere_bound(n, f)? * BigRational::from_integer(n.into());
    let v = certified::certified_ceil(|p| Ok(certified::ln_u64(2, p)?.scale(&factor)))?;
    ceil_to_biguint(v)
}

fn check_hypergeom(population: u64, class2: u64, draws: u64) -> Result<()> {
    if class2 > population || draws > population {
        return input(format!(
            "hypergeometric parameters out of range: population {population}, class {class2}, draws {draws}"
        ));
    }
    Ok(())
}

/// `P(K = k)` for `k` successes in `draws` draws without replacement.
pub fn hypergeom_pmf(population: u64, class2: u64, draws: u64, k: u64) -> Result<BigRational> {
    check_hypergeom(population, class2, draws)?;
    let num = binom(class2 as i64, k as i64) * binom((population - class2) as i64, draws as i64 - k as i64);
    Ok(BigRational::new(
        num.into(),
        binom(population as i64, draws as i64).into(),
    ))
}

/// The whole mass function on `0..=draws`.
pub fn hypergeom_pmf_all(population: u64, class2: u64, draws: u64) -> Result<Vec<BigRational>> {
    check_hypergeom(population, class2, draws)?;
    let total: BigInt = binom(population as i64, draws as i64).into();
    Ok((0..=draws)
        .map(|k| {
            let num = binom(class2 as i64, k as i64)
                * binom((population - class2) as i64, draws as i64 - k as i64);
            BigRational::new(num.into(), total.clone())
        })
        .collect())
}

pub fn hypergeom_mean(population: u64, class2: u64, draws: u64) -> Result<BigRational> {
    check_hypergeom(population, class2, draws)?;
    if population == 0 {
        return Ok(BigRational::zero());
    }
    Ok(BigRational::new(
        (draws * class2).into(),
        population.into(),
    ))
}

/// Least `m` with `P(K <= m) >= 1/2`.
pub fn hypergeom_median(population: u64, class2: u64, draws: u64) -> Result<u64> {
    let total: BigUint = binom(population as i64, draws as i64);
    let mut acc = BigUint::zero();
    check_hypergeom(population, class2, draws)?;
    for k in 0..=draws {
        acc += binom(class2 as i64, k as i64)
            * binom((population - class2) as i64, draws as i64 - k as i64);
        if &acc * 2u32 >= total {
            return Ok(k);
        }
    }
    Err(Error::Invariant("hypergeometric mass does not sum to one".into()))
}

/// Share of `binom(n, <= F)` carried by lie splits that keep at least `F1`
/// lies in the first stage.
pub fn split_sum_ratio(n: u64, f: &BigRational) -> Result<BigRational> {
    let s = stage_split(n, f)?;
    let row1 = binom_row(s.n1);
    let row2 = binom_row(s.n2);
    let get = |row: &Vec<BigUint>, i: i64| -> BigUint {
        if i < 0 || i as usize >= row.len() {
            BigUint::zero()
        } else {
            row[i as usize].clone()
        }
    };
    let mut num = BigUint::zero();
    for k in s.f1..=s.big_f {
        for sl in s.f1..=k {
            num += get(&row1, sl as i64) * get(&row2, (k - sl) as i64);
        }
    }
    Ok(BigRational::new(
        num.into(),
        binom_le(n as i64, s.big_f as i64).into(),
    ))
}

/// Fraction of `binom(n, <= F)` in the top `n3 + 1` terms.
pub fn cutoff_tail(n: u64, f: &BigRational, n3: u64) -> Result<BigRational> {
    check_fraction(f)?;
    let big_f = floor_times(f, n);
    if n3 > big_f {
        return input(format!("n3 = {n3} exceeds F = {big_f}"));
    }
    let mut num = BigUint::zero();
    for i in big_f - n3..=big_f {
        num += binom(n as i64, i as i64);
    }
    Ok(BigRational::new(
        num.into(),
        binom_le(n as i64, big_f as i64).into(),
    ))
}

/// `1 - (f/(1-f))^n3 (1-f)/(1-2f)`, the closed-form floor for [`cutoff_tail`].
pub fn cutoff_tail_floor(f: &BigRational, n3: u64) -> Result<BigRational> {
    check_fraction(f)?;
    let one = BigRational::one();
    let q = f / (&one - f);
    let mut p = one.clone();
    for _ in 0..n3 {
        p *= &q;
    }
    Ok(&one - p * (&one - f) / (&one - f * BigRational::from_integer(2.into())))
}

/// `(2^n / binom(n, <= F)) * (binom(n1, F1) / 2^n1)`.
pub fn relative_cdf_stat(n: u64, f: &BigRational) -> Result<BigRational> {
    let s = stage_split(n, f)?;
    Ok(BigRational::new(
        (pow2(n) * binom(s.n1 as i64, s.f1 as i64)).into(),
        (binom_le(n as i64, s.big_f as i64) * pow2(s.n1)).into(),
    ))
}

/// Decides `value >= (ln n)^(2 slack)` by comparing logarithms.
pub fn exceeds_log_power(value: &BigRational, n: u64, slack: &BigRational) -> Result<bool> {
    let exponent = slack * BigRational::from_integer(2.into());
    certified::refine(|p| {
        let lhs = certified::ln(value, p)?;
        let rhs = lnln(n, p)?.scale(&exponent);
        let diff = lhs.sub(&rhs);
        Ok(match diff.cmp_rational(&BigRational::zero()) {
            Some(Ordering::Less) => Some(false),
            Some(_) => Some(true),
            None => None,
        })
    })
}

/// One row of the bounds table.
#[derive(Debug, Clone)]
pub struct BoundsRow {
    pub split: StageSplit,
    pub sphere: BigRational,
    pub m_machine: BigUint,
    pub m_game: BigUint,
    pub m_delsarte_piret: BigUint,
}

pub const BOUNDS_HEADER: &str =
    "n,f,F,n1,n2,F1,F2,sphere_num,sphere_den,m_machine,m_game,m_delsarte_piret";

pub fn bounds_row(n: u64, f: &BigRational, c_prime: &BigRational) -> Result<BoundsRow> {
    Ok(BoundsRow {
        split: stage_split(n, f)?,
        sphere: sphere_bound(n, f)?,
        m_machine: m_threshold_machine(n, f, c_prime)?,
        m_game: m_threshold_game(n, f, c_prime)?,
        m_delsarte_piret: delsarte_piret(n, f)?,
    })
}

impl BoundsRow {
    pub fn csv(&self) -> String {
        let s = &self.split;
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            s.n,
            s.f,
            s.big_f,
            s.n1,
            s.n2,
            s.f1,
            s.f2,
            self.sphere.numer(),
            self.sphere.denom(),
            self.m_machine,
            self.m_game,
            self.m_delsarte_piret
        )
    }
}

/// `gcd`-reduced check used by tests on rational carriers.
pub fn is_reduced(x: &BigRational) -> bool {
    x.numer().gcd(x.denom()).is_one() && *x.denom() > BigInt::zero()
}
