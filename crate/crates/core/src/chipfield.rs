//! Exact evolution of the liar machine and the linear machine on the integer line.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;

use crate::error::{input, Error, Result};
use crate::limbs;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(site: i64) -> Parity {
        if site.rem_euclid(2) == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Parity {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    /// The parity after `t` steps.
    pub fn after(self, t: u64) -> Parity {
        if t.is_multiple_of(2) {
            self
        } else {
            self.flip()
        }
    }

    pub fn contains(self, site: i64) -> bool {
        Parity::of(site) == self
    }

    pub fn bit(self) -> i64 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

impl std::str::FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Parity> {
        match s {
            "even" => Ok(Parity::Even),
            "odd" => Ok(Parity::Odd),
            _ => input(format!("unknown parity {s:?}")),
        }
    }
}

/// Chip counts on a window of sites; only sites of one parity class may be occupied.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChipConfiguration {
    offset: i64,
    counts: Vec<BigUint>,
    parity: Parity,
}

impl ChipConfiguration {
    pub fn empty(parity: Parity) -> Self {
        ChipConfiguration {
            offset: parity.bit(),
            counts: Vec::new(),
            parity,
        }
    }

    /// Builds a configuration from a dense window starting at `offset`.
    pub fn new(offset: i64, counts: Vec<BigUint>, parity: Parity) -> Result<Self> {
        for (i, c) in counts.iter().enumerate() {
            let site = offset + i as i64;
            if !c.is_zero() && !parity.contains(site) {
                return input(format!(
                    "site {site} holds chips but the configuration is {parity}"
                ));
            }
        }
        let mut cfg = ChipConfiguration {
            offset,
            counts,
            parity,
        };
        cfg.trim();
        Ok(cfg)
    }

    /// Builds a configuration from `(site, count)` pairs; the parity comes from
    /// the occupied sites (even when there are none).
    pub fn from_pairs<I, C>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (i64, C)>,
        C: Into<BigUint>,
    {
        let map: BTreeMap<i64, BigUint> = pairs
            .into_iter()
            .map(|(s, c)| (s, c.into()))
            .filter(|(_, c)| !c.is_zero())
            .fold(BTreeMap::new(), |mut m, (s, c)| {
                *m.entry(s).or_insert_with(BigUint::zero) += c;
                m
            });
        let parity = map
            .keys()
            .next()
            .map(|&s| Parity::of(s))
            .unwrap_or(Parity::Even);
        Self::from_map(parity, &map)
    }

    pub fn from_map(parity: Parity, map: &BTreeMap<i64, BigUint>) -> Result<Self> {
        let (Some(&lo), Some(&hi)) = (map.keys().next(), map.keys().next_back()) else {
            return Ok(Self::empty(parity));
        };
        let mut counts = vec![BigUint::zero(); (hi - lo + 1) as usize];
        for (&s, c) in map {
            counts[(s - lo) as usize] = c.clone();
        }
        Self::new(lo, counts, parity)
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    /// Leftmost tracked site.
    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn counts(&self) -> &[BigUint] {
        &self.counts
    }

    pub fn get(&self, site: i64) -> BigUint {
        let i = site - self.offset;
        if i < 0 || i as usize >= self.counts.len() {
            BigUint::zero()
        } else {
            self.counts[i as usize].clone()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.counts.iter().all(Zero::is_zero)
    }

    /// Occupied sites with their counts, left to right.
    pub fn occupied(&self) -> impl Iterator<Item = (i64, &BigUint)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(move |(i, c)| (self.offset + i as i64, c))
    }

    /// Leftmost and rightmost occupied sites.
    pub fn support(&self) -> Option<(i64, i64)> {
        let lo = self.counts.iter().position(|c| !c.is_zero())?;
        let hi = self.counts.iter().rposition(|c| !c.is_zero())?;
        Some((self.offset + lo as i64, self.offset + hi as i64))
    }

    pub fn total(&self) -> BigUint {
        self.counts.iter().sum()
    }

    /// Drops zero margins.
    pub fn trim(&mut self) {
        match self.counts.iter().position(|c| !c.is_zero()) {
            None => {
                self.counts.clear();
                self.offset = self.parity.bit();
            }
            Some(lo) => {
                let hi = self.counts.iter().rposition(|c| !c.is_zero()).unwrap();
                self.counts.truncate(hi + 1);
                self.counts.drain(..lo);
                self.offset += lo as i64;
            }
        }
    }

    /// Chips on `[a, b]`.
    pub fn interval_sum(&self, a: i64, b: i64) -> Result<BigUint> {
        if a > b {
            return input(format!("empty interval [{a}, {b}]"));
        }
        Ok(self
            .occupied()
            .filter(|&(s, _)| a <= s && s <= b)
            .map(|(_, c)| c)
            .sum())
    }

    /// The configuration moved `by` sites to the right.
    pub fn shifted(&self, by: i64) -> ChipConfiguration {
        ChipConfiguration {
            offset: self.offset + by,
            counts: self.counts.clone(),
            parity: if by % 2 == 0 {
                self.parity
            } else {
                self.parity.flip()
            },
        }
    }

    /// Serialized form: a header line then `site,count` per occupied site.
    pub fn to_text(&self, t: u64) -> String {
        let mut s = format!("# parity={} t={}\n", self.parity, t);
        for (site, c) in self.occupied() {
            s.push_str(&format!("{site},{c}\n"));
        }
        s
    }

    /// Inverse of [`ChipConfiguration::to_text`]; returns the configuration and its step.
    pub fn parse_text(text: &str) -> Result<(ChipConfiguration, u64)> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Input("missing configuration header".into()))?;
        let (parity, t) = parse_header(header)?;
        let mut map = BTreeMap::new();
        let mut last: Option<i64> = None;
        for line in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (s, c) = line
                .split_once(',')
                .ok_or_else(|| Error::Input(format!("malformed line {line:?}")))?;
            let site: i64 = s
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("bad site in {line:?}")))?;
            let count: BigUint = c
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("bad count in {line:?}")))?;
            if last.is_some_and(|l| l >= site) {
                return input(format!("sites not strictly increasing at {site}"));
            }
            last = Some(site);
            map.insert(site, count);
        }
        Ok((Self::from_map(parity, &map)?, t))
    }

    /// Parses `{0:1, 2:11}` or `0:1,2:11`.
    pub fn parse_inline(spec: &str) -> Result<ChipConfiguration> {
        let spec = spec.trim();
        let body = match (spec.strip_prefix('{'), spec.ends_with('}')) {
            (Some(rest), true) => &rest[..rest.len() - 1],
            (None, false) => spec,
            _ => return input(format!("unbalanced braces in {spec:?}")),
        };
        let mut pairs = Vec::new();
        for item in body.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (s, c) = item
                .split_once(':')
                .ok_or_else(|| Error::Input(format!("expected site:count, got {item:?}")))?;
            let site: i64 = s
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("bad site {s:?}")))?;
            let count: BigUint = c
                .trim()
                .parse()
                .map_err(|_| Error::Input(format!("bad count {c:?}")))?;
            pairs.push((site, count));
        }
        Self::from_pairs(pairs)
    }

    /// Random configuration on `parity` sites within `[-2 * span, 2 * span]`,
    /// with up to `max_sites` occupied sites and counts below `2^count_bits`.
    pub fn random<R: Rng + ?Sized>(
        rng: &mut R,
        max_sites: usize,
        span: i64,
        count_bits: u32,
        parity: Parity,
    ) -> ChipConfiguration {
        let k = rng.gen_range(1..=max_sites);
        let mut map = BTreeMap::new();
        for _ in 0..k {
            let site = 2 * rng.gen_range(-span..=span) + parity.bit();
            let c: u64 = rng.gen_range(1..=(1u64 << count_bits));
            map.insert(site, BigUint::from(c));
        }
        Self::from_map(parity, &map).expect("generated sites share one parity")
    }
}

fn parse_header(line: &str) -> Result<(Parity, u64)> {
    let rest = line
        .strip_prefix('#')
        .ok_or_else(|| Error::Input(format!("bad header {line:?}")))?;
    let mut parity = None;
    let mut t = None;
    for field in rest.split_whitespace() {
        match field.split_once('=') {
            Some(("parity", v)) => parity = Some(v.parse::<Parity>()?),
            Some(("t", v)) => {
                t = Some(
                    v.parse::<u64>()
                        .map_err(|_| Error::Input(format!("bad step {v:?}")))?,
                )
            }
            _ => return input(format!("unknown header field {field:?}")),
        }
    }
    match (parity, t) {
        (Some(p), Some(t)) => Ok((p, t)),
        _ => input(format!("header must give parity and t: {line:?}")),
    }
}

/// The tie-breaking signs: zero at even counts, alternating +1, -1, ... over odd counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignVector {
    offset: i64,
    entries: Vec<i8>,
}

impl SignVector {
    pub fn get(&self, site: i64) -> i8 {
        let i = site - self.offset;
        if i < 0 || i as usize >= self.entries.len() {
            0
        } else {
            self.entries[i as usize]
        }
    }

    /// Nonzero entries left to right.
    pub fn nonzero(&self) -> impl Iterator<Item = (i64, i8)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != 0)
            .map(move |(i, &v)| (self.offset + i as i64, v))
    }
}

pub fn chi_compute(f: &ChipConfiguration) -> SignVector {
    let mut sign = 1i8;
    let entries = f
        .counts
        .iter()
        .map(|c| {
            if c.is_odd() {
                let s = sign;
                sign = -sign;
                s
            } else {
                0
            }
        })
        .collect();
    SignVector {
        offset: f.offset,
        entries,
    }
}

/// `f'(j) = (f(j-1) + f(j+1) + chi(j-1) - chi(j+1)) / 2`.
pub fn liar_step(f: &ChipConfiguration) -> ChipConfiguration {
    let chi = chi_compute(f);
    let lo = f.offset - 1;
    let hi = f.offset + f.counts.len() as i64;
    let mut counts = Vec::with_capacity(f.counts.len() + 2);
    for j in lo..=hi {
        let num = BigInt::from(f.get(j - 1)) + BigInt::from(f.get(j + 1))
            + BigInt::from(chi.get(j - 1) as i64 - chi.get(j + 1) as i64);
        let (q, r) = num.div_rem(&BigInt::from(2));
        assert!(
            r.is_zero() && !q.is_negative(),
            "liar step produced a non-integer or negative count at site {j}"
        );
        counts.push(q.magnitude().clone());
    }
    let mut out = ChipConfiguration {
        offset: lo,
        counts,
        parity: f.parity.flip(),
    };
    out.trim();
    out
}

pub const DEFAULT_MAX_WINDOW: usize = 1 << 22;

/// `t` liar steps; fails if the tracked window would exceed `max_window` sites.
pub fn liar_run(f0: &ChipConfiguration, t: u64, max_window: usize) -> Result<ChipConfiguration> {
    check_window(f0, t, max_window)?;
    let mut f = f0.clone();
    for _ in 0..t {
        f = liar_step(&f);
    }
    Ok(f)
}

/// Fails when a run of `t` steps from `f0` would track more than `max_window` sites.
pub fn check_window(f0: &ChipConfiguration, t: u64, max_window: usize) -> Result<()> {
    let width = f0.counts.len() as u128 + 2 * t as u128;
    if width > max_window as u128 {
        return Err(Error::Resource(format!(
            "window of {width} sites exceeds the cap of {max_window}"
        )));
    }
    Ok(())
}

/// Liar run on packed limbs; same result as [`liar_run`], much faster for long runs.
pub fn liar_run_fast(f0: &ChipConfiguration, t: u64, max_window: usize) -> Result<ChipConfiguration> {
    check_window(f0, t, max_window)?;
    let mut run = PackedLiar::new(f0);
    for _ in 0..t {
        run.step();
    }
    Ok(run.to_config())
}

/// The liar machine on packed limbs, storing one parity class only.
#[derive(Debug, Clone)]
pub(crate) struct PackedLiar {
    pub(crate) origin: i64,
    pub(crate) cells: usize,
    pub(crate) stride: usize,
    pub(crate) data: Vec<u64>,
    pub(crate) chi: Vec<i8>,
    pub(crate) parity: Parity,
    scratch: Vec<u64>,
}

impl PackedLiar {
    pub(crate) fn new(f0: &ChipConfiguration) -> Self {
        let bits = f0.total().bits().max(1) + 1;
        let stride = limbs::limbs_for_bits(bits);
        let (origin, cells) = match f0.support() {
            Some((lo, hi)) => (lo, ((hi - lo) / 2 + 1) as usize),
            None => (f0.parity.bit(), 0),
        };
        let mut data = vec![0u64; cells * stride];
        for i in 0..cells {
            let c = f0.get(origin + 2 * i as i64);
            limbs::write_biguint(&mut data[i * stride..(i + 1) * stride], &c);
        }
        PackedLiar {
            origin,
            cells,
            stride,
            data,
            chi: Vec::new(),
            parity: f0.parity,
            scratch: Vec::new(),
        }
    }

    /// Advances one step, keeping at most `max_cells` output cells from the left.
    pub(crate) fn step_truncated(&mut self, max_cells: usize) {
        let out = (self.cells + 1).min(max_cells);
        limbs::liar_step(
            &self.data,
            self.cells,
            self.stride,
            self.stride,
            &mut self.scratch,
            out,
            &mut self.chi,
        );
        std::mem::swap(&mut self.data, &mut self.scratch);
        self.cells = out;
        self.origin -= 1;
        self.parity = self.parity.flip();
    }

    pub(crate) fn step(&mut self) {
        self.step_truncated(usize::MAX);
    }

    pub(crate) fn cell(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub(crate) fn to_config(&self) -> ChipConfiguration {
        let mut map = BTreeMap::new();
        for i in 0..self.cells {
            let v = limbs::biguint_from_limbs(self.cell(i));
            if !v.is_zero() {
                map.insert(self.origin + 2 * i as i64, v);
            }
        }
        ChipConfiguration::from_map(self.parity, &map).expect("packed cells share one parity")
    }
}

/// Expected chip counts `numerators[j - offset] / 2^scale_exponent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearProfile {
    offset: i64,
    scale_exponent: u64,
    numerators: Vec<BigUint>,
}

impl LinearProfile {
    pub fn from_chips(f: &ChipConfiguration) -> Self {
        LinearProfile {
            offset: f.offset,
            scale_exponent: 0,
            numerators: f.counts.clone(),
        }
    }

    pub fn point_mass(site: i64, mass: BigUint) -> Self {
        LinearProfile {
            offset: site,
            scale_exponent: 0,
            numerators: vec![mass],
        }
    }

    pub fn scale_exponent(&self) -> u64 {
        self.scale_exponent
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn numerators(&self) -> &[BigUint] {
        &self.numerators
    }

    pub fn numerator(&self, site: i64) -> BigUint {
        let i = site - self.offset;
        if i < 0 || i as usize >= self.numerators.len() {
            BigUint::zero()
        } else {
            self.numerators[i as usize].clone()
        }
    }

    pub fn value(&self, site: i64) -> BigRational {
        BigRational::new(
            self.numerator(site).into(),
            BigInt::one() << self.scale_exponent,
        )
    }

    pub fn total_numerator(&self) -> BigUint {
        self.numerators.iter().sum()
    }

    pub fn interval_sum(&self, a: i64, b: i64) -> Result<BigRational> {
        if a > b {
            return input(format!("empty interval [{a}, {b}]"));
        }
        let lo = a.max(self.offset);
        let hi = b.min(self.offset + self.numerators.len() as i64 - 1);
        let mut num = BigUint::zero();
        for j in lo..=hi {
            num += &self.numerators[(j - self.offset) as usize];
        }
        Ok(BigRational::new(num.into(), BigInt::one() << self.scale_exponent))
    }

    pub fn shifted(&self, by: i64) -> LinearProfile {
        LinearProfile {
            offset: self.offset + by,
            ..self.clone()
        }
    }

    /// Site-by-site equality of values, regardless of scale or window.
    pub fn same_values(&self, other: &LinearProfile) -> bool {
        let lo = self.offset.min(other.offset);
        let hi = (self.offset + self.numerators.len() as i64)
            .max(other.offset + other.numerators.len() as i64);
        let s = self.scale_exponent.max(other.scale_exponent);
        (lo..hi).all(|j| {
            (self.numerator(j) << (s - self.scale_exponent))
                == (other.numerator(j) << (s - other.scale_exponent))
        })
    }

    /// The value at each site as a rational, restricted to nonzero sites.
    pub fn to_map(&self) -> BTreeMap<i64, BigRational> {
        (0..self.numerators.len())
            .filter(|&i| !self.numerators[i].is_zero())
            .map(|i| (self.offset + i as i64, self.value(self.offset + i as i64)))
            .collect()
    }
}

/// One step of the averaging operator: numerator(j) <- numerator(j-1) + numerator(j+1).
pub fn linear_step(g: &LinearProfile) -> LinearProfile {
    let lo = g.offset - 1;
    let len = g.numerators.len() + 2;
    let mut numerators = vec![BigUint::zero(); len];
    for (i, v) in g.numerators.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        numerators[i] += v;
        numerators[i + 2] += v;
    }
    let mut out = LinearProfile {
        offset: lo,
        scale_exponent: g.scale_exponent + 1,
        numerators,
    };
    trim_profile(&mut out);
    out
}

fn trim_profile(g: &mut LinearProfile) {
    match g.numerators.iter().position(|c| !c.is_zero()) {
        None => g.numerators.clear(),
        Some(lo) => {
            let hi = g.numerators.iter().rposition(|c| !c.is_zero()).unwrap();
            g.numerators.truncate(hi + 1);
            g.numerators.drain(..lo);
            g.offset += lo as i64;
        }
    }
}

pub fn linear_run(g: &LinearProfile, t: u64) -> LinearProfile {
    let mut g = g.clone();
    for _ in 0..t {
        g = linear_step(&g);
    }
    g
}

/// Probability that a simple random walk moves by `d` in `s` steps, scaled by `2^s`.
pub fn walk_weight(s: u64, d: i64) -> BigUint {
    let s_i = s as i64;
    if d.abs() > s_i || (s_i + d) % 2 != 0 {
        return BigUint::zero();
    }
    crate::numerics::binom(s_i, (s_i + d) / 2)
}

/// Exact conversion of a small count, used by tests and the CLI.
pub fn count_u64(c: &BigUint) -> Option<u64> {
    c.to_u64()
}
