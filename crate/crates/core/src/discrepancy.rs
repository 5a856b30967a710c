//! Exact comparison of the liar machine with the linear machine.
//!
//! The tracker evolves `E_t = 2^t (f_t - g_t)` directly. Since
//! `f_{t+1} = L f_t + (chi(j-1) - chi(j+1))/2` and `g_{t+1} = L g_t`, the
//! scaled difference satisfies an integer recurrence driven by the signs of
//! the liar machine, and `|E_t| <= t 2^t` bounds its width.

use std::cmp::Ordering;

use num_bigint::{BigInt, BigUint, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::certified::{self, Interval};
use crate::chipfield::{self, ChipConfiguration, LinearProfile, PackedLiar};
use crate::error::{input, Error, Result};
use crate::limbs;
use crate::numerics::binom_row;

/// A closed interval of sites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IntervalSpec {
    pub a: i64,
    pub b: i64,
}

impl IntervalSpec {
    pub fn new(a: i64, b: i64) -> Result<Self> {
        if a > b {
            return input(format!("interval [{a}, {b}] is empty"));
        }
        Ok(IntervalSpec { a, b })
    }

    pub fn width(&self) -> u64 {
        (self.b - self.a) as u64
    }

    /// Parses `a:b`.
    pub fn parse(s: &str) -> Result<Self> {
        let (a, b) = s
            .split_once(':')
            .ok_or_else(|| Error::Input(format!("expected a:b, got {s:?}")))?;
        let a = a
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad interval start {a:?}")))?;
        let b = b
            .trim()
            .parse()
            .map_err(|_| Error::Input(format!("bad interval end {b:?}")))?;
        Self::new(a, b)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscrepancyReport {
    pub t: u64,
    /// Interval width, or `None` for the pointwise maximum.
    pub width: Option<u64>,
    pub max_abs: BigRational,
    pub argmax_site: i64,
    pub bound_value: f64,
    pub ratio: f64,
    /// Exact verdict against `12 ln t`, for pointwise reports with `t >= 2`.
    pub within_bound: Option<bool>,
}

pub const CSV_HEADER: &str = "t,B,max_abs_num,max_abs_den,bound,ratio,argmax_site";

pub fn fmt_sig17(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

impl DiscrepancyReport {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.t,
            self.width.map(|b| b.to_string()).unwrap_or_default(),
            self.max_abs.numer(),
            self.max_abs.denom(),
            fmt_sig17(self.bound_value),
            fmt_sig17(self.ratio),
            self.argmax_site
        )
    }
}

/// `num / 2^exp` as a float, without overflowing on huge operands.
pub fn dyadic_to_f64(num: &BigUint, exp: u64) -> f64 {
    let shift = num.bits().saturating_sub(64);
    let top = (num >> shift).to_f64().unwrap_or(f64::NAN);
    top * 2f64.powi((shift as i64 - exp as i64).clamp(-2000, 2000) as i32)
}

fn dyadic(num: BigInt, exp: u64) -> BigRational {
    BigRational::new(num, BigInt::one() << exp)
}

/// Lower bounds `floor(2^t * 12 ln t)` that certify the pointwise bound in
/// one comparison; ambiguous cases are refined exactly.
#[derive(Debug, Clone)]
pub struct PointwiseBound {
    thresholds: Vec<BigUint>,
}

impl PointwiseBound {
    pub fn new(t_max: u64) -> Result<Self> {
        let prec = certified::default_precision();
        let twelve = BigRational::from_integer(12.into());
        let mut thresholds = vec![BigUint::zero(); 2];
        for t in 2..=t_max {
            let lo = certified::ln_u64(t, prec)?.scale(&twelve).lo;
            let scaled = (lo * BigRational::from_integer(BigInt::one() << t)).floor();
            thresholds.push(scaled.to_integer().to_biguint().unwrap_or_default());
        }
        Ok(PointwiseBound { thresholds })
    }

    /// True iff `scaled / 2^t < 12 ln t`.
    pub fn holds(&self, t: u64, scaled: &BigUint) -> Result<bool> {
        if t < 2 {
            return input("the pointwise bound needs t >= 2");
        }
        if let Some(th) = self.thresholds.get(t as usize) {
            if scaled < th {
                return Ok(true);
            }
        }
        certified::dyadic_below_ln(scaled, t, 12, t)
    }

    pub fn value_f64(t: u64) -> f64 {
        12.0 * (t as f64).ln()
    }
}

/// Joint evolution of the liar machine and the scaled discrepancy.
#[derive(Debug, Clone)]
pub struct DiscrepancyTracker {
    liar: PackedLiar,
    t: u64,
    horizon: u64,
    right_limit: Option<i64>,
    e_stride: usize,
    e_active: usize,
    e: Vec<u64>,
    scratch: Vec<u64>,
}

fn e_bits(t: u64) -> u64 {
    t + (64 - t.leading_zeros() as u64) + 2
}

impl DiscrepancyTracker {
    pub fn new(f0: &ChipConfiguration, horizon: u64) -> Self {
        Self::build(f0, horizon, None)
    }

    /// Tracks only what can influence sites `<= site` at time `horizon`.
    pub fn with_right_limit(f0: &ChipConfiguration, horizon: u64, site: i64) -> Self {
        Self::build(f0, horizon, Some(site))
    }

    fn build(f0: &ChipConfiguration, horizon: u64, right_limit: Option<i64>) -> Self {
        let liar = PackedLiar::new(f0);
        let e_stride = limbs::limbs_for_bits(e_bits(horizon.max(1)));
        let e = vec![0u64; liar.cells * e_stride];
        let mut tr = DiscrepancyTracker {
            liar,
            t: 0,
            horizon,
            right_limit,
            e_stride,
            e_active: limbs::limbs_for_bits(e_bits(1)),
            e,
            scratch: Vec::new(),
        };
        tr.clip();
        tr
    }

    fn keep_cells(&self, t: u64, origin: i64, cells: usize) -> usize {
        match self.right_limit {
            None => cells,
            Some(r) => {
                let edge = r + self.horizon.saturating_sub(t) as i64;
                if edge < origin {
                    0
                } else {
                    cells.min(((edge - origin) / 2 + 1) as usize)
                }
            }
        }
    }

    fn clip(&mut self) {
        let keep = self.keep_cells(self.t, self.liar.origin, self.liar.cells);
        self.liar.cells = keep;
        self.liar.data.truncate(keep * self.liar.stride);
        self.e.truncate(keep * self.e_stride);
    }

    pub fn time(&self) -> u64 {
        self.t
    }

    pub fn step(&mut self) {
        let next_active = limbs::limbs_for_bits(e_bits(self.t + 1)).min(self.e_stride);
        if next_active > self.e_active {
            for i in 0..self.liar.cells {
                let cell = &mut self.e[i * self.e_stride..(i + 1) * self.e_stride];
                let fill = if limbs::is_negative(&cell[..self.e_active]) {
                    u64::MAX
                } else {
                    0
                };
                cell[self.e_active..next_active].fill(fill);
            }
            self.e_active = next_active;
        }
        let cells = self.liar.cells;
        let out = self.keep_cells(self.t + 1, self.liar.origin - 1, cells + 1);
        self.liar.step_truncated(out);
        limbs::scaled_discrepancy_step(
            &self.e,
            cells,
            self.e_stride,
            self.e_active,
            self.t,
            &self.liar.chi,
            &mut self.scratch,
            out,
        );
        std::mem::swap(&mut self.e, &mut self.scratch);
        self.t += 1;
    }

    pub fn run_to(&mut self, t: u64) {
        while self.t < t {
            self.step();
        }
    }

    fn cell_of(&self, site: i64) -> Option<usize> {
        let d = site - self.liar.origin;
        if d < 0 || d % 2 != 0 {
            return None;
        }
        let i = (d / 2) as usize;
        (i < self.liar.cells).then_some(i)
    }

    fn e_cell(&self, i: usize) -> &[u64] {
        &self.e[i * self.e_stride..i * self.e_stride + self.e_active]
    }

    /// `2^t (f_t(site) - g_t(site))`.
    pub fn scaled_at(&self, site: i64) -> BigInt {
        match self.cell_of(site) {
            Some(i) => limbs::bigint_from_signed_limbs(self.e_cell(i)),
            None => BigInt::zero(),
        }
    }

    /// `2^t (f_t(I) - g_t(I))`.
    pub fn scaled_interval(&self, a: i64, b: i64) -> BigInt {
        let mut sum = BigInt::zero();
        for i in 0..self.liar.cells {
            let site = self.liar.origin + 2 * i as i64;
            if a <= site && site <= b {
                sum += limbs::bigint_from_signed_limbs(self.e_cell(i));
            }
        }
        sum
    }

    /// Largest `|E_t|` and the leftmost site attaining it.
    pub fn max_abs_scaled(&self) -> (BigUint, i64) {
        if self.liar.cells == 0 {
            return (BigUint::zero(), self.liar.origin);
        }
        let mut hi = 0usize;
        let mut lo = 0usize;
        for i in 1..self.liar.cells {
            if limbs::cmp_signed(self.e_cell(i), self.e_cell(hi)) == Ordering::Greater {
                hi = i;
            }
            if limbs::cmp_signed(self.e_cell(i), self.e_cell(lo)) == Ordering::Less {
                lo = i;
            }
        }
        let vh = limbs::bigint_from_signed_limbs(self.e_cell(hi));
        let vl = limbs::bigint_from_signed_limbs(self.e_cell(lo));
        let (mh, ml) = (vh.magnitude().clone(), vl.magnitude().clone());
        let site = |i: usize| self.liar.origin + 2 * i as i64;
        match mh.cmp(&ml) {
            Ordering::Greater => (mh, site(hi)),
            Ordering::Less => (ml, site(lo)),
            Ordering::Equal => (mh, site(hi.min(lo))),
        }
    }

    pub fn liar_config(&self) -> ChipConfiguration {
        self.liar.to_config()
    }
}

fn pointwise_report(t: u64, mag: BigUint, site: i64, bound: Option<&PointwiseBound>) -> Result<DiscrepancyReport> {
    let (bound_value, ratio, within) = if t >= 2 {
        let b = PointwiseBound::value_f64(t);
        let within = match bound {
            Some(pb) => pb.holds(t, &mag)?,
            None => certified::dyadic_below_ln(&mag, t, 12, t)?,
        };
        (b, dyadic_to_f64(&mag, t) / b, Some(within))
    } else {
        (f64::NAN, f64::NAN, None)
    };
    Ok(DiscrepancyReport {
        t,
        width: None,
        max_abs: dyadic(mag.into(), t),
        argmax_site: site,
        bound_value,
        ratio,
        within_bound: within,
    })
}

/// `max_j |f_t(j) - g_t(j)|`, exact, with the `12 ln t` verdict.
pub fn pointwise_discrepancy(f0: &ChipConfiguration, t: u64) -> Result<DiscrepancyReport> {
    let mut tr = DiscrepancyTracker::new(f0, t);
    tr.run_to(t);
    let (mag, site) = tr.max_abs_scaled();
    pointwise_report(t, mag, site, None)
}

/// The same maximum computed from the reference machines, for cross-checks.
pub fn pointwise_discrepancy_direct(f0: &ChipConfiguration, t: u64) -> Result<(BigRational, i64)> {
    let f = chipfield::liar_run(f0, t, usize::MAX)?;
    let g = chipfield::linear_run(&LinearProfile::from_chips(f0), t);
    let lo = g.offset().min(f.offset());
    let hi = (g.offset() + g.numerators().len() as i64).max(f.offset() + f.counts().len() as i64);
    let mut best = (BigRational::zero(), lo);
    for j in lo..hi {
        let d = (BigRational::from_integer(f.get(j).into()) - g.value(j)).abs();
        if d > best.0 {
            best = (d, j);
        }
    }
    Ok(best)
}

/// `f_t(site) - g_t(site)`.
pub fn site_discrepancy(f0: &ChipConfiguration, t: u64, site: i64) -> BigRational {
    let mut tr = DiscrepancyTracker::with_right_limit(f0, t, site);
    tr.run_to(t);
    dyadic(tr.scaled_at(site), t)
}

/// `min(sqrt t, max(B, B ln(t/B^2)))`; width 0 is treated as width 1.
pub fn interval_bound(t: u64, width: u64, prec: u32) -> Result<Interval> {
    if t == 0 {
        return input("the interval bound needs t >= 1");
    }
    let b = width.max(1);
    let bq = BigRational::from_integer(b.into());
    let root = certified::sqrt(&BigRational::from_integer(t.into()), prec)?;
    let log = certified::ln(&BigRational::new(t.into(), (b * b).into()), prec)?.scale(&bq);
    Ok(root.min(&Interval::point(bq).max(&log)))
}

/// `|f_t(I) - g_t(I)|`, exact; the bound carries no constant factor.
pub fn interval_discrepancy(f0: &ChipConfiguration, t: u64, interval: IntervalSpec) -> Result<DiscrepancyReport> {
    if t == 0 {
        return input("interval discrepancy needs t >= 1");
    }
    let mut tr = DiscrepancyTracker::with_right_limit(f0, t, interval.b);
    tr.run_to(t);
    let d = dyadic(tr.scaled_interval(interval.a, interval.b).abs(), t);
    let bound = interval_bound(t, interval.width(), certified::default_precision())?;
    let bv = bound.midpoint_f64();
    Ok(DiscrepancyReport {
        t,
        width: Some(interval.width()),
        ratio: d.to_f64().unwrap_or(f64::NAN) / bv,
        max_abs: d,
        argmax_site: interval.a,
        bound_value: bv,
        within_bound: None,
    })
}

/// One measured interval discrepancy.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalMeasurement {
    pub t: u64,
    pub interval: IntervalSpec,
    pub discrepancy: BigRational,
}

/// Measures several `(t, I)` pairs in a single pass over time.
pub fn measure_intervals(f0: &ChipConfiguration, requests: &[(u64, IntervalSpec)]) -> Vec<IntervalMeasurement> {
    let horizon = requests.iter().map(|r| r.0).max().unwrap_or(0);
    let mut order: Vec<usize> = (0..requests.len()).collect();
    order.sort_by_key(|&i| requests[i].0);
    let mut tr = DiscrepancyTracker::new(f0, horizon);
    let mut out = vec![None; requests.len()];
    for i in order {
        let (t, iv) = requests[i];
        tr.run_to(t);
        out[i] = Some(IntervalMeasurement {
            t,
            interval: iv,
            discrepancy: dyadic(tr.scaled_interval(iv.a, iv.b).abs(), t),
        });
    }
    out.into_iter().map(Option::unwrap).collect()
}

/// A run for [`fit_interval_constant`].
#[derive(Debug, Clone)]
pub struct IntervalRun {
    pub config: ChipConfiguration,
    pub t: u64,
    pub interval: IntervalSpec,
}

/// Upper estimate of `d / bound(t, B)`.
pub fn interval_ratio(m: &IntervalMeasurement) -> Result<BigRational> {
    let bound = interval_bound(m.t, m.interval.width(), certified::default_precision())?;
    Ok(&m.discrepancy / bound.lo)
}

/// Supremum of the interval ratios over measured runs.
pub fn fit_measurements(ms: &[IntervalMeasurement]) -> Result<BigRational> {
    if ms.is_empty() {
        return input("cannot fit a constant to an empty run list");
    }
    let mut best = BigRational::zero();
    for m in ms {
        let r = interval_ratio(m)?;
        if r > best {
            best = r;
        }
    }
    Ok(best)
}

/// Supremum over runs of `|f_t(I) - g_t(I)| / min(sqrt t, max(B, B ln(t/B^2)))`.
pub fn fit_interval_constant(runs: &[IntervalRun]) -> Result<BigRational> {
    if runs.is_empty() {
        return input("cannot fit a constant to an empty run list");
    }
    let ms: Vec<IntervalMeasurement> = runs
        .iter()
        .map(|r| measure_intervals(&r.config, &[(r.t, r.interval)]).remove(0))
        .collect();
    fit_measurements(&ms)
}

/// Exact check `d <= c * bound(t, B)`.
pub fn within_scaled_bound(m: &IntervalMeasurement, c: &BigRational) -> Result<bool> {
    certified::refine(|prec| {
        let bound = interval_bound(m.t, m.interval.width(), prec)?.scale(c);
        Ok(match bound.cmp_rational(&m.discrepancy) {
            Some(Ordering::Less) => Some(false),
            Some(_) => Some(true),
            None => None,
        })
    })
}

/// Interval widths of the default sweep at time `t`.
pub fn default_widths(t: u64) -> Vec<u64> {
    let ceil_root_over = |k: u64| -> u64 {
        // Least m with (k m)^2 >= t, i.e. ceil(sqrt(t) / k).
        let mut m = ((t as f64).sqrt() / k as f64).floor().max(0.0) as u64;
        while (k * m) * (k * m) < t {
            m += 1;
        }
        while m > 0 && (k * (m - 1)) * (k * (m - 1)) >= t {
            m -= 1;
        }
        m
    };
    let mut ws = vec![2, 4, ceil_root_over(4) * 2, ceil_root_over(2) * 2];
    ws.retain(|&w| w > 0);
    ws.sort_unstable();
    ws.dedup();
    ws
}

/// The default sweep grid: `t = 2^3 .. 2^12` with [`default_widths`].
pub fn default_grid() -> Vec<(u64, u64)> {
    (3..=12)
        .flat_map(|k| {
            let t = 1u64 << k;
            default_widths(t).into_iter().map(move |b| (t, b))
        })
        .collect()
}

fn check_hb_args(s: u64, width: u64) -> Result<()> {
    if s == 0 {
        return input("h_B needs s >= 1");
    }
    if width == 0 || !width.is_multiple_of(2) {
        return input(format!("h_B needs an even positive width, got {width}"));
    }
    Ok(())
}

/// `2^s h_B(j) = binom(s, (s+j-B)/2) - binom(s, (s+j)/2)` from a binomial row.
#[derive(Debug, Clone)]
pub struct HbRow {
    s: u64,
    row: Vec<BigUint>,
}

impl HbRow {
    pub fn new(s: u64) -> Self {
        HbRow {
            s,
            row: binom_row(s),
        }
    }

    fn entry(&self, twice_k: i64) -> BigInt {
        if twice_k < 0 || twice_k % 2 != 0 {
            return BigInt::zero();
        }
        let k = (twice_k / 2) as usize;
        self.row.get(k).cloned().map(BigInt::from).unwrap_or_default()
    }

    /// `2^s h_B(j)`.
    pub fn scaled(&self, width: u64, j: i64) -> BigInt {
        let s = self.s as i64;
        self.entry(s + j - width as i64) - self.entry(s + j)
    }

    /// Sites `j` of the right parity where `h_B` can be nonzero, left to right.
    pub fn support(&self, width: u64) -> impl Iterator<Item = i64> {
        let s = self.s as i64;
        (-s..=s + width as i64).step_by(2)
    }
}

pub fn hb_eval(s: u64, width: u64, j: i64) -> Result<BigRational> {
    check_hb_args(s, width)?;
    let si = s as i64;
    let entry = |twice_k: i64| -> BigInt {
        if twice_k < 0 || twice_k % 2 != 0 || twice_k > 2 * si {
            BigInt::zero()
        } else {
            crate::numerics::binom(si, twice_k / 2).into()
        }
    };
    Ok(dyadic(entry(si + j - width as i64) - entry(si + j), s))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BimodalityCertificate {
    pub holds: bool,
    /// Sites `j` where `h_B(j-2) - h_B(j)` takes a sign opposite to the previous nonzero one.
    pub sign_changes: Vec<i64>,
}

/// `2^s h_B(j)` for `j = -s - 2, -s, ..., s + B + 2`.
fn hb_values(row: &HbRow, width: u64) -> Vec<BigInt> {
    let s = row.s as i64;
    (-s - 2..=s + width as i64 + 2).step_by(2).map(|j| row.scaled(width, j)).collect()
}

fn bimodality_from(s: u64, values: &[BigInt]) -> BimodalityCertificate {
    let mut prev: Option<Sign> = None;
    let mut changes = Vec::new();
    for (i, w) in values.windows(2).enumerate() {
        let sign = (&w[0] - &w[1]).sign();
        if sign == Sign::NoSign {
            continue;
        }
        if prev.is_some_and(|p| p != sign) {
            changes.push(-(s as i64) + 2 * i as i64);
        }
        prev = Some(sign);
    }
    BimodalityCertificate {
        holds: changes.len() <= 2,
        sign_changes: changes,
    }
}

/// Scans `h_B(j-2) - h_B(j)` over the support and counts sign changes.
pub fn bimodality_check(s: u64, width: u64) -> Result<BimodalityCertificate> {
    check_hb_args(s, width)?;
    let row = HbRow::new(s);
    Ok(bimodality_from(s, &hb_values(&row, width)))
}

pub const DEFAULT_S_CHECK: u64 = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HbBoundsReport {
    pub max_abs: BigRational,
    /// `max |h_B| <= 1/sqrt(s)`.
    pub root_bound: bool,
    /// `max |h_B| <= (3/2) B / s`.
    pub linear_bound: bool,
    /// `max |h_B| >= (1/4)/sqrt(s)`, checked when `B >= sqrt(s)` and `s >= s_check`.
    pub lower_bound: Option<bool>,
}

impl HbBoundsReport {
    pub fn passes(&self) -> bool {
        self.root_bound && self.linear_bound && self.lower_bound != Some(false)
    }
}

fn hb_bounds_from(s: u64, values: &[BigInt], width: u64, s_check: u64) -> HbBoundsReport {
    let m = values.iter().map(|v| v.magnitude()).max().cloned().unwrap_or_default();
    let four_s = BigUint::one() << (2 * s);
    let m2 = &m * &m;
    let root_bound = &m2 * s <= four_s;
    let linear_bound = &m * (2 * s) <= (BigUint::from(3 * width) << s);
    let lower_bound = (width * width >= s && s >= s_check).then(|| &m2 * (16 * s) >= four_s);
    HbBoundsReport {
        max_abs: dyadic(m.into(), s),
        root_bound,
        linear_bound,
        lower_bound,
    }
}

pub fn hb_bounds_check(s: u64, width: u64) -> Result<HbBoundsReport> {
    hb_bounds_check_with(s, width, DEFAULT_S_CHECK)
}

pub fn hb_bounds_check_with(s: u64, width: u64, s_check: u64) -> Result<HbBoundsReport> {
    check_hb_args(s, width)?;
    let row = HbRow::new(s);
    Ok(hb_bounds_from(s, &hb_values(&row, width), width, s_check))
}

/// Both checks for every even width in `widths`, sharing one binomial row.
pub fn hb_row_checks(s: u64, widths: &[u64], s_check: u64) -> Result<Vec<(u64, BimodalityCertificate, HbBoundsReport)>> {
    let row = HbRow::new(s);
    widths
        .iter()
        .map(|&w| {
            check_hb_args(s, w)?;
            let values = hb_values(&row, w);
            Ok((w, bimodality_from(s, &values), hb_bounds_from(s, &values, w, s_check)))
        })
        .collect()
}

/// For `s = 0..=s_max`: the site maximizing `h_B` (ties to the right) and
/// the minimizing site, `B - argmax` by antisymmetry, with `2^s` times the maximum.
pub fn hb_extremes(s_max: u64, width: u64) -> Result<Vec<(i64, i64, BigUint)>> {
    if width == 0 || !width.is_multiple_of(2) {
        return input(format!("h_B needs an even positive width, got {width}"));
    }
    let w = width as i64;
    let mut row: Vec<BigUint> = vec![BigUint::one()];
    let mut out = Vec::with_capacity(s_max as usize + 1);
    for s in 0..=s_max as i64 {
        if s > 0 {
            row.push(BigUint::zero());
            for k in (1..row.len()).rev() {
                let (a, b) = row.split_at_mut(k);
                b[0] += &a[k - 1];
            }
        }
        let get = |twice_k: i64| -> Option<&BigUint> {
            if twice_k < 0 || twice_k % 2 != 0 {
                None
            } else {
                row.get((twice_k / 2) as usize)
            }
        };
        // h_B >= 0 exactly when j >= B/2, so the maximum lives there.
        let start = {
            let mut j = w / 2;
            if (s + j) % 2 != 0 {
                j += 1;
            }
            j
        };
        let mut best: Option<(i64, BigInt)> = None;
        let mut j = start;
        while j <= s + w {
            let pos = get(s + j - w).cloned().map(BigInt::from).unwrap_or_default();
            let neg = get(s + j).cloned().map(BigInt::from).unwrap_or_default();
            let v = pos - neg;
            if best.as_ref().is_none_or(|(_, b)| v >= *b) {
                best = Some((j, v));
            }
            j += 2;
        }
        let (jmax, v) = best.ok_or_else(|| Error::Invariant("empty h_B support".into()))?;
        let mag = v
            .to_biguint()
            .ok_or_else(|| Error::Invariant("negative h_B maximum".into()))?;
        out.push((jmax, w - jmax, mag));
    }
    Ok(out)
}
