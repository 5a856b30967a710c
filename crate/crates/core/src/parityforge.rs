//! Initial configurations whose liar-machine parities follow a prescribed
//! space-time pattern, and the adversarial configurations built from them.
//!
//! Adding `2^tau` chips at site `n + tau` changes nothing mod 2 before time
//! `tau` (the pile splits evenly), and at time `tau` it adds `binom(tau, k)`
//! chips at `n + 2k`. By Lucas' theorem that flips the parity at `n` and at
//! `n + 2k` for every nonzero submask `k` of `tau`, so fixes made from left
//! to right never disturb a site already decided.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;

use crate::chipfield::{ChipConfiguration, Parity};
use crate::discrepancy::{hb_extremes, IntervalSpec};
use crate::error::{input, Error, Result};
use crate::limbs;

/// Target parities `g(n, t)` for sites `0..n` and times `0..t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParityGrid {
    n: usize,
    t: usize,
    bits: Vec<bool>,
    support_parity: Parity,
}

impl ParityGrid {
    /// All-zero grid.
    pub fn zeros(n: usize, t: usize, support_parity: Parity) -> Result<Self> {
        if n == 0 || t == 0 {
            return input("a parity grid needs N >= 1 and T >= 1");
        }
        Ok(ParityGrid {
            n,
            t,
            bits: vec![false; n * t],
            support_parity,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn support_parity(&self) -> Parity {
        self.support_parity
    }

    /// Whether site `n` can hold chips at time `t`.
    pub fn reachable(&self, n: usize, t: usize) -> bool {
        ((n + t) as i64 - self.support_parity.bit()) % 2 == 0
    }

    pub fn get(&self, n: usize, t: usize) -> bool {
        self.bits[t * self.n + n]
    }

    pub fn set(&mut self, n: usize, t: usize, bit: bool) -> Result<()> {
        if n >= self.n || t >= self.t {
            return input(format!("cell ({n}, {t}) is outside the grid"));
        }
        if bit && !self.reachable(n, t) {
            return input(format!("cell ({n}, {t}) cannot hold chips"));
        }
        self.bits[t * self.n + n] = bit;
        Ok(())
    }

    pub fn is_parity_respecting(&self) -> bool {
        (0..self.t).all(|t| (0..self.n).all(|n| !self.get(n, t) || self.reachable(n, t)))
    }

    /// Uniform bits on reachable cells.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, t: usize, support_parity: Parity) -> Result<Self> {
        let mut g = Self::zeros(n, t, support_parity)?;
        for tt in 0..t {
            for nn in 0..n {
                if g.reachable(nn, tt) {
                    g.bits[tt * n + nn] = rng.gen();
                }
            }
        }
        Ok(g)
    }

    /// Header `N T parity`, then one line per time with `0`, `1`, or `.` for
    /// cells that cannot hold chips.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.t, self.support_parity);
        for t in 0..self.t {
            for n in 0..self.n {
                out.push(match (self.reachable(n, t), self.get(n, t)) {
                    (false, _) => '.',
                    (true, false) => '0',
                    (true, true) => '1',
                });
            }
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Input("empty parity grid".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return input(format!("expected header `N T parity`, got {header:?}"));
        }
        let n: usize = fields[0]
            .parse()
            .map_err(|_| Error::Input(format!("bad N {:?}", fields[0])))?;
        let t: usize = fields[1]
            .parse()
            .map_err(|_| Error::Input(format!("bad T {:?}", fields[1])))?;
        let parity: Parity = fields[2].parse()?;
        let mut g = Self::zeros(n, t, parity)?;
        for tt in 0..t {
            let line = lines
                .next()
                .ok_or_else(|| Error::Input(format!("grid has fewer than {t} rows")))?;
            if line.chars().count() != n {
                return input(format!("row {tt} has {} cells, expected {n}", line.chars().count()));
            }
            for (nn, c) in line.chars().enumerate() {
                match c {
                    '0' => {}
                    '1' => g.set(nn, tt, true)?,
                    '.' if !g.reachable(nn, tt) => {}
                    '.' => return input(format!("cell ({nn}, {tt}) can hold chips but is marked '.'")),
                    _ => return input(format!("unexpected character {c:?} in row {tt}")),
                }
            }
        }
        if lines.next().is_some() {
            return input(format!("grid has more than {t} rows"));
        }
        Ok(g)
    }
}

/// Packed liar-machine state with pending fixes for the current time.
struct Forcer {
    horizon: u64,
    tau: u64,
    origin: i64,
    cells: usize,
    stride: usize,
    data: Vec<u64>,
    scratch: Vec<u64>,
    chi: Vec<i8>,
    row: Vec<u64>,
    /// Significant limbs of each row entry.
    row_limbs: Vec<usize>,
    row_len: usize,
    row_cap: i64,
    flips: Vec<u8>,
    fixes: Vec<usize>,
    total_fixes: u64,
    left_limit: i64,
    f0: BTreeMap<i64, BigUint>,
    parity: Parity,
}

impl Forcer {
    fn new(horizon: u64, parity: Parity) -> Self {
        let stride = limbs::limbs_for_bits(horizon + 2 + 64);
        let mut row = vec![0u64; stride];
        row[0] = 1;
        Forcer {
            horizon,
            tau: 0,
            origin: parity.bit(),
            cells: 0,
            stride,
            data: Vec::new(),
            scratch: Vec::new(),
            chi: Vec::new(),
            row,
            row_limbs: vec![1],
            row_len: 1,
            row_cap: i64::MAX,
            flips: Vec::new(),
            fixes: Vec::new(),
            total_fixes: 0,
            left_limit: i64::MIN,
            f0: BTreeMap::new(),
            parity,
        }
    }

    fn active(&self) -> usize {
        let fix_bits = 64 - self.total_fixes.leading_zeros() as u64;
        limbs::limbs_for_bits(self.tau + 3 + fix_bits).min(self.stride)
    }

    /// Prepares time `tau`: cells up to `right`, fixes allowed from `left`.
    fn begin(&mut self, right: i64, left: i64) {
        if left < self.origin {
            let grow = ((self.origin - left + 1) / 2) as usize;
            self.data.splice(0..0, std::iter::repeat_n(0, grow * self.stride));
            self.origin -= 2 * grow as i64;
        }
        let cells = if right < self.origin {
            0
        } else {
            ((right - self.origin) / 2 + 1) as usize
        };
        self.cells = cells;
        self.data.resize(cells * self.stride, 0);
        self.flips.clear();
        self.flips.resize(cells, 0);
        self.fixes.clear();
        self.left_limit = left;
        let reach = if right < left { 0 } else { (right - left) / 2 };
        self.row_cap = self.row_cap.min(reach);
        let want = (self.tau as i64).min(self.row_cap) as usize + 1;
        if self.tau > 0 {
            let active = self.active();
            let s = self.stride;
            self.row.truncate(self.row_len.min(want) * s);
            if want > self.row_len {
                self.row.resize(want * s, 0);
            }
            self.row_limbs.resize(want, 0);
            for k in (1..want).rev() {
                let (lo, hi) = self.row.split_at_mut(k * s);
                let src = self.row_limbs[k - 1];
                limbs::add_assign(&mut hi[..active], &lo[(k - 1) * s..(k - 1) * s + src]);
                let mut len = src.max(self.row_limbs[k]) + 1;
                while len > 1 && (len > active || hi[len - 1] == 0) {
                    len -= 1;
                }
                self.row_limbs[k] = len;
            }
        }
        self.row_len = want;
    }

    fn index(&self, site: i64) -> Option<usize> {
        let d = site - self.origin;
        (d >= 0 && d % 2 == 0 && ((d / 2) as usize) < self.cells).then_some((d / 2) as usize)
    }

    fn cell_bit(&self, i: usize) -> u8 {
        (self.data[i * self.stride] & 1) as u8 ^ self.flips[i]
    }

    /// Parity at `site` and time `tau`, counting fixes made so far.
    fn parity(&self, site: i64) -> bool {
        self.index(site).is_some_and(|i| self.cell_bit(i) == 1)
    }

    fn odd_left_of(&self, site: i64) -> u64 {
        let end = if site <= self.origin {
            0
        } else {
            (((site - self.origin + 1) / 2) as usize).min(self.cells)
        };
        (0..end).filter(|&i| self.cell_bit(i) == 1).count() as u64
    }

    fn fix(&mut self, site: i64) -> Result<()> {
        let i = self
            .index(site)
            .ok_or_else(|| Error::Invariant(format!("fix at unreachable site {site}")))?;
        if site < self.left_limit || self.fixes.last().is_some_and(|&j| j >= i) {
            return Err(Error::Invariant(format!("fix at site {site} out of order")));
        }
        self.flips[i] ^= 1;
        let tau = self.tau;
        let mut k = ((!tau).wrapping_add(1)) & tau;
        while k != 0 && i + (k as usize) < self.cells {
            self.flips[i + k as usize] ^= 1;
            k = ((k | !tau).wrapping_add(1)) & tau;
        }
        self.fixes.push(i);
        self.total_fixes += 1;
        let start = site + tau as i64;
        let entry = self.f0.entry(start).or_insert_with(BigUint::zero);
        entry.set_bit(tau, true);
        Ok(())
    }

    /// Applies the pending fixes, checks the predicted parities, and steps.
    fn finish(&mut self) -> Result<()> {
        let predicted: Vec<u8> = (0..self.cells).map(|i| self.cell_bit(i)).collect();
        let active = self.active();
        let s = self.stride;
        for &i in &self.fixes {
            let upto = self.row_len.min(self.cells - i);
            for k in 0..upto {
                let dst = &mut self.data[(i + k) * s..(i + k) * s + active];
                if limbs::add_assign(dst, &self.row[k * s..k * s + self.row_limbs[k]]) {
                    return Err(Error::Invariant("forcing counts overflowed".into()));
                }
            }
        }
        for (i, &p) in predicted.iter().enumerate() {
            if (self.data[i * s] & 1) as u8 != p {
                return Err(Error::Invariant(format!(
                    "parity at site {} and time {} differs from the prediction",
                    self.origin + 2 * i as i64,
                    self.tau
                )));
            }
        }
        if self.tau + 1 < self.horizon {
            let active = self.active();
            limbs::liar_step(
                &self.data,
                self.cells,
                s,
                active,
                &mut self.scratch,
                self.cells + 1,
                &mut self.chi,
            );
            std::mem::swap(&mut self.data, &mut self.scratch);
            self.origin -= 1;
        }
        self.flips.iter_mut().for_each(|f| *f = 0);
        self.tau += 1;
        Ok(())
    }

    fn into_config(self) -> Result<ChipConfiguration> {
        ChipConfiguration::from_map(self.parity, &self.f0)
    }
}

/// Runs the forcing loop: before time `tau` is decided, cells right of
/// `right(tau)` are dropped and fixes are only allowed from `left(tau)`.
fn force_with(
    horizon: u64,
    parity: Parity,
    right: impl Fn(u64) -> i64,
    left: impl Fn(u64) -> i64,
    mut decide: impl FnMut(u64, &mut Forcer) -> Result<()>,
) -> Result<ChipConfiguration> {
    let mut f = Forcer::new(horizon, parity);
    for tau in 0..horizon {
        f.begin(right(tau), left(tau));
        decide(tau, &mut f)?;
        f.finish()?;
    }
    f.into_config()
}

/// An initial configuration whose liar-machine parities match `g` on its
/// whole window.
pub fn force_parity(g: &ParityGrid) -> Result<ChipConfiguration> {
    if !g.is_parity_respecting() {
        return input("parity grid marks cells that cannot hold chips");
    }
    let (n, t) = (g.n as i64, g.t as u64);
    force_with(
        t,
        g.support_parity,
        |tau| n - 1 + (t - 1 - tau) as i64,
        |_| 0,
        |tau, f| {
            for site in 0..g.n {
                if g.reachable(site, tau as usize) && f.parity(site as i64) != g.get(site, tau as usize) {
                    f.fix(site as i64)?;
                }
            }
            Ok(())
        },
    )
}

/// What an adversarial configuration is built to maximize.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// `f_T(site) - g_T(site)`.
    Site(i64),
    /// `f_T(I) - g_T(I)`.
    Interval(IntervalSpec),
}

impl Target {
    fn bounds(&self) -> (i64, i64) {
        match *self {
            Target::Site(z) => (z, z),
            Target::Interval(i) => (i.a, i.b),
        }
    }
}

/// An adversarial configuration with its predicted discrepancy.
#[derive(Debug, Clone)]
pub struct Adversarial {
    pub config: ChipConfiguration,
    /// `f_T - g_T` at the target when the sign pattern is realized.
    pub predicted: BigRational,
    /// Guard cells `(site, tau)` fixed at time `tau` so that the sign
    /// alternation inside the light cone starts at +1.
    pub guards: Vec<(i64, u64)>,
}

/// Exact target discrepancy of [`adversarial_config`] without building it.
pub fn adversarial_prediction(t: u64, target: Target) -> Result<BigRational> {
    let (_, _, widths) = adversarial_geometry(t, target)?;
    let ext = hb_extremes(t - 1, widths)?;
    let mut sum = BigRational::zero();
    for (s, (_, _, m)) in ext.iter().enumerate() {
        sum += BigRational::new(m.clone().into(), (BigUint::one() << s).into());
    }
    Ok(sum)
}

/// `(a, b_last + 1, width)` for the kernel `h_width(b_last + 1 - z)` whose
/// weighted sign sum is the target discrepancy.
fn adversarial_geometry(t: u64, target: Target) -> Result<(i64, i64, u64)> {
    if t == 0 {
        return input("adversarial configurations need T >= 1");
    }
    let (a, b) = target.bounds();
    let b_last = if (b - a) % 2 == 0 { b } else { b - 1 };
    Ok((a, b_last + 1, (b_last - a + 2) as u64))
}

/// Makes exactly two sites odd in each time slice of the light cone of the
/// target: the maximizer of the kernel with sign +1 and the minimizer with
/// sign -1, every other cone cell even.
pub fn adversarial_construction(t: u64, target: Target) -> Result<Adversarial> {
    let (a, b_end, width) = adversarial_geometry(t, target)?;
    let (_, b) = target.bounds();
    let ext = hb_extremes(t - 1, width)?;
    let parity = Parity::of(a + t as i64);
    let ti = t as i64;
    let mut guards = Vec::new();
    let config = force_with(
        t,
        parity,
        |tau| b + (ti - tau as i64),
        |tau| a - (ti - tau as i64) - 2,
        |tau, f| {
            let s = (t - 1 - tau) as usize;
            let (jmax, jmin, _) = ext[s];
            let (plus, minus) = (b_end - jmax, b_end - jmin);
            let cone_left = a - (ti - tau as i64);
            let guard = cone_left - 2;
            if f.parity(guard) != (f.odd_left_of(guard) % 2 == 1) {
                f.fix(guard)?;
                guards.push((guard, tau));
            }
            let mut z = cone_left;
            let right = b + (ti - tau as i64);
            while z <= right {
                if f.parity(z) != (z == plus || z == minus) {
                    f.fix(z)?;
                }
                z += 2;
            }
            Ok(())
        },
    )?;
    Ok(Adversarial {
        config,
        predicted: adversarial_prediction(t, target)?,
        guards,
    })
}

pub fn adversarial_config(t: u64, target: Target) -> Result<ChipConfiguration> {
    Ok(adversarial_construction(t, target)?.config)
}

/// Grid of realized parities, for reports.
pub fn realized_grid(f0: &ChipConfiguration, n: usize, t: usize) -> Result<ParityGrid> {
    let mut g = ParityGrid::zeros(n, t, f0.parity())?;
    let mut f = f0.clone();
    for tt in 0..t {
        for nn in 0..n {
            if f.get(nn as i64).bit(0) {
                g.set(nn, tt, true)?;
            }
        }
        f = crate::chipfield::liar_step(&f);
    }
    Ok(g)
}

/// Mismatching cells `(n, t)` between `g` and the realized parities of `f0`.
pub fn parity_mismatches(g: &ParityGrid, f0: &ChipConfiguration) -> Result<Vec<(usize, usize)>> {
    let r = realized_grid(f0, g.n, g.t)?;
    let mut out = Vec::new();
    for t in 0..g.t {
        for n in 0..g.n {
            if g.get(n, t) != r.get(n, t) {
                out.push((n, t));
            }
        }
    }
    Ok(out)
}

/// One line per mismatch, for the CLI.
pub fn mismatch_report(cells: &[(usize, usize)]) -> String {
    let mut s = String::new();
    for (n, t) in cells {
        let _ = writeln!(s, "{n},{t}");
    }
    s
}
