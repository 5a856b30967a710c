//! The pathological liar game on counts: state vectors, Paul's questions,
//! Carole's answers, position vectors with their majorization order, an
//! exhaustive solver, and the reduction to the liar machine.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::chipfield::{self, ChipConfiguration};
use crate::error::{input, Error, Result};

/// `x[i]` = number of elements carrying `i` lies; `e = x.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct StateVector(Vec<BigUint>);

impl StateVector {
    pub fn new(x: Vec<BigUint>) -> Result<Self> {
        if x.is_empty() {
            return input("a state vector needs at least one entry");
        }
        Ok(StateVector(x))
    }

    pub fn from_u64(x: &[u64]) -> Result<Self> {
        Self::new(x.iter().map(|&v| BigUint::from(v)).collect())
    }

    /// `(M, 0, ..., 0)` with `e` lies allowed.
    pub fn initial(m: BigUint, e: usize) -> Self {
        let mut x = vec![BigUint::zero(); e + 1];
        x[0] = m;
        StateVector(x)
    }

    pub fn max_lies(&self) -> usize {
        self.0.len() - 1
    }

    pub fn entries(&self) -> &[BigUint] {
        &self.0
    }

    pub fn total(&self) -> BigUint {
        self.0.iter().sum()
    }

    /// Parses `(1,11)`, `[1, 11]`, or `1,11`.
    pub fn parse(s: &str) -> Result<Self> {
        let inner = s.trim().trim_start_matches(['(', '[']).trim_end_matches([')', ']']);
        let x = inner
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<BigUint>()
                    .map_err(|_| Error::Input(format!("bad state entry {v:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(x)
    }

    fn to_small(&self) -> Result<Vec<u64>> {
        self.0
            .iter()
            .map(|v| v.to_u64().ok_or_else(|| Error::Resource("state entry too large for exhaustive search".into())))
            .collect()
    }
}

impl fmt::Display for StateVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// `a[i]` = number of elements with `i` lies placed in the "yes" class.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuestionVector(Vec<BigUint>);

impl QuestionVector {
    pub fn new(a: Vec<BigUint>) -> Self {
        QuestionVector(a)
    }

    pub fn from_u64(a: &[u64]) -> Self {
        QuestionVector(a.iter().map(|&v| BigUint::from(v)).collect())
    }

    pub fn entries(&self) -> &[BigUint] {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Answer {
    Yes,
    No,
}

impl fmt::Display for Answer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Answer::Yes => "yes",
            Answer::No => "no",
        })
    }
}

impl std::str::FromStr for Answer {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "y" | "yes" => Ok(Answer::Yes),
            "n" | "no" => Ok(Answer::No),
            _ => input(format!("expected yes or no, got {s:?}")),
        }
    }
}

/// Shift right by one coordinate; the last entry is disqualified.
fn shift_right(v: &[BigUint]) -> impl Iterator<Item = BigUint> + '_ {
    std::iter::once(BigUint::zero()).chain(v[..v.len() - 1].iter().cloned())
}

/// `yes: a + R(x - a)`, `no: (x - a) + R(a)`.
pub fn apply_question(x: &StateVector, a: &QuestionVector, answer: Answer) -> Result<StateVector> {
    if a.0.len() != x.0.len() {
        return input(format!("question has {} entries, state has {}", a.0.len(), x.0.len()));
    }
    if let Some(i) = (0..x.0.len()).find(|&i| a.0[i] > x.0[i]) {
        return input(format!("question entry {i} exceeds the state"));
    }
    let rest: Vec<BigUint> = x.0.iter().zip(&a.0).map(|(x, a)| x - a).collect();
    let (stay, moved) = match answer {
        Answer::Yes => (&a.0, &rest),
        Answer::No => (&rest, &a.0),
    };
    Ok(StateVector(stay.iter().zip(shift_right(moved)).map(|(s, m)| s + m).collect()))
}

/// Paul's alternating question: elements at even 1-based positions of the
/// position vector go to the "yes" class.
pub fn alternating_question(x: &StateVector) -> QuestionVector {
    let mut before = BigUint::zero();
    let mut a = Vec::with_capacity(x.0.len());
    for v in &x.0 {
        let half = v >> 1u32;
        a.push(if before.is_even() || v.is_even() { half } else { half + 1u32 });
        before += v;
    }
    QuestionVector(a)
}

/// Carole always answers so that the odd-positioned elements take a lie.
/// Returns `x0, x1, ..., xn`.
pub fn odd_strategy_run(x0: &StateVector, n: u64) -> Vec<StateVector> {
    let mut out = vec![x0.clone()];
    for _ in 0..n {
        let x = out.last().unwrap();
        let next = apply_question(x, &alternating_question(x), Answer::Yes).expect("alternating question fits the state");
        out.push(next);
    }
    out
}

/// Sorted lie counts, one entry per element.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PositionVector(Vec<i64>);

/// Longest position vector [`position_of`] will build.
pub const MAX_POSITION_LEN: u64 = 1 << 24;

impl PositionVector {
    pub fn new(u: Vec<i64>) -> Result<Self> {
        if u.windows(2).any(|w| w[0] > w[1]) {
            return input("position vectors must be nondecreasing");
        }
        Ok(PositionVector(u))
    }

    pub fn entries(&self) -> &[i64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The vector with `v` prepended; `v` must not exceed the first entry.
    pub fn prepend(&self, v: i64) -> Result<Self> {
        let mut u = vec![v];
        u.extend_from_slice(&self.0);
        Self::new(u)
    }
}

impl fmt::Display for PositionVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// `u(j) = min{k : x(0) + ... + x(k) >= j}`.
pub fn position_of(x: &StateVector) -> Result<PositionVector> {
    let m = x.total();
    if m > BigUint::from(MAX_POSITION_LEN) {
        return Err(Error::Resource(format!("{m} elements is too many for a position vector")));
    }
    let mut u = Vec::new();
    for (i, v) in x.0.iter().enumerate() {
        u.extend(std::iter::repeat_n(i as i64, v.to_usize().unwrap_or(0)));
    }
    Ok(PositionVector(u))
}

/// Histogram of entries `0..=e`; larger entries are disqualified and dropped.
pub fn state_of(u: &PositionVector, e: usize) -> Result<StateVector> {
    let mut x = vec![0u64; e + 1];
    for &v in &u.0 {
        if v < 0 {
            return input(format!("position entry {v} is negative"));
        }
        if (v as u64) <= e as u64 {
            x[v as usize] += 1;
        }
    }
    StateVector::from_u64(&x)
}

fn bump(u: &PositionVector, first: usize) -> PositionVector {
    let mut v = u.0.clone();
    for j in (first..v.len()).step_by(2) {
        v[j] += 1;
    }
    v.sort_unstable();
    PositionVector(v)
}

/// One more lie on the elements at odd 1-based positions, re-sorted.
pub fn odd_pos(u: &PositionVector) -> PositionVector {
    bump(u, 0)
}

/// One more lie on the elements at even 1-based positions, re-sorted.
pub fn even_pos(u: &PositionVector) -> PositionVector {
    bump(u, 1)
}

/// Prefix-sum domination: every prefix sum of `u` is at most that of `v`.
pub fn leq(u: &PositionVector, v: &PositionVector) -> Result<bool> {
    if u.len() != v.len() {
        return input(format!("cannot compare lengths {} and {}", u.len(), v.len()));
    }
    let (mut su, mut sv) = (0i64, 0i64);
    for (a, b) in u.0.iter().zip(&v.0) {
        su += a;
        sv += b;
        if su > sv {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One step toward `v`: first match the total by raising the last entry,
/// then move a unit from the first excess after the last deficit.
pub fn majorize_step(u: &PositionVector, v: &PositionVector) -> Result<PositionVector> {
    if !leq(u, v)? || u == v {
        return input("majorize_step needs u <= v and u != v");
    }
    let (su, sv): (i64, i64) = (u.0.iter().sum(), v.0.iter().sum());
    let mut w = u.0.clone();
    if su < sv {
        *w.last_mut().unwrap() += sv - su;
        return Ok(PositionVector(w));
    }
    let j = (0..w.len())
        .rev()
        .find(|&j| u.0[j] < v.0[j])
        .ok_or_else(|| Error::Invariant("no deficit entry".into()))?;
    let k = (j + 1..w.len())
        .find(|&k| u.0[k] > v.0[k])
        .ok_or_else(|| Error::Invariant("no excess entry".into()))?;
    w[j] += 1;
    w[k] -= 1;
    Ok(PositionVector(w))
}

/// `u = u_0 < u_1 < ... < u_t = v` by repeated [`majorize_step`].
pub fn majorize_chain(u: &PositionVector, v: &PositionVector) -> Result<Vec<PositionVector>> {
    if !leq(u, v)? {
        return input("majorize_chain needs u <= v");
    }
    let mut chain = vec![u.clone()];
    while chain.last().unwrap() != v {
        let next = majorize_step(chain.last().unwrap(), v)?;
        chain.push(next);
    }
    Ok(chain)
}

/// Largest `n` for [`verify_carole_dominance`].
pub const MAX_DOMINANCE_ROUNDS: u64 = 22;

/// Checks that answering ODD every round dominates every other answer
/// sequence against the alternating question.
pub fn verify_carole_dominance(x0: &StateVector, n: u64) -> Result<bool> {
    if n > MAX_DOMINANCE_ROUNDS {
        return Err(Error::Resource(format!("2^{n} leaves exceed the enumeration cap")));
    }
    let u0 = position_of(x0)?;
    let mut top = u0.clone();
    for _ in 0..n {
        top = odd_pos(&top);
    }
    let mut level = vec![u0];
    for _ in 0..n {
        level = level.iter().flat_map(|u| [odd_pos(u), even_pos(u)]).collect();
    }
    for leaf in &level {
        if !leq(leaf, &top)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverCaps {
    /// Positions evaluated before giving up.
    pub max_nodes: u64,
    /// Largest number of questions `prod (x(i) + 1)` at one position.
    pub max_questions: u64,
}

impl Default for SolverCaps {
    fn default() -> Self {
        SolverCaps {
            max_nodes: 1_000_000,
            max_questions: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSolution {
    pub paul_wins: bool,
    pub first_question: Option<QuestionVector>,
    pub nodes_expanded: u64,
}

struct Solver {
    caps: SolverCaps,
    memo: HashMap<(Vec<u64>, u64), bool>,
    nodes: u64,
}

fn yes_no(x: &[u64], a: &[u64]) -> (Vec<u64>, Vec<u64>) {
    let e = x.len();
    let mut y = vec![0u64; e];
    let mut n = vec![0u64; e];
    for i in 0..e {
        y[i] += a[i];
        n[i] += x[i] - a[i];
        if i + 1 < e {
            y[i + 1] += x[i] - a[i];
            n[i + 1] += a[i];
        }
    }
    (y, n)
}

/// Calls `f` on each question `a <= x` with `a >=lex x - a`, in lex order,
/// until it returns true.
fn each_question(x: &[u64], mut f: impl FnMut(&[u64]) -> Result<bool>) -> Result<Option<Vec<u64>>> {
    let mut a = vec![0u64; x.len()];
    loop {
        let canonical = a
            .iter()
            .zip(x)
            .map(|(&a, &x)| a.cmp(&(x - a)))
            .find(|o| o.is_ne())
            .is_none_or(|o| o.is_gt());
        if canonical && f(&a)? {
            return Ok(Some(a));
        }
        let mut i = x.len();
        loop {
            if i == 0 {
                return Ok(None);
            }
            i -= 1;
            if a[i] < x[i] {
                a[i] += 1;
                a[i + 1..].iter_mut().for_each(|v| *v = 0);
                break;
            }
        }
    }
}

impl Solver {
    fn wins(&mut self, x: &[u64], rounds: u64) -> Result<bool> {
        if x.iter().all(|&v| v == 0) {
            return Ok(false);
        }
        if rounds == 0 {
            return Ok(true);
        }
        let key = (x.to_vec(), rounds);
        if let Some(&w) = self.memo.get(&key) {
            return Ok(w);
        }
        self.nodes += 1;
        if self.nodes > self.caps.max_nodes {
            return Err(Error::Resource(format!("solver exceeded {} nodes", self.caps.max_nodes)));
        }
        let questions = x.iter().try_fold(1u64, |acc, &v| acc.checked_mul(v + 1));
        if questions.is_none_or(|q| q > self.caps.max_questions) {
            return Err(Error::Resource("too many questions at one position".into()));
        }
        let w = each_question(x, |a| {
            let (y, n) = yes_no(x, a);
            Ok(self.wins(&y, rounds - 1)? && self.wins(&n, rounds - 1)?)
        })?
        .is_some();
        self.memo.insert(key, w);
        Ok(w)
    }
}

/// Exact minimax value of the `n`-round game from `x0`, with the first
/// winning question in lex order among `a >=lex x0 - a`.
pub fn solve_game(x0: &StateVector, n: u64, caps: SolverCaps) -> Result<GameSolution> {
    let x = x0.to_small()?;
    let mut s = Solver {
        caps,
        memo: HashMap::new(),
        nodes: 0,
    };
    if !s.wins(&x, n)? {
        return Ok(GameSolution {
            paul_wins: false,
            first_question: None,
            nodes_expanded: s.nodes,
        });
    }
    let first = if n == 0 {
        None
    } else {
        each_question(&x, |a| {
            let (y, no) = yes_no(&x, a);
            Ok(s.wins(&y, n - 1)? && s.wins(&no, n - 1)?)
        })?
        .map(|a| QuestionVector::from_u64(&a))
    };
    Ok(GameSolution {
        paul_wins: true,
        first_question: first,
        nodes_expanded: s.nodes,
    })
}

/// The reduction: `f0(2i) = x0(i)`.
pub fn machine_config(x0: &StateVector) -> Result<ChipConfiguration> {
    ChipConfiguration::from_pairs(x0.0.iter().enumerate().map(|(i, v)| (2 * i as i64, v.clone())))
}

/// `x_s(i) = f_s(-s + 2i)` for `s = 0..=n`, read off the liar machine.
pub fn machine_states(x0: &StateVector, n: u64) -> Result<Vec<StateVector>> {
    let e = x0.max_lies();
    let mut f = machine_config(x0)?;
    let mut out = Vec::with_capacity(n as usize + 1);
    for s in 0..=n {
        if s > 0 {
            f = chipfield::liar_step(&f);
        }
        let x = (0..=e).map(|i| f.get(-(s as i64) + 2 * i as i64)).collect();
        out.push(StateVector(x));
    }
    Ok(out)
}

/// `sum_{i=lo}^{hi} f_n(-n + 2i)` after `n` steps from `x0`.
pub fn machine_window_sum(x0: &StateVector, n: u64, lo: u64, hi: u64, max_window: usize) -> Result<BigUint> {
    let f = chipfield::liar_run_fast(&machine_config(x0)?, n, max_window)?;
    let ni = n as i64;
    Ok((lo..=hi).map(|i| f.get(-ni + 2 * i as i64)).sum())
}

/// Whether the machine started from `x0` keeps a chip within `e` lies after `n` steps.
pub fn machine_win_check_state(x0: &StateVector, n: u64, max_window: usize) -> Result<bool> {
    let s = machine_window_sum(x0, n, 0, x0.max_lies() as u64, max_window)?;
    Ok(s >= BigUint::one())
}

/// [`machine_win_check_state`] from `M` chips at the origin.
pub fn machine_win_check(m: &BigUint, n: u64, e: usize, max_window: usize) -> Result<bool> {
    machine_win_check_state(&StateVector::initial(m.clone(), e), n, max_window)
}
