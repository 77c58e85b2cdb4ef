//! Piecewise path environments: n cadlag lines made of nonnegative atoms and
//! linear segments on a finite horizon, with line 1 drawn on top.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("negative jump {mass} at time {time} on line {line}")]
    NegativeJump { line: usize, time: Rational, mass: Rational },
    #[error("segments on line {line} overlap or are reversed")]
    UnsortedBreakpoints { line: usize },
    #[error("time {time} lies outside the horizon [0, {horizon}]")]
    HorizonMismatch { time: Rational, horizon: Rational },
    #[error("time {time} lies outside the horizon [0, {horizon}]")]
    OutOfHorizon { time: Rational, horizon: Rational },
    #[error("expected {expected} lines, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("line {line} is not in 1..={n}")]
    LineOutOfRange { line: usize, n: usize },
    #[error("horizon must be positive, got {0}")]
    NonPositiveHorizon(Rational),
    #[error("an environment needs at least one line")]
    NoLines,
}

/// A single cadlag line on `[0, horizon]`.
///
/// Stored in normal form: breakpoints always include `0` and the horizon, and
/// an interior breakpoint survives only if it carries an atom or the slope
/// changes there. Two lines are equal iff they describe the same function.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PathLine {
    breakpoints: Vec<Rational>,
    jumps: Vec<Rational>,
    slopes: Vec<Rational>,
    values: Vec<Rational>,
}

impl PathLine {
    pub fn flat(horizon: Rational) -> Self {
        Self::from_parts(
            vec![Rational::zero(), horizon],
            vec![Rational::zero(), Rational::zero()],
            vec![Rational::zero()],
        )
    }

    /// Builds a line from atoms `(time, mass)` and segments `(t0, t1, slope)`.
    /// Repeated atom times add up; uncovered time carries slope zero.
    pub fn new(
        horizon: &Rational,
        jumps: &[(Rational, Rational)],
        segments: &[(Rational, Rational, Rational)],
    ) -> Result<Self, EnvError> {
        Self::build(0, horizon, jumps, segments)
    }

    fn build(
        line: usize,
        horizon: &Rational,
        jumps: &[(Rational, Rational)],
        segments: &[(Rational, Rational, Rational)],
    ) -> Result<Self, EnvError> {
        if !horizon.is_positive() {
            return Err(EnvError::NonPositiveHorizon(horizon.clone()));
        }
        let inside = |t: &Rational| -> Result<(), EnvError> {
            if t.is_negative() || t > horizon {
                Err(EnvError::HorizonMismatch { time: t.clone(), horizon: horizon.clone() })
            } else {
                Ok(())
            }
        };
        let mut atoms: BTreeMap<Rational, Rational> = BTreeMap::new();
        for (time, mass) in jumps {
            inside(time)?;
            if mass.is_negative() {
                return Err(EnvError::NegativeJump { line, time: time.clone(), mass: mass.clone() });
            }
            *atoms.entry(time.clone()).or_default() += mass;
        }
        let mut segs: Vec<&(Rational, Rational, Rational)> = segments.iter().collect();
        segs.sort_by(|a, b| a.0.cmp(&b.0));
        for s in &segs {
            inside(&s.0)?;
            inside(&s.1)?;
            if s.0 >= s.1 {
                return Err(EnvError::UnsortedBreakpoints { line });
            }
        }
        if segs.windows(2).any(|w| w[0].1 > w[1].0) {
            return Err(EnvError::UnsortedBreakpoints { line });
        }

        let mut points: Vec<Rational> = vec![Rational::zero(), horizon.clone()];
        points.extend(atoms.keys().cloned());
        for s in &segs {
            points.push(s.0.clone());
            points.push(s.1.clone());
        }
        points.sort();
        points.dedup();
        let jumps = points.iter().map(|t| atoms.get(t).cloned().unwrap_or_default()).collect();
        let mut slopes = Vec::with_capacity(points.len() - 1);
        let mut seg_iter = segs.iter().peekable();
        for w in points.windows(2) {
            while seg_iter.peek().is_some_and(|s| s.1 <= w[0]) {
                seg_iter.next();
            }
            let slope = match seg_iter.peek() {
                Some(s) if s.0 <= w[0] && w[1] <= s.1 => s.2.clone(),
                _ => Rational::zero(),
            };
            slopes.push(slope);
        }
        Ok(Self::from_parts(points, jumps, slopes))
    }

    /// Canonicalizes raw parts. Jumps may be of either sign here; callers that
    /// expose the result as a cadlag line are responsible for positivity.
    pub(crate) fn from_parts(
        breakpoints: Vec<Rational>,
        jumps: Vec<Rational>,
        slopes: Vec<Rational>,
    ) -> Self {
        debug_assert_eq!(breakpoints.len(), jumps.len());
        debug_assert_eq!(breakpoints.len(), slopes.len() + 1);
        let last = breakpoints.len() - 1;
        let mut bp = Vec::with_capacity(breakpoints.len());
        let mut jp: Vec<Rational> = Vec::with_capacity(breakpoints.len());
        let mut sl: Vec<Rational> = Vec::with_capacity(slopes.len());
        for (idx, (b, j)) in breakpoints.into_iter().zip(jumps).enumerate() {
            let keep = idx == 0
                || idx == last
                || !j.is_zero()
                || sl.last() != Some(&slopes[idx]);
            if keep {
                bp.push(b);
                jp.push(j);
                if idx < last {
                    sl.push(slopes[idx].clone());
                }
            }
        }
        let mut values = Vec::with_capacity(bp.len());
        let mut acc = Rational::zero();
        for k in 0..bp.len() {
            if k > 0 {
                acc += &sl[k - 1] * &(&bp[k] - &bp[k - 1]);
            }
            acc += &jp[k];
            values.push(acc.clone());
        }
        PathLine { breakpoints: bp, jumps: jp, slopes: sl, values }
    }

    pub fn horizon(&self) -> &Rational {
        self.breakpoints.last().expect("nonempty breakpoints")
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    /// Atom masses aligned with [`breakpoints`](Self::breakpoints).
    pub fn jumps(&self) -> &[Rational] {
        &self.jumps
    }

    /// Slopes on the open pieces between consecutive breakpoints.
    pub fn slopes(&self) -> &[Rational] {
        &self.slopes
    }

    /// Nonzero atoms as `(time, mass)`.
    pub fn atoms(&self) -> impl Iterator<Item = (&Rational, &Rational)> {
        self.breakpoints.iter().zip(&self.jumps).filter(|(_, m)| !m.is_zero())
    }

    /// Nonzero-slope pieces as `(t0, t1, slope)`.
    pub fn segments(&self) -> impl Iterator<Item = (&Rational, &Rational, &Rational)> {
        self.breakpoints
            .windows(2)
            .zip(&self.slopes)
            .filter(|(_, s)| !s.is_zero())
            .map(|(w, s)| (&w[0], &w[1], s))
    }

    /// Index of the last breakpoint `<= t`; `t` must lie in `[0, horizon]`.
    fn locate(&self, t: &Rational) -> usize {
        self.breakpoints.partition_point(|b| b <= t) - 1
    }

    /// `f(t)` for `t` in `[0, horizon]`.
    pub fn value(&self, t: &Rational) -> Rational {
        let k = self.locate(t);
        if &self.breakpoints[k] == t {
            self.values[k].clone()
        } else {
            &self.values[k] + &self.slopes[k] * &(t - &self.breakpoints[k])
        }
    }

    /// `f(t^-)`, with `f(0^-) = 0`.
    pub fn left_limit(&self, t: &Rational) -> Rational {
        let k = self.locate(t);
        if &self.breakpoints[k] == t {
            &self.values[k] - &self.jumps[k]
        } else {
            &self.values[k] + &self.slopes[k] * &(t - &self.breakpoints[k])
        }
    }

    /// Atom mass at `t` (zero off the breakpoints).
    pub fn jump_at(&self, t: &Rational) -> Rational {
        let k = self.locate(t);
        if &self.breakpoints[k] == t {
            self.jumps[k].clone()
        } else {
            Rational::zero()
        }
    }

    /// Slope on the piece containing `(t, t + ε)`; for `t = horizon` the last piece.
    pub fn slope_after(&self, t: &Rational) -> Rational {
        let k = self.locate(t).min(self.slopes.len() - 1);
        self.slopes[k].clone()
    }

    pub fn has_atoms(&self) -> bool {
        self.jumps.iter().any(|j| !j.is_zero())
    }

    pub fn has_slopes(&self) -> bool {
        self.slopes.iter().any(|s| !s.is_zero())
    }

    /// Restriction to `[0, s]` for `0 < s <= horizon`.
    pub fn restrict(&self, s: &Rational) -> Self {
        let k = self.locate(s);
        let mut bp = self.breakpoints[..=k].to_vec();
        let mut jp = self.jumps[..=k].to_vec();
        let mut sl = self.slopes[..k].to_vec();
        if &bp[k] != s {
            sl.push(self.slopes[k].clone());
            bp.push(s.clone());
            jp.push(Rational::zero());
        }
        Self::from_parts(bp, jp, sl)
    }

    /// Breakpoint-wise linear combination of two lines on the same horizon.
    pub(crate) fn combine(&self, other: &Self, a: &Rational, b: &Rational) -> Self {
        debug_assert_eq!(self.horizon(), other.horizon());
        let grid = merge_sorted(&self.breakpoints, &other.breakpoints);
        let jumps = grid
            .iter()
            .map(|t| a * &self.jump_at(t) + b * &other.jump_at(t))
            .collect();
        let slopes = grid
            .windows(2)
            .map(|w| a * &self.slope_after(&w[0]) + b * &other.slope_after(&w[0]))
            .collect();
        Self::from_parts(grid, jumps, slopes)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, &Rational::one(), &Rational::one())
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, &Rational::one(), &Rational::integer(-1))
    }

    /// Time reversal of the increments on `[0, horizon]`: an atom at `s`
    /// moves to `horizon - s`.
    pub fn reversed(&self) -> Self {
        let h = self.horizon().clone();
        let bp = self.breakpoints.iter().rev().map(|b| &h - b).collect();
        let jp = self.jumps.iter().rev().cloned().collect();
        let sl = self.slopes.iter().rev().cloned().collect();
        Self::from_parts(bp, jp, sl)
    }

    /// This line followed by `tail`'s increments; `tail`'s atom at its time 0
    /// lands on the junction.
    pub fn concat(&self, tail: &Self) -> Self {
        let h = self.horizon().clone();
        let k = self.breakpoints.len() - 1;
        let mut bp = self.breakpoints.clone();
        let mut jp = self.jumps.clone();
        let mut sl = self.slopes.clone();
        jp[k] += &tail.jumps[0];
        bp.extend(tail.breakpoints[1..].iter().map(|b| b + &h));
        jp.extend(tail.jumps[1..].iter().cloned());
        sl.extend(tail.slopes.iter().cloned());
        Self::from_parts(bp, jp, sl)
    }

    /// Smallest atom mass, if any atom is present.
    pub(crate) fn min_jump(&self) -> Option<&Rational> {
        self.jumps.iter().min()
    }
}

impl fmt::Debug for PathLine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PathLine{{")?;
        for (k, b) in self.breakpoints.iter().enumerate() {
            if !self.jumps[k].is_zero() {
                write!(f, " +{:?}@{:?}", self.jumps[k], b)?;
            }
            if k < self.slopes.len() && !self.slopes[k].is_zero() {
                write!(f, " {:?}/[{:?},{:?}]", self.slopes[k], b, self.breakpoints[k + 1])?;
            }
        }
        write!(f, " h={:?} }}", self.horizon())
    }
}

/// Union of two sorted, duplicate-free lists.
pub(crate) fn merge_sorted(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        let next = match (a.get(i), b.get(j)) {
            (Some(x), Some(y)) if x == y => {
                i += 1;
                j += 1;
                x
            }
            (Some(x), Some(y)) if x < y => {
                i += 1;
                x
            }
            (Some(x), None) => {
                i += 1;
                x
            }
            (_, Some(y)) => {
                j += 1;
                y
            }
            (None, None) => unreachable!(),
        };
        out.push(next.clone());
    }
    out
}

/// Whether an endpoint includes the atoms on its vertical line (`Closed`) or
/// excludes them (`Open`, the `p⁺` / `q⁻` variants).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Side {
    #[default]
    Closed,
    Open,
}

/// A point `(time, line)` of the base space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridPoint {
    pub time: Rational,
    pub line: usize,
    pub side: Side,
}

impl GridPoint {
    pub fn new(time: Rational, line: usize) -> Self {
        GridPoint { time, line, side: Side::Closed }
    }

    pub fn open(time: Rational, line: usize) -> Self {
        GridPoint { time, line, side: Side::Open }
    }
}

/// Input description of one line for [`PathEnv::new`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LineSpec {
    pub jumps: Vec<(Rational, Rational)>,
    pub segments: Vec<(Rational, Rational, Rational)>,
}

/// The restriction classes of the finite RSK bijection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EnvClass {
    Continuous,
    UnitJumps,
    RealJumpsIntegerTimes,
    IntegerJumpsIntegerTimes,
    BernoulliPaths,
}

impl EnvClass {
    pub const ALL: [EnvClass; 5] = [
        EnvClass::Continuous,
        EnvClass::UnitJumps,
        EnvClass::RealJumpsIntegerTimes,
        EnvClass::IntegerJumpsIntegerTimes,
        EnvClass::BernoulliPaths,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvClass::Continuous => "continuous",
            EnvClass::UnitJumps => "unit-jumps",
            EnvClass::RealJumpsIntegerTimes => "real-jumps-integer-times",
            EnvClass::IntegerJumpsIntegerTimes => "integer-jumps-integer-times",
            EnvClass::BernoulliPaths => "bernoulli",
        }
    }
}

/// An n-line environment on `[0, horizon]`. Lines are addressed 1-based.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PathEnv {
    horizon: Rational,
    lines: Vec<PathLine>,
}

impl PathEnv {
    pub fn new(n: usize, horizon: Rational, specs: &[LineSpec]) -> Result<Self, EnvError> {
        if n == 0 {
            return Err(EnvError::NoLines);
        }
        if specs.len() != n {
            return Err(EnvError::DimensionMismatch { expected: n, found: specs.len() });
        }
        let lines = specs
            .iter()
            .enumerate()
            .map(|(i, s)| PathLine::build(i + 1, &horizon, &s.jumps, &s.segments))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PathEnv { horizon, lines })
    }

    /// Assembles an environment from lines that already share a horizon.
    pub fn from_lines(lines: Vec<PathLine>) -> Result<Self, EnvError> {
        let first = lines.first().ok_or(EnvError::NoLines)?;
        let horizon = first.horizon().clone();
        for (i, l) in lines.iter().enumerate() {
            if l.horizon() != &horizon {
                return Err(EnvError::HorizonMismatch { time: l.horizon().clone(), horizon });
            }
            if let Some(m) = l.min_jump().filter(|m| m.is_negative()) {
                let time = l.breakpoints[l.jumps.iter().position(|j| j == m).unwrap()].clone();
                return Err(EnvError::NegativeJump { line: i + 1, time, mass: m.clone() });
            }
        }
        Ok(PathEnv { horizon, lines })
    }

    pub fn flat(n: usize, horizon: Rational) -> Self {
        PathEnv { lines: vec![PathLine::flat(horizon.clone()); n], horizon }
    }

    pub fn n(&self) -> usize {
        self.lines.len()
    }

    pub fn horizon(&self) -> &Rational {
        &self.horizon
    }

    pub fn lines(&self) -> &[PathLine] {
        &self.lines
    }

    /// Line `i` (1-based).
    pub fn line(&self, i: usize) -> &PathLine {
        &self.lines[i - 1]
    }

    pub fn into_lines(self) -> Vec<PathLine> {
        self.lines
    }

    fn check_line(&self, i: usize) -> Result<(), EnvError> {
        if i == 0 || i > self.n() {
            return Err(EnvError::LineOutOfRange { line: i, n: self.n() });
        }
        Ok(())
    }

    fn check_time(&self, t: &Rational) -> Result<(), EnvError> {
        if t.is_negative() || t > &self.horizon {
            return Err(EnvError::OutOfHorizon { time: t.clone(), horizon: self.horizon.clone() });
        }
        Ok(())
    }

    /// `f_i(t)`, or `f_i(t^-)` when `left_limit` is set.
    pub fn eval(&self, i: usize, t: &Rational, left_limit: bool) -> Result<Rational, EnvError> {
        self.check_line(i)?;
        self.check_time(t)?;
        let line = self.line(i);
        Ok(if left_limit { line.left_limit(t) } else { line.value(t) })
    }

    /// `df([x, y] × {i}) = f_i(y) - f_i(x^-)`.
    pub fn measure(&self, i: usize, x: &Rational, y: &Rational) -> Result<Rational, EnvError> {
        self.check_line(i)?;
        self.check_time(x)?;
        self.check_time(y)?;
        let line = self.line(i);
        Ok(line.value(y) - line.left_limit(x))
    }

    /// Sorted union of every line's breakpoints.
    pub fn grid(&self) -> Vec<Rational> {
        self.lines.iter().fold(Vec::new(), |acc, l| merge_sorted(&acc, l.breakpoints()))
    }

    /// 180° rotation of `[0, t] × {1..n}`; `t` must be the horizon.
    pub fn rotate(&self, t: &Rational) -> Result<Self, EnvError> {
        if t != &self.horizon {
            return Err(EnvError::HorizonMismatch { time: t.clone(), horizon: self.horizon.clone() });
        }
        let lines = self.lines.iter().rev().map(PathLine::reversed).collect();
        Ok(PathEnv { horizon: self.horizon.clone(), lines })
    }

    /// `head ⊕ tail`: the tail's increments glued after the head's horizon.
    pub fn concat(&self, tail: &PathEnv) -> Result<Self, EnvError> {
        if self.n() != tail.n() {
            return Err(EnvError::DimensionMismatch { expected: self.n(), found: tail.n() });
        }
        let lines = self.lines.iter().zip(&tail.lines).map(|(h, t)| h.concat(t)).collect();
        Ok(PathEnv { horizon: &self.horizon + &tail.horizon, lines })
    }

    /// `f ⊕ α`: atoms `α·i` at time `horizon + i` on line `i`.
    pub fn oplus_alpha(&self, alpha: &Rational) -> Self {
        let n = self.n();
        let specs: Vec<LineSpec> = (1..=n)
            .map(|i| LineSpec {
                jumps: vec![(Rational::from(i), alpha * &Rational::from(i))],
                segments: vec![],
            })
            .collect();
        let tail = PathEnv::new(n, Rational::from(n), &specs).expect("valid tail");
        self.concat(&tail).expect("matching dimensions")
    }

    /// Appends `len` units of flat time.
    pub fn extend_flat(&self, len: &Rational) -> Self {
        self.concat(&PathEnv::flat(self.n(), len.clone())).expect("matching dimensions")
    }

    /// Restriction to `[0, s]`, `0 < s <= horizon`.
    pub fn restrict(&self, s: &Rational) -> Result<Self, EnvError> {
        self.check_time(s)?;
        if !s.is_positive() {
            return Err(EnvError::NonPositiveHorizon(s.clone()));
        }
        let lines = self.lines.iter().map(|l| l.restrict(s)).collect();
        Ok(PathEnv { horizon: s.clone(), lines })
    }

    pub fn with_line(&self, i: usize, line: PathLine) -> Self {
        let mut out = self.clone();
        out.lines[i - 1] = line;
        out
    }

    pub fn class_check(&self, class: EnvClass) -> bool {
        let pure_jump = self.lines.iter().all(|l| !l.has_slopes());
        let integer_times = || {
            self.lines.iter().all(|l| l.atoms().all(|(t, _)| t.is_integer()))
        };
        match class {
            EnvClass::Continuous => self.lines.iter().all(|l| !l.has_atoms()),
            EnvClass::UnitJumps => {
                let mut seen = std::collections::HashSet::new();
                pure_jump
                    && self.lines.iter().all(|l| {
                        l.atoms().all(|(t, m)| *m == Rational::one() && seen.insert(t.clone()))
                    })
            }
            EnvClass::RealJumpsIntegerTimes => pure_jump && integer_times(),
            EnvClass::IntegerJumpsIntegerTimes => {
                pure_jump
                    && integer_times()
                    && self.lines.iter().all(|l| l.atoms().all(|(_, m)| m.is_integer()))
            }
            EnvClass::BernoulliPaths => {
                self.horizon.is_integer()
                    && self.lines.iter().all(|l| {
                        !l.has_atoms()
                            && l.breakpoints().iter().all(Rational::is_integer)
                            && l.slopes().iter().all(|s| s.is_zero() || *s == Rational::one())
                    })
            }
        }
    }
}

impl fmt::Debug for PathEnv {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PathEnv")
            .field("horizon", &self.horizon)
            .field("lines", &self.lines)
            .finish()
    }
}
