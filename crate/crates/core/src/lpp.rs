//! Last passage values over path environments.
//!
//! Every supremum is a finite maximum over jump times drawn from the event
//! grid (all breakpoints plus endpoint times): a path length is piecewise
//! linear in each jump time and upper semicontinuous at atoms, so optima sit
//! on grid points. Multi-path values come from a left-to-right sweep whose
//! state is the ordered list of lines the live paths occupy on the current
//! open grid segment.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::env::{merge_sorted, EnvError, GridPoint, PathEnv, PathLine, Side};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LppError {
    #[error("endpoint or jump time out of range: {0}")]
    OutOfRange(String),
    #[error("paths {0} and {1} are not ordered and essentially disjoint")]
    NotDisjoint(usize, usize),
    #[error("no disjoint tuple connects the endpoints")]
    NoPathExists,
    #[error("endpoints are not coordinatewise ordered")]
    BadOrdering,
    #[error("{starts} start points but {ends} end points")]
    DimensionMismatch { starts: usize, ends: usize },
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// A last passage value: `−∞` when no admissible tuple exists.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LppValue {
    NegInf,
    Finite(Rational),
}

impl LppValue {
    pub fn finite(&self) -> Option<&Rational> {
        match self {
            LppValue::Finite(v) => Some(v),
            LppValue::NegInf => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, LppValue::Finite(_))
    }

    /// Sum in the extended reals; `−∞` absorbs.
    pub fn plus(&self, other: &LppValue) -> LppValue {
        match (self, other) {
            (LppValue::Finite(a), LppValue::Finite(b)) => LppValue::Finite(a + b),
            _ => LppValue::NegInf,
        }
    }
}

impl fmt::Display for LppValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LppValue::NegInf => f.write_str("-inf"),
            LppValue::Finite(v) => write!(f, "{v}"),
        }
    }
}

/// Start and end points of a k-tuple, paired by index (path 1 leftmost).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EndpointSpec {
    starts: Vec<GridPoint>,
    ends: Vec<GridPoint>,
}

impl EndpointSpec {
    pub fn new(starts: Vec<GridPoint>, ends: Vec<GridPoint>) -> Result<Self, LppError> {
        if starts.len() != ends.len() {
            return Err(LppError::DimensionMismatch { starts: starts.len(), ends: ends.len() });
        }
        Ok(EndpointSpec { starts, ends })
    }

    pub fn single(start: GridPoint, end: GridPoint) -> Self {
        EndpointSpec { starts: vec![start], ends: vec![end] }
    }

    /// `p^k → q^k`.
    pub fn repeated(start: GridPoint, end: GridPoint, k: usize) -> Self {
        EndpointSpec { starts: vec![start; k], ends: vec![end; k] }
    }

    /// `(x, start_line)^k → (y, end_line)^k` with closed endpoints.
    pub fn points(x: &Rational, start_line: usize, y: &Rational, end_line: usize, k: usize) -> Self {
        Self::repeated(GridPoint::new(x.clone(), start_line), GridPoint::new(y.clone(), end_line), k)
    }

    pub fn k(&self) -> usize {
        self.starts.len()
    }

    pub fn starts(&self) -> &[GridPoint] {
        &self.starts
    }

    pub fn ends(&self) -> &[GridPoint] {
        &self.ends
    }

    fn validate(&self, env: &PathEnv) -> Result<(), LppError> {
        for p in self.starts.iter().chain(&self.ends) {
            if p.line == 0 || p.line > env.n() {
                return Err(LppError::OutOfRange(format!("line {} not in 1..={}", p.line, env.n())));
            }
            if p.time.is_negative() || &p.time > env.horizon() {
                return Err(LppError::OutOfRange(format!(
                    "time {} outside [0, {}]",
                    p.time,
                    env.horizon()
                )));
            }
        }
        Ok(())
    }
}

/// An up-right path from `start` on a lower line to `end` on a higher one.
///
/// `jump_times` lists the times at which the path moves up one line, bottom
/// line first: `x ≤ t_{ℓ-1} ≤ … ≤ t_m ≤ y` for a path from line `ℓ` to `m`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticePath {
    pub start: GridPoint,
    pub end: GridPoint,
    pub jump_times: Vec<Rational>,
}

impl LatticePath {
    /// Closed time interval occupied on `line`, if the path visits it.
    pub fn interval(&self, line: usize) -> Option<(Rational, Rational)> {
        let (top, bottom) = (self.end.line, self.start.line);
        if line < top || line > bottom {
            return None;
        }
        let lower = if line == bottom {
            self.start.time.clone()
        } else {
            self.jump_times[bottom - 1 - line].clone()
        };
        let upper = if line == top {
            self.end.time.clone()
        } else {
            self.jump_times[bottom - line].clone()
        };
        Some((lower, upper))
    }

    fn lines(&self) -> std::ops::RangeInclusive<usize> {
        self.end.line..=self.start.line
    }

    fn validate(&self, env: &PathEnv) -> Result<(), LppError> {
        let spec = EndpointSpec::single(self.start.clone(), self.end.clone());
        spec.validate(env)?;
        if self.start.line < self.end.line || self.start.time > self.end.time {
            return Err(LppError::OutOfRange("start is not below-left of end".into()));
        }
        if self.jump_times.len() != self.start.line - self.end.line {
            return Err(LppError::OutOfRange(format!(
                "expected {} jump times, got {}",
                self.start.line - self.end.line,
                self.jump_times.len()
            )));
        }
        let mut prev = &self.start.time;
        for t in self.jump_times.iter().chain(std::iter::once(&self.end.time)) {
            if t < prev {
                return Err(LppError::OutOfRange("jump times are not monotone".into()));
            }
            prev = t;
        }
        Ok(())
    }

    /// Points removed from the vertical lines at open endpoints.
    fn removed(&self) -> Vec<&Rational> {
        let mut out = Vec::new();
        if self.start.side == Side::Open {
            out.push(&self.start.time);
        }
        if self.end.side == Side::Open && !out.contains(&&self.end.time) {
            out.push(&self.end.time);
        }
        out
    }
}

/// An ordered, essentially disjoint k-tuple of paths.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DisjointTuple {
    pub paths: Vec<LatticePath>,
}

impl DisjointTuple {
    pub fn k(&self) -> usize {
        self.paths.len()
    }

    /// All jump times concatenated, path 1 first.
    pub fn jump_vector(&self) -> Vec<Rational> {
        self.paths.iter().flat_map(|p| p.jump_times.iter().cloned()).collect()
    }

    /// Checks that path `i` lies to the left of path `j` for `i < j` and that
    /// interval interiors on each line are disjoint.
    pub fn validate(&self, env: &PathEnv) -> Result<(), LppError> {
        for p in &self.paths {
            p.validate(env)?;
        }
        for (i, a) in self.paths.iter().enumerate() {
            for (j, b) in self.paths.iter().enumerate().skip(i + 1) {
                for la in a.lines() {
                    let (a0, a1) = a.interval(la).expect("line in range");
                    for lb in b.lines() {
                        let (b0, b1) = b.interval(lb).expect("line in range");
                        let left_of = la <= lb || a1 <= b0;
                        let disjoint = la != lb || a1.clone().min(b1.clone()) <= a0.clone().max(b0);
                        if !left_of || !disjoint {
                            return Err(LppError::NotDisjoint(i + 1, j + 1));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// `|π|_f`, the df-mass of a single path.
pub fn path_length(env: &PathEnv, path: &LatticePath) -> Result<Rational, LppError> {
    path.validate(env)?;
    let removed = path.removed();
    let mut total = Rational::zero();
    for line in path.lines() {
        let (a, b) = path.interval(line).expect("line in range");
        let f = env.line(line);
        total += f.value(&b) - f.left_limit(&a);
        for t in &removed {
            if &a <= *t && *t <= &b {
                total -= f.jump_at(t);
            }
        }
    }
    Ok(total)
}

/// `df(∪π)`: the mass of the union, shared points counted once.
pub fn tuple_length(env: &PathEnv, tuple: &DisjointTuple) -> Result<Rational, LppError> {
    tuple.validate(env)?;
    let mut total = Rational::zero();
    for line in 1..=env.n() {
        let pieces: Vec<(Rational, Rational, Vec<&Rational>)> = tuple
            .paths
            .iter()
            .filter_map(|p| p.interval(line).map(|(a, b)| (a, b, p.removed())))
            .collect();
        if pieces.is_empty() {
            continue;
        }
        let mut cuts: Vec<Rational> = pieces.iter().flat_map(|(a, b, _)| [a.clone(), b.clone()]).collect();
        cuts.sort();
        cuts.dedup();
        let f = env.line(line);
        for (idx, c) in cuts.iter().enumerate() {
            let point_covered = pieces
                .iter()
                .any(|(a, b, removed)| a <= c && c <= b && !removed.contains(&c));
            if point_covered {
                total += f.jump_at(c);
            }
            if let Some(next) = cuts.get(idx + 1) {
                if pieces.iter().any(|(a, b, _)| a <= c && next <= b) {
                    total += f.left_limit(next) - f.value(c);
                }
            }
        }
    }
    Ok(total)
}

/// Leftmost optimizers minimize jump times; rightmost ones maximize them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OptimizerSide {
    Leftmost,
    Rightmost,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Value,
    Extreme(OptimizerSide),
}

/// Atoms and slopes of every line sampled on an event grid.
pub(crate) struct Columns {
    pub times: Vec<Rational>,
    /// `atoms[line - 1][c]`: atom at `times[c]`.
    pub atoms: Vec<Vec<Rational>>,
    /// `slopes[line - 1][c]`: slope on `(times[c], times[c + 1])`.
    pub slopes: Vec<Vec<Rational>>,
    /// `mass[line - 1][c]`: df-mass of the open segment after `times[c]`.
    pub mass: Vec<Vec<Rational>>,
}

impl Columns {
    pub fn new<'a>(env: &PathEnv, extra: impl IntoIterator<Item = &'a Rational>) -> Self {
        let mut extra: Vec<Rational> = extra.into_iter().cloned().collect();
        extra.sort();
        extra.dedup();
        let times = merge_sorted(&env.grid(), &extra);
        Self::on_times(env, times)
    }

    fn on_times(env: &PathEnv, times: Vec<Rational>) -> Self {
        let lines = env.lines();
        let atoms = lines.iter().map(|l| times.iter().map(|t| l.jump_at(t)).collect()).collect();
        let slopes: Vec<Vec<Rational>> = lines
            .iter()
            .map(|l| times.windows(2).map(|w| l.slope_after(&w[0])).collect())
            .collect();
        let mass = slopes
            .iter()
            .map(|row| {
                row.iter().zip(times.windows(2)).map(|(s, w)| s * &(&w[1] - &w[0])).collect()
            })
            .collect();
        Columns { times, atoms, slopes, mass }
    }

    fn col(&self, t: &Rational) -> usize {
        self.times.binary_search(t).expect("endpoint on grid")
    }
}

#[derive(Clone)]
struct PathIdx {
    start_col: usize,
    start_line: u8,
    end_col: usize,
    end_line: u8,
    open_start: bool,
    open_end: bool,
}

type Score = (Rational, Rational);

/// One sweep layer: states (lines of the live paths, in path order) with
/// their best scores and, when tracing, the step that produced them.
#[derive(Default)]
struct Layer {
    states: Vec<Vec<u8>>,
    scores: Vec<Score>,
    steps: Vec<(usize, Vec<u8>)>,
    index: HashMap<Vec<u8>, usize>,
}

impl Layer {
    fn offer(&mut self, state: Vec<u8>, score: Score, step: Option<(usize, Vec<u8>)>) {
        match self.index.get(&state) {
            Some(&i) => {
                if score > self.scores[i] {
                    self.scores[i] = score;
                    if let Some(s) = step {
                        self.steps[i] = s;
                    }
                }
            }
            None => {
                self.index.insert(state.clone(), self.states.len());
                self.states.push(state);
                self.scores.push(score);
                if let Some(s) = step {
                    self.steps.push(s);
                }
            }
        }
    }
}

struct Sweep<'a> {
    cols: &'a Columns,
    paths: &'a [PathIdx],
    mode: Mode,
}

impl Sweep<'_> {
    fn present_on_segment(&self, c: usize) -> Vec<usize> {
        (0..self.paths.len())
            .filter(|&j| self.paths[j].start_col <= c && self.paths[j].end_col > c)
            .collect()
    }

    fn active(&self, c: usize) -> Vec<usize> {
        (0..self.paths.len())
            .filter(|&j| self.paths[j].start_col <= c && c <= self.paths[j].end_col)
            .collect()
    }

    /// Line each active path holds as it reaches column `c`.
    fn entries(&self, active: &[usize], before: &[usize], state: &[u8]) -> Vec<u8> {
        active
            .iter()
            .map(|&j| match before.iter().position(|&b| b == j) {
                Some(pos) => state[pos],
                None => self.paths[j].start_line,
            })
            .collect()
    }

    /// Enumerates admissible exit lines at column `c` for the active paths.
    fn for_each_exit(
        &self,
        c: usize,
        active: &[usize],
        entries: &[u8],
        exits: &mut Vec<u8>,
        visit: &mut dyn FnMut(&[u8]),
    ) {
        let pos = exits.len();
        if pos == active.len() {
            visit(exits);
            return;
        }
        let j = active[pos];
        let spec = &self.paths[j];
        let (lo, hi) = if spec.end_col == c {
            (spec.end_line, spec.end_line)
        } else {
            (spec.end_line, entries[pos])
        };
        if lo > hi || spec.end_line > entries[pos] {
            return;
        }
        let continues_j = spec.end_col > c;
        for exit in lo..=hi {
            let ok = (0..pos).all(|q| {
                let i = active[q];
                if self.paths[i].end_col > c {
                    exits[q] < exit || (!continues_j && exits[q] == exit)
                } else {
                    true
                }
            });
            if ok {
                exits.push(exit);
                self.for_each_exit(c, active, entries, exits, visit);
                exits.pop();
            }
        }
    }

    /// A path already on the grid bounds the entry line of every path to its left.
    fn entries_ordered(active: &[usize], before: &[usize], entries: &[u8]) -> bool {
        (0..active.len()).all(|q| {
            (q + 1..active.len()).all(|r| !before.contains(&active[r]) || entries[q] <= entries[r])
        })
    }

    fn atom_gain(&self, c: usize, active: &[usize], entries: &[u8], exits: &[u8]) -> Rational {
        let mut covered: Vec<bool> = vec![false; self.cols.atoms.len() + 1];
        for (q, &j) in active.iter().enumerate() {
            let spec = &self.paths[j];
            let hidden = (spec.open_start && spec.start_col == c) || (spec.open_end && spec.end_col == c);
            if !hidden {
                for line in exits[q]..=entries[q] {
                    covered[line as usize] = true;
                }
            }
        }
        covered
            .iter()
            .enumerate()
            .filter(|(_, &hit)| hit)
            .map(|(line, _)| &self.cols.atoms[line - 1][c])
            .sum()
    }

    fn tie(&self, c: usize, entries: &[u8], exits: &[u8]) -> Rational {
        let Mode::Extreme(side) = self.mode else {
            return Rational::zero();
        };
        let lifts: i64 = entries.iter().zip(exits).map(|(&e, &x)| (e - x) as i64).sum();
        let total = &self.cols.times[c] * &Rational::integer(lifts);
        match side {
            OptimizerSide::Leftmost => -total,
            OptimizerSide::Rightmost => total,
        }
    }

    /// Processes the atoms of column `c`: the returned layer holds states on
    /// the segment after `c`, without that segment's mass.
    fn advance(&self, c: usize, layer: &Layer, trace: bool) -> Layer {
        let before = if c == 0 { Vec::new() } else { self.present_on_segment(c - 1) };
        let after = self.present_on_segment(c);
        let active = self.active(c);
        let mut next = Layer::default();
        for (si, state) in layer.states.iter().enumerate() {
            let entries = self.entries(&active, &before, state);
            if !Self::entries_ordered(&active, &before, &entries) {
                continue;
            }
            let base = &layer.scores[si];
            let mut exits = Vec::with_capacity(active.len());
            self.for_each_exit(c, &active, &entries, &mut exits, &mut |exits| {
                let gain = self.atom_gain(c, &active, &entries, exits);
                let tie = self.tie(c, &entries, exits);
                let new_state: Vec<u8> = active
                    .iter()
                    .zip(exits)
                    .filter(|(j, _)| after.contains(j))
                    .map(|(_, &x)| x)
                    .collect();
                let score = (&base.0 + &gain, &base.1 + &tie);
                next.offer(new_state, score, trace.then(|| (si, exits.to_vec())));
            });
        }
        next
    }

    fn add_segment_mass(&self, c: usize, layer: &mut Layer) {
        let after = self.present_on_segment(c);
        for (state, score) in layer.states.iter().zip(layer.scores.iter_mut()) {
            for (pos, _) in after.iter().enumerate() {
                score.0 += &self.cols.mass[state[pos] as usize - 1][c];
            }
        }
    }

    fn run(&self, trace: bool) -> (Option<Score>, Vec<Layer>) {
        let mut layers: Vec<Layer> = Vec::new();
        let mut layer = Layer::default();
        layer.offer(Vec::new(), (Rational::zero(), Rational::zero()), None);
        let last = self.cols.times.len() - 1;
        for c in 0..=last {
            let mut next = self.advance(c, &layer, trace);
            if c < last {
                self.add_segment_mass(c, &mut next);
            }
            if trace {
                layers.push(std::mem::take(&mut layer));
            }
            layer = next;
            if layer.states.is_empty() {
                return (None, layers);
            }
        }
        let best = layer.index.get(&Vec::new()).map(|&i| layer.scores[i].clone());
        if trace {
            layers.push(layer);
        }
        (best, layers)
    }
}

/// Endpoint pairs that no tuple can join, detected before the sweep.
fn trivially_empty(spec: &EndpointSpec) -> bool {
    let k = spec.k();
    (0..k).any(|j| {
        let (p, q) = (&spec.starts[j], &spec.ends[j]);
        p.time > q.time || p.line < q.line
    }) || (0..k).any(|i| {
        (i + 1..k).any(|j| spec.starts[i].time > spec.ends[j].time && spec.starts[i].line > spec.ends[j].line)
    })
}

fn index_paths(cols: &Columns, spec: &EndpointSpec) -> Vec<PathIdx> {
    spec.starts
        .iter()
        .zip(&spec.ends)
        .map(|(p, q)| PathIdx {
            start_col: cols.col(&p.time),
            start_line: p.line as u8,
            end_col: cols.col(&q.time),
            end_line: q.line as u8,
            open_start: p.side == Side::Open,
            open_end: q.side == Side::Open,
        })
        .collect()
}

fn check_size(env: &PathEnv) -> Result<(), LppError> {
    if env.n() > u8::MAX as usize {
        return Err(LppError::OutOfRange(format!("{} lines exceed the supported 255", env.n())));
    }
    Ok(())
}

fn endpoint_times(spec: &EndpointSpec) -> impl Iterator<Item = &Rational> {
    spec.starts.iter().chain(&spec.ends).map(|p| &p.time)
}

/// `f[p → q]` for a single pair of endpoints.
pub fn lpp(env: &PathEnv, start: &GridPoint, end: &GridPoint) -> Result<LppValue, LppError> {
    lpp_multi(env, &EndpointSpec::single(start.clone(), end.clone()))
}

/// `f[p → q]`: supremum of `df(∪π)` over disjoint k-tuples; `0` for `k = 0`.
pub fn lpp_multi(env: &PathEnv, spec: &EndpointSpec) -> Result<LppValue, LppError> {
    spec.validate(env)?;
    check_size(env)?;
    if spec.k() == 0 {
        return Ok(LppValue::Finite(Rational::zero()));
    }
    if trivially_empty(spec) {
        return Ok(LppValue::NegInf);
    }
    let cols = Columns::new(env, endpoint_times(spec));
    Ok(lpp_on(&cols, spec))
}

pub(crate) fn lpp_on(cols: &Columns, spec: &EndpointSpec) -> LppValue {
    if spec.k() == 0 {
        return LppValue::Finite(Rational::zero());
    }
    if trivially_empty(spec) {
        return LppValue::NegInf;
    }
    let paths = index_paths(cols, spec);
    let sweep = Sweep { cols, paths: &paths, mode: Mode::Value };
    match sweep.run(false).0 {
        Some((v, _)) => LppValue::Finite(v),
        None => LppValue::NegInf,
    }
}

/// The leftmost or rightmost optimizer among tuples with grid jump times.
///
/// Optimizers form a lattice under the left-of order, so its extreme element
/// is the unique optimizer minimizing (leftmost) or maximizing (rightmost)
/// the sum of all jump times, which is what the sweep breaks ties on.
pub fn optimizer(
    env: &PathEnv,
    spec: &EndpointSpec,
    side: OptimizerSide,
) -> Result<DisjointTuple, LppError> {
    spec.validate(env)?;
    check_size(env)?;
    if spec.k() == 0 {
        return Ok(DisjointTuple { paths: Vec::new() });
    }
    if trivially_empty(spec) {
        return Err(LppError::NoPathExists);
    }
    let cols = Columns::new(env, endpoint_times(spec));
    let paths = index_paths(&cols, spec);
    let sweep = Sweep { cols: &cols, paths: &paths, mode: Mode::Extreme(side) };
    let (best, layers) = sweep.run(true);
    if best.is_none() {
        return Err(LppError::NoPathExists);
    }
    // layers[c] is the layer entering column c; layers[last + 1] the final one.
    let last = cols.times.len() - 1;
    let mut idx = layers[last + 1].index[&Vec::new()];
    let mut jumps: Vec<Vec<Rational>> = vec![Vec::new(); paths.len()];
    for c in (0..=last).rev() {
        let (prev, exits) = layers[c + 1].steps[idx].clone();
        let before = if c == 0 { Vec::new() } else { sweep.present_on_segment(c - 1) };
        let active = sweep.active(c);
        let entries = sweep.entries(&active, &before, &layers[c].states[prev]);
        for (q, &j) in active.iter().enumerate() {
            for _ in exits[q]..entries[q] {
                jumps[j].push(cols.times[c].clone());
            }
        }
        idx = prev;
    }
    let paths = spec
        .starts
        .iter()
        .zip(&spec.ends)
        .zip(jumps)
        .map(|((p, q), mut times)| {
            times.reverse();
            LatticePath { start: p.clone(), end: q.clone(), jump_times: times }
        })
        .collect();
    Ok(DisjointTuple { paths })
}

/// `y ↦ f[(0, n)^k → (y, end_line)^k]` as an exact piecewise line.
///
/// On each open grid segment the value is the upper envelope of one affine
/// function per sweep state, so the output may gain breakpoints where the
/// envelope switches.
pub fn profile(env: &PathEnv, k: usize, end_line: usize) -> Result<PathLine, LppError> {
    check_size(env)?;
    let n = env.n();
    if end_line == 0 || end_line > n {
        return Err(LppError::OutOfRange(format!("line {end_line} not in 1..={n}")));
    }
    if k == 0 {
        return Ok(PathLine::flat(env.horizon().clone()));
    }
    if k > n - end_line + 1 {
        return Err(LppError::NoPathExists);
    }
    let cols = Columns::new(env, std::iter::empty());
    let last = cols.times.len() - 1;
    let paths = vec![
        PathIdx {
            start_col: 0,
            start_line: n as u8,
            end_col: usize::MAX,
            end_line: end_line as u8,
            open_start: false,
            open_end: false,
        };
        k
    ];
    let sweep = Sweep { cols: &cols, paths: &paths, mode: Mode::Value };
    let mut layer = Layer::default();
    layer.offer(Vec::new(), (Rational::zero(), Rational::zero()), None);

    let mut breakpoints = Vec::new();
    let mut jumps = Vec::new();
    let mut slopes = Vec::new();
    let mut left_value = Rational::zero();
    let all: Vec<usize> = (0..k).collect();
    for c in 0..=last {
        let before = if c == 0 { Vec::new() } else { all.clone() };
        let finish = layer
            .states
            .iter()
            .zip(&layer.scores)
            .map(|(state, score)| {
                let entries = sweep.entries(&all, &before, state);
                let top = *entries.iter().max().expect("k > 0") as usize;
                let gain: Rational = (end_line..=top).map(|l| &cols.atoms[l - 1][c]).sum();
                &score.0 + &gain
            })
            .max()
            .ok_or(LppError::NoPathExists)?;
        breakpoints.push(cols.times[c].clone());
        jumps.push(&finish - &left_value);
        if c == last {
            break;
        }
        let next = sweep.advance(c, &layer, false);
        let lines: Vec<(Rational, Rational)> = next
            .states
            .iter()
            .zip(&next.scores)
            .map(|(state, score)| {
                let slope: Rational = state.iter().map(|&l| &cols.slopes[l as usize - 1][c]).sum();
                (score.0.clone(), slope)
            })
            .collect();
        let delta = &cols.times[c + 1] - &cols.times[c];
        let pieces = upper_envelope(&lines, &delta).ok_or(LppError::NoPathExists)?;
        for (idx, (u, _, slope)) in pieces.iter().enumerate() {
            if idx > 0 {
                breakpoints.push(&cols.times[c] + u);
                jumps.push(Rational::zero());
            }
            slopes.push(slope.clone());
        }
        let (u, v, s) = pieces.last().expect("nonempty envelope");
        left_value = v + &(s * &(&delta - u));
        layer = next;
        sweep.add_segment_mass(c, &mut layer);
    }
    Ok(PathLine::from_parts(breakpoints, jumps, slopes))
}

/// Upper envelope of `v + s·u` over `u ∈ [0, delta)`, as pieces
/// `(u_start, value_at_start, slope)`.
fn upper_envelope(lines: &[(Rational, Rational)], delta: &Rational) -> Option<Vec<(Rational, Rational, Rational)>> {
    let mut cur = lines.iter().max_by(|a, b| a.cmp(b))?;
    let mut u = Rational::zero();
    let mut pieces = Vec::new();
    loop {
        let value = &cur.0 + &(&cur.1 * &u);
        pieces.push((u.clone(), value, cur.1.clone()));
        let mut next: Option<(Rational, &(Rational, Rational))> = None;
        for cand in lines.iter().filter(|l| l.1 > cur.1) {
            let cross = (&cur.0 - &cand.0) / (&cand.1 - &cur.1);
            let better = match &next {
                None => true,
                Some((at, best)) => cross < *at || (cross == *at && cand.1 > best.1),
            };
            if better {
                next = Some((cross, cand));
            }
        }
        match next {
            Some((at, cand)) if &at < delta => {
                debug_assert!(at > u);
                u = at;
                cur = cand;
            }
            _ => return Some(pieces),
        }
    }
}

/// Quadrangle inequality `f[p→q'] + f[p'→q] ≤ f[p→q] + f[p'→q']` for
/// tuples with shared start and end lines and `x ≤ x'`, `y ≤ y'`.
pub fn check_quadrangle(
    env: &PathEnv,
    p: &[GridPoint],
    p_prime: &[GridPoint],
    q: &[GridPoint],
    q_prime: &[GridPoint],
) -> Result<bool, LppError> {
    let k = p.len();
    if [p_prime.len(), q.len(), q_prime.len()].iter().any(|&len| len != k) {
        return Err(LppError::DimensionMismatch { starts: k, ends: q.len() });
    }
    let ordered = (0..k).all(|i| {
        p[i].time <= p_prime[i].time
            && q[i].time <= q_prime[i].time
            && p[i].line == p_prime[i].line
            && q[i].line == q_prime[i].line
    });
    if !ordered {
        return Err(LppError::BadOrdering);
    }
    let value = |a: &[GridPoint], b: &[GridPoint]| {
        lpp_multi(env, &EndpointSpec::new(a.to_vec(), b.to_vec())?)
    };
    let cross = value(p, q_prime)?.plus(&value(p_prime, q)?);
    let straight = value(p, q)?.plus(&value(p_prime, q_prime)?);
    Ok(cross <= straight)
}

/// Metric composition law: `f[p → q]` equals the best split through
/// `(z, i)` then `(z, i - 1)` over grid vectors `z`.
pub fn check_composition(env: &PathEnv, spec: &EndpointSpec, i: usize) -> Result<bool, LppError> {
    spec.validate(env)?;
    let k = spec.k();
    if k == 0 {
        return Ok(true);
    }
    let top = spec.ends.iter().map(|q| q.line).max().unwrap_or(0);
    let bottom = spec.starts.iter().map(|p| p.line).min().unwrap_or(0);
    if i <= top || i > bottom {
        return Err(LppError::OutOfRange(format!("split line {i} not in {}..={bottom}", top + 1)));
    }
    let cols = Columns::new(env, endpoint_times(spec));
    let direct = lpp_on(&cols, spec);
    let mut best = LppValue::NegInf;
    let g = cols.times.len();
    let mut z = vec![0usize; k];
    loop {
        let mids: Vec<Rational> = z.iter().map(|&c| cols.times[c].clone()).collect();
        let first = EndpointSpec::new(
            spec.starts.clone(),
            mids.iter().map(|t| GridPoint::new(t.clone(), i)).collect(),
        )?;
        let second = EndpointSpec::new(
            mids.iter().map(|t| GridPoint::new(t.clone(), i - 1)).collect(),
            spec.ends.clone(),
        )?;
        let split = lpp_on(&cols, &first).plus(&lpp_on(&cols, &second));
        best = best.max(split);
        let mut pos = 0;
        while pos < k {
            z[pos] += 1;
            if z[pos] < g {
                break;
            }
            z[pos] = 0;
            pos += 1;
        }
        if pos == k {
            break;
        }
    }
    Ok(best == direct)
}

#[cfg(test)]
pub(crate) mod oracle {
    //! Exhaustive enumeration over grid jump-time vectors, independent of the
    //! sweep: every candidate tuple is validated geometrically and measured
    //! with `tuple_length`.

    use super::*;

    fn paths_between(p: &GridPoint, q: &GridPoint, grid: &[Rational]) -> Vec<LatticePath> {
        if p.time > q.time || p.line < q.line {
            return Vec::new();
        }
        let choices: Vec<&Rational> = grid.iter().filter(|t| &p.time <= *t && *t <= &q.time).collect();
        let jumps = p.line - q.line;
        let mut out = Vec::new();
        let mut idx = vec![0usize; jumps];
        loop {
            out.push(LatticePath {
                start: p.clone(),
                end: q.clone(),
                jump_times: idx.iter().map(|&i| choices[i].clone()).collect(),
            });
            // next nondecreasing index vector
            let mut pos = jumps;
            loop {
                if pos == 0 {
                    return out;
                }
                pos -= 1;
                if idx[pos] + 1 < choices.len() {
                    idx[pos] += 1;
                    let v = idx[pos];
                    for later in idx.iter_mut().skip(pos + 1) {
                        *later = v;
                    }
                    break;
                }
            }
        }
    }

    /// All valid tuples with jump times in `grid`, with their lengths.
    pub fn all_tuples(env: &PathEnv, spec: &EndpointSpec, grid: &[Rational]) -> Vec<(DisjointTuple, Rational)> {
        let options: Vec<Vec<LatticePath>> = spec
            .starts()
            .iter()
            .zip(spec.ends())
            .map(|(p, q)| paths_between(p, q, grid))
            .collect();
        let mut out = Vec::new();
        let mut chosen: Vec<LatticePath> = Vec::new();
        fn rec(
            env: &PathEnv,
            options: &[Vec<LatticePath>],
            chosen: &mut Vec<LatticePath>,
            out: &mut Vec<(DisjointTuple, Rational)>,
        ) {
            if chosen.len() == options.len() {
                let tuple = DisjointTuple { paths: chosen.clone() };
                if let Ok(len) = tuple_length(env, &tuple) {
                    out.push((tuple, len));
                }
                return;
            }
            for path in &options[chosen.len()] {
                chosen.push(path.clone());
                let partial = DisjointTuple { paths: chosen.clone() };
                if partial.validate(env).is_ok() {
                    rec(env, options, chosen, out);
                }
                chosen.pop();
            }
        }
        rec(env, &options, &mut chosen, &mut out);
        out
    }

    pub fn event_grid(env: &PathEnv, spec: &EndpointSpec) -> Vec<Rational> {
        Columns::new(env, endpoint_times(spec)).times
    }

    /// Inserts midpoints between consecutive grid points.
    pub fn refine(grid: &[Rational]) -> Vec<Rational> {
        let mut out = Vec::new();
        for w in grid.windows(2) {
            out.push(w[0].clone());
            out.push((&w[0] + &w[1]) / Rational::integer(2));
        }
        out.extend(grid.last().cloned());
        out
    }

    pub fn best(env: &PathEnv, spec: &EndpointSpec, grid: &[Rational]) -> LppValue {
        if spec.k() == 0 {
            return LppValue::Finite(Rational::zero());
        }
        all_tuples(env, spec, grid)
            .into_iter()
            .map(|(_, v)| LppValue::Finite(v))
            .max()
            .unwrap_or(LppValue::NegInf)
    }
}
