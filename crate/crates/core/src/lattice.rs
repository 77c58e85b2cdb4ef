//! Lattice last passage over nonnegative matrices, Greene-style tableau
//! decoding from multi-path values, a bumping oracle, and the embeddings of
//! matrices as path environments.
//!
//! Entry `A_{r,k}` sits in column `r` (time) and row `k` (line, row 1 on
//! top); the matrix is extended by zeros to the right. Ordinary paths step
//! right or up; dual paths visit one cell per column, moving weakly up.

use std::collections::HashMap;

use thiserror::Error;

use crate::env::{EnvError, GridPoint, LineSpec, PathEnv};
use crate::lpp::{lpp_multi, EndpointSpec, LppValue};
use crate::rational::Rational;
use crate::rsk::{rsk_t, GTPattern, RSKPair};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("no disjoint tuple connects the endpoints")]
    NoPathExists,
    #[error("tableau decoding needs integer entries")]
    NonIntegerEntries,
    #[error("dual operations need 0/1 entries")]
    NotBinary,
    #[error("negative entry {value} at column {col}, row {row}")]
    NegativeEntry { col: usize, row: usize, value: Rational },
    #[error("matrix rows have inconsistent lengths")]
    Ragged,
    #[error("endpoint {0} out of range")]
    OutOfRange(String),
    #[error("endpoints are not ordered up-left")]
    BadOrdering,
    #[error("no disjoint lattice tuple exists, so the embedding identity does not apply")]
    NotAdmissible,
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LatticeMatrix {
    rows: usize,
    cols: usize,
    /// `entries[row - 1][col - 1]`.
    entries: Vec<Vec<Rational>>,
}

impl LatticeMatrix {
    /// Row-major entries, row 1 first.
    pub fn new(entries: Vec<Vec<Rational>>) -> Result<Self, LatticeError> {
        let rows = entries.len();
        let cols = entries.first().map_or(0, Vec::len);
        if rows == 0 || cols == 0 || entries.iter().any(|r| r.len() != cols) {
            return Err(LatticeError::Ragged);
        }
        for (k, row) in entries.iter().enumerate() {
            for (r, value) in row.iter().enumerate() {
                if value.is_negative() {
                    return Err(LatticeError::NegativeEntry { col: r + 1, row: k + 1, value: value.clone() });
                }
            }
        }
        Ok(LatticeMatrix { rows, cols, entries })
    }

    pub fn from_i64(entries: &[&[i64]]) -> Result<Self, LatticeError> {
        Self::new(entries.iter().map(|r| r.iter().map(|&v| Rational::integer(v)).collect()).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        LatticeMatrix { rows, cols, entries: vec![vec![Rational::zero(); cols]; rows] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    /// `A_{col,row}`, zero beyond the last column.
    pub fn at(&self, col: usize, row: usize) -> Rational {
        if col == 0 || col > self.cols {
            return Rational::zero();
        }
        self.entries[row - 1][col - 1].clone()
    }

    pub fn is_integral(&self) -> bool {
        self.entries.iter().flatten().all(Rational::is_integer)
    }

    pub fn is_binary(&self) -> bool {
        self.entries.iter().flatten().all(|v| v.is_zero() || v == &Rational::one())
    }

    /// Columns after `last` replaced by zeros.
    pub fn truncate_cols(&self, last: usize) -> Self {
        let mut out = self.clone();
        for row in &mut out.entries {
            for (c, v) in row.iter_mut().enumerate() {
                if c >= last {
                    *v = Rational::zero();
                }
            }
        }
        out
    }
}

/// A lattice site: column (time) and row (line).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Site {
    pub col: usize,
    pub row: usize,
}

impl Site {
    pub fn new(col: usize, row: usize) -> Self {
        Site { col, row }
    }
}

/// `p^{*k}`: rows `row−k+1, …, row` in column `col`, topmost first.
pub fn staggered_starts(p: Site, k: usize) -> Vec<Site> {
    (0..k).map(|i| Site::new(p.col, p.row + 1 + i - k)).collect()
}

/// `q^{*k}`: columns `col, …, col+k−1` in row `row`.
pub fn staggered_ends(q: Site, k: usize) -> Vec<Site> {
    (0..k).map(|i| Site::new(q.col + i, q.row)).collect()
}

fn check_endpoints(a: &LatticeMatrix, starts: &[Site], ends: &[Site]) -> Result<(), LatticeError> {
    if starts.len() != ends.len() {
        return Err(LatticeError::OutOfRange(format!("{} starts, {} ends", starts.len(), ends.len())));
    }
    for s in starts.iter().chain(ends) {
        if s.col == 0 || s.row == 0 || s.row > a.rows || s.row > u8::MAX as usize {
            return Err(LatticeError::OutOfRange(format!("{s:?}")));
        }
    }
    let ordered = |v: &[Site]| v.windows(2).all(|w| w[0].col <= w[1].col && w[0].row <= w[1].row);
    if !ordered(starts) || !ordered(ends) {
        return Err(LatticeError::BadOrdering);
    }
    Ok(())
}

struct Span {
    start: Site,
    end: Site,
}

/// Column sweep shared by ordinary and dual paths. The state between two
/// columns lists the rows at which continuing paths cross, in path order;
/// path `i` stays strictly above path `j > i` in every shared column.
fn sweep(a: &LatticeMatrix, spans: &[Span], dual: bool) -> Option<Rational> {
    let first = spans.iter().map(|s| s.start.col).min()?;
    let last = spans.iter().map(|s| s.end.col).max()?;
    let mut layer: HashMap<Vec<u8>, Rational> = HashMap::from([(Vec::new(), Rational::zero())]);
    for c in first..=last {
        let before: Vec<usize> = (0..spans.len()).filter(|&j| spans[j].start.col < c && spans[j].end.col >= c).collect();
        let active: Vec<usize> = (0..spans.len()).filter(|&j| spans[j].start.col <= c && c <= spans[j].end.col).collect();
        let column: Vec<Rational> = (0..=a.rows).map(|r| if r == 0 { Rational::zero() } else { a.at(c, r) }).collect();
        let mut next: HashMap<Vec<u8>, Rational> = HashMap::new();
        for (state, score) in &layer {
            let entries: Vec<u8> = active
                .iter()
                .map(|j| match before.iter().position(|b| b == j) {
                    Some(pos) => state[pos],
                    None => spans[*j].start.row as u8,
                })
                .collect();
            let mut chosen: Vec<u8> = Vec::with_capacity(active.len());
            let mut visit = |chosen: &[u8]| {
                let gain: Rational = active
                    .iter()
                    .enumerate()
                    .map(|(q, _)| {
                        let (lo, hi) = if dual { (chosen[q], chosen[q]) } else { (chosen[q], entries[q]) };
                        (lo..=hi).map(|r| &column[r as usize]).sum::<Rational>()
                    })
                    .sum();
                let key: Vec<u8> = active
                    .iter()
                    .zip(chosen)
                    .filter(|(j, _)| spans[**j].end.col > c)
                    .map(|(_, &r)| r)
                    .collect();
                let total = score + &gain;
                let slot = next.entry(key).or_insert_with(|| total.clone());
                if *slot < total {
                    *slot = total;
                }
            };
            choose(spans, &active, &entries, c, dual, &mut chosen, &mut visit);
        }
        layer = next;
        if layer.is_empty() {
            return None;
        }
    }
    layer.remove(&Vec::new())
}

/// Picks, path by path, the row each active path leaves column `c` on
/// (ordinary) or occupies in it (dual).
fn choose(
    spans: &[Span],
    active: &[usize],
    entries: &[u8],
    c: usize,
    dual: bool,
    chosen: &mut Vec<u8>,
    visit: &mut dyn FnMut(&[u8]),
) {
    let pos = chosen.len();
    if pos == active.len() {
        visit(chosen);
        return;
    }
    let span = &spans[active[pos]];
    let top = span.end.row as u8;
    let ends_here = span.end.col == c;
    let (lo, hi) = if ends_here && !dual { (top, top) } else { (top, entries[pos]) };
    // The previous path's lowest cell in this column must be strictly above ours.
    let floor = if pos == 0 {
        0
    } else if dual {
        chosen[pos - 1]
    } else {
        entries[pos - 1]
    };
    for row in lo.max(floor + 1)..=hi {
        chosen.push(row);
        choose(spans, active, entries, c, dual, chosen, visit);
        chosen.pop();
    }
}

/// `A[p → q]` (ordinary) or `A{p → q}` (dual) for ordered k-tuples.
///
/// A dual path from `(x, n)` to `(y, m)` visits one cell in each column
/// `x..=y` on rows that never increase and stay within `[m, n]`.
pub fn lattice_lpp(a: &LatticeMatrix, starts: &[Site], ends: &[Site], dual: bool) -> Result<Rational, LatticeError> {
    check_endpoints(a, starts, ends)?;
    if dual && !a.is_binary() {
        return Err(LatticeError::NotBinary);
    }
    if starts.is_empty() {
        return Ok(Rational::zero());
    }
    // A dual path starting one column past its end is empty.
    let slack = usize::from(dual);
    if starts.iter().zip(ends).any(|(p, q)| p.col > q.col + slack || p.row < q.row) {
        return Err(LatticeError::NoPathExists);
    }
    let spans: Vec<Span> = starts.iter().zip(ends).map(|(&start, &end)| Span { start, end }).collect();
    sweep(a, &spans, dual).ok_or(LatticeError::NoPathExists)
}

/// Ordinary k-path value with overlaps allowed and shared cells counted
/// once, by exhaustive enumeration (small matrices only).
pub fn lattice_lpp_overlap(a: &LatticeMatrix, starts: &[Site], ends: &[Site]) -> Result<Rational, LatticeError> {
    check_endpoints(a, starts, ends)?;
    if starts.is_empty() {
        return Ok(Rational::zero());
    }
    let options: Vec<Vec<Vec<Site>>> = starts.iter().zip(ends).map(|(&p, &q)| directed_paths(p, q)).collect();
    if options.iter().any(Vec::is_empty) {
        return Err(LatticeError::NoPathExists);
    }
    let mut best: Option<Rational> = None;
    let mut idx = vec![0usize; options.len()];
    loop {
        let mut cells: Vec<Site> = idx.iter().zip(&options).flat_map(|(&i, o)| o[i].iter().copied()).collect();
        cells.sort_by_key(|s| (s.col, s.row));
        cells.dedup();
        let weight: Rational = cells.iter().map(|s| a.at(s.col, s.row)).sum();
        if best.as_ref().is_none_or(|b| &weight > b) {
            best = Some(weight);
        }
        let mut pos = 0;
        while pos < idx.len() {
            idx[pos] += 1;
            if idx[pos] < options[pos].len() {
                break;
            }
            idx[pos] = 0;
            pos += 1;
        }
        if pos == idx.len() {
            break;
        }
    }
    best.ok_or(LatticeError::NoPathExists)
}

/// Every right/up path from `p` to `q` as its list of cells.
pub(crate) fn directed_paths(p: Site, q: Site) -> Vec<Vec<Site>> {
    if p.col > q.col || p.row < q.row {
        return Vec::new();
    }
    if p == q {
        return vec![vec![p]];
    }
    let mut out = Vec::new();
    for step in [Site::new(p.col + 1, p.row), Site::new(p.col, p.row.wrapping_sub(1))] {
        if step.row >= q.row && step.col <= q.col && step.row > 0 {
            for mut rest in directed_paths(step, q) {
                rest.insert(0, p);
                out.push(rest);
            }
        }
    }
    out
}

/// `f^A`: atom `A_{r,k}` at time `r` on line `k`, horizon `cols`.
pub fn embed_matrix(a: &LatticeMatrix) -> PathEnv {
    let specs: Vec<LineSpec> = (1..=a.rows)
        .map(|k| LineSpec {
            jumps: (1..=a.cols).map(|r| (Rational::from(r), a.at(r, k))).collect(),
            segments: vec![],
        })
        .collect();
    PathEnv::new(a.rows, Rational::from(a.cols), &specs).expect("nonnegative entries")
}

/// `ℓ^A`: slope `A_{r,k}` on `[r−1, r]` for line `k`.
pub fn embed_binary(a: &LatticeMatrix) -> Result<PathEnv, LatticeError> {
    if !a.is_binary() {
        return Err(LatticeError::NotBinary);
    }
    let specs: Vec<LineSpec> = (1..=a.rows)
        .map(|k| LineSpec {
            jumps: vec![],
            segments: (1..=a.cols)
                .map(|r| (Rational::from(r - 1), Rational::from(r), a.at(r, k)))
                .collect(),
        })
        .collect();
    Ok(PathEnv::new(a.rows, Rational::from(a.cols), &specs)?)
}

/// Lattice value against the embedded env: ordinary sites map to the same
/// points of `f^A`; dual sites `(x, n) → (y, m)` map to `(x−1, n) → (y, m)`
/// of `ℓ^A`, whose column `x` occupies `[x−1, x]`. The identity only
/// covers tuples joined by some disjoint lattice tuple: cadlag paths may
/// touch at a point where lattice paths would share a cell.
pub fn check_embedding(a: &LatticeMatrix, starts: &[Site], ends: &[Site], dual: bool) -> Result<bool, LatticeError> {
    let lattice = match lattice_lpp(a, starts, ends, dual) {
        Err(LatticeError::NoPathExists) => return Err(LatticeError::NotAdmissible),
        other => other?,
    };
    let last = starts.iter().chain(ends).map(|s| s.col).max().unwrap_or(0).max(a.cols);
    let padded = pad_cols(a, last);
    let (env, shift) = if dual { (embed_binary(&padded)?, 1) } else { (embed_matrix(&padded), 0) };
    let point = |s: &Site, back: usize| GridPoint::new(Rational::from(s.col - back), s.row);
    let spec = EndpointSpec::new(
        starts.iter().map(|s| point(s, shift)).collect(),
        ends.iter().map(|s| point(s, 0)).collect(),
    )
    .map_err(|e| LatticeError::OutOfRange(e.to_string()))?;
    let cadlag = lpp_multi(&env, &spec).map_err(|e| LatticeError::OutOfRange(e.to_string()))?;
    Ok(cadlag == LppValue::Finite(lattice))
}

fn pad_cols(a: &LatticeMatrix, cols: usize) -> LatticeMatrix {
    if cols <= a.cols {
        return a.clone();
    }
    let entries = a
        .entries
        .iter()
        .map(|row| row.iter().cloned().chain(std::iter::repeat_n(Rational::zero(), cols - a.cols)).collect())
        .collect();
    LatticeMatrix { rows: a.rows, cols, entries }
}

/// A filling by rows; semistandard means rows weakly and columns strictly
/// increasing.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Tableau {
    pub rows: Vec<Vec<u32>>,
}

impl Tableau {
    pub fn shape(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn is_semistandard(&self) -> bool {
        let rows_ok = self.rows.iter().all(|r| r.windows(2).all(|w| w[0] <= w[1]));
        let shape_ok = self.rows.windows(2).all(|w| w[0].len() >= w[1].len()) && self.rows.iter().all(|r| !r.is_empty());
        let cols_ok = self.rows.windows(2).all(|w| w[1].iter().zip(&w[0]).all(|(lo, hi)| lo > hi));
        rows_ok && shape_ok && cols_ok
    }

    pub fn transpose(&self) -> Tableau {
        let width = self.rows.first().map_or(0, Vec::len);
        let rows = (0..width)
            .map(|c| self.rows.iter().take_while(|r| r.len() > c).map(|r| r[c]).collect())
            .collect();
        Tableau { rows }
    }

    /// Rebuilds a tableau from `counts[k-1][i-1]` = number of entries `≤ i`
    /// in rows `1..=k`.
    fn from_counts(counts: &[Vec<Rational>]) -> Result<Tableau, LatticeError> {
        let mut rows = Vec::new();
        for (k, row_counts) in counts.iter().enumerate() {
            let mut row = Vec::new();
            let mut prev_in_row = 0i64;
            for (i, count) in row_counts.iter().enumerate() {
                let above = if k == 0 { Rational::zero() } else { counts[k - 1][i].clone() };
                let in_row = (count - &above).to_i64().filter(|_| count.is_integer());
                let in_row = in_row.ok_or(LatticeError::NonIntegerEntries)?;
                for _ in prev_in_row..in_row {
                    row.push(i as u32 + 1);
                }
                prev_in_row = in_row;
            }
            if !row.is_empty() {
                rows.push(row);
            }
        }
        Ok(Tableau { rows })
    }
}

/// Multi-path value arrays behind the recording and insertion sides.
struct GreeneValues {
    /// `time[k-1][t-1]`: k paths from the bottom-left corner to column `t`, row 1.
    time: Vec<Vec<Rational>>,
    /// `line[k-1][i-1]`: k paths from the corner to the last column, row `n−i+1`.
    line: Vec<Vec<Rational>>,
}

fn greene_values(a: &LatticeMatrix, dual: bool) -> Result<GreeneValues, LatticeError> {
    let (n, m) = (a.rows, a.cols);
    let depth = if dual { n } else { n.min(m) };
    let corner = Site::new(1, n);
    let value = |a: &LatticeMatrix, k: usize, end: Site| -> Result<Rational, LatticeError> {
        if k == 0 {
            return Ok(Rational::zero());
        }
        if dual {
            lattice_lpp(a, &vec![corner; k], &vec![end; k], true)
        } else {
            lattice_lpp(a, &staggered_starts(corner, k), &staggered_ends(end, k), false)
        }
    };
    let mut time = vec![vec![Rational::zero(); m]; depth];
    for t in 1..=m {
        let truncated = a.truncate_cols(t);
        for k in 1..=depth {
            let paths = if dual { k.min(n) } else { k.min(t) };
            time[k - 1][t - 1] = value(&truncated, paths, Site::new(t, 1))?;
        }
    }
    let mut line = vec![vec![Rational::zero(); n]; depth];
    for i in 1..=n {
        for k in 1..=depth {
            line[k - 1][i - 1] = value(a, k.min(i), Site::new(m, n - i + 1))?;
        }
    }
    Ok(GreeneValues { time, line })
}

/// `(Q, P)` decoded from multi-path values. For dual matrices the first
/// component is returned as `Q` itself (its transpose carries the counts).
pub fn greene_tableaux(a: &LatticeMatrix, dual: bool) -> Result<(Tableau, Tableau), LatticeError> {
    if dual && !a.is_binary() {
        return Err(LatticeError::NotBinary);
    }
    if !a.is_integral() {
        return Err(LatticeError::NonIntegerEntries);
    }
    let values = greene_values(a, dual)?;
    let recording = Tableau::from_counts(&values.time)?;
    let insertion = Tableau::from_counts(&values.line)?;
    Ok(if dual { (recording.transpose(), insertion) } else { (recording, insertion) })
}

/// `(WA, GA)` straight from the value arrays; works for any nonnegative
/// entries (binary for dual).
pub fn greene_pair(a: &LatticeMatrix, dual: bool) -> Result<RSKPair, LatticeError> {
    if dual && !a.is_binary() {
        return Err(LatticeError::NotBinary);
    }
    let (n, m) = (a.rows, a.cols);
    let values = greene_values(a, dual)?;
    let depth = values.time.len();
    let partial = |k: usize, t: usize| -> Rational {
        match (k, t) {
            (0, _) | (_, 0) => Rational::zero(),
            (k, t) => values.time[k.min(depth) - 1][t - 1].clone(),
        }
    };
    // Line j at integer time t: difference of cumulative k-path values.
    let level = |j: usize, t: usize| &partial(j, t) - &partial(j - 1, t);
    let specs: Vec<LineSpec> = (1..=n)
        .map(|j| {
            let steps = (1..=m).map(|t| (t, &level(j, t) - &level(j, t - 1)));
            if dual {
                LineSpec {
                    jumps: vec![],
                    segments: steps.map(|(t, d)| (Rational::from(t - 1), Rational::from(t), d)).collect(),
                }
            } else {
                LineSpec { jumps: steps.map(|(t, d)| (Rational::from(t), d)).collect(), segments: vec![] }
            }
        })
        .collect();
    let w = PathEnv::new(n, Rational::from(m), &specs)?;
    let line_total = |k: usize, i: usize| -> Rational {
        if k == 0 {
            Rational::zero()
        } else {
            values.line[k.min(depth) - 1][i - 1].clone()
        }
    };
    let rows = (1..=n).map(|i| (1..=i).map(|k| &line_total(k, i) - &line_total(k - 1, i)).collect()).collect();
    let g = GTPattern::new(rows).expect("triangular rows");
    Ok(RSKPair { w, g })
}

/// Row insertion of `word` (bumping the leftmost entry strictly greater),
/// recording `labels`.
fn insert_word(word: &[(u32, u32)]) -> (Tableau, Tableau) {
    let mut p: Vec<Vec<u32>> = Vec::new();
    let mut q: Vec<Vec<u32>> = Vec::new();
    for &(label, letter) in word {
        let mut v = letter;
        let mut row = 0;
        loop {
            if row == p.len() {
                p.push(vec![v]);
                q.push(vec![label]);
                break;
            }
            let pos = p[row].partition_point(|&x| x <= v);
            if pos == p[row].len() {
                p[row].push(v);
                q[row].push(label);
                break;
            }
            std::mem::swap(&mut p[row][pos], &mut v);
            row += 1;
        }
    }
    (Tableau { rows: q }, Tableau { rows: p })
}

/// Classical RSK by bumping, as an independent oracle. Row `k` of the matrix
/// becomes letter `n+1−k`, so insertion letters count lines from the bottom.
/// Dual matrices read each column with letters decreasing, so a weakly
/// increasing subsequence takes at most one cell per column; the recording
/// tableau is then transposed.
pub fn bumping_rsk(a: &LatticeMatrix, dual: bool) -> Result<(Tableau, Tableau), LatticeError> {
    if dual && !a.is_binary() {
        return Err(LatticeError::NotBinary);
    }
    if !a.is_integral() {
        return Err(LatticeError::NonIntegerEntries);
    }
    let n = a.rows;
    let mut word = Vec::new();
    for col in 1..=a.cols {
        let letters: Vec<u32> = if dual { (1..=n as u32).rev().collect() } else { (1..=n as u32).collect() };
        for letter in letters {
            let count = a.at(col, n + 1 - letter as usize).to_i64().expect("integer entry");
            for _ in 0..count {
                word.push((col as u32, letter));
            }
        }
    }
    let (q, p) = insert_word(&word);
    Ok(if dual { (q.transpose(), p) } else { (q, p) })
}

/// `RSK_m` of the embedded env (`f^A`, or `ℓ^A` for dual).
pub fn lattice_rsk_pair(a: &LatticeMatrix, dual: bool) -> Result<RSKPair, LatticeError> {
    let env = if dual { embed_binary(a)? } else { embed_matrix(a) };
    Ok(rsk_t(&env))
}

/// The path dictionary applied to a tableau: line `i` jumps by one at each
/// entry of row `i`.
pub fn tableau_paths(t: &Tableau, n: usize, horizon: usize) -> Result<PathEnv, LatticeError> {
    let mut specs = vec![LineSpec::default(); n];
    for (i, row) in t.rows.iter().enumerate() {
        if i >= n {
            return Err(LatticeError::OutOfRange(format!("row {}", i + 1)));
        }
        specs[i].jumps = row.iter().map(|&v| (Rational::from(v as usize), Rational::one())).collect();
    }
    Ok(PathEnv::new(n, Rational::from(horizon), &specs)?)
}

/// The pattern dictionary: `g_i(j)` counts entries `≤ j` in row `i`.
pub fn tableau_pattern(t: &Tableau, n: usize) -> GTPattern {
    let rows = (1..=n)
        .map(|j| {
            (1..=j)
                .map(|i| {
                    let count = t.rows.get(i - 1).map_or(0, |r| r.iter().filter(|&&v| v as usize <= j).count());
                    Rational::from(count)
                })
                .collect()
        })
        .collect();
    GTPattern::new(rows).expect("triangular rows")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::fixtures::{e3, q};
    use proptest::prelude::*;

    fn m(rows: &[&[i64]]) -> LatticeMatrix {
        LatticeMatrix::from_i64(rows).unwrap()
    }

    fn s(col: usize, row: usize) -> Site {
        Site::new(col, row)
    }

    /// Exhaustive disjoint tuples of ordinary paths, ordered top-first.
    fn brute_force(a: &LatticeMatrix, starts: &[Site], ends: &[Site]) -> Option<Rational> {
        let options: Vec<Vec<Vec<Site>>> = starts.iter().zip(ends).map(|(&p, &q)| directed_paths(p, q)).collect();
        let mut best = None;
        let mut chosen: Vec<&Vec<Site>> = Vec::new();
        fn rec<'a>(
            a: &LatticeMatrix,
            options: &'a [Vec<Vec<Site>>],
            chosen: &mut Vec<&'a Vec<Site>>,
            best: &mut Option<Rational>,
        ) {
            if chosen.len() == options.len() {
                let w: Rational = chosen.iter().flat_map(|p| p.iter()).map(|c| a.at(c.col, c.row)).sum();
                if best.as_ref().is_none_or(|b| &w > b) {
                    *best = Some(w);
                }
                return;
            }
            for path in &options[chosen.len()] {
                if chosen.iter().all(|other| other.iter().all(|c| !path.contains(c))) {
                    chosen.push(path);
                    rec(a, options, chosen, best);
                    chosen.pop();
                }
            }
        }
        rec(a, &options, &mut chosen, &mut best);
        best
    }

    /// Exhaustive dual tuples: one cell per column, rows nonincreasing within
    /// `[end row, start row]`, distinct cells.
    fn brute_force_dual(a: &LatticeMatrix, starts: &[Site], ends: &[Site]) -> Option<Rational> {
        fn paths(p: Site, q: Site) -> Vec<Vec<Site>> {
            if p.col == q.col + 1 && p.row >= q.row {
                return vec![vec![]];
            }
            if p.col > q.col {
                return vec![];
            }
            let mut out = vec![];
            for row in q.row..=p.row {
                let here = Site::new(p.col, row);
                if p.col == q.col {
                    out.push(vec![here]);
                } else {
                    for mut rest in paths(Site::new(p.col + 1, row), q) {
                        rest.insert(0, here);
                        out.push(rest);
                    }
                }
            }
            out
        }
        let options: Vec<Vec<Vec<Site>>> = starts.iter().zip(ends).map(|(&p, &q)| paths(p, q)).collect();
        let mut best: Option<Rational> = None;
        let mut idx = vec![0usize; options.len()];
        if options.iter().any(Vec::is_empty) {
            return None;
        }
        loop {
            let chosen: Vec<&Vec<Site>> = idx.iter().zip(&options).map(|(&i, o)| &o[i]).collect();
            let cells: Vec<&Site> = chosen.iter().flat_map(|p| p.iter()).collect();
            let distinct = cells.iter().enumerate().all(|(i, c)| !cells[..i].contains(c));
            if distinct {
                let w: Rational = cells.iter().map(|c| a.at(c.col, c.row)).sum();
                if best.as_ref().is_none_or(|b| &w > b) {
                    best = Some(w);
                }
            }
            let mut pos = 0;
            while pos < idx.len() {
                idx[pos] += 1;
                if idx[pos] < options[pos].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == idx.len() {
                return best;
            }
        }
    }

    #[test]
    fn lattice_examples() {
        let a = m(&[&[1, 2], &[3, 4]]);
        assert_eq!(a.at(1, 1), q(1));
        assert_eq!(a.at(2, 1), q(2));
        assert_eq!(a.at(1, 2), q(3));
        assert_eq!(lattice_lpp(&a, &[s(1, 2)], &[s(2, 1)], false).unwrap(), q(9));
        let starts = staggered_starts(s(1, 2), 2);
        let ends = staggered_ends(s(2, 1), 2);
        assert_eq!(starts, vec![s(1, 1), s(1, 2)]);
        assert_eq!(ends, vec![s(2, 1), s(3, 1)]);
        assert_eq!(lattice_lpp(&a, &starts, &ends, false).unwrap(), q(10));
        assert_eq!(lattice_lpp_overlap(&a, &starts, &ends).unwrap(), q(10));
        assert_eq!(lattice_lpp_overlap(&a, &[s(1, 2)], &[s(2, 1)]).unwrap(), q(9));
        assert_eq!(lattice_lpp_overlap(&LatticeMatrix::zeros(2, 2), &starts, &ends).unwrap(), q(0));
        assert_eq!(lattice_lpp(&a, &[s(2, 2)], &[s(1, 1)], false), Err(LatticeError::NoPathExists));
        assert_eq!(lattice_lpp(&a, &[s(1, 1), s(1, 1)], &[s(2, 1), s(2, 1)], false), Err(LatticeError::NoPathExists));
        assert_eq!(lattice_lpp(&a, &[s(1, 2), s(1, 1)], &[s(2, 1), s(3, 1)], false), Err(LatticeError::BadOrdering));
    }

    #[test]
    fn dual_examples() {
        let id = m(&[&[1, 0], &[0, 1]]);
        // Under the free-endpoint reading the path may take the bottom cell of
        // column 2 or the top cell of column 1.
        assert_eq!(lattice_lpp(&id, &[s(1, 2)], &[s(2, 1)], true).unwrap(), q(1));
        assert_eq!(lattice_lpp(&id, &[s(1, 2), s(1, 2)], &[s(2, 1), s(2, 1)], true).unwrap(), q(2));
        let anti = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(lattice_lpp(&anti, &[s(1, 2)], &[s(2, 1)], true).unwrap(), q(2));
        assert_eq!(lattice_lpp(&m(&[&[2]]), &[s(1, 1)], &[s(1, 1)], true), Err(LatticeError::NotBinary));
        assert!(check_embedding(&id, &[s(1, 2)], &[s(2, 1)], true).unwrap());
        let one_row = m(&[&[1, 1]]);
        assert_eq!(check_embedding(&one_row, &[s(1, 1), s(2, 1)], &[s(2, 1), s(3, 1)], false), Err(LatticeError::NotAdmissible));
    }

    #[test]
    fn embeddings() {
        assert_eq!(embed_matrix(&LatticeMatrix::zeros(2, 3)), PathEnv::flat(2, q(3)));
        let a = m(&[&[1, 2], &[3, 4]]);
        let env = embed_matrix(&a);
        assert_eq!(env.line(1).jump_at(&q(1)), q(1));
        assert_eq!(env.line(1).jump_at(&q(2)), q(2));
        assert_eq!(env.line(2).jump_at(&q(1)), q(3));
        assert_eq!(env.line(2).jump_at(&q(2)), q(4));
        assert_eq!(embed_binary(&m(&[&[0, 1], &[1, 0]])).unwrap(), e3());
        let ones = embed_binary(&m(&[&[1, 1], &[1, 1]])).unwrap();
        assert!(ones.lines().iter().all(|l| l.value(&q(2)) == q(2) && l.slopes().iter().all(|s| s == &q(1))));
        assert_eq!(embed_binary(&a), Err(LatticeError::NotBinary));
        assert!(check_embedding(&a, &[s(1, 2)], &[s(2, 1)], false).unwrap());
        assert!(check_embedding(&a, &staggered_starts(s(1, 2), 2), &staggered_ends(s(2, 1), 2), false).unwrap());
        let b = m(&[&[0, 1], &[1, 0]]);
        assert!(check_embedding(&b, &[s(1, 2)], &[s(2, 1)], true).unwrap());
    }

    #[test]
    fn tableau_basics() {
        let (q0, p0) = greene_tableaux(&LatticeMatrix::zeros(2, 2), false).unwrap();
        assert_eq!((q0.clone(), p0.clone()), (Tableau::default(), Tableau::default()));
        assert_eq!(bumping_rsk(&LatticeMatrix::zeros(2, 2), false).unwrap(), (q0, p0));
        let (qq, pp) = bumping_rsk(&m(&[&[3]]), false).unwrap();
        assert_eq!(qq.rows, vec![vec![1, 1, 1]]);
        assert_eq!(pp.rows, vec![vec![1, 1, 1]]);
        let perm = m(&[&[0, 1], &[1, 0]]);
        assert_eq!(greene_tableaux(&perm, false).unwrap(), bumping_rsk(&perm, false).unwrap());
        let t = Tableau { rows: vec![vec![1, 1, 2], vec![2]] };
        assert!(t.is_semistandard());
        assert_eq!(t.transpose().rows, vec![vec![1, 2], vec![1], vec![2]]);
        assert!(!Tableau { rows: vec![vec![1], vec![1]] }.is_semistandard());
        let frac = LatticeMatrix::new(vec![vec![Rational::new(1, 2)]]).unwrap();
        assert_eq!(greene_tableaux(&frac, false), Err(LatticeError::NonIntegerEntries));
    }

    #[test]
    fn zero_matrix_pair() {
        let pair = lattice_rsk_pair(&LatticeMatrix::zeros(3, 2), false).unwrap();
        assert_eq!(pair.w, PathEnv::flat(3, q(2)));
        assert_eq!(pair.g, GTPattern::zeros(3));
        assert_eq!(greene_pair(&LatticeMatrix::zeros(3, 2), false).unwrap(), pair);
    }

    fn arb_matrix(max_rows: usize, max_cols: usize, max_entry: i64) -> impl Strategy<Value = LatticeMatrix> {
        (1..=max_rows, 1..=max_cols).prop_flat_map(move |(r, c)| {
            prop::collection::vec(prop::collection::vec(0..=max_entry, c), r)
                .prop_map(|rows| LatticeMatrix::new(rows.into_iter().map(|r| r.into_iter().map(Rational::integer).collect()).collect()).unwrap())
        })
    }

    /// Up-left ordered sites: columns and rows are each sorted independently.
    fn arb_sites(rows: usize, cols: usize, k: usize) -> impl Strategy<Value = Vec<Site>> {
        (prop::collection::vec(1..=cols + 1, k), prop::collection::vec(1..=rows, k)).prop_map(|(mut c, mut r)| {
            c.sort_unstable();
            r.sort_unstable();
            c.into_iter().zip(r).map(|(c, r)| Site::new(c, r)).collect()
        })
    }

    fn arb_endpoints(rows: usize, cols: usize) -> impl Strategy<Value = (Vec<Site>, Vec<Site>)> {
        (1usize..=3).prop_flat_map(move |k| (arb_sites(rows, cols, k), arb_sites(rows, cols, k)))
    }

    fn matrix_and_endpoints(max_entry: i64) -> impl Strategy<Value = (LatticeMatrix, Vec<Site>, Vec<Site>)> {
        arb_matrix(3, 3, max_entry).prop_flat_map(|a| {
            let (r, c) = (a.rows(), a.cols());
            (Just(a), arb_endpoints(r, c)).prop_map(|(a, (s, e))| (a, s, e))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(300))]

        #[test]
        fn ordinary_sweep_matches_enumeration((a, starts, ends) in matrix_and_endpoints(3)) {
            let dp = lattice_lpp(&a, &starts, &ends, false).ok();
            prop_assert_eq!(dp, brute_force(&a, &starts, &ends));
        }

        #[test]
        fn dual_sweep_matches_enumeration((a, starts, ends) in matrix_and_endpoints(1)) {
            let dp = lattice_lpp(&a, &starts, &ends, true).ok();
            prop_assert_eq!(dp, brute_force_dual(&a, &starts, &ends));
        }

        #[test]
        fn overlap_equals_disjoint((a, starts, ends) in matrix_and_endpoints(3)) {
            if let Ok(v) = lattice_lpp(&a, &starts, &ends, false) {
                prop_assert_eq!(lattice_lpp_overlap(&a, &starts, &ends).unwrap(), v);
            }
        }

        #[test]
        fn embeddings_agree((a, starts, ends) in matrix_and_endpoints(3)) {
            match check_embedding(&a, &starts, &ends, false) {
                Err(LatticeError::NotAdmissible) => {}
                other => prop_assert!(other.unwrap()),
            }
        }

        #[test]
        fn dual_embeddings_agree((a, starts, ends) in matrix_and_endpoints(1)) {
            match check_embedding(&a, &starts, &ends, true) {
                Err(LatticeError::NotAdmissible) => {}
                other => prop_assert!(other.unwrap()),
            }
        }

        #[test]
        fn greene_matches_bumping(a in arb_matrix(5, 5, 4)) {
            let (gq, gp) = greene_tableaux(&a, false).unwrap();
            let (bq, bp) = bumping_rsk(&a, false).unwrap();
            prop_assert!(gq.is_semistandard() && gp.is_semistandard());
            prop_assert_eq!(gq.shape(), gp.shape());
            prop_assert_eq!((gq, gp), (bq, bp));
        }

        #[test]
        fn dual_greene_matches_bumping(a in arb_matrix(5, 5, 1)) {
            let (gq, gp) = greene_tableaux(&a, true).unwrap();
            let (bq, bp) = bumping_rsk(&a, true).unwrap();
            prop_assert!(gq.is_semistandard() && gp.is_semistandard());
            prop_assert_eq!(gq.transpose().shape(), gp.shape());
            prop_assert_eq!((gq, gp), (bq, bp));
        }

        #[test]
        fn pair_routes_agree(a in arb_matrix(3, 3, 3)) {
            let pair = lattice_rsk_pair(&a, false).unwrap();
            prop_assert_eq!(&greene_pair(&a, false).unwrap(), &pair);
            let (q_tab, p_tab) = greene_tableaux(&a, false).unwrap();
            prop_assert_eq!(tableau_paths(&q_tab, a.rows(), a.cols()).unwrap(), pair.w);
            prop_assert_eq!(tableau_pattern(&p_tab, a.rows()), pair.g);
        }

        #[test]
        fn dual_pair_routes_agree(a in arb_matrix(3, 3, 1)) {
            let pair = lattice_rsk_pair(&a, true).unwrap();
            prop_assert_eq!(&greene_pair(&a, true).unwrap(), &pair);
            let (_, p_tab) = greene_tableaux(&a, true).unwrap();
            prop_assert_eq!(tableau_pattern(&p_tab, a.rows()), pair.g);
        }

        #[test]
        fn real_entries_follow_the_same_pair(rows in prop::collection::vec(prop::collection::vec(0i64..=6, 3), 3)) {
            let a = LatticeMatrix::new(rows.iter().map(|r| r.iter().map(|&v| Rational::new(v, 2)).collect()).collect()).unwrap();
            prop_assert_eq!(greene_pair(&a, false).unwrap(), lattice_rsk_pair(&a, false).unwrap());
        }

        #[test]
        fn staggered_values_match_cadlag(a in arb_matrix(3, 4, 3), t_num in 0i64..=8, pick_j in 0usize..6, pick_k in 0usize..6) {
            let n = a.rows();
            let j = 1 + pick_j % n;
            let k = 1 + pick_k % (n + 1 - j);
            let t = Rational::new(t_num, 2).min(Rational::from(a.cols()));
            let env = embed_matrix(&a);
            let lhs = lpp_multi(&env, &EndpointSpec::points(&Rational::zero(), n, &t, j, k)).unwrap();
            let ft = t.floor().to_i64().unwrap() as usize;
            let rhs = if ft == 0 {
                Rational::zero()
            } else {
                let kk = k.min(ft);
                lattice_lpp(&a.truncate_cols(ft), &staggered_starts(Site::new(1, n), kk), &staggered_ends(Site::new(ft, j), kk), false).unwrap()
            };
            prop_assert_eq!(lhs, LppValue::Finite(rhs));
        }
    }
}
