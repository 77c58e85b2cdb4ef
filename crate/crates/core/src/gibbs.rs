//! Bernoulli walk samplers, the uniform law on ordered Bernoulli tuples with
//! a fixed endpoint, and the chi-square harness for the Gibbs, Burke and
//! law-of-large-numbers checks.
//!
//! Randomness comes from ChaCha8 seeded with a 64-bit seed; sample `i` of a
//! batch draws from stream `i`, so batches are reproducible and independent
//! of evaluation order.

use std::collections::{BTreeMap, HashMap};

use num_traits::ToPrimitive;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};
use thiserror::Error;

use crate::env::{GridPoint, LineSpec, PathEnv};
use crate::lpp::{lpp, LppValue};
use crate::pitman::melon_iterated;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GibbsError {
    #[error("drift {0} outside [0, 1]")]
    BadDrift(Rational),
    #[error("need at least one line and one step")]
    Empty,
    #[error("endpoint must be nonincreasing, nonnegative and at most t: {0:?}")]
    BadEndpoint(Vec<i64>),
    #[error("state space too large for enumeration (n = {n}, t = {t})")]
    StateSpaceTooLarge { n: usize, t: usize },
    #[error("drift vectors are not rearrangements of each other")]
    DriftMismatch,
    #[error("count overflow")]
    Overflow,
}

/// Per-line step probabilities, each in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DriftVector(Vec<Rational>);

impl DriftVector {
    pub fn new(d: Vec<Rational>) -> Result<Self, GibbsError> {
        if d.is_empty() {
            return Err(GibbsError::Empty);
        }
        if let Some(bad) = d.iter().find(|p| p.is_negative() || **p > Rational::one()) {
            return Err(GibbsError::BadDrift(bad.clone()));
        }
        Ok(DriftVector(d))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    /// Order statistics, largest first.
    pub fn sorted_desc(&self) -> Vec<Rational> {
        let mut d = self.0.clone();
        d.sort_by(|a, b| b.cmp(a));
        d
    }
}

/// Thresholds of the statistical checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StatConfig {
    /// Chi-square tests pass when the (aggregated) p-value exceeds this.
    pub p_threshold: f64,
    /// An endpoint enters the Gibbs test once its expected count per cell
    /// reaches this.
    pub min_expected_per_cell: f64,
    /// Largest allowed `|WY_i(t)/t − d°_i|`.
    pub lln_tolerance: f64,
}

impl Default for StatConfig {
    fn default() -> Self {
        StatConfig { p_threshold: 0.001, min_expected_per_cell: 5.0, lln_tolerance: 0.05 }
    }
}

/// Which side of the threshold passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PassRule {
    Above,
    Below,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatReport {
    pub test_name: String,
    pub statistic: f64,
    pub threshold: f64,
    pub rule: PassRule,
    pub samples: u64,
    pub pass: bool,
    pub seed: u64,
    /// Per-coordinate deviations (LLN) or per-endpoint p-values (Gibbs).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub detail: Vec<f64>,
}

impl StatReport {
    fn new(test_name: &str, statistic: f64, threshold: f64, rule: PassRule, samples: u64, seed: u64) -> Self {
        let pass = match rule {
            PassRule::Above => statistic > threshold,
            PassRule::Below => statistic < threshold,
        };
        StatReport { test_name: test_name.into(), statistic, threshold, rule, samples, pass, seed, detail: Vec::new() }
    }
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn bernoulli(rng: &mut ChaCha8Rng, p: &Rational) -> bool {
    if p.is_zero() {
        return false;
    }
    if *p == Rational::one() {
        return true;
    }
    match (p.numer().to_u64(), p.denom().to_u64()) {
        (Some(num), Some(den)) => rng.gen_range(0..den) < num,
        _ => rng.gen::<f64>() < p.to_f64(),
    }
}

/// Continuous env whose line `i` has slope 0/1 on each unit step.
pub fn env_from_steps(steps: &[Vec<bool>]) -> PathEnv {
    let t = steps.first().map_or(0, Vec::len);
    let specs: Vec<LineSpec> = steps
        .iter()
        .map(|line| LineSpec {
            jumps: vec![],
            segments: line
                .iter()
                .enumerate()
                .filter(|(_, &up)| up)
                .map(|(s, _)| (Rational::from(s), Rational::from(s + 1), Rational::one()))
                .collect(),
        })
        .collect();
    PathEnv::new(steps.len(), Rational::from(t), &specs).expect("unit slopes")
}

fn walks_from(rng: &mut ChaCha8Rng, d: &DriftVector, t: usize) -> PathEnv {
    let steps: Vec<Vec<bool>> = d.values().iter().map(|p| (0..t).map(|_| bernoulli(rng, p)).collect()).collect();
    env_from_steps(&steps)
}

/// Independent Bernoulli walks, line `i` with step mean `d_i`, on `[0, t]`.
pub fn sample_walks(d: &DriftVector, t: usize, seed: u64) -> Result<PathEnv, GibbsError> {
    if t == 0 {
        return Err(GibbsError::Empty);
    }
    Ok(walks_from(&mut stream_rng(seed, 0), d, t))
}

/// Values of each line at times `0..=t`; `None` unless all are integers.
pub fn integer_values(env: &PathEnv) -> Option<Vec<Vec<i64>>> {
    let t = env.horizon().to_i64()? as usize;
    env.lines().iter().map(|l| (0..=t).map(|s| l.value(&Rational::from(s)).to_i64()).collect()).collect()
}

/// Counts completions of ordered Bernoulli tuples towards a fixed endpoint.
struct NuCounter {
    target: Vec<i64>,
    t: usize,
    memo: HashMap<(usize, Vec<i64>), u128>,
}

impl NuCounter {
    fn new(x: &[i64], t: usize) -> Result<Self, GibbsError> {
        let ordered = x.windows(2).all(|w| w[0] >= w[1]);
        if x.is_empty() || !ordered || x.iter().any(|&v| v < 0 || v as usize > t) {
            return Err(GibbsError::BadEndpoint(x.to_vec()));
        }
        Ok(NuCounter { target: x.to_vec(), t, memo: HashMap::new() })
    }

    /// Step vectors from `state` keeping weak order and reachability.
    fn moves(&self, time: usize, state: &[i64]) -> Vec<Vec<i64>> {
        let left = (self.t - time - 1) as i64;
        let mut out = Vec::new();
        for mask in 0u32..(1 << state.len()) {
            let next: Vec<i64> = state.iter().enumerate().map(|(i, v)| v + i64::from((mask >> i) & 1 == 1)).collect();
            let ordered = next.windows(2).all(|w| w[0] >= w[1]);
            let reachable = next.iter().zip(&self.target).all(|(v, x)| v <= x && x - v <= left);
            if ordered && reachable {
                out.push(next);
            }
        }
        out
    }

    fn count(&mut self, time: usize, state: Vec<i64>) -> Result<u128, GibbsError> {
        if time == self.t {
            return Ok(u128::from(state == self.target));
        }
        if let Some(&c) = self.memo.get(&(time, state.clone())) {
            return Ok(c);
        }
        let mut total = 0u128;
        for next in self.moves(time, &state) {
            total = total.checked_add(self.count(time + 1, next)?).ok_or(GibbsError::Overflow)?;
        }
        self.memo.insert((time, state), total);
        Ok(total)
    }
}

/// Number of weakly ordered Bernoulli tuples from 0 to `x` in `t` steps.
pub fn count_nu(x: &[i64], t: usize) -> Result<u128, GibbsError> {
    let mut counter = NuCounter::new(x, t)?;
    counter.count(0, vec![0; x.len()])
}

fn sample_nu_from(counter: &mut NuCounter, rng: &mut ChaCha8Rng) -> Result<Vec<Vec<i64>>, GibbsError> {
    let n = counter.target.len();
    let mut state = vec![0i64; n];
    let mut path = vec![state.clone()];
    let total = counter.count(0, state.clone())?;
    if total == 0 {
        return Err(GibbsError::BadEndpoint(counter.target.clone()));
    }
    for time in 0..counter.t {
        let options = counter.moves(time, &state);
        let weights: Vec<u128> =
            options.iter().map(|o| counter.count(time + 1, o.clone())).collect::<Result<_, _>>()?;
        let mut pick = rng.gen_range(0..weights.iter().sum::<u128>());
        let idx = weights.iter().position(|&w| {
            if pick < w {
                true
            } else {
                pick -= w;
                false
            }
        });
        state = options[idx.expect("pick within total")].clone();
        path.push(state.clone());
    }
    Ok(path)
}

fn env_from_values(path: &[Vec<i64>]) -> PathEnv {
    let n = path.first().map_or(0, Vec::len);
    let steps: Vec<Vec<bool>> = (0..n).map(|i| path.windows(2).map(|w| w[1][i] > w[0][i]).collect()).collect();
    env_from_steps(&steps)
}

/// Uniform sample from the ordered tuples counted by [`count_nu`].
pub fn sample_nu(x: &[i64], t: usize, seed: u64) -> Result<PathEnv, GibbsError> {
    let mut counter = NuCounter::new(x, t)?;
    let path = sample_nu_from(&mut counter, &mut stream_rng(seed, 0))?;
    Ok(env_from_values(&path))
}

/// Every tuple counted by [`count_nu`], as values at integer times.
pub fn enumerate_nu(x: &[i64], t: usize) -> Result<Vec<Vec<Vec<i64>>>, GibbsError> {
    let mut counter = NuCounter::new(x, t)?;
    let mut out = Vec::new();
    let mut path = vec![vec![0i64; x.len()]];
    fn walk(counter: &mut NuCounter, path: &mut Vec<Vec<i64>>, out: &mut Vec<Vec<Vec<i64>>>) -> Result<(), GibbsError> {
        let time = path.len() - 1;
        let state = path[time].clone();
        if time == counter.t {
            if state == counter.target {
                out.push(path.clone());
            }
            return Ok(());
        }
        for next in counter.moves(time, &state) {
            if counter.count(time + 1, next.clone())? > 0 {
                path.push(next);
                walk(counter, path, out)?;
                path.pop();
            }
        }
        Ok(())
    }
    walk(&mut counter, &mut path, &mut out)?;
    Ok(out)
}

fn chi_square_p(statistic: f64, df: usize) -> f64 {
    if df == 0 {
        return 1.0;
    }
    let dist = ChiSquared::new(df as f64).expect("positive degrees of freedom");
    dist.sf(statistic)
}

/// Fisher's combination of independent p-values.
pub fn fisher_combine(p_values: &[f64]) -> f64 {
    if p_values.is_empty() {
        return 1.0;
    }
    let statistic: f64 = p_values.iter().map(|p| -2.0 * p.max(f64::MIN_POSITIVE).ln()).sum();
    chi_square_p(statistic, 2 * p_values.len())
}

/// Goodness of fit of `observed` counts against the uniform law on `cells`
/// cells (unobserved cells count as zero).
pub fn uniform_chi_square(observed: &[u64], cells: u128) -> f64 {
    let total: u64 = observed.iter().sum();
    let expected = total as f64 / cells as f64;
    let seen: f64 = observed.iter().map(|&o| (o as f64 - expected).powi(2) / expected).sum();
    let unseen = (cells - observed.len() as u128) as f64 * expected;
    chi_square_p(seen + unseen, (cells - 1) as usize)
}

/// Two-sample chi-square on integer-valued outcomes; adjacent values are
/// merged until every expected cell count reaches `min_expected`.
pub fn two_sample_chi_square(a: &BTreeMap<i64, u64>, b: &BTreeMap<i64, u64>, min_expected: f64) -> f64 {
    let (na, nb) = (a.values().sum::<u64>() as f64, b.values().sum::<u64>() as f64);
    let keys: Vec<i64> = a.keys().chain(b.keys()).copied().collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let share = na.min(nb) / (na + nb);
    let mut cells: Vec<(f64, f64)> = Vec::new();
    let mut pending = (0.0, 0.0);
    for key in keys {
        pending.0 += *a.get(&key).unwrap_or(&0) as f64;
        pending.1 += *b.get(&key).unwrap_or(&0) as f64;
        if (pending.0 + pending.1) * share >= min_expected {
            cells.push(pending);
            pending = (0.0, 0.0);
        }
    }
    if pending.0 + pending.1 > 0.0 {
        match cells.last_mut() {
            Some(last) => {
                last.0 += pending.0;
                last.1 += pending.1;
            }
            None => cells.push(pending),
        }
    }
    let total = na + nb;
    let statistic: f64 = cells
        .iter()
        .map(|&(oa, ob)| {
            let col = oa + ob;
            let (ea, eb) = (col * na / total, col * nb / total);
            (oa - ea).powi(2) / ea + (ob - eb).powi(2) / eb
        })
        .sum();
    chi_square_p(statistic, cells.len().saturating_sub(1))
}

/// Melon values at integer times, grouped by the endpoint `WY(t)`.
fn melon_histograms(d: &DriftVector, t: usize, samples: u64, seed: u64, first_stream: u64) -> BTreeMap<Vec<i64>, HashMap<Vec<Vec<i64>>, u64>> {
    let mut by_end: BTreeMap<Vec<i64>, HashMap<Vec<Vec<i64>>, u64>> = BTreeMap::new();
    for i in 0..samples {
        let walks = walks_from(&mut stream_rng(seed, first_stream + i), d, t);
        let melon = melon_iterated(&walks).env;
        let values = integer_values(&melon).expect("Bernoulli melons stay integer at integer times");
        let end: Vec<i64> = values.iter().map(|line| line[t]).collect();
        let by_time: Vec<Vec<i64>> = (0..=t).map(|s| values.iter().map(|line| line[s]).collect()).collect();
        *by_end.entry(end).or_default().entry(by_time).or_default() += 1;
    }
    by_end
}

fn check_small(n: usize, t: usize) -> Result<(), GibbsError> {
    if n > 3 || t > 6 {
        return Err(GibbsError::StateSpaceTooLarge { n, t });
    }
    if t == 0 {
        return Err(GibbsError::Empty);
    }
    Ok(())
}

/// Conditional uniformity of the melon of Bernoulli walks given its
/// endpoint: one chi-square per well-populated endpoint, combined by Fisher.
pub fn test_gibbs(d: &DriftVector, t: usize, samples: u64, seed: u64, config: &StatConfig) -> Result<StatReport, GibbsError> {
    check_small(d.n(), t)?;
    let mut p_values = Vec::new();
    for (end, hist) in melon_histograms(d, t, samples, seed, 0) {
        let cells = count_nu(&end, t)?;
        let total: u64 = hist.values().sum();
        if cells < 2 || (total as f64) < config.min_expected_per_cell * cells as f64 {
            continue;
        }
        let observed: Vec<u64> = hist.values().copied().collect();
        p_values.push(uniform_chi_square(&observed, cells));
    }
    let mut report = StatReport::new("gibbs", fisher_combine(&p_values), config.p_threshold, PassRule::Above, samples, seed);
    report.detail = p_values;
    Ok(report)
}

/// Conditional laws of the melon path given its endpoint agree under two
/// drift vectors (per-endpoint two-sample tests, combined by Fisher).
pub fn test_drift_independence(
    d: &DriftVector,
    e: &DriftVector,
    t: usize,
    samples: u64,
    seed: u64,
    config: &StatConfig,
) -> Result<StatReport, GibbsError> {
    if d.n() != e.n() {
        return Err(GibbsError::DriftMismatch);
    }
    check_small(d.n(), t)?;
    let left = melon_histograms(d, t, samples, seed, 0);
    let right = melon_histograms(e, t, samples, seed, samples);
    let mut p_values = Vec::new();
    for (end, a) in &left {
        let Some(b) = right.get(end) else { continue };
        let tuples = enumerate_nu(end, t)?;
        let index = |h: &HashMap<Vec<Vec<i64>>, u64>| -> BTreeMap<i64, u64> {
            tuples.iter().enumerate().map(|(i, tuple)| (i as i64, *h.get(tuple).unwrap_or(&0))).collect()
        };
        let (ia, ib) = (index(a), index(b));
        let smaller = ia.values().sum::<u64>().min(ib.values().sum::<u64>()) as f64;
        if tuples.len() < 2 || smaller < config.min_expected_per_cell * tuples.len() as f64 {
            continue;
        }
        p_values.push(two_sample_chi_square(&ia, &ib, config.min_expected_per_cell));
    }
    let mut report =
        StatReport::new("drift-independence", fisher_combine(&p_values), config.p_threshold, PassRule::Above, samples, seed);
    report.detail = p_values;
    Ok(report)
}

/// Last passage value `Y[(0, n) → (t, 1)]` of Bernoulli walks.
pub fn top_passage_value(walks: &PathEnv) -> i64 {
    let n = walks.n();
    let spec_start = GridPoint::new(Rational::zero(), n);
    let spec_end = GridPoint::new(walks.horizon().clone(), 1);
    match lpp(walks, &spec_start, &spec_end).expect("corner endpoints are in range") {
        LppValue::Finite(v) => v.to_i64().expect("integer passage value"),
        LppValue::NegInf => unreachable!("corner to corner always connects"),
    }
}

/// The law of `Y[(0,n) → (t,1)]` only depends on the drifts as a multiset.
pub fn test_burke(d: &DriftVector, e: &DriftVector, t: usize, samples: u64, seed: u64, config: &StatConfig) -> Result<StatReport, GibbsError> {
    if d.sorted_desc() != e.sorted_desc() {
        return Err(GibbsError::DriftMismatch);
    }
    if t == 0 {
        return Err(GibbsError::Empty);
    }
    let histogram = |drift: &DriftVector, first: u64| -> BTreeMap<i64, u64> {
        let mut h = BTreeMap::new();
        for i in 0..samples {
            let walks = walks_from(&mut stream_rng(seed, first + i), drift, t);
            *h.entry(top_passage_value(&walks)).or_default() += 1;
        }
        h
    };
    let (a, b) = (histogram(d, 0), histogram(e, samples));
    let p = two_sample_chi_square(&a, &b, config.min_expected_per_cell);
    Ok(StatReport::new("burke", p, config.p_threshold, PassRule::Above, samples, seed))
}

/// `WY(t)/t` against the order statistics of the drift.
pub fn test_lln(d: &DriftVector, t: usize, seed: u64, config: &StatConfig) -> Result<StatReport, GibbsError> {
    let walks = sample_walks(d, t, seed)?;
    let melon = melon_iterated(&walks).env;
    let horizon = Rational::from(t);
    let deviations: Vec<f64> = melon
        .lines()
        .iter()
        .zip(d.sorted_desc())
        .map(|(line, target)| ((line.value(&horizon) / horizon.clone()) - target).abs().to_f64())
        .collect();
    let worst = deviations.iter().copied().fold(0.0, f64::max);
    let mut report = StatReport::new("lln", worst, config.lln_tolerance, PassRule::Below, 1, seed);
    report.detail = deviations;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::EnvClass;
    use crate::env::fixtures::q;
    use crate::pitman::is_pitman_ordered;
    use proptest::prelude::*;

    fn drift(d: &[(i64, i64)]) -> DriftVector {
        DriftVector::new(d.iter().map(|&(a, b)| Rational::new(a, b)).collect()).unwrap()
    }

    fn binomial(n: u128, k: u128) -> u128 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    /// Brute force over all step sequences.
    fn count_oracle(x: &[i64], t: usize) -> u128 {
        let n = x.len();
        let mut count = 0;
        for code in 0u64..(1 << (n * t)) {
            let mut values = vec![0i64; n];
            let mut ok = true;
            for s in 0..t {
                for (i, v) in values.iter_mut().enumerate() {
                    *v += ((code >> (i * t + s)) & 1) as i64;
                }
                ok &= values.windows(2).all(|w| w[0] >= w[1]);
            }
            if ok && values == x {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn drift_validation() {
        assert_eq!(DriftVector::new(vec![q(2)]), Err(GibbsError::BadDrift(q(2))));
        assert_eq!(DriftVector::new(vec![]), Err(GibbsError::Empty));
        assert_eq!(drift(&[(3, 10), (7, 10)]).sorted_desc(), vec![Rational::new(7, 10), Rational::new(3, 10)]);
    }

    #[test]
    fn walk_examples() {
        let flat = sample_walks(&drift(&[(0, 1), (0, 1)]), 5, 1).unwrap();
        assert_eq!(flat, PathEnv::flat(2, q(5)));
        let full = sample_walks(&drift(&[(1, 1), (1, 1), (1, 1)]), 4, 9).unwrap();
        assert!(full.lines().iter().all(|l| l.value(&q(4)) == q(4)));
        let half = drift(&[(1, 2), (1, 2)]);
        assert_eq!(sample_walks(&half, 4, 7).unwrap(), sample_walks(&half, 4, 7).unwrap());
        assert!(sample_walks(&half, 4, 7).unwrap().class_check(EnvClass::BernoulliPaths));
        assert_eq!(sample_walks(&half, 0, 7), Err(GibbsError::Empty));
    }

    #[test]
    fn count_examples() {
        for t in 0..6 {
            for k in 0..=t as i64 {
                assert_eq!(count_nu(&[k], t).unwrap(), binomial(t as u128, k as u128));
            }
        }
        assert_eq!(count_nu(&[1, 0], 1).unwrap(), 1);
        // Weak ordering admits both walks stepping at time 1 or both at time 2,
        // and the top stepping first.
        assert_eq!(count_nu(&[1, 1], 2).unwrap(), 3);
        assert_eq!(count_nu(&[0, 1], 2), Err(GibbsError::BadEndpoint(vec![0, 1])));
        assert_eq!(count_nu(&[3], 2), Err(GibbsError::BadEndpoint(vec![3])));
        for x in [vec![2, 1], vec![3, 1, 0], vec![2, 2, 1], vec![1, 1, 1]] {
            assert_eq!(count_nu(&x, 3).unwrap(), count_oracle(&x, 3), "{x:?}");
            assert_eq!(enumerate_nu(&x, 3).unwrap().len() as u128, count_oracle(&x, 3));
        }
    }

    #[test]
    fn sample_nu_examples() {
        assert_eq!(sample_nu(&[0, 0], 3, 5).unwrap(), PathEnv::flat(2, q(3)));
        let unique = sample_nu(&[2, 2], 2, 5).unwrap();
        assert!(unique.lines().iter().all(|l| l.slopes().iter().all(|s| s == &q(1))));
        assert_eq!(sample_nu(&[1, 0], 1, 3).unwrap(), env_from_steps(&[vec![true], vec![false]]));
    }

    #[test]
    fn sample_nu_is_uniform_on_three_tuples() {
        let mut counter = NuCounter::new(&[1, 1], 2).unwrap();
        let mut freq: HashMap<Vec<Vec<i64>>, u64> = HashMap::new();
        let n = 100_000u64;
        for i in 0..n {
            let path = sample_nu_from(&mut counter, &mut stream_rng(11, i)).unwrap();
            *freq.entry(path).or_default() += 1;
        }
        assert_eq!(freq.len(), 3);
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for &c in freq.values() {
            assert!((c as f64 - n as f64 / 3.0).abs() < 3.0 * sigma, "{c}");
        }
    }

    #[test]
    fn sample_nu_chi_square_over_enumeration() {
        for (x, t) in [(vec![2, 1], 4), (vec![3, 1], 4), (vec![2, 2], 4), (vec![3], 4)] {
            let mut counter = NuCounter::new(&x, t).unwrap();
            let cells = count_nu(&x, t).unwrap();
            let mut freq: HashMap<Vec<Vec<i64>>, u64> = HashMap::new();
            for i in 0..20_000 {
                *freq.entry(sample_nu_from(&mut counter, &mut stream_rng(3, i)).unwrap()).or_default() += 1;
            }
            let observed: Vec<u64> = freq.values().copied().collect();
            assert!(uniform_chi_square(&observed, cells) > 0.001, "{x:?}");
        }
    }

    /// Exact means of `ν_t(x)` at each time and line, by enumeration.
    fn nu_means(x: &[i64], t: usize) -> Vec<Vec<f64>> {
        let tuples = enumerate_nu(x, t).unwrap();
        let count = tuples.len() as f64;
        (0..=t).map(|s| (0..x.len()).map(|i| tuples.iter().map(|p| p[s][i] as f64).sum::<f64>() / count).collect()).collect()
    }

    #[test]
    fn nu_is_stochastically_monotone_in_the_endpoint() {
        let t = 5;
        let endpoints: Vec<Vec<i64>> =
            (0..=t as i64).flat_map(|a| (0..=a).map(move |b| vec![a, b])).collect();
        for x in &endpoints {
            for y in &endpoints {
                if x.iter().zip(y).all(|(a, b)| a <= b) {
                    let (mx, my) = (nu_means(x, t), nu_means(y, t));
                    for (rx, ry) in mx.iter().zip(&my) {
                        assert!(rx.iter().zip(ry).all(|(a, b)| a <= &(b + 1e-12)), "{x:?} vs {y:?}");
                    }
                }
            }
        }
    }

    #[test]
    fn statistics_helpers() {
        assert_eq!(fisher_combine(&[]), 1.0);
        assert!((fisher_combine(&[1.0]) - 1.0).abs() < 1e-12);
        assert!(fisher_combine(&[1e-6, 1e-6]) < 0.001);
        assert!((uniform_chi_square(&[10, 10, 10], 3) - 1.0).abs() < 1e-12);
        assert!(uniform_chi_square(&[100], 4) < 1e-6);
        let a: BTreeMap<i64, u64> = [(0, 500), (1, 500)].into();
        let b: BTreeMap<i64, u64> = [(0, 900), (1, 100)].into();
        assert!((two_sample_chi_square(&a, &a, 5.0) - 1.0).abs() < 1e-12);
        assert!(two_sample_chi_square(&a, &b, 5.0) < 1e-6);
        let sparse: BTreeMap<i64, u64> = [(0, 2), (5, 1), (9, 997)].into();
        assert!(two_sample_chi_square(&sparse, &sparse, 5.0) > 0.99);
    }

    #[test]
    fn gibbs_single_line_and_small_drift() {
        let config = StatConfig::default();
        let one = test_gibbs(&drift(&[(1, 2)]), 4, 5_000, 1, &config).unwrap();
        assert!(one.pass, "{one:?}");
        let two = test_gibbs(&drift(&[(1, 2), (1, 2)]), 4, 20_000, 2, &config).unwrap();
        assert!(two.pass && !two.detail.is_empty(), "{two:?}");
        assert_eq!(
            test_gibbs(&drift(&[(1, 2); 4]), 4, 10, 1, &config),
            Err(GibbsError::StateSpaceTooLarge { n: 4, t: 4 })
        );
    }

    #[test]
    fn chi_square_separates_uniform_from_skewed() {
        // Raw walks that happen to be ordered are uniform given their endpoint
        // (equal drifts make every step sequence equally likely).
        let d = drift(&[(1, 2), (1, 2)]);
        let mut hist: HashMap<Vec<Vec<i64>>, u64> = HashMap::new();
        let t = 4;
        let mut sorted_count = 0;
        for i in 0..20_000 {
            let walks = walks_from(&mut stream_rng(5, i), &d, t);
            let values = integer_values(&walks).unwrap();
            let tuple: Vec<Vec<i64>> = (0..=t).map(|s| values.iter().map(|l| l[s]).collect()).collect();
            if tuple.iter().all(|v| v.windows(2).all(|w| w[0] >= w[1])) && tuple[t] == vec![2, 1] {
                sorted_count += 1;
                *hist.entry(tuple).or_default() += 1;
            }
        }
        assert!(sorted_count > 0);
        let observed: Vec<u64> = hist.values().copied().collect();
        let cells = count_nu(&[2, 1], t).unwrap();
        assert!(uniform_chi_square(&observed, cells) > 0.001);
        let skewed: Vec<u64> = (0..cells as u64).map(|i| if i == 0 { 400 } else { 100 }).collect();
        assert!(uniform_chi_square(&skewed, cells) < 1e-6);
    }

    #[test]
    fn drift_independence_of_conditional_laws() {
        let report = test_drift_independence(&drift(&[(1, 2), (1, 2)]), &drift(&[(3, 10), (4, 5)]), 4, 30_000, 4, &StatConfig::default()).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn burke_examples() {
        let config = StatConfig::default();
        let d = drift(&[(3, 10), (7, 10)]);
        assert!(test_burke(&d, &d, 6, 5_000, 1, &config).unwrap().pass);
        assert!(test_burke(&d, &drift(&[(7, 10), (3, 10)]), 10, 10_000, 2, &config).unwrap().pass);
        assert_eq!(test_burke(&d, &drift(&[(1, 2), (1, 2)]), 10, 10, 1, &config), Err(GibbsError::DriftMismatch));
    }

    #[test]
    fn lln_examples() {
        let config = StatConfig::default();
        let ones = test_lln(&drift(&[(1, 1), (1, 1)]), 50, 1, &config).unwrap();
        assert_eq!(ones.detail, vec![0.0, 0.0]);
        let zeros = test_lln(&drift(&[(0, 1), (0, 1), (0, 1)]), 50, 1, &config).unwrap();
        assert!(zeros.pass && zeros.statistic == 0.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn melons_of_walks_stay_bernoulli(seed in any::<u64>(), n in 1usize..=3, t in 1usize..=8, p in 0i64..=4) {
            let d = DriftVector::new(vec![Rational::new(p, 4); n]).unwrap();
            let walks = sample_walks(&d, t, seed).unwrap();
            prop_assert!(walks.class_check(EnvClass::BernoulliPaths));
            let melon = melon_iterated(&walks).env;
            prop_assert!(melon.class_check(EnvClass::BernoulliPaths));
            prop_assert!(is_pitman_ordered(&melon));
            prop_assert_eq!(melon.line(1).value(&Rational::from(t)), Rational::from(top_passage_value(&walks)));
        }

        #[test]
        fn count_matches_brute_force(raw in prop::collection::vec(0i64..=3, 1..=2), t in 1usize..=4) {
            let mut x = raw.clone();
            x.sort_unstable_by(|a, b| b.cmp(a));
            prop_assume!(x[0] as usize <= t);
            prop_assert_eq!(count_nu(&x, t).unwrap(), count_oracle(&x, t));
        }

        #[test]
        fn sampled_tuples_are_ordered_with_the_endpoint(raw in prop::collection::vec(0i64..=5, 1..=3), seed in any::<u64>()) {
            let mut x = raw.clone();
            x.sort_unstable_by(|a, b| b.cmp(a));
            let env = sample_nu(&x, 5, seed).unwrap();
            prop_assert!(env.class_check(EnvClass::BernoulliPaths));
            let ordered = env.lines().windows(2).all(|w| {
                (0..=5).all(|s| w[0].value(&Rational::from(s)) >= w[1].value(&Rational::from(s)))
            });
            prop_assert!(ordered);
            let ends: Vec<i64> = env.lines().iter().map(|l| l.value(&q(5)).to_i64().unwrap()).collect();
            prop_assert_eq!(ends, x);
        }
    }
}
