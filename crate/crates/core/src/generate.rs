//! Seeded random instances: envs in each restriction class, mixed envs on a
//! half-integer grid, interlacing patterns and small matrices.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::env::{EnvClass, LineSpec, PathEnv};
use crate::lattice::LatticeMatrix;
use crate::rational::Rational;
use crate::rsk::GTPattern;

fn half(k: usize) -> Rational {
    Rational::new(k as i64, 2)
}

/// An env of the given class on `[0, t]` with masses and slopes at most
/// `max_entry`. Continuous envs use integer slopes on half-unit pieces.
pub fn class_env(rng: &mut ChaCha8Rng, class: EnvClass, n: usize, t: usize, max_entry: i64) -> PathEnv {
    let mut specs = vec![LineSpec::default(); n];
    match class {
        EnvClass::Continuous => {
            for spec in &mut specs {
                spec.segments = (0..2 * t)
                    .map(|j| (half(j), half(j + 1), Rational::integer(rng.gen_range(0..=max_entry))))
                    .collect();
            }
        }
        EnvClass::UnitJumps => {
            let mut times: Vec<usize> = (0..=2 * t).collect();
            times.shuffle(rng);
            let count = rng.gen_range(0..=times.len().min(3 * n));
            for &time in &times[..count] {
                specs[rng.gen_range(0..n)].jumps.push((half(time), Rational::one()));
            }
        }
        EnvClass::RealJumpsIntegerTimes => {
            for spec in &mut specs {
                spec.jumps = (0..=t)
                    .map(|time| {
                        let den = rng.gen_range(1..=3);
                        (Rational::from(time), Rational::new(rng.gen_range(0..=max_entry * den), den))
                    })
                    .collect();
            }
        }
        EnvClass::IntegerJumpsIntegerTimes => {
            for spec in &mut specs {
                spec.jumps = (0..=t).map(|time| (Rational::from(time), Rational::integer(rng.gen_range(0..=max_entry)))).collect();
            }
        }
        EnvClass::BernoulliPaths => {
            for spec in &mut specs {
                spec.segments = (0..t)
                    .filter(|_| rng.gen_bool(0.5))
                    .map(|s| (Rational::from(s), Rational::from(s + 1), Rational::one()))
                    .collect();
            }
        }
    }
    PathEnv::new(n, Rational::from(t), &specs).expect("generated masses are nonnegative")
}

/// Atoms and slopes on the half-integer grid of `[0, t]`; about half the
/// cells carry mass.
pub fn mixed_env(rng: &mut ChaCha8Rng, n: usize, t: usize, max_entry: i64) -> PathEnv {
    let mut specs = vec![LineSpec::default(); n];
    for spec in &mut specs {
        for j in 0..=2 * t {
            if rng.gen_bool(0.4) {
                spec.jumps.push((half(j), Rational::integer(rng.gen_range(1..=max_entry))));
            }
            if j < 2 * t && rng.gen_bool(0.3) {
                spec.segments.push((half(j), half(j + 1), Rational::integer(rng.gen_range(1..=max_entry))));
            }
        }
    }
    PathEnv::new(n, Rational::from(t), &specs).expect("generated masses are nonnegative")
}

/// Integer interlacing pattern of depth `n` with entries in `0..=max_entry`.
pub fn gt_pattern(rng: &mut ChaCha8Rng, n: usize, max_entry: i64) -> GTPattern {
    let mut bottom: Vec<i64> = (0..n).map(|_| rng.gen_range(0..=max_entry)).collect();
    bottom.sort_unstable_by(|a, b| b.cmp(a));
    let mut rows: Vec<Vec<i64>> = vec![Vec::new(); n];
    rows[n - 1] = bottom;
    for j in (1..n).rev() {
        rows[j - 1] = (0..j).map(|i| rng.gen_range(rows[j][i + 1]..=rows[j][i])).collect();
    }
    GTPattern::new(rows.into_iter().map(|r| r.into_iter().map(Rational::integer).collect()).collect()).expect("triangular rows")
}

/// Matrix with `rows × cols` entries in `0..=max_entry`.
pub fn matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, max_entry: i64) -> LatticeMatrix {
    let entries = (0..rows).map(|_| (0..cols).map(|_| Rational::integer(rng.gen_range(0..=max_entry))).collect()).collect();
    LatticeMatrix::new(entries).expect("nonnegative entries")
}
