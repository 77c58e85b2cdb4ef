//! Finite-horizon RSK: an env maps to its melon plus a Gelfand-Tsetlin
//! pattern of multi-path values; the inverse glues an explicit atomic tail
//! after the melon and applies the lemon.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::env::{EnvError, LineSpec, PathEnv};
use crate::lemon::{lemon_t, LemonError};
use crate::lpp::{lpp_multi, EndpointSpec, LppValue};
use crate::pitman::{is_pitman_ordered, melon_iterated};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RskError {
    #[error("pattern violates interlacing")]
    InvalidGT,
    #[error("pair invariant violated: {0}")]
    InvariantViolation(String),
    #[error("pattern rows have inconsistent lengths")]
    MalformedPattern,
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Lemon(#[from] LemonError),
}

/// Triangular array `g_i(j)`, `1 ≤ i ≤ j ≤ depth`; row `j` has `j` entries.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GTPattern {
    rows: Vec<Vec<Rational>>,
}

impl GTPattern {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self, RskError> {
        if rows.is_empty() || rows.iter().enumerate().any(|(j, row)| row.len() != j + 1) {
            return Err(RskError::MalformedPattern);
        }
        Ok(GTPattern { rows })
    }

    pub fn zeros(depth: usize) -> Self {
        GTPattern { rows: (1..=depth).map(|j| vec![Rational::zero(); j]).collect() }
    }

    pub fn depth(&self) -> usize {
        self.rows.len()
    }

    /// `g_i(j)`.
    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.rows[j - 1][i - 1]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.rows
    }

    /// Bottom row `g(n)`.
    pub fn last_row(&self) -> &[Rational] {
        self.rows.last().expect("nonempty pattern")
    }

    /// `α_g = (n − 1)(g_1(n) − g_n(n))`.
    pub fn alpha(&self) -> Rational {
        let n = self.depth();
        let row = self.last_row();
        Rational::from(n - 1) * (&row[0] - &row[n - 1])
    }

    pub fn is_integral(&self) -> bool {
        self.rows.iter().flatten().all(Rational::is_integer)
    }
}

/// Whether `g_i(j) ≥ g_i(j−1) ≥ g_{i+1}(j)` wherever defined.
pub fn gt_validate(g: &GTPattern) -> bool {
    (2..=g.depth()).all(|j| (1..j).all(|i| g.get(i, j) >= g.get(i, j - 1) && g.get(i, j - 1) >= g.get(i + 1, j)))
}

/// A sorted env with its recording pattern; `w(t) = g(n)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RSKPair {
    pub w: PathEnv,
    pub g: GTPattern,
}

impl RSKPair {
    pub fn validate(&self) -> Result<(), RskError> {
        let n = self.w.n();
        if self.g.depth() != n {
            return Err(RskError::InvariantViolation(format!(
                "pattern depth {} for {n} lines",
                self.g.depth()
            )));
        }
        if !gt_validate(&self.g) {
            return Err(RskError::InvalidGT);
        }
        if !is_pitman_ordered(&self.w) {
            return Err(RskError::InvariantViolation("w is not Pitman ordered".into()));
        }
        let t = self.w.horizon();
        let ends_match = (1..=n).all(|i| &self.w.line(i).value(t) == self.g.get(i, n));
        if !ends_match {
            return Err(RskError::InvariantViolation("w(t) differs from the bottom pattern row".into()));
        }
        Ok(())
    }
}

/// `Σ_{i≤k} g_i(s) = f[(0,n)^k → (t, n−s+1)^k]`.
pub fn g_pattern(env: &PathEnv) -> GTPattern {
    let n = env.n();
    let t = env.horizon();
    let zero = Rational::zero();
    let rows = (1..=n)
        .map(|s| {
            let mut prev = Rational::zero();
            (1..=s)
                .map(|k| {
                    let spec = EndpointSpec::points(&zero, n, t, n - s + 1, k);
                    let total = match lpp_multi(env, &spec).expect("endpoints in range") {
                        LppValue::Finite(v) => v,
                        LppValue::NegInf => unreachable!("k ≤ s paths always fit"),
                    };
                    let entry = &total - &prev;
                    prev = total;
                    entry
                })
                .collect()
        })
        .collect();
    GTPattern { rows }
}

pub fn rsk_t(env: &PathEnv) -> RSKPair {
    RSKPair { w: melon_iterated(env).env, g: g_pattern(env) }
}

/// The atomic tail after time `t`: atoms at offsets `1..=n` from `t`, on
/// lines at or above the offset.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailEnv {
    pub t: Rational,
    pub n: usize,
    /// `(offset, line) → mass`, including zero masses.
    pub atoms: BTreeMap<(usize, usize), Rational>,
}

impl TailEnv {
    pub fn has_negative_atoms(&self) -> bool {
        self.atoms.values().any(Rational::is_negative)
    }

    /// Increments on `[0, n]` in offset time; fails on negative atoms.
    pub fn to_env(&self) -> Result<PathEnv, EnvError> {
        let mut specs = vec![LineSpec::default(); self.n];
        for (&(offset, line), mass) in &self.atoms {
            specs[line - 1].jumps.push((Rational::from(offset), mass.clone()));
        }
        PathEnv::new(self.n, Rational::from(self.n), &specs)
    }

    /// Recovers the pattern from cumulative sums of the tail.
    pub fn pattern(&self, base: &[Rational]) -> GTPattern {
        let n = self.n;
        let alpha = self.atoms[&(1, 1)].clone();
        // value[ℓ][k] = Δg_ℓ(t + k)
        let mut value = vec![vec![Rational::zero(); n + 1]; n + 1];
        for line in 1..=n {
            value[line][0] = base[line - 1].clone();
            for k in 1..=n {
                value[line][k] = &value[line][k - 1] + &self.atoms[&(k, line)];
            }
        }
        let mut rows: Vec<Vec<Rational>> = (1..=n).map(|j| vec![Rational::zero(); j]).collect();
        for ell in 1..=n {
            for j in ell..=n {
                let k = ell + n - j;
                let cumulative: Rational = (1..=ell).map(|i| &value[i][k]).sum();
                let alpha_part: Rational = (1 + k - ell..=k).map(|i| &alpha * &Rational::from(i)).sum();
                let earlier: Rational = (1..ell).map(|i| &rows[j - 1][i - 1]).sum();
                rows[j - 1][ell - 1] = cumulative - alpha_part - earlier;
            }
        }
        GTPattern { rows }
    }
}

/// `Δ_{t,α} g` from its cumulative sums: for `k, ℓ ≤ n`,
/// `Σ_{i≤ℓ} Δg_i(t+k) = Σ_{i=1+(k−ℓ)⁺}^k α·i + Σ_{i≤ℓ} g_i(n − (k−ℓ)⁺)`.
pub fn delta(g: &GTPattern, t: &Rational, alpha: &Rational) -> Result<TailEnv, RskError> {
    if !gt_validate(g) {
        return Err(RskError::InvalidGT);
    }
    let n = g.depth();
    let cumulative = |k: usize, ell: usize| -> Rational {
        let lag = k.saturating_sub(ell);
        let alpha_part: Rational = (1 + lag..=k).map(|i| alpha * &Rational::from(i)).sum();
        let g_part: Rational = (1..=ell).map(|i| g.get(i, n - lag)).sum();
        alpha_part + g_part
    };
    let value = |k: usize, ell: usize| -> Rational {
        if k == 0 {
            return g.get(ell, n).clone();
        }
        let below = if ell == 1 { Rational::zero() } else { cumulative(k, ell - 1) };
        cumulative(k, ell) - below
    };
    let mut atoms = BTreeMap::new();
    for k in 1..=n {
        for ell in 1..=n {
            atoms.insert((k, ell), value(k, ell) - value(k - 1, ell));
        }
    }
    Ok(TailEnv { t: t.clone(), n, atoms })
}

/// `O_t(w, g) = w ⊕ Δ_{t,α_g} g`, on horizon `t + n`.
pub fn o_map(pair: &RSKPair) -> Result<PathEnv, RskError> {
    pair.validate()?;
    let tail = delta(&pair.g, pair.w.horizon(), &pair.g.alpha())?;
    let tail = tail.to_env().map_err(|e| RskError::InvariantViolation(e.to_string()))?;
    Ok(pair.w.concat(&tail)?)
}

/// Restriction to `[0, t]` of the lemon of `O_t(w, g)`. The lemon at horizon
/// `t + n` already equals its limit there: the glued env is flat afterwards.
pub fn rsk_inverse(pair: &RSKPair) -> Result<PathEnv, RskError> {
    let glued = o_map(pair)?;
    let m = lemon_t(&glued, glued.horizon())?;
    Ok(m.restrict(pair.w.horizon())?)
}

/// `Δg[(t+r, n)^k → (t+n, 1)^k] = Σ_{i=max(⌈r⌉, n−k+1)}^n α·i`.
pub fn delta_mass_check(g: &GTPattern, t: &Rational, alpha: &Rational, r: &Rational, k: usize) -> bool {
    let n = g.depth();
    if !r.is_positive() || r > &Rational::from(n) || k == 0 || k > n {
        return false;
    }
    let Ok(tail) = delta(g, t, alpha) else { return false };
    let Ok(env) = tail.to_env() else { return false };
    let spec = EndpointSpec::points(r, n, &Rational::from(n), 1, k);
    let from = (r.ceil().to_i64().expect("small") as usize).max(n - k + 1);
    let expected: Rational = (from..=n).map(|i| alpha * &Rational::from(i)).sum();
    lpp_multi(&env, &spec).ok() == Some(LppValue::Finite(expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::fixtures::{arb_env, atoms, e1, e3, q, slopes};
    use crate::env::EnvClass;
    use crate::pitman::melon_direct;
    use proptest::prelude::*;

    fn pattern(rows: &[&[i64]]) -> GTPattern {
        GTPattern::new(rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect()).unwrap()
    }

    /// Closed-form atom of `Δ_{t,α} g` at `(t + k, ℓ)`, written independently
    /// of the cumulative-sum construction.
    fn atom_formula(g: &GTPattern, alpha: &Rational, k: usize, ell: usize) -> Rational {
        let n = g.depth();
        let gi = |i: usize, j: usize| g.get(i, j).clone();
        if ell > k {
            return Rational::zero();
        }
        if ell == k {
            return alpha + &(1..k).map(|i| gi(i, n) - gi(i, n - 1)).sum::<Rational>();
        }
        let base = n - k + ell;
        let minus: Rational = (1..=ell).map(|i| gi(i, base + 1) - gi(i, base)).sum();
        let plus: Rational = (1..ell).map(|i| gi(i, base) - gi(i, base - 1)).sum();
        alpha - &minus + plus
    }

    #[test]
    fn validation_examples() {
        assert!(gt_validate(&GTPattern::zeros(3)));
        assert!(gt_validate(&pattern(&[&[1], &[2, 0]])));
        assert!(!gt_validate(&pattern(&[&[1], &[0, 0]])));
        assert!(!gt_validate(&pattern(&[&[1], &[2, 2]])));
        assert_eq!(GTPattern::new(vec![vec![q(1)], vec![q(1)]]), Err(RskError::MalformedPattern));
    }

    #[test]
    fn pattern_examples() {
        assert_eq!(g_pattern(&PathEnv::flat(3, q(2))), GTPattern::zeros(3));
        assert_eq!(g_pattern(&e1()), pattern(&[&[1], &[2, 0]]));
        assert_eq!(g_pattern(&e3()), pattern(&[&[1], &[2, 0]]));
        let pair = rsk_t(&e1());
        assert_eq!(pair.w, melon_direct(&e1()).env);
        pair.validate().unwrap();
        let pair = rsk_t(&e3());
        assert_eq!(pair.w, slopes(&[&[1, 1], &[0, 0]]));
        let flat = rsk_t(&PathEnv::flat(2, q(1)));
        assert_eq!(flat, RSKPair { w: PathEnv::flat(2, q(1)), g: GTPattern::zeros(2) });
    }

    #[test]
    fn worked_tail() {
        let g = pattern(&[&[1], &[2, 0]]);
        assert_eq!(g.alpha(), q(2));
        let tail = delta(&g, &q(3), &q(2)).unwrap();
        let nonzero: Vec<_> = tail.atoms.iter().filter(|(_, m)| !m.is_zero()).map(|(&k, m)| (k, m.clone())).collect();
        assert_eq!(nonzero, vec![((1, 1), q(2)), ((2, 1), q(1)), ((2, 2), q(3))]);
        for k in 1..=2 {
            for ell in 1..=2 {
                assert_eq!(tail.atoms[&(k, ell)], atom_formula(&g, &q(2), k, ell));
            }
        }
        assert!(delta_mass_check(&g, &q(3), &q(2), &q(2), 1));
        assert!(delta_mass_check(&g, &q(3), &q(2), &q(1), 2));
        assert!(!delta_mass_check(&g, &q(3), &q(2), &q(3), 1));
    }

    #[test]
    fn zero_pattern_tail_is_the_alpha_staircase() {
        let tail = delta(&GTPattern::zeros(3), &q(1), &q(5)).unwrap();
        for (&(k, ell), mass) in &tail.atoms {
            assert_eq!(mass, &if ell <= k { q(5) } else { q(0) }, "at {k},{ell}");
        }
    }

    #[test]
    fn small_alpha_can_go_negative() {
        let g = pattern(&[&[0], &[4, 0]]);
        assert_eq!(g.alpha(), q(4));
        let tail = delta(&g, &q(1), &q(1)).unwrap();
        assert!(tail.has_negative_atoms());
        assert!(tail.to_env().is_err());
        assert!(!delta(&g, &q(1), &q(4)).unwrap().has_negative_atoms());
        assert_eq!(delta(&pattern(&[&[1], &[0, 0]]), &q(1), &q(1)), Err(RskError::InvalidGT));
    }

    #[test]
    fn round_trip_examples() {
        for env in [e1(), e3(), PathEnv::flat(2, q(3))] {
            let pair = rsk_t(&env);
            assert_eq!(rsk_inverse(&pair).unwrap(), env);
        }
        let glued = o_map(&rsk_t(&e1())).unwrap();
        assert_eq!(glued.horizon(), &q(5));
        assert_eq!(glued.restrict(&q(3)).unwrap(), melon_iterated(&e1()).env);
        let flat = o_map(&rsk_t(&PathEnv::flat(2, q(1)))).unwrap();
        assert_eq!(flat, PathEnv::flat(2, q(3)));
    }

    #[test]
    fn invalid_pairs_are_rejected() {
        let bad = RSKPair { w: e1(), g: pattern(&[&[1], &[2, 0]]) };
        assert!(matches!(rsk_inverse(&bad), Err(RskError::InvariantViolation(_))));
        let mismatched = RSKPair { w: melon_iterated(&e1()).env, g: pattern(&[&[1], &[3, 0]]) };
        assert!(matches!(o_map(&mismatched), Err(RskError::InvariantViolation(_))));
    }

    /// Pitman-ordered `w` from a random env and a random integer pattern with
    /// `g(n) = w(t)`, interlacing upward.
    fn arb_pair() -> impl Strategy<Value = RSKPair> {
        (arb_env(3, 3), prop::collection::vec(0u32..1000, 6)).prop_map(|(env, picks)| {
            let w = melon_iterated(&env).env;
            let n = w.n();
            let t = w.horizon().clone();
            let mut rows: Vec<Vec<Rational>> = vec![Vec::new(); n];
            rows[n - 1] = (1..=n).map(|i| w.line(i).value(&t)).collect();
            let mut pick = picks.into_iter().cycle();
            for j in (1..n).rev() {
                rows[j - 1] = (0..j)
                    .map(|i| {
                        let (lo, hi) = (&rows[j][i + 1], &rows[j][i]);
                        let steps = (hi - lo).floor().to_i64().unwrap();
                        let choice = pick.next().unwrap() as i64 % (steps + 1);
                        lo + &Rational::integer(choice)
                    })
                    .collect();
            }
            RSKPair { w, g: GTPattern::new(rows).unwrap() }
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(150))]

        #[test]
        fn tail_atoms_match_closed_form(rows in prop::collection::vec(0i64..6, 6), alpha in 0i64..20, n in 1usize..=3) {
            // Interlacing pattern built from sorted bottom rows upward.
            let mut bottom: Vec<i64> = rows[..n].to_vec();
            bottom.sort_unstable_by(|a, b| b.cmp(a));
            let mut pat: Vec<Vec<Rational>> = vec![Vec::new(); n];
            pat[n - 1] = bottom.iter().map(|&v| q(v)).collect();
            for j in (1..n).rev() {
                pat[j - 1] = (0..j).map(|i| pat[j][i + 1].clone()).collect();
            }
            let g = GTPattern::new(pat).unwrap();
            prop_assert!(gt_validate(&g));
            let tail = delta(&g, &q(1), &q(alpha)).unwrap();
            for k in 1..=n {
                for ell in 1..=n {
                    prop_assert_eq!(&tail.atoms[&(k, ell)], &atom_formula(&g, &q(alpha), k, ell));
                }
            }
            prop_assert_eq!(tail.pattern(g.last_row()), g.clone());
            if q(alpha) >= g.alpha() {
                prop_assert!(!tail.has_negative_atoms());
            }
        }

        #[test]
        fn rsk_round_trip(env in arb_env(3, 3)) {
            let pair = rsk_t(&env);
            pair.validate().unwrap();
            prop_assert_eq!(rsk_inverse(&pair).unwrap(), env);
        }

        #[test]
        fn inverse_round_trip(pair in arb_pair()) {
            pair.validate().unwrap();
            let f = rsk_inverse(&pair).unwrap();
            prop_assert_eq!(rsk_t(&f), pair);
        }

        #[test]
        fn tail_properties(pair in arb_pair(), r_num in 1i64..=6, k in 1usize..=3) {
            let g = &pair.g;
            let n = g.depth();
            prop_assume!(k <= n);
            let alpha = g.alpha();
            let tail = delta(g, pair.w.horizon(), &alpha).unwrap();
            prop_assert!(!tail.has_negative_atoms());
            let glued = pair.w.concat(&tail.to_env().unwrap()).unwrap();
            prop_assert!(is_pitman_ordered(&glued));
            let r = Rational::new(r_num, 2).min(Rational::from(n));
            prop_assert!(delta_mass_check(g, pair.w.horizon(), &alpha, &r, k));
        }

        #[test]
        fn large_alpha_factorizes_the_melon(env in arb_env(3, 3), extra in 0i64..3) {
            let w = melon_iterated(&env).env;
            let t = env.horizon().clone();
            let n = env.n();
            let gap = w.line(1).value(&t) - w.line(n).value(&t);
            let alpha = &gap * &Rational::from(n - 1) + q(extra);
            let lhs = melon_iterated(&env.oplus_alpha(&alpha)).env;
            let tail = delta(&g_pattern(&env), &t, &alpha).unwrap().to_env().unwrap();
            prop_assert_eq!(lhs, w.concat(&tail).unwrap());
        }

        #[test]
        fn classes_are_preserved(pairs in prop::collection::vec((1usize..=3, 0i64..=3, 1i64..=3), 0..6)) {
            let env = atoms(3, 3, &pairs.iter().map(|&(l, t, m)| (l, t, m)).collect::<Vec<_>>());
            prop_assert!(env.class_check(EnvClass::IntegerJumpsIntegerTimes));
            let pair = rsk_t(&env);
            prop_assert!(pair.w.class_check(EnvClass::IntegerJumpsIntegerTimes));
            prop_assert!(pair.g.is_integral());
        }
    }
}
