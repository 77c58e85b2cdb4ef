//! Two-line Pitman transform, the sorting operators built from it, and the
//! melon map computed both by bubble sort and from multi-path values.

use thiserror::Error;

use crate::env::{merge_sorted, EnvError, PathEnv, PathLine};
use crate::lpp::profile;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PitmanError {
    #[error("index {index} out of range for {n} lines")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("horizons differ: {0} vs {1}")]
    HorizonMismatch(Rational, Rational),
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MelonMethod {
    Direct,
    Iterated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MelonResult {
    pub env: PathEnv,
    pub method: MelonMethod,
}

/// Running supremum `s(t) = sup_{z ≤ t} f2(z) − f1(z⁻)` as a cadlag line.
fn running_sup(f1: &PathLine, f2: &PathLine) -> PathLine {
    let grid = merge_sorted(f1.breakpoints(), f2.breakpoints());
    let mut bp = Vec::with_capacity(grid.len());
    let mut jumps = Vec::with_capacity(grid.len());
    let mut slopes = Vec::with_capacity(grid.len());
    let mut sup_before = Rational::zero();
    for (c, g) in grid.iter().enumerate() {
        let at_point = f2.value(g) - f1.left_limit(g);
        let sup = if c == 0 { at_point } else { at_point.max(sup_before.clone()) };
        bp.push(g.clone());
        jumps.push(&sup - &sup_before);
        let Some(next) = grid.get(c + 1) else { break };
        // On (g, next) the difference is start + rise·u.
        let start = f2.value(g) - f1.value(g);
        let rise = f2.slope_after(g) - f1.slope_after(g);
        let width = next - g;
        if rise.is_positive() {
            let cross = (&sup - &start) / &rise;
            if cross < width {
                if cross.is_positive() {
                    bp.push(g + &cross);
                    jumps.push(Rational::zero());
                    slopes.push(Rational::zero());
                }
                slopes.push(rise.clone());
                sup_before = &start + &(&rise * &width);
                continue;
            }
        }
        slopes.push(Rational::zero());
        sup_before = sup;
    }
    PathLine::from_parts(bp, jumps, slopes)
}

/// The 2-line Pitman transform `(f1, f2) ↦ (f1 + s, f2 − s)`.
pub fn pitman2(f1: &PathLine, f2: &PathLine) -> Result<(PathLine, PathLine), PitmanError> {
    if f1.horizon() != f2.horizon() {
        return Err(PitmanError::HorizonMismatch(f1.horizon().clone(), f2.horizon().clone()));
    }
    let s = running_sup(f1, f2);
    Ok((f1.add(&s), f2.sub(&s)))
}

fn check_index(env: &PathEnv, index: usize, max: usize) -> Result<(), PitmanError> {
    if index == 0 || index > max {
        return Err(PitmanError::IndexOutOfRange { index, n: env.n() });
    }
    Ok(())
}

fn sigma_lines(lines: &mut [PathLine], i: usize) {
    let (top, bottom) = pitman2(&lines[i - 1], &lines[i]).expect("lines share a horizon");
    lines[i - 1] = top;
    lines[i] = bottom;
}

/// `σ_i`: Pitman transform of lines `i` and `i + 1`.
pub fn sigma(env: &PathEnv, i: usize) -> Result<PathEnv, PitmanError> {
    check_index(env, i, env.n().saturating_sub(1))?;
    let mut lines = env.lines().to_vec();
    sigma_lines(&mut lines, i);
    Ok(PathEnv::from_lines(lines)?)
}

fn tau_lines(lines: &mut [PathLine], m: usize) {
    for i in (m..lines.len()).rev() {
        sigma_lines(lines, i);
    }
}

/// `τ_m = σ_m ∘ σ_{m+1} ∘ … ∘ σ_{n−1}`, applied right to left; `τ_n` is the identity.
pub fn tau(env: &PathEnv, m: usize) -> Result<PathEnv, PitmanError> {
    check_index(env, m, env.n())?;
    let mut lines = env.lines().to_vec();
    tau_lines(&mut lines, m);
    Ok(PathEnv::from_lines(lines)?)
}

/// Bubble-sort melon `τ_{n−1} ∘ … ∘ τ_1`.
pub fn melon_iterated(env: &PathEnv) -> MelonResult {
    let mut lines = env.lines().to_vec();
    for m in 1..env.n() {
        tau_lines(&mut lines, m);
    }
    let env = PathEnv::from_lines(lines).expect("sorting keeps atoms nonnegative");
    MelonResult { env, method: MelonMethod::Iterated }
}

/// Melon from its defining differences of k-path values from `(0, n)` to `(y, 1)`.
pub fn melon_direct(env: &PathEnv) -> MelonResult {
    let mut prev = PathLine::flat(env.horizon().clone());
    let mut lines = Vec::with_capacity(env.n());
    for k in 1..=env.n() {
        let total = profile(env, k, 1).expect("k paths fit between lines n and 1");
        lines.push(total.sub(&prev));
        prev = total;
    }
    let env = PathEnv::from_lines(lines).expect("melon lines have nonnegative atoms");
    MelonResult { env, method: MelonMethod::Direct }
}

/// Car positions `τ_m f_m`, which track `y ↦ f[(0, n) → (y, m)]`.
pub fn car_positions(env: &PathEnv, m: usize) -> Result<PathLine, PitmanError> {
    Ok(tau(env, m)?.line(m).clone())
}

/// Whether `f_{i+1}(t) ≤ f_i(t⁻)` for every `i` and `t`.
pub fn is_pitman_ordered(env: &PathEnv) -> bool {
    env.lines().windows(2).all(|pair| {
        let (upper, lower) = (&pair[0], &pair[1]);
        let grid = merge_sorted(upper.breakpoints(), lower.breakpoints());
        grid.iter().all(|g| lower.value(g) <= upper.left_limit(g))
            && grid.windows(2).all(|w| lower.left_limit(&w[1]) <= upper.left_limit(&w[1]))
    })
}
