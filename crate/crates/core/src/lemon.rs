//! The lemon map: the melon conjugated by 180° rotation at a finite horizon,
//! and its large-horizon limit certified by agreement of successive probes.

use thiserror::Error;

use crate::env::{merge_sorted, EnvError, PathEnv};
use crate::lpp::{lpp_multi, EndpointSpec};
use crate::pitman::melon_iterated;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LemonError {
    #[error("probe horizon {time} must match the env horizon {horizon}")]
    HorizonMismatch { time: Rational, horizon: Rational },
    #[error("probe horizons must increase within (0, {horizon}]: {detail}")]
    BadSchedule { horizon: Rational, detail: String },
    #[error("successive probes never agree on a prefix")]
    NoStabilization(Box<LemonResult>),
    #[error(transparent)]
    Env(#[from] EnvError),
}

/// Horizons at which finite-time lemons are compared.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ProbeSchedule {
    Explicit(Vec<Rational>),
    /// `first, first·ratio, …`, with the data horizon as the final probe.
    Geometric { first: Rational, ratio: i64 },
}

impl ProbeSchedule {
    /// Quarter, half and full horizon.
    pub fn default_for(horizon: &Rational) -> Self {
        ProbeSchedule::Geometric { first: horizon / &Rational::integer(4), ratio: 2 }
    }

    pub fn horizons(&self, horizon: &Rational) -> Result<Vec<Rational>, LemonError> {
        let bad = |detail: String| LemonError::BadSchedule { horizon: horizon.clone(), detail };
        let times = match self {
            ProbeSchedule::Explicit(ts) => ts.clone(),
            ProbeSchedule::Geometric { first, ratio } => {
                if !first.is_positive() || *ratio < 2 {
                    return Err(bad(format!("first {first}, ratio {ratio}")));
                }
                let mut out = Vec::new();
                let mut t = first.clone();
                while &t < horizon {
                    out.push(t.clone());
                    t = &t * &Rational::integer(*ratio);
                }
                out.push(horizon.clone());
                out
            }
        };
        if times.len() < 2 {
            return Err(bad("at least two probes are needed".into()));
        }
        if times.windows(2).any(|w| w[0] >= w[1]) || !times[0].is_positive() || times.last() > Some(horizon) {
            return Err(bad(format!("{times:?}")));
        }
        Ok(times)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProbeReport {
    pub horizon: Rational,
    /// Bottom-k sums lie below the previous probe's and above the input's.
    pub monotone: bool,
    /// Largest prefix on which this probe agrees with the previous one.
    pub agrees_through: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LemonResult {
    /// The last probe restricted to the stable prefix (unrestricted when none).
    pub env: PathEnv,
    /// Zero when the last two probes disagree immediately.
    pub stable_prefix: Rational,
    pub probe_horizons: Vec<Rational>,
    pub probes: Vec<ProbeReport>,
}

/// `M_t = R_t W_t R_t` for `t` equal to the env horizon.
pub fn lemon_t(env: &PathEnv, t: &Rational) -> Result<PathEnv, LemonError> {
    if t != env.horizon() {
        return Err(LemonError::HorizonMismatch { time: t.clone(), horizon: env.horizon().clone() });
    }
    let rotated = env.rotate(t)?;
    Ok(melon_iterated(&rotated).env.rotate(t)?)
}

fn bottom_sum_left(env: &PathEnv, k: usize, x: &Rational) -> Rational {
    let n = env.n();
    (n - k + 1..=n).map(|i| env.line(i).left_limit(x)).sum()
}

fn bottom_sum(env: &PathEnv, k: usize, x: &Rational) -> Rational {
    let n = env.n();
    (n - k + 1..=n).map(|i| env.line(i).value(x)).sum()
}

fn with_midpoints(grid: &[Rational]) -> Vec<Rational> {
    let mut out = Vec::with_capacity(2 * grid.len());
    for w in grid.windows(2) {
        out.push(w[0].clone());
        out.push((&w[0] + &w[1]) / Rational::integer(2));
    }
    out.extend(grid.last().cloned());
    out
}

/// Checks the rotation route against the defining identity: the bottom-k sum
/// of `M_t f(x⁻)` equals `f[(0,n)^k → (t,1)^k] − f[(x,n)^k → (t,1)^k]` at every
/// grid point and segment midpoint.
pub fn lemon_identity_holds(env: &PathEnv) -> bool {
    let t = env.horizon();
    let n = env.n();
    let m = lemon_t(env, t).expect("horizon matches");
    let points = with_midpoints(&merge_sorted(&env.grid(), &m.grid()));
    (1..=n).all(|k| {
        let value = |x: &Rational| {
            let spec = EndpointSpec::points(x, n, t, 1, k);
            lpp_multi(env, &spec).expect("valid endpoints").finite().cloned()
        };
        let total = value(&Rational::zero());
        points.iter().all(|x| {
            let rhs = match (&total, value(x)) {
                (Some(a), Some(b)) => a - &b,
                _ => return false,
            };
            bottom_sum_left(&m, k, x) == rhs
        })
    })
}

/// Largest `s` such that the two envs agree on `[0, s]`, scanning merged
/// breakpoints. An atom mismatch at `d` certifies only the previous breakpoint.
fn agreement_prefix(a: &PathEnv, b: &PathEnv) -> Option<Rational> {
    let limit = a.horizon().clone().min(b.horizon().clone());
    let grid: Vec<Rational> = merge_sorted(&a.grid(), &b.grid()).into_iter().filter(|g| g <= &limit).collect();
    let mut certified = None;
    for g in &grid {
        let atoms_match = a.lines().iter().zip(b.lines()).all(|(x, y)| x.jump_at(g) == y.jump_at(g));
        if !atoms_match {
            break;
        }
        certified = Some(g.clone());
        if g == &limit {
            break;
        }
        let slopes_match = a.lines().iter().zip(b.lines()).all(|(x, y)| x.slope_after(g) == y.slope_after(g));
        if !slopes_match {
            break;
        }
    }
    certified
}

/// Bottom-k sums of `later` at or below those of `earlier` and at or above the
/// input's, on the earlier probe's horizon.
fn monotone_step(input: &PathEnv, earlier: Option<&PathEnv>, later: &PathEnv) -> bool {
    let horizon = earlier.map_or_else(|| later.horizon().clone(), |e| e.horizon().clone());
    let mut grid = merge_sorted(&input.grid(), &later.grid());
    if let Some(e) = earlier {
        grid = merge_sorted(&grid, &e.grid());
    }
    grid.retain(|g| g <= &horizon);
    (1..=input.n()).all(|k| {
        grid.iter().all(|x| {
            let sums = |env: &PathEnv| (bottom_sum_left(env, k, x), bottom_sum(env, k, x));
            let (later_left, later_right) = sums(later);
            let (in_left, in_right) = sums(input);
            let above_input = later_left >= in_left && (x == later.horizon() || later_right >= in_right);
            let below_earlier = earlier.is_none_or(|e| {
                let (e_left, e_right) = sums(e);
                later_left <= e_left && (x == &horizon || later_right <= e_right)
            });
            above_input && below_earlier
        })
    })
}

/// Finite-time lemons at each probe horizon, certified on the prefix where
/// the last two agree.
pub fn lemon(env: &PathEnv, schedule: &ProbeSchedule) -> Result<LemonResult, LemonError> {
    let horizons = schedule.horizons(env.horizon())?;
    let mut outputs: Vec<PathEnv> = Vec::with_capacity(horizons.len());
    let mut probes = Vec::with_capacity(horizons.len());
    for t in &horizons {
        let data = env.restrict(t)?;
        let out = lemon_t(&data, t)?;
        let prev = outputs.last();
        probes.push(ProbeReport {
            horizon: t.clone(),
            monotone: monotone_step(&data, prev, &out),
            agrees_through: prev.and_then(|p| agreement_prefix(p, &out)),
        });
        outputs.push(out);
    }
    let last = outputs.pop().expect("at least two probes");
    let stable = probes.last().and_then(|p| p.agrees_through.clone()).filter(Rational::is_positive);
    match stable {
        Some(s) => Ok(LemonResult {
            env: last.restrict(&s)?,
            stable_prefix: s,
            probe_horizons: horizons,
            probes,
        }),
        None => Err(LemonError::NoStabilization(Box::new(LemonResult {
            env: last,
            stable_prefix: Rational::zero(),
            probe_horizons: horizons,
            probes,
        }))),
    }
}

/// `max_t (f_{j+1} − f_j)⁺(t)` for each adjacent pair, over the horizon.
pub fn sourness_score(env: &PathEnv) -> Vec<Rational> {
    env.lines()
        .windows(2)
        .map(|pair| {
            let (upper, lower) = (&pair[0], &pair[1]);
            let grid = merge_sorted(upper.breakpoints(), lower.breakpoints());
            grid.iter()
                .flat_map(|g| [lower.value(g) - upper.value(g), lower.left_limit(g) - upper.left_limit(g)])
                .fold(Rational::zero(), Rational::max)
        })
        .collect()
}

/// `MW = M` and `WM = W` on the prefix certified for both `f` and `Wf`.
pub fn check_inversion(env: &PathEnv, schedule: &ProbeSchedule) -> bool {
    let w = melon_iterated(env).env;
    let (Ok(m), Ok(mw)) = (lemon(env, schedule), lemon(&w, schedule)) else {
        return false;
    };
    let s = m.stable_prefix.clone().min(mw.stable_prefix.clone());
    let (Ok(m_s), Ok(mw_s), Ok(w_s)) = (m.env.restrict(&s), mw.env.restrict(&s), w.restrict(&s)) else {
        return false;
    };
    m_s == mw_s && melon_iterated(&m_s).env == w_s
}
