//! Versioned JSON documents for envs, RSK pairs, matrices, optimizers and
//! tableaux. Rationals travel as `"p/q"` strings; matrix entries may also be
//! plain integers.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::env::{EnvError, GridPoint, LineSpec, PathEnv};
use crate::lattice::{LatticeError, LatticeMatrix, Tableau};
use crate::lemon::LemonResult;
use crate::lpp::DisjointTuple;
use crate::rational::Rational;
use crate::rsk::{GTPattern, RSKPair, RskError};

pub const FORMAT: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Parse(String),
    #[error("unsupported format version {0}")]
    Version(u64),
    #[error("invalid document: {0}")]
    Invalid(String),
    #[error(transparent)]
    Env(#[from] EnvError),
    #[error(transparent)]
    Pattern(#[from] RskError),
    #[error(transparent)]
    Matrix(#[from] LatticeError),
}

impl From<serde_json::Error> for JsonError {
    fn from(e: serde_json::Error) -> Self {
        JsonError::Parse(e.to_string())
    }
}

fn check_format(format: u64) -> Result<(), JsonError> {
    if format == FORMAT {
        Ok(())
    } else {
        Err(JsonError::Version(format))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineDoc {
    #[serde(default)]
    jumps: Vec<(Rational, Rational)>,
    #[serde(default)]
    segments: Vec<(Rational, Rational, Rational)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EnvDoc {
    format: u64,
    n: usize,
    horizon: Rational,
    lines: Vec<LineDoc>,
}

impl EnvDoc {
    fn from_env(env: &PathEnv) -> Self {
        let lines = env
            .lines()
            .iter()
            .map(|l| LineDoc {
                jumps: l.atoms().map(|(t, m)| (t.clone(), m.clone())).collect(),
                segments: l.segments().map(|(a, b, s)| (a.clone(), b.clone(), s.clone())).collect(),
            })
            .collect();
        EnvDoc { format: FORMAT, n: env.n(), horizon: env.horizon().clone(), lines }
    }

    fn into_env(self) -> Result<PathEnv, JsonError> {
        check_format(self.format)?;
        if self.lines.len() != self.n {
            return Err(JsonError::Invalid(format!("n = {} but {} lines", self.n, self.lines.len())));
        }
        let specs: Vec<LineSpec> =
            self.lines.into_iter().map(|l| LineSpec { jumps: l.jumps, segments: l.segments }).collect();
        Ok(PathEnv::new(self.n, self.horizon, &specs)?)
    }
}

pub fn env_to_value(env: &PathEnv) -> Value {
    serde_json::to_value(EnvDoc::from_env(env)).expect("env documents serialize")
}

pub fn env_to_json(env: &PathEnv) -> String {
    pretty(&env_to_value(env))
}

pub fn env_from_json(text: &str) -> Result<PathEnv, JsonError> {
    serde_json::from_str::<EnvDoc>(text)?.into_env()
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairDoc {
    format: u64,
    w: EnvDoc,
    g: Vec<Vec<Rational>>,
}

pub fn pattern_to_value(g: &GTPattern) -> Value {
    serde_json::to_value(g.rows()).expect("patterns serialize")
}

pub fn pair_to_value(pair: &RSKPair) -> Value {
    json!({ "format": FORMAT, "w": env_to_value(&pair.w), "g": pattern_to_value(&pair.g) })
}

pub fn pair_to_json(pair: &RSKPair) -> String {
    pretty(&pair_to_value(pair))
}

/// Parses a pair; structural checks only (the RSK invariants are left to
/// `RSKPair::validate`).
pub fn pair_from_json(text: &str) -> Result<RSKPair, JsonError> {
    let doc: PairDoc = serde_json::from_str(text)?;
    check_format(doc.format)?;
    let w = doc.w.into_env()?;
    let g = GTPattern::new(doc.g)?;
    Ok(RSKPair { w, g })
}

/// A rational written as a string or a bare integer.
#[derive(Deserialize)]
#[serde(untagged)]
enum Entry {
    Text(Rational),
    Int(i64),
}

impl From<Entry> for Rational {
    fn from(e: Entry) -> Self {
        match e {
            Entry::Text(r) => r,
            Entry::Int(i) => Rational::integer(i),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    format: u64,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<Entry>>,
}

pub fn matrix_to_value(a: &LatticeMatrix) -> Value {
    json!({ "format": FORMAT, "rows": a.rows(), "cols": a.cols(), "entries": a.entries() })
}

pub fn matrix_to_json(a: &LatticeMatrix) -> String {
    pretty(&matrix_to_value(a))
}

pub fn matrix_from_json(text: &str) -> Result<LatticeMatrix, JsonError> {
    let doc: MatrixDoc = serde_json::from_str(text)?;
    check_format(doc.format)?;
    if doc.entries.len() != doc.rows || doc.entries.iter().any(|r| r.len() != doc.cols) {
        return Err(JsonError::Invalid(format!("entries do not form a {}×{} array", doc.rows, doc.cols)));
    }
    let entries = doc.entries.into_iter().map(|r| r.into_iter().map(Rational::from).collect()).collect();
    Ok(LatticeMatrix::new(entries)?)
}

pub fn tableau_to_value(t: &Tableau) -> Value {
    serde_json::to_value(&t.rows).expect("tableaux serialize")
}

fn point_value(p: &GridPoint) -> Value {
    json!([p.time, p.line])
}

/// Optimizer tuples as start, end and jump times per path.
pub fn tuple_to_value(tuple: &DisjointTuple) -> Value {
    let paths: Vec<Value> = tuple
        .paths
        .iter()
        .map(|p| json!({ "start": point_value(&p.start), "end": point_value(&p.end), "jump_times": p.jump_times }))
        .collect();
    json!({ "format": FORMAT, "paths": paths })
}

/// Certified prefix, probe horizons and per-probe checks; `env` is the
/// certified output.
pub fn lemon_report_to_value(result: &LemonResult) -> Value {
    let probes: Vec<Value> = result
        .probes
        .iter()
        .map(|p| json!({ "horizon": p.horizon, "monotone": p.monotone, "agrees_through": p.agrees_through }))
        .collect();
    json!({
        "format": FORMAT,
        "stable_prefix": result.stable_prefix,
        "probe_horizons": result.probe_horizons,
        "probes": probes,
        "env": env_to_value(&result.env),
    })
}

/// `"x,n"`: a time and a line index.
pub fn parse_point(text: &str) -> Result<GridPoint, JsonError> {
    let bad = || JsonError::Invalid(format!("expected \"time,line\", got {text:?}"));
    let (time, line) = text.split_once(',').ok_or_else(bad)?;
    let time: Rational = time.trim().parse().map_err(|_| bad())?;
    let line: usize = line.trim().parse().map_err(|_| bad())?;
    Ok(GridPoint::new(time, line))
}

pub fn parse_rational(text: &str) -> Result<Rational, JsonError> {
    text.parse().map_err(|e: crate::rational::ParseRationalError| JsonError::Invalid(e.to_string()))
}

/// Comma-separated rationals, e.g. probe horizons or drifts.
pub fn parse_rational_list(text: &str) -> Result<Vec<Rational>, JsonError> {
    text.split(',').map(parse_rational).collect()
}

pub fn pretty(value: &Value) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("values serialize");
    out.push('\n');
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::fixtures::{arb_env, e1, e3, q};
    use crate::rsk::rsk_t;
    use proptest::prelude::*;

    #[test]
    fn env_document_shape() {
        let v = env_to_value(&e1());
        assert_eq!(v["format"], 1);
        assert_eq!(v["n"], 2);
        assert_eq!(v["horizon"], "3/1");
        assert!(v["lines"][0]["jumps"].is_array());
        let text = r#"{"format":1,"n":1,"horizon":"2","lines":[{"segments":[["0","1","1/2"]]}]}"#;
        let env = env_from_json(text).unwrap();
        assert_eq!(env.line(1).value(&q(2)), Rational::new(1, 2));
    }

    #[test]
    fn rejections() {
        assert!(matches!(env_from_json("{"), Err(JsonError::Parse(_))));
        let v2 = r#"{"format":2,"n":1,"horizon":"1","lines":[{}]}"#;
        assert_eq!(env_from_json(v2), Err(JsonError::Version(2)));
        let extra = r#"{"format":1,"n":1,"horizon":"1","lines":[{}],"colour":"red"}"#;
        assert!(matches!(env_from_json(extra), Err(JsonError::Parse(_))));
        let short = r#"{"format":1,"n":2,"horizon":"1","lines":[{}]}"#;
        assert!(matches!(env_from_json(short), Err(JsonError::Invalid(_))));
        let negative = r#"{"format":1,"n":1,"horizon":"1","lines":[{"jumps":[["1/2","-1"]]}]}"#;
        assert!(matches!(env_from_json(negative), Err(JsonError::Env(EnvError::NegativeJump { .. }))));
        let ragged = r#"{"format":1,"rows":2,"cols":2,"entries":[[1,2],[3]]}"#;
        assert!(matches!(matrix_from_json(ragged), Err(JsonError::Invalid(_))));
        let negative_entry = r#"{"format":1,"rows":1,"cols":1,"entries":[[-1]]}"#;
        assert!(matches!(matrix_from_json(negative_entry), Err(JsonError::Matrix(_))));
        let bad_pattern = r#"{"format":1,"w":{"format":1,"n":1,"horizon":"1","lines":[{}]},"g":[["1"],["1"]]}"#;
        assert!(matches!(pair_from_json(bad_pattern), Err(JsonError::Pattern(_))));
    }

    #[test]
    fn matrices_accept_integers_and_strings() {
        let a = matrix_from_json(r#"{"format":1,"rows":2,"cols":2,"entries":[[1,"2"],["3/1",4]]}"#).unwrap();
        assert_eq!(a, LatticeMatrix::from_i64(&[&[1, 2], &[3, 4]]).unwrap());
        assert_eq!(matrix_from_json(&matrix_to_json(&a)).unwrap(), a);
    }

    #[test]
    fn points_and_rationals() {
        assert_eq!(parse_point("1/2, 3").unwrap(), GridPoint::new(Rational::new(1, 2), 3));
        assert_eq!(parse_point("0.25,1").unwrap(), GridPoint::new(Rational::new(1, 4), 1));
        assert!(parse_point("1").is_err());
        assert!(parse_point("x,1").is_err());
        assert!(parse_point("1,-1").is_err());
        assert_eq!(parse_rational_list("1,2/3").unwrap(), vec![q(1), Rational::new(2, 3)]);
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn pair_documents() {
        let pair = rsk_t(&e3());
        let v = pair_to_value(&pair);
        assert_eq!(v["g"], json!([["1/1"], ["2/1", "0/1"]]));
        assert_eq!(pair_from_json(&pair_to_json(&pair)).unwrap(), pair);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn env_json_is_lossless(env in arb_env(4, 4)) {
            prop_assert_eq!(env_from_json(&env_to_json(&env)).unwrap(), env);
        }

        #[test]
        fn pair_json_is_lossless(env in arb_env(3, 3)) {
            let pair = rsk_t(&env);
            prop_assert_eq!(pair_from_json(&pair_to_json(&pair)).unwrap(), pair);
        }

        #[test]
        fn point_parser_never_panics(s in ".{0,12}") {
            let _ = parse_point(&s);
        }
    }
}
