//! JSON and CSV forms of the toolkit's data.
//!
//! A scalar function is `{"grid":{"min","step","n"},"re":[..],"im":[..]}`; a
//! matrix function replaces `re`/`im` with channels `"11"`, `"12"`, `"21"`,
//! `"22"`, each an `{"re","im"}` pair. Composite records embed these and add
//! their own keys.

use std::fmt::Write as _;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{NlsError, Result};
use crate::grid::{SampledFn, SampledMatrixFn, UniformGrid, C64};
use crate::inverse::{uniform_grid_of, ReconstructionResult};
use crate::oracle::FieldState;
use crate::scattering::ScatteringData;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Parts {
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Parts {
    fn of(values: &[C64]) -> Self {
        Self { re: values.iter().map(|v| v.re).collect(), im: values.iter().map(|v| v.im).collect() }
    }

    fn values(self) -> Result<Vec<C64>> {
        if self.re.len() != self.im.len() {
            return Err(NlsError::Parse(format!("`re` has {} entries but `im` has {}", self.re.len(), self.im.len())));
        }
        Ok(self.re.into_iter().zip(self.im).map(|(a, b)| C64::new(a, b)).collect())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridJson {
    min: f64,
    step: f64,
    n: usize,
}

impl GridJson {
    fn grid(&self) -> Result<UniformGrid> {
        UniformGrid::new(self.min, self.step, self.n)
    }
}

impl From<&UniformGrid> for GridJson {
    fn from(g: &UniformGrid) -> Self {
        Self { min: g.min, step: g.step, n: g.n }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScalarJson {
    grid: GridJson,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl ScalarJson {
    fn of(f: &SampledFn) -> Self {
        let p = Parts::of(f.values());
        Self { grid: f.grid().into(), re: p.re, im: p.im }
    }

    fn into_fn(self) -> Result<SampledFn> {
        let grid = self.grid.grid()?;
        SampledFn::new(grid, Parts { re: self.re, im: self.im }.values()?)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    grid: GridJson,
    #[serde(rename = "11")]
    c11: Parts,
    #[serde(rename = "12")]
    c12: Parts,
    #[serde(rename = "21")]
    c21: Parts,
    #[serde(rename = "22")]
    c22: Parts,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScatteringJson {
    grid: GridJson,
    re: Vec<f64>,
    im: Vec<f64>,
    a: ScalarJson,
    b: ScalarJson,
    r: ScalarJson,
    rho: f64,
    lambda: f64,
    eta: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReconstructionJson {
    grid: GridJson,
    re: Vec<f64>,
    im: Vec<f64>,
    t: f64,
    xs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FieldJson {
    grid: GridJson,
    re: Vec<f64>,
    im: Vec<f64>,
    t: f64,
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| NlsError::Parse(e.to_string()))
}

fn emit<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string(value).map_err(|e| NlsError::Parse(e.to_string()))
}

/// Types with a JSON representation.
pub trait Json: Sized {
    fn to_json(&self) -> Result<String>;
    fn from_json(text: &str) -> Result<Self>;
}

impl Json for SampledFn {
    fn to_json(&self) -> Result<String> {
        emit(&ScalarJson::of(self))
    }

    fn from_json(text: &str) -> Result<Self> {
        parse::<ScalarJson>(text)?.into_fn()
    }
}

impl Json for SampledMatrixFn {
    fn to_json(&self) -> Result<String> {
        let ch = self.channels();
        emit(&MatrixJson {
            grid: self.grid().into(),
            c11: Parts::of(&ch[0]),
            c12: Parts::of(&ch[1]),
            c21: Parts::of(&ch[2]),
            c22: Parts::of(&ch[3]),
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let m: MatrixJson = parse(text)?;
        let grid = m.grid.grid()?;
        SampledMatrixFn::from_channels(grid, [m.c11.values()?, m.c12.values()?, m.c21.values()?, m.c22.values()?])
    }
}

impl Json for ScatteringData {
    fn to_json(&self) -> Result<String> {
        let top = ScalarJson::of(&self.r);
        emit(&ScatteringJson {
            grid: top.grid,
            re: top.re,
            im: top.im,
            a: ScalarJson::of(&self.a),
            b: ScalarJson::of(&self.b),
            r: ScalarJson::of(&self.r),
            rho: self.rho,
            lambda: self.lambda,
            eta: self.eta,
        })
    }

    fn from_json(text: &str) -> Result<Self> {
        let s: ScatteringJson = parse(text)?;
        let (a, b, r) = (s.a.into_fn()?, s.b.into_fn()?, s.r.into_fn()?);
        if !(a.grid().same_as(b.grid()) && a.grid().same_as(r.grid())) {
            return Err(NlsError::GridMismatch("a, b and r must share a grid".into()));
        }
        Ok(ScatteringData { a, b, r, rho: s.rho, lambda: s.lambda, eta: s.eta })
    }
}

impl Json for ReconstructionResult {
    fn to_json(&self) -> Result<String> {
        let grid = uniform_grid_of(&self.xs)
            .ok_or_else(|| NlsError::InvalidGrid("reconstruction positions are not a uniform grid".into()))?;
        let p = Parts::of(&self.q);
        emit(&ReconstructionJson { grid: (&grid).into(), re: p.re, im: p.im, t: self.t, xs: self.xs.clone() })
    }

    /// Only `t`, `xs` and `q` are stored; the matrices and iteration counts come back empty.
    fn from_json(text: &str) -> Result<Self> {
        let j: ReconstructionJson = parse(text)?;
        let q = ScalarJson { grid: j.grid, re: j.re, im: j.im }.into_fn()?;
        if j.xs.len() != q.len() {
            return Err(NlsError::GridMismatch(format!("{} positions for {} samples", j.xs.len(), q.len())));
        }
        Ok(ReconstructionResult { t: j.t, xs: j.xs, q: q.into_values(), m1: vec![], q_matrix: vec![], iterations: vec![] })
    }
}

impl Json for FieldState {
    fn to_json(&self) -> Result<String> {
        let top = ScalarJson::of(&self.q);
        emit(&FieldJson { grid: top.grid, re: top.re, im: top.im, t: self.t })
    }

    fn from_json(text: &str) -> Result<Self> {
        let j: FieldJson = parse(text)?;
        let q = ScalarJson { grid: j.grid, re: j.re, im: j.im }.into_fn()?;
        Ok(FieldState::new(q, j.t))
    }
}

/// Reads a reflection coefficient from either a bare function or a full scattering record.
pub fn reflection_from_json(text: &str) -> Result<SampledFn> {
    let value: serde_json::Value = parse(text)?;
    if value.get("r").is_some() {
        Ok(ScatteringData::from_json(text)?.r)
    } else {
        SampledFn::from_json(text)
    }
}

/// Rows `x,re(q),im(q)`.
pub fn samples_csv(xs: &[f64], q: &[C64]) -> String {
    let mut out = String::from("x,re(q),im(q)\n");
    for (x, v) in xs.iter().zip(q) {
        let _ = writeln!(out, "{x:e},{:e},{:e}", v.re, v.im);
    }
    out
}

/// Rows `t,sup_err`.
pub fn decay_table_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("t,sup_err\n");
    for (t, e) in rows {
        let _ = writeln!(out, "{t:e},{e:e}");
    }
    out
}

pub fn parse_decay_table_csv(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.replace(' ', "") == "t,sup_err" => {}
        Some((_, header)) => return Err(NlsError::Parse(format!("line 1: expected header `t,sup_err`, found `{header}`"))),
        None => return Err(NlsError::Parse("empty decay table".into())),
    }
    lines
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let num = |s: &str, name: &str| {
                s.parse::<f64>().map_err(|e| NlsError::Parse(format!("line {}: column `{name}`: {e}", i + 1)))
            };
            if cols.len() != 2 {
                return Err(NlsError::Parse(format!("line {}: expected 2 columns, found {}", i + 1, cols.len())));
            }
            Ok((num(cols[0], "t")?, num(cols[1], "sup_err")?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Mat2;
    use proptest::prelude::*;

    fn close(a: &[C64], b: &[C64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).norm() <= 1e-15 * x.norm().max(f64::MIN_POSITIVE))
    }

    #[test]
    fn scalar_layout() {
        let g = UniformGrid::new(-1.0, 0.5, 3).unwrap();
        let f = SampledFn::new(g, vec![C64::new(1.0, 2.0), C64::new(0.0, -1.0), C64::new(3.5, 0.0)]).unwrap();
        let v: serde_json::Value = serde_json::from_str(&f.to_json().unwrap()).unwrap();
        assert_eq!(v["grid"]["n"], 3);
        assert_eq!(v["re"][2], 3.5);
        assert_eq!(v["im"][1], -1.0);
    }

    #[test]
    fn matrix_round_trip() {
        let g = UniformGrid::symmetric(2.0, 16).unwrap();
        let m = SampledMatrixFn::constant(g, Mat2::new(C64::new(1.0, 0.1), C64::new(0.3, 0.0), C64::new(0.0, -2.0), C64::new(7.0, 1e-300)));
        let text = m.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert!(v["21"]["im"].is_array());
        assert_eq!(SampledMatrixFn::from_json(&text).unwrap(), m);
    }

    #[test]
    fn malformed_input_is_diagnosed() {
        let err = SampledFn::from_json("{\"grid\":{\"min\":0,\"step\":1,\"n\":2},\n\"re\":[1,2],\"im\":[1]}").unwrap_err();
        assert!(matches!(err, NlsError::Parse(_)));
        let err = SampledFn::from_json("{\"grid\":{\"min\":0,\"step\":1,\"n\":2},\n\"re\":[1,2],\"imag\":[1,2]}").unwrap_err();
        assert!(err.to_string().contains("imag") && err.to_string().contains("line 2"), "{err}");
        assert!(SampledFn::from_json("{\"grid\":{\"min\":0,\"step\":1,\"n\":3},\"re\":[1,2],\"im\":[1,2]}").is_err());
    }

    #[test]
    fn field_state_and_reflection_readers() {
        let g = UniformGrid::symmetric(5.0, 32).unwrap();
        let q = SampledFn::from_fn(g, |x| C64::new((-x * x).exp(), x)).unwrap();
        let s = FieldState::new(q.clone(), 2.5);
        assert_eq!(FieldState::from_json(&s.to_json().unwrap()).unwrap(), s);
        assert_eq!(reflection_from_json(&q.to_json().unwrap()).unwrap(), q);
    }

    #[test]
    fn decay_table_csv_round_trip() {
        let rows = vec![(100.0, 1e-3), (200.0, 4.5e-4), (400.0, 2.0e-4)];
        assert_eq!(parse_decay_table_csv(&decay_table_csv(&rows)).unwrap(), rows);
        assert!(parse_decay_table_csv("t,err\n1,2\n").is_err());
        assert!(parse_decay_table_csv("t,sup_err\n1,x\n").unwrap_err().to_string().contains("line 2"));
    }

    proptest! {
        #[test]
        fn scalar_text_round_trip(vals in proptest::collection::vec((-1e6f64..1e6, -1e-6f64..1e-6), 2..40), min in -50.0f64..50.0, step in 1e-3f64..2.0) {
            let g = UniformGrid::new(min, step, vals.len()).unwrap();
            let f = SampledFn::new(g, vals.iter().map(|&(a, b)| C64::new(a, b)).collect()).unwrap();
            let back = SampledFn::from_json(&f.to_json().unwrap()).unwrap();
            prop_assert!(close(f.values(), back.values()));
            prop_assert_eq!(back.grid(), f.grid());
        }
    }
}
