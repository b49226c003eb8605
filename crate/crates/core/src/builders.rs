//! Named covector systems in fixed coordinate realizations.
//!
//! Every builder emits one covector per `+-` pair, in canonical direction, and
//! re-expresses the result in an orthonormal basis of its span when the natural
//! realization is rank deficient (the `A` series lives in the sum-zero hyperplane).

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Result, VeeError};
use crate::linalg;
use crate::system::CovectorSystem;

const EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    A,
    B,
    C,
    D,
    E6,
    E7,
    E8,
    F4,
    H3,
    H4,
    I2,
    AnDeformed,
    BnDeformed,
    FnType,
    T4,
    T4Raw,
    T4RestEij,
    T4RestLong,
    F3Variant1,
    F3Variant2,
    E8EvenSign,
}

impl Family {
    pub fn tag(self) -> &'static str {
        match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::E6 => "E6",
            Family::E7 => "E7",
            Family::E8 => "E8",
            Family::F4 => "F4",
            Family::H3 => "H3",
            Family::H4 => "H4",
            Family::I2 => "I2",
            Family::AnDeformed => "An_def",
            Family::BnDeformed => "Bn_def",
            Family::FnType => "Fn",
            Family::T4 => "T4",
            Family::T4Raw => "T4raw",
            Family::T4RestEij => "T4_eij",
            Family::T4RestLong => "T4_long",
            Family::F3Variant1 => "F3_1",
            Family::F3Variant2 => "F3_2",
            Family::E8EvenSign => "E8_even",
        }
    }

    fn from_tag(tag: &str) -> Option<Self> {
        Some(match tag {
            "A" => Family::A,
            "B" => Family::B,
            "C" => Family::C,
            "D" => Family::D,
            "E6" => Family::E6,
            "E7" => Family::E7,
            "E8" => Family::E8,
            "F4" => Family::F4,
            "H3" => Family::H3,
            "H4" => Family::H4,
            "I2" => Family::I2,
            "An_def" | "An_deformed" => Family::AnDeformed,
            "Bn_def" | "Bn_deformed" => Family::BnDeformed,
            "Fn" | "Fn_type" => Family::FnType,
            "T4" => Family::T4,
            "T4raw" => Family::T4Raw,
            "T4_eij" => Family::T4RestEij,
            "T4_long" => Family::T4RestLong,
            "F3_1" | "F3_variant1" => Family::F3Variant1,
            "F3_2" | "F3_variant2" => Family::F3Variant2,
            "E8_even" => Family::E8EvenSign,
            _ => return None,
        })
    }

    /// Scalar parameters accepted by the family, and whether a list `c` is taken.
    fn accepted(self) -> (&'static [&'static str], bool) {
        match self {
            Family::A | Family::C | Family::D => (&["n"], false),
            Family::B => (&["n", "lambda"], false),
            Family::F4 | Family::F3Variant1 | Family::F3Variant2 => (&["lambda"], false),
            Family::I2 => (&["m"], false),
            Family::AnDeformed => (&[], true),
            Family::BnDeformed => (&["gamma"], true),
            Family::FnType => (&["n", "lambda", "M"], false),
            Family::T4 | Family::T4RestEij | Family::T4RestLong => (&["M"], false),
            Family::T4Raw => (&["lambda", "K", "M"], false),
            Family::E6 | Family::E7 | Family::E8 | Family::H3 | Family::H4 | Family::E8EvenSign => {
                (&[], false)
            }
        }
    }
}

/// A family plus its parameters. Canonical text form: `F4:lambda=1`,
/// `Fn:n=5,lambda=2.449489743,M=1`, `An_def:c=2,1,1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemSpec {
    pub family: Family,
    pub params: BTreeMap<String, f64>,
    pub c: Vec<f64>,
}

impl SystemSpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            params: BTreeMap::new(),
            c: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    pub fn with_c(mut self, c: &[f64]) -> Self {
        self.c = c.to_vec();
        self
    }

    fn get(&self, key: &str) -> Result<f64> {
        self.params
            .get(key)
            .copied()
            .ok_or_else(|| VeeError::InvalidSpec(format!("{}: missing parameter `{key}`", self.family.tag())))
    }

    fn get_or(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    fn get_int(&self, key: &str, min: usize) -> Result<usize> {
        let v = self.get(key)?;
        if v.fract() != 0.0 || v < min as f64 {
            return Err(VeeError::InvalidSpec(format!(
                "{}: parameter `{key}` must be an integer >= {min}, got {v}",
                self.family.tag()
            )));
        }
        Ok(v as usize)
    }

    /// Checks that every given parameter is known to the family.
    pub fn validate(&self) -> Result<()> {
        let (keys, takes_c) = self.family.accepted();
        for k in self.params.keys() {
            if !keys.contains(&k.as_str()) {
                return Err(VeeError::InvalidSpec(format!(
                    "{}: unknown parameter `{k}`",
                    self.family.tag()
                )));
            }
        }
        if !takes_c && !self.c.is_empty() {
            return Err(VeeError::InvalidSpec(format!(
                "{}: unknown parameter `c`",
                self.family.tag()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for SystemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family.tag())?;
        let (keys, _) = self.family.accepted();
        let mut parts: Vec<String> = keys
            .iter()
            .filter_map(|k| self.params.get(*k).map(|v| format!("{k}={v}")))
            .collect();
        if !self.c.is_empty() {
            let list: Vec<String> = self.c.iter().map(|v| v.to_string()).collect();
            parts.push(format!("c={}", list.join(",")));
        }
        if !parts.is_empty() {
            write!(f, ":{}", parts.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for SystemSpec {
    type Err = VeeError;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (tag, rest) = match s.split_once(':') {
            Some((t, r)) => (t.trim(), r.trim()),
            None => (s, ""),
        };
        let family = Family::from_tag(tag)
            .ok_or_else(|| VeeError::InvalidSpec(format!("unknown family `{tag}`")))?;
        let mut spec = SystemSpec::new(family);
        let mut current: Option<String> = None;
        for token in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (key, value) = match token.split_once('=') {
                Some((k, v)) => {
                    let k = k.trim().to_string();
                    current = Some(k.clone());
                    (k, v.trim())
                }
                None => match &current {
                    Some(k) if k == "c" => (k.clone(), token),
                    _ => {
                        return Err(VeeError::InvalidSpec(format!(
                            "expected key=value, found `{token}`"
                        )))
                    }
                },
            };
            let v = parse_value(value)?;
            if key == "c" {
                spec.c.push(v);
            } else {
                let key = if key == "Lambda" || key == "l" { "lambda".to_string() } else { key };
                spec.params.insert(key, v);
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

/// Parses a real literal. Accepts plain decimals, `sqrt(...)`, products and quotients,
/// e.g. `2.5`, `-2/3`, `1/sqrt(2)`, `sqrt(6)`.
pub fn parse_value(s: &str) -> Result<f64> {
    let mut p = ValueParser { s: s.as_bytes(), pos: 0 };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.s.len() || !v.is_finite() {
        return Err(VeeError::InvalidSpec(format!("cannot parse number `{s}`")));
    }
    Ok(v)
}

struct ValueParser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl ValueParser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn err(&self) -> VeeError {
        VeeError::InvalidSpec(format!(
            "cannot parse number `{}`",
            String::from_utf8_lossy(self.s)
        ))
    }

    fn expr(&mut self) -> Result<f64> {
        let mut v = self.term()?;
        loop {
            self.skip_ws();
            match self.s.get(self.pos) {
                Some(b'*') => {
                    self.pos += 1;
                    v *= self.term()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    v /= self.term()?;
                }
                _ => return Ok(v),
            }
        }
    }

    fn term(&mut self) -> Result<f64> {
        self.skip_ws();
        if self.s.get(self.pos) == Some(&b'-') {
            self.pos += 1;
            return Ok(-self.term()?);
        }
        if self.s[self.pos..].starts_with(b"sqrt(") {
            self.pos += 5;
            let inner = self.expr()?;
            self.skip_ws();
            if self.s.get(self.pos) != Some(&b')') {
                return Err(self.err());
            }
            self.pos += 1;
            return Ok(inner.sqrt());
        }
        if self.s.get(self.pos) == Some(&b'(') {
            self.pos += 1;
            let inner = self.expr()?;
            self.skip_ws();
            if self.s.get(self.pos) != Some(&b')') {
                return Err(self.err());
            }
            self.pos += 1;
            return Ok(inner);
        }
        let start = self.pos;
        while self.pos < self.s.len() {
            let c = self.s[self.pos];
            let exp_sign = (c == b'-' || c == b'+')
                && self.pos > start
                && matches!(self.s[self.pos - 1], b'e' | b'E');
            if c.is_ascii_digit() || c == b'.' || c == b'e' || c == b'E' || exp_sign {
                self.pos += 1;
            } else {
                break;
            }
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .ok()
            .and_then(|t| t.parse::<f64>().ok())
            .ok_or_else(|| self.err())
    }
}

/// Square root that snaps radicands within rounding distance of zero to zero and
/// rejects genuinely negative ones.
fn radical(r: f64, what: impl FnOnce() -> String) -> Result<f64> {
    if r.abs() < 1e-12 {
        Ok(0.0)
    } else if r < 0.0 {
        Err(VeeError::InvalidSpec(format!("negative radicand {r} in {}", what())))
    } else {
        Ok(r.sqrt())
    }
}

fn e(dim: usize, i: usize) -> Vec<f64> {
    linalg::unit(dim, i)
}

fn combo(dim: usize, terms: &[(usize, f64)]) -> Vec<f64> {
    let mut v = vec![0.0; dim];
    for &(i, c) in terms {
        v[i] += c;
    }
    v
}

/// Sign vectors `(1, s_2, ..., s_n)` with `s_k = +-1`.
fn half_signs(n: usize) -> Vec<Vec<f64>> {
    (0..1usize << (n - 1))
        .map(|mask| {
            let mut v = vec![1.0; n];
            for (k, slot) in v.iter_mut().enumerate().skip(1) {
                if mask & (1 << (k - 1)) != 0 {
                    *slot = -1.0;
                }
            }
            v
        })
        .collect()
}

/// `e_i +- e_j` for `i < j`.
fn pm_pairs(dim: usize) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for i in 0..dim {
        for j in i + 1..dim {
            out.push(combo(dim, &[(i, 1.0), (j, -1.0)]));
            out.push(combo(dim, &[(i, 1.0), (j, 1.0)]));
        }
    }
    out
}

/// Orthonormal basis of `{sum x_i = 0}` in `R^{m}`: the k-th vector is
/// `(1, ..., 1, -k, 0, ...) / sqrt(k(k+1))`.
pub fn sum_zero_basis(m: usize) -> Vec<Vec<f64>> {
    (1..m)
        .map(|k| {
            let s = 1.0 / ((k * (k + 1)) as f64).sqrt();
            let mut v = vec![0.0; m];
            for slot in v.iter_mut().take(k) {
                *slot = s;
            }
            v[k] = -(k as f64) * s;
            v
        })
        .collect()
}

/// Coordinates of a sum-zero vector of `R^{m}` in [`sum_zero_basis`].
pub fn sum_zero_coords(v: &[f64]) -> Vec<f64> {
    sum_zero_basis(v.len()).iter().map(|b| linalg::dot(b, v)).collect()
}

fn finish(spec: &SystemSpec, dim: usize, rows: Vec<Vec<f64>>) -> Result<CovectorSystem> {
    let mut params = spec.params.clone();
    for (i, c) in spec.c.iter().enumerate() {
        params.insert(format!("c{}", i + 1), *c);
    }
    let sys = CovectorSystem::new(spec.to_string(), dim, rows, params, EPS)?;
    if sys.is_empty() {
        return Err(VeeError::InvalidSpec(format!("{spec}: every covector vanishes")));
    }
    sys.reduce_to_span(EPS)
}

fn a_rows(n: usize) -> Vec<Vec<f64>> {
    let m = n + 1;
    let mut rows = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            rows.push(sum_zero_coords(&combo(m, &[(i, 1.0), (j, -1.0)])));
        }
    }
    rows
}

fn b_rows(n: usize, lambda: f64) -> Vec<Vec<f64>> {
    let mut rows = pm_pairs(n);
    rows.extend((0..n).map(|i| linalg::scale(&e(n, i), lambda)));
    rows
}

fn e8_rows() -> Vec<Vec<f64>> {
    let mut rows = pm_pairs(8);
    for s in half_signs(8) {
        let minus = s.iter().filter(|&&x| x < 0.0).count();
        if minus % 2 == 0 {
            rows.push(linalg::scale(&s, 0.5));
        }
    }
    rows
}

/// Bourbaki simple roots of E_8: `a1 = (e1 + e8 - e2 - ... - e7)/2`, `a2 = e1 + e2`,
/// `a_k = e_{k-1} - e_{k-2}` for `k = 3..8`.
pub fn e8_simple_roots() -> Vec<Vec<f64>> {
    let mut out = vec![
        vec![0.5, -0.5, -0.5, -0.5, -0.5, -0.5, -0.5, 0.5],
        combo(8, &[(0, 1.0), (1, 1.0)]),
    ];
    for k in 3..=8 {
        out.push(combo(8, &[(k - 2, 1.0), (k - 3, -1.0)]));
    }
    out
}

/// A Coxeter system with a chosen simple system in the same coordinates.
#[derive(Debug, Clone)]
pub struct RootDatum {
    pub system: CovectorSystem,
    pub simple_roots: Vec<Vec<f64>>,
    /// Orbit of each simple root under the Weyl group (all 0 for simply-laced types).
    pub orbits: Vec<u8>,
}

/// E_6 and E_7 as the roots of E_8 lying in the span of the first 6 or 7 Bourbaki
/// simple roots; E_8 itself for `rank == 8`.
pub fn e_series(rank: usize) -> Result<RootDatum> {
    if !(6..=8).contains(&rank) {
        return Err(VeeError::InvalidSpec(format!("E_{rank} does not exist")));
    }
    let simple8 = e8_simple_roots();
    let simple: Vec<Vec<f64>> = simple8[..rank].to_vec();
    let basis = linalg::span_basis_from_standard(&simple, 8, EPS);
    let project = |v: &[f64]| -> Vec<f64> { basis.iter().map(|b| linalg::dot(b, v)).collect() };
    let span = linalg::orthonormal_span(&simple, 8, EPS);
    let rows: Vec<Vec<f64>> = e8_rows()
        .into_iter()
        .filter(|r| linalg::distance_to_span(r, &span) < EPS)
        .map(|r| project(&r))
        .collect();
    let spec = SystemSpec::new(match rank {
        6 => Family::E6,
        7 => Family::E7,
        _ => Family::E8,
    });
    let system = CovectorSystem::new(spec.to_string(), rank, rows, BTreeMap::new(), EPS)?;
    let simple_roots = simple.iter().map(|s| project(s)).collect();
    Ok(RootDatum {
        system,
        simple_roots,
        orbits: vec![0; rank],
    })
}

/// F_4(lambda) with simple roots `e2 - e3, e3 - e4, 2 lambda e4, lambda (e1 - e2 - e3 - e4)`.
/// Orbit 1 holds the `2 lambda e_i` and `lambda(+-e1 +- ...)` covectors, orbit 2 the `e_i +- e_j`.
pub fn f4_datum(lambda: f64) -> Result<RootDatum> {
    if lambda == 0.0 {
        return Err(VeeError::InvalidSpec(
            "F4 root datum needs lambda != 0 (the 2 lambda e_i orbit vanishes)".into(),
        ));
    }
    let system = build(&SystemSpec::new(Family::F4).with("lambda", lambda))?;
    let simple_roots = vec![
        combo(4, &[(1, 1.0), (2, -1.0)]),
        combo(4, &[(2, 1.0), (3, -1.0)]),
        combo(4, &[(3, 2.0 * lambda)]),
        linalg::scale(&[1.0, -1.0, -1.0, -1.0], lambda),
    ];
    Ok(RootDatum {
        system,
        simple_roots,
        orbits: vec![2, 2, 1, 1],
    })
}

fn golden() -> f64 {
    (1.0 + 5.0_f64.sqrt()) / 2.0
}

/// Even permutations of `0..n` for `n` = 3 or 4.
fn even_permutations(n: usize) -> Vec<Vec<usize>> {
    fn perms(items: Vec<usize>) -> Vec<Vec<usize>> {
        if items.len() <= 1 {
            return vec![items];
        }
        let mut out = Vec::new();
        for i in 0..items.len() {
            let mut rest = items.clone();
            let head = rest.remove(i);
            for mut p in perms(rest) {
                p.insert(0, head);
                out.push(p);
            }
        }
        out
    }
    perms((0..n).collect())
        .into_iter()
        .filter(|p| {
            let mut inversions = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if p[i] > p[j] {
                        inversions += 1;
                    }
                }
            }
            inversions % 2 == 0
        })
        .collect()
}

/// Sign changes of the nonzero entries of `v`, one vector per line: the first
/// nonzero entry keeps its sign.
fn all_signs(v: &[f64]) -> Vec<Vec<f64>> {
    let nz: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0.0).skip(1).collect();
    (0..1usize << nz.len())
        .map(|mask| {
            let mut w = v.to_vec();
            for (k, &i) in nz.iter().enumerate() {
                if mask & (1 << k) != 0 {
                    w[i] = -w[i];
                }
            }
            w
        })
        .collect()
}

fn h3_rows() -> Vec<Vec<f64>> {
    let phi = golden();
    let mut rows: Vec<Vec<f64>> = (0..3).map(|i| e(3, i)).collect();
    let base = [phi / 2.0, 0.5, 1.0 / (2.0 * phi)];
    for p in even_permutations(3) {
        let v: Vec<f64> = (0..3).map(|i| base[p[i]]).collect();
        rows.extend(all_signs(&v));
    }
    rows
}

fn h4_rows() -> Vec<Vec<f64>> {
    let phi = golden();
    let mut rows: Vec<Vec<f64>> = (0..4).map(|i| e(4, i)).collect();
    rows.extend(half_signs(4).into_iter().map(|s| linalg::scale(&s, 0.5)));
    let base = [0.0, 0.5, phi / 2.0, 1.0 / (2.0 * phi)];
    for p in even_permutations(4) {
        let v: Vec<f64> = (0..4).map(|i| base[p[i]]).collect();
        rows.extend(all_signs(&v));
    }
    rows
}

fn i2_rows(m: usize) -> Vec<Vec<f64>> {
    (0..m)
        .map(|k| {
            let t = PI * k as f64 / m as f64;
            vec![t.cos(), t.sin()]
        })
        .collect()
}

fn fn_type_rows(n: usize, lambda: f64, m: f64, even_only: bool) -> Vec<Vec<f64>> {
    let mut rows = b_rows(n, lambda);
    for s in half_signs(n) {
        let minus = s.iter().filter(|&&x| x < 0.0).count();
        if !even_only || minus % 2 == 0 {
            rows.push(linalg::scale(&s, m));
        }
    }
    rows
}

fn t4_rows(lambda: f64, k: f64, m: f64) -> Vec<Vec<f64>> {
    let mut rows = pm_pairs(3)
        .into_iter()
        .map(|mut r| {
            r.push(0.0);
            r
        })
        .collect::<Vec<_>>();
    rows.extend((0..3).map(|i| linalg::scale(&e(4, i), lambda)));
    rows.push(linalg::scale(&e(4, 3), k));
    rows.extend(half_signs(4).into_iter().map(|s| linalg::scale(&s, m)));
    rows
}

/// `Lambda^2 = 2(2M^2 + 1)` and `K^2 = 2M^2(2M^2 - 1)/(M^2 + 1)`.
pub fn t4_parameters(m: f64) -> Result<(f64, f64)> {
    let m2 = m * m;
    let lambda = radical(2.0 * (2.0 * m2 + 1.0), || "Lambda^2".into())?;
    let k = radical(2.0 * m2 * (2.0 * m2 - 1.0) / (m2 + 1.0), || {
        format!("K^2 at M = {m} (needs M^2 >= 1/2)")
    })?;
    Ok((lambda, k))
}

fn f3_variant1_rows(lambda: f64) -> Vec<Vec<f64>> {
    let mut rows = pm_pairs(3);
    let r = (4.0 * lambda * lambda + 2.0).sqrt();
    rows.extend((0..3).map(|i| linalg::scale(&e(3, i), r)));
    rows.extend(
        half_signs(3)
            .into_iter()
            .map(|s| linalg::scale(&s, lambda * 2.0_f64.sqrt())),
    );
    rows
}

fn f3_variant2_rows(lambda: f64) -> Vec<Vec<f64>> {
    let a = (2.0 * lambda * lambda + 1.0).sqrt();
    let r2 = 2.0_f64.sqrt();
    let mut rows = vec![
        combo(3, &[(0, a), (1, a)]),
        combo(3, &[(0, a), (1, -a)]),
        combo(3, &[(1, r2), (2, r2)]),
        combo(3, &[(1, r2), (2, -r2)]),
        combo(3, &[(0, r2), (2, r2)]),
        combo(3, &[(0, r2), (2, -r2)]),
        combo(3, &[(2, 2.0 * a)]),
        combo(3, &[(0, 2.0 * lambda)]),
        combo(3, &[(1, 2.0 * lambda)]),
    ];
    for s in [[1.0, 1.0, 2.0], [1.0, 1.0, -2.0], [1.0, -1.0, 2.0], [1.0, -1.0, -2.0]] {
        rows.push(linalg::scale(&s, lambda));
    }
    rows
}

fn t4_rest_eij_rows(m: f64) -> Result<Vec<Vec<f64>>> {
    let m2 = m * m;
    let r2 = 2.0_f64.sqrt();
    let a = radical(2.0 * (2.0 * m2 + 1.0), || "sqrt(2(2M^2+1))".into())?;
    let b = 2.0 * radical(2.0 * (m2 + 1.0), || "sqrt(2(M^2+1))".into())?;
    let c = m * radical(2.0 * (2.0 * m2 - 1.0) / (m2 + 1.0), || {
        format!("sqrt(2(2M^2-1)/(M^2+1)) at M = {m}")
    })?;
    let mut rows = vec![
        combo(3, &[(0, a)]),
        combo(3, &[(1, b)]),
        combo(3, &[(2, c)]),
        combo(3, &[(0, r2), (1, r2)]),
        combo(3, &[(0, r2), (1, -r2)]),
        combo(3, &[(0, m * r2), (2, m * r2)]),
        combo(3, &[(0, m * r2), (2, -m * r2)]),
    ];
    for s in [[1.0, 2.0, 1.0], [1.0, 2.0, -1.0], [1.0, -2.0, 1.0], [1.0, -2.0, -1.0]] {
        rows.push(linalg::scale(&s, m));
    }
    Ok(rows)
}

fn t4_rest_long_rows(m: f64) -> Vec<Vec<f64>> {
    let m2 = m * m;
    let r2 = 2.0_f64.sqrt();
    let t = m * r2 / (m2 + 1.0).sqrt();
    let s = 1.0 / (4.0 * m2 + 1.0).sqrt();
    vec![
        combo(3, &[(0, 1.0), (1, 1.0)]),
        combo(3, &[(0, 1.0), (2, 1.0)]),
        combo(3, &[(1, 1.0), (2, 1.0)]),
        combo(3, &[(0, r2)]),
        combo(3, &[(1, r2)]),
        combo(3, &[(2, r2)]),
        combo(3, &[(0, t), (1, t), (2, t)]),
        combo(3, &[(0, s), (1, -s)]),
        combo(3, &[(0, s), (2, -s)]),
        combo(3, &[(1, s), (2, -s)]),
    ]
}

fn an_deformed_rows(c: &[f64]) -> Result<Vec<Vec<f64>>> {
    let m = c.len();
    let mut rows = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let w = radical(c[i] * c[j], || format!("sqrt(c_{} c_{})", i + 1, j + 1))?;
            rows.push(sum_zero_coords(&combo(m, &[(i, w), (j, -w)])));
        }
    }
    Ok(rows)
}

fn bn_deformed_rows(gamma: f64, c: &[f64]) -> Result<Vec<Vec<f64>>> {
    let m = c.len();
    let mut rows = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let w = radical(c[i] * c[j], || format!("sqrt(c_{} c_{})", i + 1, j + 1))?;
            rows.push(combo(m, &[(i, w), (j, -w)]));
            rows.push(combo(m, &[(i, w), (j, w)]));
        }
    }
    for (i, &ci) in c.iter().enumerate() {
        let w = radical(2.0 * ci * (ci + gamma), || {
            format!("sqrt(2 c_{0}(c_{0} + gamma))", i + 1)
        })?;
        rows.push(linalg::scale(&e(m, i), w));
    }
    Ok(rows)
}

/// Builds the positive system described by `spec`.
pub fn build(spec: &SystemSpec) -> Result<CovectorSystem> {
    spec.validate()?;
    let tag = spec.family.tag();
    match spec.family {
        Family::A => {
            let n = spec.get_int("n", 1)?;
            finish(spec, n, a_rows(n))
        }
        Family::B => {
            let n = spec.get_int("n", 1)?;
            finish(spec, n, b_rows(n, spec.get_or("lambda", 1.0)))
        }
        Family::C => {
            let n = spec.get_int("n", 1)?;
            finish(spec, n, b_rows(n, 2.0))
        }
        Family::D => {
            let n = spec.get_int("n", 2)?;
            finish(spec, n, pm_pairs(n))
        }
        Family::E6 => e_series(6).map(|d| d.system),
        Family::E7 => e_series(7).map(|d| d.system),
        Family::E8 => finish(spec, 8, e8_rows()),
        Family::F4 => {
            let l = spec.get_or("lambda", 1.0);
            let mut rows = pm_pairs(4);
            rows.extend((0..4).map(|i| linalg::scale(&e(4, i), 2.0 * l)));
            rows.extend(half_signs(4).into_iter().map(|s| linalg::scale(&s, l)));
            finish(spec, 4, rows)
        }
        Family::H3 => finish(spec, 3, h3_rows()),
        Family::H4 => finish(spec, 4, h4_rows()),
        Family::I2 => {
            let m = spec.get_int("m", 3)?;
            finish(spec, 2, i2_rows(m))
        }
        Family::AnDeformed => {
            if spec.c.len() < 2 {
                return Err(VeeError::InvalidSpec(format!("{tag}: needs a list c of length >= 2")));
            }
            let rows = an_deformed_rows(&spec.c)?;
            finish(spec, spec.c.len() - 1, rows)
        }
        Family::BnDeformed => {
            if spec.c.is_empty() {
                return Err(VeeError::InvalidSpec(format!("{tag}: needs a nonempty list c")));
            }
            let rows = bn_deformed_rows(spec.get("gamma")?, &spec.c)?;
            finish(spec, spec.c.len(), rows)
        }
        Family::FnType => {
            let n = spec.get_int("n", 2)?;
            let rows = fn_type_rows(n, spec.get("lambda")?, spec.get("M")?, false);
            finish(spec, n, rows)
        }
        Family::T4 => {
            let m = spec.get("M")?;
            let (l, k) = t4_parameters(m)?;
            finish(spec, 4, t4_rows(l, k, m))
        }
        Family::T4Raw => {
            let rows = t4_rows(spec.get("lambda")?, spec.get("K")?, spec.get("M")?);
            finish(spec, 4, rows)
        }
        Family::T4RestEij => finish(spec, 3, t4_rest_eij_rows(spec.get("M")?)?),
        Family::T4RestLong => finish(spec, 3, t4_rest_long_rows(spec.get("M")?)),
        Family::F3Variant1 => finish(spec, 3, f3_variant1_rows(spec.get("lambda")?)),
        Family::F3Variant2 => finish(spec, 3, f3_variant2_rows(spec.get("lambda")?)),
        Family::E8EvenSign => {
            let mut rows = fn_type_rows(8, 0.0, 0.5, true);
            rows.retain(|r| r.iter().any(|&c| c != 0.0));
            finish(spec, 8, rows)
        }
    }
}

/// F_n-type system in dimension 8 with `Lambda = 0`, `M = 1/2`, keeping only the
/// half-sum covectors with an even number of minus signs.
pub fn build_e8_even_sign_variant() -> CovectorSystem {
    build(&SystemSpec::new(Family::E8EvenSign)).expect("fixed parameters are valid")
}

/// Parses and builds in one step.
pub fn build_str(spec: &str) -> Result<CovectorSystem> {
    build(&spec.parse::<SystemSpec>()?)
}
