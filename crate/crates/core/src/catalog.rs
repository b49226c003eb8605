//! Restrictions of the exceptional root systems along parabolic subsystems.
//!
//! Simple systems (Bourbaki labels, 1-based in the docs, 0-based in code):
//!
//! * E_8: `a1 = (e1 + e8 - e2 - ... - e7)/2`, `a2 = e1 + e2`, `a_k = e_{k-1} - e_{k-2}`
//!   (k = 3..8), graph `1-3-4-5-6-7-8` with `2` attached to `4`. E_7 and E_6 use the
//!   first 7 and 6 of these.
//! * F_4(L): `a1 = e2 - e3`, `a2 = e3 - e4`, `a3 = 2L e4`, `a4 = L(e1 - e2 - e3 - e4)`.
//!   Class 1 of a duplicated F_4 label is the `2L e_i` orbit, class 2 the `e_i +- e_j`
//!   orbit.
//!
//! Subsets are grouped first by Coxeter type and orbit pattern, then by equivalence of
//! their restrictions. The two E_7 label clashes are indexed by reference subsets:
//! `(A_1^3)_1 = {a2, a5, a7}`, `(A_1^3)_2 = {a3, a5, a7}`,
//! `(A_1xA_3)_1 = {a2, a5, a6, a7}`, `(A_1xA_3)_2 = {a3, a5, a6, a7}`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::builders::{build_str, e_series, f4_datum, RootDatum};
use crate::equivalence::are_equivalent;
use crate::error::{Result, VeeError};
use crate::linalg;
use crate::restriction::{restrict_along, RestrictionResult};
use crate::system::CovectorSystem;
use crate::tolerance::TolerancePolicy;
use crate::veecheck::check_vee;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Group {
    E6,
    E7,
    E8,
    F4,
}

impl Group {
    pub fn rank(self) -> usize {
        match self {
            Group::E6 => 6,
            Group::E7 => 7,
            Group::E8 => 8,
            Group::F4 => 4,
        }
    }

    pub fn tex(self) -> &'static str {
        match self {
            Group::E6 => "E_6",
            Group::E7 => "E_7",
            Group::E8 => "E_8",
            Group::F4 => "F_4",
        }
    }
}

impl fmt::Display for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for Group {
    type Err = VeeError;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().replace('_', "").as_str() {
            "E6" => Ok(Group::E6),
            "E7" => Ok(Group::E7),
            "E8" => Ok(Group::E8),
            "F4" => Ok(Group::F4),
            _ => Err(VeeError::InvalidSpec(format!("unknown group {s:?} (expected E6, E7, E8 or F4)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParabolicClass {
    pub group: Group,
    pub subtype_label: String,
    /// 0-based indices into the simple system; a representative of the class.
    pub simple_root_subset: Vec<usize>,
    pub corank: usize,
}

#[derive(Debug, Clone)]
pub struct CatalogEntry {
    pub parabolic: ParabolicClass,
    pub system: CovectorSystem,
    pub dim: usize,
    pub count: usize,
    pub is_vee: bool,
    pub identified_as: Option<String>,
}

/// The catalog line format: keys in alphabetical order.
#[derive(Serialize)]
struct EntryLine<'a> {
    count: usize,
    covectors: Vec<Vec<f64>>,
    dim: usize,
    group: Group,
    identified_as: Option<&'a str>,
    simple_root_subset: Vec<usize>,
    subtype_label: &'a str,
}

impl CatalogEntry {
    pub fn to_json_line(&self) -> String {
        let line = EntryLine {
            count: self.count,
            covectors: self.system.rows(),
            dim: self.dim,
            group: self.parabolic.group,
            identified_as: self.identified_as.as_deref(),
            simple_root_subset: self.parabolic.simple_root_subset.iter().map(|i| i + 1).collect(),
            subtype_label: &self.parabolic.subtype_label,
        };
        serde_json::to_string(&line).expect("catalog lines serialize")
    }
}

pub fn root_datum(group: Group, lambda: f64) -> Result<RootDatum> {
    match group {
        Group::F4 => f4_datum(lambda),
        g => e_series(g.rank()),
    }
}

/// Coxeter type of the subgraph on `subset`, e.g. `A_1^3`, `A_1×A_3`, `D_4`.
pub fn coxeter_type(simple_roots: &[Vec<f64>], subset: &[usize]) -> String {
    let n = subset.len();
    let cos2 = |a: usize, b: usize| {
        let (x, y) = (&simple_roots[subset[a]], &simple_roots[subset[b]]);
        let d = linalg::dot(x, y);
        d * d / (linalg::dot(x, x) * linalg::dot(y, y))
    };
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|a| (0..n).filter(|&b| b != a && cos2(a, b) > 1e-9).collect())
        .collect();
    let mut seen = vec![false; n];
    let mut parts: Vec<(char, usize)> = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut comp = vec![start];
        seen[start] = true;
        let mut k = 0;
        while k < comp.len() {
            for &b in &adj[comp[k]] {
                if !seen[b] {
                    seen[b] = true;
                    comp.push(b);
                }
            }
            k += 1;
        }
        parts.push(component_type(&comp, &adj, &cos2, simple_roots, subset));
    }
    parts.sort();
    let mut out: Vec<String> = Vec::new();
    let mut i = 0;
    while i < parts.len() {
        let j = (i..parts.len()).find(|&j| parts[j] != parts[i]).unwrap_or(parts.len());
        let name = format!("{}_{}", parts[i].0, parts[i].1);
        match j - i {
            1 => out.push(name),
            2 => out.push(format!("{name}×{name}")),
            c => out.push(format!("{name}^{c}")),
        }
        i = j;
    }
    out.join("×")
}

fn component_type(
    comp: &[usize],
    adj: &[Vec<usize>],
    cos2: &dyn Fn(usize, usize) -> f64,
    simple_roots: &[Vec<f64>],
    subset: &[usize],
) -> (char, usize) {
    let n = comp.len();
    let double = comp
        .iter()
        .flat_map(|&a| adj[a].iter().map(move |&b| (a, b)))
        .find(|&(a, b)| (cos2(a, b) - 0.5).abs() < 1e-6);
    if let Some((a, b)) = double {
        if n == 2 {
            return ('B', 2);
        }
        if n == 4 {
            return ('F', 4);
        }
        // the end node of the double bond decides B (short end) against C (long end)
        let (end, other) = if adj[a].len() == 1 { (a, b) } else { (b, a) };
        let len = |k: usize| linalg::norm(&simple_roots[subset[k]]);
        return if len(end) < len(other) { ('B', n) } else { ('C', n) };
    }
    if let Some(&branch) = comp.iter().find(|&&a| adj[a].len() == 3) {
        let mut arms: Vec<usize> = adj[branch]
            .iter()
            .map(|&start| {
                let (mut prev, mut cur, mut len) = (branch, start, 1);
                while let Some(&next) = adj[cur].iter().find(|&&x| x != prev) {
                    prev = cur;
                    cur = next;
                    len += 1;
                }
                len
            })
            .collect();
        arms.sort_unstable();
        return if arms[0] == 1 && arms[1] == 1 { ('D', n) } else { ('E', n) };
    }
    ('A', n)
}

/// Reference subsets for labels that occur for more than one class.
fn reference_subsets(group: Group) -> &'static [(&'static str, &'static [usize])] {
    match group {
        Group::E7 => &[
            ("A_1^3", &[1, 4, 6]),
            ("A_1^3", &[2, 4, 6]),
            ("A_1×A_3", &[1, 4, 5, 6]),
            ("A_1×A_3", &[2, 4, 5, 6]),
        ],
        _ => &[],
    }
}

/// Nonempty subsets of `0..n` with at most `max` elements, by size then lexicographically.
fn subsets(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for size in 1..=max.min(n) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(idx.clone());
            let Some(pos) = (0..size).rev().find(|&p| idx[p] < n - size + p) else {
                break;
            };
            idx[pos] += 1;
            for q in pos + 1..size {
                idx[q] = idx[q - 1] + 1;
            }
        }
    }
    out
}

/// A class together with the restriction computed for its representative.
#[derive(Debug, Clone)]
pub struct ClassifiedStratum {
    pub class: ParabolicClass,
    pub restriction: RestrictionResult,
    /// Every subset found in this class.
    pub members: Vec<Vec<usize>>,
}

/// Enumerates corank >= 3 subsets and groups them into classes with restrictions.
pub fn classify(group: Group, lambda: f64, policy: &TolerancePolicy) -> Result<Vec<ClassifiedStratum>> {
    let datum = root_datum(group, lambda)?;
    let rank = group.rank();
    struct Pending {
        label: String,
        orbit_key: Vec<u8>,
        members: Vec<Vec<usize>>,
        restriction: RestrictionResult,
    }
    let mut found: Vec<Pending> = Vec::new();
    for subset in subsets(rank, rank - 3) {
        let label = coxeter_type(&datum.simple_roots, &subset);
        let mut orbit_key: Vec<u8> = subset.iter().map(|&i| datum.orbits[i]).collect();
        orbit_key.sort_unstable();
        let rows: Vec<Vec<f64>> = subset.iter().map(|&i| datum.simple_roots[i].clone()).collect();
        let restriction = restrict_along(&datum.system, &rows, policy)?;
        let mut placed = false;
        for p in found.iter_mut().filter(|p| p.label == label && p.orbit_key == orbit_key) {
            if are_equivalent(&p.restriction.system, &restriction.system, policy)? {
                p.members.push(subset.clone());
                placed = true;
                break;
            }
        }
        if !placed {
            found.push(Pending {
                label,
                orbit_key,
                members: vec![subset],
                restriction,
            });
        }
    }

    let refs = reference_subsets(group);
    let ref_rank = |p: &Pending| {
        refs.iter()
            .filter(|(l, _)| *l == p.label)
            .position(|(_, s)| p.members.iter().any(|m| m == s))
            .unwrap_or(usize::MAX)
    };
    // stable sort keeps encounter order among unreferenced classes
    let mut order: Vec<usize> = (0..found.len()).collect();
    order.sort_by_key(|&i| (found[i].members[0].len(), ref_rank(&found[i]), found[i].orbit_key.clone()));
    let mut per_label: BTreeMap<String, usize> = BTreeMap::new();
    for p in &found {
        *per_label.entry(p.label.clone()).or_default() += 1;
    }
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    let mut out = Vec::with_capacity(found.len());
    let mut taken: Vec<Option<Pending>> = found.into_iter().map(Some).collect();
    for i in order {
        let p = taken[i].take().expect("each class is emitted once");
        let label = if per_label[&p.label] > 1 {
            let k = seen.entry(p.label.clone()).or_default();
            *k += 1;
            format!("{} (class {k})", p.label)
        } else {
            p.label.clone()
        };
        let representative = refs
            .iter()
            .filter(|(l, _)| *l == p.label)
            .map(|(_, s)| s.to_vec())
            .find(|s| p.members.contains(s))
            .unwrap_or_else(|| p.members[0].clone());
        out.push(ClassifiedStratum {
            class: ParabolicClass {
                group,
                subtype_label: label,
                corank: rank - representative.len(),
                simple_root_subset: representative,
            },
            restriction: p.restriction,
            members: p.members,
        });
    }
    Ok(out)
}

pub fn enumerate_parabolic_classes(group: Group, lambda: f64, policy: &TolerancePolicy) -> Result<Vec<ParabolicClass>> {
    Ok(classify(group, lambda, policy)?.into_iter().map(|s| s.class).collect())
}

/// Named systems tried when identifying catalog entries.
pub fn candidates(group: Group, lambda: f64) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = [
        ("F_6", "Fn:n=6,lambda=2,M=1/sqrt(2)"),
        ("F_5", "Fn:n=5,lambda=sqrt(6),M=1"),
        ("F_4(√2)", "F4:lambda=sqrt(2)"),
        ("F_4(1/2)", "F4:lambda=1/2"),
        ("F_3^1(√2)", "F3_1:lambda=sqrt(2)"),
        ("F_3^2(√2)", "F3_2:lambda=sqrt(2)"),
        ("F_3^1(1/2)", "F3_1:lambda=1/2"),
        ("F_3^2(1/2)", "F3_2:lambda=1/2"),
        ("B_3(√2/2)", "B:n=3,lambda=sqrt(2)/2"),
        ("B_3(−2/3;1,1,2/3)", "Bn_def:gamma=-2/3,c=1,1,2/3"),
        ("T_4(M=1)", "T4:M=1"),
        ("T_4(M=1/√2)", "T4:M=1/sqrt(2)"),
        ("T_4^ij(M=1)", "T4_eij:M=1"),
        ("T_4^ij(M=1/√2)", "T4_eij:M=1/sqrt(2)"),
        ("T_4^long(M=1)", "T4_long:M=1"),
        ("T_4^long(M=1/√2)", "T4_long:M=1/sqrt(2)"),
    ]
    .iter()
    .map(|(a, b)| (a.to_string(), b.to_string()))
    .collect();
    if group == Group::F4 {
        out.insert(0, (format!("F_3^1({lambda})"), format!("F3_1:lambda={lambda}")));
        out.insert(1, (format!("F_3^2({lambda})"), format!("F3_2:lambda={lambda}")));
    }
    out
}

fn identify(system: &CovectorSystem, named: &[(String, CovectorSystem)], policy: &TolerancePolicy) -> Result<Option<String>> {
    for (name, c) in named {
        if c.dim == system.dim && c.len() == system.len() && are_equivalent(system, c, policy)? {
            return Ok(Some(name.clone()));
        }
    }
    Ok(None)
}

/// All corank >= 3 restrictions of `group` (with `F_4` at parameter `lambda`).
pub fn build_catalog(group: Group, lambda: Option<f64>, policy: &TolerancePolicy) -> Result<Vec<CatalogEntry>> {
    let lambda = lambda.unwrap_or(1.0);
    let named: Vec<(String, CovectorSystem)> = candidates(group, lambda)
        .into_iter()
        .filter_map(|(name, spec)| build_str(&spec).ok().map(|s| (name, s)))
        .collect();
    classify(group, lambda, policy)?
        .into_iter()
        .map(|s| {
            let system = s.restriction.system;
            let is_vee = check_vee(&system, policy)?.is_vee;
            let identified_as = identify(&system, &named, policy)?;
            Ok(CatalogEntry {
                dim: system.dim,
                count: system.len(),
                parabolic: s.class,
                system,
                is_vee,
                identified_as,
            })
        })
        .collect()
}

/// One checked identity.
#[derive(Debug, Clone, Serialize)]
pub struct ReportLine {
    pub statement: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub lines: Vec<ReportLine>,
}

impl Report {
    pub fn all_passed(&self) -> bool {
        self.lines.iter().all(|l| l.passed)
    }

    fn push(&mut self, statement: impl Into<String>, outcome: Result<bool>, expected: bool) {
        let (passed, detail) = match outcome {
            Ok(eq) if eq == expected => (true, if eq { "equivalent" } else { "not equivalent" }.to_string()),
            Ok(eq) => (false, if eq { "unexpectedly equivalent" } else { "not equivalent" }.to_string()),
            Err(e) => (false, format!("error: {e}")),
        };
        self.lines.push(ReportLine {
            statement: statement.into(),
            passed,
            detail,
        });
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "[{}] {}  ({})", if l.passed { "PASS" } else { "FAIL" }, l.statement, l.detail)?;
        }
        Ok(())
    }
}

/// Restrictions of one group, looked up by class label.
pub struct Strata {
    group: Group,
    strata: Vec<ClassifiedStratum>,
}

impl Strata {
    pub fn new(group: Group, lambda: f64, policy: &TolerancePolicy) -> Result<Self> {
        Ok(Self {
            group,
            strata: classify(group, lambda, policy)?,
        })
    }

    /// The restriction labelled `label`, e.g. `"A_1^3 (class 1)"` or `"D_4"`.
    pub fn get(&self, label: &str) -> Result<&CovectorSystem> {
        self.strata
            .iter()
            .find(|s| s.class.subtype_label == label)
            .map(|s| &s.restriction.system)
            .ok_or_else(|| VeeError::InvalidSpec(format!("no class {label:?} in the {} catalog", self.group)))
    }
}

fn f4_class(lambda: f64, class: usize, policy: &TolerancePolicy) -> Result<CovectorSystem> {
    let strata = Strata::new(Group::F4, lambda, policy)?;
    Ok(strata.get(&format!("A_1 (class {class})"))?.clone())
}

fn equiv(a: Result<CovectorSystem>, b: Result<CovectorSystem>, policy: &TolerancePolicy) -> Result<bool> {
    are_equivalent(&a?, &b?, policy)
}

/// Checks the table of identities between exceptional restrictions and the
/// deformed families.
pub fn verify_known_equivalences(policy: &TolerancePolicy) -> Result<Report> {
    let e8 = Strata::new(Group::E8, 1.0, policy)?;
    let e7 = Strata::new(Group::E7, 1.0, policy)?;
    let e6 = Strata::new(Group::E6, 1.0, policy)?;
    let s2 = 2.0_f64.sqrt();
    let mut r = Report::default();
    let p = policy;
    let b = |spec: &str| build_str(spec);
    let g = |s: &Strata, label: &str| s.get(label).cloned();

    r.push("(E_8, D_4) = F_4(√2)", equiv(g(&e8, "D_4"), b("F4:lambda=sqrt(2)"), p), true);
    r.push("(E_8, D_5) = (F_4(√2), A_1)_1", equiv(g(&e8, "D_5"), f4_class(s2, 1, p), p), true);
    r.push("(E_8, A_1×D_4) = (F_4(√2), A_1)_2", equiv(g(&e8, "A_1×D_4"), f4_class(s2, 2, p), p), true);
    r.push("(E_7, A_1^3)_1 = F_4(1/2)", equiv(g(&e7, "A_1^3 (class 1)"), b("F4:lambda=1/2"), p), true);
    r.push("(E_7, A_1^4) = (F_4(1/2), A_1)_1", equiv(g(&e7, "A_1^4"), f4_class(0.5, 1, p), p), true);
    r.push(
        "(E_7, A_1×A_3)_1 = (F_4(1/2), A_1)_2",
        equiv(g(&e7, "A_1×A_3 (class 1)"), f4_class(0.5, 2, p), p),
        true,
    );
    r.push("(E_7, D_4) = B_3(√2/2)", equiv(g(&e7, "D_4"), b("B:n=3,lambda=sqrt(2)/2"), p), true);
    r.push(
        "(E_6, A_3) = B_3(−2/3; 1,1,2/3)",
        equiv(g(&e6, "A_3"), b("Bn_def:gamma=-2/3,c=1,1,2/3"), p),
        true,
    );
    for l in [0.3, 0.5, 0.7, 1.0, s2] {
        r.push(
            format!("(F_4({l:.4}), A_1)_1 = (F_4(1/(2·{l:.4})), A_1)_2"),
            equiv(f4_class(l, 1, p), f4_class(0.5 / l, 2, p), p),
            true,
        );
    }
    r.push("(F_4(0), A_1)_1 = B_3(0; 1,1,1)", equiv(b("F3_1:lambda=0"), b("Bn_def:gamma=0,c=1,1,1"), p), true);
    r.push("B_3(0; 1,1,1) = B_3(√2)", equiv(b("Bn_def:gamma=0,c=1,1,1"), b("B:n=3,lambda=sqrt(2)"), p), true);
    r.push("(F_4(0), A_1)_2 = B_3(−1; 1,1,2)", equiv(b("F3_2:lambda=0"), b("Bn_def:gamma=-1,c=1,1,2"), p), true);
    for l in [0.3, 0.7, 1.0, s2] {
        r.push(
            format!("F_4({l:.4}) = F_4(1/(2·{l:.4}))"),
            equiv(b(&format!("F4:lambda={l}")), b(&format!("F4:lambda={}", 0.5 / l)), p),
            true,
        );
    }
    r.push("(E_8, A_1×A_1) = F_6", equiv(g(&e8, "A_1×A_1"), b("Fn:n=6,lambda=2,M=1/sqrt(2)"), p), true);
    r.push("(E_8, A_3) = F_5", equiv(g(&e8, "A_3"), b("Fn:n=5,lambda=sqrt(6),M=1"), p), true);
    for l in [0.4, 1.0, s2] {
        r.push(
            format!("F_3^1({l:.4}) = F_3^2(1/(2·{l:.4}))"),
            equiv(b(&format!("F3_1:lambda={l}")), b(&format!("F3_2:lambda={}", 0.5 / l)), p),
            true,
        );
    }
    for l in [0.4, 1.0, s2] {
        r.push(
            format!("(F_4({l:.4}), A_1)_1 = F_3^1({l:.4})"),
            equiv(f4_class(l, 1, p), b(&format!("F3_1:lambda={l}")), p),
            true,
        );
    }
    Ok(r)
}

/// Identifies the four-dimensional family and its two restrictions with Coxeter
/// restrictions at `M^2 = 1` and `M^2 = 1/2`, and checks that `M = 0.8` matches neither.
pub fn verify_t4_identifications(policy: &TolerancePolicy) -> Result<Report> {
    let e7 = Strata::new(Group::E7, 1.0, policy)?;
    let e6 = Strata::new(Group::E6, 1.0, policy)?;
    let p = policy;
    let b = |spec: &str| build_str(spec);
    let g = |s: &Strata, label: &str| s.get(label).cloned();
    let mut r = Report::default();
    r.push("T_4(M=1) = (E_7, A_3)", equiv(b("T4:M=1"), g(&e7, "A_3"), p), true);
    r.push("T_4(M=1/√2) = (E_6, A_1×A_1)", equiv(b("T4:M=1/sqrt(2)"), g(&e6, "A_1×A_1"), p), true);
    r.push(
        "T_4^ij(M=1) = (E_7, A_1×A_3)_2",
        equiv(b("T4_eij:M=1"), g(&e7, "A_1×A_3 (class 2)"), p),
        true,
    );
    r.push("T_4^ij(M=1/√2) = (E_6, A_1^3)", equiv(b("T4_eij:M=1/sqrt(2)"), g(&e6, "A_1^3"), p), true);
    r.push("T_4^long(M=1) = (E_7, A_4)", equiv(b("T4_long:M=1"), g(&e7, "A_4"), p), true);
    r.push(
        "T_4^long(M=1/√2) = (E_6, A_1×A_2)",
        equiv(b("T4_long:M=1/sqrt(2)"), g(&e6, "A_1×A_2"), p),
        true,
    );
    r.push("T_4(M=0.8) ≠ (E_7, A_3)", equiv(b("T4:M=0.8"), g(&e7, "A_3"), p), false);
    r.push("T_4(M=0.8) ≠ (E_6, A_1×A_1)", equiv(b("T4:M=0.8"), g(&e6, "A_1×A_1"), p), false);
    Ok(r)
}
