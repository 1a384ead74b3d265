//! Zhu's Poisson algebra `V / C₂(V)` at finite truncation, and graded
//! Poisson algebras given directly by tables.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{fmt_q, parse_q, Echelon};
use crate::quotient::TruncationWindow;
use crate::voa::{BasisEntry, VoaData};
use crate::{QVec, Rational};

/// Graded commutative algebra with a degree `-1` bracket.
///
/// A missing table entry means zero when `complete`, and unknown otherwise.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonAlgebraData {
    pub name: String,
    pub basis: Vec<BasisEntry>,
    pub unit: usize,
    pub mult: BTreeMap<(usize, usize), QVec>,
    pub bracket: BTreeMap<(usize, usize), QVec>,
    pub complete: bool,
    /// Quotient dimension per weight `0..=W` for truncated inputs.
    pub profile: Vec<usize>,
    /// Weights `W-k..=W` all have quotient dimension zero, with `k >= 1`.
    pub c2_finite_within_window: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoissonEntry {
    pub left: String,
    pub right: String,
    pub value: Vec<(String, String)>,
}

/// On-disk Poisson algebra document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PoissonFile {
    #[serde(default)]
    pub name: String,
    pub basis: Vec<BasisEntry>,
    pub unit: String,
    pub mult: Vec<PoissonEntry>,
    pub bracket: Vec<PoissonEntry>,
    #[serde(default = "default_true")]
    pub complete: bool,
}

fn default_true() -> bool {
    true
}

pub fn load_poisson(text: &str) -> Result<PoissonAlgebraData> {
    let file: PoissonFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    PoissonAlgebraData::from_file(&file)
}

impl PoissonAlgebraData {
    pub fn from_file(file: &PoissonFile) -> Result<Self> {
        let index: HashMap<&str, usize> = file.basis.iter().enumerate().map(|(i, b)| (b.symbol.as_str(), i)).collect();
        if index.len() != file.basis.len() {
            return Err(Error::Parse("duplicate basis symbol".into()));
        }
        let look = |s: &str| index.get(s).copied().ok_or_else(|| Error::Parse(format!("unknown symbol {s}")));
        let unit = look(&file.unit)?;
        let table = |entries: &[PoissonEntry]| -> Result<BTreeMap<(usize, usize), QVec>> {
            let mut out = BTreeMap::new();
            for e in entries {
                let mut v = QVec::new();
                for (s, c) in &e.value {
                    v.add_term(look(s)?, parse_q(c)?);
                }
                if out.insert((look(&e.left)?, look(&e.right)?), v).is_some() {
                    return Err(Error::Parse(format!("duplicate entry ({}, {})", e.left, e.right)));
                }
            }
            Ok(out)
        };
        let mut p = PoissonAlgebraData {
            name: file.name.clone(),
            basis: file.basis.clone(),
            unit,
            mult: table(&file.mult)?,
            bracket: table(&file.bracket)?,
            complete: file.complete,
            profile: Vec::new(),
            c2_finite_within_window: false,
        };
        p.profile = p.weight_profile();
        Ok(p)
    }

    pub fn to_file(&self) -> PoissonFile {
        let entries = |t: &BTreeMap<(usize, usize), QVec>| {
            t.iter()
                .filter(|(_, v)| !self.complete || !v.is_zero())
                .map(|((i, j), v)| PoissonEntry {
                    left: self.basis[*i].symbol.clone(),
                    right: self.basis[*j].symbol.clone(),
                    value: v.iter().map(|(k, c)| (self.basis[k].symbol.clone(), fmt_q(c))).collect(),
                })
                .collect()
        };
        PoissonFile {
            name: self.name.clone(),
            basis: self.basis.clone(),
            unit: self.basis[self.unit].symbol.clone(),
            mult: entries(&self.mult),
            bracket: entries(&self.bracket),
            complete: self.complete,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn weight(&self, i: usize) -> i64 {
        self.basis[i].weight
    }

    fn weight_profile(&self) -> Vec<usize> {
        let top = self.basis.iter().map(|b| b.weight).max().unwrap_or(0).max(0);
        let mut prof = vec![0; top as usize + 1];
        for b in &self.basis {
            if b.weight >= 0 {
                prof[b.weight as usize] += 1;
            }
        }
        prof
    }

    /// `e_i · e_j`; `None` when unknown.
    pub fn mult_entry(&self, i: usize, j: usize) -> Option<QVec> {
        if i == self.unit {
            return Some(QVec::unit(j));
        }
        if j == self.unit {
            return Some(QVec::unit(i));
        }
        lookup(&self.mult, self.complete, i, j)
    }

    /// `{e_i, e_j}`; `None` when unknown.
    pub fn bracket_entry(&self, i: usize, j: usize) -> Option<QVec> {
        lookup(&self.bracket, self.complete, i, j)
    }

    /// Bilinear product; `None` if any needed entry is unknown.
    pub fn mul(&self, x: &QVec, y: &QVec) -> Option<QVec> {
        bilinear(x, y, |i, j| self.mult_entry(i, j))
    }

    pub fn br(&self, x: &QVec, y: &QVec) -> Option<QVec> {
        bilinear(x, y, |i, j| self.bracket_entry(i, j))
    }

    /// Number of non-unit basis elements.
    pub fn r(&self) -> usize {
        self.dim().saturating_sub(1)
    }

    pub fn render(&self, x: &QVec) -> String {
        if x.is_zero() {
            return "0".into();
        }
        x.iter().map(|(i, c)| format!("{}*{}", fmt_q(c), self.basis[i].symbol)).collect::<Vec<_>>().join(" + ")
    }
}

fn lookup(t: &BTreeMap<(usize, usize), QVec>, complete: bool, i: usize, j: usize) -> Option<QVec> {
    match t.get(&(i, j)) {
        Some(v) => Some(v.clone()),
        None if complete => Some(QVec::new()),
        None => None,
    }
}

fn bilinear(x: &QVec, y: &QVec, f: impl Fn(usize, usize) -> Option<QVec>) -> Option<QVec> {
    let mut out = QVec::new();
    for (i, a) in x.iter() {
        for (j, b) in y.iter() {
            out.add_scaled(&f(i, j)?, &(a * b));
        }
    }
    Some(out)
}

/// Echelon form of `C₂(V) ∩ V[r]`, spanned by `u_(n)v` with `n <= -2`.
pub fn c2_span(voa: &VoaData, r: i64) -> Result<Echelon<Rational>> {
    let mut e = Echelon::new();
    for u in 0..voa.dim() {
        for v in 0..voa.dim() {
            let n = voa.weight(u) + voa.weight(v) - 1 - r;
            // vac_(n) vanishes for n != -1
            if n > -2 || u == voa.vacuum {
                continue;
            }
            if let Some(p) = voa.product_ref(n, u, v)? {
                e.insert(p);
            }
        }
    }
    Ok(e)
}

/// `V[r] / (C₂(V) ∩ V[r])` for every `r <= W`, with the induced tables.
pub fn c2_quotient(voa: &VoaData, w: &TruncationWindow) -> Result<PoissonAlgebraData> {
    let top = w.max_weight;
    if top > voa.max_weight() {
        return Err(Error::OutOfWindow(format!("weight window {top} exceeds data weight {}", voa.max_weight())));
    }
    let spans: Vec<Echelon<Rational>> = (0..=top).map(|r| c2_span(voa, r)).collect::<Result<_>>()?;
    // quotient representatives: non-pivot basis elements of each weight
    let mut reps: Vec<usize> = Vec::new();
    let mut profile = Vec::new();
    for r in 0..=top {
        let here: Vec<usize> = voa.of_weight(r).into_iter().filter(|&u| !spans[r as usize].is_pivot(u)).collect();
        profile.push(here.len());
        reps.extend(here);
    }
    let pos: HashMap<usize, usize> = reps.iter().enumerate().map(|(i, u)| (*u, i)).collect();
    let class = |x: &QVec, r: i64| -> QVec {
        if r < 0 || r > top {
            return QVec::new();
        }
        spans[r as usize].reduce(x).map_indices(|u| pos[&u])
    };
    let mut mult = BTreeMap::new();
    let mut bracket = BTreeMap::new();
    for (i, &u) in reps.iter().enumerate() {
        for (j, &v) in reps.iter().enumerate() {
            let s = voa.weight(u) + voa.weight(v);
            if s <= top {
                mult.insert((i, j), class(&voa.product(-1, u, v)?, s));
            }
            if s - 1 <= top {
                bracket.insert((i, j), class(&voa.product(0, u, v)?, s - 1));
            }
        }
    }
    let trailing = profile.iter().rev().take_while(|&&k| k == 0).count();
    Ok(PoissonAlgebraData {
        name: format!("{}/C2", voa.name),
        basis: reps.iter().map(|&u| voa.basis[u].clone()).collect(),
        unit: pos[&voa.vacuum],
        mult,
        bracket,
        complete: false,
        profile,
        c2_finite_within_window: trailing >= 2,
    })
}

/// Failed Poisson identity with its basis witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoissonFailure {
    pub law: &'static str,
    pub witness: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PoissonReport {
    pub checked: usize,
    pub skipped_unknown: usize,
    pub exhaustive: bool,
    pub failures: Vec<PoissonFailure>,
}

impl PoissonReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn laws_failed(&self) -> Vec<&'static str> {
        let mut v: Vec<&'static str> = self.failures.iter().map(|f| f.law).collect();
        v.sort();
        v.dedup();
        v
    }
}

/// Checks the graded Poisson axioms on basis triples. All triples are
/// visited when the input is complete with dimension at most 6 or when
/// `sample` is `None`; otherwise every `step`-th triple, with `step` chosen
/// so that about `sample` triples are visited.
pub fn poisson_check(p: &PoissonAlgebraData, sample: Option<usize>) -> PoissonReport {
    let n = p.dim();
    let total = n * n * n;
    let exhaustive = sample.is_none() || (p.complete && n <= 6);
    let step = if exhaustive { 1 } else { (total / sample.unwrap().max(1)).max(1) };
    let mut rep = PoissonReport { exhaustive, ..Default::default() };
    let name = |i: usize| p.basis[i].symbol.clone();
    let fail = |rep: &mut PoissonReport, law: &'static str, w: &[usize]| {
        rep.failures.push(PoissonFailure { law, witness: w.iter().map(|&i| name(i)).collect() });
    };
    let weight_ok = |v: &QVec, want: i64| v.support().all(|k| p.weight(k) == want);
    for i in 0..n {
        for j in 0..n {
            let (ei, ej) = (QVec::unit(i), QVec::unit(j));
            let target = p.weight(i) + p.weight(j);
            match (p.mul(&ei, &ej), p.mul(&ej, &ei)) {
                (Some(a), Some(b)) => {
                    rep.checked += 1;
                    if a != b {
                        fail(&mut rep, "commutativity", &[i, j]);
                    }
                    if !weight_ok(&a, target) {
                        fail(&mut rep, "grading-mult", &[i, j]);
                    }
                }
                _ => rep.skipped_unknown += 1,
            }
            match (p.br(&ei, &ej), p.br(&ej, &ei)) {
                (Some(a), Some(b)) => {
                    rep.checked += 1;
                    if a != b.neg() {
                        fail(&mut rep, "antisymmetry", &[i, j]);
                    }
                    if !weight_ok(&a, target - 1) {
                        fail(&mut rep, "grading-bracket", &[i, j]);
                    }
                }
                _ => rep.skipped_unknown += 1,
            }
        }
    }
    for t in (0..total).step_by(step) {
        let (i, j, k) = (t / (n * n), (t / n) % n, t % n);
        let (x, y, z) = (QVec::unit(i), QVec::unit(j), QVec::unit(k));
        let assoc = (|| Some(p.mul(&p.mul(&x, &y)?, &z)? == p.mul(&x, &p.mul(&y, &z)?)?))();
        let jacobi = (|| {
            let a = p.br(&x, &p.br(&y, &z)?)?;
            let b = p.br(&y, &p.br(&z, &x)?)?;
            let c = p.br(&z, &p.br(&x, &y)?)?;
            Some(a.add(&b).add(&c).is_zero())
        })();
        let leibniz = (|| {
            let l = p.br(&p.mul(&x, &y)?, &z)?;
            let r = p.mul(&x, &p.br(&y, &z)?)?.add(&p.mul(&y, &p.br(&x, &z)?)?);
            Some(l == r)
        })();
        for (law, ok) in [("associativity", assoc), ("jacobi", jacobi), ("leibniz", leibniz)] {
            match ok {
                Some(true) => rep.checked += 1,
                Some(false) => {
                    rep.checked += 1;
                    fail(&mut rep, law, &[i, j, k]);
                }
                None => rep.skipped_unknown += 1,
            }
        }
    }
    if p.weight(p.unit) != 0 {
        fail(&mut rep, "unit-weight", &[p.unit]);
    }
    rep
}

/// Class of a homogeneous vector of weight `r` in the quotient basis, or
/// `None` if `r` is outside the window.
pub fn c2_class(voa: &VoaData, p: &PoissonAlgebraData, x: &QVec, r: i64) -> Result<Option<QVec>> {
    if r < 0 || r as usize >= p.profile.len() {
        return Ok(None);
    }
    let red = c2_span(voa, r)?.reduce(x);
    let mut out = QVec::new();
    for (u, c) in red.iter() {
        let k = p
            .basis
            .iter()
            .position(|b| b.symbol == voa.symbol(u))
            .ok_or_else(|| Error::InvariantViolation(vec![format!("{} is not a quotient representative", voa.symbol(u))]))?;
        out.add_term(k, c.clone());
    }
    Ok(Some(out))
}

/// One-dimensional Poisson algebra `k·1`.
pub fn point_algebra() -> PoissonAlgebraData {
    PoissonAlgebraData {
        name: "point".into(),
        basis: vec![BasisEntry { symbol: "1".into(), weight: 0 }],
        unit: 0,
        mult: BTreeMap::from([((0, 0), QVec::unit(0))]),
        bracket: BTreeMap::new(),
        complete: true,
        profile: vec![1],
        c2_finite_within_window: false,
    }
}

/// Coefficient helper for table entries.
pub fn scalar_entry(i: usize, c: i64) -> QVec {
    let mut v = QVec::new();
    if c != 0 {
        v.add_term(i, Rational::from_integer(c.into()));
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_algebra_passes() {
        let p = point_algebra();
        let rep = poisson_check(&p, None);
        assert!(rep.passed());
        assert!(rep.exhaustive);
        assert_eq!(p.mul(&QVec::unit(0), &QVec::unit(0)), Some(QVec::unit(0)));
    }

    #[test]
    fn file_round_trip() {
        let p = point_algebra();
        let q = load_poisson(&p.to_json()).unwrap();
        assert_eq!(q.basis, p.basis);
        assert_eq!(q.mul(&QVec::unit(0), &QVec::unit(0)), Some(QVec::unit(0)));
    }
}
