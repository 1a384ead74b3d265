//! Truncated vertex operator algebras given by structure constants.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{binom, fmt_q, parse_q};
use crate::{QVec, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisEntry {
    pub symbol: String,
    pub weight: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub max_weight: i64,
    pub n_min: i64,
    pub n_max: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProductEntry {
    pub n: i64,
    pub left: String,
    pub right: String,
    pub value: Vec<(String, String)>,
}

/// On-disk structure constant document.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoaFile {
    pub name: String,
    pub lower_bound_m: i64,
    pub central_charge: String,
    pub basis: Vec<BasisEntry>,
    pub vacuum: String,
    pub conformal: Option<String>,
    pub window: Window,
    pub products: Vec<ProductEntry>,
}

/// A validated truncated vertex operator algebra.
///
/// Every product `u_(n)v` is either stored, certified zero, or out of window.
#[derive(Clone, Debug)]
pub struct VoaData {
    pub name: String,
    pub lower_bound: i64,
    pub central_charge: Rational,
    pub basis: Vec<BasisEntry>,
    pub vacuum: usize,
    pub conformal: Option<usize>,
    pub window: Window,
    products: BTreeMap<(i64, usize, usize), QVec>,
    index: HashMap<String, usize>,
}

pub fn load_voa(text: &str) -> Result<VoaData> {
    let file: VoaFile = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    VoaData::from_file(&file)
}

impl VoaData {
    pub fn from_file(file: &VoaFile) -> Result<VoaData> {
        let mut bad = Vec::new();
        let central_charge = match parse_q(&file.central_charge) {
            Ok(c) => c,
            Err(e) => return Err(Error::Parse(format!("central_charge: {e}"))),
        };
        let w = file.window;
        if w.max_weight < 0 || w.n_min > w.n_max {
            bad.push(format!("window {w:?} is empty"));
        }
        let mut index = HashMap::new();
        for (i, b) in file.basis.iter().enumerate() {
            if index.insert(b.symbol.clone(), i).is_some() {
                bad.push(format!("basis symbol `{}` repeated", b.symbol));
            }
            if b.weight < -file.lower_bound_m {
                bad.push(format!("basis `{}` has weight {} below the lower bound {}", b.symbol, b.weight, -file.lower_bound_m));
            }
            if b.weight > w.max_weight {
                bad.push(format!("basis `{}` has weight {} above the window {}", b.symbol, b.weight, w.max_weight));
            }
        }
        let vacuum = index.get(&file.vacuum).copied();
        match vacuum {
            None => bad.push(format!("vacuum `{}` is not a basis symbol", file.vacuum)),
            Some(v) if file.basis[v].weight != 0 => bad.push("vacuum must have weight 0".into()),
            _ => {}
        }
        let conformal = match &file.conformal {
            Some(s) => match index.get(s) {
                Some(&c) => {
                    if file.basis[c].weight != 2 {
                        bad.push(format!("conformal vector `{s}` must have weight 2"));
                    }
                    Some(c)
                }
                None => {
                    bad.push(format!("conformal `{s}` is not a basis symbol"));
                    None
                }
            },
            None => {
                if file.basis.len() != 1 {
                    bad.push("conformal vector may be absent only in the one-dimensional algebra".into());
                }
                None
            }
        };
        let mut products = BTreeMap::new();
        for p in &file.products {
            let loc = format!("{}_({}){}", p.left, p.n, p.right);
            let (Some(&u), Some(&v)) = (index.get(&p.left), index.get(&p.right)) else {
                bad.push(format!("product {loc} names an unknown symbol"));
                continue;
            };
            let target = file.basis[u].weight + file.basis[v].weight - p.n - 1;
            if target > w.max_weight || p.n < w.n_min || p.n > w.n_max {
                bad.push(format!("product {loc} lies outside the window"));
            }
            let mut val = QVec::new();
            for (sym, c) in &p.value {
                let Some(&t) = index.get(sym) else {
                    bad.push(format!("product {loc} names unknown symbol `{sym}`"));
                    continue;
                };
                let c = parse_q(c).map_err(|e| Error::Parse(format!("product {loc}: {e}")))?;
                if file.basis[t].weight != target {
                    bad.push(format!(
                        "product {loc} is not homogeneous: `{sym}` has weight {}, expected {target}",
                        file.basis[t].weight
                    ));
                }
                val.add_term(t, c);
            }
            if products.insert((p.n, u, v), val).is_some() {
                bad.push(format!("product {loc} listed twice"));
            }
        }
        products.retain(|_, v: &mut QVec| !v.is_zero());
        let voa = VoaData {
            name: file.name.clone(),
            lower_bound: file.lower_bound_m,
            central_charge,
            basis: file.basis.clone(),
            vacuum: vacuum.unwrap_or(0),
            conformal,
            window: w,
            products,
            index,
        };
        if bad.is_empty() {
            voa.check_vacuum_axioms(&mut bad);
        }
        if bad.is_empty() {
            Ok(voa)
        } else {
            Err(Error::InvariantViolation(bad))
        }
    }

    fn check_vacuum_axioms(&self, bad: &mut Vec<String>) {
        for u in 0..self.dim() {
            let sym = &self.basis[u].symbol;
            if self.window.n_min <= -1 && self.window.n_max >= -1 {
                match self.product(-1, u, self.vacuum) {
                    Ok(x) if x == QVec::unit(u) => {}
                    _ => bad.push(format!("vacuum axiom fails: {sym}_(-1)vac != {sym}")),
                }
            }
            for n in 0.max(self.window.n_min)..=self.window.n_max {
                if self.products.contains_key(&(n, u, self.vacuum)) {
                    bad.push(format!("vacuum axiom fails: {sym}_({n})vac != 0"));
                }
            }
        }
    }

    pub fn to_file(&self) -> VoaFile {
        VoaFile {
            name: self.name.clone(),
            lower_bound_m: self.lower_bound,
            central_charge: fmt_q(&self.central_charge),
            basis: self.basis.clone(),
            vacuum: self.symbol(self.vacuum).to_string(),
            conformal: self.conformal.map(|c| self.symbol(c).to_string()),
            window: self.window,
            products: self
                .products
                .iter()
                .map(|((n, u, v), val)| ProductEntry {
                    n: *n,
                    left: self.symbol(*u).to_string(),
                    right: self.symbol(*v).to_string(),
                    value: val.iter().map(|(t, c)| (self.symbol(t).to_string(), fmt_q(c))).collect(),
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("serializable")
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn weight(&self, u: usize) -> i64 {
        self.basis[u].weight
    }

    pub fn symbol(&self, u: usize) -> &str {
        &self.basis[u].symbol
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.index.get(symbol).copied()
    }

    pub fn max_weight(&self) -> i64 {
        self.window.max_weight
    }

    pub fn of_weight(&self, r: i64) -> Vec<usize> {
        (0..self.dim()).filter(|&u| self.weight(u) == r).collect()
    }

    pub fn vacuum_vec(&self) -> QVec {
        QVec::unit(self.vacuum)
    }

    /// The conformal vector, zero in the one-dimensional algebra.
    pub fn conformal_vec(&self) -> QVec {
        self.conformal.map(QVec::unit).unwrap_or_default()
    }

    pub fn stored_products(&self) -> impl Iterator<Item = (&(i64, usize, usize), &QVec)> + '_ {
        self.products.iter()
    }

    /// Replaces a stored product; used to build mutated copies.
    pub fn set_product(&mut self, n: i64, u: usize, v: usize, value: QVec) {
        if value.is_zero() {
            self.products.remove(&(n, u, v));
        } else {
            self.products.insert((n, u, v), value);
        }
    }

    /// Weight of a homogeneous vector; `None` for zero or mixed vectors.
    pub fn weight_of(&self, x: &QVec) -> Option<i64> {
        let mut ws = x.support().map(|i| self.weight(i));
        let w = ws.next()?;
        ws.all(|v| v == w).then_some(w)
    }

    pub fn product_in_window(&self, n: i64, wu: i64, wv: i64) -> bool {
        let r = wu + wv - n - 1;
        r < -self.lower_bound || (r <= self.window.max_weight && n >= self.window.n_min && n <= self.window.n_max)
    }

    /// `u_(n)v` for basis elements; `None` means certified zero.
    pub fn product_ref(&self, n: i64, u: usize, v: usize) -> Result<Option<&QVec>> {
        let r = self.weight(u) + self.weight(v) - n - 1;
        if r < -self.lower_bound {
            return Ok(None);
        }
        if r > self.window.max_weight || n < self.window.n_min || n > self.window.n_max {
            return Err(Error::OutOfWindow(format!("{}_({}){}", self.symbol(u), n, self.symbol(v))));
        }
        Ok(self.products.get(&(n, u, v)))
    }

    pub fn product(&self, n: i64, u: usize, v: usize) -> Result<QVec> {
        Ok(self.product_ref(n, u, v)?.cloned().unwrap_or_default())
    }

    /// Bilinear extension of the product table.
    pub fn apply_product(&self, n: i64, x: &QVec, y: &QVec) -> Result<QVec> {
        let mut out = QVec::new();
        for (u, a) in x.iter() {
            for (v, b) in y.iter() {
                if let Some(p) = self.product_ref(n, u, v)? {
                    out.add_scaled(p, &(a * b));
                }
            }
        }
        Ok(out)
    }

    /// Translation `Tx = x_(-2) vac`.
    pub fn translate(&self, x: &QVec) -> Result<QVec> {
        self.apply_product(-2, x, &self.vacuum_vec())
    }

    /// Restriction to weights at most `w`.
    pub fn truncate(&self, w: i64) -> VoaData {
        let keep: Vec<usize> = (0..self.dim()).filter(|&u| self.weight(u) <= w).collect();
        let pos: HashMap<usize, usize> = keep.iter().enumerate().map(|(i, u)| (*u, i)).collect();
        let basis: Vec<BasisEntry> = keep.iter().map(|&u| self.basis[u].clone()).collect();
        let products = self
            .products
            .iter()
            .filter(|((_, u, v), val)| {
                pos.contains_key(u) && pos.contains_key(v) && val.support().all(|t| pos.contains_key(&t))
            })
            .map(|((n, u, v), val)| ((*n, pos[u], pos[v]), val.map_indices(|t| pos[&t])))
            .collect();
        let index = basis.iter().enumerate().map(|(i, b)| (b.symbol.clone(), i)).collect();
        VoaData {
            name: format!("{}|W={w}", self.name),
            lower_bound: self.lower_bound,
            central_charge: self.central_charge.clone(),
            basis,
            vacuum: pos[&self.vacuum],
            conformal: self.conformal.and_then(|c| pos.get(&c).copied()),
            window: Window { max_weight: w.min(self.window.max_weight), ..self.window },
            products,
            index,
        }
    }

    /// Renders a vector as `c*sym + ...` with `p/q` coefficients.
    pub fn render(&self, x: &QVec) -> String {
        if x.is_zero() {
            return "0".into();
        }
        x.iter().map(|(i, c)| format!("{}*{}", fmt_q(c), self.symbol(i))).collect::<Vec<_>>().join(" + ")
    }

    /// Virasoro relations, the L0 grading and the translation derivation rule,
    /// checked wherever the window certifies every product involved.
    pub fn check_axioms(&self) -> AxiomReport {
        let mut rep = AxiomReport::default();
        let expect = |rep: &mut AxiomReport, what: String, got: Result<QVec>, want: QVec| match got {
            Ok(g) if g == want => rep.checked += 1,
            Ok(g) => rep.failures.push(format!("{what}: got {}, expected {}", self.render(&g), self.render(&want))),
            Err(_) => rep.skipped += 1,
        };
        let om = self.conformal_vec();
        let two = Rational::from_integer(2.into());
        for n in 1..=self.window.n_max {
            let want = match n {
                1 => om.scaled(&two),
                3 => self.vacuum_vec().scaled(&(self.central_charge.clone() / two.clone())),
                _ => QVec::new(),
            };
            if self.conformal.is_none() && n == 3 {
                // zero conformal vector forces central charge zero
                if !self.central_charge.is_zero() {
                    rep.failures.push("w_(3)w: zero conformal vector with nonzero central charge".into());
                }
                continue;
            }
            expect(&mut rep, format!("w_({n})w"), self.apply_product(n, &om, &om), want);
        }
        for u in 0..self.dim() {
            let x = QVec::unit(u);
            let want = x.scaled(&Rational::from_integer(self.weight(u).into()));
            if self.conformal.is_none() {
                if self.weight(u) != 0 {
                    rep.failures.push(format!("L0 {}: zero conformal vector on weight {}", self.symbol(u), self.weight(u)));
                }
                continue;
            }
            expect(&mut rep, format!("L0 {}", self.symbol(u)), self.apply_product(1, &om, &x), want);
        }
        for u in 0..self.dim() {
            for v in 0..self.dim() {
                for n in self.window.n_min..=self.window.n_max {
                    let (x, y) = (QVec::unit(u), QVec::unit(v));
                    let lhs = self.apply_product(n, &x, &y).and_then(|p| self.translate(&p));
                    let rhs = (|| -> Result<QVec> {
                        let a = self.apply_product(n, &self.translate(&x)?, &y)?;
                        let b = self.apply_product(n, &x, &self.translate(&y)?)?;
                        Ok(a.add(&b))
                    })();
                    match (lhs, rhs) {
                        (Ok(l), Ok(r)) if l == r => rep.checked += 1,
                        (Ok(l), Ok(r)) => rep.failures.push(format!(
                            "T({}_({n}){}): {} != {}",
                            self.symbol(u),
                            self.symbol(v),
                            self.render(&l),
                            self.render(&r)
                        )),
                        _ => rep.skipped += 1,
                    }
                }
            }
        }
        rep
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AxiomReport {
    pub failures: Vec<String>,
    pub checked: usize,
    pub skipped: usize,
}

/// Nonzero residual of one Borcherds identity instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BorcherdsResidual {
    pub k: i64,
    pub m: i64,
    pub n: i64,
    pub u: usize,
    pub v: usize,
    pub w: usize,
    pub residual: QVec,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BorcherdsOutcome {
    pub residuals: Vec<BorcherdsResidual>,
    pub checked: usize,
    pub skipped: usize,
}

/// Left minus right side of the Borcherds identity for `(k, m, n)` in the
/// roles of `(p, q, r)`:
/// `sum_i C(p,i) (u_(r+i)v)_(p+q-i) w` against
/// `sum_i (-1)^i C(r,i) [u_(p+r-i)(v_(q+i)w) - (-1)^r v_(q+r-i)(u_(p+i)w)]`.
pub fn borcherds_residual(voa: &VoaData, k: i64, m: i64, n: i64, u: usize, v: usize, w: usize) -> Result<QVec> {
    let (p, q, r) = (k, m, n);
    let (du, dv, dw) = (voa.weight(u), voa.weight(v), voa.weight(w));
    let low = -voa.lower_bound;
    let (eu, ev, ew) = (QVec::unit(u), QVec::unit(v), QVec::unit(w));
    let mut out = QVec::new();
    // u_(r+i)v vanishes once its weight du+dv-r-i-1 drops below the lower bound
    let imax = (du + dv - r - 1 - low).max(-1);
    for i in 0..=imax {
        let c: Rational = binom(p, i);
        if c.is_zero() {
            continue;
        }
        let inner = voa.product(r + i, u, v)?;
        if inner.is_zero() {
            continue;
        }
        out.add_scaled(&voa.apply_product(p + q - i, &inner, &ew)?, &c);
    }
    let sign_r = if r.rem_euclid(2) == 0 { Rational::one() } else { -Rational::one() };
    let imax = (dv + dw - q - 1 - low).max(-1);
    for i in 0..=imax {
        let c: Rational = binom(r, i);
        if c.is_zero() {
            continue;
        }
        let c = if i % 2 == 0 { c } else { -c };
        let inner = voa.product(q + i, v, w)?;
        if !inner.is_zero() {
            out.add_scaled(&voa.apply_product(p + r - i, &eu, &inner)?, &-c.clone());
        }
    }
    let imax = (du + dw - p - 1 - low).max(-1);
    for i in 0..=imax {
        let c: Rational = binom(r, i);
        if c.is_zero() {
            continue;
        }
        let c = if i % 2 == 0 { c } else { -c };
        let inner = voa.product(p + i, u, w)?;
        if !inner.is_zero() {
            out.add_scaled(&voa.apply_product(q + r - i, &ev, &inner)?, &(c * sign_r.clone()));
        }
    }
    Ok(out)
}

/// Checks every instance with `|k|, |m|, |n| <= bound` over all basis triples
/// whose result weight is inside the window. Instances touching uncertified
/// products are skipped and counted.
pub fn check_borcherds(voa: &VoaData, bound: i64) -> BorcherdsOutcome {
    let mut out = BorcherdsOutcome::default();
    let low = -voa.lower_bound;
    let d = voa.dim();
    for k in -bound..=bound {
        for m in -bound..=bound {
            for n in -bound..=bound {
                for u in 0..d {
                    for v in 0..d {
                        for w in 0..d {
                            let total = voa.weight(u) + voa.weight(v) + voa.weight(w) - k - m - n - 2;
                            if total < low {
                                continue;
                            }
                            if total > voa.max_weight() {
                                out.skipped += 1;
                                continue;
                            }
                            match borcherds_residual(voa, k, m, n, u, v, w) {
                                Ok(res) => {
                                    out.checked += 1;
                                    if !res.is_zero() {
                                        out.residuals.push(BorcherdsResidual { k, m, n, u, v, w, residual: res });
                                    }
                                }
                                Err(_) => out.skipped += 1,
                            }
                        }
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trivial() -> VoaData {
        load_voa(
            r#"{"name":"t","lower_bound_m":0,"central_charge":"0/1","basis":[{"symbol":"vac","weight":0}],
            "vacuum":"vac","conformal":null,"window":{"max_weight":2,"n_min":-3,"n_max":3},
            "products":[{"n":-1,"left":"vac","right":"vac","value":[["vac","1/1"]]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn trivial_loads_and_satisfies_borcherds() {
        let v = trivial();
        assert_eq!(v.dim(), 1);
        let out = check_borcherds(&v, 2);
        assert!(out.residuals.is_empty());
        assert!(out.checked > 0);
        assert!(v.check_axioms().failures.is_empty());
    }

    #[test]
    fn products_outside_window_are_not_zero() {
        let v = trivial();
        assert!(v.product(-4, 0, 0).is_err());
        assert!(v.product(5, 0, 0).unwrap().is_zero());
    }

    #[test]
    fn missing_vacuum_product_is_rejected() {
        let err = load_voa(
            r#"{"name":"t","lower_bound_m":0,"central_charge":"0/1","basis":[{"symbol":"vac","weight":0}],
            "vacuum":"vac","conformal":null,"window":{"max_weight":2,"n_min":-3,"n_max":3},"products":[]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvariantViolation(v) if v[0].contains("vac_(-1)vac")));
    }

    #[test]
    fn malformed_document_is_a_parse_error() {
        assert!(matches!(load_voa("{\"name\": 3}"), Err(Error::Parse(_))));
    }
}
