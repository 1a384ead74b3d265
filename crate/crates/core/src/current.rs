//! The current Lie algebra `V[t, 1/t]` modulo the image of `∂`, in `J`-indexing
//! `J_m(u) = u ⊗ t^(m + Δu - 1)`, which has degree `-m`.

use std::cell::RefCell;
use std::collections::BTreeMap;

use num_traits::Zero;

use crate::error::Result;
use crate::linear::{binom, fmt_q, Echelon};
use crate::voa::VoaData;
use crate::{QVec, Rational};

/// Finite sum of `c * J_m(u)` keyed by `(m, u)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CurrentElement {
    terms: BTreeMap<(i64, usize), Rational>,
}

impl CurrentElement {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn j(m: i64, u: usize) -> Self {
        let mut e = Self::new();
        e.add_term(m, u, Rational::from_integer(1.into()));
        e
    }

    /// `J_m(x)` for a vector `x`.
    pub fn j_vec(m: i64, x: &QVec) -> Self {
        let mut e = Self::new();
        for (u, c) in x.iter() {
            e.add_term(m, u, c.clone());
        }
        e
    }

    pub fn add_term(&mut self, m: i64, u: usize, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((m, u)).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(m, u));
        }
    }

    pub fn add_scaled(&mut self, other: &Self, c: &Rational) {
        for ((m, u), x) in &other.terms {
            self.add_term(*m, *u, x * c);
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &Rational::from_integer(1.into()));
        out
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut out = Self::new();
        out.add_scaled(self, c);
        out
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, usize, &Rational)> + '_ {
        self.terms.iter().map(|((m, u), c)| (*m, *u, c))
    }

    /// Modes present, each contributing degree `-m`.
    pub fn modes(&self) -> Vec<i64> {
        let mut ms: Vec<i64> = self.terms.keys().map(|(m, _)| *m).collect();
        ms.dedup();
        ms
    }

    /// Common degree, if homogeneous.
    pub fn degree(&self) -> Option<i64> {
        let ms = self.modes();
        (ms.len() == 1).then(|| -ms[0])
    }

    /// Vector component at mode `m`.
    pub fn at_mode(&self, m: i64) -> QVec {
        QVec::from_pairs(self.terms.range((m, 0)..=(m, usize::MAX)).map(|((_, u), c)| (*u, c.clone())))
    }

    /// Raw tensor form `u ⊗ t^k`.
    pub fn to_raw(&self, voa: &VoaData) -> RawCurrent {
        let mut r = RawCurrent::new();
        for ((m, u), c) in &self.terms {
            r.add_term(m + voa.weight(*u) - 1, *u, c.clone());
        }
        r
    }

    pub fn render(&self, voa: &VoaData) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.terms
            .iter()
            .map(|((m, u), c)| format!("{}*J_{}({})", fmt_q(c), m, voa.symbol(*u)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Finite sum of `c * u ⊗ t^k` keyed by `(k, u)`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RawCurrent {
    terms: BTreeMap<(i64, usize), Rational>,
}

impl RawCurrent {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn t(k: i64, u: usize) -> Self {
        let mut r = Self::new();
        r.add_term(k, u, Rational::from_integer(1.into()));
        r
    }

    pub fn t_vec(k: i64, x: &QVec) -> Self {
        let mut r = Self::new();
        for (u, c) in x.iter() {
            r.add_term(k, u, c.clone());
        }
        r
    }

    pub fn add_term(&mut self, k: i64, u: usize, c: Rational) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry((k, u)).or_insert_with(Rational::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&(k, u));
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, usize, &Rational)> + '_ {
        self.terms.iter().map(|((k, u), c)| (*k, *u, c))
    }

    /// `∂(u ⊗ t^k) = Tu ⊗ t^k + k u ⊗ t^(k-1)`.
    pub fn partial(voa: &VoaData, k: i64, u: usize) -> Result<RawCurrent> {
        let tu = voa.translate(&QVec::unit(u))?;
        let mut r = RawCurrent::t_vec(k, &tu);
        r.add_term(k - 1, u, Rational::from_integer(k.into()));
        Ok(r)
    }
}

/// Current Lie algebra of a truncated VOA with cached normal-form reducers.
pub struct CurrentLie<'a> {
    pub voa: &'a VoaData,
    reducers: RefCell<BTreeMap<i64, Echelon<Rational>>>,
}

impl<'a> CurrentLie<'a> {
    pub fn new(voa: &'a VoaData) -> Self {
        CurrentLie { voa, reducers: RefCell::new(BTreeMap::new()) }
    }

    /// Relations `J_m(Tx) + (m + Δx) J_m(x)` for every basis `x` with `Tx` in window,
    /// pivoting on the highest weight so `Tx`-headed terms are eliminated.
    fn with_reducer<R>(&self, m: i64, f: impl FnOnce(&Echelon<Rational>) -> R) -> Result<R> {
        if let Some(e) = self.reducers.borrow().get(&m) {
            return Ok(f(e));
        }
        let voa = self.voa;
        let prio: Vec<i64> = (0..voa.dim()).map(|u| voa.weight(u)).collect();
        let mut e = Echelon::with_priority(prio);
        for x in 0..voa.dim() {
            if voa.weight(x) + 1 > voa.max_weight() {
                continue;
            }
            let mut rel = voa.translate(&QVec::unit(x))?;
            rel.add_term(x, Rational::from_integer((m + voa.weight(x)).into()));
            e.insert(&rel);
        }
        let out = f(&e);
        self.reducers.borrow_mut().insert(m, e);
        Ok(out)
    }

    /// Reduces one mode component modulo the image of `∂`.
    pub fn reduce_mode(&self, m: i64, x: &QVec) -> Result<QVec> {
        self.with_reducer(m, |e| e.reduce(x))
    }

    pub fn normalize(&self, x: &CurrentElement) -> Result<CurrentElement> {
        let mut out = CurrentElement::new();
        for m in x.modes() {
            let r = self.reduce_mode(m, &x.at_mode(m))?;
            for (u, c) in r.iter() {
                out.add_term(m, u, c.clone());
            }
        }
        Ok(out)
    }

    pub fn normal_form_mod_partial(&self, raw: &RawCurrent) -> Result<CurrentElement> {
        let mut el = CurrentElement::new();
        for (k, u, c) in raw.terms() {
            el.add_term(k - self.voa.weight(u) + 1, u, c.clone());
        }
        self.normalize(&el)
    }

    /// `[J_m(u), J_n(v)] = sum_i C(m + Δu - 1, i) J_(m+n)(u_(i)v)`, normal-formed.
    pub fn bracket(&self, x: &CurrentElement, y: &CurrentElement) -> Result<CurrentElement> {
        let voa = self.voa;
        let mut out = CurrentElement::new();
        for (m, u, a) in x.terms() {
            for (n, v, b) in y.terms() {
                let top = m + voa.weight(u) - 1;
                let imax = voa.weight(u) + voa.weight(v) - 1 + voa.lower_bound;
                for i in 0..=imax {
                    let c: Rational = binom(top, i);
                    if c.is_zero() {
                        continue;
                    }
                    if let Some(p) = voa.product_ref(i, u, v)? {
                        for (z, d) in p.iter() {
                            out.add_term(m + n, z, a * b * &c * d);
                        }
                    }
                }
            }
        }
        self.normalize(&out)
    }

    /// `[u ⊗ t^a, v ⊗ t^b] = sum_i C(a, i) (u_(i)v) ⊗ t^(a+b-i)`, normal-formed.
    pub fn raw_bracket(&self, x: &RawCurrent, y: &RawCurrent) -> Result<CurrentElement> {
        let voa = self.voa;
        let mut out = RawCurrent::new();
        for (a, u, cu) in x.terms() {
            for (b, v, cv) in y.terms() {
                let imax = voa.weight(u) + voa.weight(v) - 1 + voa.lower_bound;
                for i in 0..=imax {
                    let c: Rational = binom(a, i);
                    if c.is_zero() {
                        continue;
                    }
                    if let Some(p) = voa.product_ref(i, u, v)? {
                        for (z, d) in p.iter() {
                            out.add_term(a + b - i, z, cu * cv * &c * d);
                        }
                    }
                }
            }
        }
        self.normal_form_mod_partial(&out)
    }

    /// Skew-symmetry and Jacobi on all triples `J_m(u)` with `|m| <= mode_bound`.
    pub fn check_lie_properties(&self, mode_bound: i64) -> LieCheckReport {
        let voa = self.voa;
        let mut gens = Vec::new();
        for m in -mode_bound..=mode_bound {
            for u in 0..voa.dim() {
                gens.push(CurrentElement::j(m, u));
            }
        }
        let mut rep = LieCheckReport::default();
        let mut pair = BTreeMap::new();
        for (i, x) in gens.iter().enumerate() {
            for (j, y) in gens.iter().enumerate() {
                match (self.bracket(x, y), self.bracket(y, x)) {
                    (Ok(a), Ok(b)) => {
                        if !a.add(&b).is_zero() {
                            rep.skew_failures.push(format!("[{}, {}]", x.render(voa), y.render(voa)));
                        }
                        pair.insert((i, j), a);
                    }
                    _ => rep.window_skips += 1,
                }
            }
        }
        let n = gens.len();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let terms = [(i, j, k), (j, k, i), (k, i, j)];
                    let mut total = CurrentElement::new();
                    let mut ok = true;
                    for (a, b, c) in terms {
                        match pair.get(&(b, c)).map(|bc| self.bracket(&gens[a], bc)) {
                            Some(Ok(t)) => total = total.add(&t),
                            _ => {
                                ok = false;
                                break;
                            }
                        }
                    }
                    if !ok {
                        rep.window_skips += 1;
                        continue;
                    }
                    rep.checked += 1;
                    if !total.is_zero() {
                        rep.jacobi_failures.push(format!(
                            "{}, {}, {}",
                            gens[i].render(voa),
                            gens[j].render(voa),
                            gens[k].render(voa)
                        ));
                    }
                }
            }
        }
        rep
    }

    /// `[J_0(ω), J_n(u)] = -n J_n(u)` for every basis `u` and `|n| <= mode_bound`.
    /// Returns the failures and the number of instances skipped because a
    /// product left the window.
    pub fn check_hamiltonian(&self, mode_bound: i64) -> (Vec<String>, usize) {
        let voa = self.voa;
        let l0 = CurrentElement::j_vec(0, &voa.conformal_vec());
        let mut bad = Vec::new();
        let mut skipped = 0;
        for n in -mode_bound..=mode_bound {
            for u in 0..voa.dim() {
                let x = CurrentElement::j(n, u);
                let (Ok(lhs), Ok(rhs)) = (self.bracket(&l0, &x), self.normalize(&x.scaled(&Rational::from_integer((-n).into()))))
                else {
                    skipped += 1;
                    continue;
                };
                if lhs != rhs {
                    bad.push(format!("[L0, J_{n}({})]: {} != {}", voa.symbol(u), lhs.render(voa), rhs.render(voa)));
                }
            }
        }
        (bad, skipped)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LieCheckReport {
    pub skew_failures: Vec<String>,
    pub jacobi_failures: Vec<String>,
    pub window_skips: usize,
    pub checked: usize,
}

impl LieCheckReport {
    pub fn passed(&self) -> bool {
        self.skew_failures.is_empty() && self.jacobi_failures.is_empty()
    }
}
