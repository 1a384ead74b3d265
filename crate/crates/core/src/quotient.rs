//! Truncated canonical quotient modules `Qₙ(d)`, their Hamiltonian spectra
//! and the finite algebras `Aₙ`.
//!
//! Classes are single currents `g_u = J_{-d}(u)·1ₙ`. Products of two
//! currents on `1ₙ` are reduced to single currents by the two-current
//! family `F(a, s, b, t) = J_s(a) J_t(b) 1ₙ`, obtained from the Borcherds
//! identity and the vanishing `J_t(b) 1ₙ = 0` for `t >= n+1`.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::{One, Zero};

use crate::algebra::{self, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::linear::{binom, gen_eigen_split, local_min_poly, min_poly, rank, solve_combination, Echelon};
use crate::voa::VoaData;
use crate::{QMatrix, QPoly, QVec, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TruncationWindow {
    pub max_weight: i64,
    /// Annihilating modes `t` range over `n+1 ..= n+depth`.
    pub depth: i64,
    pub rounds: usize,
}

impl TruncationWindow {
    pub fn new(max_weight: i64, depth: i64, rounds: usize) -> Result<Self> {
        let mut bad = Vec::new();
        if max_weight < 0 {
            bad.push(format!("max weight {max_weight} < 0"));
        }
        if depth < 1 {
            bad.push(format!("depth {depth} < 1"));
        }
        if rounds < 1 {
            bad.push("rounds must be at least 1".to_string());
        }
        if bad.is_empty() {
            Ok(TruncationWindow { max_weight, depth, rounds })
        } else {
            Err(Error::InvariantViolation(bad))
        }
    }

    pub fn with_weight(&self, max_weight: i64) -> Self {
        TruncationWindow { max_weight, ..*self }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    /// `g_vac = 0` off degree zero.
    Vacuum,
    /// `g_{Tu} + (Δu - d) g_u = 0`.
    Translation { u: usize },
    /// `J_s(u) J_t(v) 1ₙ = 0` with `t >= n+1`.
    Annihilation { u: usize, s: i64, v: usize, t: i64 },
    /// `J_s(a)·R` for a relation `R` stored in another degree.
    Borcherds { a: usize, s: i64, source_degree: i64, source_index: usize },
    /// Every class vanishes below degree `-n`.
    BelowLevel { u: usize },
}

impl Provenance {
    pub fn tag(&self) -> &'static str {
        match self {
            Provenance::Vacuum => "vacuum",
            Provenance::Translation { .. } => "translation",
            Provenance::Annihilation { .. } => "annihilation",
            Provenance::Borcherds { .. } => "borcherds",
            Provenance::BelowLevel { .. } => "below-level",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Relation {
    pub vector: QVec,
    pub provenance: Provenance,
}

#[derive(Clone, Debug)]
pub struct QuotientSlice {
    pub n: i64,
    pub d: i64,
    pub max_weight: i64,
    /// Generator `g_u` for every basis element `u` of the truncated algebra.
    pub generators: Vec<usize>,
    /// Independent relations in insertion order.
    pub relations: Vec<Relation>,
    /// Relations whose expansion left the window.
    pub dropped: usize,
    /// Coset representatives: the generators that are not pivots.
    pub basis: Vec<usize>,
    pub dim_upper: usize,
    pub left_h: Option<QMatrix>,
    pub converged: bool,
    echelon: Echelon<Rational>,
}

impl QuotientSlice {
    /// Normal form modulo the relations, supported on `basis`.
    pub fn reduce(&self, v: &QVec) -> QVec {
        self.echelon.reduce(v)
    }

    /// Coordinates with respect to `basis`.
    pub fn coords(&self, v: &QVec) -> QVec {
        let pos: HashMap<usize, usize> = self.basis.iter().enumerate().map(|(i, u)| (*u, i)).collect();
        self.reduce(v).map_indices(|u| pos[&u])
    }

    /// Generator vector of a coordinate vector.
    pub fn lift(&self, coords: &QVec) -> QVec {
        coords.map_indices(|i| self.basis[i])
    }

    pub fn is_zero_class(&self, v: &QVec) -> bool {
        self.reduce(v).is_zero()
    }
}

type FKey = (usize, i64, usize, i64);

/// Two-current expansion at a fixed level over a fixed truncated algebra.
pub struct QuotientEngine {
    pub voa: VoaData,
    pub n: i64,
    memo: RefCell<HashMap<FKey, Result<QVec>>>,
}

impl QuotientEngine {
    pub fn new(voa: &VoaData, n: i64, max_weight: i64) -> Result<Self> {
        if max_weight > voa.max_weight() {
            return Err(Error::OutOfWindow(format!(
                "window weight {max_weight} exceeds the data window {}",
                voa.max_weight()
            )));
        }
        let voa = if max_weight < voa.max_weight() { voa.truncate(max_weight) } else { voa.clone() };
        Ok(QuotientEngine { voa, n, memo: RefCell::new(HashMap::new()) })
    }

    fn low(&self) -> i64 {
        -self.voa.lower_bound
    }

    /// `Σ_i C(p, i) a_(X-p+i) b` with `p = n + Δa`: the left side of the
    /// Borcherds identity applied to `1ₙ`, where `X` is the `a`-mode index.
    pub fn lhs(&self, a: usize, x: i64, b: usize) -> Result<QVec> {
        let (da, db) = (self.voa.weight(a), self.voa.weight(b));
        let p = self.n + da;
        let mut imax = da + db - 1 - self.low() - x + p;
        if p >= 0 {
            imax = imax.min(p);
        }
        let mut out = QVec::new();
        for i in 0..=imax {
            let c: Rational = binom(p, i);
            if c.is_zero() {
                continue;
            }
            if let Some(v) = self.voa.product_ref(x - p + i, a, b)? {
                out.add_scaled(v, &c);
            }
        }
        Ok(out)
    }

    /// `F(a, s, b, t)`: the single-current vector `z` with `J_s(a) J_t(b) 1ₙ = J_{s+t}(z) 1ₙ`.
    pub fn two_current(&self, a: usize, s: i64, b: usize, t: i64) -> Result<QVec> {
        let key = (a, s, b, t);
        if let Some(r) = self.memo.borrow().get(&key) {
            return r.clone();
        }
        let r = self.two_current_uncached(a, s, b, t);
        self.memo.borrow_mut().insert(key, r.clone());
        r
    }

    fn two_current_uncached(&self, a: usize, s: i64, b: usize, t: i64) -> Result<QVec> {
        let n = self.n;
        if t >= n + 1 {
            return Ok(QVec::new());
        }
        let vac = self.voa.vacuum;
        if b == vac {
            return Ok(if t == 0 { QVec::unit(a) } else { QVec::new() });
        }
        if a == vac {
            return Ok(if s == 0 { QVec::unit(b) } else { QVec::new() });
        }
        let da = self.voa.weight(a);
        let p = n + da;
        let x = s + da - 1;
        let l = (n - t) as usize;
        // g[j] = F(x - j, y + j) in raw mode indices
        let mut g: Vec<QVec> = vec![QVec::new(); l + 1];
        for j in (0..=l).rev() {
            let xj = x - j as i64;
            let mut acc = self.lhs(a, xj, b)?;
            for i in 1..=(l - j) {
                let c: Rational = binom(xj - p, i as i64);
                if c.is_zero() {
                    continue;
                }
                let c = if i % 2 == 1 { -c } else { c };
                acc.add_scaled(&g[j + i], &-c);
            }
            g[j] = acc;
        }
        Ok(g.swap_remove(0))
    }

    pub fn two_current_vec(&self, za: &QVec, s: i64, zb: &QVec, t: i64) -> Result<QVec> {
        let mut out = QVec::new();
        for (a, ca) in za.iter() {
            for (b, cb) in zb.iter() {
                out.add_scaled(&self.two_current(a, s, b, t)?, &(ca * cb));
            }
        }
        Ok(out)
    }

    /// Computes every slice of degree `lo..=hi` at this level.
    pub fn compute_family(&self, lo: i64, hi: i64, w: &TruncationWindow) -> BTreeMap<i64, QuotientSlice> {
        let n = self.n;
        let voa = &self.voa;
        let dim = voa.dim();
        let priority: Vec<i64> = (0..dim).map(|u| voa.weight(u)).collect();
        let mut slices: BTreeMap<i64, QuotientSlice> = BTreeMap::new();
        let mut frontier: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
        for d in lo..=hi {
            let mut slice = QuotientSlice {
                n,
                d,
                max_weight: voa.max_weight(),
                generators: (0..dim).collect(),
                relations: Vec::new(),
                dropped: 0,
                basis: Vec::new(),
                dim_upper: 0,
                left_h: None,
                converged: false,
                echelon: Echelon::with_priority(priority.clone()),
            };
            if d <= -n - 1 {
                for u in 0..dim {
                    admit(&mut slice, Ok(QVec::unit(u)), Provenance::BelowLevel { u });
                }
            } else {
                if d != 0 {
                    admit(&mut slice, Ok(voa.vacuum_vec()), Provenance::Vacuum);
                }
                for u in 0..dim {
                    if voa.weight(u) + 1 > voa.max_weight() {
                        continue;
                    }
                    let rel = voa.translate(&QVec::unit(u)).map(|tu| {
                        let mut r = tu;
                        r.add_term(u, Rational::from_integer((voa.weight(u) - d).into()));
                        r
                    });
                    admit(&mut slice, rel, Provenance::Translation { u });
                }
                for t in n + 1..=n + w.depth {
                    let s = -d - t;
                    for u in 0..dim {
                        for v in 0..dim {
                            let rel = self.lhs(u, s + voa.weight(u) - 1, v);
                            admit(&mut slice, rel, Provenance::Annihilation { u, s, v, t });
                        }
                    }
                }
            }
            frontier.insert(d, (0..slice.relations.len()).collect());
            slices.insert(d, slice);
        }
        for _ in 1..w.rounds {
            let mut next: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
            for d in (lo..=hi).filter(|d| *d >= -n) {
                let mut added = Vec::new();
                for (&e, idxs) in &frontier {
                    let s = e - d;
                    for &k in idxs {
                        let src = slices[&e].relations[k].vector.clone();
                        for a in 0..dim {
                            let rel = self.left_multiple(a, s, &src, e);
                            let slice = slices.get_mut(&d).expect("slice in family");
                            let before = slice.relations.len();
                            admit(slice, rel, Provenance::Borcherds { a, s, source_degree: e, source_index: k });
                            if slice.relations.len() > before {
                                added.push(before);
                            }
                        }
                    }
                }
                next.insert(d, added);
            }
            if next.values().all(|v| v.is_empty()) {
                break;
            }
            frontier = next;
        }
        for slice in slices.values_mut() {
            slice.basis = (0..dim).filter(|u| !slice.echelon.is_pivot(*u)).collect();
            slice.dim_upper = slice.basis.len();
        }
        slices
    }

    /// `J_s(a)·R` where `R` is a relation vector in degree `e`.
    pub fn left_multiple(&self, a: usize, s: i64, r: &QVec, e: i64) -> Result<QVec> {
        let mut out = QVec::new();
        for (b, c) in r.iter() {
            out.add_scaled(&self.two_current(a, s, b, -e)?, c);
        }
        Ok(out)
    }

    /// Recomputes a stored relation from its provenance.
    pub fn replay(&self, family: &BTreeMap<i64, QuotientSlice>, d: i64, rel: &Relation) -> Result<QVec> {
        let voa = &self.voa;
        match &rel.provenance {
            Provenance::Vacuum => Ok(voa.vacuum_vec()),
            Provenance::BelowLevel { u } => Ok(QVec::unit(*u)),
            Provenance::Translation { u } => {
                let mut r = voa.translate(&QVec::unit(*u))?;
                r.add_term(*u, Rational::from_integer((voa.weight(*u) - d).into()));
                Ok(r)
            }
            Provenance::Annihilation { u, s, v, t } => {
                if *t < self.n + 1 || s + t != -d {
                    return Err(Error::InvariantViolation(vec![format!("malformed annihilation provenance in degree {d}")]));
                }
                self.lhs(*u, s + voa.weight(*u) - 1, *v)
            }
            Provenance::Borcherds { a, s, source_degree, source_index } => {
                let src = family
                    .get(source_degree)
                    .and_then(|sl| sl.relations.get(*source_index))
                    .ok_or_else(|| Error::InvariantViolation(vec![format!("dangling provenance in degree {d}")]))?;
                let src_vec = self.replay(family, *source_degree, src)?;
                self.left_multiple(*a, *s, &src_vec, *source_degree)
            }
        }
    }

    /// Image of `J_{-d}(z)·1ₙ` in the algebra itself under `1ₙ ↦ w`, for
    /// every basis `w` annihilated by all modes of degree `<= -n-1`.
    /// Out-of-window evaluations are omitted.
    pub fn evaluate_in_algebra(&self, d: i64, z: &QVec) -> Vec<(usize, QVec)> {
        let voa = &self.voa;
        let mut out = Vec::new();
        for w in 0..voa.dim() {
            if voa.weight(w) > self.n - voa.lower_bound {
                continue;
            }
            let mut acc = QVec::new();
            let mut ok = true;
            for (u, c) in z.iter() {
                match voa.product_ref(-d + voa.weight(u) - 1, u, w) {
                    Ok(Some(v)) => acc.add_scaled(v, c),
                    Ok(None) => {}
                    Err(_) => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                out.push((w, acc));
            }
        }
        out
    }
}

fn admit(slice: &mut QuotientSlice, rel: Result<QVec>, provenance: Provenance) {
    match rel {
        Ok(v) => {
            if slice.echelon.insert(&v).is_some() {
                slice.relations.push(Relation { vector: v, provenance });
            }
        }
        Err(_) => slice.dropped += 1,
    }
}

/// Degree range of the family used for slice `d` at level `n`.
pub fn family_range(n: i64, d: i64, w: &TruncationWindow) -> (i64, i64) {
    (-n, d.max(0) + w.depth)
}

/// Family at window `W` with convergence flags from a second run at `W - 1`.
pub fn compute_family(voa: &VoaData, n: i64, lo: i64, hi: i64, w: &TruncationWindow) -> Result<BTreeMap<i64, QuotientSlice>> {
    let engine = QuotientEngine::new(voa, n, w.max_weight)?;
    let mut family = engine.compute_family(lo, hi, w);
    if w.max_weight >= 1 {
        let coarse = QuotientEngine::new(voa, n, w.max_weight - 1)?;
        let coarse_family = coarse.compute_family(lo, hi, &w.with_weight(w.max_weight - 1));
        for (d, slice) in family.iter_mut() {
            slice.converged = coarse_family[d].dim_upper == slice.dim_upper;
        }
    }
    for slice in family.values_mut() {
        slice.left_h = h_action(&engine, slice).ok().map(|h| h.left);
    }
    Ok(family)
}

pub fn compute_quotient_slice(voa: &VoaData, n: i64, d: i64, w: &TruncationWindow) -> Result<QuotientSlice> {
    if d <= -n - 1 {
        let engine = QuotientEngine::new(voa, n, w.max_weight)?;
        let mut fam = engine.compute_family(d, d, w);
        let mut slice = fam.remove(&d).expect("slice");
        slice.converged = true;
        slice.left_h = Some(QMatrix::zeros(0, 0));
        return Ok(slice);
    }
    let (lo, hi) = family_range(n, d, w);
    let mut fam = compute_family(voa, n, lo, hi, w)?;
    Ok(fam.remove(&d).expect("slice in family"))
}

#[derive(Clone, Debug, PartialEq)]
pub struct HAction {
    pub left: QMatrix,
    pub right: QMatrix,
    /// Columns of `right` computed directly rather than from `left - d`.
    pub right_checked: usize,
}

/// Left and right action of `h = J_0(ω)` on a slice, in basis coordinates.
pub fn h_action(engine: &QuotientEngine, slice: &QuotientSlice) -> Result<HAction> {
    let k = slice.basis.len();
    let d = slice.d;
    let dq = Rational::from_integer(d.into());
    let Some(omega) = engine.voa.conformal else {
        return Ok(HAction { left: QMatrix::zeros(k, k), right: QMatrix::zeros(k, k).sub(&QMatrix::identity(k).scaled(&dq)), right_checked: 0 });
    };
    let mut left_cols = Vec::new();
    let mut right_cols = Vec::new();
    let mut checked = 0;
    let mut bad = Vec::new();
    for (col, &u) in slice.basis.iter().enumerate() {
        let l = slice.coords(&engine.two_current(omega, 0, u, -d)?);
        let expected = l.sub(&QVec::unit(col).scaled(&dq));
        match engine.two_current(u, -d, omega, 0) {
            Ok(r) => {
                let r = slice.coords(&r);
                if r != expected {
                    bad.push(format!("right action differs from left - d on generator {}", engine.voa.symbol(u)));
                }
                checked += 1;
            }
            Err(Error::OutOfWindow(_)) => {}
            Err(e) => return Err(e),
        }
        left_cols.push(l);
        right_cols.push(expected);
    }
    if !bad.is_empty() {
        return Err(Error::InvariantViolation(bad));
    }
    Ok(HAction { left: QMatrix::from_columns(k, &left_cols), right: QMatrix::from_columns(k, &right_cols), right_checked: checked })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumReport {
    pub n: i64,
    pub phi_n: QPoly,
    pub omega_n: Vec<Rational>,
    pub multiplicities: Vec<usize>,
    pub gamma0: Vec<Rational>,
    pub gap: i64,
    pub ell: usize,
    /// `Ωₙ ⊆ Γ_{n+g}`.
    pub omega_in_gamma: bool,
    /// Root multiplicities of `φₙ` are at most `ℓ`.
    pub multiplicities_bounded: bool,
    /// Some slice involved did not stabilize between windows.
    pub provisional: bool,
}

impl SpectrumReport {
    pub fn gamma_m(&self, m: i64) -> Vec<Rational> {
        algebra::gamma_m(&self.gamma0, m)
    }
}

/// Minimal polynomial of `h` on `Qₙ(0)` with its roots and the convergence flag.
pub fn level_spectrum(voa: &VoaData, n: i64, w: &TruncationWindow) -> Result<(QPoly, Vec<(Rational, usize)>, bool)> {
    let engine = QuotientEngine::new(voa, n, w.max_weight)?;
    let (lo, hi) = family_range(n, 0, w);
    let mut family = engine.compute_family(lo, hi, w);
    let mut slice = family.remove(&0).expect("degree zero slice");
    let converged = if w.max_weight >= 1 {
        let coarse = QuotientEngine::new(voa, n, w.max_weight - 1)?;
        coarse.compute_family(lo, hi, &w.with_weight(w.max_weight - 1))[&0].dim_upper == slice.dim_upper
    } else {
        false
    };
    slice.converged = converged;
    let h = h_action(&engine, &slice)?;
    let phi = min_poly(&h.left);
    let (roots, rest) = phi.rational_roots();
    if rest.degree().unwrap_or(0) > 0 {
        return Err(Error::NonRationalSpectrum(rest.render()));
    }
    Ok((phi, roots, converged))
}

pub fn spectrum(voa: &VoaData, n: i64, w: &TruncationWindow) -> Result<SpectrumReport> {
    let (_, roots0, conv0) = level_spectrum(voa, 0, w)?;
    let omega0: Vec<Rational> = roots0.iter().map(|r| r.0.clone()).collect();
    let gamma0 = algebra::gamma0(&omega0);
    let g = algebra::gap(&omega0);
    let (_, roots_g, conv_g) = if g == 0 { (QPoly::one(), roots0.clone(), conv0) } else { level_spectrum(voa, g, w)? };
    let ell = roots_g.iter().map(|r| r.1).max().unwrap_or(0);
    let (phi, roots, conv) = level_spectrum(voa, n, w)?;
    let omega_n: Vec<Rational> = roots.iter().map(|r| r.0.clone()).collect();
    let multiplicities: Vec<usize> = roots.iter().map(|r| r.1).collect();
    Ok(SpectrumReport {
        n,
        omega_in_gamma: omega_n.iter().all(|l| algebra::in_gamma(&gamma0, n + g, l)),
        multiplicities_bounded: multiplicities.iter().all(|k| *k <= ell),
        phi_n: phi,
        omega_n,
        multiplicities,
        gamma0,
        gap: g,
        ell,
        provisional: !(conv0 && conv_g && conv),
    })
}

/// A level's engine, its slice family and per-slice convergence.
struct Level {
    engine: QuotientEngine,
    family: BTreeMap<i64, QuotientSlice>,
}

impl Level {
    fn new(voa: &VoaData, n: i64, lo: i64, hi: i64, w: &TruncationWindow) -> Result<Self> {
        let engine = QuotientEngine::new(voa, n, w.max_weight)?;
        let mut family = engine.compute_family(lo, hi, w);
        let coarse = if w.max_weight >= 1 {
            Some(QuotientEngine::new(voa, n, w.max_weight - 1)?.compute_family(lo, hi, &w.with_weight(w.max_weight - 1)))
        } else {
            None
        };
        for (d, slice) in family.iter_mut() {
            slice.converged = *d <= -n - 1 || coarse.as_ref().map_or(false, |c| c[d].dim_upper == slice.dim_upper);
        }
        Ok(Level { engine, family })
    }

    fn slice(&self, d: i64) -> Result<&QuotientSlice> {
        self.family
            .get(&d)
            .ok_or_else(|| Error::OutOfWindow(format!("degree {d} outside the computed family at level {}", self.engine.n)))
    }

    fn require_converged(&self, d: i64) -> Result<()> {
        if d <= -self.engine.n - 1 {
            return Ok(());
        }
        if self.slice(d)?.converged {
            Ok(())
        } else {
            Err(Error::NotConverged(format!("slice Q_{}({d}) changes between windows", self.engine.n)))
        }
    }

    /// Class of `v` in `Q(d)`, zero below the level.
    fn class(&self, d: i64, v: &QVec) -> Result<QVec> {
        if d <= -self.engine.n - 1 {
            return Ok(QVec::new());
        }
        Ok(self.slice(d)?.coords(v))
    }
}

/// Finite algebra `Aₙ` realized on generalized eigenspaces of `Q_L` slices,
/// with `L = m + max(0, largest block degree)`.
pub fn extract_finite_algebra(voa: &VoaData, n: i64, m: i64, w: &TruncationWindow) -> Result<FiniteAlgebra> {
    if m < n {
        return Err(Error::InvariantViolation(vec![format!("level {m} below n = {n}")]));
    }
    let (_, roots0, conv0) = level_spectrum(voa, 0, w)?;
    if !conv0 {
        return Err(Error::NotConverged("Q_0(0) changes between windows".into()));
    }
    let omega0: Vec<Rational> = roots0.into_iter().map(|r| r.0).collect();
    let gamma0 = algebra::gamma0(&omega0);
    let gamma_n = algebra::gamma_m(&gamma0, n);
    let mut pairs: Vec<(Rational, Rational, i64)> = Vec::new();
    for l in &gamma_n {
        for mu in &gamma_n {
            if let Some(d) = crate::linear::as_integer(&(l - mu)) {
                pairs.push((l.clone(), mu.clone(), d));
            }
        }
    }
    let dmax = pairs.iter().map(|p| p.2).max().unwrap_or(0).max(0);
    let top = m + dmax;
    let hi = 2 * dmax + w.depth;
    let mut levels: BTreeMap<i64, Level> = BTreeMap::new();
    levels.insert(top, Level::new(voa, top, -top, hi, w)?);
    let degrees: BTreeSet<i64> = pairs.iter().map(|p| p.2).collect();
    // generalized eigenspace bases of the top slices
    let mut splits = BTreeMap::new();
    for &d in &degrees {
        let lv = &levels[&top];
        lv.require_converged(d)?;
        let slice = lv.slice(d)?;
        let h = h_action(&lv.engine, slice)?;
        splits.insert(d, gen_eigen_split(&h.left)?);
    }
    let mut labels = Vec::new();
    let mut reps: Vec<(i64, QVec)> = Vec::new();
    for (l, mu, d) in &pairs {
        let slice = levels[&top].slice(*d)?;
        if let Some(block) = splits[d].block_of(l) {
            for v in block {
                labels.push((l.clone(), mu.clone()));
                reps.push((*d, slice.lift(v)));
            }
        }
    }
    let dim = labels.len();
    for &d2 in &degrees {
        let lvl = top - d2.max(0);
        if !levels.contains_key(&lvl) {
            levels.insert(lvl, Level::new(voa, lvl, -lvl, hi, w)?);
        }
    }
    let mut mult = vec![vec![QVec::new(); dim]; dim];
    let mut bad = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            let (d1, za) = &reps[i];
            let (d2, zb) = &reps[j];
            let lv = &levels[&(top - d2.max(&0))];
            let dd = d1 + d2;
            let prod = lv.engine.two_current_vec(za, -d1, zb, -d2)?;
            let class = lv.class(dd, &prod)?;
            if labels[i].1 != labels[j].0 {
                if !class.is_zero() {
                    bad.push(format!("blocks {i} and {j} are not orthogonal"));
                }
                continue;
            }
            if class.is_zero() {
                continue;
            }
            lv.require_converged(dd)?;
            let target = (labels[i].0.clone(), labels[j].1.clone());
            let ks: Vec<usize> = (0..dim).filter(|&k| labels[k] == target).collect();
            let cols: Vec<QVec> = ks.iter().map(|&k| lv.class(dd, &reps[k].1)).collect::<Result<_>>()?;
            match solve_combination(&cols, &class) {
                Some(x) => {
                    mult[i][j] = QVec::from_pairs(ks.iter().zip(x).map(|(k, c)| (*k, c)));
                }
                None => bad.push(format!("product of basis {i} and {j} leaves its block")),
            }
        }
    }
    if !bad.is_empty() {
        return Err(Error::InvariantViolation(bad));
    }
    // unit and Hamiltonian: degree-zero components in the diagonal blocks of Γₙ
    let lv = &levels[&top];
    let slice0 = lv.slice(0)?;
    let split0 = &splits[&0];
    let all: Vec<QVec> = split0.blocks.concat();
    let project = |z: &QVec| -> Result<QVec> {
        let coords = slice0.coords(z);
        let x = solve_combination(&all, &coords)
            .ok_or_else(|| Error::InvariantViolation(vec!["eigenspaces do not span the degree-zero slice".into()]))?;
        let mut out = QVec::new();
        let mut offset = 0;
        for (lambda, block) in split0.eigenvalues.iter().zip(&split0.blocks) {
            if gamma_n.contains(lambda) {
                let idx: Vec<usize> = (0..dim).filter(|&k| labels[k] == (lambda.clone(), lambda.clone())).collect();
                for (b, k) in idx.iter().enumerate() {
                    out.add_term(*k, x[offset + b].clone());
                }
            }
            offset += block.len();
        }
        Ok(out)
    };
    let unit = project(&voa.vacuum_vec())?;
    let hamiltonian = match voa.conformal {
        Some(c) => project(&QVec::unit(c))?,
        None => QVec::new(),
    };
    let alg = FiniteAlgebra { labels, mult, unit, hamiltonian, gamma: gamma_n };
    let failures = alg.check();
    if !failures.is_empty() {
        return Err(Error::InvariantViolation(failures));
    }
    Ok(alg)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityReport {
    pub n: i64,
    pub d: i64,
    pub dim: usize,
    pub eigenvalues: Vec<Rational>,
    pub span_rank: usize,
    pub surjective: bool,
    pub converged: bool,
}

/// Generalized eigenvectors of the left and right actions span the slice.
pub fn bimodule_density_check(voa: &VoaData, n: i64, d: i64, w: &TruncationWindow) -> Result<DensityReport> {
    if d <= -n - 1 {
        return Ok(DensityReport { n, d, dim: 0, eigenvalues: vec![], span_rank: 0, surjective: true, converged: true });
    }
    let (lo, hi) = family_range(n, d, w);
    let lv = Level::new(voa, n, lo, hi, w)?;
    let slice = lv.slice(d)?;
    let h = h_action(&lv.engine, slice)?;
    let split = gen_eigen_split(&h.left)?;
    let right_split = gen_eigen_split(&h.right)?;
    let mut span = Vec::new();
    for (lambda, block) in split.eigenvalues.iter().zip(&split.blocks) {
        // each left block is the right block of λ - d
        let mu = lambda - Rational::from_integer(d.into());
        let rb = right_split.block_of(&mu).unwrap_or(&[]);
        if rank(&[block.as_slice(), rb].concat()) != block.len().max(rb.len()) {
            return Err(Error::InvariantViolation(vec![format!("left and right eigenspaces disagree at {lambda}")]));
        }
        span.extend(block.iter().cloned());
    }
    let r = rank(&span);
    Ok(DensityReport {
        n,
        d,
        dim: slice.dim_upper,
        eigenvalues: split.eigenvalues,
        span_rank: r,
        surjective: r == slice.dim_upper,
        converged: slice.converged,
    })
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct GrReport {
    /// Reordering `J_s(u) J_t(v) - J_t(v) J_s(u)` matched the bracket.
    pub multiplicativity_checked: usize,
    /// Bracket terms sat in filtration `<= Δu + Δv - 1`.
    pub commutator_drop_checked: usize,
    /// Normal-ordered product identity for `u_(-1)v`.
    pub normal_order_checked: usize,
    /// Iterate identity for `u_(k)v`, `k <= -2`, with the filtration drop.
    pub iterate_checked: usize,
    pub skipped: usize,
    pub failures: Vec<String>,
}

impl GrReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Filtration checks on `Qₙ` slices for modes `|s|, |t| <= bound`.
pub fn gr_filtration_check(voa: &VoaData, n: i64, bound: i64, w: &TruncationWindow) -> Result<GrReport> {
    let lo = -n;
    let hi = 2 * bound + w.depth;
    let lv = Level::new(voa, n, lo, hi, w)?;
    let e = &lv.engine;
    let v = &e.voa;
    let mut rep = GrReport::default();
    let dim = v.dim();
    for u in 0..dim {
        for x in 0..dim {
            for s in -bound..=bound {
                for t in -bound..=bound {
                    let d = -(s + t);
                    if d < lo || d > hi {
                        continue;
                    }
                    let (du, dx) = (v.weight(u), v.weight(x));
                    let outcome = (|| -> Result<bool> {
                        let ab = e.two_current(u, s, x, t)?;
                        let ba = e.two_current(x, t, u, s)?;
                        let mut br = QVec::new();
                        for i in 0..=(du + dx - 1 + v.lower_bound) {
                            let c: Rational = binom(s + du - 1, i);
                            if c.is_zero() {
                                continue;
                            }
                            let p = v.product(i, u, x)?;
                            if p.support().any(|k| v.weight(k) > du + dx - 1) {
                                return Ok(false);
                            }
                            br.add_scaled(&p, &c);
                        }
                        Ok(lv.class(d, &ab.sub(&ba).sub(&br))?.is_zero())
                    })();
                    match outcome {
                        Ok(true) => {
                            rep.multiplicativity_checked += 1;
                            rep.commutator_drop_checked += 1;
                        }
                        Ok(false) => rep.failures.push(format!(
                            "[J_{s}({}), J_{t}({})] disagrees with the bracket on 1_{n}",
                            v.symbol(u),
                            v.symbol(x)
                        )),
                        Err(Error::OutOfWindow(_)) => rep.skipped += 1,
                        Err(err) => return Err(err),
                    }
                }
            }
            for k in -(bound + 1)..=-1 {
                for p in -hi..=n {
                    match iterate_identity(&lv, u, k, x, p) {
                        Ok(true) => {
                            if k == -1 {
                                rep.normal_order_checked += 1;
                            } else {
                                rep.iterate_checked += 1;
                            }
                        }
                        Ok(false) => rep.failures.push(format!(
                            "J_{p}({}_({k}){}) fails the iterate identity on 1_{n}",
                            v.symbol(u),
                            v.symbol(x)
                        )),
                        Err(Error::OutOfWindow(_)) => rep.skipped += 1,
                        Err(err) => return Err(err),
                    }
                }
            }
        }
    }
    Ok(rep)
}

/// Iterate identity on `Qₙ(d)` for every in-window `C₂` generator
/// `u_(k)v`, `k <= -2`: the current of a `C₂` element drops filtration.
pub fn c2_representative_check(voa: &VoaData, n: i64, d: i64, w: &TruncationWindow) -> Result<GrReport> {
    let lv = Level::new(voa, n, -n, d.max(0) + w.depth, w)?;
    let v = &lv.engine.voa;
    let mut rep = GrReport::default();
    for u in 0..v.dim() {
        for x in 0..v.dim() {
            if u == v.vacuum {
                continue;
            }
            for k in (-(w.max_weight + 1)..=-2).filter(|k| v.weight(u) + v.weight(x) - k - 1 <= w.max_weight) {
                match iterate_identity(&lv, u, k, x, -d) {
                    Ok(true) => rep.iterate_checked += 1,
                    Ok(false) => rep.failures.push(format!(
                        "J_{}({}_({k}){}) fails the iterate identity on 1_{n}",
                        -d,
                        v.symbol(u),
                        v.symbol(x)
                    )),
                    Err(Error::OutOfWindow(_)) => rep.skipped += 1,
                    Err(err) => return Err(err),
                }
            }
        }
    }
    Ok(rep)
}

/// `J_p(u_(a)v) 1ₙ` against its expansion
/// `Σ_i (-1)^i C(a,i) [u_(a-i) v_(b+i) - (-1)^a v_(a+b-i) u_(i)] 1ₙ`.
/// For `a <= -2` the left side sits in filtration `Δu+Δv-a-1` while every
/// term on the right sits in `Δu+Δv`.
fn iterate_identity(lv: &Level, u: usize, a: i64, x: usize, p: i64) -> Result<bool> {
    let e = &lv.engine;
    let v = &e.voa;
    let n = e.n;
    let (du, dx) = (v.weight(u), v.weight(x));
    let lhs = v.product(a, u, x)?;
    let dl = du + dx - a - 1;
    let b = p + dl - 1;
    let d = -p;
    let mut rhs = QVec::new();
    let sign_a: Rational = if a.rem_euclid(2) == 0 { Rational::one() } else { -Rational::one() };
    let mut i = 0i64;
    loop {
        let t1 = b + i - dx + 1;
        let t2 = i - du + 1;
        if t1 >= n + 1 && t2 >= n + 1 {
            break;
        }
        let c: Rational = binom(a, i);
        let c = if i % 2 == 1 { -c } else { c };
        if t1 < n + 1 {
            rhs.add_scaled(&e.two_current(u, a - i - du + 1, x, t1)?, &c);
        }
        if t2 < n + 1 {
            rhs.add_scaled(&e.two_current(x, a + b - i - dx + 1, u, t2)?, &-(c * &sign_a));
        }
        i += 1;
    }
    Ok(lv.class(d, &lhs.sub(&rhs))?.is_zero())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct AnnihilationShadow {
    /// Eigenvectors with eigenvalue in `Γₙ` checked against all `J_t(a)`, `t >= n+1`.
    pub killed_checked: usize,
    /// Dimension of the common kernel `Kₙ` summed over slices.
    pub kernel_dim: usize,
    pub failures: Vec<String>,
}

/// On the `Q_m` family: classes with left eigenvalue in `Γₙ` are killed by
/// every mode of degree `<= -n-1`, and the common kernel of those modes has
/// eigenvalues in `Γ_{n+g}`.
pub fn annihilation_shadow(voa: &VoaData, n: i64, m: i64, dmax: i64, w: &TruncationWindow) -> Result<AnnihilationShadow> {
    let (_, roots0, _) = level_spectrum(voa, 0, w)?;
    let omega0: Vec<Rational> = roots0.into_iter().map(|r| r.0).collect();
    let gamma0 = algebra::gamma0(&omega0);
    let g = algebra::gap(&omega0);
    let lv = Level::new(voa, m, -m, dmax.max(0) + w.depth, w)?;
    let e = &lv.engine;
    let mut rep = AnnihilationShadow::default();
    for d in -m..=dmax {
        let slice = lv.slice(d)?;
        if slice.dim_upper == 0 {
            continue;
        }
        let h = match h_action(e, slice) {
            Ok(h) => h,
            Err(Error::OutOfWindow(_)) => continue,
            Err(err) => return Err(err),
        };
        let split = gen_eigen_split(&h.left)?;
        // the map x ↦ (J_t(a) x)_{t, a}
        let mut images: Vec<Vec<QVec>> = vec![Vec::new(); slice.dim_upper];
        let mut complete = true;
        for t in n + 1..=d + m {
            for a in 0..e.voa.dim() {
                for (col, &u) in slice.basis.iter().enumerate() {
                    match e.two_current(a, t, u, -d).and_then(|z| lv.class(d - t, &z)) {
                        Ok(c) => images[col].push(c),
                        Err(Error::OutOfWindow(_)) => complete = false,
                        Err(err) => return Err(err),
                    }
                }
            }
        }
        if !complete {
            continue;
        }
        let apply = |x: &QVec| -> Vec<QVec> {
            let len = images.first().map_or(0, |v| v.len());
            (0..len)
                .map(|r| {
                    let mut acc = QVec::new();
                    for (col, c) in x.iter() {
                        acc.add_scaled(&images[col][r], c);
                    }
                    acc
                })
                .collect()
        };
        for (lambda, block) in split.eigenvalues.iter().zip(&split.blocks) {
            if algebra::in_gamma(&gamma0, n, lambda) {
                for x in block {
                    rep.killed_checked += 1;
                    if apply(x).iter().any(|y| !y.is_zero()) {
                        rep.failures.push(format!("eigenvalue {lambda} class in Q_{m}({d}) not killed"));
                    }
                }
            }
        }
        // common kernel: stack the images as one long vector per column
        let len = images.first().map_or(0, |v| v.len());
        let width = slice.dim_upper;
        let stacked: Vec<QVec> = (0..width)
            .map(|col| {
                let mut out = QVec::new();
                for r in 0..len {
                    for (k, c) in images[col][r].iter() {
                        out.add_term(r * width + k, c.clone());
                    }
                }
                out
            })
            .collect();
        let big = QMatrix::from_columns(len * width, &stacked);
        let (_, kernel) = crate::linear::rank_kernel(&big);
        rep.kernel_dim += kernel.len();
        for x in &kernel {
            let (roots, rest) = local_min_poly(&h.left, x).rational_roots();
            if rest.degree().unwrap_or(0) > 0 || roots.iter().any(|(l, _)| !algebra::in_gamma(&gamma0, n + g, l)) {
                rep.failures.push(format!("kernel class in Q_{m}({d}) has eigenvalue outside Γ_{}", n + g));
            }
        }
    }
    Ok(rep)
}
