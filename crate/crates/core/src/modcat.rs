//! Finite shadows of the module category: block-graded algebras cut at a
//! level cap, modules over them and over the finite algebras `Aₙ`, the
//! functors `Eₙ` and `Pₙ ⊗_{Aₙ} -`, and restricted duals.

use std::collections::{BTreeMap, HashMap};

use num_traits::One;

use crate::algebra::{self, FiniteAlgebra};
use crate::error::{Error, Result};
use crate::linear::{rank, Echelon};
use crate::voa::VoaData;
use crate::{QMatrix, QVec, Rational};

/// Truncation of a degreewise graded algebra: a [`FiniteAlgebra`] whose
/// blocks `A[λ, μ]` run over a finite set of eigenvalue levels.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedAlgebra {
    pub algebra: FiniteAlgebra,
    pub levels: Vec<Rational>,
}

impl GradedAlgebra {
    pub fn new(algebra: FiniteAlgebra) -> Self {
        let mut levels: Vec<Rational> = algebra.labels.iter().flat_map(|(l, m)| [l.clone(), m.clone()]).collect();
        levels.sort();
        levels.dedup();
        GradedAlgebra { algebra, levels }
    }

    /// Span of matrix units `e_{λμ}` for the listed index pairs; diagonal
    /// units are always included. Fails unless the span is closed.
    pub fn matrix_units(levels: &[Rational], pairs: &[(usize, usize)]) -> Result<Self> {
        let mut all: Vec<(usize, usize)> = (0..levels.len()).map(|i| (i, i)).collect();
        for p in pairs {
            if !all.contains(p) {
                all.push(*p);
            }
        }
        all.sort();
        let pos: HashMap<(usize, usize), usize> = all.iter().enumerate().map(|(k, p)| (*p, k)).collect();
        let mut mult = vec![vec![QVec::new(); all.len()]; all.len()];
        for (a, &(i, j)) in all.iter().enumerate() {
            for (b, &(k, l)) in all.iter().enumerate() {
                if j == k {
                    let c = pos.get(&(i, l)).ok_or_else(|| {
                        Error::InvariantViolation(vec![format!("matrix units not closed at ({i}, {l})")])
                    })?;
                    mult[a][b] = QVec::unit(*c);
                }
            }
        }
        let unit = QVec::from_pairs((0..levels.len()).map(|i| (pos[&(i, i)], Rational::one())));
        let hamiltonian = QVec::from_pairs((0..levels.len()).map(|i| (pos[&(i, i)], levels[i].clone())));
        let algebra = FiniteAlgebra {
            labels: all.iter().map(|&(i, j)| (levels[i].clone(), levels[j].clone())).collect(),
            mult,
            unit,
            hamiltonian,
            gamma: levels.to_vec(),
        };
        Ok(GradedAlgebra { algebra, levels: levels.to_vec() })
    }

    /// Full matrix algebra on the given levels.
    pub fn full_matrix(levels: &[Rational]) -> Self {
        let n = levels.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect();
        Self::matrix_units(levels, &pairs).expect("full matrix units are closed")
    }

    /// Levels whose diagonal block survives `A(0) / Iₙ(A(0))`, where
    /// `Iₙ(A(0))` is spanned by products `x·y` with `deg y <= -n-1`.
    pub fn omega(&self, n: i64) -> Vec<Rational> {
        let a = &self.algebra;
        let mut by_level: BTreeMap<Rational, Echelon<Rational>> = BTreeMap::new();
        for j in 0..a.dim() {
            let dj = a.degree(j);
            if dj > Rational::from_integer((-n - 1).into()) {
                continue;
            }
            for i in 0..a.dim() {
                if a.degree(i) != -dj.clone() {
                    continue;
                }
                let p = &a.mult[i][j];
                if let Some(k) = p.support().next() {
                    by_level.entry(a.labels[k].0.clone()).or_default().insert(p);
                }
            }
        }
        let mut out = Vec::new();
        for l in &self.levels {
            let diag = a.block_indices(|x, y| x == l && y == l).len();
            let killed = by_level.get(l).map_or(0, |e| e.rank());
            if diag > killed {
                out.push(l.clone());
            }
        }
        out
    }

    pub fn gamma0(&self) -> Vec<Rational> {
        algebra::gamma0(&self.omega(0))
    }

    pub fn gap(&self) -> i64 {
        algebra::gap(&self.omega(0))
    }

    pub fn gamma(&self, n: i64) -> Vec<Rational> {
        algebra::gamma_m(&self.gamma0(), n)
    }

    /// Largest `N` with `Γ_N` inside the levels.
    pub fn cap(&self) -> i64 {
        let g0 = self.gamma0();
        let mut n = 0;
        while algebra::gamma_m(&g0, n + 1).iter().all(|l| self.levels.contains(l)) && n < 10_000 {
            n += 1;
        }
        n
    }

    /// Restriction to levels in `Γ_cap`.
    pub fn truncate(&self, cap: i64) -> Result<GradedAlgebra> {
        let lv = self.gamma(cap);
        let algebra = self.algebra.restrict(&lv)?;
        Ok(GradedAlgebra { algebra, levels: lv })
    }

    /// `Aₙ` and the positions of its basis in the big algebra.
    pub fn a_n(&self, n: i64) -> Result<(FiniteAlgebra, Vec<usize>)> {
        let g = self.gamma(n);
        let keep = self.algebra.block_indices(|l, m| g.contains(l) && g.contains(m));
        Ok((self.algebra.restrict(&g)?, keep))
    }

    /// Basis of `Pₙ = A · 1_{Aₙ}`: right label in `Γₙ`.
    pub fn p_n(&self, n: i64) -> Vec<usize> {
        let g = self.gamma(n);
        self.algebra.block_indices(|_, m| g.contains(m))
    }
}

/// Finite-dimensional left module with a label-homogeneous basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FinModule {
    pub algebra: FiniteAlgebra,
    /// `action[i]` is the matrix of basis element `i`.
    pub action: Vec<QMatrix>,
    /// Generalized eigenvalue of the Hamiltonian on each basis vector.
    pub labels: Vec<Rational>,
}

impl FinModule {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn act(&self, a: &QVec, v: &QVec) -> QVec {
        let mut out = QVec::new();
        for (i, c) in a.iter() {
            out.add_scaled(&self.action[i].mul_vec(v), c);
        }
        out
    }

    /// Module axioms, unit action and label compatibility.
    pub fn check(&self) -> Vec<String> {
        let a = &self.algebra;
        let n = self.dim();
        let mut bad = Vec::new();
        if self.action.len() != a.dim() {
            return vec!["one action matrix per algebra basis element required".into()];
        }
        if self.action.iter().any(|m| m.rows() != n || m.cols() != n) {
            return vec!["action matrices have the wrong size".into()];
        }
        let unit = self.action_of(&a.unit);
        if unit != QMatrix::identity(n) {
            bad.push("unit does not act as the identity".into());
        }
        for i in 0..a.dim() {
            for j in 0..a.dim() {
                if self.action[i].mul(&self.action[j]) != self.action_of(&a.mult[i][j]) {
                    bad.push(format!("action fails on the product of basis {i} and {j}"));
                }
            }
            let (l, m) = &a.labels[i];
            for v in 0..n {
                let img = self.action[i].column(v);
                if img.is_zero() {
                    continue;
                }
                if &self.labels[v] != m || img.support().any(|k| &self.labels[k] != l) {
                    bad.push(format!("basis {i} moves vector {v} outside its block"));
                }
            }
        }
        bad
    }

    pub fn action_of(&self, a: &QVec) -> QMatrix {
        let mut m = QMatrix::zeros(self.dim(), self.dim());
        for (i, c) in a.iter() {
            m = m.add(&self.action[i].scaled(c));
        }
        m
    }

    /// Left regular module.
    pub fn regular(alg: &FiniteAlgebra) -> FinModule {
        let action = (0..alg.dim()).map(|i| alg.left_matrix(&QVec::unit(i))).collect();
        FinModule { algebra: alg.clone(), action, labels: alg.labels.iter().map(|l| l.0.clone()).collect() }
    }

    /// `(⊕ᵢ A·e_{λᵢ}) / A·relations` where `e_λ` is the unit component on
    /// the diagonal block `λ`. Relations are coordinate vectors on the free
    /// module and should be label-homogeneous.
    pub fn quotient_of_free(alg: &FiniteAlgebra, tops: &[Rational], relations: &[QVec]) -> FinModule {
        let mut basis: Vec<(usize, usize)> = Vec::new();
        for (c, t) in tops.iter().enumerate() {
            for b in alg.block_indices(|_, m| m == t) {
                basis.push((c, b));
            }
        }
        let pos: HashMap<(usize, usize), usize> = basis.iter().enumerate().map(|(k, p)| (*p, k)).collect();
        let left = |a: usize, v: &QVec| -> QVec {
            let mut out = QVec::new();
            for (k, c) in v.iter() {
                let (copy, b) = basis[k];
                for (r, d) in alg.mult[a][b].iter() {
                    out.add_term(pos[&(copy, r)], c * d);
                }
            }
            out
        };
        let mut sub: Echelon<Rational> = Echelon::new();
        for r in relations {
            for a in 0..alg.dim() {
                sub.insert(&left(a, r));
            }
            sub.insert(r);
        }
        let reps: Vec<usize> = (0..basis.len()).filter(|k| !sub.is_pivot(*k)).collect();
        let rpos: HashMap<usize, usize> = reps.iter().enumerate().map(|(i, k)| (*k, i)).collect();
        let action = (0..alg.dim())
            .map(|a| {
                let cols: Vec<QVec> =
                    reps.iter().map(|&k| sub.reduce(&left(a, &QVec::unit(k))).map_indices(|i| rpos[&i])).collect();
                QMatrix::from_columns(reps.len(), &cols)
            })
            .collect();
        FinModule { algebra: alg.clone(), action, labels: reps.iter().map(|&k| alg.labels[basis[k].1].0.clone()).collect() }
    }

    /// Positions of basis vectors with label in `levels`.
    pub fn positions(&self, levels: &[Rational]) -> Vec<usize> {
        (0..self.dim()).filter(|&v| levels.contains(&self.labels[v])).collect()
    }

    pub fn level_dims(&self) -> BTreeMap<Rational, usize> {
        let mut out = BTreeMap::new();
        for l in &self.labels {
            *out.entry(l.clone()).or_insert(0) += 1;
        }
        out
    }

    /// Label-graded level shadow of the module.
    pub fn shadow(&self) -> GradedModuleShadow {
        let dims = self.level_dims();
        let levels: Vec<(Rational, usize)> = dims.into_iter().collect();
        let idx: Vec<Vec<usize>> = levels.iter().map(|(l, _)| self.positions(std::slice::from_ref(l))).collect();
        let mut actions = Vec::new();
        for (a, (l, m)) in self.algebra.labels.iter().enumerate() {
            let (Some(to), Some(from)) = (levels.iter().position(|x| &x.0 == l), levels.iter().position(|x| &x.0 == m)) else {
                continue;
            };
            let block = self.action[a].submatrix(&idx[to], &idx[from]);
            if !block.is_zero() {
                actions.push(ShadowAction { name: format!("e{a}"), from, to, matrix: block });
            }
        }
        GradedModuleShadow { levels, actions, right: false }
    }
}

/// `Eₙ(M) = Σ_{λ∈Γₙ} M[λ]` as a module over `Aₙ`, whose basis sits at
/// `keep` inside the algebra of `M`.
pub fn e_n(m: &FinModule, gamma_n: &[Rational], a_n: &FiniteAlgebra, keep: &[usize]) -> FinModule {
    let sel = m.positions(gamma_n);
    let action = keep.iter().map(|&b| m.action[b].submatrix(&sel, &sel)).collect();
    FinModule { algebra: a_n.clone(), action, labels: sel.iter().map(|&v| m.labels[v].clone()).collect() }
}

/// Equal structure constants; the window an algebra was cut from is ignored.
pub fn same_structure(a: &FiniteAlgebra, b: &FiniteAlgebra) -> bool {
    a.labels == b.labels && a.mult == b.mult && a.unit == b.unit && a.hamiltonian == b.hamiltonian
}

/// `Pₙ ⊗_{Aₙ} X` with the data needed to evaluate canonical maps.
pub struct Tensor {
    pub module: FinModule,
    p_basis: Vec<usize>,
    p_pos: HashMap<usize, usize>,
    dim_x: usize,
    relations: Echelon<Rational>,
    reps: Vec<usize>,
    rep_pos: HashMap<usize, usize>,
}

impl Tensor {
    fn slot(&self, p: usize, x: usize) -> usize {
        self.p_pos[&p] * self.dim_x + x
    }

    /// Class of `p ⊗ x` for `p` in the big algebra (supported on `Pₙ`).
    pub fn class(&self, p: &QVec, x: &QVec) -> QVec {
        let mut raw = QVec::new();
        for (i, a) in p.iter() {
            for (j, b) in x.iter() {
                raw.add_term(self.slot(i, j), a * b);
            }
        }
        self.relations.reduce(&raw).map_indices(|k| self.rep_pos[&k])
    }

    pub fn p_basis(&self) -> &[usize] {
        &self.p_basis
    }

    pub fn rep_pairs(&self) -> Vec<(usize, usize)> {
        self.reps.iter().map(|&k| (self.p_basis[k / self.dim_x], k % self.dim_x)).collect()
    }
}

/// Level-wise coequalizer of `(p·a)⊗x` and `p⊗(a·x)`.
pub fn tensor_over_an(g: &GradedAlgebra, n: i64, x: &FinModule, cap: i64) -> Result<Tensor> {
    let need = n + g.gap();
    if cap < need {
        return Err(Error::CapTooSmall { cap, need });
    }
    let (a_n, keep) = g.a_n(n)?;
    if !same_structure(&x.algebra, &a_n) {
        return Err(Error::IncompatibleAlgebras(format!(
            "module over a {}-dimensional algebra, A_{n} has dimension {}",
            x.algebra.dim(),
            a_n.dim()
        )));
    }
    let big = &g.algebra;
    let p_basis = g.p_n(n);
    let p_pos: HashMap<usize, usize> = p_basis.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    let dx = x.dim();
    let slot = |p: usize, v: usize| p_pos[&p] * dx + v;
    let mut relations: Echelon<Rational> = Echelon::new();
    for &p in &p_basis {
        for (ai, &ab) in keep.iter().enumerate() {
            for v in 0..dx {
                let mut r = QVec::new();
                for (k, c) in big.mult[p][ab].iter() {
                    r.add_term(slot(k, v), c.clone());
                }
                for (w, c) in x.action[ai].column(v).iter() {
                    r.add_term(slot(p, w), -c.clone());
                }
                relations.insert(&r);
            }
        }
    }
    let total = p_basis.len() * dx;
    let reps: Vec<usize> = (0..total).filter(|k| !relations.is_pivot(*k)).collect();
    let rep_pos: HashMap<usize, usize> = reps.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let action = (0..big.dim())
        .map(|b| {
            let cols: Vec<QVec> = reps
                .iter()
                .map(|&k| {
                    let (p, v) = (p_basis[k / dx], k % dx);
                    let mut raw = QVec::new();
                    for (q, c) in big.mult[b][p].iter() {
                        raw.add_term(slot(q, v), c.clone());
                    }
                    relations.reduce(&raw).map_indices(|i| rep_pos[&i])
                })
                .collect();
            QMatrix::from_columns(reps.len(), &cols)
        })
        .collect();
    let labels = reps.iter().map(|&k| big.labels[p_basis[k / dx]].0.clone()).collect();
    let module = FinModule { algebra: big.clone(), action, labels };
    Ok(Tensor { module, p_basis, p_pos, dim_x: dx, relations, reps, rep_pos })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundTripReport {
    pub n: i64,
    pub cap: i64,
    pub dim_x: usize,
    pub dim_en: usize,
    /// Rank of `x ↦ 1 ⊗ x`; equal to `dim_x` when `Aₙ ⊗ X` embeds.
    pub embedding_rank: usize,
    pub linear: bool,
    pub isomorphism: bool,
    /// Columns are images of the basis of `X` in the basis of `Eₙ(Pₙ ⊗ X)`.
    pub map: QMatrix,
    pub witness: Option<String>,
}

/// `X → Eₙ(Pₙ ⊗_{Aₙ} X)`, `x ↦ 1 ⊗ x`, checked to be a bijective module map.
pub fn round_trip_check(g: &GradedAlgebra, x: &FinModule, n: i64, cap: i64) -> Result<RoundTripReport> {
    let gap = g.gap();
    if n < gap {
        return Err(Error::InvariantViolation(vec![format!("level {n} is below the gap {gap}")]));
    }
    if cap > g.cap() {
        return Err(Error::OutOfWindow(format!("cap {cap} exceeds the algebra cap {}", g.cap())));
    }
    let gc = g.truncate(cap)?;
    let t = tensor_over_an(&gc, n, x, cap)?;
    let (a_n, keep) = gc.a_n(n)?;
    let gn = gc.gamma(n);
    let sel = t.module.positions(&gn);
    let sel_pos: HashMap<usize, usize> = sel.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let en = e_n(&t.module, &gn, &a_n, &keep);
    let one: QVec = a_n.unit.map_indices(|i| keep[i]);
    let mut cols = Vec::new();
    let mut witness = None;
    for v in 0..x.dim() {
        let c = t.class(&one, &QVec::unit(v));
        if c.support().any(|k| !sel_pos.contains_key(&k)) {
            witness.get_or_insert(format!("1 ⊗ x{v} leaves E_{n}"));
        }
        let mut img = c.clone();
        img.retain(|k| sel_pos.contains_key(&k));
        cols.push(img.map_indices(|k| sel_pos[&k]));
    }
    let map = QMatrix::from_columns(sel.len(), &cols);
    let embedding_rank = rank(&cols);
    let mut linear = true;
    for (ai, _) in keep.iter().enumerate() {
        let lhs = map.mul(&x.action[ai]);
        let rhs = en.action[ai].mul(&map);
        if lhs != rhs {
            linear = false;
            witness.get_or_insert(format!("canonical map fails to commute with basis {ai} of A_{n}"));
        }
    }
    let isomorphism = linear && embedding_rank == x.dim() && sel.len() == x.dim();
    if !isomorphism && witness.is_none() {
        witness = Some(format!("dim X = {}, dim E_{n} = {}, rank = {embedding_rank}", x.dim(), sel.len()));
    }
    Ok(RoundTripReport { n, cap, dim_x: x.dim(), dim_en: sel.len(), embedding_rank, linear, isomorphism, map, witness })
}

/// Multiplication `Pₙ ⊗_{Aₙ} Eₙ(M) → M`; bijective for modules generated
/// by their `Γₙ` part with no extra relations.
pub fn module_round_trip(g: &GradedAlgebra, m: &FinModule, n: i64) -> Result<bool> {
    let (a_n, keep) = g.a_n(n)?;
    let gn = g.gamma(n);
    let sel = m.positions(&gn);
    let en = e_n(m, &gn, &a_n, &keep);
    let t = tensor_over_an(g, n, &en, g.cap().max(n + g.gap()))?;
    let cols: Vec<QVec> = t
        .rep_pairs()
        .into_iter()
        .map(|(p, v)| m.action[p].mul_vec(&QVec::unit(sel[v])))
        .collect();
    let mu = QMatrix::from_columns(m.dim(), &cols);
    let linear = (0..g.algebra.dim()).all(|b| mu.mul(&t.module.action[b]) == m.action[b].mul(&mu));
    Ok(linear && cols.len() == m.dim() && rank(&cols) == m.dim())
}

/// `Kₙ(M)`: vectors killed by every basis element of degree `<= -n-1`,
/// reported as the kernel dimension per level.
pub fn k_n_dims(m: &FinModule, n: i64) -> BTreeMap<Rational, usize> {
    let a = &m.algebra;
    let bound = Rational::from_integer((-n - 1).into());
    let lowering: Vec<usize> = (0..a.dim()).filter(|&i| a.degree(i) <= bound).collect();
    let mut out = BTreeMap::new();
    for (l, _) in m.level_dims() {
        let cols = m.positions(std::slice::from_ref(&l));
        let mut rows = Vec::new();
        for &b in &lowering {
            for r in 0..m.dim() {
                let row: QVec = QVec::from_pairs(
                    cols.iter().enumerate().filter_map(|(c, &v)| m.action[b].row(r).get(v).map(|x| (c, x.clone()))),
                );
                if !row.is_zero() {
                    rows.push(row);
                }
            }
        }
        out.insert(l, cols.len() - rank(&rows));
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentReport {
    pub n: i64,
    pub gap: i64,
    pub e_n_dim: usize,
    pub k_n_dim: usize,
    pub e_ng_dim: usize,
    /// `Eₙ(M) ⊆ Kₙ(M)` and `Kₙ(M) ⊆ E_{n+g}(M)`.
    pub holds: bool,
    pub failures: Vec<String>,
}

/// `Eₙ(M) ⊆ Kₙ(M) ⊆ E_{n+g}(M)`, decided level by level.
pub fn annihilator_containment(g: &GradedAlgebra, m: &FinModule, n: i64) -> ContainmentReport {
    let gap = g.gap();
    let gn = g.gamma(n);
    let gng = g.gamma(n + gap);
    let k = k_n_dims(m, n);
    let dims = m.level_dims();
    let mut failures = Vec::new();
    for (l, d) in &dims {
        let kd = k[l];
        if gn.contains(l) && kd != *d {
            failures.push(format!("level {l}: E_{n} part of dim {d} is not killed (kernel {kd})"));
        }
        if !gng.contains(l) && kd > 0 {
            failures.push(format!("level {l}: kernel of dim {kd} outside Γ_{}", n + gap));
        }
    }
    ContainmentReport {
        n,
        gap,
        e_n_dim: m.positions(&gn).len(),
        k_n_dim: k.values().sum(),
        e_ng_dim: m.positions(&gng).len(),
        holds: failures.is_empty(),
        failures,
    }
}

/// `M = A · Eₙ(M)`.
pub fn generated_by(m: &FinModule, levels: &[Rational]) -> bool {
    let sel = m.positions(levels);
    let mut span = Vec::new();
    for b in 0..m.algebra.dim() {
        for &v in &sel {
            span.push(m.action[b].mul_vec(&QVec::unit(v)));
        }
    }
    rank(&span) == m.dim()
}

/// `φ` (columns are images of the basis of `m`) intertwines the actions.
pub fn is_module_map(m: &FinModule, target: &FinModule, phi: &QMatrix) -> bool {
    (0..m.algebra.dim()).all(|b| phi.mul(&m.action[b]) == target.action[b].mul(phi))
}

/// Restriction of `φ` to the `levels` parts of source and target.
pub fn restrict_map(m: &FinModule, target: &FinModule, phi: &QMatrix, levels: &[Rational]) -> QMatrix {
    phi.submatrix(&target.positions(levels), &m.positions(levels))
}

pub fn is_bijective(phi: &QMatrix) -> bool {
    phi.rows() == phi.cols() && rank(phi.row_vecs()) == phi.rows()
}

/// One transition map of a graded shadow, from level `from` to level `to`.
#[derive(Clone, Debug, PartialEq)]
pub struct ShadowAction {
    pub name: String,
    pub from: usize,
    pub to: usize,
    pub matrix: QMatrix,
}

/// Level-finite graded space with transition actions. For right-module
/// shadows the actions are read as acting on the right.
#[derive(Clone, Debug, PartialEq)]
pub struct GradedModuleShadow {
    pub levels: Vec<(Rational, usize)>,
    pub actions: Vec<ShadowAction>,
    pub right: bool,
}

impl GradedModuleShadow {
    pub fn level_dims(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.1).collect()
    }

    pub fn check(&self) -> Vec<String> {
        let mut bad = Vec::new();
        for a in &self.actions {
            let (r, c) = if self.right { (self.levels[a.from].1, self.levels[a.to].1) } else { (self.levels[a.to].1, self.levels[a.from].1) };
            if a.matrix.rows() != r || a.matrix.cols() != c {
                bad.push(format!("action {} has the wrong shape", a.name));
            }
        }
        bad
    }
}

/// Level-wise dual with transposed actions; a right shadow for a left one.
pub fn restricted_dual(m: &GradedModuleShadow) -> GradedModuleShadow {
    GradedModuleShadow {
        levels: m.levels.clone(),
        actions: m
            .actions
            .iter()
            .map(|a| ShadowAction { name: a.name.clone(), from: a.from, to: a.to, matrix: a.matrix.transpose() })
            .collect(),
        right: !m.right,
    }
}

/// For each action, `⟨f·a, v⟩ = ⟨f, a·v⟩` under the evaluation pairing, and
/// the pairing has full rank on every level.
pub fn pairing_check(m: &GradedModuleShadow, dual: &GradedModuleShadow) -> std::result::Result<(), String> {
    for (k, (l, d)) in m.levels.iter().enumerate() {
        if dual.levels.get(k) != Some(&(l.clone(), *d)) {
            return Err(format!("level {l} differs in the dual"));
        }
        // evaluation on dual basis is the identity matrix
        let pairing = QMatrix::identity(*d);
        if rank(pairing.row_vecs()) != *d {
            return Err(format!("pairing degenerate at level {l}"));
        }
    }
    for (a, b) in m.actions.iter().zip(&dual.actions) {
        let (src, dst) = (m.levels[a.from].1, m.levels[a.to].1);
        for f in 0..dst {
            for v in 0..src {
                let fa = b.matrix.get(v, f);
                let av = a.matrix.get(f, v);
                if fa != av {
                    return Err(format!("pairing fails for action {}", a.name));
                }
            }
        }
    }
    Ok(())
}

/// Weight-graded shadow of a truncated vertex algebra under the modes of
/// the given generators, `u_(k)` of degree `Δu - k - 1`, for `|k| <= modes`.
pub fn voa_shadow(voa: &VoaData, generators: &[usize], modes: i64) -> Result<GradedModuleShadow> {
    let top = voa.max_weight();
    let weights: Vec<i64> = (0..=top).filter(|r| !voa.of_weight(*r).is_empty()).collect();
    let levels: Vec<(Rational, usize)> =
        weights.iter().map(|&r| (Rational::from_integer(r.into()), voa.of_weight(r).len())).collect();
    let mut actions = Vec::new();
    for &u in generators {
        for k in -modes..=modes {
            for (fi, &r) in weights.iter().enumerate() {
                let s = r + voa.weight(u) - k - 1;
                let Some(ti) = weights.iter().position(|&x| x == s) else { continue };
                let src = voa.of_weight(r);
                let dst = voa.of_weight(s);
                let mut cols = Vec::new();
                let mut ok = true;
                for &v in &src {
                    match voa.product(k, u, v) {
                        Ok(p) => cols.push(p.map_indices(|i| dst.iter().position(|&x| x == i).expect("homogeneous product"))),
                        Err(Error::OutOfWindow(_)) => {
                            ok = false;
                            break;
                        }
                        Err(e) => return Err(e),
                    }
                }
                if ok && cols.iter().any(|c| !c.is_zero()) {
                    actions.push(ShadowAction {
                        name: format!("{}_({k})", voa.symbol(u)),
                        from: fi,
                        to: ti,
                        matrix: QMatrix::from_columns(dst.len(), &cols),
                    });
                }
            }
        }
    }
    Ok(GradedModuleShadow { levels, actions, right: false })
}

/// Synthetic truncated algebras used as functor probes, keyed by `Ω₀`.
pub fn synthetic_algebras() -> Vec<(&'static str, GradedAlgebra)> {
    let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
    let mut out = Vec::new();
    // Ω₀ = {0}: full matrices on 0, 1, 2
    out.push(("omega-0", GradedAlgebra::full_matrix(&[q(0, 1), q(1, 1), q(2, 1)])));
    // Ω₀ = {0, 1}: full matrices on 1, 2, 3 plus lowering maps into 0
    let levels = [q(0, 1), q(1, 1), q(2, 1), q(3, 1)];
    let mut pairs: Vec<(usize, usize)> = (1..4).flat_map(|i| (1..4).map(move |j| (i, j))).collect();
    pairs.extend([(0, 1), (0, 2), (0, 3)]);
    out.push(("omega-0-1", GradedAlgebra::matrix_units(&levels, &pairs).expect("closed")));
    // Ω₀ = {0, 1/2}: two full 2×2 blocks on 0, 1 and 1/2, 3/2
    let levels = [q(0, 1), q(1, 2), q(1, 1), q(3, 2)];
    let pairs = [(0, 2), (2, 0), (1, 3), (3, 1)];
    out.push(("omega-0-half", GradedAlgebra::matrix_units(&levels, &pairs).expect("closed")));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn synthetic_spectra() {
        let algs = synthetic_algebras();
        let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
        assert_eq!(algs[0].1.omega(0), vec![q(0, 1)]);
        assert_eq!(algs[1].1.omega(0), vec![q(0, 1), q(1, 1)]);
        assert_eq!(algs[2].1.omega(0), vec![q(0, 1), q(1, 2)]);
        assert_eq!(algs[1].1.gap(), 1);
        assert_eq!(algs[1].1.cap(), 3);
        for (_, g) in &algs {
            assert!(g.algebra.check().is_empty());
        }
    }
}
