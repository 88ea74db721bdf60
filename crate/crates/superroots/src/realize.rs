//! Sparse matrix models of osp(2m+1|2n), osp(2m|2n) and sl(m|n), their
//! supertrace forms, congruence isomorphisms, embeddings, and the replay of
//! the Chevalley construction inside a model.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::chevalley::{self, ChevError, ConstantsTable, Signs, TotalOrder};
use crate::compare::AlgebraMap;
use crate::num::{self, fmt_q, q, qf, Coordinates, Mat, Span, Q};
use crate::rootsys::{self, BasisSymbol, Family, LatticeVector, RootError, RootSupersystem, SymmetricForm, TypeDescriptor};
use crate::superalg::{koszul, AlgError, GradedBasisElement, Label, LieSuperalgebra, Parity};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RealizeError {
    #[error("sl models need nonempty even and odd index sets")]
    EmptyOddPart,
    #[error("bad index sets: {0}")]
    BadIndexSets(String),
    #[error("bracket leaves the model: {0}")]
    NotClosed(String),
    #[error("congruence check failed: {0}")]
    CongruenceFails(String),
    #[error("the small model's index sets are not contained in the big model's")]
    NotSubset,
    #[error("zero bracket where a root vector was expected: {0}")]
    ZeroBracket(String),
    #[error("no replacement for root vector row {0}")]
    BadRow(String),
    #[error("matrix is not homogeneous")]
    Inhomogeneous,
    #[error(transparent)]
    Chev(#[from] ChevError),
    #[error(transparent)]
    Alg(#[from] AlgError),
    #[error(transparent)]
    Root(#[from] RootError),
}

// ---------------------------------------------------------------------------
// indices and matrices

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Slot {
    Zero,
    Plain(u32),
    Bar(u32),
}

/// Row/column label. Ordering puts the even indices first, then within a
/// parity `0`, the plain indices, then the barred ones.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SuperIndex {
    pub parity: Parity,
    pub slot: Slot,
}

impl SuperIndex {
    pub fn zero() -> Self {
        SuperIndex { parity: Parity::Even, slot: Slot::Zero }
    }
    pub fn even(i: u32) -> Self {
        SuperIndex { parity: Parity::Even, slot: Slot::Plain(i) }
    }
    pub fn even_bar(i: u32) -> Self {
        SuperIndex { parity: Parity::Even, slot: Slot::Bar(i) }
    }
    pub fn odd(j: u32) -> Self {
        SuperIndex { parity: Parity::Odd, slot: Slot::Plain(j) }
    }
    pub fn odd_bar(j: u32) -> Self {
        SuperIndex { parity: Parity::Odd, slot: Slot::Bar(j) }
    }
}

impl fmt::Display for SuperIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = if self.parity == Parity::Even { "i" } else { "j" };
        match self.slot {
            Slot::Zero => write!(f, "0"),
            Slot::Plain(i) => write!(f, "{}{}", p, i),
            Slot::Bar(i) => write!(f, "{}{}~", p, i),
        }
    }
}

pub type Pos = (SuperIndex, SuperIndex);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperMatrix {
    pub entries: BTreeMap<Pos, Q>,
    pub parity: Parity,
}

fn pos_parity(r: &SuperIndex, s: &SuperIndex) -> Parity {
    r.parity.add(s.parity)
}

impl SuperMatrix {
    pub fn zero(parity: Parity) -> Self {
        SuperMatrix { entries: BTreeMap::new(), parity }
    }

    pub fn unit(r: SuperIndex, s: SuperIndex) -> Self {
        let mut m = SuperMatrix::zero(pos_parity(&r, &s));
        m.entries.insert((r, s), Q::one());
        m
    }

    pub fn from_terms(terms: &[(SuperIndex, SuperIndex, Q)]) -> Result<Self, RealizeError> {
        let mut m: Option<SuperMatrix> = None;
        for (r, s, c) in terms {
            let t = SuperMatrix::unit(*r, *s).scale(c);
            m = Some(match m {
                None => t,
                Some(x) if x.parity == t.parity => x.add(&t),
                Some(_) => return Err(RealizeError::Inhomogeneous),
            });
        }
        Ok(m.unwrap_or_else(|| SuperMatrix::zero(Parity::Even)))
    }

    /// Diagonal matrix; always even.
    pub fn diagonal(d: &[(SuperIndex, Q)]) -> Self {
        let mut m = SuperMatrix::zero(Parity::Even);
        for (i, c) in d {
            m.add_at((*i, *i), c.clone());
        }
        m
    }

    pub fn get(&self, r: &SuperIndex, s: &SuperIndex) -> Q {
        self.entries.get(&(*r, *s)).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    fn add_at(&mut self, k: Pos, v: Q) {
        let e = self.entries.entry(k).or_insert_with(Q::zero);
        *e += v;
        if e.is_zero() {
            self.entries.remove(&k);
        }
    }

    fn sum_parity(&self, o: &SuperMatrix) -> Parity {
        if self.is_zero() {
            o.parity
        } else {
            self.parity
        }
    }

    pub fn add(&self, o: &SuperMatrix) -> SuperMatrix {
        let mut m = SuperMatrix { entries: self.entries.clone(), parity: self.sum_parity(o) };
        for (k, v) in &o.entries {
            m.add_at(*k, v.clone());
        }
        m
    }

    pub fn sub(&self, o: &SuperMatrix) -> SuperMatrix {
        self.add(&o.neg())
    }

    pub fn neg(&self) -> SuperMatrix {
        self.scale(&q(-1))
    }

    pub fn scale(&self, c: &Q) -> SuperMatrix {
        if c.is_zero() {
            return SuperMatrix::zero(self.parity);
        }
        SuperMatrix { entries: self.entries.iter().map(|(k, v)| (*k, v * c)).collect(), parity: self.parity }
    }

    pub fn mul(&self, o: &SuperMatrix) -> SuperMatrix {
        let mut rows: BTreeMap<SuperIndex, Vec<(SuperIndex, &Q)>> = BTreeMap::new();
        for ((r, s), v) in &o.entries {
            rows.entry(*r).or_default().push((*s, v));
        }
        let mut m = SuperMatrix::zero(self.parity.add(o.parity));
        for ((r, k), a) in &self.entries {
            if let Some(row) = rows.get(k) {
                for (s, b) in row {
                    m.add_at((*r, *s), a * *b);
                }
            }
        }
        m
    }

    /// [A, B] = AB - (-1)^{|A||B|} BA
    pub fn bracket(&self, o: &SuperMatrix) -> SuperMatrix {
        let ab = self.mul(o);
        let ba = o.mul(self);
        let mut m = ab.sub(&ba.scale(&koszul(self.parity, o.parity)));
        m.parity = self.parity.add(o.parity);
        m
    }

    /// b_{ij} = a_{ji}, negated when |i| = 0 and |j| = 1.
    pub fn supertranspose(&self) -> SuperMatrix {
        let mut m = SuperMatrix::zero(self.parity);
        for ((r, s), v) in &self.entries {
            // entry (r, s) of A lands at (i, j) = (s, r)
            let sign = if s.parity == Parity::Even && r.parity == Parity::Odd { q(-1) } else { q(1) };
            m.add_at((*s, *r), v * sign);
        }
        m
    }

    pub fn str(&self) -> Q {
        let mut t = Q::zero();
        for ((r, s), v) in &self.entries {
            if r == s {
                if r.parity == Parity::Even {
                    t += v;
                } else {
                    t -= v;
                }
            }
        }
        t
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut out = String::new();
        for (i, ((r, s), v)) in self.entries.iter().enumerate() {
            let neg = v < &Q::zero();
            let a = if neg { -v.clone() } else { v.clone() };
            if i == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !a.is_one() {
                out.push_str(&fmt_q(&a));
            }
            out.push_str(&format!("e[{},{}]", r, s));
        }
        out
    }

    fn flat(&self, at: &HashMap<Pos, usize>, len: usize) -> Option<Vec<Q>> {
        let mut v = vec![Q::zero(); len];
        for (k, c) in &self.entries {
            v[*at.get(k)?] = c.clone();
        }
        Some(v)
    }
}

// ---------------------------------------------------------------------------
// bilinear forms

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum QKind {
    OspOdd,
    OspEven,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QForm {
    pub matrix: SuperMatrix,
    pub kind: QKind,
}

impl QForm {
    /// M1 = -2 e00 + sum (e_{i,i~} + e_{i~,i}) (odd case, without e00 in the
    /// even case), M2 = sum (e_{j,j~} - e_{j~,j}).
    pub fn standard(kind: QKind, i_set: &[u32], j_set: &[u32]) -> QForm {
        let mut m = SuperMatrix::zero(Parity::Even);
        if kind == QKind::OspOdd {
            m.add_at((SuperIndex::zero(), SuperIndex::zero()), q(-2));
        }
        for &i in i_set {
            m.add_at((SuperIndex::even(i), SuperIndex::even_bar(i)), q(1));
            m.add_at((SuperIndex::even_bar(i), SuperIndex::even(i)), q(1));
        }
        for &j in j_set {
            m.add_at((SuperIndex::odd(j), SuperIndex::odd_bar(j)), q(1));
            m.add_at((SuperIndex::odd_bar(j), SuperIndex::odd(j)), q(-1));
        }
        QForm { matrix: m, kind }
    }
}

/// X^{st} Q + Q X; zero exactly when X lies in the algebra defined by Q.
pub fn defining_defect(x: &SuperMatrix, qm: &SuperMatrix) -> SuperMatrix {
    x.supertranspose().mul(qm).add(&qm.mul(x))
}

fn all_positions(indices: &[SuperIndex]) -> (Vec<Pos>, HashMap<Pos, usize>) {
    let mut list = Vec::new();
    for r in indices {
        for s in indices {
            list.push((*r, *s));
        }
    }
    let at = list.iter().enumerate().map(|(i, p)| (*p, i)).collect();
    (list, at)
}

/// Homogeneous basis (even part first) of `{X : X^{st} Q = -Q X}` over the
/// given indices.
pub fn orthosymplectic_kernel(qm: &SuperMatrix, indices: &[SuperIndex]) -> Vec<SuperMatrix> {
    let (list, at) = all_positions(indices);
    let mut out = Vec::new();
    for p in [Parity::Even, Parity::Odd] {
        let units: Vec<Pos> = list.iter().copied().filter(|(r, s)| pos_parity(r, s) == p).collect();
        out.extend(solve_on_units(&units, &at, list.len(), |x| defining_defect(x, qm)));
    }
    out
}

/// Nullspace of a linear matrix-valued condition over the span of `units`.
fn solve_on_units(
    units: &[Pos],
    at: &HashMap<Pos, usize>,
    len: usize,
    cond: impl Fn(&SuperMatrix) -> SuperMatrix,
) -> Vec<SuperMatrix> {
    if units.is_empty() {
        return Vec::new();
    }
    let cols: Vec<Vec<Q>> = units
        .iter()
        .map(|(r, s)| cond(&SuperMatrix::unit(*r, *s)).flat(at, len).expect("condition leaves the index set"))
        .collect();
    let rows: Mat = (0..len).map(|i| cols.iter().map(|c| c[i].clone()).collect()).collect();
    num::nullspace(&rows, units.len())
        .into_iter()
        .map(|c| {
            let terms: Vec<(SuperIndex, SuperIndex, Q)> =
                units.iter().zip(c).filter(|(_, x)| !x.is_zero()).map(|((r, s), x)| (*r, *s, x)).collect();
            SuperMatrix::from_terms(&terms).expect("units share a parity")
        })
        .collect()
}

// ---------------------------------------------------------------------------
// models

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelKind {
    OspOdd,
    OspEven,
    Sl,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::OspOdd => "osp-odd",
            ModelKind::OspEven => "osp-even",
            ModelKind::Sl => "sl",
        }
    }

    pub fn from_name(s: &str) -> Option<ModelKind> {
        [ModelKind::OspOdd, ModelKind::OspEven, ModelKind::Sl].into_iter().find(|k| k.name() == s)
    }
}

/// A printed root-vector row that failed the audit and the vector used
/// instead.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RowAudit {
    pub root: String,
    pub printed: String,
    pub failure: String,
    pub replacement: String,
}

#[derive(Clone, Debug)]
pub struct MatrixModel {
    pub kind: ModelKind,
    /// I for osp, the even index set for sl.
    pub i_set: Vec<u32>,
    /// J for osp, the odd index set for sl.
    pub j_set: Vec<u32>,
    pub indices: Vec<SuperIndex>,
    pub q: Option<QForm>,
    pub cartan: Vec<SuperMatrix>,
    pub root_vectors: BTreeMap<LatticeVector, Vec<SuperMatrix>>,
    pub quotient_center: bool,
    pub rootsys: RootSupersystem,
    /// The invariant form of the abstract algebra is `form_scale * str(xy)`,
    /// chosen so the induced form on roots is the unit eps/delta form.
    pub form_scale: Q,
    pub audit: Vec<RowAudit>,
}

fn check_set(name: &str, s: &[u32]) -> Result<(), RealizeError> {
    let mut t = s.to_vec();
    t.sort_unstable();
    t.dedup();
    if t.len() != s.len() || s.contains(&0) {
        return Err(RealizeError::BadIndexSets(format!("{} must list distinct positive indices", name)));
    }
    Ok(())
}

fn sorted(s: &[u32]) -> Vec<u32> {
    let mut t = s.to_vec();
    t.sort_unstable();
    t
}

/// Type of the root system of a model, per the osp and sl type tables.
pub fn model_descriptor(kind: ModelKind, m: u32, n: u32) -> Option<TypeDescriptor> {
    let d = |f: Family, r: &[u32]| Some(TypeDescriptor::new(f, r));
    match kind {
        ModelKind::OspOdd => match (m, n) {
            (_, 0) => None,
            (0, n) => d(Family::B0, &[n]),
            (1, n) => d(Family::B1T, &[1, n]),
            (m, 1) => d(Family::BT1, &[m, 1]),
            (m, n) => d(Family::BTT, &[m, n]),
        },
        ModelKind::OspEven => match (m, n) {
            (0, _) | (_, 0) => None,
            (1, 1) => d(Family::ADot0, &[2]),
            (1, n) => d(Family::CDot0, &[n]),
            (2, 1) => Some(TypeDescriptor::d21(q(1))),
            (2, n) => d(Family::D2T, &[2, n]),
            (m, 1) => d(Family::D1T, &[1, m]),
            (m, n) => d(Family::DTT, &[m, n]),
        },
        ModelKind::Sl => match (m, n) {
            (0, _) | (_, 0) | (1, 1) => None,
            (1, n) => d(Family::ADot0, &[n]),
            (m, 1) => d(Family::ADot0, &[m]),
            (m, n) if m == n => d(Family::All, &[m - 1]),
            (m, n) => d(Family::ADotTT, &[m, n]),
        },
    }
}

struct Row {
    root: LatticeVector,
    terms: Vec<(SuperIndex, SuperIndex, Q)>,
}

pub fn build_model(kind: ModelKind, i_set: &[u32], j_set: &[u32]) -> Result<MatrixModel, RealizeError> {
    check_set("I", i_set)?;
    check_set("J", j_set)?;
    let (is, js) = (sorted(i_set), sorted(j_set));
    match kind {
        ModelKind::Sl if is.is_empty() || js.is_empty() => return Err(RealizeError::EmptyOddPart),
        ModelKind::Sl if is.len() == 1 && js.len() == 1 => {
            return Err(RealizeError::BadIndexSets("sl(1|1) is not simple".into()))
        }
        ModelKind::OspOdd if js.is_empty() => return Err(RealizeError::BadIndexSets("osp needs J nonempty".into())),
        ModelKind::OspEven if is.is_empty() || js.is_empty() => {
            return Err(RealizeError::BadIndexSets("osp(2I,2J) needs I and J nonempty".into()))
        }
        _ => {}
    }
    let descriptor = model_descriptor(kind, is.len() as u32, js.len() as u32);
    let mut basis: Vec<BasisSymbol> = is.iter().map(|&i| BasisSymbol::eps(i)).collect();
    basis.extend(js.iter().map(|&j| BasisSymbol::delta(j)));
    let dim = basis.len();
    let mut diag = vec![q(1); is.len()];
    diag.extend(vec![q(-1); js.len()]);
    let form = SymmetricForm::diagonal(&diag);
    let ep = |i: u32| LatticeVector::unit(dim, is.iter().position(|&x| x == i).unwrap(), q(1));
    let de = |j: u32| LatticeVector::unit(dim, is.len() + js.iter().position(|&x| x == j).unwrap(), q(1));
    let quotient = kind == ModelKind::Sl && is.len() == js.len();
    let project = |v: LatticeVector| -> LatticeVector {
        if !quotient {
            return v;
        }
        let s: Q = v.0.iter().sum();
        let c = s / q(dim as i64);
        LatticeVector(v.0.iter().map(|x| x - &c).collect())
    };
    let (z, e, eb, o, ob) = (SuperIndex::zero(), SuperIndex::even, SuperIndex::even_bar, SuperIndex::odd, SuperIndex::odd_bar);

    let mut indices = Vec::new();
    let mut cartan = Vec::new();
    let mut rows: Vec<Row> = Vec::new();
    let qform = match kind {
        ModelKind::OspOdd => Some(QForm::standard(QKind::OspOdd, &is, &js)),
        ModelKind::OspEven => Some(QForm::standard(QKind::OspEven, &is, &js)),
        ModelKind::Sl => None,
    };
    let t = |r: SuperIndex, s: SuperIndex, c: i64| (r, s, q(c));
    match kind {
        ModelKind::OspOdd | ModelKind::OspEven => {
            if kind == ModelKind::OspOdd {
                indices.push(z);
            }
            indices.extend(is.iter().map(|&i| e(i)));
            indices.extend(is.iter().map(|&i| eb(i)));
            indices.extend(js.iter().map(|&j| o(j)));
            indices.extend(js.iter().map(|&j| ob(j)));
            for &i in &is {
                cartan.push(SuperMatrix::diagonal(&[(e(i), q(1)), (eb(i), q(-1))]));
            }
            for &j in &js {
                cartan.push(SuperMatrix::diagonal(&[(o(j), q(1)), (ob(j), q(-1))]));
            }
            for &r in &is {
                for &s in &is {
                    if r < s {
                        rows.push(Row { root: ep(r).add(&ep(s)), terms: vec![t(e(r), eb(s), 1), t(e(s), eb(r), -1)] });
                        rows.push(Row {
                            root: ep(r).add(&ep(s)).neg(),
                            terms: vec![t(eb(r), e(s), 1), t(eb(s), e(r), -1)],
                        });
                    }
                    if r != s {
                        rows.push(Row { root: ep(r).sub(&ep(s)), terms: vec![t(e(r), e(s), 1), t(eb(s), eb(r), -1)] });
                    }
                }
            }
            for &p in &js {
                for &qq in &js {
                    if p < qq {
                        // the printed row repeats e_{p,q~}; the audit below replaces it
                        rows.push(Row { root: de(p).add(&de(qq)), terms: vec![t(o(p), ob(qq), 1), t(o(p), ob(qq), 1)] });
                        rows.push(Row {
                            root: de(p).add(&de(qq)).neg(),
                            terms: vec![t(ob(p), o(qq), 1), t(ob(qq), o(p), 1)],
                        });
                    }
                    if p != qq {
                        rows.push(Row { root: de(p).sub(&de(qq)), terms: vec![t(o(p), o(qq), 1), t(ob(qq), ob(p), -1)] });
                    }
                }
                rows.push(Row { root: de(p).scale(&q(2)), terms: vec![t(o(p), ob(p), 1)] });
                rows.push(Row { root: de(p).scale(&q(-2)), terms: vec![t(ob(p), o(p), 1)] });
            }
            for &r in &is {
                for &p in &js {
                    rows.push(Row { root: ep(r).add(&de(p)), terms: vec![t(e(r), ob(p), 1), t(o(p), eb(r), 1)] });
                    rows.push(Row { root: ep(r).add(&de(p)).neg(), terms: vec![t(eb(r), o(p), 1), t(ob(p), e(r), -1)] });
                    rows.push(Row { root: ep(r).sub(&de(p)), terms: vec![t(e(r), o(p), 1), t(ob(p), eb(r), -1)] });
                    rows.push(Row { root: de(p).sub(&ep(r)), terms: vec![t(eb(r), ob(p), 1), t(o(p), e(r), 1)] });
                }
            }
            if kind == ModelKind::OspOdd {
                for &r in &is {
                    rows.push(Row { root: ep(r), terms: vec![t(z, eb(r), 1), t(e(r), z, 2)] });
                    rows.push(Row { root: ep(r).neg(), terms: vec![t(z, e(r), 1), t(eb(r), z, 2)] });
                }
                for &p in &js {
                    rows.push(Row { root: de(p), terms: vec![t(z, ob(p), 1), t(o(p), z, -2)] });
                    rows.push(Row { root: de(p).neg(), terms: vec![t(z, o(p), 1), t(ob(p), z, 2)] });
                }
            }
        }
        ModelKind::Sl => {
            indices.extend(is.iter().map(|&i| e(i)));
            indices.extend(js.iter().map(|&j| o(j)));
            let (i0, j0) = (is[0], js[0]);
            let mut cands: Vec<SuperMatrix> = Vec::new();
            for &i in &is[1..] {
                cands.push(SuperMatrix::diagonal(&[(e(i), q(1)), (e(i0), q(-1))]));
            }
            for &j in &js[1..] {
                cands.push(SuperMatrix::diagonal(&[(o(j), q(1)), (o(j0), q(-1))]));
            }
            cands.push(SuperMatrix::diagonal(&[(e(i0), q(1)), (o(j0), q(1))]));
            let (_, at) = all_positions(&indices);
            let mut span = Span::new(indices.len() * indices.len());
            for c in cands {
                let c = sl_reduce(&c, quotient, &indices, j0);
                if span.insert(&c.flat(&at, indices.len() * indices.len()).unwrap()) {
                    cartan.push(c);
                }
            }
            for &i in &is {
                for &j in &is {
                    if i != j {
                        rows.push(Row { root: ep(i).sub(&ep(j)), terms: vec![t(e(i), e(j), 1)] });
                    }
                }
            }
            for &p in &js {
                for &qq in &js {
                    if p != qq {
                        rows.push(Row { root: de(p).sub(&de(qq)), terms: vec![t(o(qq), o(p), 1)] });
                    }
                }
            }
            for &i in &is {
                for &p in &js {
                    rows.push(Row { root: ep(i).add(&de(p)), terms: vec![t(e(i), o(p), 1)] });
                    rows.push(Row { root: ep(i).add(&de(p)).neg(), terms: vec![t(o(p), e(i), 1)] });
                }
            }
        }
    }

    let mut model = MatrixModel {
        kind,
        i_set: is.clone(),
        j_set: js.clone(),
        indices,
        q: qform,
        cartan,
        root_vectors: BTreeMap::new(),
        quotient_center: quotient,
        rootsys: RootSupersystem::new(basis.clone(), form.clone(), Vec::new(), None),
        form_scale: if kind == ModelKind::Sl { q(1) } else { qf(1, 2) },
        audit: Vec::new(),
    };
    for row in rows {
        let root = project(row.root.clone());
        let v = model.audited(&row, &root)?;
        model.root_vectors.entry(root).or_default().push(v);
    }
    let mut roots: Vec<LatticeVector> = vec![LatticeVector::zero(dim)];
    roots.extend(model.root_vectors.keys().cloned());
    let mut sys = RootSupersystem::new(basis, form, roots, descriptor);
    if let (Some(&i), Some(&j)) = (is.first(), js.first()) {
        sys.delta_star = Some(project(ep(i).add(&de(j))));
    }
    model.rootsys = sys;
    Ok(model)
}

/// Representative with zero coefficient on e_{j0,j0} modulo the identity.
fn sl_reduce(x: &SuperMatrix, quotient: bool, indices: &[SuperIndex], j0: u32) -> SuperMatrix {
    if !quotient {
        return x.clone();
    }
    let c = x.get(&SuperIndex::odd(j0), &SuperIndex::odd(j0));
    if c.is_zero() {
        return x.clone();
    }
    let id = SuperMatrix::diagonal(&indices.iter().map(|i| (*i, q(1))).collect::<Vec<_>>());
    let mut m = x.sub(&id.scale(&c));
    m.parity = x.parity;
    m
}

impl MatrixModel {
    pub fn dim(&self) -> usize {
        self.cartan.len() + self.root_vectors.values().map(|v| v.len()).sum::<usize>()
    }

    fn reduce(&self, x: &SuperMatrix) -> SuperMatrix {
        sl_reduce(x, self.quotient_center, &self.indices, self.j_set.first().copied().unwrap_or(0))
    }

    /// Value of the lattice functional `v` on a diagonal matrix.
    pub fn functional_on(&self, v: &LatticeVector, h: &SuperMatrix) -> Q {
        let mut total = Q::zero();
        for (k, c) in v.0.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let val = if k < self.i_set.len() {
                let i = SuperIndex::even(self.i_set[k]);
                h.get(&i, &i)
            } else {
                let j = SuperIndex::odd(self.j_set[k - self.i_set.len()]);
                let d = h.get(&j, &j);
                if self.kind == ModelKind::Sl {
                    -d
                } else {
                    d
                }
            };
            total += c * val;
        }
        total
    }

    fn index_weight(&self, i: &SuperIndex) -> LatticeVector {
        let dim = self.rootsys.dim();
        let ni = self.i_set.len();
        let (pos, sign) = match (i.parity, i.slot) {
            (_, Slot::Zero) => return LatticeVector::zero(dim),
            (Parity::Even, Slot::Plain(a)) => (self.i_set.iter().position(|&x| x == a).unwrap(), q(1)),
            (Parity::Even, Slot::Bar(a)) => (self.i_set.iter().position(|&x| x == a).unwrap(), q(-1)),
            (Parity::Odd, Slot::Plain(a)) => {
                let s = if self.kind == ModelKind::Sl { q(-1) } else { q(1) };
                (ni + self.j_set.iter().position(|&x| x == a).unwrap(), s)
            }
            (Parity::Odd, Slot::Bar(a)) => (ni + self.j_set.iter().position(|&x| x == a).unwrap(), q(-1)),
        };
        LatticeVector::unit(dim, pos, sign)
    }

    fn project(&self, v: LatticeVector) -> LatticeVector {
        if !self.quotient_center {
            return v;
        }
        let s: Q = v.0.iter().sum();
        let c = s / q(v.dim() as i64);
        LatticeVector(v.0.iter().map(|x| x - &c).collect())
    }

    /// Defining relation of the model: X^{st}Q = -QX, or str X = 0.
    pub fn satisfies_relation(&self, x: &SuperMatrix) -> bool {
        match &self.q {
            Some(qf) => defining_defect(x, &qf.matrix).is_zero(),
            None => x.str().is_zero(),
        }
    }

    fn weight_failure(&self, x: &SuperMatrix, root: &LatticeVector) -> Option<String> {
        for (k, h) in self.cartan.iter().enumerate() {
            let lhs = self.reduce(&h.bracket(x));
            let rhs = x.scale(&self.functional_on(root, h));
            if lhs.entries != rhs.entries {
                return Some(format!("weight equation fails against Cartan element {}", k));
            }
        }
        None
    }

    fn audited(&mut self, row: &Row, root: &LatticeVector) -> Result<SuperMatrix, RealizeError> {
        let label = self.rootsys.render(root);
        let printed = SuperMatrix::from_terms(&row.terms);
        let failure = match &printed {
            Err(_) => Some("not homogeneous".to_string()),
            Ok(x) if x.is_zero() => Some("zero matrix".to_string()),
            Ok(x) if !self.satisfies_relation(x) => Some("defining relation fails".to_string()),
            Ok(x) => self.weight_failure(x, root),
        };
        let Some(failure) = failure else { return Ok(printed.unwrap()) };
        // solve for the weight space over matrix units of the right weight
        let (list, at) = all_positions(&self.indices);
        let units: Vec<Pos> =
            list.iter().copied().filter(|(r, s)| r != s && self.project(self.index_weight(r).sub(&self.index_weight(s))) == *root).collect();
        let sols = match &self.q {
            Some(qf) => solve_on_units(&units, &at, list.len(), |x| defining_defect(x, &qf.matrix)),
            None => units.iter().map(|(r, s)| SuperMatrix::unit(*r, *s)).collect(),
        };
        if sols.len() != 1 {
            return Err(RealizeError::BadRow(label));
        }
        let (r0, s0, c0) = &row.terms[0];
        let at0 = sols[0].get(r0, s0);
        let x = if at0.is_zero() {
            let first = sols[0].entries.values().next().unwrap().clone();
            sols[0].scale(&first.recip())
        } else {
            sols[0].scale(&(c0 / at0))
        };
        if !self.satisfies_relation(&x) || self.weight_failure(&x, root).is_some() {
            return Err(RealizeError::BadRow(label));
        }
        let printed_s = match &printed {
            Ok(p) => p.render(),
            Err(_) => row.terms.iter().map(|(r, s, c)| format!("{}e[{},{}]", fmt_q(c), r, s)).collect::<Vec<_>>().join(" + "),
        };
        self.audit.push(RowAudit { root: label, printed: printed_s, failure, replacement: x.render() });
        Ok(x)
    }

    pub fn supertrace_form(&self, x: &SuperMatrix, y: &SuperMatrix) -> Q {
        x.mul(y).str()
    }

    /// Basis of the model: Cartan elements, then root vectors in the graded
    /// order of the roots.
    pub fn basis(&self) -> Vec<(GradedBasisElement, SuperMatrix)> {
        let mut out: Vec<(GradedBasisElement, SuperMatrix)> = self
            .cartan
            .iter()
            .enumerate()
            .map(|(k, h)| (GradedBasisElement { label: Label::Cartan(k), parity: Parity::Even }, h.clone()))
            .collect();
        for root in self.rootsys.nonzero() {
            for (slot, x) in self.root_vectors[root].iter().enumerate() {
                out.push((GradedBasisElement { label: Label::Root { root: root.clone(), slot: slot as u8 }, parity: x.parity }, x.clone()));
            }
        }
        out
    }

    fn coordinates(&self) -> Result<(Vec<(GradedBasisElement, SuperMatrix)>, Coordinates, HashMap<Pos, usize>, usize), RealizeError> {
        let basis = self.basis();
        let (list, at) = all_positions(&self.indices);
        let flat: Vec<Vec<Q>> = basis.iter().map(|(_, m)| m.flat(&at, list.len()).unwrap()).collect();
        let coords = Coordinates::new(&flat).ok_or_else(|| RealizeError::NotClosed("model basis is dependent".into()))?;
        Ok((basis, coords, at, list.len()))
    }

    /// Coordinates of a matrix of the model over `basis()`.
    pub fn coords_of(&self, x: &SuperMatrix) -> Result<Vec<Q>, RealizeError> {
        let (_, coords, at, len) = self.coordinates()?;
        let v = self.reduce(x).flat(&at, len).ok_or_else(|| RealizeError::NotClosed(x.render()))?;
        coords.coords(&v).ok_or_else(|| RealizeError::NotClosed(x.render()))
    }

    pub fn to_abstract(&self) -> Result<LieSuperalgebra, RealizeError> {
        let (basis, coords, at, len) = self.coordinates()?;
        let n = basis.len();
        let mut entries = Vec::new();
        let mut form = num::zeros(n, n);
        for (i, (_, x)) in basis.iter().enumerate() {
            for (j, (_, y)) in basis.iter().enumerate() {
                form[i][j] = &self.form_scale * self.supertrace_form(x, y);
                if j < i {
                    continue;
                }
                let b = self.reduce(&x.bracket(y));
                if b.is_zero() {
                    continue;
                }
                let c = b
                    .flat(&at, len)
                    .and_then(|v| coords.coords(&v))
                    .ok_or_else(|| RealizeError::NotClosed(format!("[{}, {}]", x.render(), y.render())))?;
                let s = -koszul(x.parity, y.parity);
                entries.push((j, i, c.iter().map(|v| v * &s).collect::<Vec<_>>()));
                entries.push((i, j, c));
            }
        }
        Ok(LieSuperalgebra::from_table(basis.into_iter().map(|(b, _)| b).collect(), entries, Some(form))?)
    }

    pub fn to_json(&self, with_algebra: bool) -> Result<Value, RealizeError> {
        let mut m = serde_json::Map::new();
        m.insert("schema".into(), json!("model.v1"));
        m.insert("kind".into(), json!(self.kind.name()));
        m.insert("I".into(), json!(self.i_set));
        m.insert("J".into(), json!(self.j_set));
        if with_algebra {
            m.insert("algebra".into(), self.to_abstract()?.to_json());
        }
        Ok(Value::Object(m))
    }

    pub fn from_json(v: &Value) -> Option<Result<MatrixModel, RealizeError>> {
        if v.get("schema")?.as_str()? != "model.v1" {
            return None;
        }
        let kind = ModelKind::from_name(v.get("kind")?.as_str()?)?;
        let set = |k: &str| -> Option<Vec<u32>> { v.get(k)?.as_array()?.iter().map(|x| x.as_u64().map(|y| y as u32)).collect() };
        Some(build_model(kind, &set("I")?, &set("J")?))
    }
}

// ---------------------------------------------------------------------------
// isomorphisms and embeddings

/// X -> T^{-1} X T between the algebras of two congruent forms.
#[derive(Clone, Debug)]
pub struct Congruence {
    pub t: SuperMatrix,
    pub t_inv: SuperMatrix,
    pub source_basis: Vec<SuperMatrix>,
    pub images: Vec<SuperMatrix>,
}

impl Congruence {
    pub fn apply(&self, x: &SuperMatrix) -> SuperMatrix {
        let mut m = self.t_inv.mul(x).mul(&self.t);
        m.parity = x.parity;
        m
    }
}

fn dense(x: &SuperMatrix, indices: &[SuperIndex]) -> Mat {
    indices.iter().map(|r| indices.iter().map(|s| x.get(r, s)).collect()).collect()
}

fn from_dense(m: &Mat, indices: &[SuperIndex]) -> SuperMatrix {
    let mut x = SuperMatrix::zero(Parity::Even);
    for (a, r) in indices.iter().enumerate() {
        for (b, s) in indices.iter().enumerate() {
            if !m[a][b].is_zero() {
                x.add_at((*r, *s), m[a][b].clone());
            }
        }
    }
    x
}

pub fn congruence_iso(
    q1: &SuperMatrix,
    q2: &SuperMatrix,
    t: &SuperMatrix,
    indices: &[SuperIndex],
) -> Result<Congruence, RealizeError> {
    let fail = |s: &str| Err(RealizeError::CongruenceFails(s.into()));
    if t.entries.keys().any(|(r, s)| pos_parity(r, s) != Parity::Even) {
        return fail("T is not even");
    }
    let Some(inv) = num::inverse(&dense(t, indices)) else { return fail("T is singular") };
    let t_inv = from_dense(&inv, indices);
    if t.supertranspose().mul(q1).mul(t).entries != q2.entries {
        return fail("T^st Q1 T differs from Q2");
    }
    let source_basis = orthosymplectic_kernel(q1, indices);
    let target_dim = orthosymplectic_kernel(q2, indices).len();
    if source_basis.len() != target_dim {
        return fail("kernels have different dimensions");
    }
    let c = Congruence { t: t.clone(), t_inv, source_basis: source_basis.clone(), images: Vec::new() };
    let images: Vec<SuperMatrix> = source_basis.iter().map(|x| c.apply(x)).collect();
    let (list, at) = all_positions(indices);
    let mut span = Span::new(list.len());
    for y in &images {
        if !defining_defect(y, q2).is_zero() {
            return fail("image leaves the target algebra");
        }
        if !span.insert(&y.flat(&at, list.len()).unwrap()) {
            return fail("images are dependent");
        }
    }
    for (a, x) in source_basis.iter().enumerate() {
        for (b, y) in source_basis.iter().enumerate() {
            if c.apply(&x.bracket(y)).entries != images[a].bracket(&images[b]).entries {
                return fail("bracket not preserved");
            }
        }
    }
    Ok(Congruence { images, ..c })
}

/// Permutation matrix P with P e_i = e_{eta(i)}; requires eta to be a
/// parity-preserving bijection of `indices`.
pub fn permutation_matrix(eta: &BTreeMap<SuperIndex, SuperIndex>, indices: &[SuperIndex]) -> Result<SuperMatrix, RealizeError> {
    let mut seen: Vec<SuperIndex> = Vec::new();
    let mut p = SuperMatrix::zero(Parity::Even);
    for i in indices {
        let j = eta.get(i).copied().unwrap_or(*i);
        if j.parity != i.parity || !indices.contains(&j) || seen.contains(&j) {
            return Err(RealizeError::BadIndexSets("eta is not a parity-preserving bijection".into()));
        }
        seen.push(j);
        p.add_at((j, *i), q(1));
    }
    Ok(p)
}

/// A^eta with A^eta_{ij} = A_{eta^{-1}(i), eta^{-1}(j)}.
pub fn reindex(x: &SuperMatrix, eta: &BTreeMap<SuperIndex, SuperIndex>) -> SuperMatrix {
    let f = |i: &SuperIndex| eta.get(i).copied().unwrap_or(*i);
    let mut m = SuperMatrix::zero(x.parity);
    for ((r, s), v) in &x.entries {
        m.add_at((f(r), f(s)), v.clone());
    }
    m
}

/// Reindexing as a congruence: T = P^{-1}, so that T^{-1} X T = X^eta.
pub fn reindex_iso(
    qm: &SuperMatrix,
    eta: &BTreeMap<SuperIndex, SuperIndex>,
    indices: &[SuperIndex],
) -> Result<Congruence, RealizeError> {
    let p = permutation_matrix(eta, indices)?;
    let p_inv = from_dense(&num::inverse(&dense(&p, indices)).unwrap(), indices);
    congruence_iso(qm, &reindex(qm, eta), &p_inv, indices)
}

fn symbol_map(small: &RootSupersystem, big: &RootSupersystem, v: &LatticeVector) -> Option<LatticeVector> {
    let mut out = LatticeVector::zero(big.dim());
    for (k, c) in v.0.iter().enumerate() {
        if c.is_zero() {
            continue;
        }
        let p = big.basis.iter().position(|b| *b == small.basis[k])?;
        out.0[p] = c.clone();
    }
    Some(out)
}

/// Index-inclusion map between models of the same kind, as a verified map
/// of abstract algebras.
pub fn embed(small: &MatrixModel, big: &MatrixModel) -> Result<AlgebraMap, RealizeError> {
    if small.kind != big.kind
        || !small.i_set.iter().all(|i| big.i_set.contains(i))
        || !small.j_set.iter().all(|j| big.j_set.contains(j))
    {
        return Err(RealizeError::NotSubset);
    }
    let same = small.i_set == big.i_set && small.j_set == big.j_set;
    if !same && (small.quotient_center || big.quotient_center) {
        return Err(RealizeError::BadIndexSets("central quotients do not embed by index inclusion".into()));
    }
    let src = small.to_abstract()?;
    let dst = big.to_abstract()?;
    let big_basis = big.basis();
    let mut m = num::zeros(dst.dim(), src.dim());
    for (j, (b, x)) in small.basis().iter().enumerate() {
        let c = big.coords_of(x)?;
        let allowed: Vec<usize> = match &b.label {
            Label::Cartan(_) => dst.cartan_indices(),
            Label::Root { root, .. } => {
                let image = symbol_map(&small.rootsys, &big.rootsys, root).ok_or(RealizeError::NotSubset)?;
                (0..big_basis.len()).filter(|&k| matches!(&big_basis[k].0.label, Label::Root { root: r, .. } if *r == image)).collect()
            }
        };
        for (i, v) in c.into_iter().enumerate() {
            if !v.is_zero() && !allowed.contains(&i) {
                return Err(RealizeError::NotClosed(format!("image of basis element {} leaves its space", j)));
            }
            m[i][j] = v;
        }
    }
    if num::rank(&m) != src.dim() {
        return Err(RealizeError::NotClosed("embedding is not injective".into()));
    }
    let map = AlgebraMap { source: src, target: dst, matrix: m, iso: same };
    if !map.verify().passed() {
        return Err(RealizeError::NotClosed("embedding does not preserve brackets".into()));
    }
    Ok(map)
}

// ---------------------------------------------------------------------------
// constants inside a model

/// Replays the Chevalley construction in the model: e_alpha is the first
/// table vector for positive roots that are not sums of extraspecial pairs,
/// N^{-1}[e_a, e_b] otherwise; e_{-alpha} is scaled so that
/// [e_alpha, e_{-alpha}] = r t_alpha; every constant is then read off.
pub fn extract_constants(
    model: &MatrixModel,
    order: &TotalOrder,
    seeds: &BTreeMap<(LatticeVector, LatticeVector), Q>,
    r_scale: &Q,
) -> Result<ConstantsTable, RealizeError> {
    let r = &model.rootsys;
    chevalley::reject_a11(r)?;
    let alg = model.to_abstract()?;
    let s = Signs::new(r, order)?;
    let pc = chevalley::pair_classes(&s);
    let extraspecial: HashMap<usize, (usize, usize)> = pc.by_sum.iter().map(|(c, ps)| (*c, ps[0])).collect();
    for (a, b) in seeds.keys() {
        let ok = s.idx(a).zip(s.idx(b)).map_or(false, |(x, y)| extraspecial.values().any(|&p| p == (x, y)));
        if !ok {
            return Err(ChevError::UnexpectedSeed(r.render(a), r.render(b)).into());
        }
    }
    let space = |i: usize| -> Result<usize, RealizeError> {
        match alg.root_space(s.root(i)).as_slice() {
            [k] => Ok(*k),
            _ => Err(ChevError::TypeA11Unsupported.into()),
        }
    };
    let mut ev: HashMap<usize, Vec<Q>> = HashMap::new();
    for a in s.positive_roots() {
        let v = match extraspecial.get(&a) {
            Some(&(g, d)) => {
                let seed = seeds
                    .get(&(s.root(g).clone(), s.root(d).clone()))
                    .ok_or_else(|| ChevError::SeedMissing(s.render(g), s.render(d)))?;
                if seed.is_zero() {
                    return Err(ChevError::ZeroSeed(s.render(g), s.render(d)).into());
                }
                let b = alg.bracket(&ev[&g], &ev[&d])?;
                if num::vec_is_zero(&b) {
                    return Err(RealizeError::ZeroBracket(format!("[e({}), e({})]", s.render(g), s.render(d))));
                }
                b.iter().map(|x| x / seed).collect()
            }
            None => alg.unit(space(a)?),
        };
        ev.insert(a, v);
    }
    for a in s.positive_roots() {
        let na = s.neg_of(a);
        let f = alg.unit(space(na)?);
        let t = alg.cartan_representative(&alg.weight_of(space(a)?)?)?;
        let h: Vec<Q> = t.iter().map(|x| x * r_scale).collect();
        let c = alg.bracket(&ev[&a], &f)?;
        let lambda = ratio(&c, &h).ok_or_else(|| RealizeError::ZeroBracket(format!("[e({}), e({})]", s.render(a), s.render(na))))?;
        ev.insert(na, f.iter().map(|x| x / &lambda).collect());
    }
    let mut n = BTreeMap::new();
    for a in s.nonzero() {
        for b in s.nonzero() {
            let br = alg.bracket(&ev[&a], &ev[&b])?;
            match s.sum_of(a, b) {
                Some(c) => {
                    let v = ratio(&br, &ev[&c])
                        .ok_or_else(|| RealizeError::ZeroBracket(format!("[e({}), e({})]", s.render(a), s.render(b))))?;
                    n.insert((s.root(a).clone(), s.root(b).clone()), v);
                }
                None if b != s.neg_of(a) && !num::vec_is_zero(&br) => {
                    return Err(RealizeError::NotClosed(format!("[e({}), e({})] should vanish", s.render(a), s.render(b))));
                }
                None => {}
            }
        }
    }
    Ok(ConstantsTable {
        order: order.clone(),
        r_scale: r_scale.clone(),
        seeds: seeds.clone(),
        n,
        base: rootsys::integral_base(r)?.roots,
        recursion_mismatches: Vec::new(),
    })
}

/// The scalar c with x = c y, if it exists and is nonzero.
fn ratio(x: &[Q], y: &[Q]) -> Option<Q> {
    let k = y.iter().position(|v| !v.is_zero())?;
    let c = &x[k] / &y[k];
    if c.is_zero() || x.iter().zip(y).any(|(a, b)| *a != &c * b) {
        return None;
    }
    Some(c)
}

/// Standard order, all seeds 1, r = 1.
pub fn default_extract(model: &MatrixModel) -> Result<ConstantsTable, RealizeError> {
    let order = TotalOrder::standard(&model.rootsys);
    let s = Signs::new(&model.rootsys, &order)?;
    let seeds = chevalley::uniform_seeds(&s, &q(1));
    extract_constants(model, &order, &seeds, &q(1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chevalley::{constants_from_seeds, default_constants};
    use crate::rootsys::build;

    fn osp_odd(m: &[u32], n: &[u32]) -> MatrixModel {
        build_model(ModelKind::OspOdd, m, n).unwrap()
    }

    #[test]
    fn supertranspose_signs() {
        let (i, j) = (SuperIndex::even(1), SuperIndex::odd(1));
        assert_eq!(SuperMatrix::unit(i, SuperIndex::even(2)).supertranspose(), SuperMatrix::unit(SuperIndex::even(2), i));
        // a_{ij} with |i| = 0, |j| = 1 goes to (j, i) unchanged; a_{ji} goes to (i, j) negated
        assert_eq!(SuperMatrix::unit(i, j).supertranspose(), SuperMatrix::unit(j, i));
        assert_eq!(SuperMatrix::unit(j, i).supertranspose(), SuperMatrix::unit(i, j).neg());
    }

    #[test]
    fn osp32_counts_and_form() {
        let m = osp_odd(&[1], &[1]);
        assert_eq!(m.dim(), 12);
        assert_eq!(m.rootsys.nonzero().count(), 10);
        assert!(m.audit.is_empty());
        let (h, d) = (&m.cartan[0], &m.cartan[1]);
        assert_eq!(m.supertrace_form(h, h), q(2));
        assert_eq!(m.supertrace_form(d, d), q(-2));
        assert_eq!(m.supertrace_form(h, d), q(0));
        assert_eq!(m.rootsys, build(&TypeDescriptor::new(Family::B1T, &[1, 1])).unwrap());
    }

    #[test]
    fn printed_typo_row_is_replaced() {
        let m = osp_odd(&[1], &[1, 2]);
        assert_eq!(m.audit.len(), 1, "{:?}", m.audit);
        assert_eq!(m.audit[0].root, "d1+d2");
        assert_eq!(m.audit[0].replacement, "e[j1,j2~] + e[j2,j1~]");
    }

    #[test]
    fn osp32_abstract() {
        let m = osp_odd(&[1], &[1]);
        let a = m.to_abstract().unwrap();
        assert!(a.jacobi_check().passed());
        assert!(a.form_check(None).passed());
        assert!(a.is_simple());
    }

    #[test]
    fn sl_quotient_dim() {
        let m = build_model(ModelKind::Sl, &[1, 2], &[1, 2]).unwrap();
        assert!(m.quotient_center);
        assert_eq!(m.dim(), 14);
        let two: Vec<usize> = m.root_vectors.values().map(|v| v.len()).filter(|&l| l == 2).collect();
        assert_eq!(two.len(), 4);
    }

    #[test]
    fn extract_matches_chevalley_osp32() {
        let m = osp_odd(&[1], &[1]);
        let t = default_extract(&m).unwrap();
        let c = default_constants(&m.rootsys).unwrap();
        assert_eq!(t.n, c.n);
    }

    #[test]
    fn extract_matches_chevalley_osp12_seed() {
        let m = osp_odd(&[], &[1]);
        let order = TotalOrder::standard(&m.rootsys);
        let s = Signs::new(&m.rootsys, &order).unwrap();
        let seeds = chevalley::uniform_seeds(&s, &qf(-5, 3));
        let t = extract_constants(&m, &order, &seeds, &q(1)).unwrap();
        let c = constants_from_seeds(&m.rootsys, &order, &seeds, &q(1)).unwrap();
        assert_eq!(t.n, c.n);
    }

    #[test]
    fn congruence_to_split_form() {
        let m = osp_odd(&[1, 2], &[1]);
        let qm = &m.q.as_ref().unwrap().matrix;
        let mut s = SuperMatrix::zero(Parity::Even);
        let mut qe = SuperMatrix::zero(Parity::Even);
        let z = SuperIndex::zero();
        s.add_at((z, z), q(1));
        qe.add_at((z, z), q(-2));
        for i in [1, 2] {
            let (a, b) = (SuperIndex::even(i), SuperIndex::even_bar(i));
            s.add_at((a, a), q(1));
            s.add_at((a, b), q(1));
            s.add_at((b, a), q(1));
            s.add_at((b, b), q(-1));
            qe.add_at((a, a), q(2));
            qe.add_at((b, b), q(-2));
        }
        let (o, ob) = (SuperIndex::odd(1), SuperIndex::odd_bar(1));
        s.add_at((o, o), q(1));
        s.add_at((ob, ob), q(1));
        qe.add_at((o, ob), q(1));
        qe.add_at((ob, o), q(-1));
        let c = congruence_iso(qm, &qe, &s, &m.indices).unwrap();
        assert_eq!(c.images.len(), m.dim());
        assert!(congruence_iso(qm, &qe, &SuperMatrix::diagonal(&m.indices.iter().map(|i| (*i, q(1))).collect::<Vec<_>>()), &m.indices).is_err());
    }

    #[test]
    fn reindexing() {
        let m = osp_odd(&[1, 2], &[1, 2]);
        let qm = &m.q.as_ref().unwrap().matrix;
        let eta: BTreeMap<SuperIndex, SuperIndex> = [
            (SuperIndex::even(1), SuperIndex::even_bar(2)),
            (SuperIndex::even_bar(2), SuperIndex::even(1)),
            (SuperIndex::odd(1), SuperIndex::odd(2)),
            (SuperIndex::odd(2), SuperIndex::odd(1)),
        ]
        .into_iter()
        .collect();
        let c = reindex_iso(qm, &eta, &m.indices).unwrap();
        for (x, y) in c.source_basis.iter().zip(&c.images) {
            assert_eq!(reindex(x, &eta), *y);
        }
        let bad: BTreeMap<SuperIndex, SuperIndex> =
            [(SuperIndex::even(1), SuperIndex::odd(1)), (SuperIndex::odd(1), SuperIndex::even(1))].into_iter().collect();
        assert!(reindex_iso(qm, &bad, &m.indices).is_err());
    }

    #[test]
    fn embedding_chain() {
        let a = osp_odd(&[1], &[1]);
        let b = osp_odd(&[1, 2], &[1]);
        let c = osp_odd(&[1, 2], &[1, 2]);
        let ab = embed(&a, &b).unwrap();
        let bc = embed(&b, &c).unwrap();
        let ac = embed(&a, &c).unwrap();
        assert_eq!(num::mat_mul(&bc.matrix, &ab.matrix), ac.matrix);
        assert!(embed(&c, &a).is_err());
    }

    #[test]
    fn bad_inputs() {
        assert_eq!(build_model(ModelKind::Sl, &[1, 2], &[]).unwrap_err(), RealizeError::EmptyOddPart);
        assert!(build_model(ModelKind::OspOdd, &[1, 1], &[1]).is_err());
        assert!(matches!(
            default_extract(&build_model(ModelKind::Sl, &[1, 2], &[1, 2]).unwrap()),
            Err(RealizeError::Chev(ChevError::TypeA11Unsupported))
        ));
    }
}
