//! Finite-rank root supersystems: construction from the classification
//! tables, axiom audits, Weyl orbits, partitions, recognition, integral
//! bases and isomorphisms.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::num::{self, fmt_q, q, qf, Coordinates, Mat, Span, Q};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RootError {
    #[error("invalid ranks for {family}: {ranks:?}")]
    InvalidRanks { family: String, ranks: Vec<u32> },
    #[error("invalid lambda {0} (must avoid 0 and -1)")]
    InvalidLambda(String),
    #[error("vector is not supported on the basis of this system")]
    UnknownSymbol,
    #[error("not a root: {0}")]
    NotARoot(String),
    #[error("cannot reflect in an isotropic vector")]
    NotReflectable,
    #[error("root string through {beta} along {alpha} is broken")]
    BrokenString { alpha: String, beta: String },
    #[error("no integral base found")]
    NoBaseFound,
    #[error("incompatible family in chain: {0}")]
    IncompatibleFamily(String),
    #[error("unrecognized root supersystem: {0}")]
    Unrecognized(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SymbolKind {
    Eps,
    Delta,
    AlphaStar,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisSymbol {
    pub kind: SymbolKind,
    /// 0 for the alpha-star symbol.
    pub index: u32,
}

impl BasisSymbol {
    pub fn eps(i: u32) -> Self {
        BasisSymbol { kind: SymbolKind::Eps, index: i }
    }
    pub fn delta(i: u32) -> Self {
        BasisSymbol { kind: SymbolKind::Delta, index: i }
    }
    pub fn alpha_star() -> Self {
        BasisSymbol { kind: SymbolKind::AlphaStar, index: 0 }
    }
}

impl fmt::Display for BasisSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SymbolKind::Eps => write!(f, "e{}", self.index),
            SymbolKind::Delta => write!(f, "d{}", self.index),
            SymbolKind::AlphaStar => write!(f, "a*"),
        }
    }
}

/// Exact coordinates over the ordered basis of the owning system.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LatticeVector(pub Vec<Q>);

impl LatticeVector {
    pub fn zero(n: usize) -> Self {
        LatticeVector(vec![Q::zero(); n])
    }

    pub fn unit(n: usize, i: usize, c: Q) -> Self {
        let mut v = Self::zero(n);
        v.0[i] = c;
        v
    }

    pub fn from_ints(xs: &[i64]) -> Self {
        LatticeVector(xs.iter().map(|&x| q(x)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|x| x.is_zero())
    }

    pub fn add(&self, o: &Self) -> Self {
        LatticeVector(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        LatticeVector(self.0.iter().zip(&o.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> Self {
        LatticeVector(self.0.iter().map(|a| -a).collect())
    }

    pub fn scale(&self, c: &Q) -> Self {
        LatticeVector(self.0.iter().map(|a| a * c).collect())
    }

    /// Plain coordinate dot product (not the root form).
    pub fn dot(&self, o: &Self) -> Q {
        num::dot(&self.0, &o.0)
    }

    /// Ordering used for all listings: by l1-norm, then lexicographically
    /// with larger leading coordinates first.
    pub fn graded_cmp(&self, o: &Self) -> Ordering {
        let n1: Q = self.0.iter().map(|x| x.abs()).sum();
        let n2: Q = o.0.iter().map(|x| x.abs()).sum();
        n1.cmp(&n2).then_with(|| o.0.cmp(&self.0))
    }

    pub fn render(&self, basis: &[BasisSymbol]) -> String {
        let mut s = String::new();
        for (c, b) in self.0.iter().zip(basis) {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if s.is_empty() {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { "-" } else { "+" });
            }
            let a = c.abs();
            if !a.is_one() {
                s.push_str(&a.to_string());
            }
            s.push_str(&b.to_string());
        }
        if s.is_empty() {
            "0".into()
        } else {
            s
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetricForm {
    pub gram: Mat,
}

impl SymmetricForm {
    pub fn diagonal(d: &[Q]) -> Self {
        let mut gram = num::zeros(d.len(), d.len());
        for (i, x) in d.iter().enumerate() {
            gram[i][i] = x.clone();
        }
        SymmetricForm { gram }
    }

    pub fn eval(&self, a: &LatticeVector, b: &LatticeVector) -> Q {
        let mut s = Q::zero();
        for (i, x) in a.0.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in b.0.iter().enumerate() {
                if y.is_zero() || self.gram[i][j].is_zero() {
                    continue;
                }
                s += x * y * &self.gram[i][j];
            }
        }
        s
    }

    pub fn scaled(&self, k: &Q) -> Self {
        SymmetricForm { gram: self.gram.iter().map(|r| r.iter().map(|x| x * k).collect()).collect() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    A,
    B,
    C,
    D,
    BC,
    ADot0,
    CDot0,
    ADotTT,
    All,
    B0,
    BTT,
    BCTT,
    CTT,
    DTT,
    B1T,
    C1T,
    D1T,
    BT1,
    AB13,
    G12,
    D21,
    D2T,
}

pub const ALL_FAMILIES: [Family; 22] = [
    Family::A,
    Family::B,
    Family::C,
    Family::D,
    Family::BC,
    Family::ADot0,
    Family::CDot0,
    Family::ADotTT,
    Family::All,
    Family::B0,
    Family::BTT,
    Family::BCTT,
    Family::CTT,
    Family::DTT,
    Family::B1T,
    Family::C1T,
    Family::D1T,
    Family::BT1,
    Family::AB13,
    Family::G12,
    Family::D21,
    Family::D2T,
];

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::A => "A",
            Family::B => "B",
            Family::C => "C",
            Family::D => "D",
            Family::BC => "BC",
            Family::ADot0 => "Adot(0,T)",
            Family::CDot0 => "Cdot(0,T)",
            Family::ADotTT => "Adot(T,T')",
            Family::All => "A(l,l)",
            Family::B0 => "B(0,T)",
            Family::BTT => "B(T,T')",
            Family::BCTT => "BC(T,T')",
            Family::CTT => "C(T,T')",
            Family::DTT => "D(T,T')",
            Family::B1T => "B(1,T)",
            Family::C1T => "C(1,T)",
            Family::D1T => "D(1,T)",
            Family::BT1 => "B(T,1)",
            Family::AB13 => "AB(1,3)",
            Family::G12 => "G(1,2)",
            Family::D21 => "D(2,1,lambda)",
            Family::D2T => "D(2,T)",
        }
    }

    pub fn from_name(s: &str) -> Option<Family> {
        ALL_FAMILIES.iter().copied().find(|f| f.name() == s)
    }

    pub fn is_imaginary(self) -> bool {
        matches!(self, Family::ADot0 | Family::CDot0 | Family::ADotTT)
    }

    /// Plain root systems carry no nonsingular roots.
    pub fn is_plain(self) -> bool {
        matches!(self, Family::A | Family::B | Family::C | Family::D | Family::BC | Family::B0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TypeDescriptor {
    pub family: Family,
    pub ranks: Vec<u32>,
    pub lambda: Option<Q>,
}

impl fmt::Display for TypeDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r: Vec<String> = self.ranks.iter().map(|x| x.to_string()).collect();
        write!(f, "{}[{}]", self.family.name(), r.join(","))?;
        if let Some(l) = &self.lambda {
            write!(f, " lambda={}", l)?;
        }
        Ok(())
    }
}

impl TypeDescriptor {
    pub fn new(family: Family, ranks: &[u32]) -> Self {
        TypeDescriptor { family, ranks: ranks.to_vec(), lambda: None }
    }

    pub fn d21(lambda: Q) -> Self {
        TypeDescriptor { family: Family::D21, ranks: vec![2, 1], lambda: Some(lambda) }
    }

    /// Descriptor for the orthosymplectic-style shorthand X(m,n), picking
    /// the table row that matches the ranks.
    pub fn super_mn(letter: &str, m: u32, n: u32) -> Result<Self, RootError> {
        let bad = || RootError::InvalidRanks { family: letter.to_string(), ranks: vec![m, n] };
        let d = match letter {
            "B" => match (m, n) {
                (0, n) if n >= 1 => Self::new(Family::B0, &[n]),
                (1, n) if n >= 1 => Self::new(Family::B1T, &[1, n]),
                (m, 1) if m >= 2 => Self::new(Family::BT1, &[m, 1]),
                (m, n) if m >= 2 && n >= 2 => Self::new(Family::BTT, &[m, n]),
                _ => return Err(bad()),
            },
            "D" => match (m, n) {
                (2, 1) => Self::d21(q(1)),
                (2, n) if n >= 2 => Self::new(Family::D2T, &[2, n]),
                (m, 1) if m >= 3 => Self::new(Family::D1T, &[1, m]),
                (m, n) if m >= 3 && n >= 2 => Self::new(Family::DTT, &[m, n]),
                _ => return Err(bad()),
            },
            "C" => match (m, n) {
                (1, n) if n >= 2 => Self::new(Family::C1T, &[1, n]),
                (m, n) if m >= 2 && n >= 2 => Self::new(Family::CTT, &[m, n]),
                _ => return Err(bad()),
            },
            "BC" => Self::new(Family::BCTT, &[m, n]),
            "A" => Self::new(Family::ADotTT, &[m, n]),
            _ => return Err(bad()),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn total_rank(&self) -> u32 {
        self.ranks.iter().sum()
    }

    pub fn validate(&self) -> Result<(), RootError> {
        let r = &self.ranks;
        let bad = || RootError::InvalidRanks { family: self.family.name().to_string(), ranks: r.clone() };
        let ok = match self.family {
            Family::A => r.len() == 1 && r[0] >= 1,
            Family::B | Family::C => r.len() == 1 && r[0] >= 2,
            Family::D => r.len() == 1 && r[0] >= 3,
            Family::BC | Family::B0 => r.len() == 1 && r[0] >= 1,
            Family::ADot0 | Family::CDot0 => r.len() == 1 && r[0] >= 2,
            Family::ADotTT => r.len() == 2 && r[0] >= 2 && r[1] >= 2,
            Family::All => r.len() == 1 && r[0] >= 1,
            Family::BTT | Family::CTT => r.len() == 2 && r[0] >= 2 && r[1] >= 2,
            Family::BCTT => {
                r.len() == 2 && ((r[0] == 1 && r[1] >= 1) || (r[0] >= 2 && r[1] >= 2))
            }
            Family::DTT => r.len() == 2 && r[0] >= 3 && r[1] >= 2,
            Family::B1T => r.len() == 2 && r[0] == 1 && r[1] >= 1,
            Family::C1T => r.len() == 2 && r[0] == 1 && r[1] >= 2,
            Family::D1T => r.len() == 2 && r[0] == 1 && r[1] >= 3,
            Family::BT1 => r.len() == 2 && r[0] >= 2 && r[1] == 1,
            Family::AB13 => r.as_slice() == [1, 3],
            Family::G12 => r.as_slice() == [1, 2],
            Family::D21 => r.as_slice() == [2, 1],
            Family::D2T => r.len() == 2 && r[0] == 2 && r[1] >= 2,
        };
        if !ok {
            return Err(bad());
        }
        match (&self.lambda, self.family) {
            (Some(l), Family::D21) => {
                if l.is_zero() || *l == q(-1) {
                    return Err(RootError::InvalidLambda(l.to_string()));
                }
            }
            (None, Family::D21) => return Err(RootError::InvalidLambda("missing".into())),
            (Some(_), _) => return Err(bad()),
            _ => {}
        }
        Ok(())
    }

    /// Representative of the descriptor up to the coincidences of the
    /// tables (symmetric rank pairs, B2 = C2, D3 = A3, the lambda orbit).
    pub fn canonical(&self) -> TypeDescriptor {
        let mut d = self.clone();
        match d.family {
            Family::C if d.ranks == [2] => d.family = Family::B,
            Family::D if d.ranks == [3] => {
                d.family = Family::A;
                d.ranks = vec![3];
            }
            Family::ADotTT => {
                if d.ranks[0] == d.ranks[1] {
                    d = TypeDescriptor::new(Family::All, &[d.ranks[0] - 1]);
                } else {
                    d.ranks.sort();
                }
            }
            Family::BCTT | Family::CTT => d.ranks.sort(),
            Family::D21 => {
                let l = d.lambda.clone().unwrap();
                d.lambda = Some(canonical_lambda(&l));
            }
            _ => {}
        }
        d
    }
}

/// Largest member of the orbit of lambda under the permutations of the
/// three component scalings (1, lambda, -1-lambda).
pub fn canonical_lambda(l: &Q) -> Q {
    let c = [q(1), l.clone(), -q(1) - l];
    let mut best: Option<Q> = None;
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                let r = &c[j] / &c[i];
                if best.as_ref().map_or(true, |b| r > *b) {
                    best = Some(r);
                }
            }
        }
    }
    best.unwrap()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RootKind {
    Real,
    Nonsingular,
    Zero,
}

#[derive(Clone, Debug)]
pub struct RootSupersystem {
    pub basis: Vec<BasisSymbol>,
    pub form: SymmetricForm,
    /// Includes zero; kept in graded order.
    pub roots: Vec<LatticeVector>,
    pub descriptor: Option<TypeDescriptor>,
    pub delta_star: Option<LatticeVector>,
    index: HashMap<LatticeVector, usize>,
}

impl PartialEq for RootSupersystem {
    fn eq(&self, o: &Self) -> bool {
        self.basis == o.basis && self.form == o.form && self.roots == o.roots
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RootString {
    pub p: u32,
    pub q: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub axiom: String,
    pub witness: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    pub checked: usize,
    pub violations: Vec<Violation>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn push(&mut self, axiom: &str, witness: String) {
        self.violations.push(Violation { axiom: axiom.to_string(), witness });
    }
}

impl RootSupersystem {
    pub fn new(
        basis: Vec<BasisSymbol>,
        form: SymmetricForm,
        roots: impl IntoIterator<Item = LatticeVector>,
        descriptor: Option<TypeDescriptor>,
    ) -> Self {
        let mut rs: Vec<LatticeVector> = roots.into_iter().collect::<HashSet<_>>().into_iter().collect();
        rs.sort_by(|a, b| a.graded_cmp(b));
        let index = rs.iter().cloned().enumerate().map(|(i, r)| (r, i)).collect();
        RootSupersystem { basis, form, roots: rs, descriptor, delta_star: None, index }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: &LatticeVector) -> bool {
        self.index.contains_key(v)
    }

    pub fn position(&self, v: &LatticeVector) -> Option<usize> {
        self.index.get(v).copied()
    }

    pub fn form_eval(&self, a: &LatticeVector, b: &LatticeVector) -> Result<Q, RootError> {
        if a.dim() != self.dim() || b.dim() != self.dim() {
            return Err(RootError::UnknownSymbol);
        }
        Ok(self.form.eval(a, b))
    }

    pub fn ip(&self, a: &LatticeVector, b: &LatticeVector) -> Q {
        self.form.eval(a, b)
    }

    pub fn norm(&self, a: &LatticeVector) -> Q {
        self.form.eval(a, a)
    }

    pub fn render(&self, v: &LatticeVector) -> String {
        v.render(&self.basis)
    }

    pub fn classify_root(&self, a: &LatticeVector) -> Result<RootKind, RootError> {
        if !self.contains(a) {
            return Err(RootError::NotARoot(self.render(a)));
        }
        Ok(self.kind_of(a))
    }

    pub fn kind_of(&self, a: &LatticeVector) -> RootKind {
        if a.is_zero() {
            RootKind::Zero
        } else if self.norm(a).is_zero() {
            RootKind::Nonsingular
        } else {
            RootKind::Real
        }
    }

    pub fn nonzero(&self) -> impl Iterator<Item = &LatticeVector> {
        self.roots.iter().filter(|r| !r.is_zero())
    }

    pub fn real_roots(&self) -> Vec<LatticeVector> {
        self.nonzero().filter(|r| !self.norm(r).is_zero()).cloned().collect()
    }

    pub fn nonsingular_roots(&self) -> Vec<LatticeVector> {
        self.nonzero().filter(|r| self.norm(r).is_zero()).cloned().collect()
    }

    pub fn reflect(&self, alpha: &LatticeVector, beta: &LatticeVector) -> Result<LatticeVector, RootError> {
        let n = self.norm(alpha);
        if n.is_zero() {
            return Err(RootError::NotReflectable);
        }
        let c = q(2) * self.ip(beta, alpha) / n;
        Ok(beta.sub(&alpha.scale(&c)))
    }

    pub fn weyl_orbit(&self, v: &LatticeVector) -> Vec<LatticeVector> {
        weyl_closure(&self.form, &self.real_roots(), v)
    }

    pub fn root_string(&self, alpha: &LatticeVector, beta: &LatticeVector) -> Result<RootString, RootError> {
        if alpha.is_zero() || self.norm(alpha).is_zero() {
            return Err(RootError::NotReflectable);
        }
        if !self.contains(beta) {
            return Err(RootError::NotARoot(self.render(beta)));
        }
        self.string_on_lines(&self.lines_along(alpha), alpha, beta)
    }

    /// Roots grouped by the line parallel to `alpha` they lie on, with
    /// their coefficient along `alpha`.
    fn lines_along(&self, alpha: &LatticeVector) -> HashMap<LatticeVector, Vec<Q>> {
        let i = alpha.0.iter().position(|x| !x.is_zero()).unwrap();
        let mut lines: HashMap<LatticeVector, Vec<Q>> = HashMap::new();
        for g in &self.roots {
            let c = &g.0[i] / &alpha.0[i];
            lines.entry(g.sub(&alpha.scale(&c))).or_default().push(c);
        }
        lines
    }

    fn string_on_lines(
        &self,
        lines: &HashMap<LatticeVector, Vec<Q>>,
        alpha: &LatticeVector,
        beta: &LatticeVector,
    ) -> Result<RootString, RootError> {
        let broken = || RootError::BrokenString { alpha: self.render(alpha), beta: self.render(beta) };
        let i = alpha.0.iter().position(|x| !x.is_zero()).unwrap();
        let cb = &beta.0[i] / &alpha.0[i];
        let line = &lines[&beta.sub(&alpha.scale(&cb))];
        let mut ks: Vec<i64> = line
            .iter()
            .map(|c| c - &cb)
            .filter(|k| k.is_integer())
            .map(|k| i64::try_from(k.to_integer()).unwrap_or(i64::MAX))
            .collect();
        ks.sort();
        // the integral offsets must form one run through 0
        let lo = ks[0];
        if ks.iter().enumerate().any(|(j, &k)| k != lo + j as i64) {
            return Err(broken());
        }
        let (p, qq) = ((-lo) as u32, *ks.last().unwrap() as u32);
        let c = q(2) * self.ip(beta, alpha) / self.norm(alpha);
        if c != q(p as i64 - qq as i64) {
            return Err(broken());
        }
        Ok(RootString { p, q: qq })
    }

    /// Dimension of the rational span of the roots.
    pub fn rank(&self) -> usize {
        let mut s = Span::new(self.dim());
        for r in &self.roots {
            s.insert(&r.0);
        }
        s.len()
    }

    pub fn span_basis(vs: &[LatticeVector], dim: usize) -> Vec<LatticeVector> {
        let mut s = Span::new(dim);
        let mut out = Vec::new();
        for v in vs {
            if s.insert(&v.0) {
                out.push(v.clone());
            }
        }
        out
    }

    pub fn form_nondegenerate_on_span(&self) -> bool {
        let b = Self::span_basis(&self.roots, self.dim());
        if b.is_empty() {
            return false;
        }
        let g: Mat = b.iter().map(|x| b.iter().map(|y| self.ip(x, y)).collect()).collect();
        !num::determinant(&g).is_zero()
    }

    pub fn check_axioms(&self) -> Report {
        let mut rep = Report::default();
        let zero = LatticeVector::zero(self.dim());
        // S1
        rep.checked += 1;
        if !self.contains(&zero) {
            rep.push("S1", "0 is not a root".into());
        }
        if self.nonzero().next().is_none() {
            rep.push("S1", "roots do not span a nonzero lattice".into());
        }
        rep.checked += 1;
        if !self.form_nondegenerate_on_span() {
            rep.push("form", "form is degenerate on the span of the roots".into());
        }
        // S2
        for r in &self.roots {
            rep.checked += 1;
            if !self.contains(&r.neg()) {
                rep.push("S2", format!("-({}) missing", self.render(r)));
            }
        }
        let real = self.real_roots();
        for a in &real {
            let na = self.norm(a);
            let lines = self.lines_along(a);
            for b in &self.roots {
                rep.checked += 1;
                let c = q(2) * self.ip(b, a) / &na;
                if !c.is_integer() {
                    rep.push("S3", format!("2({},{})/({},{}) = {}", self.render(b), self.render(a), self.render(a), self.render(a), c));
                    continue;
                }
                rep.checked += 1;
                if let Err(e) = self.string_on_lines(&lines, a, b) {
                    rep.push("S4", e.to_string());
                }
            }
        }
        for d in self.nonsingular_roots() {
            for b in &self.roots {
                if self.ip(&d, b).is_zero() {
                    continue;
                }
                rep.checked += 1;
                if !self.contains(&b.sub(&d)) && !self.contains(&b.add(&d)) {
                    rep.push("S5", format!("neither {} - {} nor {} + {} is a root", self.render(b), self.render(&d), self.render(b), self.render(&d)));
                }
            }
        }
        rep
    }

    /// Irreducible components of the nonzero real roots, ordered by the
    /// first basis position they touch.
    pub fn real_components(&self) -> Vec<Vec<LatticeVector>> {
        let real = self.real_roots();
        let comps = connected_components(&real, |a, b| !self.ip(a, b).is_zero());
        let mut out: Vec<Vec<LatticeVector>> =
            comps.into_iter().map(|c| c.into_iter().map(|i| real[i].clone()).collect()).collect();
        let first = |c: &Vec<LatticeVector>| {
            c.iter().filter_map(|r| r.0.iter().position(|x| !x.is_zero())).min().unwrap_or(usize::MAX)
        };
        out.sort_by_key(|c| first(c));
        out
    }

    pub fn is_irreducible(&self) -> bool {
        let nz: Vec<LatticeVector> = self.nonzero().cloned().collect();
        if nz.is_empty() {
            return false;
        }
        connected_components(&nz, |a, b| !self.ip(a, b).is_zero()).len() == 1
    }

    /// Partition into even and odd roots; zero is even.
    pub fn even_odd_partition(&self) -> (Vec<LatticeVector>, Vec<LatticeVector>) {
        let bc = self.descriptor.as_ref().map(|d| d.family) == Some(Family::BCTT);
        let mut even = Vec::new();
        let mut odd = Vec::new();
        if bc {
            let comps = self.real_components();
            let second_short: HashSet<LatticeVector> = comps
                .get(1)
                .map(|c| length_classes(self, c).short.into_iter().collect())
                .unwrap_or_default();
            for r in &self.roots {
                let real = r.is_zero() || !self.norm(r).is_zero();
                if real && !second_short.contains(r) {
                    even.push(r.clone());
                } else {
                    odd.push(r.clone());
                }
            }
        } else {
            for r in &self.roots {
                let is_even = r.is_zero() || (!self.norm(r).is_zero() && !self.contains(&r.scale(&q(2))));
                if is_even {
                    even.push(r.clone());
                } else {
                    odd.push(r.clone());
                }
            }
        }
        (even, odd)
    }

    pub fn parity_map(&self) -> HashMap<LatticeVector, u8> {
        let (even, odd) = self.even_odd_partition();
        even.into_iter().map(|r| (r, 0)).chain(odd.into_iter().map(|r| (r, 1))).collect()
    }

    pub fn with_form(&self, form: SymmetricForm) -> Self {
        let mut s = self.clone();
        s.form = form;
        s
    }

    pub fn without_root(&self, v: &LatticeVector) -> Self {
        let mut s = RootSupersystem::new(
            self.basis.clone(),
            self.form.clone(),
            self.roots.iter().filter(|r| *r != v).cloned(),
            self.descriptor.clone(),
        );
        s.delta_star = self.delta_star.clone();
        s
    }

    pub fn with_root(&self, v: &LatticeVector) -> Self {
        let mut s = RootSupersystem::new(
            self.basis.clone(),
            self.form.clone(),
            self.roots.iter().cloned().chain(std::iter::once(v.clone())),
            self.descriptor.clone(),
        );
        s.delta_star = self.delta_star.clone();
        s
    }
}

/// `v = k w` for a rational k, when such k exists.
pub fn multiple_of(v: &LatticeVector, w: &LatticeVector) -> Option<Q> {
    let i = w.0.iter().position(|x| !x.is_zero())?;
    let k = &v.0[i] / &w.0[i];
    if v.0.iter().zip(&w.0).all(|(a, b)| *a == &k * b) {
        Some(k)
    } else {
        None
    }
}

fn connected_components<T>(items: &[T], linked: impl Fn(&T, &T) -> bool) -> Vec<Vec<usize>> {
    let n = items.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut y = x;
        while p[y] != r {
            let nx = p[y];
            p[y] = r;
            y = nx;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if linked(&items[i], &items[j]) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[a] = b;
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}

pub fn weyl_closure(form: &SymmetricForm, real: &[LatticeVector], v: &LatticeVector) -> Vec<LatticeVector> {
    let gens: Vec<(LatticeVector, Q)> = real
        .iter()
        .filter(|a| !a.is_zero())
        .map(|a| (a.clone(), form.eval(a, a)))
        .filter(|(_, n)| !n.is_zero())
        .collect();
    let mut seen: HashSet<LatticeVector> = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(v.clone());
    queue.push_back(v.clone());
    while let Some(x) = queue.pop_front() {
        for (a, n) in &gens {
            let c = q(2) * form.eval(&x, a) / n;
            if c.is_zero() {
                continue;
            }
            let y = x.sub(&a.scale(&c));
            if seen.insert(y.clone()) {
                queue.push_back(y);
            }
        }
    }
    let mut out: Vec<LatticeVector> = seen.into_iter().collect();
    out.sort_by(|a, b| a.graded_cmp(b));
    out
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LengthClasses {
    pub short: Vec<LatticeVector>,
    pub long: Vec<LatticeVector>,
    pub extralong: Vec<LatticeVector>,
}

/// Length classes of one irreducible real component, after normalizing the
/// sign of the form on it.
pub fn length_classes(r: &RootSupersystem, comp: &[LatticeVector]) -> LengthClasses {
    let norms: Vec<Q> = comp.iter().map(|a| r.norm(a).abs()).collect();
    let mut out = LengthClasses::default();
    let Some(min) = norms.iter().min().cloned() else {
        return out;
    };
    let short: HashSet<LatticeVector> = comp.iter().zip(&norms).filter(|(_, n)| **n == min).map(|(a, _)| a.clone()).collect();
    for (a, n) in comp.iter().zip(&norms) {
        if *n == min {
            out.short.push(a.clone());
        } else if short.contains(&a.scale(&qf(1, 2))) {
            out.extralong.push(a.clone());
        } else {
            out.long.push(a.clone());
        }
    }
    out
}

// ---------------------------------------------------------------------------
// construction

struct Builder {
    basis: Vec<BasisSymbol>,
    gram: Mat,
}

impl Builder {
    fn eps_delta(m: usize, n: usize) -> Self {
        let mut basis = Vec::new();
        let mut diag = Vec::new();
        for i in 1..=m {
            basis.push(BasisSymbol::eps(i as u32));
            diag.push(q(1));
        }
        for j in 1..=n {
            basis.push(BasisSymbol::delta(j as u32));
            diag.push(q(-1));
        }
        Builder { basis, gram: SymmetricForm::diagonal(&diag).gram }
    }

    fn dim(&self) -> usize {
        self.basis.len()
    }

    fn e(&self, i: usize) -> LatticeVector {
        LatticeVector::unit(self.dim(), i, q(1))
    }

    fn comb(&self, terms: &[(usize, Q)]) -> LatticeVector {
        let mut v = LatticeVector::zero(self.dim());
        for (i, c) in terms {
            v.0[*i] += c;
        }
        v
    }
}

fn roots_a(b: &Builder, pos: &[usize]) -> Vec<LatticeVector> {
    let mut out = Vec::new();
    for &i in pos {
        for &j in pos {
            if i != j {
                out.push(b.e(i).sub(&b.e(j)));
            }
        }
    }
    out
}

fn roots_d(b: &Builder, pos: &[usize]) -> Vec<LatticeVector> {
    let mut out = Vec::new();
    for (x, &i) in pos.iter().enumerate() {
        for &j in &pos[x + 1..] {
            for s in [1, -1] {
                for t in [1, -1] {
                    out.push(b.comb(&[(i, q(s)), (j, q(t))]));
                }
            }
        }
    }
    out
}

fn roots_short(b: &Builder, pos: &[usize]) -> Vec<LatticeVector> {
    pos.iter().flat_map(|&i| [b.e(i), b.e(i).neg()]).collect()
}

fn roots_double(b: &Builder, pos: &[usize]) -> Vec<LatticeVector> {
    pos.iter().flat_map(|&i| [b.e(i).scale(&q(2)), b.e(i).scale(&q(-2))]).collect()
}

fn roots_b(b: &Builder, pos: &[usize]) -> Vec<LatticeVector> {
    let mut v = roots_d(b, pos);
    v.extend(roots_short(b, pos));
    v
}

fn roots_c(b: &Builder, pos: &[usize]) -> Vec<LatticeVector> {
    let mut v = roots_d(b, pos);
    v.extend(roots_double(b, pos));
    v
}

fn roots_bc(b: &Builder, pos: &[usize]) -> Vec<LatticeVector> {
    let mut v = roots_b(b, pos);
    v.extend(roots_double(b, pos));
    v
}

fn range(a: usize, n: usize) -> Vec<usize> {
    (a..a + n).collect()
}

pub fn build(d: &TypeDescriptor) -> Result<RootSupersystem, RootError> {
    d.validate()?;
    let r: Vec<usize> = d.ranks.iter().map(|&x| x as usize).collect();
    // (builder, real roots, seed of the nonsingular orbit, symmetric closure)
    let (b, real, seed, pm): (Builder, Vec<LatticeVector>, Option<LatticeVector>, bool) = match d.family {
        Family::A => {
            let b = Builder::eps_delta(r[0] + 1, 0);
            let real = roots_a(&b, &range(0, r[0] + 1));
            (b, real, None, false)
        }
        Family::B | Family::C | Family::D | Family::BC => {
            let b = Builder::eps_delta(r[0], 0);
            let p = range(0, r[0]);
            let real = match d.family {
                Family::B => roots_b(&b, &p),
                Family::C => roots_c(&b, &p),
                Family::D => roots_d(&b, &p),
                _ => roots_bc(&b, &p),
            };
            (b, real, None, false)
        }
        Family::B0 => {
            let b = Builder::eps_delta(0, r[0]);
            let real = roots_bc(&b, &range(0, r[0]));
            (b, real, None, false)
        }
        Family::ADot0 | Family::CDot0 => {
            let mut b = Builder::eps_delta(r[0], 0);
            let n = r[0];
            b.basis.push(BasisSymbol::alpha_star());
            for row in b.gram.iter_mut() {
                row.push(Q::zero());
            }
            b.gram.push(vec![Q::zero(); n + 1]);
            b.gram[n][0] = q(1);
            b.gram[0][n] = q(1);
            let p = range(0, n);
            let real = if d.family == Family::ADot0 { roots_a(&b, &p) } else { roots_c(&b, &p) };
            let seed = b.e(n);
            (b, real, Some(seed), true)
        }
        Family::ADotTT if r[0] == r[1] => {
            let mut s = build(&TypeDescriptor::new(Family::All, &[d.ranks[0] - 1]))?;
            s.descriptor = Some(TypeDescriptor::new(Family::All, &[d.ranks[0] - 1]));
            return Ok(s);
        }
        Family::ADotTT => {
            let (m, n) = (r[0], r[1]);
            let mut b = Builder::eps_delta(m, n);
            let k = m + n;
            b.basis.push(BasisSymbol::alpha_star());
            for row in b.gram.iter_mut() {
                row.push(Q::zero());
            }
            b.gram.push(vec![Q::zero(); k + 1]);
            for t in [0, m] {
                b.gram[k][t] = q(1);
                b.gram[t][k] = q(1);
            }
            let mut real = roots_a(&b, &range(0, m));
            real.extend(roots_a(&b, &range(m, n)));
            let seed = b.e(k);
            (b, real, Some(seed), true)
        }
        Family::All => {
            let l = r[0] + 1;
            let b = Builder::eps_delta(l, l);
            let mut real = roots_a(&b, &range(0, l));
            real.extend(roots_a(&b, &range(l, l)));
            let avg = qf(1, l as i64);
            let mut terms = vec![(0, q(1)), (l, q(1))];
            for i in 0..2 * l {
                terms.push((i, -avg.clone()));
            }
            let seed = b.comb(&terms);
            (b, real, Some(seed), true)
        }
        Family::BTT | Family::BCTT | Family::CTT | Family::DTT => {
            let (m, n) = (r[0], r[1]);
            let b = Builder::eps_delta(m, n);
            let (p1, p2) = (range(0, m), range(m, n));
            let mut real = match d.family {
                Family::BTT => roots_b(&b, &p1),
                Family::BCTT => roots_bc(&b, &p1),
                Family::CTT => roots_c(&b, &p1),
                _ => roots_d(&b, &p1),
            };
            real.extend(match d.family {
                Family::BTT | Family::BCTT => roots_bc(&b, &p2),
                _ => roots_c(&b, &p2),
            });
            let seed = b.e(0).add(&b.e(m));
            (b, real, Some(seed), false)
        }
        Family::B1T | Family::C1T => {
            let n = r[1];
            let b = Builder::eps_delta(1, n);
            let p2 = range(1, n);
            let mut real = if d.family == Family::B1T { roots_short(&b, &[0]) } else { roots_double(&b, &[0]) };
            real.extend(if d.family == Family::B1T { roots_bc(&b, &p2) } else { roots_c(&b, &p2) });
            let seed = b.e(0).add(&b.e(1));
            (b, real, Some(seed), false)
        }
        Family::D1T => {
            // sp(2) on the single delta, D on the epsilons
            let n = r[1];
            let b = Builder::eps_delta(n, 1);
            let mut real = roots_d(&b, &range(0, n));
            real.extend(roots_double(&b, &[n]));
            let seed = b.e(0).add(&b.e(n));
            (b, real, Some(seed), false)
        }
        Family::BT1 => {
            let m = r[0];
            let b = Builder::eps_delta(m, 1);
            let mut real = roots_b(&b, &range(0, m));
            real.extend(roots_bc(&b, &[m]));
            let seed = b.e(0).add(&b.e(m));
            (b, real, Some(seed), false)
        }
        Family::D2T => {
            let n = r[1];
            let b = Builder::eps_delta(2, n);
            let mut real = roots_d(&b, &[0, 1]);
            real.extend(roots_c(&b, &range(2, n)));
            let seed = b.e(0).add(&b.e(2));
            (b, real, Some(seed), false)
        }
        Family::D21 => {
            let l = d.lambda.clone().unwrap();
            let mut b = Builder::eps_delta(3, 0);
            b.gram = SymmetricForm::diagonal(&[q(1), l.clone(), -q(1) - l]).gram;
            let real = roots_double(&b, &[0, 1, 2]);
            let seed = b.comb(&[(0, q(1)), (1, q(1)), (2, q(1))]);
            (b, real, Some(seed), false)
        }
        Family::AB13 => {
            let mut b = Builder::eps_delta(3, 1);
            b.gram[3][3] = qf(-3, 4);
            let mut real = roots_b(&b, &[0, 1, 2]);
            real.extend(roots_double(&b, &[3]));
            let h = qf(1, 2);
            let seed = b.comb(&[(3, q(1)), (0, h.clone()), (1, h.clone()), (2, h)]);
            (b, real, Some(seed), false)
        }
        Family::G12 => {
            let mut b = Builder::eps_delta(3, 1);
            b.gram[3][3] = q(-2);
            let mut real = Vec::new();
            for i in 0..3 {
                for j in 0..3 {
                    if i != j {
                        real.push(b.e(i).sub(&b.e(j)));
                    }
                }
                let k: Vec<usize> = (0..3).filter(|&x| x != i).collect();
                let long = b.comb(&[(i, q(2)), (k[0], q(-1)), (k[1], q(-1))]);
                real.push(long.neg());
                real.push(long);
            }
            real.extend(roots_bc(&b, &[3]));
            let seed = b.comb(&[(3, q(1)), (1, q(-1)), (2, q(1))]);
            (b, real, Some(seed), false)
        }
    };
    let form = SymmetricForm { gram: b.gram.clone() };
    let mut all: Vec<LatticeVector> = vec![LatticeVector::zero(b.dim())];
    all.extend(real.iter().cloned());
    if let Some(s) = &seed {
        let orbit = weyl_closure(&form, &real, s);
        if pm {
            all.extend(orbit.iter().map(|v| v.neg()));
        }
        all.extend(orbit);
    }
    let mut sys = RootSupersystem::new(b.basis, form, all, Some(d.clone()));
    sys.delta_star = seed;
    Ok(sys)
}

/// Every descriptor this crate builds with total rank at most `max_total`
/// (the lambda family is excluded; it needs an explicit parameter).
pub fn supported_descriptors(max_total: u32) -> Vec<TypeDescriptor> {
    let mut out = Vec::new();
    for f in ALL_FAMILIES {
        if f == Family::D21 {
            continue;
        }
        for a in 0..=max_total {
            let single = TypeDescriptor::new(f, &[a]);
            if a >= 1 && single.validate().is_ok() && single.total_rank() <= max_total {
                out.push(single);
            }
            for bb in 0..=max_total {
                let pair = TypeDescriptor::new(f, &[a, bb]);
                if a + bb <= max_total && pair.validate().is_ok() {
                    out.push(pair);
                }
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// recognition

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum CompKind {
    A,
    B,
    C,
    D,
    BC,
    G2,
    /// Two root lengths, rank 2, 8 roots: both B2 and C2.
    B2C2,
    Other,
}

#[derive(Clone, Debug)]
pub struct Component {
    pub kind: CompKind,
    pub rank: usize,
    pub roots: Vec<LatticeVector>,
}

impl Component {
    fn is(&self, k: CompKind, rank: Option<usize>) -> bool {
        let rank_ok = rank.map_or(true, |r| r == self.rank);
        let kind_ok = self.kind == k
            || (self.kind == CompKind::B2C2 && matches!(k, CompKind::B | CompKind::C))
            || (k == CompKind::D && self.kind == CompKind::A && self.rank == 3);
        kind_ok && rank_ok
    }
}

pub fn classify_component(r: &RootSupersystem, comp: &[LatticeVector]) -> Component {
    let rank = RootSupersystem::span_basis(comp, r.dim()).len();
    let n = comp.len();
    let lc = length_classes(r, comp);
    let kind = if !lc.extralong.is_empty() {
        if n == 2 * rank * rank + 2 * rank {
            CompKind::BC
        } else {
            CompKind::Other
        }
    } else if lc.long.is_empty() {
        if n == rank * (rank + 1) {
            CompKind::A
        } else if rank >= 4 && n == 2 * rank * (rank - 1) {
            CompKind::D
        } else {
            CompKind::Other
        }
    } else if rank == 2 && n == 8 {
        CompKind::B2C2
    } else if rank == 2 && n == 12 {
        CompKind::G2
    } else if n == 2 * rank * rank && lc.short.len() == 2 * rank {
        CompKind::B
    } else if n == 2 * rank * rank && lc.short.len() == 2 * rank * (rank - 1) {
        CompKind::C
    } else {
        CompKind::Other
    };
    Component { kind, rank, roots: comp.to_vec() }
}

pub fn recognize(r: &RootSupersystem) -> Result<TypeDescriptor, RootError> {
    let un = |m: &str| RootError::Unrecognized(m.to_string());
    if !r.is_irreducible() {
        return Err(un("not irreducible"));
    }
    let comps: Vec<Component> = r.real_components().iter().map(|c| classify_component(r, c)).collect();
    if comps.iter().any(|c| c.kind == CompKind::Other) {
        return Err(un("real component outside the supported list"));
    }
    let ns = r.nonsingular_roots();
    let td = |f: Family, rk: &[usize]| {
        TypeDescriptor::new(f, &rk.iter().map(|&x| x as u32).collect::<Vec<_>>())
    };
    if ns.is_empty() {
        if comps.len() != 1 {
            return Err(un("reducible real part"));
        }
        let c = &comps[0];
        let negative = r.norm(&c.roots[0]).is_negative();
        let d = match c.kind {
            CompKind::A => td(Family::A, &[c.rank]),
            CompKind::B | CompKind::B2C2 => td(Family::B, &[c.rank]),
            CompKind::C => td(Family::C, &[c.rank]),
            CompKind::D => td(Family::D, &[c.rank]),
            CompKind::BC if negative => td(Family::B0, &[c.rank]),
            CompKind::BC => td(Family::BC, &[c.rank]),
            _ => return Err(un("unsupported plain root system")),
        };
        return Ok(d.canonical());
    }
    let real_rank = RootSupersystem::span_basis(&r.real_roots(), r.dim()).len();
    if real_rank < r.rank() {
        let d = match comps.as_slice() {
            [c] if c.kind == CompKind::A => td(Family::ADot0, &[c.rank + 1]),
            [c] if c.is(CompKind::C, None) => td(Family::CDot0, &[c.rank]),
            [a, b] if a.kind == CompKind::A && b.kind == CompKind::A || a.is(CompKind::A, None) && b.is(CompKind::A, None) => {
                td(Family::ADotTT, &[a.rank + 1, b.rank + 1])
            }
            _ => return Err(un("imaginary type with unexpected real part")),
        };
        return Ok(d.canonical());
    }
    let mut cs: Vec<&Component> = comps.iter().collect();
    let d = match cs.len() {
        3 => {
            cs.sort_by_key(|c| (c.rank, c.kind));
            if cs.iter().all(|c| c.is(CompKind::A, Some(1))) {
                let norms: Vec<Q> = cs.iter().map(|c| r.norm(&c.roots[0])).collect();
                let l = &norms[1] / &norms[0];
                TypeDescriptor::d21(canonical_lambda(&l))
            } else if cs[0].is(CompKind::A, Some(1)) && cs[1].is(CompKind::A, Some(1)) && cs[2].is(CompKind::C, None) && cs[2].rank >= 2 {
                td(Family::D2T, &[2, cs[2].rank])
            } else {
                return Err(un("three real components outside the tables"));
            }
        }
        2 => {
            let (x, y) = (cs[0], cs[1]);
            let pick = |p: &dyn Fn(&Component, &Component) -> bool| -> Option<(&Component, &Component)> {
                if p(x, y) {
                    Some((x, y))
                } else if p(y, x) {
                    Some((y, x))
                } else {
                    None
                }
            };
            let a1 = |c: &Component| c.kind == CompKind::A && c.rank == 1;
            let bc1 = |c: &Component| c.kind == CompKind::BC && c.rank == 1;
            if x.kind == CompKind::A && y.kind == CompKind::A && x.rank == y.rank {
                td(Family::All, &[x.rank])
            } else if let Some((_, b)) = pick(&|a, b| a1(a) && b.kind == CompKind::BC) {
                td(Family::B1T, &[1, b.rank])
            } else if pick(&|a, b| a1(a) && b.kind == CompKind::B && b.rank == 3).is_some() {
                td(Family::AB13, &[1, 3])
            } else if let Some((_, b)) = pick(&|a, b| a1(a) && b.is(CompKind::C, None) && b.rank >= 2) {
                td(Family::C1T, &[1, b.rank])
            } else if let Some((_, b)) = pick(&|a, b| a1(a) && b.is(CompKind::D, None) && b.rank >= 3) {
                td(Family::D1T, &[1, b.rank])
            } else if pick(&|a, b| bc1(a) && b.kind == CompKind::G2).is_some() {
                td(Family::G12, &[1, 2])
            } else if let Some((_, b)) = pick(&|a, b| bc1(a) && b.is(CompKind::B, None) && b.rank >= 2) {
                td(Family::BT1, &[b.rank, 1])
            } else if x.kind == CompKind::BC && y.kind == CompKind::BC {
                let mut rk = [x.rank, y.rank];
                rk.sort();
                td(Family::BCTT, &rk)
            } else if let Some((a, b)) = pick(&|a, b| a.is(CompKind::B, None) && a.rank >= 2 && b.kind == CompKind::BC && b.rank >= 2) {
                td(Family::BTT, &[a.rank, b.rank])
            } else if let Some((a, b)) = pick(&|a, b| a.is(CompKind::D, None) && a.rank >= 3 && b.is(CompKind::C, None) && b.rank >= 2) {
                td(Family::DTT, &[a.rank, b.rank])
            } else if x.is(CompKind::C, None) && y.is(CompKind::C, None) && x.rank >= 2 && y.rank >= 2 {
                td(Family::CTT, &[x.rank, y.rank])
            } else {
                return Err(un("two real components outside the tables"));
            }
        }
        _ => return Err(un("unexpected number of real components")),
    };
    Ok(d.canonical())
}

/// Key identifying the isomorphism class (forms may differ by a scalar).
fn iso_class_key(d: &TypeDescriptor) -> TypeDescriptor {
    let mut c = d.canonical();
    if c.family == Family::B0 {
        c.family = Family::BC;
    }
    c
}

// ---------------------------------------------------------------------------
// integral bases

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegralBase {
    pub roots: Vec<LatticeVector>,
    /// False when the partial sum property was not checked (A(l,l)).
    pub partial_sum_checked: bool,
}

pub fn is_lattice_basis(r: &RootSupersystem, pi: &[LatticeVector]) -> bool {
    let basis: Vec<Vec<Q>> = pi.iter().map(|v| v.0.clone()).collect();
    let Some(c) = Coordinates::new(&basis) else {
        return false;
    };
    r.roots.iter().all(|v| c.coords(&v.0).map_or(false, |x| x.iter().all(|y| y.is_integer())))
}

pub fn partial_sum_property(r: &RootSupersystem, pi: &[LatticeVector]) -> bool {
    let target: HashSet<LatticeVector> = r.nonzero().cloned().collect();
    let mut seen: HashSet<LatticeVector> = HashSet::new();
    let mut queue = VecDeque::new();
    for p in pi {
        for v in [p.clone(), p.neg()] {
            if target.contains(&v) && seen.insert(v.clone()) {
                queue.push_back(v);
            }
        }
    }
    while let Some(x) = queue.pop_front() {
        for p in pi {
            for y in [x.add(p), x.sub(p)] {
                if target.contains(&y) && seen.insert(y.clone()) {
                    queue.push_back(y);
                }
            }
        }
    }
    seen.len() == target.len()
}

fn is_positive_lex(v: &LatticeVector) -> bool {
    v.0.iter().find(|x| !x.is_zero()).map_or(false, |x| x.is_positive())
}

pub fn integral_base(r: &RootSupersystem) -> Result<IntegralBase, RootError> {
    let check_ps = r.descriptor.as_ref().map(|d| d.family) != Some(Family::All);
    let rank = r.rank();
    let pos: Vec<LatticeVector> = r.nonzero().filter(|v| is_positive_lex(v)).cloned().collect();
    let posset: HashSet<&LatticeVector> = pos.iter().collect();
    let decomposable = |v: &LatticeVector| pos.iter().any(|a| a != v && posset.contains(&v.sub(a)));
    let mut cands: Vec<LatticeVector> = pos.iter().filter(|v| !decomposable(v)).cloned().collect();
    cands.extend(pos.iter().filter(|v| decomposable(v)).cloned());
    let mut budget: u64 = 2_000_000;
    let mut chosen: Vec<usize> = Vec::new();
    fn dfs(
        r: &RootSupersystem,
        cands: &[LatticeVector],
        start: usize,
        rank: usize,
        chosen: &mut Vec<usize>,
        span: &Span,
        budget: &mut u64,
        check_ps: bool,
    ) -> Option<Vec<LatticeVector>> {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        if chosen.len() == rank {
            let pi: Vec<LatticeVector> = chosen.iter().map(|&i| cands[i].clone()).collect();
            if is_lattice_basis(r, &pi) && (!check_ps || partial_sum_property(r, &pi)) {
                return Some(pi);
            }
            return None;
        }
        for i in start..cands.len() {
            let mut s = span.clone();
            if !s.insert(&cands[i].0) {
                continue;
            }
            chosen.push(i);
            if let Some(p) = dfs(r, cands, i + 1, rank, chosen, &s, budget, check_ps) {
                return Some(p);
            }
            chosen.pop();
        }
        None
    }
    let span = Span::new(r.dim());
    match dfs(r, &cands, 0, rank, &mut chosen, &span, &mut budget, check_ps) {
        Some(roots) => Ok(IntegralBase { roots, partial_sum_checked: check_ps }),
        None => Err(RootError::NoBaseFound),
    }
}

// ---------------------------------------------------------------------------
// direct unions

/// Maps each vector of `small` into the coordinates of `big` by symbol.
pub fn embed_vector(small: &RootSupersystem, big: &RootSupersystem, v: &LatticeVector) -> Option<LatticeVector> {
    let mut out = LatticeVector::zero(big.dim());
    for (c, s) in v.0.iter().zip(&small.basis) {
        if c.is_zero() {
            continue;
        }
        let j = big.basis.iter().position(|b| b == s)?;
        out.0[j] = c.clone();
    }
    Some(out)
}

fn letter(f: Family) -> &'static str {
    match f {
        Family::B0 | Family::B1T | Family::BT1 | Family::BTT => "B",
        Family::D1T | Family::D2T | Family::DTT | Family::D21 => "D",
        Family::C1T | Family::CTT => "C",
        other => other.name(),
    }
}

#[derive(Clone, Debug)]
pub struct ChainLink {
    pub system: RootSupersystem,
    /// Images of the previous system's roots (empty for the first link).
    pub inclusion: Vec<(LatticeVector, LatticeVector)>,
}

pub fn direct_union_chain(descs: &[TypeDescriptor]) -> Result<Vec<ChainLink>, RootError> {
    let mut out: Vec<ChainLink> = Vec::new();
    for (i, d) in descs.iter().enumerate() {
        let sys = build(d)?;
        let mut inclusion = Vec::new();
        if i > 0 {
            let prev = &descs[i - 1];
            if letter(prev.family) != letter(d.family) {
                return Err(RootError::IncompatibleFamily(format!("{} then {}", prev, d)));
            }
            let grows = prev.ranks.len() == d.ranks.len()
                && prev.ranks.iter().zip(&d.ranks).all(|(a, b)| a <= b)
                && prev.ranks != d.ranks;
            let pm = &out[i - 1].system;
            if !grows && pm.dim() >= sys.dim() {
                return Err(RootError::IncompatibleFamily(format!("ranks do not increase: {} then {}", prev, d)));
            }
            for r in &pm.roots {
                let img = embed_vector(pm, &sys, r)
                    .ok_or_else(|| RootError::IncompatibleFamily("missing symbol".into()))?;
                if !sys.contains(&img) {
                    return Err(RootError::IncompatibleFamily(format!("{} is not a root of {}", pm.render(r), d)));
                }
                inclusion.push((r.clone(), img));
            }
            // forms agree on shared symbols
            for (a, ia) in &inclusion {
                for (b, ib) in &inclusion {
                    if pm.ip(a, b) != sys.ip(ia, ib) {
                        return Err(RootError::IncompatibleFamily("forms disagree".into()));
                    }
                }
            }
        }
        out.push(ChainLink { system: sys, inclusion });
    }
    Ok(out)
}

/// Image of each link closed under root addition inside the next system.
pub fn chain_images_closed(chain: &[ChainLink]) -> bool {
    chain.iter().skip(1).all(|link| {
        let img: HashSet<&LatticeVector> = link.inclusion.iter().map(|(_, b)| b).collect();
        img.iter().all(|a| {
            img.iter().all(|b| {
                let s = a.add(b);
                !link.system.contains(&s) || img.contains(&s)
            })
        })
    })
}

// ---------------------------------------------------------------------------
// isomorphisms

#[derive(Clone, Debug)]
pub struct RootIso {
    /// Integral base of the source system.
    pub base: Vec<LatticeVector>,
    /// Images of the base in the target.
    pub images: Vec<LatticeVector>,
    /// (f(a), f(b))_target = k (a, b)_source.
    pub k: Q,
    coords: Coordinates,
}

impl RootIso {
    pub fn new(base: Vec<LatticeVector>, images: Vec<LatticeVector>, k: Q) -> Option<Self> {
        let b: Vec<Vec<Q>> = base.iter().map(|v| v.0.clone()).collect();
        let coords = Coordinates::new(&b)?;
        Some(RootIso { base, images, k, coords })
    }

    /// Linear image of a vector in the rational span of the source roots.
    pub fn apply(&self, v: &LatticeVector) -> Option<LatticeVector> {
        let c = self.coords.coords(&v.0)?;
        let dim = self.images.first().map_or(0, |x| x.dim());
        let mut out = LatticeVector::zero(dim);
        for (ci, img) in c.iter().zip(&self.images) {
            if !ci.is_zero() {
                out = out.add(&img.scale(ci));
            }
        }
        Some(out)
    }

    pub fn inverse(&self) -> Option<RootIso> {
        let k = self.k.recip();
        RootIso::new(self.images.clone(), self.base.clone(), k)
    }

    pub fn compose(&self, then: &RootIso) -> Option<RootIso> {
        let imgs: Option<Vec<LatticeVector>> = self.images.iter().map(|v| then.apply(v)).collect();
        RootIso::new(self.base.clone(), imgs?, &self.k * &then.k)
    }

    pub fn identity(r: &RootSupersystem) -> Option<RootIso> {
        let pi = integral_base(r).ok()?.roots;
        RootIso::new(pi.clone(), pi, q(1))
    }

    /// Checks f(R) = S and the scaled form identity on all root pairs.
    pub fn verify(&self, r: &RootSupersystem, s: &RootSupersystem) -> bool {
        if r.roots.len() != s.roots.len() {
            return false;
        }
        let mut imgs = Vec::new();
        for a in &r.roots {
            match self.apply(a) {
                Some(x) if s.contains(&x) => imgs.push(x),
                _ => return false,
            }
        }
        if imgs.iter().collect::<HashSet<_>>().len() != imgs.len() {
            return false;
        }
        for (a, fa) in r.roots.iter().zip(&imgs) {
            for (b, fb) in r.roots.iter().zip(&imgs) {
                if s.ip(fa, fb) != &self.k * r.ip(a, b) {
                    return false;
                }
            }
        }
        true
    }
}

fn invariants_match(r: &RootSupersystem, s: &RootSupersystem) -> bool {
    r.roots.len() == s.roots.len()
        && r.real_roots().len() == s.real_roots().len()
        && r.rank() == s.rank()
        && r.real_components().len() == s.real_components().len()
}

pub fn is_isomorphic(r: &RootSupersystem, s: &RootSupersystem) -> Option<RootIso> {
    if !invariants_match(r, s) {
        return None;
    }
    if let (Ok(a), Ok(b)) = (recognize(r), recognize(s)) {
        if iso_class_key(&a) != iso_class_key(&b) {
            return None;
        }
    }
    let pi = integral_base(r).ok()?.roots;
    // real base roots first so the scalar is fixed early
    let mut order: Vec<usize> = (0..pi.len()).collect();
    order.sort_by_key(|&i| r.norm(&pi[i]).is_zero());
    let pi: Vec<LatticeVector> = order.iter().map(|&i| pi[i].clone()).collect();
    let targets: Vec<LatticeVector> = s.nonzero().cloned().collect();
    let mut chosen: Vec<LatticeVector> = Vec::new();
    fn go(
        r: &RootSupersystem,
        s: &RootSupersystem,
        pi: &[LatticeVector],
        targets: &[LatticeVector],
        chosen: &mut Vec<LatticeVector>,
        k: Option<Q>,
    ) -> Option<RootIso> {
        let i = chosen.len();
        if i == pi.len() {
            let k = k.unwrap_or_else(|| q(1));
            let iso = RootIso::new(pi.to_vec(), chosen.clone(), k)?;
            return if iso.verify(r, s) { Some(iso) } else { None };
        }
        let ni = r.norm(&pi[i]);
        for t in targets {
            let nt = s.norm(t);
            if ni.is_zero() != nt.is_zero() || chosen.contains(t) {
                continue;
            }
            let mut kk = k.clone();
            if kk.is_none() && !ni.is_zero() {
                kk = Some(&nt / &ni);
            }
            let mut ok = true;
            for (j, cj) in chosen.iter().enumerate() {
                let a = r.ip(&pi[i], &pi[j]);
                let b = s.ip(t, cj);
                match &kk {
                    Some(kv) => {
                        if b != kv * &a {
                            ok = false;
                            break;
                        }
                    }
                    None => {
                        if a.is_zero() != b.is_zero() {
                            ok = false;
                            break;
                        }
                        if !a.is_zero() {
                            kk = Some(&b / &a);
                        }
                    }
                }
            }
            if !ok {
                continue;
            }
            chosen.push(t.clone());
            if let Some(x) = go(r, s, pi, targets, chosen, kk) {
                return Some(x);
            }
            chosen.pop();
        }
        None
    }
    go(r, s, &pi, &targets, &mut chosen, None)
}

// ---------------------------------------------------------------------------
// non-root audit for C(T,T') and BC(T,T')

#[derive(Clone, Debug)]
pub struct Rem3Report {
    pub gamma: LatticeVector,
    pub theta1: LatticeVector,
    pub theta2: LatticeVector,
    pub absent: usize,
    pub report: Report,
}

pub fn rem3_candidates(t1: &LatticeVector, t2: &LatticeVector, g: &LatticeVector) -> Vec<(String, LatticeVector)> {
    let c = |a: i64, b: i64, cg: i64| t1.scale(&q(a)).add(&t2.scale(&q(b))).add(&g.scale(&q(cg)));
    let list: [(&str, i64, i64, i64); 30] = [
        ("2(t1-t2)-g", 2, -2, -1),
        ("2(t1-t2)-3g", 2, -2, -3),
        ("t1-t2-3g", 1, -1, -3),
        ("2(t1-t2-g)", 2, -2, -2),
        ("2t1-t2-g", 2, -1, -1),
        ("t1-2t2-g", 1, -2, -1),
        ("2t1-t2-2g", 2, -1, -2),
        ("t1-2t2-2g", 1, -2, -2),
        ("2t1-t2-3g", 2, -1, -3),
        ("t1-2t2-3g", 1, -2, -3),
        ("2t1+t2-g", 2, 1, -1),
        ("t1+2t2+g", 1, 2, 1),
        ("t1-t2+g", 1, -1, 1),
        ("t1+t2+g", 1, 1, 1),
        ("t1+t2-g", 1, 1, -1),
        ("2t2-2g", 0, 2, -2),
        ("2t2+2g", 0, 2, 2),
        ("2t1-2g", 2, 0, -2),
        ("t1-2g", 1, 0, -2),
        ("t2+2g", 0, 1, 2),
        ("2t1+t2", 2, 1, 0),
        ("2t1-t2", 2, -1, 0),
        ("t1+2t2", 1, 2, 0),
        ("t1-2t2", 1, -2, 0),
        ("2t1-g", 2, 0, -1),
        ("2t2+g", 0, 2, 1),
        ("t1+g", 1, 0, 1),
        ("t2-g", 0, 1, -1),
        ("2t1", 2, 0, 0),
        ("2t2", 0, 2, 0),
    ];
    list.iter().map(|(n, a, b, cg)| (n.to_string(), c(*a, *b, *cg))).collect()
}

pub fn rem3_nonroot_audit(r: &RootSupersystem) -> Result<Rem3Report, RootError> {
    let d = r.descriptor.clone().ok_or_else(|| RootError::Unrecognized("no descriptor".into()))?;
    let ok = matches!(d.family, Family::CTT | Family::BCTT | Family::C1T) && d.ranks[1] > 1;
    if !ok {
        return Err(RootError::Unrecognized(format!("audit needs C or BC with second rank > 1, got {}", d)));
    }
    let pos = |k: SymbolKind, i: u32| r.basis.iter().position(|b| b.kind == k && b.index == i).unwrap();
    let n = r.dim();
    let ei = LatticeVector::unit(n, pos(SymbolKind::Eps, 1), q(1));
    let dp = LatticeVector::unit(n, pos(SymbolKind::Delta, 1), q(1));
    let dq = LatticeVector::unit(n, pos(SymbolKind::Delta, 2), q(1));
    // with a single epsilon the coordinates already put the base vector at
    // half the A1 root (C case) or at the short BC1 root, so both branches
    // land on e1
    let eps = ei;
    let gamma = dp.add(&dq);
    let theta1 = eps.add(&dp);
    let theta2 = eps.sub(&dp);
    let mut report = Report::default();
    let mut absent = 0;
    for (name, v) in rem3_candidates(&theta1, &theta2, &gamma) {
        report.checked += 1;
        if r.contains(&v) {
            report.push("rem3", format!("{} = {} is a root", name, r.render(&v)));
        } else {
            absent += 1;
        }
    }
    let t12 = theta1.sub(&theta2);
    let ids = [
        ("(t1+t2,g)=0", r.ip(&theta1.add(&theta2), &gamma).is_zero()),
        ("(t1-t2,t1-t2)=2(t1-t2,g)", r.norm(&t12) == q(2) * r.ip(&t12, &gamma)),
        ("(t1-t2,g)=(g,g)", r.ip(&t12, &gamma) == r.norm(&gamma)),
        ("(g,t1)!=0", !r.ip(&gamma, &theta1).is_zero()),
        ("(g,t2)!=0", !r.ip(&gamma, &theta2).is_zero()),
    ];
    for (name, holds) in ids {
        report.checked += 1;
        if !holds {
            report.push("rem3-identity", name.to_string());
        }
    }
    Ok(Rem3Report { gamma, theta1, theta2, absent, report })
}

// ---------------------------------------------------------------------------
// serialization

pub mod json {
    use super::*;
    use serde_json::{json, Value};

    pub fn symbol_to_json(s: &BasisSymbol) -> Value {
        match s.kind {
            SymbolKind::Eps => json!({"kind": "eps", "idx": s.index}),
            SymbolKind::Delta => json!({"kind": "delta", "idx": s.index}),
            SymbolKind::AlphaStar => json!({"kind": "alphastar"}),
        }
    }

    pub fn symbol_from_json(v: &Value) -> Option<BasisSymbol> {
        let kind = v.get("kind")?.as_str()?;
        match kind {
            "alphastar" => Some(BasisSymbol::alpha_star()),
            "eps" => Some(BasisSymbol::eps(v.get("idx")?.as_u64()? as u32)),
            "delta" => Some(BasisSymbol::delta(v.get("idx")?.as_u64()? as u32)),
            _ => None,
        }
    }

    pub fn vector_to_json(v: &LatticeVector) -> Value {
        Value::Array(v.0.iter().map(|x| Value::String(fmt_q(x))).collect())
    }

    pub fn vector_from_json(v: &Value) -> Option<LatticeVector> {
        let arr = v.as_array()?;
        let xs: Option<Vec<Q>> = arr.iter().map(|x| x.as_str().and_then(num::parse_q)).collect();
        Some(LatticeVector(xs?))
    }

    pub fn descriptor_to_json(d: &TypeDescriptor) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("family".into(), json!(d.family.name()));
        m.insert("ranks".into(), json!(d.ranks));
        if let Some(l) = &d.lambda {
            m.insert("lambda".into(), json!(fmt_q(l)));
        }
        Value::Object(m)
    }

    pub fn descriptor_from_json(v: &Value) -> Option<TypeDescriptor> {
        let family = Family::from_name(v.get("family")?.as_str()?)?;
        let ranks: Option<Vec<u32>> = v.get("ranks")?.as_array()?.iter().map(|x| x.as_u64().map(|y| y as u32)).collect();
        let lambda = match v.get("lambda") {
            Some(l) => Some(num::parse_q(l.as_str()?)?),
            None => None,
        };
        Some(TypeDescriptor { family, ranks: ranks?, lambda })
    }

    pub fn rootsys_to_json(r: &RootSupersystem) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("schema".into(), json!("rootsys.v1"));
        m.insert("basis".into(), Value::Array(r.basis.iter().map(symbol_to_json).collect()));
        m.insert(
            "form".into(),
            Value::Array(r.form.gram.iter().map(|row| Value::Array(row.iter().map(|x| json!(fmt_q(x))).collect())).collect()),
        );
        m.insert("roots".into(), Value::Array(r.roots.iter().map(vector_to_json).collect()));
        if let Some(d) = &r.descriptor {
            m.insert("descriptor".into(), descriptor_to_json(d));
        }
        if let Some(ds) = &r.delta_star {
            m.insert("delta_star".into(), vector_to_json(ds));
        }
        Value::Object(m)
    }

    pub fn rootsys_from_json(v: &Value) -> Option<RootSupersystem> {
        let basis: Option<Vec<BasisSymbol>> = v.get("basis")?.as_array()?.iter().map(symbol_from_json).collect();
        let basis = basis?;
        let gram: Option<Mat> = v
            .get("form")?
            .as_array()?
            .iter()
            .map(|row| row.as_array().and_then(|r| r.iter().map(|x| x.as_str().and_then(num::parse_q)).collect()))
            .collect();
        let roots: Option<Vec<LatticeVector>> = v.get("roots")?.as_array()?.iter().map(vector_from_json).collect();
        let descriptor = match v.get("descriptor") {
            Some(d) => Some(descriptor_from_json(d)?),
            None => None,
        };
        let gram = gram?;
        if gram.len() != basis.len() || gram.iter().any(|r| r.len() != basis.len()) {
            return None;
        }
        let roots = roots?;
        if roots.iter().any(|r| r.dim() != basis.len()) {
            return None;
        }
        let mut sys = RootSupersystem::new(basis, SymmetricForm { gram }, roots, descriptor);
        sys.delta_star = match v.get("delta_star") {
            Some(x) => Some(vector_from_json(x)?),
            None => None,
        };
        Some(sys)
    }
}
