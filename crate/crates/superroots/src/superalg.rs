//! Finite-dimensional Lie superalgebras given by exact structure constants
//! on a homogeneous basis.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::num::{self, fmt_q, q, Mat, Span, Q};
use crate::rootsys::{json as rjson, LatticeVector, Report};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AlgError {
    #[error("bracket table is not super-antisymmetric at ({0}, {1})")]
    NotAntisupersymmetric(usize, usize),
    #[error("bracket of basis elements {0} and {1} has the wrong parity")]
    ParityViolation(usize, usize),
    #[error("dimension mismatch")]
    DimensionMismatch,
    #[error("the form is singular on the Cartan subalgebra")]
    SingularCartanForm,
    #[error("basis element {0} is not a weight vector")]
    NotDiagonalizable(usize),
    #[error("the zero weight space is larger than the Cartan subalgebra")]
    NonSelfCentralizing,
    #[error("ad-exponential did not terminate")]
    NotNilpotent,
    #[error("no sl2 triple for the requested root")]
    NoTriple,
    #[error("missing data: {0}")]
    Missing(&'static str),
    #[error("verification failed: {0}")]
    Verification(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn bit(self) -> u8 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    pub fn from_bit(b: u8) -> Self {
        if b % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn add(self, o: Parity) -> Parity {
        Parity::from_bit(self.bit() + o.bit())
    }
}

/// (-1)^{|x||y|}
pub fn koszul(a: Parity, b: Parity) -> Q {
    if a == Parity::Odd && b == Parity::Odd {
        q(-1)
    } else {
        q(1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Cartan(usize),
    Root { root: LatticeVector, slot: u8 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GradedBasisElement {
    pub label: Label,
    pub parity: Parity,
}

pub type Sparse = Vec<(usize, Q)>;

#[derive(Clone, Debug, PartialEq)]
pub struct LieSuperalgebra {
    pub basis: Vec<GradedBasisElement>,
    /// `table[i][j]` is `[b_i, b_j]`.
    table: Vec<Vec<Sparse>>,
    pub form: Option<Mat>,
}

/// Dense coordinates over the algebra basis.
pub type Elem = Vec<Q>;

fn to_sparse(v: &[Q]) -> Sparse {
    v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(i, x)| (i, x.clone())).collect()
}

impl LieSuperalgebra {
    pub fn from_table(
        basis: Vec<GradedBasisElement>,
        entries: impl IntoIterator<Item = (usize, usize, Elem)>,
        form: Option<Mat>,
    ) -> Result<Self, AlgError> {
        let n = basis.len();
        let mut table = vec![vec![Sparse::new(); n]; n];
        for (i, j, v) in entries {
            if i >= n || j >= n || v.len() != n {
                return Err(AlgError::DimensionMismatch);
            }
            table[i][j] = to_sparse(&v);
        }
        if let Some(f) = &form {
            if f.len() != n || f.iter().any(|r| r.len() != n) {
                return Err(AlgError::DimensionMismatch);
            }
        }
        let alg = LieSuperalgebra { basis, table, form };
        for i in 0..n {
            for j in 0..n {
                let pi = alg.basis[i].parity;
                let pj = alg.basis[j].parity;
                let want = pi.add(pj);
                if alg.table[i][j].iter().any(|(k, _)| alg.basis[*k].parity != want) {
                    return Err(AlgError::ParityViolation(i, j));
                }
                let s = -koszul(pi, pj);
                let lhs = alg.dense(i, j);
                let rhs = alg.dense(j, i);
                if lhs.iter().zip(&rhs).any(|(a, b)| *a != &s * b) {
                    return Err(AlgError::NotAntisupersymmetric(i, j));
                }
            }
        }
        Ok(alg)
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn parity(&self, i: usize) -> Parity {
        self.basis[i].parity
    }

    pub fn entry(&self, i: usize, j: usize) -> &Sparse {
        &self.table[i][j]
    }

    pub fn dense(&self, i: usize, j: usize) -> Elem {
        let mut v = vec![Q::zero(); self.dim()];
        for (k, c) in &self.table[i][j] {
            v[*k] = c.clone();
        }
        v
    }

    pub fn unit(&self, i: usize) -> Elem {
        let mut v = vec![Q::zero(); self.dim()];
        v[i] = Q::one();
        v
    }

    /// Entries of the table as (i, j, [b_i, b_j]) with nonzero brackets.
    pub fn entries(&self) -> Vec<(usize, usize, &Sparse)> {
        let mut out = Vec::new();
        for i in 0..self.dim() {
            for j in 0..self.dim() {
                if !self.table[i][j].is_empty() {
                    out.push((i, j, &self.table[i][j]));
                }
            }
        }
        out
    }

    pub fn bracket(&self, x: &[Q], y: &[Q]) -> Result<Elem, AlgError> {
        let n = self.dim();
        if x.len() != n || y.len() != n {
            return Err(AlgError::DimensionMismatch);
        }
        let mut out = vec![Q::zero(); n];
        for (i, a) in x.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in y.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a * b;
                for (k, c) in &self.table[i][j] {
                    out[*k] += &ab * c;
                }
            }
        }
        Ok(out)
    }

    fn bracket_sparse_basis(&self, x: &Sparse, j: usize) -> Sparse {
        let mut acc: BTreeMap<usize, Q> = BTreeMap::new();
        for (i, a) in x {
            for (k, c) in &self.table[*i][j] {
                *acc.entry(*k).or_insert_with(Q::zero) += a * c;
            }
        }
        acc.into_iter().filter(|(_, v)| !v.is_zero()).collect()
    }

    /// Matrix of ad x acting on coordinate columns.
    pub fn ad(&self, x: &[Q]) -> Mat {
        let n = self.dim();
        let mut m = num::zeros(n, n);
        for j in 0..n {
            let col = self.bracket(x, &self.unit(j)).unwrap();
            for i in 0..n {
                m[i][j] = col[i].clone();
            }
        }
        m
    }

    pub fn parity_of(&self, x: &[Q]) -> Option<Parity> {
        let mut p = None;
        for (i, c) in x.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match p {
                None => p = Some(self.parity(i)),
                Some(pp) if pp != self.parity(i) => return None,
                _ => {}
            }
        }
        Some(p.unwrap_or(Parity::Even))
    }

    pub fn jacobi_check(&self) -> Report {
        let n = self.dim();
        let mut rep = Report::default();
        for a in 0..n {
            for b in 0..n {
                let ab = &self.table[a][b];
                for c in 0..n {
                    rep.checked += 1;
                    let (pa, pb, pc) = (self.parity(a), self.parity(b), self.parity(c));
                    let mut acc: HashMap<usize, Q> = HashMap::new();
                    let mut add = |s: Q, v: Sparse| {
                        for (k, x) in v {
                            *acc.entry(k).or_insert_with(Q::zero) += &s * x;
                        }
                    };
                    add(koszul(pa, pc), self.bracket_sparse_basis(ab, c));
                    add(koszul(pc, pb), self.bracket_sparse_basis(&self.table[c][a], b));
                    add(koszul(pb, pa), self.bracket_sparse_basis(&self.table[b][c], a));
                    if acc.values().any(|x| !x.is_zero()) {
                        rep.push("jacobi", format!("({}, {}, {})", a, b, c));
                        if rep.violations.len() > 20 {
                            return rep;
                        }
                    }
                }
            }
        }
        rep
    }

    pub fn form_value(&self, x: &[Q], y: &[Q]) -> Option<Q> {
        let f = self.form.as_ref()?;
        Some(num::dot(x, &num::mat_vec(f, y)))
    }

    pub fn form_check(&self, weights: Option<&[Option<LatticeVector>]>) -> Report {
        let mut rep = Report::default();
        let Some(f) = &self.form else {
            rep.push("form", "no form".into());
            return rep;
        };
        let n = self.dim();
        rep.checked += 1;
        if num::rank(f) != n {
            rep.push("nondegenerate", format!("rank {} < {}", num::rank(f), n));
        }
        for i in 0..n {
            for j in 0..n {
                rep.checked += 2;
                let s = koszul(self.parity(i), self.parity(j));
                if f[i][j] != &s * &f[j][i] {
                    rep.push("supersymmetric", format!("({}, {})", i, j));
                }
                if self.parity(i) != self.parity(j) && !f[i][j].is_zero() {
                    rep.push("even", format!("({}, {})", i, j));
                }
                if let Some(w) = weights {
                    if let (Some(a), Some(b)) = (&w[i], &w[j]) {
                        rep.checked += 1;
                        if !a.add(b).is_zero() && !f[i][j].is_zero() {
                            rep.push("weight-orthogonal", format!("({}, {})", i, j));
                        }
                    }
                }
            }
        }
        // ([x,y],z) = (x,[y,z])
        for x in 0..n {
            for y in 0..n {
                for z in 0..n {
                    rep.checked += 1;
                    let l: Q = self.table[x][y].iter().map(|(k, c)| c * &f[*k][z]).sum();
                    let r: Q = self.table[y][z].iter().map(|(k, c)| c * &f[x][*k]).sum();
                    if l != r {
                        rep.push("invariant", format!("({}, {}, {})", x, y, z));
                        if rep.violations.len() > 20 {
                            return rep;
                        }
                    }
                }
            }
        }
        rep
    }

    pub fn cartan_indices(&self) -> Vec<usize> {
        (0..self.dim()).filter(|&i| matches!(self.basis[i].label, Label::Cartan(_))).collect()
    }

    /// Weight vectors `(alpha(h_k))_k` on the Cartan basis for each basis
    /// element, checking the Cartan acts diagonally and is self-centralizing.
    pub fn root_decomposition(&self, cartan: &[usize]) -> Result<BTreeMap<Vec<Q>, Vec<usize>>, AlgError> {
        for &a in cartan {
            for &b in cartan {
                if !self.table[a][b].is_empty() {
                    return Err(AlgError::NotDiagonalizable(b));
                }
            }
        }
        let mut out: BTreeMap<Vec<Q>, Vec<usize>> = BTreeMap::new();
        for j in 0..self.dim() {
            let mut w = Vec::new();
            for &h in cartan {
                let e = &self.table[h][j];
                match e.as_slice() {
                    [] => w.push(Q::zero()),
                    [(k, c)] if *k == j => w.push(c.clone()),
                    _ => return Err(AlgError::NotDiagonalizable(j)),
                }
            }
            out.entry(w).or_default().push(j);
        }
        let zero = vec![Q::zero(); cartan.len()];
        if let Some(z) = out.get(&zero) {
            if z.len() != cartan.len() {
                return Err(AlgError::NonSelfCentralizing);
            }
        }
        Ok(out)
    }

    /// `w[k] = alpha(h_k)` for the root of basis element `j`.
    pub fn weight_of(&self, j: usize) -> Result<Vec<Q>, AlgError> {
        let mut w = Vec::new();
        for h in self.cartan_indices() {
            match self.table[h][j].as_slice() {
                [] => w.push(Q::zero()),
                [(k, c)] if *k == j => w.push(c.clone()),
                _ => return Err(AlgError::NotDiagonalizable(j)),
            }
        }
        Ok(w)
    }

    /// The Cartan element t with (t, h_k) = w[k] for every Cartan basis
    /// element h_k.
    pub fn cartan_representative(&self, weight: &[Q]) -> Result<Elem, AlgError> {
        let f = self.form.as_ref().ok_or(AlgError::Missing("form"))?;
        let cart = self.cartan_indices();
        if weight.len() != cart.len() {
            return Err(AlgError::DimensionMismatch);
        }
        let g: Mat = cart.iter().map(|&i| cart.iter().map(|&j| f[j][i].clone()).collect()).collect();
        if num::determinant(&g).is_zero() {
            return Err(AlgError::SingularCartanForm);
        }
        let t = num::solve(&g, weight).ok_or(AlgError::SingularCartanForm)?;
        let mut out = vec![Q::zero(); self.dim()];
        for (c, &i) in t.iter().zip(&cart) {
            out[i] = c.clone();
        }
        Ok(out)
    }

    pub fn label_index(&self) -> HashMap<Label, usize> {
        self.basis.iter().enumerate().map(|(i, b)| (b.label.clone(), i)).collect()
    }

    pub fn root_space(&self, root: &LatticeVector) -> Vec<usize> {
        (0..self.dim())
            .filter(|&i| matches!(&self.basis[i].label, Label::Root { root: r, .. } if r == root))
            .collect()
    }

    /// An sl2 triple (e, f, h) with [e,f] = h, [h,e] = 2e, [h,f] = -2f for
    /// an even root whose root spaces are one-dimensional.
    pub fn sl2_triple(&self, alpha: &LatticeVector) -> Result<(Elem, Elem, Elem), AlgError> {
        let pos = self.root_space(alpha);
        let neg = self.root_space(&alpha.neg());
        if pos.len() != 1 || neg.len() != 1 || self.parity(pos[0]) != Parity::Even {
            return Err(AlgError::NoTriple);
        }
        let e = self.unit(pos[0]);
        let f0 = self.unit(neg[0]);
        let h0 = self.bracket(&e, &f0)?;
        let he = self.bracket(&h0, &e)?;
        let c = he[pos[0]].clone();
        if c.is_zero() {
            return Err(AlgError::NoTriple);
        }
        let s = q(2) / c;
        let f: Elem = f0.iter().map(|x| x * &s).collect();
        let h: Elem = h0.iter().map(|x| x * &s).collect();
        let two_e: Elem = e.iter().map(|x| x * q(2)).collect();
        let m2f: Elem = f.iter().map(|x| x * q(-2)).collect();
        if self.bracket(&h, &e)? != two_e || self.bracket(&h, &f)? != m2f {
            return Err(AlgError::NoTriple);
        }
        Ok((e, f, h))
    }

    pub fn theta_automorphism(&self, alpha: &LatticeVector) -> Result<Mat, AlgError> {
        let (e, f, h) = self.sl2_triple(alpha)?;
        let n = self.dim();
        let ade = self.ad(&e);
        let adf: Mat = self.ad(&f).into_iter().map(|r| r.into_iter().map(|x| -x).collect()).collect();
        let xe = nilpotent_exp(&ade, n)?;
        let xf = nilpotent_exp(&adf, n)?;
        let theta = num::mat_mul(&num::mat_mul(&xe, &xf), &xe);
        // Cartan: theta(h') = h' - alpha(h') h
        let pos = self.root_space(alpha)[0];
        for k in self.cartan_indices() {
            let ak = self.dense(k, pos)[pos].clone();
            let img = num::mat_vec(&theta, &self.unit(k));
            let want: Elem = self.unit(k).iter().zip(&h).map(|(x, y)| x - &ak * y).collect();
            if img != want {
                return Err(AlgError::Verification(format!("theta on Cartan element {}", k)));
            }
        }
        // root spaces go to the reflected root spaces
        let hw_alpha = self.weight_of(pos)?;
        let h_coords: Vec<Q> = self.cartan_indices().iter().map(|&i| h[i].clone()).collect();
        for j in 0..n {
            let Label::Root { root: beta, .. } = &self.basis[j].label else { continue };
            let wb = self.weight_of(j)?;
            let bh: Q = num::dot(&wb, &h_coords);
            let target = beta.sub(&alpha.scale(&bh));
            let tw: Vec<Q> = wb.iter().zip(&hw_alpha).map(|(x, y)| x - &bh * y).collect();
            let img = num::mat_vec(&theta, &self.unit(j));
            let space = self.root_space(&target);
            for (i, c) in img.iter().enumerate() {
                if !c.is_zero() && !space.contains(&i) {
                    return Err(AlgError::Verification(format!("theta moves basis element {} off its reflected space", j)));
                }
            }
            if space.is_empty() || self.weight_of(space[0])? != tw {
                return Err(AlgError::Verification(format!("reflected weight of basis element {}", j)));
            }
        }
        Ok(theta)
    }

    /// Subspace spanned by the ideal generated by `x`.
    pub fn ideal_dim(&self, x: &[Q]) -> usize {
        let n = self.dim();
        let mut span = Span::new(n);
        let mut queue = vec![x.to_vec()];
        span.insert(x);
        while let Some(v) = queue.pop() {
            for j in 0..n {
                let w = self.bracket(&v, &self.unit(j)).unwrap();
                if span.insert(&w) {
                    queue.push(w);
                }
            }
        }
        span.len()
    }

    pub fn is_simple(&self) -> bool {
        let n = self.dim();
        if n == 0 || self.entries().is_empty() {
            return false;
        }
        (0..n).all(|i| self.ideal_dim(&self.unit(i)) == n)
    }

    pub fn center_of_even_part(&self) -> Vec<Elem> {
        let even: Vec<usize> = (0..self.dim()).filter(|&i| self.parity(i) == Parity::Even).collect();
        // unknowns: coefficients on even basis; equations: [x, b_j] = 0 for even j
        let mut rows: Mat = Vec::new();
        for &j in &even {
            for k in 0..self.dim() {
                let row: Vec<Q> = even
                    .iter()
                    .map(|&i| self.table[i][j].iter().find(|(kk, _)| *kk == k).map_or(Q::zero(), |(_, c)| c.clone()))
                    .collect();
                if row.iter().any(|x| !x.is_zero()) {
                    rows.push(row);
                }
            }
        }
        let ns = num::nullspace(&rows, even.len());
        ns.into_iter()
            .map(|c| {
                let mut v = vec![Q::zero(); self.dim()];
                for (x, &i) in c.into_iter().zip(&even) {
                    v[i] = x;
                }
                v
            })
            .collect()
    }

    /// Direct sum with another algebra (bases concatenated).
    pub fn direct_sum(&self, o: &LieSuperalgebra) -> LieSuperalgebra {
        let n = self.dim();
        let mut basis = self.basis.clone();
        basis.extend(o.basis.iter().cloned());
        let m = basis.len();
        let mut table = vec![vec![Sparse::new(); m]; m];
        for i in 0..n {
            for j in 0..n {
                table[i][j] = self.table[i][j].clone();
            }
        }
        for i in 0..o.dim() {
            for j in 0..o.dim() {
                table[n + i][n + j] = o.table[i][j].iter().map(|(k, c)| (k + n, c.clone())).collect();
            }
        }
        LieSuperalgebra { basis, table, form: None }
    }

    pub fn with_entry(&self, i: usize, j: usize, v: Elem) -> LieSuperalgebra {
        let mut a = self.clone();
        a.table[i][j] = to_sparse(&v);
        a
    }

    pub fn to_json(&self) -> Value {
        let basis: Vec<Value> = self
            .basis
            .iter()
            .map(|b| match &b.label {
                Label::Cartan(i) => json!({"cartan": i, "parity": b.parity.bit()}),
                Label::Root { root, slot } => {
                    json!({"root": rjson::vector_to_json(root), "slot": slot, "parity": b.parity.bit()})
                }
            })
            .collect();
        let mut table = Vec::new();
        for (i, j, v) in self.entries() {
            for (k, c) in v {
                table.push(json!([i, j, k, fmt_q(c)]));
            }
        }
        let mut m = serde_json::Map::new();
        m.insert("schema".into(), json!("superalg.v1"));
        m.insert("basis".into(), Value::Array(basis));
        m.insert("table".into(), Value::Array(table));
        if let Some(f) = &self.form {
            m.insert("form".into(), json!(f.iter().map(|r| r.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>()));
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Option<Result<LieSuperalgebra, AlgError>> {
        let mut basis = Vec::new();
        for b in v.get("basis")?.as_array()? {
            let parity = Parity::from_bit(b.get("parity")?.as_u64()? as u8);
            let label = if let Some(c) = b.get("cartan") {
                Label::Cartan(c.as_u64()? as usize)
            } else {
                Label::Root { root: rjson::vector_from_json(b.get("root")?)?, slot: b.get("slot")?.as_u64()? as u8 }
            };
            basis.push(GradedBasisElement { label, parity });
        }
        let n = basis.len();
        let mut acc: BTreeMap<(usize, usize), Elem> = BTreeMap::new();
        for e in v.get("table")?.as_array()? {
            let a = e.as_array()?;
            let (i, j, k) = (a.first()?.as_u64()? as usize, a.get(1)?.as_u64()? as usize, a.get(2)?.as_u64()? as usize);
            let c = num::parse_q(a.get(3)?.as_str()?)?;
            if k >= n {
                return None;
            }
            acc.entry((i, j)).or_insert_with(|| vec![Q::zero(); n])[k] = c;
        }
        let form = match v.get("form") {
            Some(f) => Some(
                f.as_array()?
                    .iter()
                    .map(|r| r.as_array().and_then(|r| r.iter().map(|x| x.as_str().and_then(num::parse_q)).collect()))
                    .collect::<Option<Mat>>()?,
            ),
            None => None,
        };
        Some(LieSuperalgebra::from_table(basis, acc.into_iter().map(|((i, j), v)| (i, j, v)), form))
    }
}

/// exp(X) for nilpotent X, failing when X^{bound+1} is not zero.
pub fn nilpotent_exp(x: &Mat, bound: usize) -> Result<Mat, AlgError> {
    let n = x.len();
    let mut out = num::identity(n);
    let mut term = num::identity(n);
    for k in 1..=bound + 1 {
        term = num::mat_mul(&term, x);
        let inv = q(1) / q(k as i64);
        for row in term.iter_mut() {
            for c in row.iter_mut() {
                if !c.is_zero() {
                    *c *= &inv;
                }
            }
        }
        if term.iter().all(|r| r.iter().all(|c| c.is_zero())) {
            return Ok(out);
        }
        for (o, t) in out.iter_mut().zip(&term) {
            for (a, b) in o.iter_mut().zip(t) {
                *a += b;
            }
        }
    }
    Err(AlgError::NotNilpotent)
}
