//! Chevalley-type structure constants: total orders, the sign system,
//! special pairs, and the recursion that determines every constant from
//! free values on the extraspecial pairs.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap, VecDeque};

use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};
use thiserror::Error;

use crate::num::{self, fmt_q, q, Coordinates, Mat, Q};
use crate::rootsys::{self, json as rjson, Family, LatticeVector, Report, RootSupersystem};
use crate::superalg::{AlgError, GradedBasisElement, Label, LieSuperalgebra, Parity};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ChevError {
    #[error("root systems of type A(1,1) have two-dimensional root spaces and are not supported")]
    TypeA11Unsupported,
    #[error("missing seed for extraspecial pair ({0}, {1})")]
    SeedMissing(String, String),
    #[error("seed given for a pair that is not extraspecial: ({0}, {1})")]
    UnexpectedSeed(String, String),
    #[error("zero seed for ({0}, {1})")]
    ZeroSeed(String, String),
    #[error("sum of ({0}, {1}) is not a nonzero root")]
    SumNotRoot(String, String),
    #[error("the product coefficient vanishes for ({0}, {1}) although the sum is a root")]
    VanishingProduct(String, String),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
    #[error("total order does not separate the root span")]
    DegenerateOrder,
    #[error(transparent)]
    Root(#[from] rootsys::RootError),
    #[error(transparent)]
    Alg(#[from] AlgError),
}

/// Lexicographic order on the rational span of the roots: `u` is positive
/// when the first nonzero value among `keys(u)` is positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TotalOrder {
    pub keys: Vec<Vec<Q>>,
}

impl TotalOrder {
    /// Unit functionals in the system's own symbol order.
    pub fn standard(r: &RootSupersystem) -> Self {
        let n = r.dim();
        TotalOrder { keys: (0..n).map(|i| LatticeVector::unit(n, i, q(1)).0).collect() }
    }

    /// Unit functionals following the given permutation of symbol positions.
    pub fn from_positions(r: &RootSupersystem, positions: &[usize]) -> Self {
        let n = r.dim();
        TotalOrder { keys: positions.iter().map(|&i| LatticeVector::unit(n, i, q(1)).0).collect() }
    }

    pub fn key(&self, v: &LatticeVector) -> Vec<Q> {
        self.keys.iter().map(|k| num::dot(k, &v.0)).collect()
    }

    pub fn cmp(&self, a: &LatticeVector, b: &LatticeVector) -> Ordering {
        self.key(a).cmp(&self.key(b))
    }

    pub fn is_positive(&self, v: &LatticeVector) -> bool {
        self.key(v).iter().find(|x| !x.is_zero()).map_or(false, |x| x.is_positive())
    }

    /// The order on the target of `iso` making `iso` order-preserving.
    pub fn transport(&self, iso: &rootsys::RootIso, target_dim: usize) -> Option<TotalOrder> {
        let rows: Mat = iso.images.iter().map(|v| v.0.clone()).collect();
        let mut keys = Vec::new();
        for k in &self.keys {
            let rhs: Vec<Q> = iso.base.iter().map(|b| num::dot(k, &b.0)).collect();
            let sol = num::solve(&rows, &rhs)?;
            debug_assert_eq!(sol.len(), target_dim);
            keys.push(sol);
        }
        Some(TotalOrder { keys })
    }
}

/// Roots of `r` with their order, parity and sign data, indexed by position
/// in `r.roots`.
pub struct Signs<'a> {
    pub r: &'a RootSupersystem,
    pub order: TotalOrder,
    pub parity: Vec<u8>,
    pub positive: Vec<bool>,
    pub sigma: Vec<i8>,
    keys: Vec<Vec<Q>>,
    neg: Vec<usize>,
    sum: Vec<Vec<Option<usize>>>,
    zero: usize,
}

impl<'a> Signs<'a> {
    pub fn new(r: &'a RootSupersystem, order: &TotalOrder) -> Result<Self, ChevError> {
        let n = r.roots.len();
        let pm = r.parity_map();
        let parity: Vec<u8> = r.roots.iter().map(|v| pm[v]).collect();
        let keys: Vec<Vec<Q>> = r.roots.iter().map(|v| order.key(v)).collect();
        let zero = r.position(&LatticeVector::zero(r.dim())).ok_or_else(|| ChevError::InternalInconsistency("0 not a root".into()))?;
        let mut positive = vec![false; n];
        for i in 0..n {
            if i == zero {
                continue;
            }
            match keys[i].iter().find(|x| !x.is_zero()) {
                Some(x) => positive[i] = x.is_positive(),
                None => return Err(ChevError::DegenerateOrder),
            }
        }
        let sigma: Vec<i8> = (0..n).map(|i| if parity[i] == 1 && !positive[i] && i != zero { -1 } else { 1 }).collect();
        let neg: Vec<usize> = r.roots.iter().map(|v| r.position(&v.neg()).unwrap_or(usize::MAX)).collect();
        let mut sum = vec![vec![None; n]; n];
        for i in 0..n {
            for j in 0..n {
                if i == zero || j == zero {
                    continue;
                }
                if let Some(k) = r.position(&r.roots[i].add(&r.roots[j])) {
                    if k != zero {
                        sum[i][j] = Some(k);
                    }
                }
            }
        }
        Ok(Signs { r, order: order.clone(), parity, positive, sigma, keys, neg, sum, zero })
    }

    pub fn idx(&self, v: &LatticeVector) -> Option<usize> {
        self.r.position(v)
    }

    pub fn root(&self, i: usize) -> &LatticeVector {
        &self.r.roots[i]
    }

    pub fn nonzero(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.r.roots.len()).filter(move |&i| i != self.zero)
    }

    pub fn positive_roots(&self) -> Vec<usize> {
        let mut p: Vec<usize> = self.nonzero().filter(|&i| self.positive[i]).collect();
        p.sort_by(|&a, &b| self.keys[a].cmp(&self.keys[b]));
        p
    }

    pub fn sigma_q(&self, i: usize) -> Q {
        q(self.sigma[i] as i64)
    }

    /// (-1)^{|a||b|}
    pub fn ks(&self, a: usize, b: usize) -> Q {
        if self.parity[a] == 1 && self.parity[b] == 1 {
            q(-1)
        } else {
            q(1)
        }
    }

    pub fn sum_of(&self, a: usize, b: usize) -> Option<usize> {
        self.sum[a][b]
    }

    pub fn neg_of(&self, a: usize) -> usize {
        self.neg[a]
    }

    fn key_le(&self, a: usize, b: usize) -> bool {
        self.keys[a] <= self.keys[b]
    }

    fn is_nonsingular(&self, i: usize) -> bool {
        self.r.norm(self.root(i)).is_zero()
    }

    pub fn render(&self, i: usize) -> String {
        self.r.render(self.root(i))
    }

    /// Right-hand side of the product identity N_{a,b} N_{-a,-b} = r_{a,b}.
    pub fn r_coefficient(&self, a: usize, b: usize, r_scale: &Q) -> Result<Q, ChevError> {
        let s = self.sum[a][b].ok_or_else(|| ChevError::SumNotRoot(self.render(a), self.render(b)))?;
        let alpha = self.root(a);
        let beta = self.root(b);
        let p = if self.is_nonsingular(a) && self.is_nonsingular(b) {
            0
        } else {
            let mut p = 0i64;
            while self.r.contains(&beta.sub(&alpha.scale(&q(p + 1)))) {
                p += 1;
            }
            p
        };
        let odd_a = self.parity[a] == 1;
        let mut total = Q::zero();
        for i in 0..=p {
            let v = beta.sub(&alpha.scale(&q(i)));
            let term = r_scale * self.r.ip(&v, alpha);
            if odd_a && i % 2 == 1 {
                total -= term;
            } else {
                total += term;
            }
        }
        Ok(self.sigma_q(b) * self.sigma_q(s) * self.sigma_q(a) * self.ks(a, b) * total)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PairClasses {
    /// Special pairs grouped by sum, sums in increasing order, pairs lex by
    /// first element; the first pair of each group is extraspecial.
    pub by_sum: Vec<(usize, Vec<(usize, usize)>)>,
}

impl PairClasses {
    pub fn special(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.by_sum.iter().flat_map(|(_, ps)| ps.iter().copied())
    }

    pub fn extraspecial(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.by_sum.iter().map(|(_, ps)| ps[0])
    }
}

pub fn pair_classes(s: &Signs) -> PairClasses {
    let pos = s.positive_roots();
    let mut groups: BTreeMap<Vec<Q>, (usize, Vec<(usize, usize)>)> = BTreeMap::new();
    for (x, &a) in pos.iter().enumerate() {
        for &b in &pos[x..] {
            if let Some(c) = s.sum[a][b] {
                groups.entry(s.keys[c].clone()).or_insert_with(|| (c, Vec::new())).1.push((a, b));
            }
        }
    }
    let mut by_sum: Vec<(usize, Vec<(usize, usize)>)> = groups.into_values().collect();
    for (_, ps) in by_sum.iter_mut() {
        ps.sort_by(|x, y| s.keys[x.0].cmp(&s.keys[y.0]));
    }
    PairClasses { by_sum }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConstantsTable {
    pub order: TotalOrder,
    pub r_scale: Q,
    pub seeds: BTreeMap<(LatticeVector, LatticeVector), Q>,
    /// Nonzero constants for every ordered pair whose sum is a nonzero root.
    pub n: BTreeMap<(LatticeVector, LatticeVector), Q>,
    /// Integral base used for the Cartan basis h_i = h_{beta_i}.
    pub base: Vec<LatticeVector>,
    /// Special pairs where the three-case recursion disagreed with the
    /// direct four-term solve, with both values.
    pub recursion_mismatches: Vec<(LatticeVector, LatticeVector, Q, Q)>,
}

impl ConstantsTable {
    pub fn get(&self, a: &LatticeVector, b: &LatticeVector) -> Q {
        self.n.get(&(a.clone(), b.clone())).cloned().unwrap_or_else(Q::zero)
    }
}

/// Seeds equal to `value` on every extraspecial pair.
pub fn uniform_seeds(s: &Signs, value: &Q) -> BTreeMap<(LatticeVector, LatticeVector), Q> {
    pair_classes(s).extraspecial().map(|(a, b)| ((s.root(a).clone(), s.root(b).clone()), value.clone())).collect()
}

pub fn reject_a11(r: &RootSupersystem) -> Result<(), ChevError> {
    let d = match &r.descriptor {
        Some(d) => Some(d.canonical()),
        None => rootsys::recognize(r).ok(),
    };
    if d.map_or(false, |d| d.family == Family::All && d.ranks == [1]) {
        return Err(ChevError::TypeA11Unsupported);
    }
    Ok(())
}

struct Solver<'s, 'a> {
    s: &'s Signs<'a>,
    r_scale: Q,
    known: HashMap<(usize, usize), Q>,
}

impl<'s, 'a> Solver<'s, 'a> {
    fn r(&self, a: usize, b: usize) -> Result<Q, ChevError> {
        self.s.r_coefficient(a, b, &self.r_scale)
    }

    /// Walks the six orderings of the zero-sum triple through (a, b) looking
    /// for a known special pair; returns the factor and the pair.
    fn via_triple(&self, a: usize, b: usize) -> Option<Q> {
        let s = self.s;
        let mut seen: HashMap<(usize, usize), ()> = HashMap::new();
        let mut queue = VecDeque::new();
        queue.push_back((a, b, q(1)));
        seen.insert((a, b), ());
        while let Some((x, y, f)) = queue.pop_front() {
            if s.positive[x] && s.positive[y] && s.key_le(x, y) {
                if let Some(v) = self.known.get(&(x, y)) {
                    return Some(f * v);
                }
            }
            let xy = s.sum[x][y]?;
            // N_{x,y} = -(-1)^{|x||y|} N_{y,x}
            let swap = (y, x, -(&f * s.ks(x, y)));
            // N_{x,y} = sigma_x sigma_{x+y} N_{y,-x-y}
            let cyc = (y, s.neg[xy], &f * s.sigma_q(x) * s.sigma_q(xy));
            for (u, v, g) in [swap, cyc] {
                if seen.insert((u, v), ()).is_none() {
                    queue.push_back((u, v, g));
                }
            }
        }
        None
    }

    fn lookup(&self, a: usize, b: usize) -> Result<Q, ChevError> {
        let s = self.s;
        if s.sum[a][b].is_none() {
            return Ok(Q::zero());
        }
        if let Some(v) = self.via_triple(a, b) {
            return Ok(v);
        }
        let (na, nb) = (s.neg[a], s.neg[b]);
        if let Some(v) = self.via_triple(na, nb) {
            return Ok(self.r(a, b)? / v);
        }
        Err(ChevError::InternalInconsistency(format!(
            "no determined special pair for ({}, {})",
            s.render(a),
            s.render(b)
        )))
    }

    /// Four-term identity on (alpha, beta, -gamma, -delta) solved for
    /// N_{alpha,beta}.
    fn direct(&self, a: usize, b: usize, g: usize, d: usize) -> Result<Q, ChevError> {
        let s = self.s;
        let (ng, nd) = (s.neg[g], s.neg[d]);
        let ab = s.sum[a][b].unwrap();
        let mut num = Q::zero();
        if let Some(bg) = s.sum[b][ng] {
            num += s.ks(a, b) * s.sigma_q(bg) * self.lookup(b, ng)? * self.lookup(a, nd)?;
        }
        if let Some(ag) = s.sum[a][ng] {
            num += s.ks(b, g) * s.sigma_q(ag) * self.lookup(ng, a)? * self.lookup(b, nd)?;
        }
        let den = s.ks(a, g) * s.sigma_q(ab) * self.lookup(ng, nd)?;
        if den.is_zero() {
            return Err(ChevError::InternalInconsistency("vanishing denominator".into()));
        }
        Ok(-num / den)
    }

    /// s_{x,y} = sigma_x sigma_{x+y}
    fn sxy(&self, x: usize, y: usize) -> Q {
        let s = self.s;
        match s.sum[x][y] {
            Some(k) => s.sigma_q(x) * s.sigma_q(k),
            None => q(1),
        }
    }

    /// The three-case closed form for a non-extraspecial special pair.
    fn three_case(&self, a: usize, b: usize, g: usize, d: usize) -> Result<Q, ChevError> {
        let s = self.s;
        let ng = s.neg[g];
        let nd = s.neg[d];
        let ab = s.sum[a][b].unwrap();
        let present = |x: usize, y: usize| s.sum[x][y].is_some();
        let ngd = self.lookup(g, d)? / self.r(g, d)?;
        let mut total = Q::zero();
        // first term: N_{-g,g-b} N_{a,d-a}
        let gb = s.idx(&s.root(g).sub(s.root(b)));
        let da = s.idx(&s.root(d).sub(s.root(a)));
        if let (Some(gb), Some(da)) = (gb, da) {
            if present(ng, gb) && present(a, da) {
                let bg = s.neg[gb];
                let sign = if s.parity[a] == 1 { q(-1) } else { q(1) };
                let t = sign
                    * s.sigma_q(ab)
                    * s.sigma_q(bg)
                    * &ngd
                    * self.sxy(b, ng)
                    * self.r(ng, gb)?
                    / self.lookup(g, bg)?
                    * self.sxy(nd, a)
                    * self.lookup(a, da)?;
                total += t;
            }
        }
        let ga = s.idx(&s.root(g).sub(s.root(a)));
        let db = s.idx(&s.root(d).sub(s.root(b)));
        if let (Some(ga), Some(db)) = (ga, db) {
            if present(ng, ga) && present(b, db) {
                let ag = s.neg[ga];
                let e = (s.parity[b] * s.parity[d] + s.parity[b] * s.parity[g]) % 2;
                let sign = if e == 1 { q(-1) } else { q(1) };
                let t = sign
                    * s.sigma_q(ab)
                    * s.sigma_q(ag)
                    * &ngd
                    * self.sxy(a, ng)
                    * self.r(ng, ga)?
                    / self.lookup(g, ag)?
                    * self.sxy(nd, b)
                    * self.lookup(b, db)?;
                total -= t;
            }
        }
        Ok(total)
    }
}

pub fn constants_from_seeds(
    r: &RootSupersystem,
    order: &TotalOrder,
    seeds: &BTreeMap<(LatticeVector, LatticeVector), Q>,
    r_scale: &Q,
) -> Result<ConstantsTable, ChevError> {
    reject_a11(r)?;
    let s = Signs::new(r, order)?;
    let pc = pair_classes(&s);
    let extraspecial: Vec<(usize, usize)> = pc.extraspecial().collect();
    for (a, b) in seeds.keys() {
        let ia = s.idx(a).zip(s.idx(b));
        if ia.map_or(true, |p| !extraspecial.contains(&p)) {
            return Err(ChevError::UnexpectedSeed(r.render(a), r.render(b)));
        }
    }
    for a in s.nonzero() {
        for b in s.nonzero() {
            if s.sum[a][b].is_some() && s.r_coefficient(a, b, r_scale)?.is_zero() {
                return Err(ChevError::VanishingProduct(s.render(a), s.render(b)));
            }
        }
    }
    let mut solver = Solver { s: &s, r_scale: r_scale.clone(), known: HashMap::new() };
    let mut mismatches = Vec::new();
    for (_, pairs) in &pc.by_sum {
        let (g, d) = pairs[0];
        let seed = seeds
            .get(&(s.root(g).clone(), s.root(d).clone()))
            .ok_or_else(|| ChevError::SeedMissing(s.render(g), s.render(d)))?;
        if seed.is_zero() {
            return Err(ChevError::ZeroSeed(s.render(g), s.render(d)));
        }
        solver.known.insert((g, d), seed.clone());
        for &(a, b) in &pairs[1..] {
            let v = solver.direct(a, b, g, d)?;
            if v.is_zero() {
                return Err(ChevError::InternalInconsistency(format!("N({}, {}) = 0", s.render(a), s.render(b))));
            }
            let w = solver.three_case(a, b, g, d)?;
            if w != v {
                mismatches.push((s.root(a).clone(), s.root(b).clone(), v.clone(), w));
            }
            solver.known.insert((a, b), v);
        }
    }
    let mut n = BTreeMap::new();
    for a in s.nonzero() {
        for b in s.nonzero() {
            if s.sum[a][b].is_some() {
                let v = solver.lookup(a, b)?;
                n.insert((s.root(a).clone(), s.root(b).clone()), v);
            }
        }
    }
    let base = rootsys::integral_base(r)?.roots;
    Ok(ConstantsTable {
        order: order.clone(),
        r_scale: r_scale.clone(),
        seeds: seeds.clone(),
        n,
        base,
        recursion_mismatches: mismatches,
    })
}

/// Default table: standard order, all seeds 1, r = 1.
pub fn default_constants(r: &RootSupersystem) -> Result<ConstantsTable, ChevError> {
    reject_a11(r)?;
    let order = TotalOrder::standard(r);
    let s = Signs::new(r, &order)?;
    let seeds = uniform_seeds(&s, &q(1));
    constants_from_seeds(r, &order, &seeds, &q(1))
}

/// Chevalley-basis algebra: Cartan elements h_{beta_i} over the integral
/// base, then one root vector per nonzero root in graded order.
pub fn assemble_algebra(r: &RootSupersystem, t: &ConstantsTable) -> Result<LieSuperalgebra, ChevError> {
    let s = Signs::new(r, &t.order)?;
    let l = t.base.len();
    let coords = Coordinates::new(&t.base.iter().map(|v| v.0.clone()).collect::<Vec<_>>())
        .ok_or_else(|| ChevError::InternalInconsistency("base not independent".into()))?;
    let roots: Vec<usize> = s.nonzero().collect();
    let mut basis: Vec<GradedBasisElement> =
        (0..l).map(|i| GradedBasisElement { label: Label::Cartan(i), parity: Parity::Even }).collect();
    let mut pos_of: HashMap<usize, usize> = HashMap::new();
    for &i in &roots {
        pos_of.insert(i, basis.len());
        basis.push(GradedBasisElement {
            label: Label::Root { root: s.root(i).clone(), slot: 0 },
            parity: Parity::from_bit(s.parity[i]),
        });
    }
    let dim = basis.len();
    let mut entries: Vec<(usize, usize, Vec<Q>)> = Vec::new();
    let unitv = |k: usize, c: Q| {
        let mut v = vec![Q::zero(); dim];
        v[k] = c;
        v
    };
    for (hi, bi) in t.base.iter().enumerate() {
        for &a in &roots {
            let c = &t.r_scale * r.ip(s.root(a), bi);
            if !c.is_zero() {
                entries.push((hi, pos_of[&a], unitv(pos_of[&a], c.clone())));
                entries.push((pos_of[&a], hi, unitv(pos_of[&a], -c)));
            }
        }
    }
    for &a in &roots {
        for &b in &roots {
            if let Some(c) = s.sum[a][b] {
                let v = t.get(s.root(a), s.root(b));
                entries.push((pos_of[&a], pos_of[&b], unitv(pos_of[&c], v)));
            } else if b == s.neg[a] {
                let hc = coords.coords(&s.root(a).0).ok_or_else(|| ChevError::InternalInconsistency("root outside base span".into()))?;
                let mut v = vec![Q::zero(); dim];
                for (k, c) in hc.into_iter().enumerate() {
                    v[k] = c * s.sigma_q(a);
                }
                entries.push((pos_of[&a], pos_of[&b], v));
            }
        }
    }
    let mut form = num::zeros(dim, dim);
    let r2 = &t.r_scale * &t.r_scale;
    for i in 0..l {
        for j in 0..l {
            form[i][j] = &r2 * r.ip(&t.base[i], &t.base[j]);
        }
    }
    for &a in &roots {
        form[pos_of[&a]][pos_of[&s.neg[a]]] = s.sigma_q(a) * &t.r_scale;
    }
    Ok(LieSuperalgebra::from_table(basis, entries, Some(form))?)
}

/// Exhaustive audit of the four constant identities.
pub fn verify_constants(r: &RootSupersystem, t: &ConstantsTable) -> Report {
    let mut rep = Report::default();
    let s = match Signs::new(r, &t.order) {
        Ok(s) => s,
        Err(e) => {
            rep.push("order", e.to_string());
            return rep;
        }
    };
    let nz: Vec<usize> = s.nonzero().collect();
    let n = |a: usize, b: usize| t.get(s.root(a), s.root(b));
    let w = |a: usize, b: usize| format!("({}, {})", s.render(a), s.render(b));
    for &a in &nz {
        for &b in &nz {
            rep.checked += 1;
            if n(a, b) != -(s.ks(a, b) * n(b, a)) {
                rep.push("i", w(a, b));
            }
            let Some(c) = s.sum[a][b] else {
                if !n(a, b).is_zero() {
                    rep.push("support", w(a, b));
                }
                continue;
            };
            rep.checked += 2;
            if n(a, b).is_zero() {
                rep.push("support", w(a, b));
            }
            if n(a, b) != s.sigma_q(a) * s.sigma_q(c) * n(b, s.neg[c]) {
                rep.push("ii", w(a, b));
            }
            match s.r_coefficient(a, b, &t.r_scale) {
                Ok(rc) if n(a, b) * n(s.neg[a], s.neg[b]) == rc => {}
                _ => rep.push("iii", w(a, b)),
            }
        }
    }
    let opposite = |x: usize, y: usize| s.neg[x] == y;
    for &a in &nz {
        for &b in &nz {
            if opposite(a, b) {
                continue;
            }
            for &g in &nz {
                if opposite(a, g) || opposite(b, g) {
                    continue;
                }
                let dv = s.root(a).add(s.root(b)).add(s.root(g)).neg();
                let Some(d) = s.idx(&dv) else { continue };
                if d == s.zero || opposite(a, d) || opposite(b, d) || opposite(g, d) {
                    continue;
                }
                rep.checked += 1;
                let sg = |x: usize, y: usize| s.sum[x][y].map_or(q(1), |k| s.sigma_q(k));
                let total = s.ks(a, g) * sg(a, b) * n(a, b) * n(g, d)
                    + s.ks(a, b) * sg(b, g) * n(b, g) * n(a, d)
                    + s.ks(b, g) * sg(a, g) * n(g, a) * n(b, d);
                if !total.is_zero() {
                    rep.push("iv", format!("({}, {}, {}, {})", s.render(a), s.render(b), s.render(g), s.render(d)));
                }
            }
        }
    }
    rep
}

/// Zero-sum triples must contain a special pair up to global sign.
pub fn special_pair_coverage(s: &Signs) -> Report {
    let mut rep = Report::default();
    let special: std::collections::HashSet<(usize, usize)> = pair_classes(s).special().collect();
    for a in s.nonzero() {
        for b in s.nonzero() {
            let Some(c) = s.sum[a][b] else { continue };
            rep.checked += 1;
            let g = s.neg[c];
            let cands = [(a, b), (a, g), (b, g), (b, a), (g, a), (g, b)];
            let found = cands
                .iter()
                .any(|&(x, y)| special.contains(&(x, y)) || special.contains(&(s.neg[x], s.neg[y])));
            if !found {
                rep.push("twelve-pairs", format!("({}, {})", s.render(a), s.render(b)));
            }
        }
    }
    rep
}

/// The linear map scaling e_alpha by phi(alpha), where phi is multiplicative
/// over the integral base, as a matrix on the assembled algebra.
pub fn diagonal_automorphism(
    r: &RootSupersystem,
    alg: &LieSuperalgebra,
    base: &[LatticeVector],
    phi: &[Q],
) -> Result<Mat, ChevError> {
    if phi.len() != base.len() || phi.iter().any(|x| x.is_zero()) {
        return Err(ChevError::InternalInconsistency("phi must be nonzero on every base root".into()));
    }
    let coords = Coordinates::new(&base.iter().map(|v| v.0.clone()).collect::<Vec<_>>())
        .ok_or_else(|| ChevError::InternalInconsistency("base not independent".into()))?;
    let n = alg.dim();
    let mut m = num::identity(n);
    for (i, b) in alg.basis.iter().enumerate() {
        if let Label::Root { root, .. } = &b.label {
            let c = coords.coords(&root.0).ok_or_else(|| ChevError::InternalInconsistency("root outside span".into()))?;
            let mut val = Q::one();
            for (ci, p) in c.iter().zip(phi) {
                if !ci.is_integer() {
                    return Err(ChevError::InternalInconsistency(format!("{} is not integral over the base", r.render(root))));
                }
                let k: i64 = i64::try_from(ci.to_integer()).unwrap_or(0);
                let pk = if k >= 0 { num_traits::pow(p.clone(), k as usize) } else { num_traits::pow(p.recip(), (-k) as usize) };
                val *= pk;
            }
            m[i][i] = val;
        }
    }
    Ok(m)
}

/// Checks `m [x, y] = [m x, m y]` on all basis pairs.
pub fn is_homomorphism(src: &LieSuperalgebra, dst: &LieSuperalgebra, m: &Mat) -> bool {
    let cols: Vec<Vec<Q>> = (0..src.dim()).map(|j| m.iter().map(|row| row[j].clone()).collect()).collect();
    for i in 0..src.dim() {
        for j in 0..src.dim() {
            let lhs = num::mat_vec(m, &src.dense(i, j));
            let rhs = dst.bracket(&cols[i], &cols[j]).unwrap();
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

pub mod json {
    use super::*;

    fn pair_json(a: &LatticeVector, b: &LatticeVector, key: &str, v: &Q) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("a".into(), rjson::vector_to_json(a));
        m.insert("b".into(), rjson::vector_to_json(b));
        m.insert(key.into(), json!(fmt_q(v)));
        Value::Object(m)
    }

    pub fn constants_to_json(r: &RootSupersystem, t: &ConstantsTable) -> Value {
        let mut m = serde_json::Map::new();
        m.insert("schema".into(), json!("constants.v1"));
        m.insert("rootsys".into(), rjson::rootsys_to_json(r));
        m.insert(
            "order".into(),
            json!(t.order.keys.iter().map(|k| k.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>()),
        );
        m.insert("rScale".into(), json!(fmt_q(&t.r_scale)));
        m.insert("seeds".into(), Value::Array(t.seeds.iter().map(|((a, b), v)| pair_json(a, b, "N", v)).collect()));
        m.insert("N".into(), Value::Array(t.n.iter().map(|((a, b), v)| pair_json(a, b, "val", v)).collect()));
        m.insert("base".into(), Value::Array(t.base.iter().map(rjson::vector_to_json).collect()));
        Value::Object(m)
    }

    pub fn constants_from_json(v: &Value) -> Option<(RootSupersystem, ConstantsTable)> {
        let r = rjson::rootsys_from_json(v.get("rootsys")?)?;
        let keys: Option<Vec<Vec<Q>>> = v
            .get("order")?
            .as_array()?
            .iter()
            .map(|k| k.as_array().and_then(|k| k.iter().map(|x| x.as_str().and_then(num::parse_q)).collect()))
            .collect();
        let r_scale = num::parse_q(v.get("rScale")?.as_str()?)?;
        let pairs = |name: &str, key: &str| -> Option<BTreeMap<(LatticeVector, LatticeVector), Q>> {
            v.get(name)?
                .as_array()?
                .iter()
                .map(|e| {
                    Some((
                        (rjson::vector_from_json(e.get("a")?)?, rjson::vector_from_json(e.get("b")?)?),
                        num::parse_q(e.get(key)?.as_str()?)?,
                    ))
                })
                .collect()
        };
        let seeds = pairs("seeds", "N")?;
        let n = pairs("N", "val")?;
        let base: Option<Vec<LatticeVector>> = v.get("base")?.as_array()?.iter().map(rjson::vector_from_json).collect();
        Some((
            r,
            ConstantsTable {
                order: TotalOrder { keys: keys? },
                r_scale,
                seeds,
                n,
                base: base?,
                recursion_mismatches: Vec::new(),
            },
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build, TypeDescriptor};

    fn v(xs: &[i64]) -> LatticeVector {
        LatticeVector::from_ints(xs)
    }

    #[test]
    fn signs_in_b11() {
        let r = build(&TypeDescriptor::new(Family::B1T, &[1, 1])).unwrap();
        let s = Signs::new(&r, &TotalOrder::standard(&r)).unwrap();
        let i = |x: &[i64]| s.idx(&v(x)).unwrap();
        assert!(s.positive[i(&[1, -1])]);
        assert_eq!(s.sigma[i(&[-1, -1])], -1);
        assert_eq!(s.sigma[i(&[0, -2])], 1);
        assert_eq!(s.sigma[i(&[0, -1])], -1);
    }

    #[test]
    fn pairs_in_b11() {
        let r = build(&TypeDescriptor::new(Family::B1T, &[1, 1])).unwrap();
        let s = Signs::new(&r, &TotalOrder::standard(&r)).unwrap();
        let pc = pair_classes(&s);
        let i = |x: &[i64]| s.idx(&v(x)).unwrap();
        let two_d = pc.by_sum.iter().find(|(c, _)| *c == i(&[0, 2])).unwrap();
        assert_eq!(two_d.1, vec![(i(&[0, 1]), i(&[0, 1]))]);
        let e1 = pc.by_sum.iter().find(|(c, _)| *c == i(&[1, 0])).unwrap();
        assert_eq!(e1.1, vec![(i(&[0, 1]), i(&[1, -1]))]);
        let a1 = build(&TypeDescriptor::new(Family::A, &[1])).unwrap();
        let s = Signs::new(&a1, &TotalOrder::standard(&a1)).unwrap();
        assert!(pair_classes(&s).by_sum.is_empty());
    }

    #[test]
    fn r_coefficients() {
        let r = build(&TypeDescriptor::new(Family::B0, &[1])).unwrap();
        let s = Signs::new(&r, &TotalOrder::standard(&r)).unwrap();
        let d = s.idx(&v(&[1])).unwrap();
        assert_eq!(s.r_coefficient(d, d, &q(1)).unwrap(), q(2));
        let r = build(&TypeDescriptor::new(Family::B1T, &[1, 1])).unwrap();
        let s = Signs::new(&r, &TotalOrder::standard(&r)).unwrap();
        let a = s.idx(&v(&[1, 1])).unwrap();
        let b = s.idx(&v(&[-1, 1])).unwrap();
        // beta is negative and odd under the standard order, so sigma_beta = -1
        assert_eq!(s.r_coefficient(a, b, &q(1)).unwrap(), q(-2));
        assert!(matches!(s.r_coefficient(a, a, &q(1)), Err(ChevError::SumNotRoot(_, _))));
    }

    #[test]
    fn b01_table() {
        let r = build(&TypeDescriptor::new(Family::B0, &[1])).unwrap();
        let order = TotalOrder::standard(&r);
        let mut seeds = BTreeMap::new();
        seeds.insert((v(&[1]), v(&[1])), q(3));
        let t = constants_from_seeds(&r, &order, &seeds, &q(1)).unwrap();
        assert_eq!(t.get(&v(&[-1]), &v(&[-1])), Q::new(2.into(), 3.into()));
        let alg = assemble_algebra(&r, &t).unwrap();
        assert_eq!(alg.dim(), 5);
        assert!(alg.jacobi_check().passed());
        assert!(verify_constants(&r, &t).passed());
    }

    #[test]
    fn a11_is_rejected() {
        let r = build(&TypeDescriptor::new(Family::All, &[1])).unwrap();
        assert_eq!(default_constants(&r).unwrap_err(), ChevError::TypeA11Unsupported);
    }

    #[test]
    fn missing_seed() {
        let r = build(&TypeDescriptor::new(Family::A, &[2])).unwrap();
        let e = constants_from_seeds(&r, &TotalOrder::standard(&r), &BTreeMap::new(), &q(1));
        assert!(matches!(e, Err(ChevError::SeedMissing(_, _))));
    }

    #[test]
    fn a2_matches_sl3_magnitudes() {
        let r = build(&TypeDescriptor::new(Family::A, &[2])).unwrap();
        let t = default_constants(&r).unwrap();
        assert!(t.n.values().all(|x| x.abs() == q(1)));
        assert!(verify_constants(&r, &t).passed());
    }

    #[test]
    fn sign_flip_is_caught() {
        let r = build(&TypeDescriptor::new(Family::B1T, &[1, 1])).unwrap();
        let mut t = default_constants(&r).unwrap();
        let k = t.n.keys().next().unwrap().clone();
        let x = t.n[&k].clone();
        t.n.insert(k, -x);
        let rep = verify_constants(&r, &t);
        assert!(rep.violations.iter().any(|v| v.axiom == "ii"));
    }

    #[test]
    fn diagonal_automorphisms() {
        let r = build(&TypeDescriptor::new(Family::A, &[2])).unwrap();
        let t = default_constants(&r).unwrap();
        let alg = assemble_algebra(&r, &t).unwrap();
        let id = diagonal_automorphism(&r, &alg, &t.base, &[q(1), q(1)]).unwrap();
        assert_eq!(id, num::identity(alg.dim()));
        let m = diagonal_automorphism(&r, &alg, &t.base, &[q(2), q(1)]).unwrap();
        let changed = (0..alg.dim()).filter(|&i| m[i][i] != q(1)).count();
        assert_eq!(changed, 4);
        assert!(is_homomorphism(&alg, &alg, &m));
        let inv = diagonal_automorphism(&r, &alg, &t.base, &[Q::new(1.into(), 2.into()), q(1)]).unwrap();
        assert_eq!(num::mat_mul(&m, &inv), num::identity(alg.dim()));
    }
}
