//! Algebra maps induced by root-system isomorphisms, and the finite-rank
//! conjugacy verdict for Cartan subalgebras.

use std::collections::BTreeMap;

use serde_json::{json, Value};
use thiserror::Error;

use crate::chevalley::{self, ChevError, ConstantsTable, TotalOrder};
use crate::num::{self, fmt_q, Coordinates, Mat, Q};
use crate::rootsys::{self, LatticeVector, Report, RootIso, RootSupersystem};
use crate::superalg::{Label, LieSuperalgebra};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompareError {
    #[error("constants disagree under the root map at ({0}, {1})")]
    SeedMismatch(String, String),
    #[error("scales do not satisfy r = s k")]
    ScaleMismatch,
    #[error("map is not a homomorphism: {0}")]
    NotHomomorphism(String),
    #[error("root map does not carry the first system onto the second")]
    BadRootMap,
    #[error(transparent)]
    Chev(#[from] ChevError),
}

/// Linear map between algebras; column j is the image of source basis
/// element j.
#[derive(Clone, Debug)]
pub struct AlgebraMap {
    pub source: LieSuperalgebra,
    pub target: LieSuperalgebra,
    pub matrix: Mat,
    pub iso: bool,
}

impl AlgebraMap {
    pub fn image(&self, j: usize) -> Vec<Q> {
        self.matrix.iter().map(|row| row[j].clone()).collect()
    }

    pub fn verify(&self) -> Report {
        verify_homomorphism(self)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "schema": "algebramap.v1",
            "source": "superalg.v1",
            "target": "superalg.v1",
            "iso": self.iso,
            "matrix": self.matrix.iter().map(|r| r.iter().map(fmt_q).collect::<Vec<_>>()).collect::<Vec<_>>(),
        })
    }
}

/// Bracket preservation on all basis pairs, parity preservation, and
/// invertibility when the map is flagged as an isomorphism.
pub fn verify_homomorphism(map: &AlgebraMap) -> Report {
    let mut rep = Report::default();
    let (src, dst) = (&map.source, &map.target);
    if map.matrix.len() != dst.dim() || map.matrix.iter().any(|r| r.len() != src.dim()) {
        rep.push("shape", format!("{}x? for {} -> {}", map.matrix.len(), src.dim(), dst.dim()));
        return rep;
    }
    let cols: Vec<Vec<Q>> = (0..src.dim()).map(|j| map.image(j)).collect();
    for (j, c) in cols.iter().enumerate() {
        rep.checked += 1;
        if !num::vec_is_zero(c) && dst.parity_of(c) != Some(src.parity(j)) {
            rep.push("parity", format!("basis element {}", j));
        }
    }
    for i in 0..src.dim() {
        for j in 0..src.dim() {
            rep.checked += 1;
            let lhs = num::mat_vec(&map.matrix, &src.dense(i, j));
            let rhs = dst.bracket(&cols[i], &cols[j]).expect("dimensions checked");
            if lhs != rhs {
                rep.push("bracket", format!("({}, {})", i, j));
                if rep.violations.len() > 20 {
                    return rep;
                }
            }
        }
    }
    if map.iso {
        rep.checked += 1;
        if src.dim() != dst.dim() || num::inverse(&map.matrix).is_none() {
            rep.push("invertible", "matrix is singular".into());
        }
    }
    rep
}

/// The map h_{beta_i} -> h'_{f(beta_i)}, e_alpha -> x_{f(alpha)} between
/// the assembled algebras of two tables, after checking that the tables
/// agree under `f` and that r = s k.
pub fn transport_iso(
    r: &RootSupersystem,
    t: &ConstantsTable,
    s: &RootSupersystem,
    t2: &ConstantsTable,
    f: &RootIso,
) -> Result<AlgebraMap, CompareError> {
    if !f.verify(r, s) {
        return Err(CompareError::BadRootMap);
    }
    if t.r_scale != &t2.r_scale * &f.k {
        return Err(CompareError::ScaleMismatch);
    }
    for ((a, b), v) in &t.n {
        let (fa, fb) = (f.apply(a).unwrap(), f.apply(b).unwrap());
        if t2.get(&fa, &fb) != *v {
            return Err(CompareError::SeedMismatch(r.render(a), r.render(b)));
        }
    }
    let g = chevalley::assemble_algebra(r, t)?;
    let l = chevalley::assemble_algebra(s, t2)?;
    let coords = Coordinates::new(&t2.base.iter().map(|v| v.0.clone()).collect::<Vec<_>>())
        .ok_or_else(|| ChevError::InternalInconsistency("target base not independent".into()))?;
    let target_index = l.label_index();
    let mut m = num::zeros(l.dim(), g.dim());
    for (j, b) in g.basis.iter().enumerate() {
        match &b.label {
            Label::Cartan(i) => {
                let img = f.apply(&t.base[*i]).ok_or(CompareError::BadRootMap)?;
                let c = coords.coords(&img.0).ok_or(CompareError::BadRootMap)?;
                for (k, ci) in c.into_iter().enumerate() {
                    m[k][j] = ci;
                }
            }
            Label::Root { root, slot } => {
                let img = f.apply(root).ok_or(CompareError::BadRootMap)?;
                let k = target_index.get(&Label::Root { root: img, slot: *slot }).ok_or(CompareError::BadRootMap)?;
                m[*k][j] = num::q(1);
            }
        }
    }
    let map = AlgebraMap { source: g, target: l, matrix: m, iso: true };
    let rep = verify_homomorphism(&map);
    if let Some(v) = rep.violations.first() {
        return Err(CompareError::NotHomomorphism(format!("{} {}", v.axiom, v.witness)));
    }
    Ok(map)
}

/// Image of a constants table under a root isomorphism: order, seeds and
/// constants are carried by `f` and the scale divided by `k`.
pub fn transport_table(s: &RootSupersystem, t: &ConstantsTable, f: &RootIso) -> Result<ConstantsTable, CompareError> {
    let order = t.order.transport(f, s.dim()).ok_or(CompareError::BadRootMap)?;
    let map = |m: &BTreeMap<(LatticeVector, LatticeVector), Q>| -> Result<BTreeMap<(LatticeVector, LatticeVector), Q>, CompareError> {
        m.iter()
            .map(|((a, b), v)| Ok(((f.apply(a).ok_or(CompareError::BadRootMap)?, f.apply(b).ok_or(CompareError::BadRootMap)?), v.clone())))
            .collect()
    };
    Ok(ConstantsTable {
        order,
        r_scale: &t.r_scale / &f.k,
        seeds: map(&t.seeds)?,
        n: map(&t.n)?,
        base: rootsys::integral_base(s).map_err(ChevError::from)?.roots,
        recursion_mismatches: Vec::new(),
    })
}

/// Seeds, scale and order for `s` matching a table on `r` under `f`.
pub fn transported_inputs(
    s: &RootSupersystem,
    t: &ConstantsTable,
    f: &RootIso,
) -> Result<(TotalOrder, BTreeMap<(LatticeVector, LatticeVector), Q>, Q), CompareError> {
    let tt = transport_table(s, t, f)?;
    Ok((tt.order, tt.seeds, tt.r_scale))
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Conjugate(RootIso),
    NotConjugate,
}

impl Verdict {
    pub fn is_conjugate(&self) -> bool {
        matches!(self, Verdict::Conjugate(_))
    }
}

/// Two Cartan subalgebras with root systems R and S are conjugate exactly
/// when R and S are isomorphic.
pub fn conjugacy_verdict(r: &RootSupersystem, s: &RootSupersystem) -> Verdict {
    match rootsys::is_isomorphic(r, s) {
        Some(f) => Verdict::Conjugate(f),
        None => Verdict::NotConjugate,
    }
}

/// Entries where two tables over the same root system differ.
pub fn table_differences(a: &ConstantsTable, b: &ConstantsTable) -> Vec<(LatticeVector, LatticeVector, Q, Q)> {
    let mut keys: Vec<&(LatticeVector, LatticeVector)> = a.n.keys().chain(b.n.keys()).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .filter_map(|k| {
            let (x, y) = (a.get(&k.0, &k.1), b.get(&k.0, &k.1));
            (x != y).then(|| (k.0.clone(), k.1.clone(), x, y))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::Zero;
    use crate::chevalley::{constants_from_seeds, default_constants};
    use crate::num::q;
    use crate::rootsys::{build, Family, TypeDescriptor};

    fn sys(f: Family, r: &[u32]) -> RootSupersystem {
        build(&TypeDescriptor::new(f, r)).unwrap()
    }

    #[test]
    fn identity_transport() {
        let r = sys(Family::B1T, &[1, 1]);
        let t = default_constants(&r).unwrap();
        let f = RootIso::identity(&r).unwrap();
        let m = transport_iso(&r, &t, &r, &t, &f).unwrap();
        assert_eq!(m.matrix, num::identity(m.source.dim()));
    }

    #[test]
    fn reordered_b11() {
        let r = sys(Family::B1T, &[1, 1]);
        let t = default_constants(&r).unwrap();
        // the automorphism d1 -> -d1 carries the standard order to another one
        let base = rootsys::integral_base(&r).unwrap().roots;
        let images: Vec<LatticeVector> = base.iter().map(|v| LatticeVector(vec![v.0[0].clone(), -v.0[1].clone()])).collect();
        let f = RootIso::new(base, images, q(1)).unwrap();
        assert!(f.verify(&r, &r));
        let (order, seeds, scale) = transported_inputs(&r, &t, &f).unwrap();
        assert_ne!(order, t.order);
        let t2 = constants_from_seeds(&r, &order, &seeds, &scale).unwrap();
        assert_eq!(transport_table(&r, &t, &f).unwrap().n, t2.n);
        let m = transport_iso(&r, &t, &r, &t2, &f).unwrap();
        assert!(verify_homomorphism(&m).passed());
        // going back along the inverse gives the identity
        let back = transport_iso(&r, &t2, &r, &t, &f.inverse().unwrap()).unwrap();
        assert_eq!(num::mat_mul(&back.matrix, &m.matrix), num::identity(m.source.dim()));
    }

    #[test]
    fn mutation_is_caught() {
        let r = sys(Family::B1T, &[1, 1]);
        let t = default_constants(&r).unwrap();
        let f = RootIso::identity(&r).unwrap();
        let mut m = transport_iso(&r, &t, &r, &t, &f).unwrap();
        let odd = (0..m.source.dim()).find(|&i| m.source.parity(i) == crate::superalg::Parity::Odd).unwrap();
        m.matrix[odd][odd] = q(2);
        let rep = verify_homomorphism(&m);
        assert!(!rep.passed());
        assert_eq!(rep.violations[0].axiom, "bracket");
    }

    #[test]
    fn verdicts() {
        let b22 = sys(Family::BTT, &[2, 2]);
        let d22 = sys(Family::D2T, &[2, 2]);
        assert!(conjugacy_verdict(&b22, &b22).is_conjugate());
        assert!(!conjugacy_verdict(&b22, &d22).is_conjugate());
        assert!(!conjugacy_verdict(&d22, &b22).is_conjugate());
        let a = sys(Family::ADot0, &[2]);
        let scaled = a.with_form(a.form.scaled(&q(3)));
        match conjugacy_verdict(&a, &scaled) {
            Verdict::Conjugate(f) => assert!(!f.k.is_zero() && f.k != q(1)),
            Verdict::NotConjugate => panic!(),
        }
    }
}
