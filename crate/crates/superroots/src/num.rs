//! Exact rational scalars and the small dense linear algebra the rest of the
//! crate leans on.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// Canonical `p/q` text form; the denominator is always written.
pub fn fmt_q(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((a, b)) => {
            let n: BigInt = a.trim().parse().ok()?;
            let d: BigInt = b.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Q::from_integer),
    }
}

pub fn is_integer(x: &Q) -> bool {
    x.is_integer()
}

pub fn sign(x: &Q) -> i32 {
    if x.is_zero() {
        0
    } else if x.is_positive() {
        1
    } else {
        -1
    }
}

pub type Mat = Vec<Vec<Q>>;

pub fn zeros(r: usize, c: usize) -> Mat {
    vec![vec![Q::zero(); c]; r]
}

pub fn identity(n: usize) -> Mat {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Q::one();
    }
    m
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let k = b.len();
    let m = if k == 0 { 0 } else { b[0].len() };
    let mut out = zeros(n, m);
    for i in 0..n {
        for (l, bl) in b.iter().enumerate() {
            let x = &a[i][l];
            if x.is_zero() {
                continue;
            }
            for j in 0..m {
                if !bl[j].is_zero() {
                    out[i][j] += x * &bl[j];
                }
            }
        }
    }
    out
}

pub fn mat_vec(a: &Mat, v: &[Q]) -> Vec<Q> {
    a.iter()
        .map(|row| {
            row.iter()
                .zip(v)
                .filter(|(x, y)| !x.is_zero() && !y.is_zero())
                .fold(Q::zero(), |acc, (x, y)| acc + x * y)
        })
        .collect()
}

pub fn transpose(a: &Mat) -> Mat {
    if a.is_empty() {
        return vec![];
    }
    let (r, c) = (a.len(), a[0].len());
    let mut t = zeros(c, r);
    for i in 0..r {
        for j in 0..c {
            t[j][i] = a[i][j].clone();
        }
    }
    t
}

pub fn dot(a: &[Q], b: &[Q]) -> Q {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Q::zero(), |acc, (x, y)| acc + x * y)
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut Mat) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return vec![];
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            if !x.is_zero() {
                *x *= &inv;
            }
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                let (src, dst) = if i < r {
                    let (a, b) = m.split_at_mut(r);
                    (&b[0], &mut a[i])
                } else {
                    let (a, b) = m.split_at_mut(i);
                    (&a[r], &mut b[0])
                };
                for (d, s) in dst.iter_mut().zip(src.iter()) {
                    if !s.is_zero() {
                        *d -= &f * s;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Mat) -> usize {
    let mut c = m.clone();
    rref(&mut c).len()
}

pub fn determinant(m: &Mat) -> Q {
    let n = m.len();
    let mut a = m.clone();
    let mut det = Q::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Q::zero();
        };
        if p != c {
            a.swap(p, c);
            det = -det;
        }
        det *= &a[c][c];
        let inv = a[c][c].recip();
        for i in (c + 1)..n {
            if a[i][c].is_zero() {
                continue;
            }
            let f = &a[i][c] * &inv;
            for j in c..n {
                let t = &f * &a[c][j];
                a[i][j] -= t;
            }
        }
    }
    det
}

/// Basis of the right null space `{x : m x = 0}`.
pub fn nullspace(m: &Mat, cols: usize) -> Vec<Vec<Q>> {
    let mut a = m.clone();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Q::zero(); cols];
            v[f] = Q::one();
            for (r, &p) in pivots.iter().enumerate() {
                v[p] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// One solution of `m x = b`, free variables set to zero.
pub fn solve(m: &Mat, b: &[Q]) -> Option<Vec<Q>> {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    let mut aug: Mat = m
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.last() == Some(&cols) {
        return None;
    }
    let mut x = vec![Q::zero(); cols];
    for (r, &p) in pivots.iter().enumerate() {
        x[p] = aug[r][cols].clone();
    }
    Some(x)
}

pub fn inverse(m: &Mat) -> Option<Mat> {
    let n = m.len();
    let mut aug: Mat = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Q::one() } else { Q::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Incrementally maintained row space used for span membership and
/// coordinates against a fixed generating list.
#[derive(Clone, Debug, Default)]
pub struct Span {
    rows: Vec<(usize, Vec<Q>)>,
    dim: usize,
}

impl Span {
    pub fn new(dim: usize) -> Self {
        Span { rows: Vec::new(), dim }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn reduce(&self, v: &[Q]) -> Vec<Q> {
        let mut w = v.to_vec();
        for (p, row) in &self.rows {
            if !w[*p].is_zero() {
                let f = w[*p].clone();
                for (a, b) in w.iter_mut().zip(row) {
                    if !b.is_zero() {
                        *a -= &f * b;
                    }
                }
            }
        }
        w
    }

    /// Adds `v`; returns true when it enlarged the span.
    pub fn insert(&mut self, v: &[Q]) -> bool {
        debug_assert_eq!(v.len(), self.dim);
        let w = self.reduce(v);
        let Some(p) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = w[p].recip();
        let w: Vec<Q> = w.into_iter().map(|x| x * &inv).collect();
        for (_, row) in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let f = row[p].clone();
                for (a, b) in row.iter_mut().zip(&w) {
                    if !b.is_zero() {
                        *a -= &f * b;
                    }
                }
            }
        }
        self.rows.push((p, w));
        true
    }

    pub fn contains(&self, v: &[Q]) -> bool {
        self.reduce(v).iter().all(|x| x.is_zero())
    }
}

/// Coordinates of vectors with respect to a fixed linearly independent list.
#[derive(Clone, Debug)]
pub struct Coordinates {
    pivots: Vec<usize>,
    // rows of the reduced matrix [B^T | I] restricted to pivot rows
    reduced: Mat,
    n: usize,
}

impl Coordinates {
    /// `basis` must be linearly independent.
    pub fn new(basis: &[Vec<Q>]) -> Option<Self> {
        let n = basis.len();
        if n == 0 {
            return Some(Coordinates { pivots: vec![], reduced: vec![], n: 0 });
        }
        let dim = basis[0].len();
        // Solve B^T c = v via rref of [B^T].
        let bt: Mat = (0..dim)
            .map(|i| basis.iter().map(|b| b[i].clone()).collect())
            .collect();
        let mut aug: Mat = bt
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..dim).map(|j| if i == j { Q::one() } else { Q::zero() }));
                r
            })
            .collect();
        let piv = rref(&mut aug);
        if piv.iter().filter(|&&p| p < n).count() < n {
            return None;
        }
        Some(Coordinates { pivots: piv, reduced: aug, n })
    }

    /// Coefficients `c` with `sum c_i basis_i = v`, or None when `v` is outside the span.
    pub fn coords(&self, v: &[Q]) -> Option<Vec<Q>> {
        let dim = v.len();
        let mut c = vec![Q::zero(); self.n];
        for (r, &p) in self.pivots.iter().enumerate() {
            let row = &self.reduced[r];
            let val = row[self.n..self.n + dim]
                .iter()
                .zip(v)
                .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                .fold(Q::zero(), |acc, (a, b)| acc + a * b);
            if p < self.n {
                c[p] = val;
            } else if !val.is_zero() {
                return None;
            }
        }
        // rows without pivot in the first n columns also constrain v
        for r in self.pivots.len()..self.reduced.len() {
            let row = &self.reduced[r];
            let val = row[self.n..self.n + dim]
                .iter()
                .zip(v)
                .fold(Q::zero(), |acc, (a, b)| acc + a * b);
            if !val.is_zero() {
                return None;
            }
        }
        Some(c)
    }
}

pub fn vec_is_zero(v: &[Q]) -> bool {
    v.iter().all(|x| x.is_zero())
}

pub fn abs(x: &Q) -> Q {
    x.abs()
}
