//! Dense exact linear algebra over the rationals.

use num_traits::{One, Zero};

use crate::expr::Rational;

pub type Vector = Vec<Rational>;

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: Vec<Vector>,
    cols: usize,
}

/// Reduced row echelon form together with its pivot columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Rref {
    pub rows: Vec<Vector>,
    pub pivots: Vec<usize>,
    pub cols: usize,
}

impl Matrix {
    pub fn new(cols: usize) -> Self {
        Matrix { rows: Vec::new(), cols }
    }

    pub fn from_rows(cols: usize, rows: Vec<Vector>) -> Self {
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix");
        Matrix { rows, cols }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { Rational::one() } else { Rational::zero() })
                    .collect()
            })
            .collect();
        Matrix { rows, cols: n }
    }

    pub fn push_row(&mut self, row: Vector) {
        assert_eq!(row.len(), self.cols);
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Vector] {
        &self.rows
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.rows[i][j]
    }

    pub fn transpose(&self) -> Matrix {
        let rows = (0..self.cols)
            .map(|j| self.rows.iter().map(|r| r[j].clone()).collect())
            .collect();
        Matrix {
            rows,
            cols: self.rows.len(),
        }
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        assert_eq!(self.cols, other.nrows());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..other.cols)
                    .map(|j| {
                        r.iter()
                            .zip(&other.rows)
                            .fold(Rational::zero(), |acc, (a, orow)| acc + a * &orow[j])
                    })
                    .collect()
            })
            .collect();
        Matrix { rows, cols: other.cols }
    }

    pub fn apply(&self, v: &[Rational]) -> Vector {
        self.rows
            .iter()
            .map(|r| r.iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|r| r.iter().all(Zero::is_zero))
    }

    /// Gauss-Jordan elimination, pivoting on the earliest available column.
    pub fn rref(&self) -> Rref {
        let mut rows = self.rows.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            let Some(p) = (r..rows.len()).find(|&k| !rows[k][c].is_zero()) else {
                continue;
            };
            rows.swap(r, p);
            let inv = rows[r][c].recip();
            for x in rows[r].iter_mut() {
                *x *= &inv;
            }
            let pivot_row = rows[r].clone();
            for (k, row) in rows.iter_mut().enumerate() {
                if k == r || row[c].is_zero() {
                    continue;
                }
                let f = row[c].clone();
                for (x, p) in row.iter_mut().zip(&pivot_row) {
                    if !p.is_zero() {
                        *x -= &f * p;
                    }
                }
            }
            pivots.push(c);
            r += 1;
            if r == rows.len() {
                break;
            }
        }
        rows.truncate(r);
        Rref {
            rows,
            pivots,
            cols: self.cols,
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().pivots.len()
    }

    pub fn nullspace(&self) -> Vec<Vector> {
        self.rref().nullspace()
    }

    /// Solves `self * x = b` exactly; `None` when inconsistent. Free
    /// variables are set to zero.
    pub fn solve(&self, b: &[Rational]) -> Option<Vector> {
        assert_eq!(b.len(), self.rows.len());
        let aug = Matrix::from_rows(
            self.cols + 1,
            self.rows
                .iter()
                .zip(b)
                .map(|(r, bi)| r.iter().cloned().chain(std::iter::once(bi.clone())).collect())
                .collect(),
        );
        let red = aug.rref();
        if red.pivots.last() == Some(&self.cols) {
            return None;
        }
        let mut x = vec![Rational::zero(); self.cols];
        for (row, &p) in red.rows.iter().zip(&red.pivots) {
            x[p] = row[self.cols].clone();
        }
        Some(x)
    }
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    pub fn free_columns(&self) -> Vec<usize> {
        (0..self.cols).filter(|c| !self.pivots.contains(c)).collect()
    }

    /// One basis vector per free column, with that column set to one.
    pub fn nullspace(&self) -> Vec<Vector> {
        self.free_columns()
            .into_iter()
            .map(|f| {
                let mut v = vec![Rational::zero(); self.cols];
                v[f] = Rational::one();
                for (row, &p) in self.rows.iter().zip(&self.pivots) {
                    v[p] = -row[f].clone();
                }
                v
            })
            .collect()
    }
}

/// Incrementally maintained row echelon basis of a row space; rows that are
/// already in the span are discarded on insertion.
#[derive(Debug, Clone)]
pub struct EchelonBasis {
    cols: usize,
    rows: Vec<(usize, Vector)>,
}

impl EchelonBasis {
    pub fn new(cols: usize) -> Self {
        EchelonBasis { cols, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, mut v: Vector) -> Vector {
        for (p, row) in &self.rows {
            if v[*p].is_zero() {
                continue;
            }
            let f = v[*p].clone();
            for (x, r) in v.iter_mut().zip(row) {
                if !r.is_zero() {
                    *x -= &f * r;
                }
            }
        }
        v
    }

    /// Returns true when `v` enlarged the span.
    pub fn insert(&mut self, v: Vector) -> bool {
        assert_eq!(v.len(), self.cols);
        let mut v = self.reduce(v);
        let Some(p) = v.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = v[p].recip();
        for x in v.iter_mut() {
            *x *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if row[p].is_zero() {
                continue;
            }
            let f = row[p].clone();
            for (x, r) in row.iter_mut().zip(&v) {
                if !r.is_zero() {
                    *x -= &f * r;
                }
            }
        }
        self.rows.push((p, v));
        true
    }

    pub fn contains(&self, v: &[Rational]) -> bool {
        self.reduce(v.to_vec()).iter().all(Zero::is_zero)
    }

    pub fn to_matrix(&self) -> Matrix {
        let mut rows = self.rows.clone();
        rows.sort_by_key(|(p, _)| *p);
        Matrix::from_rows(self.cols, rows.into_iter().map(|(_, r)| r).collect())
    }

    pub fn basis(&self) -> Vec<Vector> {
        self.to_matrix().rows
    }
}

pub fn span_contains(basis: &[Vector], v: &[Rational]) -> bool {
    let mut e = EchelonBasis::new(v.len());
    for b in basis {
        e.insert(b.clone());
    }
    e.contains(v)
}
