//! Small exact linear algebra over the ground field: dense reduced row
//! echelon form, rank, kernel bases and determinants. Everything is exact;
//! sizes here are a few hundred at most.

use crate::field::Field;

#[derive(Clone, Debug)]
pub struct DenseMatrix<F> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Vec<F>>,
}

impl<F: Field> DenseMatrix<F> {
    pub fn zero(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![vec![F::zero(); cols]; rows],
        }
    }

    pub fn from_rows(data: Vec<Vec<F>>) -> Self {
        let rows = data.len();
        let cols = data.first().map(|r| r.len()).unwrap_or(0);
        DenseMatrix { rows, cols, data }
    }

    /// In-place Gauss-Jordan; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..self.cols {
            if r == self.rows {
                break;
            }
            let Some(p) = (r..self.rows).find(|&i| !self.data[i][c].is_zero()) else {
                continue;
            };
            self.data.swap(r, p);
            let inv = self.data[r][c].inv().expect("nonzero pivot");
            for x in self.data[r].iter_mut() {
                *x = x.clone() * inv.clone();
            }
            for i in 0..self.rows {
                if i != r && !self.data[i][c].is_zero() {
                    let f = self.data[i][c].clone();
                    for j in 0..self.cols {
                        let sub = f.clone() * self.data[r][j].clone();
                        self.data[i][j] = self.data[i][j].clone() - sub;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(mut self) -> usize {
        self.rref().len()
    }

    /// Basis of the right kernel.
    pub fn kernel(mut self) -> Vec<Vec<F>> {
        let pivots = self.rref();
        let mut is_pivot = vec![None; self.cols];
        for (r, &c) in pivots.iter().enumerate() {
            is_pivot[c] = Some(r);
        }
        let mut basis = Vec::new();
        for c in 0..self.cols {
            if is_pivot[c].is_some() {
                continue;
            }
            let mut v = vec![F::zero(); self.cols];
            v[c] = F::one();
            for (cc, rr) in is_pivot.iter().enumerate() {
                if let Some(r) = rr {
                    v[cc] = -self.data[*r][c].clone();
                }
            }
            basis.push(v);
        }
        basis
    }

    /// Determinant by fraction-free-ish elimination (fields, so plain
    /// Gaussian elimination).
    pub fn det(mut self) -> F {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut det = F::one();
        for c in 0..n {
            let Some(p) = (c..n).find(|&i| !self.data[i][c].is_zero()) else {
                return F::zero();
            };
            if p != c {
                self.data.swap(c, p);
                det = -det;
            }
            let pivot = self.data[c][c].clone();
            det = det * pivot.clone();
            let inv = pivot.inv().unwrap();
            for i in c + 1..n {
                if self.data[i][c].is_zero() {
                    continue;
                }
                let f = self.data[i][c].clone() * inv.clone();
                for j in c..n {
                    let sub = f.clone() * self.data[c][j].clone();
                    self.data[i][j] = self.data[i][j].clone() - sub;
                }
            }
        }
        det
    }
}

/// Sparse row-space accumulator keyed by column index, used where matrices
/// are far too large to store densely (the truncation oracle and the
/// bimodule rank checks).
pub struct SparseSpan<F> {
    /// pivot column -> reduced row (pivot coefficient 1)
    pub pivots: std::collections::BTreeMap<u32, std::collections::BTreeMap<u32, F>>,
}

impl<F: Field> Default for SparseSpan<F> {
    fn default() -> Self {
        SparseSpan {
            pivots: Default::default(),
        }
    }
}

impl<F: Field> SparseSpan<F> {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Reduce `v` against the span; the remainder has no pivot columns.
    pub fn reduce(&self, mut v: std::collections::BTreeMap<u32, F>) -> std::collections::BTreeMap<u32, F> {
        loop {
            let Some((&c, coeff)) = v.iter().find(|(c, _)| self.pivots.contains_key(c)) else {
                return v;
            };
            let coeff = coeff.clone();
            let row = &self.pivots[&c];
            for (j, x) in row {
                let cur = v.remove(j).unwrap_or_else(F::zero);
                let nv = cur - coeff.clone() * x.clone();
                if !nv.is_zero() {
                    v.insert(*j, nv);
                }
            }
        }
    }

    /// Insert after reduction; returns true when the vector was new
    /// (increased the rank).
    pub fn insert(&mut self, v: std::collections::BTreeMap<u32, F>) -> bool {
        let v = self.reduce(v);
        let Some((&c, coeff)) = v.iter().next() else {
            return false;
        };
        let inv = coeff.clone().inv().expect("field");
        let row: std::collections::BTreeMap<u32, F> = v
            .into_iter()
            .map(|(j, x)| (j, x * inv.clone()))
            .collect();
        // Back-substitute into existing rows to keep reduction one-pass.
        let mut updates = Vec::new();
        for (&p, prow) in &self.pivots {
            if let Some(f) = prow.get(&c) {
                let f = f.clone();
                let mut nr = prow.clone();
                for (j, x) in &row {
                    let cur = nr.remove(j).unwrap_or_else(F::zero);
                    let nv = cur - f.clone() * x.clone();
                    if !nv.is_zero() {
                        nr.insert(*j, nv);
                    }
                }
                updates.push((p, nr));
            }
        }
        for (p, nr) in updates {
            self.pivots.insert(p, nr);
        }
        self.pivots.insert(c, row);
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Rat;

    fn q(n: i64) -> Rat {
        Rat::from_integer(n.into())
    }

    #[test]
    fn rref_rank_kernel() {
        let m = DenseMatrix::from_rows(vec![
            vec![q(1), q(2), q(3)],
            vec![q(2), q(4), q(6)],
            vec![q(0), q(1), q(1)],
        ]);
        assert_eq!(m.clone().rank(), 2);
        let k = m.kernel();
        assert_eq!(k.len(), 1);
        assert_eq!(k[0], vec![-q(1), -q(1), q(1)]);
    }

    #[test]
    fn det_small() {
        let m = DenseMatrix::from_rows(vec![vec![q(2), q(1)], vec![q(1), q(1)]]);
        assert_eq!(m.det(), q(1));
    }

    #[test]
    fn sparse_span_rank() {
        let mut s: SparseSpan<Rat> = SparseSpan::default();
        let row = |v: &[(u32, i64)]| {
            v.iter()
                .map(|&(c, x)| (c, q(x)))
                .collect::<std::collections::BTreeMap<_, _>>()
        };
        assert!(s.insert(row(&[(0, 1), (1, 2)])));
        assert!(s.insert(row(&[(1, 1), (2, 1)])));
        assert!(!s.insert(row(&[(0, 1), (1, 1), (2, -1)])));
        assert_eq!(s.rank(), 2);
    }
}
