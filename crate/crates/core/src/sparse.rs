//! Square complex CSR matrices with canonical (sorted, zero-free) storage,
//! so two matrices are equal exactly when their entries are.

use std::io::Write;

use num_complex::Complex64 as C64;
use rayon::prelude::*;

use crate::error::{Error, Result};

const CZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    dim: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<C64>,
}

impl SparseMatrix {
    pub fn zeros(dim: usize) -> Self {
        SparseMatrix {
            dim,
            indptr: vec![0; dim + 1],
            indices: Vec::new(),
            data: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(&vec![1.0; dim])
    }

    pub fn diagonal(diag: &[f64]) -> Self {
        let rows = diag
            .iter()
            .enumerate()
            .map(|(i, d)| vec![(i, C64::new(*d, 0.0))])
            .collect();
        Self::from_rows(diag.len(), rows)
    }

    /// Builds from (row, col, value) triplets; duplicates are summed in
    /// input order and exact zeros dropped.
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, C64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); dim];
        for &(r, c, v) in triplets {
            if r >= dim || c >= dim {
                return Err(Error::invalid(format!(
                    "entry ({r}, {c}) outside dimension {dim}"
                )));
            }
            rows[r].push((c, v));
        }
        let rows = rows
            .into_iter()
            .map(|mut row| {
                row.sort_by_key(|e| e.0);
                let mut merged: Vec<(usize, C64)> = Vec::with_capacity(row.len());
                for (c, v) in row {
                    match merged.last_mut() {
                        Some(last) if last.0 == c => last.1 += v,
                        _ => merged.push((c, v)),
                    }
                }
                merged
            })
            .collect();
        Ok(Self::from_rows(dim, rows))
    }

    /// Rows must be sorted by column without duplicates.
    fn from_rows(dim: usize, rows: Vec<Vec<(usize, C64)>>) -> Self {
        let mut indptr = Vec::with_capacity(dim + 1);
        let mut indices = Vec::new();
        let mut data = Vec::new();
        indptr.push(0);
        for row in rows {
            for (c, v) in row {
                if v != CZERO {
                    indices.push(c);
                    data.push(v);
                }
            }
            indptr.push(indices.len());
        }
        SparseMatrix {
            dim,
            indptr,
            indices,
            data,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, C64)> + '_ {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        self.indices[a..b]
            .iter()
            .copied()
            .zip(self.data[a..b].iter().copied())
    }

    /// All stored entries in canonical order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.dim).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        let (a, b) = (self.indptr[i], self.indptr[i + 1]);
        match self.indices[a..b].binary_search(&j) {
            Ok(k) => self.data[a + k],
            Err(_) => CZERO,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.data.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.dim, "vector length");
        (0..self.dim)
            .into_par_iter()
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    pub fn adjoint(&self) -> Self {
        let mut rows: Vec<Vec<(usize, C64)>> = vec![Vec::new(); self.dim];
        for (i, j, v) in self.triplets() {
            rows[j].push((i, v.conj()));
        }
        Self::from_rows(self.dim, rows)
    }

    pub fn scale(&self, s: C64) -> Self {
        let mut out = self.clone();
        for v in out.data.iter_mut() {
            *v *= s;
        }
        if s == CZERO {
            return Self::zeros(self.dim);
        }
        out
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.scale(C64::new(s, 0.0))
    }

    /// a * self + b * other, merged row by row.
    pub fn axpby(&self, a: C64, other: &Self, b: C64) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let rows = (0..self.dim)
            .into_par_iter()
            .map(|i| {
                let mut out = Vec::new();
                let mut x = self.row(i).peekable();
                let mut y = other.row(i).peekable();
                loop {
                    match (x.peek(), y.peek()) {
                        (Some(&(cx, vx)), Some(&(cy, vy))) => {
                            if cx == cy {
                                out.push((cx, a * vx + b * vy));
                                x.next();
                                y.next();
                            } else if cx < cy {
                                out.push((cx, a * vx));
                                x.next();
                            } else {
                                out.push((cy, b * vy));
                                y.next();
                            }
                        }
                        (Some(&(cx, vx)), None) => {
                            out.push((cx, a * vx));
                            x.next();
                        }
                        (None, Some(&(cy, vy))) => {
                            out.push((cy, b * vy));
                            y.next();
                        }
                        (None, None) => break,
                    }
                }
                out
            })
            .collect();
        Self::from_rows(self.dim, rows)
    }

    pub fn add(&self, other: &Self) -> Self {
        let one = C64::new(1.0, 0.0);
        self.axpby(one, other, one)
    }

    pub fn sub(&self, other: &Self) -> Self {
        let one = C64::new(1.0, 0.0);
        self.axpby(one, other, -one)
    }

    /// Sparse product, accumulating each row in a dense scratch array.
    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        let n = self.dim;
        let rows = (0..n)
            .into_par_iter()
            .map_init(
                || (vec![CZERO; n], vec![false; n], Vec::new()),
                |(acc, seen, touched), i| {
                    for (k, a) in self.row(i) {
                        for (j, b) in other.row(k) {
                            if !seen[j] {
                                seen[j] = true;
                                touched.push(j);
                            }
                            acc[j] += a * b;
                        }
                    }
                    touched.sort_unstable();
                    let row: Vec<(usize, C64)> = touched.iter().map(|&j| (j, acc[j])).collect();
                    for &j in touched.iter() {
                        acc[j] = CZERO;
                        seen[j] = false;
                    }
                    touched.clear();
                    row
                },
            )
            .collect();
        Self::from_rows(n, rows)
    }

    /// [A, B] = AB - BA
    pub fn commutator(&self, other: &Self) -> Self {
        self.matmul(other).sub(&other.matmul(self))
    }

    /// {A, B} = AB + BA
    pub fn anticommutator(&self, other: &Self) -> Self {
        self.matmul(other).add(&other.matmul(self))
    }

    /// Largest |A_ij - conj(A_ji)|.
    pub fn hermiticity_deviation(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    /// Principal submatrix on the given (sorted) basis indices.
    pub fn principal_block(&self, basis: &[usize]) -> Self {
        let mut position = vec![usize::MAX; self.dim];
        for (k, &b) in basis.iter().enumerate() {
            position[b] = k;
        }
        let rows = basis
            .iter()
            .map(|&b| {
                let mut r: Vec<(usize, C64)> = self
                    .row(b)
                    .filter(|(j, _)| position[*j] != usize::MAX)
                    .map(|(j, v)| (position[j], v))
                    .collect();
                r.sort_by_key(|e| e.0);
                r
            })
            .collect();
        Self::from_rows(basis.len(), rows)
    }

    /// Dense row-major copy.
    pub fn to_dense(&self) -> Vec<C64> {
        let mut out = vec![CZERO; self.dim * self.dim];
        for (i, j, v) in self.triplets() {
            out[i * self.dim + j] = v;
        }
        out
    }

    /// Writes the text triplet format: a header line `dim nnz`, then one
    /// `row col re im` line per stored entry in canonical order.
    pub fn write_triplets<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{} {}", self.dim, self.nnz())?;
        for (i, j, v) in self.triplets() {
            writeln!(w, "{i} {j} {:.17e} {:.17e}", v.re, v.im)?;
        }
        Ok(())
    }

    pub fn read_triplets(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::invalid("empty triplet file"))?;
        let mut h = header.split_whitespace().map(str::parse::<usize>);
        let (dim, nnz) = match (h.next(), h.next()) {
            (Some(Ok(d)), Some(Ok(n))) => (d, n),
            _ => return Err(Error::invalid("bad triplet header")),
        };
        let mut trip = Vec::with_capacity(nnz);
        for line in lines.filter(|l| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 4 {
                return Err(Error::invalid(format!("bad triplet line: {line}")));
            }
            let parse_err = |_| Error::invalid(format!("bad triplet line: {line}"));
            let r: usize = f[0].parse().map_err(parse_err)?;
            let c: usize = f[1].parse().map_err(parse_err)?;
            let re: f64 = f[2]
                .parse()
                .map_err(|_| Error::invalid(format!("bad triplet line: {line}")))?;
            let im: f64 = f[3]
                .parse()
                .map_err(|_| Error::invalid(format!("bad triplet line: {line}")))?;
            trip.push((r, c, C64::new(re, im)));
        }
        if trip.len() != nnz {
            return Err(Error::invalid(format!(
                "header says {nnz} entries, found {}",
                trip.len()
            )));
        }
        Self::from_triplets(dim, &trip)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn canonical_form_drops_zeros_and_merges() {
        let a = SparseMatrix::from_triplets(
            3,
            &[
                (0, 2, c(1.0, 0.0)),
                (0, 1, c(2.0, 0.0)),
                (0, 2, c(-1.0, 0.0)),
                (2, 0, c(0.0, 1.0)),
            ],
        )
        .unwrap();
        assert_eq!(a.nnz(), 2);
        assert_eq!(a.get(0, 1), c(2.0, 0.0));
        assert_eq!(a.get(0, 2), CZERO);
        assert!(SparseMatrix::from_triplets(2, &[(2, 0, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn product_matches_dense() {
        let a = SparseMatrix::from_triplets(
            3,
            &[
                (0, 0, c(1.0, 1.0)),
                (0, 2, c(2.0, 0.0)),
                (1, 1, c(0.0, -1.0)),
                (2, 0, c(3.0, 0.5)),
            ],
        )
        .unwrap();
        let b = a.adjoint();
        let p = a.matmul(&b).to_dense();
        let (da, db) = (a.to_dense(), b.to_dense());
        for i in 0..3 {
            for j in 0..3 {
                let want: C64 = (0..3).map(|k| da[i * 3 + k] * db[k * 3 + j]).sum();
                assert_eq!(p[i * 3 + j], want);
            }
        }
        assert_eq!(a.matmul(&b).hermiticity_deviation(), 0.0);
    }

    #[test]
    fn commutator_of_diagonals_is_exactly_zero() {
        let a = SparseMatrix::diagonal(&[1.0, 2.0, 3.0]);
        let b = SparseMatrix::diagonal(&[0.3, -1.0, 7.0]);
        assert!(a.commutator(&b).is_zero());
    }

    #[test]
    fn triplet_round_trip() {
        let a =
            SparseMatrix::from_triplets(4, &[(0, 3, c(0.1, -2.5e-17)), (3, 0, c(1.0 / 3.0, 0.0))])
                .unwrap();
        let mut buf = Vec::new();
        a.write_triplets(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("4 2\n"));
        assert_eq!(SparseMatrix::read_triplets(&text).unwrap(), a);
    }

    #[test]
    fn principal_block_extracts_entries() {
        let a = SparseMatrix::from_triplets(
            4,
            &[
                (1, 3, c(5.0, 0.0)),
                (3, 1, c(5.0, 0.0)),
                (0, 1, c(1.0, 0.0)),
            ],
        )
        .unwrap();
        let b = a.principal_block(&[1, 3]);
        assert_eq!(b.dim(), 2);
        assert_eq!(b.get(0, 1), c(5.0, 0.0));
        assert_eq!(b.nnz(), 2);
    }
}
