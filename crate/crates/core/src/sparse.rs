//! Compressed sparse row matrices sized for P1 finite element systems.

use crate::error::{Error, Result};

/// Symmetric matrices are stored with both triangles so that row access,
/// matrix-vector products and submatrix extraction stay simple.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    nrows: usize,
    ncols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a CSR matrix from (row, col, value) triplets, accumulating
    /// duplicates. Triplets are combined in a fixed sorted order so assembly
    /// is bit-reproducible regardless of input ordering.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> CsrMatrix {
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&k| (triplets[k].0, triplets[k].1, k));

        let mut row_ptr = vec![0usize; nrows + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut last: Option<(usize, usize)> = None;
        for &k in &order {
            let (i, j, v) = triplets[k];
            assert!(i < nrows && j < ncols, "triplet out of bounds");
            if last == Some((i, j)) {
                *vals.last_mut().unwrap() += v;
            } else {
                cols.push(j);
                vals.push(v);
                row_ptr[i + 1] += 1;
                last = Some((i, j));
            }
        }
        for i in 0..nrows {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            nrows,
            ncols,
            row_ptr,
            cols,
            vals,
        }
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let s = self.row_ptr[i];
        let e = self.row_ptr[i + 1];
        (&self.cols[s..e], &self.vals[s..e])
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for (i, yi) in y.iter_mut().enumerate() {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (c, v) in cols.iter().zip(vals) {
                acc += v * x[*c];
            }
            *yi = acc;
        }
        y
    }

    /// xᵀ A y for square A.
    pub fn quadratic_form(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    /// Returns self + alpha * other, requiring equal shapes.
    pub fn add_scaled(&self, other: &CsrMatrix, alpha: f64) -> CsrMatrix {
        assert_eq!(self.nrows, other.nrows);
        assert_eq!(self.ncols, other.ncols);
        let mut row_ptr = vec![0usize; self.nrows + 1];
        let mut cols = Vec::with_capacity(self.nnz() + other.nnz());
        let mut vals = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.nrows {
            let (ca, va) = self.row(i);
            let (cb, vb) = other.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ca.len() || q < cb.len() {
                let ja = if p < ca.len() { ca[p] } else { usize::MAX };
                let jb = if q < cb.len() { cb[q] } else { usize::MAX };
                if ja < jb {
                    cols.push(ja);
                    vals.push(va[p]);
                    p += 1;
                } else if jb < ja {
                    cols.push(jb);
                    vals.push(alpha * vb[q]);
                    q += 1;
                } else {
                    cols.push(ja);
                    vals.push(va[p] + alpha * vb[q]);
                    p += 1;
                    q += 1;
                }
            }
            row_ptr[i + 1] = cols.len();
        }
        CsrMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_ptr,
            cols,
            vals,
        }
    }

    /// Extracts the square submatrix on `keep` (sorted, unique indices).
    pub fn restrict(&self, keep: &[usize]) -> CsrMatrix {
        let mut new_index = vec![usize::MAX; self.ncols.max(self.nrows)];
        for (new, &old) in keep.iter().enumerate() {
            new_index[old] = new;
        }
        let mut row_ptr = vec![0usize; keep.len() + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for (new_i, &old_i) in keep.iter().enumerate() {
            let (ca, va) = self.row(old_i);
            for (c, v) in ca.iter().zip(va) {
                let nj = new_index[*c];
                if nj != usize::MAX {
                    cols.push(nj);
                    vals.push(*v);
                }
            }
            row_ptr[new_i + 1] = cols.len();
        }
        CsrMatrix {
            nrows: keep.len(),
            ncols: keep.len(),
            row_ptr,
            cols,
            vals,
        }
    }

    /// Largest |A[i,j] − A[j,i]| over all stored entries.
    pub fn asymmetry(&self) -> f64 {
        assert_eq!(self.nrows, self.ncols);
        let mut worst = 0.0_f64;
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                worst = worst.max((v - self.get(*c, i)).abs());
            }
        }
        worst
    }

    /// Dense copy for small oracles and debugging.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.nrows, self.ncols);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                m[(i, *c)] = *v;
            }
        }
        m
    }

    /// Writes `row col value` coordinate rows, one entry per line.
    pub fn to_coordinate_text(&self) -> String {
        use std::fmt::Write as _;
        let mut out = String::new();
        let _ = writeln!(out, "{} {} {}", self.nrows, self.ncols, self.nnz());
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            for (c, v) in cols.iter().zip(vals) {
                let _ = writeln!(out, "{} {} {:.16e}", i, c, v);
            }
        }
        out
    }
}

/// Supplies the permutation used by the sparse factorization: geometric
/// nested dissection over the dof positions. On the structured meshes used
/// here no element edge skips across a grid line, so the nodes sharing the
/// median coordinate form a valid separator.
pub fn nested_dissection_order(positions: &[[f64; 2]]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..positions.len()).collect();
    let mut out = Vec::with_capacity(ids.len());
    nd_recurse(&mut ids, positions, &mut out);
    out
}

fn nd_recurse(ids: &mut [usize], positions: &[[f64; 2]], out: &mut Vec<usize>) {
    const LEAF: usize = 64;
    if ids.len() <= LEAF {
        out.extend_from_slice(ids);
        return;
    }
    let distinct = |axis: usize, ids: &[usize]| -> Vec<f64> {
        let mut cs: Vec<f64> = ids.iter().map(|&i| positions[i][axis]).collect();
        cs.sort_by(f64::total_cmp);
        cs.dedup();
        cs
    };
    let dx = distinct(0, ids);
    let dy = distinct(1, ids);
    let (axis, coords) = if dx.len() >= dy.len() { (0, dx) } else { (1, dy) };
    if coords.len() < 2 {
        out.extend_from_slice(ids);
        return;
    }
    let m = coords[coords.len() / 2];
    let mut below: Vec<usize> = Vec::new();
    let mut sep: Vec<usize> = Vec::new();
    let mut above: Vec<usize> = Vec::new();
    for &i in ids.iter() {
        let c = positions[i][axis];
        if c < m {
            below.push(i);
        } else if c > m {
            above.push(i);
        } else {
            sep.push(i);
        }
    }
    nd_recurse(&mut below, positions, out);
    nd_recurse(&mut above, positions, out);
    out.extend_from_slice(&sep);
}

/// Sparse Cholesky factorization P A Pᵀ = L Lᵀ for symmetric positive
/// definite A, up-looking with an elimination-tree symbolic phase.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    /// perm[new] = old.
    perm: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
}

impl SparseCholesky {
    /// Factorizes symmetric positive definite `a`. When dof positions are
    /// supplied the nested dissection order is used; otherwise the natural
    /// order.
    pub fn factorize(a: &CsrMatrix, positions: Option<&[[f64; 2]]>) -> Result<SparseCholesky> {
        assert_eq!(a.nrows(), a.ncols());
        let n = a.nrows();
        let perm = match positions {
            Some(pos) => {
                assert_eq!(pos.len(), n);
                nested_dissection_order(pos)
            }
            None => (0..n).collect(),
        };
        let mut iperm = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }

        // Upper-triangular pattern of the permuted matrix, one column per
        // new index k: (new row index, value) pairs with row <= k.
        let perm_ref = &perm;
        let iperm_ref = &iperm;
        let col_upper = move |k: usize| {
            let old = perm_ref[k];
            let (cols, vals) = a.row(old);
            cols.iter()
                .zip(vals)
                .filter_map(move |(c, v)| {
                    let ic = iperm_ref[*c];
                    (ic <= k).then_some((ic, *v))
                })
        };

        // Elimination tree.
        let mut parent: Vec<isize> = vec![-1; n];
        let mut ancestor: Vec<isize> = vec![-1; n];
        for k in 0..n {
            for (i, _) in col_upper(k) {
                let mut j = i as isize;
                while j != -1 && (j as usize) < k {
                    let next = ancestor[j as usize];
                    ancestor[j as usize] = k as isize;
                    if next == -1 {
                        parent[j as usize] = k as isize;
                    }
                    j = next;
                }
            }
        }

        // Symbolic pass: column counts via the row subtree reach.
        let mut stamp = vec![usize::MAX; n];
        let mut stack = vec![0usize; n];
        let mut count = vec![1usize; n]; // diagonal
        for k in 0..n {
            stamp[k] = k;
            for (i, _) in col_upper(k) {
                if i == k {
                    continue;
                }
                let mut j = i;
                while stamp[j] != k {
                    stamp[j] = k;
                    count[j] += 1;
                    let p = parent[j];
                    if p == -1 {
                        break;
                    }
                    j = p as usize;
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for j in 0..n {
            lp[j + 1] = lp[j] + count[j];
        }
        let nnz = lp[n];
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0f64; nnz];

        // Numeric up-looking factorization.
        let mut next = lp[..n].to_vec(); // next free slot per column
        let mut x = vec![0.0f64; n];
        let mut stamp2 = vec![usize::MAX; n];
        for s in stamp.iter_mut() {
            *s = usize::MAX;
        }
        for k in 0..n {
            // Row pattern of L(k, :) in topological order: s[top..n].
            let mut top = n;
            stamp2[k] = k;
            let mut d = 0.0;
            for (i, v) in col_upper(k) {
                if i == k {
                    d = v;
                    continue;
                }
                x[i] = v;
                // Walk up the elimination tree until a previously marked
                // node; the path reversal below keeps the pattern in
                // topological order (descendants first).
                let mut len = 0;
                let mut j = i as isize;
                while j != -1 && (j as usize) < k && stamp2[j as usize] != k {
                    stamp2[j as usize] = k;
                    stack[len] = j as usize;
                    len += 1;
                    j = parent[j as usize];
                }
                while len > 0 {
                    len -= 1;
                    top -= 1;
                    stack[top] = stack[len];
                }
            }
            for &pattern_col in &stack[top..n] {
                let i = pattern_col;
                let diag = lx[lp[i]];
                let lki = x[i] / diag;
                x[i] = 0.0;
                for p in lp[i] + 1..next[i] {
                    x[li[p]] -= lx[p] * lki;
                }
                d -= lki * lki;
                let slot = next[i];
                next[i] += 1;
                li[slot] = k;
                lx[slot] = lki;
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::SingularSystem(format!(
                    "nonpositive pivot {d:.3e} at column {k} of {n}"
                )));
            }
            let slot = next[k];
            next[k] += 1;
            li[slot] = k;
            lx[slot] = d.sqrt();
        }

        Ok(SparseCholesky {
            n,
            perm,
            lp,
            li,
            lx,
        })
    }

    /// Solves A x = b with the stored factorization.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut y: Vec<f64> = (0..n).map(|i| b[self.perm[i]]).collect();
        // Forward: L y = P b.
        for j in 0..n {
            let yj = y[j] / self.lx[self.lp[j]];
            y[j] = yj;
            for p in self.lp[j] + 1..self.lp[j + 1] {
                y[self.li[p]] -= self.lx[p] * yj;
            }
        }
        // Backward: Lᵀ z = y.
        for j in (0..n).rev() {
            let mut acc = y[j];
            for p in self.lp[j] + 1..self.lp[j + 1] {
                acc -= self.lx[p] * y[self.li[p]];
            }
            y[j] = acc / self.lx[self.lp[j]];
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[self.perm[i]] = y[i];
        }
        x
    }

    /// Number of nonzeros in the factor.
    pub fn factor_nnz(&self) -> usize {
        self.lx.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_spd(n: usize, rng: &mut ChaCha8Rng) -> (CsrMatrix, nalgebra::DMatrix<f64>) {
        let m = nalgebra::DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let dense = &m * m.transpose() + nalgebra::DMatrix::identity(n, n) * (n as f64);
        let mut triplets = Vec::new();
        for i in 0..n {
            for j in 0..n {
                // Sparsify while keeping symmetry and dominance.
                if i == j || (i + j) % 3 != 0 {
                    triplets.push((i, j, dense[(i, j)]));
                }
            }
        }
        let sparse = CsrMatrix::from_triplets(n, n, &triplets);
        (sparse.clone(), sparse.to_dense())
    }

    #[test]
    fn triplets_accumulate_deterministically() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 0, 2.0), (1, 0, -1.0)]);
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 0), -1.0);
        assert_eq!(a.get(1, 1), 0.0);
        assert_eq!(a.nnz(), 2);
    }

    #[test]
    fn matvec_matches_dense() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (a, d) = random_spd(12, &mut rng);
        let x: Vec<f64> = (0..12).map(|_| rng.random_range(-1.0..1.0)).collect();
        let y = a.mul_vec(&x);
        let xd = nalgebra::DVector::from_column_slice(&x);
        let yd = &d * &xd;
        for i in 0..12 {
            assert!((y[i] - yd[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn add_scaled_and_restrict() {
        let a = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0), (0, 2, 5.0)]);
        let b = CsrMatrix::from_triplets(3, 3, &[(0, 0, 1.0), (2, 0, 4.0)]);
        let c = a.add_scaled(&b, 2.0);
        assert_eq!(c.get(0, 0), 3.0);
        assert_eq!(c.get(2, 0), 8.0);
        assert_eq!(c.get(0, 2), 5.0);
        let r = c.restrict(&[0, 2]);
        assert_eq!(r.nrows(), 2);
        assert_eq!(r.get(0, 1), 5.0);
        assert_eq!(r.get(1, 0), 8.0);
    }

    #[test]
    fn coordinate_text_export() {
        let a = CsrMatrix::from_triplets(2, 3, &[(0, 0, 1.5), (1, 2, -0.25)]);
        let text = a.to_coordinate_text();
        let lines: Vec<&str> = text.trim_end().lines().collect();
        assert_eq!(lines[0], "2 3 2");
        assert!(lines[1].starts_with("0 0 1.5"));
        assert!(lines[2].starts_with("1 2 -2.5"));
        // Entries round-trip through parsing.
        let v: f64 = lines[2].split_whitespace().nth(2).unwrap().parse().unwrap();
        assert_eq!(v, -0.25);
    }

    #[test]
    fn cholesky_identity_returns_rhs() {
        let n = 5;
        let triplets: Vec<_> = (0..n).map(|i| (i, i, 1.0)).collect();
        let a = CsrMatrix::from_triplets(n, n, &triplets);
        let f = SparseCholesky::factorize(&a, None).unwrap();
        let b = vec![1.0, -2.0, 3.0, 0.5, 0.0];
        let x = f.solve(&b);
        for i in 0..n {
            assert!((x[i] - b[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn cholesky_matches_dense_solver() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in [1usize, 2, 5, 20, 60] {
            let (a, d) = random_spd(n, &mut rng);
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let f = SparseCholesky::factorize(&a, None).unwrap();
            let x = f.solve(&b);
            let chol = d.clone().cholesky().expect("dense cholesky");
            let xd = chol.solve(&nalgebra::DVector::from_column_slice(&b));
            for i in 0..n {
                assert!(
                    (x[i] - xd[i]).abs() < 1e-9 * (1.0 + xd[i].abs()),
                    "n={n} i={i}: {} vs {}",
                    x[i],
                    xd[i]
                );
            }
        }
    }

    #[test]
    fn cholesky_with_nested_dissection_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 40;
        let (a, d) = random_spd(n, &mut rng);
        let positions: Vec<[f64; 2]> = (0..n)
            .map(|i| [(i % 8) as f64 / 7.0, (i / 8) as f64 / 4.0])
            .collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = SparseCholesky::factorize(&a, Some(&positions)).unwrap();
        let x = f.solve(&b);
        let xd = d.cholesky().unwrap().solve(&nalgebra::DVector::from_column_slice(&b));
        for i in 0..n {
            assert!((x[i] - xd[i]).abs() < 1e-9 * (1.0 + xd[i].abs()));
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, -1.0)]);
        assert!(matches!(
            SparseCholesky::factorize(&a, None),
            Err(crate::error::Error::SingularSystem(_))
        ));
    }

    #[test]
    fn nested_dissection_is_a_permutation() {
        let positions: Vec<[f64; 2]> = (0..25 * 2)
            .map(|d| {
                let node = d / 2;
                [(node % 5) as f64 / 4.0, (node / 5) as f64 / 4.0]
            })
            .collect();
        let mut order = nested_dissection_order(&positions);
        order.sort_unstable();
        assert_eq!(order, (0..50).collect::<Vec<_>>());
    }
}
