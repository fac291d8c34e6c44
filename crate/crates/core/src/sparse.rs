//! Sparse symmetric positive-definite factorization.
//!
//! Up-looking Cholesky over the upper triangle in compressed-column form, with
//! the row patterns of `L` found by walking the elimination tree. No fill
//! reducing permutation is applied: callers order variables so that fill stays
//! small (poses along the chain first, landmarks last).

use std::fmt;

/// Upper triangle (`row <= col`) of a symmetric matrix in compressed-column form.
#[derive(Debug, Clone, PartialEq)]
pub struct UpperCsc {
    n: usize,
    colptr: Vec<usize>,
    rowidx: Vec<usize>,
    values: Vec<f64>,
}

impl UpperCsc {
    /// Assembles from `(row, col, value)` triplets with `row <= col`, summing duplicates.
    /// Every diagonal entry is present in the pattern, possibly as an explicit zero.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut entries: Vec<(usize, usize, f64)> = Vec::with_capacity(triplets.len() + n);
        for &(r, c, v) in triplets {
            assert!(r <= c && c < n, "triplet ({r}, {c}) outside upper triangle of {n}x{n}");
            entries.push((c, r, v));
        }
        entries.extend((0..n).map(|i| (i, i, 0.0)));
        entries.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));

        let mut colptr = vec![0; n + 1];
        let mut rowidx = Vec::with_capacity(entries.len());
        let mut values: Vec<f64> = Vec::with_capacity(entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (c, r, v) in entries {
            if last == Some((c, r)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            rowidx.push(r);
            values.push(v);
            colptr[c + 1] += 1;
            last = Some((c, r));
        }
        for c in 0..n {
            colptr[c + 1] += colptr[c];
        }
        Self {
            n,
            colptr,
            rowidx,
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.rowidx.len()
    }

    /// Stored `(row, col)` positions, column by column.
    pub fn pattern(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |c| {
            self.rowidx[self.colptr[c]..self.colptr[c + 1]]
                .iter()
                .map(move |&r| (r, c))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        let (r, c) = if row <= col { (row, col) } else { (col, row) };
        let range = self.colptr[c]..self.colptr[c + 1];
        match self.rowidx[range.clone()].binary_search(&r) {
            Ok(p) => self.values[range.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Adds `d[i]` to every diagonal entry.
    pub fn add_diagonal(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.n);
        for c in 0..self.n {
            let range = self.colptr[c]..self.colptr[c + 1];
            let p = self.rowidx[range.clone()]
                .binary_search(&c)
                .expect("diagonal always stored");
            self.values[range.start + p] += d[c];
        }
    }

    /// `y = A x` using the symmetric expansion of the stored triangle.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for c in 0..self.n {
            for p in self.colptr[c]..self.colptr[c + 1] {
                let r = self.rowidx[p];
                let v = self.values[p];
                y[r] += v * x[c];
                if r != c {
                    y[c] += v * x[r];
                }
            }
        }
        y
    }
}

/// The matrix was not numerically positive definite at the given pivot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NotPositiveDefinite {
    pub column: usize,
    pub pivot: f64,
}

impl fmt::Display for NotPositiveDefinite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "matrix not positive definite: pivot {:e} at column {}",
            self.pivot, self.column
        )
    }
}

impl std::error::Error for NotPositiveDefinite {}

/// Elimination tree and column counts of `L` for a fixed pattern.
#[derive(Debug, Clone)]
pub struct SymbolicCholesky {
    n: usize,
    parent: Vec<Option<usize>>,
    l_colptr: Vec<usize>,
}

impl SymbolicCholesky {
    pub fn analyze(a: &UpperCsc) -> Self {
        let n = a.n;
        let parent = elimination_tree(a);
        let mut counts = vec![1usize; n];
        let mut stack = vec![0usize; n];
        let mut mark = vec![usize::MAX; n];
        for k in 0..n {
            let top = ereach(a, k, &parent, &mut stack, &mut mark);
            for &i in &stack[top..] {
                counts[i] += 1;
            }
        }
        let mut l_colptr = vec![0; n + 1];
        for i in 0..n {
            l_colptr[i + 1] = l_colptr[i] + counts[i];
        }
        Self {
            n,
            parent,
            l_colptr,
        }
    }

    /// Number of stored entries in the factor.
    pub fn factor_nnz(&self) -> usize {
        self.l_colptr[self.n]
    }

    /// Numeric factorization; `a` must share the analyzed pattern.
    pub fn factor(&self, a: &UpperCsc) -> Result<SparseCholesky, NotPositiveDefinite> {
        let n = self.n;
        assert_eq!(a.n, n, "dimension mismatch with symbolic analysis");
        let nnz = self.factor_nnz();
        let mut li = vec![0usize; nnz];
        let mut lx = vec![0.0f64; nnz];
        let mut next = self.l_colptr[..n].to_vec();
        let mut x = vec![0.0f64; n];
        let mut stack = vec![0usize; n];
        let mut mark = vec![usize::MAX; n];

        for k in 0..n {
            let top = ereach(a, k, &self.parent, &mut stack, &mut mark);
            for p in a.colptr[k]..a.colptr[k + 1] {
                x[a.rowidx[p]] = a.values[p];
            }
            let mut d = x[k];
            x[k] = 0.0;
            for &i in &stack[top..] {
                let lki = x[i] / lx[self.l_colptr[i]];
                x[i] = 0.0;
                for p in (self.l_colptr[i] + 1)..next[i] {
                    x[li[p]] -= lx[p] * lki;
                }
                d -= lki * lki;
                let p = next[i];
                next[i] += 1;
                li[p] = k;
                lx[p] = lki;
            }
            if !(d > 0.0) || !d.is_finite() {
                return Err(NotPositiveDefinite {
                    column: k,
                    pivot: d,
                });
            }
            let p = next[k];
            next[k] += 1;
            li[p] = k;
            lx[p] = d.sqrt();
        }
        Ok(SparseCholesky {
            n,
            colptr: self.l_colptr.clone(),
            rowidx: li,
            values: lx,
        })
    }
}

/// Lower-triangular factor `L` with `A = L L^T`; the diagonal leads each column.
#[derive(Debug, Clone)]
pub struct SparseCholesky {
    n: usize,
    colptr: Vec<usize>,
    rowidx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        for j in 0..self.n {
            let start = self.colptr[j];
            x[j] /= self.values[start];
            let xj = x[j];
            for p in (start + 1)..self.colptr[j + 1] {
                x[self.rowidx[p]] -= self.values[p] * xj;
            }
        }
        for j in (0..self.n).rev() {
            let start = self.colptr[j];
            let mut s = x[j];
            for p in (start + 1)..self.colptr[j + 1] {
                s -= self.values[p] * x[self.rowidx[p]];
            }
            x[j] = s / self.values[start];
        }
        x
    }
}

fn elimination_tree(a: &UpperCsc) -> Vec<Option<usize>> {
    let n = a.n;
    let mut parent = vec![None; n];
    let mut ancestor: Vec<Option<usize>> = vec![None; n];
    for k in 0..n {
        for p in a.colptr[k]..a.colptr[k + 1] {
            let mut i = Some(a.rowidx[p]);
            while let Some(node) = i {
                if node >= k {
                    break;
                }
                let next = ancestor[node];
                ancestor[node] = Some(k);
                if next.is_none() {
                    parent[node] = Some(k);
                }
                i = next;
            }
        }
    }
    parent
}

/// Pattern of row `k` of `L` (excluding the diagonal), written to `stack[top..]`
/// in topological order.
fn ereach(
    a: &UpperCsc,
    k: usize,
    parent: &[Option<usize>],
    stack: &mut [usize],
    mark: &mut [usize],
) -> usize {
    let n = a.n;
    let mut top = n;
    mark[k] = k;
    for p in a.colptr[k]..a.colptr[k + 1] {
        let mut i = a.rowidx[p];
        if i > k {
            continue;
        }
        let mut len = 0;
        while mark[i] != k {
            stack[len] = i;
            len += 1;
            mark[i] = k;
            match parent[i] {
                Some(next) => i = next,
                None => break,
            }
        }
        while len > 0 {
            len -= 1;
            top -= 1;
            stack[top] = stack[len];
        }
    }
    top
}
