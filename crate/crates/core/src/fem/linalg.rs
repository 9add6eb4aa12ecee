//! Sparse storage, bandwidth-reducing ordering and direct solvers.

use std::collections::VecDeque;

use super::FemError;
use crate::Real;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix<T> {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
    pub vals: Vec<T>,
}

impl<T: Real> SparseMatrix<T> {
    /// Builds from per-row sorted column lists with zero values.
    pub fn from_pattern(rows: Vec<Vec<usize>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut cols = Vec::new();
        for r in rows {
            debug_assert!(r.windows(2).all(|w| w[0] < w[1]));
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        let vals = vec![T::zero(); cols.len()];
        Self { n, row_ptr, cols, vals }
    }

    /// Sums duplicate triplets in input order.
    pub fn from_triplets(n: usize, mut t: Vec<(usize, usize, T)>) -> Self {
        t.sort_by_key(|e| (e.0, e.1));
        let mut rows = vec![Vec::new(); n];
        let mut vals = Vec::new();
        for (r, c, v) in t {
            if rows[r].last() == Some(&c) {
                *vals.last_mut().unwrap() += v;
            } else {
                rows[r].push(c);
                vals.push(v);
            }
        }
        let mut m = Self::from_pattern(rows);
        m.vals = vals;
        m
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn row(&self, r: usize) -> (&[usize], &[T]) {
        let s = self.row_ptr[r]..self.row_ptr[r + 1];
        (&self.cols[s.clone()], &self.vals[s])
    }

    /// Position of `(r, c)` in the value array.
    pub fn position(&self, r: usize, c: usize) -> Option<usize> {
        let (cols, _) = self.row(r);
        cols.binary_search(&c).ok().map(|k| self.row_ptr[r] + k)
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.position(r, c).map_or(T::zero(), |k| self.vals[k])
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|r| {
                let (c, v) = self.row(r);
                c.iter().zip(v).fold(T::zero(), |a, (j, w)| a + *w * x[*j])
            })
            .collect()
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut d = vec![vec![T::zero(); self.n]; self.n];
        for r in 0..self.n {
            let (c, v) = self.row(r);
            for (j, w) in c.iter().zip(v) {
                d[r][*j] = *w;
            }
        }
        d
    }

    /// Frobenius norms of `A - Aᵀ` and `A`; the pattern must be symmetric.
    pub fn asymmetry(&self) -> (T, T) {
        let (mut d, mut a) = (T::zero(), T::zero());
        for r in 0..self.n {
            let (c, v) = self.row(r);
            for (j, w) in c.iter().zip(v) {
                let e = *w - self.get(*j, r);
                d += e * e;
                a += *w * *w;
            }
        }
        (d.sqrt(), a.sqrt())
    }

    /// `diag(s) A diag(s)` in place.
    pub fn scale_symmetric(&mut self, s: &[T]) {
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                self.vals[k] *= s[r] * s[self.cols[k]];
            }
        }
    }

    /// Removes rows and columns not listed in `keep` (sorted).
    pub fn restrict(&self, keep: &[usize]) -> Self {
        let mut map = vec![usize::MAX; self.n];
        for (i, k) in keep.iter().enumerate() {
            map[*k] = i;
        }
        let mut rows = Vec::with_capacity(keep.len());
        let mut vals = Vec::new();
        for &r in keep {
            let (c, v) = self.row(r);
            let mut row = Vec::new();
            for (j, w) in c.iter().zip(v) {
                if map[*j] != usize::MAX {
                    row.push(map[*j]);
                    vals.push(*w);
                }
            }
            rows.push(row);
        }
        let mut m = Self::from_pattern(rows);
        m.vals = vals;
        m
    }
}

/// Reverse Cuthill–McKee ordering of the (symmetrised) pattern.
/// `perm[new] = old`.
pub fn rcm_order<T: Real>(a: &SparseMatrix<T>) -> Vec<usize> {
    let n = a.n;
    let mut adj: Vec<Vec<usize>> = (0..n).map(|r| a.row(r).0.iter().copied().filter(|c| *c != r).collect()).collect();
    for r in 0..n {
        for k in a.row_ptr[r]..a.row_ptr[r + 1] {
            let c = a.cols[k];
            if c != r && a.position(c, r).is_none() {
                adj[c].push(r);
            }
        }
    }
    for l in adj.iter_mut() {
        l.sort_unstable();
        l.dedup();
    }
    let deg: Vec<usize> = adj.iter().map(Vec::len).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while order.len() < n {
        // start each component at a minimum-degree vertex
        let start = (0..n).filter(|v| !visited[*v]).min_by_key(|v| (deg[*v], *v)).unwrap();
        let start = pseudo_peripheral(start, &adj);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|u| !visited[*u]).collect();
            next.sort_by_key(|u| (deg[*u], *u));
            for u in next {
                visited[u] = true;
                queue.push_back(u);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(start: usize, adj: &[Vec<usize>]) -> (Vec<usize>, usize) {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    let mut last = start;
    while let Some(v) = queue.pop_front() {
        last = v;
        for &u in &adj[v] {
            if level[u] == usize::MAX {
                level[u] = level[v] + 1;
                queue.push_back(u);
            }
        }
    }
    let depth = level[last];
    (level, depth)
}

fn pseudo_peripheral(mut v: usize, adj: &[Vec<usize>]) -> usize {
    let (mut level, mut depth) = bfs_levels(v, adj);
    for _ in 0..8 {
        let far = (0..adj.len())
            .filter(|u| level[*u] == depth)
            .min_by_key(|u| (adj[*u].len(), *u))
            .unwrap_or(v);
        let (l2, d2) = bfs_levels(far, adj);
        if d2 <= depth {
            break;
        }
        v = far;
        level = l2;
        depth = d2;
    }
    v
}

/// Half bandwidth `max |r - c|` over the stored entries.
pub fn bandwidth<T: Real>(a: &SparseMatrix<T>) -> usize {
    (0..a.n).flat_map(|r| a.row(r).0.iter().map(move |c| r.abs_diff(*c))).max().unwrap_or(0)
}

/// LU factorisation with partial pivoting of a matrix with half bandwidth
/// `b`. Row `i` stores columns `i - b ..= i + 2b`, the room pivoting needs.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    n: usize,
    b: usize,
    width: usize,
    data: Vec<T>,
    piv: Vec<usize>,
}

impl<T: Real> BandLu<T> {
    #[inline]
    fn idx(&self, r: usize, c: usize) -> usize {
        // c - (r - b), valid for r - b <= c <= r + 2b
        r * self.width + (c + self.b - r)
    }

    pub fn factor_sparse(a: &SparseMatrix<T>) -> Result<Self, FemError> {
        let b = bandwidth(a);
        let n = a.n;
        let width = 3 * b + 1;
        let mut lu = Self { n, b, width, data: vec![T::zero(); n * width], piv: vec![0; n] };
        for r in 0..n {
            let (c, v) = a.row(r);
            for (j, w) in c.iter().zip(v) {
                let k = lu.idx(r, *j);
                lu.data[k] = *w;
            }
        }
        let scale = a.vals.iter().fold(T::zero(), |m, v| m.max(v.abs()));
        lu.factor(scale)?;
        Ok(lu)
    }

    pub fn factor_dense(a: &[Vec<T>]) -> Result<Self, FemError> {
        let n = a.len();
        let b = n.saturating_sub(1);
        let width = 3 * b + 1;
        let mut lu = Self { n, b, width, data: vec![T::zero(); n * width], piv: vec![0; n] };
        let mut scale = T::zero();
        for (r, row) in a.iter().enumerate() {
            for (c, v) in row.iter().enumerate() {
                let k = lu.idx(r, c);
                lu.data[k] = *v;
                scale = scale.max(v.abs());
            }
        }
        lu.factor(scale)?;
        Ok(lu)
    }

    fn factor(&mut self, scale: T) -> Result<(), FemError> {
        let (n, b) = (self.n, self.b);
        let tiny = scale * T::epsilon() * T::from_usize_lossy(n.max(1));
        for k in 0..n {
            let last = (k + b).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.idx(k, k)].abs();
            for r in (k + 1)..=last {
                let v = self.data[self.idx(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > tiny) {
                return Err(FemError::Singular { pivot: k });
            }
            self.piv[k] = p;
            let hi = (k + 2 * b).min(n - 1);
            if p != k {
                for c in k..=hi {
                    let (i, j) = (self.idx(k, c), self.idx(p, c));
                    self.data.swap(i, j);
                }
            }
            let d = self.data[self.idx(k, k)];
            let row_k = self.idx(k, k);
            for r in (k + 1)..=last {
                let ir = self.idx(r, k);
                let f = self.data[ir] / d;
                self.data[ir] = f;
                if f == T::zero() {
                    continue;
                }
                let base_r = ir;
                for off in 1..=(hi - k) {
                    let u = self.data[row_k + off];
                    self.data[base_r + off] -= f * u;
                }
            }
        }
        Ok(())
    }

    pub fn solve(&self, rhs: &[T]) -> Vec<T> {
        let (n, b) = (self.n, self.b);
        let mut x = rhs.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            for r in (k + 1)..=(k + b).min(n.saturating_sub(1)) {
                x[r] -= self.data[self.idx(r, k)] * xk;
            }
        }
        for k in (0..n).rev() {
            let hi = (k + 2 * b).min(n - 1);
            let mut s = x[k];
            for c in (k + 1)..=hi {
                s -= self.data[self.idx(k, c)] * x[c];
            }
            x[k] = s / self.data[self.idx(k, k)];
        }
        x
    }
}

fn norm<T: Real>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, x| a + *x * *x).sqrt()
}

/// Residual `‖b - A x‖ / ‖b‖`.
pub fn relative_residual<T: Real>(a: &SparseMatrix<T>, x: &[T], b: &[T]) -> T {
    let ax = a.matvec(x);
    let r: Vec<T> = b.iter().zip(&ax).map(|(u, v)| *u - *v).collect();
    let nb = norm(b);
    if nb > T::zero() {
        norm(&r) / nb
    } else {
        norm(&r)
    }
}

/// Direct solve after reverse Cuthill–McKee reordering, with one step of
/// iterative refinement when the residual exceeds `1e-10`.
pub fn solve_sparse<T: Real>(a: &SparseMatrix<T>, b: &[T]) -> Result<Vec<T>, FemError> {
    let perm = rcm_order(a);
    let mut inv = vec![0; a.n];
    for (new, old) in perm.iter().enumerate() {
        inv[*old] = new;
    }
    let rows: Vec<Vec<(usize, T)>> = perm
        .iter()
        .map(|&old| {
            let (c, v) = a.row(old);
            let mut r: Vec<(usize, T)> = c.iter().zip(v).map(|(j, w)| (inv[*j], *w)).collect();
            r.sort_by_key(|e| e.0);
            r
        })
        .collect();
    let mut pa = SparseMatrix::from_pattern(rows.iter().map(|r| r.iter().map(|e| e.0).collect()).collect());
    pa.vals = rows.into_iter().flatten().map(|e| e.1).collect();
    let pb: Vec<T> = perm.iter().map(|&o| b[o]).collect();
    let lu = BandLu::factor_sparse(&pa).map_err(|e| match e {
        FemError::Singular { pivot } => FemError::Singular { pivot: perm[pivot] },
        e => e,
    })?;
    let mut y = lu.solve(&pb);
    if relative_residual(&pa, &y, &pb) > T::lit(1e-10) {
        let ay = pa.matvec(&y);
        let r: Vec<T> = pb.iter().zip(&ay).map(|(u, v)| *u - *v).collect();
        let d = lu.solve(&r);
        for (yi, di) in y.iter_mut().zip(d) {
            *yi += di;
        }
    }
    let mut x = vec![T::zero(); a.n];
    for (new, old) in perm.iter().enumerate() {
        x[*old] = y[new];
    }
    Ok(x)
}

/// Dense LU with partial pivoting and one refinement step when needed.
pub fn solve_dense<T: Real>(a: &[Vec<T>], b: &[T]) -> Result<Vec<T>, FemError> {
    let lu = BandLu::factor_dense(a)?;
    let mut x = lu.solve(b);
    let ax: Vec<T> = a.iter().map(|row| row.iter().zip(&x).fold(T::zero(), |s, (u, v)| s + *u * *v)).collect();
    let r: Vec<T> = b.iter().zip(&ax).map(|(u, v)| *u - *v).collect();
    if norm(&r) > T::lit(1e-10) * norm(b) {
        let d = lu.solve(&r);
        for (xi, di) in x.iter_mut().zip(d) {
            *xi += di;
        }
    }
    Ok(x)
}

/// Symmetric positive semi-definite solve by Cholesky with diagonal
/// pivoting. Pivots below `rel_tol · max diag` end the factorisation; the
/// returned rank tells how many directions were kept, the rest get zero.
pub fn pivoted_cholesky_solve<T: Real>(g: &[T], n: usize, rhs: &[Vec<T>], rel_tol: T) -> (Vec<Vec<T>>, usize) {
    let mut a = g.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let max_diag = (0..n).fold(T::zero(), |m, i| m.max(g[i * n + i]));
    let mut rank = 0;
    for k in 0..n {
        let (p, d) = (k..n).map(|i| (i, a[i * n + i])).fold((k, -T::one()), |b, c| if c.1 > b.1 { c } else { b });
        if !(d > rel_tol * max_diag) {
            break;
        }
        if p != k {
            perm.swap(k, p);
            for c in 0..n {
                a.swap(k * n + c, p * n + c);
            }
            for r in 0..n {
                a.swap(r * n + k, r * n + p);
            }
        }
        let lkk = a[k * n + k].sqrt();
        a[k * n + k] = lkk;
        for r in (k + 1)..n {
            a[r * n + k] /= lkk;
        }
        for c in (k + 1)..n {
            for r in c..n {
                let v = a[r * n + k] * a[c * n + k];
                a[r * n + c] -= v;
            }
            for r in (k + 1)..c {
                a[r * n + c] = a[c * n + r];
            }
        }
        rank = k + 1;
    }
    let sols = rhs
        .iter()
        .map(|b| {
            let pb: Vec<T> = perm.iter().map(|i| b[*i]).collect();
            let mut y = vec![T::zero(); n];
            for i in 0..rank {
                let mut s = pb[i];
                for j in 0..i {
                    s -= a[i * n + j] * y[j];
                }
                y[i] = s / a[i * n + i];
            }
            for i in (0..rank).rev() {
                let mut s = y[i];
                for j in (i + 1)..rank {
                    s -= a[j * n + i] * y[j];
                }
                y[i] = s / a[i * n + i];
            }
            let mut x = vec![T::zero(); n];
            for (k, i) in perm.iter().enumerate() {
                x[*i] = y[k];
            }
            x
        })
        .collect();
    (sols, rank)
}
