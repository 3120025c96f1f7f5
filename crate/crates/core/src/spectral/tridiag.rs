//! Dense symmetric eigensolver: Householder tridiagonalization followed by
//! implicit-shift QL iteration.
//!
//! All matrices are row-major `n x n` slices. The eigenvector matrix has one
//! row per component and one column per eigenpair.

use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 60;
/// Rotations are buffered and applied to the eigenvector matrix in batches so
/// each row block is streamed once per batch instead of once per sweep.
const ROTATION_BATCH: usize = 1 << 18;
const LANES: usize = 8;

pub(crate) struct Tridiagonal {
    pub diag: Vec<f64>,
    /// `off[i]` couples `i` and `i + 1`; the last entry is zero.
    pub off: Vec<f64>,
    /// Householder scale factors; reflector `k` is stored below the diagonal
    /// in column `k` of the reduced matrix.
    betas: Vec<f64>,
}

/// Builds a reflector `I - beta v v^T` mapping `x` onto a multiple of the
/// first unit vector. Returns `(beta, resulting first entry)`; `v` receives
/// the reflector over the same index range as `x`.
fn reflector(x: &[f64], v: &mut [f64]) -> (f64, f64) {
    let x0 = x[0];
    let tail: f64 = x[1..].iter().map(|t| t * t).sum();
    if tail == 0.0 {
        v.fill(0.0);
        return (0.0, x0);
    }
    let alpha = (x0 * x0 + tail).sqrt();
    let sign = if x0 >= 0.0 { 1.0 } else { -1.0 };
    v.copy_from_slice(x);
    v[0] = x0 + sign * alpha;
    let beta = 1.0 / (alpha * (alpha + x0.abs()));
    (beta, -sign * alpha)
}

/// `p[s..] = A[s.., s..] v[s..]` using only the lower triangle of `a`.
fn sym_matvec_lower(a: &[f64], n: usize, s: usize, v: &[f64], p: &mut [f64]) {
    p[s..].fill(0.0);
    for i in s..n {
        let row = &a[i * n..i * n + i + 1];
        let vi = v[i];
        let mut acc = row[i] * vi;
        for j in s..i {
            acc += row[j] * v[j];
            p[j] += row[j] * vi;
        }
        p[i] += acc;
    }
}

/// Reduces the symmetric matrix `a` in place. Only the lower triangle is read.
///
/// Each step applies the previous rank-2 update and accumulates the next
/// matrix-vector product in a single pass over the trailing block.
pub(crate) fn tridiagonalize(a: &mut [f64], n: usize) -> Tridiagonal {
    let mut diag = vec![0.0; n];
    let mut off = vec![0.0; n];
    let mut betas = vec![0.0; n];
    if n == 1 {
        diag[0] = a[0];
        return Tridiagonal { diag, off, betas };
    }

    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut vn = vec![0.0; n];
    let mut pn = vec![0.0; n];
    let mut col = vec![0.0; n];

    for i in 1..n {
        col[i] = a[i * n];
    }
    let (mut beta, mut sub) = reflector(&col[1..n], &mut v[1..n]);
    sym_matvec_lower(a, n, 1, &v, &mut p);

    for k in 0..n - 1 {
        diag[k] = a[k * n + k];
        off[k] = sub;
        betas[k] = beta;
        for i in k + 1..n {
            a[i * n + k] = v[i];
        }
        if k == n - 2 {
            diag[n - 1] = a[(n - 1) * n + n - 1];
            break;
        }

        let s = k + 1;
        // w = beta p - (beta^2 / 2)(p.v) v, stored in p.
        if beta != 0.0 {
            let mut pv = 0.0;
            for i in s..n {
                p[i] *= beta;
                pv += p[i] * v[i];
            }
            let half = 0.5 * beta * pv;
            for i in s..n {
                p[i] -= half * v[i];
            }
        } else {
            p[s..].fill(0.0);
        }
        let w = &p;

        // Column s of the updated block gives the next reflector.
        for i in s + 1..n {
            col[i] = a[i * n + s] - v[i] * w[s] - w[i] * v[s];
        }
        let (beta_next, sub_next) = reflector(&col[s + 1..n], &mut vn[s + 1..n]);
        vn[s] = 0.0;

        pn[s + 1..n].fill(0.0);
        a[s * n + s] -= 2.0 * v[s] * w[s];
        for i in s + 1..n {
            let (vi, wi, vni) = (v[i], w[i], vn[i]);
            let row = &mut a[i * n..i * n + i + 1];
            row[s] -= vi * w[s] + wi * v[s];
            let mut acc = 0.0;
            for j in s + 1..i {
                let y = row[j] - vi * w[j] - wi * v[j];
                row[j] = y;
                acc += y * vn[j];
                pn[j] += y * vni;
            }
            let y = row[i] - 2.0 * vi * wi;
            row[i] = y;
            pn[i] += acc + y * vni;
        }

        std::mem::swap(&mut v, &mut vn);
        std::mem::swap(&mut p, &mut pn);
        beta = beta_next;
        sub = sub_next;
    }
    off[n - 1] = 0.0;

    Tridiagonal { diag, off, betas }
}

/// Forms the orthogonal `Q` with `A = Q T Q^T` from the reflectors left in
/// `reduced` by [`tridiagonalize`].
pub(crate) fn accumulate_reflectors(reduced: &[f64], n: usize, tri: &Tridiagonal) -> Vec<f64> {
    let mut q = vec![0.0; n * n];
    for i in 0..n {
        q[i * n + i] = 1.0;
    }
    let mut v = vec![0.0; n];
    let mut r = vec![0.0; n];
    for k in (0..n.saturating_sub(1)).rev() {
        let beta = tri.betas[k];
        if beta == 0.0 {
            continue;
        }
        let s = k + 1;
        for i in s..n {
            v[i] = reduced[i * n + k];
        }
        r[s..].fill(0.0);
        for i in s..n {
            let vi = v[i];
            if vi == 0.0 {
                continue;
            }
            for (rc, &qc) in r[s..].iter_mut().zip(&q[i * n + s..(i + 1) * n]) {
                *rc += vi * qc;
            }
        }
        for i in s..n {
            let scale = beta * v[i];
            if scale == 0.0 {
                continue;
            }
            for (qc, &rc) in q[i * n + s..(i + 1) * n].iter_mut().zip(&r[s..]) {
                *qc -= scale * rc;
            }
        }
    }
    q
}

/// Rows `rows` of the orthogonal `Q` built by [`accumulate_reflectors`],
/// computed as `e_k^T H_0 H_1 ...` without forming `Q`.
pub(crate) fn reflector_rows(reduced: &[f64], n: usize, tri: &Tridiagonal, rows: &[usize]) -> Vec<f64> {
    let mut out = vec![0.0; rows.len() * n];
    for (r, &k) in out.chunks_exact_mut(n).zip(rows) {
        r[k] = 1.0;
        for i in 0..n.saturating_sub(1) {
            let beta = tri.betas[i];
            if beta == 0.0 {
                continue;
            }
            let mut dot = 0.0;
            for j in i + 1..n {
                dot += r[j] * reduced[j * n + i];
            }
            if dot == 0.0 {
                continue;
            }
            let scale = beta * dot;
            for j in i + 1..n {
                r[j] -= scale * reduced[j * n + i];
            }
        }
    }
    out
}

#[derive(Clone, Copy)]
struct Rotation {
    col: u32,
    c: f64,
    s: f64,
}

struct RotationLog {
    entries: Vec<Rotation>,
    lo: usize,
    hi: usize,
}

impl RotationLog {
    fn new() -> Self {
        Self {
            entries: Vec::new(),
            lo: usize::MAX,
            hi: 0,
        }
    }

    fn push(&mut self, col: usize, c: f64, s: f64) {
        self.lo = self.lo.min(col);
        self.hi = self.hi.max(col + 1);
        self.entries.push(Rotation {
            col: col as u32,
            c,
            s,
        });
    }

    /// Applies the logged column rotations, in order, to every row of `z`
    /// (rows of length `n`).
    fn flush(&mut self, z: &mut [f64], n: usize) {
        let rows_total = z.len() / n;
        if self.entries.is_empty() {
            return;
        }
        let (lo, hi) = (self.lo, self.hi + 1);
        let width = hi - lo;
        let mut buf = vec![[0.0f64; LANES]; width];
        for r0 in (0..rows_total).step_by(LANES) {
            let rows = LANES.min(rows_total - r0);
            for (c, lane) in buf.iter_mut().enumerate() {
                for r in 0..rows {
                    lane[r] = z[(r0 + r) * n + lo + c];
                }
            }
            for rot in &self.entries {
                let i = rot.col as usize - lo;
                let (left, right) = buf.split_at_mut(i + 1);
                let g = &mut left[i];
                let f = &mut right[0];
                for r in 0..LANES {
                    let (gv, fv) = (g[r], f[r]);
                    f[r] = rot.s * gv + rot.c * fv;
                    g[r] = rot.c * gv - rot.s * fv;
                }
            }
            for (c, lane) in buf.iter().enumerate() {
                for r in 0..rows {
                    z[(r0 + r) * n + lo + c] = lane[r];
                }
            }
        }
        self.entries.clear();
        self.lo = usize::MAX;
        self.hi = 0;
    }
}

/// Implicit-shift QL on the tridiagonal `(d, e)`. Eigenvalues are left in `d`
/// (unsorted). When `z` is given (any number of rows of length `d.len()`),
/// rotations are accumulated into its columns.
pub(crate) fn tridiagonal_ql(
    d: &mut [f64],
    e: &mut [f64],
    mut z: Option<&mut [f64]>,
) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut log = RotationLog::new();

    for l in 0..n {
        let mut iterations = 0;
        loop {
            let mut m = l;
            while m < n - 1 {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd || e[m].abs() < f64::MIN_POSITIVE {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > MAX_QL_ITERATIONS {
                return Err(Error::NumericalFailure {
                    iterations,
                    residual: e[l].abs(),
                });
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated_early = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated_early = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if z.is_some() {
                    log.push(i, c, s);
                }
            }
            if let Some(z) = z.as_deref_mut() {
                if log.entries.len() >= ROTATION_BATCH {
                    log.flush(z, n);
                }
            }
            if deflated_early {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    if let Some(z) = z {
        log.flush(z, n);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reconstruct(q: &[f64], n: usize, d: &[f64], e: &[f64]) -> Vec<f64> {
        // Q T Q^T
        let mut t = vec![0.0; n * n];
        for i in 0..n {
            t[i * n + i] = d[i];
            if i + 1 < n {
                t[i * n + i + 1] = e[i];
                t[(i + 1) * n + i] = e[i];
            }
        }
        let mut qt = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                qt[i * n + j] = (0..n).map(|k| q[i * n + k] * t[k * n + j]).sum();
            }
        }
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = (0..n).map(|k| qt[i * n + k] * q[j * n + k]).sum();
            }
        }
        out
    }

    #[test]
    fn tridiagonalization_is_a_similarity() {
        let n = 7;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = ((i * 31 + j * 17) % 11) as f64 - 5.0;
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let original = a.clone();
        let tri = tridiagonalize(&mut a, n);
        let q = accumulate_reflectors(&a, n, &tri);
        let back = reconstruct(&q, n, &tri.diag, &tri.off);
        for (x, y) in back.iter().zip(&original) {
            assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        }
        let rows = reflector_rows(&a, n, &tri, &[0, 3, 6]);
        for (r, k) in rows.chunks_exact(n).zip([0, 3, 6]) {
            for (x, y) in r.iter().zip(&q[k * n..(k + 1) * n]) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn ql_on_known_tridiagonal() {
        // Path graph Laplacian-like matrix 2 on diag, -1 off: eigenvalues 2 - 2cos(k pi/(n+1)).
        let n = 6;
        let mut d = vec![2.0; n];
        let mut e = vec![-1.0; n];
        e[n - 1] = 0.0;
        tridiagonal_ql(&mut d, &mut e, None).unwrap();
        d.sort_by(f64::total_cmp);
        for (k, x) in d.iter().enumerate() {
            let want = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((x - want).abs() < 1e-13);
        }
    }
}
