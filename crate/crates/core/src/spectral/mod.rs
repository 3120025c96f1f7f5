//! Eigendecomposition of the connectivity matrix and grouping of degenerate
//! eigenvalues.

mod tridiag;

use std::io::{self, Write};
use std::ops::Range;

use crate::error::{Error, Result};
use crate::format::sig17;
use crate::lattice::AdjacencyMatrix;

/// Containment slack for the `[0, 8]` spectral bounds of lattice matrices.
pub const SPECTRAL_BOUND_SLACK: f64 = 1e-8;

/// Relative degeneracy tolerance; the absolute tolerance is this times
/// `max(1, max|A_ij|)`.
pub const DEFAULT_RELATIVE_TAU: f64 = 1e-8;

/// Ascending eigenvalues and orthonormal eigenvectors of a symmetric matrix.
///
/// A system may hold the eigenvector components of only some nodes (see
/// [`decompose_rows`]); operations that need other rows report a domain error.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    dim: usize,
    values: Vec<f64>,
    /// Node indices whose rows are stored, ascending.
    rows: Vec<usize>,
    /// `slot[k]` is the position of node `k` in `rows`, or `usize::MAX`.
    slot: Vec<usize>,
    /// Row-major: `vectors[slot[k] * dim + n]` is component `k` of eigenvector `n`.
    vectors: Vec<f64>,
}

impl EigenSystem {
    fn new(dim: usize, values: Vec<f64>, rows: Vec<usize>, vectors: Vec<f64>) -> Self {
        let mut slot = vec![usize::MAX; dim];
        for (pos, &k) in rows.iter().enumerate() {
            slot[k] = pos;
        }
        Self {
            dim,
            values,
            rows,
            slot,
            vectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, n: usize) -> f64 {
        self.values[n]
    }

    /// True when every node's eigenvector components are stored.
    pub fn is_complete(&self) -> bool {
        self.rows.len() == self.dim
    }

    pub fn stored_rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn has_row(&self, k: usize) -> bool {
        k < self.dim && self.slot[k] != usize::MAX
    }

    /// `Q[k, n]`. Panics if row `k` is not stored.
    pub fn component(&self, k: usize, n: usize) -> f64 {
        self.node_row(k)[n]
    }

    /// Overlaps `<k|q_n>` for every eigenvector `n`. Panics if row `k` is not
    /// stored; use [`EigenSystem::try_node_row`] otherwise.
    pub fn node_row(&self, k: usize) -> &[f64] {
        self.try_node_row(k)
            .unwrap_or_else(|e| panic!("{e}"))
    }

    pub fn try_node_row(&self, k: usize) -> Result<&[f64]> {
        if !self.has_row(k) {
            return Err(Error::domain(format!(
                "eigenvector components for node index {k} not available"
            )));
        }
        let pos = self.slot[k];
        Ok(&self.vectors[pos * self.dim..(pos + 1) * self.dim])
    }

    pub(crate) fn require_complete(&self) -> Result<()> {
        if self.is_complete() {
            Ok(())
        } else {
            Err(Error::domain(
                "operation needs the complete eigenvector matrix",
            ))
        }
    }

    /// `max |Q^T Q - I|`. Needs a complete system.
    pub fn orthonormality_error(&self) -> f64 {
        assert!(self.is_complete(), "orthonormality check needs all rows");
        let n = self.dim;
        let mut gram = vec![0.0; n * n];
        for k in 0..n {
            let row = self.node_row(k);
            for a in 0..n {
                let ra = row[a];
                if ra == 0.0 {
                    continue;
                }
                for (g, &rb) in gram[a * n..(a + 1) * n].iter_mut().zip(row) {
                    *g += ra * rb;
                }
            }
        }
        let mut worst = 0.0f64;
        for a in 0..n {
            for b in 0..n {
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((gram[a * n + b] - target).abs());
            }
        }
        worst
    }

    /// `max |A Q - Q diag(lambda)|` for the matrix this system came from.
    pub fn residual(&self, a: &AdjacencyMatrix) -> f64 {
        assert!(self.is_complete(), "residual check needs all rows");
        let n = self.dim;
        let mut worst = 0.0f64;
        let mut aq = vec![0.0; n];
        for k in 0..n {
            aq.fill(0.0);
            for (m, &akm) in a.row(k).iter().enumerate() {
                if akm == 0.0 {
                    continue;
                }
                for (acc, &q) in aq.iter_mut().zip(self.node_row(m)) {
                    *acc += akm * q;
                }
            }
            for (col, acc) in aq.iter().enumerate() {
                let r = acc - self.component(k, col) * self.values[col];
                worst = worst.max(r.abs());
            }
        }
        worst
    }

    pub fn degeneracies(&self, tau: f64) -> Result<DegeneracyPartition> {
        group_degeneracies(&self.values, tau)
    }

    /// Writes `n,lambda` rows, 1-based, ascending.
    pub fn write_spectrum_csv<W: Write>(&self, out: W) -> io::Result<()> {
        write_spectrum_csv(&self.values, out)
    }
}

pub fn write_spectrum_csv<W: Write>(values: &[f64], mut out: W) -> io::Result<()> {
    writeln!(out, "n,lambda")?;
    for (i, v) in values.iter().enumerate() {
        writeln!(out, "{},{}", i + 1, sig17(*v))?;
    }
    Ok(())
}

fn check_symmetric(a: &AdjacencyMatrix) -> Result<()> {
    let n = a.dim();
    for i in 0..n {
        for j in 0..i {
            if a.get(i, j) != a.get(j, i) {
                return Err(Error::domain(format!(
                    "matrix not symmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

/// Full eigendecomposition of `A`.
pub fn decompose(a: &AdjacencyMatrix) -> Result<EigenSystem> {
    check_symmetric(a)?;
    let n = a.dim();
    let mut work = a.as_slice().to_vec();
    let mut tri = tridiag::tridiagonalize(&mut work, n);
    let q = tridiag::accumulate_reflectors(&work, n, &tri);
    drop(work);
    finish(n, &mut tri, q, (0..n).collect())
}

/// Eigenvalues plus the eigenvector components of the listed nodes only.
///
/// The stored rows agree with [`decompose`] up to rounding; the saving
/// is that rotations are applied to `rows.len()` rows instead of `N^2`.
pub fn decompose_rows(a: &AdjacencyMatrix, rows: &[usize]) -> Result<EigenSystem> {
    check_symmetric(a)?;
    let n = a.dim();
    let mut rows = rows.to_vec();
    rows.sort_unstable();
    rows.dedup();
    if let Some(&bad) = rows.iter().find(|&&k| k >= n) {
        return Err(Error::domain(format!("row {bad} outside [0, {n})")));
    }
    let mut work = a.as_slice().to_vec();
    let mut tri = tridiag::tridiagonalize(&mut work, n);
    let q = tridiag::reflector_rows(&work, n, &tri, &rows);
    drop(work);
    finish(n, &mut tri, q, rows)
}

fn finish(
    n: usize,
    tri: &mut tridiag::Tridiagonal,
    mut q: Vec<f64>,
    rows: Vec<usize>,
) -> Result<EigenSystem> {
    let mut off = std::mem::take(&mut tri.off);
    tridiag::tridiagonal_ql(&mut tri.diag, &mut off, Some(&mut q))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| tri.diag[x].total_cmp(&tri.diag[y]));
    let values: Vec<f64> = order.iter().map(|&i| tri.diag[i]).collect();
    let mut vectors = vec![0.0; q.len()];
    for (dst_row, src_row) in vectors.chunks_exact_mut(n).zip(q.chunks_exact(n)) {
        for (dst, &col) in dst_row.iter_mut().zip(&order) {
            *dst = src_row[col];
        }
    }
    Ok(EigenSystem::new(n, values, rows, vectors))
}

/// Eigenvalues only, ascending. Skips all eigenvector work.
pub fn eigenvalues(a: &AdjacencyMatrix) -> Result<Vec<f64>> {
    check_symmetric(a)?;
    let n = a.dim();
    let mut work = a.as_slice().to_vec();
    let mut tri = tridiag::tridiagonalize(&mut work, n);
    drop(work);
    let mut off = std::mem::take(&mut tri.off);
    tridiag::tridiagonal_ql(&mut tri.diag, &mut off, None)?;
    tri.diag.sort_by(f64::total_cmp);
    Ok(tri.diag)
}

/// Default degeneracy tolerance for a matrix: `1e-8 * max(1, max|A_ij|)`.
pub fn default_tau(a: &AdjacencyMatrix) -> f64 {
    scaled_tau(a, DEFAULT_RELATIVE_TAU)
}

/// `relative * max(1, max|A_ij|)`.
pub fn scaled_tau(a: &AdjacencyMatrix, relative: f64) -> f64 {
    relative * a.max_abs().max(1.0)
}

/// Index ranges over a sorted spectrum whose eigenvalues are numerically equal.
#[derive(Debug, Clone, PartialEq)]
pub struct DegeneracyPartition {
    classes: Vec<Range<usize>>,
    tolerance: f64,
}

impl DegeneracyPartition {
    pub fn classes(&self) -> &[Range<usize>] {
        &self.classes
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    /// Number of eigenvalues covered.
    pub fn len(&self) -> usize {
        self.classes.last().map_or(0, |c| c.end)
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }
}

/// Gap-based clustering: a new class starts exactly where consecutive sorted
/// eigenvalues differ by more than `tau`. Chains of small gaps merge
/// transitively.
pub fn group_degeneracies(values: &[f64], tau: f64) -> Result<DegeneracyPartition> {
    if !(tau > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tau}")));
    }
    if values.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("eigenvalues must be sorted ascending"));
    }
    let mut classes = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tau {
            classes.push(start..i);
            start = i;
        }
    }
    Ok(DegeneracyPartition {
        classes,
        tolerance: tau,
    })
}
