//! Long-time averages of the quantum transition probabilities.
//!
//! Averaging `|alpha_{k,j}(t)|^2` over all time kills every cross term between
//! different eigenvalues, so the limit is a sum over degeneracy classes `C`:
//!
//! `chi_{k,j} = sum_C ( sum_{n in C} Q[k,n] Q[j,n] )^2`.
//!
//! A brute-force trapezoidal time average is provided as an independent check.

use std::io::{self, Write};
use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::dynamics::write_grid_csv;
use crate::error::{Error, Result};
use crate::format::sig17;
use crate::lattice::{build_adjacency, Boundary, node_to_linear, special_nodes, LatticeSpec, Node};
use crate::spectral::{decompose_rows, group_degeneracies, scaled_tau, DegeneracyPartition, EigenSystem};

/// Default threshold on `|chi_cc - chi_oc| * N^2`.
pub const DEFAULT_ETA: f64 = 1e-6;
/// Default upper bound for scanned side lengths.
pub const DEFAULT_MAX_SIDE: usize = 60;

#[derive(Debug, Clone, PartialEq)]
pub struct LimitingField {
    pub side: usize,
    pub source: Node,
    /// Indexed by linear node index.
    pub values: Vec<f64>,
}

impl LimitingField {
    pub fn get(&self, node: Node) -> Result<f64> {
        Ok(self.values[node_to_linear(node, self.side)?])
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let comment = format!(
            "N={} source={},{} kind=limiting",
            self.side, self.source.jx, self.source.jy
        );
        write_grid_csv(&comment, self.side, &self.values, out)
    }
}

fn side_of(eig: &EigenSystem) -> usize {
    (eig.dim() as f64).sqrt().round() as usize
}

fn check_partition(eig: &EigenSystem, partition: &DegeneracyPartition) -> Result<()> {
    if partition.len() != eig.dim() {
        return Err(Error::domain(format!(
            "partition covers {} eigenvalues, eigensystem has {}",
            partition.len(),
            eig.dim()
        )));
    }
    Ok(())
}

/// `chi_{k,j}` for a single pair; needs only the rows of `j` and `k`.
pub fn limiting_probability(
    eig: &EigenSystem,
    partition: &DegeneracyPartition,
    j: Node,
    k: Node,
) -> Result<f64> {
    check_partition(eig, partition)?;
    let side = side_of(eig);
    let qj = eig.try_node_row(node_to_linear(j, side)?)?;
    let qk = eig.try_node_row(node_to_linear(k, side)?)?;
    Ok(partition
        .classes()
        .iter()
        .map(|class| {
            let overlap: f64 = class.clone().map(|n| qk[n] * qj[n]).sum();
            overlap * overlap
        })
        .sum())
}

/// `chi_{k,j}` for every node `k`.
pub fn limiting_field(
    eig: &EigenSystem,
    partition: &DegeneracyPartition,
    j: Node,
) -> Result<LimitingField> {
    check_partition(eig, partition)?;
    eig.require_complete()?;
    let side = side_of(eig);
    let qj = eig.node_row(node_to_linear(j, side)?);
    let values = (0..eig.dim())
        .map(|k| {
            let qk = eig.node_row(k);
            partition
                .classes()
                .iter()
                .map(|class| {
                    let overlap: f64 = class.clone().map(|n| qk[n] * qj[n]).sum();
                    overlap * overlap
                })
                .sum()
        })
        .collect();
    Ok(LimitingField {
        side,
        source: j,
        values,
    })
}

/// Long-time limit of the classical walk: projection onto the zero mode
/// class, i.e. equipartition `1 / N^2` on a connected lattice.
pub fn classical_limiting_field(
    eig: &EigenSystem,
    partition: &DegeneracyPartition,
    j: Node,
) -> Result<LimitingField> {
    check_partition(eig, partition)?;
    eig.require_complete()?;
    let side = side_of(eig);
    let qj = eig.node_row(node_to_linear(j, side)?);
    let zero = partition.classes()[0].clone();
    let values = (0..eig.dim())
        .map(|k| {
            let qk = eig.node_row(k);
            zero.clone().map(|n| qk[n] * qj[n]).sum()
        })
        .collect();
    Ok(LimitingField {
        side,
        source: j,
        values,
    })
}

/// Trapezoidal average of `pi_{k,j}(t)` over `[0, t_max]`. The step is
/// shrunk so the grid ends exactly at `t_max`.
pub fn limiting_by_time_average(
    eig: &EigenSystem,
    j: Node,
    t_max: f64,
    dt: f64,
    rate: f64,
) -> Result<LimitingField> {
    if !(t_max > 0.0 && t_max.is_finite() && dt > 0.0 && dt <= t_max) {
        return Err(Error::domain(format!(
            "time average needs T > 0 and 0 < dt <= T (got T={t_max}, dt={dt})"
        )));
    }
    eig.require_complete()?;
    let side = side_of(eig);
    let dim = eig.dim();
    let qj = eig.node_row(node_to_linear(j, side)?);
    let steps = (t_max / dt).ceil() as usize;
    let h = t_max / steps as f64;

    let mut acc = vec![0.0; dim];
    let mut cr = vec![0.0; dim];
    let mut ci = vec![0.0; dim];
    for step in 0..=steps {
        let t = step as f64 * h;
        for ((re, im), (&q, &lambda)) in cr.iter_mut().zip(ci.iter_mut()).zip(qj.iter().zip(eig.values())) {
            let (s, c) = (rate * lambda * t).sin_cos();
            *re = q * c;
            *im = -q * s;
        }
        let weight = if step == 0 || step == steps { 0.5 } else { 1.0 };
        for (k, slot) in acc.iter_mut().enumerate() {
            let row = eig.node_row(k);
            let (mut re, mut im) = (0.0, 0.0);
            for ((&q, &a), &b) in row.iter().zip(&cr).zip(&ci) {
                re += q * a;
                im += q * b;
            }
            *slot += weight * (re * re + im * im);
        }
    }
    let norm = h / t_max;
    Ok(LimitingField {
        side,
        source: j,
        values: acc.into_iter().map(|v| v * norm).collect(),
    })
}

/// Mean limiting probability on the star through `center` (both diagonals,
/// its row and its column) and on the remaining nodes.
pub fn star_contrast(field: &LimitingField, center: Node) -> Result<(f64, f64)> {
    center.check(field.side)?;
    let (cx, cy) = (center.jx as i64, center.jy as i64);
    let (mut on, mut n_on, mut off, mut n_off) = (0.0, 0usize, 0.0, 0usize);
    for (idx, &v) in field.values.iter().enumerate() {
        let x = (idx % field.side) as i64 + 1;
        let y = (idx / field.side) as i64 + 1;
        let (dx, dy) = (x - cx, y - cy);
        if dx == 0 || dy == 0 || dx == dy || dx == -dy {
            on += v;
            n_on += 1;
        } else {
            off += v;
            n_off += 1;
        }
    }
    Ok((on / n_on as f64, if n_off == 0 { 0.0 } else { off / n_off as f64 }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanConfig {
    pub rate: f64,
    /// Threshold on `|chi_cc - chi_oc| * N^2`.
    pub eta: f64,
    /// Degeneracy tolerance relative to `max(1, max|A_ij|)`.
    pub relative_tau: f64,
    pub max_side: usize,
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            rate: 1.0,
            eta: DEFAULT_ETA,
            relative_tau: crate::spectral::DEFAULT_RELATIVE_TAU,
            max_side: DEFAULT_MAX_SIDE,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AsymmetryRecord {
    pub side: usize,
    pub chi_cc: f64,
    pub chi_oc: f64,
    /// `(chi_cc - chi_oc) * N^2`.
    pub diff_scaled: f64,
    pub asymmetric: bool,
    /// The verdict flips when the degeneracy tolerance is scaled by 10 or 1/10.
    pub tolerance_sensitive: bool,
}

/// Corner-source limiting probabilities at the corner and the opposite corner.
pub fn asymmetry_record(side: usize, cfg: &ScanConfig) -> Result<AsymmetryRecord> {
    let run = || -> Result<AsymmetryRecord> {
        let a = build_adjacency(LatticeSpec::new(side, Boundary::Open, cfg.rate)?);
        let landmarks = special_nodes(side);
        let (c, oc) = (landmarks.corner, landmarks.opposite_corner);
        let eig = decompose_rows(&a, &[node_to_linear(c, side)?, node_to_linear(oc, side)?])?;
        let tau = scaled_tau(&a, cfg.relative_tau);

        let verdict = |tau: f64| -> Result<(f64, f64, f64, bool)> {
            let p = group_degeneracies(eig.values(), tau)?;
            let chi_cc = limiting_probability(&eig, &p, c, c)?;
            let chi_oc = limiting_probability(&eig, &p, c, oc)?;
            let diff = (chi_cc - chi_oc) * (side * side) as f64;
            Ok((chi_cc, chi_oc, diff, diff.abs() > cfg.eta))
        };
        let (chi_cc, chi_oc, diff_scaled, asymmetric) = verdict(tau)?;
        let tolerance_sensitive =
            verdict(tau * 10.0)?.3 != asymmetric || verdict(tau / 10.0)?.3 != asymmetric;
        Ok(AsymmetryRecord {
            side,
            chi_cc,
            chi_oc,
            diff_scaled,
            asymmetric,
            tolerance_sensitive,
        })
    };
    run().map_err(|e| e.at_size(side))
}

/// One record per side length, in ascending order. Sizes are processed in
/// parallel on the current rayon pool.
pub fn asymmetry_scan(sides: RangeInclusive<usize>, cfg: &ScanConfig) -> Result<Vec<AsymmetryRecord>> {
    if *sides.start() < 1 || *sides.end() > cfg.max_side || sides.is_empty() {
        return Err(Error::domain(format!(
            "scan range {}..={} must be nonempty within [1, {}]",
            sides.start(),
            sides.end(),
            cfg.max_side
        )));
    }
    let sides: Vec<usize> = sides.collect();
    sides
        .par_iter()
        .map(|&side| asymmetry_record(side, cfg))
        .collect()
}

pub fn write_scan_csv<W: Write>(records: &[AsymmetryRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "N,chi_cc,chi_oc,diff_scaled,asymmetric,tolerance_sensitive")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.side,
            sig17(r.chi_cc),
            sig17(r.chi_oc),
            sig17(r.diff_scaled),
            r.asymmetric,
            r.tolerance_sensitive
        )?;
    }
    Ok(())
}

/// Least-squares line through `(ln N, ln chi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

pub fn fit_power_law(points: &[(f64, f64)]) -> Result<PowerLawFit> {
    if points.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: points.len(),
        });
    }
    if let Some(p) = points.iter().find(|p| !(p.0 > 0.0 && p.1 > 0.0)) {
        return Err(Error::domain(format!(
            "log-log fit needs positive data, got ({}, {})",
            p.0, p.1
        )));
    }
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("log-log fit needs at least two distinct sizes"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (logs
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / n)
        .sqrt();
    Ok(PowerLawFit {
        slope,
        intercept,
        residual,
        points: logs.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub side: usize,
    pub chi_oc_c: f64,
    pub chi_m_m: f64,
    /// Classical limiting probability at the opposite corner.
    pub chi_classical: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingReport {
    pub points: Vec<ScalingPoint>,
    pub opposite_corner_fit: PowerLawFit,
    pub middle_fit: PowerLawFit,
    pub classical_fit: PowerLawFit,
}

pub fn scaling_point(side: usize, cfg: &ScanConfig) -> Result<ScalingPoint> {
    let run = || -> Result<ScalingPoint> {
        let landmarks = special_nodes(side);
        let m = landmarks.middle.ok_or_else(|| {
            Error::domain(format!("N={side} is even and has no single middle node"))
        })?;
        let (c, oc) = (landmarks.corner, landmarks.opposite_corner);
        let a = build_adjacency(LatticeSpec::new(side, Boundary::Open, cfg.rate)?);
        let rows = [c, oc, m]
            .iter()
            .map(|&n| node_to_linear(n, side))
            .collect::<Result<Vec<_>>>()?;
        let eig = decompose_rows(&a, &rows)?;
        let tau = scaled_tau(&a, cfg.relative_tau);
        let p = group_degeneracies(eig.values(), tau)?;
        let qc = eig.try_node_row(rows[0])?;
        let qoc = eig.try_node_row(rows[1])?;
        let chi_classical = p.classes()[0].clone().map(|n| qc[n] * qoc[n]).sum();
        Ok(ScalingPoint {
            side,
            chi_oc_c: limiting_probability(&eig, &p, c, oc)?,
            chi_m_m: limiting_probability(&eig, &p, m, m)?,
            chi_classical,
        })
    };
    run().map_err(|e| e.at_size(side))
}

/// Limiting probabilities and log-log slopes over the given odd sizes.
pub fn scaling_series(sides: &[usize], cfg: &ScanConfig) -> Result<ScalingReport> {
    if sides.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: sides.len(),
        });
    }
    let points = sides
        .par_iter()
        .map(|&side| scaling_point(side, cfg))
        .collect::<Result<Vec<_>>>()?;
    let fit = |f: fn(&ScalingPoint) -> f64| {
        fit_power_law(&points.iter().map(|p| (p.side as f64, f(p))).collect::<Vec<_>>())
    };
    Ok(ScalingReport {
        opposite_corner_fit: fit(|p| p.chi_oc_c)?,
        middle_fit: fit(|p| p.chi_m_m)?,
        classical_fit: fit(|p| p.chi_classical)?,
        points,
    })
}

pub fn write_scaling_csv<W: Write>(points: &[ScalingPoint], mut out: W) -> io::Result<()> {
    writeln!(out, "N,chi_oc_c,chi_m_m,chi_classical")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{}",
            p.side,
            sig17(p.chi_oc_c),
            sig17(p.chi_m_m),
            sig17(p.chi_classical)
        )?;
    }
    Ok(())
}
