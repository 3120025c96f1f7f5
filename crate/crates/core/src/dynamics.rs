//! Time evolution by direct spectral summation.
//!
//! Quantum amplitudes are `alpha_{k,j}(t) = sum_n Q[k,n] Q[j,n] exp(-i rate lambda_n t)`
//! and classical occupation probabilities replace the phase by the decay
//! `exp(-rate lambda_n t)`. No time stepping is involved, so any `t` is exact
//! up to eigensolver error.

use std::f64::consts::PI;
use std::fmt;
use std::io::{self, Write};

use num_complex::Complex64;

use crate::bloch;
use crate::error::{Error, Result};
use crate::format::sig17;
use crate::lattice::{linear_to_node, node_to_linear, Node};
use crate::spectral::EigenSystem;

/// Roundoff negatives down to this are written as zero.
pub const OUTPUT_CLAMP: f64 = 1e-12;

/// Local maxima below this fraction of the series maximum are ignored when
/// looking for the first peak.
pub const DEFAULT_PEAK_FLOOR: f64 = 0.01;

/// Default relative deviation that marks departure from the bulk curve.
pub const DEFAULT_ONSET_THRESHOLD: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FieldKind {
    Quantum,
    Classical,
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Quantum => "quantum",
            FieldKind::Classical => "classical",
        })
    }
}

/// Occupation probabilities on every node for one source and one time.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityField {
    pub side: usize,
    pub source: Node,
    pub time: f64,
    pub kind: FieldKind,
    /// Indexed by linear node index.
    pub values: Vec<f64>,
}

impl ProbabilityField {
    pub fn get(&self, node: Node) -> Result<f64> {
        Ok(self.values[node_to_linear(node, self.side)?])
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Comment line, `kx,ky,value` header, then one row per node, row-major.
    pub fn write_csv<W: Write>(&self, out: W) -> io::Result<()> {
        let comment = format!(
            "N={} source={},{} t={} kind={}",
            self.side, self.source.jx, self.source.jy, self.time, self.kind
        );
        write_grid_csv(&comment, self.side, &self.values, out)
    }
}

pub(crate) fn write_grid_csv<W: Write>(
    comment: &str,
    side: usize,
    values: &[f64],
    mut out: W,
) -> io::Result<()> {
    writeln!(out, "# {comment}")?;
    writeln!(out, "kx,ky,value")?;
    for (idx, &v) in values.iter().enumerate() {
        let v = if (-OUTPUT_CLAMP..0.0).contains(&v) { 0.0 } else { v };
        writeln!(out, "{},{},{}", idx % side + 1, idx / side + 1, sig17(v))?;
    }
    Ok(())
}

fn side_of(eig: &EigenSystem) -> Result<usize> {
    let dim = eig.dim();
    let side = (dim as f64).sqrt().round() as usize;
    if side * side != dim {
        return Err(Error::domain(format!(
            "eigensystem dimension {dim} is not a square lattice"
        )));
    }
    Ok(side)
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("time must be finite and nonnegative, got {t}")))
    }
}

/// `alpha_{k,j}(t)`. Needs only the rows of `j` and `k`.
pub fn amplitude(eig: &EigenSystem, j: Node, k: Node, t: f64, rate: f64) -> Result<Complex64> {
    let side = side_of(eig)?;
    check_time(t)?;
    let qj = eig.try_node_row(node_to_linear(j, side)?)?;
    let qk = eig.try_node_row(node_to_linear(k, side)?)?;
    let (mut re, mut im) = (0.0, 0.0);
    for ((&a, &b), &lambda) in qk.iter().zip(qj).zip(eig.values()) {
        let w = a * b;
        let (s, c) = (rate * lambda * t).sin_cos();
        re += w * c;
        im -= w * s;
    }
    Ok(Complex64::new(re, im))
}

/// Weighted phases `Q[j,n] exp(-i rate lambda_n t)` split into real and
/// imaginary parts.
fn source_phases(eig: &EigenSystem, j: usize, t: f64, rate: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let qj = eig.try_node_row(j)?;
    Ok(qj
        .iter()
        .zip(eig.values())
        .map(|(&q, &lambda)| {
            let (s, c) = (rate * lambda * t).sin_cos();
            (q * c, -q * s)
        })
        .unzip())
}

pub fn quantum_field(eig: &EigenSystem, j: Node, t: f64, rate: f64) -> Result<ProbabilityField> {
    let side = side_of(eig)?;
    check_time(t)?;
    eig.require_complete()?;
    let (cr, ci) = source_phases(eig, node_to_linear(j, side)?, t, rate)?;
    let values = (0..eig.dim())
        .map(|k| {
            let row = eig.node_row(k);
            let re: f64 = row.iter().zip(&cr).map(|(a, b)| a * b).sum();
            let im: f64 = row.iter().zip(&ci).map(|(a, b)| a * b).sum();
            re * re + im * im
        })
        .collect();
    Ok(ProbabilityField {
        side,
        source: j,
        time: t,
        kind: FieldKind::Quantum,
        values,
    })
}

pub fn classical_field(eig: &EigenSystem, j: Node, t: f64, rate: f64) -> Result<ProbabilityField> {
    let side = side_of(eig)?;
    check_time(t)?;
    eig.require_complete()?;
    let qj = eig.node_row(node_to_linear(j, side)?);
    let weights: Vec<f64> = qj
        .iter()
        .zip(eig.values())
        .map(|(&q, &lambda)| q * (-rate * lambda * t).exp())
        .collect();
    let values = (0..eig.dim())
        .map(|k| eig.node_row(k).iter().zip(&weights).map(|(a, b)| a * b).sum())
        .collect();
    Ok(ProbabilityField {
        side,
        source: j,
        time: t,
        kind: FieldKind::Classical,
        values,
    })
}

/// `(t, pi_{k,j}(t))` for each requested time.
pub fn transition_series(
    eig: &EigenSystem,
    j: Node,
    k: Node,
    times: &[f64],
    rate: f64,
) -> Result<Vec<(f64, f64)>> {
    check_sorted(times)?;
    times
        .iter()
        .map(|&t| amplitude(eig, j, k, t, rate).map(|a| (t, a.norm_sqr())))
        .collect()
}

/// Classical `p_{k,j}(t)`. Needs only the rows of `j` and `k`.
pub fn classical_probability(eig: &EigenSystem, j: Node, k: Node, t: f64, rate: f64) -> Result<f64> {
    let side = side_of(eig)?;
    check_time(t)?;
    let qj = eig.try_node_row(node_to_linear(j, side)?)?;
    let qk = eig.try_node_row(node_to_linear(k, side)?)?;
    Ok(qk
        .iter()
        .zip(qj)
        .zip(eig.values())
        .map(|((&a, &b), &lambda)| a * b * (-rate * lambda * t).exp())
        .sum())
}

/// `(t, p_{k,j}(t))` for the classical walk.
pub fn classical_series(
    eig: &EigenSystem,
    j: Node,
    k: Node,
    times: &[f64],
    rate: f64,
) -> Result<Vec<(f64, f64)>> {
    check_sorted(times)?;
    times
        .iter()
        .map(|&t| classical_probability(eig, j, k, t, rate).map(|p| (t, p)))
        .collect()
}

/// `(t, pi_{j,j}(t))`: probability of being back at the source.
pub fn return_series(eig: &EigenSystem, j: Node, times: &[f64], rate: f64) -> Result<Vec<(f64, f64)>> {
    transition_series(eig, j, j, times, rate)
}

pub fn snapshot_run(
    eig: &EigenSystem,
    j: Node,
    times: &[f64],
    rate: f64,
) -> Result<Vec<ProbabilityField>> {
    check_sorted(times)?;
    times.iter().map(|&t| quantum_field(eig, j, t, rate)).collect()
}

fn check_sorted(times: &[f64]) -> Result<()> {
    if let Some(&t) = times.iter().find(|t| !(**t >= 0.0 && t.is_finite())) {
        return Err(Error::domain(format!("time must be finite and nonnegative, got {t}")));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::domain("times must be sorted ascending"));
    }
    Ok(())
}

/// Uniform grid `0, dt, 2 dt, ...` up to and including `t_max` (to rounding).
pub fn time_grid(t_max: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) || !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(Error::domain(format!(
            "time grid needs t_max >= 0 and dt > 0 (got t_max={t_max}, dt={dt})"
        )));
    }
    let steps = (t_max / dt + 1e-9).floor() as usize;
    Ok((0..=steps).map(|i| i as f64 * dt).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub time: f64,
    pub value: f64,
}

/// Local maxima by three-point comparison, refined by the parabola through
/// each maximum and its neighbours. Assumes a uniform grid.
pub fn find_peaks(series: &[(f64, f64)]) -> Vec<Peak> {
    series
        .windows(3)
        .filter(|w| w[1].1 > w[0].1 && w[1].1 >= w[2].1)
        .map(|w| {
            let (t1, y0, y1, y2) = (w[1].0, w[0].1, w[1].1, w[2].1);
            let h = w[1].0 - w[0].0;
            let curvature = y0 - 2.0 * y1 + y2;
            if curvature >= 0.0 {
                return Peak { time: t1, value: y1 };
            }
            let shift = 0.5 * (y0 - y2) / curvature;
            Peak {
                time: t1 + shift * h,
                value: y1 - 0.25 * (y0 - y2) * shift,
            }
        })
        .collect()
}

/// First refined local maximum whose value reaches `floor` times the series
/// maximum. The floor keeps roundoff wiggles in the early-time tail out.
pub fn first_peak(series: &[(f64, f64)], floor: f64) -> Option<Peak> {
    let max = series.iter().map(|p| p.1).fold(0.0, f64::max);
    find_peaks(series)
        .into_iter()
        .find(|p| p.value >= floor * max)
}

/// A finite-lattice return curve next to its infinite-lattice counterpart.
#[derive(Debug, Clone, PartialEq)]
pub struct BulkComparison {
    pub times: Vec<f64>,
    pub finite: Vec<f64>,
    pub bulk: Vec<f64>,
    /// Maximum of the bulk curve over one oscillation period centred on each
    /// time; the scale for relative deviations, since the bulk curve itself
    /// touches zero.
    pub envelope: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviationOnset {
    pub time: f64,
    pub relative_deviation: f64,
    /// Whether the finite lattice lies above the bulk at the onset.
    pub above_bulk: bool,
}

impl BulkComparison {
    pub fn relative_deviation(&self, i: usize) -> f64 {
        (self.finite[i] - self.bulk[i]).abs() / self.envelope[i]
    }

    /// First grid time where the relative deviation exceeds `threshold`.
    pub fn onset(&self, threshold: f64) -> Option<DeviationOnset> {
        (0..self.times.len())
            .find(|&i| self.relative_deviation(i) > threshold)
            .map(|i| DeviationOnset {
                time: self.times[i],
                relative_deviation: self.relative_deviation(i),
                above_bulk: self.finite[i] > self.bulk[i],
            })
    }
}

/// Compares `pi_{j,j}(t)` with the bulk `[J_0(2 rate t)]^4` on a uniform grid.
pub fn compare_return_with_bulk(
    eig: &EigenSystem,
    j: Node,
    t_max: f64,
    dt: f64,
    rate: f64,
) -> Result<BulkComparison> {
    let times = time_grid(t_max, dt)?;
    let finite: Vec<f64> = return_series(eig, j, &times, rate)?
        .into_iter()
        .map(|p| p.1)
        .collect();
    let bulk = times
        .iter()
        .map(|&t| bloch::bulk_probability_offset(0, 0, t, rate))
        .collect::<Result<Vec<f64>>>()?;
    // J_0(2 rate t) has nodes spaced about pi / (2 rate) apart.
    let half_window = ((PI / (4.0 * rate)) / dt).round() as usize;
    let envelope = (0..times.len())
        .map(|i| {
            let lo = i.saturating_sub(half_window);
            let hi = (i + half_window + 1).min(times.len());
            bulk[lo..hi].iter().copied().fold(0.0, f64::max)
        })
        .collect();
    Ok(BulkComparison {
        times,
        finite,
        bulk,
        envelope,
    })
}

/// Nodes on the main diagonal `kx = ky`.
pub fn diagonal_nodes(side: usize) -> Vec<Node> {
    (1..=side).map(|i| Node::new(i, i)).collect()
}

/// The node holding the largest probability, excluding `exclude`.
pub fn argmax_excluding(field: &ProbabilityField, exclude: Node) -> Result<Node> {
    let skip = node_to_linear(exclude, field.side)?;
    let (idx, _) = field
        .values
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != skip)
        .fold((skip, f64::NEG_INFINITY), |best, (i, &v)| {
            if v > best.1 {
                (i, v)
            } else {
                best
            }
        });
    linear_to_node(idx, field.side)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{build_adjacency, special_nodes, LatticeSpec};
    use crate::spectral::{decompose, decompose_rows};

    fn system(side: usize) -> EigenSystem {
        decompose(&build_adjacency(LatticeSpec::open(side).unwrap())).unwrap()
    }

    #[test]
    fn identity_at_time_zero() {
        let eig = system(4);
        let j = Node::new(2, 3);
        let a = amplitude(&eig, j, j, 0.0, 1.0).unwrap();
        assert!((a.re - 1.0).abs() < 1e-13 && a.im.abs() < 1e-13);
        let b = amplitude(&eig, j, Node::new(4, 1), 0.0, 1.0).unwrap();
        assert!(b.norm() < 1e-13);

        let q = quantum_field(&eig, j, 0.0, 1.0).unwrap();
        let c = classical_field(&eig, j, 0.0, 1.0).unwrap();
        for k in 0..16 {
            let want = if k == 9 { 1.0 } else { 0.0 };
            assert!((q.values[k] - want).abs() < 1e-13);
            assert!((c.values[k] - want).abs() < 1e-13);
        }
    }

    #[test]
    fn four_cycle_return_probability() {
        // Spectrum (0, 2, 2, 4) with uniform weights 1/4 gives
        // alpha = exp(-2it) cos^2 t.
        let eig = system(2);
        let j = Node::new(1, 1);
        let a = amplitude(&eig, j, j, 0.7, 1.0).unwrap();
        let want = Complex64::from_polar(0.7f64.cos().powi(2), -1.4);
        assert!((a - want).norm() < 1e-14);

        let p = |t: f64| amplitude(&eig, j, j, t, 1.0).unwrap().norm_sqr();
        assert!(p(PI / 2.0) < 1e-14);
        assert!((p(PI) - 1.0).abs() < 1e-13);
    }

    #[test]
    fn four_cycle_matches_taylor_series_of_propagator() {
        // exp(-iHt) e_j via a truncated power series in the raw matrix.
        let a = build_adjacency(LatticeSpec::open(2).unwrap());
        let eig = decompose(&a).unwrap();
        let t = 1.3;
        let mut term = vec![Complex64::new(0.0, 0.0); 4];
        term[0] = Complex64::new(1.0, 0.0);
        let mut sum = term.clone();
        for m in 1..60 {
            let mut next = vec![Complex64::new(0.0, 0.0); 4];
            for r in 0..4 {
                for c in 0..4 {
                    next[r] += term[c] * a.get(r, c);
                }
                next[r] *= Complex64::new(0.0, -t / m as f64);
            }
            term = next;
            for r in 0..4 {
                sum[r] += term[r];
            }
        }
        for k in 0..4 {
            let node = linear_to_node(k, 2).unwrap();
            let got = amplitude(&eig, Node::new(1, 1), node, t, 1.0).unwrap();
            assert!((got - sum[k]).norm() < 1e-12);
        }
    }

    #[test]
    fn classical_three_by_three_equilibrates() {
        let eig = system(3);
        let m = special_nodes(3).middle.unwrap();
        let f = classical_field(&eig, m, 50.0, 1.0).unwrap();
        for v in &f.values {
            assert!((v - 1.0 / 9.0).abs() < 1e-9);
        }
        let a = build_adjacency(LatticeSpec::open(3).unwrap());
        let part = decompose_rows(&a, &[4, 8]).unwrap();
        let p = classical_probability(&part, m, Node::new(3, 3), 0.7, 1.0).unwrap();
        let full = classical_field(&eig, m, 0.7, 1.0).unwrap();
        assert!((p - full.get(Node::new(3, 3)).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn fields_need_complete_system() {
        let a = build_adjacency(LatticeSpec::open(3).unwrap());
        let part = decompose_rows(&a, &[0, 8]).unwrap();
        assert!(quantum_field(&part, Node::new(1, 1), 1.0, 1.0).is_err());
        assert!(amplitude(&part, Node::new(1, 1), Node::new(3, 3), 1.0, 1.0).is_ok());
        assert!(amplitude(&part, Node::new(1, 1), Node::new(2, 3), 1.0, 1.0).is_err());
    }

    #[test]
    fn bad_inputs() {
        let eig = system(3);
        assert!(amplitude(&eig, Node::new(4, 1), Node::new(1, 1), 1.0, 1.0).is_err());
        assert!(amplitude(&eig, Node::new(1, 1), Node::new(1, 1), -1.0, 1.0).is_err());
        assert!(return_series(&eig, Node::new(1, 1), &[1.0, 0.5], 1.0).is_err());
        assert!(time_grid(1.0, 0.0).is_err());
    }

    #[test]
    fn grid_includes_endpoint() {
        let g = time_grid(1.0, 0.1).unwrap();
        assert_eq!(g.len(), 11);
        assert!((g[10] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn peak_refinement_recovers_parabola_vertex() {
        let series: Vec<(f64, f64)> = (0..50)
            .map(|i| {
                let t = i as f64 * 0.1;
                (t, 1.0 - (t - 2.345).powi(2))
            })
            .collect();
        let p = first_peak(&series, 0.0).unwrap();
        assert!((p.time - 2.345).abs() < 1e-12);
        assert!((p.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn peak_floor_skips_small_bumps() {
        let series = vec![(0.0, 0.0), (1.0, 1e-6), (2.0, 0.0), (3.0, 0.5), (4.0, 0.1)];
        let p = first_peak(&series, 0.01).unwrap();
        assert!((p.time - 3.0).abs() < 0.5 && p.value >= 0.5);
        assert_eq!(first_peak(&series, 0.0).unwrap().time, 1.0);
    }

    #[test]
    fn field_csv_clamps_roundoff_negatives() {
        let f = ProbabilityField {
            side: 2,
            source: Node::new(1, 1),
            time: 0.5,
            kind: FieldKind::Quantum,
            values: vec![1.0, -1e-14, -1e-3, 0.0],
        };
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# N=2 source=1,1 t=0.5 kind=quantum");
        assert_eq!(lines[1], "kx,ky,value");
        assert_eq!(lines[2], "1,1,1.0000000000000000e0");
        assert_eq!(lines[3], "2,1,0.0000000000000000e0");
        assert_eq!(lines[4], "1,2,-1.0000000000000000e-3");
        assert_eq!(lines.len(), 6);
    }
}
