//! Analytic baselines under periodic boundary conditions.
//!
//! Finite periodic lattices are diagonalized by plane waves with energies
//! `E = 4 - 2 cos(theta_x) - 2 cos(theta_y)`, `theta = 2 pi (n, l) / N`.
//! Amplitudes on a finite periodic lattice are exact finite sums over those
//! modes; the infinite lattice reduces to products of Bessel functions.

mod bessel;

use std::f64::consts::TAU;

use num_complex::Complex64;

pub use bessel::{bessel_j, MAX_ARGUMENT as BESSEL_MAX_ARGUMENT, MAX_ORDER as BESSEL_MAX_ORDER};

use crate::error::{Error, Result};
use crate::lattice::Node;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochMode {
    pub n: usize,
    pub l: usize,
    pub theta_x: f64,
    pub theta_y: f64,
    pub energy: f64,
}

impl BlochMode {
    pub fn new(n: usize, l: usize, side: usize) -> Self {
        let theta_x = TAU * n as f64 / side as f64;
        let theta_y = TAU * l as f64 / side as f64;
        Self {
            n,
            l,
            theta_x,
            theta_y,
            energy: 4.0 - 2.0 * theta_x.cos() - 2.0 * theta_y.cos(),
        }
    }
}

/// All `N^2` modes, `n` and `l` running over `1..=N`.
pub fn modes(side: usize) -> impl Iterator<Item = BlochMode> {
    (1..=side).flat_map(move |l| (1..=side).map(move |n| BlochMode::new(n, l, side)))
}

/// Mode energies sorted ascending.
pub fn bloch_spectrum(side: usize) -> Vec<f64> {
    let mut e: Vec<f64> = modes(side).map(|m| m.energy).collect();
    e.sort_by(f64::total_cmp);
    e
}

/// `alpha_{k,j}(t)` on the `N x N` periodic lattice as a finite mode sum.
pub fn pbc_amplitude(side: usize, j: Node, k: Node, t: f64, rate: f64) -> Result<Complex64> {
    j.check(side)?;
    k.check(side)?;
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be nonnegative, got {t}")));
    }
    let dx = k.jx as f64 - j.jx as f64;
    let dy = k.jy as f64 - j.jy as f64;
    let sum: Complex64 = modes(side)
        .map(|m| Complex64::from_polar(1.0, -(m.energy * rate * t + m.theta_x * dx + m.theta_y * dy)))
        .sum();
    Ok(sum / (side * side) as f64)
}

/// `[J_dx(2 rate t) J_dy(2 rate t)]^2` for a lattice offset `(dx, dy)`.
pub fn bulk_probability_offset(dx: i64, dy: i64, t: f64, rate: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::domain(format!("time must be nonnegative, got {t}")));
    }
    let order = |d: i64| {
        i32::try_from(d).map_err(|_| Error::UnsupportedRange(format!("offset {d} too large")))
    };
    let x = 2.0 * rate * t;
    let a = bessel_j(order(dx)?, x)?;
    let b = bessel_j(order(dy)?, x)?;
    Ok((a * b) * (a * b))
}

/// Transition probability from `j` to `k` on the infinite square lattice.
pub fn bulk_probability(j: Node, k: Node, t: f64, rate: f64) -> Result<f64> {
    bulk_probability_offset(
        k.jx as i64 - j.jx as i64,
        k.jy as i64 - j.jy as i64,
        t,
        rate,
    )
}
