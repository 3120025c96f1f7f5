//! Bessel functions of the first kind and integer order.
//!
//! Orders above the argument use Miller's downward recurrence normalized by
//! `J_0 + 2 sum J_2m = 1`. Otherwise `J_0` and `J_1` are seeded (power series
//! up to `x = 12`, normalized downward recurrence beyond) and the forward
//! recurrence, stable for `n <= x`, climbs to the requested order.

use crate::error::{Error, Result};

pub const MAX_ORDER: u32 = 200;
pub const MAX_ARGUMENT: f64 = 500.0;
const SERIES_LIMIT: f64 = 12.0;
const RESCALE_ABOVE: f64 = 1e150;
const RESCALE_BY: f64 = 1e-150;

/// `J_order(x)` for `|order| <= 200` and `0 <= x <= 500`.
pub fn bessel_j(order: i32, x: f64) -> Result<f64> {
    let n = order.unsigned_abs();
    if n > MAX_ORDER || !(0.0..=MAX_ARGUMENT).contains(&x) {
        return Err(Error::UnsupportedRange(format!(
            "J_{order}({x}) outside |order| <= {MAX_ORDER}, 0 <= x <= {MAX_ARGUMENT}"
        )));
    }
    let value = bessel_j_nonnegative(n, x);
    Ok(if order < 0 && n % 2 == 1 { -value } else { value })
}

fn bessel_j_nonnegative(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if f64::from(n) > x {
        return miller(n, x).1;
    }
    let (j0, j1) = if x <= SERIES_LIMIT {
        (series(0, x), series(1, x))
    } else {
        let (j0, _) = miller(0, x);
        let (_, j1) = miller(1, x);
        (j0, j1)
    };
    if n == 0 {
        return j0;
    }
    let (mut prev, mut cur) = (j0, j1);
    for k in 1..n {
        let next = 2.0 * f64::from(k) / x * cur - prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Even starting index comfortably above both `n` and `x`.
fn start_index(n: u32, x: f64) -> u32 {
    let top = f64::from(n).max(x).max(1.0);
    let m = top.ceil() as u32 + 20 + 2 * (40.0 * top).sqrt().ceil() as u32;
    m + (m % 2)
}

/// Downward recurrence from far above; returns `(J_0, J_n)`.
fn miller(n: u32, x: f64) -> (f64, f64) {
    let start = start_index(n, x);
    let two_over_x = 2.0 / x;
    let mut above = 0.0;
    let mut cur = 1e-300;
    let mut even_sum = 0.0;
    let mut target = 0.0;
    for k in (1..=start).rev() {
        // cur = J_k (unnormalized), above = J_{k+1}
        if k == n {
            target = cur;
        }
        if k % 2 == 0 {
            even_sum += cur;
        }
        let below = f64::from(k) * two_over_x * cur - above;
        above = cur;
        cur = below;
        if cur.abs() > RESCALE_ABOVE {
            cur *= RESCALE_BY;
            above *= RESCALE_BY;
            even_sum *= RESCALE_BY;
            target *= RESCALE_BY;
        }
    }
    let j0 = cur;
    if n == 0 {
        target = j0;
    }
    let norm = j0 + 2.0 * even_sum;
    (j0 / norm, target / norm)
}

/// Power series with compensated summation, for small arguments.
fn series(n: u32, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = 1.0;
    for k in 1..=n {
        term *= half / f64::from(k);
    }
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    let mut m = 0u32;
    loop {
        let t = sum + term;
        comp += if sum.abs() >= term.abs() {
            (sum - t) + term
        } else {
            (term - t) + sum
        };
        sum = t;
        m += 1;
        term *= q / (f64::from(m) * f64::from(m + n));
        if term.abs() < 1e-18 * sum.abs().max(1e-300) && m > 2 {
            break;
        }
    }
    sum + comp
}
