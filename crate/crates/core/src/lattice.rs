//! Square-lattice networks, their connectivity matrices and node bookkeeping.
//!
//! Nodes carry 1-based labels `(jx, jy)` and are linearized row-major from
//! `(1, 1)`: `index = (jy - 1) * N + (jx - 1)`.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Open,
    Periodic,
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Open => "open",
            Boundary::Periodic => "periodic",
        })
    }
}

impl FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "open" => Ok(Boundary::Open),
            "periodic" | "pbc" => Ok(Boundary::Periodic),
            other => Err(Error::domain(format!("unknown boundary `{other}`"))),
        }
    }
}

/// Side length, boundary condition and bond transmission rate of a network.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    side: usize,
    boundary: Boundary,
    rate: f64,
}

impl LatticeSpec {
    pub fn new(side: usize, boundary: Boundary, rate: f64) -> Result<Self> {
        if side == 0 {
            return Err(Error::domain("side length must be at least 1"));
        }
        if !(rate > 0.0 && rate.is_finite()) {
            return Err(Error::domain(format!("rate must be positive, got {rate}")));
        }
        if boundary == Boundary::Periodic && side < 3 {
            return Err(Error::Unsupported(format!(
                "periodic boundaries need N >= 3 (got N={side}); wrapping would duplicate bonds"
            )));
        }
        Ok(Self {
            side,
            boundary,
            rate,
        })
    }

    /// Open lattice with unit rate.
    pub fn open(side: usize) -> Result<Self> {
        Self::new(side, Boundary::Open, 1.0)
    }

    /// Periodic lattice with unit rate.
    pub fn periodic(side: usize) -> Result<Self> {
        Self::new(side, Boundary::Periodic, 1.0)
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn node_count(&self) -> usize {
        self.side * self.side
    }
}

/// A lattice site with 1-based coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Node {
    pub jx: usize,
    pub jy: usize,
}

impl Node {
    pub const fn new(jx: usize, jy: usize) -> Self {
        Self { jx, jy }
    }

    pub fn is_valid(&self, side: usize) -> bool {
        (1..=side).contains(&self.jx) && (1..=side).contains(&self.jy)
    }

    pub fn check(&self, side: usize) -> Result<()> {
        if self.is_valid(side) {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "node {self} outside the {side}x{side} lattice"
            )))
        }
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.jx, self.jy)
    }
}

pub fn node_to_linear(node: Node, side: usize) -> Result<usize> {
    node.check(side)?;
    Ok((node.jy - 1) * side + (node.jx - 1))
}

pub fn linear_to_node(index: usize, side: usize) -> Result<Node> {
    if index >= side * side {
        return Err(Error::domain(format!(
            "linear index {index} outside [0, {})",
            side * side
        )));
    }
    Ok(Node::new(index % side + 1, index / side + 1))
}

/// Inversion through the lattice center.
pub fn mirror(node: Node, side: usize) -> Result<Node> {
    node.check(side)?;
    Ok(Node::new(side + 1 - node.jx, side + 1 - node.jy))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpecialNodes {
    pub corner: Node,
    pub opposite_corner: Node,
    /// Only odd side lengths have a single central node.
    pub middle: Option<Node>,
}

pub fn special_nodes(side: usize) -> SpecialNodes {
    SpecialNodes {
        corner: Node::new(1, 1),
        opposite_corner: Node::new(side, side),
        middle: (side % 2 == 1).then(|| Node::new(side.div_ceil(2), side.div_ceil(2))),
    }
}

/// Dense symmetric connectivity matrix `A`: node functionality on the
/// diagonal, `-1` for every bond. The walk Hamiltonian is `H = rate * A`.
#[derive(Debug, Clone, PartialEq)]
pub struct AdjacencyMatrix {
    spec: LatticeSpec,
    entries: Vec<f64>,
}

impl AdjacencyMatrix {
    pub fn spec(&self) -> &LatticeSpec {
        &self.spec
    }

    pub fn side(&self) -> usize {
        self.spec.side
    }

    /// Matrix dimension `N^2`.
    pub fn dim(&self) -> usize {
        self.spec.node_count()
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.entries[row * self.dim() + col]
    }

    /// Row-major entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.entries
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let n = self.dim();
        &self.entries[row * n..(row + 1) * n]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Writes nonzero entries as `row col value` lines, sorted row-major.
    pub fn write_triplets<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.dim();
        for (i, row) in self.entries.chunks_exact(n).enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    writeln!(out, "{i} {j} {v}")?;
                }
            }
        }
        Ok(())
    }
}

pub fn build_adjacency(spec: LatticeSpec) -> AdjacencyMatrix {
    let side = spec.side;
    let n = spec.node_count();
    let mut entries = vec![0.0; n * n];
    let periodic = spec.boundary == Boundary::Periodic;

    let mut bond = |a: usize, b: usize| {
        entries[a * n + b] -= 1.0;
        entries[b * n + a] -= 1.0;
        entries[a * n + a] += 1.0;
        entries[b * n + b] += 1.0;
    };

    // Each bond is added once, from the node on its lower-left end.
    for y in 0..side {
        for x in 0..side {
            let here = y * side + x;
            if x + 1 < side {
                bond(here, here + 1);
            } else if periodic {
                bond(here, y * side);
            }
            if y + 1 < side {
                bond(here, here + side);
            } else if periodic {
                bond(here, x);
            }
        }
    }

    AdjacencyMatrix { spec, entries }
}
