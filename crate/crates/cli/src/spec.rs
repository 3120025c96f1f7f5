//! Node arguments: landmark keywords or explicit `x,y` coordinates.

use std::fmt;
use std::str::FromStr;

use qwalk::{special_nodes, Node};
use serde::{Serialize, Serializer};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSpec {
    Corner,
    OppositeCorner,
    Middle,
    At(usize, usize),
}

impl NodeSpec {
    /// The concrete node on an `N x N` lattice.
    pub fn resolve(self, side: usize) -> Result<Node, String> {
        let s = special_nodes(side);
        let node = match self {
            NodeSpec::Corner => s.corner,
            NodeSpec::OppositeCorner => s.opposite_corner,
            NodeSpec::Middle => s
                .middle
                .ok_or_else(|| format!("N={side} is even and has no middle node"))?,
            NodeSpec::At(x, y) => Node::new(x, y),
        };
        if !node.is_valid(side) {
            return Err(format!("node ({},{}) lies outside the {side}x{side} lattice", node.jx, node.jy));
        }
        Ok(node)
    }
}

impl FromStr for NodeSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "corner" | "c" => Ok(NodeSpec::Corner),
            "opposite-corner" | "oc" => Ok(NodeSpec::OppositeCorner),
            "middle" | "m" => Ok(NodeSpec::Middle),
            other => {
                let parse = |v: Option<&str>| v.and_then(|v| v.trim().parse::<usize>().ok());
                let mut parts = other.split(',');
                match (parse(parts.next()), parse(parts.next()), parts.next()) {
                    (Some(x), Some(y), None) => Ok(NodeSpec::At(x, y)),
                    _ => Err(format!(
                        "expected corner, opposite-corner, middle or x,y; got '{other}'"
                    )),
                }
            }
        }
    }
}

impl fmt::Display for NodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeSpec::Corner => f.write_str("corner"),
            NodeSpec::OppositeCorner => f.write_str("opposite-corner"),
            NodeSpec::Middle => f.write_str("middle"),
            NodeSpec::At(x, y) => write!(f, "{x},{y}"),
        }
    }
}

impl Serialize for NodeSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_keywords_and_coordinates() {
        assert_eq!("corner".parse(), Ok(NodeSpec::Corner));
        assert_eq!("oc".parse(), Ok(NodeSpec::OppositeCorner));
        assert_eq!("3, 4".parse(), Ok(NodeSpec::At(3, 4)));
        assert!("3".parse::<NodeSpec>().is_err());
        assert!("1,2,3".parse::<NodeSpec>().is_err());
        assert!("edge".parse::<NodeSpec>().is_err());
    }

    #[test]
    fn resolves_against_size() {
        assert_eq!(NodeSpec::Middle.resolve(5), Ok(Node::new(3, 3)));
        assert!(NodeSpec::Middle.resolve(4).is_err());
        assert_eq!(NodeSpec::OppositeCorner.resolve(4), Ok(Node::new(4, 4)));
        assert!(NodeSpec::At(5, 1).resolve(4).is_err());
    }
}
