//! Finite binary strings: the nodes of the dyadic tree.
//!
//! A [`Node`] indexes the basic clopen cylinder of all infinite binary
//! sequences extending it. Nodes serialize as bitstrings (`""`, `"0"`,
//! `"0110"`, ...). The paired game addresses positions by two coordinates at
//! once; those are stored as a single node of even length with the two
//! coordinate strings interleaved, see [`Node::interleave`].

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

/// A finite binary string, possibly empty.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Node(Vec<u8>);

impl Node {
    pub fn root() -> Self {
        Node(Vec::new())
    }

    pub fn from_bits(bits: &[u8]) -> Self {
        assert!(bits.iter().all(|&b| b <= 1), "node bits must be 0 or 1");
        Node(bits.to_vec())
    }

    /// Parses a bitstring like "0110". Empty string is the root.
    pub fn parse(s: &str) -> Result<Self, String> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(0),
                '1' => bits.push(1),
                _ => return Err(format!("invalid bit {c:?} in node {s:?}")),
            }
        }
        Ok(Node(bits))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn bit(&self, i: usize) -> u8 {
        self.0[i]
    }

    pub fn child(&self, bit: u8) -> Node {
        debug_assert!(bit <= 1);
        let mut bits = self.0.clone();
        bits.push(bit);
        Node(bits)
    }

    pub fn parent(&self) -> Option<Node> {
        if self.0.is_empty() {
            None
        } else {
            Some(Node(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn last_bit(&self) -> Option<u8> {
        self.0.last().copied()
    }

    pub fn truncated(&self, len: usize) -> Node {
        Node(self.0[..len.min(self.0.len())].to_vec())
    }

    /// True when `self` is an initial segment of `other` (including equality).
    pub fn is_prefix_of(&self, other: &Node) -> bool {
        other.0.len() >= self.0.len() && other.0[..self.0.len()] == self.0[..]
    }

    /// True when one of the two nodes extends the other.
    pub fn comparable(&self, other: &Node) -> bool {
        self.is_prefix_of(other) || other.is_prefix_of(self)
    }

    pub fn concat(&self, other: &Node) -> Node {
        let mut bits = self.0.clone();
        bits.extend_from_slice(&other.0);
        Node(bits)
    }

    /// All ancestors from the root down to the node itself.
    pub fn prefixes(&self) -> impl Iterator<Item = Node> + '_ {
        (0..=self.0.len()).map(move |n| Node(self.0[..n].to_vec()))
    }

    /// Every node of the given exact depth, in lexicographic order.
    pub fn all_at_depth(depth: usize) -> Vec<Node> {
        let mut out = vec![Node::root()];
        for _ in 0..depth {
            out = out
                .into_iter()
                .flat_map(|n| [n.child(0), n.child(1)])
                .collect();
        }
        out
    }

    /// Interleaves two strings of equal length into a single node
    /// (first-coordinate bits at even offsets).
    pub fn interleave(first: &Node, second: &Node) -> Node {
        assert_eq!(first.len(), second.len(), "coordinates must align");
        let mut bits = Vec::with_capacity(2 * first.len());
        for i in 0..first.len() {
            bits.push(first.0[i]);
            bits.push(second.0[i]);
        }
        Node(bits)
    }

    /// Splits an even-length node into its two coordinate strings.
    pub fn deinterleave(&self) -> (Node, Node) {
        assert!(self.len() % 2 == 0, "pair node must have even length");
        let mut first = Vec::with_capacity(self.len() / 2);
        let mut second = Vec::with_capacity(self.len() / 2);
        for (i, &b) in self.0.iter().enumerate() {
            if i % 2 == 0 {
                first.push(b);
            } else {
                second.push(b);
            }
        }
        (Node(first), Node(second))
    }

    /// True when `pattern` occurs as a contiguous substring.
    pub fn contains_substring(&self, pattern: &[u8]) -> bool {
        if pattern.is_empty() {
            return true;
        }
        self.0.windows(pattern.len()).any(|w| w == pattern)
    }
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "\u{27e8}{self}\u{27e9}")
    }
}

impl Serialize for Node {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Node {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Node::parse(&s).map_err(de::Error::custom)
    }
}

/// Convenience constructor used heavily in tests: `node("011")`.
pub fn node(s: &str) -> Node {
    Node::parse(s).expect("literal node")
}
