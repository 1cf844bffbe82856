//! Integer partitions and the dominance order.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use super::ExactError;

/// A partition stored as its positive parts in weakly decreasing order.
///
/// Trailing zeros are stripped on construction, so `(2,1,0)` and `(2,1)`
/// are the same value.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: impl Into<Vec<u32>>) -> Result<Self, ExactError> {
        let mut parts = parts.into();
        if parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(ExactError::NotAPartition(format!("{parts:?}")));
        }
        while parts.last() == Some(&0) {
            parts.pop();
        }
        Ok(Self { parts })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// Number of nonzero parts, `l(λ)`.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn weight(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// The `i`-th part (0-based), zero past the length.
    pub fn part(&self, i: usize) -> u32 {
        self.parts.get(i).copied().unwrap_or(0)
    }

    /// Parts padded with zeros to exactly `n` entries.
    pub fn padded(&self, n: usize) -> Result<Vec<u32>, ExactError> {
        if self.len() > n {
            return Err(ExactError::LengthExceedsVariables { length: self.len(), n });
        }
        let mut v = self.parts.clone();
        v.resize(n, 0);
        Ok(v)
    }

    /// Subtract `k` from every one of the first `n` parts (used to strip
    /// common columns); fails if some part would go negative.
    pub fn shifted_down(&self, n: usize, k: u32) -> Result<Self, ExactError> {
        let padded = self.padded(n)?;
        if padded.iter().any(|&p| p < k) {
            return Err(ExactError::NotAPartition(format!("{self} minus {k}")));
        }
        Self::new(padded.into_iter().map(|p| p - k).collect::<Vec<_>>())
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let joined: Vec<String> = self.parts.iter().map(u32::to_string).collect();
        f.write_str(&joined.join(","))
    }
}

impl FromStr for Partition {
    type Err = ExactError;

    /// Parses comma-joined parts such as `"2,1"`; zeros are allowed and
    /// stripped, and an empty string is the empty partition.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Self::empty());
        }
        let parts = s
            .split(',')
            .map(|p| {
                p.trim()
                    .parse::<u32>()
                    .map_err(|_| ExactError::Parse(format!("bad partition part {p:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(parts)
    }
}

/// Reverse lexicographic order: larger partitions first. This is a total
/// order refining dominance.
impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.len().max(other.len());
        for i in 0..n {
            match other.part(i).cmp(&self.part(i)) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `μ ≤ λ` in dominance order: equal weights and every prefix sum of `μ`
/// bounded by the corresponding prefix sum of `λ`.
pub fn dominance_leq(mu: &Partition, lambda: &Partition) -> bool {
    if mu.weight() != lambda.weight() {
        return false;
    }
    let n = mu.len().max(lambda.len());
    let (mut sm, mut sl) = (0u32, 0u32);
    for i in 0..n {
        sm += mu.part(i);
        sl += lambda.part(i);
        if sm > sl {
            return false;
        }
    }
    true
}

/// All partitions of `w` with at most `max_length` parts, largest first in
/// reverse lexicographic order.
pub fn partitions_of_weight(w: u32, max_length: usize) -> Vec<Partition> {
    fn rec(rem: u32, max_part: u32, slots: usize, prefix: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if rem == 0 {
            out.push(Partition { parts: prefix.clone() });
            return;
        }
        if slots == 0 {
            return;
        }
        for p in (1..=rem.min(max_part)).rev() {
            prefix.push(p);
            rec(rem - p, p, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(w, w, max_length, &mut Vec::new(), &mut out);
    out
}

/// All partitions with weight at most `max_weight` and at most
/// `max_length` parts, ordered by weight and then largest first.
pub fn partitions_up_to(max_weight: u32, max_length: usize) -> Vec<Partition> {
    (0..=max_weight)
        .flat_map(|w| partitions_of_weight(w, max_length))
        .collect()
}
