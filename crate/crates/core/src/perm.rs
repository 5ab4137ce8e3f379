//! Permutations of `{1, …, m}` in one-line form.
//!
//! Composition follows function composition: `(σ∘ρ)(i) = σ(ρ(i))`.
//! Cycle notation is read the usual way, `(1 2 3)` sends 1→2→3→1, and `e`
//! is the identity.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(m: usize) -> Self {
        Self((1..=m).collect())
    }

    /// Order-reversing permutation `i ↦ m + 1 − i`.
    pub fn reversal(m: usize) -> Self {
        Self((1..=m).rev().collect())
    }

    /// From one-line images `[σ(1), …, σ(m)]`.
    pub fn from_images(images: Vec<usize>) -> Result<Self> {
        let m = images.len();
        let mut seen = vec![false; m + 1];
        for &v in &images {
            if v == 0 || v > m || seen[v] {
                return Err(Error::InvalidDigit(format!("{images:?} is not a permutation of 1..={m}")));
            }
            seen[v] = true;
        }
        Ok(Self(images))
    }

    /// Parses cycle notation such as `(123)`, `(1 3)(2 4)` or `e`.
    /// Single-digit labels may be run together.
    pub fn parse_cycles(s: &str, m: usize) -> Result<Self> {
        let s = s.trim();
        let mut images: Vec<usize> = (1..=m).collect();
        if s == "e" || s == "()" {
            return Ok(Self(images));
        }
        let bad = || Error::InvalidDigit(format!("cannot parse `{s}` as a permutation of 1..={m}"));
        let mut rest = s;
        let mut used = vec![false; m + 1];
        while !rest.is_empty() {
            let body_end = rest.find(')').ok_or_else(bad)?;
            if !rest.starts_with('(') {
                return Err(bad());
            }
            let body = &rest[1..body_end];
            let labels: Vec<usize> = if body.contains(|c: char| c.is_whitespace() || c == ',') {
                body.split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<usize>().map_err(|_| bad()))
                    .collect::<Result<_>>()?
            } else {
                body.chars()
                    .map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad))
                    .collect::<Result<_>>()?
            };
            for &l in &labels {
                if l == 0 || l > m || used[l] {
                    return Err(bad());
                }
                used[l] = true;
            }
            for (k, &l) in labels.iter().enumerate() {
                images[l - 1] = labels[(k + 1) % labels.len()];
            }
            rest = rest[body_end + 1..].trim_start();
        }
        Ok(Self(images))
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    /// `σ(i)` for `i ∈ 1..=m`.
    pub fn apply(&self, i: usize) -> usize {
        self.0[i - 1]
    }

    pub fn images(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &v) in self.0.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Self(inv)
    }

    /// `self ∘ rhs`.
    pub fn compose(&self, rhs: &Permutation) -> Self {
        assert_eq!(self.degree(), rhs.degree());
        Self(rhs.0.iter().map(|&i| self.0[i - 1]).collect())
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    pub fn is_involution(&self) -> bool {
        self.compose(self).is_identity()
    }

    /// Disjoint cycles of length ≥ 2, each starting at its smallest element.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let m = self.0.len();
        let mut seen = vec![false; m + 1];
        let mut out = Vec::new();
        for start in 1..=m {
            if seen[start] {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut j = self.apply(start);
            while j != start {
                seen[j] = true;
                cycle.push(j);
                j = self.apply(j);
            }
            if cycle.len() > 1 {
                out.push(cycle);
            }
        }
        out
    }

    /// All permutations of `1..=m` in lexicographic order of one-line form.
    pub fn all(m: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (1..=m).collect();
        loop {
            out.push(Self(cur.clone()));
            // next lexicographic permutation
            let Some(i) = (0..m.saturating_sub(1)).rev().find(|&i| cur[i] < cur[i + 1]) else {
                break;
            };
            let j = (i + 1..m).rev().find(|&j| cur[j] > cur[i]).unwrap();
            cur.swap(i, j);
            cur[i + 1..].reverse();
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "e");
        }
        let wide = self.degree() > 9;
        for c in cycles {
            write!(f, "(")?;
            for (k, v) in c.iter().enumerate() {
                if wide && k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{v}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Parses with the degree inferred from the largest label.
impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let max = s.chars().filter_map(|c| c.to_digit(10)).max().unwrap_or(1) as usize;
        Self::parse_cycles(s, max.max(1))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_round_trip() {
        for s in ["e", "(12)", "(123)", "(132)", "(13)", "(12)(34)"] {
            let p = Permutation::parse_cycles(s, 4).unwrap();
            assert_eq!(p.to_string(), s);
        }
    }

    #[test]
    fn three_cycle_images() {
        let p = Permutation::parse_cycles("(123)", 3).unwrap();
        assert_eq!(p.images(), &[2, 3, 1]);
        assert_eq!(p.inverse().to_string(), "(132)");
    }

    #[test]
    fn composition_is_functional() {
        let a = Permutation::parse_cycles("(12)", 3).unwrap();
        let b = Permutation::parse_cycles("(23)", 3).unwrap();
        // (12)∘(23): 1→1→2, 2→3→3, 3→2→1
        assert_eq!(a.compose(&b).images(), &[2, 3, 1]);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(Permutation::parse_cycles("(14)", 3).is_err());
        assert!(Permutation::parse_cycles("(121)", 3).is_err());
        assert!(Permutation::parse_cycles("12", 3).is_err());
        assert!(Permutation::from_images(vec![1, 1, 2]).is_err());
    }

    #[test]
    fn enumerates_factorial_many() {
        assert_eq!(Permutation::all(1).len(), 1);
        assert_eq!(Permutation::all(4).len(), 24);
        let all5 = Permutation::all(5);
        let mut dedup = all5.clone();
        dedup.dedup();
        assert_eq!(dedup.len(), 120);
    }
}
