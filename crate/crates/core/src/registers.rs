//! Named subsystems of the multiplication register and their qubit ranges.
//!
//! Operators are always written against subsystem names; the canonical order
//! below is a private convention of this crate.

use std::fmt;
use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};

/// A named block of qubits in the multiplication register.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Subsystem {
    /// Real/imaginary label of the first matrix.
    M1,
    M2,
    /// Row index of the first matrix.
    R1,
    /// Column index of the first matrix.
    C1,
    R2,
    C2,
    /// Slack label of the first matrix (0 holds `b`, 1 holds entries).
    K1,
    K2,
    /// Garbage flag and its partner for the conditional measurement.
    B,
    BT,
    /// Optional flags that switch the input manipulations on.
    Q1,
    Q2,
    Q3,
}

impl Subsystem {
    /// Canonical order from qubit 0 upward.
    pub const CANONICAL: [Subsystem; 13] = [
        Subsystem::M1,
        Subsystem::M2,
        Subsystem::R1,
        Subsystem::C1,
        Subsystem::R2,
        Subsystem::C2,
        Subsystem::K1,
        Subsystem::K2,
        Subsystem::B,
        Subsystem::BT,
        Subsystem::Q1,
        Subsystem::Q2,
        Subsystem::Q3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Subsystem::M1 => "M1",
            Subsystem::M2 => "M2",
            Subsystem::R1 => "R1",
            Subsystem::C1 => "C1",
            Subsystem::R2 => "R2",
            Subsystem::C2 => "C2",
            Subsystem::K1 => "K1",
            Subsystem::K2 => "K2",
            Subsystem::B => "B",
            Subsystem::BT => "BT",
            Subsystem::Q1 => "Q1",
            Subsystem::Q2 => "Q2",
            Subsystem::Q3 => "Q3",
        }
    }

    fn is_index_register(self) -> bool {
        matches!(
            self,
            Subsystem::R1 | Subsystem::C1 | Subsystem::R2 | Subsystem::C2
        )
    }

    fn is_control_flag(self) -> bool {
        matches!(self, Subsystem::Q1 | Subsystem::Q2 | Subsystem::Q3)
    }
}

impl fmt::Display for Subsystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One row of the layout summary included in CLI reports.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SliceSummary {
    pub name: &'static str,
    pub start: usize,
    pub width: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LayoutSummary {
    pub n: usize,
    pub total_qubits: usize,
    pub control_flags_present: bool,
    pub slices: Vec<SliceSummary>,
}

/// Qubit ranges of every subsystem for matrices of side `2^n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegisterLayout {
    n: usize,
    control_flags_present: bool,
    slices: Vec<(Subsystem, Range<usize>)>,
}

impl RegisterLayout {
    /// Layout for `n`-qubit index registers, with or without the three
    /// manipulation flags.
    pub fn new(n: usize, with_controls: bool) -> Result<Self> {
        if n < 1 {
            return Err(Error::Layout("register width n must be at least 1".into()));
        }
        let mut start = 0;
        let slices = Subsystem::CANONICAL
            .iter()
            .filter(|s| with_controls || !s.is_control_flag())
            .map(|&s| {
                let width = if s.is_index_register() { n } else { 1 };
                let range = start..start + width;
                start += width;
                (s, range)
            })
            .collect();
        Ok(Self {
            n,
            control_flags_present: with_controls,
            slices,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn control_flags_present(&self) -> bool {
        self.control_flags_present
    }

    pub fn total_qubits(&self) -> usize {
        self.slices.last().map_or(0, |(_, r)| r.end)
    }

    pub fn slices(&self) -> impl Iterator<Item = (Subsystem, Range<usize>)> + '_ {
        self.slices.iter().cloned()
    }

    pub fn range(&self, s: Subsystem) -> Result<Range<usize>> {
        self.slices
            .iter()
            .find(|(name, _)| *name == s)
            .map(|(_, r)| r.clone())
            .ok_or_else(|| Error::Layout(format!("subsystem {s} is not allocated")))
    }

    /// Qubit index of a one-qubit subsystem, or of the lowest qubit of a wider one.
    pub fn qubit(&self, s: Subsystem) -> Result<usize> {
        self.range(s).map(|r| r.start)
    }

    /// Qubits of `s`, least significant first.
    pub fn qubits(&self, s: Subsystem) -> Result<Vec<usize>> {
        self.range(s).map(|r| r.collect())
    }

    pub fn width(&self, s: Subsystem) -> Result<usize> {
        self.range(s).map(|r| r.len())
    }

    /// Amplitude index for the given subsystem values; unnamed subsystems are 0.
    pub fn basis_index(&self, assignment: &[(Subsystem, usize)]) -> Result<usize> {
        let mut index = 0usize;
        let mut seen = Vec::with_capacity(assignment.len());
        for &(s, value) in assignment {
            if seen.contains(&s) {
                return Err(Error::Layout(format!("subsystem {s} assigned twice")));
            }
            seen.push(s);
            let range = self.range(s)?;
            if value >> range.len() != 0 {
                return Err(Error::Layout(format!(
                    "value {value} does not fit the {}-qubit subsystem {s}",
                    range.len()
                )));
            }
            index |= value << range.start;
        }
        Ok(index)
    }

    /// Value held by subsystem `s` in basis index `index`.
    pub fn extract(&self, index: usize, s: Subsystem) -> Result<usize> {
        let r = self.range(s)?;
        Ok((index >> r.start) & ((1 << r.len()) - 1))
    }

    pub fn summary(&self) -> LayoutSummary {
        LayoutSummary {
            n: self.n,
            total_qubits: self.total_qubits(),
            control_flags_present: self.control_flags_present,
            slices: self
                .slices
                .iter()
                .map(|(s, r)| SliceSummary {
                    name: s.name(),
                    start: r.start,
                    width: r.len(),
                })
                .collect(),
        }
    }
}

/// Convenience wrapper around [`RegisterLayout::new`].
pub fn layout_for(n: usize, with_controls: bool) -> Result<RegisterLayout> {
    RegisterLayout::new(n, with_controls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    // independent offset computation: walk the canonical list by hand
    fn offset_of(n: usize, target: Subsystem) -> usize {
        let widths = [1, 1, n, n, n, n, 1, 1, 1, 1, 1, 1, 1];
        let pos = Subsystem::CANONICAL.iter().position(|&s| s == target).unwrap();
        widths[..pos].iter().sum()
    }

    #[test]
    fn widths() {
        let l = layout_for(1, false).unwrap();
        assert_eq!(l.total_qubits(), 10);
        assert_eq!(l.qubit(Subsystem::R1).unwrap(), 2);
        assert_eq!(layout_for(2, false).unwrap().total_qubits(), 14);
        assert_eq!(layout_for(3, false).unwrap().total_qubits(), 18);
        assert_eq!(layout_for(3, true).unwrap().total_qubits(), 21);
        assert!(matches!(layout_for(0, false), Err(Error::Layout(_))));
    }

    #[test]
    fn controls_absent_unless_requested() {
        let l = layout_for(2, false).unwrap();
        assert!(l.range(Subsystem::Q1).is_err());
        let l = layout_for(2, true).unwrap();
        assert_eq!(l.width(Subsystem::Q3).unwrap(), 1);
    }

    #[test]
    fn basis_index_examples() {
        let l = layout_for(1, false).unwrap();
        assert_eq!(l.basis_index(&[]).unwrap(), 0);
        assert_eq!(l.basis_index(&[(Subsystem::M1, 1)]).unwrap(), 1);
        assert_eq!(l.basis_index(&[(Subsystem::K1, 1)]).unwrap(), 64);
        assert_eq!(1 << offset_of(1, Subsystem::K1), 64);
        assert!(l.basis_index(&[(Subsystem::R1, 2)]).is_err());
        assert!(l.basis_index(&[(Subsystem::B, 1), (Subsystem::B, 0)]).is_err());
    }

    #[test]
    fn offsets_match_hand_walk() {
        for n in 1..=4 {
            for with in [false, true] {
                let l = layout_for(n, with).unwrap();
                for (s, r) in l.slices() {
                    assert_eq!(r.start, offset_of(n, s), "{s} at n = {n}");
                    let value = (1 << r.len()) - 1;
                    let idx = l.basis_index(&[(s, value)]).unwrap();
                    assert_eq!(l.extract(idx, s).unwrap(), value);
                }
            }
        }
    }

    #[test]
    fn slices_disjoint_and_cover() {
        for n in 1..=6 {
            for with in [false, true] {
                let l = layout_for(n, with).unwrap();
                let mut used = HashSet::new();
                for (_, r) in l.slices() {
                    for q in r {
                        assert!(used.insert(q));
                    }
                }
                let expect = 4 * n + 6 + if with { 3 } else { 0 };
                assert_eq!(used.len(), expect);
                assert_eq!(l.total_qubits(), expect);
                assert!(used.iter().all(|&q| q < expect));
            }
        }
    }

    #[test]
    fn basis_index_is_bijective_for_n1() {
        let l = layout_for(1, false).unwrap();
        let names: Vec<Subsystem> = l.slices().map(|(s, _)| s).collect();
        let mut seen = HashSet::new();
        // every subsystem is one qubit wide at n = 1
        for bits in 0..1usize << names.len() {
            let assignment: Vec<(Subsystem, usize)> = names
                .iter()
                .enumerate()
                .map(|(i, &s)| (s, (bits >> i) & 1))
                .collect();
            let idx = l.basis_index(&assignment).unwrap();
            assert!(idx < 1 << l.total_qubits());
            assert!(seen.insert(idx));
        }
        assert_eq!(seen.len(), 1 << l.total_qubits());
    }
}
