//! The 24-element single-qubit Clifford group and its decompositions into
//! physical π and π/2 pulses about x and y, plus virtual Z rotations.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::operators::{Operator, C64};

/// Tolerance for identifying two unitaries up to global phase.
const SAME: f64 = 1e-9;

/// Gate appearing in a compiled Clifford. Rotations follow `exp(-iθ n·σ/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Gate {
    X180,
    X90,
    Xm90,
    Y180,
    Y90,
    Ym90,
    /// Frame update, applied through the phase ledger.
    VirtualZ(f64),
}

impl Gate {
    /// Rotation angle and axis phase of a physical pulse; `None` for virtual Z.
    pub fn rotation(&self) -> Option<(f64, f64)> {
        match *self {
            Gate::X180 => Some((PI, 0.0)),
            Gate::X90 => Some((FRAC_PI_2, 0.0)),
            Gate::Xm90 => Some((FRAC_PI_2, PI)),
            Gate::Y180 => Some((PI, FRAC_PI_2)),
            Gate::Y90 => Some((FRAC_PI_2, FRAC_PI_2)),
            Gate::Ym90 => Some((FRAC_PI_2, -FRAC_PI_2)),
            Gate::VirtualZ(_) => None,
        }
    }

    pub fn is_physical(&self) -> bool {
        self.rotation().is_some()
    }

    pub fn unitary(&self) -> Operator {
        match *self {
            Gate::VirtualZ(theta) => rz(theta),
            _ => {
                let (theta, phi) = self.rotation().expect("physical gate");
                rotation(theta, phi)
            }
        }
    }
}

/// `exp(-iθ(cos φ σx + sin φ σy)/2)`.
pub fn rotation(theta: f64, phi: f64) -> Operator {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let m = C64::new(0.0, -s);
    DMatrix::from_row_slice(2, 2, &[C64::new(c, 0.0), m * C64::from_polar(1.0, -phi), m * C64::from_polar(1.0, phi), C64::new(c, 0.0)])
}

/// `exp(-iθσz/2)`.
pub fn rz(theta: f64) -> Operator {
    DMatrix::from_row_slice(2, 2, &[C64::from_polar(1.0, -theta / 2.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::from_polar(1.0, theta / 2.0)])
}

/// `|tr(U†V)|/2`, equal to 1 exactly when `U` and `V` agree up to global phase.
pub fn trace_overlap(u: &Operator, v: &Operator) -> f64 {
    (u.adjoint() * v).trace().norm() / 2.0
}

/// Unitary of a gate list applied left to right in time.
pub fn sequence_unitary(gates: &[Gate]) -> Operator {
    gates.iter().fold(Operator::identity(2, 2), |u, g| g.unitary() * u)
}

/// Which decomposition to attach to each element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DecompositionTable {
    /// Conventional x/y pulse table: 44 pulses over 24 elements, 1.875 per
    /// Clifford when the identity is counted as one idle slot.
    #[default]
    Standard,
    /// Shortest strings when virtual Z rotations are free.
    VirtualZ,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliffordElement {
    pub index: usize,
    /// Representative unitary, up to global phase.
    pub unitary: Operator,
    pub decomposition: Vec<Gate>,
}

impl CliffordElement {
    pub fn physical_pulses(&self) -> usize {
        self.decomposition.iter().filter(|g| g.is_physical()).count()
    }
}

#[derive(Debug, Clone)]
pub struct CliffordGroup {
    pub elements: Vec<CliffordElement>,
    /// `product[a][b]` is the index of `U_a U_b`.
    pub product: Vec<Vec<usize>>,
    pub inverse: Vec<usize>,
    pub table: DecompositionTable,
}

const PHYSICAL: [Gate; 6] = [Gate::X180, Gate::X90, Gate::Xm90, Gate::Y180, Gate::Y90, Gate::Ym90];
const FRAMES: [Gate; 3] = [Gate::VirtualZ(FRAC_PI_2), Gate::VirtualZ(PI), Gate::VirtualZ(-FRAC_PI_2)];

fn find(reps: &[Operator], u: &Operator) -> Option<usize> {
    reps.iter().position(|r| trace_overlap(r, u) > 1.0 - SAME)
}

/// Conventional table: Paulis, the eight 2π/3 rotations as two pulses,
/// π/2 rotations about x and y as one pulse and about z as three, and the
/// Hadamard-like elements as two or three pulses.
fn standard_table() -> Vec<Vec<Gate>> {
    use Gate::*;
    vec![
        vec![],
        vec![X180],
        vec![Y180],
        vec![Y180, X180],
        vec![X90, Y90],
        vec![X90, Ym90],
        vec![Xm90, Y90],
        vec![Xm90, Ym90],
        vec![Y90, X90],
        vec![Y90, Xm90],
        vec![Ym90, X90],
        vec![Ym90, Xm90],
        vec![X90],
        vec![Xm90],
        vec![Y90],
        vec![Ym90],
        vec![Xm90, Y90, X90],
        vec![Xm90, Ym90, X90],
        vec![X180, Y90],
        vec![X180, Ym90],
        vec![Y180, X90],
        vec![Y180, Xm90],
        vec![X90, Y90, X90],
        vec![Xm90, Y90, Xm90],
    ]
}

/// Shortest decompositions when virtual Z gates are free (0-1 BFS over the
/// gate alphabet). Ties go to the first string found, so the table is
/// deterministic.
fn shortest_with_virtual_z(reps: &[Operator]) -> Vec<Vec<Gate>> {
    let n = reps.len();
    let mut best: Vec<Option<(usize, Vec<Gate>)>> = vec![None; n];
    let id = find(reps, &Operator::identity(2, 2)).expect("identity in group");
    best[id] = Some((0, Vec::new()));
    let mut queue = VecDeque::from([id]);
    let moves: Vec<(Gate, usize)> = FRAMES.iter().map(|g| (*g, 0)).chain(PHYSICAL.iter().map(|g| (*g, 1))).collect();
    while let Some(k) = queue.pop_front() {
        let (cost, seq) = best[k].clone().expect("visited");
        for &(g, c) in &moves {
            let mut next = seq.clone();
            next.push(g);
            let j = find(reps, &sequence_unitary(&next)).expect("group closed");
            let better = match &best[j] {
                None => true,
                Some((bc, bs)) => cost + c < *bc || (cost + c == *bc && next.len() < bs.len()),
            };
            if better {
                best[j] = Some((cost + c, next));
                if c == 0 {
                    queue.push_front(j);
                } else {
                    queue.push_back(j);
                }
            }
        }
    }
    best.into_iter().map(|b| b.expect("all elements reachable").1).collect()
}

fn decompositions(reps: &[Operator], table: DecompositionTable) -> Vec<Vec<Gate>> {
    match table {
        DecompositionTable::VirtualZ => shortest_with_virtual_z(reps),
        DecompositionTable::Standard => {
            let mut out: Vec<Option<Vec<Gate>>> = vec![None; reps.len()];
            for seq in standard_table() {
                let j = find(reps, &sequence_unitary(&seq)).expect("table entry is a Clifford");
                assert!(out[j].is_none(), "duplicate table entry");
                out[j] = Some(seq);
            }
            out.into_iter().map(|s| s.expect("table covers the group")).collect()
        }
    }
}

/// Generate the group from `X90` and `Y90`, with closure and inverse tables.
pub fn clifford_group(table: DecompositionTable) -> CliffordGroup {
    let gens = [Gate::X90.unitary(), Gate::Y90.unitary()];
    let mut reps = vec![Operator::identity(2, 2)];
    let mut k = 0;
    while k < reps.len() {
        for g in &gens {
            let u = g * &reps[k];
            if find(&reps, &u).is_none() {
                reps.push(u);
            }
        }
        k += 1;
    }
    let n = reps.len();
    let product: Vec<Vec<usize>> = (0..n).map(|a| (0..n).map(|b| find(&reps, &(&reps[a] * &reps[b])).expect("closed")).collect()).collect();
    let id = 0;
    let inverse: Vec<usize> = (0..n).map(|a| (0..n).find(|&b| product[a][b] == id).expect("inverse exists")).collect();
    let decomps = decompositions(&reps, table);
    let elements = reps
        .into_iter()
        .zip(decomps)
        .enumerate()
        .map(|(index, (unitary, decomposition))| CliffordElement { index, unitary, decomposition })
        .collect();
    CliffordGroup { elements, product, inverse, table }
}

impl CliffordGroup {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn identity(&self) -> usize {
        0
    }

    /// Index of the product of a time-ordered string (first element applied first).
    pub fn compose(&self, seq: &[usize]) -> usize {
        seq.iter().fold(self.identity(), |acc, &c| self.product[c][acc])
    }

    /// Element that returns the string to the identity.
    pub fn recovery(&self, seq: &[usize]) -> usize {
        self.inverse[self.compose(seq)]
    }

    /// Mean number of physical pulses per element.
    pub fn average_pulses(&self) -> f64 {
        self.elements.iter().map(|e| e.physical_pulses() as f64).sum::<f64>() / self.len() as f64
    }

    /// Index of the element equal to `u` up to global phase.
    pub fn find(&self, u: &Operator) -> Option<usize> {
        self.elements.iter().position(|e| trace_overlap(&e.unitary, u) > 1.0 - SAME)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn group_has_24_elements_and_is_closed() {
        let g = clifford_group(DecompositionTable::Standard);
        assert_eq!(g.len(), 24);
        for a in 0..24 {
            for b in 0..24 {
                let u = &g.elements[a].unitary * &g.elements[b].unitary;
                assert!(trace_overlap(&u, &g.elements[g.product[a][b]].unitary) > 1.0 - 1e-10);
            }
            let u = &g.elements[a].unitary * &g.elements[g.inverse[a]].unitary;
            assert!(trace_overlap(&u, &Operator::identity(2, 2)) > 1.0 - 1e-10);
        }
    }

    #[test]
    fn decompositions_reproduce_representatives() {
        for table in [DecompositionTable::Standard, DecompositionTable::VirtualZ] {
            let g = clifford_group(table);
            for e in &g.elements {
                assert!(trace_overlap(&sequence_unitary(&e.decomposition), &e.unitary) > 1.0 - 1e-10);
            }
        }
    }

    #[test]
    fn pulse_counts() {
        let std = clifford_group(DecompositionTable::Standard);
        assert!((std.average_pulses() - 44.0 / 24.0).abs() < 1e-12);
        assert!((std.average_pulses() + 1.0 / 24.0 - 1.875).abs() < 1e-12);
        assert!(std.elements[0].decomposition.is_empty());
        let vz = clifford_group(DecompositionTable::VirtualZ);
        assert!(vz.average_pulses() < std.average_pulses());
    }
}
