//! Space-time decoders for toric-code defects.
//!
//! Nodes are defects at (layer, row, col). Both space and time steps cost 1 and the
//! spatial directions wrap around the torus. Plaquette and vertex defects are decoded
//! independently.

mod brute;
mod mwpm;
mod uf;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::Pauli;
use crate::superop::StabilizerType;
use crate::surface::{Defect, PauliFrame, ToricLayout};

pub use brute::{brute_force_decode, brute_force_matching, BRUTE_FORCE_MAX_DEFECTS};
pub use mwpm::{mwpm_decode, mwpm_matching};
pub use uf::{uf_decode, UnionFindDecoder};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DecoderKind {
    UnionFind,
    Mwpm,
}

impl DecoderKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "uf" | "union-find" | "unionfind" => Ok(DecoderKind::UnionFind),
            "mwpm" => Ok(DecoderKind::Mwpm),
            _ => Err(Error::Parameter { name: "decoder", reason: format!("unknown decoder {s:?}") }),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            DecoderKind::UnionFind => "uf",
            DecoderKind::Mwpm => "mwpm",
        }
    }
}

/// Defects of one stabilizer type over `layers` measurement layers.
#[derive(Clone, Debug, PartialEq)]
pub struct DefectGraph {
    pub d: usize,
    pub layers: usize,
    pub stab: StabilizerType,
    /// Sorted by (layer, row, col).
    pub defects: Vec<Defect>,
}

impl DefectGraph {
    pub fn new(d: usize, layers: usize, stab: StabilizerType, mut defects: Vec<Defect>) -> Result<Self> {
        if defects.len() % 2 != 0 {
            return Err(Error::OddDefects(defects.len()));
        }
        if let Some(bad) = defects.iter().find(|x| x.row >= d || x.col >= d || x.layer >= layers) {
            return Err(Error::Layout(format!("defect {bad:?} outside the {d}x{d}x{layers} lattice")));
        }
        defects.sort_unstable();
        Ok(DefectGraph { d, layers, stab, defects })
    }

    pub fn len(&self) -> usize {
        self.defects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defects.is_empty()
    }

    /// Toroidal Manhattan distance plus layer difference.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let (x, y) = (self.defects[a], self.defects[b]);
        cyclic(x.row, y.row, self.d) + cyclic(x.col, y.col, self.d) + x.layer.abs_diff(y.layer)
    }

    pub fn matching_weight(&self, pairs: &[(usize, usize)]) -> usize {
        pairs.iter().map(|&(a, b)| self.distance(a, b)).sum()
    }
}

fn cyclic(a: usize, b: usize, d: usize) -> usize {
    let diff = a.abs_diff(b);
    diff.min(d - diff)
}

/// Data qubits to flip and the number of graph edges used.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Correction {
    pub stab: StabilizerType,
    /// Sorted, each qubit at most once.
    pub qubits: Vec<usize>,
    pub weight: usize,
}

impl Correction {
    fn from_flips(stab: StabilizerType, flips: Vec<bool>, weight: usize) -> Self {
        let qubits = flips.iter().enumerate().filter(|(_, &f)| f).map(|(q, _)| q).collect();
        Correction { stab, qubits, weight }
    }

    /// Plaquette defects are corrected with X, vertex defects with Z.
    pub fn apply_to(&self, frame: &mut PauliFrame) {
        let p = match self.stab {
            StabilizerType::Plaquette => Pauli::X,
            StabilizerType::Vertex => Pauli::Z,
        };
        for &q in &self.qubits {
            frame.apply(q, p);
        }
    }
}

/// Shortest toroidal path from stabilizer `a` to `b`, rows first; ties go forward.
pub fn spatial_path(layout: &ToricLayout, stab: StabilizerType, a: (usize, usize), b: (usize, usize)) -> Vec<usize> {
    let d = layout.d;
    let (mut r, mut c) = a;
    let mut out = Vec::new();
    let fwd_r = (b.0 + d - r) % d;
    let (steps, forward) = if fwd_r <= d / 2 { (fwd_r, true) } else { (d - fwd_r, false) };
    for _ in 0..steps {
        out.push(layout.step_edge(stab, r, c, true, forward));
        r = if forward { (r + 1) % d } else { (r + d - 1) % d };
    }
    let fwd_c = (b.1 + d - c) % d;
    let (steps, forward) = if fwd_c <= d / 2 { (fwd_c, true) } else { (d - fwd_c, false) };
    for _ in 0..steps {
        out.push(layout.step_edge(stab, r, c, false, forward));
        c = if forward { (c + 1) % d } else { (c + d - 1) % d };
    }
    out
}

/// Correction realising a perfect matching of defects.
pub fn correction_from_matching(layout: &ToricLayout, graph: &DefectGraph, pairs: &[(usize, usize)]) -> Correction {
    let mut flips = vec![false; layout.n_data()];
    for &(a, b) in pairs {
        let (x, y) = (graph.defects[a], graph.defects[b]);
        for q in spatial_path(layout, graph.stab, (x.row, x.col), (y.row, y.col)) {
            flips[q] ^= true;
        }
    }
    Correction::from_flips(graph.stab, flips, graph.matching_weight(pairs))
}

pub fn decode(kind: DecoderKind, layout: &ToricLayout, graph: &DefectGraph) -> Result<Correction> {
    match kind {
        DecoderKind::UnionFind => uf_decode(layout, graph),
        DecoderKind::Mwpm => mwpm_decode(layout, graph),
    }
}

/// Net spatial syndrome of a defect set: stabilizers with an odd number of defects.
pub fn net_syndrome(graph: &DefectGraph) -> Vec<bool> {
    let mut s = vec![false; graph.d * graph.d];
    for x in &graph.defects {
        s[x.row * graph.d + x.col] ^= true;
    }
    s
}

/// True when the correction's syndrome equals the net spatial syndrome of the defects.
pub fn is_syndrome_valid(layout: &ToricLayout, graph: &DefectGraph, correction: &Correction) -> bool {
    let mut frame = PauliFrame::new(layout.n_data());
    correction.apply_to(&mut frame);
    layout.syndrome(&frame, graph.stab) == net_syndrome(graph)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::superop::Architecture;

    #[test]
    fn odd_defects_rejected() {
        let one = vec![Defect { layer: 0, row: 0, col: 0 }];
        assert_eq!(DefectGraph::new(4, 5, StabilizerType::Plaquette, one), Err(Error::OddDefects(1)));
    }

    #[test]
    fn toroidal_distance_and_path() {
        let layout = ToricLayout::new(Architecture::Wt4, 6).unwrap();
        let g = DefectGraph::new(
            6,
            7,
            StabilizerType::Vertex,
            vec![Defect { layer: 0, row: 0, col: 0 }, Defect { layer: 2, row: 5, col: 4 }],
        )
        .unwrap();
        assert_eq!(g.distance(0, 1), 1 + 2 + 2);
        let c = correction_from_matching(&layout, &g, &[(0, 1)]);
        assert_eq!(c.qubits.len(), 3);
        assert_eq!(c.weight, 5);
        assert!(is_syndrome_valid(&layout, &g, &c));
    }

    #[test]
    fn decoder_names() {
        assert_eq!(DecoderKind::parse("UF").unwrap(), DecoderKind::UnionFind);
        assert_eq!(DecoderKind::parse("mwpm").unwrap().as_str(), "mwpm");
        assert!(DecoderKind::parse("bp").is_err());
    }
}
