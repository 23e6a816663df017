use crate::error::{Error, Result};
use crate::superop::StabilizerType;
use crate::surface::ToricLayout;

use super::{Correction, DefectGraph};

#[derive(Clone, Copy, Debug)]
struct Edge {
    a: usize,
    b: usize,
    /// Data qubit for spatial edges; `None` for time edges.
    qubit: Option<usize>,
}

/// Union-Find decoder on the space-time lattice of one stabilizer type.
#[derive(Clone, Debug)]
pub struct UnionFindDecoder {
    d: usize,
    layers: usize,
    stab: StabilizerType,
    n_data: usize,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

struct Clusters {
    parent: Vec<usize>,
    odd: Vec<bool>,
    members: Vec<Vec<usize>>,
}

impl Clusters {
    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.members[ra].len() < self.members[rb].len() {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        let moved = std::mem::take(&mut self.members[rb]);
        self.members[ra].extend(moved);
        self.odd[ra] ^= self.odd[rb];
        self.odd[rb] = false;
    }
}

impl UnionFindDecoder {
    pub fn new(layout: &ToricLayout, layers: usize, stab: StabilizerType) -> Self {
        let d = layout.d;
        let per_layer = d * d;
        let n = per_layer * layers;
        let mut edges = Vec::with_capacity(3 * n);
        for t in 0..layers {
            for r in 0..d {
                for c in 0..d {
                    let v = t * per_layer + r * d + c;
                    let right = t * per_layer + r * d + (c + 1) % d;
                    let down = t * per_layer + (r + 1) % d * d + c;
                    edges.push(Edge { a: v, b: right, qubit: Some(layout.step_edge(stab, r, c, false, true)) });
                    edges.push(Edge { a: v, b: down, qubit: Some(layout.step_edge(stab, r, c, true, true)) });
                    if t + 1 < layers {
                        edges.push(Edge { a: v, b: v + per_layer, qubit: None });
                    }
                }
            }
        }
        let mut adjacency = vec![Vec::new(); n];
        for (i, e) in edges.iter().enumerate() {
            adjacency[e.a].push(i);
            adjacency[e.b].push(i);
        }
        UnionFindDecoder { d, layers, stab, n_data: layout.n_data(), edges, adjacency }
    }

    pub fn decode(&self, graph: &DefectGraph) -> Result<Correction> {
        if graph.d != self.d || graph.layers != self.layers || graph.stab != self.stab {
            return Err(Error::Layout("defect graph does not match the decoder lattice".into()));
        }
        let n = self.adjacency.len();
        let mut defect = vec![false; n];
        for x in &graph.defects {
            defect[x.layer * self.d * self.d + x.row * self.d + x.col] = true;
        }
        let mut clusters =
            Clusters { parent: (0..n).collect(), odd: defect.clone(), members: (0..n).map(|v| vec![v]).collect() };
        let mut support = vec![0u8; self.edges.len()];
        loop {
            let odd_roots: Vec<usize> = (0..n).filter(|&v| clusters.parent[v] == v && clusters.odd[v]).collect();
            if odd_roots.is_empty() {
                break;
            }
            // weighted growth: only the smallest odd clusters advance
            let smallest = odd_roots.iter().map(|&r| clusters.members[r].len()).min().unwrap_or(0);
            let mut fused = Vec::new();
            for root in odd_roots.into_iter().filter(|&r| clusters.members[r].len() == smallest) {
                for &v in &clusters.members[root] {
                    for &e in &self.adjacency[v] {
                        if support[e] < 2 {
                            support[e] += 1;
                            if support[e] == 2 {
                                fused.push(e);
                            }
                        }
                    }
                }
            }
            for e in fused {
                clusters.union(self.edges[e].a, self.edges[e].b);
            }
        }
        // peel a spanning forest of the grown edges, leaves first
        let mut visited = vec![false; n];
        let mut parent_edge: Vec<Option<usize>> = vec![None; n];
        let mut order = Vec::new();
        for start in 0..n {
            if visited[start] || !self.adjacency[start].iter().any(|&e| support[e] == 2) {
                continue;
            }
            visited[start] = true;
            let mut queue = std::collections::VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                order.push(v);
                for &e in &self.adjacency[v] {
                    if support[e] != 2 {
                        continue;
                    }
                    let w = if self.edges[e].a == v { self.edges[e].b } else { self.edges[e].a };
                    if !visited[w] {
                        visited[w] = true;
                        parent_edge[w] = Some(e);
                        queue.push_back(w);
                    }
                }
            }
        }
        let mut flips = vec![false; self.n_data];
        let mut weight = 0;
        for &v in order.iter().rev() {
            if let (true, Some(e)) = (defect[v], parent_edge[v]) {
                let edge = self.edges[e];
                let u = if edge.a == v { edge.b } else { edge.a };
                defect[v] = false;
                defect[u] ^= true;
                weight += 1;
                if let Some(q) = edge.qubit {
                    flips[q] ^= true;
                }
            }
        }
        debug_assert!(defect.iter().all(|&x| !x));
        Ok(Correction::from_flips(self.stab, flips, weight))
    }
}

pub fn uf_decode(layout: &ToricLayout, graph: &DefectGraph) -> Result<Correction> {
    UnionFindDecoder::new(layout, graph.layers, graph.stab).decode(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decoders::test_support::random_graph;
    use crate::decoders::{is_syndrome_valid, mwpm_matching};
    use crate::superop::Architecture;
    use crate::surface::Defect;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn adjacent_and_empty() {
        let layout = ToricLayout::new(Architecture::Wt4, 4).unwrap();
        let empty = DefectGraph::new(4, 5, StabilizerType::Plaquette, vec![]).unwrap();
        assert!(uf_decode(&layout, &empty).unwrap().qubits.is_empty());
        let pair = DefectGraph::new(
            4,
            5,
            StabilizerType::Plaquette,
            vec![Defect { layer: 2, row: 1, col: 1 }, Defect { layer: 2, row: 1, col: 2 }],
        )
        .unwrap();
        let c = uf_decode(&layout, &pair).unwrap();
        assert_eq!(c.qubits, vec![layout.step_edge(StabilizerType::Plaquette, 1, 1, false, true)]);
        let time = DefectGraph::new(
            4,
            5,
            StabilizerType::Vertex,
            vec![Defect { layer: 2, row: 1, col: 1 }, Defect { layer: 3, row: 1, col: 1 }],
        )
        .unwrap();
        let c = uf_decode(&layout, &time).unwrap();
        assert!(c.qubits.is_empty());
        assert_eq!(c.weight, 1);
    }

    #[test]
    fn random_instances_are_valid_and_no_lighter_than_mwpm() {
        for d in [4, 6] {
            let layout = ToricLayout::new(Architecture::Wt3, d).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(d as u64);
            for i in 0..300 {
                let stab = StabilizerType::BOTH[i % 2];
                let g = random_graph(&mut rng, d, d + 1, stab, 12);
                let c = uf_decode(&layout, &g).unwrap();
                assert!(is_syndrome_valid(&layout, &g, &c));
                assert!(c.weight >= g.matching_weight(&mwpm_matching(&g)));
            }
        }
    }
}
