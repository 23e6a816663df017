use std::convert::Infallible;

use petgraph::graph::UnGraph;
use rustworkx_core::max_weight_matching::max_weight_matching;

use crate::error::Result;
use crate::surface::ToricLayout;

use super::{correction_from_matching, Correction, DefectGraph};

/// Minimum-weight perfect matching on the complete defect graph.
pub fn mwpm_matching(graph: &DefectGraph) -> Vec<(usize, usize)> {
    let n = graph.len();
    if n == 0 {
        return Vec::new();
    }
    let mut g: UnGraph<(), i128> = UnGraph::with_capacity(n, n * (n - 1) / 2);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    let dists: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|a| ((a + 1)..n).map(move |b| (a, b))).map(|(a, b)| (a, b, graph.distance(a, b))).collect();
    let big = dists.iter().map(|x| x.2).max().unwrap_or(0) as i128 + 1;
    for &(a, b, w) in &dists {
        g.add_edge(nodes[a], nodes[b], big - w as i128);
    }
    // maximum cardinality fixes the pair count, so maximizing Σ(big − w) minimizes Σw
    let matched = max_weight_matching(&g, true, |e| Ok::<i128, Infallible>(*e.weight()), false).unwrap_or_else(|e| match e {});
    let mut pairs: Vec<(usize, usize)> = matched.into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
    pairs.sort_unstable();
    pairs
}

pub fn mwpm_decode(layout: &ToricLayout, graph: &DefectGraph) -> Result<Correction> {
    Ok(correction_from_matching(layout, graph, &mwpm_matching(graph)))
}
