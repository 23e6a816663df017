use crate::error::{Error, Result};
use crate::surface::ToricLayout;

use super::{correction_from_matching, Correction, DefectGraph};

pub const BRUTE_FORCE_MAX_DEFECTS: usize = 8;

/// Minimum-weight perfect matching by exhaustive enumeration; the first minimum found wins.
pub fn brute_force_matching(graph: &DefectGraph, max_defects: usize) -> Result<(Vec<(usize, usize)>, usize)> {
    if graph.len() > max_defects {
        return Err(Error::TooManyDefects { count: graph.len(), max: max_defects });
    }
    fn search(graph: &DefectGraph, free: &mut Vec<usize>, current: &mut Vec<(usize, usize)>, cost: usize, best: &mut Option<(Vec<(usize, usize)>, usize)>) {
        if free.is_empty() {
            if best.as_ref().map_or(true, |(_, w)| cost < *w) {
                *best = Some((current.clone(), cost));
            }
            return;
        }
        let a = free.remove(0);
        for i in 0..free.len() {
            let b = free.remove(i);
            current.push((a, b));
            search(graph, free, current, cost + graph.distance(a, b), best);
            current.pop();
            free.insert(i, b);
        }
        free.insert(0, a);
    }
    let mut best = None;
    search(graph, &mut (0..graph.len()).collect(), &mut Vec::new(), 0, &mut best);
    Ok(best.unwrap_or_default())
}

pub fn brute_force_decode(layout: &ToricLayout, graph: &DefectGraph, max_defects: usize) -> Result<Correction> {
    let (pairs, _) = brute_force_matching(graph, max_defects)?;
    Ok(correction_from_matching(layout, graph, &pairs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::superop::StabilizerType;
    use crate::surface::Defect;

    #[test]
    fn small_cases() {
        let empty = DefectGraph::new(4, 5, StabilizerType::Plaquette, vec![]).unwrap();
        assert_eq!(brute_force_matching(&empty, 8).unwrap(), (vec![], 0));
        let d = |layer, row, col| Defect { layer, row, col };
        let four = DefectGraph::new(4, 5, StabilizerType::Plaquette, vec![d(0, 0, 0), d(0, 0, 1), d(3, 2, 2), d(3, 2, 3)]).unwrap();
        let (pairs, w) = brute_force_matching(&four, 8).unwrap();
        assert_eq!(w, 2);
        assert_eq!(pairs, vec![(0, 1), (2, 3)]);
        let many = DefectGraph::new(4, 5, StabilizerType::Plaquette, (0..10).map(|i| d(i / 4, i % 4, 0)).collect()).unwrap();
        assert_eq!(brute_force_matching(&many, 8), Err(Error::TooManyDefects { count: 10, max: 8 }));
    }
}
