//! Toric code with distributed stabilizer measurements sampled from superoperator tables.
//!
//! Stabilizers live on a d×d torus. Horizontal edge h(r,c) joins vertices (r,c) and
//! (r,c+1); vertical edge v(r,c) joins (r,c) and (r+1,c). Plaquette (r,c) has corners
//! (r,c)..(r+1,c+1). Stabilizer index is r·d + c for both types.

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::quantum::Pauli;
use crate::superop::{Architecture, StabilizerType, SuperoperatorTable, N_DATA, N_ERRORS, N_ROWS};

/// Index of a stabilizer type in per-type arrays.
pub fn type_index(stab: StabilizerType) -> usize {
    match stab {
        StabilizerType::Plaquette => 0,
        StabilizerType::Vertex => 1,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubRound {
    pub stab: StabilizerType,
    pub stabilizers: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ToricLayout {
    pub d: usize,
    pub architecture: Architecture,
    /// Data-qubit support per stabilizer, in table qubit order, indexed by type.
    pub supports: [Vec<[usize; 4]>; 2],
    /// WT3 only: the idle qubits (5, 6, 7, 8) paired with each stabilizer.
    pub idle: Option<[Vec<[usize; 4]>; 2]>,
    pub subrounds: Vec<SubRound>,
    /// Module of each data qubit.
    pub module_of: Vec<usize>,
}

impl ToricLayout {
    pub fn new(arch: Architecture, d: usize) -> Result<Self> {
        if d < 4 || d % 2 != 0 {
            return Err(Error::Layout(format!("distance must be even and at least 4, got {d}")));
        }
        let h = |r: usize, c: usize| (r % d) * d + c % d;
        let v = |r: usize, c: usize| d * d + (r % d) * d + c % d;
        let (up, left) = (|x: usize| x + d - 1, |x: usize| x + d - 1);
        let mut plaq = Vec::with_capacity(d * d);
        let mut vert = Vec::with_capacity(d * d);
        let mut plaq_idle = Vec::with_capacity(d * d);
        let mut vert_idle = Vec::with_capacity(d * d);
        for r in 0..d {
            for c in 0..d {
                plaq.push([h(r + 1, c), h(r, c), v(r, c), v(r, c + 1)]);
                vert.push([h(r, left(c)), h(r, c), v(r, c), v(up(r), c)]);
                plaq_idle.push([v(r + 1, c), h(r, c + 1), h(r + 1, c + 1), v(r + 1, c + 1)]);
                vert_idle.push([v(r, left(c)), h(up(r), c), h(up(r), left(c)), v(up(r), left(c))]);
            }
        }
        let n_classes = match arch {
            Architecture::Wt4 => 2,
            Architecture::Wt3 => 4,
        };
        let class = |s: usize| {
            let (r, c) = (s / d, s % d);
            match arch {
                Architecture::Wt4 => (r + c) % 2,
                Architecture::Wt3 => 2 * (r % 2) + c % 2,
            }
        };
        let mut subrounds = Vec::new();
        for stab in StabilizerType::BOTH {
            for k in 0..n_classes {
                subrounds.push(SubRound { stab, stabilizers: (0..d * d).filter(|&s| class(s) == k).collect() });
            }
        }
        let module_of = match arch {
            Architecture::Wt4 => (0..2 * d * d).collect(),
            Architecture::Wt3 => (0..2 * d * d).map(|q| q % (d * d)).collect(),
        };
        let idle = (arch == Architecture::Wt3).then(|| [plaq_idle, vert_idle]);
        Ok(ToricLayout { d, architecture: arch, supports: [plaq, vert], idle, subrounds, module_of })
    }

    pub fn n_data(&self) -> usize {
        2 * self.d * self.d
    }

    pub fn n_stabilizers(&self) -> usize {
        self.d * self.d
    }

    pub fn n_modules(&self) -> usize {
        let mut m = self.module_of.clone();
        m.sort_unstable();
        m.dedup();
        m.len()
    }

    pub fn support(&self, stab: StabilizerType, s: usize) -> &[usize; 4] {
        &self.supports[type_index(stab)][s]
    }

    /// Data qubit shared by two neighbouring stabilizers of the same type.
    pub fn shared_edge(&self, stab: StabilizerType, a: usize, b: usize) -> Option<usize> {
        let sa = self.support(stab, a);
        let sb = self.support(stab, b);
        let common: Vec<usize> = sa.iter().copied().filter(|q| sb.contains(q)).collect();
        match common[..] {
            [q] => Some(q),
            _ => None,
        }
    }

    /// Data qubit crossed when stepping from stabilizer (r,c) one unit along `dr` or `dc`.
    pub fn step_edge(&self, stab: StabilizerType, r: usize, c: usize, vertical: bool, forward: bool) -> usize {
        let d = self.d;
        // plaquettes are crossed through their bounding edges, vertices along their incident ones
        match (stab, vertical, forward) {
            (StabilizerType::Plaquette, true, true) => (r + 1) % d * d + c,
            (StabilizerType::Plaquette, true, false) => r * d + c,
            (StabilizerType::Plaquette, false, true) => d * d + r * d + (c + 1) % d,
            (StabilizerType::Plaquette, false, false) => d * d + r * d + c,
            (StabilizerType::Vertex, true, true) => d * d + r * d + c,
            (StabilizerType::Vertex, true, false) => d * d + (r + d - 1) % d * d + c,
            (StabilizerType::Vertex, false, true) => r * d + c,
            (StabilizerType::Vertex, false, false) => r * d + (c + d - 1) % d,
        }
    }

    /// Stabilizer outcomes (true = −1) of a frame for one type.
    pub fn syndrome(&self, frame: &PauliFrame, stab: StabilizerType) -> Vec<bool> {
        self.supports[type_index(stab)].iter().map(|s| frame.parity(stab, s)).collect()
    }

    /// Logical supports: (Z_1, Z_2) act on vertical column 0 and horizontal row 0;
    /// (X_1, X_2) on horizontal column 0 and vertical row 0.
    pub fn logicals(&self) -> [(Pauli, Vec<usize>); 4] {
        let d = self.d;
        [
            (Pauli::Z, (0..d).map(|r| d * d + r * d).collect()),
            (Pauli::Z, (0..d).collect()),
            (Pauli::X, (0..d).map(|r| r * d).collect()),
            (Pauli::X, (0..d).map(|c| d * d + c).collect()),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PauliFrame {
    pub x: Vec<bool>,
    pub z: Vec<bool>,
}

impl PauliFrame {
    pub fn new(n: usize) -> Self {
        PauliFrame { x: vec![false; n], z: vec![false; n] }
    }

    pub fn apply(&mut self, qubit: usize, p: Pauli) {
        self.x[qubit] ^= p.x_bit();
        self.z[qubit] ^= p.z_bit();
    }

    pub fn is_identity(&self) -> bool {
        !self.x.iter().chain(&self.z).any(|&b| b)
    }

    pub fn xor(&self, other: &PauliFrame) -> PauliFrame {
        PauliFrame {
            x: self.x.iter().zip(&other.x).map(|(a, b)| a ^ b).collect(),
            z: self.z.iter().zip(&other.z).map(|(a, b)| a ^ b).collect(),
        }
    }

    /// Anticommutation parity with a stabilizer of the given type on `support`.
    pub fn parity(&self, stab: StabilizerType, support: &[usize]) -> bool {
        let bits = match stab {
            StabilizerType::Plaquette => &self.x,
            StabilizerType::Vertex => &self.z,
        };
        support.iter().fold(false, |acc, &q| acc ^ bits[q])
    }
}

/// Per-layer outcomes (true = −1) and GHZ failures, indexed `[layer][type][stabilizer]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SyndromeHistory {
    pub outcomes: Vec<[Vec<bool>; 2]>,
    pub ghz_failures: Vec<[Vec<bool>; 2]>,
    pub last_known: [Vec<bool>; 2],
}

impl SyndromeHistory {
    pub fn new(n_stab: usize) -> Self {
        SyndromeHistory { outcomes: Vec::new(), ghz_failures: Vec::new(), last_known: [vec![false; n_stab], vec![false; n_stab]] }
    }
}

#[derive(Clone, Copy, Debug)]
struct SampledRow {
    error: [Pauli; N_DATA],
    ghz_success: bool,
    meas_error: bool,
}

/// Alias samplers for every table column.
#[derive(Clone, Debug)]
pub struct ErrorSampler {
    architecture: Architecture,
    rows: Vec<SampledRow>,
    columns: [WeightedAliasIndex<f64>; 2],
    /// WT3 idle errors given GHZ success / failure.
    idle: Option<[WeightedAliasIndex<f64>; 2]>,
}

fn alias(weights: Vec<f64>) -> Result<WeightedAliasIndex<f64>> {
    WeightedAliasIndex::new(weights).map_err(|e| Error::Schema(format!("cannot sample column: {e}")))
}

impl ErrorSampler {
    pub fn new(table: &SuperoperatorTable) -> Result<Self> {
        table.validate()?;
        let rows = table
            .rows
            .iter()
            .map(|r| {
                let ops = r.error.ops();
                SampledRow { error: [ops[0], ops[1], ops[2], ops[3]], ghz_success: r.ghz_success, meas_error: r.meas_error }
            })
            .collect();
        let columns = [
            alias(table.rows.iter().map(|r| r.p_plaquette).collect())?,
            alias(table.rows.iter().map(|r| r.p_vertex).collect())?,
        ];
        let idle = match table.architecture {
            Architecture::Wt4 => None,
            Architecture::Wt3 => {
                let col = |ghz: bool| -> Vec<f64> {
                    (0..N_ERRORS).map(|e| table.rows[crate::superop::row_index(e, ghz, false)].p_idle.unwrap_or(0.0)).collect()
                };
                Some([alias(col(true))?, alias(col(false))?])
            }
        };
        debug_assert_eq!(table.rows.len(), N_ROWS);
        Ok(ErrorSampler { architecture: table.architecture, rows, columns, idle })
    }

    pub fn architecture(&self) -> Architecture {
        self.architecture
    }

    fn draw<R: Rng + ?Sized>(&self, stab: StabilizerType, rng: &mut R) -> SampledRow {
        self.rows[self.columns[type_index(stab)].sample(rng)]
    }

    fn draw_idle<R: Rng + ?Sized>(&self, ghz_success: bool, rng: &mut R) -> Option<[Pauli; N_DATA]> {
        self.idle.as_ref().map(|cols| {
            let e = cols[usize::from(!ghz_success)].sample(rng);
            self.rows[e * 4].error
        })
    }
}

/// Mutable state of one Monte Carlo trial.
#[derive(Clone, Debug)]
pub struct Trial<'a> {
    pub layout: &'a ToricLayout,
    pub frame: PauliFrame,
    pub history: SyndromeHistory,
    current: [Vec<bool>; 2],
    failures: [Vec<bool>; 2],
}

impl<'a> Trial<'a> {
    pub fn new(layout: &'a ToricLayout) -> Self {
        let n = layout.n_stabilizers();
        Trial {
            layout,
            frame: PauliFrame::new(layout.n_data()),
            history: SyndromeHistory::new(n),
            current: [vec![false; n], vec![false; n]],
            failures: [vec![false; n], vec![false; n]],
        }
    }

    /// Measures one sub-round. `None` measures perfectly.
    pub fn run_subround<R: Rng + ?Sized>(&mut self, sub: &SubRound, sampler: Option<&ErrorSampler>, rng: &mut R) {
        let t = type_index(sub.stab);
        for &s in &sub.stabilizers {
            let support = self.layout.supports[t][s];
            let (ghz_success, meas_error) = match sampler {
                Some(sampler) => {
                    let row = sampler.draw(sub.stab, rng);
                    for (q, p) in support.iter().zip(row.error) {
                        self.frame.apply(*q, p);
                    }
                    if let (Some(idle), Some(err)) = (&self.layout.idle, sampler.draw_idle(row.ghz_success, rng)) {
                        for (q, p) in idle[t][s].iter().zip(err) {
                            self.frame.apply(*q, p);
                        }
                    }
                    (row.ghz_success, row.meas_error)
                }
                None => (true, false),
            };
            let outcome = if ghz_success {
                let o = self.frame.parity(sub.stab, &support) ^ meas_error;
                self.history.last_known[t][s] = o;
                o
            } else {
                self.history.last_known[t][s]
            };
            self.current[t][s] = outcome;
            self.failures[t][s] = !ghz_success;
        }
    }

    /// Closes the current layer into the history.
    pub fn end_layer(&mut self) {
        self.history.outcomes.push(self.current.clone());
        self.history.ghz_failures.push(std::mem::replace(&mut self.failures, {
            let n = self.layout.n_stabilizers();
            [vec![false; n], vec![false; n]]
        }));
    }

    pub fn run_layer<R: Rng + ?Sized>(&mut self, sampler: Option<&ErrorSampler>, rng: &mut R) {
        let layout = self.layout;
        for sub in &layout.subrounds {
            self.run_subround(sub, sampler, rng);
        }
        self.end_layer();
    }
}

/// d noisy layers followed by one perfect layer.
pub fn run_trial<R: Rng + ?Sized>(layout: &ToricLayout, sampler: &ErrorSampler, rng: &mut R) -> Result<(SyndromeHistory, PauliFrame)> {
    if sampler.architecture() != layout.architecture {
        return Err(Error::Layout(format!(
            "table is for {} but layout is {}",
            sampler.architecture(),
            layout.architecture
        )));
    }
    let mut trial = Trial::new(layout);
    for _ in 0..layout.d {
        trial.run_layer(Some(sampler), rng);
    }
    trial.run_layer(None, rng);
    Ok((trial.history, trial.frame))
}

/// A change of outcome between consecutive layers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Defect {
    pub layer: usize,
    pub row: usize,
    pub col: usize,
}

/// Defects per type; the layer before the first is taken as all +1.
pub fn compute_defects(history: &SyndromeHistory, d: usize) -> [Vec<Defect>; 2] {
    let mut out = [Vec::new(), Vec::new()];
    for (t, defects) in out.iter_mut().enumerate() {
        let mut prev = vec![false; d * d];
        for (layer, outcomes) in history.outcomes.iter().enumerate() {
            for (s, (&now, before)) in outcomes[t].iter().zip(prev.iter_mut()).enumerate() {
                if now != *before {
                    defects.push(Defect { layer, row: s / d, col: s % d });
                }
                *before = now;
            }
        }
    }
    out
}

/// Logical failure flags in the order of [`ToricLayout::logicals`].
pub fn check_logical(true_frame: &PauliFrame, correction: &PauliFrame, layout: &ToricLayout) -> [bool; 4] {
    let residual = true_frame.xor(correction);
    layout.logicals().map(|(p, support)| {
        // a Z logical is flipped by residual X and vice versa
        let bits = if p == Pauli::Z { &residual.x } else { &residual.z };
        support.iter().fold(false, |acc, &q| acc ^ bits[q])
    })
}
