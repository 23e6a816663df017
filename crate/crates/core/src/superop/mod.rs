//! Noisy stabilizer-measurement superoperators.
//!
//! A stabilizer measurement is simulated on the Choi state of its four data qubits.
//! The output is decomposed into rows (data Pauli error, measurement error) for the
//! success branch and data Pauli errors for the GHZ-failure branch.
//!
//! Row convention: the error acts on the data before an ideal parity readout, and the
//! measurement-error flag flips that readout. E and E·S act identically on the code,
//! so each pair is stored on a canonical representative: lower weight first, then
//! lexicographic with I < X < Y < Z. The other member's rows are zero.

mod io;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

pub use io::{load_table, save_table, table_from_csv, table_to_csv, SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::noise::{decoherence_scalings, depolarizing_2q, pauli_probs_from_scalings, CircuitNoise, CoherenceSet, OperationTimes};
use crate::quantum::{controlled, cr, DensityMatrix, Pauli, PauliString, C64, KET_MINUS, KET_PLUS};
use crate::schemes::SchemeResult;

pub const N_DATA: usize = 4;
pub const N_ERRORS: usize = 256;
pub const N_ROWS: usize = N_ERRORS * 4;
const SUM_TOL: f64 = 1e-8;
const NEG_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Architecture {
    Wt4,
    Wt3,
}

impl Architecture {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "WT4" => Ok(Architecture::Wt4),
            "WT3" => Ok(Architecture::Wt3),
            _ => Err(Error::Parameter { name: "arch", reason: format!("unknown architecture {s:?}") }),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Architecture::Wt4 => "WT4",
            Architecture::Wt3 => "WT3",
        }
    }

    /// GHZ size: one communication qubit per module.
    pub fn ghz_size(self) -> usize {
        match self {
            Architecture::Wt4 => 4,
            Architecture::Wt3 => 3,
        }
    }

    /// Stabilizer data-qubit positions held by each module.
    pub fn module_data(self) -> &'static [&'static [usize]] {
        match self {
            Architecture::Wt4 => &[&[0], &[1], &[2], &[3]],
            Architecture::Wt3 => &[&[0], &[1, 2], &[3]],
        }
    }

    /// Sequential controlled gates per communication qubit.
    pub fn gate_steps(self) -> usize {
        match self {
            Architecture::Wt4 => 1,
            Architecture::Wt3 => 2,
        }
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum StabilizerType {
    /// Z-type.
    Plaquette,
    /// X-type.
    Vertex,
}

impl StabilizerType {
    pub const BOTH: [StabilizerType; 2] = [StabilizerType::Plaquette, StabilizerType::Vertex];

    pub fn pauli(self) -> Pauli {
        match self {
            StabilizerType::Plaquette => Pauli::Z,
            StabilizerType::Vertex => Pauli::X,
        }
    }

    pub fn operator(self) -> PauliString {
        PauliString::new(vec![self.pauli(); N_DATA])
    }
}

/// Φ+ pairs on `n_data` data qubits followed by their references: (d0..d_{n-1}, r0..r_{n-1}).
pub fn build_choi_input(n_data: usize) -> Result<DensityMatrix> {
    if !(1..=N_DATA).contains(&n_data) {
        return Err(Error::Parameter { name: "n_data", reason: format!("{n_data} not in 1..=4") });
    }
    let dim = 1usize << (2 * n_data);
    let amp = cr(1.0 / ((1usize << n_data) as f64).sqrt());
    let mut psi = vec![cr(0.0); dim];
    for x in 0..1usize << n_data {
        psi[(x << n_data) | x] = amp;
    }
    DensityMatrix::from_pure(&psi)
}

/// Geometric GHZ attempts truncated at the cut-off.
#[derive(Clone, Debug, PartialEq)]
pub struct AttemptStats {
    pub p: f64,
    pub attempt: f64,
    pub t_cut: f64,
    pub k_max: usize,
    pub p_ghz: f64,
    /// P(success at attempt k | success within cut-off), k = 1..=k_max.
    pub weights: Vec<f64>,
}

impl AttemptStats {
    pub fn new(p: f64, attempt: f64, t_cut: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Parameter { name: "p_succ", reason: format!("{p} not in [0,1]") });
        }
        if !(attempt > 0.0) {
            return Err(Error::Parameter { name: "attempt", reason: format!("{attempt} must be positive") });
        }
        // tolerate t_cut being an exact multiple up to round-off
        let k_max = ((t_cut / attempt) * (1.0 + 1e-12)).floor() as usize;
        if k_max == 0 {
            return Err(Error::CutoffTooShort { t_cut, attempt });
        }
        let p_ghz = p_ghz_within_cutoff(p, k_max);
        let weights = if p_ghz > 0.0 {
            (1..=k_max).map(|k| p * (1.0 - p).powi(k as i32 - 1) / p_ghz).collect()
        } else {
            vec![0.0; k_max]
        };
        Ok(AttemptStats { p, attempt, t_cut, k_max, p_ghz, weights })
    }

    fn nonzero(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.weights.iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(i, &w)| (i + 1, w))
    }
}

/// 1 − (1 − p)^k.
pub fn p_ghz_within_cutoff(p: f64, k: usize) -> f64 {
    if p >= 1.0 {
        return if k > 0 { 1.0 } else { 0.0 };
    }
    -(k as f64 * (-p).ln_1p()).exp_m1()
}

/// Branch states of one stabilizer measurement on the (data, reference) Choi state.
#[derive(Clone, Debug)]
pub struct StabilizerBranches {
    /// Unnormalized states by reported parity; traces sum to 1.
    pub success: [DensityMatrix; 2],
    pub failure: DensityMatrix,
    pub p_ghz: f64,
}

/// Ideal-timing circuit: GHZ consumption, controlled gates, communication readout.
fn core_circuit(arch: Architecture, stab: StabilizerType, ghz: &DensityMatrix, noise: &CircuitNoise) -> Result<[DensityMatrix; 2]> {
    #[derive(Clone, Copy, PartialEq)]
    enum Slot {
        Comm,
        Data(usize),
        Ref(usize),
    }
    let gate = controlled(stab.pauli());
    let depol = depolarizing_2q(noise.p_g)?;
    let pair = DensityMatrix::ghz(2);
    let mut slots = vec![Slot::Comm; arch.ghz_size()];
    let mut branches = [ghz.clone(), DensityMatrix::zero(ghz.n_qubits())];
    for data in arch.module_data() {
        // the current module's comm qubit is always first
        for &d in *data {
            for b in branches.iter_mut() {
                *b = b.kron(&pair)?;
            }
            slots.extend([Slot::Data(d), Slot::Ref(d)]);
            let dq = slots.len() - 2;
            for b in branches.iter_mut() {
                *b = b.apply_operator(&gate, &[0, dq])?.apply_channel(&depol, &[0, dq])?;
            }
        }
        let mut next = [DensityMatrix::zero(slots.len() - 1), DensityMatrix::zero(slots.len() - 1)];
        for (parity, rho) in branches.iter().enumerate() {
            if rho.trace() == 0.0 {
                continue;
            }
            for (bit, ket) in [(0, KET_PLUS), (1, KET_MINUS)] {
                let projected = rho.project_out(0, ket)?;
                next[parity ^ bit].add_scaled(&projected, 1.0 - noise.p_m);
                next[parity ^ bit ^ 1].add_scaled(&projected, noise.p_m);
            }
        }
        slots.remove(0);
        branches = next;
    }
    let order: Vec<usize> = (0..N_DATA)
        .map(|d| slots.iter().position(|&s| s == Slot::Data(d)).expect("data slot"))
        .chain((0..N_DATA).map(|d| slots.iter().position(|&s| s == Slot::Ref(d)).expect("ref slot")))
        .collect();
    let [b0, b1] = branches;
    Ok([b0.permute(&order)?, b1.permute(&order)?])
}

/// Applies a mixture over scenarios of independent per-qubit Pauli channels, each given
/// by Bloch scalings (a, b), where all data qubits share one pair and all references another.
///
/// Per qubit the channel multiplies off-diagonal blocks by a and the diagonal difference
/// by b, so the mixture only needs the weighted sums of monomials in the counts.
fn mixed_pauli_channel(rho: &DensityMatrix, scenarios: &[(f64, (f64, f64), (f64, f64))]) -> DensityMatrix {
    let n = 2 * N_DATA;
    let dim = 1usize << n;
    let mut table = [[[[0.0f64; N_DATA + 1]; N_DATA + 1]; N_DATA + 1]; N_DATA + 1];
    for &(w, (ad, bd), (ar, br)) in scenarios {
        for (i0, t0) in table.iter_mut().enumerate() {
            for (i1, t1) in t0.iter_mut().enumerate() {
                for (i2, t2) in t1.iter_mut().enumerate() {
                    for (i3, t3) in t2.iter_mut().enumerate() {
                        *t3 += w * ad.powi(i0 as i32) * bd.powi(i1 as i32) * ar.powi(i2 as i32) * br.powi(i3 as i32);
                    }
                }
            }
        }
    }
    let mut out = rho.clone();
    let m = out.matrix_mut();
    // to (sum, diff) coordinates on every diagonal qubit block
    for q in 0..n {
        let bit = 1usize << (n - 1 - q);
        for r in 0..dim {
            if r & bit != 0 {
                continue;
            }
            for c in 0..dim {
                if c & bit != 0 {
                    continue;
                }
                let (x, y) = (m[(r, c)], m[(r | bit, c | bit)]);
                m[(r, c)] = x + y;
                m[(r | bit, c | bit)] = x - y;
            }
        }
    }
    let data_mask = ((1usize << N_DATA) - 1) << N_DATA;
    let ref_mask = (1usize << N_DATA) - 1;
    for c in 0..dim {
        for r in 0..dim {
            let off = r ^ c;
            let diff = r & c;
            let k = |mask: usize, v: usize| (v & mask).count_ones() as usize;
            let f = table[k(data_mask, off)][k(data_mask, diff)][k(ref_mask, off)][k(ref_mask, diff)];
            m[(r, c)] *= f;
        }
    }
    for q in 0..n {
        let bit = 1usize << (n - 1 - q);
        for r in 0..dim {
            if r & bit != 0 {
                continue;
            }
            for c in 0..dim {
                if c & bit != 0 {
                    continue;
                }
                let (s, d) = (m[(r, c)], m[(r | bit, c | bit)]);
                m[(r, c)] = (s + d) * 0.5;
                m[(r | bit, c | bit)] = (s - d) * 0.5;
            }
        }
    }
    out
}

/// Duration of the gate and readout phase.
pub fn operation_window(arch: Architecture, stab: StabilizerType, times: &OperationTimes) -> f64 {
    arch.gate_steps() as f64 * times.controlled(stab.pauli()) + times.t_meas
}

pub fn simulate_stabilizer(
    arch: Architecture,
    stab: StabilizerType,
    ghz: &SchemeResult,
    noise: &CircuitNoise,
    times: &OperationTimes,
    coherence: &CoherenceSet,
    t_cut: f64,
) -> Result<StabilizerBranches> {
    if ghz.state.n_qubits() != arch.ghz_size() {
        return Err(Error::Dimension(format!(
            "{arch} needs a {}-qubit GHZ state, got {}",
            arch.ghz_size(),
            ghz.state.n_qubits()
        )));
    }
    coherence.validate()?;
    let c = coherence.in_link_units();
    let times = c.adjust_times(times);
    let stats = AttemptStats::new(ghz.p_succ, ghz.duration, t_cut)?;
    let window = operation_window(arch, stab, &times);
    let core = core_circuit(arch, stab, &ghz.state, noise)?;
    // data noise before the gates acts as the same Pauli channel on the references
    let scenarios: Vec<_> = stats
        .nonzero()
        .map(|(k, w)| {
            let waited = k as f64 * stats.attempt;
            let post = decoherence_scalings(window + t_cut - waited, c.t1_idle, c.t2_idle);
            let pre = decoherence_scalings(waited, c.t1_link, c.t2_link);
            (w, post, pre)
        })
        .collect();
    let success = if scenarios.is_empty() {
        [DensityMatrix::zero(2 * N_DATA), DensityMatrix::zero(2 * N_DATA)]
    } else {
        [mixed_pauli_channel(&core[0], &scenarios), mixed_pauli_channel(&core[1], &scenarios)]
    };
    let (a1, b1) = decoherence_scalings(t_cut, c.t1_link, c.t2_link);
    let (a2, b2) = decoherence_scalings(window, c.t1_idle, c.t2_idle);
    let failure = mixed_pauli_channel(&build_choi_input(N_DATA)?, &[(1.0, (a1 * a2, b1 * b2), (1.0, 1.0))]);
    Ok(StabilizerBranches { success, failure, p_ghz: stats.p_ghz })
}

fn canonical_index(e: usize, stab: StabilizerType) -> usize {
    let pe = PauliString::from_index(N_DATA, e);
    let other = pe.mul(&stab.operator());
    let key = |p: &PauliString| (p.weight(), p.index());
    if key(&other) < key(&pe) {
        other.index()
    } else {
        e
    }
}

pub fn is_canonical(error: &PauliString, stab: StabilizerType) -> bool {
    canonical_index(error.index(), stab) == error.index()
}

/// Sparse √2·(Π_j E ⊗ I)|Φ⟩ with Π_j = (I + (−1)^j S)/2 and |Φ⟩ = ¼ Σ_x |x⟩|x⟩.
fn projected_choi_vector(e: &PauliString, s: &PauliString, j: usize) -> Vec<(usize, C64)> {
    let sign = if j == 0 { 1.0 } else { -1.0 };
    let scale = std::f64::consts::SQRT_2 * 0.5 * 0.25;
    let mut out: Vec<(usize, C64)> = Vec::with_capacity(32);
    let mut add = |idx: usize, amp: C64| {
        if let Some(slot) = out.iter_mut().find(|(i, _)| *i == idx) {
            slot.1 += amp;
        } else {
            out.push((idx, amp));
        }
    };
    for x in 0..1usize << N_DATA {
        let (y, pe) = e.apply_to_basis(x);
        let (z, ps) = s.apply_to_basis(y);
        add((y << N_DATA) | x, pe * scale);
        add((z << N_DATA) | x, pe * ps * sign * scale);
    }
    out.retain(|(_, a)| a.norm() > 0.0);
    out
}

fn vector_unprojected(e: &PauliString) -> Vec<(usize, C64)> {
    (0..1usize << N_DATA)
        .map(|x| {
            let (y, pe) = e.apply_to_basis(x);
            ((y << N_DATA) | x, pe * 0.25)
        })
        .collect()
}

fn clamp(p: f64) -> Result<f64> {
    if p < -NEG_TOL {
        return Err(Error::NegativeProbability(p));
    }
    Ok(p.max(0.0))
}

/// Success-branch decomposition: `[E index][meas_error]`, canonical rows only.
pub fn decompose(branch: &[DensityMatrix; 2], stab: StabilizerType) -> Result<Vec<[f64; 2]>> {
    let s = stab.operator();
    let mut out = vec![[0.0; 2]; N_ERRORS];
    for (e, row) in out.iter_mut().enumerate() {
        if canonical_index(e, stab) != e {
            continue;
        }
        let pe = PauliString::from_index(N_DATA, e);
        for (f, cell) in row.iter_mut().enumerate() {
            let mut p = 0.0;
            for (m, rho) in branch.iter().enumerate() {
                p += rho.expectation_sparse(&projected_choi_vector(&pe, &s, m ^ f));
            }
            *cell = clamp(p)?;
        }
    }
    let want: f64 = branch.iter().map(DensityMatrix::trace).sum();
    let total: f64 = out.iter().flatten().sum();
    if (total - want).abs() > SUM_TOL {
        return Err(Error::Normalization(total));
    }
    Ok(out)
}

/// Pauli-error distribution of a branch with no readout, folded onto canonical rows.
pub fn decompose_unmeasured(rho: &DensityMatrix, stab: StabilizerType) -> Result<Vec<f64>> {
    let mut out = vec![0.0; N_ERRORS];
    for e in 0..N_ERRORS {
        let p = clamp(rho.expectation_sparse(&vector_unprojected(&PauliString::from_index(N_DATA, e))))?;
        out[canonical_index(e, stab)] += p;
    }
    let total: f64 = out.iter().sum();
    if (total - rho.trace()).abs() > SUM_TOL {
        return Err(Error::Normalization(total));
    }
    Ok(out)
}

/// Idle-qubit error distributions (qubits 5, 6, 7, 8) for GHZ success and failure.
///
/// Qubits 5 and 6 sit in modules that are attempting links until the GHZ is ready;
/// 7 and 8 idle throughout.
pub fn wt3_idle_column(
    coherence: &CoherenceSet,
    times: &OperationTimes,
    t_cut: f64,
    stats: &AttemptStats,
    stab: StabilizerType,
) -> Result<[Vec<f64>; 2]> {
    let c = coherence.in_link_units();
    let times = c.adjust_times(times);
    let window = operation_window(Architecture::Wt3, stab, &times);
    let (aq, bq) = decoherence_scalings(t_cut + window, c.t1_idle, c.t2_idle);
    let quiet = pauli_probs_from_scalings(aq, bq);
    let product = |active: [f64; 4]| -> Vec<f64> {
        (0..N_ERRORS)
            .map(|e| {
                let ops = PauliString::from_index(N_DATA, e);
                let o = ops.ops();
                active[o[0].index()] * active[o[1].index()] * quiet[o[2].index()] * quiet[o[3].index()]
            })
            .collect()
    };
    let mut success = vec![0.0; N_ERRORS];
    for (k, w) in stats.nonzero() {
        let waited = k as f64 * stats.attempt;
        let (a1, b1) = decoherence_scalings(waited, c.t1_link, c.t2_link);
        let (a2, b2) = decoherence_scalings(t_cut - waited + window, c.t1_idle, c.t2_idle);
        for (s, p) in success.iter_mut().zip(product(pauli_probs_from_scalings(a1 * a2, b1 * b2))) {
            *s += w * p;
        }
    }
    if stats.p_ghz == 0.0 {
        success = vec![0.0; N_ERRORS];
        success[0] = 1.0;
    }
    let (a1, b1) = decoherence_scalings(t_cut, c.t1_link, c.t2_link);
    let (a2, b2) = decoherence_scalings(window, c.t1_idle, c.t2_idle);
    let failure = product(pauli_probs_from_scalings(a1 * a2, b1 * b2));
    Ok([success, failure])
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuperoperatorRow {
    pub error: PauliString,
    pub ghz_success: bool,
    pub meas_error: bool,
    pub p_plaquette: f64,
    pub p_vertex: f64,
    pub p_idle: Option<f64>,
}

impl SuperoperatorRow {
    pub fn probability(&self, stab: StabilizerType) -> f64 {
        match stab {
            StabilizerType::Plaquette => self.p_plaquette,
            StabilizerType::Vertex => self.p_vertex,
        }
    }
}

/// 1024 rows in fixed order: error index, then ghz_success (true first), then meas_error
/// (false first).
#[derive(Clone, Debug, PartialEq)]
pub struct SuperoperatorTable {
    pub architecture: Architecture,
    pub rows: Vec<SuperoperatorRow>,
    pub metadata: BTreeMap<String, String>,
}

pub fn row_index(error: usize, ghz_success: bool, meas_error: bool) -> usize {
    error * 4 + (!ghz_success as usize) * 2 + meas_error as usize
}

impl SuperoperatorTable {
    pub fn row(&self, error: &PauliString, ghz_success: bool, meas_error: bool) -> &SuperoperatorRow {
        &self.rows[row_index(error.index(), ghz_success, meas_error)]
    }

    pub fn p_ghz(&self) -> f64 {
        self.rows.iter().filter(|r| r.ghz_success).map(|r| r.p_plaquette).sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows.len() != N_ROWS {
            return Err(Error::Schema(format!("expected {N_ROWS} rows, found {}", self.rows.len())));
        }
        for (i, r) in self.rows.iter().enumerate() {
            if row_index(r.error.index(), r.ghz_success, r.meas_error) != i || r.error.len() != N_DATA {
                return Err(Error::Schema(format!("row {i} out of order")));
            }
            let probs = [Some(r.p_plaquette), Some(r.p_vertex), r.p_idle];
            if probs.iter().flatten().any(|p| !(*p >= 0.0) || !p.is_finite()) {
                return Err(Error::NegativeProbability(r.p_plaquette.min(r.p_vertex)));
            }
            if r.p_idle.is_some() != (self.architecture == Architecture::Wt3) {
                return Err(Error::Schema(format!("row {i}: idle column must be present exactly for WT3")));
            }
        }
        for stab in StabilizerType::BOTH {
            let total: f64 = self.rows.iter().map(|r| r.probability(stab)).sum();
            if (total - 1.0).abs() > SUM_TOL {
                return Err(Error::Normalization(total));
            }
        }
        if self.architecture == Architecture::Wt3 {
            for flag in [true, false] {
                let total: f64 = self.rows.iter().filter(|r| r.ghz_success == flag).filter_map(|r| r.p_idle).sum();
                if (total - 1.0).abs() > SUM_TOL {
                    return Err(Error::Normalization(total));
                }
            }
        }
        Ok(())
    }
}

/// Builds the table for both stabilizer types from one GHZ source.
pub fn build_table(
    arch: Architecture,
    ghz: &SchemeResult,
    noise: &CircuitNoise,
    times: &OperationTimes,
    coherence: &CoherenceSet,
    t_cut: f64,
    metadata: BTreeMap<String, String>,
) -> Result<SuperoperatorTable> {
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut p_ghz = 0.0;
    for stab in StabilizerType::BOTH {
        let branches = simulate_stabilizer(arch, stab, ghz, noise, times, coherence, t_cut)?;
        p_ghz = branches.p_ghz;
        let success = if p_ghz > 0.0 { decompose(&branches.success, stab)? } else { vec![[0.0; 2]; N_ERRORS] };
        let failure = decompose_unmeasured(&branches.failure, stab)?;
        let mut col = vec![0.0; N_ROWS];
        for e in 0..N_ERRORS {
            for f in [false, true] {
                col[row_index(e, true, f)] = p_ghz * success[e][f as usize];
                col[row_index(e, false, f)] = (1.0 - p_ghz) * failure[e] * 0.5;
            }
        }
        columns.push(col);
    }
    let idle = match arch {
        Architecture::Wt4 => None,
        Architecture::Wt3 => {
            let stats = AttemptStats::new(ghz.p_succ, ghz.duration, t_cut)?;
            Some(wt3_idle_column(coherence, times, t_cut, &stats, StabilizerType::Plaquette)?)
        }
    };
    let rows = (0..N_ROWS)
        .map(|i| {
            let (e, ghz_success, meas_error) = (i / 4, i % 4 < 2, i % 2 == 1);
            SuperoperatorRow {
                error: PauliString::from_index(N_DATA, e),
                ghz_success,
                meas_error,
                p_plaquette: columns[0][i],
                p_vertex: columns[1][i],
                p_idle: idle.as_ref().map(|[s, f]| match (ghz_success, meas_error) {
                    (true, false) => s[e],
                    (false, false) => f[e],
                    _ => 0.0,
                }),
            }
        })
        .collect();
    let mut metadata = metadata;
    metadata.insert("arch".into(), arch.to_string());
    metadata.insert("t_cut".into(), format!("{t_cut}"));
    metadata.insert("p_ghz".into(), format!("{p_ghz:.17e}"));
    let table = SuperoperatorTable { architecture: arch, rows, metadata };
    table.validate()?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::depolarizing_1q;

    fn perfect(n: usize) -> SchemeResult {
        SchemeResult { state: DensityMatrix::ghz(n), p_succ: 1.0, duration: 1.0 }
    }

    fn noiseless(arch: Architecture) -> SuperoperatorTable {
        build_table(
            arch,
            &perfect(arch.ghz_size()),
            &CircuitNoise::noiseless(),
            &OperationTimes::default(),
            &CoherenceSet::infinite(),
            1.0,
            BTreeMap::new(),
        )
        .unwrap()
    }

    #[test]
    fn choi_input() {
        assert!((build_choi_input(1).unwrap().matrix() - DensityMatrix::ghz(2).matrix()).norm() < 1e-15);
        let four = build_choi_input(4).unwrap();
        assert!((four.trace() - 1.0).abs() < 1e-12);
        let purity = (four.matrix() * four.matrix()).trace().re;
        assert!((purity - 1.0).abs() < 1e-12);
        let half = four.partial_trace(&[0, 1, 2, 3]).unwrap();
        let diff = (half.matrix() - DensityMatrix::maximally_mixed(4).matrix()).norm();
        assert!(diff < 1e-12);
        assert!(build_choi_input(5).is_err());
    }

    #[test]
    fn cutoff_probability() {
        assert_eq!(p_ghz_within_cutoff(1.0, 1), 1.0);
        assert!((p_ghz_within_cutoff(0.1, 3) - (1.0 - 0.9f64.powi(3))).abs() < 1e-15);
        assert!(matches!(AttemptStats::new(0.5, 2.0, 1.0), Err(Error::CutoffTooShort { .. })));
        let s = AttemptStats::new(0.2, 1.0, 10.0).unwrap();
        assert!((s.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let mut last = 0.0;
        for t in 1..40 {
            let p = AttemptStats::new(0.05, 1.0, t as f64).unwrap().p_ghz;
            assert!(p >= last);
            last = p;
        }
    }

    #[test]
    fn noiseless_tables_are_trivial() {
        for arch in [Architecture::Wt4, Architecture::Wt3] {
            let t = noiseless(arch);
            let id = PauliString::identity(4);
            assert!((t.row(&id, true, false).p_plaquette - 1.0).abs() < 1e-12);
            assert!((t.row(&id, true, false).p_vertex - 1.0).abs() < 1e-12);
            if arch == Architecture::Wt3 {
                assert!((t.row(&id, true, false).p_idle.unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn canonical_pairs() {
        let z = StabilizerType::Plaquette;
        assert!(is_canonical(&"IIII".parse().unwrap(), z));
        assert!(!is_canonical(&"ZZZZ".parse().unwrap(), z));
        assert!(is_canonical(&"IIZZ".parse().unwrap(), z));
        assert!(!is_canonical(&"ZZII".parse().unwrap(), z));
        assert!(is_canonical(&"XIII".parse().unwrap(), z));
        assert!(!is_canonical(&"YZZZ".parse().unwrap(), z));
        let count = (0..N_ERRORS).filter(|&e| canonical_index(e, z) == e).count();
        assert_eq!(count, 128);
    }

    #[test]
    fn injected_pauli_lands_on_its_row() {
        for stab in StabilizerType::BOTH {
            for e in ["XIII", "IYII", "ZIIZ", "IXZY"] {
                let pe: PauliString = e.parse().unwrap();
                let choi = build_choi_input(4).unwrap().apply_operator(&pe.matrix(), &[0, 1, 2, 3]).unwrap();
                let s = stab.operator();
                let projector = |sign: f64| {
                    let mut m = s.matrix() * cr(sign);
                    for i in 0..16 {
                        m[(i, i)] += cr(1.0);
                    }
                    m * cr(0.5)
                };
                let branch = [
                    choi.apply_operator(&projector(1.0), &[0, 1, 2, 3]).unwrap(),
                    choi.apply_operator(&projector(-1.0), &[0, 1, 2, 3]).unwrap(),
                ];
                let probs = decompose(&branch, stab).unwrap();
                let canon = canonical_index(pe.index(), stab);
                assert!((probs[canon][0] - 1.0).abs() < 1e-12, "{e} {stab:?}");
            }
        }
    }

    #[test]
    fn depolarizing_on_first_qubit_splits_evenly() {
        // oracle: the channel is (1−p)ρ + p/3 Σ PρP, so each Pauli carries p/3
        let p = 0.03;
        let choi = build_choi_input(4).unwrap().apply_channel(&depolarizing_1q(p).unwrap(), &[0]).unwrap();
        for stab in StabilizerType::BOTH {
            let probs = decompose_unmeasured(&choi, stab).unwrap();
            for e in ["XIII", "YIII", "ZIII"] {
                let idx = canonical_index(e.parse::<PauliString>().unwrap().index(), stab);
                assert!((probs[idx] - p / 3.0).abs() < 1e-9);
            }
            assert!((probs[0] - (1.0 - p)).abs() < 1e-9);
        }
    }

    #[test]
    fn mixture_channel_matches_explicit_channels() {
        use crate::noise::decoherence_channel;
        let mut rho = build_choi_input(4).unwrap();
        rho = rho.apply_operator(&controlled(Pauli::X), &[0, 5]).unwrap();
        let (t_data, t_ref) = (0.7, 1.3);
        let mut want = rho.clone();
        for q in 0..4 {
            want = want.apply_channel(&decoherence_channel(t_data, 2.0, 1.5).unwrap(), &[q]).unwrap();
            want = want.apply_channel(&decoherence_channel(t_ref, 3.0, 1.0).unwrap(), &[q + 4]).unwrap();
        }
        let got = mixed_pauli_channel(
            &rho,
            &[(1.0, decoherence_scalings(t_data, 2.0, 1.5), decoherence_scalings(t_ref, 3.0, 1.0))],
        );
        assert!((got.matrix() - want.matrix()).norm() < 1e-12);
    }

    #[test]
    fn idle_column_limits() {
        let stats = AttemptStats::new(0.1, 1.0, 50.0).unwrap();
        let [s, f] = wt3_idle_column(&CoherenceSet::infinite(), &OperationTimes::default(), 50.0, &stats, StabilizerType::Plaquette).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-15 && (f[0] - 1.0).abs() < 1e-15);
        let c = CoherenceSet::resolve("Set-mix").unwrap();
        let [s, _] = wt3_idle_column(&c, &OperationTimes::default(), 50.0, &stats, StabilizerType::Plaquette).unwrap();
        assert!((s.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let single = |pos: usize| -> f64 {
            (1..4).map(|p| s[p << (2 * (3 - pos))]).sum()
        };
        assert!(single(2) < 0.1 * single(0));
        assert!((single(0) - single(1)).abs() < 1e-15);
    }

    #[test]
    fn noisy_table_roundtrips_through_csv() {
        let ghz = SchemeResult {
            state: DensityMatrix::ghz(3).apply_channel(&crate::noise::depolarizing_1q(0.05).unwrap(), &[1]).unwrap(),
            p_succ: 0.3,
            duration: 2.0,
        };
        let t = build_table(
            Architecture::Wt3,
            &ghz,
            &CircuitNoise::uniform(0.002).unwrap(),
            &OperationTimes::default(),
            &CoherenceSet::resolve("Set-1").unwrap(),
            8.0,
            BTreeMap::new(),
        )
        .unwrap();
        assert!((t.p_ghz() - (1.0 - 0.7f64.powi(4))).abs() < 1e-12);
        let back = table_from_csv(&table_to_csv(&t)).unwrap();
        for (a, b) in t.rows.iter().zip(&back.rows) {
            assert_eq!(a.error, b.error);
            assert!((a.p_plaquette - b.p_plaquette).abs() <= 1e-15 * a.p_plaquette.max(1e-300));
            assert_eq!(a.p_idle.is_some(), b.p_idle.is_some());
        }
        let bad = table_to_csv(&t).replace("schema_version=1", "schema_version=9");
        assert!(matches!(table_from_csv(&bad), Err(Error::Schema(_))));
    }
}
