//! Dense density matrices, Pauli strings, Kraus channels and measurement operators.
//!
//! Qubit 0 is the most significant bit of a basis index.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

pub const MAX_QUBITS: usize = 12;

const HERMITIAN_TOL: f64 = 1e-10;
const PSD_FLOOR: f64 = -1e-9;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn cr(re: f64) -> C64 {
    C64::new(re, 0.0)
}

fn qubits_of_dim(dim: usize) -> Result<usize> {
    if dim == 0 || !dim.is_power_of_two() {
        return Err(Error::Dimension(format!("{dim} is not a power of two")));
    }
    Ok(dim.trailing_zeros() as usize)
}

fn check_targets(n: usize, targets: &[usize]) -> Result<()> {
    for (i, &t) in targets.iter().enumerate() {
        if t >= n || targets[..i].contains(&t) {
            return Err(Error::Targets(targets.to_vec()));
        }
    }
    Ok(())
}

/// Index offsets of the 2^k sub-basis states spanned by `targets`, first target most significant.
fn target_offsets(n: usize, targets: &[usize]) -> Vec<usize> {
    let k = targets.len();
    (0..1usize << k)
        .map(|j| {
            targets
                .iter()
                .enumerate()
                .map(|(t, &q)| ((j >> (k - 1 - t)) & 1) << (n - 1 - q))
                .sum()
        })
        .collect()
}

fn base_indices(n: usize, targets: &[usize]) -> Vec<usize> {
    let mask: usize = targets.iter().map(|&q| 1usize << (n - 1 - q)).sum();
    (0..1usize << n).filter(|i| i & mask == 0).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n: usize,
    m: CMatrix,
}

impl DensityMatrix {
    /// Checks shape, qubit cap, Hermiticity and trace range. PSD is checked by [`Self::validate`].
    pub fn new(m: CMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Dimension(format!("{}x{} is not square", m.nrows(), m.ncols())));
        }
        let n = qubits_of_dim(m.nrows())?;
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let scale = m.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let herm = (&m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > HERMITIAN_TOL * scale {
            return Err(Error::Dimension(format!("not Hermitian (deviation {herm:e})")));
        }
        let rho = DensityMatrix { n, m };
        let tr = rho.trace();
        if !(-1e-12..=1.0 + 1e-9).contains(&tr) {
            return Err(Error::Normalization(tr));
        }
        Ok(rho)
    }

    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let n = qubits_of_dim(psi.len())?;
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        let v = nalgebra::DVector::from_column_slice(psi);
        Ok(DensityMatrix { n, m: &v * v.adjoint() })
    }

    pub fn basis(n: usize, index: usize) -> Self {
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim, dim);
        m[(index, index)] = cr(1.0);
        DensityMatrix { n, m }
    }

    pub fn maximally_mixed(n: usize) -> Self {
        let dim = 1usize << n;
        DensityMatrix { n, m: CMatrix::identity(dim, dim) * cr(1.0 / dim as f64) }
    }

    pub fn zero(n: usize) -> Self {
        let dim = 1usize << n;
        DensityMatrix { n, m: CMatrix::zeros(dim, dim) }
    }

    /// (|0..0> + |1..1>)/sqrt(2).
    pub fn ghz(n: usize) -> Self {
        let dim = 1usize << n;
        let mut psi = vec![cr(0.0); dim];
        psi[0] = cr(std::f64::consts::FRAC_1_SQRT_2);
        psi[dim - 1] = cr(std::f64::consts::FRAC_1_SQRT_2);
        Self::from_pure(&psi).expect("valid ghz")
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.m
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut CMatrix {
        &mut self.m
    }

    pub fn get(&self, r: usize, c: usize) -> C64 {
        self.m[(r, c)]
    }

    pub fn trace(&self) -> f64 {
        self.m.diagonal().iter().map(|z| z.re).sum()
    }

    pub fn scaled(&self, f: f64) -> Self {
        DensityMatrix { n: self.n, m: &self.m * cr(f) }
    }

    pub fn normalized(&self) -> Result<Self> {
        let tr = self.trace();
        if tr <= 0.0 {
            return Err(Error::Normalization(tr));
        }
        Ok(self.scaled(1.0 / tr))
    }

    pub fn add_assign(&mut self, other: &DensityMatrix) {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        self.m += &other.m;
    }

    pub fn add_scaled(&mut self, other: &DensityMatrix, w: f64) {
        assert_eq!(self.n, other.n, "qubit count mismatch");
        self.m.zip_apply(&other.m, |a, b| *a += b * w);
    }

    pub fn kron(&self, other: &DensityMatrix) -> Result<Self> {
        let n = self.n + other.n;
        if n > MAX_QUBITS {
            return Err(Error::TooManyQubits(n));
        }
        Ok(DensityMatrix { n, m: self.m.kronecker(&other.m) })
    }

    /// ⟨ψ|ρ|ψ⟩ for a (not necessarily normalized) vector.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        assert_eq!(psi.len(), self.dim());
        let mut acc = cr(0.0);
        for (c, &pc) in psi.iter().enumerate() {
            if pc == cr(0.0) {
                continue;
            }
            let col = self.m.column(c);
            let mut s = cr(0.0);
            for (r, &pr) in psi.iter().enumerate() {
                s += pr.conj() * col[r];
            }
            acc += s * pc;
        }
        acc.re
    }

    /// Sparse variant of [`Self::expectation`].
    pub fn expectation_sparse(&self, psi: &[(usize, C64)]) -> f64 {
        let mut acc = cr(0.0);
        for &(r, ar) in psi {
            for &(c, ac) in psi {
                acc += ar.conj() * self.m[(r, c)] * ac;
            }
        }
        acc.re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        self.m.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Full invariant check including the PSD floor.
    pub fn validate(&self) -> Result<()> {
        DensityMatrix::new(self.m.clone())?;
        let min = self.min_eigenvalue();
        if min < PSD_FLOOR {
            return Err(Error::NotPsd(min));
        }
        Ok(())
    }

    /// ρ → A ρ A† with A acting on `targets` (first target = most significant bit of A).
    pub fn apply_operator(&self, a: &CMatrix, targets: &[usize]) -> Result<Self> {
        check_targets(self.n, targets)?;
        let k = targets.len();
        if a.nrows() != 1 << k || a.ncols() != 1 << k {
            return Err(Error::Dimension(format!(
                "operator {}x{} on {} targets",
                a.nrows(),
                a.ncols(),
                k
            )));
        }
        Ok(self.apply_operator_unchecked(a, targets))
    }

    pub(crate) fn apply_operator_unchecked(&self, a: &CMatrix, targets: &[usize]) -> Self {
        let n = self.n;
        let dim = 1usize << n;
        let kd = 1usize << targets.len();
        let off = target_offsets(n, targets);
        let bases = base_indices(n, targets);
        let src = self.m.as_slice();
        let mut tmp = vec![cr(0.0); dim * dim];
        let mut buf = vec![cr(0.0); kd];
        // left multiply: column-major storage, element (r, c) at r + c * dim
        for c in 0..dim {
            let col = &src[c * dim..(c + 1) * dim];
            let out = &mut tmp[c * dim..(c + 1) * dim];
            for &b in &bases {
                for j in 0..kd {
                    buf[j] = col[b + off[j]];
                }
                for i in 0..kd {
                    let mut s = cr(0.0);
                    for j in 0..kd {
                        s += a[(i, j)] * buf[j];
                    }
                    out[b + off[i]] = s;
                }
            }
        }
        // right multiply by A†
        let mut res = vec![cr(0.0); dim * dim];
        for &b in &bases {
            for i in 0..kd {
                let ci = b + off[i];
                for j in 0..kd {
                    let w = a[(i, j)].conj();
                    if w == cr(0.0) {
                        continue;
                    }
                    let cj = b + off[j];
                    let (src_col, dst_col) = (&tmp[cj * dim..(cj + 1) * dim], ci * dim);
                    for r in 0..dim {
                        res[dst_col + r] += src_col[r] * w;
                    }
                }
            }
        }
        DensityMatrix { n, m: CMatrix::from_vec(dim, dim, res) }
    }

    pub fn apply_channel(&self, ch: &KrausChannel, targets: &[usize]) -> Result<Self> {
        check_targets(self.n, targets)?;
        if ch.n_qubits() != targets.len() {
            return Err(Error::Dimension(format!(
                "{}-qubit channel on {} targets",
                ch.n_qubits(),
                targets.len()
            )));
        }
        let mut out = DensityMatrix::zero(self.n);
        for k in &ch.ops {
            out.add_assign(&self.apply_operator_unchecked(k, targets));
        }
        Ok(out)
    }

    /// Returns (E ρ E†, Tr(E ρ E†)).
    pub fn apply_povm_element(&self, e: &CMatrix, targets: &[usize]) -> Result<(Self, f64)> {
        let herm = (e - e.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if herm > 1e-9 {
            return Err(Error::NotPsd(f64::NAN));
        }
        let min = e.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        if min < PSD_FLOOR {
            return Err(Error::NotPsd(min));
        }
        let out = self.apply_operator(e, targets)?;
        let p = out.trace();
        if p < PSD_FLOOR {
            return Err(Error::NegativeProbability(p));
        }
        Ok((out, p.max(0.0)))
    }

    /// Reduced state on `keep` (output qubit order follows ascending qubit index).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<Self> {
        if keep.is_empty() {
            return Err(Error::EmptyKeep);
        }
        check_targets(self.n, keep)?;
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        let traced: Vec<usize> = (0..self.n).filter(|q| !keep.contains(q)).collect();
        let kept_off = target_offsets(self.n, &keep);
        let traced_off = if traced.is_empty() { vec![0] } else { target_offsets(self.n, &traced) };
        let kd = kept_off.len();
        let mut m = CMatrix::zeros(kd, kd);
        for (i, &ri) in kept_off.iter().enumerate() {
            for (j, &cj) in kept_off.iter().enumerate() {
                let mut s = cr(0.0);
                for &t in &traced_off {
                    s += self.m[(ri + t, cj + t)];
                }
                m[(i, j)] = s;
            }
        }
        Ok(DensityMatrix { n: keep.len(), m })
    }

    /// Applies ⟨v| on qubit `q` and removes it: Σ_ab v_a* ρ[(.,a),(.,b)] v_b.
    pub fn project_out(&self, q: usize, v: [C64; 2]) -> Result<Self> {
        check_targets(self.n, &[q])?;
        if self.n == 1 {
            return Err(Error::EmptyKeep);
        }
        let rest: Vec<usize> = (0..self.n).filter(|&x| x != q).collect();
        let off = target_offsets(self.n, &rest);
        let bit = 1usize << (self.n - 1 - q);
        let kd = off.len();
        let mut m = CMatrix::zeros(kd, kd);
        for (j, &cj) in off.iter().enumerate() {
            for (i, &ri) in off.iter().enumerate() {
                let mut s = cr(0.0);
                for a in 0..2 {
                    for b in 0..2 {
                        let w = v[a].conj() * v[b];
                        if w != cr(0.0) {
                            s += w * self.m[(ri + a * bit, cj + b * bit)];
                        }
                    }
                }
                m[(i, j)] = s;
            }
        }
        Ok(DensityMatrix { n: self.n - 1, m })
    }

    /// New qubit `i` is old qubit `order[i]`.
    pub fn permute(&self, order: &[usize]) -> Result<Self> {
        if order.len() != self.n {
            return Err(Error::Targets(order.to_vec()));
        }
        check_targets(self.n, order)?;
        let n = self.n;
        let dim = self.dim();
        let map: Vec<usize> = (0..dim)
            .map(|new| {
                let mut old = 0usize;
                for (i, &o) in order.iter().enumerate() {
                    if (new >> (n - 1 - i)) & 1 == 1 {
                        old |= 1 << (n - 1 - o);
                    }
                }
                old
            })
            .collect();
        let m = CMatrix::from_fn(dim, dim, |r, c| self.m[(map[r], map[c])]);
        Ok(DensityMatrix { n, m })
    }

    /// Hermitian part; removes round-off asymmetry.
    pub fn hermitized(&self) -> Self {
        let m = (&self.m + self.m.adjoint()) * cr(0.5);
        DensityMatrix { n: self.n, m }
    }
}

/// Hermitian square root with negative eigenvalues clamped to zero.
fn psd_sqrt(m: &CMatrix) -> CMatrix {
    let eig = m.clone().symmetric_eigen();
    let vals = eig.eigenvalues.map(|v| cr(v.max(0.0).sqrt()));
    let v = &eig.eigenvectors;
    v * CMatrix::from_diagonal(&vals) * v.adjoint()
}

/// Root fidelity Tr√(√ρ σ √ρ).
pub fn uhlmann_fidelity(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.n != sigma.n {
        return Err(Error::Dimension(format!("{} vs {} qubits", rho.n, sigma.n)));
    }
    let s = psd_sqrt(&rho.m);
    let inner = &s * &sigma.m * &s;
    let inner = (&inner + inner.adjoint()) * cr(0.5);
    let f: f64 = inner.symmetric_eigen().eigenvalues.iter().map(|v| v.max(0.0).sqrt()).sum();
    Ok(f.clamp(0.0, 1.0))
}

/// Squared overlap with the n-qubit GHZ state (|0..0> + |1..1>)/sqrt(2).
pub fn ghz_fidelity(rho: &DensityMatrix) -> f64 {
    let d = rho.dim() - 1;
    0.5 * (rho.get(0, 0).re + rho.get(d, d).re + 2.0 * rho.get(0, d).re)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_bits(x: bool, z: bool) -> Pauli {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn x_bit(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    pub fn z_bit(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn matrix(self) -> CMatrix {
        let (o, l, i) = (cr(0.0), cr(1.0), c(0.0, 1.0));
        match self {
            Pauli::I => CMatrix::from_row_slice(2, 2, &[l, o, o, l]),
            Pauli::X => CMatrix::from_row_slice(2, 2, &[o, l, l, o]),
            Pauli::Y => CMatrix::from_row_slice(2, 2, &[o, -i, i, o]),
            Pauli::Z => CMatrix::from_row_slice(2, 2, &[l, o, o, -l]),
        }
    }

    /// Product ignoring phase.
    pub fn mul(self, other: Pauli) -> Pauli {
        Pauli::from_bits(self.x_bit() ^ other.x_bit(), self.z_bit() ^ other.z_bit())
    }

    pub fn anticommutes(self, other: Pauli) -> bool {
        (self.x_bit() & other.z_bit()) ^ (self.z_bit() & other.x_bit())
    }

    fn symbol(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString(Vec<Pauli>);

impl PauliString {
    pub fn new(ops: Vec<Pauli>) -> Self {
        PauliString(ops)
    }

    pub fn identity(n: usize) -> Self {
        PauliString(vec![Pauli::I; n])
    }

    /// Base-4 digit expansion, first qubit most significant, digits in I,X,Y,Z order.
    pub fn from_index(n: usize, mut index: usize) -> Self {
        let mut ops = vec![Pauli::I; n];
        for q in (0..n).rev() {
            ops[q] = Pauli::ALL[index % 4];
            index /= 4;
        }
        PauliString(ops)
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, p| acc * 4 + p.index())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ops(&self) -> &[Pauli] {
        &self.0
    }

    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&p| p != Pauli::I).count()
    }

    pub fn mul(&self, other: &PauliString) -> PauliString {
        assert_eq!(self.len(), other.len());
        PauliString(self.0.iter().zip(&other.0).map(|(a, b)| a.mul(*b)).collect())
    }

    pub fn anticommutes(&self, other: &PauliString) -> bool {
        self.0.iter().zip(&other.0).filter(|(a, b)| a.anticommutes(**b)).count() % 2 == 1
    }

    /// Bit mask of X components over `n` qubits in basis-index order.
    pub fn x_mask(&self) -> usize {
        let n = self.len();
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| p.x_bit())
            .map(|(q, _)| 1usize << (n - 1 - q))
            .sum()
    }

    pub fn z_mask(&self) -> usize {
        let n = self.len();
        self.0
            .iter()
            .enumerate()
            .filter(|(_, p)| p.z_bit())
            .map(|(q, _)| 1usize << (n - 1 - q))
            .sum()
    }

    /// P|x> = phase · |x ⊕ xmask>; returns (target index, phase).
    pub fn apply_to_basis(&self, x: usize) -> (usize, C64) {
        let n = self.len();
        let mut phase = cr(1.0);
        for (q, p) in self.0.iter().enumerate() {
            let bit = (x >> (n - 1 - q)) & 1;
            phase *= match (p, bit) {
                (Pauli::Z, 1) => cr(-1.0),
                (Pauli::Y, 0) => c(0.0, 1.0),
                (Pauli::Y, 1) => c(0.0, -1.0),
                _ => cr(1.0),
            };
        }
        (x ^ self.x_mask(), phase)
    }

    pub fn matrix(&self) -> CMatrix {
        self.0.iter().skip(1).fold(self.0[0].matrix(), |acc, p| acc.kronecker(&p.matrix()))
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.0 {
            write!(f, "{}", p.symbol())?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|ch| match ch {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(Error::Parameter { name: "pauli", reason: format!("bad symbol {ch:?} in {s:?}") }),
            })
            .collect::<Result<Vec<_>>>()
            .map(PauliString)
    }
}

#[derive(Clone, Debug)]
pub struct KrausChannel {
    ops: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::Dimension("no Kraus operators".into()))?;
        let dim = first.nrows();
        qubits_of_dim(dim)?;
        if ops.iter().any(|k| k.nrows() != dim || k.ncols() != dim) {
            return Err(Error::Dimension("Kraus operators differ in shape".into()));
        }
        let sum = ops.iter().fold(CMatrix::zeros(dim, dim), |acc, k| acc + k.adjoint() * k);
        let dev = (sum - CMatrix::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > 1e-9 {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(KrausChannel { ops })
    }

    /// Mixture Σ w_i P_i ρ P_i for Pauli strings of equal length.
    pub fn pauli_mixture(terms: &[(f64, PauliString)]) -> Result<Self> {
        KrausChannel::new(terms.iter().map(|(w, p)| p.matrix() * cr(w.sqrt())).collect())
    }

    pub fn identity(n: usize) -> Self {
        let d = 1usize << n;
        KrausChannel { ops: vec![CMatrix::identity(d, d)] }
    }

    pub fn ops(&self) -> &[CMatrix] {
        &self.ops
    }

    pub fn n_qubits(&self) -> usize {
        self.ops[0].nrows().trailing_zeros() as usize
    }

    /// Kraus operators of the sequential composition `self` then `next`.
    pub fn then(&self, next: &KrausChannel) -> Result<Self> {
        let mut ops = Vec::with_capacity(self.ops.len() * next.ops.len());
        for b in &next.ops {
            for a in &self.ops {
                ops.push(b * a);
            }
        }
        KrausChannel::new(ops)
    }
}

/// Measurement operators M_i with Σ M_i† M_i = I; outcome i leaves M_i ρ M_i†.
#[derive(Clone, Debug)]
pub struct Povm {
    elements: Vec<CMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<CMatrix>) -> Result<Self> {
        let first = elements.first().ok_or_else(|| Error::Dimension("no elements".into()))?;
        let dim = first.nrows();
        for e in &elements {
            if e.nrows() != dim || e.ncols() != dim {
                return Err(Error::Dimension("elements differ in shape".into()));
            }
            let min = e.clone().symmetric_eigen().eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
            if min < PSD_FLOOR {
                return Err(Error::NotPsd(min));
            }
        }
        let sum = elements.iter().fold(CMatrix::zeros(dim, dim), |acc, e| acc + e.adjoint() * e);
        let dev = (sum - CMatrix::identity(dim, dim)).iter().map(|z| z.norm()).fold(0.0, f64::max);
        if dev > 1e-9 {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Povm { elements })
    }

    pub fn elements(&self) -> &[CMatrix] {
        &self.elements
    }
}

/// Controlled-P with control on the first qubit of the pair.
pub fn controlled(p: Pauli) -> CMatrix {
    let mut m = CMatrix::identity(4, 4);
    let pm = p.matrix();
    for i in 0..2 {
        for j in 0..2 {
            m[(2 + i, 2 + j)] = pm[(i, j)];
        }
    }
    m
}

pub fn hadamard() -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[cr(h), cr(h), cr(h), cr(-h)])
}

pub fn swap() -> CMatrix {
    let mut m = CMatrix::zeros(4, 4);
    m[(0, 0)] = cr(1.0);
    m[(1, 2)] = cr(1.0);
    m[(2, 1)] = cr(1.0);
    m[(3, 3)] = cr(1.0);
    m
}

pub const KET_PLUS: [C64; 2] = [
    C64 { re: std::f64::consts::FRAC_1_SQRT_2, im: 0.0 },
    C64 { re: std::f64::consts::FRAC_1_SQRT_2, im: 0.0 },
];
pub const KET_MINUS: [C64; 2] = [
    C64 { re: std::f64::consts::FRAC_1_SQRT_2, im: 0.0 },
    C64 { re: -std::f64::consts::FRAC_1_SQRT_2, im: 0.0 },
];
pub const KET_0: [C64; 2] = [C64 { re: 1.0, im: 0.0 }, C64 { re: 0.0, im: 0.0 }];
pub const KET_1: [C64; 2] = [C64 { re: 0.0, im: 0.0 }, C64 { re: 1.0, im: 0.0 }];
