//! Fusion and distillation trees that turn heralded Bell pairs into GHZ states.
//!
//! Protocol files use a nested-list syntax:
//!
//! ```text
//! ; comment
//! (protocol (k 5) (max-aux 2)
//!   (distill
//!     (fuse B (distill (link A B) (link A B) XX) (distill (link B C) (link B C) XX))
//!     (link A C) ZZ))
//! ```
//!
//! `(fuse M first second)` measures the second child's qubit at module `M`.
//! `(distill target sacrificial OPS)` measures `OPS` on the target, one letter per
//! sacrificial module in sorted label order.
//!
//! Execution is sequential in post-order. A link that is the second child of its parent
//! stays in the communication qubit; every other link is swapped into memory. A
//! communication qubit that is still occupied when its module starts a new link is
//! swapped out first.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::noise::{decohere, depolarizing_1q, depolarizing_2q, CircuitNoise, CoherenceSet, OperationTimes};
use crate::quantum::{controlled, DensityMatrix, Pauli, PauliString, KET_0, KET_1, KET_MINUS, KET_PLUS};
use crate::schemes::SchemeResult;

/// Hard ceiling on auxiliary memory qubits per module.
pub const MAX_AUX_CEILING: usize = 2;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Module(String);

impl Module {
    pub fn new(label: &str) -> Result<Self> {
        if label.is_empty() || !label.chars().all(|c| c.is_ascii_alphanumeric()) {
            return Err(Error::ProtocolSyntax(format!("bad module label {label:?}")));
        }
        Ok(Module(label.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Module {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProtocolNode {
    Link(Module, Module),
    Fuse { at: Module, first: Box<ProtocolNode>, second: Box<ProtocolNode> },
    Distill { target: Box<ProtocolNode>, sacrificial: Box<ProtocolNode>, op: PauliString },
}

impl ProtocolNode {
    pub fn link(a: &str, b: &str) -> Result<Self> {
        Ok(ProtocolNode::Link(Module::new(a)?, Module::new(b)?))
    }

    pub fn fuse(at: &str, first: ProtocolNode, second: ProtocolNode) -> Result<Self> {
        Ok(ProtocolNode::Fuse { at: Module::new(at)?, first: Box::new(first), second: Box::new(second) })
    }

    pub fn distill(target: ProtocolNode, sacrificial: ProtocolNode, op: &str) -> Result<Self> {
        let op = op.parse().map_err(|_| Error::ProtocolSyntax(format!("bad operator {op:?}")))?;
        Ok(ProtocolNode::Distill { target: Box::new(target), sacrificial: Box::new(sacrificial), op })
    }

    /// Sorted module labels of the state this node produces.
    pub fn modules(&self) -> Vec<Module> {
        let mut out = match self {
            ProtocolNode::Link(a, b) => vec![a.clone(), b.clone()],
            ProtocolNode::Fuse { first, second, .. } => {
                let mut m = first.modules();
                m.extend(second.modules());
                m
            }
            ProtocolNode::Distill { target, .. } => target.modules(),
        };
        out.sort();
        out.dedup();
        out
    }

    pub fn link_count(&self) -> usize {
        match self {
            ProtocolNode::Link(..) => 1,
            ProtocolNode::Fuse { first, second, .. } => first.link_count() + second.link_count(),
            ProtocolNode::Distill { target, sacrificial, .. } => target.link_count() + sacrificial.link_count(),
        }
    }

    fn check_structure(&self) -> Result<()> {
        match self {
            ProtocolNode::Link(a, b) if a == b => Err(Error::Protocol(format!("link {a}-{b} joins a module to itself"))),
            ProtocolNode::Link(..) => Ok(()),
            ProtocolNode::Fuse { at, first, second } => {
                first.check_structure()?;
                second.check_structure()?;
                let (ma, mb) = (first.modules(), second.modules());
                let shared: Vec<&Module> = ma.iter().filter(|m| mb.contains(m)).collect();
                if shared != [at] {
                    return Err(Error::Protocol(format!(
                        "fuse at {at}: children must share exactly module {at}, share {shared:?}"
                    )));
                }
                Ok(())
            }
            ProtocolNode::Distill { target, sacrificial, op } => {
                target.check_structure()?;
                sacrificial.check_structure()?;
                let (mt, ms) = (target.modules(), sacrificial.modules());
                if let Some(m) = ms.iter().find(|m| !mt.contains(m)) {
                    return Err(Error::Protocol(format!("distill: sacrificial module {m} not in target {mt:?}")));
                }
                if op.len() != ms.len() || op.ops().contains(&Pauli::I) {
                    return Err(Error::Protocol(format!(
                        "distill: operator {op} must have one non-identity letter per sacrificial module {ms:?}"
                    )));
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for ProtocolNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolNode::Link(a, b) => write!(f, "(link {a} {b})"),
            ProtocolNode::Fuse { at, first, second } => write!(f, "(fuse {at} {first} {second})"),
            ProtocolNode::Distill { target, sacrificial, op } => write!(f, "(distill {target} {sacrificial} {op})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Protocol {
    pub root: ProtocolNode,
    pub k: usize,
    pub max_aux_per_module: usize,
}

/// Memory usage found by a validation pass.
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub k: usize,
    pub peak_memory: BTreeMap<Module, usize>,
}

impl ValidationReport {
    pub fn max_memory(&self) -> usize {
        self.peak_memory.values().copied().max().unwrap_or(0)
    }
}

impl Protocol {
    pub fn new(root: ProtocolNode, max_aux_per_module: usize) -> Self {
        let k = root.link_count();
        Protocol { root, k, max_aux_per_module }
    }

    pub fn modules(&self) -> Vec<Module> {
        self.root.modules()
    }

    pub fn validate(&self) -> Result<ValidationReport> {
        if self.max_aux_per_module > MAX_AUX_CEILING {
            return Err(Error::Protocol(format!(
                "max-aux {} exceeds the ceiling of {MAX_AUX_CEILING}",
                self.max_aux_per_module
            )));
        }
        if self.k != self.root.link_count() {
            return Err(Error::Protocol(format!("declared k={} but tree has {} links", self.k, self.root.link_count())));
        }
        self.root.check_structure()?;
        let mut ex = Executor::dry(self.max_aux_per_module, 1.0, OperationTimes::default());
        ex.run_root(&self.root)?;
        Ok(ValidationReport { k: self.k, peak_memory: ex.peak })
    }

    /// Expected completion time (units of t_link) with geometric link waiting.
    pub fn expected_duration(&self, p_link: f64, times: &OperationTimes) -> Result<f64> {
        if !(p_link > 0.0 && p_link <= 1.0) {
            return Err(Error::Parameter { name: "p_link", reason: format!("{p_link} not in (0,1]") });
        }
        self.validate()?;
        let mut ex = Executor::dry(self.max_aux_per_module, p_link, *times);
        ex.run_root(&self.root)?;
        Ok(ex.clock)
    }

    /// Runs the protocol on density matrices. The returned state is ordered by sorted module label.
    pub fn execute(
        &self,
        bell: &SchemeResult,
        noise: &CircuitNoise,
        times: &OperationTimes,
        coherence: &CoherenceSet,
    ) -> Result<SchemeResult> {
        self.validate()?;
        if bell.state.n_qubits() != 2 {
            return Err(Error::Dimension(format!("Bell input has {} qubits", bell.state.n_qubits())));
        }
        if !(bell.p_succ > 0.0) {
            return Err(Error::Parameter { name: "p_link", reason: "Bell success probability is zero".into() });
        }
        let coherence = coherence.in_link_units();
        let times = coherence.adjust_times(times);
        let mut ex = Executor {
            sim: Some(Simulation { bell: bell.state.clone(), noise: *noise, coherence }),
            ..Executor::dry(self.max_aux_per_module, bell.p_succ, times)
        };
        ex.link_time = times.t_link * bell.duration / bell.p_succ;
        let root = ex.run_root(&self.root)?;
        let state = ex.live[root].take().and_then(|s| s.rho).expect("simulated root");
        Ok(SchemeResult { state: state.normalized()?, p_succ: ex.p_succ, duration: ex.clock })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Location {
    Comm,
    Memory,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Role {
    Root,
    First,
    Second,
}

struct LiveState {
    modules: Vec<Module>,
    loc: Vec<Location>,
    rho: Option<DensityMatrix>,
}

struct Simulation {
    bell: DensityMatrix,
    noise: CircuitNoise,
    coherence: CoherenceSet,
}

struct Executor {
    sim: Option<Simulation>,
    times: OperationTimes,
    link_time: f64,
    max_aux: usize,
    live: Vec<Option<LiveState>>,
    clock: f64,
    peak: BTreeMap<Module, usize>,
    p_succ: f64,
}

impl Executor {
    fn dry(max_aux: usize, p_link: f64, times: OperationTimes) -> Self {
        Executor {
            sim: None,
            link_time: times.t_link / p_link,
            times,
            max_aux,
            live: Vec::new(),
            clock: 0.0,
            peak: BTreeMap::new(),
            p_succ: 1.0,
        }
    }

    fn run_root(&mut self, node: &ProtocolNode) -> Result<usize> {
        self.run(node, Role::Root)
    }

    fn record_memory(&mut self) -> Result<()> {
        let mut count: BTreeMap<Module, usize> = BTreeMap::new();
        for s in self.live.iter().flatten() {
            for (m, l) in s.modules.iter().zip(&s.loc) {
                if *l == Location::Memory {
                    *count.entry(m.clone()).or_default() += 1;
                }
            }
        }
        for (m, c) in count {
            if c > self.max_aux {
                return Err(Error::Protocol(format!(
                    "module {m} needs {c} memory qubits at t={:.3} (max-aux {})",
                    self.clock, self.max_aux
                )));
            }
            let p = self.peak.entry(m).or_default();
            *p = (*p).max(c);
        }
        Ok(())
    }

    /// Advances the clock; qubits in `attempting` modules decohere with link-time parameters.
    fn elapse(&mut self, t: f64, attempting: &[&Module]) -> Result<()> {
        self.clock += t;
        let Some(sim) = &self.sim else { return Ok(()) };
        if t == 0.0 {
            return Ok(());
        }
        let c = &sim.coherence;
        for s in self.live.iter_mut().flatten() {
            let rho = s.rho.as_mut().expect("simulated");
            for (q, m) in s.modules.iter().enumerate() {
                let (t1, t2) = if attempting.contains(&m) { (c.t1_link, c.t2_link) } else { (c.t1_idle, c.t2_idle) };
                *rho = decohere(rho, q, t, t1, t2)?;
            }
        }
        Ok(())
    }

    /// Noisy swap of the given qubits of one state from comm into memory, in parallel.
    fn swap_in(&mut self, id: usize, qubits: &[usize]) -> Result<()> {
        if qubits.is_empty() {
            return Ok(());
        }
        if let Some(sim) = &self.sim {
            // marginal of two-qubit depolarizing on the surviving qubit
            let ch = depolarizing_1q(0.8 * sim.noise.p_g)?;
            let s = self.live[id].as_mut().expect("live");
            let mut rho = s.rho.take().expect("simulated");
            for &q in qubits {
                rho = rho.apply_channel(&ch, &[q])?;
            }
            s.rho = Some(rho);
        }
        let s = self.live[id].as_mut().expect("live");
        for &q in qubits {
            s.loc[q] = Location::Memory;
        }
        let t = self.times.t_swap;
        self.elapse(t, &[])?;
        self.record_memory()
    }

    fn run(&mut self, node: &ProtocolNode, role: Role) -> Result<usize> {
        match node {
            ProtocolNode::Link(a, b) => self.run_link(a, b, role),
            ProtocolNode::Fuse { at, first, second } => {
                let fa = self.run(first, Role::First)?;
                let fb = self.run(second, Role::Second)?;
                self.fuse(at, fa, fb)
            }
            ProtocolNode::Distill { target, sacrificial, op } => {
                let t = self.run(target, Role::First)?;
                let s = self.run(sacrificial, Role::Second)?;
                self.distill(t, s, op)
            }
        }
    }

    fn run_link(&mut self, a: &Module, b: &Module, role: Role) -> Result<usize> {
        for id in 0..self.live.len() {
            let Some(s) = &self.live[id] else { continue };
            let busy: Vec<usize> = (0..s.modules.len())
                .filter(|&q| s.loc[q] == Location::Comm && (&s.modules[q] == a || &s.modules[q] == b))
                .collect();
            self.swap_in(id, &busy)?;
        }
        let wait = self.link_time;
        self.elapse(wait, &[a, b])?;
        let mut modules = vec![a.clone(), b.clone()];
        let rho = match &self.sim {
            Some(sim) if a > b => Some(sim.bell.permute(&[1, 0])?),
            Some(sim) => Some(sim.bell.clone()),
            None => None,
        };
        modules.sort();
        self.live.push(Some(LiveState { modules, loc: vec![Location::Comm; 2], rho }));
        let id = self.live.len() - 1;
        if role != Role::Second {
            self.swap_in(id, &[0, 1])?;
        }
        Ok(id)
    }

    fn fuse(&mut self, at: &Module, fa: usize, fb: usize) -> Result<usize> {
        let t = self.times.t_cx + self.times.t_meas;
        self.elapse(t, &[])?;
        let a = self.live[fa].take().expect("live");
        let b = self.live[fb].take().expect("live");
        let na = a.modules.len();
        let ia = a.modules.iter().position(|m| m == at).expect("checked");
        let ib = b.modules.iter().position(|m| m == at).expect("checked");
        let mut modules = a.modules.clone();
        let mut loc = a.loc.clone();
        let others: Vec<usize> = (0..b.modules.len()).filter(|&q| q != ib).collect();
        for &q in &others {
            modules.push(b.modules[q].clone());
            loc.push(b.loc[q]);
        }
        let rho = match &self.sim {
            None => None,
            Some(sim) => {
                let joint = a.rho.as_ref().expect("sim").kron(b.rho.as_ref().expect("sim"))?;
                let (qa, qb) = (ia, na + ib);
                let joint = joint
                    .apply_operator(&controlled(Pauli::X), &[qa, qb])?
                    .apply_channel(&depolarizing_2q(sim.noise.p_g)?, &[qa, qb])?;
                let corrected: Vec<usize> = others.iter().map(|&q| na + if q > ib { q - 1 } else { q }).collect();
                let mut out = DensityMatrix::zero(joint.n_qubits() - 1);
                for (outcome, ket) in [(0, KET_0), (1, KET_1)] {
                    let branch = joint.project_out(qb, ket)?;
                    let mut flipped = branch.clone();
                    for &q in &corrected {
                        flipped = flipped.apply_operator(&Pauli::X.matrix(), &[q])?;
                    }
                    let (keep, flip) = if outcome == 0 { (&branch, &flipped) } else { (&flipped, &branch) };
                    out.add_scaled(keep, 1.0 - sim.noise.p_m);
                    out.add_scaled(flip, sim.noise.p_m);
                }
                Some(out)
            }
        };
        self.push_sorted(modules, loc, rho)
    }

    fn distill(&mut self, ti: usize, si: usize, op: &PauliString) -> Result<usize> {
        let t = op.ops().iter().map(|&p| self.times.controlled(p)).fold(0.0, f64::max) + self.times.t_meas;
        self.elapse(t, &[])?;
        let sac = self.live[si].take().expect("live");
        let target = self.live[ti].as_mut().expect("live");
        let Some(sim) = &self.sim else {
            return self.record_memory().map(|_| ti);
        };
        let rho_t = target.rho.take().expect("sim");
        let nt = rho_t.n_qubits();
        let mut joint = rho_t.kron(sac.rho.as_ref().expect("sim"))?;
        let depol = depolarizing_2q(sim.noise.p_g)?;
        for (j, (m, &p)) in sac.modules.iter().zip(op.ops()).enumerate() {
            let tq = target.modules.iter().position(|x| x == m).expect("checked");
            joint = joint.apply_operator(&controlled(p), &[nt + j, tq])?.apply_channel(&depol, &[nt + j, tq])?;
        }
        let mut branches = vec![(joint, 0usize)];
        for q in (nt..nt + sac.modules.len()).rev() {
            let mut next = Vec::with_capacity(branches.len() * 2);
            for (rho, parity) in branches {
                next.push((rho.project_out(q, KET_PLUS)?, parity));
                next.push((rho.project_out(q, KET_MINUS)?, parity ^ 1));
            }
            branches = next;
        }
        let s = sac.modules.len() as i32;
        let p_even_flips = 0.5 * (1.0 + (1.0 - 2.0 * sim.noise.p_m).powi(s));
        let mut kept = DensityMatrix::zero(nt);
        for (rho, parity) in &branches {
            kept.add_scaled(rho, if *parity == 0 { p_even_flips } else { 1.0 - p_even_flips });
        }
        let p = kept.trace();
        if !(p > 0.0) {
            return Err(Error::Protocol("distillation never succeeds".into()));
        }
        self.p_succ *= p;
        target.rho = Some(kept.normalized()?);
        self.record_memory()?;
        Ok(ti)
    }

    fn push_sorted(&mut self, modules: Vec<Module>, loc: Vec<Location>, rho: Option<DensityMatrix>) -> Result<usize> {
        let mut order: Vec<usize> = (0..modules.len()).collect();
        order.sort_by(|&x, &y| modules[x].cmp(&modules[y]));
        let rho = match rho {
            Some(r) => Some(r.permute(&order)?),
            None => None,
        };
        let modules = order.iter().map(|&i| modules[i].clone()).collect();
        let loc = order.iter().map(|&i| loc[i]).collect();
        self.live.push(Some(LiveState { modules, loc, rho }));
        self.record_memory()?;
        Ok(self.live.len() - 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

fn tokenize(src: &str) -> Vec<String> {
    let mut out = Vec::new();
    for line in src.lines() {
        let line = line.split(';').next().unwrap_or("");
        let spaced = line.replace('(', " ( ").replace(')', " ) ");
        out.extend(spaced.split_whitespace().map(str::to_string));
    }
    out
}

fn parse_sexp(tokens: &[String], pos: &mut usize) -> Result<Sexp> {
    let tok = tokens.get(*pos).ok_or_else(|| Error::ProtocolSyntax("unexpected end of input".into()))?;
    *pos += 1;
    match tok.as_str() {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(parse_sexp(tokens, pos)?),
                    None => return Err(Error::ProtocolSyntax("unclosed '('".into())),
                }
            }
        }
        ")" => Err(Error::ProtocolSyntax("unexpected ')'".into())),
        atom => Ok(Sexp::Atom(atom.to_string())),
    }
}

fn atom(s: &Sexp) -> Result<&str> {
    match s {
        Sexp::Atom(a) => Ok(a),
        Sexp::List(_) => Err(Error::ProtocolSyntax(format!("expected an atom, got {s:?}"))),
    }
}

fn node_from(s: &Sexp) -> Result<ProtocolNode> {
    let Sexp::List(items) = s else {
        return Err(Error::ProtocolSyntax(format!("expected a node, got {s:?}")));
    };
    let head = items.first().map(atom).transpose()?.unwrap_or("");
    match (head, items.len()) {
        ("link", 3) => ProtocolNode::link(atom(&items[1])?, atom(&items[2])?),
        ("fuse", 4) => ProtocolNode::fuse(atom(&items[1])?, node_from(&items[2])?, node_from(&items[3])?),
        ("distill", 4) => ProtocolNode::distill(node_from(&items[1])?, node_from(&items[2])?, atom(&items[3])?),
        _ => Err(Error::ProtocolSyntax(format!("unknown node form {s:?}"))),
    }
}

fn keyed_count(s: &Sexp, key: &str) -> Result<usize> {
    match s {
        Sexp::List(items) if items.len() == 2 && atom(&items[0])? == key => atom(&items[1])?
            .parse()
            .map_err(|_| Error::ProtocolSyntax(format!("({key} ...) needs a count"))),
        _ => Err(Error::ProtocolSyntax(format!("expected ({key} N)"))),
    }
}

impl FromStr for Protocol {
    type Err = Error;

    /// Parses and validates; declared k and max-aux are checked against the tree.
    fn from_str(src: &str) -> Result<Self> {
        let tokens = tokenize(src);
        let mut pos = 0;
        let sexp = parse_sexp(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::ProtocolSyntax("trailing input after protocol".into()));
        }
        let Sexp::List(items) = &sexp else {
            return Err(Error::ProtocolSyntax("expected (protocol ...)".into()));
        };
        if items.len() != 4 || atom(&items[0])? != "protocol" {
            return Err(Error::ProtocolSyntax("expected (protocol (k N) (max-aux M) node)".into()));
        }
        let protocol = Protocol {
            k: keyed_count(&items[1], "k")?,
            max_aux_per_module: keyed_count(&items[2], "max-aux")?,
            root: node_from(&items[3])?,
        };
        protocol.validate()?;
        Ok(protocol)
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(protocol (k {}) (max-aux {}) {})", self.k, self.max_aux_per_module, self.root)
    }
}

pub fn load_protocol(path: &std::path::Path) -> Result<Protocol> {
    std::fs::read_to_string(path)?.parse()
}
