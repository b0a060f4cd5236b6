//! Feeder data model, feeder-file ingestion and three-phase admittance assembly.
//!
//! Everything downstream of this module works in per-unit on one feeder-wide
//! base: the slack bus line-to-neutral voltage and a per-phase power base.
//! Nodes are (bus, phase) pairs; the slack bus occupies rows 0..3 of every
//! nodal vector and matrix, the remaining buses follow in file order.

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use nalgebra::{DMatrix, Matrix3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, ValidationError};

/// Relative tolerance for the reciprocity (symmetry) check on 3×3 matrices.
const SYMMETRY_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    A,
    B,
    C,
}

impl Phase {
    pub const ALL: [Phase; 3] = [Phase::A, Phase::B, Phase::C];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Phase> {
        Phase::ALL.get(i).copied()
    }

    pub fn letter(self) -> char {
        ['a', 'b', 'c'][self.index()]
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bus {
    pub id: String,
    /// Line-to-neutral base voltage, kV.
    pub base_kv: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub from: String,
    pub to: String,
    /// Series phase impedance matrix, ohms.
    pub z_ohm: Matrix3<Complex64>,
    /// Total shunt admittance, siemens; split half to each end.
    pub y_shunt_s: Option<Matrix3<Complex64>>,
}

/// A wye-connected single-phase constant-power load.
#[derive(Debug, Clone, PartialEq)]
pub struct Load {
    pub id: usize,
    pub bus: String,
    pub phase: Phase,
    pub p_kw: f64,
    pub pf: f64,
    pub lagging: bool,
}

impl Load {
    /// Complex power drawn by the load, kVA (positive real part = consumption).
    pub fn demand_kva(&self) -> Complex64 {
        let q = self.p_kw * (1.0 - self.pf * self.pf).max(0.0).sqrt() / self.pf;
        let q = if self.lagging { q } else { -q };
        Complex64::new(self.p_kw, q)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlackSpec {
    pub bus: String,
    pub v_pu: [Complex64; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkModel {
    pub name: String,
    /// Per-phase power base, kVA.
    pub base_power_kva: f64,
    pub v_plus: f64,
    pub slack: SlackSpec,
    pub buses: Vec<Bus>,
    pub branches: Vec<Branch>,
    pub loads: Vec<Load>,
}

// ---------------------------------------------------------------------------
// File schema

type CPair = [f64; 2];
type CMatrix = [[CPair; 3]; 3];

#[derive(Debug, Serialize, Deserialize)]
struct FeederFile {
    #[serde(default)]
    name: Option<String>,
    #[serde(default = "default_base_power")]
    base_power_kva: f64,
    v_plus_pu: f64,
    slack: SlackFile,
    buses: Vec<BusFile>,
    branches: Vec<BranchFile>,
    loads: Vec<LoadFile>,
}

fn default_base_power() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
struct SlackFile {
    bus: String,
    v_pu: [CPair; 3],
}

#[derive(Debug, Serialize, Deserialize)]
struct BusFile {
    id: String,
    base_kv: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct BranchFile {
    from: String,
    to: String,
    z_ohm: CMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    y_shunt_s: Option<CMatrix>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LoadFile {
    id: usize,
    bus: String,
    phase: Phase,
    #[serde(default = "default_load_kw")]
    p_kw: f64,
    #[serde(default = "default_pf")]
    pf: f64,
    #[serde(default = "default_lagging")]
    lagging: bool,
}

fn default_load_kw() -> f64 {
    0.3
}
fn default_pf() -> f64 {
    0.95
}
fn default_lagging() -> bool {
    true
}

fn cpx(p: CPair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

fn cmatrix(m: &CMatrix) -> Matrix3<Complex64> {
    Matrix3::from_fn(|i, j| cpx(m[i][j]))
}

fn cmatrix_out(m: &Matrix3<Complex64>) -> CMatrix {
    let mut out = [[[0.0; 2]; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = [m[(i, j)].re, m[(i, j)].im];
        }
    }
    out
}

impl From<FeederFile> for NetworkModel {
    fn from(f: FeederFile) -> Self {
        NetworkModel {
            name: f.name.unwrap_or_else(|| "feeder".to_string()),
            base_power_kva: f.base_power_kva,
            v_plus: f.v_plus_pu,
            slack: SlackSpec {
                bus: f.slack.bus,
                v_pu: f.slack.v_pu.map(cpx),
            },
            buses: f
                .buses
                .into_iter()
                .map(|b| Bus {
                    id: b.id,
                    base_kv: b.base_kv,
                })
                .collect(),
            branches: f
                .branches
                .into_iter()
                .map(|b| Branch {
                    from: b.from,
                    to: b.to,
                    z_ohm: cmatrix(&b.z_ohm),
                    y_shunt_s: b.y_shunt_s.as_ref().map(cmatrix),
                })
                .collect(),
            loads: f
                .loads
                .into_iter()
                .map(|l| Load {
                    id: l.id,
                    bus: l.bus,
                    phase: l.phase,
                    p_kw: l.p_kw,
                    pf: l.pf,
                    lagging: l.lagging,
                })
                .collect(),
        }
    }
}

/// Reads and validates a feeder description file.
pub fn load_feeder(path: impl AsRef<Path>) -> Result<NetworkModel> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    NetworkModel::from_json_str(&text)
}

impl NetworkModel {
    /// Parses a feeder description and checks every model invariant.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let file: FeederFile = serde_path_to_error::deserialize(de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            Error::Parse {
                line: inner.line(),
                column: inner.column(),
                field,
                message: inner.to_string(),
            }
        })?;
        let net = NetworkModel::from(file);
        net.validate()?;
        Ok(net)
    }

    /// Serializes back to the feeder file schema.
    pub fn to_json_string(&self) -> String {
        let file = FeederFile {
            name: Some(self.name.clone()),
            base_power_kva: self.base_power_kva,
            v_plus_pu: self.v_plus,
            slack: SlackFile {
                bus: self.slack.bus.clone(),
                v_pu: self.slack.v_pu.map(|v| [v.re, v.im]),
            },
            buses: self
                .buses
                .iter()
                .map(|b| BusFile {
                    id: b.id.clone(),
                    base_kv: b.base_kv,
                })
                .collect(),
            branches: self
                .branches
                .iter()
                .map(|b| BranchFile {
                    from: b.from.clone(),
                    to: b.to.clone(),
                    z_ohm: cmatrix_out(&b.z_ohm),
                    y_shunt_s: b.y_shunt_s.as_ref().map(cmatrix_out),
                })
                .collect(),
            loads: self
                .loads
                .iter()
                .map(|l| LoadFile {
                    id: l.id,
                    bus: l.bus.clone(),
                    phase: l.phase,
                    p_kw: l.p_kw,
                    pf: l.pf,
                    lagging: l.lagging,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("feeder serialization is infallible")
    }

    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn n_loads(&self) -> usize {
        self.loads.len()
    }

    /// Line-to-neutral base voltage of the feeder, kV (taken from the slack bus).
    pub fn base_kv(&self) -> f64 {
        self.buses
            .iter()
            .find(|b| b.id == self.slack.bus)
            .map(|b| b.base_kv)
            .unwrap_or(f64::NAN)
    }

    pub fn impedance_base_ohm(&self) -> f64 {
        let v = self.base_kv() * 1e3;
        v * v / (self.base_power_kva * 1e3)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.buses.is_empty() {
            return Err(ValidationError::NoBuses);
        }
        if !(self.base_power_kva.is_finite() && self.base_power_kva > 0.0) {
            return Err(ValidationError::BadScalar("base_power_kva"));
        }
        if !self.v_plus.is_finite() || self.v_plus <= 0.0 {
            return Err(ValidationError::BadScalar("v_plus_pu"));
        }
        if self.slack.v_pu.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(ValidationError::BadScalar("slack.v_pu"));
        }

        let mut lookup: HashMap<&str, usize> = HashMap::new();
        for (i, b) in self.buses.iter().enumerate() {
            if !(b.base_kv.is_finite() && b.base_kv > 0.0) {
                return Err(ValidationError::BadScalar("base_kv"));
            }
            if lookup.insert(b.id.as_str(), i).is_some() {
                return Err(ValidationError::DuplicateBus(b.id.clone()));
            }
        }
        let slack = *lookup
            .get(self.slack.bus.as_str())
            .ok_or_else(|| ValidationError::UnknownBus {
                what: "slack".into(),
                bus: self.slack.bus.clone(),
            })?;
        let base = self.buses[slack].base_kv;
        for b in &self.buses {
            if (b.base_kv - base).abs() > 1e-9 * base {
                return Err(ValidationError::MixedBaseVoltage {
                    bus: b.id.clone(),
                    expected: base,
                    found: b.base_kv,
                });
            }
        }

        let mut adjacency = vec![Vec::new(); self.buses.len()];
        for (index, br) in self.branches.iter().enumerate() {
            let ends = [&br.from, &br.to].map(|id| {
                lookup
                    .get(id.as_str())
                    .copied()
                    .ok_or_else(|| ValidationError::UnknownBus {
                        what: format!("branch {index}"),
                        bus: id.clone(),
                    })
            });
            let (f, t) = (ends[0].clone()?, ends[1].clone()?);
            if f == t {
                return Err(ValidationError::SelfLoop {
                    index,
                    bus: br.from.clone(),
                });
            }
            if !is_symmetric(&br.z_ohm) {
                return Err(ValidationError::AsymmetricMatrix {
                    index,
                    matrix: "z_ohm",
                });
            }
            if let Some(y) = &br.y_shunt_s {
                if !is_symmetric(y) {
                    return Err(ValidationError::AsymmetricMatrix {
                        index,
                        matrix: "y_shunt_s",
                    });
                }
            }
            adjacency[f].push(t);
            adjacency[t].push(f);
        }

        let mut seen = vec![false; self.buses.len()];
        let mut queue = VecDeque::from([slack]);
        seen[slack] = true;
        while let Some(b) = queue.pop_front() {
            for &n in &adjacency[b] {
                if !seen[n] {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(ValidationError::Disconnected(self.buses[i].id.clone()));
        }

        let mut occupied = HashMap::new();
        for (position, load) in self.loads.iter().enumerate() {
            if load.id != position {
                return Err(ValidationError::LoadIdsNotCanonical {
                    n_loads: self.loads.len(),
                    position,
                    found: load.id,
                });
            }
            let bus = *lookup
                .get(load.bus.as_str())
                .ok_or_else(|| ValidationError::UnknownBus {
                    what: format!("load {}", load.id),
                    bus: load.bus.clone(),
                })?;
            if bus == slack {
                return Err(ValidationError::LoadOnSlack { load: load.id });
            }
            if !(load.pf > 0.0 && load.pf <= 1.0) {
                return Err(ValidationError::PowerFactor {
                    load: load.id,
                    pf: load.pf,
                });
            }
            if !load.p_kw.is_finite() {
                return Err(ValidationError::BadScalar("p_kw"));
            }
            if occupied.insert((bus, load.phase), load.id).is_some() {
                return Err(ValidationError::DuplicateLoadNode {
                    load: load.id,
                    bus: load.bus.clone(),
                    phase: load.phase.letter(),
                });
            }
        }

        let slack_max = self
            .slack
            .v_pu
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if self.v_plus <= slack_max {
            return Err(ValidationError::VPlusTooLow {
                v_plus: self.v_plus,
                slack_max,
            });
        }
        Ok(())
    }

    /// Load-node complex power injections in pu (loads draw, so entries are negative).
    pub fn load_injections_pu(&self, ordering: &NodeOrdering) -> Vec<Complex64> {
        let mut s = vec![Complex64::new(0.0, 0.0); ordering.n_load_nodes()];
        for load in &self.loads {
            let node = ordering
                .load_node(&load.bus, load.phase)
                .expect("validated load bus");
            s[node] -= load.demand_kva() / self.base_power_kva;
        }
        s
    }

    /// Load-node index of every load, in canonical load order.
    pub fn load_nodes(&self, ordering: &NodeOrdering) -> Vec<usize> {
        self.loads
            .iter()
            .map(|l| {
                ordering
                    .load_node(&l.bus, l.phase)
                    .expect("validated load bus")
            })
            .collect()
    }
}

fn is_symmetric(m: &Matrix3<Complex64>) -> bool {
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    (0..3).all(|i| {
        (0..3).all(|j| (m[(i, j)] - m[(j, i)]).norm() <= SYMMETRY_RTOL * scale.max(f64::MIN_POSITIVE))
    })
}

// ---------------------------------------------------------------------------
// Node ordering and admittance

/// Bijection between (bus, phase) pairs and rows of the nodal matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeOrdering {
    buses: Vec<String>,
    position: HashMap<String, usize>,
}

impl NodeOrdering {
    pub fn new(net: &NetworkModel) -> Self {
        let mut buses = vec![net.slack.bus.clone()];
        buses.extend(
            net.buses
                .iter()
                .filter(|b| b.id != net.slack.bus)
                .map(|b| b.id.clone()),
        );
        let position = buses
            .iter()
            .enumerate()
            .map(|(i, b)| (b.clone(), i))
            .collect();
        NodeOrdering { buses, position }
    }

    pub fn n_buses(&self) -> usize {
        self.buses.len()
    }

    pub fn n_nodes(&self) -> usize {
        3 * self.buses.len()
    }

    pub fn n_load_nodes(&self) -> usize {
        3 * (self.buses.len() - 1)
    }

    pub fn row(&self, bus: &str, phase: Phase) -> Option<usize> {
        self.position.get(bus).map(|&b| 3 * b + phase.index())
    }

    /// Index into load-node (non-slack) vectors.
    pub fn load_node(&self, bus: &str, phase: Phase) -> Option<usize> {
        self.row(bus, phase).and_then(|r| r.checked_sub(3))
    }

    pub fn node(&self, row: usize) -> Option<(&str, Phase)> {
        let bus = self.buses.get(row / 3)?;
        Some((bus.as_str(), Phase::from_index(row % 3)?))
    }

    pub fn bus_ids(&self) -> &[String] {
        &self.buses
    }
}

/// The nodal admittance matrix split into slack and load-node blocks.
#[derive(Debug, Clone)]
pub struct PartitionedAdmittance {
    pub y00: DMatrix<Complex64>,
    pub y0l: DMatrix<Complex64>,
    pub yl0: DMatrix<Complex64>,
    pub yll: DMatrix<Complex64>,
    pub ordering: NodeOrdering,
}

impl PartitionedAdmittance {
    pub fn n_load_nodes(&self) -> usize {
        self.yll.nrows()
    }

    /// Reassembles the full 3N×3N matrix.
    pub fn full(&self) -> DMatrix<Complex64> {
        let n = self.ordering.n_nodes();
        let mut y = DMatrix::zeros(n, n);
        y.view_mut((0, 0), (3, 3)).copy_from(&self.y00);
        y.view_mut((0, 3), (3, n - 3)).copy_from(&self.y0l);
        y.view_mut((3, 0), (n - 3, 3)).copy_from(&self.yl0);
        y.view_mut((3, 3), (n - 3, n - 3)).copy_from(&self.yll);
        y
    }
}

/// Builds the per-unit nodal admittance matrix and partitions it with the
/// slack phases first.
pub fn assemble_admittance(net: &NetworkModel) -> Result<PartitionedAdmittance> {
    net.validate()?;
    let ordering = NodeOrdering::new(net);
    let n = ordering.n_nodes();
    let z_base = net.impedance_base_ohm();
    let mut y = DMatrix::<Complex64>::zeros(n, n);

    for (index, br) in net.branches.iter().enumerate() {
        let z_pu = br.z_ohm / Complex64::from(z_base);
        let prim = invert_primitive(&z_pu).ok_or(Error::SingularBranch { index })?;
        let half_shunt = br
            .y_shunt_s
            .map(|ys| ys * Complex64::from(z_base * 0.5))
            .unwrap_or_else(Matrix3::zeros);
        let f = ordering.row(&br.from, Phase::A).expect("validated");
        let t = ordering.row(&br.to, Phase::A).expect("validated");
        for i in 0..3 {
            for j in 0..3 {
                let yij = prim[(i, j)];
                y[(f + i, f + j)] += yij + half_shunt[(i, j)];
                y[(t + i, t + j)] += yij + half_shunt[(i, j)];
                y[(f + i, t + j)] -= yij;
                y[(t + i, f + j)] -= yij;
            }
        }
    }

    Ok(PartitionedAdmittance {
        y00: y.view((0, 0), (3, 3)).into_owned(),
        y0l: y.view((0, 3), (3, n - 3)).into_owned(),
        yl0: y.view((3, 0), (n - 3, 3)).into_owned(),
        yll: y.view((3, 3), (n - 3, n - 3)).into_owned(),
        ordering,
    })
}

/// Inverse of a symmetric 3×3 primitive impedance, symmetrized against
/// round-off. `None` when the matrix is singular.
fn invert_primitive(z: &Matrix3<Complex64>) -> Option<Matrix3<Complex64>> {
    let scale = z.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if scale == 0.0 || !scale.is_finite() {
        return None;
    }
    // Normalize before inverting so the determinant test is scale-free.
    let zn = z / Complex64::from(scale);
    if zn.determinant().norm() < 1e-12 {
        return None;
    }
    let inv = zn.try_inverse()? / Complex64::from(scale);
    Some((inv + inv.transpose()) * Complex64::from(0.5))
}
