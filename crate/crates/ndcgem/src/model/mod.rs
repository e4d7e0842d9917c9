//! Power and gas network data, loading and validation.

mod curve;
mod network;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use curve::PiecewiseCurve;
pub use network::{compute_ptdf, gas_adjacency, GasAdjacency, PtdfMatrix};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed system file: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("{entity}: {message}")]
    Validation { entity: String, message: String },
    #[error("{entity}: {field} refers to unknown {kind} '{target}'")]
    DanglingReference {
        entity: String,
        field: &'static str,
        kind: &'static str,
        target: String,
    },
    #[error("susceptance matrix is singular (power network disconnected)")]
    SingularSusceptance,
}

fn invalid(entity: impl Into<String>, message: impl Into<String>) -> ModelError {
    ModelError::Validation {
        entity: entity.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bus {
    pub id: String,
    /// MW per hour.
    pub load_profile: Vec<f64>,
    /// $/MWh.
    pub voll: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub id: String,
    pub from_bus: String,
    pub to_bus: String,
    /// p.u.
    pub reactance: f64,
    /// MW.
    pub capacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialState {
    pub on: bool,
    /// Hours the unit has held `on` before the horizon starts.
    pub hours: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Unit {
    pub id: String,
    pub bus: String,
    pub is_gfu: bool,
    pub p_min: f64,
    pub p_max: f64,
    /// MW/h.
    pub ramp: f64,
    pub t_on: u32,
    pub t_off: u32,
    pub startup_cost: f64,
    pub shutdown_cost: f64,
    pub initial_state: InitialState,
    /// $/h against MW, for non-GFUs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_curve: Option<PiecewiseCurve>,
    /// kcf/h against MW, for GFUs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub heat_curve: Option<PiecewiseCurve>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gas_node: Option<String>,
}

impl Unit {
    /// The fuel curve in use: cost for conventional units, heat for GFUs.
    pub fn curve(&self) -> &PiecewiseCurve {
        if self.is_gfu {
            self.heat_curve.as_ref().expect("validated GFU has a heat curve")
        } else {
            self.cost_curve.as_ref().expect("validated unit has a cost curve")
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindFarm {
    pub id: String,
    pub bus: String,
    /// MW.
    pub capacity: f64,
    /// Hourly mean availability as a fraction of capacity. Needed only for
    /// scenario generation.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mean_fraction: Vec<f64>,
    /// Hourly variance of the availability fraction.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub variance_fraction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasNode {
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub id: String,
    pub from_node: String,
    pub to_node: String,
    /// kcf/h per psia.
    pub weymouth_const: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Compressor {
    pub id: String,
    pub from_node: String,
    pub to_node: String,
    pub h_min: f64,
    pub h_max: f64,
    pub k1: f64,
    pub k2: f64,
    pub alpha: f64,
    /// `(a2, a1, a0)` of the gas draw `a2 h^2 + a1 h + a0`.
    pub gas_coeffs: [f64; 3],
    /// Node whose balance carries the gas draw; defaults to `from_node`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tap_node: Option<String>,
}

impl Compressor {
    pub fn tap(&self) -> &str {
        self.tap_node.as_deref().unwrap_or(&self.from_node)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasSupplier {
    pub id: String,
    pub node: String,
    /// kcf/h.
    pub capacity: f64,
    /// $/kcf.
    pub unit_cost: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Priority {
    High,
    Low,
}

impl std::fmt::Display for Priority {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Priority::High => "high",
            Priority::Low => "low",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GasLoad {
    pub id: String,
    pub node: String,
    /// kcf/h per hour.
    pub profile: Vec<f64>,
    pub priority: Priority,
    /// $/kcf.
    pub curtail_cost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EconomicParams {
    pub da_weight: f64,
    pub dev_penalty_pos: f64,
    pub dev_penalty_neg: f64,
    /// `[min, max]` psia per gas node.
    pub pressure_bounds: BTreeMap<String, [f64; 2]>,
}

/// Resolved cross-references, rebuilt by [`JointSystem::validate`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SystemIndex {
    pub slack: usize,
    pub line_ends: Vec<(usize, usize)>,
    pub unit_bus: Vec<usize>,
    pub unit_gas_node: Vec<Option<usize>>,
    pub wind_bus: Vec<usize>,
    pub pipe_ends: Vec<(usize, usize)>,
    pub comp_ends: Vec<(usize, usize)>,
    pub comp_tap: Vec<usize>,
    pub supplier_node: Vec<usize>,
    pub load_node: Vec<usize>,
    /// `[min, max]` psia per gas node, in node order.
    pub pressure: Vec<(f64, f64)>,
    bus_ids: HashMap<String, usize>,
    node_ids: HashMap<String, usize>,
}

impl SystemIndex {
    pub fn bus(&self, id: &str) -> Option<usize> {
        self.bus_ids.get(id).copied()
    }

    pub fn gas_node(&self, id: &str) -> Option<usize> {
        self.node_ids.get(id).copied()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointSystem {
    pub horizon: usize,
    pub slack_bus: String,
    pub buses: Vec<Bus>,
    pub lines: Vec<Line>,
    pub units: Vec<Unit>,
    pub windfarms: Vec<WindFarm>,
    pub gas_nodes: Vec<GasNode>,
    pub pipelines: Vec<Pipeline>,
    pub compressors: Vec<Compressor>,
    pub suppliers: Vec<GasSupplier>,
    pub gas_loads: Vec<GasLoad>,
    pub economics: EconomicParams,
    #[serde(skip)]
    pub index: SystemIndex,
}

/// A validated system with its derived network data.
#[derive(Debug, Clone)]
pub struct Instance {
    pub sys: JointSystem,
    pub ptdf: PtdfMatrix,
    pub gas: GasAdjacency,
}

impl Instance {
    pub fn new(sys: JointSystem) -> Result<Self, ModelError> {
        let ptdf = compute_ptdf(&sys)?;
        let gas = gas_adjacency(&sys);
        Ok(Self { sys, ptdf, gas })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ModelError> {
        Self::new(load_system(path)?)
    }

    pub fn horizon(&self) -> usize {
        self.sys.horizon
    }

    /// Capacity-weighted mean supplier price, used when gas is priced
    /// without the network.
    pub fn mean_gas_price(&self) -> f64 {
        let cap: f64 = self.sys.suppliers.iter().map(|s| s.capacity).sum();
        if cap <= 0.0 {
            return 0.0;
        }
        self.sys
            .suppliers
            .iter()
            .map(|s| s.unit_cost * s.capacity)
            .sum::<f64>()
            / cap
    }

    /// Total gas load per hour, kcf/h.
    pub fn gas_load_total(&self, t: usize) -> f64 {
        self.sys.gas_loads.iter().map(|l| l.profile[t]).sum()
    }
}

/// Reads, parses and validates a system file.
pub fn load_system(path: impl AsRef<Path>) -> Result<JointSystem, ModelError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    JointSystem::from_json(&text)
}

fn unique_ids<'a>(
    kind: &str,
    ids: impl Iterator<Item = &'a String>,
) -> Result<HashMap<String, usize>, ModelError> {
    let mut map = HashMap::new();
    for (i, id) in ids.enumerate() {
        if map.insert(id.clone(), i).is_some() {
            return Err(invalid(format!("{kind} {id}"), "duplicate id"));
        }
    }
    Ok(map)
}

fn resolve(
    map: &HashMap<String, usize>,
    entity: String,
    field: &'static str,
    kind: &'static str,
    target: &str,
) -> Result<usize, ModelError> {
    map.get(target)
        .copied()
        .ok_or_else(|| ModelError::DanglingReference {
            entity,
            field,
            kind,
            target: target.to_string(),
        })
}

fn check_profile(entity: &str, what: &str, p: &[f64], t: usize) -> Result<(), ModelError> {
    if p.len() != t {
        return Err(invalid(
            entity,
            format!("{what} has {} entries, horizon is {t}", p.len()),
        ));
    }
    if p.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(invalid(entity, format!("{what} must be finite and nonnegative")));
    }
    Ok(())
}

fn connected(n: usize, edges: &[(usize, usize)]) -> bool {
    if n == 0 {
        return true;
    }
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    while let Some(u) = stack.pop() {
        for &v in &adj[u] {
            if !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

impl JointSystem {
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let mut sys: JointSystem = serde_json::from_str(text)?;
        sys.validate()?;
        Ok(sys)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("system serializes")
    }

    pub fn num_gfus(&self) -> usize {
        self.units.iter().filter(|u| u.is_gfu).count()
    }

    /// Checks every invariant and rebuilds [`SystemIndex`].
    pub fn validate(&mut self) -> Result<(), ModelError> {
        let t = self.horizon;
        if t == 0 {
            return Err(invalid("system", "horizon must be at least 1"));
        }
        let bus_ids = unique_ids("Bus", self.buses.iter().map(|b| &b.id))?;
        let node_ids = unique_ids("GasNode", self.gas_nodes.iter().map(|n| &n.id))?;
        unique_ids("Line", self.lines.iter().map(|l| &l.id))?;
        unique_ids("Unit", self.units.iter().map(|u| &u.id))?;
        unique_ids("WindFarm", self.windfarms.iter().map(|w| &w.id))?;
        unique_ids("Pipeline", self.pipelines.iter().map(|p| &p.id))?;
        unique_ids("Compressor", self.compressors.iter().map(|c| &c.id))?;
        unique_ids("GasSupplier", self.suppliers.iter().map(|s| &s.id))?;
        unique_ids("GasLoad", self.gas_loads.iter().map(|l| &l.id))?;
        if self.buses.is_empty() {
            return Err(invalid("system", "no buses"));
        }

        let mut ix = SystemIndex {
            slack: resolve(&bus_ids, "system".into(), "slack_bus", "bus", &self.slack_bus)?,
            ..SystemIndex::default()
        };

        for b in &self.buses {
            let e = format!("Bus {}", b.id);
            check_profile(&e, "load_profile", &b.load_profile, t)?;
            if !(b.voll > 0.0) {
                return Err(invalid(e, "voll must be positive"));
            }
        }
        for l in &self.lines {
            let e = format!("Line {}", l.id);
            let f = resolve(&bus_ids, e.clone(), "from_bus", "bus", &l.from_bus)?;
            let to = resolve(&bus_ids, e.clone(), "to_bus", "bus", &l.to_bus)?;
            if f == to {
                return Err(invalid(e, "Line self-loop"));
            }
            if !(l.reactance > 0.0) {
                return Err(invalid(e, "reactance must be positive"));
            }
            if !(l.capacity > 0.0) {
                return Err(invalid(e, "capacity must be positive"));
            }
            ix.line_ends.push((f, to));
        }
        for u in &self.units {
            let e = format!("Unit {}", u.id);
            ix.unit_bus.push(resolve(&bus_ids, e.clone(), "bus", "bus", &u.bus)?);
            if !(0.0 <= u.p_min && u.p_min <= u.p_max) {
                return Err(invalid(e, "requires 0 <= p_min <= p_max"));
            }
            if !(u.ramp > 0.0) {
                return Err(invalid(e, "ramp must be positive"));
            }
            if u.t_on < 1 || u.t_off < 1 {
                return Err(invalid(e, "t_on and t_off must be at least 1"));
            }
            if u.startup_cost < 0.0 || u.shutdown_cost < 0.0 {
                return Err(invalid(e, "startup/shutdown costs must be nonnegative"));
            }
            let curve = match (u.is_gfu, &u.cost_curve, &u.heat_curve) {
                (true, None, Some(c)) | (false, Some(c), None) => c,
                (true, _, _) => {
                    return Err(invalid(e, "a GFU needs heat_curve and no cost_curve"))
                }
                (false, _, _) => {
                    return Err(invalid(e, "a non-GFU needs cost_curve and no heat_curve"))
                }
            };
            curve.validate().map_err(|m| invalid(e.clone(), m))?;
            if curve.x_min() > u.p_min + 1e-9 || curve.x_max() < u.p_max - 1e-9 {
                return Err(invalid(e, "curve does not cover [p_min, p_max]"));
            }
            if u.is_gfu {
                let Some(g) = &u.gas_node else {
                    return Err(invalid(e, "GFU has no gas_node"));
                };
                ix.unit_gas_node
                    .push(Some(resolve(&node_ids, e, "gas_node", "gas node", g)?));
            } else {
                ix.unit_gas_node.push(None);
            }
        }
        for w in &self.windfarms {
            let e = format!("WindFarm {}", w.id);
            ix.wind_bus.push(resolve(&bus_ids, e.clone(), "bus", "bus", &w.bus)?);
            if !(w.capacity > 0.0) {
                return Err(invalid(e, "capacity must be positive"));
            }
            if !w.mean_fraction.is_empty() || !w.variance_fraction.is_empty() {
                check_profile(&e, "mean_fraction", &w.mean_fraction, t)?;
                check_profile(&e, "variance_fraction", &w.variance_fraction, t)?;
            }
        }
        for p in &self.pipelines {
            let e = format!("Pipeline {}", p.id);
            let a = resolve(&node_ids, e.clone(), "from_node", "gas node", &p.from_node)?;
            let b = resolve(&node_ids, e.clone(), "to_node", "gas node", &p.to_node)?;
            if a == b {
                return Err(invalid(e, "Pipeline self-loop"));
            }
            if !(p.weymouth_const > 0.0) {
                return Err(invalid(e, "weymouth_const must be positive"));
            }
            ix.pipe_ends.push((a, b));
        }
        for c in &self.compressors {
            let e = format!("Compressor {}", c.id);
            let a = resolve(&node_ids, e.clone(), "from_node", "gas node", &c.from_node)?;
            let b = resolve(&node_ids, e.clone(), "to_node", "gas node", &c.to_node)?;
            let tap = resolve(&node_ids, e.clone(), "tap_node", "gas node", c.tap())?;
            if a == b {
                return Err(invalid(e, "Compressor self-loop"));
            }
            if !(0.0 <= c.h_min && c.h_min <= c.h_max) {
                return Err(invalid(e, "requires 0 <= h_min <= h_max"));
            }
            if !(c.alpha > 0.0) {
                return Err(invalid(e, "alpha must be positive"));
            }
            let [a2, a1, a0] = c.gas_coeffs;
            let theta = |h: f64| a2 * h * h + a1 * h + a0;
            let mut lo = theta(c.h_min).min(theta(c.h_max));
            if a2 > 0.0 {
                let v = -a1 / (2.0 * a2);
                if v > c.h_min && v < c.h_max {
                    lo = lo.min(theta(v));
                }
            }
            if lo < 0.0 {
                return Err(invalid(e, "gas draw is negative on [h_min, h_max]"));
            }
            ix.comp_ends.push((a, b));
            ix.comp_tap.push(tap);
        }
        for s in &self.suppliers {
            let e = format!("GasSupplier {}", s.id);
            ix.supplier_node
                .push(resolve(&node_ids, e.clone(), "node", "gas node", &s.node)?);
            if !(s.capacity > 0.0) {
                return Err(invalid(e, "capacity must be positive"));
            }
            if !(s.unit_cost >= 0.0) {
                return Err(invalid(e, "unit_cost must be nonnegative"));
            }
        }
        let mut low_max = 0.0f64;
        let mut high_min = f64::INFINITY;
        for l in &self.gas_loads {
            let e = format!("GasLoad {}", l.id);
            ix.load_node
                .push(resolve(&node_ids, e.clone(), "node", "gas node", &l.node)?);
            check_profile(&e, "profile", &l.profile, t)?;
            if !(l.curtail_cost >= 0.0) {
                return Err(invalid(e, "curtail_cost must be nonnegative"));
            }
            match l.priority {
                Priority::Low => low_max = low_max.max(l.curtail_cost),
                Priority::High => high_min = high_min.min(l.curtail_cost),
            }
        }
        if high_min < 10.0 * low_max {
            log::warn!(
                "high-priority curtail cost {high_min} is not well above low-priority {low_max}"
            );
        }

        let ec = &self.economics;
        if !(ec.da_weight > 0.0 && ec.da_weight < 1.0) {
            return Err(invalid("economics", "da_weight must lie in (0, 1)"));
        }
        if ec.da_weight > 0.1 {
            log::warn!("da_weight {} is above 0.1", ec.da_weight);
        }
        if !(ec.dev_penalty_pos >= 0.0) {
            return Err(invalid("economics", "dev_penalty_pos must be nonnegative"));
        }
        let min_cost = self
            .suppliers
            .iter()
            .map(|s| s.unit_cost)
            .fold(f64::INFINITY, f64::min);
        if !(ec.dev_penalty_neg >= 0.0) || ec.dev_penalty_neg > min_cost {
            return Err(invalid(
                "economics",
                "dev_penalty_neg must lie in [0, supplier unit_cost]",
            ));
        }
        let mut seen = HashSet::new();
        for (id, &[lo, hi]) in &ec.pressure_bounds {
            let n = resolve(&node_ids, "economics".into(), "pressure_bounds", "gas node", id)?;
            seen.insert(n);
            if !(0.0 <= lo && lo < hi && hi.is_finite()) {
                return Err(invalid(
                    format!("GasNode {id}"),
                    "pressure bounds must satisfy 0 <= min < max",
                ));
            }
        }
        ix.pressure = self
            .gas_nodes
            .iter()
            .map(|n| {
                ec.pressure_bounds
                    .get(&n.id)
                    .map(|&[a, b]| (a, b))
                    .ok_or_else(|| invalid(format!("GasNode {}", n.id), "missing pressure bounds"))
            })
            .collect::<Result<_, _>>()?;

        if !connected(self.buses.len(), &ix.line_ends) {
            return Err(invalid("system", "power network is not connected"));
        }
        let gas_edges: Vec<_> = ix.pipe_ends.iter().chain(&ix.comp_ends).copied().collect();
        if !connected(self.gas_nodes.len(), &gas_edges) {
            return Err(invalid("system", "gas network is not connected"));
        }
        ix.bus_ids = bus_ids;
        ix.node_ids = node_ids;
        self.index = ix;
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn toy_json() -> String {
        include_str!("../../data/toy-3bus.json").to_string()
    }

    #[test]
    fn loads_toy() {
        let s = JointSystem::from_json(&toy_json()).unwrap();
        assert_eq!(s.buses.len(), 3);
        assert_eq!(s.units.len(), 2);
        assert_eq!(s.windfarms.len(), 1);
        assert_eq!(s.gas_nodes.len(), 3);
    }

    #[test]
    fn round_trip() {
        let s = JointSystem::from_json(&toy_json()).unwrap();
        let again = JointSystem::from_json(&s.to_json()).unwrap();
        assert_eq!(s, again);
    }

    fn edit(f: impl FnOnce(&mut serde_json::Value)) -> Result<JointSystem, ModelError> {
        let mut v: serde_json::Value = serde_json::from_str(&toy_json()).unwrap();
        f(&mut v);
        JointSystem::from_json(&v.to_string())
    }

    #[test]
    fn rejects_self_loop() {
        let err = edit(|v| v["lines"][0]["to_bus"] = v["lines"][0]["from_bus"].clone());
        assert!(err.unwrap_err().to_string().contains("Line self-loop"));
    }

    #[test]
    fn rejects_dangling_gas_node() {
        let err = edit(|v| {
            for u in v["units"].as_array_mut().unwrap() {
                if u["is_gfu"] == true {
                    u["gas_node"] = "nowhere".into();
                }
            }
        });
        assert!(matches!(err, Err(ModelError::DanglingReference { .. })));
    }

    #[test]
    fn rejects_short_profile() {
        let err = edit(|v| {
            v["buses"][0]["load_profile"].as_array_mut().unwrap().pop();
        });
        assert!(matches!(err, Err(ModelError::Validation { .. })));
    }

    #[test]
    fn rejects_malformed_json() {
        assert!(matches!(
            JointSystem::from_json("{\"horizon\": 3"),
            Err(ModelError::Parse(_))
        ));
    }
}
