//! Device topology: QCCD modules split into leveled zones, optical zones
//! joined across modules by fiber links, and plain QCCD grids.
//!
//! Zone levels follow the memory-hierarchy analogy used by the scheduler:
//! level 0 stores ions only, level 1 runs local two-qubit gates, level 2
//! (optical) runs local gates and fiber-mediated gates with other modules.
//! Ions never move between modules.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const STORAGE: u8 = 0;
pub const OPERATION: u8 = 1;
pub const OPTICAL: u8 = 2;

pub const DEFAULT_TRAP_CAPACITY: usize = 16;
pub const DEFAULT_MAX_QUBITS_PER_MODULE: usize = 32;
pub const DEFAULT_HOP_DISTANCE_UM: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZoneId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ModuleId(pub usize);

impl fmt::Display for ZoneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "z{}", self.0)
    }
}

impl fmt::Display for ModuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0)
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum DeviceError {
    #[error("schema error: {0}")]
    Schema(String),
    #[error("capacity error: {0}")]
    Capacity(String),
    #[error("link error: {0}")]
    Link(String),
    #[error("unknown zone {0}")]
    UnknownZone(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeviceMode {
    #[default]
    Eml,
    Grid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberTopology {
    Ring,
    #[default]
    AllToAll,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneSpec {
    pub id: ZoneId,
    pub module: ModuleId,
    pub level: u8,
    pub capacity: usize,
    pub position: usize,
    /// Optical zone with no fiber link (single-module devices).
    pub standalone: bool,
}

impl ZoneSpec {
    pub fn gate_capable(&self) -> bool {
        self.level >= OPERATION
    }

    pub fn is_optical(&self) -> bool {
        self.level == OPTICAL
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiberLink {
    pub a: ZoneId,
    pub b: ZoneId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Module {
    pub id: ModuleId,
    pub zones: Vec<ZoneId>,
    pub adjacency: Vec<(ZoneId, ZoneId)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    pub trap_capacity: usize,
}

/// Validated, immutable device description with precomputed hop distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DeviceTopology {
    pub mode: DeviceMode,
    pub modules: Vec<Module>,
    pub zones: Vec<ZoneSpec>,
    pub links: Vec<FiberLink>,
    pub hop_distance_um: f64,
    pub max_qubits_per_module: usize,
    pub grid: Option<GridSpec>,
    distance: Vec<Vec<Option<u32>>>,
    next_hop: Vec<Vec<Option<ZoneId>>>,
    partners: Vec<Vec<ZoneId>>,
}

// ---------------------------------------------------------------------------
// Config schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceConfig {
    #[serde(default)]
    pub mode: DeviceMode,
    #[serde(default)]
    pub modules: Vec<ModuleConfig>,
    #[serde(default)]
    pub links: Vec<[usize; 2]>,
    #[serde(default = "default_hop")]
    pub hop_distance_um: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_qubits_per_module: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
}

fn default_hop() -> f64 {
    DEFAULT_HOP_DISTANCE_UM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleConfig {
    pub id: usize,
    pub zones: Vec<ZoneConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub adjacency: Option<Vec<[usize; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZoneConfig {
    pub id: usize,
    pub level: u8,
    pub capacity: usize,
    pub position: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub standalone: bool,
}

impl DeviceTopology {
    pub fn from_json(text: &str) -> Result<Self, DeviceError> {
        let config: DeviceConfig =
            serde_json::from_str(text).map_err(|e| DeviceError::Schema(e.to_string()))?;
        load_device(&config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_config()).expect("device config serializes")
    }

    /// Explicit config that loads back into an identical topology.
    pub fn to_config(&self) -> DeviceConfig {
        DeviceConfig {
            mode: self.mode,
            modules: self
                .modules
                .iter()
                .map(|m| ModuleConfig {
                    id: m.id.0,
                    zones: m
                        .zones
                        .iter()
                        .map(|&z| {
                            let spec = self.zone(z);
                            ZoneConfig {
                                id: z.0,
                                level: spec.level,
                                capacity: spec.capacity,
                                position: spec.position,
                                standalone: spec.standalone,
                            }
                        })
                        .collect(),
                    adjacency: Some(m.adjacency.iter().map(|&(a, b)| [a.0, b.0]).collect()),
                })
                .collect(),
            links: self.links.iter().map(|l| [l.a.0, l.b.0]).collect(),
            hop_distance_um: self.hop_distance_um,
            max_qubits_per_module: Some(self.max_qubits_per_module),
            grid: self.grid,
        }
    }

    pub fn zone(&self, id: ZoneId) -> &ZoneSpec {
        &self.zones[id.0]
    }

    pub fn num_zones(&self) -> usize {
        self.zones.len()
    }

    pub fn module(&self, id: ModuleId) -> &Module {
        &self.modules[id.0]
    }

    pub fn module_of(&self, zone: ZoneId) -> ModuleId {
        self.zones[zone.0].module
    }

    pub fn module_capacity(&self, id: ModuleId) -> usize {
        self.module(id)
            .zones
            .iter()
            .map(|&z| self.zone(z).capacity)
            .sum()
    }

    /// Number of logical qubits an initial mapping may place on a module.
    ///
    /// Multi-zone modules keep one slot free so that an eviction always
    /// has somewhere to go.
    pub fn module_load_limit(&self, id: ModuleId) -> usize {
        let m = self.module(id);
        let headroom = usize::from(m.zones.len() > 1);
        self.max_qubits_per_module
            .min(self.module_capacity(id).saturating_sub(headroom))
    }

    pub fn total_load_limit(&self) -> usize {
        self.modules.iter().map(|m| self.module_load_limit(m.id)).sum()
    }

    /// Shortest hop count within a module; `Ok(None)` across modules.
    pub fn zone_distance(&self, a: ZoneId, b: ZoneId) -> Result<Option<u32>, DeviceError> {
        self.check_zone(a)?;
        self.check_zone(b)?;
        Ok(self.distance[a.0][b.0])
    }

    /// Unchecked hop distance for zones known to share a module.
    pub fn hops(&self, a: ZoneId, b: ZoneId) -> u32 {
        self.distance[a.0][b.0]
            .unwrap_or_else(|| panic!("zones {a} and {b} are in different modules"))
    }

    /// Zones visited when moving from `a` to `b`, excluding `a`.
    pub fn path(&self, a: ZoneId, b: ZoneId) -> Option<Vec<ZoneId>> {
        self.distance[a.0][b.0]?;
        let mut out = Vec::new();
        let mut cur = a;
        while cur != b {
            cur = self.next_hop[cur.0][b.0]?;
            out.push(cur);
        }
        Some(out)
    }

    pub fn fiber_partners(&self, zone: ZoneId) -> &[ZoneId] {
        &self.partners[zone.0]
    }

    pub fn linked(&self, a: ZoneId, b: ZoneId) -> bool {
        self.partners[a.0].contains(&b)
    }

    pub fn optical_zones(&self, module: ModuleId) -> impl Iterator<Item = ZoneId> + '_ {
        self.module(module)
            .zones
            .iter()
            .copied()
            .filter(move |&z| self.zone(z).is_optical())
    }

    fn check_zone(&self, z: ZoneId) -> Result<(), DeviceError> {
        if z.0 < self.zones.len() {
            Ok(())
        } else {
            Err(DeviceError::UnknownZone(z.0))
        }
    }
}

/// Validates a config and derives distances and fiber partner tables.
pub fn load_device(config: &DeviceConfig) -> Result<DeviceTopology, DeviceError> {
    if !(config.hop_distance_um > 0.0 && config.hop_distance_um.is_finite()) {
        return Err(DeviceError::Schema("hop_distance_um must be positive".into()));
    }
    let module_configs = match (config.mode, config.modules.is_empty(), config.grid) {
        (DeviceMode::Grid, true, Some(grid)) => vec![grid_module(grid)?],
        (DeviceMode::Grid, true, None) => {
            return Err(DeviceError::Schema("grid mode needs `grid` or explicit modules".into()))
        }
        (_, true, _) => return Err(DeviceError::Schema("device has no modules".into())),
        (_, false, _) => config.modules.clone(),
    };

    // Map config ids onto dense indices in declaration order.
    let mut zone_index = std::collections::HashMap::new();
    let mut module_ids = std::collections::HashSet::new();
    let mut zones = Vec::new();
    let mut modules = Vec::new();
    for (mi, mc) in module_configs.iter().enumerate() {
        if !module_ids.insert(mc.id) {
            return Err(DeviceError::Schema(format!("duplicate module id {}", mc.id)));
        }
        if mc.zones.is_empty() {
            return Err(DeviceError::Schema(format!("module {} has no zones", mc.id)));
        }
        let mut ids = Vec::new();
        for zc in &mc.zones {
            if zc.level > OPTICAL {
                return Err(DeviceError::Schema(format!(
                    "zone {} has level {}; levels are 0, 1, 2",
                    zc.id, zc.level
                )));
            }
            if zc.capacity == 0 {
                return Err(DeviceError::Capacity(format!("zone {} has capacity 0", zc.id)));
            }
            if config.mode == DeviceMode::Grid && zc.level != OPERATION {
                return Err(DeviceError::Schema(format!(
                    "grid-mode zone {} must be level 1",
                    zc.id
                )));
            }
            let id = ZoneId(zones.len());
            if zone_index.insert(zc.id, id).is_some() {
                return Err(DeviceError::Schema(format!("duplicate zone id {}", zc.id)));
            }
            zones.push(ZoneSpec {
                id,
                module: ModuleId(mi),
                level: zc.level,
                capacity: zc.capacity,
                position: zc.position,
                standalone: zc.standalone,
            });
            ids.push(id);
        }
        let adjacency = match &mc.adjacency {
            Some(edges) => edges
                .iter()
                .map(|&[a, b]| {
                    let za = *zone_index
                        .get(&a)
                        .ok_or_else(|| DeviceError::Schema(format!("adjacency names unknown zone {a}")))?;
                    let zb = *zone_index
                        .get(&b)
                        .ok_or_else(|| DeviceError::Schema(format!("adjacency names unknown zone {b}")))?;
                    if zones[za.0].module != ModuleId(mi) || zones[zb.0].module != ModuleId(mi) {
                        return Err(DeviceError::Schema(format!(
                            "adjacency ({a}, {b}) leaves module {}",
                            mc.id
                        )));
                    }
                    if za == zb {
                        return Err(DeviceError::Schema(format!("self-adjacency on zone {a}")));
                    }
                    Ok((za, zb))
                })
                .collect::<Result<Vec<_>, _>>()?,
            None => {
                let mut by_pos = ids.clone();
                by_pos.sort_by_key(|z| (zones[z.0].position, z.0));
                by_pos.windows(2).map(|w| (w[0], w[1])).collect()
            }
        };
        modules.push(Module {
            id: ModuleId(mi),
            zones: ids,
            adjacency,
        });
    }

    let max_qubits_per_module = match config.max_qubits_per_module {
        Some(0) => return Err(DeviceError::Capacity("max_qubits_per_module is 0".into())),
        Some(m) => m,
        None => match config.mode {
            DeviceMode::Eml => DEFAULT_MAX_QUBITS_PER_MODULE,
            DeviceMode::Grid => zones.iter().map(|z| z.capacity).sum(),
        },
    };

    let mut links = Vec::new();
    let mut partners = vec![Vec::new(); zones.len()];
    for &[a, b] in &config.links {
        let lookup = |raw: usize| {
            zone_index
                .get(&raw)
                .copied()
                .ok_or_else(|| DeviceError::Link(format!("fiber endpoint {raw} is not a zone")))
        };
        let (za, zb) = (lookup(a)?, lookup(b)?);
        if !zones[za.0].is_optical() || !zones[zb.0].is_optical() {
            return Err(DeviceError::Link(format!(
                "fiber ({a}, {b}) must join two optical zones"
            )));
        }
        if zones[za.0].module == zones[zb.0].module {
            return Err(DeviceError::Link(format!(
                "fiber ({a}, {b}) joins zones of the same module"
            )));
        }
        if partners[za.0].contains(&zb) {
            return Err(DeviceError::Link(format!("duplicate fiber ({a}, {b})")));
        }
        partners[za.0].push(zb);
        partners[zb.0].push(za);
        links.push(FiberLink { a: za, b: zb });
    }
    for z in &zones {
        if z.is_optical() && partners[z.id.0].is_empty() && !z.standalone {
            return Err(DeviceError::Link(format!(
                "optical zone {} has no fiber and is not flagged standalone",
                z.id.0
            )));
        }
    }

    let (distance, next_hop) = all_pairs(&zones, &modules)?;
    Ok(DeviceTopology {
        mode: config.mode,
        modules,
        zones,
        links,
        hop_distance_um: config.hop_distance_um,
        max_qubits_per_module,
        grid: config.grid,
        distance,
        next_hop,
        partners,
    })
}

type DistanceTables = (Vec<Vec<Option<u32>>>, Vec<Vec<Option<ZoneId>>>);

fn all_pairs(zones: &[ZoneSpec], modules: &[Module]) -> Result<DistanceTables, DeviceError> {
    let z = zones.len();
    let mut adj = vec![Vec::new(); z];
    for m in modules {
        for &(a, b) in &m.adjacency {
            adj[a.0].push(b);
            adj[b.0].push(a);
        }
    }
    for list in &mut adj {
        list.sort();
        list.dedup();
    }
    let mut distance = vec![vec![None; z]; z];
    let mut next_hop = vec![vec![None; z]; z];
    // BFS from each target gives next hops toward it.
    for target in 0..z {
        distance[target][target] = Some(0);
        let mut queue = VecDeque::from([target]);
        while let Some(cur) = queue.pop_front() {
            let d = distance[cur][target].unwrap();
            for &nb in &adj[cur] {
                if distance[nb.0][target].is_none() {
                    distance[nb.0][target] = Some(d + 1);
                    next_hop[nb.0][target] = Some(ZoneId(cur));
                    queue.push_back(nb.0);
                }
            }
        }
    }
    for m in modules {
        let first = m.zones[0];
        if let Some(&cut) = m.zones.iter().find(|&&zz| distance[zz.0][first.0].is_none()) {
            return Err(DeviceError::Schema(format!(
                "module {} is disconnected: zone {} unreachable",
                m.id.0, cut.0
            )));
        }
    }
    Ok((distance, next_hop))
}

fn grid_module(grid: GridSpec) -> Result<ModuleConfig, DeviceError> {
    if grid.rows == 0 || grid.cols == 0 {
        return Err(DeviceError::Schema("grid needs at least one row and column".into()));
    }
    let zones = (0..grid.rows * grid.cols)
        .map(|i| ZoneConfig {
            id: i,
            level: OPERATION,
            capacity: grid.trap_capacity,
            position: i,
            standalone: false,
        })
        .collect();
    let mut adjacency = Vec::new();
    for r in 0..grid.rows {
        for c in 0..grid.cols {
            let i = r * grid.cols + c;
            if c + 1 < grid.cols {
                adjacency.push([i, i + 1]);
            }
            if r + 1 < grid.rows {
                adjacency.push([i, i + grid.cols]);
            }
        }
    }
    Ok(ModuleConfig {
        id: 0,
        zones,
        adjacency: Some(adjacency),
    })
}

/// Plain QCCD grid: one module, every trap gate-capable.
pub fn grid_device(rows: usize, cols: usize, trap_capacity: usize) -> Result<DeviceTopology, DeviceError> {
    load_device(&DeviceConfig {
        mode: DeviceMode::Grid,
        modules: Vec::new(),
        links: Vec::new(),
        hop_distance_um: DEFAULT_HOP_DISTANCE_UM,
        max_qubits_per_module: None,
        grid: Some(GridSpec {
            rows,
            cols,
            trap_capacity,
        }),
    })
}

/// Per-module layout replicated by [`auto_size_device`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModuleTemplate {
    /// `(level, capacity, position)` per zone; adjacency is the path by position.
    pub zones: Vec<(u8, usize, usize)>,
    pub max_qubits_per_module: usize,
    pub hop_distance_um: f64,
    pub fiber: FiberTopology,
}

impl ModuleTemplate {
    /// storage, operation, optical, storage in a line.
    pub fn standard(trap_capacity: usize) -> Self {
        Self::with_optical_zones(1, trap_capacity)
    }

    /// One or two optical zones; the second sits on the far side of the
    /// operation zone: storage, optical, operation, optical, storage.
    pub fn with_optical_zones(optical: usize, trap_capacity: usize) -> Self {
        let levels: Vec<u8> = match optical {
            0 => vec![STORAGE, OPERATION, STORAGE],
            1 => vec![STORAGE, OPERATION, OPTICAL, STORAGE],
            k => {
                let mut v = vec![STORAGE, OPTICAL, OPERATION];
                v.extend(std::iter::repeat_n(OPTICAL, k - 1));
                v.push(STORAGE);
                v
            }
        };
        ModuleTemplate {
            zones: levels
                .into_iter()
                .enumerate()
                .map(|(pos, level)| (level, trap_capacity, pos))
                .collect(),
            max_qubits_per_module: DEFAULT_MAX_QUBITS_PER_MODULE,
            hop_distance_um: DEFAULT_HOP_DISTANCE_UM,
            fiber: FiberTopology::default(),
        }
    }

    pub fn load_limit(&self) -> usize {
        let cap: usize = self.zones.iter().map(|z| z.1).sum();
        let headroom = usize::from(self.zones.len() > 1);
        self.max_qubits_per_module.min(cap.saturating_sub(headroom))
    }
}

impl Default for ModuleTemplate {
    fn default() -> Self {
        Self::standard(DEFAULT_TRAP_CAPACITY)
    }
}

/// Instantiates enough template modules for `num_qubits` and wires their
/// optical zones with fibers.
pub fn auto_size_device(num_qubits: usize, template: &ModuleTemplate) -> Result<DeviceTopology, DeviceError> {
    let per_module = template.load_limit();
    if per_module == 0 {
        return Err(DeviceError::Capacity("template holds no qubits".into()));
    }
    let count = num_qubits.max(1).div_ceil(per_module);
    let zones_per_module = template.zones.len();
    let optical_slots: Vec<usize> = template
        .zones
        .iter()
        .enumerate()
        .filter(|(_, z)| z.0 == OPTICAL)
        .map(|(i, _)| i)
        .collect();

    let modules = (0..count)
        .map(|m| ModuleConfig {
            id: m,
            zones: template
                .zones
                .iter()
                .enumerate()
                .map(|(i, &(level, capacity, position))| ZoneConfig {
                    id: m * zones_per_module + i,
                    level,
                    capacity,
                    position,
                    standalone: level == OPTICAL && count == 1,
                })
                .collect(),
            adjacency: None,
        })
        .collect();

    let mut links = Vec::new();
    for &slot in &optical_slots {
        let zone = |m: usize| m * zones_per_module + slot;
        match template.fiber {
            FiberTopology::AllToAll => {
                for a in 0..count {
                    for b in a + 1..count {
                        links.push([zone(a), zone(b)]);
                    }
                }
            }
            FiberTopology::Ring => {
                if count == 2 {
                    links.push([zone(0), zone(1)]);
                } else if count > 2 {
                    for a in 0..count {
                        links.push([zone(a), zone((a + 1) % count)]);
                    }
                }
            }
        }
    }

    load_device(&DeviceConfig {
        mode: DeviceMode::Eml,
        modules,
        links,
        hop_distance_um: template.hop_distance_um,
        max_qubits_per_module: Some(template.max_qubits_per_module),
        grid: None,
    })
}
