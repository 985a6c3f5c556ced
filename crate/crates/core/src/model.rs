//! Domain types shared by every module, and the sleep-delay metrics.
//!
//! Time is slotted. A working period has `T` slots numbered `0..T`, and each
//! node wakes to receive in a fixed subset of them (its [`DutyCycle`]); the
//! pattern repeats every period. Senders wake on demand, so only the
//! receiver's duty cycle constrains when a link can be used.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{invalid, Result};

/// Simulation parameters for one network instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub node_count: usize,
    /// Side of the square deployment area, in meters.
    pub area_side: f64,
    /// Communication range `d`, in meters.
    pub comm_range: f64,
    /// Interference range `d_I >= d`, in meters.
    pub interference_range: f64,
    /// Working period length `T`, in slots.
    pub period_length: u32,
    /// Active slots per period (`alpha`).
    pub active_slot_count: u32,
    /// Number of orthogonal channels `m`.
    pub channel_count: u32,
    pub rng_seed: u64,
    pub sink_placement: SinkPlacement,
}

/// Where generation puts the sink. Non-sink nodes are always uniform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SinkPlacement {
    #[default]
    Random,
    /// Middle of the area.
    Center,
    /// The `(0, 0)` corner.
    Corner,
}

impl SinkPlacement {
    pub const ALL: [SinkPlacement; 3] = [SinkPlacement::Random, SinkPlacement::Center, SinkPlacement::Corner];

    pub fn name(self) -> &'static str {
        match self {
            SinkPlacement::Random => "random",
            SinkPlacement::Center => "center",
            SinkPlacement::Corner => "corner",
        }
    }
}

impl fmt::Display for SinkPlacement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for SinkPlacement {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        SinkPlacement::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| invalid(format!("unknown sink placement {s:?} (random, center, corner)")))
    }
}

impl Default for Params {
    /// The 200-node, 100 m x 100 m, d = 20 m setup with `T = 20`, two active
    /// slots and three channels.
    fn default() -> Self {
        Params {
            node_count: 200,
            area_side: 100.0,
            comm_range: 20.0,
            interference_range: 20.0,
            period_length: 20,
            active_slot_count: 2,
            channel_count: 3,
            rng_seed: 42,
            sink_placement: SinkPlacement::Random,
        }
    }
}

impl Params {
    pub fn validate(&self) -> Result<()> {
        if self.node_count == 0 {
            return Err(invalid("node_count must be positive"));
        }
        if !(self.area_side.is_finite() && self.area_side > 0.0) {
            return Err(invalid(format!("area_side must be positive, got {}", self.area_side)));
        }
        if !(self.comm_range.is_finite() && self.comm_range > 0.0) {
            return Err(invalid(format!("comm_range must be positive, got {}", self.comm_range)));
        }
        if !(self.interference_range.is_finite() && self.interference_range >= self.comm_range) {
            return Err(invalid(format!(
                "interference_range ({}) must be >= comm_range ({})",
                self.interference_range, self.comm_range
            )));
        }
        if self.period_length == 0 {
            return Err(invalid("period_length must be positive"));
        }
        if self.active_slot_count == 0 || self.active_slot_count > self.period_length {
            return Err(invalid(format!(
                "active_slot_count ({}) must be in [1, period_length = {}]",
                self.active_slot_count, self.period_length
            )));
        }
        if self.channel_count == 0 {
            return Err(invalid("channel_count must be at least 1"));
        }
        Ok(())
    }

    /// Fraction of the working period a node is awake.
    pub fn duty_cycle(&self) -> f64 {
        f64::from(self.active_slot_count) / f64::from(self.period_length)
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "N={} area={} d={} dI={} T={} alpha={} m={} seed={}",
            self.node_count,
            self.area_side,
            self.comm_range,
            self.interference_range,
            self.period_length,
            self.active_slot_count,
            self.channel_count,
            self.rng_seed
        )?;
        if self.sink_placement != SinkPlacement::Random {
            write!(f, " sink={}", self.sink_placement)?;
        }
        Ok(())
    }
}

/// Index of a node within one [`Network`]. Node 0 is the sink.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

impl NodeId {
    pub const SINK: NodeId = NodeId(0);

    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

    #[inline]
    pub fn is_sink(self) -> bool {
        self.0 == 0
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(u32::try_from(i).expect("node index exceeds u32"))
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Slots of the working period in which a node is awake to receive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DutyCycle {
    slots: Vec<u32>,
}

impl DutyCycle {
    /// Builds a duty cycle; slots are sorted and must be distinct and `< period`.
    pub fn new(mut slots: Vec<u32>, period: u32) -> Result<Self> {
        if slots.is_empty() {
            return Err(invalid("duty cycle has no active slots"));
        }
        slots.sort_unstable();
        if slots.windows(2).any(|w| w[0] == w[1]) {
            return Err(invalid(format!("duplicate active slot in {slots:?}")));
        }
        if let Some(&last) = slots.last() {
            if last >= period {
                return Err(invalid(format!("active slot {last} outside period {period}")));
            }
        }
        Ok(DutyCycle { slots })
    }

    /// Active slots in ascending order.
    pub fn slots(&self) -> &[u32] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// Whether the node is awake at absolute slot `t`.
    #[inline]
    pub fn is_active_at(&self, t: u64, period: u32) -> bool {
        let phase = (t % u64::from(period)) as u32;
        self.slots.binary_search(&phase).is_ok()
    }

    /// First absolute slot `>= t` at which the node is awake.
    pub fn next_active(&self, t: u64, period: u32) -> u64 {
        let period = u64::from(period);
        let base = t - t % period;
        let phase = (t % period) as u32;
        match self.slots.iter().find(|&&s| s >= phase) {
            Some(&s) => base + u64::from(s),
            None => base + period + u64::from(self.slots[0]),
        }
    }
}

/// A point in the deployment plane, in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Connected communication graph with per-node duty cycles.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    params: Params,
    positions: Vec<Point>,
    adjacency: Vec<Vec<NodeId>>,
    duty_cycles: Vec<DutyCycle>,
}

impl Network {
    /// Assembles a network, checking every structural invariant: one
    /// position and duty cycle per node, symmetric loop-free adjacency,
    /// duty cycles of exactly `alpha` slots, and connectivity.
    pub fn from_parts(
        params: Params,
        positions: Vec<Point>,
        mut adjacency: Vec<Vec<NodeId>>,
        duty_cycles: Vec<DutyCycle>,
    ) -> Result<Self> {
        params.validate()?;
        let n = params.node_count;
        if positions.len() != n || adjacency.len() != n || duty_cycles.len() != n {
            return Err(invalid(format!(
                "expected {n} nodes, got {} positions, {} adjacency lists, {} duty cycles",
                positions.len(),
                adjacency.len(),
                duty_cycles.len()
            )));
        }
        for (u, list) in adjacency.iter_mut().enumerate() {
            list.sort_unstable();
            list.dedup();
            if list.iter().any(|v| v.index() >= n) {
                return Err(invalid(format!("node {u} has a neighbor out of range")));
            }
            if list.binary_search(&NodeId::from(u)).is_ok() {
                return Err(invalid(format!("self-loop at node {u}")));
            }
        }
        for (u, list) in adjacency.iter().enumerate() {
            for v in list {
                if adjacency[v.index()].binary_search(&NodeId::from(u)).is_err() {
                    return Err(invalid(format!("edge {u}-{v} is not symmetric")));
                }
            }
        }
        for (u, dc) in duty_cycles.iter().enumerate() {
            if dc.len() != params.active_slot_count as usize {
                return Err(invalid(format!(
                    "node {u} has {} active slots, expected {}",
                    dc.len(),
                    params.active_slot_count
                )));
            }
            if dc.slots().iter().any(|&s| s >= params.period_length) {
                return Err(invalid(format!("node {u} has an active slot outside the period")));
            }
        }
        let net = Network {
            params,
            positions,
            adjacency,
            duty_cycles,
        };
        if !net.is_connected() {
            return Err(invalid("network is not connected"));
        }
        Ok(net)
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count()).map(NodeId::from)
    }

    pub fn position(&self, u: NodeId) -> Point {
        self.positions[u.index()]
    }

    pub fn positions(&self) -> &[Point] {
        &self.positions
    }

    /// Sorted neighbor list of `u`.
    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.adjacency[u.index()]
    }

    pub fn are_adjacent(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u.index()].binary_search(&v).is_ok()
    }

    pub fn duty_cycle(&self, u: NodeId) -> &DutyCycle {
        &self.duty_cycles[u.index()]
    }

    pub fn distance(&self, u: NodeId, v: NodeId) -> f64 {
        self.positions[u.index()].distance(&self.positions[v.index()])
    }

    /// Undirected edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(u, list)| {
            let u = NodeId::from(u);
            list.iter().filter(move |&&v| v > u).map(move |&v| (u, v))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            for v in &self.adjacency[u] {
                if !seen[v.index()] {
                    seen[v.index()] = true;
                    reached += 1;
                    queue.push_back(v.index());
                }
            }
        }
        reached == n
    }
}

/// Number of slots a sender waits between two active-slot indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SleepDelay(pub u32);

impl SleepDelay {
    pub fn slots(self) -> u32 {
        self.0
    }
}

/// Slots from sender slot `tau_u` until receiver slot `tau_v`, wrapping into
/// the next period when `tau_v <= tau_u`. Always in `[1, period]`; equal
/// slots cost a full period.
pub fn sleep_delay(tau_u: u32, tau_v: u32, period: u32) -> Result<SleepDelay> {
    if period == 0 {
        return Err(invalid("period must be positive"));
    }
    if tau_u >= period || tau_v >= period {
        return Err(invalid(format!(
            "slots ({tau_u}, {tau_v}) must be below period {period}"
        )));
    }
    let d = if tau_v > tau_u {
        tau_v - tau_u
    } else {
        tau_v + period - tau_u
    };
    Ok(SleepDelay(d))
}

/// Smallest [`sleep_delay`] over all pairs of sender and receiver active slots.
pub fn min_sleep_delay(sender: &DutyCycle, receiver: &DutyCycle, period: u32) -> Result<SleepDelay> {
    if sender.is_empty() || receiver.is_empty() {
        return Err(invalid("active-slot set is empty"));
    }
    let mut best = SleepDelay(u32::MAX);
    for &tu in sender.slots() {
        for &tv in receiver.slots() {
            best = best.min(sleep_delay(tu, tv, period)?);
        }
    }
    Ok(best)
}
