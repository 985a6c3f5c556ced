//! Exhaustive minimum-delay schedules for tiny instances.
//!
//! Iterative deepening on the delay bound `D`: for `D = 1, 2, ..` a
//! depth-first search assigns `(slot, channel)` to nodes children-first, so
//! every node only considers slots after its children's. A branch is cut
//! when the earliest possible arrival of its data at the sink, following
//! the ancestors' wake-ups, already reaches `D`. Channels at a slot are
//! tried only up to one past the highest channel already in use there,
//! since channels are interchangeable.

use crate::error::{invalid, Result};
use crate::model::{Network, NodeId};
use crate::schedule::{fits, Schedule, Transmission};
use crate::tree::AggregationTree;

pub const MAX_NODES: usize = 8;
pub const MAX_PERIOD: u32 = 6;
pub const MAX_CHANNELS: u32 = 2;

struct Search<'a> {
    net: &'a Network,
    tree: &'a AggregationTree,
    order: Vec<NodeId>,
    bound: u64,
    slot_of: Vec<u64>,
    slots: Vec<Vec<Transmission>>,
}

impl Search<'_> {
    fn parent(&self, u: NodeId) -> NodeId {
        self.tree.parent(u).expect("non-sink node has a parent")
    }

    /// Earliest slot at which data sent by `u` at `slot` can reach the sink.
    fn earliest_arrival(&self, u: NodeId, slot: u64) -> u64 {
        let period = self.net.params().period_length;
        let mut t = slot;
        let mut v = self.parent(u);
        while let Some(p) = self.tree.parent(v) {
            t = self.net.duty_cycle(p).next_active(t + 1, period);
            v = p;
        }
        t
    }

    fn dfs(&mut self, k: usize) -> bool {
        let Some(&u) = self.order.get(k) else {
            return true;
        };
        let period = self.net.params().period_length;
        let channels = self.net.params().channel_count;
        let v = self.parent(u);
        let earliest = self
            .tree
            .children(u)
            .iter()
            .map(|c| self.slot_of[c.index()] + 1)
            .max()
            .unwrap_or(0);
        for slot in earliest..self.bound {
            if !self.net.duty_cycle(v).is_active_at(slot, period) {
                continue;
            }
            if self.earliest_arrival(u, slot) >= self.bound {
                // Later slots only arrive later.
                break;
            }
            let used = self.slots[slot as usize].iter().map(|t| t.channel + 1).max().unwrap_or(0);
            for channel in 0..channels.min(used + 1) {
                if !fits(self.net, &self.slots[slot as usize], u, v, channel) {
                    continue;
                }
                self.slots[slot as usize].push(Transmission { sender: u, receiver: v, slot, channel });
                self.slot_of[u.index()] = slot;
                if self.dfs(k + 1) {
                    return true;
                }
                self.slots[slot as usize].pop();
            }
        }
        false
    }
}

/// Minimum-delay valid schedule with every slot below `horizon`, or `None`
/// when no valid schedule fits. Limited to `N <= 8`, `T <= 6`, `m <= 2`,
/// `horizon <= 3T`.
pub fn brute_force_optimal(net: &Network, tree: &AggregationTree, horizon: u64) -> Result<Option<Schedule>> {
    let p = net.params();
    if net.node_count() > MAX_NODES || p.period_length > MAX_PERIOD || p.channel_count > MAX_CHANNELS {
        return Err(invalid(format!(
            "oracle limited to N <= {MAX_NODES}, T <= {MAX_PERIOD}, m <= {MAX_CHANNELS}; got N={} T={} m={}",
            net.node_count(),
            p.period_length,
            p.channel_count
        )));
    }
    if horizon > 3 * u64::from(p.period_length) {
        return Err(invalid(format!("horizon {horizon} exceeds 3T = {}", 3 * p.period_length)));
    }
    if tree.node_count() != net.node_count() {
        return Err(invalid("tree does not span the network"));
    }
    let n = net.node_count();
    let mut order: Vec<NodeId> = (1..n).map(NodeId::from).collect();
    order.sort_by_key(|&u| (std::cmp::Reverse(tree.depth(u)), u));

    for bound in 1..=horizon {
        let mut search = Search {
            net,
            tree,
            order: order.clone(),
            bound,
            slot_of: vec![0; n],
            slots: vec![Vec::new(); bound as usize],
        };
        if search.dfs(0) {
            let txs = search.slots.into_iter().flatten().collect();
            return Ok(Some(Schedule::from_transmissions(txs)));
        }
    }
    Ok(None)
}
