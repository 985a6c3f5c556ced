//! Round-based multichannel slot assignment over an aggregation tree.
//!
//! Each round takes the current leaves of the remaining tree (optionally
//! only those in the deepest remaining layer), assigns each one a slot and
//! channel with a greedy sweep, then prunes them. Rounds occupy disjoint,
//! increasing slot ranges.
//!
//! Inside a round the sweep visits slots `t_s, t_s + 1, ...`. At slot `t`
//! the unassigned leaves whose parent is awake at `t mod T` are visited
//! deepest first, then by ascending id, and each takes the first channel
//! that keeps the slot conflict-free (half-duplex, one reception per
//! receiver, protocol interference on shared channels).
//!
//! The sweep always terminates: at any slot where at least one candidate's
//! parent is awake, the first candidate visited meets an empty slot and is
//! accepted on channel 0, and every parent wakes at least once per period.
//! So each period assigns at least one pending leaf.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{invalid, parse_err, Error, Result};
use crate::model::{Network, NodeId};
use crate::tree::AggregationTree;

/// One scheduled link use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transmission {
    pub sender: NodeId,
    pub receiver: NodeId,
    /// Absolute slot, counted from 0.
    pub slot: u64,
    pub channel: u32,
}

/// A complete aggregation schedule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Schedule {
    transmissions: Vec<Transmission>,
    delay: u64,
}

impl Schedule {
    /// Wraps arbitrary transmissions; the delay is `1 + max slot` (0 when empty).
    pub fn from_transmissions(mut transmissions: Vec<Transmission>) -> Self {
        transmissions.sort_by_key(|t| (t.slot, t.channel, t.sender));
        let delay = transmissions.iter().map(|t| t.slot + 1).max().unwrap_or(0);
        Schedule { transmissions, delay }
    }

    /// Transmissions ordered by (slot, channel, sender).
    pub fn transmissions(&self) -> &[Transmission] {
        &self.transmissions
    }

    pub fn delay(&self) -> u64 {
        self.delay
    }

    pub fn len(&self) -> usize {
        self.transmissions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.transmissions.is_empty()
    }
}

/// Which childless nodes are eligible in a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CandidatePolicy {
    /// Every current leaf of the remaining tree.
    AllLeaves,
    /// Only the leaves in the deepest remaining layer.
    DeepestLayerOnly,
}

impl FromStr for CandidatePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all-leaves" => Ok(CandidatePolicy::AllLeaves),
            "layered" | "deepest-layer" => Ok(CandidatePolicy::DeepestLayerOnly),
            other => Err(invalid(format!("unknown policy {other:?}"))),
        }
    }
}

/// Summary of one scheduling round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Round {
    pub start_slot: u64,
    pub last_slot: u64,
    /// Nodes scheduled in this round, in candidate order.
    pub nodes: Vec<NodeId>,
}

/// Whether `u -> v` on `channel` can join the transmissions already in a slot.
pub(crate) fn fits(net: &Network, slot_set: &[Transmission], u: NodeId, v: NodeId, channel: u32) -> bool {
    let d_i = net.params().interference_range;
    slot_set.iter().all(|o| {
        if o.sender == v || o.receiver == u || o.sender == u {
            return false;
        }
        if o.receiver == v {
            return false;
        }
        if o.channel == channel && (net.distance(o.sender, v) <= d_i || net.distance(u, o.receiver) <= d_i) {
            return false;
        }
        true
    })
}

fn depths(tree: &AggregationTree) -> Vec<usize> {
    let mut depth = vec![0; tree.node_count()];
    let mut stack = vec![tree.root()];
    while let Some(u) = stack.pop() {
        for &c in tree.children(u) {
            depth[c.index()] = depth[u.index()] + 1;
            stack.push(c);
        }
    }
    depth
}

pub fn schedule(net: &Network, tree: &AggregationTree, policy: CandidatePolicy) -> Schedule {
    schedule_with_rounds(net, tree, policy).0
}

/// Like [`schedule`], also returning the per-round trace.
pub fn schedule_with_rounds(
    net: &Network,
    tree: &AggregationTree,
    policy: CandidatePolicy,
) -> (Schedule, Vec<Round>) {
    assert_eq!(net.node_count(), tree.node_count(), "tree must span the network");
    let n = net.node_count();
    let period = net.params().period_length;
    let channels = net.params().channel_count;
    let depth = depths(tree);
    let parent_of = |u: NodeId| tree.parent(u).expect("non-sink node has a parent");

    let mut pending_children: Vec<usize> = (0..n).map(|u| tree.children(NodeId::from(u)).len()).collect();
    let mut done = vec![false; n];
    done[0] = true;
    let mut remaining = n - 1;
    let mut transmissions = Vec::with_capacity(n.saturating_sub(1));
    let mut rounds = Vec::new();
    let mut start = 0u64;

    while remaining > 0 {
        let mut leaves: Vec<NodeId> = (1..n)
            .filter(|&u| !done[u] && pending_children[u] == 0)
            .map(NodeId::from)
            .collect();
        if policy == CandidatePolicy::DeepestLayerOnly {
            let deepest = (1..n).filter(|&u| !done[u]).map(|u| depth[u]).max().unwrap_or(0);
            leaves.retain(|u| depth[u.index()] == deepest);
        }
        leaves.sort_by_key(|u| (std::cmp::Reverse(depth[u.index()]), *u));

        let mut pending = leaves.clone();
        let mut slot_set: Vec<Transmission> = Vec::new();
        let mut t = start;
        let mut last = start;
        while !pending.is_empty() {
            // Jump to the next slot where some pending leaf's parent is awake.
            t = pending
                .iter()
                .map(|&u| net.duty_cycle(parent_of(u)).next_active(t, period))
                .min()
                .expect("pending is non-empty");
            slot_set.clear();
            pending.retain(|&u| {
                let v = parent_of(u);
                if !net.duty_cycle(v).is_active_at(t, period) {
                    return true;
                }
                match (0..channels).find(|&c| fits(net, &slot_set, u, v, c)) {
                    Some(channel) => {
                        slot_set.push(Transmission { sender: u, receiver: v, slot: t, channel });
                        false
                    }
                    None => true,
                }
            });
            last = t;
            transmissions.extend_from_slice(&slot_set);
            t += 1;
        }

        for &u in &leaves {
            done[u.index()] = true;
            pending_children[parent_of(u).index()] -= 1;
        }
        remaining -= leaves.len();
        rounds.push(Round {
            start_slot: start,
            last_slot: last,
            nodes: leaves,
        });
        start = last + 1;
    }
    (Schedule::from_transmissions(transmissions), rounds)
}

/// `1 + max slot` of a non-empty schedule.
pub fn aggregation_delay(sched: &Schedule) -> Result<u64> {
    sched
        .transmissions()
        .iter()
        .map(|t| t.slot)
        .max()
        .map(|m| m + 1)
        .ok_or_else(|| invalid("empty schedule has no aggregation delay"))
}

/// One line per transmission: `sender receiver slot channel`.
pub fn write_schedule(sched: &Schedule) -> String {
    let mut out = String::new();
    for t in sched.transmissions() {
        let _ = writeln!(out, "{} {} {} {}", t.sender, t.receiver, t.slot, t.channel);
    }
    out
}

pub fn parse_schedule(text: &str) -> Result<Schedule> {
    let mut transmissions = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 4 {
            return Err(parse_err(ln, "expected `sender receiver slot channel`"));
        }
        let num = |s: &str| s.parse::<u64>().map_err(|_| parse_err(ln, format!("bad integer {s:?}")));
        let id = |s: &str| -> Result<NodeId> {
            let v = num(s)?;
            u32::try_from(v).map(NodeId).map_err(|_| parse_err(ln, "node id too large"))
        };
        transmissions.push(Transmission {
            sender: id(toks[0])?,
            receiver: id(toks[1])?,
            slot: num(toks[2])?,
            channel: u32::try_from(num(toks[3])?).map_err(|_| parse_err(ln, "channel too large"))?,
        });
    }
    Ok(Schedule::from_transmissions(transmissions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DutyCycle, Params, Point};
    use crate::tree::{build_ddas_tree, compute_layers};

    fn net(edges: &[(u32, u32)], slots: &[&[u32]], period: u32, channels: u32, pos: &[(f64, f64)]) -> Network {
        let n = slots.len();
        let p = Params {
            node_count: n,
            period_length: period,
            active_slot_count: slots[0].len() as u32,
            channel_count: channels,
            ..Params::default()
        };
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            adj[u as usize].push(NodeId(v));
            adj[v as usize].push(NodeId(u));
        }
        let dcs = slots.iter().map(|s| DutyCycle::new(s.to_vec(), period).unwrap()).collect();
        let pos = pos.iter().map(|&(x, y)| Point { x, y }).collect();
        Network::from_parts(p, pos, adj, dcs).unwrap()
    }

    fn tree_of(net: &Network) -> AggregationTree {
        build_ddas_tree(net, &compute_layers(net))
    }

    #[test]
    fn single_edge_uses_first_receiver_slot() {
        let net = net(&[(0, 1)], &[&[4], &[0]], 10, 1, &[(0.0, 0.0), (5.0, 0.0)]);
        let s = schedule(&net, &tree_of(&net), CandidatePolicy::AllLeaves);
        assert_eq!(
            s.transmissions(),
            &[Transmission { sender: NodeId(1), receiver: NodeId(0), slot: 4, channel: 0 }]
        );
        assert_eq!(s.delay(), 5);
    }

    #[test]
    fn sink_receives_once_per_slot() {
        let net = net(&[(0, 1), (0, 2)], &[&[4], &[0], &[0]], 10, 2, &[(0.0, 0.0), (5.0, 0.0), (0.0, 5.0)]);
        let s = schedule(&net, &tree_of(&net), CandidatePolicy::AllLeaves);
        let slots: Vec<u64> = s.transmissions().iter().map(|t| t.slot).collect();
        assert_eq!(slots, vec![4, 14]);
        assert_eq!(s.transmissions()[0].sender, NodeId(1));
        assert_eq!(s.delay(), 15);
    }

    #[test]
    fn chain_schedules_bottom_up() {
        let net = net(&[(0, 1), (1, 2)], &[&[1], &[0], &[3]], 4, 1, &[(0.0, 0.0), (5.0, 0.0), (10.0, 0.0)]);
        let (s, rounds) = schedule_with_rounds(&net, &tree_of(&net), CandidatePolicy::AllLeaves);
        assert_eq!(
            s.transmissions(),
            &[
                Transmission { sender: NodeId(2), receiver: NodeId(1), slot: 0, channel: 0 },
                Transmission { sender: NodeId(1), receiver: NodeId(0), slot: 1, channel: 0 },
            ]
        );
        assert_eq!(s.delay(), 2);
        assert_eq!(rounds.len(), 2);
        assert_eq!(rounds[1].start_slot, 1);
    }

    #[test]
    fn interference_forces_second_channel() {
        // 1 -> 0 and 3 -> 2 are close together; sink and node 2 both wake at slot 0.
        let net = net(
            &[(0, 1), (0, 2), (2, 3)],
            &[&[0], &[1], &[0], &[1]],
            2,
            2,
            &[(0.0, 0.0), (5.0, 0.0), (10.0, 0.0), (15.0, 0.0)],
        );
        let s = schedule(&net, &tree_of(&net), CandidatePolicy::AllLeaves);
        let first: Vec<_> = s.transmissions().iter().filter(|t| t.slot == 0).collect();
        assert_eq!(first.len(), 2);
        assert_ne!(first[0].channel, first[1].channel);
    }

    #[test]
    fn layered_policy_holds_back_shallow_leaves() {
        let net = net(
            &[(0, 1), (0, 2), (2, 3)],
            &[&[0], &[1], &[0], &[1]],
            2,
            2,
            &[(0.0, 0.0), (50.0, 0.0), (0.0, 10.0), (0.0, 20.0)],
        );
        let tree = tree_of(&net);
        let (_, all) = schedule_with_rounds(&net, &tree, CandidatePolicy::AllLeaves);
        let (_, layered) = schedule_with_rounds(&net, &tree, CandidatePolicy::DeepestLayerOnly);
        assert_eq!(all[0].nodes, vec![NodeId(3), NodeId(1)]);
        assert_eq!(layered[0].nodes, vec![NodeId(3)]);
        assert_eq!(layered[1].nodes, vec![NodeId(1), NodeId(2)]);
    }

    #[test]
    fn delay_of_slots() {
        let tx = |slot| Transmission { sender: NodeId(1), receiver: NodeId(0), slot, channel: 0 };
        assert_eq!(aggregation_delay(&Schedule::from_transmissions(vec![tx(4)])).unwrap(), 5);
        assert_eq!(aggregation_delay(&Schedule::from_transmissions(vec![tx(0), tx(1)])).unwrap(), 2);
        assert!(aggregation_delay(&Schedule::from_transmissions(vec![])).is_err());
    }

    #[test]
    fn schedule_text_round_trip() {
        let s = Schedule::from_transmissions(vec![
            Transmission { sender: NodeId(2), receiver: NodeId(1), slot: 0, channel: 1 },
            Transmission { sender: NodeId(1), receiver: NodeId(0), slot: 7, channel: 0 },
        ]);
        let text = write_schedule(&s);
        assert_eq!(text, "2 1 0 1\n1 0 7 0\n");
        assert_eq!(parse_schedule(&text).unwrap(), s);
        assert!(parse_schedule("1 0 x 0").is_err());
    }

    #[test]
    fn policy_names() {
        assert_eq!("all-leaves".parse::<CandidatePolicy>().unwrap(), CandidatePolicy::AllLeaves);
        assert_eq!("layered".parse::<CandidatePolicy>().unwrap(), CandidatePolicy::DeepestLayerOnly);
        assert!("greedy".parse::<CandidatePolicy>().is_err());
    }
}
