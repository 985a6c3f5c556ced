//! Schedule verification, independent of how a schedule was produced.
//!
//! Rules:
//!
//! | rule | constraint |
//! |------|------------|
//! | V1 | exactly one transmission per non-sink node, none by the sink, ids in range |
//! | V2 | receiver is the sender's tree parent |
//! | V3 | receiver is awake: `slot mod T` is one of its active slots |
//! | V4 | a node sends strictly after all of its children |
//! | V5 | no node sends and receives in the same slot |
//! | V6 | a node receives at most one transmission per slot, on any channel |
//! | V7 | channel in `[0, m)`; same-slot, same-channel links `u->v`, `w->x` need `dist(w,v) > d_I` and `dist(u,x) > d_I` |

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::model::{Network, NodeId};
use crate::schedule::{Schedule, Transmission};
use crate::tree::AggregationTree;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Rule {
    OneTransmissionPerNode,
    ReceiverIsParent,
    ReceiverAwake,
    Precedence,
    HalfDuplex,
    SingleReception,
    Interference,
}

impl Rule {
    pub fn code(self) -> &'static str {
        match self {
            Rule::OneTransmissionPerNode => "V1",
            Rule::ReceiverIsParent => "V2",
            Rule::ReceiverAwake => "V3",
            Rule::Precedence => "V4",
            Rule::HalfDuplex => "V5",
            Rule::SingleReception => "V6",
            Rule::Interference => "V7",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub slot: Option<u64>,
    pub nodes: Vec<NodeId>,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rule.code())?;
        if let Some(s) = self.slot {
            write!(f, " slot={s}")?;
        }
        let nodes: Vec<String> = self.nodes.iter().map(|n| n.to_string()).collect();
        write!(f, " nodes=[{}] {}", nodes.join(","), self.detail)
    }
}

fn violation(rule: Rule, slot: Option<u64>, nodes: Vec<NodeId>, detail: impl Into<String>) -> Violation {
    Violation {
        rule,
        slot,
        nodes,
        detail: detail.into(),
    }
}

/// Checks `sched` against every rule; an empty result means the schedule is valid.
pub fn verify_schedule(net: &Network, tree: &AggregationTree, sched: &Schedule) -> Vec<Violation> {
    let n = net.node_count();
    let params = net.params();
    let mut out = Vec::new();

    if tree.node_count() != n {
        out.push(violation(
            Rule::OneTransmissionPerNode,
            None,
            vec![],
            format!("tree has {} nodes, network has {n}", tree.node_count()),
        ));
        return out;
    }

    // Only well-formed transmissions take part in the pairwise checks.
    let mut valid: Vec<&Transmission> = Vec::new();
    let mut sent_at: Vec<Vec<u64>> = vec![Vec::new(); n];
    for t in sched.transmissions() {
        if t.sender.index() >= n || t.receiver.index() >= n {
            out.push(violation(
                Rule::OneTransmissionPerNode,
                Some(t.slot),
                vec![t.sender, t.receiver],
                "node id out of range",
            ));
            continue;
        }
        if t.sender.is_sink() {
            out.push(violation(Rule::OneTransmissionPerNode, Some(t.slot), vec![t.sender], "sink transmits"));
        }
        sent_at[t.sender.index()].push(t.slot);
        if tree.parent(t.sender) != Some(t.receiver) {
            out.push(violation(
                Rule::ReceiverIsParent,
                Some(t.slot),
                vec![t.sender, t.receiver],
                format!("tree parent is {:?}", tree.parent(t.sender).map(|p| p.0)),
            ));
        }
        if !net.duty_cycle(t.receiver).is_active_at(t.slot, params.period_length) {
            out.push(violation(
                Rule::ReceiverAwake,
                Some(t.slot),
                vec![t.sender, t.receiver],
                format!("receiver asleep at phase {}", t.slot % u64::from(params.period_length)),
            ));
        }
        if t.channel >= params.channel_count {
            out.push(violation(
                Rule::Interference,
                Some(t.slot),
                vec![t.sender],
                format!("channel {} outside [0, {})", t.channel, params.channel_count),
            ));
        }
        valid.push(t);
    }

    for (u, sends) in sent_at.iter().enumerate().skip(1) {
        let count = sends.len();
        if count != 1 {
            out.push(violation(
                Rule::OneTransmissionPerNode,
                None,
                vec![NodeId::from(u)],
                format!("node transmits {count} times"),
            ));
        }
    }

    for u in net.nodes() {
        let Some(&own) = sent_at[u.index()].iter().min() else {
            continue;
        };
        for &c in tree.children(u) {
            if let Some(&child) = sent_at[c.index()].iter().max() {
                if child >= own {
                    out.push(violation(
                        Rule::Precedence,
                        Some(own),
                        vec![c, u],
                        format!("child sends at {child}, parent at {own}"),
                    ));
                }
            }
        }
    }

    let mut by_slot: BTreeMap<u64, Vec<&Transmission>> = BTreeMap::new();
    for t in valid {
        by_slot.entry(t.slot).or_default().push(t);
    }
    let d_i = params.interference_range;
    for (&slot, txs) in &by_slot {
        let mut receptions: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
        for t in txs {
            receptions.entry(t.receiver).or_default().push(t.sender);
        }
        let mut senders: Vec<NodeId> = txs.iter().map(|t| t.sender).collect();
        senders.sort_unstable();
        senders.dedup();
        for &s in &senders {
            if receptions.contains_key(&s) {
                out.push(violation(Rule::HalfDuplex, Some(slot), vec![s], "sends and receives"));
            }
        }
        let mut multi: Vec<_> = receptions.iter().filter(|(_, from)| from.len() > 1).collect();
        multi.sort();
        for (&r, from) in multi {
            let mut nodes = vec![r];
            nodes.extend(from.iter().copied());
            out.push(violation(
                Rule::SingleReception,
                Some(slot),
                nodes,
                format!("{} receptions", from.len()),
            ));
        }
        for (i, a) in txs.iter().enumerate() {
            for b in &txs[i + 1..] {
                if a.channel != b.channel || a.sender == b.sender {
                    continue;
                }
                let at_a = net.distance(b.sender, a.receiver);
                let at_b = net.distance(a.sender, b.receiver);
                if at_a <= d_i || at_b <= d_i {
                    out.push(violation(
                        Rule::Interference,
                        Some(slot),
                        vec![a.sender, a.receiver, b.sender, b.receiver],
                        format!("channel {}: distances {at_a:.3} / {at_b:.3} within d_I = {d_i}", a.channel),
                    ));
                }
            }
        }
    }
    out
}
