//! Seeded generation of connected random geometric sensor networks, and the
//! line-oriented topology text format.
//!
//! # Reproducibility
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng`) keyed with the
//! 64-bit seed in little-endian order in the first eight key bytes, the rest
//! zero, stream 0. Draws happen in this order:
//!
//! 1. Placement attempt `k = 1, 2, ...`: for each node `0..N`, draw `x` then
//!    `y`, each as `(next_u64 >> 11) * 2^-53 * area_side`. If the unit-disk
//!    graph is disconnected, the next attempt continues the same stream.
//!    A `center` or `corner` sink placement overwrites node 0's drawn point
//!    before the connectivity check.
//! 2. Duty cycles, node `0..N` (sink included): a partial Fisher-Yates over
//!    `[0, T)`; for `i in 0..alpha`, swap position `i` with
//!    `i + next_u64 % (T - i)`. The first `alpha` entries, sorted, are the
//!    node's active slots.
//!
//! The topology header is `N T alpha m d dI area seed`, followed by a ninth
//! token naming the sink placement only when it is not `random`.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, parse_err, Error, Result};
use crate::model::{DutyCycle, Network, NodeId, Params, Point, SinkPlacement};

/// Placement attempts before generation gives up.
pub const MAX_PLACEMENT_ATTEMPTS: u32 = 200;

/// The generator stream for `seed`.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn unit_f64(rng: &mut impl RngCore) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Draws `count` distinct slots from `[0, period)`, returned sorted.
fn draw_active_slots(rng: &mut impl RngCore, count: u32, period: u32) -> Vec<u32> {
    let mut pool: Vec<u32> = (0..period).collect();
    for i in 0..count as usize {
        let remaining = u64::from(period) - i as u64;
        let j = i + (rng.next_u64() % remaining) as usize;
        pool.swap(i, j);
    }
    let mut slots = pool[..count as usize].to_vec();
    slots.sort_unstable();
    slots
}

/// Unit-disk adjacency (distance `<= range`) via a uniform grid of cell side `range`.
pub fn unit_disk_adjacency(positions: &[Point], range: f64) -> Vec<Vec<NodeId>> {
    let n = positions.len();
    let mut adjacency = vec![Vec::new(); n];
    if n == 0 {
        return adjacency;
    }
    let min_x = positions.iter().map(|p| p.x).fold(f64::INFINITY, f64::min);
    let min_y = positions.iter().map(|p| p.y).fold(f64::INFINITY, f64::min);
    let cell_of = |p: &Point| {
        (
            ((p.x - min_x) / range).floor() as i64,
            ((p.y - min_y) / range).floor() as i64,
        )
    };
    let mut grid: std::collections::HashMap<(i64, i64), Vec<usize>> = Default::default();
    for (i, p) in positions.iter().enumerate() {
        grid.entry(cell_of(p)).or_default().push(i);
    }
    for (u, p) in positions.iter().enumerate() {
        let (cx, cy) = cell_of(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                let Some(bucket) = grid.get(&(cx + dx, cy + dy)) else {
                    continue;
                };
                for &v in bucket {
                    if v != u && p.distance(&positions[v]) <= range {
                        adjacency[u].push(NodeId::from(v));
                    }
                }
            }
        }
        adjacency[u].sort_unstable();
    }
    adjacency
}

fn connected(adjacency: &[Vec<NodeId>]) -> bool {
    let mut seen = vec![false; adjacency.len()];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    let mut reached = 1;
    while let Some(u) = queue.pop_front() {
        for v in &adjacency[u] {
            if !seen[v.index()] {
                seen[v.index()] = true;
                reached += 1;
                queue.push_back(v.index());
            }
        }
    }
    reached == adjacency.len()
}

/// Generates a connected network: uniform placement with rejection of
/// disconnected samples, then `alpha` uniformly chosen active slots per node.
pub fn generate_network(params: &Params) -> Result<Network> {
    params.validate()?;
    if params.node_count < 2 {
        return Err(invalid("generation needs at least 2 nodes"));
    }
    let n = params.node_count;
    let mut rng = seeded_rng(params.rng_seed);
    for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let mut positions: Vec<Point> = (0..n)
            .map(|_| {
                let x = unit_f64(&mut rng) * params.area_side;
                let y = unit_f64(&mut rng) * params.area_side;
                Point { x, y }
            })
            .collect();
        // The sink's draw is still consumed so the other nodes do not move.
        match params.sink_placement {
            SinkPlacement::Random => {}
            SinkPlacement::Center => {
                let c = params.area_side / 2.0;
                positions[0] = Point { x: c, y: c };
            }
            SinkPlacement::Corner => positions[0] = Point { x: 0.0, y: 0.0 },
        }
        let adjacency = unit_disk_adjacency(&positions, params.comm_range);
        if !connected(&adjacency) {
            continue;
        }
        let duty_cycles = (0..n)
            .map(|_| {
                let slots = draw_active_slots(&mut rng, params.active_slot_count, params.period_length);
                DutyCycle::new(slots, params.period_length)
            })
            .collect::<Result<Vec<_>>>()?;
        return Network::from_parts(*params, positions, adjacency, duty_cycles);
    }
    Err(Error::Generation {
        attempts: MAX_PLACEMENT_ATTEMPTS,
        params: *params,
    })
}

/// Combinatorial summary of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkStats {
    pub node_count: usize,
    pub edge_count: usize,
    pub max_degree: usize,
    /// Largest hop distance from the sink.
    pub sink_eccentricity: usize,
}

pub fn network_stats(net: &Network) -> NetworkStats {
    let n = net.node_count();
    let mut dist = vec![usize::MAX; n];
    dist[0] = 0;
    let mut queue = VecDeque::from([NodeId::SINK]);
    while let Some(u) = queue.pop_front() {
        for &v in net.neighbors(u) {
            if dist[v.index()] == usize::MAX {
                dist[v.index()] = dist[u.index()] + 1;
                queue.push_back(v);
            }
        }
    }
    NetworkStats {
        node_count: n,
        edge_count: net.edge_count(),
        max_degree: net.nodes().map(|u| net.neighbors(u).len()).max().unwrap_or(0),
        sink_eccentricity: dist.into_iter().max().unwrap_or(0),
    }
}

/// Serializes a network as
///
/// ```text
/// N T alpha m d dI area seed
/// id x y slot1,slot2,...     (one line per node)
/// u v                        (one line per edge, u < v)
/// ```
///
/// Floats use the shortest representation that parses back to the same value.
pub fn write_topology(net: &Network) -> String {
    let p = net.params();
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{} {} {} {} {} {} {} {}",
        p.node_count,
        p.period_length,
        p.active_slot_count,
        p.channel_count,
        p.comm_range,
        p.interference_range,
        p.area_side,
        p.rng_seed
    );
    if p.sink_placement != SinkPlacement::Random {
        out.pop();
        let _ = writeln!(out, " {}", p.sink_placement);
    }
    for u in net.nodes() {
        let pos = net.position(u);
        let slots: Vec<String> = net.duty_cycle(u).slots().iter().map(u32::to_string).collect();
        let _ = writeln!(out, "{} {} {} {}", u, pos.x, pos.y, slots.join(","));
    }
    for (u, v) in net.edges() {
        let _ = writeln!(out, "{u} {v}");
    }
    out
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("bad {what}: {tok:?}")))
}

/// Parses the format produced by [`write_topology`]. Blank lines and lines
/// starting with `#` are ignored.
pub fn parse_topology(text: &str) -> Result<Network> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hl, header) = lines.next().ok_or_else(|| parse_err(1, "empty topology"))?;
    let mut toks = header.split_whitespace();
    let params = Params {
        node_count: field(toks.next(), hl, "N")?,
        period_length: field(toks.next(), hl, "T")?,
        active_slot_count: field(toks.next(), hl, "alpha")?,
        channel_count: field(toks.next(), hl, "m")?,
        comm_range: field(toks.next(), hl, "d")?,
        interference_range: field(toks.next(), hl, "dI")?,
        area_side: field(toks.next(), hl, "area")?,
        rng_seed: field(toks.next(), hl, "seed")?,
        sink_placement: match toks.next() {
            None => SinkPlacement::Random,
            Some(t) => t.parse().map_err(|e: Error| parse_err(hl, e.to_string()))?,
        },
    };
    if toks.next().is_some() {
        return Err(parse_err(hl, "trailing tokens in header"));
    }
    params.validate().map_err(|e| parse_err(hl, e.to_string()))?;

    let n = params.node_count;
    let mut positions = Vec::with_capacity(n);
    let mut duty_cycles = Vec::with_capacity(n);
    for expected in 0..n {
        let (ln, line) = lines
            .next()
            .ok_or_else(|| parse_err(0, format!("expected {n} node lines, got {expected}")))?;
        let mut toks = line.split_whitespace();
        let id: usize = field(toks.next(), ln, "node id")?;
        if id != expected {
            return Err(parse_err(ln, format!("node lines out of order: {id} != {expected}")));
        }
        let x: f64 = field(toks.next(), ln, "x")?;
        let y: f64 = field(toks.next(), ln, "y")?;
        let slots_tok: String = field(toks.next(), ln, "active slots")?;
        let slots = slots_tok
            .split(',')
            .map(|s| s.parse::<u32>().map_err(|_| parse_err(ln, format!("bad slot {s:?}"))))
            .collect::<Result<Vec<_>>>()?;
        if toks.next().is_some() {
            return Err(parse_err(ln, "trailing tokens in node line"));
        }
        positions.push(Point { x, y });
        duty_cycles.push(DutyCycle::new(slots, params.period_length).map_err(|e| parse_err(ln, e.to_string()))?);
    }

    let mut adjacency = vec![Vec::new(); n];
    for (ln, line) in lines {
        let mut toks = line.split_whitespace();
        let u: usize = field(toks.next(), ln, "edge endpoint")?;
        let v: usize = field(toks.next(), ln, "edge endpoint")?;
        if toks.next().is_some() {
            return Err(parse_err(ln, "trailing tokens in edge line"));
        }
        if u >= n || v >= n {
            return Err(parse_err(ln, format!("edge {u} {v} references unknown node")));
        }
        adjacency[u].push(NodeId::from(v));
        adjacency[v].push(NodeId::from(u));
    }
    Network::from_parts(params, positions, adjacency, duty_cycles)
}
