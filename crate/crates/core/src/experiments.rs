//! Parameter sweeps comparing the three schemes on paired random topologies.
//!
//! For each sweep value and trial index one topology is generated, with
//! seed [`trial_seed`]`(base seed, value, trial)`, and every scheme runs on
//! that same topology. For a channel-count sweep the value passed to
//! [`trial_seed`] is 0, so every channel count sees the same topologies:
//!
//! | scheme  | tree              | candidate policy      |
//! |---------|-------------------|-----------------------|
//! | DDAS    | sleep-delay tree  | all leaves            |
//! | SPT-DAS | shortest-path tree| all leaves            |
//! | NDAS    | sleep-delay tree  | deepest layer only    |
//!
//! Every schedule is verified before its delay is recorded; a violation
//! aborts the sweep.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use crate::error::{invalid, parse_err, Error, Result};
use crate::model::Params;
use crate::netgen::generate_network;
use crate::par::{map_ordered, Execution};
use crate::schedule::{schedule, CandidatePolicy};
use crate::tree::{build_ddas_tree, build_spt_tree, compute_layers};
use crate::verify::verify_schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    Ddas,
    SptDas,
    Ndas,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Ddas, Scheme::SptDas, Scheme::Ndas];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Ddas => "DDAS",
            Scheme::SptDas => "SPT-DAS",
            Scheme::Ndas => "NDAS",
        }
    }

    pub fn policy(self) -> CandidatePolicy {
        match self {
            Scheme::Ddas | Scheme::SptDas => CandidatePolicy::AllLeaves,
            Scheme::Ndas => CandidatePolicy::DeepestLayerOnly,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "DDAS" => Ok(Scheme::Ddas),
            "SPT-DAS" | "SPT" | "SPTDAS" => Ok(Scheme::SptDas),
            "NDAS" => Ok(Scheme::Ndas),
            other => Err(invalid(format!("unknown scheme {other:?}"))),
        }
    }
}

/// The parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepField {
    ActiveSlotCount,
    PeriodLength,
    NodeCount,
    ChannelCount,
}

impl SweepField {
    pub fn name(self) -> &'static str {
        match self {
            SweepField::ActiveSlotCount => "active_slot_count",
            SweepField::PeriodLength => "period_length",
            SweepField::NodeCount => "node_count",
            SweepField::ChannelCount => "channel_count",
        }
    }

    /// Whether the field changes generated topologies. Channel count does
    /// not, so a channel sweep reuses one topology list for every value.
    pub fn affects_topology(self) -> bool {
        self != SweepField::ChannelCount
    }

    /// `base` with this field set to `value`.
    pub fn apply(self, base: &Params, value: u64) -> Result<Params> {
        let narrow = |v: u64| u32::try_from(v).map_err(|_| invalid(format!("sweep value {v} too large")));
        let mut p = *base;
        match self {
            SweepField::ActiveSlotCount => p.active_slot_count = narrow(value)?,
            SweepField::PeriodLength => p.period_length = narrow(value)?,
            SweepField::NodeCount => {
                p.node_count = usize::try_from(value).map_err(|_| invalid("node count too large"))?
            }
            SweepField::ChannelCount => p.channel_count = narrow(value)?,
        }
        Ok(p)
    }
}

impl fmt::Display for SweepField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepField {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "active_slot_count" | "active" | "alpha" => Ok(SweepField::ActiveSlotCount),
            "period_length" | "period" | "T" => Ok(SweepField::PeriodLength),
            "node_count" | "nodes" | "N" => Ok(SweepField::NodeCount),
            "channel_count" | "channels" | "m" => Ok(SweepField::ChannelCount),
            other => Err(invalid(format!("unknown sweep field {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub base: Params,
    pub field: SweepField,
    pub values: Vec<u64>,
    pub trials: usize,
    pub schemes: Vec<Scheme>,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(invalid("sweep has no values"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be positive"));
        }
        if self.schemes.is_empty() {
            return Err(invalid("sweep has no schemes"));
        }
        for &v in &self.values {
            let p = self.field.apply(&self.base, v)?;
            p.validate()
                .map_err(|e| invalid(format!("{}={v}: {e}", self.field)))?;
            if p.node_count < 2 {
                return Err(invalid(format!("{}={v}: need at least 2 nodes", self.field)));
            }
        }
        Ok(())
    }

    /// Parses a flat `key = value` file. Keys: `field`, `values`
    /// (comma-separated), `trials`, `schemes` (comma-separated), and the
    /// parameter keys `nodes area range irange period active channels seed sink`.
    /// Omitted parameters take [`Params::default`]; `irange` defaults to `range`.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut kv: BTreeMap<String, (usize, String)> = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| parse_err(i + 1, "expected key = value"))?;
            if kv.insert(k.trim().to_string(), (i + 1, v.trim().to_string())).is_some() {
                return Err(parse_err(i + 1, format!("duplicate key {:?}", k.trim())));
            }
        }
        fn get<T: FromStr>(kv: &mut BTreeMap<String, (usize, String)>, key: &str) -> Result<Option<T>> {
            match kv.remove(key) {
                None => Ok(None),
                Some((ln, v)) => v
                    .parse()
                    .map(Some)
                    .map_err(|_| parse_err(ln, format!("bad value for {key}: {v:?}"))),
            }
        }
        fn list<T: FromStr>(kv: &mut BTreeMap<String, (usize, String)>, key: &str) -> Result<Option<Vec<T>>> {
            match kv.remove(key) {
                None => Ok(None),
                Some((ln, v)) => v
                    .split(',')
                    .map(|s| s.trim().parse().map_err(|_| parse_err(ln, format!("bad {key} entry {s:?}"))))
                    .collect::<Result<Vec<T>>>()
                    .map(Some),
            }
        }

        let d = Params::default();
        let range = get(&mut kv, "range")?.unwrap_or(d.comm_range);
        let base = Params {
            node_count: get(&mut kv, "nodes")?.unwrap_or(d.node_count),
            area_side: get(&mut kv, "area")?.unwrap_or(d.area_side),
            comm_range: range,
            interference_range: get(&mut kv, "irange")?.unwrap_or(range),
            period_length: get(&mut kv, "period")?.unwrap_or(d.period_length),
            active_slot_count: get(&mut kv, "active")?.unwrap_or(d.active_slot_count),
            channel_count: get(&mut kv, "channels")?.unwrap_or(d.channel_count),
            rng_seed: get(&mut kv, "seed")?.unwrap_or(d.rng_seed),
            sink_placement: get(&mut kv, "sink")?.unwrap_or(d.sink_placement),
        };
        let field = get::<SweepField>(&mut kv, "field")?.ok_or_else(|| invalid("config needs `field`"))?;
        let values = list(&mut kv, "values")?.ok_or_else(|| invalid("config needs `values`"))?;
        let trials = get(&mut kv, "trials")?.unwrap_or(100);
        let schemes = list(&mut kv, "schemes")?.unwrap_or_else(|| Scheme::ALL.to_vec());
        if let Some((key, (ln, _))) = kv.into_iter().next() {
            return Err(parse_err(ln, format!("unknown key {key:?}")));
        }
        let spec = SweepSpec {
            base,
            field,
            values,
            trials,
            schemes,
        };
        spec.validate()?;
        Ok(spec)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Topology seed for one sweep cell and trial:
/// `splitmix64(splitmix64(splitmix64(base) ^ value) ^ trial)`.
pub fn trial_seed(base: u64, value: u64, trial: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(base) ^ value) ^ trial)
}

/// One scheme's delay on one topology.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub sweep_value: u64,
    pub scheme: Scheme,
    pub trial: u64,
    pub seed: u64,
    pub delay: u64,
}

/// Aggregate over the trials of one (scheme, sweep value) pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub sweep_value: u64,
    pub scheme: Scheme,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single trial.
    pub std: f64,
    pub min: u64,
    pub max: u64,
    pub n: usize,
}

impl Cell {
    fn from_delays(sweep_value: u64, scheme: Scheme, delays: &[u64]) -> Self {
        let n = delays.len();
        let mean = delays.iter().map(|&d| d as f64).sum::<f64>() / n as f64;
        let std = if n > 1 {
            let ss: f64 = delays.iter().map(|&d| (d as f64 - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        Cell {
            sweep_value,
            scheme,
            mean,
            std,
            min: delays.iter().copied().min().unwrap_or(0),
            max: delays.iter().copied().max().unwrap_or(0),
            n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub field: SweepField,
    /// Per-trial records ordered by (sweep value, scheme, trial).
    pub records: Vec<TrialRecord>,
    /// One cell per (sweep value, scheme), in the same order.
    pub cells: Vec<Cell>,
}

impl ExperimentResult {
    fn from_records(field: SweepField, records: Vec<TrialRecord>) -> Self {
        let mut groups: Vec<((u64, Scheme), Vec<u64>)> = Vec::new();
        for r in &records {
            match groups.iter_mut().find(|(k, _)| *k == (r.sweep_value, r.scheme)) {
                Some((_, ds)) => ds.push(r.delay),
                None => groups.push(((r.sweep_value, r.scheme), vec![r.delay])),
            }
        }
        let cells = groups
            .iter()
            .map(|((v, s), ds)| Cell::from_delays(*v, *s, ds))
            .collect();
        ExperimentResult { field, records, cells }
    }

    pub fn cell(&self, scheme: Scheme, value: u64) -> Option<&Cell> {
        self.cells.iter().find(|c| c.scheme == scheme && c.sweep_value == value)
    }

    /// Sweep values in first-seen order.
    pub fn values(&self) -> Vec<u64> {
        let mut out: Vec<u64> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.sweep_value) {
                out.push(c.sweep_value);
            }
        }
        out
    }

    pub fn schemes(&self) -> Vec<Scheme> {
        let mut out: Vec<Scheme> = Vec::new();
        for c in &self.cells {
            if !out.contains(&c.scheme) {
                out.push(c.scheme);
            }
        }
        out
    }

    /// Mean delays of `scheme` in sweep-value order.
    pub fn means(&self, scheme: Scheme) -> Vec<f64> {
        self.cells.iter().filter(|c| c.scheme == scheme).map(|c| c.mean).collect()
    }

    /// Per-trial CSV: `sweep_field,sweep_value,scheme,trial,seed,delay_slots`.
    pub fn trials_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["sweep_field", "sweep_value", "scheme", "trial", "seed", "delay_slots"])?;
        for r in &self.records {
            w.write_record([
                self.field.name().to_string(),
                r.sweep_value.to_string(),
                r.scheme.name().to_string(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.delay.to_string(),
            ])?;
        }
        into_string(w)
    }

    /// Summary CSV: `sweep_field,sweep_value,scheme,mean,std,min,max,n`.
    pub fn summary_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["sweep_field", "sweep_value", "scheme", "mean", "std", "min", "max", "n"])?;
        for c in &self.cells {
            w.write_record([
                self.field.name().to_string(),
                c.sweep_value.to_string(),
                c.scheme.name().to_string(),
                c.mean.to_string(),
                c.std.to_string(),
                c.min.to_string(),
                c.max.to_string(),
                c.n.to_string(),
            ])?;
        }
        into_string(w)
    }

    /// Rebuilds a result from [`trials_csv`](Self::trials_csv) output.
    pub fn from_trials_csv(text: &str) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(text.as_bytes());
        let mut field = None;
        let mut records = Vec::new();
        for (i, row) in rdr.records().enumerate() {
            let row = row?;
            let ln = i + 2;
            if row.len() != 6 {
                return Err(parse_err(ln, "expected 6 columns"));
            }
            let f: SweepField = row[0].parse().map_err(|e: Error| parse_err(ln, e.to_string()))?;
            if *field.get_or_insert(f) != f {
                return Err(parse_err(ln, "mixed sweep fields"));
            }
            let num = |j: usize| row[j].parse::<u64>().map_err(|_| parse_err(ln, format!("bad integer {:?}", &row[j])));
            records.push(TrialRecord {
                sweep_value: num(1)?,
                scheme: row[2].parse().map_err(|e: Error| parse_err(ln, e.to_string()))?,
                trial: num(3)?,
                seed: num(4)?,
                delay: num(5)?,
            });
        }
        let field = field.ok_or_else(|| parse_err(1, "no trial rows"))?;
        Ok(Self::from_records(field, records))
    }

    /// Whitespace-separated `x mean(scheme)...` table with a `#` header line.
    pub fn plot_data(&self) -> String {
        let schemes = self.schemes();
        let mut out = format!("# {}", self.field);
        for s in &schemes {
            let _ = write!(out, " {s}");
        }
        out.push('\n');
        for v in self.values() {
            let _ = write!(out, "{v}");
            for &s in &schemes {
                let mean = self.cell(s, v).map_or(f64::NAN, |c| c.mean);
                let _ = write!(out, " {mean}");
            }
            out.push('\n');
        }
        out
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Runs every (value, trial) topology and scheme.
pub fn run_sweep(spec: &SweepSpec, exec: Execution) -> Result<ExperimentResult> {
    spec.validate()?;
    let jobs: Vec<(u64, u64)> = spec
        .values
        .iter()
        .flat_map(|&v| (0..spec.trials as u64).map(move |t| (v, t)))
        .collect();
    let outcomes = map_ordered(&jobs, exec, |&(value, trial)| run_trial(spec, value, trial));

    let mut by_key: BTreeMap<(usize, usize, u64), TrialRecord> = BTreeMap::new();
    for outcome in outcomes {
        for r in outcome? {
            let vi = spec.values.iter().position(|&v| v == r.sweep_value).unwrap_or(usize::MAX);
            let si = spec.schemes.iter().position(|&s| s == r.scheme).unwrap_or(usize::MAX);
            by_key.insert((vi, si, r.trial), r);
        }
    }
    Ok(ExperimentResult::from_records(spec.field, by_key.into_values().collect()))
}

fn run_trial(spec: &SweepSpec, value: u64, trial: u64) -> Result<Vec<TrialRecord>> {
    let seed_value = if spec.field.affects_topology() { value } else { 0 };
    let seed = trial_seed(spec.base.rng_seed, seed_value, trial);
    let params = Params {
        rng_seed: seed,
        ..spec.field.apply(&spec.base, value)?
    };
    let net = generate_network(&params)?;
    let lay = compute_layers(&net);
    let ddas_tree = build_ddas_tree(&net, &lay);
    let mut spt_tree = None;
    let mut out = Vec::with_capacity(spec.schemes.len());
    for &scheme in &spec.schemes {
        let tree = match scheme {
            Scheme::SptDas => spt_tree.get_or_insert_with(|| build_spt_tree(&net, &lay)),
            Scheme::Ddas | Scheme::Ndas => &ddas_tree,
        };
        let sched = schedule(&net, tree, scheme.policy());
        let violations = verify_schedule(&net, tree, &sched);
        if let Some(v) = violations.first() {
            return Err(Error::Verification(format!(
                "{scheme} at {}={value}, trial {trial}, seed {seed}: {} violations, first: {v}",
                spec.field,
                violations.len()
            )));
        }
        out.push(TrialRecord {
            sweep_value: value,
            scheme,
            trial,
            seed,
            delay: sched.delay(),
        });
    }
    Ok(out)
}

/// Relative improvement of one scheme over a baseline at one sweep value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Improvement {
    pub sweep_value: u64,
    pub baseline_mean: f64,
    pub scheme_mean: f64,
    /// `(baseline - scheme) / baseline`.
    pub relative: f64,
}

/// `(baseline - scheme) / baseline` of cell means at every sweep value.
pub fn summarize(result: &ExperimentResult, scheme: Scheme, baseline: Scheme) -> Result<Vec<Improvement>> {
    let present = result.schemes();
    for s in [scheme, baseline] {
        if !present.contains(&s) {
            return Err(invalid(format!("result has no {s} cells")));
        }
    }
    result
        .values()
        .into_iter()
        .map(|v| {
            let b = result.cell(baseline, v).ok_or_else(|| invalid(format!("no {baseline} cell at {v}")))?;
            let s = result.cell(scheme, v).ok_or_else(|| invalid(format!("no {scheme} cell at {v}")))?;
            Ok(Improvement {
                sweep_value: v,
                baseline_mean: b.mean,
                scheme_mean: s.mean,
                relative: relative_improvement(b.mean, s.mean),
            })
        })
        .collect()
}

pub fn relative_improvement(baseline: f64, scheme: f64) -> f64 {
    if baseline == 0.0 {
        0.0
    } else {
        (baseline - scheme) / baseline
    }
}

/// The four standard sweeps over the 100 m x 100 m, d = 20 m deployment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// N = 200, T = 20, alpha = 1..7.
    ActiveSlots,
    /// N = 200, alpha = 2, T = 10..70 step 10.
    PeriodLength,
    /// T = 20, alpha = 2, N in {50, 100, 200, 400} (plus 800 when extended).
    NodeCount,
    /// N = 200, T = 20, alpha = 2, m = 2..7.
    Channels,
}

impl Figure {
    pub const ALL: [Figure; 4] = [Figure::ActiveSlots, Figure::PeriodLength, Figure::NodeCount, Figure::Channels];

    pub fn name(self) -> &'static str {
        match self {
            Figure::ActiveSlots => "fig2a",
            Figure::PeriodLength => "fig2b",
            Figure::NodeCount => "fig3a",
            Figure::Channels => "fig3b",
        }
    }

    /// Sweep for this figure with `channels` fixed (ignored by the channel sweep).
    pub fn spec(self, channels: u32, trials: usize, seed: u64, extended: bool) -> SweepSpec {
        let base = Params {
            channel_count: channels,
            rng_seed: seed,
            ..Params::default()
        };
        let (field, values): (SweepField, Vec<u64>) = match self {
            Figure::ActiveSlots => (SweepField::ActiveSlotCount, (1..=7).collect()),
            Figure::PeriodLength => (SweepField::PeriodLength, (1..=7).map(|k| 10 * k).collect()),
            Figure::NodeCount => {
                let mut v = vec![50, 100, 200, 400];
                if extended {
                    v.push(800);
                }
                (SweepField::NodeCount, v)
            }
            Figure::Channels => (SweepField::ChannelCount, (2..=7).collect()),
        };
        SweepSpec {
            base,
            field,
            values,
            trials,
            schemes: Scheme::ALL.to_vec(),
        }
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Figure::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| invalid(format!("unknown figure {s:?}")))
    }
}
