//! Trace replay over a placed NoC.
//!
//! Each message is cut into packets and routed between the cells of its
//! source and destination shards. Latency follows `T = H * (T_r + T_w)` per
//! packet with the router and wire terms folded into one per-hop latency.
//! Times are kept in nanoseconds and energies in picojoules throughout.

use std::collections::{BTreeMap, HashMap};
use std::io::{self, BufRead, Write};

use rayon::prelude::*;

use crate::engine::{Message, Phase, TrafficTrace};
use crate::error::SimError;
use crate::partition::ShardId;
use crate::placement::{Coord, CostMode, GridSpec, Placement, Topology};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NocParams {
    pub frequency_hz: f64,
    pub packet_bytes: u64,
    /// Router plus link latency per hop.
    pub hop_latency_ns: f64,
    /// Recorded only; not enforced as a contention limit.
    pub ports: u32,
    pub hop_energy_pj: f64,
    pub injection_energy_pj: f64,
}

impl Default for NocParams {
    fn default() -> Self {
        Self { frequency_hz: 1e9, packet_bytes: 8, hop_latency_ns: 1.0, ports: 4, hop_energy_pj: 0.1, injection_energy_pj: 0.05 }
    }
}

impl NocParams {
    pub fn validate(&self) -> Result<(), SimError> {
        if self.packet_bytes == 0 {
            return Err(SimError::InvalidParameter("packet_bytes must be > 0".into()));
        }
        if !(self.hop_latency_ns > 0.0) {
            return Err(SimError::InvalidParameter("hop_latency_ns must be > 0".into()));
        }
        if !(self.frequency_hz > 0.0) {
            return Err(SimError::InvalidParameter("frequency_hz must be > 0".into()));
        }
        if self.hop_energy_pj < 0.0 || self.injection_energy_pj < 0.0 {
            return Err(SimError::InvalidParameter("energies must be >= 0".into()));
        }
        Ok(())
    }
}

pub fn packetize(bytes: u64, packet_bytes: u64) -> u64 {
    bytes.div_ceil(packet_bytes)
}

/// Latency of `packets` packets each crossing `hops` hops, serialised.
pub fn message_latency_ns(packets: u64, hops: u32, params: &NocParams) -> f64 {
    (packets * hops as u64) as f64 * params.hop_latency_ns
}

/// A directed link between two routers.
pub type Link = (Coord, Coord);

/// Links traversed from `a` to `b`.
///
/// The mesh uses dimension-ordered X-then-Y routing. The flattened butterfly
/// in corrected mode takes at most one express link per dimension; in paper
/// mode it is costed and routed like the mesh.
pub fn route(topology: Topology, mode: CostMode, a: Coord, b: Coord) -> Vec<Link> {
    let mut links = Vec::new();
    match (topology, mode) {
        (Topology::FlattenedButterfly, CostMode::Corrected) => {
            let corner = Coord::new(b.x, a.y);
            if a.x != b.x {
                links.push((a, corner));
            }
            if a.y != b.y {
                links.push((corner, b));
            }
        }
        _ => {
            let mut cur = a;
            while cur.x != b.x {
                let next = Coord::new(if b.x > cur.x { cur.x + 1 } else { cur.x - 1 }, cur.y);
                links.push((cur, next));
                cur = next;
            }
            while cur.y != b.y {
                let next = Coord::new(cur.x, if b.y > cur.y { cur.y + 1 } else { cur.y - 1 });
                links.push((cur, next));
                cur = next;
            }
        }
    }
    links
}

pub fn route_hops(topology: Topology, mode: CostMode, placement: &Placement, src: ShardId, dst: ShardId) -> Result<u32, SimError> {
    let a = placement.coord_of(src).ok_or(SimError::UnplacedShard(src))?;
    let b = placement.coord_of(dst).ok_or(SimError::UnplacedShard(dst))?;
    Ok(route(topology, mode, a, b).len() as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Totals {
    pub packets: u64,
    pub hop_packets: u64,
    pub serial_latency_ns: f64,
    pub parallel_latency_ns: f64,
    pub energy_pj: f64,
}

impl Totals {
    fn add(&mut self, other: &Totals) {
        self.packets += other.packets;
        self.hop_packets += other.hop_packets;
        self.serial_latency_ns += other.serial_latency_ns;
        self.parallel_latency_ns += other.parallel_latency_ns;
        self.energy_pj += other.energy_pj;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationReport {
    pub iteration: u32,
    pub phases: [Totals; 3],
    pub totals: Totals,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimReport {
    pub total_packets: u64,
    pub total_hop_packets: u64,
    pub avg_hop_count: f64,
    pub serial_latency_ns: f64,
    /// Sum over iterations and phases of the busiest link's serialised load.
    pub parallel_latency_ns: f64,
    pub energy_pj: f64,
    pub per_phase: [Totals; 3],
    pub per_iteration: Vec<IterationReport>,
    /// Packet traversals per directed link over the whole run.
    pub link_loads: BTreeMap<Link, u64>,
}

impl SimReport {
    pub fn summary(&self) -> ReportSummary {
        ReportSummary {
            total_packets: self.total_packets as f64,
            total_hop_packets: self.total_hop_packets as f64,
            avg_hop_count: self.avg_hop_count,
            serial_latency_ns: self.serial_latency_ns,
            parallel_latency_ns: self.parallel_latency_ns,
            energy_pj: self.energy_pj,
        }
    }

    pub fn write_iterations_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "iteration,phase,packets,hop_packets,serial_latency_ns,parallel_latency_ns,energy_pj")?;
        for it in &self.per_iteration {
            for phase in Phase::ALL {
                let t = &it.phases[phase as usize];
                writeln!(out, "{},{},{},{},{},{},{}", it.iteration, phase, t.packets, t.hop_packets, t.serial_latency_ns, t.parallel_latency_ns, t.energy_pj)?;
            }
        }
        Ok(())
    }
}

/// Scalar view of a report; also the shape of a seed-averaged baseline.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReportSummary {
    pub total_packets: f64,
    pub total_hop_packets: f64,
    pub avg_hop_count: f64,
    pub serial_latency_ns: f64,
    pub parallel_latency_ns: f64,
    pub energy_pj: f64,
}

const SUMMARY_HEADER: &str = "total_packets,total_hop_packets,avg_hop_count,serial_latency_ns,parallel_latency_ns,energy_pj";

impl ReportSummary {
    /// Field-wise arithmetic mean.
    pub fn mean(items: &[ReportSummary]) -> ReportSummary {
        if items.is_empty() {
            return ReportSummary::default();
        }
        let n = items.len() as f64;
        let avg = |f: fn(&ReportSummary) -> f64| items.iter().map(f).sum::<f64>() / n;
        ReportSummary {
            total_packets: avg(|r| r.total_packets),
            total_hop_packets: avg(|r| r.total_hop_packets),
            avg_hop_count: avg(|r| r.avg_hop_count),
            serial_latency_ns: avg(|r| r.serial_latency_ns),
            parallel_latency_ns: avg(|r| r.parallel_latency_ns),
            energy_pj: avg(|r| r.energy_pj),
        }
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "{SUMMARY_HEADER}")?;
        writeln!(
            out,
            "{},{},{},{},{},{}",
            self.total_packets, self.total_hop_packets, self.avg_hop_count, self.serial_latency_ns, self.parallel_latency_ns, self.energy_pj
        )
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self, String> {
        let mut lines = input.lines();
        let header = lines.next().ok_or("empty report")?.map_err(|e| e.to_string())?;
        if header.trim() != SUMMARY_HEADER {
            return Err(format!("unexpected report header {header:?}"));
        }
        let row = lines.next().ok_or("report has no data row")?.map_err(|e| e.to_string())?;
        let vals: Vec<f64> = row.trim().split(',').map(|v| v.parse::<f64>().map_err(|_| format!("bad value {v:?}"))).collect::<Result<_, _>>()?;
        if vals.len() != 6 {
            return Err("report row needs 6 values".into());
        }
        Ok(Self {
            total_packets: vals[0],
            total_hop_packets: vals[1],
            avg_hop_count: vals[2],
            serial_latency_ns: vals[3],
            parallel_latency_ns: vals[4],
            energy_pj: vals[5],
        })
    }
}

/// Replays `trace` over `placement`. Iterations are simulated in parallel and
/// merged in iteration order, which gives the same result as [`replay_sequential`].
pub fn replay(trace: &TrafficTrace, placement: &Placement, grid: &GridSpec, mode: CostMode, params: &NocParams) -> Result<SimReport, SimError> {
    params.validate()?;
    let segments = split_by_iteration(&trace.messages);
    let parts: Vec<Result<IterationPart, SimError>> =
        segments.par_iter().map(|seg| replay_iteration(seg, placement, grid, mode, params)).collect();
    let parts = parts.into_iter().collect::<Result<Vec<_>, _>>()?;
    Ok(merge(parts))
}

pub fn replay_sequential(trace: &TrafficTrace, placement: &Placement, grid: &GridSpec, mode: CostMode, params: &NocParams) -> Result<SimReport, SimError> {
    params.validate()?;
    let mut parts = Vec::new();
    for seg in split_by_iteration(&trace.messages) {
        parts.push(replay_iteration(seg, placement, grid, mode, params)?);
    }
    Ok(merge(parts))
}

struct IterationPart {
    report: IterationReport,
    link_loads: HashMap<Link, u64>,
}

fn split_by_iteration(messages: &[Message]) -> Vec<&[Message]> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=messages.len() {
        if i == messages.len() || messages[i].iteration != messages[start].iteration {
            if i > start {
                out.push(&messages[start..i]);
            }
            start = i;
        }
    }
    out
}

fn replay_iteration(messages: &[Message], placement: &Placement, grid: &GridSpec, mode: CostMode, params: &NocParams) -> Result<IterationPart, SimError> {
    let iteration = messages[0].iteration;
    let mut phases = [Totals::default(); 3];
    let mut run_loads: HashMap<Link, u64> = HashMap::new();
    for phase in Phase::ALL {
        let mut loads: HashMap<Link, u64> = HashMap::new();
        let t = &mut phases[phase as usize];
        for m in messages.iter().filter(|m| m.phase == phase) {
            let a = placement.coord_of(m.src_shard).ok_or(SimError::UnplacedShard(m.src_shard))?;
            let b = placement.coord_of(m.dst_shard).ok_or(SimError::UnplacedShard(m.dst_shard))?;
            let packets = packetize(m.bytes, params.packet_bytes);
            let path = route(grid.topology, mode, a, b);
            for link in &path {
                *loads.entry(*link).or_insert(0) += packets;
            }
            t.packets += packets;
            t.hop_packets += packets * path.len() as u64;
        }
        t.serial_latency_ns = t.hop_packets as f64 * params.hop_latency_ns;
        let busiest = loads.values().copied().max().unwrap_or(0);
        t.parallel_latency_ns = busiest as f64 * params.hop_latency_ns;
        t.energy_pj = t.hop_packets as f64 * params.hop_energy_pj + t.packets as f64 * params.injection_energy_pj;
        for (link, load) in loads {
            *run_loads.entry(link).or_insert(0) += load;
        }
    }
    let mut totals = Totals::default();
    for p in &phases {
        totals.add(p);
    }
    Ok(IterationPart { report: IterationReport { iteration, phases, totals }, link_loads: run_loads })
}

fn merge(parts: Vec<IterationPart>) -> SimReport {
    let mut report = SimReport::default();
    let mut totals = Totals::default();
    for part in parts {
        totals.add(&part.report.totals);
        for phase in Phase::ALL {
            report.per_phase[phase as usize].add(&part.report.phases[phase as usize]);
        }
        for (link, load) in part.link_loads {
            *report.link_loads.entry(link).or_insert(0) += load;
        }
        report.per_iteration.push(part.report);
    }
    report.total_packets = totals.packets;
    report.total_hop_packets = totals.hop_packets;
    report.serial_latency_ns = totals.serial_latency_ns;
    report.parallel_latency_ns = totals.parallel_latency_ns;
    report.energy_pj = totals.energy_pj;
    report.avg_hop_count = if totals.packets > 0 { totals.hop_packets as f64 / totals.packets as f64 } else { 0.0 };
    report
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    pub speedup: f64,
    pub energy_ratio: f64,
    pub hop_reduction: f64,
}

/// `baseline / optimized`, infinite when only the optimized value is zero
/// and 1 when both are.
pub fn ratio(baseline: f64, optimized: f64) -> f64 {
    if optimized == 0.0 {
        if baseline == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        baseline / optimized
    }
}

pub fn compare(optimized: &ReportSummary, baseline: &ReportSummary) -> Comparison {
    let hop_reduction = if baseline.avg_hop_count == 0.0 { 0.0 } else { 1.0 - optimized.avg_hop_count / baseline.avg_hop_count };
    Comparison {
        speedup: ratio(baseline.parallel_latency_ns, optimized.parallel_latency_ns),
        energy_ratio: ratio(baseline.energy_pj, optimized.energy_pj),
        hop_reduction,
    }
}

/// Geometric mean of positive finite values; NaN when there are none.
pub fn geometric_mean(values: &[f64]) -> f64 {
    let usable: Vec<f64> = values.iter().copied().filter(|v| v.is_finite() && *v > 0.0).collect();
    if usable.is_empty() {
        return f64::NAN;
    }
    (usable.iter().map(|v| v.ln()).sum::<f64>() / usable.len() as f64).exp()
}
