//! Protocol invariant checks over observed simulation runs.

#![allow(dead_code)]

use std::collections::HashMap;

use beampage::protocol::{BeamSet, GnbBeamState, MonitoringCycles, SchemeKind};
use beampage::sim::{run_simulation_observed, CycleRecord, GeometryConfig, SimConfig, SimObserver};

pub const N_A: u32 = 5;

#[derive(Default)]
pub struct Recorder(pub Vec<CycleRecord>);

impl SimObserver for Recorder {
    fn on_cycle(&mut self, record: &CycleRecord) {
        self.0.push(record.clone());
    }
}

/// One cell, 16 beams, 20 UEs, 500 cycles.
pub fn small_config(scheme: SchemeKind, seed: u64) -> SimConfig {
    SimConfig {
        scheme,
        seed,
        total_beams: 16,
        ue_density: 20,
        total_cycles: 500,
        warmup_cycles: 0,
        activation_cycles: N_A,
        paging_arrival_rate: 1.0 / 3.0,
        geometry: GeometryConfig {
            grid_side: 1,
            ..GeometryConfig::default()
        },
        ..SimConfig::default()
    }
}

pub fn record(config: &SimConfig) -> (Vec<CycleRecord>, beampage::MetricsSummary) {
    let mut rec = Recorder::default();
    let out = run_simulation_observed(config, Some(&mut rec)).expect("valid config");
    (rec.0, out.summary)
}

pub fn md(s: u32, l: u32, h: u32) -> SchemeKind {
    SchemeKind::MfepMd(MonitoringCycles::new(s, l, h).unwrap())
}

pub fn schemes_under_test() -> Vec<SchemeKind> {
    let mut v = SchemeKind::evaluation_set();
    v.push(md(0, 0, 0));
    v
}

/// A beam is active at `t` iff a PAR for it arrived in `(t - N_a, t]`.
pub fn activation_soundness(scheme: SchemeKind, trace: &[CycleRecord]) -> Result<(), String> {
    if !scheme.uses_activation_duration() {
        return Ok(());
    }
    let cells = trace[0].cells.len();
    for c in 0..cells {
        for (t, rec) in trace.iter().enumerate() {
            let cell = &rec.cells[c];
            let lo = (t + 1).saturating_sub(N_A as usize);
            for b in 0..cell.active.universe() {
                let expect = trace[lo..=t].iter().any(|r| r.cells[c].pars.contains(&b));
                if cell.active.contains(b) != expect {
                    return Err(format!("{scheme}: cell {c} beam {b} cycle {t}: active={} expected={expect}", !expect));
                }
            }
        }
    }
    Ok(())
}

/// Every page delivered at most once, never early, never on an inactive
/// beam; arrivals = delivered + pending.
pub fn page_conservation(
    scheme: SchemeKind,
    trace: &[CycleRecord],
    summary: &beampage::MetricsSummary,
) -> Result<(), String> {
    let mut outstanding: HashMap<(u32, u64), i64> = HashMap::new();
    let mut arrived = 0u64;
    let mut delivered = 0u64;
    for rec in trace {
        for a in &rec.arrivals {
            *outstanding.entry((a.ue, a.arrival_cycle)).or_default() += 1;
            arrived += 1;
        }
        for (c, cell) in rec.cells.iter().enumerate() {
            for d in &cell.deliveries {
                let at = d.entry.delivered_cycle.ok_or("delivery without cycle")?;
                if at < d.entry.arrival_cycle || at != rec.cycle {
                    return Err(format!("{scheme}: bad delivery cycle {d:?} at {}", rec.cycle));
                }
                if !cell.active.contains(d.beam) {
                    return Err(format!("{scheme}: delivery on inactive beam {} in cell {c}", d.beam));
                }
                let slot = outstanding.entry((d.entry.ue, d.entry.arrival_cycle)).or_default();
                *slot -= 1;
                if *slot < 0 {
                    return Err(format!("{scheme}: page {:?} delivered twice", d.entry));
                }
                delivered += 1;
                if scheme == SchemeKind::Legacy && at != d.entry.arrival_cycle {
                    return Err(format!("{scheme}: latency {} at low occupancy", at - d.entry.arrival_cycle));
                }
            }
        }
    }
    let pending: i64 = outstanding.values().sum();
    if arrived != summary.pages_arrived
        || delivered != summary.pages_delivered
        || pending as u64 != summary.pages_pending
        || arrived != delivered + pending as u64
    {
        return Err(format!(
            "{scheme}: arrived {arrived} delivered {delivered} pending {pending} vs summary {}/{}/{}",
            summary.pages_arrived, summary.pages_delivered, summary.pages_pending
        ));
    }
    Ok(())
}

/// Replays a PAR trace through MADP and MFEP-AD beam states.
pub fn madp_subset_of_mfep(trace: &[CycleRecord], total_beams: usize) -> Result<(), String> {
    let cells = trace[0].cells.len();
    for c in 0..cells {
        let mut madp = GnbBeamState::new(SchemeKind::Madp, total_beams, N_A);
        let mut ad = GnbBeamState::new(SchemeKind::MfepAd, total_beams, N_A);
        for rec in trace {
            let pars = &rec.cells[c].pars;
            madp.collect_pars(pars);
            ad.collect_pars(pars);
            if !madp.active_set().is_subset(&ad.active_set()) {
                return Err(format!("cell {c} cycle {}: MADP active set not within MFEP-AD", rec.cycle));
            }
            madp.end_of_cycle();
            ad.end_of_cycle();
        }
    }
    Ok(())
}

/// DLIs appear exactly when something was (re-)activated, list only those
/// beams and go out on the active set.
pub fn dli_only_on_activation(scheme: SchemeKind, trace: &[CycleRecord]) -> Result<(), String> {
    for rec in trace {
        for (c, cell) in rec.cells.iter().enumerate() {
            let activated = BeamSet::from_beams(cell.active.universe(), cell.pars.iter().copied());
            match &cell.dli {
                Some(_) if !scheme.uses_dli() => return Err(format!("{scheme}: DLI without DLI support")),
                Some(d) => {
                    if d.payload.is_empty() || d.payload != activated || d.recipients != cell.active {
                        return Err(format!("{scheme}: cell {c} cycle {}: DLI {d:?} vs pars {:?}", rec.cycle, cell.pars));
                    }
                }
                None if scheme.uses_dli() && !activated.is_empty() => {
                    return Err(format!("{scheme}: cell {c} cycle {}: activation without DLI", rec.cycle));
                }
                None => {}
            }
        }
    }
    Ok(())
}

/// MFEP-MD with zero monitoring replays MFEP-DLI cycle for cycle.
pub fn md_zero_equals_dli(seed: u64) -> Result<(), String> {
    let (dli, s_dli) = record(&small_config(SchemeKind::MfepDli, seed));
    let (md0, s_md0) = record(&small_config(md(0, 0, 0), seed));
    if dli != md0 {
        let t = dli.iter().zip(&md0).position(|(a, b)| a != b).unwrap_or(0);
        return Err(format!("seed {seed}: traces diverge at cycle {t}"));
    }
    if s_dli != s_md0 {
        return Err(format!("seed {seed}: summaries differ"));
    }
    Ok(())
}

/// All invariants for one seed.
pub fn check_seed(seed: u64) -> Result<(), String> {
    for scheme in schemes_under_test() {
        let cfg = small_config(scheme, seed);
        let (trace, summary) = record(&cfg);
        activation_soundness(scheme, &trace)?;
        page_conservation(scheme, &trace, &summary)?;
        dli_only_on_activation(scheme, &trace)?;
        if scheme == SchemeKind::Madp {
            madp_subset_of_mfep(&trace, cfg.total_beams)?;
            if summary.par_awake_mismatch_cycles != 0 {
                return Err(format!("seed {seed}: MADP PARs differ from awake UEs"));
            }
        }
    }
    md_zero_equals_dli(seed)
}
