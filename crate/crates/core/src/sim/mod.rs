//! Cycle-driven simulation of one paging group over the tracking area.
//!
//! Every cycle runs, in order: mobility and re-selection, page arrivals,
//! UE decisions and PARs, PAR collection, DLI, the paging sweep, the
//! activation countdown and finally metrics capture.

mod config;
mod metrics;

pub use config::{DensityScope, GeometryConfig, MobilityConfig, SimConfig};
pub use metrics::{CycleMetrics, LatencyHistogram, MetricsSummary, METRIC_NAMES};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

use crate::accounting::{PdschCounting, ResourceUnits};
use crate::error::ConfigError;
use crate::geometry::{beam_of, BeamIndex, BeamTiling, CellIndex, MobilityClass, Point, TrackingArea};
use crate::protocol::{
    ue_cycle_decision, BeamSet, Cycle, DliBroadcast, GnbBeamState, PageQueueEntry, PendingPage, UeCycleInput,
    UeId, UePagingKnowledge,
};

/// Independent random streams drawn from the master seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RngStream {
    Placement = 1,
    Mobility = 2,
    Traffic = 3,
}

pub fn stream_rng(seed: u64, stream: RngStream) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream as u64);
    rng
}

/// Initial state of one UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UeInit {
    pub position: Point,
    pub class: MobilityClass,
}

/// Drops the paging group's UEs uniformly over the tracking area with the
/// configured mobility mix.
pub fn populate_ues<R: Rng + ?Sized>(config: &SimConfig, area: &TrackingArea, rng: &mut R) -> Vec<UeInit> {
    let total = config.ue_count(area.cell_count());
    let counts = config.mobility.class_counts(total);
    let b = area.bounds();
    (0..total)
        .map(|i| UeInit {
            position: Point::new(rng.random_range(b.min_x..b.max_x), rng.random_range(b.min_y..b.max_y)),
            class: config.mobility.class_of(&counts, i),
        })
        .collect()
}

/// Page arrivals of each UE in one cycle.
pub fn draw_paging_arrivals<R: Rng + ?Sized>(ue_count: usize, rate: f64, cycle_seconds: f64, rng: &mut R) -> Vec<u32> {
    let mean = rate * cycle_seconds;
    if mean <= 0.0 {
        return vec![0; ue_count];
    }
    let law = Poisson::new(mean).expect("positive finite mean");
    (0..ue_count).map(|_| law.sample(rng) as u32).collect()
}

/// A page handed to its UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub entry: PageQueueEntry,
    pub beam: BeamIndex,
}

/// One cell's view of a cycle, taken after the paging sweep.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellRecord {
    /// Beams active at this cycle's paging occasion.
    pub active: BeamSet,
    pub pars: Vec<BeamIndex>,
    pub dli: Option<DliBroadcast>,
    pub deliveries: Vec<Delivery>,
    pub metrics: CycleMetrics,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleRecord {
    pub cycle: Cycle,
    pub measured: bool,
    pub arrivals: Vec<PageQueueEntry>,
    pub cells: Vec<CellRecord>,
}

/// Receives a record of every simulated cycle.
pub trait SimObserver {
    fn on_cycle(&mut self, record: &CycleRecord);
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutput {
    pub summary: MetricsSummary,
    /// Per-cycle, per-cell metrics of the measured window when tracing.
    pub trace: Vec<CycleMetrics>,
}

struct Ue {
    position: Point,
    class: MobilityClass,
    cell: CellIndex,
    beam: BeamIndex,
    knowledge: UePagingKnowledge,
    /// Paging DCI was on this UE's beam at the last paging occasion.
    saw_dci: bool,
    heard_dli: bool,
}

pub fn run_simulation(config: &SimConfig) -> Result<SimOutput, ConfigError> {
    run_simulation_observed(config, None)
}

pub fn run_simulation_observed(
    config: &SimConfig,
    mut observer: Option<&mut dyn SimObserver>,
) -> Result<SimOutput, ConfigError> {
    config.validate()?;
    let scheme = config.scheme;
    let beams = config.total_beams;
    let n_a = config.activation_cycles;
    let area = config.geometry.tracking_area()?;
    let tiling = BeamTiling::new(beams, area.cell_half_width(), config.geometry.cell_shape)?;
    let bounds = area.bounds();
    let mobility = config.mobility.model();
    let cost = &config.cost;
    let dt = config.cycle_seconds();
    let n_cells = area.cell_count();
    let dli_per_beam = cost.dli_cost(beams, 1)?;
    let reserved = if scheme.uses_pars() {
        cost.par_reservation(beams)
    } else {
        ResourceUnits::ZERO
    };

    let mut placement = stream_rng(config.seed, RngStream::Placement);
    let mut motion = stream_rng(config.seed, RngStream::Mobility);
    let mut traffic = stream_rng(config.seed, RngStream::Traffic);

    let mut ues: Vec<Ue> = populate_ues(config, &area, &mut placement)
        .into_iter()
        .map(|init| Ue {
            position: init.position,
            class: init.class,
            cell: usize::MAX,
            beam: usize::MAX,
            knowledge: UePagingKnowledge::new(beams),
            saw_dci: false,
            heard_dli: false,
        })
        .collect();

    let mut gnbs: Vec<GnbBeamState> = (0..n_cells).map(|_| GnbBeamState::new(scheme, beams, n_a)).collect();
    let mut last_dli: Vec<Option<DliBroadcast>> = vec![None; n_cells];
    let mut pars: Vec<Vec<BeamIndex>> = vec![Vec::new(); n_cells];
    let mut awake = vec![0u32; n_cells];
    let mut pending: Vec<PageQueueEntry> = Vec::new();
    let mut by_cell: Vec<(Vec<usize>, Vec<PendingPage>)> = vec![(Vec::new(), Vec::new()); n_cells];
    let mut delivered_flag: Vec<bool> = Vec::new();

    let mut summary = MetricsSummary {
        cells: n_cells,
        ues: ues.len(),
        measured_cycles: config.measured_cycles(),
        paging_cycle_ms: config.paging_cycle_ms,
        ul_accounting: cost.ul_accounting,
        dl_dci: ResourceUnits::ZERO,
        dl_pdsch: ResourceUnits::ZERO,
        dl_dli: ResourceUnits::ZERO,
        ul_par_used: ResourceUnits::ZERO,
        ul_par_reserved: ResourceUnits::ZERO,
        par_count: 0,
        awake_ues: 0,
        active_beams: 0,
        par_awake_mismatch_cycles: 0,
        pages_arrived: 0,
        pages_delivered: 0,
        pages_pending: 0,
        latency: LatencyHistogram::default(),
    };
    let mut trace = Vec::new();

    for t in 0..config.total_cycles {
        let measured = t >= config.warmup_cycles;

        // Mobility, cell and beam re-selection, UE decisions.
        awake.iter_mut().for_each(|a| *a = 0);
        let mut beam_changed = vec![false; ues.len()];
        for (ue, changed) in ues.iter_mut().zip(beam_changed.iter_mut()) {
            ue.position = mobility.step(ue.position, ue.class, dt, &bounds, &mut motion);
            let cell = area
                .serving_cell(ue.position)
                .expect("random walk stays inside the tracking area");
            let beam = beam_of(&area, ue.position, cell, &tiling);
            if cell != ue.cell {
                ue.knowledge.clear();
                ue.saw_dci = false;
                ue.heard_dli = false;
            }
            *changed = cell != ue.cell || beam != ue.beam;
            ue.cell = cell;
            ue.beam = beam;
            awake[cell] += 1;
        }

        let arrivals_per_ue = draw_paging_arrivals(ues.len(), config.paging_arrival_rate, dt, &mut traffic);
        let first_new = pending.len();
        for (ue, &k) in arrivals_per_ue.iter().enumerate() {
            for _ in 0..k {
                pending.push(PageQueueEntry::new(ue as UeId, t));
            }
        }
        if measured {
            summary.pages_arrived += (pending.len() - first_new) as u64;
        }
        let arrivals = if observer.is_some() {
            pending[first_new..].to_vec()
        } else {
            Vec::new()
        };

        for (ue, &changed) in ues.iter_mut().zip(beam_changed.iter()) {
            let dli = if ue.heard_dli { last_dli[ue.cell].as_ref() } else { None };
            let input = UeCycleInput {
                current_beam: ue.beam,
                beam_changed: changed,
                observed_paging_dci_on_beam: ue.saw_dci,
                received_dli: dli,
                mobility: ue.class,
                cycle: t,
            };
            if ue_cycle_decision(scheme, n_a, &mut ue.knowledge, input).send_par {
                pars[ue.cell].push(ue.beam);
            }
        }

        // Network side.
        for (gnb, (p, dli)) in gnbs.iter_mut().zip(pars.iter().zip(last_dli.iter_mut())) {
            gnb.collect_pars(p);
            *dli = gnb.emit_dli(t);
        }

        for (idx, pp) in by_cell.iter_mut() {
            idx.clear();
            pp.clear();
        }
        for (i, entry) in pending.iter().enumerate() {
            let ue = &ues[entry.ue as usize];
            let (idx, pp) = &mut by_cell[ue.cell];
            idx.push(i);
            pp.push(PendingPage {
                entry: *entry,
                beam: ue.beam,
            });
        }
        delivered_flag.clear();
        delivered_flag.resize(pending.len(), false);

        let mut cell_records = Vec::new();
        let mut mismatch = false;
        for c in 0..n_cells {
            let gnb = &gnbs[c];
            let (idx, pp) = &by_cell[c];
            let out = gnb.page(pp, cost.max_paged_ues, t);
            let mut latency_samples = Vec::with_capacity(out.delivered.len());
            let mut deliveries = Vec::new();
            for &k in &out.delivered {
                let mut entry = pp[k].entry;
                entry.delivered_cycle = Some(t);
                delivered_flag[idx[k]] = true;
                let latency = t - entry.arrival_cycle;
                latency_samples.push(latency);
                if entry.arrival_cycle >= config.warmup_cycles {
                    summary.pages_delivered += 1;
                    summary.latency.record(latency);
                }
                if observer.is_some() {
                    deliveries.push(Delivery { entry, beam: pp[k].beam });
                }
            }
            let message_beams = match cost.pdsch_counting {
                PdschCounting::PerMessageBeam => out.message_beams.count(),
                PdschCounting::OncePerCell => usize::from(!out.delivered.is_empty()),
            };
            let dl_dli = match &last_dli[c] {
                Some(d) => dli_per_beam * d.recipients.count() as u64,
                None => ResourceUnits::ZERO,
            };
            let m = CycleMetrics {
                cycle: t,
                cell: c,
                dl_dci: cost.paging_dci_cost(out.dci_beams),
                dl_pdsch: cost.pdsch_paging_cost(out.selected_ues, message_beams),
                dl_dli,
                ul_par_used: cost.par_cost(pars[c].len() as u64),
                ul_par_reserved: reserved,
                par_count: pars[c].len() as u32,
                active_beams: out.dci_beams as u32,
                awake_ues: awake[c],
                pages_delivered: out.delivered.len() as u32,
                latency_samples,
            };
            if measured {
                summary.dl_dci += m.dl_dci;
                summary.dl_pdsch += m.dl_pdsch;
                summary.dl_dli += m.dl_dli;
                summary.ul_par_used += m.ul_par_used;
                summary.ul_par_reserved += m.ul_par_reserved;
                summary.par_count += u64::from(m.par_count);
                summary.awake_ues += u64::from(m.awake_ues);
                summary.active_beams += u64::from(m.active_beams);
                mismatch |= m.par_count != m.awake_ues;
            }
            if observer.is_some() {
                cell_records.push(CellRecord {
                    active: gnb.active_set(),
                    pars: pars[c].clone(),
                    dli: last_dli[c].clone(),
                    deliveries,
                    metrics: m.clone(),
                });
            }
            if measured && config.trace {
                trace.push(m);
            }
        }
        if mismatch {
            summary.par_awake_mismatch_cycles += 1;
        }

        // What each UE saw at this paging occasion.
        for ue in ues.iter_mut() {
            ue.saw_dci = gnbs[ue.cell].is_active(ue.beam);
            ue.heard_dli = ue.saw_dci && last_dli[ue.cell].is_some();
        }

        if let Some(obs) = observer.as_deref_mut() {
            obs.on_cycle(&CycleRecord {
                cycle: t,
                measured,
                arrivals,
                cells: cell_records,
            });
        }

        for gnb in gnbs.iter_mut() {
            gnb.end_of_cycle();
        }
        for p in pars.iter_mut() {
            p.clear();
        }
        let mut k = 0;
        pending.retain(|_| {
            k += 1;
            !delivered_flag[k - 1]
        });
    }

    summary.pages_pending = pending
        .iter()
        .filter(|e| e.arrival_cycle >= config.warmup_cycles)
        .count() as u64;
    Ok(SimOutput { summary, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::SchemeKind;

    fn small(scheme: SchemeKind) -> SimConfig {
        SimConfig {
            scheme,
            total_beams: 16,
            ue_density: 20,
            total_cycles: 300,
            warmup_cycles: 50,
            ..SimConfig::default()
        }
    }

    #[test]
    fn populate_split_and_determinism() {
        let area = TrackingArea::build();
        let cfg = SimConfig {
            density_scope: DensityScope::PerCell,
            ..SimConfig::default()
        };
        let a = populate_ues(&cfg, &area, &mut stream_rng(5, RngStream::Placement));
        assert_eq!(a.len(), 3200);
        let count = |c| a.iter().filter(|u| u.class == c).count();
        assert_eq!(count(MobilityClass::Stationary), 1280);
        assert_eq!(count(MobilityClass::Low), 1280);
        assert_eq!(count(MobilityClass::High), 640);
        assert!(a.iter().all(|u| area.bounds().contains(&u.position)));
        let b = populate_ues(&cfg, &area, &mut stream_rng(5, RngStream::Placement));
        assert_eq!(a, b);
        let zero = SimConfig { ue_density: 0, ..cfg };
        assert!(populate_ues(&zero, &area, &mut stream_rng(5, RngStream::Placement)).is_empty());
    }

    #[test]
    fn arrivals_mean() {
        let mut rng = stream_rng(9, RngStream::Traffic);
        assert!(draw_paging_arrivals(100, 0.0, 0.32, &mut rng).iter().all(|&a| a == 0));
        for (rate, mean) in [(1.0f64 / 60.0, 0.005333), (1.0 / 3.0, 0.10667)] {
            assert!((rate * 0.32 - mean).abs() < 1e-5);
            let n = 200_000;
            let total: u64 = draw_paging_arrivals(n, rate, 0.32, &mut rng).iter().map(|&a| u64::from(a)).sum();
            let m = rate * 0.32;
            let sd = (m / n as f64).sqrt();
            assert!((total as f64 / n as f64 - m).abs() < 3.0 * sd, "rate {rate}");
        }
    }

    #[test]
    fn legacy_sweeps_everything() {
        let cfg = SimConfig {
            trace: true,
            ..small(SchemeKind::Legacy)
        };
        let out = run_simulation(&cfg).unwrap();
        assert!(out.trace.iter().all(|m| m.dl_dci.rb_units() == 48.0 * 16.0));
        assert_eq!(out.summary.par_count, 0);
        assert_eq!(out.summary.latency.max(), 0);
    }

    #[test]
    fn madp_without_ues_activates_nothing() {
        let cfg = SimConfig {
            ue_density: 0,
            trace: true,
            ..small(SchemeKind::Madp)
        };
        let out = run_simulation(&cfg).unwrap();
        assert!(out.trace.iter().all(|m| m.active_beams == 0 && m.dl_total() == ResourceUnits::ZERO));
    }

    #[test]
    fn madp_par_per_awake_ue() {
        let out = run_simulation(&small(SchemeKind::Madp)).unwrap();
        assert_eq!(out.summary.par_awake_mismatch_cycles, 0);
        assert_eq!(out.summary.par_count, out.summary.awake_ues);
    }

    #[test]
    fn lone_stationary_ue_pars_every_na_cycles() {
        struct Pars(Vec<(Cycle, usize, bool)>);
        impl SimObserver for Pars {
            fn on_cycle(&mut self, r: &CycleRecord) {
                let n: usize = r.cells.iter().map(|c| c.pars.len()).sum();
                let active = r.cells.iter().any(|c| !c.active.is_empty());
                self.0.push((r.cycle, n, active));
            }
        }
        let mut cfg = small(SchemeKind::MfepAd);
        cfg.ue_density = 1;
        cfg.mobility.shares = [1.0, 0.0, 0.0];
        cfg.paging_arrival_rate = 0.0;
        let mut obs = Pars(Vec::new());
        run_simulation_observed(&cfg, Some(&mut obs)).unwrap();
        for (t, n, active) in obs.0 {
            assert_eq!(n, usize::from(t % 5 == 0), "cycle {t}");
            assert!(active);
        }
    }

    #[test]
    fn deterministic() {
        let cfg = SimConfig {
            trace: true,
            ..small(SchemeKind::MfepMd(crate::protocol::MonitoringCycles::new(4, 2, 0).unwrap()))
        };
        assert_eq!(run_simulation(&cfg).unwrap(), run_simulation(&cfg).unwrap());
    }

    #[test]
    fn config_errors_surface() {
        let mut cfg = small(SchemeKind::Legacy);
        cfg.total_beams = 100;
        assert_eq!(run_simulation(&cfg).unwrap_err().field, "total_beams");
    }
}
