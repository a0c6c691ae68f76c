use std::collections::BTreeMap;

use serde::Serialize;

use crate::accounting::{ResourceUnits, UlAccounting};
use crate::geometry::CellIndex;
use crate::protocol::Cycle;

/// What one cell spent and delivered in one paging cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CycleMetrics {
    pub cycle: Cycle,
    pub cell: CellIndex,
    pub dl_dci: ResourceUnits,
    pub dl_pdsch: ResourceUnits,
    pub dl_dli: ResourceUnits,
    pub ul_par_used: ResourceUnits,
    pub ul_par_reserved: ResourceUnits,
    pub par_count: u32,
    pub active_beams: u32,
    pub awake_ues: u32,
    pub pages_delivered: u32,
    /// Latency in cycles of every page delivered this cycle.
    pub latency_samples: Vec<Cycle>,
}

impl CycleMetrics {
    pub fn dl_total(&self) -> ResourceUnits {
        self.dl_dci + self.dl_pdsch + self.dl_dli
    }
}

/// Latency distribution in paging cycles.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct LatencyHistogram {
    counts: BTreeMap<Cycle, u64>,
}

impl LatencyHistogram {
    pub fn record(&mut self, latency: Cycle) {
        *self.counts.entry(latency).or_default() += 1;
    }

    pub fn merge(&mut self, other: &LatencyHistogram) {
        for (&k, &v) in &other.counts {
            *self.counts.entry(k).or_default() += v;
        }
    }

    pub fn counts(&self) -> &BTreeMap<Cycle, u64> {
        &self.counts
    }

    pub fn samples(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn mean(&self) -> f64 {
        let n = self.samples();
        if n == 0 {
            return 0.0;
        }
        self.counts.iter().map(|(&k, &v)| k as f64 * v as f64).sum::<f64>() / n as f64
    }

    /// Nearest-rank quantile; 0 when empty.
    pub fn quantile(&self, q: f64) -> Cycle {
        let n = self.samples();
        if n == 0 {
            return 0;
        }
        let rank = ((q * n as f64).ceil() as u64).clamp(1, n);
        let mut seen = 0;
        for (&k, &v) in &self.counts {
            seen += v;
            if seen >= rank {
                return k;
            }
        }
        unreachable!("rank within sample count")
    }

    pub fn max(&self) -> Cycle {
        self.counts.keys().next_back().copied().unwrap_or(0)
    }
}

/// Totals over the measured cycles of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsSummary {
    pub cells: usize,
    pub ues: usize,
    pub measured_cycles: u64,
    pub paging_cycle_ms: f64,
    pub ul_accounting: UlAccounting,
    pub dl_dci: ResourceUnits,
    pub dl_pdsch: ResourceUnits,
    pub dl_dli: ResourceUnits,
    pub ul_par_used: ResourceUnits,
    pub ul_par_reserved: ResourceUnits,
    pub par_count: u64,
    pub awake_ues: u64,
    pub active_beams: u64,
    /// Cycles in which some cell's PAR count differed from its awake UE count.
    pub par_awake_mismatch_cycles: u64,
    /// Pages arriving in the measured window.
    pub pages_arrived: u64,
    /// Of those, delivered by the end of the run.
    pub pages_delivered: u64,
    pub pages_pending: u64,
    pub latency: LatencyHistogram,
}

/// Names of the per-run metrics, in output order.
pub const METRIC_NAMES: [&str; 21] = [
    "dl_dci_rb_units",
    "dl_pdsch_rb_units",
    "dl_dli_rb_units",
    "dl_total_rb_units",
    "ul_par_used_rb_units",
    "ul_par_reserved_rb_units",
    "total_used_rb_units",
    "total_reserved_rb_units",
    "total_rb_units",
    "par_count",
    "awake_ues",
    "par_awake_mismatch_cycles",
    "active_beams",
    "pages_arrived",
    "pages_delivered",
    "pages_pending",
    "latency_mean_cycles",
    "latency_mean_ms",
    "latency_p95_cycles",
    "latency_max_cycles",
    "delayed_page_fraction",
];

impl MetricsSummary {
    fn cell_cycles(&self) -> f64 {
        (self.cells as u64 * self.measured_cycles) as f64
    }

    /// Mean RB·symbol units per cycle per cell.
    fn per_cell_cycle(&self, r: ResourceUnits) -> f64 {
        r.rb_units() / self.cell_cycles()
    }

    pub fn dl_total(&self) -> ResourceUnits {
        self.dl_dci + self.dl_pdsch + self.dl_dli
    }

    pub fn total_used(&self) -> ResourceUnits {
        self.dl_total() + self.ul_par_used
    }

    pub fn total_reserved(&self) -> ResourceUnits {
        self.dl_total() + self.ul_par_reserved
    }

    pub fn total(&self) -> ResourceUnits {
        match self.ul_accounting {
            UlAccounting::Used => self.total_used(),
            UlAccounting::Reserved => self.total_reserved(),
        }
    }

    pub fn mean_total_rb_units(&self) -> f64 {
        self.per_cell_cycle(self.total())
    }

    pub fn mean_dl_dci_rb_units(&self) -> f64 {
        self.per_cell_cycle(self.dl_dci)
    }

    pub fn mean_par_count(&self) -> f64 {
        self.par_count as f64 / self.cell_cycles()
    }

    pub fn mean_active_beams(&self) -> f64 {
        self.active_beams as f64 / self.cell_cycles()
    }

    pub fn latency_mean_cycles(&self) -> f64 {
        self.latency.mean()
    }

    /// Value of a registry metric; per-cell, per-cycle means for resources
    /// and counts, window totals for pages.
    pub fn metric(&self, name: &str) -> Option<f64> {
        let v = match name {
            "dl_dci_rb_units" => self.per_cell_cycle(self.dl_dci),
            "dl_pdsch_rb_units" => self.per_cell_cycle(self.dl_pdsch),
            "dl_dli_rb_units" => self.per_cell_cycle(self.dl_dli),
            "dl_total_rb_units" => self.per_cell_cycle(self.dl_total()),
            "ul_par_used_rb_units" => self.per_cell_cycle(self.ul_par_used),
            "ul_par_reserved_rb_units" => self.per_cell_cycle(self.ul_par_reserved),
            "total_used_rb_units" => self.per_cell_cycle(self.total_used()),
            "total_reserved_rb_units" => self.per_cell_cycle(self.total_reserved()),
            "total_rb_units" => self.per_cell_cycle(self.total()),
            "par_count" => self.mean_par_count(),
            "awake_ues" => self.awake_ues as f64 / self.cell_cycles(),
            "par_awake_mismatch_cycles" => self.par_awake_mismatch_cycles as f64,
            "active_beams" => self.mean_active_beams(),
            "pages_arrived" => self.pages_arrived as f64,
            "pages_delivered" => self.pages_delivered as f64,
            "pages_pending" => self.pages_pending as f64,
            "latency_mean_cycles" => self.latency.mean(),
            "latency_mean_ms" => self.latency.mean() * self.paging_cycle_ms,
            "latency_p95_cycles" => self.latency.quantile(0.95) as f64,
            "latency_max_cycles" => self.latency.max() as f64,
            "delayed_page_fraction" => {
                let n = self.latency.samples();
                if n == 0 {
                    0.0
                } else {
                    (n - self.latency.counts().get(&0).copied().unwrap_or(0)) as f64 / n as f64
                }
            }
            _ => return None,
        };
        Some(v)
    }

    pub fn metrics(&self) -> impl Iterator<Item = (&'static str, f64)> + '_ {
        METRIC_NAMES
            .iter()
            .map(move |&n| (n, self.metric(n).expect("registry names are known")))
    }
}
