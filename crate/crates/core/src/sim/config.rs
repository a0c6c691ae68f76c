use serde::{Deserialize, Serialize};

use crate::accounting::{CostModel, DLI_SUPPORTED_BEAMS};
use crate::error::ConfigError;
use crate::geometry::{BeamTiling, CellShape, MobilityClass, MobilityModel, TrackingArea};
use crate::protocol::SchemeKind;

/// What the UE density counts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityScope {
    /// UEs of the paging group across the whole tracking area.
    #[default]
    TrackingArea,
    /// UEs of the paging group in each cell.
    PerCell,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub grid_side: usize,
    pub inter_site_distance_m: f64,
    pub cell_shape: CellShape,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            grid_side: 4,
            inter_site_distance_m: 200.0,
            cell_shape: CellShape::Square,
        }
    }
}

impl GeometryConfig {
    pub fn tracking_area(&self) -> Result<TrackingArea, ConfigError> {
        Ok(TrackingArea::with_grid(self.grid_side, self.inter_site_distance_m)?)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MobilityConfig {
    /// km/h for stationary, low and high mobility UEs.
    pub speeds_kmh: [f64; 3],
    /// Population shares of the three classes.
    pub shares: [f64; 3],
}

impl Default for MobilityConfig {
    fn default() -> Self {
        Self {
            speeds_kmh: MobilityModel::default().speeds_kmh,
            shares: [0.4, 0.4, 0.2],
        }
    }
}

impl MobilityConfig {
    pub fn model(&self) -> MobilityModel {
        MobilityModel {
            speeds_kmh: self.speeds_kmh,
        }
    }

    /// Class sizes for `total` UEs by largest remainder; ties go to the slower class.
    pub fn class_counts(&self, total: usize) -> [usize; 3] {
        let sum: f64 = self.shares.iter().sum();
        let quotas = self.shares.map(|s| s / sum * total as f64);
        let mut counts = quotas.map(|q| q.floor() as usize);
        let mut left = total - counts.iter().sum::<usize>();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| {
            let ra = quotas[a] - counts[a] as f64;
            let rb = quotas[b] - counts[b] as f64;
            rb.total_cmp(&ra).then(a.cmp(&b))
        });
        for &i in order.iter().cycle() {
            if left == 0 {
                break;
            }
            counts[i] += 1;
            left -= 1;
        }
        counts
    }

    pub fn class_of(&self, counts: &[usize; 3], ue: usize) -> MobilityClass {
        if ue < counts[0] {
            MobilityClass::Stationary
        } else if ue < counts[0] + counts[1] {
            MobilityClass::Low
        } else {
            MobilityClass::High
        }
    }
}

/// One simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scheme: SchemeKind,
    pub total_beams: usize,
    /// UEs per paging group; see `density_scope`.
    pub ue_density: usize,
    pub density_scope: DensityScope,
    pub paging_cycle_ms: f64,
    pub total_cycles: u64,
    pub warmup_cycles: u64,
    pub activation_cycles: u32,
    /// Mean page arrivals per UE per second.
    pub paging_arrival_rate: f64,
    pub seed: u64,
    /// Keep the per-cycle, per-cell trace.
    pub trace: bool,
    pub geometry: GeometryConfig,
    pub mobility: MobilityConfig,
    pub cost: CostModel,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scheme: SchemeKind::Legacy,
            total_beams: 64,
            ue_density: 200,
            density_scope: DensityScope::TrackingArea,
            paging_cycle_ms: 320.0,
            total_cycles: 10_000,
            warmup_cycles: 1_000,
            activation_cycles: 5,
            paging_arrival_rate: 1.0 / 60.0,
            seed: 1,
            trace: false,
            geometry: GeometryConfig::default(),
            mobility: MobilityConfig::default(),
            cost: CostModel::default(),
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !DLI_SUPPORTED_BEAMS.contains(&self.total_beams) {
            return Err(ConfigError::new(
                "total_beams",
                format!("{} is not one of 16, 32, 64, 128, 256", self.total_beams),
            ));
        }
        if self.total_cycles <= self.warmup_cycles {
            return Err(ConfigError::new("total_cycles", "must exceed warmup_cycles"));
        }
        if self.activation_cycles == 0 {
            return Err(ConfigError::new("activation_cycles", "must be at least 1"));
        }
        if !(self.paging_cycle_ms.is_finite() && self.paging_cycle_ms > 0.0) {
            return Err(ConfigError::new("paging_cycle_ms", "must be positive"));
        }
        if !(self.paging_arrival_rate.is_finite() && self.paging_arrival_rate >= 0.0) {
            return Err(ConfigError::new("paging_arrival_rate", "must be finite and non-negative"));
        }
        let m = &self.mobility;
        if m.speeds_kmh.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(ConfigError::new("mobility.speeds_kmh", "must be finite and non-negative"));
        }
        if m.shares.iter().any(|s| !(s.is_finite() && *s >= 0.0)) || m.shares.iter().sum::<f64>() <= 0.0 {
            return Err(ConfigError::new("mobility.shares", "must be non-negative with a positive sum"));
        }
        let area = self.geometry.tracking_area()?;
        BeamTiling::new(self.total_beams, area.cell_half_width(), self.geometry.cell_shape)?;
        if self.ue_density > 0 && self.ue_count(area.cell_count()) == 0 {
            return Err(ConfigError::new("ue_density", "yields no UEs"));
        }
        self.cost.validate()
    }

    pub fn ue_count(&self, cells: usize) -> usize {
        match self.density_scope {
            DensityScope::TrackingArea => self.ue_density,
            DensityScope::PerCell => self.ue_density * cells,
        }
    }

    pub fn cycle_seconds(&self) -> f64 {
        self.paging_cycle_ms / 1000.0
    }

    pub fn measured_cycles(&self) -> u64 {
        self.total_cycles - self.warmup_cycles
    }
}
