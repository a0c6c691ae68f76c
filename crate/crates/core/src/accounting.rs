//! Radio resource costs of paging transmissions.
//!
//! Everything is counted exactly in resource elements and reported in
//! RB·symbol units (12 RE), labelled "#RBs" in outputs.

use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul};

use serde::{Deserialize, Serialize};

use crate::error::ConfigError;

pub const RE_PER_RB_SYMBOL: u64 = 12;

/// Beam counts with a defined DLI size.
pub const DLI_SUPPORTED_BEAMS: [usize; 5] = [16, 32, 64, 128, 256];

/// An exact amount of radio resources.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ResourceUnits(pub u64);

impl ResourceUnits {
    pub const ZERO: Self = Self(0);

    pub fn from_res(res: u64) -> Self {
        Self(res)
    }

    pub fn from_rb_symbols(rbs: u64) -> Self {
        Self(rbs * RE_PER_RB_SYMBOL)
    }

    pub fn res(self) -> u64 {
        self.0
    }

    pub fn rb_units(self) -> f64 {
        self.0 as f64 / RE_PER_RB_SYMBOL as f64
    }
}

impl Add for ResourceUnits {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self(self.0 + rhs.0)
    }
}

impl AddAssign for ResourceUnits {
    fn add_assign(&mut self, rhs: Self) {
        self.0 += rhs.0;
    }
}

impl Mul<u64> for ResourceUnits {
    type Output = Self;
    fn mul(self, rhs: u64) -> Self {
        Self(self.0 * rhs)
    }
}

impl Sum for ResourceUnits {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        Self(iter.map(|r| r.0).sum())
    }
}

/// How the PDSCH paging message is counted.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PdschCounting {
    /// Once per beam covering at least one paged UE.
    #[default]
    PerMessageBeam,
    /// Once per cell whenever someone is paged.
    OncePerCell,
}

/// Which UL PAR resources count towards totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UlAccounting {
    /// A PAR resource per beam, reserved every cycle.
    Reserved,
    /// Only PARs actually transmitted.
    #[default]
    Used,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CostModel {
    pub dci_rbs: u64,
    pub dci_symbols: u64,
    pub par_res: u64,
    pub par_symbols: u64,
    pub pdsch_bits_per_ue: u64,
    pub pdsch_modulation_bits: u64,
    pub pdsch_code_rate: f64,
    pub pdsch_symbols: u64,
    /// DLI size in RBs (1 symbol) for 16, 32, 64, 128 and 256 beams.
    pub dli_rbs: [u64; 5],
    pub total_rbs: u64,
    pub max_paged_ues: usize,
    pub pdsch_counting: PdschCounting,
    /// Which UL figure goes into the headline total.
    pub ul_accounting: UlAccounting,
}

impl Default for CostModel {
    fn default() -> Self {
        Self {
            dci_rbs: 48,
            dci_symbols: 1,
            par_res: 1,
            par_symbols: 2,
            pdsch_bits_per_ue: 48,
            pdsch_modulation_bits: 2,
            pdsch_code_rate: 0.37,
            pdsch_symbols: 1,
            dli_rbs: [6, 6, 6, 12, 24],
            total_rbs: 264,
            max_paged_ues: 32,
            pdsch_counting: PdschCounting::PerMessageBeam,
            ul_accounting: UlAccounting::Used,
        }
    }
}

impl CostModel {
    pub fn validate(&self) -> Result<(), ConfigError> {
        let positive = [
            ("dci_rbs", self.dci_rbs),
            ("dci_symbols", self.dci_symbols),
            ("par_res", self.par_res),
            ("par_symbols", self.par_symbols),
            ("pdsch_bits_per_ue", self.pdsch_bits_per_ue),
            ("pdsch_modulation_bits", self.pdsch_modulation_bits),
            ("pdsch_symbols", self.pdsch_symbols),
            ("total_rbs", self.total_rbs),
        ];
        for (field, v) in positive {
            if v == 0 {
                return Err(ConfigError::new(format!("cost.{field}"), "must be positive"));
            }
        }
        if self.max_paged_ues == 0 {
            return Err(ConfigError::new("cost.max_paged_ues", "must be positive"));
        }
        if !(self.pdsch_code_rate > 0.0 && self.pdsch_code_rate <= 1.0) {
            return Err(ConfigError::new("cost.pdsch_code_rate", "must lie in (0, 1]"));
        }
        if self.dli_rbs.contains(&0) {
            return Err(ConfigError::new("cost.dli_rbs", "must be positive"));
        }
        if self.dci_rbs > self.total_rbs {
            return Err(ConfigError::new("cost.dci_rbs", "exceeds the available RBs"));
        }
        if let Some(&m) = self.dli_rbs.iter().max().filter(|&&m| m > self.total_rbs) {
            return Err(ConfigError::new("cost.dli_rbs", format!("{m} RBs exceed the available RBs")));
        }
        let full = self.pdsch_rbs_per_beam(self.max_paged_ues);
        if full > self.total_rbs {
            return Err(ConfigError::new(
                "cost.pdsch_symbols",
                format!("a full paging message needs {full} RBs per symbol, more than {}", self.total_rbs),
            ));
        }
        Ok(())
    }

    pub fn paging_dci_cost(&self, active_beams: usize) -> ResourceUnits {
        ResourceUnits::from_rb_symbols(self.dci_rbs * self.dci_symbols) * active_beams as u64
    }

    /// RBs per symbol taken by one copy of a message naming `paged_ues` UEs.
    pub fn pdsch_rbs_per_beam(&self, paged_ues: usize) -> u64 {
        if paged_ues == 0 {
            return 0;
        }
        let info = (self.pdsch_bits_per_ue * paged_ues as u64) as f64;
        // Guard against 0.37 not being representable.
        let coded = (info / self.pdsch_code_rate - 1e-9).ceil() as u64;
        let res = coded.div_ceil(self.pdsch_modulation_bits);
        res.div_ceil(RE_PER_RB_SYMBOL * self.pdsch_symbols)
    }

    pub fn pdsch_paging_cost(&self, paged_ues: usize, beams_carrying_message: usize) -> ResourceUnits {
        ResourceUnits::from_rb_symbols(self.pdsch_rbs_per_beam(paged_ues) * self.pdsch_symbols)
            * beams_carrying_message as u64
    }

    pub fn par_cost(&self, par_transmissions: u64) -> ResourceUnits {
        ResourceUnits::from_res(self.par_res * self.par_symbols * par_transmissions)
    }

    /// PAR resources set aside every cycle: one per beam.
    pub fn par_reservation(&self, total_beams: usize) -> ResourceUnits {
        self.par_cost(total_beams as u64)
    }

    pub fn dli_rbs_for(&self, total_beams: usize) -> Result<u64, ConfigError> {
        DLI_SUPPORTED_BEAMS
            .iter()
            .position(|&b| b == total_beams)
            .map(|i| self.dli_rbs[i])
            .ok_or_else(|| {
                ConfigError::new(
                    "total_beams",
                    format!("no DLI size defined for {total_beams} beams (supported: 16, 32, 64, 128, 256)"),
                )
            })
    }

    pub fn dli_cost(&self, total_beams: usize, recipient_beams: usize) -> Result<ResourceUnits, ConfigError> {
        Ok(ResourceUnits::from_rb_symbols(self.dli_rbs_for(total_beams)?) * recipient_beams as u64)
    }
}
