//! Per-cycle gNB and UE behaviour of the five paging schemes.
//!
//! * Legacy: every beam is swept at every paging occasion.
//! * MADP: every UE sends a PAR on its best beam each cycle; only beams
//!   with a PAR this cycle are swept.
//! * MFEP-AD: a PAR activates its beam for `N_a` cycles; UEs remember the
//!   beams they activated and stay quiet while the activation lasts.
//! * MFEP-DLI: additionally the gNB broadcasts a bitmap of (re-)activated
//!   beams over all active beams, refreshing every listening UE's view.
//! * MFEP-MD: additionally a UE entering an unknown beam first listens for
//!   paging DCI for `N_m` cycles (per mobility class) before sending a PAR.

mod beamset;
mod gnb;
mod ue;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use beamset::BeamSet;
pub use gnb::{DliBroadcast, GnbBeamState, PageQueueEntry, PagingOutcome, PendingPage, UeId};
pub use ue::{ue_cycle_decision, Monitoring, UeCycleInput, UeDecision, UePagingKnowledge};

use crate::error::ConfigError;
use crate::geometry::MobilityClass;

pub type Cycle = u64;

/// Monitoring durations `N_m`, in paging cycles, per mobility class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonitoringCycles {
    pub stationary: u32,
    pub low: u32,
    pub high: u32,
}

impl MonitoringCycles {
    pub const fn new(stationary: u32, low: u32, high: u32) -> Result<Self, &'static str> {
        if high > low || low > stationary {
            return Err("monitoring cycles must not increase with mobility");
        }
        Ok(Self { stationary, low, high })
    }

    pub fn for_class(&self, class: MobilityClass) -> u32 {
        match class {
            MobilityClass::Stationary => self.stationary,
            MobilityClass::Low => self.low,
            MobilityClass::High => self.high,
        }
    }
}

impl fmt::Display for MonitoringCycles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}/{}", self.stationary, self.low, self.high)
    }
}

impl FromStr for MonitoringCycles {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split('/').map(str::trim).collect();
        let [a, b, c] = parts.as_slice() else {
            return Err(format!("expected x/y/z monitoring cycles, got `{s}`"));
        };
        let p = |v: &str| v.parse::<u32>().map_err(|_| format!("bad monitoring cycle count `{v}`"));
        MonitoringCycles::new(p(a)?, p(b)?, p(c)?).map_err(str::to_string)
    }
}

/// A paging scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum SchemeKind {
    Legacy,
    Madp,
    MfepAd,
    MfepDli,
    MfepMd(MonitoringCycles),
}

impl SchemeKind {
    /// The scheme line-up of the evaluation, MFEP-MD in both configurations.
    pub fn evaluation_set() -> Vec<SchemeKind> {
        vec![
            SchemeKind::Legacy,
            SchemeKind::Madp,
            SchemeKind::MfepAd,
            SchemeKind::MfepDli,
            SchemeKind::MfepMd(MonitoringCycles { stationary: 4, low: 2, high: 0 }),
            SchemeKind::MfepMd(MonitoringCycles { stationary: 6, low: 3, high: 0 }),
        ]
    }

    /// Schemes whose beams stay active for `N_a` cycles after a PAR.
    pub fn uses_activation_duration(&self) -> bool {
        matches!(self, SchemeKind::MfepAd | SchemeKind::MfepDli | SchemeKind::MfepMd(_))
    }

    pub fn uses_dli(&self) -> bool {
        matches!(self, SchemeKind::MfepDli | SchemeKind::MfepMd(_))
    }

    /// Schemes with PAR resources reserved each cycle.
    pub fn uses_pars(&self) -> bool {
        !matches!(self, SchemeKind::Legacy)
    }

    pub fn monitoring(&self) -> Option<MonitoringCycles> {
        match self {
            SchemeKind::MfepMd(m) => Some(*m),
            _ => None,
        }
    }

    /// Family name without the monitoring triple.
    pub fn family(&self) -> &'static str {
        match self {
            SchemeKind::Legacy => "Legacy",
            SchemeKind::Madp => "MADP",
            SchemeKind::MfepAd => "MFEP-AD",
            SchemeKind::MfepDli => "MFEP-DLI",
            SchemeKind::MfepMd(_) => "MFEP-MD",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SchemeKind::MfepMd(m) => write!(f, "MFEP-MD({m})"),
            other => f.write_str(other.family()),
        }
    }
}

impl FromStr for SchemeKind {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        let bad = || ConfigError::new("scheme", format!("unknown scheme `{s}`"));
        Ok(match norm.as_str() {
            "legacy" => SchemeKind::Legacy,
            "madp" => SchemeKind::Madp,
            "mfep-ad" => SchemeKind::MfepAd,
            "mfep-dli" => SchemeKind::MfepDli,
            _ => {
                let rest = norm.strip_prefix("mfep-md").ok_or_else(bad)?;
                let triple = rest
                    .trim_start_matches([':', '-', '('])
                    .trim_end_matches(')');
                let m = triple
                    .parse::<MonitoringCycles>()
                    .map_err(|e| ConfigError::new("scheme", e))?;
                SchemeKind::MfepMd(m)
            }
        })
    }
}

impl TryFrom<String> for SchemeKind {
    type Error = ConfigError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<SchemeKind> for String {
    fn from(s: SchemeKind) -> Self {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for s in SchemeKind::evaluation_set() {
            assert_eq!(s.to_string().parse::<SchemeKind>().unwrap(), s);
        }
        assert_eq!("mfep_md:4/2/0".parse::<SchemeKind>().unwrap().to_string(), "MFEP-MD(4/2/0)");
        assert_eq!("MFEP-MD-6/3/0".parse::<SchemeKind>().unwrap().to_string(), "MFEP-MD(6/3/0)");
        assert!("mfep-md(1/2/0)".parse::<SchemeKind>().is_err());
        assert!("flooding".parse::<SchemeKind>().is_err());
    }

    #[test]
    fn monitoring_must_not_grow_with_mobility() {
        assert!(MonitoringCycles::new(4, 2, 0).is_ok());
        assert!(MonitoringCycles::new(0, 0, 0).is_ok());
        assert!(MonitoringCycles::new(2, 3, 0).is_err());
        assert!(MonitoringCycles::new(2, 1, 2).is_err());
    }
}
