use super::{BeamSet, Cycle, SchemeKind};
use crate::geometry::BeamIndex;

pub type UeId = u32;

/// A page waiting at the network for its UE.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PageQueueEntry {
    pub ue: UeId,
    pub arrival_cycle: Cycle,
    pub delivered_cycle: Option<Cycle>,
}

impl PageQueueEntry {
    pub fn new(ue: UeId, arrival_cycle: Cycle) -> Self {
        Self {
            ue,
            arrival_cycle,
            delivered_cycle: None,
        }
    }

    /// Paging latency in cycles, once delivered.
    pub fn latency(&self) -> Option<Cycle> {
        self.delivered_cycle.map(|d| d - self.arrival_cycle)
    }
}

/// A queued page together with the beam its UE currently sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PendingPage {
    pub entry: PageQueueEntry,
    pub beam: BeamIndex,
}

/// DL indication of (re-)activated beams.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DliBroadcast {
    pub cycle: Cycle,
    /// Beams the indication is transmitted on: every active beam.
    pub recipients: BeamSet,
    /// Beams (re-)activated this cycle.
    pub payload: BeamSet,
}

impl DliBroadcast {
    pub fn bitmap(&self) -> Vec<u8> {
        self.payload.to_bitmap()
    }
}

/// What one paging occasion of a cell did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PagingOutcome {
    /// Indices into the pending slice of the pages delivered this cycle.
    pub delivered: Vec<usize>,
    /// Distinct UEs named in the paging message.
    pub selected_ues: usize,
    /// Active beams covering at least one delivered UE.
    pub message_beams: BeamSet,
    /// Beams the paging DCI was swept over.
    pub dci_beams: usize,
}

/// Beam activation state of one gNB for one paging group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GnbBeamState {
    scheme: SchemeKind,
    activation_cycles: u32,
    activation_remaining: Vec<u32>,
    activated_this_cycle: BeamSet,
}

impl GnbBeamState {
    pub fn new(scheme: SchemeKind, total_beams: usize, activation_cycles: u32) -> Self {
        assert!(activation_cycles >= 1, "activation duration must be at least one cycle");
        Self {
            scheme,
            activation_cycles,
            activation_remaining: vec![0; total_beams],
            activated_this_cycle: BeamSet::new(total_beams),
        }
    }

    pub fn scheme(&self) -> SchemeKind {
        self.scheme
    }

    pub fn total_beams(&self) -> usize {
        self.activation_remaining.len()
    }

    /// Remaining activation in cycles (0 = inactive). Always 0 under Legacy.
    pub fn activation_remaining(&self, beam: BeamIndex) -> u32 {
        self.activation_remaining[beam]
    }

    pub fn activated_this_cycle(&self) -> &BeamSet {
        &self.activated_this_cycle
    }

    pub fn is_active(&self, beam: BeamIndex) -> bool {
        matches!(self.scheme, SchemeKind::Legacy) || self.activation_remaining[beam] > 0
    }

    pub fn active_count(&self) -> usize {
        if matches!(self.scheme, SchemeKind::Legacy) {
            self.total_beams()
        } else {
            self.activation_remaining.iter().filter(|&&r| r > 0).count()
        }
    }

    pub fn active_set(&self) -> BeamSet {
        let b = self.total_beams();
        if matches!(self.scheme, SchemeKind::Legacy) {
            BeamSet::from_beams(b, 0..b)
        } else {
            BeamSet::from_beams(
                b,
                self.activation_remaining
                    .iter()
                    .enumerate()
                    .filter(|(_, &r)| r > 0)
                    .map(|(i, _)| i),
            )
        }
    }

    /// Applies this cycle's received PARs.
    ///
    /// MFEP schemes (re-)start the `N_a` countdown of each beam; MADP
    /// activates the beam for this cycle only; Legacy ignores PARs.
    pub fn collect_pars(&mut self, pars: &[BeamIndex]) {
        let hold = match self.scheme {
            SchemeKind::Legacy => return,
            SchemeKind::Madp => 1,
            _ => self.activation_cycles,
        };
        for &b in pars {
            self.activation_remaining[b] = hold;
            self.activated_this_cycle.insert(b);
        }
    }

    /// DL indication for this cycle, if the scheme uses one and something
    /// was (re-)activated.
    pub fn emit_dli(&self, cycle: Cycle) -> Option<DliBroadcast> {
        if !self.scheme.uses_dli() || self.activated_this_cycle.is_empty() {
            return None;
        }
        Some(DliBroadcast {
            cycle,
            recipients: self.active_set(),
            payload: self.activated_this_cycle.clone(),
        })
    }

    /// Paging sweep over the active beams.
    ///
    /// Up to `max_simultaneous` distinct UEs are taken from `pending` in
    /// order (the caller keeps it FIFO by arrival, then UE id). A selected
    /// page is delivered iff its UE's beam is active. Everything else stays
    /// queued.
    pub fn page(&self, pending: &[PendingPage], max_simultaneous: usize, cycle: Cycle) -> PagingOutcome {
        let _ = cycle;
        let mut selected: Vec<UeId> = Vec::with_capacity(max_simultaneous);
        let mut delivered = Vec::new();
        let mut message_beams = BeamSet::new(self.total_beams());
        for (i, p) in pending.iter().enumerate() {
            if !selected.contains(&p.entry.ue) {
                if selected.len() == max_simultaneous {
                    continue;
                }
                selected.push(p.entry.ue);
            }
            if self.is_active(p.beam) {
                delivered.push(i);
                message_beams.insert(p.beam);
            }
        }
        PagingOutcome {
            delivered,
            selected_ues: selected.len(),
            message_beams,
            dci_beams: self.active_count(),
        }
    }

    /// Countdown at the end of the cycle.
    pub fn end_of_cycle(&mut self) {
        match self.scheme {
            SchemeKind::Legacy => {}
            SchemeKind::Madp => self.activation_remaining.iter_mut().for_each(|r| *r = 0),
            _ => self
                .activation_remaining
                .iter_mut()
                .for_each(|r| *r = r.saturating_sub(1)),
        }
        self.activated_this_cycle.clear();
    }
}
