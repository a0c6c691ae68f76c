use super::{Cycle, DliBroadcast, SchemeKind};
use crate::geometry::{BeamIndex, MobilityClass};

/// An unconfirmed beam the UE is listening to before it sends a PAR.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Monitoring {
    pub beam: BeamIndex,
    /// Silent paging occasions still to wait for.
    pub remaining: u32,
}

/// What an idle UE believes about the beams of its serving cell.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UePagingKnowledge {
    believed_active_until: Vec<Option<Cycle>>,
    monitoring: Option<Monitoring>,
}

impl UePagingKnowledge {
    pub fn new(total_beams: usize) -> Self {
        Self {
            believed_active_until: vec![None; total_beams],
            monitoring: None,
        }
    }

    pub fn believed_active_until(&self, beam: BeamIndex) -> Option<Cycle> {
        self.believed_active_until[beam]
    }

    pub fn monitoring(&self) -> Option<Monitoring> {
        self.monitoring
    }

    /// Whether `beam` is believed active at `cycle`. Expired entries count as unknown.
    pub fn is_known_active(&self, beam: BeamIndex, cycle: Cycle) -> bool {
        self.believed_active_until[beam].is_some_and(|u| u >= cycle)
    }

    /// Extends the belief for `beam` through `until`. Never shortens it.
    pub fn mark_active_until(&mut self, beam: BeamIndex, until: Cycle) {
        let slot = &mut self.believed_active_until[beam];
        *slot = Some(slot.map_or(until, |u| u.max(until)));
    }

    /// Every beam listed in the DLI is active for `N_a` cycles from the DLI's cycle.
    pub fn apply_dli(&mut self, dli: &DliBroadcast, activation_cycles: u32) {
        let until = dli.cycle + Cycle::from(activation_cycles) - 1;
        for b in dli.payload.iter() {
            self.mark_active_until(b, until);
        }
    }

    /// Forget everything, e.g. after a cell change.
    pub fn clear(&mut self) {
        self.believed_active_until.iter_mut().for_each(|u| *u = None);
        self.monitoring = None;
    }
}

/// Observations available to a UE when it wakes for its paging occasion.
///
/// `observed_paging_dci_on_beam` and `received_dli` refer to the previous
/// paging occasion. The DCI flag concerns the beam the UE was on then, so it
/// is ignored when `beam_changed` is set.
#[derive(Debug, Clone, Copy)]
pub struct UeCycleInput<'a> {
    pub current_beam: BeamIndex,
    pub beam_changed: bool,
    pub observed_paging_dci_on_beam: bool,
    pub received_dli: Option<&'a DliBroadcast>,
    pub mobility: MobilityClass,
    pub cycle: Cycle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UeDecision {
    pub send_par: bool,
}

/// Whether the UE sends a PAR on its current beam this cycle.
///
/// Under MFEP-MD a UE entering an unknown beam waits for `N_m` silent
/// paging occasions before sending a PAR. Paging DCI seen on its beam at the
/// last occasion, not already explained by what the UE knew, means the beam
/// is active and the UE stays quiet. A UE that loses track of a beam it did
/// not just enter sends a PAR straight away.
pub fn ue_cycle_decision(
    scheme: SchemeKind,
    activation_cycles: u32,
    knowledge: &mut UePagingKnowledge,
    input: UeCycleInput<'_>,
) -> UeDecision {
    let beam = input.current_beam;
    let t = input.cycle;
    let send_par = match scheme {
        SchemeKind::Legacy => false,
        SchemeKind::Madp => true,
        SchemeKind::MfepAd => !knowledge.is_known_active(beam, t),
        SchemeKind::MfepDli => {
            if let Some(dli) = input.received_dli {
                knowledge.apply_dli(dli, activation_cycles);
            }
            !knowledge.is_known_active(beam, t)
        }
        SchemeKind::MfepMd(nm) => {
            if let Some(dli) = input.received_dli {
                knowledge.apply_dli(dli, activation_cycles);
            }
            md_decision(knowledge, input, nm.for_class(input.mobility))
        }
    };
    if send_par && scheme.uses_activation_duration() {
        knowledge.mark_active_until(beam, t + Cycle::from(activation_cycles) - 1);
        knowledge.monitoring = None;
    }
    UeDecision { send_par }
}

fn md_decision(knowledge: &mut UePagingKnowledge, input: UeCycleInput<'_>, n_m: u32) -> bool {
    let beam = input.current_beam;
    let t = input.cycle;
    if input.beam_changed {
        knowledge.monitoring = None;
    }
    if knowledge.is_known_active(beam, t) {
        knowledge.monitoring = None;
        return false;
    }
    if !input.beam_changed && input.observed_paging_dci_on_beam && t > 0 && !knowledge.is_known_active(beam, t - 1) {
        knowledge.mark_active_until(beam, t - 1);
        knowledge.monitoring = None;
        return false;
    }
    if input.beam_changed {
        knowledge.monitoring = Some(Monitoring { beam, remaining: n_m });
        return n_m == 0;
    }
    match &mut knowledge.monitoring {
        Some(m) if m.beam == beam => {
            m.remaining = m.remaining.saturating_sub(1);
            m.remaining == 0
        }
        _ => true,
    }
}
