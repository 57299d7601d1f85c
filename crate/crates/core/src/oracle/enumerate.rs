//! Exhaustive product of meaningful oracle inputs.

use super::{check_ground_rules, classify_subtask, OracleTuple};
use crate::domain::{
    Actor, BeliefState, DialogueAct, EldAction, HelAction, HoType, MatchStatus, Move, TargetKind, TargetRef,
    Uttered, WorldGoal,
};
use crate::features::InteractionContext;

/// Goal used for every enumerated context. Identities never reach the
/// encoder, so one goal covers the whole input space.
pub fn enumeration_goal() -> WorldGoal {
    WorldGoal::new("bowl", "cabinet_upper", "bowl_small")
}

/// Match statuses a physical event can have, per target kind.
pub const EVENT_STATUSES: [(TargetKind, MatchStatus); 5] = [
    (TargetKind::Location, MatchStatus::Correct),
    (TargetKind::Location, MatchStatus::Wrong),
    (TargetKind::Object, MatchStatus::Correct),
    (TargetKind::Object, MatchStatus::Wrong),
    (TargetKind::Object, MatchStatus::RightTypeWrongInstance),
];

/// HEL (action, DA) pairs that occur as oracle inputs.
pub fn hel_alphabet() -> Vec<(HelAction, DialogueAct)> {
    use DialogueAct as Da;
    use HelAction as H;
    let rows: [(H, &[Da]); 7] = [
        (H::RequestOT, &[Da::Instruct, Da::QueryW]),
        (H::RequestL, &[Da::Instruct, Da::QueryW]),
        (H::VerifyOT, &[Da::Check, Da::QueryYn]),
        (H::VerifyL, &[Da::Check, Da::QueryYn, Da::NoUtterance]),
        (H::VerifyO, &[Da::Check, Da::QueryYn, Da::NoUtterance, Da::State]),
        (H::Yes, &[Da::StateY, Da::State]),
        (H::No, &[Da::StateN]),
    ];
    rows.iter()
        .flat_map(|(a, das)| das.iter().map(move |d| (*a, *d)))
        .collect()
}

/// Previous ELD moves the history can carry: an object-type instruction, a
/// location answer and a confirmation.
const PREV_ELD: [(EldAction, DialogueAct); 3] = [
    (EldAction::GiveOT, DialogueAct::Instruct),
    (EldAction::GiveL, DialogueAct::ReplyW),
    (EldAction::Yes, DialogueAct::ReplyY),
];

fn event_target(goal: &WorldGoal, kind: TargetKind, status: MatchStatus) -> TargetRef {
    match (kind, status) {
        (TargetKind::Location, MatchStatus::Correct) => goal.target_location(),
        (TargetKind::Location, _) => TargetRef::location("shelf"),
        (_, MatchStatus::Correct) => goal.target_object(),
        (_, MatchStatus::Wrong) => TargetRef::object("pot_red", "pot"),
        (_, MatchStatus::RightTypeWrongInstance) => TargetRef::object("bowl_large", goal.object_type.clone()),
    }
}

#[derive(Clone)]
enum Event {
    None,
    Pointing(TargetRef),
    Ho(HoType, TargetRef),
}

fn events(goal: &WorldGoal) -> Vec<Event> {
    let mut out = vec![Event::None];
    for (kind, status) in EVENT_STATUSES {
        out.push(Event::Pointing(event_target(goal, kind, status)));
    }
    for &ho in HoType::ALL {
        for (kind, status) in EVENT_STATUSES {
            let ok = match ho {
                HoType::OpenLocation | HoType::CloseLocation => kind == TargetKind::Location,
                HoType::TakeOutObject | HoType::HoldObject => kind == TargetKind::Object,
                HoType::Touch => true,
            };
            if ok {
                out.push(Event::Ho(ho, event_target(goal, kind, status)));
            }
        }
    }
    out
}

/// Every context the oracle is specified on, in a fixed order.
///
/// The product runs over previous actor and previous ELD move, the 13
/// beliefs, the HEL alphabet, both utterance flags and at most one physical
/// event. HEL names the goal entities its flags announce unless an event
/// already refers to that entity. What ELD has named so far is the least
/// history consistent with the rest of the context. Candidates that break a
/// ground rule, fall outside the subtask decision list, or whose input tuple
/// is not in their subtask's row are dropped.
pub fn enumerate_valid_inputs() -> Vec<InteractionContext> {
    let goal = enumeration_goal();
    let events = events(&goal);
    let alphabet = hel_alphabet();
    let mut histories: Vec<(Option<Actor>, Option<(EldAction, DialogueAct)>)> = vec![(None, None)];
    for actor in [Actor::Eld, Actor::Hel] {
        for prev in PREV_ELD {
            histories.push((Some(actor), Some(prev)));
        }
    }

    let mut out = Vec::new();
    for (prev_actor, prev_eld) in &histories {
        for belief in BeliefState::ALL {
            for (action, da) in &alphabet {
                for (ot, l) in [(false, false), (true, false), (false, true), (true, true)] {
                    if *da == DialogueAct::NoUtterance && (ot || l) {
                        continue;
                    }
                    for event in &events {
                        let mut m = Move::hel(*action, *da).with_flags(ot, l);
                        let event_kind = match event {
                            Event::None => None,
                            Event::Pointing(t) => {
                                m = m.pointing_at(t.clone());
                                Some(t.kind())
                            }
                            Event::Ho(ho, t) => {
                                m = m.with_ho(*ho, t.clone());
                                Some(t.kind())
                            }
                        };
                        if ot && event_kind != Some(TargetKind::Object) {
                            m.mentioned.push(goal.target_type());
                        }
                        if l && event_kind != Some(TargetKind::Location) {
                            m.mentioned.push(goal.target_location());
                        }
                        let prev_names_l = prev_eld.is_some_and(|(a, _)| a.utters().l);
                        let eld_uttered = Uttered::new(
                            prev_actor.is_some(),
                            belief.loc() != 0
                                || *action == HelAction::VerifyL
                                || event_kind == Some(TargetKind::Location)
                                || prev_names_l,
                        );
                        let ctx = InteractionContext::from_move(&m, *prev_actor, belief, *prev_eld, eld_uttered, &goal);
                        if ctx.validate().is_err() || check_ground_rules(&ctx).is_err() {
                            continue;
                        }
                        let Ok(subtask) = classify_subtask(&ctx) else {
                            continue;
                        };
                        if subtask.row().accepts_input(&OracleTuple::of_input(&ctx)) {
                            out.push(ctx);
                        }
                    }
                }
            }
        }
    }
    out
}
