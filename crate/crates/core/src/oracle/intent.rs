//! Coarse classes of (dialogue act, action) pairs that tell HEL the same thing.

use super::TuplePattern;
use crate::domain::{DialogueAct, EldAction};
use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IntentClass {
    Pass,
    Inform,
    Correct,
    Confirm,
    Deny,
    Other(DialogueAct),
}

impl fmt::Display for IntentClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IntentClass::Other(da) => write!(f, "Other({da})"),
            other => write!(f, "{other:?}"),
        }
    }
}

fn gives(action: EldAction) -> bool {
    matches!(action, EldAction::GiveOT | EldAction::GiveL | EldAction::GiveOTL)
}

pub fn intent_class(da: DialogueAct, action: EldAction) -> IntentClass {
    use DialogueAct as Da;
    match (da, action) {
        (Da::NoUtterance, EldAction::NoAction) => IntentClass::Pass,
        (Da::Instruct | Da::ReplyW, a) if gives(a) => IntentClass::Inform,
        (Da::ReplyN, a) if gives(a) => IntentClass::Correct,
        (Da::ReplyY | Da::StateY | Da::Acknowledge, EldAction::Yes | EldAction::Acknowledge) => IntentClass::Confirm,
        (Da::StateN | Da::ReplyN, EldAction::No) => IntentClass::Deny,
        (da, _) => IntentClass::Other(da),
    }
}

/// Intents of the concrete (action, DA) pairs a pattern admits, leaving out
/// `Other`.
pub fn pattern_intents(p: &TuplePattern) -> Vec<IntentClass> {
    let mut out = Vec::new();
    for &action in EldAction::ALL {
        let u = action.utters();
        if !(p.ot.matches(u.ot) && p.l.matches(u.l)) {
            continue;
        }
        let c = intent_class(p.da, action);
        if !matches!(c, IntentClass::Other(_)) && !out.contains(&c) {
            out.push(c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use DialogueAct as Da;

    #[test]
    fn spec_examples() {
        assert_eq!(
            intent_class(Da::Instruct, EldAction::GiveOT),
            intent_class(Da::ReplyW, EldAction::GiveOT)
        );
        assert_eq!(
            intent_class(Da::Acknowledge, EldAction::Acknowledge),
            intent_class(Da::StateY, EldAction::Yes)
        );
        assert_ne!(intent_class(Da::QueryW, EldAction::NoAction), intent_class(Da::Instruct, EldAction::GiveOT));
        assert_eq!(intent_class(Da::ReplyN, EldAction::No), IntentClass::Deny);
        assert_eq!(intent_class(Da::ReplyN, EldAction::GiveL), IntentClass::Correct);
    }

    #[test]
    fn total_over_all_pairs() {
        for &da in Da::ALL {
            for &a in EldAction::ALL {
                let _ = intent_class(da, a);
            }
        }
        assert_eq!(intent_class(Da::NoUtterance, EldAction::Yes), IntentClass::Other(Da::NoUtterance));
    }
}
