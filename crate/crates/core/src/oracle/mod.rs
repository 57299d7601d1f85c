//! Rule-based ELD policy over the primitive subtasks of the Find task.
//!
//! The oracle classifies HEL's move into a primitive subtask, updates ELD's
//! belief, and answers with a move whose `(a, b, c)` tuple is permitted by
//! that subtask's row of the transition table. `a` and `b` say whether the
//! move names the object type and the location; `c` is its dialogue act.
//!
//! Subtask decision list (first match wins):
//!
//! | HEL action  | HEL DA              | flags (ot,l) | other                    | subtask     |
//! |-------------|---------------------|--------------|--------------------------|-------------|
//! | RequestOT   | Inst / Q-w          | (0,0)        |                          | EstablishOT |
//! | RequestOT   | Q-w                 | (1,0)        |                          | SpecifyOT   |
//! | RequestL    | Inst / Q-w          | (*,0)        |                          | EstablishL  |
//! | RequestL    | Q-w                 | (*,1)        |                          | SpecifyL    |
//! | VerifyOT    | Chk / Q-yn          | (1,0)        |                          | VerifyOT    |
//! | VerifyL     | Chk / Q-yn          | (0,*)        |                          | VerifyL     |
//! | VerifyL     | NoUtt               | (0,0)        | pointing or H-O          | VerifyL     |
//! | VerifyO     | Chk / Q-yn          | (*,0)        |                          | VerifyO     |
//! | VerifyO     | NoUtt               | (0,0)        | pointing or H-O          | VerifyO     |
//! | VerifyO     | St                  | (*,*)        |                          | VerifyO     |
//! | Yes / No    | St-y / St / St-n    | (*,*)        | previous belief (1,1,*)  | FinishL     |
//!
//! Anything else is unclassifiable; in live play ELD passes.

mod enumerate;
mod intent;
mod tables_doc;

pub use enumerate::{enumerate_valid_inputs, enumeration_goal, hel_alphabet, EVENT_STATUSES};
pub use intent::{intent_class, pattern_intents, IntentClass};
pub use tables_doc::render_tables_markdown;

use crate::domain::{
    belief_update, BeliefState, DialogueAct, EldAction, HelAction, Move, TargetKind, Uttered,
};
use crate::features::{InteractionContext, TargetLabels};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PrimitiveSubtask {
    EstablishOT,
    VerifyOT,
    SpecifyOT,
    EstablishL,
    VerifyL,
    SpecifyL,
    VerifyO,
    FinishL,
}

impl PrimitiveSubtask {
    pub const ALL: [PrimitiveSubtask; 8] = [
        PrimitiveSubtask::EstablishOT,
        PrimitiveSubtask::VerifyOT,
        PrimitiveSubtask::SpecifyOT,
        PrimitiveSubtask::EstablishL,
        PrimitiveSubtask::VerifyL,
        PrimitiveSubtask::SpecifyL,
        PrimitiveSubtask::VerifyO,
        PrimitiveSubtask::FinishL,
    ];

    pub fn label(self) -> &'static str {
        match self {
            PrimitiveSubtask::EstablishOT => "Establish(OT)",
            PrimitiveSubtask::VerifyOT => "Verify(OT)",
            PrimitiveSubtask::SpecifyOT => "Specify(OT)",
            PrimitiveSubtask::EstablishL => "Establish(L)",
            PrimitiveSubtask::VerifyL => "Verify(L)",
            PrimitiveSubtask::SpecifyL => "Specify(L)",
            PrimitiveSubtask::VerifyO => "Verify(O)",
            PrimitiveSubtask::FinishL => "Finish(L)",
        }
    }

    pub fn row(self) -> &'static TableRow {
        TRANSITION_TABLE
            .iter()
            .find(|r| r.subtask == self)
            .expect("every subtask has a table row")
    }
}

impl fmt::Display for PrimitiveSubtask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Concrete `(a, b, c)` tuple of a move. `NoUtterance` stands for "no move".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct OracleTuple {
    pub ot: bool,
    pub l: bool,
    pub da: DialogueAct,
}

impl OracleTuple {
    /// Tuple of an ELD response, with the flags read off the action.
    pub fn of_eld(action: EldAction, da: DialogueAct) -> Self {
        let u = action.utters();
        OracleTuple { ot: u.ot, l: u.l, da }
    }

    pub fn of_input(ctx: &InteractionContext) -> Self {
        OracleTuple {
            ot: ctx.uttered_ot,
            l: ctx.uttered_l,
            da: ctx.hel_da,
        }
    }
}

impl fmt::Display for OracleTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.ot as u8, self.l as u8, da_symbol(self.da))
    }
}

fn da_symbol(da: DialogueAct) -> &'static str {
    match da {
        DialogueAct::NoUtterance => "-",
        DialogueAct::Instruct => "Inst",
        DialogueAct::Acknowledge => "Ack",
        DialogueAct::QueryW => "Qw",
        DialogueAct::QueryYn => "Qyn",
        DialogueAct::ReplyW => "Rw",
        DialogueAct::ReplyY => "Ry",
        DialogueAct::ReplyN => "Rn",
        DialogueAct::Check => "Chk",
        DialogueAct::Explain => "Exp",
        DialogueAct::Align => "Algn",
        DialogueAct::StateY => "Sty",
        DialogueAct::StateN => "Stn",
        DialogueAct::State => "St",
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Flag {
    Zero,
    One,
    Any,
}

impl Flag {
    pub fn matches(self, v: bool) -> bool {
        match self {
            Flag::Zero => !v,
            Flag::One => v,
            Flag::Any => true,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            Flag::Zero => "0",
            Flag::One => "1",
            Flag::Any => "*",
        }
    }

    /// Concrete values this flag admits.
    pub fn values(self) -> &'static [bool] {
        match self {
            Flag::Zero => &[false],
            Flag::One => &[true],
            Flag::Any => &[false, true],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TuplePattern {
    pub ot: Flag,
    pub l: Flag,
    pub da: DialogueAct,
}

impl TuplePattern {
    pub fn matches(&self, t: &OracleTuple) -> bool {
        self.ot.matches(t.ot) && self.l.matches(t.l) && self.da == t.da
    }
}

impl fmt::Display for TuplePattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.ot.symbol(), self.l.symbol(), da_symbol(self.da))
    }
}

const fn pat(ot: Flag, l: Flag, da: DialogueAct) -> TuplePattern {
    TuplePattern { ot, l, da }
}

#[derive(Debug, Clone, Copy)]
pub struct TableRow {
    pub subtask: PrimitiveSubtask,
    pub inputs: &'static [TuplePattern],
    pub outputs: &'static [TuplePattern],
}

impl TableRow {
    pub fn accepts_input(&self, t: &OracleTuple) -> bool {
        self.inputs.iter().any(|p| p.matches(t))
    }

    pub fn permits(&self, t: &OracleTuple) -> bool {
        self.outputs.iter().any(|p| p.matches(t))
    }
}

use DialogueAct as Da;
use Flag::{Any, One, Zero};

/// Permitted ELD responses per primitive subtask.
pub static TRANSITION_TABLE: [TableRow; 8] = [
    TableRow {
        subtask: PrimitiveSubtask::EstablishOT,
        inputs: &[pat(Zero, Zero, Da::Instruct), pat(Zero, Zero, Da::QueryW)],
        outputs: &[pat(One, Any, Da::Instruct), pat(One, Any, Da::ReplyW)],
    },
    TableRow {
        subtask: PrimitiveSubtask::VerifyOT,
        inputs: &[pat(One, Zero, Da::Check), pat(One, Zero, Da::QueryYn)],
        outputs: &[
            pat(Any, Zero, Da::ReplyY),
            pat(Any, Zero, Da::ReplyN),
            pat(One, Zero, Da::Instruct),
            pat(One, Zero, Da::ReplyW),
        ],
    },
    TableRow {
        subtask: PrimitiveSubtask::SpecifyOT,
        inputs: &[pat(Any, Zero, Da::QueryW)],
        outputs: &[pat(Any, Zero, Da::Instruct), pat(Any, Zero, Da::ReplyW)],
    },
    TableRow {
        subtask: PrimitiveSubtask::EstablishL,
        inputs: &[pat(Any, Zero, Da::Instruct), pat(Any, Zero, Da::QueryW)],
        outputs: &[pat(Any, Any, Da::Instruct), pat(Any, Any, Da::ReplyW)],
    },
    TableRow {
        subtask: PrimitiveSubtask::VerifyL,
        inputs: &[
            pat(Zero, Zero, Da::NoUtterance),
            pat(Zero, Any, Da::Check),
            pat(Zero, Any, Da::QueryYn),
        ],
        outputs: &[
            pat(Zero, Any, Da::ReplyY),
            pat(Zero, Any, Da::ReplyN),
            pat(Any, Any, Da::NoUtterance),
            pat(Any, Any, Da::ReplyW),
            pat(Any, Any, Da::Instruct),
        ],
    },
    TableRow {
        subtask: PrimitiveSubtask::SpecifyL,
        inputs: &[pat(Any, One, Da::QueryW)],
        outputs: &[pat(Any, Any, Da::Instruct), pat(Any, Any, Da::ReplyW)],
    },
    TableRow {
        subtask: PrimitiveSubtask::VerifyO,
        inputs: &[
            pat(Any, Zero, Da::NoUtterance),
            pat(Any, Zero, Da::Check),
            pat(Any, Zero, Da::QueryYn),
            pat(Any, Any, Da::State),
        ],
        outputs: &[
            pat(Any, Zero, Da::ReplyY),
            pat(Any, Zero, Da::ReplyN),
            pat(Any, Zero, Da::ReplyW),
            pat(Any, Zero, Da::Instruct),
        ],
    },
    TableRow {
        subtask: PrimitiveSubtask::FinishL,
        inputs: &[pat(Any, Any, Da::StateY), pat(Any, Any, Da::State), pat(Any, Any, Da::StateN)],
        outputs: &[pat(Zero, Zero, Da::Acknowledge)],
    },
];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error("no primitive subtask matches HEL move {action} / {da}")]
    UnclassifiableContext { action: HelAction, da: DialogueAct },
    #[error("ground rule violated: {0}")]
    GroundRuleViolation(&'static str),
}

fn has_event(ctx: &InteractionContext) -> bool {
    ctx.hel_pointing.is_some() || ctx.hel_ho.is_some()
}

pub fn classify_subtask(ctx: &InteractionContext) -> Result<PrimitiveSubtask, OracleError> {
    use PrimitiveSubtask as S;
    let (ot, l, da) = (ctx.uttered_ot, ctx.uttered_l, ctx.hel_da);
    let asks = matches!(da, Da::Instruct | Da::QueryW);
    let checks = matches!(da, Da::Check | Da::QueryYn);
    let silent_event = da == Da::NoUtterance && has_event(ctx);
    let b = ctx.prev_belief;
    let found = match ctx.hel_action {
        HelAction::RequestOT if asks && !ot && !l => Some(S::EstablishOT),
        HelAction::RequestOT if da == Da::QueryW && ot && !l => Some(S::SpecifyOT),
        HelAction::RequestL if asks && !l => Some(S::EstablishL),
        HelAction::RequestL if da == Da::QueryW && l => Some(S::SpecifyL),
        HelAction::VerifyOT if checks && ot && !l => Some(S::VerifyOT),
        HelAction::VerifyL if checks && !ot => Some(S::VerifyL),
        HelAction::VerifyL if silent_event => Some(S::VerifyL),
        HelAction::VerifyO if (checks && !l) || silent_event || da == Da::State => Some(S::VerifyO),
        HelAction::Yes | HelAction::No
            if matches!(da, Da::StateY | Da::State | Da::StateN) && b.ot() == 1 && b.loc() == 1 =>
        {
            Some(S::FinishL)
        }
        _ => None,
    };
    found.ok_or(OracleError::UnclassifiableContext {
        action: ctx.hel_action,
        da: ctx.hel_da,
    })
}

/// The ground rules every meaningful input satisfies.
pub fn check_ground_rules(ctx: &InteractionContext) -> Result<(), OracleError> {
    use OracleError::GroundRuleViolation as V;
    let b = ctx.prev_belief;
    let named = ctx.eld_uttered;
    if ctx.prev_actor.is_none() && (b != BeliefState::INITIAL || named != Uttered::NONE) {
        return Err(V("a trial starts from (0,0,0) with nothing named"));
    }
    if b.ot() != 0 && !named.ot {
        return Err(V("object-type belief cannot leave 0 before ELD names the object type"));
    }
    if b.loc() != 0 && !named.l {
        return Err(V("location belief cannot leave 0 before ELD names the location"));
    }
    if b.obj() != 0 && b.ot() != 1 {
        return Err(V("object belief cannot leave 0 before the object type is known"));
    }
    match ctx.hel_action {
        HelAction::VerifyOT if !named.ot => return Err(V("HEL cannot verify the object type before ELD names it")),
        HelAction::VerifyL if !named.l => return Err(V("HEL cannot verify the location before ELD names it")),
        _ => {}
    }
    let event_kinds = ctx
        .hel_pointing
        .iter()
        .map(|p| p.target.kind())
        .chain(ctx.hel_ho.iter().map(|h| h.target.kind()));
    for kind in event_kinds {
        let allowed = match ctx.hel_action {
            HelAction::VerifyOT | HelAction::VerifyO => kind == TargetKind::Object,
            HelAction::VerifyL => kind == TargetKind::Location,
            _ => false,
        };
        if !allowed {
            return Err(V("HEL points and acts on things only to verify the matching entity"));
        }
    }
    Ok(())
}

/// Context ELD answers when it opens a trial: nothing has happened yet and
/// the HEL slot holds an instruction-style request for the object type.
pub fn opening_context(goal: &crate::domain::WorldGoal) -> InteractionContext {
    InteractionContext::from_move(
        &Move::hel(HelAction::RequestOT, Da::Instruct),
        None,
        BeliefState::INITIAL,
        None,
        Uttered::NONE,
        goal,
    )
}

/// How the oracle picks among permitted alternatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OracleMode {
    /// Always the first alternative of the canonical ordering.
    #[default]
    Canonical,
    /// Swaps between intent-equivalent alternatives (e.g. Instruct vs
    /// Reply-w) by a hash of the context and the seed.
    Diverse { seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleResponse {
    /// `None` when ELD passes and HEL keeps the floor.
    pub eld_move: Option<Move>,
    pub next_belief: BeliefState,
    pub subtask: Option<PrimitiveSubtask>,
}

impl OracleResponse {
    pub fn action(&self) -> EldAction {
        self.eld_move.as_ref().map_or(EldAction::NoAction, |m| m.eld_action_or_none())
    }

    pub fn da(&self) -> DialogueAct {
        self.eld_move.as_ref().map_or(DialogueAct::NoUtterance, |m| m.da)
    }

    pub fn tuple(&self) -> OracleTuple {
        OracleTuple::of_eld(self.action(), self.da())
    }

    pub fn targets(&self) -> TargetLabels {
        TargetLabels::new(self.action(), self.da(), self.next_belief)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Oracle {
    pub mode: OracleMode,
}

impl Oracle {
    pub fn new(mode: OracleMode) -> Self {
        Oracle { mode }
    }

    /// Strict response: the context must satisfy the ground rules and map to
    /// a primitive subtask.
    pub fn respond(&self, ctx: &InteractionContext) -> Result<OracleResponse, OracleError> {
        check_ground_rules(ctx)?;
        let subtask = classify_subtask(ctx)?;
        Ok(self.answer(ctx, subtask))
    }

    /// Response for live play: unclassifiable HEL moves get a pass, and the
    /// ground rules are not enforced.
    pub fn respond_live(&self, ctx: &InteractionContext) -> OracleResponse {
        match classify_subtask(ctx) {
            Ok(subtask) => self.answer(ctx, subtask),
            Err(_) => OracleResponse {
                eld_move: None,
                next_belief: self.next_belief(ctx),
                subtask: None,
            },
        }
    }

    pub fn next_belief(&self, ctx: &InteractionContext) -> BeliefState {
        belief_update(ctx.prev_belief, &ctx.hel_move(), &ctx.goal, ctx.eld_uttered)
    }

    fn answer(&self, ctx: &InteractionContext, subtask: PrimitiveSubtask) -> OracleResponse {
        let next = self.next_belief(ctx);
        let mut choice = canonical_choice(ctx, subtask, next);
        if let OracleMode::Diverse { seed } = self.mode {
            if context_hash(ctx, seed) & 1 == 1 {
                choice = alternative(choice);
            }
        }
        let eld_move = match choice {
            (EldAction::NoAction, _) => None,
            (action, da) => Some(eld_move(action, da, &ctx.goal)),
        };
        OracleResponse {
            eld_move,
            next_belief: next,
            subtask: Some(subtask),
        }
    }
}

/// ELD move carrying the goal entities it names.
pub fn eld_move(action: EldAction, da: DialogueAct, goal: &crate::domain::WorldGoal) -> Move {
    let mut m = Move::eld(action, da);
    if m.uttered_ot {
        m.mentioned.push(goal.target_type());
    }
    if m.uttered_l {
        m.mentioned.push(goal.target_location());
    }
    m
}

/// First alternative of the canonical ordering for this context.
fn canonical_choice(ctx: &InteractionContext, subtask: PrimitiveSubtask, next: BeliefState) -> (EldAction, DialogueAct) {
    use PrimitiveSubtask as S;
    let prev = ctx.prev_belief;
    // answer a question with Reply-w unless ELD is telling it again
    let inform_da = |component: u8| {
        if ctx.hel_da == Da::Instruct || component != 0 {
            Da::Instruct
        } else {
            Da::ReplyW
        }
    };
    let give_location = EldAction::giving(Uttered::new(next.ot() != 1, true));
    match subtask {
        S::EstablishOT => (EldAction::GiveOT, inform_da(prev.ot())),
        S::SpecifyOT => (EldAction::GiveOT, Da::ReplyW),
        S::EstablishL => (give_location, inform_da(prev.loc())),
        S::SpecifyL => (give_location, Da::ReplyW),
        S::VerifyOT if next.ot() == 1 => (EldAction::Yes, Da::ReplyY),
        S::VerifyOT => (EldAction::GiveOT, Da::Instruct),
        S::VerifyL if next.loc() == 1 && ctx.hel_da == Da::NoUtterance => (EldAction::NoAction, Da::NoUtterance),
        S::VerifyL if next.loc() == 1 => (EldAction::Yes, Da::ReplyY),
        S::VerifyL => (give_location, Da::Instruct),
        S::VerifyO if next.obj() == 1 => (EldAction::Yes, Da::ReplyY),
        S::VerifyO => (EldAction::GiveOT, Da::Instruct),
        S::FinishL => (EldAction::Acknowledge, Da::Acknowledge),
    }
}

/// The intent-equivalent second alternative, where the table has one.
fn alternative(choice: (EldAction, DialogueAct)) -> (EldAction, DialogueAct) {
    match choice {
        (a, Da::Instruct) => (a, Da::ReplyW),
        (a, Da::ReplyW) => (a, Da::Instruct),
        (EldAction::NoAction, Da::NoUtterance) => (EldAction::Yes, Da::ReplyY),
        other => other,
    }
}

fn context_hash(ctx: &InteractionContext, seed: u64) -> u64 {
    // FNV-1a over the seed and the categorical content of the context
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    let mut feed = |bytes: &[u8]| {
        for b in bytes {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    feed(&seed.to_le_bytes());
    feed(&ctx.prev_belief.triple());
    feed(&[
        ctx.hel_action.index() as u8,
        ctx.hel_da.index() as u8,
        ctx.uttered_ot as u8,
        ctx.uttered_l as u8,
        ctx.prev_eld_action.index() as u8,
        ctx.prev_eld_da.index() as u8,
        ctx.prev_actor.map_or(2, |a| a.index() as u8),
    ]);
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{Actor, HoType, TargetRef, WorldGoal};

    fn goal() -> WorldGoal {
        WorldGoal::new("bowl", "cabinet", "bowl_small")
    }

    fn ctx(m: &Move, prev: BeliefState, named: Uttered) -> InteractionContext {
        InteractionContext::from_move(
            m,
            Some(Actor::Eld),
            prev,
            Some((EldAction::GiveOT, Da::Instruct)),
            named,
            &goal(),
        )
    }

    fn b(ot: u8, loc: u8, obj: u8) -> BeliefState {
        BeliefState::new(ot, loc, obj).unwrap()
    }

    #[test]
    fn classify_examples() {
        let c = ctx(&Move::hel(HelAction::RequestOT, Da::QueryW), b(0, 0, 0), Uttered::NONE);
        assert_eq!(classify_subtask(&c).unwrap(), PrimitiveSubtask::EstablishOT);
        let m = Move::hel(HelAction::VerifyOT, Da::Check).mentioning(goal().target_type());
        let c = ctx(&m, b(1, 0, 0), Uttered::new(true, false));
        assert_eq!(classify_subtask(&c).unwrap(), PrimitiveSubtask::VerifyOT);
        let c = ctx(&Move::hel(HelAction::Yes, Da::StateY), b(1, 1, 1), Uttered::new(true, true));
        assert_eq!(classify_subtask(&c).unwrap(), PrimitiveSubtask::FinishL);
        let c = ctx(&Move::hel_idle(), b(1, 1, 1), Uttered::new(true, true));
        assert!(matches!(classify_subtask(&c), Err(OracleError::UnclassifiableContext { .. })));
    }

    #[test]
    fn establish_ot_answers_query_with_reply_w() {
        let c = InteractionContext::from_move(
            &Move::hel(HelAction::RequestOT, Da::QueryW),
            None,
            BeliefState::INITIAL,
            None,
            Uttered::NONE,
            &goal(),
        );
        let r = Oracle::default().respond(&c).unwrap();
        assert_eq!(r.da(), Da::ReplyW);
        assert_eq!(r.action(), EldAction::GiveOT);
        assert_eq!(r.tuple(), OracleTuple { ot: true, l: false, da: Da::ReplyW });
        assert_eq!(r.next_belief, BeliefState::INITIAL);
    }

    #[test]
    fn verify_ot_correct_gets_yes() {
        let m = Move::hel(HelAction::VerifyOT, Da::Check).mentioning(goal().target_type());
        let r = Oracle::default().respond(&ctx(&m, b(0, 0, 0), Uttered::new(true, false))).unwrap();
        assert_eq!((r.action(), r.da()), (EldAction::Yes, Da::ReplyY));
        assert_eq!(r.tuple(), OracleTuple { ot: false, l: false, da: Da::ReplyY });
        assert_eq!(r.next_belief, b(1, 0, 0));
    }

    #[test]
    fn verify_ot_wrong_gets_correction() {
        let m = Move::hel(HelAction::VerifyOT, Da::Check).mentioning(TargetRef::object_type("pot"));
        let r = Oracle::default().respond(&ctx(&m, b(1, 0, 0), Uttered::new(true, false))).unwrap();
        assert_eq!((r.action(), r.da()), (EldAction::GiveOT, Da::Instruct));
        assert_eq!(r.next_belief, b(2, 0, 0));
    }

    #[test]
    fn finish_is_acknowledged() {
        let c = ctx(&Move::hel(HelAction::Yes, Da::StateY), b(1, 1, 1), Uttered::new(true, true));
        let r = Oracle::default().respond(&c).unwrap();
        assert_eq!(r.tuple(), OracleTuple { ot: false, l: false, da: Da::Acknowledge });
        assert_eq!(r.action(), EldAction::Acknowledge);
    }

    #[test]
    fn silent_correct_open_is_a_pass() {
        let m = Move::hel(HelAction::VerifyL, Da::NoUtterance).with_ho(HoType::OpenLocation, goal().target_location());
        let r = Oracle::default().respond(&ctx(&m, b(1, 1, 0), Uttered::new(true, true))).unwrap();
        assert!(r.eld_move.is_none());
        assert_eq!(r.tuple().da, Da::NoUtterance);
    }

    #[test]
    fn ground_rules() {
        let m = Move::hel(HelAction::VerifyOT, Da::Check).mentioning(goal().target_type());
        let c = ctx(&m, b(0, 0, 0), Uttered::NONE);
        assert!(matches!(Oracle::default().respond(&c), Err(OracleError::GroundRuleViolation(_))));
        let m = Move::hel(HelAction::RequestL, Da::QueryW).pointing_at(goal().target_location());
        let c = ctx(&m, b(1, 0, 0), Uttered::new(true, true));
        assert!(check_ground_rules(&c).is_err());
    }

    #[test]
    fn live_pass_keeps_belief_for_idle_hel() {
        let c = ctx(&Move::hel_idle(), b(1, 1, 0), Uttered::new(true, true));
        let r = Oracle::default().respond_live(&c);
        assert!(r.eld_move.is_none());
        assert_eq!(r.next_belief, b(1, 1, 0));
    }

    #[test]
    fn diverse_mode_stays_within_table() {
        let oracle = Oracle::new(OracleMode::Diverse { seed: 11 });
        for c in enumerate_valid_inputs() {
            let r = oracle.respond(&c).unwrap();
            assert!(r.subtask.unwrap().row().permits(&r.tuple()), "{c:?}");
        }
    }
}
