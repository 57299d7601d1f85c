//! Fixed-width encoding of the interaction context.
//!
//! Layout (76 columns, all 0.0 or 1.0):
//!
//! | block            | width | content                                          |
//! |------------------|-------|--------------------------------------------------|
//! | prev_actor       | 2     | (0,0) trial start, (1,0) ELD, (0,1) HEL          |
//! | uttered_ot       | 1     | HEL's move names an object type                  |
//! | uttered_l        | 1     | HEL's move names a location                      |
//! | prev_belief      | 13    | one-hot over the canonical belief order          |
//! | pointing         | 5     | location, object, correct, wrong, right type     |
//! | ho               | 10    | pointing-style match block + one-hot H-O type    |
//! | hel_action       | 9     | one-hot                                          |
//! | hel_da           | 14    | one-hot                                          |
//! | prev_eld_action  | 7     | one-hot                                          |
//! | prev_eld_da      | 14    | one-hot                                          |
//!
//! Only match statuses are encoded, never goal or target identities.

use crate::domain::{
    Actor, BeliefState, DialogueAct, DomainError, EldAction, HapticOstensiveEvent, HelAction, HoType,
    MatchStatus, Move, PointingEvent, TargetKind, TargetRef, Uttered, WorldGoal,
};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::OnceLock;
use thiserror::Error;

pub const INPUT_DIM: usize = 76;
pub const ACTION_CLASSES: usize = EldAction::COUNT;
pub const DA_CLASSES: usize = DialogueAct::COUNT;
pub const STATE_CLASSES: usize = BeliefState::COUNT;
pub const OUTPUT_DIM: usize = ACTION_CLASSES + DA_CLASSES + STATE_CLASSES;

/// Block names and widths in column order.
pub const BLOCKS: [(&str, usize); 10] = [
    ("prev_actor", 2),
    ("uttered_ot", 1),
    ("uttered_l", 1),
    ("prev_belief", 13),
    ("pointing", 5),
    ("ho", 10),
    ("hel_action", 9),
    ("hel_da", 14),
    ("prev_eld_action", 7),
    ("prev_eld_da", 14),
];

const _: () = {
    let mut sum = 0;
    let mut i = 0;
    while i < BLOCKS.len() {
        sum += BLOCKS[i].1;
        i += 1;
    }
    assert!(sum == INPUT_DIM);
};

/// Short hex digest of the column layout, embedded in corpus and model files.
pub fn feature_schema_hash() -> &'static str {
    static HASH: OnceLock<String> = OnceLock::new();
    HASH.get_or_init(|| {
        let mut h = Sha256::new();
        for (name, width) in BLOCKS {
            h.update(format!("{name}:{width};"));
        }
        h.update(b"belief:000,010,020,100,101,102,110,111,112,120,200,210,220;");
        h.update(b"ho:open,close,touch,takeout,hold;");
        let digest = h.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    })
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FeatureError {
    #[error("target '{0}' has no decidable relation to the goal")]
    MatchUndecidable(String),
    #[error("malformed vector in block {block}: {reason}")]
    MalformedVector { block: &'static str, reason: String },
    #[error("invalid context: {0}")]
    InvalidContext(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
}

fn malformed(block: &'static str, reason: impl Into<String>) -> FeatureError {
    FeatureError::MalformedVector {
        block,
        reason: reason.into(),
    }
}

/// Everything the simulator knows when HEL has just moved and ELD is about
/// to respond.
///
/// `hel_mentioned` and `eld_uttered` are carried alongside the encoded
/// fields (like `goal`) because the belief update needs them; they do not
/// appear in the feature vector.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionContext {
    pub prev_actor: Option<Actor>,
    pub uttered_ot: bool,
    pub uttered_l: bool,
    pub prev_belief: BeliefState,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hel_pointing: Option<PointingEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hel_ho: Option<HapticOstensiveEvent>,
    pub hel_action: HelAction,
    pub hel_da: DialogueAct,
    pub prev_eld_action: EldAction,
    pub prev_eld_da: DialogueAct,
    pub goal: WorldGoal,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub hel_mentioned: Vec<TargetRef>,
    #[serde(default)]
    pub eld_uttered: Uttered,
}

impl InteractionContext {
    /// Context for HEL's move given the dialogue history so far.
    pub fn from_move(
        hel_move: &Move,
        prev_actor: Option<Actor>,
        prev_belief: BeliefState,
        prev_eld: Option<(EldAction, DialogueAct)>,
        eld_uttered: Uttered,
        goal: &WorldGoal,
    ) -> Self {
        let (prev_eld_action, prev_eld_da) = prev_eld.unwrap_or((EldAction::NoAction, DialogueAct::NoUtterance));
        InteractionContext {
            prev_actor,
            uttered_ot: hel_move.uttered_ot,
            uttered_l: hel_move.uttered_l,
            prev_belief,
            hel_pointing: hel_move.pointing.clone(),
            hel_ho: hel_move.ho.clone(),
            hel_action: hel_move.hel_action_or_none(),
            hel_da: hel_move.da,
            prev_eld_action,
            prev_eld_da,
            goal: goal.clone(),
            hel_mentioned: hel_move.mentioned.clone(),
            eld_uttered,
        }
    }

    /// Reassembles HEL's move.
    pub fn hel_move(&self) -> Move {
        Move {
            actor: Actor::Hel,
            da: self.hel_da,
            eld_action: None,
            hel_action: Some(self.hel_action),
            pointing: self.hel_pointing.clone(),
            ho: self.hel_ho.clone(),
            uttered_ot: self.uttered_ot,
            uttered_l: self.uttered_l,
            mentioned: self.hel_mentioned.clone(),
        }
    }

    /// Replaces HEL's move, keeping the history fields.
    pub fn set_hel_move(&mut self, m: &Move) {
        self.uttered_ot = m.uttered_ot;
        self.uttered_l = m.uttered_l;
        self.hel_pointing = m.pointing.clone();
        self.hel_ho = m.ho.clone();
        self.hel_action = m.hel_action_or_none();
        self.hel_da = m.da;
        self.hel_mentioned = m.mentioned.clone();
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.prev_actor.is_none()
            && (self.prev_eld_action != EldAction::NoAction || self.prev_eld_da != DialogueAct::NoUtterance)
        {
            return Err(FeatureError::InvalidContext(
                "a trial-start context cannot have a previous ELD move".into(),
            ));
        }
        if (self.prev_eld_action == EldAction::NoAction) != (self.prev_eld_da == DialogueAct::NoUtterance) {
            return Err(FeatureError::InvalidContext(
                "previous ELD action and dialogue act must both be empty or both present".into(),
            ));
        }
        self.goal.validate()?;
        self.hel_move().validate()?;
        Ok(())
    }
}

/// A 76-column binary feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedInput(Vec<f64>);

impl EncodedInput {
    /// Wraps raw values without checking them; see [`decode_input`].
    pub fn from_vec(values: Vec<f64>) -> Self {
        EncodedInput(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn ones(&self) -> usize {
        self.0.iter().filter(|v| **v == 1.0).count()
    }

    /// Compact "0101..." rendering, used for golden vectors.
    pub fn bit_string(&self) -> String {
        self.0.iter().map(|v| if *v == 1.0 { '1' } else { '0' }).collect()
    }
}

/// Supervised targets: ELD's action, dialogue act and next belief index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetLabels {
    pub eld_action: usize,
    pub eld_da: usize,
    pub next_belief: usize,
}

impl TargetLabels {
    pub fn new(action: EldAction, da: DialogueAct, next: BeliefState) -> Self {
        TargetLabels {
            eld_action: action.index(),
            eld_da: da.index(),
            next_belief: next.index(),
        }
    }

    pub fn validate(&self) -> Result<(), FeatureError> {
        EldAction::from_index(self.eld_action)?;
        DialogueAct::from_index(self.eld_da)?;
        BeliefState::from_index(self.next_belief)?;
        if (self.eld_action == 0) != (self.eld_da == 0) {
            return Err(FeatureError::InvalidContext(
                "no-action and no-utterance targets must coincide".into(),
            ));
        }
        Ok(())
    }

    pub fn action(&self) -> EldAction {
        EldAction::from_index(self.eld_action).expect("validated action index")
    }

    pub fn da(&self) -> DialogueAct {
        DialogueAct::from_index(self.eld_da).expect("validated dialogue-act index")
    }

    pub fn belief(&self) -> BeliefState {
        BeliefState::from_index(self.next_belief).expect("validated belief index")
    }
}

pub fn encode_prev_actor(prev: Option<Actor>) -> [f64; 2] {
    match prev {
        None => [0.0, 0.0],
        Some(Actor::Eld) => [1.0, 0.0],
        Some(Actor::Hel) => [0.0, 1.0],
    }
}

fn match_block(target: &TargetRef, goal: &WorldGoal) -> Result<[f64; 5], FeatureError> {
    let undecidable = || FeatureError::MatchUndecidable(target.id().to_string());
    let status = goal.match_target(target).ok_or_else(undecidable)?;
    let mut v = [0.0; 5];
    match target.kind() {
        TargetKind::Location => v[0] = 1.0,
        TargetKind::Object => v[1] = 1.0,
        TargetKind::ObjectType => return Err(undecidable()),
    }
    match status {
        MatchStatus::Correct => v[2] = 1.0,
        MatchStatus::Wrong => v[3] = 1.0,
        MatchStatus::RightTypeWrongInstance => v[4] = 1.0,
    }
    Ok(v)
}

pub fn encode_pointing(event: Option<&PointingEvent>, goal: &WorldGoal) -> Result<[f64; 5], FeatureError> {
    match event {
        None => Ok([0.0; 5]),
        Some(p) => match_block(&p.target, goal),
    }
}

pub fn encode_ho(event: Option<&HapticOstensiveEvent>, goal: &WorldGoal) -> Result<[f64; 10], FeatureError> {
    let mut v = [0.0; 10];
    if let Some(ho) = event {
        ho.validate()?;
        v[..5].copy_from_slice(&match_block(&ho.target, goal)?);
        v[5 + ho.ho_type.index()] = 1.0;
    }
    Ok(v)
}

fn push_one_hot(out: &mut Vec<f64>, index: usize, width: usize) {
    let start = out.len();
    out.resize(start + width, 0.0);
    out[start + index] = 1.0;
}

pub fn encode_input(ctx: &InteractionContext) -> Result<EncodedInput, FeatureError> {
    let mut v = Vec::with_capacity(INPUT_DIM);
    v.extend_from_slice(&encode_prev_actor(ctx.prev_actor));
    v.push(if ctx.uttered_ot { 1.0 } else { 0.0 });
    v.push(if ctx.uttered_l { 1.0 } else { 0.0 });
    push_one_hot(&mut v, ctx.prev_belief.index(), STATE_CLASSES);
    v.extend_from_slice(&encode_pointing(ctx.hel_pointing.as_ref(), &ctx.goal)?);
    v.extend_from_slice(&encode_ho(ctx.hel_ho.as_ref(), &ctx.goal)?);
    push_one_hot(&mut v, ctx.hel_action.index(), HelAction::COUNT);
    push_one_hot(&mut v, ctx.hel_da.index(), DialogueAct::COUNT);
    push_one_hot(&mut v, ctx.prev_eld_action.index(), EldAction::COUNT);
    push_one_hot(&mut v, ctx.prev_eld_da.index(), DialogueAct::COUNT);
    debug_assert_eq!(v.len(), INPUT_DIM);
    Ok(EncodedInput(v))
}

/// A physical event as the classifier sees it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EventSummary {
    pub kind: TargetKind,
    pub status: MatchStatus,
}

/// The categorical content of an encoded vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct InputSummary {
    pub prev_actor: Option<Actor>,
    pub uttered_ot: bool,
    pub uttered_l: bool,
    pub prev_belief: BeliefState,
    pub pointing: Option<EventSummary>,
    pub ho: Option<(EventSummary, HoType)>,
    pub hel_action: HelAction,
    pub hel_da: DialogueAct,
    pub prev_eld_action: EldAction,
    pub prev_eld_da: DialogueAct,
}

impl InputSummary {
    /// Summary of a context without going through the vector.
    pub fn of(ctx: &InteractionContext) -> Result<Self, FeatureError> {
        let event = |t: &TargetRef| -> Result<EventSummary, FeatureError> {
            let status = ctx
                .goal
                .match_target(t)
                .ok_or_else(|| FeatureError::MatchUndecidable(t.id().to_string()))?;
            Ok(EventSummary { kind: t.kind(), status })
        };
        Ok(InputSummary {
            prev_actor: ctx.prev_actor,
            uttered_ot: ctx.uttered_ot,
            uttered_l: ctx.uttered_l,
            prev_belief: ctx.prev_belief,
            pointing: ctx.hel_pointing.as_ref().map(|p| event(&p.target)).transpose()?,
            ho: ctx
                .hel_ho
                .as_ref()
                .map(|h| event(&h.target).map(|e| (e, h.ho_type)))
                .transpose()?,
            hel_action: ctx.hel_action,
            hel_da: ctx.hel_da,
            prev_eld_action: ctx.prev_eld_action,
            prev_eld_da: ctx.prev_eld_da,
        })
    }
}

fn one_hot_index(block: &'static str, values: &[f64]) -> Result<usize, FeatureError> {
    let ones: Vec<usize> = values
        .iter()
        .enumerate()
        .filter(|(_, v)| **v == 1.0)
        .map(|(i, _)| i)
        .collect();
    match ones.as_slice() {
        [i] => Ok(*i),
        _ => Err(malformed(block, format!("expected exactly one active entry, found {}", ones.len()))),
    }
}

fn decode_match(block: &'static str, v: &[f64]) -> Result<Option<EventSummary>, FeatureError> {
    let kind = match (v[0] == 1.0, v[1] == 1.0) {
        (false, false) => {
            if v[2..5].iter().any(|x| *x != 0.0) {
                return Err(malformed(block, "match entries set without an event"));
            }
            return Ok(None);
        }
        (true, false) => TargetKind::Location,
        (false, true) => TargetKind::Object,
        (true, true) => return Err(malformed(block, "event directed at both a location and an object")),
    };
    let status = match one_hot_index(block, &v[2..5])? {
        0 => MatchStatus::Correct,
        1 => MatchStatus::Wrong,
        _ => MatchStatus::RightTypeWrongInstance,
    };
    if kind == TargetKind::Location && status == MatchStatus::RightTypeWrongInstance {
        return Err(malformed(block, "right-type-wrong-instance applies to objects only"));
    }
    Ok(Some(EventSummary { kind, status }))
}

/// Validates every block invariant and recovers the categorical fields.
pub fn decode_input(input: &EncodedInput) -> Result<InputSummary, FeatureError> {
    let v = input.values();
    if v.len() != INPUT_DIM {
        return Err(malformed("length", format!("expected {INPUT_DIM} columns, found {}", v.len())));
    }
    let mut offsets = [0usize; 11];
    for (i, (_, w)) in BLOCKS.iter().enumerate() {
        offsets[i + 1] = offsets[i] + w;
    }
    for (i, x) in v.iter().enumerate() {
        if *x != 0.0 && *x != 1.0 {
            let block = BLOCKS[offsets.iter().rposition(|o| *o <= i).unwrap().min(9)].0;
            return Err(malformed(block, format!("non-binary entry {x} at column {i}")));
        }
    }
    let block = |i: usize| &v[offsets[i]..offsets[i + 1]];

    let prev_actor = match (block(0)[0] == 1.0, block(0)[1] == 1.0) {
        (false, false) => None,
        (true, false) => Some(Actor::Eld),
        (false, true) => Some(Actor::Hel),
        (true, true) => return Err(malformed("prev_actor", "both actors set")),
    };
    let prev_belief = BeliefState::from_index(one_hot_index("prev_belief", block(3))?)?;
    let pointing = decode_match("pointing", block(4))?;
    let ho_block = block(5);
    let ho_match = decode_match("ho", &ho_block[..5])?;
    let ho = match ho_match {
        None => {
            if ho_block[5..].iter().any(|x| *x != 0.0) {
                return Err(malformed("ho", "H-O type set without an event"));
            }
            None
        }
        Some(e) => {
            let ho_type = HoType::from_index(one_hot_index("ho", &ho_block[5..])?)?;
            let ok = match ho_type {
                HoType::OpenLocation | HoType::CloseLocation => e.kind == TargetKind::Location,
                HoType::TakeOutObject | HoType::HoldObject => e.kind == TargetKind::Object,
                HoType::Touch => true,
            };
            if !ok {
                return Err(malformed("ho", format!("{ho_type} cannot target a {:?}", e.kind)));
            }
            Some((e, ho_type))
        }
    };
    let summary = InputSummary {
        prev_actor,
        uttered_ot: block(1)[0] == 1.0,
        uttered_l: block(2)[0] == 1.0,
        prev_belief,
        pointing,
        ho,
        hel_action: HelAction::from_index(one_hot_index("hel_action", block(6))?)?,
        hel_da: DialogueAct::from_index(one_hot_index("hel_da", block(7))?)?,
        prev_eld_action: EldAction::from_index(one_hot_index("prev_eld_action", block(8))?)?,
        prev_eld_da: DialogueAct::from_index(one_hot_index("prev_eld_da", block(9))?)?,
    };
    Ok(summary)
}

/// Targets for one supervised example. An absent ELD move means HEL keeps
/// the floor.
pub fn encode_targets(eld_move: Option<&Move>, next_belief: BeliefState) -> TargetLabels {
    match eld_move {
        None => TargetLabels::new(EldAction::NoAction, DialogueAct::NoUtterance, next_belief),
        Some(m) => TargetLabels::new(m.eld_action_or_none(), m.da, next_belief),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::TargetRef;

    fn goal() -> WorldGoal {
        WorldGoal::new("bowl", "cabinet", "bowl_small")
    }

    #[test]
    fn prev_actor_encoding() {
        assert_eq!(encode_prev_actor(None), [0.0, 0.0]);
        assert_eq!(encode_prev_actor(Some(Actor::Eld)), [1.0, 0.0]);
        assert_eq!(encode_prev_actor(Some(Actor::Hel)), [0.0, 1.0]);
    }

    #[test]
    fn pointing_encoding() {
        let g = goal();
        let p = PointingEvent {
            target: TargetRef::object("bowl_large", "bowl"),
        };
        assert_eq!(encode_pointing(Some(&p), &g).unwrap(), [0.0, 1.0, 0.0, 0.0, 1.0]);
        assert_eq!(encode_pointing(None, &g).unwrap(), [0.0; 5]);
        let p = PointingEvent {
            target: g.target_location(),
        };
        assert_eq!(encode_pointing(Some(&p), &g).unwrap(), [1.0, 0.0, 1.0, 0.0, 0.0]);
        let p = PointingEvent {
            target: TargetRef::object("bowl_small", "pot"),
        };
        assert!(matches!(encode_pointing(Some(&p), &g), Err(FeatureError::MatchUndecidable(_))));
    }

    #[test]
    fn ho_encoding() {
        let g = goal();
        let open = HapticOstensiveEvent {
            target: g.target_location(),
            ho_type: HoType::OpenLocation,
        };
        assert_eq!(
            encode_ho(Some(&open), &g).unwrap(),
            [1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0]
        );
        let take = HapticOstensiveEvent {
            target: TargetRef::object("pot_1", "pot"),
            ho_type: HoType::TakeOutObject,
        };
        assert_eq!(
            encode_ho(Some(&take), &g).unwrap(),
            [0.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0]
        );
        assert_eq!(encode_ho(None, &g).unwrap(), [0.0; 10]);
    }

    fn start_ctx() -> InteractionContext {
        InteractionContext::from_move(
            &Move::hel(HelAction::RequestOT, DialogueAct::QueryW),
            None,
            BeliefState::INITIAL,
            None,
            Uttered::NONE,
            &goal(),
        )
    }

    #[test]
    fn trial_start_vector() {
        let v = encode_input(&start_ctx()).unwrap();
        assert_eq!(v.len(), INPUT_DIM);
        let ones: Vec<usize> = v.values().iter().enumerate().filter(|(_, x)| **x == 1.0).map(|(i, _)| i).collect();
        // belief (0,0,0) at 4, RequestOT at 32+1, QueryW at 41+3, NoAction at 55, NoUtterance at 62
        assert_eq!(ones, vec![4, 33, 44, 55, 62]);
    }

    #[test]
    fn goal_identity_is_not_encoded() {
        let a = start_ctx();
        let mut b = a.clone();
        b.goal = WorldGoal::new("pot", "drawer", "pot_red");
        assert_eq!(encode_input(&a).unwrap(), encode_input(&b).unwrap());
    }

    #[test]
    fn decode_rejects_malformed() {
        let v = encode_input(&start_ctx()).unwrap();
        let mut short = v.values().to_vec();
        short.pop();
        assert!(matches!(
            decode_input(&EncodedInput::from_vec(short)),
            Err(FeatureError::MalformedVector { block: "length", .. })
        ));
        let mut two = v.values().to_vec();
        two[5] = 1.0;
        assert!(matches!(
            decode_input(&EncodedInput::from_vec(two)),
            Err(FeatureError::MalformedVector { block: "prev_belief", .. })
        ));
        let mut half = v.values().to_vec();
        half[0] = 0.5;
        assert!(matches!(
            decode_input(&EncodedInput::from_vec(half)),
            Err(FeatureError::MalformedVector { block: "prev_actor", .. })
        ));
    }

    #[test]
    fn decode_round_trip() {
        let ctx = start_ctx();
        let summary = decode_input(&encode_input(&ctx).unwrap()).unwrap();
        assert_eq!(summary, InputSummary::of(&ctx).unwrap());
    }

    #[test]
    fn target_encoding() {
        let b100 = BeliefState::new(1, 0, 0).unwrap();
        let t = encode_targets(None, b100);
        assert_eq!((t.eld_action, t.eld_da, t.next_belief), (0, 0, 3));
        let yes = Move::eld(EldAction::Yes, DialogueAct::ReplyY);
        let t = encode_targets(Some(&yes), BeliefState::new(1, 1, 0).unwrap());
        assert_eq!((t.eld_action, t.eld_da, t.next_belief), (5, 6, 6));
        let give = Move::eld(EldAction::GiveOT, DialogueAct::Instruct);
        let t = encode_targets(Some(&give), b100);
        assert_eq!((t.eld_action, t.eld_da, t.next_belief), (1, 1, 3));
    }

    #[test]
    fn schema_hash_is_stable_hex() {
        let h = feature_schema_hash();
        assert_eq!(h.len(), 16);
        assert!(h.chars().all(|c| c.is_ascii_hexdigit()));
    }
}
