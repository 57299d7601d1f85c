//! Shared taxonomies of the Find task and the ELD belief-update heuristic.
//!
//! Every enum here has a fixed index order. The indexes are written to corpus
//! files, model outputs and wire messages, so reordering a variant is a
//! format break.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DomainError {
    #[error("invalid belief triple ({0},{1},{2}): {3}")]
    InvalidBelief(u8, u8, u8, &'static str),
    #[error("{kind} index {index} out of range (0..{len})")]
    IndexOutOfRange {
        kind: &'static str,
        index: usize,
        len: usize,
    },
    #[error("invalid move: {0}")]
    InvalidMove(String),
    #[error("invalid goal: {0}")]
    InvalidGoal(String),
}

/// Declares a fieldless enum with a canonical index order, name table and
/// index-based serde representation.
macro_rules! indexed_enum {
    (
        $(#[$meta:meta])*
        $name:ident, $kind:literal { $($variant:ident => $label:literal),+ $(,)? }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(try_from = "u8", into = "u8")]
        pub enum $name {
            $($variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];
            pub const COUNT: usize = Self::ALL.len();

            pub fn index(self) -> usize {
                self as usize
            }

            pub fn from_index(index: usize) -> Result<Self, DomainError> {
                Self::ALL.get(index).copied().ok_or(DomainError::IndexOutOfRange {
                    kind: $kind,
                    index,
                    len: Self::COUNT,
                })
            }

            /// Short label used in reports and tables.
            pub fn label(self) -> &'static str {
                match self {
                    $($name::$variant => $label),+
                }
            }
        }

        impl TryFrom<u8> for $name {
            type Error = DomainError;
            fn try_from(v: u8) -> Result<Self, Self::Error> {
                Self::from_index(v as usize)
            }
        }

        impl From<$name> for u8 {
            fn from(v: $name) -> u8 {
                v as u8
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.label())
            }
        }
    };
}

indexed_enum! {
    /// Which participant produced a move.
    Actor, "actor" {
        Eld => "ELD",
        Hel => "HEL",
    }
}

indexed_enum! {
    /// Dialogue-act taxonomy shared by both participants.
    DialogueAct, "dialogue act" {
        NoUtterance => "NoUtt",
        Instruct => "Inst",
        Acknowledge => "Ack",
        QueryW => "Q-w",
        QueryYn => "Q-yn",
        ReplyW => "R-w",
        ReplyY => "R-y",
        ReplyN => "R-n",
        Check => "Chk",
        Explain => "Exp",
        Align => "Algn",
        StateY => "St-y",
        StateN => "St-n",
        State => "St",
    }
}

indexed_enum! {
    /// ELD action classes. Giving a specific object is folded into `GiveOT`.
    EldAction, "ELD action" {
        NoAction => "No Act",
        GiveOT => "Give OT",
        GiveL => "Give L",
        GiveOTL => "Give OT,L",
        Acknowledge => "Ack",
        Yes => "Yes",
        No => "No",
    }
}

indexed_enum! {
    /// HEL action classes.
    HelAction, "HEL action" {
        NoAction => "No Act",
        RequestOT => "Request OT",
        RequestL => "Request L",
        VerifyOT => "Verify OT",
        VerifyL => "Verify L",
        VerifyO => "Verify O",
        Acknowledge => "Ack",
        Yes => "Yes",
        No => "No",
    }
}

indexed_enum! {
    /// Haptic-ostensive action types, in one-hot order.
    HoType, "H-O type" {
        OpenLocation => "Open",
        CloseLocation => "Close",
        Touch => "Touch",
        TakeOutObject => "TakeOut",
        HoldObject => "Hold",
    }
}

impl EldAction {
    /// Whether this action names the object type and/or the location.
    pub fn utters(self) -> Uttered {
        match self {
            EldAction::GiveOT => Uttered { ot: true, l: false },
            EldAction::GiveL => Uttered { ot: false, l: true },
            EldAction::GiveOTL => Uttered { ot: true, l: true },
            _ => Uttered::NONE,
        }
    }

    /// The give-action that utters exactly the requested entities.
    pub fn giving(u: Uttered) -> EldAction {
        match (u.ot, u.l) {
            (true, true) => EldAction::GiveOTL,
            (true, false) => EldAction::GiveOT,
            (false, true) => EldAction::GiveL,
            (false, false) => EldAction::NoAction,
        }
    }
}

/// A pair of "has been named" flags for the object type and the location.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Uttered {
    pub ot: bool,
    pub l: bool,
}

impl Uttered {
    pub const NONE: Uttered = Uttered { ot: false, l: false };

    pub fn new(ot: bool, l: bool) -> Self {
        Uttered { ot, l }
    }

    pub fn union(self, other: Uttered) -> Uttered {
        Uttered {
            ot: self.ot || other.ot,
            l: self.l || other.l,
        }
    }
}

/// ELD's belief about HEL's knowledge of (object type, location, object).
///
/// Each component is 0 (HEL does not know it), 1 (HEL knows it) or 2 (HEL
/// has a different one in mind). Only 13 triples are meaningful; the object
/// component can be non-zero only while the object type is known and the
/// location is not believed wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BeliefState {
    ot: u8,
    loc: u8,
    obj: u8,
}

impl BeliefState {
    pub const COUNT: usize = 13;

    /// Canonical order of the valid triples.
    pub const ALL: [BeliefState; 13] = [
        BeliefState::raw(0, 0, 0),
        BeliefState::raw(0, 1, 0),
        BeliefState::raw(0, 2, 0),
        BeliefState::raw(1, 0, 0),
        BeliefState::raw(1, 0, 1),
        BeliefState::raw(1, 0, 2),
        BeliefState::raw(1, 1, 0),
        BeliefState::raw(1, 1, 1),
        BeliefState::raw(1, 1, 2),
        BeliefState::raw(1, 2, 0),
        BeliefState::raw(2, 0, 0),
        BeliefState::raw(2, 1, 0),
        BeliefState::raw(2, 2, 0),
    ];

    pub const INITIAL: BeliefState = BeliefState::raw(0, 0, 0);
    pub const RESOLVED: BeliefState = BeliefState::raw(1, 1, 1);

    const fn raw(ot: u8, loc: u8, obj: u8) -> Self {
        BeliefState { ot, loc, obj }
    }

    pub fn new(ot: u8, loc: u8, obj: u8) -> Result<Self, DomainError> {
        validate_belief(ot, loc, obj)
    }

    pub fn ot(self) -> u8 {
        self.ot
    }

    pub fn loc(self) -> u8 {
        self.loc
    }

    pub fn obj(self) -> u8 {
        self.obj
    }

    pub fn triple(self) -> [u8; 3] {
        [self.ot, self.loc, self.obj]
    }

    pub fn index(self) -> usize {
        belief_index(self)
    }

    pub fn from_index(index: usize) -> Result<Self, DomainError> {
        belief_from_index(index)
    }
}

impl fmt::Display for BeliefState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.ot, self.loc, self.obj)
    }
}

impl TryFrom<[u8; 3]> for BeliefState {
    type Error = DomainError;
    fn try_from(t: [u8; 3]) -> Result<Self, Self::Error> {
        validate_belief(t[0], t[1], t[2])
    }
}

impl From<BeliefState> for [u8; 3] {
    fn from(b: BeliefState) -> Self {
        b.triple()
    }
}

impl Serialize for BeliefState {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.triple().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BeliefState {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let t = <[u8; 3]>::deserialize(d)?;
        BeliefState::try_from(t).map_err(serde::de::Error::custom)
    }
}

pub fn belief_index(b: BeliefState) -> usize {
    BeliefState::ALL
        .iter()
        .position(|s| *s == b)
        .expect("BeliefState values are always one of the canonical 13")
}

pub fn belief_from_index(index: usize) -> Result<BeliefState, DomainError> {
    BeliefState::ALL
        .get(index)
        .copied()
        .ok_or(DomainError::IndexOutOfRange {
            kind: "belief state",
            index,
            len: BeliefState::COUNT,
        })
}

pub fn validate_belief(ot: u8, loc: u8, obj: u8) -> Result<BeliefState, DomainError> {
    if ot > 2 || loc > 2 || obj > 2 {
        return Err(DomainError::InvalidBelief(ot, loc, obj, "components must be 0, 1 or 2"));
    }
    if obj != 0 && ot != 1 {
        return Err(DomainError::InvalidBelief(
            ot,
            loc,
            obj,
            "object knowledge requires the object type to be known",
        ));
    }
    if obj != 0 && loc == 2 {
        return Err(DomainError::InvalidBelief(
            ot,
            loc,
            obj,
            "object knowledge cannot coexist with a wrong location",
        ));
    }
    Ok(BeliefState { ot, loc, obj })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TargetKind {
    Location,
    Object,
    ObjectType,
}

/// Something a move refers to: a location, a specific object, or (in
/// utterances only) an object type such as "a bowl".
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetRef {
    Location {
        id: String,
    },
    Object {
        id: String,
        #[serde(rename = "type")]
        object_type: String,
    },
    ObjectType {
        id: String,
    },
}

impl TargetRef {
    pub fn location(id: impl Into<String>) -> Self {
        TargetRef::Location { id: id.into() }
    }

    pub fn object(id: impl Into<String>, object_type: impl Into<String>) -> Self {
        TargetRef::Object {
            id: id.into(),
            object_type: object_type.into(),
        }
    }

    pub fn object_type(id: impl Into<String>) -> Self {
        TargetRef::ObjectType { id: id.into() }
    }

    pub fn kind(&self) -> TargetKind {
        match self {
            TargetRef::Location { .. } => TargetKind::Location,
            TargetRef::Object { .. } => TargetKind::Object,
            TargetRef::ObjectType { .. } => TargetKind::ObjectType,
        }
    }

    pub fn id(&self) -> &str {
        match self {
            TargetRef::Location { id } | TargetRef::Object { id, .. } | TargetRef::ObjectType { id } => id,
        }
    }

    /// Does naming this target utter the object type and/or the location?
    pub fn utters(&self) -> Uttered {
        match self {
            TargetRef::Location { .. } => Uttered { ot: false, l: true },
            _ => Uttered { ot: true, l: false },
        }
    }
}

/// How a referenced target relates to the trial goal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MatchStatus {
    Correct,
    Wrong,
    /// Right object type, wrong specific object. Objects only.
    RightTypeWrongInstance,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointingEvent {
    pub target: TargetRef,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HapticOstensiveEvent {
    pub target: TargetRef,
    pub ho_type: HoType,
}

impl HapticOstensiveEvent {
    pub fn validate(&self) -> Result<(), DomainError> {
        let kind = self.target.kind();
        let ok = match self.ho_type {
            HoType::OpenLocation | HoType::CloseLocation => kind == TargetKind::Location,
            HoType::TakeOutObject | HoType::HoldObject => kind == TargetKind::Object,
            HoType::Touch => kind != TargetKind::ObjectType,
        };
        if ok {
            Ok(())
        } else {
            Err(DomainError::InvalidMove(format!(
                "{} cannot be directed at a {:?} target",
                self.ho_type, kind
            )))
        }
    }
}

/// Ground truth of one Find trial.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldGoal {
    pub object_type: String,
    pub location: String,
    pub object: String,
}

impl WorldGoal {
    pub fn new(object_type: impl Into<String>, location: impl Into<String>, object: impl Into<String>) -> Self {
        WorldGoal {
            object_type: object_type.into(),
            location: location.into(),
            object: object.into(),
        }
    }

    pub fn validate(&self) -> Result<(), DomainError> {
        if self.object_type.is_empty() || self.location.is_empty() || self.object.is_empty() {
            return Err(DomainError::InvalidGoal("goal labels must be non-empty".into()));
        }
        Ok(())
    }

    pub fn target_object(&self) -> TargetRef {
        TargetRef::object(self.object.clone(), self.object_type.clone())
    }

    pub fn target_location(&self) -> TargetRef {
        TargetRef::location(self.location.clone())
    }

    pub fn target_type(&self) -> TargetRef {
        TargetRef::object_type(self.object_type.clone())
    }

    /// Relates a target to this goal by label equality.
    ///
    /// Returns `None` when the relation is undecidable: empty labels, an
    /// object carrying the goal object's id under a different type, or a
    /// bare object type (types have no instance to compare).
    pub fn match_target(&self, target: &TargetRef) -> Option<MatchStatus> {
        match target {
            TargetRef::Location { id } => {
                if id.is_empty() {
                    None
                } else if *id == self.location {
                    Some(MatchStatus::Correct)
                } else {
                    Some(MatchStatus::Wrong)
                }
            }
            TargetRef::Object { id, object_type } => {
                if id.is_empty() || object_type.is_empty() {
                    return None;
                }
                let same_type = *object_type == self.object_type;
                match (*id == self.object, same_type) {
                    (true, true) => Some(MatchStatus::Correct),
                    (true, false) => None,
                    (false, true) => Some(MatchStatus::RightTypeWrongInstance),
                    (false, false) => Some(MatchStatus::Wrong),
                }
            }
            TargetRef::ObjectType { .. } => None,
        }
    }
}

/// One participant turn.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Move {
    pub actor: Actor,
    pub da: DialogueAct,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eld_action: Option<EldAction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hel_action: Option<HelAction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointing: Option<PointingEvent>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ho: Option<HapticOstensiveEvent>,
    pub uttered_ot: bool,
    pub uttered_l: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub mentioned: Vec<TargetRef>,
}

impl Move {
    /// A HEL move with no physical events and no named targets.
    pub fn hel(action: HelAction, da: DialogueAct) -> Self {
        Move {
            actor: Actor::Hel,
            da,
            eld_action: None,
            hel_action: Some(action),
            pointing: None,
            ho: None,
            uttered_ot: false,
            uttered_l: false,
            mentioned: Vec::new(),
        }
    }

    pub fn eld(action: EldAction, da: DialogueAct) -> Self {
        let u = action.utters();
        Move {
            actor: Actor::Eld,
            da,
            eld_action: Some(action),
            hel_action: None,
            pointing: None,
            ho: None,
            uttered_ot: u.ot && da != DialogueAct::NoUtterance,
            uttered_l: u.l && da != DialogueAct::NoUtterance,
            mentioned: Vec::new(),
        }
    }

    /// HEL does nothing at all.
    pub fn hel_idle() -> Self {
        Move::hel(HelAction::NoAction, DialogueAct::NoUtterance)
    }

    pub fn with_flags(mut self, ot: bool, l: bool) -> Self {
        self.uttered_ot = ot;
        self.uttered_l = l;
        self
    }

    /// Adds a named target and raises the matching utterance flag.
    pub fn mentioning(mut self, target: TargetRef) -> Self {
        let u = target.utters();
        self.uttered_ot |= u.ot;
        self.uttered_l |= u.l;
        self.mentioned.push(target);
        self
    }

    pub fn pointing_at(mut self, target: TargetRef) -> Self {
        self.pointing = Some(PointingEvent { target });
        self
    }

    pub fn with_ho(mut self, ho_type: HoType, target: TargetRef) -> Self {
        self.ho = Some(HapticOstensiveEvent { target, ho_type });
        self
    }

    pub fn uttered(&self) -> Uttered {
        Uttered::new(self.uttered_ot, self.uttered_l)
    }

    pub fn hel_action_or_none(&self) -> HelAction {
        self.hel_action.unwrap_or(HelAction::NoAction)
    }

    pub fn eld_action_or_none(&self) -> EldAction {
        self.eld_action.unwrap_or(EldAction::NoAction)
    }

    /// Whether the ELD move is a pass (HEL keeps the floor).
    pub fn is_pass(&self) -> bool {
        self.da == DialogueAct::NoUtterance
            && self.eld_action.unwrap_or(EldAction::NoAction) == EldAction::NoAction
            && self.hel_action.unwrap_or(HelAction::NoAction) == HelAction::NoAction
            && self.pointing.is_none()
            && self.ho.is_none()
    }

    /// Syntactic validity, independent of any goal.
    pub fn validate(&self) -> Result<(), DomainError> {
        match (self.actor, self.eld_action.is_some(), self.hel_action.is_some()) {
            (Actor::Eld, true, false) | (Actor::Hel, false, true) => {}
            _ => {
                return Err(DomainError::InvalidMove(
                    "exactly one of eld_action/hel_action must be present, matching the actor".into(),
                ))
            }
        }
        if self.da == DialogueAct::NoUtterance
            && (self.uttered_ot || self.uttered_l || !self.mentioned.is_empty())
        {
            return Err(DomainError::InvalidMove(
                "a move without an utterance cannot utter or mention anything".into(),
            ));
        }
        for t in &self.mentioned {
            let u = t.utters();
            if (u.ot && !self.uttered_ot) || (u.l && !self.uttered_l) {
                return Err(DomainError::InvalidMove(format!(
                    "mentioned target '{}' requires the matching uttered flag",
                    t.id()
                )));
            }
        }
        if let Some(p) = &self.pointing {
            if p.target.kind() == TargetKind::ObjectType {
                return Err(DomainError::InvalidMove("cannot point at a bare object type".into()));
            }
        }
        if let Some(ho) = &self.ho {
            ho.validate()?;
        }
        Ok(())
    }

    /// Every target this move refers to: named ones first, then physical.
    pub fn referenced_targets(&self) -> impl Iterator<Item = &TargetRef> {
        let named: &[TargetRef] = if self.da == DialogueAct::NoUtterance {
            &[]
        } else {
            &self.mentioned
        };
        named
            .iter()
            .chain(self.pointing.iter().map(|p| &p.target))
            .chain(self.ho.iter().map(|h| &h.target))
    }
}

/// What one HEL move tells ELD about a single belief component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Evidence {
    None,
    /// HEL asked for the entity from scratch.
    Lacks,
    Knows,
    Wrong,
}

impl Evidence {
    /// Wrong dominates Knows, which dominates Lacks.
    fn merge(self, other: Evidence) -> Evidence {
        self.max(other)
    }

    fn apply(self, current: u8, eld_named_it: bool) -> u8 {
        match self {
            Evidence::None => current,
            Evidence::Lacks => 0,
            // a component cannot leave 0 before ELD has named the entity
            Evidence::Knows | Evidence::Wrong if current == 0 && !eld_named_it => 0,
            Evidence::Knows => 1,
            Evidence::Wrong => 2,
        }
    }
}

/// ELD's belief after observing one HEL move.
///
/// Components are updated independently from the evidence in the move:
/// named targets, the pointing target and the H-O target. A request that does
/// not name the entity shows HEL lacks it and resets the component to 0; an
/// acknowledgement counts as knowing everything ELD has named so far. The
/// object component only moves while the object type is known and the
/// location is not believed wrong, which keeps the result among the 13 valid
/// states.
pub fn belief_update(
    current: BeliefState,
    hel_move: &Move,
    goal: &WorldGoal,
    eld_uttered: Uttered,
) -> BeliefState {
    let mut ot = Evidence::None;
    let mut loc = Evidence::None;
    let mut obj = Evidence::None;

    for target in hel_move.referenced_targets() {
        match target {
            TargetRef::Location { id } => {
                loc = loc.merge(if *id == goal.location { Evidence::Knows } else { Evidence::Wrong });
            }
            TargetRef::ObjectType { id } => {
                ot = ot.merge(if *id == goal.object_type { Evidence::Knows } else { Evidence::Wrong });
            }
            TargetRef::Object { id, object_type } => {
                if *object_type == goal.object_type {
                    ot = ot.merge(Evidence::Knows);
                    obj = obj.merge(if *id == goal.object { Evidence::Knows } else { Evidence::Wrong });
                } else {
                    ot = ot.merge(Evidence::Wrong);
                }
            }
        }
    }

    match hel_move.hel_action_or_none() {
        HelAction::RequestOT if !hel_move.uttered_ot => ot = ot.merge(Evidence::Lacks),
        HelAction::RequestL if !hel_move.uttered_l => loc = loc.merge(Evidence::Lacks),
        HelAction::Acknowledge => {
            if eld_uttered.ot {
                ot = ot.merge(Evidence::Knows);
            }
            if eld_uttered.l {
                loc = loc.merge(Evidence::Knows);
            }
        }
        _ => {}
    }

    let new_ot = ot.apply(current.ot, eld_uttered.ot);
    let new_loc = loc.apply(current.loc, eld_uttered.l);
    let new_obj = if new_ot != 1 || new_loc == 2 {
        0
    } else {
        match obj {
            Evidence::None => current.obj,
            Evidence::Lacks => 0,
            Evidence::Knows => 1,
            Evidence::Wrong => 2,
        }
    };
    validate_belief(new_ot, new_loc, new_obj).expect("belief_update produces only valid states")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn goal() -> WorldGoal {
        WorldGoal::new("bowl", "cabinet", "bowl_small")
    }

    fn b(ot: u8, loc: u8, obj: u8) -> BeliefState {
        BeliefState::new(ot, loc, obj).unwrap()
    }

    #[test]
    fn belief_index_endpoints() {
        assert_eq!(belief_index(b(0, 0, 0)), 0);
        assert_eq!(belief_index(b(2, 2, 0)), 12);
        for (i, s) in BeliefState::ALL.iter().enumerate() {
            assert_eq!(belief_from_index(belief_index(*s)).unwrap(), *s);
            assert_eq!(s.index(), i);
        }
        assert!(belief_from_index(13).is_err());
    }

    #[test]
    fn validate_belief_examples() {
        assert!(validate_belief(1, 0, 1).is_ok());
        assert!(matches!(validate_belief(0, 0, 1), Err(DomainError::InvalidBelief(..))));
        assert!(matches!(validate_belief(2, 0, 1), Err(DomainError::InvalidBelief(..))));
        assert!(validate_belief(3, 0, 0).is_err());
    }

    #[test]
    fn exhaustive_triples() {
        let mut accepted = Vec::new();
        for ot in 0..3 {
            for loc in 0..3 {
                for obj in 0..3 {
                    if let Ok(s) = validate_belief(ot, loc, obj) {
                        accepted.push(s);
                    }
                }
            }
        }
        assert_eq!(accepted.len(), 13);
        // enumeration order coincides with the canonical order
        assert_eq!(accepted, BeliefState::ALL.to_vec());
    }

    #[test]
    fn correct_object_sets_obj_known() {
        let m = Move::hel(HelAction::VerifyO, DialogueAct::Check).pointing_at(goal().target_object());
        let next = belief_update(b(1, 1, 0), &m, &goal(), Uttered::new(true, true));
        assert_eq!(next, b(1, 1, 1));
    }

    #[test]
    fn right_type_wrong_instance_sets_obj_wrong() {
        let m = Move::hel(HelAction::VerifyO, DialogueAct::QueryYn)
            .mentioning(TargetRef::object_type("bowl"))
            .pointing_at(TargetRef::object("bowl_large", "bowl"));
        let next = belief_update(b(1, 0, 0), &m, &goal(), Uttered::new(true, false));
        assert_eq!(next, b(1, 0, 2));
    }

    #[test]
    fn location_not_named_by_eld_stays_unknown() {
        let m = Move::hel(HelAction::VerifyL, DialogueAct::Check).mentioning(goal().target_location());
        let next = belief_update(b(0, 0, 0), &m, &goal(), Uttered::NONE);
        assert_eq!(next, b(0, 0, 0));
    }

    #[test]
    fn wrong_type_mention_after_naming() {
        let m = Move::hel(HelAction::VerifyOT, DialogueAct::Check).mentioning(TargetRef::object_type("pot"));
        assert_eq!(belief_update(b(1, 1, 1), &m, &goal(), Uttered::new(true, true)), b(2, 1, 0));
        assert_eq!(belief_update(b(0, 0, 0), &m, &goal(), Uttered::new(true, false)), b(2, 0, 0));
    }

    #[test]
    fn request_without_naming_resets_component() {
        let m = Move::hel(HelAction::RequestOT, DialogueAct::QueryW);
        assert_eq!(belief_update(b(1, 1, 1), &m, &goal(), Uttered::new(true, true)), b(0, 1, 0));
        let m = Move::hel(HelAction::RequestL, DialogueAct::QueryW);
        assert_eq!(belief_update(b(1, 1, 1), &m, &goal(), Uttered::new(true, true)), b(1, 0, 1));
    }

    #[test]
    fn wrong_location_clears_object() {
        let m = Move::hel(HelAction::VerifyL, DialogueAct::NoUtterance)
            .with_ho(HoType::OpenLocation, TargetRef::location("drawer"));
        assert_eq!(belief_update(b(1, 1, 1), &m, &goal(), Uttered::new(true, true)), b(1, 2, 0));
    }

    #[test]
    fn wrong_location_before_type_is_known() {
        let m = Move::hel(HelAction::VerifyL, DialogueAct::Check).mentioning(TargetRef::location("drawer"));
        assert_eq!(belief_update(b(0, 0, 0), &m, &goal(), Uttered::new(true, true)), b(0, 2, 0));
    }

    #[test]
    fn acknowledgement_confirms_named_entities() {
        let m = Move::hel(HelAction::Acknowledge, DialogueAct::Acknowledge);
        assert_eq!(belief_update(b(0, 0, 0), &m, &goal(), Uttered::new(true, false)), b(1, 0, 0));
        assert_eq!(belief_update(b(2, 0, 0), &m, &goal(), Uttered::new(true, true)), b(1, 1, 0));
    }

    #[test]
    fn move_validation() {
        assert!(Move::hel(HelAction::VerifyOT, DialogueAct::NoUtterance)
            .with_flags(true, false)
            .validate()
            .is_err());
        let mut m = Move::hel(HelAction::VerifyO, DialogueAct::Check);
        m.eld_action = Some(EldAction::Yes);
        assert!(m.validate().is_err());
        assert!(Move::hel(HelAction::VerifyL, DialogueAct::NoUtterance)
            .with_ho(HoType::HoldObject, TargetRef::location("cabinet"))
            .validate()
            .is_err());
        assert!(Move::hel(HelAction::VerifyO, DialogueAct::NoUtterance)
            .with_ho(HoType::Touch, TargetRef::object("bowl_small", "bowl"))
            .validate()
            .is_ok());
    }

    #[test]
    fn match_target_relations() {
        let g = goal();
        assert_eq!(g.match_target(&TargetRef::object("bowl_large", "bowl")), Some(MatchStatus::RightTypeWrongInstance));
        assert_eq!(g.match_target(&TargetRef::object("pot_1", "pot")), Some(MatchStatus::Wrong));
        assert_eq!(g.match_target(&TargetRef::location("cabinet")), Some(MatchStatus::Correct));
        assert_eq!(g.match_target(&TargetRef::object("bowl_small", "pot")), None);
        assert_eq!(g.match_target(&TargetRef::location("")), None);
    }

    #[test]
    fn enum_index_orders() {
        assert_eq!(DialogueAct::COUNT, 14);
        assert_eq!(EldAction::COUNT, 7);
        assert_eq!(HelAction::COUNT, 9);
        assert_eq!(HoType::COUNT, 5);
        assert_eq!(DialogueAct::ReplyY.index(), 6);
        assert_eq!(EldAction::Yes.index(), 5);
        assert_eq!(DialogueAct::from_index(13).unwrap(), DialogueAct::State);
        assert!(DialogueAct::from_index(14).is_err());
    }
}
