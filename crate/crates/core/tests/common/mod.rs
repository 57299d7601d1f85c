//! Contexts shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use musim::domain::{
    Actor, BeliefState, DialogueAct, DialogueAct as Da, EldAction, EldAction as Ea, HapticOstensiveEvent, HelAction,
    HelAction as Ha, HoType, Move, TargetRef, Uttered, WorldGoal,
};
use musim::features::InteractionContext;
use rand::Rng;

pub fn goal() -> WorldGoal {
    WorldGoal::new("bowl", "cabinet_upper", "bowl_small")
}

pub fn belief(ot: u8, loc: u8, obj: u8) -> BeliefState {
    BeliefState::new(ot, loc, obj).unwrap()
}

pub fn ctx(m: Move, prev: Option<Actor>, b: BeliefState, prev_eld: Option<(Ea, Da)>) -> InteractionContext {
    InteractionContext::from_move(&m, prev, b, prev_eld, Uttered::NONE, &goal())
}

pub fn golden_cases() -> Vec<(&'static str, InteractionContext, Vec<usize>)> {
    let eld = Some(Actor::Eld);
    let hel = Some(Actor::Hel);
    vec![
        (
            "trial start, HEL asks which object",
            ctx(Move::hel(Ha::RequestOT, Da::QueryW), None, belief(0, 0, 0), None),
            vec![4, 33, 44, 55, 62],
        ),
        (
            "pointing at an object of the right type but the wrong instance",
            ctx(
                Move::hel(Ha::VerifyO, Da::QueryYn).pointing_at(TargetRef::object("bowl_large", "bowl")),
                eld,
                belief(1, 1, 0),
                Some((Ea::GiveL, Da::ReplyW)),
            ),
            vec![0, 10, 18, 21, 37, 45, 57, 67],
        ),
        (
            "naming and pointing at the right location",
            ctx(
                Move::hel(Ha::VerifyL, Da::QueryYn)
                    .mentioning(TargetRef::location("cabinet_upper"))
                    .pointing_at(TargetRef::location("cabinet_upper")),
                hel,
                belief(1, 0, 0),
                Some((Ea::GiveOT, Da::Instruct)),
            ),
            vec![1, 3, 7, 17, 19, 36, 45, 56, 63],
        ),
        (
            "opening a wrong location",
            ctx(
                Move::hel(Ha::VerifyL, Da::State).with_ho(HoType::OpenLocation, TargetRef::location("shelf")),
                eld,
                belief(1, 0, 0),
                Some((Ea::GiveOTL, Da::Instruct)),
            ),
            vec![0, 7, 22, 25, 27, 36, 54, 58, 63],
        ),
        (
            "silently taking out the goal object",
            ctx(
                Move::hel(Ha::VerifyO, Da::NoUtterance).with_ho(HoType::TakeOutObject, TargetRef::object("bowl_small", "bowl")),
                eld,
                belief(1, 1, 0),
                Some((Ea::Yes, Da::ReplyY)),
            ),
            vec![0, 10, 23, 24, 30, 37, 41, 60, 68],
        ),
        (
            "touching an object of another type",
            ctx(
                Move::hel(Ha::VerifyO, Da::Check).with_ho(HoType::Touch, TargetRef::object("pot_red", "pot")),
                hel,
                belief(1, 1, 1),
                Some((Ea::No, Da::ReplyN)),
            ),
            vec![1, 11, 23, 25, 29, 37, 49, 61, 69],
        ),
        (
            "asking about the object type",
            ctx(
                Move::hel(Ha::VerifyOT, Da::QueryYn).mentioning(TargetRef::object_type("bowl")),
                eld,
                belief(0, 0, 0),
                Some((Ea::GiveOT, Da::Instruct)),
            ),
            vec![0, 2, 4, 35, 45, 56, 63],
        ),
        (
            "naming type and location while pointing",
            ctx(
                Move::hel(Ha::VerifyL, Da::QueryYn)
                    .mentioning(TargetRef::object_type("bowl"))
                    .mentioning(TargetRef::location("cabinet_upper"))
                    .pointing_at(TargetRef::location("cabinet_upper")),
                eld,
                belief(1, 0, 0),
                Some((Ea::GiveL, Da::ReplyW)),
            ),
            vec![0, 2, 3, 7, 17, 19, 36, 45, 57, 67],
        ),
        (
            "HEL states yes after confirmation",
            ctx(Move::hel(Ha::Yes, Da::StateY), eld, belief(1, 1, 2), Some((Ea::Yes, Da::ReplyY))),
            vec![0, 12, 39, 52, 60, 68],
        ),
        (
            "HEL idles after ELD acknowledged",
            ctx(Move::hel_idle(), hel, belief(2, 2, 0), Some((Ea::Acknowledge, Da::Acknowledge))),
            vec![1, 16, 32, 41, 59, 64],
        ),
    ]
}

pub fn physical_targets() -> Vec<TargetRef> {
    vec![
        TargetRef::location("cabinet_upper"),
        TargetRef::location("shelf"),
        TargetRef::object("bowl_small", "bowl"),
        TargetRef::object("bowl_large", "bowl"),
        TargetRef::object("pot_red", "pot"),
    ]
}

pub fn mentionable() -> Vec<TargetRef> {
    vec![
        TargetRef::object_type("bowl"),
        TargetRef::object_type("pot"),
        TargetRef::location("cabinet_upper"),
        TargetRef::location("shelf"),
    ]
}

pub fn ho_events() -> Vec<HapticOstensiveEvent> {
    let mut out = Vec::new();
    for ho_type in HoType::ALL {
        for target in physical_targets() {
            let e = HapticOstensiveEvent {
                target,
                ho_type: *ho_type,
            };
            if e.validate().is_ok() {
                out.push(e);
            }
        }
    }
    out
}

pub fn build_move(action: usize, da: usize, pointing: Option<usize>, ho: Option<usize>, mentions: u8) -> Move {
    let da = DialogueAct::from_index(da).unwrap();
    let mut m = Move::hel(HelAction::from_index(action).unwrap(), da);
    if da != DialogueAct::NoUtterance {
        for (i, t) in mentionable().into_iter().enumerate() {
            if mentions & (1 << i) != 0 {
                m = m.mentioning(t);
            }
        }
    }
    if let Some(p) = pointing {
        m = m.pointing_at(physical_targets()[p].clone());
    }
    m.ho = ho.map(|h| ho_events()[h].clone());
    m
}

/// A random context that passes validation.
pub fn random_context<R: Rng>(rng: &mut R) -> InteractionContext {
    let ho_n = ho_events().len();
    loop {
        let prev_actor = [None, Some(Actor::Eld), Some(Actor::Hel)][rng.gen_range(0..3)];
        let prev_eld = if prev_actor.is_some() && rng.gen_bool(0.8) {
            Some((
                EldAction::from_index(rng.gen_range(1..EldAction::COUNT)).unwrap(),
                DialogueAct::from_index(rng.gen_range(1..DialogueAct::COUNT)).unwrap(),
            ))
        } else {
            None
        };
        let m = build_move(
            rng.gen_range(0..HelAction::COUNT),
            rng.gen_range(0..DialogueAct::COUNT),
            rng.gen_bool(0.5).then(|| rng.gen_range(0..5)),
            rng.gen_bool(0.5).then(|| rng.gen_range(0..ho_n)),
            rng.gen_range(0..16),
        );
        let u = rng.gen_range(0..4u8);
        let c = InteractionContext::from_move(
            &m,
            prev_actor,
            BeliefState::from_index(rng.gen_range(0..BeliefState::COUNT)).unwrap(),
            prev_eld,
            Uttered::new(u & 1 != 0, u & 2 != 0),
            &goal(),
        );
        if c.validate().is_ok() {
            return c;
        }
    }
}
