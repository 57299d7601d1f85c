//! Synthetic Find dialogues: a scripted HEL against the oracle ELD.

use super::{Corpus, Provenance, Record};
use crate::domain::{Actor, BeliefState, DialogueAct, HelAction, HoType, Move, Uttered, WorldGoal};
use crate::features::InteractionContext;
use crate::oracle::{opening_context, Oracle, PrimitiveSubtask};
use crate::world::World;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Upper bound on HEL moves per synthetic dialogue.
pub const MAX_HEL_TURNS: usize = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Mistake {
    WrongTypeMention,
    WrongLocationMention,
    WrongLocationOpen,
    WrongObject,
    PrematureObject,
    RedundantRequest,
}

/// HEL that follows the cooperative Find script: confirm the object type,
/// ask for and confirm the location, open it, check the object, report
/// success. With probability `noise` per move it makes a mistake instead.
#[derive(Debug, Clone)]
pub struct ScriptedHel {
    goal: WorldGoal,
    world: World,
    noise: f64,
    rng: ChaCha8Rng,
    opened: bool,
    eld_named: Uttered,
}

impl ScriptedHel {
    pub fn new(goal: WorldGoal, noise: f64, seed: u64) -> Self {
        ScriptedHel {
            goal,
            world: World::kitchen(),
            noise: noise.clamp(0.0, 1.0),
            rng: ChaCha8Rng::seed_from_u64(seed),
            opened: false,
            eld_named: Uttered::NONE,
        }
    }

    /// Takes note of what ELD said.
    pub fn observe_eld(&mut self, m: &Move) {
        self.eld_named = self.eld_named.union(m.uttered());
    }

    fn pick<T: Copy>(&mut self, options: &[T]) -> T {
        *options.choose(&mut self.rng).expect("non-empty options")
    }

    fn check_da(&mut self) -> DialogueAct {
        self.pick(&[DialogueAct::Check, DialogueAct::QueryYn])
    }

    /// The next HEL move given ELD's current belief.
    pub fn next_move(&mut self, belief: BeliefState) -> Move {
        let m = if self.rng.gen_bool(self.noise) {
            match self.mistake(belief) {
                Some(m) => m,
                None => self.cooperative(belief),
            }
        } else {
            self.cooperative(belief)
        };
        if let Some(h) = &m.ho {
            if h.ho_type == HoType::OpenLocation && h.target == self.goal.target_location() {
                self.opened = true;
            }
        }
        m
    }

    fn verify_object(&mut self, target: crate::domain::TargetRef) -> Move {
        let g = self.goal.clone();
        match self.rng.gen_range(0..4) {
            0 => {
                let da = self.check_da();
                Move::hel(HelAction::VerifyO, da).pointing_at(target)
            }
            1 => {
                let da = self.check_da();
                Move::hel(HelAction::VerifyO, da).mentioning(g.target_type()).pointing_at(target)
            }
            2 => {
                let ho = self.pick(&[HoType::TakeOutObject, HoType::HoldObject, HoType::Touch]);
                Move::hel(HelAction::VerifyO, DialogueAct::NoUtterance).with_ho(ho, target)
            }
            _ => {
                let ho = self.pick(&[HoType::TakeOutObject, HoType::HoldObject]);
                Move::hel(HelAction::VerifyO, DialogueAct::State).with_ho(ho, target)
            }
        }
    }

    fn cooperative(&mut self, b: BeliefState) -> Move {
        let g = self.goal.clone();
        if b.ot() != 1 {
            if !self.eld_named.ot {
                let da = self.pick(&[DialogueAct::QueryW, DialogueAct::Instruct]);
                return Move::hel(HelAction::RequestOT, da);
            }
            let da = self.check_da();
            let m = Move::hel(HelAction::VerifyOT, da).mentioning(g.target_type());
            return if self.rng.gen_bool(0.2) { m.pointing_at(g.target_object()) } else { m };
        }
        if b.loc() != 1 {
            if !self.eld_named.l {
                let da = self.pick(&[DialogueAct::QueryW, DialogueAct::Instruct]);
                let m = Move::hel(HelAction::RequestL, da);
                return if self.rng.gen_bool(0.5) { m.mentioning(g.target_type()) } else { m };
            }
            return match self.rng.gen_range(0..4) {
                0 => {
                    let da = self.check_da();
                    Move::hel(HelAction::VerifyL, da).pointing_at(g.target_location())
                }
                1 => {
                    let ho = self.pick(&[HoType::OpenLocation, HoType::Touch]);
                    Move::hel(HelAction::VerifyL, DialogueAct::NoUtterance).with_ho(ho, g.target_location())
                }
                _ => {
                    let da = self.check_da();
                    Move::hel(HelAction::VerifyL, da).mentioning(g.target_location())
                }
            };
        }
        if !self.opened {
            return Move::hel(HelAction::VerifyL, DialogueAct::NoUtterance)
                .with_ho(HoType::OpenLocation, g.target_location());
        }
        if b.obj() != 1 {
            return self.verify_object(g.target_object());
        }
        let da = self.pick(&[DialogueAct::StateY, DialogueAct::State]);
        Move::hel(HelAction::Yes, da)
    }

    fn mistake(&mut self, b: BeliefState) -> Option<Move> {
        let mut options = vec![Mistake::RedundantRequest];
        if self.eld_named.ot {
            options.push(Mistake::WrongTypeMention);
            options.push(Mistake::WrongObject);
        }
        if self.eld_named.l {
            options.push(Mistake::WrongLocationMention);
            options.push(Mistake::WrongLocationOpen);
        }
        if b.ot() == 1 && b.loc() == 0 {
            options.push(Mistake::PrematureObject);
        }
        let g = self.goal.clone();
        let m = match self.pick(&options) {
            Mistake::WrongTypeMention => {
                let wrong = self.world.wrong_type_name(&g, &mut self.rng);
                let da = self.check_da();
                Move::hel(HelAction::VerifyOT, da).mentioning(crate::domain::TargetRef::object_type(wrong))
            }
            Mistake::WrongLocationMention => {
                let wrong = self.world.wrong_location(&g, &mut self.rng);
                let da = self.check_da();
                if self.rng.gen_bool(0.5) {
                    Move::hel(HelAction::VerifyL, da).mentioning(wrong)
                } else {
                    Move::hel(HelAction::VerifyL, da).pointing_at(wrong)
                }
            }
            Mistake::WrongLocationOpen => {
                let wrong = self.world.wrong_location(&g, &mut self.rng);
                Move::hel(HelAction::VerifyL, DialogueAct::NoUtterance).with_ho(HoType::OpenLocation, wrong)
            }
            Mistake::WrongObject => {
                let target = if self.rng.gen_bool(0.5) {
                    self.world
                        .sibling_object(&g, &mut self.rng)
                        .expect("goal types have several instances")
                } else {
                    self.world.wrong_type_object(&g, &mut self.rng)
                };
                self.verify_object(target)
            }
            Mistake::PrematureObject => {
                let target = if self.rng.gen_bool(0.5) {
                    g.target_object()
                } else {
                    self.world
                        .sibling_object(&g, &mut self.rng)
                        .expect("goal types have several instances")
                };
                self.verify_object(target)
            }
            Mistake::RedundantRequest => {
                let da = self.pick(&[DialogueAct::QueryW, DialogueAct::Instruct]);
                let action = self.pick(&[HelAction::RequestOT, HelAction::RequestL]);
                Move::hel(action, da)
            }
        };
        Some(m)
    }
}

/// Plays one dialogue and appends its records.
fn play_dialogue(oracle: &Oracle, goal: WorldGoal, noise: f64, seed: u64, id: &str, out: &mut Vec<Record>) {
    let mut hel = ScriptedHel::new(goal.clone(), noise, seed);
    let mut turn = 0u32;
    let mut push = |ctx: InteractionContext, resp: &crate::oracle::OracleResponse, out: &mut Vec<Record>| {
        out.push(Record {
            targets: resp.targets(),
            input: ctx,
            provenance: Provenance::Synthetic,
            dialogue_id: id.to_string(),
            turn_index: turn,
        });
        turn += 1;
    };

    let opening_ctx = opening_context(&goal);
    let opening = oracle.respond(&opening_ctx).expect("the opening context is always valid");
    let mut belief = opening.next_belief;
    let first = opening.eld_move.clone().expect("ELD opens the trial");
    hel.observe_eld(&first);
    let mut eld_uttered = first.uttered();
    let mut prev_eld = (first.eld_action_or_none(), first.da);
    let mut prev_actor = Actor::Eld;
    push(opening_ctx, &opening, out);

    for _ in 0..MAX_HEL_TURNS {
        let hel_move = hel.next_move(belief);
        let ctx = InteractionContext::from_move(&hel_move, Some(prev_actor), belief, Some(prev_eld), eld_uttered, &goal);
        let resp = match oracle.respond(&ctx) {
            Ok(r) => r,
            Err(_) => oracle.respond_live(&ctx),
        };
        push(ctx, &resp, out);
        belief = resp.next_belief;
        match &resp.eld_move {
            Some(m) => {
                hel.observe_eld(m);
                eld_uttered = eld_uttered.union(m.uttered());
                prev_eld = (m.eld_action_or_none(), m.da);
                prev_actor = Actor::Eld;
            }
            None => prev_actor = Actor::Hel,
        }
        if resp.subtask == Some(PrimitiveSubtask::FinishL) {
            break;
        }
    }
}

/// Simulates `n_dialogues` dialogues with goals drawn from the kitchen world.
pub fn synthesize_corpus(oracle: &Oracle, noise: f64, n_dialogues: usize, seed: u64) -> Corpus {
    let world = World::kitchen();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    for d in 0..n_dialogues {
        let goal = world.sample_goal(&mut rng);
        play_dialogue(oracle, goal, noise, rng.gen(), &format!("d{d:05}"), &mut records);
    }
    Corpus::new(records)
}

/// Simulates dialogues until `n_records` records exist; the last dialogue
/// may be cut short.
pub fn synthesize_records(oracle: &Oracle, noise: f64, n_records: usize, seed: u64) -> Corpus {
    let world = World::kitchen();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut records = Vec::new();
    let mut d = 0;
    while records.len() < n_records {
        let goal = world.sample_goal(&mut rng);
        play_dialogue(oracle, goal, noise, rng.gen(), &format!("d{d:05}"), &mut records);
        d += 1;
    }
    records.truncate(n_records);
    Corpus::new(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::EldAction;

    #[test]
    fn noise_free_dialogue_is_monotone_and_finishes() {
        let c = synthesize_corpus(&Oracle::default(), 0.0, 1, 4);
        c.validate().unwrap();
        let beliefs: Vec<[u8; 3]> = c.records.iter().map(|r| r.targets.belief().triple()).collect();
        for w in beliefs.windows(2) {
            assert!(w[0].iter().zip(&w[1]).all(|(a, b)| a <= b), "{beliefs:?}");
        }
        let last = c.records.last().unwrap();
        assert_eq!(last.targets.action(), EldAction::Acknowledge);
        assert_eq!(last.targets.belief(), BeliefState::RESOLVED);
    }

    #[test]
    fn noisy_dialogues_cover_all_input_beliefs() {
        let c = synthesize_corpus(&Oracle::default(), 0.5, 200, 11);
        c.validate().unwrap();
        let h = c.input_belief_histogram();
        assert!(h.iter().all(|n| *n > 0), "{h:?}");
    }

    #[test]
    fn same_seed_same_corpus() {
        let o = Oracle::default();
        assert_eq!(synthesize_corpus(&o, 0.3, 20, 8), synthesize_corpus(&o, 0.3, 20, 8));
        assert_ne!(synthesize_corpus(&o, 0.3, 20, 8), synthesize_corpus(&o, 0.3, 20, 9));
    }

    #[test]
    fn exact_record_count() {
        let c = synthesize_records(&Oracle::default(), 0.2, 2000, 1);
        assert_eq!(c.len(), 2000);
        c.validate().unwrap();
    }

    #[test]
    fn scripted_moves_are_strictly_valid() {
        let o = Oracle::default();
        let c = synthesize_corpus(&o, 0.4, 100, 5);
        for r in &c.records {
            o.respond(&r.input).unwrap();
        }
    }
}
