//! Episode environment: the simulator (or the oracle) plays ELD against an
//! external HEL agent, with per-turn rewards.

mod protocol;
mod server;

pub use protocol::{describe, run_protocol, Connection, Request, Response, WireEld};
pub use server::Server;

use crate::domain::{Actor, BeliefState, DialogueAct, EldAction, HelAction, Move, WorldGoal};
use crate::features::{encode_input, InteractionContext};
use crate::model::Mlp;
use crate::oracle::{eld_move, intent_class, opening_context, IntentClass, Oracle};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("episode is over; send reset")]
    SessionDone,
    #[error("no episode in progress; send reset")]
    NoSession,
    #[error("malformed move: {0}")]
    MalformedMove(String),
    #[error("bad goal: {0}")]
    BadGoalSpec(String),
    #[error("invalid environment configuration: {0}")]
    InvalidConfig(String),
    #[error("cannot bind {addr}: {reason}")]
    BindFailure { addr: String, reason: String },
}

impl EnvError {
    /// Short code used in protocol error messages.
    pub fn code(&self) -> &'static str {
        match self {
            EnvError::SessionDone => "session_done",
            EnvError::NoSession => "no_session",
            EnvError::MalformedMove(_) => "malformed_move",
            EnvError::BadGoalSpec(_) => "bad_goal",
            EnvError::InvalidConfig(_) => "config",
            EnvError::BindFailure { .. } => "bind",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConfig {
    pub max_turns: u32,
    pub reward_success: f64,
    pub reward_per_turn: f64,
    pub reward_failure: f64,
    /// Base seed for goal sampling when a reset carries none.
    pub seed: u64,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            max_turns: 40,
            reward_success: 1.0,
            reward_per_turn: -0.01,
            reward_failure: -1.0,
            seed: 0,
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        if self.max_turns < 1 {
            return Err(EnvError::InvalidConfig("max_turns must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Success,
    Timeout,
    Aborted,
}

/// Whatever plays ELD. Shared read-only between sessions.
pub trait Policy: Send + Sync {
    /// ELD's reply (`None` for a pass) and its next belief.
    fn respond(&self, ctx: &InteractionContext) -> Result<(Option<Move>, BeliefState), EnvError>;
}

impl Policy for Oracle {
    fn respond(&self, ctx: &InteractionContext) -> Result<(Option<Move>, BeliefState), EnvError> {
        let r = self.respond_live(ctx);
        Ok((r.eld_move, r.next_belief))
    }
}

impl Policy for Mlp {
    fn respond(&self, ctx: &InteractionContext) -> Result<(Option<Move>, BeliefState), EnvError> {
        let x = encode_input(ctx).map_err(|e| EnvError::MalformedMove(e.to_string()))?;
        let p = self
            .predict_coherent(x.values())
            .map_err(|e| EnvError::MalformedMove(e.to_string()))?;
        let m = match p.action() {
            EldAction::NoAction => None,
            a => Some(eld_move(a, p.da(), &ctx.goal)),
        };
        Ok((m, p.belief()))
    }
}

/// ELD's side of one exchange.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub eld_move: Option<Move>,
    pub belief: BeliefState,
    pub reward: f64,
    pub done: bool,
    pub outcome: Option<Outcome>,
}

/// One episode's state machine.
#[derive(Debug, Clone, PartialEq)]
pub struct Session {
    pub goal: WorldGoal,
    pub belief: BeliefState,
    /// What ELD has said so far.
    pub eld_uttered: crate::domain::Uttered,
    /// HEL moves answered so far; the opening does not count.
    pub turn: u32,
    pub prev_actor: Option<Actor>,
    pub prev_eld: Option<(EldAction, DialogueAct)>,
    pub done: bool,
    pub outcome: Option<Outcome>,
    cfg: EnvConfig,
    terminal_bonus: f64,
}

impl Session {
    /// Fresh episode; ELD opens by asking for the object.
    pub fn reset(cfg: &EnvConfig, policy: &dyn Policy, goal: WorldGoal) -> Result<(Session, StepResult), EnvError> {
        cfg.validate()?;
        crate::world::World::kitchen()
            .check_goal(&goal)
            .map_err(|e| EnvError::BadGoalSpec(e.to_string()))?;
        let (opening, belief) = policy.respond(&opening_context(&goal))?;
        let mut s = Session {
            goal,
            belief,
            eld_uttered: crate::domain::Uttered::NONE,
            turn: 0,
            prev_actor: None,
            prev_eld: None,
            done: false,
            outcome: None,
            cfg: *cfg,
            terminal_bonus: 0.0,
        };
        s.absorb(opening.as_ref());
        Ok((
            s,
            StepResult {
                eld_move: opening,
                belief,
                reward: 0.0,
                done: false,
                outcome: None,
            },
        ))
    }

    fn absorb(&mut self, eld: Option<&Move>) {
        match eld {
            Some(m) => {
                self.eld_uttered = self.eld_uttered.union(m.uttered());
                self.prev_eld = Some((m.eld_action_or_none(), m.da));
                self.prev_actor = Some(Actor::Eld);
            }
            None => self.prev_actor = Some(Actor::Hel),
        }
    }

    pub fn step(&mut self, policy: &dyn Policy, hel: &Move) -> Result<StepResult, EnvError> {
        if self.done {
            return Err(EnvError::SessionDone);
        }
        if hel.actor != Actor::Hel {
            return Err(EnvError::MalformedMove("the move must be a HEL move".into()));
        }
        hel.validate().map_err(|e| EnvError::MalformedMove(e.to_string()))?;
        let ctx = InteractionContext::from_move(hel, self.prev_actor, self.belief, self.prev_eld, self.eld_uttered, &self.goal);
        ctx.validate().map_err(|e| EnvError::MalformedMove(e.to_string()))?;
        let (eld, next) = policy.respond(&ctx)?;
        self.turn += 1;
        self.belief = next;
        self.absorb(eld.as_ref());

        let mut reward = self.cfg.reward_per_turn;
        let confirms = eld
            .as_ref()
            .is_some_and(|m| intent_class(m.da, m.eld_action_or_none()) == IntentClass::Confirm);
        if next == BeliefState::RESOLVED && confirms {
            self.finish(Outcome::Success, self.cfg.reward_success);
            reward += self.cfg.reward_success;
        } else if self.turn >= self.cfg.max_turns {
            self.finish(Outcome::Timeout, self.cfg.reward_failure);
            reward += self.cfg.reward_failure;
        }
        Ok(StepResult {
            eld_move: eld,
            belief: next,
            reward,
            done: self.done,
            outcome: self.outcome,
        })
    }

    fn finish(&mut self, outcome: Outcome, bonus: f64) {
        self.done = true;
        self.outcome = Some(outcome);
        self.terminal_bonus = bonus;
    }

    /// Ends an unfinished episode without a terminal bonus.
    pub fn abort(&mut self) {
        if !self.done {
            self.finish(Outcome::Aborted, 0.0);
        }
    }

    /// Per-turn reward times turns plus the terminal bonus.
    pub fn total_reward(&self) -> f64 {
        self.terminal_bonus + self.cfg.reward_per_turn * self.turn as f64
    }
}

/// HEL that keeps asking ELD which object it wants.
pub fn adversarial_move() -> Move {
    Move::hel(HelAction::RequestOT, DialogueAct::QueryW)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSummary {
    pub outcome: Outcome,
    pub turns: u32,
    pub total_reward: f64,
}

/// Plays one episode in-process. `hel` sees the session and ELD's last
/// reply and returns the next HEL move.
pub fn run_episode<F>(cfg: &EnvConfig, policy: &dyn Policy, goal: WorldGoal, mut hel: F) -> Result<EpisodeSummary, EnvError>
where
    F: FnMut(&Session, Option<&Move>) -> Move,
{
    let (mut s, opening) = Session::reset(cfg, policy, goal)?;
    let mut last = opening.eld_move;
    while !s.done {
        let m = hel(&s, last.as_ref());
        last = s.step(policy, &m)?.eld_move;
    }
    Ok(EpisodeSummary {
        outcome: s.outcome.expect("finished sessions have an outcome"),
        turns: s.turn,
        total_reward: s.total_reward(),
    })
}

/// Noise-free scripted HEL playing against `policy`.
pub fn scripted_episode(cfg: &EnvConfig, policy: &dyn Policy, goal: WorldGoal, noise: f64, seed: u64) -> Result<EpisodeSummary, EnvError> {
    let mut hel = crate::corpus::ScriptedHel::new(goal.clone(), noise, seed);
    run_episode(cfg, policy, goal, |s, last| {
        if let Some(m) = last {
            hel.observe_eld(m);
        }
        hel.next_move(s.belief)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::world::World;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn goal() -> WorldGoal {
        WorldGoal::new("bowl", "cabinet_upper", "bowl_small")
    }

    #[test]
    fn oracle_opening_gives_the_type() {
        let (s, r) = Session::reset(&EnvConfig::default(), &Oracle::default(), goal()).unwrap();
        let m = r.eld_move.unwrap();
        assert_eq!((m.eld_action, m.da, m.uttered_ot), (Some(EldAction::GiveOT), DialogueAct::Instruct, true));
        assert_eq!(s.turn, 0);
    }

    #[test]
    fn cooperative_hel_succeeds_with_exact_reward() {
        let world = World::kitchen();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for i in 0..50 {
            let g = world.sample_goal(&mut rng);
            let e = scripted_episode(&EnvConfig::default(), &Oracle::default(), g, 0.0, i).unwrap();
            assert_eq!(e.outcome, Outcome::Success);
            assert!(e.turns <= 20, "{e:?}");
            assert_eq!(e.total_reward, 1.0 - 0.01 * e.turns as f64);
        }
    }

    #[test]
    fn adversarial_hel_times_out() {
        let cfg = EnvConfig {
            max_turns: 1,
            ..Default::default()
        };
        let e = run_episode(&cfg, &Oracle::default(), goal(), |_, _| adversarial_move()).unwrap();
        assert_eq!((e.outcome, e.turns), (Outcome::Timeout, 1));
        assert_eq!(e.total_reward, -1.0 - 0.01);
    }

    #[test]
    fn steps_after_done_are_rejected() {
        let cfg = EnvConfig {
            max_turns: 1,
            ..Default::default()
        };
        let (mut s, _) = Session::reset(&cfg, &Oracle::default(), goal()).unwrap();
        s.step(&Oracle::default(), &adversarial_move()).unwrap();
        assert_eq!(s.step(&Oracle::default(), &adversarial_move()), Err(EnvError::SessionDone));
    }

    #[test]
    fn rejects_eld_moves_and_bad_goals() {
        let (mut s, _) = Session::reset(&EnvConfig::default(), &Oracle::default(), goal()).unwrap();
        let bad = Move::eld(EldAction::Yes, DialogueAct::ReplyY);
        assert!(matches!(s.step(&Oracle::default(), &bad), Err(EnvError::MalformedMove(_))));
        let nowhere = WorldGoal::new("bowl", "attic", "bowl_small");
        assert!(matches!(
            Session::reset(&EnvConfig::default(), &Oracle::default(), nowhere),
            Err(EnvError::BadGoalSpec(_))
        ));
    }
}
