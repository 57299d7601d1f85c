//! JSON-lines wire protocol. One request per line, exactly one response
//! line per request.

use super::{EnvConfig, EnvError, Outcome, Policy, Session, StepResult};
use crate::domain::{BeliefState, DialogueAct, EldAction, HapticOstensiveEvent, HelAction, Move, PointingEvent, TargetRef, WorldGoal};
use crate::world::World;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::{self, BufRead, ErrorKind, Write};
use std::sync::atomic::{AtomicBool, Ordering};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Request {
    Reset {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        goal: Option<WorldGoal>,
    },
    HelMove {
        da: DialogueAct,
        action: HelAction,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pointing: Option<PointingEvent>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        ho: Option<HapticOstensiveEvent>,
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        mentioned: Vec<TargetRef>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        uttered_ot: bool,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        uttered_l: bool,
    },
}

impl Request {
    /// Wire form of a HEL move.
    pub fn hel_move(m: &Move) -> Self {
        Request::HelMove {
            da: m.da,
            action: m.hel_action_or_none(),
            pointing: m.pointing.clone(),
            ho: m.ho.clone(),
            mentioned: m.mentioned.clone(),
            uttered_ot: m.uttered_ot,
            uttered_l: m.uttered_l,
        }
    }
}

/// ELD's reply as sent on the wire. A pass is (NoAction, NoUtterance).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WireEld {
    pub da: DialogueAct,
    pub action: EldAction,
    pub uttered_ot: bool,
    pub uttered_l: bool,
    pub belief: BeliefState,
    pub reward: f64,
}

impl WireEld {
    fn of(r: &StepResult) -> Self {
        let (da, action, uo, ul) = match &r.eld_move {
            Some(m) => (m.da, m.eld_action_or_none(), m.uttered_ot, m.uttered_l),
            None => (DialogueAct::NoUtterance, EldAction::NoAction, false, false),
        };
        WireEld {
            da,
            action,
            uttered_ot: uo,
            uttered_l: ul,
            belief: r.belief,
            reward: r.reward,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Response {
    EldMove(WireEld),
    EpisodeEnd {
        outcome: Outcome,
        total_reward: f64,
        turns: u32,
        /// ELD's reply to the final HEL move; absent after an abort.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        eld: Option<WireEld>,
    },
    Error {
        code: String,
        detail: String,
    },
}

impl Response {
    fn error(e: &EnvError) -> Self {
        Response::Error {
            code: e.code().to_string(),
            detail: e.to_string(),
        }
    }
}

/// Per-connection state: at most one live session.
pub struct Connection<'p> {
    policy: &'p dyn Policy,
    cfg: EnvConfig,
    session: Option<Session>,
    resets: u64,
}

impl<'p> Connection<'p> {
    pub fn new(policy: &'p dyn Policy, cfg: EnvConfig) -> Self {
        Connection {
            policy,
            cfg,
            session: None,
            resets: 0,
        }
    }

    pub fn session(&self) -> Option<&Session> {
        self.session.as_ref()
    }

    pub fn handle_line(&mut self, line: &str) -> Response {
        match serde_json::from_str::<Request>(line) {
            Ok(req) => self.handle(req),
            Err(e) => Response::Error {
                code: "parse".into(),
                detail: e.to_string(),
            },
        }
    }

    pub fn handle(&mut self, req: Request) -> Response {
        match req {
            Request::Reset { seed, goal } => self.reset(seed, goal),
            Request::HelMove {
                da,
                action,
                pointing,
                ho,
                mentioned,
                uttered_ot,
                uttered_l,
            } => {
                let mut m = Move::hel(action, da);
                for t in mentioned {
                    m = m.mentioning(t);
                }
                m.uttered_ot |= uttered_ot;
                m.uttered_l |= uttered_l;
                m.pointing = pointing;
                m.ho = ho;
                self.step(&m)
            }
        }
    }

    fn reset(&mut self, seed: Option<u64>, goal: Option<WorldGoal>) -> Response {
        self.abort();
        let seed = seed.unwrap_or_else(|| self.cfg.seed.wrapping_add(self.resets));
        self.resets += 1;
        let goal = goal.unwrap_or_else(|| World::kitchen().sample_goal(&mut ChaCha8Rng::seed_from_u64(seed)));
        match Session::reset(&self.cfg, self.policy, goal) {
            Ok((s, opening)) => {
                self.session = Some(s);
                Response::EldMove(WireEld::of(&opening))
            }
            Err(e) => Response::error(&e),
        }
    }

    fn step(&mut self, m: &Move) -> Response {
        let Some(s) = self.session.as_mut() else {
            return Response::error(&EnvError::NoSession);
        };
        match s.step(self.policy, m) {
            Ok(r) if r.done => Response::EpisodeEnd {
                outcome: r.outcome.expect("done sessions have an outcome"),
                total_reward: s.total_reward(),
                turns: s.turn,
                eld: Some(WireEld::of(&r)),
            },
            Ok(r) => Response::EldMove(WireEld::of(&r)),
            Err(e) => Response::error(&e),
        }
    }

    /// Marks an unfinished session as aborted.
    pub fn abort(&mut self) {
        if let Some(s) = self.session.as_mut() {
            if !s.done {
                s.abort();
                log::info!("episode aborted after {} turns", s.turn);
            }
        }
    }
}

/// Human-readable summary of a response.
pub fn describe(r: &Response) -> String {
    let eld = |e: &WireEld| {
        if e.action == EldAction::NoAction && e.da == DialogueAct::NoUtterance {
            format!("ELD passes; belief {} reward {:+.2}", e.belief, e.reward)
        } else {
            format!("ELD {} / {}; belief {} reward {:+.2}", e.action, e.da, e.belief, e.reward)
        }
    };
    match r {
        Response::EldMove(e) => eld(e),
        Response::EpisodeEnd {
            outcome,
            total_reward,
            turns,
            eld: e,
        } => {
            let last = e.as_ref().map(|e| format!("{}\n", eld(e))).unwrap_or_default();
            format!("{last}episode over: {outcome:?} after {turns} turns, total reward {total_reward:+.2}")
        }
        Response::Error { code, detail } => format!("error [{code}]: {detail}"),
    }
}

/// Serves one stream until end of input, or until `shutdown` is raised
/// while no partial line is pending. Reads that time out are retried, so a
/// stream with a read timeout can be stopped between messages.
pub fn run_protocol<R: BufRead, W: Write>(
    mut input: R,
    mut output: W,
    conn: &mut Connection,
    shutdown: Option<&AtomicBool>,
    mut echo: Option<&mut dyn Write>,
) -> io::Result<()> {
    let mut buf = Vec::new();
    loop {
        match input.read_until(b'\n', &mut buf) {
            Ok(0) => {
                if !buf.is_empty() {
                    reply(&buf, &mut output, conn, &mut echo)?;
                }
                break;
            }
            Ok(_) if buf.ends_with(b"\n") => {
                reply(&buf, &mut output, conn, &mut echo)?;
                buf.clear();
            }
            Ok(_) => continue,
            Err(e) if matches!(e.kind(), ErrorKind::WouldBlock | ErrorKind::TimedOut | ErrorKind::Interrupted) => {}
            Err(e) => {
                conn.abort();
                return Err(e);
            }
        }
        if buf.is_empty() && shutdown.is_some_and(|f| f.load(Ordering::SeqCst)) {
            break;
        }
    }
    conn.abort();
    Ok(())
}

fn reply<W: Write>(line: &[u8], output: &mut W, conn: &mut Connection, echo: &mut Option<&mut dyn Write>) -> io::Result<()> {
    let text = String::from_utf8_lossy(line);
    let text = text.trim();
    if text.is_empty() {
        return Ok(());
    }
    let resp = conn.handle_line(text);
    let mut out = serde_json::to_string(&resp).expect("responses serialize");
    out.push('\n');
    output.write_all(out.as_bytes())?;
    output.flush()?;
    if let Some(w) = echo.as_mut() {
        writeln!(w, "{}", describe(&resp))?;
    }
    Ok(())
}
