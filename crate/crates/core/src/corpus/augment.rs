//! Rule-based synthesis of rare output and input belief states.
//!
//! Output rules rewrite HEL's move in a sampled record so that ELD's next
//! belief lands in an under-represented state. Input rules rewrite the
//! history (previous ELD move and belief) so every belief occurs as an
//! input. Sources are drawn with replacement from the non-augmented records.

use super::{Corpus, CorpusError, Provenance, Record};
use crate::domain::{
    belief_update, Actor, BeliefState, DialogueAct, EldAction, HelAction, Move, TargetKind, TargetRef, Uttered,
};
use crate::features::TargetLabels;
use crate::world::World;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AugRule {
    EstabOT,
    WrongOT,
    WrongLO,
    In112,
    In120,
    In210,
    In220,
    In200,
}

impl AugRule {
    pub const ALL: [AugRule; 8] = [
        AugRule::EstabOT,
        AugRule::WrongOT,
        AugRule::WrongLO,
        AugRule::In112,
        AugRule::In120,
        AugRule::In210,
        AugRule::In220,
        AugRule::In200,
    ];
    pub const OUTPUT: [AugRule; 3] = [AugRule::EstabOT, AugRule::WrongOT, AugRule::WrongLO];
    pub const INPUT: [AugRule; 5] = [AugRule::In112, AugRule::In120, AugRule::In210, AugRule::In220, AugRule::In200];

    pub fn label(self) -> &'static str {
        match self {
            AugRule::EstabOT => "AugOut_EstabOT",
            AugRule::WrongOT => "AugOut_WrongOT",
            AugRule::WrongLO => "AugOut_WrongLO",
            AugRule::In112 => "AugIn_112",
            AugRule::In120 => "AugIn_120",
            AugRule::In210 => "AugIn_210",
            AugRule::In220 => "AugIn_220",
            AugRule::In200 => "AugIn_200",
        }
    }

    pub fn provenance(self) -> Provenance {
        match self {
            AugRule::EstabOT => Provenance::AugOutEstabOT,
            AugRule::WrongOT => Provenance::AugOutWrongOT,
            AugRule::WrongLO => Provenance::AugOutWrongLO,
            AugRule::In112 => Provenance::AugIn112,
            AugRule::In120 => Provenance::AugIn120,
            AugRule::In210 => Provenance::AugIn210,
            AugRule::In220 => Provenance::AugIn220,
            AugRule::In200 => Provenance::AugIn200,
        }
    }

    /// Does a source record qualify for this rule?
    pub fn accepts(self, r: &Record) -> bool {
        let ctx = &r.input;
        let b = ctx.prev_belief;
        match self {
            AugRule::EstabOT => b.ot() == 1 && b.loc() != 2,
            AugRule::WrongOT => {
                ctx.eld_uttered.ot
                    && b.loc() != 2
                    && matches!(ctx.hel_action, HelAction::VerifyOT | HelAction::VerifyO)
                    && ctx.hel_move().referenced_targets().any(|t| names_goal_type(t, &ctx.goal.object_type))
            }
            AugRule::WrongLO => b.ot() == 1 && (wrong_lo_location_source(r) || wrong_lo_object_source(r)),
            AugRule::In112 => b == BeliefState::RESOLVED,
            AugRule::In120 | AugRule::In210 => b.ot() == 1 && b.loc() == 1,
            AugRule::In220 | AugRule::In200 => b.ot() == 1,
        }
    }

    /// Input belief written by an input rule, and the previous ELD move
    /// that accompanies it.
    fn input_substitution(self) -> Option<(BeliefState, EldAction)> {
        let b = |ot, loc, obj| BeliefState::new(ot, loc, obj).expect("valid state");
        match self {
            AugRule::In112 => Some((b(1, 1, 2), EldAction::GiveOT)),
            AugRule::In120 => Some((b(1, 2, 0), EldAction::GiveL)),
            AugRule::In210 => Some((b(2, 1, 0), EldAction::GiveOT)),
            AugRule::In220 => Some((b(2, 2, 0), EldAction::GiveOTL)),
            AugRule::In200 => Some((b(2, 0, 0), EldAction::GiveOT)),
            _ => None,
        }
    }
}

impl fmt::Display for AugRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for AugRule {
    type Err = CorpusError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        AugRule::ALL
            .into_iter()
            .find(|r| r.label().eq_ignore_ascii_case(s))
            .ok_or_else(|| CorpusError::InvalidConfig(format!("unknown augmentation rule '{s}'")))
    }
}

fn names_goal_type(t: &TargetRef, goal_type: &str) -> bool {
    match t {
        TargetRef::ObjectType { id } => id == goal_type,
        TargetRef::Object { object_type, .. } => object_type == goal_type,
        TargetRef::Location { .. } => false,
    }
}

fn wrong_lo_location_source(r: &Record) -> bool {
    let ctx = &r.input;
    ctx.hel_action == HelAction::VerifyL
        && ctx.eld_uttered.l
        && ctx.hel_move().referenced_targets().any(|t| t.kind() == TargetKind::Location)
}

fn wrong_lo_object_source(r: &Record) -> bool {
    let ctx = &r.input;
    ctx.hel_action == HelAction::VerifyO
        && ctx.prev_belief.loc() == 1
        && ctx.hel_move().referenced_targets().any(|t| t.kind() == TargetKind::Object)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentConfig {
    pub counts: BTreeMap<AugRule, usize>,
    pub seed: u64,
}

impl AugmentConfig {
    pub fn new(seed: u64) -> Self {
        AugmentConfig {
            counts: BTreeMap::new(),
            seed,
        }
    }

    pub fn with(mut self, rule: AugRule, count: usize) -> Self {
        self.counts.insert(rule, count);
        self
    }

    pub fn count(&self, rule: AugRule) -> usize {
        self.counts.get(&rule).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.counts.values().sum()
    }

    /// Parses `RULE=N,RULE=N,...`.
    pub fn parse_counts(spec: &str, seed: u64) -> Result<Self, CorpusError> {
        let mut cfg = AugmentConfig::new(seed);
        for part in spec.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (name, n) = part
                .split_once('=')
                .ok_or_else(|| CorpusError::InvalidConfig(format!("expected RULE=COUNT, got '{part}'")))?;
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| CorpusError::InvalidConfig(format!("bad count in '{part}'")))?;
            cfg.counts.insert(name.trim().parse()?, n);
        }
        Ok(cfg)
    }
}

/// Records added by the `paper-profile` preset.
pub const PAPER_PROFILE_TOTAL: usize = 1239;

fn source_pool(c: &Corpus, rule: AugRule) -> Vec<&Record> {
    c.records
        .iter()
        .filter(|r| !r.provenance.is_augmented() && rule.accepts(r))
        .collect()
}

/// The `paper-profile` preset for a given corpus.
///
/// Each rule with a non-empty source pool gets one record; the rest of the
/// 1239 are split in proportion to pool sizes by largest remainder, ties
/// going to the earlier rule.
pub fn paper_profile(c: &Corpus, seed: u64) -> Result<AugmentConfig, CorpusError> {
    let pools: Vec<(AugRule, usize)> = AugRule::ALL
        .iter()
        .map(|r| (*r, source_pool(c, *r).len()))
        .filter(|(_, n)| *n > 0)
        .collect();
    if pools.is_empty() {
        return Err(CorpusError::InsufficientSource(AugRule::EstabOT));
    }
    let rest = PAPER_PROFILE_TOTAL - pools.len();
    let pool_total: usize = pools.iter().map(|(_, n)| n).sum();
    let mut cfg = AugmentConfig::new(seed);
    let mut remainders = Vec::new();
    let mut assigned = 0;
    for (i, (rule, n)) in pools.iter().enumerate() {
        let exact = rest * n;
        let share = exact / pool_total;
        remainders.push((exact % pool_total, i));
        cfg.counts.insert(*rule, 1 + share);
        assigned += share;
    }
    remainders.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    for (_, i) in remainders.into_iter().take(rest - assigned) {
        *cfg.counts.get_mut(&pools[i].0).unwrap() += 1;
    }
    debug_assert_eq!(cfg.total(), PAPER_PROFILE_TOTAL);
    Ok(cfg)
}

fn run_rules(c: &Corpus, cfg: &AugmentConfig, rules: &[AugRule], salt: u64) -> Result<Corpus, CorpusError> {
    let world = World::kitchen();
    let mut out = c.clone();
    for rule in rules {
        let n = cfg.count(*rule);
        if n == 0 {
            continue;
        }
        let pool = source_pool(c, *rule);
        if pool.is_empty() {
            return Err(CorpusError::InsufficientSource(*rule));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ salt ^ ((*rule as u64) << 32));
        for i in 0..n {
            let src = pool.choose(&mut rng).expect("non-empty pool");
            let mut rec = apply_rule(*rule, src, &world, &mut rng);
            rec.dialogue_id = format!("{}-{:05}", rule.label(), i);
            rec.turn_index = 0;
            rec.provenance = rule.provenance();
            debug_assert!(rec.validate().is_ok(), "{rule} produced an invalid record");
            out.records.push(rec);
        }
    }
    Ok(out)
}

/// Appends the output-state rules' records.
pub fn augment_output_states(c: &Corpus, cfg: &AugmentConfig) -> Result<Corpus, CorpusError> {
    run_rules(c, cfg, &AugRule::OUTPUT, 0x6f75_7470)
}

/// Appends the input-state rules' records.
pub fn augment_input_states(c: &Corpus, cfg: &AugmentConfig) -> Result<Corpus, CorpusError> {
    run_rules(c, cfg, &AugRule::INPUT, 0x696e_7075)
}

/// Output rules, then input rules. Both draw only from the records of `c`.
pub fn augment(c: &Corpus, cfg: &AugmentConfig) -> Result<Corpus, CorpusError> {
    let mut out = augment_output_states(c, cfg)?;
    let inputs = augment_input_states(c, cfg)?;
    out.records.extend(inputs.records.into_iter().skip(c.len()));
    Ok(out)
}

fn relabel(rec: &mut Record, action: EldAction, da: DialogueAct) {
    let ctx = &rec.input;
    let next = belief_update(ctx.prev_belief, &ctx.hel_move(), &ctx.goal, ctx.eld_uttered);
    rec.targets = TargetLabels::new(action, da, next);
}

fn apply_rule<R: Rng>(rule: AugRule, src: &Record, world: &World, rng: &mut R) -> Record {
    let mut rec = src.clone();
    let goal = src.input.goal.clone();
    match rule {
        AugRule::EstabOT => {
            let da = if rng.gen_bool(0.5) { DialogueAct::QueryW } else { DialogueAct::Instruct };
            rec.input.set_hel_move(&Move::hel(HelAction::RequestOT, da));
            relabel(&mut rec, EldAction::GiveOT, DialogueAct::Instruct);
        }
        AugRule::WrongOT => {
            let mut m = src.input.hel_move();
            let wrong_name = world.wrong_type_name(&goal, rng);
            let wrong_object = world
                .types
                .iter()
                .find(|t| t.name == wrong_name)
                .and_then(|t| t.instances.choose(rng))
                .map(|id| TargetRef::object(id.clone(), wrong_name.clone()))
                .expect("world types have instances");
            let flip = |t: &mut TargetRef| match t {
                TargetRef::ObjectType { id } if *id == goal.object_type => *id = wrong_name.clone(),
                TargetRef::Object { object_type, .. } if *object_type == goal.object_type => *t = wrong_object.clone(),
                _ => {}
            };
            m.mentioned.iter_mut().for_each(flip);
            if let Some(p) = m.pointing.as_mut() {
                flip(&mut p.target);
            }
            if let Some(h) = m.ho.as_mut() {
                flip(&mut h.target);
            }
            rec.input.set_hel_move(&m);
            relabel(&mut rec, EldAction::GiveOT, DialogueAct::Instruct);
        }
        AugRule::WrongLO => {
            let mut m = src.input.hel_move();
            let use_location = if wrong_lo_location_source(src) && wrong_lo_object_source(src) {
                rng.gen_bool(0.5)
            } else {
                wrong_lo_location_source(src)
            };
            if use_location {
                let wrong = world.wrong_location(&goal, rng);
                let swap = |t: &mut TargetRef| {
                    if t.kind() == TargetKind::Location {
                        *t = wrong.clone();
                    }
                };
                m.mentioned.iter_mut().for_each(swap);
                m.pointing.iter_mut().for_each(|p| swap(&mut p.target));
                m.ho.iter_mut().for_each(|h| swap(&mut h.target));
                rec.input.set_hel_move(&m);
                relabel(&mut rec, EldAction::GiveL, DialogueAct::Instruct);
            } else {
                let sibling = world.sibling_object(&goal, rng).expect("goal types have several instances");
                let swap = |t: &mut TargetRef| {
                    if t.kind() == TargetKind::Object {
                        *t = sibling.clone();
                    }
                };
                m.pointing.iter_mut().for_each(|p| swap(&mut p.target));
                m.ho.iter_mut().for_each(|h| swap(&mut h.target));
                if m.pointing.is_none() && m.ho.is_none() {
                    m.pointing = Some(crate::domain::PointingEvent { target: sibling });
                }
                rec.input.set_hel_move(&m);
                relabel(&mut rec, EldAction::GiveOT, DialogueAct::Instruct);
            }
        }
        _ => {
            let (belief, prev_action) = rule.input_substitution().expect("input rule");
            let ctx = &mut rec.input;
            ctx.prev_actor = Some(Actor::Eld);
            ctx.prev_belief = belief;
            ctx.prev_eld_action = prev_action;
            ctx.prev_eld_da = DialogueAct::Instruct;
            ctx.eld_uttered = ctx.eld_uttered.union(prev_action.utters()).union(Uttered::new(true, false));
            let keep = (rec.targets.action(), rec.targets.da());
            relabel(&mut rec, keep.0, keep.1);
        }
    }
    rec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::synthesize_records;
    use crate::oracle::Oracle;

    fn base() -> Corpus {
        synthesize_records(&Oracle::default(), 0.3, 400, 9)
    }

    #[test]
    fn zero_counts_is_identity() {
        let c = base();
        assert_eq!(augment(&c, &AugmentConfig::new(1)).unwrap(), c);
    }

    #[test]
    fn estab_ot_rule() {
        let c = base();
        let out = augment_output_states(&c, &AugmentConfig::new(2).with(AugRule::EstabOT, 5)).unwrap();
        assert_eq!(out.len(), c.len() + 5);
        for r in &out.records[c.len()..] {
            assert_eq!(r.input.hel_action, HelAction::RequestOT);
            let b = r.targets.belief();
            assert!(b == BeliefState::INITIAL || b == BeliefState::new(0, 1, 0).unwrap());
            assert_eq!((r.targets.action(), r.targets.da()), (EldAction::GiveOT, DialogueAct::Instruct));
        }
    }

    #[test]
    fn wrong_ot_and_lo_rules_hit_their_states() {
        let c = base();
        let cfg = AugmentConfig::new(3).with(AugRule::WrongOT, 20).with(AugRule::WrongLO, 20);
        let out = augment_output_states(&c, &cfg).unwrap();
        for r in &out.records[c.len()..] {
            let b = r.targets.belief();
            match r.provenance {
                Provenance::AugOutWrongOT => assert_eq!(b.ot(), 2, "{b}"),
                Provenance::AugOutWrongLO => assert!(b.loc() == 2 || b.obj() == 2, "{b}"),
                p => panic!("unexpected provenance {p:?}"),
            }
        }
    }

    #[test]
    fn input_rules_substitute_history() {
        let c = base();
        let cfg = AugRule::INPUT.iter().fold(AugmentConfig::new(4), |cfg, r| cfg.with(*r, 2));
        let out = augment_input_states(&c, &cfg).unwrap();
        for r in &out.records[c.len()..] {
            assert_eq!(r.input.prev_eld_da, DialogueAct::Instruct);
            let expected = match r.provenance {
                Provenance::AugIn112 => ([1, 1, 2], EldAction::GiveOT),
                Provenance::AugIn120 => ([1, 2, 0], EldAction::GiveL),
                Provenance::AugIn210 => ([2, 1, 0], EldAction::GiveOT),
                Provenance::AugIn220 => ([2, 2, 0], EldAction::GiveOTL),
                Provenance::AugIn200 => ([2, 0, 0], EldAction::GiveOT),
                p => panic!("unexpected provenance {p:?}"),
            };
            assert_eq!((r.input.prev_belief.triple(), r.input.prev_eld_action), expected);
        }
    }

    #[test]
    fn empty_pool_is_insufficient_source() {
        let c = Corpus::new(base().records.into_iter().filter(|r| r.input.prev_belief != BeliefState::RESOLVED).collect());
        let err = augment_input_states(&c, &AugmentConfig::new(0).with(AugRule::In112, 1)).unwrap_err();
        assert!(matches!(err, CorpusError::InsufficientSource(AugRule::In112)));
    }

    #[test]
    fn parse_rule_counts() {
        let cfg = AugmentConfig::parse_counts("AugOut_EstabOT=3, augin_112=4", 0).unwrap();
        assert_eq!(cfg.count(AugRule::EstabOT), 3);
        assert_eq!(cfg.count(AugRule::In112), 4);
        assert!(AugmentConfig::parse_counts("Nope=1", 0).is_err());
        assert!(AugmentConfig::parse_counts("AugIn_112", 0).is_err());
    }
}
