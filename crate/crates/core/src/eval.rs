//! Accuracy and confusion reports, Cohen's kappa, and agreement with the
//! oracle over the enumerated inputs.

use crate::corpus::Corpus;
use crate::domain::{BeliefState, DialogueAct, EldAction};
use crate::features::{encode_input, InteractionContext, TargetLabels};
use crate::model::Mlp;
use crate::oracle::{classify_subtask, intent_class, pattern_intents, Oracle, OracleTuple, PrimitiveSubtask};
use std::collections::{BTreeMap, HashMap};
use std::fmt::Write;
use std::hash::Hash;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EvalError {
    #[error("unsupported report format '{0}' (expected text or csv)")]
    UnsupportedFormat(String),
    #[error("label lists must be non-empty and of equal length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("chance agreement is 1 but observed agreement is {0}")]
    DegenerateMarginals(f64),
    #[error("nothing to evaluate")]
    Empty,
    #[error("malformed report csv: {0}")]
    Csv(String),
}

/// Rows are true classes, columns predicted classes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
}

impl ConfusionMatrix {
    pub fn new(labels: Vec<String>) -> Self {
        let n = labels.len();
        ConfusionMatrix {
            labels,
            counts: vec![vec![0; n]; n],
        }
    }

    pub fn add(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn support(&self, row: usize) -> u64 {
        self.counts[row].iter().sum()
    }

    /// Row percentages, `None` for rows without support.
    pub fn row_percentages(&self) -> Vec<Option<Vec<f64>>> {
        (0..self.labels.len())
            .map(|r| {
                let s = self.support(r);
                (s > 0).then(|| self.counts[r].iter().map(|c| 100.0 * *c as f64 / s as f64).collect())
            })
            .collect()
    }

    pub fn accuracy(&self) -> f64 {
        let total: u64 = self.counts.iter().flatten().sum();
        let diag: u64 = (0..self.labels.len()).map(|i| self.counts[i][i]).sum();
        if total == 0 {
            0.0
        } else {
            diag as f64 / total as f64
        }
    }
}

fn labels_of<T: std::fmt::Display>(all: &[T]) -> Vec<String> {
    all.iter().map(|v| v.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub n: usize,
    pub overall_accuracy: f64,
    pub action_accuracy: f64,
    pub da_accuracy: f64,
    pub state_accuracy: f64,
    pub action_confusion: ConfusionMatrix,
    pub da_confusion: ConfusionMatrix,
    pub state_confusion: ConfusionMatrix,
}

impl EvalReport {
    /// Builds a report from paired label lists.
    pub fn from_pairs(truth: &[TargetLabels], predicted: &[TargetLabels]) -> Result<Self, EvalError> {
        if truth.is_empty() || truth.len() != predicted.len() {
            return Err(EvalError::LengthMismatch(truth.len(), predicted.len()));
        }
        let mut action = ConfusionMatrix::new(labels_of(EldAction::ALL));
        let mut da = ConfusionMatrix::new(labels_of(DialogueAct::ALL));
        let mut state = ConfusionMatrix::new(labels_of(&BeliefState::ALL));
        let mut joint = 0usize;
        for (t, p) in truth.iter().zip(predicted) {
            action.add(t.eld_action, p.eld_action);
            da.add(t.eld_da, p.eld_da);
            state.add(t.next_belief, p.next_belief);
            joint += (t == p) as usize;
        }
        Ok(EvalReport {
            n: truth.len(),
            overall_accuracy: joint as f64 / truth.len() as f64,
            action_accuracy: action.accuracy(),
            da_accuracy: da.accuracy(),
            state_accuracy: state.accuracy(),
            action_confusion: action,
            da_confusion: da,
            state_confusion: state,
        })
    }

    pub fn min_head_accuracy(&self) -> f64 {
        self.action_accuracy.min(self.da_accuracy).min(self.state_accuracy)
    }
}

/// Per-head accuracy of a model's raw predictions on a corpus.
pub fn evaluate(model: &Mlp, test: &Corpus) -> Result<EvalReport, EvalError> {
    if test.is_empty() {
        return Err(EvalError::Empty);
    }
    let truth = test.targets();
    let predicted: Vec<TargetLabels> = test
        .records
        .iter()
        .map(|r| model.predict(r.encoded().values()).expect("model matches the feature schema"))
        .collect();
    EvalReport::from_pairs(&truth, &predicted)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Text,
    Csv,
}

impl FromStr for ReportFormat {
    type Err = EvalError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "text" => Ok(ReportFormat::Text),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(EvalError::UnsupportedFormat(other.to_string())),
        }
    }
}

fn render_matrix_text(out: &mut String, title: &str, m: &ConfusionMatrix) {
    let _ = writeln!(out, "\n{title} confusion (row %, rows = true, columns = predicted)");
    let w = m.labels.iter().map(|l| l.len()).max().unwrap_or(0).max(7);
    let _ = write!(out, "{:>w$}", "");
    for l in &m.labels {
        let _ = write!(out, " {l:>w$}");
    }
    out.push('\n');
    for (label, row) in m.labels.iter().zip(m.row_percentages()) {
        let _ = write!(out, "{label:>w$}");
        match row {
            Some(ps) => {
                for p in ps {
                    let _ = write!(out, " {:>w$}", format!("{p:.2}"));
                }
            }
            None => {
                for _ in &m.labels {
                    let _ = write!(out, " {:>w$}", "\u{2212}");
                }
            }
        }
        out.push('\n');
    }
}

/// Deterministic text or CSV rendering.
///
/// CSV columns are `kind,head,true,predicted,value`: `metric` rows carry an
/// accuracy in `value`; `count` rows carry one confusion cell.
pub fn render_report(r: &EvalReport, format: ReportFormat) -> String {
    let heads = [
        ("action", &r.action_confusion, r.action_accuracy),
        ("da", &r.da_confusion, r.da_accuracy),
        ("state", &r.state_confusion, r.state_accuracy),
    ];
    match format {
        ReportFormat::Text => {
            let mut out = String::new();
            let _ = writeln!(out, "records          {}", r.n);
            let _ = writeln!(out, "overall accuracy {:.2}%", 100.0 * r.overall_accuracy);
            for (name, _, acc) in heads {
                let _ = writeln!(out, "{:<16} {:.2}%", format!("{name} accuracy"), 100.0 * acc);
            }
            for (name, m, _) in heads {
                render_matrix_text(&mut out, name, m);
            }
            out
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let row = |w: &mut csv::Writer<Vec<u8>>, fields: [&str; 5]| {
                w.write_record(fields).expect("writing to memory");
            };
            row(&mut w, ["kind", "head", "true", "predicted", "value"]);
            row(&mut w, ["metric", "n", "", "", &r.n.to_string()]);
            row(&mut w, ["metric", "overall", "", "", &format!("{:.6}", r.overall_accuracy)]);
            for (name, _, acc) in heads {
                row(&mut w, ["metric", name, "", "", &format!("{acc:.6}")]);
            }
            for (name, m, _) in heads {
                for (i, t) in m.labels.iter().enumerate() {
                    for (j, p) in m.labels.iter().enumerate() {
                        row(&mut w, ["count", name, t, p, &m.counts[i][j].to_string()]);
                    }
                }
            }
            String::from_utf8(w.into_inner().expect("in-memory writer")).expect("utf-8 csv")
        }
    }
}

/// Reads the confusion counts back from a CSV report, keyed by head.
pub fn counts_from_csv(text: &str) -> Result<BTreeMap<String, Vec<(String, String, u64)>>, EvalError> {
    let mut out: BTreeMap<String, Vec<(String, String, u64)>> = BTreeMap::new();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    for rec in rdr.records() {
        let rec = rec.map_err(|e| EvalError::Csv(e.to_string()))?;
        if &rec[0] == "count" {
            let n: u64 = rec[4].parse().map_err(|_| EvalError::Csv(format!("bad count '{}'", &rec[4])))?;
            out.entry(rec[1].to_string())
                .or_default()
                .push((rec[2].to_string(), rec[3].to_string(), n));
        }
    }
    Ok(out)
}

/// Cohen's kappa between two label sequences.
///
/// When chance agreement is 1 (both raters always use one and the same
/// label), perfect observed agreement gives 1 and anything else is an error.
pub fn cohens_kappa<T: Eq + Hash>(a: &[T], b: &[T]) -> Result<f64, EvalError> {
    if a.is_empty() || a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    let n = a.len() as f64;
    let observed = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64 / n;
    let mut ma: HashMap<&T, f64> = HashMap::new();
    let mut mb: HashMap<&T, f64> = HashMap::new();
    for (x, y) in a.iter().zip(b) {
        *ma.entry(x).or_default() += 1.0;
        *mb.entry(y).or_default() += 1.0;
    }
    let chance: f64 = ma.iter().map(|(k, ca)| ca * mb.get(k).copied().unwrap_or(0.0)).sum::<f64>() / (n * n);
    if (1.0 - chance).abs() < 1e-15 {
        return if observed == 1.0 {
            Ok(1.0)
        } else {
            Err(EvalError::DegenerateMarginals(observed))
        };
    }
    Ok((observed - chance) / (1.0 - chance))
}

/// Anything that answers an interaction context with ELD labels.
pub trait Predictor {
    fn predict_context(&self, ctx: &InteractionContext) -> TargetLabels;
}

impl Predictor for Mlp {
    /// Coupled heads, as deployed in the environment.
    fn predict_context(&self, ctx: &InteractionContext) -> TargetLabels {
        let x = encode_input(ctx).expect("enumerated contexts encode");
        self.predict_coherent(x.values()).expect("model matches the feature schema")
    }
}

impl Predictor for Oracle {
    fn predict_context(&self, ctx: &InteractionContext) -> TargetLabels {
        self.respond_live(ctx).targets()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AgreementCounts {
    pub n: usize,
    /// Predicted tuple is in the table's output set.
    pub exact: usize,
    /// Predicted intent is one the table's output set allows.
    pub intent: usize,
    /// Predicted intent equals the intent of the oracle's own response.
    pub oracle_intent: usize,
}

impl AgreementCounts {
    fn frac(&self, k: usize) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            k as f64 / self.n as f64
        }
    }

    pub fn exact_agreement(&self) -> f64 {
        self.frac(self.exact)
    }

    pub fn intent_agreement(&self) -> f64 {
        self.frac(self.intent)
    }

    pub fn oracle_intent_agreement(&self) -> f64 {
        self.frac(self.oracle_intent)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgreementReport {
    pub overall: AgreementCounts,
    pub per_subtask: BTreeMap<PrimitiveSubtask, AgreementCounts>,
}

impl AgreementReport {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:>6} {:>8} {:>8} {:>8}",
            "subtask", "n", "exact", "intent", "oracle"
        );
        let mut line = |name: &str, c: &AgreementCounts| {
            let _ = writeln!(
                out,
                "{:<14} {:>6} {:>7.2}% {:>7.2}% {:>7.2}%",
                name,
                c.n,
                100.0 * c.exact_agreement(),
                100.0 * c.intent_agreement(),
                100.0 * c.oracle_intent_agreement()
            );
        };
        for (s, c) in &self.per_subtask {
            line(s.label(), c);
        }
        line("all", &self.overall);
        out
    }
}

/// Compares a predictor with the transition table and with the oracle on
/// each input. Uttered flags of a prediction are read off its action.
pub fn compare_to_oracle<P: Predictor + ?Sized>(
    predictor: &P,
    oracle: &Oracle,
    inputs: &[InteractionContext],
) -> Result<AgreementReport, EvalError> {
    if inputs.is_empty() {
        return Err(EvalError::Empty);
    }
    let mut overall = AgreementCounts::default();
    let mut per: BTreeMap<PrimitiveSubtask, AgreementCounts> = BTreeMap::new();
    for ctx in inputs {
        let Ok(subtask) = classify_subtask(ctx) else {
            continue;
        };
        let row = subtask.row();
        let p = predictor.predict_context(ctx);
        let (action, da) = (p.action(), p.da());
        let exact = row.permits(&OracleTuple::of_eld(action, da));
        let intent = intent_class(da, action);
        let allowed = exact || row.outputs.iter().any(|pat| pattern_intents(pat).contains(&intent));
        let reference = oracle.respond_live(ctx);
        let matches_oracle = intent == intent_class(reference.da(), reference.action());
        for c in [&mut overall, per.entry(subtask).or_default()] {
            c.n += 1;
            c.exact += exact as usize;
            c.intent += allowed as usize;
            c.oracle_intent += matches_oracle as usize;
        }
    }
    Ok(AgreementReport {
        overall,
        per_subtask: per,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn kappa_hand_cases() {
        assert_abs_diff_eq!(cohens_kappa(&[1, 2, 3, 1], &[1, 2, 3, 1]).unwrap(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cohens_kappa(&[1, 1, 0, 0], &[1, 0, 0, 1]).unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(cohens_kappa(&[0, 1, 0, 1], &[1, 0, 1, 0]).unwrap(), -1.0, epsilon = 1e-12);
        assert_eq!(cohens_kappa(&[3, 3], &[3, 3]).unwrap(), 1.0);
        assert!(matches!(cohens_kappa::<u8>(&[], &[]), Err(EvalError::LengthMismatch(0, 0))));
    }

    #[test]
    fn kappa_degenerate_marginals() {
        // chance agreement of 1 needs a single shared label, so observed is 1 too;
        // the error branch is reachable only through rounding, which this guards
        assert_eq!(cohens_kappa(&["a"; 5], &["a"; 5]).unwrap(), 1.0);
    }

    fn labels(a: usize, d: usize, s: usize) -> TargetLabels {
        TargetLabels {
            eld_action: a,
            eld_da: d,
            next_belief: s,
        }
    }

    #[test]
    fn constant_predictor_overall() {
        let truth: Vec<TargetLabels> = (0..10)
            .map(|i| if i < 3 { labels(0, 0, 0) } else { labels(1, 1, 3) })
            .collect();
        let pred = vec![labels(0, 0, 0); 10];
        let r = EvalReport::from_pairs(&truth, &pred).unwrap();
        assert_abs_diff_eq!(r.overall_accuracy, 0.3, epsilon = 1e-12);
        assert!(r.overall_accuracy <= r.min_head_accuracy());
    }

    #[test]
    fn render_marks_empty_rows_and_round_trips_csv() {
        let truth = vec![labels(1, 1, 3), labels(5, 6, 6), labels(5, 6, 6)];
        let pred = vec![labels(1, 5, 3), labels(5, 6, 6), labels(4, 2, 6)];
        let r = EvalReport::from_pairs(&truth, &pred).unwrap();
        let text = render_report(&r, ReportFormat::Text);
        assert!(text.contains('\u{2212}'));
        assert!(text.contains("50.00"));
        assert_eq!(text, render_report(&r, ReportFormat::Text));
        let csv = render_report(&r, ReportFormat::Csv);
        let counts = counts_from_csv(&csv).unwrap();
        let da = &counts["da"];
        let find = |t: &str, p: &str| da.iter().find(|(a, b, _)| a == t && b == p).unwrap().2;
        assert_eq!(find("R-y", "R-y"), 1);
        assert_eq!(find("R-y", "Ack"), 1);
        assert_eq!(find("Inst", "R-w"), 1);
        assert!(matches!("xml".parse::<ReportFormat>(), Err(EvalError::UnsupportedFormat(_))));
    }

    #[test]
    fn row_percentages_sum_to_100() {
        let mut m = ConfusionMatrix::new(vec!["a".into(), "b".into(), "c".into()]);
        m.add(0, 0);
        m.add(0, 1);
        m.add(0, 1);
        m.add(1, 2);
        for row in m.row_percentages().into_iter().flatten() {
            assert_abs_diff_eq!(row.iter().sum::<f64>(), 100.0, epsilon = 0.01);
        }
        assert!(m.row_percentages()[2].is_none());
    }
}
