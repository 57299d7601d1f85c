//! Markdown rendering of the oracle's tables, checked into `docs/`.

use super::{enumerate_valid_inputs, PrimitiveSubtask, TRANSITION_TABLE};
use std::collections::BTreeMap;
use std::fmt::Write;

const DECISION_LIST: &str = "\
| HEL action | HEL DA | flags (ot,l) | other | subtask |
|---|---|---|---|---|
| Request OT | Inst / Q-w | (0,0) | | Establish(OT) |
| Request OT | Q-w | (1,0) | | Specify(OT) |
| Request L | Inst / Q-w | (*,0) | | Establish(L) |
| Request L | Q-w | (*,1) | | Specify(L) |
| Verify OT | Chk / Q-yn | (1,0) | | Verify(OT) |
| Verify L | Chk / Q-yn | (0,*) | | Verify(L) |
| Verify L | NoUtt | (0,0) | pointing or H-O event | Verify(L) |
| Verify O | Chk / Q-yn | (*,0) | | Verify(O) |
| Verify O | NoUtt | (0,0) | pointing or H-O event | Verify(O) |
| Verify O | St | (*,*) | | Verify(O) |
| Yes / No | St-y / St / St-n | (*,*) | previous belief (1,1,*) | Finish(L) |
";

const CANONICAL: &str = "\
`next` is the belief after the HEL move. \"Inform DA\" is Inst when HEL used
Inst or the component being established was already non-zero, R-w otherwise.
A location is given together with the object type (Give OT,L) whenever
`next.ot` is not 1.

| subtask | condition | ELD action | ELD DA |
|---|---|---|---|
| Establish(OT) | | Give OT | inform DA |
| Specify(OT) | | Give OT | R-w |
| Establish(L) | | Give L or Give OT,L | inform DA |
| Specify(L) | | Give L or Give OT,L | R-w |
| Verify(OT) | next.ot = 1 | Yes | R-y |
| Verify(OT) | otherwise | Give OT | Inst |
| Verify(L) | next.loc = 1, HEL silent | No Act | NoUtt |
| Verify(L) | next.loc = 1 | Yes | R-y |
| Verify(L) | otherwise | Give L or Give OT,L | Inst |
| Verify(O) | next.obj = 1 | Yes | R-y |
| Verify(O) | otherwise | Give OT | Inst |
| Finish(L) | | Ack | Ack |

In diverse mode a hash of the context and seed swaps Inst with R-w and a
silent pass with Yes/R-y. Both alternatives sit in the same table row.
";

/// The decision list, transition table, canonical ordering and enumeration
/// statistics as one markdown document.
pub fn render_tables_markdown() -> String {
    let mut out = String::new();
    out.push_str("# Oracle tables\n\n");
    out.push_str("Generated by `musim tables`. Do not edit by hand; a test compares this file with the code.\n\n");
    out.push_str("Tuples are `(a,b,c)`: `a`/`b` say whether the move names the object type / the location, ");
    out.push_str("`c` is the dialogue act, `-` is no move and `*` admits 0 or 1.\n\n");

    out.push_str("## Subtask decision list\n\nFirst matching row wins. Anything else is unclassifiable.\n\n");
    out.push_str(DECISION_LIST);

    out.push_str("\n## Transition table\n\n| subtask | HEL input | permitted ELD output |\n|---|---|---|\n");
    for row in TRANSITION_TABLE.iter() {
        let join = |ps: &[super::TuplePattern]| ps.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" / ");
        let _ = writeln!(out, "| {} | {} | {} |", row.subtask, join(row.inputs), join(row.outputs));
    }

    out.push_str("\n## Canonical response\n\n");
    out.push_str(CANONICAL);

    let inputs = enumerate_valid_inputs();
    let mut per: BTreeMap<PrimitiveSubtask, usize> = BTreeMap::new();
    for c in &inputs {
        if let Ok(s) = super::classify_subtask(c) {
            *per.entry(s).or_default() += 1;
        }
    }
    let _ = write!(
        out,
        "\n## Enumerated inputs\n\n{} contexts satisfy the ground rules.\n\n| subtask | inputs |\n|---|---|\n",
        inputs.len()
    );
    for s in PrimitiveSubtask::ALL {
        let _ = writeln!(out, "| {} | {} |", s, per.get(&s).copied().unwrap_or(0));
    }
    out
}
