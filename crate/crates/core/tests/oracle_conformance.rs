use musim::eval::compare_to_oracle;
use musim::oracle::{classify_subtask, enumerate_valid_inputs, Oracle, OracleMode, PrimitiveSubtask};
use std::collections::BTreeMap;

#[test]
fn enumeration_size_is_frozen() {
    let inputs = enumerate_valid_inputs();
    assert_eq!(inputs.len(), 15_551);
    let mut per: BTreeMap<PrimitiveSubtask, usize> = BTreeMap::new();
    for c in &inputs {
        *per.entry(classify_subtask(c).unwrap()).or_default() += 1;
    }
    let counts: Vec<usize> = PrimitiveSubtask::ALL.iter().map(|s| per[s]).collect();
    assert_eq!(counts, [158, 2028, 79, 316, 3432, 158, 9164, 216]);
}

#[test]
fn every_response_is_in_the_output_set() {
    for mode in [OracleMode::Canonical, OracleMode::Diverse { seed: 3 }] {
        let oracle = Oracle::new(mode);
        for c in enumerate_valid_inputs() {
            let r = oracle.respond(&c).unwrap();
            let subtask = r.subtask.unwrap();
            assert!(subtask.row().permits(&r.tuple()), "{subtask:?}: {} not permitted", r.tuple());
        }
    }
}

#[test]
fn oracle_agrees_with_itself() {
    let oracle = Oracle::default();
    let r = compare_to_oracle(&oracle, &oracle, &enumerate_valid_inputs()).unwrap();
    assert_eq!(r.overall.n, 15_551);
    assert_eq!(r.overall.exact_agreement(), 1.0);
    assert_eq!(r.overall.intent_agreement(), 1.0);
    assert_eq!(r.overall.oracle_intent_agreement(), 1.0);
}

#[test]
fn tables_doc_matches_the_code() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../docs/oracle-tables.md");
    let on_disk = std::fs::read_to_string(path).expect("docs/oracle-tables.md exists; regenerate with `musim tables --out docs/oracle-tables.md`");
    assert!(
        on_disk == musim::oracle::render_tables_markdown(),
        "docs/oracle-tables.md is stale; regenerate with `musim tables --out docs/oracle-tables.md`"
    );
}
