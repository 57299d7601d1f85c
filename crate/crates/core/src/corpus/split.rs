//! Deterministic train/validation/test partitioning.

use super::{Corpus, CorpusError, Record};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// How set sizes are derived from the ratios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitRule {
    /// train = 4·ceil(r_train·n/4); test = floor(1.05·rest·r_test/(r_val+r_test));
    /// validation takes what is left. Gives 1548/183/201 for n = 1932.
    #[default]
    Reference,
    /// train = floor(r_train·n); val = floor(r_val·n); test takes the rest.
    Floor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SplitMode {
    /// Records are shuffled individually.
    #[default]
    Record,
    /// Whole dialogues are shuffled and assigned until each set reaches its
    /// size, so no dialogue straddles two sets.
    Dialogue,
}

fn check_ratios(r: (f64, f64, f64)) -> Result<(), CorpusError> {
    let (a, b, c) = r;
    if !(a > 0.0 && b > 0.0 && c > 0.0) || ((a + b + c) - 1.0).abs() > 1e-9 {
        return Err(CorpusError::InvalidConfig(format!(
            "split ratios must be positive and sum to 1, got {a},{b},{c}"
        )));
    }
    Ok(())
}

/// Sizes (train, val, test) of a split of `n` records.
pub fn split_counts(n: usize, ratios: (f64, f64, f64), rule: SplitRule) -> Result<(usize, usize, usize), CorpusError> {
    check_ratios(ratios)?;
    let (rt, rv, rs) = ratios;
    let nf = n as f64;
    // the small offsets keep exact products such as 0.8*10 from rounding the wrong way
    let (train, test) = match rule {
        SplitRule::Reference => {
            let train = (4.0 * (rt * nf / 4.0 - 1e-9).ceil()).max(0.0) as usize;
            let train = train.min(n);
            let rest = (n - train) as f64;
            let test = (1.05 * rest * rs / (rv + rs) + 1e-9).floor() as usize;
            (train, test.min(n - train))
        }
        SplitRule::Floor => {
            let train = ((rt * nf + 1e-9).floor() as usize).min(n);
            let val = ((rv * nf + 1e-9).floor() as usize).min(n - train);
            (train, n - train - val)
        }
    };
    Ok((train, n - train - test, test))
}

/// Shuffled three-way partition. Each part keeps the corpus order of its
/// records, so dialogues stay contiguous and turn-ordered.
pub fn split(
    c: &Corpus,
    ratios: (f64, f64, f64),
    seed: u64,
    rule: SplitRule,
    mode: SplitMode,
) -> Result<(Corpus, Corpus, Corpus), CorpusError> {
    let (n_train, n_val, _) = split_counts(c.len(), ratios, rule)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // part assignment per record index: 0 train, 1 val, 2 test
    let mut part = vec![2u8; c.len()];
    match mode {
        SplitMode::Record => {
            let mut idx: Vec<usize> = (0..c.len()).collect();
            idx.shuffle(&mut rng);
            for (k, i) in idx.into_iter().enumerate() {
                part[i] = if k < n_train {
                    0
                } else if k < n_train + n_val {
                    1
                } else {
                    2
                };
            }
        }
        SplitMode::Dialogue => {
            let mut groups: Vec<(usize, usize)> = Vec::new();
            for (i, r) in c.records.iter().enumerate() {
                match groups.last_mut() {
                    Some((start, len)) if c.records[*start].dialogue_id == r.dialogue_id => *len += 1,
                    _ => groups.push((i, 1)),
                }
            }
            groups.shuffle(&mut rng);
            let (mut filled_train, mut filled_val) = (0, 0);
            for (start, len) in groups {
                let p = if filled_train < n_train {
                    filled_train += len;
                    0
                } else if filled_val < n_val {
                    filled_val += len;
                    1
                } else {
                    2
                };
                part[start..start + len].iter_mut().for_each(|x| *x = p);
            }
        }
    }
    let take = |p: u8| -> Corpus {
        let records: Vec<Record> = c
            .records
            .iter()
            .zip(&part)
            .filter(|(_, q)| **q == p)
            .map(|(r, _)| r.clone())
            .collect();
        Corpus::new(records)
    };
    Ok((take(0), take(1), take(2)))
}
