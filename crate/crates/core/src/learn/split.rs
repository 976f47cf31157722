use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed::rng_for;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub stratified: bool,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train_fraction: 0.75,
            stratified: true,
            seed: 0,
        }
    }
}

/// Disjoint train/test row sets, each sorted ascending.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

fn take(mut rows: Vec<usize>, fraction: f64, rng: &mut impl rand::Rng) -> (Vec<usize>, Vec<usize>) {
    rows.shuffle(rng);
    let k = (rows.len() as f64 * fraction).round() as usize;
    let test = rows.split_off(k);
    (rows, test)
}

/// Partitions rows `0..positive.len()`. Stratified mode rounds each class
/// separately, so class proportions hold to within one row per class.
pub fn split(positive: &[bool], spec: &SplitSpec) -> Result<Split> {
    if !(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) {
        return Err(Error::Config("train_fraction must be in (0, 1)".into()));
    }
    let mut rng = rng_for(spec.seed, "split");
    let (mut train, mut test) = if spec.stratified {
        let pos: Vec<usize> = (0..positive.len()).filter(|&i| positive[i]).collect();
        let neg: Vec<usize> = (0..positive.len()).filter(|&i| !positive[i]).collect();
        if pos.len() < 2 || neg.len() < 2 {
            return Err(Error::InvalidInput(
                "stratified split needs at least two rows of each class".into(),
            ));
        }
        let (mut tr, mut te) = take(pos, spec.train_fraction, &mut rng);
        let (tr2, te2) = take(neg, spec.train_fraction, &mut rng);
        tr.extend(tr2);
        te.extend(te2);
        (tr, te)
    } else {
        take((0..positive.len()).collect(), spec.train_fraction, &mut rng)
    };
    if train.is_empty() || test.is_empty() {
        return Err(Error::InvalidInput("split leaves an empty side".into()));
    }
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}
