//! Depth-limited regression trees fit to boosting residuals.

use serde::{Deserialize, Serialize};

use super::binning::{BinEdges, BinnedColumn, MISSING};

/// How a split routes a present value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SplitRule {
    /// `x <= threshold` goes left.
    Threshold(f64),
    /// Category codes that go left; all others, including unseen ones, go right.
    Categories(Vec<u32>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "node", rename_all = "snake_case")]
pub enum TreeNode {
    Split {
        feature: usize,
        rule: SplitRule,
        missing_left: bool,
        left: usize,
        right: usize,
        /// Residual sum-of-squares reduction achieved on the training rows.
        gain: f64,
    },
    Leaf {
        value: f64,
    },
}

/// Flattened tree; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Tree {
    pub nodes: Vec<TreeNode>,
}

impl Tree {
    /// Output for one row; `NaN` entries are missing.
    pub fn predict(&self, row: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                TreeNode::Leaf { value } => return *value,
                TreeNode::Split {
                    feature,
                    rule,
                    missing_left,
                    left,
                    right,
                    ..
                } => {
                    let x = row[*feature];
                    let go_left = if x.is_nan() {
                        *missing_left
                    } else {
                        match rule {
                            SplitRule::Threshold(t) => x <= *t,
                            SplitRule::Categories(set) => set.binary_search(&(x as u32)).is_ok(),
                        }
                    };
                    i = if go_left { *left } else { *right };
                }
            }
        }
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, TreeNode::Leaf { .. })).count()
    }

    pub fn splits(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.nodes.iter().filter_map(|n| match n {
            TreeNode::Split { feature, gain, .. } => Some((*feature, *gain)),
            TreeNode::Leaf { .. } => None,
        })
    }
}

/// Per-round inputs for tree growth, indexed by training row.
pub(crate) struct GrowInput<'a> {
    pub columns: &'a [BinnedColumn],
    /// Row weight (number of copies).
    pub weight: &'a [f64],
    /// `weight * (y - p)`.
    pub wresid: &'a [f64],
    /// `weight * p * (1 - p)`.
    pub whess: &'a [f64],
    pub max_depth: usize,
    pub min_leaf: f64,
    pub leaf_clip: f64,
}

#[derive(Debug, Clone)]
struct Candidate {
    col: usize,
    gain: f64,
    missing_left: bool,
    /// Bins routed left (present values only).
    left_bins: Vec<bool>,
}

#[derive(Clone, Copy, Default)]
struct Bucket {
    s: f64,
    w: f64,
}

fn score(s: f64, w: f64) -> f64 {
    if w > 0.0 {
        s * s / w
    } else {
        0.0
    }
}

pub(crate) fn grow(input: &GrowInput<'_>, rows: &mut [u32]) -> Tree {
    let mut tree = Tree { nodes: Vec::new() };
    let mut hist = vec![Bucket::default(); 257];
    grow_node(input, rows, 0, &mut tree, &mut hist);
    tree
}

fn leaf_value(input: &GrowInput<'_>, rows: &[u32]) -> f64 {
    let (mut s, mut h) = (0.0, 0.0);
    for &r in rows {
        s += input.wresid[r as usize];
        h += input.whess[r as usize];
    }
    if h <= 0.0 {
        return 0.0;
    }
    (s / h).clamp(-input.leaf_clip, input.leaf_clip)
}

fn grow_node(input: &GrowInput<'_>, rows: &mut [u32], depth: usize, tree: &mut Tree, hist: &mut [Bucket]) -> usize {
    let id = tree.nodes.len();
    tree.nodes.push(TreeNode::Leaf { value: 0.0 });
    let best = if depth < input.max_depth {
        best_split(input, rows, hist)
    } else {
        None
    };
    let Some(best) = best else {
        tree.nodes[id] = TreeNode::Leaf {
            value: leaf_value(input, rows),
        };
        return id;
    };

    let codes = &input.columns[best.col].codes;
    let goes_left = |r: u32| {
        let c = codes[r as usize];
        if c == MISSING {
            best.missing_left
        } else {
            best.left_bins[c as usize]
        }
    };
    // Stable partition keeps the summation order of each child fixed.
    let (mut l, mut rr): (Vec<u32>, Vec<u32>) = rows.iter().partition(|&&r| goes_left(r));
    let n_left = l.len();
    rows[..n_left].copy_from_slice(&l);
    rows[n_left..].copy_from_slice(&rr);
    l.clear();
    rr.clear();
    let (lrows, rrows) = rows.split_at_mut(n_left);

    let left = grow_node(input, lrows, depth + 1, tree, hist);
    let right = grow_node(input, rrows, depth + 1, tree, hist);
    let col = &input.columns[best.col];
    let rule = match &col.edges {
        BinEdges::Numeric(uppers) => {
            let last_left = best.left_bins.iter().rposition(|&b| b).expect("non-empty left");
            SplitRule::Threshold(uppers[last_left])
        }
        BinEdges::Categorical { codes, .. } => SplitRule::Categories(
            codes
                .iter()
                .enumerate()
                .filter(|(i, _)| best.left_bins[*i])
                .map(|(_, &c)| c)
                .collect(),
        ),
    };
    tree.nodes[id] = TreeNode::Split {
        feature: col.feature,
        rule,
        missing_left: best.missing_left,
        left,
        right,
        gain: best.gain,
    };
    id
}

/// Best residual-SSE-reducing split over all columns. Ties keep the earliest
/// column, then the earliest boundary, so the result does not depend on
/// iteration scheduling.
fn best_split(input: &GrowInput<'_>, rows: &[u32], hist: &mut [Bucket]) -> Option<Candidate> {
    let (mut s_all, mut w_all) = (0.0, 0.0);
    for &r in rows {
        s_all += input.wresid[r as usize];
        w_all += input.weight[r as usize];
    }
    if w_all < 2.0 * input.min_leaf {
        return None;
    }
    let parent = score(s_all, w_all);
    let mut best: Option<Candidate> = None;

    for (ci, col) in input.columns.iter().enumerate() {
        let nb = col.n_bins();
        if nb < 1 {
            continue;
        }
        for b in hist[..nb].iter_mut() {
            *b = Bucket::default();
        }
        let mut miss = Bucket::default();
        for &r in rows {
            let r = r as usize;
            let c = col.codes[r];
            let slot = if c == MISSING { &mut miss } else { &mut hist[c as usize] };
            slot.s += input.wresid[r];
            slot.w += input.weight[r];
        }

        // Scan order: numeric bins by value; categorical bins by mean
        // residual (ties by code), overflow bin pinned last.
        let order: Vec<usize> = match &col.edges {
            BinEdges::Numeric(_) => (0..nb).collect(),
            BinEdges::Categorical { codes, overflow } => {
                let mut o: Vec<usize> = (0..codes.len()).filter(|&i| hist[i].w > 0.0).collect();
                o.sort_by(|&a, &b| {
                    let ma = hist[a].s / hist[a].w;
                    let mb = hist[b].s / hist[b].w;
                    ma.total_cmp(&mb).then(a.cmp(&b))
                });
                if *overflow {
                    o.push(codes.len());
                }
                o
            }
        };
        let overflow = matches!(col.edges, BinEdges::Categorical { overflow: true, .. });
        let n_present_bins = order.len();
        // Number of candidate prefixes; the overflow bin may not go left.
        let max_prefix = if overflow {
            n_present_bins.saturating_sub(1)
        } else {
            n_present_bins
        };

        let mut pre = Bucket::default();
        for k in 0..max_prefix {
            let b = order[k];
            pre.s += hist[b].s;
            pre.w += hist[b].w;
            if hist[b].w == 0.0 {
                continue;
            }
            let is_last = k + 1 == n_present_bins;
            for missing_left in [false, true] {
                // All present values left: only meaningful with missing right.
                if is_last && (missing_left || miss.w == 0.0) {
                    continue;
                }
                if missing_left && miss.w == 0.0 {
                    continue;
                }
                let (sl, wl) = if missing_left {
                    (pre.s + miss.s, pre.w + miss.w)
                } else {
                    (pre.s, pre.w)
                };
                let (sr, wr) = (s_all - sl, w_all - wl);
                if wl < input.min_leaf || wr < input.min_leaf {
                    continue;
                }
                let gain = score(sl, wl) + score(sr, wr) - parent;
                if gain > 0.0 && best.as_ref().is_none_or(|c| gain > c.gain) {
                    let mut left_bins = vec![false; nb];
                    for &o in &order[..=k] {
                        left_bins[o] = true;
                    }
                    // With no missing rows in the node, unseen missing values
                    // follow the heavier side.
                    let ml = if miss.w == 0.0 { wl >= wr } else { missing_left };
                    best = Some(Candidate {
                        col: ci,
                        gain,
                        missing_left: ml,
                        left_bins,
                    });
                }
            }
        }
    }
    best
}
