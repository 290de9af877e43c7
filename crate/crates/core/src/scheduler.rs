//! Merge-order planning over condensed columns.
//!
//! Each leaf is the multiplied partial matrix of one (condensed) column of the
//! left matrix; its weight is the number of products it contains. A plan
//! merges leaves and earlier outputs in rounds of at most `way` inputs until a
//! single root remains. Every internal result except the root goes through
//! DRAM, so the sum of internal weights tracks partial-result traffic.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CsrMatrix;
use crate::Scalar;

pub type NodeId = usize;

/// First-round width that makes every later round exactly `way` wide.
///
/// `n < 2` has no merge rounds and returns `n`.
pub fn k_init(n: usize, way: usize) -> usize {
    assert!(way >= 2, "merger way must be at least 2");
    if n < 2 {
        return n;
    }
    (n - 2) % (way - 1) + 2
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRound {
    pub inputs: Vec<NodeId>,
    pub output: NodeId,
    pub weight: u64,
}

/// Rounds of k-way merges. Ids `0..num_leaves` are leaves; round `i`
/// produces id `num_leaves + i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergePlan {
    pub way: usize,
    pub leaf_weights: Vec<u64>,
    pub rounds: Vec<MergeRound>,
}

impl MergePlan {
    pub fn num_leaves(&self) -> usize {
        self.leaf_weights.len()
    }

    pub fn root(&self) -> Option<NodeId> {
        match self.rounds.last() {
            Some(r) => Some(r.output),
            None if self.leaf_weights.len() == 1 => Some(0),
            None => None,
        }
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        id < self.num_leaves()
    }

    pub fn weight(&self, id: NodeId) -> u64 {
        if self.is_leaf(id) {
            self.leaf_weights[id]
        } else {
            self.rounds[id - self.num_leaves()].weight
        }
    }

    /// Sum of internal node weights, root included.
    pub fn cost(&self) -> u64 {
        self.rounds.iter().map(|r| r.weight).sum()
    }

    /// Checks the consume-once, width and weight invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_leaves();
        let bad = |msg: String| Err(Error::Plan(msg));
        if self.way < 2 {
            return bad(format!("way {} below 2", self.way));
        }
        let expected_rounds = if n < 2 { 0 } else { 1 + (n - k_init(n, self.way)) / (self.way - 1) };
        if self.rounds.len() != expected_rounds {
            return bad(format!("{} rounds for {n} leaves, expected {expected_rounds}", self.rounds.len()));
        }
        let mut consumed = vec![false; n + self.rounds.len()];
        for (i, r) in self.rounds.iter().enumerate() {
            let id = n + i;
            if r.output != id {
                return bad(format!("round {i} outputs {} instead of {id}", r.output));
            }
            let width_ok = if i == 0 { (2..=self.way).contains(&r.inputs.len()) } else { r.inputs.len() == self.way };
            if !width_ok {
                return bad(format!("round {i} has {} inputs", r.inputs.len()));
            }
            let mut sum = 0u64;
            for &x in &r.inputs {
                if x >= id {
                    return bad(format!("round {i} consumes future node {x}"));
                }
                if std::mem::replace(&mut consumed[x], true) {
                    return bad(format!("node {x} consumed twice"));
                }
                sum += self.weight(x);
            }
            if sum != r.weight {
                return bad(format!("round {i} weight {} != children sum {sum}", r.weight));
            }
        }
        let unconsumed = consumed.iter().filter(|c| !**c).count();
        if n > 0 && unconsumed != 1 {
            return bad(format!("{unconsumed} unconsumed nodes, expected a single root"));
        }
        Ok(())
    }

    fn push_round(&mut self, inputs: Vec<NodeId>) -> NodeId {
        let output = self.num_leaves() + self.rounds.len();
        let weight = inputs.iter().map(|&x| self.weight(x)).sum();
        self.rounds.push(MergeRound { inputs, output, weight });
        output
    }

    fn empty(weights: &[u64], way: usize) -> Self {
        assert!(way >= 2, "merger way must be at least 2");
        Self { way, leaf_weights: weights.to_vec(), rounds: Vec::new() }
    }
}

/// Total internal weight of a plan.
pub fn plan_cost(plan: &MergePlan) -> u64 {
    plan.cost()
}

/// Weight of condensed column `j`: products contributed by the `j`-th
/// entry of every row of `a`.
pub fn leaf_weights<T: Scalar>(a: &CsrMatrix<T>, b: &CsrMatrix<T>) -> Result<Vec<u64>> {
    check_dims(a, b)?;
    let mut w = Vec::new();
    for r in 0..a.num_rows() {
        let (cols, _) = a.row(r);
        if cols.len() > w.len() {
            w.resize(cols.len(), 0);
        }
        for (j, &c) in cols.iter().enumerate() {
            w[j] += b.row_nnz(c as usize) as u64;
        }
    }
    Ok(w)
}

/// Leaf weights without condensing: one leaf per non-empty column `c` of
/// `a`, weighing nnz(a column c) × nnz(b row c). Returns (column, weight).
pub fn column_leaf_weights<T: Scalar>(a: &CsrMatrix<T>, b: &CsrMatrix<T>) -> Result<Vec<(u32, u64)>> {
    check_dims(a, b)?;
    let mut col_nnz = vec![0u64; a.num_cols()];
    for &c in a.col_idx() {
        col_nnz[c as usize] += 1;
    }
    Ok(col_nnz.iter().enumerate().filter(|(_, &n)| n > 0).map(|(c, &n)| (c as u32, n * b.row_nnz(c) as u64)).collect())
}

fn check_dims<T: Scalar>(a: &CsrMatrix<T>, b: &CsrMatrix<T>) -> Result<()> {
    if a.num_cols() != b.num_rows() {
        return Err(Error::Dimension(format!(
            "left is {}x{}, right is {}x{}",
            a.num_rows(),
            a.num_cols(),
            b.num_rows(),
            b.num_cols()
        )));
    }
    Ok(())
}

/// k-ary Huffman tree: the first round takes the `k_init` lightest nodes,
/// later rounds the `way` lightest. Equal weights go to the smaller id.
pub fn huffman_schedule(weights: &[u64], way: usize) -> MergePlan {
    let mut plan = MergePlan::empty(weights, way);
    let n = weights.len();
    if n < 2 {
        return plan;
    }
    let mut heap: BinaryHeap<Reverse<(u64, NodeId)>> =
        weights.iter().enumerate().map(|(i, &w)| Reverse((w, i))).collect();
    let mut take = k_init(n, way);
    while heap.len() > 1 {
        let inputs: Vec<NodeId> = (0..take).map(|_| heap.pop().expect("heap holds enough nodes").0 .1).collect();
        let out = plan.push_round(inputs);
        heap.push(Reverse((plan.weight(out), out)));
        take = way;
    }
    plan
}

/// Index-order baseline: the first round merges the first `k_init` leaves,
/// each later round folds the running result with the next `way - 1` leaves.
pub fn sequential_schedule(weights: &[u64], way: usize) -> MergePlan {
    let mut plan = MergePlan::empty(weights, way);
    let n = weights.len();
    if n < 2 {
        return plan;
    }
    let k = k_init(n, way);
    let mut acc = plan.push_round((0..k).collect());
    let mut next = k;
    while next < n {
        let mut inputs = vec![acc];
        inputs.extend(next..next + way - 1);
        next += way - 1;
        acc = plan.push_round(inputs);
    }
    plan
}

/// Uniformly random choice among available nodes each round.
pub fn random_schedule(weights: &[u64], way: usize, seed: u64) -> MergePlan {
    let mut plan = MergePlan::empty(weights, way);
    let n = weights.len();
    if n < 2 {
        return plan;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut avail: Vec<NodeId> = (0..n).collect();
    let mut take = k_init(n, way);
    while avail.len() > 1 {
        avail.shuffle(&mut rng);
        let inputs = avail.split_off(avail.len() - take);
        avail.push(plan.push_round(inputs));
        take = way;
    }
    plan
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Schedule {
    #[default]
    Huffman,
    Sequential,
    Random,
}

impl Schedule {
    pub const ALL: [Schedule; 3] = [Schedule::Huffman, Schedule::Sequential, Schedule::Random];

    pub fn plan(self, weights: &[u64], way: usize, seed: u64) -> MergePlan {
        match self {
            Schedule::Huffman => huffman_schedule(weights, way),
            Schedule::Sequential => sequential_schedule(weights, way),
            Schedule::Random => random_schedule(weights, way, seed),
        }
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Schedule::Huffman => "huffman",
            Schedule::Sequential => "sequential",
            Schedule::Random => "random",
        })
    }
}

impl FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "huffman" => Ok(Schedule::Huffman),
            "sequential" => Ok(Schedule::Sequential),
            "random" => Ok(Schedule::Random),
            other => Err(Error::InvalidParam(format!("unknown schedule '{other}'"))),
        }
    }
}
