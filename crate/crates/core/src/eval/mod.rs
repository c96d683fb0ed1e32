//! Multi-label evaluation: confusion counts, macro/micro F1, Hamming loss,
//! hierarchical Hamming loss over the scene→action tree, and Cohen's kappa.
//!
//! Gold and predicted records are aligned by `unit_id`; a gold unit with no
//! prediction counts as an all-negative prediction.

mod report;

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::record::LabelRecord;
use crate::taxonomy::{compatible_scenes, Action, Scene};

pub use report::{evaluate_corpus, evaluate_records, ClassMetrics, EvaluationReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("duplicate unit_id {unit_id:?} in {side} labels")]
    Duplicate { side: &'static str, unit_id: String },
    #[error("label set is empty")]
    EmptyLabelSet,
    #[error("rater sequences differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no ratings given")]
    EmptyInput,
    #[error("{0}")]
    Labels(String),
}

/// A single binary label: a scene or an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LabelClass {
    Scene(Scene),
    Action(Action),
}

impl LabelClass {
    pub fn scenes() -> Vec<LabelClass> {
        Scene::ALL.into_iter().map(LabelClass::Scene).collect()
    }

    pub fn actions() -> Vec<LabelClass> {
        Action::ALL.into_iter().map(LabelClass::Action).collect()
    }

    pub fn present_in(self, r: &LabelRecord) -> bool {
        match self {
            LabelClass::Scene(s) => r.scenes.contains(&s),
            LabelClass::Action(a) => r.actions.contains(&a),
        }
    }
}

impl fmt::Display for LabelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelClass::Scene(s) => write!(f, "scene:{s}"),
            LabelClass::Action(a) => write!(f, "action:{a}"),
        }
    }
}

/// How to score F1 for a class with no positives anywhere (`tp = fp = fn = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VacuousF1 {
    #[default]
    One,
    Zero,
}

impl VacuousF1 {
    fn value(self) -> f64 {
        match self {
            VacuousF1::One => 1.0,
            VacuousF1::Zero => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn f1(&self, vacuous: VacuousF1) -> f64 {
        let denom = 2 * self.tp + self.fp + self.fn_;
        if denom == 0 {
            vacuous.value()
        } else {
            2.0 * self.tp as f64 / denom as f64
        }
    }

    pub fn precision(&self, vacuous: VacuousF1) -> f64 {
        match self.tp + self.fp {
            0 if self.fn_ == 0 => vacuous.value(),
            0 => 0.0,
            d => self.tp as f64 / d as f64,
        }
    }

    pub fn recall(&self, vacuous: VacuousF1) -> f64 {
        match self.tp + self.fn_ {
            0 if self.fp == 0 => vacuous.value(),
            0 => 0.0,
            d => self.tp as f64 / d as f64,
        }
    }
}

impl std::ops::Add for ConfusionCounts {
    type Output = ConfusionCounts;
    fn add(self, o: ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts { tp: self.tp + o.tp, fp: self.fp + o.fp, fn_: self.fn_ + o.fn_ }
    }
}

/// Gold records paired with their predictions, in gold order.
#[derive(Debug, Clone)]
pub struct Aligned<'a> {
    pub pairs: Vec<(&'a LabelRecord, Option<&'a LabelRecord>)>,
    /// Gold units without a prediction.
    pub missing: Vec<String>,
    /// Predicted units absent from gold; ignored for scoring.
    pub extra: Vec<String>,
}

fn index<'a>(records: &'a [LabelRecord], side: &'static str) -> Result<HashMap<&'a str, &'a LabelRecord>, EvalError> {
    let mut map = HashMap::with_capacity(records.len());
    for r in records {
        if map.insert(r.unit_id.as_str(), r).is_some() {
            return Err(EvalError::Duplicate { side, unit_id: r.unit_id.clone() });
        }
    }
    Ok(map)
}

pub fn align<'a>(gold: &'a [LabelRecord], pred: &'a [LabelRecord]) -> Result<Aligned<'a>, EvalError> {
    let gold_ids = index(gold, "gold")?;
    let pred_map = index(pred, "predicted")?;
    let pairs: Vec<_> = gold.iter().map(|g| (g, pred_map.get(g.unit_id.as_str()).copied())).collect();
    let missing = pairs.iter().filter(|(_, p)| p.is_none()).map(|(g, _)| g.unit_id.clone()).collect();
    let extra = pred.iter().filter(|p| !gold_ids.contains_key(p.unit_id.as_str())).map(|p| p.unit_id.clone()).collect();
    Ok(Aligned { pairs, missing, extra })
}

fn predicted(p: Option<&LabelRecord>, class: LabelClass) -> bool {
    p.is_some_and(|p| class.present_in(p))
}

impl Aligned<'_> {
    pub fn counts(&self, class: LabelClass) -> ConfusionCounts {
        self.pairs.iter().fold(ConfusionCounts::default(), |mut c, &(g, p)| {
            match (class.present_in(g), predicted(p, class)) {
                (true, true) => c.tp += 1,
                (false, true) => c.fp += 1,
                (true, false) => c.fn_ += 1,
                (false, false) => {}
            }
            c
        })
    }

    pub fn hamming_loss(&self, labels: &[LabelClass]) -> Result<f64, EvalError> {
        if labels.is_empty() {
            return Err(EvalError::EmptyLabelSet);
        }
        if self.pairs.is_empty() {
            return Ok(0.0);
        }
        let mismatches: usize = self
            .pairs
            .iter()
            .map(|&(g, p)| labels.iter().filter(|&&c| c.present_in(g) != predicted(p, c)).count())
            .sum();
        Ok(mismatches as f64 / (self.pairs.len() * labels.len()) as f64)
    }

    pub fn micro_f1(&self, labels: &[LabelClass], vacuous: VacuousF1) -> Result<f64, EvalError> {
        if labels.is_empty() {
            return Err(EvalError::EmptyLabelSet);
        }
        let pooled = labels.iter().map(|&c| self.counts(c)).fold(ConfusionCounts::default(), |a, b| a + b);
        Ok(pooled.f1(vacuous))
    }

    pub fn macro_f1(&self, labels: &[LabelClass], vacuous: VacuousF1) -> Result<f64, EvalError> {
        let counts: Vec<_> = labels.iter().map(|&c| self.counts(c)).collect();
        macro_f1(&counts, vacuous)
    }

    pub fn hierarchical_hamming_loss(&self) -> f64 {
        let nodes = hierarchy_nodes();
        if self.pairs.is_empty() {
            return 0.0;
        }
        let empty = LabelRecord::default();
        let cost: usize = self
            .pairs
            .iter()
            .map(|&(g, p)| hierarchical_cost(&nodes, g, p.unwrap_or(&empty)))
            .sum();
        cost as f64 / (self.pairs.len() * nodes.len()) as f64
    }
}

pub fn confusion_counts(gold: &[LabelRecord], pred: &[LabelRecord], class: LabelClass) -> Result<ConfusionCounts, EvalError> {
    Ok(align(gold, pred)?.counts(class))
}

/// Unweighted mean of per-class F1.
pub fn macro_f1(counts: &[ConfusionCounts], vacuous: VacuousF1) -> Result<f64, EvalError> {
    if counts.is_empty() {
        return Err(EvalError::EmptyLabelSet);
    }
    Ok(counts.iter().map(|c| c.f1(vacuous)).sum::<f64>() / counts.len() as f64)
}

pub fn hamming_loss(gold: &[LabelRecord], pred: &[LabelRecord], labels: &[LabelClass]) -> Result<f64, EvalError> {
    align(gold, pred)?.hamming_loss(labels)
}

pub fn micro_f1(gold: &[LabelRecord], pred: &[LabelRecord], labels: &[LabelClass]) -> Result<f64, EvalError> {
    align(gold, pred)?.micro_f1(labels, VacuousF1::One)
}

pub fn hierarchical_hamming_loss(gold: &[LabelRecord], pred: &[LabelRecord]) -> Result<f64, EvalError> {
    Ok(align(gold, pred)?.hierarchical_hamming_loss())
}

/// Node of the scene→action tree used by the hierarchical loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum HierNode {
    Scene(Scene),
    /// An action observed under a compatible scene.
    Pair(Scene, Action),
    /// Freezing hangs off the root as well, since a frozen screen may carry no scene.
    RootFreezing,
}

/// The three scene nodes, every compatible (scene, action) pair, and root-level Freezing.
pub fn hierarchy_nodes() -> Vec<HierNode> {
    let mut nodes: Vec<HierNode> = Scene::ALL.into_iter().map(HierNode::Scene).collect();
    for scene in Scene::ALL {
        for action in Action::ALL {
            if compatible_scenes(action).contains(&scene) {
                nodes.push(HierNode::Pair(scene, action));
            }
        }
    }
    nodes.push(HierNode::RootFreezing);
    nodes
}

fn node_present(node: HierNode, r: &LabelRecord) -> bool {
    match node {
        HierNode::Scene(s) => r.scenes.contains(&s),
        HierNode::Pair(s, a) => r.scenes.contains(&s) && r.actions.contains(&a),
        HierNode::RootFreezing => r.actions.contains(&Action::Freezing),
    }
}

/// Mismatched nodes of one unit; pair errors under a mismatched scene are not charged again.
fn hierarchical_cost(nodes: &[HierNode], gold: &LabelRecord, pred: &LabelRecord) -> usize {
    nodes
        .iter()
        .filter(|&&n| {
            let ancestor_ok = match n {
                HierNode::Pair(s, _) => gold.scenes.contains(&s) == pred.scenes.contains(&s),
                _ => true,
            };
            ancestor_ok && node_present(n, gold) != node_present(n, pred)
        })
        .count()
}

/// Chance-corrected agreement between two raters over categorical items.
pub fn cohen_kappa<T: Eq + Hash + Ord>(a: &[T], b: &[T]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    let n = a.len() as f64;
    let agree = a.iter().zip(b).filter(|(x, y)| x == y).count() as f64;
    let p_o = agree / n;
    let mut ma: BTreeMap<&T, f64> = BTreeMap::new();
    let mut mb: BTreeMap<&T, f64> = BTreeMap::new();
    for x in a {
        *ma.entry(x).or_default() += 1.0;
    }
    for y in b {
        *mb.entry(y).or_default() += 1.0;
    }
    let categories: HashSet<&T> = ma.keys().chain(mb.keys()).copied().collect();
    let mut cats: Vec<&T> = categories.into_iter().collect();
    cats.sort();
    let p_e: f64 = cats
        .iter()
        .map(|c| ma.get(c).copied().unwrap_or(0.0) / n * mb.get(c).copied().unwrap_or(0.0) / n)
        .sum();
    if (1.0 - p_e).abs() < 1e-15 {
        return Ok(if p_o == 1.0 { 1.0 } else { 0.0 });
    }
    Ok((p_o - p_e) / (1.0 - p_e))
}

/// Mean over labels of kappa between gold and predicted presence of that label.
pub fn binarized_kappa(aligned: &Aligned<'_>, labels: &[LabelClass]) -> Result<f64, EvalError> {
    if labels.is_empty() {
        return Err(EvalError::EmptyLabelSet);
    }
    let mut total = 0.0;
    for &c in labels {
        let g: Vec<bool> = aligned.pairs.iter().map(|&(g, _)| c.present_in(g)).collect();
        let p: Vec<bool> = aligned.pairs.iter().map(|&(_, p)| predicted(p, c)).collect();
        total += cohen_kappa(&g, &p)?;
    }
    Ok(total / labels.len() as f64)
}
