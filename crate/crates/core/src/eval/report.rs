use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{align, binarized_kappa, ConfusionCounts, EvalError, LabelClass, VacuousF1};
use crate::labels::read_labels;
use crate::record::LabelRecord;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub counts: ConfusionCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub n_units: usize,
    pub scene_macro_f1: f64,
    pub scene_hamming: f64,
    pub action_micro_f1: f64,
    pub action_macro_f1: f64,
    pub action_hamming: f64,
    pub action_hier_hamming: f64,
    /// Mean per-label binarized kappa between gold and predictions over all eleven labels.
    pub kappa: Option<f64>,
    pub per_class: BTreeMap<String, ClassMetrics>,
    pub vacuous_f1: VacuousF1,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub missing_predictions: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub extra_predictions: Vec<String>,
}

pub fn evaluate_records(gold: &[LabelRecord], pred: &[LabelRecord], vacuous: VacuousF1) -> Result<EvaluationReport, EvalError> {
    let aligned = align(gold, pred)?;
    let scenes = LabelClass::scenes();
    let actions = LabelClass::actions();
    let all: Vec<LabelClass> = scenes.iter().chain(&actions).copied().collect();
    let per_class = all
        .iter()
        .map(|&c| {
            let counts = aligned.counts(c);
            let m = ClassMetrics {
                precision: counts.precision(vacuous),
                recall: counts.recall(vacuous),
                f1: counts.f1(vacuous),
                counts,
            };
            (c.to_string(), m)
        })
        .collect();
    let kappa = if aligned.pairs.is_empty() { None } else { Some(binarized_kappa(&aligned, &all)?) };
    Ok(EvaluationReport {
        n_units: aligned.pairs.len(),
        scene_macro_f1: aligned.macro_f1(&scenes, vacuous)?,
        scene_hamming: aligned.hamming_loss(&scenes)?,
        action_micro_f1: aligned.micro_f1(&actions, vacuous)?,
        action_macro_f1: aligned.macro_f1(&actions, vacuous)?,
        action_hamming: aligned.hamming_loss(&actions)?,
        action_hier_hamming: aligned.hierarchical_hamming_loss(),
        kappa,
        per_class,
        vacuous_f1: vacuous,
        missing_predictions: aligned.missing,
        extra_predictions: aligned.extra,
    })
}

/// Reads both label files (TSV or JSONL by extension) and scores them.
pub fn evaluate_corpus(gold: &Path, pred: &Path, vacuous: VacuousF1) -> Result<EvaluationReport, EvalError> {
    let g = read_labels(gold).map_err(|e| EvalError::Labels(e.to_string()))?;
    let p = read_labels(pred).map_err(|e| EvalError::Labels(e.to_string()))?;
    evaluate_records(&g, &p, vacuous)
}

impl EvaluationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Plain-text table with "F1 / HL" pairs per task, then per-class detail.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "units evaluated: {}", self.n_units);
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<28} {:>8} / {:<8}", "task", "F1", "HL");
        let _ = writeln!(s, "{:<28} {:>8.4} / {:<8.4}", "scene (macro F1)", self.scene_macro_f1, self.scene_hamming);
        let _ = writeln!(s, "{:<28} {:>8.4} / {:<8.4}", "action (micro F1)", self.action_micro_f1, self.action_hamming);
        let _ = writeln!(s, "{:<28} {:>8} / {:<8.4}", "action (hierarchical)", "-", self.action_hier_hamming);
        let _ = writeln!(s, "{:<28} {:>8.4}", "action macro F1", self.action_macro_f1);
        match self.kappa {
            Some(k) => {
                let _ = writeln!(s, "{:<28} {:>8.4}", "binarized kappa (mean)", k);
            }
            None => {
                let _ = writeln!(s, "{:<28} {:>8}", "binarized kappa (mean)", "n/a");
            }
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<36} {:>6} {:>6} {:>6} {:>9} {:>9} {:>9}", "class", "tp", "fp", "fn", "precision", "recall", "f1");
        for (name, m) in &self.per_class {
            let _ = writeln!(
                s,
                "{:<36} {:>6} {:>6} {:>6} {:>9.4} {:>9.4} {:>9.4}",
                name, m.counts.tp, m.counts.fp, m.counts.fn_, m.precision, m.recall, m.f1
            );
        }
        if !self.missing_predictions.is_empty() {
            let _ = writeln!(s, "\n{} gold units had no prediction: {}", self.missing_predictions.len(), self.missing_predictions.join(", "));
        }
        if !self.extra_predictions.is_empty() {
            let _ = writeln!(s, "\n{} predicted units absent from gold (ignored): {}", self.extra_predictions.len(), self.extra_predictions.join(", "));
        }
        s
    }
}
