use std::fmt;
use std::ops::AddAssign;

use serde::Serialize;

use super::EvalError;
use crate::labels::{Category, LabelId, LabelSchema};

/// Whether `B-X` and `I-X` count as the same prediction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum MatchMode {
    #[default]
    Category,
    ExactLabel,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

impl Counts {
    pub fn precision(&self) -> f64 {
        ratio(self.tp, self.tp + self.fp)
    }

    pub fn recall(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn f_measure(&self) -> f64 {
        let (p, r) = (self.precision(), self.recall());
        if p + r == 0.0 {
            0.0
        } else {
            2.0 * p * r / (p + r)
        }
    }

    /// Gold tokens of this category.
    pub fn support(&self) -> u64 {
        self.tp + self.fn_
    }
}

impl AddAssign for Counts {
    fn add_assign(&mut self, rhs: Counts) {
        self.tp += rhs.tp;
        self.fp += rhs.fp;
        self.fn_ += rhs.fn_;
    }
}

/// Token-level counts per PHI category.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalReport {
    pub per_category: [Counts; 6],
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub category: String,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MacroAverage {
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    /// Categories with at least one gold or predicted token.
    pub categories: usize,
}

#[derive(Serialize)]
struct ReportFile {
    rows: Vec<ReportRow>,
    macro_average: MacroAverage,
}

impl EvalReport {
    pub fn counts(&self, category: Category) -> Counts {
        self.per_category[category.index()]
    }

    /// Micro aggregate over all categories.
    pub fn all(&self) -> Counts {
        self.micro_over(&Category::ALL)
    }

    pub fn micro_over(&self, categories: &[Category]) -> Counts {
        let mut total = Counts::default();
        for &c in categories {
            total += self.counts(c);
        }
        total
    }

    pub fn macro_average(&self) -> MacroAverage {
        let active: Vec<Counts> =
            self.per_category.iter().copied().filter(|c| c.tp + c.fp + c.fn_ > 0).collect();
        let n = active.len();
        let mean = |f: fn(&Counts) -> f64| if n == 0 { 0.0 } else { active.iter().map(f).sum::<f64>() / n as f64 };
        MacroAverage {
            precision: mean(Counts::precision),
            recall: mean(Counts::recall),
            f_measure: mean(Counts::f_measure),
            categories: n,
        }
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        let row = |name: &str, c: Counts| ReportRow {
            category: name.to_string(),
            precision: c.precision(),
            recall: c.recall(),
            f_measure: c.f_measure(),
            tp: c.tp,
            fp: c.fp,
            fn_: c.fn_,
        };
        Category::ALL
            .iter()
            .map(|&c| row(c.display_name(), self.counts(c)))
            .chain(std::iter::once(row("All", self.all())))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let file = ReportFile { rows: self.rows(), macro_average: self.macro_average() };
        serde_json::to_string_pretty(&file).expect("report serializes")
    }
}

impl AddAssign for EvalReport {
    fn add_assign(&mut self, rhs: EvalReport) {
        for (a, b) in self.per_category.iter_mut().zip(rhs.per_category) {
            *a += b;
        }
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<10} {:>9} {:>9} {:>9} {:>7} {:>7} {:>7}",
            "", "Precision", "Recall", "F-measure", "TP", "FP", "FN"
        )?;
        for r in self.rows() {
            writeln!(
                f,
                "{:<10} {:>9.3} {:>9.3} {:>9.3} {:>7} {:>7} {:>7}",
                r.category, r.precision, r.recall, r.f_measure, r.tp, r.fp, r.fn_
            )?;
        }
        let m = self.macro_average();
        write!(f, "{:<10} {:>9.3} {:>9.3} {:>9.3}", "Macro", m.precision, m.recall, m.f_measure)
    }
}

/// Scores one token. `None` predictions (uncovered tokens) are skipped by callers.
fn score_token(report: &mut EvalReport, gold: LabelId, pred: LabelId, schema: &LabelSchema, mode: MatchMode) {
    let g = schema.category(gold);
    let p = schema.category(pred);
    let hit = match mode {
        MatchMode::Category => g == p,
        MatchMode::ExactLabel => gold == pred,
    };
    if hit {
        if let Some(c) = g {
            report.per_category[c.index()].tp += 1;
        }
        return;
    }
    if let Some(c) = p {
        report.per_category[c.index()].fp += 1;
    }
    if let Some(c) = g {
        report.per_category[c.index()].fn_ += 1;
    }
}

/// Token-level precision/recall/F-measure per category.
pub fn score(
    gold: &[LabelId],
    pred: &[LabelId],
    schema: &LabelSchema,
    mode: MatchMode,
) -> Result<EvalReport, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch { gold: gold.len(), pred: pred.len() });
    }
    let mut report = EvalReport::default();
    for (&g, &p) in gold.iter().zip(pred) {
        score_token(&mut report, g, p, schema, mode);
    }
    Ok(report)
}

/// Like [`score`], ignoring positions without a prediction.
pub fn score_covered(
    gold: &[LabelId],
    pred: &[Option<LabelId>],
    schema: &LabelSchema,
    mode: MatchMode,
) -> Result<EvalReport, EvalError> {
    if gold.len() != pred.len() {
        return Err(EvalError::LengthMismatch { gold: gold.len(), pred: pred.len() });
    }
    let mut report = EvalReport::default();
    for (&g, p) in gold.iter().zip(pred) {
        if let Some(p) = *p {
            score_token(&mut report, g, p, schema, mode);
        }
    }
    Ok(report)
}
