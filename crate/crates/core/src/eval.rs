//! Scoring metrics and the per-metric comparison report.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricKind;

pub use crate::model::mse_loss as mse;

/// Tolerances reported by default.
pub const DEFAULT_TOLERANCES: [f64; 3] = [0.2, 0.33, 0.5];

fn check_series(preds: &[f64], targets: &[f64]) -> Result<()> {
    if preds.len() != targets.len() {
        return Err(Error::Argument(format!("{} predictions vs {} targets", preds.len(), targets.len())));
    }
    if preds.is_empty() {
        return Err(Error::Argument("empty series".into()));
    }
    Ok(())
}

/// Fraction of pairs with `|pred - target| < tol`. Ties count as misses.
pub fn tolerance_accuracy(preds: &[f64], targets: &[f64], tol: f64) -> Result<f64> {
    check_series(preds, targets)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::Range { value: tol, range: "(0, inf)" });
    }
    let hits = preds.iter().zip(targets).filter(|(p, t)| (*p - *t).abs() < tol).count();
    Ok(hits as f64 / preds.len() as f64)
}

/// Sample Pearson correlation.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    check_series(xs, ys)?;
    if xs.len() < 2 {
        return Err(Error::Degenerate("pearson needs at least two points".into()));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate("pearson of a constant series".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// MSE of always predicting the target mean, i.e. the population variance
/// of the targets.
pub fn constant_predictor_mse(targets: &[f64]) -> Result<f64> {
    if targets.is_empty() {
        return Err(Error::Argument("empty series".into()));
    }
    let mean = targets.iter().sum::<f64>() / targets.len() as f64;
    Ok(targets.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / targets.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Approach {
    #[serde(rename = "baseline-cosine")]
    BaselineCosine,
    #[serde(rename = "ffn")]
    Ffn,
}

impl Approach {
    pub const ALL: [Approach; 2] = [Approach::BaselineCosine, Approach::Ffn];

    pub fn as_str(self) -> &'static str {
        match self {
            Approach::BaselineCosine => "baseline-cosine",
            Approach::Ffn => "ffn",
        }
    }
}

impl fmt::Display for Approach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Predictions and targets of one (metric, approach) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredSeries {
    pub metric: MetricKind,
    pub approach: Approach,
    pub preds: Vec<f64>,
    pub targets: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub metric: MetricKind,
    pub approach: Approach,
    pub n: usize,
    pub mse: f64,
    /// `None` when either series is constant.
    pub pearson: Option<f64>,
    pub constant_mse: f64,
    /// Keyed `acc@<tol>`.
    #[serde(flatten)]
    pub accuracies: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub tolerances: Vec<f64>,
    pub rows: Vec<ReportRow>,
}

pub fn accuracy_key(tol: f64) -> String {
    format!("acc@{tol}")
}

/// Fills one row per metric and approach, in metric then approach order.
pub fn build_report(series: &[ScoredSeries], tolerances: &[f64]) -> Result<EvalReport> {
    let mut rows = Vec::with_capacity(MetricKind::ALL.len() * Approach::ALL.len());
    for metric in MetricKind::ALL {
        for approach in Approach::ALL {
            let incomplete = || Error::Incomplete { metric: metric.to_string(), approach: approach.to_string() };
            let s = series
                .iter()
                .find(|s| s.metric == metric && s.approach == approach)
                .ok_or_else(incomplete)?;
            if s.preds.len() < 2 {
                return Err(incomplete());
            }
            let accuracies = tolerances
                .iter()
                .map(|&t| Ok((accuracy_key(t), tolerance_accuracy(&s.preds, &s.targets, t)?)))
                .collect::<Result<_>>()?;
            let pearson = match pearson(&s.preds, &s.targets) {
                Ok(r) => Some(r),
                Err(Error::Degenerate(_)) => None,
                Err(e) => return Err(e),
            };
            rows.push(ReportRow {
                metric,
                approach,
                n: s.preds.len(),
                mse: mse(&s.preds, &s.targets)?,
                pearson,
                constant_mse: constant_predictor_mse(&s.targets)?,
                accuracies,
            });
        }
    }
    Ok(EvalReport { tolerances: tolerances.to_vec(), rows })
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)? + "\n")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn row(&self, metric: MetricKind, approach: Approach) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.metric == metric && r.approach == approach)
    }

    /// Aligned plain-text table.
    pub fn render_table(&self) -> String {
        let mut header = vec!["metric".to_string(), "approach".into(), "n".into(), "mse".into()];
        header.extend(self.tolerances.iter().map(|t| accuracy_key(*t)));
        header.extend(["pearson".to_string(), "const-mse".into()]);
        let mut table = vec![header];
        for r in &self.rows {
            let mut line = vec![r.metric.to_string(), r.approach.to_string(), r.n.to_string(), format!("{:.4}", r.mse)];
            line.extend(self.tolerances.iter().map(|t| {
                r.accuracies.get(&accuracy_key(*t)).map_or("-".to_string(), |a| format!("{a:.3}"))
            }));
            line.push(r.pearson.map_or("n/a".to_string(), |p| format!("{p:.3}")));
            line.push(format!("{:.4}", r.constant_mse));
            table.push(line);
        }
        let widths: Vec<usize> =
            (0..table[0].len()).map(|c| table.iter().map(|row| row[c].len()).max().unwrap_or(0)).collect();
        let mut out = String::new();
        for row in &table {
            let cells: Vec<String> = row
                .iter()
                .zip(&widths)
                .enumerate()
                .map(|(i, (cell, w))| if i < 2 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
                .collect();
            let _ = writeln!(out, "{}", cells.join("  ").trim_end());
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tolerance_examples() {
        assert_eq!(tolerance_accuracy(&[0.1, 0.9], &[0.1, 0.9], 0.01).unwrap(), 1.0);
        let acc = tolerance_accuracy(&[0.5, 0.9, 0.1], &[0.45, 0.2, 0.15], 0.33).unwrap();
        assert!((acc - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(tolerance_accuracy(&[0.75], &[0.25], 0.5).unwrap(), 0.0);
        assert!(matches!(tolerance_accuracy(&[0.1], &[0.1], 0.0), Err(Error::Range { .. })));
        assert!(matches!(tolerance_accuracy(&[], &[], 0.1), Err(Error::Argument(_))));
        assert!(matches!(tolerance_accuracy(&[0.1], &[0.1, 0.2], 0.1), Err(Error::Argument(_))));
    }

    #[test]
    fn pearson_examples() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[6.0, 4.0, 2.0]).unwrap() + 1.0).abs() < 1e-15);
        assert!((pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(pearson(&[1.0, 1.0], &[1.0, 2.0]), Err(Error::Degenerate(_))));
        assert!(matches!(pearson(&[1.0], &[1.0]), Err(Error::Degenerate(_))));
    }

    fn full_series(f: impl Fn(MetricKind, Approach) -> (Vec<f64>, Vec<f64>)) -> Vec<ScoredSeries> {
        MetricKind::ALL
            .into_iter()
            .flat_map(|m| Approach::ALL.into_iter().map(move |a| (m, a)))
            .map(|(metric, approach)| {
                let (preds, targets) = f(metric, approach);
                ScoredSeries { metric, approach, preds, targets }
            })
            .collect()
    }

    #[test]
    fn report_complete_and_round_trips() {
        let series = full_series(|m, a| {
            let t = vec![0.0, 0.5, 1.0, 0.25];
            if m == MetricKind::Time && a == Approach::Ffn {
                (t.clone(), t)
            } else {
                (vec![0.2, 0.4, 0.9, 0.3], t)
            }
        });
        let report = build_report(&series, &DEFAULT_TOLERANCES).unwrap();
        assert_eq!(report.rows.len(), 14);
        let exact = report.row(MetricKind::Time, Approach::Ffn).unwrap();
        assert_eq!(exact.mse, 0.0);
        assert!(exact.accuracies.values().all(|a| *a == 1.0));
        assert_eq!(exact.n, 4);
        let json = report.to_json().unwrap();
        for key in ["\"metric\"", "\"approach\"", "\"mse\"", "\"acc@0.2\"", "\"acc@0.33\"", "\"acc@0.5\"", "\"pearson\"", "\"n\""] {
            assert!(json.contains(key), "{key}");
        }
        assert!(json.contains("\"baseline-cosine\""));
        assert_eq!(EvalReport::from_json(&json).unwrap(), report);
        let table = report.render_table();
        assert_eq!(table.lines().count(), 15);
        assert!(table.lines().next().unwrap().starts_with("metric"));
    }

    #[test]
    fn missing_cell_is_named() {
        let mut series = full_series(|_, _| (vec![0.1, 0.2], vec![0.3, 0.1]));
        series.retain(|s| !(s.metric == MetricKind::Tone && s.approach == Approach::BaselineCosine));
        match build_report(&series, &DEFAULT_TOLERANCES) {
            Err(Error::Incomplete { metric, approach }) => {
                assert_eq!((metric.as_str(), approach.as_str()), ("tone", "baseline-cosine"));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn constant_predictions_report_null_pearson() {
        let series = full_series(|_, _| (vec![0.5, 0.5, 0.5], vec![0.1, 0.6, 0.9]));
        let r = build_report(&series, &[0.5]).unwrap();
        assert!(r.rows.iter().all(|row| row.pearson.is_none()));
    }

    fn series_pair() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
        (2usize..40).prop_flat_map(|n| {
            (proptest::collection::vec(0.0f64..1.0, n), proptest::collection::vec(0.0f64..1.0, n))
        })
    }

    proptest! {
        #[test]
        fn accuracy_monotone_in_tolerance((p, t) in series_pair(), a in 0.01f64..1.0, b in 0.01f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(tolerance_accuracy(&p, &t, lo).unwrap() <= tolerance_accuracy(&p, &t, hi).unwrap());
        }

        #[test]
        fn mse_symmetric_and_constant_baseline((p, t) in series_pair()) {
            prop_assert_eq!(mse(&p, &t).unwrap(), mse(&t, &p).unwrap());
            let mean = t.iter().sum::<f64>() / t.len() as f64;
            let constant = vec![mean; t.len()];
            prop_assert!((mse(&constant, &t).unwrap() - constant_predictor_mse(&t).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn pearson_affine_invariance((x, y) in series_pair(), a in 0.1f64..10.0, b in -5.0f64..5.0) {
            let Ok(r) = pearson(&x, &y) else { return Ok(()) };
            let xt: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            prop_assert!((pearson(&xt, &y).unwrap() - r).abs() < 1e-9);
            let neg: Vec<f64> = y.iter().map(|v| -v).collect();
            prop_assert!((pearson(&x, &neg).unwrap() + r).abs() < 1e-9);
            prop_assert!((-1.0..=1.0).contains(&r));
        }
    }
}
