//! Cross-method, cross-waveform comparison tables.

use serde::{Deserialize, Serialize};

use crate::run::EvalReport;
use crate::{EvalError, Result};

/// One method's scores across the waveform columns of a [`Comparison`].
/// `None` marks a combination no report covered.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method: String,
    pub mean_error_m: Vec<Option<f64>>,
    pub median_error_m: Vec<Option<f64>>,
    pub detection_rate: Vec<Option<f64>>,
}

/// A method × waveform grid of headline statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    /// Column labels, sorted; every row's vectors align with these.
    pub waveforms: Vec<String>,
    /// One row per method, sorted by method name.
    pub rows: Vec<ComparisonRow>,
}

/// Collates reports into a comparison grid. Needs at least two reports; a
/// (method, waveform) cell filled twice is rejected as ambiguous.
pub fn compare_report(reports: &[EvalReport]) -> Result<Comparison> {
    if reports.len() < 2 {
        return Err(EvalError::InvalidParams(format!(
            "a comparison needs at least two reports, got {}",
            reports.len()
        )));
    }
    let mut waveforms: Vec<String> = reports.iter().map(|r| r.waveform.clone()).collect();
    waveforms.sort();
    waveforms.dedup();
    let mut methods: Vec<String> = reports.iter().map(|r| r.method.clone()).collect();
    methods.sort();
    methods.dedup();

    let mut rows: Vec<ComparisonRow> = methods
        .into_iter()
        .map(|method| ComparisonRow {
            method,
            mean_error_m: vec![None; waveforms.len()],
            median_error_m: vec![None; waveforms.len()],
            detection_rate: vec![None; waveforms.len()],
        })
        .collect();
    for r in reports {
        let col = waveforms.iter().position(|w| *w == r.waveform).unwrap();
        let row = rows.iter_mut().find(|x| x.method == r.method).unwrap();
        if row.mean_error_m[col].is_some() || row.median_error_m[col].is_some() {
            return Err(EvalError::Incompatible(format!(
                "two reports fill the same cell: method '{}' on waveform '{}'",
                r.method, r.waveform
            )));
        }
        row.mean_error_m[col] = r.mean_error_m;
        row.median_error_m[col] = r.median_error_m;
        row.detection_rate[col] = r.detection_rate;
    }
    Ok(Comparison { waveforms, rows })
}

fn cell(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.6}"),
        None => "n/a".to_string(),
    }
}

impl Comparison {
    /// CSV with one line per (method, statistic) and one column per
    /// waveform. Unavailable combinations read `n/a`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,statistic");
        for w in &self.waveforms {
            out.push(',');
            out.push_str(w);
        }
        out.push('\n');
        for row in &self.rows {
            for (label, values) in [
                ("mean_error_m", &row.mean_error_m),
                ("median_error_m", &row.median_error_m),
                ("detection_rate", &row.detection_rate),
            ] {
                out.push_str(&row.method);
                out.push(',');
                out.push_str(label);
                for v in values {
                    out.push(',');
                    out.push_str(&cell(*v));
                }
                out.push('\n');
            }
        }
        out
    }
}

impl EvalReport {
    /// The error distribution as CSV, one `error_m,cumulative_fraction` line
    /// per matched target, ready for plotting.
    pub fn cdf_csv(&self) -> String {
        let mut out = String::from("error_m,cumulative_fraction\n");
        for [e, f] in &self.cdf {
            out.push_str(&format!("{e},{f}\n"));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stub(method: &str, waveform: &str, mean: f64) -> EvalReport {
        EvalReport {
            method: method.into(),
            waveform: waveform.into(),
            threshold_m: 1.5,
            n_frames: 10,
            n_evaluated: 8,
            n_targets: 8,
            n_matched: 8,
            n_missed: 0,
            detection_rate: Some(1.0),
            mean_error_m: Some(mean),
            median_error_m: Some(mean / 2.0),
            threshold_accuracy: None,
            n_threshold_frames: 0,
            errors_m: vec![mean; 8],
            cdf: vec![[mean, 1.0]],
            frames: Vec::new(),
        }
    }

    #[test]
    fn six_reports_collate_into_a_two_by_three_grid() {
        let reports = vec![
            stub("radar", "waic", 0.5),
            stub("radar", "wifi100", 0.7),
            stub("radar", "wifi40", 1.1),
            stub("ann", "waic", 0.2),
            stub("ann", "wifi100", 0.3),
            stub("ann", "wifi40", 0.4),
        ];
        let table = compare_report(&reports).unwrap();
        assert_eq!(table.waveforms, vec!["waic", "wifi100", "wifi40"]);
        assert_eq!(table.rows.len(), 2);
        assert_eq!(table.rows[0].method, "ann");
        assert_eq!(table.rows[1].mean_error_m, vec![Some(0.5), Some(0.7), Some(1.1)]);
        let csv = table.to_csv();
        assert!(csv.starts_with("method,statistic,waic,wifi100,wifi40\n"));
        assert!(csv.contains("ann,mean_error_m,0.200000,0.300000,0.400000"));
    }

    #[test]
    fn disjoint_waveforms_leave_unavailable_cells() {
        let reports = vec![stub("radar", "waic", 0.5), stub("ann", "wifi40", 0.2)];
        let table = compare_report(&reports).unwrap();
        assert_eq!(table.waveforms, vec!["waic", "wifi40"]);
        assert_eq!(table.rows[0].mean_error_m, vec![None, Some(0.2)]);
        assert_eq!(table.rows[1].mean_error_m, vec![Some(0.5), None]);
        assert!(table.to_csv().contains("ann,mean_error_m,n/a,0.200000"));
    }

    #[test]
    fn degenerate_comparisons_are_rejected() {
        assert!(compare_report(&[]).is_err());
        assert!(compare_report(&[stub("radar", "waic", 0.5)]).is_err());
        let dup = vec![stub("radar", "waic", 0.5), stub("radar", "waic", 0.6)];
        assert!(matches!(
            compare_report(&dup).unwrap_err(),
            EvalError::Incompatible(_)
        ));
    }

    #[test]
    fn cdf_csv_round_trips_the_distribution() {
        let report = stub("ann", "waic", 0.25);
        let csv = report.cdf_csv();
        assert_eq!(csv, "error_m,cumulative_fraction\n0.25,1\n");
    }
}
