use std::collections::BTreeMap;

use super::output::ResultRow;
use crate::error::ExperimentError;

/// Percentage reduction of `metric` relative to `baseline` within each
/// configuration: `(1 - value / baseline_value) * 100`.
///
/// `baseline` is matched against the scheme column. Every configuration
/// carrying the metric must include a baseline row.
pub fn compare_to_baseline(rows: &[ResultRow], baseline: &str, metric: &str) -> Result<Vec<ResultRow>, ExperimentError> {
    let mut groups: BTreeMap<_, Vec<&ResultRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.metric == metric) {
        groups.entry(r.config_key()).or_default().push(r);
    }
    if groups.is_empty() {
        return Err(ExperimentError::Compare(format!("no `{metric}` rows to compare")));
    }
    let name = format!("{metric}_reduction_pct_vs_{baseline}");
    let mut out = Vec::new();
    for group in groups.values() {
        let base = group.iter().find(|r| r.scheme == baseline).ok_or_else(|| {
            ExperimentError::Compare(format!("missing {baseline} baseline for {}", group[0].describe_config()))
        })?;
        for r in group {
            out.push(ResultRow {
                metric: name.clone(),
                value: reduction_pct(r.value, base.value),
                std_error: None,
                ..(*r).clone()
            });
        }
    }
    Ok(out)
}

pub fn reduction_pct(value: f64, baseline: f64) -> f64 {
    if value == baseline {
        0.0
    } else {
        (1.0 - value / baseline) * 100.0
    }
}

/// Resources against Legacy and PAR counts against MADP.
pub fn standard_comparisons(rows: &[ResultRow]) -> Result<Vec<ResultRow>, ExperimentError> {
    let mut out = compare_to_baseline(rows, "Legacy", "total_rb_units")?;
    out.extend(compare_to_baseline(rows, "MADP", "par_count")?);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(scheme: &str, density: f64, metric: &str, value: f64) -> ResultRow {
        ResultRow {
            experiment_id: "e".into(),
            scheme: scheme.into(),
            b_tx: 64,
            ue_density: density,
            lambda_p: 0.1,
            n_a: 5,
            n_m: String::new(),
            seed: None,
            metric: metric.into(),
            value,
            std_error: None,
        }
    }

    #[test]
    fn self_is_zero_and_half_is_fifty() {
        let rows = vec![
            row("Legacy", 200.0, "total_rb_units", 3072.0),
            row("MADP", 200.0, "total_rb_units", 1536.0),
        ];
        let out = compare_to_baseline(&rows, "Legacy", "total_rb_units").unwrap();
        assert_eq!(out[0].value, 0.0);
        assert_eq!(out[1].value, 50.0);
        assert_eq!(out[1].metric, "total_rb_units_reduction_pct_vs_Legacy");
    }

    #[test]
    fn missing_baseline_names_config() {
        let rows = vec![
            row("Legacy", 100.0, "total_rb_units", 3072.0),
            row("MADP", 100.0, "total_rb_units", 300.0),
            row("MADP", 300.0, "total_rb_units", 800.0),
        ];
        let err = compare_to_baseline(&rows, "Legacy", "total_rb_units").unwrap_err();
        assert!(err.to_string().contains("ue_density=300"), "{err}");
    }

    #[test]
    fn standard_pair() {
        let rows = vec![
            row("Legacy", 1.0, "total_rb_units", 100.0),
            row("MADP", 1.0, "total_rb_units", 20.0),
            row("MADP", 1.0, "par_count", 10.0),
            row("MFEP-AD", 1.0, "par_count", 2.0),
        ];
        let out = standard_comparisons(&rows).unwrap();
        assert_eq!(out.len(), 4);
        assert_eq!(out[3].value, 80.0);
    }
}
