//! Observation-scale outlier flags and the filter-and-refit workflow.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Dataset, McmcConfig, ModelSpec, PosteriorDraws};
use crate::sampler::fit;
use crate::sph::LossKind;
use crate::stats::quantile_sorted;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutlierReport {
    /// Upper posterior percentile of each observation's scale.
    pub s: Vec<f64>,
    pub threshold: f64,
    /// Zero-based row indices with `s_i > threshold`, ascending.
    pub flagged: Vec<usize>,
    pub quartiles: (f64, f64),
}

/// Per-observation empirical quantile of the recorded `lambda` draws.
pub fn lambda_percentiles(draws: &PosteriorDraws, prob: f64) -> Result<Vec<f64>> {
    if !(0.0..=1.0).contains(&prob) {
        return Err(Error::Input(format!("percentile level must lie in [0, 1], got {prob}")));
    }
    if draws.lambda.is_none() {
        return Err(Error::Unsupported("draws do not contain observation scales".into()));
    }
    Ok((0..draws.n)
        .map(|i| {
            let mut xs = draws.lambda_observation(i).expect("checked above");
            xs.sort_by(f64::total_cmp);
            quantile_sorted(&xs, prob)
        })
        .collect())
}

/// Boxplot rule: flag `s_i > q3 + 1.5 (q3 - q1)`.
pub fn tukey_flag(s: &[f64]) -> Result<OutlierReport> {
    if s.len() < 4 {
        return Err(Error::TooFew { needed: 4, got: s.len() });
    }
    let mut sorted = s.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    let threshold = q3 + 1.5 * (q3 - q1);
    let flagged = s.iter().enumerate().filter(|(_, v)| **v > threshold).map(|(i, _)| i).collect();
    Ok(OutlierReport { s: s.to_vec(), threshold, flagged, quartiles: (q1, q3) })
}

/// Fits on stream `stream_id`, flags by the upper 95% scale percentile,
/// drops the flagged rows and refits on stream `stream_id + 1`.
pub fn filter_and_refit(
    data: &Dataset,
    spec: &ModelSpec,
    config: &McmcConfig,
    stream_id: u64,
) -> Result<(OutlierReport, PosteriorDraws)> {
    if spec.common().loss == LossKind::L2 {
        return Err(Error::Unsupported(
            "the L2 model has no outlier-filtered refit since it carries no observation-level scales".into(),
        ));
    }
    let mut config = config.clone();
    config.record_lambda = true;
    let first = fit(data, spec, &config, stream_id)?;
    let report = tukey_flag(&lambda_percentiles(&first, 0.95)?)?;
    let kept = data.n() - report.flagged.len();
    let needed = spec.active_parameters(data.p()).max(1);
    if kept < needed {
        return Err(Error::TooFew { needed, got: kept });
    }
    let reduced = data.without_rows(&report.flagged);
    let refit = fit(&reduced, spec, &config, stream_id.wrapping_add(1))?;
    Ok((report, refit))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tukey_hand_example() {
        let r = tukey_flag(&[1.0, 2.0, 3.0, 4.0, 100.0]).unwrap();
        assert_eq!(r.quartiles, (2.0, 4.0));
        assert_eq!(r.threshold, 7.0);
        assert_eq!(r.flagged, vec![4]);
    }

    #[test]
    fn benign_inputs_flag_nothing() {
        assert!(tukey_flag(&[3.0; 6]).unwrap().flagged.is_empty());
        let s: Vec<f64> = (0..=10).map(|i| 1.0 + 0.1 * i as f64).collect();
        assert!(tukey_flag(&s).unwrap().flagged.is_empty());
    }

    #[test]
    fn too_few() {
        assert!(matches!(tukey_flag(&[1.0, 2.0, 3.0]), Err(Error::TooFew { needed: 4, got: 3 })));
    }
}
