//! Frequency tables, Wilson score intervals and chi-square goodness of fit.

use serde::Serialize;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{Error, Result};
use crate::hilbert::EIGENVALUE_CLUSTER_TOLERANCE;
use crate::simulate::{EnsembleRecord, TimeLabel};
use crate::tsvf::{OutcomeDistribution, ZERO_THRESHOLD};

/// Two-sided 95% normal quantile used for every interval in the crate.
pub const Z_95: f64 = 1.96;
/// Smallest expected count accepted in a chi-square cell.
pub const MIN_EXPECTED_COUNT: f64 = 5.0;
/// Chi-square p-values at or below this fail the verdict.
pub const P_VALUE_THRESHOLD: f64 = 0.001;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OutcomeCount {
    pub eigenvalue: f64,
    pub count: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
}

/// Observed outcome counts with point estimates and 95% Wilson intervals,
/// ascending by eigenvalue.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrequencyReport {
    pub counts: Vec<OutcomeCount>,
    pub total: u64,
    pub confidence: f64,
    pub reference: Option<OutcomeDistribution>,
    pub chi_square: Option<ChiSquare>,
}

impl FrequencyReport {
    pub fn entry(&self, eigenvalue: f64) -> Option<&OutcomeCount> {
        self.counts
            .iter()
            .find(|c| (c.eigenvalue - eigenvalue).abs() <= EIGENVALUE_CLUSTER_TOLERANCE)
    }

    pub fn count_of(&self, eigenvalue: f64) -> u64 {
        self.entry(eigenvalue).map_or(0, |c| c.count)
    }

    pub fn estimate_of(&self, eigenvalue: f64) -> f64 {
        self.count_of(eigenvalue) as f64 / self.total as f64
    }

    /// Whether `probability` lies in the Wilson interval of `eigenvalue`'s
    /// observed frequency (an unobserved outcome has count 0).
    pub fn interval_contains(&self, eigenvalue: f64, probability: f64) -> bool {
        let (low, high) = wilson_interval(self.count_of(eigenvalue), self.total, Z_95);
        low <= probability && probability <= high
    }

    /// Every reference probability lies in its outcome's Wilson interval and
    /// the chi-square p-value exceeds [`P_VALUE_THRESHOLD`].
    pub fn agrees_with_reference(&self) -> bool {
        let (Some(reference), Some(chi)) = (&self.reference, &self.chi_square) else {
            return false;
        };
        reference
            .entries
            .iter()
            .all(|e| self.interval_contains(e.eigenvalue, e.probability))
            && chi.p_value > P_VALUE_THRESHOLD
    }
}

/// Wilson score interval for `successes` out of `total`, clamped to `[0, 1]`
/// with exact endpoints at zero and full counts.
pub fn wilson_interval(successes: u64, total: u64, z: f64) -> (f64, f64) {
    if total == 0 {
        return (0.0, 1.0);
    }
    let n = total as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let low = if successes == 0 { 0.0 } else { (center - half).max(0.0) };
    let high = if successes == total {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (low, high)
}

fn outcome_count(eigenvalue: f64, count: u64, total: u64) -> OutcomeCount {
    let (ci_low, ci_high) = wilson_interval(count, total, Z_95);
    OutcomeCount {
        eigenvalue,
        count,
        estimate: count as f64 / total as f64,
        ci_low,
        ci_high,
    }
}

/// Counts equal values (within the eigenvalue tolerance).
pub fn tally(values: impl IntoIterator<Item = f64>) -> Result<FrequencyReport> {
    let mut bins: Vec<(f64, u64)> = Vec::new();
    let mut total = 0u64;
    for value in values {
        total += 1;
        match bins
            .iter_mut()
            .find(|(v, _)| (v - value).abs() <= EIGENVALUE_CLUSTER_TOLERANCE)
        {
            Some((_, count)) => *count += 1,
            None => bins.push((value, 1)),
        }
    }
    if total == 0 {
        return Err(Error::EmptyEnsemble);
    }
    bins.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(FrequencyReport {
        counts: bins.into_iter().map(|(v, c)| outcome_count(v, c, total)).collect(),
        total,
        confidence: 0.95,
        reference: None,
        chi_square: None,
    })
}

/// Outcome frequencies of the measurement at `time` across the ensemble.
pub fn frequencies(rec: &EnsembleRecord, time: TimeLabel) -> Result<FrequencyReport> {
    let outcomes = rec
        .trials
        .iter()
        .map(|t| {
            t.outcome(time).ok_or_else(|| Error::MissingEvent {
                time: time.to_string(),
                trial_id: t.trial_id,
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    tally(outcomes)
}

/// Upper tail of the chi-square distribution with `dof` degrees of freedom.
/// With zero degrees of freedom the statistic is identically zero.
pub fn chi_square_survival(statistic: f64, dof: usize) -> f64 {
    if statistic.is_nan() {
        return 0.0;
    }
    if dof == 0 {
        return if statistic <= 0.0 { 1.0 } else { 0.0 };
    }
    if statistic <= 0.0 {
        return 1.0;
    }
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    dist.sf(statistic).clamp(0.0, 1.0)
}

/// Pearson goodness of fit of `report` against `reference`.
///
/// Reference outcomes with probability at most 1e-12 are merged away when
/// unobserved; observing one is an impossible event and yields an infinite
/// statistic with p-value 0. The returned report also lists reference
/// outcomes that were never observed, with count 0.
pub fn chi_square_gof(report: &FrequencyReport, reference: &OutcomeDistribution) -> Result<FrequencyReport> {
    for c in &report.counts {
        if reference.probability_of(c.eigenvalue).is_none() {
            return Err(Error::OutcomeNotInReference {
                eigenvalue: c.eigenvalue,
            });
        }
    }
    let n = report.total as f64;
    let mut statistic = 0.0;
    let mut cells = 0usize;
    let mut impossible = false;
    for e in &reference.entries {
        let observed = report.count_of(e.eigenvalue) as f64;
        if e.probability <= ZERO_THRESHOLD {
            impossible |= observed > 0.0;
            continue;
        }
        let expected = n * e.probability;
        if expected < MIN_EXPECTED_COUNT {
            return Err(Error::ExpectedCountTooSmall {
                eigenvalue: e.eigenvalue,
                expected,
            });
        }
        statistic += (observed - expected).powi(2) / expected;
        cells += 1;
    }
    let dof = cells.saturating_sub(1);
    if dof == 0 {
        // A single possible cell must hold every count; anything left is rounding in the reference.
        statistic = 0.0;
    }
    let chi_square = if impossible {
        ChiSquare {
            statistic: f64::INFINITY,
            dof,
            p_value: 0.0,
        }
    } else {
        ChiSquare {
            statistic,
            dof,
            p_value: chi_square_survival(statistic, dof),
        }
    };

    let mut counts = report.counts.clone();
    for e in &reference.entries {
        if report.entry(e.eigenvalue).is_none() {
            counts.push(outcome_count(e.eigenvalue, 0, report.total));
        }
    }
    counts.sort_by(|a, b| a.eigenvalue.total_cmp(&b.eigenvalue));
    Ok(FrequencyReport {
        counts,
        total: report.total,
        confidence: report.confidence,
        reference: Some(reference.clone()),
        chi_square: Some(chi_square),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn values(pairs: &[(f64, usize)]) -> Vec<f64> {
        pairs.iter().flat_map(|&(v, n)| std::iter::repeat_n(v, n)).collect()
    }

    #[test]
    fn all_same_outcome() {
        let r = tally(values(&[(1.0, 250)])).unwrap();
        let e = r.entry(1.0).unwrap();
        assert_eq!(e.estimate, 1.0);
        assert_eq!(e.ci_high, 1.0);
        assert!(e.ci_low < 1.0);
    }

    #[test]
    fn fifty_of_a_hundred() {
        // Closed form at z = 1.96: centre 0.5, half-width
        // 1.96·sqrt(0.0025 + 1.96²/40000) / (1 + 1.96²/100).
        let half = 1.96 * (0.0025f64 + 1.96 * 1.96 / 40000.0).sqrt() / (1.0 + 1.96 * 1.96 / 100.0);
        let r = tally(values(&[(-1.0, 50), (1.0, 50)])).unwrap();
        let e = r.entry(1.0).unwrap();
        assert_eq!(e.estimate, 0.5);
        assert_abs_diff_eq!(e.ci_low, 0.5 - half, epsilon = 1e-12);
        assert_abs_diff_eq!(e.ci_high, 0.5 + half, epsilon = 1e-12);
        assert_abs_diff_eq!(e.ci_low, 0.404, epsilon = 5e-4);
        assert_abs_diff_eq!(e.ci_high, 0.596, epsilon = 5e-4);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert_eq!(tally(Vec::new()).unwrap_err(), Error::EmptyEnsemble);
        let rec = EnsembleRecord {
            scenario_label: "empty".into(),
            master_seed: 0,
            trials: vec![],
        };
        assert_eq!(frequencies(&rec, TimeLabel::T).unwrap_err(), Error::EmptyEnsemble);
    }

    #[test]
    fn frequencies_need_the_event() {
        let s = crate::scenarios::spin_counterexample(1.0, false);
        let rec = crate::simulate::run_ensemble(&s, 10, 0).unwrap();
        assert!(matches!(
            frequencies(&rec, TimeLabel::T),
            Err(Error::MissingEvent { .. })
        ));
        assert_eq!(frequencies(&rec, TimeLabel::T2).unwrap().total, 10);
    }

    #[test]
    fn exact_fit_has_p_one() {
        let r = tally(values(&[(-1.0, 300), (1.0, 700)])).unwrap();
        let reference = OutcomeDistribution::new("A", vec![(-1.0, 0.3), (1.0, 0.7)]);
        let fit = chi_square_gof(&r, &reference).unwrap();
        let chi = fit.chi_square.as_ref().unwrap();
        assert_abs_diff_eq!(chi.statistic, 0.0, epsilon = 1e-12);
        assert_eq!(chi.dof, 1);
        assert_abs_diff_eq!(chi.p_value, 1.0, epsilon = 1e-12);
        assert!(fit.agrees_with_reference());
    }

    #[test]
    fn impossible_outcome_fails_hard() {
        let r = tally(values(&[(0.0, 1), (1.0, 999)])).unwrap();
        let reference = OutcomeDistribution::new("A", vec![(0.0, 0.0), (1.0, 1.0)]);
        let fit = chi_square_gof(&r, &reference).unwrap();
        assert_eq!(fit.chi_square.as_ref().unwrap().p_value, 0.0);
        assert!(!fit.agrees_with_reference());
    }

    #[test]
    fn certain_outcome_with_merged_zero_cell() {
        let r = tally(values(&[(1.0, 1000)])).unwrap();
        let reference = OutcomeDistribution::new("A", vec![(0.0, 1e-33), (1.0, 1.0)]);
        let fit = chi_square_gof(&r, &reference).unwrap();
        let chi = fit.chi_square.as_ref().unwrap();
        assert_eq!(chi.dof, 0);
        assert_eq!(chi.p_value, 1.0);
        assert_eq!(fit.counts.len(), 2);
        assert_eq!(fit.count_of(0.0), 0);
        assert!(fit.agrees_with_reference());
    }

    #[test]
    fn gof_preconditions() {
        let r = tally(values(&[(2.0, 10)])).unwrap();
        let reference = OutcomeDistribution::new("A", vec![(0.0, 0.5), (1.0, 0.5)]);
        assert_eq!(
            chi_square_gof(&r, &reference).unwrap_err(),
            Error::OutcomeNotInReference { eigenvalue: 2.0 }
        );
        let r = tally(values(&[(0.0, 4), (1.0, 4)])).unwrap();
        assert!(matches!(
            chi_square_gof(&r, &reference).unwrap_err(),
            Error::ExpectedCountTooSmall { eigenvalue, .. } if eigenvalue == 0.0
        ));
    }

    /// Simpson quadrature of the chi-square density from 0 to x, with the
    /// substitution t = u² to remove the singularity at zero for dof = 1.
    fn survival_by_quadrature(x: f64, dof: usize) -> f64 {
        let k = dof as f64;
        let log_norm = -(k / 2.0) * 2f64.ln() - statrs::function::gamma::ln_gamma(k / 2.0);
        // density(t) dt with t = u², dt = 2u du
        let integrand = |u: f64| {
            if u == 0.0 {
                return if dof == 1 { 2.0 * log_norm.exp() } else { 0.0 };
            }
            let t = u * u;
            (log_norm + (k / 2.0 - 1.0) * t.ln() - t / 2.0).exp() * 2.0 * u
        };
        let upper = x.sqrt();
        let steps = 20_000;
        let h = upper / steps as f64;
        let mut sum = integrand(0.0) + integrand(upper);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            sum += w * integrand(i as f64 * h);
        }
        1.0 - sum * h / 3.0
    }

    #[test]
    fn survival_matches_independent_routes() {
        for dof in 1..=8 {
            for x in [0.1, 0.5, 1.0, 2.5, 5.0, 9.0, 15.0, 25.0] {
                let p = chi_square_survival(x, dof);
                assert_abs_diff_eq!(p, survival_by_quadrature(x, dof), epsilon = 1e-7);
            }
        }
        for x in [0.3, 3.0, 12.0] {
            assert_abs_diff_eq!(chi_square_survival(x, 2), (-x / 2.0f64).exp(), epsilon = 1e-12);
        }
        assert_eq!(chi_square_survival(0.0, 3), 1.0);
        assert_eq!(chi_square_survival(f64::INFINITY, 3), 0.0);
    }

    #[test]
    fn wilson_coverage_at_nominal_level() {
        let (p, n, reps) = (0.3, 1000u64, 1000);
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let covered = (0..reps)
            .filter(|_| {
                let k = (0..n).filter(|_| rng.random::<f64>() < p).count() as u64;
                let (lo, hi) = wilson_interval(k, n, Z_95);
                lo <= p && p <= hi
            })
            .count();
        let rate = covered as f64 / reps as f64;
        assert!((0.93..=0.97).contains(&rate), "coverage {rate}");
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn tally_invariants(raw in proptest::collection::vec(0u8..4, 1..300)) {
                let r = tally(raw.iter().map(|&v| v as f64)).unwrap();
                prop_assert_eq!(r.counts.iter().map(|c| c.count).sum::<u64>(), r.total);
                for c in &r.counts {
                    prop_assert_eq!(c.estimate, c.count as f64 / r.total as f64);
                    prop_assert!(c.ci_low <= c.estimate && c.estimate <= c.ci_high);
                }
            }

            #[test]
            fn gof_is_invariant_under_relabeling(
                counts in proptest::collection::vec(20u64..200, 3),
                shift in -5.0f64..5.0,
            ) {
                let labels = [-1.0, 0.0, 1.0];
                let reference = |ls: [f64; 3]| OutcomeDistribution::new("A", ls.iter().copied().zip([0.2, 0.3, 0.5]).collect());
                let build = |ls: [f64; 3]| tally(ls.iter().zip(&counts).flat_map(|(&l, &c)| std::iter::repeat_n(l, c as usize))).unwrap();
                let original = chi_square_gof(&build(labels), &reference(labels)).unwrap();
                let moved = [labels[2] * 7.0 + shift, labels[0] + 3.0 * shift.abs() + 20.0, labels[1] - 30.0];
                let relabeled = chi_square_gof(&build(moved), &reference(moved)).unwrap();
                let (a, b) = (original.chi_square.unwrap(), relabeled.chi_square.unwrap());
                prop_assert!((a.statistic - b.statistic).abs() < 1e-9);
                prop_assert!((a.p_value - b.p_value).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&a.p_value));
            }
        }
    }
}
