//! Wilson intervals, quantiles and grouped aggregation of trial records.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentKind, SCHEMA_VERSION};
use super::record::TrialRecord;
use crate::models::ModelKind;

const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `successes` out of `trials`.
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (phat + z2 / (2.0 * n)) / denom;
    let half = Z95 * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    // the exact endpoints 0 and 1 are attained at phat = 0 and 1
    let lo = if successes == 0 { 0.0 } else { (center - half).max(0.0).min(phat) };
    let hi = if successes == trials { 1.0 } else { (center + half).min(1.0).max(phat) };
    (lo, hi)
}

/// Linearly interpolated quantile of ascending `sorted` data.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty data");
    let pos = q.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi || sorted[lo] == sorted[hi] {
        return sorted[lo];
    }
    let w = pos - lo as f64;
    sorted[lo] + w * (sorted[hi] - sorted[lo])
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NumericSummary {
    pub count: usize,
    #[serde(with = "crate::serde_inf")]
    pub mean: f64,
    #[serde(with = "crate::serde_inf")]
    pub min: f64,
    #[serde(with = "crate::serde_inf")]
    pub q10: f64,
    #[serde(with = "crate::serde_inf")]
    pub q50: f64,
    #[serde(with = "crate::serde_inf")]
    pub q90: f64,
    #[serde(with = "crate::serde_inf")]
    pub max: f64,
}

impl NumericSummary {
    pub fn from_values(mut values: Vec<f64>) -> Option<Self> {
        values.retain(|v| !v.is_nan());
        if values.is_empty() {
            return None;
        }
        values.sort_by(f64::total_cmp);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        Some(Self {
            count: values.len(),
            mean,
            min: values[0],
            q10: quantile(&values, 0.1),
            q50: quantile(&values, 0.5),
            q90: quantile(&values, 0.9),
            max: values[values.len() - 1],
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventFrequency {
    pub successes: usize,
    pub trials: usize,
    pub freq: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
}

impl EventFrequency {
    pub fn new(successes: usize, trials: usize) -> Option<Self> {
        if trials == 0 {
            return None;
        }
        let (wilson_lo, wilson_hi) = wilson_interval(successes, trials);
        Some(Self {
            successes,
            trials,
            freq: successes as f64 / trials as f64,
            wilson_lo,
            wilson_hi,
        })
    }

    pub fn from_flags(flags: impl IntoIterator<Item = bool>) -> Option<Self> {
        let (mut s, mut t) = (0, 0);
        for f in flags {
            t += 1;
            s += f as usize;
        }
        Self::new(s, t)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateStats {
    pub experiment: ExperimentKind,
    pub model: ModelKind,
    pub n: usize,
    pub p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eps_star: Option<f64>,
    pub count: usize,
    pub numeric: BTreeMap<String, NumericSummary>,
    pub events: BTreeMap<String, EventFrequency>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateReport {
    pub schema_version: u32,
    pub groups: Vec<AggregateStats>,
}

impl AggregateReport {
    pub fn new(groups: Vec<AggregateStats>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            groups,
        }
    }
}

type NumericField = (&'static str, fn(&TrialRecord) -> Option<f64>);
type EventField = (&'static str, fn(&TrialRecord) -> Option<bool>);

fn scaled_smin(r: &TrialRecord) -> Option<f64> {
    if r.omega0 || r.invertible != Some(true) {
        return None;
    }
    r.s_min.map(|s| s * (r.n as f64 / r.p).sqrt())
}

const NUMERIC: [NumericField; 14] = [
    ("s_min", |r| r.s_min),
    ("s2", |r| r.s2),
    ("s_max", |r| r.s_max),
    ("centered_norm", |r| r.centered_norm),
    ("norm_ratio", |r| r.centered_norm.map(|c| c / (r.n as f64 * r.p).sqrt())),
    ("sigma_tilde", |r| r.sigma_tilde),
    ("s_min_scaled", scaled_smin),
    ("light_count", |r| r.light_count.map(|c| c as f64)),
    ("lambda0", |r| r.lambda0),
    ("eigvec_dev", |r| r.eigvec_dev),
    ("offlight_norm", |r| r.offlight_norm),
    ("dist_rel_gap", |r| r.dist_rel_gap),
    ("hs_norm", |r| r.hs_norm),
    ("hs_event_freq", |r| r.hs_event_freq),
];

fn prop(i: usize) -> impl Fn(&TrialRecord) -> Option<bool> {
    move |r| r.structure_props.map(|p| p[i])
}

const EVENTS: [EventField; 15] = [
    ("omega0", |r| Some(r.omega0)),
    ("omega_col", |r| Some(r.omega_col)),
    ("invertible", |r| r.invertible),
    ("invertible_given_not_omega0", |r| if r.omega0 { None } else { r.invertible }),
    ("light_empty", |r| r.light_count.map(|c| c == 0)),
    ("prop1", |r| prop(0)(r)),
    ("prop2", |r| prop(1)(r)),
    ("prop3", |r| prop(2)(r)),
    ("prop4", |r| prop(3)(r)),
    ("prop5", |r| prop(4)(r)),
    ("prop6", |r| prop(5)(r)),
    ("all_props", |r| r.structure_props.map(|p| p.iter().all(|&b| b))),
    ("lambda_flag", |r| r.lambda_flag),
    ("eigvec_flag", |r| r.eigvec_flag),
    ("dist_exact_branch", |r| r.dist_branch.map(|b| b == crate::spectral::DistanceKind::Exact)),
];

fn same_group(a: &TrialRecord, b: &TrialRecord) -> bool {
    a.experiment == b.experiment
        && a.model == b.model
        && a.n == b.n
        && a.p.to_bits() == b.p.to_bits()
        && a.eps_star.map(f64::to_bits) == b.eps_star.map(f64::to_bits)
}

/// Group by `(experiment, model, n, p, ε⋆)` and summarize. The records are
/// put in canonical order first, so the result does not depend on the
/// input order.
pub fn aggregate(records: &[TrialRecord]) -> Vec<AggregateStats> {
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by(|a, b| {
        (a.experiment, a.model)
            .cmp(&(b.experiment, b.model))
            .then(a.n.cmp(&b.n))
            .then(a.p.total_cmp(&b.p))
            .then(a.eps_star.unwrap_or(f64::NAN).total_cmp(&b.eps_star.unwrap_or(f64::NAN)))
            .then(a.canonical_cmp(b))
    });
    let mut out = Vec::new();
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && same_group(sorted[start], sorted[end]) {
            end += 1;
        }
        let group = &sorted[start..end];
        let first = group[0];
        let mut numeric = BTreeMap::new();
        for (name, get) in NUMERIC {
            if let Some(s) = NumericSummary::from_values(group.iter().filter_map(|r| get(r)).collect()) {
                numeric.insert(name.to_string(), s);
            }
        }
        let mut events = BTreeMap::new();
        for (name, get) in EVENTS {
            if let Some(e) = EventFrequency::from_flags(group.iter().filter_map(|r| get(r))) {
                events.insert(name.to_string(), e);
            }
        }
        out.push(AggregateStats {
            experiment: first.experiment,
            model: first.model,
            n: first.n,
            p: first.p,
            eps_star: first.eps_star,
            count: group.len(),
            numeric,
            events,
        });
        start = end;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wilson_matches_reference_values() {
        // 8/10: the textbook interval (0.4902, 0.9433)
        let (lo, hi) = wilson_interval(8, 10);
        assert!((lo - 0.490_162).abs() < 1e-5 && (hi - 0.943_318).abs() < 1e-5, "{lo} {hi}");
        let (lo, hi) = wilson_interval(30, 30);
        assert!(lo > 0.88 && lo < 0.9 && hi == 1.0);
        let (lo, hi) = wilson_interval(0, 30);
        assert!(lo == 0.0 && hi < 0.12);
    }

    #[test]
    fn constant_true_flag_interval_is_narrow() {
        let e = EventFrequency::from_flags(std::iter::repeat_n(true, 30)).unwrap();
        assert_eq!(e.freq, 1.0);
        assert!(e.wilson_lo > 0.88 && e.wilson_hi <= 1.0);
        let e = EventFrequency::from_flags(std::iter::repeat_n(true, 40)).unwrap();
        assert!(e.wilson_lo > 0.9);
    }

    #[test]
    fn quantiles_of_single_value() {
        let s = NumericSummary::from_values(vec![2.5]).unwrap();
        assert!(s.q10 == 2.5 && s.q50 == 2.5 && s.q90 == 2.5 && s.mean == 2.5);
        assert!(NumericSummary::from_values(vec![]).is_none());
        assert_eq!(quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(quantile(&[1.0, f64::INFINITY], 0.9), f64::INFINITY);
    }

    #[test]
    fn empty_input_gives_empty_output() {
        assert!(aggregate(&[]).is_empty());
    }

    proptest! {
        #[test]
        fn wilson_contains_estimate(n in 1usize..500, frac in 0.0f64..=1.0) {
            let s = ((n as f64) * frac).floor() as usize;
            let (lo, hi) = wilson_interval(s, n);
            let phat = s as f64 / n as f64;
            prop_assert!(0.0 <= lo && lo <= phat && phat <= hi && hi <= 1.0);
        }

        #[test]
        fn aggregation_is_order_invariant(values in proptest::collection::vec((0.0f64..10.0, any::<bool>(), 0usize..3), 1..40), seed in any::<u64>()) {
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            let records: Vec<TrialRecord> = values.iter().enumerate().map(|(i, &(v, b, g))| {
                let mut r = TrialRecord::new(ExperimentKind::PhaseTransition, ModelKind::UndirectedEr, 10 + g, 0.3, 0.0, i, 1, i as u64);
                r.s_min = Some(v * 1e-3 + 0.1);
                r.omega0 = b;
                r.invertible = Some(!b);
                r
            }).collect();
            let mut shuffled = records.clone();
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            prop_assert_eq!(aggregate(&records), aggregate(&shuffled));
        }
    }
}
