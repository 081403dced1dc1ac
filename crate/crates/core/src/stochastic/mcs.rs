//! Monte-Carlo CPM over duration posteriors.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::ops::Range;

use serde::{Deserialize, Serialize};

use super::posterior::{DurationPosterior, PosteriorSampler};
use super::StochasticError;
use crate::project::{ActivityNetwork, CalendarAxis, CpmKernel};
use crate::rng::{stream_key, unit_open, StreamFamily, DOMAIN_TRIAL};

/// A network, its posteriors and a seed, prepared for trial evaluation.
///
/// Trial `t` draws the duration of activity `i` from the stream
/// `(seed, hash(id_i), t)`, so any subset of trials can be evaluated anywhere
/// and two simulations with the same seed share draws for shared activities.
#[derive(Debug, Clone)]
pub struct Simulation<'a> {
    network: &'a ActivityNetwork,
    samplers: Vec<PosteriorSampler>,
    families: Vec<StreamFamily>,
    axis: CalendarAxis,
    seed: u64,
}

/// Results for a contiguous block of trials.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialBatch {
    pub start: u64,
    pub finishes: Vec<f64>,
    pub critical_counts: Vec<u64>,
}

impl<'a> Simulation<'a> {
    pub fn new(
        network: &'a ActivityNetwork,
        posteriors: &BTreeMap<String, DurationPosterior>,
        axis: CalendarAxis,
        seed: u64,
    ) -> Result<Self, StochasticError> {
        let mut samplers = Vec::with_capacity(network.len());
        let mut families = Vec::with_capacity(network.len());
        for a in network.activities() {
            let post = posteriors
                .get(&a.id)
                .ok_or_else(|| StochasticError::MissingPosterior(a.id.clone()))?;
            if post.is_empty() {
                return Err(StochasticError::EmptyPosterior(a.id.clone()));
            }
            samplers.push(post.sampler());
            families.push(StreamFamily::new(seed, DOMAIN_TRIAL, stream_key(&a.id)));
        }
        Ok(Simulation { network, samplers, families, axis, seed })
    }

    pub fn network(&self) -> &ActivityNetwork {
        self.network
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Durations for one trial, written into `out`.
    pub fn draw(&self, trial: u64, out: &mut Vec<f64>) {
        out.clear();
        for (s, fam) in self.samplers.iter().zip(&self.families) {
            let d = if s.is_fixed() {
                s.sample(0.5)
            } else {
                s.sample(unit_open(&mut fam.stream(trial)))
            };
            out.push(d);
        }
    }

    pub fn run_trials(&self, trials: Range<u64>) -> TrialBatch {
        let n = self.network.len();
        let mut kernel = CpmKernel::new();
        let mut durations = Vec::with_capacity(n);
        let mut finishes = Vec::with_capacity((trials.end - trials.start) as usize);
        let mut critical_counts = alloc::vec![0u64; n];
        let start = trials.start;
        for t in trials {
            self.draw(t, &mut durations);
            let finish = kernel.run(self.network, &durations);
            finishes.push(self.axis.elapsed(finish));
            for (i, c) in critical_counts.iter_mut().enumerate() {
                if kernel.is_critical(i) {
                    *c += 1;
                }
            }
        }
        TrialBatch { start, finishes, critical_counts }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinishDistribution {
    pub activity_ids: Vec<String>,
    /// Elapsed-workday finish per trial, in trial order.
    pub trial_finishes: Vec<f64>,
    pub critical_counts: Vec<u64>,
    pub seed: u64,
    pub n_trials: u64,
}

impl FinishDistribution {
    /// Assembles batches in trial order. Batches must tile `0..n_trials`.
    pub fn from_batches(sim: &Simulation<'_>, mut batches: Vec<TrialBatch>) -> Self {
        batches.sort_by_key(|b| b.start);
        let n = sim.network.len();
        let mut trial_finishes = Vec::new();
        let mut critical_counts = alloc::vec![0u64; n];
        for b in batches {
            debug_assert_eq!(b.start as usize, trial_finishes.len());
            trial_finishes.extend_from_slice(&b.finishes);
            for (acc, c) in critical_counts.iter_mut().zip(&b.critical_counts) {
                *acc += c;
            }
        }
        FinishDistribution {
            activity_ids: sim.network.ids().map(String::from).collect(),
            n_trials: trial_finishes.len() as u64,
            trial_finishes,
            critical_counts,
            seed: sim.seed,
        }
    }

    pub fn sorted_finishes(&self) -> Vec<f64> {
        let mut v = self.trial_finishes.clone();
        v.sort_by(f64::total_cmp);
        v
    }

    pub fn mean(&self) -> f64 {
        self.trial_finishes.iter().sum::<f64>() / self.n_trials.max(1) as f64
    }
}

/// Runs all trials of a simulation.
pub trait McsRunner {
    fn run(&self, sim: &Simulation<'_>, n_trials: u64) -> Result<FinishDistribution, StochasticError>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SequentialRunner;

impl McsRunner for SequentialRunner {
    fn run(&self, sim: &Simulation<'_>, n_trials: u64) -> Result<FinishDistribution, StochasticError> {
        if n_trials == 0 {
            return Err(StochasticError::NoTrials);
        }
        Ok(FinishDistribution::from_batches(sim, alloc::vec![sim.run_trials(0..n_trials)]))
    }
}

/// One-shot Monte-Carlo run on the calling thread.
pub fn run_mcs(
    network: &ActivityNetwork,
    posteriors: &BTreeMap<String, DurationPosterior>,
    axis: &CalendarAxis,
    n_trials: u64,
    seed: u64,
) -> Result<FinishDistribution, StochasticError> {
    let sim = Simulation::new(network, posteriors, axis.clone(), seed)?;
    SequentialRunner.run(&sim, n_trials)
}

/// Linear interpolation between order statistics of an ascending slice.
pub fn empirical_quantile(sorted: &[f64], p: f64) -> f64 {
    match sorted.len() {
        0 => f64::NAN,
        1 => sorted[0],
        n => {
            let h = (n - 1) as f64 * p.clamp(0.0, 1.0);
            let lo = libm::floor(h) as usize;
            let hi = (lo + 1).min(n - 1);
            let frac = h - lo as f64;
            sorted[lo] + frac * (sorted[hi] - sorted[lo])
        }
    }
}

pub fn quantile(d: &FinishDistribution, p: f64) -> f64 {
    empirical_quantile(&d.sorted_finishes(), p)
}

/// Percent of trials in which each activity was critical.
pub fn criticality_index(d: &FinishDistribution) -> BTreeMap<String, f64> {
    let n = d.n_trials.max(1) as f64;
    d.activity_ids
        .iter()
        .zip(&d.critical_counts)
        .map(|(id, &c)| (id.clone(), 100.0 * c as f64 / n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::project::{build_network, cpm_indexed, Activity, PrecedenceRelation};
    use crate::stochastic::{DurationPrior, DEFAULT_SAMPLES};
    use alloc::vec;
    use proptest::prelude::*;

    fn toy() -> ActivityNetwork {
        build_network(
            vec![Activity::new("A", "03", 2.0), Activity::new("B", "03", 4.0), Activity::new("C", "03", 4.0)],
            vec![PrecedenceRelation::fs("A", "B")],
        )
        .unwrap()
    }

    fn toy_posteriors(b: &[(f64, f64)]) -> BTreeMap<String, DurationPosterior> {
        let mut m = BTreeMap::new();
        m.insert("A".into(), DurationPosterior::fixed(2.0));
        m.insert("B".into(), DurationPosterior::discrete(b).unwrap());
        m.insert("C".into(), DurationPosterior::fixed(4.0));
        m
    }

    /// Exact finish distribution of the toy network: enumerate B's outcomes.
    fn enumerate(b: &[(f64, f64)]) -> Vec<(f64, f64, bool)> {
        b.iter().map(|&(d, w)| {
            let finish = (2.0 + d).max(4.0);
            (finish, w, 2.0 + d >= 4.0)
        }).collect()
    }

    /// Exact p-quantile of a discrete distribution (smallest x with F(x) >= p).
    fn exact_quantile(outcomes: &[(f64, f64, bool)], p: f64) -> f64 {
        let mut v: Vec<(f64, f64)> = outcomes.iter().map(|o| (o.0, o.1)).collect();
        v.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = v.iter().map(|x| x.1).sum();
        let mut acc = 0.0;
        for (x, w) in v {
            acc += w / total;
            if acc >= p - 1e-12 {
                return x;
            }
        }
        f64::NAN
    }

    #[test]
    fn two_point_enumeration() {
        let b = [(3.0, 1.0), (5.0, 1.0)];
        let d = run_mcs(&toy(), &toy_posteriors(&b), &CalendarAxis::plain(), 100_000, 42).unwrap();
        let exact = enumerate(&b);
        let sevens = d.trial_finishes.iter().filter(|&&f| f == 7.0).count() as f64 / 1e5;
        assert!((sevens - 0.5).abs() < 0.01);
        assert_eq!(quantile(&d, 0.8), exact_quantile(&exact, 0.8));
        let p50 = quantile(&d, 0.5);
        assert!(p50 >= exact_quantile(&exact, 0.48) && p50 <= exact_quantile(&exact, 0.52));
        let ci = criticality_index(&d);
        assert_eq!((ci["A"], ci["B"], ci["C"]), (100.0, 100.0, 0.0));
    }

    #[test]
    fn three_point_enumeration() {
        // B in {1, 2, 6}: finishes 4 (C critical, B not), 4 (tie: both), 8.
        let b = [(1.0, 0.2), (2.0, 0.3), (6.0, 0.5)];
        let d = run_mcs(&toy(), &toy_posteriors(&b), &CalendarAxis::plain(), 100_000, 42).unwrap();
        let exact = enumerate(&b);
        for p in [0.5, 0.8] {
            let q = quantile(&d, p);
            assert!(q >= exact_quantile(&exact, p - 0.02) && q <= exact_quantile(&exact, p + 0.02));
        }
        let ci = criticality_index(&d);
        // B critical when finish via B >= 4: weight 0.8. C critical when B <= 2: 0.5.
        assert!((ci["B"] - 80.0).abs() <= 2.0);
        assert!((ci["C"] - 50.0).abs() <= 2.0);
        assert_eq!(ci["A"], ci["B"]);
    }

    #[test]
    fn fixed_durations_give_point_mass() {
        let net = toy();
        let mut m = toy_posteriors(&[(4.0, 1.0)]);
        m.insert("B".into(), DurationPosterior::fixed(4.0));
        let d = run_mcs(&net, &m, &CalendarAxis::plain(), 500, 1).unwrap();
        let det = cpm_indexed(&net, &[2.0, 4.0, 4.0], &CalendarAxis::plain()).finish_elapsed;
        assert!(d.trial_finishes.iter().all(|&f| f == det));
        assert_eq!((quantile(&d, 0.5), quantile(&d, 0.8)), (det, det));
    }

    #[test]
    fn batches_match_single_run() {
        let net = toy();
        let m = toy_posteriors(&[(3.0, 1.0), (5.0, 2.0), (9.0, 1.0)]);
        let sim = Simulation::new(&net, &m, CalendarAxis::plain(), 42).unwrap();
        let whole = SequentialRunner.run(&sim, 1000).unwrap();
        let parts = vec![sim.run_trials(700..1000), sim.run_trials(0..300), sim.run_trials(300..700)];
        assert_eq!(FinishDistribution::from_batches(&sim, parts), whole);
    }

    #[test]
    fn missing_posterior() {
        let mut m = toy_posteriors(&[(3.0, 1.0)]);
        m.remove("C");
        assert!(matches!(run_mcs(&toy(), &m, &CalendarAxis::plain(), 10, 1), Err(StochasticError::MissingPosterior(id)) if id == "C"));
    }

    #[test]
    fn quantile_interpolates() {
        assert_eq!(empirical_quantile(&[1.0, 2.0, 3.0, 4.0], 0.5), 2.5);
        assert_eq!(empirical_quantile(&[128.0], 0.8), 128.0);
        assert!((empirical_quantile(&[0.0, 10.0], 0.8) - 8.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn triangular_bounds_and_criticality(seed in 0u64..1000, spans in prop::collection::vec((1.0f64..10.0, 0.0f64..5.0, 0.0f64..5.0), 3)) {
            let net = toy();
            let ids = ["A", "B", "C"];
            let mut posts = BTreeMap::new();
            let mut lo = vec![];
            let mut hi = vec![];
            for (id, &(a, w1, w2)) in ids.iter().zip(&spans) {
                let prior = DurationPrior::triangular(a, a + w1, a + w1 + w2).unwrap();
                let p = DurationPosterior::from_prior(&prior, id, seed, DEFAULT_SAMPLES / 8).unwrap();
                lo.push(p.min());
                hi.push(p.max());
                posts.insert(String::from(*id), p);
            }
            let d = run_mcs(&net, &posts, &CalendarAxis::plain(), 300, seed).unwrap();
            let fmin = cpm_indexed(&net, &lo, &CalendarAxis::plain()).project_finish;
            let fmax = cpm_indexed(&net, &hi, &CalendarAxis::plain()).project_finish;
            for &f in &d.trial_finishes {
                prop_assert!(f >= fmin - 1e-9 && f <= fmax + 1e-9);
            }
            prop_assert!(quantile(&d, 0.8) >= quantile(&d, 0.5));
            // A or B, or C, is critical in every trial.
            prop_assert!(d.critical_counts.iter().sum::<u64>() >= d.n_trials);
            for v in criticality_index(&d).values() {
                prop_assert!((0.0..=100.0).contains(v));
            }
        }
    }
}
