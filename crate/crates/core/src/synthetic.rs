//! Seeded synthetic networks for benchmarks and fixtures.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;

use crate::project::{build_network, Activity, ActivityNetwork, PrecedenceRelation};
use crate::rng::{stream_key, substream, DOMAIN_PRIOR};
use crate::stochastic::{DurationPosterior, DurationPrior, StochasticError, DEFAULT_SAMPLES};

pub const LARGE_ACTIVITIES: usize = 1186;
pub const LARGE_RELATIONS: usize = 3452;

/// Predecessors are drawn from this many immediately preceding activities.
const WINDOW: usize = 40;

const DIVISIONS: [&str; 14] = ["01", "03", "04", "05", "06", "07", "08", "09", "14", "21", "22", "23", "26", "31"];

/// A layered-looking random DAG with exactly `n` activities and `m` FS
/// relations. Every activity after the first has at least one predecessor.
pub fn random_network(n: usize, m: usize, seed: u64) -> ActivityNetwork {
    let mut rng = substream(seed, DOMAIN_PRIOR, stream_key("synthetic-network"), 0);
    let id = |i: usize| format!("S{i:04}");
    let acts: Vec<Activity> = (0..n)
        .map(|i| {
            let div = DIVISIONS[rng.random_range(0..DIVISIONS.len())];
            Activity::new(id(i), div, rng.random_range(1..=20) as f64)
        })
        .collect();
    let mut edges: BTreeSet<(usize, usize)> = BTreeSet::new();
    for j in 1..n {
        let i = rng.random_range(j.saturating_sub(WINDOW)..j);
        edges.insert((i, j));
    }
    let capacity: usize = (1..n).map(|j| j.min(WINDOW)).sum();
    let m = m.min(capacity);
    while edges.len() < m {
        let j = rng.random_range(1..n);
        let i = rng.random_range(j.saturating_sub(WINDOW)..j);
        edges.insert((i, j));
    }
    let rels = edges.into_iter().map(|(i, j)| PrecedenceRelation::fs(id(i), id(j))).collect();
    build_network(acts, rels).expect("forward edges are acyclic")
}

/// The 1,186-activity, 3,452-relation instance.
pub fn large_network(seed: u64) -> ActivityNetwork {
    random_network(LARGE_ACTIVITIES, LARGE_RELATIONS, seed)
}

/// Eighteen-activity mid-rise: id, description, division, mean, sd (days).
pub const MIDRISE: [(&str, &str, &str, f64, f64); 18] = [
    ("A001", "Site mobilization", "01", 5.0, 1.0),
    ("A010", "Foundations (piers/mat)", "03", 18.0, 3.0),
    ("A020", "Superstructure (PT slabs L2-L8)", "03", 56.0, 9.0),
    ("A030", "Envelope-Curtainwall & windows", "08", 42.0, 8.0),
    ("A040", "Roofing & waterproofing", "07", 12.0, 2.0),
    ("A050", "Exterior finishes & sealants", "07", 15.0, 3.0),
    ("A060", "Interior partitions & framing", "09", 34.0, 6.0),
    ("A070", "MEP rough-in (core + typical floors)", "23", 36.0, 7.0),
    ("A090", "Drywall boarding & taping", "09", 38.0, 7.0),
    ("A100", "Ceiling grid & tiles", "09", 20.0, 4.0),
    ("A110", "Electrical lighting & devices", "26", 26.0, 5.0),
    ("A120", "HVAC equipment start-up", "23", 16.0, 4.0),
    ("A130", "Plumbing-fixtures set", "22", 12.0, 3.0),
    ("A140", "Elevators-install & inspection", "14", 15.0, 4.0),
    ("A150", "Testing, adjusting, balancing (TAB)", "23", 10.0, 3.0),
    ("A160", "Life-safety testing", "28", 9.0, 2.0),
    ("A170", "Commissioning (systems)", "01", 14.0, 3.0),
    ("A180", "Final clean & punch", "01", 9.0, 2.0),
];

/// Finish-to-start logic of the mid-rise.
pub const MIDRISE_LOGIC: [(&str, &str); 24] = [
    ("A001", "A010"),
    ("A010", "A020"),
    ("A020", "A030"),
    ("A020", "A040"),
    ("A020", "A060"),
    ("A020", "A070"),
    ("A030", "A050"),
    ("A040", "A050"),
    ("A060", "A090"),
    ("A070", "A090"),
    ("A070", "A140"),
    ("A090", "A100"),
    ("A090", "A110"),
    ("A090", "A130"),
    ("A100", "A120"),
    ("A110", "A120"),
    ("A120", "A150"),
    ("A150", "A170"),
    ("A110", "A160"),
    ("A140", "A160"),
    ("A050", "A180"),
    ("A130", "A180"),
    ("A160", "A180"),
    ("A170", "A180"),
];

pub fn midrise_network() -> ActivityNetwork {
    let acts = MIDRISE.iter().map(|&(id, desc, div, mean, _)| Activity::new(id, div, mean).with_description(desc)).collect();
    let rels = MIDRISE_LOGIC.iter().map(|&(a, b)| PrecedenceRelation::fs(a, b)).collect();
    build_network(acts, rels).expect("static logic is acyclic")
}

/// Lognormal priors at each activity's mean and sd.
pub fn midrise_priors() -> BTreeMap<String, DurationPrior> {
    MIDRISE
        .iter()
        .map(|&(id, _, _, mean, sd)| (String::from(id), DurationPrior::lognormal(mean, sd).expect("positive moments")))
        .collect()
}

pub fn midrise_posteriors(seed: u64) -> Result<BTreeMap<String, DurationPosterior>, StochasticError> {
    midrise_priors()
        .iter()
        .map(|(id, p)| Ok((id.clone(), DurationPosterior::from_prior(p, id, seed, DEFAULT_SAMPLES)?)))
        .collect()
}
