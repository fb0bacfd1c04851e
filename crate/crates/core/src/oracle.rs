//! Brute-force Droop proportionality checks for small profiles.
//!
//! A ballot solidly supports a candidate set `L` when it ranks the members of
//! `L` above everyone else. If the weight of such ballots exceeds `K` Droop
//! quotas for `N` seats, a compliant `N`-set must contain at least
//! `min(K, |L|)` members of `L`. This module enumerates those constraints and
//! the winner sets that meet them all.

use crate::ballots::{Ballot, BallotProfile};
use crate::engine::droop_quota;
use crate::Rational;
use rayon::prelude::*;
use serde_json::{json, Value};
use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

/// Largest candidate count a [`CandidateSet`] can hold.
pub const MAX_ORACLE_CANDIDATES: usize = 63;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("{candidates} candidates exceeds the enumeration bound of {bound}; raise it with a max-candidates override")]
    TooManyCandidates { candidates: usize, bound: usize },
    #[error("candidate set is empty")]
    EmptySet,
    #[error("candidate index {0} is out of range")]
    InvalidCandidate(usize),
    #[error("seat count must be at least 1")]
    ZeroSeats,
    #[error("{seats} seats requested but only {candidates} candidates")]
    TooManySeats { seats: usize, candidates: usize },
    #[error("candidate {0} appears twice in the winner set")]
    DuplicateWinner(usize),
}

/// A set of candidate indices below 64, as a bitmask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CandidateSet(u64);

impl CandidateSet {
    pub fn empty() -> Self {
        CandidateSet(0)
    }

    pub fn from_bits(bits: u64) -> Self {
        CandidateSet(bits)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn from_indices(indices: impl IntoIterator<Item = usize>) -> Self {
        CandidateSet(indices.into_iter().fold(0, |acc, c| acc | (1 << c)))
    }

    pub fn insert(&mut self, c: usize) {
        self.0 |= 1 << c;
    }

    pub fn contains(self, c: usize) -> bool {
        c < 64 && self.0 & (1 << c) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersection(self, other: CandidateSet) -> CandidateSet {
        CandidateSet(self.0 & other.0)
    }

    pub fn is_subset(self, other: CandidateSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&c| self.contains(c))
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// `{A,B}` style rendering with the profile's names.
    pub fn display(self, profile: &BallotProfile) -> String {
        let names: Vec<&str> = self.iter().map(|c| profile.name(c)).collect();
        format!("{{{}}}", names.join(","))
    }

    fn names(self, profile: &BallotProfile) -> Vec<&str> {
        self.iter().map(|c| profile.name(c)).collect()
    }

    /// Orders by size, then lexicographically by sorted indices.
    fn sort_key(self) -> (usize, Vec<usize>) {
        (self.len(), self.to_vec())
    }
}

impl fmt::Display for CandidateSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<String> = self.iter().map(|c| c.to_string()).collect();
        write!(f, "{{{}}}", items.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleConfig {
    /// Refuse profiles with more candidates than this.
    pub max_candidates: usize,
    /// Enumerate all `2^C` subsets instead of only the ballot prefix sets.
    pub exhaustive: bool,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_candidates: 16,
            exhaustive: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoalitionConstraint {
    pub preferred: CandidateSet,
    pub support: u64,
    /// Minimum number of winners from `preferred` for the seat count the
    /// constraint was built for.
    pub floor: usize,
}

impl CoalitionConstraint {
    pub fn new(preferred: CandidateSet, support: u64, total_weight: u64, seats: usize) -> Self {
        CoalitionConstraint {
            preferred,
            support,
            floor: seat_floor(support, preferred.len(), total_weight, seats),
        }
    }
}

/// `min(size, K)` for the largest `K` with `support > K · total/(seats+1)`.
pub fn seat_floor(support: u64, size: usize, total_weight: u64, seats: usize) -> usize {
    if support == 0 || total_weight == 0 {
        return 0;
    }
    // support > K * W / (N + 1)  <=>  K < support * (N + 1) / W
    let scaled = support as u128 * (seats as u128 + 1);
    let quotas = ((scaled - 1) / total_weight as u128) as usize;
    quotas.min(size)
}

fn ballot_supports(ballot: &Ballot, set: CandidateSet) -> bool {
    let depth = set.len().min(ballot.ranking.len());
    ballot.ranking[..depth].iter().all(|&c| set.contains(c))
}

fn check_bound(profile: &BallotProfile, config: &OracleConfig) -> Result<(), OracleError> {
    let candidates = profile.num_candidates();
    let bound = config.max_candidates.min(MAX_ORACLE_CANDIDATES);
    if candidates > bound {
        return Err(OracleError::TooManyCandidates { candidates, bound });
    }
    Ok(())
}

fn check_set(profile: &BallotProfile, set: &[usize]) -> Result<CandidateSet, OracleError> {
    let mut out = CandidateSet::empty();
    for &c in set {
        if c >= profile.num_candidates() || c >= MAX_ORACLE_CANDIDATES {
            return Err(OracleError::InvalidCandidate(c));
        }
        if out.contains(c) {
            return Err(OracleError::DuplicateWinner(c));
        }
        out.insert(c);
    }
    if out.is_empty() {
        return Err(OracleError::EmptySet);
    }
    Ok(out)
}

/// Weight of ballots ranking exactly the members of `set` in their top
/// `|set|` places. A truncated ballot counts when everything it ranks is in
/// `set`.
pub fn solid_coalition_support(profile: &BallotProfile, set: &[usize]) -> Result<u64, OracleError> {
    let set = check_set(profile, set)?;
    Ok(support_of(profile, set))
}

fn support_of(profile: &BallotProfile, set: CandidateSet) -> u64 {
    profile
        .ballots()
        .iter()
        .filter(|b| ballot_supports(b, set))
        .map(|b| b.weight)
        .sum()
}

/// Every candidate set whose solid coalition guarantees it at least one of
/// `seats` seats.
pub fn all_constraints(
    profile: &BallotProfile,
    seats: usize,
    config: &OracleConfig,
) -> Result<Vec<CoalitionConstraint>, OracleError> {
    check_bound(profile, config)?;
    if seats == 0 {
        return Err(OracleError::ZeroSeats);
    }
    let total = profile.total_weight();
    if total == 0 {
        return Ok(Vec::new());
    }
    let n = profile.num_candidates();
    let full = CandidateSet((1u64 << n) - 1);
    let candidates_sets: Vec<CandidateSet> = if config.exhaustive || !profile.is_fully_ranked() {
        (1..=full.0).into_par_iter().map(CandidateSet).collect()
    } else {
        // For complete rankings only prefix sets have nonzero support.
        let mut sets = BTreeSet::new();
        sets.insert(full);
        for ballot in profile.ballots() {
            let mut prefix = CandidateSet::empty();
            for &c in &ballot.ranking {
                prefix.insert(c);
                sets.insert(prefix);
            }
        }
        sets.into_iter().collect()
    };
    let mut constraints: Vec<CoalitionConstraint> = candidates_sets
        .into_par_iter()
        .map(|set| CoalitionConstraint::new(set, support_of(profile, set), total, seats))
        .filter(|c| c.floor >= 1)
        .collect();
    constraints.sort_by_key(|c| c.preferred.sort_key());
    Ok(constraints)
}

fn satisfies(winners: CandidateSet, constraints: &[CoalitionConstraint]) -> bool {
    constraints
        .iter()
        .all(|c| winners.intersection(c.preferred).len() >= c.floor)
}

/// All `seats`-sized winner sets meeting every constraint, in lexicographic
/// order of their sorted indices.
pub fn droop_compliant_sets(
    profile: &BallotProfile,
    seats: usize,
    config: &OracleConfig,
) -> Result<Vec<CandidateSet>, OracleError> {
    let constraints = all_constraints(profile, seats, config)?;
    let n = profile.num_candidates();
    if seats > n {
        return Err(OracleError::TooManySeats { seats, candidates: n });
    }
    let mut sets: Vec<CandidateSet> = (0..1u64 << n)
        .into_par_iter()
        .map(CandidateSet)
        .filter(|w| w.len() == seats && satisfies(*w, &constraints))
        .collect();
    sets.sort_by_key(|s| s.to_vec());
    Ok(sets)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Violation {
    pub preferred: CandidateSet,
    pub required: usize,
    pub elected: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DroopVerdict {
    pub seats: usize,
    pub violations: Vec<Violation>,
}

impl DroopVerdict {
    pub fn is_compliant(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn to_json(&self, profile: &BallotProfile) -> Value {
        json!({
            "seats": self.seats,
            "compliant": self.is_compliant(),
            "violations": self.violations.iter().map(|v| json!({
                "preferred": v.preferred.names(profile),
                "required": v.required,
                "elected": v.elected,
            })).collect::<Vec<_>>(),
        })
    }
}

/// Tests one winner set against every constraint for `|winners|` seats.
pub fn check_droop(profile: &BallotProfile, winners: &[usize], config: &OracleConfig) -> Result<DroopVerdict, OracleError> {
    check_bound(profile, config)?;
    let set = check_set(profile, winners)?;
    let seats = set.len();
    let violations = all_constraints(profile, seats, config)?
        .into_iter()
        .filter_map(|c| {
            let elected = set.intersection(c.preferred).len();
            (elected < c.floor).then_some(Violation {
                preferred: c.preferred,
                required: c.floor,
                elected,
            })
        })
        .collect();
    Ok(DroopVerdict { seats, violations })
}

/// True when some compliant `seats`-set contains every member of `required`.
pub fn extends_to_compliant(
    profile: &BallotProfile,
    required: &[usize],
    seats: usize,
    config: &OracleConfig,
) -> Result<bool, OracleError> {
    let required = CandidateSet::from_indices(required.iter().copied());
    Ok(droop_compliant_sets(profile, seats, config)?
        .iter()
        .any(|w| required.is_subset(*w)))
}

/// Structured listing of constraints and compliant sets.
pub fn coalitions_json(
    profile: &BallotProfile,
    seats: usize,
    constraints: &[CoalitionConstraint],
    sets: &[CandidateSet],
) -> Value {
    let quota: Rational = droop_quota(profile.total_weight().max(1), seats.max(1)).expect("positive inputs");
    json!({
        "seats": seats,
        "quota": crate::scalar::Scalar::to_exact_string(&quota),
        "constraints": constraints.iter().map(|c| json!({
            "preferred": c.preferred.names(profile),
            "support": c.support,
            "floor": c.floor,
        })).collect::<Vec<_>>(),
        "compliant_sets": sets.iter().map(|s| s.names(profile)).collect::<Vec<_>>(),
    })
}
