//! Seeded randomized harness for the list methods' proportionality,
//! monotonicity and coherence properties, using the oracle as ground truth.
//!
//! Profile `i` of a run is drawn from a ChaCha stream selected by `i`, so
//! results do not depend on evaluation order and runs may be parallel.
//! Runs in which any count broke a tie are set aside, not judged.

use crate::ballots::{merge_profiles, Ballot, BallotProfile};
use crate::engine::droop_quota;
use crate::methods::{bottom_up_list, irv, top_down_list, top_down_winners, ElectionResult, ProportionalList};
use crate::audit::{Action, Cell};
use crate::oracle::{check_droop, extends_to_compliant, OracleConfig};
use crate::scalar::Scalar;
use crate::Rational;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorConfig {
    pub min_candidates: usize,
    pub max_candidates: usize,
    /// Total ballot weight is drawn from `1..=max_weight`.
    pub max_weight: u64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            min_candidates: 2,
            max_candidates: 6,
            max_weight: 60,
        }
    }
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.min_candidates == 0 || self.min_candidates > self.max_candidates {
            return Err(format!(
                "candidate range {}..={} is empty or starts at zero",
                self.min_candidates, self.max_candidates
            ));
        }
        if self.max_candidates > 7 {
            return Err(format!("at most 7 candidates supported, got {}", self.max_candidates));
        }
        if self.max_weight == 0 || self.max_weight > 60 {
            return Err(format!("total weight bound must be in 1..=60, got {}", self.max_weight));
        }
        Ok(())
    }
}

fn candidate_name(i: usize) -> String {
    if i < 26 {
        char::from(b'A' + i as u8).to_string()
    } else {
        format!("C{}", i + 1)
    }
}

/// Fully ranked profile: `total_weight` voters each cast a uniformly random
/// permutation; identical rankings are merged in order of first appearance.
pub fn random_profile<R: Rng>(rng: &mut R, candidates: usize, total_weight: u64, first_name: usize) -> BallotProfile {
    let mut lines: Vec<Ballot> = Vec::new();
    let mut ranking: Vec<usize> = (0..candidates).collect();
    for _ in 0..total_weight {
        ranking.shuffle(rng);
        match lines.iter_mut().find(|b| b.ranking == ranking) {
            Some(line) => line.weight += 1,
            None => lines.push(Ballot::new(ranking.clone(), 1)),
        }
    }
    let names = (first_name..first_name + candidates).map(candidate_name).collect();
    BallotProfile::new(names, lines, 1, "random").expect("generated profile is valid")
}

fn stream(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// The `index`-th profile of the run seeded with `seed`.
pub fn generated_profile(seed: u64, index: usize, config: &GeneratorConfig) -> BallotProfile {
    let mut rng = stream(seed, index);
    let candidates = rng.gen_range(config.min_candidates..=config.max_candidates);
    let weight = rng.gen_range(1..=config.max_weight);
    random_profile(&mut rng, candidates, weight, 0)
}

/// The `index`-th disjoint pair of the run, each side with at most half the
/// candidate bound (plus one).
pub fn generated_pair(seed: u64, index: usize, config: &GeneratorConfig) -> (BallotProfile, BallotProfile) {
    let mut rng = stream(seed ^ 0x636f_6865_7265_6e63, index);
    let side = (config.max_candidates / 2 + 1).max(1);
    let ca = rng.gen_range(1..=side);
    let cb = rng.gen_range(1..=side);
    let wa = rng.gen_range(1..=config.max_weight);
    let wb = rng.gen_range(1..=config.max_weight);
    let a = random_profile(&mut rng, ca, wa, 0);
    let b = random_profile(&mut rng, cb, wb, ca);
    (a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    /// Every prefix of the top-down list is a Droop-compliant set.
    TopDownDroop,
    /// Every prefix of the bottom-up list is a Droop-compliant set.
    BottomUpDroop,
    /// The IRV winner belongs to some compliant `N`-set for every `N`.
    IrvMembership,
    /// Top-down lists of a disjoint merge restrict to the separate lists.
    Coherence,
    /// Independently computed top-down winner sets for `N` and `N + 1` nest.
    Nesting,
    /// Each top-down prefix of length `M` extends to a compliant `N`-set for
    /// every `N ≥ M`.
    TopDownExtension,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::TopDownDroop,
        Suite::BottomUpDroop,
        Suite::IrvMembership,
        Suite::Coherence,
        Suite::Nesting,
        Suite::TopDownExtension,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::TopDownDroop => "top-down-droop",
            Suite::BottomUpDroop => "bottom-up-droop",
            Suite::IrvMembership => "irv-membership",
            Suite::Coherence => "coherence",
            Suite::Nesting => "nesting",
            Suite::TopDownExtension => "top-down-extension",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| format!("unknown suite {s:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub index: usize,
    pub profiles: Vec<BallotProfile>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Tied,
    Fail(Counterexample),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub target: usize,
    pub passed: usize,
    pub failed: usize,
    pub tied: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl SuiteReport {
    pub fn judged(&self) -> usize {
        self.passed + self.failed
    }

    pub fn ok(&self) -> bool {
        self.failed == 0 && self.judged() == self.target
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.ok() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} {}: {}/{} tie-free runs compliant ({} tied runs skipped)",
            self.suite,
            self.passed,
            self.judged(),
            self.tied
        )
    }
}

/// Checks a list's logs: each replays exactly with seat conservation, and
/// for top-down lists each final contest winner beats the Droop quota for
/// its position.
pub fn check_list_invariants(profile: &BallotProfile, list: &ProportionalList<Rational>) -> Result<(), String> {
    for (pos, log) in list.logs.iter().enumerate() {
        log.replay(profile)
            .map_err(|e| format!("position {}: replay failed: {e}", pos + 1))?;
    }
    if profile.total_weight() == 0 || !profile.is_fully_ranked() {
        return Ok(());
    }
    for (pos, contest) in list.final_contests.iter().enumerate() {
        if let Some(contest) = contest {
            let quota: Rational = droop_quota(profile.total_weight(), pos + 1).map_err(|e| e.to_string())?;
            if contest.winner_priority <= quota {
                return Err(format!(
                    "position {}: final priority {} does not exceed quota {}",
                    pos + 1,
                    contest.winner_priority.to_exact_string(),
                    quota.to_exact_string()
                ));
            }
        }
    }
    Ok(())
}

/// Checks an IRV log: it replays exactly, and on fully ranked ballots the
/// winner's votes in the row that elected it exceed half the total weight.
pub fn check_irv_invariants(profile: &BallotProfile, result: &ElectionResult<Rational>) -> Result<(), String> {
    result.log.replay(profile).map_err(|e| format!("replay failed: {e}"))?;
    if profile.total_weight() == 0 || !profile.is_fully_ranked() {
        return Ok(());
    }
    let Some(&winner) = result.winners.first() else {
        return Ok(());
    };
    let row = result
        .log
        .events()
        .iter()
        .find(|e| e.actions.contains(&Action::Elect(winner)))
        .ok_or("no row elects the winner")?;
    let quota: Rational = droop_quota(profile.total_weight(), 1).map_err(|e| e.to_string())?;
    match &row.cells[winner] {
        Cell::Priority(votes) if *votes > quota => Ok(()),
        Cell::Priority(votes) => Err(format!(
            "final votes {} do not exceed quota {}",
            votes.to_exact_string(),
            quota.to_exact_string()
        )),
        _ => Err("winner has no final vote count".into()),
    }
}

fn fail(index: usize, profiles: Vec<BallotProfile>, message: String) -> Outcome {
    Outcome::Fail(Counterexample { index, profiles, message })
}

fn names(profile: &BallotProfile, set: &[usize]) -> String {
    set.iter().map(|&c| profile.name(c)).collect::<Vec<_>>().join(" > ")
}

/// Judges one generated run.
pub fn evaluate(suite: Suite, seed: u64, index: usize, config: &GeneratorConfig) -> Outcome {
    if suite == Suite::Coherence {
        let (a, b) = generated_pair(seed, index, config);
        return evaluate_coherence(index, a, b);
    }
    let profile = generated_profile(seed, index, config);
    let outcome = match evaluate_profile(suite, &profile) {
        Ok(outcome) => outcome,
        Err(message) => fail(index, vec![profile], message),
    };
    outcome.with_index(index)
}

impl Outcome {
    fn with_index(self, index: usize) -> Self {
        match self {
            Outcome::Fail(mut c) => {
                c.index = index;
                Outcome::Fail(c)
            }
            other => other,
        }
    }
}

/// Judges one profile against a single-profile suite.
pub fn evaluate_profile(suite: Suite, profile: &BallotProfile) -> Result<Outcome, String> {
    let oracle = OracleConfig::default();
    let n = profile.num_candidates();
    let err = |e: &dyn fmt::Display| e.to_string();
    let bad = |message: String| Ok(fail(0, vec![profile.clone()], message));
    match suite {
        Suite::TopDownDroop | Suite::TopDownExtension => {
            let list = top_down_list::<Rational>(profile, n).map_err(|e| err(&e))?;
            if list.tie_flag {
                return Ok(Outcome::Tied);
            }
            check_list_invariants(profile, &list)?;
            for m in 1..=n {
                let prefix = list.prefix(m);
                let last = if suite == Suite::TopDownDroop { m } else { n };
                for seats in m..=last {
                    if !extends_to_compliant(profile, prefix, seats, &oracle).map_err(|e| err(&e))? {
                        return bad(format!(
                            "top-down prefix {} is in no compliant {seats}-set",
                            names(profile, prefix)
                        ));
                    }
                }
            }
        }
        Suite::BottomUpDroop => {
            let list = bottom_up_list::<Rational>(profile).map_err(|e| err(&e))?;
            if list.tie_flag {
                return Ok(Outcome::Tied);
            }
            check_list_invariants(profile, &list)?;
            for m in 1..=n {
                let prefix = list.prefix(m);
                let verdict = check_droop(profile, prefix, &oracle).map_err(|e| err(&e))?;
                if !verdict.is_compliant() {
                    return bad(format!("bottom-up prefix {} is not compliant", names(profile, prefix)));
                }
                // the count that placed position m + 1 elected exactly this prefix
                if m < n {
                    let elected: BTreeSet<usize> = list.logs[m]
                        .events()
                        .iter()
                        .flat_map(|e| e.actions.iter())
                        .filter_map(|a| match a {
                            Action::Elect(c) => Some(*c),
                            _ => None,
                        })
                        .collect();
                    if elected != prefix.iter().copied().collect() {
                        return bad(format!("bottom-up inner count for position {} disagrees with prefix", m + 1));
                    }
                }
            }
        }
        Suite::IrvMembership => {
            let result = irv::<Rational>(profile).map_err(|e| err(&e))?;
            if result.tie_flag {
                return Ok(Outcome::Tied);
            }
            check_irv_invariants(profile, &result)?;
            for seats in 1..=n {
                if !extends_to_compliant(profile, &result.winners, seats, &oracle).map_err(|e| err(&e))? {
                    return bad(format!(
                        "IRV winner {} is in no compliant {seats}-set",
                        profile.name(result.winners[0])
                    ));
                }
            }
        }
        Suite::Nesting => {
            let full = top_down_list::<Rational>(profile, n).map_err(|e| err(&e))?;
            if full.tie_flag {
                return Ok(Outcome::Tied);
            }
            check_list_invariants(profile, &full)?;
            let mut previous: Option<Vec<usize>> = None;
            for seats in 1..=n {
                let winners = top_down_winners::<Rational>(profile, seats).map_err(|e| err(&e))?;
                if winners != full.prefix(seats) {
                    return bad(format!("{seats}-seat winners differ from the list prefix"));
                }
                if let Some(prev) = &previous {
                    let smaller: BTreeSet<_> = prev.iter().collect();
                    let larger: BTreeSet<_> = winners.iter().collect();
                    if !smaller.is_subset(&larger) {
                        return bad(format!("{}-seat winners are not contained in {seats}-seat winners", seats - 1));
                    }
                }
                previous = Some(winners);
            }
        }
        Suite::Coherence => return Err("coherence needs a profile pair".into()),
    }
    Ok(Outcome::Pass)
}

/// Top-down list of `merge(a, b)` restricted to each side equals that side's
/// own list.
pub fn evaluate_coherence(index: usize, a: BallotProfile, b: BallotProfile) -> Outcome {
    let run = || -> Result<Outcome, String> {
        let merged = merge_profiles(&a, &b).map_err(|e| e.to_string())?;
        let list_a = top_down_list::<Rational>(&a, a.num_candidates()).map_err(|e| e.to_string())?;
        let list_b = top_down_list::<Rational>(&b, b.num_candidates()).map_err(|e| e.to_string())?;
        let list_m = top_down_list::<Rational>(&merged, merged.num_candidates()).map_err(|e| e.to_string())?;
        if list_a.tie_flag || list_b.tie_flag || list_m.tie_flag {
            return Ok(Outcome::Tied);
        }
        check_list_invariants(&a, &list_a)?;
        check_list_invariants(&b, &list_b)?;
        check_list_invariants(&merged, &list_m)?;
        let offset = a.num_candidates();
        let side_a: Vec<usize> = list_m.order.iter().copied().filter(|&c| c < offset).collect();
        let side_b: Vec<usize> = list_m
            .order
            .iter()
            .filter(|&&c| c >= offset)
            .map(|&c| c - offset)
            .collect();
        if side_a != list_a.order || side_b != list_b.order {
            return Ok(fail(
                index,
                vec![a.clone(), b.clone(), merged.clone()],
                format!(
                    "merged list {} does not restrict to {} and {}",
                    names(&merged, &list_m.order),
                    names(&a, &list_a.order),
                    names(&b, &list_b.order)
                ),
            ));
        }
        Ok(Outcome::Pass)
    };
    run().unwrap_or_else(|message| fail(index, vec![a.clone(), b.clone()], message))
}

/// Runs `suite` until `target` tie-free runs are judged (or the attempt cap
/// of `20 × target + 100` is hit).
pub fn run_suite(suite: Suite, seed: u64, target: usize, config: &GeneratorConfig) -> SuiteReport {
    let mut report = SuiteReport {
        suite,
        target,
        passed: 0,
        failed: 0,
        tied: 0,
        counterexamples: Vec::new(),
    };
    let cap = target.saturating_mul(20).saturating_add(100);
    let batch = target.clamp(64, 4096);
    let mut next = 0;
    while report.judged() < target && next < cap {
        let end = (next + batch).min(cap);
        let outcomes: Vec<Outcome> = (next..end)
            .into_par_iter()
            .map(|i| evaluate(suite, seed, i, config))
            .collect();
        for outcome in outcomes {
            if report.judged() == target {
                break;
            }
            match outcome {
                Outcome::Pass => report.passed += 1,
                Outcome::Tied => report.tied += 1,
                Outcome::Fail(c) => {
                    report.failed += 1;
                    report.counterexamples.push(c);
                }
            }
        }
        next = end;
    }
    report
}
