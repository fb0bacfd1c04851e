//! Tabulation methods built on the engine: instant runoff, quota-based
//! Phragmén, and the bottom-up and top-down proportional lists.

use crate::audit::AuditLog;
use crate::ballots::{restrict_profile, BallotProfile, ProfileError};
use crate::engine::{droop_quota, select_max, select_min, CandidateStatus, CountState, EngineError};
use crate::scalar::Scalar;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MethodError {
    #[error("profile has no candidates")]
    NoCandidates,
    #[error("{seats} seats requested but only {candidates} candidates")]
    TooManySeats { seats: usize, candidates: usize },
    #[error("list depth {depth} outside 1..={candidates}")]
    DepthOutOfRange { depth: usize, candidates: usize },
    #[error("previously elected set covers every candidate")]
    NoHopefuls,
    #[error("candidate {0} listed as previously elected twice")]
    DuplicatePreviouslyElected(usize),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElectionResult<T> {
    /// Winners in the order they were elected.
    pub winners: Vec<usize>,
    pub log: AuditLog<T>,
    pub tie_flag: bool,
}

/// A ranking of every candidate such that the first `n` entries are the
/// `n`-seat winners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProportionalList<T> {
    pub order: Vec<usize>,
    /// `logs[k]` is the count that decided position `k + 1`. Positions fixed
    /// without a count have an empty log.
    pub logs: Vec<AuditLog<T>>,
    /// Final contest of each top-down round, where one took place.
    pub final_contests: Vec<Option<FinalContest<T>>>,
    pub tie_flag: bool,
}

impl<T> ProportionalList<T> {
    pub fn prefix(&self, seats: usize) -> &[usize] {
        &self.order[..seats.min(self.order.len())]
    }
}

/// Priorities of the last two hopefuls when the rival was excluded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FinalContest<T> {
    pub winner_priority: T,
    pub rival: usize,
    pub rival_priority: T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RoundOutcome<T> {
    pub winner: usize,
    pub log: AuditLog<T>,
    pub tie_flag: bool,
    /// `None` when the winner was the only hopeful from the start.
    pub final_contest: Option<FinalContest<T>>,
}

/// Instant runoff: exclude the candidate with the fewest current votes until
/// one remains.
pub fn irv<T: Scalar>(profile: &BallotProfile) -> Result<ElectionResult<T>, MethodError> {
    if profile.num_candidates() == 0 {
        return Err(MethodError::NoCandidates);
    }
    let mut state = CountState::<T>::new(profile);
    let mut tie_flag = false;
    loop {
        let tally = state.assign_support();
        state.record(&tally);
        let hopefuls = state.with_any(CandidateStatus::Hopeful);
        if let [winner] = hopefuls[..] {
            state.elect(winner)?;
            state.end();
            return Ok(ElectionResult {
                winners: vec![winner],
                log: state.into_log(),
                tie_flag,
            });
        }
        let (loser, tied) = select_min(&hopefuls, |c| tally.votes[c].clone()).expect("hopefuls non-empty");
        if tied {
            state.flag_tie();
            tie_flag = true;
        }
        state.exclude(loser)?;
        let rest = state.with_any(CandidateStatus::Hopeful);
        if let [winner] = rest[..] {
            state.elect(winner)?;
            state.end();
            return Ok(ElectionResult {
                winners: vec![winner],
                log: state.into_log(),
                tie_flag,
            });
        }
    }
}

/// Phragmén with a fixed Droop quota: elect the top priority when it exceeds
/// the quota, otherwise exclude the bottom one, and fill below quota once
/// hopefuls equal the open seats.
pub fn quota_phragmen<T: Scalar>(profile: &BallotProfile, seats: usize) -> Result<ElectionResult<T>, MethodError> {
    let candidates = profile.num_candidates();
    if seats == 0 {
        return Err(EngineError::ZeroSeats.into());
    }
    if seats > candidates {
        return Err(MethodError::TooManySeats { seats, candidates });
    }
    let quota: T = droop_quota(profile.total_weight(), seats)?;
    let mut state = CountState::<T>::new(profile);
    let mut winners = Vec::with_capacity(seats);
    let mut tie_flag = false;
    while winners.len() < seats {
        let tally = state.assign_support();
        state.record(&tally);
        let hopefuls = state.with_any(CandidateStatus::Hopeful);
        let open = seats - winners.len();
        let (best, best_tied) = select_max(&hopefuls, |c| tally.priority(c)).expect("hopefuls cover open seats");
        if tally.priority(best) > quota || hopefuls.len() <= open {
            if tally.priority(best) <= quota {
                state.flag_forced();
            }
            if best_tied {
                state.flag_tie();
                tie_flag = true;
            }
            state.elect(best)?;
            winners.push(best);
        } else {
            let (worst, tied) = select_min(&hopefuls, |c| tally.priority(c)).expect("hopefuls non-empty");
            if tied {
                state.flag_tie();
                tie_flag = true;
            }
            state.exclude(worst)?;
        }
    }
    state.end();
    Ok(ElectionResult {
        winners,
        log: state.into_log(),
        tie_flag,
    })
}

/// Pure-election Phragmén on the candidates not in `removed`: elects all but
/// one, highest priority first. Returns the elected order, the loser and the
/// log.
fn elect_all_but_one<T: Scalar>(
    profile: &BallotProfile,
    removed: &BTreeSet<usize>,
) -> Result<(Vec<usize>, usize, AuditLog<T>, bool), MethodError> {
    let restricted = restrict_profile(profile, removed)?.profile;
    let status = (0..profile.num_candidates())
        .map(|c| {
            if removed.contains(&c) {
                CandidateStatus::Excluded
            } else {
                CandidateStatus::Hopeful
            }
        })
        .collect();
    let mut state = CountState::<T>::with_status(&restricted, status)?;
    let mut elected = Vec::new();
    let mut tie_flag = false;
    loop {
        let hopefuls = state.with_any(CandidateStatus::Hopeful);
        if let [loser] = hopefuls[..] {
            if !state.log().is_empty() {
                state.end();
            }
            return Ok((elected, loser, state.into_log(), tie_flag));
        }
        let tally = state.assign_support();
        state.record(&tally);
        let (best, tied) = select_max(&hopefuls, |c| tally.priority(c)).expect("hopefuls non-empty");
        if tied {
            state.flag_tie();
            tie_flag = true;
        }
        state.elect(best)?;
        elected.push(best);
    }
}

/// Bottom-up list: with `M` candidates left, elect `M − 1` of them by pure
/// Phragmén; the one left over takes position `M`.
pub fn bottom_up_list<T: Scalar>(profile: &BallotProfile) -> Result<ProportionalList<T>, MethodError> {
    let n = profile.num_candidates();
    if n == 0 {
        return Err(MethodError::NoCandidates);
    }
    let mut order = vec![usize::MAX; n];
    let mut logs: Vec<AuditLog<T>> = vec![AuditLog::new(vec![CandidateStatus::Hopeful; n]); n];
    let mut removed = BTreeSet::new();
    let mut tie_flag = false;
    for position in (0..n).rev() {
        let (_, loser, log, tied) = elect_all_but_one::<T>(profile, &removed)?;
        tie_flag |= tied;
        order[position] = loser;
        logs[position] = log;
        removed.insert(loser);
    }
    Ok(ProportionalList {
        order,
        logs,
        final_contests: vec![None; n],
        tie_flag,
    })
}

/// One top-down round: decides who joins `previously_elected`.
///
/// Repeats: re-elect every previously elected candidate, highest priority
/// first; then exclude the lowest-priority hopeful. When one hopeful is left
/// it wins; otherwise loads reset and the count restarts with the exclusions
/// kept.
pub fn top_down_round<T: Scalar>(
    profile: &BallotProfile,
    previously_elected: &[usize],
) -> Result<RoundOutcome<T>, MethodError> {
    let n = profile.num_candidates();
    let mut status = vec![CandidateStatus::Hopeful; n];
    for &c in previously_elected {
        if c >= n {
            return Err(EngineError::InvalidCandidate(c).into());
        }
        if status[c] == CandidateStatus::PreviouslyElected {
            return Err(MethodError::DuplicatePreviouslyElected(c));
        }
        status[c] = CandidateStatus::PreviouslyElected;
    }
    if previously_elected.len() >= n {
        return Err(MethodError::NoHopefuls);
    }
    let mut state = CountState::<T>::with_status(profile, status)?;
    let mut tie_flag = false;
    loop {
        loop {
            let pending = state.with_any(CandidateStatus::PreviouslyElected);
            if pending.is_empty() {
                break;
            }
            let tally = state.assign_support();
            state.record(&tally);
            let (best, tied) = select_max(&pending, |c| tally.priority(c)).expect("pending non-empty");
            if tied {
                state.flag_tie();
                tie_flag = true;
            }
            state.elect(best)?;
        }

        let tally = state.assign_support();
        state.record(&tally);
        let hopefuls = state.with_any(CandidateStatus::Hopeful);
        if let [winner] = hopefuls[..] {
            state.elect(winner)?;
            state.end();
            return Ok(RoundOutcome {
                winner,
                log: state.into_log(),
                tie_flag,
                final_contest: None,
            });
        }
        let (loser, tied) = select_min(&hopefuls, |c| tally.priority(c)).expect("hopefuls non-empty");
        if tied {
            state.flag_tie();
            tie_flag = true;
        }
        state.exclude(loser)?;
        if hopefuls.len() == 2 {
            let winner = hopefuls.iter().copied().find(|&c| c != loser).expect("two hopefuls");
            state.elect(winner)?;
            state.end();
            return Ok(RoundOutcome {
                winner,
                log: state.into_log(),
                tie_flag,
                final_contest: Some(FinalContest {
                    winner_priority: tally.priority(winner),
                    rival: loser,
                    rival_priority: tally.priority(loser),
                }),
            });
        }
        if !previously_elected.is_empty() {
            state.restart();
        }
    }
}

/// Top-down list of the first `depth` positions. Position `k` is the winner
/// of a round with positions `1..k` previously elected.
pub fn top_down_list<T: Scalar>(profile: &BallotProfile, depth: usize) -> Result<ProportionalList<T>, MethodError> {
    let candidates = profile.num_candidates();
    if depth == 0 || depth > candidates {
        return Err(MethodError::DepthOutOfRange { depth, candidates });
    }
    let mut list = ProportionalList {
        order: Vec::with_capacity(depth),
        logs: Vec::with_capacity(depth),
        final_contests: Vec::with_capacity(depth),
        tie_flag: false,
    };
    for _ in 0..depth {
        let round = top_down_round::<T>(profile, &list.order)?;
        list.order.push(round.winner);
        list.logs.push(round.log);
        list.final_contests.push(round.final_contest);
        list.tie_flag |= round.tie_flag;
    }
    Ok(list)
}

/// Winners of the `seats`-seat top-down election, in list order.
pub fn top_down_winners<T: Scalar>(profile: &BallotProfile, seats: usize) -> Result<Vec<usize>, MethodError> {
    Ok(top_down_list::<T>(profile, seats)?.order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::audit::{Action, Cell};
    use crate::ballots::profile_from_notation;
    use crate::Rational;

    const A: usize = 0;
    const B: usize = 1;
    const C: usize = 2;
    const D: usize = 3;
    const E: usize = 4;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    fn example_1() -> BallotProfile {
        profile_from_notation("60: ADCB, 51: BCDA, 45: CADB, 44: DCAB").unwrap()
    }

    fn example_3() -> BallotProfile {
        profile_from_notation("60: ADCB, 51: BCDA, 45: CADB, 44: DCAB, 45: E").unwrap()
    }

    #[test]
    fn irv_example_1() {
        let res = irv::<Rational>(&example_1()).unwrap();
        assert_eq!(res.winners, vec![C]);
        let excluded: Vec<usize> = res
            .log
            .events()
            .iter()
            .flat_map(|e| e.actions.iter())
            .filter_map(|a| match a {
                Action::Exclude(c) => Some(*c),
                _ => None,
            })
            .collect();
        assert_eq!(excluded, vec![D, B, A]);
        assert!(!res.tie_flag);
    }

    #[test]
    fn irv_single_candidate() {
        let p = profile_from_notation("3: A").unwrap();
        let res = irv::<Rational>(&p).unwrap();
        assert_eq!(res.winners, vec![A]);
        assert_eq!(res.log.events().len(), 1);
        assert_eq!(res.log.events()[0].actions, vec![Action::Elect(A), Action::End]);
    }

    #[test]
    fn irv_example_3() {
        assert_eq!(irv::<Rational>(&example_3()).unwrap().winners, vec![C]);
    }

    #[test]
    fn quota_examples() {
        assert_eq!(quota_phragmen::<Rational>(&example_1(), 1).unwrap().winners, vec![C]);
        assert_eq!(quota_phragmen::<Rational>(&example_1(), 3).unwrap().winners, vec![A, D, B]);
        let res = quota_phragmen::<Rational>(&example_3(), 3).unwrap();
        let mut winners = res.winners.clone();
        winners.sort();
        assert_eq!(winners, vec![A, B, C]);
        assert!(!res.log.events().iter().any(|e| e.flags.forced));
        assert_eq!(
            quota_phragmen::<Rational>(&example_1(), 5).unwrap_err(),
            MethodError::TooManySeats { seats: 5, candidates: 4 }
        );
    }

    #[test]
    fn quota_forced_fill() {
        let p = profile_from_notation("3: A, 2: B, 1: C").unwrap();
        let res = quota_phragmen::<Rational>(&p, 2).unwrap();
        assert_eq!(res.winners, vec![A, B]);
        let last = res.log.events().last().unwrap();
        assert!(last.flags.forced);
        assert_eq!(res.log.events()[1].actions, vec![Action::Exclude(C)]);
    }

    #[test]
    fn bottom_up_example_1() {
        let list = bottom_up_list::<Rational>(&example_1()).unwrap();
        assert_eq!(list.order, vec![A, D, B, C]);
        let first = &list.logs[3];
        assert_eq!(first.priority_at(2, D), Some(&r(52, 1)));
        assert_eq!(first.priority_at(3, C), Some(&r(149, 3)));
        assert!(list.logs[0].is_empty());
    }

    #[test]
    fn bottom_up_two_candidates() {
        let p = profile_from_notation("2: AB, 1: BA").unwrap();
        assert_eq!(bottom_up_list::<Rational>(&p).unwrap().order, vec![A, B]);
    }

    #[test]
    fn top_down_round_table_2() {
        let round = top_down_round::<Rational>(&example_1(), &[C]).unwrap();
        assert_eq!(round.winner, A);
        let log = &round.log;
        assert_eq!(log.events().len(), 4);
        assert_eq!(log.priority_at(2, A), Some(&r(105, 2)));
        assert_eq!(log.priority_at(3, C), Some(&r(89, 1)));
        assert_eq!(log.priority_at(4, A), Some(&r(149, 2)));
        assert_eq!(log.events()[1].actions, vec![Action::Exclude(D), Action::Restart]);
        assert_eq!(log.events()[3].cells[D], Cell::Excluded);
    }

    #[test]
    fn top_down_round_table_3() {
        let round = top_down_round::<Rational>(&example_1(), &[A, C]).unwrap();
        assert_eq!(round.winner, B);
        assert_eq!(round.log.priority_at(2, D), Some(&r(52, 1)));
        assert_eq!(round.log.priority_at(3, D), Some(&r(149, 3)));
        assert_eq!(round.log.events()[0].actions, vec![Action::Elect(A)]);
        assert_eq!(round.log.events()[1].actions, vec![Action::Elect(C)]);
        let contest = round.final_contest.unwrap();
        assert_eq!(contest.rival, D);
        assert!(contest.winner_priority > droop_quota::<Rational>(200, 3).unwrap());
    }

    #[test]
    fn top_down_round_without_previous_matches_irv() {
        for p in [example_1(), example_3()] {
            let round = top_down_round::<Rational>(&p, &[]).unwrap();
            let res = irv::<Rational>(&p).unwrap();
            assert_eq!(round.winner, res.winners[0]);
            assert_eq!(round.log, res.log);
        }
    }

    #[test]
    fn top_down_round_errors() {
        let p = example_1();
        assert_eq!(top_down_round::<Rational>(&p, &[A, B, C, D]).unwrap_err(), MethodError::NoHopefuls);
        assert_eq!(
            top_down_round::<Rational>(&p, &[A, A]).unwrap_err(),
            MethodError::DuplicatePreviouslyElected(A)
        );
    }

    #[test]
    fn top_down_list_example_1() {
        let list = top_down_list::<Rational>(&example_1(), 4).unwrap();
        assert_eq!(list.order, vec![C, A, B, D]);
        assert_eq!(top_down_list::<Rational>(&example_1(), 1).unwrap().order, vec![C]);
        assert!(top_down_list::<Rational>(&example_1(), 0).is_err());
        assert!(top_down_list::<Rational>(&example_1(), 5).is_err());
    }

    #[test]
    fn top_down_list_example_3_is_coherent() {
        let list = top_down_list::<Rational>(&example_3(), 5).unwrap();
        let without_e: Vec<usize> = list.order.iter().copied().filter(|&c| c != E).collect();
        assert_eq!(without_e, vec![C, A, B, D]);
    }

    #[test]
    fn fixed_width_scalar_gives_same_list() {
        let exact = top_down_list::<Rational>(&example_1(), 4).unwrap().order;
        let small = top_down_list::<num_rational::Ratio<i64>>(&example_1(), 4).unwrap().order;
        assert_eq!(exact, small);
    }
}
