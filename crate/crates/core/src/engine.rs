//! Phragmén accounting shared by every method.
//!
//! Each ballot line carries a seat load: the fraction of an elected seat that
//! each of its weight units has paid for. A ballot supports its highest-ranked
//! candidate that is still in the running (hopeful or previously elected).
//! For a candidate `c` with supporting weight `V` and supporting load `S`, the
//! priority is `V / (1 + S)`, the number of ballots per seat its supporters
//! would have if `c` were elected next. Electing `c` sets the load of every
//! supporting line to `(S + 1) / V`, so total load rises by exactly one seat.

use crate::audit::{Action, AuditLog, Cell, Event, Flags};
use crate::ballots::{Ballot, BallotProfile};
use crate::scalar::Scalar;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CandidateStatus {
    Hopeful,
    PreviouslyElected,
    Elected,
    Excluded,
}

impl CandidateStatus {
    /// Still able to receive support.
    pub fn is_continuing(self) -> bool {
        matches!(self, CandidateStatus::Hopeful | CandidateStatus::PreviouslyElected)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("candidate index {0} is out of range")]
    InvalidCandidate(usize),
    #[error("candidate {candidate} cannot be elected from status {status:?}")]
    NotElectable { candidate: usize, status: CandidateStatus },
    #[error("candidate {candidate} cannot be excluded from status {status:?}")]
    NotExcludable { candidate: usize, status: CandidateStatus },
    #[error("seat count must be at least 1")]
    ZeroSeats,
    #[error("total weight must be at least 1")]
    ZeroWeight,
    #[error("status vector has {got} entries for {expected} candidates")]
    StatusLength { expected: usize, got: usize },
    #[error("replay diverged from the log at step {step}")]
    ReplayMismatch { step: usize },
    #[error("seat loads sum to {loaded} but {seats} seats are elected with support (step {step})")]
    ConservationViolated { step: usize, loaded: String, seats: usize },
}

/// Per-candidate support under the current statuses and loads.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportTally<T> {
    /// Total weight of supporting ballots.
    pub votes: Vec<T>,
    /// Sum of weight times seat load over supporting ballots.
    pub loads: Vec<T>,
    /// Weight of ballots with no continuing candidate.
    pub exhausted: T,
}

impl<T: Scalar> SupportTally<T> {
    pub fn priority(&self, candidate: usize) -> T {
        priority(&self.votes[candidate], &self.loads[candidate])
    }
}

/// `votes / (1 + load)`.
pub fn priority<T: Scalar>(votes: &T, load: &T) -> T {
    votes.clone() / (T::one() + load.clone())
}

/// Droop quota `total_weight / (seats + 1)`, exactly.
pub fn droop_quota<T: Scalar>(total_weight: u64, seats: usize) -> Result<T, EngineError> {
    if seats == 0 {
        return Err(EngineError::ZeroSeats);
    }
    if total_weight == 0 {
        return Err(EngineError::ZeroWeight);
    }
    Ok(T::from_u64(total_weight) / T::from_u64(seats as u64 + 1))
}

/// Mutable count state: statuses, per-line seat loads and the transcript.
#[derive(Debug, Clone)]
pub struct CountState<'p, T> {
    profile: &'p BallotProfile,
    status: Vec<CandidateStatus>,
    seat_load: Vec<T>,
    /// Seats elected with zero support since the last restart; they carry no
    /// load.
    unloaded: usize,
    log: AuditLog<T>,
}

impl<'p, T: Scalar> CountState<'p, T> {
    /// All candidates hopeful, all loads zero.
    pub fn new(profile: &'p BallotProfile) -> Self {
        Self::with_status(profile, vec![CandidateStatus::Hopeful; profile.num_candidates()])
            .expect("status vector sized to the profile")
    }

    pub fn with_status(profile: &'p BallotProfile, status: Vec<CandidateStatus>) -> Result<Self, EngineError> {
        if status.len() != profile.num_candidates() {
            return Err(EngineError::StatusLength {
                expected: profile.num_candidates(),
                got: status.len(),
            });
        }
        let unloaded = status.iter().filter(|s| **s == CandidateStatus::Elected).count();
        Ok(CountState {
            profile,
            seat_load: vec![T::zero(); profile.ballots().len()],
            log: AuditLog::new(status.clone()),
            status,
            unloaded,
        })
    }

    pub fn profile(&self) -> &'p BallotProfile {
        self.profile
    }

    pub fn status(&self, candidate: usize) -> CandidateStatus {
        self.status[candidate]
    }

    pub fn statuses(&self) -> &[CandidateStatus] {
        &self.status
    }

    pub fn seat_loads(&self) -> &[T] {
        &self.seat_load
    }

    pub fn log(&self) -> &AuditLog<T> {
        &self.log
    }

    pub fn into_log(self) -> AuditLog<T> {
        self.log
    }

    pub fn with_any(&self, wanted: CandidateStatus) -> Vec<usize> {
        (0..self.status.len()).filter(|&c| self.status[c] == wanted).collect()
    }

    pub fn elected_count(&self) -> usize {
        self.status.iter().filter(|s| **s == CandidateStatus::Elected).count()
    }

    /// The candidate a ballot currently supports, if any.
    pub fn supporter(&self, ballot: &Ballot) -> Option<usize> {
        ballot.ranking.iter().copied().find(|&c| self.status[c].is_continuing())
    }

    pub fn assign_support(&self) -> SupportTally<T> {
        let n = self.status.len();
        let mut tally = SupportTally {
            votes: vec![T::zero(); n],
            loads: vec![T::zero(); n],
            exhausted: T::zero(),
        };
        for (ballot, load) in self.profile.ballots().iter().zip(&self.seat_load) {
            let weight = T::from_u64(ballot.weight);
            match self.supporter(ballot) {
                Some(c) => {
                    tally.loads[c] = tally.loads[c].clone() + weight.clone() * load.clone();
                    tally.votes[c] = tally.votes[c].clone() + weight;
                }
                None => tally.exhausted = tally.exhausted.clone() + weight,
            }
        }
        tally
    }

    /// Σ weight × seat load over all ballot lines.
    pub fn total_load(&self) -> T {
        self.profile
            .ballots()
            .iter()
            .zip(&self.seat_load)
            .fold(T::zero(), |acc, (b, l)| acc + T::from_u64(b.weight) * l.clone())
    }

    /// Checks that total load equals the number of seats elected with support.
    pub fn check_conservation(&self) -> Result<(), EngineError> {
        let seats = self.elected_count() - self.unloaded;
        let loaded = self.total_load();
        if loaded != T::from_u64(seats as u64) {
            return Err(EngineError::ConservationViolated {
                step: self.log.events().len(),
                loaded: loaded.to_exact_string(),
                seats,
            });
        }
        Ok(())
    }

    /// Cells for every candidate: a priority for continuing candidates, a
    /// marker otherwise.
    pub fn snapshot(&self, tally: &SupportTally<T>) -> Vec<Cell<T>> {
        self.status
            .iter()
            .enumerate()
            .map(|(c, s)| match s {
                CandidateStatus::Elected => Cell::Elected,
                CandidateStatus::Excluded => Cell::Excluded,
                _ => Cell::Priority(tally.priority(c)),
            })
            .collect()
    }

    /// Starts a new log row showing the priorities in `tally`. Subsequent
    /// actions are attached to this row.
    pub fn record(&mut self, tally: &SupportTally<T>) {
        let cells = self.snapshot(tally);
        self.log.push(Event {
            step: self.log.events().len() + 1,
            cells,
            actions: Vec::new(),
            flags: Flags::default(),
        });
    }

    fn ensure_row(&mut self) {
        if self.log.events().is_empty() {
            let tally = self.assign_support();
            self.record(&tally);
        }
    }

    fn check_index(&self, candidate: usize) -> Result<(), EngineError> {
        if candidate >= self.status.len() {
            return Err(EngineError::InvalidCandidate(candidate));
        }
        Ok(())
    }

    /// Elects a continuing candidate and loads its supporting ballots with
    /// `(S + 1) / V` each. With no support the status still changes but no
    /// load moves, and the row is flagged.
    pub fn elect(&mut self, candidate: usize) -> Result<(), EngineError> {
        self.check_index(candidate)?;
        let status = self.status[candidate];
        if !status.is_continuing() {
            return Err(EngineError::NotElectable { candidate, status });
        }
        self.ensure_row();
        let supporting: Vec<usize> = self
            .profile
            .ballots()
            .iter()
            .enumerate()
            .filter(|(_, b)| self.supporter(b) == Some(candidate))
            .map(|(i, _)| i)
            .collect();
        let (votes, load) = supporting.iter().fold((T::zero(), T::zero()), |(v, s), &i| {
            let w = T::from_u64(self.profile.ballots()[i].weight);
            (v + w.clone(), s + w * self.seat_load[i].clone())
        });
        if votes.is_zero() {
            self.unloaded += 1;
            self.log.last_mut().flags.zero_support = true;
        } else {
            let new_load = (load + T::one()) / votes;
            for i in supporting {
                self.seat_load[i] = new_load.clone();
            }
        }
        self.status[candidate] = CandidateStatus::Elected;
        self.log.last_mut().actions.push(Action::Elect(candidate));
        Ok(())
    }

    /// Excludes a hopeful candidate. Loads are untouched.
    pub fn exclude(&mut self, candidate: usize) -> Result<(), EngineError> {
        self.check_index(candidate)?;
        let status = self.status[candidate];
        if status != CandidateStatus::Hopeful {
            return Err(EngineError::NotExcludable { candidate, status });
        }
        self.ensure_row();
        self.status[candidate] = CandidateStatus::Excluded;
        self.log.last_mut().actions.push(Action::Exclude(candidate));
        Ok(())
    }

    /// Zeroes every load and demotes elected candidates to previously
    /// elected. Exclusions persist.
    pub fn restart(&mut self) {
        self.ensure_row();
        for s in &mut self.status {
            if *s == CandidateStatus::Elected {
                *s = CandidateStatus::PreviouslyElected;
            }
        }
        for l in &mut self.seat_load {
            *l = T::zero();
        }
        self.unloaded = 0;
        self.log.last_mut().actions.push(Action::Restart);
    }

    pub fn end(&mut self) {
        self.ensure_row();
        self.log.last_mut().actions.push(Action::End);
    }

    pub fn flag_tie(&mut self) {
        self.ensure_row();
        self.log.last_mut().flags.tie_broken = true;
    }

    pub fn flag_forced(&mut self) {
        self.ensure_row();
        self.log.last_mut().flags.forced = true;
    }
}

/// Picks the candidate with the highest key; ties go to the lowest index.
/// Returns the choice and whether a tie was broken.
pub fn select_max<T: Ord>(candidates: &[usize], key: impl Fn(usize) -> T) -> Option<(usize, bool)> {
    select_by(candidates, key, |a, b| a > b)
}

/// Picks the candidate with the lowest key; ties go to the lowest index.
pub fn select_min<T: Ord>(candidates: &[usize], key: impl Fn(usize) -> T) -> Option<(usize, bool)> {
    select_by(candidates, key, |a, b| a < b)
}

fn select_by<T: Ord>(
    candidates: &[usize],
    key: impl Fn(usize) -> T,
    better: impl Fn(&T, &T) -> bool,
) -> Option<(usize, bool)> {
    let mut best: Option<(usize, T, bool)> = None;
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    for c in sorted {
        let k = key(c);
        best = match best {
            None => Some((c, k, false)),
            Some((b, bk, tied)) => {
                if better(&k, &bk) {
                    Some((c, k, false))
                } else if k == bk {
                    Some((b, bk, true))
                } else {
                    Some((b, bk, tied))
                }
            }
        };
    }
    best.map(|(c, _, tied)| (c, tied))
}
