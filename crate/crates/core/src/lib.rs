//! Exact-arithmetic tabulation for ranked-ballot proportional elections.
//!
//! Four counting methods share one Phragmén seat-load engine:
//!
//! * [`irv`](methods::irv): instant runoff,
//! * [`quota_phragmen`](methods::quota_phragmen): Phragmén priorities with a
//!   fixed Droop quota deciding between election and exclusion,
//! * [`bottom_up_list`](methods::bottom_up_list): a proportional list built
//!   from the last position upward,
//! * [`top_down_list`](methods::top_down_list): a proportional list built from
//!   the first position downward, re-electing earlier positions before every
//!   exclusion.
//!
//! The [`oracle`] module enumerates solid coalitions and Droop-compliant
//! winner sets by brute force, and [`properties`] drives randomized checks of
//! the list methods against it.
//!
//! The count is generic over an exact [`Scalar`]; [`Rational`] (arbitrary
//! precision) is the default, and the aliases below fix it.
//!
//! ```
//! use phragmen::{ballots::profile_from_notation, methods::top_down_list, ProportionalList};
//!
//! let profile = profile_from_notation("60: ADCB, 51: BCDA, 45: CADB, 44: DCAB").unwrap();
//! let list: ProportionalList = top_down_list(&profile, 4).unwrap();
//! let names: Vec<&str> = list.order.iter().map(|&c| profile.name(c)).collect();
//! assert_eq!(names, ["C", "A", "B", "D"]);
//! ```

pub mod audit;
pub mod ballots;
pub mod engine;
pub mod methods;
pub mod oracle;
pub mod properties;
pub mod scalar;

pub use ballots::{parse_profile, Ballot, BallotProfile, Candidate};
pub use engine::CandidateStatus;
pub use scalar::Scalar;

/// Arbitrary-precision exact rational.
pub type Rational = num_rational::BigRational;
/// Fixed-width rational; panics on overflow.
pub type Rational64 = num_rational::Ratio<i64>;

pub type AuditLog = audit::AuditLog<Rational>;
pub type CountState<'p> = engine::CountState<'p, Rational>;
pub type SupportTally = engine::SupportTally<Rational>;
pub type ElectionResult = methods::ElectionResult<Rational>;
pub type ProportionalList = methods::ProportionalList<Rational>;
pub type RoundOutcome = methods::RoundOutcome<Rational>;
