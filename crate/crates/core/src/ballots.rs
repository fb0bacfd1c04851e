//! Candidates, weighted ranked ballots and the ballot file format.
//!
//! The file format is a subset of the BLT convention:
//!
//! ```text
//! 4 3                # candidate count, default seat count
//! 60 1 4 3 2 0       # weight, 1-based preferences, terminating 0
//! 51 2 3 4 1 0
//! 0                  # end of ballots
//! "A"
//! "B"
//! "C"
//! "D"
//! "Example"          # title
//! ```

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Candidate {
    pub index: usize,
    pub name: String,
}

/// A strict, possibly truncated, ranking of candidate indices with a
/// multiplicity.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Ballot {
    pub ranking: Vec<usize>,
    pub weight: u64,
}

impl Ballot {
    pub fn new(ranking: Vec<usize>, weight: u64) -> Self {
        Ballot { ranking, weight }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProfileError {
    #[error("profile has no candidates")]
    NoCandidates,
    #[error("candidate name at index {0} is empty")]
    EmptyName(usize),
    #[error("candidate name {0:?} contains a quote or line break")]
    BadName(String),
    #[error("candidate name {0:?} appears more than once")]
    DuplicateName(String),
    #[error("ballot {ballot} has weight zero")]
    ZeroWeight { ballot: usize },
    #[error("ballot {ballot} has an empty ranking")]
    EmptyRanking { ballot: usize },
    #[error("ballot {ballot} ranks candidate {candidate} more than once")]
    DuplicateRanking { ballot: usize, candidate: usize },
    #[error("ballot {ballot} references unknown candidate index {candidate}")]
    UnknownCandidate { ballot: usize, candidate: usize },
    #[error("candidate index {0} is out of range")]
    InvalidIndex(usize),
    #[error("candidate {0:?} appears in both profiles")]
    OverlappingNames(String),
    #[error("seat count must be at least 1")]
    ZeroSeats,
}

/// What went wrong on a line of a ballot file.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("{0}")]
    Syntax(String),
    #[error("weight must be a positive integer, got {0:?}")]
    BadWeight(String),
    #[error("fractional weight {0:?} is not supported")]
    FractionalWeight(String),
    #[error("ballot ranks no candidates")]
    EmptyBallot,
    #[error("candidate {0} ranked more than once")]
    DuplicateCandidate(usize),
    #[error("unknown candidate index {0}")]
    UnknownCandidate(usize),
    #[error(transparent)]
    Profile(#[from] ProfileError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

/// The election input: a candidate roster plus weighted rankings.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BallotProfile {
    candidates: Vec<Candidate>,
    ballots: Vec<Ballot>,
    total_weight: u64,
    seats: usize,
    title: String,
}

impl BallotProfile {
    pub fn new(
        names: Vec<String>,
        ballots: Vec<Ballot>,
        seats: usize,
        title: impl Into<String>,
    ) -> Result<Self, ProfileError> {
        if names.is_empty() {
            return Err(ProfileError::NoCandidates);
        }
        if seats == 0 {
            return Err(ProfileError::ZeroSeats);
        }
        let mut seen = BTreeSet::new();
        for (i, name) in names.iter().enumerate() {
            if name.is_empty() {
                return Err(ProfileError::EmptyName(i));
            }
            if name.contains(['"', '\n', '\r']) {
                return Err(ProfileError::BadName(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(ProfileError::DuplicateName(name.clone()));
            }
        }
        let count = names.len();
        for (b, ballot) in ballots.iter().enumerate() {
            if ballot.weight == 0 {
                return Err(ProfileError::ZeroWeight { ballot: b });
            }
            if ballot.ranking.is_empty() {
                return Err(ProfileError::EmptyRanking { ballot: b });
            }
            let mut ranked = vec![false; count];
            for &c in &ballot.ranking {
                if c >= count {
                    return Err(ProfileError::UnknownCandidate { ballot: b, candidate: c });
                }
                if std::mem::replace(&mut ranked[c], true) {
                    return Err(ProfileError::DuplicateRanking { ballot: b, candidate: c });
                }
            }
        }
        let total_weight = ballots.iter().map(|b| b.weight).sum();
        let candidates = names
            .into_iter()
            .enumerate()
            .map(|(index, name)| Candidate { index, name })
            .collect();
        Ok(BallotProfile {
            candidates,
            ballots,
            total_weight,
            seats,
            title: title.into().replace(['"', '\n', '\r'], ""),
        })
    }

    pub fn candidates(&self) -> &[Candidate] {
        &self.candidates
    }

    pub fn num_candidates(&self) -> usize {
        self.candidates.len()
    }

    pub fn name(&self, index: usize) -> &str {
        &self.candidates[index].name
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.candidates.iter().position(|c| c.name == name)
    }

    pub fn ballots(&self) -> &[Ballot] {
        &self.ballots
    }

    /// Sum of ballot weights.
    pub fn total_weight(&self) -> u64 {
        self.total_weight
    }

    /// Default seat count from the file header.
    pub fn seats(&self) -> usize {
        self.seats
    }

    pub fn title(&self) -> &str {
        &self.title
    }

    /// True when every ballot ranks all candidates, or all but one (the last
    /// preference is then implied).
    pub fn is_fully_ranked(&self) -> bool {
        let c = self.num_candidates();
        self.ballots.iter().all(|b| b.ranking.len() + 1 >= c)
    }

    pub fn with_seats(mut self, seats: usize) -> Result<Self, ProfileError> {
        if seats == 0 {
            return Err(ProfileError::ZeroSeats);
        }
        self.seats = seats;
        Ok(self)
    }

    /// Renders in the ballot file format. Parsing the output yields an equal
    /// profile.
    pub fn to_blt(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{} {}", self.num_candidates(), self.seats);
        for ballot in &self.ballots {
            let _ = write!(out, "{}", ballot.weight);
            for &c in &ballot.ranking {
                let _ = write!(out, " {}", c + 1);
            }
            out.push_str(" 0\n");
        }
        out.push_str("0\n");
        for candidate in &self.candidates {
            let _ = writeln!(out, "\"{}\"", candidate.name);
        }
        let _ = writeln!(out, "\"{}\"", self.title);
        out
    }
}

impl fmt::Display for BallotProfile {
    /// Compact notation, e.g. `60: ADCB, 51: BCDA`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let single = self.candidates.iter().all(|c| c.name.chars().count() == 1);
        for (i, ballot) in self.ballots.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{}: ", ballot.weight)?;
            for (j, &c) in ballot.ranking.iter().enumerate() {
                if j > 0 && !single {
                    f.write_str(">")?;
                }
                f.write_str(self.name(c))?;
            }
        }
        Ok(())
    }
}

/// Builds a profile from compact notation such as
/// `"60: ADCB, 51: BCDA, 45: CADB, 44: DCAB"`.
///
/// Every letter is a candidate; candidates are indexed in alphabetical order.
/// The seat count defaults to 1.
pub fn profile_from_notation(notation: &str) -> Result<BallotProfile, ParseError> {
    let err = |kind| ParseError { line: 1, kind };
    let mut parsed = Vec::new();
    let mut letters = BTreeSet::new();
    for chunk in notation.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (weight, ranking) = chunk
            .split_once(':')
            .ok_or_else(|| err(ParseErrorKind::Syntax(format!("expected `weight: ranking` in {chunk:?}"))))?;
        let weight = parse_weight(weight.trim()).map_err(err)?;
        let ranking: Vec<char> = ranking.trim().chars().filter(|c| !c.is_whitespace()).collect();
        letters.extend(ranking.iter().copied());
        parsed.push((weight, ranking));
    }
    let names: Vec<char> = letters.into_iter().collect();
    let ballots = parsed
        .into_iter()
        .map(|(weight, ranking)| {
            let ranking = ranking
                .iter()
                .map(|l| names.binary_search(l).expect("letter collected above"))
                .collect();
            Ballot::new(ranking, weight)
        })
        .collect();
    BallotProfile::new(names.iter().map(|c| c.to_string()).collect(), ballots, 1, "")
        .map_err(|e| err(e.into()))
}

fn parse_weight(token: &str) -> Result<u64, ParseErrorKind> {
    if token.contains(['.', '/']) {
        return Err(ParseErrorKind::FractionalWeight(token.to_string()));
    }
    match token.parse::<u64>() {
        Ok(w) if w > 0 => Ok(w),
        _ => Err(ParseErrorKind::BadWeight(token.to_string())),
    }
}

/// Removes everything from the first `#` outside a quoted string.
fn strip_comment(line: &str) -> &str {
    let mut quoted = false;
    for (i, ch) in line.char_indices() {
        match ch {
            '"' => quoted = !quoted,
            '#' if !quoted => return &line[..i],
            _ => {}
        }
    }
    line
}

fn parse_quoted(line: &str) -> Result<String, ParseErrorKind> {
    let inner = line
        .strip_prefix('"')
        .and_then(|s| s.strip_suffix('"'))
        .filter(|s| !s.contains('"'))
        .ok_or_else(|| ParseErrorKind::Syntax(format!("expected a quoted string, got {line:?}")))?;
    Ok(inner.to_string())
}

/// Parses a ballot file. See the module docs for the format.
pub fn parse_profile(text: &str) -> Result<BallotProfile, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, strip_comment(l).trim()))
        .filter(|(_, l)| !l.is_empty());

    let last_line = text.lines().count().max(1);
    let eof = |what: &str| ParseError {
        line: last_line,
        kind: ParseErrorKind::Syntax(format!("unexpected end of file, expected {what}")),
    };

    let (header_line, header) = lines.next().ok_or_else(|| eof("header"))?;
    let at = |line: usize| move |kind: ParseErrorKind| ParseError { line, kind };
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [count, seats] = fields[..] else {
        return Err(at(header_line)(ParseErrorKind::Syntax(
            "header must be `<candidates> <seats>`".into(),
        )));
    };
    let bad_header = |t: &str| at(header_line)(ParseErrorKind::Syntax(format!("invalid header number {t:?}")));
    let count: usize = count.parse().map_err(|_| bad_header(count))?;
    let seats: usize = seats.parse().map_err(|_| bad_header(seats))?;
    if count == 0 {
        return Err(at(header_line)(ProfileError::NoCandidates.into()));
    }
    if seats == 0 {
        return Err(at(header_line)(ProfileError::ZeroSeats.into()));
    }

    let mut ballots = Vec::new();
    loop {
        let (line_no, line) = lines.next().ok_or_else(|| eof("ballot line or `0`"))?;
        let fail = at(line_no);
        let mut tokens = line.split_whitespace();
        let first = tokens.next().expect("line is non-empty");
        if first == "0" {
            if tokens.next().is_some() {
                return Err(fail(ParseErrorKind::Syntax("end-of-ballots line must be `0`".into())));
            }
            break;
        }
        let weight = parse_weight(first).map_err(fail)?;
        let mut ranking = Vec::new();
        let mut terminated = false;
        for token in tokens.by_ref() {
            let value: usize = token
                .parse()
                .map_err(|_| fail(ParseErrorKind::Syntax(format!("invalid candidate index {token:?}"))))?;
            if value == 0 {
                terminated = true;
                break;
            }
            if value > count {
                return Err(fail(ParseErrorKind::UnknownCandidate(value)));
            }
            if ranking.contains(&(value - 1)) {
                return Err(fail(ParseErrorKind::DuplicateCandidate(value)));
            }
            ranking.push(value - 1);
        }
        if !terminated {
            return Err(fail(ParseErrorKind::Syntax("ballot line must end with 0".into())));
        }
        if tokens.next().is_some() {
            return Err(fail(ParseErrorKind::Syntax("text after terminating 0".into())));
        }
        if ranking.is_empty() {
            return Err(fail(ParseErrorKind::EmptyBallot));
        }
        ballots.push(Ballot::new(ranking, weight));
    }

    let mut names: Vec<String> = Vec::with_capacity(count);
    for _ in 0..count {
        let (line_no, line) = lines.next().ok_or_else(|| eof("candidate name"))?;
        let name = parse_quoted(line).map_err(at(line_no))?;
        if name.is_empty() {
            return Err(at(line_no)(ProfileError::EmptyName(names.len()).into()));
        }
        if names.contains(&name) {
            return Err(at(line_no)(ProfileError::DuplicateName(name).into()));
        }
        names.push(name);
    }
    let (title_line, title) = lines.next().ok_or_else(|| eof("title"))?;
    let title = parse_quoted(title).map_err(at(title_line))?;
    if let Some((line_no, _)) = lines.next() {
        return Err(at(line_no)(ParseErrorKind::Syntax("unexpected content after title".into())));
    }

    BallotProfile::new(names, ballots, seats, title).map_err(|e| at(header_line)(e.into()))
}

/// A profile with some candidates deleted from every ranking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Restriction {
    pub profile: BallotProfile,
    /// Total weight before any ballot was dropped.
    pub weight_before: u64,
    /// Total weight of the surviving ballots.
    pub weight_after: u64,
}

/// Deletes `removed` from every ranking, keeping the order of the rest.
/// Ballots left empty are dropped. Candidate indices are not renumbered.
pub fn restrict_profile(profile: &BallotProfile, removed: &BTreeSet<usize>) -> Result<Restriction, ProfileError> {
    if let Some(&bad) = removed.iter().find(|&&c| c >= profile.num_candidates()) {
        return Err(ProfileError::InvalidIndex(bad));
    }
    let ballots: Vec<Ballot> = profile
        .ballots
        .iter()
        .filter_map(|b| {
            let ranking: Vec<usize> = b.ranking.iter().copied().filter(|c| !removed.contains(c)).collect();
            (!ranking.is_empty()).then(|| Ballot::new(ranking, b.weight))
        })
        .collect();
    let weight_after = ballots.iter().map(|b| b.weight).sum();
    Ok(Restriction {
        profile: BallotProfile {
            candidates: profile.candidates.clone(),
            ballots,
            total_weight: weight_after,
            seats: profile.seats,
            title: profile.title.clone(),
        },
        weight_before: profile.total_weight,
        weight_after,
    })
}

/// Combines two elections over disjoint candidates. `a`'s candidates keep
/// their indices; `b`'s are shifted past them.
pub fn merge_profiles(a: &BallotProfile, b: &BallotProfile) -> Result<BallotProfile, ProfileError> {
    if let Some(clash) = b.candidates.iter().find(|c| a.index_of(&c.name).is_some()) {
        return Err(ProfileError::OverlappingNames(clash.name.clone()));
    }
    let offset = a.num_candidates();
    let names = a
        .candidates
        .iter()
        .chain(&b.candidates)
        .map(|c| c.name.clone())
        .collect();
    let ballots = a
        .ballots
        .iter()
        .cloned()
        .chain(b.ballots.iter().map(|ballot| {
            Ballot::new(ballot.ranking.iter().map(|c| c + offset).collect(), ballot.weight)
        }))
        .collect();
    let title = match (a.title.is_empty(), b.title.is_empty()) {
        (false, false) => format!("{} + {}", a.title, b.title),
        (false, true) => a.title.clone(),
        _ => b.title.clone(),
    };
    BallotProfile::new(names, ballots, a.seats + b.seats, title)
}
