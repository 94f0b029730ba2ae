//! Problem instances, users, schedules and the code artifact.
//!
//! Messages and users are 0-based. Users of a complete-S instance are
//! listed in (size, subset) lexicographic order and a user's id is its
//! position in that list.

use std::collections::BTreeSet;
use std::fmt;

use itertools::Itertools;
use num_integer::binomial;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf::{Field, FieldSpec};
use crate::linalg::Matrix;

/// Largest supported message count; the user population is exponential in m.
pub const MAX_MESSAGES: usize = 16;

pub type MessageSet = BTreeSet<usize>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InstanceKind {
    /// S = [smin..smax].
    Consecutive { smin: usize, smax: usize },
    /// S = [0..m-t] minus [smin..smax], with 0 < smin <= smax < m-t.
    ComplementConsecutive { smin: usize, smax: usize },
    Other,
}

impl InstanceKind {
    pub fn label(&self) -> &'static str {
        match self {
            InstanceKind::Consecutive { .. } => "consecutive",
            InstanceKind::ComplementConsecutive { .. } => "complement_consecutive",
            InstanceKind::Other => "other",
        }
    }

    pub fn interval(&self) -> Option<(usize, usize)> {
        match *self {
            InstanceKind::Consecutive { smin, smax }
            | InstanceKind::ComplementConsecutive { smin, smax } => Some((smin, smax)),
            InstanceKind::Other => None,
        }
    }
}

/// Classifies a side-information size set, validating it first.
pub fn classify(m: usize, t: usize, sizes: &BTreeSet<usize>) -> Result<InstanceKind> {
    validate_params(m, t, sizes)?;
    let lo = *sizes.first().expect("validated nonempty");
    let hi = *sizes.last().expect("validated nonempty");
    if hi - lo + 1 == sizes.len() {
        return Ok(InstanceKind::Consecutive { smin: lo, smax: hi });
    }
    let top = m - t;
    if sizes.contains(&0) && sizes.contains(&top) {
        let missing: Vec<usize> = (0..=top).filter(|s| !sizes.contains(s)).collect();
        let (a, b) = (missing[0], *missing.last().unwrap());
        if b - a + 1 == missing.len() {
            return Ok(InstanceKind::ComplementConsecutive { smin: a, smax: b });
        }
    }
    Ok(InstanceKind::Other)
}

fn validate_params(m: usize, t: usize, sizes: &BTreeSet<usize>) -> Result<()> {
    if m == 0 || m > MAX_MESSAGES {
        return Err(Error::usage(format!("m must be in 1..={MAX_MESSAGES}, got {m}")));
    }
    if t == 0 || t > m {
        return Err(Error::usage(format!("t must be in 1..=m, got t={t}, m={m}")));
    }
    if sizes.is_empty() {
        return Err(Error::usage("S must be nonempty"));
    }
    if let Some(&s) = sizes.iter().find(|&&s| s > m - t) {
        return Err(Error::usage(format!("side-information size {s} exceeds m - t = {}", m - t)));
    }
    // Every user needs some unknown message that another user holds. With
    // all sizes <= m - t < m that fails only when nobody holds anything.
    if sizes.iter().all(|&s| s == 0) {
        return Err(Error::usage("S = {0} is unsolvable: no user holds any message"));
    }
    Ok(())
}

/// A complete-S PICOD(t) instance with m messages.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProblemInstance {
    m: usize,
    t: usize,
    sizes: BTreeSet<usize>,
    kind: InstanceKind,
}

impl ProblemInstance {
    pub fn new(m: usize, t: usize, sizes: impl IntoIterator<Item = usize>) -> Result<Self> {
        let sizes: BTreeSet<usize> = sizes.into_iter().collect();
        let kind = classify(m, t, &sizes)?;
        Ok(Self { m, t, sizes, kind })
    }

    pub fn consecutive(m: usize, t: usize, smin: usize, smax: usize) -> Result<Self> {
        if smin > smax {
            return Err(Error::usage(format!("smin {smin} > smax {smax}")));
        }
        Self::new(m, t, smin..=smax)
    }

    pub fn complement(m: usize, t: usize, smin: usize, smax: usize) -> Result<Self> {
        if t > m || !(0 < smin && smin <= smax && smax < m - t) {
            return Err(Error::usage(format!(
                "complement-consecutive needs 0 < smin <= smax < m - t, got smin={smin}, smax={smax}, m={m}, t={t}"
            )));
        }
        Self::new(m, t, (0..=m - t).filter(|s| !(smin..=smax).contains(s)))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn sizes(&self) -> &BTreeSet<usize> {
        &self.sizes
    }

    pub fn kind(&self) -> InstanceKind {
        self.kind
    }

    pub fn user_count(&self) -> u64 {
        self.sizes.iter().map(|&s| binomial(self.m as u64, s as u64)).sum()
    }

    /// All users, ordered by (size, subset).
    pub fn users(&self) -> Vec<User> {
        self.sizes
            .iter()
            .flat_map(|&s| (0..self.m).combinations(s))
            .enumerate()
            .map(|(id, set)| User { id, side_info: set.into_iter().collect() })
            .collect()
    }
}

impl fmt::Display for ProblemInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m={} t={} S={{{}}}", self.m, self.t, self.sizes.iter().join(","))
    }
}

#[derive(Serialize, Deserialize)]
struct InstanceDocument {
    m: usize,
    t: usize,
    s: Vec<usize>,
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    smin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    smax: Option<usize>,
}

impl Serialize for ProblemInstance {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let interval = self.kind.interval();
        InstanceDocument {
            m: self.m,
            t: self.t,
            s: self.sizes.iter().copied().collect(),
            kind: self.kind.label().to_string(),
            smin: interval.map(|i| i.0),
            smax: interval.map(|i| i.1),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProblemInstance {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let doc = InstanceDocument::deserialize(deserializer)?;
        let inst = ProblemInstance::new(doc.m, doc.t, doc.s).map_err(D::Error::custom)?;
        let interval = inst.kind.interval();
        if doc.kind != inst.kind.label()
            || doc.smin.is_some_and(|v| Some(v) != interval.map(|i| i.0))
            || doc.smax.is_some_and(|v| Some(v) != interval.map(|i| i.1))
        {
            return Err(D::Error::custom(format!(
                "declared kind {} does not match S (classified as {:?})",
                doc.kind, inst.kind
            )));
        }
        Ok(inst)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct User {
    pub id: usize,
    pub side_info: MessageSet,
}

impl User {
    pub fn knows(&self, message: usize) -> bool {
        self.side_info.contains(&message)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KnowledgeMode {
    /// Transmitters encode from their original side information only.
    #[default]
    Static,
    /// Transmitters may also use messages decoded from earlier rows.
    Sequential,
}

impl fmt::Display for KnowledgeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            KnowledgeMode::Static => "static",
            KnowledgeMode::Sequential => "sequential",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub row: usize,
    pub user: usize,
}

/// Transmission order of the generator rows and who sends each.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Schedule {
    entries: Vec<ScheduleEntry>,
    mode: KnowledgeMode,
}

impl Schedule {
    pub fn new(entries: Vec<ScheduleEntry>, mode: KnowledgeMode) -> Self {
        Self { entries, mode }
    }

    /// Row i sent i-th by `users[i]`.
    pub fn in_order(users: &[usize], mode: KnowledgeMode) -> Self {
        let entries = users.iter().enumerate().map(|(row, &user)| ScheduleEntry { row, user }).collect();
        Self { entries, mode }
    }

    pub fn entries(&self) -> &[ScheduleEntry] {
        &self.entries
    }

    pub fn mode(&self) -> KnowledgeMode {
        self.mode
    }

    /// Rows sent per user, indexed by user id.
    pub fn rows_per_user(&self, users: usize) -> Vec<usize> {
        let mut counts = vec![0; users];
        for e in &self.entries {
            counts[e.user] += 1;
        }
        counts
    }
}

/// Normalized code length as an exact fraction in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RationalLength(Ratio<u64>);

impl RationalLength {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::usage("length denominator must be positive"));
        }
        Ok(Self(Ratio::new(num, den)))
    }

    pub fn integer(v: u64) -> Self {
        Self(Ratio::from_integer(v))
    }

    pub fn num(&self) -> u64 {
        *self.0.numer()
    }

    pub fn den(&self) -> u64 {
        *self.0.denom()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn ratio(&self) -> Ratio<u64> {
        self.0
    }
}

impl From<Ratio<u64>> for RationalLength {
    fn from(r: Ratio<u64>) -> Self {
        Self(r)
    }
}

impl fmt::Display for RationalLength {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.num())
        } else {
            write!(f, "{}/{}", self.num(), self.den())
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RawRational {
    num: u64,
    den: u64,
}

impl Serialize for RationalLength {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawRational { num: self.num(), den: self.den() }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for RationalLength {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawRational::deserialize(deserializer)?;
        let value = RationalLength::new(raw.num, raw.den).map_err(D::Error::custom)?;
        if value.num() != raw.num {
            return Err(D::Error::custom("length must be in lowest terms"));
        }
        Ok(value)
    }
}

/// A vector-linear decentralized code: generator over GF(2^b) with m*beta
/// columns (message j owns columns j*beta..(j+1)*beta) and a schedule.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecentralizedCode {
    instance: ProblemInstance,
    beta: usize,
    generator: Matrix,
    schedule: Schedule,
    users: Vec<User>,
}

impl DecentralizedCode {
    pub fn new(instance: ProblemInstance, beta: usize, generator: Matrix, schedule: Schedule) -> Result<Self> {
        if beta == 0 {
            return Err(Error::usage("split factor beta must be at least 1"));
        }
        if generator.cols() != instance.m() * beta {
            return Err(Error::usage(format!(
                "generator has {} columns, expected m*beta = {}",
                generator.cols(),
                instance.m() * beta
            )));
        }
        let entries = schedule.entries();
        if entries.len() != generator.rows() {
            return Err(Error::usage(format!(
                "schedule has {} entries for {} generator rows",
                entries.len(),
                generator.rows()
            )));
        }
        let mut seen = vec![false; generator.rows()];
        let n = instance.user_count() as usize;
        for e in entries {
            if e.row >= seen.len() || std::mem::replace(&mut seen[e.row], true) {
                return Err(Error::usage(format!("schedule row {} is out of range or repeated", e.row)));
            }
            if e.user >= n {
                return Err(Error::usage(format!("schedule names user {} but there are {n}", e.user)));
            }
        }
        let users = instance.users();
        Ok(Self { instance, beta, generator, schedule, users })
    }

    pub fn instance(&self) -> &ProblemInstance {
        &self.instance
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn schedule(&self) -> &Schedule {
        &self.schedule
    }

    pub fn field(&self) -> FieldSpec {
        self.generator.field().spec()
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    /// Sub-slots divided by the split factor.
    pub fn length(&self) -> RationalLength {
        RationalLength(Ratio::new(self.generator.rows() as u64, self.beta as u64))
    }

    /// Generator columns belonging to the given messages.
    pub fn columns_of<'a>(&self, messages: impl IntoIterator<Item = &'a usize>) -> Vec<usize> {
        messages.into_iter().flat_map(|&j| j * self.beta..(j + 1) * self.beta).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CodeDocument = serde_json::from_str(text)?;
        doc.try_into()
    }
}

impl Serialize for DecentralizedCode {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CodeDocument::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DecentralizedCode {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        CodeDocument::deserialize(deserializer)?.try_into().map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct CodeDocument {
    instance: ProblemInstance,
    field: FieldSpec,
    beta: usize,
    generator: Vec<Vec<u16>>,
    schedule: Vec<ScheduleEntry>,
    knowledge_mode: KnowledgeMode,
    length: RationalLength,
}

impl From<&DecentralizedCode> for CodeDocument {
    fn from(code: &DecentralizedCode) -> Self {
        CodeDocument {
            instance: code.instance.clone(),
            field: code.field(),
            beta: code.beta,
            generator: code.generator.to_rows(),
            schedule: code.schedule.entries.clone(),
            knowledge_mode: code.schedule.mode,
            length: code.length(),
        }
    }
}

impl TryFrom<CodeDocument> for DecentralizedCode {
    type Error = Error;

    fn try_from(doc: CodeDocument) -> Result<Self> {
        let cols = doc.instance.m() * doc.beta;
        let generator = Matrix::from_rows(Field::new(doc.field), cols, &doc.generator)?;
        let code = DecentralizedCode::new(
            doc.instance,
            doc.beta,
            generator,
            Schedule::new(doc.schedule, doc.knowledge_mode),
        )?;
        if code.length() != doc.length {
            return Err(Error::usage(format!(
                "declared length {} does not match {} rows / beta {}",
                doc.length,
                code.generator.rows(),
                code.beta
            )));
        }
        Ok(code)
    }
}
