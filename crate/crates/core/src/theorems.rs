//! Closed-form optimal code lengths and the own-transmission lower bound.
//!
//! Validity here is zero-error: every construction in this crate is a
//! deterministic linear code, so the vanishing-error slack used in the
//! information-theoretic converse has no runtime counterpart.

use std::fmt;

use num_integer::binomial;
use num_rational::Ratio;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{InstanceKind, ProblemInstance, RationalLength};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    ExactOptimum,
    LowerBound,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    /// Consecutive S, all users hold exactly m - t messages.
    ConsecutiveNonPliable,
    /// Consecutive S otherwise: min{smax + t, m - smin}.
    Consecutive,
    /// Complement-consecutive S: min{m, |S| + 2t - 2}.
    Complement,
    /// n t / (n - 1) from a user's own rows carrying it nothing.
    OwnTransmission,
}

impl fmt::Display for BoundSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundSource::ConsecutiveNonPliable => "consecutive, smin = smax = m - t",
            BoundSource::Consecutive => "consecutive",
            BoundSource::Complement => "complement-consecutive",
            BoundSource::OwnTransmission => "own-transmission bound",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LengthBound {
    pub value: RationalLength,
    pub kind: BoundKind,
    pub source: BoundSource,
    /// Set when an exact optimum does not exceed t, which no decentralized
    /// code can achieve; such values need manual review.
    pub needs_review: bool,
}

fn check_consecutive(m: usize, t: usize, smin: usize, smax: usize) -> Result<()> {
    if t == 0 || t > m || smin > smax || smax > m - t {
        return Err(Error::usage(format!(
            "consecutive bound needs t >= 1 and 0 <= smin <= smax <= m - t, got m={m} t={t} smin={smin} smax={smax}"
        )));
    }
    if smax == 0 {
        return Err(Error::usage("S = {0} is unsolvable"));
    }
    Ok(())
}

/// Optimal decentralized length for S = [smin..smax].
pub fn optimal_length_consecutive(m: usize, t: usize, smin: usize, smax: usize) -> Result<RationalLength> {
    check_consecutive(m, t, smin, smax)?;
    if smin == m - t && smax == m - t {
        let n = binomial(m as u64, (m - t) as u64);
        return Ok(Ratio::new(t as u64 * n, n - 1).into());
    }
    Ok(RationalLength::integer((smax + t).min(m - smin) as u64))
}

/// Optimal decentralized length for S = [0..m-t] minus [smin..smax].
pub fn optimal_length_complement(m: usize, t: usize, smin: usize, smax: usize) -> Result<RationalLength> {
    if t == 0 || t > m || !(0 < smin && smin <= smax && smax < m - t) {
        return Err(Error::usage(format!(
            "complement bound needs t >= 1 and 0 < smin <= smax < m - t, got m={m} t={t} smin={smin} smax={smax}"
        )));
    }
    let s_count = (m - t + 1) - (smax - smin + 1);
    Ok(RationalLength::integer(m.min(s_count + 2 * t - 2) as u64))
}

/// t n / (n - 1) with n = C(m, s), s = m - t.
pub fn fano_lower_bound(m: usize, t: usize, s: usize) -> Result<RationalLength> {
    if t == 0 || t > m || s != m - t {
        return Err(Error::usage(format!("bound needs s = m - t, got m={m} t={t} s={s}")));
    }
    let n = binomial(m as u64, s as u64);
    if n < 2 {
        return Err(Error::Domain(format!("n = C({m},{s}) = {n}: a single user cannot be served")));
    }
    Ok(Ratio::new(t as u64 * n, n - 1).into())
}

/// Centralized optimum for the same parameters.
pub fn centralized_length(instance: &ProblemInstance) -> Result<RationalLength> {
    let (m, t) = (instance.m(), instance.t());
    match instance.kind() {
        InstanceKind::Consecutive { smin, smax } => {
            check_consecutive(m, t, smin, smax)?;
            Ok(RationalLength::integer((smax + t).min(m - smin) as u64))
        }
        InstanceKind::ComplementConsecutive { smin, smax } => optimal_length_complement(m, t, smin, smax),
        InstanceKind::Other => Err(no_closed_form(instance)),
    }
}

/// Decentralized optimum with provenance.
pub fn optimal_length(instance: &ProblemInstance) -> Result<LengthBound> {
    let (m, t) = (instance.m(), instance.t());
    let (value, source) = match instance.kind() {
        InstanceKind::Consecutive { smin, smax } => {
            let source = if smin == m - t && smax == m - t {
                BoundSource::ConsecutiveNonPliable
            } else {
                BoundSource::Consecutive
            };
            (optimal_length_consecutive(m, t, smin, smax)?, source)
        }
        InstanceKind::ComplementConsecutive { smin, smax } => {
            (optimal_length_complement(m, t, smin, smax)?, BoundSource::Complement)
        }
        InstanceKind::Other => return Err(no_closed_form(instance)),
    };
    Ok(LengthBound {
        value,
        kind: BoundKind::ExactOptimum,
        source,
        needs_review: value.ratio() <= Ratio::from_integer(t as u64),
    })
}

fn no_closed_form(instance: &ProblemInstance) -> Error {
    Error::usage(format!("no closed form in scope for {instance}: S is neither consecutive nor complement-consecutive"))
}
