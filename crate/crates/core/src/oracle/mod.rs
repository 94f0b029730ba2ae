//! Exhaustive search over small spaces of decentralized linear codes.
//!
//! Two engines answer "is there a valid code with k sub-slots":
//!
//! * [`Strategy::Naive`] walks every transmitter and every formable
//!   coefficient vector row by row.
//! * [`Strategy::Closure`] walks distinct row spaces, which is equivalent
//!   for existence and far smaller.
//!
//! Both refuse to start when their search size exceeds the ceiling.
//! [`certified_minimum`] can additionally settle a split factor by a rank
//! counting certificate plus a sampled witness when asked to.

mod closure;
mod naive;
mod packed;
mod sampling;

use num_integer::binomial;
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gf::{Field, FieldSpec};
use crate::linalg::Matrix;
use crate::model::{DecentralizedCode, KnowledgeMode, ProblemInstance, RationalLength, Schedule};

use packed::Ctx;

pub const DEFAULT_CEILING: f64 = 1e8;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SearchSpace {
    pub instance: ProblemInstance,
    pub field: FieldSpec,
    pub beta: usize,
    pub total_subslots: usize,
    pub knowledge_mode: KnowledgeMode,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    #[default]
    Closure,
    Naive,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SearchOptions {
    /// Largest search size attempted, in candidate evaluations.
    pub ceiling: f64,
    pub strategy: Strategy,
    /// Pin the first row's transmitter when all users share one size
    /// (naive strategy only).
    pub symmetry_pruning: bool,
    /// Let [`certified_minimum`] settle over-ceiling split factors with the
    /// rank-budget certificate and sampled witnesses (static mode only).
    pub rank_budget: bool,
    pub witness_trials: u32,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            ceiling: DEFAULT_CEILING,
            strategy: Strategy::Closure,
            symmetry_pruning: true,
            rank_budget: false,
            witness_trials: 0,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub enum Verdict {
    Found(DecentralizedCode),
    /// Every candidate was checked and none is valid.
    Exhausted,
}

#[derive(Clone, Debug)]
pub struct SearchReport {
    pub verdict: Verdict,
    pub search_size: f64,
    pub evaluated: u64,
    pub strategy: Strategy,
}

impl SearchReport {
    pub fn exists(&self) -> bool {
        matches!(self.verdict, Verdict::Found(_))
    }

    pub fn witness(&self) -> Option<&DecentralizedCode> {
        match &self.verdict {
            Verdict::Found(code) => Some(code),
            Verdict::Exhausted => None,
        }
    }
}

fn pins_first_row(instance: &ProblemInstance, options: &SearchOptions) -> bool {
    options.symmetry_pruning && instance.sizes().len() == 1
}

/// Gaussian binomial [n choose d]_q as a float.
fn gaussian_binomial(n: usize, d: usize, q: f64) -> f64 {
    (0..d).map(|i| (q.powi((n - i) as i32) - 1.0) / (q.powi((i + 1) as i32) - 1.0)).product()
}

/// Candidate evaluations the chosen strategy would perform in the worst case.
pub fn search_size(space: &SearchSpace, options: &SearchOptions) -> f64 {
    let q = space.field.size() as f64;
    let m = space.instance.m();
    let n_coords = m * space.beta;
    let k = space.total_subslots;
    let sizes: Vec<usize> = space.instance.sizes().iter().copied().collect();
    let per_size = |s: usize| binomial(m as u64, s as u64) as f64;
    let sequential = space.knowledge_mode == KnowledgeMode::Sequential;
    match options.strategy {
        Strategy::Naive => {
            let row: f64 = if sequential {
                space.instance.user_count() as f64 * q.powi(n_coords as i32)
            } else {
                sizes.iter().map(|&s| per_size(s) * q.powi((s * space.beta) as i32)).sum()
            };
            if k == 0 {
                return 1.0;
            }
            let first = if pins_first_row(&space.instance, options) {
                q.powi((sizes[0] * space.beta) as i32)
            } else {
                row
            };
            first * row.powi(k as i32 - 1)
        }
        Strategy::Closure => {
            let c: f64 = if sequential {
                (q.powi(n_coords as i32) - 1.0) / (q - 1.0)
            } else {
                // distinct projective vectors whose message support fits
                // inside some side-information set, i.e. has at most smax messages
                let smax = sizes.last().copied().unwrap_or(0);
                let per_message = q.powi(space.beta as i32) - 1.0;
                (1..=smax).map(|j| per_size(j) * per_message.powi(j as i32)).sum::<f64>() / (q - 1.0)
            };
            1.0 + (0..k.min(n_coords))
                .map(|d| gaussian_binomial(n_coords, d, q).min(c.powi(d as i32)) * c)
                .sum::<f64>()
        }
    }
}

fn context(space: &SearchSpace) -> Result<Ctx> {
    Ctx::new(&space.instance, Field::new(space.field), space.beta)
}

fn build_code(ctx: &Ctx, space: &SearchSpace, rows: &[(u64, usize)]) -> Result<DecentralizedCode> {
    let mut matrix_rows: Vec<Vec<u16>> = rows.iter().map(|&(v, _)| ctx.packed.unpack(v)).collect();
    let mut senders: Vec<usize> = rows.iter().map(|&(_, s)| s).collect();
    // a shorter valid code pads to the requested length with zero rows
    matrix_rows.resize(space.total_subslots.max(rows.len()), vec![0; ctx.coords()]);
    senders.resize(matrix_rows.len(), 0);
    let generator = Matrix::from_rows(Field::new(space.field), ctx.coords(), &matrix_rows)?;
    DecentralizedCode::new(
        space.instance.clone(),
        space.beta,
        generator,
        Schedule::in_order(&senders, space.knowledge_mode),
    )
}

/// Searches the whole space, returning a witness or an exhaustion verdict.
pub fn exists_valid_code(space: &SearchSpace, options: &SearchOptions) -> Result<SearchReport> {
    let size = search_size(space, options);
    if size > options.ceiling {
        return Err(Error::SearchTooLarge { size, ceiling: options.ceiling });
    }
    let ctx = context(space)?;
    let sequential = space.knowledge_mode == KnowledgeMode::Sequential;
    let (rows, evaluated) = match options.strategy {
        Strategy::Closure => {
            let out = closure::search(&ctx, space.total_subslots, sequential);
            (out.rows, out.evaluated)
        }
        Strategy::Naive => {
            let pin = pins_first_row(&space.instance, options);
            let out = naive::search(&ctx, space.total_subslots, sequential, pin);
            (out.rows, out.evaluated)
        }
    };
    let verdict = match rows {
        Some(rows) => Verdict::Found(build_code(&ctx, space, &rows)?),
        None => Verdict::Exhausted,
    };
    Ok(SearchReport { verdict, search_size: size, evaluated, strategy: options.strategy })
}

/// How the least sub-slot count for one split factor was established.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case", tag = "method")]
pub enum Settlement {
    /// All counts up to `searched_up_to` were searched exhaustively.
    Exhaustive,
    /// Counts below `least_subslots` fail the rank budget and a sampled
    /// witness exists at `least_subslots`.
    RankBudget,
    /// Only partial information: no code below `lower`, and a witness at
    /// `least_subslots` if present.
    Unresolved { lower: usize },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BetaOutcome {
    pub beta: usize,
    /// Largest count that could still improve on smaller split factors.
    pub searched_up_to: usize,
    /// Least count admitting a valid code, if one is at most `searched_up_to`.
    pub least_subslots: Option<usize>,
    pub settlement: Settlement,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertifiedMinimum {
    pub value: RationalLength,
    pub beta: usize,
    pub subslots: usize,
    /// Some split factor was not settled, so `value` only bounds the
    /// minimum from above.
    pub upper_bound_only: bool,
    pub per_beta: Vec<BetaOutcome>,
    pub witness: DecentralizedCode,
}

/// Every message sent once by its first holder.
fn uncoded_code(instance: &ProblemInstance, field: FieldSpec, beta: usize) -> Result<DecentralizedCode> {
    let m = instance.m();
    let users = instance.users();
    let mut rows = Vec::with_capacity(m * beta);
    let mut senders = Vec::with_capacity(m * beta);
    for j in 0..m {
        let holder = users
            .iter()
            .find(|u| u.knows(j))
            .ok_or_else(|| Error::usage(format!("no user holds message {j}")))?;
        for i in 0..beta {
            let mut row = vec![0; m * beta];
            row[j * beta + i] = 1;
            rows.push(row);
            senders.push(holder.id);
        }
    }
    let generator = Matrix::from_rows(Field::new(field), m * beta, &rows)?;
    DecentralizedCode::new(instance.clone(), beta, generator, Schedule::in_order(&senders, KnowledgeMode::Static))
}

/// Least normalized length over split factors 1..=beta_max.
///
/// For each beta only counts k with k / beta below the best value so far
/// are examined; sending every message uncoded bounds the first one.
pub fn certified_minimum(
    instance: &ProblemInstance,
    field: FieldSpec,
    beta_max: usize,
    mode: KnowledgeMode,
    options: &SearchOptions,
) -> Result<CertifiedMinimum> {
    if beta_max == 0 {
        return Err(Error::usage("beta_max must be at least 1"));
    }
    let m = instance.m() as u64;
    let mut best = Ratio::from_integer(m);
    let mut best_code = uncoded_code(instance, field, 1)?;
    let mut upper_bound_only = false;
    let mut per_beta = Vec::with_capacity(beta_max);

    for beta in 1..=beta_max {
        let improving = (best * Ratio::from_integer(beta as u64)).ceil().to_integer() as usize - 1;
        let space = |k: usize| SearchSpace {
            instance: instance.clone(),
            field,
            beta,
            total_subslots: k,
            knowledge_mode: mode,
        };
        let outcome = settle_beta(instance, beta, improving, &space, mode, options)?;
        if let (Some(k), Some(code)) = (outcome.0.least_subslots, outcome.1) {
            let value = Ratio::new(k as u64, beta as u64);
            if value < best {
                best = value;
                best_code = code;
            }
        }
        if matches!(outcome.0.settlement, Settlement::Unresolved { .. }) {
            upper_bound_only = true;
        }
        per_beta.push(outcome.0);
    }

    Ok(CertifiedMinimum {
        value: best.into(),
        beta: best_code.beta(),
        subslots: best_code.generator().rows(),
        upper_bound_only,
        per_beta,
        witness: best_code,
    })
}

fn settle_beta(
    instance: &ProblemInstance,
    beta: usize,
    improving: usize,
    space: &dyn Fn(usize) -> SearchSpace,
    mode: KnowledgeMode,
    options: &SearchOptions,
) -> Result<(BetaOutcome, Option<DecentralizedCode>)> {
    let outcome = |least: Option<usize>, settlement| BetaOutcome {
        beta,
        searched_up_to: improving,
        least_subslots: least,
        settlement,
    };
    if improving == 0 {
        return Ok((outcome(None, Settlement::Exhaustive), None));
    }

    let exhaustive = match options.strategy {
        Strategy::Closure => exists_valid_code(&space(improving), options).map(|report| {
            report.witness().map(|code| {
                let used = trailing_nonzero_rows(code);
                (used, trim(code, used))
            })
        }),
        Strategy::Naive => least_by_bisection(improving, space, options),
    };
    match exhaustive {
        Ok(Some((k, code))) => Ok((outcome(Some(k), Settlement::Exhaustive), Some(code))),
        Ok(None) => Ok((outcome(None, Settlement::Exhaustive), None)),
        Err(Error::SearchTooLarge { .. }) => {
            if !(options.rank_budget && mode == KnowledgeMode::Static) {
                return Ok((outcome(None, Settlement::Unresolved { lower: 1 }), None));
            }
            let ctx = context(&space(improving))?;
            let floor = sampling::rank_budget_floor(ctx.users.len(), instance.t(), beta);
            let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
            for k in floor..=improving {
                if let Some(rows) = sampling::sample_witness(&ctx, k, options.witness_trials, &mut rng) {
                    let code = build_code(&ctx, &space(k), &rows)?;
                    let settlement =
                        if k == floor { Settlement::RankBudget } else { Settlement::Unresolved { lower: floor } };
                    return Ok((outcome(Some(k), settlement), Some(code)));
                }
            }
            let settlement = if floor > improving {
                Settlement::RankBudget
            } else {
                Settlement::Unresolved { lower: floor }
            };
            Ok((outcome(None, settlement), None))
        }
        Err(e) => Err(e),
    }
}

/// Rows up to and including the last nonzero one.
fn trailing_nonzero_rows(code: &DecentralizedCode) -> usize {
    let g = code.generator();
    (0..g.rows()).rev().find(|&r| g.row(r).iter().any(|&x| x != 0)).map_or(0, |r| r + 1)
}

fn trim(code: &DecentralizedCode, rows: usize) -> DecentralizedCode {
    let g = code.generator().row_submatrix(&(0..rows).collect::<Vec<_>>()).expect("prefix of the generator");
    let senders: Vec<usize> = code.schedule().entries()[..rows].iter().map(|e| e.user).collect();
    DecentralizedCode::new(code.instance().clone(), code.beta(), g, Schedule::in_order(&senders, code.schedule().mode()))
        .expect("prefix of a valid code")
}

/// Least k in 1..=hi with a valid code, by bisection on the monotone
/// existence predicate.
fn least_by_bisection(
    hi: usize,
    space: &dyn Fn(usize) -> SearchSpace,
    options: &SearchOptions,
) -> Result<Option<(usize, DecentralizedCode)>> {
    let top = exists_valid_code(&space(hi), options)?;
    let Some(mut witness) = top.witness().cloned() else {
        return Ok(None);
    };
    let (mut lo, mut hi) = (1, hi);
    while lo < hi {
        let mid = (lo + hi) / 2;
        match exists_valid_code(&space(mid), options)?.verdict {
            Verdict::Found(code) => {
                hi = mid;
                witness = code;
            }
            Verdict::Exhausted => lo = mid + 1,
        }
    }
    Ok(Some((hi, witness)))
}
