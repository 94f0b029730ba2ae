//! Constructions that reach the closed-form optimum in each regime.
//!
//! | instance                              | scheme                  |
//! |---------------------------------------|-------------------------|
//! | consecutive, smax + t <= m - smin     | [`scheme_uncoded`]      |
//! | consecutive, t < m - smin < smax + t  | [`scheme_sparse_mds`]   |
//! | consecutive, smin = smax = m - t      | [`scheme_split_vector`] |
//! | complement-consecutive                | [`scheme_complement`]   |
//!
//! Randomized pieces draw from a ChaCha8 stream seeded by
//! [`ConstructOptions::seed`], so equal options give bit-identical codes.

mod pattern;

use itertools::Itertools;
use num_integer::{binomial, Integer};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use pattern::{build_zero_pattern, check_mds_condition, sample_sparse_mds, MdsViolation, ZeroPattern};

use crate::error::{Error, Result};
use crate::gf::{Field, FieldSpec};
use crate::linalg::Matrix;
use crate::model::{DecentralizedCode, InstanceKind, KnowledgeMode, ProblemInstance, Schedule, User};

pub const DEFAULT_RETRY_BUDGET: u32 = 1000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstructOptions {
    /// Overrides [`default_field`].
    pub field: Option<FieldSpec>,
    pub seed: u64,
    pub retry_budget: u32,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self { field: None, seed: 0, retry_budget: DEFAULT_RETRY_BUDGET }
    }
}

impl ConstructOptions {
    fn resolve_field(&self, instance: &ProblemInstance) -> Result<Field> {
        let spec = match self.field {
            Some(spec) => spec,
            None => default_field(instance)?,
        };
        Ok(Field::new(spec))
    }
}

/// Smallest binary field with at least max(4, m - smin + smax + t - 1)
/// elements; complement instances also cover the sparse-MDS sub-problem
/// serving the large-side-information users.
pub fn default_field(instance: &ProblemInstance) -> Result<FieldSpec> {
    let (m, t) = (instance.m(), instance.t());
    let bound = match instance.kind() {
        InstanceKind::Consecutive { smin, smax } => m - smin + smax + t - 1,
        InstanceKind::ComplementConsecutive { smin, smax } => (m - smin + smax + t - 1).max(2 * m - smax - 2),
        InstanceKind::Other => return Err(out_of_scope(instance)),
    };
    FieldSpec::at_least(bound.max(4) as u64)
}

fn out_of_scope(instance: &ProblemInstance) -> Error {
    Error::usage(format!("no construction for {instance}: S is neither consecutive nor complement-consecutive"))
}

/// Picks the scheme for the instance's regime.
pub fn synthesize(instance: &ProblemInstance, options: &ConstructOptions) -> Result<DecentralizedCode> {
    let (m, t) = (instance.m(), instance.t());
    match instance.kind() {
        InstanceKind::Consecutive { smin, smax } if smin == m - t && smax == m - t => {
            scheme_split_vector(instance, options)
        }
        InstanceKind::Consecutive { smin, smax } if smax + t <= m - smin => scheme_uncoded(instance, options),
        InstanceKind::Consecutive { .. } => scheme_sparse_mds(instance, options),
        InstanceKind::ComplementConsecutive { .. } => scheme_complement(instance, options),
        InstanceKind::Other => Err(out_of_scope(instance)),
    }
}

fn consecutive_params(instance: &ProblemInstance) -> Result<(usize, usize, usize, usize)> {
    match instance.kind() {
        InstanceKind::Consecutive { smin, smax } => Ok((instance.m(), instance.t(), smin, smax)),
        _ => Err(Error::usage(format!("{instance} is not consecutive"))),
    }
}

fn unit_row(m: usize, j: usize) -> Vec<u16> {
    let mut row = vec![0; m];
    row[j] = 1;
    row
}

/// First user (in id order) holding `message`.
fn first_holder(users: &[User], message: usize) -> Result<usize> {
    users
        .iter()
        .find(|u| u.knows(message))
        .map(|u| u.id)
        .ok_or_else(|| Error::usage(format!("no user holds message {message}")))
}

/// Unit rows for `messages`, each sent by its first holder.
fn uncoded_rows(users: &[User], m: usize, messages: impl IntoIterator<Item = usize>) -> Result<(Vec<Vec<u16>>, Vec<usize>)> {
    let mut rows = Vec::new();
    let mut senders = Vec::new();
    for j in messages {
        rows.push(unit_row(m, j));
        senders.push(first_holder(users, j)?);
    }
    Ok((rows, senders))
}

fn assemble(
    instance: &ProblemInstance,
    field: Field,
    beta: usize,
    rows: &[Vec<u16>],
    senders: &[usize],
    mode: KnowledgeMode,
) -> Result<DecentralizedCode> {
    let generator = Matrix::from_rows(field, instance.m() * beta, rows)?;
    DecentralizedCode::new(instance.clone(), beta, generator, Schedule::in_order(senders, mode))
}

/// Sends messages 0..smax+t one per row.
pub fn scheme_uncoded(instance: &ProblemInstance, options: &ConstructOptions) -> Result<DecentralizedCode> {
    let (m, t, smin, smax) = consecutive_params(instance)?;
    if smax + t > m - smin {
        return Err(Error::usage(format!("uncoded scheme needs smax + t <= m - smin for {instance}")));
    }
    let field = options.resolve_field(instance)?;
    let (rows, senders) = uncoded_rows(&instance.users(), m, 0..smax + t)?;
    assemble(instance, field, 1, &rows, &senders, KnowledgeMode::Static)
}

/// Rows [C | 0] over all m columns for the sub-population with sizes in
/// [smin..smax]; C follows the cyclic zero pattern. Each row goes to the
/// size-smax user whose side information equals its support.
fn sparse_mds_rows<R: Rng>(
    users: &[User],
    m: usize,
    t: usize,
    smin: usize,
    smax: usize,
    field: &Field,
    rng: &mut R,
    retry_budget: u32,
) -> Result<(Vec<Vec<u16>>, Vec<usize>)> {
    let pattern = build_zero_pattern(m, t, smin, smax)?;
    let ell = m - smin;
    let c = sample_sparse_mds(&pattern, ell, field, rng, retry_budget)?;
    let mut rows = Vec::with_capacity(ell);
    let mut senders = Vec::with_capacity(ell);
    for i in 0..ell {
        let mut row = c.row(i).to_vec();
        row.resize(m, 0);
        let support = pattern.support(i);
        let sender = users
            .iter()
            .find(|u| u.side_info.len() == smax && support.iter().all(|j| u.knows(*j)))
            .ok_or_else(|| Error::usage(format!("no size-{smax} user covers support {support:?}")))?;
        rows.push(row);
        senders.push(sender.id);
    }
    Ok((rows, senders))
}

/// m - smin rows from a sparse MDS generator; needs t < m - smin < smax + t.
pub fn scheme_sparse_mds(instance: &ProblemInstance, options: &ConstructOptions) -> Result<DecentralizedCode> {
    let (m, t, smin, smax) = consecutive_params(instance)?;
    if !(t < m - smin && m - smin < smax + t) {
        return Err(Error::usage(format!("sparse MDS scheme needs t < m - smin < smax + t for {instance}")));
    }
    let field = options.resolve_field(instance)?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let (rows, senders) =
        sparse_mds_rows(&instance.users(), m, t, smin, smax, &field, &mut rng, options.retry_budget)?;
    assemble(instance, field, 1, &rows, &senders, KnowledgeMode::Static)
}

/// Split factor and rows per user for S = {m - t}: the smallest beta with
/// ell' = t * beta / (n - 1) integral.
pub fn split_parameters(m: usize, t: usize) -> Result<(usize, usize)> {
    if t == 0 || t >= m {
        return Err(Error::usage(format!("split scheme needs 1 <= t < m, got m={m} t={t}")));
    }
    let n = binomial(m as u64, (m - t) as u64) as usize;
    if n < 2 {
        return Err(Error::Domain("a single user cannot be served".into()));
    }
    let beta = (n - 1) / (n - 1).gcd(&t);
    Ok((beta, t * beta / (n - 1)))
}

/// Vector-linear code for smin = smax = m - t: every user sends ell' rows
/// over its own sub-messages, and the other users' rows restricted to its
/// unknown columns form a nonsingular square system.
pub fn scheme_split_vector(instance: &ProblemInstance, options: &ConstructOptions) -> Result<DecentralizedCode> {
    let (m, t, smin, smax) = consecutive_params(instance)?;
    if smin != m - t || smax != m - t {
        return Err(Error::usage(format!("split scheme needs smin = smax = m - t for {instance}")));
    }
    let (beta, per_user) = split_parameters(m, t)?;
    let field = options.resolve_field(instance)?;
    let q = field.size() as u16;
    let users = instance.users();
    let n = users.len();
    let cols = m * beta;
    let owned: Vec<Vec<usize>> = users
        .iter()
        .map(|u| u.side_info.iter().flat_map(|&j| j * beta..(j + 1) * beta).collect())
        .collect();
    let unknown: Vec<Vec<usize>> = users
        .iter()
        .map(|u| (0..m).filter(|j| !u.knows(*j)).flat_map(|j| j * beta..(j + 1) * beta).collect())
        .collect();
    let others: Vec<Vec<usize>> = (0..n)
        .map(|i| (0..n * per_user).filter(|r| r / per_user != i).collect())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut g = Matrix::zeros(field.clone(), n * per_user, cols);
    for _ in 0..options.retry_budget {
        for (i, cols_i) in owned.iter().enumerate() {
            for r in i * per_user..(i + 1) * per_user {
                for &c in cols_i {
                    g.set(r, c, rng.gen_range(1..q));
                }
            }
        }
        let decodes = |i: usize| {
            let sub = g.row_submatrix(&others[i]).and_then(|s| s.column_submatrix(&unknown[i]));
            sub.map(|s| s.rank() == t * beta).unwrap_or(false)
        };
        if (0..n).all(decodes) {
            let senders: Vec<usize> = (0..n * per_user).map(|r| r / per_user).collect();
            return DecentralizedCode::new(
                instance.clone(),
                beta,
                g,
                Schedule::in_order(&senders, KnowledgeMode::Static),
            );
        }
    }
    Err(Error::Construction {
        attempts: options.retry_budget,
        detail: format!("split code with beta={beta}, {per_user} rows per user over {}", field.spec()),
    })
}

/// Two-group scheme for S = [0..smin-1] ∪ [smax+1..m-t], falling back to
/// sending all m messages when that is no longer than |S| + 2t - 2.
pub fn scheme_complement(instance: &ProblemInstance, options: &ConstructOptions) -> Result<DecentralizedCode> {
    let InstanceKind::ComplementConsecutive { smin, smax } = instance.kind() else {
        return Err(Error::usage(format!("{instance} is not complement-consecutive")));
    };
    let (m, t) = (instance.m(), instance.t());
    let field = options.resolve_field(instance)?;
    let users = instance.users();
    let coded_length = instance.sizes().len() + 2 * t - 2;

    if m <= coded_length {
        let (rows, senders) = uncoded_rows(&users, m, 0..m)?;
        return assemble(instance, field, 1, &rows, &senders, KnowledgeMode::Static);
    }

    // Serves every user with at most smin - 1 messages.
    let step_one = smin - 1 + t;
    let (mut rows, mut senders) = uncoded_rows(&users, m, 0..step_one)?;
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);

    if step_one < smax + 1 && smax + 1 == m - t {
        // A size-(m-t) user missing only step-one messages now knows
        // everything and sends t rows of an MDS code over all m messages.
        let relay = users
            .iter()
            .find(|u| u.side_info.len() == m - t && (0..m).filter(|j| !u.knows(*j)).all(|j| j < step_one))
            .ok_or_else(|| Error::usage("no large-side-information user is covered by the first step"))?;
        let block = sample_dense_mds(t, m, &field, &mut rng, options.retry_budget)?;
        rows.extend(block.to_rows());
        senders.extend(std::iter::repeat(relay.id).take(t));
        return assemble(instance, field, 1, &rows, &senders, KnowledgeMode::Sequential);
    }

    if smax + 1 >= m - t {
        return Err(Error::usage(format!("{instance}: coded length below m requires smax + 1 < m - t")));
    }
    let (mds_rows, mds_senders) =
        sparse_mds_rows(&users, m, t, smax + 1, m - t, &field, &mut rng, options.retry_budget)?;
    rows.extend(mds_rows);
    senders.extend(mds_senders);
    assemble(instance, field, 1, &rows, &senders, KnowledgeMode::Static)
}

/// Dense k x n block whose every k-column submatrix is nonsingular.
fn sample_dense_mds<R: Rng>(k: usize, n: usize, field: &Field, rng: &mut R, retry_budget: u32) -> Result<Matrix> {
    let q = field.size() as u16;
    let mut block = Matrix::zeros(field.clone(), k, n);
    for _ in 0..retry_budget {
        for (i, j) in (0..k).cartesian_product(0..n) {
            block.set(i, j, rng.gen_range(1..q));
        }
        if block.all_square_submatrices_full_rank(k) {
            return Ok(block);
        }
    }
    Err(Error::Construction {
        attempts: retry_budget,
        detail: format!("no dense {k}x{n} MDS block over {}", field.spec()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::RationalLength;
    use crate::theorems::optimal_length;
    use crate::verify::validate;

    fn check(instance: &ProblemInstance) -> DecentralizedCode {
        let code = synthesize(instance, &ConstructOptions::default()).unwrap();
        let report = validate(&code);
        assert!(report.valid, "{instance}: {report:?}");
        assert_eq!(code.length(), optimal_length(instance).unwrap().value, "{instance}");
        code
    }

    #[test]
    fn uncoded_examples() {
        let inst = ProblemInstance::consecutive(5, 1, 1, 2).unwrap();
        let code = scheme_uncoded(&inst, &ConstructOptions::default()).unwrap();
        assert_eq!(code.generator().to_rows(), vec![unit_row(5, 0), unit_row(5, 1), unit_row(5, 2)]);
        let users = inst.users();
        for (j, e) in code.schedule().entries().iter().enumerate() {
            assert_eq!(users[e.user].side_info, [j].into_iter().collect());
        }
        check(&inst);

        let inst = ProblemInstance::consecutive(6, 2, 0, 2).unwrap();
        let code = check(&inst);
        assert_eq!(code.generator().rows(), 4);
        assert!(code.schedule().entries().iter().all(|e| !users_of(&inst)[e.user].side_info.is_empty()));

        // m = t + smax with smin = 0 is not an uncoded instance when smax + t > m
        let inst = ProblemInstance::consecutive(4, 2, 1, 2).unwrap();
        assert!(scheme_uncoded(&inst, &ConstructOptions::default()).is_err());
    }

    fn users_of(inst: &ProblemInstance) -> Vec<User> {
        inst.users()
    }

    #[test]
    fn sparse_mds_examples() {
        let inst = ProblemInstance::consecutive(4, 2, 1, 2).unwrap();
        let opts = ConstructOptions { field: Some(FieldSpec::with_default_poly(3).unwrap()), ..Default::default() };
        let code = scheme_sparse_mds(&inst, &opts).unwrap();
        assert_eq!((code.generator().rows(), code.generator().cols()), (3, 4));
        let report = validate(&code);
        assert!(report.valid);
        assert!(report.per_user.iter().all(|u| u.decodable.len() >= 2));

        let inst = ProblemInstance::consecutive(5, 2, 1, 3).unwrap();
        let code = check(&inst);
        assert_eq!(code.length(), RationalLength::integer(4));

        let inst = ProblemInstance::consecutive(5, 1, 1, 2).unwrap();
        assert!(matches!(scheme_sparse_mds(&inst, &ConstructOptions::default()), Err(Error::Usage(_))));
    }

    #[test]
    fn sparse_mds_rejects_small_field_override() {
        let inst = ProblemInstance::consecutive(4, 2, 1, 2).unwrap();
        let opts = ConstructOptions { field: Some(FieldSpec::with_default_poly(1).unwrap()), ..Default::default() };
        assert!(matches!(scheme_sparse_mds(&inst, &opts), Err(Error::Usage(_))));
    }

    #[test]
    fn split_parameters_examples() {
        assert_eq!(split_parameters(3, 1).unwrap(), (2, 1));
        assert_eq!(split_parameters(4, 2).unwrap(), (5, 2));
        assert_eq!(split_parameters(2, 1).unwrap(), (1, 1));
        assert_eq!(split_parameters(6, 3).unwrap(), (19, 3));
    }

    #[test]
    fn split_examples() {
        let code = check(&ProblemInstance::new(3, 1, [2]).unwrap());
        assert_eq!((code.beta(), code.generator().rows()), (2, 3));
        assert_eq!(code.length(), RationalLength::new(3, 2).unwrap());

        let code = check(&ProblemInstance::new(4, 2, [2]).unwrap());
        assert_eq!(code.beta(), 5);
        assert_eq!(code.length(), RationalLength::new(12, 5).unwrap());
        assert_eq!(code.schedule().rows_per_user(6), vec![2; 6]);

        let code = check(&ProblemInstance::new(2, 1, [1]).unwrap());
        assert_eq!(code.length(), RationalLength::integer(2));
    }

    #[test]
    fn complement_examples() {
        let inst = ProblemInstance::complement(6, 2, 1, 3).unwrap();
        let code = check(&inst);
        assert_eq!(code.schedule().mode(), KnowledgeMode::Sequential);
        assert_eq!(code.generator().rows(), 4);
        // relay is {2,3,4,5}
        let relay = code.schedule().entries()[3].user;
        assert_eq!(inst.users()[relay].side_info, [2, 3, 4, 5].into_iter().collect());

        let inst = ProblemInstance::complement(7, 2, 2, 3).unwrap();
        let code = check(&inst);
        assert_eq!(code.schedule().mode(), KnowledgeMode::Static);
        assert_eq!(code.length(), RationalLength::integer(6));

        // S = {0, 4}, t = 1: length 2
        check(&ProblemInstance::complement(5, 1, 1, 3).unwrap());
    }

    #[test]
    fn complement_fallback_sends_everything() {
        // m = 4, t = 2, S = {0, 2}: |S| + 2t - 2 = 4 = m
        let inst = ProblemInstance::complement(4, 2, 1, 1).unwrap();
        let code = check(&inst);
        assert_eq!(code.generator().to_rows(), (0..4).map(|j| unit_row(4, j)).collect::<Vec<_>>());
    }

    #[test]
    fn synthesis_is_deterministic_and_seed_sensitive() {
        let inst = ProblemInstance::consecutive(6, 2, 2, 3).unwrap();
        let a = synthesize(&inst, &ConstructOptions::default()).unwrap();
        let b = synthesize(&inst, &ConstructOptions::default()).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        let c = synthesize(&inst, &ConstructOptions { seed: 7, ..Default::default() }).unwrap();
        assert_ne!(a.generator(), c.generator());
    }

    #[test]
    fn exhausted_budget_reports_attempts() {
        let inst = ProblemInstance::new(4, 2, [2]).unwrap();
        let opts = ConstructOptions { retry_budget: 0, ..Default::default() };
        assert!(matches!(synthesize(&inst, &opts), Err(Error::Construction { attempts: 0, .. })));
    }

    #[test]
    fn other_kind_is_out_of_scope() {
        let inst = ProblemInstance::new(5, 1, [0, 2, 4]).unwrap();
        assert!(synthesize(&inst, &ConstructOptions::default()).is_err());
        assert!(default_field(&inst).is_err());
    }
}
