//! Ground-truth validation of decentralized codes.
//!
//! A user decodes message d when every one of d's beta unit vectors lies in
//! the row space of the generator restricted to the user's unknown columns.
//! For linear codes this coincides with information-theoretic decodability.

use serde::{Deserialize, Serialize};

use crate::model::{DecentralizedCode, KnowledgeMode, MessageSet, RationalLength, User};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UserReport {
    pub user: usize,
    pub side_info: Vec<usize>,
    pub decodable: Vec<usize>,
    pub satisfied: bool,
    /// Lexicographically smallest t decodable messages; absent when unsatisfied.
    pub desired: Option<Vec<usize>>,
}

/// A row whose coefficients reach outside what its transmitter knows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleViolation {
    /// Position in transmission order.
    pub position: usize,
    pub row: usize,
    pub user: usize,
    /// Nonzero generator columns the transmitter could not form.
    pub columns: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub valid: bool,
    pub schedule_ok: bool,
    pub knowledge_mode: KnowledgeMode,
    pub length: RationalLength,
    pub violations: Vec<ScheduleViolation>,
    pub per_user: Vec<UserReport>,
}

impl VerificationReport {
    pub fn unsatisfied(&self) -> impl Iterator<Item = &UserReport> {
        self.per_user.iter().filter(|u| !u.satisfied)
    }
}

/// Messages outside the user's side information that it can decode from
/// the given generator rows.
fn decodable_from_rows(code: &DecentralizedCode, user: &User, rows: &[usize]) -> MessageSet {
    let m = code.instance().m();
    let beta = code.beta();
    let unknown: Vec<usize> = (0..m).filter(|j| !user.knows(*j)).collect();
    if rows.is_empty() || unknown.is_empty() {
        return MessageSet::new();
    }
    let cols = code.columns_of(&unknown);
    let restricted = code
        .generator()
        .row_submatrix(rows)
        .and_then(|g| g.column_submatrix(&cols))
        .expect("indices come from the code itself");
    let units = restricted.solve_for_unit_rows();
    // restricted column k*beta + i is sub-message i of unknown[k]
    unknown
        .iter()
        .enumerate()
        .filter(|(k, _)| (0..beta).all(|i| units.contains(&(k * beta + i))))
        .map(|(_, &d)| d)
        .collect()
}

/// Messages the user decodes from the complete codeword.
pub fn decodable_messages(code: &DecentralizedCode, user: &User) -> MessageSet {
    let all: Vec<usize> = (0..code.generator().rows()).collect();
    decodable_from_rows(code, user, &all)
}

/// What `user` may encode with when the row at schedule `position` is sent.
pub fn knowledge_before(code: &DecentralizedCode, user: &User, position: usize) -> MessageSet {
    let mut known = user.side_info.clone();
    if code.schedule().mode() == KnowledgeMode::Sequential {
        let earlier: Vec<usize> = code.schedule().entries()[..position].iter().map(|e| e.row).collect();
        known.extend(decodable_from_rows(code, user, &earlier));
    }
    known
}

/// Checks the encoding constraint for every row and every user's decoding.
pub fn validate(code: &DecentralizedCode) -> VerificationReport {
    let t = code.instance().t();
    let users = code.users();
    let generator = code.generator();

    let violations: Vec<ScheduleViolation> = code
        .schedule()
        .entries()
        .iter()
        .enumerate()
        .filter_map(|(position, entry)| {
            let sender = &users[entry.user];
            let known = knowledge_before(code, sender, position);
            let allowed = code.columns_of(&known);
            let columns: Vec<usize> =
                generator.row_support(entry.row).into_iter().filter(|c| !allowed.contains(c)).collect();
            (!columns.is_empty()).then_some(ScheduleViolation {
                position,
                row: entry.row,
                user: entry.user,
                columns,
            })
        })
        .collect();

    let per_user: Vec<UserReport> = users
        .iter()
        .map(|user| {
            let decodable: Vec<usize> = decodable_messages(code, user).into_iter().collect();
            let satisfied = decodable.len() >= t;
            UserReport {
                user: user.id,
                side_info: user.side_info.iter().copied().collect(),
                desired: satisfied.then(|| decodable[..t].to_vec()),
                decodable,
                satisfied,
            }
        })
        .collect();

    let schedule_ok = violations.is_empty();
    VerificationReport {
        valid: schedule_ok && per_user.iter().all(|u| u.satisfied),
        schedule_ok,
        knowledge_mode: code.schedule().mode(),
        length: code.length(),
        violations,
        per_user,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::Field;
    use crate::linalg::Matrix;
    use crate::model::{ProblemInstance, Schedule};

    fn gf2() -> Field {
        Field::with_bits(1).unwrap()
    }

    fn unit_code(inst: &ProblemInstance, messages: &[usize], senders: &[usize], mode: KnowledgeMode) -> DecentralizedCode {
        let m = inst.m();
        let rows: Vec<Vec<u16>> = messages
            .iter()
            .map(|&j| {
                let mut r = vec![0; m];
                r[j] = 1;
                r
            })
            .collect();
        let g = Matrix::from_rows(gf2(), m, &rows).unwrap();
        DecentralizedCode::new(inst.clone(), 1, g, Schedule::in_order(senders, mode)).unwrap()
    }

    #[test]
    fn uncoded_rows_decode_directly() {
        let inst = ProblemInstance::consecutive(5, 1, 1, 2).unwrap();
        let users = inst.users();
        // users {0},{1},{2} have ids 0,1,2
        let code = unit_code(&inst, &[0, 1, 2], &[0, 1, 2], KnowledgeMode::Static);
        let u = users.iter().find(|u| u.side_info == [3, 4].into_iter().collect()).unwrap();
        assert_eq!(decodable_messages(&code, u), [0, 1, 2].into_iter().collect());
        let report = validate(&code);
        assert!(report.valid, "{report:?}");
        let r = &report.per_user[u.id];
        assert_eq!(r.desired.as_deref(), Some(&[0][..]));
    }

    #[test]
    fn zero_rows_decode_nothing() {
        let inst = ProblemInstance::new(3, 1, [2]).unwrap();
        let code = DecentralizedCode::new(
            inst.clone(),
            1,
            Matrix::zeros(gf2(), 0, 3),
            Schedule::in_order(&[], KnowledgeMode::Static),
        )
        .unwrap();
        for u in inst.users() {
            assert!(decodable_messages(&code, &u).is_empty());
        }
        let report = validate(&code);
        assert!(!report.valid && report.schedule_ok);
    }

    #[test]
    fn reassigned_transmitter_is_a_violation() {
        let inst = ProblemInstance::consecutive(5, 1, 1, 2).unwrap();
        // message 0 sent by user {1}
        let code = unit_code(&inst, &[0, 1, 2], &[1, 1, 2], KnowledgeMode::Static);
        let report = validate(&code);
        assert!(!report.schedule_ok && !report.valid);
        assert_eq!(
            report.violations,
            vec![ScheduleViolation { position: 0, row: 0, user: 1, columns: vec![0] }]
        );
    }

    #[test]
    fn fewer_than_t_rows_cannot_satisfy() {
        let inst = ProblemInstance::consecutive(6, 3, 0, 2).unwrap();
        let code = unit_code(&inst, &[0, 1], &[1, 2], KnowledgeMode::Static);
        let report = validate(&code);
        assert!(report.unsatisfied().count() > 0);
    }

    #[test]
    fn sequential_mode_extends_knowledge() {
        // m=3, t=1, S={0,2}: user {0,1} learns 2 from row 0, then may send w0+w2.
        let inst = ProblemInstance::new(3, 1, [0, 2]).unwrap();
        let users = inst.users();
        let id = |s: &[usize]| users.iter().find(|u| u.side_info == s.iter().copied().collect()).unwrap().id;
        let g = Matrix::from_rows(gf2(), 3, &[vec![0, 0, 1], vec![1, 0, 1]]).unwrap();
        let senders = [id(&[0, 2]), id(&[0, 1])];
        let seq = DecentralizedCode::new(inst.clone(), 1, g.clone(), Schedule::in_order(&senders, KnowledgeMode::Sequential))
            .unwrap();
        assert!(validate(&seq).schedule_ok);
        let sender = &users[senders[1]];
        assert_eq!(knowledge_before(&seq, sender, 1), [0, 1, 2].into_iter().collect());
        let stat = DecentralizedCode::new(inst, 1, g, Schedule::in_order(&senders, KnowledgeMode::Static)).unwrap();
        let report = validate(&stat);
        assert_eq!(report.violations.len(), 1);
        assert_eq!(report.violations[0].columns, vec![2]);
    }

    #[test]
    fn vector_message_needs_all_sub_columns() {
        // beta = 2: user {0} sees only one sub-message of w1
        let inst = ProblemInstance::new(2, 1, [1]).unwrap();
        let g = Matrix::from_rows(gf2(), 4, &[vec![0, 0, 1, 0]]).unwrap();
        let code = DecentralizedCode::new(inst.clone(), 2, g, Schedule::in_order(&[1], KnowledgeMode::Static)).unwrap();
        let u0 = &inst.users()[0];
        assert!(decodable_messages(&code, u0).is_empty());
    }
}
