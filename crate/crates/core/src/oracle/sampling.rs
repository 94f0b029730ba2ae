//! Shortcuts for spaces beyond exhaustive reach: a counting certificate for
//! non-existence and random search for witnesses.

use rand::Rng;

use super::packed::Ctx;

/// Least k passing the transmitter rank budget under static knowledge.
///
/// A user's own rows vanish on its unknown columns, so with r_i rows sent
/// by user i the others must supply rank t * beta there: r_i <= k - t*beta.
/// Summing over the n users gives k <= n (k - t*beta).
pub(crate) fn rank_budget_floor(users: usize, t: usize, beta: usize) -> usize {
    let need = t * beta;
    (need..).find(|&k| users * (k - need) >= k).expect("n >= 2 makes the budget satisfiable")
}

/// Random static codes with k rows, sender of row r being user r mod n.
pub(crate) fn sample_witness<R: Rng>(ctx: &Ctx, k: usize, trials: u32, rng: &mut R) -> Option<Vec<(u64, usize)>> {
    let q = ctx.packed.field().size() as u64;
    let n = ctx.users.len();
    let coords: Vec<Vec<usize>> = ctx.users.iter().map(|u| ctx.coord_list(u.side)).collect();
    for _ in 0..trials {
        let rows: Vec<(u64, usize)> = (0..k)
            .map(|r| {
                let sender = r % n;
                let v = coords[sender]
                    .iter()
                    .fold(0u64, |acc, &c| acc | rng.gen_range(0..q) << (c as u32 * ctx.packed.field().bits()));
                (v, sender)
            })
            .collect();
        if ctx.code_is_valid(&rows, false) {
            return Some(rows);
        }
    }
    None
}
