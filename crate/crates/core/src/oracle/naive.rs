//! Row-by-row enumeration: every transmitter for every row and every
//! coefficient vector that transmitter can form.

use super::packed::Ctx;

pub(crate) struct NaiveOutcome {
    pub rows: Option<Vec<(u64, usize)>>,
    pub evaluated: u64,
}

/// `pin_first` restricts the first row's transmitter to user 0, which loses
/// nothing when all users are images of each other under message relabeling.
pub(crate) fn search(ctx: &Ctx, k: usize, sequential: bool, pin_first: bool) -> NaiveOutcome {
    let mut rows = Vec::with_capacity(k);
    let mut evaluated = 0;
    let found = descend(ctx, k, sequential, pin_first, &mut rows, &mut Vec::new(), &mut evaluated);
    NaiveOutcome { rows: found.then_some(rows), evaluated }
}

fn descend(
    ctx: &Ctx,
    k: usize,
    sequential: bool,
    pin_first: bool,
    rows: &mut Vec<(u64, usize)>,
    basis: &mut Vec<u64>,
    evaluated: &mut u64,
) -> bool {
    if rows.len() == k {
        *evaluated += 1;
        return ctx.satisfies_all(basis);
    }
    let senders = if pin_first && rows.is_empty() { 1 } else { ctx.users.len() };
    for sender in 0..senders {
        let side = ctx.users[sender].side;
        let known = if sequential { side | ctx.decodable(basis, side) } else { side };
        let coords = ctx.coord_list(known);
        for v in ctx.packed.all_within(&coords) {
            let mut grown = basis.clone();
            ctx.packed.insert(&mut grown, v);
            rows.push((v, sender));
            if descend(ctx, k, sequential, pin_first, rows, &mut grown, evaluated) {
                return true;
            }
            rows.pop();
        }
    }
    false
}
