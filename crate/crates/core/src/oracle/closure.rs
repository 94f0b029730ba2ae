//! Breadth-first search over row spaces.
//!
//! Validity of a code depends only on the span of its rows and on each row
//! being formable by its transmitter, so codes with k rows exist iff some
//! subspace of dimension at most k is reachable by adding one formable
//! vector at a time and satisfies every user. Level d of the search holds
//! the distinct reachable subspaces of dimension d in reduced form.

use std::collections::{HashMap, HashSet};

use super::packed::Ctx;

struct Node {
    parent: usize,
    vector: u64,
    sender: usize,
}

pub(crate) struct ClosureOutcome {
    /// Rows and senders of the first valid code, in transmission order.
    pub rows: Option<Vec<(u64, usize)>>,
    pub evaluated: u64,
}

/// Formable vectors per sender under static knowledge, deduplicated and
/// attributed to the first user that can form them.
pub(crate) fn static_candidates(ctx: &Ctx) -> Vec<(u64, usize)> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for u in &ctx.users {
        for v in ctx.packed.projective_within(&ctx.coord_list(u.side)) {
            if seen.insert(v) {
                out.push((v, u.id));
            }
        }
    }
    out
}

/// Searches levels 0..=max_level and stops at the first valid subspace.
pub(crate) fn search(ctx: &Ctx, max_level: usize, sequential: bool) -> ClosureOutcome {
    let p = &ctx.packed;
    let fixed = (!sequential).then(|| static_candidates(ctx));
    let mut by_knowledge: HashMap<u32, Vec<u64>> = HashMap::new();

    let mut nodes = vec![Node { parent: usize::MAX, vector: 0, sender: 0 }];
    let mut bases: Vec<Vec<u64>> = vec![Vec::new()];
    let mut seen: HashSet<Vec<u64>> = HashSet::from([Vec::new()]);
    let mut evaluated = 1u64;
    if ctx.satisfies_all(&[]) {
        return ClosureOutcome { rows: Some(Vec::new()), evaluated };
    }

    let mut level = vec![0usize];
    for _ in 0..max_level {
        let mut next = Vec::new();
        for &idx in &level {
            let basis = bases[idx].clone();
            let owned: Vec<(u64, usize)>;
            let candidates: &[(u64, usize)] = match &fixed {
                Some(c) => c,
                None => {
                    owned = ctx
                    .users
                    .iter()
                    .flat_map(|u| {
                        let known = u.side | ctx.decodable(&basis, u.side);
                        let list = by_knowledge
                            .entry(known)
                            .or_insert_with(|| p.projective_within(&ctx.coord_list(known)))
                            .clone();
                        list.into_iter().map(move |v| (v, u.id))
                    })
                    .collect();
                    &owned
                }
            };
            for &(v, sender) in candidates {
                let mut grown = basis.clone();
                if !p.insert(&mut grown, v) || seen.contains(&grown) {
                    continue;
                }
                evaluated += 1;
                seen.insert(grown.clone());
                nodes.push(Node { parent: idx, vector: v, sender });
                bases.push(grown);
                let child = nodes.len() - 1;
                if ctx.satisfies_all(&bases[child]) {
                    return ClosureOutcome { rows: Some(path(&nodes, child)), evaluated };
                }
                next.push(child);
            }
        }
        // Parent bases are needed only through their nodes from here on.
        for &idx in &level {
            bases[idx] = Vec::new();
        }
        level = next;
        if level.is_empty() {
            break;
        }
    }
    ClosureOutcome { rows: None, evaluated }
}

fn path(nodes: &[Node], mut idx: usize) -> Vec<(u64, usize)> {
    let mut rows = Vec::new();
    while idx != 0 {
        rows.push((nodes[idx].vector, nodes[idx].sender));
        idx = nodes[idx].parent;
    }
    rows.reverse();
    rows
}
