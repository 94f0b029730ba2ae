//! Vectors over GF(2^b) packed into a u64, b bits per coordinate, and the
//! per-user decoding checks the search engines share.

use crate::error::{Error, Result};
use crate::gf::Field;
use crate::model::{ProblemInstance, User};

pub(crate) struct Packed {
    field: Field,
    bits: u32,
    coords: usize,
    coord_mask: u64,
}

impl Packed {
    pub fn new(field: Field, coords: usize) -> Result<Self> {
        let bits = field.bits();
        if coords as u64 * bits as u64 > 64 {
            return Err(Error::usage(format!(
                "{coords} coordinates of {bits} bits do not fit the 64-bit search representation"
            )));
        }
        Ok(Self { field, bits, coords, coord_mask: (1u64 << bits) - 1 })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn get(&self, v: u64, c: usize) -> u16 {
        ((v >> (c as u32 * self.bits)) & self.coord_mask) as u16
    }

    fn shift(&self, c: usize) -> u32 {
        c as u32 * self.bits
    }

    /// Bits covering the given coordinates.
    pub fn mask_of(&self, coords: impl IntoIterator<Item = usize>) -> u64 {
        coords.into_iter().fold(0, |acc, c| acc | self.coord_mask << self.shift(c))
    }

    pub fn scale(&self, v: u64, a: u16) -> u64 {
        match a {
            0 => 0,
            1 => v,
            _ => (0..self.coords).fold(0, |acc, c| {
                acc | (self.field.mul_raw(self.get(v, c), a) as u64) << self.shift(c)
            }),
        }
    }

    pub fn lead(&self, v: u64) -> usize {
        (v.trailing_zeros() / self.bits) as usize
    }

    /// All bits of every nonzero coordinate.
    pub fn support_mask(&self, v: u64) -> u64 {
        if self.bits == 1 {
            return v;
        }
        (0..self.coords).filter(|&c| self.get(v, c) != 0).fold(0, |acc, c| acc | self.coord_mask << self.shift(c))
    }

    #[cfg(test)]
    pub fn pack(&self, row: &[u16]) -> u64 {
        row.iter().enumerate().fold(0, |acc, (c, &x)| acc | (x as u64) << self.shift(c))
    }

    pub fn unpack(&self, v: u64) -> Vec<u16> {
        (0..self.coords).map(|c| self.get(v, c)).collect()
    }

    /// Reduces `v` against an RREF basis.
    pub fn reduce(&self, basis: &[u64], mut v: u64) -> u64 {
        for &b in basis {
            let c = self.get(v, self.lead(b));
            if c != 0 {
                v ^= self.scale(b, c);
            }
        }
        v
    }

    /// Adds `v` to a reduced basis kept sorted by pivot; false if dependent.
    pub fn insert(&self, basis: &mut Vec<u64>, v: u64) -> bool {
        let r = self.reduce(basis, v);
        if r == 0 {
            return false;
        }
        let p = self.lead(r);
        let inv = self.field.inv_raw(self.get(r, p)).expect("pivot is nonzero");
        let r = self.scale(r, inv);
        for b in basis.iter_mut() {
            let c = self.get(*b, p);
            if c != 0 {
                *b ^= self.scale(r, c);
            }
        }
        let pos = basis.partition_point(|&b| self.lead(b) < p);
        basis.insert(pos, r);
        true
    }

    /// Every nonzero vector supported on `coords` whose first nonzero entry is 1.
    pub fn projective_within(&self, coords: &[usize]) -> Vec<u64> {
        let q = self.field.size() as u64;
        let total = q.checked_pow(coords.len() as u32).expect("bounded by the search ceiling");
        let mut out = Vec::new();
        for index in 1..total {
            let mut rest = index;
            let mut v = 0u64;
            for &c in coords {
                v |= (rest % q) << self.shift(c);
                rest /= q;
            }
            if self.get(v, self.lead(v)) == 1 {
                out.push(v);
            }
        }
        out
    }

    /// Every vector supported on `coords`, zero included.
    pub fn all_within(&self, coords: &[usize]) -> impl Iterator<Item = u64> + '_ {
        let q = self.field.size() as u64;
        let total = q.checked_pow(coords.len() as u32).expect("bounded by the search ceiling");
        let coords = coords.to_vec();
        (0..total).map(move |index| {
            let mut rest = index;
            coords.iter().fold(0u64, |v, &c| {
                let x = rest % q;
                rest /= q;
                v | x << self.shift(c)
            })
        })
    }
}

/// A user seen through packed masks.
pub(crate) struct PackedUser {
    pub id: usize,
    /// Side information as a message bitmask.
    pub side: u32,
}

/// Instance data needed to test decodability of a packed row space.
pub(crate) struct Ctx {
    pub packed: Packed,
    pub m: usize,
    pub t: usize,
    pub beta: usize,
    pub users: Vec<PackedUser>,
    /// Coordinate masks per message.
    message_masks: Vec<u64>,
}

impl Ctx {
    pub fn new(instance: &ProblemInstance, field: Field, beta: usize) -> Result<Self> {
        if beta == 0 {
            return Err(Error::usage("beta must be at least 1"));
        }
        let m = instance.m();
        let packed = Packed::new(field, m * beta)?;
        let message_masks = (0..m).map(|j| packed.mask_of(j * beta..(j + 1) * beta)).collect();
        let users = instance
            .users()
            .into_iter()
            .map(|User { id, side_info }| PackedUser { id, side: side_info.iter().fold(0, |a, &j| a | 1 << j) })
            .collect();
        Ok(Self { packed, m, t: instance.t(), beta, users, message_masks })
    }

    pub fn coords(&self) -> usize {
        self.m * self.beta
    }

    /// Bit mask of the coordinates of a message set.
    pub fn coord_mask(&self, messages: u32) -> u64 {
        (0..self.m).filter(|j| messages >> j & 1 == 1).fold(0, |acc, j| acc | self.message_masks[j])
    }

    /// Coordinate indices of a message set.
    pub fn coord_list(&self, messages: u32) -> Vec<usize> {
        (0..self.m)
            .filter(|j| messages >> j & 1 == 1)
            .flat_map(|j| j * self.beta..(j + 1) * self.beta)
            .collect()
    }

    /// Messages outside `side` that are decodable from the span of `basis`.
    pub fn decodable(&self, basis: &[u64], side: u32) -> u32 {
        let all = (1u32 << self.m) - 1;
        let unknown = all & !side;
        let mask = self.coord_mask(unknown);
        let p = &self.packed;
        let mut projected: Vec<u64> = Vec::with_capacity(basis.len());
        for &b in basis {
            p.insert(&mut projected, b & mask);
        }
        let mut unit_coords = 0u64;
        for &r in &projected {
            let lead_bits = p.mask_of([p.lead(r)]);
            if r & !lead_bits == 0 {
                unit_coords |= lead_bits;
            }
        }
        (0..self.m)
            .filter(|&j| unknown >> j & 1 == 1)
            .filter(|&j| unit_coords & self.message_masks[j] == self.message_masks[j])
            .fold(0, |acc, j| acc | 1 << j)
    }

    pub fn satisfies_all(&self, basis: &[u64]) -> bool {
        self.users.iter().all(|u| self.decodable(basis, u.side).count_ones() as usize >= self.t)
    }

    /// Rows in order, checked against the sequential or static encoding
    /// rule and then for decoding.
    pub fn code_is_valid(&self, rows: &[(u64, usize)], sequential: bool) -> bool {
        let p = &self.packed;
        let mut basis = Vec::new();
        for &(v, sender) in rows {
            let side = self.users[sender].side;
            let known = if sequential { side | self.decodable(&basis, side) } else { side };
            if p.support_mask(v) & !self.coord_mask(known) != 0 {
                return false;
            }
            p.insert(&mut basis, v);
        }
        self.satisfies_all(&basis)
    }
}
