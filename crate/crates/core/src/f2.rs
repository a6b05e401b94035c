//! Dense GF(2) linear algebra on bit vectors packed into `u32`.
//!
//! A length-`n` bit vector `(b_0, …, b_{n-1})` is packed so that position
//! `k` sits at integer bit `n-1-k`; the packed value therefore equals the
//! big-endian index of the string, and lexicographic order of bit strings
//! coincides with numeric order of packed values.

use crate::error::{Error, Result};

/// Read position `k` of a packed `n`-bit vector.
#[inline]
pub fn bit_at(v: u32, n: usize, k: usize) -> u8 {
    ((v >> (n - 1 - k)) & 1) as u8
}

/// Set position `k` of a packed `n`-bit vector to `b`.
#[inline]
pub fn with_bit(v: u32, n: usize, k: usize, b: u8) -> u32 {
    let shift = n - 1 - k;
    (v & !(1 << shift)) | ((b as u32 & 1) << shift)
}

/// Parity of the inner product of two packed vectors.
#[inline]
pub fn dot(a: u32, b: u32) -> u8 {
    ((a & b).count_ones() & 1) as u8
}

/// Remove positions `2p` and `2p+1` from a packed `n`-bit vector,
/// yielding a packed `(n-2)`-bit vector.
#[inline]
pub fn drop_pair(v: u32, n: usize, p: usize) -> u32 {
    let low_bits = n - 2 * p - 2;
    let low = v & ((1u32 << low_bits) - 1);
    let high = (v >> (low_bits + 2)) << low_bits;
    high | low
}

/// Square binary matrix acting on packed vectors: output position `r`
/// equals `dot(rows[r], input)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinMat {
    n: usize,
    rows: Vec<u32>,
}

impl BinMat {
    pub fn new(n: usize, rows: Vec<u32>) -> Result<Self> {
        if rows.len() != n {
            return Err(Error::LengthMismatch {
                expected: n,
                got: rows.len(),
            });
        }
        if n > 0 && n < 32 {
            let mask = (1u32 << n) - 1;
            if rows.iter().any(|r| r & !mask != 0) {
                return Err(Error::Parse(format!("matrix row wider than {} bits", n)));
            }
        }
        Ok(Self { n, rows })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            rows: (0..n).map(|r| 1u32 << (n - 1 - r)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[u32] {
        &self.rows
    }

    pub fn entry(&self, r: usize, c: usize) -> u8 {
        bit_at(self.rows[r], self.n, c)
    }

    #[inline]
    pub fn apply(&self, v: u32) -> u32 {
        let mut out = 0u32;
        for (r, row) in self.rows.iter().enumerate() {
            out |= (dot(*row, v) as u32) << (self.n - 1 - r);
        }
        out
    }

    /// Matrix product `self * other` (apply `other` first).
    pub fn mul(&self, other: &BinMat) -> BinMat {
        debug_assert_eq!(self.n, other.n);
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let mut acc = 0u32;
                for c in 0..self.n {
                    if bit_at(*row, self.n, c) == 1 {
                        acc ^= other.rows[c];
                    }
                }
                acc
            })
            .collect();
        BinMat { n: self.n, rows }
    }

    pub fn transpose(&self) -> BinMat {
        let rows = (0..self.n)
            .map(|r| {
                let mut acc = 0u32;
                for c in 0..self.n {
                    acc |= (self.entry(c, r) as u32) << (self.n - 1 - c);
                }
                acc
            })
            .collect();
        BinMat { n: self.n, rows }
    }

    /// Gauss-Jordan inverse over GF(2).
    pub fn inverse(&self) -> Result<BinMat> {
        let n = self.n;
        let mut a = self.rows.clone();
        let mut inv = BinMat::identity(n).rows;
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| bit_at(a[r], n, col) == 1)
                .ok_or(Error::NotInvertible)?;
            a.swap(col, pivot);
            inv.swap(col, pivot);
            for r in 0..n {
                if r != col && bit_at(a[r], n, col) == 1 {
                    a[r] ^= a[col];
                    inv[r] ^= inv[col];
                }
            }
        }
        Ok(BinMat { n, rows: inv })
    }

    /// The per-pair symplectic form: position `2p` pairs with `2p+1`.
    pub fn symplectic_form(n: usize) -> BinMat {
        debug_assert!(n % 2 == 0);
        let rows = (0..n)
            .map(|r| {
                let partner = if r % 2 == 0 { r + 1 } else { r - 1 };
                1u32 << (n - 1 - partner)
            })
            .collect();
        BinMat { n, rows }
    }

    /// Whether `self` preserves the symplectic form: `LᵀJL = J`.
    pub fn is_symplectic(&self) -> bool {
        let j = BinMat::symplectic_form(self.n);
        self.transpose().mul(&j).mul(self) == j
    }
}

/// Value of the symplectic form `ω(a, b)` on packed `n`-bit vectors.
pub fn symplectic_dot(a: u32, b: u32, n: usize) -> u8 {
    let mut acc = 0u8;
    for p in 0..n / 2 {
        acc ^= bit_at(a, n, 2 * p) & bit_at(b, n, 2 * p + 1);
        acc ^= bit_at(a, n, 2 * p + 1) & bit_at(b, n, 2 * p);
    }
    acc
}

/// Basis of a subspace of GF(2)^n kept in row-echelon form
/// (distinct leading bits, highest first).
#[derive(Debug, Clone, Default)]
pub struct F2Basis {
    vecs: Vec<u32>,
}

impl F2Basis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.vecs.len()
    }

    pub fn vectors(&self) -> &[u32] {
        &self.vecs
    }

    /// Reduce `v` against the basis; zero result means `v` is in the span.
    pub fn reduce(&self, mut v: u32) -> u32 {
        for &b in &self.vecs {
            if v != 0 && v.leading_zeros() == b.leading_zeros() {
                v ^= b;
            }
        }
        v
    }

    pub fn contains(&self, v: u32) -> bool {
        self.reduce(v) == 0
    }

    /// Insert `v` if independent; returns false when `v` was already in the span.
    pub fn insert(&mut self, v: u32) -> bool {
        let r = self.reduce(v);
        if r == 0 {
            return false;
        }
        let pos = self
            .vecs
            .iter()
            .position(|&b| b.leading_zeros() > r.leading_zeros())
            .unwrap_or(self.vecs.len());
        self.vecs.insert(pos, r);
        true
    }

    /// Basis of the orthogonal complement under the plain inner product.
    pub fn orthogonal_complement(&self, n: usize) -> F2Basis {
        let mut comp = F2Basis::new();
        for v in 0..(1u32 << n) {
            if v == 0 {
                continue;
            }
            if self.vecs.iter().all(|&b| dot(v, b) == 0) {
                comp.insert(v);
            }
            if comp.rank() == n - self.rank() {
                break;
            }
        }
        comp
    }
}

/// Build a symplectic matrix whose row `n-2` equals `phi`, so that the
/// amp bit of the last pair of the transformed vector reads off the
/// parity `⟨phi, x⟩`.
pub fn symplectic_completion(phi: u32, n: usize) -> Result<BinMat> {
    if phi == 0 {
        return Err(Error::ZeroMask);
    }
    // Build a symplectic basis of column vectors for h = gᵀ with the
    // (phi, partner) hyperbolic pair placed last.
    let project = |v: u32, pairs: &[(u32, u32)]| -> u32 {
        let mut u = v;
        for &(a, b) in pairs {
            if symplectic_dot(u, b, n) == 1 {
                u ^= a;
            }
            if symplectic_dot(u, a, n) == 1 {
                u ^= b;
            }
        }
        u
    };
    let partner = (1..1u32 << n)
        .find(|&v| symplectic_dot(phi, v, n) == 1)
        .ok_or(Error::NotSymplectic)?;
    let mut pairs: Vec<(u32, u32)> = vec![(phi, partner)];
    while pairs.len() < n / 2 {
        let a = (1..1u32 << n)
            .map(|v| project(v, &pairs))
            .find(|&u| u != 0)
            .ok_or(Error::NotSymplectic)?;
        let b = (1..1u32 << n)
            .map(|v| project(v, &pairs))
            .find(|&u| u != 0 && symplectic_dot(a, u, n) == 1)
            .ok_or(Error::NotSymplectic)?;
        pairs.push((a, b));
    }
    // Put the anchor pair last so phi lands on the last pair's amp row.
    pairs.rotate_left(1);
    // Columns of h in pair order; g = hᵀ has row n-2 equal to phi.
    let mut h_rows = vec![0u32; n];
    for (p, (a, b)) in pairs.iter().enumerate() {
        for r in 0..n {
            h_rows[r] |= (bit_at(*a, n, r) as u32) << (n - 1 - 2 * p);
            h_rows[r] |= (bit_at(*b, n, r) as u32) << (n - 1 - (2 * p + 1));
        }
    }
    let h = BinMat::new(n, h_rows)?;
    let g = h.transpose();
    if !g.is_symplectic() {
        return Err(Error::NotSymplectic);
    }
    debug_assert_eq!(g.rows()[n - 2], phi);
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn packing_round_trip() {
        let v = 0b1010u32;
        assert_eq!(bit_at(v, 4, 0), 1);
        assert_eq!(bit_at(v, 4, 1), 0);
        assert_eq!(bit_at(v, 4, 2), 1);
        assert_eq!(bit_at(v, 4, 3), 0);
        assert_eq!(with_bit(v, 4, 3, 1), 0b1011);
    }

    #[test]
    fn drop_pair_reindexes() {
        // positions (0,1,2,3,4,5) = bits 101101, drop pair 1 -> 1001
        let v = 0b101101u32;
        assert_eq!(drop_pair(v, 6, 1), 0b1001);
        assert_eq!(drop_pair(v, 6, 0), 0b1101);
        assert_eq!(drop_pair(v, 6, 2), 0b1011);
    }

    #[test]
    fn identity_and_inverse() {
        let id = BinMat::identity(4);
        assert_eq!(id.apply(0b0110), 0b0110);
        let m = BinMat::new(4, vec![0b1000, 0b0101, 0b1010, 0b0001]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), id);
        assert_eq!(inv.mul(&m), id);
    }

    #[test]
    fn singular_matrix_rejected() {
        let m = BinMat::new(2, vec![0b11, 0b11]).unwrap();
        assert!(m.inverse().is_err());
    }

    #[test]
    fn symplectic_form_is_involution() {
        let j = BinMat::symplectic_form(4);
        assert_eq!(j.mul(&j), BinMat::identity(4));
        assert!(BinMat::identity(4).is_symplectic());
    }

    #[test]
    fn basis_insert_and_span() {
        let mut b = F2Basis::new();
        assert!(b.insert(0b1010));
        assert!(b.insert(0b0110));
        assert!(!b.insert(0b1100)); // xor of the two
        assert_eq!(b.rank(), 2);
        assert!(b.contains(0b1100));
        assert!(!b.contains(0b0001));
    }

    #[test]
    fn completion_realizes_any_functional() {
        for n in [2usize, 4, 6] {
            for phi in 1..(1u32 << n) {
                let g = symplectic_completion(phi, n).unwrap();
                assert!(g.is_symplectic());
                for v in 0..(1u32 << n) {
                    let out = g.apply(v);
                    assert_eq!(bit_at(out, n, n - 2), dot(phi, v), "phi={phi:b} v={v:b}");
                }
            }
        }
    }
}
