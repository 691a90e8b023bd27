//! Small bit-packed GF(2) matrices (dimension <= 16, used with n <= 8).
//!
//! Row `r` is a bitmask; bit `c` of `rows[r]` is the entry in row `r`,
//! column `c`. Vectors are bitmasks with the same convention.

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Gf2Matrix {
    pub size: usize,
    pub rows: Vec<u16>,
}

impl Gf2Matrix {
    pub fn identity(size: usize) -> Self {
        Self { size, rows: (0..size).map(|r| 1 << r).collect() }
    }

    pub fn from_rows(rows: Vec<u16>) -> Self {
        Self { size: rows.len(), rows }
    }

    pub fn get(&self, r: usize, c: usize) -> u8 {
        (self.rows[r] >> c & 1) as u8
    }

    /// Matrix-vector product `A * v` with `v` as a column bitmask.
    pub fn apply(&self, v: u16) -> u16 {
        let mut out = 0;
        for (r, &row) in self.rows.iter().enumerate() {
            out |= (((row & v).count_ones() & 1) as u16) << r;
        }
        out
    }

    /// Matrix product `self * other`.
    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.size, other.size);
        let mut rows = vec![0u16; self.size];
        for (r, out) in rows.iter_mut().enumerate() {
            for c in 0..self.size {
                let mut bit = 0;
                for k in 0..self.size {
                    bit ^= self.get(r, k) & other.get(k, c);
                }
                *out |= (bit as u16) << c;
            }
        }
        Self { size: self.size, rows }
    }

    pub fn is_invertible(&self) -> bool {
        let mut rows = self.rows.clone();
        for c in 0..self.size {
            let Some(p) = (c..self.size).find(|&r| rows[r] >> c & 1 == 1) else {
                return false;
            };
            rows.swap(c, p);
            for r in 0..self.size {
                if r != c && rows[r] >> c & 1 == 1 {
                    rows[r] ^= rows[c];
                }
            }
        }
        true
    }

    /// Gauss-Jordan inverse; `None` for singular matrices.
    pub fn inverse(&self) -> Option<Self> {
        let mut rows = self.rows.clone();
        let mut inv = Self::identity(self.size).rows;
        for c in 0..self.size {
            let p = (c..self.size).find(|&r| rows[r] >> c & 1 == 1)?;
            rows.swap(c, p);
            inv.swap(c, p);
            for r in 0..self.size {
                if r != c && rows[r] >> c & 1 == 1 {
                    rows[r] ^= rows[c];
                    inv[r] ^= inv[c];
                }
            }
        }
        Some(Self { size: self.size, rows: inv })
    }
}
