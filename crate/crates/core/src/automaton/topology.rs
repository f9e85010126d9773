use crate::error::{DcaError, Result};

/// A ring `Z/nZ` together with the memory set (relative offsets read by the
/// local rule). Offset order fixes the digit order of pattern codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    ring_size: usize,
    offsets: Vec<i64>,
}

impl Topology {
    pub fn new(ring_size: usize, offsets: Vec<i64>) -> Result<Self> {
        if ring_size == 0 {
            return Err(DcaError::invalid("ring size must be positive"));
        }
        if offsets.is_empty() {
            return Err(DcaError::invalid("memory set must not be empty"));
        }
        for (i, o) in offsets.iter().enumerate() {
            if offsets[..i].contains(o) {
                return Err(DcaError::invalid(format!("duplicate offset {o}")));
            }
        }
        Ok(Self { ring_size, offsets })
    }

    /// Radius-1 neighborhood `[-1, 0, 1]` used by elementary CAs.
    pub fn elementary(ring_size: usize) -> Result<Self> {
        Self::new(ring_size, vec![-1, 0, 1])
    }

    pub fn ring_size(&self) -> usize {
        self.ring_size
    }

    pub fn offsets(&self) -> &[i64] {
        &self.offsets
    }

    pub fn arity(&self) -> usize {
        self.offsets.len()
    }

    /// Largest `|offset|`; information travels at most this far per step.
    pub fn reach(&self) -> u64 {
        self.offsets.iter().map(|o| o.unsigned_abs()).max().unwrap_or(0)
    }

    /// Cell index of `(cell + offset) mod n`.
    #[inline]
    pub fn neighbor(&self, cell: usize, offset: i64) -> usize {
        let n = self.ring_size as i64;
        (cell as i64 + offset.rem_euclid(n)).rem_euclid(n) as usize
    }

    /// Cells read by `cell`, in offset order.
    pub fn neighborhood(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        self.offsets.iter().map(move |&o| self.neighbor(cell, o))
    }

    /// Circular distance between two cells.
    pub fn distance(&self, a: usize, b: usize) -> usize {
        let d = a.abs_diff(b) % self.ring_size;
        d.min(self.ring_size - d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_both_ways() {
        let t = Topology::elementary(5).unwrap();
        assert_eq!(t.neighborhood(0).collect::<Vec<_>>(), vec![4, 0, 1]);
        assert_eq!(t.neighborhood(4).collect::<Vec<_>>(), vec![3, 4, 0]);
    }

    #[test]
    fn large_offsets_reduce_mod_n() {
        let t = Topology::new(3, vec![-7, 5]).unwrap();
        assert_eq!(t.neighbor(0, -7), 2);
        assert_eq!(t.neighbor(1, 5), 0);
        assert_eq!(t.reach(), 7);
    }

    #[test]
    fn single_cell_ring() {
        let t = Topology::new(1, vec![0]).unwrap();
        assert_eq!(t.neighbor(0, 0), 0);
    }

    #[test]
    fn rejects_bad_topologies() {
        assert!(Topology::new(0, vec![0]).is_err());
        assert!(Topology::new(4, vec![]).is_err());
        assert!(Topology::new(4, vec![1, 1]).is_err());
    }

    #[test]
    fn circular_distance() {
        let t = Topology::elementary(10).unwrap();
        assert_eq!(t.distance(1, 9), 2);
        assert_eq!(t.distance(0, 5), 5);
    }
}
