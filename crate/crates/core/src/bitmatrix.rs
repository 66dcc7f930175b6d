//! Rank and nullspace of F2-linear maps on at most 32 coordinates.
//!
//! A map is given by its column images: `columns[j]` is the image of the
//! `j`-th unit vector, packed as a bit mask.

/// Rank of the linear map with the given column images.
pub fn rank(columns: &[u32]) -> u32 {
    let mut pivots = [0u32; 32];
    let mut r = 0;
    for &c in columns {
        if reduce(&mut pivots, c).is_some() {
            r += 1;
        }
    }
    r
}

// Inserts `v` into the echelon basis keyed by leading bit. Returns the pivot
// slot used, or None if `v` was already in the span.
fn reduce(pivots: &mut [u32; 32], mut v: u32) -> Option<usize> {
    while v != 0 {
        let lead = 31 - v.leading_zeros() as usize;
        if pivots[lead] == 0 {
            pivots[lead] = v;
            return Some(lead);
        }
        v ^= pivots[lead];
    }
    None
}

/// A basis of `{x : Σ x_j columns[j] = 0}`, each vector packed as a mask over
/// the column indices.
pub fn nullspace(columns: &[u32]) -> Vec<u32> {
    assert!(columns.len() <= 32);
    // Each pivot row carries the combination of input columns that produced it.
    let mut pivots = [(0u32, 0u32); 32];
    let mut basis = Vec::new();
    for (j, &c) in columns.iter().enumerate() {
        let mut v = c;
        let mut combo = 1u32 << j;
        loop {
            if v == 0 {
                basis.push(combo);
                break;
            }
            let lead = 31 - v.leading_zeros() as usize;
            let (pv, pc) = pivots[lead];
            if pv == 0 {
                pivots[lead] = (v, combo);
                break;
            }
            v ^= pv;
            combo ^= pc;
        }
    }
    basis
}

/// Applies the map to `x`.
pub fn apply(columns: &[u32], x: u32) -> u32 {
    columns
        .iter()
        .enumerate()
        .filter(|(j, _)| x >> j & 1 == 1)
        .fold(0, |acc, (_, &c)| acc ^ c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_zero() {
        let id: Vec<u32> = (0..8).map(|j| 1 << j).collect();
        assert_eq!(rank(&id), 8);
        assert!(nullspace(&id).is_empty());
        let zero = vec![0u32; 5];
        assert_eq!(rank(&zero), 0);
        assert_eq!(nullspace(&zero).len(), 5);
    }

    #[test]
    fn rank_nullity_exhaustive_3x3() {
        // Every 3x3 matrix over F2.
        for bits in 0u32..512 {
            let cols: Vec<u32> = (0..3).map(|j| bits >> (3 * j) & 7).collect();
            let r = rank(&cols);
            let ns = nullspace(&cols);
            assert_eq!(r as usize + ns.len(), 3);
            for &v in &ns {
                assert_ne!(v, 0);
                assert_eq!(apply(&cols, v), 0);
            }
            // Kernel size by enumeration.
            let kernel = (0..8).filter(|&x| apply(&cols, x) == 0).count();
            assert_eq!(kernel, 1 << ns.len());
        }
    }
}
