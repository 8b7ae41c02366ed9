//! Row reduction over GF(2). Pivots are chosen in ascending column order and,
//! within a column, at the first available row, so results are reproducible.

use bitvec::prelude::*;

use super::pauli::Bits;

/// Reduced row echelon form in place; returns the pivot columns.
/// Zero rows are moved to the bottom.
pub fn rref(rows: &mut [Bits]) -> Vec<usize> {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..ncols {
        let Some(found) = (next..rows.len()).find(|&r| rows[r][col]) else {
            continue;
        };
        rows.swap(next, found);
        let pivot = rows[next].clone();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != next && row[col] {
                *row ^= pivot.as_bitslice();
            }
        }
        pivots.push(col);
        next += 1;
        if next == rows.len() {
            break;
        }
    }
    pivots
}

pub fn rank(rows: &[Bits]) -> usize {
    let mut m = rows.to_vec();
    rref(&mut m).len()
}

/// A basis of the row space, in reduced echelon form.
pub fn row_basis(rows: &[Bits]) -> Vec<Bits> {
    let mut m = rows.to_vec();
    let r = rref(&mut m).len();
    m.truncate(r);
    m
}

/// Combinations `c` with `sum_i c_i rows_i = 0`, as bit-vectors over the rows.
pub fn left_null_space(rows: &[Bits]) -> Vec<Bits> {
    let m = rows.len();
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut aug: Vec<Bits> = rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut a = r.clone();
            let mut e = bitvec![u64, Lsb0; 0; m];
            e.set(i, true);
            a.extend_from_bitslice(&e);
            a
        })
        .collect();
    // reduce on the original columns only
    let mut next = 0;
    for col in 0..ncols {
        let Some(found) = (next..m).find(|&r| aug[r][col]) else {
            continue;
        };
        aug.swap(next, found);
        let pivot = aug[next].clone();
        for (r, row) in aug.iter_mut().enumerate() {
            if r != next && row[col] {
                *row ^= pivot.as_bitslice();
            }
        }
        next += 1;
    }
    aug[next..]
        .iter()
        .map(|row| row[ncols..].to_bitvec())
        .collect()
}

/// Some `c` with `sum_i c_i rows_i = target`, if one exists.
pub fn solve(rows: &[Bits], target: &BitSlice<u64, Lsb0>) -> Option<Bits> {
    let mut system = rows.to_vec();
    system.push(target.to_bitvec());
    let null = left_null_space(&system);
    let m = rows.len();
    let mut sol = null.iter().find(|c| c[m])?.clone();
    sol.truncate(m);
    Some(sol)
}

/// Symplectic form on `(x | z)` vectors.
pub fn symplectic_product(a: &BitSlice<u64, Lsb0>, b: &BitSlice<u64, Lsb0>) -> u8 {
    let n = a.len() / 2;
    let mut s = 0;
    for i in 0..n {
        s ^= (a[i] & b[n + i]) as u8 ^ (a[n + i] & b[i]) as u8;
    }
    s
}

/// `{v : ω(v, w) = 0 for all w in rows}` in dimension `2n`.
pub fn symplectic_complement(rows: &[Bits], n: usize) -> Vec<Bits> {
    // ω(v, w) = v · J w; build the matrix of J w and take its right kernel
    let swapped: Vec<Bits> = rows
        .iter()
        .map(|w| {
            let mut s = w[n..].to_bitvec();
            s.extend_from_bitslice(&w[..n]);
            s
        })
        .collect();
    kernel(&swapped, 2 * n)
}

/// Right kernel `{v : rows · v = 0}` of a matrix with `ncols` columns.
pub fn kernel(rows: &[Bits], ncols: usize) -> Vec<Bits> {
    let mut m = rows.to_vec();
    let pivots = rref(&mut m);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = bitvec![u64, Lsb0; 0; ncols];
            v.set(f, true);
            for (r, &p) in pivots.iter().enumerate() {
                if m[r][f] {
                    v.set(p, true);
                }
            }
            v
        })
        .collect()
}

/// Whether every vector of `a` lies in the span of `b`.
pub fn span_contains(b: &[Bits], a: &[Bits]) -> bool {
    let rb = rank(b);
    let mut all = b.to_vec();
    all.extend_from_slice(a);
    rank(&all) == rb
}

pub fn span_equal(a: &[Bits], b: &[Bits]) -> bool {
    span_contains(a, b) && span_contains(b, a)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(s: &str) -> Bits {
        s.chars().map(|c| c == '1').collect()
    }

    #[test]
    fn rank_and_rref() {
        let mut m = vec![bits("1100"), bits("0110"), bits("1010")];
        let piv = rref(&mut m);
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(m[0], bits("1010"));
        assert_eq!(m[1], bits("0110"));
        assert!(m[2].not_any());
    }

    #[test]
    fn null_space_relations() {
        let rows = vec![bits("1100"), bits("0110"), bits("1010"), bits("0001")];
        let null = left_null_space(&rows);
        assert_eq!(null.len(), 1);
        assert_eq!(null[0], bits("1110"));
    }

    #[test]
    fn solve_finds_combination() {
        let rows = vec![bits("100"), bits("011")];
        assert_eq!(solve(&rows, &bits("111")), Some(bits("11")));
        assert_eq!(solve(&rows, &bits("010")), None);
    }

    #[test]
    fn kernel_is_orthogonal() {
        let rows = vec![bits("1101"), bits("0111")];
        let k = kernel(&rows, 4);
        assert_eq!(k.len(), 2);
        for v in &k {
            for r in &rows {
                assert_eq!(super::super::pauli::and_count(v, r) % 2, 0);
            }
        }
    }

    #[test]
    fn complement_of_x_is_x_and_z_elsewhere() {
        // n = 2, span{X_0}
        let c = symplectic_complement(&[bits("1000")], 2);
        assert_eq!(c.len(), 3);
        for v in &c {
            assert_eq!(symplectic_product(v, &bits("1000")), 0);
        }
        assert!(span_contains(&c, &[bits("1000"), bits("0101")]));
    }
}
