use nalgebra::DMatrix;

use crate::C64;

/// Permanent by Ryser's formula with Gray-code subset ordering,
/// `O(2^n n)`.
///
/// `per(A) = (-1)^n sum_{S subset cols} (-1)^{|S|} prod_r sum_{c in S} A[r][c]`;
/// successive Gray-code subsets differ by one column, so the row sums are
/// updated rather than recomputed.
pub fn permanent(a: &DMatrix<C64>) -> C64 {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "permanent of a non-square matrix");
    assert!(n < 63, "permanent order {n} too large");
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    let mut row_sums = vec![C64::new(0.0, 0.0); n];
    let mut total = C64::new(0.0, 0.0);
    let mut size = 0usize;
    for k in 1u64..(1u64 << n) {
        let j = k.trailing_zeros() as usize;
        let gray = k ^ (k >> 1);
        if gray & (1 << j) != 0 {
            for (r, s) in row_sums.iter_mut().enumerate() {
                *s += a[(r, j)];
            }
            size += 1;
        } else {
            for (r, s) in row_sums.iter_mut().enumerate() {
                *s -= a[(r, j)];
            }
            size -= 1;
        }
        let prod: C64 = row_sums.iter().product();
        if (n - size).is_multiple_of(2) {
            total += prod;
        } else {
            total -= prod;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    // sum over all permutations, the definition
    fn brute(a: &DMatrix<C64>) -> C64 {
        fn rec(a: &DMatrix<C64>, row: usize, used: &mut Vec<bool>) -> C64 {
            if row == a.nrows() {
                return C64::new(1.0, 0.0);
            }
            let mut s = C64::new(0.0, 0.0);
            for c in 0..a.ncols() {
                if !used[c] {
                    used[c] = true;
                    s += a[(row, c)] * rec(a, row + 1, used);
                    used[c] = false;
                }
            }
            s
        }
        rec(a, 0, &mut vec![false; a.ncols()])
    }

    #[test]
    fn small_cases() {
        let one = DMatrix::from_element(3, 3, C64::new(1.0, 0.0));
        assert!((permanent(&one) - C64::new(6.0, 0.0)).norm() < 1e-14);
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]).map(|v| C64::new(v, 0.0));
        assert!((permanent(&m) - C64::new(10.0, 0.0)).norm() < 1e-14);
        assert_eq!(permanent(&DMatrix::zeros(0, 0)), C64::new(1.0, 0.0));
    }

    #[test]
    fn matches_permutation_sum() {
        for n in 1..=7 {
            let u = crate::optics::ModeUnitary::haar_random(n, n as u64 + 40);
            let a = u.entries();
            assert!((permanent(a) - brute(a)).norm() < 1e-12, "n={n}");
        }
    }
}
