use super::CostMatrix;
use crate::error::{Error, Result};

/// Injective map from rows to columns, `row_to_col[i]` is the column of row `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub row_to_col: Vec<usize>,
}

impl Assignment {
    pub fn is_injective(&self, cols: usize) -> bool {
        let mut seen = vec![false; cols];
        self.row_to_col.iter().all(|&j| {
            if j >= cols || seen[j] {
                false
            } else {
                seen[j] = true;
                true
            }
        })
    }

    /// Summed selected costs, accumulated in row order.
    pub fn cost(&self, cost: &CostMatrix) -> f64 {
        self.row_to_col
            .iter()
            .enumerate()
            .map(|(i, &j)| cost.get(i, j))
            .sum()
    }
}

/// Minimum-cost injective assignment of the `m` rows into the `n >= m`
/// columns (Hungarian method with row/column potentials, O(m^2 n)).
pub fn solve_assignment(cost: &CostMatrix) -> Result<(Assignment, f64)> {
    let (m, n) = (cost.rows(), cost.cols());
    if m > n {
        return Err(Error::Shape(format!(
            "assignment needs rows <= cols, got {m}x{n}"
        )));
    }
    if m == 0 {
        return Ok((Assignment { row_to_col: vec![] }, 0.0));
    }

    // 1-based arrays; index 0 is the virtual column/row.
    let mut u = vec![0.0f64; m + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut col_owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    let mut minv = vec![0.0f64; n + 1];
    let mut used = vec![false; n + 1];

    for i in 1..=m {
        col_owner[0] = i;
        let mut j0 = 0usize;
        minv.fill(f64::INFINITY);
        used.fill(false);
        loop {
            used[j0] = true;
            let i0 = col_owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            let row = &cost.data[(i0 - 1) * n..i0 * n];
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = row[j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[col_owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if col_owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            col_owner[j0] = col_owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0usize; m];
    for j in 1..=n {
        if col_owner[j] > 0 {
            row_to_col[col_owner[j] - 1] = j - 1;
        }
    }
    let a = Assignment { row_to_col };
    let total = a.cost(cost);
    Ok((a, total))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Minimum over all injections rows -> cols, by recursion.
    fn brute_force(cost: &CostMatrix) -> f64 {
        fn rec(cost: &CostMatrix, row: usize, used: &mut Vec<bool>, acc: f64, best: &mut f64) {
            if row == cost.rows() {
                *best = best.min(acc);
                return;
            }
            for j in 0..cost.cols() {
                if !used[j] {
                    used[j] = true;
                    rec(cost, row + 1, used, acc + cost.get(row, j), best);
                    used[j] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(cost, 0, &mut vec![false; cost.cols()], 0.0, &mut best);
        best
    }

    #[test]
    fn one_by_one() {
        let c = CostMatrix::from_rows(&[vec![7.0]]).unwrap();
        let (a, total) = solve_assignment(&c).unwrap();
        assert_eq!(a.row_to_col, vec![0]);
        assert_eq!(total, 7.0);
    }

    #[test]
    fn zero_diagonal_is_forced() {
        let c = CostMatrix::from_rows(&[vec![0.0, 9.0], vec![9.0, 0.0]]).unwrap();
        let (a, total) = solve_assignment(&c).unwrap();
        assert_eq!(a.row_to_col, vec![0, 1]);
        assert_eq!(total, 0.0);
    }

    #[test]
    fn more_rows_than_columns_is_a_shape_error() {
        let c = CostMatrix::from_rows(&[vec![1.0], vec![2.0]]).unwrap();
        assert!(matches!(solve_assignment(&c), Err(Error::Shape(_))));
    }

    #[test]
    fn random_integer_matrices_match_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let m = rng.random_range(1..=5);
            let n = rng.random_range(m..=7);
            let data: Vec<f64> = (0..m * n).map(|_| rng.random_range(0..20) as f64).collect();
            let c = CostMatrix::new(m, n, data).unwrap();
            let (a, total) = solve_assignment(&c).unwrap();
            assert!(a.is_injective(n));
            assert_eq!(total, brute_force(&c));
        }
    }

    #[test]
    fn five_by_seven_fixed_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let data: Vec<f64> = (0..35).map(|_| rng.random_range(0..100) as f64).collect();
        let c = CostMatrix::new(5, 7, data).unwrap();
        assert_eq!(solve_assignment(&c).unwrap().1, brute_force(&c));
    }
}
