//! Minimum-cost assignment (Hungarian method, shortest augmenting paths
//! with dual potentials).

/// Result of a rectangular assignment: every row of the smaller side is
/// paired with a distinct element of the larger side.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    /// `(row, col)` pairs sorted by row.
    pub pairs: Vec<(usize, usize)>,
    pub total_cost: f64,
}

/// Solve min-cost assignment over a `rows x cols` cost matrix.
///
/// Pairs `min(rows, cols)` elements. Costs must be finite. Runs in
/// `O(n^2 m)` with `n = min(rows, cols)`.
pub fn solve(cost: &[Vec<f64>]) -> Assignment {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    debug_assert!(cost.iter().all(|r| r.len() == cols), "ragged cost matrix");
    if rows == 0 || cols == 0 {
        return Assignment { pairs: Vec::new(), total_cost: 0.0 };
    }
    if rows <= cols {
        let row_to_col = hungarian(rows, cols, |i, j| cost[i][j]);
        finish(cost, row_to_col.into_iter().enumerate().collect())
    } else {
        let col_to_row = hungarian(cols, rows, |i, j| cost[j][i]);
        let mut pairs: Vec<(usize, usize)> =
            col_to_row.into_iter().enumerate().map(|(c, r)| (r, c)).collect();
        pairs.sort_unstable();
        finish(cost, pairs)
    }
}

fn finish(cost: &[Vec<f64>], pairs: Vec<(usize, usize)>) -> Assignment {
    let total_cost = pairs.iter().map(|&(r, c)| cost[r][c]).sum();
    Assignment { pairs, total_cost }
}

/// Core solver for `n <= m`; returns the column assigned to each row.
fn hungarian(n: usize, m: usize, a: impl Fn(usize, usize) -> f64) -> Vec<usize> {
    // 1-based arrays; index 0 is the virtual source column.
    let mut u = vec![0.0_f64; n + 1];
    let mut v = vec![0.0_f64; m + 1];
    let mut p = vec![0_usize; m + 1];
    let mut way = vec![0_usize; m + 1];

    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = a(i0 - 1, j - 1) - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut row_to_col = vec![0; n];
    for j in 1..=m {
        if p[j] != 0 {
            row_to_col[p[j] - 1] = j - 1;
        }
    }
    row_to_col
}
