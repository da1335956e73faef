//! Hungarian method (shortest augmenting paths with potentials), O(n³).

/// Minimum-cost perfect matching on a square cost matrix given as rows.
/// Returns `assign[row] = column`.
pub fn min_cost_assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    assert!(
        cost.iter().all(|r| r.len() == n),
        "cost matrix must be square"
    );
    // 1-based potentials; p[col] = row matched to col, 0 = free
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
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
    let mut assign = vec![0; n];
    for j in 1..=n {
        assign[p[j] - 1] = j - 1;
    }
    assign
}

/// Largest total weight over one-to-one row/column matchings of a
/// (possibly rectangular) nonnegative count table.
pub fn max_weight_matching(table: &[Vec<usize>]) -> usize {
    let rows = table.len();
    let cols = table.iter().map(Vec::len).max().unwrap_or(0);
    let n = rows.max(cols);
    if n == 0 {
        return 0;
    }
    let big = table.iter().flatten().copied().max().unwrap_or(0) as f64;
    let at = |i: usize, j: usize| table.get(i).and_then(|r| r.get(j)).copied().unwrap_or(0);
    let cost: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| big - at(i, j) as f64).collect())
        .collect();
    let assign = min_cost_assignment(&cost);
    assign.iter().enumerate().map(|(i, &j)| at(i, j)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute(cost: &[Vec<f64>]) -> f64 {
        fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == cost.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..cost.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[row][j] + rec(cost, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        rec(cost, 0, &mut vec![false; cost.len()])
    }

    #[test]
    fn small_known_case() {
        let c = vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ];
        let a = min_cost_assignment(&c);
        let total: f64 = a.iter().enumerate().map(|(i, &j)| c[i][j]).sum();
        assert_eq!(total, 5.0);
    }

    #[test]
    fn agrees_with_brute_force() {
        let mut s = crate::random::Seed(4).stream();
        for n in 1..=6 {
            for _ in 0..20 {
                let c: Vec<Vec<f64>> = (0..n)
                    .map(|_| (0..n).map(|_| s.standard_normal().abs().round()).collect())
                    .collect();
                let a = min_cost_assignment(&c);
                let total: f64 = a.iter().enumerate().map(|(i, &j)| c[i][j]).sum();
                assert_eq!(total, brute(&c));
            }
        }
    }

    #[test]
    fn rectangular_table() {
        assert_eq!(max_weight_matching(&[vec![5, 1, 0]]), 5);
        assert_eq!(max_weight_matching(&[vec![2], vec![3], vec![1]]), 3);
        assert_eq!(max_weight_matching(&[]), 0);
    }
}
