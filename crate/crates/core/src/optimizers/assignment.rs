//! Minimum total-distance assignment of drones to targets.
//!
//! Dense O(n³) Hungarian method with row/column potentials over `f64` costs.

use crate::channel::Position3;

/// `perm[i]` is the target index given to drone `i`; the permutation minimizes
/// `Σ ‖current_i − target_perm[i]‖`.
pub fn assign_targets(current: &[Position3], targets: &[Position3]) -> Vec<usize> {
    assert_eq!(
        current.len(),
        targets.len(),
        "assignment needs equal counts"
    );
    let n = current.len();
    if n == 0 {
        return Vec::new();
    }
    let cost = |i: usize, j: usize| (current[i] - targets[j]).norm();

    // 1-based potentials; column 0 is the virtual start.
    let mut u = vec![0.0f64; n + 1];
    let mut v = vec![0.0f64; n + 1];
    let mut owner = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];

    for row in 1..=n {
        owner[0] = row;
        let mut j0 = 0usize;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let reduced = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if reduced < minv[j] {
                    minv[j] = reduced;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut perm = vec![0usize; n];
    for j in 1..=n {
        perm[owner[j] - 1] = j - 1;
    }
    perm
}

/// Total Euclidean distance of an assignment.
pub fn assignment_cost(current: &[Position3], targets: &[Position3], perm: &[usize]) -> f64 {
    current
        .iter()
        .zip(perm)
        .map(|(c, &j)| (targets[j] - c).norm())
        .sum()
}
