//! Reference computations written independently of `swarm_mimo` internals.
//! The acceptance suite checks the library against these.

use itertools::Itertools;
use nalgebra::DMatrix;
use num_complex::Complex64;
use swarm_mimo::channel::{build_channel, objective, ArrayGeometry, Position3};

/// Inverse condition number of a 2×2 matrix from the closed-form eigenvalues
/// of `MᴴM`: `(t ± √(t² − 4|det M|²)) / 2` with `t = ‖M‖²_F`.
pub fn icn_2x2(m: &DMatrix<Complex64>) -> f64 {
    assert_eq!(m.shape(), (2, 2));
    let t: f64 = m.iter().map(|z| z.norm_sqr()).sum();
    let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    let disc = (t * t - 4.0 * det.norm_sqr()).max(0.0).sqrt();
    let big = (t + disc) / 2.0;
    // Small root via the product of roots, which avoids cancellation.
    let small = if big > 0.0 { det.norm_sqr() / big } else { 0.0 };
    (small / big).sqrt()
}

/// `Σ_{l≠k} |h_lᴴ h_k|²` by explicit loops over ordered column pairs.
pub fn pair_sum_objective(h: &DMatrix<Complex64>) -> f64 {
    let mut total = 0.0;
    for l in 0..h.ncols() {
        for k in 0..h.ncols() {
            if l == k {
                continue;
            }
            let mut inner = Complex64::new(0.0, 0.0);
            for n in 0..h.nrows() {
                inner += h[(n, l)].conj() * h[(n, k)];
            }
            total += inner.norm_sqr();
        }
    }
    total
}

/// Total distance of sending drone `i` to `targets[perm[i]]`, summed in
/// drone order.
pub fn permutation_cost(current: &[Position3], targets: &[Position3], perm: &[usize]) -> f64 {
    current
        .iter()
        .zip(perm)
        .map(|(c, &j)| (c - targets[j]).norm())
        .sum()
}

/// Cheapest assignment by trying every permutation.
pub fn exhaustive_assignment(current: &[Position3], targets: &[Position3]) -> (Vec<usize>, f64) {
    (0..targets.len())
        .permutations(targets.len())
        .map(|p| {
            let c = permutation_cost(current, targets, &p);
            (p, c)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("at least one permutation")
}

/// Whether swapping any two drones' targets lowers the total distance.
pub fn improving_swap_exists(current: &[Position3], targets: &[Position3], perm: &[usize]) -> bool {
    let base = permutation_cost(current, targets, perm);
    (0..perm.len()).tuple_combinations().any(|(a, b)| {
        let mut p = perm.to_vec();
        p.swap(a, b);
        permutation_cost(current, targets, &p) < base * (1.0 - 1e-12)
    })
}

/// Central differences of the unit-amplitude objective with respect to
/// drone `m`'s position.
pub fn finite_difference_gradient(geom: &ArrayGeometry, m: usize, step: f64) -> Position3 {
    let mut out = Position3::zeros();
    for axis in 0..3 {
        let mut plus = geom.clone();
        plus.rx_positions[m][axis] += step;
        let mut minus = geom.clone();
        minus.rx_positions[m][axis] -= step;
        let fp = objective(&build_channel(&plus).expect("valid geometry").normalized());
        let fm = objective(&build_channel(&minus).expect("valid geometry").normalized());
        out[axis] = (fp - fm) / (2.0 * step);
    }
    out
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n == 0 {
        f64::NAN
    } else if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
