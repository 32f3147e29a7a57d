//! Finite-difference weights on arbitrary node sets (Fornberg's algorithm)
//! plus convenience central stencils on uniform grids.

/// Weights for derivatives of order `0..=m` at the point `z` from samples at
/// nodes `x` (all distinct). Returns `w[k][i]`: the weight of node `i` in
/// the order-`k` formula, exact for polynomials of degree `< x.len()`.
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    assert!(n > m, "need more nodes than the derivative order");
    // c[i][k]: weight of node i for derivative order k
    let mut c = vec![vec![0.0f64; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    // transpose to order-major
    (0..=m)
        .map(|k| (0..n).map(|i| c[i][k]).collect())
        .collect()
}

/// Central stencil weights for the order-`m` derivative on the uniform node
/// set `{-hw·h, ..., hw·h}`; requires `2·hw + 1 > m`.
pub fn central_weights(m: usize, hw: usize, h: f64) -> Vec<f64> {
    let nodes: Vec<f64> = (-(hw as i64)..=hw as i64).map(|i| i as f64 * h).collect();
    fd_weights(0.0, &nodes, m).swap_remove(m)
}

/// One-sided stencil at the left end of a uniform grid: order-`m` derivative
/// at `x = 0` from nodes `{0, h, ..., (count-1)·h}`.
pub fn one_sided_weights(m: usize, count: usize, h: f64) -> Vec<f64> {
    let nodes: Vec<f64> = (0..count).map(|i| i as f64 * h).collect();
    fd_weights(0.0, &nodes, m).swap_remove(m)
}
