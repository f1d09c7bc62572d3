//! Lagrange shape functions on the reference square.
//!
//! Local numbering is tensor-product: Q2 node `(a, b)` with `a, b in {0, 1, 2}`
//! is `a + 3 b`, Q1 node `(a, b)` with `a, b in {0, 1}` is `a + 2 b`. Node
//! coordinates are `-1, 0, 1` (Q2) and `-1, 1` (Q1) per axis.

pub const Q2_NODES_1D: [f64; 3] = [-1.0, 0.0, 1.0];
pub const Q1_NODES_1D: [f64; 2] = [-1.0, 1.0];

/// Quadratic Lagrange polynomials on `[-1, 0, 1]` and their derivatives.
#[inline]
pub fn lagrange2(x: f64) -> ([f64; 3], [f64; 3]) {
    (
        [0.5 * x * (x - 1.0), 1.0 - x * x, 0.5 * x * (x + 1.0)],
        [x - 0.5, -2.0 * x, x + 0.5],
    )
}

#[inline]
pub fn lagrange1(x: f64) -> ([f64; 2], [f64; 2]) {
    ([0.5 * (1.0 - x), 0.5 * (1.0 + x)], [-0.5, 0.5])
}

/// Values and reference gradients of the nine Q2 functions.
pub fn q2(xi: [f64; 2]) -> ([f64; 9], [[f64; 2]; 9]) {
    let (lx, dx) = lagrange2(xi[0]);
    let (ly, dy) = lagrange2(xi[1]);
    let mut v = [0.0; 9];
    let mut g = [[0.0; 2]; 9];
    for b in 0..3 {
        for a in 0..3 {
            v[a + 3 * b] = lx[a] * ly[b];
            g[a + 3 * b] = [dx[a] * ly[b], lx[a] * dy[b]];
        }
    }
    (v, g)
}

/// Values and reference gradients of the four Q1 functions.
pub fn q1(xi: [f64; 2]) -> ([f64; 4], [[f64; 2]; 4]) {
    let (lx, dx) = lagrange1(xi[0]);
    let (ly, dy) = lagrange1(xi[1]);
    let mut v = [0.0; 4];
    let mut g = [[0.0; 2]; 4];
    for b in 0..2 {
        for a in 0..2 {
            v[a + 2 * b] = lx[a] * ly[b];
            g[a + 2 * b] = [dx[a] * ly[b], lx[a] * dy[b]];
        }
    }
    (v, g)
}
