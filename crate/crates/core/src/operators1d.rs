//! One-dimensional reference operators on Legendre-Gauss-Lobatto nodes.
//!
//! All matrices are dense, row-major, `(N+1) x (N+1)`: entry `(i, j)` lives at
//! `i * (N + 1) + j`.

use crate::error::{Result, SweError};

/// Legendre polynomial `L_n(x)` and its derivative.
pub fn legendre(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut l0, mut l1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    for k in 2..=n {
        let kf = k as f64;
        let l2 = ((2.0 * kf - 1.0) * x * l1 - (kf - 1.0) * l0) / kf;
        let d2 = d0 + (2.0 * kf - 1.0) * l1;
        l0 = l1;
        l1 = l2;
        d0 = d1;
        d1 = d2;
    }
    (l1, d1)
}

/// LGL nodes (ascending) and weights for degree `n`.
pub fn lgl_nodes_weights(n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n == 0 {
        return Err(SweError::InvalidArgument(
            "polynomial degree must be at least 1".into(),
        ));
    }
    let np = n + 1;
    let nf = n as f64;
    let mut x = vec![0.0; np];
    x[0] = -1.0;
    x[n] = 1.0;
    for j in 1..n {
        // Chebyshev-Gauss-Lobatto guess, then Newton on (1 - x^2) L_N'(x),
        // whose derivative is -N(N+1) L_N(x).
        let mut xi = -(std::f64::consts::PI * j as f64 / nf).cos();
        for _ in 0..100 {
            let (l, dl) = legendre(n, xi);
            let delta = (1.0 - xi * xi) * dl / (nf * (nf + 1.0) * l);
            xi += delta;
            if delta.abs() < 1e-15 {
                break;
            }
        }
        x[j] = xi;
    }
    for j in 0..np / 2 {
        let s = 0.5 * (x[n - j] - x[j]);
        x[j] = -s;
        x[n - j] = s;
    }
    if np % 2 == 1 {
        x[n / 2] = 0.0;
    }
    let w = x
        .iter()
        .map(|&xi| {
            let (l, _) = legendre(n, xi);
            2.0 / (nf * (nf + 1.0) * l * l)
        })
        .collect();
    Ok((x, w))
}

/// Legendre-Gauss nodes and weights with `m` points.
pub fn gauss_nodes_weights(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    let mf = m as f64;
    for j in 0..m {
        let mut xi = -(std::f64::consts::PI * (j as f64 + 0.75) / (mf + 0.5)).cos();
        for _ in 0..100 {
            let (l, dl) = legendre(m, xi);
            let delta = l / dl;
            xi -= delta;
            if delta.abs() < 1e-15 {
                break;
            }
        }
        let (_, dl) = legendre(m, xi);
        x[j] = xi;
        w[j] = 2.0 / ((1.0 - xi * xi) * dl * dl);
    }
    (x, w)
}

/// Barycentric weights of a node set.
pub fn barycentric_weights(nodes: &[f64]) -> Vec<f64> {
    (0..nodes.len())
        .map(|j| {
            let p: f64 = (0..nodes.len())
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product();
            1.0 / p
        })
        .collect()
}

/// Values of all Lagrange basis polynomials of `nodes` at `x`.
pub fn lagrange_basis(nodes: &[f64], x: f64) -> Vec<f64> {
    let bw = barycentric_weights(nodes);
    let mut out = vec![0.0; nodes.len()];
    for (j, &xj) in nodes.iter().enumerate() {
        if x == xj {
            out[j] = 1.0;
            return out;
        }
    }
    let mut denom = 0.0;
    for j in 0..nodes.len() {
        let t = bw[j] / (x - nodes[j]);
        out[j] = t;
        denom += t;
    }
    for v in &mut out {
        *v /= denom;
    }
    out
}

/// Lagrange derivative matrix `D_ij = l_j'(x_i)`.
pub fn derivative_matrix(nodes: &[f64]) -> Vec<f64> {
    let np = nodes.len();
    let bw = barycentric_weights(nodes);
    let mut d = vec![0.0; np * np];
    for i in 0..np {
        let mut diag = 0.0;
        for j in 0..np {
            if i != j {
                let v = bw[j] / bw[i] / (nodes[i] - nodes[j]);
                d[i * np + j] = v;
                diag -= v;
            }
        }
        d[i * np + i] = diag;
    }
    d
}

/// Reference-element operators for polynomial degree `n`.
#[derive(Clone, Debug)]
pub struct Operators1D {
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Polynomial derivative matrix.
    pub d: Vec<f64>,
    /// `2D + S` with `S = diag(1/w_0, 0, .., 0, -1/w_N)`; used in the split volume sums.
    pub d_tilde: Vec<f64>,
    /// `-M^{-1} D^T M`.
    pub d_hat: Vec<f64>,
    /// Orthonormal Legendre Vandermonde `V_ij = L_j(x_i) sqrt(j + 1/2)`.
    pub v: Vec<f64>,
    pub v_inv: Vec<f64>,
}

impl Operators1D {
    pub fn new(n: usize) -> Result<Self> {
        let (nodes, weights) = lgl_nodes_weights(n)?;
        let np = n + 1;
        let d = derivative_matrix(&nodes);
        let mut d_tilde: Vec<f64> = d.iter().map(|v| 2.0 * v).collect();
        d_tilde[0] += 1.0 / weights[0];
        d_tilde[n * np + n] -= 1.0 / weights[n];
        let mut d_hat = vec![0.0; np * np];
        for i in 0..np {
            for j in 0..np {
                d_hat[i * np + j] = -d[j * np + i] * weights[j] / weights[i];
            }
        }
        let mut v = vec![0.0; np * np];
        for i in 0..np {
            for j in 0..np {
                v[i * np + j] = legendre(j, nodes[i]).0 * (j as f64 + 0.5).sqrt();
            }
        }
        // Exact L2 projection onto the orthonormal basis with N+1 Gauss points.
        let (xg, wg) = gauss_nodes_weights(np);
        let mut v_inv = vec![0.0; np * np];
        for l in 0..np {
            let ell = lagrange_basis(&nodes, xg[l]);
            for i in 0..np {
                let phi = legendre(i, xg[l]).0 * (i as f64 + 0.5).sqrt();
                for j in 0..np {
                    v_inv[i * np + j] += phi * ell[j] * wg[l];
                }
            }
        }
        Ok(Self {
            n,
            nodes,
            weights,
            d,
            d_tilde,
            d_hat,
            v,
            v_inv,
        })
    }

    #[inline]
    pub fn np(&self) -> usize {
        self.n + 1
    }

    /// Surface matrix diagonal `(1/w_0, 0, .., 0, -1/w_N)`.
    pub fn s_diag(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.np()];
        s[0] = 1.0 / self.weights[0];
        s[self.n] -= 1.0 / self.weights[self.n];
        s
    }

    /// Applies `D` to a nodal vector.
    pub fn differentiate(&self, f: &[f64]) -> Vec<f64> {
        let np = self.np();
        (0..np)
            .map(|i| (0..np).map(|j| self.d[i * np + j] * f[j]).sum())
            .collect()
    }

    /// Modal coefficients of a 2D nodal field stored as `f[i * np + j]`.
    pub fn modal_2d(&self, f: &[f64]) -> Vec<f64> {
        let np = self.np();
        let mut tmp = vec![0.0; np * np];
        for a in 0..np {
            for j in 0..np {
                let mut s = 0.0;
                for i in 0..np {
                    s += self.v_inv[a * np + i] * f[i * np + j];
                }
                tmp[a * np + j] = s;
            }
        }
        let mut out = vec![0.0; np * np];
        for a in 0..np {
            for b in 0..np {
                let mut s = 0.0;
                for j in 0..np {
                    s += tmp[a * np + j] * self.v_inv[b * np + j];
                }
                out[a * np + b] = s;
            }
        }
        out
    }

    /// Inverse of [`Operators1D::modal_2d`].
    pub fn nodal_2d(&self, c: &[f64]) -> Vec<f64> {
        let np = self.np();
        let mut tmp = vec![0.0; np * np];
        for i in 0..np {
            for b in 0..np {
                let mut s = 0.0;
                for a in 0..np {
                    s += self.v[i * np + a] * c[a * np + b];
                }
                tmp[i * np + b] = s;
            }
        }
        let mut out = vec![0.0; np * np];
        for i in 0..np {
            for j in 0..np {
                let mut s = 0.0;
                for b in 0..np {
                    s += tmp[i * np + b] * self.v[j * np + b];
                }
                out[i * np + j] = s;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn degree_zero_rejected() {
        assert!(Operators1D::new(0).is_err());
    }

    #[test]
    fn small_degree_nodes() {
        let (x, w) = lgl_nodes_weights(1).unwrap();
        assert_eq!(x, vec![-1.0, 1.0]);
        assert_abs_diff_eq!(w[0], 1.0, epsilon = 1e-15);
        let (x, w) = lgl_nodes_weights(2).unwrap();
        assert_abs_diff_eq!(x[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[0], 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(w[1], 4.0 / 3.0, epsilon = 1e-15);
        let (x, _) = lgl_nodes_weights(3).unwrap();
        assert_abs_diff_eq!(x[2], (0.2f64).sqrt(), epsilon = 1e-15);
        // interior nodes are roots of L_3'
        assert!(legendre(3, x[1]).1.abs() < 1e-14);
    }

    #[test]
    fn derivative_linear_case() {
        let ops = Operators1D::new(1).unwrap();
        assert_eq!(ops.d, vec![-0.5, 0.5, -0.5, 0.5]);
        let dt = &ops.d_tilde;
        assert_abs_diff_eq!(dt[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dt[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dt[2], -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dt[3], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn differentiates_quadratic() {
        let ops = Operators1D::new(3).unwrap();
        let f: Vec<f64> = ops.nodes.iter().map(|x| x * x).collect();
        let df = ops.differentiate(&f);
        for (x, d) in ops.nodes.iter().zip(df) {
            assert_abs_diff_eq!(d, 2.0 * x, epsilon = 1e-14);
        }
    }

    #[test]
    fn operator_identities() {
        for n in 1..=15 {
            let ops = Operators1D::new(n).unwrap();
            let np = n + 1;
            let s = ops.s_diag();
            for i in 0..np {
                let row: f64 = (0..np).map(|j| ops.d_tilde[i * np + j]).sum();
                assert_abs_diff_eq!(row, s[i], epsilon = 1e-11);
                let drow: f64 = (0..np).map(|j| ops.d[i * np + j]).sum();
                assert_abs_diff_eq!(drow, 0.0, epsilon = 1e-13);
                for j in 0..np {
                    let sij = if i == j { s[i] } else { 0.0 };
                    assert_abs_diff_eq!(
                        ops.d[i * np + j],
                        -sij + ops.d_hat[i * np + j],
                        epsilon = 1e-12
                    );
                }
            }
        }
    }

    #[test]
    fn vandermonde_pair() {
        for n in 1..=15 {
            let ops = Operators1D::new(n).unwrap();
            let np = n + 1;
            for i in 0..np {
                for j in 0..np {
                    let s: f64 = (0..np).map(|k| ops.v[i * np + k] * ops.v_inv[k * np + j]).sum();
                    let e = if i == j { 1.0 } else { 0.0 };
                    assert_abs_diff_eq!(s, e, epsilon = 1e-12);
                }
            }
        }
    }

    #[test]
    fn top_legendre_mode_is_isolated() {
        let n = 6;
        let ops = Operators1D::new(n).unwrap();
        let np = n + 1;
        let f: Vec<f64> = (0..np * np)
            .map(|k| legendre(n, ops.nodes[k / np]).0 * legendre(n, ops.nodes[k % np]).0)
            .collect();
        let c = ops.modal_2d(&f);
        for k in 0..np * np {
            if k != np * np - 1 {
                assert_abs_diff_eq!(c[k], 0.0, epsilon = 1e-13);
            }
        }
        assert!(c[np * np - 1].abs() > 0.1);
        let ones = vec![1.0; np * np];
        let c = ops.modal_2d(&ones);
        assert_abs_diff_eq!(c[0], 2.0, epsilon = 1e-13);
    }

    proptest! {
        #[test]
        fn modal_round_trip(n in 1usize..12, seed in proptest::collection::vec(-1.0f64..1.0, 169)) {
            let ops = Operators1D::new(n).unwrap();
            let np = n + 1;
            let f = &seed[..np * np];
            let back = ops.nodal_2d(&ops.modal_2d(f));
            for (a, b) in f.iter().zip(back) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
