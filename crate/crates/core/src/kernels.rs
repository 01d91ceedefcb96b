//! Element volume kernels, generic over the scalar type so the bench can run
//! the exact production code with FLOP counting.
//!
//! `dirs[l] = (y_eta, -x_eta, -y_xi, x_xi)` holds the two contravariant
//! direction vectors at node `l`; contracting `(F, G)` with the first pair
//! gives the xi flux and with the second pair the eta flux.

use crate::fluxes::Prim;
use crate::real::Real;

/// Two-point split flux contracted with the averaged direction `(kx, ky)`.
#[inline]
pub fn two_point_directional<T: Real>(a: &Prim<T>, b: &Prim<T>, kx: T, ky: T, g: T) -> [T; 3] {
    let half = T::from_f64(0.5);
    let h = half * (a.h + b.h);
    let h2 = half * (a.h * a.h + b.h * b.h);
    let hu = half * (a.hu + b.hu);
    let hv = half * (a.hv + b.hv);
    let u = half * (a.u + b.u);
    let v = half * (a.v + b.v);
    let p = g * h * h - half * g * h2;
    let m = hu * kx + hv * ky;
    [m, m * u + p * kx, m * v + p * ky]
}

/// Pointwise physical flux contracted with `(kx, ky)`.
#[inline]
pub fn pointwise_directional<T: Real>(a: &Prim<T>, kx: T, ky: T, g: T) -> [T; 3] {
    let p = T::from_f64(0.5) * g * a.h * a.h;
    let m = a.hu * kx + a.hv * ky;
    [m, m * a.u + p * kx, m * a.v + p * ky]
}

/// Split-form volume sums for one element:
/// `sum_m Dt_im F~_(i,m),j + sum_m Dt_jm G~_i,(j,m)`.
/// Returns the number of two-point flux evaluations.
pub fn split_volume<T: Real>(
    n: usize,
    w: &[[T; 3]],
    dirs: &[[T; 4]],
    d_tilde: &[T],
    g: T,
    h_des: T,
    out: &mut [[T; 3]],
) -> u64 {
    let np = n + 1;
    let prim: Vec<Prim<T>> = w.iter().map(|s| Prim::from_state(*s, h_des)).collect();
    let half = T::from_f64(0.5);
    let mut evals = 0;
    for i in 0..np {
        for j in 0..np {
            let l = i * np + j;
            let mut acc = [T::zero(); 3];
            for m in 0..np {
                let r = m * np + j;
                let kx = half * (dirs[l][0] + dirs[r][0]);
                let ky = half * (dirs[l][1] + dirs[r][1]);
                let f = two_point_directional(&prim[l], &prim[r], kx, ky, g);
                let d = d_tilde[i * np + m];
                for c in 0..3 {
                    acc[c] += d * f[c];
                }
            }
            for m in 0..np {
                let r = i * np + m;
                let kx = half * (dirs[l][2] + dirs[r][2]);
                let ky = half * (dirs[l][3] + dirs[r][3]);
                let f = two_point_directional(&prim[l], &prim[r], kx, ky, g);
                let d = d_tilde[j * np + m];
                for c in 0..3 {
                    acc[c] += d * f[c];
                }
            }
            evals += 2 * np as u64;
            out[l] = acc;
        }
    }
    evals
}

/// Standard volume sums `sum_m D_im f~_(m,j) + sum_m D_jm g~_(i,m)`
/// with pointwise contravariant fluxes.
pub fn standard_volume<T: Real>(
    n: usize,
    w: &[[T; 3]],
    dirs: &[[T; 4]],
    d: &[T],
    g: T,
    h_des: T,
    out: &mut [[T; 3]],
) -> u64 {
    let np = n + 1;
    let nn = np * np;
    let mut ft = Vec::with_capacity(nn);
    let mut gt = Vec::with_capacity(nn);
    for l in 0..nn {
        let p = Prim::from_state(w[l], h_des);
        ft.push(pointwise_directional(&p, dirs[l][0], dirs[l][1], g));
        gt.push(pointwise_directional(&p, dirs[l][2], dirs[l][3], g));
    }
    for i in 0..np {
        for j in 0..np {
            let mut acc = [T::zero(); 3];
            for m in 0..np {
                let a = d[i * np + m];
                let b = d[j * np + m];
                let fr = &ft[m * np + j];
                let gr = &gt[i * np + m];
                for c in 0..3 {
                    acc[c] += a * fr[c];
                    acc[c] += b * gr[c];
                }
            }
            out[i * np + j] = acc;
        }
    }
    2 * nn as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fluxes::volume_flux_sharp;

    #[test]
    fn directional_matches_full_flux() {
        let a = Prim::from_state([1.2, 0.3, -0.4], 1e-8);
        let b = Prim::from_state([0.7, -0.2, 0.1], 1e-8);
        let (f, g) = volume_flux_sharp(&a, &b, 9.81);
        let r = two_point_directional(&a, &b, 0.3, -0.7, 9.81);
        for c in 0..3 {
            assert!((r[c] - (0.3 * f[c] - 0.7 * g[c])).abs() < 1e-14);
        }
    }

    #[test]
    fn constant_state_volume_terms_vanish() {
        let n = 4;
        let ops = crate::operators1d::Operators1D::new(n).unwrap();
        let nn = (n + 1) * (n + 1);
        let w = vec![[1.5, 0.2, -0.3]; nn];
        let dirs = vec![[0.5, 0.0, 0.0, 0.25]; nn];
        let mut out = vec![[0.0; 3]; nn];
        standard_volume(n, &w, &dirs, &ops.d, 9.81, 1e-8, &mut out);
        assert!(out.iter().flatten().all(|v| v.abs() < 1e-12));
        let evals = split_volume(n, &w, &dirs, &ops.d, 9.81, 1e-8, &mut out);
        assert_eq!(evals, 2 * 125);
        assert!(out.iter().flatten().all(|v| v.abs() < 1e-12));
    }
}
