//! Artificial viscosity: modal smoothness indicator, per-element coefficient,
//! BR1 velocity gradients and the viscous momentum terms.

use rayon::prelude::*;

use crate::dg::Discretization;
use crate::error::{Result, SweError};
use crate::mesh::{self, EAST, NORTH};
use crate::operators1d::Operators1D;
use crate::physics::{self, State};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViscosityConfig {
    pub enabled: bool,
    pub epsilon0: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
}

impl ViscosityConfig {
    /// Threshold band centred on the usual `N`-dependent smoothness level.
    pub fn with_default_band(n: usize, epsilon0: f64) -> Self {
        let (sigma_min, sigma_max) = default_band(n);
        Self {
            enabled: epsilon0 > 0.0,
            epsilon0,
            sigma_min,
            sigma_max,
        }
    }

    pub fn disabled() -> Self {
        Self {
            enabled: false,
            epsilon0: 0.0,
            sigma_min: -1.0,
            sigma_max: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon0 >= 0.0) {
            return Err(SweError::InvalidArgument("epsilon0 must be non-negative".into()));
        }
        if !(self.sigma_min < self.sigma_max) {
            return Err(SweError::InvalidArgument("sigma_min must be below sigma_max".into()));
        }
        Ok(())
    }
}

pub fn default_band(n: usize) -> (f64, f64) {
    let smin = -(4.0 + 4.25 * (n.max(1) as f64).log10()) - 1.0;
    (smin, smin + 2.0)
}

/// Base-10 log of the larger of the two modal truncation energy ratios of a
/// nodal element field. Returns `-inf` when no top-shell energy is present
/// or the field is identically zero.
pub fn shock_indicator(h: &[f64], ops: &Operators1D) -> f64 {
    let n = ops.n;
    if n < 2 {
        return f64::NEG_INFINITY;
    }
    let np = n + 1;
    let c = ops.modal_2d(h);
    let sq = |i: usize, j: usize| c[i * np + j] * c[i * np + j];
    let shell = |m: usize| {
        let mut s = sq(m, m);
        for i in 0..m {
            s += sq(i, m) + sq(m, i);
        }
        s
    };
    let total = |m: usize| {
        let mut s = 0.0;
        for i in 0..=m {
            for j in 0..=m {
                s += sq(i, j);
            }
        }
        s
    };
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    let r = ratio(shell(n), total(n)).max(ratio(shell(n - 1), total(n - 1)));
    if r > 0.0 {
        r.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// Maps an indicator value to the element viscosity.
pub fn viscosity_coefficient(sigma: f64, cfg: &ViscosityConfig) -> f64 {
    if !cfg.enabled || sigma < cfg.sigma_min {
        0.0
    } else if sigma < cfg.sigma_max {
        let mid = 0.5 * (cfg.sigma_max + cfg.sigma_min);
        let delta = 1.0
            + (std::f64::consts::PI * (sigma - mid) / (cfg.sigma_max - cfg.sigma_min)).sin();
        0.5 * cfg.epsilon0 * delta
    } else {
        cfg.epsilon0
    }
}

/// Per-element viscosity computed from the water height. Elements without a
/// node at or above `h_tol` get none.
pub fn element_viscosity(d: &Discretization, w: &[State], cfg: &ViscosityConfig) -> Vec<f64> {
    let nn = d.nn();
    if !cfg.enabled || d.ops.n < 2 {
        return vec![0.0; d.mesh.k];
    }
    let h_tol = d.params.h_tol;
    let one = |e: usize| {
        let h: Vec<f64> = w[e * nn..(e + 1) * nn].iter().map(|s| s[0]).collect();
        // round-off residue in a dry element is all high modes
        if h.iter().all(|&v| v < h_tol) {
            return 0.0;
        }
        viscosity_coefficient(shock_indicator(&h, &d.ops), cfg)
    };
    if d.parallel {
        (0..d.mesh.k).into_par_iter().map(one).collect()
    } else {
        (0..d.mesh.k).map(one).collect()
    }
}

/// Interface traces per face node: averages on interior faces, the interior
/// value on walls.
fn face_traces(d: &Discretization, s: &[f64]) -> Vec<f64> {
    let m = &d.mesh;
    let np = m.np();
    let nn = d.nn();
    let n = m.n;
    let mut out = vec![0.0; m.faces.len() * np];
    for (fid, f) in m.faces.iter().enumerate() {
        for k in 0..np {
            let gm = f.elem_m * nn + mesh::face_node(f.side_m, k, n);
            out[fid * np + k] = if f.wall {
                s[gm]
            } else {
                let gp = f.elem_p * nn + mesh::face_node(f.side_p, f.plus_node(k, n), n);
                0.5 * (s[gm] + s[gp])
            };
        }
    }
    out
}

/// Index into per-face arrays for element `e`, `side`, face node `k`, and
/// whether `e` is the minus element of that face.
#[inline]
fn face_slot(d: &Discretization, e: usize, side: usize, k: usize) -> (usize, bool) {
    let m = &d.mesh;
    let fid = m.elem_faces[e][side];
    let f = &m.faces[fid];
    let np = m.np();
    if f.elem_m == e && f.side_m == side {
        (fid * np + k, true)
    } else {
        let km = if f.reversed { m.n - k } else { k };
        (fid * np + km, false)
    }
}

#[inline]
fn boundary_weight(ops: &Operators1D, side: usize) -> f64 {
    if side == EAST || side == NORTH {
        ops.weights[ops.n]
    } else {
        ops.weights[0]
    }
}

/// BR1 gradient `(d/dx, d/dy)` of a nodal scalar field.
pub fn br1_gradient(d: &Discretization, s: &[f64]) -> Vec<[f64; 2]> {
    let m = &d.mesh;
    let np = m.np();
    let nn = d.nn();
    let n = m.n;
    let dm = &d.ops.d;
    let star = face_traces(d, s);
    let body = |(e, chunk): (usize, &mut [[f64; 2]])| {
        let o = e * nn;
        let mut dxi = vec![0.0; nn];
        let mut deta = vec![0.0; nn];
        for i in 0..np {
            for j in 0..np {
                let (mut a, mut b) = (0.0, 0.0);
                for q in 0..np {
                    a += dm[i * np + q] * s[o + q * np + j];
                    b += dm[j * np + q] * s[o + i * np + q];
                }
                dxi[i * np + j] = a;
                deta[i * np + j] = b;
            }
        }
        for side in 0..4 {
            let wb = boundary_weight(&d.ops, side);
            let sg = mesh::side_sign(side);
            for k in 0..np {
                let l = mesh::face_node(side, k, n);
                let (slot, _) = face_slot(d, e, side, k);
                let lift = sg * (star[slot] - s[o + l]) / wb;
                if side == EAST || side == mesh::WEST {
                    dxi[l] += lift;
                } else {
                    deta[l] += lift;
                }
            }
        }
        for l in 0..nn {
            let g = o + l;
            let dir = d.dirs[g];
            let j = m.jac[g];
            chunk[l] = [
                (dir[0] * dxi[l] + dir[2] * deta[l]) / j,
                (dir[1] * dxi[l] + dir[3] * deta[l]) / j,
            ];
        }
    };
    let mut out = vec![[0.0; 2]; s.len()];
    if d.parallel {
        out.par_chunks_mut(nn).enumerate().for_each(body);
    } else {
        out.chunks_mut(nn).enumerate().for_each(body);
    }
    out
}

/// Viscous momentum terms before division by `J`; the mass component is zero.
pub fn viscous_terms(d: &Discretization, w: &[State], eps: &[f64]) -> Vec<State> {
    let m = &d.mesh;
    let np = m.np();
    let nn = d.nn();
    let n = m.n;
    let p = &d.params;
    let (u, v): (Vec<f64>, Vec<f64>) = w.iter().map(|s| physics::velocity(s, p)).unzip();
    let gu = br1_gradient(d, &u);
    let gv = br1_gradient(d, &v);
    // Contravariant viscous fluxes (xi, eta) for the two momentum equations.
    let mut fxi = vec![[0.0; 2]; w.len()];
    let mut feta = vec![[0.0; 2]; w.len()];
    for e in 0..m.k {
        for l in 0..nn {
            let g = e * nn + l;
            let c = w[g][0] * eps[e];
            let f = [c * gu[g][0], c * gv[g][0]];
            let gg = [c * gu[g][1], c * gv[g][1]];
            let dir = d.dirs[g];
            fxi[g] = [dir[0] * f[0] + dir[1] * gg[0], dir[0] * f[1] + dir[1] * gg[1]];
            feta[g] = [dir[2] * f[0] + dir[3] * gg[0], dir[2] * f[1] + dir[3] * gg[1]];
        }
    }
    let outward = |e: usize, side: usize, k: usize| -> [f64; 2] {
        let g = e * nn + mesh::face_node(side, k, n);
        let sg = mesh::side_sign(side);
        let f = if side == EAST || side == mesh::WEST { fxi[g] } else { feta[g] };
        [sg * f[0], sg * f[1]]
    };
    let mut star = vec![[0.0; 2]; m.faces.len() * np];
    for (fid, f) in m.faces.iter().enumerate() {
        if f.wall {
            continue;
        }
        for k in 0..np {
            let a = outward(f.elem_m, f.side_m, k);
            let b = outward(f.elem_p, f.side_p, f.plus_node(k, n));
            star[fid * np + k] = [0.5 * (a[0] - b[0]), 0.5 * (a[1] - b[1])];
        }
    }
    let dm = &d.ops.d;
    let body = |(e, chunk): (usize, &mut [State])| {
        let o = e * nn;
        for i in 0..np {
            for j in 0..np {
                let mut acc = [0.0; 2];
                for q in 0..np {
                    let a = dm[i * np + q];
                    let b = dm[j * np + q];
                    let fx = fxi[o + q * np + j];
                    let fe = feta[o + i * np + q];
                    acc[0] += a * fx[0] + b * fe[0];
                    acc[1] += a * fx[1] + b * fe[1];
                }
                chunk[i * np + j] = [0.0, acc[0], acc[1]];
            }
        }
        for side in 0..4 {
            let wb = boundary_weight(&d.ops, side);
            for k in 0..np {
                let l = mesh::face_node(side, k, n);
                let (slot, minus) = face_slot(d, e, side, k);
                let s = star[slot];
                let s = if minus { s } else { [-s[0], -s[1]] };
                let own = outward(e, side, k);
                chunk[l][1] += (s[0] - own[0]) / wb;
                chunk[l][2] += (s[1] - own[1]) / wb;
            }
        }
    };
    let mut out = vec![[0.0; 3]; w.len()];
    if d.parallel {
        out.par_chunks_mut(nn).enumerate().for_each(body);
    } else {
        out.chunks_mut(nn).enumerate().for_each(body);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::Mode;
    use crate::mesh::{Boundary, Mesh};
    use crate::operators1d::legendre;
    use crate::physics::PhysicsParams;
    use approx::assert_abs_diff_eq;

    #[test]
    fn indicator_extremes() {
        let n = 5;
        let ops = Operators1D::new(n).unwrap();
        let np = n + 1;
        let top: Vec<f64> = (0..np * np)
            .map(|k| legendre(n, ops.nodes[k / np]).0 * legendre(n, ops.nodes[k % np]).0)
            .collect();
        assert_abs_diff_eq!(shock_indicator(&top, &ops), 0.0, epsilon = 1e-12);
        let low: Vec<f64> = (0..np * np)
            .map(|k| 1.0 + ops.nodes[k / np] * ops.nodes[k % np])
            .collect();
        // only round-off reaches the top shells
        assert!(shock_indicator(&low, &ops) < -25.0);
        assert_eq!(shock_indicator(&vec![0.0; np * np], &ops), f64::NEG_INFINITY);
        assert!(shock_indicator(&vec![3.0; np * np], &ops) < -25.0);
    }

    #[test]
    fn indicator_is_scale_invariant() {
        let ops = Operators1D::new(4).unwrap();
        let np = 5;
        let f: Vec<f64> = (0..np * np).map(|k| ((k * 7 % 11) as f64).sin()).collect();
        let g: Vec<f64> = f.iter().map(|v| 3.5 * v).collect();
        assert_abs_diff_eq!(shock_indicator(&f, &ops), shock_indicator(&g, &ops), epsilon = 1e-12);
    }

    #[test]
    fn indicator_decays_with_degree_for_smooth_data() {
        let mut prev = f64::INFINITY;
        for n in 4..=7 {
            let ops = Operators1D::new(n).unwrap();
            let np = n + 1;
            let f: Vec<f64> = (0..np * np)
                .map(|k| {
                    let (x, y) = (ops.nodes[k / np], ops.nodes[k % np]);
                    (-(x * x + y * y)).exp()
                })
                .collect();
            let s = shock_indicator(&f, &ops);
            assert!(s < prev, "n={n}: {s} !< {prev}");
            prev = s;
        }
    }

    #[test]
    fn coefficient_branches() {
        let cfg = ViscosityConfig {
            enabled: true,
            epsilon0: 0.2,
            sigma_min: -6.0,
            sigma_max: -4.0,
        };
        assert_eq!(viscosity_coefficient(-7.0, &cfg), 0.0);
        assert_abs_diff_eq!(viscosity_coefficient(-5.0, &cfg), 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(viscosity_coefficient(-4.0 - 1e-12, &cfg), 0.2, epsilon = 1e-10);
        assert_eq!(viscosity_coefficient(-4.0, &cfg), 0.2);
        assert_abs_diff_eq!(viscosity_coefficient(-6.0, &cfg), 0.0, epsilon = 1e-15);
        assert_eq!(viscosity_coefficient(f64::NEG_INFINITY, &cfg), 0.0);
    }

    fn periodic_disc(n: usize) -> Discretization {
        let ops = Operators1D::new(n).unwrap();
        let mesh = Mesh::cartesian([0.0, 2.0, 0.0, 1.0], 4, 2, Boundary::Periodic, Boundary::Periodic, &ops).unwrap();
        Discretization::new(ops, mesh, PhysicsParams::new(9.81), Mode::EntropyStable, &|_, _| 0.0).unwrap()
    }

    #[test]
    fn gradient_of_constant_is_zero() {
        let d = periodic_disc(3);
        let g = br1_gradient(&d, &vec![2.5; d.num_nodes()]);
        assert!(g.iter().flatten().all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn gradient_of_smooth_periodic_polynomial_trace() {
        // x on a non-periodic wall box is continuous, so BR1 is exact.
        let ops = Operators1D::new(3).unwrap();
        let mesh = Mesh::cartesian([0.0, 2.0, 0.0, 1.0], 4, 2, Boundary::Wall, Boundary::Wall, &ops).unwrap();
        let d = Discretization::new(ops, mesh, PhysicsParams::new(9.81), Mode::EntropyStable, &|_, _| 0.0).unwrap();
        let s: Vec<f64> = d.mesh.x.iter().zip(&d.mesh.y).map(|(x, y)| x - 2.0 * y).collect();
        let g = br1_gradient(&d, &s);
        for v in g {
            assert_abs_diff_eq!(v[0], 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(v[1], -2.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_viscosity_gives_zero_terms() {
        let d = periodic_disc(3);
        let w = d.project(&|x, y| (1.0 + 0.1 * x, (3.0 * y).sin(), x.cos()));
        let r = viscous_terms(&d, &w, &vec![0.0; d.mesh.k]);
        assert!(r.iter().flatten().all(|v| *v == 0.0));
    }
}
