//! Semi-discrete right-hand side on a curvilinear mesh.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Result, SweError};
use crate::fluxes;
use crate::kernels;
use crate::mesh::{self, Mesh, EAST, NORTH};
use crate::operators1d::Operators1D;
use crate::physics::{self, PhysicsParams, State};
use crate::viscosity;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Split-form volume terms with entropy stable interface fluxes.
    EntropyStable,
    /// Pointwise volume terms with local Lax-Friedrichs interface fluxes.
    Standard,
}

/// External forcing `(x, y, t) -> dW/dt` added to the residual.
pub type Forcing = Arc<dyn Fn(f64, f64, f64) -> State + Send + Sync>;

#[derive(Clone)]
pub struct Discretization {
    pub ops: Operators1D,
    pub mesh: Mesh,
    pub params: PhysicsParams,
    pub mode: Mode,
    /// Nodal bathymetry.
    pub b: Vec<f64>,
    /// Contravariant directions `(y_eta, -x_eta, -y_xi, x_xi)` per node.
    pub dirs: Vec<[f64; 4]>,
    /// Bathymetry gradient terms; momentum sources are `-(g/2) h (bx, by)`.
    pub bgrad: Vec<[f64; 2]>,
    pub forcing: Option<Forcing>,
    /// Element loops run on the rayon pool when set.
    pub parallel: bool,
}

impl Discretization {
    pub fn new(
        ops: Operators1D,
        mesh: Mesh,
        params: PhysicsParams,
        mode: Mode,
        bathymetry: &dyn Fn(f64, f64) -> f64,
    ) -> Result<Self> {
        params.validate()?;
        if ops.n != mesh.n {
            return Err(SweError::InvalidArgument("operator and mesh degree differ".into()));
        }
        let b: Vec<f64> = mesh.x.iter().zip(&mesh.y).map(|(&x, &y)| bathymetry(x, y)).collect();
        let dirs = (0..mesh.x.len())
            .map(|g| [mesh.y_eta[g], -mesh.x_eta[g], -mesh.y_xi[g], mesh.x_xi[g]])
            .collect();
        let mut d = Discretization {
            ops,
            mesh,
            params,
            mode,
            b,
            dirs,
            bgrad: Vec::new(),
            forcing: None,
            parallel: true,
        };
        d.bgrad = d.bathymetry_terms();
        Ok(d)
    }

    pub fn with_forcing(mut self, f: Forcing) -> Self {
        self.forcing = Some(f);
        self
    }

    #[inline]
    pub fn nn(&self) -> usize {
        self.mesh.nodes_per_element()
    }

    pub fn num_nodes(&self) -> usize {
        self.b.len()
    }

    fn bathymetry_terms(&self) -> Vec<[f64; 2]> {
        let np = self.ops.np();
        let nn = np * np;
        let m = &self.mesh;
        let d = &self.ops.d;
        let mut out = vec![[0.0; 2]; self.b.len()];
        for e in 0..m.k {
            let o = e * nn;
            let b = &self.b[o..o + nn];
            let dxi = |f: &dyn Fn(usize) -> f64, i: usize, j: usize| {
                (0..np).map(|k| d[i * np + k] * f(k * np + j)).sum::<f64>()
            };
            let deta = |f: &dyn Fn(usize) -> f64, i: usize, j: usize| {
                (0..np).map(|k| d[j * np + k] * f(i * np + k)).sum::<f64>()
            };
            for i in 0..np {
                for j in 0..np {
                    let l = i * np + j;
                    let g = o + l;
                    let bxi = dxi(&|q| b[q], i, j);
                    let beta = deta(&|q| b[q], i, j);
                    let (xx, xe, yx, ye) = (m.x_xi[g], m.x_eta[g], m.y_xi[g], m.y_eta[g]);
                    out[g] = match self.mode {
                        Mode::EntropyStable => {
                            let d_yeb = dxi(&|q| m.y_eta[o + q] * b[q], i, j);
                            let d_yxb = deta(&|q| m.y_xi[o + q] * b[q], i, j);
                            let d_xeb = dxi(&|q| m.x_eta[o + q] * b[q], i, j);
                            let d_xxb = deta(&|q| m.x_xi[o + q] * b[q], i, j);
                            [
                                ye * bxi + d_yeb - yx * beta - d_yxb,
                                -(xe * bxi + d_xeb - xx * beta - d_xxb),
                            ]
                        }
                        Mode::Standard => [2.0 * (ye * bxi - yx * beta), 2.0 * (-xe * bxi + xx * beta)],
                    };
                }
            }
        }
        out
    }

    /// Outward numerical flux times the surface Jacobian, per face node,
    /// seen from the minus side.
    fn face_fluxes(&self, w: &[State]) -> Vec<State> {
        let np = self.ops.np();
        let nn = self.nn();
        let m = &self.mesh;
        let n = m.n;
        let p = &self.params;
        let one = |fid: usize| -> Vec<State> {
            let f = &m.faces[fid];
            (0..np)
                .map(|k| {
                    let gm = f.elem_m * nn + mesh::face_node(f.side_m, k, n);
                    let si = m.side_index(f.elem_m, f.side_m, k);
                    let nrm = (m.nx[si], m.ny[si]);
                    let wm = w[gm];
                    let (wp, bp) = if f.wall {
                        (mesh::wall_state(&wm, nrm), self.b[gm])
                    } else {
                        let gp = f.elem_p * nn + mesh::face_node(f.side_p, f.plus_node(k, n), n);
                        (w[gp], self.b[gp])
                    };
                    let fl = match self.mode {
                        Mode::EntropyStable => {
                            fluxes::es_surface_flux_normal(&wm, &wp, self.b[gm], bp, nrm, p)
                        }
                        Mode::Standard => fluxes::llf_surface_flux(&wm, &wp, nrm, p),
                    };
                    let js = m.jsurf[si];
                    [js * fl[0], js * fl[1], js * fl[2]]
                })
                .collect()
        };
        let nf = m.faces.len();
        let per_face: Vec<Vec<State>> = if self.parallel {
            (0..nf).into_par_iter().map(one).collect()
        } else {
            (0..nf).map(one).collect()
        };
        per_face.into_iter().flatten().collect()
    }

    /// Residual `dW/dt` at time `t`. `eps` holds per-element artificial
    /// viscosity; `None` or all zeros skips the viscous terms.
    pub fn rhs(&self, w: &[State], t: f64, eps: Option<&[f64]>, out: &mut [State]) {
        let np = self.ops.np();
        let nn = self.nn();
        let n = self.mesh.n;
        let flux = self.face_fluxes(w);
        let visc = match eps {
            Some(e) if e.iter().any(|&v| v > 0.0) => Some(viscosity::viscous_terms(self, w, e)),
            _ => None,
        };
        let m = &self.mesh;
        let p = &self.params;
        let body = |(e, chunk): (usize, &mut [State])| {
            let o = e * nn;
            let we = &w[o..o + nn];
            match self.mode {
                Mode::EntropyStable => kernels::split_volume(
                    n,
                    we,
                    &self.dirs[o..o + nn],
                    &self.ops.d_tilde,
                    p.g,
                    p.h_des,
                    chunk,
                ),
                Mode::Standard => kernels::standard_volume(
                    n,
                    we,
                    &self.dirs[o..o + nn],
                    &self.ops.d,
                    p.g,
                    p.h_des,
                    chunk,
                ),
            };
            for l in 0..nn {
                let s = 0.5 * p.g * we[l][0];
                chunk[l][1] += s * self.bgrad[o + l][0];
                chunk[l][2] += s * self.bgrad[o + l][1];
            }
            for side in 0..4 {
                let fid = m.elem_faces[e][side];
                let f = &m.faces[fid];
                let minus = f.elem_m == e && f.side_m == side;
                let wb = if side == EAST || side == NORTH {
                    self.ops.weights[n]
                } else {
                    self.ops.weights[0]
                };
                for k in 0..np {
                    let l = mesh::face_node(side, k, n);
                    let val = if minus {
                        flux[fid * np + k]
                    } else {
                        let km = if f.reversed { n - k } else { k };
                        let v = flux[fid * np + km];
                        [-v[0], -v[1], -v[2]]
                    };
                    let mut add = val;
                    if self.mode == Mode::Standard {
                        let si = m.side_index(e, side, k);
                        let pf = physics::normal_flux(&we[l], (m.nx[si], m.ny[si]), p);
                        for c in 0..3 {
                            add[c] -= m.jsurf[si] * pf[c];
                        }
                    }
                    for c in 0..3 {
                        chunk[l][c] += add[c] / wb;
                    }
                }
            }
            for l in 0..nn {
                let g = o + l;
                let inv_j = 1.0 / m.jac[g];
                for c in 0..3 {
                    chunk[l][c] *= -inv_j;
                }
                if let Some(v) = &visc {
                    chunk[l][1] += v[g][1] * inv_j;
                    chunk[l][2] += v[g][2] * inv_j;
                }
                if let Some(fo) = &self.forcing {
                    let s = fo(m.x[g], m.y[g], t);
                    for c in 0..3 {
                        chunk[l][c] += s[c];
                    }
                }
            }
        };
        if self.parallel {
            out.par_chunks_mut(nn).enumerate().for_each(body);
        } else {
            out.chunks_mut(nn).enumerate().for_each(body);
        }
    }

    /// Allocating convenience wrapper around [`Discretization::rhs`].
    pub fn residual(&self, w: &[State], t: f64, eps: Option<&[f64]>) -> Vec<State> {
        let mut out = vec![[0.0; 3]; w.len()];
        self.rhs(w, t, eps, &mut out);
        out
    }

    /// Quadrature of `f(node)` weighted by `J w_i w_j`.
    pub fn integrate(&self, f: impl Fn(usize) -> f64) -> f64 {
        let np = self.ops.np();
        let nn = self.nn();
        let wts = &self.ops.weights;
        let mut total = 0.0;
        for e in 0..self.mesh.k {
            let mut s = 0.0;
            for i in 0..np {
                for j in 0..np {
                    let g = e * nn + i * np + j;
                    s += f(g) * self.mesh.jac[g] * wts[i] * wts[j];
                }
            }
            total += s;
        }
        total
    }

    pub fn total_mass(&self, w: &[State]) -> f64 {
        self.integrate(|g| w[g][0])
    }

    pub fn total_entropy(&self, w: &[State]) -> f64 {
        self.integrate(|g| physics::entropy(&w[g], self.b[g], &self.params))
    }

    /// `sum q . R J w_i w_j`, the semi-discrete entropy rate.
    pub fn entropy_rate(&self, w: &[State], r: &[State]) -> f64 {
        self.integrate(|g| {
            let q = physics::entropy_vars(&w[g], self.b[g], &self.params);
            q[0] * r[g][0] + q[1] * r[g][1] + q[2] * r[g][2]
        })
    }

    /// Samples an initial condition given as `(h, u, v)` at each node.
    pub fn project(&self, f: &dyn Fn(f64, f64) -> (f64, f64, f64)) -> Vec<State> {
        self.mesh
            .x
            .iter()
            .zip(&self.mesh.y)
            .map(|(&x, &y)| {
                let (h, u, v) = f(x, y);
                [h, h * u, h * v]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::Boundary;

    fn disc(n: usize, mode: Mode, b: &dyn Fn(f64, f64) -> f64) -> Discretization {
        let ops = Operators1D::new(n).unwrap();
        let mesh = Mesh::from_map(
            4,
            3,
            &|s, t| {
                let x = 2.0 * s + 0.05 * (std::f64::consts::PI * 2.0 * t).sin();
                let y = 2.0 * t + 0.05 * (std::f64::consts::PI * 2.0 * s).sin();
                (x, y)
            },
            Boundary::Periodic,
            Boundary::Periodic,
            &ops,
        )
        .unwrap();
        Discretization::new(ops, mesh, PhysicsParams::new(9.81), mode, b).unwrap()
    }

    #[test]
    fn free_stream_preserved_on_curved_mesh() {
        for mode in [Mode::EntropyStable, Mode::Standard] {
            let d = disc(4, mode, &|_, _| 0.0);
            let w = vec![[1.3, 0.4, -0.7]; d.num_nodes()];
            let r = d.residual(&w, 0.0, None);
            let max = r.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
            // fluxes are O(10) and J is O(0.1)
            assert!(max < 1e-10, "{mode:?}: {max}");
        }
    }

    #[test]
    fn periodic_mass_is_conserved() {
        let d = disc(3, Mode::EntropyStable, &|x, y| 0.1 * (x * 3.0).sin() * y.cos());
        let w = d.project(&|x, y| (2.0 + 0.3 * (5.0 * x).sin(), 0.2 * y.cos(), -0.1));
        let r = d.residual(&w, 0.0, None);
        let dm = d.integrate(|g| r[g][0]);
        assert!(dm.abs() < 1e-12, "{dm}");
    }

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let mut d = disc(3, Mode::EntropyStable, &|x, _| 0.1 * x);
        let w = d.project(&|x, y| (2.0 + 0.3 * (5.0 * x).sin(), 0.2 * y.cos(), -0.1));
        let a = d.residual(&w, 0.0, None);
        d.parallel = false;
        let b = d.residual(&w, 0.0, None);
        assert_eq!(a, b);
    }
}
