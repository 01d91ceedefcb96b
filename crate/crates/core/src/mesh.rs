//! Curvilinear quadrilateral meshes built by transfinite interpolation.
//!
//! Nodal arrays are element-major: node `(i, j)` of element `e` sits at
//! `e * np * np + i * np + j`, with `i` along xi and `j` along eta.

use crate::error::{Result, SweError};
use crate::operators1d::Operators1D;
use crate::physics::State;

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Wall,
    Periodic,
}

/// Element sides in counter-clockwise order.
pub const SOUTH: usize = 0;
pub const EAST: usize = 1;
pub const NORTH: usize = 2;
pub const WEST: usize = 3;

/// `+1` for sides where the outward direction is the positive reference axis.
#[inline]
pub fn side_sign(side: usize) -> f64 {
    match side {
        EAST | NORTH => 1.0,
        _ => -1.0,
    }
}

/// Volume node index of face node `k` on `side`.
#[inline]
pub fn face_node(side: usize, k: usize, n: usize) -> usize {
    let np = n + 1;
    match side {
        SOUTH => k * np,
        EAST => n * np + k,
        NORTH => k * np + n,
        _ => k,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Face {
    pub elem_m: usize,
    pub side_m: usize,
    /// Equal to `elem_m` on walls.
    pub elem_p: usize,
    pub side_p: usize,
    /// Plus-side face node order runs opposite to the minus side.
    pub reversed: bool,
    pub wall: bool,
}

impl Face {
    #[inline]
    pub fn plus_node(&self, k: usize, n: usize) -> usize {
        if self.reversed {
            n - k
        } else {
            k
        }
    }
}

/// Mesh geometry and topology.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub n: usize,
    pub k: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub x_xi: Vec<f64>,
    pub x_eta: Vec<f64>,
    pub y_xi: Vec<f64>,
    pub y_eta: Vec<f64>,
    pub jac: Vec<f64>,
    /// Per element side face-node data at `(e * 4 + side) * np + k`.
    pub nx: Vec<f64>,
    pub ny: Vec<f64>,
    pub jsurf: Vec<f64>,
    pub faces: Vec<Face>,
    pub elem_faces: Vec<[usize; 4]>,
    /// Logical grid size for structured meshes.
    pub kx: usize,
    pub ky: usize,
}

/// Transfinite interpolation with linear blending of four boundary curves,
/// each parameterized on `[-1, 1]` in the direction of increasing xi or eta.
/// Returns nodal `(x, y)` in the element layout.
pub fn transfinite(
    south: &dyn Fn(f64) -> (f64, f64),
    east: &dyn Fn(f64) -> (f64, f64),
    north: &dyn Fn(f64) -> (f64, f64),
    west: &dyn Fn(f64) -> (f64, f64),
    ops: &Operators1D,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let corners = [
        (south(-1.0), west(-1.0)),
        (south(1.0), east(-1.0)),
        (north(1.0), east(1.0)),
        (north(-1.0), west(1.0)),
    ];
    for (a, b) in corners {
        if (a.0 - b.0).abs() > 1e-8 || (a.1 - b.1).abs() > 1e-8 {
            return Err(SweError::Mesh(format!(
                "boundary curves disagree at corner: {a:?} vs {b:?}"
            )));
        }
    }
    let c = [corners[0].0, corners[1].0, corners[2].0, corners[3].0];
    let np = ops.np();
    let xi = &ops.nodes;
    let s: Vec<_> = xi.iter().map(|&t| south(t)).collect();
    let nn: Vec<_> = xi.iter().map(|&t| north(t)).collect();
    let e: Vec<_> = xi.iter().map(|&t| east(t)).collect();
    let w: Vec<_> = xi.iter().map(|&t| west(t)).collect();
    let mut x = vec![0.0; np * np];
    let mut y = vec![0.0; np * np];
    for i in 0..np {
        for j in 0..np {
            let (a, b) = (xi[i], xi[j]);
            let blend = |p: fn(&(f64, f64)) -> f64| {
                0.5 * ((1.0 - a) * p(&w[j]) + (1.0 + a) * p(&e[j]) + (1.0 - b) * p(&s[i]) + (1.0 + b) * p(&nn[i]))
                    - 0.25
                        * ((1.0 - a) * (1.0 - b) * p(&c[0])
                            + (1.0 + a) * (1.0 - b) * p(&c[1])
                            + (1.0 + a) * (1.0 + b) * p(&c[2])
                            + (1.0 - a) * (1.0 + b) * p(&c[3]))
            };
            x[i * np + j] = blend(|q| q.0);
            y[i * np + j] = blend(|q| q.1);
        }
    }
    Ok((x, y))
}

/// Metric terms `(x_xi, x_eta, y_xi, y_eta)` of one element by differentiation.
pub fn element_metrics(x: &[f64], y: &[f64], ops: &Operators1D) -> [Vec<f64>; 4] {
    let np = ops.np();
    let d = &ops.d;
    let mut out = [
        vec![0.0; np * np],
        vec![0.0; np * np],
        vec![0.0; np * np],
        vec![0.0; np * np],
    ];
    for i in 0..np {
        for j in 0..np {
            let (mut xx, mut xe, mut yx, mut ye) = (0.0, 0.0, 0.0, 0.0);
            for m in 0..np {
                xx += d[i * np + m] * x[m * np + j];
                yx += d[i * np + m] * y[m * np + j];
                xe += d[j * np + m] * x[i * np + m];
                ye += d[j * np + m] * y[i * np + m];
            }
            out[0][i * np + j] = xx;
            out[1][i * np + j] = xe;
            out[2][i * np + j] = yx;
            out[3][i * np + j] = ye;
        }
    }
    out
}

/// Mirror state for a solid wall with unit normal `n`.
pub fn wall_state(w: &State, n: (f64, f64)) -> State {
    let un = w[1] * n.0 + w[2] * n.1;
    [w[0], w[1] - 2.0 * un * n.0, w[2] - 2.0 * un * n.1]
}

impl Mesh {
    /// Structured `kx x ky` mesh whose element edges are images of the
    /// logical grid lines under `map: [0,1]^2 -> R^2`.
    pub fn from_map(
        kx: usize,
        ky: usize,
        map: &dyn Fn(f64, f64) -> (f64, f64),
        bc_x: Boundary,
        bc_y: Boundary,
        ops: &Operators1D,
    ) -> Result<Mesh> {
        if kx == 0 || ky == 0 {
            return Err(SweError::Mesh("element counts must be positive".into()));
        }
        let n = ops.n;
        let np = n + 1;
        let nn = np * np;
        let k = kx * ky;
        let mut mesh = Mesh {
            n,
            k,
            x: vec![0.0; k * nn],
            y: vec![0.0; k * nn],
            x_xi: vec![0.0; k * nn],
            x_eta: vec![0.0; k * nn],
            y_xi: vec![0.0; k * nn],
            y_eta: vec![0.0; k * nn],
            jac: vec![0.0; k * nn],
            nx: vec![0.0; k * 4 * np],
            ny: vec![0.0; k * 4 * np],
            jsurf: vec![0.0; k * 4 * np],
            faces: Vec::new(),
            elem_faces: vec![[usize::MAX; 4]; k],
            kx,
            ky,
        };
        for iy in 0..ky {
            for ix in 0..kx {
                let e = iy * kx + ix;
                let s0 = ix as f64 / kx as f64;
                let s1 = (ix + 1) as f64 / kx as f64;
                let t0 = iy as f64 / ky as f64;
                let t1 = (iy + 1) as f64 / ky as f64;
                let lerp = |a: f64, b: f64, r: f64| a + 0.5 * (r + 1.0) * (b - a);
                let (x, y) = transfinite(
                    &|r| map(lerp(s0, s1, r), t0),
                    &|r| map(s1, lerp(t0, t1, r)),
                    &|r| map(lerp(s0, s1, r), t1),
                    &|r| map(s0, lerp(t0, t1, r)),
                    ops,
                )?;
                mesh.x[e * nn..(e + 1) * nn].copy_from_slice(&x);
                mesh.y[e * nn..(e + 1) * nn].copy_from_slice(&y);
            }
        }
        mesh.compute_geometry(ops)?;
        mesh.connect(bc_x, bc_y)?;
        Ok(mesh)
    }

    /// Uniform Cartesian mesh of `[x0, x1] x [y0, y1]`.
    pub fn cartesian(
        domain: [f64; 4],
        kx: usize,
        ky: usize,
        bc_x: Boundary,
        bc_y: Boundary,
        ops: &Operators1D,
    ) -> Result<Mesh> {
        let [x0, x1, y0, y1] = domain;
        Mesh::from_map(
            kx,
            ky,
            &|s, t| (x0 + s * (x1 - x0), y0 + t * (y1 - y0)),
            bc_x,
            bc_y,
            ops,
        )
    }

    #[inline]
    pub fn np(&self) -> usize {
        self.n + 1
    }

    #[inline]
    pub fn nodes_per_element(&self) -> usize {
        self.np() * self.np()
    }

    /// Metric tuple `(x_xi, x_eta, y_xi, y_eta)` at global node `g`.
    #[inline]
    pub fn metric(&self, g: usize) -> [f64; 4] {
        [self.x_xi[g], self.x_eta[g], self.y_xi[g], self.y_eta[g]]
    }

    #[inline]
    pub fn side_index(&self, e: usize, side: usize, k: usize) -> usize {
        (e * 4 + side) * self.np() + k
    }

    /// `J / J_surf` at a face node.
    pub fn face_scale(&self, e: usize, side: usize, k: usize) -> f64 {
        let g = e * self.nodes_per_element() + face_node(side, k, self.n);
        self.jac[g] / self.jsurf[self.side_index(e, side, k)]
    }

    /// Element area from the quadrature of `J`.
    pub fn element_area(&self, e: usize, ops: &Operators1D) -> f64 {
        let np = self.np();
        let nn = np * np;
        let mut a = 0.0;
        for i in 0..np {
            for j in 0..np {
                a += self.jac[e * nn + i * np + j] * ops.weights[i] * ops.weights[j];
            }
        }
        a
    }

    fn compute_geometry(&mut self, ops: &Operators1D) -> Result<()> {
        let np = self.np();
        let nn = np * np;
        let n = self.n;
        for e in 0..self.k {
            let r = e * nn..(e + 1) * nn;
            let [xx, xe, yx, ye] = element_metrics(&self.x[r.clone()], &self.y[r.clone()], ops);
            for l in 0..nn {
                let j = xx[l] * ye[l] - xe[l] * yx[l];
                if !(j > 0.0) {
                    return Err(SweError::NonPositiveJacobian {
                        element: e,
                        node: l,
                        jac: j,
                    });
                }
                self.jac[e * nn + l] = j;
            }
            self.x_xi[r.clone()].copy_from_slice(&xx);
            self.x_eta[r.clone()].copy_from_slice(&xe);
            self.y_xi[r.clone()].copy_from_slice(&yx);
            self.y_eta[r].copy_from_slice(&ye);
            for side in 0..4 {
                for k in 0..np {
                    let l = face_node(side, k, n);
                    let (vx, vy) = match side {
                        EAST | WEST => (ye[l], -xe[l]),
                        _ => (-yx[l], xx[l]),
                    };
                    let len = (vx * vx + vy * vy).sqrt();
                    let sg = side_sign(side);
                    let si = self.side_index(e, side, k);
                    self.nx[si] = sg * vx / len;
                    self.ny[si] = sg * vy / len;
                    self.jsurf[si] = len;
                }
            }
        }
        Ok(())
    }

    fn face_coords(&self, e: usize, side: usize) -> Vec<(f64, f64)> {
        let nn = self.nodes_per_element();
        (0..self.np())
            .map(|k| {
                let g = e * nn + face_node(side, k, self.n);
                (self.x[g], self.y[g])
            })
            .collect()
    }

    fn connect(&mut self, bc_x: Boundary, bc_y: Boundary) -> Result<()> {
        let (kx, ky) = (self.kx, self.ky);
        let mut faces = Vec::new();
        let add = |faces: &mut Vec<Face>, ef: &mut Vec<[usize; 4]>, f: Face| {
            let id = faces.len();
            ef[f.elem_m][f.side_m] = id;
            ef[f.elem_p][f.side_p] = id;
            faces.push(f);
        };
        let mut ef = std::mem::take(&mut self.elem_faces);
        for iy in 0..ky {
            for ix in 0..kx {
                let e = iy * kx + ix;
                // east neighbour
                if ix + 1 < kx || bc_x == Boundary::Periodic {
                    let p = iy * kx + (ix + 1) % kx;
                    add(&mut faces, &mut ef, Face { elem_m: e, side_m: EAST, elem_p: p, side_p: WEST, reversed: false, wall: false });
                } else {
                    add(&mut faces, &mut ef, Face { elem_m: e, side_m: EAST, elem_p: e, side_p: EAST, reversed: false, wall: true });
                }
                if ix == 0 && bc_x == Boundary::Wall {
                    add(&mut faces, &mut ef, Face { elem_m: e, side_m: WEST, elem_p: e, side_p: WEST, reversed: false, wall: true });
                }
                // north neighbour
                if iy + 1 < ky || bc_y == Boundary::Periodic {
                    let p = ((iy + 1) % ky) * kx + ix;
                    add(&mut faces, &mut ef, Face { elem_m: e, side_m: NORTH, elem_p: p, side_p: SOUTH, reversed: false, wall: false });
                } else {
                    add(&mut faces, &mut ef, Face { elem_m: e, side_m: NORTH, elem_p: e, side_p: NORTH, reversed: false, wall: true });
                }
                if iy == 0 && bc_y == Boundary::Wall {
                    add(&mut faces, &mut ef, Face { elem_m: e, side_m: SOUTH, elem_p: e, side_p: SOUTH, reversed: false, wall: true });
                }
            }
        }
        self.faces = faces;
        self.elem_faces = ef;
        self.check_faces()
    }

    /// Checks that paired face nodes coincide up to a constant periodic shift.
    fn check_faces(&self) -> Result<()> {
        for (id, f) in self.faces.iter().enumerate() {
            if f.wall {
                continue;
            }
            let cm = self.face_coords(f.elem_m, f.side_m);
            let cp = self.face_coords(f.elem_p, f.side_p);
            let k0 = f.plus_node(0, self.n);
            let shift = (cp[k0].0 - cm[0].0, cp[k0].1 - cm[0].1);
            for k in 0..self.np() {
                let q = cp[f.plus_node(k, self.n)];
                let dx = q.0 - cm[k].0 - shift.0;
                let dy = q.1 - cm[k].1 - shift.1;
                if dx.abs() > 1e-10 || dy.abs() > 1e-10 {
                    return Err(SweError::Mesh(format!("face {id} nodes do not match")));
                }
            }
        }
        Ok(())
    }

    /// Whether elements `a` and `b` are within one logical step of each other,
    /// diagonals included. Periodic wrap is not considered.
    pub fn logical_neighbors(&self, a: usize, b: usize) -> bool {
        let (ax, ay) = ((a % self.kx) as isize, (a / self.kx) as isize);
        let (bx, by) = ((b % self.kx) as isize, (b / self.kx) as isize);
        (ax - bx).abs() <= 1 && (ay - by).abs() <= 1
    }
}
