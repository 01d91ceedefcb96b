//! Shallow water variable algebra: velocities, fluxes, entropy pair.

use crate::error::{Result, SweError};

/// Conserved state `(h, hu, hv)`.
pub type State = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhysicsParams {
    pub g: f64,
    /// Nodes shallower than this get their momentum zeroed by the limiter.
    pub h_tol: f64,
    /// Velocities are zero below this depth.
    pub h_des: f64,
    /// Nodes shallower than this may not outrun the deep flow; 0 disables.
    pub h_vel: f64,
}

impl PhysicsParams {
    pub fn new(g: f64) -> Self {
        Self {
            g,
            h_tol: 1e-4,
            h_des: 1e-8,
            h_vel: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.g > 0.0) {
            return Err(SweError::InvalidArgument(format!("g must be positive, got {}", self.g)));
        }
        if !(self.h_des > 0.0 && self.h_des <= self.h_tol) {
            return Err(SweError::InvalidArgument(format!(
                "need 0 < h_des <= h_tol, got h_des={} h_tol={}",
                self.h_des, self.h_tol
            )));
        }
        if !(self.h_vel >= 0.0 && self.h_vel.is_finite()) {
            return Err(SweError::InvalidArgument(format!("h_vel must be >= 0, got {}", self.h_vel)));
        }
        Ok(())
    }
}

#[inline]
pub fn velocity(w: &State, p: &PhysicsParams) -> (f64, f64) {
    if w[0] >= p.h_des {
        (w[1] / w[0], w[2] / w[0])
    } else {
        (0.0, 0.0)
    }
}

/// Physical fluxes `(f, g)` in x and y.
pub fn physical_flux(w: &State, p: &PhysicsParams) -> (State, State) {
    let (u, v) = velocity(w, p);
    let h = w[0];
    let pr = 0.5 * p.g * h * h;
    let f = [h * u, h * u * u + pr, h * u * v];
    let g = [h * v, h * u * v, h * v * v + pr];
    (f, g)
}

/// Flux in direction `n`: `n_x f + n_y g`.
pub fn normal_flux(w: &State, n: (f64, f64), p: &PhysicsParams) -> State {
    let (f, g) = physical_flux(w, p);
    [
        n.0 * f[0] + n.1 * g[0],
        n.0 * f[1] + n.1 * g[1],
        n.0 * f[2] + n.1 * g[2],
    ]
}

/// Total energy `e` and its fluxes. Dry nodes carry only the potential part.
pub fn entropy_and_flux(w: &State, b: f64, p: &PhysicsParams) -> (f64, f64, f64) {
    let h = w[0];
    let (u, v) = velocity(w, p);
    let ke = 0.5 * (u * u + v * v);
    let e = h * ke + 0.5 * p.g * h * h + p.g * h * b;
    let a = h * ke + p.g * h * (h + b);
    (e, a * u, a * v)
}

#[inline]
pub fn entropy(w: &State, b: f64, p: &PhysicsParams) -> f64 {
    entropy_and_flux(w, b, p).0
}

/// Entropy variables `q = (g(h+b) - |u|^2/2, u, v)`.
#[inline]
pub fn entropy_vars(w: &State, b: f64, p: &PhysicsParams) -> State {
    let (u, v) = velocity(w, p);
    [p.g * (w[0] + b) - 0.5 * (u * u + v * v), u, v]
}

/// Rotates a vector into the frame whose first axis is `n`.
#[inline]
pub fn rotate(u: f64, v: f64, n: (f64, f64)) -> (f64, f64) {
    (n.0 * u + n.1 * v, -n.1 * u + n.0 * v)
}

#[inline]
pub fn unrotate(ut: f64, vt: f64, n: (f64, f64)) -> (f64, f64) {
    (n.0 * ut - n.1 * vt, n.1 * ut + n.0 * vt)
}

pub fn check_unit(n: (f64, f64)) -> Result<()> {
    let len = (n.0 * n.0 + n.1 * n.1).sqrt();
    if (len - 1.0).abs() > 1e-10 {
        return Err(SweError::InvalidArgument(format!("normal is not unit length: {len}")));
    }
    Ok(())
}

/// `max(|u_n| + sqrt(g h))` over both states.
pub fn max_wave_speed(wm: &State, wp: &State, n: (f64, f64), p: &PhysicsParams) -> f64 {
    let s = |w: &State| {
        let (u, v) = velocity(w, p);
        (n.0 * u + n.1 * v).abs() + (p.g * w[0].max(0.0)).sqrt()
    };
    s(wm).max(s(wp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn velocity_cases() {
        let p = PhysicsParams::new(9.81);
        assert_eq!(velocity(&[1.0, 2.0, 3.0], &p), (2.0, 3.0));
        assert_eq!(velocity(&[0.0, 0.0, 0.0], &p), (0.0, 0.0));
        assert_eq!(velocity(&[1e-9, 1e-9, 0.0], &p), (0.0, 0.0));
    }

    #[test]
    fn flux_values() {
        let p = PhysicsParams::new(9.81);
        let (f, g) = physical_flux(&[1.0, 0.0, 0.0], &p);
        assert_eq!(f, [0.0, 4.905, 0.0]);
        assert_eq!(g, [0.0, 0.0, 4.905]);
        let p = PhysicsParams::new(10.0);
        let (f, _) = physical_flux(&[2.0, 6.0, 0.0], &p);
        assert_eq!(f, [6.0, 38.0, 0.0]);
        let (f, g) = physical_flux(&[0.0, 0.0, 0.0], &p);
        assert_eq!(f, [0.0; 3]);
        assert_eq!(g, [0.0; 3]);
    }

    #[test]
    fn entropy_values() {
        let p = PhysicsParams::new(9.81);
        let (e, ff, gg) = entropy_and_flux(&[1.0, 0.0, 0.0], 0.0, &p);
        assert_abs_diff_eq!(e, 4.905, epsilon = 1e-15);
        assert_eq!((ff, gg), (0.0, 0.0));
        let p = PhysicsParams::new(10.0);
        let (e, ff, _) = entropy_and_flux(&[1.0, 1.0, 0.0], 1.0, &p);
        assert_abs_diff_eq!(e, 15.5, epsilon = 1e-14);
        assert_abs_diff_eq!(ff, 20.5, epsilon = 1e-14);
        assert_eq!(entropy_and_flux(&[0.0, 0.0, 0.0], 3.0, &p), (0.0, 0.0, 0.0));
        assert_eq!(entropy_vars(&[2.0, 6.0, 8.0], 1.0, &p), [17.5, 3.0, 4.0]);
    }

    #[test]
    fn rotation_cases() {
        assert_eq!(rotate(2.0, 3.0, (1.0, 0.0)), (2.0, 3.0));
        assert_eq!(rotate(2.0, 3.0, (0.0, 1.0)), (3.0, -2.0));
        assert!(check_unit((0.6, 0.8)).is_ok());
        assert!(check_unit((1.0, 1.0)).is_err());
    }

    #[test]
    fn wave_speed_cases() {
        let p = PhysicsParams::new(9.81);
        let s = max_wave_speed(&[1.0, 0.0, 0.0], &[1.0, 0.0, 0.0], (1.0, 0.0), &p);
        assert_abs_diff_eq!(s, 9.81f64.sqrt(), epsilon = 1e-15);
        let p = PhysicsParams::new(1.0);
        let s = max_wave_speed(&[1.0, 2.0, 0.0], &[4.0, 0.0, 0.0], (1.0, 0.0), &p);
        assert_abs_diff_eq!(s, 3.0, epsilon = 1e-15);
        assert_eq!(max_wave_speed(&[0.0; 3], &[0.0; 3], (1.0, 0.0), &p), 0.0);
    }

    fn hessian_fd(w: State, p: &PhysicsParams) -> [[f64; 3]; 3] {
        let step = 1e-5;
        let mut hess = [[0.0; 3]; 3];
        for a in 0..3 {
            for c in 0..3 {
                let e = |da: f64, dc: f64| {
                    let mut x = w;
                    x[a] += da;
                    x[c] += dc;
                    entropy(&x, 0.0, p)
                };
                hess[a][c] = (e(step, step) - e(step, -step) - e(-step, step) + e(-step, -step))
                    / (4.0 * step * step);
            }
        }
        hess
    }

    proptest! {
        #[test]
        fn potential_identity(h in 0.01f64..10.0, u in -5.0f64..5.0, v in -5.0f64..5.0, b in -2.0f64..2.0) {
            let p = PhysicsParams::new(9.81);
            let w = [h, h * u, h * v];
            let q = entropy_vars(&w, b, &p);
            let (f, g) = physical_flux(&w, &p);
            let (_, ef, eg) = entropy_and_flux(&w, b, &p);
            let psi_f = q.iter().zip(f).map(|(a, c)| a * c).sum::<f64>() - ef;
            let psi_g = q.iter().zip(g).map(|(a, c)| a * c).sum::<f64>() - eg;
            let scale = 1.0 + ef.abs() + eg.abs();
            prop_assert!((psi_f - 0.5 * 9.81 * h * h * u).abs() < 1e-12 * scale);
            prop_assert!((psi_g - 0.5 * 9.81 * h * h * v).abs() < 1e-12 * scale);
        }

        #[test]
        fn rotation_round_trip(u in -5.0f64..5.0, v in -5.0f64..5.0, t in 0.0f64..6.3) {
            let n = (t.cos(), t.sin());
            let (a, b) = rotate(u, v, n);
            let (x, y) = unrotate(a, b, n);
            prop_assert!((x - u).abs() < 1e-14 && (y - v).abs() < 1e-14);
        }

        #[test]
        fn rotated_flux_matches_normal_flux(h in 0.01f64..5.0, u in -3.0f64..3.0, v in -3.0f64..3.0, t in 0.0f64..6.3) {
            let p = PhysicsParams::new(9.81);
            let n = (t.cos(), t.sin());
            let w = [h, h * u, h * v];
            let (ut, vt) = rotate(u, v, n);
            let (fr, _) = physical_flux(&[h, h * ut, h * vt], &p);
            let (m2, m3) = unrotate(fr[1], fr[2], n);
            let direct = normal_flux(&w, n, &p);
            prop_assert!((fr[0] - direct[0]).abs() < 1e-13);
            prop_assert!((m2 - direct[1]).abs() < 1e-12 && (m3 - direct[2]).abs() < 1e-12);
        }

        #[test]
        fn entropy_is_convex(h in 0.1f64..5.0, u in -3.0f64..3.0, v in -3.0f64..3.0) {
            let p = PhysicsParams::new(9.81);
            let m = hessian_fd([h, h * u, h * v], &p);
            for a in 0..3 {
                for c in 0..3 {
                    prop_assert!((m[a][c] - m[c][a]).abs() < 1e-4 * (1.0 + m[a][c].abs()));
                }
            }
            // Sylvester's criterion
            let d1 = m[0][0];
            let d2 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            let d3 = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
                - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
            prop_assert!(d1 > 0.0 && d2 > 0.0 && d3 > 0.0);
        }
    }
}
