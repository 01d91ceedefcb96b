//! Two-point volume fluxes and numerical interface fluxes.

use crate::physics::{self, PhysicsParams, State};
use crate::real::Real;

/// Nodal quantities consumed by the volume kernels.
#[derive(Clone, Copy, Debug)]
pub struct Prim<T> {
    pub h: T,
    pub hu: T,
    pub hv: T,
    pub u: T,
    pub v: T,
}

impl<T: Real> Prim<T> {
    #[inline]
    pub fn from_state(w: [T; 3], h_des: T) -> Self {
        let (u, v) = if w[0] >= h_des {
            (w[1] / w[0], w[2] / w[0])
        } else {
            (T::zero(), T::zero())
        };
        Prim {
            h: w[0],
            hu: w[1],
            hv: w[2],
            u,
            v,
        }
    }
}

/// Entropy conserving split-form volume fluxes `(F#, G#)`.
#[inline]
pub fn volume_flux_sharp<T: Real>(a: &Prim<T>, b: &Prim<T>, g: T) -> ([T; 3], [T; 3]) {
    let half = T::from_f64(0.5);
    let h = half * (a.h + b.h);
    let h2 = half * (a.h * a.h + b.h * b.h);
    let hu = half * (a.hu + b.hu);
    let hv = half * (a.hv + b.hv);
    let u = half * (a.u + b.u);
    let v = half * (a.v + b.v);
    let p = g * h * h - half * g * h2;
    ([hu, hu * u + p, hu * v], [hv, hv * u, hv * v + p])
}

/// Curvilinear two-point fluxes `(F~, G~)` from averaged metric terms
/// `m = (x_xi, x_eta, y_xi, y_eta)`.
#[inline]
pub fn contravariant<T: Real>(f: &[T; 3], g: &[T; 3], m: [T; 4]) -> ([T; 3], [T; 3]) {
    let [x_xi, x_eta, y_xi, y_eta] = m;
    let mut ft = [T::zero(); 3];
    let mut gt = [T::zero(); 3];
    for k in 0..3 {
        ft[k] = f[k] * y_eta - g[k] * x_eta;
        gt[k] = -(f[k] * y_xi) + g[k] * x_xi;
    }
    (ft, gt)
}

/// Two-point contravariant volume flux between two nodes with their metrics.
#[inline]
pub fn contravariant_volume_flux(
    wa: &State,
    ma: [f64; 4],
    wb: &State,
    mb: [f64; 4],
    p: &PhysicsParams,
) -> ([f64; 3], [f64; 3]) {
    let a = Prim::from_state(*wa, p.h_des);
    let b = Prim::from_state(*wb, p.h_des);
    let (f, g) = volume_flux_sharp(&a, &b, p.g);
    let m = [
        0.5 * (ma[0] + mb[0]),
        0.5 * (ma[1] + mb[1]),
        0.5 * (ma[2] + mb[2]),
        0.5 * (ma[3] + mb[3]),
    ];
    contravariant(&f, &g, m)
}

/// Entropy conserving interface fluxes `(F*, G*)`.
pub fn ec_surface_flux(wm: &State, wp: &State, p: &PhysicsParams) -> (State, State) {
    let (um, vm) = physics::velocity(wm, p);
    let (up, vp) = physics::velocity(wp, p);
    let h = 0.5 * (wm[0] + wp[0]);
    let h2 = 0.5 * (wm[0] * wm[0] + wp[0] * wp[0]);
    let u = 0.5 * (um + up);
    let v = 0.5 * (vm + vp);
    let pr = 0.5 * p.g * h2;
    (
        [h * u, h * u * u + pr, h * u * v],
        [h * v, h * u * v, h * v * v + pr],
    )
}

/// Eigen-decomposed dissipation operator in the frame rotated to a face normal.
#[derive(Clone, Copy, Debug)]
pub struct Dissipation {
    /// Right eigenvectors, row-major.
    pub r: [[f64; 3]; 3],
    /// Diagonal of the scaled eigenvalue matrix.
    pub lam: [f64; 3],
    pub c_avg: f64,
    pub a: f64,
    pub b: f64,
}

impl Dissipation {
    /// Built from averaged rotated quantities.
    pub fn new(h_avg: f64, u_avg: f64, v_avg: f64, c_avg: f64, g: f64) -> Self {
        let lp = (u_avg + c_avg).abs();
        let lm = (u_avg - c_avg).abs();
        Dissipation {
            r: [
                [1.0, 0.0, 1.0],
                [u_avg + c_avg, 0.0, u_avg - c_avg],
                [v_avg, 1.0, v_avg],
            ],
            lam: [lp / (2.0 * g), (h_avg * u_avg).abs(), lm / (2.0 * g)],
            c_avg,
            a: lp + lm,
            b: lp - lm,
        }
    }

    /// `R |Lambda| R^T dq`.
    pub fn apply(&self, dq: &[f64; 3]) -> [f64; 3] {
        let mut z = [0.0; 3];
        for k in 0..3 {
            z[k] = self.lam[k] * (0..3).map(|i| self.r[i][k] * dq[i]).sum::<f64>();
        }
        let mut out = [0.0; 3];
        for i in 0..3 {
            out[i] = (0..3).map(|k| self.r[i][k] * z[k]).sum();
        }
        out
    }
}

/// Averaged quantities of a face pair in the frame rotated to `n`.
struct Rotated {
    hm: f64,
    hp: f64,
    um: f64,
    up: f64,
    vm: f64,
    vp: f64,
    cm: f64,
    cp: f64,
}

fn rotated_pair(wm: &State, wp: &State, n: (f64, f64), p: &PhysicsParams) -> Rotated {
    let (um, vm) = physics::velocity(wm, p);
    let (up, vp) = physics::velocity(wp, p);
    let (um, vm) = physics::rotate(um, vm, n);
    let (up, vp) = physics::rotate(up, vp, n);
    Rotated {
        hm: wm[0],
        hp: wp[0],
        um,
        up,
        vm,
        vp,
        cm: (p.g * wm[0].max(0.0)).sqrt(),
        cp: (p.g * wp[0].max(0.0)).sqrt(),
    }
}

/// Dissipation operator of a face pair together with the rotated entropy
/// variable jump it acts on.
pub fn face_dissipation(
    wm: &State,
    wp: &State,
    bm: f64,
    bp: f64,
    n: (f64, f64),
    p: &PhysicsParams,
) -> (Dissipation, [f64; 3]) {
    let r = rotated_pair(wm, wp, n, p);
    let d = Dissipation::new(
        0.5 * (r.hm + r.hp),
        0.5 * (r.um + r.up),
        0.5 * (r.vm + r.vp),
        0.5 * (r.cm + r.cp),
        p.g,
    );
    let qm = p.g * (r.hm + bm) - 0.5 * (r.um * r.um + r.vm * r.vm);
    let qp = p.g * (r.hp + bp) - 0.5 * (r.up * r.up + r.vp * r.vp);
    (d, [qp - qm, r.up - r.um, r.vp - r.vm])
}

/// Entropy stable numerical flux in normal direction `n` (unit length).
pub fn es_surface_flux_normal(
    wm: &State,
    wp: &State,
    bm: f64,
    bp: f64,
    n: (f64, f64),
    p: &PhysicsParams,
) -> State {
    let r = rotated_pair(wm, wp, n, p);
    let h = 0.5 * (r.hm + r.hp);
    let h2 = 0.5 * (r.hm * r.hm + r.hp * r.hp);
    let u = 0.5 * (r.um + r.up);
    let v = 0.5 * (r.vm + r.vp);
    let ec = [h * u, h * u * u + 0.5 * p.g * h2, h * u * v];
    let (d, dq) = face_dissipation(wm, wp, bm, bp, n, p);
    let diss = d.apply(&dq);
    let f1 = ec[0] - 0.5 * diss[0];
    let f2 = ec[1] - 0.5 * diss[1];
    let f3 = ec[2] - 0.5 * diss[2];
    let (m2, m3) = physics::unrotate(f2, f3, n);
    [f1, m2, m3]
}

/// Closed-form first component of [`es_surface_flux_normal`].
pub fn h_flux_compact(
    wm: &State,
    wp: &State,
    bm: f64,
    bp: f64,
    n: (f64, f64),
    p: &PhysicsParams,
) -> f64 {
    let r = rotated_pair(wm, wp, n, p);
    let h = 0.5 * (r.hm + r.hp);
    let u = 0.5 * (r.um + r.up);
    let c = 0.5 * (r.cm + r.cp);
    let a = (u + c).abs() + (u - c).abs();
    let b = (u + c).abs() - (u - c).abs();
    let jump_eta = p.g * ((r.hp + bp) - (r.hm + bm));
    h * u - (a * jump_eta + c * b * (r.up - r.um)) / (4.0 * p.g)
}

/// Local Lax-Friedrichs flux.
pub fn llf_surface_flux(wm: &State, wp: &State, n: (f64, f64), p: &PhysicsParams) -> State {
    let fm = physics::normal_flux(wm, n, p);
    let fp = physics::normal_flux(wp, n, p);
    let lam = physics::max_wave_speed(wm, wp, n, p);
    let mut out = [0.0; 3];
    for k in 0..3 {
        out[k] = 0.5 * (fm[k] + fp[k]) - 0.5 * lam * (wp[k] - wm[k]);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn prim(w: State) -> Prim<f64> {
        Prim::from_state(w, 1e-8)
    }

    #[test]
    fn sharp_flux_consistency() {
        let w = [1.0, 2.0, 0.0];
        let (f, g) = volume_flux_sharp(&prim(w), &prim(w), 10.0);
        assert_eq!(f, [2.0, 9.0, 0.0]);
        assert_eq!(g, [0.0, 0.0, 5.0]);
    }

    #[test]
    fn sharp_flux_pressure_average() {
        let (f, _) = volume_flux_sharp(&prim([1.0, 0.0, 0.0]), &prim([4.0, 0.0, 0.0]), 1.0);
        assert_abs_diff_eq!(f[1], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn cartesian_contravariant() {
        let p = PhysicsParams::new(9.81);
        let wa = [1.0, 0.3, 0.2];
        let wb = [2.0, -0.1, 0.5];
        let m = [0.25, 0.0, 0.0, 0.5];
        let (ft, gt) = contravariant_volume_flux(&wa, m, &wb, m, &p);
        let (f, g) = volume_flux_sharp(&prim(wa), &prim(wb), p.g);
        for k in 0..3 {
            assert_abs_diff_eq!(ft[k], 0.5 * f[k], epsilon = 1e-15);
            assert_abs_diff_eq!(gt[k], 0.25 * g[k], epsilon = 1e-15);
        }
        let (ft, gt) = contravariant_volume_flux(&wa, [0.0; 4], &wb, [0.0; 4], &p);
        assert_eq!((ft, gt), ([0.0; 3], [0.0; 3]));
    }

    #[test]
    fn ec_flux_tadmor_example() {
        let p = PhysicsParams::new(1.0);
        let wm = [1.0, 1.0, 0.0];
        let wp = [4.0, -8.0, 0.0];
        let (f, _) = ec_surface_flux(&wm, &wp, &p);
        let qm = physics::entropy_vars(&wm, 0.0, &p);
        let qp = physics::entropy_vars(&wp, 0.0, &p);
        let lhs: f64 = (0..3).map(|k| (qp[k] - qm[k]) * f[k]).sum();
        let psi = |h: f64, u: f64| 0.5 * h * h * u;
        let rhs = psi(4.0, -2.0) - psi(1.0, 1.0);
        assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn es_flux_reduces_to_ec_for_equal_states() {
        let p = PhysicsParams::new(9.81);
        let w = [1.3, 0.4, -0.2];
        let n = (0.6, 0.8);
        let es = es_surface_flux_normal(&w, &w, 0.1, 0.1, n, &p);
        let exact = physics::normal_flux(&w, n, &p);
        for k in 0..3 {
            assert_abs_diff_eq!(es[k], exact[k], epsilon = 1e-13);
        }
    }

    #[test]
    fn compact_flux_dry_side_example() {
        let p = PhysicsParams::new(10.0);
        let f = h_flux_compact(&[1.0, 0.0, 0.0], &[0.0; 3], 0.0, 0.0, (1.0, 0.0), &p);
        let c = 0.5 * 10f64.sqrt();
        assert_abs_diff_eq!(f, c / 2.0, epsilon = 1e-14);
        let m = es_surface_flux_normal(&[1.0, 0.0, 0.0], &[0.0; 3], 0.0, 0.0, (1.0, 0.0), &p);
        assert_abs_diff_eq!(m[0], c / 2.0, epsilon = 1e-14);
        let rest = h_flux_compact(&[2.0, 0.0, 0.0], &[2.0, 0.0, 0.0], 0.0, 0.0, (0.0, 1.0), &p);
        assert_eq!(rest, 0.0);
    }

    #[test]
    fn llf_rest_example() {
        let p = PhysicsParams::new(10.0);
        let f = llf_surface_flux(&[1.0, 0.0, 0.0], &[0.1, 0.0, 0.0], (1.0, 0.0), &p);
        assert_abs_diff_eq!(f[0], 0.45 * 10f64.sqrt(), epsilon = 1e-14);
        let w = [2.0, 1.0, 3.0];
        let f = llf_surface_flux(&w, &w, (0.0, 1.0), &p);
        let e = physics::normal_flux(&w, (0.0, 1.0), &p);
        assert_eq!(f, e);
    }

    fn state() -> impl Strategy<Value = State> {
        (0.0f64..5.0, -3.0f64..3.0, -3.0f64..3.0).prop_map(|(h, u, v)| {
            if h < 1e-3 {
                [0.0, 0.0, 0.0]
            } else {
                [h, h * u, h * v]
            }
        })
    }

    proptest! {
        #[test]
        fn dissipation_is_psd(wm in state(), wp in state(), t in 0.0f64..6.3, x in proptest::array::uniform3(-1.0f64..1.0)) {
            let p = PhysicsParams::new(9.81);
            let (d, _) = face_dissipation(&wm, &wp, 0.0, 0.0, (t.cos(), t.sin()), &p);
            prop_assert!(d.lam.iter().all(|&l| l >= 0.0));
            let y = d.apply(&x);
            let qf: f64 = (0..3).map(|k| x[k] * y[k]).sum();
            prop_assert!(qf >= -1e-14);
            prop_assert!(d.a >= 2.0 * (0.5 * (d.r[1][0] + d.r[1][2])).abs() - 1e-14);
        }

        #[test]
        fn b_sign_matches_mean_velocity(u in -5.0f64..5.0, c in 0.0f64..5.0) {
            let d = Dissipation::new(1.0, u, 0.0, c, 9.81);
            prop_assert!(d.b == 0.0 || d.b.signum() == u.signum());
        }

        #[test]
        fn fluxes_are_symmetric(wa in state(), wb in state()) {
            let p = PhysicsParams::new(9.81);
            let (f1, g1) = volume_flux_sharp(&prim(wa), &prim(wb), p.g);
            let (f2, g2) = volume_flux_sharp(&prim(wb), &prim(wa), p.g);
            prop_assert_eq!(f1, f2);
            prop_assert_eq!(g1, g2);
            let (e1, h1) = ec_surface_flux(&wa, &wb, &p);
            let (e2, h2) = ec_surface_flux(&wb, &wa, &p);
            prop_assert_eq!(e1, e2);
            prop_assert_eq!(h1, h2);
        }
    }
}
