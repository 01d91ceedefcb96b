//! Positivity-preserving scaling limiter and mean-positivity time step bounds.

use crate::dg::Discretization;
use crate::error::{Result, SweError};
use crate::mesh;
use crate::operators1d::Operators1D;
use crate::physics::{self, PhysicsParams, State};

/// Averages below this magnitude are treated as round-off.
const NEG_MEAN_ROUNDOFF: f64 = 1e-14;

/// `J`-weighted element averages of `(h, hu, hv)` and the element area.
pub fn element_average(w: &[State], jac: &[f64], ops: &Operators1D) -> (State, f64) {
    let np = ops.np();
    let mut s = [0.0; 3];
    let mut area = 0.0;
    for i in 0..np {
        for j in 0..np {
            let l = i * np + j;
            let c = jac[l] * ops.weights[i] * ops.weights[j];
            area += c;
            for k in 0..3 {
                s[k] += c * w[l][k];
            }
        }
    }
    ([s[0] / area, s[1] / area, s[2] / area], area)
}

/// Scales an element toward its average so the minimum depth is non-negative.
/// Returns the scaling factor `theta`.
pub fn scale_element(w: &mut [State], jac: &[f64], ops: &Operators1D) -> std::result::Result<f64, f64> {
    let (mean, _) = element_average(w, jac, ops);
    let hbar = mean[0];
    let m = w.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min);
    if m >= 0.0 {
        return Ok(1.0);
    }
    if hbar < -NEG_MEAN_ROUNDOFF {
        return Err(hbar);
    }
    if hbar <= 0.0 {
        for s in w.iter_mut() {
            *s = [0.0; 3];
        }
        return Ok(0.0);
    }
    let gap = hbar - m;
    let theta = if gap < 1e-14 { 1.0 } else { (hbar / gap).min(1.0) };
    for s in w.iter_mut() {
        for k in 0..3 {
            s[k] = theta * (s[k] - mean[k]) + mean[k];
        }
        if s[0] < 0.0 {
            s[0] = 0.0;
        }
    }
    Ok(theta)
}

/// Zeroes momentum where `h < h_tol`. Returns the number of such nodes.
pub fn zero_dry_velocities(w: &mut [State], h_tol: f64) -> usize {
    let mut count = 0;
    for s in w.iter_mut() {
        if s[0] < h_tol {
            s[1] = 0.0;
            s[2] = 0.0;
            count += 1;
        }
    }
    count
}

/// Fastest signal speed `|u| + 2 sqrt(g h)` over the given states with
/// `h >= h_vel`, and at least `2 sqrt(g h_vel)`.
pub fn reference_speed(w: &[State], p: &PhysicsParams) -> f64 {
    let floor = 2.0 * (p.g * p.h_vel).sqrt();
    w.iter()
        .filter(|s| s[0] >= p.h_vel)
        .map(|s| {
            let (u, v) = physics::velocity(s, p);
            (u * u + v * v).sqrt() + 2.0 * (p.g * s[0]).sqrt()
        })
        .fold(floor, f64::max)
}

/// Rescales momentum at nodes with `h < h_vel` whose speed exceeds `s_max`.
/// Depth is unchanged and kinetic energy can only drop. Returns the number
/// of nodes touched.
pub fn cap_thin_speeds(w: &mut [State], s_max: f64, p: &PhysicsParams) -> usize {
    let mut count = 0;
    for s in w.iter_mut().filter(|s| s[0] < p.h_vel) {
        let (u, v) = physics::velocity(s, p);
        let speed = (u * u + v * v).sqrt();
        if speed > s_max {
            let f = s_max / speed;
            s[1] *= f;
            s[2] *= f;
            count += 1;
        }
    }
    count
}

/// Scaling followed by dry-node momentum zeroing.
pub fn limit_element(
    w: &mut [State],
    jac: &[f64],
    ops: &Operators1D,
    params: &PhysicsParams,
) -> std::result::Result<f64, f64> {
    let theta = scale_element(w, jac, ops)?;
    zero_dry_velocities(w, params.h_tol);
    Ok(theta)
}

#[derive(Clone, Debug, Default)]
pub struct LimiterReport {
    pub theta: Vec<f64>,
    pub n_limited: usize,
    pub dry_nodes: usize,
    /// Thin nodes whose speed was capped.
    pub capped: usize,
    pub min_h_before: f64,
    pub min_h_after: f64,
}

/// Limits every element of a field, then caps speeds at thin nodes.
pub fn limit_field(d: &Discretization, w: &mut [State]) -> Result<LimiterReport> {
    let nn = d.nn();
    let mut rep = LimiterReport {
        theta: vec![1.0; d.mesh.k],
        min_h_before: f64::INFINITY,
        min_h_after: f64::INFINITY,
        ..Default::default()
    };
    for e in 0..d.mesh.k {
        let we = &mut w[e * nn..(e + 1) * nn];
        let mb = we.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min);
        rep.min_h_before = rep.min_h_before.min(mb);
        let theta = scale_element(we, &d.mesh.jac[e * nn..(e + 1) * nn], &d.ops)
            .map_err(|mean| SweError::NegativeMean { element: e, mean })?;
        rep.dry_nodes += zero_dry_velocities(we, d.params.h_tol);
        if theta < 1.0 {
            rep.n_limited += 1;
        }
        rep.theta[e] = theta;
        let ma = we.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min);
        rep.min_h_after = rep.min_h_after.min(ma);
    }
    if d.params.h_vel > 0.0 {
        // element means are free of the nodal spikes being capped
        let means: Vec<State> = (0..d.mesh.k)
            .map(|e| element_average(&w[e * nn..(e + 1) * nn], &d.mesh.jac[e * nn..(e + 1) * nn], &d.ops).0)
            .collect();
        let s_max = reference_speed(&means, &d.params);
        rep.capped = cap_thin_speeds(w, s_max, &d.params);
    }
    Ok(rep)
}

/// The two mean-positivity time step bounds for one face node, seen from
/// the element owning `wm`. `a` is `J / J_surf` at the node.
pub fn positivity_dt_bounds(
    wm: &State,
    wp: &State,
    n: (f64, f64),
    omega0: f64,
    a: f64,
    p: &PhysicsParams,
) -> (f64, f64) {
    let (um, vm) = physics::velocity(wm, p);
    let (up, vp) = physics::velocity(wp, p);
    let utm = n.0 * um + n.1 * vm;
    let utp = n.0 * up + n.1 * vp;
    let u = 0.5 * (utm + utp);
    let c = 0.5 * ((p.g * wm[0].max(0.0)).sqrt() + (p.g * wp[0].max(0.0)).sqrt());
    let big_a = (u + c).abs() + (u - c).abs();
    let big_b = (u + c).abs() - (u - c).abs();
    let den = big_a + 2.0 * u;
    let b1 = if den > 0.0 { omega0 * a / den } else { f64::INFINITY };
    let jump = utp - utm;
    let b2 = if wm[0] > 0.0 && big_b * jump < 0.0 {
        (omega0 * a * p.g * wm[0] / (c * big_b * jump)).abs()
    } else {
        f64::INFINITY
    };
    (b1, b2)
}

/// Smallest mean-positivity bound over all element face nodes.
pub fn field_dt_bound(d: &Discretization, w: &[State]) -> f64 {
    let m = &d.mesh;
    let nn = d.nn();
    let np = m.np();
    let n = m.n;
    let omega0 = d.ops.weights[0];
    let mut best = f64::INFINITY;
    for e in 0..m.k {
        for side in 0..4 {
            let f = &m.faces[m.elem_faces[e][side]];
            for k in 0..np {
                let g = e * nn + mesh::face_node(side, k, n);
                let si = m.side_index(e, side, k);
                let nrm = (m.nx[si], m.ny[si]);
                let wp = if f.wall {
                    mesh::wall_state(&w[g], nrm)
                } else if f.elem_m == e && f.side_m == side {
                    w[f.elem_p * nn + mesh::face_node(f.side_p, f.plus_node(k, n), n)]
                } else {
                    let km = if f.reversed { n - k } else { k };
                    w[f.elem_m * nn + mesh::face_node(f.side_m, km, n)]
                };
                let (b1, b2) = positivity_dt_bounds(&w[g], &wp, nrm, omega0, m.face_scale(e, side, k), &d.params);
                best = best.min(b1).min(b2);
            }
        }
    }
    best
}

/// Quadrature entropies of an element before and after limiting.
pub fn limited_entropy_check(
    before: &[State],
    after: &[State],
    b: &[f64],
    jac: &[f64],
    ops: &Operators1D,
    p: &PhysicsParams,
) -> (f64, f64) {
    let np = ops.np();
    let mut e0 = 0.0;
    let mut e1 = 0.0;
    for i in 0..np {
        for j in 0..np {
            let l = i * np + j;
            let c = jac[l] * ops.weights[i] * ops.weights[j];
            e0 += c * physics::entropy(&before[l], b[l], p);
            e1 += c * physics::entropy(&after[l], b[l], p);
        }
    }
    (e0, e1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn wet_element_untouched() {
        let ops = Operators1D::new(2).unwrap();
        let jac = vec![0.25; 9];
        let mut w: Vec<State> = (0..9).map(|k| [1.0 + k as f64 * 0.1, 0.2, 0.0]).collect();
        let orig = w.clone();
        assert_eq!(scale_element(&mut w, &jac, &ops), Ok(1.0));
        assert_eq!(w, orig);
    }

    #[test]
    fn theta_example() {
        // N = 1 with unit weights: four equally weighted nodes.
        let ops = Operators1D::new(1).unwrap();
        let jac = vec![1.0; 4];
        let mut w = vec![[-0.1, 0.0, 0.0], [1.2, 0.0, 0.0], [1.2, 0.0, 0.0], [1.3, 0.0, 0.0]];
        let theta = scale_element(&mut w, &jac, &ops).unwrap();
        assert_abs_diff_eq!(theta, 0.9, epsilon = 1e-14);
        let m = w.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min);
        assert_abs_diff_eq!(m, 0.0, epsilon = 1e-15);
        let (mean, _) = element_average(&w, &jac, &ops);
        assert_abs_diff_eq!(mean[0], 0.9, epsilon = 1e-14);
    }

    #[test]
    fn negative_mean_rejected() {
        let ops = Operators1D::new(1).unwrap();
        let jac = vec![1.0; 4];
        let mut w = vec![[-1.0, 0.0, 0.0], [0.1, 0.0, 0.0], [0.1, 0.0, 0.0], [0.1, 0.0, 0.0]];
        assert!(scale_element(&mut w, &jac, &ops).is_err());
    }

    #[test]
    fn dry_momentum_zeroed() {
        let mut w = vec![[5e-5, 1.0, 1.0], [1.0, 1.0, 1.0]];
        assert_eq!(zero_dry_velocities(&mut w, 1e-4), 1);
        assert_eq!(w[0], [5e-5, 0.0, 0.0]);
        assert_eq!(w[1], [1.0, 1.0, 1.0]);
    }

    #[test]
    fn rest_state_bounds() {
        let p = PhysicsParams::new(9.81);
        let w = [2.0, 0.0, 0.0];
        let (b1, b2) = positivity_dt_bounds(&w, &w, (1.0, 0.0), 1.0 / 6.0, 0.8, &p);
        let c = (9.81f64 * 2.0).sqrt();
        assert_abs_diff_eq!(b1, (0.8 / 6.0) / (2.0 * c), epsilon = 1e-15);
        assert_eq!(b2, f64::INFINITY);
        let (_, b2) = positivity_dt_bounds(&[0.0; 3], &[1.0, 3.0, 0.0], (1.0, 0.0), 0.5, 1.0, &p);
        assert_eq!(b2, f64::INFINITY);
    }

    #[test]
    fn flattening_lowers_entropy() {
        let ops = Operators1D::new(3).unwrap();
        let jac = vec![0.3; 16];
        let b = vec![0.1; 16];
        let p = PhysicsParams::new(9.81);
        let w: Vec<State> = (0..16).map(|k| [0.5 + 0.1 * k as f64, 0.3 * k as f64, -0.2]).collect();
        let (mean, _) = element_average(&w, &jac, &ops);
        let flat = vec![mean; 16];
        let (e0, e1) = limited_entropy_check(&w, &flat, &b, &jac, &ops, &p);
        assert!(e1 <= e0);
        let (e0, e1) = limited_entropy_check(&w, &w, &b, &jac, &ops, &p);
        assert_eq!(e0, e1);
    }

    #[test]
    fn thin_speeds_capped() {
        let p = PhysicsParams { h_vel: 1e-2, ..PhysicsParams::new(9.81) };
        let mut w = vec![[1e-3, 3.0, 4.0], [1e-3, 1e-3, 0.0], [1.0, 50.0, 0.0]];
        let s_max = reference_speed(&w, &p);
        assert_abs_diff_eq!(s_max, 50.0 + 2.0 * 9.81f64.sqrt(), epsilon = 1e-12);
        assert_eq!(cap_thin_speeds(&mut w, 10.0, &p), 1);
        assert_abs_diff_eq!(w[0][1], 0.006, epsilon = 1e-15);
        assert_abs_diff_eq!(w[0][2], 0.008, epsilon = 1e-15);
        assert_eq!(w[1], [1e-3, 1e-3, 0.0]);
        assert_eq!(w[2], [1.0, 50.0, 0.0]);
    }

    #[test]
    fn reference_speed_floor() {
        let p = PhysicsParams { h_vel: 1e-2, ..PhysicsParams::new(10.0) };
        let w = vec![[1e-3, 1.0, 0.0]; 4];
        assert_abs_diff_eq!(reference_speed(&w, &p), 2.0 * 0.1f64.sqrt(), epsilon = 1e-15);
    }

    fn random_element(vals: &[f64]) -> Vec<State> {
        vals.chunks(3).map(|c| [c[0], c[1], c[2]]).collect()
    }

    proptest! {
        // At rest over flat bottom the entropy is convex in h on the whole
        // line, so moving nodes toward the mean cannot raise it.
        #[test]
        fn rest_limiting_lowers_entropy(h in proptest::collection::vec(-0.2f64..2.0, 16), b in -1.0f64..1.0) {
            let ops = Operators1D::new(3).unwrap();
            let jac = vec![0.7; 16];
            let p = PhysicsParams::new(9.81);
            let mut w: Vec<State> = h.iter().map(|&v| [v, 0.0, 0.0]).collect();
            prop_assume!(element_average(&w, &jac, &ops).0[0] > 0.0);
            let w0 = w.clone();
            limit_element(&mut w, &jac, &ops, &p).unwrap();
            let (e0, e1) = limited_entropy_check(&w0, &w, &vec![b; 16], &jac, &ops, &p);
            prop_assert!(e1 <= e0 + 1e-12 * e0.abs().max(1.0));
        }

        // Non-negative nodes are only touched by momentum zeroing and the
        // speed cap, and both remove kinetic energy.
        #[test]
        fn wet_limiting_lowers_entropy(vals in proptest::collection::vec(0.0f64..2.0, 48), b in proptest::collection::vec(-1.0f64..1.0, 16)) {
            let ops = Operators1D::new(3).unwrap();
            let jac = vec![0.7; 16];
            let p = PhysicsParams { h_vel: 0.5, ..PhysicsParams::new(9.81) };
            let mut w = random_element(&vals);
            for s in w.iter_mut() {
                s[0] *= s[0];
            }
            let w0 = w.clone();
            limit_element(&mut w, &jac, &ops, &p).unwrap();
            cap_thin_speeds(&mut w, 1.0, &p);
            let (e0, e1) = limited_entropy_check(&w0, &w, &b, &jac, &ops, &p);
            prop_assert!(e1 <= e0 + 1e-12 * e0.abs().max(1.0));
        }
    }
}
