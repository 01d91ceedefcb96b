//! Acceptance suites. Each criterion returns an [`Outcome`] with a one-line
//! summary of what was measured; the `validate` subcommand and the
//! acceptance test both run these.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bench;
use crate::dg::{Discretization, Mode};
use crate::error::{Result, SweError};
use crate::fluxes;
use crate::mesh::{self, Boundary, Mesh};
use crate::operators1d::Operators1D;
use crate::physics::{self, PhysicsParams, State};
use crate::positivity;
use crate::scenarios::{self, MeshKind, Scenario, ScenarioId};
use crate::timeloop::Simulation;
use crate::viscosity;

#[derive(Clone, Debug)]
pub struct Outcome {
    pub id: usize,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Outcome {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<22} {} ({:.1}s) {}",
            self.id,
            self.name,
            if self.passed { "PASS" } else { "FAIL" },
            self.seconds,
            self.detail
        )
    }
}

pub const SUITES: [(usize, &str); 12] = [
    (1, "operators"),
    (2, "wellbalanced"),
    (3, "flux_algebra"),
    (4, "semidiscrete_entropy"),
    (5, "entropy_glitch"),
    (6, "dambreak"),
    (7, "limiter"),
    (8, "mean_positivity"),
    (9, "viscosity"),
    (10, "convergence"),
    (11, "bench"),
    (12, "scenarios"),
];

/// Criterion ids selected by a suite name, a number, or `all`.
pub fn select(suite: &str) -> Result<Vec<usize>> {
    if suite == "all" {
        return Ok(SUITES.iter().map(|s| s.0).collect());
    }
    SUITES
        .iter()
        .find(|(id, name)| *name == suite || id.to_string() == suite)
        .map(|(id, _)| vec![*id])
        .ok_or_else(|| SweError::Config(format!("unknown suite '{suite}'")))
}

pub fn run(id: usize) -> Outcome {
    let name = SUITES.iter().find(|s| s.0 == id).map(|s| s.1).unwrap_or("unknown");
    let t0 = Instant::now();
    let res = match id {
        1 => operators(),
        2 => well_balanced(),
        3 => flux_algebra(1_000_000),
        4 => semidiscrete_entropy(100),
        5 => entropy_glitch(),
        6 => dam_break(),
        7 => limiter(100_000),
        8 => mean_positivity(10_000),
        9 => viscous_contraction(100),
        10 => convergence(),
        11 => bench_counts(),
        12 => scenario_gates(),
        _ => Err(SweError::Config(format!("no criterion {id}"))),
    };
    let (passed, detail) = match res {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    Outcome {
        id,
        name,
        passed,
        detail,
        seconds: t0.elapsed().as_secs_f64(),
    }
}

type Check = Result<(bool, String)>;

fn max_abs(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// SBP identity and quadrature exactness for `N = 1..15`.
pub fn operators() -> Check {
    let mut sbp = 0.0f64;
    let mut quad = 0.0f64;
    for n in 1..=15 {
        let ops = Operators1D::new(n)?;
        let np = n + 1;
        for i in 0..np {
            for j in 0..np {
                let q = ops.weights[i] * ops.d[i * np + j];
                let qt = ops.weights[j] * ops.d[j * np + i];
                let b = if i == j && i == 0 {
                    -1.0
                } else if i == j && i == n {
                    1.0
                } else {
                    0.0
                };
                sbp = sbp.max((q + qt - b).abs());
            }
        }
        for k in 0..2 * n {
            let num: f64 = ops.nodes.iter().zip(&ops.weights).map(|(x, w)| w * x.powi(k as i32)).sum();
            let exact = if k % 2 == 0 { 2.0 / (k as f64 + 1.0) } else { 0.0 };
            quad = quad.max((num - exact).abs());
        }
    }
    Ok((sbp <= 1e-13 && quad <= 1e-12, format!("sbp {sbp:.2e} quadrature {quad:.2e}")))
}

fn lake_at_rest(n: usize, curved: bool) -> Result<f64> {
    let mut s = Scenario::new(ScenarioId::LakeAtRest).with_degree(n);
    if curved {
        s.mesh_kind = MeshKind::CurvedDam;
        s = s.with_elements(10, 10);
    }
    s.t_final = f64::MAX;
    let mut sim = s.simulation(Mode::EntropyStable, true)?;
    let w0 = sim.w.clone();
    let b = sim.disc.b.clone();
    for _ in 0..500 {
        sim.step()?;
    }
    Ok(max_abs(sim.w.iter().zip(&w0).zip(&b).flat_map(|((w, w0), b)| {
        [(w[0] + b) - (w0[0] + b), w[1] - w0[1], w[2] - w0[2]]
    })))
}

/// Lake at rest over the bowl on Cartesian and curved meshes, 500 steps.
pub fn well_balanced() -> Check {
    let mut worst = 0.0f64;
    let mut parts = Vec::new();
    for n in [3, 7] {
        for curved in [false, true] {
            let d = lake_at_rest(n, curved)?;
            worst = worst.max(d);
            parts.push(format!("N={n}{} {d:.1e}", if curved { " curved" } else { "" }));
        }
    }
    Ok((worst <= 1e-11, format!("max drift {worst:.2e} [{}]", parts.join(", "))))
}

fn random_state(rng: &mut ChaCha8Rng, p: &PhysicsParams) -> State {
    let h = rng.gen_range(0.01..5.0);
    let c = (p.g * h).sqrt();
    let u = rng.gen_range(-2.0..2.0) * c;
    let v = rng.gen_range(-2.0..2.0) * c;
    [h, h * u, h * v]
}

fn random_normal(rng: &mut ChaCha8Rng) -> (f64, f64) {
    let a = rng.gen_range(0.0..2.0 * PI);
    (a.cos(), a.sin())
}

/// Tadmor condition, dissipation sign and compact mass flux on random pairs.
pub fn flux_algebra(samples: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = PhysicsParams::new(9.81);
    let mut tadmor = 0.0f64;
    let mut quad_min = f64::INFINITY;
    let mut compact = 0.0f64;
    for _ in 0..samples {
        let wm = random_state(&mut rng, &p);
        let wp = random_state(&mut rng, &p);
        let n = random_normal(&mut rng);
        let (f, g) = fluxes::ec_surface_flux(&wm, &wp, &p);
        let qm = physics::entropy_vars(&wm, 0.0, &p);
        let qp = physics::entropy_vars(&wp, 0.0, &p);
        let psi = |w: &State| {
            let (u, v) = physics::velocity(w, &p);
            0.5 * p.g * w[0] * w[0] * (n.0 * u + n.1 * v)
        };
        let fs: f64 = (0..3).map(|k| (qp[k] - qm[k]) * (n.0 * f[k] + n.1 * g[k])).sum();
        // relative to the size of the terms that cancel
        let scale = 1.0 + psi(&wp).abs() + psi(&wm).abs();
        tadmor = tadmor.max((fs - (psi(&wp) - psi(&wm))).abs() / scale);

        let bm = rng.gen_range(0.0..1.0);
        let bp = if rng.gen_bool(0.5) { bm } else { rng.gen_range(0.0..1.0) };
        let (d, dq) = fluxes::face_dissipation(&wm, &wp, bm, bp, n, &p);
        let dd = d.apply(&dq);
        let form: f64 = (0..3).map(|k| dq[k] * dd[k]).sum();
        quad_min = quad_min.min(form);

        let full = fluxes::es_surface_flux_normal(&wm, &wp, bm, bp, n, &p)[0];
        let cf = fluxes::h_flux_compact(&wm, &wp, bm, bp, n, &p);
        compact = compact.max((full - cf).abs() / (1.0 + full.abs()));
    }
    Ok((
        tadmor <= 1e-12 && quad_min >= -1e-14 && compact <= 1e-12,
        format!("tadmor {tadmor:.2e} min form {quad_min:.2e} compact {compact:.2e} over {samples} pairs"),
    ))
}

/// Periodic `[0,2]^2` mesh with sinusoidally bent grid lines.
pub fn curved_periodic_disc(n: usize, k: usize, mode: Mode, b: &dyn Fn(f64, f64) -> f64) -> Result<Discretization> {
    let ops = Operators1D::new(n)?;
    let mesh = Mesh::from_map(
        k,
        k,
        &|s, t| {
            (
                2.0 * s + 0.05 * (2.0 * PI * t).sin(),
                2.0 * t + 0.05 * (2.0 * PI * s).sin(),
            )
        },
        Boundary::Periodic,
        Boundary::Periodic,
        &ops,
    )?;
    Discretization::new(ops, mesh, PhysicsParams::new(9.81), mode, b)
}

/// Curved-dam mesh with walls.
pub fn curved_wall_disc(n: usize, k: usize, mode: Mode, b: &dyn Fn(f64, f64) -> f64) -> Result<Discretization> {
    let ops = Operators1D::new(n)?;
    let mesh = Mesh::from_map(k, k, &scenarios::curved_dam_map, Boundary::Wall, Boundary::Wall, &ops)?;
    Discretization::new(ops, mesh, PhysicsParams::new(9.81), mode, b)
}

/// Random nodal field with `h` in `[0.5, 1.5]` and velocities up to 1.
fn random_field(d: &Discretization, rng: &mut ChaCha8Rng) -> Vec<State> {
    (0..d.num_nodes())
        .map(|_| {
            let h = rng.gen_range(0.5..1.5);
            [h, h * rng.gen_range(-1.0..1.0), h * rng.gen_range(-1.0..1.0)]
        })
        .collect()
}

/// Sign of the semi-discrete entropy rate on curved meshes.
pub fn semidiscrete_entropy(fields: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = f64::NEG_INFINITY;
    for f in 0..fields {
        let (a, kx, ky) = (rng.gen_range(0.0..0.3), rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0));
        let b = move |x: f64, y: f64| a * (1.0 + (kx * x).sin() * (ky * y).cos());
        let n = 1 + f % 5;
        let d = if f % 2 == 0 {
            curved_periodic_disc(n, 3, Mode::EntropyStable, &b)?
        } else {
            curved_wall_disc(n, 3, Mode::EntropyStable, &b)?
        };
        let w = random_field(&d, &mut rng);
        let r = d.residual(&w, 0.0, None);
        worst = worst.max(d.entropy_rate(&w, &r));
    }
    Ok((worst <= 1e-12, format!("max entropy rate {worst:.3e} over {fields} fields")))
}

/// Largest per-step entropy increment of a run history.
fn max_entropy_increment(sim: &Simulation) -> f64 {
    sim.history
        .windows(2)
        .map(|w| w[1].entropy - w[0].entropy)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn max_mass_drift(sim: &Simulation) -> f64 {
    let m0 = sim.history[0].mass;
    sim.history.iter().map(|r| ((r.mass - m0) / m0).abs()).fold(0.0, f64::max)
}

pub fn run_to_end(s: &Scenario, mode: Mode, limiter: bool) -> Result<Simulation> {
    let mut sim = s.simulation(mode, limiter)?;
    sim.run(|_| Ok(()))?;
    Ok(sim)
}

/// Standard DG shows an entropy increase at the shock, ES does not.
pub fn entropy_glitch() -> Check {
    let s = Scenario::new(ScenarioId::EntropyGlitch).with_elements(100, 8);
    let std = run_to_end(&s, Mode::Standard, true)?;
    let es = run_to_end(&s, Mode::EntropyStable, true)?;
    let inc_std = max_entropy_increment(&std);
    let inc_es = max_entropy_increment(&es);
    Ok((
        inc_std > 1e-8 && inc_es <= 1e-10,
        format!(
            "standard max increment {inc_std:.2e} ({} steps), ES max increment {inc_es:.2e} ({} steps)",
            std.step, es.step
        ),
    ))
}

/// Invariants of a completed wet/dry run: positivity at every stage, entropy
/// non-increase relative to the initial entropy, mass conservation.
fn invariants(sim: &Simulation) -> (bool, String) {
    let e0 = sim.history[0].entropy.abs().max(f64::MIN_POSITIVE);
    let inc = max_entropy_increment(sim) / e0;
    let mass = max_mass_drift(sim);
    let ok = sim.min_stage_h >= 0.0 && inc <= 1e-10 && mass <= 1e-12;
    (
        ok,
        format!(
            "{} steps, min stage h {:.1e}, max rel entropy increment {inc:.2e}, mass drift {mass:.1e}",
            sim.step, sim.min_stage_h
        ),
    )
}

pub fn dam_break() -> Check {
    let s = Scenario::new(ScenarioId::WetDryDamBreak).with_elements(25, 25);
    let sim = run_to_end(&s, Mode::EntropyStable, true)?;
    let (ok, detail) = invariants(&sim);
    let crash = match run_to_end(&s, Mode::EntropyStable, false) {
        Err(e @ SweError::NegativeDepth { .. }) => Some(e.to_string()),
        _ => None,
    };
    Ok((
        ok && crash.is_some(),
        format!("{detail}; without limiter: {}", crash.unwrap_or_else(|| "no abort".into())),
    ))
}

fn random_element(rng: &mut ChaCha8Rng, p: &PhysicsParams) -> (Operators1D, Vec<f64>, Vec<f64>, Vec<State>) {
    let n = rng.gen_range(1..=6);
    let ops = Operators1D::new(n).expect("valid degree");
    let nn = (n + 1) * (n + 1);
    let jac: Vec<f64> = (0..nn).map(|_| rng.gen_range(0.5..1.5)).collect();
    let b: Vec<f64> = (0..nn).map(|_| rng.gen_range(0.0..1.0)).collect();
    let dry_frac = rng.gen_range(0.0..0.6);
    let mut h: Vec<f64> = (0..nn)
        .map(|_| {
            if rng.gen_bool(dry_frac) {
                rng.gen_range(-0.5..0.0)
            } else {
                rng.gen_range(0.0..2.0)
            }
        })
        .collect();
    let wts: Vec<f64> = (0..nn).map(|l| jac[l] * ops.weights[l / (n + 1)] * ops.weights[l % (n + 1)]).collect();
    let area: f64 = wts.iter().sum();
    let mean: f64 = h.iter().zip(&wts).map(|(h, w)| h * w).sum::<f64>() / area;
    if mean < 0.0 {
        let lift = -mean + rng.gen_range(0.0..0.1);
        h.iter_mut().for_each(|v| *v += lift);
    }
    let w = h
        .iter()
        .map(|&h| {
            if h > 0.0 {
                let c = (p.g * h).sqrt();
                [h, h * c * rng.gen_range(-1.0..1.0), h * c * rng.gen_range(-1.0..1.0)]
            } else {
                [h, 0.0, 0.0]
            }
        })
        .collect();
    (ops, jac, b, w)
}

/// Scaling limiter on random elements with non-negative mean.
pub fn limiter(samples: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let p = PhysicsParams::new(9.81);
    let mut min_h = f64::INFINITY;
    let mut avg_err = 0.0f64;
    let mut ent_inc = f64::NEG_INFINITY;
    let mut limited = 0usize;
    for _ in 0..samples {
        let (ops, jac, b, w0) = random_element(&mut rng, &p);
        let (m0, _) = positivity::element_average(&w0, &jac, &ops);
        let mut w = w0.clone();
        let theta = positivity::scale_element(&mut w, &jac, &ops).map_err(|m| SweError::NegativeMean { element: 0, mean: m })?;
        if theta < 1.0 {
            limited += 1;
        }
        let (m1, _) = positivity::element_average(&w, &jac, &ops);
        let scale = 1.0 + w0.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        avg_err = avg_err.max(max_abs((0..3).map(|k| (m1[k] - m0[k]) / scale)));
        positivity::zero_dry_velocities(&mut w, p.h_tol);
        let (m2, _) = positivity::element_average(&w, &jac, &ops);
        avg_err = avg_err.max((m2[0] - m0[0]).abs() / scale);
        min_h = min_h.min(w.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min));
        let (e0, e1) = positivity::limited_entropy_check(&w0, &w, &b, &jac, &ops, &p);
        ent_inc = ent_inc.max((e1 - e0) / e0.abs().max(1.0));
    }
    Ok((
        min_h >= 0.0 && avg_err <= 1e-14 && ent_inc <= 1e-12,
        format!(
            "min h {min_h:.1e}, average error {avg_err:.1e}, max entropy change {ent_inc:.2e} ({limited} of {samples} limited)"
        ),
    ))
}

/// Explicit Euler mean update through one face with `dt` just below both
/// mean-positivity bounds.
pub fn mean_positivity(samples: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p = PhysicsParams::new(9.81);
    let mut worst = f64::INFINITY;
    let mut active = 0usize;
    for _ in 0..samples {
        let n = rng.gen_range(1..=7);
        let np = n + 1;
        let ops = Operators1D::new(n)?;
        let (dx, dy) = (rng.gen_range(0.1..2.0), rng.gen_range(0.1..2.0));
        let jac = dx * dy / 4.0;
        let jsurf = dy / 2.0;
        let dry = rng.gen_range(0.0..0.7);
        let state = |rng: &mut ChaCha8Rng| -> State {
            if rng.gen_bool(dry) {
                return [0.0; 3];
            }
            let h = rng.gen_range(0.0..3.0);
            let c = (p.g * h).sqrt();
            [h, h * c * rng.gen_range(-3.0..3.0), h * c * rng.gen_range(-3.0..3.0)]
        };
        let w: Vec<State> = (0..np * np).map(|_| state(&mut rng)).collect();
        let ext: Vec<State> = (0..np).map(|_| state(&mut rng)).collect();
        let bface: Vec<f64> = (0..np).map(|_| rng.gen_range(0.0..0.5)).collect();
        let hbar: f64 = (0..np * np)
            .map(|l| ops.weights[l / np] * ops.weights[l % np] * w[l][0])
            .sum::<f64>()
            / 4.0;
        let nrm = (1.0, 0.0);
        let mut dt = f64::INFINITY;
        for k in 0..np {
            let wm = &w[mesh::face_node(mesh::EAST, k, n)];
            let (b1, b2) = positivity::positivity_dt_bounds(wm, &ext[k], nrm, ops.weights[0], jac / jsurf, &p);
            dt = dt.min(b1).min(b2);
        }
        if !dt.is_finite() {
            continue;
        }
        active += 1;
        let dt = 0.999 * dt;
        let outflow: f64 = (0..np)
            .map(|k| {
                let wm = &w[mesh::face_node(mesh::EAST, k, n)];
                ops.weights[k] * jsurf * fluxes::es_surface_flux_normal(wm, &ext[k], bface[k], bface[k], nrm, &p)[0]
            })
            .sum();
        let new = hbar - dt / (4.0 * jac) * outflow;
        worst = worst.min(new / hbar.max(1e-300).max(1.0));
    }
    Ok((
        worst >= -1e-14,
        format!("min scaled updated mean {worst:.2e} over {active} bounded configurations"),
    ))
}

/// Entropy contraction of the artificial viscosity terms.
pub fn viscous_contraction(fields: usize) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst = f64::NEG_INFINITY;
    let mut mass_max = 0.0f64;
    for f in 0..fields {
        let n = 2 + f % 4;
        let flat = |_: f64, _: f64| 0.0;
        let d = if f % 2 == 0 {
            curved_periodic_disc(n, 3, Mode::EntropyStable, &flat)?
        } else {
            curved_wall_disc(n, 3, Mode::EntropyStable, &flat)?
        };
        let c: Vec<f64> = (0..9).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let scale = if f % 2 == 0 { PI } else { 0.3 };
        let w = d.project(&|x, y| {
            let (x, y) = (scale * x, scale * y);
            (
                1.0 + 0.3 * (c[0] * x + c[1] * y).sin(),
                c[2] * (c[3] * x).cos() + c[4] * (c[5] * y).sin(),
                c[6] * (c[7] * x + c[8] * y).sin(),
            )
        });
        let eps: Vec<f64> = (0..d.mesh.k)
            .map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..0.5) })
            .collect();
        let v = viscosity::viscous_terms(&d, &w, &eps);
        mass_max = mass_max.max(max_abs(v.iter().map(|s| s[0])));
        let r: Vec<State> = v
            .iter()
            .zip(&d.mesh.jac)
            .map(|(s, j)| [s[0] / j, s[1] / j, s[2] / j])
            .collect();
        worst = worst.max(d.entropy_rate(&w, &r));
    }
    Ok((
        worst <= 1e-12 && mass_max == 0.0,
        format!("max viscous entropy rate {worst:.3e}, max mass component {mass_max:e}"),
    ))
}

/// L2 error of `h` against the exact travelling wave on a `k x k` mesh.
pub fn traveling_wave_error(n: usize, k: usize) -> Result<f64> {
    let s = Scenario::new(ScenarioId::TravelingWave).with_degree(n).with_elements(k, k);
    let sim = run_to_end(&s, Mode::EntropyStable, true)?;
    let t = sim.t;
    let m = &sim.disc.mesh;
    let err2 = sim.disc.integrate(|g| {
        let e = sim.w[g][0] - scenarios::traveling_wave_exact(m.x[g], m.y[g], t)[0];
        e * e
    });
    Ok(err2.sqrt())
}

pub fn convergence() -> Check {
    let n = 3;
    let errs: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&k| traveling_wave_error(n, k))
        .collect::<Result<_>>()?;
    let orders: Vec<f64> = errs.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok((
        min_order >= n as f64,
        format!("errors {:.2e} {:.2e} {:.2e}, orders {:.2} {:.2}", errs[0], errs[1], errs[2], orders[0], orders[1]),
    ))
}

pub fn bench_counts() -> Check {
    let k = 4096;
    let mut exact = true;
    for n in 1..=15 {
        let c = bench::count_ops(n, k)?;
        let np = (n + 1) as u64;
        exact &= c.evals_split == 2 * np.pow(3) * k as u64 && c.evals_standard == 2 * np.pow(2) * k as u64;
    }
    let c = bench::count_ops(15, 1)?;
    let ratio = c.flops_split as f64 / c.flops_standard as f64;
    let table = bench::budget_table(15, 1 << 22, 1, f64::INFINITY)?;
    let emitted = table.len() == 15 && table.iter().all(|r| r.t_split_median > 0.0);
    Ok((
        exact && (4.0..=8.0).contains(&ratio) && emitted,
        format!("closed-form counts {}, FLOP ratio at N=15 {ratio:.2}, {} table rows", if exact { "exact" } else { "MISMATCH" }, table.len()),
    ))
}

/// Elements that hold both wet and dry nodes.
pub fn front_elements(d: &Discretization, w: &[State]) -> Vec<bool> {
    let nn = d.nn();
    let tol = d.params.h_tol;
    (0..d.mesh.k)
        .map(|e| {
            let we = &w[e * nn..(e + 1) * nn];
            we.iter().any(|s| s[0] < tol) && we.iter().any(|s| s[0] >= tol)
        })
        .collect()
}

/// Oscillating lake over one period with viscosity only near the front.
pub fn oscillating_lake(k: usize) -> Result<(bool, String)> {
    let s = Scenario::new(ScenarioId::OscillatingLake).with_elements(k, k);
    let mut sim = s.simulation(Mode::EntropyStable, true)?;
    let mut stray = 0usize;
    let mut viscous_steps = 0usize;
    let mut before = front_elements(&sim.disc, &sim.w);
    while sim.t < sim.opts.t_final {
        sim.step()?;
        let after = front_elements(&sim.disc, &sim.w);
        let front: Vec<usize> = (0..sim.disc.mesh.k).filter(|&e| before[e] || after[e]).collect();
        if sim.eps.iter().any(|&e| e > 0.0) {
            viscous_steps += 1;
        }
        for (e, &eps) in sim.eps.iter().enumerate() {
            if eps > 0.0 && !front.iter().any(|&f| sim.disc.mesh.logical_neighbors(e, f)) {
                stray += 1;
            }
        }
        before = after;
    }
    let mass = max_mass_drift(&sim);
    Ok((
        mass <= 1e-12 && stray == 0 && viscous_steps > 0 && sim.min_stage_h >= 0.0 && sim.t == sim.opts.t_final,
        format!(
            "oscillating_lake {} steps, mass drift {mass:.1e}, viscous steps {viscous_steps}, off-front viscous elements {stray}",
            sim.step
        ),
    ))
}

pub fn scenario_gates() -> Check {
    let (lake_ok, lake) = oscillating_lake(50)?;
    let mut ok = lake_ok;
    let mut parts = vec![lake];
    for (id, kx, ky) in [(ScenarioId::ThreeMound, 30, 18), (ScenarioId::ParabolicDamDry, 40, 40)] {
        let s = Scenario::new(id).with_elements(kx, ky);
        let sim = run_to_end(&s, Mode::EntropyStable, true)?;
        let (o, d) = invariants(&sim);
        ok &= o && sim.t == s.t_final;
        parts.push(format!("{id} {d}"));
    }
    Ok((ok, parts.join("; ")))
}
