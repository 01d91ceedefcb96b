//! Built-in test cases: domains, meshes, bathymetries and initial data.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::dg::{Discretization, Mode};
use crate::error::{Result, SweError};
use crate::mesh::{Boundary, Mesh};
use crate::operators1d::Operators1D;
use crate::physics::{PhysicsParams, State};
use crate::timeloop::{RunOptions, Simulation};
use crate::viscosity::ViscosityConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ScenarioId {
    EntropyGlitch,
    WetDryDamBreak,
    OscillatingLake,
    ThreeMound,
    ConicalIsland,
    ParabolicDamWet,
    ParabolicDamDry,
    /// Fully wet lake at rest over a shifted parabolic bowl.
    LakeAtRest,
    /// Smooth periodic travelling wave with manufactured forcing.
    TravelingWave,
}

impl ScenarioId {
    pub const ALL: [ScenarioId; 9] = [
        ScenarioId::EntropyGlitch,
        ScenarioId::WetDryDamBreak,
        ScenarioId::OscillatingLake,
        ScenarioId::ThreeMound,
        ScenarioId::ConicalIsland,
        ScenarioId::ParabolicDamWet,
        ScenarioId::ParabolicDamDry,
        ScenarioId::LakeAtRest,
        ScenarioId::TravelingWave,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioId::EntropyGlitch => "entropy_glitch",
            ScenarioId::WetDryDamBreak => "wetdry_dambreak",
            ScenarioId::OscillatingLake => "oscillating_lake",
            ScenarioId::ThreeMound => "three_mound",
            ScenarioId::ConicalIsland => "conical_island",
            ScenarioId::ParabolicDamWet => "parabolic_dam_wet",
            ScenarioId::ParabolicDamDry => "parabolic_dam_dry",
            ScenarioId::LakeAtRest => "lake_at_rest",
            ScenarioId::TravelingWave => "traveling_wave",
        }
    }
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ScenarioId {
    type Err = SweError;
    fn from_str(s: &str) -> Result<Self> {
        ScenarioId::ALL
            .iter()
            .copied()
            .find(|id| id.name() == s)
            .ok_or_else(|| SweError::Config(format!("unknown scenario '{s}'")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeshKind {
    Cartesian,
    /// Mesh whose vertical lines bend to follow the parabolic dam, scaled
    /// from `[-10, 10]^2` to the scenario domain.
    CurvedDam,
}

/// Oscillating lake constants.
pub const LAKE_H0: f64 = 0.1;
pub const LAKE_A: f64 = 1.0;
pub const LAKE_SIGMA: f64 = 0.5;

/// Parabolic dam position `x = y^2/25 - 1/4`.
pub fn dam_curve(y: f64) -> f64 {
    y * y / 25.0 - 0.25
}

/// Curved mesh map of `[-10, 10]^2` that places the dam curve on the
/// logical line `s = 1/2`.
pub fn curved_dam_map(s: f64, t: f64) -> (f64, f64) {
    let y = -10.0 + 20.0 * t;
    let xd = dam_curve(y);
    let x = if s <= 0.5 {
        -10.0 + (xd + 10.0) * (s / 0.5)
    } else {
        xd + (10.0 - xd) * ((s - 0.5) / 0.5)
    };
    (x, y)
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub id: ScenarioId,
    pub domain: [f64; 4],
    pub kx: usize,
    pub ky: usize,
    pub mesh_kind: MeshKind,
    pub bc_x: Boundary,
    pub bc_y: Boundary,
    pub g: f64,
    /// Depth below which velocities are zeroed.
    pub h_tol: f64,
    /// Depth below which velocities are not formed from momentum.
    pub h_des: f64,
    /// Depth below which the limiter caps nodal speeds.
    pub h_vel: f64,
    pub n: usize,
    pub epsilon0: f64,
    /// Indicator thresholds; `None` uses the default band for the degree.
    pub sigma_band: Option<(f64, f64)>,
    pub t_final: f64,
    pub cfl: f64,
    pub snapshot_times: Vec<f64>,
}

impl Scenario {
    pub fn new(id: ScenarioId) -> Scenario {
        let base = Scenario {
            id,
            domain: [0.0, 1.0, 0.0, 1.0],
            kx: 1,
            ky: 1,
            mesh_kind: MeshKind::Cartesian,
            bc_x: Boundary::Wall,
            bc_y: Boundary::Wall,
            g: 9.81,
            h_tol: 1e-4,
            h_des: 1e-8,
            h_vel: 1e-2,
            n: 3,
            epsilon0: 0.0,
            sigma_band: None,
            t_final: 1.0,
            cfl: 0.5,
            snapshot_times: Vec::new(),
        };
        match id {
            ScenarioId::EntropyGlitch => Scenario {
                domain: [-1.0, 1.0, -1.0, 1.0],
                kx: 100,
                ky: 100,
                bc_y: Boundary::Periodic,
                g: 10.0,
                n: 1,
                t_final: 0.2,
                ..base
            },
            ScenarioId::WetDryDamBreak => Scenario {
                domain: [-20.0, 20.0, -20.0, 20.0],
                kx: 50,
                ky: 50,
                bc_y: Boundary::Periodic,
                epsilon0: 0.1,
                t_final: 1.0,
                ..base
            },
            ScenarioId::OscillatingLake => {
                let period = oscillating_lake_period(9.81);
                Scenario {
                    domain: [-2.0, 2.0, -2.0, 2.0],
                    kx: 200,
                    ky: 200,
                    epsilon0: 0.01,
                    sigma_band: Some((-1.4, -0.4)),
                    t_final: period,
                    snapshot_times: [6.0, 3.0, 2.0]
                        .iter()
                        .map(|f| period / f)
                        .collect(),
                    ..base
                }
            }
            ScenarioId::ThreeMound => Scenario {
                domain: [0.0, 75.0, 0.0, 45.0],
                kx: 150,
                ky: 100,
                epsilon0: 0.2,
                t_final: 50.0,
                snapshot_times: vec![5.0, 10.0, 20.0, 30.0, 40.0],
                ..base
            },
            ScenarioId::ConicalIsland => Scenario {
                domain: [0.0, 25.0, 0.0, 30.0],
                kx: 50,
                ky: 50,
                epsilon0: 0.1,
                t_final: 50.0,
                ..base
            },
            ScenarioId::ParabolicDamWet => Scenario {
                domain: [-10.0, 10.0, -10.0, 10.0],
                kx: 40,
                ky: 40,
                mesh_kind: MeshKind::CurvedDam,
                g: 1.0,
                epsilon0: 0.025,
                t_final: 1.5,
                ..base
            },
            ScenarioId::ParabolicDamDry => Scenario {
                domain: [-10.0, 10.0, -10.0, 10.0],
                kx: 40,
                ky: 40,
                mesh_kind: MeshKind::CurvedDam,
                g: 1.0,
                epsilon0: parabolic_dry_epsilon0(3),
                t_final: 1.0,
                ..base
            },
            ScenarioId::LakeAtRest => Scenario {
                domain: [-2.0, 2.0, -2.0, 2.0],
                kx: 20,
                ky: 20,
                t_final: 1.0,
                ..base
            },
            ScenarioId::TravelingWave => Scenario {
                domain: [0.0, 2.0, 0.0, 2.0],
                kx: 8,
                ky: 8,
                bc_x: Boundary::Periodic,
                bc_y: Boundary::Periodic,
                t_final: 0.1,
                cfl: 0.1,
                ..base
            },
        }
    }

    /// Changes the degree, updating degree-dependent defaults.
    pub fn with_degree(mut self, n: usize) -> Scenario {
        self.n = n;
        if self.id != ScenarioId::TravelingWave {
            self.cfl = default_cfl(n);
        }
        if self.id == ScenarioId::ParabolicDamDry {
            self.epsilon0 = parabolic_dry_epsilon0(n);
        }
        self
    }

    pub fn with_elements(mut self, kx: usize, ky: usize) -> Scenario {
        self.kx = kx;
        self.ky = ky;
        self
    }

    pub fn params(&self) -> PhysicsParams {
        PhysicsParams {
            h_tol: self.h_tol,
            h_des: self.h_des,
            h_vel: self.h_vel,
            ..PhysicsParams::new(self.g)
        }
    }

    pub fn viscosity(&self) -> ViscosityConfig {
        let mut v = ViscosityConfig::with_default_band(self.n, self.epsilon0);
        if let Some((a, b)) = self.sigma_band {
            v.sigma_min = a;
            v.sigma_max = b;
        }
        v.enabled = self.epsilon0 > 0.0 && self.n >= 2;
        v
    }

    pub fn build_mesh(&self, ops: &Operators1D) -> Result<Mesh> {
        match self.mesh_kind {
            MeshKind::Cartesian => Mesh::cartesian(self.domain, self.kx, self.ky, self.bc_x, self.bc_y, ops),
            MeshKind::CurvedDam => {
                let [x0, x1, y0, y1] = self.domain;
                let map = |s: f64, t: f64| {
                    let (x, y) = curved_dam_map(s, t);
                    (x0 + (x + 10.0) / 20.0 * (x1 - x0), y0 + (y + 10.0) / 20.0 * (y1 - y0))
                };
                Mesh::from_map(self.kx, self.ky, &map, self.bc_x, self.bc_y, ops)
            }
        }
    }

    /// Bottom elevation.
    pub fn bathymetry(&self, x: f64, y: f64) -> f64 {
        match self.id {
            ScenarioId::OscillatingLake => LAKE_H0 * (x * x + y * y) / (LAKE_A * LAKE_A),
            ScenarioId::ThreeMound => {
                let m1 = 1.0 - 0.1 * ((x - 30.0).powi(2) + (y - 22.5).powi(2)).sqrt();
                let m2 = 1.0 - 0.1 * ((x - 30.0).powi(2) + (y - 7.5).powi(2)).sqrt();
                let m3 = 2.8 - 0.28 * ((x - 47.5).powi(2) + (y - 15.0).powi(2)).sqrt();
                0.0f64.max(m1).max(m2).max(m3)
            }
            ScenarioId::ConicalIsland => {
                let r = ((x - 12.5).powi(2) + (y - 15.0).powi(2)).sqrt();
                if r <= 3.6 {
                    0.93 * (1.0 - r / 3.6)
                } else {
                    0.0
                }
            }
            ScenarioId::LakeAtRest => {
                let [x0, x1, y0, y1] = self.domain;
                let rmax = x0.abs().max(x1.abs()).powi(2) + y0.abs().max(y1.abs()).powi(2);
                LAKE_H0 * (x * x + y * y - rmax) / (LAKE_A * LAKE_A) - 0.1
            }
            _ => 0.0,
        }
    }

    /// Initial `(h, u, v)` at `(x, y)`. Discontinuities are decided at the
    /// `probe` point, which callers pull slightly into the owning element so
    /// fronts that lie on element faces are assigned consistently.
    pub fn initial(&self, x: f64, y: f64, probe: (f64, f64)) -> (f64, f64, f64) {
        let (px, py) = probe;
        match self.id {
            ScenarioId::EntropyGlitch => (if px < 0.0 { 1.0 } else { 0.1 }, 0.0, 0.0),
            ScenarioId::WetDryDamBreak => (if px < 0.0 { 10.0 } else { 0.0 }, 0.0, 0.0),
            ScenarioId::OscillatingLake => oscillating_lake_exact(x, y, 0.0, self.g),
            ScenarioId::ThreeMound => (if px < 16.0 { 1.875 } else { 0.0 }, 0.0, 0.0),
            ScenarioId::ConicalIsland => {
                let (h0, amp) = (0.32f64, 0.064f64);
                let gamma = (3.0 * amp / (4.0 * h0)).sqrt();
                let eta = amp / h0 / (gamma * (x - 2.5)).cosh().powi(2);
                let h = (h0 + eta - self.bathymetry(x, y)).max(0.0);
                let u = if h > 0.0 { eta * (self.g / h0).sqrt() } else { 0.0 };
                (h, u, 0.0)
            }
            ScenarioId::ParabolicDamWet => (if px < dam_curve(py) { 10.0 } else { 5.0 }, 0.0, 0.0),
            ScenarioId::ParabolicDamDry => (if px < dam_curve(py) { 10.0 } else { 0.0 }, 0.0, 0.0),
            ScenarioId::LakeAtRest => (-self.bathymetry(x, y), 0.0, 0.0),
            ScenarioId::TravelingWave => (traveling_wave_h(x + y), 1.0, 1.0),
        }
    }

    pub fn discretization(&self, mode: Mode) -> Result<Discretization> {
        let ops = Operators1D::new(self.n)?;
        let mesh = self.build_mesh(&ops)?;
        let me = self.clone();
        let d = Discretization::new(ops, mesh, self.params(), mode, &move |x, y| me.bathymetry(x, y))?;
        Ok(match self.id {
            ScenarioId::TravelingWave => d.with_forcing(traveling_wave_forcing(self.g)),
            _ => d,
        })
    }

    /// Samples the initial condition on a discretization of this scenario.
    pub fn initial_state(&self, d: &Discretization) -> Vec<State> {
        let nn = d.nn();
        let m = &d.mesh;
        let mut w = Vec::with_capacity(d.num_nodes());
        for e in 0..m.k {
            let r = e * nn..(e + 1) * nn;
            let xc = m.x[r.clone()].iter().sum::<f64>() / nn as f64;
            let yc = m.y[r.clone()].iter().sum::<f64>() / nn as f64;
            for g in r {
                let (x, y) = (m.x[g], m.y[g]);
                let probe = (x + 1e-9 * (xc - x), y + 1e-9 * (yc - y));
                let (h, u, v) = self.initial(x, y, probe);
                w.push([h, h * u, h * v]);
            }
        }
        w
    }

    pub fn run_options(&self) -> RunOptions {
        let mut o = RunOptions::new(self.t_final);
        o.cfl = self.cfl;
        o.viscosity = self.viscosity();
        o.output_times = self.snapshot_times.clone();
        o
    }

    pub fn simulation(&self, mode: Mode, limiter: bool) -> Result<Simulation> {
        let d = self.discretization(mode)?;
        let w = self.initial_state(&d);
        let mut o = self.run_options();
        o.limiter = limiter;
        if mode == Mode::Standard {
            o.viscosity.enabled = false;
        }
        Simulation::new(d, w, o)
    }
}

/// CFL number used by the scenarios. The directional CFL rule loses linear
/// stability near 0.5 from `N = 7` on.
pub fn default_cfl(n: usize) -> f64 {
    if n <= 5 {
        0.5
    } else {
        0.3
    }
}

pub fn parabolic_dry_epsilon0(n: usize) -> f64 {
    if n <= 5 {
        0.05
    } else {
        0.025
    }
}

pub fn oscillating_lake_omega(g: f64) -> f64 {
    (2.0 * g * LAKE_H0).sqrt() / LAKE_A
}

/// Orbital period of the oscillating lake.
pub fn oscillating_lake_period(g: f64) -> f64 {
    2.0 * PI / oscillating_lake_omega(g)
}

/// Exact oscillating lake solution `(h, u, v)`; velocities are reported
/// everywhere, including dry points.
pub fn oscillating_lake_exact(x: f64, y: f64, t: f64, g: f64) -> (f64, f64, f64) {
    let om = oscillating_lake_omega(g);
    let b = LAKE_H0 * (x * x + y * y) / (LAKE_A * LAKE_A);
    let h = (LAKE_SIGMA * LAKE_H0 / (LAKE_A * LAKE_A)
        * (2.0 * x * (om * t).cos() + 2.0 * y * (om * t).sin() - LAKE_SIGMA)
        + LAKE_H0
        - b)
        .max(0.0);
    (h, -LAKE_SIGMA * om * (om * t).sin(), LAKE_SIGMA * om * (om * t).cos())
}

/// Depth profile of the travelling wave as a function of `x + y - 2t`.
pub fn traveling_wave_h(phi: f64) -> f64 {
    2.0 + 0.5 * (PI * phi).sin()
}

fn traveling_wave_dh(phi: f64) -> f64 {
    0.5 * PI * (PI * phi).cos()
}

/// Exact travelling wave state at time `t`.
pub fn traveling_wave_exact(x: f64, y: f64, t: f64) -> State {
    let h = traveling_wave_h(x + y - 2.0 * t);
    [h, h, h]
}

/// Momentum forcing that makes the travelling wave exact.
pub fn traveling_wave_forcing(g: f64) -> crate::dg::Forcing {
    Arc::new(move |x, y, t| {
        let phi = x + y - 2.0 * t;
        let s = g * traveling_wave_h(phi) * traveling_wave_dh(phi);
        [0.0, s, s]
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn catalogue_values() {
        let s = Scenario::new(ScenarioId::ThreeMound);
        assert_abs_diff_eq!(s.bathymetry(47.5, 15.0), 2.8, epsilon = 1e-15);
        let s = Scenario::new(ScenarioId::OscillatingLake);
        let (_, u, v) = s.initial(0.0, 0.0, (0.0, 0.0));
        assert_eq!(u, 0.0);
        assert_abs_diff_eq!(v, 0.5 * (2.0f64 * 9.81 * 0.1).sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(v, 0.7004, epsilon = 1e-4);
        let s = Scenario::new(ScenarioId::WetDryDamBreak);
        assert_eq!(s.initial(5.0, 0.0, (5.0, 0.0)).0, 0.0);
        assert_eq!(s.initial(-5.0, 0.0, (-5.0, 0.0)).0, 10.0);
    }

    #[test]
    fn names_round_trip() {
        for id in ScenarioId::ALL {
            assert_eq!(id.name().parse::<ScenarioId>().unwrap(), id);
        }
        assert!("nope".parse::<ScenarioId>().is_err());
    }

    #[test]
    fn conical_island_cone_is_radial() {
        let s = Scenario::new(ScenarioId::ConicalIsland);
        assert_abs_diff_eq!(s.bathymetry(12.5, 15.0), 0.93, epsilon = 1e-15);
        assert_abs_diff_eq!(s.bathymetry(12.5, 15.0 + 1.8), 0.465, epsilon = 1e-14);
        assert_abs_diff_eq!(s.bathymetry(12.5 + 1.8, 15.0), 0.465, epsilon = 1e-14);
        assert_eq!(s.bathymetry(0.0, 0.0), 0.0);
    }

    #[test]
    fn dry_dam_epsilon_depends_on_degree() {
        assert_eq!(Scenario::new(ScenarioId::ParabolicDamDry).epsilon0, 0.05);
        assert_eq!(Scenario::new(ScenarioId::ParabolicDamDry).with_degree(7).epsilon0, 0.025);
    }

    #[test]
    fn curved_dam_map_follows_dam() {
        for t in [0.0, 0.3, 0.5, 1.0] {
            let (x, y) = curved_dam_map(0.5, t);
            assert_abs_diff_eq!(x, dam_curve(y), epsilon = 1e-14);
        }
        assert_eq!(curved_dam_map(0.0, 0.0), (-10.0, -10.0));
        assert_eq!(curved_dam_map(1.0, 1.0), (10.0, 10.0));
    }

    #[test]
    fn lake_at_rest_is_wet() {
        let s = Scenario::new(ScenarioId::LakeAtRest);
        for (x, y) in [(0.0, 0.0), (2.0, 2.0), (-2.0, 1.0)] {
            assert!(s.initial(x, y, (x, y)).0 >= 0.1 - 1e-15);
        }
    }
}
