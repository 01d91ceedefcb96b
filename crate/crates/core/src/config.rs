//! Run configuration files: TOML with `[run]`, `[mesh]`, `[physics]`,
//! `[viscosity]`, `[limiter]` and `[output]` sections. Keys left out take the
//! scenario defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dg::Mode;
use crate::error::{Result, SweError};
use crate::mesh::Boundary;
use crate::scenarios::{MeshKind, Scenario, ScenarioId};
use crate::timeloop::{RunOptions, Simulation};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub scenario: Option<String>,
    pub mode: Option<Mode>,
    pub t_final: Option<f64>,
    pub cfl: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshSection {
    pub n: Option<usize>,
    pub kx: Option<usize>,
    pub ky: Option<usize>,
    pub kind: Option<MeshKind>,
    /// `[x0, x1, y0, y1]`.
    pub domain: Option<[f64; 4]>,
    pub bc_x: Option<Boundary>,
    pub bc_y: Option<Boundary>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub g: Option<f64>,
    pub h_tol: Option<f64>,
    pub h_des: Option<f64>,
    pub h_vel: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViscositySection {
    pub enabled: Option<bool>,
    pub epsilon0: Option<f64>,
    pub sigma_min: Option<f64>,
    pub sigma_max: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LimiterSection {
    pub enabled: Option<bool>,
    pub max_halvings: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub snapshot_times: Option<Vec<f64>>,
    /// Extra snapshots every `interval` time units.
    pub interval: Option<f64>,
    pub diagnostics: Option<bool>,
    /// Slice lines such as `"y=0"` or `"x=12.5"`, written with each snapshot.
    pub slices: Option<Vec<String>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default)]
    pub mesh: MeshSection,
    #[serde(default)]
    pub physics: PhysicsSection,
    #[serde(default)]
    pub viscosity: ViscositySection,
    #[serde(default)]
    pub limiter: LimiterSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Axis {
    X,
    Y,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SliceSpec {
    /// The coordinate held fixed.
    pub axis: Axis,
    pub value: f64,
}

impl std::str::FromStr for SliceSpec {
    type Err = SweError;
    fn from_str(s: &str) -> Result<Self> {
        let (a, v) = s
            .split_once('=')
            .ok_or_else(|| SweError::Config(format!("slice '{s}' is not of the form y=<value>")))?;
        let axis = match a.trim() {
            "x" => Axis::X,
            "y" => Axis::Y,
            other => return Err(SweError::Config(format!("slice axis '{other}' is not x or y"))),
        };
        let value = v
            .trim()
            .parse()
            .map_err(|_| SweError::Config(format!("slice value '{}' is not a number", v.trim())))?;
        Ok(SliceSpec { axis, value })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub snapshot_times: Vec<f64>,
    pub diagnostics: bool,
    pub slices: Vec<SliceSpec>,
}

/// Fully resolved run configuration.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub mode: Mode,
    pub options: RunOptions,
    pub output: OutputConfig,
    /// The resolved values in file form, used for hashing and echoing.
    pub resolved: ConfigFile,
}

impl RunConfig {
    /// Catalogue defaults for a scenario.
    pub fn defaults(id: ScenarioId) -> Result<RunConfig> {
        let file = ConfigFile {
            run: RunSection {
                scenario: Some(id.name().into()),
                ..Default::default()
            },
            ..Default::default()
        };
        resolve(file)
    }

    pub fn hash(&self) -> String {
        let text = toml::to_string(&self.resolved).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }

    pub fn simulation(&self) -> Result<Simulation> {
        let d = self.scenario.discretization(self.mode)?;
        let w = self.scenario.initial_state(&d);
        let mut o = self.options.clone();
        if self.mode == Mode::Standard {
            o.viscosity.enabled = false;
        }
        Simulation::new(d, w, o)
    }
}

/// Parses configuration text into its sections without resolving defaults.
/// Errors cite the offending key and line.
pub fn parse_sections(text: &str) -> Result<ConfigFile> {
    toml::from_str(text).map_err(|e| SweError::Config(e.to_string()))
}

pub fn parse_str(text: &str) -> Result<RunConfig> {
    resolve(parse_sections(text)?)
}

pub fn parse_file(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_str(&text)
}

/// Overlays explicit keys on the scenario defaults.
pub fn resolve(file: ConfigFile) -> Result<RunConfig> {
    let name = file
        .run
        .scenario
        .as_deref()
        .ok_or_else(|| SweError::Config("[run] scenario is required".into()))?;
    let id: ScenarioId = name.parse()?;
    let mut s = Scenario::new(id);
    if let Some(n) = file.mesh.n {
        s = s.with_degree(n);
    }
    let r = &file.run;
    let m = &file.mesh;
    let p = &file.physics;
    s.t_final = r.t_final.unwrap_or(s.t_final);
    s.cfl = r.cfl.unwrap_or(s.cfl);
    s.kx = m.kx.unwrap_or(s.kx);
    s.ky = m.ky.unwrap_or(s.ky);
    s.mesh_kind = m.kind.unwrap_or(s.mesh_kind);
    s.domain = m.domain.unwrap_or(s.domain);
    s.bc_x = m.bc_x.unwrap_or(s.bc_x);
    s.bc_y = m.bc_y.unwrap_or(s.bc_y);
    s.g = p.g.unwrap_or(s.g);
    s.h_tol = p.h_tol.unwrap_or(s.h_tol);
    s.h_des = p.h_des.unwrap_or(s.h_des);
    s.h_vel = p.h_vel.unwrap_or(s.h_vel);
    let v = &file.viscosity;
    s.epsilon0 = v.epsilon0.unwrap_or(s.epsilon0);
    let mode = r.mode.unwrap_or(Mode::EntropyStable);

    let mut visc = s.viscosity();
    visc.enabled = v.enabled.unwrap_or(visc.enabled);
    visc.sigma_min = v.sigma_min.unwrap_or(visc.sigma_min);
    visc.sigma_max = v.sigma_max.unwrap_or(visc.sigma_max);

    let o = &file.output;
    let mut times = o.snapshot_times.clone().unwrap_or_else(|| s.snapshot_times.clone());
    if let Some(dt) = o.interval {
        if !(dt > 0.0) {
            return Err(SweError::Config("[output] interval must be positive".into()));
        }
        let mut t = dt;
        while t < s.t_final {
            times.push(t);
            t += dt;
        }
    }
    times.retain(|&t| t > 0.0 && t < s.t_final);
    times.sort_by(|a, b| a.total_cmp(b));
    times.dedup();
    let slices = o
        .slices
        .clone()
        .unwrap_or_default()
        .iter()
        .map(|t| t.parse())
        .collect::<Result<Vec<SliceSpec>>>()?;

    let mut options = s.run_options();
    options.viscosity = visc;
    options.output_times = times.clone();
    options.limiter = file.limiter.enabled.unwrap_or(true);
    options.max_halvings = file.limiter.max_halvings.unwrap_or(options.max_halvings);
    options.validate()?;
    s.params().validate()?;
    if s.n == 0 || s.kx == 0 || s.ky == 0 {
        return Err(SweError::Config("[mesh] n, kx and ky must be positive".into()));
    }

    let output = OutputConfig {
        dir: o.dir.clone().unwrap_or_else(|| PathBuf::from("output")),
        snapshot_times: times,
        diagnostics: o.diagnostics.unwrap_or(true),
        slices,
    };
    let resolved = ConfigFile {
        run: RunSection {
            scenario: Some(id.name().into()),
            mode: Some(mode),
            t_final: Some(s.t_final),
            cfl: Some(s.cfl),
        },
        mesh: MeshSection {
            n: Some(s.n),
            kx: Some(s.kx),
            ky: Some(s.ky),
            kind: Some(s.mesh_kind),
            domain: Some(s.domain),
            bc_x: Some(s.bc_x),
            bc_y: Some(s.bc_y),
        },
        physics: PhysicsSection {
            g: Some(s.g),
            h_tol: Some(s.h_tol),
            h_des: Some(s.h_des),
            h_vel: Some(s.h_vel),
        },
        viscosity: ViscositySection {
            enabled: Some(options.viscosity.enabled),
            epsilon0: Some(options.viscosity.epsilon0),
            sigma_min: Some(options.viscosity.sigma_min),
            sigma_max: Some(options.viscosity.sigma_max),
        },
        limiter: LimiterSection {
            enabled: Some(options.limiter),
            max_halvings: Some(options.max_halvings),
        },
        output: OutputSection {
            dir: Some(output.dir.clone()),
            snapshot_times: Some(output.snapshot_times.clone()),
            interval: None,
            diagnostics: Some(output.diagnostics),
            slices: o.slices.clone().or(Some(Vec::new())),
        },
    };
    Ok(RunConfig {
        scenario: s,
        mode,
        options,
        output,
        resolved,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_catalogue() {
        let c = parse_str("[run]\nscenario = \"wetdry_dambreak\"\n").unwrap();
        let s = Scenario::new(ScenarioId::WetDryDamBreak);
        assert_eq!((c.scenario.kx, c.scenario.ky, c.scenario.n), (s.kx, s.ky, s.n));
        assert_eq!(c.scenario.epsilon0, 0.1);
        assert_eq!(c.scenario.g, 9.81);
        assert_eq!(c.options.t_final, 1.0);
        assert!(c.options.limiter);
        assert_eq!(c.hash(), RunConfig::defaults(ScenarioId::WetDryDamBreak).unwrap().hash());
    }

    #[test]
    fn single_override() {
        let base = RunConfig::defaults(ScenarioId::WetDryDamBreak).unwrap();
        let c = parse_str("[run]\nscenario = \"wetdry_dambreak\"\n[viscosity]\nepsilon0 = 0.2\n").unwrap();
        assert_eq!(c.scenario.epsilon0, 0.2);
        let mut r = c.resolved.clone();
        r.viscosity.epsilon0 = base.resolved.viscosity.epsilon0;
        assert_eq!(r, base.resolved);
        assert_ne!(c.hash(), base.hash());
    }

    #[test]
    fn malformed_number_cites_key_and_line() {
        let text = "[run]\nscenario = \"wetdry_dambreak\"\n\n[physics]\ng = 9.8.1\n";
        let e = parse_str(text).unwrap_err().to_string();
        assert!(e.contains("line 5"), "{e}");
        let text = "[run]\nscenario = \"wetdry_dambreak\"\n[physics]\ng = \"heavy\"\n";
        let e = parse_str(text).unwrap_err().to_string();
        assert!(e.contains("line 4") && e.contains("g ="), "{e}");
    }

    #[test]
    fn unknown_keys_and_missing_scenario_rejected() {
        assert!(parse_str("[run]\nscenario = \"three_mound\"\nspeed = 3\n").is_err());
        assert!(parse_str("[mesh]\nn = 3\n").is_err());
        assert!(parse_str("[run]\nscenario = \"nope\"\n").is_err());
    }

    #[test]
    fn degree_override_updates_dependent_defaults() {
        let c = parse_str("[run]\nscenario = \"parabolic_dam_dry\"\n[mesh]\nn = 7\n").unwrap();
        assert_eq!(c.scenario.epsilon0, 0.025);
        assert_eq!(c.options.viscosity.sigma_min, crate::viscosity::default_band(7).0);
    }

    #[test]
    fn interval_snapshots_and_slices() {
        let c = parse_str(
            "[run]\nscenario = \"entropy_glitch\"\n[output]\ninterval = 0.05\nslices = [\"y=0\", \"x = -0.5\"]\n",
        )
        .unwrap();
        assert_eq!(c.output.snapshot_times.len(), 3);
        assert_eq!(c.output.slices[1], SliceSpec { axis: Axis::X, value: -0.5 });
        assert!(parse_str("[run]\nscenario = \"entropy_glitch\"\n[output]\nslices = [\"z=1\"]\n").is_err());
    }
}
