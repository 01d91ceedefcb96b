//! SSPRK3 time integration with stage-wise limiting and viscosity.

use crate::dg::Discretization;
use crate::error::{Result, SweError};
use crate::positivity;
use crate::physics::State;
use crate::viscosity::{self, ViscosityConfig};

/// Stage rows `(a, b, c)`: `w_new = a w_n + b (w_s + dt R(w_s, t_n + c dt))`,
/// where `w_s` is the previous stage and `c` the stage time fraction.
pub const SSPRK3: [(f64, f64, f64); 3] = [(0.0, 1.0, 0.0), (0.75, 0.25, 1.0), (1.0 / 3.0, 2.0 / 3.0, 0.5)];

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub cfl: f64,
    pub t_final: f64,
    pub limiter: bool,
    pub viscosity: ViscosityConfig,
    /// Times the integrator must land on exactly (snapshots).
    pub output_times: Vec<f64>,
    pub max_halvings: usize,
    /// Depth used for the time step when every node is dry.
    pub fallback_depth: f64,
}

impl RunOptions {
    pub fn new(t_final: f64) -> Self {
        Self {
            cfl: 0.5,
            t_final,
            limiter: true,
            viscosity: ViscosityConfig::disabled(),
            output_times: Vec::new(),
            max_halvings: 10,
            fallback_depth: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(SweError::InvalidArgument(format!("cfl must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.t_final > 0.0) {
            return Err(SweError::InvalidArgument("final time must be positive".into()));
        }
        self.viscosity.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    pub entropy: f64,
    pub min_h: f64,
    pub n_limited: usize,
    pub max_eps: f64,
}

pub struct Simulation {
    pub disc: Discretization,
    pub w: Vec<State>,
    pub t: f64,
    pub step: usize,
    pub opts: RunOptions,
    /// Per-element viscosity, maximum over the stages of the last step.
    pub eps: Vec<f64>,
    /// Smallest nodal depth seen after any stage so far.
    pub min_stage_h: f64,
    /// Smallest mean-positivity time step bound seen at step starts.
    pub min_positivity_bound: f64,
    pub rejections: usize,
    pub history: Vec<StepRecord>,
}

impl Simulation {
    pub fn new(disc: Discretization, w: Vec<State>, opts: RunOptions) -> Result<Self> {
        opts.validate()?;
        if w.len() != disc.num_nodes() {
            return Err(SweError::InvalidArgument("state size does not match mesh".into()));
        }
        let k = disc.mesh.k;
        let mut sim = Simulation {
            disc,
            w,
            t: 0.0,
            step: 0,
            opts,
            eps: vec![0.0; k],
            min_stage_h: f64::INFINITY,
            min_positivity_bound: f64::INFINITY,
            rejections: 0,
            history: Vec::new(),
        };
        if sim.opts.limiter {
            let mut w = std::mem::take(&mut sim.w);
            positivity::limit_field(&sim.disc, &mut w)?;
            sim.w = w;
        }
        sim.min_stage_h = sim.min_h();
        sim.record(0.0, 0);
        Ok(sim)
    }

    pub fn min_h(&self) -> f64 {
        self.w.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min)
    }

    fn record(&mut self, dt: f64, n_limited: usize) {
        let rec = StepRecord {
            step: self.step,
            t: self.t,
            dt,
            mass: self.disc.total_mass(&self.w),
            entropy: self.disc.total_entropy(&self.w),
            min_h: self.min_h(),
            n_limited,
            max_eps: self.eps.iter().cloned().fold(0.0, f64::max),
        };
        self.history.push(rec);
    }

    /// CFL time step for the current state, before clipping to output times.
    pub fn compute_dt(&self) -> f64 {
        let d = &self.disc;
        let m = &d.mesh;
        let nn = d.nn();
        let p = &d.params;
        let order = (2 * m.n + 1) as f64;
        let mut best = f64::INFINITY;
        let mut any_wave = false;
        let mut min_len = f64::INFINITY;
        for e in 0..m.k {
            for l in 0..nn {
                let g = e * nn + l;
                let (u, v) = crate::physics::velocity(&self.w[g], p);
                let c = (p.g * self.w[g][0].max(0.0)).sqrt();
                let j = m.jac[g];
                let s_xi = (m.y_eta[g].powi(2) + m.x_eta[g].powi(2)).sqrt();
                let s_eta = (m.y_xi[g].powi(2) + m.x_xi[g].powi(2)).sqrt();
                let len_xi = 2.0 * j / s_xi;
                let len_eta = 2.0 * j / s_eta;
                let lam_xi = ((u * m.y_eta[g] - v * m.x_eta[g]) / s_xi).abs() + c;
                let lam_eta = ((-u * m.y_xi[g] + v * m.x_xi[g]) / s_eta).abs() + c;
                if lam_xi > 0.0 {
                    best = best.min(len_xi / (order * lam_xi));
                    any_wave = true;
                }
                if lam_eta > 0.0 {
                    best = best.min(len_eta / (order * lam_eta));
                    any_wave = true;
                }
                let len = len_xi.min(len_eta);
                min_len = min_len.min(len);
                if self.eps[e] > 0.0 {
                    best = best.min(len * len / (order * order * self.eps[e]));
                }
            }
        }
        if !any_wave {
            best = min_len / (order * (p.g * self.opts.fallback_depth).sqrt());
        }
        self.opts.cfl * best
    }

    fn next_stop(&self) -> f64 {
        let mut stop = self.opts.t_final;
        for &t in &self.opts.output_times {
            if t > self.t && t < stop {
                stop = t;
            }
        }
        stop
    }

    fn stage_viscosity(&self, w: &[State]) -> Vec<f64> {
        viscosity::element_viscosity(&self.disc, w, &self.opts.viscosity)
    }

    fn check_stage(&self, w: &[State], t: f64) -> Result<()> {
        let nn = self.disc.nn();
        let np = self.disc.ops.np();
        for (g, s) in w.iter().enumerate() {
            if !(s[0].is_finite() && s[1].is_finite() && s[2].is_finite()) {
                return Err(SweError::NonFinite { element: g / nn, t });
            }
            if !self.opts.limiter && s[0] < 0.0 {
                let l = g % nn;
                return Err(SweError::NegativeDepth {
                    element: g / nn,
                    i: l / np,
                    j: l % np,
                    x: self.disc.mesh.x[g],
                    y: self.disc.mesh.y[g],
                    h: s[0],
                    t,
                });
            }
        }
        Ok(())
    }

    /// One SSPRK3 step of size `dt`. On success returns the new state, the
    /// stage-maximum viscosity, the limited element count and the stage
    /// minimum depth.
    fn try_step(&self, dt: f64) -> Result<(Vec<State>, Vec<f64>, usize, f64)> {
        let d = &self.disc;
        let w0 = &self.w;
        let mut stage = w0.clone();
        let mut r = vec![[0.0; 3]; w0.len()];
        let mut eps_max = vec![0.0f64; d.mesh.k];
        let mut n_limited = 0;
        let mut min_h = f64::INFINITY;
        for &(a, b, c) in SSPRK3.iter() {
            let eps = self.stage_viscosity(&stage);
            for (m, e) in eps_max.iter_mut().zip(&eps) {
                *m = m.max(*e);
            }
            d.rhs(&stage, self.t + c * dt, Some(&eps), &mut r);
            for ((s, r), w0) in stage.iter_mut().zip(&r).zip(w0) {
                for k in 0..3 {
                    s[k] = a * w0[k] + b * (s[k] + dt * r[k]);
                }
            }
            let ts = self.t + if c == 0.0 { dt } else { c * dt };
            self.check_stage(&stage, ts)?;
            if self.opts.limiter {
                let rep = positivity::limit_field(d, &mut stage)?;
                n_limited = n_limited.max(rep.n_limited);
                min_h = min_h.min(rep.min_h_after);
            } else {
                min_h = min_h.min(stage.iter().map(|s| s[0]).fold(f64::INFINITY, f64::min));
            }
        }
        Ok((stage, eps_max, n_limited, min_h))
    }

    /// Advances one accepted step; negative element means trigger step halving.
    pub fn step(&mut self) -> Result<StepRecord> {
        let stop = self.next_stop();
        let mut dt = self.compute_dt().min(stop - self.t);
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(SweError::NonFinite { element: 0, t: self.t });
        }
        self.min_positivity_bound = self
            .min_positivity_bound
            .min(positivity::field_dt_bound(&self.disc, &self.w));
        let mut halvings = 0;
        loop {
            match self.try_step(dt) {
                Ok((w, eps, n_limited, min_h)) => {
                    let clipped = self.t + dt >= stop;
                    self.t = if clipped { stop } else { self.t + dt };
                    self.w = w;
                    self.eps = eps;
                    self.step += 1;
                    self.min_stage_h = self.min_stage_h.min(min_h);
                    self.record(dt, n_limited);
                    return Ok(*self.history.last().unwrap());
                }
                Err(SweError::NegativeMean { element, mean }) => {
                    halvings += 1;
                    self.rejections += 1;
                    log::debug!("negative mean {mean:e} in element {element}, halving dt to {}", dt / 2.0);
                    if halvings > self.opts.max_halvings {
                        return Err(SweError::TooManyRejections(halvings));
                    }
                    dt *= 0.5;
                }
                Err(e) => return Err(e),
            }
        }
    }

    /// Integrates to the final time, calling `on_output` at each output time
    /// and at the end.
    pub fn run(&mut self, mut on_output: impl FnMut(&Simulation) -> Result<()>) -> Result<()> {
        let tf = self.opts.t_final;
        while self.t < tf {
            self.step()?;
            if self.opts.output_times.iter().any(|&t| t == self.t) || self.t >= tf {
                on_output(self)?;
            }
        }
        Ok(())
    }
}
