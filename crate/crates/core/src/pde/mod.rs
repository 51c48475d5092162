//! Moving-boundary simulation of the compaction equations.
//!
//! The growing column `0 < z < h(t)` is mapped onto `x = z / h(t) in [0, 1]`
//! so the grid stays fixed; `h` obeys its own ODE driven by the porosity
//! flux at the top.

mod discrete;
mod state;
mod stepper;

use alloc::vec::Vec;

pub use discrete::{
    apply_boundary_closure, bottom_robin_residual, hdot, sigma_transform_rates, Rates,
};
pub use state::{uniform_grid, BasinState};
pub use stepper::{step_predictor_corrector, Reactant, StepInfo};

use crate::{BasinParams, Error, Result, RunConfig, Warning};

/// Safety factor applied to the diffusive step estimate that seeds the controller.
pub const GUARD_SAFETY: f64 = 0.5;

/// Consecutive halvings tolerated before a step is declared failed.
pub const MAX_HALVINGS: usize = 40;

/// One recorded point of the boundary history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// Time.
    pub t: f64,
    /// Basin depth.
    pub h: f64,
    /// Instantaneous boundary speed.
    pub hdot: f64,
}

/// Counters collected over a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RunStats {
    /// Accepted steps.
    pub accepted: usize,
    /// Rejected attempts (each followed by halving `dt`).
    pub rejected: usize,
    /// Corrector sweeps over accepted steps.
    pub sweeps: usize,
}

/// Sampled boundary history with optional profile snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    /// `(t, h, hdot)` samples, strictly increasing in `t`.
    pub samples: Vec<Sample>,
    /// Full states recorded every `snapshot_every` samples.
    pub snapshots: Vec<BasinState>,
    /// State at the end of the run.
    pub final_state: BasinState,
    /// Step counters.
    pub stats: RunStats,
}

impl TimeSeries {
    /// Trailing `fraction` of the samples (at least one).
    pub fn tail(&self, fraction: f64) -> &[Sample] {
        let n = self.samples.len();
        let k = (libm::ceil(fraction * n as f64) as usize).clamp(1, n);
        &self.samples[n - k..]
    }

    /// `(max - min) / |mean|` of `hdot` over the trailing `fraction`.
    pub fn hdot_spread(&self, fraction: f64) -> f64 {
        let tail = self.tail(fraction);
        let (lo, hi, sum) = tail
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY, 0.0), |(lo, hi, s), p| {
                (lo.min(p.hdot), hi.max(p.hdot), s + p.hdot)
            });
        (hi - lo) / (sum / tail.len() as f64).abs()
    }

    /// Last recorded sample.
    pub fn last(&self) -> Sample {
        *self
            .samples
            .last()
            .expect("series always holds the initial sample")
    }
}

/// Step size seed `safety * min_i h^2 dx^2 / (lambda (phi_i/phi0)^m)`.
pub fn step_guard(state: &BasinState, params: &BasinParams) -> f64 {
    let dz = state.h * state.dx();
    let dmax = state
        .phi
        .iter()
        .map(|&p| params.permeability(p))
        .fold(0.0, f64::max);
    GUARD_SAFETY * dz * dz / (params.lambda() * dmax)
}

/// A configured simulation.
#[derive(Debug, Clone)]
pub struct Simulation {
    params: BasinParams,
    config: RunConfig,
    reactant: Reactant,
    snapshot_every: usize,
    warnings: Vec<Warning>,
}

impl Simulation {
    /// Validates `config` against `params`.
    pub fn new(params: BasinParams, config: RunConfig) -> Result<Self> {
        let warnings = config.validate(&params)?;
        Ok(Self {
            params,
            config,
            reactant: Reactant::Coupled,
            snapshot_every: 0,
            warnings,
        })
    }

    /// Drops the reactant equation entirely.
    pub fn compaction_only(mut self) -> Self {
        self.reactant = Reactant::Absent;
        self
    }

    /// Records the full state every `every` samples (0 disables).
    pub fn snapshots(mut self, every: usize) -> Self {
        self.snapshot_every = every;
        self
    }

    /// Resolution and activation warnings found at construction.
    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }

    /// Initial state of the run.
    pub fn initial_state(&self) -> BasinState {
        let mut s = BasinState::uniform(&self.params, self.config.n_nodes, self.config.h0);
        if self.reactant == Reactant::Absent {
            s.psi.iter_mut().for_each(|v| *v = 0.0);
        }
        s
    }

    /// Runs to `t_end`.
    pub fn run(&self) -> Result<TimeSeries> {
        self.run_observed(|_| {})
    }

    /// Runs to `t_end`, calling `observe` on the initial state and after every accepted step.
    pub fn run_observed<F: FnMut(&BasinState)>(&self, mut observe: F) -> Result<TimeSeries> {
        let cfg = &self.config;
        let params = &self.params;
        let mut state = self.initial_state();
        observe(&state);
        let sample = |s: &BasinState| Sample {
            t: s.t,
            h: s.h,
            hdot: hdot(s, params),
        };
        let mut samples = alloc::vec![sample(&state)];
        let mut snapshots = Vec::new();
        if self.snapshot_every > 0 {
            snapshots.push(state.clone());
        }
        let mut stats = RunStats::default();
        if cfg.t_end < cfg.dt {
            return Ok(TimeSeries {
                samples,
                snapshots,
                final_state: state,
                stats,
            });
        }

        let mut dt = step_guard(&state, params).min(cfg.dt);
        let mut next_sample = 1usize;
        let mut halvings = 0usize;
        let time_eps = 1e-12 * cfg.t_end;
        while state.t < cfg.t_end - time_eps {
            let t_sample = (next_sample as f64 * cfg.output_every).min(cfg.t_end);
            let dt_try = dt.min(t_sample - state.t);
            match step_predictor_corrector(&state, dt_try, params, cfg, self.reactant) {
                Ok((mut next, info)) => {
                    let landed = (next.t - t_sample).abs() <= time_eps;
                    if landed {
                        next.t = t_sample;
                    }
                    state = next;
                    stats.accepted += 1;
                    stats.sweeps += info.sweeps;
                    halvings = 0;
                    observe(&state);
                    if landed {
                        samples.push(sample(&state));
                        if self.snapshot_every > 0 && (samples.len() - 1) % self.snapshot_every == 0
                        {
                            snapshots.push(state.clone());
                        }
                        next_sample += 1;
                    }
                    // only a full step says anything about the admissible size
                    if dt_try >= dt {
                        dt = (2.0 * dt).min(cfg.dt);
                    }
                }
                Err(
                    err @ (Error::NegativePorosity { .. }
                    | Error::NegativeReactant { .. }
                    | Error::CorrectorDiverged { .. }
                    | Error::NonFinite { .. }),
                ) => {
                    stats.rejected += 1;
                    halvings += 1;
                    if halvings > MAX_HALVINGS {
                        return Err(Error::StepFailed {
                            t: state.t,
                            dt: dt_try,
                            cause: alloc::boxed::Box::new(err),
                        });
                    }
                    dt = 0.5 * dt_try;
                }
                Err(err) => {
                    return Err(Error::StepFailed {
                        t: state.t,
                        dt: dt_try,
                        cause: alloc::boxed::Box::new(err),
                    })
                }
            }
        }
        if samples.last().map(|s| s.t) != Some(state.t) {
            samples.push(sample(&state));
        }
        Ok(TimeSeries {
            samples,
            snapshots,
            final_state: state,
            stats,
        })
    }
}

/// Runs the coupled simulation from a uniform column of depth `config.h0`.
pub fn run_simulation(params: &BasinParams, config: &RunConfig) -> Result<TimeSeries> {
    Simulation::new(*params, *config)?.run()
}

/// Least-squares line through `(t, h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedFit {
    /// Slope: the numerical wave speed.
    pub c_num: f64,
    /// Intercept.
    pub intercept: f64,
    /// Coefficient of determination; 1 when `h` has no variance.
    pub r_squared: f64,
    /// Samples used.
    pub samples: usize,
}

/// Samples a speed fit needs.
pub const MIN_FIT_SAMPLES: usize = 10;

/// Fits `h = c t + b` over the trailing `window_fraction` of the samples.
pub fn estimate_wave_speed(series: &TimeSeries, window_fraction: f64) -> Result<SpeedFit> {
    let window = series.tail(window_fraction);
    fit_line(window.iter().map(|s| (s.t, s.h)), window.len())
}

fn fit_line<I: Iterator<Item = (f64, f64)> + Clone>(points: I, n: usize) -> Result<SpeedFit> {
    if n < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            got: n,
            need: MIN_FIT_SAMPLES,
        });
    }
    let nf = n as f64;
    let (st, sh) = points
        .clone()
        .fold((0.0, 0.0), |(a, b), (t, h)| (a + t, b + h));
    let (mt, mh) = (st / nf, sh / nf);
    let (mut stt, mut sth, mut shh) = (0.0, 0.0, 0.0);
    for (t, h) in points.clone() {
        let (dt, dh) = (t - mt, h - mh);
        stt += dt * dt;
        sth += dt * dh;
        shh += dh * dh;
    }
    if stt == 0.0 {
        return Err(Error::InsufficientSamples { got: 1, need: 2 });
    }
    let slope = sth / stt;
    let intercept = mh - slope * mt;
    let ss_res: f64 = points
        .map(|(t, h)| {
            let r = h - (slope * t + intercept);
            r * r
        })
        .sum();
    let r_squared = if shh == 0.0 { 1.0 } else { 1.0 - ss_res / shh };
    Ok(SpeedFit {
        c_num: slope,
        intercept,
        r_squared,
        samples: n,
    })
}

#[cfg(test)]
mod tests;
