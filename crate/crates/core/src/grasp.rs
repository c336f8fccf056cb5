//! Friction-cone test, contact-phase classifier, band controller and a
//! two-finger holding simulation.

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use crate::calib::{WrenchEstimate, WrenchModel};
use crate::error::{Error, Result};
use crate::features::compute_features_using;
use crate::field::GridSpec;
use crate::nhhd::{PoissonSolver, SolverConfig, DEFAULT_SIGNIFICANCE};
use crate::surrogate::{derive_seed, render_load, LoadTriple, SurrogateConfig};

/// Standard gravity in mm/s² per (N/kg).
const GRAVITY_MM: f64 = 9810.0;
/// Standard gravity in m/s².
const GRAVITY: f64 = 9.81;
/// Normal forces at or below this value make a ratio undefined.
pub const MIN_NORMAL_FORCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct FrictionModel {
    pub mu_static: f64,
    pub mu_dynamic: f64,
    /// Coefficient the controller assumes.
    pub mu_nominal: f64,
}

impl FrictionModel {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mu_static.is_finite()
            && self.mu_dynamic > 0.0
            && self.mu_dynamic < self.mu_static
            && self.mu_nominal.is_finite()
            && self.mu_nominal > 0.0;
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidPlant("need 0 < mu_dynamic < mu_static and mu_nominal > 0".into()))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeStatus {
    Inside,
    Outside,
}

/// Inside iff `f_t <= mu * f_n`; the boundary counts as inside.
pub fn cone_check(w: &WrenchEstimate, mu: f64) -> ConeStatus {
    if w.f_n <= 0.0 && w.f_t > 0.0 {
        return ConeStatus::Outside;
    }
    if w.f_t <= mu * w.f_n {
        ConeStatus::Inside
    } else {
        ConeStatus::Outside
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ContactPhase {
    Stable,
    IncipientSlip,
    Slipping,
    Recovery,
}

impl ContactPhase {
    pub fn name(self) -> &'static str {
        match self {
            ContactPhase::Stable => "stable",
            ContactPhase::IncipientSlip => "incipient",
            ContactPhase::Slipping => "slipping",
            ContactPhase::Recovery => "recovery",
        }
    }
}

/// Next phase given the recent ratios (oldest first) and the previous phase.
///
/// With `lo = mu - band/2`, `hi = mu + band/2` and `r` the newest ratio:
/// * Slipping stays until `r < lo`, then Recovery.
/// * Recovery returns to Stable once the last `window` ratios are all below
///   `lo`. A ratio at or above `lo` re-enters the band logic.
/// * Otherwise Slipping is entered when a ratio above `hi` in the window is
///   followed by a drop of more than `band`, or when a full window stays
///   above `hi`. Below `lo` is Stable (Recovery right after IncipientSlip),
///   anything else is IncipientSlip.
pub fn classify_phase(history: &[f64], mu: f64, band: f64, window: usize, prev: ContactPhase) -> ContactPhase {
    let Some(&r) = history.last() else {
        return prev;
    };
    let window = window.max(1);
    let recent = &history[history.len().saturating_sub(window)..];
    let full = recent.len() == window;
    let (lo, hi) = (mu - band / 2.0, mu + band / 2.0);

    match prev {
        ContactPhase::Slipping => {
            return if r < lo { ContactPhase::Recovery } else { ContactPhase::Slipping };
        }
        ContactPhase::Recovery if r < lo => {
            return if full && recent.iter().all(|&x| x < lo) { ContactPhase::Stable } else { ContactPhase::Recovery };
        }
        _ => {}
    }
    let peak = recent.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let dropped = recent[..recent.len() - 1].iter().any(|&x| x > hi) && peak - r > band;
    let persists = full && recent.iter().all(|&x| x > hi);
    if dropped || persists {
        ContactPhase::Slipping
    } else if r < lo {
        if prev == ContactPhase::IncipientSlip {
            ContactPhase::Recovery
        } else {
            ContactPhase::Stable
        }
    } else {
        ContactPhase::IncipientSlip
    }
}

/// Streaming wrapper around [`classify_phase`].
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTracker {
    pub mu: f64,
    pub band: f64,
    pub window: usize,
    history: VecDeque<f64>,
    phase: ContactPhase,
}

impl PhaseTracker {
    pub const DEFAULT_WINDOW: usize = 10;

    pub fn new(mu: f64, band: f64, window: usize) -> Self {
        Self { mu, band, window: window.max(1), history: VecDeque::new(), phase: ContactPhase::Stable }
    }

    pub fn phase(&self) -> ContactPhase {
        self.phase
    }

    /// Feeds one ratio. Undefined ratios (non-finite) keep the phase.
    pub fn push(&mut self, ratio: f64) -> ContactPhase {
        if !ratio.is_finite() {
            return self.phase;
        }
        if self.history.len() == self.window {
            self.history.pop_front();
        }
        self.history.push_back(ratio);
        let h = self.history.make_contiguous();
        self.phase = classify_phase(h, self.mu, self.band, self.window, self.phase);
        self.phase
    }
}

/// Replays a ratio trace from the Stable phase.
pub fn replay_phases(ratios: &[f64], mu: f64, band: f64, window: usize) -> Vec<ContactPhase> {
    let mut t = PhaseTracker::new(mu, band, window);
    ratios.iter().map(|&r| t.push(r)).collect()
}

/// Consecutive duplicates removed.
pub fn phase_sequence(phases: &[ContactPhase]) -> Vec<ContactPhase> {
    let mut out: Vec<ContactPhase> = Vec::new();
    for &p in phases {
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ControllerConfig {
    /// Nominal friction coefficient.
    pub mu: f64,
    /// Band width around `mu` (ratio units).
    pub band: f64,
    /// Opening change per decision (mm).
    pub step: f64,
    /// Control period (s).
    pub period: f64,
    /// Actuator opening limits `[min, max]` (mm).
    pub limits: [f64; 2],
}

impl Default for ControllerConfig {
    fn default() -> Self {
        Self { mu: 0.6, band: 0.2, step: 0.1, period: 0.02, limits: [0.0, 100.0] }
    }
}

impl ControllerConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.mu > 0.0
            && self.band > 0.0
            && self.step > 0.0
            && self.period > 0.0
            && self.limits[0].is_finite()
            && self.limits[1].is_finite()
            && self.limits[0] <= self.limits[1];
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput("controller needs mu, band, step, period > 0 and ordered limits".into()))
        }
    }

    pub fn lower(&self) -> f64 {
        self.mu - self.band / 2.0
    }

    pub fn upper(&self) -> f64 {
        self.mu + self.band / 2.0
    }
}

/// Requested opening: close when both ratios exceed `mu + band/2`, open when
/// both are below `mu - band/2`, hold otherwise or when a contact is lost.
pub fn controller_step(cfg: &ControllerConfig, left: &WrenchEstimate, right: &WrenchEstimate, d_g: f64) -> f64 {
    if left.f_n <= MIN_NORMAL_FORCE || right.f_n <= MIN_NORMAL_FORCE {
        return d_g.clamp(cfg.limits[0], cfg.limits[1]);
    }
    let (rl, rr) = (left.f_t / left.f_n, right.f_t / right.f_n);
    let d_r = if rl > cfg.upper() && rr > cfg.upper() {
        d_g - cfg.step
    } else if rl < cfg.lower() && rr < cfg.lower() {
        d_g + cfg.step
    } else {
        d_g
    };
    d_r.clamp(cfg.limits[0], cfg.limits[1])
}

/// Piecewise-linear external load (N) over time (s), constant beyond the ends.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LoadSchedule {
    pub points: Vec<[f64; 2]>,
}

impl LoadSchedule {
    pub fn new(points: Vec<[f64; 2]>) -> Result<Self> {
        let s = Self { points };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::InvalidInput("load schedule needs at least one point".into()));
        }
        if self.points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite() || p[1] < 0.0) {
            return Err(Error::InvalidInput("load schedule points must be finite with load >= 0".into()));
        }
        if self.points.windows(2).any(|w| w[1][0] <= w[0][0]) {
            return Err(Error::InvalidInput("load schedule times must increase".into()));
        }
        Ok(())
    }

    pub fn at(&self, t: f64) -> f64 {
        let p = &self.points;
        if t <= p[0][0] {
            return p[0][1];
        }
        for w in p.windows(2) {
            if t <= w[1][0] {
                let a = (t - w[0][0]) / (w[1][0] - w[0][0]);
                return w[0][1] + a * (w[1][1] - w[0][1]);
            }
        }
        p[p.len() - 1][1]
    }
}

/// Translational two-finger plant.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Plant {
    pub friction: FrictionModel,
    /// Elastomer stiffness (N/mm).
    pub stiffness: f64,
    /// Per-finger stiffness multipliers (fabrication variance).
    pub finger_gain: [f64; 2],
    /// Opening at which both fingers first touch the object (mm).
    pub contact_opening: f64,
    /// Object mass (kg).
    pub object_mass: f64,
    /// Slip distance that breaks the contact (mm).
    pub break_distance: f64,
}

impl Default for Plant {
    fn default() -> Self {
        Self {
            friction: FrictionModel { mu_static: 0.8, mu_dynamic: 0.6, mu_nominal: 0.6 },
            stiffness: 2.0,
            finger_gain: [1.0, 1.0],
            contact_opening: 40.0,
            object_mass: 0.1,
            break_distance: 5.0,
        }
    }
}

impl Plant {
    pub fn validate(&self) -> Result<()> {
        self.friction.validate()?;
        if !(self.stiffness > 0.0 && self.stiffness.is_finite()) {
            return Err(Error::InvalidPlant("stiffness must be > 0".into()));
        }
        if self.finger_gain.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
            return Err(Error::InvalidPlant("finger gains must be > 0".into()));
        }
        if !(self.object_mass > 0.0 && self.object_mass.is_finite()) {
            return Err(Error::InvalidPlant("object mass must be > 0".into()));
        }
        if !(self.break_distance > 0.0 && self.break_distance.is_finite() && self.contact_opening.is_finite()) {
            return Err(Error::InvalidPlant("break distance must be > 0 and contact opening finite".into()));
        }
        Ok(())
    }

    /// Spring normal force of each finger at opening `d_g`.
    pub fn normal_forces(&self, d_g: f64) -> [f64; 2] {
        let squeeze = (self.contact_opening - d_g).max(0.0);
        [self.stiffness * self.finger_gain[0] * squeeze, self.stiffness * self.finger_gain[1] * squeeze]
    }
}

/// Which finger a wrench reading belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Finger {
    Left,
    Right,
}

/// Source of the wrench estimates the controller sees.
pub trait WrenchSensor {
    /// Estimate for one finger given the plant's true contact forces.
    fn sense(&mut self, finger: Finger, truth: &WrenchEstimate) -> Result<WrenchEstimate>;
}

/// Passes the plant's true wrenches through unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct PlantTruth;

impl WrenchSensor for PlantTruth {
    fn sense(&mut self, _finger: Finger, truth: &WrenchEstimate) -> Result<WrenchEstimate> {
        Ok(*truth)
    }
}

/// Renders each true wrench as a displacement field and estimates it back
/// through the decomposition features and a calibrated model.
#[derive(Debug, Clone)]
pub struct PipelineSensor {
    pub surrogate: SurrogateConfig,
    pub contact_radius: f64,
    pub significance: f64,
    model: WrenchModel,
    solver: PoissonSolver,
    readings: u64,
}

impl PipelineSensor {
    pub fn new(surrogate: SurrogateConfig, grid: GridSpec, contact_radius: f64, model: WrenchModel) -> Result<Self> {
        surrogate.validate()?;
        if let WrenchModel::Raw { .. } = model {
            return Err(Error::InvalidInput("the sensor pipeline needs a feature model".into()));
        }
        let solver = PoissonSolver::new(grid, &SolverConfig::default())?;
        Ok(Self { surrogate, contact_radius, significance: DEFAULT_SIGNIFICANCE, model, solver, readings: 0 })
    }
}

impl WrenchSensor for PipelineSensor {
    fn sense(&mut self, _finger: Finger, truth: &WrenchEstimate) -> Result<WrenchEstimate> {
        let grid = *self.solver.grid();
        let dir = truth.direction.unwrap_or([1.0, 0.0]);
        let load = LoadTriple {
            f_n: truth.f_n,
            f_t: [truth.f_t * dir[0], truth.f_t * dir[1]],
            f_tau: truth.f_tau,
            contact_center: grid.center(),
            contact_radius: self.contact_radius,
        };
        let mut cfg = self.surrogate;
        cfg.seed = derive_seed(self.surrogate.seed, self.readings);
        self.readings += 1;
        let field = render_load(&cfg, &load, grid)?;
        let features = compute_features_using(&field, self.significance, &self.solver)?.features;
        self.model.predict(&features)
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Scenario {
    pub plant: Plant,
    pub schedule: LoadSchedule,
    /// `None` keeps the opening fixed.
    pub controller: Option<ControllerConfig>,
    pub initial_opening: f64,
    pub duration: f64,
    pub dt: f64,
    /// Ratio band and window used for phase labels in the trace.
    #[cfg_attr(feature = "serde", serde(default = "default_window"))]
    pub phase_window: usize,
}

#[cfg(feature = "serde")]
fn default_window() -> usize {
    PhaseTracker::DEFAULT_WINDOW
}

impl Scenario {
    /// Load ramps from 1 N to 10 N over 5 s, holds, and unloads to 1 N by 14 s.
    pub fn ramp(controller: Option<ControllerConfig>) -> Self {
        Self {
            plant: Plant::default(),
            schedule: LoadSchedule { points: alloc::vec![[0.0, 1.0], [1.0, 1.0], [6.0, 10.0], [9.0, 10.0], [14.0, 1.0]] },
            controller,
            initial_opening: 39.25,
            duration: 16.0,
            dt: 0.001,
            phase_window: PhaseTracker::DEFAULT_WINDOW,
        }
    }

    /// Control period used for decisions and trace rows.
    pub fn period(&self) -> f64 {
        self.controller.map_or(0.02, |c| c.period)
    }

    pub fn validate(&self) -> Result<()> {
        self.plant.validate()?;
        self.schedule.validate()?;
        if let Some(c) = &self.controller {
            c.validate()?;
        }
        if !(self.dt > 0.0 && self.duration > 0.0 && self.dt <= self.period()) {
            return Err(Error::InvalidInput("need 0 < dt <= control period and duration > 0".into()));
        }
        if !self.initial_opening.is_finite() {
            return Err(Error::InvalidInput("initial opening must be finite".into()));
        }
        Ok(())
    }
}

/// Snapshot at one control instant.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GraspState {
    pub time: f64,
    /// Gripper opening (mm).
    pub d_g: f64,
    /// True contact wrenches.
    pub f_left: WrenchEstimate,
    pub f_right: WrenchEstimate,
    /// Ratios the controller saw, `NaN` when undefined.
    pub sensed_ratio: [f64; 2],
    /// Downward object velocity (mm/s).
    pub object_velocity: f64,
    /// Accumulated slip (mm).
    pub slip_distance: f64,
    pub external_load: f64,
    pub phase: [ContactPhase; 2],
    pub slipping: bool,
}

impl GraspState {
    pub fn true_ratios(&self) -> [f64; 2] {
        [ratio(&self.f_left), ratio(&self.f_right)]
    }
}

fn ratio(w: &WrenchEstimate) -> f64 {
    if w.f_n > MIN_NORMAL_FORCE {
        w.f_t / w.f_n
    } else {
        f64::NAN
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationResult {
    pub trace: Vec<GraspState>,
    /// Time the contact broke, if it did.
    pub failure_time: Option<f64>,
}

impl SimulationResult {
    pub fn failed(&self) -> bool {
        self.failure_time.is_some()
    }

    /// Lengths, in trace rows, of every run with both true ratios above `limit`
    /// or either finger slipping.
    pub fn excursions_above(&self, limit: f64) -> Vec<usize> {
        let mut runs = Vec::new();
        let mut run = 0;
        for s in &self.trace {
            let r = s.true_ratios();
            let above = s.slipping || (r[0] > limit && r[1] > limit);
            if above {
                run += 1;
            } else if run > 0 {
                runs.push(run);
                run = 0;
            }
        }
        if run > 0 {
            runs.push(run);
        }
        runs
    }
}

/// Integrates the plant with step `dt`; the controller and the trace run once
/// per control period.
pub fn simulate_holding(scenario: &Scenario, sensor: &mut dyn WrenchSensor) -> Result<SimulationResult> {
    scenario.validate()?;
    let plant = &scenario.plant;
    let mu = &plant.friction;
    let period = scenario.period();
    let steps_per_period = libm::round(period / scenario.dt).max(1.0) as usize;
    let dt = period / steps_per_period as f64;
    let n_periods = libm::ceil(scenario.duration / period) as usize;
    let (band_mu, band) = scenario.controller.map_or((mu.mu_nominal, 0.2), |c| (c.mu, c.band));
    let mut trackers = [
        PhaseTracker::new(band_mu, band, scenario.phase_window),
        PhaseTracker::new(band_mu, band, scenario.phase_window),
    ];

    let mut d_g = scenario.initial_opening;
    if let Some(c) = &scenario.controller {
        d_g = d_g.clamp(c.limits[0], c.limits[1]);
    }
    let mut velocity = 0.0;
    let mut slip = 0.0;
    let mut slipping = false;
    let mut trace = Vec::with_capacity(n_periods + 1);

    let wrenches = |d_g: f64, load: f64, slipping: bool| -> [WrenchEstimate; 2] {
        let f_n = plant.normal_forces(d_g);
        let f_t = |k: usize| if slipping { mu.mu_dynamic * f_n[k] } else { load / 2.0 };
        let w = |k: usize| WrenchEstimate { f_n: f_n[k], f_t: f_t(k), direction: Some([0.0, -1.0]), f_tau: 0.0 };
        [w(0), w(1)]
    };
    let holds = |d_g: f64, load: f64| {
        let f_n = plant.normal_forces(d_g);
        load / 2.0 <= mu.mu_static * f_n[0] && load / 2.0 <= mu.mu_static * f_n[1]
    };

    for k in 0..=n_periods {
        let t = k as f64 * period;
        let load = scenario.schedule.at(t);
        let truth = wrenches(d_g, load, slipping);
        let sensed = [sensor.sense(Finger::Left, &truth[0])?, sensor.sense(Finger::Right, &truth[1])?];
        let sensed_ratio = [ratio(&sensed[0]), ratio(&sensed[1])];
        let phase = [trackers[0].push(sensed_ratio[0]), trackers[1].push(sensed_ratio[1])];
        trace.push(GraspState {
            time: t,
            d_g,
            f_left: truth[0],
            f_right: truth[1],
            sensed_ratio,
            object_velocity: velocity,
            slip_distance: slip,
            external_load: load,
            phase,
            slipping,
        });
        if k == n_periods {
            break;
        }
        if let Some(c) = &scenario.controller {
            d_g = controller_step(c, &sensed[0], &sensed[1], d_g);
        }

        for s in 0..steps_per_period {
            let ts = t + s as f64 * dt;
            let load = scenario.schedule.at(ts);
            if !slipping && !holds(d_g, load) {
                slipping = true;
            }
            if slipping {
                let f_n = plant.normal_forces(d_g);
                let friction = mu.mu_dynamic * (f_n[0] + f_n[1]);
                let mass = plant.object_mass.max(load / GRAVITY);
                velocity += (load - friction) / mass * GRAVITY_MM / GRAVITY * dt;
                if velocity <= 0.0 {
                    velocity = 0.0;
                    if holds(d_g, load) {
                        slipping = false;
                    }
                }
                slip += velocity * dt;
                if slip > plant.break_distance {
                    let failure_time = ts + dt;
                    let truth = wrenches(d_g, load, true);
                    trace.push(GraspState {
                        time: failure_time,
                        d_g,
                        f_left: truth[0],
                        f_right: truth[1],
                        sensed_ratio: [ratio(&truth[0]), ratio(&truth[1])],
                        object_velocity: velocity,
                        slip_distance: slip,
                        external_load: load,
                        phase: [ContactPhase::Slipping; 2],
                        slipping: true,
                    });
                    return Ok(SimulationResult { trace, failure_time: Some(failure_time) });
                }
            }
        }
    }
    Ok(SimulationResult { trace, failure_time: None })
}
