//! Gradient-ascent calibration of ramped pulses.
//!
//! For each rise time `tau` and target angle the amplitude factor `xi` and
//! the extra duration `delta_t` are tuned until the ramped x′ pulse matches
//! the ideal square rotation. z′ pulses are the σx mirror image of x′ pulses,
//! so one set of entries serves both axes.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::decomposition::PulseAxis;
use crate::error::{domain, Error, Result};
use crate::pulse::{
    minimum_lobe, square_duration_fraction, CorrectionEntry, MinimumLobe, PulseTrain,
};
use crate::two_level::{
    default_dt, process_fidelity, realized_unitary, square_pulse_unitary, QubitParams, Unitary2,
};

pub const SCHEMA_VERSION: u32 = 1;

/// Quantity being maximized.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Objective {
    #[default]
    ProcessFidelity,
}

/// Settings of the finite-difference gradient ascent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AscentConfig {
    /// Per-coordinate scale of the first trial step `(xi, delta_t)`.
    pub initial_step: (f64, f64),
    /// Factor applied to the step after a rejected trial.
    pub shrink: f64,
    pub max_evals: usize,
    /// Stop once the infidelity drops below this value.
    pub tolerance: f64,
    /// Stop once an accepted step is smaller than this in both coordinates.
    pub step_tolerance: f64,
    /// Central-difference widths `(xi, delta_t)`.
    pub fd_step: (f64, f64),
    /// Calibrate angles below the minimum with the two-pulse complement.
    pub complement: bool,
    pub objective: Objective,
}

impl Default for AscentConfig {
    fn default() -> Self {
        Self {
            initial_step: (0.02, 0.005),
            shrink: 0.5,
            max_evals: 20_000,
            tolerance: 1e-8,
            step_tolerance: 1e-7,
            fd_step: (1e-4, 1e-4),
            complement: true,
            objective: Objective::ProcessFidelity,
        }
    }
}

impl AscentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_evals < 1000 {
            return Err(domain("max_evals must be at least 1000"));
        }
        if !(self.shrink > 0.0 && self.shrink < 1.0) {
            return Err(domain("shrink factor must lie in (0, 1)"));
        }
        if !(self.tolerance > 0.0 && self.step_tolerance > 0.0) {
            return Err(domain("tolerances must be positive"));
        }
        if !(self.fd_step.0 > 0.0 && self.fd_step.1 > 0.0) {
            return Err(domain("finite-difference steps must be positive"));
        }
        Ok(())
    }
}

/// Acceptance threshold on the residual process infidelity of stored entries.
pub const MAX_RESIDUAL: f64 = 1e-4;

fn target_unitary(angle: f64, axis: PulseAxis) -> Unitary2<f64> {
    square_pulse_unitary(axis.bloch(), angle).expect("x′/z′ are unit vectors")
}

/// Process fidelity of the pulse(s) described by `entry` on `axis`.
///
/// A flat top that would be negative is clamped to zero, which makes the
/// landscape flat in `delta_t` below the feasible edge.
pub fn entry_fidelity(
    entry: &CorrectionEntry<f64>,
    axis: PulseAxis,
    params: &QubitParams<f64>,
) -> Result<f64> {
    let mut e = *entry;
    let (angle, _) = e.pulse_plan();
    e.delta_t = e.delta_t.max(CorrectionEntry::min_delta_t(e.tau, angle));
    let w = PulseTrain::new(e.segments(axis)?).waveform(params);
    let u = realized_unitary(&w, params, default_dt(params))?;
    process_fidelity(&u, &target_unitary(entry.target_angle, axis))
}

/// Fidelity of a single direct-mode ramped x′ pulse.
pub fn objective(
    xi: f64,
    delta_t: f64,
    tau: f64,
    angle: f64,
    params: &QubitParams<f64>,
) -> Result<f64> {
    if !(xi > 0.0) || !(delta_t >= 0.0) {
        return Err(domain("objective needs xi > 0 and delta_t >= 0"));
    }
    let entry = CorrectionEntry {
        tau,
        target_angle: angle,
        xi,
        delta_t,
        residual_error: 0.0,
        complement: false,
    };
    entry_fidelity(&entry, PulseAxis::XPrime, params)
}

/// Best point found when the ascent gave up.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationFailure {
    pub best: CorrectionEntry<f64>,
    pub evals: usize,
    pub reason: String,
}

impl std::fmt::Display for CalibrationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "tau {} angle {}: {} (residual {:e} after {} evaluations)",
            self.best.tau,
            self.best.target_angle,
            self.reason,
            self.best.residual_error,
            self.evals
        )
    }
}

/// Outcome of one point calibration.
pub type PointResult = std::result::Result<CorrectionEntry<f64>, CalibrationFailure>;

struct Ascent<'a> {
    tau: f64,
    angle: f64,
    complement: bool,
    params: &'a QubitParams<f64>,
    cfg: &'a AscentConfig,
    evals: usize,
}

impl Ascent<'_> {
    fn entry(&self, xi: f64, delta_t: f64) -> CorrectionEntry<f64> {
        CorrectionEntry {
            tau: self.tau,
            target_angle: self.angle,
            xi,
            delta_t,
            residual_error: 0.0,
            complement: self.complement,
        }
    }

    fn floor(&self) -> f64 {
        let (angle, _) = self.entry(1.0, 0.0).pulse_plan();
        CorrectionEntry::min_delta_t(self.tau, angle)
    }

    fn project(&self, x: (f64, f64)) -> (f64, f64) {
        (x.0.max(1e-6), x.1.max(self.floor()))
    }

    fn eval(&mut self, x: (f64, f64)) -> f64 {
        self.evals += 1;
        entry_fidelity(&self.entry(x.0, x.1), PulseAxis::XPrime, self.params).unwrap_or(0.0)
    }

    fn gradient(&mut self, x: (f64, f64)) -> (f64, f64) {
        let (hx, hd) = self.cfg.fd_step;
        let gx = (self.eval((x.0 + hx, x.1)) - self.eval((x.0 - hx, x.1))) / (2.0 * hx);
        let gd = (self.eval((x.0, x.1 + hd)) - self.eval((x.0, x.1 - hd))) / (2.0 * hd);
        (gx, gd)
    }

    fn run(&mut self, start: (f64, f64)) -> PointResult {
        let cfg = *self.cfg;
        let (sx, sd) = cfg.initial_step;
        let mut x = self.project(start);
        let mut fx = self.eval(x);
        let mut eta: f64 = 1.0;
        let finish = |s: &Self, x: (f64, f64), fx: f64| {
            let mut e = s.entry(x.0, x.1);
            e.residual_error = 1.0 - fx;
            e
        };
        'outer: while 1.0 - fx > cfg.tolerance {
            if self.evals + 5 > cfg.max_evals {
                return self.conclude(finish(self, x, fx), "evaluation budget exhausted");
            }
            let g = self.gradient(x);
            let u = (g.0 * sx, g.1 * sd);
            let norm = u.0.hypot(u.1);
            if norm == 0.0 {
                break;
            }
            let dir = (sx * u.0 / norm, sd * u.1 / norm);
            eta = (eta * 2.0).min(1.0);
            loop {
                if self.evals >= cfg.max_evals {
                    break 'outer;
                }
                let trial = self.project((x.0 + eta * dir.0, x.1 + eta * dir.1));
                let moved = ((trial.0 - x.0).abs(), (trial.1 - x.1).abs());
                if moved.0 < cfg.step_tolerance && moved.1 < cfg.step_tolerance {
                    break 'outer;
                }
                let ft = self.eval(trial);
                if ft > fx {
                    x = trial;
                    fx = ft;
                    break;
                }
                eta *= cfg.shrink;
            }
        }
        self.conclude(
            finish(self, x, fx),
            "ascent stalled above the residual limit",
        )
    }

    fn conclude(&self, best: CorrectionEntry<f64>, reason: &str) -> PointResult {
        if best.residual_error < MAX_RESIDUAL {
            Ok(best)
        } else {
            Err(CalibrationFailure {
                best,
                evals: self.evals,
                reason: reason.into(),
            })
        }
    }
}

/// Calibrates one point from an explicit starting guess.
pub fn calibrate_from(
    tau: f64,
    angle: f64,
    complement: bool,
    start: (f64, f64),
    params: &QubitParams<f64>,
    cfg: &AscentConfig,
) -> PointResult {
    let mut a = Ascent {
        tau,
        angle,
        complement,
        params,
        cfg,
        evals: 0,
    };
    if tau == 0.0 && !complement {
        let mut e = a.entry(1.0, 0.0);
        e.residual_error = 1.0 - a.eval((1.0, 0.0));
        return Ok(e);
    }
    a.run(start)
}

/// Default starting point `(1, tau/2)`, lifted onto the feasible region.
fn default_start(tau: f64) -> (f64, f64) {
    (1.0, 0.5 * tau)
}

/// Calibrates `(xi, delta_t)` for one rise time and target angle.
///
/// Angles below the single-pulse minimum use complement mode when
/// `cfg.complement` is set and fail otherwise.
pub fn calibrate_point(
    tau: f64,
    angle: f64,
    params: &QubitParams<f64>,
    cfg: &AscentConfig,
) -> PointResult {
    let fail = |reason: String| CalibrationFailure {
        best: CorrectionEntry {
            tau,
            target_angle: angle,
            xi: 1.0,
            delta_t: 0.0,
            residual_error: 1.0,
            complement: false,
        },
        evals: 0,
        reason,
    };
    if let Err(e) = cfg.validate() {
        return Err(fail(e.to_string()));
    }
    if tau == 0.0 {
        return calibrate_from(tau, angle, false, (1.0, 0.0), params, cfg);
    }
    let lobe = minimum_lobe(tau, params).map_err(|e| fail(e.to_string()))?;
    if angle >= lobe.angle {
        calibrate_from(tau, angle, false, lobe_start(&lobe, angle), params, cfg)
    } else if cfg.complement {
        let beta = (angle + std::f64::consts::TAU) / 2.0;
        calibrate_from(tau, angle, true, lobe_start(&lobe, beta), params, cfg)
    } else {
        Err(fail(format!(
            "angle {angle} is below the minimum {} for this rise time",
            lobe.angle
        )))
    }
}

/// A full turn is realized by idling for one `t_x` at zero amplitude.
fn full_turn_start() -> (f64, f64) {
    (0.0, 1.0 - std::f64::consts::FRAC_1_SQRT_2)
}

/// Starting guess interpolated between the minimum lobe and `(1, tau/2)`.
fn lobe_start(lobe: &MinimumLobe<f64>, pulse_angle: f64) -> (f64, f64) {
    let floor = CorrectionEntry::min_delta_t(lobe.tau, pulse_angle);
    let near = (pulse_angle - lobe.angle).abs() < 0.2;
    if near {
        (lobe.xi, floor.max(0.0))
    } else {
        let (xi, dt) = default_start(lobe.tau);
        (xi, dt.max(floor))
    }
}

/// Minimum-angle record stored with each rise time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinAngleRecord {
    pub tau: f64,
    pub xi: f64,
    pub angle: f64,
}

/// Calibrated corrections for a set of rise times and angles.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CalibrationTable {
    pub schema_version: u32,
    pub params: QubitParams<f64>,
    pub tolerance: f64,
    /// Seconds since the Unix epoch; left empty for reproducible builds.
    #[serde(default)]
    pub build_timestamp: Option<u64>,
    /// Whether the x′ entries were checked to serve z′ unchanged.
    pub axis_symmetric: bool,
    pub min_angles: Vec<MinAngleRecord>,
    /// Sorted by `(tau, target_angle)`.
    pub entries: Vec<CorrectionEntry<f64>>,
    /// Free-form build metadata (tool version, config hash, ...).
    #[serde(default)]
    pub provenance: BTreeMap<String, String>,
}

const TAU_MATCH: f64 = 1e-9;
const ANGLE_MATCH: f64 = 1e-9;

impl CalibrationTable {
    pub fn empty(params: QubitParams<f64>) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            params,
            tolerance: MAX_RESIDUAL,
            build_timestamp: None,
            axis_symmetric: true,
            min_angles: Vec::new(),
            entries: Vec::new(),
            provenance: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, entry: CorrectionEntry<f64>) -> Result<()> {
        if !(entry.residual_error < self.tolerance) {
            return Err(domain(format!(
                "entry residual {:e} exceeds table tolerance {:e}",
                entry.residual_error, self.tolerance
            )));
        }
        self.entries.retain(|e| {
            (e.tau - entry.tau).abs() > TAU_MATCH
                || (e.target_angle - entry.target_angle).abs() > ANGLE_MATCH
        });
        self.entries.push(entry);
        self.sort();
        Ok(())
    }

    fn sort(&mut self) {
        self.entries.sort_by(|a, b| {
            a.tau
                .total_cmp(&b.tau)
                .then(a.target_angle.total_cmp(&b.target_angle))
        });
        self.min_angles.sort_by(|a, b| a.tau.total_cmp(&b.tau));
    }

    pub fn taus(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for e in &self.entries {
            if out.last().is_none_or(|t| (e.tau - t).abs() > TAU_MATCH) {
                out.push(e.tau);
            }
        }
        out
    }

    /// Entries at one rise time, sorted by angle.
    pub fn line(&self, tau: f64) -> Vec<&CorrectionEntry<f64>> {
        self.entries
            .iter()
            .filter(|e| (e.tau - tau).abs() <= TAU_MATCH)
            .collect()
    }

    pub fn min_angle_record(&self, tau: f64) -> Option<&MinAngleRecord> {
        self.min_angles
            .iter()
            .find(|m| (m.tau - tau).abs() <= TAU_MATCH)
    }

    /// Exact lookup; the axis is irrelevant for symmetric tables.
    pub fn get(&self, tau: f64, angle: f64) -> Option<&CorrectionEntry<f64>> {
        self.entries.iter().find(|e| {
            (e.tau - tau).abs() <= TAU_MATCH && (e.target_angle - angle).abs() <= ANGLE_MATCH
        })
    }

    /// Entry for `(tau, angle)`: exact when tabulated, otherwise interpolated
    /// in angle, verified, and re-optimized when verification fails.
    ///
    /// Angles below the minimum map to complement mode, whose pulses are the
    /// direct-mode pulses for `(angle + 2π)/2`.
    pub fn resolve(
        &self,
        tau: f64,
        angle: f64,
        params: &QubitParams<f64>,
    ) -> Result<CorrectionEntry<f64>> {
        if tau == 0.0 {
            return Ok(CorrectionEntry::ideal(angle));
        }
        if let Some(e) = self.get(tau, angle) {
            return Ok(*e);
        }
        let missing = || Error::MissingEntry { tau, angle };
        let min = self.min_angle_record(tau).ok_or_else(missing)?;
        let complement = angle < min.angle;
        let pulse_angle = if complement {
            (angle + std::f64::consts::TAU) / 2.0
        } else {
            angle
        };
        let (xi, delta_t) = self
            .interpolate(tau, pulse_angle, min)
            .ok_or_else(missing)?;
        let mut entry = CorrectionEntry {
            tau,
            target_angle: angle,
            xi,
            delta_t,
            residual_error: 0.0,
            complement,
        };
        entry.residual_error = 1.0 - entry_fidelity(&entry, PulseAxis::XPrime, params)?;
        if entry.residual_error < self.tolerance {
            return Ok(entry);
        }
        calibrate_from(
            tau,
            angle,
            complement,
            (xi, delta_t),
            params,
            &AscentConfig::default(),
        )
        .map_err(|f| Error::NoConvergence {
            what: format!("re-optimization at tau {tau}, angle {angle}"),
            residual: f.best.residual_error,
        })
    }

    /// Cubic interpolation of `(xi, delta_t)` over direct-mode knots.
    fn interpolate(&self, tau: f64, pulse_angle: f64, min: &MinAngleRecord) -> Option<(f64, f64)> {
        let mut knots: BTreeMap<u64, (f64, f64, f64)> = BTreeMap::new();
        let mut add = |a: f64, xi: f64, dt: f64| {
            knots.insert(a.to_bits(), (a, xi, dt));
        };
        add(
            min.angle,
            min.xi,
            CorrectionEntry::min_delta_t(tau, min.angle),
        );
        for e in self.line(tau) {
            let (a, n) = e.pulse_plan();
            if n == 1 && e.target_angle >= min.angle {
                add(a, e.xi, e.delta_t);
            }
        }
        let pts: Vec<(f64, f64, f64)> = knots.into_values().collect();
        if pts.len() < 2 {
            return None;
        }
        let first = pts.first()?.0;
        let last = pts.last()?.0;
        if pulse_angle < first - ANGLE_MATCH || pulse_angle > last + ANGLE_MATCH {
            return None;
        }
        let hi = pts
            .iter()
            .position(|p| p.0 >= pulse_angle)
            .unwrap_or(pts.len() - 1)
            .max(1);
        let lo_idx = hi.saturating_sub(2);
        let hi_idx = (hi + 1).min(pts.len() - 1);
        let window = &pts[lo_idx..=hi_idx];
        let lagrange = |f: &dyn Fn(&(f64, f64, f64)) -> f64| {
            window.iter().enumerate().fold(0.0, |acc, (i, pi)| {
                let w = window.iter().enumerate().fold(1.0, |w, (j, pj)| {
                    if i == j {
                        w
                    } else {
                        w * (pulse_angle - pj.0) / (pi.0 - pj.0)
                    }
                });
                acc + w * f(pi)
            })
        };
        Some((lagrange(&|p| p.1), lagrange(&|p| p.2)))
    }

    /// Recomputes every residual with the current propagator.
    pub fn verify(&self, params: &QubitParams<f64>) -> Result<Vec<f64>> {
        self.entries
            .iter()
            .map(|e| Ok(1.0 - entry_fidelity(e, PulseAxis::XPrime, params)?))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Format(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let t: Self = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        if t.schema_version != SCHEMA_VERSION {
            return Err(Error::Format(format!(
                "unsupported table schema version {}",
                t.schema_version
            )));
        }
        Ok(t)
    }
}

/// Result of a table build: the table plus everything that went wrong.
#[derive(Clone, Debug)]
pub struct TableBuild {
    pub table: CalibrationTable,
    pub failures: Vec<CalibrationFailure>,
    /// Trend violations and other non-fatal findings.
    pub warnings: Vec<String>,
}

struct LineOutcome {
    min: MinAngleRecord,
    entries: Vec<CorrectionEntry<f64>>,
    failures: Vec<CalibrationFailure>,
    warnings: Vec<String>,
}

fn calibrate_line(
    tau: f64,
    angles: &[f64],
    params: &QubitParams<f64>,
    cfg: &AscentConfig,
) -> Result<LineOutcome> {
    let lobe = minimum_lobe(tau, params)?;
    let mut out = LineOutcome {
        min: MinAngleRecord {
            tau,
            xi: lobe.xi,
            angle: lobe.angle,
        },
        entries: Vec::new(),
        failures: Vec::new(),
        warnings: Vec::new(),
    };
    let mut sorted: Vec<f64> = angles.to_vec();
    sorted.sort_by(f64::total_cmp);
    // direct points in increasing angle, each warm-started from its predecessor
    let mut prev: Option<(f64, f64, f64)> = None;
    for &angle in sorted.iter().filter(|&&a| a >= lobe.angle) {
        let start = match prev {
            Some((a, xi, dt)) => (
                xi,
                dt + square_duration_fraction(a) - square_duration_fraction(angle),
            ),
            None => lobe_start(&lobe, angle),
        };
        // a warm start from a distant neighbour can land on the wrong
        // branch, so a failure gets one retry from the cold start
        let result = calibrate_from(tau, angle, false, start, params, cfg).or_else(|warm| {
            let retry = if (angle - std::f64::consts::TAU).abs() < ANGLE_MATCH {
                full_turn_start()
            } else {
                lobe_start(&lobe, angle)
            };
            if retry == start {
                return Err(warm);
            }
            calibrate_from(tau, angle, false, retry, params, cfg).map_err(|cold| {
                if cold.best.residual_error < warm.best.residual_error {
                    cold
                } else {
                    warm
                }
            })
        });
        match result {
            Ok(e) => {
                prev = Some((angle, e.xi, e.delta_t));
                out.entries.push(e);
            }
            Err(f) => out.failures.push(f),
        }
    }
    // complement points reuse the direct solution at their pulse angle
    let mut partial = CalibrationTable::empty(*params);
    partial.min_angles.push(out.min);
    partial.entries = out.entries.clone();
    for &angle in sorted.iter().filter(|&&a| a < lobe.angle) {
        if !cfg.complement {
            out.failures.push(CalibrationFailure {
                best: CorrectionEntry {
                    tau,
                    target_angle: angle,
                    xi: 1.0,
                    delta_t: 0.0,
                    residual_error: 1.0,
                    complement: false,
                },
                evals: 0,
                reason: "below minimum angle and complement mode disabled".into(),
            });
            continue;
        }
        let beta = (angle + std::f64::consts::TAU) / 2.0;
        let start = partial
            .interpolate(tau, beta, &out.min)
            .unwrap_or_else(|| lobe_start(&lobe, beta));
        match calibrate_from(tau, angle, true, start, params, cfg) {
            Ok(e) => out.entries.push(e),
            Err(f) => out.failures.push(f),
        }
    }
    out.entries
        .sort_by(|a, b| a.target_angle.total_cmp(&b.target_angle));
    out.warnings = trend_warnings(&out.entries);
    Ok(out)
}

/// Points where `delta_t` decreases as the physical pulse angle grows, or is
/// not positive.
pub fn trend_warnings(entries: &[CorrectionEntry<f64>]) -> Vec<String> {
    let mut by_pulse: Vec<(f64, &CorrectionEntry<f64>)> =
        entries.iter().map(|e| (e.pulse_plan().0, e)).collect();
    by_pulse.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out = Vec::new();
    for (_, e) in &by_pulse {
        if !(e.delta_t > 0.0) {
            out.push(format!(
                "tau {} angle {}: delta_t {} is not positive",
                e.tau, e.target_angle, e.delta_t
            ));
        }
    }
    for w in by_pulse.windows(2) {
        let (a, b) = (w[0].1, w[1].1);
        if w[1].0 - w[0].0 > ANGLE_MATCH && b.delta_t < a.delta_t {
            out.push(format!(
                "tau {}: delta_t falls from {} at pulse angle {} to {} at pulse angle {}",
                a.tau, a.delta_t, w[0].0, b.delta_t, w[1].0
            ));
        }
    }
    out
}

/// Calibrates the cross product of rise times and angles.
///
/// Rise-time lines run on separate threads; each line is sequential because
/// of warm starts. Output order does not depend on scheduling.
pub fn build_table(
    taus: &[f64],
    angles: &[f64],
    params: &QubitParams<f64>,
    cfg: &AscentConfig,
) -> Result<TableBuild> {
    if taus.is_empty() || angles.is_empty() {
        return Err(domain("rise-time and angle grids must be nonempty"));
    }
    cfg.validate()?;
    if taus.iter().any(|t| !(*t > 0.0)) {
        return Err(domain("calibration rise times must be positive"));
    }
    let lines: Vec<Result<LineOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = taus
            .iter()
            .map(|&tau| scope.spawn(move || calibrate_line(tau, angles, params, cfg)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("calibration thread panicked"))
            .collect()
    });
    let mut table = CalibrationTable::empty(*params);
    let mut failures = Vec::new();
    let mut warnings = Vec::new();
    for line in lines {
        let line = line?;
        table.min_angles.push(line.min);
        table.entries.extend(line.entries);
        failures.extend(line.failures);
        warnings.extend(line.warnings);
    }
    table.axis_symmetric = check_axis_symmetry(&table, params)?;
    if !table.axis_symmetric {
        warnings.push("z′ pulses do not mirror x′ pulses; table is x′-only".into());
    }
    table.sort();
    Ok(TableBuild {
        table,
        failures,
        warnings,
    })
}

fn check_axis_symmetry(table: &CalibrationTable, params: &QubitParams<f64>) -> Result<bool> {
    for e in &table.entries {
        let fx = entry_fidelity(e, PulseAxis::XPrime, params)?;
        let fz = entry_fidelity(e, PulseAxis::ZPrime, params)?;
        if (fx - fz).abs() > 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}
