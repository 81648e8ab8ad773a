//! Explicit Runge-Kutta time integration of `du/dt = rhs(t, u)`.
//!
//! Two methods are provided: the classical four-stage RK4 with a fixed or
//! CFL-derived step, and the Dormand-Prince 5(4) embedded pair with PI step
//! size control.

use thiserror::Error;

use crate::physics::Equation;
use crate::semidisc::{SemidiscError, Semidiscretization};

/// A system of ODEs.
pub trait OdeSystem {
    type Error: std::error::Error + 'static;

    fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<(), Self::Error>;

    /// Stable step estimate for the given CFL number, if the system knows one.
    fn stable_dt(&self, _u: &[f64], _cfl: f64) -> Option<Result<f64, Self::Error>> {
        None
    }
}

impl<E: Equation> OdeSystem for Semidiscretization<E> {
    type Error = SemidiscError;

    fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<(), SemidiscError> {
        Semidiscretization::rhs(self, t, u, du)
    }

    fn stable_dt(&self, u: &[f64], cfl: f64) -> Option<Result<f64, SemidiscError>> {
        Some(Semidiscretization::stable_dt(self, u, cfl))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Method {
    /// Classical RK4 with a fixed step (`dt`) or a step re-estimated from `cfl` every step.
    Rk4Classic,
    /// Dormand-Prince 5(4) with error control on `abs_tol`, `rel_tol`.
    #[default]
    Rk45Embedded,
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Method::Rk4Classic => "rk4",
            Method::Rk45Embedded => "dopri5",
        })
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "rk4" | "rk4-classic" => Ok(Method::Rk4Classic),
            "dopri5" | "rk45" | "rk45-embedded" => Ok(Method::Rk45Embedded),
            other => Err(format!("unknown time integrator '{other}' (expected rk4, dopri5)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_final: f64,
    /// Fixed step for RK4, initial step for the adaptive method.
    pub dt: Option<f64>,
    /// CFL number used when no fixed `dt` is given.
    pub cfl: f64,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Observer is called every this many accepted steps (and at the start and end).
    pub sample_every: usize,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            method: Method::default(),
            t_final: 1.0,
            dt: None,
            cfl: 0.5,
            abs_tol: 1e-8,
            rel_tol: 1e-8,
            sample_every: 1,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4_fixed(t_final: f64, dt: f64) -> Self {
        Self { method: Method::Rk4Classic, t_final, dt: Some(dt), ..Self::default() }
    }

    pub fn rk4_cfl(t_final: f64, cfl: f64) -> Self {
        Self { method: Method::Rk4Classic, t_final, cfl, ..Self::default() }
    }

    pub fn adaptive(t_final: f64, tol: f64) -> Self {
        Self {
            method: Method::Rk45Embedded,
            t_final,
            abs_tol: tol,
            rel_tol: tol,
            ..Self::default()
        }
    }

    pub fn with_sample_every(mut self, every: usize) -> Self {
        self.sample_every = every;
        self
    }
}

#[derive(Debug, Error)]
pub enum IntegrationError<E: std::error::Error + 'static> {
    #[error("invalid integrator configuration: {0}")]
    InvalidConfig(String),
    #[error("right-hand side failed at t = {t}: {source}")]
    Rhs {
        t: f64,
        #[source]
        source: E,
    },
    #[error("step size underflow at t = {t} (dt = {dt:e})")]
    StepUnderflow { t: f64, dt: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    TooManySteps(usize),
}

/// What the observer wants the integrator to do next.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub t: f64,
    pub step: usize,
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSummary {
    pub t: f64,
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
    pub stopped_early: bool,
}

/// Integrates without observation.
pub fn integrate<S: OdeSystem>(
    system: &S,
    u: &mut [f64],
    config: &IntegratorConfig,
) -> Result<IntegrationSummary, IntegrationError<S::Error>> {
    integrate_observed(system, u, config, |_, _| Control::Continue)
}

/// Integrates from `t = 0` to `config.t_final`, calling `observer` on the initial state,
/// every `sample_every` accepted steps, and on the final state.
pub fn integrate_observed<S, F>(
    system: &S,
    u: &mut [f64],
    config: &IntegratorConfig,
    mut observer: F,
) -> Result<IntegrationSummary, IntegrationError<S::Error>>
where
    S: OdeSystem,
    F: FnMut(&StepInfo, &[f64]) -> Control,
{
    validate(config)?;
    let mut summary = IntegrationSummary {
        t: 0.0,
        accepted: 0,
        rejected: 0,
        rhs_evaluations: 0,
        stopped_early: false,
    };
    if observer(&StepInfo { t: 0.0, step: 0, dt: 0.0 }, u) == Control::Stop {
        summary.stopped_early = true;
        return Ok(summary);
    }
    match config.method {
        Method::Rk4Classic => rk4(system, u, config, &mut observer, &mut summary)?,
        Method::Rk45Embedded => dopri5(system, u, config, &mut observer, &mut summary)?,
    }
    Ok(summary)
}

fn validate<E: std::error::Error>(config: &IntegratorConfig) -> Result<(), IntegrationError<E>> {
    let bad = |m: &str| Err(IntegrationError::InvalidConfig(m.to_string()));
    if !(config.t_final > 0.0 && config.t_final.is_finite()) {
        return bad("t_final must be positive and finite");
    }
    if let Some(dt) = config.dt {
        if !(dt > 0.0 && dt.is_finite()) {
            return bad("dt must be positive and finite");
        }
    }
    if !(config.cfl > 0.0) {
        return bad("cfl must be positive");
    }
    if config.method == Method::Rk45Embedded && !(config.abs_tol > 0.0 && config.rel_tol >= 0.0) {
        return bad("tolerances must be positive");
    }
    if config.sample_every == 0 {
        return bad("sample_every must be at least 1");
    }
    Ok(())
}

/// Clips `dt` so that the final step lands exactly on `t_final`.
fn clip(t: f64, dt: f64, t_final: f64) -> (f64, bool) {
    let remaining = t_final - t;
    if dt >= remaining * (1.0 - 1e-12) {
        (remaining, true)
    } else {
        (dt, false)
    }
}

fn rhs_at<S: OdeSystem>(
    system: &S,
    t: f64,
    u: &[f64],
    du: &mut [f64],
    summary: &mut IntegrationSummary,
) -> Result<(), IntegrationError<S::Error>> {
    summary.rhs_evaluations += 1;
    system.rhs(t, u, du).map_err(|source| IntegrationError::Rhs { t, source })
}

fn notify<F: FnMut(&StepInfo, &[f64]) -> Control>(
    observer: &mut F,
    info: StepInfo,
    u: &[f64],
    last: bool,
    every: usize,
) -> Control {
    if last || info.step % every == 0 {
        observer(&info, u)
    } else {
        Control::Continue
    }
}

fn rk4<S, F>(
    system: &S,
    u: &mut [f64],
    config: &IntegratorConfig,
    observer: &mut F,
    summary: &mut IntegrationSummary,
) -> Result<(), IntegrationError<S::Error>>
where
    S: OdeSystem,
    F: FnMut(&StepInfo, &[f64]) -> Control,
{
    let n = u.len();
    let mut k1 = vec![0.0; n];
    let mut k2 = vec![0.0; n];
    let mut k3 = vec![0.0; n];
    let mut k4 = vec![0.0; n];
    let mut tmp = vec![0.0; n];
    let mut t = 0.0;
    loop {
        if summary.accepted >= config.max_steps {
            return Err(IntegrationError::TooManySteps(config.max_steps));
        }
        let dt = match config.dt {
            Some(dt) => dt,
            None => match system.stable_dt(u, config.cfl) {
                Some(r) => r.map_err(|source| IntegrationError::Rhs { t, source })?,
                None => {
                    return Err(IntegrationError::InvalidConfig(
                        "rk4 needs a fixed dt for systems without a stable step estimate".into(),
                    ))
                }
            },
        };
        let (dt, last) = clip(t, dt, config.t_final);
        if dt < 1e-14 * config.t_final {
            return Err(IntegrationError::StepUnderflow { t, dt });
        }

        rhs_at(system, t, u, &mut k1, summary)?;
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * dt * k1[i];
        }
        rhs_at(system, t + 0.5 * dt, &tmp, &mut k2, summary)?;
        for i in 0..n {
            tmp[i] = u[i] + 0.5 * dt * k2[i];
        }
        rhs_at(system, t + 0.5 * dt, &tmp, &mut k3, summary)?;
        for i in 0..n {
            tmp[i] = u[i] + dt * k3[i];
        }
        rhs_at(system, t + dt, &tmp, &mut k4, summary)?;
        for i in 0..n {
            u[i] += dt / 6.0 * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
        }

        t = if last { config.t_final } else { t + dt };
        summary.accepted += 1;
        summary.t = t;
        let info = StepInfo { t, step: summary.accepted, dt };
        if notify(observer, info, u, last, config.sample_every) == Control::Stop {
            summary.stopped_early = !last;
            return Ok(());
        }
        if last {
            return Ok(());
        }
    }
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order weights.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

const SAFETY: f64 = 0.9;
const PI_ALPHA: f64 = 0.7 / 5.0;
const PI_BETA: f64 = 0.4 / 5.0;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn dopri5<S, F>(
    system: &S,
    u: &mut [f64],
    config: &IntegratorConfig,
    observer: &mut F,
    summary: &mut IntegrationSummary,
) -> Result<(), IntegrationError<S::Error>>
where
    S: OdeSystem,
    F: FnMut(&StepInfo, &[f64]) -> Control,
{
    let n = u.len();
    let mut k: Vec<Vec<f64>> = vec![vec![0.0; n]; 7];
    let mut stage = vec![0.0; n];
    let mut t = 0.0;

    rhs_at(system, t, u, &mut k[0], summary)?;
    let mut dt = match config.dt {
        Some(dt) => dt,
        None => match system.stable_dt(u, config.cfl) {
            Some(r) => r.map_err(|source| IntegrationError::Rhs { t, source })?,
            None => initial_step(u, &k[0], config),
        },
    };
    let mut err_prev: f64 = 1.0;
    let mut after_reject = false;

    loop {
        if summary.accepted + summary.rejected >= config.max_steps {
            return Err(IntegrationError::TooManySteps(config.max_steps));
        }
        let (h, last) = clip(t, dt, config.t_final);
        if h < 1e-14 * config.t_final {
            return Err(IntegrationError::StepUnderflow { t, dt: h });
        }

        // Stages 2..7; a failed evaluation counts as a rejected step.
        let mut failure = None;
        for s in 1..7 {
            for i in 0..n {
                let mut acc = 0.0;
                for (j, kj) in k.iter().enumerate().take(s) {
                    acc += A[s][j] * kj[i];
                }
                stage[i] = u[i] + h * acc;
            }
            let (_, rest) = k.split_at_mut(s);
            summary.rhs_evaluations += 1;
            if let Err(source) = system.rhs(t + C[s] * h, &stage, &mut rest[0]) {
                failure = Some(source);
                break;
            }
        }
        if let Some(source) = failure {
            summary.rejected += 1;
            let next = 0.25 * h;
            if next < 1e-14 * config.t_final {
                return Err(IntegrationError::Rhs { t, source });
            }
            dt = next;
            after_reject = true;
            continue;
        }

        // `stage` now holds the fifth-order solution (the last stage is evaluated there).
        let mut err: f64 = 0.0;
        for i in 0..n {
            let mut e = 0.0;
            for (s, ks) in k.iter().enumerate() {
                e += E[s] * ks[i];
            }
            let scale = config.abs_tol + config.rel_tol * u[i].abs().max(stage[i].abs());
            err = err.max((h * e).abs() / scale);
        }
        if !err.is_finite() {
            err = 1e10;
        }

        if err <= 1.0 {
            u.copy_from_slice(&stage);
            k.swap(0, 6);
            t = if last { config.t_final } else { t + h };
            summary.accepted += 1;
            summary.t = t;
            let err_c = err.max(1e-10);
            let mut factor = SAFETY * err_c.powf(-PI_ALPHA) * err_prev.powf(PI_BETA);
            factor = factor.clamp(MIN_FACTOR, MAX_FACTOR);
            if after_reject {
                factor = factor.min(1.0);
            }
            after_reject = false;
            err_prev = err_c;
            let info = StepInfo { t, step: summary.accepted, dt: h };
            if notify(observer, info, u, last, config.sample_every) == Control::Stop {
                summary.stopped_early = !last;
                return Ok(());
            }
            if last {
                return Ok(());
            }
            dt = h * factor;
        } else {
            summary.rejected += 1;
            let factor = (SAFETY * err.powf(-0.2)).clamp(MIN_FACTOR, 1.0);
            dt = h * factor;
            after_reject = true;
        }
    }
}

/// Step size heuristic from the size of the state and its derivative.
fn initial_step(u: &[f64], du: &[f64], config: &IntegratorConfig) -> f64 {
    let mut d0: f64 = 0.0;
    let mut d1: f64 = 0.0;
    for (x, dx) in u.iter().zip(du) {
        let sc = config.abs_tol + config.rel_tol * x.abs();
        d0 = d0.max(x.abs() / sc);
        d1 = d1.max(dx.abs() / sc);
    }
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(config.t_final)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    struct Decay;

    impl OdeSystem for Decay {
        type Error = Infallible;

        fn rhs(&self, _t: f64, u: &[f64], du: &mut [f64]) -> Result<(), Infallible> {
            du[0] = -u[0];
            Ok(())
        }
    }

    /// u' = -2 t u, u(0) = 1, u = exp(-t²).
    struct Gaussian;

    impl OdeSystem for Gaussian {
        type Error = Infallible;

        fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<(), Infallible> {
            du[0] = -2.0 * t * u[0];
            Ok(())
        }
    }

    #[derive(Debug, Error)]
    #[error("negative state")]
    struct Negative;

    /// u' = -1 that fails once `u` turns negative.
    struct Drain;

    impl OdeSystem for Drain {
        type Error = Negative;

        fn rhs(&self, _t: f64, u: &[f64], du: &mut [f64]) -> Result<(), Negative> {
            if u[0] < 0.0 {
                return Err(Negative);
            }
            du[0] = -1.0;
            Ok(())
        }
    }

    #[test]
    fn rk4_decay_at_t1() {
        let mut u = [1.0];
        let s = integrate(&Decay, &mut u, &IntegratorConfig::rk4_fixed(1.0, 0.1)).unwrap();
        assert_eq!(s.accepted, 10);
        assert_eq!(s.t, 1.0);
        assert!((u[0] - (-1.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn rk4_is_fourth_order() {
        let error = |dt: f64| {
            let mut u = [1.0];
            integrate(&Decay, &mut u, &IntegratorConfig::rk4_fixed(1.0, dt)).unwrap();
            (u[0] - (-1.0f64).exp()).abs()
        };
        let ratio = error(0.1) / error(0.05);
        assert!((ratio - 16.0).abs() < 1.0, "{ratio}");
    }

    #[test]
    fn last_step_is_clipped() {
        let dt = 0.1;
        let mut u = [1.0];
        let mut times = Vec::new();
        let s = integrate_observed(&Decay, &mut u, &IntegratorConfig::rk4_fixed(3.5 * dt, dt), |info, _| {
            times.push(info.t);
            Control::Continue
        })
        .unwrap();
        assert_eq!(s.accepted, 4);
        assert_eq!(*times.last().unwrap(), 3.5 * dt);
        assert_eq!(times.len(), 5);
    }

    #[test]
    fn adaptive_meets_tolerance() {
        for tol in [1e-6, 1e-9] {
            let mut u = [1.0];
            let s = integrate(&Gaussian, &mut u, &IntegratorConfig::adaptive(2.0, tol)).unwrap();
            assert_eq!(s.t, 2.0);
            let err = (u[0] - (-4.0f64).exp()).abs();
            assert!(err < 100.0 * tol, "tol {tol}: {err}");
        }
    }

    #[test]
    fn adaptive_takes_fewer_steps_at_loose_tolerance() {
        let steps = |tol: f64| {
            let mut u = [1.0];
            integrate(&Gaussian, &mut u, &IntegratorConfig::adaptive(2.0, tol)).unwrap().accepted
        };
        assert!(steps(1e-4) < steps(1e-10));
    }

    #[test]
    fn observer_can_stop_early() {
        let mut u = [1.0];
        let cfg = IntegratorConfig::rk4_fixed(1.0, 0.01);
        let s = integrate_observed(&Decay, &mut u, &cfg, |info, _| {
            if info.t >= 0.05 - 1e-12 {
                Control::Stop
            } else {
                Control::Continue
            }
        })
        .unwrap();
        assert!(s.stopped_early);
        assert_eq!(s.accepted, 5);
    }

    #[test]
    fn sampling_cadence() {
        let mut u = [1.0];
        let mut n = 0;
        let cfg = IntegratorConfig::rk4_fixed(1.0, 0.1).with_sample_every(3);
        integrate_observed(&Decay, &mut u, &cfg, |_, _| {
            n += 1;
            Control::Continue
        })
        .unwrap();
        // t = 0, steps 3, 6, 9 and the final step 10
        assert_eq!(n, 5);
    }

    #[test]
    fn rhs_failure_is_reported_with_time() {
        let mut u = [0.25];
        match integrate(&Drain, &mut u, &IntegratorConfig::rk4_fixed(1.0, 0.1)) {
            Err(IntegrationError::Rhs { t, .. }) => assert!(t > 0.2 && t < 0.3 + 1e-12),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut u = [1.0];
        let cfg = IntegratorConfig { t_final: -1.0, ..IntegratorConfig::rk4_fixed(1.0, 0.1) };
        assert!(matches!(integrate(&Decay, &mut u, &cfg), Err(IntegrationError::InvalidConfig(_))));
        let cfg = IntegratorConfig::rk4_cfl(1.0, 0.5);
        assert!(matches!(integrate(&Decay, &mut u, &cfg), Err(IntegrationError::InvalidConfig(_))));
    }

    #[test]
    fn method_names_round_trip() {
        for m in [Method::Rk4Classic, Method::Rk45Embedded] {
            assert_eq!(m.to_string().parse::<Method>().unwrap(), m);
        }
    }
}
