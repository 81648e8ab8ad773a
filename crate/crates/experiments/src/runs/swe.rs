use std::str::FromStr;
use std::time::Instant;

use quasi1d::physics::swe::DEFAULT_GRAVITY;
use quasi1d::physics::{InterfaceFlux, ShallowWater, SweAux};
use quasi1d::semidisc::boundary::{swe_discharge_inflow, swe_height_outflow};
use quasi1d::semidisc::{BoundaryConditions, Mesh1D, Semidiscretization};
use quasi1d::time_integration::Control;
use serde::{Deserialize, Serialize};

use super::{check_doubling, check_elements, check_time, evolve, operator, ConvergenceKind, ReferenceSolution};
use crate::cases::swe as cases;
use crate::manufactured::SweManufactured;
use crate::report::{ConvergenceTable, DataSet, ExperimentReport};
use crate::{invalid, ExperimentError, TimeStepping};

#[derive(Debug, Clone, PartialEq)]
pub struct SweConvergenceConfig {
    pub kind: ConvergenceKind,
    pub degrees: Vec<usize>,
    pub elements: Vec<usize>,
    pub flux: InterfaceFlux,
    pub t_final: f64,
    pub stepping: TimeStepping,
    pub g: f64,
    /// Periodic domain; both cases are 1-periodic in `x`.
    pub domain: (f64, f64),
    pub reference_degree: usize,
    pub reference_elements: usize,
}

impl SweConvergenceConfig {
    pub fn new(kind: ConvergenceKind) -> Self {
        let elements = match kind {
            ConvergenceKind::Manufactured => vec![16, 32, 64, 128, 256],
            _ => vec![2, 4, 8, 16, 32],
        };
        Self {
            kind,
            degrees: vec![1, 2, 3],
            elements,
            flux: InterfaceFlux::LaxFriedrichs,
            t_final: 0.1,
            stepping: TimeStepping::rk4(0.25),
            g: DEFAULT_GRAVITY,
            domain: (-1.0, 1.0),
            reference_degree: 3,
            reference_elements: 8000,
        }
    }
}

fn periodic_semi(
    eq: ShallowWater,
    domain: (f64, f64),
    degree: usize,
    elements: usize,
    flux: InterfaceFlux,
    aux: impl Fn(f64) -> SweAux,
) -> Result<Semidiscretization<ShallowWater>, ExperimentError> {
    check_elements(elements)?;
    Ok(Semidiscretization::new(
        eq,
        operator(degree)?,
        Mesh1D::uniform(domain.0, domain.1, elements)?,
        aux,
        flux,
        BoundaryConditions::periodic(),
    )?)
}

pub fn run_swe_convergence(cfg: &SweConvergenceConfig) -> Result<ExperimentReport, ExperimentError> {
    let start = Instant::now();
    check_doubling(&cfg.elements)?;
    check_time(cfg.t_final)?;
    cfg.stepping.validate()?;
    if cfg.degrees.is_empty() {
        return invalid("at least one degree is required");
    }
    if !(cfg.domain.0 < cfg.domain.1) {
        return invalid(format!("invalid domain [{}, {}]", cfg.domain.0, cfg.domain.1));
    }
    let eq = ShallowWater::new(cfg.g);
    let mut report = ExperimentReport::new("swe-convergence")
        .with_config("kind", cfg.kind)
        .with_config("degrees", join(&cfg.degrees))
        .with_config("elements", join(&cfg.elements))
        .with_config("flux", cfg.flux)
        .with_config("t_final", cfg.t_final)
        .with_config("time_stepping", cfg.stepping.describe())
        .with_config("g", cfg.g)
        .with_config("domain", format!("[{}, {}]", cfg.domain.0, cfg.domain.1))
        .with_config("boundary", "periodic");

    let reference = match cfg.kind {
        ConvergenceKind::Manufactured => None,
        ConvergenceKind::FineGrid => {
            report.set_config("reference_degree", cfg.reference_degree);
            report.set_config("reference_elements", cfg.reference_elements);
            let semi = periodic_semi(eq, cfg.domain, cfg.reference_degree, cfg.reference_elements, cfg.flux, cases::fine_grid_aux)?;
            let mut u = semi.project(cases::fine_grid_initial);
            evolve(&semi, &mut u, &cfg.stepping, cfg.t_final, usize::MAX, |_, _| Control::Continue)?;
            Some(ReferenceSolution::new(semi, &u))
        }
        ConvergenceKind::FineGridNonuniform => {
            return invalid("the shallow water study supports manufactured and fine-grid only")
        }
    };

    let mms = SweManufactured::new(cfg.g);
    for &degree in &cfg.degrees {
        let mut errors = Vec::new();
        for &elements in &cfg.elements {
            let error = match &reference {
                None => {
                    let semi = periodic_semi(eq, cfg.domain, degree, elements, cfg.flux, SweManufactured::aux)?
                        .with_source(move |x, t, _| mms.source(x, t));
                    let mut u = semi.project(|x, aux| SweManufactured::exact_scaled(x, 0.0, aux));
                    evolve(&semi, &mut u, &cfg.stepping, cfg.t_final, usize::MAX, |_, _| Control::Continue)?;
                    semi.l2_error(&u, |x| SweManufactured::exact(x, cfg.t_final))?
                }
                Some(r) => {
                    let semi = periodic_semi(eq, cfg.domain, degree, elements, cfg.flux, cases::fine_grid_aux)?;
                    let mut u = semi.project(cases::fine_grid_initial);
                    evolve(&semi, &mut u, &cfg.stepping, cfg.t_final, usize::MAX, |_, _| Control::Continue)?;
                    semi.l2_error(&u, |x| r.at(x))?
                }
            };
            errors.push((elements, error));
        }
        let table = ConvergenceTable::from_errors(degree, &errors);
        if let Some(rate) = table.finest_rate() {
            report.set_metric(&format!("finest_rate_N{degree}"), rate);
        }
        report.tables.push(table);
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WellBalancedCase {
    Continuous,
    Discontinuous,
}

impl std::fmt::Display for WellBalancedCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WellBalancedCase::Continuous => "continuous",
            WellBalancedCase::Discontinuous => "discontinuous",
        })
    }
}

impl FromStr for WellBalancedCase {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "continuous" => Ok(Self::Continuous),
            "discontinuous" => Ok(Self::Discontinuous),
            other => Err(format!("unknown case '{other}' (expected continuous, discontinuous)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WellBalancedConfig {
    pub case: WellBalancedCase,
    pub degree: usize,
    pub elements: usize,
    pub flux: InterfaceFlux,
    pub t_final: f64,
    pub stepping: TimeStepping,
    pub g: f64,
}

impl WellBalancedConfig {
    pub fn new(case: WellBalancedCase) -> Self {
        Self {
            case,
            degree: 3,
            elements: 200,
            flux: InterfaceFlux::WellBalanced,
            t_final: 1.0,
            stepping: TimeStepping::rk4(0.5),
            g: DEFAULT_GRAVITY,
        }
    }
}

pub fn run_swe_wellbalanced(cfg: &WellBalancedConfig) -> Result<ExperimentReport, ExperimentError> {
    let start = Instant::now();
    check_time(cfg.t_final)?;
    cfg.stepping.validate()?;
    let aux = match cfg.case {
        WellBalancedCase::Continuous => cases::well_balanced_continuous,
        WellBalancedCase::Discontinuous => cases::well_balanced_discontinuous,
    };
    let semi = periodic_semi(ShallowWater::new(cfg.g), (0.0, 1.0), cfg.degree, cfg.elements, cfg.flux, aux)?;
    let mut u = semi.project(|_, aux| cases::lake_at_rest(1.0, aux));
    evolve(&semi, &mut u, &cfg.stepping, cfg.t_final, usize::MAX, |_, _| Control::Continue)?;

    let mut profile = DataSet::new("profile", &["x", "level", "discharge"]);
    let (mut l1, mut l2, mut linf) = (0.0, 0.0, 0.0_f64);
    for (g, aux) in semi.aux().iter().enumerate() {
        let level = u[2 * g] / aux.a + aux.b;
        let q = u[2 * g + 1];
        let w = semi.node_weight(g);
        let (e0, e1) = ((level - 1.0).abs(), q.abs());
        l1 += w * (e0 + e1);
        l2 += w * (e0 * e0 + e1 * e1);
        linf = linf.max(e0).max(e1);
        profile.push(vec![semi.coordinates()[g], level, q]);
    }

    let mut report = ExperimentReport::new(format!("swe-wellbalanced-{}", cfg.case))
        .with_config("case", cfg.case)
        .with_config("degree", cfg.degree)
        .with_config("elements", cfg.elements)
        .with_config("flux", cfg.flux)
        .with_config("t_final", cfg.t_final)
        .with_config("time_stepping", cfg.stepping.describe())
        .with_config("g", cfg.g)
        .with_config("boundary", "periodic");
    report.set_metric("l1_error", l1);
    report.set_metric("l2_error", l2.sqrt());
    report.set_metric("linf_error", linf);
    report.datasets.push(profile);
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelConfig {
    pub degree: usize,
    pub elements: usize,
    pub flux: InterfaceFlux,
    pub t_final: f64,
    pub stepping: TimeStepping,
    pub g: f64,
    /// Steady state once the weighted L2 norm of the right-hand side drops below this.
    pub steady_tol: f64,
    /// Right end of the cosine contraction.
    pub contraction_end: f64,
    /// Replace the contraction by the constant width 5.
    pub uniform_width: bool,
    /// Steady-state check every this many steps.
    pub check_every: usize,
    /// Half-width of the window around the shock left out of the discharge check.
    pub shock_exclusion: f64,
}

impl Default for ChannelConfig {
    fn default() -> Self {
        Self {
            degree: 2,
            elements: 400,
            flux: InterfaceFlux::LaxFriedrichs,
            t_final: 3000.0,
            stepping: TimeStepping::rk4(0.5),
            g: DEFAULT_GRAVITY,
            steady_tol: 1e-8,
            contraction_end: 400.0,
            uniform_width: false,
            check_every: 20,
            shock_exclusion: 50.0,
        }
    }
}

pub fn run_swe_channel(cfg: &ChannelConfig) -> Result<ExperimentReport, ExperimentError> {
    let start = Instant::now();
    check_elements(cfg.elements)?;
    check_time(cfg.t_final)?;
    cfg.stepping.validate()?;
    let end = cfg.contraction_end;
    let uniform = cfg.uniform_width;
    let width = move |x: f64| if uniform { 5.0 } else { cases::channel_width(x, end) };
    let semi = Semidiscretization::new(
        ShallowWater::new(cfg.g),
        operator(cfg.degree)?,
        Mesh1D::uniform(0.0, 500.0, cfg.elements)?,
        |x| SweAux::new(width(x), 0.0),
        cfg.flux,
        BoundaryConditions::new(
            swe_discharge_inflow(cases::CHANNEL_DISCHARGE),
            swe_height_outflow(cases::CHANNEL_OUTFLOW_HEIGHT),
        ),
    )?;
    let mut u = semi.project(|_, aux| [aux.a * cases::CHANNEL_INITIAL_HEIGHT, cases::CHANNEL_DISCHARGE]);

    let mut steady_at = None;
    let mut last_norm = f64::INFINITY;
    let mut history = DataSet::new("residual", &["t", "rhs_norm"]);
    let mut failure = None;
    let summary = evolve(&semi, &mut u, &cfg.stepping, cfg.t_final, cfg.check_every, |info, state| {
        match semi.rhs_vec(info.t, state).and_then(|du| semi.weighted_norm(&du)) {
            Ok(norm) => {
                last_norm = norm;
                history.push(vec![info.t, norm]);
                if norm < cfg.steady_tol {
                    steady_at = Some(info.t);
                    return Control::Stop;
                }
                Control::Continue
            }
            Err(e) => {
                failure = Some(e);
                Control::Stop
            }
        }
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }

    let eq = semi.equation();
    let x = semi.coordinates();
    let mut profile = DataSet::new("profile", &["x", "h", "froude", "discharge", "width"]);
    let mut froude = Vec::with_capacity(x.len());
    for (g, aux) in semi.aux().iter().enumerate() {
        let h = u[2 * g] / aux.a;
        let vel = u[2 * g + 1] / u[2 * g];
        let fr = vel.abs() / (eq.g * h).sqrt();
        froude.push(fr);
        profile.push(vec![x[g], h, fr, u[2 * g + 1], aux.a]);
    }

    let mut report = ExperimentReport::new("swe-channel")
        .with_config("degree", cfg.degree)
        .with_config("elements", cfg.elements)
        .with_config("flux", cfg.flux)
        .with_config("t_final", cfg.t_final)
        .with_config("time_stepping", cfg.stepping.describe())
        .with_config("g", cfg.g)
        .with_config("steady_tol", cfg.steady_tol)
        .with_config("contraction_end", cfg.contraction_end)
        .with_config("uniform_width", cfg.uniform_width)
        .with_config("shock_exclusion", cfg.shock_exclusion)
        .with_config("boundary", "ahu = 20 inflow, h = 1.85 outflow");
    report.set_metric("steady", if steady_at.is_some() { 1.0 } else { 0.0 });
    report.set_metric("final_time", steady_at.or(summary.map(|s| s.t)).unwrap_or(0.0));
    report.set_metric("rhs_norm", last_norm.min(f64::MAX));
    report.set_metric("froude_max", froude.iter().cloned().fold(0.0, f64::max));

    // the sonic point is the first upward crossing of Fr = 1; the shock is the
    // largest downward jump of the Froude number after it
    if let Some(sonic) = (1..froude.len()).find(|&i| froude[i - 1] < 1.0 && froude[i] >= 1.0) {
        report.set_metric("sonic_point", x[sonic]);
        let shock = (sonic + 1..froude.len())
            .filter(|&i| froude[i - 1] > 1.0 && froude[i] <= 1.0)
            .max_by(|&i, &j| (froude[i - 1] - froude[i]).total_cmp(&(froude[j - 1] - froude[j])));
        if let Some(s) = shock {
            report.set_metric("shock_position", x[s]);
            let xs = x[s];
            let away: Vec<f64> = (0..froude.len())
                .filter(|&g| (x[g] - xs).abs() > cfg.shock_exclusion)
                .map(|g| u[2 * g + 1])
                .collect();
            report.set_metric("discharge_variation", relative_spread(&away));
        }
    } else {
        report.set_metric("discharge_variation", relative_spread(&(0..froude.len()).map(|g| u[2 * g + 1]).collect::<Vec<_>>()));
    }
    report.datasets.push(profile);
    report.datasets.push(history);
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    (max - min) / mean.abs()
}

pub(crate) fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
