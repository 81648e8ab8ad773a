//! Experiment drivers, one per benchmark.

pub mod euler;
pub mod swe;

use std::str::FromStr;

use quasi1d::physics::Equation;
use quasi1d::sbp::SbpOperator;
use quasi1d::semidisc::Semidiscretization;
use quasi1d::time_integration::{integrate_observed, Control, IntegrationSummary, StepInfo};
use serde::{Deserialize, Serialize};

use crate::{invalid, ExperimentError, TimeStepping};

pub use euler::{
    run_euler_convergence, run_euler_ec, run_euler_nozzle, EulerConvergenceConfig, EulerEcConfig,
    NozzleConfig,
};
pub use swe::{
    run_swe_channel, run_swe_convergence, run_swe_wellbalanced, ChannelConfig, SweConvergenceConfig,
    WellBalancedCase, WellBalancedConfig,
};

/// How a convergence study measures its error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConvergenceKind {
    Manufactured,
    FineGrid,
    FineGridNonuniform,
}

impl std::fmt::Display for ConvergenceKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            ConvergenceKind::Manufactured => "manufactured",
            ConvergenceKind::FineGrid => "fine-grid",
            ConvergenceKind::FineGridNonuniform => "fine-grid-nonuniform",
        })
    }
}

impl FromStr for ConvergenceKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "manufactured" => Ok(Self::Manufactured),
            "fine-grid" => Ok(Self::FineGrid),
            "fine-grid-nonuniform" => Ok(Self::FineGridNonuniform),
            other => Err(format!(
                "unknown convergence kind '{other}' (expected manufactured, fine-grid, fine-grid-nonuniform)"
            )),
        }
    }
}

pub(crate) fn operator(degree: usize) -> Result<SbpOperator, ExperimentError> {
    SbpOperator::new(degree).or_else(|e| invalid(e.to_string()))
}

pub(crate) fn check_elements(elements: usize) -> Result<(), ExperimentError> {
    if elements == 0 {
        return invalid("number of elements must be positive");
    }
    Ok(())
}

pub(crate) fn check_doubling(elements: &[usize]) -> Result<(), ExperimentError> {
    if elements.is_empty() {
        return invalid("at least one resolution is required");
    }
    check_elements(elements[0])?;
    if let Some(w) = elements.windows(2).find(|w| w[1] != 2 * w[0]) {
        return invalid(format!("resolutions must form a doubling chain ({} -> {})", w[0], w[1]));
    }
    Ok(())
}

pub(crate) fn check_time(t_final: f64) -> Result<(), ExperimentError> {
    if !(t_final >= 0.0 && t_final.is_finite()) {
        return invalid(format!("final time must be non-negative, got {t_final}"));
    }
    Ok(())
}

/// Advances `u` to `t_final`; a zero final time leaves `u` untouched.
pub(crate) fn evolve<E, F>(
    semi: &Semidiscretization<E>,
    u: &mut [f64],
    stepping: &TimeStepping,
    t_final: f64,
    sample_every: usize,
    observer: F,
) -> Result<Option<IntegrationSummary>, ExperimentError>
where
    E: Equation,
    F: FnMut(&StepInfo, &[f64]) -> Control,
{
    if t_final == 0.0 {
        return Ok(None);
    }
    let config = stepping.integrator(t_final).with_sample_every(sample_every.max(1));
    Ok(Some(integrate_observed(semi, u, &config, observer)?))
}

/// A solution on one mesh, evaluated anywhere by per-element Lagrange interpolation
/// of the unscaled conservative variables `u / a`.
pub(crate) struct ReferenceSolution<E: Equation> {
    pub semi: Semidiscretization<E>,
    unscaled: Vec<f64>,
}

impl<E: Equation> ReferenceSolution<E> {
    pub fn new(semi: Semidiscretization<E>, u: &[f64]) -> Self {
        let nv = E::NVARS;
        let mut unscaled = u.to_vec();
        for (g, aux) in semi.aux().iter().enumerate() {
            let a = semi.equation().width(aux);
            for v in &mut unscaled[g * nv..(g + 1) * nv] {
                *v /= a;
            }
        }
        Self { semi, unscaled }
    }

    pub fn at(&self, x: f64) -> E::State {
        let mesh = self.semi.mesh();
        let verts = mesh.vertices();
        let k = verts.partition_point(|&v| v <= x).clamp(1, mesh.num_elements()) - 1;
        let (xl, xr) = mesh.element_bounds(k);
        let xi = (2.0 * (x - xl) / (xr - xl) - 1.0).clamp(-1.0, 1.0);
        let np = self.semi.nodes_per_element();
        let nv = E::NVARS;
        let mut out = E::State::default();
        let mut values = vec![0.0; np];
        for (var, o) in out.as_mut().iter_mut().enumerate() {
            for (i, v) in values.iter_mut().enumerate() {
                *v = self.unscaled[(k * np + i) * nv + var];
            }
            *o = self.semi.operator().interpolate(&values, xi);
        }
        out
    }
}
