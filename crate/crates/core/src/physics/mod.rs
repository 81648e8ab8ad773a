//! State representations, entropy machinery and two-point fluxes for the
//! quasi-1D shallow water and compressible Euler systems.
//!
//! States are stored in width-scaled conservative variables, `(ah, ahu)` and
//! `(aρ, aρu, aE)`. The entropy conservative fluxes are not symmetric in their
//! arguments; they satisfy
//!
//! ```text
//! v_L · f(u_L, u_R) - v_R · f(u_R, u_L) = ψ(u_L) - ψ(u_R)
//! ```
//!
//! so argument order matters everywhere a flux is evaluated.

pub mod euler;
pub mod means;
pub mod swe;

use std::fmt::Debug;
use std::str::FromStr;

use thiserror::Error;

pub use euler::{Euler, EulerAux};
pub use means::{logmean, prodmean};
pub use swe::{ShallowWater, SweAux, WellBalancedMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysicsError {
    #[error("non-positive water height h = {h:e}")]
    NonPositiveHeight { h: f64 },
    #[error("non-positive density rho = {rho:e}")]
    NonPositiveDensity { rho: f64 },
    #[error("non-positive pressure p = {p:e}")]
    NonPositivePressure { p: f64 },
    #[error("non-positive width a = {a:e}")]
    NonPositiveWidth { a: f64 },
    #[error("non-finite state component")]
    NonFinite,
    #[error("logarithmic mean needs positive arguments, got ({x:e}, {y:e})")]
    NonPositiveMeanArgument { x: f64, y: f64 },
    #[error("interface flux {0} is not available for this equation")]
    UnsupportedFlux(InterfaceFlux),
    #[error("singular well-balanced dissipation matrix (average height {h:e})")]
    SingularDissipation { h: f64 },
}

/// Entropy, entropy flux, entropy potential and entropy variables at one state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyPair<S> {
    pub entropy: f64,
    pub entropy_flux: f64,
    pub potential: f64,
    pub variables: S,
}

/// Interface numerical flux family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum InterfaceFlux {
    /// The entropy conservative two-point flux itself.
    EntropyConservative,
    /// Entropy conservative flux plus a local Lax-Friedrichs penalty on the conservative jump.
    #[default]
    LaxFriedrichs,
    /// Entropy conservative flux plus a penalty on the entropy-variable jump
    /// (well-balanced for discontinuous bathymetry; shallow water only).
    WellBalanced,
}

impl std::fmt::Display for InterfaceFlux {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            InterfaceFlux::EntropyConservative => "ec",
            InterfaceFlux::LaxFriedrichs => "es-lxf",
            InterfaceFlux::WellBalanced => "es-wb",
        })
    }
}

impl FromStr for InterfaceFlux {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ec" => Ok(Self::EntropyConservative),
            "es-lxf" | "lxf" => Ok(Self::LaxFriedrichs),
            "es-wb" | "wb" => Ok(Self::WellBalanced),
            other => Err(format!("unknown interface flux '{other}' (expected ec, es-lxf, es-wb)")),
        }
    }
}

/// A quasi-1D system in width-scaled conservative variables.
///
/// `State` is the per-node conservative vector; `Aux` holds the spatially
/// varying, time independent fields (width, bathymetry) at that node.
pub trait Equation: Send + Sync {
    type State: Copy + Default + Debug + PartialEq + Send + Sync + AsRef<[f64]> + AsMut<[f64]>;
    type Aux: Copy + Debug + PartialEq + Send + Sync;

    const NVARS: usize;
    /// Index of the momentum component.
    const MOMENTUM: usize = 1;
    const NAME: &'static str;

    fn variable_names(&self) -> &'static [&'static str];

    /// Channel width `a` carried by an auxiliary record.
    fn width(&self, aux: &Self::Aux) -> f64;

    fn check_admissible(&self, u: &Self::State, aux: &Self::Aux) -> Result<(), PhysicsError>;

    fn entropy_pair(
        &self,
        u: &Self::State,
        aux: &Self::Aux,
    ) -> Result<EntropyPair<Self::State>, PhysicsError>;

    /// Entropy variables; assumes an admissible state.
    fn entropy_variables(&self, u: &Self::State, aux: &Self::Aux) -> Self::State;

    fn entropy(&self, u: &Self::State, aux: &Self::Aux) -> f64;

    fn potential(&self, u: &Self::State, aux: &Self::Aux) -> f64;

    /// Entropy conservative two-point flux, `left` state first.
    fn ec_flux(
        &self,
        u_left: &Self::State,
        aux_left: &Self::Aux,
        u_right: &Self::State,
        aux_right: &Self::Aux,
    ) -> Self::State;

    /// The non-symmetric part of [`Equation::ec_flux`].
    fn nonsym_flux(
        &self,
        u_left: &Self::State,
        aux_left: &Self::Aux,
        u_right: &Self::State,
        aux_right: &Self::Aux,
    ) -> Self::State;

    /// Split of the non-conservative product into `coefficient_i * Σ_j Q_ij potential_j`,
    /// equal to the row sums of `2 Q ∘ F_nonsym`.
    fn nonconservative_split(&self, u: &Self::State, aux: &Self::Aux) -> (f64, f64);

    /// `|u| + c` at one state.
    fn wavespeed(&self, u: &Self::State, aux: &Self::Aux) -> f64;

    fn max_wavespeed(
        &self,
        u_left: &Self::State,
        aux_left: &Self::Aux,
        u_right: &Self::State,
        aux_right: &Self::Aux,
    ) -> f64 {
        self.wavespeed(u_left, aux_left)
            .max(self.wavespeed(u_right, aux_right))
    }

    /// Reflective wall exterior state: momentum negated.
    fn mirror_state(&self, u: &Self::State) -> Self::State {
        let mut m = *u;
        m.as_mut()[Self::MOMENTUM] = -m.as_ref()[Self::MOMENTUM];
        m
    }

    fn supports(&self, kind: InterfaceFlux) -> bool {
        !matches!(kind, InterfaceFlux::WellBalanced)
    }

    /// Interface flux `f*(u, u⁺)` seen from the element owning `u`, with outward normal `normal`.
    fn interface_flux(
        &self,
        kind: InterfaceFlux,
        u: &Self::State,
        aux: &Self::Aux,
        u_ext: &Self::State,
        aux_ext: &Self::Aux,
        normal: f64,
    ) -> Result<Self::State, PhysicsError> {
        match kind {
            InterfaceFlux::EntropyConservative => Ok(self.ec_flux(u, aux, u_ext, aux_ext)),
            InterfaceFlux::LaxFriedrichs => {
                let lambda = self.max_wavespeed(u, aux, u_ext, aux_ext);
                Ok(interface_flux_es_lxf(self, u, aux, u_ext, aux_ext, normal, lambda))
            }
            InterfaceFlux::WellBalanced => Err(PhysicsError::UnsupportedFlux(kind)),
        }
    }
}

/// `f_EC(u, u⁺) - (λ/2) (u⁺ - u) n`.
pub fn interface_flux_es_lxf<E: Equation + ?Sized>(
    eq: &E,
    u: &E::State,
    aux: &E::Aux,
    u_ext: &E::State,
    aux_ext: &E::Aux,
    normal: f64,
    lambda: f64,
) -> E::State {
    let mut f = eq.ec_flux(u, aux, u_ext, aux_ext);
    let scale = 0.5 * lambda * normal;
    for ((fv, &ui), &ue) in f.as_mut().iter_mut().zip(u.as_ref()).zip(u_ext.as_ref()) {
        *fv -= scale * (ue - ui);
    }
    f
}

/// `v_L · f(L, R) - v_R · f(R, L) - (ψ_L - ψ_R)` for a two-point flux.
///
/// Zero for an entropy conservative flux, non-negative for an entropy stable one.
pub fn tadmor_residual<E, F>(
    eq: &E,
    u_left: &E::State,
    aux_left: &E::Aux,
    u_right: &E::State,
    aux_right: &E::Aux,
    flux: F,
) -> f64
where
    E: Equation + ?Sized,
    F: Fn(&E::State, &E::Aux, &E::State, &E::Aux) -> E::State,
{
    let v_l = eq.entropy_variables(u_left, aux_left);
    let v_r = eq.entropy_variables(u_right, aux_right);
    let f_lr = flux(u_left, aux_left, u_right, aux_right);
    let f_rl = flux(u_right, aux_right, u_left, aux_left);
    dot(v_l.as_ref(), f_lr.as_ref()) - dot(v_r.as_ref(), f_rl.as_ref())
        - (eq.potential(u_left, aux_left) - eq.potential(u_right, aux_right))
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_kind_round_trips_through_str() {
        for kind in [
            InterfaceFlux::EntropyConservative,
            InterfaceFlux::LaxFriedrichs,
            InterfaceFlux::WellBalanced,
        ] {
            assert_eq!(kind.to_string().parse::<InterfaceFlux>().unwrap(), kind);
        }
        assert!("upwind".parse::<InterfaceFlux>().is_err());
    }

    #[test]
    fn mirror_is_an_involution() {
        let swe = ShallowWater::default();
        let u = [3.0, 5.0];
        assert_eq!(swe.mirror_state(&u), [3.0, -5.0]);
        assert_eq!(swe.mirror_state(&swe.mirror_state(&u)), u);

        let euler = Euler::default();
        let w = [1.0, 2.0, 3.0];
        assert_eq!(euler.mirror_state(&w), [1.0, -2.0, 3.0]);
        assert_eq!(euler.mirror_state(&euler.mirror_state(&w)), w);
    }
}
