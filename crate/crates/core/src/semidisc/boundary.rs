//! Boundary conditions, imposed weakly through an exterior state fed to the interface flux.

use std::fmt;
use std::sync::Arc;

use crate::physics::euler::Primitive;
use crate::physics::{Equation, Euler, EulerAux, ShallowWater, SweAux};

/// Maps the interior boundary state, its auxiliary fields and time to an exterior state.
pub type ExteriorFn<E> = Arc<
    dyn Fn(&<E as Equation>::State, &<E as Equation>::Aux, f64) -> <E as Equation>::State
        + Send
        + Sync,
>;

pub enum BoundaryCondition<E: Equation> {
    /// Exterior state taken from the opposite end of the domain.
    Periodic,
    /// Reflective wall: exterior state is the interior state with momentum negated.
    Wall,
    /// Prescribed exterior state as a function of time.
    Dirichlet(Arc<dyn Fn(f64) -> E::State + Send + Sync>),
    /// Exterior state built from the interior state.
    Custom { name: String, exterior: ExteriorFn<E> },
}

impl<E: Equation> Clone for BoundaryCondition<E> {
    fn clone(&self) -> Self {
        match self {
            Self::Periodic => Self::Periodic,
            Self::Wall => Self::Wall,
            Self::Dirichlet(f) => Self::Dirichlet(Arc::clone(f)),
            Self::Custom { name, exterior } => Self::Custom {
                name: name.clone(),
                exterior: Arc::clone(exterior),
            },
        }
    }
}

impl<E: Equation> fmt::Debug for BoundaryCondition<E> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Periodic => f.write_str("Periodic"),
            Self::Wall => f.write_str("Wall"),
            Self::Dirichlet(_) => f.write_str("Dirichlet(..)"),
            Self::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl<E: Equation> BoundaryCondition<E> {
    pub fn custom(
        name: impl Into<String>,
        exterior: impl Fn(&E::State, &E::Aux, f64) -> E::State + Send + Sync + 'static,
    ) -> Self {
        Self::Custom { name: name.into(), exterior: Arc::new(exterior) }
    }

    pub fn dirichlet(state: impl Fn(f64) -> E::State + Send + Sync + 'static) -> Self {
        Self::Dirichlet(Arc::new(state))
    }

    pub fn is_periodic(&self) -> bool {
        matches!(self, Self::Periodic)
    }

    /// Exterior state for a non-periodic condition.
    pub(crate) fn exterior(&self, eq: &E, u: &E::State, aux: &E::Aux, t: f64) -> E::State {
        match self {
            Self::Periodic => unreachable!("periodic exterior comes from the opposite boundary"),
            Self::Wall => eq.mirror_state(u),
            Self::Dirichlet(f) => f(t),
            Self::Custom { exterior, .. } => exterior(u, aux, t),
        }
    }
}

/// Left and right boundary conditions of a 1D domain.
#[derive(Debug, Clone)]
pub struct BoundaryConditions<E: Equation> {
    pub left: BoundaryCondition<E>,
    pub right: BoundaryCondition<E>,
}

impl<E: Equation> BoundaryConditions<E> {
    pub fn new(left: BoundaryCondition<E>, right: BoundaryCondition<E>) -> Self {
        Self { left, right }
    }

    pub fn periodic() -> Self {
        Self::new(BoundaryCondition::Periodic, BoundaryCondition::Periodic)
    }

    pub fn walls() -> Self {
        Self::new(BoundaryCondition::Wall, BoundaryCondition::Wall)
    }

    pub fn is_periodic(&self) -> bool {
        self.left.is_periodic() && self.right.is_periodic()
    }
}

/// Subsonic inflow: density and pressure prescribed, velocity extrapolated.
pub fn euler_subsonic_inflow(eq: Euler, rho: f64, p: f64) -> BoundaryCondition<Euler> {
    BoundaryCondition::custom("euler-subsonic-inflow", move |u: &[f64; 3], aux: &EulerAux, _t| {
        let vel = eq.primitive(u, aux).vel;
        eq.conservative(Primitive { rho, vel, p }, aux)
    })
}

/// Reservoir inflow: stagnation density and pressure prescribed, velocity extrapolated.
/// The static state follows from constant entropy and total enthalpy.
pub fn euler_stagnation_inflow(eq: Euler, rho0: f64, p0: f64) -> BoundaryCondition<Euler> {
    let gm1 = eq.gamma - 1.0;
    let c0_sq = eq.gamma * p0 / rho0;
    BoundaryCondition::custom("euler-stagnation-inflow", move |u: &[f64; 3], aux: &EulerAux, _t| {
        let vel = eq.primitive(u, aux).vel;
        // Clamped so a transient above the limiting speed still gives a valid state.
        let ratio = (1.0 - 0.5 * gm1 * vel * vel / c0_sq).max(1e-8);
        let rho = rho0 * ratio.powf(1.0 / gm1);
        let p = p0 * ratio.powf(eq.gamma / gm1);
        eq.conservative(Primitive { rho, vel, p }, aux)
    })
}

/// Subsonic outflow: pressure prescribed, density and velocity extrapolated.
pub fn euler_subsonic_outflow(eq: Euler, p: f64) -> BoundaryCondition<Euler> {
    BoundaryCondition::custom("euler-subsonic-outflow", move |u: &[f64; 3], aux: &EulerAux, _t| {
        let prim = eq.primitive(u, aux);
        eq.conservative(Primitive { p, ..prim }, aux)
    })
}

/// Inflow with prescribed discharge `ahu`; the height is extrapolated.
pub fn swe_discharge_inflow(discharge: f64) -> BoundaryCondition<ShallowWater> {
    BoundaryCondition::custom("swe-discharge-inflow", move |u: &[f64; 2], _aux: &SweAux, _t| {
        [u[0], discharge]
    })
}

/// Outflow with prescribed height `h`; the velocity is extrapolated.
pub fn swe_height_outflow(h: f64) -> BoundaryCondition<ShallowWater> {
    BoundaryCondition::custom("swe-height-outflow", move |u: &[f64; 2], aux: &SweAux, _t| {
        let vel = u[1] / u[0];
        let ah = aux.a * h;
        [ah, ah * vel]
    })
}
