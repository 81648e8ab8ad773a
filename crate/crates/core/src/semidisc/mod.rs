//! Flux-differencing DGSEM semidiscretization on a 1D mesh.
//!
//! On element `k` with diagonal mass `M_k = (h_k/2) M` the nodal states obey
//!
//! ```text
//! M_k du/dt + ((Q - Qᵀ) ∘ F) 1 + B f* = s,   F_ij = f_EC(u_i, u_j)
//! ```
//!
//! where `f*` is the interface flux computed from each element's own side.
//! The global state is a flat vector, element-major, node-major, variable-minor.

pub mod boundary;
mod diagnostics;
pub mod mesh;

use std::sync::Arc;

use thiserror::Error;

use crate::physics::{Equation, InterfaceFlux, PhysicsError};
use crate::sbp::{SbpError, SbpOperator};

pub use boundary::{BoundaryCondition, BoundaryConditions};
pub use diagnostics::{EntropyRate, MomentumBalance};
pub use mesh::Mesh1D;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SemidiscError {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error(transparent)]
    Sbp(#[from] SbpError),
    #[error("interface flux {flux} is not supported for {equation}")]
    UnsupportedFlux { flux: InterfaceFlux, equation: &'static str },
    #[error("periodic boundaries must be set on both ends")]
    InconsistentPeriodicity,
    #[error("state vector has length {got}, expected {expected}")]
    StateLength { expected: usize, got: usize },
    #[error("invalid auxiliary field at element {element}, node {node} (x = {x}): {source}")]
    InvalidAux { element: usize, node: usize, x: f64, source: PhysicsError },
    #[error("inadmissible state at element {element}, node {node} (x = {x}): {source}")]
    Inadmissible { element: usize, node: usize, x: f64, source: PhysicsError },
    #[error("interface flux failed at x = {x}: {source}")]
    Interface { x: f64, source: PhysicsError },
}

/// Where auxiliary fields and projected data are sampled at element endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum AuxSampling {
    /// One ulp inside the element, so a jump at a vertex stays a jump between elements.
    #[default]
    OneSided,
    /// At the node itself; both elements sharing a vertex see the same value.
    Nodal,
}

/// Nodal source term `s(x, t, aux)` in scaled conservative variables.
pub type SourceFn<E> =
    Arc<dyn Fn(f64, f64, &<E as Equation>::Aux) -> <E as Equation>::State + Send + Sync>;

pub struct Semidiscretization<E: Equation> {
    equation: E,
    op: SbpOperator,
    mesh: Mesh1D,
    flux: InterfaceFlux,
    boundaries: BoundaryConditions<E>,
    x: Vec<f64>,
    x_sample: Vec<f64>,
    aux: Vec<E::Aux>,
    /// `(Q - Qᵀ)`, row-major.
    skew: Vec<f64>,
    /// `1 / (M_k)_ii` per global node.
    inv_mass: Vec<f64>,
    source: Option<SourceFn<E>>,
}

impl<E: Equation + Clone> Clone for Semidiscretization<E> {
    fn clone(&self) -> Self {
        Self {
            equation: self.equation.clone(),
            op: self.op.clone(),
            mesh: self.mesh.clone(),
            flux: self.flux,
            boundaries: self.boundaries.clone(),
            x: self.x.clone(),
            x_sample: self.x_sample.clone(),
            aux: self.aux.clone(),
            skew: self.skew.clone(),
            inv_mass: self.inv_mass.clone(),
            source: self.source.clone(),
        }
    }
}

impl<E: Equation> Semidiscretization<E> {
    /// Builds the semidiscretization, sampling auxiliary fields with `aux_fn(x)`.
    ///
    /// Endpoint nodes are sampled as one-sided limits from inside their element,
    /// so fields that jump at a vertex are represented discontinuously.
    pub fn new(
        equation: E,
        op: SbpOperator,
        mesh: Mesh1D,
        aux_fn: impl Fn(f64) -> E::Aux,
        flux: InterfaceFlux,
        boundaries: BoundaryConditions<E>,
    ) -> Result<Self, SemidiscError> {
        Self::with_sampling(equation, op, mesh, aux_fn, flux, boundaries, AuxSampling::OneSided)
    }

    pub fn with_sampling(
        equation: E,
        op: SbpOperator,
        mesh: Mesh1D,
        aux_fn: impl Fn(f64) -> E::Aux,
        flux: InterfaceFlux,
        boundaries: BoundaryConditions<E>,
        sampling: AuxSampling,
    ) -> Result<Self, SemidiscError> {
        if !equation.supports(flux) {
            return Err(SemidiscError::UnsupportedFlux { flux, equation: E::NAME });
        }
        if boundaries.left.is_periodic() != boundaries.right.is_periodic() {
            return Err(SemidiscError::InconsistentPeriodicity);
        }
        let np = op.num_nodes();
        let x = mesh.node_coordinates(&op);
        let x_sample = match sampling {
            AuxSampling::OneSided => mesh.sampling_coordinates(&op),
            AuxSampling::Nodal => x.clone(),
        };
        let aux: Vec<E::Aux> = x_sample.iter().map(|&xs| aux_fn(xs)).collect();
        for (g, a) in aux.iter().enumerate() {
            let w = equation.width(a);
            if !(w > 0.0 && w.is_finite()) {
                return Err(SemidiscError::InvalidAux {
                    element: g / np,
                    node: g % np,
                    x: x[g],
                    source: PhysicsError::NonPositiveWidth { a: w },
                });
            }
        }
        let mut skew = vec![0.0; np * np];
        for i in 0..np {
            for j in 0..np {
                skew[i * np + j] = op.q(i, j) - op.q(j, i);
            }
        }
        let mut inv_mass = Vec::with_capacity(x.len());
        for k in 0..mesh.num_elements() {
            let jac = 0.5 * mesh.element_size(k);
            inv_mass.extend(op.mass().iter().map(|&w| 1.0 / (jac * w)));
        }
        Ok(Self {
            equation,
            op,
            mesh,
            flux,
            boundaries,
            x,
            x_sample,
            aux,
            skew,
            inv_mass,
            source: None,
        })
    }

    pub fn with_source(
        mut self,
        source: impl Fn(f64, f64, &E::Aux) -> E::State + Send + Sync + 'static,
    ) -> Self {
        self.source = Some(Arc::new(source));
        self
    }

    pub fn equation(&self) -> &E {
        &self.equation
    }

    pub fn operator(&self) -> &SbpOperator {
        &self.op
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn interface_flux_kind(&self) -> InterfaceFlux {
        self.flux
    }

    pub fn boundaries(&self) -> &BoundaryConditions<E> {
        &self.boundaries
    }

    pub fn has_source(&self) -> bool {
        self.source.is_some()
    }

    pub fn num_nodes(&self) -> usize {
        self.x.len()
    }

    pub fn nodes_per_element(&self) -> usize {
        self.op.num_nodes()
    }

    /// Length of the flat state vector.
    pub fn state_len(&self) -> usize {
        self.x.len() * E::NVARS
    }

    /// Node coordinates, element-major.
    pub fn coordinates(&self) -> &[f64] {
        &self.x
    }

    /// Coordinates at which fields are sampled (endpoints nudged one ulp inward).
    pub fn sampling_coordinates(&self) -> &[f64] {
        &self.x_sample
    }

    pub fn aux(&self) -> &[E::Aux] {
        &self.aux
    }

    /// Quadrature weight `(M_k)_ii` of a global node.
    pub fn node_weight(&self, node: usize) -> f64 {
        1.0 / self.inv_mass[node]
    }

    /// Interpolates `f(x, aux)` at the nodes into a flat state vector.
    pub fn project(&self, mut f: impl FnMut(f64, &E::Aux) -> E::State) -> Vec<f64> {
        let mut u = Vec::with_capacity(self.state_len());
        for (xs, aux) in self.x_sample.iter().zip(&self.aux) {
            u.extend_from_slice(f(*xs, aux).as_ref());
        }
        u
    }

    pub fn state_at(&self, u: &[f64], node: usize) -> E::State {
        let mut s = E::State::default();
        s.as_mut()
            .copy_from_slice(&u[node * E::NVARS..(node + 1) * E::NVARS]);
        s
    }

    pub fn states(&self, u: &[f64]) -> Result<Vec<E::State>, SemidiscError> {
        self.check_len(u)?;
        Ok((0..self.num_nodes()).map(|g| self.state_at(u, g)).collect())
    }

    fn check_len(&self, u: &[f64]) -> Result<(), SemidiscError> {
        if u.len() != self.state_len() {
            return Err(SemidiscError::StateLength { expected: self.state_len(), got: u.len() });
        }
        Ok(())
    }

    /// Checks every node for admissibility, reporting the first offending location.
    pub fn check_admissible(&self, states: &[E::State]) -> Result<(), SemidiscError> {
        let np = self.nodes_per_element();
        for (g, (s, aux)) in states.iter().zip(&self.aux).enumerate() {
            self.equation
                .check_admissible(s, aux)
                .map_err(|source| SemidiscError::Inadmissible {
                    element: g / np,
                    node: g % np,
                    x: self.x[g],
                    source,
                })?;
        }
        Ok(())
    }

    /// Interface fluxes `(f*_left, f*_right)` of every element, each seen from that element.
    pub(crate) fn face_fluxes(
        &self,
        states: &[E::State],
        t: f64,
    ) -> Result<Vec<[E::State; 2]>, SemidiscError> {
        let np = self.nodes_per_element();
        let ne = self.mesh.num_elements();
        let last = ne * np - 1;
        let eq = &self.equation;
        let flux = |g: usize, u_ext: &E::State, aux_ext: &E::Aux, normal: f64| {
            eq.interface_flux(self.flux, &states[g], &self.aux[g], u_ext, aux_ext, normal)
                .map_err(|source| SemidiscError::Interface { x: self.x[g], source })
        };

        let (ext_left, aux_left) = if self.boundaries.left.is_periodic() {
            (states[last], self.aux[last])
        } else {
            let ext = self.boundaries.left.exterior(eq, &states[0], &self.aux[0], t);
            (ext, self.aux[0])
        };
        let (ext_right, aux_right) = if self.boundaries.right.is_periodic() {
            (states[0], self.aux[0])
        } else {
            let ext = self.boundaries.right.exterior(eq, &states[last], &self.aux[last], t);
            (ext, self.aux[last])
        };

        let mut faces = vec![[E::State::default(); 2]; ne];
        faces[0][0] = flux(0, &ext_left, &aux_left, -1.0)?;
        faces[ne - 1][1] = flux(last, &ext_right, &aux_right, 1.0)?;
        for k in 1..ne {
            let gl = k * np - 1;
            let gr = k * np;
            faces[k - 1][1] = flux(gl, &states[gr], &self.aux[gr], 1.0)?;
            faces[k][0] = flux(gr, &states[gl], &self.aux[gl], -1.0)?;
        }
        Ok(faces)
    }

    /// Evaluates `du/dt` at time `t`.
    pub fn rhs(&self, t: f64, u: &[f64], du: &mut [f64]) -> Result<(), SemidiscError> {
        self.check_len(u)?;
        if du.len() != u.len() {
            return Err(SemidiscError::StateLength { expected: u.len(), got: du.len() });
        }
        let states = self.states(u)?;
        self.check_admissible(&states)?;
        let faces = self.face_fluxes(&states, t)?;

        let nv = E::NVARS;
        let np = self.nodes_per_element();
        let eq = &self.equation;
        for (k, face) in faces.iter().enumerate() {
            let base = k * np;
            for i in 0..np {
                let g = base + i;
                let mut acc = E::State::default();
                for j in 0..np {
                    let s = self.skew[i * np + j];
                    if s == 0.0 {
                        continue;
                    }
                    let f = eq.ec_flux(&states[g], &self.aux[g], &states[base + j], &self.aux[base + j]);
                    for (a, fv) in acc.as_mut().iter_mut().zip(f.as_ref()) {
                        *a += s * fv;
                    }
                }
                if i == 0 {
                    for (a, fv) in acc.as_mut().iter_mut().zip(face[0].as_ref()) {
                        *a -= fv;
                    }
                }
                if i == np - 1 {
                    for (a, fv) in acc.as_mut().iter_mut().zip(face[1].as_ref()) {
                        *a += fv;
                    }
                }
                let out = &mut du[g * nv..(g + 1) * nv];
                let im = self.inv_mass[g];
                for (o, a) in out.iter_mut().zip(acc.as_ref()) {
                    *o = -im * a;
                }
                if let Some(src) = &self.source {
                    let s = src(self.x_sample[g], t, &self.aux[g]);
                    for (o, sv) in out.iter_mut().zip(s.as_ref()) {
                        *o += sv;
                    }
                }
            }
        }
        Ok(())
    }

    /// Allocating variant of [`Semidiscretization::rhs`].
    pub fn rhs_vec(&self, t: f64, u: &[f64]) -> Result<Vec<f64>, SemidiscError> {
        let mut du = vec![0.0; u.len()];
        self.rhs(t, u, &mut du)?;
        Ok(du)
    }
}
