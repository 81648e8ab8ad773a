//! Quasi-1D shallow water equations in a channel of width `a(x)` over bathymetry `b(x)`.
//!
//! Conservative variables are `(ah, ahu)`.

use super::means::avg;
use super::{dot, EntropyPair, Equation, InterfaceFlux, PhysicsError};

pub const DEFAULT_GRAVITY: f64 = 9.81;

/// Width and bathymetry at a node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweAux {
    pub a: f64,
    pub b: f64,
}

impl SweAux {
    pub fn new(a: f64, b: f64) -> Self {
        Self { a, b }
    }
}

/// Which symmetric positive definite matrix scales the entropy-variable jump
/// in the well-balanced interface penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WellBalancedMatrix {
    /// `(λ/2) ∂u/∂v = (λ/2) (a/g) [[1, u], [u, gh + u²]]`, so that the penalty
    /// linearizes to the Lax-Friedrichs penalty `(λ/2) [[u]]`.
    #[default]
    EntropyJacobian,
    /// `(λ/2) (1/(ah)) [[gh + u², -u], [-u, 1]]`, the inverse Jacobian `∂v/∂u`.
    InverseJacobian,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShallowWater {
    pub g: f64,
    pub wb_matrix: WellBalancedMatrix,
}

impl Default for ShallowWater {
    fn default() -> Self {
        Self::new(DEFAULT_GRAVITY)
    }
}

/// Depth and velocity of a state.
#[inline]
pub fn primitives(u: &[f64; 2], aux: &SweAux) -> (f64, f64) {
    (u[0] / aux.a, u[1] / u[0])
}

impl ShallowWater {
    pub fn new(g: f64) -> Self {
        Self {
            g,
            wb_matrix: WellBalancedMatrix::default(),
        }
    }

    pub fn with_wb_matrix(mut self, wb_matrix: WellBalancedMatrix) -> Self {
        self.wb_matrix = wb_matrix;
        self
    }

    /// Scaled conservative state from depth and velocity.
    pub fn conservative(&self, h: f64, vel: f64, aux: &SweAux) -> [f64; 2] {
        let ah = aux.a * h;
        [ah, ah * vel]
    }

    /// The 2x2 dissipation matrix `R` (row-major) evaluated at the interface average.
    pub fn wb_dissipation_matrix(
        &self,
        u: &[f64; 2],
        aux: &SweAux,
        u_ext: &[f64; 2],
        aux_ext: &SweAux,
        lambda: f64,
    ) -> Result<[f64; 4], PhysicsError> {
        let a = avg(aux.a, aux_ext.a);
        let ah = avg(u[0], u_ext[0]);
        let h = ah / a;
        if !(h > 0.0) || !h.is_finite() {
            return Err(PhysicsError::SingularDissipation { h });
        }
        let vel = avg(u[1], u_ext[1]) / ah;
        let g = self.g;
        let half = 0.5 * lambda;
        Ok(match self.wb_matrix {
            WellBalancedMatrix::EntropyJacobian => {
                let s = half * a / g;
                [s, s * vel, s * vel, s * (g * h + vel * vel)]
            }
            WellBalancedMatrix::InverseJacobian => {
                let s = half / ah;
                [s * (g * h + vel * vel), -s * vel, -s * vel, s]
            }
        })
    }

    /// Well-balanced interface flux `f_EC(u, u⁺) - R (v⁺ - v) n`.
    pub fn interface_flux_wb(
        &self,
        u: &[f64; 2],
        aux: &SweAux,
        u_ext: &[f64; 2],
        aux_ext: &SweAux,
        normal: f64,
        lambda: f64,
    ) -> Result<[f64; 2], PhysicsError> {
        let r = self.wb_dissipation_matrix(u, aux, u_ext, aux_ext, lambda)?;
        let v = self.entropy_variables(u, aux);
        let v_ext = self.entropy_variables(u_ext, aux_ext);
        let jump = [v_ext[0] - v[0], v_ext[1] - v[1]];
        let mut f = self.ec_flux(u, aux, u_ext, aux_ext);
        f[0] -= normal * (r[0] * jump[0] + r[1] * jump[1]);
        f[1] -= normal * (r[2] * jump[0] + r[3] * jump[1]);
        Ok(f)
    }
}

impl Equation for ShallowWater {
    type State = [f64; 2];
    type Aux = SweAux;

    const NVARS: usize = 2;
    const NAME: &'static str = "shallow-water";

    fn width(&self, aux: &SweAux) -> f64 {
        aux.a
    }

    fn variable_names(&self) -> &'static [&'static str] {
        &["ah", "ahu"]
    }

    fn check_admissible(&self, u: &[f64; 2], aux: &SweAux) -> Result<(), PhysicsError> {
        if !(aux.a > 0.0) {
            return Err(PhysicsError::NonPositiveWidth { a: aux.a });
        }
        if !u[0].is_finite() || !u[1].is_finite() {
            return Err(PhysicsError::NonFinite);
        }
        let h = u[0] / aux.a;
        if !(h > 0.0) {
            return Err(PhysicsError::NonPositiveHeight { h });
        }
        Ok(())
    }

    fn entropy_pair(
        &self,
        u: &[f64; 2],
        aux: &SweAux,
    ) -> Result<EntropyPair<[f64; 2]>, PhysicsError> {
        self.check_admissible(u, aux)?;
        let (h, vel) = primitives(u, aux);
        let g = self.g;
        let a = aux.a;
        Ok(EntropyPair {
            entropy: self.entropy(u, aux),
            entropy_flux: 0.5 * a * h * vel.powi(3) + g * a * h * vel * (h + aux.b),
            potential: 0.5 * g * a * h * (h + aux.b) * vel,
            variables: self.entropy_variables(u, aux),
        })
    }

    #[inline]
    fn entropy_variables(&self, u: &[f64; 2], aux: &SweAux) -> [f64; 2] {
        let (h, vel) = primitives(u, aux);
        [self.g * (h + aux.b) - 0.5 * vel * vel, vel]
    }

    fn entropy(&self, u: &[f64; 2], aux: &SweAux) -> f64 {
        let (h, vel) = primitives(u, aux);
        let ah = u[0];
        0.5 * ah * vel * vel + 0.5 * self.g * ah * h + self.g * ah * aux.b
    }

    #[inline]
    fn potential(&self, u: &[f64; 2], aux: &SweAux) -> f64 {
        let (h, vel) = primitives(u, aux);
        0.5 * self.g * aux.a * h * (h + aux.b) * vel
    }

    #[inline]
    fn ec_flux(&self, ul: &[f64; 2], al: &SweAux, ur: &[f64; 2], ar: &SweAux) -> [f64; 2] {
        let (h_l, vel_l) = primitives(ul, al);
        let (h_r, vel_r) = primitives(ur, ar);
        let mass = avg(ul[1], ur[1]);
        [
            mass,
            mass * avg(vel_l, vel_r) + 0.5 * self.g * al.a * h_l * (h_r + ar.b),
        ]
    }

    #[inline]
    fn nonsym_flux(&self, ul: &[f64; 2], al: &SweAux, ur: &[f64; 2], ar: &SweAux) -> [f64; 2] {
        let h_l = ul[0] / al.a;
        let h_r = ur[0] / ar.a;
        [0.0, 0.5 * self.g * al.a * h_l * (h_r + ar.b)]
    }

    fn nonconservative_split(&self, u: &[f64; 2], aux: &SweAux) -> (f64, f64) {
        let h = u[0] / aux.a;
        (self.g * aux.a * h, h + aux.b)
    }

    #[inline]
    fn wavespeed(&self, u: &[f64; 2], aux: &SweAux) -> f64 {
        let (h, vel) = primitives(u, aux);
        vel.abs() + (self.g * h).sqrt()
    }

    fn supports(&self, _kind: InterfaceFlux) -> bool {
        true
    }

    fn interface_flux(
        &self,
        kind: InterfaceFlux,
        u: &[f64; 2],
        aux: &SweAux,
        u_ext: &[f64; 2],
        aux_ext: &SweAux,
        normal: f64,
    ) -> Result<[f64; 2], PhysicsError> {
        match kind {
            InterfaceFlux::EntropyConservative => Ok(self.ec_flux(u, aux, u_ext, aux_ext)),
            InterfaceFlux::LaxFriedrichs => {
                let lambda = self.max_wavespeed(u, aux, u_ext, aux_ext);
                Ok(super::interface_flux_es_lxf(
                    self, u, aux, u_ext, aux_ext, normal, lambda,
                ))
            }
            InterfaceFlux::WellBalanced => {
                let lambda = self.max_wavespeed(u, aux, u_ext, aux_ext);
                self.interface_flux_wb(u, aux, u_ext, aux_ext, normal, lambda)
            }
        }
    }
}

/// `v · f` helper used by the entropy checks.
pub fn entropy_flux_product(eq: &ShallowWater, u: &[f64; 2], aux: &SweAux, f: &[f64; 2]) -> f64 {
    dot(&eq.entropy_variables(u, aux), f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{interface_flux_es_lxf, tadmor_residual};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(rng: &mut impl Rng) -> ([f64; 2], SweAux) {
        let h = rng.gen_range(0.1..5.0);
        let vel = rng.gen_range(-3.0..3.0);
        let aux = SweAux::new(rng.gen_range(0.5..2.0), rng.gen_range(0.0..1.0));
        let eq = ShallowWater::default();
        (eq.conservative(h, vel, &aux), aux)
    }

    #[test]
    fn rest_state_entropy() {
        let eq = ShallowWater::default();
        let aux = SweAux::new(1.0, 0.0);
        let pair = eq.entropy_pair(&[1.0, 0.0], &aux).unwrap();
        assert_abs_diff_eq!(pair.entropy, 4.905, epsilon = 1e-14);
        assert_eq!(pair.entropy_flux, 0.0);
        assert_eq!(pair.potential, 0.0);
        assert_abs_diff_eq!(pair.variables[0], 9.81, epsilon = 1e-14);
        assert_eq!(pair.variables[1], 0.0);
    }

    #[test]
    fn moving_state_entropy() {
        let eq = ShallowWater::default();
        let aux = SweAux::new(1.0, 1.0);
        let u = eq.conservative(2.0, 3.0, &aux);
        assert_abs_diff_eq!(eq.entropy(&u, &aux), 48.24, epsilon = 1e-12);
    }

    #[test]
    fn potential_matches_v_dot_f_minus_entropy_flux() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let eq = ShallowWater::default();
        for _ in 0..100 {
            let (u, aux) = random_state(&mut rng);
            let pair = eq.entropy_pair(&u, &aux).unwrap();
            let f = eq.ec_flux(&u, &aux, &u, &aux);
            let psi = dot(&pair.variables, &f) - pair.entropy_flux;
            assert!((psi - pair.potential).abs() <= 1e-12 * (1.0 + psi.abs()));
        }
    }

    #[test]
    fn rejects_dry_state() {
        let eq = ShallowWater::default();
        let aux = SweAux::new(1.0, 0.0);
        assert!(matches!(
            eq.entropy_pair(&[0.0, 1.0], &aux),
            Err(PhysicsError::NonPositiveHeight { .. })
        ));
        assert!(matches!(
            eq.check_admissible(&[1.0, 0.0], &SweAux::new(-1.0, 0.0)),
            Err(PhysicsError::NonPositiveWidth { .. })
        ));
    }

    #[test]
    fn equal_state_flux() {
        let eq = ShallowWater::default();
        let aux = SweAux::new(1.0, 0.0);
        let u = eq.conservative(2.0, 3.0, &aux);
        let f = eq.ec_flux(&u, &aux, &u, &aux);
        assert_abs_diff_eq!(f[0], 6.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f[1], 37.62, epsilon = 1e-12);
    }

    #[test]
    fn lake_at_rest_has_no_mass_flux() {
        let eq = ShallowWater::default();
        let (al, ar) = (SweAux::new(1.0, 0.2), SweAux::new(0.7, 0.6));
        let ul = eq.conservative(0.8, 0.0, &al);
        let ur = eq.conservative(0.4, 0.0, &ar);
        assert_eq!(eq.ec_flux(&ul, &al, &ur, &ar)[0], 0.0);
    }

    #[test]
    fn tadmor_condition_on_random_pairs() {
        let eq = ShallowWater::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..2000 {
            let (ul, al) = random_state(&mut rng);
            let (ur, ar) = random_state(&mut rng);
            let r = tadmor_residual(&eq, &ul, &al, &ur, &ar, |a, b, c, d| eq.ec_flux(a, b, c, d));
            let scale = (eq.potential(&ul, &al) - eq.potential(&ur, &ar)).abs() + 1.0;
            assert!(r.abs() <= 1e-11 * scale, "residual {r}");
        }
    }

    #[test]
    fn mass_flux_is_symmetric() {
        let eq = ShallowWater::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let (ul, al) = random_state(&mut rng);
            let (ur, ar) = random_state(&mut rng);
            assert_eq!(eq.ec_flux(&ul, &al, &ur, &ar)[0], eq.ec_flux(&ur, &ar, &ul, &al)[0]);
        }
    }

    #[test]
    fn lxf_penalty_on_mass() {
        let eq = ShallowWater::default();
        let aux = SweAux::new(1.0, 0.0);
        let ul = [1.0, 0.5];
        let ur = [2.0, 0.5];
        let ec = eq.ec_flux(&ul, &aux, &ur, &aux);
        let f = interface_flux_es_lxf(&eq, &ul, &aux, &ur, &aux, 1.0, 1.0);
        assert_abs_diff_eq!(f[0], ec[0] - 0.5, epsilon = 1e-15);
    }

    #[test]
    fn wb_penalty_vanishes_at_lake_at_rest() {
        let eq = ShallowWater::default();
        let (al, ar) = (SweAux::new(1.3, 0.1), SweAux::new(0.5, 0.6));
        let ul = eq.conservative(1.0 - al.b, 0.0, &al);
        let ur = eq.conservative(1.0 - ar.b, 0.0, &ar);
        let lambda = eq.max_wavespeed(&ul, &al, &ur, &ar);
        let f = eq.interface_flux_wb(&ul, &al, &ur, &ar, 1.0, lambda).unwrap();
        let h_l = 1.0 - al.b;
        // [[v]] vanishes up to the rounding in recovering h = ah / a
        let ec = eq.ec_flux(&ul, &al, &ur, &ar);
        assert_eq!(ec[0], 0.0);
        assert_abs_diff_eq!(f[0], 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f[1], 0.5 * eq.g * al.a * h_l, epsilon = 1e-14);
        assert_abs_diff_eq!(f[1], ec[1], epsilon = 1e-14);
    }

    #[test]
    fn wb_equals_ec_for_equal_states() {
        let eq = ShallowWater::default();
        let aux = SweAux::new(0.9, 0.3);
        let u = eq.conservative(1.7, -0.4, &aux);
        let f = eq.interface_flux_wb(&u, &aux, &u, &aux, -1.0, 4.0).unwrap();
        assert_eq!(f, eq.ec_flux(&u, &aux, &u, &aux));
    }

    fn eig2_sym(m: &[f64; 4]) -> (f64, f64) {
        let tr = m[0] + m[3];
        let det = m[0] * m[3] - m[1] * m[2];
        let disc = (0.25 * tr * tr - det).max(0.0).sqrt();
        (0.5 * tr - disc, 0.5 * tr + disc)
    }

    #[test]
    fn wb_matrix_is_spd() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for matrix in [WellBalancedMatrix::EntropyJacobian, WellBalancedMatrix::InverseJacobian] {
            let eq = ShallowWater::default().with_wb_matrix(matrix);
            for _ in 0..500 {
                let (ul, al) = random_state(&mut rng);
                let (ur, ar) = random_state(&mut rng);
                let r = eq.wb_dissipation_matrix(&ul, &al, &ur, &ar, 2.0).unwrap();
                assert_eq!(r[1], r[2]);
                let (lo, _) = eig2_sym(&r);
                assert!(lo > 0.0, "{matrix:?} {r:?}");
            }
        }
    }

    #[test]
    fn wb_penalty_linearizes_to_lxf() {
        // For nearby states, (∂u/∂v) [[v]] ≈ [[u]].
        let eq = ShallowWater::default();
        let aux = SweAux::new(1.2, 0.3);
        let u = eq.conservative(1.5, 0.7, &aux);
        let delta = 1e-6;
        let u_ext = [u[0] * (1.0 + delta), u[1] * (1.0 - 2.0 * delta)];
        let lambda = 3.0;
        let wb = eq.interface_flux_wb(&u, &aux, &u_ext, &aux, 1.0, lambda).unwrap();
        let lxf = interface_flux_es_lxf(&eq, &u, &aux, &u_ext, &aux, 1.0, lambda);
        let jump = (u_ext[0] - u[0]).abs() + (u_ext[1] - u[1]).abs();
        for k in 0..2 {
            assert!((wb[k] - lxf[k]).abs() <= 1e-3 * jump, "{k}: {} vs {}", wb[k], lxf[k]);
        }
    }

    #[test]
    fn wb_is_entropy_stable() {
        let eq = ShallowWater::default();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..2000 {
            let (ul, al) = random_state(&mut rng);
            let (ur, ar) = random_state(&mut rng);
            let lambda = eq.max_wavespeed(&ul, &al, &ur, &ar);
            // Seen from the left element the outward normal is +1; from the right, -1.
            let f_lr = eq.interface_flux_wb(&ul, &al, &ur, &ar, 1.0, lambda).unwrap();
            let f_rl = eq.interface_flux_wb(&ur, &ar, &ul, &al, -1.0, lambda).unwrap();
            let r = entropy_flux_product(&eq, &ul, &al, &f_lr)
                - entropy_flux_product(&eq, &ur, &ar, &f_rl)
                - (eq.potential(&ul, &al) - eq.potential(&ur, &ar));
            let scale = (eq.potential(&ul, &al) - eq.potential(&ur, &ar)).abs() + 1.0;
            assert!(r >= -1e-11 * scale, "{r}");
        }
    }

    #[test]
    fn wavespeed_at_rest() {
        let eq = ShallowWater::default();
        let aux = SweAux::new(1.0, 0.0);
        let u = [1.0, 0.0];
        assert_abs_diff_eq!(eq.max_wavespeed(&u, &aux, &u, &aux), 9.81f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(9.81f64.sqrt(), 3.1321, epsilon = 1e-4);
    }
}
