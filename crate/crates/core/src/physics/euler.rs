//! Quasi-1D compressible Euler equations in a nozzle of width `a(x)`.
//!
//! Conservative variables are `(aρ, aρu, aE)` with `E = ρu²/2 + p/(γ-1)`.

use super::means::{avg, logmean_unchecked, prodmean};
use super::{EntropyPair, Equation, PhysicsError};

pub const DEFAULT_GAMMA: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAux {
    pub a: f64,
}

impl EulerAux {
    pub fn new(a: f64) -> Self {
        Self { a }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Euler {
    pub gamma: f64,
}

impl Default for Euler {
    fn default() -> Self {
        Self::new(DEFAULT_GAMMA)
    }
}

/// Density, velocity and pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Primitive {
    pub rho: f64,
    pub vel: f64,
    pub p: f64,
}

impl Euler {
    pub fn new(gamma: f64) -> Self {
        assert!(gamma > 1.0, "specific heat ratio must exceed 1");
        Self { gamma }
    }

    #[inline]
    pub fn primitive(&self, u: &[f64; 3], aux: &EulerAux) -> Primitive {
        let rho = u[0] / aux.a;
        let vel = u[1] / u[0];
        let energy = u[2] / aux.a;
        let p = (self.gamma - 1.0) * (energy - 0.5 * rho * vel * vel);
        Primitive { rho, vel, p }
    }

    pub fn conservative(&self, prim: Primitive, aux: &EulerAux) -> [f64; 3] {
        let a = aux.a;
        let energy = 0.5 * prim.rho * prim.vel * prim.vel + prim.p / (self.gamma - 1.0);
        [a * prim.rho, a * prim.rho * prim.vel, a * energy]
    }

    pub fn sound_speed(&self, prim: &Primitive) -> f64 {
        (self.gamma * prim.p / prim.rho).sqrt()
    }

    pub fn mach(&self, u: &[f64; 3], aux: &EulerAux) -> f64 {
        let prim = self.primitive(u, aux);
        prim.vel.abs() / self.sound_speed(&prim)
    }

    /// Physical entropy `s = ln(p / ρ^γ)`.
    #[inline]
    fn specific_entropy(&self, prim: &Primitive) -> f64 {
        prim.p.ln() - self.gamma * prim.rho.ln()
    }
}

impl Equation for Euler {
    type State = [f64; 3];
    type Aux = EulerAux;

    const NVARS: usize = 3;
    const NAME: &'static str = "euler";

    fn width(&self, aux: &EulerAux) -> f64 {
        aux.a
    }

    fn variable_names(&self) -> &'static [&'static str] {
        &["arho", "arhou", "aE"]
    }

    fn check_admissible(&self, u: &[f64; 3], aux: &EulerAux) -> Result<(), PhysicsError> {
        if !(aux.a > 0.0) {
            return Err(PhysicsError::NonPositiveWidth { a: aux.a });
        }
        if u.iter().any(|c| !c.is_finite()) {
            return Err(PhysicsError::NonFinite);
        }
        let rho = u[0] / aux.a;
        if !(rho > 0.0) {
            return Err(PhysicsError::NonPositiveDensity { rho });
        }
        let p = self.primitive(u, aux).p;
        if !(p > 0.0) {
            return Err(PhysicsError::NonPositivePressure { p });
        }
        Ok(())
    }

    fn entropy_pair(
        &self,
        u: &[f64; 3],
        aux: &EulerAux,
    ) -> Result<EntropyPair<[f64; 3]>, PhysicsError> {
        self.check_admissible(u, aux)?;
        let prim = self.primitive(u, aux);
        let s = self.specific_entropy(&prim);
        let gm1 = self.gamma - 1.0;
        Ok(EntropyPair {
            entropy: -aux.a * prim.rho * s / gm1,
            entropy_flux: -aux.a * prim.rho * prim.vel * s / gm1,
            potential: aux.a * prim.rho * prim.vel,
            variables: self.entropy_variables(u, aux),
        })
    }

    #[inline]
    fn entropy_variables(&self, u: &[f64; 3], aux: &EulerAux) -> [f64; 3] {
        let prim = self.primitive(u, aux);
        let s = self.specific_entropy(&prim);
        let beta = prim.rho / prim.p;
        [
            (self.gamma - s) / (self.gamma - 1.0) - 0.5 * beta * prim.vel * prim.vel,
            beta * prim.vel,
            -beta,
        ]
    }

    fn entropy(&self, u: &[f64; 3], aux: &EulerAux) -> f64 {
        let prim = self.primitive(u, aux);
        -aux.a * prim.rho * self.specific_entropy(&prim) / (self.gamma - 1.0)
    }

    #[inline]
    fn potential(&self, u: &[f64; 3], _aux: &EulerAux) -> f64 {
        u[1]
    }

    #[inline]
    fn ec_flux(&self, ul: &[f64; 3], al: &EulerAux, ur: &[f64; 3], ar: &EulerAux) -> [f64; 3] {
        let l = self.primitive(ul, al);
        let r = self.primitive(ur, ar);
        let rho_log = logmean_unchecked(l.rho, r.rho);
        let beta_log = logmean_unchecked(l.rho / l.p, r.rho / r.p);
        let au_avg = avg(al.a * l.vel, ar.a * r.vel);
        let f_rho = rho_log * au_avg;
        let f_mom = f_rho * avg(l.vel, r.vel) + al.a * avg(l.p, r.p);
        let f_energy = 0.5 * f_rho * prodmean(l.vel, r.vel, l.vel, r.vel)
            + f_rho / (beta_log * (self.gamma - 1.0))
            + prodmean(l.p, r.p, al.a * l.vel, ar.a * r.vel);
        [f_rho, f_mom, f_energy]
    }

    #[inline]
    fn nonsym_flux(&self, ul: &[f64; 3], al: &EulerAux, ur: &[f64; 3], ar: &EulerAux) -> [f64; 3] {
        let p_l = self.primitive(ul, al).p;
        let p_r = self.primitive(ur, ar).p;
        [0.0, al.a * avg(p_l, p_r), 0.0]
    }

    fn nonconservative_split(&self, u: &[f64; 3], aux: &EulerAux) -> (f64, f64) {
        (aux.a, self.primitive(u, aux).p)
    }

    #[inline]
    fn wavespeed(&self, u: &[f64; 3], aux: &EulerAux) -> f64 {
        let prim = self.primitive(u, aux);
        prim.vel.abs() + self.sound_speed(&prim)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::{dot, interface_flux_es_lxf, tadmor_residual};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn prim(rho: f64, vel: f64, p: f64) -> Primitive {
        Primitive { rho, vel, p }
    }

    fn random_state(eq: &Euler, rng: &mut impl Rng) -> ([f64; 3], EulerAux) {
        let aux = EulerAux::new(rng.gen_range(0.5..2.0));
        let pr = prim(
            rng.gen_range(0.1..5.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(0.1..5.0),
        );
        (eq.conservative(pr, &aux), aux)
    }

    #[test]
    fn reference_state_entropy() {
        let eq = Euler::default();
        let aux = EulerAux::new(1.0);
        let u = eq.conservative(prim(1.0, 0.0, 1.0), &aux);
        let pair = eq.entropy_pair(&u, &aux).unwrap();
        assert_eq!(pair.entropy, 0.0);
        assert_eq!(pair.entropy_flux, 0.0);
        assert_eq!(pair.potential, 0.0);
        assert_abs_diff_eq!(pair.variables[0], 3.5, epsilon = 1e-14);
        assert_eq!(pair.variables[1], 0.0);
        assert_abs_diff_eq!(pair.variables[2], -1.0, epsilon = 1e-15);
    }

    #[test]
    fn potential_is_scaled_momentum() {
        let eq = Euler::default();
        let aux = EulerAux::new(2.0);
        let u = eq.conservative(prim(1.0, 2.0, 1.0), &aux);
        assert_abs_diff_eq!(eq.entropy_pair(&u, &aux).unwrap().potential, 4.0, epsilon = 1e-15);
    }

    #[test]
    fn primitive_round_trip() {
        let eq = Euler::default();
        let aux = EulerAux::new(0.7);
        let p0 = prim(1.3, -0.4, 2.2);
        let back = eq.primitive(&eq.conservative(p0, &aux), &aux);
        assert_abs_diff_eq!(back.rho, p0.rho, epsilon = 1e-14);
        assert_abs_diff_eq!(back.vel, p0.vel, epsilon = 1e-14);
        assert_abs_diff_eq!(back.p, p0.p, epsilon = 1e-14);
    }

    #[test]
    fn rejects_inadmissible() {
        let eq = Euler::default();
        let aux = EulerAux::new(1.0);
        assert!(matches!(
            eq.entropy_pair(&[-1.0, 0.0, 1.0], &aux),
            Err(PhysicsError::NonPositiveDensity { .. })
        ));
        assert!(matches!(
            eq.entropy_pair(&[1.0, 2.0, 1.0], &aux),
            Err(PhysicsError::NonPositivePressure { .. })
        ));
    }

    #[test]
    fn equal_state_flux_matches_point_flux() {
        let eq = Euler::default();
        let aux = EulerAux::new(1.0);
        let u = eq.conservative(prim(1.0, 1.0, 1.0), &aux);
        let f = eq.ec_flux(&u, &aux, &u, &aux);
        assert_abs_diff_eq!(f[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f[1], 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(f[2], 4.0, epsilon = 1e-14);
        // a u (E + p) with E = 3
        assert_abs_diff_eq!(u[2], 3.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_velocity_flux() {
        let eq = Euler::default();
        let (al, ar) = (EulerAux::new(1.0), EulerAux::new(1.5));
        let ul = eq.conservative(prim(1.0, 0.0, 2.0), &al);
        let ur = eq.conservative(prim(3.0, 0.0, 0.5), &ar);
        let f = eq.ec_flux(&ul, &al, &ur, &ar);
        assert_eq!(f[0], 0.0);
        assert_eq!(f[2], 0.0);
        assert_abs_diff_eq!(f[1], 1.0 * 1.25, epsilon = 1e-15);
    }

    #[test]
    fn tadmor_condition_on_random_pairs() {
        let eq = Euler::default();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..2000 {
            let (ul, al) = random_state(&eq, &mut rng);
            let (ur, ar) = random_state(&eq, &mut rng);
            let r = tadmor_residual(&eq, &ul, &al, &ur, &ar, |a, b, c, d| eq.ec_flux(a, b, c, d));
            let scale = (ul[1] - ur[1]).abs() + 1.0;
            assert!(r.abs() <= 1e-11 * scale, "residual {r}");
        }
    }

    #[test]
    fn mass_and_energy_fluxes_are_symmetric() {
        let eq = Euler::default();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let (ul, al) = random_state(&eq, &mut rng);
            let (ur, ar) = random_state(&eq, &mut rng);
            let f_lr = eq.ec_flux(&ul, &al, &ur, &ar);
            let f_rl = eq.ec_flux(&ur, &ar, &ul, &al);
            assert_eq!(f_lr[0], f_rl[0]);
            assert!((f_lr[2] - f_rl[2]).abs() <= 1e-14 * f_lr[2].abs().max(1.0));
        }
    }

    fn lxf_entropy_production(eq: &Euler, ul: &[f64; 3], al: &EulerAux, ur: &[f64; 3], ar: &EulerAux) -> f64 {
        let lambda = eq.max_wavespeed(ul, al, ur, ar);
        let f_lr = interface_flux_es_lxf(eq, ul, al, ur, ar, 1.0, lambda);
        let f_rl = interface_flux_es_lxf(eq, ur, ar, ul, al, -1.0, lambda);
        dot(&eq.entropy_variables(ul, al), &f_lr) - dot(&eq.entropy_variables(ur, ar), &f_rl)
            - (ul[1] - ur[1])
    }

    #[test]
    fn lxf_dissipates_entropy_at_continuous_width() {
        let eq = Euler::default();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        for _ in 0..2000 {
            let (ul, al) = random_state(&eq, &mut rng);
            let (mut ur, _) = random_state(&eq, &mut rng);
            let ar = al;
            // re-scale the right state onto the shared width
            let pr = eq.primitive(&ur, &EulerAux::new(1.0));
            ur = eq.conservative(pr, &ar);
            let r = lxf_entropy_production(&eq, &ul, &al, &ur, &ar);
            assert!(r >= -1e-11 * ((ul[1] - ur[1]).abs() + 1.0), "{r}");
        }
    }

    #[test]
    fn lxf_is_not_dissipative_across_a_width_jump() {
        // The conservative-jump penalty relies on monotonicity of u -> v,
        // which fails when the two sides map through different widths.
        let eq = Euler::default();
        let (al, ar) = (EulerAux::new(0.5), EulerAux::new(2.0));
        let ul = eq.conservative(prim(1.0, 0.0, 1.0), &al);
        let ur = eq.conservative(prim(0.5, 0.0, 0.5), &ar);
        assert!(lxf_entropy_production(&eq, &ul, &al, &ur, &ar) < 0.0);
    }

    #[test]
    fn wavespeed_at_rest() {
        let eq = Euler::default();
        let aux = EulerAux::new(1.0);
        let u = eq.conservative(prim(1.0, 0.0, 1.0), &aux);
        assert_abs_diff_eq!(eq.max_wavespeed(&u, &aux, &u, &aux), 1.4f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn well_balanced_flux_is_rejected() {
        let eq = Euler::default();
        let aux = EulerAux::new(1.0);
        let u = eq.conservative(prim(1.0, 0.0, 1.0), &aux);
        assert!(!eq.supports(crate::physics::InterfaceFlux::WellBalanced));
        assert!(eq
            .interface_flux(crate::physics::InterfaceFlux::WellBalanced, &u, &aux, &u, &aux, 1.0)
            .is_err());
    }
}
