//! Geometry, bathymetry and initial data of the benchmark cases.

use std::f64::consts::PI;

use quasi1d::physics::euler::Primitive;
use quasi1d::physics::{EulerAux, SweAux};

/// Shallow water cases.
pub mod swe {
    use super::*;

    /// Fine-grid convergence case on `[0, 1]`: `a = e^{sin 2πx}`, `b = sin²(πx)`.
    pub fn fine_grid_aux(x: f64) -> SweAux {
        SweAux::new((2.0 * PI * x).sin().exp(), (PI * x).sin().powi(2))
    }

    /// `h = 3 + e^{cos 2πx}`, `ahu = sin(cos 2πx)`.
    pub fn fine_grid_initial(x: f64, aux: &SweAux) -> [f64; 2] {
        let c = (2.0 * PI * x).cos();
        [aux.a * (3.0 + c.exp()), c.sin()]
    }

    pub const CONTRACTION_LEFT: f64 = 0.25;
    pub const CONTRACTION_RIGHT: f64 = 0.75;
    pub const CONTRACTION_DEPTH: f64 = 0.2;

    /// Continuous lake-at-rest geometry: a cosine bump in `b` on `[0.4, 0.6]`
    /// and a cosine contraction of the width on `[0.25, 0.75]`.
    pub fn well_balanced_continuous(x: f64) -> SweAux {
        let b = if (0.4..=0.6).contains(&x) {
            0.25 * (1.0 + (10.0 * PI * (x - 0.5)).cos())
        } else {
            0.0
        };
        let (xl, xr) = (CONTRACTION_LEFT, CONTRACTION_RIGHT);
        let a = if (xl..=xr).contains(&x) {
            1.0 - CONTRACTION_DEPTH * (1.0 + (2.0 * PI * (x - 0.5 * (xl + xr)) / (xr - xl)).cos())
        } else {
            1.0
        };
        SweAux::new(a, b)
    }

    /// Discontinuous lake-at-rest geometry: a step in `b` at `x = 1/2`; the width
    /// jumps at both ends of the contraction and is `1/2` past it.
    pub fn well_balanced_discontinuous(x: f64) -> SweAux {
        let b = if x > 0.5 { 0.5 } else { 0.0 };
        let (xl, xr) = (CONTRACTION_LEFT, CONTRACTION_RIGHT);
        let a = if (xl..=xr).contains(&x) {
            1.0 - CONTRACTION_DEPTH * (1.0 + (2.0 * PI * (x - 0.5 * (xl - xr)) / (xr - xl)).cos())
        } else if x > xr {
            0.5
        } else {
            1.0
        };
        SweAux::new(a, b)
    }

    /// Lake at rest `h + b = level`, `u = 0`.
    pub fn lake_at_rest(level: f64, aux: &SweAux) -> [f64; 2] {
        [aux.a * (level - aux.b), 0.0]
    }

    /// Converging-diverging channel width on `[0, 500]`; the cosine contraction is
    /// applied on `[100, contraction_end]`.
    pub fn channel_width(x: f64, contraction_end: f64) -> f64 {
        if (100.0..=contraction_end).contains(&x) {
            5.0 - 0.7065 * (1.0 + (2.0 * PI * (x - 250.0) / 300.0).cos())
        } else {
            5.0
        }
    }

    pub const CHANNEL_DISCHARGE: f64 = 20.0;
    pub const CHANNEL_OUTFLOW_HEIGHT: f64 = 1.85;
    pub const CHANNEL_INITIAL_HEIGHT: f64 = 2.0;
}

/// Compressible Euler cases.
pub mod euler {
    use super::*;

    pub const EC_LEFT: Primitive = Primitive { rho: 3.4718, vel: -2.5923, p: 5.7118 };
    pub const EC_RIGHT: Primitive = Primitive { rho: 2.0, vel: -3.0, p: 2.639 };

    /// Width of the entropy conservation test: `1` for `x < 0`, `1.5` for `x ≥ 0`.
    pub fn ec_width(x: f64) -> EulerAux {
        EulerAux::new(if x < 0.0 { 1.0 } else { 1.5 })
    }

    pub fn ec_initial(x: f64) -> Primitive {
        if x < 0.0 {
            EC_LEFT
        } else {
            EC_RIGHT
        }
    }

    /// Fine-grid convergence case: `a = 1 - (1 + cos(2π(x - 1/2)))/5`.
    pub fn fine_grid_width(x: f64) -> EulerAux {
        EulerAux::new(1.0 - 0.2 * (1.0 + (2.0 * PI * (x - 0.5)).cos()))
    }

    /// `ρ = 1 - (1 + sin(2π(x - 1/10)))/10`, `u = 0`, `p = ρ^γ`.
    pub fn fine_grid_initial(x: f64, gamma: f64) -> Primitive {
        let rho = 1.0 - 0.1 * (1.0 + (2.0 * PI * (x - 0.1)).sin());
        Primitive { rho, vel: 0.0, p: rho.powf(gamma) }
    }

    /// Vertex map of the non-uniform fine-grid mesh.
    pub fn nonuniform_map(x: f64) -> f64 {
        x - 0.3 * (PI * x).sin()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn well_balanced_geometries() {
        let c = swe::well_balanced_continuous(0.5);
        assert!((c.a - 0.6).abs() < 1e-15);
        assert!((c.b - 0.5).abs() < 1e-15);
        assert_eq!(swe::well_balanced_continuous(0.1), SweAux::new(1.0, 0.0));
        // continuous at the contraction ends
        assert!((swe::well_balanced_continuous(0.25).a - 1.0).abs() < 1e-15);

        let d = swe::well_balanced_discontinuous(0.25);
        assert!((d.a - 0.6).abs() < 1e-15);
        assert_eq!(swe::well_balanced_discontinuous(0.2).a, 1.0);
        assert_eq!(swe::well_balanced_discontinuous(0.9), SweAux::new(0.5, 0.5));
    }

    #[test]
    fn channel_geometry() {
        assert_eq!(swe::channel_width(50.0, 400.0), 5.0);
        assert!((swe::channel_width(250.0, 400.0) - (5.0 - 2.0 * 0.7065)).abs() < 1e-14);
        assert!((swe::channel_width(100.0, 400.0) - 5.0).abs() < 1e-13);
        assert!((swe::channel_width(400.0, 400.0) - 5.0).abs() < 1e-13);
    }

    #[test]
    fn euler_fine_grid_is_isentropic() {
        let p = euler::fine_grid_initial(0.3, 1.4);
        assert!((p.p - p.rho.powf(1.4)).abs() < 1e-15);
        assert!((euler::nonuniform_map(1.0) - 1.0).abs() < 1e-15);
        assert!((euler::fine_grid_width(0.5).a - 0.6).abs() < 1e-15);
    }
}
