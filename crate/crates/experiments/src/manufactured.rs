//! Manufactured solutions and their analytically derived source terms.

use std::f64::consts::PI;

use quasi1d::physics::{EulerAux, SweAux};

/// A scalar field with its first space and time derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Field {
    pub value: f64,
    pub dx: f64,
    pub dt: f64,
}

/// Shallow water manufactured solution
/// `h = 3 + e^{cos 2πx} e^{-t} / 10`, `u = sin(cos 2πx) e^{-t}`
/// on the width `a = e^{sin 2πx}` and bathymetry `b = sin²(πx)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweManufactured {
    pub g: f64,
}

impl SweManufactured {
    pub fn new(g: f64) -> Self {
        Self { g }
    }

    pub fn width(x: f64) -> Field {
        let a = (2.0 * PI * x).sin().exp();
        Field { value: a, dx: 2.0 * PI * (2.0 * PI * x).cos() * a, dt: 0.0 }
    }

    pub fn bathymetry(x: f64) -> Field {
        let s = (PI * x).sin();
        Field { value: s * s, dx: PI * (2.0 * PI * x).sin(), dt: 0.0 }
    }

    pub fn aux(x: f64) -> SweAux {
        SweAux::new(Self::width(x).value, Self::bathymetry(x).value)
    }

    pub fn height(x: f64, t: f64) -> Field {
        let c = (2.0 * PI * x).cos();
        let s = (2.0 * PI * x).sin();
        let e = 0.1 * c.exp() * (-t).exp();
        Field { value: 3.0 + e, dx: -2.0 * PI * s * e, dt: -e }
    }

    pub fn velocity(x: f64, t: f64) -> Field {
        let c = (2.0 * PI * x).cos();
        let s = (2.0 * PI * x).sin();
        let decay = (-t).exp();
        Field {
            value: c.sin() * decay,
            dx: -2.0 * PI * s * c.cos() * decay,
            dt: -c.sin() * decay,
        }
    }

    /// Unscaled conservative variables `(h, hu)`.
    pub fn exact(x: f64, t: f64) -> [f64; 2] {
        let h = Self::height(x, t).value;
        [h, h * Self::velocity(x, t).value]
    }

    /// Scaled conservative variables `(ah, ahu)`.
    pub fn exact_scaled(x: f64, t: f64, aux: &SweAux) -> [f64; 2] {
        Self::exact(x, t).map(|c| aux.a * c)
    }

    pub fn source(&self, x: f64, t: f64) -> [f64; 2] {
        let a = Self::width(x);
        let b = Self::bathymetry(x);
        let h = Self::height(x, t);
        let u = Self::velocity(x, t);
        let mass = a.value * h.dt
            + a.dx * h.value * u.value
            + a.value * h.dx * u.value
            + a.value * h.value * u.dx;
        let momentum = a.value * (h.dt * u.value + h.value * u.dt)
            + a.dx * h.value * u.value * u.value
            + a.value * h.dx * u.value * u.value
            + 2.0 * a.value * h.value * u.value * u.dx
            + self.g * a.value * h.value * (h.dx + b.dx);
        [mass, momentum]
    }
}

/// Euler manufactured solution `ρ = u = p = (1 + sin(2πx)/10 + cos(2πx)/10) e^{-t}`
/// in the nozzle `a = 1 - (1 + cos(2π(x - 1/2)))/10`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerManufactured {
    pub gamma: f64,
}

impl EulerManufactured {
    pub fn new(gamma: f64) -> Self {
        Self { gamma }
    }

    pub fn width(x: f64) -> Field {
        let arg = 2.0 * PI * (x - 0.5);
        Field { value: 1.0 - 0.1 * (1.0 + arg.cos()), dx: 0.2 * PI * arg.sin(), dt: 0.0 }
    }

    pub fn aux(x: f64) -> EulerAux {
        EulerAux::new(Self::width(x).value)
    }

    fn profile(x: f64, t: f64) -> Field {
        let s = (2.0 * PI * x).sin();
        let c = (2.0 * PI * x).cos();
        let decay = (-t).exp();
        let q = (1.0 + 0.1 * s + 0.1 * c) * decay;
        Field { value: q, dx: 0.2 * PI * (c - s) * decay, dt: -q }
    }

    /// `(ρ, u, p)` with derivatives.
    pub fn primitives(x: f64, t: f64) -> [Field; 3] {
        let q = Self::profile(x, t);
        [q, q, q]
    }

    /// Unscaled conservative variables `(ρ, ρu, E)`.
    pub fn exact(&self, x: f64, t: f64) -> [f64; 3] {
        let [rho, u, p] = Self::primitives(x, t).map(|f| f.value);
        [rho, rho * u, 0.5 * rho * u * u + p / (self.gamma - 1.0)]
    }

    pub fn exact_scaled(&self, x: f64, t: f64, aux: &EulerAux) -> [f64; 3] {
        self.exact(x, t).map(|c| aux.a * c)
    }

    pub fn source(&self, x: f64, t: f64) -> [f64; 3] {
        let a = Self::width(x);
        let [rho, u, p] = Self::primitives(x, t);
        let gm1 = self.gamma - 1.0;
        let (r, v, pr) = (rho.value, u.value, p.value);

        let energy = 0.5 * r * v * v + pr / gm1;
        let energy_t = 0.5 * (rho.dt * v * v + 2.0 * r * v * u.dt) + p.dt / gm1;
        let energy_x = 0.5 * (rho.dx * v * v + 2.0 * r * v * u.dx) + p.dx / gm1;
        let enthalpy_flux = v * (energy + pr);
        let enthalpy_flux_x = u.dx * (energy + pr) + v * (energy_x + p.dx);

        let mass = a.value * rho.dt + a.dx * r * v + a.value * (rho.dx * v + r * u.dx);
        let momentum = a.value * (rho.dt * v + r * u.dt)
            + a.dx * r * v * v
            + a.value * (rho.dx * v * v + 2.0 * r * v * u.dx)
            + a.value * p.dx;
        let energy_eq = a.value * energy_t + a.dx * enthalpy_flux + a.value * enthalpy_flux_x;
        [mass, momentum, energy_eq]
    }
}
