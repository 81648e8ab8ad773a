//! Steady quasi-1D nozzle flow from the isentropic area-Mach relation, with a
//! normal shock in the divergent section for the transonic regime.

use std::fmt;
use std::str::FromStr;

use quasi1d::physics::euler::Primitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NozzleError {
    #[error("no solution on the {branch} branch for area ratio {ratio}")]
    NoRoot { branch: &'static str, ratio: f64 },
    #[error("outlet pressure ratio {ratio} is outside the {regime} range [{low}, {high}]")]
    InvalidRegime { regime: NozzleRegime, ratio: f64, low: f64, high: f64 },
    #[error("invalid nozzle geometry: {0}")]
    Geometry(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NozzleRegime {
    Subsonic,
    Transonic,
}

impl fmt::Display for NozzleRegime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NozzleRegime::Subsonic => "subsonic",
            NozzleRegime::Transonic => "transonic",
        })
    }
}

impl FromStr for NozzleRegime {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "subsonic" => Ok(Self::Subsonic),
            "transonic" => Ok(Self::Transonic),
            other => Err(format!("unknown nozzle regime '{other}' (expected subsonic, transonic)")),
        }
    }
}

/// Parabolic Laval nozzle `a(x) = throat_width + curvature (x - x_throat)²` on `[x_left, x_right]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LavalNozzle {
    pub x_left: f64,
    pub x_right: f64,
    pub x_throat: f64,
    pub throat_width: f64,
    pub curvature: f64,
}

impl Default for LavalNozzle {
    fn default() -> Self {
        Self { x_left: 0.0, x_right: 3.0, x_throat: 1.5, throat_width: 1.0, curvature: 2.2 }
    }
}

impl LavalNozzle {
    pub fn width(&self, x: f64) -> f64 {
        let d = x - self.x_throat;
        self.throat_width + self.curvature * d * d
    }

    fn validate(&self) -> Result<(), NozzleError> {
        if !(self.x_left < self.x_throat && self.x_throat < self.x_right) {
            return Err(NozzleError::Geometry("throat must lie strictly inside the domain".into()));
        }
        if !(self.throat_width > 0.0 && self.curvature > 0.0) {
            return Err(NozzleError::Geometry("throat width and curvature must be positive".into()));
        }
        Ok(())
    }
}

/// `A / A*` at Mach number `m`.
pub fn area_ratio(m: f64, gamma: f64) -> f64 {
    let gp = gamma + 1.0;
    let gm = gamma - 1.0;
    (2.0 / gp * (1.0 + 0.5 * gm * m * m)).powf(0.5 * gp / gm) / m
}

/// `p / p0` at Mach number `m`.
pub fn isentropic_pressure(m: f64, gamma: f64) -> f64 {
    (1.0 + 0.5 * (gamma - 1.0) * m * m).powf(-gamma / (gamma - 1.0))
}

/// `ρ / ρ0` at Mach number `m`.
pub fn isentropic_density(m: f64, gamma: f64) -> f64 {
    (1.0 + 0.5 * (gamma - 1.0) * m * m).powf(-1.0 / (gamma - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Subsonic,
    Supersonic,
}

/// Inverts the area-Mach relation on one branch by bisection.
pub fn mach_from_area(ratio: f64, gamma: f64, branch: Branch) -> Result<f64, NozzleError> {
    let name = match branch {
        Branch::Subsonic => "subsonic",
        Branch::Supersonic => "supersonic",
    };
    if !(ratio >= 1.0 - 1e-14) || !ratio.is_finite() {
        return Err(NozzleError::NoRoot { branch: name, ratio });
    }
    if ratio <= 1.0 {
        return Ok(1.0);
    }
    let (mut lo, mut hi) = match branch {
        Branch::Subsonic => (1e-12, 1.0),
        Branch::Supersonic => {
            let mut hi: f64 = 2.0;
            while area_ratio(hi, gamma) < ratio {
                hi *= 2.0;
                if hi > 1e6 {
                    return Err(NozzleError::NoRoot { branch: name, ratio });
                }
            }
            (1.0, hi)
        }
    };
    // f(m) = A(m)/A* - ratio is decreasing on the subsonic branch and increasing on the supersonic one
    let sign = if branch == Branch::Subsonic { -1.0 } else { 1.0 };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sign * (area_ratio(mid, gamma) - ratio) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Stagnation-pressure ratio `p02 / p01` across a normal shock at upstream Mach `m1`.
pub fn shock_stagnation_ratio(m1: f64, gamma: f64) -> f64 {
    let gp = gamma + 1.0;
    let gm = gamma - 1.0;
    let m2 = m1 * m1;
    let a = (0.5 * gp * m2 / (1.0 + 0.5 * gm * m2)).powf(gamma / gm);
    let b = (2.0 * gamma / gp * m2 - gm / gp).powf(-1.0 / gm);
    a * b
}

/// Steady solution through the nozzle for given stagnation state and outlet pressure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NozzleSolution {
    pub geometry: LavalNozzle,
    pub gamma: f64,
    pub regime: NozzleRegime,
    pub rho0: f64,
    pub p0: f64,
    /// Sonic area upstream of any shock.
    pub sonic_area: f64,
    pub shock_position: Option<f64>,
    /// Stagnation pressure and sonic area behind the shock.
    pub p0_downstream: f64,
    pub sonic_area_downstream: f64,
}

impl NozzleSolution {
    pub fn mach(&self, x: f64) -> f64 {
        let a = self.geometry.width(x);
        let (area_star, branch) = match (self.regime, self.shock_position) {
            (NozzleRegime::Subsonic, _) => (self.sonic_area, Branch::Subsonic),
            (NozzleRegime::Transonic, _) if x <= self.geometry.x_throat => (self.sonic_area, Branch::Subsonic),
            (NozzleRegime::Transonic, Some(xs)) if x < xs => (self.sonic_area, Branch::Supersonic),
            (NozzleRegime::Transonic, _) => (self.sonic_area_downstream, Branch::Subsonic),
        };
        mach_from_area((a / area_star).max(1.0), self.gamma, branch).unwrap_or(1.0)
    }

    fn stagnation(&self, x: f64) -> (f64, f64) {
        match self.shock_position {
            Some(xs) if x >= xs => {
                let r = self.p0_downstream / self.p0;
                (self.rho0 * r, self.p0_downstream)
            }
            _ => (self.rho0, self.p0),
        }
    }

    pub fn primitive(&self, x: f64) -> Primitive {
        let m = self.mach(x);
        let (rho0, p0) = self.stagnation(x);
        let rho = rho0 * isentropic_density(m, self.gamma);
        let p = p0 * isentropic_pressure(m, self.gamma);
        let c = (self.gamma * p / rho).sqrt();
        Primitive { rho, vel: m * c, p }
    }

    pub fn mass_flow(&self, x: f64) -> f64 {
        let prim = self.primitive(x);
        self.geometry.width(x) * prim.rho * prim.vel
    }
}

/// Builds the steady nozzle solution for stagnation state `(rho0, p0)` and outlet
/// pressure `outlet_ratio · p0`.
pub fn exact_nozzle_solution(
    geometry: LavalNozzle,
    regime: NozzleRegime,
    gamma: f64,
    rho0: f64,
    p0: f64,
    outlet_ratio: f64,
) -> Result<NozzleSolution, NozzleError> {
    geometry.validate()?;
    let exit_area = geometry.width(geometry.x_right);
    let throat = geometry.throat_width;
    // outlet pressure of the choked, shock-free subsonic solution
    let choked = isentropic_pressure(mach_from_area(exit_area / throat, gamma, Branch::Subsonic)?, gamma);

    match regime {
        NozzleRegime::Subsonic => {
            if !(outlet_ratio > choked && outlet_ratio < 1.0) {
                return Err(NozzleError::InvalidRegime { regime, ratio: outlet_ratio, low: choked, high: 1.0 });
            }
            let m_exit = ((outlet_ratio.powf(-(gamma - 1.0) / gamma) - 1.0) * 2.0 / (gamma - 1.0)).sqrt();
            let sonic_area = exit_area / area_ratio(m_exit, gamma);
            Ok(NozzleSolution {
                geometry,
                gamma,
                regime,
                rho0,
                p0,
                sonic_area,
                shock_position: None,
                p0_downstream: p0,
                sonic_area_downstream: sonic_area,
            })
        }
        NozzleRegime::Transonic => {
            let exit_with_shock_at = |xs: f64| -> Result<(f64, f64, f64), NozzleError> {
                let m1 = mach_from_area(geometry.width(xs) / throat, gamma, Branch::Supersonic)?;
                let loss = shock_stagnation_ratio(m1, gamma);
                let area2 = throat / loss;
                let m_exit = mach_from_area(exit_area / area2, gamma, Branch::Subsonic)?;
                Ok((loss * isentropic_pressure(m_exit, gamma), loss, area2))
            };
            let low = exit_with_shock_at(geometry.x_right)?.0;
            if !(outlet_ratio > low && outlet_ratio < choked) {
                return Err(NozzleError::InvalidRegime { regime, ratio: outlet_ratio, low, high: choked });
            }
            let (mut lo, mut hi) = (geometry.x_throat, geometry.x_right);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if mid <= lo || mid >= hi {
                    break;
                }
                // outlet pressure falls as the shock moves downstream
                if exit_with_shock_at(mid)?.0 > outlet_ratio {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let xs = 0.5 * (lo + hi);
            let (_, loss, area2) = exit_with_shock_at(xs)?;
            Ok(NozzleSolution {
                geometry,
                gamma,
                regime,
                rho0,
                p0,
                sonic_area: throat,
                shock_position: Some(xs),
                p0_downstream: loss * p0,
                sonic_area_downstream: area2,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_mach_examples() {
        let m = mach_from_area(2.0, 1.4, Branch::Subsonic).unwrap();
        assert!((m - 0.30590).abs() < 5e-6, "{m}");
        assert!((area_ratio(m, 1.4) - 2.0).abs() < 1e-12);
        let m = mach_from_area(2.0, 1.4, Branch::Supersonic).unwrap();
        assert!((m - 2.1972).abs() < 1e-4, "{m}");
        assert!((area_ratio(m, 1.4) - 2.0).abs() < 1e-12);
        assert_eq!(mach_from_area(1.0, 1.4, Branch::Subsonic).unwrap(), 1.0);
        assert_eq!(mach_from_area(1.0, 1.4, Branch::Supersonic).unwrap(), 1.0);
        assert!(mach_from_area(0.5, 1.4, Branch::Subsonic).is_err());
    }

    #[test]
    fn normal_shock_relations() {
        // M1 = 2: p02/p01 = 0.72087
        assert!((shock_stagnation_ratio(2.0, 1.4) - 0.72087).abs() < 1e-5);
        assert!((shock_stagnation_ratio(1.0, 1.4) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn subsonic_solution_is_smooth_and_conserves_mass() {
        let sol = exact_nozzle_solution(LavalNozzle::default(), NozzleRegime::Subsonic, 1.4, 1.0, 1.0, 0.995).unwrap();
        let m_throat = sol.mach(1.5);
        assert!(m_throat < 1.0 && m_throat > 0.5, "{m_throat}");
        let q0 = sol.mass_flow(0.0);
        for i in 0..=60 {
            let x = 0.05 * i as f64;
            assert!(sol.mach(x) <= m_throat + 1e-14);
            assert!(((sol.mass_flow(x) - q0) / q0).abs() < 1e-10);
        }
        let exit = sol.primitive(3.0);
        assert!((exit.p - 0.995).abs() < 1e-12);
    }

    #[test]
    fn transonic_solution_has_shock_in_divergent_section() {
        let sol = exact_nozzle_solution(LavalNozzle::default(), NozzleRegime::Transonic, 1.4, 1.0, 1.0, 0.75).unwrap();
        let xs = sol.shock_position.unwrap();
        assert!(xs > 1.5 && xs < 3.0, "{xs}");
        assert!(sol.mach(xs - 1e-6) > 1.0 && sol.mach(xs + 1e-6) < 1.0);
        assert!((sol.mach(1.5) - 1.0).abs() < 1e-12);
        assert!((sol.primitive(3.0).p - 0.75).abs() < 1e-10);
        let q0 = sol.mass_flow(0.0);
        for i in 0..=60 {
            let x = 0.05 * i as f64;
            assert!(((sol.mass_flow(x) - q0) / q0).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn regimes_reject_incompatible_pressure_ratios() {
        let g = LavalNozzle::default();
        assert!(exact_nozzle_solution(g, NozzleRegime::Subsonic, 1.4, 1.0, 1.0, 0.89).is_err());
        assert!(exact_nozzle_solution(g, NozzleRegime::Transonic, 1.4, 1.0, 1.0, 0.999).is_err());
        assert!(exact_nozzle_solution(g, NozzleRegime::Transonic, 1.4, 1.0, 1.0, 0.05).is_err());
    }
}
