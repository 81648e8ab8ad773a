use super::{SemidiscError, Semidiscretization};
use crate::physics::{dot, Equation};

/// Discrete entropy rate `Σ (M_k)_ii v_i · du_i` together with its magnitude scale
/// `Σ (M_k)_ii |v_i| |du_i|`, for relative comparisons.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EntropyRate {
    pub rate: f64,
    pub scale: f64,
}

/// Two evaluations of the rate of change of total momentum.
///
/// `rate` integrates the semidiscrete `du/dt`; `predicted` is assembled from the
/// non-conservative volume term, the boundary flux corrections and the source.
/// `scale` sums the magnitudes of all contributions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentumBalance {
    pub rate: f64,
    pub predicted: f64,
    pub scale: f64,
}

impl MomentumBalance {
    pub fn residual(&self) -> f64 {
        (self.rate - self.predicted).abs()
    }

    pub fn relative_residual(&self) -> f64 {
        self.residual() / self.scale.max(f64::MIN_POSITIVE)
    }
}

impl<E: Equation> Semidiscretization<E> {
    /// `Σ (M_k)_ii u_i` per variable.
    pub fn conserved_totals(&self, u: &[f64]) -> Result<Vec<f64>, SemidiscError> {
        self.check_len(u)?;
        let nv = E::NVARS;
        let mut totals = vec![0.0; nv];
        for g in 0..self.num_nodes() {
            let w = self.node_weight(g);
            for (t, v) in totals.iter_mut().zip(&u[g * nv..(g + 1) * nv]) {
                *t += w * v;
            }
        }
        Ok(totals)
    }

    /// `Σ (M_k)_ii S(u_i)`.
    pub fn total_entropy(&self, u: &[f64]) -> Result<f64, SemidiscError> {
        let states = self.states(u)?;
        self.check_admissible(&states)?;
        Ok(states
            .iter()
            .zip(&self.aux)
            .enumerate()
            .map(|(g, (s, aux))| self.node_weight(g) * self.equation.entropy(s, aux))
            .sum())
    }

    pub fn entropy_rate(&self, u: &[f64], du: &[f64]) -> Result<EntropyRate, SemidiscError> {
        let states = self.states(u)?;
        if du.len() != u.len() {
            return Err(SemidiscError::StateLength { expected: u.len(), got: du.len() });
        }
        self.check_admissible(&states)?;
        let nv = E::NVARS;
        let mut rate = 0.0;
        let mut scale = 0.0;
        for (g, (s, aux)) in states.iter().zip(&self.aux).enumerate() {
            let w = self.node_weight(g);
            let v = self.equation.entropy_variables(s, aux);
            let d = &du[g * nv..(g + 1) * nv];
            rate += w * dot(v.as_ref(), d);
            scale += w * v.as_ref().iter().zip(d).map(|(a, b)| (a * b).abs()).sum::<f64>();
        }
        Ok(EntropyRate { rate, scale })
    }

    /// `(Σ (M_k)_ii |du_i|²)^(1/2)`, used as a steady-state indicator.
    pub fn weighted_norm(&self, du: &[f64]) -> Result<f64, SemidiscError> {
        self.check_len(du)?;
        let nv = E::NVARS;
        Ok((0..self.num_nodes())
            .map(|g| {
                self.node_weight(g) * du[g * nv..(g + 1) * nv].iter().map(|d| d * d).sum::<f64>()
            })
            .sum::<f64>()
            .sqrt())
    }

    /// Discrete L2 error of the unscaled conservative variables `u / a` against `exact(x)`,
    /// summed over all variables.
    pub fn l2_error(
        &self,
        u: &[f64],
        exact: impl Fn(f64) -> E::State,
    ) -> Result<f64, SemidiscError> {
        Ok(self.l2_error_per_variable(u, exact)?.iter().map(|e| e * e).sum::<f64>().sqrt())
    }

    pub fn l2_error_per_variable(
        &self,
        u: &[f64],
        exact: impl Fn(f64) -> E::State,
    ) -> Result<Vec<f64>, SemidiscError> {
        self.check_len(u)?;
        let nv = E::NVARS;
        let mut sq = vec![0.0; nv];
        for g in 0..self.num_nodes() {
            let w = self.node_weight(g);
            let a = self.equation.width(&self.aux[g]);
            let ex = exact(self.x_sample[g]);
            for (var, s) in sq.iter_mut().enumerate() {
                let e = u[g * nv + var] / a - ex.as_ref()[var];
                *s += w * e * e;
            }
        }
        Ok(sq.into_iter().map(f64::sqrt).collect())
    }

    /// Largest `|u| + c` in each element.
    pub fn element_wavespeeds(&self, u: &[f64]) -> Result<Vec<f64>, SemidiscError> {
        let states = self.states(u)?;
        self.check_admissible(&states)?;
        let np = self.nodes_per_element();
        Ok(states
            .chunks(np)
            .zip(self.aux.chunks(np))
            .map(|(s, a)| {
                s.iter()
                    .zip(a)
                    .map(|(s, a)| self.equation.wavespeed(s, a))
                    .fold(0.0, f64::max)
            })
            .collect())
    }

    /// `cfl · min_k h_k / (N² λ_k)`; elements at rest are treated as unit speed.
    pub fn stable_dt(&self, u: &[f64], cfl: f64) -> Result<f64, SemidiscError> {
        let speeds = self.element_wavespeeds(u)?;
        let n = self.op.degree().max(1) as f64;
        Ok(speeds
            .iter()
            .enumerate()
            .map(|(k, &lam)| {
                let lam = if lam > 0.0 { lam } else { 1.0 };
                cfl * self.mesh.element_size(k) / (n * n * lam)
            })
            .fold(f64::INFINITY, f64::min))
    }

    /// Rate of change of total momentum computed two ways; see [`MomentumBalance`].
    pub fn momentum_balance(&self, u: &[f64], t: f64) -> Result<MomentumBalance, SemidiscError> {
        let du = self.rhs_vec(t, u)?;
        self.momentum_balance_with(u, &du, t)
    }

    pub fn momentum_balance_with(
        &self,
        u: &[f64],
        du: &[f64],
        t: f64,
    ) -> Result<MomentumBalance, SemidiscError> {
        let states = self.states(u)?;
        self.check_admissible(&states)?;
        let faces = self.face_fluxes(&states, t)?;
        let nv = E::NVARS;
        let m = E::MOMENTUM;
        let np = self.nodes_per_element();
        let eq = &self.equation;

        let rate: f64 = (0..self.num_nodes()).map(|g| self.node_weight(g) * du[g * nv + m]).sum();
        let mut scale: f64 = (0..self.num_nodes()).map(|g| (self.node_weight(g) * du[g * nv + m]).abs()).sum();

        let mut predicted = 0.0;
        let mut phi = vec![0.0; np];
        let mut coef = vec![0.0; np];
        for (k, face) in faces.iter().enumerate() {
            let jac = 0.5 * self.mesh.element_size(k);
            let base = k * np;
            for i in 0..np {
                let (c, p) = eq.nonconservative_split(&states[base + i], &self.aux[base + i]);
                coef[i] = c;
                phi[i] = p;
            }
            let mut volume = 0.0;
            for i in 0..np {
                let q_phi: f64 = (0..np).map(|j| self.op.q(i, j) * phi[j]).sum();
                volume += coef[i] * q_phi;
                scale += (coef[i] * q_phi).abs();
            }
            let (g0, gn) = (base, base + np - 1);
            let ns0 = eq.nonsym_flux(&states[g0], &self.aux[g0], &states[g0], &self.aux[g0]);
            let nsn = eq.nonsym_flux(&states[gn], &self.aux[gn], &states[gn], &self.aux[gn]);
            let boundary = (face[1].as_ref()[m] - nsn.as_ref()[m]) - (face[0].as_ref()[m] - ns0.as_ref()[m]);
            predicted -= volume + boundary;
            scale += face[1].as_ref()[m].abs() + nsn.as_ref()[m].abs() + face[0].as_ref()[m].abs() + ns0.as_ref()[m].abs();
            if let Some(src) = &self.source {
                for i in 0..np {
                    let g = base + i;
                    let s = src(self.x_sample[g], t, &self.aux[g]);
                    let contribution = jac * self.op.mass()[i] * s.as_ref()[m];
                    predicted += contribution;
                    scale += contribution.abs();
                }
            }
        }
        Ok(MomentumBalance { rate, predicted, scale })
    }
}
