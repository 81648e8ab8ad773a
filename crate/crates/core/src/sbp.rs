//! Diagonal-norm summation-by-parts operators on the reference element `[-1, 1]`,
//! built from Legendre-Gauss-Lobatto collocation.

use thiserror::Error;

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 15;

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SbpError {
    #[error("polynomial degree {0} outside supported range 1..={MAX_DEGREE}")]
    DegreeOutOfRange(usize),
    #[error("Lobatto node iteration for degree {degree} did not converge (last update {last_update:e})")]
    NoConvergence { degree: usize, last_update: f64 },
}

/// Legendre polynomials `P_n(x)` and `P_{n-1}(x)` by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p_next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = p_next;
    }
    (p, p_prev)
}

/// Nodes and weights of the `(N+1)`-point Lobatto rule.
///
/// Interior nodes are the roots of `P'_N`, found by Newton iteration on
/// `(1 - x^2) P'_N(x)` starting from Chebyshev-Gauss-Lobatto points.
pub fn lobatto_nodes_weights(degree: usize) -> Result<(Vec<f64>, Vec<f64>), SbpError> {
    if !(1..=MAX_DEGREE).contains(&degree) {
        return Err(SbpError::DegreeOutOfRange(degree));
    }
    let n = degree;
    let nf = n as f64;
    let mut nodes = vec![0.0; n + 1];
    nodes[0] = -1.0;
    nodes[n] = 1.0;
    for (i, node) in nodes.iter_mut().enumerate().take(n).skip(1) {
        let mut x = -(std::f64::consts::PI * i as f64 / nf).cos();
        let mut converged = false;
        let mut last_update = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, p_prev) = legendre_pair(n, x);
            // Newton step for (1 - x^2) P'_N = N (P_{N-1} - x P_N), whose derivative is -N (N+1) P_N.
            let update = (x * p - p_prev) / ((nf + 1.0) * p);
            x -= update;
            last_update = update.abs();
            if last_update <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(SbpError::NoConvergence { degree, last_update });
        }
        *node = x;
    }
    // Enforce exact antisymmetry of the node set about 0.
    for i in 0..(n + 1) / 2 {
        let j = n - i;
        let half = 0.5 * (nodes[j] - nodes[i]);
        nodes[i] = -half;
        nodes[j] = half;
    }
    if n % 2 == 0 {
        nodes[n / 2] = 0.0;
    }
    let weights = nodes
        .iter()
        .map(|&x| {
            let (p, _) = legendre_pair(n, x);
            2.0 / (nf * (nf + 1.0) * p * p)
        })
        .collect();
    Ok((nodes, weights))
}

/// Nodal differentiation matrix for the Lagrange basis on `nodes` (row-major).
///
/// Off-diagonal entries use barycentric weights; diagonals are the negative
/// row sums so constants are annihilated.
fn lagrange_differentiation(nodes: &[f64]) -> Vec<f64> {
    let np = nodes.len();
    let bary: Vec<f64> = (0..np)
        .map(|j| {
            let prod: f64 = (0..np)
                .filter(|&k| k != j)
                .map(|k| nodes[j] - nodes[k])
                .product();
            1.0 / prod
        })
        .collect();
    let mut d = vec![0.0; np * np];
    for i in 0..np {
        let mut row_sum = 0.0;
        for j in 0..np {
            if i != j {
                let dij = (bary[j] / bary[i]) / (nodes[i] - nodes[j]);
                d[i * np + j] = dij;
                row_sum += dij;
            }
        }
        d[i * np + i] = -row_sum;
    }
    d
}

/// Diagonal-norm SBP operator for one reference element.
#[derive(Debug, Clone, PartialEq)]
pub struct SbpOperator {
    degree: usize,
    nodes: Vec<f64>,
    mass: Vec<f64>,
    /// Row-major `(N+1) x (N+1)`.
    q: Vec<f64>,
    /// Row-major `(N+1) x (N+1)`, `D = M^{-1} Q`.
    d: Vec<f64>,
}

impl SbpOperator {
    pub fn new(degree: usize) -> Result<Self, SbpError> {
        let (nodes, mass) = lobatto_nodes_weights(degree)?;
        let np = degree + 1;
        let d = lagrange_differentiation(&nodes);
        let mut q = vec![0.0; np * np];
        for i in 0..np {
            for j in 0..np {
                q[i * np + j] = mass[i] * d[i * np + j];
            }
        }
        Ok(Self {
            degree,
            nodes,
            mass,
            q,
            d,
        })
    }

    /// Assemble an operator from raw parts. Used to inspect how the identity
    /// checks react to perturbed matrices.
    pub fn from_parts(nodes: Vec<f64>, mass: Vec<f64>, q: Vec<f64>) -> Self {
        let np = nodes.len();
        assert!(np >= 2, "an SBP operator needs at least two nodes");
        assert_eq!(mass.len(), np);
        assert_eq!(q.len(), np * np);
        let d = (0..np * np).map(|k| q[k] / mass[k / np]).collect();
        Self {
            degree: np - 1,
            nodes,
            mass,
            q,
            d,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_nodes(&self) -> usize {
        self.degree + 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Diagonal of the reference mass matrix (the Lobatto weights).
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    #[inline]
    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.num_nodes() + j]
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.num_nodes() + j]
    }

    /// Diagonal of the boundary matrix `B = diag(-1, 0, ..., 0, 1)`.
    pub fn b(&self, i: usize) -> f64 {
        if i == 0 {
            -1.0
        } else if i == self.degree {
            1.0
        } else {
            0.0
        }
    }

    pub fn q_matrix(&self) -> &[f64] {
        &self.q
    }

    pub fn d_matrix(&self) -> &[f64] {
        &self.d
    }

    /// Apply `D` to nodal values.
    pub fn differentiate(&self, values: &[f64]) -> Vec<f64> {
        let np = self.num_nodes();
        assert_eq!(values.len(), np);
        (0..np)
            .map(|i| (0..np).map(|j| self.d(i, j) * values[j]).sum())
            .collect()
    }

    /// Evaluate the Lagrange interpolant of `values` (given on the nodes) at reference point `xi`.
    pub fn interpolate(&self, values: &[f64], xi: f64) -> f64 {
        let np = self.num_nodes();
        assert_eq!(values.len(), np);
        if let Some(k) = self.nodes.iter().position(|&x| x == xi) {
            return values[k];
        }
        let mut acc = 0.0;
        for j in 0..np {
            let mut lj = 1.0;
            for m in 0..np {
                if m != j {
                    lj *= (xi - self.nodes[m]) / (self.nodes[j] - self.nodes[m]);
                }
            }
            acc += lj * values[j];
        }
        acc
    }

    pub fn verify(&self) -> SbpResiduals {
        verify_sbp_identities(self)
    }
}

/// Maximum residuals of the defining SBP identities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SbpResiduals {
    /// `max |Q + Q^T - B|`
    pub skew: f64,
    /// `max |Q 1|`
    pub row_sum: f64,
    /// Max relative error of `D x^k` against `k x^{k-1}` for `k = 0..=N`.
    pub polynomial: f64,
    /// Max error of `sum_i M_ii x_i^k` against the exact integral for `k <= 2N - 1`.
    pub quadrature: f64,
}

impl SbpResiduals {
    pub fn max(&self) -> f64 {
        self.skew
            .max(self.row_sum)
            .max(self.polynomial)
            .max(self.quadrature)
    }

    pub fn all_below(&self, tol: f64) -> bool {
        self.max() <= tol
    }
}

pub fn verify_sbp_identities(op: &SbpOperator) -> SbpResiduals {
    let np = op.num_nodes();
    let n = op.degree();
    let mut skew: f64 = 0.0;
    let mut row_sum: f64 = 0.0;
    for i in 0..np {
        let mut s = 0.0;
        for j in 0..np {
            let b = if i == j { op.b(i) } else { 0.0 };
            skew = skew.max((op.q(i, j) + op.q(j, i) - b).abs());
            s += op.q(i, j);
        }
        row_sum = row_sum.max(s.abs());
    }

    let mut polynomial: f64 = 0.0;
    for k in 0..=n {
        let values: Vec<f64> = op.nodes().iter().map(|&x| x.powi(k as i32)).collect();
        let dv = op.differentiate(&values);
        for (i, &x) in op.nodes().iter().enumerate() {
            let exact = if k == 0 {
                0.0
            } else {
                k as f64 * x.powi(k as i32 - 1)
            };
            let scale = (k as f64).max(1.0);
            polynomial = polynomial.max((dv[i] - exact).abs() / scale);
        }
    }

    let mut quadrature: f64 = 0.0;
    for k in 0..2 * n {
        let approx: f64 = op
            .nodes()
            .iter()
            .zip(op.mass())
            .map(|(&x, &w)| w * x.powi(k as i32))
            .sum();
        let exact = if k % 2 == 0 {
            2.0 / (k as f64 + 1.0)
        } else {
            0.0
        };
        quadrature = quadrature.max((approx - exact).abs());
    }

    SbpResiduals {
        skew,
        row_sum,
        polynomial,
        quadrature,
    }
}
