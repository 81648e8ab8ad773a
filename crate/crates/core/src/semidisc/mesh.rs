use super::SemidiscError;
use crate::sbp::SbpOperator;

/// A 1D mesh of `K` interval elements given by `K + 1` strictly increasing vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    vertices: Vec<f64>,
}

impl Mesh1D {
    pub fn uniform(x_left: f64, x_right: f64, elements: usize) -> Result<Self, SemidiscError> {
        if elements == 0 {
            return Err(SemidiscError::InvalidMesh("mesh needs at least one element".into()));
        }
        let len = x_right - x_left;
        let vertices = (0..=elements)
            .map(|k| {
                if k == elements {
                    x_right
                } else {
                    x_left + len * (k as f64) / (elements as f64)
                }
            })
            .collect();
        Self::from_vertices(vertices)
    }

    /// Uniform vertices pushed through `map` (e.g. `x - 0.3 sin(πx)`).
    pub fn mapped(
        x_left: f64,
        x_right: f64,
        elements: usize,
        map: impl Fn(f64) -> f64,
    ) -> Result<Self, SemidiscError> {
        let uniform = Self::uniform(x_left, x_right, elements)?;
        Self::from_vertices(uniform.vertices.iter().map(|&x| map(x)).collect())
    }

    pub fn from_vertices(vertices: Vec<f64>) -> Result<Self, SemidiscError> {
        if vertices.len() < 2 {
            return Err(SemidiscError::InvalidMesh("need at least two vertices".into()));
        }
        if vertices.iter().any(|v| !v.is_finite()) {
            return Err(SemidiscError::InvalidMesh("non-finite vertex".into()));
        }
        if let Some(k) = vertices.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(SemidiscError::InvalidMesh(format!(
                "vertices not strictly increasing at index {k}"
            )));
        }
        Ok(Self { vertices })
    }

    pub fn num_elements(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[f64] {
        &self.vertices
    }

    pub fn element_size(&self, k: usize) -> f64 {
        self.vertices[k + 1] - self.vertices[k]
    }

    pub fn element_bounds(&self, k: usize) -> (f64, f64) {
        (self.vertices[k], self.vertices[k + 1])
    }

    pub fn min_element_size(&self) -> f64 {
        (0..self.num_elements())
            .map(|k| self.element_size(k))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.vertices[0], *self.vertices.last().unwrap())
    }

    pub fn length(&self) -> f64 {
        let (a, b) = self.domain();
        b - a
    }

    /// Physical coordinates of every node, element-major. Endpoint nodes are the vertices themselves.
    pub fn node_coordinates(&self, op: &SbpOperator) -> Vec<f64> {
        let np = op.num_nodes();
        let mut x = Vec::with_capacity(self.num_elements() * np);
        for k in 0..self.num_elements() {
            let (xl, xr) = self.element_bounds(k);
            for (i, &xi) in op.nodes().iter().enumerate() {
                x.push(if i == 0 {
                    xl
                } else if i == np - 1 {
                    xr
                } else {
                    xl + 0.5 * (xi + 1.0) * (xr - xl)
                });
            }
        }
        x
    }

    /// Coordinates at which to sample fields: endpoint nodes are moved one ulp into
    /// their element so that piecewise fields are read as one-sided limits.
    pub fn sampling_coordinates(&self, op: &SbpOperator) -> Vec<f64> {
        let np = op.num_nodes();
        let mut x = self.node_coordinates(op);
        for k in 0..self.num_elements() {
            x[k * np] = x[k * np].next_up();
            x[k * np + np - 1] = x[k * np + np - 1].next_down();
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_mesh_sizes_sum_to_length() {
        let m = Mesh1D::uniform(-1.0, 1.0, 7).unwrap();
        let total: f64 = (0..7).map(|k| m.element_size(k)).sum();
        assert!((total - 2.0).abs() < 1e-15);
        assert_eq!(m.domain(), (-1.0, 1.0));
    }

    #[test]
    fn rejects_unsorted_vertices() {
        assert!(Mesh1D::from_vertices(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(Mesh1D::from_vertices(vec![0.0]).is_err());
        assert!(Mesh1D::uniform(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn mapped_mesh_stays_monotone() {
        let m = Mesh1D::mapped(-1.0, 1.0, 16, |x| x - 0.3 * (std::f64::consts::PI * x).sin()).unwrap();
        assert_eq!(m.num_elements(), 16);
        assert!((m.length() - 2.0).abs() < 1e-15);
        assert!(m.element_size(0) > m.element_size(8));
    }

    #[test]
    fn sampling_reads_one_sided_limits() {
        let op = SbpOperator::new(2).unwrap();
        let m = Mesh1D::uniform(0.0, 1.0, 2).unwrap();
        let step = |x: f64| if x > 0.5 { 1.0 } else { 0.0 };
        let vals: Vec<f64> = m.sampling_coordinates(&op).into_iter().map(step).collect();
        assert_eq!(vals, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
        let x = m.node_coordinates(&op);
        assert_eq!(x[2], 0.5);
        assert_eq!(x[3], 0.5);
    }
}
