//! Dense d-dimensional discrete paths, stored flat with stride `dim`.

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    dim: usize,
    data: Vec<f64>,
}

impl Trajectory {
    pub fn zeros(len: usize, dim: usize) -> Self {
        assert!(dim >= 1 && len >= 1);
        Trajectory {
            dim,
            data: vec![0.0; len * dim],
        }
    }

    pub fn from_fn(len: usize, dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut t = Trajectory::zeros(len, dim);
        for j in 0..len {
            for c in 0..dim {
                t.data[j * dim + c] = f(j, c);
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of grid points.
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn point(&self, j: usize) -> &[f64] {
        &self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn point_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.dim..(j + 1) * self.dim]
    }

    pub fn coord(&self, j: usize, c: usize) -> f64 {
        self.data[j * self.dim + c]
    }

    /// First coordinate as a scalar series; handy for d = 1 paths.
    pub fn scalar(&self, j: usize) -> f64 {
        debug_assert_eq!(self.dim, 1);
        self.data[j]
    }

    pub fn euclidean_norm_at(&self, j: usize) -> f64 {
        self.point(j).iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }
}
