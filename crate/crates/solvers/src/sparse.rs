/// Coordinate-format sparse matrix. Duplicate entries are summed when
/// densified.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Triplets {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<(usize, usize, f64)>,
}

impl Triplets {
    pub fn new(rows: usize, cols: usize) -> Self {
        Triplets {
            rows,
            cols,
            entries: Vec::new(),
        }
    }

    /// Appends an entry; exact zeros are dropped so `nnz` counts structure.
    pub fn push(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.rows && col < self.cols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    /// Appends a new row and returns its index.
    pub fn push_row(&mut self, coeffs: &[(usize, f64)]) -> usize {
        let r = self.rows;
        self.rows += 1;
        for &(c, v) in coeffs {
            assert!(c < self.cols, "column {c} out of range {}", self.cols);
            self.push(r, c, v);
        }
        r
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.rows * self.cols];
        for &(r, c, v) in &self.entries {
            d[r * self.cols + c] += v;
        }
        d
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        for &(r, c, v) in &self.entries {
            y[r] += v * x[c];
        }
        y
    }

    /// `y = Aᵀ x`
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.cols];
        for &(r, c, v) in &self.entries {
            y[c] += v * x[r];
        }
        y
    }

    pub fn is_finite(&self) -> bool {
        self.entries.iter().all(|e| e.2.is_finite())
    }
}
