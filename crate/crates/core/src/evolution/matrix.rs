use crate::scalar::Real;

/// Dense square matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<F> {
    dim: usize,
    data: Vec<F>,
}

impl<F: Real> Matrix<F> {
    pub fn zeros(dim: usize) -> Self {
        Matrix { dim, data: vec![F::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = F::one();
        }
        m
    }

    pub fn from_diagonal(diag: &[F]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &x) in diag.iter().enumerate() {
            m[(i, i)] = x;
        }
        m
    }

    /// Panics unless `rows` is square.
    pub fn from_rows(rows: &[Vec<F>]) -> Self {
        let dim = rows.len();
        assert!(rows.iter().all(|r| r.len() == dim), "matrix must be square");
        Matrix { dim, data: rows.iter().flatten().copied().collect() }
    }

    pub fn from_row_major(dim: usize, data: Vec<F>) -> Self {
        assert_eq!(data.len(), dim * dim);
        Matrix { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[F] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<F> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || self[(i, j)] == F::zero()))
    }

    pub fn matmul(&self, rhs: &Matrix<F>) -> Matrix<F> {
        let d = self.dim;
        assert_eq!(d, rhs.dim);
        let mut out = Self::zeros(d);
        for i in 0..d {
            for k in 0..d {
                let a = self[(i, k)];
                if a == F::zero() {
                    continue;
                }
                for j in 0..d {
                    out.data[i * d + j] += a * rhs.data[k * d + j];
                }
            }
        }
        out
    }

    pub fn scale(&self, s: F) -> Matrix<F> {
        Matrix { dim: self.dim, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn add(&self, rhs: &Matrix<F>) -> Matrix<F> {
        Matrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + b).collect() }
    }

    /// `self + s * rhs`.
    pub fn axpy(&self, s: F, rhs: &Matrix<F>) -> Matrix<F> {
        Matrix { dim: self.dim, data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| a + s * b).collect() }
    }

    pub fn transpose(&self) -> Matrix<F> {
        let d = self.dim;
        let mut out = Self::zeros(d);
        for i in 0..d {
            for j in 0..d {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    pub fn frobenius(&self) -> F {
        let m = self.data.iter().fold(F::zero(), |m, x| m.max(x.abs()));
        if m == F::zero() || !m.is_finite() {
            return m;
        }
        m * self.data.iter().map(|&x| (x / m) * (x / m)).sum::<F>().sqrt()
    }

    pub fn max_abs_diff(&self, rhs: &Matrix<F>) -> F {
        self.data.iter().zip(&rhs.data).fold(F::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    /// Gauss-Jordan inverse with partial pivoting, together with `|det|`.
    /// Returns `None` when a pivot vanishes.
    pub fn inverse_with_det(&self) -> Option<(Matrix<F>, F)> {
        let d = self.dim;
        let mut a = self.clone();
        let mut inv = Self::identity(d);
        let mut det = F::one();
        for col in 0..d {
            let pivot = (col..d).max_by(|&r, &s| {
                a[(r, col)].abs().partial_cmp(&a[(s, col)].abs()).unwrap_or(std::cmp::Ordering::Equal)
            })?;
            let p = a[(pivot, col)];
            if p == F::zero() || !p.is_finite() {
                return None;
            }
            if pivot != col {
                for j in 0..d {
                    a.data.swap(pivot * d + j, col * d + j);
                    inv.data.swap(pivot * d + j, col * d + j);
                }
            }
            det *= p.abs();
            for j in 0..d {
                a.data[col * d + j] /= p;
                inv.data[col * d + j] /= p;
            }
            for r in 0..d {
                if r == col {
                    continue;
                }
                let f = a[(r, col)];
                if f == F::zero() {
                    continue;
                }
                for j in 0..d {
                    let (ac, ic) = (a.data[col * d + j], inv.data[col * d + j]);
                    a.data[r * d + j] -= f * ac;
                    inv.data[r * d + j] -= f * ic;
                }
            }
        }
        Some((inv, det))
    }

    /// Singular values by one-sided Jacobi rotations, in decreasing order.
    pub fn singular_values(&self) -> Vec<F> {
        let d = self.dim;
        // columns of u are rotated until mutually orthogonal
        let mut u = self.transpose();
        let tol = F::rel_tol(1e-12);
        for _sweep in 0..80 {
            let mut rotated = false;
            for i in 0..d {
                for j in i + 1..d {
                    let (mut alpha, mut beta, mut gamma) = (F::zero(), F::zero(), F::zero());
                    for k in 0..d {
                        let (x, y) = (u.data[i * d + k], u.data[j * d + k]);
                        alpha += x * x;
                        beta += y * y;
                        gamma += x * y;
                    }
                    if gamma == F::zero() || gamma.abs() <= tol * (alpha * beta).sqrt() {
                        continue;
                    }
                    rotated = true;
                    let zeta = (beta - alpha) / (F::of(2.0) * gamma);
                    let sign = if zeta >= F::zero() { F::one() } else { -F::one() };
                    let t = sign / (zeta.abs() + (F::one() + zeta * zeta).sqrt());
                    let c = F::one() / (F::one() + t * t).sqrt();
                    let s = c * t;
                    for k in 0..d {
                        let (x, y) = (u.data[i * d + k], u.data[j * d + k]);
                        u.data[i * d + k] = c * x - s * y;
                        u.data[j * d + k] = s * x + c * y;
                    }
                }
            }
            if !rotated {
                break;
            }
        }
        let mut sv: Vec<F> =
            (0..d).map(|i| u.data[i * d..(i + 1) * d].iter().map(|&x| x * x).sum::<F>().sqrt()).collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        sv
    }
}

impl<F> std::ops::Index<(usize, usize)> for Matrix<F> {
    type Output = F;
    fn index(&self, (i, j): (usize, usize)) -> &F {
        &self.data[i * self.dim + j]
    }
}

impl<F> std::ops::IndexMut<(usize, usize)> for Matrix<F> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut F {
        &mut self.data[i * self.dim + j]
    }
}

/// A matrix stored as `exp(log_norm) * unit`.
#[derive(Clone, Debug, PartialEq)]
pub struct ScaledMatrix<F> {
    pub unit: Matrix<F>,
    pub log_norm: F,
}

impl<F: Real> ScaledMatrix<F> {
    pub fn identity(dim: usize) -> Self {
        ScaledMatrix { unit: Matrix::identity(dim), log_norm: F::zero() }
    }

    /// Pulls the Frobenius norm of `m` into the logarithm.
    pub fn from_matrix(m: Matrix<F>, log_scale: F) -> Self {
        let n = m.frobenius();
        if n == F::zero() {
            return ScaledMatrix { unit: m, log_norm: F::neg_infinity() };
        }
        ScaledMatrix { unit: m.scale(n.recip()), log_norm: log_scale + n.ln() }
    }

    /// Diagonal value with entries `sign_i * exp(log_abs_i)`.
    pub fn from_signed_logs(signs: &[i8], log_abs: &[F]) -> Self {
        let m = log_abs.iter().fold(F::neg_infinity(), |m, &x| m.max(x));
        let diag: Vec<F> =
            signs.iter().zip(log_abs).map(|(&s, &l)| F::of(s as f64) * (l - m).exp()).collect();
        ScaledMatrix { unit: Matrix::from_diagonal(&diag), log_norm: m }
    }

    pub fn dim(&self) -> usize {
        self.unit.dim()
    }

    pub fn matmul(&self, rhs: &ScaledMatrix<F>) -> ScaledMatrix<F> {
        Self::from_matrix(self.unit.matmul(&rhs.unit), self.log_norm + rhs.log_norm)
    }

    /// Rescales so that the unit part has operator norm exactly one.
    pub fn normalized(self) -> Self {
        let smax = self.unit.singular_values()[0];
        if smax == F::zero() || !smax.is_finite() {
            return self;
        }
        ScaledMatrix { unit: self.unit.scale(smax.recip()), log_norm: self.log_norm + smax.ln() }
    }

    pub fn shift_log(mut self, by: F) -> Self {
        self.log_norm += by;
        self
    }

    /// The plain value; overflows for large `log_norm`.
    pub fn value(&self) -> Matrix<F> {
        self.unit.scale(self.log_norm.exp())
    }

    /// `‖A - B‖_F / max(‖A‖_F, ‖B‖_F)`, computed without leaving log scale.
    pub fn relative_distance(&self, other: &ScaledMatrix<F>) -> F {
        let m = self.log_norm.max(other.log_norm);
        let a = self.unit.scale((self.log_norm - m).exp());
        let b = other.unit.scale((other.log_norm - m).exp());
        let denom = a.frobenius().max(b.frobenius());
        if denom == F::zero() {
            return F::zero();
        }
        a.axpy(-F::one(), &b).frobenius() / denom
    }
}

/// `(log σ_max, log σ_min)` of the represented matrix; `σ_min = 0` maps to
/// negative infinity.
pub fn operator_norm_bounds<F: Real>(m: &ScaledMatrix<F>) -> (F, F) {
    if m.dim() == 1 {
        let l = m.log_norm + m.unit.as_slice()[0].abs().ln();
        return (l, l);
    }
    let sv = m.unit.singular_values();
    let smax = sv[0];
    let smin = sv[sv.len() - 1];
    let lo = if smin <= F::zero() { F::neg_infinity() } else { m.log_norm + smin.ln() };
    (m.log_norm + smax.ln(), lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn singular_values_of_diagonal_and_rotation() {
        let d = Matrix::from_diagonal(&[3.0_f64, -0.5, 2.0]);
        assert_eq!(d.singular_values(), vec![3.0, 2.0, 0.5]);
        let (c, s) = (0.3_f64.cos(), 0.3_f64.sin());
        let r = Matrix::from_rows(&[vec![c, -s], vec![s, c]]);
        let m = r.matmul(&Matrix::from_diagonal(&[5.0, 0.25])).matmul(&r.transpose());
        let sv = m.singular_values();
        assert!((sv[0] - 5.0).abs() < 1e-13 && (sv[1] - 0.25).abs() < 1e-13);
    }

    #[test]
    fn rank_deficient_matrix_has_zero_singular_value() {
        let m = Matrix::from_rows(&[vec![1.0_f64, 2.0], vec![2.0, 4.0]]);
        let sv = m.singular_values();
        assert!(sv[1].abs() < 1e-14);
        assert!(m.inverse_with_det().map_or(true, |(_, det)| det < 1e-14));
    }

    #[test]
    fn norm_bounds_examples() {
        assert_eq!(operator_norm_bounds(&ScaledMatrix::<f64>::identity(3)), (0.0, 0.0));
        let m = ScaledMatrix::from_signed_logs(&[1, 1], &[3.0_f64, -1.0]);
        let (hi, lo) = operator_norm_bounds(&m);
        assert!((hi - 3.0).abs() < 1e-14 && (lo + 1.0).abs() < 1e-14);
        let s = ScaledMatrix { unit: Matrix::from_diagonal(&[-1.0_f64]), log_norm: 8.0 };
        assert_eq!(operator_norm_bounds(&s), (8.0, 8.0));
        let z = ScaledMatrix::from_matrix(Matrix::from_rows(&[vec![1.0_f64, 1.0], vec![1.0, 1.0]]), 0.0);
        assert_eq!(operator_norm_bounds(&z).1, f64::NEG_INFINITY);
    }

    #[test]
    fn inverse_recovers_identity() {
        let m = Matrix::from_rows(&[vec![0.0_f64, 2.0, 1.0], vec![1.0, -1.0, 0.5], vec![3.0, 0.0, 1.0]]);
        let (inv, det) = m.inverse_with_det().unwrap();
        assert!(m.matmul(&inv).max_abs_diff(&Matrix::identity(3)) < 1e-14);
        assert!((det - 4.0).abs() < 1e-14);
    }

    #[test]
    fn normalized_unit_has_operator_norm_one() {
        let m = ScaledMatrix::from_matrix(Matrix::from_rows(&[vec![4.0_f64, 1.0], vec![0.0, 2.0]]), 10.0).normalized();
        assert!((m.unit.singular_values()[0] - 1.0).abs() < 1e-14);
        let back = ScaledMatrix::from_matrix(Matrix::from_rows(&[vec![4.0_f64, 1.0], vec![0.0, 2.0]]), 10.0);
        assert!(m.relative_distance(&back) < 1e-15);
    }
}
