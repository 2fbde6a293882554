//! Small dense real-matrix toolkit.
//!
//! Only what the harmonic observer needs: a row-major [`Matrix`], the matrix
//! exponential, characteristic polynomials and single-output pole placement.
//! There is deliberately no eigensolver; placement is verified by comparing
//! characteristic-polynomial coefficients.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense real matrix stored row-major. Entries are finite.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        if let Some(bad) = data.iter().find(|v| !v.is_finite()) {
            return Err(Error::Input(format!("non-finite matrix entry {bad}")));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Self::new(rows.len(), cols, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn column(v: &[f64]) -> Self {
        Self { rows: v.len(), cols: 1, data: v.to_vec() }
    }

    pub fn row(v: &[f64]) -> Self {
        Self { rows: 1, cols: v.len(), data: v.to_vec() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row_slice(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Rows as nested vectors, convenient for serialization.
    pub fn to_nested(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row_slice(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn mul(&self, rhs: &Matrix) -> Result<Matrix> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.data[k * rhs.cols + j];
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[f64]) -> Result<Vec<f64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by vector of length {}",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows).map(|i| self.row_slice(i).iter().zip(v).map(|(a, b)| a * b).sum()).collect())
    }

    pub fn add(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Matrix) -> Result<Matrix> {
        self.zip_with(rhs, |a, b| a - b)
    }

    pub fn scale(&self, k: f64) -> Matrix {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| v * k).collect() }
    }

    fn zip_with(&self, rhs: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension(format!("shape {}x{} vs {}x{}", self.rows, self.cols, rhs.rows, rhs.cols)));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn trace(&self) -> f64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Induced 1-norm (maximum absolute column sum).
    pub fn norm1(&self) -> f64 {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &Matrix) -> f64 {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data.iter().zip(&rhs.data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }

    fn require_square(&self, what: &str) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::Dimension(format!("{what} needs a square matrix, got {}x{}", self.rows, self.cols)))
        }
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for v in self.row_slice(i) {
                write!(f, "{v:>12.6} ")?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Monic polynomial, coefficients in descending order: `coeffs[0]` multiplies
/// `z^n` and is exactly 1, `coeffs[n]` is the constant term.
#[derive(Clone, Debug, PartialEq)]
pub struct PolyCoeffs(Vec<f64>);

impl PolyCoeffs {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        match coeffs.first() {
            Some(1.0) => Ok(Self(coeffs)),
            Some(&lead) => Err(Error::Input(format!("leading coefficient {lead} is not 1"))),
            None => Err(Error::Input("empty polynomial".into())),
        }
    }

    /// Real monic polynomial with the given roots. The roots must be closed
    /// under complex conjugation.
    pub fn from_roots(roots: &[Complex64]) -> Result<Self> {
        check_conjugate_closed(roots)?;
        let mut c = vec![Complex64::new(1.0, 0.0)];
        for &r in roots {
            let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
            for (k, &ck) in c.iter().enumerate() {
                next[k] += ck;
                next[k + 1] -= ck * r;
            }
            c = next;
        }
        Ok(Self(c.into_iter().map(|v| v.re).collect()))
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// phi(A) by Horner's scheme.
    pub fn eval_matrix(&self, a: &Matrix) -> Result<Matrix> {
        let n = a.require_square("polynomial evaluation")?;
        let mut acc = Matrix::zeros(n, n);
        for &c in &self.0 {
            acc = acc.mul(a)?;
            for i in 0..n {
                acc[(i, i)] += c;
            }
        }
        Ok(acc)
    }
}

fn check_conjugate_closed(roots: &[Complex64]) -> Result<()> {
    let mut used = vec![false; roots.len()];
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let r = roots[i];
        let tol = 1e-9 * (1.0 + r.norm());
        if r.im.abs() <= tol {
            continue;
        }
        let partner = (0..roots.len()).find(|&j| !used[j] && (roots[j] - r.conj()).norm() <= tol);
        match partner {
            Some(j) => used[j] = true,
            None => return Err(Error::Input(format!("target {r} has no conjugate partner"))),
        }
    }
    Ok(())
}

/// e^{A t} by scaling and squaring with a truncated Taylor series.
pub fn mat_exp(a: &Matrix, t: f64) -> Result<Matrix> {
    let n = a.require_square("mat_exp")?;
    if !t.is_finite() {
        return Err(Error::Input(format!("non-finite time {t}")));
    }
    let at = a.scale(t);
    let norm = at.norm1();
    // squarings so that the scaled norm is at most 1/2
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = at.scale(0.5f64.powi(squarings));

    let mut sum = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=40 {
        term = term.mul(&b)?.scale(1.0 / k as f64);
        sum = sum.add(&term)?;
        if term.norm1() < 1e-16 {
            break;
        }
    }
    for _ in 0..squarings {
        sum = sum.mul(&sum)?;
    }
    Ok(sum)
}

/// det(zI - A) by the Faddeev-LeVerrier recurrence.
pub fn char_poly(a: &Matrix) -> Result<PolyCoeffs> {
    let n = a.require_square("char_poly")?;
    if n > 16 {
        return Err(Error::Input(format!("char_poly limited to n <= 16, got {n}")));
    }
    let mut coeffs = vec![1.0];
    let mut m = Matrix::zeros(n, n);
    let mut c_prev = 1.0;
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        m = a.mul(&m)?;
        for i in 0..n {
            m[(i, i)] += c_prev;
        }
        let c = -a.mul(&m)?.trace() / k as f64;
        coeffs.push(c);
        c_prev = c;
    }
    PolyCoeffs::new(coeffs)
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    let n = a.require_square("solve")?;
    if b.len() != n {
        return Err(Error::Dimension(format!("rhs length {} for {n}x{n} system", b.len())));
    }
    let mut m = a.clone();
    let mut x = b.to_vec();
    let scale = m.norm1().max(f64::MIN_POSITIVE);
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[(i, col)].abs().total_cmp(&m[(j, col)].abs())).unwrap_or(col);
        if m[(pivot, col)].abs() <= 1e-13 * scale {
            return Err(Error::Rank(format!("singular system at column {col}")));
        }
        if pivot != col {
            for j in 0..n {
                m.data.swap(col * n + j, pivot * n + j);
            }
            x.swap(col, pivot);
        }
        for i in col + 1..n {
            let f = m[(i, col)] / m[(col, col)];
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                m[(i, j)] -= f * m[(col, j)];
            }
            x[i] -= f * x[col];
        }
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| m[(i, j)] * x[j]).sum();
        x[i] = (x[i] - s) / m[(i, i)];
    }
    Ok(x)
}

/// Numerical rank by Gaussian elimination with full pivoting.
pub fn rank(a: &Matrix, rel_tol: f64) -> usize {
    let mut m = a.clone();
    let (rows, cols) = (m.rows, m.cols);
    let scale = m.data.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if scale == 0.0 {
        return 0;
    }
    let mut r = 0;
    let mut free_cols: Vec<usize> = (0..cols).collect();
    while r < rows && !free_cols.is_empty() {
        let mut best = (r, 0usize, 0.0f64);
        for i in r..rows {
            for (ci, &j) in free_cols.iter().enumerate() {
                if m[(i, j)].abs() > best.2 {
                    best = (i, ci, m[(i, j)].abs());
                }
            }
        }
        if best.2 <= rel_tol * scale {
            break;
        }
        let (pi, ci, _) = best;
        let pc = free_cols.remove(ci);
        for j in 0..cols {
            m.data.swap(r * cols + j, pi * cols + j);
        }
        for i in r + 1..rows {
            let f = m[(i, pc)] / m[(r, pc)];
            for j in 0..cols {
                m[(i, j)] -= f * m[(r, j)];
            }
        }
        r += 1;
    }
    r
}

/// Observability matrix [G; G A; ...; G A^{n-1}] for a single-output pair.
pub fn observability_matrix(a: &Matrix, g: &Matrix) -> Result<Matrix> {
    let n = a.require_square("observability")?;
    if g.rows() != 1 || g.cols() != n {
        return Err(Error::Dimension(format!("output map must be 1x{n}, got {}x{}", g.rows(), g.cols())));
    }
    let mut rows = Vec::with_capacity(n * n);
    let mut r = g.clone();
    for _ in 0..n {
        rows.extend_from_slice(r.as_slice());
        r = r.mul(a)?;
    }
    Matrix::new(n, n, rows)
}

/// Output-injection gain `L` (n x 1) such that `A - L G` has the target
/// eigenvalues.
///
/// Dual of single-input Ackermann placement, `L = phi(A) O^{-1} e_n`. The
/// formula is applied to the shifted and scaled pair `((A - cI)/s, G)` with
/// `c = tr(A)/n`, which keeps the observability matrix well conditioned when
/// the open-loop eigenvalues are clustered (as they are for a fast sampled
/// harmonic model); the gain maps back as `L = s L'`.
pub fn pole_place_observer(a: &Matrix, g: &Matrix, targets: &[Complex64]) -> Result<Matrix> {
    let n = a.require_square("pole placement")?;
    if targets.len() != n {
        return Err(Error::Input(format!("{} targets for order {n}", targets.len())));
    }
    check_conjugate_closed(targets)?;

    let c = a.trace() / n as f64;
    let mut shifted = a.clone();
    for i in 0..n {
        shifted[(i, i)] -= c;
    }
    let s = shifted.norm1();
    if s == 0.0 && n > 1 {
        return Err(Error::Rank("scalar multiple of identity is not observable".into()));
    }
    let s = if s == 0.0 { 1.0 } else { s };
    let a_s = shifted.scale(1.0 / s);
    let mapped: Vec<Complex64> = targets.iter().map(|&mu| (mu - c) / s).collect();

    let obs = observability_matrix(&a_s, g)?;
    let r = rank(&obs, 1e-11);
    if r < n {
        return Err(Error::Rank(format!("observability rank {r} < {n}")));
    }
    let mut e_n = vec![0.0; n];
    e_n[n - 1] = 1.0;
    let w = solve(&obs, &e_n)?;
    let phi = PolyCoeffs::from_roots(&mapped)?.eval_matrix(&a_s)?;
    let l = phi.mul_vec(&w)?;
    Ok(Matrix::column(&l).scale(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn rotation(theta: f64) -> Matrix {
        Matrix::from_rows(&[&[theta.cos(), -theta.sin()], &[theta.sin(), theta.cos()]]).unwrap()
    }

    #[test]
    fn construction_rejects_bad_shapes_and_nan() {
        assert!(matches!(Matrix::new(2, 2, vec![1.0; 3]), Err(Error::Dimension(_))));
        assert!(matches!(Matrix::new(1, 1, vec![f64::NAN]), Err(Error::Input(_))));
        assert!(matches!(Matrix::new(1, 1, vec![f64::INFINITY]), Err(Error::Input(_))));
    }

    #[test]
    fn exp_of_zero_time_is_identity() {
        let a = Matrix::from_rows(&[&[1.0, 2.0, 3.0], &[-4.0, 0.5, 2.0], &[0.0, 7.0, -1.0]]).unwrap();
        assert_eq!(mat_exp(&a, 0.0).unwrap(), Matrix::identity(3));
    }

    #[test]
    fn exp_rejects_non_square() {
        let a = Matrix::zeros(2, 3);
        assert!(matches!(mat_exp(&a, 1.0), Err(Error::Dimension(_))));
        assert!(matches!(char_poly(&a), Err(Error::Dimension(_))));
    }

    #[test]
    fn exp_of_skew_block_is_rotation() {
        let theta = 2.0 * PI * 400.0 / 18000.0;
        let s = Matrix::from_rows(&[&[0.0, -1.0], &[1.0, 0.0]]).unwrap();
        let e = mat_exp(&s, theta).unwrap();
        assert!(e.max_abs_diff(&rotation(theta)) < 1e-14);
        // large argument exercises the squaring path
        let e = mat_exp(&s, 40.0).unwrap();
        assert!(e.max_abs_diff(&rotation(40.0)) < 1e-11);
    }

    #[test]
    fn char_poly_identity_and_rotation() {
        let p = char_poly(&Matrix::identity(2)).unwrap();
        assert_eq!(p.coeffs(), &[1.0, -2.0, 1.0]);

        let theta = 0.13963;
        let p = char_poly(&rotation(theta)).unwrap();
        assert!((p.coeffs()[1] + 2.0 * theta.cos()).abs() < 1e-14);
        assert!((p.coeffs()[1] + 1.98054).abs() < 1e-5);
        assert!((p.coeffs()[2] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn poly_from_roots_requires_conjugates() {
        let r = [Complex64::new(0.5, 0.2)];
        assert!(matches!(PolyCoeffs::from_roots(&r), Err(Error::Input(_))));
        let r = [Complex64::new(0.5, 0.2), Complex64::new(0.5, -0.2), Complex64::new(0.1, 0.0)];
        let p = PolyCoeffs::from_roots(&r).unwrap();
        for z in r {
            assert!(p.eval(z).norm() < 1e-15);
        }
        assert!(PolyCoeffs::new(vec![2.0, 1.0]).is_err());
    }

    #[test]
    fn solve_and_rank() {
        let a = Matrix::from_rows(&[&[0.0, 2.0], &[3.0, 1.0]]).unwrap();
        let x = solve(&a, &[4.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
        let singular = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(solve(&singular, &[1.0, 1.0]), Err(Error::Rank(_))));
        assert_eq!(rank(&singular, 1e-12), 1);
        assert_eq!(rank(&a, 1e-12), 2);
        assert_eq!(rank(&Matrix::zeros(3, 3), 1e-12), 0);
    }

    #[test]
    fn unobservable_pair_is_rank_error() {
        // second state never reaches the output
        let a = Matrix::from_rows(&[&[0.9, 0.0], &[0.0, 0.5]]).unwrap();
        let g = Matrix::row(&[1.0, 0.0]);
        let t = [Complex64::new(0.1, 0.0), Complex64::new(0.2, 0.0)];
        assert!(matches!(pole_place_observer(&a, &g, &t), Err(Error::Rank(_))));
    }

    #[test]
    fn placement_at_open_loop_poles_gives_zero_gain() {
        let theta: f64 = 0.3;
        let a =
            Matrix::from_rows(&[&[1.0, 0.0, 0.0], &[0.0, theta.cos(), -theta.sin()], &[0.0, theta.sin(), theta.cos()]])
                .unwrap();
        let g = Matrix::row(&[1.0, 1.0, 0.0]);
        let t = [Complex64::new(1.0, 0.0), Complex64::from_polar(1.0, theta), Complex64::from_polar(1.0, -theta)];
        let l = pole_place_observer(&a, &g, &t).unwrap();
        assert!(l.as_slice().iter().all(|v| v.abs() < 1e-12), "{l:?}");
    }
}
