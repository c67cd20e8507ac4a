//! Small dense numeric kernel: fixed-step RK4, Hurwitz tests on
//! companion-form gain vectors, and symmetric eigenvalue helpers.
//!
//! Everything here is value-semantic and pure; the matrices involved are
//! tiny (observer companion forms, quadratic-basis Gram matrices), so the
//! solvers are direct rather than general-purpose.

use crate::error::{Error, Result};

pub fn all_finite(v: &[f64]) -> bool {
    v.iter().all(|x| x.is_finite())
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Dense row-major matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::invalid("Mat::from_rows: empty shape"));
        }
        let cols = rows[0].len();
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::invalid("Mat::from_rows: ragged rows"));
        }
        let data: Vec<f64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
        if !all_finite(&data) {
            return Err(Error::invalid("Mat::from_rows: non-finite entry"));
        }
        Ok(Mat {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn diag(entries: &[f64]) -> Self {
        let n = entries.len();
        let mut m = Mat::zeros(n, n);
        for (i, &v) in entries.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| dot(&self.data[i * self.cols..(i + 1) * self.cols], v))
            .collect()
    }

    /// self^T * v
    pub fn t_matvec(&self, v: &[f64]) -> Vec<f64> {
        debug_assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (o, r) in out.iter_mut().zip(row) {
                *o += v[i] * r;
            }
        }
        out
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        debug_assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += a * other.get(k, j);
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        let mut out = Mat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn scaled(&self, c: f64) -> Mat {
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &Mat) -> Mat {
        debug_assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Mat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Mat) -> Mat {
        self.add(&other.scaled(-1.0))
    }

    /// Outer product u v^T.
    pub fn outer(u: &[f64], v: &[f64]) -> Mat {
        let mut m = Mat::zeros(u.len(), v.len());
        for (i, &a) in u.iter().enumerate() {
            for (j, &b) in v.iter().enumerate() {
                m.set(i, j, a * b);
            }
        }
        m
    }

    /// v^T M v
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.matvec(v))
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn is_symmetric(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                if (self.get(i, j) - self.get(j, i)).abs() > tol {
                    return false;
                }
            }
        }
        true
    }
}

/// One classical 4th-order Runge-Kutta step of `state` by `dt`.
///
/// The field is `(t, state) -> dstate/dt` and may itself fail; a non-finite
/// derivative in any of the four stages is reported as an integration fault
/// carrying the stage time and stage index (1..=4).
pub fn rk4_step<F>(mut field: F, t: f64, state: &[f64], dt: f64) -> Result<Vec<f64>>
where
    F: FnMut(f64, &[f64]) -> Result<Vec<f64>>,
{
    if !(dt > 0.0) {
        return Err(Error::invalid(format!("rk4_step: dt must be > 0, got {dt}")));
    }
    if !all_finite(state) {
        return Err(Error::invalid("rk4_step: non-finite state"));
    }
    let dim = state.len();
    let mut eval = |stage: usize, ts: f64, s: &[f64]| -> Result<Vec<f64>> {
        let d = field(ts, s)?;
        if d.len() != dim {
            return Err(Error::invalid(format!(
                "rk4_step: field returned dimension {} for state dimension {}",
                d.len(),
                dim
            )));
        }
        if !all_finite(&d) {
            return Err(Error::IntegrationFault { t: ts, stage });
        }
        Ok(d)
    };

    let shifted = |s: &[f64], k: &[f64], h: f64| -> Vec<f64> {
        s.iter().zip(k).map(|(x, dx)| x + h * dx).collect()
    };

    let k1 = eval(1, t, state)?;
    let k2 = eval(2, t + dt / 2.0, &shifted(state, &k1, dt / 2.0))?;
    let k3 = eval(3, t + dt / 2.0, &shifted(state, &k2, dt / 2.0))?;
    let k4 = eval(4, t + dt, &shifted(state, &k3, dt))?;

    Ok(state
        .iter()
        .enumerate()
        .map(|(i, x)| x + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect())
}

/// Companion matrix built from an observer gain vector `l`:
/// first column -l, superdiagonal of ones.
pub fn companion_from_gains(l: &[f64]) -> Mat {
    let m = l.len();
    let mut e = Mat::zeros(m, m);
    for i in 0..m {
        e.set(i, 0, -l[i]);
        if i + 1 < m {
            e.set(i, i + 1, 1.0);
        }
    }
    e
}

/// True iff the companion matrix built from `l` is Hurwitz, i.e. every root
/// of lambda^m + l1 lambda^(m-1) + ... + lm lies strictly in the open left
/// half plane. Decided by the Routh-Hurwitz first-column test.
pub fn is_hurwitz(l: &[f64], n_plus_1: usize) -> Result<bool> {
    if l.len() != n_plus_1 {
        return Err(Error::invalid(format!(
            "is_hurwitz: gain vector has dimension {}, expected {}",
            l.len(),
            n_plus_1
        )));
    }
    if !all_finite(l) {
        return Err(Error::invalid("is_hurwitz: non-finite gain"));
    }
    let mut coeffs = Vec::with_capacity(n_plus_1 + 1);
    coeffs.push(1.0);
    coeffs.extend_from_slice(l);
    Ok(routh_strictly_stable(&coeffs))
}

/// Routh-Hurwitz first-column test for a monic polynomial given by its
/// coefficients (highest degree first). A zero or sign change anywhere in
/// the first column means the polynomial is not strictly Hurwitz.
fn routh_strictly_stable(coeffs: &[f64]) -> bool {
    let degree = coeffs.len() - 1;
    if degree == 0 {
        return true;
    }
    let width = degree / 2 + 1;
    let mut row_a = vec![0.0; width + 1];
    let mut row_b = vec![0.0; width + 1];
    for (k, &c) in coeffs.iter().enumerate() {
        if k % 2 == 0 {
            row_a[k / 2] = c;
        } else {
            row_b[k / 2] = c;
        }
    }
    // row_a starts with the leading coefficient 1 > 0.
    for _ in 0..degree {
        let pivot = row_b[0];
        if !(pivot > 0.0) {
            return false;
        }
        let mut next = vec![0.0; width + 1];
        for j in 0..width {
            next[j] = row_a[j + 1] - (row_a[0] / pivot) * row_b[j + 1];
        }
        row_a = std::mem::take(&mut row_b);
        row_b = next;
    }
    true
}

/// All eigenvalues of a symmetric matrix, ascending, via cyclic Jacobi
/// rotations. Input must be symmetric within absolute tolerance 1e-10.
pub fn sym_eigenvalues(m: &Mat) -> Result<Vec<f64>> {
    if m.rows() != m.cols() {
        return Err(Error::invalid("sym_eigenvalues: matrix not square"));
    }
    let scale = 1.0 + m.max_abs();
    if !m.is_symmetric(1e-10 * scale) {
        return Err(Error::invalid("sym_eigenvalues: matrix not symmetric"));
    }
    let n = m.rows();
    let mut a = m.clone();
    // symmetrize exactly so rotations stay consistent
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (a.get(i, j) + a.get(j, i));
            a.set(i, j, v);
            a.set(j, i, v);
        }
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                off += a.get(i, j) * a.get(i, j);
            }
        }
        if off.sqrt() <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = 0.5 * (aqq - app).atan2(2.0 * apq) * -1.0;
                // standard Jacobi angle: tan(2 theta) = 2 a_pq / (a_pp - a_qq)
                let phi = 0.5 * (2.0 * apq).atan2(app - aqq);
                let _ = theta;
                let (s, c) = phi.sin_cos();
                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, c * akp + s * akq);
                    a.set(k, q, -s * akp + c * akq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, c * apk + s * aqk);
                    a.set(q, k, -s * apk + c * aqk);
                }
            }
        }
    }
    let mut eigs: Vec<f64> = (0..n).map(|i| a.get(i, i)).collect();
    eigs.sort_by(|x, y| x.partial_cmp(y).unwrap());
    Ok(eigs)
}

/// Minimum eigenvalue of a symmetric matrix.
pub fn min_eigenvalue_sym(m: &Mat) -> Result<f64> {
    Ok(sym_eigenvalues(m)?[0])
}

/// Spectral norm (largest singular value) of a small dense matrix.
pub fn spectral_norm(m: &Mat) -> Result<f64> {
    let gram = m.transpose().matmul(m);
    let eigs = sym_eigenvalues(&gram)?;
    Ok(eigs.last().copied().unwrap_or(0.0).max(0.0).sqrt())
}

/// Solve `a x = b` by Gaussian elimination with partial pivoting.
pub fn solve_linear(a: &Mat, b: &[f64]) -> Result<Vec<f64>> {
    if a.rows() != a.cols() || a.rows() != b.len() {
        return Err(Error::invalid("solve_linear: dimension mismatch"));
    }
    let n = a.rows();
    let mut aug: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).map(|j| a.get(i, j)).collect();
            row.push(b[i]);
            row
        })
        .collect();
    for col in 0..n {
        let (pivot_row, pivot_abs) = (col..n)
            .map(|r| (r, aug[r][col].abs()))
            .max_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        if pivot_abs < 1e-12 * (1.0 + a.max_abs()) {
            return Err(Error::invalid("solve_linear: singular matrix"));
        }
        aug.swap(col, pivot_row);
        for r in (col + 1)..n {
            let f = aug[r][col] / aug[col][col];
            for c in col..=n {
                aug[r][c] -= f * aug[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = aug[i][n];
        for j in (i + 1)..n {
            acc -= aug[i][j] * x[j];
        }
        x[i] = acc / aug[i][i];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn ok_field(f: impl Fn(f64, &[f64]) -> Vec<f64>) -> impl FnMut(f64, &[f64]) -> Result<Vec<f64>> {
        move |t, s| Ok(f(t, s))
    }

    #[test]
    fn rk4_zero_field_is_identity() {
        let out = rk4_step(ok_field(|_, s| vec![0.0; s.len()]), 0.0, &[1.0, 2.0], 1e-3).unwrap();
        assert_eq!(out, vec![1.0, 2.0]);
    }

    #[test]
    fn rk4_matches_exponential() {
        let out = rk4_step(ok_field(|_, s| vec![s[0]]), 0.0, &[1.0], 0.1).unwrap();
        assert!((out[0] - 0.1f64.exp()).abs() <= 1e-7, "got {}", out[0]);
    }

    #[test]
    fn rk4_matches_rotation() {
        let dt = 0.01;
        let out = rk4_step(ok_field(|_, s| vec![s[1], -s[0]]), 0.0, &[1.0, 0.0], dt).unwrap();
        assert!((out[0] - dt.cos()).abs() <= 1e-10);
        assert!((out[1] - (-dt.sin())).abs() <= 1e-10);
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        // global error on xdot = x over [0,1]; halving dt cuts error ~16x
        let integrate = |dt: f64| {
            let steps = (1.0 / dt).round() as usize;
            let mut s = vec![1.0];
            for k in 0..steps {
                s = rk4_step(ok_field(|_, v| vec![v[0]]), k as f64 * dt, &s, dt).unwrap();
            }
            (s[0] - 1.0f64.exp()).abs()
        };
        let e1 = integrate(1e-2);
        let e2 = integrate(5e-3);
        let ratio = e1 / e2;
        assert!(
            (14.0..=18.0).contains(&ratio),
            "error ratio {ratio} outside [14, 18]"
        );
    }

    #[test]
    fn rk4_reports_faulty_stage() {
        let res = rk4_step(
            ok_field(|_, s| vec![if s[0] > 1.0 { f64::NAN } else { 10.0 }]),
            0.0,
            &[0.999],
            1.0,
        );
        match res {
            Err(Error::IntegrationFault { stage, .. }) => assert!(stage >= 2),
            other => panic!("expected integration fault, got {other:?}"),
        }
    }

    #[test]
    fn hurwitz_examples() {
        assert!(is_hurwitz(&[2.0, 2.0, 1.0], 3).unwrap());
        assert!(!is_hurwitz(&[0.0, 0.0, 1.0], 3).unwrap());
        // (lambda+1)(lambda^2+1): imaginary-axis roots are not strict
        assert!(!is_hurwitz(&[1.0, 1.0, 1.0], 3).unwrap());
    }

    #[test]
    fn hurwitz_dimension_mismatch() {
        assert!(is_hurwitz(&[1.0, 2.0], 3).is_err());
    }

    /// Durand-Kerner root finder over the monic polynomial, used as an
    /// independent oracle for the Routh-Hurwitz implementation.
    fn roots_all_strictly_left(coeffs: &[f64]) -> bool {
        let deg = coeffs.len() - 1;
        let mut roots: Vec<(f64, f64)> = (0..deg)
            .map(|k| {
                let ang = 2.0 * std::f64::consts::PI * k as f64 / deg as f64 + 0.3;
                (1.3f64.powi(k as i32 % 3) * ang.cos(), 1.3f64.powi(k as i32 % 3) * ang.sin())
            })
            .collect();
        let eval = |re: f64, im: f64| -> (f64, f64) {
            let mut pr = 0.0;
            let mut pi = 0.0;
            for &c in coeffs {
                let nr = pr * re - pi * im + c;
                let ni = pr * im + pi * re;
                pr = nr;
                pi = ni;
            }
            (pr, pi)
        };
        for _ in 0..500 {
            let mut max_step = 0.0f64;
            for i in 0..deg {
                let (re, im) = roots[i];
                let (mut dr, mut di) = (1.0, 0.0);
                for j in 0..deg {
                    if i == j {
                        continue;
                    }
                    let (qr, qi) = (re - roots[j].0, im - roots[j].1);
                    let nr = dr * qr - di * qi;
                    let ni = dr * qi + di * qr;
                    dr = nr;
                    di = ni;
                }
                let (pr, pi) = eval(re, im);
                let den = dr * dr + di * di;
                if den < 1e-300 {
                    continue;
                }
                let sr = (pr * dr + pi * di) / den;
                let si = (pi * dr - pr * di) / den;
                roots[i] = (re - sr, im - si);
                max_step = max_step.max((sr * sr + si * si).sqrt());
            }
            if max_step < 1e-12 {
                break;
            }
        }
        roots.iter().all(|&(re, _)| re < 0.0)
    }

    #[test]
    fn hurwitz_agrees_with_root_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        for _ in 0..100 {
            let l: Vec<f64> = (0..3).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let mut coeffs = vec![1.0];
            coeffs.extend_from_slice(&l);
            let expect = roots_all_strictly_left(&coeffs);
            let got = is_hurwitz(&l, 3).unwrap();
            assert_eq!(got, expect, "disagreement on L={l:?}");
        }
    }

    #[test]
    fn min_eig_examples() {
        assert!((min_eigenvalue_sym(&Mat::identity(2)).unwrap() - 1.0).abs() < 1e-12);
        assert!((min_eigenvalue_sym(&Mat::diag(&[3.0, 0.5])).unwrap() - 0.5).abs() < 1e-12);
        let m = Mat::from_rows(&[&[2.0, 1.0], &[1.0, 2.0]]).unwrap();
        assert!((min_eigenvalue_sym(&m).unwrap() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn min_eig_rejects_asymmetric() {
        let m = Mat::from_rows(&[&[1.0, 2.0], &[0.0, 1.0]]).unwrap();
        assert!(min_eigenvalue_sym(&m).is_err());
    }

    #[test]
    fn min_eig_bounds_rayleigh_quotient() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = Mat::from_rows(&[&[2.0, 0.4, 0.0], &[0.4, 1.0, -0.3], &[0.0, -0.3, 1.5]]).unwrap();
        let lam = min_eigenvalue_sym(&q).unwrap();
        for _ in 0..50 {
            let v: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let nv = norm(&v);
            if nv < 1e-6 {
                continue;
            }
            let rq = q.quad_form(&v) / (nv * nv);
            assert!(lam <= rq + 1e-9, "lambda_min {lam} > Rayleigh {rq}");
        }
    }

    #[test]
    fn spectral_norm_of_constant_jacobian() {
        let j = Mat::from_rows(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 2.0]]).unwrap();
        assert!((spectral_norm(&j).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn solve_linear_roundtrip() {
        let a = Mat::from_rows(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 4.0]]).unwrap();
        let x_true = vec![1.0, -2.0, 0.5];
        let b = a.matvec(&x_true);
        let x = solve_linear(&a, &b).unwrap();
        for (xi, ti) in x.iter().zip(&x_true) {
            assert!((xi - ti).abs() < 1e-12);
        }
    }

    #[test]
    fn companion_shape() {
        let e = companion_from_gains(&[2.0, 2.0, 1.0]);
        assert_eq!(e.get(0, 0), -2.0);
        assert_eq!(e.get(1, 0), -2.0);
        assert_eq!(e.get(2, 0), -1.0);
        assert_eq!(e.get(0, 1), 1.0);
        assert_eq!(e.get(1, 2), 1.0);
        assert_eq!(e.get(2, 1), 0.0);
    }
}
