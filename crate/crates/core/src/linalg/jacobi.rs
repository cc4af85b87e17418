//! One-sided Jacobi SVD, used when the bidiagonal routine loses accuracy.

use nalgebra::DVector;

use super::{CMat, CNum};

const MAX_SWEEPS: usize = 80;

/// Unordered thin SVD `(u, v, sigma)` of `m` with `m = u diag(sigma) v^H`.
pub(super) fn jacobi_svd(m: &CMat) -> (CMat, CMat, DVector<f64>) {
    if m.nrows() < m.ncols() {
        let (u, v, s) = jacobi_svd(&m.adjoint());
        return (v, u, s);
    }
    let (rows, cols) = m.shape();
    let mut a = m.clone();
    let mut v = CMat::identity(cols, cols);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..cols {
            for q in (p + 1)..cols {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dotc(&a.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut a, p, q, c, s, phase);
                rotate(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let sigma = DVector::from_iterator(cols, (0..cols).map(|j| a.column(j).norm()));
    let mut u = CMat::zeros(rows, cols);
    let mut missing = Vec::new();
    for j in 0..cols {
        if sigma[j] > f64::MIN_POSITIVE * 1e16 {
            u.set_column(j, &(a.column(j) / CNum::new(sigma[j], 0.0)));
        } else {
            missing.push(j);
        }
    }
    complete_columns(&mut u, &missing);
    (u, v, sigma)
}

// Columns p, q become a_p c - a_q s conj(phase) and a_p s phase + a_q c.
fn rotate(m: &mut CMat, p: usize, q: usize, c: f64, s: f64, phase: CNum) {
    for i in 0..m.nrows() {
        let x = m[(i, p)];
        let y = m[(i, q)];
        m[(i, p)] = x * c - y * phase.conj() * s;
        m[(i, q)] = x * phase * s + y * c;
    }
}

// Fills the listed columns with unit vectors orthogonal to all other columns.
fn complete_columns(u: &mut CMat, missing: &[usize]) {
    let rows = u.nrows();
    let mut filled: Vec<usize> = (0..u.ncols()).filter(|j| !missing.contains(j)).collect();
    let mut candidate = 0;
    for &j in missing {
        while candidate < rows {
            let mut w = DVector::from_element(rows, CNum::new(0.0, 0.0));
            w[candidate] = CNum::new(1.0, 0.0);
            candidate += 1;
            for _ in 0..2 {
                for &k in &filled {
                    let proj = u.column(k).dotc(&w);
                    w -= u.column(k) * proj;
                }
            }
            let norm = w.norm();
            if norm > 0.5 {
                u.set_column(j, &(w / CNum::new(norm, 0.0)));
                filled.push(j);
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::random_unitary;

    fn check(m: &CMat) {
        let (u, v, s) = jacobi_svd(m);
        let k = m.nrows().min(m.ncols());
        assert_eq!((u.ncols(), v.ncols(), s.len()), (k, k, k));
        let mut us = u.clone();
        for j in 0..k {
            us.column_mut(j).scale_mut(s[j]);
        }
        let scale = m.norm().max(1.0);
        assert!((us * v.adjoint() - m).norm() < 1e-13 * scale);
        assert!((u.adjoint() * &u - CMat::identity(k, k)).norm() < 1e-12);
        assert!((v.adjoint() * &v - CMat::identity(k, k)).norm() < 1e-12);
    }

    #[test]
    fn random_shapes_and_ranks() {
        for (seed, (rows, cols, rank)) in [
            (5, 4, 4),
            (5, 4, 2),
            (3, 6, 2),
            (6, 6, 1),
            (4, 4, 0),
            (1, 3, 1),
        ]
        .into_iter()
        .enumerate()
        {
            let left = random_unitary(rows, 2 * seed as u64);
            let right = random_unitary(cols, 2 * seed as u64 + 1);
            let mut d = CMat::zeros(rows, cols);
            for j in 0..rank {
                d[(j, j)] = CNum::new(1.0 + j as f64, 0.0);
            }
            check(&(left * d * right.adjoint()));
        }
    }

    #[test]
    fn known_singular_values() {
        let m = CMat::from_row_slice(
            2,
            2,
            &[
                CNum::new(3.0, 0.0),
                CNum::new(0.0, 0.0),
                CNum::new(0.0, 4.0),
                CNum::new(5.0, 0.0),
            ],
        );
        let (_, _, s) = jacobi_svd(&m);
        let mut s: Vec<f64> = s.iter().copied().collect();
        s.sort_by(|a, b| b.total_cmp(a));
        // m^H m has eigenvalues 45 and 5.
        assert!((s[0] - 45f64.sqrt()).abs() < 1e-13);
        assert!((s[1] - 5f64.sqrt()).abs() < 1e-13);
    }
}
