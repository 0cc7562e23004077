use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Side};
use nalgebra::{DMatrix, SymmetricEigen};

use super::fem::Csr;
use crate::error::{Error, Result};

/// Relative residual bound for accepting a Ritz pair.
pub const LANCZOS_TOL: f64 = 1e-11;

/// Lowest `nev` eigenpairs of `K x = Λ M x` by shift-invert Lanczos about `sigma`.
///
/// Eigenvectors are returned M-orthonormal.
pub fn lowest_eigenpairs(k: &Csr, m: &Csr, nev: usize, sigma: f64) -> Result<Vec<(f64, Vec<f64>)>> {
    let n = k.n;
    if nev == 0 || n == 0 {
        return Ok(Vec::new());
    }
    let nev = nev.min(n);
    let triplets: Vec<Triplet<usize, usize, f64>> = k
        .entries()
        .map(|(r, c, v)| Triplet::new(r, c, v))
        .chain(m.entries().map(|(r, c, v)| Triplet::new(r, c, -sigma * v)))
        .collect();
    let shifted = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Domain(format!("sparse assembly: {e:?}")))?;
    let llt = shifted
        .sp_cholesky(Side::Lower)
        .map_err(|_| Error::NotPositiveDefinite)?;
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut mx = vec![0.0; n];
        m.matvec(x, &mut mx);
        let mut rhs = Mat::from_fn(n, 1, |i, _| mx[i]);
        llt.solve_in_place(rhs.as_mut());
        (0..n).map(|i| rhs[(i, 0)]).collect()
    };
    let m_dot = |x: &[f64], y: &[f64]| m.form(x, y);

    // deterministic start vector with components on every mode
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64 * 0.618_033_988_7).fract() - 0.5)).collect();
    let nv = m_dot(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);

    let max_steps = n.min(40 * nev + 200);
    let mut basis: Vec<Vec<f64>> = vec![v];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut worst = f64::INFINITY;
    for j in 0..max_steps {
        let mut w = apply(&basis[j]);
        let a = m_dot(&basis[j], &w);
        alpha.push(a);
        // full reorthogonalization, twice
        for _ in 0..2 {
            for b in &basis {
                let c = m_dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let bn = m_dot(&w, &w).max(0.0).sqrt();
        let steps = j + 1;
        let check = steps >= nev + 10 && (steps % 5 == 0 || bn < 1e-14 || steps == max_steps);
        if check || bn < 1e-14 {
            let (theta, y) = tridiagonal_eigen(&alpha, &beta);
            let order = descending(&theta);
            let top = &order[..nev.min(order.len())];
            worst = top
                .iter()
                .map(|&i| (bn * y[(steps - 1, i)]).abs() / theta[i].abs().max(f64::MIN_POSITIVE))
                .fold(0.0, f64::max);
            if top.len() == nev && (worst < LANCZOS_TOL || bn < 1e-14) {
                return Ok(top
                    .iter()
                    .map(|&i| {
                        let mut x = vec![0.0; n];
                        for (r, b) in basis.iter().enumerate() {
                            let c = y[(r, i)];
                            x.iter_mut().zip(b).for_each(|(s, t)| *s += c * t);
                        }
                        let nx = m_dot(&x, &x).sqrt();
                        x.iter_mut().for_each(|s| *s /= nx);
                        (sigma + 1.0 / theta[i], x)
                    })
                    .collect());
            }
        }
        if bn < 1e-14 {
            break;
        }
        beta.push(bn);
        w.iter_mut().for_each(|x| *x /= bn);
        basis.push(w);
    }
    Err(Error::EigenNotConverged { residual: worst, iterations: alpha.len() })
}

fn tridiagonal_eigen(alpha: &[f64], beta: &[f64]) -> (Vec<f64>, DMatrix<f64>) {
    let s = alpha.len();
    let t = DMatrix::from_fn(s, s, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let e = SymmetricEigen::new(t);
    (e.eigenvalues.iter().copied().collect(), e.eigenvectors)
}

fn descending(theta: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..theta.len()).collect();
    idx.sort_by(|&a, &b| theta[b].total_cmp(&theta[a]));
    idx
}
