//! Sparse symmetric kernels: Jacobi-preconditioned conjugate gradient and
//! shifted power iteration with deflation.

use rand::{RngExt, SeedableRng};
use rand_pcg::Pcg64Mcg;

/// Symmetric matrix in compressed-row form (both triangles stored).
#[derive(Debug, Clone)]
pub(crate) struct SymCsr {
    row_ptr: Vec<usize>,
    col: Vec<usize>,
    val: Vec<f64>,
    diag: Vec<f64>,
}

impl SymCsr {
    /// Assembles from per-row `(col, value)` lists; entries with equal
    /// column are summed.
    pub(crate) fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col = Vec::new();
        let mut val = Vec::new();
        let mut diag = vec![0.0; n];
        row_ptr.push(0);
        for (i, mut row) in rows.into_iter().enumerate() {
            row.sort_by_key(|e| e.0);
            let mut iter = row.into_iter().peekable();
            while let Some((j, mut v)) = iter.next() {
                while let Some(&(k, w)) = iter.peek() {
                    if k != j {
                        break;
                    }
                    v += w;
                    iter.next();
                }
                if j == i {
                    diag[i] = v;
                }
                col.push(j);
                val.push(v);
            }
            row_ptr.push(col.len());
        }
        SymCsr {
            row_ptr,
            col,
            val,
            diag,
        }
    }

    pub(crate) fn n(&self) -> usize {
        self.diag.len()
    }

    pub(crate) fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let (s, e) = (self.row_ptr[i], self.row_ptr[i + 1]);
            *yi = self.col[s..e]
                .iter()
                .zip(&self.val[s..e])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    /// `max_i |b_i − (Ax)_i| / A_ii`.
    pub(crate) fn scaled_residual(&self, x: &[f64], b: &[f64]) -> f64 {
        let mut ax = vec![0.0; self.n()];
        self.apply(x, &mut ax);
        ax.iter()
            .zip(b)
            .zip(&self.diag)
            .map(|((a, b), d)| ((b - a) / d).abs())
            .fold(0.0, f64::max)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
}

/// Solves `A x = b` for symmetric positive definite `A`. Runs
/// preconditioned CG, restarting from the current iterate when round-off
/// stalls progress, until the scaled residual (see
/// [`SymCsr::scaled_residual`]) reaches `target` or the iteration budget is
/// spent. The caller checks the final residual.
pub(crate) fn conjugate_gradient(a: &SymCsr, b: &[f64], target: f64) -> CgOutcome {
    let n = a.n();
    let mut x = vec![0.0; n];
    let mut total = 0;
    let per_cycle = 10 * n + 200;
    let mut residual = a.scaled_residual(&x, b);
    for _cycle in 0..8 {
        if residual <= target {
            break;
        }
        let mut ax = vec![0.0; n];
        a.apply(&x, &mut ax);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let mut z: Vec<f64> = r.iter().zip(&a.diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        for _ in 0..per_cycle {
            if z.iter().fold(0.0f64, |m, v| m.max(v.abs())) <= target * 0.1 {
                break;
            }
            a.apply(&p, &mut ap);
            let pap = dot(&p, &ap);
            if pap <= 0.0 || !pap.is_finite() {
                break;
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
                z[i] = r[i] / a.diag[i];
            }
            total += 1;
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let fresh = a.scaled_residual(&x, b);
        let stalled = fresh >= residual * 0.5;
        residual = fresh;
        if stalled {
            break;
        }
    }
    CgOutcome {
        x,
        iterations: total,
    }
}

pub(crate) struct PowerOutcome {
    /// Rayleigh quotient with respect to the original operator.
    pub value: f64,
    pub vector: Vec<f64>,
    pub iterations: usize,
    /// `‖S v − θ v‖₂` for the unit iterate `v`.
    pub residual: f64,
    pub converged: bool,
}

/// Which end of the spectrum to extract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum End {
    Largest,
    Smallest,
}

/// Power iteration for an extreme eigenpair of a symmetric operator `S`
/// whose spectrum lies in `[-1, 1]`. Iterates on `(I ± S)/2`, whose
/// spectrum is in `[0, 1]`, so the wanted end dominates; `deflate` holds
/// orthonormal eigenvectors projected out at every step.
pub(crate) fn power_iteration<F>(
    n: usize,
    apply: F,
    end: End,
    deflate: &[Vec<f64>],
    tol: f64,
    max_iter: usize,
) -> PowerOutcome
where
    F: Fn(&[f64], &mut [f64]),
{
    let sign = match end {
        End::Largest => 1.0,
        End::Smallest => -1.0,
    };
    let project = |v: &mut [f64]| {
        for d in deflate {
            let c = dot(v, d);
            v.iter_mut().zip(d).for_each(|(x, y)| *x -= c * y);
        }
    };
    let mut rng = Pcg64Mcg::seed_from_u64(0x5eed_1dea);
    let mut v: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
    project(&mut v);
    let nv = norm(&v);
    if n == 0 || nv == 0.0 {
        return PowerOutcome {
            value: f64::NAN,
            vector: v,
            iterations: 0,
            residual: 0.0,
            converged: false,
        };
    }
    v.iter_mut().for_each(|x| *x /= nv);

    let mut sv = vec![0.0; n];
    let mut theta = 0.0;
    let mut residual = f64::INFINITY;
    let mut it = 0;
    while it < max_iter {
        apply(&v, &mut sv);
        project(&mut sv);
        theta = dot(&v, &sv);
        residual = sv
            .iter()
            .zip(&v)
            .map(|(s, x)| (s - theta * x).powi(2))
            .sum::<f64>()
            .sqrt();
        if residual <= tol {
            break;
        }
        // v <- (v + sign * S v) / 2, renormalized
        for (x, s) in v.iter_mut().zip(&sv) {
            *x = 0.5 * (*x + sign * s);
        }
        project(&mut v);
        let nv = norm(&v);
        if nv == 0.0 {
            break;
        }
        v.iter_mut().for_each(|x| *x /= nv);
        it += 1;
    }
    PowerOutcome {
        value: theta,
        vector: v,
        iterations: it,
        residual,
        converged: residual <= tol,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path_laplacian(n: usize) -> SymCsr {
        let rows = (0..n)
            .map(|i| {
                let mut r = vec![(i, 2.0)];
                if i > 0 {
                    r.push((i - 1, -1.0));
                }
                if i + 1 < n {
                    r.push((i + 1, -1.0));
                }
                r
            })
            .collect();
        SymCsr::from_rows(rows)
    }

    #[test]
    fn cg_solves_dirichlet_path() {
        // -u'' = 0 with u(0) = 1, u(n+1) = 0: linear profile
        let n = 40;
        let a = path_laplacian(n);
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        let out = conjugate_gradient(&a, &b, 1e-14);
        assert!(a.scaled_residual(&out.x, &b) <= 1e-14);
        for (i, x) in out.x.iter().enumerate() {
            let exact = 1.0 - (i + 1) as f64 / (n + 1) as f64;
            assert!((x - exact).abs() < 1e-12);
        }
    }

    #[test]
    fn duplicate_entries_are_summed() {
        let a = SymCsr::from_rows(vec![vec![(0, 1.0), (0, 2.0)], vec![(1, 1.0)]]);
        let mut y = vec![0.0; 2];
        a.apply(&[1.0, 1.0], &mut y);
        assert_eq!(y, vec![3.0, 1.0]);
    }

    #[test]
    fn power_iteration_on_diagonal_operator() {
        let d = [0.9, -0.95, 0.3, 0.1];
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..4 {
                y[i] = d[i] * x[i];
            }
        };
        let top = power_iteration(4, apply, End::Largest, &[], 1e-12, 100_000);
        assert!(top.converged);
        assert!((top.value - 0.9).abs() < 1e-12);
        let bottom = power_iteration(4, apply, End::Smallest, &[], 1e-12, 100_000);
        assert!((bottom.value + 0.95).abs() < 1e-12);
        let e0 = vec![1.0, 0.0, 0.0, 0.0];
        let second = power_iteration(4, apply, End::Largest, &[e0], 1e-12, 100_000);
        assert!((second.value - 0.3).abs() < 1e-12);
    }

    #[test]
    fn iteration_cap_is_reported() {
        let d = [0.5, 0.5 - 1e-9];
        let apply = |x: &[f64], y: &mut [f64]| {
            y[0] = d[0] * x[0];
            y[1] = d[1] * x[1];
        };
        let out = power_iteration(2, apply, End::Largest, &[], 1e-15, 10);
        assert!(!out.converged);
        assert_eq!(out.iterations, 10);
    }
}
