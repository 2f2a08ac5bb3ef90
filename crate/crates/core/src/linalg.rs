//! Dense and matrix-free numerical kernels: hermitian eigensolver, Padé
//! matrix exponential, Krylov exponential action and an embedded Runge–Kutta
//! integrator.

use nalgebra::SymmetricEigen;

use crate::error::{Error, Result};
use crate::{CMatrix, CVector, C64};

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Eigenvalues in ascending order with matching eigenvector columns.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMatrix::zeros(0, 0));
    }
    // symmetrize to protect the solver against round-off asymmetry
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Polar (closest unitary) factor `U V†` of `T = U Σ V†`.
pub fn polar_unitary(t: &CMatrix) -> CMatrix {
    let svd = t.clone().svd(true, true);
    let u = svd.u.expect("svd requested u");
    let v_t = svd.v_t.expect("svd requested v_t");
    u * v_t
}

/// Maximum absolute column sum.
pub fn norm1(m: &CMatrix) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Matrix exponential by scaling and squaring with the degree-13 Padé approximant.
pub fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    let theta13 = 5.371920351148152;
    let nrm = norm1(a);
    let s = if nrm > theta13 {
        (nrm / theta13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * C64::new(2f64.powi(-s), 0.0);
    let id = CMatrix::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = &a * u_inner;
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Padé denominator is nonsingular");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

#[derive(Clone, Copy, Debug)]
pub struct KrylovOptions {
    /// Krylov subspace dimension.
    pub dim: usize,
    /// Local error tolerance per unit time, relative to the vector norm.
    pub tol: f64,
}

impl Default for KrylovOptions {
    fn default() -> Self {
        Self { dim: 30, tol: 1e-12 }
    }
}

fn vnorm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn round_step(x: f64) -> f64 {
    // two significant digits, rounded up
    let p = 10f64.powf(x.log10().floor() - 1.0);
    (x / p).ceil() * p
}

/// `exp(t·A) v` for a matrix-free operator `A` of dimension `n`
/// (Arnoldi with adaptive sub-stepping and a posteriori error control).
///
/// `anorm` is any upper estimate of `‖A‖`; it only seeds the first step size.
pub fn expmv<F>(apply: F, n: usize, anorm: f64, t: f64, v: &[C64], opts: KrylovOptions) -> Result<Vec<C64>>
where
    F: Fn(&[C64], &mut [C64]),
{
    assert_eq!(v.len(), n);
    let mut w = v.to_vec();
    let mut beta = vnorm(&w);
    if beta == 0.0 || t == 0.0 {
        return Ok(w);
    }
    let sign = t.signum();
    let t_total = t.abs();
    let anorm = anorm.max(1e-300);
    let m = opts.dim.min(n).max(1);
    let tol = opts.tol;
    let btol = 1e-7 * tol;
    let (gamma, delta) = (0.9, 1.2);
    let xm0 = 1.0 / m as f64;
    let fact = ((m as f64 + 1.0) / std::f64::consts::E).powf(m as f64 + 1.0)
        * (2.0 * std::f64::consts::PI * (m as f64 + 1.0)).sqrt();
    let mut tau = (1.0 / anorm) * ((fact * tol) / (4.0 * beta * anorm)).powf(xm0);
    tau = round_step(tau.max(1e-300));

    let mut t_now = 0.0;
    let mut basis: Vec<Vec<C64>> = vec![vec![zero(); n]; m + 1];
    let mut p = vec![zero(); n];
    let max_rejects = 20;
    let mut steps = 0usize;
    while t_now < t_total {
        steps += 1;
        if steps > 1_000_000 {
            return Err(Error::NoConvergence { residual: t_total - t_now });
        }
        tau = tau.min(t_total - t_now);
        let mut hess = CMatrix::zeros(m + 2, m + 2);
        for (bi, wi) in basis[0].iter_mut().zip(&w) {
            *bi = wi / beta;
        }
        let mut mb = m;
        let mut k1 = 2usize;
        for j in 0..m {
            apply(&basis[j], &mut p);
            if sign < 0.0 {
                p.iter_mut().for_each(|z| *z = -*z);
            }
            // modified Gram–Schmidt with one reorthogonalization pass
            for _ in 0..2 {
                for i in 0..=j {
                    let h: C64 = basis[i].iter().zip(&p).map(|(b, x)| b.conj() * x).sum();
                    hess[(i, j)] += h;
                    for (x, b) in p.iter_mut().zip(&basis[i]) {
                        *x -= h * b;
                    }
                }
            }
            let s = vnorm(&p);
            if s < btol * anorm.max(1.0) {
                k1 = 0;
                mb = j + 1;
                tau = t_total - t_now;
                break;
            }
            hess[(j + 1, j)] = C64::new(s, 0.0);
            for (b, x) in basis[j + 1].iter_mut().zip(&p) {
                *b = x / s;
            }
        }
        let mut avnorm = 0.0;
        if k1 != 0 {
            hess[(m + 1, m)] = C64::new(1.0, 0.0);
            apply(&basis[m], &mut p);
            avnorm = vnorm(&p);
        }

        let mut rejects = 0;
        let (f, err_loc, xm) = loop {
            let mx = mb + k1;
            let h_small = hess.view((0, 0), (mx, mx)).into_owned() * C64::new(tau, 0.0);
            let f = expm(&h_small);
            let (err_loc, xm) = if k1 == 0 {
                (btol, xm0)
            } else {
                let p1 = f[(m, 0)].norm() * beta;
                let p2 = f[(m + 1, 0)].norm() * beta * avnorm;
                if p1 > 10.0 * p2 {
                    (p2, xm0)
                } else if p1 > p2 {
                    (p1 * p2 / (p1 - p2), xm0)
                } else {
                    (p1, 1.0 / (m as f64 - 1.0).max(1.0))
                }
            };
            if err_loc <= delta * tau * tol * beta.max(1e-300) || k1 == 0 {
                break (f, err_loc, xm);
            }
            rejects += 1;
            if rejects > max_rejects {
                return Err(Error::NoConvergence { residual: err_loc });
            }
            tau = gamma * tau * (tau * tol * beta / err_loc).powf(xm);
            tau = round_step(tau).min(t_total - t_now);
        };

        let mx = mb + k1.saturating_sub(1);
        let mut next = vec![zero(); n];
        for i in 0..mx {
            let c = f[(i, 0)] * beta;
            for (x, b) in next.iter_mut().zip(&basis[i]) {
                *x += c * b;
            }
        }
        w = next;
        beta = vnorm(&w);
        t_now += tau;
        if beta == 0.0 {
            break;
        }
        let err = err_loc.max(1e-300);
        let mut tau_new = gamma * tau * (tau * tol * beta / err).powf(xm);
        tau_new = round_step(tau_new).min(10.0 * tau.max(1e-300));
        tau = tau_new.min(t_total - t_now).max(1e-300);
        if t_total - t_now < 1e-14 * t_total {
            break;
        }
    }
    Ok(w)
}

/// Options for [`dopri5`].
#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub min_step: f64,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-12,
            min_step: 1e-12,
        }
    }
}

const DP_A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const DP_E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Dormand–Prince 5(4) integration of the autonomous linear system
/// `y' = f(y)`, returning `y` at every requested time (ascending, starting at or after 0).
pub fn dopri5<F>(f: F, y0: &[C64], times: &[f64], opts: OdeOptions) -> Result<Vec<Vec<C64>>>
where
    F: Fn(&[C64], &mut [C64]),
{
    let n = y0.len();
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut h = 1e-3;
    let mut out = Vec::with_capacity(times.len());
    let mut k: Vec<Vec<C64>> = vec![vec![zero(); n]; 7];
    let mut stage = vec![zero(); n];
    let mut y_new = vec![zero(); n];
    f(&y, &mut k[0]);
    for &target in times {
        if target < t {
            return Err(Error::InvalidArgument("time grid must be ascending and nonnegative".into()));
        }
        while t < target {
            let last = target - t <= h;
            let step = if last { target - t } else { h };
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = y[i];
                    for (j, kj) in k.iter().enumerate().take(s) {
                        let a = DP_A[s][j];
                        if a != 0.0 {
                            acc += kj[i] * (step * a);
                        }
                    }
                    stage[i] = acc;
                }
                f(&stage, &mut k[s]);
                if s == 6 {
                    y_new.copy_from_slice(&stage);
                }
            }
            let mut err = 0.0;
            for i in 0..n {
                let mut e = C64::new(0.0, 0.0);
                for (j, kj) in k.iter().enumerate() {
                    if DP_E[j] != 0.0 {
                        e += kj[i] * DP_E[j];
                    }
                }
                let sc = opts.atol + opts.rtol * y[i].norm().max(y_new[i].norm());
                err += (e.norm() * step / sc).powi(2);
            }
            err = (err / n as f64).sqrt();
            if err <= 1.0 {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut y_new);
                // first-same-as-last: stage 7 slope is f(y_new)
                let (first, rest) = k.split_at_mut(1);
                first[0].copy_from_slice(&rest[5]);
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last {
                    h = step * factor;
                } else {
                    h = h.max(step * factor);
                }
            } else {
                h = step * (0.9 * err.powf(-0.2)).max(0.2);
                if h < opts.min_step {
                    return Err(Error::StepSizeUnderflow(t));
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Converts a slice into a column vector.
pub fn to_cvector(v: &[C64]) -> CVector {
    CVector::from_column_slice(v)
}
