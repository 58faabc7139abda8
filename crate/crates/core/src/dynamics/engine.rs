// SPDX-License-Identifier: Apache-2.0

//! Piecewise-constant propagation kernels.
//!
//! Every step Hamiltonian `H_k = H_static + κ Σ_c v_c[k] X_c` is real
//! symmetric, so each step is exponentiated exactly through a real symmetric
//! eigendecomposition, `U_k = V·diag(e^{−2πiλ dt})·Vᵀ`. Complex matrices are
//! kept as split real/imaginary row-major buffers so that every product is a
//! real matrix product.
//!
//! The gradient of the trace overlap `o = tr(B†U)` with respect to every
//! control sample follows from one forward and one backward sweep using the
//! Daleckii–Krein form of the derivative of the step exponential.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, SymmetricEigen};

use crate::device::DeviceSpec;
use crate::numeric::{ComplexMatrix, C64};

/// Square complex matrix as split row-major buffers.
#[derive(Clone, Debug)]
pub(crate) struct Split {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl Split {
    fn identity(n: usize) -> Self {
        let mut re = vec![0.0; n * n];
        for i in 0..n {
            re[i * n + i] = 1.0;
        }
        Self { n, re, im: vec![0.0; n * n] }
    }

    fn from_matrix(m: &ComplexMatrix) -> Self {
        let n = m.rows();
        let mut re = vec![0.0; n * n];
        let mut im = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let z = m.get(i, j);
                re[i * n + j] = z.re;
                im[i * n + j] = z.im;
            }
        }
        Self { n, re, im }
    }

    fn to_matrix(&self) -> ComplexMatrix {
        let n = self.n;
        ComplexMatrix::from_fn(n, n, |i, j| C64::new(self.re[i * n + j], self.im[i * n + j]))
    }
}

/// c = op(a)·op(b) for n×n row-major real matrices, where op transposes when requested.
fn gemm_op(a: &[f64], ta: bool, b: &[f64], tb: bool, c: &mut [f64], n: usize) {
    assert!(a.len() >= n * n && b.len() >= n * n && c.len() >= n * n);
    let strides = |t: bool| if t { (1, n as isize) } else { (n as isize, 1) };
    let (rsa, csa) = strides(ta);
    let (rsb, csb) = strides(tb);
    // SAFETY: all three buffers hold at least n² elements and the strides
    // address exactly that range; `c` does not alias `a` or `b`.
    unsafe {
        matrixmultiply::dgemm(n, n, n, 1.0, a.as_ptr(), rsa, csa, b.as_ptr(), rsb, csb, 0.0, c.as_mut_ptr(), n as isize, 1);
    }
}

/// c = a·b.
fn gemm(a: &[f64], b: &[f64], c: &mut [f64], n: usize) {
    gemm_op(a, false, b, false, c, n);
}

/// c = aᵀ·b.
fn gemm_tn(a: &[f64], b: &[f64], c: &mut [f64], n: usize) {
    gemm_op(a, true, b, false, c, n);
}

/// c = a·bᵀ.
fn gemm_nt(a: &[f64], b: &[f64], c: &mut [f64], n: usize) {
    gemm_op(a, false, b, true, c, n);
}

/// Largest number of cached eigenvector entries (f64) kept between the
/// forward and backward sweeps of a gradient evaluation.
const EIG_CACHE_LIMIT: usize = 40_000_000;

/// Scratch buffers reused across steps.
struct Workspace {
    h: DMatrix<f64>,
    v: Vec<f64>,
    t_re: Vec<f64>,
    t_im: Vec<f64>,
}

impl Workspace {
    fn new(n: usize) -> Self {
        Self {
            h: DMatrix::zeros(n, n),
            v: vec![0.0; n * n],
            t_re: vec![0.0; n * n],
            t_im: vec![0.0; n * n],
        }
    }
}

/// Static pieces of a device needed for propagation.
#[derive(Clone, Debug)]
pub struct Engine {
    n: usize,
    static_h: Vec<f64>,
    /// Sparse (row, col, value) entries of each drive operator.
    controls: Vec<Vec<(usize, usize, f64)>>,
    transfer: f64,
}

/// Eigen-data of one step.
struct StepEig {
    values: Vec<f64>,
}

impl Engine {
    pub fn new(spec: &DeviceSpec) -> Self {
        let h = crate::device::drift_hamiltonian(spec);
        let n = h.rows();
        let static_h = (0..n * n).map(|k| h.get(k / n, k % n).re).collect();
        let controls = (0..spec.transmons.len())
            .map(|c| {
                let x = spec.drive_operator(c);
                let mut entries = Vec::new();
                for i in 0..n {
                    for j in 0..n {
                        let v = x.get(i, j).re;
                        if v != 0.0 {
                            entries.push((i, j, v));
                        }
                    }
                }
                entries
            })
            .collect();
        Self { n, static_h, controls, transfer: spec.line_transfer }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn n_controls(&self) -> usize {
        self.controls.len()
    }

    /// Diagonalizes the step Hamiltonian for control values `v` (V); the
    /// eigenvectors land in `ws.v` (row-major, columns are eigenvectors).
    fn step_eig(&self, v: &[f64], ws: &mut Workspace) -> StepEig {
        let n = self.n;
        for i in 0..n {
            for j in 0..n {
                ws.h[(i, j)] = self.static_h[i * n + j];
            }
        }
        for (c, entries) in self.controls.iter().enumerate() {
            let amp = self.transfer * v[c];
            if amp == 0.0 {
                continue;
            }
            for &(i, j, x) in entries {
                ws.h[(i, j)] += amp * x;
            }
        }
        let eig = SymmetricEigen::new(ws.h.clone());
        for i in 0..n {
            for j in 0..n {
                ws.v[i * n + j] = eig.eigenvectors[(i, j)];
            }
        }
        StepEig { values: eig.eigenvalues.iter().copied().collect() }
    }

    /// Replaces `r` by U_k·r (or U_k†·r when `adjoint`), given the step eigen-data in `ws`.
    fn apply_step(&self, eig: &StepEig, dt: f64, adjoint: bool, r: &mut Split, ws: &mut Workspace) {
        let n = self.n;
        gemm_tn(&ws.v, &r.re, &mut ws.t_re, n);
        gemm_tn(&ws.v, &r.im, &mut ws.t_im, n);
        let sign = if adjoint { 1.0 } else { -1.0 };
        for i in 0..n {
            let (s, c) = (sign * TAU * eig.values[i] * dt).sin_cos();
            for j in 0..n {
                let k = i * n + j;
                let (a, b) = (ws.t_re[k], ws.t_im[k]);
                ws.t_re[k] = c * a - s * b;
                ws.t_im[k] = s * a + c * b;
            }
        }
        gemm(&ws.v, &ws.t_re, &mut r.re, n);
        gemm(&ws.v, &ws.t_im, &mut r.im, n);
    }

    /// Time-ordered product U = U_N ⋯ U_1 for per-channel control samples
    /// (`controls[c][k]`, in V) with step length `dt`.
    pub fn evolve(&self, controls: &[Vec<f64>], dt: f64) -> ComplexMatrix {
        let steps = self.check_controls(controls);
        let mut ws = Workspace::new(self.n);
        let mut r = Split::identity(self.n);
        let mut v = vec![0.0; self.controls.len()];
        for k in 0..steps {
            for (c, vc) in v.iter_mut().enumerate() {
                *vc = controls[c][k];
            }
            let eig = self.step_eig(&v, &mut ws);
            self.apply_step(&eig, dt, false, &mut r, &mut ws);
        }
        r.to_matrix()
    }

    fn check_controls(&self, controls: &[Vec<f64>]) -> usize {
        assert_eq!(controls.len(), self.controls.len(), "one control trace per transmon");
        let steps = controls.first().map_or(0, Vec::len);
        assert!(controls.iter().all(|c| c.len() == steps), "control traces differ in length");
        steps
    }

    /// Overlap `o = tr(B†U)` and its derivative with respect to every control
    /// sample, `grad[c][k] = ∂o/∂v_c[k]`.
    pub fn overlap_gradient(&self, controls: &[Vec<f64>], dt: f64, b: &ComplexMatrix) -> (C64, ComplexMatrix, Vec<Vec<C64>>) {
        let steps = self.check_controls(controls);
        let n = self.n;
        let mut ws = Workspace::new(n);
        let mut v = vec![0.0; self.controls.len()];

        // Forward pass, keeping the step eigensystems when they fit.
        let cache = steps * n * n <= EIG_CACHE_LIMIT;
        let mut cached_vecs = Vec::with_capacity(if cache { steps * n * n } else { 0 });
        let mut cached_vals = Vec::with_capacity(if cache { steps * n } else { 0 });
        let mut fwd = Split::identity(n);
        for k in 0..steps {
            for (c, vc) in v.iter_mut().enumerate() {
                *vc = controls[c][k];
            }
            let eig = self.step_eig(&v, &mut ws);
            self.apply_step(&eig, dt, false, &mut fwd, &mut ws);
            if cache {
                cached_vecs.extend_from_slice(&ws.v);
                cached_vals.extend_from_slice(&eig.values);
            }
        }
        let u = fwd.to_matrix();
        let overlap = trace_overlap(b, &u);

        let mut r = Split::from_matrix(&u);
        let mut l = Split::from_matrix(&b.adjoint());
        let mut grad = vec![vec![C64::new(0.0, 0.0); steps]; self.controls.len()];

        let mut a_re = vec![0.0; n * n];
        let mut a_im = vec![0.0; n * n];
        let mut bm_re = vec![0.0; n * n];
        let mut bm_im = vec![0.0; n * n];
        let mut c_re = vec![0.0; n * n];
        let mut c_im = vec![0.0; n * n];
        let mut scratch = vec![0.0; n * n];
        let mut xv = vec![0.0; n * n];
        let mut w = vec![0.0; n * n];
        let mut phi = vec![C64::new(0.0, 0.0); n * n];

        for k in (0..steps).rev() {
            let eig = if cache {
                ws.v.copy_from_slice(&cached_vecs[k * n * n..(k + 1) * n * n]);
                StepEig { values: cached_vals[k * n..(k + 1) * n].to_vec() }
            } else {
                for (c, vc) in v.iter_mut().enumerate() {
                    *vc = controls[c][k];
                }
                self.step_eig(&v, &mut ws)
            };
            let e: Vec<C64> = eig.values.iter().map(|&lam| C64::from_polar(1.0, -TAU * lam * dt)).collect();

            // A = Vᵀ R_{k-1} = E*·(Vᵀ R_k); R_{k-1} = V·A.
            gemm_tn(&ws.v, &r.re, &mut a_re, n);
            gemm_tn(&ws.v, &r.im, &mut a_im, n);
            for i in 0..n {
                let ec = e[i].conj();
                for j in 0..n {
                    let idx = i * n + j;
                    let z = ec * C64::new(a_re[idx], a_im[idx]);
                    a_re[idx] = z.re;
                    a_im[idx] = z.im;
                }
            }
            gemm(&ws.v, &a_re, &mut r.re, n);
            gemm(&ws.v, &a_im, &mut r.im, n);

            // Bm = L_k·V.
            gemm(&l.re, &ws.v, &mut bm_re, n);
            gemm(&l.im, &ws.v, &mut bm_im, n);

            // C = A·Bm = Vᵀ (R_{k-1} L_k) V.
            gemm(&a_re, &bm_re, &mut c_re, n);
            gemm(&a_im, &bm_im, &mut scratch, n);
            c_re.iter_mut().zip(&scratch).for_each(|(x, y)| *x -= y);
            gemm(&a_re, &bm_im, &mut c_im, n);
            gemm(&a_im, &bm_re, &mut scratch, n);
            c_im.iter_mut().zip(&scratch).for_each(|(x, y)| *x += y);

            // Φ_ij = (e_i − e_j)/(λ_i − λ_j), evaluated stably.
            for i in 0..n {
                for j in 0..n {
                    let x = -TAU * (eig.values[i] - eig.values[j]) * dt;
                    phi[i * n + j] = e[j] * (-TAU * dt) * expm1_over_x(x);
                }
            }

            for (c, entries) in self.controls.iter().enumerate() {
                // W = Vᵀ X_c V, with X_c sparse.
                xv.iter_mut().for_each(|x| *x = 0.0);
                for &(i, j, x) in entries {
                    let src = &ws.v[j * n..(j + 1) * n];
                    let dst = &mut xv[i * n..(i + 1) * n];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += x * s;
                    }
                }
                gemm_tn(&ws.v, &xv, &mut w, n);
                let mut acc = C64::new(0.0, 0.0);
                for idx in 0..n * n {
                    acc += C64::new(c_re[idx], c_im[idx]) * phi[idx] * w[idx];
                }
                grad[c][k] = acc * self.transfer;
            }

            // L_{k-1} = L_k U_k = (Bm·E)·Vᵀ.
            for i in 0..n {
                for j in 0..n {
                    let idx = i * n + j;
                    let z = C64::new(bm_re[idx], bm_im[idx]) * e[j];
                    bm_re[idx] = z.re;
                    bm_im[idx] = z.im;
                }
            }
            gemm_nt(&bm_re, &ws.v, &mut l.re, n);
            gemm_nt(&bm_im, &ws.v, &mut l.im, n);
        }
        (overlap, u, grad)
    }
}

/// (e^{ix} − 1)/x, continuous at x = 0.
fn expm1_over_x(x: f64) -> C64 {
    if x.abs() < 1e-4 {
        // i·(1 + ix/2 − x²/6 − ix³/24)
        C64::new(-x / 2.0 + x * x * x / 24.0, 1.0 - x * x / 6.0)
    } else {
        (C64::new(0.0, x).exp() - 1.0) / x
    }
}

/// tr(B†U) = Σ_ij conj(B_ij)·U_ij.
pub fn trace_overlap(b: &ComplexMatrix, u: &ComplexMatrix) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..u.rows() {
        for j in 0..u.cols() {
            acc += b.get(i, j).conj() * u.get(i, j);
        }
    }
    acc
}
