//! Small numerical kernels shared by the solver modules: uniform-grid
//! interpolation, quadrature, finite differences, phase unwrapping and a
//! Jacobi eigen-solver for real symmetric 3×3 matrices.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

/// Four-point Lagrange weights for a node at fractional offset `t` from
/// sample `k` on a uniform grid, using samples `k-1, k, k+1, k+2`.
#[inline]
pub(crate) fn cubic_weights(t: f64) -> [f64; 4] {
    let tm1 = t - 1.0;
    let tm2 = t - 2.0;
    let tp1 = t + 1.0;
    [
        -t * tm1 * tm2 / 6.0,
        tp1 * tm1 * tm2 / 2.0,
        -tp1 * t * tm2 / 2.0,
        tp1 * t * tm1 / 6.0,
    ]
}

/// Index of the first of four stencil samples around interval `k` together
/// with the offset of the evaluation point inside the stencil.
#[inline]
pub(crate) fn cubic_stencil(k: usize, t: f64, len: usize) -> (usize, f64) {
    debug_assert!(len >= 4);
    if k == 0 {
        (0, t - 1.0)
    } else if k + 2 >= len {
        let start = len - 4;
        (start, t + (k - start) as f64 - 1.0)
    } else {
        (k - 1, t)
    }
}

/// Cubic interpolation of complex samples inside interval `[k, k+1]`.
pub(crate) fn interp_cubic_c(values: &[Complex64], k: usize, t: f64) -> Complex64 {
    let len = values.len();
    if len < 4 {
        let k1 = (k + 1).min(len - 1);
        return values[k] * (1.0 - t) + values[k1] * t;
    }
    let (start, local) = cubic_stencil(k, t, len);
    let w = cubic_weights(local);
    values[start] * w[0] + values[start + 1] * w[1] + values[start + 2] * w[2] + values[start + 3] * w[3]
}

/// Cubic interpolation of real samples on a uniform grid starting at
/// `start`; clamped to the end samples outside the grid.
pub(crate) fn interp_cubic(values: &[f64], start: f64, step: f64, x: f64) -> f64 {
    let n = values.len();
    let pos = (x - start) / step;
    if n == 1 || pos <= 0.0 {
        return values[0];
    }
    if pos >= (n - 1) as f64 {
        return values[n - 1];
    }
    let k = pos.floor() as usize;
    let t = pos - k as f64;
    if n < 4 {
        return values[k] * (1.0 - t) + values[k + 1] * t;
    }
    let (s, local) = cubic_stencil(k, t, n);
    let w = cubic_weights(local);
    values[s] * w[0] + values[s + 1] * w[1] + values[s + 2] * w[2] + values[s + 3] * w[3]
}

/// Cumulative trapezoidal integral on a uniform grid, starting at 0.
pub(crate) fn cumulative_trapezoid(values: &[f64], step: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * step * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Centered first derivative with second-order one-sided stencils at the ends.
pub(crate) fn derivative(values: &[f64], step: f64) -> Vec<f64> {
    let n = values.len();
    let mut out = alloc::vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        let d = (values[1] - values[0]) / step;
        out[0] = d;
        out[1] = d;
        return out;
    }
    out[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * step);
    out[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * step);
    for i in 1..n - 1 {
        out[i] = (values[i + 1] - values[i - 1]) / (2.0 * step);
    }
    out
}

/// Removes 2π jumps between consecutive samples.
pub(crate) fn unwrap_phase(raw: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(raw.len());
    let mut offset = 0.0;
    let mut prev: Option<f64> = None;
    for &p in raw {
        if let Some(last) = prev {
            let mut d = p - last;
            while d > PI {
                d -= 2.0 * PI;
                offset -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
                offset += 2.0 * PI;
            }
        }
        prev = Some(p);
        out.push(p + offset);
    }
    out
}

/// Piecewise cubic Hermite interpolant with Fritsch–Carlson slopes on a
/// uniform grid. Preserves monotonicity of the data.
#[derive(Clone, Debug)]
pub(crate) struct MonotoneCubic {
    start: f64,
    step: f64,
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub(crate) fn new(start: f64, step: f64, values: Vec<f64>) -> Self {
        let n = values.len();
        let secants: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]) / step).collect();
        let mut slopes = alloc::vec![0.0; n];
        if n >= 2 {
            slopes[0] = secants[0];
            slopes[n - 1] = secants[n - 2];
            for i in 1..n - 1 {
                let (a, b) = (secants[i - 1], secants[i]);
                slopes[i] = if a * b <= 0.0 {
                    0.0
                } else {
                    // weighted harmonic mean (Fritsch–Butland), stays in the
                    // Fritsch–Carlson monotonicity region on uniform grids
                    2.0 * a * b / (a + b)
                };
            }
            for i in 0..n - 1 {
                let s = secants[i];
                if s == 0.0 {
                    slopes[i] = 0.0;
                    slopes[i + 1] = 0.0;
                    continue;
                }
                let alpha = slopes[i] / s;
                let beta = slopes[i + 1] / s;
                let r = alpha * alpha + beta * beta;
                if r > 9.0 {
                    let tau = 3.0 / r.sqrt();
                    slopes[i] = tau * alpha * s;
                    slopes[i + 1] = tau * beta * s;
                }
            }
        }
        Self { start, step, values, slopes }
    }

    pub(crate) fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.values.len();
        let pos = (x - self.start) / self.step;
        if pos <= 0.0 {
            return (0, 0.0);
        }
        let k = pos.floor() as usize;
        if k >= n - 1 {
            return (n - 2, 1.0);
        }
        (k, pos - k as f64)
    }

    /// Value at `x`, clamped to the end samples outside the grid.
    pub(crate) fn value(&self, x: f64) -> f64 {
        if self.values.len() == 1 {
            return self.values[0];
        }
        if x <= self.start {
            return self.values[0];
        }
        if x >= self.end() {
            return self.values[self.values.len() - 1];
        }
        let (k, t) = self.locate(x);
        let h = self.step;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        h00 * self.values[k] + h10 * h * self.slopes[k] + h01 * self.values[k + 1] + h11 * h * self.slopes[k + 1]
    }

    /// First derivative of the interpolant; zero outside the grid.
    pub(crate) fn slope(&self, x: f64) -> f64 {
        if self.values.len() == 1 || x < self.start || x > self.end() {
            return 0.0;
        }
        let (k, t) = self.locate(x);
        let h = self.step;
        let t2 = t * t;
        let d00 = 6.0 * t2 - 6.0 * t;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = -6.0 * t2 + 6.0 * t;
        let d11 = 3.0 * t2 - 2.0 * t;
        (d00 * self.values[k] + d01 * self.values[k + 1]) / h + d10 * self.slopes[k] + d11 * self.slopes[k + 1]
    }
}

pub(crate) type Matrix3 = [[f64; 3]; 3];

/// Eigen-decomposition of a real symmetric 3×3 matrix by cyclic Jacobi
/// rotations. Returns eigenvalues and the matching unit eigenvectors
/// (`vectors[i]` belongs to `values[i]`), unsorted.
pub(crate) fn symmetric_eigen(m: &Matrix3) -> ([f64; 3], [[f64; 3]; 3]) {
    let mut a = *m;
    let mut v: Matrix3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let scale = a.iter().flatten().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if scale == 0.0 {
        return ([0.0; 3], v);
    }
    for _sweep in 0..64 {
        let off = a[0][1].abs() + a[0][2].abs() + a[1][2].abs();
        if off <= f64::EPSILON * 1e-3 * scale {
            break;
        }
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() <= f64::MIN_POSITIVE {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let t = if theta == 0.0 { 1.0 } else { t };
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;
            for row in a.iter_mut() {
                let (akp, akq) = (row[p], row[q]);
                row[p] = c * akp - s * akq;
                row[q] = s * akp + c * akq;
            }
            let (rp, rq) = (a[p], a[q]);
            for k in 0..3 {
                a[p][k] = c * rp[k] - s * rq[k];
                a[q][k] = s * rp[k] + c * rq[k];
            }
            for row in v.iter_mut() {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }
    let values = [a[0][0], a[1][1], a[2][2]];
    let vectors = [
        [v[0][0], v[1][0], v[2][0]],
        [v[0][1], v[1][1], v[2][1]],
        [v[0][2], v[1][2], v[2][2]],
    ];
    (values, vectors)
}

#[inline]
pub(crate) fn dot3(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}
