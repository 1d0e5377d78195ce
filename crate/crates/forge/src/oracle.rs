//! Independent brute-force references, always evaluated at full f64/c64.
//!
//! These functions deliberately share no code with the primitives or kernel
//! plans: direct O(n^2)/O(n^3) evaluation, plain running-sum accumulation
//! (the streaming side uses balanced trees), and plain `f64`/`Complex64`
//! values instead of precision-tagged samples. Agreement between the two
//! paths is evidence, not tautology.

use num_complex::Complex64;
use std::f64::consts::PI;

/// Direct O(n^2) DFT: y[k] = sum_m x[m] * e^(-2*pi*i*m*k/n).
pub fn oracle_dft(x: &[Complex64]) -> Vec<Complex64> {
    let n = x.len();
    let mut y = vec![Complex64::new(0.0, 0.0); n];
    for (k, out) in y.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, &xm) in x.iter().enumerate() {
            let angle = -2.0 * PI * (m * k % n) as f64 / n as f64;
            acc += xm * Complex64::new(angle.cos(), angle.sin());
        }
        *out = acc;
    }
    y
}

/// Inverse DFT through the conjugation identity, used for self-consistency.
pub fn oracle_idft(y: &[Complex64]) -> Vec<Complex64> {
    let n = y.len() as f64;
    let conj: Vec<Complex64> = y.iter().map(|v| v.conj()).collect();
    oracle_dft(&conj).iter().map(|v| v.conj() / n).collect()
}

/// Row-major complex matrix for oracle-side GEMM.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<Complex64>,
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> CMatrix {
        assert_eq!(rows * cols, data.len());
        CMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> CMatrix {
        CMatrix {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> CMatrix {
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Row-major real matrix for oracle-side QR.
#[derive(Clone, Debug, PartialEq)]
pub struct RMatrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl RMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> RMatrix {
        assert_eq!(rows * cols, data.len());
        RMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> RMatrix {
        RMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity_tall(rows: usize, cols: usize) -> RMatrix {
        let mut m = RMatrix::zeros(rows, cols);
        for j in 0..cols.min(rows) {
            m[(j, j)] = 1.0;
        }
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

impl std::ops::Index<(usize, usize)> for RMatrix {
    type Output = f64;

    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for RMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Triple-loop matrix product with c64 accumulation.
pub fn oracle_gemm(a: &CMatrix, b: &CMatrix) -> CMatrix {
    assert_eq!(a.cols, b.rows, "inner dimensions must agree");
    let mut c = CMatrix::zeros(a.rows, b.cols);
    for i in 0..a.rows {
        for j in 0..b.cols {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..a.cols {
                acc += a[(i, k)] * b[(k, j)];
            }
            c[(i, j)] = acc;
        }
    }
    c
}

/// Householder QR executed verbatim at f64: overwrites A in place, returning
/// the upper-triangular R on top with ~0 below the diagonal. Q is not stored.
pub fn oracle_qr(a: &RMatrix) -> RMatrix {
    assert!(a.rows >= a.cols, "need rows >= cols");
    let m = a.rows;
    let ncols = a.cols;
    let mut r = a.clone();
    for k in 0..ncols {
        let len = m - k;
        let x: Vec<f64> = (0..len).map(|t| r[(k + t, k)]).collect();
        let d1: f64 = x.iter().map(|v| v * v).sum();
        let d2 = d1.sqrt();
        let sign = if x[0] < 0.0 { -1.0 } else { 1.0 };
        let mut v = x.clone();
        v[0] = x[0] + sign * d2;
        let d3 = d1 - x[0] * x[0] + v[0] * v[0];
        if d3 == 0.0 {
            continue; // zero column, nothing to reflect
        }
        let tau = -2.0 / d3;
        for j in k..ncols {
            let y: Vec<f64> = (0..len).map(|t| r[(k + t, j)]).collect();
            let d4: f64 = v.iter().zip(&y).map(|(vi, yi)| vi * yi).sum();
            let d5 = tau * d4;
            for t in 0..len {
                r[(k + t, j)] = d5 * v[t] + y[t];
            }
        }
    }
    r
}

/// Direct index remap: out[j*n0 + i] = in[i*n1 + j].
pub fn oracle_permute(input: &[Complex64], n0: usize, n1: usize) -> Vec<Complex64> {
    assert_eq!(input.len(), n0 * n1);
    let mut out = vec![Complex64::new(0.0, 0.0); input.len()];
    for i in 0..n0 {
        for j in 0..n1 {
            out[j * n0 + i] = input[i * n1 + j];
        }
    }
    out
}
