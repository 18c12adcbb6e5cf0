//! Real coordinates of Hermitian matrices.
//!
//! An n×n Hermitian matrix maps to n² reals: the n diagonal entries, then
//! `(Re, Im)` of each strictly-upper entry in row-major order.

use nalgebra::DMatrix;

use crate::angular::C64;

pub(crate) fn len(n: usize) -> usize {
    n * n
}

pub(crate) fn write_coords(m: &DMatrix<C64>, out: &mut [f64]) {
    let n = m.nrows();
    debug_assert_eq!(out.len(), n * n);
    for i in 0..n {
        out[i] = m[(i, i)].re;
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            out[k] = m[(i, j)].re;
            out[k + 1] = m[(i, j)].im;
            k += 2;
        }
    }
}

pub(crate) fn from_coords(n: usize, x: &[f64]) -> DMatrix<C64> {
    debug_assert_eq!(x.len(), n * n);
    let mut m = DMatrix::from_element(n, n, C64::new(0.0, 0.0));
    for i in 0..n {
        m[(i, i)] = C64::new(x[i], 0.0);
    }
    let mut k = n;
    for i in 0..n {
        for j in (i + 1)..n {
            let z = C64::new(x[k], x[k + 1]);
            m[(i, j)] = z;
            m[(j, i)] = z.conj();
            k += 2;
        }
    }
    m
}

/// The k-th Hermitian basis element (unit coordinate k).
pub(crate) fn unit(n: usize, k: usize) -> DMatrix<C64> {
    let mut x = vec![0.0; n * n];
    x[k] = 1.0;
    from_coords(n, &x)
}

/// Row-major `(Re, Im)` pairs of a general complex block.
pub(crate) fn write_complex(m: &DMatrix<C64>, out: &mut [f64]) {
    let (r, c) = m.shape();
    debug_assert_eq!(out.len(), 2 * r * c);
    for i in 0..r {
        for j in 0..c {
            let z = m[(i, j)];
            out[2 * (i * c + j)] = z.re;
            out[2 * (i * c + j) + 1] = z.im;
        }
    }
}

pub(crate) fn complex_from(rows: usize, cols: usize, x: &[f64]) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |i, j| {
        C64::new(x[2 * (i * cols + j)], x[2 * (i * cols + j) + 1])
    })
}

pub(crate) fn anti_hermiticity(m: &DMatrix<C64>) -> f64 {
    (m - m.adjoint()).norm()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinates_round_trip() {
        let x: Vec<f64> = (0..16).map(|k| (k as f64 * 0.37).sin()).collect();
        let m = from_coords(4, &x);
        assert_eq!(anti_hermiticity(&m), 0.0);
        let mut back = vec![0.0; 16];
        write_coords(&m, &mut back);
        assert_eq!(x, back);
        let mut c = vec![0.0; 2 * 12];
        let g = complex_from(3, 4, &(0..24).map(|k| k as f64).collect::<Vec<_>>());
        write_complex(&g, &mut c);
        assert_eq!(c, (0..24).map(|k| k as f64).collect::<Vec<_>>());
    }
}
