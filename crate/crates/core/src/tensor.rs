//! Dense row-major tensors (last index fastest) and mode-`k` matrix products.

use std::ops::{Add, Mul};

use faer::MatRef;

/// Row-major strides for `shape`.
pub fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for i in (0..shape.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * shape[i + 1];
    }
    s
}

/// `out = data ×_axis A`: contracts index `axis` of `data` with the columns of
/// `A` (`A.ncols() == shape[axis]`). Returns the new data and shape.
pub fn mode_product<T>(data: &[T], shape: &[usize], axis: usize, a: MatRef<'_, T>) -> (Vec<T>, Vec<usize>)
where
    T: Copy + Default + Add<Output = T> + Mul<Output = T>,
{
    assert_eq!(a.ncols(), shape[axis], "mode size mismatch");
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let n_in = shape[axis];
    let n_out = a.nrows();
    let mut out = vec![T::default(); outer * n_out * inner];
    for o in 0..outer {
        let src = &data[o * n_in * inner..(o + 1) * n_in * inner];
        let dst = &mut out[o * n_out * inner..(o + 1) * n_out * inner];
        for i in 0..n_out {
            let row = &mut dst[i * inner..(i + 1) * inner];
            for j in 0..n_in {
                let c = a[(i, j)];
                let col = &src[j * inner..(j + 1) * inner];
                for (r, &v) in row.iter_mut().zip(col) {
                    *r = *r + c * v;
                }
            }
        }
    }
    let mut new_shape = shape.to_vec();
    new_shape[axis] = n_out;
    (out, new_shape)
}

/// Applies one matrix per axis, in axis order.
pub fn multi_mode_product<T>(data: &[T], shape: &[usize], mats: &[MatRef<'_, T>]) -> (Vec<T>, Vec<usize>)
where
    T: Copy + Default + Add<Output = T> + Mul<Output = T>,
{
    assert_eq!(mats.len(), shape.len());
    let mut cur = data.to_vec();
    let mut cur_shape = shape.to_vec();
    for (axis, m) in mats.iter().enumerate() {
        let (d, s) = mode_product(&cur, &cur_shape, axis, *m);
        cur = d;
        cur_shape = s;
    }
    (cur, cur_shape)
}
