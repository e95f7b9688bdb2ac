//! Linearized least-squares rational fitting.

use nalgebra::DMatrix;

use crate::poly::{Polynomial, C64};

#[derive(Debug, Clone)]
pub struct RationalFit {
    pub num: Polynomial,
    pub den: Polynomial,
    /// Smallest over largest singular value; near zero for consistent data.
    pub residual_ratio: f64,
    /// Second smallest over largest singular value; near zero when the null
    /// space has dimension above one.
    pub gap_ratio: f64,
}

/// Fits `y ≈ P(x)/Q(x)` with `deg P ≤ dn`, `deg Q ≤ dd` from `P(x) - y Q(x) = 0`.
///
/// Columns are normalized before the SVD; the coefficient vector is the right
/// singular vector of the smallest singular value.
pub fn fit_rational(xs: &[C64], ys: &[C64], dn: usize, dd: usize) -> RationalFit {
    let cols = dn + dd + 2;
    let rows = xs.len().max(cols);
    let mut a = DMatrix::<C64>::zeros(rows, cols);
    for (i, (&x, &y)) in xs.iter().zip(ys).enumerate() {
        let mut p = C64::new(1.0, 0.0);
        for j in 0..=dn.max(dd) {
            if j <= dn {
                a[(i, j)] = p;
            }
            if j <= dd {
                a[(i, dn + 1 + j)] = -y * p;
            }
            p *= x;
        }
    }
    let scales: Vec<f64> = (0..cols)
        .map(|j| {
            let n = a.column(j).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    for (j, s) in scales.iter().enumerate() {
        a.column_mut(j).unscale_mut(*s);
    }
    let svd = a.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let smax = svd.singular_values[order[order.len() - 1]].max(f64::MIN_POSITIVE);
    let imin = order[0];
    let residual_ratio = svd.singular_values[imin] / smax;
    let gap_ratio = order
        .get(1)
        .map(|&i| svd.singular_values[i] / smax)
        .unwrap_or(1.0);
    let v: Vec<C64> = (0..cols)
        .map(|j| v_t[(imin, j)].conj() / scales[j])
        .collect();
    RationalFit {
        num: Polynomial::new(v[..=dn].to_vec()),
        den: Polynomial::new(v[dn + 1..].to_vec()),
        residual_ratio,
        gap_ratio,
    }
}
