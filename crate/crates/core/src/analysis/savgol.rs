//! Savitzky-Golay smoothing with mirrored edges.

use nalgebra::{DMatrix, DVector};

use crate::error::{CoreError, Result};

/// Convolution weights that evaluate the least-squares polynomial of degree
/// `order` at the centre of a `window`-point frame.
pub fn savgol_coefficients(window: usize, order: usize) -> Result<Vec<f64>> {
    if window.is_multiple_of(2) {
        return Err(CoreError::InvalidFilter(format!("window {window} must be odd")));
    }
    if order >= window {
        return Err(CoreError::InvalidFilter(format!("order {order} must be below window {window}")));
    }
    let half = (window / 2) as i64;
    let design = DMatrix::from_fn(window, order + 1, |r, c| ((r as i64 - half) as f64).powi(c as i32));
    let normal = design.transpose() * &design;
    let mut unit = DVector::zeros(order + 1);
    unit[0] = 1.0;
    // Row 0 of (A^T A)^-1 A^T, i.e. A (A^T A)^-1 e0 since A^T A is symmetric.
    let solved = normal
        .cholesky()
        .ok_or_else(|| CoreError::InvalidFilter("normal equations not positive definite".into()))?
        .solve(&unit);
    Ok((design * solved).iter().copied().collect())
}

/// Smooths `trace`, reflecting it about its first and last samples so the
/// output keeps the input length.
pub fn savgol(trace: &[f64], window: usize, order: usize) -> Result<Vec<f64>> {
    let weights = savgol_coefficients(window, order)?;
    let n = trace.len();
    if n < window {
        return Err(CoreError::TooShort { needed: window, got: n });
    }
    let half = window / 2;
    let at = |i: isize| -> f64 {
        let last = n as isize - 1;
        let j = if i < 0 {
            -i
        } else if i > last {
            2 * last - i
        } else {
            i
        };
        trace[j as usize]
    };
    Ok((0..n as isize)
        .map(|i| weights.iter().enumerate().map(|(k, w)| w * at(i + k as isize - half as isize)).sum())
        .collect())
}
