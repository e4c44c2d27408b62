// SPDX-License-Identifier: Apache-2.0

//! Geometric slicing `base^{l−1} < x ≤ base^l` and tolerant comparisons.

/// `base^l`, the single power routine used for every slice boundary so that
/// classification and later verification see identical numbers.
pub fn power(base: f64, l: i32) -> f64 {
    base.powi(l)
}

/// The unique `l` with `base^{l−1} < x ≤ base^l`, for `x > 0` and `base > 1`.
pub fn scale_index(x: f64, base: f64) -> i32 {
    debug_assert!(x > 0.0 && x.is_finite() && base > 1.0);
    let mut l = (x.ln() / base.ln()).ceil() as i32;
    while power(base, l - 1) >= x {
        l -= 1;
    }
    while power(base, l) < x {
        l += 1;
    }
    l
}

/// `lhs ≤ rhs` up to a relative slack of `tol`.
pub fn le_rel(lhs: f64, rhs: f64, tol: f64) -> bool {
    lhs <= rhs + tol * lhs.abs().max(rhs.abs())
}

/// `|a − b| ≤ tol·max(|a|, |b|)`.
pub fn close_rel(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Relative slack `(rhs − lhs)/max(|lhs|, |rhs|)`, zero when both vanish.
pub fn relative_margin(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (rhs - lhs) / scale
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn boundaries_go_to_the_upper_slice() {
        assert_eq!(scale_index(8.0, 2.0), 3);
        assert_eq!(scale_index(4.0, 2.0), 2);
        assert_eq!(scale_index(4.000001, 2.0), 3);
        assert_eq!(scale_index(1.0, 2.0), 0);
        assert_eq!(scale_index(0.75, 2.0), 0);
        assert_eq!(scale_index(0.5, 2.0), -1);
    }

    proptest! {
        #[test]
        fn slice_contains_value(x in 1e-8f64..1e8, base in 1.01f64..10.0) {
            let l = scale_index(x, base);
            prop_assert!(power(base, l - 1) < x);
            prop_assert!(x <= power(base, l));
        }
    }
}
