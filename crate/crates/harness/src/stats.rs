//! Summary statistics for comparing runs bin by bin.

/// Sample mean and unbiased variance.
pub fn mean_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = if xs.len() > 1 {
        xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Difference of means `a − b` and its standard error
/// `sqrt(s_a²/n_a + s_b²/n_b)`.
pub fn mean_difference(a: &[f64], b: &[f64]) -> (f64, f64) {
    let (ma, va) = mean_var(a);
    let (mb, vb) = mean_var(b);
    (ma - mb, (va / a.len() as f64 + vb / b.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_computed() {
        let (m, v) = mean_var(&[1.0, 2.0, 3.0, 6.0]);
        assert_eq!(m, 3.0);
        assert!((v - 14.0 / 3.0).abs() < 1e-12);
        let (d, se) = mean_difference(&[1.0, 2.0, 3.0, 6.0], &[0.0, 2.0]);
        assert_eq!(d, 2.0);
        assert!((se - (14.0 / 12.0 + 1.0f64).sqrt()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn difference_is_antisymmetric_and_shift_invariant(
            a in prop::collection::vec(-5.0f64..5.0, 2..30),
            b in prop::collection::vec(-5.0f64..5.0, 2..30),
            shift in -3.0f64..3.0,
        ) {
            let (d, se) = mean_difference(&a, &b);
            let (d2, se2) = mean_difference(&b, &a);
            prop_assert!((d + d2).abs() < 1e-12);
            prop_assert!((se - se2).abs() < 1e-12 && se >= 0.0);
            let moved: Vec<f64> = a.iter().map(|x| x + shift).collect();
            let (d3, se3) = mean_difference(&moved, &b);
            prop_assert!((d3 - d - shift).abs() < 1e-9);
            prop_assert!((se3 - se).abs() < 1e-9);
        }
    }
}
