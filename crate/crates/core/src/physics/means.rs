//! Two-point means used by the entropy conservative fluxes.

use super::PhysicsError;

/// Below this value of `f^2` the series branch of [`logmean`] is used.
const SERIES_THRESHOLD: f64 = 1e-4;

/// Logarithmic mean `(x - y) / (ln x - ln y)` with its continuous extension at `x = y`.
///
/// With `f = (x - y) / (x + y)` the mean equals `(x + y) / 2 / (atanh(f) / f)`;
/// near equal arguments `atanh(f) / f` is replaced by its series `1 + f^2/3 + f^4/5 + f^6/7`.
pub fn logmean(x: f64, y: f64) -> Result<f64, PhysicsError> {
    if !(x > 0.0 && y > 0.0) {
        return Err(PhysicsError::NonPositiveMeanArgument { x, y });
    }
    Ok(logmean_unchecked(x, y))
}

/// [`logmean`] without the positivity check, for hot loops over admissible states.
#[inline]
pub fn logmean_unchecked(x: f64, y: f64) -> f64 {
    let f = (x - y) / (x + y);
    let u = f * f;
    if u < SERIES_THRESHOLD {
        let series = 1.0 + u * (1.0 / 3.0 + u * (1.0 / 5.0 + u * (1.0 / 7.0)));
        0.5 * (x + y) / series
    } else {
        (x - y) / (x.ln() - y.ln())
    }
}

/// Product mean `(x_L y_R + x_R y_L) / 2`.
#[inline]
pub fn prodmean(x_left: f64, x_right: f64, y_left: f64, y_right: f64) -> f64 {
    0.5 * (x_left * y_right + x_right * y_left)
}

/// Arithmetic mean.
#[inline]
pub fn avg(left: f64, right: f64) -> f64 {
    0.5 * (left + right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn equal_arguments() {
        assert_eq!(logmean(1.0, 1.0).unwrap(), 1.0);
        assert_eq!(logmean(3.7, 3.7).unwrap(), 3.7);
    }

    #[test]
    fn well_separated_arguments() {
        assert_relative_eq!(
            logmean(1.0, 2.0).unwrap(),
            1.0 / std::f64::consts::LN_2,
            max_relative = 1e-15
        );
        assert_relative_eq!(logmean(1.0, 2.0).unwrap(), 1.442695040888963, max_relative = 1e-14);
    }

    #[test]
    fn near_equal_matches_taylor_series() {
        // ε / ln(1 + ε) = 1 + ε/2 - ε²/12 + ε³/24 - 19ε⁴/720 + O(ε⁵)
        let eps = 1e-9_f64;
        let taylor = 1.0 + eps / 2.0 - eps * eps / 12.0 + eps.powi(3) / 24.0
            - 19.0 * eps.powi(4) / 720.0;
        let value = logmean(1.0, 1.0 + eps).unwrap();
        assert!(((value - taylor) / taylor).abs() <= 1e-13);
    }

    #[test]
    fn branches_agree_at_threshold() {
        // f^2 just above / below the switch
        let y: f64 = 1.0;
        for f in [0.0099f64, 0.01, 0.0101] {
            let x = y * (1.0 + f) / (1.0 - f);
            let direct = (x - y) / (x.ln() - y.ln());
            assert_relative_eq!(logmean(x, y).unwrap(), direct, max_relative = 1e-13);
        }
    }

    #[test]
    fn rejects_non_positive() {
        assert!(logmean(0.0, 1.0).is_err());
        assert!(logmean(1.0, -2.0).is_err());
        assert!(logmean(f64::NAN, 1.0).is_err());
    }

    #[test]
    fn prodmean_examples() {
        assert_eq!(prodmean(2.0, 2.0, 3.0, 3.0), 6.0);
        assert_eq!(prodmean(1.0, 0.0, 0.0, 5.0), 2.5);
    }

    proptest! {
        #[test]
        fn logmean_bounded_and_symmetric(x in 1e-3f64..1e3, y in 1e-3f64..1e3) {
            let m = logmean(x, y).unwrap();
            let lo = x.min(y);
            let hi = x.max(y);
            prop_assert!(m >= lo * (1.0 - 1e-15) && m <= hi * (1.0 + 1e-15));
            prop_assert_eq!(m, logmean(y, x).unwrap());
        }

        #[test]
        fn prodmean_swap_symmetric(a in -10.0f64..10.0, b in -10.0f64..10.0,
                                   c in -10.0f64..10.0, d in -10.0f64..10.0) {
            prop_assert_eq!(prodmean(a, b, c, d), prodmean(b, a, d, c));
        }
    }
}
