//! Univariate Student-t distribution.

use super::special::{beta_reg_xy, ln_gamma};
use crate::scalar::{c, Scalar};

/// Distribution function of the standard Student-t with `dof` degrees of
/// freedom, evaluated through the incomplete beta integral.
///
/// The lower tail is computed directly rather than as a complement, so small
/// probabilities keep their relative accuracy.
pub fn t_cdf<T: Scalar>(x: T, dof: T) -> T {
    if x.is_nan() || dof.is_nan() {
        return T::nan();
    }
    if x == T::zero() {
        return c(0.5);
    }
    if x == T::infinity() {
        return T::one();
    }
    if x == T::neg_infinity() {
        return T::zero();
    }
    let x2 = x * x;
    // ν/(ν+x²) and its complement, each formed without cancellation
    let xb = T::one() / (T::one() + x2 / dof);
    let yb = T::one() / (T::one() + dof / x2);
    let tail = c::<T>(0.5) * beta_reg_xy(dof * c(0.5), c(0.5), xb, yb);
    if x < T::zero() {
        tail
    } else {
        T::one() - tail
    }
}

/// Log-density of the standard Student-t.
pub fn t_log_pdf<T: Scalar>(x: T, dof: T) -> T {
    let half: T = c(0.5);
    ln_gamma((dof + T::one()) * half)
        - ln_gamma(dof * half)
        - half * (dof * T::PI()).ln()
        - (dof + T::one()) * half * (x * x / dof).ln_1p()
}

pub fn t_pdf<T: Scalar>(x: T, dof: T) -> T {
    t_log_pdf(x, dof).exp()
}
