use crate::scalar::Scalar;

/// Signed power T_a(x) = sign(x)|x|^a.
#[inline]
pub fn signed_power<T: Scalar>(x: T, a: T) -> T {
    if x == T::zero() {
        return T::zero();
    }
    x.signum() * x.abs().powf(a)
}

/// Elementwise [`signed_power`].
pub fn signed_power_vec<T: Scalar>(xs: &[T], a: T) -> Vec<T> {
    xs.iter().map(|&x| signed_power(x, a)).collect()
}
