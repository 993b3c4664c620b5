//! Amplitude-invariant Clarke/Park transforms.
//!
//! `a = d·cos θ − q·sin θ`; phases b and c use θ − 2π/3 and θ + 2π/3.
//! Power in the dq frame is `1.5·(v_d·i_d + v_q·i_q)`.

use crate::scalar::{lit, third_turn, Scalar};

/// abc → dq. Any zero-sequence component drops out.
pub fn park<T: Scalar>(abc: [T; 3], theta: T) -> (T, T) {
    let k = lit::<T>(2.0 / 3.0);
    let (s0, c0) = theta.sin_cos();
    let (s1, c1) = (theta - third_turn()).sin_cos();
    let (s2, c2) = (theta + third_turn()).sin_cos();
    let d = k * (abc[0] * c0 + abc[1] * c1 + abc[2] * c2);
    let q = -k * (abc[0] * s0 + abc[1] * s1 + abc[2] * s2);
    (d, q)
}

/// dq → abc.
pub fn inv_park<T: Scalar>(d: T, q: T, theta: T) -> [T; 3] {
    let phase = |th: T| {
        let (s, c) = th.sin_cos();
        d * c - q * s
    };
    [phase(theta), phase(theta - third_turn()), phase(theta + third_turn())]
}

/// Removes the common-mode part of a three-phase set.
pub fn remove_common_mode<T: Scalar>(abc: [T; 3]) -> [T; 3] {
    let mean = (abc[0] + abc[1] + abc[2]) / lit(3.0);
    [abc[0] - mean, abc[1] - mean, abc[2] - mean]
}

/// Wraps an angle to [0, 2π).
pub fn wrap_angle<T: Scalar>(theta: T) -> T {
    let w = theta % T::TAU();
    if w < T::zero() {
        w + T::TAU()
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn round_trip_and_common_mode() {
        let theta = 0.7;
        let abc = inv_park(3.0, -1.5, theta);
        let (d, q) = park(abc, theta);
        assert_abs_diff_eq!(d, 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(q, -1.5, epsilon = 1e-12);
        let shifted = abc.map(|v| v + 10.0);
        let (d2, q2) = park(shifted, theta);
        assert_abs_diff_eq!(d2, d, epsilon = 1e-12);
        assert_abs_diff_eq!(q2, q, epsilon = 1e-12);
        let cm = remove_common_mode(shifted);
        assert_abs_diff_eq!(cm[0] + cm[1] + cm[2], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn power_invariance() {
        let th = 2.1;
        let v = inv_park(400.0, 30.0, th);
        let i = inv_park(-120.0, 900.0, th);
        let p_abc: f64 = v.iter().zip(&i).map(|(a, b)| a * b).sum();
        assert_abs_diff_eq!(p_abc, 1.5 * (400.0 * -120.0 + 30.0 * 900.0), epsilon = 1e-6);
    }

    #[test]
    fn wraps() {
        assert_abs_diff_eq!(wrap_angle(-0.5), std::f64::consts::TAU - 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(wrap_angle(7.0), 7.0 - std::f64::consts::TAU, epsilon = 1e-15);
    }
}
