//! Dense polynomials stored as ascending coefficient vectors.

use crate::scalar::Real;

pub fn eval<T: Real>(coeffs: &[T], x: T) -> T {
    coeffs.iter().rev().fold(T::zero(), |acc, &c| acc * x + c)
}

/// `x · p`.
pub fn shift<T: Real>(p: &[T]) -> Vec<T> {
    let mut out = Vec::with_capacity(p.len() + 1);
    out.push(T::zero());
    out.extend_from_slice(p);
    out
}

/// `p + s · q`, sized to the longer operand.
pub fn axpy<T: Real>(p: &[T], s: T, q: &[T]) -> Vec<T> {
    let len = p.len().max(q.len());
    (0..len)
        .map(|k| {
            let a = p.get(k).copied().unwrap_or_else(T::zero);
            let b = q.get(k).copied().unwrap_or_else(T::zero);
            a + s * b
        })
        .collect()
}

pub fn max_abs<T: Real>(p: &[T]) -> T {
    p.iter().fold(T::zero(), |acc, &c| acc.max_abs(c))
}

/// Largest coefficient difference relative to `max(1, max|q|)`.
pub fn rel_diff<T: Real>(p: &[T], q: &[T]) -> f64 {
    let scale = max_abs(q).to_f64().max(1.0);
    let diff = axpy(p, -T::one(), q);
    max_abs(&diff).to_f64() / scale
}
