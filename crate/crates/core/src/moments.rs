//! Moment sequences `s_j = ∫ x^j dμ` for the built-in weights and for raw
//! user-supplied lists. All sequences are stored normalized (`s_0 = 1`):
//! monic multiple orthogonal polynomials do not see a positive rescaling of
//! either measure.

use crate::error::{Error, Result};
use crate::linalg::{det, Matrix};
use crate::scalar::{cast, Real};

/// Where a moment sequence came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MomentSource {
    /// Weight `exp(-x² + c x)` on the real line.
    Hermite {
        c: f64,
    },
    /// Weight `x^alpha e^{-x}` on the half line.
    Laguerre {
        alpha: f64,
    },
    /// Discrete weight `(beta)_k c^k / k!` on the non-negative integers.
    Meixner {
        beta: f64,
        c: f64,
    },
    Raw,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence<T = f64> {
    values: Vec<T>,
    normalized: bool,
    source: MomentSource,
}

impl<T: Real> MomentSequence<T> {
    /// Wraps a list of moments, checking that it is non-empty and finite.
    pub fn new(values: Vec<T>, source: MomentSource) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Domain("empty moment sequence".into()));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("moment s_{j} is not finite")));
        }
        let normalized = values[0] == T::one();
        Ok(MomentSequence {
            values,
            normalized,
            source,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn source(&self) -> MomentSource {
        self.source
    }

    /// Highest available order `J`.
    pub fn max_order(&self) -> usize {
        self.values.len() - 1
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Rescales so that `s_0 = 1`.
    pub fn normalize(mut self) -> Result<Self> {
        let s0 = self.values[0];
        if s0 == T::zero() {
            return Err(Error::Domain("zero total mass (s_0 = 0)".into()));
        }
        for v in &mut self.values {
            *v /= s0;
        }
        self.values[0] = T::one();
        self.normalized = true;
        Ok(self)
    }

    pub fn to_f64(&self) -> MomentSequence<f64> {
        MomentSequence {
            values: self.values.iter().map(|v| v.to_f64()).collect(),
            normalized: self.normalized,
            source: self.source,
        }
    }

    pub fn cast<U: Real>(&self) -> MomentSequence<U> {
        MomentSequence {
            values: self.values.iter().map(|&v| cast(v)).collect(),
            normalized: self.normalized,
            source: self.source,
        }
    }
}

/// The two measures `(μ₁, μ₂)` defining a table.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentPair<T = f64> {
    pub mu1: MomentSequence<T>,
    pub mu2: MomentSequence<T>,
}

impl<T: Real> MomentPair<T> {
    pub fn new(mu1: MomentSequence<T>, mu2: MomentSequence<T>) -> Result<Self> {
        if mu1.len() != mu2.len() {
            return Err(Error::Domain(format!(
                "moment sequences differ in length ({} vs {})",
                mu1.len(),
                mu2.len()
            )));
        }
        if mu1.is_normalized() != mu2.is_normalized() {
            return Err(Error::Domain("moment sequences differ in normalization".into()));
        }
        Ok(MomentPair { mu1, mu2 })
    }

    pub fn max_order(&self) -> usize {
        self.mu1.max_order()
    }

    pub fn cast<U: Real>(&self) -> MomentPair<U> {
        MomentPair {
            mu1: self.mu1.cast(),
            mu2: self.mu2.cast(),
        }
    }
}

/// Normalized moments of `exp(-x² + c x)` through order `order`.
///
/// Integration by parts gives `s_{j+1} = (c/2) s_j + (j/2) s_{j-1}`.
pub fn hermite_moments<T: Real>(c: f64, order: usize) -> MomentSequence<T> {
    let half_c = T::from_f64(c) / T::from_f64(2.0);
    let mut values = Vec::with_capacity(order + 1);
    values.push(T::one());
    for j in 0..order {
        let mut next = half_c * values[j];
        if j > 0 {
            next += T::from_usize(j) / T::from_f64(2.0) * values[j - 1];
        }
        values.push(next);
    }
    MomentSequence {
        values,
        normalized: true,
        source: MomentSource::Hermite { c },
    }
}

/// Normalized moments of `x^alpha e^{-x}`: the rising factorial
/// `(alpha+1)(alpha+2)…(alpha+j)`.
pub fn laguerre_moments<T: Real>(alpha: f64, order: usize) -> Result<MomentSequence<T>> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::Domain(format!("Laguerre alpha = {alpha} must exceed -1")));
    }
    let a = T::from_f64(alpha);
    let mut values = Vec::with_capacity(order + 1);
    values.push(T::one());
    for j in 1..=order {
        let prev = values[j - 1];
        values.push(prev * (a + T::from_usize(j)));
    }
    Ok(MomentSequence {
        values,
        normalized: true,
        source: MomentSource::Laguerre { alpha },
    })
}

/// Truncation controls for the Meixner moment series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeixnerConfig {
    /// Stop once a rigorous bound on the remaining tail, relative to the
    /// partial sum, drops below this value for every order.
    pub tolerance: f64,
    pub max_terms: usize,
}

impl Default for MeixnerConfig {
    fn default() -> Self {
        MeixnerConfig {
            tolerance: 1e-16,
            max_terms: 10_000,
        }
    }
}

impl MeixnerConfig {
    /// Tolerance matched to the unit roundoff of `T`.
    pub fn for_precision<T: Real>() -> Self {
        MeixnerConfig {
            tolerance: T::PRECISION.epsilon().min(1e-16),
            ..Default::default()
        }
    }
}

/// Normalized moments of the Meixner weight `(beta)_k c^k / k!`.
///
/// The sums `Σ k^j w_k` are accumulated together for all `j <= order` and
/// divided by `Σ w_k = (1-c)^{-beta}`, which sidesteps a non-integer power.
pub fn meixner_moments<T: Real>(beta: f64, c: f64, order: usize, config: &MeixnerConfig) -> Result<MomentSequence<T>> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::Domain(format!("Meixner beta = {beta} must be positive")));
    }
    if !(c > 0.0 && c < 1.0) {
        return Err(Error::Domain(format!("Meixner c = {c} must lie in (0, 1)")));
    }
    let beta_t = T::from_f64(beta);
    let c_t = T::from_f64(c);
    let mut sums = vec![T::zero(); order + 1];
    // w_k = (beta)_k c^k / k!
    let mut weight = T::one();
    let mut k = 0usize;
    loop {
        let kt = T::from_usize(k);
        let mut power = T::one();
        for s in sums.iter_mut() {
            *s += power * weight;
            power *= kt;
        }
        // Ratio of the next-next term to the next term, maximized over the
        // remaining tail: ((k+2)/(k+1))^j · c · max(1, (beta+k+1)/(k+2)).
        let next_weight = weight * (beta_t + kt) * c_t / T::from_usize(k + 1);
        let growth = ((k + 2) as f64 / (k + 1) as f64).powi(order as i32);
        let ratio_cap = c * ((beta + k as f64 + 1.0) / (k as f64 + 2.0)).max(1.0);
        let ratio = growth * ratio_cap;
        let mut worst_tail = 0.0f64;
        if ratio < 1.0 {
            let mut next_power = 1.0f64;
            let k1 = (k + 1) as f64;
            for s in sums.iter() {
                let term = next_power * next_weight.to_f64();
                let tail = term / (1.0 - ratio) / s.to_f64().abs().max(f64::MIN_POSITIVE);
                worst_tail = worst_tail.max(tail);
                next_power *= k1;
            }
            if worst_tail <= config.tolerance {
                break;
            }
        } else {
            worst_tail = f64::INFINITY;
        }
        k += 1;
        if k >= config.max_terms {
            return Err(Error::Convergence {
                terms: k,
                tail: worst_tail,
            });
        }
        weight = next_weight;
    }
    let mass = sums[0];
    let values = sums.into_iter().map(|s| s / mass).collect::<Vec<_>>();
    let mut seq = MomentSequence {
        values,
        normalized: true,
        source: MomentSource::Meixner { beta, c },
    };
    seq.values[0] = T::one();
    Ok(seq)
}

/// Builds a normalized pair from two raw lists of equal length.
pub fn raw_moments(values1: &[f64], values2: &[f64]) -> Result<MomentPair<f64>> {
    if values1.is_empty() || values2.is_empty() {
        return Err(Error::Domain("empty moment list".into()));
    }
    if values1.len() != values2.len() {
        return Err(Error::Domain(format!(
            "moment lists differ in length ({} vs {})",
            values1.len(),
            values2.len()
        )));
    }
    let mu1 = MomentSequence::new(values1.to_vec(), MomentSource::Raw)?.normalize()?;
    let mu2 = MomentSequence::new(values2.to_vec(), MomentSource::Raw)?.normalize()?;
    MomentPair::new(mu1, mu2)
}

/// Hankel determinants `det[s_{i+k}]_{0<=i,k<=r}` for `r = 0..=r_max`,
/// limited by the available orders.
pub fn hankel_minors<T: Real>(seq: &MomentSequence<T>, r_max: usize) -> Vec<f64> {
    let s = seq.values();
    (0..=r_max)
        .take_while(|&r| 2 * r < s.len())
        .map(|r| det(&Matrix::from_fn(r + 1, r + 1, |i, k| s[i + k])).to_f64())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;

    #[test]
    fn hermite_examples() {
        assert_eq!(hermite_moments::<f64>(0.0, 2).values(), &[1.0, 0.0, 0.5]);
        assert_eq!(hermite_moments::<f64>(1.0, 2).values(), &[1.0, 0.5, 0.75]);
        assert_eq!(hermite_moments::<f64>(2.0, 1).values(), &[1.0, 1.0]);
        assert_eq!(hermite_moments::<f64>(3.0, 0).values(), &[1.0]);
    }

    #[test]
    fn hermite_recursion_residual_vanishes() {
        let c = 1.7;
        let s = hermite_moments::<f64>(c, 12);
        let v = s.values();
        for j in 0..12 {
            let prev = if j > 0 { j as f64 / 2.0 * v[j - 1] } else { 0.0 };
            assert!((v[j + 1] - c / 2.0 * v[j] - prev).abs() <= 1e-15 * v[j + 1].abs());
        }
    }

    #[test]
    fn laguerre_examples() {
        assert_eq!(laguerre_moments::<f64>(0.0, 3).unwrap().values(), &[1.0, 1.0, 2.0, 6.0]);
        assert_eq!(laguerre_moments::<f64>(1.0, 2).unwrap().values(), &[1.0, 2.0, 6.0]);
        assert_eq!(laguerre_moments::<f64>(0.0, 0).unwrap().values(), &[1.0]);
        assert!(matches!(laguerre_moments::<f64>(-1.0, 2), Err(Error::Domain(_))));
    }

    #[test]
    fn meixner_examples() {
        let cfg = MeixnerConfig::default();
        let s = meixner_moments::<f64>(1.0, 0.5, 1, &cfg).unwrap();
        assert!((s.values()[1] - 1.0).abs() < 1e-15);
        let s = meixner_moments::<f64>(2.0, 0.5, 1, &cfg).unwrap();
        assert!((s.values()[1] - 2.0).abs() < 1e-15);
        let s = meixner_moments::<f64>(0.3, 0.9, 0, &cfg).unwrap();
        assert_eq!(s.values(), &[1.0]);
    }

    #[test]
    fn meixner_rejects_bad_parameters_and_budget() {
        let cfg = MeixnerConfig::default();
        assert!(matches!(
            meixner_moments::<f64>(0.0, 0.5, 2, &cfg),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            meixner_moments::<f64>(1.0, 1.0, 2, &cfg),
            Err(Error::Domain(_))
        ));
        let tight = MeixnerConfig {
            tolerance: 1e-16,
            max_terms: 5,
        };
        assert!(matches!(
            meixner_moments::<f64>(1.0, 0.5, 4, &tight),
            Err(Error::Convergence { .. })
        ));
    }

    #[test]
    fn meixner_extended_agrees_with_double() {
        let d = meixner_moments::<f64>(1.0, 1.0 / 3.0, 8, &MeixnerConfig::default()).unwrap();
        let e = meixner_moments::<DoubleDouble>(1.0, 1.0 / 3.0, 8, &MeixnerConfig::for_precision::<DoubleDouble>())
            .unwrap();
        for (a, b) in d.values().iter().zip(e.values()) {
            assert!((a - b.to_f64()).abs() <= 1e-14 * a.abs());
        }
    }

    #[test]
    fn raw_moment_examples() {
        let p = raw_moments(&[2.0, 1.0], &[3.0, 3.0]).unwrap();
        assert_eq!(p.mu1.values(), &[1.0, 0.5]);
        assert_eq!(p.mu2.values(), &[1.0, 1.0]);
        let p = raw_moments(&[1.0, 0.0, 1.0], &[1.0, 1.0, 2.0]).unwrap();
        assert_eq!(p.mu1.values(), &[1.0, 0.0, 1.0]);
        assert_eq!(p.mu2.values(), &[1.0, 1.0, 2.0]);
        assert!(matches!(raw_moments(&[0.0, 1.0], &[1.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(raw_moments(&[1.0], &[1.0, 1.0]), Err(Error::Domain(_))));
        assert!(matches!(raw_moments(&[], &[]), Err(Error::Domain(_))));
        assert!(matches!(
            raw_moments(&[1.0, f64::NAN], &[1.0, 1.0]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn pair_requires_matching_lengths() {
        let a = hermite_moments::<f64>(0.0, 3);
        let b = hermite_moments::<f64>(1.0, 2);
        assert!(MomentPair::new(a, b).is_err());
    }
}
