//! Truncated single-mode Fock space: amplitude vectors, ladder operators and
//! the direct numerical evaluation of moments used as the oracle for every
//! closed-form expression in this crate.

use log::warn;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default bound on the probability mass discarded above the cutoff.
pub const DEFAULT_TAIL_TOL: f64 = 1e-12;
/// Largest `j + k` accepted by [`moment_oracle`].
pub const DEFAULT_MAX_ORDER: usize = 12;
/// Tolerance on `|sum |c_n|^2 - 1|` for a vector to count as normalized.
pub const NORM_TOL: f64 = 1e-12;

/// Amplitudes `c_0..c_N` of a pure single-mode state on the truncated basis
/// `|0>..|N>`, together with a certified bound on the discarded tail mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FockVector {
    amplitudes: Vec<C64>,
    tail_bound: f64,
}

impl FockVector {
    /// Wraps raw amplitudes without normalizing them. An empty list is
    /// treated as the zero vector on `|0>`.
    pub fn from_amplitudes(mut amplitudes: Vec<C64>, tail_bound: f64) -> Self {
        if amplitudes.is_empty() {
            amplitudes.push(C64::new(0.0, 0.0));
        }
        FockVector { amplitudes, tail_bound }
    }

    /// Wraps and rescales to unit norm. Fails on the zero vector.
    pub fn normalized(amplitudes: Vec<C64>, tail_bound: f64) -> Result<Self> {
        FockVector::from_amplitudes(amplitudes, tail_bound).into_normalized()
    }

    /// The Fock state `|n>`.
    pub fn fock(n: usize) -> Self {
        let mut amplitudes = vec![C64::new(0.0, 0.0); n + 1];
        amplitudes[n] = C64::new(1.0, 0.0);
        FockVector {
            amplitudes,
            tail_bound: 0.0,
        }
    }

    pub fn vacuum() -> Self {
        Self::fock(0)
    }

    pub fn cutoff(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, n: usize) -> C64 {
        self.amplitudes.get(n).copied().unwrap_or_default()
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < NORM_TOL
    }

    pub fn require_normalized(&self) -> Result<()> {
        if self.is_normalized() {
            Ok(())
        } else {
            Err(Error::NotNormalized(self.norm_sqr()))
        }
    }

    pub fn into_normalized(mut self) -> Result<Self> {
        let norm = self.norm_sqr().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized(norm * norm));
        }
        for c in &mut self.amplitudes {
            *c /= norm;
        }
        Ok(self)
    }

    /// Photon-number distribution `p_n = |c_n|^2`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|c| c.norm_sqr()).collect()
    }

    pub fn mean_number(&self) -> f64 {
        self.amplitudes
            .iter()
            .enumerate()
            .map(|(n, c)| n as f64 * c.norm_sqr())
            .sum()
    }

    /// Zero-pads the basis by `extra` levels.
    pub fn extended(&self, extra: usize) -> Self {
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.resize(amplitudes.len() + extra, C64::new(0.0, 0.0));
        FockVector {
            amplitudes,
            tail_bound: self.tail_bound,
        }
    }

    /// `<self|other>`, antilinear in `self`.
    pub fn inner(&self, other: &FockVector) -> C64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2` for normalized vectors.
    pub fn fidelity(&self, other: &FockVector) -> f64 {
        self.inner(other).norm_sqr()
    }
}

/// `a^+ v`. The basis grows by one level so no amplitude is lost; the result
/// carries its true norm `sqrt(<N> + 1)`.
pub fn apply_creation(v: &FockVector) -> FockVector {
    let mut out = vec![C64::new(0.0, 0.0); v.amplitudes.len() + 1];
    for (n, c) in v.amplitudes.iter().enumerate() {
        out[n + 1] = c * ((n + 1) as f64).sqrt();
    }
    FockVector {
        amplitudes: out,
        tail_bound: v.tail_bound,
    }
}

/// `a v`, on the same basis. The vacuum maps to the zero vector.
pub fn apply_annihilation(v: &FockVector) -> FockVector {
    let mut out = vec![C64::new(0.0, 0.0); v.amplitudes.len()];
    for (n, c) in v.amplitudes.iter().enumerate().skip(1) {
        out[n - 1] = c * (n as f64).sqrt();
    }
    FockVector {
        amplitudes: out,
        tail_bound: v.tail_bound,
    }
}

/// `sqrt(n! / (n - k)!)`, the matrix element of `a^k` between `|n>` and `|n-k>`.
fn sqrt_falling(n: usize, k: usize) -> f64 {
    (0..k).map(|i| ((n - i) as f64).sqrt()).product()
}

/// Exact `<a^+^j a^k>` of the truncated state by direct summation over the
/// basis.
pub fn moment_oracle(v: &FockVector, j: usize, k: usize) -> Result<C64> {
    v.require_normalized()?;
    if j + k > DEFAULT_MAX_ORDER {
        return Err(Error::InvalidOrder(format!(
            "j + k = {} exceeds the oracle limit {DEFAULT_MAX_ORDER}",
            j + k
        )));
    }
    let cutoff = v.cutoff();
    if j + k + 2 > cutoff && v.tail_bound() > 0.0 {
        warn!(
            "moment order {} is close to the cutoff {cutoff}; truncation bias may be visible",
            j + k
        );
    }
    let mut acc = C64::new(0.0, 0.0);
    for n in k..=cutoff {
        let bra = n - k + j;
        if bra > cutoff {
            break;
        }
        let weight = sqrt_falling(n, k) * sqrt_falling(bra, j);
        acc += v.amplitudes[bra].conj() * v.amplitudes[n] * weight;
    }
    Ok(acc)
}

/// `<(X - <X>)^l>` with `X = (a + a^+)/sqrt 2`, by applying the shifted
/// quadrature operator `l/2` times and taking the squared norm of the result.
pub fn quadrature_central_moment_oracle(v: &FockVector, l: usize) -> Result<f64> {
    if l == 0 || l % 2 == 1 {
        return Err(Error::InvalidOrder(format!(
            "quadrature moment order {l} must be even and positive"
        )));
    }
    v.require_normalized()?;
    let mean = quadrature_mean(v);
    let mut w: Vec<C64> = v.amplitudes.clone();
    w.resize(w.len() + l / 2, C64::new(0.0, 0.0));
    for _ in 0..l / 2 {
        w = apply_shifted_quadrature(&w, mean);
    }
    Ok(w.iter().map(|c| c.norm_sqr()).sum())
}

/// `<X>` with `X = (a + a^+)/sqrt 2`.
pub fn quadrature_mean(v: &FockVector) -> f64 {
    let a: C64 = v
        .amplitudes
        .iter()
        .enumerate()
        .skip(1)
        .map(|(n, c)| v.amplitudes[n - 1].conj() * c * (n as f64).sqrt())
        .sum();
    std::f64::consts::SQRT_2 * a.re
}

// (X - mean) w on a fixed basis; callers pad so the top level stays empty.
fn apply_shifted_quadrature(w: &[C64], mean: f64) -> Vec<C64> {
    let dim = w.len();
    let mut out = vec![C64::new(0.0, 0.0); dim];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for n in 0..dim {
        let c = w[n];
        if c == C64::new(0.0, 0.0) {
            continue;
        }
        if n > 0 {
            out[n - 1] += c * (n as f64).sqrt() * s;
        }
        if n + 1 < dim {
            out[n + 1] += c * ((n + 1) as f64).sqrt() * s;
        }
        out[n] -= c * mean;
    }
    out
}

/// `<(N - <N>)^l>` from the photon-number distribution.
pub fn number_central_moment_oracle(v: &FockVector, l: usize) -> Result<f64> {
    if l == 0 {
        return Err(Error::InvalidOrder("number moment order must be positive".into()));
    }
    v.require_normalized()?;
    let mean = v.mean_number();
    Ok(v.amplitudes
        .iter()
        .enumerate()
        .map(|(n, c)| c.norm_sqr() * (n as f64 - mean).powi(l as i32))
        .sum())
}
