//! The three parent states (even coherent, binomial, Kerr) and their
//! vacuum-filtered and photon-added descendants.
//!
//! Amplitudes are always normalized numerically. The closed-form
//! normalization constants are kept only as regression data; see
//! [`normalization_check`].

use std::fmt;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fock::{apply_creation, FockVector, DEFAULT_MAX_ORDER, DEFAULT_TAIL_TOL, NORM_TOL};
use crate::special::ln_factorial;

/// Hard ceiling on the certified cutoff.
pub const MAX_CUTOFF: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Ecs,
    Bs,
    Ks,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engineering {
    None,
    VacuumFiltered,
    PhotonAdded,
}

impl Engineering {
    pub const ALL: [Engineering; 3] = [Engineering::None, Engineering::VacuumFiltered, Engineering::PhotonAdded];

    fn prefix(self) -> &'static str {
        match self {
            Engineering::None => "",
            Engineering::VacuumFiltered => "VF",
            Engineering::PhotonAdded => "PA",
        }
    }
}

impl Family {
    fn name(self) -> &'static str {
        match self {
            Family::Ecs => "ECS",
            Family::Bs => "BS",
            Family::Ks => "KS",
        }
    }
}

/// Selects one of the nine states and carries its physical parameters.
/// Parameters irrelevant to the family are ignored.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateSpec {
    pub family: Family,
    pub engineering: Engineering,
    /// `|alpha|` for ECS and KS.
    pub alpha_mag: f64,
    /// Phase of `alpha` in radians.
    pub theta: f64,
    /// Binomial success probability.
    pub p: f64,
    /// Binomial photon cap.
    pub m: usize,
    /// Kerr parameter.
    pub chi: f64,
}

impl StateSpec {
    fn base(family: Family) -> Self {
        StateSpec {
            family,
            engineering: Engineering::None,
            alpha_mag: 0.0,
            theta: 0.0,
            p: 0.0,
            m: 0,
            chi: 0.0,
        }
    }

    pub fn ecs(alpha_mag: f64) -> Self {
        StateSpec {
            alpha_mag,
            ..Self::base(Family::Ecs)
        }
    }

    pub fn bs(p: f64, m: usize) -> Self {
        StateSpec {
            p,
            m,
            ..Self::base(Family::Bs)
        }
    }

    pub fn ks(alpha_mag: f64, chi: f64) -> Self {
        StateSpec {
            alpha_mag,
            chi,
            ..Self::base(Family::Ks)
        }
    }

    /// A coherent state, i.e. the Kerr state at `chi = 0`.
    pub fn coherent(alpha_mag: f64) -> Self {
        Self::ks(alpha_mag, 0.0)
    }

    pub fn with_theta(self, theta: f64) -> Self {
        StateSpec { theta, ..self }
    }

    pub fn with_engineering(self, engineering: Engineering) -> Self {
        StateSpec { engineering, ..self }
    }

    pub fn vacuum_filtered(self) -> Self {
        self.with_engineering(Engineering::VacuumFiltered)
    }

    pub fn photon_added(self) -> Self {
        self.with_engineering(Engineering::PhotonAdded)
    }

    pub fn parent(self) -> Self {
        self.with_engineering(Engineering::None)
    }

    /// `alpha = |alpha| e^{i theta}`.
    pub fn alpha(&self) -> C64 {
        C64::from_polar(self.alpha_mag, self.theta)
    }

    /// Short name such as `PAKS`.
    pub fn label(&self) -> String {
        format!("{}{}", self.engineering.prefix(), self.family.name())
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::Ecs | Family::Ks => {
                if !(self.alpha_mag.is_finite() && self.alpha_mag >= 0.0) {
                    return Err(Error::InvalidParameter(format!(
                        "|alpha| = {} must be finite and >= 0",
                        self.alpha_mag
                    )));
                }
                if !self.theta.is_finite() {
                    return Err(Error::InvalidParameter("theta must be finite".into()));
                }
                if self.family == Family::Ks && !self.chi.is_finite() {
                    return Err(Error::InvalidParameter("chi must be finite".into()));
                }
            }
            Family::Bs => {
                if !(0.0..=1.0).contains(&self.p) {
                    return Err(Error::InvalidParameter(format!("p = {} must lie in [0, 1]", self.p)));
                }
                if self.m > MAX_CUTOFF {
                    return Err(Error::InvalidParameter(format!("M = {} exceeds {MAX_CUTOFF}", self.m)));
                }
            }
        }
        let parent_is_vacuum = match self.family {
            Family::Ecs | Family::Ks => self.alpha_mag == 0.0,
            Family::Bs => self.p == 0.0 || self.m == 0,
        };
        if self.engineering == Engineering::VacuumFiltered && parent_is_vacuum {
            return Err(Error::FiltrationUndefined(1.0));
        }
        Ok(())
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Ecs => write!(f, "{}(|alpha|={}, theta={})", self.label(), self.alpha_mag, self.theta),
            Family::Bs => write!(f, "{}(p={}, M={})", self.label(), self.p, self.m),
            Family::Ks => write!(
                f,
                "{}(|alpha|={}, theta={}, chi={})",
                self.label(),
                self.alpha_mag,
                self.theta,
                self.chi
            ),
        }
    }
}

/// `|a|^e / sqrt-free factor`, i.e. `exp(e ln a - lnf)` with `0^0 = 1`.
pub(crate) fn pow_over(a: f64, e: usize, ln_denominator: f64) -> f64 {
    if e == 0 {
        (-ln_denominator).exp()
    } else if a == 0.0 {
        0.0
    } else {
        (e as f64 * a.ln() - ln_denominator).exp()
    }
}

/// Unnormalized amplitude of the parent state at `n`, in the form written
/// for the Fock expansion of each family (no leading constant).
fn parent_amplitude(spec: &StateSpec, n: usize) -> C64 {
    match spec.family {
        Family::Ecs => {
            if n % 2 == 1 {
                return C64::new(0.0, 0.0);
            }
            C64::from_polar(
                2.0 * pow_over(spec.alpha_mag, n, 0.5 * ln_factorial(n)),
                n as f64 * spec.theta,
            )
        }
        Family::Bs => binomial_amplitude(spec.p, spec.m, n),
        Family::Ks => {
            let kerr = -spec.chi * (n as f64) * (n as f64 - 1.0);
            C64::from_polar(
                pow_over(spec.alpha_mag, n, 0.5 * ln_factorial(n)),
                n as f64 * spec.theta + kerr,
            )
        }
    }
}

fn binomial_amplitude(p: f64, m: usize, n: usize) -> C64 {
    if n > m {
        return C64::new(0.0, 0.0);
    }
    let ln_c = ln_factorial(m) - ln_factorial(n) - ln_factorial(m - n);
    let lp = if n == 0 {
        0.0
    } else if p == 0.0 {
        f64::NEG_INFINITY
    } else {
        n as f64 * p.ln()
    };
    let q = 1.0 - p;
    let lq = if m == n {
        0.0
    } else if q == 0.0 {
        f64::NEG_INFINITY
    } else {
        (m - n) as f64 * q.ln()
    };
    C64::new((0.5 * (ln_c + lp + lq)).exp(), 0.0)
}

/// Unnormalized amplitude of the (possibly engineered) state at `n`.
fn state_amplitude(spec: &StateSpec, n: usize) -> C64 {
    match spec.engineering {
        Engineering::None => parent_amplitude(spec, n),
        Engineering::VacuumFiltered => {
            if n == 0 {
                C64::new(0.0, 0.0)
            } else {
                parent_amplitude(spec, n)
            }
        }
        Engineering::PhotonAdded => {
            if n == 0 {
                C64::new(0.0, 0.0)
            } else {
                parent_amplitude(spec, n - 1) * (n as f64).sqrt()
            }
        }
    }
}

/// Upper envelope of `|state_amplitude(n)|^2` whose successive ratios drop
/// below 1/2 once `n >= 4|alpha|^2 + 4` (Poisson-type families only).
fn weight_envelope(spec: &StateSpec, n: usize) -> f64 {
    let x = spec.alpha_mag * spec.alpha_mag;
    let scale = if spec.family == Family::Ecs { 4.0 } else { 1.0 };
    match spec.engineering {
        Engineering::PhotonAdded => {
            if n == 0 {
                0.0
            } else {
                scale * n as f64 * pow_over(x, n - 1, ln_factorial(n - 1))
            }
        }
        _ => scale * pow_over(x, n, ln_factorial(n)),
    }
}

/// Unnormalized photon-number weights of a state summed far enough that the
/// remainder is certified negligible.
#[derive(Debug, Clone)]
struct WeightTable {
    weights: Vec<f64>,
    /// Certified bound on the sum of all weights beyond `weights.len() - 1`.
    remainder: f64,
}

impl WeightTable {
    fn build(spec: &StateSpec, tail_tol: f64) -> Result<Self> {
        if spec.family == Family::Bs {
            let top = spec.m + usize::from(spec.engineering == Engineering::PhotonAdded);
            let weights = (0..=top).map(|n| state_amplitude(spec, n).norm_sqr()).collect();
            return Ok(WeightTable {
                weights,
                remainder: 0.0,
            });
        }
        let x = spec.alpha_mag * spec.alpha_mag;
        let geometric_from = (4.0 * x).ceil() as usize + 4;
        let mut weights = Vec::new();
        let mut sum = 0.0;
        for k in 0..=MAX_CUTOFF {
            let w = state_amplitude(spec, k).norm_sqr();
            if !w.is_finite() {
                return Err(Error::TruncationFailure(format!(
                    "weight overflow at n = {k} for {spec}"
                )));
            }
            weights.push(w);
            sum += w;
            if k >= geometric_from {
                let remainder = 2.0 * weight_envelope(spec, k + 1);
                if sum > 0.0 && remainder <= 1e-3 * tail_tol * sum {
                    return Ok(WeightTable { weights, remainder });
                }
            }
        }
        Err(Error::TruncationFailure(format!(
            "tail of {spec} does not fall below {tail_tol} by n = {MAX_CUTOFF}"
        )))
    }

    fn partial_sum(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Smallest `N` whose relative tail bound is below `tol`, with that bound.
    fn cutoff_for(&self, tol: f64) -> Result<(usize, f64)> {
        let total = self.partial_sum();
        if total <= 0.0 {
            return Err(Error::FiltrationUndefined(1.0));
        }
        let mut tail = self.remainder;
        let mut best = None;
        for n in (0..self.weights.len()).rev() {
            let bound = tail / total;
            if bound < tol {
                best = Some((n, bound));
            } else {
                break;
            }
            tail += self.weights[n];
        }
        best.ok_or_else(|| Error::TruncationFailure(format!("no cutoff meets tail tolerance {tol}")))
    }

    /// Relative tail bound above an arbitrary cutoff.
    fn tail_above(&self, cutoff: usize) -> f64 {
        let total = self.partial_sum();
        let above: f64 = self.weights.iter().skip(cutoff + 1).sum();
        (above + self.remainder) / total
    }
}

/// Smallest cutoff whose certified tail mass is below `tail_tol`.
///
/// Binomial states have exact finite support and return `M` (`M + 1` after
/// photon addition).
pub fn choose_cutoff(spec: &StateSpec, tail_tol: f64) -> Result<usize> {
    if !(tail_tol > 0.0 && tail_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail tolerance {tail_tol} must lie in (0, 1)"
        )));
    }
    spec.validate()?;
    if spec.family == Family::Bs {
        return Ok(spec.m + usize::from(spec.engineering == Engineering::PhotonAdded));
    }
    let table = WeightTable::build(spec, tail_tol)?;
    Ok(table.cutoff_for(tail_tol)?.0)
}

/// Options for turning a [`StateSpec`] into a [`FockVector`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub tail_tol: f64,
    /// Extra levels kept above the certified cutoff, filled with the true
    /// amplitudes, so that operator applications never reach the boundary.
    pub headroom: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            tail_tol: DEFAULT_TAIL_TOL,
            headroom: 0,
        }
    }
}

impl BuildOptions {
    /// Settings used wherever a state feeds the moment oracles.
    pub fn oracle() -> Self {
        BuildOptions {
            tail_tol: DEFAULT_TAIL_TOL,
            headroom: DEFAULT_MAX_ORDER,
        }
    }

    pub fn with_tail_tol(self, tail_tol: f64) -> Self {
        BuildOptions { tail_tol, ..self }
    }
}

fn build_raw(spec: &StateSpec, opts: &BuildOptions) -> Result<FockVector> {
    if !(opts.tail_tol > 0.0 && opts.tail_tol < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tail tolerance {} must lie in (0, 1)",
            opts.tail_tol
        )));
    }
    spec.validate()?;
    let (cutoff, tail) = if spec.family == Family::Bs {
        (choose_cutoff(spec, opts.tail_tol)?, 0.0)
    } else {
        let table = WeightTable::build(spec, opts.tail_tol)?;
        let (n, _) = table.cutoff_for(opts.tail_tol)?;
        let n = n + opts.headroom;
        (n, table.tail_above(n))
    };
    let amps = (0..=cutoff).map(|n| state_amplitude(spec, n)).collect();
    Ok(FockVector::from_amplitudes(amps, tail))
}

/// The parent state named by `spec` (engineering must be `None`).
pub fn build_parent(spec: &StateSpec) -> Result<FockVector> {
    build_parent_with(spec, &BuildOptions::default())
}

pub fn build_parent_with(spec: &StateSpec, opts: &BuildOptions) -> Result<FockVector> {
    if spec.engineering != Engineering::None {
        return Err(Error::InvalidParameter(format!(
            "{} is not a parent state",
            spec.label()
        )));
    }
    build_raw(spec, opts)?.into_normalized()
}

/// Removes the vacuum component and renormalizes.
pub fn vacuum_filter(v: &FockVector) -> Result<FockVector> {
    v.require_normalized()?;
    let p0 = v.amplitude(0).norm_sqr();
    if p0 >= 1.0 - NORM_TOL {
        return Err(Error::FiltrationUndefined(p0));
    }
    let mut amps = v.amplitudes().to_vec();
    amps[0] = C64::new(0.0, 0.0);
    // renormalize from the remaining amplitudes rather than 1 - |c_0|^2,
    // which cancels badly when the vacuum dominates
    FockVector::normalized(amps, v.tail_bound())
}

/// Applies `a^+` and renormalizes.
pub fn photon_add(v: &FockVector) -> Result<FockVector> {
    v.require_normalized()?;
    apply_creation(v).into_normalized()
}

/// Vacuum-filtered or photon-added state named by `spec`.
pub fn build_engineered(spec: &StateSpec) -> Result<FockVector> {
    build_engineered_with(spec, &BuildOptions::default())
}

pub fn build_engineered_with(spec: &StateSpec, opts: &BuildOptions) -> Result<FockVector> {
    match spec.engineering {
        Engineering::None => Err(Error::InvalidParameter(format!(
            "{} is not an engineered state",
            spec.label()
        ))),
        Engineering::VacuumFiltered => {
            let raw = build_raw(spec, opts)?;
            let parent_amps: Vec<C64> = (0..=raw.cutoff()).map(|n| parent_amplitude(spec, n)).collect();
            let parent = FockVector::normalized(parent_amps, 0.0)?;
            let filtered = vacuum_filter(&parent)?;
            Ok(FockVector::from_amplitudes(
                filtered.amplitudes().to_vec(),
                raw.tail_bound(),
            ))
        }
        Engineering::PhotonAdded => {
            let raw = build_raw(spec, opts)?;
            // parent restricted to the levels that feed the engineered basis
            let parent_amps: Vec<C64> = (0..raw.cutoff()).map(|n| parent_amplitude(spec, n)).collect();
            let parent = FockVector::normalized(parent_amps, 0.0)?;
            let added = photon_add(&parent)?;
            Ok(FockVector::from_amplitudes(
                added.amplitudes().to_vec(),
                raw.tail_bound(),
            ))
        }
    }
}

/// Any of the nine states.
pub fn build_state(spec: &StateSpec) -> Result<FockVector> {
    build_state_with(spec, &BuildOptions::default())
}

pub fn build_state_with(spec: &StateSpec, opts: &BuildOptions) -> Result<FockVector> {
    match spec.engineering {
        Engineering::None => build_parent_with(spec, opts),
        _ => build_engineered_with(spec, opts),
    }
}

/// Normalization constant `N` of a state three ways: by numerical summation of
/// the unnormalized Fock weights, from the closed form implied by those
/// weights, and as printed in the literature where that differs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormalizationCheck {
    pub numeric: f64,
    pub closed_form: f64,
    pub printed: f64,
}

impl NormalizationCheck {
    pub fn printed_relative_error(&self) -> f64 {
        ((self.printed - self.numeric) / self.numeric).abs()
    }

    pub fn closed_form_relative_error(&self) -> f64 {
        ((self.closed_form - self.numeric) / self.numeric).abs()
    }
}

/// Closed-form normalization constant consistent with the Fock amplitudes.
/// For the Kerr parent this is the `e^{-|alpha|^2/2}` prefactor.
pub fn normalization_closed_form(spec: &StateSpec) -> f64 {
    let x = spec.alpha_mag * spec.alpha_mag;
    let m = spec.m as f64;
    match (spec.family, spec.engineering) {
        (Family::Ecs, Engineering::None) => (4.0 * x.cosh()).powf(-0.5),
        // cosh x - 1 = 2 sinh^2(x/2)
        (Family::Ecs, Engineering::VacuumFiltered) => (8.0 * (0.5 * x).sinh().powi(2)).powf(-0.5),
        (Family::Ecs, Engineering::PhotonAdded) => 0.5 * (x.cosh() + x * x.sinh()).powf(-0.5),
        (Family::Bs, Engineering::None) => 1.0,
        (Family::Bs, Engineering::VacuumFiltered) => (-(m * (-spec.p).ln_1p()).exp_m1()).powf(-0.5),
        (Family::Bs, Engineering::PhotonAdded) => (1.0 + m * spec.p).powf(-0.5),
        (Family::Ks, Engineering::None) => (-0.5 * x).exp(),
        (Family::Ks, Engineering::VacuumFiltered) => x.exp_m1().powf(-0.5),
        (Family::Ks, Engineering::PhotonAdded) => (x.exp() * (1.0 + x)).powf(-0.5),
    }
}

/// Normalization constant as printed for each state. Only the vacuum-filtered
/// even coherent state differs from [`normalization_closed_form`]: the printed
/// `(4 cosh|alpha|^2 - 1)^{-1/2}` does not normalize its own amplitudes.
pub fn normalization_printed(spec: &StateSpec) -> f64 {
    let x = spec.alpha_mag * spec.alpha_mag;
    match (spec.family, spec.engineering) {
        (Family::Ecs, Engineering::None) => (-0.5 * x).exp() / (2.0 * (1.0 + (-2.0 * x).exp())).sqrt(),
        (Family::Ecs, Engineering::VacuumFiltered) => (4.0 * x.cosh() - 1.0).powf(-0.5),
        _ => normalization_closed_form(spec),
    }
}

/// Compares the numerically summed normalization of `spec`'s unnormalized
/// Fock weights with the closed-form and printed constants.
pub fn normalization_check(spec: &StateSpec) -> Result<NormalizationCheck> {
    spec.validate()?;
    let table = WeightTable::build(spec, DEFAULT_TAIL_TOL)?;
    // for the Kerr parent this yields its e^{-|alpha|^2/2} prefactor
    let weight_sum = table.partial_sum() + table.remainder;
    if !(weight_sum.is_finite() && weight_sum > 0.0) {
        return Err(Error::FiltrationUndefined(1.0));
    }
    Ok(NormalizationCheck {
        numeric: weight_sum.powf(-0.5),
        closed_form: normalization_closed_form(spec),
        printed: normalization_printed(spec),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    /// Poisson tail by direct summation, independent of the weight table.
    fn poisson_tail_above(lambda: f64, n: usize) -> f64 {
        let mut p = (-lambda).exp();
        let mut below = 0.0;
        for k in 0..=n {
            if k > 0 {
                p *= lambda / k as f64;
            }
            below += p;
        }
        let mut tail = 0.0;
        let mut k = n;
        loop {
            k += 1;
            p *= lambda / k as f64;
            tail += p;
            if p < 1e-30 {
                break;
            }
        }
        let _ = below;
        tail
    }

    #[test]
    fn cutoff_of_vacuum_ecs() {
        assert_eq!(choose_cutoff(&StateSpec::ecs(0.0), 1e-12).unwrap(), 0);
    }

    #[test]
    fn cutoff_of_binomial_is_exact_support() {
        assert_eq!(choose_cutoff(&StateSpec::bs(0.3, 10), 1e-12).unwrap(), 10);
        assert_eq!(
            choose_cutoff(&StateSpec::bs(0.7, 10).photon_added(), 1e-12).unwrap(),
            11
        );
        assert_eq!(
            choose_cutoff(&StateSpec::bs(0.7, 10).vacuum_filtered(), 1e-12).unwrap(),
            10
        );
    }

    #[test]
    fn cutoff_of_kerr_matches_poisson_tail() {
        let n = choose_cutoff(&StateSpec::ks(1.0, 0.3), 1e-12).unwrap();
        assert!(poisson_tail_above(1.0, n) < 1e-12);
        assert!(poisson_tail_above(1.0, n - 1) >= 1e-12);
        for &a in &[0.5, 2.0, 3.0] {
            let n = choose_cutoff(&StateSpec::ks(a, 0.0), 1e-12).unwrap();
            assert!(poisson_tail_above(a * a, n) < 1e-12, "alpha={a}");
            assert!(poisson_tail_above(a * a, n - 1) >= 1e-12, "alpha={a}");
        }
    }

    #[test]
    fn cutoff_rejects_bad_tolerance() {
        assert!(choose_cutoff(&StateSpec::ks(1.0, 0.0), 0.0).is_err());
        assert!(choose_cutoff(&StateSpec::ks(1.0, 0.0), 1.0).is_err());
    }

    #[test]
    fn huge_alpha_fails_truncation() {
        assert!(matches!(
            choose_cutoff(&StateSpec::ks(200.0, 0.0), 1e-12),
            Err(Error::TruncationFailure(_))
        ));
    }

    #[test]
    fn kerr_at_zero_chi_is_coherent() {
        let alpha = C64::from_polar(1.3, 0.4);
        let v = build_parent(&StateSpec::ks(1.3, 0.0).with_theta(0.4)).unwrap();
        let mut expected = (-0.5 * alpha.norm_sqr()).exp();
        for n in 0..=v.cutoff() {
            if n > 0 {
                expected /= (n as f64).sqrt();
            }
            let want = alpha.powu(n as u32) * expected;
            assert!((v.amplitude(n) - want).norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn binomial_edges() {
        let v = build_parent(&StateSpec::bs(1.0, 5)).unwrap();
        assert!(close(v.amplitude(5).norm_sqr(), 1.0, 1e-15));
        let vac = build_parent(&StateSpec::bs(0.0, 5)).unwrap();
        assert!(close(vac.amplitude(0).norm_sqr(), 1.0, 1e-15));
        let m0 = build_parent(&StateSpec::bs(0.4, 0)).unwrap();
        assert_eq!(m0.cutoff(), 0);
        assert!(StateSpec::bs(1.2, 5).validate().is_err());
        assert!(StateSpec::ecs(-1.0).validate().is_err());
    }

    #[test]
    fn even_coherent_photon_distribution() {
        let v = build_parent(&StateSpec::ecs(1.0)).unwrap();
        let p = v.probabilities();
        assert!(close(p[0], 1.0 / 1f64.cosh(), 1e-12));
        assert!(close(p[0], 0.648, 1e-3));
        assert_eq!(p[1], 0.0);
        assert!(p.iter().skip(1).step_by(2).all(|&q| q == 0.0));
        assert!(close(v.norm_sqr(), 1.0, 1e-12));
    }

    #[test]
    fn vacuum_filter_examples() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = FockVector::from_amplitudes(vec![C64::new(s, 0.0), C64::new(s, 0.0)], 0.0);
        let f = vacuum_filter(&v).unwrap();
        assert_eq!(f.amplitude(0), C64::new(0.0, 0.0));
        assert!(close(f.amplitude(1).re, 1.0, 1e-15));
        let one = FockVector::fock(1);
        assert_eq!(vacuum_filter(&one).unwrap(), one);
        assert!(matches!(
            vacuum_filter(&FockVector::vacuum()),
            Err(Error::FiltrationUndefined(_))
        ));
    }

    #[test]
    fn vacuum_filter_is_idempotent() {
        let v = build_parent(&StateSpec::ks(0.8, 0.1)).unwrap();
        let once = vacuum_filter(&v).unwrap();
        let twice = vacuum_filter(&once).unwrap();
        for (a, b) in once.amplitudes().iter().zip(twice.amplitudes()) {
            assert!((a - b).norm() <= 1e-15);
        }
    }

    #[test]
    fn photon_add_examples() {
        let one = photon_add(&FockVector::vacuum()).unwrap();
        assert!(close(one.amplitude(1).re, 1.0, 1e-15));
        let pabs = build_engineered(&StateSpec::bs(0.5, 0).photon_added()).unwrap();
        assert!(close(pabs.amplitude(1).norm_sqr(), 1.0, 1e-15));
        assert!(close(
            normalization_closed_form(&StateSpec::bs(0.5, 0).photon_added()),
            1.0,
            1e-15
        ));
        let pacs = build_engineered(&StateSpec::coherent(1.2).photon_added()).unwrap();
        assert_eq!(pacs.amplitude(0), C64::new(0.0, 0.0));
    }

    #[test]
    fn filtered_binomial_at_p_zero_is_undefined() {
        assert!(matches!(
            build_engineered(&StateSpec::bs(0.0, 10).vacuum_filtered()),
            Err(Error::FiltrationUndefined(_))
        ));
        assert!(build_engineered(&StateSpec::bs(1e-3, 10).vacuum_filtered()).is_ok());
    }

    #[test]
    fn photon_added_kerr_at_zero_chi() {
        let pa = build_engineered(&StateSpec::ks(0.9, 0.0).photon_added()).unwrap();
        // a^+|alpha> has amplitudes alpha^{n-1} sqrt(n) / sqrt((n-1)!) up to normalization
        let raw: Vec<C64> = (0..=pa.cutoff())
            .map(|n| {
                if n == 0 {
                    C64::new(0.0, 0.0)
                } else {
                    C64::new(
                        0.9f64.powi(n as i32 - 1) * (n as f64).sqrt() / crate::special::factorial(n - 1).sqrt(),
                        0.0,
                    )
                }
            })
            .collect();
        let want = FockVector::normalized(raw, 0.0).unwrap();
        assert!(pa.fidelity(&want) > 1.0 - 1e-14);
    }

    #[test]
    fn filtered_even_coherent_weight_sum() {
        // unfiltered even-sector weights minus the vacuum weight
        let x: f64 = 1.0;
        let mut sum = 0.0;
        let mut term = 1.0;
        for n in 0..200usize {
            if n > 0 {
                term *= x / n as f64;
            }
            if n % 2 == 0 && n > 0 {
                sum += 4.0 * term;
            }
        }
        assert!(close(sum, 4.0 * (1f64.cosh() - 1.0), 1e-13));
        let check = normalization_check(&StateSpec::ecs(1.0).vacuum_filtered()).unwrap();
        assert!(close(check.numeric, sum.powf(-0.5), 1e-13));
        assert!(check.printed_relative_error() > 0.1);
        assert!(check.closed_form_relative_error() < 1e-12);
    }

    #[test]
    fn engineered_states_have_vacuum_hole() {
        for spec in [
            StateSpec::ecs(1.0).vacuum_filtered(),
            StateSpec::ecs(1.0).photon_added(),
            StateSpec::bs(0.3, 10).vacuum_filtered(),
            StateSpec::bs(0.3, 10).photon_added(),
            StateSpec::ks(1.0, 0.02).vacuum_filtered(),
            StateSpec::ks(1.0, 0.02).photon_added(),
        ] {
            let v = build_engineered(&spec).unwrap();
            assert!(v.probabilities()[0] < 1e-24, "{spec}");
            assert!(close(v.norm_sqr(), 1.0, 1e-12), "{spec}");
        }
    }

    #[test]
    fn oracle_build_keeps_true_amplitudes_in_headroom() {
        let spec = StateSpec::ks(2.0, 0.05);
        let plain = build_state(&spec).unwrap();
        let wide = build_state_with(&spec, &BuildOptions::oracle()).unwrap();
        assert_eq!(wide.cutoff(), plain.cutoff() + DEFAULT_MAX_ORDER);
        assert!(wide.amplitude(wide.cutoff()).norm() > 0.0);
        assert!(wide.tail_bound() < plain.tail_bound());
    }

    #[test]
    fn labels() {
        assert_eq!(StateSpec::ks(1.0, 0.0).photon_added().label(), "PAKS");
        assert_eq!(StateSpec::bs(0.1, 3).vacuum_filtered().label(), "VFBS");
        assert_eq!(StateSpec::ecs(1.0).label(), "ECS");
    }
}
