//! Closed-form normally ordered moments `<a^+^j a^k>` for the nine states,
//! summed term by term, and the [`MomentTable`] that witnesses read from.
//!
//! Terms whose factorial arguments go negative correspond to annihilated
//! Fock components and are taken as zero. Series are summed in ascending
//! `n` until five consecutive terms fall below `1e-16` of the partial sum.

use std::collections::BTreeMap;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{moment_oracle, FockVector};
use crate::special::ln_factorial;
use crate::states::{normalization_closed_form, normalization_printed, pow_over, Engineering, Family, StateSpec};

/// Largest `j` or `k` accepted by the closed-form series.
pub const MAX_ANALYTIC_INDEX: usize = 8;

const SERIES_REL_TOL: f64 = 1e-16;
const SERIES_QUIET_TERMS: usize = 5;
const SERIES_MAX_TERMS: usize = 20_000;

fn sum_series(start: usize, mut term: impl FnMut(usize) -> C64) -> Result<C64> {
    let mut sum = C64::new(0.0, 0.0);
    let mut quiet = 0;
    // callers start at the first index where the term is not structurally zero
    for n in start..start + SERIES_MAX_TERMS {
        let t = term(n);
        if !(t.re.is_finite() && t.im.is_finite()) {
            return Err(Error::ConvergenceFailure(n - start));
        }
        sum += t;
        if t.norm() <= SERIES_REL_TOL * sum.norm() {
            quiet += 1;
            if quiet == SERIES_QUIET_TERMS {
                return Ok(sum);
            }
        } else {
            quiet = 0;
        }
    }
    Err(Error::ConvergenceFailure(SERIES_MAX_TERMS))
}

fn parity(n: i64) -> f64 {
    // (1 + (-1)^n)
    if n.rem_euclid(2) == 0 {
        2.0
    } else {
        0.0
    }
}

/// The two normalization prefactors `N^2` for a state's moment series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prefactors {
    /// Consistent with the Fock amplitudes; used for evaluation.
    pub amplitude_derived: f64,
    /// As printed alongside the series.
    pub printed: f64,
}

pub fn moment_prefactors(spec: &StateSpec) -> Prefactors {
    Prefactors {
        amplitude_derived: normalization_closed_form(spec).powi(2),
        printed: normalization_printed(spec).powi(2),
    }
}

fn ln_prefactor(spec: &StateSpec) -> Result<f64> {
    let pref = moment_prefactors(spec).amplitude_derived;
    if !(pref.is_finite() && pref > 0.0) {
        return Err(Error::FiltrationUndefined(1.0));
    }
    Ok(pref.ln())
}

fn check_indices(j: usize, k: usize) -> Result<()> {
    if j > MAX_ANALYTIC_INDEX || k > MAX_ANALYTIC_INDEX {
        return Err(Error::InvalidOrder(format!(
            "moment indices ({j}, {k}) exceed the series limit {MAX_ANALYTIC_INDEX}"
        )));
    }
    Ok(())
}

/// `<a^+^j a^k>` for the even coherent state and its two engineered forms.
pub fn moment_ecs_family(variant: Engineering, j: usize, k: usize, alpha: C64) -> Result<C64> {
    check_indices(j, k)?;
    let spec = StateSpec::ecs(alpha.norm()).with_engineering(variant);
    let ln_pref = ln_prefactor(&spec)?;
    let a = alpha.norm();
    let theta = alpha.arg();
    let (j, k) = (j as i64, k as i64);
    // every term carries alpha^n alpha*^(n-k+j), whose phase is theta (k - j)
    let phase = C64::from_polar(1.0, theta * (k - j) as f64);
    let sum = match variant {
        Engineering::None => sum_series(k as usize, |n| {
            let n = n as i64;
            let bra = n - k + j;
            let par = parity(n) * parity(bra);
            phase * par * pow_over(a, (n + bra) as usize, ln_factorial((n - k) as usize) - ln_pref)
        })?,
        Engineering::VacuumFiltered if k <= j => sum_series(k.max(1) as usize, |n| {
            let n = n as i64;
            let bra = n - k + j;
            let par = parity(n) * parity(bra);
            phase * par * pow_over(a, (n + bra) as usize, ln_factorial((n - k) as usize) - ln_pref)
        })?,
        Engineering::VacuumFiltered => sum_series(j.max(1) as usize, |n| {
            // n indexes the bra here
            let n = n as i64;
            let ket = n + k - j;
            let par = parity(n) * parity(ket);
            phase * par * pow_over(a, (n + ket) as usize, ln_factorial((n - j) as usize) - ln_pref)
        })?,
        Engineering::PhotonAdded => sum_series((k - 1).max(k - j).max(0) as usize, |n| {
            let n = n as i64;
            let bra = n - k + j;
            if bra < 0 {
                return C64::new(0.0, 0.0);
            }
            let par = parity(n) * parity(bra);
            let poly = ((n + 1) * (bra + 1)) as f64;
            phase * par * poly * pow_over(a, (n + bra) as usize, ln_factorial((n + 1 - k) as usize) - ln_pref)
        })?,
    };
    Ok(sum)
}

/// `p^e` with `0^0 = 1`, in logarithmic form.
fn ln_pow(base: f64, e: i64) -> f64 {
    if e == 0 {
        0.0
    } else if base == 0.0 {
        f64::NEG_INFINITY
    } else {
        e as f64 * base.ln()
    }
}

fn ln_fact_checked(n: i64) -> Option<f64> {
    (n >= 0).then(|| ln_factorial(n as usize))
}

/// `<a^+^t a^r>` for the binomial state and its two engineered forms.
/// The sums are finite; no convergence rule applies.
pub fn moment_bs_family(variant: Engineering, t: usize, r: usize, p: f64, m: usize) -> Result<f64> {
    check_indices(t, r)?;
    let spec = StateSpec::bs(p, m).with_engineering(variant);
    spec.validate()?;
    let ln_pref = ln_prefactor(&spec)?;
    let q = 1.0 - p;
    let (t, r, mm) = (t as i64, r as i64, m as i64);
    let ln_mfact = ln_factorial(m);
    // n indexes the ket except in the filtered r > t branch
    let first = i64::from(variant == Engineering::VacuumFiltered);
    let bra_indexed = variant == Engineering::VacuumFiltered && r > t;
    let mut sum = 0.0;
    for n in first..=mm {
        let ln_term = if bra_indexed {
            let (Some(f1), Some(f2), Some(f3)) = (
                ln_fact_checked(mm - n),
                ln_fact_checked(mm - n - r + t),
                ln_fact_checked(n - t),
            ) else {
                continue;
            };
            0.5 * (ln_pow(p, 2 * n + r - t) + ln_pow(q, 2 * mm - 2 * n - r + t) - f1 - f2) + ln_mfact - f3
        } else if variant == Engineering::PhotonAdded {
            let (Some(f1), Some(f2), Some(d1), Some(d2), Some(d3)) = (
                ln_fact_checked(mm - n),
                ln_fact_checked(mm - n + r - t),
                ln_fact_checked(n),
                ln_fact_checked(n + 1 - r),
                ln_fact_checked(n - r + t),
            ) else {
                continue;
            };
            let numer = ln_mfact + ln_factorial((n + 1) as usize) + ln_factorial((n + 1 - r + t) as usize);
            0.5 * (ln_pow(p, 2 * n - r + t) + ln_pow(q, 2 * mm - 2 * n + r - t) - f1 - f2) + numer - d1 - d2 - d3
        } else {
            let (Some(f1), Some(f2), Some(f3)) = (
                ln_fact_checked(mm - n),
                ln_fact_checked(mm - n + r - t),
                ln_fact_checked(n - r),
            ) else {
                continue;
            };
            0.5 * (ln_pow(p, 2 * n - r + t) + ln_pow(q, 2 * mm - 2 * n + r - t) - f1 - f2) + ln_mfact - f3
        };
        sum += (ln_term + ln_pref).exp();
    }
    Ok(sum)
}

/// `<a^+^q a^s>` for the Kerr state and its two engineered forms.
pub fn moment_ks_family(variant: Engineering, q: usize, s: usize, alpha: C64, chi: f64) -> Result<C64> {
    check_indices(q, s)?;
    let spec = StateSpec::ks(alpha.norm(), chi).with_engineering(variant);
    let ln_pref = ln_prefactor(&spec)?;
    let a = alpha.norm();
    let theta = alpha.arg();
    let (q, s) = (q as i64, s as i64);
    let kerr = |hi: i64, lo: i64| chi * ((hi * (hi - 1)) as f64 - (lo * (lo - 1)) as f64);
    let geometric = theta * (s - q) as f64;
    let sum = match variant {
        Engineering::None => sum_series(s as usize, |n| {
            let n = n as i64;
            let bra = n - s + q;
            let mag = pow_over(a, (n + bra) as usize, ln_factorial((n - s) as usize) - ln_pref);
            C64::from_polar(mag, geometric + kerr(bra, n))
        })?,
        Engineering::VacuumFiltered if s <= q => sum_series(s.max(1) as usize, |n| {
            let n = n as i64;
            let bra = n - s + q;
            let mag = pow_over(a, (n + bra) as usize, ln_factorial((n - s) as usize) - ln_pref);
            C64::from_polar(mag, geometric + kerr(bra, n))
        })?,
        Engineering::VacuumFiltered => sum_series(q.max(1) as usize, |n| {
            // n indexes the bra here
            let n = n as i64;
            let ket = n + s - q;
            let mag = pow_over(a, (n + ket) as usize, ln_factorial((n - q) as usize) - ln_pref);
            C64::from_polar(mag, geometric - kerr(ket, n))
        })?,
        Engineering::PhotonAdded => sum_series((s - 1).max(s - q).max(0) as usize, |n| {
            let n = n as i64;
            let bra = n - s + q;
            if bra < 0 {
                return C64::new(0.0, 0.0);
            }
            let ln_ratio = ln_factorial((n + 1) as usize) + ln_factorial((bra + 1) as usize)
                - ln_factorial(n as usize)
                - ln_factorial(bra as usize)
                - ln_factorial((n + 1 - s) as usize);
            let mag = pow_over(a, (n + bra) as usize, -ln_ratio - ln_pref);
            C64::from_polar(mag, geometric + kerr(bra, n))
        })?,
    };
    Ok(sum)
}

/// Closed-form `<a^+^j a^k>` for any of the nine states.
pub fn analytic_moment(spec: &StateSpec, j: usize, k: usize) -> Result<C64> {
    spec.validate()?;
    match spec.family {
        Family::Ecs => moment_ecs_family(spec.engineering, j, k, spec.alpha()),
        Family::Bs => moment_bs_family(spec.engineering, j, k, spec.p, spec.m).map(|x| C64::new(x, 0.0)),
        Family::Ks => moment_ks_family(spec.engineering, j, k, spec.alpha(), spec.chi),
    }
}

/// Where a [`MomentTable`] entry came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MomentSource {
    Oracle,
    Analytic(Family),
}

/// Cached `<a^+^j a^k>` values keyed by `(j, k)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MomentTable {
    entries: BTreeMap<(usize, usize), (C64, MomentSource)>,
}

impl MomentTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, j: usize, k: usize, value: C64, source: MomentSource) {
        self.entries.insert((j, k), (value, source));
    }

    pub fn get(&self, j: usize, k: usize) -> Result<C64> {
        self.entries.get(&(j, k)).map(|e| e.0).ok_or(Error::MissingMoment(j, k))
    }

    pub fn source(&self, j: usize, k: usize) -> Option<MomentSource> {
        self.entries.get(&(j, k)).map(|e| e.1)
    }

    pub fn contains(&self, j: usize, k: usize) -> bool {
        self.entries.contains_key(&(j, k))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = ((usize, usize), C64)> + '_ {
        self.entries.iter().map(|(&key, &(v, _))| (key, v))
    }

    /// Direct numerical moments of a truncated state.
    pub fn oracle(v: &FockVector, keys: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut table = Self::new();
        for (j, k) in keys {
            table.insert(j, k, moment_oracle(v, j, k)?, MomentSource::Oracle);
        }
        Ok(table)
    }

    /// Closed-form moments of the state named by `spec`.
    pub fn analytic(spec: &StateSpec, keys: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut table = Self::new();
        for (j, k) in keys {
            table.insert(j, k, analytic_moment(spec, j, k)?, MomentSource::Analytic(spec.family));
        }
        Ok(table)
    }

    /// Largest `|m(j,k) - conj(m(k,j))|` over pairs present in both orders.
    pub fn hermiticity_defect(&self) -> f64 {
        self.entries
            .iter()
            .filter_map(|(&(j, k), &(v, _))| self.entries.get(&(k, j)).map(|&(w, _)| (v - w.conj()).norm()))
            .fold(0.0, f64::max)
    }
}

/// All `(j, k)` with `j + k <= order`.
pub fn keys_up_to_order(order: usize) -> Vec<(usize, usize)> {
    (0..=order)
        .flat_map(|total| (0..=total).map(move |j| (j, total - j)))
        .collect()
}
