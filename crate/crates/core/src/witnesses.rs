//! Higher-order antibunching, Hong-Mandel squeezing and sub-Poissonian
//! photon-statistics witnesses.
//!
//! Each report carries a formula value computed from a [`MomentTable`] and
//! an oracle value computed directly from the state vector. The
//! nonclassicality flag is always `formula_value < 0`.

use std::sync::OnceLock;

use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fock::{number_central_moment_oracle, quadrature_central_moment_oracle, FockVector};
use crate::moments::{keys_up_to_order, MomentTable};
use crate::special::{binomial, double_factorial, factorial, pochhammer, stirling2};
use crate::states::{build_state_with, BuildOptions, StateSpec};

/// Relative gap above which formula and oracle are flagged as disagreeing.
pub const DISCREPANCY_TOL: f64 = 1e-8;
/// Bound on imaginary residue of moments that must be real.
const IMAG_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum WitnessKind {
    Hoa,
    Hos,
    Hosps,
}

impl WitnessKind {
    pub fn name(self) -> &'static str {
        match self {
            WitnessKind::Hoa => "hoa",
            WitnessKind::Hos => "hos",
            WitnessKind::Hosps => "hosps",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub kind: WitnessKind,
    /// `xi` for antibunching, `l` otherwise.
    pub order: usize,
    pub formula_value: f64,
    pub oracle_value: f64,
    pub nonclassical: bool,
    pub discrepancy: bool,
    /// Which expansion produced the formula value, when there is a choice.
    pub reading: Option<HosReading>,
}

impl WitnessReport {
    fn new(kind: WitnessKind, order: usize, formula_value: f64, oracle_value: f64) -> Self {
        WitnessReport {
            kind,
            order,
            formula_value,
            oracle_value,
            nonclassical: formula_value < 0.0,
            discrepancy: (formula_value - oracle_value).abs() > DISCREPANCY_TOL * oracle_value.abs().max(1.0),
            reading: None,
        }
    }
}

fn real_part(value: C64, what: &str) -> Result<f64> {
    if value.im.abs() > IMAG_TOL * value.norm().max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "{what} has imaginary part {}",
            value.im
        )));
    }
    Ok(value.re)
}

/// `<a^+^n a^n> - <a^+ a>^n`, i.e. the antibunching witness of order
/// `n - 1`; zero for `n <= 1`.
fn antibunching_excess(m: &MomentTable, n: usize) -> Result<f64> {
    if n <= 1 {
        return Ok(0.0);
    }
    let number = real_part(m.get(1, 1)?, "<a^+ a>")?;
    let diag = real_part(m.get(n, n)?, "diagonal moment")?;
    Ok(diag - number.powi(n as i32))
}

/// `A(xi) = <a^+^(xi+1) a^(xi+1)> - <a^+ a>^(xi+1)`.
pub fn antibunching(m: &MomentTable, xi: usize) -> Result<f64> {
    antibunching_excess(m, xi + 1)
}

/// Moment keys read by [`hoa`].
pub fn hoa_keys(xi: usize) -> Vec<(usize, usize)> {
    vec![(1, 1), (xi + 1, xi + 1)]
}

pub fn hoa(m: &MomentTable, xi: usize) -> Result<WitnessReport> {
    if xi == 0 {
        return Err(Error::InvalidOrder("antibunching order must be positive".into()));
    }
    let value = antibunching(m, xi)?;
    Ok(WitnessReport::new(WitnessKind::Hoa, xi, value, value))
}

/// Candidate readings of the normal-ordered expansion of `<(dX)^l>`.
///
/// The expansion is
/// `2^{-l/2} sum_r sum_i sum_k (-1)^r C(l,r) C(r,2i) c(i,k) <a^+ + a>^{l-r} <a^+^k a^{r-2i-k}>`
/// and the readings differ in the combinatorial factor `c(i,k)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum HosReading {
    /// `c(i,k) = (2i-1)! C(2i, k)`, taking the coefficient literally.
    AsPrinted,
    /// `c(i,k) = (2i-1)!! C(r-2i, k)`, the normal-ordering of `(a + a^+)^r`.
    DoubleFactorial,
}

impl HosReading {
    pub const CANDIDATES: [HosReading; 2] = [HosReading::AsPrinted, HosReading::DoubleFactorial];

    fn coefficient(self, r: usize, i: usize, k: usize) -> f64 {
        match self {
            HosReading::AsPrinted => {
                let f = if i == 0 { 1.0 } else { factorial(2 * i - 1) };
                f * binomial(2 * i as i64, k as i64)
            }
            HosReading::DoubleFactorial => {
                double_factorial(2 * i as i64 - 1).unwrap_or(1.0) * binomial((r - 2 * i) as i64, k as i64)
            }
        }
    }
}

/// `<(X - <X>)^l>` from normally ordered moments under the given reading.
pub fn quadrature_central_moment(m: &MomentTable, l: usize, reading: HosReading) -> Result<f64> {
    check_even(l)?;
    let mean_y = 2.0 * m.get(0, 1)?.re; // <a^+ + a>
    let mut acc = C64::new(0.0, 0.0);
    for r in 0..=l {
        let sign = if r % 2 == 0 { 1.0 } else { -1.0 };
        let outer = sign * binomial(l as i64, r as i64) * mean_y.powi((l - r) as i32);
        for i in 0..=r / 2 {
            let mid = outer * binomial(r as i64, 2 * i as i64);
            for k in 0..=r - 2 * i {
                acc += m.get(k, r - 2 * i - k)? * (mid * reading.coefficient(r, i, k));
            }
        }
    }
    acc /= 2f64.powi((l / 2) as i32);
    real_part(acc, "quadrature moment")
}

fn check_even(l: usize) -> Result<()> {
    if l == 0 || l % 2 == 1 {
        return Err(Error::InvalidOrder(format!(
            "squeezing order {l} must be even and positive"
        )));
    }
    Ok(())
}

/// `(1/2)_{l/2}`, the coherent-state level of `<(dX)^l>`.
pub fn gaussian_level(l: usize) -> f64 {
    pochhammer(0.5, l / 2)
}

fn normalized_squeezing(moment: f64, l: usize) -> f64 {
    let level = gaussian_level(l);
    (moment - level) / level
}

/// States on which the quadrature-expansion readings are validated.
pub fn hos_validation_states() -> Vec<(String, FockVector)> {
    let mut out = vec![
        ("vacuum".to_string(), FockVector::vacuum()),
        ("|1>".to_string(), FockVector::fock(1)),
        ("|2>".to_string(), FockVector::fock(2)),
    ];
    for (name, spec) in [
        ("coherent(0.5)", StateSpec::coherent(0.5)),
        ("coherent(1.0)", StateSpec::coherent(1.0)),
        ("ECS(1.0)", StateSpec::ecs(1.0)),
    ] {
        if let Ok(v) = build_state_with(&spec, &BuildOptions::oracle()) {
            out.push((name.to_string(), v));
        }
    }
    out
}

/// Orders on which the readings are validated.
pub const HOS_VALIDATION_ORDERS: [usize; 3] = [2, 4, 6];

/// Largest relative deviation of a reading from the quadrature oracle over
/// the validation set.
pub fn hos_reading_deviation(reading: HosReading) -> Result<f64> {
    let mut worst = 0.0f64;
    for (_, v) in hos_validation_states() {
        let padded = v.extended(8);
        let table = MomentTable::oracle(&padded, keys_up_to_order(6))?;
        for l in HOS_VALIDATION_ORDERS {
            let oracle = quadrature_central_moment_oracle(&padded, l)?;
            let formula = quadrature_central_moment(&table, l, reading)?;
            worst = worst.max((formula - oracle).abs() / oracle.abs().max(1e-300));
        }
    }
    Ok(worst)
}

/// Picks the first reading that matches the oracle to `1e-8` relative on
/// every validation state and order. Evaluated once per process.
pub fn selected_hos_reading() -> Result<HosReading> {
    static SELECTED: OnceLock<Option<HosReading>> = OnceLock::new();
    SELECTED
        .get_or_init(|| {
            HosReading::CANDIDATES
                .into_iter()
                .find(|&r| hos_reading_deviation(r).map(|d| d <= DISCREPANCY_TOL).unwrap_or(false))
        })
        .ok_or(Error::NoValidReading)
}

pub fn hos_keys(l: usize) -> Vec<(usize, usize)> {
    keys_up_to_order(l)
}

/// Hong-Mandel `S(l)`: formula from moments, oracle from the state vector.
pub fn hos(m: &MomentTable, v: &FockVector, l: usize) -> Result<WitnessReport> {
    check_even(l)?;
    let reading = selected_hos_reading()?;
    let formula = normalized_squeezing(quadrature_central_moment(m, l, reading)?, l);
    let oracle = normalized_squeezing(quadrature_central_moment_oracle(v, l)?, l);
    let mut report = WitnessReport::new(WitnessKind::Hos, l, formula, oracle);
    report.reading = Some(reading);
    Ok(report)
}

pub fn hosps_keys(l: usize) -> Vec<(usize, usize)> {
    (1..=l + 1).map(|n| (n, n)).collect()
}

/// `D(l) = sum_u sum_v S2(u,v) C(l,u) (-1)^u A(v) <N>^(l-u)` with `A(0) = 0`.
pub fn hosps_formula(m: &MomentTable, l: usize) -> Result<f64> {
    let number = real_part(m.get(1, 1)?, "<a^+ a>")?;
    let mut acc = 0.0;
    for u in 0..=l {
        let sign = if u % 2 == 0 { 1.0 } else { -1.0 };
        let outer = binomial(l as i64, u as i64) * sign * number.powi((l - u) as i32);
        for v in 1..=u {
            acc += stirling2(u, v) as f64 * outer * antibunching(m, v)?;
        }
    }
    Ok(acc)
}

/// Magnitude of the quantities cancelling inside [`hosps_formula`]:
/// the same double sum with every `A(v)` replaced by
/// `|<a^+^(v+1) a^(v+1)>| + <N>^(v+1)` and all signs dropped. Formula values
/// within a small multiple of `f64::EPSILON` times this scale are
/// indistinguishable from zero.
pub fn hosps_rounding_scale(m: &MomentTable, l: usize) -> Result<f64> {
    let number = real_part(m.get(1, 1)?, "<a^+ a>")?.abs();
    let mut acc = 0.0;
    for u in 1..=l {
        let outer = binomial(l as i64, u as i64) * number.powi((l - u) as i32);
        for v in 1..=u {
            let diag = m.get(v + 1, v + 1)?.norm() + number.powi(v as i32 + 1);
            acc += stirling2(u, v) as f64 * outer * diag;
        }
    }
    Ok(acc)
}

/// `l`-th central moment of a Poisson distribution with mean `lambda`, by
/// direct summation of the probability mass function.
pub fn poisson_central_moment(lambda: f64, l: usize) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let mut pmf = (-lambda).exp();
    let mut acc = pmf * (-lambda).powi(l as i32);
    let mut n = 0usize;
    loop {
        n += 1;
        pmf *= lambda / n as f64;
        acc += pmf * (n as f64 - lambda).powi(l as i32);
        let ratio = lambda / (n + 1) as f64;
        if ratio < 0.5 && pmf * ratio / (1.0 - ratio) < 1e-15 * 1e-3 {
            break;
        }
    }
    acc
}

/// Higher-order sub-Poissonian witness of order `l >= 2`: formula path as
/// [`hosps_formula`], oracle path `<(dN)^l> - <(dN)^l>_Poisson`.
pub fn hosps(m: &MomentTable, v: &FockVector, l: usize) -> Result<WitnessReport> {
    if l < 2 {
        return Err(Error::InvalidOrder(format!(
            "sub-Poissonian order {l} must be at least 2"
        )));
    }
    let formula = hosps_formula(m, l)?;
    let mean = v.mean_number();
    let oracle = number_central_moment_oracle(v, l)? - poisson_central_moment(mean, l);
    Ok(WitnessReport::new(WitnessKind::Hosps, l, formula, oracle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{moment_oracle, quadrature_central_moment_oracle};
    use crate::states::{build_state_with, BuildOptions};

    fn oracle_table(v: &FockVector, order: usize) -> MomentTable {
        MomentTable::oracle(v, keys_up_to_order(order)).unwrap()
    }

    #[test]
    fn one_photon_antibunching() {
        let v = FockVector::fock(1).extended(4);
        let r = hoa(&oracle_table(&v, 4), 1).unwrap();
        assert_eq!(r.formula_value, -1.0);
        assert!(r.nonclassical);
        assert_eq!(r.oracle_value, r.formula_value);
    }

    #[test]
    fn fock_antibunching_closed_form() {
        for n in 2..=6usize {
            let v = FockVector::fock(n).extended(2);
            let t = oracle_table(&v, 12);
            for xi in 1..n {
                let want = factorial(n) / factorial(n - xi - 1) - (n as f64).powi(xi as i32 + 1);
                let got = hoa(&t, xi).unwrap().formula_value;
                assert!((got - want).abs() < 1e-9 * want.abs(), "n={n} xi={xi}");
                assert!(got < 0.0);
            }
        }
    }

    #[test]
    fn coherent_antibunching_vanishes() {
        let v = build_state_with(&StateSpec::coherent(1.1), &BuildOptions::oracle()).unwrap();
        let t = oracle_table(&v, 8);
        for xi in 1..=3 {
            assert!(hoa(&t, xi).unwrap().formula_value.abs() < 1e-12);
        }
    }

    #[test]
    fn missing_moment_is_reported() {
        let t = MomentTable::new();
        assert!(matches!(hoa(&t, 1), Err(Error::MissingMoment(..))));
        assert!(hoa(&t, 0).is_err());
    }

    #[test]
    fn double_factorial_reading_is_selected() {
        assert_eq!(selected_hos_reading().unwrap(), HosReading::DoubleFactorial);
        assert!(hos_reading_deviation(HosReading::DoubleFactorial).unwrap() < 1e-8);
        assert!(hos_reading_deviation(HosReading::AsPrinted).unwrap() > 1e-3);
    }

    #[test]
    fn squeezing_of_vacuum_and_one_photon() {
        let vac = FockVector::vacuum().extended(6);
        let t = oracle_table(&vac, 6);
        for l in [2, 4, 6] {
            let r = hos(&t, &vac, l).unwrap();
            assert!(r.formula_value.abs() < 1e-12 && r.oracle_value.abs() < 1e-12);
        }
        let one = FockVector::fock(1).extended(6);
        let r = hos(&oracle_table(&one, 6), &one, 2).unwrap();
        assert!((r.formula_value - 2.0).abs() < 1e-12);
        assert!(!r.nonclassical);
        assert!(hos(&t, &vac, 3).is_err());
    }

    #[test]
    fn second_order_squeezing_is_variance_witness() {
        let v = build_state_with(
            &StateSpec::ks(1.5, 0.05).with_theta(0.3).photon_added(),
            &BuildOptions::oracle(),
        )
        .unwrap();
        let var = quadrature_central_moment_oracle(&v, 2).unwrap();
        let r = hos(&oracle_table(&v, 2), &v, 2).unwrap();
        assert!((r.oracle_value - (2.0 * var - 1.0)).abs() < 1e-12);
        assert!((r.formula_value - (2.0 * var - 1.0)).abs() < 1e-10);
    }

    #[test]
    fn sub_poissonian_of_one_photon() {
        let v = FockVector::fock(1).extended(4);
        let r = hosps(&oracle_table(&v, 8), &v, 2).unwrap();
        assert!((r.oracle_value + 1.0).abs() < 1e-12);
    }

    #[test]
    fn sub_poissonian_coherent_zero() {
        let v = build_state_with(&StateSpec::coherent(0.9), &BuildOptions::oracle()).unwrap();
        let t = MomentTable::oracle(&v, hosps_keys(5)).unwrap();
        for l in 2..=5 {
            let r = hosps(&t, &v, l).unwrap();
            assert!(r.formula_value.abs() < 1e-12, "l={l}: {}", r.formula_value);
            assert!(r.oracle_value.abs() < 1e-10, "l={l}: {}", r.oracle_value);
        }
    }

    #[test]
    fn kerr_sub_poissonian_formula_is_rounding_noise() {
        let spec = StateSpec::ks(3.0, 0.02);
        let v = build_state_with(&spec, &BuildOptions::oracle()).unwrap();
        let t = MomentTable::oracle(&v, hosps_keys(5)).unwrap();
        for l in 2..=5 {
            let d = hosps_formula(&t, l).unwrap();
            let scale = hosps_rounding_scale(&t, l).unwrap();
            assert!(d.abs() <= 1e-12 * scale, "l={l}: {d} vs scale {scale}");
        }
    }

    #[test]
    fn poisson_moments_known_values() {
        // mu2 = lambda, mu3 = lambda, mu4 = lambda (1 + 3 lambda)
        for &lam in &[0.3, 1.0, 4.0, 9.0] {
            assert!((poisson_central_moment(lam, 2) - lam).abs() < 1e-12 * lam.max(1.0));
            assert!((poisson_central_moment(lam, 3) - lam).abs() < 1e-11 * lam.max(1.0));
            let mu4 = lam * (1.0 + 3.0 * lam);
            assert!((poisson_central_moment(lam, 4) - mu4).abs() < 1e-11 * mu4);
        }
        assert_eq!(poisson_central_moment(0.0, 3), 0.0);
    }

    #[test]
    fn antibunching_excess_uses_zero_at_order_zero() {
        let v = build_state_with(&StateSpec::ecs(1.0), &BuildOptions::oracle()).unwrap();
        let t = MomentTable::oracle(&v, [(1, 1)]).unwrap();
        assert_eq!(antibunching_excess(&t, 1).unwrap(), 0.0);
        let _ = moment_oracle(&v, 1, 1).unwrap();
    }
}
