//! Entanglement potential: mix a state with vacuum on a balanced beam
//! splitter and measure the linear entropy of one output mode.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fock::FockVector;
use crate::special::{binomial, ln_factorial};
use crate::states::{build_state_with, choose_cutoff, normalization_closed_form, normalization_printed, BuildOptions};
use crate::states::{Engineering, Family, StateSpec};

/// Tail tolerance used for the triple sums of the closed forms.
const CLOSED_FORM_TAIL_TOL: f64 = 1e-14;
const IMAG_TOL: f64 = 1e-10;

/// Two-mode pure state `sum d[j][m] |j, m>` with `j + m <= cutoff`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeVector {
    cutoff: usize,
    /// Row `j` holds the mode-B amplitudes `d[j][0..=cutoff-j]`.
    rows: Vec<Vec<C64>>,
}

impl TwoModeVector {
    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    pub fn amplitude(&self, j: usize, m: usize) -> C64 {
        self.rows.get(j).and_then(|r| r.get(m)).copied().unwrap_or_default()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.rows.iter().flatten().map(|c| c.norm_sqr()).sum()
    }

    /// The same state with the two modes exchanged.
    pub fn swapped(&self) -> TwoModeVector {
        let rows = (0..=self.cutoff)
            .map(|m| (0..=self.cutoff - m).map(|j| self.rows[j][m]).collect())
            .collect();
        TwoModeVector {
            cutoff: self.cutoff,
            rows,
        }
    }
}

/// Output of a 50:50 beam splitter fed with `v` and vacuum:
/// `c_n 2^{-n/2} sqrt(C(n, j))` on `|j, n - j>`.
pub fn beamsplit_with_vacuum(v: &FockVector) -> TwoModeVector {
    let cutoff = v.cutoff();
    let mut rows: Vec<Vec<C64>> = (0..=cutoff).map(|j| vec![C64::default(); cutoff - j + 1]).collect();
    let ln2 = std::f64::consts::LN_2;
    for (n, &c) in v.amplitudes().iter().enumerate() {
        if c == C64::default() {
            continue;
        }
        for j in 0..=n {
            let ln_w = 0.5 * (ln_factorial(n) - ln_factorial(j) - ln_factorial(n - j) - n as f64 * ln2);
            rows[j][n - j] = c * ln_w.exp();
        }
    }
    TwoModeVector { cutoff, rows }
}

/// `Tr(rho_B^2)`: squared Frobenius norm of the Gram matrix of the mode-B
/// conditional vectors (the rows of `t`).
pub fn reduced_purity(t: &TwoModeVector) -> f64 {
    let k = t.cutoff;
    let mut purity = 0.0;
    for m in 0..=k {
        for mp in m..=k {
            let mut rho = C64::default();
            for j in 0..=k - m.max(mp) {
                rho += t.rows[j][m] * t.rows[j][mp].conj();
            }
            let w = if m == mp { 1.0 } else { 2.0 };
            purity += w * rho.norm_sqr();
        }
    }
    purity
}

/// Linear entropy `1 - Tr(rho_B^2)` of the beam-splitter output.
pub fn linear_entropy(v: &FockVector) -> f64 {
    (1.0 - reduced_purity(&beamsplit_with_vacuum(v))).max(0.0)
}

/// Builds `spec` and returns its linear entropy.
pub fn linear_entropy_of(spec: &StateSpec, opts: &BuildOptions) -> Result<f64> {
    Ok(linear_entropy(&build_state_with(spec, opts)?))
}

/// Triple-sum closed form of the linear entropy, using normalization
/// constants derived from the amplitudes.
pub fn linear_entropy_closed_form(spec: &StateSpec) -> Result<f64> {
    closed_form(spec, normalization_closed_form(spec), false)
}

/// The same triple sum with the printed normalization constants and index
/// ranges taken literally. Differs from [`linear_entropy_closed_form`] for
/// the vacuum-filtered states, where the literal ranges keep terms whose
/// fourth index is the removed vacuum, and for the printed vacuum-filtered
/// even coherent constant.
pub fn linear_entropy_printed(spec: &StateSpec) -> Result<f64> {
    closed_form(spec, normalization_printed(spec), true)
}

/// Natural log of `|parent weight|` products and the Kerr phase for indices
/// `(n, m, r, s)`, without the beam-splitter kernel. `None` for vanishing terms.
fn parent_term(spec: &StateSpec, n: usize, m: usize, r: usize, s: usize) -> Option<(f64, f64)> {
    let idx = [n, m, r, s];
    match spec.family {
        Family::Ecs | Family::Ks => {
            let x = spec.alpha_mag * spec.alpha_mag;
            if spec.family == Family::Ecs && idx.iter().any(|i| i % 2 == 1) {
                return None;
            }
            if x == 0.0 && n + r > 0 {
                return None;
            }
            let ln_pow = if n + r == 0 { 0.0 } else { (n + r) as f64 * x.ln() };
            let mut ln_mag = ln_pow - ln_factorial(n) - ln_factorial(r);
            let mut phase = 0.0;
            if spec.family == Family::Ecs {
                ln_mag += 16f64.ln();
            } else {
                let q = |i: usize| (i * i.saturating_sub(1)) as f64;
                phase = spec.chi * (q(m) - q(n) - q(r) + q(s));
            }
            Some((ln_mag, phase))
        }
        Family::Bs => {
            let big = spec.m;
            if idx.iter().any(|&i| i > big) {
                return None;
            }
            let (p, q) = (spec.p, 1.0 - spec.p);
            let e_p = (n + r) as f64;
            let e_q = (2 * big - n - r) as f64;
            if (p == 0.0 && e_p > 0.0) || (q == 0.0 && e_q > 0.0) {
                return None;
            }
            let lp = if e_p > 0.0 { e_p * p.ln() } else { 0.0 };
            let lq = if e_q > 0.0 { e_q * q.ln() } else { 0.0 };
            let ln_den: f64 = idx.iter().map(|&i| ln_factorial(big - i)).sum();
            let ln_mag = 2.0 * ln_factorial(big) + lp + lq - 0.5 * ln_den - ln_factorial(n) - ln_factorial(r);
            Some((ln_mag, 0.0))
        }
    }
}

/// Beam-splitter kernel `sum_k C(n,k) C(r, r+k-m) 2^{-(n+r)}`, or its
/// photon-added counterpart.
fn kernel(photon_added: bool, n: usize, m: usize, r: usize, s: usize) -> f64 {
    let (n, r, m_i) = (n as i64, r as i64, m as i64);
    if photon_added {
        let sum: f64 = (0..=n + 1)
            .map(|k| binomial(n + 1, k) * binomial(r + 1, r + k - m_i))
            .sum();
        sum * 0.5f64.powi((n + r + 2) as i32) * ((m + 1) * (s + 1)) as f64
    } else {
        let sum: f64 = (0..=n).map(|k| binomial(n, k) * binomial(r, r + k - m_i)).sum();
        sum * 0.5f64.powi((n + r) as i32)
    }
}

fn closed_form(spec: &StateSpec, norm: f64, literal: bool) -> Result<f64> {
    spec.validate()?;
    if !(norm.is_finite() && norm > 0.0) {
        return Err(Error::FiltrationUndefined(1.0));
    }
    let photon_added = spec.engineering == Engineering::PhotonAdded;
    let filtered = spec.engineering == Engineering::VacuumFiltered;
    let top = choose_cutoff(&spec.parent(), CLOSED_FORM_TAIL_TOL)?.max(choose_cutoff(spec, CLOSED_FORM_TAIL_TOL)?);
    let first = usize::from(filtered);
    let ln_norm4 = 4.0 * norm.ln();
    let mut acc = C64::default();
    for n in first..=top {
        for r in first..=top {
            for m in first..=(n + r).min(top) {
                let s = n + r - m;
                if s > top || (filtered && !literal && s == 0) {
                    continue;
                }
                let Some((ln_mag, phase)) = parent_term(spec, n, m, r, s) else {
                    continue;
                };
                let k = kernel(photon_added, n, m, r, s);
                if k == 0.0 {
                    continue;
                }
                acc += C64::from_polar((ln_norm4 + ln_mag).exp() * k, phase);
            }
        }
    }
    if !acc.re.is_finite() {
        return Err(Error::ConvergenceFailure(top));
    }
    if acc.im.abs() > IMAG_TOL {
        return Err(Error::InvalidParameter(format!(
            "closed-form purity has imaginary part {}",
            acc.im
        )));
    }
    Ok(1.0 - acc.re)
}
