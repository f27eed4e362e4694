//! Combinatorial helpers: factorials, binomials, Pochhammer symbols, double
//! factorials and Stirling numbers of the second kind.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest `n` for which `n!` is finite in double precision.
const MAX_EXACT_FACTORIAL: usize = 170;
const LN_FACTORIAL_TABLE: usize = 4096;

fn factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = Vec::with_capacity(MAX_EXACT_FACTORIAL + 1);
        t.push(1.0);
        for n in 1..=MAX_EXACT_FACTORIAL {
            t.push(t[n - 1] * n as f64);
        }
        t
    })
}

fn ln_factorial_table() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let exact = factorial_table();
        let mut t = Vec::with_capacity(LN_FACTORIAL_TABLE);
        for n in 0..LN_FACTORIAL_TABLE {
            if n <= MAX_EXACT_FACTORIAL {
                t.push(exact[n].ln());
            } else {
                let prev: f64 = t[n - 1];
                t.push(prev + (n as f64).ln());
            }
        }
        t
    })
}

/// `n!` as a float; `inf` beyond 170.
pub fn factorial(n: usize) -> f64 {
    factorial_table().get(n).copied().unwrap_or(f64::INFINITY)
}

/// `ln(n!)`.
pub fn ln_factorial(n: usize) -> f64 {
    let t = ln_factorial_table();
    if n < t.len() {
        return t[n];
    }
    let mut acc = t[t.len() - 1];
    for k in t.len()..=n {
        acc += (k as f64).ln();
    }
    acc
}

/// Binomial coefficient `C(n, k)`, zero when `k` lies outside `0..=n`.
pub fn binomial(n: i64, k: i64) -> f64 {
    if n < 0 || k < 0 || k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

/// Rising factorial `(x)_n = x (x+1) ... (x+n-1)`.
pub fn pochhammer(x: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (x + i as f64))
}

/// `n!!` for `n >= -1`, with `(-1)!! = 0!! = 1`.
pub fn double_factorial(n: i64) -> Result<f64> {
    if n < -1 {
        return Err(Error::InvalidParameter(format!("double factorial of {n}")));
    }
    let mut acc = 1.0;
    let mut k = n;
    while k > 1 {
        acc *= k as f64;
        k -= 2;
    }
    Ok(acc)
}

/// Stirling number of the second kind `S2(u, v)`.
pub fn stirling2(u: usize, v: usize) -> u128 {
    if v > u {
        return 0;
    }
    // row-by-row recurrence S(n,k) = k S(n-1,k) + S(n-1,k-1)
    let mut row = vec![0u128; v + 1];
    row[0] = 1;
    for n in 1..=u {
        for k in (1..=v.min(n)).rev() {
            row[k] = k as u128 * row[k] + row[k - 1];
        }
        row[0] = 0;
    }
    row[v]
}
