//! Exact complexity bookkeeping: the L-table, the closed form for
//! `K(2^k)`, its matrix recursion and the older comparison bounds.
//!
//! Everything here is exact integer arithmetic. Fractions are evaluated
//! over a common denominator and the division is asserted to be exact.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{invariant, SynthError};
use crate::karatsuba::{predict_overhead, MIN_KARATSUBA_BITS};
use crate::school::predict_school_count;
use crate::synth::Method;

/// `Φ_k` with `Φ_1 = Φ_2 = 1`.
pub fn fib(k: u32) -> Result<BigInt, SynthError> {
    if k < 1 {
        return Err(SynthError::Domain("Fibonacci index starts at 1".into()));
    }
    let (mut a, mut b) = (BigInt::zero(), BigInt::one());
    for _ in 1..k {
        let next = &a + &b;
        a = b;
        b = next;
    }
    Ok(b)
}

fn pow(base: u32, exp: u32) -> BigInt {
    num_traits::pow(BigInt::from(base), exp as usize)
}

fn exact_div(num: BigInt, den: u32, what: &str) -> Result<BigInt, SynthError> {
    let den = BigInt::from(den);
    if !(&num % &den).is_zero() {
        return Err(invariant(format!("{what}: {num} is not divisible by {den}")));
    }
    Ok(num / den)
}

/// `10208·3^k/405 − 38·2^k − 81Φ_{k+2}/5 − 37Φ_{k+1}/5 + 20` for `k >= 4`.
pub fn closed_form_k(k: u32) -> Result<BigInt, SynthError> {
    if k < 4 {
        return Err(SynthError::Domain(format!("closed form holds from k = 4, got {k}")));
    }
    // Over the denominator 405 = 81·5.
    let num = BigInt::from(10208) * pow(3, k)
        - BigInt::from(38 * 405) * pow(2, k)
        - BigInt::from(81 * 81) * fib(k + 2)?
        - BigInt::from(37 * 81) * fib(k + 1)?
        + BigInt::from(20 * 405);
    exact_div(num, 405, "closed form")
}

/// `(K(2^k+2), K(2^k+1), K(2^k))`.
pub type StateVector = [BigInt; 3];

const A: [[i64; 3]; 3] = [[1, 2, 0], [1, 1, 1], [0, 1, 2]];

pub fn step_offsets(k: u32) -> [BigInt; 3] {
    let t = BigInt::from(38) * pow(2, k);
    [&t + 36, &t + 22, &t - 2]
}

/// `A·x + offsets`.
pub fn matrix_step_with(x: &StateVector, offsets: &[BigInt; 3]) -> StateVector {
    std::array::from_fn(|r| {
        let mut acc = offsets[r].clone();
        for (c, xc) in x.iter().enumerate() {
            acc += BigInt::from(A[r][c]) * xc;
        }
        acc
    })
}

/// `X_{k+1} = A·X_k + b_k`.
pub fn matrix_step(x: &StateVector, k: u32) -> StateVector {
    matrix_step_with(x, &step_offsets(k))
}

/// Seed of the matrix recursion.
pub fn x4() -> StateVector {
    [BigInt::from(1598), BigInt::from(1479), BigInt::from(1287)]
}

/// `X_k` propagated from `X_4`.
pub fn propagate(k: u32) -> Result<StateVector, SynthError> {
    if k < 4 {
        return Err(SynthError::Domain(format!("matrix recursion starts at k = 4, got {k}")));
    }
    let mut x = x4();
    for j in 4..k {
        x = matrix_step(&x, j);
    }
    Ok(x)
}

/// Reference standard-method count `6n² − 8n`.
pub fn legacy_school(n: u64) -> u64 {
    6 * n * n - 8 * n
}

/// Reference Karatsuba bound `236·3^k/9 − 49·2^k + 4`.
pub fn legacy_karatsuba(k: u32) -> Result<BigInt, SynthError> {
    let num = BigInt::from(236) * pow(3, k) - BigInt::from(49 * 9) * pow(2, k) + BigInt::from(36);
    exact_div(num, 9, "legacy Karatsuba bound")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub m: usize,
    #[serde(rename = "L")]
    pub l: u64,
    pub method: Method,
}

/// `L(m)` for `1 <= m <= max`: the school formula, or the Karatsuba
/// recurrence over smaller entries where that is cheaper.
#[derive(Clone, Debug)]
pub struct BoundsTable {
    rows: Vec<TableRow>,
}

impl BoundsTable {
    pub fn l(&self, m: usize) -> u64 {
        self.rows[m - 1].l
    }

    pub fn method(&self, m: usize) -> Method {
        self.rows[m - 1].method
    }

    pub fn max(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    /// Karatsuba recurrence for `m` over this table; needs `n + 1 <= max`.
    pub fn karatsuba_branch(&self, m: usize, sharing: bool) -> Option<u64> {
        let n = m.div_ceil(2);
        if m < MIN_KARATSUBA_BITS || n + 1 > self.max() {
            return None;
        }
        Some(self.l(n + 1) + self.l(m - n) + self.l(n) + predict_overhead(m, sharing) as u64)
    }
}

pub fn recurrence_l_table(max_m: usize) -> BoundsTable {
    let mut table = BoundsTable { rows: Vec::with_capacity(max_m) };
    for m in 1..=max_m {
        let school = predict_school_count(m) as u64;
        // Sub-widths n + 1 < m for m >= 3, so they are already tabulated.
        let n = m.div_ceil(2);
        let karatsuba = (m >= MIN_KARATSUBA_BITS).then(|| {
            table.rows[n].l + table.rows[m - n - 1].l + table.rows[n - 1].l + predict_overhead(m, true) as u64
        });
        let row = match karatsuba {
            Some(k) if k < school => TableRow { m, l: k, method: Method::Karatsuba },
            _ => TableRow { m, l: school, method: Method::School },
        };
        table.rows.push(row);
    }
    table
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundsRow {
    pub k: u32,
    pub closed: String,
    pub matrix: String,
    pub table: Option<String>,
    pub legacy: String,
    pub closed_eq_matrix: bool,
    pub table_eq_matrix: Option<bool>,
}

/// Rows `k = 4..=kmax` comparing the closed form, the matrix recursion,
/// the L-table (when `2^k + 2 <= table_limit`) and the legacy bound.
pub fn bounds_report(kmax: u32, table_limit: usize) -> Result<Vec<BoundsRow>, SynthError> {
    if kmax < 4 {
        return Err(SynthError::Domain(format!("kmax must be at least 4, got {kmax}")));
    }
    let top = 1usize.checked_shl(kmax).and_then(|p| p.checked_add(2)).unwrap_or(usize::MAX);
    let table = recurrence_l_table(top.min(table_limit).max(1));
    let mut rows = Vec::new();
    let mut x = x4();
    for k in 4..=kmax {
        if k > 4 {
            x = matrix_step(&x, k - 1);
        }
        let closed = closed_form_k(k)?;
        let from_table = 1usize
            .checked_shl(k)
            .filter(|p| p + 2 <= table.max())
            .map(|p| [table.l(p + 2), table.l(p + 1), table.l(p)].map(BigInt::from));
        rows.push(BoundsRow {
            k,
            closed: closed.to_string(),
            matrix: x[2].to_string(),
            table: from_table.as_ref().map(|t| t[2].to_string()),
            legacy: legacy_karatsuba(k)?.to_string(),
            closed_eq_matrix: closed == x[2],
            table_eq_matrix: from_table.map(|t| t == x),
        });
    }
    Ok(rows)
}
