//! Exact rational linear algebra helpers shared by certificate verification,
//! rationalization, and the interpolation cross-check.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Solves A x = b over the rationals by Gauss-Jordan elimination.
///
/// Handles rectangular and rank-deficient systems: free variables are set to zero.
/// Returns `None` when the system is inconsistent.
pub(crate) fn solve_linear(
    mut a: Vec<Vec<BigRational>>,
    mut b: Vec<BigRational>,
) -> Option<Vec<BigRational>> {
    let m = a.len();
    assert_eq!(m, b.len());
    let n = if m > 0 { a[0].len() } else { 0 };
    let mut pivot_cols = Vec::new();
    let mut row = 0;
    for col in 0..n {
        if row == m {
            break;
        }
        let Some(pivot_row) = (row..m).find(|&i| !a[i][col].is_zero()) else {
            continue;
        };
        a.swap(row, pivot_row);
        b.swap(row, pivot_row);
        let inv = a[row][col].recip();
        for j in col..n {
            a[row][j] = &a[row][j] * &inv;
        }
        b[row] = &b[row] * &inv;
        for i in 0..m {
            if i == row || a[i][col].is_zero() {
                continue;
            }
            let factor = std::mem::replace(&mut a[i][col], BigRational::zero());
            for j in (col + 1)..n {
                let delta = &factor * &a[row][j];
                a[i][j] = &a[i][j] - &delta;
            }
            let delta = &factor * &b[row];
            b[i] = &b[i] - &delta;
        }
        pivot_cols.push(col);
        row += 1;
    }
    if b[row..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    let mut x = vec![BigRational::zero(); n];
    for (ri, &col) in pivot_cols.iter().enumerate() {
        x[col] = b[ri].clone();
    }
    Some(x)
}

/// Best rational approximation to x with denominator at most `max_den`, via
/// continued-fraction convergents and the final semiconvergent.
pub(crate) fn best_rational_within(x: &BigRational, max_den: &BigInt) -> BigRational {
    assert!(*max_den >= BigInt::one());
    if x.denom() <= max_den {
        return x.clone();
    }
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    // Convergents p/q; indices -2 and -1 seed the recurrence.
    let (mut p_m2, mut q_m2) = (BigInt::zero(), BigInt::one());
    let (mut p_m1, mut q_m1) = (BigInt::one(), BigInt::zero());
    loop {
        let a = n.div_floor(&d);
        let p = &a * &p_m1 + &p_m2;
        let q = &a * &q_m1 + &q_m2;
        if q > *max_den {
            // q_m1 >= 1 here: the first convergent has q = 1 <= max_den.
            let t = (max_den - &q_m2).div_floor(&q_m1);
            let semi = BigRational::new(&p_m2 + &t * &p_m1, &q_m2 + &t * &q_m1);
            let conv = BigRational::new(p_m1, q_m1);
            let err_semi = (x - &semi).abs();
            let err_conv = (x - &conv).abs();
            return if err_semi < err_conv { semi } else { conv };
        }
        let rem = &n - &a * &d;
        p_m2 = std::mem::replace(&mut p_m1, p);
        q_m2 = std::mem::replace(&mut q_m1, q);
        if rem.is_zero() {
            return BigRational::new(p_m1, q_m1);
        }
        n = std::mem::replace(&mut d, rem);
    }
}

/// Exact rational lift of a finite f64 (f64 values are dyadic rationals).
pub(crate) fn rat_from_f64(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite float")
}

pub(crate) fn rat_int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// Float value of an arbitrary rational: the quotient is rescaled to ~96 bits
/// before integer conversion, so huge numerators/denominators (e.g. from
/// power-of-two integer lifts) convert without overflowing to inf/NaN.
pub(crate) fn rat_to_f64(x: &BigRational) -> f64 {
    use num_traits::{Signed, ToPrimitive};
    if x.numer().is_zero() {
        return 0.0;
    }
    let sign = if x.numer().is_negative() { -1.0 } else { 1.0 };
    let numer = x.numer().abs();
    let denom = x.denom().clone();
    let shift: i64 = 96 - (numer.bits() as i64 - denom.bits() as i64);
    let quotient = if shift >= 0 { (numer << shift) / denom } else { numer / (denom << -shift) };
    sign * quotient.to_f64().expect("bounded quotient") * (-shift as f64).exp2()
}
