//! Exact binomial probabilities with rational `p`.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive};

pub fn choose(n: u64, k: u64) -> BigInt {
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// `C(n, w) (a/b)^w (1 - a/b)^(n - w)` rounded to f64.
pub fn binomial_pmf(n: u64, w: u64, a: u64, b: u64) -> f64 {
    let num = choose(n, w) * BigInt::from(a).pow(w as u32) * BigInt::from(b - a).pow((n - w) as u32);
    let den = BigInt::from(b).pow(n as u32);
    ratio_to_f64(&num, &den)
}

/// `num / den` for non-negative integers, correct to about 60 bits.
pub fn ratio_to_f64(num: &BigInt, den: &BigInt) -> f64 {
    let shift = den.bits() as i64 - num.bits() as i64 + 64;
    let q = if shift >= 0 {
        (num << shift as u64) / den
    } else {
        num / (den << (-shift) as u64)
    };
    q.to_f64().expect("finite") * 2f64.powi(-shift as i32)
}
