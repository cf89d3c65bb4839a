//! Signed binary fixed-point numbers on top of `BigInt`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::{BigInt, Sign};
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fractional bits carried by every [`Fixed`].
pub const FRAC_BITS: u32 = 256;

/// Value `raw / 2^FRAC_BITS`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Fixed(BigInt);

impl Fixed {
    pub fn zero() -> Self {
        Fixed(BigInt::zero())
    }

    pub fn from_int(v: i64) -> Self {
        Fixed(BigInt::from(v) << FRAC_BITS)
    }

    /// Exact conversion of a finite double.
    pub fn from_f64(v: f64) -> Self {
        assert!(v.is_finite(), "non-finite input {v}");
        if v == 0.0 {
            return Self::zero();
        }
        let bits = v.to_bits();
        let sign = if bits >> 63 == 1 { -1 } else { 1 };
        let exp = ((bits >> 52) & 0x7ff) as i64;
        let frac = bits & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 {
            (frac, -1074)
        } else {
            (frac | (1u64 << 52), exp - 1075)
        };
        let m = BigInt::from(mant) * sign;
        let shift = e + FRAC_BITS as i64;
        assert!(shift >= 0, "{v} underflows the fixed-point grid");
        Fixed(m << shift as u32)
    }

    /// `num / den`, truncated toward zero.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        Fixed((BigInt::from(num) << FRAC_BITS) / BigInt::from(den))
    }

    pub fn to_f64(&self) -> f64 {
        let bits = self.0.bits();
        if bits == 0 {
            return 0.0;
        }
        // Keep 64 significant bits, then scale.
        let drop = bits.saturating_sub(64);
        let top = (self.0.abs() >> drop).to_u64().expect("64 bits fit");
        let v = top as f64 * 2f64.powi(drop as i32 - FRAC_BITS as i32);
        if self.0.sign() == Sign::Minus {
            -v
        } else {
            v
        }
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn powi(&self, k: u32) -> Self {
        let mut out = Fixed(BigInt::one() << FRAC_BITS);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Principal `q`-th root of a positive value.
    pub fn root(&self, q: u32) -> Self {
        assert!(self.is_positive(), "root of a non-positive value");
        Fixed((&self.0 << (FRAC_BITS * (q - 1))).nth_root(q))
    }

    pub fn recip(&self) -> Self {
        Fixed((BigInt::one() << (2 * FRAC_BITS)) / &self.0)
    }

    /// `self^(-p/q)` for a positive value.
    pub fn pow_neg_ratio(&self, p: u32, q: u32) -> Self {
        self.powi(p).root(q).recip()
    }
}

impl Add for &Fixed {
    type Output = Fixed;
    fn add(self, o: &Fixed) -> Fixed {
        Fixed(&self.0 + &o.0)
    }
}

impl Sub for &Fixed {
    type Output = Fixed;
    fn sub(self, o: &Fixed) -> Fixed {
        Fixed(&self.0 - &o.0)
    }
}

impl Mul for &Fixed {
    type Output = Fixed;
    fn mul(self, o: &Fixed) -> Fixed {
        Fixed((&self.0 * &o.0) >> FRAC_BITS)
    }
}

impl Div for &Fixed {
    type Output = Fixed;
    fn div(self, o: &Fixed) -> Fixed {
        Fixed((&self.0 << FRAC_BITS) / &o.0)
    }
}

impl Neg for &Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-&self.0)
    }
}
