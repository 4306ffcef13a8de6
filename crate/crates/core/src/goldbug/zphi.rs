use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `(1 + sqrt 5) / 2`.
pub const PHI_PLUS: f64 = 1.618_033_988_749_895;
/// `(1 - sqrt 5) / 2`.
pub const PHI_MINUS: f64 = -0.618_033_988_749_894_8;

/// Which root of `x^2 = x + 1` to substitute for `phi`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Root {
    Plus,
    Minus,
}

impl Root {
    pub fn value(self) -> f64 {
        match self {
            Root::Plus => PHI_PLUS,
            Root::Minus => PHI_MINUS,
        }
    }
}

/// An element `a + b*phi` of `Z[phi]`, where `phi^2 = phi + 1`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ZPhi {
    pub a: i64,
    pub b: i64,
}

impl ZPhi {
    pub const ZERO: ZPhi = ZPhi { a: 0, b: 0 };
    pub const ONE: ZPhi = ZPhi { a: 1, b: 0 };
    pub const PHI: ZPhi = ZPhi { a: 0, b: 1 };

    pub const fn new(a: i64, b: i64) -> Self {
        ZPhi { a, b }
    }

    /// `a + b*root` in double precision.
    pub fn numeric(self, root: Root) -> f64 {
        self.a as f64 + self.b as f64 * root.value()
    }

    /// Exact sign of the value at `root`.
    ///
    /// `a + b*phi_pm = ((2a + b) +- b*sqrt 5) / 2`, so this is the sign of
    /// `p + q*sqrt 5`, settled by comparing `p^2` with `5 q^2` when `p` and
    /// `q` disagree.
    pub fn sign_at(self, root: Root) -> Ordering {
        let p = 2 * self.a as i128 + self.b as i128;
        let q = match root {
            Root::Plus => self.b as i128,
            Root::Minus => -(self.b as i128),
        };
        match (p.cmp(&0), q.cmp(&0)) {
            (Ordering::Equal, s) | (s, Ordering::Equal) => s,
            (Ordering::Greater, Ordering::Greater) => Ordering::Greater,
            (Ordering::Less, Ordering::Less) => Ordering::Less,
            (Ordering::Greater, Ordering::Less) => (p * p).cmp(&(5 * q * q)),
            (Ordering::Less, Ordering::Greater) => (5 * q * q).cmp(&(p * p)),
        }
    }

    /// Compares `self` and `other` exactly after substituting `root`.
    pub fn cmp_at(self, other: ZPhi, root: Root) -> Ordering {
        (self - other).sign_at(root)
    }

    pub fn checked_add(self, o: ZPhi) -> Option<ZPhi> {
        Some(ZPhi {
            a: self.a.checked_add(o.a)?,
            b: self.b.checked_add(o.b)?,
        })
    }

    pub fn checked_mul(self, o: ZPhi) -> Option<ZPhi> {
        let ac = self.a.checked_mul(o.a)?;
        let bd = self.b.checked_mul(o.b)?;
        let ad = self.a.checked_mul(o.b)?;
        let bc = self.b.checked_mul(o.a)?;
        Some(ZPhi {
            a: ac.checked_add(bd)?,
            b: ad.checked_add(bc)?.checked_add(bd)?,
        })
    }
}

impl Add for ZPhi {
    type Output = ZPhi;
    fn add(self, o: ZPhi) -> ZPhi {
        ZPhi {
            a: self.a + o.a,
            b: self.b + o.b,
        }
    }
}

impl AddAssign for ZPhi {
    fn add_assign(&mut self, o: ZPhi) {
        *self = *self + o;
    }
}

impl Sub for ZPhi {
    type Output = ZPhi;
    fn sub(self, o: ZPhi) -> ZPhi {
        ZPhi {
            a: self.a - o.a,
            b: self.b - o.b,
        }
    }
}

impl SubAssign for ZPhi {
    fn sub_assign(&mut self, o: ZPhi) {
        *self = *self - o;
    }
}

impl Neg for ZPhi {
    type Output = ZPhi;
    fn neg(self) -> ZPhi {
        ZPhi {
            a: -self.a,
            b: -self.b,
        }
    }
}

impl Mul for ZPhi {
    type Output = ZPhi;
    fn mul(self, o: ZPhi) -> ZPhi {
        // (a + b phi)(c + d phi) = ac + bd + (ad + bc + bd) phi
        ZPhi {
            a: self.a * o.a + self.b * o.b,
            b: self.a * o.b + self.b * o.a + self.b * o.b,
        }
    }
}

impl Mul<i64> for ZPhi {
    type Output = ZPhi;
    fn mul(self, k: i64) -> ZPhi {
        ZPhi {
            a: self.a * k,
            b: self.b * k,
        }
    }
}

impl fmt::Display for ZPhi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}φ", self.a, self.b)
    }
}

/// Largest `|i|` for which `phi^i` fits in 64-bit coefficients.
pub const MAX_PHI_POWER: i64 = 90;

/// The doubly infinite Fibonacci sequence, `F(0) = 0`, `F(1) = 1`,
/// `F(-k) = (-1)^(k+1) F(k)`. Valid for `|k| <= 92`.
pub fn fibonacci(k: i64) -> i64 {
    let m = k.unsigned_abs();
    let (mut x, mut y) = (0i64, 1i64);
    for _ in 0..m {
        let z = x + y;
        x = y;
        y = z;
    }
    if k < 0 && m % 2 == 0 {
        -x
    } else {
        x
    }
}

/// `phi^i = F(i-1) + F(i) phi`.
pub fn phi_pow(i: i64) -> Result<ZPhi> {
    if i.abs() > MAX_PHI_POWER {
        return Err(Error::OutOfRange(format!(
            "phi^{i} overflows 64-bit coefficients"
        )));
    }
    Ok(ZPhi::new(fibonacci(i - 1), fibonacci(i)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn phi_squared() {
        assert_eq!(ZPhi::PHI * ZPhi::PHI, ZPhi::new(1, 1));
        assert_eq!(ZPhi::PHI * ZPhi::PHI, ZPhi::PHI + ZPhi::ONE);
    }

    #[test]
    fn powers() {
        assert_eq!(phi_pow(0).unwrap(), ZPhi::ONE);
        assert_eq!(phi_pow(1).unwrap(), ZPhi::PHI);
        assert_eq!(phi_pow(2).unwrap(), ZPhi::new(1, 1));
        // phi * phi^-1 = 1 solved in Z[phi]: (0,1)(x,y) = (y, x+y) = (1,0).
        assert_eq!(phi_pow(-1).unwrap(), ZPhi::new(-1, 1));
        assert_eq!(phi_pow(-1).unwrap() * ZPhi::PHI, ZPhi::ONE);
        assert!(phi_pow(91).is_err());
        assert!(phi_pow(-91).is_err());
        assert!(phi_pow(90).is_ok());
    }

    #[test]
    fn fibonacci_both_ways() {
        let fwd: Vec<i64> = (0..10).map(fibonacci).collect();
        assert_eq!(fwd, vec![0, 1, 1, 2, 3, 5, 8, 13, 21, 34]);
        let back: Vec<i64> = (-6..=0).map(fibonacci).collect();
        assert_eq!(back, vec![-8, 5, -3, 2, -1, 1, 0]);
        assert_eq!(fibonacci(90), 2_880_067_194_370_816_120);
    }

    #[test]
    fn numeric_values() {
        assert!((ZPhi::new(1, 1).numeric(Root::Plus) - 2.618_033_988_749_895).abs() < 1e-12);
        assert!((ZPhi::new(0, 1).numeric(Root::Minus) + 0.618_033_988_749_895).abs() < 1e-12);
        assert!((ZPhi::new(-1, 1).numeric(Root::Minus) + 1.618_033_988_749_895).abs() < 1e-12);
        assert!((PHI_PLUS * PHI_PLUS - PHI_PLUS - 1.0).abs() < 1e-15);
        assert!((PHI_MINUS * PHI_MINUS - PHI_MINUS - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exact_signs() {
        assert_eq!(ZPhi::ZERO.sign_at(Root::Minus), Ordering::Equal);
        assert_eq!(ZPhi::PHI.sign_at(Root::Minus), Ordering::Less);
        assert_eq!(ZPhi::PHI.sign_at(Root::Plus), Ordering::Greater);
        // 1 + phi_- = phi_-^2 > 0
        assert_eq!(ZPhi::new(1, 1).sign_at(Root::Minus), Ordering::Greater);
        // F(k-1) + F(k) phi_- = phi_-^k is tiny but keeps its sign
        assert_eq!(
            ZPhi::new(fibonacci(39), fibonacci(40)).sign_at(Root::Minus),
            Ordering::Greater
        );
        assert_eq!(
            ZPhi::new(fibonacci(40), fibonacci(41)).sign_at(Root::Minus),
            Ordering::Less
        );
        assert_eq!(
            ZPhi::new(fibonacci(79), fibonacci(80)).sign_at(Root::Minus),
            Ordering::Greater
        );
    }

    proptest! {
        #[test]
        fn ring_laws(a in -1000i64..1000, b in -1000i64..1000, c in -1000i64..1000, d in -1000i64..1000, e in -100i64..100, f in -100i64..100) {
            let x = ZPhi::new(a, b);
            let y = ZPhi::new(c, d);
            let z = ZPhi::new(e, f);
            prop_assert_eq!(x * y, y * x);
            prop_assert_eq!((x * y) * z, x * (y * z));
            prop_assert_eq!(x * (y + z), x * y + x * z);
            prop_assert_eq!(x - x, ZPhi::ZERO);
            for root in [Root::Plus, Root::Minus] {
                let lhs = (x * y).numeric(root);
                let rhs = x.numeric(root) * y.numeric(root);
                prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs.abs()));
            }
        }

        #[test]
        fn sign_matches_floating_point_away_from_zero(a in -1_000_000i64..1_000_000, b in -1_000_000i64..1_000_000) {
            let z = ZPhi::new(a, b);
            for root in [Root::Plus, Root::Minus] {
                let v = z.numeric(root);
                if v.abs() > 1e-6 {
                    prop_assert_eq!(z.sign_at(root), v.partial_cmp(&0.0).unwrap());
                }
            }
        }

        #[test]
        fn powers_multiply(i in -40i64..40, j in -40i64..40) {
            prop_assert_eq!(phi_pow(i).unwrap() * phi_pow(j).unwrap(), phi_pow(i + j).unwrap());
        }
    }
}
