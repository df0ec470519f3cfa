//! Coefficient scalars for base fields and residues: `F_p` or `Q`.

use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::valgroup::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoefField {
    Fp(u64),
    Q,
}

impl CoefField {
    pub fn characteristic(&self) -> u64 {
        match self {
            CoefField::Fp(p) => *p,
            CoefField::Q => 0,
        }
    }

    pub fn zero(&self) -> Scalar {
        self.from_int(0)
    }

    pub fn one(&self) -> Scalar {
        self.from_int(1)
    }

    pub fn from_int(&self, n: i64) -> Scalar {
        match self {
            CoefField::Fp(p) => Scalar::Fp {
                p: *p,
                val: n.rem_euclid(*p as i64) as u64,
            },
            CoefField::Q => Scalar::Q(Rat::from_integer(n.into())),
        }
    }

    /// Embed a rational constant; over `F_p` the denominator must be a unit.
    pub fn from_rat(&self, q: &Rat) -> Option<Scalar> {
        match self {
            CoefField::Q => Some(Scalar::Q(q.clone())),
            CoefField::Fp(p) => {
                let p_big = num_bigint::BigInt::from(*p);
                let n = q.numer().mod_floor(&p_big);
                let d = q.denom().mod_floor(&p_big);
                let n: u64 = n.try_into().unwrap();
                let d: u64 = d.try_into().unwrap();
                if d == 0 {
                    return None;
                }
                Some(Scalar::Fp { p: *p, val: mulmod(n, invmod(d, *p), *p) })
            }
        }
    }
}

use num_integer::Integer as _;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Scalar {
    Fp { p: u64, val: u64 },
    Q(Rat),
}

fn mulmod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn invmod(a: u64, p: u64) -> u64 {
    // extended Euclid; p prime, a nonzero mod p
    let (mut t, mut new_t): (i128, i128) = (0, 1);
    let (mut r, mut new_r): (i128, i128) = (p as i128, (a % p) as i128);
    while new_r != 0 {
        let q = r / new_r;
        (t, new_t) = (new_t, t - q * new_t);
        (r, new_r) = (new_r, r - q * new_r);
    }
    assert!(r == 1, "not invertible mod p");
    t.rem_euclid(p as i128) as u64
}

impl Scalar {
    pub fn field(&self) -> CoefField {
        match self {
            Scalar::Fp { p, .. } => CoefField::Fp(*p),
            Scalar::Q(_) => CoefField::Q,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Fp { val, .. } => *val == 0,
            Scalar::Q(q) => q.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        match self {
            Scalar::Fp { val, .. } => *val == 1,
            Scalar::Q(q) => q.is_one(),
        }
    }

    pub fn add(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Fp { p, val: a }, Scalar::Fp { val: b, .. }) => {
                Scalar::Fp { p: *p, val: (a + b) % p }
            }
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a + b),
            _ => panic!("mixed scalar fields"),
        }
    }

    pub fn sub(&self, other: &Scalar) -> Scalar {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Scalar {
        match self {
            Scalar::Fp { p, val } => Scalar::Fp { p: *p, val: (p - val) % p },
            Scalar::Q(q) => Scalar::Q(-q),
        }
    }

    pub fn mul(&self, other: &Scalar) -> Scalar {
        match (self, other) {
            (Scalar::Fp { p, val: a }, Scalar::Fp { val: b, .. }) => {
                Scalar::Fp { p: *p, val: mulmod(*a, *b, *p) }
            }
            (Scalar::Q(a), Scalar::Q(b)) => Scalar::Q(a * b),
            _ => panic!("mixed scalar fields"),
        }
    }

    pub fn inv(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        Some(match self {
            Scalar::Fp { p, val } => Scalar::Fp { p: *p, val: invmod(*val, *p) },
            Scalar::Q(q) => Scalar::Q(q.recip()),
        })
    }

    pub fn div(&self, other: &Scalar) -> Option<Scalar> {
        Some(self.mul(&other.inv()?))
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Fp { val, .. } => write!(f, "{}", val),
            Scalar::Q(q) => {
                if q.is_negative() {
                    write!(f, "({})", q)
                } else {
                    write!(f, "{}", q)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::valgroup::rat;

    #[test]
    fn fp_arithmetic() {
        let f = CoefField::Fp(7);
        let a = f.from_int(3);
        let b = f.from_int(5);
        assert_eq!(a.add(&b), f.from_int(1));
        assert_eq!(a.mul(&b), f.from_int(1));
        assert_eq!(a.inv().unwrap(), f.from_int(5));
        assert!(f.from_int(0).inv().is_none());
    }

    #[test]
    fn rat_embedding() {
        let f = CoefField::Fp(3);
        // 7/4 = 1 * 4^{-1} = 1 in F_3
        assert_eq!(f.from_rat(&rat(7, 4)).unwrap(), f.from_int(1));
        // denominator divisible by p is not a unit
        assert!(f.from_rat(&rat(1, 3)).is_none());
    }
}
