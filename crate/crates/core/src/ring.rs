//! Finite commutative rings with canonical element codes.
//!
//! Two families are supported: `Z/N` and `GF(p)[X]/(f)`. Every element is
//! stored as a `u32` code in `[0, |R|)`. For `Z/N` the code is the residue;
//! for polynomial quotients it is the base-`p` number whose digits are the
//! coefficients of the reduced representative, lowest degree first.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest ring cardinality accepted by [`FiniteRing::new`].
pub const MAX_RING_CARD: u64 = 1 << 20;

/// Poly rings up to this size get precomputed addition/multiplication tables.
const TABLE_LIMIT: u32 = 1024;

/// JSON-facing ring description, e.g. `{"kind":"zmod","n":5}` or
/// `{"kind":"poly","p":3,"f":[1,0,1]}` (coefficients low-degree-first).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RingDescriptor {
    Zmod { n: u64 },
    Poly { p: u64, f: Vec<u64> },
}

impl RingDescriptor {
    pub fn zmod(n: u64) -> Self {
        RingDescriptor::Zmod { n }
    }
}

impl fmt::Display for RingDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingDescriptor::Zmod { n } => write!(f, "Z/{n}"),
            RingDescriptor::Poly { p, f: coeffs } => {
                write!(f, "GF({p})[X]/(")?;
                let mut first = true;
                for (i, c) in coeffs.iter().enumerate().rev() {
                    if *c == 0 {
                        continue;
                    }
                    if !first {
                        write!(f, "+")?;
                    }
                    first = false;
                    match (i, *c) {
                        (0, c) => write!(f, "{c}")?,
                        (1, 1) => write!(f, "X")?,
                        (1, c) => write!(f, "{c}X")?,
                        (i, 1) => write!(f, "X^{i}")?,
                        (i, c) => write!(f, "{c}X^{i}")?,
                    }
                }
                write!(f, ")")
            }
        }
    }
}

/// Canonical code of a ring element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Elem(pub u32);

impl Elem {
    pub fn code(self) -> u32 {
        self.0
    }
}

#[derive(Debug, Clone)]
enum Kind {
    Zmod {
        n: u32,
    },
    Poly {
        p: u32,
        deg: usize,
        /// Monic modulus, low-degree-first, length `deg + 1`.
        f: Vec<u32>,
        tables: Option<Arc<Tables>>,
    },
}

#[derive(Debug)]
struct Tables {
    add: Vec<u32>,
    mul: Vec<u32>,
}

/// A finite commutative ring with unit.
#[derive(Debug, Clone)]
pub struct FiniteRing {
    descriptor: RingDescriptor,
    card: u32,
    kind: Kind,
}

impl PartialEq for FiniteRing {
    fn eq(&self, other: &Self) -> bool {
        self.descriptor == other.descriptor
    }
}

impl Eq for FiniteRing {}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl FiniteRing {
    /// Builds the ring described by `desc`. Polynomial moduli are reduced mod `p`
    /// and made monic; the stored descriptor is the normalized one.
    pub fn new(desc: &RingDescriptor) -> Result<Self> {
        match desc {
            RingDescriptor::Zmod { n } => {
                if *n == 0 {
                    return Err(Error::InvalidRing("modulus must be positive".into()));
                }
                if *n > MAX_RING_CARD {
                    return Err(Error::cap("ring cardinality", MAX_RING_CARD, *n));
                }
                Ok(FiniteRing {
                    descriptor: desc.clone(),
                    card: *n as u32,
                    kind: Kind::Zmod { n: *n as u32 },
                })
            }
            RingDescriptor::Poly { p, f } => {
                if !is_prime(*p) {
                    return Err(Error::InvalidRing(format!("{p} is not prime")));
                }
                let mut coeffs: Vec<u64> = f.iter().map(|c| c % p).collect();
                while coeffs.last() == Some(&0) {
                    coeffs.pop();
                }
                if coeffs.len() < 2 {
                    return Err(Error::InvalidRing(
                        "modulus polynomial must have degree at least 1".into(),
                    ));
                }
                let deg = coeffs.len() - 1;
                let card = (*p as u128).pow(deg as u32);
                if card > MAX_RING_CARD as u128 {
                    return Err(Error::cap("ring cardinality", MAX_RING_CARD, card));
                }
                let lead_inv = mod_inverse(coeffs[deg], *p).expect("p is prime");
                let monic: Vec<u64> = coeffs.iter().map(|c| c * lead_inv % p).collect();
                let p32 = *p as u32;
                let mut ring = FiniteRing {
                    descriptor: RingDescriptor::Poly {
                        p: *p,
                        f: monic.clone(),
                    },
                    card: card as u32,
                    kind: Kind::Poly {
                        p: p32,
                        deg,
                        f: monic.iter().map(|&c| c as u32).collect(),
                        tables: None,
                    },
                };
                if ring.card <= TABLE_LIMIT {
                    let n = ring.card as usize;
                    let mut add = vec![0u32; n * n];
                    let mut mul = vec![0u32; n * n];
                    for x in 0..n {
                        for y in 0..n {
                            add[x * n + y] = ring.poly_add(x as u32, y as u32);
                            mul[x * n + y] = ring.poly_mul(x as u32, y as u32);
                        }
                    }
                    if let Kind::Poly { tables, .. } = &mut ring.kind {
                        *tables = Some(Arc::new(Tables { add, mul }));
                    }
                }
                Ok(ring)
            }
        }
    }

    pub fn zmod(n: u64) -> Result<Self> {
        Self::new(&RingDescriptor::Zmod { n })
    }

    pub fn descriptor(&self) -> &RingDescriptor {
        &self.descriptor
    }

    pub fn card(&self) -> u32 {
        self.card
    }

    /// `Some(n)` when this is `Z/n`.
    pub fn modulus(&self) -> Option<u32> {
        match self.kind {
            Kind::Zmod { n } => Some(n),
            Kind::Poly { .. } => None,
        }
    }

    pub fn zero(&self) -> Elem {
        Elem(0)
    }

    pub fn one(&self) -> Elem {
        if self.card == 1 {
            Elem(0)
        } else {
            Elem(1)
        }
    }

    pub fn elements(&self) -> impl Iterator<Item = Elem> {
        (0..self.card).map(Elem)
    }

    pub fn contains(&self, x: Elem) -> bool {
        x.0 < self.card
    }

    /// Image of an integer under the unique ring map `Z -> R`.
    pub fn from_i64(&self, v: i64) -> Elem {
        match &self.kind {
            Kind::Zmod { n } => Elem(v.rem_euclid(*n as i64) as u32),
            Kind::Poly { p, .. } => Elem(v.rem_euclid(*p as i64) as u32),
        }
    }

    pub fn add(&self, x: Elem, y: Elem) -> Elem {
        match &self.kind {
            Kind::Zmod { n } => {
                let s = x.0 as u64 + y.0 as u64;
                Elem((s % *n as u64) as u32)
            }
            Kind::Poly { tables, .. } => match tables {
                Some(t) => Elem(t.add[(x.0 * self.card + y.0) as usize]),
                None => Elem(self.poly_add(x.0, y.0)),
            },
        }
    }

    pub fn neg(&self, x: Elem) -> Elem {
        match &self.kind {
            Kind::Zmod { n } => Elem(if x.0 == 0 { 0 } else { n - x.0 }),
            Kind::Poly { p, deg, .. } => {
                let digits = self.digits(x.0);
                let neg: Vec<u32> = digits.iter().map(|&d| (p - d) % p).collect();
                debug_assert_eq!(neg.len(), *deg);
                Elem(self.encode(&neg))
            }
        }
    }

    pub fn sub(&self, x: Elem, y: Elem) -> Elem {
        self.add(x, self.neg(y))
    }

    pub fn mul(&self, x: Elem, y: Elem) -> Elem {
        match &self.kind {
            Kind::Zmod { n } => Elem(((x.0 as u64 * y.0 as u64) % *n as u64) as u32),
            Kind::Poly { tables, .. } => match tables {
                Some(t) => Elem(t.mul[(x.0 * self.card + y.0) as usize]),
                None => Elem(self.poly_mul(x.0, y.0)),
            },
        }
    }

    /// Generators of the additive group `(R, +)`: `1` for `Z/n`, `X^i` for polynomial quotients.
    pub fn additive_generators(&self) -> Vec<Elem> {
        if self.card == 1 {
            return Vec::new();
        }
        match &self.kind {
            Kind::Zmod { .. } => vec![Elem(1)],
            Kind::Poly { p, deg, .. } => (0..*deg).map(|i| Elem(p.pow(i as u32))).collect(),
        }
    }

    /// Coefficient vector of `x` (length 1 for `Z/n`, `deg f` for polynomial quotients).
    pub fn coefficients(&self, x: Elem) -> Vec<u32> {
        match &self.kind {
            Kind::Zmod { .. } => vec![x.0],
            Kind::Poly { .. } => self.digits(x.0),
        }
    }

    /// Builds an element from its coefficient vector (inverse of [`FiniteRing::coefficients`]).
    pub fn from_coefficients(&self, coeffs: &[u64]) -> Result<Elem> {
        match &self.kind {
            Kind::Zmod { n } => match coeffs {
                [c] => Ok(Elem((c % *n as u64) as u32)),
                _ => Err(Error::InvalidArgument(
                    "Z/n elements have one coefficient".into(),
                )),
            },
            Kind::Poly { p, deg, .. } => {
                if coeffs.len() != *deg {
                    return Err(Error::InvalidArgument(format!(
                        "expected {deg} coefficients, got {}",
                        coeffs.len()
                    )));
                }
                let digits: Vec<u32> = coeffs.iter().map(|c| (c % *p as u64) as u32).collect();
                Ok(Elem(self.encode(&digits)))
            }
        }
    }

    /// Characteristic prime for polynomial quotients, the modulus for `Z/n`.
    pub fn characteristic(&self) -> u32 {
        match &self.kind {
            Kind::Zmod { n } => *n,
            Kind::Poly { p, .. } => *p,
        }
    }

    fn digits(&self, mut code: u32) -> Vec<u32> {
        let Kind::Poly { p, deg, .. } = &self.kind else {
            unreachable!("digits on Z/n")
        };
        let mut out = Vec::with_capacity(*deg);
        for _ in 0..*deg {
            out.push(code % p);
            code /= p;
        }
        out
    }

    fn encode(&self, digits: &[u32]) -> u32 {
        let Kind::Poly { p, .. } = &self.kind else {
            unreachable!("encode on Z/n")
        };
        digits.iter().rev().fold(0u32, |acc, &d| acc * p + d)
    }

    fn poly_add(&self, x: u32, y: u32) -> u32 {
        let Kind::Poly { p, .. } = &self.kind else {
            unreachable!()
        };
        let a = self.digits(x);
        let b = self.digits(y);
        let s: Vec<u32> = a.iter().zip(&b).map(|(u, v)| (u + v) % p).collect();
        self.encode(&s)
    }

    fn poly_mul(&self, x: u32, y: u32) -> u32 {
        let Kind::Poly { p, deg, f, .. } = &self.kind else {
            unreachable!()
        };
        let p = *p as u64;
        let a = self.digits(x);
        let b = self.digits(y);
        let mut prod = vec![0u64; 2 * deg];
        for (i, &ai) in a.iter().enumerate() {
            for (j, &bj) in b.iter().enumerate() {
                prod[i + j] = (prod[i + j] + ai as u64 * bj as u64) % p;
            }
        }
        // X^deg = -(f_0 + ... + f_{deg-1} X^{deg-1})
        for top in (*deg..2 * deg).rev() {
            let c = prod[top];
            if c == 0 {
                continue;
            }
            prod[top] = 0;
            for j in 0..*deg {
                let sub = c * f[j] as u64 % p;
                let idx = top - deg + j;
                prod[idx] = (prod[idx] + p - sub) % p;
            }
        }
        let digits: Vec<u32> = prod[..*deg].iter().map(|&c| c as u32).collect();
        self.encode(&digits)
    }
}

pub(crate) fn mod_inverse(a: u64, m: u64) -> Option<u64> {
    let (g, x, _) = ext_gcd(a as i128, m as i128);
    if g != 1 {
        return None;
    }
    Some(x.rem_euclid(m as i128) as u64)
}

/// Extended Euclid: returns `(g, x, y)` with `a x + b y = g >= 0`.
pub(crate) fn ext_gcd(a: i128, b: i128) -> (i128, i128, i128) {
    let (mut old_r, mut r) = (a, b);
    let (mut old_s, mut s) = (1i128, 0i128);
    let (mut old_t, mut t) = (0i128, 1i128);
    while r != 0 {
        let q = old_r.div_euclid(r);
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
        (old_t, t) = (t, old_t - q * t);
    }
    if old_r < 0 {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cardinalities() {
        assert_eq!(FiniteRing::zmod(5).unwrap().card(), 5);
        assert_eq!(FiniteRing::zmod(1).unwrap().card(), 1);
        let r = FiniteRing::new(&RingDescriptor::Poly {
            p: 3,
            f: vec![1, 0, 1],
        })
        .unwrap();
        assert_eq!(r.card(), 9);
    }

    #[test]
    fn rejects_bad_descriptors() {
        assert!(FiniteRing::zmod(0).is_err());
        assert!(FiniteRing::new(&RingDescriptor::Poly {
            p: 4,
            f: vec![1, 1]
        })
        .is_err());
        assert!(FiniteRing::new(&RingDescriptor::Poly {
            p: 3,
            f: vec![2, 3]
        })
        .is_err());
    }

    #[test]
    fn zero_ring_has_one_equal_zero() {
        let r = FiniteRing::zmod(1).unwrap();
        assert_eq!(r.one(), r.zero());
        assert_eq!(r.add(r.one(), r.one()), r.zero());
    }

    #[test]
    fn gaussian_integers_mod_three() {
        // X^2 = -1 in GF(3)[X]/(X^2+1)
        let r = FiniteRing::new(&RingDescriptor::Poly {
            p: 3,
            f: vec![1, 0, 1],
        })
        .unwrap();
        let x = r.from_coefficients(&[0, 1]).unwrap();
        assert_eq!(r.mul(x, x), r.from_i64(-1));
        assert_eq!(r.coefficients(r.mul(x, x)), vec![2, 0]);
    }

    #[test]
    fn non_monic_modulus_is_normalized() {
        let r = FiniteRing::new(&RingDescriptor::Poly {
            p: 5,
            f: vec![2, 0, 2],
        })
        .unwrap();
        assert_eq!(
            r.descriptor(),
            &RingDescriptor::Poly {
                p: 5,
                f: vec![1, 0, 1]
            }
        );
    }

    fn ring_strategy() -> impl Strategy<Value = RingDescriptor> {
        prop_oneof![
            (1u64..40).prop_map(|n| RingDescriptor::Zmod { n }),
            Just(RingDescriptor::Poly {
                p: 3,
                f: vec![1, 0, 1]
            }),
            Just(RingDescriptor::Poly {
                p: 2,
                f: vec![1, 1, 1]
            }),
            Just(RingDescriptor::Poly {
                p: 2,
                f: vec![0, 0, 1]
            }),
            Just(RingDescriptor::Poly {
                p: 5,
                f: vec![3, 1, 0, 1]
            }),
        ]
    }

    proptest! {
        #[test]
        fn ring_axioms(desc in ring_strategy(), a in 0u32..1000, b in 0u32..1000, c in 0u32..1000) {
            let r = FiniteRing::new(&desc).unwrap();
            let (x, y, z) = (Elem(a % r.card()), Elem(b % r.card()), Elem(c % r.card()));
            prop_assert_eq!(r.add(r.add(x, y), z), r.add(x, r.add(y, z)));
            prop_assert_eq!(r.mul(r.mul(x, y), z), r.mul(x, r.mul(y, z)));
            prop_assert_eq!(r.mul(x, r.add(y, z)), r.add(r.mul(x, y), r.mul(x, z)));
            prop_assert_eq!(r.mul(x, y), r.mul(y, x));
            prop_assert_eq!(r.add(x, y), r.add(y, x));
            prop_assert_eq!(r.add(x, r.neg(x)), r.zero());
            prop_assert_eq!(r.mul(x, r.one()), x);
        }
    }
}
