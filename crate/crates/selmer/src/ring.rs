//! The coefficient-ring tower: Q, F_p, Z_p at fixed precision, simple
//! algebraic extensions, truncated power series, and Laurent polynomials.
//!
//! Rings are immutable descriptors (`Ring`), elements are plain data
//! (`Elem`); every operation is a method on the ring that interprets the
//! payloads. Payloads are kept in canonical reduced form: fractions reduced,
//! residues in [0, q), extension elements of fixed length deg, series of
//! fixed length n_s, Laurent supports free of zero coefficients.

use std::collections::BTreeMap;
use std::rc::Rc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::RingError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Elem {
    Rat(BigRational),
    /// Residue in [0, q) for PrimeField (q = p) and PAdic (q = p^n).
    Mod(u64),
    /// Extension element: coefficients over the base, constant first, fixed
    /// length = extension degree.
    Pol(Vec<Elem>),
    /// Truncated series: coefficients over the base, fixed length = n_s.
    Ser(Vec<Elem>),
    /// Laurent polynomial: exponent -> nonzero base coefficient.
    Lau(BTreeMap<i64, Elem>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Ring {
    Rationals,
    PrimeField {
        p: u64,
    },
    PAdic {
        p: u64,
        prec: u32,
        q: u64,
    },
    Extension {
        base: Rc<Ring>,
        /// Monic minimal polynomial with the leading 1 dropped: constant
        /// first, length = degree; z^d = -(mp[0] + mp[1] z + ...).
        minpoly: Vec<Elem>,
        gen_name: String,
    },
    Series {
        base: Rc<Ring>,
        prec: usize,
        var: String,
    },
    Laurent {
        base: Rc<Ring>,
        var: String,
    },
}

pub type RingRc = Rc<Ring>;

pub(crate) fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub(crate) fn pow_mod(mut a: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1u64 % q;
    a %= q;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, q);
        }
        a = mul_mod(a, a, q);
        e >>= 1;
    }
    acc
}

/// Modular inverse by extended Euclid; works for any modulus coprime to a.
fn inv_mod(a: u64, q: u64) -> Option<u64> {
    let (mut r0, mut r1) = (q as i128, (a % q) as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let k = r0 / r1;
        (r0, r1) = (r1, r0 - k * r1);
        (t0, t1) = (t1, t0 - k * t1);
    }
    if r0 != 1 {
        return None;
    }
    Some(t0.rem_euclid(q as i128) as u64)
}

/// Deterministic Miller-Rabin for u64.
fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for &p in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &[2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 0..s - 1 {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn rat_i64(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

impl Ring {
    pub fn rationals() -> RingRc {
        Rc::new(Ring::Rationals)
    }

    pub fn prime_field(p: u64) -> Result<RingRc, RingError> {
        if !is_prime(p) {
            return Err(RingError::Descriptor(format!("{p} is not prime")));
        }
        Ok(Rc::new(Ring::PrimeField { p }))
    }

    pub fn padic(p: u64, prec: u32) -> Result<RingRc, RingError> {
        if !is_prime(p) {
            return Err(RingError::Descriptor(format!("{p} is not prime")));
        }
        if prec < 1 {
            return Err(RingError::Descriptor("p-adic precision must be >= 1".into()));
        }
        let q = p
            .checked_pow(prec)
            .ok_or_else(|| RingError::Precision(format!("{p}^{prec} exceeds u64")))?;
        Ok(Rc::new(Ring::PAdic { p, prec, q }))
    }

    /// `minpoly_full` is the complete coefficient list, constant first,
    /// including the leading coefficient (which must be 1).
    pub fn extension(
        base: RingRc,
        minpoly_full: Vec<Elem>,
        gen_name: &str,
    ) -> Result<RingRc, RingError> {
        if matches!(*base, Ring::Laurent { .. }) {
            return Err(RingError::Descriptor(
                "Laurent layer must be outermost; cannot extend over it".into(),
            ));
        }
        if minpoly_full.len() < 3 {
            return Err(RingError::Descriptor(
                "minimal polynomial must have degree >= 2".into(),
            ));
        }
        let mut mp = minpoly_full;
        let lead = mp.pop().unwrap();
        if !base.eq_elem(&lead, &base.one()) {
            return Err(RingError::Descriptor("minimal polynomial must be monic".into()));
        }
        for c in &mp {
            if !base.element_fits(c) {
                return Err(RingError::Mismatch(
                    "minimal polynomial coefficient does not lie in the base ring".into(),
                ));
            }
        }
        if !base.is_field() && !(mp.len() == 2 && base.is_zero(&mp[1])) {
            return Err(RingError::Descriptor(
                "extensions over a non-field base are supported only for z^2 - D".into(),
            ));
        }
        Ok(Rc::new(Ring::Extension {
            base,
            minpoly: mp,
            gen_name: gen_name.to_string(),
        }))
    }

    pub fn series(base: RingRc, prec: usize, var: &str) -> Result<RingRc, RingError> {
        if matches!(*base, Ring::Laurent { .. }) {
            return Err(RingError::Descriptor(
                "Laurent layer must be outermost; cannot build series over it".into(),
            ));
        }
        if prec < 1 {
            return Err(RingError::Descriptor("series truncation order must be >= 1".into()));
        }
        Ok(Rc::new(Ring::Series {
            base,
            prec,
            var: var.to_string(),
        }))
    }

    pub fn laurent(base: RingRc, var: &str) -> Result<RingRc, RingError> {
        if matches!(*base, Ring::Laurent { .. }) {
            return Err(RingError::Descriptor("nested Laurent layers are not allowed".into()));
        }
        Ok(Rc::new(Ring::Laurent {
            base,
            var: var.to_string(),
        }))
    }

    pub fn base(&self) -> Option<&RingRc> {
        match self {
            Ring::Extension { base, .. } | Ring::Series { base, .. } | Ring::Laurent { base, .. } => {
                Some(base)
            }
            _ => None,
        }
    }

    pub fn is_field(&self) -> bool {
        match self {
            Ring::Rationals | Ring::PrimeField { .. } => true,
            Ring::Extension { base, .. } => base.is_field(),
            _ => false,
        }
    }

    /// The Eisenstein-integer view Z[(1+sqrt(-3))/2] activates exactly on
    /// Q[w]/(w^2+3); gcds, canonical associates, divisors, and unit tests on
    /// that layer then use the integral subring.
    pub fn is_eisenstein(&self) -> bool {
        match self {
            Ring::Extension { base, minpoly, .. } => {
                **base == Ring::Rationals
                    && minpoly.len() == 2
                    && minpoly[0] == Elem::Rat(rat_i64(3))
                    && minpoly[1] == Elem::Rat(rat_i64(0))
            }
            _ => false,
        }
    }

    pub fn descriptor_string(&self) -> String {
        match self {
            Ring::Rationals => "Q".into(),
            Ring::PrimeField { p } => format!("F{p}"),
            Ring::PAdic { p, prec, .. } => format!("Z{p}(prec {prec})"),
            Ring::Extension { base, gen_name, .. } => {
                format!("{}[{}]", base.descriptor_string(), gen_name)
            }
            Ring::Series { base, prec, var } => {
                format!("{}[[{}]]/({}^{})", base.descriptor_string(), var, var, prec)
            }
            Ring::Laurent { base, var } => format!("{}[{}^±1]", base.descriptor_string(), var),
        }
    }

    // ----- constants and generators -----

    pub fn zero(&self) -> Elem {
        match self {
            Ring::Rationals => Elem::Rat(BigRational::zero()),
            Ring::PrimeField { .. } | Ring::PAdic { .. } => Elem::Mod(0),
            Ring::Extension { base, minpoly, .. } => {
                Elem::Pol(vec![base.zero(); minpoly.len()])
            }
            Ring::Series { base, prec, .. } => Elem::Ser(vec![base.zero(); *prec]),
            Ring::Laurent { .. } => Elem::Lau(BTreeMap::new()),
        }
    }

    pub fn one(&self) -> Elem {
        match self {
            Ring::Rationals => Elem::Rat(BigRational::one()),
            Ring::PrimeField { p } => Elem::Mod(1 % p),
            Ring::PAdic { q, .. } => Elem::Mod(1 % q),
            Ring::Extension { base, .. } | Ring::Series { base, .. } | Ring::Laurent { base, .. } => {
                self.lift(base.one())
            }
        }
    }

    pub fn from_i64(&self, n: i64) -> Elem {
        match self {
            Ring::Rationals => Elem::Rat(rat_i64(n)),
            Ring::PrimeField { p } => Elem::Mod((n as i128).rem_euclid(*p as i128) as u64),
            Ring::PAdic { q, .. } => Elem::Mod((n as i128).rem_euclid(*q as i128) as u64),
            Ring::Extension { base, .. } | Ring::Series { base, .. } | Ring::Laurent { base, .. } => {
                self.lift(base.from_i64(n))
            }
        }
    }

    /// Embed a base-ring element into this layer.
    pub fn lift(&self, a: Elem) -> Elem {
        match self {
            Ring::Extension { base, minpoly, .. } => {
                let mut v = vec![base.zero(); minpoly.len()];
                v[0] = a;
                Elem::Pol(v)
            }
            Ring::Series { base, prec, .. } => {
                let mut v = vec![base.zero(); *prec];
                v[0] = a;
                Elem::Ser(v)
            }
            Ring::Laurent { base, .. } => {
                if base.is_zero(&a) {
                    Elem::Lau(BTreeMap::new())
                } else {
                    Elem::Lau(BTreeMap::from([(0, a)]))
                }
            }
            _ => a,
        }
    }

    /// The layer generator: extension generator, series variable, or Laurent
    /// variable.
    pub fn gen(&self) -> Result<Elem, RingError> {
        match self {
            Ring::Extension { base, minpoly, .. } => {
                let mut v = vec![base.zero(); minpoly.len()];
                v[1] = base.one();
                Ok(Elem::Pol(v))
            }
            Ring::Series { base, prec, .. } => {
                if *prec < 2 {
                    return Err(RingError::Precision(
                        "series variable needs truncation order >= 2".into(),
                    ));
                }
                let mut v = vec![base.zero(); *prec];
                v[1] = base.one();
                Ok(Elem::Ser(v))
            }
            Ring::Laurent { base, .. } => Ok(Elem::Lau(BTreeMap::from([(1, base.one())]))),
            _ => Err(RingError::Capability("this layer has no generator".into())),
        }
    }

    /// Structural check that an element's payload shape matches this ring.
    pub fn element_fits(&self, a: &Elem) -> bool {
        match (self, a) {
            (Ring::Rationals, Elem::Rat(_)) => true,
            (Ring::PrimeField { p }, Elem::Mod(x)) => x < p,
            (Ring::PAdic { q, .. }, Elem::Mod(x)) => x < q,
            (Ring::Extension { base, minpoly, .. }, Elem::Pol(v)) => {
                v.len() == minpoly.len() && v.iter().all(|c| base.element_fits(c))
            }
            (Ring::Series { base, prec, .. }, Elem::Ser(v)) => {
                v.len() == *prec && v.iter().all(|c| base.element_fits(c))
            }
            (Ring::Laurent { base, .. }, Elem::Lau(m)) => {
                m.values().all(|c| base.element_fits(c) && !base.is_zero(c))
            }
            _ => false,
        }
    }

    // ----- arithmetic -----

    pub fn add(&self, a: &Elem, b: &Elem) -> Elem {
        match (self, a, b) {
            (Ring::Rationals, Elem::Rat(x), Elem::Rat(y)) => Elem::Rat(x + y),
            (Ring::PrimeField { p }, Elem::Mod(x), Elem::Mod(y)) => Elem::Mod((x + y) % p),
            (Ring::PAdic { q, .. }, Elem::Mod(x), Elem::Mod(y)) => Elem::Mod((x + y) % q),
            (Ring::Extension { base, .. }, Elem::Pol(x), Elem::Pol(y)) => {
                Elem::Pol(x.iter().zip(y).map(|(u, v)| base.add(u, v)).collect())
            }
            (Ring::Series { base, .. }, Elem::Ser(x), Elem::Ser(y)) => {
                Elem::Ser(x.iter().zip(y).map(|(u, v)| base.add(u, v)).collect())
            }
            (Ring::Laurent { base, .. }, Elem::Lau(x), Elem::Lau(y)) => {
                let mut out = x.clone();
                for (k, v) in y {
                    let s = match out.get(k) {
                        Some(u) => base.add(u, v),
                        None => v.clone(),
                    };
                    if base.is_zero(&s) {
                        out.remove(k);
                    } else {
                        out.insert(*k, s);
                    }
                }
                Elem::Lau(out)
            }
            _ => panic!("ring/element mismatch in add"),
        }
    }

    pub fn neg(&self, a: &Elem) -> Elem {
        match (self, a) {
            (Ring::Rationals, Elem::Rat(x)) => Elem::Rat(-x),
            (Ring::PrimeField { p }, Elem::Mod(x)) => Elem::Mod((p - x % p) % p),
            (Ring::PAdic { q, .. }, Elem::Mod(x)) => Elem::Mod((q - x % q) % q),
            (Ring::Extension { base, .. }, Elem::Pol(x)) => {
                Elem::Pol(x.iter().map(|c| base.neg(c)).collect())
            }
            (Ring::Series { base, .. }, Elem::Ser(x)) => {
                Elem::Ser(x.iter().map(|c| base.neg(c)).collect())
            }
            (Ring::Laurent { base, .. }, Elem::Lau(x)) => {
                Elem::Lau(x.iter().map(|(k, c)| (*k, base.neg(c))).collect())
            }
            _ => panic!("ring/element mismatch in neg"),
        }
    }

    pub fn sub(&self, a: &Elem, b: &Elem) -> Elem {
        self.add(a, &self.neg(b))
    }

    pub fn mul(&self, a: &Elem, b: &Elem) -> Elem {
        match (self, a, b) {
            (Ring::Rationals, Elem::Rat(x), Elem::Rat(y)) => Elem::Rat(x * y),
            (Ring::PrimeField { p }, Elem::Mod(x), Elem::Mod(y)) => Elem::Mod(mul_mod(*x, *y, *p)),
            (Ring::PAdic { q, .. }, Elem::Mod(x), Elem::Mod(y)) => Elem::Mod(mul_mod(*x, *y, *q)),
            (Ring::Extension { base, minpoly, .. }, Elem::Pol(x), Elem::Pol(y)) => {
                let d = minpoly.len();
                let mut prod = vec![base.zero(); 2 * d - 1];
                for (i, u) in x.iter().enumerate() {
                    if base.is_zero(u) {
                        continue;
                    }
                    for (j, v) in y.iter().enumerate() {
                        if base.is_zero(v) {
                            continue;
                        }
                        prod[i + j] = base.add(&prod[i + j], &base.mul(u, v));
                    }
                }
                for k in (d..2 * d - 1).rev() {
                    if base.is_zero(&prod[k]) {
                        continue;
                    }
                    let c = std::mem::replace(&mut prod[k], base.zero());
                    for i in 0..d {
                        prod[k - d + i] = base.sub(&prod[k - d + i], &base.mul(&c, &minpoly[i]));
                    }
                }
                prod.truncate(d);
                Elem::Pol(prod)
            }
            (Ring::Series { base, prec, .. }, Elem::Ser(x), Elem::Ser(y)) => {
                let n = *prec;
                let mut out = vec![base.zero(); n];
                for (i, u) in x.iter().enumerate() {
                    if base.is_zero(u) {
                        continue;
                    }
                    for (j, v) in y.iter().enumerate().take(n - i) {
                        if base.is_zero(v) {
                            continue;
                        }
                        out[i + j] = base.add(&out[i + j], &base.mul(u, v));
                    }
                }
                Elem::Ser(out)
            }
            (Ring::Laurent { base, .. }, Elem::Lau(x), Elem::Lau(y)) => {
                let mut out: BTreeMap<i64, Elem> = BTreeMap::new();
                for (i, u) in x {
                    for (j, v) in y {
                        let k = i + j;
                        let t = base.mul(u, v);
                        let s = match out.get(&k) {
                            Some(w) => base.add(w, &t),
                            None => t,
                        };
                        if base.is_zero(&s) {
                            out.remove(&k);
                        } else {
                            out.insert(k, s);
                        }
                    }
                }
                Elem::Lau(out)
            }
            _ => panic!("ring/element mismatch in mul"),
        }
    }

    pub fn is_zero(&self, a: &Elem) -> bool {
        match (self, a) {
            (Ring::Rationals, Elem::Rat(x)) => x.is_zero(),
            (Ring::PrimeField { .. }, Elem::Mod(x)) | (Ring::PAdic { .. }, Elem::Mod(x)) => *x == 0,
            (Ring::Extension { base, .. }, Elem::Pol(v)) => v.iter().all(|c| base.is_zero(c)),
            (Ring::Series { base, .. }, Elem::Ser(v)) => v.iter().all(|c| base.is_zero(c)),
            (Ring::Laurent { .. }, Elem::Lau(m)) => m.is_empty(),
            _ => panic!("ring/element mismatch in is_zero"),
        }
    }

    pub fn eq_elem(&self, a: &Elem, b: &Elem) -> bool {
        self.is_zero(&self.sub(a, b))
    }

    /// Unit test in the declared ring. On the Eisenstein layer this is
    /// membership in the unit group of Z[(1+sqrt(-3))/2] (six units), per the
    /// integral-subring reading; elsewhere the usual local criteria.
    pub fn is_unit(&self, a: &Elem) -> bool {
        if self.is_eisenstein() {
            let (x, y) = self.eis_xy(a);
            return self.eis_is_integral(a) && (&x * &x + rat_i64(3) * &y * &y).is_one();
        }
        self.is_invertible(a)
    }

    /// Invertibility in the ambient layer (guards inv/div/sqrt); over the
    /// Eisenstein layer this is the field view, so e.g. 2 is invertible even
    /// though it is not a unit of the integral subring.
    pub fn is_invertible(&self, a: &Elem) -> bool {
        match (self, a) {
            (Ring::Rationals, Elem::Rat(x)) => !x.is_zero(),
            (Ring::PrimeField { .. }, Elem::Mod(x)) => *x != 0,
            (Ring::PAdic { p, .. }, Elem::Mod(x)) => x % p != 0,
            (Ring::Extension { base, minpoly, .. }, Elem::Pol(v)) => {
                if base.is_field() {
                    !self.is_zero(a)
                } else {
                    // quadratic z^2 - D over a non-field base: invertible iff
                    // the norm x^2 - D y^2 is invertible downstairs
                    let d = base.neg(&minpoly[0]);
                    let nrm =
                        base.sub(&base.mul(&v[0], &v[0]), &base.mul(&base.mul(&v[1], &v[1]), &d));
                    base.is_invertible(&nrm)
                }
            }
            (Ring::Series { base, .. }, Elem::Ser(v)) => base.is_invertible(&v[0]),
            (Ring::Laurent { base, .. }, Elem::Lau(m)) => {
                m.len() == 1 && base.is_invertible(m.values().next().unwrap())
            }
            _ => panic!("ring/element mismatch in is_invertible"),
        }
    }

    pub fn inv(&self, a: &Elem) -> Result<Elem, RingError> {
        match (self, a) {
            (Ring::Rationals, Elem::Rat(x)) => {
                if x.is_zero() {
                    Err(RingError::DivisionByZero)
                } else {
                    Ok(Elem::Rat(x.recip()))
                }
            }
            (Ring::PrimeField { p }, Elem::Mod(x)) => inv_mod(*x, *p)
                .map(Elem::Mod)
                .ok_or(RingError::DivisionByZero),
            (Ring::PAdic { p, q, .. }, Elem::Mod(x)) => {
                if x % p == 0 {
                    Err(RingError::NotAUnit(format!("{x} has positive {p}-adic valuation")))
                } else {
                    Ok(Elem::Mod(inv_mod(*x, *q).unwrap()))
                }
            }
            (Ring::Extension { base, minpoly, .. }, Elem::Pol(v)) => {
                if !base.is_field() {
                    // quadratic z^2 - D: (x + y z)^{-1} = (x - y z)/(x^2 - y^2 D)
                    let d = base.neg(&minpoly[0]);
                    let nrm =
                        base.sub(&base.mul(&v[0], &v[0]), &base.mul(&base.mul(&v[1], &v[1]), &d));
                    let ninv = base.inv(&nrm)?;
                    return Ok(Elem::Pol(vec![
                        base.mul(&v[0], &ninv),
                        base.neg(&base.mul(&v[1], &ninv)),
                    ]));
                }
                self.ext_inv_euclid(v)
            }
            (Ring::Series { base, prec, .. }, Elem::Ser(v)) => {
                if !base.is_invertible(&v[0]) {
                    return Err(RingError::NotAUnit(
                        "series constant term is not a unit".into(),
                    ));
                }
                let c0 = base.inv(&v[0])?;
                let n = *prec;
                let mut out = vec![base.zero(); n];
                out[0] = c0.clone();
                for k in 1..n {
                    let mut acc = base.zero();
                    for i in 1..=k {
                        acc = base.add(&acc, &base.mul(&v[i], &out[k - i]));
                    }
                    out[k] = base.neg(&base.mul(&c0, &acc));
                }
                Ok(Elem::Ser(out))
            }
            (Ring::Laurent { base, .. }, Elem::Lau(m)) => {
                if m.len() != 1 {
                    return Err(RingError::NotAUnit("Laurent support is not a monomial".into()));
                }
                let (k, c) = m.iter().next().unwrap();
                Ok(Elem::Lau(BTreeMap::from([(-k, base.inv(c)?)])))
            }
            _ => panic!("ring/element mismatch in inv"),
        }
    }

    /// Extended Euclid in base[z] against the minimal polynomial.
    fn ext_inv_euclid(&self, a: &[Elem]) -> Result<Elem, RingError> {
        let Ring::Extension { base, minpoly, .. } = self else { unreachable!() };
        let d = minpoly.len();
        let deg = |p: &[Elem]| p.iter().rposition(|c| !base.is_zero(c));
        let mut r0: Vec<Elem> = minpoly.iter().cloned().chain([base.one()]).collect();
        let mut r1: Vec<Elem> = a.to_vec();
        let mut s0 = vec![base.zero()];
        let mut s1 = vec![base.one()];
        loop {
            let d1 = match deg(&r1) {
                None => return Err(RingError::DivisionByZero),
                Some(d1) => d1,
            };
            if d1 == 0 {
                let c = base.inv(&r1[0])?;
                let mut out: Vec<Elem> = s1.iter().map(|x| base.mul(&c, x)).collect();
                out.resize(d, base.zero());
                return Ok(Elem::Pol(out));
            }
            let lc1 = base.inv(&r1[d1])?;
            let mut q = vec![base.zero(); deg(&r0).map_or(0, |d0| d0.saturating_sub(d1) + 1)];
            let mut rr = r0.clone();
            while let Some(dr) = deg(&rr) {
                if dr < d1 {
                    break;
                }
                let c = base.mul(&rr[dr], &lc1);
                q[dr - d1] = c.clone();
                for i in 0..=d1 {
                    rr[dr - d1 + i] = base.sub(&rr[dr - d1 + i], &base.mul(&c, &r1[i]));
                }
            }
            let mut qs = vec![base.zero(); q.len() + s1.len()];
            for (i, cq) in q.iter().enumerate() {
                for (j, cs) in s1.iter().enumerate() {
                    qs[i + j] = base.add(&qs[i + j], &base.mul(cq, cs));
                }
            }
            let mut ns = vec![base.zero(); s0.len().max(qs.len())];
            for (i, slot) in ns.iter_mut().enumerate() {
                let x = s0.get(i).cloned().unwrap_or_else(|| base.zero());
                let y = qs.get(i).cloned().unwrap_or_else(|| base.zero());
                *slot = base.sub(&x, &y);
            }
            r0 = r1;
            r1 = rr;
            s0 = s1;
            s1 = ns;
        }
    }

    /// Exact division. Unit divisors always work; in valuation layers a
    /// divisor of positive valuation works when the dividend's valuation is
    /// at least as large (the quotient then carries reduced precision).
    pub fn div(&self, a: &Elem, b: &Elem) -> Result<Elem, RingError> {
        match (self, a, b) {
            (Ring::Rationals, Elem::Rat(x), Elem::Rat(y)) => {
                if y.is_zero() {
                    Err(RingError::DivisionByZero)
                } else {
                    Ok(Elem::Rat(x / y))
                }
            }
            (Ring::PAdic { p, q, prec }, Elem::Mod(x), Elem::Mod(y)) => {
                let (vx, vy) = (padic_val(*x, *p, *prec), padic_val(*y, *p, *prec));
                if *y == 0 {
                    return Err(RingError::DivisionByZero);
                }
                if vy > vx {
                    return Err(RingError::InexactDivision(format!(
                        "{p}-adic valuation {vy} of divisor exceeds {vx}"
                    )));
                }
                if vy == 0 {
                    return Ok(Elem::Mod(mul_mod(*x, inv_mod(*y, *q).unwrap(), *q)));
                }
                let pk = p.pow(vy);
                Ok(Elem::Mod(mul_mod(x / pk, inv_mod(y / pk, *q).unwrap(), *q)))
            }
            (Ring::Series { .. }, Elem::Ser(_), Elem::Ser(_)) => {
                let vb = match self.val(b) {
                    None => return Err(RingError::DivisionByZero),
                    Some(v) => v,
                };
                if vb == 0 {
                    return Ok(self.mul(a, &self.inv(b)?));
                }
                match self.val(a) {
                    None => Ok(self.zero()),
                    Some(va) if va < vb => Err(RingError::InexactDivision(format!(
                        "series valuation {vb} of divisor exceeds {va}"
                    ))),
                    Some(_) => {
                        let an = self.shift_down(a, vb)?;
                        let bn = self.shift_down(b, vb)?;
                        Ok(self.mul(&an, &self.inv(&bn)?))
                    }
                }
            }
            _ => Ok(self.mul(a, &self.inv(b)?)),
        }
    }

    pub fn pow(&self, a: &Elem, e: i64) -> Result<Elem, RingError> {
        let base_elem = if e < 0 { self.inv(a)? } else { a.clone() };
        let mut k = e.unsigned_abs();
        let mut acc = self.one();
        let mut sq = base_elem;
        while k > 0 {
            if k & 1 == 1 {
                acc = self.mul(&acc, &sq);
            }
            sq = self.mul(&sq, &sq);
            k >>= 1;
        }
        Ok(acc)
    }

    // ----- series/valuation utilities -----

    /// s-adic valuation of a series element; None for zero.
    pub fn val(&self, a: &Elem) -> Option<usize> {
        match (self, a) {
            (Ring::Series { base, .. }, Elem::Ser(v)) => v.iter().position(|c| !base.is_zero(c)),
            _ => panic!("val is a series-layer operation"),
        }
    }

    /// Exact division by s^k (pads with zeros above; precision shrinks).
    pub fn shift_down(&self, a: &Elem, k: usize) -> Result<Elem, RingError> {
        match (self, a) {
            (Ring::Series { base, prec, .. }, Elem::Ser(v)) => {
                if self.val(a).map_or(false, |va| va < k) {
                    return Err(RingError::InexactDivision(format!(
                        "cannot divide by {}^{k}",
                        self.series_var().unwrap()
                    )));
                }
                let mut out: Vec<Elem> = v[k.min(*prec)..].to_vec();
                out.resize(*prec, base.zero());
                Ok(Elem::Ser(out))
            }
            _ => Err(RingError::Capability("shift_down is a series-layer operation".into())),
        }
    }

    pub fn series_var(&self) -> Option<&str> {
        match self {
            Ring::Series { var, .. } => Some(var),
            _ => None,
        }
    }

    /// d/ds on the series layer.
    pub fn derivative(&self, a: &Elem) -> Result<Elem, RingError> {
        match (self, a) {
            (Ring::Series { base, prec, .. }, Elem::Ser(v)) => {
                let mut out = vec![base.zero(); *prec];
                for i in 1..*prec {
                    out[i - 1] = base.mul(&v[i], &base.from_i64(i as i64));
                }
                Ok(Elem::Ser(out))
            }
            _ => Err(RingError::Capability("derivative is a series-layer operation".into())),
        }
    }

    // ----- roots -----

    /// Square root with an explicit branch witness `c0` for the leading part
    /// (constant term for series, residue for p-adics, the value itself over
    /// exact fields). 2*c0 must be a unit.
    pub fn sqrt(&self, a: &Elem, c0: &Elem) -> Result<Elem, RingError> {
        match self {
            Ring::Series { base, prec, .. } => {
                // positive even valuation: pull out s^{2k} first; the top k
                // coefficients of the result carry the usual truncation slack
                match self.val(a) {
                    None => return Ok(self.zero()),
                    Some(0) => {}
                    Some(v2) if v2 % 2 == 1 => {
                        return Err(RingError::SqrtWitness(format!(
                            "series valuation {v2} is odd; no square root"
                        )));
                    }
                    Some(v2) => {
                        let shifted = self.shift_down(a, v2)?;
                        let root = self.sqrt(&shifted, c0)?;
                        let Elem::Ser(rv) = root else { unreachable!() };
                        let k = v2 / 2;
                        let mut out = vec![base.zero(); *prec];
                        for (i, c) in rv.into_iter().enumerate() {
                            if i + k < *prec {
                                out[i + k] = c;
                            }
                        }
                        return Ok(Elem::Ser(out));
                    }
                }
                let Elem::Ser(v) = a else { panic!("ring/element mismatch in sqrt") };
                // refine the witness against the constant term: exact check
                // over fields, Hensel lift over p-adic coefficients
                let c0 = &base.sqrt(&v[0], c0)?;
                let two_c0 = base.add(c0, c0);
                if !base.is_invertible(&two_c0) {
                    return Err(RingError::SqrtWitness("2*witness is not a unit".into()));
                }
                let inv2c0 = base.inv(&two_c0)?;
                let n = *prec;
                let mut out = vec![base.zero(); n];
                out[0] = c0.clone();
                for k in 1..n {
                    let mut acc = base.zero();
                    for i in 1..k {
                        acc = base.add(&acc, &base.mul(&out[i], &out[k - i]));
                    }
                    out[k] = base.mul(&inv2c0, &base.sub(&v[k], &acc));
                }
                Ok(Elem::Ser(out))
            }
            Ring::PAdic { p, prec, .. } => {
                let Elem::Mod(av) = a else { panic!("ring/element mismatch in sqrt") };
                let Elem::Mod(c) = c0 else { panic!("ring/element mismatch in sqrt") };
                if (c * c) % p != av % p {
                    return Err(RingError::SqrtWitness(
                        "witness squared does not match the residue mod p".into(),
                    ));
                }
                if (2 * c) % p == 0 {
                    return Err(RingError::SqrtWitness("2*witness is not a unit".into()));
                }
                let mut r = c0.clone();
                for _ in 0..(prec.ilog2() + 2) {
                    // r <- (r + a/r)/2
                    let quo = self.div(a, &r)?;
                    let sum = self.add(&r, &quo);
                    r = self.div(&sum, &self.from_i64(2))?;
                }
                if !self.eq_elem(&self.mul(&r, &r), a) {
                    return Err(RingError::NewtonFailed("p-adic sqrt did not converge".into()));
                }
                Ok(r)
            }
            _ => {
                if !self.eq_elem(&self.mul(c0, c0), a) {
                    return Err(RingError::SqrtWitness(
                        "over an exact field the witness must square to the input".into(),
                    ));
                }
                Ok(c0.clone())
            }
        }
    }

    /// Newton/Hensel root of f(y) = sum coeffs[i] y^i (constant first) from a
    /// seed. Simple residual roots converge quadratically; ramified seeds
    /// (the 5_2 trace-cubic branch) converge as long as the exact division
    /// f(y)/f'(y) stays well-defined. Convergence is checked, not assumed.
    pub fn algebraic_root(&self, coeffs: &[Elem], seed: &Elem) -> Result<Elem, RingError> {
        let eval = |y: &Elem| {
            let mut acc = self.zero();
            for c in coeffs.iter().rev() {
                acc = self.add(&self.mul(&acc, y), c);
            }
            acc
        };
        let dcoeffs: Vec<Elem> = coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| {
                let mut acc = self.zero();
                for _ in 0..i {
                    acc = self.add(&acc, c);
                }
                acc
            })
            .collect();
        let deval = |y: &Elem| {
            let mut acc = self.zero();
            for c in dcoeffs.iter().rev() {
                acc = self.add(&self.mul(&acc, y), c);
            }
            acc
        };
        let mut y = seed.clone();
        for _ in 0..80 {
            let fy = eval(&y);
            if self.is_zero(&fy) {
                return Ok(y);
            }
            let dfy = deval(&y);
            let step = self.div(&fy, &dfy).map_err(|e| {
                RingError::NewtonFailed(format!("update f/f' is not an exact division: {e}"))
            })?;
            y = self.sub(&y, &step);
        }
        if self.is_zero(&eval(&y)) {
            Ok(y)
        } else {
            Err(RingError::NewtonFailed(
                "no exact root within the iteration budget (seed not a simple/convergent branch)"
                    .into(),
            ))
        }
    }

    // ----- Eisenstein-integer helpers (Q[w]/(w^2+3) only) -----

    /// Coordinates (x, y) of a = x + y*w.
    pub fn eis_xy(&self, a: &Elem) -> (BigRational, BigRational) {
        let Elem::Pol(v) = a else { panic!("eis_xy on non-extension element") };
        let get = |e: &Elem| match e {
            Elem::Rat(r) => r.clone(),
            _ => panic!("eis_xy needs rational coordinates"),
        };
        (get(&v[0]), get(&v[1]))
    }

    pub fn eis_is_integral(&self, a: &Elem) -> bool {
        let (x, y) = self.eis_xy(a);
        let two = rat_i64(2);
        let (tx, ty) = (&x * &two, &y * &two);
        if !tx.is_integer() || !ty.is_integer() {
            return false;
        }
        let parity = (tx.to_integer() - ty.to_integer()) % BigInt::from(2);
        parity.is_zero()
    }

    /// Field norm x^2 + 3y^2 (nonnegative rational).
    pub fn eis_norm(&self, a: &Elem) -> BigRational {
        let (x, y) = self.eis_xy(a);
        &x * &x + rat_i64(3) * &y * &y
    }

    // ----- reduction maps -----

    /// Ring-homomorphic reduction onto `target`. Extension generators need
    /// images supplied by name; each image is checked against the minimal
    /// polynomial in the target.
    pub fn reduce_mod(
        &self,
        a: &Elem,
        target: &Ring,
        gen_images: &[(String, Elem)],
    ) -> Result<Elem, RingError> {
        if self == target {
            return Ok(a.clone());
        }
        match self {
            Ring::PAdic { p, prec, .. } => match target {
                Ring::PrimeField { p: tp } if tp == p => {
                    let Elem::Mod(x) = a else { panic!("ring/element mismatch") };
                    Ok(Elem::Mod(x % p))
                }
                Ring::PAdic { p: tp, prec: tn, q: tq } if tp == p && tn <= prec => {
                    let Elem::Mod(x) = a else { panic!("ring/element mismatch") };
                    Ok(Elem::Mod(x % tq))
                }
                _ => Err(RingError::NoReduction(format!(
                    "{} -> {}",
                    self.descriptor_string(),
                    target.descriptor_string()
                ))),
            },
            Ring::Rationals => {
                let Elem::Rat(x) = a else { panic!("ring/element mismatch") };
                let modulus = match target {
                    Ring::PrimeField { p } => *p,
                    Ring::PAdic { q, .. } => *q,
                    _ => {
                        return Err(RingError::NoReduction(format!(
                            "Q -> {}",
                            target.descriptor_string()
                        )))
                    }
                };
                let m = BigInt::from(modulus);
                let den = x.denom().clone() % &m;
                let den = ((den % &m) + &m) % &m;
                let den64: u64 = den.try_into().unwrap();
                let dinv = inv_mod(den64, modulus).ok_or_else(|| {
                    RingError::NoReduction("denominator lies in the maximal ideal".into())
                })?;
                let num = ((x.numer() % &m) + &m) % &m;
                let num64: u64 = num.try_into().unwrap();
                Ok(Elem::Mod(mul_mod(num64, dinv, modulus)))
            }
            Ring::Series { base, prec, var } => match target {
                Ring::Series { base: tb, prec: tn, var: tv } if tv == var && tn <= prec => {
                    let Elem::Ser(v) = a else { panic!("ring/element mismatch") };
                    let out: Result<Vec<Elem>, RingError> = v[..*tn]
                        .iter()
                        .map(|c| base.reduce_mod(c, tb, gen_images))
                        .collect();
                    Ok(Elem::Ser(out?))
                }
                _ => {
                    // s -> 0, then continue reducing from the base
                    let Elem::Ser(v) = a else { panic!("ring/element mismatch") };
                    base.reduce_mod(&v[0], target, gen_images)
                }
            },
            Ring::Extension { base, minpoly, gen_name } => {
                let Elem::Pol(v) = a else { panic!("ring/element mismatch") };
                let img = gen_images
                    .iter()
                    .find(|(n, _)| n == gen_name)
                    .map(|(_, e)| e.clone())
                    .ok_or_else(|| {
                        RingError::NoReduction(format!(
                            "no image supplied for generator '{gen_name}'"
                        ))
                    })?;
                // check the image satisfies the minimal polynomial downstairs
                let mut mp_img = target.zero();
                let mut zpow = target.one();
                for c in minpoly {
                    let rc = base.reduce_mod(c, target, gen_images)?;
                    mp_img = target.add(&mp_img, &target.mul(&rc, &zpow));
                    zpow = target.mul(&zpow, &img);
                }
                mp_img = target.add(&mp_img, &zpow);
                if !target.is_zero(&mp_img) {
                    return Err(RingError::NoReduction(format!(
                        "image of '{gen_name}' does not satisfy its minimal polynomial"
                    )));
                }
                let mut out = target.zero();
                let mut zpow = target.one();
                for c in v {
                    let rc = base.reduce_mod(c, target, gen_images)?;
                    out = target.add(&out, &target.mul(&rc, &zpow));
                    zpow = target.mul(&zpow, &img);
                }
                Ok(out)
            }
            _ => Err(RingError::NoReduction(format!(
                "{} -> {}",
                self.descriptor_string(),
                target.descriptor_string()
            ))),
        }
    }

    // ----- printing -----

    pub fn repr(&self, a: &Elem) -> String {
        match (self, a) {
            (Ring::Rationals, Elem::Rat(x)) => x.to_string(),
            (Ring::PrimeField { .. }, Elem::Mod(x)) => x.to_string(),
            (Ring::PAdic { q, .. }, Elem::Mod(x)) => {
                // balanced representative reads better for small negatives
                if *x > q / 2 {
                    format!("{}", *x as i128 - *q as i128)
                } else {
                    x.to_string()
                }
            }
            (Ring::Extension { base, gen_name, .. }, Elem::Pol(v)) => {
                join_terms(base, v.iter().enumerate(), gen_name)
            }
            (Ring::Series { base, prec, var }, Elem::Ser(v)) => {
                let body = join_terms(base, v.iter().enumerate(), var);
                if body == "0" {
                    format!("O({var}^{prec})")
                } else {
                    format!("{body} + O({var}^{prec})")
                }
            }
            (Ring::Laurent { base, var }, Elem::Lau(m)) => {
                if m.is_empty() {
                    return "0".into();
                }
                let parts: Vec<String> = m
                    .iter()
                    .map(|(k, c)| {
                        let mono = match k {
                            0 => String::new(),
                            1 => format!("*{var}"),
                            _ => format!("*{var}^{k}"),
                        };
                        format!("({}){}", base.repr(c), mono)
                    })
                    .collect();
                parts.join(" + ")
            }
            _ => panic!("ring/element mismatch in repr"),
        }
    }
}

fn padic_val(a: u64, p: u64, prec: u32) -> u32 {
    if a == 0 {
        return prec;
    }
    let mut a = a;
    let mut v = 0;
    while a % p == 0 {
        a /= p;
        v += 1;
    }
    v
}

/// p-adic valuation of a Mod element, capped at the precision.
pub fn padic_valuation(ring: &Ring, a: &Elem) -> u32 {
    let Ring::PAdic { p, prec, .. } = ring else { panic!("padic_valuation needs a PAdic ring") };
    let Elem::Mod(x) = a else { panic!("ring/element mismatch") };
    padic_val(*x, *p, *prec)
}

fn join_terms<'a>(
    base: &Ring,
    coeffs: impl Iterator<Item = (usize, &'a Elem)>,
    var: &str,
) -> String {
    let mut parts = Vec::new();
    for (i, c) in coeffs {
        if base.is_zero(c) {
            continue;
        }
        let mono = match i {
            0 => String::new(),
            1 => format!("*{var}"),
            _ => format!("*{var}^{i}"),
        };
        parts.push(format!("({}){}", base.repr(c), mono));
    }
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

/// Checked arithmetic entry point: validates payload shapes before
/// dispatching (library-internal code uses the direct methods).
pub fn arith(ring: &Ring, op: ArithOp, a: &Elem, b: &Elem) -> Result<Elem, RingError> {
    if !ring.element_fits(a) || !ring.element_fits(b) {
        return Err(RingError::Mismatch(format!(
            "operands do not lie in {}",
            ring.descriptor_string()
        )));
    }
    match op {
        ArithOp::Add => Ok(ring.add(a, b)),
        ArithOp::Sub => Ok(ring.sub(a, b)),
        ArithOp::Mul => Ok(ring.mul(a, b)),
        ArithOp::Div => ring.div(a, b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qw() -> RingRc {
        let q = Ring::rationals();
        let mp = vec![q.from_i64(3), q.from_i64(0), q.from_i64(1)];
        Ring::extension(q, mp, "w").unwrap()
    }

    #[test]
    fn prime_field_inverse() {
        let f53 = Ring::prime_field(53).unwrap();
        let two = f53.from_i64(2);
        let inv = f53.inv(&two).unwrap();
        assert_eq!(inv, Elem::Mod(27));
        assert!(f53.eq_elem(&f53.mul(&two, &inv), &f53.one()));
    }

    #[test]
    fn non_prime_rejected() {
        assert!(Ring::prime_field(51).is_err());
        assert!(Ring::padic(10, 3).is_err());
    }

    #[test]
    fn extension_defining_relation() {
        let e = qw();
        let w = e.gen().unwrap();
        assert!(e.eq_elem(&e.mul(&w, &w), &e.from_i64(-3)));
    }

    #[test]
    fn extension_inverse_round_trip() {
        let e = qw();
        let w = e.gen().unwrap();
        let a = e.add(&e.from_i64(2), &w); // 2 + w
        let inv = e.inv(&a).unwrap();
        assert!(e.eq_elem(&e.mul(&a, &inv), &e.one()));
    }

    #[test]
    fn padic_half_times_two() {
        let z53 = Ring::padic(53, 8).unwrap();
        let half = z53.inv(&z53.from_i64(2)).unwrap();
        let five_halves = z53.mul(&z53.from_i64(5), &half);
        assert!(z53.eq_elem(&z53.mul(&five_halves, &z53.from_i64(2)), &z53.from_i64(5)));
    }

    #[test]
    fn geometric_series_inverse() {
        let q = Ring::rationals();
        let s4 = Ring::series(q, 4, "s").unwrap();
        let s = s4.gen().unwrap();
        let one_plus_s = s4.add(&s4.one(), &s);
        let inv = s4.inv(&one_plus_s).unwrap();
        // 1 - s + s^2 - s^3
        let mut expect = s4.one();
        let mut sp = s.clone();
        for k in 1..4 {
            let term = if k % 2 == 1 { s4.neg(&sp) } else { sp.clone() };
            expect = s4.add(&expect, &term);
            sp = s4.mul(&sp, &s);
        }
        assert!(s4.eq_elem(&inv, &expect));
        assert!(s4.eq_elem(&s4.mul(&one_plus_s, &inv), &s4.one()));
    }

    #[test]
    fn series_sqrt_squares_back() {
        let e = qw();
        let a8 = Ring::series(e.clone(), 8, "s").unwrap();
        let s = a8.gen().unwrap();
        let x = a8.add(&a8.mul(&s, &s), &a8.one()); // x = s^2 + 1
        let a = a8.sub(&a8.mul(&x, &x), &a8.from_i64(4)); // x^2 - 4, constant -3
        let w = e.gen().unwrap();
        let r = a8.sqrt(&a, &w).unwrap();
        assert!(a8.eq_elem(&a8.mul(&r, &r), &a));
        // witness must be pinned: wrong witness rejected
        assert!(a8.sqrt(&a, &e.one()).is_err());
    }

    #[test]
    fn padic_sqrt_five_halves() {
        let z53 = Ring::padic(53, 8).unwrap();
        let a = z53.div(&z53.from_i64(5), &z53.from_i64(2)).unwrap();
        let r = z53.sqrt(&a, &z53.from_i64(33)).unwrap();
        assert!(z53.eq_elem(&z53.mul(&r, &r), &a));
        let Elem::Mod(rv) = r else { unreachable!() };
        assert_eq!(rv % 53, 33);
    }

    #[test]
    fn hensel_sextic_for_beta() {
        let z17 = Ring::padic(17, 8).unwrap();
        let coeffs: Vec<Elem> = [343i64, 0, 196, 0, -126, 0, 20]
            .iter()
            .map(|&c| z17.from_i64(c))
            .collect();
        let beta = z17.algebraic_root(&coeffs, &z17.from_i64(2)).unwrap();
        let Elem::Mod(b) = beta else { unreachable!() };
        assert_eq!(b % 17, 2);
    }

    #[test]
    fn laurent_units() {
        let q = Ring::rationals();
        let l = Ring::laurent(q.clone(), "t").unwrap();
        let t = l.gen().unwrap();
        assert!(l.is_unit(&t));
        let tm1 = l.sub(&t, &l.one());
        assert!(!l.is_unit(&tm1));
        let tinv = l.inv(&t).unwrap();
        assert!(l.eq_elem(&l.mul(&t, &tinv), &l.one()));
    }

    #[test]
    fn laurent_only_outermost() {
        let q = Ring::rationals();
        let l = Ring::laurent(q, "t").unwrap();
        assert!(Ring::series(l.clone(), 4, "s").is_err());
        assert!(Ring::laurent(l, "u").is_err());
    }

    #[test]
    fn eisenstein_units() {
        let e = qw();
        let w = e.gen().unwrap();
        assert!(!e.is_unit(&w)); // sqrt(-3) is not a unit of O
        let om = e.div(&e.add(&e.one(), &w), &e.from_i64(2)).unwrap();
        assert!(e.is_unit(&om)); // (1+w)/2 is
        assert!(e.eis_is_integral(&om));
        assert!(!e.is_unit(&e.from_i64(2)));
    }

    #[test]
    fn reduce_q_w_to_f7() {
        let e = qw();
        let f7 = Ring::prime_field(7).unwrap();
        let w_img = f7.from_i64(2); // 2^2 = 4 = -3 mod 7
        let a = e.add(&e.gen().unwrap(), &e.one()); // w + 1
        let r = e
            .reduce_mod(&a, &f7, &[("w".into(), w_img)])
            .unwrap();
        assert_eq!(r, Elem::Mod(3));
        // a wrong image is rejected
        assert!(e
            .reduce_mod(&a, &f7, &[("w".into(), f7.from_i64(3))])
            .is_err());
    }

    #[test]
    fn reduce_series_sets_s_to_zero() {
        let z53 = Ring::padic(53, 8).unwrap();
        let a8 = Ring::series(z53.clone(), 8, "s").unwrap();
        let f53 = Ring::prime_field(53).unwrap();
        let a = a8.add(
            &a8.lift(z53.div(&z53.from_i64(38), &z53.from_i64(2)).unwrap()),
            &a8.gen().unwrap(),
        );
        let r = a8.reduce_mod(&a, &f53, &[]).unwrap();
        assert_eq!(r, Elem::Mod(19));
    }

    #[test]
    fn division_by_positive_valuation() {
        let q = Ring::rationals();
        let s8 = Ring::series(q, 8, "s").unwrap();
        let s = s8.gen().unwrap();
        let s2 = s8.mul(&s, &s);
        let a = s8.mul(&s2, &s8.add(&s8.one(), &s)); // s^2 (1+s)
        let quo = s8.div(&a, &s2).unwrap();
        assert!(s8.eq_elem(&quo, &s8.add(&s8.one(), &s)));
        assert!(s8.div(&s, &s2).is_err());
    }

    #[test]
    fn checked_arith_rejects_mismatch() {
        let q = Ring::rationals();
        let f5 = Ring::prime_field(5).unwrap();
        let bad = arith(&q, ArithOp::Add, &q.one(), &f5.one());
        assert!(matches!(bad, Err(RingError::Mismatch(_))));
    }
}
