//! Arithmetic of Z_p[[s]] at fixed precision (p^Np, s^Ns): p-content,
//! Weierstrass preparation, gcds through distinguished polynomials, and
//! exact division through the p^a * W * unit decomposition.
//!
//! A nonzero element factors (up to units) as p^a * W with W a monic
//! distinguished polynomial; `canonical_parts` computes that pair and gcds
//! combine parts componentwise (min of p-exponents, polynomial gcd of the
//! distinguished parts).

use crate::error::RingError;
use crate::ring::{Elem, Ring, RingRc};

/// View over a `Series(PAdic(p, np), ns)` ring.
pub struct ZpSeries {
    pub ring: RingRc,
    pub p: u64,
    pub np: u32,
    pub q: u64,
    pub ns: usize,
}

impl ZpSeries {
    pub fn new(ring: RingRc) -> Result<Self, RingError> {
        let Ring::Series { base, prec, .. } = &*ring else {
            return Err(RingError::Capability(
                "Weierstrass machinery needs a series ring".into(),
            ));
        };
        let Ring::PAdic { p, prec: np, q } = **base else {
            return Err(RingError::Capability(
                "Weierstrass machinery needs p-adic series coefficients".into(),
            ));
        };
        let ns = *prec;
        Ok(ZpSeries { ring, p, np, q, ns })
    }

    fn coeffs(&self, a: &Elem) -> Vec<u64> {
        let Elem::Ser(v) = a else { panic!("expected a series element") };
        v.iter()
            .map(|c| match c {
                Elem::Mod(x) => *x,
                _ => panic!("expected p-adic coefficients"),
            })
            .collect()
    }

    pub fn from_coeffs(&self, v: &[u64]) -> Elem {
        let mut out: Vec<Elem> = v.iter().take(self.ns).map(|x| Elem::Mod(x % self.q)).collect();
        out.resize(self.ns, Elem::Mod(0));
        Elem::Ser(out)
    }

    fn val_p(&self, mut x: u64) -> u32 {
        if x == 0 {
            return self.np;
        }
        let mut v = 0;
        while x % self.p == 0 {
            x /= self.p;
            v += 1;
        }
        v
    }

    /// Minimal p-valuation over the coefficients; None for zero.
    pub fn content(&self, a: &Elem) -> Option<u32> {
        let mut c: Option<u32> = None;
        for x in self.coeffs(a) {
            if x == 0 {
                continue;
            }
            let v = self.val_p(x);
            c = Some(c.map_or(v, |cur| cur.min(v)));
            if c == Some(0) {
                return c;
            }
        }
        c
    }

    /// Divide every coefficient by p^k (each must be divisible).
    pub fn divide_p(&self, a: &Elem, k: u32) -> Result<Elem, RingError> {
        let pk = self.p.pow(k);
        let mut out = Vec::with_capacity(self.ns);
        for x in self.coeffs(a) {
            if x % pk != 0 {
                return Err(RingError::InexactDivision(format!(
                    "coefficient {x} is not divisible by {}^{k}",
                    self.p
                )));
            }
            out.push(x / pk);
        }
        Ok(self.from_coeffs(&out))
    }

    /// Weierstrass degree: first index with a unit coefficient.
    pub fn wdeg(&self, a: &Elem) -> Option<usize> {
        self.coeffs(a).iter().position(|x| x % self.p != 0)
    }

    /// Series times an integer polynomial (constant first), as a series.
    pub fn mul_poly(&self, u: &Elem, w: &[u64]) -> Elem {
        let uc = self.coeffs(u);
        let mut acc = vec![0u64; self.ns];
        for (i, &wc) in w.iter().enumerate() {
            if wc % self.q == 0 || i >= self.ns {
                continue;
            }
            for (j, &ucj) in uc.iter().enumerate().take(self.ns - i) {
                acc[i + j] =
                    (acc[i + j] + (wc as u128 * ucj as u128 % self.q as u128) as u64) % self.q;
            }
        }
        self.from_coeffs(&acc)
    }

    /// Weierstrass preparation a = U * W with U a unit series and W monic
    /// distinguished (returned as integer coefficients, constant first).
    pub fn weierstrass(&self, a: &Elem) -> Result<(Elem, Vec<u64>), RingError> {
        let s = &*self.ring;
        let k = self.wdeg(a).ok_or_else(|| {
            RingError::Precision("no unit coefficient: p-content must be stripped first".into())
        })?;
        if k == 0 {
            return Ok((a.clone(), vec![1]));
        }
        let ac = self.coeffs(a);
        let mut w = vec![0u64; k + 1];
        w[k] = 1;
        let mut u = {
            let mut v: Vec<u64> = ac[k..].to_vec();
            v.resize(self.ns, 0);
            self.from_coeffs(&v)
        };
        for _ in 0..self.np + 2 {
            let err = s.sub(a, &self.mul_poly(&u, &w));
            if s.is_zero(&err) {
                break;
            }
            let e = s.div(&err, &u)?;
            let ec = self.coeffs(&e);
            for i in 0..k {
                w[i] = (w[i] + ec[i]) % self.q;
            }
            let mut high: Vec<u64> = ec[k..].to_vec();
            high.resize(self.ns, 0);
            let e_high = self.from_coeffs(&high);
            u = s.add(&u, &s.mul(&u, &e_high));
        }
        let err = s.sub(a, &self.mul_poly(&u, &w));
        if !s.is_zero(&err) {
            return Err(RingError::NewtonFailed(
                "Weierstrass preparation did not converge".into(),
            ));
        }
        if w[..k].iter().any(|x| x % self.p != 0) {
            return Err(RingError::NewtonFailed(
                "Weierstrass factor is not distinguished".into(),
            ));
        }
        Ok((u, w))
    }

    /// Remainder of integer-coefficient polynomial division mod q (b monic).
    fn poly_mod(&self, a: &[u64], b: &[u64]) -> Vec<u64> {
        let q = self.q as u128;
        let mut a: Vec<u64> = a.iter().map(|x| x % self.q).collect();
        while a.len() >= b.len() {
            while a.last().is_some_and(|x| *x == 0) {
                a.pop();
            }
            if a.len() < b.len() {
                break;
            }
            let lead = *a.last().unwrap() as u128;
            let off = a.len() - b.len();
            for (i, &bc) in b.iter().enumerate() {
                let sub = lead * bc as u128 % q;
                a[off + i] = ((a[off + i] as u128 + q - sub) % q) as u64;
            }
            a.pop();
        }
        while a.last().is_some_and(|x| *x == 0) {
            a.pop();
        }
        a
    }

    /// gcd of monic distinguished polynomials via Euclid; remainders are
    /// renormalized through content-stripping + Weierstrass preparation.
    fn gcd_dist(&self, wa: &[u64], wb: &[u64]) -> Result<Vec<u64>, RingError> {
        let (wa, wb) = if wa.len() < wb.len() { (wb, wa) } else { (wa, wb) };
        if wb.len() == 1 {
            return Ok(vec![1]);
        }
        let r = self.poly_mod(wa, wb);
        if r.is_empty() {
            return Ok(wb.to_vec());
        }
        let rser = self.from_coeffs(&r);
        let c = self.content(&rser);
        match c {
            // remainder vanishes to working precision: accept wb
            None => Ok(wb.to_vec()),
            Some(c) if c >= self.np - 1 => Ok(wb.to_vec()),
            Some(c) => {
                let rcf = self.divide_p(&rser, c)?;
                let (_, wr) = self.weierstrass(&rcf)?;
                self.gcd_dist(wb, &wr)
            }
        }
    }

    /// Canonical parts (p-exponent, distinguished polynomial); None for zero.
    pub fn canonical_parts(&self, a: &Elem) -> Result<Option<(u32, Vec<u64>)>, RingError> {
        let c = match self.content(a) {
            None => return Ok(None),
            Some(c) => c,
        };
        let acf = self.divide_p(a, c)?;
        let (_, w) = self.weierstrass(&acf)?;
        Ok(Some((c, w)))
    }

    pub fn from_parts(&self, parts: Option<&(u32, Vec<u64>)>) -> Elem {
        let Some((c, w)) = parts else { return self.ring.zero() };
        let pk = self.p.pow(*c) as u128;
        let mut out = vec![0u64; self.ns];
        for (i, &wc) in w.iter().enumerate().take(self.ns) {
            out[i] = (wc as u128 * pk % self.q as u128) as u64;
        }
        self.from_coeffs(&out)
    }

    /// Canonical associate: the representative p^a * W of the unit orbit.
    pub fn canonical(&self, a: &Elem) -> Result<Elem, RingError> {
        let parts = self.canonical_parts(a)?;
        Ok(self.from_parts(parts.as_ref()))
    }

    fn gcd_parts(
        &self,
        pa: &(u32, Vec<u64>),
        pb: &(u32, Vec<u64>),
    ) -> Result<(u32, Vec<u64>), RingError> {
        Ok((pa.0.min(pb.0), self.gcd_dist(&pa.1, &pb.1)?))
    }

    /// gcd of two elements, as canonical parts.
    pub fn gcd_elems(&self, a: &Elem, b: &Elem) -> Result<Elem, RingError> {
        let pa = self.canonical_parts(a)?;
        let pb = self.canonical_parts(b)?;
        let g = match (pa, pb) {
            (None, x) | (x, None) => x,
            (Some(x), Some(y)) => Some(self.gcd_parts(&x, &y)?),
        };
        Ok(self.from_parts(g.as_ref()))
    }

    pub fn gcd_list(&self, xs: &[Elem]) -> Result<Elem, RingError> {
        let mut g: Option<(u32, Vec<u64>)> = None;
        for x in xs {
            if g.as_ref().is_some_and(|g| g.0 == 0 && g.1 == vec![1]) {
                break;
            }
            let parts = self.canonical_parts(x)?;
            g = match (g, parts) {
                (None, x) | (x, None) => x,
                (Some(a), Some(b)) => Some(self.gcd_parts(&a, &b)?),
            };
        }
        Ok(self.from_parts(g.as_ref()))
    }

    /// Quotient and remainder of integer polynomial division mod q (b monic).
    fn poly_divmod(&self, a: &[u64], b: &[u64]) -> (Vec<u64>, Vec<u64>) {
        let q = self.q as u128;
        let mut a: Vec<u64> = a.iter().map(|x| x % self.q).collect();
        let mut quo = vec![0u64; a.len().saturating_sub(b.len()) + 1];
        while a.len() >= b.len() {
            while a.last().is_some_and(|x| *x == 0) {
                a.pop();
            }
            if a.len() < b.len() {
                break;
            }
            let lead = *a.last().unwrap();
            let off = a.len() - b.len();
            quo[off] = lead;
            for (i, &bc) in b.iter().enumerate() {
                let sub = lead as u128 * bc as u128 % q;
                a[off + i] = ((a[off + i] as u128 + q - sub) % q) as u64;
            }
            a.pop();
        }
        while a.last().is_some_and(|x| *x == 0) {
            a.pop();
        }
        (quo, a)
    }

    /// Exact division through the p^a * U * W decomposition: p-powers divide
    /// on integers, distinguished parts by monic polynomial division, unit
    /// parts by series division. Errors if any stage is inexact.
    pub fn div_exact(&self, a: &Elem, b: &Elem) -> Result<Elem, RingError> {
        let s = &*self.ring;
        if s.is_zero(a) {
            return Ok(s.zero());
        }
        let cb = self
            .content(b)
            .ok_or(RingError::DivisionByZero)?;
        let ca = self.content(a).unwrap();
        if ca < cb {
            return Err(RingError::InexactDivision(format!(
                "p-content {cb} of divisor exceeds {ca}"
            )));
        }
        let (ua, wa) = self.weierstrass(&self.divide_p(a, ca)?)?;
        let (ub, wb) = self.weierstrass(&self.divide_p(b, cb)?)?;
        let (wq, rem) = self.poly_divmod(&wa, &wb);
        if !rem.is_empty() {
            return Err(RingError::InexactDivision(
                "distinguished parts do not divide".into(),
            ));
        }
        let uq = s.div(&ua, &ub)?;
        let out = self.mul_poly(&uq, &wq);
        let pk = self.p.pow(ca - cb) as u128;
        let scaled: Vec<u64> = self
            .coeffs(&out)
            .iter()
            .map(|&x| (x as u128 * pk % self.q as u128) as u64)
            .collect();
        Ok(self.from_coeffs(&scaled))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zs(p: u64, np: u32, ns: usize) -> ZpSeries {
        let z = Ring::padic(p, np).unwrap();
        let ring = Ring::series(z, ns, "s").unwrap();
        ZpSeries::new(ring).unwrap()
    }

    #[test]
    fn weierstrass_of_s2_plus_5s() {
        let zsr = zs(5, 4, 6);
        let a = zsr.from_coeffs(&[0, 5, 1]);
        let parts = zsr.canonical_parts(&a).unwrap().unwrap();
        assert_eq!(parts, (0, vec![0, 5, 1]));
        // multiplying by a unit must not change the parts
        let s_ring = &zsr.ring;
        let unit = zsr.from_coeffs(&[1, 3, 0, 2]);
        let au = s_ring.mul(&a, &unit);
        assert_eq!(zsr.canonical_parts(&au).unwrap().unwrap(), parts);
    }

    #[test]
    fn content_and_gcd() {
        let zsr = zs(5, 4, 6);
        let a = zsr.from_coeffs(&[0, 25]); // 25 s
        let b = zsr.from_coeffs(&[0, 0, 5]); // 5 s^2
        let g = zsr.gcd_elems(&a, &b).unwrap();
        assert_eq!(g, zsr.from_coeffs(&[0, 5])); // 5 s
    }

    #[test]
    fn gcd_of_coprime_is_one() {
        let zsr = zs(5, 4, 6);
        let a = zsr.from_coeffs(&[0, 1]); // s
        let b = zsr.from_coeffs(&[2, 1]); // 2 + s (unit)
        let g = zsr.gcd_elems(&a, &b).unwrap();
        assert_eq!(g, zsr.from_coeffs(&[1]));
    }

    #[test]
    fn div_exact_round_trip() {
        let zsr = zs(5, 4, 8);
        let s_ring = &zsr.ring;
        let a = zsr.from_coeffs(&[0, 5, 1]); // s(s+5)
        let b = zsr.from_coeffs(&[625 - 25, 0, 10, 1]); // arbitrary cofactor with content 0
        let prod = s_ring.mul(&a, &b);
        let quo = zsr.div_exact(&prod, &a).unwrap();
        assert!(s_ring.eq_elem(&quo, &b));
        // and an inexact division errors
        let c = zsr.from_coeffs(&[0, 0, 0, 1]); // s^3 does not divide s(s+5)*b
        assert!(zsr.div_exact(&a, &c).is_err());
    }

    #[test]
    fn gcd_list_short_circuits_on_unit() {
        let zsr = zs(53, 8, 8);
        let xs = vec![
            zsr.from_coeffs(&[0, 53, 1]),
            zsr.from_coeffs(&[7]),
            zsr.from_coeffs(&[0, 0, 1]),
        ];
        assert_eq!(zsr.gcd_list(&xs).unwrap(), zsr.from_coeffs(&[1]));
    }
}
