//! gcds, canonical associates, exact-divisibility checks, and elementary
//! divisors over the supported coefficient layers.
//!
//! Canonical associates per layer: fields -> 1, K[[s]] -> s^k, Z_p -> p^a,
//! Z_p[[s]] -> p^a * (distinguished monic polynomial), Laurent -> t-shift to
//! exponent 0 with the leading base coefficient canonicalized, and the
//! Eisenstein integers -> a fixed fundamental-domain representative of the
//! six-element unit orbit.
//!
//! Laurent gcds over series bases avoid remainder chains entirely: reduce
//! mod the maximal ideal, take the residue-field gcd, Newton-lift the monic
//! factor out of a unit-leading-coefficient component, then certify by exact
//! division of every component (see `laurent_gcd_list`).

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::RingError;
use crate::factor::{lift_monic_factor, poly_divides_monic_normalized, poly_divmod_monic};
use crate::local::ZpSeries;
use crate::ring::{padic_valuation, Elem, Ring, RingRc};

#[derive(Clone, Debug)]
pub struct UnitNormalForm {
    pub unit: Elem,
    pub normal: Elem,
}

fn rat_i64(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

// ----- Eisenstein integers Z[(1+sqrt(-3))/2] inside Q(w)/(w^2+3) -----

fn eis_from_xy(x: BigRational, y: BigRational) -> Elem {
    Elem::Pol(vec![Elem::Rat(x), Elem::Rat(y)])
}

fn eis_require_integral(ring: &Ring, a: &Elem) -> Result<(), RingError> {
    if !ring.eis_is_integral(a) {
        return Err(RingError::Capability(
            "operation needs integral elements of Z[(1+sqrt(-3))/2]".into(),
        ));
    }
    Ok(())
}

/// Division with remainder in the norm-Euclidean ring: round the field
/// quotient to the hexagonal lattice (basis 1, (1+w)/2), with a small offset
/// search as insurance.
fn eis_divmod(ring: &Ring, a: &Elem, b: &Elem) -> Result<(Elem, Elem), RingError> {
    let q0 = ring.div(a, b)?;
    let (x, y) = ring.eis_xy(&q0);
    let v = &y * rat_i64(2);
    let u = &x - &y;
    let (u0, v0) = (u.round().to_integer(), v.round().to_integer());
    let mut best: Option<(BigRational, Elem, Elem)> = None;
    for du in -1i64..=1 {
        for dv in -1i64..=1 {
            let uu = BigRational::from_integer(&u0 + BigInt::from(du));
            let vv = BigRational::from_integer(&v0 + BigInt::from(dv));
            let half = BigRational::new(BigInt::from(1), BigInt::from(2));
            let q = eis_from_xy(&uu + &vv * &half, &vv * &half);
            let r = ring.sub(a, &ring.mul(&q, b));
            let n = ring.eis_norm(&r);
            if best.as_ref().is_none_or(|(bn, _, _)| n < *bn) {
                best = Some((n, q, r));
            }
        }
    }
    let (n, q, r) = best.unwrap();
    if n >= ring.eis_norm(b) {
        return Err(RingError::Capability(
            "Euclidean division failed to reduce the norm".into(),
        ));
    }
    Ok((q, r))
}

/// Fundamental-domain representative of the six-element associate orbit:
/// positive rationals first, then positive multiples of w, then the unique
/// associate in the open sector between them.
fn eis_canonical(ring: &Ring, a: &Elem) -> Result<UnitNormalForm, RingError> {
    if ring.is_zero(a) {
        return Err(RingError::ZeroInput);
    }
    eis_require_integral(ring, a)?;
    let omega = eis_from_xy(
        BigRational::new(BigInt::from(1), BigInt::from(2)),
        BigRational::new(BigInt::from(1), BigInt::from(2)),
    );
    let mut orbit = Vec::with_capacity(6);
    let mut cur = a.clone();
    for _ in 0..6 {
        orbit.push(cur.clone());
        cur = ring.mul(&cur, &omega);
    }
    let zero = BigRational::zero();
    let pick = orbit
        .iter()
        .find(|e| {
            let (x, y) = ring.eis_xy(e);
            y == zero && x > zero
        })
        .or_else(|| {
            orbit.iter().find(|e| {
                let (x, y) = ring.eis_xy(e);
                x == zero && y > zero
            })
        })
        .or_else(|| {
            orbit.iter().find(|e| {
                let (x, y) = ring.eis_xy(e);
                y > zero && x > y
            })
        })
        .ok_or_else(|| RingError::Capability("associate orbit has no sector representative".into()))?
        .clone();
    let unit = ring.div(a, &pick)?;
    Ok(UnitNormalForm { unit, normal: pick })
}

fn eis_gcd(ring: &Ring, a: &Elem, b: &Elem) -> Result<Elem, RingError> {
    eis_require_integral(ring, a)?;
    eis_require_integral(ring, b)?;
    let (mut x, mut y) = (a.clone(), b.clone());
    while !ring.is_zero(&y) {
        let (_, r) = eis_divmod(ring, &x, &y)?;
        x = y;
        y = r;
    }
    if ring.is_zero(&x) {
        return Ok(ring.zero());
    }
    Ok(eis_canonical(ring, &x)?.normal)
}

// ----- canonical associates -----

pub fn canonical_associate(ring: &Ring, a: &Elem) -> Result<UnitNormalForm, RingError> {
    if ring.is_zero(a) {
        return Err(RingError::ZeroInput);
    }
    if ring.is_eisenstein() {
        return eis_canonical(ring, a);
    }
    match ring {
        Ring::Rationals | Ring::PrimeField { .. } => Ok(UnitNormalForm {
            unit: a.clone(),
            normal: ring.one(),
        }),
        Ring::Extension { .. } if ring.is_field() => Ok(UnitNormalForm {
            unit: a.clone(),
            normal: ring.one(),
        }),
        Ring::Extension { .. } => Err(RingError::Capability(
            "no canonical associate over a ramified extension; split components first".into(),
        )),
        Ring::PAdic { p, .. } => {
            let v = padic_valuation(ring, a);
            let normal = ring.from_i64((p.pow(v)) as i64);
            let unit = ring.div(a, &normal)?;
            Ok(UnitNormalForm { unit, normal })
        }
        Ring::Series { base, .. } => {
            if base.is_field() {
                let v = ring.val(a).unwrap();
                let normal = if v == 0 {
                    ring.one()
                } else {
                    ring.pow(&ring.gen()?, v as i64)?
                };
                let unit = ring.shift_down(a, v)?;
                Ok(UnitNormalForm { unit, normal })
            } else {
                let zs = ZpSeries::new(rc_of(ring))?;
                let normal = zs.canonical(a)?;
                let unit = zs.div_exact(a, &normal)?;
                Ok(UnitNormalForm { unit, normal })
            }
        }
        Ring::Laurent { base, .. } => {
            let Elem::Lau(m) = a else { panic!("ring/element mismatch") };
            let lo = *m.keys().next().unwrap();
            let hi = *m.keys().next_back().unwrap();
            let top = m.get(&hi).unwrap();
            let top_nf = canonical_associate(base, top)?;
            let uinv = base.inv(&top_nf.unit)?;
            let normal = Elem::Lau(
                m.iter()
                    .map(|(k, c)| (k - lo, base.mul(c, &uinv)))
                    .collect(),
            );
            let unit = Elem::Lau([(lo, top_nf.unit)].into());
            Ok(UnitNormalForm { unit, normal })
        }
    }
}

/// The series ring wrapped back into an Rc for ZpSeries construction.
fn rc_of(ring: &Ring) -> RingRc {
    RingRc::new(ring.clone())
}

// ----- gcd dispatch -----

pub fn gcd(ring: &Ring, a: &Elem, b: &Elem) -> Result<Elem, RingError> {
    match (ring.is_zero(a), ring.is_zero(b)) {
        (true, true) => return Ok(ring.zero()),
        (true, false) => return Ok(canonical_associate(ring, b)?.normal),
        (false, true) => return Ok(canonical_associate(ring, a)?.normal),
        _ => {}
    }
    if ring.is_eisenstein() {
        return eis_gcd(ring, a, b);
    }
    match ring {
        Ring::Rationals | Ring::PrimeField { .. } => Ok(ring.one()),
        Ring::Extension { .. } if ring.is_field() => Ok(ring.one()),
        Ring::PAdic { p, .. } => {
            let v = padic_valuation(ring, a).min(padic_valuation(ring, b));
            Ok(ring.from_i64((p.pow(v)) as i64))
        }
        Ring::Series { base, .. } => {
            if base.is_field() {
                let v = ring.val(a).unwrap().min(ring.val(b).unwrap());
                if v == 0 {
                    Ok(ring.one())
                } else {
                    ring.pow(&ring.gen()?, v as i64)
                }
            } else {
                let zs = ZpSeries::new(rc_of(ring))?;
                zs.gcd_elems(a, b)
            }
        }
        Ring::Laurent { .. } => laurent_gcd_list(ring, &[a.clone(), b.clone()]),
        _ => Err(RingError::Capability(format!(
            "gcd is not implemented over {}",
            ring.descriptor_string()
        ))),
    }
}

pub fn gcd_list(ring: &Ring, xs: &[Elem]) -> Result<Elem, RingError> {
    // the Laurent pipeline gains a lot from seeing all inputs at once
    if matches!(ring, Ring::Laurent { .. }) {
        return laurent_gcd_list(ring, xs);
    }
    let mut g = ring.zero();
    for x in xs {
        if ring.is_zero(x) {
            continue;
        }
        g = gcd(ring, &g, x)?;
        if ring.eq_elem(&g, &ring.one()) {
            break;
        }
    }
    Ok(g)
}

/// Exact quotient a/d in the declared ring; errors when the division leaves
/// a remainder.
pub fn div_exact(ring: &Ring, a: &Elem, d: &Elem) -> Result<Elem, RingError> {
    if ring.is_zero(a) {
        return Ok(ring.zero());
    }
    if ring.is_eisenstein() {
        eis_require_integral(ring, d)?;
        eis_require_integral(ring, a)?;
        let (q, r) = eis_divmod(ring, a, d)?;
        if !ring.is_zero(&r) {
            return Err(RingError::InexactDivision(
                "remainder in Eisenstein division".into(),
            ));
        }
        return Ok(q);
    }
    match ring {
        Ring::Series { base, .. } if !base.is_field() => {
            let zs = ZpSeries::new(rc_of(ring))?;
            zs.div_exact(a, d)
        }
        Ring::Laurent { base, .. } => {
            let (dp, dlo) = lau_to_poly(ring, d);
            let (ap, alo) = lau_to_poly(ring, a);
            if !base.is_invertible(dp.last().ok_or(RingError::DivisionByZero)?) {
                return Err(RingError::Capability(
                    "Laurent division needs an invertible leading coefficient".into(),
                ));
            }
            let (ok, q) = poly_divides_monic_normalized(base, &dp, &ap)?;
            if !ok {
                return Err(RingError::InexactDivision(
                    "remainder in Laurent polynomial division".into(),
                ));
            }
            // the cofactor was computed against the monic-normalized divisor
            let lcinv = base.inv(dp.last().unwrap())?;
            let q: Vec<Elem> = q.iter().map(|c| base.mul(c, &lcinv)).collect();
            Ok(poly_to_lau(ring, &q, alo - dlo))
        }
        _ => ring.div(a, d),
    }
}

/// Does d divide a exactly in the declared ring?
pub fn divides(ring: &Ring, d: &Elem, a: &Elem) -> Result<bool, RingError> {
    if ring.is_zero(a) {
        return Ok(true);
    }
    if ring.is_zero(d) {
        return Ok(false);
    }
    if ring.is_eisenstein() {
        eis_require_integral(ring, d)?;
        eis_require_integral(ring, a)?;
        let (_, r) = eis_divmod(ring, a, d)?;
        return Ok(ring.is_zero(&r));
    }
    match ring {
        Ring::Rationals | Ring::PrimeField { .. } => Ok(true),
        Ring::Extension { .. } if ring.is_field() => Ok(true),
        Ring::PAdic { .. } => Ok(padic_valuation(ring, d) <= padic_valuation(ring, a)),
        Ring::Series { base, .. } => {
            if base.is_field() {
                Ok(ring.val(d).unwrap() <= ring.val(a).unwrap())
            } else {
                let zs = ZpSeries::new(rc_of(ring))?;
                Ok(zs.div_exact(a, d).is_ok())
            }
        }
        Ring::Laurent { base, .. } => {
            let (dp, _) = lau_to_poly(ring, d);
            let (ap, _) = lau_to_poly(ring, a);
            if !base.is_invertible(dp.last().unwrap()) {
                return Err(RingError::Capability(
                    "Laurent divisibility needs an invertible leading coefficient".into(),
                ));
            }
            let (ok, _) = poly_divides_monic_normalized(base, &dp, &ap)?;
            Ok(ok)
        }
        _ => Err(RingError::Capability(format!(
            "divisibility is not implemented over {}",
            ring.descriptor_string()
        ))),
    }
}

// ----- Laurent helpers -----

/// Laurent element -> (dense coefficient vector over the base, lowest first,
/// t^shift factored out).
pub fn lau_to_poly(ring: &Ring, a: &Elem) -> (Vec<Elem>, i64) {
    let Ring::Laurent { base, .. } = ring else { panic!("expected a Laurent ring") };
    let Elem::Lau(m) = a else { panic!("ring/element mismatch") };
    if m.is_empty() {
        return (Vec::new(), 0);
    }
    let lo = *m.keys().next().unwrap();
    let hi = *m.keys().next_back().unwrap();
    let out = (lo..=hi)
        .map(|k| m.get(&k).cloned().unwrap_or_else(|| base.zero()))
        .collect();
    (out, lo)
}

pub fn poly_to_lau(ring: &Ring, p: &[Elem], shift: i64) -> Elem {
    let Ring::Laurent { base, .. } = ring else { panic!("expected a Laurent ring") };
    Elem::Lau(
        p.iter()
            .enumerate()
            .filter(|(_, c)| !base.is_zero(c))
            .map(|(i, c)| (i as i64 + shift, c.clone()))
            .collect(),
    )
}

/// Residue field of the coefficient ring together with the coefficient
/// embedding back: Z_p[[s]] -> F_p (s -> 0, mod p) and K[[s]] -> K (s -> 0).
fn residue_field(base: &RingRc) -> Result<RingRc, RingError> {
    match &**base {
        Ring::Series { base: inner, .. } => match &**inner {
            Ring::PAdic { p, .. } => Ring::prime_field(*p),
            k if k.is_field() => Ok(inner.clone()),
            _ => Err(RingError::Capability(
                "no residue-field reduction for this series base".into(),
            )),
        },
        _ => Err(RingError::Capability(
            "Laurent gcd needs series coefficients (or a field base)".into(),
        )),
    }
}

fn embed_residue(base: &RingRc, k: &Ring, r: &Elem) -> Elem {
    let Ring::Series { base: inner, .. } = &**base else { unreachable!() };
    match (&**inner, r) {
        (Ring::PAdic { .. }, Elem::Mod(x)) => base.lift(Elem::Mod(*x)),
        _ => {
            let _ = k;
            base.lift(r.clone())
        }
    }
}

fn field_poly_divmod(k: &Ring, a: &[Elem], b: &[Elem]) -> Result<(Vec<Elem>, Vec<Elem>), RingError> {
    let lcinv = k.inv(b.last().unwrap())?;
    let bm: Vec<Elem> = b.iter().map(|c| k.mul(c, &lcinv)).collect();
    let (q, r) = poly_divmod_monic(k, a, &bm);
    let q = q.iter().map(|c| k.mul(c, &lcinv)).collect();
    Ok((q, r))
}

fn field_poly_gcd_monic(k: &Ring, a: &[Elem], b: &[Elem]) -> Result<Vec<Elem>, RingError> {
    let mut x: Vec<Elem> = a.to_vec();
    let mut y: Vec<Elem> = b.to_vec();
    while !y.is_empty() {
        let (_, r) = field_poly_divmod(k, &x, &y)?;
        x = y;
        y = r;
    }
    let lcinv = k.inv(x.last().ok_or(RingError::ZeroInput)?)?;
    Ok(x.iter().map(|c| k.mul(c, &lcinv)).collect())
}

fn base_div_exact(base: &RingRc, a: &Elem, d: &Elem) -> Result<Elem, RingError> {
    match &**base {
        Ring::Series { base: inner, .. } if !inner.is_field() => {
            let zs = ZpSeries::new(base.clone())?;
            zs.div_exact(a, d)
        }
        _ => base.div(a, d),
    }
}

/// gcd of Laurent polynomials over a field or series coefficient ring.
///
/// Contents (base-ring gcds of the coefficient vectors) are stripped and
/// combined separately; the primitive parts are handled by residue-field
/// Euclid plus a certified Newton lift. The result is canonical: t-shift 0,
/// monic primitive part, canonical content.
pub fn laurent_gcd_list(ring: &Ring, xs: &[Elem]) -> Result<Elem, RingError> {
    let Ring::Laurent { base, .. } = ring else {
        return Err(RingError::Capability("laurent_gcd_list needs a Laurent layer".into()));
    };
    let nonzero: Vec<&Elem> = xs.iter().filter(|x| !ring.is_zero(x)).collect();
    if nonzero.is_empty() {
        return Ok(ring.zero());
    }
    if nonzero.len() == 1 {
        return Ok(canonical_associate(ring, nonzero[0])?.normal);
    }

    let mut contents = Vec::new();
    let mut prims: Vec<Vec<Elem>> = Vec::new();
    for x in &nonzero {
        let (p, _) = lau_to_poly(ring, x);
        let c = gcd_list(base, &p)?;
        let prim: Result<Vec<Elem>, RingError> =
            p.iter().map(|co| base_div_exact(base, co, &c)).collect();
        contents.push(c);
        prims.push(prim?);
    }
    let content_gcd = gcd_list(base, &contents)?;

    let prim_gcd: Vec<Elem> = if base.is_field() {
        let mut g = prims[0].clone();
        for p in &prims[1..] {
            g = field_poly_gcd_monic(base, &g, p)?;
            if g.len() == 1 {
                break;
            }
        }
        g
    } else {
        lifted_prim_gcd(base, &prims)?
    };

    let out: Vec<Elem> = prim_gcd.iter().map(|c| base.mul(c, &content_gcd)).collect();
    Ok(canonical_associate(ring, &poly_to_lau(ring, &out, 0))?.normal)
}

/// The modular-lift gcd of primitive polynomials over a series base.
fn lifted_prim_gcd(base: &RingRc, prims: &[Vec<Elem>]) -> Result<Vec<Elem>, RingError> {
    let k = residue_field(base)?;
    let mut reductions: Vec<Vec<Elem>> = Vec::new();
    for p in prims {
        let mut red: Vec<Elem> = p
            .iter()
            .map(|c| base.reduce_mod(c, &k, &[]))
            .collect::<Result<_, _>>()?;
        while red.last().is_some_and(|c| k.is_zero(c)) {
            red.pop();
        }
        if red.is_empty() {
            return Err(RingError::Precision(
                "a primitive component vanishes mod the maximal ideal".into(),
            ));
        }
        reductions.push(red);
    }
    let mut g0 = reductions[0].clone();
    for r in &reductions[1..] {
        g0 = field_poly_gcd_monic(&k, &g0, r)?;
        if g0.len() == 1 {
            break;
        }
    }
    if g0.len() == 1 {
        return Ok(vec![base.one()]);
    }

    // pick a unit-leading-coefficient component whose residual cofactor is
    // coprime to the residual gcd; its monic form feeds the Newton lift
    let mut order: Vec<usize> = (0..prims.len()).collect();
    order.sort_by_key(|&i| prims[i].len());
    let mut chosen: Option<Vec<Elem>> = None;
    for &i in &order {
        let lc = prims[i].last().unwrap();
        if !base.is_invertible(lc) {
            continue;
        }
        let lcinv = base.inv(lc)?;
        let cand: Vec<Elem> = prims[i].iter().map(|c| base.mul(c, &lcinv)).collect();
        let (h0, _) = field_poly_divmod(&k, &reductions[i], &g0)?;
        let mut h0 = h0;
        while h0.last().is_some_and(|c| k.is_zero(c)) {
            h0.pop();
        }
        if field_poly_gcd_monic(&k, &g0, &h0)?.len() == 1 {
            chosen = Some(cand);
            break;
        }
    }
    let cand = chosen.ok_or_else(|| {
        RingError::Capability(
            "no unit-leading-coefficient component with residually coprime cofactor".into(),
        )
    })?;

    let seed: Vec<Elem> = g0.iter().map(|c| embed_residue(base, &k, c)).collect();
    let g = lift_monic_factor(base, &cand, &seed, 24)?;

    // certificates: g divides every primitive component exactly, and the
    // cofactors are jointly primitive (no content escaped the split)
    let mut any_unit_coeff = false;
    for p in prims {
        let (ok, cof) = poly_divides_monic_normalized(base, &g, p)?;
        if !ok {
            return Err(RingError::NewtonFailed(
                "lifted factor fails to divide a component exactly".into(),
            ));
        }
        if cof.iter().any(|c| base.is_invertible(c)) {
            any_unit_coeff = true;
        }
    }
    if !any_unit_coeff {
        return Err(RingError::NewtonFailed(
            "cofactors are not jointly primitive: the lifted gcd is too small".into(),
        ));
    }
    Ok(g)
}

// ----- elementary divisors (Smith form over Euclidean layers) -----

#[derive(Clone, Copy, PartialEq, Eq)]
enum EucClass {
    Field,
    SeriesField,
    Padic,
    Eisenstein,
    LaurentField,
}

fn classify(ring: &Ring) -> Result<EucClass, RingError> {
    if ring.is_eisenstein() {
        return Ok(EucClass::Eisenstein);
    }
    match ring {
        Ring::Rationals | Ring::PrimeField { .. } => Ok(EucClass::Field),
        Ring::Extension { .. } if ring.is_field() => Ok(EucClass::Field),
        Ring::PAdic { .. } => Ok(EucClass::Padic),
        Ring::Series { base, .. } if base.is_field() => Ok(EucClass::SeriesField),
        Ring::Laurent { base, .. } if base.is_field() => Ok(EucClass::LaurentField),
        _ => Err(RingError::Capability(format!(
            "{} is not a supported Euclidean layer",
            ring.descriptor_string()
        ))),
    }
}

fn euc_size(ring: &Ring, class: EucClass, a: &Elem) -> Option<BigInt> {
    if ring.is_zero(a) {
        return None;
    }
    Some(match class {
        EucClass::Field => BigInt::from(1),
        EucClass::SeriesField => BigInt::from(ring.val(a).unwrap() as u64),
        EucClass::Padic => BigInt::from(padic_valuation(ring, a)),
        EucClass::Eisenstein => {
            let n = ring.eis_norm(a);
            n.numer() / n.denom()
        }
        EucClass::LaurentField => {
            let Elem::Lau(m) = a else { panic!("ring/element mismatch") };
            let lo = m.keys().next().unwrap();
            let hi = m.keys().next_back().unwrap();
            BigInt::from(hi - lo)
        }
    })
}

fn euc_divmod(
    ring: &Ring,
    class: EucClass,
    a: &Elem,
    b: &Elem,
) -> Result<(Elem, Elem), RingError> {
    match class {
        EucClass::Field => Ok((ring.div(a, b)?, ring.zero())),
        EucClass::SeriesField => {
            if ring.is_zero(a) || ring.val(a).unwrap() < ring.val(b).unwrap() {
                Ok((ring.zero(), a.clone()))
            } else {
                Ok((ring.div(a, b)?, ring.zero()))
            }
        }
        EucClass::Padic => {
            if ring.is_zero(a) || padic_valuation(ring, a) < padic_valuation(ring, b) {
                Ok((ring.zero(), a.clone()))
            } else {
                Ok((ring.div(a, b)?, ring.zero()))
            }
        }
        EucClass::Eisenstein => eis_divmod(ring, a, b),
        EucClass::LaurentField => {
            let Ring::Laurent { base, .. } = ring else { unreachable!() };
            let (ap, alo) = lau_to_poly(ring, a);
            let (bp, blo) = lau_to_poly(ring, b);
            if ap.len() < bp.len() {
                return Ok((ring.zero(), a.clone()));
            }
            let (q, _) = field_poly_divmod(base, &ap, &bp)?;
            let qe = poly_to_lau(ring, &q, alo - blo);
            let r = ring.sub(a, &ring.mul(&qe, b));
            Ok((qe, r))
        }
    }
}

/// Diagonal of the Smith-type normal form over a Euclidean layer: canonical
/// associates, each dividing the next, zeros last.
pub fn smith_divisors(ring: &Ring, m: &[Vec<Elem>]) -> Result<Vec<Elem>, RingError> {
    let class = classify(ring)?;
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let n = rows.min(cols);
    let mut a: Vec<Vec<Elem>> = m.to_vec();
    let mut divisors = Vec::with_capacity(n);
    'outer: for k in 0..n {
        loop {
            // smallest nonzero entry of the trailing block to the pivot slot
            let mut best: Option<(BigInt, usize, usize)> = None;
            for i in k..rows {
                for j in k..cols {
                    if let Some(sz) = euc_size(ring, class, &a[i][j]) {
                        if best.as_ref().is_none_or(|(b, _, _)| sz < *b) {
                            best = Some((sz, i, j));
                        }
                    }
                }
            }
            let Some((_, pi, pj)) = best else {
                for _ in k..n {
                    divisors.push(ring.zero());
                }
                break 'outer;
            };
            a.swap(k, pi);
            for row in a.iter_mut() {
                row.swap(k, pj);
            }
            let mut dirty = false;
            for i in k + 1..rows {
                if ring.is_zero(&a[i][k]) {
                    continue;
                }
                let (q, _) = euc_divmod(ring, class, &a[i][k], &a[k][k])?;
                for j in k..cols {
                    let sub = ring.mul(&q, &a[k][j]);
                    a[i][j] = ring.sub(&a[i][j], &sub);
                }
                if !ring.is_zero(&a[i][k]) {
                    dirty = true;
                }
            }
            for j in k + 1..cols {
                if ring.is_zero(&a[k][j]) {
                    continue;
                }
                let (q, _) = euc_divmod(ring, class, &a[k][j], &a[k][k])?;
                for i in k..rows {
                    let sub = ring.mul(&q, &a[i][k]);
                    a[i][j] = ring.sub(&a[i][j], &sub);
                }
                if !ring.is_zero(&a[k][j]) {
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // pivot must divide the rest of the block; if not, fold the
            // offending row in and keep reducing
            let mut offender = None;
            'scan: for i in k + 1..rows {
                for j in k + 1..cols {
                    let (_, r) = euc_divmod(ring, class, &a[i][j], &a[k][k])?;
                    if !ring.is_zero(&r) {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => {
                    for j in k..cols {
                        let add = a[i][j].clone();
                        a[k][j] = ring.add(&a[k][j], &add);
                    }
                }
                None => break,
            }
        }
        divisors.push(canonical_associate(ring, &a[k][k])?.normal);
    }
    Ok(divisors)
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
    fn eisenstein_gcd_of_w_and_three() {
        let e = qw();
        let w = e.gen().unwrap();
        let g = gcd(&e, &w, &e.from_i64(3)).unwrap();
        assert!(e.eq_elem(&g, &w));
        // coprime pair
        let g2 = gcd(&e, &e.from_i64(2), &w).unwrap();
        assert!(e.eq_elem(&g2, &e.one()));
    }

    #[test]
    fn eisenstein_canonical_round_trip() {
        let e = qw();
        let w = e.gen().unwrap();
        let om = e.div(&e.add(&e.one(), &w), &e.from_i64(2)).unwrap();
        for a in [w.clone(), e.from_i64(-3), e.mul(&om, &e.from_i64(5)), e.add(&e.from_i64(2), &w)] {
            let nf = canonical_associate(&e, &a).unwrap();
            assert!(e.is_unit(&nf.unit));
            assert!(e.eq_elem(&e.mul(&nf.unit, &nf.normal), &a));
        }
        // sqrt(-3) is its own canonical form
        assert!(e.eq_elem(&canonical_associate(&e, &w).unwrap().normal, &w));
        let m3 = canonical_associate(&e, &e.from_i64(-3)).unwrap();
        assert!(e.eq_elem(&m3.normal, &e.from_i64(3)));
    }

    #[test]
    fn series_gcd_by_valuation() {
        let w = qw();
        let a8 = Ring::series(w.clone(), 8, "s").unwrap();
        let s = a8.gen().unwrap();
        let s2 = a8.mul(&s, &s);
        let ws = a8.mul(&a8.lift(w.gen().unwrap()), &s);
        let g = gcd(&a8, &s2, &ws).unwrap();
        assert!(a8.eq_elem(&g, &s));
    }

    #[test]
    fn smith_diag_over_field() {
        let q = Ring::rationals();
        let m = vec![
            vec![q.from_i64(2), q.from_i64(0)],
            vec![q.from_i64(0), q.from_i64(4)],
        ];
        assert_eq!(smith_divisors(&q, &m).unwrap(), vec![q.one(), q.one()]);
    }

    #[test]
    fn smith_over_series() {
        let w = qw();
        let a8 = Ring::series(w, 8, "s").unwrap();
        let s = a8.gen().unwrap();
        let s3 = a8.pow(&s, 3).unwrap();
        let two_s = a8.mul(&a8.from_i64(2), &s);
        // [[2s, s^3], [s^3, 0]]: divisors (s, s^5) up to units
        let m = vec![vec![two_s, s3.clone()], vec![s3, a8.zero()]];
        let d = smith_divisors(&a8, &m).unwrap();
        assert!(a8.eq_elem(&d[0], &s));
        assert!(a8.eq_elem(&d[1], &a8.pow(&s, 5).unwrap()));
    }

    #[test]
    fn smith_over_eisenstein_chain() {
        let e = qw();
        let w = e.gen().unwrap();
        let m = vec![
            vec![e.from_i64(2), w.clone()],
            vec![e.from_i64(3), e.from_i64(6)],
        ];
        let d = smith_divisors(&e, &m).unwrap();
        assert_eq!(d.len(), 2);
        // chain condition and determinant product
        assert!(divides(&e, &d[0], &d[1]).unwrap());
        let det = e.sub(&e.from_i64(12), &e.mul(&w, &e.from_i64(3)));
        let prod = e.mul(&d[0], &d[1]);
        let nf_det = canonical_associate(&e, &det).unwrap().normal;
        let nf_prod = canonical_associate(&e, &prod).unwrap().normal;
        assert!(e.eq_elem(&nf_det, &nf_prod));
    }

    #[test]
    fn laurent_gcd_over_series_base() {
        let q = Ring::rationals();
        let a8 = Ring::series(q, 8, "s").unwrap();
        let lr = Ring::laurent(a8.clone(), "t").unwrap();
        let t = lr.gen().unwrap();
        let s_l = lr.lift(a8.gen().unwrap());
        let one = lr.one();
        let tm1 = lr.sub(&t, &one);
        // u = t + 1 + s, v = t - 2 + s: coprime
        let u = lr.add(&lr.add(&t, &one), &s_l);
        let v = lr.add(&lr.sub(&t, &lr.from_i64(2)), &s_l);
        let g = laurent_gcd_list(&lr, &[lr.mul(&tm1, &u), lr.mul(&tm1, &v)]).unwrap();
        assert!(lr.eq_elem(&g, &tm1));
    }

    #[test]
    fn laurent_gcd_detects_content() {
        let q = Ring::rationals();
        let a8 = Ring::series(q, 8, "s").unwrap();
        let lr = Ring::laurent(a8.clone(), "t").unwrap();
        let t = lr.gen().unwrap();
        let s_l = lr.lift(a8.gen().unwrap());
        let one = lr.one();
        let tm1 = lr.sub(&t, &one);
        let u = lr.add(&t, &one);
        let v = lr.sub(&t, &lr.from_i64(2));
        let a = lr.mul(&s_l, &lr.mul(&tm1, &u));
        let b = lr.mul(&s_l, &lr.mul(&tm1, &v));
        let g = laurent_gcd_list(&lr, &[a, b]).unwrap();
        assert!(lr.eq_elem(&g, &lr.mul(&s_l, &tm1)));
    }

    #[test]
    fn laurent_canonical_shifts_and_normalizes() {
        let q = Ring::rationals();
        let lr = Ring::laurent(q.clone(), "t").unwrap();
        let t = lr.gen().unwrap();
        let tinv = lr.inv(&t).unwrap();
        let a = lr.mul(&tinv, &lr.sub(&t, &lr.one())); // t^{-1}(t-1)
        let nf = canonical_associate(&lr, &a).unwrap();
        assert!(lr.eq_elem(&nf.normal, &lr.sub(&t, &lr.one())));
        assert!(lr.eq_elem(&lr.mul(&nf.unit, &nf.normal), &a));
    }

    #[test]
    fn gcd_zero_gives_canonical() {
        let z53 = Ring::padic(53, 8).unwrap();
        let a = z53.mul(&z53.from_i64(53 * 53), &z53.from_i64(7));
        let g = gcd(&z53, &a, &z53.zero()).unwrap();
        assert!(z53.eq_elem(&g, &z53.from_i64(53 * 53)));
    }
}
