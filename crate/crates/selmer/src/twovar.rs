//! The two-variable pipeline: the abelianization-twisted boundary
//! partial2[t^{+-1}], the order polynomial Phi(s, t) as the gcd of its
//! maximal minors, and the check that Phi(s,t)/(t-1) at t = 1 recovers the
//! one-variable longitude generator L_lambda.

use itertools::Itertools;

use crate::error::{RingError, SelmerError};
use crate::euclid::{
    canonical_associate, divides, div_exact, lau_to_poly, laurent_gcd_list, poly_to_lau,
};
use crate::factor::{poly_divmod_monic, poly_eval};
use crate::mat::{det_submatrix, mat_zero, Mat};
use crate::rep::Representation;
use crate::ring::{Elem, Ring, RingRc};
use crate::selmer::{build_partial2, IdealGenerator};
use crate::words::fox_derivative;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConjectureVerdict {
    Holds,
    Fails(String),
    Undecided(String),
    NotChecked,
}

impl std::fmt::Display for ConjectureVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ConjectureVerdict::Holds => write!(f, "holds"),
            ConjectureVerdict::Fails(w) => write!(f, "fails ({w})"),
            ConjectureVerdict::Undecided(w) => write!(f, "undecided ({w})"),
            ConjectureVerdict::NotChecked => write!(f, "not checked"),
        }
    }
}

#[derive(Clone)]
pub struct TwoVarReport {
    pub phi: IdealGenerator,
    pub fitting: Vec<(usize, IdealGenerator)>,
    pub conjecture: ConjectureVerdict,
    pub l_lambda_input: Option<Elem>,
    pub torsion: bool,
    pub diagnostics: Vec<String>,
}

/// partial2 with every word w twisted by t^deg(w): block (i,j) =
/// sum_w coeff(w) t^{alpha(w)} R(w) over the Laurent layer.
pub fn build_partial2_t(rep: &Representation, laurent: &RingRc) -> Mat {
    let n = rep.presentation.generator_count;
    let relators = rep.presentation.relators.clone();
    let mut out = mat_zero(laurent, 3 * relators.len(), 3 * n);
    for (ri, r) in relators.iter().enumerate() {
        for j in 0..n {
            let block = rep.right_action_twisted(laurent, &fox_derivative(r, j + 1));
            for a in 0..3 {
                for b in 0..3 {
                    out[3 * ri + a][3 * j + b] = block[a][b].clone();
                }
            }
        }
    }
    out
}

/// Substitute t = 1 entry-wise (sum of Laurent coefficients).
pub fn specialize_t1(laurent: &Ring, m: &Mat) -> Mat {
    let Ring::Laurent { base, .. } = laurent else { panic!("expected a Laurent ring") };
    m.iter()
        .map(|row| {
            row.iter()
                .map(|e| {
                    let Elem::Lau(terms) = e else { panic!("ring/element mismatch") };
                    let mut acc = base.zero();
                    for c in terms.values() {
                        acc = base.add(&acc, c);
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// Is the Laurent base a ramified quadratic extension c^2 = Delta over a
/// series ring? Returns (series ring A, Delta, Laurent(A) ring).
fn split_setup(laurent: &Ring) -> Result<Option<(RingRc, Elem, RingRc)>, RingError> {
    let Ring::Laurent { base, var } = laurent else {
        return Err(RingError::Capability("expected a Laurent layer".into()));
    };
    let Ring::Extension { base: inner, minpoly, .. } = &**base else {
        return Ok(None);
    };
    if inner.is_field() || minpoly.len() != 2 {
        return Ok(None);
    }
    let delta = inner.neg(&minpoly[0]);
    let la = Ring::laurent(inner.clone(), var)?;
    Ok(Some((inner.clone(), delta, la)))
}

/// Split a Laurent element over the c-extension into its two components as
/// Laurent elements over the series base.
fn split_laurent(laurent_e: &Ring, la: &Ring, e: &Elem) -> (Elem, Elem) {
    let Ring::Laurent { base, .. } = laurent_e else { panic!("expected Laurent") };
    let Ring::Extension { base: inner, .. } = &**base else { panic!("expected extension base") };
    let Elem::Lau(terms) = e else { panic!("ring/element mismatch") };
    let mut m0 = std::collections::BTreeMap::new();
    let mut m1 = std::collections::BTreeMap::new();
    for (k, c) in terms {
        let Elem::Pol(v) = c else { panic!("extension element expected") };
        if let Some(c0) = v.first() {
            if !inner.is_zero(c0) {
                m0.insert(*k, c0.clone());
            }
        }
        if let Some(c1) = v.get(1) {
            if !inner.is_zero(c1) {
                m1.insert(*k, c1.clone());
            }
        }
    }
    let _ = la;
    (Elem::Lau(m0), Elem::Lau(m1))
}

/// Embed a Laurent element over the series base back into the Laurent ring
/// over the c-extension, optionally multiplied by c.
fn embed_laurent(laurent_e: &Ring, g: &Elem, times_c: bool) -> Elem {
    let Ring::Laurent { base, .. } = laurent_e else { panic!("expected Laurent") };
    let Ring::Extension { base: inner, .. } = &**base else { panic!("expected extension base") };
    let Elem::Lau(terms) = g else { panic!("ring/element mismatch") };
    Elem::Lau(
        terms
            .iter()
            .map(|(k, c)| {
                let coeff = if times_c {
                    Elem::Pol(vec![inner.zero(), c.clone()])
                } else {
                    Elem::Pol(vec![c.clone(), inner.zero()])
                };
                (*k, coeff)
            })
            .collect(),
    )
}

/// gcd of the k x k minors of the twisted boundary, canonicalized by t-shift
/// and leading-coefficient normalization. Ramified quadratic layers are
/// handled by splitting each minor into its two series components (with a
/// parity check for a common factor of c itself).
pub fn phi_polynomial(
    laurent: &RingRc,
    m: &Mat,
    k: usize,
) -> Result<(IdealGenerator, Vec<String>), SelmerError> {
    let mut diagnostics = Vec::new();
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    if k == 0 {
        return Ok((IdealGenerator::Generator(laurent.one()), diagnostics));
    }
    if k > rows || k > cols {
        return Ok((IdealGenerator::Generator(laurent.zero()), diagnostics));
    }
    let mut minors: Vec<Elem> = Vec::new();
    for rs in (0..rows).combinations(k) {
        for cs in (0..cols).combinations(k) {
            let d = det_submatrix(laurent, m, &rs, &cs);
            if !laurent.is_zero(&d) {
                minors.push(d);
            }
        }
    }
    if minors.is_empty() {
        diagnostics.push("all maximal minors vanish: degenerate twisted module".into());
        return Ok((IdealGenerator::Generator(laurent.zero()), diagnostics));
    }

    match split_setup(laurent).map_err(SelmerError::Ring)? {
        None => match laurent_gcd_list(laurent, &minors) {
            Ok(g) => Ok((IdealGenerator::Generator(g), diagnostics)),
            Err(RingError::Capability(msg)) | Err(RingError::NewtonFailed(msg)) => {
                diagnostics.push(format!("no certified gcd over the Laurent layer: {msg}"));
                Ok((IdealGenerator::MinorList(minors), diagnostics))
            }
            Err(e) => Err(SelmerError::Ring(e)),
        },
        Some((a, delta, la)) => {
            // parity: does c divide every minor? (c | m iff Delta | m0)
            let mut parity = true;
            let split: Vec<(Elem, Elem)> = minors
                .iter()
                .map(|d| split_laurent(laurent, &la, d))
                .collect();
            'outer: for (m0, _) in &split {
                let (p0, _) = lau_to_poly(&la, m0);
                for co in &p0 {
                    if !divides(&a, &delta, co).map_err(SelmerError::Ring)? {
                        parity = false;
                        break 'outer;
                    }
                }
            }
            let mut comps: Vec<Elem> = Vec::new();
            for (m0, m1) in &split {
                if parity {
                    comps.push(m1.clone());
                    let (p0, sh) = lau_to_poly(&la, m0);
                    let reduced: Result<Vec<Elem>, RingError> =
                        p0.iter().map(|co| div_exact(&a, co, &delta)).collect();
                    comps.push(poly_to_lau(&la, &reduced.map_err(SelmerError::Ring)?, sh));
                } else {
                    comps.push(m0.clone());
                    comps.push(m1.clone());
                }
            }
            let comps: Vec<Elem> = comps.into_iter().filter(|c| !la.is_zero(c)).collect();
            if parity {
                diagnostics.push(
                    "every maximal minor is divisible by the ramified generator c; one factor of c was extracted"
                        .into(),
                );
            }
            match laurent_gcd_list(&la, &comps) {
                Ok(g) => Ok((
                    IdealGenerator::Generator(embed_laurent(laurent, &g, parity)),
                    diagnostics,
                )),
                Err(RingError::Capability(msg)) | Err(RingError::NewtonFailed(msg)) => {
                    diagnostics.push(format!(
                        "no certified gcd of the split components: {msg}"
                    ));
                    Ok((IdealGenerator::MinorList(minors), diagnostics))
                }
                Err(e) => Err(SelmerError::Ring(e)),
            }
        }
    }
}

/// For comparison purposes Phi and L_lambda must land in the series base;
/// over a ramified extension that means a vanishing c-component.
fn pure_component(ring: &Ring, e: &Elem) -> Result<Option<Elem>, RingError> {
    match ring {
        Ring::Extension { base, .. } if !ring.is_field() => {
            let Elem::Pol(v) = e else { panic!("ring/element mismatch") };
            let c1_zero = v.get(1).map(|c| base.is_zero(c)).unwrap_or(true);
            if c1_zero {
                Ok(Some(v.first().cloned().unwrap_or_else(|| base.zero())))
            } else {
                Ok(None)
            }
        }
        _ => Ok(Some(e.clone())),
    }
}

/// Conjecture check: (t - 1) must divide Phi exactly, and the cofactor at
/// t = 1 must be an associate of L_lambda.
pub fn conjecture_5_5_check(
    laurent: &Ring,
    phi: &Elem,
    l_lambda: &Elem,
) -> Result<ConjectureVerdict, SelmerError> {
    let Ring::Laurent { base, .. } = laurent else {
        return Err(SelmerError::Ring(RingError::Capability(
            "conjecture check needs a Laurent layer".into(),
        )));
    };
    if laurent.is_zero(phi) {
        return Ok(ConjectureVerdict::Fails("Phi = 0".into()));
    }
    let (p, _) = lau_to_poly(laurent, phi);
    let tm1 = vec![base.neg(&base.one()), base.one()];
    let (q, r) = poly_divmod_monic(base, &p, &tm1);
    if !r.is_empty() {
        return Ok(ConjectureVerdict::Fails(
            "t - 1 does not divide Phi exactly".into(),
        ));
    }
    let q1 = poly_eval(base, &q, &base.one());

    // land both sides in a ring with canonical associates
    let (lhs, rhs, cmp_ring): (Elem, Elem, RingRc) = match (
        pure_component(base, &q1).map_err(SelmerError::Ring)?,
        pure_component(base, l_lambda).map_err(SelmerError::Ring)?,
    ) {
        (Some(a), Some(b)) => {
            let inner = match &**base {
                Ring::Extension { base: inner, .. } if !base.is_field() => inner.clone(),
                _ => base.clone(),
            };
            (a, b, inner)
        }
        _ => {
            return Ok(ConjectureVerdict::Undecided(
                "mixed ramified components cannot be canonicalized".into(),
            ))
        }
    };
    match (cmp_ring.is_zero(&lhs), cmp_ring.is_zero(&rhs)) {
        (true, true) => return Ok(ConjectureVerdict::Holds),
        (true, false) | (false, true) => {
            return Ok(ConjectureVerdict::Fails(
                "one side vanishes and the other does not".into(),
            ))
        }
        _ => {}
    }
    let ca = canonical_associate(&cmp_ring, &lhs);
    let cb = canonical_associate(&cmp_ring, &rhs);
    match (ca, cb) {
        (Ok(a), Ok(b)) => {
            if cmp_ring.eq_elem(&a.normal, &b.normal) {
                Ok(ConjectureVerdict::Holds)
            } else {
                Ok(ConjectureVerdict::Fails(format!(
                    "Phi/(t-1) at t=1 is {} but L_lambda is {}",
                    cmp_ring.repr(&a.normal),
                    cmp_ring.repr(&b.normal)
                )))
            }
        }
        (Err(RingError::Precision(msg)), _) | (_, Err(RingError::Precision(msg))) => {
            Ok(ConjectureVerdict::Undecided(format!("precision: {msg}")))
        }
        (Err(e), _) | (_, Err(e)) => Err(SelmerError::Ring(e)),
    }
}

/// Full two-variable pipeline; `l_lambda` (from the one-variable longitude
/// run) enables the conjecture check.
pub fn two_var_selmer(
    rep: &Representation,
    l_lambda: Option<Elem>,
) -> Result<TwoVarReport, SelmerError> {
    let laurent = Ring::laurent(rep.ring.clone(), "t").map_err(SelmerError::Ring)?;
    let n = rep.presentation.generator_count;
    let m = build_partial2_t(rep, &laurent);
    let mut diagnostics = Vec::new();

    // t = 1 must collapse to the untwisted boundary
    let spec = specialize_t1(&laurent, &m);
    let plain = build_partial2(rep);
    let same = spec.iter().zip(&plain).all(|(ra, rb)| {
        ra.iter()
            .zip(rb)
            .all(|(x, y)| rep.ring.eq_elem(x, y))
    });
    if !same {
        diagnostics.push("specialization t=1 does not reproduce partial2".into());
    }

    // the twisted I_gamma line has no torsion: det(t I - Ad(rho(g1))) is
    // monic in t, hence a nonzerodivisor
    let ad = rep.right_action(&rep.presentation.meridian.clone());
    let tgen = laurent.gen().map_err(SelmerError::Ring)?;
    let mut ti_minus_ad = mat_zero(&laurent, 3, 3);
    for i in 0..3 {
        for j in 0..3 {
            let lifted = laurent.lift(ad[i][j].clone());
            ti_minus_ad[i][j] = if i == j {
                laurent.sub(&tgen, &lifted)
            } else {
                laurent.neg(&lifted)
            };
        }
    }
    let chi = det_submatrix(&laurent, &ti_minus_ad, &[0, 1, 2], &[0, 1, 2]);
    let (chi_poly, _) = lau_to_poly(&laurent, &chi);
    if chi_poly
        .last()
        .map(|c| rep.ring.is_invertible(c))
        .unwrap_or(false)
    {
        diagnostics.push(
            "det(t I - Ad(rho(g1))) has unit leading coefficient: H_1 of the twisted I_gamma line vanishes"
                .into(),
        );
    }
    let rho_g1 = rep.evaluate_word(&rep.presentation.meridian.clone());
    let mut trho_minus_i = mat_zero(&laurent, 2, 2);
    for i in 0..2 {
        for j in 0..2 {
            let lifted = laurent.lift(rho_g1[i][j].clone());
            let term = laurent.mul(&tgen, &lifted);
            trho_minus_i[i][j] = if i == j {
                laurent.sub(&term, &laurent.one())
            } else {
                term
            };
        }
    }
    let det_note = det_submatrix(&laurent, &trho_minus_i, &[0, 1], &[0, 1]);
    if !laurent.is_zero(&det_note) {
        diagnostics.push("det(t rho(g1) - I) != 0: twisting nondegeneracy condition met".into());
    }

    let (phi, mut phi_diags) = phi_polynomial(&laurent, &m, 3 * (n - 1))?;
    diagnostics.append(&mut phi_diags);

    let mut fitting = Vec::new();
    for d in 0..=(3 * (n - 1)) {
        if d == 0 {
            fitting.push((0, phi.clone()));
            continue;
        }
        let (g, mut extra) = phi_polynomial(&laurent, &m, 3 * (n - 1) - d)?;
        diagnostics.append(&mut extra);
        fitting.push((d, g));
    }

    let torsion = match &phi {
        IdealGenerator::Generator(g) => !laurent.is_zero(g),
        IdealGenerator::MinorList(l) => l.iter().any(|e| !laurent.is_zero(e)),
    };

    let conjecture = match (&phi, &l_lambda) {
        (IdealGenerator::Generator(g), Some(l)) => conjecture_5_5_check(&laurent, g, l)?,
        (IdealGenerator::MinorList(_), Some(_)) => {
            ConjectureVerdict::Undecided("Phi is only available as a minor list".into())
        }
        (_, None) => ConjectureVerdict::NotChecked,
    };

    Ok(TwoVarReport {
        phi,
        fitting,
        conjecture,
        l_lambda_input: l_lambda,
        torsion,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rep::rep_from_assignment;
    use crate::words::{fig8_relator, Presentation};

    /// Figure-eight holonomy over Q(w)/(w^2+3): a cheap exact two-variable
    /// smoke test (constants, no series layer).
    fn holonomy() -> Representation {
        let q = Ring::rationals();
        let e = Ring::extension(q.clone(), vec![q.from_i64(3), q.from_i64(0), q.from_i64(1)], "w")
            .unwrap();
        let w = e.gen().unwrap();
        let half = e.inv(&e.from_i64(2)).unwrap();
        let omega = e.mul(&e.add(&e.from_i64(1), &w), &half);
        let p = Presentation::new(2, vec![fig8_relator()]);
        let m1 = vec![vec![e.one(), e.one()], vec![e.zero(), e.one()]];
        let m2 = vec![vec![e.one(), e.zero()], vec![omega.clone(), e.one()]];
        match rep_from_assignment(p.clone(), e.clone(), vec![m1, m2]) {
            Ok(r) => r,
            Err(_) => {
                let omega2 = e.sub(&e.one(), &omega);
                let m1 = vec![vec![e.one(), e.one()], vec![e.zero(), e.one()]];
                let m2 = vec![vec![e.one(), e.zero()], vec![omega2, e.one()]];
                rep_from_assignment(p, e, vec![m1, m2]).expect("holonomy lift")
            }
        }
    }

    #[test]
    fn t1_specialization_matches_partial2() {
        let rep = holonomy();
        let lr = Ring::laurent(rep.ring.clone(), "t").unwrap();
        let m = build_partial2_t(&rep, &lr);
        let spec = specialize_t1(&lr, &m);
        let plain = build_partial2(&rep);
        for (ra, rb) in spec.iter().zip(&plain) {
            for (x, y) in ra.iter().zip(rb) {
                assert!(rep.ring.eq_elem(x, y));
            }
        }
    }

    #[test]
    fn twisted_boundary_has_laurent_entries() {
        let rep = holonomy();
        let lr = Ring::laurent(rep.ring.clone(), "t").unwrap();
        let m = build_partial2_t(&rep, &lr);
        assert_eq!(m.len(), 3);
        assert_eq!(m[0].len(), 6);
        let any_t = m.iter().flatten().any(|e| {
            let Elem::Lau(terms) = e else { return false };
            terms.keys().any(|&k| k != 0)
        });
        assert!(any_t, "twisting must introduce nontrivial t powers");
    }

    #[test]
    fn conjecture_rejects_unit_cofactor() {
        let q = Ring::rationals();
        let a8 = Ring::series(q, 8, "s").unwrap();
        let lr = Ring::laurent(a8.clone(), "t").unwrap();
        let t = lr.gen().unwrap();
        let phi = lr.sub(&t, &lr.one());
        let s = a8.gen().unwrap();
        let verdict = conjecture_5_5_check(&lr, &phi, &s).unwrap();
        assert!(matches!(verdict, ConjectureVerdict::Fails(_)));
        let verdict2 = conjecture_5_5_check(&lr, &phi, &a8.from_i64(7)).unwrap();
        assert_eq!(verdict2, ConjectureVerdict::Holds);
    }

    #[test]
    fn conjecture_requires_t_minus_one_factor() {
        let q = Ring::rationals();
        let a8 = Ring::series(q, 8, "s").unwrap();
        let lr = Ring::laurent(a8.clone(), "t").unwrap();
        let t = lr.gen().unwrap();
        let phi = lr.add(&t, &lr.one());
        let verdict = conjecture_5_5_check(&lr, &phi, &a8.one()).unwrap();
        assert!(matches!(verdict, ConjectureVerdict::Fails(_)));
    }
}
