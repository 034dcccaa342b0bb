//! Polynomial factor extraction over a coefficient ring: monic division,
//! Gaussian elimination restricted to unit pivots, and Newton lifting of a
//! residual factorization (Hensel's lemma in the division-remainder form).
//!
//! Polynomials are coefficient vectors, lowest degree first. Everything here
//! uses only ring additions/multiplications plus inversion of invertible
//! elements, so results are exact at the working truncation.

use crate::error::RingError;
use crate::ring::{Elem, Ring};

/// Quotient and remainder of a by monic b in R[t].
pub fn poly_divmod_monic(ring: &Ring, a: &[Elem], b: &[Elem]) -> (Vec<Elem>, Vec<Elem>) {
    debug_assert!(ring.eq_elem(b.last().unwrap(), &ring.one()), "divisor must be monic");
    let mut r: Vec<Elem> = a.to_vec();
    while r.last().is_some_and(|c| ring.is_zero(c)) {
        r.pop();
    }
    let mut q = vec![ring.zero(); (r.len() + 1).saturating_sub(b.len())];
    while r.len() >= b.len() {
        let lead = r.last().unwrap().clone();
        let off = r.len() - b.len();
        q[off] = lead.clone();
        for (i, bc) in b.iter().enumerate() {
            r[off + i] = ring.sub(&r[off + i], &ring.mul(&lead, bc));
        }
        r.pop();
        while r.last().is_some_and(|c| ring.is_zero(c)) {
            r.pop();
        }
    }
    (q, r)
}

/// Evaluate a polynomial (lowest degree first) at a point.
pub fn poly_eval(ring: &Ring, poly: &[Elem], x: &Elem) -> Elem {
    let mut acc = ring.zero();
    for c in poly.iter().rev() {
        acc = ring.add(&ring.mul(&acc, x), c);
    }
    acc
}

pub fn poly_mul(ring: &Ring, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![ring.zero(); a.len() + b.len() - 1];
    for (i, ac) in a.iter().enumerate() {
        if ring.is_zero(ac) {
            continue;
        }
        for (j, bc) in b.iter().enumerate() {
            out[i + j] = ring.add(&out[i + j], &ring.mul(ac, bc));
        }
    }
    out
}

pub fn poly_sub(ring: &Ring, a: &[Elem], b: &[Elem]) -> Vec<Elem> {
    let mut out = vec![ring.zero(); a.len().max(b.len())];
    for (i, slot) in out.iter_mut().enumerate() {
        let x = a.get(i).cloned().unwrap_or_else(|| ring.zero());
        let y = b.get(i).cloned().unwrap_or_else(|| ring.zero());
        *slot = ring.sub(&x, &y);
    }
    while out.last().is_some_and(|c| ring.is_zero(c)) {
        out.pop();
    }
    out
}

/// Solve M x = rhs by Gaussian elimination that only ever pivots on
/// invertible entries; None when no such pivot exists at some column (the
/// lift step is then not certifiable at this precision).
pub fn solve_unit_pivot(
    ring: &Ring,
    m: &[Vec<Elem>],
    rhs: &[Elem],
) -> Result<Option<Vec<Elem>>, RingError> {
    let d = m.len();
    let mut a: Vec<Vec<Elem>> = m
        .iter()
        .zip(rhs)
        .map(|(row, r)| row.iter().cloned().chain([r.clone()]).collect())
        .collect();
    for col in 0..d {
        let piv = (col..d).find(|&r| ring.is_invertible(&a[r][col]));
        let Some(piv) = piv else { return Ok(None) };
        a.swap(col, piv);
        let inv = ring.inv(&a[col][col])?;
        for e in a[col].iter_mut() {
            *e = ring.mul(&inv, e);
        }
        for r in 0..d {
            if r == col || ring.is_zero(&a[r][col]) {
                continue;
            }
            let f = a[r][col].clone();
            for c in 0..=d {
                let sub = ring.mul(&f, &a[col][c]);
                a[r][c] = ring.sub(&a[r][c], &sub);
            }
        }
    }
    Ok(Some(a.into_iter().map(|row| row[row.len() - 1].clone()).collect()))
}

/// Newton lift of a monic factor: starting from a seed whose residual
/// cofactor is coprime to it, converge to a monic g with g | f exactly.
/// The linear system solved each step is the division-remainder form of
/// Hensel's lemma; its matrix is invertible precisely when the resultant of
/// the residual factors is a unit.
pub fn lift_monic_factor(
    ring: &Ring,
    f_monic: &[Elem],
    seed_monic: &[Elem],
    maxit: usize,
) -> Result<Vec<Elem>, RingError> {
    let mut g: Vec<Elem> = seed_monic.to_vec();
    let d = g.len() - 1;
    for _ in 0..maxit {
        let (h, r) = poly_divmod_monic(ring, f_monic, &g);
        if r.is_empty() {
            return Ok(g);
        }
        let mut r = r;
        r.resize(d, ring.zero());
        // columns: remainder of t^j * h modulo g, j = 0..d-1
        let mut m = vec![vec![ring.zero(); d]; d];
        let mut tj = h;
        for j in 0..d {
            let (_, mut rj) = poly_divmod_monic(ring, &tj, &g);
            rj.resize(d, ring.zero());
            for (i, rji) in rj.into_iter().enumerate() {
                m[i][j] = rji;
            }
            tj.insert(0, ring.zero());
        }
        let delta = solve_unit_pivot(ring, &m, &r)?.ok_or_else(|| {
            RingError::NewtonFailed(
                "factor lift: residual cofactor not coprime to the seed (resultant not a unit)"
                    .into(),
            )
        })?;
        for (gc, dc) in g.iter_mut().zip(&delta) {
            *gc = ring.add(gc, dc);
        }
    }
    let (_, r) = poly_divmod_monic(ring, f_monic, &g);
    if r.is_empty() {
        Ok(g)
    } else {
        Err(RingError::NewtonFailed(
            "factor lift did not converge to an exact divisor".into(),
        ))
    }
}

/// Does d (invertible leading coefficient) divide p in R[t]? Returns the
/// quotient against the monic normalization of d on success.
pub fn poly_divides_monic_normalized(
    ring: &Ring,
    d: &[Elem],
    p: &[Elem],
) -> Result<(bool, Vec<Elem>), RingError> {
    let lc = d.last().ok_or(RingError::ZeroInput)?;
    let lcinv = ring.inv(lc)?;
    let dm: Vec<Elem> = d.iter().map(|c| ring.mul(c, &lcinv)).collect();
    let (q, r) = poly_divmod_monic(ring, p, &dm);
    Ok((r.is_empty(), q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ring;

    #[test]
    fn divmod_round_trip() {
        let q = Ring::rationals();
        // f = (t^2 + 2t + 3)(t + 5) + 7
        let a = vec![q.from_i64(3 * 5 + 7), q.from_i64(13), q.from_i64(7), q.from_i64(1)];
        let b = vec![q.from_i64(5), q.from_i64(1)];
        let (quo, rem) = poly_divmod_monic(&q, &a, &b);
        assert_eq!(rem, vec![q.from_i64(7)]);
        assert_eq!(quo, vec![q.from_i64(3), q.from_i64(2), q.from_i64(1)]);
    }

    #[test]
    fn lift_recovers_series_factor() {
        let z = Ring::padic(5, 6).unwrap();
        let a = Ring::series(z, 8, "s").unwrap();
        let s = a.gen().unwrap();
        // f = (t - (1+s)) (t - 2), seed t - 1
        let r1 = a.add(&a.one(), &s);
        let r2 = a.from_i64(2);
        let f = vec![
            a.mul(&r1, &r2),
            a.neg(&a.add(&r1, &r2)),
            a.one(),
        ];
        let seed = vec![a.neg(&a.one()), a.one()];
        let g = lift_monic_factor(&a, &f, &seed, 12).unwrap();
        assert_eq!(g.len(), 2);
        assert!(a.eq_elem(&g[0], &a.neg(&r1)));
        let (ok, quo) = poly_divides_monic_normalized(&a, &g, &f).unwrap();
        assert!(ok);
        assert!(a.eq_elem(&quo[0], &a.neg(&r2)));
    }

    #[test]
    fn lift_rejects_non_coprime_seed() {
        let z = Ring::padic(5, 6).unwrap();
        let a = Ring::series(z, 8, "s").unwrap();
        let s = a.gen().unwrap();
        // f = (t - 1)(t - (1+s)): both roots are 1 mod (p, s), so a seed that
        // is not already an exact factor cannot be separated from its cofactor
        let r1 = a.one();
        let r2 = a.add(&a.one(), &s);
        let f = vec![a.mul(&r1, &r2), a.neg(&a.add(&r1, &r2)), a.one()];
        let s2 = a.mul(&s, &s);
        let seed = vec![a.neg(&a.add(&a.one(), &s2)), a.one()];
        assert!(lift_monic_factor(&a, &f, &seed, 12).is_err());
    }
}
