//! SL2 representations of a presentation: verified construction, word and
//! group-ring evaluation, the adjoint action on sl2 in the basis
//! v1 = (0 1; 0 0), v2 = (1 0; 0 -1), v3 = (0 0; 1 0), residual reduction,
//! and absolute irreducibility over prime fields.

use crate::error::{RepError, RingError};
use crate::mat::{mat_eye, mat_mul, mat_sub, mat_zero, transpose, Mat};
use crate::ring::{mul_mod, pow_mod, Elem, Ring, RingRc};
use crate::words::{abelianization_degree, winv, GroupRing, Presentation};

#[derive(Clone)]
pub struct Representation {
    pub presentation: Presentation,
    pub ring: RingRc,
    pub images: Vec<Mat>,
}

fn det2(ring: &Ring, m: &Mat) -> Elem {
    ring.sub(&ring.mul(&m[0][0], &m[1][1]), &ring.mul(&m[0][1], &m[1][0]))
}

/// Inverse of a determinant-1 matrix: (a b; c d) -> (d -b; -c a).
pub fn sl2_inverse(ring: &Ring, m: &Mat) -> Mat {
    vec![
        vec![m[1][1].clone(), ring.neg(&m[0][1])],
        vec![ring.neg(&m[1][0]), m[0][0].clone()],
    ]
}

fn mat_repr(ring: &Ring, m: &Mat) -> String {
    let rows: Vec<String> = m
        .iter()
        .map(|r| {
            let cells: Vec<String> = r.iter().map(|e| ring.repr(e)).collect();
            cells.join(", ")
        })
        .collect();
    format!("[{}]", rows.join("; "))
}

pub fn rep_from_assignment(
    presentation: Presentation,
    ring: RingRc,
    images: Vec<Mat>,
) -> Result<Representation, RepError> {
    if images.len() != presentation.generator_count {
        return Err(RepError::MatrixCount {
            expected: presentation.generator_count,
            got: images.len(),
        });
    }
    for (i, m) in images.iter().enumerate() {
        if !ring.eq_elem(&det2(&ring, m), &ring.one()) {
            return Err(RepError::Determinant { index: i + 1 });
        }
    }
    let rep = Representation {
        presentation,
        ring,
        images,
    };
    for (i, r) in rep.presentation.relators.clone().iter().enumerate() {
        let m = rep.evaluate_word(r);
        let residual = mat_sub(&rep.ring, &m, &mat_eye(&rep.ring, 2));
        if residual
            .iter()
            .any(|row| row.iter().any(|e| !rep.ring.is_zero(e)))
        {
            return Err(RepError::RelatorViolation {
                index: i + 1,
                residual: mat_repr(&rep.ring, &m),
            });
        }
    }
    Ok(rep)
}

impl Representation {
    pub fn evaluate_word(&self, w: &[i32]) -> Mat {
        let mut acc = mat_eye(&self.ring, 2);
        for &l in w {
            let g = &self.images[(l.unsigned_abs() as usize) - 1];
            let m = if l > 0 {
                g.clone()
            } else {
                sl2_inverse(&self.ring, g)
            };
            acc = mat_mul(&self.ring, &acc, &m);
        }
        acc
    }

    pub fn evaluate_group_ring(&self, e: &GroupRing) -> Mat {
        let mut acc = mat_zero(&self.ring, 2, 2);
        for (w, &c) in e {
            let m = self.evaluate_word(w);
            let ce = self.ring.from_i64(c);
            for i in 0..2 {
                for j in 0..2 {
                    let t = self.ring.mul(&ce, &m[i][j]);
                    acc[i][j] = self.ring.add(&acc[i][j], &t);
                }
            }
        }
        acc
    }

    pub fn adjoint_of_group_ring(&self, e: &GroupRing) -> Mat {
        let mut acc = mat_zero(&self.ring, 3, 3);
        for (w, &c) in e {
            let m = adjoint_matrix(&self.ring, &self.evaluate_word(w)).expect("det-1 word image");
            let ce = self.ring.from_i64(c);
            for i in 0..3 {
                for j in 0..3 {
                    let t = self.ring.mul(&ce, &m[i][j]);
                    acc[i][j] = self.ring.add(&acc[i][j], &t);
                }
            }
        }
        acc
    }

    /// Right-action matrix of w on row vectors: Ad(rho(w)^{-1}) transposed.
    pub fn right_action(&self, w: &[i32]) -> Mat {
        let m = self.evaluate_word(&winv(w));
        transpose(&adjoint_matrix(&self.ring, &m).expect("det-1 word image"))
    }

    /// Right-action matrix of a group-ring element: Z-linear extension of
    /// `right_action`.
    pub fn right_action_gr(&self, e: &GroupRing) -> Mat {
        let mut acc = mat_zero(&self.ring, 3, 3);
        for (w, &c) in e {
            let r = self.right_action(w);
            let ce = self.ring.from_i64(c);
            for i in 0..3 {
                for j in 0..3 {
                    let t = self.ring.mul(&ce, &r[i][j]);
                    acc[i][j] = self.ring.add(&acc[i][j], &t);
                }
            }
        }
        acc
    }

    /// Right-action matrix of a group-ring element, with each word w twisted
    /// by t^deg(w) into the given Laurent ring (coefficients live in the
    /// base of `laurent`).
    pub fn right_action_twisted(&self, laurent: &RingRc, e: &GroupRing) -> Mat {
        let Ring::Laurent { .. } = &**laurent else { panic!("expected a Laurent ring") };
        let mut acc = mat_zero(laurent, 3, 3);
        for (w, &c) in e {
            let r = self.right_action(w);
            let k = abelianization_degree(w);
            let ce = self.ring.from_i64(c);
            for i in 0..3 {
                for j in 0..3 {
                    let coeff = self.ring.mul(&ce, &r[i][j]);
                    if self.ring.is_zero(&coeff) {
                        continue;
                    }
                    let term = Elem::Lau([(k, coeff)].into());
                    acc[i][j] = laurent.add(&acc[i][j], &term);
                }
            }
        }
        acc
    }

    pub fn trace_character(&self, w: &[i32]) -> Elem {
        let m = self.evaluate_word(w);
        self.ring.add(&m[0][0], &m[1][1])
    }

    pub fn commutator_is_identity(&self, u: &[i32], v: &[i32]) -> bool {
        let a = self.evaluate_word(u);
        let b = self.evaluate_word(v);
        let ab = mat_mul(&self.ring, &a, &b);
        let ba = mat_mul(&self.ring, &b, &a);
        ab.iter()
            .zip(&ba)
            .all(|(x, y)| x.iter().zip(y).all(|(p, q)| self.ring.eq_elem(p, q)))
    }

    /// Entry-wise reduction to a smaller ring, re-verifying the relators.
    /// `gen_images` provides images for extension generators (e.g. a ramified
    /// square root that collapses to 0).
    pub fn residual_reduce(
        &self,
        target: RingRc,
        gen_images: &[(String, Elem)],
    ) -> Result<Representation, RepError> {
        let mut images = Vec::with_capacity(self.images.len());
        for m in &self.images {
            let mut rm = mat_zero(&target, 2, 2);
            for i in 0..2 {
                for j in 0..2 {
                    rm[i][j] = self.ring.reduce_mod(&m[i][j], &target, gen_images)?;
                }
            }
            images.push(rm);
        }
        rep_from_assignment(self.presentation.clone(), target, images)
    }
}

/// The 3x3 matrix of X -> M X M^{-1} on sl2 in the basis (v1, v2, v3);
/// columns are the coordinates of M v_i M^{-1}.
pub fn adjoint_matrix(ring: &Ring, m: &Mat) -> Result<Mat, RepError> {
    if !ring.eq_elem(&det2(ring, m), &ring.one()) {
        return Err(RepError::Determinant { index: 0 });
    }
    let (a, b, c, d) = (&m[0][0], &m[0][1], &m[1][0], &m[1][1]);
    let two = ring.from_i64(2);
    let a2 = ring.mul(a, a);
    let b2 = ring.mul(b, b);
    let c2 = ring.mul(c, c);
    let d2 = ring.mul(d, d);
    let ab = ring.mul(a, b);
    let ac = ring.mul(a, c);
    let bd = ring.mul(b, d);
    let cd = ring.mul(c, d);
    let mid = ring.add(&ring.mul(a, d), &ring.mul(b, c));
    Ok(vec![
        vec![a2, ring.neg(&ring.mul(&two, &ab)), ring.neg(&b2)],
        vec![ring.neg(&ac), mid, bd],
        vec![ring.neg(&c2), ring.mul(&two, &cd), d2],
    ])
}

// ----- absolute irreducibility over F_p -----

fn legendre_is_square(a: u64, p: u64) -> bool {
    if a == 0 {
        return true;
    }
    pow_mod(a, (p - 1) / 2, p) == 1
}

/// Tonelli-Shanks square root mod an odd prime; `a` must be a square.
fn sqrt_mod_p(a: u64, p: u64) -> u64 {
    if a == 0 {
        return 0;
    }
    if p % 4 == 3 {
        return pow_mod(a, (p + 1) / 4, p);
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p).find(|&z| !legendre_is_square(z, p)).unwrap();
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, (q + 1) / 2, p);
    while t != 1 {
        let mut i = 0u32;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1u64 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    r
}

/// Square root of a residue-field element inside F_{p^2} = F_p(z), z^2 = d
/// (d a fixed non-residue).
fn sqrt_in_fp2(fp2: &Ring, a_mod_p: u64, p: u64, d: u64) -> Elem {
    if legendre_is_square(a_mod_p, p) {
        fp2.lift(Elem::Mod(sqrt_mod_p(a_mod_p, p)))
    } else {
        // a = d * (a/d), and a/d is a square; sqrt(a) = sqrt(a/d) * z
        let dinv = pow_mod(d, p - 2, p);
        let r0 = sqrt_mod_p(mul_mod(a_mod_p, dinv, p), p);
        let z = fp2.gen().expect("extension generator");
        fp2.mul(&fp2.lift(Elem::Mod(r0)), &z)
    }
}

fn is_eigenvector(ring: &Ring, m: &Mat, v: &(Elem, Elem)) -> bool {
    let mv0 = ring.add(&ring.mul(&m[0][0], &v.0), &ring.mul(&m[0][1], &v.1));
    let mv1 = ring.add(&ring.mul(&m[1][0], &v.0), &ring.mul(&m[1][1], &v.1));
    let cross = ring.sub(&ring.mul(&mv0, &v.1), &ring.mul(&mv1, &v.0));
    ring.is_zero(&cross)
}

/// True iff the generator images share no common eigenvector over the
/// algebraic closure; for 2x2 matrices every eigenvector is already defined
/// over F_{p^2}, so the search runs there.
pub fn absolutely_irreducible(rep: &Representation) -> Result<bool, RepError> {
    let Ring::PrimeField { p } = &*rep.ring else {
        return Err(RepError::Ring(RingError::Capability(
            "absolute irreducibility test needs a prime-field representation".into(),
        )));
    };
    let p = *p;
    if p == 2 {
        return Err(RepError::Ring(RingError::Capability(
            "characteristic 2 is unsupported".into(),
        )));
    }
    let d = (2..p).find(|&d| !legendre_is_square(d, p)).ok_or_else(|| {
        RepError::Ring(RingError::Capability("no quadratic non-residue found".into()))
    })?;
    let fp = rep.ring.clone();
    let md = Elem::Mod((p - d) % p);
    let fp2 = Ring::extension(fp, vec![md, Elem::Mod(0), Elem::Mod(1)], "z")
        .map_err(RepError::Ring)?;

    let lifted: Vec<Mat> = rep
        .images
        .iter()
        .map(|m| {
            m.iter()
                .map(|r| r.iter().map(|e| fp2.lift(e.clone())).collect())
                .collect()
        })
        .collect();

    // find a non-scalar image; if all images are scalar the representation
    // is diagonal, hence reducible
    let scalar = |m: &Mat| {
        fp2.is_zero(&m[0][1]) && fp2.is_zero(&m[1][0]) && fp2.eq_elem(&m[0][0], &m[1][1])
    };
    let Some(pivot) = lifted.iter().find(|m| !scalar(m)) else {
        return Ok(false);
    };

    // eigenlines of the pivot over F_{p^2}
    let tr = fp2.add(&pivot[0][0], &pivot[1][1]);
    let Elem::Pol(trv) = &tr else { unreachable!() };
    let tr0 = match trv.first() {
        Some(Elem::Mod(x)) => *x,
        _ => 0,
    };
    // discriminant of t^2 - tr t + 1 lives in F_p for F_p matrices
    let disc = (mul_mod(tr0, tr0, p) + p * 4 - 4) % p;
    let sq = sqrt_in_fp2(&fp2, disc, p, d);
    let half = fp2.inv(&fp2.from_i64(2)).map_err(RepError::Ring)?;
    let mut lines: Vec<(Elem, Elem)> = Vec::new();
    for sgn in [1i64, -1] {
        let root = fp2.mul(
            &fp2.add(&tr, &fp2.mul(&fp2.from_i64(sgn), &sq)),
            &half,
        );
        // solve (pivot - root I) v = 0
        let v = if !fp2.is_zero(&pivot[0][1]) {
            (pivot[0][1].clone(), fp2.sub(&root, &pivot[0][0]))
        } else if !fp2.is_zero(&pivot[1][0]) {
            (fp2.sub(&root, &pivot[1][1]), pivot[1][0].clone())
        } else {
            // diagonal non-scalar pivot: coordinate axes
            if sgn == 1 {
                (fp2.one(), fp2.zero())
            } else {
                (fp2.zero(), fp2.one())
            }
        };
        if !(fp2.is_zero(&v.0) && fp2.is_zero(&v.1)) {
            lines.push(v);
        }
    }

    for v in &lines {
        if lifted.iter().all(|m| is_eigenvector(&fp2, m, v)) {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{fig8_relator, Presentation};

    fn fp(p: u64) -> RingRc {
        Ring::prime_field(p).unwrap()
    }

    fn m2(ring: &Ring, e: [[i64; 2]; 2]) -> Mat {
        e.iter()
            .map(|r| r.iter().map(|&x| ring.from_i64(x)).collect())
            .collect()
    }

    #[test]
    fn determinant_gate() {
        let q = Ring::rationals();
        let p = Presentation::new(2, vec![fig8_relator()]);
        let bad = vec![m2(&q, [[1, 1], [0, 2]]), m2(&q, [[1, 0], [0, 1]])];
        assert!(matches!(
            rep_from_assignment(p, q, bad),
            Err(RepError::Determinant { index: 1 })
        ));
    }

    #[test]
    fn relator_gate() {
        let q = Ring::rationals();
        let p = Presentation::new(2, vec![fig8_relator()]);
        // random SL2 pair will not satisfy the figure-eight relation
        let imgs = vec![m2(&q, [[1, 1], [0, 1]]), m2(&q, [[1, 0], [3, 1]])];
        assert!(matches!(
            rep_from_assignment(p, q, imgs),
            Err(RepError::RelatorViolation { index: 1, .. })
        ));
    }

    #[test]
    fn adjoint_of_unipotent() {
        let q = Ring::rationals();
        let ad = adjoint_matrix(&q, &m2(&q, [[1, 1], [0, 1]])).unwrap();
        let expect = vec![
            vec![q.from_i64(1), q.from_i64(-2), q.from_i64(-1)],
            vec![q.from_i64(0), q.from_i64(1), q.from_i64(1)],
            vec![q.from_i64(0), q.from_i64(0), q.from_i64(1)],
        ];
        assert_eq!(ad, expect);
    }

    #[test]
    fn residual_matrices_are_absolutely_irreducible() {
        let f53 = fp(53);
        let p = Presentation::new(2, vec![fig8_relator()]);
        let imgs = vec![m2(&f53, [[19, 1], [0, 14]]), m2(&f53, [[19, 0], [44, 14]])];
        let rep = rep_from_assignment(p, f53, imgs).unwrap();
        assert!(absolutely_irreducible(&rep).unwrap());

        let f17 = fp(17);
        let p2 = Presentation::new(2, vec![crate::words::k52_relator()]);
        let imgs2 = vec![m2(&f17, [[1, 1], [0, 1]]), m2(&f17, [[1, 0], [2, 1]])];
        let rep2 = rep_from_assignment(p2, f17, imgs2).unwrap();
        assert!(absolutely_irreducible(&rep2).unwrap());
    }

    #[test]
    fn diagonal_pair_is_reducible() {
        let f53 = fp(53);
        let p = Presentation {
            generator_count: 2,
            relators: vec![vec![1, 2, -1, -2]],
            meridian: vec![1],
            longitude: None,
        };
        let imgs = vec![m2(&f53, [[2, 0], [0, 27]]), m2(&f53, [[3, 0], [0, 18]])];
        let rep = rep_from_assignment(p.clone(), f53.clone(), imgs).unwrap();
        assert!(!absolutely_irreducible(&rep).unwrap());
        let trivial = vec![m2(&f53, [[1, 0], [0, 1]]), m2(&f53, [[1, 0], [0, 1]])];
        let rep2 = rep_from_assignment(p, f53, trivial).unwrap();
        assert!(!absolutely_irreducible(&rep2).unwrap());
    }

    #[test]
    fn upper_triangular_shared_line_is_reducible() {
        let f53 = fp(53);
        let p = Presentation {
            generator_count: 2,
            relators: vec![vec![1, 2, -1, -2]],
            meridian: vec![1],
            longitude: None,
        };
        let imgs = vec![m2(&f53, [[1, 1], [0, 1]]), m2(&f53, [[1, 5], [0, 1]])];
        let rep = rep_from_assignment(p, f53, imgs).unwrap();
        assert!(!absolutely_irreducible(&rep).unwrap());
    }
}
