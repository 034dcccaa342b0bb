//! Dense exact matrices over a coefficient ring: row-major `Vec<Vec<Elem>>`.
//!
//! Determinants use cofactor expansion along the row with the most zeros.
//! The matrices here are tiny (at most 6x6, 3n x 3n for 2-bridge inputs), and
//! fraction-free elimination is awkward over truncated series, so expansion
//! is both simpler and exact.

use itertools::Itertools;

use crate::ring::{Elem, Ring};

pub type Mat = Vec<Vec<Elem>>;

pub fn mat_eye(ring: &Ring, n: usize) -> Mat {
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { ring.one() } else { ring.zero() })
                .collect()
        })
        .collect()
}

pub fn mat_zero(ring: &Ring, rows: usize, cols: usize) -> Mat {
    vec![vec![ring.zero(); cols]; rows]
}

pub fn mat_add(ring: &Ring, a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| ring.add(x, y)).collect())
        .collect()
}

pub fn mat_sub(ring: &Ring, a: &Mat, b: &Mat) -> Mat {
    a.iter()
        .zip(b)
        .map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| ring.sub(x, y)).collect())
        .collect()
}

pub fn mat_mul(ring: &Ring, a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    let m = b[0].len();
    let k = b.len();
    assert_eq!(a[0].len(), k, "dimension mismatch in matrix product");
    let mut out = mat_zero(ring, n, m);
    for i in 0..n {
        for l in 0..k {
            if ring.is_zero(&a[i][l]) {
                continue;
            }
            for j in 0..m {
                if ring.is_zero(&b[l][j]) {
                    continue;
                }
                let t = ring.mul(&a[i][l], &b[l][j]);
                out[i][j] = ring.add(&out[i][j], &t);
            }
        }
    }
    out
}

pub fn mat_scale(ring: &Ring, c: &Elem, a: &Mat) -> Mat {
    a.iter()
        .map(|r| r.iter().map(|x| ring.mul(c, x)).collect())
        .collect()
}

pub fn transpose(a: &Mat) -> Mat {
    if a.is_empty() {
        return Vec::new();
    }
    (0..a[0].len())
        .map(|j| a.iter().map(|r| r[j].clone()).collect())
        .collect()
}

pub fn row_vec_mul(ring: &Ring, v: &[Elem], a: &Mat) -> Vec<Elem> {
    let cols = a[0].len();
    let mut out = vec![ring.zero(); cols];
    for (i, x) in v.iter().enumerate() {
        if ring.is_zero(x) {
            continue;
        }
        for j in 0..cols {
            let t = ring.mul(x, &a[i][j]);
            out[j] = ring.add(&out[j], &t);
        }
    }
    out
}

pub fn det(ring: &Ring, a: &Mat) -> Elem {
    let n = a.len();
    if n == 0 {
        return ring.one();
    }
    assert_eq!(a[0].len(), n, "determinant of a non-square matrix");
    det_rec(ring, a, &(0..n).collect::<Vec<_>>(), &(0..n).collect::<Vec<_>>())
}

/// Determinant of the submatrix picked out by `rows` x `cols`.
pub fn det_submatrix(ring: &Ring, a: &Mat, rows: &[usize], cols: &[usize]) -> Elem {
    assert_eq!(rows.len(), cols.len());
    if rows.is_empty() {
        return ring.one();
    }
    det_rec(ring, a, rows, cols)
}

fn det_rec(ring: &Ring, a: &Mat, rows: &[usize], cols: &[usize]) -> Elem {
    let n = rows.len();
    if n == 1 {
        return a[rows[0]][cols[0]].clone();
    }
    if n == 2 {
        let p = ring.mul(&a[rows[0]][cols[0]], &a[rows[1]][cols[1]]);
        let q = ring.mul(&a[rows[0]][cols[1]], &a[rows[1]][cols[0]]);
        return ring.sub(&p, &q);
    }
    // expand along the row with the most zeros
    let best = rows
        .iter()
        .enumerate()
        .max_by_key(|(_, &r)| cols.iter().filter(|&&c| ring.is_zero(&a[r][c])).count())
        .map(|(i, _)| i)
        .unwrap();
    let r = rows[best];
    let sub_rows: Vec<usize> = rows
        .iter()
        .copied()
        .filter(|&x| x != r)
        .collect();
    let mut acc = ring.zero();
    for (jpos, &c) in cols.iter().enumerate() {
        if ring.is_zero(&a[r][c]) {
            continue;
        }
        let sub_cols: Vec<usize> = cols
            .iter()
            .copied()
            .filter(|&x| x != c)
            .collect();
        let minor = det_rec(ring, a, &sub_rows, &sub_cols);
        let term = ring.mul(&a[r][c], &minor);
        if (best + jpos) % 2 == 0 {
            acc = ring.add(&acc, &term);
        } else {
            acc = ring.sub(&acc, &term);
        }
    }
    acc
}

/// All k x k minors in lexicographic (row-set, column-set) order.
pub fn minors(ring: &Ring, a: &Mat, k: usize) -> Vec<Elem> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    if k == 0 {
        return vec![ring.one()];
    }
    if k > rows || k > cols {
        return Vec::new();
    }
    let mut out = Vec::new();
    for rs in (0..rows).combinations(k) {
        for cs in (0..cols).combinations(k) {
            out.push(det_rec(ring, a, &rs, &cs));
        }
    }
    out
}

/// Minors restricted to row subsets that contain a mandatory row (used for
/// the mixed minors through the gamma row of the Selmer presentation).
pub fn minors_through_row(ring: &Ring, a: &Mat, k: usize, row: usize) -> Vec<Elem> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    if k == 0 || k > rows || k > cols {
        return Vec::new();
    }
    let mut out = Vec::new();
    for rs in (0..rows).combinations(k) {
        if !rs.contains(&row) {
            continue;
        }
        for cs in (0..cols).combinations(k) {
            out.push(det_rec(ring, a, &rs, &cs));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::Ring;

    #[test]
    fn det_matches_hand_value() {
        let q = Ring::rationals();
        let m: Mat = vec![
            vec![q.from_i64(2), q.from_i64(0), q.from_i64(1)],
            vec![q.from_i64(1), q.from_i64(3), q.from_i64(0)],
            vec![q.from_i64(0), q.from_i64(1), q.from_i64(4)],
        ];
        // 2*(12-0) - 0 + 1*(1-0) = 25
        assert!(q.eq_elem(&det(&q, &m), &q.from_i64(25)));
    }

    #[test]
    fn product_of_inverse_pair_is_identity() {
        let q = Ring::rationals();
        let a: Mat = vec![
            vec![q.from_i64(1), q.from_i64(2)],
            vec![q.from_i64(3), q.from_i64(7)],
        ];
        let ainv: Mat = vec![
            vec![q.from_i64(7), q.from_i64(-2)],
            vec![q.from_i64(-3), q.from_i64(1)],
        ];
        assert_eq!(mat_mul(&q, &a, &ainv), mat_eye(&q, 2));
    }

    #[test]
    fn minor_counts() {
        let q = Ring::rationals();
        let m = mat_eye(&q, 4);
        assert_eq!(minors(&q, &m, 3).len(), 16);
        assert_eq!(minors_through_row(&q, &m, 3, 3).len(), 12);
        let nonzero = minors(&q, &m, 3)
            .iter()
            .filter(|e| !q.is_zero(e))
            .count();
        assert_eq!(nonzero, 4);
    }

    #[test]
    fn row_vector_action() {
        let q = Ring::rationals();
        let a: Mat = vec![
            vec![q.from_i64(0), q.from_i64(1)],
            vec![q.from_i64(1), q.from_i64(0)],
        ];
        let v = vec![q.from_i64(3), q.from_i64(5)];
        assert_eq!(row_vec_mul(&q, &v, &a), vec![q.from_i64(5), q.from_i64(3)]);
    }
}
