//! Free-group words, Fox free differential calculus, and deficiency-one
//! presentations.
//!
//! A word is a vector of nonzero signed letters: `k` means the generator
//! g_k, `-k` its inverse. Words are kept freely reduced. Group-ring elements
//! of Z[F] are maps word -> integer coefficient with no zero entries.

use std::collections::BTreeMap;

pub type Word = Vec<i32>;
pub type GroupRing = BTreeMap<Word, i64>;

pub fn wreduce(w: &[i32]) -> Word {
    let mut out: Word = Vec::with_capacity(w.len());
    for &l in w {
        if out.last().is_some_and(|&p| p == -l) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

pub fn winv(w: &[i32]) -> Word {
    w.iter().rev().map(|&l| -l).collect()
}

pub fn wmul(u: &[i32], v: &[i32]) -> Word {
    let mut joined = u.to_vec();
    joined.extend_from_slice(v);
    wreduce(&joined)
}

pub fn wpow(w: &[i32], e: i32) -> Word {
    let base: Word = if e < 0 { winv(w) } else { w.to_vec() };
    let mut out = Word::new();
    for _ in 0..e.unsigned_abs() {
        out = wmul(&out, &base);
    }
    out
}

/// Exponent sum: the image of the word under abelianization when every
/// generator maps to t.
pub fn abelianization_degree(w: &[i32]) -> i64 {
    w.iter().map(|&l| l.signum() as i64).sum()
}

fn gr_insert(m: &mut GroupRing, w: Word, c: i64) {
    if c == 0 {
        return;
    }
    let e = m.entry(w).or_insert(0);
    *e += c;
    if *e == 0 {
        let key: Vec<Word> = m
            .iter()
            .filter(|(_, &v)| v == 0)
            .map(|(k, _)| k.clone())
            .collect();
        for k in key {
            m.remove(&k);
        }
    }
}

pub fn gr_zero() -> GroupRing {
    BTreeMap::new()
}

pub fn gr_word(w: &[i32], c: i64) -> GroupRing {
    let mut m = BTreeMap::new();
    gr_insert(&mut m, wreduce(w), c);
    m
}

pub fn gr_add(a: &GroupRing, b: &GroupRing) -> GroupRing {
    let mut out = a.clone();
    for (w, &c) in b {
        gr_insert(&mut out, w.clone(), c);
    }
    out
}

pub fn gr_sub(a: &GroupRing, b: &GroupRing) -> GroupRing {
    let mut out = a.clone();
    for (w, &c) in b {
        gr_insert(&mut out, w.clone(), -c);
    }
    out
}

pub fn gr_mul_left_word(u: &[i32], a: &GroupRing) -> GroupRing {
    let mut out = BTreeMap::new();
    for (w, &c) in a {
        gr_insert(&mut out, wmul(u, w), c);
    }
    out
}

pub fn gr_mul_right_word(a: &GroupRing, v: &[i32]) -> GroupRing {
    let mut out = BTreeMap::new();
    for (w, &c) in a {
        gr_insert(&mut out, wmul(w, v), c);
    }
    out
}

/// Fox derivative d(w)/d(g_j) in Z[F], by the left-to-right product rule:
/// a letter g_j contributes its prefix, a letter g_j^{-1} contributes minus
/// (prefix * g_j^{-1}).
pub fn fox_derivative(w: &[i32], j: usize) -> GroupRing {
    let w = wreduce(w);
    let mut out = BTreeMap::new();
    let mut prefix: Word = Vec::new();
    for &l in &w {
        if l == j as i32 {
            gr_insert(&mut out, prefix.clone(), 1);
        } else if l == -(j as i32) {
            gr_insert(&mut out, wmul(&prefix, &[l]), -1);
        }
        prefix.push(l);
    }
    out
}

/// Sum_j fox(w, j) * (g_j - 1) = w - 1, the defining identity of the Fox
/// derivatives; `n` bounds the generator indices appearing in w.
pub fn fundamental_identity_check(w: &[i32], n: usize) -> bool {
    let w = wreduce(w);
    let mut lhs = gr_zero();
    for j in 1..=n {
        let d = fox_derivative(&w, j);
        let shifted = gr_mul_right_word(&d, &[j as i32]);
        lhs = gr_add(&lhs, &gr_sub(&shifted, &d));
    }
    let rhs = gr_sub(&gr_word(&w, 1), &gr_word(&[], 1));
    lhs == rhs
}

#[derive(Clone, Debug)]
pub struct Presentation {
    pub generator_count: usize,
    pub relators: Vec<Word>,
    pub meridian: Word,
    pub longitude: Option<Word>,
}

impl Presentation {
    pub fn new(generator_count: usize, relators: Vec<Word>) -> Self {
        Presentation {
            generator_count,
            relators: relators.iter().map(|r| wreduce(r)).collect(),
            meridian: vec![1],
            longitude: None,
        }
    }

    fn letters_in_bounds(&self, w: &[i32]) -> bool {
        w.iter()
            .all(|&l| l != 0 && (l.unsigned_abs() as usize) <= self.generator_count)
    }

    /// Wirtinger sanity findings; empty means valid.
    pub fn validate(&self) -> Vec<String> {
        let mut findings = Vec::new();
        if self.generator_count < 2 {
            findings.push(format!(
                "generator count {} < 2",
                self.generator_count
            ));
        }
        if self.relators.len() + 1 != self.generator_count {
            findings.push(format!(
                "relator count {} != n-1 = {}",
                self.relators.len(),
                self.generator_count.saturating_sub(1)
            ));
        }
        for (i, r) in self.relators.iter().enumerate() {
            if !self.letters_in_bounds(r) {
                findings.push(format!("relator {} has out-of-range letters", i + 1));
            } else if abelianization_degree(r) != 0 {
                findings.push(format!(
                    "relator {} has abelianization degree {}, expected 0",
                    i + 1,
                    abelianization_degree(r)
                ));
            }
        }
        if !self.letters_in_bounds(&self.meridian) {
            findings.push("meridian has out-of-range letters".into());
        }
        if let Some(lam) = &self.longitude {
            if !self.letters_in_bounds(lam) {
                findings.push("longitude has out-of-range letters".into());
            } else if abelianization_degree(lam) != 0 {
                findings.push(format!(
                    "longitude has abelianization degree {}, expected 0",
                    abelianization_degree(lam)
                ));
            }
        }
        findings
    }
}

/// g1 g2^-1 g1^-1 g2 g1 * (g2 g1 g2^-1 g1^-1 g2)^-1, the figure-eight
/// relator written as a single word.
pub fn fig8_relator() -> Word {
    wmul(&[1, -2, -1, 2, 1], &winv(&[2, 1, -2, -1, 2]))
}

pub fn fig8_longitude() -> Word {
    wreduce(&[2, -1, -2, 1, 1, -2, -1, 2])
}

/// g1 g2 g1^-1 g2^-1 g1 g2 g1 * (g2 g1 g2 g1^-1 g2^-1 g1 g2)^-1 for the 5_2
/// knot.
pub fn k52_relator() -> Word {
    wmul(&[1, 2, -1, -2, 1, 2, 1], &winv(&[2, 1, 2, -1, -2, 1, 2]))
}

pub fn k52_longitude() -> Word {
    wreduce(&[2, 1, -2, -1, 2, 1, -2, 1, 2, -1, -2, 1, 2, -1, -1, -1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_and_inverse() {
        assert_eq!(wmul(&[1], &[-1]), Vec::<i32>::new());
        assert_eq!(winv(&[1, -2]), vec![2, -1]);
        assert_eq!(wreduce(&[1, 2, -2, 1]), vec![1, 1]);
    }

    #[test]
    fn fox_axioms() {
        assert_eq!(fox_derivative(&[1], 1), gr_word(&[], 1));
        assert_eq!(fox_derivative(&[1], 2), gr_zero());
        assert_eq!(fox_derivative(&[1, 2], 2), gr_word(&[1], 1));
        assert_eq!(fox_derivative(&[-1], 1), gr_word(&[-1], -1));
    }

    #[test]
    fn fundamental_identity_on_fixture_relators() {
        assert!(fundamental_identity_check(&fig8_relator(), 2));
        assert!(fundamental_identity_check(&k52_relator(), 2));
        assert!(fundamental_identity_check(&[], 2));
        assert!(fundamental_identity_check(&[1], 2));
    }

    #[test]
    fn degrees_of_fixture_words() {
        assert_eq!(abelianization_degree(&[1, -2, -1, 2, 1]), 1);
        assert_eq!(abelianization_degree(&fig8_relator()), 0);
        assert_eq!(abelianization_degree(&fig8_longitude()), 0);
        assert_eq!(abelianization_degree(&k52_relator()), 0);
        assert_eq!(abelianization_degree(&k52_longitude()), 0);
    }

    #[test]
    fn presentation_findings() {
        let good = Presentation::new(2, vec![fig8_relator()]);
        assert!(good.validate().is_empty());
        let bad = Presentation::new(2, vec![fig8_relator(), k52_relator()]);
        assert!(!bad.validate().is_empty());
        let deg = Presentation::new(2, vec![vec![1, 2]]);
        assert!(deg
            .validate()
            .iter()
            .any(|f| f.contains("abelianization degree")));
    }
}
