//! Exact multivariate polynomials over the rationals, Bernoulli numbers and
//! polynomials, and the rational polylogarithm values `Li_{-k}(1/2)`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn factorial(n: u32) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * k)
}

pub fn binomial(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// `(2m-1)!!`, with `(-1)!! = 1`.
pub fn double_factorial_odd(m: u32) -> BigInt {
    (1..=m).fold(BigInt::one(), |acc, i| acc * (2 * i - 1))
}

/// Polynomial in `dim` variables with exact rational coefficients.
///
/// Terms are keyed by exponent vectors; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct MultiPoly {
    dim: usize,
    terms: BTreeMap<Vec<u32>, BigRational>,
}

impl MultiPoly {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(dim: usize, c: BigRational) -> Self {
        let mut p = Self::zero(dim);
        p.add_term(vec![0; dim], c);
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, BigRational::one())
    }

    /// The coordinate `u_i` (zero-based).
    pub fn var(dim: usize, i: usize) -> Self {
        Self::monomial(dim, i, 1, BigRational::one())
    }

    /// `c * u_i^k`.
    pub fn monomial(dim: usize, i: usize, k: u32, c: BigRational) -> Self {
        assert!(i < dim, "variable index out of range");
        let mut e = vec![0; dim];
        e[i] = k;
        let mut p = Self::zero(dim);
        p.add_term(e, c);
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &BigRational)> {
        self.terms.iter().map(|(e, c)| (e.as_slice(), c))
    }

    pub fn coeff(&self, exps: &[u32]) -> BigRational {
        self.terms
            .get(exps)
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn add_term(&mut self, exps: Vec<u32>, c: BigRational) {
        assert_eq!(exps.len(), self.dim, "exponent length mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exps) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|e| e.iter().sum()).max()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        Self {
            dim: self.dim,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-BigRational::one()))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.dim, other.dim);
        let mut out = Self::zero(self.dim);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &other.terms {
                let e = ea.iter().zip(eb).map(|(a, b)| a + b).collect();
                out.add_term(e, ca * cb);
            }
        }
        out
    }

    /// `d/du_i`.
    pub fn derivative(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            if e[i] == 0 {
                continue;
            }
            let mut d = e.clone();
            d[i] -= 1;
            out.add_term(d, c * BigInt::from(e[i]));
        }
        out
    }

    /// `u_i^k * self`.
    pub fn mul_var(&self, i: usize, k: u32) -> Self {
        Self {
            dim: self.dim,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let mut e = e.clone();
                    e[i] += k;
                    (e, c.clone())
                })
                .collect(),
        }
    }

    /// Substitutes `u_from := u_to`, leaving `u_from` absent from the result.
    pub fn identify(&self, from: usize, to: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (e, c) in &self.terms {
            let mut e = e.clone();
            e[to] += e[from];
            e[from] = 0;
            out.add_term(e, c.clone());
        }
        out
    }

    pub fn eval(&self, point: &[BigRational]) -> BigRational {
        assert_eq!(point.len(), self.dim);
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in point.iter().zip(e) {
                if k > 0 {
                    t *= num_traits::pow(x.clone(), k as usize);
                }
            }
            acc += t;
        }
        acc
    }

    pub fn eval_f64(&self, point: &[f64]) -> f64 {
        use num_traits::ToPrimitive;
        self.terms
            .iter()
            .map(|(e, c)| {
                let m: f64 = point
                    .iter()
                    .zip(e)
                    .map(|(x, &k)| x.powi(k as i32))
                    .product();
                c.to_f64().unwrap_or(f64::NAN) * m
            })
            .sum()
    }
}

impl fmt::Debug for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (n, (e, c)) in self.terms.iter().enumerate() {
            if n > 0 {
                write!(f, " {} ", if c.is_negative() { '-' } else { '+' })?;
            } else if c.is_negative() {
                write!(f, "-")?;
            }
            write!(f, "{}", c.abs())?;
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(f, "*u{}", i + 1)?,
                    _ => write!(f, "*u{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

/// Bernoulli numbers `B_0..=B_n` with `B_1 = -1/2`.
pub fn bernoulli_numbers(n: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = Vec::with_capacity(n + 1);
    b.push(BigRational::one());
    for m in 1..=n {
        // sum_{k<=m} C(m+1,k) B_k = 0
        let mut s = BigRational::zero();
        for (k, bk) in b.iter().enumerate() {
            s += bk * BigRational::from_integer(binomial(m as u32 + 1, k as u32));
        }
        b.push(-s / BigRational::from_integer(BigInt::from(m + 1)));
    }
    b
}

/// `B_r(x) = sum_k C(r,k) B_{r-k} x^k`, as a polynomial in one variable.
pub fn bernoulli_poly(r: usize) -> MultiPoly {
    let b = bernoulli_numbers(r);
    let mut p = MultiPoly::zero(1);
    for k in 0..=r {
        let c = &b[r - k] * BigRational::from_integer(binomial(r as u32, k as u32));
        p.add_term(vec![k as u32], c);
    }
    p
}

/// Rational polynomials `P_k` with `Li_{-k}(x) = P_k(x) / (1-x)^{k+1}`, as
/// coefficient vectors in `x`.
fn polylog_numerator(k: usize) -> Vec<BigRational> {
    // P_0 = x, P_{k+1} = x (P_k' (1-x) + (k+1) P_k)
    let mut p = vec![BigRational::zero(), BigRational::one()];
    for j in 0..k {
        let mut next = vec![BigRational::zero(); p.len() + 1];
        for (d, c) in p.iter().enumerate() {
            if d > 0 {
                let dc = c * BigInt::from(d);
                next[d] += &dc; // x * P' term
                next[d + 1] -= &dc; // -x^2 * P'
            }
            next[d + 1] += c * BigInt::from(j + 1);
        }
        p = next;
    }
    p
}

/// `Li_{-k}(1/2)`.
pub fn polylog_neg_half(k: usize) -> BigRational {
    let p = polylog_numerator(k);
    let half = rat(1, 2);
    let mut value = BigRational::zero();
    for c in p.iter().rev() {
        value = value * &half + c;
    }
    value * BigRational::from_integer(BigInt::from(2).pow(k as u32 + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn bernoulli_small() {
        let b = bernoulli_numbers(8);
        assert_eq!(b[0], int(1));
        assert_eq!(b[1], rat(-1, 2));
        assert_eq!(b[2], rat(1, 6));
        assert_eq!(b[3], int(0));
        assert_eq!(b[4], rat(-1, 30));
        assert_eq!(b[6], rat(1, 42));
        assert_eq!(b[8], rat(-1, 30));
    }

    #[test]
    fn bernoulli_polys() {
        assert_eq!(bernoulli_poly(0), MultiPoly::one(1));
        let mut b1 = MultiPoly::var(1, 0);
        b1.add_term(vec![0], rat(-1, 2));
        assert_eq!(bernoulli_poly(1), b1);
        let b2 = bernoulli_poly(2);
        assert_eq!(b2.coeff(&[2]), int(1));
        assert_eq!(b2.coeff(&[1]), int(-1));
        assert_eq!(b2.coeff(&[0]), rat(1, 6));
    }

    /// Independent check from the generating function: `B_r(x+1) - B_r(x) = r x^{r-1}`.
    #[test]
    fn bernoulli_difference_equation() {
        for r in 1..12usize {
            let p = bernoulli_poly(r);
            for x in [rat(0, 1), rat(1, 3), rat(-5, 2), rat(7, 1)] {
                let lhs = p.eval(&[&x + int(1)]) - p.eval(std::slice::from_ref(&x));
                let rhs = int(r as i64) * num_traits::pow(x.clone(), r - 1);
                assert_eq!(lhs, rhs, "r={r}");
            }
        }
    }

    #[test]
    fn polylog_values() {
        assert_eq!(polylog_neg_half(0), int(1));
        assert_eq!(polylog_neg_half(1), int(2));
        assert_eq!(polylog_neg_half(2), int(6));
        assert_eq!(polylog_neg_half(3), int(26));
        assert_eq!(polylog_neg_half(4), int(150));
    }

    #[test]
    fn polylog_matches_series() {
        // sum n^k / 2^n, truncated far past double precision
        for k in 0..8u32 {
            let s: f64 = (1..200)
                .map(|n| (n as f64).powi(k as i32) / 2f64.powi(n))
                .sum();
            let exact: f64 =
                num_traits::ToPrimitive::to_f64(&polylog_neg_half(k as usize)).unwrap();
            assert!((s - exact).abs() < 1e-9 * exact, "k={k}");
        }
    }

    #[test]
    fn identify_and_derivative() {
        // p = u1^2 u2 + 3 u2
        let mut p = MultiPoly::zero(2);
        p.add_term(vec![2, 1], int(1));
        p.add_term(vec![0, 1], int(3));
        let q = p.identify(0, 1);
        assert_eq!(q.coeff(&[0, 3]), int(1));
        assert_eq!(q.coeff(&[0, 1]), int(3));
        let d = p.derivative(0);
        assert_eq!(d.coeff(&[1, 1]), int(2));
        assert_eq!(d.len(), 1);
        assert_eq!(p.total_degree(), Some(3));
        assert!(MultiPoly::zero(3).total_degree().is_none());
    }

    fn arb_poly() -> impl Strategy<Value = MultiPoly> {
        prop::collection::vec(((0u32..4, 0u32..4), -9i64..10, 1i64..5), 0..6).prop_map(|ts| {
            let mut p = MultiPoly::zero(2);
            for ((a, b), n, d) in ts {
                p.add_term(vec![a, b], rat(n, d));
            }
            p
        })
    }

    proptest! {
        #[test]
        fn product_evaluates_pointwise(a in arb_poly(), b in arb_poly(), x in -5i64..6, y in -5i64..6) {
            let pt = [int(x), int(y)];
            prop_assert_eq!(a.mul(&b).eval(&pt), a.eval(&pt) * b.eval(&pt));
            prop_assert_eq!(a.add(&b).eval(&pt), a.eval(&pt) + b.eval(&pt));
        }

        #[test]
        fn leibniz_rule(a in arb_poly(), b in arb_poly()) {
            let lhs = a.mul(&b).derivative(0);
            let rhs = a.derivative(0).mul(&b).add(&a.mul(&b.derivative(0)));
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn no_zero_coefficients(a in arb_poly(), b in arb_poly()) {
            let s = a.sub(&b).add(&b).sub(&a);
            prop_assert!(s.is_zero());
        }
    }
}
