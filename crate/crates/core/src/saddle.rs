//! Coefficients of the saddle-point expansion.
//!
//! Every ladder entry `W_r`, `V_{j,r}`, `E_{l,r}` is computed exactly. The
//! Gaussian moments that appear only ever produce values of the form
//! `a * pi^{N/2} + b * pi^{(N-1)/2} / sqrt(2)` with rational `a`, `b`
//! (see [`LadderValue`]), so the whole ladder is kept in that basis and only
//! rounded when a numeric value is requested.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::hp::{self, Real};
use crate::poly::{
    bernoulli_numbers, binomial, double_factorial_odd, factorial, int, polylog_neg_half, rat,
    MultiPoly,
};
use crate::residue::{LatticeClass, ResidueConfig};

/// Truncated series `sum_{m < order} a_m z^{m/2}` with polynomial coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfPowerSeries {
    dim: usize,
    coeffs: Vec<MultiPoly>,
}

impl HalfPowerSeries {
    pub fn zero(dim: usize, order: usize) -> Self {
        Self {
            dim,
            coeffs: vec![MultiPoly::zero(dim); order],
        }
    }

    /// Number of retained half-integer orders.
    pub fn order(&self) -> usize {
        self.coeffs.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Coefficient of `z^{m/2}`.
    pub fn coeff(&self, m: usize) -> &MultiPoly {
        &self.coeffs[m]
    }

    pub fn coeffs(&self) -> &[MultiPoly] {
        &self.coeffs
    }

    pub fn set(&mut self, m: usize, p: MultiPoly) {
        assert_eq!(p.dim(), self.dim);
        self.coeffs[m] = p;
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        Self {
            dim: self.dim,
            coeffs: (0..order)
                .map(|m| self.coeffs[m].add(&other.coeffs[m]))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = Self::zero(self.dim, order);
        for i in 0..order {
            for j in 0..order - i {
                out.coeffs[i + j] = out.coeffs[i + j].add(&self.coeffs[i].mul(&other.coeffs[j]));
            }
        }
        out
    }

    /// `exp` of a series without constant term.
    pub fn exp(&self) -> Result<Self> {
        if self.coeffs.first().is_some_and(|c| !c.is_zero()) {
            return Err(Error::Domain(
                "exponential needs a series with zero constant term".into(),
            ));
        }
        let order = self.order();
        let mut out = Self::zero(self.dim, order);
        if order == 0 {
            return Ok(out);
        }
        out.coeffs[0] = MultiPoly::one(self.dim);
        // r C_r = sum_{m=1}^r m a_m C_{r-m}
        for r in 1..order {
            let mut acc = MultiPoly::zero(self.dim);
            for m in 1..=r {
                if self.coeffs[m].is_zero() {
                    continue;
                }
                let term = self.coeffs[m].mul(&out.coeffs[r - m]);
                acc = acc.add(&term.scale(&int(m as i64)));
            }
            out.coeffs[r] = acc.scale(&rat(1, r as i64));
        }
        Ok(out)
    }
}

/// The exponent `phi(u, z)` of the saddle-point expansion as a half-power
/// series, retaining `z^{m/2}` for `m < order`.
pub fn phi_series(cfg: &ResidueConfig, order: usize) -> HalfPowerSeries {
    let qd = cfg.quad_data();
    let n = cfg.modulus() as usize;
    let mut series = HalfPowerSeries::zero(n, order);
    let max_r = order + 2;
    let bern = bernoulli_numbers(max_r);
    let li: Vec<BigRational> = (0..=max_r.saturating_sub(2))
        .map(polylog_neg_half)
        .collect();

    for m in 1..order {
        let mut g = MultiPoly::zero(n);
        // B_r(-u/sqrt z) z^{r-1} contributes u^k z^{(2r-2-k)/2}
        for r in 2..=m + 2 {
            let k = 2 * r as i64 - 2 - m as i64;
            if k < 0 || k > r as i64 || (r == 2 && k == 2) {
                continue;
            }
            let k = k as u32;
            let sign = if k.is_multiple_of(2) { 1 } else { -1 };
            let c = -BigRational::from_integer(binomial(r as u32, k))
                * &bern[r - k as usize]
                * int(sign)
                * &li[r - 2]
                / BigRational::from_integer(factorial(r as u32));
            for j in 0..n {
                g.add_term(monomial_exps(n, j, k), c.clone());
            }
        }
        if m == 1 {
            for (j, bj) in qd.b().iter().enumerate() {
                g.add_term(monomial_exps(n, j, 1), -bj.clone());
            }
        }
        if m == 2 {
            g.add_term(vec![0; n], rat(-(n as i64), 24));
        }
        series.set(m, g);
    }
    series
}

fn monomial_exps(dim: usize, i: usize, k: u32) -> Vec<u32> {
    let mut e = vec![0; dim];
    e[i] = k;
    e
}

/// `C_0, ..., C_{order-1}`, the coefficients of `exp(phi)`.
pub fn c_polynomials(cfg: &ResidueConfig, order: usize) -> Vec<MultiPoly> {
    let c = phi_series(cfg, order)
        .exp()
        .expect("phi has no constant term")
        .coeffs
        .clone();
    for (r, p) in c.iter().enumerate() {
        let deg = p.total_degree().unwrap_or(0);
        assert!(deg as usize <= 3 * r, "deg C_{r} = {deg} exceeds {}", 3 * r);
    }
    debug_assert!(c
        .first()
        .is_none_or(|c0| *c0 == MultiPoly::one(cfg.modulus() as usize)));
    c
}

/// Exact `W_r` for offset `res = [l_alpha - l_beta]_N`.
pub fn w_exact(res: u32, modulus: u32, r: usize) -> BigRational {
    let m = BigRational::from_integer(BigInt::from(res));
    let nn = BigRational::from_integer(BigInt::from(modulus));
    if r == 0 {
        return rat(1, 2) - &m / &nn;
    }
    let bern = bernoulli_numbers(r + 1);
    let pow = |x: &BigRational, k: usize| num_traits::pow(x.clone(), k);
    let fact = |k: usize| BigRational::from_integer(factorial(k as u32));
    let mut w = (rat(1, 2) - &m / (int(2) * &nn)) * pow(&m, r) / fact(r);
    for t in 1..=r.div_ceil(2) {
        let num = &bern[2 * t] * (pow(&m, 2 * t) - pow(&nn, 2 * t)) * pow(&m, r + 1 - 2 * t);
        w += num / (fact(2 * t) * fact(r + 1 - 2 * t) * &nn);
    }
    if r % 2 == 1 {
        w -= &bern[r + 1] * pow(&m, r + 1) / (fact(r + 1) * &nn);
    }
    w
}

/// `W_0, ..., W_{order-1}` at working precision.
pub fn w_coefficients(
    cfg: &ResidueConfig,
    ell: &LatticeClass,
    order: usize,
    prec: usize,
) -> Vec<Real> {
    let res = ell.offset(cfg);
    (0..order)
        .map(|r| Real::from_rational(&w_exact(res, cfg.modulus(), r), prec))
        .collect()
}

/// `even * pi^{N/2} + odd * pi^{(N-1)/2} / sqrt(2)` for a fixed `N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LadderValue {
    pub even: BigRational,
    pub odd: BigRational,
}

impl LadderValue {
    pub fn zero() -> Self {
        Self {
            even: BigRational::zero(),
            odd: BigRational::zero(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            even: &self.even + &other.even,
            odd: &self.odd + &other.odd,
        }
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self {
            even: &self.even * c,
            odd: &self.odd * c,
        }
    }

    pub fn eval(&self, modulus: u32, prec: usize) -> Real {
        let pi = Real::pi(prec);
        let n = modulus as i64;
        let sqrt_pi = pi.sqrt();
        // pi^{N/2} and pi^{(N-1)/2}
        let (p_even, p_odd) = if n % 2 == 0 {
            let a = pi.powi(n / 2);
            let b = &a / &sqrt_pi;
            (a, b)
        } else {
            let b = pi.powi((n - 1) / 2);
            let a = &b * &sqrt_pi;
            (a, b)
        };
        let sqrt2 = Real::from_i64(2, prec).sqrt();
        Real::from_rational(&self.even, prec) * p_even
            + Real::from_rational(&self.odd, prec) * p_odd / sqrt2
    }
}

/// `int_R u^k e^{-u^2} du / sqrt(pi)`.
fn full_moment(k: u32) -> BigRational {
    if k % 2 == 1 {
        return BigRational::zero();
    }
    BigRational::new(double_factorial_odd(k / 2), BigInt::from(2).pow(k / 2))
}

/// `int_R u^k e^{-2u^2} du / sqrt(pi/2)`.
fn doubled_moment(k: u32) -> BigRational {
    if k % 2 == 1 {
        return BigRational::zero();
    }
    BigRational::new(double_factorial_odd(k / 2), BigInt::from(4).pow(k / 2))
}

/// `int_{u_a >= u_b} u_a^a u_b^b e^{-u_a^2 - u_b^2}` in the basis
/// `{pi, sqrt(pi) / sqrt(2)}`.
fn wedge_moment(a: u32, b: u32) -> LadderValue {
    // u_a = (t+s)/sqrt2, u_b = (t-s)/sqrt2 with s >= 0
    let mut even = BigRational::zero();
    let mut odd = BigRational::zero();
    for i in 0..=a {
        for k in 0..=b {
            let p = i + k;
            let q = a + b - p;
            if q % 2 == 1 {
                continue;
            }
            let mut c = BigRational::from_integer(binomial(a, i) * binomial(b, k));
            if k % 2 == 1 {
                c = -c;
            }
            // t-moment over R, divided by sqrt(pi)
            c *= full_moment(q);
            // half-line s-moment: Gamma((p+1)/2) / 2
            if p % 2 == 0 {
                // sqrt(pi) (p-1)!! / 2^{p/2} / 2
                c *= BigRational::new(double_factorial_odd(p / 2), BigInt::from(2).pow(p / 2 + 1));
                // 2^{-(a+b)/2}, a+b even here
                c /= BigRational::from_integer(BigInt::from(2).pow((a + b) / 2));
                even += c;
            } else {
                c *= BigRational::new(factorial((p - 1) / 2), BigInt::from(2));
                // 2^{-(a+b)/2} = 2^{-(a+b-1)/2} / sqrt2
                c /= BigRational::from_integer(BigInt::from(2).pow((a + b - 1) / 2));
                odd += c;
            }
        }
    }
    LadderValue { even, odd }
}

/// `int_{u_alpha >= u_beta} P(u) e^{-u^T u} du`, exactly. Indices are zero-based.
pub fn halfspace_integral_exact(p: &MultiPoly, alpha: usize, beta: usize) -> LadderValue {
    let mut total = LadderValue::zero();
    for (e, c) in p.terms() {
        let mut others = c.clone();
        for (j, &k) in e.iter().enumerate() {
            if j != alpha && j != beta {
                others *= full_moment(k);
            }
        }
        if others.is_zero() {
            continue;
        }
        total = total.add(&wedge_moment(e[alpha], e[beta]).scale(&others));
    }
    total
}

/// `int_{u_alpha >= u_beta} P(u) e^{-u^T u} du` at working precision.
pub fn gaussian_halfspace_integral(p: &MultiPoly, alpha: u32, beta: u32, prec: usize) -> Real {
    let v = halfspace_integral_exact(p, alpha as usize - 1, beta as usize - 1);
    v.eval(p.dim() as u32, prec)
}

/// `int_{R^{N-1}} [d^d/du_alpha^d (C e^{-u^T u})]_{u_alpha = u_beta} du`, which lands
/// purely on the `pi^{(N-1)/2} / sqrt 2` basis element.
pub fn diagonal_derivative_integral(
    c: &MultiPoly,
    alpha: usize,
    beta: usize,
    d: usize,
) -> BigRational {
    // d/du_alpha (P e^{-uu}) = (dP/du_alpha - 2 u_alpha P) e^{-uu}
    let mut p = c.clone();
    for _ in 0..d {
        p = p.derivative(alpha).sub(&p.mul_var(alpha, 1).scale(&int(2)));
    }
    let p = p.identify(alpha, beta);
    let mut total = BigRational::zero();
    for (e, coeff) in p.terms() {
        let mut t = coeff.clone();
        for (j, &k) in e.iter().enumerate() {
            if j == alpha {
                continue;
            }
            t *= if j == beta {
                doubled_moment(k)
            } else {
                full_moment(k)
            };
            if t.is_zero() {
                break;
            }
        }
        total += t;
    }
    total
}

/// The `l`-independent part of the ladder: `C_j` and all diagonal integrals.
#[derive(Clone, Debug)]
pub struct LadderEngine {
    cfg: ResidueConfig,
    order: usize,
    c: Vec<MultiPoly>,
    halfspace: Vec<LadderValue>,
    // diagonal[j][d] for j + d + 1 < order
    diagonal: Vec<Vec<BigRational>>,
}

impl LadderEngine {
    pub fn new(cfg: &ResidueConfig, order: usize) -> Result<Self> {
        Self::new_with(cfg, order, Exec::default())
    }

    pub fn new_with(cfg: &ResidueConfig, order: usize, exec: Exec) -> Result<Self> {
        if order == 0 {
            return Err(Error::InvalidConfig(
                "expansion order must be at least 1".into(),
            ));
        }
        let c = c_polynomials(cfg, order);
        let (a, b) = (cfg.alpha_index(), cfg.beta_index());
        let halfspace = exec::map_slice(exec, &c, |p| halfspace_integral_exact(p, a, b));
        let diagonal = exec::map_range(exec, order, |j| {
            (0..order.saturating_sub(j + 1))
                .map(|d| diagonal_derivative_integral(&c[j], a, b, d))
                .collect()
        });
        Ok(Self {
            cfg: *cfg,
            order,
            c,
            halfspace,
            diagonal,
        })
    }

    pub fn cfg(&self) -> &ResidueConfig {
        &self.cfg
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn c_polys(&self) -> &[MultiPoly] {
        &self.c
    }

    fn n_pow(&self, k: u32) -> BigRational {
        BigRational::from_integer(BigInt::from(self.cfg.modulus()).pow(k))
    }

    /// Exact `V_{j,r}` for `r >= -N` at offset `res`.
    pub fn v_exact(&self, res: u32, j: usize, r: i64) -> LadderValue {
        let n = self.cfg.modulus() as i64;
        assert!(r >= -n, "V_{{j,r}} is defined for r >= -N");
        if r == -n {
            return self.halfspace[j].scale(&(BigRational::one() / self.n_pow(n as u32)));
        }
        let d = (r + n - 1) as usize;
        let w = w_exact(res, self.cfg.modulus(), d);
        LadderValue {
            even: BigRational::zero(),
            odd: w * &self.diagonal[j][d] / self.n_pow(n as u32 - 1),
        }
    }

    /// Exact `E_r = sum_{j<=r} V_{j, r-j-N}` at offset `res`.
    pub fn e_exact(&self, res: u32, r: usize) -> LadderValue {
        let n = self.cfg.modulus() as i64;
        (0..=r).fold(LadderValue::zero(), |acc, j| {
            acc.add(&self.v_exact(res, j, r as i64 - j as i64 - n))
        })
    }

    /// Ladder for the class `ell`, evaluated at `prec` bits.
    pub fn ladder(&self, ell: &LatticeClass, prec: usize) -> ExpansionLadder {
        self.ladder_for_residue(ell.offset(&self.cfg), prec)
    }

    pub fn ladder_for_residue(&self, res: u32, prec: usize) -> ExpansionLadder {
        let n = self.cfg.modulus();
        let e_exact: Vec<LadderValue> = (0..self.order).map(|r| self.e_exact(res, r)).collect();
        let e: Vec<Real> = e_exact.iter().map(|v| v.eval(n, prec)).collect();
        let delta = e_exact
            .iter()
            .zip(&e)
            .map(|(v, lo)| lo.rel_diff(&v.eval(n, 2 * prec).with_prec(2 * prec)))
            .collect();
        let mut v = BTreeMap::new();
        for r in 0..self.order as i64 {
            for j in 0..=r {
                let idx = r - j - n as i64;
                v.insert(
                    (j as usize, idx),
                    self.v_exact(res, j as usize, idx).eval(n, prec),
                );
            }
        }
        let w = (0..self.order)
            .map(|r| Real::from_rational(&w_exact(res, n, r), prec))
            .collect();
        ExpansionLadder {
            cfg: self.cfg,
            res,
            prec,
            w,
            v,
            e,
            e_exact,
            delta,
        }
    }
}

/// Ladder coefficients for one residue offset `[l_alpha - l_beta]_N`.
#[derive(Clone, Debug)]
pub struct ExpansionLadder {
    cfg: ResidueConfig,
    res: u32,
    prec: usize,
    w: Vec<Real>,
    v: BTreeMap<(usize, i64), Real>,
    e: Vec<Real>,
    e_exact: Vec<LadderValue>,
    delta: Vec<f64>,
}

#[derive(Serialize)]
struct LadderRecord {
    #[serde(rename = "N")]
    n: u32,
    #[serde(rename = "K")]
    k: u32,
    alpha: u32,
    beta: u32,
    res: u32,
    precision: usize,
    #[serde(rename = "E")]
    e: Vec<String>,
    #[serde(rename = "E_delta")]
    delta: Vec<f64>,
}

impl ExpansionLadder {
    pub fn cfg(&self) -> &ResidueConfig {
        &self.cfg
    }

    pub fn residue(&self) -> u32 {
        self.res
    }

    pub fn precision(&self) -> usize {
        self.prec
    }

    pub fn order(&self) -> usize {
        self.e.len()
    }

    pub fn w(&self) -> &[Real] {
        &self.w
    }

    pub fn v(&self, j: usize, r: i64) -> Option<&Real> {
        self.v.get(&(j, r))
    }

    pub fn e(&self) -> &[Real] {
        &self.e
    }

    pub fn e_exact(&self) -> &[LadderValue] {
        &self.e_exact
    }

    /// Relative change of each `E_r` when the precision is doubled.
    pub fn precision_delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rec = LadderRecord {
            n: self.cfg.modulus(),
            k: self.cfg.floor(),
            alpha: self.cfg.alpha(),
            beta: self.cfg.beta(),
            res: self.res,
            precision: self.prec,
            e: self.e.iter().map(Real::to_decimal).collect(),
            delta: self.delta.clone(),
        };
        serde_json::to_value(rec).expect("ladder serializes")
    }
}

/// `E_{l,0..order}` for a single class.
pub fn e_coefficients(
    cfg: &ResidueConfig,
    ell: &LatticeClass,
    order: usize,
    prec: usize,
) -> Result<ExpansionLadder> {
    Ok(LadderEngine::new(cfg, order)?.ladder(ell, prec))
}

/// `V_{j,r}` for the requested `r` values.
pub fn v_coefficients(
    cfg: &ResidueConfig,
    ell: &LatticeClass,
    j: usize,
    rs: &[i64],
    prec: usize,
) -> Result<Vec<Real>> {
    let n = cfg.modulus() as i64;
    let top = rs.iter().copied().max().unwrap_or(-n);
    if rs.iter().any(|&r| r < -n) {
        return Err(Error::Domain("V_{j,r} needs r >= -N".into()));
    }
    let order = (j as i64 + top + n + 1).max(j as i64 + 1) as usize;
    let engine = LadderEngine::new(cfg, order)?;
    let res = ell.offset(cfg);
    Ok(rs
        .iter()
        .map(|&r| engine.v_exact(res, j, r).eval(cfg.modulus(), prec))
        .collect())
}

/// `c_{A,B,r}` with `A = twice_a / 2`; reciprocal Gamma vanishes at its poles.
pub fn c_abr(twice_a: u32, b: &Real, r: u32, prec: usize) -> Real {
    let b = b.with_prec(prec);
    let four_b = Real::from_i64(4, prec) * &b;
    let lead = (-(Real::one(prec) / four_b)).powi(r as i64);
    // B^{A+1/2} = sqrt(B)^{2A+1}
    let b_pow = b.sqrt().powi(twice_a as i64 + 1);
    let g_up = hp::gamma_half_integer(twice_a + 2 * r + 3, prec);
    let g_down_inv = hp::recip_gamma_half(twice_a as i64 - 2 * r as i64 + 3, prec);
    let denom =
        Real::from_i64(2, prec) * Real::pi(prec).sqrt() * Real::from_bigint(&factorial(r), prec);
    lead * b_pow * g_up * g_down_inv / denom
}

/// `B = (pi/2) sqrt(N/3)`.
pub fn saddle_b(modulus: u32, prec: usize) -> Real {
    let n = Real::from_i64(modulus as i64, prec);
    Real::pi(prec) / Real::from_i64(2, prec) * (n / Real::from_i64(3, prec)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    const P: usize = 128;

    fn cfg(n: u32, k: u32, a: u32, b: u32) -> ResidueConfig {
        ResidueConfig::new(n, k, a, b).unwrap()
    }

    fn c1_closed_form(c: &ResidueConfig) -> MultiPoly {
        let n = c.modulus() as usize;
        let qd = c.quad_data();
        let mut p = MultiPoly::zero(n);
        for j in 0..n {
            let lin = -(rat(j as i64 + 1, n as i64) + int(qd.e()[j]));
            p.add_term(monomial_exps(n, j, 1), lin);
            p.add_term(monomial_exps(n, j, 3), rat(1, 3));
        }
        p
    }

    #[test]
    fn c0_and_c1_closed_forms() {
        for n in 2..=5 {
            for k in 0..=4 {
                let c = cfg(n, k, 1, 2);
                let polys = c_polynomials(&c, 3);
                assert_eq!(polys[0], MultiPoly::one(n as usize));
                assert_eq!(polys[1], c1_closed_form(&c), "N={n} K={k}");
                assert!(polys[1].coeff(&vec![0; n as usize]).is_zero());
            }
        }
    }

    #[test]
    fn c1_example_n2_k1() {
        let c = c_polynomials(&cfg(2, 1, 1, 2), 2);
        assert_eq!(c[1].coeff(&[1, 0]), rat(-3, 2));
        assert_eq!(c[1].coeff(&[0, 1]), int(-1));
        assert_eq!(c[1].coeff(&[3, 0]), rat(1, 3));
        assert_eq!(c[1].coeff(&[0, 3]), rat(1, 3));
        assert_eq!(c[1].len(), 4);
    }

    #[test]
    fn degree_bound() {
        let c = c_polynomials(&cfg(3, 2, 1, 3), 7);
        for (r, p) in c.iter().enumerate() {
            assert!(p.total_degree().unwrap_or(0) as usize <= 3 * r);
        }
        assert_eq!(c[6].total_degree(), Some(18));
    }

    /// Independent numeric exponentiation of phi at a sample point.
    #[test]
    fn c2_matches_numeric_exponential() {
        let c = cfg(2, 0, 1, 2);
        let phi = phi_series(&c, 3);
        let polys = c_polynomials(&c, 3);
        let u = [0.37, -0.81];
        let g1 = phi.coeff(1).eval_f64(&u);
        let g2 = phi.coeff(2).eval_f64(&u);
        let want = g2 + g1 * g1 / 2.0;
        assert!((polys[2].eval_f64(&u) - want).abs() < 1e-14);
    }

    /// `W_r = -B_{r+1}(m/N) N^r / (r+1)!`, the Hurwitz-zeta form.
    #[test]
    fn w_matches_hurwitz_form() {
        for n in 2..=6u32 {
            for m in 1..=n {
                for r in 0..10usize {
                    let x = rat(m as i64, n as i64);
                    let b = crate::poly::bernoulli_poly(r + 1).eval(&[x]);
                    let want = -b * BigRational::from_integer(BigInt::from(n).pow(r as u32))
                        / BigRational::from_integer(factorial(r as u32 + 1));
                    assert_eq!(w_exact(m, n, r), want, "N={n} m={m} r={r}");
                }
            }
        }
    }

    #[test]
    fn w0_examples() {
        assert_eq!(w_exact(2, 2, 0), rat(-1, 2));
        assert_eq!(w_exact(1, 3, 0), rat(1, 6));
        for n in 2..=7u32 {
            for m in 1..=n {
                let w = w_exact(m, n, 0);
                assert!(w >= rat(-1, 2) && w <= rat(1, 2) - rat(1, n as i64));
            }
        }
    }

    #[test]
    fn halfspace_examples() {
        let pi = Real::pi(P);
        let one2 = MultiPoly::one(2);
        let got = gaussian_halfspace_integral(&one2, 1, 2, P);
        assert!(got.rel_diff(&(&pi / Real::from_i64(2, P))) < 1e-37);
        let ua = MultiPoly::var(2, 0);
        let want = pi.sqrt() / (Real::from_i64(2, P) * Real::from_i64(2, P).sqrt());
        assert!(gaussian_halfspace_integral(&ua, 1, 2, P).rel_diff(&want) < 1e-37);
        let ub = MultiPoly::var(2, 1);
        assert!(gaussian_halfspace_integral(&ub, 1, 2, P).rel_diff(&-want) < 1e-37);
        let u3 = MultiPoly::var(4, 2);
        assert_eq!(halfspace_integral_exact(&u3, 0, 1), LadderValue::zero());
        // sum of cubes over the wedge vanishes
        let mut cubes = MultiPoly::zero(3);
        for j in 0..3 {
            cubes.add_term(monomial_exps(3, j, 3), int(1));
        }
        assert_eq!(halfspace_integral_exact(&cubes, 0, 2), LadderValue::zero());
    }

    /// Monte-Carlo-free check of the wedge moments by symmetry: the wedge and its
    /// mirror add up to the full-space integral.
    #[test]
    fn wedge_plus_mirror_is_full_space() {
        for a in 0..6 {
            for b in 0..6 {
                let w = wedge_moment(a, b).add(&wedge_moment(b, a));
                let full = full_moment(a) * full_moment(b);
                assert_eq!(w.even, full, "a={a} b={b}");
                assert!(w.odd.is_zero());
            }
        }
    }

    #[test]
    fn v_examples() {
        let c = cfg(2, 0, 1, 2);
        let pi = Real::pi(P);
        let ell = LatticeClass::new(vec![0, 0], 2).unwrap();
        let v = v_coefficients(&c, &ell, 0, &[-2, -1], P).unwrap();
        assert!(v[0].rel_diff(&(&pi / Real::from_i64(8, P))) < 1e-37);
        let s2 = Real::from_i64(2, P).sqrt();
        let want = -(pi.sqrt() / (Real::from_i64(4, P) * &s2));
        assert!(v[1].rel_diff(&want) < 1e-37);
        let v1 = v_coefficients(&c, &ell, 1, &[-2], P).unwrap();
        let want = pi.sqrt() / (Real::from_i64(16, P) * &s2);
        assert!(v1[0].rel_diff(&want) < 1e-37);
    }

    fn e1_closed_form(c: &ResidueConfig, res: u32) -> Real {
        let n = c.modulus() as i64;
        let qd = c.quad_data();
        let (a, b) = (c.alpha() as i64, c.beta() as i64);
        let ea = qd.e()[c.alpha_index()];
        let eb = qd.e()[c.beta_index()];
        let bracket = int(1) - rat(2 * res as i64, n) + rat(b - a + n * (eb - ea), n * n);
        let pre = Real::pi(P).powi(n - 1).sqrt()
            / (Real::from_i64(2, P)
                * Real::from_i64(2, P).sqrt()
                * Real::from_i64(n, P).powi(n - 1));
        pre * Real::from_rational(&bracket, P)
    }

    #[test]
    fn e0_e1_closed_forms() {
        for n in 2..=4u32 {
            for k in 0..=2 {
                for (a, b) in [(1, 2), (2, 1), (n, 1)] {
                    let c = cfg(n, k, a, b);
                    let engine = LadderEngine::new(&c, 2).unwrap();
                    for res in 1..=n {
                        let l = engine.ladder_for_residue(res, P);
                        let e0 = Real::pi(P).powi(n as i64).sqrt()
                            / (Real::from_i64(2, P) * Real::from_i64(n as i64, P).powi(n as i64));
                        assert!(l.e()[0].rel_diff(&e0) < 1e-30);
                        assert!(l.e()[1].rel_diff(&e1_closed_form(&c, res)) < 1e-30);
                    }
                }
            }
        }
    }

    #[test]
    fn e1_example_value() {
        let c = cfg(2, 0, 1, 2);
        let ell = LatticeClass::new(vec![0, 0], 2).unwrap();
        let l = e_coefficients(&c, &ell, 2, P).unwrap();
        assert!((l.e()[1].to_f64() + 0.2350).abs() < 1e-4);
        let want = -3.0 * std::f64::consts::PI.sqrt() / (16.0 * 2f64.sqrt());
        assert!((l.e()[1].to_f64() - want).abs() < 1e-15);
    }

    #[test]
    fn precision_doubling_is_stable() {
        let c = cfg(2, 0, 1, 2);
        let engine = LadderEngine::new(&c, 5).unwrap();
        let l = engine.ladder_for_residue(1, P);
        for d in l.precision_delta() {
            assert!(*d < 2f64.powi(-(P as i32) / 2));
        }
        let json = l.to_json();
        assert_eq!(json["N"], 2);
        assert_eq!(json["E"].as_array().unwrap().len(), 5);
    }

    #[test]
    fn ladder_sum_identity() {
        let c = cfg(3, 1, 2, 3);
        let engine = LadderEngine::new(&c, 4).unwrap();
        let l = engine.ladder_for_residue(2, P);
        for r in 0..4i64 {
            let mut s = Real::zero(P);
            for j in 0..=r {
                s = s + l.v(j as usize, r - j - 3).unwrap();
            }
            assert!(s.rel_diff(&l.e()[r as usize]) < 1e-35);
        }
    }

    #[test]
    fn c_abr_closed_forms() {
        for n in [2u32, 3, 5, 7] {
            let b = saddle_b(n, P);
            let nf = Real::from_i64(n as i64, P);
            let three = Real::from_i64(3, P);
            let quarter = Real::from_f64(0.25, P);
            let want0 = nf.pow(&quarter)
                / (Real::from_i64(2, P) * Real::from_i64(2, P).sqrt() * three.pow(&quarter));
            assert!(c_abr(0, &b, 0, P).rel_diff(&want0) < 1e-35);
            let want1 = quarter.clone() * (Real::pi(P) * &nf / &three).sqrt();
            assert!(c_abr(1, &b, 0, P).rel_diff(&want1) < 1e-35);
        }
        // Gamma(5/2) / Gamma(1/2) = 3/4
        let got = c_abr(0, &Real::one(P), 1, P);
        let want = -0.25 * 0.75 / (2.0 * std::f64::consts::PI.sqrt());
        assert!((got.to_f64() - want).abs() < 1e-16);
        // reciprocal Gamma pole: A - r + 3/2 = 0 at A = 1/2, r = 2
        assert!(c_abr(1, &Real::one(P), 2, P).is_zero());
    }
}
