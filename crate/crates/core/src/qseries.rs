//! Direct numerical evaluation of the restricted lattice sums near `z = 0`
//! and of the analytic quantities their expansion is built from.
//!
//! The summand `e^{-H(n) z} / prod_j (e^{-z}; e^{-z})_{n_j}` factors over the
//! coordinates, and the only coupling in the summation range is
//! `n_alpha > n_beta`. So `g_l(z)` is a product of one-dimensional sums times a
//! single two-dimensional sum, each truncated with a certified geometric tail
//! bound.

use num_bigint::BigUint;
use num_rational::BigRational;
use serde::Serialize;

use crate::counting::BiasTable;
use crate::error::{Error, Result};
use crate::hp::{Complex, Real};
use crate::residue::{LatticeClass, ResidueConfig};
use crate::saddle::ExpansionLadder;

/// Hard ceiling on the number of terms per coordinate.
pub const MAX_TERMS: usize = 10_000_000;

/// `z = epsilon (1 + i y)`.
#[derive(Clone, Debug)]
pub struct EvaluationPoint {
    epsilon: f64,
    y: f64,
    prec: usize,
    /// Optional cap on each coordinate `n_j`.
    radius: Option<usize>,
    z: Complex,
}

impl EvaluationPoint {
    pub fn new(epsilon: f64, y: f64, prec: usize) -> Result<Self> {
        if epsilon <= 0.0 || !epsilon.is_finite() || !y.is_finite() {
            return Err(Error::Domain(format!(
                "evaluation point needs epsilon > 0, got epsilon={epsilon}, y={y}"
            )));
        }
        let e = Real::from_f64(epsilon, prec);
        let z = Complex::new(e.clone(), &e * Real::from_f64(y, prec));
        Ok(Self {
            epsilon,
            y,
            prec,
            radius: None,
            z,
        })
    }

    pub fn with_radius(mut self, radius: usize) -> Self {
        self.radius = Some(radius);
        self
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn prec(&self) -> usize {
        self.prec
    }

    pub fn z(&self) -> &Complex {
        &self.z
    }
}

/// A truncated sum with a bound on the discarded tail.
#[derive(Clone, Debug)]
pub struct Certified {
    pub value: Complex,
    pub tail: Real,
}

/// Terms `e^{-(n^2/2 + b n) z} / (q;q)_n`, `q = e^{-z}`, for `n = 0..len`, plus
/// the sum of absolute values and a tail bound for everything beyond.
struct Coordinate {
    terms: Vec<Complex>,
    abs_sum: Real,
    tail: Real,
}

fn coordinate_terms(point: &EvaluationPoint, b: &BigRational, target: &Real) -> Result<Coordinate> {
    let prec = point.prec;
    let z = &point.z;
    let q = (-z).exp();
    let q_abs = (-&z.re).exp();
    // t(n+1) = t(n) e^{-(n + 1/2 + b) z} / (1 - q^{n+1})
    let shift = Real::from_rational(&(b + BigRational::new(1.into(), 2.into())), prec);
    let mut step = (-&z.scale(&shift)).exp();
    let mut step_abs = (-(&shift * &z.re)).exp();
    let mut q_pow = q.clone();
    let mut q_pow_abs = q_abs.clone();
    let one = Complex::one(prec);
    let one_r = Real::one(prec);
    let cap = point.radius.unwrap_or(MAX_TERMS);

    let mut t = Complex::one(prec);
    let mut terms = vec![t.clone()];
    let mut abs_sum = Real::one(prec);
    loop {
        let n = terms.len() - 1;
        // ratio bound for every later step
        let rho = &step_abs / (&one_r - &q_pow_abs);
        if rho < one_r {
            let t_abs = t.abs();
            let tail = &t_abs * &rho / (&one_r - &rho);
            if tail <= target * &abs_sum {
                return Ok(Coordinate {
                    terms,
                    abs_sum,
                    tail,
                });
            }
        }
        if n >= cap {
            let tail = if rho < one_r {
                (t.abs() * &rho / (&one_r - &rho)).to_f64()
            } else {
                f64::INFINITY
            };
            return Err(Error::TailBound {
                tail,
                tolerance: target.to_f64(),
            });
        }
        t = &(&t * &step) / &(&one - &q_pow);
        abs_sum = abs_sum + t.abs();
        terms.push(t.clone());
        step = &step * &q;
        step_abs = step_abs * &q_abs;
        q_pow = &q_pow * &q;
        q_pow_abs = q_pow_abs * &q_abs;
    }
}

fn class_sum(c: &Coordinate, residue: u32, modulus: u32, prec: usize) -> Complex {
    c.terms
        .iter()
        .skip(residue as usize)
        .step_by(modulus as usize)
        .fold(Complex::zero(prec), |acc, t| &acc + t)
}

/// `g_{alpha,beta;N,l}^{[K]}(z)` by direct summation, with a certified tail bound.
pub fn g_function_certified(
    cfg: &ResidueConfig,
    ell: &LatticeClass,
    point: &EvaluationPoint,
) -> Result<Certified> {
    let prec = point.prec;
    let n = cfg.modulus();
    let qd = cfg.quad_data();
    let target = Real::from_i64(2, prec).powi(-(prec as i64) - 8);
    let (a, b) = (cfg.alpha_index(), cfg.beta_index());

    let mut value = Complex::one(prec);
    let mut bound_full = Real::one(prec);
    let mut bound_kept = Real::one(prec);
    for j in 0..n as usize {
        if j == a || j == b {
            continue;
        }
        let c = coordinate_terms(point, &qd.b()[j], &target)?;
        value = &value * &class_sum(&c, ell.entries()[j], n, prec);
        bound_full = bound_full * (&c.abs_sum + &c.tail);
        bound_kept = bound_kept * &c.abs_sum;
    }

    let ca = coordinate_terms(point, &qd.b()[a], &target)?;
    let cb = coordinate_terms(point, &qd.b()[b], &target)?;
    let (la, lb) = (ell.entries()[a] as usize, ell.entries()[b] as usize);
    let mut prefix = Complex::zero(prec);
    let mut pair = Complex::zero(prec);
    let len = ca.terms.len();
    let mut next_b = lb;
    for na in (la..len).step_by(n as usize) {
        while next_b < na && next_b < cb.terms.len() {
            prefix = &prefix + &cb.terms[next_b];
            next_b += n as usize;
        }
        pair = &pair + &(&ca.terms[na] * &prefix);
    }
    // pairs with n_alpha beyond the kept range, or n_beta beyond it
    bound_full = bound_full * (&ca.abs_sum + &ca.tail) * (&cb.abs_sum + &cb.tail);
    bound_kept = bound_kept * &ca.abs_sum * &cb.abs_sum;
    value = &value * &pair;
    let tail = bound_full - bound_kept;
    Ok(Certified { value, tail })
}

/// `g_{alpha,beta;N,l}^{[K]}(z)`; fails if the tail bound exceeds
/// `2^{-prec/2}` of the result.
pub fn g_function_numeric(
    cfg: &ResidueConfig,
    ell: &LatticeClass,
    point: &EvaluationPoint,
) -> Result<Complex> {
    let c = g_function_certified(cfg, ell, point)?;
    let tol = Real::from_i64(2, point.prec).powi(-(point.prec as i64) / 2) * c.value.abs();
    if c.tail > tol {
        return Err(Error::TailBound {
            tail: c.tail.to_f64(),
            tolerance: tol.to_f64(),
        });
    }
    Ok(c.value)
}

/// `e^{pi^2 N / (12 z)} / (2^{K+1/2} pi^{N/2}) sum_{r<R} E_r z^{r/2}` with the
/// principal square root.
pub fn expansion_numeric(
    ladder: &ExpansionLadder,
    point: &EvaluationPoint,
    order: usize,
) -> Result<Complex> {
    if order == 0 || order > ladder.order() {
        return Err(Error::InvalidConfig(format!(
            "order {order} outside the ladder range 1..={}",
            ladder.order()
        )));
    }
    let prec = point.prec;
    let cfg = ladder.cfg();
    let n = cfg.modulus() as i64;
    let z = &point.z;
    let pi = Real::pi(prec);
    let growth = Complex::from_real(&pi * &pi * Real::from_i64(n, prec) / Real::from_i64(12, prec));
    let growth = (&growth / z).exp();
    let pre = Real::one(prec)
        / (Real::from_i64(2, prec).powi(cfg.floor() as i64)
            * Real::from_i64(2, prec).sqrt()
            * pi.powi(n).sqrt());
    let root = z.sqrt();
    let mut acc = Complex::zero(prec);
    let mut power = Complex::one(prec);
    for e in &ladder.e()[..order] {
        acc = &acc + &power.scale(e);
        power = &power * &root;
    }
    Ok((&growth * &acc).scale(&pre))
}

/// `sum_l zeta_N^{k N H(l)} g_l(z)`.
pub fn twisted_class_sum(cfg: &ResidueConfig, point: &EvaluationPoint, k: u32) -> Result<Complex> {
    let prec = point.prec;
    let n = cfg.modulus();
    let qd = cfg.quad_data();
    let mut acc = Complex::zero(prec);
    for ell in LatticeClass::all(n) {
        let g = g_function_numeric(cfg, &ell, point)?;
        let w = (ell.weight_residue(&qd) as u64 * k as u64 % n as u64) as u32;
        acc = &acc + &(&root_of_unity(n, w, prec) * &g);
    }
    Ok(acc)
}

/// `zeta_N^k`.
pub fn root_of_unity(n: u32, k: u32, prec: usize) -> Complex {
    let angle =
        Real::from_i64(2 * k as i64, prec) * Real::pi(prec) / Real::from_i64(n as i64, prec);
    Complex::new(angle.cos(), angle.sin())
}

/// `sum_{n <= n_max} d_ab(n) zeta_N^{kn} e^{-n z / N}`, the truncated generating
/// series at `q = zeta_N^k e^{-z/N}`.
pub fn truncated_series_value(table: &BiasTable, point: &EvaluationPoint, k: u32) -> Complex {
    let prec = point.prec;
    let n = table.cfg().modulus();
    let zn = point
        .z
        .scale(&(Real::one(prec) / Real::from_i64(n as i64, prec)));
    let q = &root_of_unity(n, k, prec) * &(-&zn).exp();
    let mut power = Complex::one(prec);
    let mut acc = Complex::zero(prec);
    for row in table.rows() {
        if row.d_ab != BigUint::ZERO {
            let c = Real::from_bigint(&row.d_ab.clone().into(), prec);
            acc = &acc + &power.scale(&c);
        }
        power = &power * &q;
    }
    acc
}

/// `Li_2(w)` for `|w| <= 1/2` via the defining series.
pub fn li2(w: &Complex) -> Result<Complex> {
    let prec = w.prec();
    let r = w.abs();
    let half = Real::from_f64(0.5, prec);
    if r > half {
        return Err(Error::Domain("Li2 series used only for |w| <= 1/2".into()));
    }
    let one = Real::one(prec);
    let target = Real::from_i64(2, prec).powi(-(prec as i64) - 8);
    let mut acc = Complex::zero(prec);
    let mut power = w.clone();
    let mut power_abs = r.clone();
    let mut k: i64 = 1;
    loop {
        let k2 = Real::from_i64(k * k, prec);
        acc = &acc + &power.scale(&(&one / &k2));
        let next = Real::from_i64((k + 1) * (k + 1), prec);
        // sum_{j>k} |w|^j / j^2 <= |w|^{k+1} / ((k+1)^2 (1 - |w|))
        let tail = &power_abs * &r / (next * (&one - &r));
        if tail <= target || r.is_zero() {
            return Ok(acc);
        }
        power = &power * w;
        power_abs = power_abs * &r;
        k += 1;
    }
}

/// `N (pi^2/6 - log(2)^2 (1+iy)^2 / 2 - Li_2(2^{-(1+iy)}))`.
pub fn lambda_y(y: f64, modulus: u32, prec: usize) -> Complex {
    let pi = Real::pi(prec);
    let ln2 = Real::ln2(prec);
    let w = Complex::new(Real::one(prec), Real::from_f64(y, prec));
    let w2 = &w * &w;
    let a = Complex::from_real(&pi * &pi / Real::from_i64(6, prec));
    let b = w2.scale(&(&ln2 * &ln2 / Real::from_i64(2, prec)));
    let two_pow = (-&w.scale(&ln2)).exp();
    let li = li2(&two_pow).expect("|2^{-(1+iy)}| = 1/2");
    (&(&a - &b) - &li).scale(&Real::from_i64(modulus as i64, prec))
}

/// `Re(Lambda(y) / (1 + iy)) - pi^2 N / 12`.
pub fn s_y(y: f64, modulus: u32, prec: usize) -> Real {
    let w = Complex::new(Real::one(prec), Real::from_f64(y, prec));
    let q = &lambda_y(y, modulus, prec) / &w;
    let pi = Real::pi(prec);
    q.re - &pi * &pi * Real::from_i64(modulus as i64, prec) / Real::from_i64(12, prec)
}

/// `N (log(2)^2 - pi^2/12)`, the curvature of `s` at the origin.
pub fn s_curvature(modulus: u32, prec: usize) -> Real {
    let pi = Real::pi(prec);
    let ln2 = Real::ln2(prec);
    (&ln2 * &ln2 - &pi * &pi / Real::from_i64(12, prec)) * Real::from_i64(modulus as i64, prec)
}

/// `pi^2/(6z) + Log(z/(2 pi))/2 - z/24`, the expansion of `-Log (q;q)_inf`.
pub fn log_pochhammer_asym(z: &Complex) -> Complex {
    let prec = z.prec();
    let pi = Real::pi(prec);
    let a = &Complex::from_real(&pi * &pi / Real::from_i64(6, prec)) / z;
    let two_pi = Real::from_i64(2, prec) * &pi;
    let b = z
        .scale(&(Real::one(prec) / two_pi))
        .ln()
        .scale(&Real::from_f64(0.5, prec));
    let c = z.scale(&(Real::one(prec) / Real::from_i64(24, prec)));
    &(&a + &b) - &c
}

/// `-sum_k Log(1 - q^k)`, `q = e^{-z}`, with a certified tail bound.
pub fn log_pochhammer_direct(z: &Complex) -> Result<Certified> {
    let prec = z.prec();
    if z.re.sign() != std::cmp::Ordering::Greater {
        return Err(Error::Domain("need Re(z) > 0".into()));
    }
    let q = (-z).exp();
    let q_abs = q.abs();
    let one = Real::one(prec);
    let target = Real::from_i64(2, prec).powi(-(prec as i64) - 8);
    let mut power = q.clone();
    let mut power_abs = q_abs.clone();
    let mut acc = Complex::zero(prec);
    for _ in 0..MAX_TERMS {
        let term = (&Complex::one(prec) - &power).ln();
        acc = &acc - &term;
        power = &power * &q;
        power_abs = power_abs * &q_abs;
        // sum_{j>k} |Log(1 - q^j)| <= |q|^{k+1} / ((1 - |q|)(1 - |q|^{k+1}))
        let tail = &power_abs / ((&one - &q_abs) * (&one - &power_abs));
        if tail <= &target * acc.abs() {
            return Ok(Certified { value: acc, tail });
        }
    }
    Err(Error::TailBound {
        tail: f64::INFINITY,
        tolerance: target.to_f64(),
    })
}

/// Numeric Euler-Maclaurin experiment on `f(x) = x e^{-x^2}`: returns
/// `sum_{k>=0} f(a + (m + N k) h)` and
/// `(1/(N h)) int_a^inf f + sum_{r<R} W_r f^{(r)}(a) h^r`.
pub fn euler_maclaurin_gaussian(
    res: u32,
    modulus: u32,
    a: f64,
    h: f64,
    order: usize,
    prec: usize,
) -> (Real, Real) {
    let ar = Real::from_f64(a, prec);
    let hr = Real::from_f64(h, prec);
    let f = |x: &Real| x * (-(x * x)).exp();
    let mut sum = Real::zero(prec);
    let mut k = 0i64;
    let cutoff = Real::from_i64(2, prec).powi(-(prec as i64) - 8);
    loop {
        let x = &ar + &hr * Real::from_i64(res as i64 + modulus as i64 * k, prec);
        let v = f(&x);
        sum = sum + &v;
        if x > Real::one(prec) && v.abs() < &cutoff * sum.abs() {
            break;
        }
        k += 1;
    }
    // int_a^inf x e^{-x^2} dx = e^{-a^2} / 2
    let integral = (-(&ar * &ar)).exp() / Real::from_i64(2, prec);
    let mut rhs = integral / (Real::from_i64(modulus as i64, prec) * &hr);
    // f^{(r)} = P_r(x) e^{-x^2}, P_0 = x, P_{r+1} = P_r' - 2 x P_r
    let mut p: Vec<i64> = vec![0, 1];
    let gauss = (-(&ar * &ar)).exp();
    let mut h_pow = Real::one(prec);
    for r in 0..order {
        let pv = p.iter().rev().fold(Real::zero(prec), |acc, c| {
            acc * &ar + Real::from_i64(*c, prec)
        });
        let w = Real::from_rational(&crate::saddle::w_exact(res, modulus, r), prec);
        rhs = rhs + w * pv * &gauss * &h_pow;
        h_pow = h_pow * &hr;
        let mut next = vec![0i64; p.len() + 1];
        for (d, c) in p.iter().enumerate() {
            if d > 0 {
                next[d - 1] += c * d as i64;
            }
            next[d + 1] -= 2 * c;
        }
        p = next;
    }
    (sum, rhs)
}

/// One line of a `verify` report.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRecord {
    pub check: String,
    pub epsilon: f64,
    pub y: f64,
    #[serde(rename = "R")]
    pub order: usize,
    pub g: String,
    pub expansion: String,
    pub rel_err: f64,
}

/// Compares the direct sum with the truncated expansion for one class.
pub fn compare_class(
    cfg: &ResidueConfig,
    ell: &LatticeClass,
    ladder: &ExpansionLadder,
    point: &EvaluationPoint,
    order: usize,
) -> Result<ComparisonRecord> {
    let g = g_function_numeric(cfg, ell, point)?;
    let e = expansion_numeric(ladder, point, order)?;
    Ok(ComparisonRecord {
        check: format!("g_vs_expansion ell={:?}", ell.entries()),
        epsilon: point.epsilon,
        y: point.y,
        order,
        g: g.to_decimal(),
        expansion: e.to_decimal(),
        rel_err: g.rel_diff(&e),
    })
}
