//! Asymptotic estimates for `d_{alpha,beta;N}^{[K]}(n)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hp::{self, Real};
use crate::residue::{LatticeClass, QuadraticData, ResidueConfig};
use crate::saddle::{c_abr, saddle_b, LadderEngine};

/// Default ceiling on `N` for the `N^N` class enumeration.
pub const CLASS_LIMIT: u32 = 6;

/// Numeric settings shared by the estimators.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Settings {
    pub precision: usize,
    /// Largest modulus for which lattice classes are enumerated.
    pub class_limit: u32,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            precision: hp::precision_from_env(),
            class_limit: CLASS_LIMIT,
        }
    }
}

impl Settings {
    pub fn with_precision(precision: usize) -> Self {
        Self {
            precision,
            ..Self::default()
        }
    }
}

/// Which formula produced an estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Source {
    TwoTerm,
    Simplified,
    FullSeries,
}

#[derive(Clone, Debug)]
pub struct AsymptoticEstimate {
    pub n: u64,
    pub order: usize,
    pub value: Real,
    /// `(r, contribution)` pairs summing to `value`.
    pub terms: Vec<(usize, Real)>,
    pub source: Source,
}

#[derive(Serialize)]
struct TermRecord {
    r: usize,
    value: String,
}

#[derive(Serialize)]
struct EstimateRecord {
    n: u64,
    #[serde(rename = "R")]
    order: usize,
    value: String,
    terms: Vec<TermRecord>,
    source: Source,
}

impl AsymptoticEstimate {
    fn from_terms(n: u64, terms: Vec<(usize, Real)>, source: Source, prec: usize) -> Self {
        let value = terms.iter().fold(Real::zero(prec), |acc, (_, t)| acc + t);
        Self {
            n,
            order: terms.len(),
            value,
            terms,
            source,
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rec = EstimateRecord {
            n: self.n,
            order: self.order,
            value: self.value.to_decimal(),
            terms: self
                .terms
                .iter()
                .map(|(r, v)| TermRecord {
                    r: *r,
                    value: v.to_decimal(),
                })
                .collect(),
            source: self.source,
        };
        serde_json::to_value(rec).expect("estimate serializes")
    }
}

/// For each residue `n mod N`, the number of classes `l` with
/// `N H(l) = n (mod N)` and `[l_alpha - l_beta]_N = m`, indexed `[n mod N][m - 1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassCounts {
    modulus: u32,
    counts: Vec<Vec<u64>>,
}

impl ClassCounts {
    pub fn new(cfg: &ResidueConfig, settings: &Settings) -> Result<Self> {
        let n = cfg.modulus();
        if n > settings.class_limit {
            return Err(Error::Guard {
                what: "N for lattice-class enumeration",
                limit: settings.class_limit as usize,
                got: n as usize,
            });
        }
        let qd = cfg.quad_data();
        let mut counts = vec![vec![0u64; n as usize]; n as usize];
        for ell in LatticeClass::all(n) {
            let w = ell.weight_residue(&qd) as usize;
            let m = ell.offset(cfg) as usize;
            counts[w][m - 1] += 1;
        }
        Ok(Self { modulus: n, counts })
    }

    /// `(m, count)` for classes matching `n`.
    pub fn for_n(&self, n: u64) -> impl Iterator<Item = (u32, u64)> + '_ {
        let row = &self.counts[(n % self.modulus as u64) as usize];
        row.iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (i as u32 + 1, c))
    }

    pub fn total_for_n(&self, n: u64) -> u64 {
        self.for_n(n).map(|(_, c)| c).sum()
    }
}

/// `#{l_[2] : N H(l_[2], l_alpha, l_beta) = r (mod N)}` over the coordinates other
/// than alpha and beta.
pub fn lattice_class_count(
    cfg: &ResidueConfig,
    r: u32,
    ell_alpha: u32,
    ell_beta: u32,
) -> Result<u64> {
    let n = cfg.modulus();
    if n < 3 {
        return Err(Error::InvalidConfig(
            "lattice class count needs N >= 3".into(),
        ));
    }
    if ell_alpha >= n || ell_beta >= n || r >= n {
        return Err(Error::InvalidConfig("residues must lie in 0..N".into()));
    }
    let qd = cfg.quad_data();
    let (a, b) = (cfg.alpha_index(), cfg.beta_index());
    let free = n as usize - 2;
    let mut count = 0u64;
    let mut digits = vec![0u32; free];
    let mut point = vec![0i64; n as usize];
    loop {
        let mut it = digits.iter();
        for (j, slot) in point.iter_mut().enumerate() {
            *slot = if j == a {
                ell_alpha as i64
            } else if j == b {
                ell_beta as i64
            } else {
                *it.next().unwrap() as i64
            };
        }
        if weight_mod(&qd, &point, n) == r {
            count += 1;
        }
        // odometer
        let mut i = 0;
        while i < free {
            digits[i] += 1;
            if digits[i] < n {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
        if i == free {
            break;
        }
    }
    Ok(count)
}

fn weight_mod(qd: &QuadraticData, point: &[i64], n: u32) -> u32 {
    let w = qd.scaled_weight(point).expect("dimension matches");
    w.rem_euclid(n as i64) as u32
}

fn growth(n: u64, prec: usize) -> Real {
    // e^{pi sqrt(n/3)}
    let x = Real::from_i64(n as i64, prec) / Real::from_i64(3, prec);
    (Real::pi(prec) * x.sqrt()).exp()
}

fn quarter_root(x: &Real) -> Real {
    x.sqrt().sqrt()
}

fn correction_shift(cfg: &ResidueConfig) -> i64 {
    // beta - alpha + N (e_beta - e_alpha)
    let qd = cfg.quad_data();
    let n = cfg.modulus() as i64;
    cfg.beta() as i64 - cfg.alpha() as i64
        + n * (qd.e()[cfg.beta_index()] - qd.e()[cfg.alpha_index()])
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidConfig(
            "asymptotic estimates need n >= 1".into(),
        ));
    }
    Ok(())
}

/// Two-term estimate summing over the lattice classes compatible with `n`.
pub fn main_two_term(
    cfg: &ResidueConfig,
    n: u64,
    settings: &Settings,
) -> Result<AsymptoticEstimate> {
    check_n(n)?;
    let counts = ClassCounts::new(cfg, settings)?;
    Ok(two_term_from_counts(cfg, &counts, n, settings.precision))
}

pub fn two_term_from_counts(
    cfg: &ResidueConfig,
    counts: &ClassCounts,
    n: u64,
    prec: usize,
) -> AsymptoticEstimate {
    let big_n = cfg.modulus() as i64;
    let nr = Real::from_i64(n as i64, prec);
    let three_q = quarter_root(&Real::from_i64(3, prec));
    let n_q = quarter_root(&nr);
    let pre = growth(n, prec)
        / (two_pow(cfg.floor() + 3, prec)
            * &three_q
            * Real::from_i64(big_n, prec).powi(big_n - 1)
            * &n_q
            * &n_q
            * &n_q);
    let shift = correction_shift(cfg);
    let total = counts.total_for_n(n) as i64;
    let numer: i64 = counts
        .for_n(n)
        .map(|(m, c)| c as i64 * (big_n * big_n - 2 * big_n * m as i64 + shift))
        .sum();
    let denom = Real::from_i64(2, prec) * &three_q * Real::from_i64(big_n, prec).sqrt() * &n_q;
    let t0 = &pre * Real::from_i64(total, prec);
    let t1 = &pre * Real::from_i64(numer, prec) / denom;
    AsymptoticEstimate::from_terms(n, vec![(0, t0), (1, t1)], Source::TwoTerm, prec)
}

fn two_pow(k: u32, prec: usize) -> Real {
    Real::from_i64(2, prec).powi(k as i64)
}

/// Residue-independent two-term estimate, valid for `N = 2` or `N >= 5`.
pub fn main_simplified(
    cfg: &ResidueConfig,
    n: u64,
    settings: &Settings,
) -> Result<AsymptoticEstimate> {
    check_n(n)?;
    let big_n = cfg.modulus() as i64;
    if big_n == 3 || big_n == 4 {
        return Err(Error::Domain(
            "the simplified formula requires N = 2 or N >= 5; use the two-term formula for N = 3, 4".into(),
        ));
    }
    let prec = settings.precision;
    let nr = Real::from_i64(n as i64, prec);
    let three_q = quarter_root(&Real::from_i64(3, prec));
    let n_q = quarter_root(&nr);
    let pre = growth(n, prec) / (two_pow(cfg.floor() + 3, prec) * &three_q * &n_q * &n_q * &n_q);
    let numer = -big_n + correction_shift(cfg);
    let denom = Real::from_i64(2, prec) * &three_q * Real::from_i64(big_n, prec).sqrt() * &n_q;
    let t1 = &pre * Real::from_i64(numer, prec) / denom;
    Ok(AsymptoticEstimate::from_terms(
        n,
        vec![(0, pre), (1, t1)],
        Source::Simplified,
        prec,
    ))
}

/// `diff n e^{-pi sqrt(n/3)}`, the normalisation used for the bias constants.
pub fn scaled_difference(diff: &num_bigint::BigInt, n: u64, prec: usize) -> Real {
    Real::from_bigint(diff, prec) * Real::from_i64(n as i64, prec) / growth(n, prec)
}

/// Leading estimate of `d_{1,2;2}^{[K]}(n) - d_{2,1;2}^{[K]}(n)`.
pub fn parity_bias_estimate(floor: u32, n: u64, prec: usize) -> Result<Real> {
    check_n(n)?;
    let v = growth(n, prec)
        / (two_pow(floor + 3, prec)
            * Real::from_i64(6, prec).sqrt()
            * Real::from_i64(n as i64, prec));
    Ok(if floor % 2 == 1 { -v } else { v })
}

/// Limit of `(d_ab - d_ba) n e^{-pi sqrt(n/3)}` for `N = 2`.
pub fn parity_bias_constant(floor: u32, prec: usize) -> Real {
    let v = Real::one(prec) / (two_pow(floor + 3, prec) * Real::from_i64(6, prec).sqrt());
    if floor % 2 == 1 {
        -v
    } else {
        v
    }
}

/// Branch constant for `N = 3`, `K = 0`, `(alpha, beta) = (1, 2)`, by `n mod 3`.
pub fn mod3_bias_constant(n: u64) -> (i64, i64) {
    match n % 3 {
        0 => (1, 24),
        1 => (1, 6),
        _ => (-1, 12),
    }
}

/// Leading estimate of `d_{1,2;3}^{[0]}(n) - d_{2,1;3}^{[0]}(n)`.
pub fn mod3_bias_estimate(n: u64, prec: usize) -> Result<Real> {
    check_n(n)?;
    let (p, q) = mod3_bias_constant(n);
    Ok(growth(n, prec) * Real::from_i64(p, prec)
        / (Real::from_i64(q, prec) * Real::from_i64(n as i64, prec)))
}

/// The truncated expansion through order `R - 1` in `n^{-1/4}`.
pub fn full_series_estimate(
    cfg: &ResidueConfig,
    n: u64,
    order: usize,
    settings: &Settings,
) -> Result<AsymptoticEstimate> {
    check_n(n)?;
    let counts = ClassCounts::new(cfg, settings)?;
    let engine = LadderEngine::new(cfg, order)?;
    Ok(full_series_from_engine(
        &engine,
        &counts,
        n,
        settings.precision,
    ))
}

/// Same as [`full_series_estimate`] with a prebuilt ladder engine and class table.
pub fn full_series_from_engine(
    engine: &LadderEngine,
    counts: &ClassCounts,
    n: u64,
    prec: usize,
) -> AsymptoticEstimate {
    let cfg = engine.cfg();
    let big_n = cfg.modulus();
    let order = engine.order();
    let b = saddle_b(big_n, prec);
    let pi = Real::pi(prec);
    let pi_half_n = pi.powi(big_n as i64).sqrt();
    let sqrt2 = Real::from_i64(2, prec).sqrt();
    let pre = growth(n, prec) / (two_pow(cfg.floor(), prec) * sqrt2 * pi_half_n);
    let ratio = Real::from_i64(big_n as i64, prec) / Real::from_i64(n as i64, prec);
    let ratio_q = quarter_root(&ratio);

    // sum over classes of E_{l,k}, for each k
    let mut e_sums = vec![Real::zero(prec); order];
    for (m, c) in counts.for_n(n) {
        let ladder = engine.ladder_for_residue(m, prec);
        for (k, e) in ladder.e().iter().enumerate() {
            e_sums[k] = &e_sums[k] + e * Real::from_i64(c as i64, prec);
        }
    }

    let mut terms = Vec::with_capacity(order);
    for r in 0..order {
        let mut inner = Real::zero(prec);
        for j in 0..=r / 2 {
            let c = c_abr((r - 2 * j) as u32, &b, j as u32, prec);
            inner = inner + c * &e_sums[r - 2 * j];
        }
        let scale = ratio_q.powi(r as i64 + 3);
        terms.push((r, &pre * inner * scale));
    }
    AsymptoticEstimate::from_terms(n, terms, Source::FullSeries, prec)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(n: u32, k: u32, a: u32, b: u32) -> ResidueConfig {
        ResidueConfig::new(n, k, a, b).unwrap()
    }

    fn settings() -> Settings {
        Settings::with_precision(128)
    }

    #[test]
    fn simplified_matches_two_term() {
        for (n, k, a, b) in [
            (2, 0, 1, 2),
            (2, 1, 1, 2),
            (2, 3, 2, 1),
            (5, 0, 1, 2),
            (5, 7, 4, 2),
            (6, 2, 3, 6),
        ] {
            let c = cfg(n, k, a, b);
            for m in [10u64, 100, 1000, 10_000] {
                let t = main_two_term(&c, m, &settings()).unwrap();
                let s = main_simplified(&c, m, &settings()).unwrap();
                assert!(t.value.rel_diff(&s.value) < 1e-12, "{c:?} n={m}");
            }
        }
    }

    #[test]
    fn simplified_rejects_three_and_four() {
        for n in [3, 4] {
            let e = main_simplified(&cfg(n, 0, 1, 2), 100, &settings());
            assert!(matches!(e, Err(Error::Domain(_))));
        }
    }

    #[test]
    fn class_guard() {
        let e = main_two_term(&cfg(7, 0, 1, 2), 100, &settings());
        assert!(matches!(e, Err(Error::Guard { .. })));
        let mut s = settings();
        s.class_limit = 7;
        assert!(ClassCounts::new(&cfg(7, 0, 1, 2), &s).is_ok());
    }

    #[test]
    fn full_series_order_two_is_two_term() {
        for (n, k) in [(2, 0), (2, 1), (3, 0), (3, 2), (4, 1), (5, 0)] {
            let c = cfg(n, k, 1, 2);
            for m in [10u64, 101, 2000] {
                let f = full_series_estimate(&c, m, 2, &settings()).unwrap();
                let t = main_two_term(&c, m, &settings()).unwrap();
                assert!(f.value.rel_diff(&t.value) < 1e-10, "{c:?} n={m}");
                for ((_, a), (_, b)) in f.terms.iter().zip(&t.terms) {
                    assert!(a.rel_diff(b) < 1e-10);
                }
            }
        }
    }

    #[test]
    fn parity_constants() {
        let c0 = parity_bias_constant(0, 128).to_f64();
        assert!((c0 - 0.05103).abs() < 1e-5);
        let c1 = parity_bias_constant(1, 128).to_f64();
        assert!((c1 + c0 / 2.0).abs() < 1e-15);
        assert!(parity_bias_estimate(1, 500, 128).unwrap().sign().is_lt());
    }

    /// Two-term difference for N = 2 is exactly the parity constant.
    #[test]
    fn parity_from_two_term_difference() {
        for k in 0..4 {
            let ab = cfg(2, k, 1, 2);
            for m in [50u64, 999] {
                let d = main_simplified(&ab, m, &settings()).unwrap().value
                    - main_simplified(&ab.swapped(), m, &settings())
                        .unwrap()
                        .value;
                let want = parity_bias_estimate(k, m, 128).unwrap();
                assert!(d.rel_diff(&want) < 1e-30);
            }
        }
    }

    #[test]
    fn mod3_constants_from_two_term_difference() {
        let ab = cfg(3, 0, 1, 2);
        for m in [300u64, 301, 302, 1000, 1001, 1002] {
            let d = main_two_term(&ab, m, &settings()).unwrap().value
                - main_two_term(&ab.swapped(), m, &settings()).unwrap().value;
            let want = mod3_bias_estimate(m, 128).unwrap();
            assert!(d.rel_diff(&want) < 1e-30, "n={m}");
        }
    }

    #[test]
    fn lattice_class_counts() {
        for k in [0, 3] {
            let c5 = cfg(5, k, 2, 4);
            for r in 0..5 {
                for la in 0..5 {
                    for lb in 0..5 {
                        assert_eq!(lattice_class_count(&c5, r, la, lb).unwrap(), 25);
                    }
                }
            }
        }
        let c6 = cfg(6, 1, 1, 2);
        for r in 0..6 {
            assert_eq!(lattice_class_count(&c6, r, 3, 5).unwrap(), 216);
        }
        let c3 = cfg(3, 0, 1, 2);
        let counts: Vec<u64> = (0..3)
            .map(|r| lattice_class_count(&c3, r, 0, 0).unwrap())
            .collect();
        assert_eq!(counts.iter().sum::<u64>(), 3);
        assert!(counts.iter().any(|&c| c != 1));
        for n in 3..=5 {
            let c = cfg(n, 1, 1, n);
            for la in 0..n {
                for lb in 0..n {
                    let total: u64 = (0..n)
                        .map(|r| lattice_class_count(&c, r, la, lb).unwrap())
                        .sum();
                    assert_eq!(total, (n as u64).pow(n - 2));
                }
            }
        }
    }

    #[test]
    fn estimate_json() {
        let e = main_two_term(&cfg(2, 0, 1, 2), 100, &settings()).unwrap();
        let j = e.to_json();
        assert_eq!(j["R"], 2);
        assert_eq!(j["terms"].as_array().unwrap().len(), 2);
        assert_eq!(j["terms"][1]["r"], 1);
    }
}
