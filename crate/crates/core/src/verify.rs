//! Self-checks that tie the exact counts, the ladder and the analytic lemmas
//! together. Each check yields a [`CheckRecord`]; a suite passes when every
//! record does.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::asymptotics::{
    lattice_class_count, mod3_bias_constant, parity_bias_constant, scaled_difference,
};
use crate::counting::{count_bias_table_with, negativity_threshold, BiasTable};
use crate::error::Result;
use crate::exec::Exec;
use crate::hp::Real;
use crate::poly::{int, rat, MultiPoly};
use crate::qseries::{self, EvaluationPoint};
use crate::residue::{LatticeClass, ResidueConfig};
use crate::saddle::{c_abr, c_polynomials, saddle_b, LadderEngine};

/// Default grid of `epsilon` values for the sum-versus-expansion comparison.
pub const EPSILON_GRID: [f64; 3] = [0.08, 0.04, 0.02];

#[derive(Clone, Debug, Serialize)]
pub struct CheckRecord {
    pub check: String,
    pub pass: bool,
    #[serde(flatten)]
    pub detail: Map<String, Value>,
}

impl CheckRecord {
    fn new(check: impl Into<String>, pass: bool, detail: Value) -> Self {
        let detail = match detail {
            Value::Object(m) => m,
            Value::Null => Map::new(),
            other => {
                let mut m = Map::new();
                m.insert("detail".into(), other);
                m
            }
        };
        Self {
            check: check.into(),
            pass,
            detail,
        }
    }
}

fn cfg(n: u32, k: u32, a: u32, b: u32) -> ResidueConfig {
    ResidueConfig::new(n, k, a, b).expect("fixed configurations are valid")
}

fn sign_of(d: &BigInt) -> i32 {
    if d.is_zero() {
        0
    } else if d.is_negative() {
        -1
    } else {
        1
    }
}

/// Parity bias, the `K = 1` sign change and the mod-3 sign pattern.
pub fn conjectures(n_max: usize, prec: usize, exec: Exec) -> Vec<CheckRecord> {
    let mut out = Vec::new();
    let k0 = count_bias_table_with(&cfg(2, 0, 1, 2), n_max, exec);
    let first_bad = (20..=n_max).find(|&n| sign_of(&k0.row(n).diff) <= 0);
    out.push(CheckRecord::new(
        "parity_bias_k0_positive",
        first_bad.is_none(),
        json!({ "from": 20, "to": n_max, "first_failure": first_bad }),
    ));

    let k1 = count_bias_table_with(&cfg(2, 1, 1, 2), n_max, exec);
    let upper = n_max.min(29);
    let alternation = (13..=upper).find(|&n| {
        let s = sign_of(&k1.row(n).diff);
        if n % 2 == 0 {
            s <= 0
        } else {
            s >= 0
        }
    });
    out.push(CheckRecord::new(
        "k1_alternation",
        alternation.is_none(),
        json!({ "from": 13, "to": upper, "first_failure": alternation }),
    ));
    let threshold = negativity_threshold(&k1);
    out.push(CheckRecord::new(
        "k1_negative_from_threshold",
        threshold.is_some_and(|t| t < n_max),
        json!({ "threshold": threshold, "to": n_max }),
    ));

    let n3 = count_bias_table_with(&cfg(3, 0, 1, 2), n_max, exec);
    let onset = mod3_pattern_onset(&n3);
    out.push(CheckRecord::new(
        "mod3_sign_pattern",
        onset.is_some_and(|t| t < n_max),
        json!({ "onset": onset, "to": n_max }),
    ));

    if n_max >= 1000 {
        let got = scaled_difference(&k0.row(n_max).diff, n_max as u64, prec);
        let want = parity_bias_constant(0, prec);
        let err = got.rel_diff(&want);
        out.push(CheckRecord::new(
            "parity_bias_constant",
            err < 0.25,
            json!({ "n": n_max, "scaled": got.to_decimal(), "constant": want.to_decimal(), "rel_err": err }),
        ));
        for n in n_max - 2..=n_max {
            let got = scaled_difference(&n3.row(n).diff, n as u64, prec);
            let (p, q) = mod3_bias_constant(n as u64);
            let want = Real::from_i64(p, prec) / Real::from_i64(q, prec);
            let err = got.rel_diff(&want);
            out.push(CheckRecord::new(
                "mod3_branch_constant",
                err < 0.30 && got.sign() == want.sign(),
                json!({ "n": n, "scaled": got.to_decimal(), "constant": format!("{p}/{q}"), "rel_err": err }),
            ));
        }
    }
    out
}

/// Smallest `n0` such that the sign of `diff(n)` is `(+, +, -)` by `n mod 3`
/// for every `n0 <= n <= n_max`.
pub fn mod3_pattern_onset(table: &BiasTable) -> Option<usize> {
    let mut onset = None;
    for row in table.rows().iter().rev() {
        let want = if row.n % 3 == 2 { -1 } else { 1 };
        if sign_of(&row.diff) == want {
            onset = Some(row.n);
        } else {
            break;
        }
    }
    onset
}

fn e1_closed_form(c: &ResidueConfig, res: u32, prec: usize) -> Real {
    let n = c.modulus() as i64;
    let qd = c.quad_data();
    let (a, b) = (c.alpha() as i64, c.beta() as i64);
    let (ea, eb) = (qd.e()[c.alpha_index()], qd.e()[c.beta_index()]);
    let bracket = int(1) - rat(2 * res as i64, n) + rat(b - a + n * (eb - ea), n * n);
    let two = Real::from_i64(2, prec);
    Real::pi(prec).powi(n - 1).sqrt() / (&two * two.sqrt() * Real::from_i64(n, prec).powi(n - 1))
        * Real::from_rational(&bracket, prec)
}

fn c1_closed_form(c: &ResidueConfig) -> MultiPoly {
    let n = c.modulus() as usize;
    let qd = c.quad_data();
    let mut p = MultiPoly::zero(n);
    for j in 0..n {
        let lin = -(rat(j as i64 + 1, n as i64) + int(qd.e()[j]));
        p = p.add(&MultiPoly::monomial(n, j, 1, lin));
        p = p.add(&MultiPoly::monomial(n, j, 3, rat(1, 3)));
    }
    p
}

/// Closed-form ladder values plus the sum-versus-expansion grid for `grid_cfg`.
pub fn expansion(grid_cfg: &ResidueConfig, order: usize, prec: usize) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for n in 2..=4u32 {
        for k in 0..=2 {
            let c = cfg(n, k, 1, 2);
            let engine = LadderEngine::new(&c, 2)?;
            let e0 = Real::pi(prec).powi(n as i64).sqrt()
                / (Real::from_i64(2, prec) * Real::from_i64(n as i64, prec).powi(n as i64));
            let (mut err0, mut err1) = (0f64, 0f64);
            for res in 1..=n {
                let l = engine.ladder_for_residue(res, prec);
                err0 = err0.max(l.e()[0].rel_diff(&e0));
                err1 = err1.max(l.e()[1].rel_diff(&e1_closed_form(&c, res, prec)));
            }
            out.push(CheckRecord::new(
                "ladder_e0_e1",
                err0 < 1e-10 && err1 < 1e-10,
                json!({ "N": n, "K": k, "E0_rel_err": err0, "E1_rel_err": err1 }),
            ));
            let polys = c_polynomials(&c, 2);
            out.push(CheckRecord::new(
                "c0_c1_exact",
                polys[0] == MultiPoly::one(n as usize) && polys[1] == c1_closed_form(&c),
                json!({ "N": n, "K": k }),
            ));
        }
    }
    for n in 2..=6u32 {
        let b = saddle_b(n, prec);
        let nf = Real::from_i64(n as i64, prec);
        let three = Real::from_i64(3, prec);
        let quarter = Real::from_f64(0.25, prec);
        let two = Real::from_i64(2, prec);
        let want0 = nf.pow(&quarter) / (&two * two.sqrt() * three.pow(&quarter));
        let want1 = &quarter * (Real::pi(prec) * &nf / &three).sqrt();
        let err0 = c_abr(0, &b, 0, prec).rel_diff(&want0);
        let err1 = c_abr(1, &b, 0, prec).rel_diff(&want1);
        out.push(CheckRecord::new(
            "c_ab0_closed_form",
            err0 < 1e-12 && err1 < 1e-12,
            json!({ "N": n, "A0_rel_err": err0, "A_half_rel_err": err1 }),
        ));
    }
    out.extend(expansion_grid(grid_cfg, order, &EPSILON_GRID, prec)?);
    Ok(out)
}

/// `|g_l(eps) - expansion_R(eps)| / |expansion|` on the real axis, one record per
/// class and `eps`, then one monotonicity record per class.
pub fn expansion_grid(
    c: &ResidueConfig,
    order: usize,
    grid: &[f64],
    prec: usize,
) -> Result<Vec<CheckRecord>> {
    let engine = LadderEngine::new(c, order)?;
    let mut out = Vec::new();
    for ell in LatticeClass::all(c.modulus()) {
        let ladder = engine.ladder(&ell, prec);
        let mut devs = Vec::new();
        for &eps in grid {
            let point = EvaluationPoint::new(eps, 0.0, prec)?;
            let rec = qseries::compare_class(c, &ell, &ladder, &point, order)?;
            devs.push(rec.rel_err);
            let mut detail = serde_json::to_value(&rec)?;
            let check = detail["check"].as_str().unwrap_or_default().to_owned();
            detail.as_object_mut().map(|m| m.remove("check"));
            out.push(CheckRecord::new(check, true, detail));
        }
        out.push(CheckRecord::new(
            format!("g_vs_expansion_monotone ell={:?}", ell.entries()),
            devs.windows(2).all(|w| w[1] < w[0]),
            json!({ "N": c.modulus(), "K": c.floor(), "R": order, "epsilon": grid, "rel_err": devs }),
        ));
    }
    Ok(out)
}

/// Lattice class counts, the decay function `s`, the dilogarithm identity and a
/// numeric Euler-Maclaurin experiment.
pub fn lemmas(prec: usize) -> Result<Vec<CheckRecord>> {
    let mut out = Vec::new();
    for (n, configs) in [(5u32, 0..=2u32), (6, 0..=0)] {
        let want = (n as u64).pow(n - 3);
        let mut bad = None;
        let mut checked = 0u64;
        for k in configs {
            for a in 1..=n {
                for b in 1..=n {
                    if a == b || (n == 6 && (a, b) != (1, 2) && (a, b) != (4, 1)) {
                        continue;
                    }
                    let c = cfg(n, k, a, b);
                    for r in 0..n {
                        for la in 0..n {
                            for lb in 0..n {
                                let got = lattice_class_count(&c, r, la, lb)?;
                                checked += 1;
                                if got != want && bad.is_none() {
                                    bad = Some(json!([k, a, b, r, la, lb, got]));
                                }
                            }
                        }
                    }
                }
            }
        }
        out.push(CheckRecord::new(
            "lattice_class_count",
            bad.is_none(),
            json!({ "N": n, "expected": want, "inputs": checked, "first_failure": bad }),
        ));
    }

    let y_grid = [
        -5.0, -2.0, -1.0, -0.5, -0.1, -0.01, 0.01, 0.1, 0.5, 1.0, 2.0, 5.0,
    ];
    for n in 2..=5u32 {
        let s0 = qseries::s_y(0.0, n, prec).abs().to_f64();
        out.push(CheckRecord::new(
            "s_zero",
            s0 < 1e-30,
            json!({ "N": n, "s": s0 }),
        ));
        let positive: Vec<f64> = y_grid
            .iter()
            .copied()
            .filter(|&y| !qseries::s_y(y, n, prec).sign().is_lt())
            .collect();
        out.push(CheckRecord::new(
            "s_negative",
            positive.is_empty(),
            json!({ "N": n, "y": y_grid, "failures": positive }),
        ));
        let y = 1e-3;
        let ratio = qseries::s_y(y, n, prec).to_f64() / (y * y);
        let want = qseries::s_curvature(n, prec).to_f64();
        out.push(CheckRecord::new(
            "s_curvature",
            (ratio - want).abs() < 1e-4,
            json!({ "N": n, "y": y, "ratio": ratio, "limit": want }),
        ));
        let l0 = qseries::lambda_y(0.0, n, prec);
        let pi = Real::pi(prec);
        let want = &pi * &pi * Real::from_i64(n as i64, prec) / Real::from_i64(12, prec);
        let err = l0.re.rel_diff(&want).max(l0.im.abs().to_f64());
        out.push(CheckRecord::new(
            "lambda_zero",
            err < 1e-30,
            json!({ "N": n, "value": l0.to_decimal(), "rel_err": err }),
        ));
    }

    for n in 2..=4u32 {
        for m in 1..=n {
            let mut ratios = Vec::new();
            let mut pass = true;
            for order in 1..=6usize {
                let err = |h: f64| {
                    let (s, e) = qseries::euler_maclaurin_gaussian(m, n, 0.25, h, order, prec);
                    s.rel_diff(&e)
                };
                let (coarse, fine) = (err(0.1), err(0.05));
                pass &= fine < coarse * 1.5 * 0.5f64.powi(order as i32 + 1);
                ratios.push(fine / coarse);
            }
            out.push(CheckRecord::new(
                "euler_maclaurin_gaussian",
                pass,
                json!({ "N": n, "m": m, "halving_ratio_by_R": ratios }),
            ));
        }
    }

    for (eps, y) in [(0.1, 0.0), (0.05, 0.2), (0.02, -0.5)] {
        let point = EvaluationPoint::new(eps, y, prec)?;
        let direct = qseries::log_pochhammer_direct(point.z())?;
        let asym = qseries::log_pochhammer_asym(point.z());
        let dev = (&direct.value - &asym).abs().to_f64();
        out.push(CheckRecord::new(
            "log_pochhammer",
            dev < 1e-20,
            json!({ "epsilon": eps, "y": y, "abs_err": dev, "tail": direct.tail.to_f64() }),
        ));
    }
    Ok(out)
}
