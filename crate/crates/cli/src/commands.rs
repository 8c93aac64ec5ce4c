use std::io::Write;

use num_bigint::BigInt;
use pbl_core::asymptotics::{
    full_series_estimate, full_series_from_engine, main_simplified, main_two_term,
    scaled_difference, ClassCounts, Settings,
};
use pbl_core::counting::{count_bias_table_with, BiasTable};
use pbl_core::hp::Real;
use pbl_core::saddle::LadderEngine;
use pbl_core::{verify as suites, ResidueConfig};

use crate::output::{Format, Table};
use crate::{check_n_limit, CliError, GlobalArgs, Method, Result, Suite};

fn bias_rows(table: &BiasTable, from: usize, to: usize) -> Table {
    let mut t = Table::new(vec!["n", "d_ab", "d_ba", "diff"]);
    for row in &table.rows()[from..=to] {
        t.push(vec![
            row.n.to_string(),
            row.d_ab.to_string(),
            row.d_ba.to_string(),
            row.diff.to_string(),
        ]);
    }
    t
}

pub fn exact(g: &GlobalArgs, cfg: &ResidueConfig, out: &mut dyn Write) -> Result<()> {
    let n_max = g.nmax_or(50)?;
    let table = count_bias_table_with(cfg, n_max, g.exec());
    bias_rows(&table, 0, n_max).write(g.format, out)
}

pub fn asym(
    g: &GlobalArgs,
    cfg: &ResidueConfig,
    method: Method,
    out: &mut dyn Write,
) -> Result<()> {
    let n =
        g.n.ok_or_else(|| CliError::Usage("asym needs --n".into()))?;
    let settings = Settings::with_precision(g.prec);
    let est = match method {
        Method::TwoTerm => main_two_term(cfg, n, &settings)?,
        Method::Simplified => main_simplified(cfg, n, &settings)?,
        Method::Full => full_series_estimate(cfg, n, g.order, &settings)?,
    };
    match g.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &est.to_json())?;
            writeln!(out)?;
            Ok(())
        }
        Format::Csv => {
            let mut t = Table::new(vec!["n", "R", "r", "term"]);
            for (r, v) in &est.terms {
                t.push(vec![
                    n.to_string(),
                    est.order.to_string(),
                    r.to_string(),
                    v.to_decimal(),
                ]);
            }
            t.push(vec![
                n.to_string(),
                est.order.to_string(),
                "total".into(),
                est.value.to_decimal(),
            ]);
            t.write(g.format, out)
        }
    }
}

pub fn compare(
    g: &GlobalArgs,
    cfg: &ResidueConfig,
    scaled: bool,
    residue: Option<u64>,
    out: &mut dyn Write,
) -> Result<()> {
    let modulus = cfg.modulus() as u64;
    if let Some(r) = residue {
        if r >= modulus {
            return Err(CliError::Usage(format!(
                "--residue must lie in 0..{modulus}"
            )));
        }
    }
    let n_max = g.nmax_or(1000)?;
    let keep = |n: usize| residue.is_none_or(|r| n as u64 % modulus == r);
    let table = count_bias_table_with(cfg, n_max, g.exec());
    let prec = g.prec;
    if scaled {
        let mut t = Table::new(vec!["n", "inv_n", "scaled"]);
        for n in (1..=n_max).filter(|&n| keep(n)) {
            let inv = Real::one(prec) / Real::from_i64(n as i64, prec);
            let s = scaled_difference(&table.row(n).diff, n as u64, prec);
            t.push(vec![n.to_string(), inv.to_decimal(), s.to_decimal()]);
        }
        return t.write(g.format, out);
    }
    let settings = Settings::with_precision(prec);
    let counts = ClassCounts::new(cfg, &settings)?;
    let engine = LadderEngine::new_with(cfg, g.order, g.exec())?;
    let swapped = cfg.swapped();
    let counts_sw = ClassCounts::new(&swapped, &settings)?;
    let engine_sw = LadderEngine::new_with(&swapped, g.order, g.exec())?;
    let mut t = Table::new(vec!["n", "exact", "estimate", "ratio"]);
    for n in (1..=n_max).filter(|&n| keep(n)) {
        let a = full_series_from_engine(&engine, &counts, n as u64, prec).value;
        let b = full_series_from_engine(&engine_sw, &counts_sw, n as u64, prec).value;
        let est = a - b;
        let diff = &table.row(n).diff;
        let ratio = if est.is_zero() {
            "nan".to_string()
        } else {
            (Real::from_bigint(diff, prec) / &est).to_decimal()
        };
        t.push(vec![
            n.to_string(),
            diff.to_string(),
            est.to_decimal(),
            ratio,
        ]);
    }
    t.write(g.format, out)
}

fn fixed(n: u32, k: u32) -> ResidueConfig {
    ResidueConfig::new(n, k, 1, 2).expect("fixed configuration")
}

pub fn tables(g: &GlobalArgs, which: u8, out: &mut dyn Write) -> Result<()> {
    let (cfg, to) = match which {
        1 => (fixed(2, 0), 50),
        2 => (fixed(2, 1), 50),
        3 => (fixed(3, 0), 17),
        _ => return Err(CliError::Usage(format!("unknown table {which}"))),
    };
    let table = count_bias_table_with(&cfg, to, g.exec());
    bias_rows(&table, 1, to).write(g.format, out)
}

fn scaled_cell(diff: &BigInt, n: usize, prec: usize) -> String {
    scaled_difference(diff, n as u64, prec).to_decimal()
}

pub fn figure_data(
    g: &GlobalArgs,
    which: u8,
    max_n: Option<usize>,
    out: &mut dyn Write,
) -> Result<()> {
    let default_max = match which {
        1 | 3 => 100,
        2 => 2000,
        4 => 1000,
        _ => return Err(CliError::Usage(format!("unknown figure {which}"))),
    };
    let to = max_n.unwrap_or(default_max);
    check_n_limit(to)?;
    let prec = g.prec;
    let inv = |n: usize| (Real::one(prec) / Real::from_i64(n as i64, prec)).to_decimal();
    let t = match which {
        1 => {
            let k0 = count_bias_table_with(&fixed(2, 0), to, g.exec());
            let k1 = count_bias_table_with(&fixed(2, 1), to, g.exec());
            let mut t = Table::new(vec!["n", "diff_k0", "diff_k1"]);
            for n in 0..=to {
                t.push(vec![
                    n.to_string(),
                    k0.row(n).diff.to_string(),
                    k1.row(n).diff.to_string(),
                ]);
            }
            t
        }
        2 => {
            let k0 = count_bias_table_with(&fixed(2, 0), to, g.exec());
            let k1 = count_bias_table_with(&fixed(2, 1), to, g.exec());
            let mut t = Table::new(vec!["n", "inv_n", "scaled_k0", "scaled_k1"]);
            for n in 10..=to {
                t.push(vec![
                    n.to_string(),
                    inv(n),
                    scaled_cell(&k0.row(n).diff, n, prec),
                    scaled_cell(&k1.row(n).diff, n, prec),
                ]);
            }
            t
        }
        3 => {
            let d = count_bias_table_with(&fixed(3, 0), to, g.exec());
            let mut t = Table::new(vec!["n", "diff"]);
            for n in 0..=to {
                t.push(vec![n.to_string(), d.row(n).diff.to_string()]);
            }
            t
        }
        _ => {
            let d = count_bias_table_with(&fixed(3, 0), to, g.exec());
            let mut t = Table::new(vec!["n", "inv_n", "scaled"]);
            for n in 10..=to {
                t.push(vec![
                    n.to_string(),
                    inv(n),
                    scaled_cell(&d.row(n).diff, n, prec),
                ]);
            }
            t
        }
    };
    t.write(g.format, out)
}

pub fn verify(
    g: &GlobalArgs,
    cfg: &ResidueConfig,
    suite: Suite,
    out: &mut dyn Write,
) -> Result<()> {
    let records = match suite {
        Suite::Conjectures => suites::conjectures(g.nmax_or(2000)?, g.prec, g.exec()),
        Suite::Expansion => suites::expansion(cfg, g.order, g.prec)?,
        Suite::Lemmas => suites::lemmas(g.prec)?,
    };
    let mut failed = 0;
    for r in &records {
        serde_json::to_writer(&mut *out, r)?;
        writeln!(out)?;
        if !r.pass {
            failed += 1;
            eprintln!("{}", serde_json::to_string(r)?);
        }
    }
    writeln!(
        out,
        "{}",
        serde_json::json!({ "suite": format!("{suite:?}").to_lowercase(), "checks": records.len(), "failed": failed })
    )?;
    if failed > 0 {
        return Err(CliError::Verification(failed));
    }
    Ok(())
}
