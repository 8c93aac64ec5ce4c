//! Exact bias counts for partitions into distinct parts.
//!
//! The main kernel expands the Euler product `prod_{k>K} (1 + t^{s(k)} q^k)`,
//! where `s(k)` is `+1` on the alpha class, `-1` on the beta class and `0`
//! elsewhere. Neutral parts only contribute a one-dimensional factor, so the
//! two-dimensional `(weight, t)` table is built from the signed parts alone
//! and convolved with the neutral series at the end.
//!
//! Two independent oracles live here too: explicit enumeration of
//! partitions and truncated summation of the Nahm-type lattice sum.

use num_bigint::{BigInt, BigUint};
use num_traits::{ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::{self, Exec};
use crate::residue::{LatticeClass, PartClass, QuadraticData, ResidueConfig};

/// Largest `n` the brute-force enumerator accepts.
pub const ENUMERATION_LIMIT: usize = 60;

/// Maximum number of distinct positive parts with sum at most `weight`.
pub fn max_distinct_parts(weight: usize) -> usize {
    // largest p with p(p+1)/2 <= weight
    let mut p = (((8.0 * weight as f64 + 1.0).sqrt() - 1.0) / 2.0) as usize;
    while (p + 1) * (p + 2) / 2 <= weight {
        p += 1;
    }
    while p * (p + 1) / 2 > weight {
        p -= 1;
    }
    p
}

/// One row of a [`BiasTable`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiasRow {
    pub n: usize,
    pub d_ab: BigUint,
    pub d_ba: BigUint,
    pub diff: BigInt,
}

impl BiasRow {
    fn new(n: usize, d_ab: BigUint, d_ba: BigUint) -> Self {
        let diff = BigInt::from(d_ab.clone()) - BigInt::from(d_ba.clone());
        Self {
            n,
            d_ab,
            d_ba,
            diff,
        }
    }
}

#[derive(Serialize)]
struct RowRecord {
    n: usize,
    d_ab: String,
    d_ba: String,
    diff: String,
}

impl From<&BiasRow> for RowRecord {
    fn from(r: &BiasRow) -> Self {
        Self {
            n: r.n,
            d_ab: r.d_ab.to_string(),
            d_ba: r.d_ba.to_string(),
            diff: r.diff.to_string(),
        }
    }
}

/// Exact counts `d_ab(n)`, `d_ba(n)` and their difference for `0 <= n <= n_max`,
/// plus the equal-count column `d_eq(n)` as a by-product.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BiasTable {
    cfg: ResidueConfig,
    n_max: usize,
    rows: Vec<BiasRow>,
    equal: Vec<BigUint>,
}

impl BiasTable {
    fn from_columns(
        cfg: ResidueConfig,
        d_ab: Vec<BigUint>,
        d_ba: Vec<BigUint>,
        equal: Vec<BigUint>,
    ) -> Self {
        let n_max = d_ab.len() - 1;
        let rows = d_ab
            .into_iter()
            .zip(d_ba)
            .enumerate()
            .map(|(n, (a, b))| BiasRow::new(n, a, b))
            .collect();
        Self {
            cfg,
            n_max,
            rows,
            equal,
        }
    }

    pub fn cfg(&self) -> &ResidueConfig {
        &self.cfg
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn rows(&self) -> &[BiasRow] {
        &self.rows
    }

    pub fn row(&self, n: usize) -> &BiasRow {
        &self.rows[n]
    }

    /// Partitions whose alpha and beta part counts are equal.
    pub fn d_eq(&self, n: usize) -> &BigUint {
        &self.equal[n]
    }

    /// The table for the swapped configuration, obtained by exchanging columns.
    pub fn swapped(&self) -> Self {
        let d_ab = self.rows.iter().map(|r| r.d_ba.clone()).collect();
        let d_ba = self.rows.iter().map(|r| r.d_ab.clone()).collect();
        Self::from_columns(self.cfg.swapped(), d_ab, d_ba, self.equal.clone())
    }

    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        self.write_csv_rows(out, 0..=self.n_max)
    }

    /// CSV with header `n,d_ab,d_ba,diff` restricted to the given `n` range.
    pub fn write_csv_rows<W: std::io::Write>(
        &self,
        out: W,
        range: std::ops::RangeInclusive<usize>,
    ) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        for row in &self.rows[range] {
            w.serialize(RowRecord::from(row))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<RowRecord> = self.rows.iter().map(RowRecord::from).collect();
        serde_json::to_value(rows).expect("rows serialize")
    }
}

/// Coefficient type for the DP: `u128` fast path with overflow detection,
/// falling back to `BigUint`.
trait Count: Clone + Send + Sync {
    fn nil() -> Self;
    fn unit() -> Self;
    /// Adds `rhs` into `self`; returns false on overflow.
    fn add_from(&mut self, rhs: &Self) -> bool;
    fn mul(&self, rhs: &Self) -> Option<Self>;
    fn is_nil(&self) -> bool;
    fn to_big(&self) -> BigUint;
}

impl Count for u128 {
    fn nil() -> Self {
        0
    }
    fn unit() -> Self {
        1
    }
    #[inline]
    fn add_from(&mut self, rhs: &Self) -> bool {
        match self.checked_add(*rhs) {
            Some(v) => {
                *self = v;
                true
            }
            None => false,
        }
    }
    fn mul(&self, rhs: &Self) -> Option<Self> {
        self.checked_mul(*rhs)
    }
    fn is_nil(&self) -> bool {
        *self == 0
    }
    fn to_big(&self) -> BigUint {
        BigUint::from(*self)
    }
}

impl Count for BigUint {
    fn nil() -> Self {
        Zero::zero()
    }
    fn unit() -> Self {
        BigUint::from(1u8)
    }
    #[inline]
    fn add_from(&mut self, rhs: &Self) -> bool {
        *self += rhs;
        true
    }
    fn mul(&self, rhs: &Self) -> Option<Self> {
        Some(self * rhs)
    }
    fn is_nil(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_big(&self) -> BigUint {
        self.clone()
    }
}

/// Rows of the DP below this many cells are updated sequentially even under
/// [`Exec::Parallel`]; the thread-pool dispatch costs more than the work.
const PARALLEL_BLOCK_CELLS: usize = 1 << 14;

struct Columns<C> {
    pos: Vec<C>,
    neg: Vec<C>,
    zero: Vec<C>,
}

/// Signed `(weight, t)` table over the alpha/beta parts, reduced to the three
/// sign columns. Returns `None` on overflow of `C`.
fn signed_columns<C: Count>(cfg: &ResidueConfig, n_max: usize, exec: Exec) -> Option<Columns<C>> {
    let bound = max_distinct_parts(n_max);
    let width = 2 * bound + 1;
    let mut table = vec![C::nil(); (n_max + 1) * width];
    table[bound] = C::unit();

    let start = cfg.floor() as usize + 1;
    for part in start..=n_max {
        let sign = match cfg.classify_part(part as u64) {
            PartClass::Neutral => continue,
            c => c.sign(),
        };
        if !apply_part(&mut table, width, bound, n_max, part, sign, exec) {
            return None;
        }
    }

    let mut cols = Columns {
        pos: Vec::with_capacity(n_max + 1),
        neg: Vec::with_capacity(n_max + 1),
        zero: Vec::with_capacity(n_max + 1),
    };
    for row in table.chunks(width) {
        let mut pos = C::nil();
        let mut neg = C::nil();
        for c in &row[bound + 1..] {
            if !pos.add_from(c) {
                return None;
            }
        }
        for c in &row[..bound] {
            if !neg.add_from(c) {
                return None;
            }
        }
        cols.pos.push(pos);
        cols.neg.push(neg);
        cols.zero.push(row[bound].clone());
    }
    Some(cols)
}

/// Multiplies the table by `(1 + t^sign q^part)` in place.
///
/// Row `w` receives row `w - part` shifted by `sign`. Rows are processed in
/// blocks of `part` from the top down: within a block every destination row
/// reads from a source row strictly below the block, so a block can be
/// updated in parallel while the rows beneath it are still untouched.
fn apply_part<C: Count>(
    table: &mut [C],
    width: usize,
    bound: usize,
    n_max: usize,
    part: usize,
    sign: i32,
    exec: Exec,
) -> bool {
    let mut hi = n_max + 1;
    let mut ok = true;
    while hi > part {
        let lo = (hi - part).max(part);
        let (below, rest) = table.split_at_mut(lo * width);
        let block = &mut rest[..(hi - lo) * width];
        let use_pool = exec.is_parallel() && block.len() >= PARALLEL_BLOCK_CELLS;
        let strategy = if use_pool { exec } else { Exec::Sequential };
        let overflow = std::sync::atomic::AtomicBool::new(false);
        exec::for_each_row(strategy, block, width, |i, dst| {
            let w = lo + i;
            let src = &below[(w - part) * width..(w - part + 1) * width];
            // at most max_distinct_parts(w) parts fit into weight w
            let reach = max_distinct_parts(w).min(bound);
            let lo_t = bound - reach;
            let hi_t = bound + reach;
            for (t, d) in dst.iter_mut().enumerate().take(hi_t + 1).skip(lo_t) {
                let s = t as i64 - i64::from(sign);
                if s < 0 || s as usize >= width {
                    continue;
                }
                let v = &src[s as usize];
                if !v.is_nil() && !d.add_from(v) {
                    overflow.store(true, std::sync::atomic::Ordering::Relaxed);
                }
            }
            debug_assert!(dst[..lo_t].iter().all(Count::is_nil));
            debug_assert!(dst[hi_t + 1..].iter().all(Count::is_nil));
        });
        ok &= !overflow.into_inner();
        hi = lo;
    }
    ok
}

/// Distinct-part series `prod (1 + q^k)` over the neutral parts.
fn neutral_series<C: Count>(cfg: &ResidueConfig, n_max: usize) -> Option<Vec<C>> {
    let mut series = vec![C::nil(); n_max + 1];
    series[0] = C::unit();
    for part in cfg.floor() as usize + 1..=n_max {
        if cfg.classify_part(part as u64) != PartClass::Neutral {
            continue;
        }
        for w in (part..=n_max).rev() {
            let (lower, upper) = series.split_at_mut(w);
            if !upper[0].add_from(&lower[w - part]) {
                return None;
            }
        }
    }
    Some(series)
}

fn convolve<C: Count>(a: &[C], b: &[C], exec: Exec) -> Option<Vec<BigUint>> {
    let out = exec::map_range(exec, a.len(), |n| {
        let mut acc = C::nil();
        for m in 0..=n {
            if a[n - m].is_nil() || b[m].is_nil() {
                continue;
            }
            let p = a[n - m].mul(&b[m])?;
            if !acc.add_from(&p) {
                return None;
            }
        }
        Some(acc.to_big())
    });
    out.into_iter().collect()
}

fn count_with<C: Count>(
    cfg: &ResidueConfig,
    n_max: usize,
    exec: Exec,
) -> Option<(Vec<BigUint>, Vec<BigUint>, Vec<BigUint>)> {
    let cols = signed_columns::<C>(cfg, n_max, exec)?;
    let neutral = neutral_series::<C>(cfg, n_max)?;
    let d_ab = convolve(&neutral, &cols.pos, exec)?;
    let d_ba = convolve(&neutral, &cols.neg, exec)?;
    let d_eq = convolve(&neutral, &cols.zero, exec)?;
    Some((d_ab, d_ba, d_eq))
}

/// Exact bias table by dynamic programming over the Euler product.
pub fn count_bias_table(cfg: &ResidueConfig, n_max: usize) -> BiasTable {
    count_bias_table_with(cfg, n_max, Exec::default())
}

pub fn count_bias_table_with(cfg: &ResidueConfig, n_max: usize, exec: Exec) -> BiasTable {
    let (d_ab, d_ba, d_eq) = count_with::<u128>(cfg, n_max, exec)
        .or_else(|| count_with::<BigUint>(cfg, n_max, exec))
        .expect("BigUint arithmetic cannot overflow");
    BiasTable::from_columns(*cfg, d_ab, d_ba, d_eq)
}

/// Number of partitions of each `n <= n_max` into distinct parts all `> floor`.
pub fn distinct_partition_counts(floor: u32, n_max: usize) -> Vec<BigUint> {
    let mut series = vec![BigUint::zero(); n_max + 1];
    series[0] = BigUint::from(1u8);
    for part in floor as usize + 1..=n_max {
        for w in (part..=n_max).rev() {
            let (lower, upper) = series.split_at_mut(w);
            upper[0] += &lower[w - part];
        }
    }
    series
}

/// Brute-force counts `(d_ab(n), d_ba(n))` by listing every partition of `n`
/// into distinct parts `> K`.
pub fn enumerate_oracle(cfg: &ResidueConfig, n: usize) -> Result<(BigUint, BigUint)> {
    if n > ENUMERATION_LIMIT {
        return Err(Error::Guard {
            what: "n",
            limit: ENUMERATION_LIMIT,
            got: n,
        });
    }
    let mut ab = 0u64;
    let mut ba = 0u64;
    let mut parts = Vec::new();
    enumerate_rec(n, cfg.floor() as usize + 1, &mut parts, &mut |ps| {
        let a = ps
            .iter()
            .filter(|&&p| cfg.classify_part(p as u64) == PartClass::Alpha)
            .count();
        let b = ps
            .iter()
            .filter(|&&p| cfg.classify_part(p as u64) == PartClass::Beta)
            .count();
        if a > b {
            ab += 1;
        } else if b > a {
            ba += 1;
        }
    });
    Ok((BigUint::from(ab), BigUint::from(ba)))
}

fn enumerate_rec(
    remaining: usize,
    min_part: usize,
    parts: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize]),
) {
    if remaining == 0 {
        visit(parts);
        return;
    }
    for p in min_part..=remaining {
        parts.push(p);
        enumerate_rec(remaining - p, p + 1, parts, visit);
        parts.pop();
    }
}

/// Visits every `n` in `N_0^N` with `N * H(n) <= n_max`, passing the weight.
///
/// Each coordinate term of `N * H` is nonnegative and increasing, so pruning
/// on the running partial sum enumerates the truncated lattice completely.
fn visit_lattice(qd: &QuadraticData, n_max: usize, visit: &mut dyn FnMut(&[i64], usize)) {
    fn rec(
        qd: &QuadraticData,
        budget: i64,
        j: usize,
        point: &mut Vec<i64>,
        visit: &mut dyn FnMut(&[i64], usize),
        used: i64,
    ) {
        if j == qd.e().len() {
            visit(point, used as usize);
            return;
        }
        let mut x = 0i64;
        loop {
            let w = qd.coordinate_weight(j, x);
            if used + w > budget {
                break;
            }
            point.push(x);
            rec(qd, budget, j + 1, point, visit, used + w);
            point.pop();
            x += 1;
        }
    }
    let mut point = Vec::with_capacity(qd.e().len());
    rec(qd, n_max as i64, 0, &mut point, visit, 0);
}

/// Truncated series of `1 / prod_j (q^N; q^N)_{n_j}` as coefficient vector.
fn pochhammer_reciprocal(point: &[i64], modulus: usize, len: usize) -> Vec<BigUint> {
    let mut series = vec![BigUint::zero(); len];
    series[0] = BigUint::from(1u8);
    for &nj in point {
        // (q^N;q^N)_0 = 1 contributes nothing
        for i in 1..=nj as usize {
            let step = modulus * i;
            if step >= len {
                break;
            }
            for w in step..len {
                let (lower, upper) = series.split_at_mut(w);
                upper[0] += &lower[w - step];
            }
        }
    }
    series
}

fn add_shifted(target: &mut [BigUint], series: &[BigUint], shift: usize) {
    for (slot, c) in target[shift..].iter_mut().zip(series) {
        *slot += c;
    }
}

/// Bias table from direct summation of the lattice generating function,
/// truncated at `q^{n_max}`.
pub fn nahm_lattice_oracle(cfg: &ResidueConfig, n_max: usize) -> BiasTable {
    let qd = cfg.quad_data();
    let modulus = cfg.modulus() as usize;
    let (a, b) = (cfg.alpha_index(), cfg.beta_index());
    let mut d_ab = vec![BigUint::zero(); n_max + 1];
    let mut d_ba = vec![BigUint::zero(); n_max + 1];
    let mut d_eq = vec![BigUint::zero(); n_max + 1];
    visit_lattice(&qd, n_max, &mut |point, weight| {
        let series = pochhammer_reciprocal(point, modulus, n_max + 1 - weight);
        let target = match point[a].cmp(&point[b]) {
            std::cmp::Ordering::Greater => &mut d_ab,
            std::cmp::Ordering::Less => &mut d_ba,
            std::cmp::Ordering::Equal => &mut d_eq,
        };
        add_shifted(target, &series, weight);
    });
    BiasTable::from_columns(*cfg, d_ab, d_ba, d_eq)
}

/// Coefficients of the class-restricted series `D_{alpha,beta;N,ell}(q)` up to
/// `q^{n_max}`: the lattice sum over `n_alpha > n_beta`, `n = ell (mod N)`.
pub fn class_restricted_series(
    cfg: &ResidueConfig,
    ell: &LatticeClass,
    n_max: usize,
) -> Vec<BigUint> {
    let qd = cfg.quad_data();
    let modulus = cfg.modulus() as usize;
    let (a, b) = (cfg.alpha_index(), cfg.beta_index());
    let mut out = vec![BigUint::zero(); n_max + 1];
    visit_lattice(&qd, n_max, &mut |point, weight| {
        if point[a] <= point[b] {
            return;
        }
        let in_class = point
            .iter()
            .zip(ell.entries())
            .all(|(&x, &l)| x.rem_euclid(modulus as i64) == i64::from(l));
        if !in_class {
            return;
        }
        let series = pochhammer_reciprocal(point, modulus, n_max + 1 - weight);
        add_shifted(&mut out, &series, weight);
    });
    out
}

/// The smallest `n0 <= n_max` such that `diff(n) < 0` for every `n0 <= n <= n_max`,
/// if the last row is negative.
pub fn negativity_threshold(table: &BiasTable) -> Option<usize> {
    let rows = table.rows();
    let mut n0 = None;
    for r in rows.iter().rev() {
        if r.diff < BigInt::zero() {
            n0 = Some(r.n);
        } else {
            break;
        }
    }
    n0
}

/// `diff(n)` as an `f64` ratio-friendly value; `None` if out of range.
pub fn diff_f64(row: &BiasRow) -> Option<f64> {
    row.diff.to_f64()
}
