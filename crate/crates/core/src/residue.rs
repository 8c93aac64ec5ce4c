//! Residue-class parameters and the quadratic form attached to them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `[l]_N`: the representative of `l` modulo `modulus` in `1..=modulus`.
///
/// Multiples of the modulus map to the modulus itself, never to zero.
pub fn smallest_positive_residue(l: i64, modulus: u32) -> u32 {
    assert!(modulus >= 1, "modulus must be positive");
    let m = i64::from(modulus);
    let r = l.rem_euclid(m);
    if r == 0 {
        modulus
    } else {
        r as u32
    }
}

/// The fixed parameters `(N, K, alpha, beta)`.
///
/// Parts are restricted to sizes `> floor`; `alpha` and `beta` are residue
/// labels in `1..=modulus` (label `modulus` stands for the class of zero).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ResidueConfig {
    modulus: u32,
    floor: u32,
    alpha: u32,
    beta: u32,
}

/// How a single part size interacts with the `alpha`/`beta` tally.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartClass {
    Alpha,
    Beta,
    Neutral,
}

impl PartClass {
    pub fn sign(self) -> i32 {
        match self {
            PartClass::Alpha => 1,
            PartClass::Beta => -1,
            PartClass::Neutral => 0,
        }
    }
}

impl ResidueConfig {
    pub fn new(modulus: u32, floor: u32, alpha: u32, beta: u32) -> Result<Self> {
        if modulus < 2 {
            return Err(Error::InvalidConfig(format!(
                "modulus N must be at least 2, got {modulus}"
            )));
        }
        for (name, v) in [("alpha", alpha), ("beta", beta)] {
            if v < 1 || v > modulus {
                return Err(Error::InvalidConfig(format!(
                    "{name} must lie in 1..={modulus}, got {v}"
                )));
            }
        }
        if alpha == beta {
            return Err(Error::InvalidConfig(format!(
                "alpha and beta must differ, both are {alpha}"
            )));
        }
        Ok(Self {
            modulus,
            floor,
            alpha,
            beta,
        })
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn floor(&self) -> u32 {
        self.floor
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn beta(&self) -> u32 {
        self.beta
    }

    /// Zero-based indices of alpha and beta into length-N vectors.
    pub fn alpha_index(&self) -> usize {
        self.alpha as usize - 1
    }

    pub fn beta_index(&self) -> usize {
        self.beta as usize - 1
    }

    /// Same modulus and floor with the two residue classes exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            alpha: self.beta,
            beta: self.alpha,
            ..*self
        }
    }

    pub fn classify_part(&self, part: u64) -> PartClass {
        let label =
            smallest_positive_residue((part % u64::from(self.modulus)) as i64, self.modulus);
        if label == self.alpha {
            PartClass::Alpha
        } else if label == self.beta {
            PartClass::Beta
        } else {
            PartClass::Neutral
        }
    }

    pub fn quad_data(&self) -> QuadraticData {
        QuadraticData::new(self.modulus, self.floor)
    }
}

/// The vectors `e` and `b` defining `H(n) = n.n/2 + b.n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuadraticData {
    modulus: u32,
    e: Vec<i64>,
    b: Vec<BigRational>,
}

impl QuadraticData {
    pub fn new(modulus: u32, floor: u32) -> Self {
        let n = modulus as usize;
        let base = i64::from(floor / modulus);
        let extra = (floor % modulus) as usize;
        let e: Vec<i64> = (0..n).map(|j| base + i64::from(j < extra)).collect();
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let b = e
            .iter()
            .enumerate()
            .map(|(j, &ej)| {
                BigRational::new(BigInt::from(j as i64 + 1), BigInt::from(modulus)) - half.clone()
                    + BigRational::from_integer(BigInt::from(ej))
            })
            .collect();
        Self { modulus, e, b }
    }

    pub fn modulus(&self) -> u32 {
        self.modulus
    }

    pub fn e(&self) -> &[i64] {
        &self.e
    }

    pub fn b(&self) -> &[BigRational] {
        &self.b
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.e.len() {
            return Err(Error::Dimension {
                expected: self.e.len(),
                got: len,
            });
        }
        Ok(())
    }

    /// `H(n)` as an exact rational.
    pub fn quad_form(&self, n: &[i64]) -> Result<BigRational> {
        self.check_len(n.len())?;
        let mut acc = BigRational::zero();
        for (&nj, bj) in n.iter().zip(&self.b) {
            let x = BigRational::from_integer(BigInt::from(nj));
            acc += &x * &x / BigInt::from(2) + bj * &x;
        }
        Ok(acc)
    }

    /// `N * H(n)`, which is always an integer for integer `n`.
    pub fn scaled_weight(&self, n: &[i64]) -> Result<i64> {
        self.check_len(n.len())?;
        Ok(n.iter()
            .enumerate()
            .map(|(j, &x)| self.coordinate_weight(j, x))
            .sum())
    }

    /// Contribution of coordinate `j` (zero-based) to `N * H`. `N * H` is
    /// separable, and each coordinate term is nonnegative and increasing on
    /// the nonnegative integers.
    pub fn coordinate_weight(&self, j: usize, x: i64) -> i64 {
        let m = i64::from(self.modulus);
        let linear = 2 * (j as i64 + 1) - m + 2 * m * self.e[j];
        let twice = m * x * x + linear * x;
        debug_assert!(twice % 2 == 0);
        twice / 2
    }
}

/// A residue class `ell` in `(Z/NZ)^N`, each entry in `0..N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticeClass {
    ell: Vec<u32>,
}

impl LatticeClass {
    pub fn new(ell: Vec<u32>, modulus: u32) -> Result<Self> {
        if ell.len() != modulus as usize {
            return Err(Error::Dimension {
                expected: modulus as usize,
                got: ell.len(),
            });
        }
        if let Some(bad) = ell.iter().find(|&&x| x >= modulus) {
            return Err(Error::InvalidConfig(format!(
                "lattice class entry {bad} is not in 0..{modulus}"
            )));
        }
        Ok(Self { ell })
    }

    pub fn entries(&self) -> &[u32] {
        &self.ell
    }

    pub fn as_i64(&self) -> Vec<i64> {
        self.ell.iter().map(|&x| i64::from(x)).collect()
    }

    /// `[ell_alpha - ell_beta]_N`.
    pub fn offset(&self, cfg: &ResidueConfig) -> u32 {
        let d = i64::from(self.ell[cfg.alpha_index()]) - i64::from(self.ell[cfg.beta_index()]);
        smallest_positive_residue(d, cfg.modulus())
    }

    /// `N * H(ell) mod N`.
    pub fn weight_residue(&self, qd: &QuadraticData) -> u32 {
        let w = qd
            .scaled_weight(&self.as_i64())
            .expect("class length matches modulus");
        w.rem_euclid(i64::from(qd.modulus())) as u32
    }

    /// All `N^N` classes in lexicographic order.
    pub fn all(modulus: u32) -> impl Iterator<Item = LatticeClass> {
        let n = modulus as usize;
        let total = (modulus as usize).pow(modulus);
        (0..total).map(move |mut idx| {
            let mut ell = vec![0u32; n];
            for slot in ell.iter_mut().rev() {
                *slot = (idx % modulus as usize) as u32;
                idx /= modulus as usize;
            }
            LatticeClass { ell }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn residue_examples() {
        assert_eq!(smallest_positive_residue(5, 3), 2);
        assert_eq!(smallest_positive_residue(0, 2), 2);
        assert_eq!(smallest_positive_residue(-1, 4), 3);
        assert_eq!(smallest_positive_residue(6, 3), 3);
    }

    #[test]
    fn config_validation() {
        assert!(ResidueConfig::new(1, 0, 1, 1).is_err());
        assert!(ResidueConfig::new(2, 0, 1, 1).is_err());
        assert!(ResidueConfig::new(3, 0, 0, 1).is_err());
        assert!(ResidueConfig::new(3, 0, 1, 4).is_err());
        let cfg = ResidueConfig::new(3, 2, 1, 3).unwrap();
        assert_eq!(cfg.swapped().alpha(), 3);
        assert_eq!(cfg.classify_part(3), PartClass::Beta);
        assert_eq!(cfg.classify_part(4), PartClass::Alpha);
        assert_eq!(cfg.classify_part(5), PartClass::Neutral);
    }

    #[test]
    fn quad_data_examples() {
        let qd = QuadraticData::new(2, 0);
        assert_eq!(qd.e(), &[0, 0]);
        assert_eq!(qd.b(), &[q(0, 1), q(1, 2)]);

        let qd = QuadraticData::new(2, 1);
        assert_eq!(qd.e(), &[1, 0]);
        assert_eq!(qd.b(), &[q(1, 1), q(1, 2)]);

        let qd = QuadraticData::new(3, 4);
        assert_eq!(qd.e(), &[2, 1, 1]);
        assert_eq!(qd.b(), &[q(11, 6), q(7, 6), q(3, 2)]);
        let sum: BigRational = qd.b().iter().cloned().sum();
        assert_eq!(sum, q(9, 2));
    }

    #[test]
    fn quad_data_invariants() {
        for modulus in 2..=7u32 {
            for floor in 0..=15u32 {
                let qd = QuadraticData::new(modulus, floor);
                assert_eq!(qd.e().iter().sum::<i64>(), i64::from(floor));
                let lo = i64::from(floor / modulus);
                assert!(qd.e().iter().all(|&e| e == lo || e == lo + 1));
                assert!(qd.e().windows(2).all(|w| w[0] >= w[1]));
                let sum: BigRational = qd.b().iter().cloned().sum();
                assert_eq!(sum, q(2 * i64::from(floor) + 1, 2));
            }
        }
    }

    #[test]
    fn quad_form_examples() {
        let qd = QuadraticData::new(2, 0);
        assert_eq!(qd.quad_form(&[0, 0]).unwrap(), q(0, 1));
        assert_eq!(qd.quad_form(&[1, 0]).unwrap(), q(1, 2));
        assert_eq!(qd.scaled_weight(&[1, 0]).unwrap(), 1);
        // {2} is the smallest partition with a part congruent to 2 and > 1
        let qd = QuadraticData::new(2, 1);
        assert_eq!(qd.scaled_weight(&[0, 1]).unwrap(), 2);
        assert!(matches!(
            qd.quad_form(&[1]),
            Err(Error::Dimension {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn scaled_weight_matches_rational_form() {
        for modulus in 2..=5u32 {
            for floor in 0..=6u32 {
                let qd = QuadraticData::new(modulus, floor);
                for ell in LatticeClass::all(modulus).take(200) {
                    let v: Vec<i64> = ell.as_i64().iter().map(|x| 3 * x - 2).collect();
                    let h = qd.quad_form(&v).unwrap() * BigInt::from(modulus);
                    assert!(h.is_integer());
                    assert_eq!(h.to_integer(), BigInt::from(qd.scaled_weight(&v).unwrap()));
                }
            }
        }
    }

    #[test]
    fn lattice_classes() {
        assert_eq!(LatticeClass::all(3).count(), 27);
        let first: Vec<_> = LatticeClass::all(2).collect();
        assert_eq!(first[1].entries(), &[0, 1]);
        assert!(LatticeClass::new(vec![0, 2], 2).is_err());
        assert!(LatticeClass::new(vec![0], 2).is_err());
        let cfg = ResidueConfig::new(2, 0, 1, 2).unwrap();
        let ell = LatticeClass::new(vec![0, 0], 2).unwrap();
        assert_eq!(ell.offset(&cfg), 2);
    }
}
