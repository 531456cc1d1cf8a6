//! Integer partitions and Young-diagram combinatorics.
//!
//! - [`Partition`]: weakly decreasing positive parts; transpose, containment,
//!   Frobenius coordinates, cell contents
//! - [`enumerate_partitions`] / [`partitions_of`]: deterministic
//!   (size, reverse-lexicographic) enumeration
//! - [`sym_character`]: irreducible symmetric-group characters by the
//!   Murnaghan--Nakayama rule over beta-numbers, memoized
//! - [`lr_coefficient`]: Littlewood--Richardson coefficients by brute-force
//!   expansion of Jacobi--Trudi products in a truncated ring
//! - [`z_centralizer`]: the conjugacy-class centralizer order `z_mu`

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CoreError, Result};
use crate::memo::MemoTable;

/// An integer partition / Young diagram.  Rows are indexed from 1 downwards,
/// columns from 1 rightwards; the cell `(i, j)` has content `j - i`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&p| p > 0);
        assert!(
            parts.windows(2).all(|w| w[0] >= w[1]),
            "parts must be weakly decreasing"
        );
        Partition { parts }
    }

    pub fn empty() -> Self {
        Partition { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// `|lambda|`, the number of cells.
    pub fn size(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    /// `ell(lambda)`, the number of nonzero parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    /// Part `i` (1-based), 0 beyond the last row.
    pub fn part(&self, i: usize) -> u32 {
        if i >= 1 && i <= self.parts.len() {
            self.parts[i - 1]
        } else {
            0
        }
    }

    /// Column lengths of the diagram.
    pub fn transpose(&self) -> Partition {
        let cols = self.part(1) as usize;
        let mut t = Vec::with_capacity(cols);
        for j in 1..=cols {
            t.push(self.parts.iter().filter(|&&p| p as usize >= j).count() as u32);
        }
        Partition { parts: t }
    }

    /// True iff `mu` fits inside `self`: `mu_i <= self_i` for all `i`.
    pub fn contains(&self, mu: &Partition) -> bool {
        (1..=mu.len()).all(|i| mu.part(i) <= self.part(i))
    }

    /// All cells `(i, j)` in row-major order, 1-based.
    pub fn cells(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.parts
            .iter()
            .enumerate()
            .flat_map(|(i, &p)| (1..=p).map(move |j| (i as u32 + 1, j)))
    }

    /// `sum over cells of (n + j - i)`.
    pub fn content_sum(&self, n: i64) -> i64 {
        self.cells().map(|(i, j)| n + j as i64 - i as i64).sum()
    }

    pub fn frobenius(&self) -> FrobeniusCoords {
        let tr = self.transpose();
        let mut alpha = Vec::new();
        let mut beta = Vec::new();
        for i in 1.. {
            if self.part(i) >= i as u32 && tr.part(i) >= i as u32 {
                alpha.push(self.part(i) - i as u32);
                beta.push(tr.part(i) - i as u32);
            } else {
                break;
            }
        }
        let b = beta.iter().map(|&x| x as u64 + 1).sum();
        FrobeniusCoords { alpha, beta, b }
    }

}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (k, p) in self.parts.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "]")
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.parts.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let parts = Vec::<u32>::deserialize(de)?;
        if !parts.iter().all(|&p| p > 0) || !parts.windows(2).all(|w| w[0] >= w[1]) {
            return Err(serde::de::Error::custom(
                "partition parts must be positive and weakly decreasing",
            ));
        }
        Ok(Partition { parts })
    }
}

/// Frobenius coordinates `(alpha | beta)` together with
/// `b(lambda) = sum (beta_i + 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FrobeniusCoords {
    pub alpha: Vec<u32>,
    pub beta: Vec<u32>,
    pub b: u64,
}

/// All partitions of exactly `n`, in descending lexicographic order
/// ("reverse-lexicographic": `[n]` first, `[1,1,...,1]` last).
pub fn partitions_of(n: u64) -> Vec<Partition> {
    let mut out = Vec::new();
    let mut stack = Vec::new();
    fn rec(remaining: u64, max_part: u64, stack: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if remaining == 0 {
            out.push(Partition { parts: stack.clone() });
            return;
        }
        let hi = remaining.min(max_part);
        for p in (1..=hi).rev() {
            stack.push(p as u32);
            rec(remaining - p, p, stack, out);
            stack.pop();
        }
    }
    rec(n, n, &mut stack, &mut out);
    out
}

/// All partitions of every size `0..=max_size`, ordered by
/// (size, reverse-lexicographic).  Deterministic, each exactly once.
pub fn enumerate_partitions(max_size: u64) -> Vec<Partition> {
    (0..=max_size).flat_map(partitions_of).collect()
}

/// `z_mu = prod over part values k of k^{m_k} m_k!`, the centralizer order
/// of the conjugacy class with cycle type `mu`.
pub fn z_centralizer(mu: &Partition) -> BigInt {
    let mut z = BigInt::one();
    let mut run_val = 0u32;
    let mut run_len = 0u64;
    for &p in mu.parts() {
        if p == run_val {
            run_len += 1;
        } else {
            run_val = p;
            run_len = 1;
        }
        z *= BigInt::from(run_val) * BigInt::from(run_len);
    }
    z
}

/// Beta-numbers `lambda_i + l - i` for a fixed padding length `l >= len`.
fn beta_set(lam: &Partition, l: usize) -> Vec<i64> {
    (1..=l)
        .map(|i| lam.part(i) as i64 + l as i64 - i as i64)
        .collect()
}

fn partition_from_beta(mut beta: Vec<i64>) -> Partition {
    beta.sort_unstable_by(|a, b| b.cmp(a));
    let l = beta.len();
    let parts: Vec<u32> = beta
        .iter()
        .enumerate()
        .map(|(idx, &b)| (b - (l as i64 - idx as i64 - 1)) as u32)
        .collect();
    Partition::new(parts)
}

static CHARACTER_MEMO: MemoTable<(Partition, Partition), BigInt> = MemoTable::new(128);

/// Irreducible symmetric-group character `chi^lambda(mu)` by the
/// Murnaghan--Nakayama rule.  Requires `|lambda| = |mu|`.
pub fn sym_character(lam: &Partition, mu: &Partition) -> Result<BigInt> {
    if lam.size() != mu.size() {
        return Err(CoreError::SizeMismatch { lhs: lam.size(), rhs: mu.size() });
    }
    Ok(mn_character(lam, mu.parts()))
}

fn mn_character(lam: &Partition, mu_parts: &[u32]) -> BigInt {
    if mu_parts.is_empty() {
        return BigInt::one();
    }
    let key = (lam.clone(), Partition { parts: mu_parts.to_vec() });
    if let Some(v) = CHARACTER_MEMO.get(&key) {
        return v;
    }
    let r = mu_parts[0] as i64;
    let rest = &mu_parts[1..];
    let l = lam.len().max(1);
    let beta = beta_set(lam, l);
    let mut total = BigInt::zero();
    // Removing a border strip of length r = moving one beta-number down by r
    // while keeping all beta-numbers distinct; the sign counts the
    // beta-numbers it jumps over.
    for (idx, &b) in beta.iter().enumerate() {
        let nb = b - r;
        if nb < 0 || beta.contains(&nb) {
            continue;
        }
        let jumped = beta.iter().filter(|&&x| x > nb && x < b).count();
        let sign = if jumped % 2 == 0 { BigInt::one() } else { -BigInt::one() };
        let mut new_beta = beta.clone();
        new_beta[idx] = nb;
        let sub = partition_from_beta(new_beta);
        total += sign * mn_character(&sub, rest);
    }
    CHARACTER_MEMO.insert(key, total.clone());
    total
}

/// `dim lambda` = number of standard Young tableaux = `chi^lambda(1^n)`.
pub fn dimension(lam: &Partition) -> BigInt {
    let ones = vec![1u32; lam.size() as usize];
    mn_character(lam, &ones)
}

static LR_MEMO: MemoTable<(Partition, Partition, Partition), BigInt> = MemoTable::new(160);

/// Littlewood--Richardson coefficient `c^lambda_{mu nu}`: the coefficient of
/// `s_lambda` in `s_mu * s_nu`, computed by multiplying Jacobi--Trudi
/// polynomials in a truncated ring and reading off the Schur expansion.
pub fn lr_coefficient(lam: &Partition, mu: &Partition, nu: &Partition) -> BigInt {
    if lam.size() != mu.size() + nu.size() || !lam.contains(mu) || !lam.contains(nu) {
        return BigInt::zero();
    }
    LR_MEMO.get_or_insert_with(&(lam.clone(), mu.clone(), nu.clone()), || {
        crate::symfunc::lr_by_product(lam, mu, nu)
    })
}

/// `chi^lambda(mu) / z_mu` as an exact rational, a convenience for
/// character-sum formulas.
pub fn character_over_z(lam: &Partition, mu: &Partition) -> Result<BigRational> {
    let chi = sym_character(lam, mu)?;
    Ok(BigRational::new(chi, z_centralizer(mu)))
}
