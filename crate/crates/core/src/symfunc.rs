//! Truncated graded power-series rings in time variables and the Schur
//! function toolkit.
//!
//! A series lives in one or several named *blocks* of time variables
//! `t_1, t_2, ...` with the grading `deg t_k = k`.  Every block carries a
//! degree cap; all products are taken modulo the truncation ideal (terms of
//! block degree above the cap are discarded), which turns every identity in
//! this crate into a finite exact statement.
//!
//! - [`h_poly`]: complete homogeneous (elementary Schur) polynomials `h_k`
//! - [`schur`] / [`skew_schur`]: Jacobi--Trudi determinants
//! - [`cauchy_kernel`]: `exp(sum_k k t_k ttilde_k)`
//! - [`to_schur_basis`] / [`from_schur_basis`]: basis change via the
//!   character formula, with an independent linear-solve fallback
//! - [`shift_block`], [`scale_block`], [`specialize_block`], [`log_series`]

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::memo::MemoTable;
use crate::partitions::{partitions_of, sym_character, Partition};
use crate::scalar::{Rat, Scalar};

pub type BlockId = String;

/// Sparse exponent vector for one block: sorted `(k, a_k)` pairs with
/// `a_k >= 1`.  The graded degree is `sum k * a_k`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct Exponents(Vec<(u32, u32)>);

impl Exponents {
    pub fn unit() -> Self {
        Exponents(Vec::new())
    }

    pub fn var(k: u32) -> Self {
        assert!(k >= 1);
        Exponents(vec![(k, 1)])
    }

    pub fn from_pairs(mut pairs: Vec<(u32, u32)>) -> Self {
        pairs.retain(|&(_, a)| a > 0);
        pairs.sort_unstable();
        assert!(pairs.windows(2).all(|w| w[0].0 < w[1].0), "duplicate variable");
        Exponents(pairs)
    }

    /// Exponent vector of the monomial `prod t_k^{m_k(mu)}` indexed by the
    /// multiplicities of a partition (so `t^e` corresponds to `p_mu` up to
    /// the factor `prod k^{m_k}`).
    pub fn from_partition(mu: &Partition) -> Self {
        let mut pairs: Vec<(u32, u32)> = Vec::new();
        for &p in mu.parts() {
            match pairs.iter_mut().find(|(k, _)| *k == p) {
                Some((_, a)) => *a += 1,
                None => pairs.push((p, 1)),
            }
        }
        Exponents::from_pairs(pairs)
    }

    /// The partition whose multiplicities are this exponent vector.
    pub fn to_partition(&self) -> Partition {
        let mut parts = Vec::new();
        for &(k, a) in &self.0 {
            for _ in 0..a {
                parts.push(k);
            }
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition::new(parts)
    }

    pub fn pairs(&self) -> &[(u32, u32)] {
        &self.0
    }

    pub fn is_unit(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&(k, a)| k as u64 * a as u64).sum()
    }

    /// Total number of variable factors, `sum a_k`.
    pub fn weight(&self) -> u64 {
        self.0.iter().map(|&(_, a)| a as u64).sum()
    }

    pub fn mul(&self, other: &Exponents) -> Exponents {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(self.0[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(other.0[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((self.0[i].0, self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Exponents(out)
    }

    pub fn exponent_of(&self, k: u32) -> u32 {
        self.0.iter().find(|&&(v, _)| v == k).map(|&(_, a)| a).unwrap_or(0)
    }
}

/// A truncated element of the polynomial ring over one or several blocks of
/// time variables.  Equality is equality of all stored terms (and of the
/// block layout).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "SeriesRepr", from = "SeriesRepr")]
pub struct MultiSeries {
    blocks: Vec<(BlockId, u32)>,
    terms: BTreeMap<Vec<Exponents>, Scalar>,
}

/// JSON shape: terms as an explicit (exponents, coefficient) list, since
/// JSON object keys must be strings.
#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    blocks: Vec<(BlockId, u32)>,
    terms: Vec<(Vec<Exponents>, Scalar)>,
}

impl From<MultiSeries> for SeriesRepr {
    fn from(s: MultiSeries) -> Self {
        SeriesRepr {
            blocks: s.blocks,
            terms: s.terms.into_iter().collect(),
        }
    }
}

impl From<SeriesRepr> for MultiSeries {
    fn from(r: SeriesRepr) -> Self {
        let mut s = MultiSeries::zero(r.blocks);
        for (k, c) in r.terms {
            assert_eq!(k.len(), s.blocks.len(), "term arity mismatch");
            s.add_term(k, c);
        }
        s
    }
}

/// A single-block series; same representation, used where an operation
/// promises exactly one block.
pub type GradedSeries = MultiSeries;

impl MultiSeries {
    pub fn zero(blocks: Vec<(BlockId, u32)>) -> Self {
        MultiSeries { blocks, terms: BTreeMap::new() }
    }

    pub fn constant(blocks: Vec<(BlockId, u32)>, c: Scalar) -> Self {
        let mut s = MultiSeries::zero(blocks);
        s.add_term(vec![Exponents::unit(); s.blocks.len()], c);
        s
    }

    pub fn one(blocks: Vec<(BlockId, u32)>) -> Self {
        MultiSeries::constant(blocks, Scalar::one())
    }

    /// The monomial `t_{block,k}`.
    pub fn variable(blocks: Vec<(BlockId, u32)>, block: &str, k: u32) -> Self {
        let mut s = MultiSeries::zero(blocks);
        let bi = s.block_index(block).expect("unknown block");
        if k as u64 <= s.blocks[bi].1 as u64 {
            let mut key = vec![Exponents::unit(); s.blocks.len()];
            key[bi] = Exponents::var(k);
            s.add_term(key, Scalar::one());
        }
        s
    }

    pub fn blocks(&self) -> &[(BlockId, u32)] {
        &self.blocks
    }

    pub fn block_index(&self, name: &str) -> Option<usize> {
        self.blocks.iter().position(|(b, _)| b == name)
    }

    pub fn cap_of(&self, name: &str) -> Option<u32> {
        self.block_index(name).map(|i| self.blocks[i].1)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<Exponents>, &Scalar)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Scalar {
        self.terms
            .get(&vec![Exponents::unit(); self.blocks.len()])
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn coefficient(&self, key: &[Exponents]) -> Scalar {
        self.terms.get(key).cloned().unwrap_or_else(Scalar::zero)
    }

    fn within_caps(&self, key: &[Exponents]) -> bool {
        key.iter()
            .zip(&self.blocks)
            .all(|(e, (_, cap))| e.degree() <= *cap as u64)
    }

    /// Add `c * t^key`, dropping the term if it violates a cap or cancels.
    pub fn add_term(&mut self, key: Vec<Exponents>, c: Scalar) {
        debug_assert_eq!(key.len(), self.blocks.len());
        if c.is_zero() || !self.within_caps(&key) {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(e) => {
                e.insert(c);
            }
            Entry::Occupied(mut e) => {
                let v = e.get().add(&c);
                if v.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = v;
                }
            }
        }
    }

    pub fn add(&self, other: &MultiSeries) -> MultiSeries {
        assert_eq!(self.blocks, other.blocks, "block layout mismatch");
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> MultiSeries {
        MultiSeries {
            blocks: self.blocks.clone(),
            terms: self.terms.iter().map(|(k, c)| (k.clone(), c.neg())).collect(),
        }
    }

    pub fn sub(&self, other: &MultiSeries) -> MultiSeries {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &MultiSeries) -> MultiSeries {
        assert_eq!(self.blocks, other.blocks, "block layout mismatch");
        let mut out = MultiSeries::zero(self.blocks.clone());
        for (k1, c1) in &self.terms {
            for (k2, c2) in &other.terms {
                let key: Vec<Exponents> =
                    k1.iter().zip(k2).map(|(a, b)| a.mul(b)).collect();
                if out.within_caps(&key) {
                    out.add_term(key, c1.mul(c2));
                }
            }
        }
        out
    }

    pub fn mul_scalar(&self, c: &Scalar) -> MultiSeries {
        if c.is_zero() {
            return MultiSeries::zero(self.blocks.clone());
        }
        let mut out = MultiSeries::zero(self.blocks.clone());
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v.mul(c));
        }
        out
    }

    pub fn pow(&self, e: u32) -> MultiSeries {
        let mut out = MultiSeries::one(self.blocks.clone());
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Embed into a larger block layout (the existing blocks must appear,
    /// by name, with the new caps no smaller than needed for the terms).
    pub fn promote(&self, blocks: Vec<(BlockId, u32)>) -> MultiSeries {
        let map: Vec<Option<usize>> = blocks
            .iter()
            .map(|(b, _)| self.block_index(b))
            .collect();
        for (b, _) in &self.blocks {
            assert!(
                blocks.iter().any(|(nb, _)| nb == b),
                "promote drops block {b}"
            );
        }
        let mut out = MultiSeries::zero(blocks);
        for (k, c) in &self.terms {
            let key: Vec<Exponents> = map
                .iter()
                .map(|src| src.map(|i| k[i].clone()).unwrap_or_default())
                .collect();
            out.add_term(key, c.clone());
        }
        out
    }

    pub fn rename_block(&self, old: &str, new: &str) -> MultiSeries {
        let mut blocks = self.blocks.clone();
        let i = self.block_index(old).expect("unknown block");
        blocks[i].0 = new.to_string();
        MultiSeries { blocks, terms: self.terms.clone() }
    }

    /// Tighten caps; terms above the new caps are dropped.
    pub fn truncate_caps(&self, blocks: Vec<(BlockId, u32)>) -> MultiSeries {
        assert_eq!(blocks.len(), self.blocks.len());
        let mut out = MultiSeries::zero(blocks);
        for (k, c) in &self.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    /// Drop terms whose combined degree over the named blocks exceeds `cap`.
    pub fn truncate_joint(&self, names: &[&str], cap: u64) -> MultiSeries {
        let idxs: Vec<usize> = names
            .iter()
            .map(|n| self.block_index(n).expect("unknown block"))
            .collect();
        let mut out = MultiSeries::zero(self.blocks.clone());
        for (k, c) in &self.terms {
            let d: u64 = idxs.iter().map(|&i| k[i].degree()).sum();
            if d <= cap {
                out.add_term(k.clone(), c.clone());
            }
        }
        out
    }

    /// Partial derivative with respect to `t_{block,k}`.
    pub fn deriv(&self, block: &str, k: u32) -> MultiSeries {
        let bi = self.block_index(block).expect("unknown block");
        let mut out = MultiSeries::zero(self.blocks.clone());
        for (key, c) in &self.terms {
            let a = key[bi].exponent_of(k);
            if a == 0 {
                continue;
            }
            let mut pairs = key[bi].pairs().to_vec();
            for p in pairs.iter_mut() {
                if p.0 == k {
                    p.1 -= 1;
                }
            }
            let mut nk = key.clone();
            nk[bi] = Exponents::from_pairs(pairs);
            out.add_term(nk, c.mul_rat(&Rat::from_integer(BigInt::from(a))));
        }
        out
    }

    /// Multiply by `t_{block,k}`.
    pub fn mul_var(&self, block: &str, k: u32) -> MultiSeries {
        let bi = self.block_index(block).expect("unknown block");
        let mut out = MultiSeries::zero(self.blocks.clone());
        for (key, c) in &self.terms {
            let mut nk = key.clone();
            nk[bi] = nk[bi].mul(&Exponents::var(k));
            out.add_term(nk, c.clone());
        }
        out
    }

    /// Substitute `t_{block,k} -> c * t_{block,k}` for every `k`.
    pub fn scale_block(&self, block: &str, c: &Scalar) -> MultiSeries {
        let bi = self.block_index(block).expect("unknown block");
        let mut out = MultiSeries::zero(self.blocks.clone());
        for (key, coeff) in &self.terms {
            let w = key[bi].weight() as u32;
            out.add_term(key.clone(), coeff.mul(&c.pow(w)));
        }
        out
    }
}

/// Complete homogeneous polynomial `h_k` (`h_0 = 1`, `h_{k<0} = 0`),
/// defined by `exp(sum t_k z^k) = sum h_k z^k`, truncated at `cap`.
pub fn h_poly(k: i64, block: &str, cap: u32) -> GradedSeries {
    let blocks = vec![(block.to_string(), cap)];
    if k < 0 {
        return MultiSeries::zero(blocks);
    }
    if k == 0 {
        return MultiSeries::one(blocks);
    }
    let k = k as u64;
    if k > cap as u64 {
        return MultiSeries::zero(blocks);
    }
    // h_k = sum over partitions mu of k of t^mu / prod m_j!
    let mut out = MultiSeries::zero(blocks);
    for mu in partitions_of(k) {
        let e = Exponents::from_partition(&mu);
        let mut denom = BigInt::one();
        for &(_, a) in e.pairs() {
            for j in 1..=a as u64 {
                denom *= BigInt::from(j);
            }
        }
        out.add_term(
            vec![e],
            Scalar::from_rat(Rat::new(BigInt::one(), denom)),
        );
    }
    out
}

/// Determinant of a square matrix of single-block series, by dynamic
/// programming over row subsets (columns processed left to right).
fn series_det(mat: &[Vec<GradedSeries>], blocks: Vec<(BlockId, u32)>) -> GradedSeries {
    let n = mat.len();
    if n == 0 {
        return MultiSeries::one(blocks);
    }
    let mut states: BTreeMap<u64, MultiSeries> = BTreeMap::new();
    states.insert(0, MultiSeries::one(blocks.clone()));
    for col in 0..n {
        let mut next: BTreeMap<u64, MultiSeries> = BTreeMap::new();
        for (&used, acc) in &states {
            for row in 0..n {
                let bit = 1u64 << row;
                if used & bit != 0 || mat[row][col].is_zero() {
                    continue;
                }
                let jumps = (used >> (row + 1)).count_ones();
                let term = acc.mul(&mat[row][col]);
                let term = if jumps % 2 == 1 { term.neg() } else { term };
                next.entry(used | bit)
                    .and_modify(|s| *s = s.add(&term))
                    .or_insert(term);
            }
        }
        states = next;
    }
    states
        .into_values()
        .next()
        .unwrap_or_else(|| MultiSeries::zero(blocks))
}

static SCHUR_MEMO: MemoTable<(Partition, Partition), Vec<(Exponents, Scalar)>> =
    MemoTable::new(512);

/// Skew Schur function `s_{lambda/mu}` by the Jacobi--Trudi determinant
/// `det h_{lambda_i - mu_j - i + j}`; zero unless `mu` fits inside `lambda`.
pub fn skew_schur(lam: &Partition, mu: &Partition, block: &str, cap: u32) -> GradedSeries {
    let blocks = vec![(block.to_string(), cap)];
    if !lam.contains(mu) {
        return MultiSeries::zero(blocks);
    }
    let deg = lam.size() - mu.size();
    if deg > cap as u64 {
        return MultiSeries::zero(blocks);
    }
    let terms = SCHUR_MEMO.get_or_insert_with(&(lam.clone(), mu.clone()), || {
        let n = lam.len();
        let inner_cap = deg as u32;
        let mat: Vec<Vec<GradedSeries>> = (1..=n)
            .map(|i| {
                (1..=n)
                    .map(|j| {
                        let idx = lam.part(i) as i64 - mu.part(j) as i64 - i as i64 + j as i64;
                        h_poly(idx, "s", inner_cap)
                    })
                    .collect()
            })
            .collect();
        let det = series_det(&mat, vec![("s".to_string(), inner_cap)]);
        det.terms.into_iter().map(|(k, c)| (k.into_iter().next().unwrap(), c)).collect()
    });
    let mut out = MultiSeries::zero(blocks);
    for (e, c) in terms {
        out.add_term(vec![e], c);
    }
    out
}

/// Schur function `s_lambda` (Jacobi--Trudi), homogeneous of degree
/// `|lambda|`; zero when `|lambda| > cap`.
pub fn schur(lam: &Partition, block: &str, cap: u32) -> GradedSeries {
    skew_schur(lam, &Partition::empty(), block, cap)
}

/// Power sum `p_mu = prod p_{mu_i}` with `p_k = k t_k`.
pub fn power_sum(mu: &Partition, block: &str, cap: u32) -> GradedSeries {
    let blocks = vec![(block.to_string(), cap)];
    if mu.size() > cap as u64 {
        return MultiSeries::zero(blocks);
    }
    let e = Exponents::from_partition(mu);
    let mut coeff = BigInt::one();
    for &(k, a) in e.pairs() {
        for _ in 0..a {
            coeff *= BigInt::from(k);
        }
    }
    let mut out = MultiSeries::zero(blocks);
    out.add_term(vec![e], Scalar::from_rat(Rat::from_integer(coeff)));
    out
}

/// `exp(sum_k k t_k ttilde_k)` truncated per block.
pub fn cauchy_kernel(block_a: &str, block_b: &str, cap_a: u32, cap_b: u32) -> MultiSeries {
    let blocks = vec![(block_a.to_string(), cap_a), (block_b.to_string(), cap_b)];
    let mut arg = MultiSeries::zero(blocks.clone());
    for k in 1..=cap_a.min(cap_b) {
        arg.add_term(
            vec![Exponents::var(k), Exponents::var(k)],
            Scalar::from_int(k as i64),
        );
    }
    exp_series(&arg).expect("kernel argument has no constant term")
}

/// Formal exponential of a series with zero constant term.
pub fn exp_series(f: &MultiSeries) -> Result<MultiSeries> {
    if !f.constant_term().is_zero() {
        return Err(CoreError::Domain("exp_series: nonzero constant term".into()));
    }
    let mut out = MultiSeries::one(f.blocks.clone());
    let mut power = MultiSeries::one(f.blocks.clone());
    let mut k = 1u64;
    loop {
        power = power.mul(f);
        if power.is_zero() {
            break;
        }
        let mut fact = BigInt::one();
        for j in 1..=k {
            fact *= BigInt::from(j);
        }
        out = out.add(&power.mul_scalar(&Scalar::from_rat(Rat::new(BigInt::one(), fact))));
        k += 1;
    }
    Ok(out)
}

/// Formal logarithm of a series with constant term 1 (Mercator series,
/// exact modulo the truncation ideal).
pub fn log_series(f: &MultiSeries) -> Result<MultiSeries> {
    if !f.constant_term().is_one() {
        return Err(CoreError::Domain("log_series: constant term must be 1".into()));
    }
    let g = f.sub(&MultiSeries::one(f.blocks.clone()));
    let mut out = MultiSeries::zero(f.blocks.clone());
    let mut power = MultiSeries::one(f.blocks.clone());
    let mut k = 1i64;
    loop {
        power = power.mul(&g);
        if power.is_zero() {
            break;
        }
        let c = Rat::new(BigInt::from(if k % 2 == 1 { 1 } else { -1 }), BigInt::from(k));
        out = out.add(&power.mul_scalar(&Scalar::from_rat(c)));
        k += 1;
    }
    Ok(out)
}

/// Schur-basis expansion of a single-block polynomial via the character
/// formula: the `p`-expansion of `f` paired against
/// `s_lambda = sum_mu chi^lambda(mu) p_mu / z_mu`.
pub fn to_schur_basis(f: &GradedSeries) -> BTreeMap<Partition, Scalar> {
    assert_eq!(f.blocks.len(), 1, "to_schur_basis needs a single block");
    // f = sum_mu f^p_mu p_mu with t^e = p_{mu(e)} / prod k^{a_k}
    let mut p_coeffs: BTreeMap<Partition, Scalar> = BTreeMap::new();
    for (key, c) in &f.terms {
        let e = &key[0];
        let mut denom = BigInt::one();
        for &(k, a) in e.pairs() {
            for _ in 0..a {
                denom *= BigInt::from(k);
            }
        }
        let mu = e.to_partition();
        let v = c.mul_rat(&Rat::new(BigInt::one(), denom));
        p_coeffs
            .entry(mu)
            .and_modify(|x| *x = x.add(&v))
            .or_insert(v);
    }
    let mut out: BTreeMap<Partition, Scalar> = BTreeMap::new();
    let degrees: std::collections::BTreeSet<u64> =
        p_coeffs.keys().map(|mu| mu.size()).collect();
    for d in degrees {
        for lam in partitions_of(d) {
            let mut acc = Scalar::zero();
            for (mu, v) in p_coeffs.iter().filter(|(mu, _)| mu.size() == d) {
                let chi = sym_character(&lam, mu).expect("sizes match");
                if !chi.is_zero() {
                    acc = acc.add(&v.mul_rat(&Rat::from_integer(chi)));
                }
            }
            if !acc.is_zero() {
                out.insert(lam, acc);
            }
        }
    }
    out
}

/// Inverse of [`to_schur_basis`].
pub fn from_schur_basis(
    coeffs: &BTreeMap<Partition, Scalar>,
    block: &str,
    cap: u32,
) -> GradedSeries {
    let mut out = MultiSeries::zero(vec![(block.to_string(), cap)]);
    for (lam, c) in coeffs {
        out = out.add(&schur(lam, block, cap).mul_scalar(c));
    }
    out
}

/// Independent route for the Schur-basis expansion: per homogeneous degree,
/// solve the linear system against the Jacobi--Trudi monomial matrix by
/// exact Gaussian elimination.  Must agree with [`to_schur_basis`].
pub fn to_schur_basis_by_solve(f: &GradedSeries) -> BTreeMap<Partition, Scalar> {
    assert_eq!(f.blocks.len(), 1);
    let mut out = BTreeMap::new();
    let degrees: std::collections::BTreeSet<u64> =
        f.terms.keys().map(|k| k[0].degree()).collect();
    for d in degrees {
        let lams = partitions_of(d);
        let monos: Vec<Exponents> = {
            let mut set: std::collections::BTreeSet<Exponents> = std::collections::BTreeSet::new();
            for mu in &lams {
                set.insert(Exponents::from_partition(mu));
            }
            set.into_iter().collect()
        };
        let n = lams.len();
        assert_eq!(monos.len(), n);
        // A[row=mono][col=lam] over rationals, rhs over scalars
        let mut a: Vec<Vec<Rat>> = vec![vec![Rat::zero(); n]; n];
        for (col, lam) in lams.iter().enumerate() {
            let s = schur(lam, "s", d as u32);
            for (key, c) in &s.terms {
                let row = monos.binary_search(&key[0]).expect("mono present");
                a[row][col] = c.as_rat().expect("schur coefficients are rational");
            }
        }
        let mut rhs: Vec<Scalar> = monos
            .iter()
            .map(|m| f.coefficient(&[m.clone()]))
            .collect();
        // forward elimination with partial pivot by first nonzero
        let mut col_of_row = vec![usize::MAX; n];
        let mut used_rows = vec![false; n];
        for col in 0..n {
            let piv = (0..n)
                .find(|&r| !used_rows[r] && !a[r][col].is_zero())
                .expect("Jacobi--Trudi matrix is invertible");
            used_rows[piv] = true;
            col_of_row[piv] = col;
            let pv = a[piv][col].clone();
            for r in 0..n {
                if r != piv && !a[r][col].is_zero() {
                    let factor = a[r][col].clone() / pv.clone();
                    for cc in 0..n {
                        let delta = a[piv][cc].clone() * factor.clone();
                        a[r][cc] -= delta;
                    }
                    let delta = rhs[piv].mul_rat(&factor);
                    rhs[r] = rhs[r].sub(&delta);
                }
            }
        }
        for r in 0..n {
            let col = col_of_row[r];
            let v = rhs[r].mul_rat(&(Rat::one() / a[r][col].clone()));
            if !v.is_zero() {
                out.insert(lams[col].clone(), v);
            }
        }
    }
    out
}

/// Decompose a multi-block series along one block:
/// `f = sum_lambda s_lambda(t_block) * component_lambda(rest)`.
/// The returned components no longer contain `block`.
pub fn schur_components(f: &MultiSeries, block: &str) -> BTreeMap<Partition, MultiSeries> {
    let bi = f.block_index(block).expect("unknown block");
    let rest_blocks: Vec<(BlockId, u32)> = f
        .blocks
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != bi)
        .map(|(_, b)| b.clone())
        .collect();
    let mut out: BTreeMap<Partition, MultiSeries> = BTreeMap::new();
    for (key, c) in &f.terms {
        let e = &key[bi];
        let d = e.degree();
        let mu = e.to_partition();
        let mut denom = BigInt::one();
        for &(k, a) in e.pairs() {
            for _ in 0..a {
                denom *= BigInt::from(k);
            }
        }
        let v = c.mul_rat(&Rat::new(BigInt::one(), denom));
        let rest_key: Vec<Exponents> = key
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != bi)
            .map(|(_, e)| e.clone())
            .collect();
        for lam in partitions_of(d) {
            let chi = sym_character(&lam, &mu).expect("sizes match");
            if chi.is_zero() {
                continue;
            }
            let coeff = v.mul_rat(&Rat::from_integer(chi));
            out.entry(lam.clone())
                .or_insert_with(|| MultiSeries::zero(rest_blocks.clone()))
                .add_term(rest_key.clone(), coeff);
        }
    }
    out.retain(|_, s| !s.is_zero());
    out
}

/// Reassemble from [`schur_components`], restoring `block` at position
/// `block_pos` with cap `cap`.
pub fn attach_schur(
    components: &BTreeMap<Partition, MultiSeries>,
    block: &str,
    cap: u32,
    block_pos: usize,
    rest_blocks: &[(BlockId, u32)],
) -> MultiSeries {
    let mut blocks = rest_blocks.to_vec();
    blocks.insert(block_pos, (block.to_string(), cap));
    let mut out = MultiSeries::zero(blocks.clone());
    for (lam, comp) in components {
        if lam.size() > cap as u64 {
            continue;
        }
        let s = schur(lam, block, cap);
        for (skey, sc) in &s.terms {
            for (ckey, cc) in &comp.terms {
                let mut key = ckey.clone();
                key.insert(block_pos, skey[0].clone());
                out.add_term(key, sc.mul(cc));
            }
        }
    }
    out
}

/// `f(t + ttilde)`: substitute `t_k -> t_k + ttilde_k` in `block`, expanding
/// into a fresh block appended at the end.
pub fn shift_block(f: &MultiSeries, block: &str, new_block: &str, new_cap: u32) -> MultiSeries {
    let bi = f.block_index(block).expect("unknown block");
    let mut blocks = f.blocks.clone();
    blocks.push((new_block.to_string(), new_cap));
    let mut out = MultiSeries::zero(blocks);
    for (key, c) in &f.terms {
        // expand prod_k (t_k + u_k)^{a_k}
        let pairs = key[bi].pairs().to_vec();
        let mut splits: Vec<(Vec<(u32, u32)>, Vec<(u32, u32)>, Rat)> =
            vec![(Vec::new(), Vec::new(), Rat::one())];
        for &(k, a) in &pairs {
            let mut next = Vec::new();
            for (t_part, u_part, coeff) in &splits {
                for j in 0..=a {
                    // binomial(a, j)
                    let mut binom = BigInt::one();
                    for x in 0..j as u64 {
                        binom = binom * BigInt::from(a as u64 - x) / BigInt::from(x + 1);
                    }
                    let mut t2 = t_part.clone();
                    let mut u2 = u_part.clone();
                    if a - j > 0 {
                        t2.push((k, a - j));
                    }
                    if j > 0 {
                        u2.push((k, j));
                    }
                    next.push((t2, u2, coeff * Rat::from_integer(binom)));
                }
            }
            splits = next;
        }
        for (t_part, u_part, coeff) in splits {
            let mut nkey = key.clone();
            nkey[bi] = Exponents::from_pairs(t_part);
            nkey.push(Exponents::from_pairs(u_part));
            out.add_term(nkey, c.mul_rat(&coeff));
        }
    }
    out
}

/// Substitution rules for one block of time variables.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum SpecializeRule {
    /// `t_k :=` given scalar (missing `k` read as 0).
    Explicit(BTreeMap<u32, Scalar>),
    /// `t_k := N / k`.
    PrincipalN(Scalar),
    /// `t_k := delta_{k,1}`.
    DeltaK1,
    /// `t_k := delta_{k,2} * c`.
    DeltaK2(Scalar),
    /// Miwa parametrization `t_k := (sum_i a_i^k) / k` for explicit
    /// eigenvalues `a_i`.
    Miwa(Vec<Scalar>),
}

impl SpecializeRule {
    pub fn value_of(&self, k: u32) -> Scalar {
        match self {
            SpecializeRule::Explicit(map) => map.get(&k).cloned().unwrap_or_else(Scalar::zero),
            SpecializeRule::PrincipalN(n) => {
                n.mul_rat(&Rat::new(BigInt::one(), BigInt::from(k)))
            }
            SpecializeRule::DeltaK1 => {
                if k == 1 {
                    Scalar::one()
                } else {
                    Scalar::zero()
                }
            }
            SpecializeRule::DeltaK2(c) => {
                if k == 2 {
                    c.clone()
                } else {
                    Scalar::zero()
                }
            }
            SpecializeRule::Miwa(eigs) => {
                let mut acc = Scalar::zero();
                for a in eigs {
                    acc = acc.add(&a.pow(k));
                }
                acc.mul_rat(&Rat::new(BigInt::one(), BigInt::from(k)))
            }
        }
    }
}

/// Substitute the rule into `block`; the block disappears from the layout.
pub fn specialize_block(f: &MultiSeries, block: &str, rule: &SpecializeRule) -> MultiSeries {
    let bi = f.block_index(block).expect("unknown block");
    let rest_blocks: Vec<(BlockId, u32)> = f
        .blocks
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != bi)
        .map(|(_, b)| b.clone())
        .collect();
    let mut out = MultiSeries::zero(rest_blocks);
    for (key, c) in &f.terms {
        let mut factor = Scalar::one();
        for &(k, a) in key[bi].pairs() {
            factor = factor.mul(&rule.value_of(k).pow(a));
            if factor.is_zero() {
                break;
            }
        }
        if factor.is_zero() {
            continue;
        }
        let rest_key: Vec<Exponents> = key
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != bi)
            .map(|(_, e)| e.clone())
            .collect();
        out.add_term(rest_key, c.mul(&factor));
    }
    out
}

/// Fully specialize a single-block series to a scalar.
pub fn specialize(f: &GradedSeries, rule: &SpecializeRule) -> Scalar {
    assert_eq!(f.blocks.len(), 1, "specialize needs a single block");
    let name = f.blocks[0].0.clone();
    specialize_block(f, &name, rule).constant_term()
}

/// Littlewood--Richardson coefficient by brute-force product of
/// Jacobi--Trudi polynomials (used by `partitions::lr_coefficient`).
pub(crate) fn lr_by_product(lam: &Partition, mu: &Partition, nu: &Partition) -> BigInt {
    let cap = (mu.size() + nu.size()) as u32;
    let prod = schur(mu, "s", cap).mul(&schur(nu, "s", cap));
    let coeffs = to_schur_basis(&prod);
    coeffs
        .get(lam)
        .and_then(|c| c.as_rat())
        .map(|r| {
            assert!(r.denom().is_one(), "LR coefficient must be an integer");
            r.numer().clone()
        })
        .unwrap_or_else(BigInt::zero)
}
