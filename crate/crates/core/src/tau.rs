//! Nested hypergeometric tau-functions: the chain expansion over
//! containment-ordered partition sequences, coefficient queries, duality,
//! reductions, stuffed (Littlewood--Richardson) insertions, and the
//! truncated bilinear Hirota residue check.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::partitions::{enumerate_partitions, lr_coefficient, Partition};
use crate::scalar::{Rat, Scalar};
use crate::symfunc::{exp_series, schur, skew_schur, BlockId, Exponents, MultiSeries};
use crate::weights::{c_norm, content_product, WeightGen};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    pub fn flip(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

impl std::fmt::Display for Sign {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+",
            Sign::Minus => "-",
        })
    }
}

/// The data of one nested tau-function: charge `n`, nesting depth `m`,
/// signs `(sigma_m, ..., sigma_1)`, diagonal weights `(O_m, ..., O_0)`,
/// per-block degree caps `D_0..D_{m+1}`, and optional stuffed insertions
/// (position `i` in `1..=m` maps to the inserted partition `nu`; the
/// corresponding time block is then absent and its cap must be 0).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NestedSpec {
    pub n: i64,
    pub m: usize,
    /// `(sigma_m, ..., sigma_1)`, outermost first.
    pub sigma: Vec<Sign>,
    /// `(O_m, ..., O_0)`, outermost first.
    pub weights: Vec<WeightGen>,
    /// `D_0..D_{m+1}`.
    pub caps: Vec<u32>,
    #[serde(default)]
    pub insertions: BTreeMap<usize, Partition>,
}

impl NestedSpec {
    /// The m=0 (hypergeometric) spec.
    pub fn hypergeometric(n: i64, weight: WeightGen, cap0: u32, cap1: u32) -> Self {
        NestedSpec {
            n,
            m: 0,
            sigma: Vec::new(),
            weights: vec![weight],
            caps: vec![cap0, cap1],
            insertions: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sigma.len() != self.m {
            return Err(CoreError::Domain(format!(
                "expected {} signs, got {}",
                self.m,
                self.sigma.len()
            )));
        }
        if self.weights.len() != self.m + 1 {
            return Err(CoreError::Domain(format!(
                "expected {} weights, got {}",
                self.m + 1,
                self.weights.len()
            )));
        }
        if self.caps.len() != self.m + 2 {
            return Err(CoreError::Domain(format!(
                "expected {} caps, got {}",
                self.m + 2,
                self.caps.len()
            )));
        }
        for w in &self.weights {
            w.validate()?;
        }
        for (&i, _) in &self.insertions {
            if i < 1 || i > self.m {
                return Err(CoreError::Domain(format!(
                    "insertion position {i} out of range 1..={}",
                    self.m
                )));
            }
            if self.caps[i] != 0 {
                return Err(CoreError::Domain(format!(
                    "inserted position {i} must have cap 0 (its block is absent)"
                )));
            }
        }
        Ok(())
    }

    /// Sign `sigma_i` for `i` in `1..=m`.
    pub fn sigma_at(&self, i: usize) -> Sign {
        self.sigma[self.m - i]
    }

    /// Weight `O_j` for `j` in `0..=m`.
    pub fn weight_at(&self, j: usize) -> &WeightGen {
        &self.weights[self.m - j]
    }

    pub fn block_name(j: usize) -> String {
        format!("t{j}")
    }

    /// The blocks of the expanded series, ascending: `t_0`, the non-inserted
    /// middle blocks, `t_{m+1}`.
    pub fn block_layout(&self) -> Vec<(BlockId, u32)> {
        let mut blocks = vec![(Self::block_name(0), self.caps[0])];
        blocks.extend(self.middle_blocks());
        blocks.push((Self::block_name(self.m + 1), self.caps[self.m + 1]));
        blocks
    }

    /// Non-inserted middle blocks `t_1..t_m`, ascending.
    pub fn middle_blocks(&self) -> Vec<(BlockId, u32)> {
        (1..=self.m)
            .filter(|i| !self.insertions.contains_key(i))
            .map(|i| (Self::block_name(i), self.caps[i]))
            .collect()
    }
}

/// An expanded nested tau-function.  `schur_view` keys on the two boundary
/// partitions `(lambda_start = lambda_0, lambda_end = lambda_m)`; the value
/// is the coefficient of `s_{lambda_0}(t_0) s_{lambda_m}(t_{m+1})` as a
/// series in the middle blocks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "TauSeriesRepr", from = "TauSeriesRepr")]
pub struct TauSeries {
    pub spec: NestedSpec,
    pub series: MultiSeries,
    pub schur_view: BTreeMap<(Partition, Partition), MultiSeries>,
}

/// JSON shape: `schur_view` as an explicit array of entries.
#[derive(Serialize, Deserialize)]
struct TauSeriesRepr {
    spec: NestedSpec,
    series: MultiSeries,
    schur_view: Vec<ViewEntry>,
}

#[derive(Serialize, Deserialize)]
struct ViewEntry {
    start: Partition,
    end: Partition,
    series: MultiSeries,
}

impl From<TauSeries> for TauSeriesRepr {
    fn from(t: TauSeries) -> Self {
        TauSeriesRepr {
            spec: t.spec,
            series: t.series,
            schur_view: t
                .schur_view
                .into_iter()
                .map(|((start, end), series)| ViewEntry { start, end, series })
                .collect(),
        }
    }
}

impl From<TauSeriesRepr> for TauSeries {
    fn from(r: TauSeriesRepr) -> Self {
        TauSeries {
            spec: r.spec,
            series: r.series,
            schur_view: r
                .schur_view
                .into_iter()
                .map(|e| ((e.start, e.end), e.series))
                .collect(),
        }
    }
}

impl TauSeries {
    /// Rebuild the full series from `schur_view`; equals `series` by
    /// construction, kept as an invariant check.
    pub fn series_from_view(&self) -> MultiSeries {
        assemble_series(&self.spec, &self.schur_view)
    }
}

fn assemble_series(
    spec: &NestedSpec,
    view: &BTreeMap<(Partition, Partition), MultiSeries>,
) -> MultiSeries {
    let blocks = spec.block_layout();
    let end_name = NestedSpec::block_name(spec.m + 1);
    let mut out = MultiSeries::zero(blocks.clone());
    for ((start, end), mid) in view {
        let s0 = schur(start, &NestedSpec::block_name(0), spec.caps[0]).promote(blocks.clone());
        let se = schur(end, &end_name, spec.caps[spec.m + 1]).promote(blocks.clone());
        let midp = mid.promote(blocks.clone());
        out = out.add(&s0.mul(&se).mul(&midp));
    }
    out
}

/// Candidate next partitions for one chain step, together with the scalar
/// (LR) factor when the step is an insertion and the step's series factor
/// block otherwise.
fn step_candidates(
    prev: &Partition,
    sign: Sign,
    allowed: u32,
    insertion: Option<&Partition>,
    max_len: Option<u32>,
) -> Vec<(Partition, Rat)> {
    let mut out = Vec::new();
    match sign {
        Sign::Plus => {
            // lambda_i inside prev
            let max_deficit = match insertion {
                Some(nu) => {
                    if nu.size() > prev.size() {
                        return out;
                    }
                    nu.size() as u32
                }
                None => allowed,
            };
            let lo = prev.size().saturating_sub(max_deficit as u64);
            for size in lo..=prev.size() {
                if insertion.is_some() && size != prev.size() - insertion.unwrap().size() {
                    continue;
                }
                for cand in enumerate_partitions(size) {
                    if cand.size() != size || !prev.contains(&cand) {
                        continue;
                    }
                    let factor = match insertion {
                        Some(nu) => {
                            let c = lr_coefficient(prev, &cand, nu);
                            if c.is_zero() {
                                continue;
                            }
                            Rat::from_integer(c)
                        }
                        None => Rat::one(),
                    };
                    out.push((cand, factor));
                }
            }
        }
        Sign::Minus => {
            // lambda_i contains prev
            let excess = match insertion {
                Some(nu) => nu.size() as u32,
                None => allowed,
            };
            for cand in enumerate_partitions(prev.size() + excess as u64) {
                if insertion.is_some()
                    && cand.size() != prev.size() + insertion.unwrap().size()
                {
                    continue;
                }
                if !cand.contains(prev) {
                    continue;
                }
                if let Some(l) = max_len {
                    if cand.len() as u32 > l {
                        continue;
                    }
                }
                let factor = match insertion {
                    Some(nu) => {
                        let c = lr_coefficient(&cand, prev, nu);
                        if c.is_zero() {
                            continue;
                        }
                        Rat::from_integer(c)
                    }
                    None => Rat::one(),
                };
                out.push((cand, factor));
            }
        }
    }
    out
}

struct ChainWalk<'a> {
    spec: &'a NestedSpec,
    max_len: Option<u32>,
    mid_blocks: Vec<(BlockId, u32)>,
    /// max total size decrease still available after step i
    future_decrease: Vec<u64>,
}

impl<'a> ChainWalk<'a> {
    fn new(spec: &'a NestedSpec, max_len: Option<u32>) -> Self {
        let allowed =
            |i: usize| spec.insertions.get(&i).map(|nu| nu.size()).unwrap_or(spec.caps[i] as u64);
        let mut future_decrease = vec![0u64; spec.m + 2];
        for i in (1..=spec.m).rev() {
            future_decrease[i] = future_decrease[i + 1]
                + if spec.sigma_at(i) == Sign::Plus { allowed(i) } else { 0 };
        }
        ChainWalk {
            spec,
            max_len,
            mid_blocks: spec.middle_blocks(),
            future_decrease,
        }
    }

    fn size_reachable(&self, i: usize, size: u64) -> bool {
        size <= self.spec.caps[self.spec.m + 1] as u64 + self.future_decrease[i + 1]
    }

    /// Walk chains from a fixed `lambda_0`, calling `sink` with
    /// `(lambda_0, lambda_m, middle-series contribution)`.  The contribution
    /// carries all `r` factors and the global `c` normalization.
    fn walk(
        &self,
        lam0: &Partition,
        c_total: &Scalar,
        sink: &mut dyn FnMut(&Partition, &Partition, MultiSeries),
    ) -> Result<()> {
        let spec = self.spec;
        if lam0.size() > spec.caps[0] as u64 || !self.size_reachable(0, lam0.size()) {
            return Ok(());
        }
        if let Some(l) = self.max_len {
            if lam0.len() as u32 > l {
                return Ok(());
            }
        }
        let r0 = content_product(spec.weight_at(0), lam0, spec.n)?;
        let coeff = c_total.mul(&r0);
        if coeff.is_zero() {
            return Ok(());
        }
        let acc = MultiSeries::constant(self.mid_blocks.clone(), coeff);
        self.step(1, lam0, lam0, acc, sink)
    }

    fn step(
        &self,
        i: usize,
        lam0: &Partition,
        prev: &Partition,
        acc: MultiSeries,
        sink: &mut dyn FnMut(&Partition, &Partition, MultiSeries),
    ) -> Result<()> {
        let spec = self.spec;
        if i > spec.m {
            if prev.size() <= spec.caps[spec.m + 1] as u64 {
                sink(lam0, prev, acc);
            }
            return Ok(());
        }
        let insertion = spec.insertions.get(&i);
        for (cand, lr) in step_candidates(
            prev,
            spec.sigma_at(i),
            spec.caps[i],
            insertion,
            self.max_len,
        ) {
            if !self.size_reachable(i, cand.size()) {
                continue;
            }
            let r = content_product(spec.weight_at(i), &cand, spec.n)?;
            let scalar = r.mul_rat(&lr);
            if scalar.is_zero() {
                continue;
            }
            let mut next = acc.mul_scalar(&scalar);
            if insertion.is_none() {
                let block = NestedSpec::block_name(i);
                let factor = match spec.sigma_at(i) {
                    Sign::Plus => skew_schur(prev, &cand, &block, spec.caps[i]),
                    Sign::Minus => skew_schur(&cand, prev, &block, spec.caps[i]),
                };
                if factor.is_zero() {
                    continue;
                }
                next = next.mul(&factor.promote(self.mid_blocks.clone()));
            }
            if next.is_zero() {
                continue;
            }
            self.step(i + 1, lam0, &cand, next, sink)?;
        }
        Ok(())
    }
}

fn c_total(spec: &NestedSpec) -> Result<Scalar> {
    let mut c = Scalar::one();
    for j in 0..=spec.m {
        c = c.mul(&c_norm(spec.weight_at(j), spec.n)?);
    }
    Ok(c)
}

/// Expand the nested tau-function over all containment chains, truncated by
/// the caps.
pub fn expand_tau(spec: &NestedSpec) -> Result<TauSeries> {
    expand_tau_restricted(spec, None)
}

/// Like [`expand_tau`] but keeping only chains with every partition of at
/// most `max_len` rows (the matrix-model restriction `len(lambda) <= N`).
pub fn expand_tau_restricted(spec: &NestedSpec, max_len: Option<u32>) -> Result<TauSeries> {
    spec.validate()?;
    let walk = ChainWalk::new(spec, max_len);
    let c = c_total(spec)?;
    let mut view: BTreeMap<(Partition, Partition), MultiSeries> = BTreeMap::new();
    for lam0 in enumerate_partitions(spec.caps[0] as u64) {
        walk.walk(&lam0, &c, &mut |start, end, contrib| {
            view.entry((start.clone(), end.clone()))
                .and_modify(|s| *s = s.add(&contrib))
                .or_insert(contrib);
        })?;
    }
    view.retain(|_, s| !s.is_zero());
    let series = assemble_series(spec, &view);
    Ok(TauSeries { spec: spec.clone(), series, schur_view: view })
}

/// Coefficient of `s_{lam_end}(t_{m+1}) s_{lam_start}(t_0)` as a series in
/// the middle blocks, computed by a targeted chain walk.
pub fn double_schur_coefficient(
    spec: &NestedSpec,
    lam_end: &Partition,
    lam_start: &Partition,
) -> Result<MultiSeries> {
    spec.validate()?;
    let walk = ChainWalk::new(spec, None);
    let c = c_total(spec)?;
    let mut out = MultiSeries::zero(spec.middle_blocks());
    walk.walk(lam_start, &c, &mut |_, end, contrib| {
        if end == lam_end {
            out = out.add(&contrib);
        }
    })?;
    Ok(out)
}

/// Side of the expansion fixed by a superintegrability query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Start,
    End,
}

/// The predicted average of a Schur insertion: the chain sum with the
/// boundary partition on `side` frozen to `lam`, as a series in the
/// remaining blocks (the fixed boundary block drops out).
pub fn superintegrability_prediction(
    spec: &NestedSpec,
    lam: &Partition,
    side: Side,
) -> Result<MultiSeries> {
    spec.validate()?;
    let walk = ChainWalk::new(spec, None);
    let c = c_total(spec)?;
    let blocks: Vec<(BlockId, u32)> = match side {
        Side::End => {
            let mut b = vec![(NestedSpec::block_name(0), spec.caps[0])];
            b.extend(spec.middle_blocks());
            b
        }
        Side::Start => {
            let mut b = spec.middle_blocks();
            b.push((NestedSpec::block_name(spec.m + 1), spec.caps[spec.m + 1]));
            b
        }
    };
    let mut out = MultiSeries::zero(blocks.clone());
    match side {
        Side::End => {
            for lam0 in enumerate_partitions(spec.caps[0] as u64) {
                let s0 = schur(&lam0, &NestedSpec::block_name(0), spec.caps[0]);
                walk.walk(&lam0, &c, &mut |_, end, contrib| {
                    if end == lam {
                        out = out.add(&s0.promote(blocks.clone()).mul(&contrib.promote(blocks.clone())));
                    }
                })?;
            }
        }
        Side::Start => {
            let end_name = NestedSpec::block_name(spec.m + 1);
            walk.walk(lam, &c, &mut |_, end, contrib| {
                let se = schur(end, &end_name, spec.caps[spec.m + 1]);
                out = out.add(&se.promote(blocks.clone()).mul(&contrib.promote(blocks.clone())));
            })?;
        }
    }
    Ok(out)
}

/// The dual spec: operator order reversed, all signs flipped, so that its
/// expansion equals the original with blocks `t_j` and `t_{m+1-j}` swapped.
pub fn dual_spec(spec: &NestedSpec) -> NestedSpec {
    // stored outermost-first: sigma'_i = -sigma_{m+1-i}
    let sigma: Vec<Sign> = spec.sigma.iter().rev().map(|s| s.flip()).collect();
    let mut weights = spec.weights.clone();
    weights.reverse();
    let mut caps = spec.caps.clone();
    caps.reverse();
    let insertions = spec
        .insertions
        .iter()
        .map(|(&i, nu)| (spec.m + 1 - i, nu.clone()))
        .collect();
    NestedSpec { n: spec.n, m: spec.m, sigma, weights, caps, insertions }
}

/// Collapse `spec` at middle position `j` in `1..=m`.  Two cases:
/// cap `D_j = 0` (the block is dropped and the adjacent weights merge), or
/// `O_j` trivial with `sigma_j = sigma_{j+1}` under the boundary convention
/// `sigma_0 = -`, `sigma_{m+1} = +` (blocks `t_j` and `t_{j+1}` merge).
pub fn reduce_spec(spec: &NestedSpec, j: usize) -> Result<NestedSpec> {
    spec.validate()?;
    if j < 1 || j > spec.m {
        return Err(CoreError::Domain(format!(
            "reduce position {j} out of range 1..={}",
            spec.m
        )));
    }
    if spec.insertions.contains_key(&j) {
        return Err(CoreError::Domain(format!("position {j} carries an insertion")));
    }
    let shift_insertions = |cut: usize| -> BTreeMap<usize, Partition> {
        spec.insertions
            .iter()
            .map(|(&i, nu)| (if i > cut { i - 1 } else { i }, nu.clone()))
            .collect()
    };
    if spec.caps[j] == 0 {
        // ... O_j gamma(t_j) O_{j-1} ... -> ... (O_j O_{j-1}) ...
        let mut weights_asc: Vec<WeightGen> =
            (0..=spec.m).map(|k| spec.weight_at(k).clone()).collect();
        let merged = weights_asc[j].product(&weights_asc[j - 1]);
        weights_asc[j - 1] = merged;
        weights_asc.remove(j);
        weights_asc.reverse();
        let mut sigma_asc: Vec<Sign> = (1..=spec.m).map(|i| spec.sigma_at(i)).collect();
        sigma_asc.remove(j - 1);
        sigma_asc.reverse();
        let mut caps = spec.caps.clone();
        caps.remove(j);
        return Ok(NestedSpec {
            n: spec.n,
            m: spec.m - 1,
            sigma: sigma_asc,
            weights: weights_asc,
            caps,
            insertions: shift_insertions(j),
        });
    }
    let sigma_next = if j == spec.m { Sign::Plus } else { spec.sigma_at(j + 1) };
    if spec.weight_at(j).is_trivial() && spec.sigma_at(j) == sigma_next {
        if spec.insertions.contains_key(&(j + 1)) {
            return Err(CoreError::Domain(format!(
                "cannot merge block {j} into inserted position {}",
                j + 1
            )));
        }
        let mut weights_asc: Vec<WeightGen> =
            (0..=spec.m).map(|k| spec.weight_at(k).clone()).collect();
        weights_asc.remove(j);
        weights_asc.reverse();
        let mut sigma_asc: Vec<Sign> = (1..=spec.m).map(|i| spec.sigma_at(i)).collect();
        sigma_asc.remove(j - 1);
        sigma_asc.reverse();
        let mut caps = spec.caps.clone();
        caps[j + 1] = caps[j].max(caps[j + 1]);
        caps.remove(j);
        return Ok(NestedSpec {
            n: spec.n,
            m: spec.m - 1,
            sigma: sigma_asc,
            weights: weights_asc,
            caps,
            insertions: shift_insertions(j),
        });
    }
    Err(CoreError::Domain(format!(
        "position {j}: neither cap 0 nor a trivial weight with matching signs"
    )))
}

/// Outcome of a Hirota residue check.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HirotaReport {
    pub passed: bool,
    /// First nonzero residue coefficient `(monomial, value)` when failing.
    pub failing: Option<(String, Scalar)>,
}

/// Bilinear Hirota residue check (KP diagonal case) for the series in
/// `active` block: extracts the `z^{-1}` coefficient of
/// `tau(t - [z^{-1}]) tau(t' + [z^{-1}]) exp(sum (t_k - t'_k) z^k)` and
/// requires it to vanish through combined `(t, t')`-degree `degree`.
/// Needs the active cap to be at least `degree + 1` — the residue at
/// degree `d` couples series coefficients of degree `d + 1`.
pub fn hirota_check(series: &MultiSeries, active: &str, degree: u32) -> Result<HirotaReport> {
    let bi = series
        .block_index(active)
        .ok_or_else(|| CoreError::Domain(format!("no block {active}")))?;
    let cap = series.blocks()[bi].1;
    if cap < degree + 1 {
        return Err(CoreError::Truncation(format!(
            "hirota check at degree {degree} needs active cap >= {}, have {cap}",
            degree + 1
        )));
    }
    let prime = format!("{active}__prime");
    let mut blocks = series.blocks().to_vec();
    blocks.push((prime.clone(), cap));
    let prime_idx = blocks.len() - 1;

    // shifted factors as maps z-power -> series
    let expand_shift = |source_idx: usize, target_idx: usize, plus: bool| {
        let mut out: BTreeMap<i64, MultiSeries> = BTreeMap::new();
        for (key, c) in series.terms() {
            // substitute t_k -> t_k -+ z^{-k}/k in the active exponents
            let pairs = key[bi].pairs().to_vec();
            let mut splits: Vec<(Vec<(u32, u32)>, i64, Rat)> = vec![(Vec::new(), 0, Rat::one())];
            for &(k, a) in &pairs {
                let mut next = Vec::new();
                for (kept, zpow, coeff) in &splits {
                    for jj in 0..=a {
                        let mut binom = BigInt::one();
                        for x in 0..jj as u64 {
                            binom = binom * BigInt::from(a as u64 - x) / BigInt::from(x + 1);
                        }
                        let mut unit = Rat::new(BigInt::one(), BigInt::from(k));
                        if !plus {
                            unit = -unit;
                        }
                        let mut factor = Rat::from_integer(binom);
                        for _ in 0..jj {
                            factor *= unit.clone();
                        }
                        let mut kept2 = kept.clone();
                        if a - jj > 0 {
                            kept2.push((k, a - jj));
                        }
                        next.push((kept2, zpow - (k as i64) * jj as i64, coeff * factor));
                    }
                }
                splits = next;
            }
            for (kept, zpow, coeff) in splits {
                let mut nkey: Vec<Exponents> =
                    key.iter().cloned().chain(std::iter::once(Exponents::unit())).collect();
                nkey[bi] = Exponents::unit();
                nkey[target_idx] = Exponents::from_pairs(kept);
                let _ = source_idx;
                out.entry(zpow)
                    .or_insert_with(|| MultiSeries::zero(blocks.clone()))
                    .add_term(nkey, c.mul_rat(&coeff));
            }
        }
        out.retain(|_, s| !s.is_zero());
        out
    };
    let factor_a = expand_shift(bi, bi, false); // tau(t - [z^{-1}])
    let factor_b = expand_shift(bi, prime_idx, true); // tau(t' + [z^{-1}])

    // exp(sum (t_k - t'_k) z^k): a term of (t,t')-degree q carries z^q
    let mut exp_arg = MultiSeries::zero(blocks.clone());
    for k in 1..=cap {
        exp_arg = exp_arg
            .add(&MultiSeries::variable(blocks.clone(), active, k))
            .sub(&MultiSeries::variable(blocks.clone(), &prime, k));
    }
    let kernel = exp_series(&exp_arg)?;
    // bucket the kernel by combined (t, t')-degree
    let mut kernel_by_deg: BTreeMap<i64, MultiSeries> = BTreeMap::new();
    for (key, c) in kernel.terms() {
        let q = (key[bi].degree() + key[prime_idx].degree()) as i64;
        kernel_by_deg
            .entry(q)
            .or_insert_with(|| MultiSeries::zero(blocks.clone()))
            .add_term(key.clone(), c.clone());
    }

    let mut residue = MultiSeries::zero(blocks.clone());
    for (&pa, sa) in &factor_a {
        for (&pb, sb) in &factor_b {
            let q = -1 - pa - pb;
            if q < 0 {
                continue;
            }
            if let Some(kq) = kernel_by_deg.get(&q) {
                residue = residue.add(&sa.mul(sb).mul(kq));
            }
        }
    }
    let residue = residue.truncate_joint(&[active, &prime], degree as u64);
    let first = residue.terms().next().map(|(k, c)| (k.clone(), c.clone()));
    match first {
        None => Ok(HirotaReport { passed: true, failing: None }),
        Some((key, c)) => {
            let mono: Vec<String> = blocks
                .iter()
                .zip(key)
                .flat_map(|((b, _), e)| {
                    e.pairs()
                        .iter()
                        .map(move |&(k, a)| {
                            if a == 1 {
                                format!("{b}_{k}")
                            } else {
                                format!("{b}_{k}^{a}")
                            }
                        })
                        .collect::<Vec<_>>()
                })
                .collect();
            Ok(HirotaReport {
                passed: false,
                failing: Some((mono.join("*"), c.clone())),
            })
        }
    }
}
