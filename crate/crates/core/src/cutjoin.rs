//! Cut-and-join machinery: linear operators on the Schur basis of one time
//! block, diagonal operators of weight generating functions, conjugated
//! W-operators, exponential operator actions, and two operator-side routes
//! to the nested tau-functions (the recursion in the nesting depth and the
//! ordered product of exponentials of W-operators).

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::partitions::{enumerate_partitions, partitions_of, Partition};
use crate::scalar::{Rat, Scalar};
use crate::symfunc::{
    attach_schur, cauchy_kernel, schur, schur_components, shift_block, to_schur_basis, BlockId,
    Exponents, MultiSeries,
};
use crate::tau::{NestedSpec, Sign};
use crate::weights::{c_norm, content_product, WeightGen};

/// A degree-homogeneous linear operator on polynomials in one time block,
/// stored as its matrix in the Schur basis: `s_lambda` maps to
/// `sum_mu M[lambda][mu] s_mu`, with `|mu| = |lambda| + degree_shift`
/// whenever the entry is nonzero.  Outputs above `cap` are truncated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "OperatorRepr", from = "OperatorRepr")]
pub struct LinearOperator {
    pub block: BlockId,
    pub cap: u32,
    pub degree_shift: i64,
    matrix: BTreeMap<Partition, BTreeMap<Partition, Scalar>>,
}

#[derive(Serialize, Deserialize)]
struct OperatorRepr {
    block: BlockId,
    cap: u32,
    degree_shift: i64,
    entries: Vec<(Partition, Partition, Scalar)>,
}

impl From<LinearOperator> for OperatorRepr {
    fn from(op: LinearOperator) -> Self {
        let mut entries = Vec::new();
        for (lam, row) in op.matrix {
            for (mu, c) in row {
                entries.push((lam.clone(), mu, c));
            }
        }
        OperatorRepr { block: op.block, cap: op.cap, degree_shift: op.degree_shift, entries }
    }
}

impl From<OperatorRepr> for LinearOperator {
    fn from(r: OperatorRepr) -> Self {
        let mut op = LinearOperator::zero(&r.block, r.cap, r.degree_shift);
        for (lam, mu, c) in r.entries {
            op.add_entry(lam, mu, c);
        }
        op
    }
}

impl LinearOperator {
    pub fn zero(block: &str, cap: u32, degree_shift: i64) -> Self {
        LinearOperator {
            block: block.to_string(),
            cap,
            degree_shift,
            matrix: BTreeMap::new(),
        }
    }

    pub fn identity(block: &str, cap: u32) -> Self {
        let mut op = LinearOperator::zero(block, cap, 0);
        for lam in enumerate_partitions(cap as u64) {
            op.add_entry(lam.clone(), lam, Scalar::one());
        }
        op
    }

    pub fn add_entry(&mut self, input: Partition, output: Partition, c: Scalar) {
        if c.is_zero() || output.size() > self.cap as u64 {
            return;
        }
        debug_assert_eq!(
            output.size() as i64,
            input.size() as i64 + self.degree_shift,
            "entry violates the declared degree shift"
        );
        let row = self.matrix.entry(input.clone()).or_default();
        let entry = row.entry(output.clone()).or_insert_with(Scalar::zero);
        *entry = entry.add(&c);
        if entry.is_zero() {
            row.remove(&output);
            if row.is_empty() {
                self.matrix.remove(&input);
            }
        }
    }

    /// Build from the images of all basis Schur functions up to `cap`.
    pub fn from_basis_action(
        block: &str,
        cap: u32,
        degree_shift: i64,
        mut action: impl FnMut(&Partition) -> Vec<(Partition, Scalar)>,
    ) -> Self {
        let mut op = LinearOperator::zero(block, cap, degree_shift);
        for lam in enumerate_partitions(cap as u64) {
            for (mu, c) in action(&lam) {
                op.add_entry(lam.clone(), mu, c);
            }
        }
        op
    }

    pub fn is_diagonal(&self) -> bool {
        self.degree_shift == 0
            && self
                .matrix
                .iter()
                .all(|(lam, row)| row.keys().all(|mu| mu == lam))
    }

    pub fn entry(&self, input: &Partition, output: &Partition) -> Scalar {
        self.matrix
            .get(input)
            .and_then(|row| row.get(output))
            .cloned()
            .unwrap_or_else(Scalar::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Partition, &Partition, &Scalar)> {
        self.matrix
            .iter()
            .flat_map(|(lam, row)| row.iter().map(move |(mu, c)| (lam, mu, c)))
    }

    /// `self` applied after `other`.
    pub fn compose(&self, other: &LinearOperator) -> LinearOperator {
        assert_eq!(self.block, other.block, "operator block mismatch");
        assert_eq!(self.cap, other.cap, "operator cap mismatch");
        let mut out = LinearOperator::zero(
            &self.block,
            self.cap,
            self.degree_shift + other.degree_shift,
        );
        for (lam, row) in &other.matrix {
            for (mid, c1) in row {
                if let Some(row2) = self.matrix.get(mid) {
                    for (mu, c2) in row2 {
                        out.add_entry(lam.clone(), mu.clone(), c1.mul(c2));
                    }
                }
            }
        }
        out
    }

    pub fn scale(&self, c: &Scalar) -> LinearOperator {
        let mut out = LinearOperator::zero(&self.block, self.cap, self.degree_shift);
        for (lam, mu, v) in self.entries() {
            out.add_entry(lam.clone(), mu.clone(), v.mul(c));
        }
        out
    }

    pub fn add(&self, other: &LinearOperator) -> LinearOperator {
        assert_eq!(self.block, other.block);
        assert_eq!(self.cap, other.cap);
        assert_eq!(self.degree_shift, other.degree_shift, "mixed-shift sum");
        let mut out = self.clone();
        for (lam, mu, v) in other.entries() {
            out.add_entry(lam.clone(), mu.clone(), v.clone());
        }
        out.prune();
        out
    }

    fn prune(&mut self) {
        for row in self.matrix.values_mut() {
            row.retain(|_, v| !v.is_zero());
        }
        self.matrix.retain(|_, row| !row.is_empty());
    }

    /// Apply to a series that contains this operator's block (other blocks
    /// pass through as coefficients).
    pub fn apply(&self, f: &MultiSeries) -> MultiSeries {
        let pos = f
            .block_index(&self.block)
            .expect("series lacks the operator's block");
        let cap = f.blocks()[pos].1.min(self.cap);
        let rest_blocks: Vec<(BlockId, u32)> = f
            .blocks()
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != pos)
            .map(|(_, b)| b.clone())
            .collect();
        let comps = schur_components(f, &self.block);
        let mut out_comps: BTreeMap<Partition, MultiSeries> = BTreeMap::new();
        for (lam, rest) in &comps {
            if let Some(row) = self.matrix.get(lam) {
                for (mu, c) in row {
                    if mu.size() > cap as u64 {
                        continue;
                    }
                    let contrib = rest.mul_scalar(c);
                    out_comps
                        .entry(mu.clone())
                        .and_modify(|s| *s = s.add(&contrib))
                        .or_insert(contrib);
                }
            }
        }
        out_comps.retain(|_, s| !s.is_zero());
        attach_schur(&out_comps, &self.block, f.blocks()[pos].1, pos, &rest_blocks)
    }
}

/// Diagonal operator of a weight generating function:
/// `s_lambda -> c_n r_{lambda,n} s_lambda`.
pub fn diagonal_operator(g: &WeightGen, n: i64, block: &str, cap: u32) -> Result<LinearOperator> {
    let cn = c_norm(g, n)?;
    let mut op = LinearOperator::zero(block, cap, 0);
    for lam in enumerate_partitions(cap as u64) {
        let r = content_product(g, &lam, n)?;
        op.add_entry(lam.clone(), lam, cn.mul(&r));
    }
    Ok(op)
}

/// Inverse of [`diagonal_operator`]; fails on a vanishing eigenvalue.
pub fn diagonal_operator_inverse(
    g: &WeightGen,
    n: i64,
    block: &str,
    cap: u32,
) -> Result<LinearOperator> {
    let cn = c_norm(g, n)?;
    let mut op = LinearOperator::zero(block, cap, 0);
    for lam in enumerate_partitions(cap as u64) {
        let eig = cn.mul(&content_product(g, &lam, n)?);
        let inv = eig.inverse().ok_or_else(|| CoreError::ZeroEigenvalue {
            partition: lam.to_string(),
        })?;
        op.add_entry(lam.clone(), lam, inv);
    }
    Ok(op)
}

/// The derivative `d/dt_k` in the Schur basis (degree shift `-k`).
pub fn deriv_operator(block: &str, cap: u32, k: u32) -> LinearOperator {
    LinearOperator::from_basis_action(block, cap, -(k as i64), |lam| {
        let d = schur(lam, block, cap).deriv(block, k);
        to_schur_basis(&d).into_iter().collect()
    })
}

/// Multiplication by `k t_k` in the Schur basis (degree shift `+k`),
/// truncated at `cap`.
pub fn mult_operator(block: &str, cap: u32, k: u32) -> LinearOperator {
    let kk = Scalar::from_int(k as i64);
    LinearOperator::from_basis_action(block, cap, k as i64, |lam| {
        let m = schur(lam, block, cap).mul_var(block, k).mul_scalar(&kk);
        to_schur_basis(&m).into_iter().collect()
    })
}

/// Conjugated bosonic mode for the diagonal element
/// `O = prod_j O_+(u_j)`:
/// lowering `W_{+k} = O^{-1} (d/dt_k) O` (shift `-k`) and raising
/// `W_{-k} = O (k t_k) O^{-1}` (shift `+k`).  `sign` picks the direction:
/// `Plus` is the lowering operator.
pub fn w_operator(
    us: &[Scalar],
    sign: Sign,
    k: u32,
    block: &str,
    n: i64,
    cap: u32,
) -> Result<LinearOperator> {
    let g = WeightGen { u: us.to_vec(), v: Vec::new(), w: Scalar::zero() };
    let o = diagonal_operator(&g, n, block, cap)?;
    let o_inv = diagonal_operator_inverse(&g, n, block, cap)?;
    Ok(match sign {
        Sign::Plus => o_inv.compose(&deriv_operator(block, cap, k).compose(&o)),
        Sign::Minus => o.compose(&mult_operator(block, cap, k).compose(&o_inv)),
    })
}

/// Content-sum diagonal: `s_lambda -> (sum over cells of (n + j - i)) s_lambda`.
pub fn classical_cutjoin(block: &str, n: i64, cap: u32) -> LinearOperator {
    let mut op = LinearOperator::zero(block, cap, 0);
    for lam in enumerate_partitions(cap as u64) {
        op.add_entry(
            lam.clone(),
            lam.clone(),
            Scalar::from_int(lam.content_sum(n)),
        );
    }
    op
}

/// The same operator built as the explicit second-order differential
/// operator plus `n` times the Euler operator:
/// `(1/2) sum_{a,b} [ab t_a t_b d_{a+b} + (a+b) t_{a+b} d_a d_b] + n sum_k k t_k d_k`.
pub fn cutjoin_differential(block: &str, n: i64, cap: u32) -> LinearOperator {
    LinearOperator::from_basis_action(block, cap, 0, |lam| {
        let s = schur(lam, block, cap);
        let mut out = MultiSeries::zero(s.blocks().to_vec());
        for a in 1..=cap {
            for b in 1..=cap.saturating_sub(a) {
                let join = s
                    .deriv(block, a + b)
                    .mul_var(block, a)
                    .mul_var(block, b)
                    .mul_scalar(&Scalar::from_int((a as i64) * (b as i64)));
                let cut = s
                    .deriv(block, a)
                    .deriv(block, b)
                    .mul_var(block, a + b)
                    .mul_scalar(&Scalar::from_int((a + b) as i64));
                out = out.add(&join).add(&cut);
            }
        }
        out = out.mul_scalar(&Scalar::from_ratio(1, 2));
        for k in 1..=cap {
            out = out.add(
                &s.deriv(block, k)
                    .mul_var(block, k)
                    .mul_scalar(&Scalar::from_int(n * k as i64)),
            );
        }
        to_schur_basis(&out).into_iter().collect()
    })
}

/// `exp(sum_k t_{c,k} W_k) target` for a commuting family `k -> W_k`: the
/// sum over coefficient-block monomials of
/// `prod_k t_{c,k}^{a_k} / a_k! * prod_k W_k^{a_k} target`, truncated at
/// the coefficient block's cap.  Refuses non-commuting families.
pub fn exp_operator_action(
    coeff_block: &str,
    coeff_cap: u32,
    family: &BTreeMap<u32, LinearOperator>,
    target: &MultiSeries,
) -> Result<MultiSeries> {
    if target.block_index(coeff_block).is_some() {
        return Err(CoreError::Domain(format!(
            "coefficient block {coeff_block} already appears in the target"
        )));
    }
    let ops: Vec<(&u32, &LinearOperator)> = family.iter().collect();
    for i in 0..ops.len() {
        for j in (i + 1)..ops.len() {
            let (a, b) = (ops[i].1, ops[j].1);
            if a.compose(b) != b.compose(a) {
                return Err(CoreError::Domain(format!(
                    "operators for k = {} and k = {} do not commute",
                    ops[i].0, ops[j].0
                )));
            }
        }
    }
    let mut out_blocks = target.blocks().to_vec();
    out_blocks.push((coeff_block.to_string(), coeff_cap));
    let mut out = MultiSeries::zero(out_blocks.clone());
    for d in 0..=coeff_cap as u64 {
        for mu in partitions_of(d) {
            let e = Exponents::from_partition(&mu);
            if e.pairs().iter().any(|(k, _)| !family.contains_key(k)) {
                continue;
            }
            let mut acted = target.clone();
            let mut denom = BigInt::one();
            for &(k, a) in e.pairs() {
                for rep in 0..a {
                    acted = family[&k].apply(&acted);
                    denom *= BigInt::from(rep as u64 + 1);
                }
                if acted.is_zero() {
                    break;
                }
            }
            if acted.is_zero() {
                continue;
            }
            let acted = acted.mul_scalar(&Scalar::from_rat(Rat::new(BigInt::one(), denom)));
            for (key, c) in acted.terms() {
                let mut nk = key.clone();
                nk.push(e.clone());
                out.add_term(nk, c.clone());
            }
        }
    }
    Ok(out)
}

/// One step of the depth recursion.  `prev` is the depth-`(m-1)` series
/// whose outermost block is `end_block`; the step introduces `new_block`
/// (the new `t_m`) and applies the diagonal operator of `o_m`:
/// for `sigma_m = -`, multiply by the Cauchy kernel in
/// `(end_block, new_block)`; for `sigma_m = +`, substitute
/// `end + new` into the outermost block (which requires `prev` to carry
/// `end_cap + new_cap` worth of degree there).  The result's outermost cap
/// is `end_cap`.
pub fn recursion_step(
    prev: &MultiSeries,
    end_block: &str,
    new_block: &str,
    new_cap: u32,
    end_cap: u32,
    o_m: &WeightGen,
    n: i64,
    sigma_m: Sign,
) -> Result<MultiSeries> {
    let pos = prev
        .block_index(end_block)
        .ok_or_else(|| CoreError::Domain(format!("no block {end_block}")))?;
    let have = prev.blocks()[pos].1;
    let shrink_end = |f: &MultiSeries, extra_new: bool| {
        let mut blocks = f.blocks().to_vec();
        for b in blocks.iter_mut() {
            if b.0 == end_block {
                b.1 = end_cap;
            }
            if extra_new && b.0 == new_block {
                b.1 = new_cap;
            }
        }
        f.truncate_caps(blocks)
    };
    let stepped = match sigma_m {
        Sign::Minus => {
            if have < end_cap {
                return Err(CoreError::Truncation(format!(
                    "kernel step needs {end_block} cap >= {end_cap}, have {have}"
                )));
            }
            let trimmed = shrink_end(prev, false);
            let mut blocks = trimmed.blocks().to_vec();
            blocks.push((new_block.to_string(), new_cap));
            let kernel = cauchy_kernel(end_block, new_block, end_cap, new_cap)
                .promote(blocks.clone());
            trimmed.promote(blocks).mul(&kernel)
        }
        Sign::Plus => {
            if have < end_cap + new_cap {
                return Err(CoreError::Truncation(format!(
                    "block-merge step needs {end_block} cap >= {}, have {have}",
                    end_cap + new_cap
                )));
            }
            let split = shift_block(prev, end_block, new_block, new_cap);
            shrink_end(&split, true)
        }
    };
    let op = diagonal_operator(o_m, n, end_block, end_cap)?;
    Ok(op.apply(&stepped))
}

/// Expand the tau-function by the depth recursion only — the base case is
/// the diagonal operator acting on the Cauchy kernel — and return the series
/// in the standard block layout.  Insertions are not supported here.
pub fn tau_via_recursion(spec: &NestedSpec) -> Result<MultiSeries> {
    spec.validate()?;
    if !spec.insertions.is_empty() {
        return Err(CoreError::Unsupported(
            "the recursion route does not take insertions".into(),
        ));
    }
    let m = spec.m;
    // required outermost cap at each depth: block merges consume degree
    let mut need = vec![0u32; m + 1];
    need[m] = spec.caps[m + 1];
    for j in (1..=m).rev() {
        need[j - 1] = need[j]
            + if spec.sigma_at(j) == Sign::Plus { spec.caps[j] } else { 0 };
    }
    // depth 0: O_0 acting on the kernel in (t_1, t_0)
    let kernel = cauchy_kernel("t1", "t0", need[0], spec.caps[0]);
    let op0 = diagonal_operator(spec.weight_at(0), spec.n, "t1", need[0])?;
    let mut tau = op0.apply(&kernel);
    for j in 1..=m {
        let end_old = NestedSpec::block_name(j);
        let end_new = NestedSpec::block_name(j + 1);
        tau = recursion_step(
            &tau.rename_block(&end_old, &end_new),
            &end_new,
            &end_old,
            spec.caps[j],
            need[j],
            spec.weight_at(j),
            spec.n,
            spec.sigma_at(j),
        )?;
    }
    Ok(tau.promote(spec.block_layout()))
}

/// Data of the special family where every weight is a product of
/// elementary factors `O_+(u)`: sign list `(sigma_1..sigma_m)` ascending,
/// parameter lists `u^{(0)}..u^{(m)}` ascending, caps `D_0..D_{m+1}`.
/// The equivalent nested spec has weights
/// `O_m = O^{-sigma_m}`, `O_j = O^{sigma_{j+1}} O^{-sigma_j}`,
/// `O_0 = O^{sigma_1} O^{(0)}`.
#[derive(Clone, Debug)]
pub struct ElementaryChain {
    pub n: i64,
    pub sigma_asc: Vec<Sign>,
    pub u_lists_asc: Vec<Vec<Scalar>>,
    pub caps: Vec<u32>,
}

impl ElementaryChain {
    fn m(&self) -> usize {
        self.sigma_asc.len()
    }

    fn factor(&self, i: usize) -> WeightGen {
        WeightGen { u: self.u_lists_asc[i].clone(), v: Vec::new(), w: Scalar::zero() }
    }

    fn signed_factor(&self, i: usize, sign: Sign) -> WeightGen {
        match sign {
            Sign::Plus => self.factor(i),
            Sign::Minus => self.factor(i).inverse(),
        }
    }

    pub fn nested_spec(&self) -> NestedSpec {
        let m = self.m();
        let mut weights_asc = Vec::with_capacity(m + 1);
        for j in 0..=m {
            let w = if j == 0 {
                if m == 0 {
                    self.factor(0)
                } else {
                    self.signed_factor(1, self.sigma_asc[0]).product(&self.factor(0))
                }
            } else if j < m {
                self.signed_factor(j + 1, self.sigma_asc[j])
                    .product(&self.signed_factor(j, self.sigma_asc[j - 1].flip()))
            } else {
                self.signed_factor(m, self.sigma_asc[m - 1].flip())
            };
            weights_asc.push(w);
        }
        weights_asc.reverse();
        let mut sigma = self.sigma_asc.clone();
        sigma.reverse();
        NestedSpec {
            n: self.n,
            m,
            sigma,
            weights: weights_asc,
            caps: self.caps.clone(),
            insertions: BTreeMap::new(),
        }
    }

    fn w_family(
        &self,
        i: usize,
        sign: Sign,
        block: &str,
        max_k: u32,
        cap: u32,
    ) -> Result<BTreeMap<u32, LinearOperator>> {
        let mut fam = BTreeMap::new();
        for k in 1..=max_k {
            fam.insert(k, w_operator(&self.u_lists_asc[i], sign, k, block, self.n, cap)?);
        }
        Ok(fam)
    }

    /// Ordered product of exponential W-operator actions on the constant 1
    /// in the outermost block, innermost (`t_0`, raising) first.
    pub fn tau_via_w_product(&self) -> Result<MultiSeries> {
        let m = self.m();
        let spec = self.nested_spec();
        let end = NestedSpec::block_name(m + 1);
        let internal: u32 = self.caps.iter().sum();
        let mut state = MultiSeries::one(vec![(end.clone(), internal)]);
        for i in 0..=m {
            let sign = if i == 0 { Sign::Minus } else { self.sigma_asc[i - 1] };
            let fam = self.w_family(i, sign, &end, self.caps[i], internal)?;
            state = exp_operator_action(
                &NestedSpec::block_name(i),
                self.caps[i],
                &fam,
                &state,
            )?;
        }
        let c0 = c_norm(&self.factor(0), self.n)?;
        state = state.mul_scalar(&c0);
        // restore the declared caps and the standard block order
        let mut blocks = state.blocks().to_vec();
        for b in blocks.iter_mut() {
            if b.0 == end {
                b.1 = self.caps[m + 1];
            }
        }
        Ok(state.truncate_caps(blocks).promote(spec.block_layout()))
    }

    /// The dual route: W-operators act on the `t_0` block of the Cauchy
    /// kernel, with flipped signs and reversed order.  Needs `u^{(0)}` empty.
    pub fn tau_via_w_product_dual(&self) -> Result<MultiSeries> {
        self.tau_via_w_product_mixed(0)
    }

    /// The mixed route with split point `j`: positions above `j` act on the
    /// outermost block, positions up to `j` act on the `t_0` block with
    /// flipped signs; both applied to the Cauchy kernel.  `j = 0` is the
    /// all-outermost route applied to the kernel, `j = m` the dual route.
    pub fn tau_via_w_product_mixed(&self, j: usize) -> Result<MultiSeries> {
        let m = self.m();
        if !self.u_lists_asc[0].is_empty() {
            return Err(CoreError::Unsupported(
                "kernel-based routes need a trivial innermost factor".into(),
            ));
        }
        if j > m {
            return Err(CoreError::Domain(format!("split point {j} exceeds {m}")));
        }
        let spec = self.nested_spec();
        let end = NestedSpec::block_name(m + 1);
        let internal: u32 = self.caps.iter().sum();
        let mut state = cauchy_kernel(&end, "t0", internal, internal);
        // t_0 side: positions j, j-1, ..., 1 with flipped signs
        for i in (1..=j).rev() {
            let fam = self.w_family(i, self.sigma_asc[i - 1].flip(), "t0", self.caps[i], internal)?;
            state = exp_operator_action(&NestedSpec::block_name(i), self.caps[i], &fam, &state)?;
        }
        // outer side: positions j+1, ..., m
        for i in (j + 1)..=m {
            let fam = self.w_family(i, self.sigma_asc[i - 1], &end, self.caps[i], internal)?;
            state = exp_operator_action(&NestedSpec::block_name(i), self.caps[i], &fam, &state)?;
        }
        let mut blocks = state.blocks().to_vec();
        for b in blocks.iter_mut() {
            if b.0 == end {
                b.1 = self.caps[m + 1];
            }
            if b.0 == "t0" {
                b.1 = self.caps[0];
            }
        }
        Ok(state.truncate_caps(blocks).promote(spec.block_layout()))
    }
}
