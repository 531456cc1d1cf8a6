//! Perturbative matrix-integral oracle: exact Gaussian moments (Hermitian
//! and complex ensembles), Haar-unitary integration via the Weingarten
//! character formula, and small-order evaluation of chain matrix models.
//!
//! Everything here is computed by entry-level index contraction — pairings,
//! permutation sums, and delta-class counting — so the results are
//! independent of the Schur-expansion machinery they are used to verify.
//! This module deliberately never calls into the tau or operator layers and
//! touches the symmetric-function layer only for the character data of the
//! Weingarten formula.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::memo::MemoTable;
use crate::partitions::{partitions_of, sym_character, z_centralizer, Partition};
use crate::scalar::{Rat, Scalar};
use crate::symfunc::{schur, specialize, BlockId, Exponents, SpecializeRule};

// ---------------------------------------------------------------------------
// Moment queries over a single ensemble
// ---------------------------------------------------------------------------

/// The random-matrix ensemble of a moment query.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ensemble {
    /// `N x N` Hermitian with covariance `<X_ij X_kl> = d_il d_jk / N`.
    HermitianGaussian { n: u32 },
    /// `N x N` complex with covariance `<Z_ij Z†_kl> = d_il d_jk / N`.
    ComplexGaussian { n: u32 },
    /// `N x N` Haar unitary.
    Unitary { n: u32 },
}

impl Ensemble {
    pub fn size(&self) -> u32 {
        match *self {
            Ensemble::HermitianGaussian { n }
            | Ensemble::ComplexGaussian { n }
            | Ensemble::Unitary { n } => n,
        }
    }
}

/// A product of trace factors, each a cyclic word in the ensemble matrix
/// (`false`) and its Hermitian conjugate (`true`).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MomentQuery {
    pub ensemble: Ensemble,
    pub words: Vec<Vec<bool>>,
}

impl MomentQuery {
    pub fn new(ensemble: Ensemble, words: Vec<Vec<bool>>) -> Self {
        MomentQuery { ensemble, words }
    }

    /// `Tr M^k` as a single word.
    pub fn power_trace(ensemble: Ensemble, k: u32, dagger: bool) -> Self {
        MomentQuery::new(ensemble, vec![vec![dagger; k as usize]])
    }

    pub fn validate(&self) -> Result<()> {
        if self.ensemble.size() == 0 {
            return Err(CoreError::Domain("matrix size must be positive".into()));
        }
        if self.words.iter().any(|w| w.is_empty()) {
            return Err(CoreError::Domain("empty trace word".into()));
        }
        Ok(())
    }

    fn traces(&self) -> Vec<Vec<Glyph>> {
        let mat = MatId { ens: 0, tilde: false };
        self.words
            .iter()
            .map(|w| w.iter().map(|&dag| Glyph::Rand { mat, dag }).collect())
            .collect()
    }
}

/// Expectation over the Hermitian Gaussian ensemble (odd degrees give 0).
pub fn hermitian_moment(q: &MomentQuery) -> Result<Scalar> {
    q.validate()?;
    let Ensemble::HermitianGaussian { n } = q.ensemble else {
        return Err(CoreError::Domain("expected the Hermitian ensemble".into()));
    };
    let engine = Engine::single(EngKind::Hermitian, n);
    Ok(Scalar::from_rat(engine.expect(&q.traces())?))
}

/// Expectation over the complex Gaussian ensemble (charge imbalance gives 0).
pub fn complex_moment(q: &MomentQuery) -> Result<Scalar> {
    q.validate()?;
    let Ensemble::ComplexGaussian { n } = q.ensemble else {
        return Err(CoreError::Domain("expected the complex ensemble".into()));
    };
    let engine = Engine::single(EngKind::Complex, n);
    Ok(Scalar::from_rat(engine.expect(&q.traces())?))
}

/// Expectation over the Haar unitary ensemble (charge imbalance gives 0).
pub fn unitary_moment(q: &MomentQuery) -> Result<Scalar> {
    q.validate()?;
    let Ensemble::Unitary { n } = q.ensemble else {
        return Err(CoreError::Domain("expected the unitary ensemble".into()));
    };
    let engine = Engine::single(EngKind::Haar, n);
    Ok(Scalar::from_rat(engine.expect(&q.traces())?))
}

// ---------------------------------------------------------------------------
// Weingarten function
// ---------------------------------------------------------------------------

static WG_MEMO: MemoTable<(Partition, u32), Rat> = MemoTable::new(96);

/// Weingarten function `Wg(mu, N)` for the cycle type `mu` of a permutation
/// of `k = |mu|` points:
/// `(1/k!^2) sum over lambda of k with at most N rows of
///  dim(lambda)^2 chi_lambda(mu) / s_lambda(1^N)`.
/// For `N < k` the row-restricted sum is the standard pseudo-inverse
/// extension.
pub fn weingarten(mu: &Partition, n: u32) -> Result<Rat> {
    if n == 0 {
        return Err(CoreError::Domain("matrix size must be positive".into()));
    }
    if let Some(v) = WG_MEMO.get(&(mu.clone(), n)) {
        return Ok(v);
    }
    let k = mu.size();
    let mut sum = Rat::zero();
    for lam in partitions_of(k) {
        if lam.parts().len() as u32 > n {
            continue;
        }
        let ones = Partition::new(vec![1; k as usize]);
        let dim = sym_character(&lam, &ones)?;
        let chi = sym_character(&lam, mu)?;
        let dim_n = specialize(
            &schur(&lam, "t", k as u32),
            &SpecializeRule::PrincipalN(Scalar::from_int(n as i64)),
        )
        .as_rat()
        .expect("principal specialization is rational");
        if dim_n.is_zero() {
            return Err(CoreError::Domain(format!(
                "vanishing principal dimension for {lam} at N = {n}"
            )));
        }
        sum += Rat::from_integer(&dim * &dim) * Rat::from_integer(chi) / dim_n;
    }
    let mut kf = BigInt::one();
    for i in 1..=k {
        kf *= BigInt::from(i);
    }
    let wg = sum / Rat::from_integer(&kf * &kf);
    WG_MEMO.insert((mu.clone(), n), wg.clone());
    Ok(wg)
}

// ---------------------------------------------------------------------------
// The entry-level contraction engine
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EngKind {
    Hermitian,
    Complex,
    Haar,
    /// Two coupled Haar matrices `(U, ~U)` with joint weight
    /// `exp(N Tr U ~U†)` (normalization 1, since only the balanced order
    /// survives Haar integration).
    HaarPair,
}

/// A matrix within an ensemble: `tilde` selects the second member of a
/// [`EngKind::HaarPair`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct MatId {
    ens: usize,
    tilde: bool,
}

#[derive(Clone, Copy, Debug)]
enum Glyph {
    Rand { mat: MatId, dag: bool },
    /// Deterministic diagonal matrix, an index into [`Engine::diags`];
    /// used for expectations with fixed external matrices.
    #[cfg_attr(not(test), allow(dead_code))]
    Diag(usize),
}

/// One multiplicative option contributed by an ensemble: a rational weight
/// and the index identifications it imposes.
struct Contribution {
    weight: Rat,
    merges: Vec<(usize, usize)>,
}

struct Engine {
    kinds: Vec<EngKind>,
    sizes: Vec<u32>,
    diags: Vec<Vec<Rat>>,
}

/// A flattened matrix entry: glyph plus row/column bond variables.
#[derive(Clone, Copy)]
struct Entry {
    glyph: Glyph,
    row: usize,
    col: usize,
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for i in 0..k {
        let mut next = Vec::new();
        for p in &out {
            for pos in 0..=i {
                let mut q = p.clone();
                q.insert(pos, i);
                next.push(q);
            }
        }
        out = next;
    }
    out
}

fn cycle_type(p: &[usize]) -> Partition {
    let mut seen = vec![false; p.len()];
    let mut parts = Vec::new();
    for s in 0..p.len() {
        if seen[s] {
            continue;
        }
        let mut len = 0u32;
        let mut t = s;
        while !seen[t] {
            seen[t] = true;
            t = p[t];
            len += 1;
        }
        parts.push(len);
    }
    parts.sort_unstable_by(|a, b| b.cmp(a));
    Partition::new(parts)
}

impl Engine {
    fn single(kind: EngKind, n: u32) -> Engine {
        Engine { kinds: vec![kind], sizes: vec![n], diags: Vec::new() }
    }

    fn glyph_size(&self, g: &Glyph) -> u32 {
        match g {
            Glyph::Rand { mat, .. } => self.sizes[mat.ens],
            Glyph::Diag(d) => self.diags[*d].len() as u32,
        }
    }

    /// Exact expectation of a product of cyclic traces, summing all bond
    /// indices over their ranges.
    fn expect(&self, traces: &[Vec<Glyph>]) -> Result<Rat> {
        // internal couplings of the Haar pairs: the balanced order is
        // determined by letter counting
        let mut traces = traces.to_vec();
        let mut prefactor = Rat::one();
        for (ens, kind) in self.kinds.iter().enumerate() {
            if *kind != EngKind::HaarPair {
                continue;
            }
            let count = |tilde: bool, dag: bool| {
                traces
                    .iter()
                    .flatten()
                    .filter(|g| {
                        matches!(g, Glyph::Rand { mat, dag: d }
                            if mat.ens == ens && mat.tilde == tilde && *d == dag)
                    })
                    .count() as i64
            };
            let j = count(false, true) - count(false, false);
            if j < 0 || j != count(true, false) - count(true, true) {
                return Ok(Rat::zero());
            }
            let n = self.sizes[ens];
            for _ in 0..j {
                traces.push(vec![
                    Glyph::Rand { mat: MatId { ens, tilde: false }, dag: false },
                    Glyph::Rand { mat: MatId { ens, tilde: true }, dag: true },
                ]);
            }
            for s in 1..=j {
                prefactor *= Rat::new(BigInt::from(n), BigInt::from(s));
            }
        }

        // flatten to entries over bond variables
        let mut entries: Vec<Entry> = Vec::new();
        let mut bond_size: Vec<u32> = Vec::new();
        for trace in &traces {
            let base = bond_size.len();
            let len = trace.len();
            bond_size.extend(std::iter::repeat(0).take(len));
            for (s, g) in trace.iter().enumerate() {
                entries.push(Entry { glyph: *g, row: base + s, col: base + (s + 1) % len });
            }
        }
        for e in &entries {
            let n = self.glyph_size(&e.glyph);
            for b in [e.row, e.col] {
                if bond_size[b] == 0 {
                    bond_size[b] = n;
                } else if bond_size[b] != n {
                    return Err(CoreError::SizeMismatch {
                        lhs: bond_size[b] as u64,
                        rhs: n as u64,
                    });
                }
            }
        }

        // deterministic diagonals identify row with column unconditionally
        let mut base_merges: Vec<(usize, usize)> = Vec::new();
        let mut diag_marks: Vec<(usize, usize)> = Vec::new(); // (bond, diag)
        for e in &entries {
            if let Glyph::Diag(d) = e.glyph {
                base_merges.push((e.row, e.col));
                diag_marks.push((e.row, d));
            }
        }

        // per-ensemble contribution lists
        let mut groups: Vec<Vec<Contribution>> = Vec::new();
        for (ens, kind) in self.kinds.iter().enumerate() {
            let n = self.sizes[ens];
            match kind {
                EngKind::Hermitian => {
                    let letters: Vec<&Entry> = entries
                        .iter()
                        .filter(|e| matches!(e.glyph, Glyph::Rand { mat, .. } if mat.ens == ens))
                        .collect();
                    if letters.len() % 2 == 1 {
                        return Ok(Rat::zero());
                    }
                    let mut opts = Vec::new();
                    let idx: Vec<usize> = (0..letters.len()).collect();
                    pair_matchings(&idx, &mut Vec::new(), &mut |pairs| {
                        let mut merges = Vec::new();
                        let mut weight = Rat::one();
                        for &(a, b) in pairs {
                            let (x, y) = (letters[a], letters[b]);
                            merges.push((x.row, y.col));
                            merges.push((x.col, y.row));
                            weight /= Rat::from_integer(BigInt::from(n));
                        }
                        opts.push(Contribution { weight, merges });
                    });
                    groups.push(opts);
                }
                EngKind::Complex => {
                    let zs: Vec<&Entry> = entries
                        .iter()
                        .filter(|e| matches!(e.glyph, Glyph::Rand { mat, dag: false } if mat.ens == ens))
                        .collect();
                    let zbars: Vec<&Entry> = entries
                        .iter()
                        .filter(|e| matches!(e.glyph, Glyph::Rand { mat, dag: true } if mat.ens == ens))
                        .collect();
                    if zs.len() != zbars.len() {
                        return Ok(Rat::zero());
                    }
                    let k = zs.len();
                    let mut opts = Vec::new();
                    for perm in permutations(k) {
                        let mut merges = Vec::new();
                        let mut weight = Rat::one();
                        for (s, z) in zs.iter().enumerate() {
                            let zb = zbars[perm[s]];
                            // <Z_ij Z†_kl> = d_il d_jk / N
                            merges.push((z.row, zb.col));
                            merges.push((z.col, zb.row));
                            weight /= Rat::from_integer(BigInt::from(n));
                        }
                        opts.push(Contribution { weight, merges });
                    }
                    groups.push(opts);
                }
                EngKind::Haar | EngKind::HaarPair => {
                    for tilde in [false, true] {
                        if tilde && *kind == EngKind::Haar {
                            continue;
                        }
                        let mat = MatId { ens, tilde };
                        let us: Vec<&Entry> = entries
                            .iter()
                            .filter(|e| matches!(e.glyph, Glyph::Rand { mat: m, dag: false } if m == mat))
                            .collect();
                        let ubars: Vec<&Entry> = entries
                            .iter()
                            .filter(|e| matches!(e.glyph, Glyph::Rand { mat: m, dag: true } if m == mat))
                            .collect();
                        if us.len() != ubars.len() {
                            return Ok(Rat::zero());
                        }
                        let k = us.len();
                        let perms = permutations(k);
                        let mut opts = Vec::new();
                        for sigma in &perms {
                            for tau in &perms {
                                // sigma tau^{-1}: position s -> sigma(tau^{-1}(s))
                                let mut tinv = vec![0usize; k];
                                for (s, &t) in tau.iter().enumerate() {
                                    tinv[t] = s;
                                }
                                let comp: Vec<usize> =
                                    (0..k).map(|s| sigma[tinv[s]]).collect();
                                let weight = weingarten(&cycle_type(&comp), n)?;
                                let mut merges = Vec::new();
                                for (s, u) in us.iter().enumerate() {
                                    // U†_{ij} = conj(U)_{ji}: rows of conj(U)
                                    // are the columns of U†
                                    merges.push((u.row, ubars[sigma[s]].col));
                                    merges.push((u.col, ubars[tau[s]].row));
                                }
                                opts.push(Contribution { weight, merges });
                            }
                        }
                        groups.push(opts);
                    }
                }
            }
        }

        // cartesian product of ensemble options; each combination fixes a
        // delta pattern whose free index classes are counted exactly
        let mut total = Rat::zero();
        let mut chosen: Vec<usize> = Vec::new();
        self.accumulate(
            &groups,
            &mut chosen,
            &base_merges,
            &diag_marks,
            &bond_size,
            &mut total,
        );
        Ok(total * prefactor)
    }

    fn accumulate(
        &self,
        groups: &[Vec<Contribution>],
        chosen: &mut Vec<usize>,
        base_merges: &[(usize, usize)],
        diag_marks: &[(usize, usize)],
        bond_size: &[u32],
        total: &mut Rat,
    ) {
        if chosen.len() == groups.len() {
            let mut weight = Rat::one();
            let mut uf: Vec<usize> = (0..bond_size.len()).collect();
            fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
                while uf[x] != x {
                    uf[x] = uf[uf[x]];
                    x = uf[x];
                }
                x
            }
            for (g, &c) in groups.iter().zip(chosen.iter()) {
                weight *= g[c].weight.clone();
                for &(a, b) in &g[c].merges {
                    let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
                    uf[ra] = rb;
                }
            }
            for &(a, b) in base_merges {
                let (ra, rb) = (find(&mut uf, a), find(&mut uf, b));
                uf[ra] = rb;
            }
            let mut class_diags: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
            for b in 0..bond_size.len() {
                class_diags.entry(find(&mut uf, b)).or_default();
            }
            for &(bond, d) in diag_marks {
                let r = find(&mut uf, bond);
                class_diags.get_mut(&r).unwrap().push(d);
            }
            for (root, ds) in &class_diags {
                let n = bond_size[*root] as usize;
                if ds.is_empty() {
                    weight *= Rat::from_integer(BigInt::from(n));
                } else {
                    let mut s = Rat::zero();
                    for i in 0..n {
                        let mut term = Rat::one();
                        for &d in ds {
                            term *= self.diags[d][i].clone();
                        }
                        s += term;
                    }
                    weight *= s;
                }
            }
            *total += weight;
            return;
        }
        let g = chosen.len();
        for c in 0..groups[g].len() {
            chosen.push(c);
            self.accumulate(groups, chosen, base_merges, diag_marks, bond_size, total);
            chosen.pop();
        }
    }
}

/// All perfect matchings of `idx`, reported through `sink`.
fn pair_matchings(
    idx: &[usize],
    acc: &mut Vec<(usize, usize)>,
    sink: &mut impl FnMut(&[(usize, usize)]),
) {
    if idx.is_empty() {
        sink(acc);
        return;
    }
    let first = idx[0];
    for p in 1..idx.len() {
        let partner = idx[p];
        let rest: Vec<usize> = idx[1..]
            .iter()
            .copied()
            .filter(|&x| x != partner)
            .collect();
        acc.push((first, partner));
        pair_matchings(&rest, acc, sink);
        acc.pop();
    }
}

// ---------------------------------------------------------------------------
// Chain matrix-model plans
// ---------------------------------------------------------------------------

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    ComplexGaussian,
    /// A single Haar matrix (simplified end node).
    Unitary,
    /// Two Haar matrices with the internal weight `exp(N Tr U ~U†)`.
    UnitaryPair,
    /// Plan-representable but not evaluable by this oracle.
    Normal,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainNode {
    pub kind: NodeKind,
    pub size: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingKind {
    /// `exp(N Tr A B)`.
    ExpTrace,
    /// `det(I (x) I - A (x) B)^{-1} = exp(sum_k Tr A^k Tr B^k / k)`.
    InverseDeterminant,
}

/// A specific matrix of a node: the node's matrix, optionally conjugated,
/// optionally the second member of a unitary pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixRef {
    pub node: usize,
    #[serde(default)]
    pub dagger: bool,
    #[serde(default)]
    pub tilde: bool,
}

impl MatrixRef {
    pub fn plain(node: usize) -> Self {
        MatrixRef { node, dagger: false, tilde: false }
    }

    pub fn dagger(node: usize) -> Self {
        MatrixRef { node, dagger: true, tilde: false }
    }

    pub fn tilde(node: usize) -> Self {
        MatrixRef { node, dagger: false, tilde: true }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Coupling {
    pub kind: CouplingKind,
    pub left: MatrixRef,
    pub right: MatrixRef,
}

/// `exp(sum_k scale * t_{block,k} Tr M^k)` attached to one matrix of the
/// chain; `n_scaled` puts `scale = N` of the target node, else 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attachment {
    pub block: BlockId,
    pub target: MatrixRef,
    #[serde(default)]
    pub n_scaled: bool,
}

/// A chain of independent matrix ensembles with pairwise couplings between
/// neighbours and time-variable potentials attached to specific matrices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixChainPlan {
    pub nodes: Vec<ChainNode>,
    pub couplings: Vec<Coupling>,
    pub attachments: Vec<Attachment>,
}

impl MatrixChainPlan {
    pub fn validate(&self) -> Result<()> {
        let check_ref = |r: &MatrixRef| -> Result<()> {
            let node = self
                .nodes
                .get(r.node)
                .ok_or_else(|| CoreError::Domain(format!("no node {}", r.node)))?;
            if r.tilde && node.kind != NodeKind::UnitaryPair {
                return Err(CoreError::Domain(
                    "tilde matrix only exists on a unitary pair".into(),
                ));
            }
            Ok(())
        };
        if self.nodes.iter().any(|n| n.size == 0) {
            return Err(CoreError::Domain("node size must be positive".into()));
        }
        for c in &self.couplings {
            check_ref(&c.left)?;
            check_ref(&c.right)?;
            if c.left.node + 1 != c.right.node {
                return Err(CoreError::Domain(
                    "couplings must join adjacent nodes left-to-right".into(),
                ));
            }
        }
        let mut seen = std::collections::BTreeSet::new();
        for a in &self.attachments {
            check_ref(&a.target)?;
            if !seen.insert(a.block.clone()) {
                return Err(CoreError::Domain(format!(
                    "block {} attached twice",
                    a.block
                )));
            }
        }
        Ok(())
    }

    /// Human-readable rendering of the chain.
    pub fn pretty(&self) -> String {
        let mat_name = |r: &MatrixRef| {
            let mut s = if r.tilde {
                format!("~M{}", r.node)
            } else {
                format!("M{}", r.node)
            };
            if r.dagger {
                s.push('†');
            }
            s
        };
        let mut out = String::new();
        for (i, n) in self.nodes.iter().enumerate() {
            let kind = match n.kind {
                NodeKind::ComplexGaussian => "complex-gaussian",
                NodeKind::Unitary => "unitary",
                NodeKind::UnitaryPair => "unitary-pair",
                NodeKind::Normal => "normal",
            };
            out.push_str(&format!("node {i}: {kind} (N = {})\n", n.size));
        }
        for c in &self.couplings {
            let desc = match c.kind {
                CouplingKind::ExpTrace => format!(
                    "exp(N Tr {} {})",
                    mat_name(&c.left),
                    mat_name(&c.right)
                ),
                CouplingKind::InverseDeterminant => format!(
                    "det(I (x) I - {} (x) {})^-1",
                    mat_name(&c.left),
                    mat_name(&c.right)
                ),
            };
            out.push_str(&format!(
                "coupling {}-{}: {desc}\n",
                c.left.node, c.right.node
            ));
        }
        for a in &self.attachments {
            let scale = if a.n_scaled { "N " } else { "" };
            out.push_str(&format!(
                "potential: exp(sum_k {scale}{}_k Tr {}^k)\n",
                a.block,
                mat_name(&a.target)
            ));
        }
        out
    }

    /// The two-node model of the fully simple generating function at
    /// `hbar = 1/N`: a Haar unitary coupled to a complex Gaussian by
    /// `exp(N Tr U† Z)`, with `t2 -> U`, `t1 -> N Z`, `t0 -> N Z†`.
    pub fn simple_maps_chain(n: u32) -> Self {
        MatrixChainPlan {
            nodes: vec![
                ChainNode { kind: NodeKind::Unitary, size: n },
                ChainNode { kind: NodeKind::ComplexGaussian, size: n },
            ],
            couplings: vec![Coupling {
                kind: CouplingKind::ExpTrace,
                left: MatrixRef::dagger(0),
                right: MatrixRef::plain(1),
            }],
            attachments: vec![
                Attachment { block: "t2".into(), target: MatrixRef::plain(0), n_scaled: false },
                Attachment { block: "t1".into(), target: MatrixRef::plain(1), n_scaled: true },
                Attachment { block: "t0".into(), target: MatrixRef::dagger(1), n_scaled: true },
            ],
        }
    }

    /// The three-ensemble chain of the hypergeometric series with weight
    /// `(1 + z/N3) / ((1 + z/N1)(1 + z/N2))`: two unitary pairs and one
    /// complex node joined by inverse-determinant couplings, `t0 -> U1†`,
    /// `t1 -> Z3`.
    pub fn three_factor_chain(n1: u32, n2: u32, n3: u32) -> Self {
        MatrixChainPlan {
            nodes: vec![
                ChainNode { kind: NodeKind::UnitaryPair, size: n1 },
                ChainNode { kind: NodeKind::UnitaryPair, size: n2 },
                ChainNode { kind: NodeKind::ComplexGaussian, size: n3 },
            ],
            couplings: vec![
                Coupling {
                    kind: CouplingKind::InverseDeterminant,
                    left: MatrixRef::tilde(0),
                    right: MatrixRef::dagger(1),
                },
                Coupling {
                    kind: CouplingKind::InverseDeterminant,
                    left: MatrixRef::tilde(1),
                    right: MatrixRef::dagger(2),
                },
            ],
            attachments: vec![
                Attachment { block: "t0".into(), target: MatrixRef::dagger(0), n_scaled: false },
                Attachment { block: "t1".into(), target: MatrixRef::plain(2), n_scaled: false },
            ],
        }
    }

    /// The depth-two chain of two simple-maps blocks glued by an
    /// inverse-determinant coupling: `t3 -> U2`, `t2 -> Z2`, `t1 -> Z1`,
    /// `t0 -> Z1†` (all unscaled, matching the nested double-ratio series).
    pub fn double_simple_chain(n: u32) -> Self {
        MatrixChainPlan {
            nodes: vec![
                ChainNode { kind: NodeKind::Unitary, size: n },
                ChainNode { kind: NodeKind::ComplexGaussian, size: n },
                ChainNode { kind: NodeKind::Unitary, size: n },
                ChainNode { kind: NodeKind::ComplexGaussian, size: n },
            ],
            couplings: vec![
                Coupling {
                    kind: CouplingKind::ExpTrace,
                    left: MatrixRef::dagger(0),
                    right: MatrixRef::plain(1),
                },
                Coupling {
                    kind: CouplingKind::InverseDeterminant,
                    left: MatrixRef::dagger(1),
                    right: MatrixRef::plain(2),
                },
                Coupling {
                    kind: CouplingKind::ExpTrace,
                    left: MatrixRef::dagger(2),
                    right: MatrixRef::plain(3),
                },
            ],
            attachments: vec![
                Attachment { block: "t3".into(), target: MatrixRef::plain(0), n_scaled: false },
                Attachment { block: "t2".into(), target: MatrixRef::plain(1), n_scaled: false },
                Attachment { block: "t1".into(), target: MatrixRef::plain(3), n_scaled: false },
                Attachment { block: "t0".into(), target: MatrixRef::dagger(3), n_scaled: false },
            ],
        }
    }

    fn engine(&self) -> Result<Engine> {
        let mut kinds = Vec::new();
        let mut sizes = Vec::new();
        for n in &self.nodes {
            kinds.push(match n.kind {
                NodeKind::ComplexGaussian => EngKind::Complex,
                NodeKind::Unitary => EngKind::Haar,
                NodeKind::UnitaryPair => EngKind::HaarPair,
                NodeKind::Normal => {
                    return Err(CoreError::Unsupported(
                        "normal-matrix nodes have no perturbative oracle".into(),
                    ))
                }
            });
            sizes.push(n.size);
        }
        Ok(Engine { kinds, sizes, diags: Vec::new() })
    }
}

fn ref_glyph(r: &MatrixRef) -> Glyph {
    Glyph::Rand { mat: MatId { ens: r.node, tilde: r.tilde }, dag: r.dagger }
}

fn power_trace_of(r: &MatrixRef, k: u32) -> Vec<Glyph> {
    vec![ref_glyph(r); k as usize]
}

/// Expansion options `(coefficient, traces)` of one coupling factor up to
/// total trace degree `max_order` per side.
fn coupling_options(c: &Coupling, n: u32, max_order: u32) -> Vec<(Rat, Vec<Vec<Glyph>>)> {
    let mut opts = Vec::new();
    match c.kind {
        CouplingKind::ExpTrace => {
            let mut coeff = Rat::one();
            for j in 0..=max_order {
                if j > 0 {
                    coeff *= Rat::new(BigInt::from(n), BigInt::from(j));
                }
                let traces =
                    vec![vec![ref_glyph(&c.left), ref_glyph(&c.right)]; j as usize];
                opts.push((coeff.clone(), traces));
            }
        }
        CouplingKind::InverseDeterminant => {
            for d in 0..=max_order as u64 {
                for kappa in partitions_of(d) {
                    let mut coeff = Rat::one();
                    for (k, a) in Exponents::from_partition(&kappa).pairs() {
                        for s in 1..=*a {
                            coeff /= Rat::from_integer(BigInt::from(*k) * BigInt::from(s));
                        }
                    }
                    let mut traces = Vec::new();
                    for &k in kappa.parts() {
                        traces.push(power_trace_of(&c.left, k));
                        traces.push(power_trace_of(&c.right, k));
                    }
                    opts.push((coeff, traces));
                }
            }
        }
    }
    opts
}

/// Schur polynomial of a matrix as a character sum over trace products:
/// `s_lam(M) = sum over mu of |lam| of chi_lam(mu)/z_mu prod_i Tr M^{mu_i}`.
fn schur_trace_options(r: &MatrixRef, lam: &Partition) -> Result<Vec<(Rat, Vec<Vec<Glyph>>)>> {
    let mut opts = Vec::new();
    for mu in partitions_of(lam.size()) {
        let chi = sym_character(lam, &mu)?;
        if chi.is_zero() {
            continue;
        }
        let coeff = Rat::new(chi, z_centralizer(&mu));
        let traces: Vec<Vec<Glyph>> =
            mu.parts().iter().map(|&k| power_trace_of(r, k)).collect();
        opts.push((coeff, traces));
    }
    Ok(opts)
}

/// Coefficient of the boundary monomial `query` (per-block exponent
/// vectors) in the chain integral, with optional Schur-function insertions
/// under the integral.  Couplings are expanded to order `max_order` each;
/// unbalanced terms vanish and are skipped by the engine.
pub fn chain_evaluate_with_schur(
    plan: &MatrixChainPlan,
    query: &BTreeMap<BlockId, Exponents>,
    insertions: &[(MatrixRef, Partition)],
    max_order: u32,
) -> Result<Scalar> {
    plan.validate()?;
    if max_order > 8 {
        return Err(CoreError::OrderBudget(format!(
            "coupling expansion order {max_order} exceeds 8"
        )));
    }
    let engine = plan.engine()?;
    // boundary potentials: fixed by the query monomial
    let mut base_coeff = Rat::one();
    let mut base_traces: Vec<Vec<Glyph>> = Vec::new();
    for (block, e) in query {
        let att = plan
            .attachments
            .iter()
            .find(|a| &a.block == block)
            .ok_or_else(|| CoreError::Domain(format!("no attachment for block {block}")))?;
        let n = plan.nodes[att.target.node].size;
        for &(k, a) in e.pairs() {
            for s in 1..=a {
                base_coeff /= Rat::from_integer(BigInt::from(s));
                if att.n_scaled {
                    base_coeff *= Rat::from_integer(BigInt::from(n));
                }
                base_traces.push(power_trace_of(&att.target, k));
            }
        }
    }
    // factor options: couplings and Schur insertions
    let mut factor_opts: Vec<Vec<(Rat, Vec<Vec<Glyph>>)>> = Vec::new();
    for c in &plan.couplings {
        let n = plan.nodes[c.left.node].size;
        factor_opts.push(coupling_options(c, n, max_order));
    }
    for (r, lam) in insertions {
        factor_opts.push(schur_trace_options(r, lam)?);
    }
    // sum over the option product
    fn walk(
        engine: &Engine,
        opts: &[Vec<(Rat, Vec<Vec<Glyph>>)>],
        coeff: Rat,
        traces: &mut Vec<Vec<Glyph>>,
        total: &mut Rat,
    ) -> Result<()> {
        match opts.split_first() {
            None => {
                let v = engine.expect(traces)?;
                if !v.is_zero() {
                    *total += coeff * v;
                }
                Ok(())
            }
            Some((first, rest)) => {
                for (c, tr) in first {
                    let keep = traces.len();
                    traces.extend(tr.iter().cloned());
                    walk(engine, rest, coeff.clone() * c.clone(), traces, total)?;
                    traces.truncate(keep);
                }
                Ok(())
            }
        }
    }
    let mut total = Rat::zero();
    let mut traces = base_traces;
    walk(&engine, &factor_opts, base_coeff, &mut traces, &mut total)?;
    Ok(Scalar::from_rat(total))
}

/// [`chain_evaluate_with_schur`] without insertions.
pub fn chain_evaluate(
    plan: &MatrixChainPlan,
    query: &BTreeMap<BlockId, Exponents>,
    max_order: u32,
) -> Result<Scalar> {
    chain_evaluate_with_schur(plan, query, &[], max_order)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::enumerate_partitions;
    use crate::symfunc::{skew_schur, MultiSeries};
    use crate::tau::{expand_tau_restricted, NestedSpec, Sign};
    use crate::weights::{content_product, WeightGen};

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec())
    }

    fn rat(a: i64, b: i64) -> Rat {
        Rat::new(BigInt::from(a), BigInt::from(b))
    }

    fn herm(n: u32, words: Vec<Vec<bool>>) -> Rat {
        hermitian_moment(&MomentQuery::new(Ensemble::HermitianGaussian { n }, words))
            .unwrap()
            .as_rat()
            .unwrap()
    }

    fn cplx(n: u32, words: Vec<Vec<bool>>) -> Rat {
        complex_moment(&MomentQuery::new(Ensemble::ComplexGaussian { n }, words))
            .unwrap()
            .as_rat()
            .unwrap()
    }

    fn unit(n: u32, words: Vec<Vec<bool>>) -> Rat {
        unitary_moment(&MomentQuery::new(Ensemble::Unitary { n }, words))
            .unwrap()
            .as_rat()
            .unwrap()
    }

    #[test]
    fn hermitian_low_moments() {
        for n in 1..=3u32 {
            assert_eq!(herm(n, vec![vec![false]]), Rat::zero());
            assert_eq!(herm(n, vec![vec![false; 2]]), rat(n as i64, 1));
            assert_eq!(herm(n, vec![vec![false], vec![false]]), Rat::one());
            assert_eq!(herm(n, vec![vec![false; 3]]), Rat::zero());
        }
    }

    #[test]
    fn hermitian_genus_expansion() {
        // <Tr X^{2k}> = sum over genus g of e_g(k) N^{k - 2g} / N^k with
        // leading Catalan coefficients: 2N + 1/N and 5N + 10/N
        for n in 2..=3i64 {
            assert_eq!(herm(n as u32, vec![vec![false; 4]]), rat(2 * n, 1) + rat(1, n));
            assert_eq!(
                herm(n as u32, vec![vec![false; 6]]),
                rat(5 * n, 1) + rat(10, n)
            );
        }
    }

    #[test]
    fn complex_low_moments() {
        for n in 1..=3i64 {
            assert_eq!(cplx(n as u32, vec![vec![false]]), Rat::zero());
            assert_eq!(
                cplx(n as u32, vec![vec![false], vec![true]]),
                Rat::one()
            );
            // Tr ZZ†
            assert_eq!(cplx(n as u32, vec![vec![false, true]]), rat(n, 1));
            // (Tr ZZ†)^2: one disconnected and one connected contraction
            assert_eq!(
                cplx(n as u32, vec![vec![false, true], vec![false, true]]),
                rat(n * n + 1, 1)
            );
            // Tr Z^2 Tr Z†^2: both contractions give 1
            assert_eq!(
                cplx(n as u32, vec![vec![false, false], vec![true, true]]),
                rat(2, 1)
            );
        }
    }

    #[test]
    fn weingarten_values() {
        for n in 2..=4i64 {
            assert_eq!(weingarten(&p(&[1]), n as u32).unwrap(), rat(1, n));
            assert_eq!(
                weingarten(&p(&[1, 1]), n as u32).unwrap(),
                rat(1, n * n - 1)
            );
            assert_eq!(
                weingarten(&p(&[2]), n as u32).unwrap(),
                -rat(1, n * (n * n - 1))
            );
        }
        // k = 3 planar value: (N^2 - 2) / (N(N^2-1)(N^2-4))
        for n in 3..=4i64 {
            assert_eq!(
                weingarten(&p(&[1, 1, 1]), n as u32).unwrap(),
                rat(n * n - 2, n * (n * n - 1) * (n * n - 4))
            );
        }
    }

    #[test]
    fn unitary_low_moments() {
        for n in 2..=3u32 {
            assert_eq!(unit(n, vec![vec![false]]), Rat::zero());
            assert_eq!(unit(n, vec![vec![false], vec![true]]), Rat::one());
            // Tr U U† = N deterministically
            assert_eq!(unit(n, vec![vec![false, true]]), rat(n as i64, 1));
            // E |Tr U|^4 = 2 for N >= 2
            assert_eq!(
                unit(
                    n,
                    vec![vec![false], vec![false], vec![true], vec![true]]
                ),
                rat(2, 1)
            );
        }
    }

    #[test]
    fn single_entry_moment_via_diagonal_projector() {
        // E |U_11|^2 = 1/N using Tr(E1 U E1 U†) with E1 = diag(1, 0, ...)
        for n in 2..=3usize {
            let mut e1 = vec![Rat::zero(); n];
            e1[0] = Rat::one();
            let engine = Engine {
                kinds: vec![EngKind::Haar],
                sizes: vec![n as u32],
                diags: vec![e1],
            };
            let mat = MatId { ens: 0, tilde: false };
            let traces = vec![vec![
                Glyph::Diag(0),
                Glyph::Rand { mat, dag: false },
                Glyph::Diag(0),
                Glyph::Rand { mat, dag: true },
            ]];
            assert_eq!(engine.expect(&traces).unwrap(), rat(1, n as i64));
        }
    }

    /// `<prod_i Tr Z†^{mu_i} * prod_j Tr Z^{nu_j}>` over the complex ensemble.
    fn cross_moment(n: u32, mu: &Partition, nu: &Partition) -> Rat {
        let mut words: Vec<Vec<bool>> = Vec::new();
        for &k in mu.parts() {
            words.push(vec![true; k as usize]);
        }
        for &k in nu.parts() {
            words.push(vec![false; k as usize]);
        }
        cplx(n, words)
    }

    /// Schur expectation `<s_lam(Z†) prod_k (Tr Z^k)^{a_k}>` via characters.
    fn schur_z_moment(n: u32, lam: &Partition, e: &Exponents) -> Rat {
        let nu = e.to_partition();
        let mut total = Rat::zero();
        for mu in partitions_of(lam.size()) {
            let chi = sym_character(lam, &mu).unwrap();
            if chi.is_zero() {
                continue;
            }
            total += Rat::new(chi, z_centralizer(&mu)) * cross_moment(n, &mu, &nu);
        }
        total
    }

    #[test]
    fn complex_schur_average_is_content_product() {
        // <s_lam(Z†) exp(sum_k t_k Tr Z^k)> = r+_lam(1/N) s_lam(t)
        // coefficientwise, for rows(lam) <= N
        for n in 2..=3u32 {
            for lam in enumerate_partitions(3) {
                if lam.parts().len() as u32 > n {
                    continue;
                }
                let g = WeightGen::plus(Scalar::from_ratio(1, n as i64));
                let r = content_product(&g, &lam, 0).unwrap().as_rat().unwrap();
                let cap = lam.size() as u32;
                let s = schur(&lam, "t", cap.max(1));
                for (key, c) in s.terms() {
                    let e = &key[0];
                    let mut denom = Rat::one();
                    for &(_, a) in e.pairs() {
                        for s in 1..=a {
                            denom *= rat(s as i64, 1);
                        }
                    }
                    let lhs = schur_z_moment(n, &lam, e) / denom;
                    assert_eq!(lhs, r.clone() * c.as_rat().unwrap(), "{lam} {e:?}");
                }
            }
        }
    }

    #[test]
    fn coupled_unitary_pair_matches_inverse_content_product() {
        // coefficient of t^mu tbar^nu in the double unitary integral equals
        // the restricted Schur sum with r-_lam(1/N)
        let n = 2u32;
        for d in 0..=2u64 {
            for mu in partitions_of(d) {
                for nu in partitions_of(d) {
                    // wick side: Tr(U†)^k from t, Tr(~U)^k from tbar
                    let mut traces: Vec<Vec<Glyph>> = Vec::new();
                    for &k in mu.parts() {
                        traces.push(vec![
                            Glyph::Rand { mat: MatId { ens: 0, tilde: false }, dag: true };
                            k as usize
                        ]);
                    }
                    for &k in nu.parts() {
                        traces.push(vec![
                            Glyph::Rand { mat: MatId { ens: 0, tilde: true }, dag: false };
                            k as usize
                        ]);
                    }
                    let engine = Engine::single(EngKind::HaarPair, n);
                    let wick = engine.expect(&traces).unwrap();
                    // Schur side: <p_mu(U†) p_nu(~U)> with p_mu expanded
                    // through characters into Schur polynomials
                    let g = WeightGen::minus(Scalar::from_ratio(1, n as i64));
                    let mut sum = Rat::zero();
                    for lam in partitions_of(d) {
                        if lam.parts().len() as u32 > n {
                            continue;
                        }
                        let r = content_product(&g, &lam, 0).unwrap().as_rat().unwrap();
                        let cm = Rat::from_integer(sym_character(&lam, &mu).unwrap());
                        let cn = Rat::from_integer(sym_character(&lam, &nu).unwrap());
                        sum += r * cm * cn;
                    }
                    assert_eq!(wick, sum, "mu={mu} nu={nu}");
                }
            }
        }
    }

    #[test]
    fn hciz_integral_matches_character_sum() {
        // int dU exp(N Tr U A U† B) expanded per order j equals
        // sum over lam of j with rows <= N of s_lam(a) s_lam(b) r-_lam(1/N)
        let n = 2u32;
        let a = vec![Scalar::from_int(1), Scalar::from_int(2)];
        let b = vec![Scalar::from_ratio(1, 2), Scalar::from_int(-1)];
        let a_r: Vec<Rat> = a.iter().map(|x| x.as_rat().unwrap()).collect();
        let b_r: Vec<Rat> = b.iter().map(|x| x.as_rat().unwrap()).collect();
        let engine = Engine {
            kinds: vec![EngKind::Haar],
            sizes: vec![n],
            diags: vec![a_r, b_r],
        };
        let mat = MatId { ens: 0, tilde: false };
        for j in 0..=3u32 {
            // (N^j / j!) <(Tr U A U† B)^j>
            let trace = vec![
                Glyph::Rand { mat, dag: false },
                Glyph::Diag(0),
                Glyph::Rand { mat, dag: true },
                Glyph::Diag(1),
            ];
            let traces = vec![trace; j as usize];
            let mut lhs = engine.expect(&traces).unwrap();
            for s in 1..=j as i64 {
                lhs *= rat(n as i64, s);
            }
            let g = WeightGen::minus(Scalar::from_ratio(1, n as i64));
            let mut rhs = Rat::zero();
            for lam in partitions_of(j as u64) {
                if lam.parts().len() as u32 > n {
                    continue;
                }
                let r = content_product(&g, &lam, 0).unwrap().as_rat().unwrap();
                let cap = (j.max(1)) as u32;
                let sa = specialize(&schur(&lam, "t", cap), &SpecializeRule::Miwa(a.clone()));
                let sb = specialize(&schur(&lam, "t", cap), &SpecializeRule::Miwa(b.clone()));
                rhs += r * sa.as_rat().unwrap() * sb.as_rat().unwrap();
            }
            assert_eq!(lhs, rhs, "order {j}");
        }
    }

    #[test]
    fn empty_potential_normalizes_to_one() {
        let plans = [
            MatrixChainPlan::simple_maps_chain(2),
            MatrixChainPlan::three_factor_chain(2, 2, 2),
            MatrixChainPlan::double_simple_chain(2),
        ];
        for plan in &plans {
            let v = chain_evaluate(plan, &BTreeMap::new(), 4).unwrap();
            assert!(v.is_one(), "{}", plan.pretty());
        }
    }

    #[test]
    fn three_factor_chain_coefficients() {
        // coefficient of t1^mu t0^nu equals the diagonal Schur sum with the
        // product weight r+(1/N3) r-(1/N2) r-(1/N1)
        let (n1, n2, n3) = (2u32, 2u32, 2u32);
        let plan = MatrixChainPlan::three_factor_chain(n1, n2, n3);
        let g = WeightGen::plus(Scalar::from_ratio(1, n3 as i64))
            .product(&WeightGen::minus(Scalar::from_ratio(1, n2 as i64)))
            .product(&WeightGen::minus(Scalar::from_ratio(1, n1 as i64)));
        for d in 0..=2u64 {
            for mu in partitions_of(d) {
                for nu in partitions_of(d) {
                    let mut query = BTreeMap::new();
                    query.insert("t1".to_string(), Exponents::from_partition(&mu));
                    query.insert("t0".to_string(), Exponents::from_partition(&nu));
                    let wick = chain_evaluate(&plan, &query, 4).unwrap().as_rat().unwrap();
                    let mut sum = Rat::zero();
                    for lam in partitions_of(d) {
                        if lam.parts().len() as u32 > n1.min(n2).min(n3) {
                            continue;
                        }
                        let r = content_product(&g, &lam, 0).unwrap().as_rat().unwrap();
                        let cm = Rat::from_integer(sym_character(&lam, &mu).unwrap());
                        let cn = Rat::from_integer(sym_character(&lam, &nu).unwrap());
                        sum += r * cm * cn;
                    }
                    // the potential contributes prod (Tr M^k)^{a_k} / a_k!
                    // at the monomial t^e, so the character sum over
                    // <p_mu p_nu> is divided by the symmetry factorials
                    let me = Exponents::from_partition(&mu);
                    let ne = Exponents::from_partition(&nu);
                    let mut denom = Rat::one();
                    for e in [&me, &ne] {
                        for &(_, a) in e.pairs() {
                            for s in 1..=a {
                                denom *= rat(s as i64, 1);
                            }
                        }
                    }
                    assert_eq!(wick, sum / denom, "mu={mu} nu={nu}");
                }
            }
        }
    }

    /// Coefficients of the restricted nested expansion of the fully simple
    /// spec at `hbar = 1/N`, with `t1`, `t0` rescaled by `N`.
    fn fully_simple_series(n: u32, caps: (u32, u32, u32)) -> MultiSeries {
        let h = Scalar::from_ratio(1, n as i64);
        let spec = NestedSpec {
            n: 0,
            m: 1,
            sigma: vec![Sign::Plus],
            weights: vec![WeightGen::plus(h.clone()).inverse(), WeightGen::plus(h)],
            caps: vec![caps.0, caps.1, caps.2],
            insertions: BTreeMap::new(),
        };
        let tau = expand_tau_restricted(&spec, Some(n)).unwrap();
        let nn = Scalar::from_int(n as i64);
        tau.series.scale_block("t0", &nn).scale_block("t1", &nn)
    }

    #[test]
    fn simple_maps_chain_matches_nested_expansion() {
        let n = 2u32;
        let series = fully_simple_series(n, (2, 2, 2));
        let plan = MatrixChainPlan::simple_maps_chain(n);
        for (key, c) in series.terms() {
            let mut query = BTreeMap::new();
            query.insert("t0".to_string(), key[0].clone());
            query.insert("t1".to_string(), key[1].clone());
            query.insert("t2".to_string(), key[2].clone());
            let wick = chain_evaluate(&plan, &query, 4).unwrap();
            assert_eq!(wick, c.clone(), "{key:?}");
        }
        // spot-check a vanishing coefficient outside the series support
        let mut query = BTreeMap::new();
        query.insert("t2".to_string(), Exponents::var(1));
        query.insert("t1".to_string(), Exponents::var(1));
        assert!(chain_evaluate(&plan, &query, 4).unwrap().is_zero());
    }

    #[test]
    fn double_simple_chain_superintegrability() {
        // Schur insertion at the outermost unitary: for rows(lam2) <= N,
        // <s_lam2(U2) exp-potentials> expands as
        //   r-_lam2(1/N) sum over lam0 containing lam1 containing lam2 of
        //   r+_lam0(1/N) s_{lam1/lam2}(t2) s_{lam0/lam1}(t1) s_lam0(t0),
        // all rows bounded by N.  Compare coefficientwise to total degree 3.
        let n = 2u32;
        let h = Scalar::from_ratio(1, n as i64);
        let plan = MatrixChainPlan::double_simple_chain(n);
        let gp = WeightGen::plus(h.clone());
        let gm = WeightGen::minus(h);
        let cap = 3u32;
        let blocks = vec![
            ("t0".to_string(), cap),
            ("t1".to_string(), cap),
            ("t2".to_string(), cap),
        ];
        for lam2 in [p(&[]), p(&[1])] {
            let r2 = content_product(&gm, &lam2, 0).unwrap();
            let mut predicted = MultiSeries::zero(blocks.clone());
            for d0 in lam2.size()..=3 {
                for lam0 in partitions_of(d0) {
                    if lam0.parts().len() as u32 > n {
                        continue;
                    }
                    let r0 = content_product(&gp, &lam0, 0).unwrap();
                    for d1 in lam2.size()..=d0 {
                        for lam1 in partitions_of(d1) {
                            if lam1.parts().len() as u32 > n {
                                continue;
                            }
                            let s12 = skew_schur(&lam1, &lam2, "t2", cap);
                            let s01 = skew_schur(&lam0, &lam1, "t1", cap);
                            if s12.is_zero() || s01.is_zero() {
                                continue;
                            }
                            let term = schur(&lam0, "t0", cap)
                                .promote(blocks.clone())
                                .mul(&s01.promote(blocks.clone()))
                                .mul(&s12.promote(blocks.clone()))
                                .mul_scalar(&r2.mul(&r0));
                            predicted = predicted.add(&term);
                        }
                    }
                }
            }
            let insertions = [(MatrixRef::plain(0), lam2.clone())];
            for (key, c) in predicted.terms() {
                if key.iter().map(|e| e.degree()).sum::<u64>() > 3 {
                    continue;
                }
                let mut query = BTreeMap::new();
                query.insert("t0".to_string(), key[0].clone());
                query.insert("t1".to_string(), key[1].clone());
                query.insert("t2".to_string(), key[2].clone());
                let wick =
                    chain_evaluate_with_schur(&plan, &query, &insertions, 4).unwrap();
                assert_eq!(wick, c.clone(), "lam2={lam2} {key:?}");
            }
            // unbalanced monomial vanishes on both sides
            let mut query = BTreeMap::new();
            query.insert("t1".to_string(), Exponents::var(2));
            assert!(chain_evaluate_with_schur(&plan, &query, &insertions, 4)
                .unwrap()
                .is_zero());
        }
    }

    #[test]
    fn plan_serde_round_trip_and_pretty() {
        let plan = MatrixChainPlan::three_factor_chain(2, 3, 2);
        let j = serde_json::to_string(&plan).unwrap();
        assert!(j.contains("unitary-pair"));
        let back: MatrixChainPlan = serde_json::from_str(&j).unwrap();
        assert_eq!(plan, back);
        let text = plan.pretty();
        assert!(text.contains("node 0: unitary-pair (N = 2)"));
        assert!(text.contains("det(I (x) I - ~M0 (x) M1†)^-1"));
        // normal nodes print but refuse evaluation
        let normal = MatrixChainPlan {
            nodes: vec![ChainNode { kind: NodeKind::Normal, size: 2 }],
            couplings: vec![],
            attachments: vec![Attachment {
                block: "t0".to_string(),
                target: MatrixRef::plain(0),
                n_scaled: false,
            }],
        };
        assert!(matches!(
            chain_evaluate(&normal, &BTreeMap::new(), 2),
            Err(CoreError::Unsupported(_))
        ));
    }
}
