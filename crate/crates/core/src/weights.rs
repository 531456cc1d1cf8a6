//! Weight generating functions `G(z)`, their content products over Young
//! diagrams, and the charge-dependent normalization constants `c_n`.
//!
//! `G(z) = prod_i (1 + u_i z) / prod_j (1 + v_j z) * e^{w z}` with `G(0)=1`
//! built in; the exponential part uses a nilpotent coefficient `w`, so every
//! evaluation stays an exact truncated scalar.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{CoreError, Result};
use crate::partitions::Partition;
use crate::scalar::{Param, Rat, Scalar};

/// The exponential part `e^{w z}` of a weight generating function in its
/// serialized form: `w = coeff * eps` for a nilpotent parameter `eps`
/// (canonically named `"w"`) with `eps^{order+1} = 0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpPart {
    pub coeff: Scalar,
    pub order: u32,
}

/// `G(z) = prod (1 + u_i z) / prod (1 + v_j z) * e^{w z}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "WeightGenRepr", from = "WeightGenRepr")]
pub struct WeightGen {
    pub u: Vec<Scalar>,
    pub v: Vec<Scalar>,
    /// Linear exponent coefficient; must be nilpotent (zero constant part).
    pub w: Scalar,
}

#[derive(Serialize, Deserialize)]
struct WeightGenRepr {
    #[serde(default)]
    u: Vec<Scalar>,
    #[serde(default)]
    v: Vec<Scalar>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    w: Option<ExpPart>,
}

impl From<WeightGen> for WeightGenRepr {
    fn from(g: WeightGen) -> Self {
        let w = if g.w.is_zero() {
            None
        } else {
            // the exponent must be coeff * eps for a single nilpotent eps
            let mut orders: Vec<u32> = Vec::new();
            let mut coeff = Scalar::zero();
            for (mono, r) in g.w.terms() {
                let factors = mono.factors();
                assert!(
                    factors.len() == 1 && factors[0].1 == 1,
                    "exponential part is not linear in one nilpotent parameter"
                );
                orders.push(factors[0].0.order);
                coeff = coeff.add(&Scalar::from_rat(r.clone()));
            }
            orders.dedup();
            assert_eq!(orders.len(), 1, "mixed truncation orders in exponent");
            Some(ExpPart { coeff, order: orders[0] })
        };
        WeightGenRepr { u: g.u, v: g.v, w }
    }
}

impl From<WeightGenRepr> for WeightGen {
    fn from(r: WeightGenRepr) -> Self {
        let w = match r.w {
            None => Scalar::zero(),
            Some(e) => Scalar::param(&Param { name: "w".to_string(), order: e.order })
                .mul(&e.coeff),
        };
        WeightGen { u: r.u, v: r.v, w }
    }
}

impl WeightGen {
    pub fn trivial() -> Self {
        WeightGen { u: Vec::new(), v: Vec::new(), w: Scalar::zero() }
    }

    /// `G^+(z) = 1 + u z`.
    pub fn plus(u: Scalar) -> Self {
        WeightGen { u: vec![u], v: Vec::new(), w: Scalar::zero() }
    }

    /// `G^-(z) = 1 / (1 + u z)`.
    pub fn minus(u: Scalar) -> Self {
        WeightGen { u: Vec::new(), v: vec![u], w: Scalar::zero() }
    }

    /// `G^exp(z) = e^{w z}` with `w = coeff * eps`, `eps` a fresh nilpotent
    /// parameter named `name` truncated at `eps^{order+1} = 0`.
    pub fn exponential(name: &str, coeff: Rat, order: u32) -> Self {
        let w = Scalar::param(&Param { name: name.to_string(), order })
            .mul_rat(&coeff);
        WeightGen { u: Vec::new(), v: Vec::new(), w }
    }

    pub fn is_trivial(&self) -> bool {
        self.u.iter().all(Scalar::is_zero)
            && self.v.iter().all(Scalar::is_zero)
            && self.w.is_zero()
    }

    pub fn validate(&self) -> Result<()> {
        if !self.w.constant_part().is_zero() {
            return Err(CoreError::Domain(
                "exponential coefficient w must be nilpotent".into(),
            ));
        }
        Ok(())
    }

    /// `G1 * G2`: numerator and denominator factors merge, exponents add.
    pub fn product(&self, other: &WeightGen) -> WeightGen {
        let mut u = self.u.clone();
        u.extend(other.u.iter().cloned());
        let mut v = self.v.clone();
        v.extend(other.v.iter().cloned());
        WeightGen { u, v, w: self.w.add(&other.w) }
    }

    /// `G^{-1}`: numerator and denominator swap, exponent flips sign.
    pub fn inverse(&self) -> WeightGen {
        WeightGen { u: self.v.clone(), v: self.u.clone(), w: self.w.neg() }
    }
}

/// `e^x` for a nilpotent scalar `x`.
fn exp_nilpotent(x: &Scalar) -> Result<Scalar> {
    if !x.constant_part().is_zero() {
        return Err(CoreError::Domain("exp of non-nilpotent scalar".into()));
    }
    let mut out = Scalar::one();
    let mut power = Scalar::one();
    let mut k = 1u64;
    loop {
        power = power.mul(x);
        if power.is_zero() {
            break;
        }
        let mut fact = BigInt::one();
        for j in 1..=k {
            fact *= BigInt::from(j);
        }
        out = out.add(&power.mul_rat(&Rat::new(BigInt::one(), fact)));
        k += 1;
    }
    Ok(out)
}

/// Evaluate `G` at an integer content `c`.
#[allow(non_snake_case)]
pub fn eval_G(g: &WeightGen, c: i64) -> Result<Scalar> {
    g.validate()?;
    let cs = Scalar::from_int(c);
    let mut out = Scalar::one();
    for ui in &g.u {
        out = out.mul(&Scalar::one().add(&ui.mul(&cs)));
    }
    for (j, vj) in g.v.iter().enumerate() {
        let factor = Scalar::one().add(&vj.mul(&cs));
        match factor.inverse() {
            Some(inv) => out = out.mul(&inv),
            None => return Err(CoreError::PoleAtContent { factor_index: j, content: c }),
        }
    }
    if !g.w.is_zero() {
        out = out.mul(&exp_nilpotent(&g.w.mul(&cs))?);
    }
    Ok(out)
}

/// Content product `r_{lambda,n} = prod_{(i,j) in lambda} G(n + j - i)`.
pub fn content_product(g: &WeightGen, lam: &Partition, n: i64) -> Result<Scalar> {
    let mut out = Scalar::one();
    for (i, j) in lam.cells() {
        out = out.mul(&eval_G(g, n + j as i64 - i as i64)?);
    }
    Ok(out)
}

/// Normalization constant `c_n`, the solution of `c_{n+1}/c_n = e^{T_n}`
/// with `c_0 = 1` under the convention `T_0 = 0`, where
/// `e^{T_i} = prod_{j=1}^{i} G(j)` for `i > 0` and
/// `e^{T_i} = prod_{j=i+1}^{0} G(j)^{-1}` for `i < 0`.
pub fn c_norm(g: &WeightGen, n: i64) -> Result<Scalar> {
    // c_n = prod_{i=0}^{n-1} e^{T_i} (n > 0) or prod_{i=n}^{-1} e^{-T_i} (n < 0)
    let e_t = |i: i64| -> Result<Scalar> {
        let mut acc = Scalar::one();
        if i > 0 {
            for j in 1..=i {
                acc = acc.mul(&eval_G(g, j)?);
            }
        } else {
            for j in (i + 1)..=0 {
                let gj = eval_G(g, j)?;
                let inv = gj.inverse().ok_or(CoreError::PoleAtContent {
                    factor_index: usize::MAX,
                    content: j,
                })?;
                acc = acc.mul(&inv);
            }
        }
        Ok(acc)
    };
    let mut out = Scalar::one();
    if n > 0 {
        for i in 0..n {
            out = out.mul(&e_t(i)?);
        }
    } else {
        for i in n..0 {
            let et = e_t(i)?;
            let inv = et.inverse().ok_or(CoreError::Domain(
                "c_norm: non-invertible e^{T_i}".into(),
            ))?;
            out = out.mul(&inv);
        }
    }
    Ok(out)
}

/// `N^{-|lambda|} s_lambda(t_k = N/k) / s_lambda(t_k = delta_{k,1})`,
/// defined for `len(lambda) <= N`; an exact rational.
pub fn schur_ratio(lam: &Partition, n_size: u64) -> Scalar {
    assert!(n_size >= 1, "N must be positive");
    assert!(lam.len() as u64 <= n_size, "needs len(lambda) <= N");
    let cap = lam.size() as u32;
    let s = crate::symfunc::schur(lam, "t", cap);
    let num = crate::symfunc::specialize(
        &s,
        &crate::symfunc::SpecializeRule::PrincipalN(Scalar::from_int(n_size as i64)),
    );
    let den = crate::symfunc::specialize(&s, &crate::symfunc::SpecializeRule::DeltaK1);
    let n_rat = Rat::from_integer(BigInt::from(n_size));
    let scale = Rat::one() / num_traits::pow::pow(n_rat, lam.size() as usize);
    num.mul_rat(&(scale / den.as_rat().expect("dimension term is rational")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::enumerate_partitions;

    fn p(parts: &[u32]) -> Partition {
        Partition::new(parts.to_vec())
    }

    #[test]
    fn eval_g_basics() {
        let g = WeightGen::plus(Scalar::from_ratio(1, 3));
        assert!(eval_G(&g, 0).unwrap().is_one());
        assert_eq!(eval_G(&g, 1).unwrap(), Scalar::from_ratio(4, 3));
        // G^-(1) at c = -1 hits the pole 1 + 1*(-1) = 0
        let gm = WeightGen::minus(Scalar::from_int(1));
        assert_eq!(
            eval_G(&gm, -1),
            Err(CoreError::PoleAtContent { factor_index: 0, content: -1 })
        );
    }

    #[test]
    fn content_product_examples() {
        let u = Scalar::from_ratio(1, 2);
        let g = WeightGen::plus(u.clone());
        // lambda = (2,1), n = 0: contents 0, 1, -1 -> (1)(1+u)(1-u) = 1 - u^2
        let r = content_product(&g, &p(&[2, 1]), 0).unwrap();
        assert_eq!(r, Scalar::from_ratio(3, 4));
        assert!(content_product(&g, &Partition::empty(), 5).unwrap().is_one());
    }

    #[test]
    fn exp_weight_content_product() {
        // G^exp: r_{lambda,n} = e^{w * content_sum} truncated
        let g = WeightGen::exponential("w", Rat::one(), 3);
        for lam in enumerate_partitions(6) {
            for n in -2..=2i64 {
                let r = content_product(&g, &lam, n).unwrap();
                let cs = lam.content_sum(n);
                let expect =
                    exp_nilpotent(&g.w.mul_rat(&Rat::from_integer(BigInt::from(cs)))).unwrap();
                assert_eq!(r, expect, "failed for {lam}, n={n}");
            }
        }
    }

    #[test]
    fn reciprocity_and_multiplicativity() {
        let u = Scalar::from_ratio(2, 5);
        let gp = WeightGen::plus(u.clone());
        let gm = WeightGen::minus(u.clone());
        let g2 = WeightGen::plus(Scalar::from_ratio(-1, 3));
        for lam in enumerate_partitions(6) {
            for n in -2..=2i64 {
                let rp = content_product(&gp, &lam, n).unwrap();
                let rm = content_product(&gm, &lam, n).unwrap();
                assert!(rp.mul(&rm).is_one(), "reciprocity failed for {lam}, n={n}");
                let prod = content_product(&gp.product(&g2), &lam, n).unwrap();
                let sep = rp.mul(&content_product(&g2, &lam, n).unwrap());
                assert_eq!(prod, sep, "multiplicativity failed for {lam}, n={n}");
            }
        }
    }

    #[test]
    fn inverse_cancels() {
        let g = WeightGen::plus(Scalar::from_ratio(1, 2))
            .product(&WeightGen::minus(Scalar::from_ratio(1, 7)));
        let both = g.product(&g.inverse());
        // n = 2 keeps all contents of |lambda| <= 4 away from the poles
        for lam in enumerate_partitions(4) {
            assert!(content_product(&both, &lam, 2).unwrap().is_one());
        }
    }

    #[test]
    fn c_norm_examples() {
        let u = Scalar::from_ratio(1, 4);
        let g = WeightGen::plus(u.clone());
        assert!(c_norm(&g, 0).unwrap().is_one());
        assert!(c_norm(&g, 1).unwrap().is_one());
        // c_2 = G(1) = 1 + u
        assert_eq!(c_norm(&g, 2).unwrap(), Scalar::from_ratio(5, 4));
        // c_3 = G(1)^2 G(2)
        let expect = eval_G(&g, 1)
            .unwrap()
            .pow(2)
            .mul(&eval_G(&g, 2).unwrap());
        assert_eq!(c_norm(&g, 3).unwrap(), expect);
        // difference equation c_{n+1} = c_n e^{T_n} both directions
        for n in -3..=3i64 {
            let lhs = c_norm(&g, n + 1).unwrap();
            let mut et = Scalar::one();
            if n > 0 {
                for j in 1..=n {
                    et = et.mul(&eval_G(&g, j).unwrap());
                }
            } else {
                for j in (n + 1)..=0 {
                    et = et.mul(&eval_G(&g, j).unwrap().inverse().unwrap());
                }
            }
            assert_eq!(lhs, c_norm(&g, n).unwrap().mul(&et), "n = {n}");
        }
    }

    #[test]
    fn schur_ratio_matches_content_product() {
        // the ratio equals r^+_lambda(1/N)
        for n in 1..=5u64 {
            for lam in enumerate_partitions(5) {
                if lam.len() as u64 > n {
                    continue;
                }
                let ratio = schur_ratio(&lam, n);
                let g = WeightGen::plus(Scalar::from_ratio(1, n as i64));
                let r = content_product(&g, &lam, 0).unwrap();
                assert_eq!(ratio, r, "failed for {lam}, N={n}");
            }
        }
        assert!(schur_ratio(&p(&[1]), 3).is_one());
        assert_eq!(schur_ratio(&p(&[2]), 4), Scalar::from_ratio(5, 4));
        assert_eq!(schur_ratio(&p(&[1, 1]), 4), Scalar::from_ratio(3, 4));
    }

    #[test]
    fn weightgen_serde_round_trip() {
        let g = WeightGen::plus(Scalar::from_ratio(1, 2))
            .product(&WeightGen::exponential("w", Rat::from_integer(BigInt::from(3)), 2));
        let j = serde_json::to_string(&g).unwrap();
        let back: WeightGen = serde_json::from_str(&j).unwrap();
        assert_eq!(g, back);
        let trivial: WeightGen = serde_json::from_str(r#"{"u":[],"v":[]}"#).unwrap();
        assert!(trivial.is_trivial());
    }
}
