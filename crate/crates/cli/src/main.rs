//! Batch front end: parse spec files, run expansions, query coefficients,
//! drive verification suites, and tabulate connected-cover numbers.
//!
//! Exit codes: 0 success, 1 verification failure, 2 parse/config error,
//! 3 weight pole at a reachable content, 4 monomial outside the caps,
//! 5 wrong spec mode for the command.  `TAUFORGE_MEMO_MB` bounds the
//! in-process memo tables.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use tauforge_core::{
    c_norm, cauchy_kernel, chain_evaluate, classical_cutjoin, complex_moment, content_product,
    diagonal_operator, enumerate_partitions, expand_tau, expand_tau_restricted, hirota_check,
    log_series, partitions_of, schur, skew_schur, sym_character, tau_via_recursion, z_centralizer,
    CoreError, Ensemble, Exponents, MatrixChainPlan, MomentQuery, MultiSeries, NestedSpec, Rat,
    Scalar, Sign, WeightGen,
};

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

const EXIT_VERIFY: i32 = 1;
const EXIT_PARSE: i32 = 2;
const EXIT_POLE: i32 = 3;
const EXIT_CAP: i32 = 4;
const EXIT_MODE: i32 = 5;

#[derive(Parser)]
#[command(
    name = "tauforge",
    about = "Exact nested Schur tau-function expansions and verification suites"
)]
struct Cli {
    /// Worker threads for verification suites (default: all cores)
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Cauchy,
    Hirota,
    Cutjoin,
    Superint,
    Fullysimple,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Expand a nested spec into its full truncated series
    Expand {
        #[arg(long)]
        spec: PathBuf,
        /// Override the caps from the file, comma-separated (D_0,...,D_{m+1})
        #[arg(long)]
        caps: Option<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Query one coefficient without a full expansion
    Coeff {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        caps: Option<String>,
        /// Monomial, e.g. "t0_1^2*t1_2" for t_{0,1}^2 t_{1,2}
        #[arg(long)]
        monomial: String,
    },
    /// Run a named invariant suite and report each check
    Verify {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Corrupt one series coefficient first (negative control)
        #[arg(long)]
        inject_corruption: bool,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Tabulate connected cover numbers of a depth-0 spec as CSV
    Hurwitz {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        caps: Option<String>,
    },
    /// Pretty-print (or re-emit) a matrix-chain plan
    Plan {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
}

type CmdResult = Result<String, (i32, String)>;

fn fail<T>(code: i32, msg: impl Into<String>) -> Result<T, (i32, String)> {
    Err((code, msg.into()))
}

fn core_code(e: &CoreError) -> i32 {
    match e {
        CoreError::PoleAtContent { .. } => EXIT_POLE,
        _ => EXIT_PARSE,
    }
}

fn read_spec(path: &PathBuf, caps: &Option<String>) -> Result<NestedSpec, (i32, String)> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| (EXIT_PARSE, format!("cannot read {}: {e}", path.display())))?;
    let mut spec: NestedSpec = serde_json::from_str(&text)
        .map_err(|e| (EXIT_PARSE, format!("invalid spec JSON: {e}")))?;
    if let Some(list) = caps {
        let parsed: Result<Vec<u32>, _> = list.split(',').map(|s| s.trim().parse()).collect();
        let parsed = parsed.map_err(|e| (EXIT_PARSE, format!("invalid caps list: {e}")))?;
        if parsed.len() != spec.m + 2 {
            return fail(
                EXIT_PARSE,
                format!("caps list needs {} entries, got {}", spec.m + 2, parsed.len()),
            );
        }
        spec.caps = parsed;
    }
    spec.validate().map_err(|e| (EXIT_PARSE, format!("invalid spec: {e}")))?;
    Ok(spec)
}

fn scalar_string(c: &Scalar) -> String {
    match c.as_rat() {
        Some(r) => r.to_string(),
        None => serde_json::to_string(c).unwrap_or_else(|_| "?".into()),
    }
}

fn exponents_string(e: &Exponents) -> String {
    if e.is_unit() {
        return "-".into();
    }
    e.pairs()
        .iter()
        .map(|(k, a)| if *a == 1 { format!("{k}") } else { format!("{k}^{a}") })
        .collect::<Vec<_>>()
        .join(" ")
}

fn series_csv(series: &MultiSeries) -> String {
    let mut out = String::new();
    let names: Vec<String> = series.blocks().iter().map(|(b, _)| b.clone()).collect();
    out.push_str(&names.join(","));
    out.push_str(",coefficient\n");
    for (key, c) in series.terms() {
        let cells: Vec<String> = key.iter().map(exponents_string).collect();
        out.push_str(&format!("{},{}\n", cells.join(","), scalar_string(c)));
    }
    out
}

fn cmd_expand(spec: &PathBuf, caps: &Option<String>, format: Format) -> CmdResult {
    let spec = read_spec(spec, caps)?;
    let tau = expand_tau(&spec).map_err(|e| (core_code(&e), e.to_string()))?;
    match format {
        Format::Json => serde_json::to_string_pretty(&tau)
            .map_err(|e| (EXIT_PARSE, format!("serialization failed: {e}"))),
        Format::Csv => Ok(series_csv(&tau.series)),
    }
}

/// Parse "t0_1^2*t1_2" (also ',' or whitespace separators) into per-block
/// exponent vectors.
fn parse_monomial(text: &str) -> Result<BTreeMap<String, Vec<(u32, u32)>>, String> {
    let mut out: BTreeMap<String, Vec<(u32, u32)>> = BTreeMap::new();
    for token in text.split(['*', ',', ' ']).filter(|t| !t.is_empty()) {
        let (block, rest) = token
            .rsplit_once('_')
            .ok_or_else(|| format!("bad factor {token:?}: expected block_index"))?;
        let (k, a) = match rest.split_once('^') {
            Some((k, a)) => (
                k.parse::<u32>().map_err(|e| format!("bad index in {token:?}: {e}"))?,
                a.parse::<u32>().map_err(|e| format!("bad power in {token:?}: {e}"))?,
            ),
            None => (
                rest.parse::<u32>().map_err(|e| format!("bad index in {token:?}: {e}"))?,
                1,
            ),
        };
        if k == 0 {
            return Err(format!("bad factor {token:?}: variable index starts at 1"));
        }
        out.entry(block.to_string()).or_default().push((k, a));
    }
    Ok(out)
}

fn cmd_coeff(spec: &PathBuf, caps: &Option<String>, monomial: &str) -> CmdResult {
    let spec = read_spec(spec, caps)?;
    let factors = parse_monomial(monomial).map_err(|e| (EXIT_PARSE, e))?;
    let layout: Vec<String> = (0..=spec.m + 1).map(NestedSpec::block_name).collect();
    let mut wanted: BTreeMap<String, Exponents> = BTreeMap::new();
    for (block, pairs) in factors {
        if !layout.contains(&block) {
            return fail(EXIT_PARSE, format!("unknown block {block}"));
        }
        let mut e = Exponents::unit();
        for (k, a) in pairs {
            for _ in 0..a {
                e = e.mul(&Exponents::var(k));
            }
        }
        wanted.insert(block, e);
    }
    // cap check, then prune the expansion to exactly the needed degrees
    let mut pruned = spec.clone();
    for (j, name) in layout.iter().enumerate() {
        let degree = wanted.get(name).map(|e| e.degree()).unwrap_or(0);
        if degree > spec.caps[j] as u64 {
            return fail(
                EXIT_CAP,
                format!("monomial degree {degree} in {name} exceeds cap {}", spec.caps[j]),
            );
        }
        if !spec.insertions.contains_key(&j) {
            pruned.caps[j] = degree as u32;
        }
    }
    let tau = expand_tau(&pruned).map_err(|e| (core_code(&e), e.to_string()))?;
    let key: Vec<Exponents> = tau
        .series
        .blocks()
        .iter()
        .map(|(b, _)| wanted.get(b).cloned().unwrap_or_else(Exponents::unit))
        .collect();
    Ok(format!("{}\n", scalar_string(&tau.series.coefficient(&key))))
}

// ---------------------------------------------------------------------------
// Verification suites
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct CheckReport {
    name: String,
    scale: String,
    passed: bool,
    detail: Option<String>,
    seconds: f64,
}

fn check_cauchy() -> Result<(), String> {
    let cap = 6u32;
    let kernel = cauchy_kernel("t", "u", cap, cap).truncate_joint(&["t", "u"], 6);
    let blocks = kernel.blocks().to_vec();
    let mut sum = MultiSeries::zero(blocks.clone());
    for lam in enumerate_partitions(3) {
        sum = sum.add(
            &schur(&lam, "t", cap)
                .promote(blocks.clone())
                .mul(&schur(&lam, "u", cap).promote(blocks.clone())),
        );
    }
    if sum != kernel {
        return Err("diagonal Schur sum differs from the kernel".into());
    }
    for mu in enumerate_partitions(2) {
        for nu in enumerate_partitions(2) {
            let mut lhs = MultiSeries::zero(blocks.clone());
            for lam in enumerate_partitions(4) {
                let a = skew_schur(&lam, &mu, "t", cap);
                let b = skew_schur(&lam, &nu, "u", cap);
                lhs = lhs.add(&a.promote(blocks.clone()).mul(&b.promote(blocks.clone())));
            }
            let mut inner = MultiSeries::zero(blocks.clone());
            for rho in enumerate_partitions(mu.size().min(nu.size())) {
                let a = skew_schur(&nu, &rho, "t", cap);
                let b = skew_schur(&mu, &rho, "u", cap);
                inner = inner.add(&a.promote(blocks.clone()).mul(&b.promote(blocks.clone())));
            }
            if lhs.truncate_joint(&["t", "u"], 4)
                != kernel.mul(&inner).truncate_joint(&["t", "u"], 4)
            {
                return Err(format!("skew summation fails at mu={mu} nu={nu}"));
            }
        }
    }
    Ok(())
}

fn hirota_test_series(corrupt: bool) -> Result<MultiSeries, String> {
    let spec = NestedSpec::hypergeometric(1, WeightGen::plus(Scalar::from_ratio(1, 7)), 5, 5);
    let tau = expand_tau(&spec).map_err(|e| e.to_string())?;
    let mut series = tau.series;
    if corrupt {
        series.add_term(
            vec![
                Exponents::from_pairs(vec![(1, 1)]),
                Exponents::from_pairs(vec![(1, 1)]),
            ],
            Scalar::from_ratio(1, 5),
        );
    }
    Ok(series)
}

fn check_hirota(corrupt: bool) -> Result<(), String> {
    let series = hirota_test_series(corrupt)?;
    let rep = hirota_check(&series, "t1", 4).map_err(|e| e.to_string())?;
    match rep.failing {
        None => Ok(()),
        Some((monomial, value)) => Err(format!(
            "nonzero residue at {monomial}: {}",
            scalar_string(&value)
        )),
    }
}

fn check_cutjoin() -> Result<(), String> {
    for sigma in [Sign::Plus, Sign::Minus] {
        let spec = NestedSpec {
            n: 0,
            m: 1,
            sigma: vec![sigma],
            weights: vec![
                WeightGen::minus(Scalar::from_ratio(1, 9)),
                WeightGen::plus(Scalar::from_ratio(1, 7)),
            ],
            caps: vec![3, 3, 3],
            insertions: BTreeMap::new(),
        };
        let tau = expand_tau(&spec).map_err(|e| e.to_string())?;
        let rec = tau_via_recursion(&spec).map_err(|e| e.to_string())?;
        if rec != tau.series {
            return Err(format!("recursion route differs, sigma={sigma}"));
        }
    }
    // exponential weight: diagonal = normalization * exp(w * cut-and-join eigenvalue)
    let order = 3u32;
    let g = WeightGen::exponential("w", rat(1, 1), order);
    for n in [0i64, 2] {
        let op = diagonal_operator(&g, n, "t", 4).map_err(|e| e.to_string())?;
        let cn = c_norm(&g, n).map_err(|e| e.to_string())?;
        let cj = classical_cutjoin("t", n, 4);
        for lam in enumerate_partitions(4) {
            let eigen = cj.entry(&lam, &lam);
            let mut expect = Scalar::zero();
            let mut pow = Scalar::one();
            let mut fact = rat(1, 1);
            for k in 0..=order as u64 + 1 {
                if k > 0 {
                    pow = pow.mul(&g.w).mul(&eigen);
                    fact *= rat(k as i64, 1);
                }
                expect = expect.add(&pow.mul_rat(&(rat(1, 1) / fact.clone())));
                if pow.is_zero() {
                    break;
                }
            }
            if op.entry(&lam, &lam) != cn.mul(&expect) {
                return Err(format!("exponential diagonal differs at n={n} lam={lam}"));
            }
        }
    }
    Ok(())
}

fn check_superint() -> Result<(), String> {
    for n in 1..=3u32 {
        let g = WeightGen::plus(Scalar::from_ratio(1, n as i64));
        for lam in enumerate_partitions(3) {
            if lam.is_empty() || lam.len() as u32 > n {
                continue;
            }
            let d = lam.size();
            let r = content_product(&g, &lam, 0)
                .map_err(|e| e.to_string())?
                .as_rat()
                .unwrap();
            let s = schur(&lam, "t", d as u32);
            for (key, c) in s.terms() {
                let e = &key[0];
                let nu = e.to_partition();
                let mut avg = rat(0, 1);
                for mu in partitions_of(d) {
                    let chi = sym_character(&lam, &mu).map_err(|e| e.to_string())?;
                    let mut words: Vec<Vec<bool>> =
                        mu.parts().iter().map(|&k| vec![true; k as usize]).collect();
                    words.extend(nu.parts().iter().map(|&k| vec![false; k as usize]));
                    let m = complex_moment(&MomentQuery::new(
                        Ensemble::ComplexGaussian { n },
                        words,
                    ))
                    .map_err(|e| e.to_string())?;
                    avg += Rat::new(chi, z_centralizer(&mu)) * m.as_rat().unwrap();
                }
                let mut symmetry = rat(1, 1);
                for &(_, a) in e.pairs() {
                    for s in 1..=a as i64 {
                        symmetry *= rat(s, 1);
                    }
                }
                if avg / symmetry != r.clone() * c.as_rat().unwrap() {
                    return Err(format!("complex average differs, lam={lam} N={n}"));
                }
            }
        }
    }
    Ok(())
}

fn check_fullysimple() -> Result<(), String> {
    let n = 2u32;
    let h = Scalar::from_ratio(1, n as i64);
    let spec = NestedSpec {
        n: 0,
        m: 1,
        sigma: vec![Sign::Plus],
        weights: vec![WeightGen::plus(h.clone()).inverse(), WeightGen::plus(h)],
        caps: vec![3, 3, 3],
        insertions: BTreeMap::new(),
    };
    let tau = expand_tau_restricted(&spec, Some(n)).map_err(|e| e.to_string())?;
    let nn = Scalar::from_int(n as i64);
    let series = tau
        .series
        .scale_block("t0", &nn)
        .scale_block("t1", &nn)
        .truncate_joint(&["t0", "t1", "t2"], 3);
    let plan = MatrixChainPlan::simple_maps_chain(n);
    for (key, c) in series.terms() {
        let mut query = BTreeMap::new();
        for (i, (b, _)) in series.blocks().iter().enumerate() {
            query.insert(b.clone(), key[i].clone());
        }
        let wick = chain_evaluate(&plan, &query, 5).map_err(|e| e.to_string())?;
        if &wick != c {
            return Err(format!("chain value differs at {key:?}"));
        }
    }
    Ok(())
}

fn cmd_verify(suite: Suite, inject: bool, format: Format) -> Result<(String, bool), (i32, String)> {
    type Check = (&'static str, &'static str, Box<dyn Fn() -> Result<(), String> + Sync>);
    let mut checks: Vec<Check> = Vec::new();
    let want = |s: Suite| suite == s || suite == Suite::All;
    if want(Suite::Cauchy) {
        checks.push(("cauchy", "degree <= 6, skew <= 4", Box::new(check_cauchy)));
    }
    if want(Suite::Hirota) {
        checks.push((
            "hirota",
            "depth 0, residue degree 4",
            Box::new(move || check_hirota(inject)),
        ));
    }
    if want(Suite::Cutjoin) {
        checks.push((
            "cutjoin",
            "depth 1 recursion, exponential order 3",
            Box::new(check_cutjoin),
        ));
    }
    if want(Suite::Superint) {
        checks.push(("superint", "|lambda| <= 3, N <= 3", Box::new(check_superint)));
    }
    if want(Suite::Fullysimple) {
        checks.push(("fullysimple", "N = 2, degree <= 3", Box::new(check_fullysimple)));
    }
    let reports: Vec<CheckReport> = checks
        .par_iter()
        .map(|(name, scale, run)| {
            let start = Instant::now();
            let outcome = run();
            CheckReport {
                name: name.to_string(),
                scale: scale.to_string(),
                passed: outcome.is_ok(),
                detail: outcome.err(),
                seconds: start.elapsed().as_secs_f64(),
            }
        })
        .collect();
    let all_passed = reports.iter().all(|r| r.passed);
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&reports)
            .map_err(|e| (EXIT_PARSE, format!("serialization failed: {e}")))?,
        Format::Csv => {
            let mut out = String::from("check,scale,result,detail,seconds\n");
            for r in &reports {
                out.push_str(&format!(
                    "{},{},{},{},{:.3}\n",
                    r.name,
                    r.scale,
                    if r.passed { "PASS" } else { "FAIL" },
                    r.detail.clone().unwrap_or_default(),
                    r.seconds
                ));
            }
            out
        }
    };
    Ok((text, all_passed))
}

// ---------------------------------------------------------------------------
// Connected cover numbers
// ---------------------------------------------------------------------------

fn partition_cell(e: &Exponents) -> String {
    let parts = e.to_partition();
    if parts.is_empty() {
        return "-".into();
    }
    parts
        .parts()
        .iter()
        .map(|k| k.to_string())
        .collect::<Vec<_>>()
        .join("+")
}

fn cmd_hurwitz(spec: &PathBuf, caps: &Option<String>) -> CmdResult {
    let spec = read_spec(spec, caps)?;
    if spec.m != 0 {
        return fail(EXIT_MODE, format!("needs a depth-0 spec, got m = {}", spec.m));
    }
    let tau = expand_tau(&spec).map_err(|e| (core_code(&e), e.to_string()))?;
    // normalize the constant term before taking the logarithm
    let c0 = tau.series.constant_term();
    let inv = c0
        .inverse()
        .ok_or_else(|| (EXIT_PARSE, "non-invertible constant term".to_string()))?;
    let connected = log_series(&tau.series.mul_scalar(&inv))
        .map_err(|e| (core_code(&e), e.to_string()))?;
    let mut out = String::from("degree,profile_t0,profile_t1,coefficient\n");
    for (key, c) in connected.terms() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            key[1].degree(),
            partition_cell(&key[0]),
            partition_cell(&key[1]),
            scalar_string(c)
        ));
    }
    Ok(out)
}

fn cmd_plan(spec: &PathBuf, format: Format) -> CmdResult {
    let text = std::fs::read_to_string(spec)
        .map_err(|e| (EXIT_PARSE, format!("cannot read {}: {e}", spec.display())))?;
    let plan: MatrixChainPlan = serde_json::from_str(&text)
        .map_err(|e| (EXIT_PARSE, format!("invalid plan JSON: {e}")))?;
    plan.validate()
        .map_err(|e| (EXIT_PARSE, format!("invalid plan: {e}")))?;
    match format {
        Format::Json => serde_json::to_string_pretty(&plan)
            .map_err(|e| (EXIT_PARSE, format!("serialization failed: {e}"))),
        Format::Csv => Ok(plan.pretty()),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), (i32, String)> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| (EXIT_PARSE, format!("cannot write {}: {e}", path.display()))),
        None => {
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| (EXIT_PARSE, format!("cannot write output: {e}")))?;
            Ok(())
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
    let result: Result<(String, bool), (i32, String)> = match &cli.command {
        Command::Expand { spec, caps, format } => {
            cmd_expand(spec, caps, *format).map(|t| (t, true))
        }
        Command::Coeff { spec, caps, monomial } => {
            cmd_coeff(spec, caps, monomial).map(|t| (t, true))
        }
        Command::Verify { suite, inject_corruption, format } => {
            cmd_verify(*suite, *inject_corruption, *format)
        }
        Command::Hurwitz { spec, caps } => cmd_hurwitz(spec, caps).map(|t| (t, true)),
        Command::Plan { spec, format } => cmd_plan(spec, *format).map(|t| (t, true)),
    };
    match result {
        Ok((text, passed)) => {
            if let Err((code, msg)) = emit(&cli.out, &text) {
                eprintln!("error: {msg}");
                std::process::exit(code);
            }
            std::process::exit(if passed { 0 } else { EXIT_VERIFY });
        }
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(code);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monomial_parsing() {
        let m = parse_monomial("t0_1^2*t1_2").unwrap();
        assert_eq!(m["t0"], vec![(1, 2)]);
        assert_eq!(m["t1"], vec![(2, 1)]);
        let m = parse_monomial("t0_3,t0_3 t2_1^4").unwrap();
        assert_eq!(m["t0"], vec![(3, 1), (3, 1)]);
        assert_eq!(m["t2"], vec![(1, 4)]);
        assert!(parse_monomial("t0-1").is_err());
        assert!(parse_monomial("t0_0").is_err());
        assert!(parse_monomial("t0_x").is_err());
    }

    #[test]
    fn suite_checks_pass() {
        assert!(check_cauchy().is_ok());
        assert!(check_hirota(false).is_ok());
        let err = check_hirota(true).unwrap_err();
        assert!(err.contains("residue"), "{err}");
        assert!(check_cutjoin().is_ok());
        assert!(check_superint().is_ok());
        assert!(check_fullysimple().is_ok());
    }
}
